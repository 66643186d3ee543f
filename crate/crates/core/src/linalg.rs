//! Small dense complex linear algebra and a Levenberg–Marquardt solver for
//! holomorphic systems.

use alloc::vec;
use alloc::vec::Vec;
use num_traits::Zero;

use crate::mat2::C64;

/// Square matrix in row-major order.
#[derive(Debug, Clone, PartialEq)]
pub struct DMat {
    pub n: usize,
    pub data: Vec<C64>,
}

impl DMat {
    pub fn zeros(n: usize) -> Self {
        DMat { n, data: vec![C64::zero(); n * n] }
    }

    pub fn from_rows(rows: &[Vec<C64>]) -> Self {
        let n = rows.len();
        let mut m = DMat::zeros(n);
        for (i, r) in rows.iter().enumerate() {
            assert_eq!(r.len(), n, "rows must be square");
            m.data[i * n..(i + 1) * n].copy_from_slice(r);
        }
        m
    }

    pub fn get(&self, i: usize, j: usize) -> C64 {
        self.data[i * self.n + j]
    }

    pub fn set(&mut self, i: usize, j: usize, v: C64) {
        self.data[i * self.n + j] = v;
    }

    /// Determinant by elimination with partial pivoting.
    pub fn det(&self) -> C64 {
        let n = self.n;
        let mut a = self.data.clone();
        let mut det = C64::new(1.0, 0.0);
        for k in 0..n {
            let p = (k..n).max_by(|&i, &j| a[i * n + k].norm().total_cmp(&a[j * n + k].norm())).unwrap();
            if a[p * n + k].is_zero() {
                return C64::zero();
            }
            if p != k {
                for j in 0..n {
                    a.swap(k * n + j, p * n + j);
                }
                det = -det;
            }
            let piv = a[k * n + k];
            det *= piv;
            for i in k + 1..n {
                let f = a[i * n + k] / piv;
                for j in k..n {
                    let v = a[k * n + j];
                    a[i * n + j] -= f * v;
                }
            }
        }
        det
    }

    /// Solves `A x = b`; `None` when a pivot falls below `tiny`.
    pub fn solve(&self, b: &[C64], tiny: f64) -> Option<Vec<C64>> {
        let n = self.n;
        let mut a = self.data.clone();
        let mut x = b.to_vec();
        for k in 0..n {
            let p = (k..n).max_by(|&i, &j| a[i * n + k].norm().total_cmp(&a[j * n + k].norm()))?;
            if a[p * n + k].norm() <= tiny {
                return None;
            }
            if p != k {
                for j in 0..n {
                    a.swap(k * n + j, p * n + j);
                }
                x.swap(k, p);
            }
            let piv = a[k * n + k];
            for i in k + 1..n {
                let f = a[i * n + k] / piv;
                for j in k..n {
                    let v = a[k * n + j];
                    a[i * n + j] -= f * v;
                }
                let v = x[k];
                x[i] -= f * v;
            }
        }
        for k in (0..n).rev() {
            let mut s = x[k];
            for j in k + 1..n {
                s -= a[k * n + j] * x[j];
            }
            x[k] = s / a[k * n + k];
        }
        Some(x)
    }
}

/// Numerical rank of a rectangular matrix given as rows, with pivots below
/// `tol` (relative to the largest entry) treated as zero.
pub fn rank(rows: &[Vec<C64>], tol: f64) -> usize {
    let mut a: Vec<Vec<C64>> = rows.to_vec();
    let m = a.len();
    let n = a.first().map_or(0, |r| r.len());
    let scale = a.iter().flatten().map(|z| z.norm()).fold(0.0, f64::max).max(f64::MIN_POSITIVE);
    let mut r = 0;
    for c in 0..n {
        if r == m {
            break;
        }
        let p = (r..m).max_by(|&i, &j| a[i][c].norm().total_cmp(&a[j][c].norm())).unwrap();
        if a[p][c].norm() <= tol * scale {
            continue;
        }
        a.swap(r, p);
        for i in r + 1..m {
            let f = a[i][c] / a[r][c];
            for j in c..n {
                let v = a[r][j];
                a[i][j] -= f * v;
            }
        }
        r += 1;
    }
    r
}

#[derive(Debug, Clone, Copy)]
pub struct LmOptions {
    pub max_iter: usize,
    /// Stop once the residual norm drops below this.
    pub tol: f64,
    /// Step for the central-difference Jacobian.
    pub step: f64,
}

impl Default for LmOptions {
    fn default() -> Self {
        LmOptions { max_iter: 200, tol: 1e-13, step: 1e-7 }
    }
}

#[derive(Debug, Clone)]
pub struct LmResult {
    pub x: Vec<C64>,
    pub residual: f64,
    pub iterations: usize,
    pub converged: bool,
}

fn norm(v: &[C64]) -> f64 {
    num_traits::Float::sqrt(v.iter().map(|z| z.norm_sqr()).sum::<f64>())
}

/// Minimizes `‖f(x)‖` for a holomorphic `f: ℂⁿ → ℂᵐ` (`m ≥ n`). `f` returns
/// `None` where it is undefined; such points are treated as infinitely bad.
pub fn levenberg_marquardt<F>(f: F, x0: &[C64], opts: LmOptions) -> LmResult
where
    F: Fn(&[C64]) -> Option<Vec<C64>>,
{
    let n = x0.len();
    let mut x = x0.to_vec();
    let Some(mut r) = f(&x) else {
        return LmResult { x, residual: f64::INFINITY, iterations: 0, converged: false };
    };
    let m = r.len();
    let mut cost = norm(&r);
    let mut damping = 1e-3;
    let mut it = 0;
    while it < opts.max_iter && cost > opts.tol {
        it += 1;
        // Jacobian columns.
        let mut jac = vec![vec![C64::zero(); m]; n];
        let mut ok = true;
        for j in 0..n {
            let h = opts.step * (1.0 + x[j].norm());
            let mut xp = x.clone();
            let mut xm = x.clone();
            xp[j] += h;
            xm[j] -= h;
            match (f(&xp), f(&xm)) {
                (Some(fp), Some(fm)) => {
                    for i in 0..m {
                        jac[j][i] = (fp[i] - fm[i]) / (2.0 * h);
                    }
                }
                _ => ok = false,
            }
        }
        if !ok {
            break;
        }
        // Normal equations J^H J and J^H r.
        let mut jhj = DMat::zeros(n);
        let mut jhr = vec![C64::zero(); n];
        for a in 0..n {
            for b in 0..n {
                let s: C64 = (0..m).map(|i| jac[a][i].conj() * jac[b][i]).sum();
                jhj.set(a, b, s);
            }
            jhr[a] = -(0..m).map(|i| jac[a][i].conj() * r[i]).sum::<C64>();
        }
        let mut improved = false;
        for _ in 0..30 {
            let mut sys = jhj.clone();
            for a in 0..n {
                let v = sys.get(a, a);
                sys.set(a, a, v + damping * (1.0 + v.re));
            }
            let Some(dx) = sys.solve(&jhr, 0.0) else {
                damping *= 10.0;
                continue;
            };
            let xn: Vec<C64> = x.iter().zip(&dx).map(|(a, b)| a + b).collect();
            if let Some(rn) = f(&xn) {
                let cn = norm(&rn);
                if cn.is_finite() && cn < cost {
                    x = xn;
                    r = rn;
                    cost = cn;
                    damping = (damping / 10.0).max(1e-15);
                    improved = true;
                    break;
                }
            }
            damping *= 10.0;
        }
        if !improved {
            break;
        }
    }
    LmResult { x, residual: cost, iterations: it, converged: cost <= opts.tol }
}
