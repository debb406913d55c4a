//! Small dense linear-algebra helpers on top of nalgebra.

use nalgebra::{DMatrix, DVector};

use crate::Scalar;

/// Rank threshold: singular values above `RANK_RTOL * sigma_max` count.
pub const RANK_RTOL: f64 = 1e-8;

/// Largest condition number still treated as invertible.
pub const MAX_CONDITION: f64 = 1e12;

pub fn frobenius<T: Scalar>(m: &DMatrix<T>) -> T {
    m.norm()
}

/// Relative Frobenius distance `|a - b| / |b|` (absolute when `b = 0`).
pub fn rel_diff<T: Scalar>(a: &DMatrix<T>, b: &DMatrix<T>) -> T {
    let nb = b.norm();
    let d = (a - b).norm();
    if nb > T::zero() {
        d / nb
    } else {
        d
    }
}

/// Eigenvalues of a symmetric matrix, ascending.
pub fn sym_eigenvalues<T: Scalar>(m: &DMatrix<T>) -> Vec<T> {
    let mut ev: Vec<T> = m.clone().symmetric_eigenvalues().iter().copied().collect();
    ev.sort_by(|a, b| a.partial_cmp(b).expect("finite eigenvalues"));
    ev
}

/// 2-norm condition number of a symmetric matrix. Infinite when singular or
/// when the input holds non-finite entries.
pub fn sym_condition<T: Scalar>(m: &DMatrix<T>) -> f64 {
    if m.iter().any(|v| !v.is_finite()) {
        return f64::INFINITY;
    }
    let ev = sym_eigenvalues(m);
    let max = ev.iter().fold(0.0f64, |acc, v| acc.max(v.abs().as_f64()));
    let min = ev.iter().fold(f64::INFINITY, |acc, v| acc.min(v.abs().as_f64()));
    if min == 0.0 {
        f64::INFINITY
    } else {
        max / min
    }
}

pub fn singular_values<T: Scalar>(m: &DMatrix<T>) -> Vec<T> {
    m.clone().svd(false, false).singular_values.iter().copied().collect()
}

/// Number of singular values above `RANK_RTOL * sigma_max`.
pub fn numerical_rank<T: Scalar>(m: &DMatrix<T>) -> usize {
    let sv = singular_values(m);
    let smax = sv.iter().fold(T::zero(), |a, &b| a.max(b));
    if smax == T::zero() {
        return 0;
    }
    let thr = smax * T::lit(RANK_RTOL);
    sv.iter().filter(|&&s| s > thr).count()
}

/// Moore–Penrose pseudo-inverse.
pub fn pinv<T: Scalar>(m: &DMatrix<T>) -> DMatrix<T> {
    let from_svd = |svd: nalgebra::SVD<T, nalgebra::Dyn, nalgebra::Dyn>| {
        let smax = svd.singular_values.iter().fold(T::zero(), |a, &b| a.max(b));
        let eps = smax * T::lit(1e-12) * T::lit(m.nrows().max(m.ncols()) as f64);
        svd.pseudo_inverse(eps).expect("svd computed with u and v")
    };
    let default = from_svd(m.clone().svd(true, true));
    // nalgebra's default convergence tolerance leaves ~1e-8 errors on some
    // rank-deficient inputs, but a tighter one can stall and return junk on
    // others, so keep whichever satisfies m x m = m better
    let tight = T::default_epsilon() * T::default_epsilon();
    let Some(svd) = nalgebra::SVD::try_new(m.clone(), true, true, tight, 10_000) else {
        return default;
    };
    let refined = from_svd(svd);
    let residual = |x: &DMatrix<T>| (m * x * m - m).norm();
    if residual(&refined) < residual(&default) {
        refined
    } else {
        default
    }
}

/// Solves `h x = b` for symmetric positive-definite `h` after scaling it to
/// unit diagonal. Returns `None` when the scaled matrix is not numerically PD.
pub fn solve_spd<T: Scalar>(h: &DMatrix<T>, b: &DVector<T>) -> Option<DVector<T>> {
    let n = h.nrows();
    let mut s = DVector::zeros(n);
    for i in 0..n {
        let d = h[(i, i)];
        if !(d > T::zero()) || !d.is_finite() {
            return None;
        }
        s[i] = T::one() / d.sqrt();
    }
    let scaled = DMatrix::from_fn(n, n, |i, j| h[(i, j)] * s[i] * s[j]);
    let rhs = b.component_mul(&s);
    let chol = scaled.cholesky()?;
    let z = chol.solve(&rhs);
    let x = z.component_mul(&s);
    x.iter().all(|v| v.is_finite()).then_some(x)
}

/// Minimizes the convex quadratic `x' h x - 2 b' x` by Jacobi-preconditioned
/// conjugate gradients, restarting every `n` steps.
///
/// Used as the iterative quadratic-programming route when the normal matrix is
/// too ill-conditioned for a direct solve.
pub fn cg_minimize<T: Scalar>(h: &DMatrix<T>, b: &DVector<T>, rtol: f64, max_iter: usize) -> DVector<T> {
    let n = b.len();
    let precond = DVector::from_fn(n, |i, _| {
        let d = h[(i, i)];
        if d > T::zero() {
            T::one() / d
        } else {
            T::one()
        }
    });
    let bnorm = b.norm().as_f64().max(f64::MIN_POSITIVE);
    let mut x = DVector::zeros(n);
    let mut iter = 0;
    'outer: while iter < max_iter {
        let mut r = b - h * &x;
        let mut z = r.component_mul(&precond);
        let mut p = z.clone();
        let mut rz = r.dot(&z);
        for _ in 0..n.max(1) {
            if r.norm().as_f64() <= rtol * bnorm {
                break 'outer;
            }
            let hp = h * &p;
            let php = p.dot(&hp);
            if !(php > T::zero()) {
                break 'outer;
            }
            let alpha = rz / php;
            x += &p * alpha;
            r -= &hp * alpha;
            z = r.component_mul(&precond);
            let rz_new = r.dot(&z);
            p = &z + &p * (rz_new / rz);
            rz = rz_new;
            iter += 1;
        }
    }
    x
}

/// Neumaier-compensated running sum.
#[derive(Debug, Clone, Copy)]
pub struct CompensatedSum<T> {
    sum: T,
    comp: T,
}

impl<T: Scalar> Default for CompensatedSum<T> {
    fn default() -> Self {
        Self { sum: T::zero(), comp: T::zero() }
    }
}

impl<T: Scalar> CompensatedSum<T> {
    pub fn add(&mut self, v: T) {
        let t = self.sum + v;
        if self.sum.abs() >= v.abs() {
            self.comp += (self.sum - t) + v;
        } else {
            self.comp += (v - t) + self.sum;
        }
        self.sum = t;
    }

    pub fn value(&self) -> T {
        self.sum + self.comp
    }
}
