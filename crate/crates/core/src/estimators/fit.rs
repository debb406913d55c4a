//! Weighted least-squares fits of parametrized graph filters to the
//! GSP-LMMSE response `f^ = d^ / D^`.

use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

use super::nelder_mead::{nelder_mead, NelderMeadOptions};
use super::{graph_filter_estimator, gsp_response, FittedGspEstimator};
use crate::error::{Error, Result};
use crate::filters::{lpi_basis, lpi_basis_from, tol_denom, vandermonde, FilterSpec};
use crate::graph::{ReducedSpectrum, SpectralGraph};
use crate::linalg::{self, MAX_CONDITION};
use crate::moments::SampleMoments;
use crate::Scalar;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Solver {
    /// Cholesky on the equilibrated normal equations.
    Closed,
    /// Conjugate gradients on the quadratic objective.
    ConjugateGradient,
    /// Simplex search over the denominator, closed form for the numerator.
    NelderMead,
}

#[derive(Debug, Clone)]
pub struct ArmaOptions {
    /// Denominator order `R`.
    pub r: usize,
    /// Numerator order `Q`.
    pub q: usize,
    pub mu: f64,
    /// Starting point for `a_1..a_R`; zeros when `None`.
    pub init: Option<Vec<f64>>,
    pub search: NelderMeadOptions,
}

impl ArmaOptions {
    pub fn new(r: usize, q: usize, mu: f64) -> Self {
        Self {
            r,
            q,
            mu,
            init: None,
            search: NelderMeadOptions::default(),
        }
    }
}

/// MSE of the graph-filter estimator with response `h`, up to the additive
/// constant `tr C_xx`: `sum_n D_nn h_n^2 - 2 d_n h_n`.
pub fn mse_objective<T: Scalar>(m: &SampleMoments<T>, h: &DVector<T>) -> T {
    let two = T::lit(2.0);
    (0..h.len()).fold(T::zero(), |s, n| {
        s + m.freq_var_diag[n] * h[n] * h[n] - two * m.freq_cross_diag[n] * h[n]
    })
}

/// Weighted least-squares distance `sum_n D_nn (h_n - d_n / D_nn)^2`.
pub fn wls_objective<T: Scalar>(m: &SampleMoments<T>, h: &DVector<T>) -> T {
    (0..h.len()).fold(T::zero(), |s, n| {
        let dn = m.freq_var_diag[n];
        let e = h[n] - m.freq_cross_diag[n] / dn;
        s + dn * e * e
    })
}

fn column_normalized<T: Scalar>(mut m: DMatrix<T>) -> DMatrix<T> {
    for mut col in m.column_iter_mut() {
        let n = col.norm();
        if n > T::zero() {
            col /= n;
        }
    }
    m
}

/// Full column rank of the LPI design matrix, which makes the LPI normal
/// matrix positive definite for positive weights.
pub fn lpi_rank_condition<T: Scalar>(eigvals: &[T], order: usize) -> bool {
    match lpi_basis_from(eigvals, order) {
        Ok(g) => linalg::numerical_rank(&column_normalized(g)) == order + 1,
        Err(_) => false,
    }
}

/// Full column rank of `diag(Phi_R a)^-1 Phi_Q` with a nonvanishing
/// denominator.
pub fn arma_rank_condition<T: Scalar>(eigvals: &[T], a: &[T], q: usize) -> bool {
    match psi(eigvals, a, q) {
        Some(p) => linalg::numerical_rank(&column_normalized(p)) == q + 1,
        None => false,
    }
}

/// `diag(Phi_R a)^-1 Phi_Q`, or `None` when a denominator is within
/// `tol_denom` of zero.
fn psi<T: Scalar>(eigvals: &[T], a: &[T], q: usize) -> Option<DMatrix<T>> {
    let den = vandermonde(eigvals, a.len() - 1) * DVector::from_column_slice(a);
    if den.iter().zip(eigvals).any(|(v, &lam)| !(v.abs() > tol_denom(a, lam))) {
        return None;
    }
    let mut p = vandermonde(eigvals, q);
    for (i, mut row) in p.row_iter_mut().enumerate() {
        row /= den[i];
    }
    Some(p)
}

/// Solves `(H) x = b` for a symmetric positive semi-definite `h`, falling
/// back to conjugate gradients when the direct route is ill-conditioned.
fn solve_normal<T: Scalar>(h: &DMatrix<T>, b: &DVector<T>) -> (DVector<T>, Solver) {
    if linalg::sym_condition(h) <= MAX_CONDITION {
        if let Some(x) = linalg::solve_spd(h, b) {
            return (x, Solver::Closed);
        }
    }
    let x = linalg::cg_minimize(h, b, 1e-14, 200 * (b.len() + 1));
    (x, Solver::ConjugateGradient)
}

fn weighted_normal<T: Scalar>(basis: &DMatrix<T>, w: &[T]) -> DMatrix<T> {
    let mut scaled = basis.clone();
    for (i, mut row) in scaled.row_iter_mut().enumerate() {
        row *= w[i];
    }
    basis.tr_mul(&scaled)
}

/// LPI fit: `alpha = (G' D G + mu M)^-1 G' d` with `M = diag(lambda_N^k)`.
pub fn fit_lpi<T: Scalar>(m: &SampleMoments<T>, sg: &SpectralGraph<T>, order: usize, mu: T) -> Result<FittedGspEstimator<T>> {
    sg.check_dim(m.dim())?;
    let target = gsp_response(m)?;
    let basis = lpi_basis(sg, order)?;
    let lmax = sg.lambda_max();
    let mut h = weighted_normal(&basis, m.freq_var_diag.as_slice());
    let mut p = T::one();
    for k in 0..=order {
        h[(k, k)] += mu * p;
        p *= lmax;
    }
    let b = basis.tr_mul(&m.freq_cross_diag);
    let (alpha, solver) = solve_normal(&h, &b);
    let spec = FilterSpec::Lpi {
        h: alpha.iter().copied().collect(),
    };
    let response = spec.response(sg)?;
    let penalty = (0..=order).fold((T::zero(), T::one()), |(s, p), k| (s + p * alpha[k] * alpha[k], p * lmax)).0;
    let objective = wls_objective(m, &response.values) + mu * penalty;
    let base = graph_filter_estimator("lpi", sg, m, &response.values)?;
    Ok(FittedGspEstimator {
        base,
        spec,
        response,
        target,
        mu,
        objective,
        iterations: 0,
        converged: true,
        solver,
    })
}

/// Numerator `c(a) = (Psi' D Psi + mu I)^-1 Psi' d` for a fixed denominator
/// `a` (with `a[0] = 1`), together with the profiled value `-(Psi' d)' c(a)`.
pub fn arma_inner_coefficients<T: Scalar>(
    eigvals: &[T],
    freq_var: &[T],
    freq_cross: &[T],
    a: &[T],
    q: usize,
    mu: T,
) -> Result<(DVector<T>, T)> {
    let p = psi(eigvals, a, q).ok_or_else(|| Error::InvalidFilter("ARMA denominator vanishes on the spectrum".into()))?;
    let mut h = weighted_normal(&p, freq_var);
    for k in 0..=q {
        h[(k, k)] += mu;
    }
    let b = p.tr_mul(&DVector::from_column_slice(freq_cross));
    let (c, _) = solve_normal(&h, &b);
    let value = -b.dot(&c);
    Ok((c, value))
}

struct ArmaFit<T: Scalar> {
    a: Vec<T>,
    c: Vec<T>,
    iterations: usize,
    converged: bool,
}

fn arma_search<T: Scalar>(eigvals: &[T], freq_var: &[T], freq_cross: &[T], opts: &ArmaOptions) -> Result<ArmaFit<T>> {
    if opts.q + 1 > eigvals.len() {
        return Err(Error::InvalidFilter(format!(
            "numerator order {} needs at least {} frequencies",
            opts.q,
            opts.q + 1
        )));
    }
    let mu = T::lit(opts.mu);
    let full = |free: &[f64]| -> Vec<T> { std::iter::once(T::one()).chain(free.iter().map(|&v| T::lit(v))).collect() };
    let profiled = |free: &[f64]| -> f64 {
        let a = full(free);
        match arma_inner_coefficients(eigvals, freq_var, freq_cross, &a, opts.q, mu) {
            Ok((_, v)) => v.as_f64() + opts.mu * free.iter().map(|x| x * x).sum::<f64>(),
            Err(_) => f64::INFINITY,
        }
    };
    let x0 = opts.init.clone().unwrap_or_else(|| vec![0.0; opts.r]);
    if x0.len() != opts.r {
        return Err(Error::dim(opts.r, x0.len()));
    }
    let res = nelder_mead(profiled, &x0, opts.search);
    if !res.fval.is_finite() {
        return Err(Error::InvalidFilter("no stable denominator found".into()));
    }
    if !res.converged {
        log::warn!("ARMA simplex search stopped after {} iterations without converging", res.iterations);
    }
    let a = full(&res.x);
    let (c, _) = arma_inner_coefficients(eigvals, freq_var, freq_cross, &a, opts.q, mu)?;
    Ok(ArmaFit {
        a,
        c: c.iter().copied().collect(),
        iterations: res.iterations,
        converged: res.converged,
    })
}

fn assemble<T: Scalar>(
    label: &str,
    spec: FilterSpec<T>,
    m: &SampleMoments<T>,
    sg: &SpectralGraph<T>,
    target: DVector<T>,
    mu: T,
    fit: &ArmaFit<T>,
) -> Result<FittedGspEstimator<T>> {
    let response = spec.response(sg)?;
    let reg = fit.c.iter().chain(&fit.a[1..]).fold(T::zero(), |s, v| s + *v * *v);
    let objective = wls_objective(m, &response.values) + mu * reg;
    let base = graph_filter_estimator(label, sg, m, &response.values)?;
    Ok(FittedGspEstimator {
        base,
        spec,
        response,
        target,
        mu,
        objective,
        iterations: fit.iterations,
        converged: fit.converged,
        solver: if fit.a.len() > 1 { Solver::NelderMead } else { Solver::Closed },
    })
}

/// ARMA(R, Q) fit: simplex search over `a_1..a_R` of the objective with the
/// numerator profiled out in closed form.
pub fn fit_arma<T: Scalar>(m: &SampleMoments<T>, sg: &SpectralGraph<T>, opts: &ArmaOptions) -> Result<FittedGspEstimator<T>> {
    sg.check_dim(m.dim())?;
    let target = gsp_response(m)?;
    let fit = arma_search(
        sg.eigvals().as_slice(),
        m.freq_var_diag.as_slice(),
        m.freq_cross_diag.as_slice(),
        opts,
    )?;
    let spec = FilterSpec::Arma {
        a: fit.a.clone(),
        c: fit.c.clone(),
    };
    assemble("arma", spec, m, sg, target, T::lit(opts.mu), &fit)
}

/// Polynomial (linear graph filter) fit of order `order`: the ARMA fit with
/// `R = 0`.
pub fn fit_linear<T: Scalar>(m: &SampleMoments<T>, sg: &SpectralGraph<T>, order: usize, mu: T) -> Result<FittedGspEstimator<T>> {
    sg.check_dim(m.dim())?;
    let target = gsp_response(m)?;
    let opts = ArmaOptions::new(0, order, mu.as_f64());
    let fit = arma_search(
        sg.eigvals().as_slice(),
        m.freq_var_diag.as_slice(),
        m.freq_cross_diag.as_slice(),
        &opts,
    )?;
    let spec = FilterSpec::Linear { h: fit.c.clone() };
    assemble("linear", spec, m, sg, target, mu, &fit)
}

/// Low-rank ARMA fit on the `cutoff` lowest frequencies; the response is 0
/// above the cutoff.
pub fn fit_lr_arma<T: Scalar>(m: &SampleMoments<T>, rs: &ReducedSpectrum<'_, T>, opts: &ArmaOptions) -> Result<FittedGspEstimator<T>> {
    let sg = rs.parent();
    sg.check_dim(m.dim())?;
    let target = gsp_response(m)?;
    let ns = rs.cutoff();
    let fit = arma_search(
        rs.eigvals(),
        &m.freq_var_diag.as_slice()[..ns],
        &m.freq_cross_diag.as_slice()[..ns],
        opts,
    )?;
    let spec = FilterSpec::LrArma {
        a: fit.a.clone(),
        c: fit.c.clone(),
        cutoff: ns,
    };
    assemble("lrarma", spec, m, sg, target, T::lit(opts.mu), &fit)
}
