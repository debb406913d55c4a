//! Parametrized graph frequency responses.

mod basis;

pub use basis::{lpi_basis, lpi_basis_from, vandermonde};

use nalgebra::DVector;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::graph::SpectralGraph;
use crate::Scalar;

/// A graph filter family together with its coefficients.
///
/// * `Lpi`: `h_0` at the zero frequency and `sum_k h_k lambda^-k` elsewhere.
/// * `Arma`: `sum_q c_q lambda^q / (1 + sum_r a_r lambda^r)`, with `a[0] = 1`.
/// * `Linear`: polynomial `sum_k h_k lambda^k` (ARMA with `a = (1)`).
/// * `LrArma`: ARMA on the `cutoff` lowest frequencies, exactly 0 above.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase")]
#[serde(bound(deserialize = "T: Scalar"))]
pub enum FilterSpec<T> {
    Lpi { h: Vec<T> },
    Arma { a: Vec<T>, c: Vec<T> },
    Linear { h: Vec<T> },
    #[serde(rename = "lrarma")]
    LrArma { a: Vec<T>, c: Vec<T>, cutoff: usize },
}

/// Filter response sampled at every eigenvalue of a graph.
#[derive(Debug, Clone, PartialEq)]
pub struct FrequencyResponse<T: Scalar> {
    pub values: DVector<T>,
}

impl<T: Scalar> FilterSpec<T> {
    pub fn identity() -> Self {
        FilterSpec::Linear { h: vec![T::one()] }
    }

    pub fn kind(&self) -> &'static str {
        match self {
            FilterSpec::Lpi { .. } => "lpi",
            FilterSpec::Arma { .. } => "arma",
            FilterSpec::Linear { .. } => "linear",
            FilterSpec::LrArma { .. } => "lrarma",
        }
    }

    /// Highest power of `lambda` (or of `1/lambda` for LPI) in the filter.
    pub fn order(&self) -> usize {
        match self {
            FilterSpec::Lpi { h } | FilterSpec::Linear { h } => h.len().saturating_sub(1),
            FilterSpec::Arma { a, c } | FilterSpec::LrArma { a, c, .. } => {
                a.len().max(c.len()).saturating_sub(1)
            }
        }
    }

    pub fn validate(&self) -> Result<()> {
        match self {
            FilterSpec::Lpi { h } | FilterSpec::Linear { h } => {
                if h.is_empty() {
                    return Err(Error::InvalidFilter("empty coefficient vector".into()));
                }
            }
            FilterSpec::Arma { a, c } | FilterSpec::LrArma { a, c, .. } => {
                if a.first() != Some(&T::one()) {
                    return Err(Error::InvalidFilter("ARMA denominator must start with a_0 = 1".into()));
                }
                if c.is_empty() {
                    return Err(Error::InvalidFilter("empty numerator".into()));
                }
            }
        }
        if let FilterSpec::LrArma { cutoff: 0, .. } = self {
            return Err(Error::InvalidFilter("LR-ARMA cutoff must be at least 1".into()));
        }
        let all = self.coefficients();
        if all.iter().any(|v| !v.is_finite()) {
            return Err(Error::InvalidFilter("non-finite coefficient".into()));
        }
        Ok(())
    }

    fn coefficients(&self) -> Vec<T> {
        match self {
            FilterSpec::Lpi { h } | FilterSpec::Linear { h } => h.clone(),
            FilterSpec::Arma { a, c } | FilterSpec::LrArma { a, c, .. } => a.iter().chain(c).copied().collect(),
        }
    }

    /// Response at every eigenvalue of `sg`. Checks the order bound `K < N`
    /// and, for LPI, connectivity.
    pub fn response(&self, sg: &SpectralGraph<T>) -> Result<FrequencyResponse<T>> {
        if self.order() >= sg.n() && sg.n() > 1 {
            return Err(Error::InvalidFilter(format!(
                "filter order {} must be below the graph size {}",
                self.order(),
                sg.n()
            )));
        }
        if let FilterSpec::LrArma { cutoff, .. } = self {
            if *cutoff > sg.n() {
                return Err(Error::OutOfRange {
                    what: "cutoff",
                    value: *cutoff,
                    min: 1,
                    max: sg.n(),
                });
            }
        }
        if matches!(self, FilterSpec::Lpi { .. }) {
            sg.require_connected()?;
        }
        let values = self.evaluate(sg.eigvals().as_slice())?;
        Ok(FrequencyResponse { values })
    }

    /// Response at an ascending eigenvalue list. Entry 0 is the zero
    /// frequency for the LPI family.
    pub fn evaluate(&self, eigvals: &[T]) -> Result<DVector<T>> {
        self.validate()?;
        let n = eigvals.len();
        match self {
            FilterSpec::Lpi { h } => {
                let mut out = DVector::zeros(n);
                if n == 0 {
                    return Ok(out);
                }
                out[0] = h[0];
                for (i, &lam) in eigvals.iter().enumerate().skip(1) {
                    if !(lam > T::zero()) {
                        return Err(Error::Disconnected { lambda2: lam.as_f64() });
                    }
                    let inv = T::one() / lam;
                    let mut p = T::one();
                    let mut s = h[0];
                    for &hk in &h[1..] {
                        p *= inv;
                        s += hk * p;
                    }
                    out[i] = s;
                }
                Ok(out)
            }
            FilterSpec::Linear { h } => Ok(DVector::from_fn(n, |i, _| poly(h, eigvals[i]))),
            FilterSpec::Arma { a, c } => rational(a, c, eigvals, n),
            FilterSpec::LrArma { a, c, cutoff } => {
                if *cutoff > n {
                    return Err(Error::OutOfRange {
                        what: "cutoff",
                        value: *cutoff,
                        min: 1,
                        max: n,
                    });
                }
                rational(a, c, eigvals, *cutoff)
                    .map(|head| DVector::from_fn(n, |i, _| if i < *cutoff { head[i] } else { T::zero() }))
            }
        }
    }

    /// `V diag(response) V' x`.
    pub fn apply(&self, sg: &SpectralGraph<T>, x: &DVector<T>) -> Result<DVector<T>> {
        let r = self.response(sg)?;
        let xf = sg.gft(x)?;
        sg.igft(&xf.component_mul(&r.values))
    }

    /// Coefficients converted to another scalar type.
    pub fn cast<U: Scalar>(&self) -> FilterSpec<U> {
        let cv = |v: &Vec<T>| v.iter().map(|x| U::lit(x.as_f64())).collect();
        match self {
            FilterSpec::Lpi { h } => FilterSpec::Lpi { h: cv(h) },
            FilterSpec::Linear { h } => FilterSpec::Linear { h: cv(h) },
            FilterSpec::Arma { a, c } => FilterSpec::Arma { a: cv(a), c: cv(c) },
            FilterSpec::LrArma { a, c, cutoff } => FilterSpec::LrArma {
                a: cv(a),
                c: cv(c),
                cutoff: *cutoff,
            },
        }
    }

    /// Same filter with the LR-ARMA cutoff clamped to `n` vertices.
    pub fn clamped_to(&self, n: usize) -> Self {
        match self {
            FilterSpec::LrArma { a, c, cutoff } => FilterSpec::LrArma {
                a: a.clone(),
                c: c.clone(),
                cutoff: (*cutoff).clamp(1, n.max(1)),
            },
            other => other.clone(),
        }
    }
}

/// Scale-aware guard on an ARMA denominator at `lambda`:
/// `1e-10 (1 + sum_r |a_r| lambda^r)`. At `lambda_N` this is the bound
/// `1e-10 (1 + |a|_1 lambda_N^R)` up to lower-order terms.
pub fn tol_denom<T: Scalar>(a: &[T], lambda: T) -> T {
    let mut p = T::one();
    let mut s = T::zero();
    for &ar in a.iter().skip(1) {
        p *= lambda.abs();
        s += ar.abs() * p;
    }
    T::lit(1e-10) * (T::one() + s)
}

fn poly<T: Scalar>(coef: &[T], lam: T) -> T {
    let mut p = T::one();
    let mut s = T::zero();
    for &ck in coef {
        s += ck * p;
        p *= lam;
    }
    s
}

fn rational<T: Scalar>(a: &[T], c: &[T], eigvals: &[T], count: usize) -> Result<DVector<T>> {
    let mut out = DVector::zeros(count);
    for i in 0..count {
        let den = poly(a, eigvals[i]);
        let tol = tol_denom(a, eigvals[i]);
        if den.abs() <= tol {
            return Err(Error::UnstableFilter {
                index: i,
                value: den.as_f64(),
                tol: tol.as_f64(),
            });
        }
        out[i] = poly(c, eigvals[i]) / den;
    }
    Ok(out)
}
