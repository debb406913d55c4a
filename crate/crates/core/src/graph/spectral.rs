use nalgebra::{DMatrix, DVector, SymmetricEigen};

use super::{WeightedGraph, TOL_CONNECT};
use crate::error::{Error, Result};
use crate::Scalar;

/// Relative gap below which neighbouring eigenvalues are treated as one
/// degenerate cluster.
const CLUSTER_RTOL: f64 = 1e-9;

/// Graph with its Laplacian `L = V diag(lambda) V'` computed once.
///
/// Eigenvalues are ascending. Within a degenerate cluster the eigenvectors are
/// the Gram-Schmidt orthonormalization of the canonical basis vectors
/// projected onto the cluster's eigenspace, in index order. Each column is
/// then signed so that its largest-magnitude entry (lowest index on ties) is
/// positive. Two builds of the same graph give bit-identical `V`.
#[derive(Debug, Clone)]
pub struct SpectralGraph<T: Scalar> {
    graph: WeightedGraph<T>,
    laplacian: DMatrix<T>,
    eigvals: DVector<T>,
    eigvecs: DMatrix<T>,
}

impl<T: Scalar> SpectralGraph<T> {
    pub fn build(graph: WeightedGraph<T>) -> Result<Self> {
        let laplacian = graph.laplacian();
        let (eigvals, eigvecs) = ordered_eigen(&laplacian)?;
        Ok(Self {
            graph,
            laplacian,
            eigvals,
            eigvecs,
        })
    }

    pub fn graph(&self) -> &WeightedGraph<T> {
        &self.graph
    }

    pub fn n(&self) -> usize {
        self.graph.n_vertices()
    }

    pub fn laplacian(&self) -> &DMatrix<T> {
        &self.laplacian
    }

    pub fn eigvals(&self) -> &DVector<T> {
        &self.eigvals
    }

    pub fn eigvecs(&self) -> &DMatrix<T> {
        &self.eigvecs
    }

    pub fn lambda_max(&self) -> T {
        self.eigvals[self.n() - 1]
    }

    /// Second-smallest eigenvalue; 0 for a single vertex.
    pub fn lambda2(&self) -> T {
        if self.n() < 2 {
            T::zero()
        } else {
            self.eigvals[1]
        }
    }

    /// `1e-9 * lambda_N`, the threshold for calling an eigenvalue zero.
    pub fn tol_zero(&self) -> T {
        T::lit(1e-9) * self.lambda_max()
    }

    pub fn is_connected(&self) -> bool {
        self.n() == 1 || self.lambda2().as_f64() > TOL_CONNECT
    }

    pub fn require_connected(&self) -> Result<()> {
        if self.is_connected() {
            Ok(())
        } else {
            Err(Error::Disconnected {
                lambda2: self.lambda2().as_f64(),
            })
        }
    }

    /// Graph Fourier transform `V' x`.
    pub fn gft(&self, x: &DVector<T>) -> Result<DVector<T>> {
        self.check_dim(x.len())?;
        Ok(self.eigvecs.tr_mul(x))
    }

    /// Inverse transform `V x~`.
    pub fn igft(&self, xf: &DVector<T>) -> Result<DVector<T>> {
        self.check_dim(xf.len())?;
        Ok(&self.eigvecs * xf)
    }

    /// `V diag(response) V'`.
    pub fn filter_matrix(&self, response: &DVector<T>) -> Result<DMatrix<T>> {
        self.check_dim(response.len())?;
        let mut scaled = self.eigvecs.clone();
        for (k, mut col) in scaled.column_iter_mut().enumerate() {
            col *= response[k];
        }
        Ok(scaled * self.eigvecs.transpose())
    }

    /// `diag(V' m V)` without forming the product.
    pub fn freq_diag(&self, m: &DMatrix<T>) -> Result<DVector<T>> {
        self.check_dim(m.nrows())?;
        self.check_dim(m.ncols())?;
        let mv = m * &self.eigvecs;
        Ok(DVector::from_fn(self.n(), |k, _| self.eigvecs.column(k).dot(&mv.column(k))))
    }

    /// `V' m V`.
    pub fn to_freq(&self, m: &DMatrix<T>) -> Result<DMatrix<T>> {
        self.check_dim(m.nrows())?;
        self.check_dim(m.ncols())?;
        Ok(self.eigvecs.tr_mul(&(m * &self.eigvecs)))
    }

    pub fn reduce(&self, cutoff: Cutoff) -> Result<ReducedSpectrum<'_, T>> {
        let ns = cutoff.resolve(self.n())?;
        Ok(ReducedSpectrum { parent: self, cutoff: ns })
    }

    pub(crate) fn check_dim(&self, got: usize) -> Result<()> {
        if got == self.n() {
            Ok(())
        } else {
            Err(Error::dim(self.n(), got))
        }
    }
}

/// How many of the smallest graph frequencies to keep.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Cutoff {
    /// `floor(fraction * N)`, clamped to `[1, N]`.
    Fraction(f64),
    /// Exact count; must lie in `[1, N]`.
    Count(usize),
}

impl Cutoff {
    pub fn resolve(self, n: usize) -> Result<usize> {
        match self {
            Cutoff::Fraction(f) => {
                if !(f.is_finite() && f >= 0.0) {
                    return Err(Error::InvalidInput(format!("cutoff fraction {f} is not a nonnegative number")));
                }
                Ok(((f * n as f64).floor() as usize).clamp(1, n))
            }
            Cutoff::Count(c) => {
                if (1..=n).contains(&c) {
                    Ok(c)
                } else {
                    Err(Error::OutOfRange {
                        what: "cutoff",
                        value: c,
                        min: 1,
                        max: n,
                    })
                }
            }
        }
    }
}

/// The `N_s` lowest graph frequencies of a [`SpectralGraph`].
#[derive(Debug, Clone, Copy)]
pub struct ReducedSpectrum<'a, T: Scalar> {
    parent: &'a SpectralGraph<T>,
    cutoff: usize,
}

impl<'a, T: Scalar> ReducedSpectrum<'a, T> {
    pub fn parent(&self) -> &'a SpectralGraph<T> {
        self.parent
    }

    pub fn cutoff(&self) -> usize {
        self.cutoff
    }

    pub fn eigvals(&self) -> &[T] {
        &self.parent.eigvals.as_slice()[..self.cutoff]
    }

    pub fn eigvecs(&self) -> DMatrix<T> {
        self.parent.eigvecs.columns(0, self.cutoff).into_owned()
    }

    /// `sum_{n <= N_s} lambda_n^k v_n v_n'`; for `k = 0` the rank-`N_s`
    /// projector rather than the identity.
    pub fn laplacian_power(&self, k: u32) -> DMatrix<T> {
        let vs = self.eigvecs();
        let mut scaled = vs.clone();
        for (c, mut col) in scaled.column_iter_mut().enumerate() {
            let mut p = T::one();
            for _ in 0..k {
                p *= self.parent.eigvals[c];
            }
            col *= p;
        }
        scaled * vs.transpose()
    }

    pub fn laplacian(&self) -> DMatrix<T> {
        self.laplacian_power(1)
    }

    pub fn projector(&self) -> DMatrix<T> {
        self.laplacian_power(0)
    }
}

fn ordered_eigen<T: Scalar>(l: &DMatrix<T>) -> Result<(DVector<T>, DMatrix<T>)> {
    let n = l.nrows();
    if l.iter().any(|v| !v.is_finite()) {
        return Err(Error::InvalidGraph("Laplacian has non-finite entries".into()));
    }
    let eig = SymmetricEigen::new(l.clone());
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&a, &b| {
        eig.eigenvalues[a]
            .partial_cmp(&eig.eigenvalues[b])
            .expect("finite eigenvalues")
            .then(a.cmp(&b))
    });
    let mut vals = DVector::from_fn(n, |k, _| eig.eigenvalues[order[k]]);
    let mut vecs = DMatrix::from_fn(n, n, |i, k| eig.eigenvectors[(i, order[k])]);

    let lmax = vals[n - 1].max(T::zero());
    let tol_zero = T::lit(1e-9) * lmax;
    if vals[0].abs() <= tol_zero {
        vals[0] = T::zero();
    }

    let gap = T::lit(CLUSTER_RTOL) * lmax.max(T::one());
    let mut start = 0;
    while start < n {
        let mut end = start + 1;
        while end < n && vals[end] - vals[end - 1] <= gap {
            end += 1;
        }
        if end - start > 1 {
            let basis = canonical_basis(&vecs.columns(start, end - start).into_owned());
            vecs.columns_mut(start, end - start).copy_from(&basis);
        }
        start = end;
    }

    for mut col in vecs.column_iter_mut() {
        let amax = col.iter().fold(T::zero(), |m, v| m.max(v.abs()));
        let thr = amax * (T::one() - T::lit(1e-12));
        let lead = col.iter().position(|v| v.abs() >= thr).unwrap_or(0);
        if col[lead] < T::zero() {
            col.neg_mut();
        }
    }
    Ok((vals, vecs))
}

/// Orthonormal basis of `span(u)` built from the projections of `e_0, e_1, ...`
/// in index order.
fn canonical_basis<T: Scalar>(u: &DMatrix<T>) -> DMatrix<T> {
    let (n, k) = u.shape();
    let mut out: Vec<DVector<T>> = Vec::with_capacity(k);
    let residual = |i: usize, out: &[DVector<T>]| {
        let mut v = u * u.row(i).transpose();
        for _ in 0..2 {
            for q in out {
                let c = q.dot(&v);
                v -= q * c;
            }
        }
        v
    };
    let thr = T::lit(1e-3);
    for i in 0..n {
        if out.len() == k {
            break;
        }
        let v = residual(i, &out);
        let nv = v.norm();
        if nv > thr {
            out.push(v / nv);
        }
    }
    // Tiny clusters in huge graphs can leave every projection short; top up
    // with the largest remaining residuals.
    while out.len() < k {
        let (v, nv) = (0..n)
            .map(|i| {
                let v = residual(i, &out);
                let nv = v.norm();
                (v, nv)
            })
            .fold((DVector::zeros(n), T::zero()), |best, cand| if cand.1 > best.1 { cand } else { best });
        out.push(v / nv);
    }
    DMatrix::from_columns(&out)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn path3() -> SpectralGraph<f64> {
        SpectralGraph::build(WeightedGraph::new(3, [(0, 1, 1.0), (1, 2, 1.0)]).unwrap()).unwrap()
    }

    fn close(a: &[f64], b: &[f64], tol: f64) -> bool {
        a.len() == b.len() && a.iter().zip(b).all(|(x, y)| (x - y).abs() < tol)
    }

    #[test]
    fn path_graph_spectrum() {
        let sg = path3();
        assert!(close(sg.eigvals().as_slice(), &[0.0, 1.0, 3.0], 1e-12));
        assert_eq!(sg.eigvals()[0], 0.0);
    }

    #[test]
    fn complete_graph_spectrum() {
        let g = WeightedGraph::new(3, [(0, 1, 1.0), (0, 2, 1.0), (1, 2, 1.0)]).unwrap();
        let sg = SpectralGraph::build(g).unwrap();
        assert!(close(sg.eigvals().as_slice(), &[0.0, 3.0, 3.0], 1e-12));
        let v = sg.eigvecs();
        assert!((v.tr_mul(v) - DMatrix::identity(3, 3)).norm() < 1e-12);
        // The degenerate pair starts from e_0 projected off the constant vector.
        let c1 = v.column(1);
        assert!((c1[0] - (2.0f64 / 3.0).sqrt()).abs() < 1e-12);
        assert!((c1[1] - c1[2]).abs() < 1e-12);
    }

    #[test]
    fn single_edge() {
        let g = WeightedGraph::new(2, [(0, 1, 2.0)]).unwrap();
        let sg = SpectralGraph::build(g).unwrap();
        assert_eq!(sg.laplacian(), &DMatrix::from_row_slice(2, 2, &[2.0, -2.0, -2.0, 2.0]));
        assert!(close(sg.eigvals().as_slice(), &[0.0, 4.0], 1e-12));
    }

    #[test]
    fn gft_of_constant_and_basis() {
        let sg = path3();
        let ones = DVector::from_element(3, 1.0);
        let f = sg.gft(&ones).unwrap();
        assert!((f[0].abs() - 3f64.sqrt()).abs() < 1e-12);
        assert!(f[1].abs() < 1e-12 && f[2].abs() < 1e-12);
        let e1 = DVector::from_vec(vec![1.0, 0.0, 0.0]);
        assert_eq!(sg.igft(&e1).unwrap(), sg.eigvecs().column(0).into_owned());
        assert_eq!(sg.igft(&DVector::zeros(3)).unwrap(), DVector::zeros(3));
        assert!(matches!(sg.gft(&DVector::zeros(2)), Err(Error::DimensionMismatch { .. })));
        assert!(sg.igft(&DVector::zeros(4)).is_err());
    }

    #[test]
    fn sign_rule() {
        let sg = path3();
        for col in sg.eigvecs().column_iter() {
            let (imax, _) = col.iter().enumerate().fold((0, 0.0f64), |b, (i, v)| {
                if v.abs() > b.1 + 1e-12 {
                    (i, v.abs())
                } else {
                    b
                }
            });
            assert!(col[imax] > 0.0);
        }
    }

    #[test]
    fn reduced_spectrum() {
        let sg = path3();
        let full = sg.reduce(Cutoff::Count(3)).unwrap();
        assert!((full.laplacian() - sg.laplacian()).norm() < 1e-12);
        let one = sg.reduce(Cutoff::Count(1)).unwrap();
        assert!(one.laplacian().norm() == 0.0);
        assert!(sg.reduce(Cutoff::Count(0)).is_err());
        assert!(sg.reduce(Cutoff::Count(4)).is_err());
        assert_eq!(Cutoff::Fraction(0.3).resolve(118).unwrap(), 35);
        assert_eq!(Cutoff::Fraction(0.0).resolve(10).unwrap(), 1);
        assert_eq!(Cutoff::Fraction(2.0).resolve(10).unwrap(), 10);
    }

    #[test]
    fn disconnected_is_reported() {
        let g = WeightedGraph::new(4, [(0, 1, 1.0), (2, 3, 1.0)]).unwrap();
        let sg = SpectralGraph::build(g).unwrap();
        assert!(!sg.is_connected());
        assert!(matches!(sg.require_connected(), Err(Error::Disconnected { .. })));
    }

    #[test]
    fn works_in_f32() {
        let g = WeightedGraph::new(3, [(0, 1, 1.0f32), (1, 2, 1.0)]).unwrap();
        let sg = SpectralGraph::build(g).unwrap();
        assert!((sg.eigvals()[2] - 3.0).abs() < 1e-5);
    }
}
