//! Training sets and the sample statistics the estimators are built from.
//!
//! Noise never enters the training samples: `C_ww` is added to the sample
//! covariances analytically.

use std::fs::File;
use std::path::Path;

use nalgebra::{DMatrix, DVector};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::graph::SpectralGraph;
use crate::model::MeasurementModel;
use crate::rng;
use crate::Scalar;

/// Samples per accumulation chunk. Chunks are reduced independently and merged
/// in index order, so results do not depend on the thread count.
pub const CHUNK: usize = 512;

/// Chunks processed per parallel batch.
const BATCH: usize = 32;

/// `P` prior draws and their noiseless measurements, one sample per row.
#[derive(Debug, Clone)]
pub struct TrainingSet<T: Scalar> {
    pub x: DMatrix<T>,
    pub g: DMatrix<T>,
    /// Known prior mean `E[x]`; never estimated.
    pub x_mean: DVector<T>,
    pub seed: u64,
}

impl<T: Scalar> TrainingSet<T> {
    /// Sample `p` draws `x_p` from the model's prior (stream `(seed, p)`)
    /// and evaluates `g(x_p)`.
    pub fn generate(model: &MeasurementModel<T>, p: usize, seed: u64) -> Result<Self> {
        check_count(p)?;
        let rows: Vec<(DVector<T>, DVector<T>)> = (0..p).into_par_iter().map(|i| draw(model, seed, i)).collect();
        let n = model.input_dim();
        let m = model.output_dim();
        let x = DMatrix::from_fn(p, n, |i, j| rows[i].0[j]);
        let g = DMatrix::from_fn(p, m, |i, j| rows[i].1[j]);
        Ok(Self {
            x,
            g,
            x_mean: model.prior.mean(),
            seed,
        })
    }

    pub fn len(&self) -> usize {
        self.x.nrows()
    }

    pub fn is_empty(&self) -> bool {
        self.x.nrows() == 0
    }

    /// Writes `x.csv` and `g.csv` (no header, 17 significant digits).
    pub fn write_csv(&self, dir: &Path) -> Result<()> {
        std::fs::create_dir_all(dir)?;
        for (name, m) in [("x.csv", &self.x), ("g.csv", &self.g)] {
            let mut w = csv::WriterBuilder::new().has_headers(false).from_writer(File::create(dir.join(name))?);
            for row in m.row_iter() {
                w.write_record(row.iter().map(|v| format!("{:.16e}", v.as_f64())))?;
            }
            w.flush()?;
        }
        Ok(())
    }
}

fn check_count(p: usize) -> Result<()> {
    if p < 2 {
        return Err(Error::OutOfRange {
            what: "training samples",
            value: p,
            min: 2,
            max: usize::MAX,
        });
    }
    Ok(())
}

fn draw<T: Scalar>(model: &MeasurementModel<T>, seed: u64, index: usize) -> (DVector<T>, DVector<T>) {
    let mut r = rng::stream(seed, index as u64);
    let x = model.prior.sample(&mut r);
    let g = model.measurement.eval(&x);
    (x, g)
}

/// Sample mean, full covariances and their frequency-domain diagonals.
#[derive(Debug, Clone, PartialEq)]
pub struct SampleMoments<T: Scalar> {
    /// Training size, `None` for exact (analytic) moments.
    pub samples: Option<usize>,
    pub x_mean: DVector<T>,
    /// `y^ = mean of g(x_p)`.
    pub y_mean: DVector<T>,
    /// `C^_xy`, centred with the known `E[x]`.
    pub cross_cov: DMatrix<T>,
    /// `C^_yy`, including `C_ww`.
    pub y_cov: DMatrix<T>,
    /// `d^`: mean of `(x~_p - E[x~]) o (V' g_p - V' y^)`.
    pub freq_cross_diag: DVector<T>,
    /// `diag(D^)`, including `diag(V' C_ww V)`.
    pub freq_var_diag: DVector<T>,
}

impl<T: Scalar> SampleMoments<T> {
    pub fn from_training(ts: &TrainingSet<T>, sg: &SpectralGraph<T>, noise_cov: &DMatrix<T>) -> Result<Self> {
        check_count(ts.len())?;
        sg.check_dim(ts.x.ncols())?;
        sg.check_dim(ts.g.ncols())?;
        sg.check_dim(ts.x_mean.len())?;
        check_noise(sg, noise_cov)?;
        let p = ts.len();
        let shift = ts.g.row(0).transpose();
        let get = |i: usize| (ts.x.row(i).transpose(), ts.g.row(i).transpose());
        let acc = accumulate(sg, &ts.x_mean, &shift, p, get);
        Ok(acc.finish(sg, &ts.x_mean, &shift, noise_cov))
    }

    /// Same statistics as `generate` followed by `from_training`, bit for
    /// bit, without keeping the samples.
    pub fn from_model(model: &MeasurementModel<T>, sg: &SpectralGraph<T>, p: usize, seed: u64) -> Result<Self> {
        check_count(p)?;
        sg.check_dim(model.input_dim())?;
        sg.check_dim(model.output_dim())?;
        let noise_cov = model.noise.covariance();
        check_noise(sg, noise_cov)?;
        let x_mean = model.prior.mean();
        let shift = draw(model, seed, 0).1;
        let acc = accumulate(sg, &x_mean, &shift, p, |i| draw(model, seed, i));
        Ok(acc.finish(sg, &x_mean, &shift, noise_cov))
    }

    /// Exact moments from known covariances; `y_cov` must include the noise.
    pub fn from_covariances(
        sg: &SpectralGraph<T>,
        x_mean: DVector<T>,
        y_mean: DVector<T>,
        cross_cov: DMatrix<T>,
        y_cov: DMatrix<T>,
    ) -> Result<Self> {
        sg.check_dim(x_mean.len())?;
        sg.check_dim(y_mean.len())?;
        let freq_cross_diag = sg.freq_diag(&cross_cov)?;
        let freq_var_diag = sg.freq_diag(&y_cov)?;
        Ok(Self {
            samples: None,
            x_mean,
            y_mean,
            cross_cov,
            y_cov,
            freq_cross_diag,
            freq_var_diag,
        })
    }

    pub fn dim(&self) -> usize {
        self.x_mean.len()
    }

    pub fn to_json(&self) -> MomentsJson {
        let mat = |m: &DMatrix<T>| (0..m.nrows()).map(|i| m.row(i).iter().map(|v| v.as_f64()).collect()).collect();
        let vec = |v: &DVector<T>| v.iter().map(|x| x.as_f64()).collect();
        MomentsJson {
            samples: self.samples,
            x_mean: vec(&self.x_mean),
            y_mean: vec(&self.y_mean),
            cross_cov: mat(&self.cross_cov),
            y_cov: mat(&self.y_cov),
            freq_cross_diag: vec(&self.freq_cross_diag),
            freq_var_diag: vec(&self.freq_var_diag),
        }
    }
}

fn check_noise<T: Scalar>(sg: &SpectralGraph<T>, c: &DMatrix<T>) -> Result<()> {
    sg.check_dim(c.nrows())?;
    sg.check_dim(c.ncols())
}

/// JSON form of [`SampleMoments`]; matrices are lists of rows.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct MomentsJson {
    pub samples: Option<usize>,
    pub x_mean: Vec<f64>,
    pub y_mean: Vec<f64>,
    pub cross_cov: Vec<Vec<f64>>,
    pub y_cov: Vec<Vec<f64>>,
    pub freq_cross_diag: Vec<f64>,
    pub freq_var_diag: Vec<f64>,
}

/// Neumaier-compensated elementwise sum of matrices.
#[derive(Debug, Clone)]
struct CompSum<T: Scalar> {
    sum: DMatrix<T>,
    comp: DMatrix<T>,
}

impl<T: Scalar> CompSum<T> {
    fn zeros(r: usize, c: usize) -> Self {
        Self {
            sum: DMatrix::zeros(r, c),
            comp: DMatrix::zeros(r, c),
        }
    }

    fn add(&mut self, m: &DMatrix<T>) {
        for ((s, c), &v) in self.sum.iter_mut().zip(self.comp.iter_mut()).zip(m.iter()) {
            let t = *s + v;
            if s.abs() >= v.abs() {
                *c += (*s - t) + v;
            } else {
                *c += (v - t) + *s;
            }
            *s = t;
        }
    }

    fn value(&self) -> DMatrix<T> {
        &self.sum + &self.comp
    }
}

/// Raw sums of one chunk, all centred at `E[x]` and at the shift `g_0`.
struct Partial<T: Scalar> {
    sx: DMatrix<T>,
    sg: DMatrix<T>,
    sxg: DMatrix<T>,
    sgg: DMatrix<T>,
    fx: DMatrix<T>,
    fg: DMatrix<T>,
    fxg: DMatrix<T>,
    fgg: DMatrix<T>,
}

struct Accumulator<T: Scalar> {
    count: usize,
    parts: [CompSum<T>; 8],
}

fn chunk_partial<T: Scalar, F>(sg: &SpectralGraph<T>, x_mean: &DVector<T>, shift: &DVector<T>, lo: usize, hi: usize, get: &F) -> Partial<T>
where
    F: Fn(usize) -> (DVector<T>, DVector<T>) + Sync,
{
    let n = sg.n();
    let c = hi - lo;
    let mut xc = DMatrix::zeros(n, c);
    let mut gc = DMatrix::zeros(n, c);
    for (k, i) in (lo..hi).enumerate() {
        let (x, g) = get(i);
        xc.set_column(k, &(x - x_mean));
        gc.set_column(k, &(g - shift));
    }
    let v = sg.eigvecs();
    let xf = v.tr_mul(&xc);
    let gf = v.tr_mul(&gc);
    let rowsum = |m: &DMatrix<T>| DMatrix::from_fn(m.nrows(), 1, |i, _| m.row(i).sum());
    Partial {
        sx: rowsum(&xc),
        sg: rowsum(&gc),
        sxg: &xc * gc.transpose(),
        sgg: &gc * gc.transpose(),
        fx: rowsum(&xf),
        fg: rowsum(&gf),
        fxg: rowsum(&xf.component_mul(&gf)),
        fgg: rowsum(&gf.component_mul(&gf)),
    }
}

fn accumulate<T: Scalar, F>(sg: &SpectralGraph<T>, x_mean: &DVector<T>, shift: &DVector<T>, p: usize, get: F) -> Accumulator<T>
where
    F: Fn(usize) -> (DVector<T>, DVector<T>) + Sync,
{
    let n = sg.n();
    let mut acc = Accumulator {
        count: p,
        parts: [
            CompSum::zeros(n, 1),
            CompSum::zeros(n, 1),
            CompSum::zeros(n, n),
            CompSum::zeros(n, n),
            CompSum::zeros(n, 1),
            CompSum::zeros(n, 1),
            CompSum::zeros(n, 1),
            CompSum::zeros(n, 1),
        ],
    };
    let n_chunks = p.div_ceil(CHUNK);
    let mut start = 0;
    while start < n_chunks {
        let end = (start + BATCH).min(n_chunks);
        let batch: Vec<Partial<T>> = (start..end)
            .into_par_iter()
            .map(|c| chunk_partial(sg, x_mean, shift, c * CHUNK, ((c + 1) * CHUNK).min(p), &get))
            .collect();
        for part in &batch {
            let fields = [&part.sx, &part.sg, &part.sxg, &part.sgg, &part.fx, &part.fg, &part.fxg, &part.fgg];
            for (dst, src) in acc.parts.iter_mut().zip(fields) {
                dst.add(src);
            }
        }
        start = end;
    }
    acc
}

impl<T: Scalar> Accumulator<T> {
    fn finish(self, sg: &SpectralGraph<T>, x_mean: &DVector<T>, shift: &DVector<T>, noise_cov: &DMatrix<T>) -> SampleMoments<T> {
        let inv_p = T::one() / T::lit(self.count as f64);
        let v: Vec<DMatrix<T>> = self.parts.iter().map(|s| s.value() * inv_p).collect();
        let col = |m: &DMatrix<T>| m.column(0).into_owned();
        let (mx, mg) = (col(&v[0]), col(&v[1]));
        let y_mean = shift + &mg;
        let cross_cov = &v[2] - &mx * mg.transpose();
        let mut g_cov = &v[3] - &mg * mg.transpose();
        g_cov = (&g_cov + g_cov.transpose()) * T::lit(0.5);
        let y_cov = g_cov + noise_cov;
        let (fx, fg) = (col(&v[4]), col(&v[5]));
        let freq_cross_diag = col(&v[6]) - fx.component_mul(&fg);
        let noise_freq = sg.freq_diag(noise_cov).expect("dimensions checked by caller");
        let freq_var_diag = col(&v[7]) - fg.component_mul(&fg) + noise_freq;
        SampleMoments {
            samples: Some(self.count),
            x_mean: x_mean.clone(),
            y_mean,
            cross_cov,
            y_cov,
            freq_cross_diag,
            freq_var_diag,
        }
    }
}
