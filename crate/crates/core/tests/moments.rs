mod common;

use std::sync::Arc;

use common::{random_sg, random_spd};
use gsp_core::linalg::rel_diff;
use gsp_core::power::{AcGridModel, DiagonalFrequencyPrior, LaplacianModel, LinearFilterModel, SmoothPrior};
use gsp_core::{DMatrix, DVector, FilterSpec, MeasurementModel, NoiseModel, SampleMoments, SpectralGraph, TrainingSet};
use proptest::prelude::*;

fn laplacian_model(sg: &SpectralGraph<f64>, beta: f64, sigma2: f64) -> MeasurementModel<f64> {
    MeasurementModel::new(
        Arc::new(LaplacianModel::new(sg)),
        Arc::new(SmoothPrior::new(sg, beta).unwrap()),
        NoiseModel::white(sg.n(), sigma2).unwrap(),
    )
    .unwrap()
}

fn ac_model(sg: &SpectralGraph<f64>, grid: AcGridModel<f64>, sigma2: f64) -> MeasurementModel<f64> {
    MeasurementModel::new(
        Arc::new(grid),
        Arc::new(SmoothPrior::new(sg, 3.0).unwrap()),
        NoiseModel::white(sg.n(), sigma2).unwrap(),
    )
    .unwrap()
}

/// Straightforward two-pass statistics.
fn naive(ts: &TrainingSet<f64>, sg: &SpectralGraph<f64>, cww: &DMatrix<f64>) -> SampleMoments<f64> {
    let p = ts.len() as f64;
    let n = sg.n();
    let v = sg.eigvecs();
    let ymean = DVector::from_fn(n, |j, _| ts.g.column(j).sum() / p);
    let mut cxy = DMatrix::zeros(n, n);
    let mut cyy = DMatrix::zeros(n, n);
    let mut d = DVector::zeros(n);
    let mut dd = DVector::zeros(n);
    for i in 0..ts.len() {
        let xc = ts.x.row(i).transpose() - &ts.x_mean;
        let gc = ts.g.row(i).transpose() - &ymean;
        cxy += &xc * gc.transpose();
        cyy += &gc * gc.transpose();
        let xf = v.transpose() * &xc;
        let gf = v.transpose() * &gc;
        d += xf.component_mul(&gf);
        dd += gf.component_mul(&gf);
    }
    let wf = (v.transpose() * cww * v).diagonal();
    SampleMoments {
        samples: Some(ts.len()),
        x_mean: ts.x_mean.clone(),
        y_mean: ymean,
        cross_cov: cxy / p,
        y_cov: cyy / p + cww,
        freq_cross_diag: d / p,
        freq_var_diag: dd / p + wf,
    }
}

fn assert_moments_close(a: &SampleMoments<f64>, b: &SampleMoments<f64>, tol: f64) {
    let vd = |x: &DVector<f64>, y: &DVector<f64>| (x - y).amax() / (1.0 + y.amax());
    assert!(vd(&a.y_mean, &b.y_mean) < tol);
    assert!(rel_diff(&a.cross_cov, &b.cross_cov) < tol);
    assert!(rel_diff(&a.y_cov, &b.y_cov) < tol);
    assert!(vd(&a.freq_cross_diag, &b.freq_cross_diag) < tol);
    assert!(vd(&a.freq_var_diag, &b.freq_var_diag) < tol);
}

#[test]
fn one_pass_matches_two_pass() {
    let grid = AcGridModel::<f64>::ieee118();
    let sg = grid.spectral_graph().unwrap();
    let model = ac_model(&sg, grid, 0.05);
    // spans several accumulation chunks, with a ragged tail
    let ts = TrainingSet::generate(&model, 1300, 4).unwrap();
    let got = SampleMoments::from_training(&ts, &sg, model.noise.covariance()).unwrap();
    assert_moments_close(&got, &naive(&ts, &sg, model.noise.covariance()), 1e-10);
}

#[test]
fn training_set_is_deterministic() {
    let sg = random_sg(10, 3);
    let model = laplacian_model(&sg, 3.0, 0.1);
    let a = TrainingSet::generate(&model, 50, 9).unwrap();
    let b = TrainingSet::generate(&model, 50, 9).unwrap();
    assert_eq!(a.x, b.x);
    assert_eq!(a.g, b.g);
    let c = TrainingSet::generate(&model, 50, 10).unwrap();
    assert_ne!(a.x, c.x);
    assert!(TrainingSet::generate(&model, 1, 9).is_err());
}

#[test]
fn from_model_equals_generate_then_moments() {
    let grid = AcGridModel::<f64>::ieee118();
    let sg = grid.spectral_graph().unwrap();
    let model = ac_model(&sg, grid, 0.05);
    let ts = TrainingSet::generate(&model, 700, 21).unwrap();
    let a = SampleMoments::from_training(&ts, &sg, model.noise.covariance()).unwrap();
    let b = SampleMoments::from_model(&model, &sg, 700, 21).unwrap();
    assert_eq!(a, b);
}

#[test]
fn thread_count_does_not_change_moments() {
    let grid = AcGridModel::<f64>::ieee118();
    let sg = grid.spectral_graph().unwrap();
    let model = ac_model(&sg, grid, 0.05);
    let run = |threads: usize| {
        let pool = rayon::ThreadPoolBuilder::new().num_threads(threads).build().unwrap();
        pool.install(|| SampleMoments::from_model(&model, &sg, 2000, 5).unwrap())
    };
    let one = run(1);
    assert_eq!(one, run(3));
    assert_eq!(one, run(8));
}

#[test]
fn identical_samples_give_noise_only() {
    let sg = random_sg(7, 2);
    let x = DVector::from_fn(7, |i, _| i as f64 * 0.3 - 1.0);
    let g = DVector::from_fn(7, |i, _| (i as f64).sin());
    let p = 5;
    let ts = TrainingSet {
        x: DMatrix::from_fn(p, 7, |_, j| x[j]),
        g: DMatrix::from_fn(p, 7, |_, j| g[j]),
        x_mean: DVector::zeros(7),
        seed: 0,
    };
    let cww = random_spd(7, 0.5, 3);
    let m = SampleMoments::from_training(&ts, &sg, &cww).unwrap();
    assert!(m.cross_cov.amax() < 1e-12);
    assert!((&m.y_cov - &cww).amax() < 1e-12);
    let wf = sg.freq_diag(&cww).unwrap();
    assert!((&m.freq_var_diag - wf).amax() < 1e-12);
    assert!((&m.y_mean - g).amax() < 1e-12);
}

#[test]
fn frequency_diagonals_match_rotated_covariances() {
    let grid = AcGridModel::<f64>::ieee118();
    let sg = grid.spectral_graph().unwrap();
    let model = ac_model(&sg, grid, 0.05);
    let m = SampleMoments::from_model(&model, &sg, 600, 8).unwrap();
    let v = sg.eigvecs();
    let d = (v.transpose() * &m.cross_cov * v).diagonal();
    let dd = (v.transpose() * &m.y_cov * v).diagonal();
    assert!((&m.freq_cross_diag - &d).amax() < 1e-12 * (1.0 + d.amax()));
    assert!((&m.freq_var_diag - &dd).amax() < 1e-10 * (1.0 + dd.amax()));
}

#[test]
fn linear_model_covariance_converges() {
    let sg = random_sg(10, 17);
    let (beta, sigma2) = (3.0, 0.1);
    let model = laplacian_model(&sg, beta, sigma2);
    let m6 = SampleMoments::from_model(&model, &sg, 1_000_000, 1).unwrap();
    let analytic = sg.laplacian() * beta + DMatrix::identity(10, 10) * sigma2;
    assert!(rel_diff(&m6.y_cov, &analytic) < 0.02);
    let m5 = SampleMoments::from_model(&model, &sg, 100_000, 2).unwrap();
    assert!(rel_diff(&m5.y_cov, &m6.y_cov) < 0.01);
    // the 1e5-sample fluctuation of a 10-dim covariance is itself about 1%
    assert!(rel_diff(&m5.cross_cov, &m6.cross_cov) < 0.02);
}

#[test]
fn two_samples_give_positive_frequency_variance() {
    let sg = random_sg(8, 5);
    let prior = DiagonalFrequencyPrior::new(&sg, DVector::zeros(8), DVector::from_fn(8, |i, _| 1.0 + i as f64)).unwrap();
    let meas = LinearFilterModel::new(&sg, &FilterSpec::Linear { h: vec![1.0, 0.5] }).unwrap();
    let model = MeasurementModel::new(Arc::new(meas), Arc::new(prior), NoiseModel::white(8, 0.0).unwrap()).unwrap();
    for seed in 0..1000 {
        let m = SampleMoments::from_model(&model, &sg, 2, seed).unwrap();
        assert!(m.freq_var_diag.min() > 0.0, "seed {seed}");
    }
}

#[test]
fn smooth_prior_statistics() {
    let sg = AcGridModel::<f64>::ieee118().spectral_graph().unwrap();
    let prior = SmoothPrior::new(&sg, 3.0).unwrap();
    let p = 100_000;
    let xf = prior.sample_matrix(p, 6) * sg.eigvecs();
    assert!(xf.column(0).amax() < 1e-12);
    for n in 1..sg.n() {
        let var = xf.column(n).iter().map(|v| v * v).sum::<f64>() / p as f64;
        let expected = 3.0 / sg.eigvals()[n];
        assert!((var / expected - 1.0).abs() < 0.05, "n = {n}: {var} vs {expected}");
    }
}

#[test]
fn known_mean_is_not_estimated() {
    let sg = random_sg(6, 8);
    let mean = DVector::from_element(6, 2.0);
    let prior = DiagonalFrequencyPrior::new(&sg, sg.gft(&mean).unwrap(), DVector::from_element(6, 1.0)).unwrap();
    let meas = LinearFilterModel::new(&sg, &FilterSpec::identity()).unwrap();
    let model = MeasurementModel::new(Arc::new(meas), Arc::new(prior), NoiseModel::white(6, 0.1).unwrap()).unwrap();
    let ts = TrainingSet::generate(&model, 40, 3).unwrap();
    assert!((&ts.x_mean - &mean).amax() < 1e-12);
    let m = SampleMoments::from_training(&ts, &sg, model.noise.covariance()).unwrap();
    assert_eq!(m.x_mean, ts.x_mean);
    // centring x at E[x] rather than at its sample mean
    let sample_mean = DVector::from_fn(6, |j, _| ts.x.column(j).mean());
    let gmean = DVector::from_fn(6, |j, _| ts.g.column(j).mean());
    let mut c = DMatrix::zeros(6, 6);
    for i in 0..40 {
        c += (ts.x.row(i).transpose() - &mean) * (ts.g.row(i).transpose() - &gmean).transpose();
    }
    assert!((&m.cross_cov - c / 40.0).amax() < 1e-12);
    assert!((sample_mean - mean).amax() > 1e-6);
}

#[test]
fn exports() {
    let sg = random_sg(5, 1);
    let model = laplacian_model(&sg, 3.0, 0.1);
    let ts = TrainingSet::generate(&model, 4, 2).unwrap();
    let dir = tempfile::tempdir().unwrap();
    ts.write_csv(dir.path()).unwrap();
    let text = std::fs::read_to_string(dir.path().join("x.csv")).unwrap();
    let rows: Vec<Vec<f64>> = text
        .lines()
        .map(|l| l.split(',').map(|v| v.parse().unwrap()).collect())
        .collect();
    assert_eq!(rows.len(), 4);
    for (i, r) in rows.iter().enumerate() {
        for (j, v) in r.iter().enumerate() {
            assert_eq!(*v, ts.x[(i, j)]);
        }
    }
    assert!(dir.path().join("g.csv").exists());
    let m = SampleMoments::from_training(&ts, &sg, model.noise.covariance()).unwrap();
    let j = serde_json::to_value(m.to_json()).unwrap();
    for key in ["y_mean", "cross_cov", "y_cov", "freq_cross_diag", "freq_var_diag"] {
        assert!(j.get(key).is_some(), "{key}");
    }
    assert_eq!(j["freq_var_diag"][3].as_f64().unwrap(), m.freq_var_diag[3]);
}

#[test]
fn dimension_mismatch() {
    let sg = random_sg(5, 1);
    let model = laplacian_model(&sg, 3.0, 0.1);
    let ts = TrainingSet::generate(&model, 4, 2).unwrap();
    assert!(SampleMoments::from_training(&ts, &sg, &DMatrix::identity(4, 4)).is_err());
    let other = random_sg(6, 1);
    assert!(SampleMoments::from_training(&ts, &other, &DMatrix::identity(6, 6)).is_err());
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(32))]

    #[test]
    fn moments_are_consistent(n in 3usize..12, p in 2usize..1100, seed in any::<u64>()) {
        let sg = random_sg(n, seed);
        let model = laplacian_model(&sg, 2.0, 0.3);
        let ts = TrainingSet::generate(&model, p, seed).unwrap();
        let m = SampleMoments::from_training(&ts, &sg, model.noise.covariance()).unwrap();
        let reference = naive(&ts, &sg, model.noise.covariance());
        prop_assert!(rel_diff(&m.y_cov, &reference.y_cov) < 1e-10);
        prop_assert!(rel_diff(&m.cross_cov, &reference.cross_cov) < 1e-10 || m.cross_cov.amax() < 1e-12);
        prop_assert!((&m.y_cov - m.y_cov.transpose()).amax() < 1e-12);
        prop_assert!(m.freq_var_diag.min() > 0.0);
        let dd = sg.freq_diag(&m.y_cov).unwrap();
        prop_assert!((&m.freq_var_diag - &dd).amax() < 1e-10 * (1.0 + dd.amax()));
        let evs = gsp_core::linalg::sym_eigenvalues(&(&m.y_cov - model.noise.covariance()));
        prop_assert!(evs.iter().all(|&e| e > -1e-10));
    }
}
