//! Acceptance gate. Prints one PASS/FAIL line per criterion and exits
//! non-zero if any fails.

use std::path::{Path, PathBuf};
use std::process::Command;
use std::time::Instant;

use chrono::NaiveDate;
use flucast::eval::{metrics, student_t_cdf, train_eval, two_sided_p, SplitConfig};
use flucast::features::{cosine_distance, Modality};
use flucast::matrix::Matrix;
use flucast::models::gbt::{fit_gbt, GbtParams};
use flucast::models::knn::fit_knn;
use flucast::models::linear::{coordinate_descent, fit_linear};
use flucast::models::svr::{fit_svr, rbf, SvrParams};
use flucast::models::{ModelKind, ModelSpec};
use flucast::pipeline::{featurize, load_inputs, CorpusPaths, FeaturizeConfig};
use flucast::rng;
use flucast::synth::{generate, write_corpus, SynthConfig};
use nalgebra::{DMatrix, DVector};
use rand::Rng;

type Outcome = Result<String, String>;

fn fixture_dir() -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("tests/fixtures/mini")
}

fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_flucast"))
}

fn run(args: &[&str]) -> Result<(), String> {
    let out = bin().args(args).output().map_err(|e| e.to_string())?;
    if out.status.success() {
        Ok(())
    } else {
        Err(format!(
            "`flucast {}` exited {:?}: {}",
            args.join(" "),
            out.status.code(),
            String::from_utf8_lossy(&out.stderr).trim()
        ))
    }
}

fn ensure(cond: bool, msg: impl FnOnce() -> String) -> Result<(), String> {
    if cond {
        Ok(())
    } else {
        Err(msg())
    }
}

fn random_matrix(r: &mut rng::Rng, n: usize, p: usize) -> Matrix {
    let data = (0..n * p).map(|_| r.random_range(-3.0..3.0)).collect();
    Matrix::from_vec(n, p, data).unwrap()
}

fn random_targets(r: &mut rng::Rng, x: &Matrix) -> Vec<f64> {
    let w: Vec<f64> = (0..x.cols()).map(|_| r.random_range(-2.0..2.0)).collect();
    x.iter_rows()
        .map(|row| 1.5 + row.iter().zip(&w).map(|(a, b)| a * b).sum::<f64>() + r.random_range(-0.5..0.5))
        .collect()
}

/// Ridge optimum from the uncentered normal equations with an explicit
/// intercept row: `[XᵀX + nαI, Xᵀ1; 1ᵀX, n] [w; b] = [Xᵀy; 1ᵀy]`.
fn ridge_oracle(x: &Matrix, y: &[f64], alpha: f64) -> Vec<f64> {
    let (n, p) = (x.rows(), x.cols());
    let mut a = DMatrix::<f64>::zeros(p + 1, p + 1);
    let mut rhs = DVector::<f64>::zeros(p + 1);
    for (row, &t) in x.iter_rows().zip(y) {
        for j in 0..p {
            for k in 0..p {
                a[(j, k)] += row[j] * row[k];
            }
            a[(j, p)] += row[j];
            a[(p, j)] += row[j];
            rhs[j] += row[j] * t;
        }
        rhs[p] += t;
    }
    a[(p, p)] = n as f64;
    for j in 0..p {
        a[(j, j)] += n as f64 * alpha;
    }
    let sol = a.lu().solve(&rhs).expect("nonsingular");
    sol.iter().take(p).copied().collect()
}

fn lasso_objective(x: &Matrix, y: &[f64], alpha: f64, w: &[f64]) -> f64 {
    let n = x.rows() as f64;
    let fitted: Vec<f64> = x.iter_rows().map(|r| r.iter().zip(w).map(|(a, b)| a * b).sum()).collect();
    let b = y.iter().zip(&fitted).map(|(t, f)| t - f).sum::<f64>() / n;
    let rss: f64 = y.iter().zip(&fitted).map(|(t, f)| (t - f - b).powi(2)).sum();
    rss / (2.0 * n) + alpha * w.iter().map(|v| v.abs()).sum::<f64>()
}

/// Grid minimum of the LASSO objective over two weights, zooming in three
/// times around the best cell.
fn lasso_grid_min(x: &Matrix, y: &[f64], alpha: f64) -> f64 {
    let ols = ridge_oracle(x, y, 0.0);
    let radius = 1.5 * ols.iter().fold(0.0_f64, |m, v| m.max(v.abs())) + 1.0;
    let (mut c0, mut c1, mut half) = (0.0, 0.0, radius);
    let mut best = f64::INFINITY;
    let steps = 200;
    for _ in 0..4 {
        let h = 2.0 * half / steps as f64;
        let mut arg = (c0, c1);
        for i in 0..=steps {
            for j in 0..=steps {
                let w = [c0 - half + i as f64 * h, c1 - half + j as f64 * h];
                let v = lasso_objective(x, y, alpha, &w);
                if v < best {
                    best = v;
                    arg = (w[0], w[1]);
                }
            }
        }
        (c0, c1) = arg;
        half = 4.0 * h;
    }
    best
}

/// Euclidean projection onto `{β ∈ [0,C]^{2n} : Σα − Σα* = 0}` by bisection
/// on the multiplier of the equality constraint.
fn project(u: &[f64], n: usize, c: f64) -> Vec<f64> {
    let balance = |theta: f64| -> f64 {
        (0..n)
            .map(|i| (u[i] - theta).clamp(0.0, c) - (u[n + i] + theta).clamp(0.0, c))
            .sum()
    };
    let bound = u.iter().fold(0.0_f64, |m, v| m.max(v.abs())) + c + 1.0;
    let (mut lo, mut hi) = (-bound, bound);
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if balance(mid) > 0.0 {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    let theta = 0.5 * (lo + hi);
    (0..2 * n)
        .map(|i| if i < n { (u[i] - theta).clamp(0.0, c) } else { (u[i] + theta).clamp(0.0, c) })
        .collect()
}

/// Training-set predictions of ε-SVR from accelerated projected gradient on
/// the dense dual.
fn svr_oracle(x: &Matrix, y: &[f64], c: f64, eps: f64, gamma: f64) -> Vec<f64> {
    let n = x.rows();
    let k: Vec<Vec<f64>> = (0..n).map(|i| (0..n).map(|j| rbf(x.row(i), x.row(j), gamma)).collect()).collect();
    let lipschitz = 2.0 * (0..n).map(|i| k[i][i]).sum::<f64>();
    let step = 1.0 / lipschitz;
    let grad = |b: &[f64]| -> Vec<f64> {
        let kd: Vec<f64> = (0..n).map(|i| (0..n).map(|j| k[i][j] * (b[j] - b[n + j])).sum()).collect();
        (0..2 * n)
            .map(|i| if i < n { kd[i] + eps - y[i] } else { -kd[i - n] + eps + y[i - n] })
            .collect()
    };
    let mut beta = vec![0.0; 2 * n];
    let mut z = beta.clone();
    let mut t = 1.0_f64;
    for _ in 0..60_000 {
        let g = grad(&z);
        let u: Vec<f64> = z.iter().zip(&g).map(|(a, b)| a - step * b).collect();
        let next = project(&u, n, c);
        let t_next = 0.5 * (1.0 + (1.0 + 4.0 * t * t).sqrt());
        z = next
            .iter()
            .zip(&beta)
            .map(|(a, b)| a + (t - 1.0) / t_next * (a - b))
            .collect();
        beta = next;
        t = t_next;
    }
    let delta: Vec<f64> = (0..n).map(|i| beta[i] - beta[n + i]).collect();
    let g: Vec<f64> = (0..n).map(|i| (0..n).map(|j| k[i][j] * delta[j]).sum()).collect();
    let tol = 1e-6 * c;
    let (mut lo, mut hi, mut free) = (f64::NEG_INFINITY, f64::INFINITY, Vec::new());
    for i in 0..n {
        let (a, s) = (beta[i], beta[n + i]);
        let upper = y[i] - eps - g[i];
        let lower = y[i] + eps - g[i];
        if a > tol && a < c - tol {
            free.push(upper);
        } else if s > tol && s < c - tol {
            free.push(lower);
        } else if a >= c - tol {
            hi = hi.min(upper);
        } else if s >= c - tol {
            lo = lo.max(lower);
        } else {
            lo = lo.max(y[i] - eps - g[i]);
            hi = hi.min(y[i] + eps - g[i]);
        }
    }
    let b = if free.is_empty() {
        0.5 * (lo + hi)
    } else {
        free.iter().sum::<f64>() / free.len() as f64
    };
    g.iter().map(|v| v + b).collect()
}

fn solver_oracles() -> Outcome {
    let start = Instant::now();
    let mut r = rng::from_seed(2024);

    let mut worst_ridge = 0.0_f64;
    for _ in 0..50 {
        let n = r.random_range(5..=50);
        let p = r.random_range(1..=10);
        let x = random_matrix(&mut r, n, p);
        let y = random_targets(&mut r, &x);
        let alpha = 10f64.powf(r.random_range(-2.0..1.0));
        let cd = coordinate_descent(&x, &y, alpha, 0.0, 1e-13, 1_000_000).map_err(|e| e.to_string())?;
        let oracle = ridge_oracle(&x, &y, alpha);
        for (a, b) in cd.weights.iter().zip(&oracle) {
            worst_ridge = worst_ridge.max((a - b).abs());
        }
    }
    ensure(worst_ridge < 1e-6, || format!("ridge CD vs normal equations: max |Δw| = {worst_ridge:e}"))?;

    let mut worst_lasso = f64::NEG_INFINITY;
    for _ in 0..20 {
        let n = r.random_range(5..=50);
        let x = random_matrix(&mut r, n, 2);
        let y = random_targets(&mut r, &x);
        let alpha = 10f64.powf(r.random_range(-2.0..0.5));
        let model = fit_linear(&x, &y, alpha, 1.0).map_err(|e| e.to_string())?;
        let ours = lasso_objective(&x, &y, alpha, &model.weights);
        worst_lasso = worst_lasso.max(ours - lasso_grid_min(&x, &y, alpha));
    }
    ensure(worst_lasso <= 1e-5, || format!("LASSO objective exceeds grid minimum by {worst_lasso:e}"))?;

    let x = random_matrix(&mut r, 60, 3);
    let y: Vec<f64> = (0..60).map(|_| r.random_range(0.0..100.0)).collect();
    for q in 0..100 {
        let k = r.random_range(1..=10);
        let model = fit_knn(&x, &y, k).map_err(|e| e.to_string())?;
        let query: Vec<f64> = (0..3).map(|_| r.random_range(-3.0..3.0)).collect();
        let mut scan: Vec<(f64, usize)> = x
            .iter_rows()
            .enumerate()
            .map(|(i, row)| (row.iter().zip(&query).map(|(a, b)| (a - b).powi(2)).sum(), i))
            .collect();
        scan.sort_by(|a, b| a.0.partial_cmp(&b.0).unwrap().then(a.1.cmp(&b.1)));
        let expected = scan[..k].iter().map(|&(_, i)| y[i]).sum::<f64>() / k as f64;
        let got = model.predict_row(&query);
        ensure((got - expected).abs() <= 1e-12, || format!("kNN query {q}: {got} vs scan {expected}"))?;
    }

    let mut worst_svr = 0.0_f64;
    let eps = 0.1;
    for _ in 0..10 {
        let n = r.random_range(3..=10);
        let x = random_matrix(&mut r, n, 2);
        let y = random_targets(&mut r, &x);
        let params = SvrParams {
            c: 10.0,
            epsilon: eps,
            tol: 1e-6,
            ..SvrParams::default()
        };
        let model = fit_svr(&x, &y, &params).map_err(|e| e.to_string())?;
        let values = x.as_slice();
        let mean = values.iter().sum::<f64>() / values.len() as f64;
        let var = values.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / values.len() as f64;
        let gamma = 1.0 / (2.0 * var);
        ensure((model.gamma - gamma).abs() <= 1e-12 * gamma, || {
            format!("SVR gamma {} vs 1/(p·Var) {gamma}", model.gamma)
        })?;
        let oracle = svr_oracle(&x, &y, 10.0, eps, gamma);
        for (i, o) in oracle.iter().enumerate() {
            worst_svr = worst_svr.max((model.predict_row(x.row(i)) - o).abs());
        }
    }
    ensure(worst_svr <= eps + 1e-2, || format!("SVR vs projected-gradient QP: max gap {worst_svr}"))?;

    let secs = start.elapsed().as_secs_f64();
    ensure(secs < 30.0, || format!("took {secs:.1} s"))?;
    Ok(format!(
        "ridge max |Δw| {worst_ridge:.1e}; LASSO excess {worst_lasso:.1e}; kNN 100/100; SVR max gap {worst_svr:.1e}; {secs:.1} s"
    ))
}

type MetricCase = (&'static [i32], &'static [i32], f64, Option<f64>, Option<f64>);

/// MAE, R² and Pearson r computed in exact rational arithmetic.
const METRIC_TABLE: [MetricCase; 20] = [
    (&[1, 2, 3], &[1, 2, 3], 0.0, Some(1.0), Some(1.0)),
    (&[1, 2, 3], &[3, 2, 1], 1.3333333333333333, Some(-3.0), Some(-1.0)),
    (&[5, 5, 5], &[4, 5, 6], 0.6666666666666666, None, None),
    (&[1, 2, 3, 4], &[2, 2, 2, 2], 1.0, Some(-0.2), None),
    (&[0, 10], &[5, 5], 5.0, Some(0.0), None),
    (&[2, 4, 6, 8], &[1, 3, 5, 7], 1.0, Some(0.8), Some(1.0)),
    (&[1, 2, 3], &[2, 4, 6], 2.0, Some(-6.0), Some(1.0)),
    (&[9, 25, 3, 4, 34], &[6, 23, 37, 3, 32], 8.4, Some(-0.5406824146981627), Some(0.38673445208703333)),
    (&[2, 5, 27, 26], &[4, 15, 5, 35], 10.75, Some(-0.25280898876404495), Some(0.4220629994325029)),
    (&[3, 36, 7, 14, 40, 40], &[37, 3, 36, 37, 25, 3], 28.5, Some(-2.511685393258427), Some(-0.830429843766158)),
    (&[2, 35, 8, 18], &[26, 9, 34, 7], 21.75, Some(-2.2797118847539015), Some(-0.7593915049748179)),
    (&[19, 35, 11, 6, 37, 36, 40], &[12, 23, 6, 35, 4, 36, 3], 17.571428571428573, Some(-2.002317073170732), Some(-0.21226428168008357)),
    (&[13, 31, 34, 27, 20, 29, 37], &[29, 23, 19, 15, 11, 15, 5], 15.142857142857142, Some(-3.813407049067035), Some(-0.5395426467012385)),
    (&[19, 33, 31, 21, 28, 18, 38], &[4, 7, 32, 26, 10, 21, 9], 13.857142857142858, Some(-4.920692431561997), Some(-0.1666158782567533)),
    (&[26, 2, 4, 35, 36, 20], &[21, 22, 38, 31, 37, 29], 12.166666666666666, Some(-0.5326335006846189), Some(0.16885236479591764)),
    (&[5, 17, 30], &[4, 3, 19], 8.666666666666666, Some(-0.017057569296375266), Some(0.8492023160098724)),
    (&[36, 28, 18, 24, 22, 1, 29, 22], &[10, 39, 7, 31, 3, 13, 18, 8], 13.875, Some(-1.4175675675675676), Some(0.2161446099609953)),
    (&[15, 25, 25, 31, 5, 10, 28, 25], &[35, 17, 8, 27, 35, 17, 26, 22], 11.375, Some(-1.8470394736842106), Some(-0.36703317643881733)),
    (&[24, 14, 9, 5, 11, 9, 14, 14], &[0, 31, 37, 11, 16, 18, 0, 9], 13.5, Some(-8.063063063063064), Some(-0.4534255482084349)),
    (&[34, 23, 39, 36, 20, 8], &[32, 39, 3, 29, 35, 25], 15.5, Some(-2.0300285986653956), Some(-0.39781068344910486)),
];

fn metric_oracles() -> Outcome {
    let close = |a: Option<f64>, b: Option<f64>| match (a, b) {
        (Some(a), Some(b)) => (a - b).abs() <= 1e-9,
        (None, None) => true,
        _ => false,
    };
    for (i, (actual, predicted, mae, r2, r)) in METRIC_TABLE.iter().enumerate() {
        let a: Vec<f64> = actual.iter().map(|&v| f64::from(v)).collect();
        let p: Vec<f64> = predicted.iter().map(|&v| f64::from(v)).collect();
        let m = metrics(&a, &p).map_err(|e| e.to_string())?;
        ensure((m.mae - mae).abs() <= 1e-9 && close(m.r2, *r2) && close(m.pearson_r, *r), || {
            format!("case {i}: got ({}, {:?}, {:?}), want ({mae}, {r2:?}, {r:?})", m.mae, m.r2, m.pearson_r)
        })?;
    }
    let cdf = student_t_cdf(2.228, 10.0);
    ensure((cdf - 0.975).abs() <= 1e-3, || format!("P(T10 <= 2.228) = {cdf}"))?;
    let p = two_sided_p(0.963, 52).ok_or("p-value undefined for n = 52")?;
    ensure(p < 1e-3, || format!("p(r=0.963, n=52) = {p:e}"))?;
    Ok(format!("20/20 table cases; P(T10 <= 2.228) = {cdf:.5}; p(0.963, 52) = {p:.2e}"))
}

fn featurize_fixture(out: &Path, threshold: &str) -> Result<Vec<u8>, String> {
    let corpus = fixture_dir();
    run(&[
        "featurize",
        "--corpus",
        corpus.to_str().unwrap(),
        "--split-date",
        "2016-01-25",
        "--threshold",
        threshold,
        "--out",
        out.to_str().unwrap(),
    ])?;
    std::fs::read(out.join("features.csv")).map_err(|e| e.to_string())
}

fn feature_bit_exactness() -> Outcome {
    let tmp = tempfile::tempdir().map_err(|e| e.to_string())?;
    let got = featurize_fixture(tmp.path(), "2")?;
    let expected = std::fs::read(fixture_dir().join("expected_features.csv")).map_err(|e| e.to_string())?;
    ensure(got == expected, || "features.csv differs from expected_features.csv".into())?;
    let header = String::from_utf8_lossy(&got).lines().next().unwrap_or_default().to_string();
    let feature_cols = header.split(',').count() - 2;
    ensure(feature_cols == 14, || format!("{feature_cols} feature columns"))?;
    Ok(format!("{} bytes identical; 3 date + 7 count + 4 image = {feature_cols} columns", got.len()))
}

fn cosine_threshold_properties() -> Outcome {
    let mut r = rng::from_seed(77);
    let mut worst_range = 0.0_f64;
    let mut worst_self = 0.0_f64;
    let mut worst_scale = 0.0_f64;
    for _ in 0..100_000 {
        let dim = r.random_range(1..=16);
        let a: Vec<f64> = (0..dim).map(|_| r.random_range(-1.0..1.0)).collect();
        let b: Vec<f64> = (0..dim).map(|_| r.random_range(-1.0..1.0)).collect();
        let d = cosine_distance(&a, &b).map_err(|e| e.to_string())?;
        if !(0.0..=2.0 + 1e-12).contains(&d) {
            worst_range = worst_range.max(d);
        }
        worst_self = worst_self.max(cosine_distance(&a, &a).map_err(|e| e.to_string())?);
        let lambda = r.random_range(0.01..100.0);
        let scaled: Vec<f64> = a.iter().map(|v| v * lambda).collect();
        let ds = cosine_distance(&scaled, &b).map_err(|e| e.to_string())?;
        worst_scale = worst_scale.max((ds - d).abs());
    }
    ensure(worst_range == 0.0, || format!("distance {worst_range} outside [0, 2]"))?;
    ensure(worst_self <= 1e-12, || format!("d(a,a) = {worst_self:e}"))?;
    ensure(worst_scale <= 1e-12, || format!("scale changes distance by {worst_scale:e}"))?;

    let tmp = tempfile::tempdir().map_err(|e| e.to_string())?;
    let c2 = featurize_fixture(&tmp.path().join("c2"), "2")?;
    let c3 = featurize_fixture(&tmp.path().join("c3"), "3")?;
    let expected3 = std::fs::read(fixture_dir().join("expected_features_c3.csv")).map_err(|e| e.to_string())?;
    ensure(c3 == expected3, || "c = 3 output differs from expected_features_c3.csv".into())?;
    let cells = |bytes: &[u8]| -> Vec<Vec<f64>> {
        String::from_utf8_lossy(bytes)
            .lines()
            .skip(1)
            .map(|l| l.split(',').skip(11).take(4).map(|v| v.parse().unwrap()).collect())
            .collect()
    };
    let (lo, hi) = (cells(&c3), cells(&c2));
    let raised = lo.iter().flatten().zip(hi.iter().flatten()).filter(|(a, b)| a > b).count();
    ensure(raised == 0, || format!("{raised} image cells grew when c went from 2 to 3"))?;
    let (s2, s3): (f64, f64) = (hi.iter().flatten().sum(), lo.iter().flatten().sum());
    Ok(format!(
        "10^5 pairs in range, self {worst_self:.1e}, scale {worst_scale:.1e}; image cells total {s2} at c=2, {s3} at c=3"
    ))
}

struct Corpus {
    _dir: tempfile::TempDir,
    paths: CorpusPaths,
}

fn synth_corpus(config: &SynthConfig) -> Result<Corpus, String> {
    let dir = tempfile::tempdir().map_err(|e| e.to_string())?;
    let corpus = generate(config).map_err(|e| e.to_string())?;
    let paths = write_corpus(&corpus, dir.path()).map_err(|e| e.to_string())?;
    Ok(Corpus { _dir: dir, paths })
}

fn split_date() -> NaiveDate {
    NaiveDate::from_ymd_opt(2017, 5, 29).unwrap()
}

fn dataset(paths: &CorpusPaths, modalities: &[Modality]) -> Result<flucast::features::Dataset, String> {
    let inputs = load_inputs(paths).map_err(|e| e.to_string())?;
    let config = FeaturizeConfig {
        split_date: Some(split_date()),
        modalities: modalities.to_vec(),
        ..FeaturizeConfig::default()
    };
    Ok(featurize(&inputs, &config).map_err(|e| e.to_string())?.dataset)
}

fn evaluate(ds: &flucast::features::Dataset, kind: ModelKind, h: usize) -> Result<flucast::eval::EvalReport, String> {
    let spec = ModelSpec::new(kind).with_seed(42);
    Ok(train_eval(ds, &spec, &SplitConfig::new(split_date(), h)).map_err(|e| e.to_string())?.0)
}

fn end_to_end() -> Outcome {
    let pool = rayon::ThreadPoolBuilder::new().num_threads(1).build().map_err(|e| e.to_string())?;
    pool.install(|| {
        let start = Instant::now();
        let corpus = synth_corpus(&SynthConfig::default())?;
        let ds = dataset(&corpus.paths, &Modality::ALL)?;
        ensure(ds.n() == 317 && ds.p() == 14, || format!("dataset {}×{}", ds.n(), ds.p()))?;
        let gbt = evaluate(&ds, ModelKind::Gbt, 0)?;
        let ols = evaluate(&ds, ModelKind::Ols, 0)?;
        let mut parts = Vec::new();
        for (name, rep) in [("GBT", &gbt), ("OLS", &ols)] {
            ensure(rep.n_train == 265 && rep.metrics.n == 52, || {
                format!("{name}: {} train / {} test rows", rep.n_train, rep.metrics.n)
            })?;
            let mean = rep.predictions.iter().map(|p| p.actual).sum::<f64>() / rep.predictions.len() as f64;
            let r = rep.metrics.pearson_r.unwrap_or(f64::NAN);
            let rel = rep.metrics.mae / mean;
            ensure(r >= 0.9 && rel <= 0.15, || format!("{name}: r = {r:.4}, MAE/mean = {rel:.4}"))?;
            parts.push(format!("{name} r {r:.3} MAE/mean {rel:.3}"));
        }

        let control = synth_corpus(&SynthConfig::default().negative_control())?;
        let ds = dataset(&control.paths, &[Modality::Count, Modality::Image])?;
        let rep = evaluate(&ds, ModelKind::Gbt, 0)?;
        let r = rep.metrics.pearson_r.unwrap_or(0.0);
        ensure(r.abs() < 0.3, || format!("negative control GBT r = {r:.4}"))?;
        parts.push(format!("control GBT r {r:.3}"));

        let secs = start.elapsed().as_secs_f64();
        ensure(secs < 60.0, || format!("took {secs:.1} s on one thread"))?;
        parts.push(format!("{secs:.1} s on one thread"));
        Ok(parts.join("; "))
    })
}

fn forecast_degradation() -> Outcome {
    let corpus = synth_corpus(&SynthConfig::default())?;
    let ds = dataset(&corpus.paths, &Modality::ALL)?;
    let maes = (0..=3)
        .map(|h| evaluate(&ds, ModelKind::Gbt, h).map(|r| r.metrics.mae))
        .collect::<Result<Vec<f64>, String>>()?;
    let shown: Vec<String> = maes.iter().map(|m| format!("{m:.2}")).collect();
    ensure(maes.windows(2).all(|w| w[0] <= w[1]), || format!("MAE by horizon {shown:?}"))?;
    Ok(format!("GBT MAE h=0..3: {}", shown.join(" ≤ ")))
}

const DETERMINISM_CONFIG: &str = r#"
seed = 42

[eval]
split_date = 2017-05-29
folds = 5

[[grid]]
kind = "knn"
hyperparameters = { k = 4 }

[[grid]]
kind = "random_forest"
seed = 42
hyperparameters = { n_estimators = 40 }

[[grid]]
kind = "gbt"
seed = 42
hyperparameters = { n_estimators = 60 }
"#;

fn run_all_commands(root: &Path, config: &Path, threads: &str) -> Result<Vec<(String, Vec<u8>)>, String> {
    let s = |p: PathBuf| p.to_str().unwrap().to_string();
    let corpus = s(root.join("corpus"));
    let cfg = s(config.to_path_buf());
    let base = ["--threads", threads, "--config", cfg.as_str()];
    let commands: Vec<Vec<String>> = vec![
        vec!["synth".into(), "--seed".into(), "42".into(), "--out".into(), corpus.clone()],
        vec!["featurize".into(), "--corpus".into(), corpus.clone(), "--out".into(), s(root.join("featurize"))],
        vec!["cv-search".into(), "--corpus".into(), corpus.clone(), "--out".into(), s(root.join("cv"))],
        vec!["train".into(), "--corpus".into(), corpus.clone(), "--model".into(), "random_forest".into(), "--hp".into(), "n_estimators=40".into(), "--out".into(), s(root.join("train"))],
        vec!["evaluate".into(), "--corpus".into(), corpus.clone(), "--model".into(), "adaboost_r2".into(), "--hp".into(), "n_estimators=40".into(), "--out".into(), s(root.join("evaluate"))],
        vec!["forecast".into(), "--corpus".into(), corpus.clone(), "--search".into(), "--horizon".into(), "2".into(), "--out".into(), s(root.join("forecast"))],
    ];
    for c in &commands {
        let args: Vec<&str> = base.iter().copied().chain(c.iter().map(String::as_str)).collect();
        run(&args)?;
    }
    let mut files = Vec::new();
    for sub in ["corpus", "featurize", "cv", "train", "evaluate", "forecast"] {
        let mut entries: Vec<PathBuf> = std::fs::read_dir(root.join(sub))
            .map_err(|e| e.to_string())?
            .map(|e| e.unwrap().path())
            .collect();
        entries.sort();
        for p in entries {
            let bytes = std::fs::read(&p).map_err(|e| e.to_string())?;
            files.push((format!("{sub}/{}", p.file_name().unwrap().to_string_lossy()), bytes));
        }
    }
    Ok(files)
}

fn determinism() -> Outcome {
    let tmp = tempfile::tempdir().map_err(|e| e.to_string())?;
    let config = tmp.path().join("run.toml");
    std::fs::write(&config, DETERMINISM_CONFIG).map_err(|e| e.to_string())?;
    // Every run reads and writes the same paths so path strings in manifests agree.
    let work = tmp.path().join("work");
    let mut reference: Option<Vec<(String, Vec<u8>)>> = None;
    for threads in ["1", "4", "1", "3"] {
        let _ = std::fs::remove_dir_all(&work);
        let files = run_all_commands(&work, &config, threads)?;
        match &reference {
            None => reference = Some(files),
            Some(expected) => {
                let names: Vec<&String> = files.iter().map(|f| &f.0).collect();
                let want: Vec<&String> = expected.iter().map(|f| &f.0).collect();
                ensure(names == want, || format!("artifact sets differ at --threads {threads}"))?;
                for ((name, a), (_, b)) in files.iter().zip(expected) {
                    ensure(a == b, || format!("{name} differs at --threads {threads}"))?;
                }
            }
        }
    }
    let n = reference.map_or(0, |r| r.len());
    Ok(format!("6 commands, {n} artifacts byte-identical across 4 runs at --threads 1/4/1/3"))
}

fn gbt_monotonicity() -> Outcome {
    let mut r = rng::from_seed(99);
    let mut rounds = 0;
    for f in 0..20 {
        let n = r.random_range(10..=80);
        let p = r.random_range(1..=6);
        let x = random_matrix(&mut r, n, p);
        let y: Vec<f64> = random_targets(&mut r, &x).iter().map(|v| v * 10.0).collect();
        let params = GbtParams {
            n_estimators: 50,
            learning_rate: r.random_range(0.05..=1.0),
            reg_alpha: r.random_range(0.0..20.0),
            reg_lambda: r.random_range(0.0..5.0),
            max_depth: r.random_range(1..=6),
            ..GbtParams::default()
        };
        let model = fit_gbt(&x, &y, &params, f).map_err(|e| e.to_string())?;
        let staged: Vec<Vec<f64>> = x.iter_rows().map(|row| model.staged_predictions(row)).collect();
        let mse = |m: usize| staged.iter().zip(&y).map(|(s, t)| (s[m] - t).powi(2)).sum::<f64>() / n as f64;
        for m in 1..staged[0].len() {
            let (before, after) = (mse(m - 1), mse(m));
            ensure(after <= before + 1e-12 * before.max(1.0), || {
                format!("fixture {f}: MSE rose from {before} to {after} at round {m}")
            })?;
            rounds += 1;
        }
    }
    Ok(format!("20 fixtures, {rounds} rounds, MSE never increased"))
}

fn main() {
    let criteria: [(&str, fn() -> Outcome); 8] = [
        ("solver oracles", solver_oracles),
        ("metric oracles", metric_oracles),
        ("feature pipeline bit-exactness", feature_bit_exactness),
        ("cosine and threshold properties", cosine_threshold_properties),
        ("end-to-end synthetic run", end_to_end),
        ("forecast degradation", forecast_degradation),
        ("determinism", determinism),
        ("GBT monotonicity", gbt_monotonicity),
    ];
    let mut failed = 0;
    for (name, check) in criteria {
        match check() {
            Ok(detail) => println!("PASS  {name}: {detail}"),
            Err(why) => {
                failed += 1;
                println!("FAIL  {name}: {why}");
            }
        }
    }
    println!("acceptance: {} passed, {failed} failed", criteria.len() - failed);
    if failed > 0 {
        std::process::exit(1);
    }
}
