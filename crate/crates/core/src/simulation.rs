//! Monte Carlo harness: synthetic designs, oracle efficiencies and
//! replication tables.
//!
//! Both designs draw `X ~ N_p(0, I)` and `Y = m0(X) + sigma0 * eps`. The
//! correct design uses `m0(x) = alpha0 + x'beta0`; the misspecified one adds
//! `(x'gamma0)^2` with `gamma0` parallel to `beta0`, scaled so that
//! `sqrt(E[(beta0'X)^2] / E[(gamma0'X)^4]) = 3`. Since `E[(g'X)^4] = 3|g|^4`
//! this gives `|gamma0|^2 = |beta0| / (3 sqrt 3)`. In both designs
//! `sigma0^2 = Var m0(X) / 5`.

use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};
use std::time::Instant;

use nalgebra::{DMatrix, DVector};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::data::Dataset;
use crate::error::{Error, Result};
use crate::estimators::{EstimatorKind, MethodSpec, MIN_DRAWS};
use crate::io::write_atomic;
use crate::sampling::{standard_normal, RngStream};

const LABELED_STREAM: u64 = 0x1AB;
const UNLABELED_STREAM: u64 = 0x0B5;
const REPLICATION_STREAM: u64 = 0x5E9;
const DATA_STREAM: u64 = 1;
const ESTIMATOR_STREAM: u64 = 2;

pub const DEFAULT_DENSITY_BINS: usize = 128;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum DesignKind {
    Correct,
    Misspec,
}

fn default_alpha0() -> f64 {
    5.0
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SimDesign {
    pub kind: DesignKind,
    pub n: usize,
    #[serde(rename = "N")]
    pub big_n: usize,
    pub p: usize,
    pub s: usize,
    #[serde(default = "default_alpha0")]
    pub alpha0: f64,
    pub reps: usize,
    pub k: usize,
    pub methods: Vec<MethodSpec>,
    pub m: usize,
    pub alpha: f64,
    pub seed: u64,
    /// Histogram bins per replication for density output; `None` skips it.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub density_bins: Option<usize>,
}

impl SimDesign {
    /// A design with the usual desk-scale defaults and only the supervised
    /// method.
    pub fn new(kind: DesignKind, n: usize, big_n: usize, p: usize, s: usize) -> Self {
        SimDesign {
            kind,
            n,
            big_n,
            p,
            s,
            alpha0: 5.0,
            reps: 200,
            k: 5,
            methods: vec![MethodSpec::supervised()],
            m: 1000,
            alpha: 0.05,
            seed: 1,
            density_bins: None,
        }
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |msg: String| Err(Error::InvalidParameter(format!("invalid design: {msg}")));
        if self.s == 0 {
            return bad("s must be at least 1 (s = 0 makes every outcome constant)".into());
        }
        if self.s > self.p {
            return bad(format!("s = {} exceeds p = {}", self.s, self.p));
        }
        if self.reps == 0 {
            return bad("reps must be at least 1".into());
        }
        if self.k < 2 {
            return bad(format!("K = {} (need at least 2)", self.k));
        }
        if self.m < MIN_DRAWS {
            return bad(format!("M = {} (need at least {MIN_DRAWS})", self.m));
        }
        if !(self.alpha > 0.0 && self.alpha < 1.0) {
            return bad(format!("alpha = {} outside (0, 1)", self.alpha));
        }
        if !self.alpha0.is_finite() {
            return bad("alpha0 must be finite".into());
        }
        if self.methods.is_empty() {
            return bad("no methods".into());
        }
        if self.density_bins == Some(0) {
            return bad("density_bins must be positive".into());
        }
        Ok(())
    }

    pub fn truth(&self) -> Result<DesignTruth> {
        self.validate()?;
        Ok(DesignTruth::new(self.kind, self.p, self.s, self.alpha0))
    }
}

/// `beta0`: `ceil(s/2)` ones, then `floor(s/2)` halves, then zeros.
pub fn beta0(p: usize, s: usize) -> DVector<f64> {
    let ones = s.div_ceil(2);
    DVector::from_fn(p, |j, _| {
        if j < ones {
            1.0
        } else if j < s {
            0.5
        } else {
            0.0
        }
    })
}

/// Population quantities of a design.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct DesignTruth {
    pub alpha0: f64,
    #[serde(skip)]
    pub beta0: DVector<f64>,
    #[serde(skip)]
    pub gamma0: DVector<f64>,
    pub beta_norm_sq: f64,
    pub gamma_norm_sq: f64,
    pub sigma0_sq: f64,
    pub theta0: f64,
}

impl DesignTruth {
    pub fn new(kind: DesignKind, p: usize, s: usize, alpha0: f64) -> Self {
        let beta = beta0(p, s);
        let bb = beta.norm_squared();
        let gamma = match kind {
            DesignKind::Correct => DVector::zeros(p),
            DesignKind::Misspec => {
                let norm = bb.sqrt();
                let kappa = (norm / (3.0 * 3f64.sqrt())).sqrt();
                &beta * (kappa / norm)
            }
        };
        let gg = gamma.norm_squared();
        DesignTruth {
            alpha0,
            beta_norm_sq: bb,
            gamma_norm_sq: gg,
            sigma0_sq: (bb + 2.0 * gg * gg) / 5.0,
            theta0: alpha0 + gg,
            beta0: beta,
            gamma0: gamma,
        }
    }

    pub fn m0(&self, x: &[f64]) -> f64 {
        let lin: f64 = self.beta0.iter().zip(x).map(|(b, v)| b * v).sum();
        let quad: f64 = self.gamma0.iter().zip(x).map(|(g, v)| g * v).sum();
        self.alpha0 + lin + quad * quad
    }

    /// Best linear predictor of `Y` under Gaussian features.
    pub fn m_star(&self, x: &[f64]) -> f64 {
        let lin: f64 = self.beta0.iter().zip(x).map(|(b, v)| b * v).sum();
        self.theta0 + lin
    }

    pub fn var_y(&self) -> f64 {
        self.beta_norm_sq + 2.0 * self.gamma_norm_sq.powi(2) + self.sigma0_sq
    }
}

fn draw_features(rows: usize, p: usize, rng: &mut RngStream) -> DMatrix<f64> {
    // row-major fill so that row i does not depend on the total row count
    let vals: Vec<f64> = (0..rows * p).map(|_| standard_normal(rng)).collect();
    DMatrix::from_row_slice(rows, p, &vals)
}

fn generate(design: &SimDesign, truth: &DesignTruth, rng: &RngStream) -> Result<Dataset> {
    let mut lrng = rng.substream(LABELED_STREAM);
    let sigma0 = truth.sigma0_sq.sqrt();
    // each labeled row draws its features and then its noise
    let mut vals = Vec::with_capacity(design.n * design.p);
    let mut y = DVector::zeros(design.n);
    for i in 0..design.n {
        let row: Vec<f64> = (0..design.p).map(|_| standard_normal(&mut lrng)).collect();
        y[i] = truth.m0(&row) + sigma0 * standard_normal(&mut lrng);
        vals.extend(row);
    }
    let x = DMatrix::from_row_slice(design.n, design.p, &vals);
    let u = draw_features(design.big_n, design.p, &mut rng.substream(UNLABELED_STREAM));
    Dataset::new(y, x, u)
}

/// Draws a dataset from the correct design. Labeled and unlabeled rows come
/// from separate substreams, so changing `N` leaves the labeled data alone.
pub fn gen_correct(design: &SimDesign, rng: &RngStream) -> Result<Dataset> {
    if design.kind != DesignKind::Correct {
        return Err(Error::InvalidParameter("gen_correct needs a correct design".into()));
    }
    generate(design, &design.truth()?, rng)
}

pub fn gen_misspec(design: &SimDesign, rng: &RngStream) -> Result<Dataset> {
    if design.kind != DesignKind::Misspec {
        return Err(Error::InvalidParameter("gen_misspec needs a misspecified design".into()));
    }
    generate(design, &design.truth()?, rng)
}

pub fn gen_dataset(design: &SimDesign, rng: &RngStream) -> Result<Dataset> {
    generate(design, &design.truth()?, rng)
}

/// The variances that drive asymptotic efficiency for one regression limit.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct OracleVariances {
    pub var_y: f64,
    /// `Var(Y - m(X))`
    pub sigma1_sq: f64,
    /// `Var(m(X))`
    pub sigma2_sq: f64,
}

impl OracleVariances {
    pub fn relative_efficiency(&self, n: usize, big_n: usize) -> f64 {
        self.var_y / (self.sigma1_sq + n as f64 / big_n as f64 * self.sigma2_sq)
    }

    /// Asymptotic `n * Var` of the cross-fitted estimator.
    pub fn scaled_variance(&self, n: usize, big_n: usize) -> f64 {
        self.sigma1_sq + n as f64 / big_n as f64 * self.sigma2_sq
    }
}

/// Closed-form variances under `m0`.
pub fn oracle_variances(design: &SimDesign) -> Result<OracleVariances> {
    let t = design.truth()?;
    Ok(OracleVariances {
        var_y: t.var_y(),
        sigma1_sq: t.sigma0_sq,
        sigma2_sq: t.beta_norm_sq + 2.0 * t.gamma_norm_sq.powi(2),
    })
}

/// Closed-form variances under the best linear predictor `m*`.
pub fn oracle_variances_star(design: &SimDesign) -> Result<OracleVariances> {
    let t = design.truth()?;
    Ok(OracleVariances {
        var_y: t.var_y(),
        sigma1_sq: t.sigma0_sq + 2.0 * t.gamma_norm_sq.powi(2),
        sigma2_sq: t.beta_norm_sq,
    })
}

pub fn oracle_ore(design: &SimDesign) -> Result<f64> {
    Ok(oracle_variances(design)?.relative_efficiency(design.n, design.big_n))
}

pub fn oracle_ore_star(design: &SimDesign) -> Result<f64> {
    Ok(oracle_variances_star(design)?.relative_efficiency(design.n, design.big_n))
}

/// Monte Carlo estimate of the variances under `m*` (which equals `m0` for
/// the correct design), from `draws` simulated `(X, Y)` pairs.
pub fn oracle_variances_mc(design: &SimDesign, draws: usize, seed: u64) -> Result<OracleVariances> {
    let t = design.truth()?;
    if draws < 2 {
        return Err(Error::InvalidParameter("need at least 2 Monte Carlo draws".into()));
    }
    const CHUNK: usize = 1 << 16;
    let chunks = draws.div_ceil(CHUNK);
    let root = RngStream::new(seed, 0);
    let sigma0 = t.sigma0_sq.sqrt();
    // per chunk: count and first/second moments of Y, Y - m*, m*
    let parts: Vec<[f64; 7]> = (0..chunks)
        .into_par_iter()
        .map(|c| {
            let mut rng = root.substream(c as u64);
            let len = CHUNK.min(draws - c * CHUNK);
            let mut acc = [0.0; 7];
            let mut x = vec![0.0; design.p];
            for _ in 0..len {
                x.iter_mut().for_each(|v| *v = standard_normal(&mut rng));
                let y = t.m0(&x) + sigma0 * standard_normal(&mut rng);
                let ms = t.m_star(&x);
                let r = y - ms;
                acc[0] += 1.0;
                acc[1] += y;
                acc[2] += y * y;
                acc[3] += r;
                acc[4] += r * r;
                acc[5] += ms;
                acc[6] += ms * ms;
            }
            acc
        })
        .collect();
    let mut tot = [0.0; 7];
    for part in &parts {
        for (t, v) in tot.iter_mut().zip(part) {
            *t += v;
        }
    }
    let n = tot[0];
    let var = |s: f64, ss: f64| (ss - s * s / n) / (n - 1.0);
    Ok(OracleVariances {
        var_y: var(tot[1], tot[2]),
        sigma1_sq: var(tot[3], tot[4]),
        sigma2_sq: var(tot[5], tot[6]),
    })
}

/// One method's outcome in one replication.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ReplicationRecord {
    pub replication: usize,
    pub method: String,
    pub estimate: f64,
    pub lo: f64,
    pub hi: f64,
    pub covered: bool,
    #[serde(skip)]
    pub density: Vec<(f64, f64)>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct MethodMetrics {
    pub method: String,
    pub mse: f64,
    /// `MSE(sup) / MSE(method)`; absent when the supervised method was not run.
    pub re: Option<f64>,
    pub covp: f64,
    pub mean_len: f64,
    pub mean_estimate: f64,
    /// Sample variance of the point estimates across replications.
    pub var_estimate: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct MetricsTable {
    pub design: SimDesign,
    pub truth: DesignTruth,
    pub ore: f64,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub ore_star: Option<f64>,
    pub replications: usize,
    pub methods: Vec<MethodMetrics>,
    #[serde(skip)]
    pub records: Vec<ReplicationRecord>,
    /// Wall-clock seconds; kept out of serialized output.
    #[serde(skip)]
    pub runtime_secs: f64,
}

impl MetricsTable {
    pub fn method(&self, label: &str) -> Option<&MethodMetrics> {
        self.methods.iter().find(|m| m.method == label)
    }

    /// Point estimates of one method in replication order.
    pub fn estimates(&self, label: &str) -> Vec<f64> {
        self.records
            .iter()
            .filter(|r| r.method == label)
            .map(|r| r.estimate)
            .collect()
    }
}

/// Histogram density of `draws` on `bins` equal-width bins; returns
/// `(bin center, density)` pairs. A constant sample is one spike bin of
/// width 1.
pub fn histogram_density(draws: &[f64], bins: usize) -> Vec<(f64, f64)> {
    let lo = draws.iter().copied().fold(f64::INFINITY, f64::min);
    let hi = draws.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let total = draws.len() as f64;
    if hi <= lo {
        let mut out: Vec<(f64, f64)> = (0..bins)
            .map(|b| (lo - 0.5 + (b as f64 + 0.5) / bins as f64, 0.0))
            .collect();
        let spike = bins / 2;
        out[spike].0 = lo;
        out[spike].1 = bins as f64;
        return out;
    }
    let width = (hi - lo) / bins as f64;
    let mut counts = vec![0usize; bins];
    for &d in draws {
        let b = (((d - lo) / width) as usize).min(bins - 1);
        counts[b] += 1;
    }
    counts
        .iter()
        .enumerate()
        .map(|(b, &c)| (lo + (b as f64 + 0.5) * width, c as f64 / (total * width)))
        .collect()
}

/// Runs every configured method on `reps` fresh datasets.
pub fn run_replications(design: &SimDesign) -> Result<MetricsTable> {
    let start = Instant::now();
    let truth = design.truth()?;
    let root = RngStream::new(design.seed, 0).substream(REPLICATION_STREAM);
    let per_rep: Vec<Vec<ReplicationRecord>> = (0..design.reps)
        .into_par_iter()
        .map(|r| run_one(design, &truth, &root, r).map_err(|e| e.in_replication(r)))
        .collect::<Result<_>>()?;
    let records: Vec<ReplicationRecord> = per_rep.into_iter().flatten().collect();

    let labels: Vec<String> = design.methods.iter().map(|m| m.to_string()).collect();
    let mut grouped: BTreeMap<&str, Vec<&ReplicationRecord>> = BTreeMap::new();
    for rec in &records {
        grouped.entry(rec.method.as_str()).or_default().push(rec);
    }
    let mse_of = |label: &str| {
        let g = &grouped[label];
        g.iter().map(|r| (r.estimate - truth.theta0).powi(2)).sum::<f64>() / g.len() as f64
    };
    let sup_label = MethodSpec::supervised().to_string();
    let sup_mse = grouped.contains_key(sup_label.as_str()).then(|| mse_of(&sup_label));
    let mut methods = Vec::new();
    for label in dedup(&labels) {
        let g = &grouped[label.as_str()];
        let reps = g.len() as f64;
        let mse = mse_of(&label);
        let mean_estimate = g.iter().map(|r| r.estimate).sum::<f64>() / reps;
        let var_estimate = if g.len() > 1 {
            g.iter().map(|r| (r.estimate - mean_estimate).powi(2)).sum::<f64>() / (reps - 1.0)
        } else {
            0.0
        };
        methods.push(MethodMetrics {
            re: sup_mse.map(|s| if label == sup_label { 1.0 } else { s / mse }),
            covp: g.iter().filter(|r| r.covered).count() as f64 / reps,
            mean_len: g.iter().map(|r| r.hi - r.lo).sum::<f64>() / reps,
            method: label,
            mse,
            mean_estimate,
            var_estimate,
        });
    }
    Ok(MetricsTable {
        ore: oracle_ore(design)?,
        ore_star: (design.kind == DesignKind::Misspec)
            .then(|| oracle_ore_star(design))
            .transpose()?,
        truth,
        design: design.clone(),
        replications: design.reps,
        methods,
        records,
        runtime_secs: start.elapsed().as_secs_f64(),
    })
}

fn dedup(labels: &[String]) -> Vec<String> {
    let mut out: Vec<String> = Vec::new();
    for l in labels {
        if !out.contains(l) {
            out.push(l.clone());
        }
    }
    out
}

fn run_one(
    design: &SimDesign,
    truth: &DesignTruth,
    root: &RngStream,
    r: usize,
) -> Result<Vec<ReplicationRecord>> {
    let rng = root.substream(r as u64);
    let data = generate(design, truth, &rng.substream(DATA_STREAM))?;
    // every method sees the same estimator stream, hence the same fold plan
    let est_rng = rng.substream(ESTIMATOR_STREAM);
    let mut out = Vec::with_capacity(design.methods.len());
    for spec in &design.methods {
        let res = spec.run(&data, design.k, design.m, design.alpha, &est_rng)?;
        out.push(ReplicationRecord {
            replication: r,
            method: spec.to_string(),
            estimate: res.point_estimate,
            lo: res.ci.0,
            hi: res.ci.1,
            covered: res.ci.0 <= truth.theta0 && truth.theta0 <= res.ci.1,
            density: design
                .density_bins
                .map(|b| histogram_density(&res.posterior_draws, b))
                .unwrap_or_default(),
        });
    }
    Ok(out)
}

fn csv_float(v: f64) -> String {
    format!("{v:.10e}")
}

fn csv_opt(v: Option<f64>) -> String {
    v.map(csv_float).unwrap_or_default()
}

/// Summary table as CSV, one row per method.
pub fn metrics_csv(table: &MetricsTable) -> String {
    let mut out = String::from("method,mse,re,covp,mean_len,mean_estimate,var_estimate,ore,ore_star\n");
    for m in &table.methods {
        let _ = writeln!(
            out,
            "{},{},{},{},{},{},{},{},{}",
            m.method,
            csv_float(m.mse),
            csv_opt(m.re),
            csv_float(m.covp),
            csv_float(m.mean_len),
            csv_float(m.mean_estimate),
            csv_float(m.var_estimate),
            csv_float(table.ore),
            csv_opt(table.ore_star),
        );
    }
    out
}

/// Per-replication records as CSV.
pub fn records_csv(table: &MetricsTable) -> String {
    let mut out = String::from("replication,method,estimate,lo,hi,covered\n");
    for r in &table.records {
        let _ = writeln!(
            out,
            "{},{},{},{},{},{}",
            r.replication,
            r.method,
            csv_float(r.estimate),
            csv_float(r.lo),
            csv_float(r.hi),
            r.covered as u8
        );
    }
    out
}

pub fn metrics_json(table: &MetricsTable) -> Result<String> {
    let mut s = serde_json::to_string_pretty(table)
        .map_err(|e| Error::Config(format!("serializing metrics: {e}")))?;
    s.push('\n');
    Ok(s)
}

/// File-name-safe form of a method label.
pub fn method_file_stem(label: &str) -> String {
    label
        .chars()
        .map(|c| if c.is_ascii_alphanumeric() || c == '-' || c == '.' { c } else { '_' })
        .collect()
}

/// Writes one `density_<method>.csv` per method into `dir`, with columns
/// `replication,grid_point,density`. Returns the written paths.
pub fn emit_density_data(table: &MetricsTable, dir: &Path) -> Result<Vec<PathBuf>> {
    if table.records.iter().any(|r| r.density.is_empty()) {
        return Err(Error::Config(
            "density data was not collected; set density_bins in the design".into(),
        ));
    }
    fs::create_dir_all(dir).map_err(|source| Error::Io {
        path: dir.to_path_buf(),
        source,
    })?;
    let mut paths = Vec::new();
    for m in &table.methods {
        let mut out = String::from("replication,grid_point,density\n");
        for r in table.records.iter().filter(|r| r.method == m.method) {
            for (x, d) in &r.density {
                let _ = writeln!(out, "{},{},{}", r.replication, csv_float(*x), csv_float(*d));
            }
        }
        let path = dir.join(format!("density_{}.csv", method_file_stem(&m.method)));
        write_atomic(&path, out.as_bytes())?;
        paths.push(path);
    }
    Ok(paths)
}

/// Whether `kind` appears among the design's methods.
pub fn has_method(design: &SimDesign, kind: EstimatorKind) -> bool {
    design.methods.iter().any(|m| m.kind == kind)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::nuisance::NuisanceMethod;

    fn small(kind: DesignKind) -> SimDesign {
        let mut d = SimDesign::new(kind, 100, 1000, 4, 2);
        d.reps = 6;
        d.m = 200;
        d
    }

    #[test]
    fn correct_design_constants() {
        let d = SimDesign::new(DesignKind::Correct, 500, 10_000, 4, 2);
        let t = d.truth().unwrap();
        assert_eq!(t.beta0.as_slice(), &[1.0, 0.5, 0.0, 0.0]);
        assert!((t.beta_norm_sq - 1.25).abs() < 1e-15);
        assert!((t.sigma0_sq - 0.25).abs() < 1e-15);
        assert_eq!(t.theta0, 5.0);
        assert!((oracle_ore(&d).unwrap() - 4.8).abs() < 1e-12);
        let mut d = d;
        d.big_n = d.n;
        assert!((oracle_ore(&d).unwrap() - 1.0).abs() < 1e-12);
    }

    #[test]
    fn odd_sparsity_splits_ones_and_halves() {
        assert_eq!(beta0(10, 3).as_slice()[..4], [1.0, 1.0, 0.5, 0.0]);
        assert_eq!(beta0(10, 7).iter().filter(|&&b| b == 1.0).count(), 4);
        assert_eq!(beta0(10, 7).iter().filter(|&&b| b == 0.5).count(), 3);
    }

    #[test]
    fn invalid_designs() {
        let mut d = small(DesignKind::Correct);
        d.s = 0;
        assert!(matches!(d.validate(), Err(Error::InvalidParameter(_))));
        let mut d = small(DesignKind::Correct);
        d.s = 9;
        assert!(d.validate().is_err());
        let mut d = small(DesignKind::Correct);
        d.reps = 0;
        assert!(d.validate().is_err());
    }

    #[test]
    fn misspec_constants() {
        let d = SimDesign::new(DesignKind::Misspec, 500, 10_000, 10, 2);
        let t = d.truth().unwrap();
        let g4 = t.gamma_norm_sq.powi(2);
        assert!((g4 - 1.25 / 27.0).abs() < 1e-12);
        assert!((t.theta0 - (5.0 + (1.25f64 / 27.0).sqrt())).abs() < 1e-12);
        // gamma parallel to beta
        let cos = t.beta0.dot(&t.gamma0) / (t.beta0.norm() * t.gamma0.norm());
        assert!((cos - 1.0).abs() < 1e-12);
    }

    #[test]
    fn misspec_ratio_by_monte_carlo() {
        let d = SimDesign::new(DesignKind::Misspec, 500, 10_000, 10, 2);
        let t = d.truth().unwrap();
        let mut rng = RngStream::new(3, 0);
        let (mut lin, mut quart) = (0.0, 0.0);
        let mut x = vec![0.0; 10];
        for _ in 0..1_000_000 {
            x.iter_mut().for_each(|v| *v = standard_normal(&mut rng));
            let b: f64 = t.beta0.iter().zip(&x).map(|(a, v)| a * v).sum();
            let g: f64 = t.gamma0.iter().zip(&x).map(|(a, v)| a * v).sum();
            lin += b * b;
            quart += g.powi(4);
        }
        let ratio = (lin / quart).sqrt();
        assert!((ratio - 3.0).abs() < 0.06, "ratio {ratio}");
    }

    #[test]
    fn generated_outcomes_have_the_right_moments() {
        let mut d = SimDesign::new(DesignKind::Correct, 1_000_000, 3, 4, 2);
        d.reps = 1;
        let data = gen_correct(&d, &RngStream::new(9, 0)).unwrap();
        let y = data.outcomes();
        let var_y = 1.2 * 1.25;
        assert!((y.mean() - 5.0).abs() < 4.0 * (var_y / 1e6f64).sqrt());
        let t = d.truth().unwrap();
        let x = data.labeled_features();
        let lin = x * &t.beta0;
        let var_m = lin.iter().map(|v| v * v).sum::<f64>() / 1e6 - (lin.sum() / 1e6).powi(2);
        assert!((var_m / 1.25 - 1.0).abs() < 0.01);
    }

    #[test]
    fn labeled_rows_do_not_depend_on_n_big() {
        let mut a = small(DesignKind::Correct);
        let mut b = a.clone();
        a.big_n = 50;
        b.big_n = 5000;
        let rng = RngStream::new(4, 0);
        let da = gen_correct(&a, &rng).unwrap();
        let db = gen_correct(&b, &rng).unwrap();
        assert_eq!(da.outcomes(), db.outcomes());
        let mut c = a.clone();
        c.n = 300;
        let dc = gen_correct(&c, &rng).unwrap();
        assert_eq!(da.outcomes().as_slice(), &dc.outcomes().as_slice()[..100]);
    }

    #[test]
    fn generator_kind_checked() {
        let d = small(DesignKind::Misspec);
        assert!(gen_correct(&d, &RngStream::new(1, 0)).is_err());
        assert!(gen_misspec(&d, &RngStream::new(1, 0)).is_ok());
    }

    #[test]
    fn analytic_oracle_matches_monte_carlo() {
        for kind in [DesignKind::Correct, DesignKind::Misspec] {
            let d = SimDesign::new(kind, 500, 10_000, 10, 3);
            let exact = oracle_variances_star(&d).unwrap();
            let mc = oracle_variances_mc(&d, 4_000_000, 17).unwrap();
            let a = exact.relative_efficiency(d.n, d.big_n);
            let b = mc.relative_efficiency(d.n, d.big_n);
            assert!((a / b - 1.0).abs() < 0.005, "{kind:?}: {a} vs {b}");
        }
        let d = SimDesign::new(DesignKind::Misspec, 500, 10_000, 10, 3);
        assert!((oracle_ore_star(&d).unwrap() - 3.80).abs() < 0.01);
    }

    #[test]
    fn supervised_only_table() {
        let d = small(DesignKind::Correct);
        let t = run_replications(&d).unwrap();
        assert_eq!(t.methods.len(), 1);
        assert_eq!(t.methods[0].re, Some(1.0));
        assert_eq!(t.records.len(), 6);
        assert!((0.0..=1.0).contains(&t.methods[0].covp));
    }

    #[test]
    fn tables_are_deterministic() {
        let mut d = small(DesignKind::Misspec);
        d.methods = vec![
            MethodSpec::supervised(),
            MethodSpec::new(EstimatorKind::Bdmi, NuisanceMethod::Bols),
            MethodSpec::new(EstimatorKind::Hbdmi, NuisanceMethod::Bridge),
        ];
        let a = run_replications(&d).unwrap();
        let b = run_replications(&d).unwrap();
        assert_eq!(metrics_json(&a).unwrap(), metrics_json(&b).unwrap());
        assert_eq!(records_csv(&a), records_csv(&b));
        assert!(a.ore_star.is_some());
    }

    #[test]
    fn density_output() {
        let mut d = small(DesignKind::Correct);
        d.methods = vec![
            MethodSpec::supervised(),
            MethodSpec::new(EstimatorKind::Imputation, NuisanceMethod::Constant(3.0)),
        ];
        d.density_bins = Some(64);
        d.m = 5000;
        let t = run_replications(&d).unwrap();
        let dir = tempfile::tempdir().unwrap();
        let paths = emit_density_data(&t, dir.path()).unwrap();
        assert_eq!(paths.len(), 2);
        let sup = fs::read_to_string(&paths[0]).unwrap();
        assert_eq!(sup.lines().count(), 1 + 6 * 64);

        // trapezoid integral of each supervised histogram
        for r in t.records.iter().filter(|r| r.method == "sup") {
            let g = &r.density;
            let area: f64 = g.windows(2).map(|w| (w[1].0 - w[0].0) * (w[0].1 + w[1].1) / 2.0).sum();
            assert!((area - 1.0).abs() < 1e-2, "area {area}");
        }
        // constant draws: one spike bin
        let imp = t.records.iter().find(|r| r.method.starts_with("imp")).unwrap();
        assert_eq!(imp.density.iter().filter(|(_, d)| *d > 0.0).count(), 1);
    }

    #[test]
    fn t2_histogram_integrates_to_one() {
        // t_2 draws: trapezoid over bin centers loses about half of the two
        // end bins, each holding a handful of extreme draws
        let comp = crate::sampling::TComponent::new(2.0, 0.0, 1.0).unwrap();
        let draws = crate::sampling::sample_student_t(comp, 20_000, &mut RngStream::new(2, 0)).unwrap();
        let g = histogram_density(&draws, 128);
        let area: f64 = g.windows(2).map(|w| (w[1].0 - w[0].0) * (w[0].1 + w[1].1) / 2.0).sum();
        assert!((area - 1.0).abs() <= 1e-3, "area {area}");
    }
}
