//! Posterior constructions for the population mean.

use std::fmt;
use std::str::FromStr;
use std::time::Instant;

use nalgebra::{DMatrix, DVector};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::data::{make_fold_plan, Dataset, FoldPlan, MIN_FOLD_SIZE};
use crate::error::{DataSide, Error, Result};
use crate::nuisance::{predict, NuisanceFitter, NuisanceMetadata, NuisanceMethod, RegressionDraw};
use crate::sampling::{quantile_sorted, sort_floats, RngStream, TComponent, TSampler};

/// Smallest number of posterior draws any estimator accepts.
pub const MIN_DRAWS: usize = 100;

// substream labels below an estimator's stream
const PLAN_STREAM: u64 = 0x9_1A4;
const FOLD_STREAM: u64 = 0xF01D;
const FIT_STREAM: u64 = 1;
const NUISANCE_STREAM: u64 = 2;
const THETA_STREAM: u64 = 3;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum EstimatorKind {
    #[serde(rename = "sup")]
    Supervised,
    Bdmi,
    Hbdmi,
    #[serde(rename = "imp")]
    Imputation,
}

impl EstimatorKind {
    pub fn label(self) -> &'static str {
        match self {
            EstimatorKind::Supervised => "sup",
            EstimatorKind::Bdmi => "bdmi",
            EstimatorKind::Hbdmi => "hbdmi",
            EstimatorKind::Imputation => "imp",
        }
    }

    pub fn uses_nuisance(self) -> bool {
        self != EstimatorKind::Supervised
    }
}

impl fmt::Display for EstimatorKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.label())
    }
}

impl FromStr for EstimatorKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim() {
            "sup" | "supervised" => Ok(EstimatorKind::Supervised),
            "bdmi" => Ok(EstimatorKind::Bdmi),
            "hbdmi" => Ok(EstimatorKind::Hbdmi),
            "imp" | "imputation" => Ok(EstimatorKind::Imputation),
            other => Err(Error::Config(format!(
                "unknown method '{other}' (expected sup, bdmi, hbdmi or imp)"
            ))),
        }
    }
}

/// Per-fold posterior: the law of `t_bias + t_imputed` with independent parts.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct FoldPosterior {
    pub fold_id: usize,
    pub t_bias: TComponent,
    pub t_imputed: TComponent,
}

impl FoldPosterior {
    pub fn center(&self) -> f64 {
        self.t_bias.location + self.t_imputed.location
    }

    pub fn sample(&self, count: usize, rng: &mut RngStream) -> Result<Vec<f64>> {
        crate::sampling::sample_convolution(self.t_bias, self.t_imputed, count, rng)
    }
}

fn mean_and_var(v: impl ExactSizeIterator<Item = f64> + Clone) -> (f64, f64) {
    let n = v.len() as f64;
    let mean = v.clone().sum::<f64>() / n;
    let var = v.map(|x| (x - mean).powi(2)).sum::<f64>() / (n - 1.0);
    (mean, var)
}

fn check_fold_sizes(n: usize, big_n: usize) -> Result<()> {
    if n < MIN_FOLD_SIZE {
        return Err(Error::InsufficientData {
            side: DataSide::Labeled,
            detail: format!("fold has {n} rows, need at least {MIN_FOLD_SIZE}"),
        });
    }
    if big_n < MIN_FOLD_SIZE {
        return Err(Error::InsufficientData {
            side: DataSide::Unlabeled,
            detail: format!("fold has {big_n} rows, need at least {MIN_FOLD_SIZE}"),
        });
    }
    Ok(())
}

/// Fold posterior from residuals `Y - m(X)` on the labeled fold and
/// predictions `m(X)` on the unlabeled fold.
pub fn fold_posterior_from_predictions(
    residuals: &[f64],
    unlabeled_predictions: &[f64],
    fold_id: usize,
) -> Result<FoldPosterior> {
    let n = residuals.len();
    let big_n = unlabeled_predictions.len();
    check_fold_sizes(n, big_n)?;
    let (mu_n, var_n) = mean_and_var(residuals.iter().copied());
    let (mu_big, var_big) = mean_and_var(unlabeled_predictions.iter().copied());
    Ok(FoldPosterior {
        fold_id,
        t_bias: TComponent::new(n as f64 - 1.0, mu_n, var_n / n as f64)?,
        t_imputed: TComponent::new(big_n as f64 - 1.0, mu_big, var_big / big_n as f64)?,
    })
}

pub fn fold_posterior(
    labeled_outcomes: &DVector<f64>,
    labeled_features: &DMatrix<f64>,
    unlabeled_features: &DMatrix<f64>,
    draw: &RegressionDraw,
    fold_id: usize,
) -> Result<FoldPosterior> {
    if labeled_outcomes.len() != labeled_features.nrows() {
        return Err(Error::DimensionMismatch(format!(
            "{} outcomes vs {} labeled rows",
            labeled_outcomes.len(),
            labeled_features.nrows()
        )));
    }
    check_fold_sizes(labeled_features.nrows(), unlabeled_features.nrows())?;
    let fitted = predict(draw, labeled_features)?;
    let imputed = predict(draw, unlabeled_features)?;
    let resid = labeled_outcomes - fitted;
    fold_posterior_from_predictions(resid.as_slice(), imputed.as_slice(), fold_id)
}

/// Summary of one fold in a cross-fitted run.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct FoldSummary {
    pub fold: usize,
    pub n: usize,
    pub big_n: usize,
    pub center: f64,
    pub bias_scale: f64,
    pub imputed_scale: f64,
}

impl FoldSummary {
    fn new(fp: &FoldPosterior, n: usize, big_n: usize) -> Self {
        FoldSummary {
            fold: fp.fold_id,
            n,
            big_n,
            center: fp.center(),
            bias_scale: fp.t_bias.scale(),
            imputed_scale: fp.t_imputed.scale(),
        }
    }
}

/// Plug-in variance decomposition for a fitted regression function.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct VarianceReport {
    /// Sample variance of `Y - m(X)` over the labeled data.
    pub sigma1_sq: f64,
    /// Sample variance of `m(X)` over the unlabeled data.
    pub sigma2_sq: f64,
    pub tau_sq: f64,
    pub supervised_var: f64,
    /// Sample covariance of `Y - m(X)` and `m(X)` over the labeled data.
    pub residual_prediction_cov: f64,
    /// `supervised_var / tau_sq`.
    pub efficiency_ratio: f64,
}

/// Builds the report from `m(X)` on every labeled and unlabeled row.
pub fn variance_report(
    data: &Dataset,
    labeled_predictions: &DVector<f64>,
    unlabeled_predictions: &DVector<f64>,
) -> Result<VarianceReport> {
    let n = data.n();
    let big_n = data.big_n();
    if labeled_predictions.len() != n || unlabeled_predictions.len() != big_n {
        return Err(Error::DimensionMismatch(
            "prediction vectors do not match the dataset".into(),
        ));
    }
    let y = data.outcomes();
    let resid = y - labeled_predictions;
    let (r_mean, sigma1_sq) = mean_and_var(resid.iter().copied());
    let (_, sigma2_sq) = mean_and_var(unlabeled_predictions.iter().copied());
    let (_, var_y) = mean_and_var(y.iter().copied());
    let p_mean = labeled_predictions.mean();
    let cov = resid
        .iter()
        .zip(labeled_predictions.iter())
        .map(|(r, p)| (r - r_mean) * (p - p_mean))
        .sum::<f64>()
        / (n as f64 - 1.0);
    let tau_sq = sigma1_sq / n as f64 + sigma2_sq / big_n as f64;
    let supervised_var = var_y / n as f64;
    Ok(VarianceReport {
        sigma1_sq,
        sigma2_sq,
        tau_sq,
        supervised_var,
        residual_prediction_cov: cov,
        efficiency_ratio: supervised_var / tau_sq,
    })
}

/// Convenience form of [`variance_report`] for a single regression function.
pub fn variance_report_for(data: &Dataset, draw: &RegressionDraw) -> Result<VarianceReport> {
    let l = predict(draw, data.labeled_features())?;
    let u = predict(draw, data.unlabeled_features())?;
    variance_report(data, &l, &u)
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct Diagnostics {
    pub seed: u64,
    #[serde(skip_serializing_if = "Vec::is_empty", default)]
    pub folds: Vec<FoldSummary>,
    #[serde(skip_serializing_if = "Vec::is_empty", default)]
    pub nuisance: Vec<NuisanceMetadata>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub variance: Option<VarianceReport>,
    /// Wall-clock seconds; never serialized so reports stay reproducible.
    #[serde(skip)]
    pub elapsed_secs: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct EstimationResult {
    pub method: EstimatorKind,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub nuisance: Option<String>,
    pub point_estimate: f64,
    pub ci: (f64, f64),
    pub alpha: f64,
    #[serde(skip)]
    pub posterior_draws: Vec<f64>,
    pub diagnostics: Diagnostics,
}

impl EstimationResult {
    pub fn ci_length(&self) -> f64 {
        self.ci.1 - self.ci.0
    }

    /// `method` or `method:nuisance`.
    pub fn label(&self) -> String {
        match &self.nuisance {
            Some(n) => format!("{}:{n}", self.method),
            None => self.method.to_string(),
        }
    }

    pub fn draw_mean(&self) -> f64 {
        self.posterior_draws.iter().sum::<f64>() / self.posterior_draws.len() as f64
    }
}

/// Equal-tailed interval from the `alpha/2` and `1 - alpha/2` quantiles.
pub fn credible_interval(draws: &[f64], alpha: f64) -> Result<(f64, f64)> {
    check_alpha(alpha)?;
    if draws.is_empty() {
        return Err(Error::EmptyInput("posterior draws"));
    }
    let mut sorted = draws.to_vec();
    sort_floats(&mut sorted);
    Ok((
        quantile_sorted(&sorted, alpha / 2.0)?,
        quantile_sorted(&sorted, 1.0 - alpha / 2.0)?,
    ))
}

fn check_alpha(alpha: f64) -> Result<()> {
    if !(alpha > 0.0 && alpha < 1.0) {
        return Err(Error::InvalidParameter(format!("alpha must lie in (0, 1), got {alpha}")));
    }
    Ok(())
}

fn check_draws(m: usize) -> Result<()> {
    if m < MIN_DRAWS {
        return Err(Error::InvalidParameter(format!(
            "need at least {MIN_DRAWS} posterior draws, got {m}"
        )));
    }
    Ok(())
}

fn finish(
    method: EstimatorKind,
    nuisance: Option<String>,
    point_estimate: f64,
    draws: Vec<f64>,
    alpha: f64,
    diagnostics: Diagnostics,
) -> Result<EstimationResult> {
    let ci = credible_interval(&draws, alpha)?;
    Ok(EstimationResult {
        method,
        nuisance,
        point_estimate,
        ci,
        alpha,
        posterior_draws: draws,
        diagnostics,
    })
}

/// `t_{n-1}(Ybar, s^2/n)`.
pub fn supervised_posterior(
    data: &Dataset,
    m: usize,
    alpha: f64,
    rng: &RngStream,
) -> Result<EstimationResult> {
    let start = Instant::now();
    check_draws(m)?;
    check_alpha(alpha)?;
    let n = data.n();
    if n < 3 {
        return Err(Error::InsufficientData {
            side: DataSide::Labeled,
            detail: format!("supervised posterior needs at least 3 outcomes, got {n}"),
        });
    }
    let (ybar, var) = mean_and_var(data.outcomes().iter().copied());
    let comp = TComponent::new(n as f64 - 1.0, ybar, var / n as f64)?;
    let mut theta_rng = rng.substream(THETA_STREAM);
    let draws = crate::sampling::sample_student_t(comp, m, &mut theta_rng)?;
    let constant = RegressionDraw::constant(ybar, data.p());
    let diagnostics = Diagnostics {
        seed: rng.seed(),
        variance: Some(variance_report_for(data, &constant)?),
        elapsed_secs: start.elapsed().as_secs_f64(),
        ..Default::default()
    };
    finish(EstimatorKind::Supervised, None, ybar, draws, alpha, diagnostics)
}

/// Posterior of `mean over U of m(X)` with `m` fitted on all of `L`.
pub fn imputation_posterior(
    data: &Dataset,
    fitter: &dyn NuisanceFitter,
    m: usize,
    alpha: f64,
    rng: &RngStream,
) -> Result<EstimationResult> {
    let start = Instant::now();
    check_draws(m)?;
    check_alpha(alpha)?;
    let mut fit_rng = rng.substream(FIT_STREAM);
    let post = fitter.fit(data.labeled_features(), data.outcomes(), &mut fit_rng)?;
    let u = data.unlabeled_features();
    let ubar = DVector::from_fn(data.p(), |j, _| u.column(j).mean());
    let at_ubar = |d: &RegressionDraw| d.intercept + d.coefficients.dot(&ubar);
    let mut draw_rng = rng.substream(NUISANCE_STREAM);
    let draws: Vec<f64> = (0..m).map(|_| at_ubar(&post.sample(&mut draw_rng))).collect();
    let mean = post.posterior_mean();
    let point = match &mean {
        Some(d) => at_ubar(d),
        None => draws.iter().sum::<f64>() / m as f64,
    };
    let variance = match &mean {
        Some(d) => Some(variance_report_for(data, d)?),
        None => None,
    };
    let diagnostics = Diagnostics {
        seed: rng.seed(),
        nuisance: vec![post.metadata()],
        variance,
        elapsed_secs: start.elapsed().as_secs_f64(),
        ..Default::default()
    };
    finish(
        EstimatorKind::Imputation,
        Some(fitter.label()),
        point,
        draws,
        alpha,
        diagnostics,
    )
}

/// The fold plan an estimator draws from `rng` when none is supplied.
pub fn default_fold_plan(data: &Dataset, k: usize, rng: &RngStream) -> Result<FoldPlan> {
    make_fold_plan(data.n(), data.big_n(), k, &mut rng.substream(PLAN_STREAM))
}

struct FoldRun {
    posterior: FoldPosterior,
    draws: Vec<f64>,
    labeled_predictions: Vec<f64>,
    unlabeled_predictions: Vec<f64>,
    metadata: NuisanceMetadata,
}

/// Cross-fitted BDMI posterior: one nuisance draw per fold, `m` draws from
/// each fold posterior, averaged across folds.
pub fn bdmi_cf(
    data: &Dataset,
    k: usize,
    fitter: &dyn NuisanceFitter,
    m: usize,
    alpha: f64,
    rng: &RngStream,
) -> Result<EstimationResult> {
    let plan = default_fold_plan(data, k, rng)?;
    bdmi_cf_with_plan(data, &plan, fitter, m, alpha, rng)
}

pub fn bdmi_cf_with_plan(
    data: &Dataset,
    plan: &FoldPlan,
    fitter: &dyn NuisanceFitter,
    m: usize,
    alpha: f64,
    rng: &RngStream,
) -> Result<EstimationResult> {
    let start = Instant::now();
    check_draws(m)?;
    check_alpha(alpha)?;
    check_plan(data, plan)?;
    let runs: Vec<FoldRun> = (0..plan.k())
        .into_par_iter()
        .map(|f| bdmi_fold(data, plan, f, fitter, m, rng).map_err(|e| e.in_fold(f)))
        .collect::<Result<_>>()?;

    let n = data.n() as f64;
    let big_n = data.big_n() as f64;
    let mut point = 0.0;
    let mut lpred = DVector::zeros(data.n());
    let mut upred = DVector::zeros(data.big_n());
    for (f, run) in runs.iter().enumerate() {
        let nk = plan.labeled_fold(f).len() as f64;
        let big_nk = plan.unlabeled_fold(f).len() as f64;
        point += nk * run.posterior.t_bias.location / n + big_nk * run.posterior.t_imputed.location / big_n;
        for (&i, &v) in plan.labeled_fold(f).iter().zip(&run.labeled_predictions) {
            lpred[i] = v;
        }
        for (&i, &v) in plan.unlabeled_fold(f).iter().zip(&run.unlabeled_predictions) {
            upred[i] = v;
        }
    }
    let draws = aggregate(runs.iter().map(|r| r.draws.as_slice()), m);
    let diagnostics = Diagnostics {
        seed: rng.seed(),
        folds: runs
            .iter()
            .enumerate()
            .map(|(f, r)| FoldSummary::new(&r.posterior, plan.labeled_fold(f).len(), plan.unlabeled_fold(f).len()))
            .collect(),
        nuisance: runs.iter().map(|r| r.metadata.clone()).collect(),
        variance: Some(variance_report(data, &lpred, &upred)?),
        elapsed_secs: start.elapsed().as_secs_f64(),
    };
    finish(EstimatorKind::Bdmi, Some(fitter.label()), point, draws, alpha, diagnostics)
}

fn check_plan(data: &Dataset, plan: &FoldPlan) -> Result<()> {
    let nl: usize = plan.labeled_folds().iter().map(Vec::len).sum();
    let nu: usize = plan.unlabeled_folds().iter().map(Vec::len).sum();
    if nl != data.n() || nu != data.big_n() {
        return Err(Error::DimensionMismatch(format!(
            "fold plan covers {nl}/{nu} rows, dataset has {}/{}",
            data.n(),
            data.big_n()
        )));
    }
    Ok(())
}

fn fold_stream(rng: &RngStream, f: usize) -> RngStream {
    rng.substream(FOLD_STREAM).substream(f as u64)
}

fn bdmi_fold(
    data: &Dataset,
    plan: &FoldPlan,
    f: usize,
    fitter: &dyn NuisanceFitter,
    m: usize,
    rng: &RngStream,
) -> Result<FoldRun> {
    let stream = fold_stream(rng, f);
    let (train_x, train_y) = data.labeled_subset(plan.train_set(f));
    let post = fitter.fit(&train_x, &train_y, &mut stream.substream(FIT_STREAM))?;
    let draw = post.sample(&mut stream.substream(NUISANCE_STREAM));
    let (lx, ly) = data.labeled_subset(plan.labeled_fold(f));
    let ux = data.unlabeled_subset(plan.unlabeled_fold(f));
    let fitted = predict(&draw, &lx)?;
    let imputed = predict(&draw, &ux)?;
    let resid = &ly - &fitted;
    let posterior = fold_posterior_from_predictions(resid.as_slice(), imputed.as_slice(), f)?;
    let draws = posterior.sample(m, &mut stream.substream(THETA_STREAM))?;
    Ok(FoldRun {
        posterior,
        draws,
        labeled_predictions: fitted.as_slice().to_vec(),
        unlabeled_predictions: imputed.as_slice().to_vec(),
        metadata: post.metadata(),
    })
}

fn aggregate<'a>(per_fold: impl Iterator<Item = &'a [f64]>, m: usize) -> Vec<f64> {
    let mut out = vec![0.0; m];
    let mut k = 0usize;
    for draws in per_fold {
        for (o, d) in out.iter_mut().zip(draws) {
            *o += d;
        }
        k += 1;
    }
    let k = k as f64;
    out.iter_mut().for_each(|o| *o /= k);
    out
}

/// Sufficient statistics of one fold, so that the fold posterior of any
/// linear draw costs `O(p^2)` instead of a pass over the fold.
struct FoldStats {
    n: usize,
    big_n: usize,
    xbar: DVector<f64>,
    ybar: f64,
    sxx: DMatrix<f64>,
    sxy: DVector<f64>,
    syy: f64,
    ubar: DVector<f64>,
    suu: DMatrix<f64>,
}

fn centered_cov(x: &DMatrix<f64>) -> (DVector<f64>, DMatrix<f64>) {
    let rows = x.nrows() as f64;
    let mean = DVector::from_fn(x.ncols(), |j, _| x.column(j).mean());
    let mut c = x.clone();
    for j in 0..c.ncols() {
        c.column_mut(j).add_scalar_mut(-mean[j]);
    }
    let cov = c.tr_mul(&c) / (rows - 1.0);
    (mean, cov)
}

impl FoldStats {
    fn new(ly: &DVector<f64>, lx: &DMatrix<f64>, ux: &DMatrix<f64>) -> Result<Self> {
        check_fold_sizes(lx.nrows(), ux.nrows())?;
        let n = lx.nrows();
        let (xbar, sxx) = centered_cov(lx);
        let ybar = ly.mean();
        let yc = ly.add_scalar(-ybar);
        let mut xc = lx.clone();
        for j in 0..xc.ncols() {
            xc.column_mut(j).add_scalar_mut(-xbar[j]);
        }
        let sxy = xc.tr_mul(&yc) / (n as f64 - 1.0);
        let syy = yc.norm_squared() / (n as f64 - 1.0);
        let (ubar, suu) = centered_cov(ux);
        Ok(FoldStats {
            n,
            big_n: ux.nrows(),
            xbar,
            ybar,
            sxx,
            sxy,
            syy,
            ubar,
            suu,
        })
    }

    fn posterior(&self, d: &RegressionDraw, fold_id: usize) -> Result<FoldPosterior> {
        let b = &d.coefficients;
        let mu_n = self.ybar - d.intercept - b.dot(&self.xbar);
        let var_n = (self.syy - 2.0 * b.dot(&self.sxy) + (&self.sxx * b).dot(b)).max(0.0);
        let mu_big = d.intercept + b.dot(&self.ubar);
        let var_big = (&self.suu * b).dot(b).max(0.0);
        Ok(FoldPosterior {
            fold_id,
            t_bias: TComponent::new(self.n as f64 - 1.0, mu_n, var_n / self.n as f64)?,
            t_imputed: TComponent::new(self.big_n as f64 - 1.0, mu_big, var_big / self.big_n as f64)?,
        })
    }
}

struct HbdmiFold {
    point_parts: (f64, f64),
    summary: Option<FoldSummary>,
    draws: Vec<f64>,
    labeled_predictions: Option<Vec<f64>>,
    unlabeled_predictions: Option<Vec<f64>>,
    metadata: NuisanceMetadata,
}

/// Hierarchical BDMI: a fresh nuisance draw for every posterior draw.
pub fn hbdmi_cf(
    data: &Dataset,
    k: usize,
    fitter: &dyn NuisanceFitter,
    m: usize,
    alpha: f64,
    rng: &RngStream,
) -> Result<EstimationResult> {
    let plan = default_fold_plan(data, k, rng)?;
    hbdmi_cf_with_plan(data, &plan, fitter, m, alpha, rng)
}

pub fn hbdmi_cf_with_plan(
    data: &Dataset,
    plan: &FoldPlan,
    fitter: &dyn NuisanceFitter,
    m: usize,
    alpha: f64,
    rng: &RngStream,
) -> Result<EstimationResult> {
    let start = Instant::now();
    check_draws(m)?;
    check_alpha(alpha)?;
    check_plan(data, plan)?;
    let runs: Vec<HbdmiFold> = (0..plan.k())
        .into_par_iter()
        .map(|f| hbdmi_fold(data, plan, f, fitter, m, rng).map_err(|e| e.in_fold(f)))
        .collect::<Result<_>>()?;

    let n = data.n() as f64;
    let big_n = data.big_n() as f64;
    let mut point = 0.0;
    for (f, run) in runs.iter().enumerate() {
        let nk = plan.labeled_fold(f).len() as f64;
        let big_nk = plan.unlabeled_fold(f).len() as f64;
        point += nk * run.point_parts.0 / n + big_nk * run.point_parts.1 / big_n;
    }
    let variance = if runs.iter().all(|r| r.labeled_predictions.is_some()) {
        let mut lpred = DVector::zeros(data.n());
        let mut upred = DVector::zeros(data.big_n());
        for (f, run) in runs.iter().enumerate() {
            let lp = run.labeled_predictions.as_ref().expect("checked");
            let up = run.unlabeled_predictions.as_ref().expect("checked");
            for (&i, &v) in plan.labeled_fold(f).iter().zip(lp) {
                lpred[i] = v;
            }
            for (&i, &v) in plan.unlabeled_fold(f).iter().zip(up) {
                upred[i] = v;
            }
        }
        Some(variance_report(data, &lpred, &upred)?)
    } else {
        None
    };
    let draws = aggregate(runs.iter().map(|r| r.draws.as_slice()), m);
    let diagnostics = Diagnostics {
        seed: rng.seed(),
        folds: runs.iter().filter_map(|r| r.summary.clone()).collect(),
        nuisance: runs.iter().map(|r| r.metadata.clone()).collect(),
        variance,
        elapsed_secs: start.elapsed().as_secs_f64(),
    };
    finish(EstimatorKind::Hbdmi, Some(fitter.label()), point, draws, alpha, diagnostics)
}

fn hbdmi_fold(
    data: &Dataset,
    plan: &FoldPlan,
    f: usize,
    fitter: &dyn NuisanceFitter,
    m: usize,
    rng: &RngStream,
) -> Result<HbdmiFold> {
    let stream = fold_stream(rng, f);
    let (train_x, train_y) = data.labeled_subset(plan.train_set(f));
    let post = fitter.fit(&train_x, &train_y, &mut stream.substream(FIT_STREAM))?;
    let (lx, ly) = data.labeled_subset(plan.labeled_fold(f));
    let ux = data.unlabeled_subset(plan.unlabeled_fold(f));
    let stats = FoldStats::new(&ly, &lx, &ux)?;

    let nk = lx.nrows() as f64;
    let big_nk = ux.nrows() as f64;
    let t_bias = TSampler::new(TComponent::new(nk - 1.0, 0.0, 1.0)?)?;
    let t_imp = TSampler::new(TComponent::new(big_nk - 1.0, 0.0, 1.0)?)?;
    let mut nuisance_rng = stream.substream(NUISANCE_STREAM);
    let mut theta_rng = stream.substream(THETA_STREAM);
    let mut draws = Vec::with_capacity(m);
    let mut sums = (0.0, 0.0);
    for _ in 0..m {
        let d = post.sample(&mut nuisance_rng);
        let fp = stats.posterior(&d, f)?;
        sums.0 += fp.t_bias.location;
        sums.1 += fp.t_imputed.location;
        let theta = fp.t_bias.location
            + fp.t_bias.scale() * t_bias.draw(&mut theta_rng)
            + fp.t_imputed.location
            + fp.t_imputed.scale() * t_imp.draw(&mut theta_rng);
        draws.push(theta);
    }

    let (point_parts, summary, lp, up) = match post.posterior_mean() {
        Some(mean) => {
            let fp = stats.posterior(&mean, f)?;
            let lp = predict(&mean, &lx)?;
            let up = predict(&mean, &ux)?;
            (
                (fp.t_bias.location, fp.t_imputed.location),
                Some(FoldSummary::new(&fp, lx.nrows(), ux.nrows())),
                Some(lp.as_slice().to_vec()),
                Some(up.as_slice().to_vec()),
            )
        }
        None => ((sums.0 / m as f64, sums.1 / m as f64), None, None, None),
    };
    Ok(HbdmiFold {
        point_parts,
        summary,
        draws,
        labeled_predictions: lp,
        unlabeled_predictions: up,
        metadata: post.metadata(),
    })
}

/// Dispatches on [`EstimatorKind`]; `fitter` is ignored for the supervised
/// posterior.
pub fn estimate(
    kind: EstimatorKind,
    data: &Dataset,
    k: usize,
    fitter: &dyn NuisanceFitter,
    m: usize,
    alpha: f64,
    rng: &RngStream,
) -> Result<EstimationResult> {
    match kind {
        EstimatorKind::Supervised => supervised_posterior(data, m, alpha, rng),
        EstimatorKind::Bdmi => bdmi_cf(data, k, fitter, m, alpha, rng),
        EstimatorKind::Hbdmi => hbdmi_cf(data, k, fitter, m, alpha, rng),
        EstimatorKind::Imputation => imputation_posterior(data, fitter, m, alpha, rng),
    }
}

/// An estimator paired with its nuisance method, written `bdmi:bols` or
/// just `sup`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "String", into = "String")]
pub struct MethodSpec {
    pub kind: EstimatorKind,
    pub nuisance: Option<NuisanceMethod>,
}

impl MethodSpec {
    pub fn supervised() -> Self {
        MethodSpec {
            kind: EstimatorKind::Supervised,
            nuisance: None,
        }
    }

    pub fn new(kind: EstimatorKind, nuisance: NuisanceMethod) -> Self {
        if kind == EstimatorKind::Supervised {
            return MethodSpec::supervised();
        }
        MethodSpec {
            kind,
            nuisance: Some(nuisance),
        }
    }

    pub fn run(&self, data: &Dataset, k: usize, m: usize, alpha: f64, rng: &RngStream) -> Result<EstimationResult> {
        let fitter = self.nuisance.clone().unwrap_or(NuisanceMethod::Zero);
        estimate(self.kind, data, k, &fitter, m, alpha, rng)
    }
}

impl fmt::Display for MethodSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match &self.nuisance {
            Some(n) => write!(f, "{}:{n}", self.kind),
            None => write!(f, "{}", self.kind),
        }
    }
}

impl FromStr for MethodSpec {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let (kind, rest) = match s.trim().split_once(':') {
            Some((k, r)) => (k.parse::<EstimatorKind>()?, Some(r)),
            None => (s.parse::<EstimatorKind>()?, None),
        };
        match (kind, rest) {
            (EstimatorKind::Supervised, None) => Ok(MethodSpec::supervised()),
            (EstimatorKind::Supervised, Some(_)) => Err(Error::Config(format!(
                "the supervised method takes no nuisance: '{s}'"
            ))),
            (_, None) => Err(Error::Config(format!("method '{s}' needs a nuisance, e.g. '{kind}:bols'"))),
            (_, Some(r)) => Ok(MethodSpec::new(kind, r.parse()?)),
        }
    }
}

impl TryFrom<String> for MethodSpec {
    type Error = Error;

    fn try_from(s: String) -> Result<Self> {
        s.parse()
    }
}

impl From<MethodSpec> for String {
    fn from(m: MethodSpec) -> String {
        m.to_string()
    }
}
