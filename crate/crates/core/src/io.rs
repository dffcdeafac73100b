//! CSV ingestion, run configuration, reports and the command-line front end.

use std::fs;
use std::io::Write as _;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand};
use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

use crate::data::Dataset;
use crate::error::{DataSide, Error, Result};
use crate::estimators::{EstimationResult, EstimatorKind, MethodSpec, MIN_DRAWS};
use crate::nuisance::{GibbsConfig, NuisanceMethod};
use crate::sampling::RngStream;
use crate::simulation::{
    emit_density_data, metrics_csv, records_csv, run_replications, DesignKind, MetricsTable,
    SimDesign,
};

pub const SCHEMA_VERSION: u32 = 1;
pub const DEFAULT_K: usize = 5;
pub const DEFAULT_M: usize = 1000;
pub const DEFAULT_ALPHA: f64 = 0.05;
pub const DEFAULT_SEED: u64 = 1;
pub const DEFAULT_REPS: usize = 200;

/// Writes through a temporary file in the same directory and renames it
/// into place, so a failed run never leaves a partial file.
pub fn write_atomic(path: &Path, bytes: &[u8]) -> Result<()> {
    let io_err = |p: &Path| {
        let p = p.to_path_buf();
        move |source| Error::Io { path: p, source }
    };
    let dir = match path.parent() {
        Some(d) if !d.as_os_str().is_empty() => d.to_path_buf(),
        _ => PathBuf::from("."),
    };
    fs::create_dir_all(&dir).map_err(io_err(&dir))?;
    let name = path
        .file_name()
        .ok_or_else(|| Error::Config(format!("output path {} has no file name", path.display())))?;
    let tmp = dir.join(format!(".{}.{}.tmp", name.to_string_lossy(), std::process::id()));
    let result = (|| {
        let mut f = fs::File::create(&tmp).map_err(io_err(&tmp))?;
        f.write_all(bytes).map_err(io_err(&tmp))?;
        f.sync_all().map_err(io_err(&tmp))?;
        fs::rename(&tmp, path).map_err(io_err(path))
    })();
    if result.is_err() {
        let _ = fs::remove_file(&tmp);
    }
    result
}

/// A numeric CSV table with its header.
#[derive(Clone, Debug, PartialEq)]
pub struct CsvTable {
    pub header: Vec<String>,
    pub rows: Vec<Vec<f64>>,
}

fn read_csv(path: &Path, side: DataSide) -> Result<CsvTable> {
    let mut reader = csv::ReaderBuilder::new()
        .has_headers(true)
        .trim(csv::Trim::All)
        .from_path(path)
        .map_err(|e| csv_error(path, e))?;
    let header: Vec<String> = reader
        .headers()
        .map_err(|e| csv_error(path, e))?
        .iter()
        .map(str::to_string)
        .collect();
    if header.is_empty() || header.iter().all(String::is_empty) {
        return Err(Error::Parse {
            path: path.to_path_buf(),
            line: 1,
            detail: "missing header row".into(),
        });
    }
    let mut rows = Vec::new();
    for rec in reader.records() {
        let rec = rec.map_err(|e| csv_error(path, e))?;
        let line = rec.position().map(|p| p.line()).unwrap_or(0);
        let mut row = Vec::with_capacity(rec.len());
        for (j, field) in rec.iter().enumerate() {
            let v: f64 = field.parse().map_err(|_| Error::Parse {
                path: path.to_path_buf(),
                line,
                detail: format!("column '{}': cannot parse '{field}' as a number", header[j]),
            })?;
            if !v.is_finite() {
                return Err(Error::Validation {
                    side,
                    row: rows.len() + 1,
                    column: j + 1,
                    detail: format!("non-finite value '{field}' at line {line} of {}", path.display()),
                });
            }
            row.push(v);
        }
        rows.push(row);
    }
    Ok(CsvTable { header, rows })
}

fn csv_error(path: &Path, e: csv::Error) -> Error {
    let line = e.position().map(|p| p.line()).unwrap_or(0);
    match e.into_kind() {
        csv::ErrorKind::Io(source) => Error::Io {
            path: path.to_path_buf(),
            source,
        },
        csv::ErrorKind::UnequalLengths {
            expected_len, len, ..
        } => Error::Parse {
            path: path.to_path_buf(),
            line,
            detail: format!("ragged row: {len} fields, expected {expected_len}"),
        },
        other => Error::Parse {
            path: path.to_path_buf(),
            line,
            detail: format!("{other:?}"),
        },
    }
}

/// Labeled file: first column is the outcome, the rest are features.
#[derive(Clone, Debug, PartialEq)]
pub struct LabeledCsv {
    pub outcome_name: String,
    pub feature_names: Vec<String>,
    pub outcomes: DVector<f64>,
    pub features: DMatrix<f64>,
}

#[derive(Clone, Debug, PartialEq)]
pub struct UnlabeledCsv {
    pub feature_names: Vec<String>,
    pub features: DMatrix<f64>,
}

fn to_matrix(rows: &[Vec<f64>], skip: usize, width: usize) -> DMatrix<f64> {
    DMatrix::from_fn(rows.len(), width, |i, j| rows[i][j + skip])
}

pub fn load_labeled_csv(path: &Path) -> Result<LabeledCsv> {
    let t = read_csv(path, DataSide::Labeled)?;
    if t.rows.is_empty() {
        return Err(Error::EmptyInput("labeled data"));
    }
    let p = t.header.len() - 1;
    Ok(LabeledCsv {
        outcome_name: t.header[0].clone(),
        feature_names: t.header[1..].to_vec(),
        outcomes: DVector::from_fn(t.rows.len(), |i, _| t.rows[i][0]),
        features: to_matrix(&t.rows, 1, p),
    })
}

pub fn load_unlabeled_csv(path: &Path) -> Result<UnlabeledCsv> {
    let t = read_csv(path, DataSide::Unlabeled)?;
    if t.rows.is_empty() {
        return Err(Error::EmptyInput("unlabeled data"));
    }
    let p = t.header.len();
    Ok(UnlabeledCsv {
        feature_names: t.header.clone(),
        features: to_matrix(&t.rows, 0, p),
    })
}

/// Loads both files, checks that the feature columns agree by name and
/// order, and builds a validated dataset.
pub fn load_dataset(labeled: &Path, unlabeled: &Path) -> Result<Dataset> {
    let l = load_labeled_csv(labeled)?;
    let u = load_unlabeled_csv(unlabeled)?;
    if l.feature_names != u.feature_names {
        let width = l.feature_names.len().max(u.feature_names.len());
        let diffs: Vec<String> = (0..width)
            .filter_map(|j| {
                let a = l.feature_names.get(j).map(String::as_str).unwrap_or("<none>");
                let b = u.feature_names.get(j).map(String::as_str).unwrap_or("<none>");
                (a != b).then(|| format!("column {}: labeled '{a}' vs unlabeled '{b}'", j + 1))
            })
            .collect();
        return Err(Error::HeaderMismatch(diffs.join("; ")));
    }
    Dataset::new(l.outcomes, l.features, u.features)
}

/// A string or a list of strings; comma-separated strings are split.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum OneOrMany {
    One(String),
    Many(Vec<String>),
}

impl OneOrMany {
    pub fn items(&self) -> Vec<String> {
        let raw: Vec<&str> = match self {
            OneOrMany::One(s) => vec![s.as_str()],
            OneOrMany::Many(v) => v.iter().map(String::as_str).collect(),
        };
        raw.iter().flat_map(|s| split_list(s)).collect()
    }
}

fn split_list(s: &str) -> Vec<String> {
    s.split(',')
        .map(str::trim)
        .filter(|p| !p.is_empty())
        .map(str::to_string)
        .collect()
}

/// Settings shared by config files, flags and report echoes. Every field
/// is optional in a file; [`RunConfig::resolve`] fills in defaults.
#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    #[serde(skip_serializing_if = "Option::is_none")]
    pub labeled: Option<PathBuf>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub unlabeled: Option<PathBuf>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub method: Option<OneOrMany>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub nuisance: Option<OneOrMany>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub k: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub m: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub alpha: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub seed: Option<u64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub gibbs: Option<GibbsConfig>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub kind: Option<DesignKind>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub n: Option<usize>,
    #[serde(rename = "N", skip_serializing_if = "Option::is_none")]
    pub big_n: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub p: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub s: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub alpha0: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub reps: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub density_bins: Option<usize>,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum CommandKind {
    Simulate,
    Estimate,
    Compare,
}

impl RunConfig {
    /// Reads a TOML or JSON file, chosen by extension.
    pub fn from_file(path: &Path) -> Result<RunConfig> {
        let text = fs::read_to_string(path).map_err(|source| Error::Io {
            path: path.to_path_buf(),
            source,
        })?;
        let is_json = path
            .extension()
            .map(|e| e.eq_ignore_ascii_case("json"))
            .unwrap_or(false);
        if is_json {
            serde_json::from_str(&text)
                .map_err(|e| Error::Config(format!("{}: {e}", path.display())))
        } else {
            toml::from_str(&text).map_err(|e| Error::Config(format!("{}: {e}", path.display())))
        }
    }

    /// Values set in `over` replace those in `self`.
    pub fn overridden_by(mut self, over: RunConfig) -> RunConfig {
        macro_rules! take {
            ($($f:ident),*) => { $( if over.$f.is_some() { self.$f = over.$f; } )* };
        }
        take!(labeled, unlabeled, method, nuisance, k, m, alpha, seed, gibbs, kind, n, big_n, p, s, alpha0, reps, density_bins);
        self
    }

    /// Fills defaults and checks every setting the command needs.
    pub fn resolve(mut self, command: CommandKind) -> Result<RunConfig> {
        self.k.get_or_insert(DEFAULT_K);
        self.m.get_or_insert(DEFAULT_M);
        self.alpha.get_or_insert(DEFAULT_ALPHA);
        self.seed.get_or_insert(DEFAULT_SEED);
        let methods = self
            .method
            .get_or_insert_with(|| OneOrMany::One("bdmi".into()))
            .items();
        self.method = Some(OneOrMany::Many(methods));
        let nuisances = self
            .nuisance
            .get_or_insert_with(|| OneOrMany::One("bols".into()))
            .items();
        self.nuisance = Some(OneOrMany::Many(nuisances));

        let k = self.k.unwrap();
        let m = self.m.unwrap();
        let alpha = self.alpha.unwrap();
        if k < 2 {
            return Err(Error::InvalidParameter(format!("K must be at least 2, got {k}")));
        }
        if m < MIN_DRAWS {
            return Err(Error::InvalidParameter(format!("M must be at least {MIN_DRAWS}, got {m}")));
        }
        if !(alpha > 0.0 && alpha < 1.0) {
            return Err(Error::InvalidParameter(format!("alpha must lie in (0, 1), got {alpha}")));
        }
        let specs = self.method_specs()?;
        match command {
            CommandKind::Estimate => {
                if specs.len() != 1 {
                    return Err(Error::Config(format!(
                        "estimate runs exactly one method, got {}; use compare for several",
                        specs.len()
                    )));
                }
                self.require_paths()?;
            }
            CommandKind::Compare => self.require_paths()?,
            CommandKind::Simulate => {
                self.alpha0.get_or_insert(5.0);
                self.reps.get_or_insert(DEFAULT_REPS);
                self.design()?.validate()?;
            }
        }
        Ok(self)
    }

    fn require_paths(&self) -> Result<()> {
        if self.labeled.is_none() || self.unlabeled.is_none() {
            return Err(Error::Config("both labeled and unlabeled CSV paths are required".into()));
        }
        Ok(())
    }

    fn nuisance_methods(&self) -> Result<Vec<NuisanceMethod>> {
        let list = self.nuisance.as_ref().map(OneOrMany::items).unwrap_or_default();
        list.iter()
            .map(|s| {
                let mut n: NuisanceMethod = s.parse()?;
                if let (NuisanceMethod::SpikeSlab(cfg), Some(g)) = (&mut n, &self.gibbs) {
                    *cfg = g.clone();
                }
                Ok(n)
            })
            .collect()
    }

    /// The run set: each listed estimator crossed with each nuisance, the
    /// supervised posterior once.
    pub fn method_specs(&self) -> Result<Vec<MethodSpec>> {
        let kinds: Vec<EstimatorKind> = self
            .method
            .as_ref()
            .map(OneOrMany::items)
            .unwrap_or_default()
            .iter()
            .map(|s| s.parse())
            .collect::<Result<_>>()?;
        if kinds.is_empty() {
            return Err(Error::Config("no method given".into()));
        }
        let nuisances = self.nuisance_methods()?;
        let mut specs: Vec<MethodSpec> = Vec::new();
        for kind in kinds {
            if kind == EstimatorKind::Supervised {
                if !specs.contains(&MethodSpec::supervised()) {
                    specs.push(MethodSpec::supervised());
                }
                continue;
            }
            if nuisances.is_empty() {
                return Err(Error::Config(format!("method {kind} needs a nuisance")));
            }
            for n in &nuisances {
                let spec = MethodSpec::new(kind, n.clone());
                if !specs.contains(&spec) {
                    specs.push(spec);
                }
            }
        }
        Ok(specs)
    }

    /// Simulation design; the supervised posterior is always included.
    pub fn design(&self) -> Result<SimDesign> {
        let need = |v: Option<usize>, name: &str| {
            v.ok_or_else(|| Error::Config(format!("simulate needs '{name}' in the config")))
        };
        let mut methods = vec![MethodSpec::supervised()];
        for s in self.method_specs()? {
            if !methods.contains(&s) {
                methods.push(s);
            }
        }
        Ok(SimDesign {
            kind: self
                .kind
                .ok_or_else(|| Error::Config("simulate needs 'kind' (correct or misspec)".into()))?,
            n: need(self.n, "n")?,
            big_n: need(self.big_n, "N")?,
            p: need(self.p, "p")?,
            s: need(self.s, "s")?,
            alpha0: self.alpha0.unwrap_or(5.0),
            reps: self.reps.unwrap_or(DEFAULT_REPS),
            k: self.k.unwrap_or(DEFAULT_K),
            methods,
            m: self.m.unwrap_or(DEFAULT_M),
            alpha: self.alpha.unwrap_or(DEFAULT_ALPHA),
            seed: self.seed.unwrap_or(DEFAULT_SEED),
            density_bins: self.density_bins,
        })
    }
}

/// One method's entry in a report.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct MethodReport {
    pub method: String,
    pub point: f64,
    pub ci: [f64; 2],
    pub length: f64,
    /// Supervised CI length over this method's CI length.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub rl: Option<f64>,
    #[serde(rename = "M")]
    pub m: usize,
    #[serde(rename = "K", skip_serializing_if = "Option::is_none")]
    pub k: Option<usize>,
    pub seed: u64,
    pub diagnostics: crate::estimators::Diagnostics,
}

impl MethodReport {
    fn new(res: &EstimationResult, k: usize, m: usize) -> Self {
        let cross_fitted = matches!(res.method, EstimatorKind::Bdmi | EstimatorKind::Hbdmi);
        MethodReport {
            method: res.label(),
            point: res.point_estimate,
            ci: [res.ci.0, res.ci.1],
            length: res.ci_length(),
            rl: None,
            m,
            k: cross_fitted.then_some(k),
            seed: res.diagnostics.seed,
            diagnostics: res.diagnostics.clone(),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Report {
    pub schema: u32,
    pub version: String,
    pub command: String,
    pub config: RunConfig,
    pub results: Vec<MethodReport>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SimulationReport {
    pub schema: u32,
    pub version: String,
    pub command: String,
    pub config: RunConfig,
    pub metrics: MetricsTable,
}

fn to_json<T: Serialize>(value: &T) -> Result<String> {
    let mut s = serde_json::to_string_pretty(value)
        .map_err(|e| Error::Config(format!("serializing report: {e}")))?;
    s.push('\n');
    Ok(s)
}

fn run_specs(config: &RunConfig, specs: &[MethodSpec]) -> Result<Vec<EstimationResult>> {
    let data = load_dataset(
        config.labeled.as_deref().expect("resolved"),
        config.unlabeled.as_deref().expect("resolved"),
    )?;
    let rng = RngStream::new(config.seed.expect("resolved"), 0);
    let (k, m, alpha) = (config.k.unwrap(), config.m.unwrap(), config.alpha.unwrap());
    specs
        .iter()
        .map(|spec| {
            let res = spec.run(&data, k, m, alpha, &rng)?;
            eprintln!("{}: {:.2}s", res.label(), res.diagnostics.elapsed_secs);
            Ok(res)
        })
        .collect()
}

fn make_report(command: &str, config: &RunConfig, results: &[EstimationResult]) -> Report {
    let (k, m) = (config.k.unwrap(), config.m.unwrap());
    let sup_len = results
        .iter()
        .find(|r| r.method == EstimatorKind::Supervised)
        .map(|r| r.ci_length());
    let results = results
        .iter()
        .map(|r| {
            let mut mr = MethodReport::new(r, k, m);
            mr.rl = sup_len.map(|s| s / r.ci_length());
            mr
        })
        .collect();
    Report {
        schema: SCHEMA_VERSION,
        version: env!("CARGO_PKG_VERSION").to_string(),
        command: command.to_string(),
        config: config.clone(),
        results,
    }
}

/// Runs one method on the configured files.
pub fn cmd_estimate(config: RunConfig) -> Result<Report> {
    let config = config.resolve(CommandKind::Estimate)?;
    let specs = config.method_specs()?;
    let results = run_specs(&config, &specs)?;
    Ok(make_report("estimate", &config, &results))
}

/// Runs the supervised posterior plus every configured method on the same
/// data and seed, reporting interval-length ratios against supervised.
pub fn cmd_compare(config: RunConfig) -> Result<Report> {
    let config = config.resolve(CommandKind::Compare)?;
    let mut specs = vec![MethodSpec::supervised()];
    for s in config.method_specs()? {
        if !specs.contains(&s) {
            specs.push(s);
        }
    }
    let results = run_specs(&config, &specs)?;
    Ok(make_report("compare", &config, &results))
}

pub fn cmd_simulate(config: RunConfig) -> Result<SimulationReport> {
    let config = config.resolve(CommandKind::Simulate)?;
    let design = config.design()?;
    let metrics = run_replications(&design)?;
    eprintln!("simulate: {} replications in {:.2}s", metrics.replications, metrics.runtime_secs);
    Ok(SimulationReport {
        schema: SCHEMA_VERSION,
        version: env!("CARGO_PKG_VERSION").to_string(),
        command: "simulate".into(),
        config,
        metrics,
    })
}

/// Semi-supervised mean estimation with cross-fitted Bayesian debiasing.
#[derive(Debug, Parser)]
#[command(name = "ssmean", version)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Run a Monte Carlo study on a synthetic design
    Simulate(CommonArgs),
    /// Estimate the outcome mean with one method
    Estimate(CommonArgs),
    /// Compare the supervised posterior with semi-supervised methods
    Compare(CommonArgs),
}

#[derive(Debug, Clone, Args)]
pub struct CommonArgs {
    /// TOML or JSON config file
    #[arg(long)]
    pub config: Option<PathBuf>,
    #[arg(long)]
    pub labeled: Option<PathBuf>,
    #[arg(long)]
    pub unlabeled: Option<PathBuf>,
    /// sup, bdmi, hbdmi or imp; comma-separated for several
    #[arg(long)]
    pub method: Option<String>,
    /// bols, bridge, spike, constant:<c> or zero; comma-separated for several
    #[arg(long)]
    pub nuisance: Option<String>,
    #[arg(long)]
    pub k: Option<usize>,
    #[arg(long)]
    pub m: Option<usize>,
    #[arg(long)]
    pub alpha: Option<f64>,
    #[arg(long)]
    pub seed: Option<u64>,
    /// Worker threads; output does not depend on it
    #[arg(long)]
    pub jobs: Option<usize>,
    /// Output file; stdout when absent
    #[arg(long)]
    pub out: Option<PathBuf>,
}

impl CommonArgs {
    fn config(&self) -> Result<RunConfig> {
        let base = match &self.config {
            Some(p) => RunConfig::from_file(p)?,
            None => RunConfig::default(),
        };
        Ok(base.overridden_by(RunConfig {
            labeled: self.labeled.clone(),
            unlabeled: self.unlabeled.clone(),
            method: self.method.clone().map(OneOrMany::One),
            nuisance: self.nuisance.clone().map(OneOrMany::One),
            k: self.k,
            m: self.m,
            alpha: self.alpha,
            seed: self.seed,
            ..Default::default()
        }))
    }
}

fn sibling(path: &Path, suffix: &str) -> PathBuf {
    let stem = path
        .file_stem()
        .map(|s| s.to_string_lossy().into_owned())
        .unwrap_or_else(|| "report".into());
    path.with_file_name(format!("{stem}{suffix}"))
}

fn emit(out: Option<&Path>, text: &str) -> Result<()> {
    match out {
        Some(p) => write_atomic(p, text.as_bytes()),
        None => {
            print!("{text}");
            Ok(())
        }
    }
}

/// Runs a parsed command line.
pub fn run_cli(cli: Cli) -> Result<()> {
    let args = match &cli.command {
        Command::Simulate(a) | Command::Estimate(a) | Command::Compare(a) => a.clone(),
    };
    let mut pool = rayon::ThreadPoolBuilder::new();
    if let Some(j) = args.jobs {
        if j == 0 {
            return Err(Error::InvalidParameter("--jobs must be at least 1".into()));
        }
        pool = pool.num_threads(j);
    }
    let pool = pool
        .build()
        .map_err(|e| Error::Config(format!("thread pool: {e}")))?;
    pool.install(|| {
        let config = args.config()?;
        let out = args.out.as_deref();
        match cli.command {
            Command::Estimate(_) => emit(out, &to_json(&cmd_estimate(config)?)?),
            Command::Compare(_) => emit(out, &to_json(&cmd_compare(config)?)?),
            Command::Simulate(_) => {
                let report = cmd_simulate(config)?;
                if let Some(p) = out {
                    write_atomic(&sibling(p, ".csv"), metrics_csv(&report.metrics).as_bytes())?;
                    write_atomic(
                        &sibling(p, "_replications.csv"),
                        records_csv(&report.metrics).as_bytes(),
                    )?;
                    if report.metrics.design.density_bins.is_some() {
                        emit_density_data(&report.metrics, &sibling(p, "_density"))?;
                    }
                }
                emit(out, &to_json(&report)?)
            }
        }
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn write(dir: &Path, name: &str, text: &str) -> PathBuf {
        let p = dir.join(name);
        fs::write(&p, text).unwrap();
        p
    }

    #[test]
    fn loads_simple_files() {
        let dir = tempfile::tempdir().unwrap();
        let l = write(dir.path(), "l.csv", "y,x1\n1,0\n2,1\n");
        let t = load_labeled_csv(&l).unwrap();
        assert_eq!(t.outcomes.as_slice(), &[1.0, 2.0]);
        assert_eq!(t.features.as_slice(), &[0.0, 1.0]);
        assert_eq!(t.feature_names, vec!["x1"]);

        let crlf = write(dir.path(), "c.csv", "y,x1\r\n1,0\r\n2,1\r\n");
        assert_eq!(load_labeled_csv(&crlf).unwrap(), t);
    }

    #[test]
    fn rejects_bad_files() {
        let dir = tempfile::tempdir().unwrap();
        let ragged = write(dir.path(), "r.csv", "y,x1\n1,0\n2\n");
        match load_labeled_csv(&ragged).unwrap_err() {
            Error::Parse { line, .. } => assert_eq!(line, 3),
            e => panic!("{e}"),
        }
        let nan = write(dir.path(), "n.csv", "y,x1\n1,0\nNaN,1\n");
        let err = load_labeled_csv(&nan).unwrap_err();
        assert!(matches!(err, Error::Validation { row: 2, column: 1, .. }), "{err}");
        assert!(err.to_string().contains("line 3"));
        let text = write(dir.path(), "t.csv", "y,x1\n1,abc\n");
        assert!(matches!(load_labeled_csv(&text), Err(Error::Parse { line: 2, .. })));

        let l = write(dir.path(), "l.csv", "y,x1,x2\n1,0,1\n2,1,1\n3,2,2\n");
        let u = write(dir.path(), "u.csv", "x2,x1\n0,1\n1,1\n2,2\n");
        let err = load_dataset(&l, &u).unwrap_err();
        assert!(matches!(err, Error::HeaderMismatch(_)));
        assert!(err.to_string().contains("column 1"));
    }

    #[test]
    fn config_defaults_and_overrides() {
        let dir = tempfile::tempdir().unwrap();
        let f = write(dir.path(), "c.toml", "labeled = 'a.csv'\nunlabeled = 'b.csv'\nmethod = 'bdmi'\nk = 5\n");
        let base = RunConfig::from_file(&f).unwrap();
        let cfg = base
            .clone()
            .overridden_by(RunConfig {
                k: Some(10),
                ..Default::default()
            })
            .resolve(CommandKind::Estimate)
            .unwrap();
        assert_eq!(cfg.k, Some(10));

        let mut no_k = base.clone();
        no_k.k = None;
        assert_eq!(no_k.resolve(CommandKind::Estimate).unwrap().k, Some(5));

        let mut bad = base.clone();
        bad.alpha = Some(1.5);
        let err = bad.resolve(CommandKind::Estimate).unwrap_err();
        assert!(matches!(err, Error::InvalidParameter(_)));
        assert_eq!(err.exit_code(), 2);

        let typo = write(dir.path(), "t.toml", "kk = 5\n");
        assert!(matches!(RunConfig::from_file(&typo), Err(Error::Config(_))));
        let json = write(dir.path(), "c.json", r#"{"k": 3, "method": ["bdmi", "hbdmi"], "nuisance": "bols,zero"}"#);
        let cfg = RunConfig::from_file(&json).unwrap();
        assert_eq!(cfg.k, Some(3));
        assert_eq!(cfg.method_specs().unwrap().len(), 4);
    }

    #[test]
    fn run_set_includes_supervised_once() {
        let cfg = RunConfig {
            method: Some(OneOrMany::One("sup,bdmi,imp".into())),
            nuisance: Some(OneOrMany::One("bols,bridge".into())),
            ..Default::default()
        };
        let labels: Vec<String> = cfg.method_specs().unwrap().iter().map(|s| s.to_string()).collect();
        assert_eq!(labels, vec!["sup", "bdmi:bols", "bdmi:bridge", "imp:bols", "imp:bridge"]);
    }

    #[test]
    fn atomic_write_replaces_content() {
        let dir = tempfile::tempdir().unwrap();
        let p = dir.path().join("sub").join("r.json");
        write_atomic(&p, b"one").unwrap();
        write_atomic(&p, b"two").unwrap();
        assert_eq!(fs::read_to_string(&p).unwrap(), "two");
        let leftovers = fs::read_dir(p.parent().unwrap()).unwrap().count();
        assert_eq!(leftovers, 1);
    }

    #[test]
    fn supervised_estimate_on_three_rows() {
        let dir = tempfile::tempdir().unwrap();
        let l = write(dir.path(), "l.csv", "y,x\n1,0\n2,1\n3,2\n");
        let u = write(dir.path(), "u.csv", "x\n0\n1\n2\n");
        let report = cmd_estimate(RunConfig {
            labeled: Some(l),
            unlabeled: Some(u),
            method: Some(OneOrMany::One("sup".into())),
            m: Some(200_000),
            ..Default::default()
        })
        .unwrap();
        let r = &report.results[0];
        assert_eq!(r.point, 2.0);
        let half = 4.302_652_729_7 * (1.0f64 / 3.0).sqrt();
        assert!((r.ci[0] - (2.0 - half)).abs() < 0.15);
        assert!((r.ci[1] - (2.0 + half)).abs() < 0.15);
    }
}
