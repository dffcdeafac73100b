//! Semi-supervised estimation of a population mean.
//!
//! A small labeled sample `(Y, X)` and a large unlabeled sample `X` are
//! combined through a posterior over regression functions. The estimators
//! in [`estimators`] split the labeled data into folds, fit a nuisance
//! posterior on each training part and build a debiased posterior for the
//! mean of `Y` from the held-out labeled and unlabeled folds.
//!
//! ```
//! use nalgebra::{DMatrix, DVector};
//! use ssmean::{bdmi_cf, Dataset, NuisanceMethod, RngStream};
//!
//! let mut rng = RngStream::new(7, 0);
//! let x = DMatrix::from_fn(60, 2, |_, _| ssmean::sampling::standard_normal(&mut rng));
//! let u = DMatrix::from_fn(600, 2, |_, _| ssmean::sampling::standard_normal(&mut rng));
//! let y = DVector::from_fn(60, |i, _| 1.0 + x[(i, 0)]);
//! let data = Dataset::new(y, x, u).unwrap();
//! let fit = bdmi_cf(&data, 5, &NuisanceMethod::Bols, 1000, 0.05, &rng).unwrap();
//! assert!(fit.ci.0 <= fit.ci.1);
//! ```

pub mod data;
pub mod diagnostics;
pub mod error;
pub mod estimators;
pub mod io;
pub mod nuisance;
pub mod sampling;
pub mod simulation;

pub use data::{make_fold_plan, validate_dataset, Dataset, FoldPlan};
pub use error::{DataSide, Error, Result};
pub use estimators::{
    bdmi_cf, credible_interval, fold_posterior, hbdmi_cf, imputation_posterior,
    supervised_posterior, variance_report, EstimationResult, EstimatorKind, FoldPosterior,
    MethodSpec,
};
pub use nuisance::{
    constant_nuisance, fit_bols, fit_bridge, fit_spike_slab, predict, zero_nuisance,
    GibbsConfig, NuisanceFitter, NuisanceMethod, NuisancePosterior, RegressionDraw,
};
pub use sampling::{sample_quantile, sample_student_t, RngStream, TComponent};
pub use simulation::{run_replications, DesignKind, MetricsTable, SimDesign};
