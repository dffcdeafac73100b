use nalgebra::{DMatrix, DVector};
use rand_distr::{Distribution, Gamma};

use super::{NuisanceMetadata, NuisancePosterior, RegressionDraw};
use crate::error::{Error, Result};
use crate::sampling::{standard_normal, RngStream};

/// Relative pivot size below which the intercept-augmented design is
/// treated as rank deficient.
const RANK_TOL: f64 = 1e-10;

/// Flat-prior Bayesian least squares: `(alpha, beta)` is multivariate t with
/// `m - p - 1` degrees of freedom around the least-squares solution.
#[derive(Clone, Debug)]
pub struct BolsPosterior {
    location: DVector<f64>,
    /// Upper-triangular `R` with `X~'X~ = R'R`.
    r: DMatrix<f64>,
    scale: f64,
    df: f64,
    mixing: Option<Gamma<f64>>,
}

pub fn fit_bols(features: &DMatrix<f64>, outcomes: &DVector<f64>) -> Result<BolsPosterior> {
    let m = features.nrows();
    let p = features.ncols();
    if outcomes.len() != m {
        return Err(Error::DimensionMismatch(format!("{m} rows vs {} outcomes", outcomes.len())));
    }
    // with m = p + 1 every fit interpolates, so an exact fit says nothing
    if m < p + 2 {
        return Err(Error::SingularDesign(format!(
            "{m} rows cannot support {p} features plus intercept"
        )));
    }
    let design = DMatrix::from_fn(m, p + 1, |i, j| if j == 0 { 1.0 } else { features[(i, j - 1)] });

    let pivoted = design.clone().col_piv_qr();
    let rp = pivoted.r();
    let lead = rp[(0, 0)].abs();
    if let Some(k) = (0..=p).find(|&k| rp[(k, k)].abs() <= RANK_TOL * lead) {
        return Err(Error::SingularDesign(format!(
            "intercept-augmented design has rank {k} < {}",
            p + 1
        )));
    }

    let qr = design.clone().qr();
    let r = qr.r();
    let mut qty = outcomes.clone();
    qr.q_tr_mul(&mut qty);
    let head = qty.rows(0, p + 1).into_owned();
    let location = r
        .solve_upper_triangular(&head)
        .ok_or_else(|| Error::SingularDesign("triangular solve failed".into()))?;

    let resid = outcomes - &design * &location;
    let rss = resid.norm_squared();
    let df = (m - p - 1) as f64;
    let ybar = outcomes.mean();
    let tss = outcomes.iter().map(|v| (v - ybar).powi(2)).sum::<f64>();
    let exact = rss <= 1e-24 * tss || rss == 0.0;
    // an exact fit is a point mass; otherwise the t posterior needs df >= 2
    if !exact && m < p + 3 {
        return Err(Error::SingularDesign(format!(
            "{m} rows cannot support {p} features plus intercept with residual df >= 2"
        )));
    }
    let s2 = if exact { 0.0 } else { rss / df };
    let mixing = if s2 > 0.0 {
        Some(Gamma::new(df / 2.0, 2.0 / df).map_err(|e| Error::InvalidParameter(e.to_string()))?)
    } else {
        None
    };
    Ok(BolsPosterior {
        location,
        r,
        scale: s2.sqrt(),
        df,
        mixing,
    })
}

impl BolsPosterior {
    pub fn df(&self) -> f64 {
        self.df
    }

    pub fn location(&self) -> &DVector<f64> {
        &self.location
    }

    fn to_draw(v: &DVector<f64>) -> RegressionDraw {
        RegressionDraw::new(v[0], v.rows(1, v.len() - 1).into_owned())
    }
}

impl NuisancePosterior for BolsPosterior {
    fn sample(&self, rng: &mut RngStream) -> RegressionDraw {
        let Some(mixing) = &self.mixing else {
            return Self::to_draw(&self.location);
        };
        let z = DVector::from_fn(self.location.len(), |_, _| standard_normal(rng));
        let w = mixing.sample(rng);
        // R u = z  gives  u ~ N(0, (R'R)^-1)
        let u = self
            .r
            .solve_upper_triangular(&z)
            .expect("R has a nonzero diagonal after the rank check");
        let theta = &self.location + u * (self.scale / w.sqrt());
        Self::to_draw(&theta)
    }

    fn posterior_mean(&self) -> Option<RegressionDraw> {
        Some(Self::to_draw(&self.location))
    }

    fn metadata(&self) -> NuisanceMetadata {
        NuisanceMetadata {
            method: "bols".into(),
            df: Some(self.df),
            degenerate: self.mixing.is_none(),
            ..Default::default()
        }
    }
}
