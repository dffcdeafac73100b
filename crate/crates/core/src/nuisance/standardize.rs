use nalgebra::{DMatrix, DVector};

use super::RegressionDraw;

/// Column standardization with population (1/m) standard deviations.
/// Columns with zero spread are dropped and get coefficient zero.
#[derive(Clone, Debug)]
pub(crate) struct Standardizer {
    p: usize,
    kept: Vec<usize>,
    means: Vec<f64>,
    sds: Vec<f64>,
}

impl Standardizer {
    pub fn fit(x: &DMatrix<f64>) -> (Standardizer, DMatrix<f64>) {
        let m = x.nrows() as f64;
        let p = x.ncols();
        let mut kept = Vec::new();
        let mut means = Vec::new();
        let mut sds = Vec::new();
        for j in 0..p {
            let col = x.column(j);
            let mean = col.sum() / m;
            let var = col.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / m;
            let sd = var.sqrt();
            if sd > 1e-12 * mean.abs().max(1.0) {
                kept.push(j);
                means.push(mean);
                sds.push(sd);
            }
        }
        let z = DMatrix::from_fn(x.nrows(), kept.len(), |i, k| (x[(i, kept[k])] - means[k]) / sds[k]);
        (Standardizer { p, kept, means, sds }, z)
    }

    pub fn kept(&self) -> usize {
        self.kept.len()
    }

    pub fn dropped(&self) -> Vec<usize> {
        let mut keep = vec![false; self.p];
        for &j in &self.kept {
            keep[j] = true;
        }
        (0..self.p).filter(|&j| !keep[j]).collect()
    }

    /// Maps `(alpha~, beta~)` on the standardized scale back to the
    /// original feature scale.
    pub fn to_original(&self, intercept: f64, beta: &DVector<f64>) -> RegressionDraw {
        let mut coef = DVector::zeros(self.p);
        let mut alpha = intercept;
        for (k, &j) in self.kept.iter().enumerate() {
            let b = beta[k] / self.sds[k];
            coef[j] = b;
            alpha -= b * self.means[k];
        }
        RegressionDraw::new(alpha, coef)
    }
}

/// Mean and population standard deviation.
pub(crate) fn mean_sd(y: &DVector<f64>) -> (f64, f64) {
    let m = y.len() as f64;
    let mean = y.sum() / m;
    let var = y.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / m;
    (mean, var.sqrt())
}
