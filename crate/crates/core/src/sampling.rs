//! Seeded random streams and the handful of distributions the posteriors
//! are built from.
//!
//! Every stream is a ChaCha8 generator keyed by `seed` and positioned on the
//! ChaCha stream `stream_id`, so a `(seed, stream_id)` pair reproduces the
//! same draw sequence on every platform regardless of how work is scheduled.

use rand::RngCore;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Gamma, StandardNormal};
use rand::SeedableRng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Name of the generator algorithm, echoed into reports.
pub const GENERATOR: &str = "ChaCha8 (rand_chacha 0.9), 64-bit stream ids derived by splitmix64";

fn splitmix64(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// An owned, reproducible random stream.
#[derive(Clone, Debug)]
pub struct RngStream {
    seed: u64,
    stream_id: u64,
    rng: ChaCha8Rng,
}

impl RngStream {
    pub fn new(seed: u64, stream_id: u64) -> Self {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        rng.set_stream(stream_id);
        RngStream {
            seed,
            stream_id,
            rng,
        }
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }

    pub fn stream_id(&self) -> u64 {
        self.stream_id
    }

    /// A fresh stream labelled `label` below this one. Depends only on
    /// `(seed, stream_id, label)`, never on how much of `self` was consumed.
    pub fn substream(&self, label: u64) -> RngStream {
        let id = splitmix64(self.stream_id ^ splitmix64(label.wrapping_add(0x5EED)));
        RngStream::new(self.seed, id)
    }
}

impl RngCore for RngStream {
    fn next_u32(&mut self) -> u32 {
        self.rng.next_u32()
    }

    fn next_u64(&mut self) -> u64 {
        self.rng.next_u64()
    }

    fn fill_bytes(&mut self, dst: &mut [u8]) {
        self.rng.fill_bytes(dst)
    }
}

/// Student-t law `t_df(location, scale_sq)`; `scale_sq == 0` is a point mass.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct TComponent {
    pub df: f64,
    pub location: f64,
    pub scale_sq: f64,
}

impl TComponent {
    pub fn new(df: f64, location: f64, scale_sq: f64) -> Result<Self> {
        let comp = TComponent {
            df,
            location,
            scale_sq,
        };
        comp.check()?;
        Ok(comp)
    }

    fn check(&self) -> Result<()> {
        if !(self.df.is_finite() && self.location.is_finite() && self.scale_sq.is_finite()) {
            return Err(Error::InvalidParameter(format!(
                "non-finite t component {self:?}"
            )));
        }
        if self.df <= 0.0 {
            return Err(Error::InvalidParameter(format!("df must be positive, got {}", self.df)));
        }
        if self.scale_sq < 0.0 {
            return Err(Error::InvalidParameter(format!(
                "scale_sq must be non-negative, got {}",
                self.scale_sq
            )));
        }
        Ok(())
    }

    pub fn scale(&self) -> f64 {
        self.scale_sq.sqrt()
    }

    /// Variance `df/(df-2) * scale_sq`, infinite for `df <= 2`.
    pub fn variance(&self) -> f64 {
        if self.scale_sq == 0.0 {
            0.0
        } else if self.df > 2.0 {
            self.df / (self.df - 2.0) * self.scale_sq
        } else {
            f64::INFINITY
        }
    }
}

/// Draws `t_df(0, 1)` variates as `Z / sqrt(W)` with `W ~ Gamma(df/2, rate df/2)`.
struct StandardT {
    mixing: Gamma<f64>,
}

impl StandardT {
    fn new(df: f64) -> Result<Self> {
        let mixing = Gamma::new(df / 2.0, 2.0 / df)
            .map_err(|e| Error::InvalidParameter(format!("t mixing gamma: {e}")))?;
        Ok(StandardT { mixing })
    }

    fn draw(&self, rng: &mut RngStream) -> f64 {
        let z: f64 = StandardNormal.sample(rng);
        let w = self.mixing.sample(rng);
        z / w.sqrt()
    }
}

/// A sampler bound to one component, for callers that draw one value at a time.
pub struct TSampler {
    comp: TComponent,
    scale: f64,
    standard: Option<StandardT>,
}

impl TSampler {
    pub fn new(comp: TComponent) -> Result<Self> {
        comp.check()?;
        let standard = if comp.scale_sq == 0.0 {
            None
        } else {
            Some(StandardT::new(comp.df)?)
        };
        Ok(TSampler {
            comp,
            scale: comp.scale(),
            standard,
        })
    }

    pub fn draw(&self, rng: &mut RngStream) -> f64 {
        match &self.standard {
            None => self.comp.location,
            Some(t) => self.comp.location + self.scale * t.draw(rng),
        }
    }
}

pub fn sample_student_t(comp: TComponent, count: usize, rng: &mut RngStream) -> Result<Vec<f64>> {
    if count == 0 {
        return Err(Error::InvalidParameter("count must be at least 1".into()));
    }
    let sampler = TSampler::new(comp)?;
    Ok((0..count).map(|_| sampler.draw(rng)).collect())
}

/// Draws from the law of `A + B` with `A ~ a`, `B ~ b` independent.
pub fn sample_convolution(
    a: TComponent,
    b: TComponent,
    count: usize,
    rng: &mut RngStream,
) -> Result<Vec<f64>> {
    if count == 0 {
        return Err(Error::InvalidParameter("count must be at least 1".into()));
    }
    let sa = TSampler::new(a)?;
    let sb = TSampler::new(b)?;
    Ok((0..count).map(|_| sa.draw(rng) + sb.draw(rng)).collect())
}

/// Type-7 sample quantile: linear interpolation between the order statistics
/// around `h = (len - 1) * q`.
pub fn sample_quantile(samples: &[f64], q: f64) -> Result<f64> {
    let mut sorted = samples.to_vec();
    sort_floats(&mut sorted);
    quantile_sorted(&sorted, q)
}

pub(crate) fn sort_floats(v: &mut [f64]) {
    v.sort_unstable_by(|a, b| a.total_cmp(b));
}

/// As [`sample_quantile`] for input already sorted ascending.
pub fn quantile_sorted(sorted: &[f64], q: f64) -> Result<f64> {
    if sorted.is_empty() {
        return Err(Error::EmptyInput("sample quantile of no samples"));
    }
    if !(q > 0.0 && q < 1.0) {
        return Err(Error::InvalidParameter(format!("quantile level {q} outside (0, 1)")));
    }
    let h = (sorted.len() - 1) as f64 * q;
    let lo = h.floor() as usize;
    let hi = h.ceil() as usize;
    let frac = h - lo as f64;
    Ok(sorted[lo] + frac * (sorted[hi] - sorted[lo]))
}

pub fn sample_normal(mean: f64, variance: f64, rng: &mut RngStream) -> Result<f64> {
    if !(mean.is_finite() && variance.is_finite()) || variance < 0.0 {
        return Err(Error::InvalidParameter(format!(
            "normal({mean}, {variance}) is not a valid law"
        )));
    }
    let z: f64 = StandardNormal.sample(rng);
    Ok(mean + variance.sqrt() * z)
}

fn gamma_law(shape: f64, rate: f64) -> Result<Gamma<f64>> {
    if !(shape.is_finite() && rate.is_finite()) || shape <= 0.0 || rate <= 0.0 {
        return Err(Error::InvalidParameter(format!(
            "gamma(shape {shape}, rate {rate}) needs positive finite parameters"
        )));
    }
    Gamma::new(shape, 1.0 / rate).map_err(|e| Error::InvalidParameter(e.to_string()))
}

pub fn sample_gamma(shape: f64, rate: f64, rng: &mut RngStream) -> Result<f64> {
    Ok(gamma_law(shape, rate)?.sample(rng))
}

/// `1 / Gamma(shape, rate)`.
pub fn sample_inverse_gamma(shape: f64, rate: f64, rng: &mut RngStream) -> Result<f64> {
    Ok(1.0 / gamma_law(shape, rate)?.sample(rng))
}

pub fn standard_normal(rng: &mut RngStream) -> f64 {
    StandardNormal.sample(rng)
}
