//! The three-parameter generalized extreme-value (GEV) distribution.
//!
//! All evaluations go through the Gumbel-reduced variate
//! `y = log(1 + xi*z) / xi` (with `z = (x - mu)/sigma`), in which
//!
//! ```text
//! log f = -log(sigma) - (1 + xi) * y - exp(-y)
//! F     = exp(-exp(-y))
//! ```
//!
//! This form is smooth in `xi` and reduces to the Gumbel case `y = z` without
//! any `1/xi` blow-up. For `|xi| < GUMBEL_THRESHOLD` the Gumbel closed forms are
//! used directly.
//!
//! Finite support endpoints are treated as outside the support: the density
//! there is reported as 0 and the score is undefined.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Shapes with `|xi|` below this value are evaluated with the `xi = 0` formulas.
pub const GUMBEL_THRESHOLD: f64 = 1e-9;

/// Location, scale and shape of a GEV law. `sigma > 0` always holds.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "RawParams")]
pub struct GevParams {
    mu: f64,
    sigma: f64,
    xi: f64,
}

#[derive(Deserialize)]
struct RawParams {
    mu: f64,
    sigma: f64,
    xi: f64,
}

impl TryFrom<RawParams> for GevParams {
    type Error = Error;

    fn try_from(raw: RawParams) -> Result<Self> {
        GevParams::new(raw.mu, raw.sigma, raw.xi)
    }
}

impl GevParams {
    pub fn new(mu: f64, sigma: f64, xi: f64) -> Result<Self> {
        if !(mu.is_finite() && sigma.is_finite() && xi.is_finite()) {
            return Err(Error::InvalidParameter(format!(
                "non-finite GEV parameters ({mu}, {sigma}, {xi})"
            )));
        }
        if sigma <= 0.0 {
            return Err(Error::InvalidParameter(format!(
                "scale must be positive, got {sigma}"
            )));
        }
        Ok(Self { mu, sigma, xi })
    }

    /// The standard law GEV(0, 1, xi).
    pub fn standard(xi: f64) -> Result<Self> {
        Self::new(0.0, 1.0, xi)
    }

    pub fn mu(&self) -> f64 {
        self.mu
    }

    pub fn sigma(&self) -> f64 {
        self.sigma
    }

    pub fn xi(&self) -> f64 {
        self.xi
    }

    pub fn as_array(&self) -> [f64; 3] {
        [self.mu, self.sigma, self.xi]
    }

    /// Shape as seen by the formulas: exactly zero inside the Gumbel band.
    pub(crate) fn effective_xi(&self) -> f64 {
        if self.xi.abs() < GUMBEL_THRESHOLD {
            0.0
        } else {
            self.xi
        }
    }

    pub fn support(&self) -> Support {
        let xi = self.effective_xi();
        let endpoint = self.mu - self.sigma / xi;
        if xi > 0.0 {
            Support {
                lower: endpoint,
                upper: f64::INFINITY,
            }
        } else if xi < 0.0 {
            Support {
                lower: f64::NEG_INFINITY,
                upper: endpoint,
            }
        } else {
            Support {
                lower: f64::NEG_INFINITY,
                upper: f64::INFINITY,
            }
        }
    }

    /// Same shape, transformed by `x -> scale * x + shift`.
    pub fn affine(&self, scale: f64, shift: f64) -> Result<Self> {
        Self::new(scale * self.mu + shift, scale * self.sigma, self.xi)
    }
}

impl std::fmt::Display for GevParams {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(
            f,
            "GEV(mu={}, sigma={}, xi={})",
            self.mu, self.sigma, self.xi
        )
    }
}

/// Closure of the support; either endpoint may be infinite.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Support {
    pub lower: f64,
    pub upper: f64,
}

impl Support {
    /// Strict interior membership (finite endpoints excluded).
    pub fn contains(&self, x: f64) -> bool {
        x > self.lower && x < self.upper
    }
}

/// Shared intermediates of every GEV formula at one point.
///
/// `z = (x-mu)/sigma`, `a = xi*z`, `t = 1 + a`, `y = log(t)/xi`, `w = exp(-y)`.
#[derive(Debug, Clone, Copy)]
pub(crate) struct Reduced {
    pub xi: f64,
    pub z: f64,
    pub a: f64,
    pub t: f64,
    pub y: f64,
    pub w: f64,
}

impl Reduced {
    /// `None` when `x` is not strictly inside the support.
    pub fn from_x(x: f64, params: &GevParams) -> Option<Self> {
        let xi = params.effective_xi();
        let z = (x - params.mu) / params.sigma;
        if !z.is_finite() {
            return None;
        }
        if xi == 0.0 {
            return Some(Self {
                xi,
                z,
                a: 0.0,
                t: 1.0,
                y: z,
                w: (-z).exp(),
            });
        }
        let a = xi * z;
        let t = 1.0 + a;
        if t <= 0.0 || !t.is_finite() {
            return None;
        }
        let y = a.ln_1p() / xi;
        Some(Self {
            xi,
            z,
            a,
            t,
            y,
            w: (-y).exp(),
        })
    }

    /// Build from the reduced variate directly, avoiding the cancellation in
    /// `1 + xi*z` near a finite endpoint.
    pub fn from_y(y: f64, params: &GevParams) -> Self {
        let xi = params.effective_xi();
        if xi == 0.0 {
            return Self {
                xi,
                z: y,
                a: 0.0,
                t: 1.0,
                y,
                w: (-y).exp(),
            };
        }
        let a = (xi * y).exp_m1();
        Self {
            xi,
            z: a / xi,
            a,
            t: (xi * y).exp(),
            y,
            w: (-y).exp(),
        }
    }

    pub fn log_pdf(&self, sigma: f64) -> f64 {
        -sigma.ln() - (1.0 + self.xi) * self.y - self.w
    }
}

pub fn pdf(x: f64, params: &GevParams) -> f64 {
    match Reduced::from_x(x, params) {
        Some(r) => {
            let v = r.log_pdf(params.sigma).exp();
            if v.is_finite() {
                v
            } else {
                0.0
            }
        }
        None => 0.0,
    }
}

/// `log f(x)`, `-inf` outside the support.
pub fn log_pdf(x: f64, params: &GevParams) -> f64 {
    match Reduced::from_x(x, params) {
        Some(r) => {
            let v = r.log_pdf(params.sigma);
            if v.is_nan() {
                f64::NEG_INFINITY
            } else {
                v
            }
        }
        None => f64::NEG_INFINITY,
    }
}

pub fn cdf(x: f64, params: &GevParams) -> f64 {
    match Reduced::from_x(x, params) {
        Some(r) => (-r.w).exp(),
        None => {
            let support = params.support();
            if x >= support.upper {
                1.0
            } else {
                0.0
            }
        }
    }
}

/// `1 - F(x)`, accurate in the upper tail.
pub fn survival(x: f64, params: &GevParams) -> f64 {
    match Reduced::from_x(x, params) {
        Some(r) => -(-r.w).exp_m1(),
        None => {
            let support = params.support();
            if x >= support.upper {
                0.0
            } else {
                1.0
            }
        }
    }
}

/// `mu + sigma * ((-log p)^(-xi) - 1) / xi`, Gumbel limit `mu - sigma*log(-log p)`.
pub fn quantile(p: f64, params: &GevParams) -> Result<f64> {
    if !(p > 0.0 && p < 1.0) {
        return Err(Error::InvalidProbability(p));
    }
    Ok(quantile_from_reduced(reduced_from_probability(p), params))
}

/// Gumbel-reduced variate `-log(-log p)` of a probability level.
pub(crate) fn reduced_from_probability(p: f64) -> f64 {
    -(-p.ln()).ln()
}

pub(crate) fn quantile_from_reduced(y: f64, params: &GevParams) -> f64 {
    let xi = params.effective_xi();
    let z = if xi == 0.0 {
        y
    } else {
        (xi * y).exp_m1() / xi
    };
    params.mu + params.sigma * z
}

/// `n` draws by inversion from a ChaCha8 stream seeded with `seed`.
pub fn sample(n: usize, params: &GevParams, seed: u64) -> Vec<f64> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    sample_with(&mut rng, n, params)
}

pub fn sample_with<R: Rng + ?Sized>(rng: &mut R, n: usize, params: &GevParams) -> Vec<f64> {
    (0..n).map(|_| draw(rng, params)).collect()
}

pub(crate) fn draw<R: Rng + ?Sized>(rng: &mut R, params: &GevParams) -> f64 {
    let u: f64 = rng.sample(rand::distr::Open01);
    quantile_from_reduced(reduced_from_probability(u), params)
}
