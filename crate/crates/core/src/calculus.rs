//! Score vector and observed information of the GEV log-density.
//!
//! With `y = log(1 + xi*z)/xi` the log-density is
//! `l = -log(sigma) - (1 + xi)*y - exp(-y)`, so every derivative is a chain
//! rule through `y`:
//!
//! ```text
//! dl/dθj        = -[θj=σ]/σ - [θj=ξ]·y + q·y_j,              q = w - 1 - ξ
//! d²l/dθj dθk   = [j=k=σ]/σ² - [j=ξ]·y_k - [k=ξ]·y_j - w·y_j·y_k + q·y_jk
//! ```
//!
//! The only delicate partials are `y_ξ` and `y_ξξ`, which are `O(1)` but
//! computed naively as differences of `O(1/ξ²)` and `O(1/ξ³)` terms. They are
//! evaluated through the ratios `φ(a)/a²` and `ψ(a)/a³` (`a = ξz`), switching
//! to their power series near `a = 0`; the `ξ → 0` limits are the series'
//! constant terms (`-z²/2` and `2z³/3`).

use nalgebra::{Matrix3, Vector3};

use crate::error::{Error, Result};
use crate::gev::{GevParams, Reduced};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Score {
    pub d_mu: f64,
    pub d_sigma: f64,
    pub d_xi: f64,
}

impl Score {
    pub fn as_vector(&self) -> Vector3<f64> {
        Vector3::new(self.d_mu, self.d_sigma, self.d_xi)
    }

    pub fn as_array(&self) -> [f64; 3] {
        [self.d_mu, self.d_sigma, self.d_xi]
    }
}

/// `-∂² log f / ∂θ²` at one point, ordered (mu, sigma, xi). Symmetric.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct InformationMatrix(Matrix3<f64>);

impl InformationMatrix {
    pub fn matrix(&self) -> &Matrix3<f64> {
        &self.0
    }

    pub fn mu_mu(&self) -> f64 {
        self.0[(0, 0)]
    }
    pub fn mu_sigma(&self) -> f64 {
        self.0[(0, 1)]
    }
    pub fn mu_xi(&self) -> f64 {
        self.0[(0, 2)]
    }
    pub fn sigma_sigma(&self) -> f64 {
        self.0[(1, 1)]
    }
    pub fn sigma_xi(&self) -> f64 {
        self.0[(1, 2)]
    }
    pub fn xi_xi(&self) -> f64 {
        self.0[(2, 2)]
    }
}

const SERIES_RADIUS: f64 = 0.1;
const SERIES_TERMS: usize = 40;

/// `φ(a)/a²` with `φ(a) = a/(1+a) - log(1+a)`.
fn phi_ratio(r: &Reduced) -> f64 {
    let a = r.a;
    if a.abs() < SERIES_RADIUS {
        // sum_{k>=2} (-1)^(k+1) (k-1)/k a^(k-2), Horner from the top
        let mut acc = 0.0;
        for k in (2..SERIES_TERMS + 2).rev() {
            let kf = k as f64;
            let sign = if k % 2 == 0 { -1.0 } else { 1.0 };
            acc = acc * a + sign * (kf - 1.0) / kf;
        }
        acc
    } else {
        // log(1+a) = xi*y exactly as built by `Reduced`
        (a / r.t - r.xi * r.y) / (a * a)
    }
}

/// `ψ(a)/a³` with `ψ(a) = -a²/(1+a)² - 2a/(1+a) + 2 log(1+a)`.
fn psi_ratio(r: &Reduced) -> f64 {
    let a = r.a;
    if a.abs() < SERIES_RADIUS {
        // sum_{k>=3} (-1)^(k+1) (k-1)(k-2)/k a^(k-3)
        let mut acc = 0.0;
        for k in (3..SERIES_TERMS + 3).rev() {
            let kf = k as f64;
            let sign = if k % 2 == 0 { -1.0 } else { 1.0 };
            acc = acc * a + sign * (kf - 1.0) * (kf - 2.0) / kf;
        }
        acc
    } else {
        let u = a / r.t;
        (-u * u - 2.0 * u + 2.0 * r.xi * r.y) / (a * a * a)
    }
}

/// First partials of `y` with respect to (mu, sigma, xi).
fn y_gradient(r: &Reduced, sigma: f64) -> [f64; 3] {
    let st = sigma * r.t;
    [-1.0 / st, -r.z / st, r.z * r.z * phi_ratio(r)]
}

pub(crate) fn score_at(r: &Reduced, sigma: f64) -> [f64; 3] {
    let q = r.w - 1.0 - r.xi;
    let yg = y_gradient(r, sigma);
    [q * yg[0], -1.0 / sigma + q * yg[1], -r.y + q * yg[2]]
}

pub(crate) fn hessian_at(r: &Reduced, sigma: f64) -> Matrix3<f64> {
    let q = r.w - 1.0 - r.xi;
    let yg = y_gradient(r, sigma);
    let t2 = r.t * r.t;
    let s2t2 = sigma * sigma * t2;
    let z = r.z;

    let mut ydd = Matrix3::zeros();
    ydd[(0, 0)] = -r.xi / s2t2;
    ydd[(0, 1)] = 1.0 / s2t2;
    ydd[(1, 1)] = z * (1.0 + r.t) / s2t2;
    ydd[(0, 2)] = z / (sigma * t2);
    ydd[(1, 2)] = z * z / (sigma * t2);
    ydd[(2, 2)] = z * z * z * psi_ratio(r);

    let mut h = Matrix3::zeros();
    for j in 0..3 {
        for k in j..3 {
            let mut v = -r.w * yg[j] * yg[k] + q * ydd[(j, k)];
            if j == 1 && k == 1 {
                v += 1.0 / (sigma * sigma);
            }
            if j == 2 {
                v -= yg[k];
            }
            if k == 2 {
                v -= yg[j];
            }
            h[(j, k)] = v;
            h[(k, j)] = v;
        }
    }
    h
}

fn interior(x: f64, params: &GevParams) -> Result<Reduced> {
    Reduced::from_x(x, params).ok_or_else(|| {
        let s = params.support();
        Error::OutOfSupport {
            x,
            lower: s.lower,
            upper: s.upper,
        }
    })
}

/// Gradient of `log f(x; θ)` in (mu, sigma, xi). `x` must be strictly inside the support.
pub fn score(x: f64, params: &GevParams) -> Result<Score> {
    let r = interior(x, params)?;
    let [d_mu, d_sigma, d_xi] = score_at(&r, params.sigma());
    Ok(Score {
        d_mu,
        d_sigma,
        d_xi,
    })
}

pub fn information(x: f64, params: &GevParams) -> Result<InformationMatrix> {
    let r = interior(x, params)?;
    Ok(InformationMatrix(-hessian_at(&r, params.sigma())))
}
