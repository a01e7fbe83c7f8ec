//! Wasserstein-1 distance between two GEV laws.
//!
//! The default quantile form `∫₀¹ |Q₁(u) - Q₂(u)| du` is evaluated in the
//! reduced variate `y = -log(-log u)`, where `du = exp(-y - e^-y) dy` and
//! `Q(y) = μ + σ·expm1(ξy)/ξ`. Because `Q₁' - Q₂'` changes sign at most once,
//! `Q₁ - Q₂` has at most two roots; the integral is split there so the
//! quadrature never sees a kink.

use crate::error::{Error, Result};
use crate::gev::{cdf, quantile_from_reduced, survival, GevParams};
use crate::quad::{integrate_scalar, QuadOptions};

const Y_FLOOR: f64 = -6.7;
const Y_CEIL: f64 = 700.0;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum W1Method {
    #[default]
    Quantile,
    Cdf,
}

#[derive(Debug, Clone, Copy)]
pub struct W1Request {
    pub first: GevParams,
    pub second: GevParams,
    pub method: W1Method,
    /// Absolute and relative quadrature tolerance.
    pub tolerance: f64,
}

impl W1Request {
    pub fn new(first: GevParams, second: GevParams) -> Self {
        Self {
            first,
            second,
            method: W1Method::Quantile,
            tolerance: 1e-10,
        }
    }

    pub fn method(mut self, method: W1Method) -> Self {
        self.method = method;
        self
    }
}

/// `W₁` with the default quantile method.
pub fn w1(first: &GevParams, second: &GevParams) -> Result<f64> {
    wasserstein1(&W1Request::new(*first, *second))
}

pub fn wasserstein1(req: &W1Request) -> Result<f64> {
    for p in [&req.first, &req.second] {
        if p.xi() >= 1.0 {
            return Err(Error::InfiniteMoment { xi: p.xi() });
        }
    }
    if !(req.tolerance > 0.0) {
        return Err(Error::InvalidParameter(format!(
            "tolerance must be positive, got {}",
            req.tolerance
        )));
    }
    if req.first == req.second {
        return Ok(0.0);
    }
    let opts = QuadOptions::with_tolerances(req.tolerance, req.tolerance);
    match req.method {
        W1Method::Quantile => quantile_form(&req.first, &req.second, &opts),
        W1Method::Cdf => cdf_form(&req.first, &req.second, &opts),
    }
}

fn gap(y: f64, a: &GevParams, b: &GevParams) -> f64 {
    quantile_from_reduced(y, a) - quantile_from_reduced(y, b)
}

/// Roots of `Q_a - Q_b` in `[Y_FLOOR, Y_CEIL]`, ascending.
fn crossings(a: &GevParams, b: &GevParams) -> Vec<f64> {
    let (xa, xb) = (a.effective_xi(), b.effective_xi());
    let mut cuts = vec![Y_FLOOR];
    if xa != xb {
        // stationary point of the gap: σa e^(ξa y) = σb e^(ξb y)
        let ys = (b.sigma() / a.sigma()).ln() / (xa - xb);
        if ys > Y_FLOOR && ys < Y_CEIL {
            cuts.push(ys);
        }
    }
    cuts.push(Y_CEIL);

    let mut roots = Vec::new();
    for w in cuts.windows(2) {
        let (mut lo, mut hi) = (w[0], w[1]);
        let (glo, ghi) = (gap(lo, a, b), gap(hi, a, b));
        if !(glo.is_finite() && ghi.is_finite()) || glo * ghi > 0.0 || glo == 0.0 {
            continue;
        }
        for _ in 0..200 {
            let mid = 0.5 * (lo + hi);
            if mid <= lo || mid >= hi {
                break;
            }
            if (gap(mid, a, b) > 0.0) == (glo > 0.0) {
                lo = mid;
            } else {
                hi = mid;
            }
        }
        roots.push(0.5 * (lo + hi));
    }
    roots
}

fn quantile_form(a: &GevParams, b: &GevParams, opts: &QuadOptions) -> Result<f64> {
    let integrand = |y: f64| {
        let wt = (-y - (-y).exp()).exp();
        if wt == 0.0 {
            return 0.0;
        }
        gap(y, a, b).abs() * wt
    };
    let mut knots = vec![Y_FLOOR];
    knots.extend(crossings(a, b));
    knots.push(f64::INFINITY);
    let mut total = 0.0;
    for w in knots.windows(2) {
        total += integrate_scalar(integrand, w[0], w[1], opts)?.0;
    }
    Ok(total)
}

fn cdf_form(a: &GevParams, b: &GevParams, opts: &QuadOptions) -> Result<f64> {
    let integrand = |x: f64| {
        let (fa, fb) = (cdf(x, a), cdf(x, b));
        if fa < 0.5 && fb < 0.5 {
            (fa - fb).abs()
        } else {
            (survival(x, b) - survival(x, a)).abs()
        }
    };
    let (sa, sb) = (a.support(), b.support());
    let lower = sa.lower.min(sb.lower);
    let upper = sa.upper.max(sb.upper);

    let mut knots: Vec<f64> = crossings(a, b)
        .into_iter()
        .map(|y| quantile_from_reduced(y, a))
        .chain([a.mu(), b.mu(), sa.lower, sa.upper, sb.lower, sb.upper])
        .filter(|x| x.is_finite() && *x > lower && *x < upper)
        .collect();
    knots.push(lower);
    knots.push(upper);
    knots.sort_by(f64::total_cmp);
    knots.dedup();

    let mut total = 0.0;
    for w in knots.windows(2) {
        total += integrate_scalar(integrand, w[0], w[1], opts)?.0;
    }
    Ok(total)
}
