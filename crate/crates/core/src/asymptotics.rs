//! Sandwich covariance `J⁻¹ K J⁻¹` of the MDPD estimator and its influence
//! function.
//!
//! ```text
//! U = ∫ S f^(1+α)        J = ∫ S Sᵀ f^(1+α)        K = ∫ S Sᵀ f^(1+2α) - U Uᵀ
//! IF(x) = J⁻¹ (S(x) f(x)^α - U)
//! ```
//!
//! All integrals are taken in the Gumbel-reduced variate `y`, where
//! `f^(1+c) dx = σ^-c exp(-(1 + c(1+ξ)) y - (1+c) e^-y) dy` on the whole real
//! line. This is the probability substitution `u = F(x)` followed by
//! `y = -log(-log u)`: finite support endpoints move to `y = ±∞` and the score
//! is evaluated from `y` directly, so nothing is lost to cancellation in
//! `1 + ξz` near an endpoint.

use nalgebra::{Matrix3, Vector3, LU, U3};

use crate::calculus::score_at;
use crate::error::{Error, Result};
use crate::gev::{reduced_from_probability, GevParams, Reduced};
use crate::mdpd::FitResult;
use crate::quad::{integrate, QuadOptions};

/// Below this `y` the weight `exp(-e^-y)` is zero in double precision.
const Y_FLOOR: f64 = -6.7;

#[derive(Debug, Clone, Copy)]
pub struct AsymptoticOptions {
    pub quad: QuadOptions,
    /// Largest accepted 2-norm condition number of `J`.
    pub max_condition: f64,
}

impl Default for AsymptoticOptions {
    fn default() -> Self {
        Self {
            quad: QuadOptions::with_tolerances(1e-11, 1e-11),
            max_condition: 1e12,
        }
    }
}

#[derive(Debug, Clone)]
pub struct SandwichCovariance {
    pub params: GevParams,
    pub alpha: f64,
    pub u: Vector3<f64>,
    pub j: Matrix3<f64>,
    pub k: Matrix3<f64>,
    pub cov: Matrix3<f64>,
    pub j_condition: f64,
    j_lu: LU<f64, U3, U3>,
}

/// Shape bound of the asymptotic-normality region: `ξ > -(1+α)/(2+α)`.
pub fn shape_bound(alpha: f64) -> f64 {
    -(1.0 + alpha) / (2.0 + alpha)
}

pub fn compute_ujk(params: &GevParams, alpha: f64) -> Result<SandwichCovariance> {
    compute_ujk_with(params, alpha, &AsymptoticOptions::default())
}

pub fn compute_ujk_with(
    params: &GevParams,
    alpha: f64,
    opts: &AsymptoticOptions,
) -> Result<SandwichCovariance> {
    if !(alpha >= 0.0 && alpha.is_finite()) {
        return Err(Error::InvalidParameter(format!("alpha must be >= 0, got {alpha}")));
    }
    let bound = shape_bound(alpha);
    if !(params.xi() > bound) {
        return Err(Error::IntegrabilityViolation {
            xi: params.xi(),
            alpha,
            bound,
        });
    }

    let sigma = params.sigma();
    let xi = params.xi();
    let decay1 = 1.0 + alpha * (1.0 + xi);
    let decay2 = 1.0 + 2.0 * alpha * (1.0 + xi);
    let scale1 = sigma.powf(-alpha);
    let scale2 = sigma.powf(-2.0 * alpha);

    // [U (3), J upper (6), K1 upper (6)]
    let integrand = |y: f64| -> [f64; 15] {
        let mut out = [0.0; 15];
        let ew = (-y).exp();
        let w1 = scale1 * (-decay1 * y - (1.0 + alpha) * ew).exp();
        let w2 = scale2 * (-decay2 * y - (1.0 + 2.0 * alpha) * ew).exp();
        if w1 == 0.0 && w2 == 0.0 {
            return out;
        }
        let r = Reduced::from_y(y, params);
        let s = score_at(&r, sigma);
        let mut idx = 3;
        for a in 0..3 {
            out[a] = s[a] * w1;
            for b in a..3 {
                let ss = s[a] * s[b];
                out[idx] = ss * w1;
                out[idx + 6] = ss * w2;
                idx += 1;
            }
        }
        // products of an overflowing score with an underflowed weight
        for v in out.iter_mut() {
            if !v.is_finite() {
                *v = 0.0;
            }
        }
        out
    };
    let res = integrate(integrand, Y_FLOOR, f64::INFINITY, &opts.quad)?;
    let v = res.value;

    let u = Vector3::new(v[0], v[1], v[2]);
    let mut j = Matrix3::zeros();
    let mut k1 = Matrix3::zeros();
    let mut idx = 3;
    for a in 0..3 {
        for b in a..3 {
            j[(a, b)] = v[idx];
            j[(b, a)] = v[idx];
            k1[(a, b)] = v[idx + 6];
            k1[(b, a)] = v[idx + 6];
            idx += 1;
        }
    }
    // the expected score vanishes exactly under the model
    let k = if alpha == 0.0 { k1 } else { k1 - u * u.transpose() };

    let sv = j.singular_values();
    let j_condition = sv.max() / sv.min();
    if !(j_condition <= opts.max_condition) {
        return Err(Error::SingularJ {
            condition: j_condition,
        });
    }
    let j_lu = j.lu();
    let a = j_lu
        .solve(&k)
        .ok_or(Error::SingularJ { condition: f64::INFINITY })?;
    let b = j_lu
        .solve(&a.transpose())
        .ok_or(Error::SingularJ { condition: f64::INFINITY })?;
    let cov = 0.5 * (b + b.transpose());

    Ok(SandwichCovariance {
        params: *params,
        alpha,
        u,
        j,
        k,
        cov,
        j_condition,
        j_lu,
    })
}

impl SandwichCovariance {
    /// Asymptotic standard errors `sqrt(diag(cov)/n)`.
    pub fn standard_errors(&self, n: usize) -> [f64; 3] {
        let nf = n as f64;
        [
            (self.cov[(0, 0)] / nf).sqrt(),
            (self.cov[(1, 1)] / nf).sqrt(),
            (self.cov[(2, 2)] / nf).sqrt(),
        ]
    }

    /// Influence at an observation `x` strictly inside the support.
    pub fn influence(&self, x: f64) -> Result<[f64; 3]> {
        let r = Reduced::from_x(x, &self.params).ok_or_else(|| {
            let s = self.params.support();
            Error::OutOfSupport {
                x,
                lower: s.lower,
                upper: s.upper,
            }
        })?;
        Ok(self.influence_reduced(&r))
    }

    /// Influence at the `p`-quantile, computed from the reduced variate so it
    /// stays accurate as `p` approaches 0 or 1.
    pub fn influence_at_quantile(&self, p: f64) -> Result<[f64; 3]> {
        if !(p > 0.0 && p < 1.0) {
            return Err(Error::InvalidProbability(p));
        }
        let r = Reduced::from_y(reduced_from_probability(p), &self.params);
        Ok(self.influence_reduced(&r))
    }

    fn influence_reduced(&self, r: &Reduced) -> [f64; 3] {
        let sigma = self.params.sigma();
        let s = score_at(r, sigma);
        let fa = if self.alpha == 0.0 {
            1.0
        } else {
            (self.alpha * r.log_pdf(sigma)).exp()
        };
        let rhs = Vector3::new(s[0] * fa, s[1] * fa, s[2] * fa) - self.u;
        let v = self.j_lu.solve(&rhs).unwrap_or_else(|| Vector3::repeat(f64::NAN));
        [v[0], v[1], v[2]]
    }
}

/// Plug-in standard errors at the fitted parameters for a sample of size `n`.
pub fn standard_errors(fit: &FitResult, n: usize) -> Result<[f64; 3]> {
    if !fit.converged {
        return Err(Error::NonConvergence(
            "standard errors need a converged fit".into(),
        ));
    }
    if n == 0 {
        return Err(Error::InsufficientData("n must be positive".into()));
    }
    Ok(compute_ujk(&fit.params, fit.alpha)?.standard_errors(n))
}

/// Fill `covariance` (of the estimator, i.e. `cov/n`) and `std_errors`.
pub fn attach_standard_errors(fit: &mut FitResult, n: usize) -> Result<()> {
    if !fit.converged {
        return Err(Error::NonConvergence(
            "standard errors need a converged fit".into(),
        ));
    }
    if n == 0 {
        return Err(Error::InsufficientData("n must be positive".into()));
    }
    let sc = compute_ujk(&fit.params, fit.alpha)?;
    fit.covariance = Some(sc.cov / n as f64);
    fit.std_errors = Some(sc.standard_errors(n));
    Ok(())
}

/// Influence function at `x`.
pub fn influence(x: f64, params: &GevParams, alpha: f64) -> Result<[f64; 3]> {
    compute_ujk(params, alpha)?.influence(x)
}

pub fn influence_at_quantile(p: f64, params: &GevParams, alpha: f64) -> Result<[f64; 3]> {
    compute_ujk(params, alpha)?.influence_at_quantile(p)
}

#[derive(Debug, Clone)]
pub struct InfluenceCurve {
    pub levels: Vec<f64>,
    pub values: Vec<[f64; 3]>,
}

impl InfluenceCurve {
    pub fn compute(params: &GevParams, alpha: f64, levels: &[f64]) -> Result<Self> {
        let sc = compute_ujk(params, alpha)?;
        let values = levels
            .iter()
            .map(|&p| sc.influence_at_quantile(p))
            .collect::<Result<Vec<_>>>()?;
        Ok(Self {
            levels: levels.to_vec(),
            values,
        })
    }

    /// Largest absolute component over the points whose level lies in `[lo, hi]`.
    pub fn sup_norm_within(&self, lo: f64, hi: f64) -> f64 {
        self.levels
            .iter()
            .zip(&self.values)
            .filter(|(p, _)| **p >= lo && **p <= hi)
            .flat_map(|(_, v)| v.iter().map(|c| c.abs()))
            .fold(0.0, f64::max)
    }
}

/// Quantile levels from `delta` to `1 - delta`: `points_per_decade` geometric
/// steps per decade towards each endpoint, evenly spaced on `[0.1, 0.9]`.
pub fn quantile_grid(delta: f64, points_per_decade: usize) -> Result<Vec<f64>> {
    if !(delta > 0.0 && delta < 0.1) || points_per_decade == 0 {
        return Err(Error::InvalidParameter(format!(
            "need 0 < delta < 0.1 and a positive density, got {delta}, {points_per_decade}"
        )));
    }
    let decades = -delta.log10();
    let steps = ((decades - 1.0) * points_per_decade as f64).ceil() as usize;
    let mut tail = Vec::with_capacity(steps + 1);
    for i in 0..=steps {
        let e = -1.0 - (decades - 1.0) * i as f64 / steps.max(1) as f64;
        tail.push(10f64.powf(e));
    }
    let mut grid: Vec<f64> = tail.iter().rev().copied().collect();
    for i in 1..8 {
        grid.push(0.1 * (1 + i) as f64);
    }
    grid.extend(tail.iter().map(|d| 1.0 - d));
    grid.sort_by(f64::total_cmp);
    grid.dedup();
    Ok(grid)
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    fn p(mu: f64, sigma: f64, xi: f64) -> GevParams {
        GevParams::new(mu, sigma, xi).unwrap()
    }

    fn assert_mat(got: &Matrix3<f64>, want: [[f64; 3]; 3], tol: f64) {
        for a in 0..3 {
            for b in 0..3 {
                assert!(
                    (got[(a, b)] - want[a][b]).abs() <= tol * want[a][b].abs().max(1.0),
                    "({a},{b}): {} vs {}",
                    got[(a, b)],
                    want[a][b]
                );
            }
        }
    }

    // Reference values from 30-digit integration of the symbolic score in x.
    #[test]
    fn matches_high_precision_alpha_01() {
        let sc = compute_ujk(&p(0.0, 1.0, 0.1), 0.1).unwrap();
        assert!(sc.u[0].abs() < 1e-10);
        assert_relative_eq!(sc.u[1], -0.077_480_560_490_822_4, max_relative = 1e-8);
        assert_relative_eq!(sc.u[2], -0.039_114_081_790_748_4, max_relative = 1e-8);
        assert_mat(
            &sc.j,
            [
                [0.862_728_564_359_218, -0.468_801_293_398_431, 0.236_697_349_868_622],
                [-0.468_801_293_398_431, 1.295_142_341_921_23, -0.035_852_431_991_778_6],
                [0.236_697_349_868_622, -0.035_852_431_991_778_6, 1.148_962_790_520_11],
            ],
            1e-8,
        );
        assert_mat(
            &sc.k,
            [
                [0.679_429_284_615_986, -0.347_544_300_146_413, 0.126_866_844_661_505],
                [-0.347_544_300_146_413, 0.954_585_813_366_04, -0.049_803_124_509_144_4],
                [0.126_866_844_661_505, -0.049_803_124_509_144_4, 0.697_736_194_278_948],
            ],
            1e-8,
        );
        assert_mat(
            &sc.cov,
            [
                [1.273_023_332_710_33, 0.455_954_456_297_397, -0.284_035_500_052_531],
                [0.455_954_456_297_397, 0.731_927_150_054_815, -0.102_784_719_183_762],
                [-0.284_035_500_052_531, -0.102_784_719_183_762, 0.590_277_580_391_982],
            ],
            1e-7,
        );
    }

    #[test]
    fn matches_high_precision_fisher_negative_shape() {
        let sc = compute_ujk(&p(0.0, 1.0, -0.2), 0.0).unwrap();
        let fisher = [
            [0.953_083_039_240_203, 0.108_496_341_299_801, 0.705_433_971_965_208],
            [0.108_496_341_299_801, 2.257_887_431_992_94, 1.534_590_109_834_02],
            [0.705_433_971_965_208, 1.534_590_109_834_02, 4.490_731_819_838_76],
        ];
        assert_mat(&sc.j, fisher, 1e-8);
        assert_mat(&sc.k, fisher, 1e-8);
        assert_mat(
            &sc.cov,
            [
                [1.201_734_206_403_81, 0.091_902_118_521_310_1, -0.220_181_533_053_78],
                [0.091_902_118_521_310_1, 0.583_901_970_844_202, -0.213_969_817_085_428],
                [-0.220_181_533_053_78, -0.213_969_817_085_428, 0.330_387_018_873_704],
            ],
            1e-7,
        );
    }

    #[test]
    fn matches_high_precision_scaled() {
        let sc = compute_ujk(&p(0.5, 2.0, 0.3), 0.25).unwrap();
        assert_relative_eq!(sc.u[1], -0.055_933_583_355_262_4, max_relative = 1e-8);
        assert_relative_eq!(sc.u[2], -0.040_758_408_623_564_8, max_relative = 1e-8);
        assert_mat(
            &sc.cov,
            [
                [5.221_778_591_106_2, 2.754_810_947_506_64, -0.671_138_620_207_241],
                [2.754_810_947_506_64, 3.978_593_988_395_35, 0.116_051_337_838_503],
                [-0.671_138_620_207_241, 0.116_051_337_838_503, 0.989_393_125_743_858],
            ],
            1e-7,
        );
    }

    #[test]
    fn region_is_enforced() {
        assert!(matches!(
            compute_ujk(&p(0.0, 1.0, -0.5), 0.0),
            Err(Error::IntegrabilityViolation { .. })
        ));
        assert!(compute_ujk(&p(0.0, 1.0, -0.55), 0.5).is_ok());
    }

    #[test]
    fn influence_reconstructs_weighted_score() {
        let th = p(0.0, 1.0, 0.2);
        let sc = compute_ujk(&th, 0.3).unwrap();
        let x = 1.7;
        let inf = Vector3::from(sc.influence(x).unwrap());
        let s = crate::calculus::score(x, &th).unwrap().as_vector();
        let fa = crate::gev::pdf(x, &th).powf(0.3);
        let lhs = sc.j * inf + sc.u;
        assert!((lhs - s * fa).abs().max() < 1e-8);
    }

    #[test]
    fn quadrupling_n_halves_errors() {
        let sc = compute_ujk(&p(0.0, 1.0, 0.1), 0.1).unwrap();
        let a = sc.standard_errors(100);
        let b = sc.standard_errors(400);
        for i in 0..3 {
            assert_relative_eq!(a[i], 2.0 * b[i], max_relative = 1e-14);
        }
    }

    #[test]
    fn grid_shape() {
        let g = quantile_grid(1e-8, 4).unwrap();
        assert_relative_eq!(g[0], 1e-8, max_relative = 1e-12);
        assert_relative_eq!(*g.last().unwrap(), 1.0 - 1e-8, max_relative = 1e-15);
        assert!(g.windows(2).all(|w| w[0] < w[1]));
        assert!(g.contains(&0.5));
    }
}
