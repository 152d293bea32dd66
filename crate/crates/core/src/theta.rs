//! The random-coefficient law of the isotropic autoregression.
//!
//! The coefficient `theta` has density `nc * phi(x) * (1/4 - x)^alpha` on
//! `[0, 1/4)` (or its mirror image on `(-1/4, 0]`), with `alpha > -1` and a
//! shape function `phi` that is nonnegative, bounded and nonzero at `1/4`.
//! The exponent `alpha` controls how much mass sits near the stationarity
//! boundary `1/4`, which in turn decides the memory of the aggregated field.

use crate::quad::{self, QuadratureConfig};
use crate::rng::{stream_rng, StreamKind};
use rand::distr::Open01;
use rand::Rng;
use serde::{Deserialize, Serialize};
use thiserror::Error;

/// Shape function `phi` of the coefficient density.
///
/// Restricted to constants and polynomials so that boundedness, positivity
/// and the Hölder condition needed at `alpha = 1` hold automatically.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase", deny_unknown_fields)]
pub enum PhiSpec {
    /// `phi(x) = 1`; the normalizing constant absorbs any scale.
    Constant,
    /// `phi(x) = c0 + c1 x + c2 x^2 + ...` with the listed coefficients.
    Poly { coeffs: Vec<f64> },
}

impl PhiSpec {
    pub fn eval(&self, x: f64) -> f64 {
        match self {
            PhiSpec::Constant => 1.0,
            PhiSpec::Poly { coeffs } => coeffs.iter().rev().fold(0.0, |acc, c| acc * x + c),
        }
    }
}

/// Which side of zero the law lives on.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum SupportSign {
    /// Support `[0, 1/4)`; density mass near `+1/4` drives the spectral
    /// behavior at frequency 0.
    Positive,
    /// Support `(-1/4, 0]`, obtained by reflecting the positive density;
    /// mass near `-1/4` drives the behavior at the `(pi, pi)` corner.
    Mirrored,
}

#[derive(Debug, Error)]
pub enum ThetaLawError {
    #[error("alpha must exceed -1 for an integrable density, got {0}")]
    InvalidExponent(f64),
    #[error("invalid shape function: {0}")]
    InvalidShape(String),
    #[error("normalization quadrature failed to converge (estimate {estimate}, error {error})")]
    Normalization { estimate: f64, error: f64 },
}

const CDF_KNOTS: usize = 4096;

/// Immutable, thread-safe description of the coefficient law.
///
/// Construction normalizes the density and tabulates its inverse CDF once;
/// evaluation and sampling afterwards are cheap and allocation-free.
#[derive(Debug, Clone)]
pub struct ThetaLaw {
    alpha: f64,
    phi: PhiSpec,
    support_sign: SupportSign,
    norm_constant: f64,
    /// CDF of `t = (1/4 - |theta|)^(alpha+1)` on uniform knots over `[0, t_max]`.
    /// In this coordinate the transformed density is bounded, so linear
    /// interpolation of the inverse is accurate for any `alpha > -1`.
    cdf: Vec<f64>,
    t_max: f64,
}

impl ThetaLaw {
    /// Builds a law from its parameters, computing the normalizing constant
    /// and the sampling table.
    ///
    /// The mass integral is taken in `z = 1/4 - x`, where the integrand is
    /// `phi(1/4 - z) z^alpha`; for `-1 < alpha < 0` a further power
    /// substitution `t = z^(alpha+1)` removes the endpoint singularity before
    /// quadrature.
    pub fn new(
        alpha: f64,
        phi: PhiSpec,
        support_sign: SupportSign,
        quad_cfg: &QuadratureConfig,
    ) -> Result<Self, ThetaLawError> {
        if !(alpha > -1.0) || !alpha.is_finite() {
            return Err(ThetaLawError::InvalidExponent(alpha));
        }
        validate_phi(&phi)?;

        let mass = raw_mass(alpha, &phi, quad_cfg)?;
        if !(mass > 0.0) || !mass.is_finite() {
            return Err(ThetaLawError::InvalidShape(format!(
                "density mass is not positive and finite (got {mass})"
            )));
        }
        let norm_constant = 1.0 / mass;

        let mut law = Self {
            alpha,
            phi,
            support_sign,
            norm_constant,
            cdf: Vec::new(),
            t_max: 0.25f64.powf(alpha + 1.0),
        };
        law.tabulate_cdf();
        Ok(law)
    }

    pub fn alpha(&self) -> f64 {
        self.alpha
    }

    pub fn phi(&self) -> &PhiSpec {
        &self.phi
    }

    pub fn support_sign(&self) -> SupportSign {
        self.support_sign
    }

    pub fn norm_constant(&self) -> f64 {
        self.norm_constant
    }

    /// The normalized shape value at the endpoint, `nc * phi(1/4)`.
    /// This is the constant that enters the low-frequency asymptotics.
    pub fn effective_phi_at_endpoint(&self) -> f64 {
        self.norm_constant * self.phi.eval(0.25)
    }

    /// Density at `x`; zero outside the support. Mirrored laws evaluate the
    /// positive density at `|x|`.
    pub fn density(&self, x: f64) -> f64 {
        let inside = match self.support_sign {
            SupportSign::Positive => (0.0..0.25).contains(&x),
            SupportSign::Mirrored => x > -0.25 && x <= 0.0,
        };
        if !inside {
            return 0.0;
        }
        let a = x.abs();
        self.norm_constant * self.phi.eval(a) * (0.25 - a).powf(self.alpha)
    }

    /// CDF of `theta` at `x`, from the tabulated transform.
    pub fn cdf(&self, x: f64) -> f64 {
        match self.support_sign {
            SupportSign::Positive => {
                if x < 0.0 {
                    0.0
                } else if x >= 0.25 {
                    1.0
                } else {
                    // P(theta <= x) = P(z >= 1/4 - x) = 1 - G((1/4 - x)^(a+1))
                    1.0 - self.transform_cdf((0.25 - x).powf(self.alpha + 1.0))
                }
            }
            SupportSign::Mirrored => {
                if x >= 0.0 {
                    1.0
                } else if x <= -0.25 {
                    0.0
                } else {
                    // theta = -theta_pos: P(theta <= x) = P(theta_pos >= -x)
                    self.transform_cdf((0.25 + x).powf(self.alpha + 1.0))
                }
            }
        }
    }

    /// `count` independent draws, fully determined by `seed`.
    pub fn sample(&self, seed: u64, count: usize) -> Vec<f64> {
        let mut rng = stream_rng(seed, 0, StreamKind::Theta);
        (0..count).map(|_| self.sample_one(&mut rng)).collect()
    }

    /// One draw from an externally managed stream.
    pub fn sample_one<R: Rng + ?Sized>(&self, rng: &mut R) -> f64 {
        let u: f64 = rng.sample(Open01);
        let t = self.inverse_transform_cdf(u);
        let z = t.powf(1.0 / (self.alpha + 1.0));
        let x = 0.25 - z;
        // u in (0,1) keeps t > 0, hence x strictly below 1/4.
        debug_assert!(x < 0.25);
        match self.support_sign {
            SupportSign::Positive => x.max(0.0),
            SupportSign::Mirrored => -x.max(0.0),
        }
    }

    /// G(t) = P((1/4 - |theta|)^(alpha+1) <= t), by table lookup.
    fn transform_cdf(&self, t: f64) -> f64 {
        if t <= 0.0 {
            return 0.0;
        }
        if t >= self.t_max {
            return 1.0;
        }
        let pos = t / self.t_max * CDF_KNOTS as f64;
        let i = (pos.floor() as usize).min(CDF_KNOTS - 1);
        let frac = pos - i as f64;
        self.cdf[i] + frac * (self.cdf[i + 1] - self.cdf[i])
    }

    fn inverse_transform_cdf(&self, u: f64) -> f64 {
        let i = self.cdf.partition_point(|&g| g < u);
        if i == 0 {
            return 0.0;
        }
        if i > CDF_KNOTS {
            return self.t_max;
        }
        let (g0, g1) = (self.cdf[i - 1], self.cdf[i]);
        let frac = if g1 > g0 { (u - g0) / (g1 - g0) } else { 0.0 };
        (i as f64 - 1.0 + frac) / CDF_KNOTS as f64 * self.t_max
    }

    /// Cumulative panel quadrature of the transformed density
    /// `g(t) = nc/(alpha+1) * phi(1/4 - t^(1/(alpha+1)))`, which is bounded.
    fn tabulate_cdf(&mut self) {
        let inv_exp = 1.0 / (self.alpha + 1.0);
        let g = |t: f64| self.norm_constant * inv_exp * self.phi.eval(0.25 - t.powf(inv_exp));
        let h = self.t_max / CDF_KNOTS as f64;
        let mut cum = Vec::with_capacity(CDF_KNOTS + 1);
        cum.push(0.0);
        let mut acc = 0.0;
        for i in 0..CDF_KNOTS {
            let (v, _) = quad::gk15(&g, i as f64 * h, (i + 1) as f64 * h);
            acc += v.max(0.0);
            cum.push(acc);
        }
        // Rescale so the table ends at exactly 1; the residual is within the
        // quadrature tolerance and checked by the normalization invariant test.
        let total = acc;
        if total > 0.0 {
            for v in &mut cum {
                *v /= total;
            }
        }
        self.cdf = cum;
    }
}

fn validate_phi(phi: &PhiSpec) -> Result<(), ThetaLawError> {
    let end = phi.eval(0.25);
    if !end.is_finite() {
        return Err(ThetaLawError::InvalidShape(
            "phi(1/4) is not finite".into(),
        ));
    }
    if end == 0.0 {
        return Err(ThetaLawError::InvalidShape("phi(1/4) must be nonzero".into()));
    }
    // dense sign scan; rejects sign-changing polynomials
    const SCAN: usize = 2048;
    for i in 0..=SCAN {
        let x = 0.25 * i as f64 / SCAN as f64;
        let v = phi.eval(x);
        if !v.is_finite() {
            return Err(ThetaLawError::InvalidShape(format!(
                "phi({x}) is not finite"
            )));
        }
        if v < 0.0 {
            return Err(ThetaLawError::InvalidShape(format!(
                "phi({x}) = {v} is negative on the support"
            )));
        }
    }
    if end < 0.0 {
        return Err(ThetaLawError::InvalidShape(
            "phi(1/4) must be positive".into(),
        ));
    }
    Ok(())
}

/// Unnormalized mass `int_0^{1/4} phi(x) (1/4-x)^alpha dx` in the z variable,
/// with the power substitution when the endpoint exponent is negative.
fn raw_mass(alpha: f64, phi: &PhiSpec, cfg: &QuadratureConfig) -> Result<f64, ThetaLawError> {
    let res = if alpha < 0.0 {
        let inv_exp = 1.0 / (alpha + 1.0);
        let upper = 0.25f64.powf(alpha + 1.0);
        let g = |t: f64| phi.eval(0.25 - t.powf(inv_exp)) / (alpha + 1.0);
        quad::integrate_singular(&g, upper, cfg)
    } else {
        let g = |z: f64| phi.eval(0.25 - z) * z.powf(alpha);
        quad::integrate_singular(&g, 0.25, cfg)
    };
    if !res.converged {
        return Err(ThetaLawError::Normalization {
            estimate: res.value,
            error: res.abs_error,
        });
    }
    Ok(res.value)
}
