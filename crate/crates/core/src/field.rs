//! Field synthesis on a periodic lattice.
//!
//! Single-coefficient autoregressive fields are generated exactly on the
//! torus: the DFT diagonalizes the four-neighbor operator, so dividing a
//! white-noise spectrum by `1 - 2 theta (cos l1 + cos l2)` bin-wise inverts
//! the AR equation to round-off. Aggregates average independent replicates
//! with a `1/sqrt(N)` scaling; the Gaussian limit field is synthesized
//! directly from its spectral density with Hermitian-symmetric complex
//! Gaussian coefficients.
//!
//! Every replicate draws from its own `(seed, replicate, purpose)` stream
//! (see [`crate::rng`]), so results do not depend on scheduling.

use crate::quad::QuadratureConfig;
use crate::rng::{stream_rng, StreamKind};
use crate::spectral::{SpectralError, SpectralGrid, SpectralModel};
use crate::theta::{PhiSpec, SupportSign, ThetaLaw};
use rand::Rng;
use rand_distr::StandardNormal;
use rayon::prelude::*;
use rustfft::num_complex::Complex;
use rustfft::FftPlanner;
use serde::{Deserialize, Serialize};
use thiserror::Error;

/// Torus dimensions. Powers of two are recommended for FFT speed but any
/// sizes of at least 2 work.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct LatticeSpec {
    pub n1: usize,
    pub n2: usize,
}

impl LatticeSpec {
    pub fn new(n1: usize, n2: usize) -> Result<Self, FieldError> {
        if n1 < 2 || n2 < 2 {
            return Err(FieldError::Lattice(format!(
                "lattice dimensions must be at least 2, got {n1} x {n2}"
            )));
        }
        Ok(Self { n1, n2 })
    }

    pub fn site_count(&self) -> usize {
        self.n1 * self.n2
    }
}

/// Serializable summary of a coefficient law, for provenance records.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct LawDescriptor {
    pub alpha: f64,
    pub phi: PhiSpec,
    pub support: SupportSign,
}

impl LawDescriptor {
    pub fn of(law: &ThetaLaw) -> Self {
        Self {
            alpha: law.alpha(),
            phi: law.phi().clone(),
            support: law.support_sign(),
        }
    }
}

/// How a realization was produced.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Provenance {
    SingleTheta { theta: f64 },
    Aggregate { n_fields: u64, law: LawDescriptor },
    Limit { law: LawDescriptor },
}

/// A real-valued grid on the torus together with how it was made.
#[derive(Debug, Clone)]
pub struct FieldRealization {
    pub lattice: LatticeSpec,
    /// Row-major `n1 x n2`.
    pub values: Vec<f64>,
    pub provenance: Provenance,
    pub seed: u64,
    pub sigma2_eps: f64,
}

impl FieldRealization {
    pub fn value(&self, i: usize, j: usize) -> f64 {
        self.values[i * self.lattice.n2 + j]
    }

    pub fn mean(&self) -> f64 {
        self.values.iter().sum::<f64>() / self.values.len() as f64
    }
}

#[derive(Debug, Error)]
pub enum FieldError {
    #[error("|theta| = {0} admits no stationary solution; need |theta| < 1/4")]
    Nonstationary(f64),
    #[error("limit field does not exist in L2 for alpha = {0} (need alpha > 0)")]
    NonexistentLimit(f64),
    #[error("invalid lattice: {0}")]
    Lattice(String),
    #[error("aggregate needs at least one replicate")]
    EmptyAggregate,
    #[error(transparent)]
    Spectral(#[from] SpectralError),
}

/// Warning attached to an aggregate when the coefficient law violates the
/// L2 existence condition (`alpha <= 0`): the simulation still runs so the
/// variance blow-up can be observed empirically.
#[derive(Debug, Clone, PartialEq)]
pub struct ExistenceWarning {
    pub alpha: f64,
}

impl std::fmt::Display for ExistenceWarning {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(
            f,
            "alpha = {} <= 0: the aggregated field has no L2 limit; \
             sample variances will grow with N",
            self.alpha
        )
    }
}

/// In-place 2-D FFT, rows then columns. `dir_forward = false` applies the
/// unnormalized inverse; callers divide by `n1*n2` once.
fn fft2(data: &mut [Complex<f64>], n1: usize, n2: usize, forward: bool) {
    let mut planner = FftPlanner::new();
    let row_fft = if forward {
        planner.plan_fft_forward(n2)
    } else {
        planner.plan_fft_inverse(n2)
    };
    let col_fft = if forward {
        planner.plan_fft_forward(n1)
    } else {
        planner.plan_fft_inverse(n1)
    };
    for row in data.chunks_exact_mut(n2) {
        row_fft.process(row);
    }
    let mut col = vec![Complex::new(0.0, 0.0); n1];
    for j in 0..n2 {
        for i in 0..n1 {
            col[i] = data[i * n2 + j];
        }
        col_fft.process(&mut col);
        for i in 0..n1 {
            data[i * n2 + j] = col[i];
        }
    }
}

fn cos_table(n: usize) -> Vec<f64> {
    (0..n)
        .map(|k| {
            let k_red = k.min(n - k) as f64;
            (2.0 * std::f64::consts::PI * k_red / n as f64).cos()
        })
        .collect()
}

fn gaussian_grid<R: Rng>(rng: &mut R, len: usize, sd: f64) -> Vec<f64> {
    (0..len)
        .map(|_| {
            let g: f64 = rng.sample(StandardNormal);
            sd * g
        })
        .collect()
}

/// Solves `X - theta (X_left + X_right + X_up + X_down) = eps` exactly on the
/// torus: white noise is drawn, transformed, divided bin-wise by the AR
/// characteristic value and transformed back.
pub fn simulate_ar_field(
    theta: f64,
    lattice: LatticeSpec,
    sigma2_eps: f64,
    seed: u64,
) -> Result<FieldRealization, FieldError> {
    let mut rng = stream_rng(seed, 0, StreamKind::Noise);
    let field = ar_field_from_stream(theta, lattice, sigma2_eps, &mut rng)?;
    Ok(FieldRealization {
        lattice,
        values: field,
        provenance: Provenance::SingleTheta { theta },
        seed,
        sigma2_eps,
    })
}

fn ar_field_from_stream<R: Rng>(
    theta: f64,
    lattice: LatticeSpec,
    sigma2_eps: f64,
    rng: &mut R,
) -> Result<Vec<f64>, FieldError> {
    if !(theta.abs() < 0.25) {
        return Err(FieldError::Nonstationary(theta));
    }
    let (n1, n2) = (lattice.n1, lattice.n2);
    let noise = gaussian_grid(rng, n1 * n2, sigma2_eps.sqrt());
    let mut spec: Vec<Complex<f64>> = noise.iter().map(|&v| Complex::new(v, 0.0)).collect();
    fft2(&mut spec, n1, n2, true);
    let c1 = cos_table(n1);
    let c2 = cos_table(n2);
    for i in 0..n1 {
        for j in 0..n2 {
            let d = 1.0 - 2.0 * theta * (c1[i] + c2[j]);
            spec[i * n2 + j] /= d;
        }
    }
    fft2(&mut spec, n1, n2, false);
    let scale = 1.0 / (n1 * n2) as f64;
    Ok(spec.iter().map(|z| z.re * scale).collect())
}

/// The four-neighbor AR operator with circular boundary, for residual checks:
/// returns `X - theta * (sum of the four neighbors)`.
pub fn apply_ar_operator(field: &FieldRealization, theta: f64) -> Vec<f64> {
    let (n1, n2) = (field.lattice.n1, field.lattice.n2);
    let v = &field.values;
    let mut out = vec![0.0; n1 * n2];
    for i in 0..n1 {
        let up = (i + n1 - 1) % n1;
        let down = (i + 1) % n1;
        for j in 0..n2 {
            let left = (j + n2 - 1) % n2;
            let right = (j + 1) % n2;
            out[i * n2 + j] = v[i * n2 + j]
                - theta
                    * (v[up * n2 + j] + v[down * n2 + j] + v[i * n2 + left] + v[i * n2 + right]);
        }
    }
    out
}

/// Result of [`aggregate_field`]; carries the existence warning when the law
/// has `alpha <= 0`.
#[derive(Debug, Clone)]
pub struct AggregateOutcome {
    pub field: FieldRealization,
    pub warning: Option<ExistenceWarning>,
}

/// Aggregates `n_fields` independent random-coefficient replicates scaled by
/// `1/sqrt(N)`. Replicate `n` draws its coefficient from stream
/// `(seed, n, Theta)` and its noise from `(seed, n, Noise)`, so the outcome
/// is the same no matter how replicates are scheduled; partial grids are
/// combined by a fixed pairwise reduction.
pub fn aggregate_field(
    law: &ThetaLaw,
    n_fields: u64,
    lattice: LatticeSpec,
    sigma2_eps: f64,
    seed: u64,
) -> Result<AggregateOutcome, FieldError> {
    if n_fields == 0 {
        return Err(FieldError::EmptyAggregate);
    }
    let warning = (law.alpha() <= 0.0).then(|| ExistenceWarning { alpha: law.alpha() });

    let replicates: Result<Vec<Vec<f64>>, FieldError> = (0..n_fields)
        .into_par_iter()
        .map(|n| {
            let mut theta_rng = stream_rng(seed, n, StreamKind::Theta);
            let theta = law.sample_one(&mut theta_rng);
            let mut noise_rng = stream_rng(seed, n, StreamKind::Noise);
            ar_field_from_stream(theta, lattice, sigma2_eps, &mut noise_rng)
        })
        .collect();
    let mut grids = replicates?;

    // pairwise tree reduction in fixed order
    while grids.len() > 1 {
        let mut next = Vec::with_capacity(grids.len().div_ceil(2));
        let mut it = grids.into_iter();
        while let Some(mut a) = it.next() {
            if let Some(b) = it.next() {
                for (x, y) in a.iter_mut().zip(&b) {
                    *x += y;
                }
            }
            next.push(a);
        }
        grids = next;
    }
    let mut values = grids.pop().unwrap();
    let scale = 1.0 / (n_fields as f64).sqrt();
    for v in &mut values {
        *v *= scale;
    }

    Ok(AggregateOutcome {
        field: FieldRealization {
            lattice,
            values,
            provenance: Provenance::Aggregate {
                n_fields,
                law: LawDescriptor::of(law),
            },
            seed,
            sigma2_eps,
        },
        warning,
    })
}

/// Hermitian-symmetric complex Gaussian spectrum with `E|X_k|^2 = amp * f_k`,
/// filled in raster order from a single stream, then inverse-transformed.
/// Returns the real field and the maximum imaginary residue (relative to the
/// field RMS), which is pure round-off by construction.
fn limit_synthesis(grid: &SpectralGrid, seed: u64) -> (Vec<f64>, f64) {
    let (n1, n2) = (grid.n1, grid.n2);
    let mut rng = stream_rng(seed, 0, StreamKind::Spectrum);
    let amp = 4.0 * std::f64::consts::PI.powi(2) * (n1 * n2) as f64;
    let inv_sqrt2 = std::f64::consts::FRAC_1_SQRT_2;

    let mut spec = vec![Complex::new(0.0, 0.0); n1 * n2];
    for i in 0..n1 {
        let ic = (n1 - i) % n1;
        for j in 0..n2 {
            let jc = (n2 - j) % n2;
            // fill each conjugate pair once, at its lexicographically first member
            if (ic, jc) < (i, j) {
                continue;
            }
            let scale = (amp * grid.value(i, j)).sqrt();
            if i == ic && j == jc {
                let g: f64 = rng.sample(StandardNormal);
                spec[i * n2 + j] = Complex::new(scale * g, 0.0);
            } else {
                let re: f64 = rng.sample(StandardNormal);
                let im: f64 = rng.sample(StandardNormal);
                let z = Complex::new(re * inv_sqrt2, im * inv_sqrt2) * scale;
                spec[i * n2 + j] = z;
                spec[ic * n2 + jc] = z.conj();
            }
        }
    }

    fft2(&mut spec, n1, n2, false);
    let norm = 1.0 / (n1 * n2) as f64;
    let values: Vec<f64> = spec.iter().map(|z| z.re * norm).collect();
    let max_im = spec.iter().map(|z| (z.im * norm).abs()).fold(0.0, f64::max);
    let rms = (values.iter().map(|v| v * v).sum::<f64>() / values.len() as f64).sqrt();
    let residue = if rms > 0.0 { max_im / rms } else { max_im };
    (values, residue)
}

/// Synthesizes the Gaussian limit field from a precomputed spectral grid.
///
/// Bin `k` receives an independent complex Gaussian with
/// `E|X_k|^2 = 4 pi^2 n1 n2 f_k` (so the expected periodogram equals the
/// grid), conjugate-symmetrized so the inverse transform is real;
/// self-conjugate bins get real Gaussians. The zeroed singular bin makes
/// every realization mean-free.
pub fn synthesize_limit_from_grid(
    grid: &SpectralGrid,
    law: &ThetaLaw,
    sigma2_eps: f64,
    seed: u64,
) -> FieldRealization {
    let (values, _) = limit_synthesis(grid, seed);
    FieldRealization {
        lattice: LatticeSpec {
            n1: grid.n1,
            n2: grid.n2,
        },
        values,
        provenance: Provenance::Limit {
            law: LawDescriptor::of(law),
        },
        seed,
        sigma2_eps,
    }
}

/// Imaginary residue of the Hermitian synthesis, for the symmetry check.
pub fn synthesis_imaginary_residue(grid: &SpectralGrid, seed: u64) -> f64 {
    limit_synthesis(grid, seed).1
}

/// Spectral synthesis of the limit field (computes the spectral grid, then
/// delegates to [`synthesize_limit_from_grid`]). Hard error when the law has
/// `alpha <= 0`: the limit field does not exist in L2.
pub fn simulate_limit_field(
    law: &ThetaLaw,
    lattice: LatticeSpec,
    sigma2_eps: f64,
    seed: u64,
    quad: &QuadratureConfig,
) -> Result<FieldRealization, FieldError> {
    if law.alpha() <= 0.0 {
        return Err(FieldError::NonexistentLimit(law.alpha()));
    }
    let model = SpectralModel::new(law.clone(), sigma2_eps)?;
    let grid = model.f_grid(lattice.n1, lattice.n2, quad)?;
    Ok(synthesize_limit_from_grid(&grid, law, sigma2_eps, seed))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::quad::QuadratureConfig;

    fn lat(n: usize) -> LatticeSpec {
        LatticeSpec::new(n, n).unwrap()
    }

    fn law(alpha: f64) -> ThetaLaw {
        ThetaLaw::new(
            alpha,
            PhiSpec::Constant,
            SupportSign::Positive,
            &QuadratureConfig::default(),
        )
        .unwrap()
    }

    #[test]
    fn theta_zero_returns_noise() {
        let f = simulate_ar_field(0.0, lat(16), 1.0, 3).unwrap();
        let mut rng = stream_rng(3, 0, StreamKind::Noise);
        let noise = gaussian_grid(&mut rng, 256, 1.0);
        for (a, b) in f.values.iter().zip(&noise) {
            assert!((a - b).abs() < 1e-12, "{a} vs {b}");
        }
    }

    #[test]
    fn nonstationary_theta_rejected() {
        assert!(matches!(
            simulate_ar_field(0.25, lat(8), 1.0, 0),
            Err(FieldError::Nonstationary(_))
        ));
        assert!(matches!(
            simulate_ar_field(-0.3, lat(8), 1.0, 0),
            Err(FieldError::Nonstationary(_))
        ));
    }

    #[test]
    fn ar_residual_reproduces_noise() {
        let theta = 0.21;
        let f = simulate_ar_field(theta, lat(32), 2.0, 11).unwrap();
        let residual = apply_ar_operator(&f, theta);
        let mut rng = stream_rng(11, 0, StreamKind::Noise);
        let noise = gaussian_grid(&mut rng, 32 * 32, 2.0f64.sqrt());
        let scale = noise.iter().map(|v| v.abs()).fold(0.0, f64::max);
        for (r, w) in residual.iter().zip(&noise) {
            assert!((r - w).abs() / scale < 1e-12, "{r} vs {w}");
        }
    }

    #[test]
    fn simulation_is_deterministic() {
        let a = simulate_ar_field(0.1, lat(16), 1.0, 5).unwrap();
        let b = simulate_ar_field(0.1, lat(16), 1.0, 5).unwrap();
        assert_eq!(a.values, b.values);
        let c = simulate_ar_field(0.1, lat(16), 1.0, 6).unwrap();
        assert_ne!(a.values, c.values);
    }

    #[test]
    fn aggregate_n1_bitwise_matches_single_theta() {
        let law = law(0.5);
        let agg = aggregate_field(&law, 1, lat(16), 1.0, 21).unwrap();
        assert!(agg.warning.is_none());
        // same derived streams: theta from (21,0,Theta), noise from (21,0,Noise)
        let mut theta_rng = stream_rng(21, 0, StreamKind::Theta);
        let theta = law.sample_one(&mut theta_rng);
        let single = simulate_ar_field(theta, lat(16), 1.0, 21).unwrap();
        for (a, b) in agg.field.values.iter().zip(&single.values) {
            assert_eq!(a.to_bits(), b.to_bits());
        }
    }

    #[test]
    fn aggregate_warns_for_nonpositive_alpha() {
        let law = law(-0.25);
        let agg = aggregate_field(&law, 4, lat(8), 1.0, 1).unwrap();
        assert_eq!(agg.warning, Some(ExistenceWarning { alpha: -0.25 }));
    }

    #[test]
    fn aggregate_variance_is_n_free() {
        // short-memory law so all moments exist: per-site variance of the
        // aggregate must not depend on N
        let law = law(2.0);
        let var_at = |n_fields: u64, seed_base: u64| -> f64 {
            let reps = 60;
            let mut acc = 0.0;
            for r in 0..reps {
                let out =
                    aggregate_field(&law, n_fields, lat(8), 1.0, seed_base + r as u64).unwrap();
                acc += out.field.value(3, 5).powi(2);
            }
            acc / reps as f64
        };
        let v1 = var_at(1, 100);
        let v8 = var_at(8, 200);
        // both estimate the same variance; 60 replicates give ~18% rel. se
        let rel = (v1 - v8).abs() / v1.max(v8);
        assert!(rel < 0.8, "v1={v1} v8={v8}");
    }

    #[test]
    fn limit_field_rejects_nonpositive_alpha() {
        let law = law(-0.5);
        assert!(matches!(
            simulate_limit_field(&law, lat(8), 1.0, 0, &QuadratureConfig::default()),
            Err(FieldError::NonexistentLimit(_))
        ));
    }

    #[test]
    fn limit_field_mean_is_zero_and_real() {
        let q = QuadratureConfig::default();
        let law = law(0.5);
        let f = simulate_limit_field(&law, lat(32), 1.0, 17, &q).unwrap();
        let rms = (f.values.iter().map(|v| v * v).sum::<f64>() / f.values.len() as f64).sqrt();
        assert!(f.mean().abs() < 1e-12 * rms.max(1.0), "mean {}", f.mean());

        let model = SpectralModel::new(law.clone(), 1.0).unwrap();
        let grid = model.f_grid(32, 32, &q).unwrap();
        let residue = synthesis_imaginary_residue(&grid, 17);
        assert!(residue < 1e-10, "imaginary residue {residue}");
    }

    #[test]
    fn limit_field_deterministic() {
        let q = QuadratureConfig::default();
        let law = law(0.75);
        let a = simulate_limit_field(&law, lat(16), 1.0, 9, &q).unwrap();
        let b = simulate_limit_field(&law, lat(16), 1.0, 9, &q).unwrap();
        assert_eq!(a.values, b.values);
    }

    #[test]
    fn single_theta_variance_matches_spectral_sum() {
        // Monte Carlo across replicates vs the discrete spectral sum
        // (sigma2/(n1 n2)) sum_k d_k^{-2}
        let theta = 0.2;
        let n = 32;
        let c = cos_table(n);
        let mut spectral_sum = 0.0;
        for i in 0..n {
            for j in 0..n {
                let d = 1.0 - 2.0 * theta * (c[i] + c[j]);
                spectral_sum += 1.0 / (d * d);
            }
        }
        let var_theory = spectral_sum / (n * n) as f64;

        let reps = 400;
        let mut acc = 0.0;
        let mut acc2 = 0.0;
        for r in 0..reps {
            let f = simulate_ar_field(theta, lat(n), 1.0, 1000 + r).unwrap();
            let v = f.value(7, 13).powi(2);
            acc += v;
            acc2 += v * v;
        }
        let mean = acc / reps as f64;
        let se = ((acc2 / reps as f64 - mean * mean) / reps as f64).sqrt();
        assert!(
            (mean - var_theory).abs() < 3.0 * se,
            "MC {mean} vs theory {var_theory} (se {se})"
        );
    }
}
