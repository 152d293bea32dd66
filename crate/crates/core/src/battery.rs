//! Built-in verification battery: fast self-checks that the spectral
//! machinery is internally consistent. Each check returns pass/fail with a
//! one-line detail; the CLI `verify` command prints them as a table.
//!
//! The asymptote checks do not just test `ratio -> 1` loosely: for
//! `0 < alpha < 1` the finite-frequency deficit of the ratio is predicted by
//! the tail of the Euler integral, `D = A^(alpha-1) / ((1-alpha) E_alpha)`,
//! and the measured deficit must match it. At `alpha = 1` the constant-shape
//! integral has the closed form `Phi(1/4) [ln(1+A) + 1/(1+A) - 1]`, checked
//! at quadrature accuracy.

use crate::quad::QuadratureConfig;
use crate::rng::{stream_rng, StreamKind};
use crate::spectral::{
    a_lambda, euler_integral, euler_integral_closed_form, Frequency, SpectralModel,
};
use crate::theta::{PhiSpec, SupportSign, ThetaLaw};
use rand::Rng;
use serde::Serialize;

#[derive(Debug, Clone, Serialize)]
pub struct CheckResult {
    pub name: String,
    pub pass: bool,
    pub detail: String,
}

impl CheckResult {
    fn new(name: impl Into<String>, pass: bool, detail: impl Into<String>) -> Self {
        Self {
            name: name.into(),
            pass,
            detail: detail.into(),
        }
    }
}

fn constant_model(alpha: f64, quad: &QuadratureConfig) -> SpectralModel {
    let law = ThetaLaw::new(alpha, PhiSpec::Constant, SupportSign::Positive, quad)
        .expect("battery law construction");
    SpectralModel::new(law, 1.0).expect("battery model construction")
}

/// Direct vs transformed evaluation on random `(alpha, lambda)` pairs with
/// `A_lambda` above the switch; relative agreement must be within `tol`.
pub fn route_agreement_check(
    n_pairs: usize,
    seed: u64,
    tol: f64,
    quad: &QuadratureConfig,
) -> CheckResult {
    let mut rng = stream_rng(seed, 0, StreamKind::Noise);
    let mut worst: f64 = 0.0;
    let mut worst_case = String::new();
    let mut accepted = 0usize;
    while accepted < n_pairs {
        let alpha = -0.9 + 3.9 * rng.random::<f64>();
        let r = 10f64.powf(-2.5 + 2.24 * rng.random::<f64>()); // |lambda| in ~[3e-3, 0.55]
        let phi_dir = std::f64::consts::FRAC_PI_2 * rng.random::<f64>();
        let fr = Frequency::new(r * phi_dir.cos(), r * phi_dir.sin());
        if a_lambda(fr) <= quad.a_lambda_switch {
            continue;
        }
        accepted += 1;
        let model = constant_model(alpha, quad);
        let (d, t) = match (model.f_direct(fr, quad), model.f_transformed(fr, quad)) {
            (Ok(d), Ok(t)) => (d, t),
            (a, b) => {
                return CheckResult::new(
                    "route-agreement",
                    false,
                    format!("evaluation failed at alpha={alpha:.4} {fr:?}: {a:?} / {b:?}"),
                );
            }
        };
        let rel = ((d - t) / d).abs();
        if rel > worst {
            worst = rel;
            worst_case = format!("alpha={alpha:.4} lambda=({:.4},{:.4})", fr.lambda1, fr.lambda2);
        }
    }
    CheckResult::new(
        "route-agreement",
        worst <= tol,
        format!("{n_pairs} pairs, worst rel diff {worst:.3e} ({worst_case}), tol {tol:.0e}"),
    )
}

/// Numerical Euler integral vs the closed form `pi a / sin(pi a)`.
pub fn euler_integral_check(quad: &QuadratureConfig) -> CheckResult {
    let mut worst: f64 = 0.0;
    for k in 1..=9 {
        for sign in [1.0, -1.0] {
            let alpha = sign * k as f64 / 10.0;
            let num = match euler_integral(alpha, quad) {
                Ok(v) => v,
                Err(e) => {
                    return CheckResult::new("euler-integral", false, format!("{e}"));
                }
            };
            let exact = euler_integral_closed_form(alpha);
            worst = worst.max(((num - exact) / exact).abs());
        }
    }
    CheckResult::new(
        "euler-integral",
        worst <= 1e-10,
        format!("alpha in +-{{0.1..0.9}}, worst rel diff {worst:.3e}, tol 1e-10"),
    )
}

/// Power-asymptote check with an injectable constant, so a wrong prefactor is
/// caught: the measured deficit `1 - f/asym` at `lambda = (t,t)` must match
/// the predicted Euler-tail deficit within 5% of itself (plus a small floor).
pub fn power_asymptote_check_with_constant(
    model: &SpectralModel,
    c_alpha_value: f64,
    quad: &QuadratureConfig,
) -> CheckResult {
    let alpha = model.alpha();
    let e_alpha = match euler_integral(alpha, quad) {
        Ok(v) => v,
        Err(e) => return CheckResult::new("power-asymptote", false, format!("{e}")),
    };
    let mut detail = String::new();
    let mut pass = true;
    for t in [1e-3, 1e-4] {
        let fr = Frequency::new(t, t);
        let f = match model.f(fr, quad) {
            Ok(v) => v,
            Err(e) => return CheckResult::new("power-asymptote", false, format!("{e}")),
        };
        let asym = c_alpha_value * (2.0 * t * t).powf(alpha - 1.0);
        let deficit = 1.0 - f / asym;
        let a = a_lambda(fr);
        let predicted = a.powf(alpha - 1.0) / ((1.0 - alpha) * e_alpha);
        let ok = (deficit - predicted).abs() <= 0.05 * predicted + 5e-4;
        pass &= ok;
        detail.push_str(&format!(
            "t={t:.0e}: deficit {deficit:.3e} vs predicted {predicted:.3e}; "
        ));
    }
    CheckResult::new(format!("power-asymptote(alpha={alpha})"), pass, detail)
}

/// Power asymptote at the model's own `c_alpha`.
pub fn power_asymptote_check(model: &SpectralModel, quad: &QuadratureConfig) -> CheckResult {
    match model.c_alpha(quad) {
        Ok(c) => power_asymptote_check_with_constant(model, c, quad),
        Err(e) => CheckResult::new("power-asymptote", false, format!("{e}")),
    }
}

/// At `alpha = 1` and constant shape the substituted integral has a closed
/// form; quadrature must reproduce it to 1e-8 and the ratio to the log
/// asymptote must sit within 10% at `t = 1e-4`.
pub fn log_asymptote_check(model: &SpectralModel, quad: &QuadratureConfig) -> CheckResult {
    let name = "log-asymptote(alpha=1)";
    let c1 = match model.c_one() {
        Ok(v) => v,
        Err(e) => return CheckResult::new(name, false, format!("{e}")),
    };
    let phi_end = model.law().effective_phi_at_endpoint();
    let mut pass = true;
    let mut detail = String::new();
    for t in [1e-4, 1e-6] {
        let fr = Frequency::new(t, t);
        let f = match model.f(fr, quad) {
            Ok(v) => v,
            Err(e) => return CheckResult::new(name, false, format!("{e}")),
        };
        let a = a_lambda(fr);
        let s = 2.0 / (1.0 + a); // 2 - cos l1 - cos l2
        let closed = model.sigma2_eps() / (4.0 * std::f64::consts::PI.powi(2))
            * 0.25
            * (2.0 - s).powi(-2)
            * phi_end
            * ((1.0 + a).ln() + 1.0 / (1.0 + a) - 1.0);
        let rel_closed = ((f - closed) / closed).abs();
        let ratio = f / (c1 * (2.0 * t * t).ln().abs());
        let ok = rel_closed <= 1e-8 && (ratio - 1.0).abs() <= 0.10;
        pass &= ok;
        detail.push_str(&format!(
            "t={t:.0e}: closed-form rel {rel_closed:.2e}, ratio {ratio:.4}; "
        ));
    }
    CheckResult::new(name, pass, detail)
}

/// For `alpha > 1` the spectrum is continuous: refining evaluations around a
/// point must stabilize and the origin value must be finite.
pub fn continuity_check(model: &SpectralModel, quad: &QuadratureConfig) -> CheckResult {
    let name = format!("continuity(alpha={})", model.alpha());
    let f0 = match model.f(Frequency::new(0.0, 0.0), quad) {
        Ok(v) => v,
        Err(e) => return CheckResult::new(name, false, format!("{e}")),
    };
    let mut prev = f0;
    for k in 1..=8 {
        let t = 0.5f64.powi(k);
        match model.f(Frequency::new(t, t), quad) {
            Ok(v) => prev = v,
            Err(e) => return CheckResult::new(name, false, format!("{e}")),
        }
    }
    let near = ((prev - f0) / f0).abs();
    CheckResult::new(
        name,
        f0.is_finite() && near < 1e-3,
        format!("f(0,0)={f0:.6e}, rel variation at 2^-8 is {near:.2e}"),
    )
}

/// Mirrored law vs reflected positive law: `f_m(pi-d, pi-d) = f_p(d, d)`
/// exactly; also requires the mirrored spectrum to be bounded near 0.
pub fn reflection_duality_check(alpha: f64, quad: &QuadratureConfig) -> CheckResult {
    let name = format!("reflection-duality(alpha={alpha})");
    let pos = constant_model(alpha, quad);
    let law_m = match ThetaLaw::new(alpha, PhiSpec::Constant, SupportSign::Mirrored, quad) {
        Ok(l) => l,
        Err(e) => return CheckResult::new(name, false, format!("{e}")),
    };
    let mir = SpectralModel::new(law_m, 1.0).expect("sigma > 0");
    let pi = std::f64::consts::PI;
    let mut worst: f64 = 0.0;
    for delta in [1e-2, 1e-3] {
        let fp = pos.f(Frequency::new(delta, delta), quad);
        let fm = mir.f(Frequency::new(pi - delta, pi - delta), quad);
        match (fp, fm) {
            (Ok(p), Ok(m)) => worst = worst.max(((p - m) / p).abs()),
            (a, b) => return CheckResult::new(name, false, format!("{a:?} / {b:?}")),
        }
    }
    let at_zero = mir.f(Frequency::new(1e-6, 1e-6), quad);
    let bounded = matches!(at_zero, Ok(v) if v.is_finite());
    CheckResult::new(
        name,
        worst <= 1e-8 && bounded,
        format!("worst rel diff {worst:.3e}; f_mirrored near 0 bounded: {bounded}"),
    )
}

/// Full default battery over a set of exponents.
pub fn run_battery(alphas: &[f64], seed: u64, quad: &QuadratureConfig) -> Vec<CheckResult> {
    let mut out = Vec::new();
    out.push(route_agreement_check(200, seed, 1e-8, quad));
    out.push(euler_integral_check(quad));
    for &alpha in alphas {
        if alpha > 0.0 && alpha < 1.0 {
            out.push(power_asymptote_check(&constant_model(alpha, quad), quad));
        } else if (alpha - 1.0).abs() < 1e-12 {
            out.push(log_asymptote_check(&constant_model(alpha, quad), quad));
        } else if alpha > 1.0 {
            out.push(continuity_check(&constant_model(alpha, quad), quad));
        }
    }
    out.push(reflection_duality_check(0.5, quad));
    out
}
