//! One-dimensional quadrature: adaptive Gauss-Kronrod 15(7) with interval
//! bisection, tanh-sinh (double-exponential) quadrature for integrands with an
//! endpoint singularity, and Gauss-Legendre nodes for fixed-order tensor rules.
//!
//! Convention for singular integrands: tanh-sinh abscissas are generated as an
//! exact offset from the *left* endpoint, so integrable singularities at the
//! lower limit (`x^a`, a > -1, on `[0, L]`) are evaluated without cancellation.
//! Integrals singular at the upper limit must be substituted by the caller so
//! the singularity sits at 0.

use serde::{Deserialize, Serialize};
use std::collections::BinaryHeap;

/// Tolerances and budgets shared by every quadrature-backed evaluation.
#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct QuadratureConfig {
    /// Relative tolerance on the integral estimate.
    pub rel_tol: f64,
    /// Absolute tolerance floor.
    pub abs_tol: f64,
    /// Maximum number of interval bisections before the adaptive rule gives up.
    pub max_subdivisions: u32,
    /// Threshold on the substitution bound `A_lambda` above which the
    /// transformed spectral route is used.
    pub a_lambda_switch: f64,
}

impl Default for QuadratureConfig {
    fn default() -> Self {
        Self {
            rel_tol: 1e-10,
            abs_tol: 1e-14,
            max_subdivisions: 400,
            a_lambda_switch: 10.0,
        }
    }
}

impl QuadratureConfig {
    pub fn validate(&self) -> Result<(), String> {
        if !(self.rel_tol > 0.0) || !(self.abs_tol > 0.0) {
            return Err(format!(
                "quadrature tolerances must be positive (rel_tol={}, abs_tol={})",
                self.rel_tol, self.abs_tol
            ));
        }
        if self.max_subdivisions < 1 {
            return Err("max_subdivisions must be at least 1".into());
        }
        if !(self.a_lambda_switch > 0.0) {
            return Err("a_lambda_switch must be positive".into());
        }
        Ok(())
    }
}

/// Outcome of a quadrature run. `converged` is false when the budget ran out
/// before the tolerance was met; the estimate is still the best available.
#[derive(Debug, Clone, Copy)]
pub struct QuadResult {
    pub value: f64,
    pub abs_error: f64,
    pub converged: bool,
}

// 15-point Kronrod extension of the 7-point Gauss rule (QUADPACK QK15).
#[allow(clippy::excessive_precision)]
const XGK: [f64; 8] = [
    0.991455371120812639206854697526329,
    0.949107912342758524526189684047851,
    0.864864423359769072789712788640926,
    0.741531185599394439863864773280788,
    0.586087235467691130294144838258730,
    0.405845151377397166906606412076961,
    0.207784955007898467600689403773245,
    0.000000000000000000000000000000000,
];
#[allow(clippy::excessive_precision)]
const WGK: [f64; 8] = [
    0.022935322010529224963732008058970,
    0.063092092629978553290700663189204,
    0.104790010322250183839876322541518,
    0.140653259715525918745189590510238,
    0.169004726639267902826583426598550,
    0.190350578064785409913256402421014,
    0.204432940075298892414161999234649,
    0.209482141084727828012999174891714,
];
#[allow(clippy::excessive_precision)]
const WG: [f64; 4] = [
    0.129484966168869693270611432679082,
    0.279705391489276667901467771423780,
    0.381830050505118944950369775488975,
    0.417959183673469387755102040816327,
];

fn rescale_error(err: f64, res_abs: f64, res_asc: f64) -> f64 {
    let mut scaled = err.abs();
    if res_asc != 0.0 && scaled != 0.0 {
        let scale = (200.0 * scaled / res_asc).powf(1.5);
        scaled = if scale < 1.0 { res_asc * scale } else { res_asc };
    }
    if res_abs > f64::MIN_POSITIVE / (50.0 * f64::EPSILON) {
        scaled = scaled.max(50.0 * f64::EPSILON * res_abs);
    }
    scaled
}

/// One GK15 panel on `[a, b]`; returns (integral, error estimate).
pub(crate) fn gk15<F: Fn(f64) -> f64>(f: &F, a: f64, b: f64) -> (f64, f64) {
    let center = 0.5 * (a + b);
    let half = 0.5 * (b - a);
    let f_center = f(center);

    let mut fv1 = [0.0f64; 7];
    let mut fv2 = [0.0f64; 7];
    let mut res_gauss = 0.0;
    let mut res_kronrod = f_center * WGK[7];
    let mut res_abs = res_kronrod.abs();

    for (j, wg) in WG.iter().enumerate().take(3) {
        let jtw = j * 2 + 1;
        let dx = half * XGK[jtw];
        let f1 = f(center - dx);
        let f2 = f(center + dx);
        fv1[jtw] = f1;
        fv2[jtw] = f2;
        res_gauss += wg * (f1 + f2);
        res_kronrod += WGK[jtw] * (f1 + f2);
        res_abs += WGK[jtw] * (f1.abs() + f2.abs());
    }
    res_gauss += WG[3] * f_center;
    for j in 0..4 {
        let jtw = j * 2;
        if jtw >= 7 {
            break;
        }
        let dx = half * XGK[jtw];
        let f1 = f(center - dx);
        let f2 = f(center + dx);
        fv1[jtw] = f1;
        fv2[jtw] = f2;
        res_kronrod += WGK[jtw] * (f1 + f2);
        res_abs += WGK[jtw] * (f1.abs() + f2.abs());
    }

    let mean = res_kronrod * 0.5;
    let mut res_asc = WGK[7] * (f_center - mean).abs();
    for j in 0..7 {
        res_asc += WGK[j] * ((fv1[j] - mean).abs() + (fv2[j] - mean).abs());
    }

    let result = res_kronrod * half;
    res_abs *= half.abs();
    res_asc *= half.abs();
    let err = rescale_error((res_kronrod - res_gauss) * half, res_abs, res_asc);
    (result, err)
}

#[derive(PartialEq)]
struct Interval {
    a: f64,
    b: f64,
    value: f64,
    error: f64,
}

impl Eq for Interval {}
impl PartialOrd for Interval {
    fn partial_cmp(&self, other: &Self) -> Option<std::cmp::Ordering> {
        Some(self.cmp(other))
    }
}
impl Ord for Interval {
    fn cmp(&self, other: &Self) -> std::cmp::Ordering {
        self.error
            .partial_cmp(&other.error)
            .unwrap_or(std::cmp::Ordering::Equal)
    }
}

/// Globally adaptive GK15 on `[a, b]`: repeatedly bisects the interval with
/// the largest error estimate until `sum(err) <= max(abs_tol, rel_tol*|I|)`
/// or the subdivision budget is spent.
pub fn adaptive_gk<F: Fn(f64) -> f64>(f: &F, a: f64, b: f64, cfg: &QuadratureConfig) -> QuadResult {
    if a == b {
        return QuadResult {
            value: 0.0,
            abs_error: 0.0,
            converged: true,
        };
    }
    let (v0, e0) = gk15(f, a, b);
    let mut heap = BinaryHeap::new();
    heap.push(Interval {
        a,
        b,
        value: v0,
        error: e0,
    });
    let mut total_value = v0;
    let mut total_error = e0;

    for _ in 0..cfg.max_subdivisions {
        if total_error <= cfg.abs_tol.max(cfg.rel_tol * total_value.abs()) {
            return QuadResult {
                value: total_value,
                abs_error: total_error,
                converged: true,
            };
        }
        let worst = match heap.pop() {
            Some(w) => w,
            None => break,
        };
        let mid = 0.5 * (worst.a + worst.b);
        if mid <= worst.a || mid >= worst.b {
            // Interval no longer splittable at f64 resolution.
            heap.push(worst);
            break;
        }
        let (vl, el) = gk15(f, worst.a, mid);
        let (vr, er) = gk15(f, mid, worst.b);
        total_value += vl + vr - worst.value;
        total_error += el + er - worst.error;
        heap.push(Interval {
            a: worst.a,
            b: mid,
            value: vl,
            error: el,
        });
        heap.push(Interval {
            a: mid,
            b: worst.b,
            value: vr,
            error: er,
        });
    }

    let converged = total_error <= cfg.abs_tol.max(cfg.rel_tol * total_value.abs());
    QuadResult {
        value: total_value,
        abs_error: total_error,
        converged,
    }
}

/// Tanh-sinh quadrature on `[0, b]`.
///
/// Abscissas near the lower endpoint are produced as exact small offsets from
/// zero, so integrands like `x^a * g(x)` with `a > -1` are handled at full
/// accuracy. Refines the step by halving until two successive levels agree.
pub fn tanh_sinh<F: Fn(f64) -> f64>(f: &F, b: f64, cfg: &QuadratureConfig) -> QuadResult {
    const T_MAX: f64 = 6.0;
    const MAX_LEVEL: u32 = 12;
    let half = 0.5 * b;

    // weighted f summed over the points of step h at odd multiples only when
    // `refine` is set (level doubling re-uses previous evaluations).
    let sweep = |h: f64, refine: bool| -> f64 {
        let mut sum = 0.0;
        let mut j: u64 = if refine { 1 } else { 0 };
        let step: u64 = if refine { 2 } else { 1 };
        loop {
            let t = j as f64 * h;
            if t > T_MAX {
                break;
            }
            let u = std::f64::consts::FRAC_PI_2 * t.sinh();
            // 1 - tanh(u) = 2 e^{-2u} / (1 + e^{-2u}), stable for large u
            let e = (-2.0 * u).exp();
            let one_minus_tanh = 2.0 * e / (1.0 + e);
            let cosh_u = u.cosh();
            let w = std::f64::consts::FRAC_PI_2 * t.cosh() / (cosh_u * cosh_u);
            if w < 1e-320 || one_minus_tanh == 0.0 {
                break;
            }
            if j == 0 {
                let v = f(half);
                if v.is_finite() {
                    sum += w * v;
                }
            } else {
                // left-side point is an exact offset from 0: x = half*(1-tanh)
                let vl = f(half * one_minus_tanh);
                let vr = f(b - half * one_minus_tanh);
                if vl.is_finite() {
                    sum += w * vl;
                }
                if vr.is_finite() {
                    sum += w * vr;
                }
            }
            j += step;
        }
        sum
    };

    let mut h = 0.25;
    let mut acc = sweep(h, false);
    let mut value = acc * h * half;
    let mut prev = f64::INFINITY;
    for _level in 0..MAX_LEVEL {
        h *= 0.5;
        acc += sweep(h, true);
        let cur = acc * h * half;
        let diff = (cur - value).abs();
        if diff <= cfg.abs_tol.max(cfg.rel_tol * cur.abs()) && prev.is_finite() {
            return QuadResult {
                value: cur,
                abs_error: diff,
                converged: true,
            };
        }
        prev = value;
        value = cur;
    }
    QuadResult {
        value,
        abs_error: (value - prev).abs(),
        converged: false,
    }
}

/// Adaptive GK15 with a tanh-sinh fallback when the adaptive rule stalls.
/// Both integrators see the same integrand on `[0, b]`.
pub fn integrate_singular<F: Fn(f64) -> f64>(f: &F, b: f64, cfg: &QuadratureConfig) -> QuadResult {
    let gk = adaptive_gk(f, 0.0, b, cfg);
    if gk.converged {
        return gk;
    }
    let ts = tanh_sinh(f, b, cfg);
    if ts.converged || ts.abs_error < gk.abs_error {
        ts
    } else {
        gk
    }
}

/// Nodes and weights of the `n`-point Gauss-Legendre rule on `[-1, 1]`,
/// by Newton iteration on the Legendre recurrence.
pub fn gauss_legendre(n: usize) -> (Vec<f64>, Vec<f64>) {
    let mut nodes = vec![0.0; n];
    let mut weights = vec![0.0; n];
    let m = n.div_ceil(2);
    for i in 0..m {
        // Tricomi initial guess
        let mut x = (std::f64::consts::PI * (i as f64 + 0.75) / (n as f64 + 0.5)).cos();
        let mut dp = 0.0;
        for _ in 0..100 {
            let (mut p0, mut p1) = (1.0f64, x);
            for k in 2..=n {
                let kf = k as f64;
                let p2 = ((2.0 * kf - 1.0) * x * p1 - (kf - 1.0) * p0) / kf;
                p0 = p1;
                p1 = p2;
            }
            dp = n as f64 * (x * p1 - p0) / (x * x - 1.0);
            let dx = p1 / dp;
            x -= dx;
            if dx.abs() < 1e-15 {
                break;
            }
        }
        let w = 2.0 / ((1.0 - x * x) * dp * dp);
        nodes[i] = -x;
        nodes[n - 1 - i] = x;
        weights[i] = w;
        weights[n - 1 - i] = w;
    }
    if n % 2 == 1 {
        nodes[n / 2] = 0.0;
    }
    (nodes, weights)
}
