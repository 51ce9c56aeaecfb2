//! Periodicity detection for degree-one series through the window integral
//!
//! 𝓕(α,T) = α^{−1/2} ∫_{αT}^{2αT} F(1/2+it) e^{i t log(t/2πeα) − iπ/4} dt
//!
//! normalized by T^{1+iA}, plus the period/shift recovery and the
//! classification tools that act on coefficients.

pub mod classify;
pub mod oscillatory;
pub mod probe;

use crate::arith::source::{average_bound_report, coefficients};
use crate::continuation::{analytic_model, poly_value, Analytic};
use crate::error::{LabError, Result};
use crate::evaluator::{EvalParams, Evaluator};
use crate::gamma::{asymptotic_constants, AsymptoticConstants};
use crate::model::{degree_gate, DegreeClass, LFunctionSpec};
use crate::number::C64;
use oscillatory::{kernel_phase, panel_integral, window_integral};
use rayon::prelude::*;
use serde::Serialize;
use std::f64::consts::PI;

pub use classify::{classify_degree_one, classify_degree_zero, periodicity_test, ClassificationResult};
pub use probe::{primitivity_probe, ProbeReport};

/// Relative tolerance for CπQ² being an integer.
pub const INTEGRALITY_TOL: f64 = 1e-6;

/// How F(1/2+it) enters the window integral.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub enum WindowRoute {
    /// Closed-form head terms plus an Euler–Maclaurin tail; needs a
    /// polynomial-times-periodic continuation.
    Split,
    /// Adaptive quadrature of F from the continuation model.
    Continuation,
    /// Adaptive quadrature of F from the smoothed evaluator.
    Evaluator,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct WindowValue {
    pub value: C64,
    pub route: WindowRoute,
    /// Change of the quadrature part under one panel halving.
    pub quadrature_change: f64,
}

/// A from the gamma data: the closed form 2(ΣIm μ' − ΣIm μ) once the phase fit
/// confirms it to 1e−6, the fitted value otherwise.
pub fn recover_a(spec: &LFunctionSpec) -> Result<f64> {
    let c = asymptotic_constants(&spec.fe)?;
    Ok(if (c.a_const - c.derived.a).abs() <= 1e-6 { c.derived.a } else { c.a_const })
}

/// q = CπQ² with the fitted C, and whether it is an integer.
pub fn recover_q(spec: &LFunctionSpec) -> Result<(f64, bool)> {
    let c = asymptotic_constants(&spec.fe)?;
    let q = c.c_const * PI * spec.fe.q().powi(2);
    Ok((q, (q - q.round()).abs() <= INTEGRALITY_TOL * q.round().max(1.0) && q.round() >= 1.0))
}

fn check_preconditions(spec: &LFunctionSpec, t_big: f64, alpha: f64) -> Result<()> {
    match degree_gate(&spec.fe)? {
        DegreeClass::One => {}
        other => return Err(LabError::DegreeMismatch(format!("window integral needs degree 1, got {other:?}"))),
    }
    if spec.abscissa > 1.0 {
        return Err(LabError::Precondition(format!("abscissa {} exceeds 1", spec.abscissa)));
    }
    if t_big < 50.0 {
        return Err(LabError::Precondition(format!("T = {t_big} is below 50")));
    }
    if !(alpha > 0.0) {
        return Err(LabError::Invalid(format!("alpha = {alpha} must be positive")));
    }
    Ok(())
}

/// Split route: F = P(s)·Per(s) with Per = Σ_{n<M} + Euler–Maclaurin tail.
fn window_split(model: &Analytic, alpha: f64, t_big: f64) -> Result<WindowValue> {
    let (poly, per) = model
        .polynomial_times_periodic()
        .ok_or_else(|| LabError::NoContinuation("model is not a polynomial times a periodic series".into()))?;
    let (a, b) = (alpha * t_big, 2.0 * alpha * t_big);
    let zmax = (0.25 + b * b).sqrt() + per.shift.abs();
    let m = per.cutoff(zmax).max((1.5 * t_big / PI).ceil() as u64 + per.period);
    let mut head = C64::new(0.0, 0.0);
    for (d, p) in &poly {
        for n in 1..m {
            let c = per.residues[(n % per.period) as usize];
            if c == C64::new(0.0, 0.0) {
                continue;
            }
            let big_n = (*d * n) as f64;
            let h = p * c * C64::from_polar(1.0, per.shift * (n as f64).ln());
            head += h / big_n.sqrt() * window_integral(2.0 * PI * alpha * big_n, a, b)?;
        }
    }
    head *= C64::from_polar(1.0, -PI / 4.0);
    let d_max = poly.iter().map(|(d, _)| *d).max().unwrap_or(1) as f64;
    let lm = (m as f64).ln();
    let freq = |t: f64| ((t / (2.0 * PI * alpha)).ln() - lm).abs() + d_max.ln() + 1.0;
    let (tail, change) = panel_integral(
        |t| {
            let s = C64::new(0.5, t);
            Ok(poly_value(&poly, s) * per.tail(s, m)? * C64::from_polar(1.0, kernel_phase(t, alpha)))
        },
        a,
        b,
        |t| PI / freq(t),
    )?;
    Ok(WindowValue { value: (head + tail) / alpha.sqrt(), route: WindowRoute::Split, quadrature_change: change / alpha.sqrt() })
}

/// Quadrature of any F(1/2+it) over the window.
pub fn window_quadrature<F>(f: F, alpha: f64, t_big: f64, route: WindowRoute) -> Result<WindowValue>
where
    F: Fn(f64) -> Result<C64>,
{
    let (a, b) = (alpha * t_big, 2.0 * alpha * t_big);
    let width = |t: f64| PI / ((t / (2.0 * PI * alpha)).ln().abs() + (t / (2.0 * PI)).ln().max(0.0) + 1.0);
    let (v, change) = panel_integral(|t| Ok(f(t)? * C64::from_polar(1.0, kernel_phase(t, alpha))), a, b, width)?;
    Ok(WindowValue { value: v / alpha.sqrt(), route, quadrature_change: change / alpha.sqrt() })
}

/// 𝓕(α,T) by the requested route.
pub fn script_f(spec: &LFunctionSpec, alpha: f64, t_big: f64, route: WindowRoute, params: &EvalParams) -> Result<WindowValue> {
    check_preconditions(spec, t_big, alpha)?;
    match route {
        WindowRoute::Split => window_split(&analytic_model(&spec.coefficients)?, alpha, t_big),
        WindowRoute::Continuation => {
            let m = analytic_model(&spec.coefficients)?;
            window_quadrature(|t| m.value(C64::new(0.5, t)), alpha, t_big, route)
        }
        WindowRoute::Evaluator => {
            let ev = Evaluator::new(spec);
            window_quadrature(|t| Ok(ev.critical_value(t, params)?.value), alpha, t_big, route)
        }
    }
}

/// The preferred route for a spec: split when the continuation allows it.
pub fn default_route(spec: &LFunctionSpec) -> WindowRoute {
    match analytic_model(&spec.coefficients) {
        Ok(m) if m.polynomial_times_periodic().is_some() => WindowRoute::Split,
        _ => WindowRoute::Evaluator,
    }
}

/// 2π Σ_{T<2πn<2T} a_n e^{−2πinα}.
pub fn exp_sum_surrogate(spec: &LFunctionSpec, alpha: f64, t_big: f64) -> Result<C64> {
    let hi = (t_big / PI).ceil() as usize;
    let a = coefficients(&spec.coefficients, hi)?;
    let mut acc = C64::new(0.0, 0.0);
    for (n, c) in a.iter().enumerate().skip(1) {
        let x = 2.0 * PI * n as f64;
        if x > t_big && x < 2.0 * t_big {
            // e^{−2πinα} with the phase reduced before scaling.
            acc += c * C64::from_polar(1.0, -2.0 * PI * ((n as f64 * alpha) % 1.0));
        }
    }
    Ok(acc * 2.0 * PI)
}

/// lim 𝓕(α,T)/T^{1+iA}: nonzero only when qα is an integer m.
pub fn closed_form(spec: &LFunctionSpec, consts: &AsymptoticConstants, alpha: f64) -> Result<C64> {
    let q = consts.c_const * PI * spec.fe.q().powi(2);
    let m = q * alpha;
    if (m - m.round()).abs() > INTEGRALITY_TOL * m.round().max(1.0) || m.round() < 1.0 {
        return Ok(C64::new(0.0, 0.0));
    }
    let m = m.round() as usize;
    let am = coefficients(&spec.coefficients, m)?[m];
    let ia = C64::new(1.0, consts.a_const);
    let ratio = ((ia * 2f64.ln()).exp() - 1.0) / ia;
    Ok(spec.fe.omega
        * C64::from_polar(1.0, consts.b_const - PI / 4.0)
        * am.conj()
        * C64::from_polar(1.0, consts.a_const * alpha.ln())
        * ratio
        / q.sqrt())
}

fn normalizer(t_big: f64, a: f64) -> C64 {
    C64::from_polar(t_big, a * t_big.ln())
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Sample {
    pub alpha: f64,
    pub t: f64,
    /// The nearby T actually integrated.
    pub t_samples: Vec<f64>,
    /// Component-wise median of 𝓕(α,T')/T'^{1+iA} over the nearby T'.
    pub value: C64,
    pub closed_form: C64,
    pub gap: f64,
    /// Median of the surrogate divided by T'^{1+iA}.
    pub surrogate: C64,
    /// Largest quadrature change among the nearby T'.
    pub quadrature_change: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Convergence {
    pub alpha: f64,
    /// Log-log slope of the gap against T; `None` with fewer than two usable points.
    pub exponent: Option<f64>,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct DetectorResult {
    pub shift_a: f64,
    pub q_candidate: f64,
    pub q_is_integer: bool,
    pub closed_form: Vec<(f64, C64)>,
    pub samples: Vec<Sample>,
    pub convergence: Vec<Convergence>,
    pub route: WindowRoute,
    /// Σ_{n<X}|a_n|/√n exponent at X = 10⁴; above 0.75 the abscissa premise is doubtful.
    pub average_exponent: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct DetectOptions {
    /// Multipliers of T sampled around each grid value.
    pub t_factors: Vec<f64>,
    pub route: Option<WindowRoute>,
    pub params: EvalParams,
}

impl Default for DetectOptions {
    fn default() -> Self {
        DetectOptions { t_factors: vec![1.0, 1.01, 1.03], route: None, params: EvalParams::default() }
    }
}

fn median(mut v: Vec<f64>) -> f64 {
    v.sort_by(f64::total_cmp);
    let n = v.len();
    if n % 2 == 1 {
        v[n / 2]
    } else {
        0.5 * (v[n / 2 - 1] + v[n / 2])
    }
}

fn complex_median(v: &[C64]) -> C64 {
    C64::new(median(v.iter().map(|z| z.re).collect()), median(v.iter().map(|z| z.im).collect()))
}

/// One grid point: median normalized value over T·factors.
pub fn sample(spec: &LFunctionSpec, consts: &AsymptoticConstants, alpha: f64, t_big: f64, opts: &DetectOptions) -> Result<Sample> {
    if opts.t_factors.is_empty() {
        return Err(LabError::Invalid("no T factors".into()));
    }
    let route = opts.route.unwrap_or_else(|| default_route(spec));
    let cf = closed_form(spec, consts, alpha)?;
    let t_samples: Vec<f64> = opts.t_factors.iter().map(|f| t_big * f).collect();
    let mut values = Vec::new();
    let mut surrogates = Vec::new();
    let mut change = 0.0f64;
    for &t in &t_samples {
        let w = script_f(spec, alpha, t, route, &opts.params)?;
        let norm = normalizer(t, consts.a_const);
        values.push(w.value / norm);
        surrogates.push(exp_sum_surrogate(spec, alpha, t)? / norm);
        change = change.max(w.quadrature_change);
    }
    let value = complex_median(&values);
    Ok(Sample {
        alpha,
        t: t_big,
        t_samples,
        value,
        closed_form: cf,
        gap: (value - cf).norm(),
        surrogate: complex_median(&surrogates),
        quadrature_change: change,
    })
}

pub fn detect(spec: &LFunctionSpec, alphas: &[f64], ts: &[f64], opts: &DetectOptions) -> Result<DetectorResult> {
    let consts = asymptotic_constants(&spec.fe)?;
    let (q, is_int) = recover_q(spec)?;
    let route = opts.route.unwrap_or_else(|| default_route(spec));
    let grid: Vec<(f64, f64)> = alphas.iter().flat_map(|&a| ts.iter().map(move |&t| (a, t))).collect();
    let samples: Vec<Sample> =
        grid.par_iter().map(|&(a, t)| sample(spec, &consts, a, t, opts)).collect::<Result<Vec<_>>>()?;
    let mut convergence = Vec::new();
    for &a in alphas {
        let pts: Vec<(f64, f64)> =
            samples.iter().filter(|s| s.alpha == a && s.gap > 0.0).map(|s| (s.t, s.gap)).collect();
        let exponent = if pts.len() >= 2 {
            let (x, y): (Vec<f64>, Vec<f64>) = pts.into_iter().unzip();
            crate::fit::loglog_slope(&x, &y).ok()
        } else {
            None
        };
        convergence.push(Convergence { alpha: a, exponent });
    }
    let closed = alphas.iter().map(|&a| Ok((a, closed_form(spec, &consts, a)?))).collect::<Result<Vec<_>>>()?;
    let average_exponent = average_bound_report(&spec.coefficients, 1e4).map(|r| r.exponent).unwrap_or(f64::NAN);
    Ok(DetectorResult {
        shift_a: consts.a_const,
        q_candidate: q,
        q_is_integer: is_int,
        closed_form: closed,
        samples,
        convergence,
        route,
        average_exponent,
    })
}

/// CSV rows alpha, T, normalized value, closed form and gap.
pub fn detect_csv(r: &DetectorResult) -> String {
    let mut out = String::from("alpha,T,re_value,im_value,re_closed_form,im_closed_form,abs_gap\n");
    for s in &r.samples {
        out.push_str(&format!(
            "{},{},{},{},{},{},{}\n",
            s.alpha, s.t, s.value.re, s.value.im, s.closed_form.re, s.closed_form.im, s.gap
        ));
    }
    out
}
