//! Argument-principle zero counting in rectangles, zero localization and
//! comparison of zero sets.
//!
//! The phase of F itself is tracked along the boundary, so the winding number
//! is (zeros − poles) of F; poles of the continuation inside the rectangle
//! are known and added back to get the zero count.

use crate::continuation::{analytic_model, Analytic};
use crate::error::{LabError, Result};
use crate::evaluator::{EvalParams, Evaluator};
use crate::fit::least_squares;
use crate::model::{degree_gate, DegreeClass, LFunctionSpec};
use crate::number::C64;
use serde::Serialize;
use std::f64::consts::PI;

/// Largest phase change accepted between neighbouring boundary samples.
pub const MAX_PHASE_STEP: f64 = PI / 4.0;
/// Boundary values below this modulus trigger a nudge.
pub const DEGENERACY_MODULUS: f64 = 1e-8;
pub const NUDGE: f64 = 1e-3;
pub const ZERO_TOL: f64 = 1e-9;
/// |F₁| above this at a zero of F₂ marks a pole of F₁/F₂.
pub const COMPARE_THRESHOLD: f64 = 1e-4;

const MAX_BISECTIONS: u32 = 40;
const INITIAL_STEP: f64 = 0.25;

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct Rectangle {
    pub sigma_min: f64,
    pub sigma_max: f64,
    pub t_min: f64,
    pub t_max: f64,
}

impl Rectangle {
    pub fn new(sigma_min: f64, sigma_max: f64, t_min: f64, t_max: f64) -> Result<Rectangle> {
        if !(sigma_min < sigma_max && t_min < t_max) || ![sigma_min, sigma_max, t_min, t_max].iter().all(|x| x.is_finite()) {
            return Err(LabError::Invalid(format!("degenerate rectangle [{sigma_min}, {sigma_max}] × [{t_min}, {t_max}]")));
        }
        Ok(Rectangle { sigma_min, sigma_max, t_min, t_max })
    }

    fn contains(&self, z: C64) -> bool {
        z.re > self.sigma_min && z.re < self.sigma_max && z.im > self.t_min && z.im < self.t_max
    }

    fn on_boundary(&self, z: C64, tol: f64) -> bool {
        let inside = z.re >= self.sigma_min - tol && z.re <= self.sigma_max + tol && z.im >= self.t_min - tol && z.im <= self.t_max + tol;
        inside
            && ((z.re - self.sigma_min).abs() <= tol
                || (z.re - self.sigma_max).abs() <= tol
                || (z.im - self.t_min).abs() <= tol
                || (z.im - self.t_max).abs() <= tol)
    }

    fn corners(&self) -> [C64; 4] {
        [
            C64::new(self.sigma_min, self.t_min),
            C64::new(self.sigma_max, self.t_min),
            C64::new(self.sigma_max, self.t_max),
            C64::new(self.sigma_min, self.t_max),
        ]
    }

    fn diameter(&self) -> f64 {
        (self.sigma_max - self.sigma_min).hypot(self.t_max - self.t_min)
    }

    fn center(&self) -> C64 {
        C64::new(0.5 * (self.sigma_min + self.sigma_max), 0.5 * (self.t_min + self.t_max))
    }
}

/// F on the complex plane: the continuation when available, else the
/// smoothed evaluator.
pub enum ZeroFunction {
    Model(Analytic),
    Evaluated(Box<Evaluator>, EvalParams),
}

impl ZeroFunction {
    pub fn new(spec: &LFunctionSpec) -> ZeroFunction {
        match analytic_model(&spec.coefficients) {
            Ok(m) => ZeroFunction::Model(m),
            Err(_) => ZeroFunction::Evaluated(Box::new(Evaluator::new(spec)), EvalParams::default()),
        }
    }

    pub fn value(&self, s: C64) -> Result<C64> {
        match self {
            ZeroFunction::Model(m) => m.value(s),
            ZeroFunction::Evaluated(e, p) => Ok(e.value_at(s, p)?.value),
        }
    }

    pub fn poles(&self, spec: &LFunctionSpec) -> Vec<(C64, u32)> {
        match self {
            ZeroFunction::Model(m) => m.poles(),
            ZeroFunction::Evaluated(..) => spec.fe.poles.entries.iter().map(|p| (p.at, p.order)).collect(),
        }
    }
}

enum Degenerate {
    /// Index of the offending edge (bottom, right, top, left).
    Edge(usize),
    Fatal(LabError),
}

fn usable(v: C64) -> bool {
    v.re.is_finite() && v.im.is_finite() && v.norm() >= DEGENERACY_MODULUS
}

fn wrap(d: f64) -> f64 {
    let mut d = d % (2.0 * PI);
    if d > PI {
        d -= 2.0 * PI;
    } else if d < -PI {
        d += 2.0 * PI;
    }
    d
}

/// Phase change of F along the segment a → b. The midpoint is always sampled:
/// both half steps must stay within π/4 and F must be close to linear, which
/// catches segments passing near a multiple zero (phase turning by ≈ 2π).
fn segment_phase(f: &ZeroFunction, a: C64, fa: C64, b: C64, fb: C64, depth: u32) -> std::result::Result<f64, ()> {
    let m = 0.5 * (a + b);
    let fm = f.value(m).map_err(|_| ())?;
    if !usable(fm) {
        return Err(());
    }
    let d1 = wrap(fm.arg() - fa.arg());
    let d2 = wrap(fb.arg() - fm.arg());
    let linear = (fm - 0.5 * (fa + fb)).norm() <= 0.5 * fa.norm().min(fb.norm());
    if d1.abs() <= MAX_PHASE_STEP && d2.abs() <= MAX_PHASE_STEP && linear {
        return Ok(d1 + d2);
    }
    if depth >= MAX_BISECTIONS {
        return Err(());
    }
    Ok(segment_phase(f, a, fa, m, fm, depth + 1)? + segment_phase(f, m, fm, b, fb, depth + 1)?)
}

/// Winding of F around the rectangle boundary (counter-clockwise).
fn winding_once(f: &ZeroFunction, r: &Rectangle) -> std::result::Result<f64, Degenerate> {
    let c = r.corners();
    let mut total = 0.0;
    for e in 0..4 {
        let (a, b) = (c[e], c[(e + 1) % 4]);
        let n = (((b - a).norm() / INITIAL_STEP).ceil() as usize).max(2);
        let mut prev = a;
        let mut fprev = match f.value(a) {
            Ok(v) if usable(v) => v,
            Ok(_) | Err(LabError::Singularity(_)) | Err(LabError::ContourThroughPole(_)) => return Err(Degenerate::Edge(e)),
            Err(err) => return Err(Degenerate::Fatal(err)),
        };
        for k in 1..=n {
            let z = a + (b - a) * (k as f64 / n as f64);
            let fz = match f.value(z) {
                Ok(v) if usable(v) => v,
                Ok(_) | Err(LabError::Singularity(_)) | Err(LabError::ContourThroughPole(_)) => return Err(Degenerate::Edge(e)),
                Err(err) => return Err(Degenerate::Fatal(err)),
            };
            total += segment_phase(f, prev, fprev, z, fz, 0).map_err(|_| Degenerate::Edge(e))?;
            prev = z;
            fprev = fz;
        }
    }
    Ok(total / (2.0 * PI))
}

/// Pulls edge `e` inward by `NUDGE`, or 1% of the side on small rectangles.
fn nudged(r: &Rectangle, e: usize) -> Rectangle {
    let mut r = *r;
    let h = NUDGE.min(0.01 * (r.sigma_max - r.sigma_min).min(r.t_max - r.t_min));
    match e {
        0 => r.t_min += h,
        1 => r.sigma_max -= h,
        2 => r.t_max -= h,
        _ => r.sigma_min += h,
    }
    r
}

/// Winding number with automatic nudging; returns the rectangle actually used.
pub fn winding_number(f: &ZeroFunction, r: &Rectangle) -> Result<(i64, Rectangle)> {
    let mut cur = *r;
    let mut moved = [false; 4];
    loop {
        match winding_once(f, &cur) {
            Ok(w) => {
                let k = w.round();
                if (w - k).abs() > 0.25 {
                    return Err(LabError::BoundaryDegeneracy(format!("winding {w} is not near an integer")));
                }
                return Ok((k as i64, cur));
            }
            Err(Degenerate::Fatal(e)) => return Err(e),
            Err(Degenerate::Edge(e)) => {
                if moved[e] {
                    return Err(LabError::BoundaryDegeneracy(format!("edge {e} of {cur:?} stays degenerate after nudging")));
                }
                moved[e] = true;
                cur = nudged(&cur, e);
                if cur.sigma_min >= cur.sigma_max || cur.t_min >= cur.t_max {
                    return Err(LabError::BoundaryDegeneracy("rectangle collapsed while nudging".into()));
                }
            }
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Zero {
    pub location: C64,
    pub multiplicity: u32,
    /// Size of the last Newton correction.
    pub refinement_error: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ZeroReport {
    /// The rectangle after any boundary nudge.
    pub rectangle: Rectangle,
    pub nudged: bool,
    /// Winding number of F: zeros minus poles, with multiplicity.
    pub count: i64,
    /// Poles of F inside, with order.
    pub poles: Vec<(C64, u32)>,
    pub zero_count: i64,
    pub zeros: Vec<Zero>,
}

fn poles_inside(poles: &[(C64, u32)], r: &Rectangle) -> i64 {
    poles.iter().filter(|(p, _)| r.contains(*p)).map(|(_, o)| *o as i64).sum()
}

/// Modified Newton for a zero of multiplicity m, derivative by central differences.
/// A zero of multiplicity m > 1 is only determined to about ε^{1/m}, so there
/// the smallest step reached is accepted once below 1e−7.
fn newton(f: &ZeroFunction, z0: C64, m: u32, r: &Rectangle) -> Option<(C64, f64)> {
    let mut z = z0;
    let h = 1e-6;
    let mut best: Option<(C64, f64)> = None;
    for _ in 0..60 {
        let fz = f.value(z).ok()?;
        if fz == C64::new(0.0, 0.0) {
            return Some((z, 0.0));
        }
        let d = (f.value(z + h).ok()? - f.value(z - h).ok()?) / (2.0 * h);
        if d == C64::new(0.0, 0.0) || !d.re.is_finite() {
            break;
        }
        let step = fz / d * m as f64;
        z -= step;
        if !r.contains(z) {
            return None;
        }
        let e = step.norm();
        if e < ZERO_TOL {
            return Some((z, e));
        }
        if best.map_or(true, |b| e < b.1) {
            best = Some((z, e));
        }
    }
    best.filter(|b| m > 1 && b.1 < 1e-7)
}

fn split(r: &Rectangle, poles: &[(C64, u32)]) -> (Rectangle, Rectangle) {
    // Off-centre split lines keep away from symmetric zero configurations.
    for frac in [0.4871, 0.5318, 0.4452, 0.5707] {
        let (a, b) = if r.t_max - r.t_min >= r.sigma_max - r.sigma_min {
            let m = r.t_min + frac * (r.t_max - r.t_min);
            (Rectangle { t_max: m, ..*r }, Rectangle { t_min: m, ..*r })
        } else {
            let m = r.sigma_min + frac * (r.sigma_max - r.sigma_min);
            (Rectangle { sigma_max: m, ..*r }, Rectangle { sigma_min: m, ..*r })
        };
        let tol = 1e-3 * r.diameter();
        if poles.iter().all(|(p, _)| !a.on_boundary(*p, tol) && !b.on_boundary(*p, tol)) {
            return (a, b);
        }
    }
    let m = r.t_min + 0.5 * (r.t_max - r.t_min);
    (Rectangle { t_max: m, ..*r }, Rectangle { t_min: m, ..*r })
}

fn locate(f: &ZeroFunction, r: &Rectangle, zeros_inside: i64, poles: &[(C64, u32)], depth: u32, out: &mut Vec<Zero>) -> Result<()> {
    if zeros_inside <= 0 {
        return Ok(());
    }
    let has_pole = poles_inside(poles, r) > 0;
    let k = zeros_inside as u32;
    if !has_pole && (k == 1 || r.diameter() < 0.5) {
        if let Some((z, err)) = newton(f, r.center(), k, r) {
            // A multiple zero must account for the whole count of a small box.
            let box_ok = k == 1 || {
                let b = Rectangle { sigma_min: z.re - 1e-3, sigma_max: z.re + 1e-3, t_min: z.im - 1e-3, t_max: z.im + 1e-3 };
                matches!(winding_number(f, &b), Ok((w, _)) if w == zeros_inside)
            };
            if box_ok {
                out.push(Zero { location: z, multiplicity: k, refinement_error: err });
                return Ok(());
            }
        }
        if r.diameter() < 1e-6 {
            return Err(LabError::NonConvergence(format!("zero refinement failed near {}", r.center())));
        }
    }
    if depth > 60 {
        return Err(LabError::NonConvergence("zero localization exceeded its subdivision depth".into()));
    }
    let (a, b) = split(r, poles);
    let (wa, ra) = winding_number(f, &a)?;
    let za = wa + poles_inside(poles, &ra);
    locate(f, &ra, za, poles, depth + 1, out)?;
    let (wb, rb) = winding_number(f, &b)?;
    let zb = wb + poles_inside(poles, &rb);
    locate(f, &rb, zb, poles, depth + 1, out)
}

fn report(f: &ZeroFunction, spec: &LFunctionSpec, r: &Rectangle, localize: bool) -> Result<ZeroReport> {
    let poles = f.poles(spec);
    let (count, used) = winding_number(f, r)?;
    let inside: Vec<(C64, u32)> = poles.iter().copied().filter(|(p, _)| used.contains(*p)).collect();
    let zero_count = count + inside.iter().map(|(_, o)| *o as i64).sum::<i64>();
    let mut zeros = Vec::new();
    if localize {
        locate(f, &used, zero_count, &poles, 0, &mut zeros)?;
        zeros.sort_by(|a, b| a.location.im.total_cmp(&b.location.im).then(a.location.re.total_cmp(&b.location.re)));
    }
    Ok(ZeroReport { rectangle: used, nudged: used != *r, count, poles: inside, zero_count, zeros })
}

fn check_degree(spec: &LFunctionSpec) -> Result<()> {
    degree_gate(&spec.fe).map(|_| ())
}

/// Counts and localizes the zeros of F in the rectangle.
pub fn count_zeros(spec: &LFunctionSpec, r: &Rectangle) -> Result<ZeroReport> {
    check_degree(spec)?;
    report(&ZeroFunction::new(spec), spec, r, true)
}

/// Winding-based count only, without localization.
pub fn count_only(spec: &LFunctionSpec, r: &Rectangle) -> Result<ZeroReport> {
    check_degree(spec)?;
    report(&ZeroFunction::new(spec), spec, r, false)
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct UnmatchedZero {
    pub zero: Zero,
    pub f1_abs: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ComparisonReport {
    pub rectangle: Rectangle,
    pub zeros_f2: Vec<Zero>,
    /// Zeros of F₂ where |F₁| exceeds the threshold: poles of F₁/F₂.
    pub unmatched: Vec<UnmatchedZero>,
    pub threshold: f64,
    /// d_F = degree₁ − degree₂.
    pub quotient_degree: f64,
    /// 0 ≤ d_F ≤ 1, the range where a quotient with finitely many poles is excluded.
    pub degree_in_unit_range: bool,
    pub note: String,
}

pub fn compare_zero_sets(spec1: &LFunctionSpec, spec2: &LFunctionSpec, r: &Rectangle, threshold: f64) -> Result<ComparisonReport> {
    check_degree(spec1)?;
    let f1 = ZeroFunction::new(spec1);
    let rep = count_zeros(spec2, r)?;
    let mut unmatched = Vec::new();
    for z in &rep.zeros {
        let v = f1.value(z.location)?.norm();
        if v > threshold {
            unmatched.push(UnmatchedZero { zero: z.clone(), f1_abs: v });
        }
    }
    let d = spec1.degree_f64() - spec2.degree_f64();
    let in_range = (-1e-12..=1.0 + 1e-12).contains(&d);
    let note = if unmatched.is_empty() {
        "every located zero of F2 is also a zero of F1; the quotient has no poles here".to_string()
    } else {
        format!("{} zero(s) of F2 are not zeros of F1 and give poles of F1/F2", unmatched.len())
    };
    Ok(ComparisonReport {
        rectangle: rep.rectangle,
        zeros_f2: rep.zeros,
        unmatched,
        threshold,
        quotient_degree: d,
        degree_in_unit_range: in_range,
        note,
    })
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct CountingFit {
    pub degree: f64,
    pub sigma_min: f64,
    pub sigma_max: f64,
    pub ts: Vec<f64>,
    pub counts: Vec<i64>,
    /// N(T) ≈ (d/2π) T log T + c₁ T + c₂.
    pub c1: f64,
    pub c2: f64,
    pub residuals: Vec<f64>,
    /// d = 0: the main term vanishes and the count is fitted linearly.
    pub degree_zero_regime: bool,
}

/// Zero counts on (σ_min, σ_max) × (0, T) fitted against the main term.
pub fn counting_asymptotic_check(spec: &LFunctionSpec, ts: &[f64], sigma_min: f64, sigma_max: f64) -> Result<CountingFit> {
    let class = degree_gate(&spec.fe)?;
    if ts.len() < 2 {
        return Err(LabError::Invalid("need at least two T values".into()));
    }
    let d = spec.degree_f64();
    let f = ZeroFunction::new(spec);
    let mut counts = Vec::new();
    for &t in ts {
        counts.push(report(&f, spec, &Rectangle::new(sigma_min, sigma_max, 0.0, t)?, false)?.zero_count);
    }
    let main = |t: f64| d / (2.0 * PI) * t * t.ln();
    let rows: Vec<Vec<f64>> = ts.iter().map(|&t| vec![t, 1.0]).collect();
    let y: Vec<f64> = ts.iter().zip(&counts).map(|(&t, &n)| n as f64 - main(t)).collect();
    let (c, _) = least_squares(&rows, &y)?;
    let residuals = ts.iter().zip(&y).map(|(&t, yy)| yy - c[0] * t - c[1]).collect();
    Ok(CountingFit {
        degree: d,
        sigma_min,
        sigma_max,
        ts: ts.to_vec(),
        counts,
        c1: c[0],
        c2: c[1],
        residuals,
        degree_zero_regime: class == DegreeClass::Zero,
    })
}

/// CSV of located zeros: re, im, multiplicity, refinement error.
pub fn zeros_csv(zeros: &[Zero]) -> String {
    let mut out = String::from("re,im,multiplicity,refinement_error\n");
    for z in zeros {
        out.push_str(&format!("{},{},{},{:e}\n", z.location.re, z.location.im, z.multiplicity, z.refinement_error));
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::arith::source::CoefficientSource;
    use crate::corpus;

    fn strip(t0: f64, t1: f64) -> Rectangle {
        Rectangle::new(0.0, 1.0, t0, t1).unwrap()
    }

    #[test]
    fn zeta_counts() {
        let z = corpus::zeta();
        let r = count_zeros(&z, &strip(0.0, 50.0)).unwrap();
        assert_eq!(r.zero_count, 10);
        assert!(r.nudged);
        // Imaginary parts of the first zeros (mpmath zetazero).
        let known = [14.134725141734693790, 21.022039638771554993, 25.010857580145688763, 30.424876125859513210];
        for (z, k) in r.zeros.iter().zip(known) {
            assert!((z.location.im - k).abs() < 1e-8 && (z.location.re - 0.5).abs() < 1e-8, "{z:?}");
        }
        assert_eq!(count_only(&z, &Rectangle::new(0.6, 0.9, 10.0, 20.0).unwrap()).unwrap().zero_count, 0);
    }

    #[test]
    fn degenerate_rectangle() {
        assert!(matches!(Rectangle::new(0.0, 1.0, 5.0, 5.0), Err(LabError::Invalid(_))));
    }

    #[test]
    fn pole_inside_is_added_back() {
        let r = count_only(&corpus::zeta(), &Rectangle::new(0.5, 1.5, -1.0, 1.0).unwrap()).unwrap();
        assert_eq!((r.count, r.zero_count), (-1, 0));
    }

    #[test]
    fn conjugate_symmetry() {
        let z = corpus::zeta();
        let a = count_only(&z, &strip(10.0, 40.0)).unwrap().zero_count;
        let b = count_only(&z, &strip(-40.0, -10.0)).unwrap().zero_count;
        assert_eq!(a, b);
    }

    #[test]
    fn double_zero_of_zeta_squared() {
        let z2 = corpus::bundled("zeta_squared").unwrap();
        let r = count_zeros(&z2, &strip(10.0, 22.0)).unwrap();
        assert_eq!(r.zero_count, 4);
        assert_eq!(r.zeros.len(), 2);
        assert!(r.zeros.iter().all(|z| z.multiplicity == 2), "{:?}", r.zeros);
        assert!((r.zeros[0].location.im - 14.134725141734693790).abs() < 1e-6);
    }

    #[test]
    fn compare_examples() {
        let z = corpus::zeta();
        let l = corpus::l_chi4();
        let c = compare_zero_sets(&z, &l, &strip(0.0, 30.0), COMPARE_THRESHOLD).unwrap();
        assert!(!c.zeros_f2.is_empty());
        // First zero of L(s, χ₄) (mpmath).
        assert!((c.zeros_f2[0].location.im - 6.0209489046975965).abs() < 1e-8, "{:?}", c.zeros_f2[0]);
        assert_eq!(c.unmatched.len(), c.zeros_f2.len());
        assert!(c.unmatched.iter().all(|u| u.f1_abs > 1e-2));
        let same = compare_zero_sets(&z, &z, &strip(0.0, 30.0), COMPARE_THRESHOLD).unwrap();
        assert!(same.unmatched.is_empty());
        let z2 = corpus::bundled("zeta_squared").unwrap();
        let sq = compare_zero_sets(&z2, &z, &strip(0.0, 30.0), COMPARE_THRESHOLD).unwrap();
        assert!(sq.unmatched.is_empty());
        assert_eq!(sq.quotient_degree, 1.0);
        assert!(sq.degree_in_unit_range);
    }

    #[test]
    fn degree_zero_polynomial_zeros() {
        // 1 − 2^{−s} vanishes at s = 2πik/log 2.
        let mut spec = LFunctionSpec::unit();
        spec.coefficients = CoefficientSource::Explicit { coeffs: vec![C64::new(1.0, 0.0), C64::new(-1.0, 0.0)], terminates: true };
        let r = count_zeros(&spec, &Rectangle::new(-0.5, 0.5, 1.0, 30.0).unwrap()).unwrap();
        let step = 2.0 * PI / 2f64.ln();
        assert_eq!(r.zero_count, 3);
        for (k, z) in r.zeros.iter().enumerate() {
            assert!((z.location - C64::new(0.0, step * (k + 1) as f64)).norm() < 1e-9);
        }
        let fit = counting_asymptotic_check(&spec, &[20.0, 40.0, 60.0, 80.0], -0.5, 0.5).unwrap();
        assert!(fit.degree_zero_regime);
        assert!((fit.c1 - 1.0 / step).abs() < 0.02, "{fit:?}");
    }
}
