//! F(s) from the smoothed sum Σ a_n e^{−n/X} n^{−s}, the residue term r₁ and
//! the contour term r₂ on Re w = −1 + η:
//!
//! F(s) = Σ a_n e^{−n/X} n^{−s} − r₁ − r₂,
//!
//! where r₁ sums the residues of F(s+w)X^wΓ(w) at the poles of F(s+w) right
//! of the line and r₂ = (1/2πi)∫ F(s+w)X^wΓ(w)dw along it. The contour value
//! F(s+w) is taken from the functional equation by default.

use crate::arith::source::coefficients;
use crate::continuation::{analytic_model, Analytic};
use crate::error::{LabError, Result};
use crate::gamma::{log_gamma, log_quotient_g, log_reflection_factor};
use crate::model::LFunctionSpec;
use crate::number::C64;
use crate::quadrature::gauss_legendre;
use serde::Serialize;
use std::f64::consts::PI;
use std::sync::Mutex;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub enum DualRoute {
    /// F(z) = ω Q^{1−2z} G̃(1−z)/G(z) · conj(F(1−z̄)) left of Re z = 1/2.
    Reflected,
    /// F(z) from the continuation model everywhere.
    Direct,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct EvalParams {
    /// Smoothing length; `None` means max(|t|, 2)^{4/3}.
    pub x: Option<f64>,
    pub eta: f64,
    /// Contour half-height; `None` picks it from the gamma decay.
    pub v_max: Option<f64>,
    /// Gauss–Legendre nodes per panel.
    pub quadrature_nodes: usize,
    pub route: DualRoute,
}

impl Default for EvalParams {
    fn default() -> Self {
        EvalParams { x: None, eta: 0.1, v_max: None, quadrature_nodes: 16, route: DualRoute::Reflected }
    }
}

impl EvalParams {
    pub fn x_for(&self, t: f64) -> f64 {
        self.x.unwrap_or_else(|| t.abs().max(2.0).powf(4.0 / 3.0))
    }

    pub fn check(&self) -> Result<()> {
        if !(self.eta > 0.0 && self.eta < 1.0) {
            return Err(LabError::Invalid(format!("eta = {} must lie in (0, 1)", self.eta)));
        }
        if let Some(x) = self.x {
            if !(x > 0.0) {
                return Err(LabError::Invalid(format!("X = {x} must be positive")));
            }
        }
        if self.quadrature_nodes < 2 {
            return Err(LabError::Invalid("at least two quadrature nodes per panel".into()));
        }
        Ok(())
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Evaluation {
    pub s: C64,
    pub value: C64,
    pub smoothed: C64,
    pub r1: C64,
    pub r2: C64,
    pub x: f64,
    pub terms: usize,
    pub v_max: f64,
    pub panels: usize,
}

pub struct Evaluator {
    pub spec: LFunctionSpec,
    model: Option<Analytic>,
    cache: Mutex<Vec<C64>>,
}

/// Relative agreement required between successive panel refinements.
const R2_TOL: f64 = 1e-12;

impl Evaluator {
    pub fn new(spec: &LFunctionSpec) -> Evaluator {
        Evaluator { spec: spec.clone(), model: analytic_model(&spec.coefficients).ok(), cache: Mutex::new(vec![]) }
    }

    pub fn has_continuation(&self) -> bool {
        self.model.is_some()
    }

    fn coeffs(&self, n: usize) -> Result<Vec<C64>> {
        let mut c = self.cache.lock().expect("coefficient cache");
        if c.len() < n + 1 {
            *c = coefficients(&self.spec.coefficients, n)?;
        }
        Ok(c[..=n].to_vec())
    }

    /// Σ a_n e^{−n/X} n^{−s} with N = ⌈X(35 + log X)⌉ terms.
    pub fn smoothed_sum(&self, s: C64, x: f64) -> Result<(C64, usize)> {
        let n = (x * (35.0 + x.ln().max(0.0))).ceil().max(1.0) as usize;
        let a = self.coeffs(n)?;
        let mut acc = C64::new(0.0, 0.0);
        for (k, c) in a.iter().enumerate().skip(1) {
            if *c != C64::new(0.0, 0.0) {
                let lk = (k as f64).ln();
                acc += c * (-(k as f64) / x - s * lk).exp();
            }
        }
        Ok((acc, n))
    }

    /// F(z) through the continuation model.
    pub fn direct_value(&self, z: C64) -> Result<C64> {
        match &self.model {
            Some(m) => m.value(z),
            None => self.series_value(z),
        }
    }

    /// Σ a_n n^{−z} where it converges fast enough to sum directly.
    fn series_value(&self, z: C64) -> Result<C64> {
        let excess = z.re - self.spec.abscissa;
        if excess < 1.0 {
            return Err(LabError::NoContinuation(format!(
                "{z} is too close to the abscissa {} for direct summation",
                self.spec.abscissa
            )));
        }
        // |a_n| n^{−abscissa} is treated as bounded; tail below 1e−15.
        let n = (1e15f64.powf(1.0 / excess)).ceil().min(crate::arith::source::N_MAX_CAP as f64) as usize;
        let a = self.coeffs(n)?;
        Ok(a.iter().enumerate().skip(1).map(|(k, c)| c * (-z * (k as f64).ln()).exp()).sum())
    }

    /// conj(F(1 − z̄)).
    fn dual_value(&self, z: C64) -> Result<C64> {
        let w = C64::new(1.0, 0.0) - z.conj();
        Ok(self.direct_value(w)?.conj())
    }

    /// F(z), reflected through the functional equation left of Re z = 1/2.
    pub fn continued_value(&self, z: C64, route: DualRoute) -> Result<C64> {
        if route == DualRoute::Direct || z.re >= 0.5 {
            return self.direct_value(z);
        }
        let fe = &self.spec.fe;
        let Some(log_gamma_ratio) = log_reflection_factor(fe, z)? else {
            return Ok(C64::new(0.0, 0.0));
        };
        let q = fe.q();
        let log_q = (1.0 - 2.0 * z) * q.ln();
        Ok(fe.omega * (log_q + log_gamma_ratio).exp() * self.dual_value(z)?)
    }

    /// Laurent coefficients c_{−order}..c_{−1} of a declared pole.
    fn laurent(&self, pole: &crate::model::Pole) -> Result<Vec<C64>> {
        if let Some(l) = &pole.laurent {
            return Ok(l.clone());
        }
        let Some(m) = &self.model else {
            return Err(LabError::MissingLaurentData(format!("{}", pole.at)));
        };
        if pole.order == 1 {
            return Ok(vec![m.residue(pole.at)?]);
        }
        // c_{−k} = (1/2πi)∮ F(s)(s−β)^{k−1} ds on a small circle.
        let rho = 0.05;
        let nodes = 64;
        let mut out = vec![C64::new(0.0, 0.0); pole.order as usize];
        for j in 0..nodes {
            let e = C64::from_polar(1.0, 2.0 * PI * j as f64 / nodes as f64);
            let f = m.value(pole.at + e * rho)?;
            for k in 1..=pole.order as usize {
                out[pole.order as usize - k] += f * (e * rho).powi(k as i32) / nodes as f64;
            }
        }
        Ok(out)
    }

    /// Σ residues of F(s+w)X^wΓ(w) at poles w₀ = β − s with Re w₀ > −1 + η.
    pub fn residue_term_r1(&self, s: C64, x: f64, eta: f64) -> Result<C64> {
        let mut acc = C64::new(0.0, 0.0);
        for p in &self.spec.fe.poles.entries {
            let w0 = p.at - s;
            let u = -1.0 + eta;
            if (w0.re - u).abs() < 1e-9 {
                return Err(LabError::ContourThroughPole(format!("pole {} sits on Re w = {u}", p.at)));
            }
            if w0.re < u {
                continue;
            }
            if w0.norm() < crate::gamma::SINGULARITY_TOL {
                return Err(LabError::Singularity(format!("{s} is a pole of F")));
            }
            let c = self.laurent(p)?;
            let g = |w: C64| -> Result<C64> { Ok((w * x.ln() + log_gamma(w)?).exp()) };
            if p.order == 1 {
                acc += c[0] * g(w0)?;
                continue;
            }
            // g^{(k−1)}(w₀)/(k−1)! by the Cauchy formula on a circle clear of Γ poles.
            let nearest = w0.re.round().min(0.0);
            let gap = (w0 - nearest).norm();
            let rho = (0.5 * gap).min(0.25);
            let nodes = 64;
            let order = p.order as usize;
            let mut taylor = vec![C64::new(0.0, 0.0); order];
            for j in 0..nodes {
                let e = C64::from_polar(1.0, 2.0 * PI * j as f64 / nodes as f64);
                let gv = g(w0 + e * rho)?;
                for (m, tm) in taylor.iter_mut().enumerate() {
                    *tm += gv * (e * rho).powi(-(m as i32)) / nodes as f64;
                }
            }
            for k in 1..=order {
                acc += c[order - k] * taylor[k - 1];
            }
        }
        Ok(acc)
    }

    fn default_v_max(&self, t: f64) -> f64 {
        let d = self.spec.degree_f64().abs();
        30.0 + 2.0 * d * (2.0 + t.abs()).ln() + 4.0
    }

    /// (1/2πi)∫_{Re w = −1+η} F(s+w)X^wΓ(w)dw truncated to |Im w| ≤ V.
    pub fn contour_term_r2(&self, s: C64, x: f64, params: &EvalParams) -> Result<(C64, f64, usize)> {
        let u = -1.0 + params.eta;
        for p in &self.spec.fe.poles.entries {
            if ((p.at - s).re - u).abs() < 1e-9 {
                return Err(LabError::ContourThroughPole(format!("pole {} sits on Re w = {u}", p.at)));
            }
        }
        let v_max = params.v_max.unwrap_or_else(|| self.default_v_max(s.im));
        let (nodes, weights) = gauss_legendre(params.quadrature_nodes);
        let lx = x.ln();
        let integrand = |v: f64| -> Result<C64> {
            let w = C64::new(u, v);
            let f = self.continued_value(s + w, params.route)?;
            Ok(f * (w * lx + log_gamma(w)?).exp())
        };
        let integrate = |panels: usize| -> Result<C64> {
            let h = 2.0 * v_max / panels as f64;
            let mut acc = C64::new(0.0, 0.0);
            for p in 0..panels {
                let mid = -v_max + (p as f64 + 0.5) * h;
                for (xi, wi) in nodes.iter().zip(&weights) {
                    acc += integrand(mid + 0.5 * h * xi)? * (wi * 0.5 * h);
                }
            }
            Ok(acc / (2.0 * PI))
        };
        let h0 = (4.0 / (lx.max(0.0) + (2.0 + s.im.abs()).ln() + 1.0)).min(1.0);
        let mut panels = ((2.0 * v_max / h0).ceil() as usize).max(2);
        let mut prev = integrate(panels)?;
        for _ in 0..6 {
            panels *= 2;
            let next = integrate(panels)?;
            if (next - prev).norm() <= R2_TOL * next.norm().max(1e-3) {
                return Ok((next, v_max, panels));
            }
            prev = next;
        }
        Err(LabError::NonConvergence(format!("contour integral at {s} did not settle after {panels} panels")))
    }

    /// F(s) for any s off the poles.
    pub fn value_at(&self, s: C64, params: &EvalParams) -> Result<Evaluation> {
        params.check()?;
        let x = params.x_for(s.im);
        let (smoothed, terms) = self.smoothed_sum(s, x)?;
        let r1 = self.residue_term_r1(s, x, params.eta)?;
        let (r2, v_max, panels) = self.contour_term_r2(s, x, params)?;
        Ok(Evaluation { s, value: smoothed - r1 - r2, smoothed, r1, r2, x, terms, v_max, panels })
    }

    pub fn critical_value(&self, t: f64, params: &EvalParams) -> Result<Evaluation> {
        self.value_at(C64::new(0.5, t), params)
    }

    /// Φ(s) = Q^s G(s) F(s) given F(s).
    pub fn completed(&self, s: C64, f: C64) -> Result<C64> {
        let fe = &self.spec.fe;
        Ok((s * fe.q().ln() + log_quotient_g(fe, s)?).exp() * f)
    }
}

/// K with |r₂| ≤ K (1+|t|)^{1−η} X^{−1+η} on the given evaluations.
pub fn r2_bound_constant(evals: &[Evaluation], eta: f64) -> f64 {
    evals
        .iter()
        .map(|e| e.r2.norm() / ((1.0 + e.s.im.abs()).powf(1.0 - eta) * e.x.powf(-1.0 + eta)))
        .fold(0.0, f64::max)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::corpus;

    fn close(a: C64, b: C64, tol: f64) -> bool {
        (a - b).norm() <= tol
    }

    #[test]
    fn smoothed_sum_examples() {
        let z = Evaluator::new(&corpus::zeta());
        // Oracle: direct mpmath summation at 30 digits.
        let (s, _) = z.smoothed_sum(C64::new(0.5, 0.0), 1e3).unwrap();
        assert!((s.re - 54.589765528650657284).abs() < 1e-9, "{s}");
        let mut zero = corpus::zeta();
        zero.coefficients = crate::arith::source::CoefficientSource::Explicit { coeffs: vec![], terminates: true };
        assert_eq!(Evaluator::new(&zero).smoothed_sum(C64::new(0.5, 3.0), 50.0).unwrap().0, C64::new(0.0, 0.0));
        let unit = Evaluator::new(&crate::model::LFunctionSpec::unit());
        let (u, _) = unit.smoothed_sum(C64::new(0.5, 3.0), 50.0).unwrap();
        assert!(close(u, C64::new((-1.0f64 / 50.0).exp(), 0.0), 1e-15));
    }

    #[test]
    fn r1_examples() {
        let z = Evaluator::new(&corpus::zeta());
        let r = z.residue_term_r1(C64::new(0.5, 0.0), 1e3, 0.1).unwrap();
        assert!((r.re - 56.049912163979286993).abs() < 1e-11);
        let r10 = z.residue_term_r1(C64::new(0.5, 10.0), 1e3, 0.1).unwrap();
        assert!(close(r10, C64::new(1.087716948883519191e-5, -4.938083894314763011e-6), 1e-17));
        let l = Evaluator::new(&corpus::l_chi4());
        assert_eq!(l.residue_term_r1(C64::new(0.5, 10.0), 1e3, 0.1).unwrap(), C64::new(0.0, 0.0));
    }

    #[test]
    fn unit_series_r2_closed_form() {
        let unit = Evaluator::new(&crate::model::LFunctionSpec::unit());
        for x in [3.0, 50.0, 1e3] {
            let p = EvalParams { x: Some(x), ..EvalParams::default() };
            let e = unit.critical_value(4.0, &p).unwrap();
            assert!(close(e.r2, C64::new((-1.0 / x).exp_m1(), 0.0), 1e-13), "X = {x}: {}", e.r2);
            assert!(close(e.value, C64::new(1.0, 0.0), 1e-13));
        }
    }

    #[test]
    fn critical_values_match_oracle() {
        let p = EvalParams::default();
        let z = Evaluator::new(&corpus::zeta());
        assert!((z.critical_value(0.0, &p).unwrap().value - C64::new(-1.4603545088095868, 0.0)).norm() < 1e-9);
        let l = Evaluator::new(&corpus::l_chi4());
        assert!((l.critical_value(0.0, &p).unwrap().value - C64::new(0.66769145718960918, 0.0)).norm() < 1e-9);
        let v = z.critical_value(10.0, &p).unwrap().value;
        assert!((v - C64::new(1.5448952202967528, -0.11533646527127338)).norm() < 1e-9);
        assert!(z.critical_value(14.134725141734695, &p).unwrap().value.norm() < 1e-8);
    }

    #[test]
    fn routes_agree() {
        let z = Evaluator::new(&corpus::zeta());
        let mut p = EvalParams::default();
        let a = z.critical_value(30.0, &p).unwrap();
        p.route = DualRoute::Direct;
        let b = z.critical_value(30.0, &p).unwrap();
        assert!((a.r2 - b.r2).norm() < 1e-12 && (a.value - b.value).norm() < 1e-10);
    }

    #[test]
    fn double_pole_uses_laurent_data_from_continuation() {
        let zz = Evaluator::new(&corpus::bundled("zeta_squared").unwrap());
        let v = zz.critical_value(10.0, &EvalParams::default()).unwrap().value;
        let want = C64::new(1.5448952202967528, -0.11533646527127338).powi(2);
        assert!((v - want).norm() < 1e-8, "{v} vs {want}");
        let mut bare = corpus::bundled("zeta_squared").unwrap();
        bare.coefficients = crate::arith::source::CoefficientSource::Explicit { coeffs: vec![C64::new(1.0, 0.0); 10], terminates: false };
        let e = Evaluator::new(&bare).residue_term_r1(C64::new(0.5, 0.0), 10.0, 0.1);
        assert!(matches!(e, Err(LabError::MissingLaurentData(_))));
    }

    #[test]
    fn parameter_checks() {
        let z = Evaluator::new(&corpus::zeta());
        let bad = EvalParams { eta: 1.0, ..EvalParams::default() };
        assert!(z.critical_value(1.0, &bad).is_err());
        assert!(matches!(z.value_at(C64::new(1.0, 0.0), &EvalParams::default()), Err(LabError::Singularity(_))));
        let through = EvalParams { eta: 0.5, ..EvalParams::default() };
        assert!(matches!(z.value_at(C64::new(1.5, 0.0), &through), Err(LabError::ContourThroughPole(_))));
    }
}
