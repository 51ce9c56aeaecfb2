//! Functional-equation data, series specifications, degree and validation.

use crate::arith::source::{coefficients, euler_bound_ratio, CoefficientSource};
use crate::error::{LabError, Result};
use crate::number::{CReal, Real, C64};
use serde::{Deserialize, Serialize};
use std::collections::BTreeSet;

/// One factor Γ(λs + μ).
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GammaFactor {
    pub lambda: Real,
    pub mu: CReal,
}

impl GammaFactor {
    pub fn new(lambda: Real, mu: CReal) -> Result<GammaFactor> {
        if !(lambda.value() > 0.0) {
            return Err(LabError::Invalid(format!("gamma factor scale must be positive, got {lambda}")));
        }
        Ok(GammaFactor { lambda, mu })
    }

    /// Γ(λs + μ) with rational λ = p/q and real rational μ.
    pub fn rational(lp: i128, lq: i128, mp: i128, mq: i128) -> GammaFactor {
        GammaFactor::new(Real::exact(lp, lq), CReal::real(Real::exact(mp, mq))).unwrap()
    }

    pub fn lambda_f64(&self) -> f64 {
        self.lambda.value()
    }

    pub fn mu_c64(&self) -> C64 {
        self.mu.value()
    }
}

/// A pole of F at `at` of the given order. `laurent` lists the principal part
/// coefficients c_{-order}, ..., c_{-1}.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Pole {
    pub at: C64,
    pub order: u32,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub laurent: Option<Vec<C64>>,
}

impl Pole {
    pub fn simple(at: C64, residue: C64) -> Pole {
        Pole { at, order: 1, laurent: Some(vec![residue]) }
    }
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(transparent)]
pub struct PoleSpec {
    pub entries: Vec<Pole>,
}

/// Q^s G(s) F(s) = ω · conj(Q^{1-s̄} G(1-s̄) F(1-s̄)).
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FunctionalEquation {
    #[serde(rename = "Q")]
    pub q_scale: Real,
    pub omega: C64,
    #[serde(default)]
    pub numerator: Vec<GammaFactor>,
    #[serde(default)]
    pub denominator: Vec<GammaFactor>,
    #[serde(default)]
    pub poles: PoleSpec,
}

impl FunctionalEquation {
    pub fn trivial() -> FunctionalEquation {
        FunctionalEquation {
            q_scale: Real::exact(1, 1),
            omega: C64::new(1.0, 0.0),
            numerator: vec![],
            denominator: vec![],
            poles: PoleSpec::default(),
        }
    }

    pub fn q(&self) -> f64 {
        self.q_scale.value()
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum ClassFlag {
    /// Re(-μ/λ) < 1/2 for every gamma factor on both sides.
    #[serde(rename = "P3'")]
    P3Prime,
    /// No denominator factors and Re μ ≥ 0.
    #[serde(rename = "P3''")]
    P3DoublePrime,
    /// Euler product with log coefficients bounded by C p^{kθ}.
    #[serde(rename = "P4")]
    P4,
    /// As P4 with θ < 1/2.
    #[serde(rename = "P4'")]
    P4Prime,
    /// Normalized leading coefficient a_1 = 1.
    #[serde(rename = "a1=1")]
    A1Normalized,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct LFunctionSpec {
    #[serde(default)]
    pub name: String,
    pub coefficients: CoefficientSource,
    pub fe: FunctionalEquation,
    pub abscissa: f64,
    #[serde(default)]
    pub flags: BTreeSet<ClassFlag>,
    /// Functional equations carrying an extra Dirichlet-series factor are not
    /// supported; any value here is reported by [`validate`].
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub dirichlet_factor: Option<serde_json::Value>,
}

impl LFunctionSpec {
    pub fn from_json(text: &str) -> Result<LFunctionSpec> {
        serde_json::from_str(text).map_err(|e| LabError::Parse(e.to_string()))
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("spec serializes")
    }

    pub fn degree(&self) -> Real {
        degree(&self.fe)
    }

    pub fn degree_f64(&self) -> f64 {
        degree(&self.fe).value()
    }

    /// The constant series 1: identity of the monoid.
    pub fn unit() -> LFunctionSpec {
        LFunctionSpec {
            name: "1".into(),
            coefficients: CoefficientSource::unit(),
            fe: FunctionalEquation::trivial(),
            abscissa: 0.5,
            flags: [ClassFlag::P3Prime, ClassFlag::P3DoublePrime, ClassFlag::A1Normalized].into_iter().collect(),
            dirichlet_factor: None,
        }
    }

    pub fn is_unit(&self) -> bool {
        self.coefficients == CoefficientSource::unit()
            && self.fe.numerator.is_empty()
            && self.fe.denominator.is_empty()
            && self.fe.poles.entries.is_empty()
            && (self.fe.q() - 1.0).abs() == 0.0
            && self.fe.omega == C64::new(1.0, 0.0)
    }
}

/// d = 2(Σλ_j − Σλ'_j), exact when every λ is exact.
pub fn degree(fe: &FunctionalEquation) -> Real {
    let mut acc = Real::exact(0, 1);
    for g in &fe.numerator {
        acc = acc.add(&g.lambda);
    }
    for g in &fe.denominator {
        acc = acc.add(&g.lambda.neg());
    }
    acc.mul(&Real::exact(2, 1))
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct Violation {
    pub code: String,
    pub message: String,
}

fn violation(code: &str, message: String) -> Violation {
    Violation { code: code.into(), message }
}

/// Checks the declared flags and the structural axioms. An empty list means valid.
pub fn validate(spec: &LFunctionSpec) -> Vec<Violation> {
    let mut out = Vec::new();
    let fe = &spec.fe;
    if (fe.omega.norm() - 1.0).abs() > 1e-12 {
        out.push(violation("unit-modulus", format!("|omega| = {} is not 1", fe.omega.norm())));
    }
    if !(fe.q() > 0.0) {
        out.push(violation("q-scale", format!("Q = {} must be positive", fe.q_scale)));
    }
    for g in fe.numerator.iter().chain(&fe.denominator) {
        if !(g.lambda_f64() > 0.0) {
            out.push(violation("lambda", format!("gamma scale {} must be positive", g.lambda)));
        }
    }
    if spec.flags.contains(&ClassFlag::P3Prime) {
        for g in fe.numerator.iter().chain(&fe.denominator) {
            let r = (-g.mu_c64() / g.lambda_f64()).re;
            if r >= 0.5 {
                out.push(violation(
                    "P3'",
                    format!("Re(-mu/lambda) = {r} for lambda = {}, mu = {:?} is not below 1/2", g.lambda, g.mu_c64()),
                ));
            }
        }
    }
    if spec.flags.contains(&ClassFlag::P3DoublePrime) {
        if !fe.denominator.is_empty() {
            out.push(violation("P3''", "denominator gamma factors present".into()));
        }
        for g in &fe.numerator {
            if g.mu_c64().re < 0.0 {
                out.push(violation("P3''", format!("Re(mu) = {} is negative", g.mu_c64().re)));
            }
        }
    }
    if !(spec.abscissa >= 0.5) {
        out.push(violation("abscissa", format!("abscissa {} is below 1/2", spec.abscissa)));
    }
    let poles = &fe.poles.entries;
    for (i, p) in poles.iter().enumerate() {
        if p.order == 0 {
            out.push(violation("pole-order", format!("pole at {:?} has order 0", p.at)));
        }
        if p.at.re > spec.abscissa + 1e-12 {
            out.push(violation("pole-abscissa", format!("pole at {:?} lies right of the abscissa {}", p.at, spec.abscissa)));
        }
        if let Some(l) = &p.laurent {
            if l.len() != p.order as usize {
                out.push(violation("pole-laurent", format!("pole at {:?}: {} Laurent coefficients for order {}", p.at, l.len(), p.order)));
            }
        }
        if poles[..i].iter().any(|q| (q.at - p.at).norm() < 1e-12) {
            out.push(violation("pole-duplicate", format!("pole at {:?} listed twice", p.at)));
        }
    }
    if spec.dirichlet_factor.is_some() {
        out.push(violation(
            "dirichlet-factor",
            "functional equations with an extra Dirichlet-series factor are not supported".into(),
        ));
    }
    let d = degree(fe).value();
    if d > 1e-12 && d < 1.0 - 1e-12 {
        out.push(violation("empty-degree", LabError::EmptyDegreeRange(d).to_string()));
    }
    let a1 = coefficients(&spec.coefficients, 1).map(|v| v[1]);
    match a1 {
        Ok(a1) => {
            if spec.coefficients.has_euler_data() && a1 == C64::new(0.0, 0.0) {
                out.push(violation("a1", "a_1 = 0 for a series with Euler data".into()));
            }
            if spec.flags.contains(&ClassFlag::A1Normalized) && (a1 - C64::new(1.0, 0.0)).norm() > 1e-12 {
                out.push(violation("a1", format!("flagged a_1 = 1 but a_1 = {a1}")));
            }
        }
        Err(e) => out.push(violation("coefficients", e.to_string())),
    }
    let wants_p4 = spec.flags.contains(&ClassFlag::P4) || spec.flags.contains(&ClassFlag::P4Prime);
    if wants_p4 {
        match &spec.coefficients {
            CoefficientSource::EulerProduct { theta, .. } => {
                if spec.flags.contains(&ClassFlag::P4Prime) && *theta >= 0.5 {
                    out.push(violation("P4'", format!("theta = {theta} is not below 1/2")));
                }
                match euler_bound_ratio(&spec.coefficients, 1000) {
                    Ok(r) if r > 1.0 + 1e-9 => {
                        out.push(violation("P4-bound", format!("|b_(p^k)| exceeds the declared bound by a factor {r}")))
                    }
                    Ok(_) => {}
                    Err(e) => out.push(violation("P4-bound", e.to_string())),
                }
            }
            _ => out.push(violation("P4", "Euler product flags need Euler data".into())),
        }
    }
    out
}

/// How the degree routes a spec through the lab.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub enum DegreeClass {
    /// d = 0: Dirichlet polynomials.
    Zero,
    /// d = 1: periodicity detection and classification.
    One,
    /// d ≥ 1 other than 1, or any degree outside the ranges above.
    Other(f64),
}

/// Rejects degrees strictly between 0 and 1.
pub fn degree_gate(fe: &FunctionalEquation) -> Result<DegreeClass> {
    let d = degree(fe);
    let exact_is = |k: i128| d.to_rat().map(|r| r == crate::number::Rat::from_integer(k));
    let v = d.value();
    if exact_is(0).unwrap_or(v.abs() < 1e-12) {
        return Ok(DegreeClass::Zero);
    }
    if exact_is(1).unwrap_or((v - 1.0).abs() < 1e-12) {
        return Ok(DegreeClass::One);
    }
    if v > 0.0 && v < 1.0 {
        return Err(LabError::EmptyDegreeRange(v));
    }
    Ok(DegreeClass::Other(v))
}

/// Product of two series: convolved coefficients, multiplied root numbers and
/// Q, concatenated gamma lists and merged poles.
pub fn monoid_product(a: &LFunctionSpec, b: &LFunctionSpec) -> LFunctionSpec {
    if a.is_unit() {
        return b.clone();
    }
    if b.is_unit() {
        return a.clone();
    }
    let coefficients = CoefficientSource::Convolution {
        left: Box::new(a.coefficients.clone()),
        right: Box::new(b.coefficients.clone()),
    };
    let mut poles: Vec<Pole> = Vec::new();
    for (mine, other) in [(a, b), (b, a)] {
        for p in &mine.fe.poles.entries {
            if let Some(existing) = poles.iter_mut().find(|q| (q.at - p.at).norm() < 1e-12) {
                existing.order += p.order;
                existing.laurent = None;
                continue;
            }
            let other_order: u32 = other
                .fe
                .poles
                .entries
                .iter()
                .filter(|q| (q.at - p.at).norm() < 1e-12)
                .map(|q| q.order)
                .sum();
            let laurent = if other_order == 0 && p.order == 1 {
                // Residue of the product: residue of one factor times the value of the other.
                p.laurent.as_ref().and_then(|l| {
                    crate::continuation::analytic_model(&other.coefficients)
                        .and_then(|m| m.value(p.at))
                        .ok()
                        .map(|v| vec![l[0] * v])
                })
            } else {
                None
            };
            poles.push(Pole { at: p.at, order: p.order, laurent });
        }
    }
    let flags: BTreeSet<ClassFlag> = a.flags.intersection(&b.flags).copied().collect();
    LFunctionSpec {
        name: format!("{}*{}", a.name, b.name),
        coefficients,
        fe: FunctionalEquation {
            q_scale: a.fe.q_scale.mul(&b.fe.q_scale),
            omega: a.fe.omega * b.fe.omega,
            numerator: a.fe.numerator.iter().chain(&b.fe.numerator).cloned().collect(),
            denominator: a.fe.denominator.iter().chain(&b.fe.denominator).cloned().collect(),
            poles: PoleSpec { entries: poles },
        },
        abscissa: a.abscissa.max(b.abscissa),
        flags: flags.into_iter().filter(|f| *f != ClassFlag::P4 && *f != ClassFlag::P4Prime).collect(),
        dirichlet_factor: None,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::corpus;
    use crate::number::Rat;

    fn fe_with(num: Vec<GammaFactor>, den: Vec<GammaFactor>) -> FunctionalEquation {
        FunctionalEquation { numerator: num, denominator: den, ..FunctionalEquation::trivial() }
    }

    #[test]
    fn degree_examples() {
        assert_eq!(degree(&corpus::zeta_fe()), Real::Exact(Rat::from_integer(1)));
        assert_eq!(degree(&FunctionalEquation::trivial()), Real::Exact(Rat::from_integer(0)));
        let fe = fe_with(
            vec![GammaFactor::rational(1, 1, 0, 1), GammaFactor::rational(1, 2, 0, 1)],
            vec![GammaFactor::rational(1, 2, 0, 1)],
        );
        assert_eq!(degree(&fe), Real::Exact(Rat::from_integer(2)));
        let float = fe_with(vec![GammaFactor::new(Real::Float(0.3), CReal::real(Real::Float(0.0))).unwrap()], vec![]);
        assert!(!degree(&float).is_exact());
    }

    #[test]
    fn gamma_factor_rejects_nonpositive_scale() {
        assert!(GammaFactor::new(Real::exact(0, 1), CReal::real(Real::exact(0, 1))).is_err());
        assert!(GammaFactor::new(Real::Float(-1.0), CReal::real(Real::exact(0, 1))).is_err());
    }

    fn codes(s: &LFunctionSpec) -> Vec<String> {
        validate(s).into_iter().map(|v| v.code).collect()
    }

    #[test]
    fn validate_examples() {
        assert!(validate(&corpus::zeta()).is_empty());
        let mut bad = corpus::zeta();
        bad.fe.omega = C64::new(2.0, 0.0);
        assert_eq!(codes(&bad), vec!["unit-modulus"]);
        let mut p3 = corpus::zeta();
        p3.flags = [ClassFlag::P3Prime].into_iter().collect();
        p3.fe.numerator = vec![GammaFactor::rational(1, 1, -1, 1)];
        assert!(codes(&p3).contains(&"P3'".to_string()));
        let mut p3pp = corpus::zeta();
        p3pp.fe.denominator = vec![GammaFactor::rational(1, 2, 0, 1)];
        assert!(codes(&p3pp).contains(&"P3''".to_string()));
        let mut p4 = corpus::zeta();
        if let CoefficientSource::EulerProduct { theta, .. } = &mut p4.coefficients {
            *theta = 0.5;
        }
        assert_eq!(codes(&p4), vec!["P4'"]);
        let mut low = corpus::zeta();
        low.abscissa = 0.4;
        assert!(codes(&low).contains(&"abscissa".to_string()));
        let mut pole = corpus::zeta();
        pole.fe.poles.entries.push(Pole::simple(C64::new(1.0, 0.0), C64::new(1.0, 0.0)));
        assert!(codes(&pole).contains(&"pole-duplicate".to_string()));
        let mut right = corpus::zeta();
        right.fe.poles.entries[0].at = C64::new(2.0, 0.0);
        assert!(codes(&right).contains(&"pole-abscissa".to_string()));
        let mut frac = corpus::zeta();
        frac.fe.numerator = vec![GammaFactor::rational(1, 4, 0, 1)];
        assert!(codes(&frac).contains(&"empty-degree".to_string()));
        let mut extra = corpus::zeta();
        extra.dirichlet_factor = Some(serde_json::json!({"kind": "explicit"}));
        assert_eq!(codes(&extra), vec!["dirichlet-factor"]);
        let mut a1 = corpus::zeta();
        a1.coefficients = CoefficientSource::Explicit { coeffs: vec![C64::new(2.0, 0.0)], terminates: true };
        a1.flags = [ClassFlag::A1Normalized].into_iter().collect();
        assert_eq!(codes(&a1), vec!["a1"]);
    }

    #[test]
    fn json_schema_accepts_rational_strings() {
        let text = r#"{
            "coefficients": {"kind": "euler_product", "factors": {"kind": "character", "modulus": 1, "index": 0}},
            "fe": {"Q": 0.5641895835477563, "omega": [1, 0],
                   "numerator": [{"lambda": "1/2", "mu": [0, 0]}],
                   "poles": [{"at": [1, 0], "order": 1, "laurent": [[1, 0]]}]},
            "abscissa": 1, "flags": ["P3''", "a1=1"]
        }"#;
        let s = LFunctionSpec::from_json(text).unwrap();
        assert_eq!(s.degree(), Real::Exact(Rat::from_integer(1)));
        assert!(validate(&s).is_empty());
        let unknown = text.replace("\"abscissa\"", "\"bogus\": 1, \"abscissa\"");
        assert!(LFunctionSpec::from_json(&unknown).is_err());
    }

    #[test]
    fn monoid_examples() {
        let zz = monoid_product(&corpus::zeta(), &corpus::zeta());
        assert_eq!(zz.degree(), Real::Exact(Rat::from_integer(2)));
        let d = coefficients(&zz.coefficients, 6).unwrap();
        assert_eq!(d[1..].iter().map(|c| c.re).collect::<Vec<_>>(), vec![1.0, 2.0, 2.0, 3.0, 2.0, 4.0]);
        assert_eq!(zz.fe.poles.entries.len(), 1);
        assert_eq!(zz.fe.poles.entries[0].order, 2);
        assert_eq!(monoid_product(&corpus::zeta(), &LFunctionSpec::unit()), corpus::zeta());
        assert_eq!(monoid_product(&LFunctionSpec::unit(), &corpus::zeta()), corpus::zeta());
        let lz = monoid_product(&corpus::l_chi4(), &corpus::zeta());
        assert_eq!(lz.degree(), Real::Exact(Rat::from_integer(2)));
        let a = coefficients(&lz.coefficients, 3).unwrap();
        assert_eq!((a[2].re, a[3].re), (1.0, 0.0));
        // Residue at 1 is L(1, χ₄) = π/4.
        let res = lz.fe.poles.entries[0].laurent.as_ref().unwrap()[0];
        assert!((res - C64::new(std::f64::consts::FRAC_PI_4, 0.0)).norm() < 1e-13);
        assert!((lz.fe.q() - corpus::zeta_fe().q() * corpus::l_chi4().fe.q()).abs() < 1e-15);
        assert!(validate(&lz).is_empty());
    }

    #[test]
    fn degree_gate_routes() {
        assert_eq!(degree_gate(&FunctionalEquation::trivial()).unwrap(), DegreeClass::Zero);
        assert_eq!(degree_gate(&corpus::zeta_fe()).unwrap(), DegreeClass::One);
        assert_eq!(degree_gate(&corpus::delta().fe).unwrap(), DegreeClass::Other(2.0));
        let frac = fe_with(vec![GammaFactor::rational(1, 3, 0, 1)], vec![]);
        let err = degree_gate(&frac).unwrap_err();
        assert!(matches!(err, LabError::EmptyDegreeRange(_)));
        assert!(err.to_string().contains("vertical line"));
    }

    #[test]
    fn degree_ignores_order_and_cancelling_pairs() {
        let a = GammaFactor::rational(1, 3, 1, 2);
        let b = GammaFactor::rational(5, 2, 0, 1);
        let c = GammaFactor::rational(7, 4, 1, 1);
        let fe1 = fe_with(vec![a.clone(), b.clone()], vec![]);
        let fe2 = fe_with(vec![b.clone(), a.clone(), c.clone()], vec![c]);
        assert_eq!(degree(&fe1), degree(&fe2));
    }
}
