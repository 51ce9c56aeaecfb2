//! Periodicity of a_n n^{−iA} and the resulting decomposition
//! F(s) = Σ_χ P_χ(s) L(s − iA, χ*), plus the degree-zero classifier.

use crate::arith::characters::{character_group, DirichletCharacter};
use crate::arith::primes::{divisors, euler_phi, factorize, gcd, lcm};
use crate::arith::source::{coefficients, CoefficientSource};
use crate::error::{LabError, Result};
use crate::gamma::log_quotient_g;
use crate::gamma_sets::{degree_zero_shape_check, ShapeCheck};
use crate::model::{degree_gate, DegreeClass, LFunctionSpec};
use crate::number::C64;
use serde::Serialize;
use std::collections::BTreeMap;

/// Deviation below which a sequence counts as periodic.
pub const PERIODICITY_TOL: f64 = 1e-9;
/// Coefficients of P_χ below this are dropped.
const DROP_TOL: f64 = 1e-13;

fn twisted(a: &[C64], shift: f64) -> Vec<C64> {
    a.iter()
        .enumerate()
        .map(|(n, c)| if n == 0 { *c } else { c * C64::from_polar(1.0, -shift * (n as f64).ln()) })
        .collect()
}

/// Max |a_{n+q}(n+q)^{−iA} − a_n n^{−iA}| over n ≤ horizon − q.
pub fn periodicity_test(src: &CoefficientSource, shift: f64, q: u64, horizon: usize) -> Result<(bool, f64)> {
    if q == 0 {
        return Err(LabError::Invalid("period must be positive".into()));
    }
    if (horizon as u64) < 10 * q {
        return Err(LabError::Precondition(format!("horizon {horizon} is below 10q = {}", 10 * q)));
    }
    let b = twisted(&coefficients(src, horizon)?, shift);
    let q = q as usize;
    let dev = (1..=horizon - q).map(|n| (b[n + q] - b[n]).norm()).fold(0.0, f64::max);
    Ok((dev <= PERIODICITY_TOL, dev))
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct CharacterRef {
    pub modulus: u64,
    pub index: u64,
}

impl CharacterRef {
    fn of(c: &DirichletCharacter) -> CharacterRef {
        CharacterRef { modulus: c.modulus, index: c.index }
    }

    pub fn character(&self) -> Result<DirichletCharacter> {
        DirichletCharacter::new(self.modulus, self.index)
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Component {
    /// χ mod q.
    pub character: CharacterRef,
    /// The primitive χ* inducing χ.
    pub primitive: CharacterRef,
    /// P_χ(s) = Σ p_n n^{−s} as (n, p_n).
    pub polynomial: Vec<(u64, C64)>,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ClassificationResult {
    pub shift_a: f64,
    pub period_q: u64,
    pub decomposition: Vec<Component>,
    /// Max |a_n − reconstruction| over n ≤ horizon.
    pub residual: f64,
    pub horizon: usize,
    /// Every P_χ is supported on divisors of q.
    pub support_ok: bool,
}

/// a_n = Σ_χ Σ_{km=n} p_k χ*(m) m^{iA}.
pub fn reconstruct(r: &ClassificationResult, n_max: usize) -> Result<Vec<C64>> {
    let mut out = vec![C64::new(0.0, 0.0); n_max + 1];
    for comp in &r.decomposition {
        let star = comp.primitive.character()?;
        for (k, p) in &comp.polynomial {
            let k = *k as usize;
            for m in 1..=n_max / k.max(1) {
                let c = star.value(m as u64);
                if c != C64::new(0.0, 0.0) {
                    out[k * m] += p * c * C64::from_polar(1.0, r.shift_a * (m as f64).ln());
                }
            }
        }
    }
    Ok(out)
}

/// Decomposes a periodic n ↦ a_n n^{−iA} over characters.
pub fn classify_degree_one(src: &CoefficientSource, shift: f64, q: u64, horizon: usize) -> Result<ClassificationResult> {
    let (ok, dev) = periodicity_test(src, shift, q, horizon)?;
    if !ok {
        return Err(LabError::Precondition(format!("a_n n^(-iA) is not periodic mod {q} (deviation {dev:.3e})")));
    }
    let a = coefficients(src, horizon)?;
    let b = twisted(&a, shift);
    // Keyed by the primitive character (conductor, index): polynomial in w = s − iA.
    let mut parts: BTreeMap<(u64, u64), BTreeMap<u64, C64>> = BTreeMap::new();
    for d in divisors(q) {
        let m = q / d;
        let phi = euler_phi(m) as f64;
        for psi in character_group(m)? {
            let mut c = C64::new(0.0, 0.0);
            for r in 1..=m {
                if gcd(r, m) == 1 {
                    c += b[(d * r) as usize] * psi.value(r).conj();
                }
            }
            c /= phi;
            if c.norm() <= DROP_TOL {
                continue;
            }
            // L(w, ψ) = L(w, ψ*) ∏_{p | m, p ∤ f} (1 − ψ*(p) p^{−w}).
            let star = psi.primitive();
            let mut poly: BTreeMap<u64, C64> = [(d, c)].into_iter().collect();
            for (p, _) in factorize(m) {
                if star.modulus % p == 0 {
                    continue;
                }
                let v = star.value(p);
                let mut next = poly.clone();
                for (k, x) in &poly {
                    *next.entry(k * p).or_insert(C64::new(0.0, 0.0)) -= x * v;
                }
                poly = next;
            }
            let slot = parts.entry((star.modulus, star.index)).or_default();
            for (k, x) in poly {
                *slot.entry(k).or_insert(C64::new(0.0, 0.0)) += x;
            }
        }
    }
    let mut decomposition = Vec::new();
    let mut support_ok = true;
    for ((f, idx), poly) in parts {
        // P_χ(s) = Q(s − iA): p_n picks up n^{iA}.
        let polynomial: Vec<(u64, C64)> = poly
            .into_iter()
            .filter(|(_, x)| x.norm() > DROP_TOL)
            .map(|(k, x)| (k, x * C64::from_polar(1.0, shift * (k as f64).ln())))
            .collect();
        if polynomial.is_empty() {
            continue;
        }
        support_ok &= polynomial.iter().all(|(k, _)| q % k == 0);
        let star = DirichletCharacter::new(f, idx)?;
        let chi = star.induce_to(q)?;
        decomposition.push(Component {
            character: CharacterRef::of(&chi),
            primitive: CharacterRef::of(&star),
            polynomial,
        });
    }
    let mut result = ClassificationResult { shift_a: shift, period_q: q, decomposition, residual: 0.0, horizon, support_ok };
    let rec = reconstruct(&result, horizon)?;
    result.residual = (1..=horizon).map(|n| (rec[n] - a[n]).norm()).fold(0.0, f64::max);
    let scale = a.iter().map(|x| x.norm()).fold(1.0, f64::max);
    if !(result.residual <= 1e-9 * scale) {
        return Err(LabError::SingularSystem(format!("reconstruction residual {:.3e}", result.residual)));
    }
    Ok(result)
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct DegreeZeroReport {
    pub shape: ShapeCheck,
    /// The coefficient list terminates.
    pub polynomial: bool,
    /// n with a_n ≠ 0 (up to the scan horizon when not a polynomial).
    pub support: Vec<u64>,
    /// lcm of the support.
    pub support_lcm: Option<u64>,
    pub q_squared: f64,
    /// With no gamma factors: Q² is an integer and every n in the support divides it.
    pub support_divides_q_squared: Option<bool>,
    /// Max relative |Φ(s) − ω conj Φ(1−s̄)| over test points.
    pub fe_residual: Option<f64>,
    pub consistent: bool,
}

const FE_POINTS: [(f64, f64); 5] = [(0.3, 2.0), (0.7, -1.5), (0.2, 5.0), (-0.4, 0.8), (1.3, 3.3)];
const SCAN_HORIZON: usize = 1000;

pub fn classify_degree_zero(spec: &LFunctionSpec) -> Result<DegreeZeroReport> {
    match degree_gate(&spec.fe)? {
        DegreeClass::Zero => {}
        other => return Err(LabError::DegreeMismatch(format!("degree-zero classifier needs degree 0, got {other:?}"))),
    }
    let shape = degree_zero_shape_check(&spec.fe)?;
    let (polynomial, a) = match &spec.coefficients {
        CoefficientSource::Explicit { coeffs, terminates: true } => {
            let mut v = vec![C64::new(0.0, 0.0)];
            v.extend(coeffs.iter().copied());
            (true, v)
        }
        other => (false, coefficients(other, SCAN_HORIZON)?),
    };
    let support: Vec<u64> = (1..a.len()).filter(|&n| a[n].norm() > 0.0).map(|n| n as u64).collect();
    let support_lcm = polynomial.then(|| support.iter().fold(1, |l, &n| lcm(l, n)));
    let q_squared = spec.fe.q().powi(2);
    let gamma_free = spec.fe.numerator.is_empty() && spec.fe.denominator.is_empty();
    let support_divides_q_squared = (polynomial && gamma_free).then(|| {
        let q2 = q_squared.round();
        (q_squared - q2).abs() <= 1e-9 * q2.max(1.0) && q2 >= 1.0 && support.iter().all(|&n| (q2 as u64) % n == 0)
    });
    let fe_residual = if polynomial && shape.finite_zero_pole {
        let f = |s: C64| -> C64 { support.iter().map(|&n| a[n as usize] * (-s * (n as f64).ln()).exp()).sum() };
        let phi = |s: C64| -> Result<C64> { Ok((s * spec.fe.q().ln() + log_quotient_g(&spec.fe, s)?).exp() * f(s)) };
        let mut worst: Option<f64> = None;
        for (x, y) in FE_POINTS {
            let s = C64::new(x, y);
            let (Ok(l), Ok(r)) = (phi(s), phi(C64::new(1.0 - x, y))) else { continue };
            let rhs = spec.fe.omega * r.conj();
            let rel = (l - rhs).norm() / l.norm().max(rhs.norm()).max(1e-300);
            worst = Some(worst.map_or(rel, |w: f64| w.max(rel)));
        }
        worst
    } else {
        None
    };
    let consistent = polynomial
        && shape.finite_zero_pole
        && support_divides_q_squared.unwrap_or(true)
        && fe_residual.is_some_and(|r| r < 1e-9);
    Ok(DegreeZeroReport { shape, polynomial, support, support_lcm, q_squared, support_divides_q_squared, fe_residual, consistent })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::corpus;
    use crate::model::{FunctionalEquation, GammaFactor, PoleSpec};
    use crate::number::Real;

    fn explicit(v: &[f64]) -> CoefficientSource {
        CoefficientSource::Explicit { coeffs: v.iter().map(|x| C64::new(*x, 0.0)).collect(), terminates: true }
    }

    #[test]
    fn periodicity_examples() {
        assert_eq!(periodicity_test(&corpus::zeta().coefficients, 0.0, 1, 100).unwrap(), (true, 0.0));
        assert!(periodicity_test(&corpus::l_chi4().coefficients, 0.0, 4, 400).unwrap().0);
        assert!(!periodicity_test(&corpus::l_chi4().coefficients, 0.0, 2, 400).unwrap().0);
        assert!(!periodicity_test(&corpus::zeta().coefficients, 0.3, 1, 100).unwrap().0);
        assert!(matches!(periodicity_test(&corpus::zeta().coefficients, 0.0, 20, 100), Err(LabError::Precondition(_))));
        let shifted = CoefficientSource::Periodic { shift: 1.0, period: 1, residues: vec![C64::new(1.0, 0.0)] };
        assert!(periodicity_test(&shifted, 1.0, 1, 100).unwrap().0);
        assert!(!periodicity_test(&shifted, 0.0, 1, 100).unwrap().0);
    }

    #[test]
    fn tau_is_not_periodic() {
        let tau = corpus::delta().coefficients;
        let mut least = f64::INFINITY;
        for q in 1..=100 {
            for k in -20..=20 {
                let (ok, dev) = periodicity_test(&tau, k as f64 * 0.25, q, 10_000).unwrap();
                assert!(!ok);
                least = least.min(dev);
            }
        }
        assert!(least > 0.5, "{least}");
    }

    #[test]
    fn classify_l_chi4() {
        let r = classify_degree_one(&corpus::l_chi4().coefficients, 0.0, 4, 400).unwrap();
        assert_eq!(r.decomposition.len(), 1);
        let c = &r.decomposition[0];
        assert_eq!(c.primitive.modulus, 4);
        assert_eq!(c.polynomial.len(), 1);
        assert_eq!(c.polynomial[0].0, 1);
        assert!((c.polynomial[0].1 - 1.0).norm() < 1e-14);
        assert!(r.residual < 1e-12 && r.support_ok);
    }

    #[test]
    fn classify_odd_part_of_zeta() {
        let src = CoefficientSource::Periodic { shift: 0.0, period: 2, residues: vec![C64::new(0.0, 0.0), C64::new(1.0, 0.0)] };
        let r = classify_degree_one(&src, 0.0, 2, 200).unwrap();
        assert_eq!(r.decomposition.len(), 1);
        let c = &r.decomposition[0];
        assert_eq!((c.character.modulus, c.primitive.modulus), (2, 1));
        let p: Vec<(u64, f64)> = c.polynomial.iter().map(|(n, x)| (*n, x.re)).collect();
        assert_eq!(p, vec![(1, 1.0), (2, -1.0)]);
    }

    #[test]
    fn classify_mixture() {
        // 3 L(χ₄) + 2^{−s} L(χ₀ mod 4): a_n = 3χ₄(n) + [n even, n/2 odd].
        let n_max = 400;
        let chi4 = DirichletCharacter::new(4, 1).unwrap();
        let coeffs: Vec<C64> = (1..=n_max as u64)
            .map(|n| {
                let extra = if n % 2 == 0 && (n / 2) % 2 == 1 { 1.0 } else { 0.0 };
                chi4.value(n) * 3.0 + extra
            })
            .collect();
        let src = CoefficientSource::Explicit { coeffs, terminates: false };
        let r = classify_degree_one(&src, 0.0, 4, n_max).unwrap();
        assert!(r.residual < 1e-10 && r.support_ok);
        let mut seen = BTreeMap::new();
        for c in &r.decomposition {
            seen.insert(c.primitive.modulus, c.polynomial.iter().map(|(n, x)| (*n, x.re)).collect::<Vec<_>>());
        }
        assert_eq!(seen[&4], vec![(1, 3.0)]);
        assert_eq!(seen[&1], vec![(2, 1.0), (4, -1.0)]);
    }

    #[test]
    fn classify_shifted() {
        let src = CoefficientSource::Periodic {
            shift: 0.7,
            period: 3,
            residues: vec![C64::new(0.0, 0.0), C64::new(1.0, 0.0), C64::new(-1.0, 0.0)],
        };
        let r = classify_degree_one(&src, 0.7, 3, 300).unwrap();
        assert!(r.residual < 1e-12);
        assert_eq!(r.decomposition.len(), 1);
        assert_eq!(r.decomposition[0].primitive.modulus, 3);
        assert!(matches!(classify_degree_one(&src, 0.0, 3, 300), Err(LabError::Precondition(_))));
    }

    #[test]
    fn degree_zero_examples() {
        let mut spec = LFunctionSpec::unit();
        spec.coefficients = explicit(&[1.0, 2f64.sqrt()]);
        spec.fe.q_scale = Real::Float(2f64.sqrt());
        let r = classify_degree_zero(&spec).unwrap();
        assert!(r.consistent, "{r:?}");
        assert_eq!(r.support_lcm, Some(2));
        assert!(r.fe_residual.unwrap() < 1e-12);

        spec.coefficients = explicit(&[1.0, -1.0]);
        let bad = classify_degree_zero(&spec).unwrap();
        assert!(!bad.consistent && bad.fe_residual.unwrap() > 0.1);

        let unit = classify_degree_zero(&LFunctionSpec::unit()).unwrap();
        assert!(unit.consistent);

        assert!(matches!(classify_degree_zero(&corpus::zeta()), Err(LabError::DegreeMismatch(_))));
    }

    #[test]
    fn degree_zero_with_infinite_poles_is_inconsistent() {
        let mut spec = LFunctionSpec::unit();
        spec.fe = FunctionalEquation {
            numerator: vec![GammaFactor::rational(1, 2, 0, 1)],
            denominator: vec![GammaFactor::rational(1, 2, 1, 3)],
            poles: PoleSpec::default(),
            ..FunctionalEquation::trivial()
        };
        let r = classify_degree_zero(&spec).unwrap();
        assert!(!r.shape.finite_zero_pole && !r.consistent && r.fe_residual.is_none());
    }
}
