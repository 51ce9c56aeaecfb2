//! Analytic continuation of the series the lab can represent in closed form:
//! Dirichlet polynomials, periodic coefficients with a shift (Hurwitz-type
//! sums handled by Euler–Maclaurin), and finite products of these.

use crate::arith::characters::DirichletCharacter;
use crate::arith::primes::lcm;
use crate::arith::source::{CoefficientSource, EulerFactors, LocalFactor};
use crate::error::{LabError, Result};
use crate::number::C64;
use std::collections::BTreeMap;
use std::f64::consts::PI;

/// B_{2j} for j = 1..15.
const BERNOULLI: [f64; 15] = [
    1.0 / 6.0,
    -1.0 / 30.0,
    1.0 / 42.0,
    -1.0 / 30.0,
    5.0 / 66.0,
    -691.0 / 2730.0,
    7.0 / 6.0,
    -3617.0 / 510.0,
    43867.0 / 798.0,
    -174611.0 / 330.0,
    854513.0 / 138.0,
    -236364091.0 / 2730.0,
    8553103.0 / 6.0,
    -23749461029.0 / 870.0,
    8615841276005.0 / 14322.0,
];

fn bernoulli_over_factorial() -> [f64; 15] {
    let mut out = [0.0; 15];
    let mut fact = 1.0;
    for j in 1..=15 {
        fact *= (2 * j - 1) as f64 * (2 * j) as f64;
        out[j - 1] = BERNOULLI[j - 1] / fact;
    }
    out
}

/// Σ_n c_{n mod q} n^{iA} n^{-s}.
#[derive(Clone, Debug, PartialEq)]
pub struct PeriodicSeries {
    pub shift: f64,
    pub period: u64,
    pub residues: Vec<C64>,
}

impl PeriodicSeries {
    pub fn residue_sum(&self) -> C64 {
        self.residues.iter().sum()
    }

    /// Cut-off M above which the Euler–Maclaurin tail is accurate for |z| ≤ zmax.
    pub fn cutoff(&self, zmax: f64) -> u64 {
        let q = self.period as f64;
        (4.0 * q * (zmax + 32.0) / (2.0 * PI)).ceil() as u64 + self.period
    }

    /// Σ_{n ≥ M} c_{n mod q} n^{-z} for z = s − iA.
    pub fn tail(&self, s: C64, m: u64) -> Result<C64> {
        let z = s - C64::new(0.0, self.shift);
        let q = self.period;
        let qf = q as f64;
        let bf = bernoulli_over_factorial();
        let total = self.residue_sum();
        let zm1 = z - 1.0;
        if total.norm() > 1e-14 && zm1.norm() < crate::gamma::SINGULARITY_TOL {
            return Err(LabError::Singularity(format!("pole of the periodic series at {s}")));
        }
        let mut first = C64::new(0.0, 0.0);
        let mut rest = C64::new(0.0, 0.0);
        for r in 0..q {
            let c = self.residues[r as usize];
            if c == C64::new(0.0, 0.0) {
                continue;
            }
            let a = m + (r + q - m % q) % q;
            let la = (a as f64).ln();
            let a_mz = (-z * la).exp();
            // a^{1−z} − 1 computed without cancellation near z = 1.
            if zm1.norm() < 1e-14 {
                first -= c * la;
            } else {
                first += c * crate::gamma::cexpm1(-zm1 * la) / zm1;
            }
            let mut acc = a_mz * 0.5;
            // (z)_{2j−1} q^{2j−1} a^{−z−2j+1}
            let inv_a = 1.0 / a as f64;
            let mut poch = z;
            let mut pw = a_mz * (qf * inv_a);
            for (j, b) in bf.iter().enumerate() {
                if j > 0 {
                    let k = (2 * j) as f64;
                    poch *= (z + k - 1.0) * (z + k);
                    pw *= qf * qf * inv_a * inv_a;
                }
                acc += poch * pw * *b;
            }
            rest += c * acc;
        }
        let pole_part = if zm1.norm() < 1e-14 { C64::new(0.0, 0.0) } else { total / zm1 };
        Ok((first + pole_part) / qf + rest)
    }

    pub fn value(&self, s: C64) -> Result<C64> {
        let z = s - C64::new(0.0, self.shift);
        let m = self.cutoff(z.norm());
        let mut head = C64::new(0.0, 0.0);
        for n in 1..m {
            let c = self.residues[(n % self.period) as usize];
            if c != C64::new(0.0, 0.0) {
                head += c * (-z * (n as f64).ln()).exp();
            }
        }
        Ok(head + self.tail(s, m)?)
    }

    fn twist(&self, chi: &DirichletCharacter) -> PeriodicSeries {
        let q = lcm(self.period, chi.modulus);
        PeriodicSeries {
            shift: self.shift,
            period: q,
            residues: (0..q).map(|r| self.residues[(r % self.period) as usize] * chi.value(r)).collect(),
        }
    }
}

/// Closed-form representation used for continuation.
#[derive(Clone, Debug, PartialEq)]
pub enum Analytic {
    /// Finite Σ c_n n^{-s}, as (n, c_n) pairs.
    Polynomial(Vec<(u64, C64)>),
    Periodic(PeriodicSeries),
    Product(Vec<Analytic>),
}

pub fn poly_value(terms: &[(u64, C64)], s: C64) -> C64 {
    terms.iter().map(|(n, c)| c * (-s * (*n as f64).ln()).exp()).sum()
}

fn poly_mul(a: &[(u64, C64)], b: &[(u64, C64)]) -> Result<Vec<(u64, C64)>> {
    let mut acc: BTreeMap<u64, C64> = BTreeMap::new();
    for (m, x) in a {
        for (n, y) in b {
            let k = m.checked_mul(*n).ok_or_else(|| LabError::Overflow(u64::MAX))?;
            *acc.entry(k).or_default() += x * y;
        }
    }
    Ok(acc.into_iter().filter(|(_, c)| c.norm() > 1e-15).collect())
}

/// Inverse of a local factor as a polynomial in p^{-s}, if it is one.
fn inverse_local_polynomial(factors: &EulerFactors, p: u64) -> Result<Vec<(u64, C64)>> {
    let k = 24;
    let e = factors.local_series(p, k)?;
    let mut inv = vec![C64::new(0.0, 0.0); k + 1];
    inv[0] = C64::new(1.0, 0.0);
    for n in 1..=k {
        let mut acc = C64::new(0.0, 0.0);
        for j in 1..=n {
            acc -= e[j] * inv[n - j];
        }
        inv[n] = acc;
    }
    let deg = (0..=k).rev().find(|&j| inv[j].norm() > 1e-12).unwrap_or(0);
    if deg > 6 {
        return Err(LabError::NoContinuation(format!("local factor at {p} is not the inverse of a polynomial")));
    }
    let mut out = Vec::new();
    let mut pk: u64 = 1;
    for (j, c) in inv.iter().enumerate().take(deg + 1) {
        if j > 0 {
            pk = pk.checked_mul(p).ok_or(LabError::Overflow(p))?;
        }
        if c.norm() > 1e-15 {
            out.push((pk, *c));
        }
    }
    Ok(out)
}

fn local_polynomial(f: &LocalFactor, p: u64) -> Result<Vec<(u64, C64)>> {
    let coeffs: Vec<C64> = match f {
        LocalFactor::Trivial => vec![],
        LocalFactor::Polynomial { coeffs } => coeffs.clone(),
        _ => return Err(LabError::NoContinuation("non-polynomial local factor in a table".into())),
    };
    let mut out = vec![(1u64, C64::new(1.0, 0.0))];
    let mut pk: u64 = 1;
    for c in coeffs {
        pk = pk.checked_mul(p).ok_or(LabError::Overflow(p))?;
        out.push((pk, c));
    }
    Ok(out)
}

fn euler_model(f: &EulerFactors) -> Result<Analytic> {
    Ok(match f {
        EulerFactors::Character { modulus, index, shift } => {
            let chi = DirichletCharacter::new(*modulus, *index)?;
            Analytic::Periodic(PeriodicSeries {
                shift: *shift,
                period: *modulus,
                residues: (0..*modulus).map(|r| chi.value(r)).collect(),
            })
        }
        EulerFactors::Twisted { inner, modulus, index } => {
            euler_model(inner)?.twist(&DirichletCharacter::new(*modulus, *index)?)
        }
        EulerFactors::Product { parts } => Analytic::Product(parts.iter().map(euler_model).collect::<Result<_>>()?),
        EulerFactors::Incomplete { inner, removed } => {
            let mut parts = vec![euler_model(inner)?];
            for p in removed {
                parts.push(Analytic::Polynomial(inverse_local_polynomial(inner, *p)?));
            }
            Analytic::Product(parts)
        }
        EulerFactors::Table { default, primes } => {
            let zeta_like = match default {
                LocalFactor::LogHarmonic { weight } => *weight == C64::new(1.0, 0.0),
                LocalFactor::InversePolynomial { coeffs } => coeffs.as_slice() == [C64::new(-1.0, 0.0)],
                LocalFactor::Trivial => false,
                _ => return Err(LabError::NoContinuation("general Euler table".into())),
            };
            let mut parts = Vec::new();
            if zeta_like {
                parts.push(Analytic::Periodic(PeriodicSeries { shift: 0.0, period: 1, residues: vec![C64::new(1.0, 0.0)] }));
            }
            for (p, lf) in primes {
                let mut poly = local_polynomial(lf, *p)?;
                if zeta_like {
                    poly = poly_mul(&poly, &[(1, C64::new(1.0, 0.0)), (*p, C64::new(-1.0, 0.0))])?;
                }
                parts.push(Analytic::Polynomial(poly));
            }
            Analytic::Product(parts)
        }
    })
}

/// Builds the continuation model of a coefficient source.
pub fn analytic_model(src: &CoefficientSource) -> Result<Analytic> {
    let raw = match src {
        CoefficientSource::Explicit { coeffs, terminates } => {
            if !terminates {
                return Err(LabError::NoContinuation("explicit data without a terminating flag".into()));
            }
            Analytic::Polynomial(
                coeffs
                    .iter()
                    .enumerate()
                    .filter(|(_, c)| c.norm() > 0.0)
                    .map(|(i, c)| (i as u64 + 1, *c))
                    .collect(),
            )
        }
        CoefficientSource::Periodic { shift, period, residues } => {
            if *period == 0 || residues.len() as u64 != *period {
                return Err(LabError::Invalid("periodic source needs one residue per class".into()));
            }
            Analytic::Periodic(PeriodicSeries { shift: *shift, period: *period, residues: residues.clone() })
        }
        CoefficientSource::EulerProduct { factors, .. } => euler_model(factors)?,
        CoefficientSource::Convolution { left, right } => {
            Analytic::Product(vec![analytic_model(left)?, analytic_model(right)?])
        }
    };
    raw.normalized()
}

impl Analytic {
    fn twist(&self, chi: &DirichletCharacter) -> Analytic {
        match self {
            Analytic::Polynomial(t) => Analytic::Polynomial(t.iter().map(|(n, c)| (*n, c * chi.value(*n))).collect()),
            Analytic::Periodic(p) => Analytic::Periodic(p.twist(chi)),
            Analytic::Product(v) => Analytic::Product(v.iter().map(|a| a.twist(chi)).collect()),
        }
    }

    /// Flattens products and merges all polynomial factors into one.
    pub fn normalized(self) -> Result<Analytic> {
        let mut poly = vec![(1u64, C64::new(1.0, 0.0))];
        let mut periodic = Vec::new();
        let mut stack = vec![self];
        while let Some(a) = stack.pop() {
            match a {
                Analytic::Polynomial(t) => poly = poly_mul(&poly, &t)?,
                Analytic::Periodic(p) => periodic.push(p),
                Analytic::Product(v) => stack.extend(v),
            }
        }
        let trivial_poly = poly.as_slice() == [(1u64, C64::new(1.0, 0.0))];
        if periodic.is_empty() {
            return Ok(Analytic::Polynomial(poly));
        }
        if trivial_poly && periodic.len() == 1 {
            return Ok(Analytic::Periodic(periodic.pop().unwrap()));
        }
        let mut parts = Vec::new();
        if !trivial_poly {
            parts.push(Analytic::Polynomial(poly));
        }
        // Keep a deterministic order: smallest period first.
        periodic.sort_by(|a, b| a.period.cmp(&b.period).then(a.shift.total_cmp(&b.shift)));
        parts.extend(periodic.into_iter().map(Analytic::Periodic));
        Ok(Analytic::Product(parts))
    }

    pub fn value(&self, s: C64) -> Result<C64> {
        match self {
            Analytic::Polynomial(t) => Ok(poly_value(t, s)),
            Analytic::Periodic(p) => p.value(s),
            Analytic::Product(v) => {
                let mut acc = C64::new(1.0, 0.0);
                for a in v {
                    acc *= a.value(s)?;
                }
                Ok(acc)
            }
        }
    }

    /// conj(F(s̄)).
    pub fn dual_value(&self, s: C64) -> Result<C64> {
        Ok(self.value(s.conj())?.conj())
    }

    fn periodic_factors(&self) -> Vec<&PeriodicSeries> {
        match self {
            Analytic::Periodic(p) => vec![p],
            Analytic::Product(v) => v.iter().flat_map(|a| a.periodic_factors()).collect(),
            Analytic::Polynomial(_) => vec![],
        }
    }

    /// Poles as (location, order).
    pub fn poles(&self) -> Vec<(C64, u32)> {
        let mut out: Vec<(C64, u32)> = Vec::new();
        for p in self.periodic_factors() {
            if p.residue_sum().norm() > 1e-12 {
                let at = C64::new(1.0, p.shift);
                match out.iter_mut().find(|(z, _)| (*z - at).norm() < 1e-12) {
                    Some(e) => e.1 += 1,
                    None => out.push((at, 1)),
                }
            }
        }
        out
    }

    /// Residue at a simple pole.
    pub fn residue(&self, at: C64) -> Result<C64> {
        let poles = self.poles();
        match poles.iter().find(|(z, _)| (*z - at).norm() < 1e-12) {
            None => Ok(C64::new(0.0, 0.0)),
            Some((_, o)) if *o > 1 => Err(LabError::MissingLaurentData(format!("{at}"))),
            Some(_) => {
                let parts: Vec<&Analytic> = match self {
                    Analytic::Product(v) => v.iter().collect(),
                    other => vec![other],
                };
                let mut acc = C64::new(1.0, 0.0);
                for a in parts {
                    match a {
                        Analytic::Periodic(p)
                            if p.residue_sum().norm() > 1e-12 && (C64::new(1.0, p.shift) - at).norm() < 1e-12 =>
                        {
                            acc *= p.residue_sum() / p.period as f64
                        }
                        other => acc *= other.value(at)?,
                    }
                }
                Ok(acc)
            }
        }
    }

    /// The form P(s)·Σ c_{n mod q} n^{iA} n^{-s}, if the model has it.
    pub fn polynomial_times_periodic(&self) -> Option<(Vec<(u64, C64)>, &PeriodicSeries)> {
        match self {
            Analytic::Periodic(p) => Some((vec![(1, C64::new(1.0, 0.0))], p)),
            Analytic::Product(v) if v.len() == 2 => match (&v[0], &v[1]) {
                (Analytic::Polynomial(t), Analytic::Periodic(p)) => Some((t.clone(), p)),
                _ => None,
            },
            _ => None,
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn close(a: C64, b: C64, tol: f64) -> bool {
        (a - b).norm() <= tol * b.norm().max(1.0)
    }

    #[test]
    fn zeta_values_match_oracle() {
        // Oracle: mpmath zeta at 30 digits.
        let z = analytic_model(&CoefficientSource::zeta()).unwrap();
        let cases = [
            (C64::new(0.5, 0.0), C64::new(-1.4603545088095868, 0.0)),
            (C64::new(0.5, 10.0), C64::new(1.5448952202967528, -0.11533646527127338)),
            (C64::new(-0.4, 20.0), C64::new(-0.6955692076580389, -2.6061167689626101)),
            (C64::new(2.0, 3.0), C64::new(0.7980219851462757, -0.1137443080529385)),
            (C64::new(-3.5, 100.0), C64::new(66454.602205727433, 4938.2890116830122)),
            (C64::new(0.5, 1000.0), C64::new(0.35633436719439606, 0.93199783123299367)),
            (C64::new(1.0, 1e-6), C64::new(0.5772156649015377, -999999.99999992723)),
        ];
        for (s, want) in cases {
            let got = z.value(s).unwrap();
            // Far left of the line the head sum cancels by a few digits.
            let tol = if s.re < -1.0 { 1e-10 } else { 1e-12 };
            assert!(close(got, want, tol), "s={s} got={got} want={want}");
        }
        assert!(z.value(C64::new(1.0, 0.0)).is_err());
        assert_eq!(z.poles(), vec![(C64::new(1.0, 0.0), 1)]);
    }

    #[test]
    fn character_values_match_oracle() {
        let l4 = analytic_model(&CoefficientSource::dirichlet_l(4, 1)).unwrap();
        let l3 = analytic_model(&CoefficientSource::dirichlet_l(3, 1)).unwrap();
        let cases4 = [
            (C64::new(0.5, 0.0), C64::new(0.66769145718960918, 0.0)),
            (C64::new(0.5, 20.0), C64::new(2.8510651544833458, -0.36483657908491392)),
            (C64::new(-0.4, 5.0), C64::new(0.87238640958368000, -2.4437156654226459)),
            (C64::new(1.0, 0.0), C64::new(std::f64::consts::FRAC_PI_4, 0.0)),
            (C64::new(0.5, 300.0), C64::new(2.5399552608242759, -1.3204733075809876)),
        ];
        for (s, want) in cases4 {
            assert!(close(l4.value(s).unwrap(), want, 1e-12), "s={s}");
        }
        assert!(close(l3.value(C64::new(0.5, 0.0)).unwrap(), C64::new(0.48086755769682863, 0.0), 1e-12));
        assert!(close(l3.value(C64::new(1.5, -2.0)).unwrap(), C64::new(0.88797561703825432, -0.30662455182929371), 1e-12));
        assert!(l4.poles().is_empty());
    }

    #[test]
    fn incomplete_and_products() {
        let z = analytic_model(&CoefficientSource::zeta()).unwrap();
        let odd = crate::arith::source::incomplete(&CoefficientSource::zeta(), &[2].into_iter().collect()).unwrap();
        let m = analytic_model(&odd).unwrap();
        let s = C64::new(0.3, 14.0);
        let want = z.value(s).unwrap() * (1.0 - (-s * 2f64.ln()).exp());
        assert!(close(m.value(s).unwrap(), want, 1e-13));
        assert!(m.polynomial_times_periodic().is_some());
        let prod = CoefficientSource::Convolution {
            left: Box::new(CoefficientSource::zeta()),
            right: Box::new(CoefficientSource::dirichlet_l(4, 1)),
        };
        let pm = analytic_model(&prod).unwrap();
        assert!(close(pm.residue(C64::new(1.0, 0.0)).unwrap(), C64::new(std::f64::consts::FRAC_PI_4, 0.0), 1e-13));
        let zz = CoefficientSource::Convolution {
            left: Box::new(CoefficientSource::zeta()),
            right: Box::new(CoefficientSource::zeta()),
        };
        let zm = analytic_model(&zz).unwrap();
        assert_eq!(zm.poles(), vec![(C64::new(1.0, 0.0), 2)]);
        assert!(zm.residue(C64::new(1.0, 0.0)).is_err());
    }

    #[test]
    fn shifted_periodic_is_shifted_zeta() {
        let z = analytic_model(&CoefficientSource::zeta()).unwrap();
        let shifted = PeriodicSeries { shift: 1.0, period: 1, residues: vec![C64::new(1.0, 0.0)] };
        let s = C64::new(0.7, 3.0);
        assert!(close(shifted.value(s).unwrap(), z.value(s - C64::new(0.0, 1.0)).unwrap(), 1e-13));
    }
}
