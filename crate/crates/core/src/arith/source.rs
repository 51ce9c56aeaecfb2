//! Coefficient sources: explicit lists, periodic sequences with a shift,
//! Euler products and Dirichlet convolutions.

use super::characters::DirichletCharacter;
use super::primes::{lcm, spf_sieve};
use crate::error::{LabError, Result};
use crate::number::C64;
use serde::{Deserialize, Serialize};
use std::collections::{BTreeMap, BTreeSet, HashMap};

/// Hard cap on materialized coefficient lists.
pub const N_MAX_CAP: usize = 2_000_000;

/// Local Euler factor F_p as a function of X = p^{-s}.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum LocalFactor {
    Trivial,
    /// 1 / (1 + c_1 X + c_2 X^2 + ...)
    InversePolynomial { coeffs: Vec<C64> },
    /// 1 + c_1 X + c_2 X^2 + ...
    Polynomial { coeffs: Vec<C64> },
    /// exp(b_1 X + b_2 X^2 + ...)
    Log { coeffs: Vec<C64> },
    /// exp(Σ_k w^k X^k / k) = 1/(1 - wX)
    LogHarmonic { weight: C64 },
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum EulerFactors {
    /// 1/(1 - χ(p) p^{iA} X): the series Σ χ(n) n^{iA} n^{-s}.
    Character {
        modulus: u64,
        index: u64,
        #[serde(default)]
        shift: f64,
    },
    Table {
        default: LocalFactor,
        #[serde(default)]
        primes: BTreeMap<u64, LocalFactor>,
    },
    Product { parts: Vec<EulerFactors> },
    Twisted { inner: Box<EulerFactors>, modulus: u64, index: u64 },
    Incomplete { inner: Box<EulerFactors>, removed: BTreeSet<u64> },
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum CoefficientSource {
    /// a_1, a_2, ... ; beyond the list the series is zero if `terminates`,
    /// otherwise unknown.
    Explicit { coeffs: Vec<C64>, terminates: bool },
    /// a_n = residues[n mod q] · n^{iA}.
    Periodic { shift: f64, period: u64, residues: Vec<C64> },
    /// Multiplicative coefficients with declared bound |b_{p^k}| ≤ c_bound · p^{kθ}.
    EulerProduct {
        factors: EulerFactors,
        #[serde(default = "one")]
        c_bound: f64,
        #[serde(default)]
        theta: f64,
    },
    Convolution { left: Box<CoefficientSource>, right: Box<CoefficientSource> },
}

fn one() -> f64 {
    1.0
}

fn czero() -> C64 {
    C64::new(0.0, 0.0)
}

fn cone() -> C64 {
    C64::new(1.0, 0.0)
}

impl LocalFactor {
    /// Power series coefficients e_0 .. e_kmax.
    pub fn series(&self, kmax: usize) -> Vec<C64> {
        let mut e = vec![czero(); kmax + 1];
        e[0] = cone();
        match self {
            LocalFactor::Trivial => {}
            LocalFactor::InversePolynomial { coeffs } => {
                for k in 1..=kmax {
                    let mut acc = czero();
                    for (j, c) in coeffs.iter().enumerate().take(k) {
                        acc -= c * e[k - j - 1];
                    }
                    e[k] = acc;
                }
            }
            LocalFactor::Polynomial { coeffs } => {
                for (k, c) in coeffs.iter().enumerate().take(kmax) {
                    e[k + 1] = *c;
                }
            }
            LocalFactor::Log { coeffs } => {
                let b: Vec<C64> = (1..=kmax).map(|j| coeffs.get(j - 1).copied().unwrap_or_default()).collect();
                exp_series_into(&b, &mut e);
            }
            LocalFactor::LogHarmonic { weight } => {
                let mut w = cone();
                for item in e.iter_mut().skip(1) {
                    w *= weight;
                    *item = w;
                }
            }
        }
        e
    }
}

/// e = exp(Σ_{j≥1} b_j X^j), with b[j-1] = b_j.
fn exp_series_into(b: &[C64], e: &mut [C64]) {
    e[0] = cone();
    for k in 1..e.len() {
        let mut acc = czero();
        for j in 1..=k {
            if let Some(bj) = b.get(j - 1) {
                acc += bj * e[k - j] * j as f64;
            }
        }
        e[k] = acc / k as f64;
    }
}

/// Logarithm of a power series with e_0 = 1: returns b_1..b_kmax.
pub fn log_series(e: &[C64]) -> Vec<C64> {
    let kmax = e.len() - 1;
    let mut b = vec![czero(); kmax + 1];
    for k in 1..=kmax {
        let mut acc = e[k] * k as f64;
        for j in 1..k {
            acc -= b[j] * e[k - j] * j as f64;
        }
        b[k] = acc / k as f64;
    }
    b.remove(0);
    b
}

fn mul_series(a: &[C64], b: &[C64]) -> Vec<C64> {
    let n = a.len().min(b.len());
    let mut out = vec![czero(); n];
    for i in 0..n {
        for j in 0..n - i {
            out[i + j] += a[i] * b[j];
        }
    }
    out
}

struct CharCache(HashMap<(u64, u64), DirichletCharacter>);

impl CharCache {
    fn get(&mut self, q: u64, i: u64) -> Result<&DirichletCharacter> {
        if !self.0.contains_key(&(q, i)) {
            self.0.insert((q, i), DirichletCharacter::new(q, i)?);
        }
        Ok(&self.0[&(q, i)])
    }
}

impl EulerFactors {
    /// Local series e_0..e_kmax of F_p.
    pub fn local_series(&self, p: u64, kmax: usize) -> Result<Vec<C64>> {
        self.local_series_cached(p, kmax, &mut CharCache(HashMap::new()))
    }

    fn local_series_cached(&self, p: u64, kmax: usize, cache: &mut CharCache) -> Result<Vec<C64>> {
        Ok(match self {
            EulerFactors::Character { modulus, index, shift } => {
                let chi = cache.get(*modulus, *index)?;
                let x = chi.value(p) * C64::new(0.0, shift * (p as f64).ln()).exp();
                let mut e = vec![cone(); kmax + 1];
                for k in 1..=kmax {
                    e[k] = e[k - 1] * x;
                }
                e
            }
            EulerFactors::Table { default, primes } => primes.get(&p).unwrap_or(default).series(kmax),
            EulerFactors::Product { parts } => {
                let mut acc = vec![czero(); kmax + 1];
                acc[0] = cone();
                for part in parts {
                    acc = mul_series(&acc, &part.local_series_cached(p, kmax, cache)?);
                }
                acc
            }
            EulerFactors::Twisted { inner, modulus, index } => {
                let mut e = inner.local_series_cached(p, kmax, cache)?;
                let x = cache.get(*modulus, *index)?.value(p);
                let mut w = cone();
                for item in e.iter_mut().skip(1) {
                    w *= x;
                    *item *= w;
                }
                e
            }
            EulerFactors::Incomplete { inner, removed } => {
                if removed.contains(&p) {
                    let mut e = vec![czero(); kmax + 1];
                    e[0] = cone();
                    e
                } else {
                    inner.local_series_cached(p, kmax, cache)?
                }
            }
        })
    }
}

impl CoefficientSource {
    pub fn zeta() -> CoefficientSource {
        CoefficientSource::EulerProduct {
            factors: EulerFactors::Character { modulus: 1, index: 0, shift: 0.0 },
            c_bound: 1.0,
            theta: 0.0,
        }
    }

    pub fn dirichlet_l(modulus: u64, index: u64) -> CoefficientSource {
        CoefficientSource::EulerProduct {
            factors: EulerFactors::Character { modulus, index, shift: 0.0 },
            c_bound: 1.0,
            theta: 0.0,
        }
    }

    pub fn unit() -> CoefficientSource {
        CoefficientSource::Explicit { coeffs: vec![cone()], terminates: true }
    }

    pub fn has_euler_data(&self) -> bool {
        matches!(self, CoefficientSource::EulerProduct { .. })
    }

    /// Whether the series is known to be a finite Dirichlet polynomial.
    pub fn is_polynomial(&self) -> bool {
        match self {
            CoefficientSource::Explicit { terminates, .. } => *terminates,
            CoefficientSource::Convolution { left, right } => left.is_polynomial() && right.is_polynomial(),
            _ => false,
        }
    }
}

/// Coefficients indexed by n: `v[n] = a_n` for 1 ≤ n ≤ n_max, `v[0] = 0`.
pub fn coefficients(src: &CoefficientSource, n_max: usize) -> Result<Vec<C64>> {
    if n_max > N_MAX_CAP {
        return Err(LabError::TruncationFailure(format!(
            "{n_max} coefficients requested, cap is {N_MAX_CAP}"
        )));
    }
    let v = match src {
        CoefficientSource::Explicit { coeffs, terminates } => {
            if !terminates && n_max > coeffs.len() {
                return Err(LabError::TruncationFailure(format!(
                    "explicit data holds {} coefficients, {} requested",
                    coeffs.len(),
                    n_max
                )));
            }
            let mut v = vec![czero(); n_max + 1];
            for (i, c) in coeffs.iter().enumerate().take(n_max) {
                v[i + 1] = *c;
            }
            v
        }
        CoefficientSource::Periodic { shift, period, residues } => {
            if *period == 0 || residues.len() as u64 != *period {
                return Err(LabError::Invalid("periodic source needs one residue per class".into()));
            }
            let mut v = vec![czero(); n_max + 1];
            for (n, item) in v.iter_mut().enumerate().skip(1) {
                let c = residues[n % *period as usize];
                *item = if *shift == 0.0 { c } else { c * C64::new(0.0, shift * (n as f64).ln()).exp() };
            }
            v
        }
        CoefficientSource::EulerProduct { factors, .. } => euler_coefficients(factors, n_max)?,
        CoefficientSource::Convolution { left, right } => {
            let a = coefficients(left, n_max)?;
            let b = coefficients(right, n_max)?;
            dirichlet_convolution(&a, &b)
        }
    };
    for (n, c) in v.iter().enumerate() {
        if !(c.norm() <= 1e300) {
            return Err(LabError::Overflow(n as u64));
        }
    }
    Ok(v)
}

fn euler_coefficients(factors: &EulerFactors, n_max: usize) -> Result<Vec<C64>> {
    let mut v = vec![czero(); n_max + 1];
    if n_max == 0 {
        return Ok(v);
    }
    v[1] = cone();
    let spf = spf_sieve(n_max);
    let mut cache = CharCache(HashMap::new());
    // Local series stored per prime: offsets into a flat buffer.
    let mut local: HashMap<u64, Vec<C64>> = HashMap::new();
    for n in 2..=n_max {
        let p = spf[n] as usize;
        let mut m = n;
        let mut k = 0;
        while m % p == 0 {
            m /= p;
            k += 1;
        }
        if m == 1 {
            // n = p^k: make sure the local series reaches k.
            let entry = local.get(&(p as u64));
            if entry.map(|e| e.len() <= k).unwrap_or(true) {
                let mut kmax = 1;
                let mut pk = p;
                while pk <= n_max / p {
                    pk *= p;
                    kmax += 1;
                }
                local.insert(p as u64, factors.local_series_cached(p as u64, kmax, &mut cache)?);
            }
        }
        let e = &local[&(p as u64)];
        v[n] = e[k] * v[m];
    }
    Ok(v)
}

/// c_n = Σ_{de=n} a_d b_e for index-by-n vectors of equal length.
pub fn dirichlet_convolution(a: &[C64], b: &[C64]) -> Vec<C64> {
    let n_max = a.len().min(b.len()) - 1;
    let mut c = vec![czero(); n_max + 1];
    for d in 1..=n_max {
        if a[d] == czero() {
            continue;
        }
        let mut m = 1;
        while d * m <= n_max {
            c[d * m] += a[d] * b[m];
            m += 1;
        }
    }
    c
}

/// The twist Σ χ(n) a_n n^{-s}.
pub fn twist(src: &CoefficientSource, chi: &DirichletCharacter) -> CoefficientSource {
    match src {
        CoefficientSource::Explicit { coeffs, terminates } => CoefficientSource::Explicit {
            coeffs: coeffs.iter().enumerate().map(|(i, c)| c * chi.value(i as u64 + 1)).collect(),
            terminates: *terminates,
        },
        CoefficientSource::Periodic { shift, period, residues } => {
            let q = lcm(*period, chi.modulus);
            CoefficientSource::Periodic {
                shift: *shift,
                period: q,
                residues: (0..q).map(|r| residues[(r % period) as usize] * chi.value(r)).collect(),
            }
        }
        CoefficientSource::EulerProduct { factors, c_bound, theta } => CoefficientSource::EulerProduct {
            factors: EulerFactors::Twisted { inner: Box::new(factors.clone()), modulus: chi.modulus, index: chi.index },
            c_bound: *c_bound,
            theta: *theta,
        },
        CoefficientSource::Convolution { left, right } => CoefficientSource::Convolution {
            left: Box::new(twist(left, chi)),
            right: Box::new(twist(right, chi)),
        },
    }
}

/// Removes the Euler factors at the given primes.
pub fn incomplete(src: &CoefficientSource, s_primes: &BTreeSet<u64>) -> Result<CoefficientSource> {
    match src {
        CoefficientSource::EulerProduct { factors, c_bound, theta } => {
            if s_primes.is_empty() {
                return Ok(src.clone());
            }
            Ok(CoefficientSource::EulerProduct {
                factors: EulerFactors::Incomplete { inner: Box::new(factors.clone()), removed: s_primes.clone() },
                c_bound: *c_bound,
                theta: *theta,
            })
        }
        _ => Err(LabError::NoEulerData),
    }
}

/// Checks |b_{p^k}| ≤ c_bound · p^{kθ} for p^k ≤ limit. Returns the worst ratio.
pub fn euler_bound_ratio(src: &CoefficientSource, limit: u64) -> Result<f64> {
    let CoefficientSource::EulerProduct { factors, c_bound, theta } = src else {
        return Err(LabError::NoEulerData);
    };
    let mut worst = 0.0f64;
    for p in super::primes::primes_up_to(limit) {
        let mut kmax = 1;
        while p.pow(kmax as u32 + 1) <= limit {
            kmax += 1;
        }
        let b = log_series(&factors.local_series(p, kmax)?);
        for (k, bk) in b.iter().enumerate() {
            let bound = c_bound * (p as f64).powf((k + 1) as f64 * theta);
            worst = worst.max(bk.norm() / bound);
        }
    }
    Ok(worst)
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct AverageBound {
    /// Σ_{n<X} |a_n| / √n.
    pub sum: f64,
    /// ln(sum) / ln X.
    pub exponent: f64,
    /// Slope of ln(partial sum) against ln x over x ∈ [√X, X].
    pub fitted_exponent: f64,
    /// True when the growth exceeds the X^{1/2+ε} regime (fitted exponent > 0.75).
    pub flagged: bool,
}

pub fn average_bound_report(src: &CoefficientSource, x: f64) -> Result<AverageBound> {
    if !(x >= 2.0) {
        return Err(LabError::Invalid("X must be at least 2".into()));
    }
    let n_top = (x.ceil() as usize).saturating_sub(1).max(1);
    let a = coefficients(src, n_top)?;
    let mut partial = vec![0.0; n_top + 1];
    for n in 1..=n_top {
        let term = if (n as f64) < x { a[n].norm() / (n as f64).sqrt() } else { 0.0 };
        partial[n] = partial[n - 1] + term;
    }
    let sum = partial[n_top];
    let exponent = if sum > 0.0 { sum.ln() / x.ln() } else { f64::NEG_INFINITY };
    let mut xs = Vec::new();
    let mut ys = Vec::new();
    for k in 0..=8 {
        let xv = x.powf(0.5 + 0.5 * k as f64 / 8.0);
        let idx = ((xv.ceil() as usize).saturating_sub(1)).clamp(1, n_top);
        if partial[idx] > 0.0 {
            xs.push(xv);
            ys.push(partial[idx]);
        }
    }
    let fitted_exponent = if xs.len() >= 2 { crate::fit::loglog_slope(&xs, &ys)? } else { 0.0 };
    Ok(AverageBound { sum, exponent, fitted_exponent, flagged: fitted_exponent > 0.75 })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn re(v: &[C64]) -> Vec<f64> {
        v.iter().skip(1).map(|c| c.re).collect()
    }

    #[test]
    fn zeta_and_divisors() {
        assert_eq!(re(&coefficients(&CoefficientSource::zeta(), 5).unwrap()), vec![1.0; 5]);
        let zz = CoefficientSource::Convolution {
            left: Box::new(CoefficientSource::zeta()),
            right: Box::new(CoefficientSource::zeta()),
        };
        assert_eq!(re(&coefficients(&zz, 6).unwrap()), vec![1.0, 2.0, 2.0, 3.0, 2.0, 4.0]);
    }

    #[test]
    fn harmonic_log_factor_is_zeta() {
        let src = CoefficientSource::EulerProduct {
            factors: EulerFactors::Table { default: LocalFactor::LogHarmonic { weight: cone() }, primes: BTreeMap::new() },
            c_bound: 1.0,
            theta: 0.0,
        };
        let v = coefficients(&src, 5).unwrap();
        for c in &v[1..] {
            assert!((c - cone()).norm() < 1e-15);
        }
        let explicit_log = CoefficientSource::EulerProduct {
            factors: EulerFactors::Table {
                default: LocalFactor::Log { coeffs: (1..30).map(|k| C64::new(1.0 / k as f64, 0.0)).collect() },
                primes: BTreeMap::new(),
            },
            c_bound: 1.0,
            theta: 0.0,
        };
        let w = coefficients(&explicit_log, 64).unwrap();
        for c in &w[1..] {
            assert!((c - cone()).norm() < 1e-12);
        }
    }

    #[test]
    fn twists_and_incomplete() {
        let chi4 = DirichletCharacter::new(4, 1).unwrap();
        let l4 = twist(&CoefficientSource::zeta(), &chi4);
        assert_eq!(re(&coefficients(&l4, 5).unwrap()), vec![1.0, 0.0, -1.0, 0.0, 1.0]);
        let same = twist(&CoefficientSource::zeta(), &DirichletCharacter::trivial());
        assert_eq!(coefficients(&same, 30).unwrap(), coefficients(&CoefficientSource::zeta(), 30).unwrap());
        let zz = CoefficientSource::Convolution {
            left: Box::new(CoefficientSource::zeta()),
            right: Box::new(CoefficientSource::zeta()),
        };
        assert_eq!(coefficients(&twist(&zz, &chi4), 9).unwrap()[9], C64::new(3.0, 0.0));
        let odd = incomplete(&CoefficientSource::zeta(), &[2].into_iter().collect()).unwrap();
        let v = coefficients(&odd, 10).unwrap();
        for n in 1..=10 {
            assert_eq!(v[n].re, if n % 2 == 1 { 1.0 } else { 0.0 });
        }
        assert_eq!(incomplete(&CoefficientSource::zeta(), &BTreeSet::new()).unwrap(), CoefficientSource::zeta());
        let l46 = incomplete(&CoefficientSource::dirichlet_l(4, 1), &[2, 3].into_iter().collect()).unwrap();
        let v = coefficients(&l46, 60).unwrap();
        for n in 1..=60u64 {
            let expect = if n % 2 != 0 && n % 3 != 0 { chi4.value(n) } else { czero() };
            assert_eq!(v[n as usize], expect);
        }
        assert_eq!(incomplete(&CoefficientSource::unit(), &[2].into_iter().collect()), Err(LabError::NoEulerData));
    }

    #[test]
    fn periodic_with_shift() {
        let src = CoefficientSource::Periodic { shift: 1.5, period: 2, residues: vec![czero(), cone()] };
        let v = coefficients(&src, 5).unwrap();
        assert_eq!(v[2], czero());
        let expect = C64::new(0.0, 1.5 * 3f64.ln()).exp();
        assert!((v[3] - expect).norm() < 1e-15);
    }

    #[test]
    fn overflow_detected() {
        let src = CoefficientSource::Explicit { coeffs: vec![cone(), C64::new(1e305, 0.0)], terminates: true };
        assert_eq!(coefficients(&src, 2), Err(LabError::Overflow(2)));
    }

    #[test]
    fn average_bounds() {
        let z = average_bound_report(&CoefficientSource::zeta(), 1e4).unwrap();
        // Oracle: high-precision direct sum over n < 10^4.
        assert!((z.sum - 198.534645449523746).abs() < 1e-9, "{}", z.sum);
        assert!((z.fitted_exponent - 0.5).abs() < 0.03 && !z.flagged);
        let lin = CoefficientSource::Explicit { coeffs: (1..=200).map(|n| C64::new(n as f64, 0.0)).collect(), terminates: true };
        let r = average_bound_report(&lin, 100.0).unwrap();
        assert!((r.fitted_exponent - 1.5).abs() < 0.05 && r.flagged);
        let a1 = average_bound_report(&CoefficientSource::unit(), 100.0).unwrap();
        assert_eq!(a1.sum, 1.0);
        assert_eq!(a1.exponent, 0.0);
    }
}
