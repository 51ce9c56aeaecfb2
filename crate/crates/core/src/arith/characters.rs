//! Dirichlet characters built from generator images.
//!
//! The unit group mod q is split by the Chinese remainder theorem. An odd prime
//! power p^e contributes one generator (a primitive root g chosen so that it
//! generates mod every power of p). The prime 2 contributes nothing for 2^1,
//! the generator -1 for 2^2, and the generators -1 and 5 for 2^e with e ≥ 3.
//! Generators are ordered by ascending prime, with -1 before 5. The character
//! with index i sends generator j to e(k_j / ord_j), where the k_j are the
//! mixed-radix digits of i, least significant first. Index 0 is principal.

use super::primes::{euler_phi, factorize, gcd, mod_pow, valuation};
use crate::error::{LabError, Result};
use crate::number::C64;
use serde::Serialize;
use std::f64::consts::PI;

const NONE: u64 = u64::MAX;

#[derive(Clone, Debug)]
struct Component {
    p: u64,
    e: u32,
    pe: u64,
    orders: Vec<u64>,
    /// logs[r] = discrete logs of r mod p^e w.r.t. the generators.
    logs: Vec<Vec<u64>>,
}

fn primitive_root(p: u64) -> u64 {
    if p == 2 {
        return 1;
    }
    let fac = factorize(p - 1);
    let mut g = 2;
    loop {
        if fac.iter().all(|(l, _)| mod_pow(g, (p - 1) / l, p) != 1) {
            break;
        }
        g += 1;
    }
    if mod_pow(g, p - 1, p * p) == 1 {
        g += p;
    }
    g
}

fn component(p: u64, e: u32) -> Component {
    let pe = p.pow(e);
    let mut logs = vec![Vec::new(); pe as usize];
    let orders;
    if p == 2 {
        if e == 1 {
            orders = vec![];
            logs[1] = vec![];
        } else if e == 2 {
            orders = vec![2];
            logs[1] = vec![0];
            logs[3] = vec![1];
        } else {
            let o5 = pe / 4;
            orders = vec![2, o5];
            let mut x = 1u64;
            for j in 0..o5 {
                logs[x as usize] = vec![0, j];
                logs[(pe - x) as usize] = vec![1, j];
                x = x * 5 % pe;
            }
        }
    } else {
        let g = primitive_root(p) % pe;
        let ord = euler_phi(pe);
        orders = vec![ord];
        let mut x = 1u64;
        for k in 0..ord {
            logs[x as usize] = vec![k];
            x = x * g % pe;
        }
    }
    Component { p, e, pe, orders, logs }
}

/// The generator data of (Z/qZ)^*, used to build characters by index.
#[derive(Clone, Debug)]
pub struct CharacterGroup {
    pub modulus: u64,
    comps: Vec<Component>,
    /// Exponent of the group: every value is a power of e(1/base).
    base: u64,
}

impl CharacterGroup {
    pub fn new(q: u64) -> Result<CharacterGroup> {
        if q == 0 {
            return Err(LabError::Invalid("character modulus must be ≥ 1".into()));
        }
        if q > 10_000_000 {
            return Err(LabError::Invalid(format!("character modulus {q} too large")));
        }
        let comps: Vec<Component> = factorize(q).into_iter().map(|(p, e)| component(p, e)).collect();
        let base = comps
            .iter()
            .flat_map(|c| c.orders.iter().copied())
            .fold(1u64, super::primes::lcm);
        Ok(CharacterGroup { modulus: q, comps, base })
    }

    pub fn size(&self) -> u64 {
        self.comps.iter().flat_map(|c| c.orders.iter()).product()
    }

    fn digits(&self, index: u64) -> Vec<Vec<u64>> {
        let mut rest = index;
        self.comps
            .iter()
            .map(|c| {
                c.orders
                    .iter()
                    .map(|o| {
                        let d = rest % o;
                        rest /= o;
                        d
                    })
                    .collect()
            })
            .collect()
    }

    pub fn character(&self, index: u64) -> Result<DirichletCharacter> {
        let size = self.size();
        if index >= size {
            return Err(LabError::Invalid(format!(
                "character index {index} out of range for modulus {} ({size} characters)",
                self.modulus
            )));
        }
        let q = self.modulus;
        let digits = self.digits(index);
        let mut exps = vec![NONE; q as usize];
        for r in 0..q {
            if gcd(r, q) != 1 {
                continue;
            }
            let mut acc: u128 = 0;
            for (c, ks) in self.comps.iter().zip(&digits) {
                let logs = &c.logs[(r % c.pe) as usize];
                for ((l, k), o) in logs.iter().zip(ks).zip(&c.orders) {
                    acc += (*l as u128 * *k as u128 % *o as u128) * (self.base / o) as u128;
                }
            }
            exps[r as usize] = (acc % self.base as u128) as u64;
        }
        if q == 1 {
            exps[0] = 0;
        }
        // Conductor and the index of the inducing character.
        let mut conductor = 1u64;
        let mut prim_digits: Vec<u64> = Vec::new();
        let mut prim_radix: Vec<u64> = Vec::new();
        for (c, ks) in self.comps.iter().zip(&digits) {
            let (pc, local_digits, local_orders) = component_conductor(c, ks);
            conductor *= pc;
            prim_digits.extend(local_digits);
            prim_radix.extend(local_orders);
        }
        let mut primitive_index = 0u64;
        let mut mult = 1u64;
        for (d, o) in prim_digits.iter().zip(&prim_radix) {
            primitive_index += d * mult;
            mult *= o;
        }
        Ok(DirichletCharacter { modulus: q, index, base: self.base, exps, conductor, primitive_index })
    }

    pub fn all(&self) -> Vec<DirichletCharacter> {
        (0..self.size()).map(|i| self.character(i).unwrap()).collect()
    }
}

/// Conductor p^c of one component and the digits of the induced character
/// in the group mod p^c.
fn component_conductor(c: &Component, ks: &[u64]) -> (u64, Vec<u64>, Vec<u64>) {
    if c.p == 2 {
        match c.e {
            1 => (1, vec![], vec![]),
            2 => {
                if ks[0] == 1 {
                    (4, vec![1], vec![2])
                } else {
                    (1, vec![], vec![])
                }
            }
            e => {
                let (a, b) = (ks[0], ks[1]);
                if b == 0 {
                    if a == 1 {
                        (4, vec![1], vec![2])
                    } else {
                        (1, vec![], vec![])
                    }
                } else {
                    let v = valuation(b, 2);
                    let cexp = e - v;
                    let shift = 2u64.pow(e - cexp);
                    (2u64.pow(cexp), vec![a, b / shift], vec![2, 2u64.pow(cexp - 2)])
                }
            }
        }
    } else {
        let k = ks[0];
        if k == 0 {
            return (1, vec![], vec![]);
        }
        let v = valuation(k, c.p).min(c.e - 1);
        let cexp = c.e - v;
        let pc = c.p.pow(cexp);
        (pc, vec![k / c.p.pow(c.e - cexp)], vec![euler_phi(pc)])
    }
}

/// A Dirichlet character mod q with exact values e(k/base).
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct DirichletCharacter {
    pub modulus: u64,
    pub index: u64,
    #[serde(skip)]
    base: u64,
    #[serde(skip)]
    exps: Vec<u64>,
    pub conductor: u64,
    /// Index of the primitive character inducing this one, in the group mod `conductor`.
    pub primitive_index: u64,
}

impl DirichletCharacter {
    pub fn new(modulus: u64, index: u64) -> Result<DirichletCharacter> {
        CharacterGroup::new(modulus)?.character(index)
    }

    pub fn trivial() -> DirichletCharacter {
        DirichletCharacter::new(1, 0).unwrap()
    }

    /// χ(n) = e(k/base) with k returned, or None when gcd(n, q) > 1.
    pub fn exponent(&self, n: u64) -> Option<u64> {
        let k = self.exps[(n % self.modulus) as usize];
        (k != NONE).then_some(k)
    }

    pub fn base(&self) -> u64 {
        self.base
    }

    pub fn value(&self, n: u64) -> C64 {
        match self.exponent(n) {
            None => C64::new(0.0, 0.0),
            Some(0) => C64::new(1.0, 0.0),
            Some(k) => {
                // Exact for the real values ±1 and ±i.
                let g = gcd(k, self.base);
                match (k / g, self.base / g) {
                    (1, 2) => C64::new(-1.0, 0.0),
                    (1, 4) => C64::new(0.0, 1.0),
                    (3, 4) => C64::new(0.0, -1.0),
                    (a, b) => C64::from_polar(1.0, 2.0 * PI * a as f64 / b as f64),
                }
            }
        }
    }

    pub fn is_primitive(&self) -> bool {
        self.conductor == self.modulus
    }

    pub fn inducing_modulus(&self) -> u64 {
        self.conductor
    }

    pub fn is_principal(&self) -> bool {
        self.index == 0
    }

    pub fn is_even(&self) -> bool {
        self.modulus <= 2 || self.exponent(self.modulus - 1) == Some(0)
    }

    /// The primitive character χ* inducing χ.
    pub fn primitive(&self) -> DirichletCharacter {
        DirichletCharacter::new(self.conductor, self.primitive_index).unwrap()
    }

    /// The character mod `m` (a multiple of the conductor) induced by χ*.
    pub fn induce_to(&self, m: u64) -> Result<DirichletCharacter> {
        if m % self.conductor != 0 {
            return Err(LabError::Invalid(format!(
                "modulus {m} is not a multiple of the conductor {}",
                self.conductor
            )));
        }
        let star = self.primitive();
        let group = CharacterGroup::new(m)?;
        for i in 0..group.size() {
            let c = group.character(i)?;
            if c.conductor == self.conductor && c.primitive_index == star.index {
                return Ok(c);
            }
        }
        Err(LabError::Invalid("no induced character found".into()))
    }
}

pub fn character_group(q: u64) -> Result<Vec<DirichletCharacter>> {
    Ok(CharacterGroup::new(q)?.all())
}
