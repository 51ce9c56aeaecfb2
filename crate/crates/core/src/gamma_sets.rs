//! Exact arithmetic on the pole rays γ(α, β) = {−(n+β)/α : n ≥ 0} and their
//! finite sums, used by the degree-zero classification.

use crate::error::{LabError, Result};
use crate::model::{degree, FunctionalEquation, GammaFactor};
use crate::number::Rat;
use num_integer::Integer;
use num_traits::{Signed, Zero};
use serde::Serialize;
use std::collections::BTreeMap;

/// Exact complex rational point.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Point {
    pub re: Rat,
    pub im: Rat,
}

impl Point {
    pub fn new(re: Rat, im: Rat) -> Point {
        Point { re, im }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct GammaSet {
    pub alpha: Rat,
    pub beta_re: Rat,
    pub beta_im: Rat,
}

impl GammaSet {
    pub fn new(alpha: Rat, beta_re: Rat, beta_im: Rat) -> Result<GammaSet> {
        if !alpha.is_positive() {
            return Err(LabError::Invalid(format!("gamma set needs alpha > 0, got {alpha}")));
        }
        Ok(GammaSet { alpha, beta_re, beta_im })
    }

    /// Pole set of Γ(λs + μ).
    pub fn of_factor(g: &GammaFactor) -> Result<GammaSet> {
        let lambda = g.lambda.to_rat().ok_or_else(|| LabError::Validation(format!("λ = {} is not rational", g.lambda)))?;
        let (re, im) = g.mu.to_rat().ok_or_else(|| LabError::Validation("μ is not rational".into()))?;
        GammaSet::new(lambda, re, im)
    }

    pub fn point(&self, n: i128) -> Point {
        let n = Rat::from_integer(n);
        Point::new(-(n + self.beta_re) / self.alpha, -self.beta_im / self.alpha)
    }

    /// Index n with point(n) = z, if any.
    pub fn index_of(&self, z: &Point) -> Option<i128> {
        if -self.alpha * z.im != self.beta_im {
            return None;
        }
        let n = -self.alpha * z.re - self.beta_re;
        (n.is_integer() && !n.is_negative()).then(|| n.to_integer())
    }

    /// Points with real part ≥ −w.
    pub fn window(&self, w: Rat) -> Vec<Point> {
        let mut out = Vec::new();
        let mut n = 0;
        loop {
            let p = self.point(n);
            if p.re < -w {
                break;
            }
            out.push(p);
            n += 1;
        }
        out
    }

    /// The subsequence n = b + m k, k ≥ 0.
    fn class(&self, b: i128, m: i128) -> GammaSet {
        let m = Rat::from_integer(m);
        GammaSet {
            alpha: self.alpha / m,
            beta_re: (Rat::from_integer(b) + self.beta_re) / m,
            beta_im: self.beta_im / m,
        }
    }
}

/// W₁ ∩ W₂ described from both sides: n₁ ≡ r₁ (mod m₁), n₁ ≥ start₁ and
/// n₂ ≡ r₂ (mod m₂), n₂ ≥ start₂.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct Overlap {
    pub m1: i128,
    pub r1: i128,
    pub start1: i128,
    pub m2: i128,
    pub r2: i128,
    pub start2: i128,
}

fn mod_inverse(a: i128, m: i128) -> i128 {
    if m == 1 {
        return 0;
    }
    let e = a.extended_gcd(&m);
    e.x.rem_euclid(m)
}

fn ceil_div(a: i128, b: i128) -> i128 {
    Integer::div_ceil(&a, &b)
}

/// The intersection, which is either empty or infinite.
pub fn overlap(w1: &GammaSet, w2: &GammaSet) -> Option<Overlap> {
    if w1.beta_im / w1.alpha != w2.beta_im / w2.alpha {
        return None;
    }
    let rho = w2.alpha / w1.alpha;
    let (m2, m1) = (*rho.numer(), *rho.denom());
    let kappa = rho * w1.beta_re - w2.beta_re;
    let j = kappa * Rat::from_integer(m1);
    if !j.is_integer() {
        return None;
    }
    let j = j.to_integer();
    // n₂ = (m₂ n₁ + j)/m₁ needs m₂ n₁ ≡ −j (mod m₁).
    let r1 = (-j * mod_inverse(m2, m1)).rem_euclid(m1);
    let lower = 0.max(ceil_div(-j, m2));
    let start1 = lower + (r1 - lower).rem_euclid(m1);
    let start2 = (m2 * start1 + j) / m1;
    let r2 = start2.rem_euclid(m2);
    Some(Overlap { m1, r1, start1, m2, r2, start2 })
}

/// Finite sum of γ-sets plus a finite signed point multiset.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct GammaMultiset {
    pub parts: BTreeMap<GammaSet, u32>,
    pub finite_adjust: BTreeMap<Point, i64>,
}

impl GammaMultiset {
    pub fn new() -> GammaMultiset {
        GammaMultiset::default()
    }

    pub fn single(w: GammaSet) -> GammaMultiset {
        let mut v = GammaMultiset::new();
        v.add_part(w, 1);
        v
    }

    pub fn add_part(&mut self, w: GammaSet, mult: u32) {
        if mult > 0 {
            *self.parts.entry(w).or_insert(0) += mult;
        }
    }

    pub fn add_point(&mut self, z: Point, mult: i64) {
        let e = self.finite_adjust.entry(z).or_insert(0);
        *e += mult;
        if *e == 0 {
            self.finite_adjust.remove(&z);
        }
    }

    pub fn is_empty(&self) -> bool {
        self.parts.is_empty() && self.finite_adjust.is_empty()
    }

    /// Multiplicity of a single point.
    pub fn multiplicity(&self, z: &Point) -> i64 {
        let from_parts: i64 =
            self.parts.iter().filter(|(w, _)| w.index_of(z).is_some()).map(|(_, m)| *m as i64).sum();
        from_parts + self.finite_adjust.get(z).copied().unwrap_or(0)
    }

    /// Point multiplicities on Re ≥ −w, zero entries dropped.
    pub fn window(&self, w: Rat) -> BTreeMap<Point, i64> {
        let mut out = BTreeMap::new();
        for (set, m) in &self.parts {
            for p in set.window(w) {
                *out.entry(p).or_insert(0) += *m as i64;
            }
        }
        for (p, m) in &self.finite_adjust {
            if p.re >= -w {
                *out.entry(*p).or_insert(0) += m;
            }
        }
        out.retain(|_, m| *m != 0);
        out
    }

    fn units(&self) -> Vec<GammaSet> {
        self.parts.iter().flat_map(|(w, m)| std::iter::repeat(*w).take(*m as usize)).collect()
    }
}

/// Σ multiplicity · α; the finite part contributes nothing.
pub fn density(v: &GammaMultiset) -> Rat {
    v.parts.iter().map(|(w, m)| w.alpha * Rat::from_integer(*m as i128)).sum()
}

/// Removes the overlap from one side: the other residue classes stay as
/// γ-sets and the early members of the overlapping class become points.
fn remove_overlap(w: &GammaSet, m: i128, r: i128, start: i128, rest: &mut Vec<GammaSet>, points: &mut BTreeMap<Point, i64>) {
    for b in 0..m {
        if b != r {
            rest.push(w.class(b, m));
        }
    }
    let mut n = r;
    while n < start {
        *points.entry(w.point(n)).or_insert(0) += 1;
        n += m;
    }
}

/// W₁ ∖ W₂ as residue-class γ-sets plus a finite set.
pub fn set_difference(w1: &GammaSet, w2: &GammaSet) -> GammaMultiset {
    multiset_difference(&GammaMultiset::single(*w1), &GammaMultiset::single(*w2))
}

/// Multiset difference V₁ ∖ V₂ (multiplicities truncated at zero) together
/// with the density of the overlap that was cancelled.
pub fn multiset_difference_with_overlap(v1: &GammaMultiset, v2: &GammaMultiset) -> (GammaMultiset, Rat) {
    let mut a = v1.units();
    let mut b = v2.units();
    let mut fa: BTreeMap<Point, i64> = v1.finite_adjust.clone();
    let mut fb: BTreeMap<Point, i64> = v2.finite_adjust.clone();
    let mut overlap_density = Rat::zero();
    // Repeatedly cancel the lexicographically first pair with infinite overlap.
    loop {
        a.sort();
        b.sort();
        let hit = a.iter().enumerate().find_map(|(i, wa)| {
            b.iter().enumerate().find_map(|(k, wb)| overlap(wa, wb).map(|o| (i, k, o)))
        });
        let Some((i, k, o)) = hit else { break };
        let wa = a.swap_remove(i);
        let wb = b.swap_remove(k);
        overlap_density += wa.alpha / Rat::from_integer(o.m1);
        remove_overlap(&wa, o.m1, o.r1, o.start1, &mut a, &mut fa);
        remove_overlap(&wb, o.m2, o.r2, o.start2, &mut b, &mut fb);
    }
    // Remaining parts of the two sides are disjoint; only finitely many points
    // need truncation.
    let mut out = GammaMultiset::new();
    for w in &a {
        out.add_part(*w, 1);
    }
    let mut candidates: Vec<Point> = fa.keys().chain(fb.keys()).copied().collect();
    candidates.sort();
    candidates.dedup();
    for z in candidates {
        let in_parts_a = a.iter().filter(|w| w.index_of(&z).is_some()).count() as i64;
        let in_parts_b = b.iter().filter(|w| w.index_of(&z).is_some()).count() as i64;
        let c1 = in_parts_a + fa.get(&z).copied().unwrap_or(0);
        let c2 = in_parts_b + fb.get(&z).copied().unwrap_or(0);
        let want = (c1 - c2).max(0);
        out.add_point(z, want - in_parts_a);
    }
    (out, overlap_density)
}

pub fn multiset_difference(v1: &GammaMultiset, v2: &GammaMultiset) -> GammaMultiset {
    multiset_difference_with_overlap(v1, v2).0
}

/// Pole multiset of Π Γ(λs + μ).
pub fn pole_multiset(factors: &[GammaFactor]) -> Result<GammaMultiset> {
    let mut v = GammaMultiset::new();
    for g in factors {
        v.add_part(GammaSet::of_factor(g)?, 1);
    }
    Ok(v)
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ShapeCheck {
    /// G has finitely many zeros and poles.
    pub finite_zero_pole: bool,
    /// Poles of G not cancelled by denominator poles.
    pub poles: GammaMultisetDump,
    /// Zeros of G (denominator poles not cancelled).
    pub zeros: GammaMultisetDump,
    pub note: Option<String>,
}

/// Compares numerator and denominator pole multisets of a degree-zero quotient.
pub fn degree_zero_shape_check(fe: &FunctionalEquation) -> Result<ShapeCheck> {
    let d = degree(fe);
    if !d.is_zero() {
        return Err(LabError::DegreeMismatch(format!("shape check needs degree 0, got {d}")));
    }
    let num = pole_multiset(&fe.numerator)?;
    let den = pole_multiset(&fe.denominator)?;
    let poles = multiset_difference(&num, &den);
    let zeros = multiset_difference(&den, &num);
    let finite = density(&poles).is_zero() && density(&zeros).is_zero();
    Ok(ShapeCheck {
        finite_zero_pole: finite,
        poles: GammaMultisetDump::from(&poles),
        zeros: GammaMultisetDump::from(&zeros),
        note: (!finite).then(|| {
            "the gamma quotient has infinitely many zeros or poles; no degree-zero series with this functional equation exists"
                .to_string()
        }),
    })
}

/// JSON view with rationals written as "p/q".
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct GammaMultisetDump {
    pub parts: Vec<PartDump>,
    pub finite_adjust: Vec<PointDump>,
    pub density: String,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct PartDump {
    pub alpha: String,
    pub beta: [String; 2],
    pub multiplicity: u32,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct PointDump {
    pub at: [String; 2],
    pub multiplicity: i64,
}

impl From<&GammaMultiset> for GammaMultisetDump {
    fn from(v: &GammaMultiset) -> Self {
        GammaMultisetDump {
            parts: v
                .parts
                .iter()
                .map(|(w, m)| PartDump {
                    alpha: w.alpha.to_string(),
                    beta: [w.beta_re.to_string(), w.beta_im.to_string()],
                    multiplicity: *m,
                })
                .collect(),
            finite_adjust: v
                .finite_adjust
                .iter()
                .map(|(p, m)| PointDump { at: [p.re.to_string(), p.im.to_string()], multiplicity: *m })
                .collect(),
            density: density(v).to_string(),
        }
    }
}

/// Brute-force truncated difference on the window Re ≥ −w.
pub fn window_difference(v1: &GammaMultiset, v2: &GammaMultiset, w: Rat) -> BTreeMap<Point, i64> {
    let a = v1.window(w);
    let b = v2.window(w);
    let mut out = BTreeMap::new();
    for (p, m) in a {
        let d = (m - b.get(&p).copied().unwrap_or(0)).max(0);
        if d > 0 {
            out.insert(p, d);
        }
    }
    out
}
