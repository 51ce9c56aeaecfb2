//! Real numbers that remember whether they were given exactly.

use num_complex::Complex64;
use num_rational::Ratio;
use num_traits::{ToPrimitive, Zero};
use serde::de::{self, Deserializer, Visitor};
use serde::{Deserialize, Serialize, Serializer};
use std::fmt;

pub type Rat = Ratio<i128>;
pub type C64 = Complex64;

/// A real parameter: exact rational when supplied as a string like `"3/2"`,
/// floating otherwise.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum Real {
    Exact(Rat),
    Float(f64),
}

pub fn rat_to_f64(r: &Rat) -> f64 {
    r.numer().to_f64().unwrap() / r.denom().to_f64().unwrap()
}

/// Parses `"p/q"`, `"p"` or a decimal such as `"0.25"` into an exact rational.
pub fn parse_rat(s: &str) -> Option<Rat> {
    let s = s.trim();
    if let Some((p, q)) = s.split_once('/') {
        let p: i128 = p.trim().parse().ok()?;
        let q: i128 = q.trim().parse().ok()?;
        if q == 0 {
            return None;
        }
        return Some(Rat::new(p, q));
    }
    if let Ok(p) = s.parse::<i128>() {
        return Some(Rat::from_integer(p));
    }
    let (neg, body) = match s.strip_prefix('-') {
        Some(b) => (true, b),
        None => (false, s.strip_prefix('+').unwrap_or(s)),
    };
    let (ip, fp) = body.split_once('.')?;
    if fp.len() > 18 || !fp.chars().all(|c| c.is_ascii_digit()) {
        return None;
    }
    let ip: i128 = if ip.is_empty() { 0 } else { ip.parse().ok()? };
    let fpv: i128 = if fp.is_empty() { 0 } else { fp.parse().ok()? };
    let den = 10i128.pow(fp.len() as u32);
    let r = Rat::new(ip * den + fpv, den);
    Some(if neg { -r } else { r })
}

impl Real {
    pub fn exact(p: i128, q: i128) -> Real {
        Real::Exact(Rat::new(p, q))
    }

    pub fn value(&self) -> f64 {
        match self {
            Real::Exact(r) => rat_to_f64(r),
            Real::Float(x) => *x,
        }
    }

    /// The exact value, also recovering floats that are dyadic with a small
    /// denominator (such as 0.5 or 0.25 written as JSON numbers).
    pub fn to_rat(&self) -> Option<Rat> {
        match self {
            Real::Exact(r) => Some(*r),
            Real::Float(x) => {
                let scaled = x * 1024.0;
                if x.is_finite() && scaled.fract() == 0.0 && scaled.abs() < 1e15 {
                    Some(Rat::new(scaled as i128, 1024))
                } else {
                    None
                }
            }
        }
    }

    pub fn is_exact(&self) -> bool {
        matches!(self, Real::Exact(_))
    }

    pub fn add(&self, o: &Real) -> Real {
        match (self, o) {
            (Real::Exact(a), Real::Exact(b)) => Real::Exact(a + b),
            _ => Real::Float(self.value() + o.value()),
        }
    }

    pub fn mul(&self, o: &Real) -> Real {
        match (self, o) {
            (Real::Exact(a), Real::Exact(b)) => Real::Exact(a * b),
            _ => Real::Float(self.value() * o.value()),
        }
    }

    pub fn neg(&self) -> Real {
        match self {
            Real::Exact(a) => Real::Exact(-a),
            Real::Float(x) => Real::Float(-x),
        }
    }

    pub fn is_zero(&self) -> bool {
        match self {
            Real::Exact(a) => a.is_zero(),
            Real::Float(x) => *x == 0.0,
        }
    }
}

impl From<f64> for Real {
    fn from(x: f64) -> Self {
        Real::Float(x)
    }
}

impl fmt::Display for Real {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Real::Exact(r) if r.is_integer() => write!(f, "{}", r.numer()),
            Real::Exact(r) => write!(f, "{}/{}", r.numer(), r.denom()),
            Real::Float(x) => write!(f, "{}", x),
        }
    }
}

impl Serialize for Real {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        match self {
            Real::Exact(_) => s.serialize_str(&self.to_string()),
            Real::Float(x) => s.serialize_f64(*x),
        }
    }
}

impl<'de> Deserialize<'de> for Real {
    fn deserialize<D: Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        struct V;
        impl<'de> Visitor<'de> for V {
            type Value = Real;
            fn expecting(&self, f: &mut fmt::Formatter) -> fmt::Result {
                f.write_str("a number or a rational string such as \"1/2\"")
            }
            fn visit_f64<E: de::Error>(self, v: f64) -> std::result::Result<Real, E> {
                Ok(Real::Float(v))
            }
            fn visit_i64<E: de::Error>(self, v: i64) -> std::result::Result<Real, E> {
                Ok(Real::Exact(Rat::from_integer(v as i128)))
            }
            fn visit_u64<E: de::Error>(self, v: u64) -> std::result::Result<Real, E> {
                Ok(Real::Exact(Rat::from_integer(v as i128)))
            }
            fn visit_str<E: de::Error>(self, v: &str) -> std::result::Result<Real, E> {
                if let Some(r) = parse_rat(v) {
                    return Ok(Real::Exact(r));
                }
                v.trim()
                    .parse::<f64>()
                    .map(Real::Float)
                    .map_err(|_| E::custom(format!("cannot parse '{v}' as a real number")))
            }
        }
        d.deserialize_any(V)
    }
}

/// Complex parameter with separately exact or floating parts, serialized as `[re, im]`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct CReal {
    pub re: Real,
    pub im: Real,
}

impl CReal {
    pub fn real(re: Real) -> CReal {
        CReal { re, im: Real::Exact(Rat::zero()) }
    }

    pub fn exact(re: Rat, im: Rat) -> CReal {
        CReal { re: Real::Exact(re), im: Real::Exact(im) }
    }

    pub fn value(&self) -> C64 {
        C64::new(self.re.value(), self.im.value())
    }

    pub fn to_rat(&self) -> Option<(Rat, Rat)> {
        Some((self.re.to_rat()?, self.im.to_rat()?))
    }

    pub fn add(&self, o: &CReal) -> CReal {
        CReal { re: self.re.add(&o.re), im: self.im.add(&o.im) }
    }

    pub fn conj(&self) -> CReal {
        CReal { re: self.re, im: self.im.neg() }
    }
}

impl Serialize for CReal {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        (self.re, self.im).serialize(s)
    }
}

impl<'de> Deserialize<'de> for CReal {
    fn deserialize<D: Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        #[derive(Deserialize)]
        #[serde(untagged)]
        enum Form {
            Pair(Real, Real),
            Single(Real),
        }
        Ok(match Form::deserialize(d)? {
            Form::Pair(re, im) => CReal { re, im },
            Form::Single(re) => CReal::real(re),
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parses_rationals_and_decimals() {
        assert_eq!(parse_rat("3/6"), Some(Rat::new(1, 2)));
        assert_eq!(parse_rat("-0.25"), Some(Rat::new(-1, 4)));
        assert_eq!(parse_rat("7"), Some(Rat::from_integer(7)));
        assert_eq!(parse_rat("1/0"), None);
        assert_eq!(parse_rat("pi"), None);
    }

    #[test]
    fn json_round_trip() {
        let r: Real = serde_json::from_str("\"11/2\"").unwrap();
        assert_eq!(r, Real::exact(11, 2));
        assert_eq!(serde_json::to_string(&r).unwrap(), "\"11/2\"");
        let f: Real = serde_json::from_str("0.1").unwrap();
        assert_eq!(f, Real::Float(0.1));
        assert!(f.to_rat().is_none());
        let h: Real = serde_json::from_str("0.5").unwrap();
        assert_eq!(h.to_rat(), Some(Rat::new(1, 2)));
        let c: CReal = serde_json::from_str("[\"1/2\", 0]").unwrap();
        assert_eq!(c.to_rat(), Some((Rat::new(1, 2), Rat::zero())));
    }
}
