//! Bundled series and the JSON spec loader.

use crate::arith::source::{incomplete, CoefficientSource};
use crate::error::{LabError, Result};
use crate::model::{monoid_product, ClassFlag, FunctionalEquation, GammaFactor, LFunctionSpec, Pole, PoleSpec};
use crate::number::{parse_rat, rat_to_f64, Real, C64};
use serde_json::Value;
use std::f64::consts::PI;
use std::path::Path;

const TAU_TABLE: &str = include_str!("../data/ramanujan_tau.txt");

pub const BUNDLED: [&str; 7] = ["zeta", "l_chi3", "l_chi4", "zeta_l_chi4", "zeta_odd", "delta", "zeta_squared"];

pub fn zeta_fe() -> FunctionalEquation {
    FunctionalEquation {
        q_scale: Real::Float(PI.powf(-0.5)),
        omega: C64::new(1.0, 0.0),
        numerator: vec![GammaFactor::rational(1, 2, 0, 1)],
        denominator: vec![],
        poles: PoleSpec { entries: vec![Pole::simple(C64::new(1.0, 0.0), C64::new(1.0, 0.0))] },
    }
}

pub fn zeta() -> LFunctionSpec {
    LFunctionSpec {
        name: "zeta".into(),
        coefficients: CoefficientSource::zeta(),
        fe: zeta_fe(),
        abscissa: 1.0,
        flags: [ClassFlag::P3Prime, ClassFlag::P3DoublePrime, ClassFlag::P4, ClassFlag::P4Prime, ClassFlag::A1Normalized]
            .into_iter()
            .collect(),
        dirichlet_factor: None,
    }
}

/// L(s, χ) for a primitive character with root number 1 and parity `odd`.
pub fn dirichlet_l(name: &str, modulus: u64, index: u64, odd: bool) -> LFunctionSpec {
    LFunctionSpec {
        name: name.into(),
        coefficients: CoefficientSource::dirichlet_l(modulus, index),
        fe: FunctionalEquation {
            q_scale: Real::Float((modulus as f64 / PI).sqrt()),
            omega: C64::new(1.0, 0.0),
            numerator: vec![GammaFactor::rational(1, 2, odd as i128, 2)],
            denominator: vec![],
            poles: PoleSpec::default(),
        },
        abscissa: 1.0,
        flags: [ClassFlag::P3Prime, ClassFlag::P3DoublePrime, ClassFlag::P4, ClassFlag::P4Prime, ClassFlag::A1Normalized]
            .into_iter()
            .collect(),
        dirichlet_factor: None,
    }
}

pub fn l_chi3() -> LFunctionSpec {
    dirichlet_l("l_chi3", 3, 1, true)
}

pub fn l_chi4() -> LFunctionSpec {
    dirichlet_l("l_chi4", 4, 1, true)
}

/// (1 − 2^{−s})ζ(s). Its gamma data are those of ζ; the series has no
/// functional equation of its own and is bundled for classification.
pub fn zeta_odd() -> LFunctionSpec {
    let mut s = zeta();
    s.name = "zeta_odd".into();
    s.coefficients = incomplete(&CoefficientSource::zeta(), &[2].into_iter().collect()).expect("zeta has Euler data");
    s.fe.poles = PoleSpec { entries: vec![Pole::simple(C64::new(1.0, 0.0), C64::new(0.5, 0.0))] };
    s
}

/// τ(n) n^{−11/2} for n ≤ 10⁴.
pub fn tau_normalized() -> Vec<C64> {
    parse_table(TAU_TABLE, 5.5).expect("bundled table parses")
}

pub fn delta() -> LFunctionSpec {
    LFunctionSpec {
        name: "delta".into(),
        coefficients: CoefficientSource::Explicit { coeffs: tau_normalized(), terminates: false },
        fe: FunctionalEquation {
            q_scale: Real::Float(1.0 / (2.0 * PI)),
            omega: C64::new(1.0, 0.0),
            numerator: vec![GammaFactor::rational(1, 1, 11, 2)],
            denominator: vec![],
            poles: PoleSpec::default(),
        },
        abscissa: 1.0,
        flags: [ClassFlag::P3Prime, ClassFlag::P3DoublePrime, ClassFlag::A1Normalized].into_iter().collect(),
        dirichlet_factor: None,
    }
}

pub fn bundled(name: &str) -> Option<LFunctionSpec> {
    Some(match name {
        "zeta" => zeta(),
        "l_chi3" => l_chi3(),
        "l_chi4" => l_chi4(),
        "zeta_l_chi4" => {
            let mut p = monoid_product(&zeta(), &l_chi4());
            p.name = name.into();
            p
        }
        "zeta_odd" => zeta_odd(),
        "delta" => delta(),
        "zeta_squared" => {
            let mut p = monoid_product(&zeta(), &zeta());
            p.name = name.into();
            p
        }
        _ => return None,
    })
}

/// Lines "n value"; `#` starts a comment. Values are divided by n^weight.
fn parse_table(text: &str, weight: f64) -> Result<Vec<C64>> {
    let mut out = Vec::new();
    for (ln, line) in text.lines().enumerate() {
        let line = line.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        let mut it = line.split_whitespace();
        let bad = || LabError::Parse(format!("line {}: expected `n value`", ln + 1));
        let n: usize = it.next().and_then(|x| x.parse().ok()).ok_or_else(bad)?;
        let v: f64 = it.next().and_then(|x| x.parse().ok()).ok_or_else(bad)?;
        if n != out.len() + 1 {
            return Err(LabError::Parse(format!("line {}: index {n} out of sequence", ln + 1)));
        }
        out.push(C64::new(v / (n as f64).powf(weight), 0.0));
    }
    Ok(out)
}

/// Replaces `{"kind": "data_file", "path": ..., "weight": ...}` objects by
/// explicit coefficient lists, resolving paths against `base`.
fn resolve_data_files(v: &mut Value, base: &Path) -> Result<()> {
    match v {
        Value::Object(map) => {
            if map.get("kind").and_then(Value::as_str) == Some("data_file") {
                let rel = map.get("path").and_then(Value::as_str).ok_or_else(|| LabError::Parse("data_file needs a path".into()))?;
                let weight = match map.get("weight") {
                    None => 0.0,
                    Some(Value::String(s)) => {
                        rat_to_f64(&parse_rat(s).ok_or_else(|| LabError::Parse(format!("bad weight {s}")))?)
                    }
                    Some(w) => w.as_f64().ok_or_else(|| LabError::Parse("bad weight".into()))?,
                };
                for k in map.keys() {
                    if !["kind", "path", "weight"].contains(&k.as_str()) {
                        return Err(LabError::Parse(format!("unknown data_file field `{k}`")));
                    }
                }
                let path = base.join(rel);
                let text = std::fs::read_to_string(&path).map_err(|e| LabError::Io(format!("{}: {e}", path.display())))?;
                let coeffs = parse_table(&text, weight)?;
                *v = serde_json::json!({"kind": "explicit", "coeffs": coeffs, "terminates": false});
                return Ok(());
            }
            for x in map.values_mut() {
                resolve_data_files(x, base)?;
            }
        }
        Value::Array(a) => {
            for x in a {
                resolve_data_files(x, base)?;
            }
        }
        _ => {}
    }
    Ok(())
}

pub fn parse_spec(text: &str, base: &Path) -> Result<LFunctionSpec> {
    let mut v: Value = serde_json::from_str(text).map_err(|e| LabError::Parse(e.to_string()))?;
    resolve_data_files(&mut v, base)?;
    serde_json::from_value(v).map_err(|e| LabError::Parse(e.to_string()))
}

/// A bundled name or a path to a JSON spec.
pub fn load_spec(name_or_path: &str) -> Result<LFunctionSpec> {
    if let Some(s) = bundled(name_or_path) {
        return Ok(s);
    }
    let path = Path::new(name_or_path);
    let text = std::fs::read_to_string(path).map_err(|e| LabError::Io(format!("{name_or_path}: {e}")))?;
    parse_spec(&text, path.parent().unwrap_or(Path::new(".")))
}
