use crate::config::{Command, Format, RunConfig};
use selberg_lab::corpus::load_spec;
use selberg_lab::detector::{
    classify_degree_one, classify_degree_zero, detect, detect_csv, periodicity_test, primitivity_probe, recover_a, recover_q,
    DetectOptions,
};
use selberg_lab::evaluator::{EvalParams, Evaluator};
use selberg_lab::gamma::{asymptotic_constants, gamma_asym_csv};
use selberg_lab::gamma_sets::{degree_zero_shape_check, multiset_difference, pole_multiset, GammaMultisetDump};
use selberg_lab::model::{degree_gate, validate, DegreeClass, LFunctionSpec};
use selberg_lab::zeros::{compare_zero_sets, count_zeros, zeros_csv, Rectangle, COMPARE_THRESHOLD};
use selberg_lab::{LabError, Result};
use serde_json::{json, Value};

pub enum Artifact {
    Text(String),
    Json(Value),
    Csv(String),
}

pub struct Outcome {
    pub artifact: Artifact,
    pub exit_code: i32,
}

impl Outcome {
    fn ok(artifact: Artifact) -> Outcome {
        Outcome { artifact, exit_code: 0 }
    }
}

fn to_json<T: serde::Serialize>(v: &T) -> Value {
    serde_json::to_value(v).expect("result serializes")
}

/// 50 log-spaced points on [100, 10⁴].
fn default_gamma_grid() -> Vec<f64> {
    (0..50).map(|k| 100.0 * 100f64.powf(k as f64 / 49.0)).collect()
}

fn eval_params(cfg: &RunConfig) -> Result<EvalParams> {
    let mut p = EvalParams::default();
    p.x = cfg.x;
    if let Some(e) = cfg.eta {
        p.eta = e;
    }
    p.check()?;
    Ok(p)
}

fn rectangle(cfg: &RunConfig, default: [f64; 4]) -> Result<Rectangle> {
    let [a, b, c, d] = cfg.rectangle.unwrap_or(default);
    Rectangle::new(a, b, c, d)
}

fn specs(cfg: &RunConfig) -> Result<Vec<LFunctionSpec>> {
    cfg.specs.iter().map(|s| load_spec(s)).collect()
}

pub fn execute(cfg: &RunConfig) -> Result<Outcome> {
    cfg.check()?;
    let specs = specs(cfg)?;
    let spec = &specs[0];
    let format = cfg.format;
    Ok(match cfg.command {
        Command::Degree => Outcome::ok(Artifact::Text(format!("{}\n", spec.degree()))),
        Command::Validate => {
            let mut all = Vec::new();
            let mut bad = false;
            for (name, s) in cfg.specs.iter().zip(&specs) {
                let v = validate(s);
                bad |= !v.is_empty();
                all.push(json!({ "spec": name, "violations": to_json(&v) }));
            }
            Outcome { artifact: Artifact::Json(Value::Array(all)), exit_code: if bad { 2 } else { 0 } }
        }
        Command::Eval => {
            if cfg.t.is_empty() {
                return Err(LabError::Invalid("eval needs at least one t".into()));
            }
            let params = eval_params(cfg)?;
            let ev = Evaluator::new(spec);
            let mut csv = String::from("t,re,im,abs,re_smoothed,im_smoothed,re_r1,im_r1,re_r2,im_r2,X,terms\n");
            for &t in &cfg.t {
                let e = ev.critical_value(t, &params)?;
                csv.push_str(&format!(
                    "{t},{},{},{},{},{},{},{},{},{},{},{}\n",
                    e.value.re,
                    e.value.im,
                    e.value.norm(),
                    e.smoothed.re,
                    e.smoothed.im,
                    e.r1.re,
                    e.r1.im,
                    e.r2.re,
                    e.r2.im,
                    e.x,
                    e.terms
                ));
            }
            Outcome::ok(Artifact::Csv(csv))
        }
        Command::GammaAsym => match format {
            Some(Format::Json) => Outcome::ok(Artifact::Json(to_json(&asymptotic_constants(&spec.fe)?))),
            _ => {
                let ts = if cfg.t.is_empty() { default_gamma_grid() } else { cfg.t.clone() };
                Outcome::ok(Artifact::Csv(gamma_asym_csv(&spec.fe, &ts)?))
            }
        },
        Command::GammaSets => {
            let num = pole_multiset(&spec.fe.numerator)?;
            let den = pole_multiset(&spec.fe.denominator)?;
            let mut v = json!({
                "degree": spec.degree().to_string(),
                "numerator_poles": to_json(&GammaMultisetDump::from(&num)),
                "denominator_poles": to_json(&GammaMultisetDump::from(&den)),
                "uncancelled_poles": to_json(&GammaMultisetDump::from(&multiset_difference(&num, &den))),
                "uncancelled_zeros": to_json(&GammaMultisetDump::from(&multiset_difference(&den, &num))),
            });
            if degree_gate(&spec.fe)? == DegreeClass::Zero {
                v["degree_zero_shape"] = to_json(&degree_zero_shape_check(&spec.fe)?);
            }
            Outcome::ok(Artifact::Json(v))
        }
        Command::Detect => {
            let alphas = if cfg.alpha.is_empty() { vec![1.0] } else { cfg.alpha.clone() };
            let ts = if cfg.t.is_empty() { vec![500.0, 1000.0, 2000.0, 4000.0] } else { cfg.t.clone() };
            let opts = DetectOptions { params: eval_params(cfg)?, ..DetectOptions::default() };
            let r = detect(spec, &alphas, &ts, &opts)?;
            match format {
                Some(Format::Json) => Outcome::ok(Artifact::Json(to_json(&r))),
                _ => Outcome::ok(Artifact::Csv(detect_csv(&r))),
            }
        }
        Command::Classify => Outcome::ok(Artifact::Json(classify(cfg, spec)?)),
        Command::ProbePrimitivity => {
            let [lo, hi, step] = cfg.t_grid.unwrap_or([-5.0, 5.0, 0.01]);
            if !(step > 0.0 && hi >= lo) {
                return Err(LabError::Invalid("t grid needs t_min ≤ t_max and a positive step".into()));
            }
            let n = ((hi - lo) / step).round() as usize;
            let grid: Vec<f64> = (0..=n).map(|k| lo + k as f64 * step).collect();
            let r = primitivity_probe(
                &spec.coefficients,
                &grid,
                cfg.q_max.unwrap_or(20),
                cfg.horizon.unwrap_or(1000),
                cfg.threshold.unwrap_or(0.1),
            )?;
            Outcome::ok(Artifact::Json(to_json(&r)))
        }
        Command::Zeros => {
            let r = count_zeros(spec, &rectangle(cfg, [0.0, 1.0, 0.0, 50.0])?)?;
            match format {
                Some(Format::Csv) => Outcome::ok(Artifact::Csv(zeros_csv(&r.zeros))),
                _ => Outcome::ok(Artifact::Json(to_json(&r))),
            }
        }
        Command::CompareZeros => {
            let r = compare_zero_sets(
                spec,
                &specs[1],
                &rectangle(cfg, [0.0, 1.0, 0.0, 30.0])?,
                cfg.threshold.unwrap_or(COMPARE_THRESHOLD),
            )?;
            Outcome::ok(Artifact::Json(to_json(&r)))
        }
    })
}

/// Degree 0 goes to the Dirichlet-polynomial classifier, degree 1 to the
/// character decomposition. The period is the recovered q when a_n n^{−iA}
/// is periodic with it, otherwise the smallest period up to 100.
fn classify(cfg: &RunConfig, spec: &LFunctionSpec) -> Result<Value> {
    match degree_gate(&spec.fe)? {
        DegreeClass::Zero => Ok(json!({ "degree": "0", "result": to_json(&classify_degree_zero(spec)?) })),
        DegreeClass::One => {
            let a = match cfg.shift_a {
                Some(a) => a,
                None => recover_a(spec)?,
            };
            let horizon_for = |q: u64| cfg.horizon.unwrap_or(1000).max(10 * q as usize);
            let (q, source) = match cfg.period_q {
                Some(q) => (q, "given"),
                None => {
                    let (qr, is_int) = recover_q(spec)?;
                    let rq = qr.round() as u64;
                    if is_int && periodicity_test(&spec.coefficients, a, rq, horizon_for(rq))?.0 {
                        (rq, "functional equation")
                    } else {
                        let mut found = None;
                        for q in 1..=100 {
                            if periodicity_test(&spec.coefficients, a, q, horizon_for(q))?.0 {
                                found = Some(q);
                                break;
                            }
                        }
                        let q = found.ok_or_else(|| {
                            LabError::Precondition("a_n n^(-iA) has no period up to 100".into())
                        })?;
                        (q, "coefficient search")
                    }
                }
            };
            let r = classify_degree_one(&spec.coefficients, a, q, horizon_for(q))?;
            Ok(json!({ "degree": "1", "period_source": source, "result": to_json(&r) }))
        }
        DegreeClass::Other(d) => Err(LabError::DegreeMismatch(format!("classification covers degrees 0 and 1, got {d}"))),
    }
}

/// Adds the config hash: a JSON field, or a trailing CSV column.
pub fn render(artifact: &Artifact, hash: &str) -> String {
    match artifact {
        Artifact::Text(t) => t.clone(),
        Artifact::Json(v) => {
            let wrapped = json!({ "config_sha256": hash, "result": v });
            format!("{}\n", serde_json::to_string_pretty(&wrapped).expect("json renders"))
        }
        Artifact::Csv(c) => {
            let mut out = String::new();
            for (i, line) in c.lines().enumerate() {
                out.push_str(line);
                out.push_str(if i == 0 { ",config_sha256" } else { "," });
                if i > 0 {
                    out.push_str(hash);
                }
                out.push_str("\r\n");
            }
            out
        }
    }
}

/// Text artifacts written to a file become JSON so the hash can be embedded.
pub fn render_file(artifact: &Artifact, hash: &str) -> String {
    match artifact {
        Artifact::Text(t) => render(&Artifact::Json(Value::String(t.trim().to_string())), hash),
        other => render(other, hash),
    }
}
