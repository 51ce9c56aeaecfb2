//! Critical-line values frozen from mpmath (Hurwitz zeta, 30 digits).

use selberg_lab::corpus;
use selberg_lab::evaluator::{EvalParams, Evaluator};
use selberg_lab::model::LFunctionSpec;

const TOL: f64 = 1e-8;

fn check(spec: &LFunctionSpec, table: &[(f64, f64, f64)]) {
    let ev = Evaluator::new(spec);
    let p = EvalParams::default();
    for &(t, re, im) in table {
        let v = ev.critical_value(t, &p).unwrap().value;
        assert!((v.re - re).abs() < TOL && (v.im - im).abs() < TOL, "{} at t={t}: {v}", spec.name);
    }
}

#[test]
fn zeta_on_critical_line() {
    check(
        &corpus::zeta(),
        &[
            (0.0, -1.4603545088095868, 0.0),
            (3.0, 0.53273667097423288, -0.078896513425833383),
            (10.0, 1.5448952202967528, -0.11533646527127338),
            (21.5, 0.25538342927283343, 0.45457350624225277),
            (60.0, 0.54120083514634811, 0.22718392236826873),
        ],
    );
}

#[test]
fn l_chi4_on_critical_line() {
    check(
        &corpus::l_chi4(),
        &[
            (0.0, 0.66769145718960918, 0.0),
            (3.0, 1.4685105834601207, 0.19169891968453042),
            (10.0, 0.02776895261690277, -0.44306067559374077),
            (21.5, 0.056642316657230255, 0.10569311760021518),
            (60.0, 0.74395037796685917, -1.6021850478423198),
        ],
    );
}

#[test]
fn l_chi3_on_critical_line() {
    check(
        &corpus::l_chi3(),
        &[
            (0.0, 0.48086755769682863, 0.0),
            (3.0, 1.126095539097696, 0.70809133446810767),
            (10.0, 1.2599706904371294, -0.088079634510148062),
        ],
    );
}
