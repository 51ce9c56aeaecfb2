//! Oscillatory integrals over the detector window.
//!
//! J(K; a, b) = ∫_a^b e^{i(t log(t/K) − t)} dt has one stationary point at
//! t = K. Away from it each endpoint contributes P(c) = ∫ e^{iφ} along the
//! steepest-descent path leaving c, evaluated with Gauss–Laguerre nodes;
//! the neighbourhood of the stationary point is integrated on the real line.

use crate::error::{LabError, Result};
use crate::gamma::clog1p;
use crate::number::C64;
use crate::quadrature::{gauss_laguerre, gl16};
use std::f64::consts::PI;
use std::sync::OnceLock;

fn laguerre(n: usize) -> &'static (Vec<f64>, Vec<f64>) {
    static L20: OnceLock<(Vec<f64>, Vec<f64>)> = OnceLock::new();
    static L32: OnceLock<(Vec<f64>, Vec<f64>)> = OnceLock::new();
    static L48: OnceLock<(Vec<f64>, Vec<f64>)> = OnceLock::new();
    match n {
        20 => L20.get_or_init(|| gauss_laguerre(20)),
        32 => L32.get_or_init(|| gauss_laguerre(32)),
        _ => L48.get_or_init(|| gauss_laguerre(48)),
    }
}

fn phase(t: f64, k: f64) -> f64 {
    t * (t / k).ln() - t
}

/// P(c) = e^{iφ(c)} ∫_0^∞ e^{−p} i/φ'(h(p)) dp where φ(h(p)) = φ(c) + ip.
pub fn endpoint(c: f64, k: f64) -> Result<C64> {
    let l = (c / k).ln();
    if l == 0.0 {
        return Err(LabError::Invalid("endpoint sits on the stationary point".into()));
    }
    let gap = (phase(k, k) - phase(c, k)).abs();
    let n = if gap < 60.0 {
        48
    } else if gap < 200.0 {
        32
    } else {
        20
    };
    let (nodes, weights) = laguerre(n);
    let i = C64::new(0.0, 1.0);
    // g(u) = φ(c+u) − φ(c) − ip, g'(u) = φ'(c+u).
    let dphi = |u: C64| C64::new(l, 0.0) + clog1p(u / c);
    let g = |u: C64, p: f64| u * l + (u + c) * clog1p(u / c) - u - i * p;
    let mut u = C64::new(0.0, 0.0);
    let mut p = 0.0;
    let mut acc = C64::new(0.0, 0.0);
    for (&target, &w) in nodes.iter().zip(weights) {
        while p < target {
            let d = dphi(u);
            let scale = (u + c).norm();
            let mut step = (target - p).min(0.3 * scale * d.norm());
            let mut ok = false;
            for _ in 0..40 {
                let mut v = u + i * step / d;
                let mut converged = false;
                for _ in 0..30 {
                    let delta = g(v, p + step) / dphi(v);
                    v -= delta;
                    if delta.norm() <= 1e-14 * (v + c).norm() {
                        converged = true;
                        break;
                    }
                }
                if converged && (v - u).norm() <= 0.5 * scale {
                    u = v;
                    ok = true;
                    break;
                }
                step *= 0.5;
            }
            if !ok {
                return Err(LabError::NonConvergence(format!("descent path from {c} (K = {k}) stalled at p = {p}")));
            }
            p += step;
        }
        acc += i / dphi(u) * w;
    }
    Ok(C64::from_polar(1.0, phase(c, k)) * acc)
}

/// Gauss–Legendre over `panels` equal pieces of [a, b].
fn direct(k: f64, a: f64, b: f64, panels: usize) -> C64 {
    let (x, w) = gl16();
    let h = (b - a) / panels as f64;
    let mut acc = C64::new(0.0, 0.0);
    for j in 0..panels {
        let mid = a + (j as f64 + 0.5) * h;
        for (xi, wi) in x.iter().zip(w) {
            acc += C64::from_polar(wi * 0.5 * h, phase(mid + 0.5 * h * xi, k));
        }
    }
    acc
}

/// J(K; a, b) = ∫_a^b e^{i(t log(t/K) − t)} dt for 0 < a < b.
pub fn window_integral(k: f64, a: f64, b: f64) -> Result<C64> {
    let half = 6.0 * k.sqrt();
    let (z1, z2) = ((k - half).max(a), (k + half).min(b));
    if z1 >= z2 {
        // No stationary point nearby: both endpoints on the same side.
        return Ok(endpoint(a, k)? - endpoint(b, k)?);
    }
    let mut acc = direct(k, z1, z2, 16);
    if a < z1 {
        acc += endpoint(a, k)? - endpoint(z1, k)?;
    }
    if z2 < b {
        acc += endpoint(z2, k)? - endpoint(b, k)?;
    }
    Ok(acc)
}

/// Adaptive real-line quadrature of f(t)e^{iθ(t)} with panel width π/ω(t)
/// and one halving pass as a convergence check. Returns the refined value
/// and the change between the two passes.
pub fn panel_integral<F>(f: F, a: f64, b: f64, width: impl Fn(f64) -> f64) -> Result<(C64, f64)>
where
    F: Fn(f64) -> Result<C64>,
{
    let mut breaks = vec![a];
    let mut t = a;
    while t < b {
        let w = width(t).max(1e-6);
        t = (t + w).min(b);
        breaks.push(t);
    }
    let (x, wts) = gl16();
    let run = |split: usize| -> Result<C64> {
        let mut acc = C64::new(0.0, 0.0);
        for pair in breaks.windows(2) {
            let h = (pair[1] - pair[0]) / split as f64;
            for s in 0..split {
                let mid = pair[0] + (s as f64 + 0.5) * h;
                for (xi, wi) in x.iter().zip(wts) {
                    acc += f(mid + 0.5 * h * xi)? * (wi * 0.5 * h);
                }
            }
        }
        Ok(acc)
    };
    let coarse = run(1)?;
    let fine = run(2)?;
    Ok((fine, (fine - coarse).norm()))
}

/// The phase θ(t) = t log(t/(2πeα)) − π/4 of the detector kernel.
pub fn kernel_phase(t: f64, alpha: f64) -> f64 {
    t * (t / (2.0 * PI * alpha)).ln() - t - PI / 4.0
}
