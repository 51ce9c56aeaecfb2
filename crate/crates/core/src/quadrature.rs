//! Gauss rules and composite panel integration.

use crate::number::C64;
use std::sync::OnceLock;

/// Nodes and weights of the n-point Gauss–Legendre rule on [-1, 1].
pub fn gauss_legendre(n: usize) -> (Vec<f64>, Vec<f64>) {
    let mut x = vec![0.0; n];
    let mut w = vec![0.0; n];
    let m = (n + 1) / 2;
    for i in 0..m {
        let mut z = (std::f64::consts::PI * (i as f64 + 0.75) / (n as f64 + 0.5)).cos();
        let mut pp = 0.0;
        for _ in 0..100 {
            let (mut p1, mut p2) = (1.0, 0.0);
            for j in 1..=n {
                let p3 = p2;
                p2 = p1;
                p1 = ((2 * j - 1) as f64 * z * p2 - (j - 1) as f64 * p3) / j as f64;
            }
            pp = n as f64 * (z * p1 - p2) / (z * z - 1.0);
            let dz = p1 / pp;
            z -= dz;
            if dz.abs() < 1e-16 {
                break;
            }
        }
        x[i] = -z;
        x[n - 1 - i] = z;
        w[i] = 2.0 / ((1.0 - z * z) * pp * pp);
        w[n - 1 - i] = w[i];
    }
    (x, w)
}

/// Nodes and weights of the n-point Gauss–Laguerre rule for ∫_0^∞ e^{-x} f(x) dx.
pub fn gauss_laguerre(n: usize) -> (Vec<f64>, Vec<f64>) {
    let mut x = vec![0.0; n];
    let mut w = vec![0.0; n];
    let nf = n as f64;
    let mut z: f64 = 0.0;
    for i in 0..n {
        if i == 0 {
            z = 3.0 / (1.0 + 2.4 * nf);
        } else if i == 1 {
            z += 15.0 / (1.0 + 2.5 * nf);
        } else {
            let ai = (i - 1) as f64;
            z += (1.0 + 2.55 * ai) / (1.9 * ai) * (z - x[i - 2]);
        }
        let (mut p1, mut p2, mut pp) = (1.0, 0.0, 1.0);
        for _ in 0..200 {
            p1 = 1.0;
            p2 = 0.0;
            for j in 1..=n {
                let p3 = p2;
                p2 = p1;
                p1 = ((2 * j - 1) as f64 - z) * p2 / j as f64 - (j - 1) as f64 * p3 / j as f64;
            }
            pp = nf * (p1 - p2) / z;
            let dz = p1 / pp;
            z -= dz;
            if dz.abs() <= 1e-15 * z.abs().max(1.0) {
                break;
            }
        }
        let _ = p1;
        x[i] = z;
        w[i] = -1.0 / (pp * nf * p2);
    }
    (x, w)
}

pub fn gl16() -> &'static (Vec<f64>, Vec<f64>) {
    static R: OnceLock<(Vec<f64>, Vec<f64>)> = OnceLock::new();
    R.get_or_init(|| gauss_legendre(16))
}

/// ∫_a^b f over `panels` equal panels with the 16-point Gauss–Legendre rule.
pub fn integrate_panels<F: FnMut(f64) -> C64>(mut f: F, a: f64, b: f64, panels: usize) -> C64 {
    let (x, w) = gl16();
    let h = (b - a) / panels as f64;
    let mut total = C64::new(0.0, 0.0);
    for k in 0..panels {
        let lo = a + k as f64 * h;
        let mid = lo + 0.5 * h;
        let mut acc = C64::new(0.0, 0.0);
        for (xi, wi) in x.iter().zip(w.iter()) {
            acc += f(mid + 0.5 * h * xi) * *wi;
        }
        total += acc * (0.5 * h);
    }
    total
}

/// Same as [`integrate_panels`] with a fallible integrand.
pub fn try_integrate_panels<E, F: FnMut(f64) -> Result<C64, E>>(
    mut f: F,
    a: f64,
    b: f64,
    panels: usize,
) -> Result<C64, E> {
    let (x, w) = gl16();
    let h = (b - a) / panels as f64;
    let mut total = C64::new(0.0, 0.0);
    for k in 0..panels {
        let mid = a + (k as f64 + 0.5) * h;
        let mut acc = C64::new(0.0, 0.0);
        for (xi, wi) in x.iter().zip(w.iter()) {
            acc += f(mid + 0.5 * h * xi)? * *wi;
        }
        total += acc * (0.5 * h);
    }
    Ok(total)
}
