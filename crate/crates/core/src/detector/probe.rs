//! Search for factorizations a_n = Σ_{de=n} χ₁(d)d^{−it₁} χ₂(e)e^{−it₂}.
//!
//! At a prime p coprime to both moduli a_p = χ₁(p)p^{−it₁} + χ₂(p)p^{−it₂}, so
//! ||a_p − χ₁(p)p^{−it₁}| − 1| bounds the residual of every pair containing
//! (χ₁, t₁) from below. Only pairs of single factors passing that screen get
//! the full convolution check.

use crate::arith::characters::{character_group, DirichletCharacter};
use crate::arith::primes::primes_up_to;
use crate::arith::source::{coefficients, dirichlet_convolution, CoefficientSource};
use crate::error::{LabError, Result};
use crate::number::C64;
use serde::Serialize;

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Factor {
    pub modulus: u64,
    pub index: u64,
    pub t: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ProbeReport {
    pub q_max: u64,
    pub horizon: usize,
    pub t_min: f64,
    pub t_max: f64,
    pub t_points: usize,
    /// Primitive characters with conductor ≤ q_max.
    pub characters: usize,
    pub screen_cutoff: f64,
    /// Single factors passing the prime screen.
    pub candidates: usize,
    pub pairs_checked: usize,
    /// Best full residual max_{n ≤ horizon} |a_n − (χ₁·χ₂)_n| among checked pairs.
    pub best_residual: Option<f64>,
    pub best: Option<(Factor, Factor)>,
    /// Smallest prime-screen bound over all single factors.
    pub screen_minimum: f64,
    /// Every pair on the grid has residual at least this.
    pub certified_floor: f64,
}

/// t = −5 … 5 in steps of 0.01.
pub fn default_t_grid() -> Vec<f64> {
    (0..=1000).map(|k| (k as f64 - 500.0) * 0.01).collect()
}

fn shifted_character(chi: &DirichletCharacter, t: f64, n_max: usize) -> Vec<C64> {
    let mut v = vec![C64::new(0.0, 0.0); n_max + 1];
    for (n, x) in v.iter_mut().enumerate().skip(1) {
        let c = chi.value(n as u64);
        if c != C64::new(0.0, 0.0) {
            *x = c * C64::from_polar(1.0, -t * (n as f64).ln());
        }
    }
    v
}

pub fn primitivity_probe(src: &CoefficientSource, t_grid: &[f64], q_max: u64, horizon: usize, screen_cutoff: f64) -> Result<ProbeReport> {
    if t_grid.is_empty() || q_max == 0 || horizon < 2 {
        return Err(LabError::Invalid("probe needs a nonempty t grid, q_max ≥ 1 and horizon ≥ 2".into()));
    }
    let a = coefficients(src, horizon)?;
    let chars: Vec<DirichletCharacter> = (1..=q_max)
        .map(character_group)
        .collect::<Result<Vec<_>>>()?
        .into_iter()
        .flatten()
        .filter(|c| c.is_primitive())
        .collect();
    let primes: Vec<u64> = primes_up_to(horizon as u64).into_iter().filter(|&p| p > q_max).collect();
    if primes.is_empty() {
        return Err(LabError::Precondition(format!("no primes in ({q_max}, {horizon}] for the screen")));
    }
    let mut screen_minimum = f64::INFINITY;
    let mut candidates: Vec<(Factor, f64)> = Vec::new();
    for chi in &chars {
        let vals: Vec<(C64, f64)> = primes.iter().map(|&p| (chi.value(p), (p as f64).ln())).collect();
        for &t in t_grid {
            let mut lb = 0.0f64;
            for (&p, (c, lp)) in primes.iter().zip(&vals) {
                lb = lb.max(((a[p as usize] - c * C64::from_polar(1.0, -t * lp)).norm() - 1.0).abs());
                if lb >= screen_cutoff && lb >= screen_minimum {
                    break;
                }
            }
            screen_minimum = screen_minimum.min(lb);
            if lb < screen_cutoff {
                candidates.push((Factor { modulus: chi.modulus, index: chi.index, t }, lb));
            }
        }
    }
    let seqs: Vec<Vec<C64>> = candidates
        .iter()
        .map(|(f, _)| Ok(shifted_character(&DirichletCharacter::new(f.modulus, f.index)?, f.t, horizon)))
        .collect::<Result<Vec<_>>>()?;
    let mut best: Option<(f64, usize, usize)> = None;
    let mut pairs = 0;
    for i in 0..candidates.len() {
        for j in i..candidates.len() {
            if candidates[i].1.max(candidates[j].1) >= best.map_or(f64::INFINITY, |b| b.0) {
                continue;
            }
            pairs += 1;
            let conv = dirichlet_convolution(&seqs[i], &seqs[j]);
            let res = (1..=horizon).map(|n| (a[n] - conv[n]).norm()).fold(0.0, f64::max);
            if best.map_or(true, |b| res < b.0) {
                best = Some((res, i, j));
            }
        }
    }
    let best_residual = best.map(|b| b.0);
    Ok(ProbeReport {
        q_max,
        horizon,
        t_min: t_grid.iter().copied().fold(f64::INFINITY, f64::min),
        t_max: t_grid.iter().copied().fold(f64::NEG_INFINITY, f64::max),
        t_points: t_grid.len(),
        characters: chars.len(),
        screen_cutoff,
        candidates: candidates.len(),
        pairs_checked: pairs,
        best_residual,
        best: best.map(|(_, i, j)| (candidates[i].0.clone(), candidates[j].0.clone())),
        screen_minimum,
        certified_floor: best_residual.map_or(screen_cutoff, |r| r.min(screen_cutoff)),
    })
}
