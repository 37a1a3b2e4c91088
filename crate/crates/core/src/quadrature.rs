//! Stratified Monte-Carlo integration of `ℓ^{-k}` over a triangulated
//! polytope or its σ-measured boundary. Independent of the closed forms in
//! [`crate::reeb`]; used only to cross-check them.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use crate::error::Result;
use crate::reeb::{ReebCalculus, ReebVector};
use crate::scalar::to_f64;

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Estimate {
    pub value: f64,
    pub std_error: f64,
}

impl Estimate {
    /// Whether `exact` lies within `sigmas` standard errors of the estimate.
    pub fn agrees_with(&self, exact: f64, sigmas: f64) -> bool {
        (self.value - exact).abs() <= sigmas * self.std_error + 1e-12 * exact.abs()
    }
}

/// Estimates `∫_P ℓ_χ^{-k} dμ` (or `∫_{∂P} ℓ_χ^{-k} dσ` when `on_boundary`).
pub fn quadrature_oracle(
    calc: &ReebCalculus,
    chi: &ReebVector,
    exponent: i32,
    on_boundary: bool,
    samples: usize,
    seed: u64,
) -> Result<Estimate> {
    calc.volume(chi)?;
    let points: Vec<Vec<f64>> = calc
        .polytope()
        .vertices()
        .iter()
        .map(|v| v.iter().map(to_f64).collect())
        .collect();
    let cells: Vec<(f64, Vec<usize>)> = if on_boundary {
        calc.chart()
            .patches
            .iter()
            .flat_map(|p| p.simplices.iter())
            .map(|s| (to_f64(&s.volume), s.vertices.clone()))
            .collect()
    } else {
        calc.triangulation()
            .simplices
            .iter()
            .map(|s| (to_f64(&s.volume), s.vertices.clone()))
            .collect()
    };
    let coeffs = chi.to_f64();
    let f = |x: &[f64]| {
        let l = coeffs[0] + coeffs[1..].iter().zip(x).map(|(a, x)| a * x).sum::<f64>();
        l.powi(-exponent)
    };
    Ok(integrate(&points, &cells, f, samples, seed))
}

/// Stratified estimate of `Σ_cells measure · mean_cell(f)`. Each cell is a
/// simplex given by vertex indices into `points`; samples are allocated in
/// proportion to the measure, with at least two per cell.
pub fn integrate<F>(points: &[Vec<f64>], cells: &[(f64, Vec<usize>)], f: F, samples: usize, seed: u64) -> Estimate
where
    F: Fn(&[f64]) -> f64,
{
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let total: f64 = cells.iter().map(|c| c.0).sum();
    let mut value = 0.0;
    let mut variance = 0.0;
    let mut x = Vec::new();
    let mut cuts = Vec::new();
    for (measure, idx) in cells {
        if *measure == 0.0 {
            continue;
        }
        let count = ((samples as f64) * measure / total).round().max(2.0) as usize;
        let d = idx.len() - 1;
        let ambient = points[idx[0]].len();
        let (mut mean, mut m2) = (0.0, 0.0);
        for k in 0..count {
            sample_simplex(&mut rng, d, &mut cuts);
            x.clear();
            x.resize(ambient, 0.0);
            for (w, &i) in cuts.iter().zip(idx) {
                for (xc, pc) in x.iter_mut().zip(&points[i]) {
                    *xc += w * pc;
                }
            }
            let y = f(&x);
            let delta = y - mean;
            mean += delta / (k + 1) as f64;
            m2 += delta * (y - mean);
        }
        value += measure * mean;
        variance += measure * measure * m2 / ((count - 1) as f64) / count as f64;
    }
    Estimate {
        value,
        std_error: variance.sqrt(),
    }
}

/// Uniform barycentric coordinates on the standard `d`-simplex: gaps between
/// sorted uniforms.
fn sample_simplex(rng: &mut ChaCha8Rng, d: usize, out: &mut Vec<f64>) {
    let mut u: Vec<f64> = (0..d).map(|_| rng.gen::<f64>()).collect();
    u.sort_by(f64::total_cmp);
    out.clear();
    let mut prev = 0.0;
    for ui in u {
        out.push(ui - prev);
        prev = ui;
    }
    out.push(1.0 - prev);
}
