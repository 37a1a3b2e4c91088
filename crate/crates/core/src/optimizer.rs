//! Critical points and the minimum of EH on the Reeb cone.
//!
//! EH is invariant under scaling, so the search runs on the slice
//! `{χ : ℓ_χ(β) = 1}` through the barycenter `β`, parametrized by the linear
//! part `a` with `a0 = 1 − <a, β>`. Float jets drive the iterations; every
//! converged point is snapped to a nearby rational and re-checked exactly.

use std::cmp::Ordering;

use nalgebra::{DMatrix, DVector, SymmetricEigen};
use num::{Signed, Zero};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::polytope::LabelledPolytope;
use crate::reeb::{EhReport, ReebCalculus, ReebVector};
use crate::scalar::{approximate, int, to_f64, Rational};

/// Steps whose minimum vertex value on the slice drops below this are rejected.
pub const CONE_MARGIN: f64 = 1e-12;
/// Exact slice-gradient bound required of every reported critical point.
pub const EXACT_GRAD_TOL: f64 = 1e-9;
/// Eigenvalues below this fraction of the spectral radius count as zero.
pub const DEGENERACY_RATIO: f64 = 1e-8;
/// Relative tolerance of the rational snapshot of a float critical point.
pub const SNAPSHOT_TOL: f64 = 1e-13;
/// Normalized minimum vertex value below which ray-scan rows are flagged.
pub const NEAR_BOUNDARY: f64 = 1e-3;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SearchOptions {
    pub seed: u64,
    pub starts: usize,
    pub max_iters: usize,
    pub grad_tol: f64,
    pub dedupe_radius: f64,
}

impl Default for SearchOptions {
    fn default() -> Self {
        SearchOptions {
            seed: 0,
            starts: 64,
            max_iters: 200,
            grad_tol: 1e-11,
            dedupe_radius: 1e-6,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Classification {
    Minimum,
    Maximum,
    Saddle,
    Degenerate,
}

pub fn classify(spectrum: &[f64]) -> Classification {
    let radius = spectrum.iter().fold(0.0f64, |m, x| m.max(x.abs()));
    let threshold = DEGENERACY_RATIO * radius;
    if radius == 0.0 || spectrum.iter().any(|x| x.abs() < threshold) {
        Classification::Degenerate
    } else if spectrum.iter().all(|&x| x > 0.0) {
        Classification::Minimum
    } else if spectrum.iter().all(|&x| x < 0.0) {
        Classification::Maximum
    } else {
        Classification::Saddle
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct CriticalPoint {
    /// Rational snapshot on the slice.
    pub chi: ReebVector,
    /// Homogeneous float coordinates of the converged iterate.
    pub coords: Vec<f64>,
    pub eh_value: f64,
    /// Exact `S^{n+1}/V^n` at the snapshot.
    pub eh_power: Rational,
    pub grad_norm: f64,
    /// Slice gradient norm re-evaluated exactly at the snapshot.
    pub exact_grad_norm: f64,
    pub slice_hessian_spectrum: Vec<f64>,
    pub classification: Classification,
    pub iterations: usize,
    pub start: usize,
}

impl CriticalPoint {
    pub fn verified(&self) -> bool {
        self.exact_grad_norm <= EXACT_GRAD_TOL
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Unconverged {
    pub start: usize,
    pub coords: Vec<f64>,
    pub eh_value: f64,
    pub grad_norm: f64,
    pub iterations: usize,
}

#[derive(Debug, Clone, PartialEq)]
pub struct CriticalSet {
    pub points: Vec<CriticalPoint>,
    pub unconverged: Vec<Unconverged>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct MinimumSearch {
    pub best: CriticalPoint,
    pub converged: bool,
    pub runs: usize,
}

/// Slice chart through the barycenter.
#[derive(Debug, Clone)]
pub struct SliceChart {
    pub beta: Vec<Rational>,
    beta_f: Vec<f64>,
    /// Distance from `β` to the nearest facet.
    pub inradius: f64,
}

impl SliceChart {
    pub fn new(polytope: &LabelledPolytope) -> Self {
        let beta = polytope.barycenter();
        let beta_f: Vec<f64> = beta.iter().map(to_f64).collect();
        let inradius = polytope
            .facets()
            .iter()
            .map(|f| to_f64(&f.evaluate(&beta)) / to_f64(&Rational::from_integer(f.norm_squared())).sqrt())
            .fold(f64::INFINITY, f64::min);
        SliceChart { beta, beta_f, inradius }
    }

    pub fn coords(&self, a: &[f64]) -> Vec<f64> {
        let a0 = 1.0 - a.iter().zip(&self.beta_f).map(|(x, b)| x * b).sum::<f64>();
        std::iter::once(a0).chain(a.iter().copied()).collect()
    }

    pub fn exact_point(&self, a: &[Rational]) -> ReebVector {
        let dot: Rational = a.iter().zip(&self.beta).map(|(x, b)| x * b).sum();
        ReebVector::new(int(1) - dot, a.to_vec())
    }

    /// Slice directions `(−β_j; e_j)` as affine functions.
    pub fn directions(&self) -> Vec<ReebVector> {
        let n = self.beta.len();
        (0..n)
            .map(|j| {
                let a = (0..n).map(|i| if i == j { int(1) } else { int(0) }).collect();
                ReebVector::new(-self.beta[j].clone(), a)
            })
            .collect()
    }

    fn pull_gradient(&self, g: &[f64]) -> Vec<f64> {
        self.beta_f.iter().enumerate().map(|(j, b)| g[j + 1] - b * g[0]).collect()
    }

    fn pull_hessian(&self, h: &[Vec<f64>]) -> DMatrix<f64> {
        let n = self.beta_f.len();
        let jac = DMatrix::from_fn(n + 1, n, |r, c| {
            if r == 0 {
                -self.beta_f[c]
            } else if r == c + 1 {
                1.0
            } else {
                0.0
            }
        });
        let full = DMatrix::from_fn(n + 1, n + 1, |r, c| h[r][c]);
        let mut out = jac.transpose() * full * jac;
        // symmetrize rounding
        let t = out.transpose();
        out = (out + t) * 0.5;
        out
    }
}

/// Rescales `χ` so that `ℓ_χ(β) = 1`.
pub fn normalize_to_slice(calc: &ReebCalculus, chi: &ReebVector) -> Result<ReebVector> {
    if !calc.in_cone(chi) {
        calc.volume(chi)?;
    }
    let beta = calc.polytope().barycenter();
    let value = chi.value_at(&beta);
    Ok(chi.scaled(&value.recip()))
}

struct Local {
    eh: f64,
    grad: Vec<f64>,
    hess: Option<DMatrix<f64>>,
}

struct SliceModel<'a> {
    calc: &'a ReebCalculus,
    chart: &'a SliceChart,
    exponent: f64,
}

impl<'a> SliceModel<'a> {
    fn new(calc: &'a ReebCalculus, chart: &'a SliceChart) -> Self {
        let n = calc.dim() as f64;
        SliceModel {
            calc,
            chart,
            exponent: n / (n + 1.0),
        }
    }

    fn feasible(&self, a: &[f64]) -> bool {
        let coords = self.chart.coords(a);
        let min = self
            .calc
            .float_geometry()
            .vertex_values(&coords)
            .into_iter()
            .fold(f64::INFINITY, f64::min);
        min >= CONE_MARGIN
    }

    fn eval(&self, a: &[f64], order: usize) -> Option<Local> {
        if !self.feasible(a) {
            return None;
        }
        let jet = self.calc.float_jet(&self.chart.coords(a), order);
        let scale = jet.v.powf(-self.exponent);
        let eh = jet.s * scale;
        if !eh.is_finite() {
            return None;
        }
        let grad = if order >= 1 {
            let g: Vec<f64> = jet.scaled_gradient().iter().map(|x| x * scale).collect();
            self.chart.pull_gradient(&g)
        } else {
            vec![]
        };
        let hess = (order >= 2).then(|| {
            let h: Vec<Vec<f64>> = jet
                .scaled_hessian()
                .iter()
                .map(|row| row.iter().map(|x| x * scale).collect())
                .collect();
            self.chart.pull_hessian(&h)
        });
        Some(Local { eh, grad, hess })
    }
}

fn norm(v: &[f64]) -> f64 {
    v.iter().map(|x| x * x).sum::<f64>().sqrt()
}

fn spectrum(h: &DMatrix<f64>) -> Vec<f64> {
    let mut ev: Vec<f64> = SymmetricEigen::new(h.clone()).eigenvalues.iter().copied().collect();
    ev.sort_by(f64::total_cmp);
    ev
}

/// Approximate solution of `min g·p + ½ pᵀHp` subject to `|p| ≤ radius`,
/// falling back to the Cauchy point when that does at least as well.
fn trust_region_step(g: &[f64], h: &DMatrix<f64>, radius: f64) -> Vec<f64> {
    let n = g.len();
    let eig = SymmetricEigen::new(h.clone());
    let lambdas: Vec<f64> = eig.eigenvalues.iter().copied().collect();
    let vecs = &eig.eigenvectors;
    let gv = DVector::from_column_slice(g);
    let gamma: Vec<f64> = (0..n).map(|i| vecs.column(i).dot(&gv)).collect();
    let lmin_idx = (0..n).min_by(|&i, &j| lambdas[i].total_cmp(&lambdas[j])).unwrap_or(0);
    let lmin = lambdas[lmin_idx];
    let scale = lambdas.iter().fold(0.0f64, |m, x| m.max(x.abs())).max(1e-300);
    let step_at = |shift: f64| -> Vec<f64> {
        let mut p = vec![0.0; n];
        for i in 0..n {
            let denom = lambdas[i] + shift;
            if denom.abs() <= 1e-14 * scale {
                continue;
            }
            let coef = -gamma[i] / denom;
            for r in 0..n {
                p[r] += coef * vecs[(r, i)];
            }
        }
        p
    };
    let model = |p: &[f64]| -> f64 {
        let pv = DVector::from_column_slice(p);
        gv.dot(&pv) + 0.5 * pv.dot(&(h * &pv))
    };

    let candidate = if lmin > 0.0 && norm(&step_at(0.0)) <= radius {
        step_at(0.0)
    } else {
        let lo = (-lmin).max(0.0);
        let p_lo = step_at(lo);
        if norm(&p_lo) <= radius {
            // hard case: fill the remaining length along the lowest eigenvector
            let v: Vec<f64> = (0..n).map(|r| vecs[(r, lmin_idx)]).collect();
            let rest = (radius * radius - norm(&p_lo).powi(2)).max(0.0).sqrt();
            let along: f64 = g.iter().zip(&v).map(|(a, b)| a * b).sum();
            let pivot = v.iter().copied().fold(0.0f64, |m, x| if x.abs() > m.abs() { x } else { m });
            let sign = if along > 0.0 || (along == 0.0 && pivot < 0.0) { -1.0 } else { 1.0 };
            p_lo.iter().zip(&v).map(|(p, v)| p + sign * rest * v).collect()
        } else {
            let mut a = lo;
            let mut b = lo + norm(g) / radius + scale;
            for _ in 0..200 {
                let mid = 0.5 * (a + b);
                if norm(&step_at(mid)) > radius {
                    a = mid;
                } else {
                    b = mid;
                }
            }
            step_at(b)
        }
    };

    let gnorm = norm(g);
    if gnorm == 0.0 {
        return candidate;
    }
    let curvature = {
        let gvv = DVector::from_column_slice(g);
        gvv.dot(&(h * &gvv))
    };
    let tau = if curvature <= 0.0 {
        1.0
    } else {
        (gnorm.powi(3) / (radius * curvature)).min(1.0)
    };
    let cauchy: Vec<f64> = g.iter().map(|x| -tau * radius * x / gnorm).collect();
    if model(&cauchy) < model(&candidate) {
        cauchy
    } else {
        candidate
    }
}

struct RunResult {
    a: Vec<f64>,
    eh: f64,
    grad_norm: f64,
    spectrum: Vec<f64>,
    iterations: usize,
    converged: bool,
}

fn minimize_from(model: &SliceModel, start: Vec<f64>, opts: &SearchOptions) -> RunResult {
    let max_radius = 1.0 / model.chart.inradius;
    let mut radius = 0.25 * max_radius;
    let mut a = start;
    let mut local = model.eval(&a, 2).expect("start inside cone");
    let mut iterations = 0;
    let mut converged = false;
    while iterations < opts.max_iters {
        let hess = local.hess.as_ref().expect("second order");
        let gnorm = norm(&local.grad);
        let spec = spectrum(hess);
        let radius_s = spec.iter().fold(0.0f64, |m, x| m.max(x.abs()));
        if gnorm <= opts.grad_tol && spec[0] >= -DEGENERACY_RATIO * radius_s {
            converged = true;
            break;
        }
        iterations += 1;
        let p = trust_region_step(&local.grad, hess, radius);
        let pv = DVector::from_column_slice(&p);
        let gv = DVector::from_column_slice(&local.grad);
        let predicted = -(gv.dot(&pv) + 0.5 * pv.dot(&(hess * &pv)));
        let trial: Vec<f64> = a.iter().zip(&p).map(|(x, d)| x + d).collect();
        let next = model.eval(&trial, 2);
        let pnorm = norm(&p);
        let accept = match &next {
            None => {
                radius = 0.25 * pnorm.min(radius);
                false
            }
            Some(n) if predicted <= 1e-13 * local.eh.abs().max(1.0) => {
                // model decrease is below rounding; judge by the gradient
                let better = norm(&n.grad) < gnorm;
                if !better {
                    radius = 0.25 * pnorm.min(radius);
                }
                better
            }
            Some(n) => {
                let rho = (local.eh - n.eh) / predicted;
                if rho < 0.25 {
                    radius = 0.25 * pnorm.min(radius);
                } else if rho > 0.75 && pnorm >= 0.99 * radius {
                    radius = (2.0 * radius).min(max_radius);
                }
                rho > 1e-4
            }
        };
        if accept {
            a = trial;
            local = next.expect("accepted step is feasible");
        }
        if radius < 1e-15 * max_radius {
            break;
        }
    }
    let spec = spectrum(local.hess.as_ref().expect("second order"));
    RunResult {
        grad_norm: norm(&local.grad),
        eh: local.eh,
        a,
        spectrum: spec,
        iterations,
        converged,
    }
}

fn newton_from(model: &SliceModel, start: Vec<f64>, opts: &SearchOptions) -> RunResult {
    let max_step = 0.5 / model.chart.inradius;
    let mut a = start;
    let mut local = model.eval(&a, 2).expect("start inside cone");
    let mut iterations = 0;
    let mut converged = false;
    let mut damping: Option<f64> = None;
    while iterations < opts.max_iters {
        let gnorm = norm(&local.grad);
        if gnorm <= opts.grad_tol {
            converged = true;
            break;
        }
        iterations += 1;
        let hess = local.hess.as_ref().expect("second order");
        let normal = hess.transpose() * hess;
        let mu = *damping.get_or_insert(1e-6 * normal.norm());
        let n = local.grad.len();
        let lhs = normal + DMatrix::identity(n, n) * mu;
        let rhs = -(hess.transpose() * DVector::from_column_slice(&local.grad));
        let Some(step) = lhs.cholesky().map(|c| c.solve(&rhs)) else {
            damping = Some(mu * 10.0);
            continue;
        };
        let mut p: Vec<f64> = step.iter().copied().collect();
        let pnorm = norm(&p);
        if pnorm > max_step {
            p.iter_mut().for_each(|x| *x *= max_step / pnorm);
        }
        let trial: Vec<f64> = a.iter().zip(&p).map(|(x, d)| x + d).collect();
        match model.eval(&trial, 2) {
            Some(next) if norm(&next.grad) < gnorm => {
                a = trial;
                local = next;
                damping = Some((mu * 0.1).max(1e-300));
            }
            _ => {
                damping = Some(mu * 10.0);
                if mu > 1e30 {
                    break;
                }
            }
        }
    }
    let spec = spectrum(local.hess.as_ref().expect("second order"));
    RunResult {
        grad_norm: norm(&local.grad),
        eh: local.eh,
        a,
        spectrum: spec,
        iterations,
        converged,
    }
}

/// Base-`b` radical inverse of `i`.
fn radical_inverse(mut i: u64, b: u64) -> f64 {
    let mut f = 1.0;
    let mut r = 0.0;
    while i > 0 {
        f /= b as f64;
        r += f * (i % b) as f64;
        i /= b;
    }
    r
}

const PRIMES: [u64; 16] = [2, 3, 5, 7, 11, 13, 17, 19, 23, 29, 31, 37, 41, 43, 47, 53];

/// Shifted Halton points in the box `|a_i| ≤ 1/r` that lie in the cone with
/// normalized margin 1e-2; the first start is always `a = 0` (the point `β`
/// itself has value 1), followed by `probes`.
fn starts(model: &SliceModel, opts: &SearchOptions, probes: &[Vec<f64>]) -> Vec<Vec<f64>> {
    let n = model.calc.dim();
    let mut rng = ChaCha8Rng::seed_from_u64(opts.seed);
    let shift: Vec<f64> = (0..n).map(|_| rng.gen::<f64>()).collect();
    let half = 1.0 / model.chart.inradius;
    let mut out = vec![vec![0.0; n]];
    out.extend(probes.iter().filter(|p| model.feasible(p)).cloned());
    let target = opts.starts.max(out.len());
    let mut i = 1u64;
    while out.len() < target && i <= 64 * opts.starts as u64 + 64 {
        let a: Vec<f64> = (0..n)
            .map(|d| {
                let u = (radical_inverse(i, PRIMES[d % PRIMES.len()]) + shift[d]).fract();
                (2.0 * u - 1.0) * half
            })
            .collect();
        i += 1;
        let coords = model.chart.coords(&a);
        let min = model
            .calc
            .float_geometry()
            .vertex_values(&coords)
            .into_iter()
            .fold(f64::INFINITY, f64::min);
        if min >= 1e-2 {
            out.push(a);
        }
    }
    out
}

fn probe_coords(calc: &ReebCalculus, chart: &SliceChart, probes: &[ReebVector]) -> Result<Vec<Vec<f64>>> {
    probes
        .iter()
        .map(|p| {
            let q = normalize_to_slice(calc, p)?;
            let _ = chart;
            Ok(q.a.iter().map(to_f64).collect())
        })
        .collect()
}

/// A few undamped Newton steps on a converged iterate, kept while the
/// gradient keeps shrinking.
fn polish(model: &SliceModel, run: &mut RunResult) {
    let Some(mut local) = model.eval(&run.a, 2) else {
        return;
    };
    for _ in 0..4 {
        let hess = local.hess.as_ref().expect("second order");
        let Some(step) = hess.clone().lu().solve(&DVector::from_column_slice(&local.grad)) else {
            return;
        };
        let trial: Vec<f64> = run.a.iter().zip(step.iter()).map(|(x, d)| x - d).collect();
        match model.eval(&trial, 2) {
            Some(next) if norm(&next.grad) < norm(&local.grad) => {
                run.a = trial;
                run.eh = next.eh;
                run.grad_norm = norm(&next.grad);
                local = next;
            }
            _ => return,
        }
    }
    run.spectrum = spectrum(local.hess.as_ref().expect("second order"));
}

fn snapshot(calc: &ReebCalculus, chart: &SliceChart, run: &RunResult, start: usize) -> Result<CriticalPoint> {
    let a: Vec<Rational> = run
        .a
        .iter()
        .map(|x| approximate(*x, SNAPSHOT_TOL))
        .collect::<Result<_>>()?;
    let chi = chart.exact_point(&a);
    let jet = calc.jet(&chi, 1)?;
    let g = jet.scaled_gradient();
    let n = calc.dim() as f64;
    let scale = to_f64(&jet.v).powf(-n / (n + 1.0));
    let slice: Vec<f64> = chart
        .beta
        .iter()
        .enumerate()
        .map(|(j, b)| to_f64(&(&g[j + 1] - b * &g[0])) * scale)
        .collect();
    let report = crate::reeb::eh_report(calc.dim(), jet.v, jet.s);
    Ok(CriticalPoint {
        chi,
        coords: chart.coords(&run.a),
        eh_value: run.eh,
        eh_power: report.eh_power,
        grad_norm: run.grad_norm,
        exact_grad_norm: norm(&slice),
        classification: classify(&run.spectrum),
        slice_hessian_spectrum: run.spectrum.clone(),
        iterations: run.iterations,
        start,
    })
}

fn run_all<F>(calc: &ReebCalculus, opts: &SearchOptions, probes: &[ReebVector], method: F) -> Result<(SliceChart, Vec<RunResult>)>
where
    F: Fn(&SliceModel, Vec<f64>, &SearchOptions) -> RunResult + Sync,
{
    validate_options(opts)?;
    let chart = SliceChart::new(calc.polytope());
    let probe_a = probe_coords(calc, &chart, probes)?;
    let model = SliceModel::new(calc, &chart);
    let starts = starts(&model, opts, &probe_a);
    let runs: Vec<RunResult> = starts
        .into_par_iter()
        .map(|s| {
            let mut run = method(&model, s, opts);
            if run.converged {
                polish(&model, &mut run);
            }
            run
        })
        .collect();
    Ok((chart, runs))
}

fn validate_options(opts: &SearchOptions) -> Result<()> {
    if opts.starts == 0 || opts.max_iters == 0 {
        return Err(Error::InvalidInput("starts and max_iters must be positive".into()));
    }
    if !(opts.grad_tol > 0.0 && opts.dedupe_radius > 0.0) {
        return Err(Error::InvalidInput("grad_tol and dedupe_radius must be positive".into()));
    }
    Ok(())
}

/// Multi-start trust-region Newton. Returns the lowest converged local
/// minimum; when no run converges the best iterate is returned with
/// `converged = false`.
pub fn search_minimum(calc: &ReebCalculus, opts: &SearchOptions, probes: &[ReebVector]) -> Result<MinimumSearch> {
    let (chart, runs) = run_all(calc, opts, probes, minimize_from)?;
    let count = runs.len();
    let pick = |converged: bool| {
        runs.iter()
            .enumerate()
            .filter(|(_, r)| r.converged == converged)
            .min_by(|(_, x), (_, y)| x.eh.total_cmp(&y.eh))
    };
    let (converged, (index, run)) = match pick(true) {
        Some(found) => (true, found),
        None => (false, pick(false).expect("at least one start")),
    };
    let best = snapshot(calc, &chart, run, index)?;
    Ok(MinimumSearch {
        converged: converged && best.verified(),
        best,
        runs: count,
    })
}

pub fn find_minimum(calc: &ReebCalculus, opts: &SearchOptions) -> Result<CriticalPoint> {
    let search = search_minimum(calc, opts, &[])?;
    if !search.converged {
        return Err(Error::NoConvergence {
            iterations: opts.max_iters,
            grad_norm: search.best.grad_norm,
        });
    }
    Ok(search.best)
}

/// Multi-start damped Newton on the slice gradient, deduplicated and
/// classified by the slice Hessian spectrum.
pub fn find_critical_points(calc: &ReebCalculus, opts: &SearchOptions, probes: &[ReebVector]) -> Result<CriticalSet> {
    let (chart, runs) = run_all(calc, opts, probes, newton_from)?;
    let mut points: Vec<CriticalPoint> = Vec::new();
    let mut unconverged = Vec::new();
    for (index, run) in runs.iter().enumerate() {
        if !run.converged {
            unconverged.push(Unconverged {
                start: index,
                coords: chart.coords(&run.a),
                eh_value: run.eh,
                grad_norm: run.grad_norm,
                iterations: run.iterations,
            });
            continue;
        }
        let point = snapshot(calc, &chart, run, index)?;
        let duplicate = points.iter_mut().find(|p| {
            let d: f64 = p.coords[1..]
                .iter()
                .zip(&point.coords[1..])
                .map(|(x, y)| (x - y).powi(2))
                .sum::<f64>()
                .sqrt();
            d <= opts.dedupe_radius
        });
        match duplicate {
            Some(existing) if existing.grad_norm > point.grad_norm => *existing = point,
            Some(_) => {}
            None => points.push(point),
        }
    }
    points.sort_by(|x, y| {
        x.eh_value
            .total_cmp(&y.eh_value)
            .then_with(|| compare_coords(&x.coords, &y.coords))
    });
    Ok(CriticalSet { points, unconverged })
}

fn compare_coords(x: &[f64], y: &[f64]) -> Ordering {
    x.iter()
        .zip(y)
        .map(|(a, b)| a.total_cmp(b))
        .find(|o| *o != Ordering::Equal)
        .unwrap_or(Ordering::Equal)
}

#[derive(Debug, Clone, PartialEq)]
pub struct ScanRow {
    pub t: Rational,
    pub chi: ReebVector,
    pub report: EhReport,
    /// Minimum vertex value of the slice-normalized `χ`.
    pub min_vertex_value: f64,
    pub near_boundary: bool,
}

/// EH at `steps + 1` equally spaced points of the segment `[χ_start, χ_end]`.
pub fn ray_scan(calc: &ReebCalculus, start: &ReebVector, end: &ReebVector, steps: usize) -> Result<Vec<ScanRow>> {
    if steps == 0 {
        return Err(Error::InvalidInput("steps must be positive".into()));
    }
    for (index, chi) in [(0, start), (steps, end)] {
        if chi.dim() != calc.dim() {
            return Err(Error::InvalidInput("Reeb vector dimension mismatch".into()));
        }
        if !calc.in_cone(chi) {
            return Err(Error::SegmentExitsCone(index));
        }
    }
    let beta = calc.polytope().barycenter();
    (0..=steps)
        .map(|i| {
            let t = Rational::new(i.into(), steps.into());
            let u = int(1) - &t;
            let coords: Vec<Rational> = start
                .coords()
                .iter()
                .zip(end.coords())
                .map(|(x, y)| &u * x + &t * y)
                .collect();
            let chi = ReebVector::from_coords(&coords);
            let report = calc.eh(&chi)?;
            let min = calc.min_vertex_value(&chi) / chi.value_at(&beta);
            let min_vertex_value = to_f64(&min);
            Ok(ScanRow {
                t,
                chi,
                report,
                min_vertex_value,
                near_boundary: min_vertex_value < NEAR_BOUNDARY,
            })
        })
        .collect()
}

/// Evaluation of one Reeb vector against `ξ₀` with its exact directional
/// derivatives along the slice directions.
#[derive(Debug, Clone, PartialEq)]
pub struct StationarityCheck {
    pub chi: ReebVector,
    pub report: EhReport,
    pub compare_to_xi0: Ordering,
    /// `V^{n/(n+1)} D_{e_j} EH` along the slice directions, exact.
    pub scaled_slice_gradient: Vec<Rational>,
    pub slice_gradient: Vec<f64>,
    pub stationary: bool,
}

pub fn stationarity_check(calc: &ReebCalculus, chi: &ReebVector) -> Result<StationarityCheck> {
    let report = calc.eh(chi)?;
    let xi0 = normalize_to_slice(calc, &ReebVector::constant(calc.dim()))?;
    let compare_to_xi0 = calc.eh_compare(chi, &xi0)?;
    let chart = SliceChart::new(calc.polytope());
    let mut scaled = Vec::new();
    let mut float = Vec::new();
    for dir in chart.directions() {
        let f = calc.futaki(chi, &dir)?;
        float.push(f.value);
        scaled.push(f.scaled);
    }
    let stationary = scaled.iter().all(Zero::is_zero);
    Ok(StationarityCheck {
        chi: chi.clone(),
        report,
        compare_to_xi0,
        scaled_slice_gradient: scaled,
        slice_gradient: float,
        stationary,
    })
}

/// The rectangle `[−p, p] × [−q, q]` with unit facet labels.
pub fn as_rectangle(polytope: &LabelledPolytope) -> Option<(Rational, Rational)> {
    if polytope.dim() != 2 || polytope.facets().len() != 4 {
        return None;
    }
    let mut half = [None, None];
    let mut seen = [[false; 2]; 2];
    for f in polytope.facets() {
        let n: Vec<i64> = f.normal.iter().map(num::ToPrimitive::to_i64).collect::<Option<_>>()?;
        let (axis, side) = match n.as_slice() {
            [1, 0] => (0, 0),
            [-1, 0] => (0, 1),
            [0, 1] => (1, 0),
            [0, -1] => (1, 1),
            _ => return None,
        };
        if seen[axis][side] || !f.offset.is_positive() {
            return None;
        }
        seen[axis][side] = true;
        match &half[axis] {
            None => half[axis] = Some(f.offset.clone()),
            Some(h) if *h == f.offset => {}
            Some(_) => return None,
        }
    }
    Some((half[0].clone()?, half[1].clone()?))
}

/// Candidate points `(1; ±b, 0)` with `p²b² = (5p−q)/(5(p−q))` on the
/// rectangle `[−p,p]×[−q,q]`, evaluated exactly when `b` is rational.
#[derive(Debug, Clone, PartialEq)]
pub struct RectangleAudit {
    pub p: Rational,
    pub q: Rational,
    pub b_squared: Rational,
    /// `None` when `b` is irrational; a snapshot is then used.
    pub b_exact: Option<Rational>,
    pub plus: StationarityCheck,
    pub minus: StationarityCheck,
}

pub fn rectangle_audit(calc: &ReebCalculus) -> Result<Option<RectangleAudit>> {
    let Some((p, q)) = as_rectangle(calc.polytope()) else {
        return Ok(None);
    };
    if p == q {
        return Ok(None);
    }
    let b_squared = (int(5) * &p - &q) / (int(5) * (&p - &q)) / (&p * &p);
    if !b_squared.is_positive() {
        return Ok(None);
    }
    let b_exact = rational_sqrt(&b_squared);
    let b = match &b_exact {
        Some(b) => b.clone(),
        None => approximate(to_f64(&b_squared).sqrt(), 1e-15)?,
    };
    let plus_chi = ReebVector::new(int(1), vec![b.clone(), int(0)]);
    let minus_chi = ReebVector::new(int(1), vec![-b, int(0)]);
    if !calc.in_cone(&plus_chi) {
        return Ok(None);
    }
    Ok(Some(RectangleAudit {
        plus: stationarity_check(calc, &plus_chi)?,
        minus: stationarity_check(calc, &minus_chi)?,
        p,
        q,
        b_squared,
        b_exact,
    }))
}

fn rational_sqrt(x: &Rational) -> Option<Rational> {
    let n = x.numer().sqrt();
    let d = x.denom().sqrt();
    (&n * &n == *x.numer() && &d * &d == *x.denom()).then(|| Rational::new(n, d))
}
