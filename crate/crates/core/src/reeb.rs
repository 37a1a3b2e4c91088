//! Exact evaluation of the volume `V`, the total transversal scalar curvature
//! `S` and the Einstein–Hilbert functional `EH = S / V^{n/(n+1)}` on the Reeb
//! cone of a labelled polytope.
//!
//! A Reeb vector is an affine function `ℓ(x) = a0 + <a, x>` on the polytope.
//! Both integrals reduce to sums over simplices through the identity
//! `∫_Δ ℓ^{-(d+1)} = vol(Δ) / ∏ ℓ(v_i)` for a `d`-simplex `Δ`, applied to a
//! triangulation of `P` (for `V`) and to σ-measured triangulations of the
//! facets (for `S`).

use std::cmp::Ordering;

use num::{Signed, Zero};

use crate::error::{Error, Result};
use crate::polytope::{FacetChart, LabelledPolytope, Triangulation};
use crate::scalar::{format_rational, to_f64, Field, Rational};

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct ReebVector {
    pub a0: Rational,
    pub a: Vec<Rational>,
}

impl ReebVector {
    pub fn new(a0: Rational, a: Vec<Rational>) -> Self {
        ReebVector { a0, a }
    }

    /// The constant function 1.
    pub fn constant(dim: usize) -> Self {
        ReebVector {
            a0: Rational::from_integer(1.into()),
            a: vec![Rational::zero(); dim],
        }
    }

    /// Builds from homogeneous coordinates `(a0, a_1, ..., a_n)`.
    pub fn from_coords(coords: &[Rational]) -> Self {
        ReebVector {
            a0: coords[0].clone(),
            a: coords[1..].to_vec(),
        }
    }

    pub fn coords(&self) -> Vec<Rational> {
        std::iter::once(self.a0.clone()).chain(self.a.iter().cloned()).collect()
    }

    pub fn dim(&self) -> usize {
        self.a.len()
    }

    pub fn value_at(&self, x: &[Rational]) -> Rational {
        let mut acc = self.a0.clone();
        for (ai, xi) in self.a.iter().zip(x) {
            acc += ai * xi;
        }
        acc
    }

    pub fn scaled(&self, lambda: &Rational) -> Self {
        ReebVector {
            a0: &self.a0 * lambda,
            a: self.a.iter().map(|x| x * lambda).collect(),
        }
    }

    pub fn to_f64(&self) -> Vec<f64> {
        self.coords().iter().map(to_f64).collect()
    }
}

impl std::fmt::Display for ReebVector {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "({};", format_rational(&self.a0))?;
        for (i, x) in self.a.iter().enumerate() {
            let sep = if i == 0 { " " } else { ", " };
            write!(f, "{sep}{}", format_rational(x))?;
        }
        write!(f, ")")
    }
}

/// Simplex data of a polytope converted into a field `F`.
#[derive(Debug, Clone)]
pub struct Geometry<F> {
    pub dim: usize,
    /// Homogeneous vertex coordinates `(1, v)`.
    pub points: Vec<Vec<F>>,
    pub cells: Vec<(F, Vec<usize>)>,
    pub boundary: Vec<(F, Vec<usize>)>,
}

impl<F: Field> Geometry<F> {
    pub fn new(polytope: &LabelledPolytope, tri: &Triangulation, chart: &FacetChart) -> Self {
        let points = polytope
            .vertices()
            .iter()
            .map(|v| std::iter::once(F::one()).chain(v.iter().map(F::from_rational)).collect())
            .collect();
        let cells = tri
            .simplices
            .iter()
            .map(|s| (F::from_rational(&s.volume), s.vertices.clone()))
            .collect();
        let boundary = chart
            .patches
            .iter()
            .flat_map(|p| p.simplices.iter())
            .map(|s| (F::from_rational(&s.volume), s.vertices.clone()))
            .collect();
        Geometry {
            dim: polytope.dim(),
            points,
            cells,
            boundary,
        }
    }

    pub fn vertex_values(&self, coords: &[F]) -> Vec<F> {
        self.points
            .iter()
            .map(|p| {
                p.iter()
                    .zip(coords)
                    .fold(F::zero(), |acc, (x, c)| acc + x.clone() * c.clone())
            })
            .collect()
    }

    /// Volume and scal together with first and (optionally) second derivatives
    /// with respect to the homogeneous coordinates.
    pub fn jet(&self, coords: &[F], order: usize) -> Jet<F> {
        let values = self.vertex_values(coords);
        let (v, dv, hv) = accumulate(&self.cells, &values, &self.points, order);
        let (s, ds, hs) = accumulate(&self.boundary, &values, &self.points, order);
        Jet {
            dim: self.dim,
            v,
            s,
            dv,
            ds,
            hv,
            hs,
        }
    }
}

/// `V`, `S` and their derivatives at one Reeb vector.
#[derive(Debug, Clone)]
pub struct Jet<F> {
    pub dim: usize,
    pub v: F,
    pub s: F,
    pub dv: Vec<F>,
    pub ds: Vec<F>,
    pub hv: Vec<Vec<F>>,
    pub hs: Vec<Vec<F>>,
}

impl<F: Field> Jet<F> {
    fn exponent(&self) -> F {
        F::from_usize(self.dim) / F::from_usize(self.dim + 1)
    }

    /// `V^{n/(n+1)} ∇EH = ∇S − k (S/V) ∇V`, `k = n/(n+1)`.
    pub fn scaled_gradient(&self) -> Vec<F> {
        let k = self.exponent();
        let ratio = k * self.s.clone() / self.v.clone();
        self.ds
            .iter()
            .zip(&self.dv)
            .map(|(ds, dv)| ds.clone() - ratio.clone() * dv.clone())
            .collect()
    }

    /// `V^{n/(n+1)} ∇²EH`.
    #[allow(clippy::needless_range_loop)]
    pub fn scaled_hessian(&self) -> Vec<Vec<F>> {
        let k = self.exponent();
        let v = self.v.clone();
        let s = self.s.clone();
        let m = self.ds.len();
        let mut h = vec![vec![F::zero(); m]; m];
        let mixed = (k.clone() + k.clone() * k.clone()) * s.clone() / (v.clone() * v.clone());
        for i in 0..m {
            for j in 0..m {
                h[i][j] = self.hs[i][j].clone() - k.clone() * s.clone() * self.hv[i][j].clone() / v.clone()
                    - k.clone() * (self.dv[i].clone() * self.ds[j].clone() + self.ds[i].clone() * self.dv[j].clone())
                        / v.clone()
                    + mixed.clone() * self.dv[i].clone() * self.dv[j].clone();
            }
        }
        h
    }
}

fn accumulate<F: Field>(
    cells: &[(F, Vec<usize>)],
    values: &[F],
    points: &[Vec<F>],
    order: usize,
) -> (F, Vec<F>, Vec<Vec<F>>) {
    let m = points.first().map_or(0, |p| p.len());
    let mut total = F::zero();
    let mut grad = vec![F::zero(); if order >= 1 { m } else { 0 }];
    let mut hess = vec![vec![F::zero(); m]; if order >= 2 { m } else { 0 }];
    for (vol, idx) in cells {
        let mut term = vol.clone();
        for &i in idx {
            term = term / values[i].clone();
        }
        total = total + term.clone();
        if order == 0 {
            continue;
        }
        let weights: Vec<Vec<F>> = idx
            .iter()
            .map(|&i| points[i].iter().map(|p| p.clone() / values[i].clone()).collect())
            .collect();
        let sum: Vec<F> = (0..m)
            .map(|c| weights.iter().fold(F::zero(), |acc, w| acc + w[c].clone()))
            .collect();
        for c in 0..m {
            grad[c] = grad[c].clone() - term.clone() * sum[c].clone();
        }
        if order >= 2 {
            for r in 0..m {
                for c in 0..m {
                    let own = weights
                        .iter()
                        .fold(F::zero(), |acc, w| acc + w[r].clone() * w[c].clone());
                    hess[r][c] = hess[r][c].clone() + term.clone() * (sum[r].clone() * sum[c].clone() + own);
                }
            }
        }
    }
    (total, grad, hess)
}

/// Exact `V`, `S` and the exact comparable `S^{n+1} / V^n`.
#[derive(Debug, Clone, PartialEq)]
pub struct EhReport {
    pub v: Rational,
    pub s: Rational,
    /// `S^{n+1} / V^n`.
    pub eh_power: Rational,
    /// Sign of `S` (and of `EH`); disambiguates `eh_power` when `n+1` is even.
    pub sign: i8,
    pub eh_float: f64,
}

/// Exact gradient and Hessian of `EH` up to the positive factor
/// `V^{-n/(n+1)}`, which is irrational in general.
#[derive(Debug, Clone, PartialEq)]
pub struct DerivativeReport {
    pub gradient: Vec<Rational>,
    pub hessian: Vec<Vec<Rational>>,
    pub grad_volume: Vec<Rational>,
    pub grad_scal: Vec<Rational>,
    /// `V^{-n/(n+1)}`.
    pub scale: f64,
}

impl DerivativeReport {
    pub fn eh_gradient(&self) -> Vec<f64> {
        self.gradient.iter().map(|g| to_f64(g) * self.scale).collect()
    }

    pub fn eh_hessian(&self) -> Vec<Vec<f64>> {
        self.hessian
            .iter()
            .map(|row| row.iter().map(|h| to_f64(h) * self.scale).collect())
            .collect()
    }
}

/// Directional derivative of `EH` at `χ` along `ζ`.
#[derive(Debug, Clone, PartialEq)]
pub struct FutakiPairing {
    /// `V^{n/(n+1)} D_ζ EH(χ)`, exact; same sign as the derivative.
    pub scaled: Rational,
    pub value: f64,
}

/// Polytope with its triangulation, facet chart and cached simplex data.
#[derive(Debug, Clone)]
pub struct ReebCalculus {
    polytope: LabelledPolytope,
    triangulation: Triangulation,
    chart: FacetChart,
    exact: Geometry<Rational>,
    float: Geometry<f64>,
}

impl ReebCalculus {
    pub fn new(polytope: LabelledPolytope) -> Self {
        let triangulation = polytope.triangulate();
        let chart = polytope.facet_chart();
        Self::with_parts(polytope, triangulation, chart)
    }

    pub fn with_parts(polytope: LabelledPolytope, triangulation: Triangulation, chart: FacetChart) -> Self {
        let exact = Geometry::new(&polytope, &triangulation, &chart);
        let float = Geometry::new(&polytope, &triangulation, &chart);
        ReebCalculus {
            polytope,
            triangulation,
            chart,
            exact,
            float,
        }
    }

    pub fn polytope(&self) -> &LabelledPolytope {
        &self.polytope
    }

    pub fn triangulation(&self) -> &Triangulation {
        &self.triangulation
    }

    pub fn chart(&self) -> &FacetChart {
        &self.chart
    }

    pub fn float_geometry(&self) -> &Geometry<f64> {
        &self.float
    }

    pub fn dim(&self) -> usize {
        self.polytope.dim()
    }

    fn check_dim(&self, chi: &ReebVector) -> Result<()> {
        if chi.dim() != self.dim() {
            return Err(Error::InvalidInput(format!(
                "Reeb vector has dimension {}, polytope has {}",
                chi.dim(),
                self.dim()
            )));
        }
        Ok(())
    }

    /// Smallest value of `ℓ_χ` over the vertices.
    pub fn min_vertex_value(&self, chi: &ReebVector) -> Rational {
        self.polytope
            .vertices()
            .iter()
            .map(|v| chi.value_at(v))
            .min()
            .expect("polytope has vertices")
    }

    pub fn in_cone(&self, chi: &ReebVector) -> bool {
        chi.dim() == self.dim() && self.min_vertex_value(chi).is_positive()
    }

    fn require_cone(&self, chi: &ReebVector) -> Result<()> {
        self.check_dim(chi)?;
        if !self.in_cone(chi) {
            return Err(Error::NotInCone(format!(
                "{chi} has minimum vertex value {}",
                format_rational(&self.min_vertex_value(chi))
            )));
        }
        Ok(())
    }

    pub fn volume(&self, chi: &ReebVector) -> Result<Rational> {
        self.require_cone(chi)?;
        Ok(self.exact.jet(&chi.coords(), 0).v)
    }

    pub fn scal(&self, chi: &ReebVector) -> Result<Rational> {
        self.require_cone(chi)?;
        Ok(self.exact.jet(&chi.coords(), 0).s)
    }

    pub fn eh(&self, chi: &ReebVector) -> Result<EhReport> {
        self.require_cone(chi)?;
        let jet = self.exact.jet(&chi.coords(), 0);
        Ok(eh_report(self.dim(), jet.v, jet.s))
    }

    /// Exact ordering of `EH(χ1)` against `EH(χ2)`.
    pub fn eh_compare(&self, chi1: &ReebVector, chi2: &ReebVector) -> Result<Ordering> {
        let r1 = self.eh(chi1)?;
        let r2 = self.eh(chi2)?;
        Ok(compare_eh(self.dim(), &r1, &r2))
    }

    pub fn derivatives(&self, chi: &ReebVector) -> Result<DerivativeReport> {
        self.require_cone(chi)?;
        let jet = self.exact.jet(&chi.coords(), 2);
        let n = self.dim() as f64;
        let scale = to_f64(&jet.v).powf(-n / (n + 1.0));
        Ok(DerivativeReport {
            gradient: jet.scaled_gradient(),
            hessian: jet.scaled_hessian(),
            grad_volume: jet.dv.clone(),
            grad_scal: jet.ds.clone(),
            scale,
        })
    }

    /// Exact `V`, `S` and derivatives up to `order` (at most 2).
    pub fn jet(&self, chi: &ReebVector, order: usize) -> Result<Jet<Rational>> {
        self.require_cone(chi)?;
        Ok(self.exact.jet(&chi.coords(), order))
    }

    /// Floating-point jet at homogeneous coordinates; no cone check.
    pub fn float_jet(&self, coords: &[f64], order: usize) -> Jet<f64> {
        self.float.jet(coords, order)
    }

    /// Transversal Futaki pairing `D_ζ EH(χ)`; `ζ` is any affine function.
    pub fn futaki(&self, chi: &ReebVector, zeta: &ReebVector) -> Result<FutakiPairing> {
        self.check_dim(zeta)?;
        self.require_cone(chi)?;
        let jet = self.exact.jet(&chi.coords(), 1);
        let g = jet.scaled_gradient();
        let scaled: Rational = g.iter().zip(zeta.coords()).map(|(g, z)| g * z).sum();
        let n = self.dim() as f64;
        let value = to_f64(&scaled) * to_f64(&jet.v).powf(-n / (n + 1.0));
        Ok(FutakiPairing { scaled, value })
    }
}

pub fn eh_report(dim: usize, v: Rational, s: Rational) -> EhReport {
    let n = dim as i32;
    let eh_power = num::pow::pow(s.clone(), dim + 1) / num::pow::pow(v.clone(), dim);
    let sign = if s.is_zero() {
        0
    } else if s.is_positive() {
        1
    } else {
        -1
    };
    let eh_float = to_f64(&s) * to_f64(&v).powf(-f64::from(n) / f64::from(n + 1));
    EhReport {
        v,
        s,
        eh_power,
        sign,
        eh_float,
    }
}

/// Orders two EH values by sign, then by exact cross-multiplication of
/// `|S|^{n+1}` against `V^n`.
pub fn compare_eh(dim: usize, r1: &EhReport, r2: &EhReport) -> Ordering {
    if r1.sign != r2.sign {
        return r1.sign.cmp(&r2.sign);
    }
    if r1.sign == 0 {
        return Ordering::Equal;
    }
    let lhs = num::pow::pow(r1.s.abs(), dim + 1) * num::pow::pow(r2.v.clone(), dim);
    let rhs = num::pow::pow(r2.s.abs(), dim + 1) * num::pow::pow(r1.v.clone(), dim);
    let by_magnitude = lhs.cmp(&rhs);
    if r1.sign > 0 {
        by_magnitude
    } else {
        by_magnitude.reverse()
    }
}

/// `∫_P ℓ_χ^{-(n+1)}` over a given triangulation.
pub fn volume(polytope: &LabelledPolytope, tri: &Triangulation, chi: &ReebVector) -> Result<Rational> {
    let calc = ReebCalculus::with_parts(polytope.clone(), tri.clone(), FacetChart { patches: vec![] });
    calc.volume(chi)
}

/// `∫_{∂P} ℓ_χ^{-n} dσ` over a given facet chart.
pub fn scal(polytope: &LabelledPolytope, chart: &FacetChart, chi: &ReebVector) -> Result<Rational> {
    let calc = ReebCalculus::with_parts(polytope.clone(), Triangulation { simplices: vec![] }, chart.clone());
    calc.scal(chi)
}
