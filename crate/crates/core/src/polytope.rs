//! Labelled moment polytopes: H-representation with primitive integer facet
//! labels, exact vertex enumeration, pulling triangulations and the
//! lattice-normalized boundary measure.

use std::collections::BTreeSet;

use num::bigint::BigInt;
use num::{One, Signed, Zero};
use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::linalg;
use crate::scalar::{gcd, Rational};

/// One facet `{x : <normal, x> + offset >= 0}`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Facet {
    pub normal: Vec<BigInt>,
    pub offset: Rational,
    /// Factor removed from the input normal to make it primitive (1 when it
    /// already was).
    pub label_scale: BigInt,
}

impl Facet {
    pub fn evaluate(&self, x: &[Rational]) -> Rational {
        let mut acc = self.offset.clone();
        for (u, xi) in self.normal.iter().zip(x) {
            acc += Rational::from_integer(u.clone()) * xi;
        }
        acc
    }

    pub fn normal_rational(&self) -> Vec<Rational> {
        self.normal.iter().map(|u| Rational::from_integer(u.clone())).collect()
    }

    pub fn norm_squared(&self) -> BigInt {
        self.normal.iter().map(|u| u * u).sum()
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct LabelledPolytope {
    dim: usize,
    facets: Vec<Facet>,
    vertices: Vec<Vec<Rational>>,
    /// vertex index -> facets through it
    incidence: Vec<Vec<usize>>,
    /// facet index -> vertices on it
    facet_vertices: Vec<Vec<usize>>,
    warnings: Vec<String>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Simplex {
    pub vertices: Vec<usize>,
    /// Euclidean volume for full-dimensional cells, σ-volume for facet cells.
    pub volume: Rational,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Triangulation {
    pub simplices: Vec<Simplex>,
}

impl Triangulation {
    pub fn total_volume(&self) -> Rational {
        self.simplices.iter().map(|s| s.volume.clone()).sum()
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct FacetPatch {
    pub facet: usize,
    pub vertices: Vec<usize>,
    /// (n−1)-simplices with their σ-volumes.
    pub simplices: Vec<Simplex>,
}

impl FacetPatch {
    pub fn sigma_volume(&self) -> Rational {
        self.simplices.iter().map(|s| s.volume.clone()).sum()
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct FacetChart {
    pub patches: Vec<FacetPatch>,
}

impl LabelledPolytope {
    /// Builds a polytope from `(normal, offset)` pairs. Non-primitive normals
    /// are divided by their gcd and a warning is recorded.
    pub fn new(dim: usize, facets: Vec<(Vec<BigInt>, Rational)>) -> Result<Self> {
        Self::build(dim, facets, false)
    }

    /// Like [`LabelledPolytope::new`] but silently drops redundant inequalities.
    pub fn new_pruned(dim: usize, facets: Vec<(Vec<BigInt>, Rational)>) -> Result<Self> {
        Self::build(dim, facets, true)
    }

    fn build(dim: usize, raw: Vec<(Vec<BigInt>, Rational)>, prune: bool) -> Result<Self> {
        if dim == 0 {
            return Err(Error::InvalidInput("dimension must be positive".into()));
        }
        if raw.len() < dim + 1 {
            return Err(Error::InfeasiblePolytope(format!(
                "{} facets cannot bound a {dim}-dimensional polytope",
                raw.len()
            )));
        }
        let mut warnings = Vec::new();
        let mut facets: Vec<Facet> = Vec::with_capacity(raw.len());
        for (i, (normal, offset)) in raw.into_iter().enumerate() {
            if normal.len() != dim {
                return Err(Error::InvalidInput(format!(
                    "facet {i}: normal has length {}, expected {dim}",
                    normal.len()
                )));
            }
            let g = normal.iter().fold(BigInt::zero(), |g, u| gcd(&g, u));
            if g.is_zero() {
                if offset.is_negative() {
                    return Err(Error::InfeasiblePolytope(format!("facet {i}: {offset} >= 0 fails")));
                }
                if prune {
                    continue;
                }
                return Err(Error::InvalidInput(format!("facet {i}: zero normal")));
            }
            let (normal, offset) = if g.is_one() {
                (normal, offset)
            } else {
                warnings.push(format!("facet {i}: normal is not primitive, divided by {g}"));
                let scale = Rational::from_integer(g.clone());
                (normal.iter().map(|u| u / &g).collect(), offset / scale)
            };
            let facet = Facet {
                normal,
                offset,
                label_scale: g,
            };
            if facets.iter().any(|f| f.normal == facet.normal && f.offset == facet.offset) {
                if prune {
                    continue;
                }
                return Err(Error::InvalidInput(format!("facet {i} is a duplicate")));
            }
            facets.push(facet);
        }

        let vertices = enumerate_vertices(dim, &facets, &[]);
        if vertices.is_empty() {
            return Err(Error::InfeasiblePolytope("no vertices: empty or unbounded".into()));
        }
        let refs: Vec<&[Rational]> = vertices.iter().map(|v| v.as_slice()).collect();
        if linalg::affine_dimension(&refs) != Some(dim) {
            return Err(Error::InfeasiblePolytope("empty interior".into()));
        }
        if is_unbounded(dim, &facets, &vertices) {
            return Err(Error::InfeasiblePolytope("unbounded".into()));
        }

        let mut facet_vertices: Vec<Vec<usize>> = facets
            .iter()
            .map(|f| {
                (0..vertices.len())
                    .filter(|&v| f.evaluate(&vertices[v]).is_zero())
                    .collect()
            })
            .collect();
        let mut keep = vec![true; facets.len()];
        for (i, fv) in facet_vertices.iter().enumerate() {
            let pts: Vec<&[Rational]> = fv.iter().map(|&v| vertices[v].as_slice()).collect();
            let fdim = linalg::affine_dimension(&pts);
            if fdim != Some(dim - 1) {
                if prune {
                    keep[i] = false;
                } else {
                    return Err(Error::InvalidInput(format!("facet {i} is redundant")));
                }
            }
        }
        if keep.iter().any(|k| !k) {
            let mut it = keep.iter();
            facets.retain(|_| *it.next().unwrap());
            let mut it = keep.iter();
            facet_vertices.retain(|_| *it.next().unwrap());
        }
        let incidence = (0..vertices.len())
            .map(|v| (0..facets.len()).filter(|&f| facet_vertices[f].contains(&v)).collect())
            .collect();

        Ok(LabelledPolytope {
            dim,
            facets,
            vertices,
            incidence,
            facet_vertices,
            warnings,
        })
    }

    /// The rectangle `[-p,p] x [-q,q]` with its standard labels.
    pub fn rectangle(p: i64, q: i64) -> Result<Self> {
        let r = |x: i64| Rational::from_integer(x.into());
        Self::new(
            2,
            vec![
                (vec![1.into(), 0.into()], r(p)),
                (vec![(-1).into(), 0.into()], r(p)),
                (vec![0.into(), 1.into()], r(q)),
                (vec![0.into(), (-1).into()], r(q)),
            ],
        )
    }

    /// The standard Delzant simplex `{x_i >= 0, sum x_i <= 1}`.
    pub fn standard_simplex(dim: usize) -> Result<Self> {
        let mut facets: Vec<(Vec<BigInt>, Rational)> = (0..dim)
            .map(|i| {
                let normal = (0..dim).map(|j| BigInt::from((i == j) as i64)).collect();
                (normal, Rational::zero())
            })
            .collect();
        facets.push((vec![BigInt::from(-1); dim], Rational::one()));
        Self::new(dim, facets)
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn facets(&self) -> &[Facet] {
        &self.facets
    }

    /// Vertices in lexicographic order.
    pub fn vertices(&self) -> &[Vec<Rational>] {
        &self.vertices
    }

    pub fn incidence(&self) -> &[Vec<usize>] {
        &self.incidence
    }

    pub fn facet_vertices(&self) -> &[Vec<usize>] {
        &self.facet_vertices
    }

    pub fn warnings(&self) -> &[String] {
        &self.warnings
    }

    pub fn contains(&self, x: &[Rational]) -> bool {
        self.facets.iter().all(|f| !f.evaluate(x).is_negative())
    }

    /// Every vertex lies on exactly `dim` facets.
    pub fn is_simple(&self) -> bool {
        self.incidence.iter().all(|fs| fs.len() == self.dim)
    }

    /// Simple, and the labels at each vertex form a basis of the lattice.
    pub fn is_delzant(&self) -> bool {
        self.is_simple()
            && self.incidence.iter().all(|fs| {
                let m = fs.iter().map(|&f| self.facets[f].normal_rational()).collect();
                linalg::abs_determinant(m).is_one()
            })
    }

    /// Pulling triangulation from the lexicographically smallest vertex.
    pub fn triangulate(&self) -> Triangulation {
        let order: Vec<usize> = (0..self.vertices.len()).collect();
        self.triangulate_with_order(&order)
    }

    /// Pulling triangulation with a vertex priority order drawn from `seed`.
    pub fn triangulate_seeded(&self, seed: u64) -> Triangulation {
        let mut order: Vec<usize> = (0..self.vertices.len()).collect();
        order.shuffle(&mut ChaCha8Rng::seed_from_u64(seed));
        self.triangulate_with_order(&order)
    }

    fn triangulate_with_order(&self, order: &[usize]) -> Triangulation {
        let mut rank = vec![0; order.len()];
        for (r, &v) in order.iter().enumerate() {
            rank[v] = r;
        }
        let all: Vec<usize> = (0..self.vertices.len()).collect();
        let simplices = self
            .pull(&all, self.dim, &rank)
            .into_iter()
            .map(|vertices| {
                let volume = self.simplex_volume(&vertices);
                Simplex { vertices, volume }
            })
            .collect();
        Triangulation { simplices }
    }

    /// Pulling triangulation of the face spanned by `face` (of dimension
    /// `face_dim`), with apexes chosen by smallest `rank`.
    fn pull(&self, face: &[usize], face_dim: usize, rank: &[usize]) -> Vec<Vec<usize>> {
        if face_dim == 0 {
            return vec![vec![face[0]]];
        }
        let apex = *face.iter().min_by_key(|&&v| rank[v]).unwrap();
        let mut subfaces: BTreeSet<Vec<usize>> = BTreeSet::new();
        for fv in &self.facet_vertices {
            let sub: Vec<usize> = face.iter().copied().filter(|v| fv.contains(v)).collect();
            if sub.len() < face_dim || sub.len() == face.len() || sub.contains(&apex) {
                continue;
            }
            let pts: Vec<&[Rational]> = sub.iter().map(|&v| self.vertices[v].as_slice()).collect();
            if linalg::affine_dimension(&pts) == Some(face_dim - 1) {
                subfaces.insert(sub);
            }
        }
        let mut out = Vec::new();
        for sub in subfaces {
            for mut simplex in self.pull(&sub, face_dim - 1, rank) {
                simplex.insert(0, apex);
                out.push(simplex);
            }
        }
        out
    }

    fn edge_rows(&self, simplex: &[usize]) -> Vec<Vec<Rational>> {
        let base = &self.vertices[simplex[0]];
        simplex[1..]
            .iter()
            .map(|&v| self.vertices[v].iter().zip(base).map(|(a, b)| a - b).collect())
            .collect()
    }

    fn simplex_volume(&self, simplex: &[usize]) -> Rational {
        let det = linalg::abs_determinant(self.edge_rows(simplex));
        det / Rational::from_integer(factorial(self.dim))
    }

    /// σ-volume of an (n−1)-simplex lying in facet `facet`.
    fn facet_simplex_volume(&self, facet: usize, simplex: &[usize]) -> Rational {
        let f = &self.facets[facet];
        let mut rows = self.edge_rows(simplex);
        rows.push(f.normal_rational());
        sigma_volume_from_rows(rows, &f.norm_squared(), self.dim)
    }

    /// Per-facet triangulations with lattice-normalized σ-volumes
    /// (Euclidean facet measure divided by the norm of the primitive label).
    pub fn facet_chart(&self) -> FacetChart {
        let order: Vec<usize> = (0..self.vertices.len()).collect();
        self.facet_chart_with_order(&order)
    }

    pub fn facet_chart_seeded(&self, seed: u64) -> FacetChart {
        let mut order: Vec<usize> = (0..self.vertices.len()).collect();
        order.shuffle(&mut ChaCha8Rng::seed_from_u64(seed));
        self.facet_chart_with_order(&order)
    }

    fn facet_chart_with_order(&self, order: &[usize]) -> FacetChart {
        let mut rank = vec![0; order.len()];
        for (r, &v) in order.iter().enumerate() {
            rank[v] = r;
        }
        let patches = self
            .facet_vertices
            .iter()
            .enumerate()
            .map(|(i, fv)| {
                let simplices = self
                    .pull(fv, self.dim - 1, &rank)
                    .into_iter()
                    .map(|vertices| {
                        let volume = self.facet_simplex_volume(i, &vertices);
                        Simplex { vertices, volume }
                    })
                    .collect();
                FacetPatch {
                    facet: i,
                    vertices: fv.clone(),
                    simplices,
                }
            })
            .collect();
        FacetChart { patches }
    }

    pub fn volume(&self) -> Rational {
        self.triangulate().total_volume()
    }

    /// Exact centroid.
    pub fn barycenter(&self) -> Vec<Rational> {
        let tri = self.triangulate();
        let mut acc = vec![Rational::zero(); self.dim];
        let mut total = Rational::zero();
        let k = Rational::from_integer(BigInt::from(self.dim + 1));
        for s in &tri.simplices {
            for &v in &s.vertices {
                for (a, x) in acc.iter_mut().zip(&self.vertices[v]) {
                    *a += &s.volume * x / &k;
                }
            }
            total += &s.volume;
        }
        acc.into_iter().map(|a| a / &total).collect()
    }

    /// Image under `x -> A x` for unimodular integer `A` (labels map by the
    /// inverse transpose).
    pub fn apply_unimodular(&self, a: &[Vec<i64>]) -> Result<Self> {
        let n = self.dim;
        let m: Vec<Vec<Rational>> = a
            .iter()
            .map(|row| row.iter().map(|&x| Rational::from_integer(x.into())).collect())
            .collect();
        if m.len() != n || m.iter().any(|r| r.len() != n) {
            return Err(Error::InvalidInput("matrix shape does not match dimension".into()));
        }
        let inv = linalg::inverse(&m).ok_or_else(|| Error::InvalidInput("singular matrix".into()))?;
        let facets = self
            .facets
            .iter()
            .map(|f| {
                // u' = A^{-T} u
                let normal: Option<Vec<BigInt>> = (0..n)
                    .map(|i| {
                        let q: Rational = (0..n)
                            .map(|j| &inv[j][i] * Rational::from_integer(f.normal[j].clone()))
                            .sum();
                        q.is_integer().then(|| q.to_integer())
                    })
                    .collect();
                normal
                    .map(|u| (u, f.offset.clone()))
                    .ok_or_else(|| Error::InvalidInput("matrix is not unimodular".into()))
            })
            .collect::<Result<Vec<_>>>()?;
        Self::new(n, facets)
    }
}

/// σ-volume from the edge rows of an (n−1)-simplex plus the label row:
/// `|det| / ((n−1)! |u|^2)`.
pub fn sigma_volume_from_rows(rows: Vec<Vec<Rational>>, norm_sq: &BigInt, dim: usize) -> Rational {
    let det = linalg::abs_determinant(rows);
    det / Rational::from_integer(factorial(dim - 1) * norm_sq)
}

/// σ-volume of the (n−1)-simplex with the given vertices measured against an
/// arbitrary (not necessarily primitive) label `normal`.
pub fn sigma_volume(vertices: &[Vec<Rational>], normal: &[BigInt]) -> Rational {
    let dim = normal.len();
    let base = &vertices[0];
    let mut rows: Vec<Vec<Rational>> = vertices[1..]
        .iter()
        .map(|v| v.iter().zip(base).map(|(a, b)| a - b).collect())
        .collect();
    rows.push(normal.iter().map(|u| Rational::from_integer(u.clone())).collect());
    let norm_sq: BigInt = normal.iter().map(|u| u * u).sum();
    sigma_volume_from_rows(rows, &norm_sq, dim)
}

fn factorial(n: usize) -> BigInt {
    (1..=n).fold(BigInt::one(), |acc, k| acc * BigInt::from(k))
}

fn combinations(n: usize, k: usize) -> Vec<Vec<usize>> {
    fn rec(start: usize, n: usize, k: usize, cur: &mut Vec<usize>, out: &mut Vec<Vec<usize>>) {
        if cur.len() == k {
            out.push(cur.clone());
            return;
        }
        for i in start..n {
            if n - i < k - cur.len() {
                break;
            }
            cur.push(i);
            rec(i + 1, n, k, cur, out);
            cur.pop();
        }
    }
    let mut out = Vec::new();
    rec(0, n, k, &mut Vec::with_capacity(k), &mut out);
    out
}

/// Exact vertices of `{facets} ∩ {extra}` in lexicographic order.
fn enumerate_vertices(dim: usize, facets: &[Facet], extra: &[Facet]) -> Vec<Vec<Rational>> {
    let all: Vec<&Facet> = facets.iter().chain(extra).collect();
    let mut found: BTreeSet<Vec<Rational>> = BTreeSet::new();
    for combo in combinations(all.len(), dim) {
        let a: Vec<Vec<Rational>> = combo.iter().map(|&i| all[i].normal_rational()).collect();
        let b: Vec<Rational> = combo.iter().map(|&i| -all[i].offset.clone()).collect();
        let Some(x) = linalg::solve(a, b) else {
            continue;
        };
        if all.iter().all(|f| !f.evaluate(&x).is_negative()) {
            found.insert(x);
        }
    }
    found.into_iter().collect()
}

/// Intersects with a box strictly containing all vertices; a bounded
/// polytope gains no vertex on the box.
fn is_unbounded(dim: usize, facets: &[Facet], vertices: &[Vec<Rational>]) -> bool {
    let max = vertices
        .iter()
        .flatten()
        .map(|x| x.abs())
        .max()
        .unwrap_or_else(Rational::zero);
    let bound = max * Rational::from_integer(2.into()) + Rational::one();
    let mut boxed = Vec::with_capacity(2 * dim);
    for i in 0..dim {
        for sign in [1i64, -1] {
            let normal = (0..dim).map(|j| BigInt::from(if i == j { sign } else { 0 })).collect();
            boxed.push(Facet {
                normal,
                offset: bound.clone(),
                label_scale: BigInt::one(),
            });
        }
    }
    enumerate_vertices(dim, facets, &boxed)
        .iter()
        .any(|v| v.iter().any(|x| x.abs() == bound))
}
