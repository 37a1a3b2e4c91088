#![allow(dead_code)]
#![allow(clippy::needless_range_loop)]

use num::{BigInt, Signed, Zero};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use reeb_eh::linalg;
use reeb_eh::scalar::{gcd, int, rat, Rational};
use reeb_eh::{LabelledPolytope, ReebVector};

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

pub fn facet(normal: &[i64], offset: Rational) -> (Vec<BigInt>, Rational) {
    (normal.iter().map(|&u| BigInt::from(u)).collect(), offset)
}

pub fn rect(p: i64, q: i64) -> LabelledPolytope {
    LabelledPolytope::rectangle(p, q).unwrap()
}

pub fn triangle() -> LabelledPolytope {
    LabelledPolytope::standard_simplex(2).unwrap()
}

/// Hirzebruch trapezoid `{x ≥ 0, y ≥ 0, y ≤ b, x + k y ≤ a}` with `a > k b`.
pub fn hirzebruch(a: i64, b: i64, k: i64) -> LabelledPolytope {
    assert!(a > k * b);
    LabelledPolytope::new(
        2,
        vec![
            facet(&[1, 0], int(0)),
            facet(&[0, 1], int(0)),
            facet(&[0, -1], int(b)),
            facet(&[-1, -k], int(a)),
        ],
    )
    .unwrap()
}

pub fn random_hirzebruch(r: &mut ChaCha8Rng) -> LabelledPolytope {
    let k = r.gen_range(0..=3);
    let b = r.gen_range(1..=3);
    let a = k * b + r.gen_range(1..=4);
    hirzebruch(a, b, k)
}

/// Axis box `Π [-w_i, w_i]` in any dimension.
pub fn cube(widths: &[i64]) -> LabelledPolytope {
    let n = widths.len();
    let mut facets = Vec::new();
    for (i, &w) in widths.iter().enumerate() {
        for sign in [1, -1] {
            let mut u = vec![0; n];
            u[i] = sign;
            facets.push(facet(&u, int(w)));
        }
    }
    LabelledPolytope::new(n, facets).unwrap()
}

/// Triangular prism `Δ² × [0, h]`.
pub fn prism(h: i64) -> LabelledPolytope {
    LabelledPolytope::new(
        3,
        vec![
            facet(&[1, 0, 0], int(0)),
            facet(&[0, 1, 0], int(0)),
            facet(&[-1, -1, 0], int(1)),
            facet(&[0, 0, 1], int(0)),
            facet(&[0, 0, -1], int(h)),
        ],
    )
    .unwrap()
}

/// H-representation of the simplex with the given integer vertices, using
/// primitive inward normals.
pub fn simplex_from_vertices(vertices: &[Vec<i64>]) -> Option<LabelledPolytope> {
    let n = vertices.len() - 1;
    let mut facets = Vec::new();
    for skip in 0..=n {
        let rest: Vec<&Vec<i64>> = vertices.iter().enumerate().filter(|(i, _)| *i != skip).map(|(_, v)| v).collect();
        let base = rest[0];
        let edges: Vec<Vec<Rational>> = rest[1..]
            .iter()
            .map(|v| v.iter().zip(base).map(|(a, b)| int(a - b)).collect())
            .collect();
        // normal by cofactor expansion against the edge rows
        let mut normal: Vec<BigInt> = (0..n)
            .map(|j| {
                let minor: Vec<Vec<Rational>> = edges
                    .iter()
                    .map(|row| row.iter().enumerate().filter(|(c, _)| *c != j).map(|(_, x)| x.clone()).collect())
                    .collect();
                let det = if n == 1 { int(1) } else { linalg::determinant(minor) };
                let sign = if j % 2 == 0 { 1 } else { -1 };
                (det * int(sign)).to_integer()
            })
            .collect();
        let g = normal.iter().fold(BigInt::zero(), |g, u| gcd(&g, u));
        if g.is_zero() {
            return None;
        }
        for u in &mut normal {
            *u /= &g;
        }
        let dot = |v: &Vec<i64>| -> BigInt { normal.iter().zip(v).map(|(u, x)| u * BigInt::from(*x)).sum() };
        let mut offset = -dot(base);
        if (dot(&vertices[skip]) + &offset).is_negative() {
            for u in &mut normal {
                *u = -u.clone();
            }
            offset = -offset;
        }
        facets.push((normal, Rational::from_integer(offset)));
    }
    LabelledPolytope::new(n, facets).ok()
}

/// Random slopes of size about `scale / diameter`, with `a0` set so the
/// minimum vertex value is `margin`.
pub fn in_cone_point(p: &LabelledPolytope, r: &mut ChaCha8Rng, scale: i64, margin: Rational) -> ReebVector {
    let n = p.dim();
    let diameter: i64 = p
        .vertices()
        .iter()
        .flat_map(|v| v.iter())
        .map(|x| x.abs().ceil().to_integer().try_into().unwrap_or(1i64))
        .max()
        .unwrap_or(1)
        .max(1);
    let a: Vec<Rational> = (0..n)
        .map(|_| rat(r.gen_range(-scale..=scale), 4 * diameter * r.gen_range(1..=3)))
        .collect();
    let chi = ReebVector::new(int(0), a);
    let min = p.vertices().iter().map(|v| chi.value_at(v)).min().unwrap();
    ReebVector::new(margin - min, chi.a)
}

/// Random unimodular `A` with its inverse, built from elementary row
/// operations and sign flips.
pub fn unimodular(r: &mut ChaCha8Rng, n: usize, ops: usize) -> (Vec<Vec<i64>>, Vec<Vec<i64>>) {
    let mut a: Vec<Vec<i64>> = (0..n).map(|i| (0..n).map(|j| i64::from(i == j)).collect()).collect();
    let mut inv = a.clone();
    for _ in 0..ops {
        if n > 1 && r.gen_bool(0.8) {
            let i = r.gen_range(0..n);
            let j = (i + r.gen_range(1..n)) % n;
            let k = r.gen_range(-2..=2i64);
            // A <- E A with E = I + k e_i e_j^T; inverse <- inverse E^{-1}
            for c in 0..n {
                a[i][c] += k * a[j][c];
            }
            for row in inv.iter_mut() {
                row[j] -= k * row[i];
            }
        } else {
            let i = r.gen_range(0..n);
            for c in 0..n {
                a[i][c] = -a[i][c];
            }
            for row in inv.iter_mut() {
                row[i] = -row[i];
            }
        }
    }
    (a, inv)
}

/// `χ` transported along `x ↦ A x`: same constant, slopes `A^{-T} a`.
pub fn transport(chi: &ReebVector, inv: &[Vec<i64>]) -> ReebVector {
    let n = chi.dim();
    let a = (0..n).map(|i| (0..n).map(|j| int(inv[j][i]) * &chi.a[j]).sum()).collect();
    ReebVector::new(chi.a0.clone(), a)
}

/// Mixed pool of 2- and 3-dimensional polytopes used by property tests.
pub fn pool(index: usize, r: &mut ChaCha8Rng) -> LabelledPolytope {
    match index % 6 {
        0 => rect(r.gen_range(1..=3), r.gen_range(1..=8)),
        1 => triangle(),
        2 => random_hirzebruch(r),
        3 => cube(&[r.gen_range(1..=2), r.gen_range(1..=3), r.gen_range(1..=2)]),
        4 => prism(r.gen_range(1..=3)),
        _ => LabelledPolytope::standard_simplex(3).unwrap(),
    }
}

/// Worst relative errors of the exact EH gradient and Hessian against
/// central differences with step `h`, plus whether `G·χ = 0` exactly.
/// Gradient differences use EH values; Hessian differences use the exact
/// gradient at the shifted rational points, which keeps rounding out of
/// the second difference.
pub struct FdCheck {
    pub grad_rel: f64,
    pub hess_rel: f64,
    pub euler_exact: bool,
}

pub fn fd_check(calc: &reeb_eh::ReebCalculus, chi: &ReebVector, h: Rational) -> FdCheck {
    let d = calc.derivatives(chi).unwrap();
    let g = d.eh_gradient();
    let hess = d.eh_hessian();
    let coords = chi.coords();
    let euler: Rational = d.gradient.iter().zip(&coords).map(|(g, c)| g * c).sum();
    let hf = reeb_eh::scalar::to_f64(&h);
    let shifted = |j: usize, sign: i64| {
        let mut c = coords.clone();
        c[j] += &h * int(sign);
        ReebVector::from_coords(&c)
    };
    let m = coords.len();
    let mut g_err: f64 = 0.0;
    let mut h_err: f64 = 0.0;
    for j in 0..m {
        let (plus, minus) = (shifted(j, 1), shifted(j, -1));
        let fd = (calc.eh(&plus).unwrap().eh_float - calc.eh(&minus).unwrap().eh_float) / (2.0 * hf);
        g_err = g_err.max((fd - g[j]).abs());
        let gp = calc.derivatives(&plus).unwrap().eh_gradient();
        let gm = calc.derivatives(&minus).unwrap().eh_gradient();
        for i in 0..m {
            h_err = h_err.max(((gp[i] - gm[i]) / (2.0 * hf) - hess[i][j]).abs());
        }
    }
    let g_norm = g.iter().fold(0.0f64, |a, x| a.max(x.abs()));
    let h_norm = hess.iter().flatten().fold(0.0f64, |a, x| a.max(x.abs()));
    FdCheck {
        grad_rel: g_err / g_norm,
        hess_rel: h_err / h_norm,
        euler_exact: euler.is_zero(),
    }
}

/// The derivative test set: rectangle, Delzant triangle and a random
/// Hirzebruch trapezoid, eight random in-cone points each.
pub fn derivative_cases(seed: u64) -> Vec<(String, LabelledPolytope, ReebVector)> {
    let mut r = rng(seed);
    let trapezoid = random_hirzebruch(&mut r);
    let polys = [("rectangle(1,6)".to_string(), rect(1, 6)), ("triangle".to_string(), triangle()), ("trapezoid".to_string(), trapezoid)];
    let mut out = Vec::new();
    for (name, p) in polys {
        for _ in 0..8 {
            let margin = rat(r.gen_range(1..=4), 4);
            let chi = in_cone_point(&p, &mut r, 4, margin);
            out.push((name.clone(), p.clone(), chi));
        }
    }
    out
}

/// Ten random (P, χ) instances for the quadrature oracle.
pub fn oracle_cases(seed: u64) -> Vec<(LabelledPolytope, ReebVector)> {
    let mut r = rng(seed);
    (0..10)
        .map(|i| {
            let p = pool(i, &mut r);
            let chi = in_cone_point(&p, &mut r, 3, rat(1, 2));
            (p, chi)
        })
        .collect()
}

pub fn piece(a0: Rational, a: Vec<Rational>) -> ReebVector {
    ReebVector::new(a0, a)
}

pub fn segment() -> LabelledPolytope {
    LabelledPolytope::new(1, vec![facet(&[1], int(0)), facet(&[-1], int(1))]).unwrap()
}

/// Sub-term cases: `(P, h, χ)` with a genuinely piecewise roof where possible.
pub fn subterm_cases() -> Vec<(LabelledPolytope, reeb_eh::testconfig::PLConcaveFunction, ReebVector)> {
    vec![
        (
            segment(),
            reeb_eh::testconfig::PLConcaveFunction::new(vec![piece(int(1), vec![int(0)]), piece(int(2), vec![int(-2)])]).unwrap(),
            ReebVector::new(int(1), vec![rat(1, 3)]),
        ),
        (
            rect(1, 2),
            reeb_eh::testconfig::PLConcaveFunction::new(vec![piece(int(3), vec![int(1), int(0)]), piece(int(3), vec![int(-1), int(0)])]).unwrap(),
            ReebVector::new(int(2), vec![rat(1, 2), rat(-1, 5)]),
        ),
        (
            hirzebruch(3, 1, 1),
            reeb_eh::testconfig::PLConcaveFunction::new(vec![piece(int(2), vec![int(0), int(1)]), piece(int(4), vec![int(-1), int(0)])]).unwrap(),
            ReebVector::new(int(1), vec![rat(1, 10), rat(1, 5)]),
        ),
    ]
}

