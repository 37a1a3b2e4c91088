//! Tensor Gauss–Legendre cubature over regions `{(x, t) : x ∈ Δ, 0 ≤ t ≤ h(x)}`
//! with `Δ` a simplex on which `h` is affine. Simplices use the Duffy
//! collapse of the unit cube.

use std::num::NonZeroUsize;

use gauss_quad::GaussLegendre;

/// Gauss–Legendre nodes and weights mapped to `[0, 1]`.
pub fn unit_rule(order: usize) -> Vec<(f64, f64)> {
    let order = NonZeroUsize::new(order.max(1)).expect("positive order");
    GaussLegendre::new(order)
        .as_node_weight_pairs()
        .iter()
        .map(|&(x, w)| (0.5 * (x + 1.0), 0.5 * w))
        .collect()
}

/// Barycentric nodes on the standard `d`-simplex with weights summing to 1.
pub fn simplex_rule(dim: usize, order: usize) -> Vec<(Vec<f64>, f64)> {
    let line = unit_rule(order);
    let factorial: f64 = (1..=dim).map(|k| k as f64).product();
    let mut out = Vec::with_capacity(line.len().pow(dim as u32));
    let mut idx = vec![0usize; dim];
    loop {
        let mut bary = vec![0.0; dim + 1];
        let mut rest = 1.0;
        let mut weight = factorial;
        for (i, &k) in idx.iter().enumerate() {
            let (u, w) = line[k];
            bary[i + 1] = rest * u;
            weight *= w;
            if i + 1 < dim {
                weight *= (1.0 - u).powi((dim - 1 - i) as i32);
            }
            rest *= 1.0 - u;
        }
        bary[0] = rest;
        out.push((bary, weight));
        let mut pos = 0;
        loop {
            if pos == dim {
                return out;
            }
            idx[pos] += 1;
            if idx[pos] < line.len() {
                break;
            }
            idx[pos] = 0;
            pos += 1;
        }
    }
}

/// One column cell: a simplex in the base with the affine roof over it.
#[derive(Debug, Clone)]
pub struct ColumnCell {
    pub vertices: Vec<Vec<f64>>,
    pub volume: f64,
    /// Roof `h(x) = roof[0] + <roof[1..], x>`.
    pub roof: Vec<f64>,
}

#[derive(Debug, Clone)]
pub struct ColumnCubature {
    cells: Vec<ColumnCell>,
    base: Vec<(Vec<f64>, f64)>,
    height: Vec<(f64, f64)>,
}

impl ColumnCubature {
    pub fn new(cells: Vec<ColumnCell>, dim: usize, base_order: usize, height_order: usize) -> Self {
        ColumnCubature {
            cells,
            base: simplex_rule(dim, base_order),
            height: unit_rule(height_order),
        }
    }

    pub fn cells(&self) -> &[ColumnCell] {
        &self.cells
    }

    /// `∫ g(x, t, h(x)) dt dx` over the union of the columns.
    pub fn integrate<G>(&self, g: G) -> f64
    where
        G: Fn(&[f64], f64, f64) -> f64,
    {
        let mut total = 0.0;
        let mut x = Vec::new();
        for cell in &self.cells {
            let mut acc = 0.0;
            for (bary, wb) in &self.base {
                x.clear();
                x.resize(cell.vertices[0].len(), 0.0);
                for (b, v) in bary.iter().zip(&cell.vertices) {
                    for (xc, vc) in x.iter_mut().zip(v) {
                        *xc += b * vc;
                    }
                }
                let h = cell.roof[0] + cell.roof[1..].iter().zip(&x).map(|(a, b)| a * b).sum::<f64>();
                let column: f64 = self.height.iter().map(|&(tau, wt)| wt * g(&x, tau * h, h)).sum();
                acc += wb * h * column;
            }
            total += cell.volume * acc;
        }
        total
    }
}
