//! Gauss-Legendre building blocks.

use std::num::NonZeroUsize;

use gauss_quad::legendre::GaussLegendre;

/// A quadrature rule: nodes in increasing order with their weights.
#[derive(Debug, Clone, PartialEq)]
pub struct Rule {
    pub nodes: Vec<f64>,
    pub weights: Vec<f64>,
}

impl Rule {
    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    pub fn integrate<F: FnMut(f64) -> f64>(&self, mut f: F) -> f64 {
        self.nodes
            .iter()
            .zip(&self.weights)
            .map(|(&x, &w)| w * f(x))
            .sum()
    }
}

/// Gauss-Legendre nodes and weights on [-1, 1], nodes ascending.
pub fn gauss_legendre(order: usize) -> (Vec<f64>, Vec<f64>) {
    let order = NonZeroUsize::new(order.max(1)).unwrap();
    let mut pairs: Vec<(f64, f64)> = GaussLegendre::new(order).as_node_weight_pairs().to_vec();
    pairs.sort_by(|a, b| a.0.total_cmp(&b.0));
    pairs.into_iter().unzip()
}

/// Composite Gauss-Legendre rule on `[a, b]` with the given panel edges.
pub fn composite_on_edges(edges: &[f64], order: usize) -> Rule {
    let (g, gw) = gauss_legendre(order);
    let mut nodes = Vec::with_capacity(order * edges.len());
    let mut weights = Vec::with_capacity(order * edges.len());
    for e in edges.windows(2) {
        let c = 0.5 * (e[0] + e[1]);
        let h = 0.5 * (e[1] - e[0]);
        for (x, w) in g.iter().zip(&gw) {
            nodes.push(c + h * x);
            weights.push(h * w);
        }
    }
    Rule { nodes, weights }
}

/// Composite Gauss-Legendre rule with `panels` equal panels of `order` nodes each.
pub fn composite(a: f64, b: f64, panels: usize, order: usize) -> Rule {
    let panels = panels.max(1);
    let edges: Vec<f64> = (0..=panels)
        .map(|k| a + (b - a) * k as f64 / panels as f64)
        .collect();
    composite_on_edges(&edges, order)
}

/// Equal panels on `[a, b]` with a panel edge placed at `split` when it lies inside,
/// using about `total` nodes of `order` per panel.
pub fn composite_split(a: f64, b: f64, split: f64, total: usize, order: usize) -> Rule {
    let panels = total.div_ceil(order).max(1);
    if split > a && split < b && panels >= 2 {
        let left = (((split - a) / (b - a)) * panels as f64).round().clamp(1.0, (panels - 1) as f64) as usize;
        let mut edges: Vec<f64> = (0..=left)
            .map(|k| a + (split - a) * k as f64 / left as f64)
            .collect();
        let right = panels - left;
        edges.extend((1..=right).map(|k| split + (b - split) * k as f64 / right as f64));
        composite_on_edges(&edges, order)
    } else {
        composite(a, b, panels, order)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    #[test]
    fn polynomial_exactness() {
        let (x, w) = gauss_legendre(6);
        assert!(x.windows(2).all(|p| p[0] < p[1]));
        let s: f64 = x.iter().zip(&w).map(|(x, w)| w * x.powi(10)).sum();
        assert_abs_diff_eq!(s, 2.0 / 11.0, epsilon = 1e-14);
    }

    #[test]
    fn composite_integrates_exp() {
        let r = composite_split(-3.0, 5.0, 1.3, 64, 16);
        assert_eq!(r.len(), 64);
        assert!(r.nodes.windows(2).all(|p| p[0] < p[1]));
        assert_abs_diff_eq!(r.integrate(f64::exp), 5f64.exp() - (-3f64).exp(), epsilon = 1e-11);
    }
}
