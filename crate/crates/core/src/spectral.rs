//! Spectral orderings for sweep cuts and Laplacian eigenvalue bounds.

use nalgebra::{DMatrix, SymmetricEigen};
use rand::Rng;
use rand_distr::StandardNormal;

use crate::graph::Graph;

/// Approximate second eigenvector of the normalized Laplacian by power
/// iteration on the lazy walk operator, returned as vertex embedding values.
pub fn fiedler_embedding(g: &Graph, iters: usize, rng: &mut impl Rng) -> Vec<f64> {
    let n = g.n();
    let deg: Vec<f64> = (0..n).map(|i| g.degree(i) as f64).collect();
    let sq: Vec<f64> = deg.iter().map(|d| d.sqrt()).collect();
    let norm1 = sq.iter().map(|x| x * x).sum::<f64>().sqrt();
    let top: Vec<f64> = if norm1 > 0.0 { sq.iter().map(|x| x / norm1).collect() } else { vec![0.0; n] };
    let mut x: Vec<f64> = (0..n).map(|_| rng.sample::<f64, _>(StandardNormal)).collect();
    let deflate = |x: &mut Vec<f64>| {
        let dot: f64 = x.iter().zip(&top).map(|(a, b)| a * b).sum();
        x.iter_mut().zip(&top).for_each(|(a, b)| *a -= dot * b);
        let nrm = x.iter().map(|a| a * a).sum::<f64>().sqrt();
        if nrm > 0.0 {
            x.iter_mut().for_each(|a| *a /= nrm);
        }
    };
    deflate(&mut x);
    let mut y = vec![0.0; n];
    for _ in 0..iters {
        for i in 0..n {
            let mut acc = 0.0;
            if deg[i] > 0.0 {
                for &(j, _) in g.neighbors(i) {
                    acc += x[j] / sq[j];
                }
                acc /= sq[i];
            }
            y[i] = 0.5 * (x[i] + acc);
        }
        std::mem::swap(&mut x, &mut y);
        deflate(&mut x);
    }
    (0..n).map(|i| if deg[i] > 0.0 { x[i] / sq[i] } else { 0.0 }).collect()
}

/// Vertex order by embedding value, ties by index.
pub fn order_by(values: &[f64]) -> Vec<usize> {
    let mut order: Vec<usize> = (0..values.len()).collect();
    order.sort_by(|&a, &b| values[a].total_cmp(&values[b]).then(a.cmp(&b)));
    order
}

/// Several candidate orders: spectral from random starts plus BFS layers from random roots.
pub fn candidate_orders(g: &Graph, restarts: usize, rng: &mut impl Rng) -> Vec<Vec<usize>> {
    let n = g.n();
    let mut out = Vec::new();
    if n == 0 {
        return out;
    }
    let iters = (60 + 8 * n).min(1500);
    for _ in 0..restarts.max(1) {
        out.push(order_by(&fiedler_embedding(g, iters, rng)));
    }
    for _ in 0..restarts.max(1) {
        let root = rng.random_range(0..n);
        let d = g.bfs(root);
        let vals: Vec<f64> = d.iter().map(|&x| if x == usize::MAX { f64::MAX } else { x as f64 }).collect();
        out.push(order_by(&vals));
    }
    out
}

/// Eigenvalues of the combinatorial Laplacian D − A in ascending order (dense).
pub fn laplacian_spectrum(g: &Graph) -> Vec<f64> {
    let n = g.n();
    let mut l = DMatrix::<f64>::zeros(n, n);
    for &(u, v) in g.edges() {
        l[(u, v)] -= 1.0;
        l[(v, u)] -= 1.0;
        l[(u, u)] += 1.0;
        l[(v, v)] += 1.0;
    }
    let mut ev: Vec<f64> = SymmetricEigen::new(l).eigenvalues.iter().copied().collect();
    ev.sort_by(f64::total_cmp);
    ev
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::generators;

    #[test]
    fn cycle_spectrum() {
        // λ2(C_n) = 2 − 2cos(2π/n)
        let ev = laplacian_spectrum(&generators::cycle(8));
        let want = 2.0 - 2.0 * (2.0 * std::f64::consts::PI / 8.0).cos();
        assert!(ev[0].abs() < 1e-9);
        assert!((ev[1] - want).abs() < 1e-9);
    }

    #[test]
    fn fiedler_separates_bridge() {
        let g = generators::two_triangles_bridge();
        let mut rng = generators::rng(3);
        let order = order_by(&fiedler_embedding(&g, 500, &mut rng));
        let first: std::collections::BTreeSet<usize> = order[..3].iter().copied().collect();
        assert!(first == [0, 1, 2].into() || first == [3, 4, 5].into());
    }
}
