//! Standard graph families and seeded random models.

use rand::seq::SliceRandom;
use rand::Rng;
use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::graph::Graph;

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

fn build(n: usize, edges: &[(usize, usize)]) -> Graph {
    Graph::from_edges(n, edges).expect("generator emits valid edges")
}

pub fn path(n: usize) -> Graph {
    let e: Vec<_> = (1..n).map(|i| (i - 1, i)).collect();
    build(n, &e)
}

pub fn cycle(n: usize) -> Graph {
    let mut e: Vec<_> = (1..n).map(|i| (i - 1, i)).collect();
    if n >= 3 {
        e.push((n - 1, 0));
    }
    build(n, &e)
}

pub fn complete(n: usize) -> Graph {
    let mut e = Vec::new();
    for i in 0..n {
        for j in i + 1..n {
            e.push((i, j));
        }
    }
    build(n, &e)
}

/// Center 0 with leaves `1..=leaves`.
pub fn star(leaves: usize) -> Graph {
    let e: Vec<_> = (1..=leaves).map(|i| (0, i)).collect();
    build(leaves + 1, &e)
}

/// Vertex `r * cols + c` sits at row r, column c.
pub fn grid(rows: usize, cols: usize) -> Graph {
    let mut e = Vec::new();
    for r in 0..rows {
        for c in 0..cols {
            let v = r * cols + c;
            if c + 1 < cols {
                e.push((v, v + 1));
            }
            if r + 1 < rows {
                e.push((v, v + cols));
            }
        }
    }
    build(rows * cols, &e)
}

pub fn petersen() -> Graph {
    let mut e = Vec::new();
    for i in 0..5 {
        e.push((i, (i + 1) % 5));
        e.push((i, i + 5));
        e.push((5 + i, 5 + (i + 2) % 5));
    }
    build(10, &e)
}

/// Triangles {0,1,2} and {3,4,5} joined by the edge 2–3.
pub fn two_triangles_bridge() -> Graph {
    build(6, &[(0, 1), (1, 2), (0, 2), (3, 4), (4, 5), (3, 5), (2, 3)])
}

/// Cliques of the given sizes, consecutive ones joined by a single edge.
pub fn clique_chain(sizes: &[usize]) -> Graph {
    let mut e = Vec::new();
    let mut start = 0;
    for (k, &s) in sizes.iter().enumerate() {
        for i in 0..s {
            for j in i + 1..s {
                e.push((start + i, start + j));
            }
        }
        if k + 1 < sizes.len() {
            e.push((start + s - 1, start + s));
        }
        start += s;
    }
    build(start, &e)
}

/// Two vertices joined by `k` internally disjoint paths of two edges.
pub fn theta(k: usize) -> Graph {
    let mut e = Vec::new();
    for i in 0..k {
        e.push((0, 2 + i));
        e.push((1, 2 + i));
    }
    build(k + 2, &e)
}

/// Disjoint union; ids of `b` are shifted past those of `a`.
pub fn disjoint_union(a: &Graph, b: &Graph) -> Graph {
    let off = a.n();
    let mut e: Vec<(usize, usize)> = a.edges().to_vec();
    e.extend(b.edges().iter().map(|&(u, v)| (u + off, v + off)));
    build(a.n() + b.n(), &e)
}

/// Uniform labelled tree via a random Prüfer sequence.
pub fn random_tree(n: usize, rng: &mut impl Rng) -> Graph {
    if n <= 1 {
        return Graph::empty(n);
    }
    if n == 2 {
        return path(2);
    }
    let seq: Vec<usize> = (0..n - 2).map(|_| rng.random_range(0..n)).collect();
    let mut deg = vec![1usize; n];
    for &s in &seq {
        deg[s] += 1;
    }
    let mut e = Vec::with_capacity(n - 1);
    let mut leaves: std::collections::BTreeSet<usize> = (0..n).filter(|&v| deg[v] == 1).collect();
    for &s in &seq {
        let leaf = *leaves.iter().next().expect("a leaf exists");
        leaves.remove(&leaf);
        e.push((leaf, s));
        deg[s] -= 1;
        if deg[s] == 1 {
            leaves.insert(s);
        }
    }
    let rest: Vec<usize> = leaves.into_iter().collect();
    e.push((rest[0], rest[1]));
    build(n, &e)
}

pub fn gnp(n: usize, p: f64, rng: &mut impl Rng) -> Graph {
    let mut e = Vec::new();
    for i in 0..n {
        for j in i + 1..n {
            if rng.random::<f64>() < p {
                e.push((i, j));
            }
        }
    }
    build(n, &e)
}

/// Connected G(n, p): resamples until connected.
pub fn connected_gnp(n: usize, p: f64, rng: &mut impl Rng) -> Graph {
    loop {
        let g = gnp(n, p, rng);
        if g.is_connected() {
            return g;
        }
    }
}

/// Random simple graph with degrees `d` (one vertex at `d - 1` when `n·d` is odd),
/// from the pairing model with rejection. `None` when no attempt succeeds.
pub fn random_regular(n: usize, d: usize, rng: &mut impl Rng, attempts: usize) -> Option<Graph> {
    let mut stubs_base: Vec<usize> = (0..n).flat_map(|v| std::iter::repeat_n(v, d)).collect();
    if stubs_base.len() % 2 == 1 {
        stubs_base.pop();
    }
    'outer: for _ in 0..attempts {
        let mut stubs = stubs_base.clone();
        stubs.shuffle(rng);
        let mut seen = std::collections::BTreeSet::new();
        let mut e = Vec::with_capacity(stubs.len() / 2);
        for pair in stubs.chunks(2) {
            let (a, b) = (pair[0].min(pair[1]), pair[0].max(pair[1]));
            if a == b || !seen.insert((a, b)) {
                continue 'outer;
            }
            e.push((a, b));
        }
        return Some(build(n, &e));
    }
    None
}

/// Adds `extra` uniformly random edges between distinct vertices (parallel edges allowed).
pub fn sprinkle(g: &Graph, extra: usize, rng: &mut impl Rng) -> Graph {
    let mut e = g.edges().to_vec();
    let n = g.n();
    if n >= 2 {
        for _ in 0..extra {
            let u = rng.random_range(0..n);
            let mut v = rng.random_range(0..n - 1);
            if v >= u {
                v += 1;
            }
            e.push((u, v));
        }
    }
    build(n, &e)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn family_sizes() {
        assert_eq!(grid(3, 4).m(), 17);
        assert_eq!(complete(5).m(), 10);
        assert_eq!(petersen().m(), 15);
        assert_eq!(petersen().max_degree(), 3);
        assert_eq!(clique_chain(&[5, 5]).m(), 21);
        assert_eq!(theta(3).m(), 6);
    }

    #[test]
    fn random_trees_are_trees() {
        let mut r = rng(1);
        for n in 1..30 {
            let t = random_tree(n, &mut r);
            assert_eq!(t.m(), n.saturating_sub(1));
            assert!(t.is_connected());
        }
    }

    #[test]
    fn random_cubic_degrees() {
        let mut r = rng(2);
        let g = random_regular(10, 3, &mut r, 1000).unwrap();
        assert!((0..10).all(|v| g.degree(v) == 3));
        let g = random_regular(9, 3, &mut r, 1000).unwrap();
        let twos = (0..9).filter(|&v| g.degree(v) == 2).count();
        assert_eq!(twos, 1);
    }
}
