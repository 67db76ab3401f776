//! Brute-force oracles written from the definitions, shared by the acceptance
//! and property targets. None of them calls a library solver.

#![allow(dead_code)]

use std::collections::BTreeSet;

use twdecomp::cuts::Rational;
use twdecomp::treewidth::TreeDecomposition;
use twdecomp::{Graph, VertexId, VertexSet};

pub fn adjacency(g: &Graph) -> Vec<u32> {
    let mut adj = vec![0u32; g.n()];
    for &(u, v) in g.edges() {
        if u != v {
            adj[u] |= 1 << v;
            adj[v] |= 1 << u;
        }
    }
    adj
}

/// Treewidth by the subset recurrence TW(S ∪ {v}) = max(TW(S), |Q(S, v)|), where
/// Q(S, v) is the set of vertices outside S ∪ {v} reachable from v through S.
pub fn oracle_treewidth(g: &Graph) -> usize {
    let n = g.n();
    assert!(n <= 20);
    if n == 0 {
        return 0;
    }
    let adj = adjacency(g);
    let full = (1u32 << n) - 1;
    let q = |s: u32, v: usize| -> usize {
        let mut seen = 1u32 << v;
        let mut stack = vec![v];
        let mut out = 0u32;
        while let Some(x) = stack.pop() {
            let mut nb = adj[x] & !seen;
            while nb != 0 {
                let y = nb.trailing_zeros() as usize;
                nb &= nb - 1;
                seen |= 1 << y;
                if s & (1 << y) != 0 {
                    stack.push(y);
                } else {
                    out |= 1 << y;
                }
            }
        }
        out.count_ones() as usize
    };
    let mut tw = vec![usize::MAX; 1 << n];
    tw[0] = 0;
    for s in 0..full {
        if tw[s as usize] == usize::MAX {
            continue;
        }
        for v in 0..n {
            if s & (1 << v) == 0 {
                let t = (s | 1 << v) as usize;
                let val = tw[s as usize].max(q(s, v));
                tw[t] = tw[t].min(val);
            }
        }
    }
    tw[full as usize]
}

/// G[mask] contains a cycle iff it has more edges than vertices minus components.
pub fn has_cycle_in(g: &Graph, mask: u32) -> bool {
    let mut parent: Vec<usize> = (0..g.n()).collect();
    fn find(p: &mut [usize], x: usize) -> usize {
        let mut x = x;
        while p[x] != x {
            p[x] = p[p[x]];
            x = p[x];
        }
        x
    }
    for &(u, v) in g.edges() {
        if mask & (1 << u) == 0 || mask & (1 << v) == 0 {
            continue;
        }
        let (a, b) = (find(&mut parent, u), find(&mut parent, v));
        if a == b {
            return true;
        }
        parent[a] = b;
    }
    false
}

/// Maximum number of vertex-disjoint cycles: disjoint vertex sets each carrying a cycle.
pub fn oracle_packing(g: &Graph) -> usize {
    let n = g.n();
    assert!(n <= 12);
    let full = (1u32 << n) - 1;
    let cyclic: Vec<bool> = (0..=full).map(|s| has_cycle_in(g, s)).collect();
    let mut best = vec![0usize; 1 << n];
    for u in 1..=full {
        let low = u & u.wrapping_neg();
        let mut b = best[(u & !low) as usize];
        // subsets of u containing its lowest vertex
        let rest = u & !low;
        let mut sub = rest;
        loop {
            let s = sub | low;
            if cyclic[s as usize] {
                b = b.max(1 + best[(u & !s) as usize]);
            }
            if sub == 0 {
                break;
            }
            sub = (sub - 1) & rest;
        }
        best[u as usize] = b;
    }
    best[full as usize]
}

/// min over S with 0 < |S| ≤ n/2 of |∂S|/|S|, parallel edges counted.
pub fn oracle_expansion(g: &Graph) -> Rational {
    let n = g.n();
    let mut best: Option<Rational> = None;
    for s in 1u32..(1 << n) - 1 {
        let size = s.count_ones() as u64;
        if 2 * size > n as u64 {
            continue;
        }
        let crossing = g.edges().iter().filter(|&&(u, v)| ((s >> u) & 1) != ((s >> v) & 1)).count() as u64;
        let x = Rational::new(crossing, size);
        if best.is_none_or(|b| x < b) {
            best = Some(x);
        }
    }
    best.expect("n ≥ 2")
}

/// min over cuts with internal edges on both sides of crossing / min(|E(A)|, |E(B)|).
pub fn oracle_conductance(g: &Graph) -> Option<Rational> {
    let n = g.n();
    assert!(n <= 20);
    if n < 2 {
        return None;
    }
    let mut best: Option<Rational> = None;
    for s in 1u32..(1 << (n - 1)) {
        let (mut ea, mut eb, mut cr) = (0u64, 0u64, 0u64);
        for &(u, v) in g.edges() {
            match ((s >> u) & 1, (s >> v) & 1) {
                (1, 1) => ea += 1,
                (0, 0) => eb += 1,
                _ => cr += 1,
            }
        }
        if ea > 0 && eb > 0 {
            let x = Rational::new(cr, ea.min(eb));
            if best.is_none_or(|b| x < b) {
                best = Some(x);
            }
        }
    }
    best
}

/// Minimum sparsity of the boundary terminals of `part` in the subdivided G[part]
/// (one pendant terminal per boundary edge). Core splits are enumerated; for a
/// fixed split, moving i terminals away from their anchor's side costs i crossing
/// edges, and moving them in both directions never helps.
pub fn oracle_goodness(g: &Graph, part: &VertexSet) -> Option<Rational> {
    let core: Vec<usize> = part.iter().map(|v| g.index_of(*v).unwrap()).collect();
    let p = core.len();
    assert!(p <= 20);
    let pos = |x: usize| core.iter().position(|&c| c == x);
    let mut inner = Vec::new();
    let mut anchors = Vec::new();
    for &(u, v) in g.edges() {
        match (pos(u), pos(v)) {
            (Some(a), Some(b)) => inner.push((a, b)),
            (Some(a), None) | (None, Some(a)) => anchors.push(a),
            _ => {}
        }
    }
    let k = anchors.len() as u64;
    if k < 2 {
        return None;
    }
    let mut best: Option<Rational> = None;
    for s in 0u32..(1 << p) {
        let c0 = inner.iter().filter(|&&(a, b)| ((s >> a) & 1) != ((s >> b) & 1)).count() as u64;
        let a0 = anchors.iter().filter(|&&a| (s >> a) & 1 == 1).count() as u64;
        let b0 = k - a0;
        let moves = (0..=a0).map(|i| (a0 - i, b0 + i, i)).chain((1..=b0).map(|j| (a0 + j, b0 - j, j)));
        for (ta, tb, cost) in moves {
            if ta > 0 && tb > 0 {
                let x = Rational::new(c0 + cost, ta.min(tb));
                if best.is_none_or(|b| x < b) {
                    best = Some(x);
                }
            }
        }
    }
    best
}

pub fn is_forest(g: &Graph, removed: &VertexSet) -> bool {
    let mut mask = 0u32;
    for i in 0..g.n() {
        if !removed.contains(&g.id(i)) {
            mask |= 1 << i;
        }
    }
    !has_cycle_in(g, mask)
}

pub fn is_cycle(g: &Graph, cyc: &[usize]) -> bool {
    let distinct: BTreeSet<usize> = cyc.iter().copied().collect();
    cyc.len() >= 3
        && distinct.len() == cyc.len()
        && (0..cyc.len()).all(|i| {
            let (a, b) = (cyc[i], cyc[(i + 1) % cyc.len()]);
            g.edges().iter().any(|&(u, v)| (u, v) == (a, b) || (v, u) == (a, b))
        })
}

pub fn idx(g: &Graph, vs: impl IntoIterator<Item = VertexId>) -> Vec<usize> {
    vs.into_iter().map(|v| g.index_of(v).expect("vertex in graph")).collect()
}

/// min over bipartitions with terminals on both sides of crossing / min(|T∩A|, |T∩B|).
pub fn oracle_sparsity(g: &Graph, t: &VertexSet) -> Option<Rational> {
    let n = g.n();
    assert!(n <= 20);
    let tmask: u32 = t.iter().map(|v| 1u32 << g.index_of(*v).unwrap()).sum();
    let mut best: Option<Rational> = None;
    for s in 1u32..(1 << (n - 1)) {
        let ta = (s & tmask).count_ones() as u64;
        let tb = (!s & tmask).count_ones() as u64;
        if ta == 0 || tb == 0 {
            continue;
        }
        let cr = g.edges().iter().filter(|&&(u, v)| ((s >> u) & 1) != ((s >> v) & 1)).count() as u64;
        let x = Rational::new(cr, ta.min(tb));
        if best.is_none_or(|b| x < b) {
            best = Some(x);
        }
    }
    best
}

/// Fewest edges crossing a bipartition with `a` on one side and `b` on the other.
pub fn oracle_min_cut(g: &Graph, a: u32, b: u32) -> usize {
    let n = g.n();
    assert!(n <= 20 && a & b == 0);
    let free = ((1u32 << n) - 1) & !a & !b;
    let mut best = usize::MAX;
    let mut sub = free;
    loop {
        let s = sub | a;
        let cr = g.edges().iter().filter(|&&(u, v)| ((s >> u) & 1) != ((s >> v) & 1)).count();
        best = best.min(cr);
        if sub == 0 {
            break;
        }
        sub = (sub - 1) & free;
    }
    best
}

/// The tree-decomposition conditions checked directly: the bag graph is a tree,
/// every vertex and edge lies in a bag, the bags holding a vertex are connected,
/// and the stored width is the largest bag minus one.
pub fn decomposition_valid(g: &Graph, td: &TreeDecomposition) -> bool {
    let k = td.bags.len();
    if k == 0 || td.tree_edges.len() + 1 != k {
        return g.n() == 0;
    }
    let mut adj = vec![Vec::new(); k];
    for &(x, y) in &td.tree_edges {
        if x >= k || y >= k {
            return false;
        }
        adj[x].push(y);
        adj[y].push(x);
    }
    let reach = |allowed: &dyn Fn(usize) -> bool, start: usize| -> BTreeSet<usize> {
        let mut seen = BTreeSet::from([start]);
        let mut stack = vec![start];
        while let Some(x) = stack.pop() {
            for &y in &adj[x] {
                if allowed(y) && seen.insert(y) {
                    stack.push(y);
                }
            }
        }
        seen
    };
    if reach(&|_| true, 0).len() != k {
        return false;
    }
    for i in 0..g.n() {
        let v = g.id(i);
        let holding: Vec<usize> = (0..k).filter(|&b| td.bags[b].contains(&v)).collect();
        if holding.is_empty() || reach(&|b| td.bags[b].contains(&v), holding[0]).len() != holding.len() {
            return false;
        }
    }
    for e in 0..g.m() {
        let (u, v) = g.edge_ids(e);
        if !td.bags.iter().any(|b| b.contains(&u) && b.contains(&v)) {
            return false;
        }
    }
    td.width + 1 == td.bags.iter().map(|b| b.len()).max().unwrap_or(1)
}

/// Whether g[s] has a cycle (treewidth ≥ 2), by union-find over the induced edges.
pub fn induces_cycle(g: &Graph, s: &VertexSet) -> bool {
    let inside: Vec<bool> = (0..g.n()).map(|i| s.contains(&g.id(i))).collect();
    let mut parent: Vec<usize> = (0..g.n()).collect();
    fn find(p: &mut [usize], x: usize) -> usize {
        let mut x = x;
        while p[x] != x {
            p[x] = p[p[x]];
            x = p[x];
        }
        x
    }
    g.edges().iter().filter(|&&(u, v)| inside[u] && inside[v]).any(|&(u, v)| {
        let (a, b) = (find(&mut parent, u), find(&mut parent, v));
        parent[a] = b;
        a == b
    })
}
