//! Fractional multicommodity routing of boundary demands inside a cluster.
//!
//! Demands are indexed by pairs of boundary edges of the cluster. They are
//! routed in G[S] extended by one terminal per boundary edge, in small
//! increments along shortest paths under exponential edge weights.

use std::cmp::Ordering;
use std::collections::{BTreeMap, BinaryHeap};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::graph::{subdivide_boundary, Graph, VertexId, VertexSet};

/// D(e, e') keyed by edge indices of the host graph.
pub type Demands = BTreeMap<(usize, usize), f64>;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RoutingConfig {
    /// Each demand is sent in this many equal increments.
    pub rounds: usize,
    /// Sharpness of the exponential penalty on load.
    pub beta: f64,
    /// Congestion above which the routing is flagged as failed.
    pub cap: Option<f64>,
}

impl Default for RoutingConfig {
    fn default() -> Self {
        RoutingConfig { rounds: 32, beta: 1.0, cap: None }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RoutingReport {
    /// Maximum total flow over an edge of the extended cluster graph.
    pub congestion: f64,
    /// Largest Σ_e' D(e, e') over boundary edges e.
    pub restriction: f64,
    /// Flow per edge of the extended graph, keyed by sorted endpoint ids.
    pub loads: Vec<((VertexId, VertexId), f64)>,
    /// Flow paths per demand: (path as vertex ids, amount).
    pub paths: BTreeMap<(usize, usize), Vec<(Vec<VertexId>, f64)>>,
    pub failed: bool,
}

/// Σ_e' D(e, e') maximized over e.
pub fn demand_restriction(d: &Demands) -> f64 {
    let mut per: BTreeMap<usize, f64> = BTreeMap::new();
    for (&(a, b), &x) in d {
        *per.entry(a).or_default() += x;
        *per.entry(b).or_default() += x;
    }
    per.values().copied().fold(0.0, f64::max)
}

/// The O(c·log k'/α) congestion bound with unit constant.
pub fn congestion_bound(c: f64, k_prime: usize, alpha: f64) -> f64 {
    c * (k_prime.max(2) as f64).log2() / alpha
}

#[derive(PartialEq)]
struct Item(f64, usize);

impl Eq for Item {}

impl PartialOrd for Item {
    fn partial_cmp(&self, o: &Self) -> Option<Ordering> {
        Some(self.cmp(o))
    }
}

impl Ord for Item {
    fn cmp(&self, o: &Self) -> Ordering {
        o.0.total_cmp(&self.0).then(o.1.cmp(&self.1))
    }
}

/// Shortest path by edge weights; returns (vertex path, edge path).
pub(crate) fn dijkstra(g: &Graph, w: &[f64], s: usize, t: usize) -> Option<(Vec<usize>, Vec<usize>)> {
    let mut dist = vec![f64::INFINITY; g.n()];
    let mut via = vec![usize::MAX; g.n()];
    let mut heap = BinaryHeap::new();
    dist[s] = 0.0;
    heap.push(Item(0.0, s));
    while let Some(Item(d, u)) = heap.pop() {
        if d > dist[u] {
            continue;
        }
        if u == t {
            break;
        }
        for &(v, e) in g.neighbors(u) {
            let nd = d + w[e];
            if nd < dist[v] {
                dist[v] = nd;
                via[v] = e;
                heap.push(Item(nd, v));
            }
        }
    }
    if !dist[t].is_finite() {
        return None;
    }
    let (mut vs, mut es) = (vec![t], Vec::new());
    let mut x = t;
    while x != s {
        let e = via[x];
        es.push(e);
        let (a, b) = g.edge(e);
        x = if a == x { b } else { a };
        vs.push(x);
    }
    vs.reverse();
    es.reverse();
    Some((vs, es))
}

pub fn route_demands_in_cluster(g: &Graph, cluster: &VertexSet, demands: &Demands, cfg: &RoutingConfig) -> Result<RoutingReport> {
    let sub = subdivide_boundary(g, cluster)?;
    let h = &sub.graph;
    let mut term_of_edge: BTreeMap<usize, usize> = BTreeMap::new();
    for (&t, &e) in &sub.terminal_edge {
        term_of_edge.insert(e, h.index_of(t).expect("terminal in subdivided graph"));
    }
    for (&(a, b), &x) in demands {
        if !(x >= 0.0) {
            return Err(Error::Precondition(format!("demand ({a}, {b}) is {x}")));
        }
        for e in [a, b] {
            if !term_of_edge.contains_key(&e) {
                return Err(Error::Precondition(format!("edge {e} is not a boundary edge of the cluster")));
            }
        }
    }
    let rounds = cfg.rounds.max(1);
    let mut load = vec![0.0f64; h.m()];
    let mut paths: BTreeMap<(usize, usize), BTreeMap<Vec<usize>, f64>> = BTreeMap::new();
    let mut failed = false;
    for _ in 0..rounds {
        for (&(a, b), &x) in demands {
            if x == 0.0 || a == b {
                continue;
            }
            let inc = x / rounds as f64;
            let w: Vec<f64> = load.iter().map(|l| (cfg.beta * l).exp()).collect();
            match dijkstra(h, &w, term_of_edge[&a], term_of_edge[&b]) {
                Some((vs, es)) => {
                    for e in es {
                        load[e] += inc;
                    }
                    *paths.entry((a, b)).or_default().entry(vs).or_default() += inc;
                }
                None => failed = true,
            }
        }
    }
    let congestion = load.iter().copied().fold(0.0, f64::max);
    if cfg.cap.is_some_and(|c| congestion > c + 1e-9) {
        failed = true;
    }
    let mut loads: Vec<((VertexId, VertexId), f64)> = (0..h.m()).map(|e| (h.edge_ids(e), load[e])).collect();
    loads.sort_by_key(|x| x.0);
    let paths = paths
        .into_iter()
        .map(|(k, ps)| (k, ps.into_iter().map(|(vs, f)| (vs.into_iter().map(|i| h.id(i)).collect(), f)).collect()))
        .collect();
    Ok(RoutingReport { congestion, restriction: demand_restriction(demands), loads, paths, failed })
}
