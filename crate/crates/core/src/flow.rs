//! Dinic max-flow and the graph-level Menger primitives built on it.

use std::collections::VecDeque;

use serde::{Deserialize, Serialize};

use crate::error::Result;
use crate::graph::{Graph, VertexId, VertexSet};

pub const INF: i64 = i64::MAX / 4;

#[derive(Clone, Debug)]
pub struct FlowNetwork {
    head: Vec<Vec<usize>>,
    to: Vec<usize>,
    cap: Vec<i64>,
    orig: Vec<i64>,
    level: Vec<i32>,
    iter: Vec<usize>,
}

impl FlowNetwork {
    pub fn new(n: usize) -> Self {
        FlowNetwork { head: vec![Vec::new(); n], to: vec![], cap: vec![], orig: vec![], level: vec![], iter: vec![] }
    }

    pub fn node_count(&self) -> usize {
        self.head.len()
    }

    pub fn add_node(&mut self) -> usize {
        self.head.push(Vec::new());
        self.head.len() - 1
    }

    /// Arc u→v with capacity `c` and a reverse arc of capacity `back`.
    /// Returns the forward arc id; the reverse arc is `id ^ 1`.
    pub fn add_arc_pair(&mut self, u: usize, v: usize, c: i64, back: i64) -> usize {
        let id = self.to.len();
        self.to.push(v);
        self.cap.push(c);
        self.orig.push(c);
        self.head[u].push(id);
        self.to.push(u);
        self.cap.push(back);
        self.orig.push(back);
        self.head[v].push(id + 1);
        id
    }

    pub fn add_arc(&mut self, u: usize, v: usize, c: i64) -> usize {
        self.add_arc_pair(u, v, c, 0)
    }

    /// Undirected unit-style edge: one unit in either direction, net flow stored on one arc pair.
    pub fn add_undirected(&mut self, u: usize, v: usize, c: i64) -> usize {
        self.add_arc_pair(u, v, c, c)
    }

    /// Net flow through an arc: original capacity minus residual.
    pub fn flow(&self, arc: usize) -> i64 {
        self.orig[arc] - self.cap[arc]
    }

    pub fn arc_head(&self, arc: usize) -> usize {
        self.to[arc]
    }

    pub fn arcs_from(&self, u: usize) -> &[usize] {
        &self.head[u]
    }

    fn bfs(&mut self, s: usize, t: usize) -> bool {
        self.level = vec![-1; self.head.len()];
        self.level[s] = 0;
        let mut q = VecDeque::from([s]);
        while let Some(u) = q.pop_front() {
            for &a in &self.head[u] {
                let v = self.to[a];
                if self.cap[a] > 0 && self.level[v] < 0 {
                    self.level[v] = self.level[u] + 1;
                    q.push_back(v);
                }
            }
        }
        self.level[t] >= 0
    }

    fn dfs(&mut self, s: usize, t: usize, limit: i64) -> i64 {
        // iterative blocking-flow search to avoid deep recursion on long paths
        let mut stack: Vec<usize> = Vec::new();
        let mut u = s;
        loop {
            if u == t {
                let push = stack.iter().map(|&a| self.cap[a]).min().unwrap_or(limit).min(limit);
                for &a in &stack {
                    self.cap[a] -= push;
                    self.cap[a ^ 1] += push;
                }
                return push;
            }
            let mut advanced = false;
            while self.iter[u] < self.head[u].len() {
                let a = self.head[u][self.iter[u]];
                let v = self.to[a];
                if self.cap[a] > 0 && self.level[v] == self.level[u] + 1 {
                    stack.push(a);
                    u = v;
                    advanced = true;
                    break;
                }
                self.iter[u] += 1;
            }
            if !advanced {
                if u == s {
                    return 0;
                }
                self.level[u] = -1;
                let a = stack.pop().expect("non-source has a parent arc");
                u = self.to[a ^ 1];
                self.iter[u] += 1;
            }
        }
    }

    pub fn max_flow(&mut self, s: usize, t: usize) -> i64 {
        self.max_flow_limited(s, t, INF)
    }

    /// Stops once `limit` units are routed.
    pub fn max_flow_limited(&mut self, s: usize, t: usize, limit: i64) -> i64 {
        let mut total = 0;
        while total < limit && self.bfs(s, t) {
            self.iter = vec![0; self.head.len()];
            loop {
                let f = self.dfs(s, t, limit - total);
                if f == 0 {
                    break;
                }
                total += f;
                if total >= limit {
                    break;
                }
            }
        }
        total
    }

    /// Nodes reachable from `s` in the residual network (the source side of a min cut).
    pub fn residual_reachable(&self, s: usize) -> Vec<bool> {
        let mut seen = vec![false; self.head.len()];
        seen[s] = true;
        let mut q = VecDeque::from([s]);
        while let Some(u) = q.pop_front() {
            for &a in &self.head[u] {
                let v = self.to[a];
                if self.cap[a] > 0 && !seen[v] {
                    seen[v] = true;
                    q.push_back(v);
                }
            }
        }
        seen
    }

    /// Splits the current flow into unit s–t walks with cycles cancelled.
    /// Each path is a node sequence from `s` to `t`.
    pub fn unit_paths(&self, s: usize, t: usize) -> Vec<Vec<usize>> {
        let mut rem: Vec<i64> = (0..self.to.len()).map(|a| self.flow(a).max(0)).collect();
        let mut paths = Vec::new();
        loop {
            let mut path = vec![s];
            let mut arcs: Vec<usize> = Vec::new();
            let mut pos = vec![usize::MAX; self.head.len()];
            pos[s] = 0;
            let mut u = s;
            while u != t {
                let next = self.head[u].iter().copied().find(|&a| rem[a] > 0);
                let Some(a) = next else { break };
                let v = self.to[a];
                if pos[v] != usize::MAX {
                    // cancel the cycle v → … → u → v
                    let k = pos[v];
                    rem[a] -= 1;
                    for &b in &arcs[k..] {
                        rem[b] -= 1;
                    }
                    for &w in &path[k + 1..] {
                        pos[w] = usize::MAX;
                    }
                    path.truncate(k + 1);
                    arcs.truncate(k);
                    u = v;
                    continue;
                }
                arcs.push(a);
                path.push(v);
                pos[v] = path.len() - 1;
                u = v;
            }
            if u != t {
                break;
            }
            for &a in &arcs {
                rem[a] -= 1;
            }
            paths.push(path);
        }
        paths
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum CapacityMode {
    /// Edge-disjoint paths; sources and sinks may emit any number of paths.
    Edge,
    /// Node-disjoint paths; every vertex, endpoints included, is used at most once.
    Vertex,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct FlowResult {
    pub value: usize,
    /// Vertex sequences; a shared source/sink contributes the one-vertex path.
    pub paths: Vec<Vec<VertexId>>,
}

/// Maximum number of disjoint source–sink paths under unit capacities.
pub fn max_flow(g: &Graph, sources: &VertexSet, sinks: &VertexSet, mode: CapacityMode) -> Result<FlowResult> {
    let src = g.mask(sources)?;
    let snk = g.mask(sinks)?;
    let n = g.n();
    let mut paths: Vec<Vec<VertexId>> = Vec::new();
    let shared: Vec<bool> = (0..n).map(|i| src[i] && snk[i]).collect();
    for i in (0..n).filter(|&i| shared[i]) {
        paths.push(vec![g.id(i)]);
    }
    match mode {
        CapacityMode::Edge => {
            let (s, t) = (n, n + 1);
            let mut net = FlowNetwork::new(n + 2);
            for &(u, v) in g.edges() {
                net.add_undirected(u, v, 1);
            }
            for i in 0..n {
                if src[i] && !shared[i] {
                    net.add_arc(s, i, INF);
                }
                if snk[i] && !shared[i] {
                    net.add_arc(i, t, INF);
                }
            }
            net.max_flow(s, t);
            for p in net.unit_paths(s, t) {
                paths.push(p[1..p.len() - 1].iter().map(|&i| g.id(i)).collect());
            }
        }
        CapacityMode::Vertex => {
            // node 2i is v_in, 2i+1 is v_out
            let (s, t) = (2 * n, 2 * n + 1);
            let mut net = FlowNetwork::new(2 * n + 2);
            for i in 0..n {
                if !shared[i] {
                    net.add_arc(2 * i, 2 * i + 1, 1);
                }
            }
            for &(u, v) in g.edges() {
                net.add_arc(2 * u + 1, 2 * v, 1);
                net.add_arc(2 * v + 1, 2 * u, 1);
            }
            for i in 0..n {
                if src[i] && !shared[i] {
                    net.add_arc(s, 2 * i, 1);
                }
                if snk[i] && !shared[i] {
                    net.add_arc(2 * i + 1, t, 1);
                }
            }
            net.max_flow(s, t);
            for p in net.unit_paths(s, t) {
                let mut vp: Vec<VertexId> = Vec::new();
                for &x in &p[1..p.len() - 1] {
                    let id = g.id(x / 2);
                    if vp.last() != Some(&id) {
                        vp.push(id);
                    }
                }
                paths.push(vp);
            }
        }
    }
    Ok(FlowResult { value: paths.len(), paths })
}

/// Min number of edges separating `a` from `b` (disjoint index masks), with the source side.
pub fn min_edge_cut(g: &Graph, a: &[bool], b: &[bool]) -> (usize, Vec<bool>) {
    min_edge_cut_limited(g, a, b, INF)
}

/// As [`min_edge_cut`] but stops at `limit`; the side is meaningful only when the value is below it.
pub fn min_edge_cut_limited(g: &Graph, a: &[bool], b: &[bool], limit: i64) -> (usize, Vec<bool>) {
    let n = g.n();
    let (s, t) = (n, n + 1);
    let mut net = FlowNetwork::new(n + 2);
    for &(u, v) in g.edges() {
        net.add_undirected(u, v, 1);
    }
    for i in 0..n {
        if a[i] {
            net.add_arc(s, i, INF);
        }
        if b[i] {
            net.add_arc(i, t, INF);
        }
    }
    let f = net.max_flow_limited(s, t, limit);
    let reach = net.residual_reachable(s);
    (f as usize, reach[..n].to_vec())
}
