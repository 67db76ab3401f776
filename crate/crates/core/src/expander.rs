//! Expanders: the cut-matching game, small verified expanders, vertex
//! splitting into degree-3 expanders, routing matchings on an expander, and
//! degree reduction by embedding an expander over a well-linked set.

use std::collections::BTreeMap;

use rand::seq::SliceRandom;
use rand::Rng;
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};

use crate::cuts::{enumerate_bipartitions, frac_lt, rational_below, Rational};
use crate::error::{Error, Result};
use crate::flow::FlowNetwork;
use crate::generators;
use crate::graph::{Graph, VertexId, VertexSet};
use crate::routing::dijkstra;
use crate::spectral::laplacian_spectrum;
use crate::well_linked::WellLinkedCertificate;

/// Largest vertex count for exhaustive expansion checks.
pub const EXHAUSTIVE_EXPANSION_LIMIT: usize = 22;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum ExpanderKind {
    EdgeExpander,
    UnionOfMatchings,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum ExpansionMode {
    Exhaustive,
    /// λ₂(D − A)/2, a lower bound on edge expansion.
    Spectral,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ExpanderWitness {
    pub graph: Graph,
    pub kind: ExpanderKind,
    pub expansion: Rational,
    pub mode: ExpansionMode,
}

impl ExpanderWitness {
    pub fn new(graph: Graph, kind: ExpanderKind) -> ExpanderWitness {
        let (expansion, mode) = expansion(&graph);
        ExpanderWitness { graph, kind, expansion, mode }
    }

    pub fn replay(&self) -> bool {
        let measured = match self.mode {
            ExpansionMode::Exhaustive => match exact_expansion(&self.graph) {
                Ok(x) => x,
                Err(_) => return false,
            },
            ExpansionMode::Spectral => spectral_expansion_bound(&self.graph),
        };
        measured >= self.expansion
    }
}

/// min over nonempty proper X of |E(X, X̄)| / min(|X|, |X̄|). Graphs below two
/// vertices have no cuts and get 1.
pub fn exact_expansion(g: &Graph) -> Result<Rational> {
    let n = g.n();
    if n < 2 {
        return Ok(Rational::new(1, 1));
    }
    if n > EXHAUSTIVE_EXPANSION_LIMIT {
        return Err(Error::TooLarge(format!("exhaustive expansion on {n} vertices")));
    }
    let w = vec![[1u64, 0]; n];
    let mut best: Option<(u64, u64)> = None;
    enumerate_bipartitions(g, &w, |st| {
        let a = st.size_a as u64;
        let b = n as u64 - a;
        if b == 0 {
            return;
        }
        let den = a.min(b);
        if best.is_none_or(|(bn, bd)| frac_lt(st.crossing, den, bn, bd)) {
            best = Some((st.crossing, den));
        }
    });
    let (num, den) = best.expect("n ≥ 2");
    Ok(Rational::new(num, den))
}

/// λ₂(D − A)/2 rounded down to a dyadic rational.
pub fn spectral_expansion_bound(g: &Graph) -> Rational {
    if g.n() < 2 {
        return Rational::new(1, 1);
    }
    let ev = laplacian_spectrum(g);
    // guard against eigensolver noise before flooring
    let l2 = (ev[1] - 1e-9).max(0.0);
    if l2 == 0.0 {
        Rational::new(0, 1)
    } else {
        rational_below(l2 / 2.0)
    }
}

/// Exhaustive when small, spectral otherwise.
pub fn expansion(g: &Graph) -> (Rational, ExpansionMode) {
    match exact_expansion(g) {
        Ok(x) => (x, ExpansionMode::Exhaustive),
        Err(_) => (spectral_expansion_bound(g), ExpansionMode::Spectral),
    }
}

/// Answers a cut (left, right) of equal halves with a perfect matching between them.
pub trait MatchingOracle {
    fn matching(&mut self, left: &[usize], right: &[usize]) -> Result<Vec<(usize, usize)>>;
}

/// Uniformly random perfect matching.
pub struct RandomMatching {
    rng: ChaCha8Rng,
}

impl RandomMatching {
    pub fn new(seed: u64) -> Self {
        RandomMatching { rng: generators::rng(seed) }
    }
}

impl MatchingOracle for RandomMatching {
    fn matching(&mut self, left: &[usize], right: &[usize]) -> Result<Vec<(usize, usize)>> {
        let mut r = right.to_vec();
        r.shuffle(&mut self.rng);
        Ok(left.iter().copied().zip(r).collect())
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CutMatchingResult {
    pub witness: ExpanderWitness,
    pub matchings: Vec<Vec<(usize, usize)>>,
}

fn check_matching(n: usize, left: &[usize], right: &[usize], m: &[(usize, usize)]) -> Result<()> {
    let mut side = vec![0u8; n];
    for &v in left {
        side[v] = 1;
    }
    for &v in right {
        side[v] = 2;
    }
    let mut used = vec![false; n];
    if m.len() != left.len() {
        return Err(Error::Protocol(format!("matching has {} pairs for halves of {}", m.len(), left.len())));
    }
    for &(a, b) in m {
        if a >= n || b >= n || side[a] != 1 || side[b] != 2 || used[a] || used[b] {
            return Err(Error::Protocol(format!("pair ({a}, {b}) is not part of a perfect matching across the cut")));
        }
        used[a] = true;
        used[b] = true;
    }
    Ok(())
}

/// Cut player: a lazy random-walk flow matrix projected on a Gaussian vector, split at the median.
struct CutPlayer {
    n: usize,
    f: Vec<f64>,
    rng: ChaCha8Rng,
}

impl CutPlayer {
    fn new(n: usize, seed: u64) -> Self {
        let mut f = vec![0.0; n * n];
        for i in 0..n {
            f[i * n + i] = 1.0;
        }
        CutPlayer { n, f, rng: generators::rng(seed) }
    }

    fn cut(&mut self) -> (Vec<usize>, Vec<usize>) {
        let n = self.n;
        let r: Vec<f64> = (0..n).map(|_| self.rng.sample::<f64, _>(StandardNormal)).collect();
        let u: Vec<f64> = (0..n).map(|i| (0..n).map(|j| self.f[i * n + j] * r[j]).sum()).collect();
        let order = crate::spectral::order_by(&u);
        let mut left = order[..n / 2].to_vec();
        let mut right = order[n / 2..].to_vec();
        left.sort_unstable();
        right.sort_unstable();
        (left, right)
    }

    fn absorb(&mut self, m: &[(usize, usize)]) {
        let n = self.n;
        for &(a, b) in m {
            for j in 0..n {
                let avg = 0.5 * (self.f[a * n + j] + self.f[b * n + j]);
                self.f[a * n + j] = avg;
                self.f[b * n + j] = avg;
            }
        }
    }
}

/// Plays `rounds` rounds on n points; the union of the matchings is the expander.
pub fn cut_matching_game(n: usize, rounds: usize, oracle: &mut dyn MatchingOracle, seed: u64) -> Result<CutMatchingResult> {
    if n < 2 || n % 2 == 1 {
        return Err(Error::Precondition(format!("cut-matching game needs an even n ≥ 2, got {n}")));
    }
    if rounds == 0 {
        return Err(Error::Precondition("at least one round".into()));
    }
    let mut player = CutPlayer::new(n, seed);
    let mut matchings = Vec::with_capacity(rounds);
    let mut g = Graph::empty(n);
    for _ in 0..rounds {
        let (left, right) = player.cut();
        let m = oracle.matching(&left, &right)?;
        check_matching(n, &left, &right, &m)?;
        for &(a, b) in &m {
            g.add_edge(a, b)?;
        }
        player.absorb(&m);
        matchings.push(m);
    }
    Ok(CutMatchingResult { witness: ExpanderWitness::new(g, ExpanderKind::UnionOfMatchings), matchings })
}

/// ⌈log₂ n⌉², the default number of game rounds.
pub fn default_rounds(n: usize) -> usize {
    let l = (n.max(2) as f64).log2().ceil() as usize;
    l * l
}

/// A (near-)3-regular graph on n vertices with verified expansion ≥ target.
/// Below four vertices the complete graph is returned.
pub fn build_small_expander(n: usize, target: Rational, seed: u64, attempts: usize) -> Result<ExpanderWitness> {
    if n <= 4 {
        return Ok(ExpanderWitness::new(generators::complete(n), ExpanderKind::EdgeExpander));
    }
    let mut rng = generators::rng(seed);
    let mut best: Option<Rational> = None;
    for _ in 0..attempts.max(1) {
        let Some(g) = generators::random_regular(n, 3, &mut rng, 200) else { continue };
        if !g.is_connected() {
            continue;
        }
        let w = ExpanderWitness::new(g, ExpanderKind::EdgeExpander);
        if w.expansion >= target {
            return Ok(w);
        }
        best = Some(best.map_or(w.expansion, |b| b.max(w.expansion)));
    }
    Err(Error::RetryExhausted(format!(
        "no 3-regular expander on {n} vertices reached {target}; best {}",
        best.map_or("none".to_string(), |b| b.to_string())
    )))
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SplitGraph {
    pub graph: Graph,
    /// Original vertex of each new vertex (by new index).
    pub origin: Vec<VertexId>,
    /// New vertices standing for each original vertex.
    pub members: BTreeMap<VertexId, Vec<VertexId>>,
    /// New edge index of each original edge.
    pub edge_image: Vec<usize>,
}

/// Replaces every vertex of degree d ≥ 4 by a degree-3 expander on d vertices,
/// attaching each incident edge to its own expander vertex. New ids are 0..N.
pub fn split_vertices(h: &Graph, target: Rational, seed: u64) -> Result<SplitGraph> {
    let mut cache: BTreeMap<usize, Graph> = BTreeMap::new();
    let mut origin = Vec::new();
    let mut members = BTreeMap::new();
    let mut slots: Vec<Vec<usize>> = Vec::with_capacity(h.n());
    let mut edges: Vec<(usize, usize)> = Vec::new();
    for v in 0..h.n() {
        let d = h.degree(v);
        let base = origin.len();
        if d >= 4 {
            if let std::collections::btree_map::Entry::Vacant(e) = cache.entry(d) {
                let w = build_small_expander(d, target, seed ^ (d as u64).wrapping_mul(0x9e37_79b9), 500)?;
                e.insert(w.graph);
            }
            let x = &cache[&d];
            for &(a, b) in x.edges() {
                edges.push((base + a, base + b));
            }
            origin.extend(std::iter::repeat_n(h.id(v), d));
            slots.push((base..base + d).collect());
        } else {
            origin.push(h.id(v));
            slots.push(vec![base; d.max(1)]);
        }
        let ids: Vec<VertexId> = (base..origin.len()).map(|i| VertexId(i as u32)).collect();
        members.insert(h.id(v), ids);
    }
    let mut next_slot = vec![0usize; h.n()];
    let mut edge_image = Vec::with_capacity(h.m());
    for &(u, v) in h.edges() {
        let su = slots[u][next_slot[u].min(slots[u].len() - 1)];
        let sv = slots[v][next_slot[v].min(slots[v].len() - 1)];
        next_slot[u] += 1;
        next_slot[v] += 1;
        edge_image.push(edges.len());
        edges.push((su, sv));
    }
    let graph = Graph::from_edges(origin.len(), &edges)?;
    Ok(SplitGraph { graph, origin, members, edge_image })
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct RouteConfig {
    pub c_len: f64,
    pub c_cong: f64,
    /// Weight of one unit of load in the path cost 1 + λ·load.
    pub lambda: f64,
    pub attempts: usize,
    pub seed: u64,
}

impl Default for RouteConfig {
    fn default() -> Self {
        RouteConfig { c_len: 4.0, c_cong: 4.0, lambda: 1.0, attempts: 8, seed: 0 }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct EmbeddingPaths {
    /// (endpoint pair, host path) per matched pair, in host vertex ids.
    pub paths: Vec<((VertexId, VertexId), Vec<VertexId>)>,
    pub max_length: usize,
    pub edge_congestion: usize,
    pub vertex_congestion: usize,
    pub length_cap: f64,
    pub congestion_cap: f64,
}

impl EmbeddingPaths {
    /// (max length, edge congestion, vertex congestion) recomputed from the paths.
    pub fn measure(host: &Graph, paths: &[((VertexId, VertexId), Vec<VertexId>)]) -> Result<(usize, usize, usize)> {
        let mut edge_load: BTreeMap<(VertexId, VertexId), usize> = BTreeMap::new();
        let mut vertex_load: BTreeMap<VertexId, usize> = BTreeMap::new();
        let mut max_len = 0;
        for ((a, b), p) in paths {
            if p.first() != Some(a) || p.last() != Some(b) {
                return Err(Error::Invariant(format!("path does not join {a} and {b}")));
            }
            max_len = max_len.max(p.len() - 1);
            for w in p.windows(2) {
                let (i, j) = (host.index_of(w[0]).ok_or(Error::UnknownVertex(w[0]))?, host.index_of(w[1]).ok_or(Error::UnknownVertex(w[1]))?);
                if !host.neighbors(i).iter().any(|&(x, _)| x == j) {
                    return Err(Error::Invariant(format!("{} and {} are not adjacent", w[0], w[1])));
                }
                *edge_load.entry((w[0].min(w[1]), w[0].max(w[1]))).or_default() += 1;
            }
            for &v in p {
                *vertex_load.entry(v).or_default() += 1;
            }
        }
        Ok((max_len, edge_load.values().copied().max().unwrap_or(0), vertex_load.values().copied().max().unwrap_or(0)))
    }

    pub fn replays(&self, host: &Graph) -> bool {
        Self::measure(host, &self.paths).is_ok_and(|m| m == (self.max_length, self.edge_congestion, self.vertex_congestion))
    }
}

/// Routes each matched pair along a cheapest path under cost 1 + λ·load.
pub fn route_matchings_short_paths(host: &ExpanderWitness, matchings: &[Vec<(usize, usize)>], cfg: &RouteConfig) -> Result<EmbeddingPaths> {
    let g = &host.graph;
    if *host.expansion.numer() == 0 {
        return Err(Error::Precondition("host expansion must be positive".into()));
    }
    let alpha = crate::cuts::to_f64(&host.expansion);
    let lg = (g.n().max(2) as f64).log2();
    let length_cap = cfg.c_len * g.max_degree() as f64 * lg / alpha;
    let congestion_cap = cfg.c_cong * lg.powi(3) / alpha;
    let mut pairs: Vec<(usize, usize)> = matchings.iter().flatten().copied().collect();
    let mut rng = generators::rng(cfg.seed);
    let mut best: Option<(usize, usize)> = None;
    for attempt in 0..cfg.attempts.max(1) {
        if attempt > 0 {
            pairs.shuffle(&mut rng);
        }
        let mut load = vec![0usize; g.m()];
        let mut paths = Vec::with_capacity(pairs.len());
        let mut ok = true;
        for &(a, b) in &pairs {
            let w: Vec<f64> = load.iter().map(|&l| 1.0 + cfg.lambda * l as f64).collect();
            let Some((vs, es)) = dijkstra(g, &w, a, b) else {
                ok = false;
                break;
            };
            for e in es {
                load[e] += 1;
            }
            paths.push(((g.id(a), g.id(b)), vs.into_iter().map(|i| g.id(i)).collect::<Vec<_>>()));
        }
        if !ok {
            continue;
        }
        let (max_length, edge_congestion, vertex_congestion) = EmbeddingPaths::measure(g, &paths)?;
        if max_length as f64 <= length_cap && edge_congestion as f64 <= congestion_cap {
            return Ok(EmbeddingPaths { paths, max_length, edge_congestion, vertex_congestion, length_cap, congestion_cap });
        }
        if best.is_none_or(|(l, c)| (edge_congestion, max_length) < (c, l)) {
            best = Some((max_length, edge_congestion));
        }
    }
    Err(Error::RetryExhausted(format!(
        "routing exceeded caps (length {length_cap:.2}, congestion {congestion_cap:.2}); best (length, congestion) {best:?}"
    )))
}

/// Routes matchings between halves of X as vertex-capacitated flow paths in g.
struct FlowMatcher<'a> {
    g: &'a Graph,
    xs: Vec<usize>,
    cap: i64,
    used_pairs: BTreeMap<(usize, usize), usize>,
    round_paths: Vec<Vec<Vec<usize>>>,
}

impl MatchingOracle for FlowMatcher<'_> {
    fn matching(&mut self, left: &[usize], right: &[usize]) -> Result<Vec<(usize, usize)>> {
        let g = self.g;
        let n = g.n();
        let (s, t) = (2 * n, 2 * n + 1);
        let mut net = FlowNetwork::new(2 * n + 2);
        for i in 0..n {
            net.add_arc(2 * i, 2 * i + 1, self.cap);
        }
        for &(u, v) in g.edges() {
            net.add_arc(2 * u + 1, 2 * v, self.cap);
            net.add_arc(2 * v + 1, 2 * u, self.cap);
        }
        for &l in left {
            net.add_arc(s, 2 * self.xs[l], 1);
        }
        for &r in right {
            net.add_arc(2 * self.xs[r] + 1, t, 1);
        }
        let f = net.max_flow(s, t);
        if f < left.len() as i64 {
            return Err(Error::Infeasible(format!(
                "only {f} of {} paths fit under vertex congestion {}",
                left.len(),
                self.cap
            )));
        }
        let pos: BTreeMap<usize, usize> = self.xs.iter().enumerate().map(|(k, &i)| (i, k)).collect();
        let mut m = Vec::new();
        let mut paths = Vec::new();
        for p in net.unit_paths(s, t) {
            let mut vp: Vec<usize> = Vec::new();
            for &x in &p[1..p.len() - 1] {
                if vp.last() != Some(&(x / 2)) {
                    vp.push(x / 2);
                }
            }
            for w in vp.windows(2) {
                *self.used_pairs.entry((w[0].min(w[1]), w[0].max(w[1]))).or_default() += 1;
            }
            m.push((pos[&vp[0]], pos[vp.last().expect("nonempty")]));
            paths.push(vp);
        }
        self.round_paths.push(paths);
        Ok(m)
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct DegreeReduction {
    /// Spanning subgraph formed by all path edges (every vertex of g kept).
    pub subgraph: Graph,
    /// The union of matchings over X, relabelled 0..|X| in sorted order of X.
    pub expander: ExpanderWitness,
    pub terminals: Vec<VertexId>,
    pub vertex_cap: usize,
    pub max_degree: usize,
    pub degree_bound: usize,
    /// Per round, the largest number of paths through one vertex.
    pub round_vertex_congestion: Vec<usize>,
}

/// Embeds a cut-matching expander over the certificate's set X into g and
/// keeps only the edges of the embedding paths.
pub fn reduce_degree(g: &Graph, x: &WellLinkedCertificate, rounds: usize, seed: u64) -> Result<DegreeReduction> {
    let mut xs: Vec<usize> = g.indices(&x.terminal_set)?;
    if xs.len() % 2 == 1 {
        xs.pop();
    }
    let terminals: Vec<VertexId> = xs.iter().map(|&i| g.id(i)).collect();
    let alpha = x.alpha;
    if *alpha.numer() == 0 {
        return Err(Error::Precondition("certificate α must be positive".into()));
    }
    let cap = alpha.denom().div_ceil(*alpha.numer()) as usize;
    let degree_bound = 2 * rounds * cap;
    if rounds == 0 || xs.len() < 2 {
        return Ok(DegreeReduction {
            subgraph: g.edge_subgraph(&[]),
            expander: ExpanderWitness::new(Graph::empty(xs.len()), ExpanderKind::UnionOfMatchings),
            terminals,
            vertex_cap: cap,
            max_degree: 0,
            degree_bound,
            round_vertex_congestion: vec![],
        });
    }
    let mut matcher = FlowMatcher { g, xs: xs.clone(), cap: cap as i64, used_pairs: BTreeMap::new(), round_paths: vec![] };
    let game = cut_matching_game(xs.len(), rounds, &mut matcher, seed)?;
    let mut round_vertex_congestion = Vec::new();
    for paths in &matcher.round_paths {
        let mut load = vec![0usize; g.n()];
        for p in paths {
            for &v in p {
                load[v] += 1;
            }
        }
        let worst = load.into_iter().max().unwrap_or(0);
        if worst > cap {
            return Err(Error::Invariant(format!("a vertex carries {worst} paths in one round, cap {cap}")));
        }
        round_vertex_congestion.push(worst);
    }
    let mut keep = Vec::new();
    for &(u, v) in matcher.used_pairs.keys() {
        let e = g.neighbors(u).iter().find(|&&(w, _)| w == v).map(|&(_, e)| e).expect("path edge exists");
        keep.push(e);
    }
    keep.sort_unstable();
    let subgraph = g.edge_subgraph(&keep);
    let max_degree = subgraph.max_degree();
    if max_degree > degree_bound {
        return Err(Error::Invariant(format!("degree {max_degree} exceeds 2·{rounds}·{cap}")));
    }
    Ok(DegreeReduction {
        subgraph,
        expander: game.witness,
        terminals,
        vertex_cap: cap,
        max_degree,
        degree_bound,
        round_vertex_congestion,
    })
}

/// Vertex set of X as ids, for callers holding a reduction.
pub fn terminal_set(r: &DegreeReduction) -> VertexSet {
    r.terminals.iter().copied().collect()
}
