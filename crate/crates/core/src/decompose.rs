//! The two end-to-end pipelines that split a graph into h vertex-disjoint
//! subgraphs of treewidth at least r.
//!
//! Both maintain a clustering of V(G) and its contracted graph H, whose edge
//! count φ drops by at least one on every re-clustering step. The first
//! pipeline either splits H along balanced cuts (many super-nodes) or packs
//! expanders into high-conductance pieces of H. The second one samples random
//! partitions of H and extracts well-linked sets from each part.
//!
//! Every returned subgraph carries a treewidth certificate computed on the
//! input graph, so results never rest on the asymptotic constants.

use std::collections::{BTreeMap, BTreeSet};

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::conductance::{decompose_high_conductance, trim_after_removal, trim_after_removal_unchecked, ConductanceConfig, ThresholdRule};
use crate::cuts::{balanced_cut, rational_below, sparsest_cut, to_f64, Rational, SolverConfig};
use crate::error::{Error, Result};
use crate::expander::{build_small_expander, reduce_degree, route_matchings_short_paths, split_vertices, ExpanderWitness, RouteConfig};
use crate::generators;
use crate::graph::{contract_clustering, ClusterMode, Contraction, Graph, VertexId, VertexSet};
use crate::treewidth::{tw_lower_bound, tw_lower_bound_from_well_linked, TwProof};
use crate::well_linked::{
    certify_well_linked, check_alpha_good, decides_exactly, find_well_linked_set, well_linked_decomposition_with, VerificationMode,
    WellLinkedCertificate,
};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum ConstantsMode {
    /// The paper's formulas with unit hidden constants.
    Paper,
    /// Small constants that make the pipelines run on desk-scale graphs.
    Practical,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum CaseRule {
    /// Case 1 when |V(H)| ≥ k⁵.
    Paper,
    /// Case 1 when |V(H)| ≥ β·k².
    Quadratic { beta: u64 },
    Always1,
    Always2,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct PipelineConfig {
    pub constants: ConstantsMode,
    pub r_prime: Option<usize>,
    pub r_double_prime: Option<usize>,
    pub case_rule: CaseRule,
    pub alpha_wl: Option<Rational>,
    /// Well-linkedness required of S_j in the random-partition pipeline.
    pub gamma_wl: Option<Rational>,
    /// γ of the trimming step between expander embeddings.
    pub trim_gamma: Rational,
    /// Conductance threshold of the Case 2 decomposition; `None` uses the paper's.
    pub conductance_threshold: Option<Rational>,
    /// Expansion asked of the small expanders built during embedding.
    pub expander_target: Rational,
    pub route: RouteConfig,
    pub solver: SolverConfig,
    /// Run degree reduction when the maximum degree exceeds this.
    pub degree_cap: Option<usize>,
    pub feasibility_guard: u64,
    pub feasibility_slack: u64,
    pub partition_retries: usize,
    pub embed_attempts: usize,
    pub certify_samples: usize,
    /// Subgraphs up to this many vertices get exact treewidth.
    pub exact_tw_limit: usize,
    pub max_iterations: Option<usize>,
    pub seed: u64,
}

impl Default for PipelineConfig {
    fn default() -> Self {
        PipelineConfig {
            constants: ConstantsMode::Practical,
            r_prime: None,
            r_double_prime: None,
            case_rule: CaseRule::Quadratic { beta: 8 },
            alpha_wl: None,
            gamma_wl: None,
            trim_gamma: Rational::new(1, 10),
            conductance_threshold: None,
            expander_target: Rational::new(1, 4),
            route: RouteConfig::default(),
            solver: SolverConfig::default(),
            degree_cap: None,
            feasibility_guard: 1,
            feasibility_slack: 4,
            partition_retries: 64,
            embed_attempts: 6,
            certify_samples: 32,
            exact_tw_limit: 18,
            max_iterations: None,
            seed: 0,
        }
    }
}

impl PipelineConfig {
    pub fn with_seed(&self, seed: u64) -> Self {
        PipelineConfig {
            seed,
            solver: self.solver.with_seed(seed),
            route: RouteConfig { seed, ..self.route.clone() },
            ..self.clone()
        }
    }
}

/// Derived quantities of one run.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Params {
    pub h: usize,
    pub r: usize,
    /// |T|.
    pub k: usize,
    pub delta: usize,
    pub alpha_star: Rational,
    pub alpha_star_exact: bool,
    pub r_prime: usize,
    pub r_double_prime: usize,
    pub alpha_wl: Rational,
    pub gamma_wl: Rational,
}

fn log2f(x: usize) -> f64 {
    (x.max(2) as f64).log2()
}

fn derive_params(h: usize, r: usize, t: &WellLinkedCertificate, delta: usize, exact: bool, cfg: &PipelineConfig, theorem: u8) -> Params {
    let k = t.terminal_set.len();
    let lg = log2f(k);
    let arv = cfg.solver.arv_factor;
    let (r_prime, r_dd, alpha_wl, gamma_wl) = match cfg.constants {
        ConstantsMode::Paper => {
            let rp = if theorem == 1 {
                (delta * delta * r) as f64 * lg.powi(11)
            } else {
                (1u64 << 20) as f64 * (r * delta * delta * h) as f64 * arv
            };
            let rp = rp.ceil().min(usize::MAX as f64 / 4.0) as usize;
            let rdd = ((r * delta * delta) as f64 * lg.powi(8)).ceil().min(usize::MAX as f64 / 4.0) as usize;
            let gamma = (6 * delta * delta * r) as f64 / rp.max(1) as f64;
            (rp, rdd, rational_below(1.0 / (256.0 * arv * lg)), rational_below(gamma.min(1.0)))
        }
        ConstantsMode::Practical => {
            let rp = (delta + 1).max(2 * delta * r);
            let rdd = 2 * (r + 1);
            (rp, rdd, rational_below(1.0 / (16.0 * arv * lg)), Rational::new(1, delta.max(1) as u64))
        }
    };
    Params {
        h,
        r,
        k,
        delta,
        alpha_star: t.alpha,
        alpha_star_exact: exact,
        r_prime: cfg.r_prime.unwrap_or(r_prime),
        r_double_prime: cfg.r_double_prime.unwrap_or(r_dd),
        alpha_wl: cfg.alpha_wl.unwrap_or(alpha_wl),
        gamma_wl: cfg.gamma_wl.unwrap_or(gamma_wl),
    }
}

/// A partition of V(G) with its contracted graph size φ.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Clustering {
    pub clusters: Vec<VertexSet>,
    pub mode: ClusterMode,
    pub phi: usize,
}

impl Clustering {
    pub fn singletons(g: &Graph, mode: ClusterMode) -> Clustering {
        let clusters: Vec<VertexSet> = g.ids().iter().map(|&v| VertexSet::from([v])).collect();
        Clustering { clusters, mode, phi: g.m() }
    }

    pub fn from_clusters(g: &Graph, mut clusters: Vec<VertexSet>, mode: ClusterMode) -> Result<Clustering> {
        clusters.sort();
        let c = contract_clustering(g, &clusters, mode)?;
        Ok(Clustering { phi: c.phi(), clusters, mode })
    }

    pub fn contract(&self, g: &Graph) -> Result<Contraction> {
        contract_clustering(g, &self.clusters, self.mode)
    }

    /// Boundary size and terminal mass of every cluster; goodness where an exact check is affordable.
    /// Returns the number of clusters whose goodness could not be decided.
    pub fn check_acceptable(&self, g: &Graph, t: &VertexSet, r_prime: usize, alpha_wl: Rational, cfg: &SolverConfig) -> Result<usize> {
        let mut undecided = 0;
        for (i, c) in self.clusters.iter().enumerate() {
            let out = g.out_degree_mask(&g.mask(c)?);
            if out > r_prime {
                return Err(Error::Invariant(format!("cluster {i} has {out} boundary edges, above r′ = {r_prime}")));
            }
            if 2 * c.intersection(t).count() > t.len() {
                return Err(Error::Invariant(format!("cluster {i} holds more than half the terminals")));
            }
            match self.mode {
                ClusterMode::Connected => {
                    if !g.is_connected_set(c)? {
                        return Err(Error::DisconnectedCluster(i));
                    }
                }
                ClusterMode::WellLinked => {
                    if c.len() == 1 {
                        continue;
                    }
                    let sub = crate::graph::subdivide_boundary(g, c)?;
                    if decides_exactly(&sub.graph, &sub.terminals, cfg) {
                        if check_alpha_good(g, c, alpha_wl, cfg)?.is_some() {
                            return Err(Error::Invariant(format!("cluster {i} is not {alpha_wl}-good")));
                        }
                    } else {
                        undecided += 1;
                    }
                }
            }
        }
        Ok(undecided)
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SubgraphCertificate {
    pub proof: TwProof,
    /// The pipeline's well-linked set, certified inside the subgraph.
    pub well_linked: Option<WellLinkedCertificate>,
    /// α·|T|/(3Δ) − 1 for the well-linked set, when it was certified exhaustively.
    pub corollary_bound: Option<usize>,
    pub lower_bound: usize,
}

impl SubgraphCertificate {
    /// Re-derives the bound on g[s].
    pub fn replay(&self, g: &Graph, s: &VertexSet, cfg: &SolverConfig) -> Result<bool> {
        let sub = g.induced(s)?;
        if !self.proof.replay(&sub, cfg)? || self.proof.lower_bound() != self.lower_bound {
            return Ok(false);
        }
        if let Some(w) = &self.well_linked {
            if !w.terminal_set.is_subset(s) || !w.replay(&sub, cfg)? {
                return Ok(false);
            }
        }
        Ok(true)
    }
}

/// Strongest replayable lower bound for tw(g[s]), with the pipeline's well-linked set attached.
pub fn certify_subgraph(g: &Graph, s: &VertexSet, hint: Option<&VertexSet>, cfg: &PipelineConfig) -> Result<SubgraphCertificate> {
    let sub = g.induced(s)?;
    let mut proof = tw_lower_bound(&sub, cfg.exact_tw_limit);
    let mut well_linked = None;
    let mut corollary_bound = None;
    if let Some(t) = hint.filter(|t| t.len() >= 2 && sub.is_connected()) {
        let cert = certify_well_linked(&sub, t, &cfg.solver, cfg.certify_samples)?;
        if cert.mode == VerificationMode::Exhaustive {
            let b = tw_lower_bound_from_well_linked(t.len(), cert.alpha, sub.max_degree().max(1));
            corollary_bound = Some(b);
            if b > proof.lower_bound() {
                proof = TwProof::WellLinked { terminals: t.clone(), alpha: cert.alpha, max_degree: sub.max_degree() };
            }
        }
        well_linked = Some(cert);
    }
    let lower_bound = proof.lower_bound();
    Ok(SubgraphCertificate { proof, well_linked, corollary_bound, lower_bound })
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum CasePath {
    Case1,
    Case2,
    RandomPartition,
}

/// One accepted random partition and the two quantities it was checked on.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PartitionCheck {
    pub attempts: usize,
    pub m: usize,
    pub out: Vec<usize>,
    pub inner: Vec<usize>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct IterationLog {
    pub iteration: usize,
    pub case: CasePath,
    pub phi: usize,
    /// φ of the new clustering on a re-clustering step.
    pub phi_after: Option<usize>,
    pub notes: Vec<String>,
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct Trace {
    pub phi: Vec<usize>,
    pub iterations: Vec<IterationLog>,
    pub partitions: Vec<PartitionCheck>,
    pub preprocess: Vec<String>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct DecompositionResult {
    pub theorem: u8,
    pub params: Params,
    pub subgraphs: Vec<VertexSet>,
    pub certificates: Vec<SubgraphCertificate>,
    pub trace: Trace,
}

impl DecompositionResult {
    /// Disjointness, certificate replay and the bound ≥ r, per subgraph.
    pub fn verify(&self, g: &Graph, cfg: &SolverConfig) -> Result<bool> {
        if self.subgraphs.len() != self.certificates.len() || self.subgraphs.len() < self.params.h {
            return Ok(false);
        }
        let mut seen = VertexSet::new();
        for (s, c) in self.subgraphs.iter().zip(&self.certificates) {
            if s.iter().any(|v| !seen.insert(*v)) || c.lower_bound < self.params.r || !c.replay(g, s, cfg)? {
                return Ok(false);
            }
        }
        Ok(true)
    }

    /// φ strictly decreases along the trace.
    pub fn phi_decreasing(&self) -> bool {
        self.trace.phi.windows(2).all(|w| w[1] < w[0])
    }
}

/// The pipeline outcome together with everything logged on the way.
#[derive(Clone, Debug)]
pub struct Run {
    pub result: Result<DecompositionResult>,
    pub trace: Trace,
}

/// Working graph, terminal certificate and maximum degree.
pub fn preprocess(g: &Graph, cfg: &PipelineConfig, log: &mut Vec<String>) -> Result<(Graph, WellLinkedCertificate, usize)> {
    if g.n() == 0 || !g.is_connected() {
        return Err(Error::Precondition("the input graph must be connected and nonempty".into()));
    }
    let mut work = g.clone();
    let cap = match cfg.constants {
        ConstantsMode::Paper => cfg.degree_cap.or(Some((log2f(g.n()).ceil() as usize).pow(3))),
        ConstantsMode::Practical => cfg.degree_cap,
    };
    if let Some(cap) = cap.filter(|&c| g.max_degree() > c) {
        let x = find_well_linked_set(g, &cfg.solver)?;
        let rounds = crate::expander::default_rounds(x.terminal_set.len());
        let red = reduce_degree(g, &x, rounds, cfg.seed)?;
        log.push(format!("degree {} above cap {cap}; reduced to {}", g.max_degree(), red.max_degree));
        if red.subgraph.is_connected() {
            work = red.subgraph;
        } else {
            log.push("reduced graph is disconnected; keeping the input".into());
        }
    }
    let t = find_well_linked_set(&work, &cfg.solver)?;
    let delta = work.max_degree();
    log.push(format!("|T| = {}, α* = {} ({:?}), Δ = {delta}", t.terminal_set.len(), t.alpha, t.mode));
    Ok((work, t, delta))
}

fn feasibility(n: usize, p: &Params, cfg: &PipelineConfig, theorem: u8) -> Result<()> {
    if p.h == 0 || p.r == 0 {
        return Err(Error::Precondition("h and r must be positive".into()));
    }
    if p.h * (p.r + 1) > n {
        return Err(Error::Infeasible(format!("{} subgraphs of treewidth {} need more than {n} vertices", p.h, p.r)));
    }
    if p.r_prime < p.delta {
        return Err(Error::Infeasible(format!("r′ = {} is below the maximum degree {}; singleton clusters would not be acceptable", p.r_prime, p.delta)));
    }
    let k = p.k as u128;
    let (h, r) = (p.h as u128, p.r as u128);
    let (need, what) = match (cfg.constants, theorem) {
        (ConstantsMode::Paper, 1) => ((r as f64 * log2f(p.k).powi(30)) as u128, "k ≥ r·log³⁰k"),
        (ConstantsMode::Paper, _) => {
            let need = ((1u128 << 10) * h * h * p.r_prime as u128) as f64 * log2f(p.k) / to_f64(&p.alpha_star);
            (need.min(u128::MAX as f64 / 2.0) as u128, "k ≥ 2¹⁰h²r′log k/α*")
        }
        (ConstantsMode::Practical, 1) => (h * r * r * cfg.feasibility_guard as u128, "h·r²·guard ≤ k·slack"),
        (ConstantsMode::Practical, _) => (h * h * h * r * cfg.feasibility_guard as u128, "h³·r·guard ≤ k·slack"),
    };
    let have = match cfg.constants {
        ConstantsMode::Paper => k,
        ConstantsMode::Practical => k * cfg.feasibility_slack as u128,
    };
    if need > have {
        return Err(Error::Infeasible(format!("{what} fails: need {need}, have {have} (k = {})", p.k)));
    }
    Ok(())
}

enum Step {
    Done(Vec<(VertexSet, SubgraphCertificate)>),
    Recluster(Clustering),
    /// Practical mode only: the case made no progress and the other one should be tried.
    Stuck(String),
}

struct Ctx<'a> {
    g: &'a Graph,
    input: &'a Graph,
    t: &'a VertexSet,
    p: &'a Params,
    cfg: &'a PipelineConfig,
}

impl Ctx<'_> {
    fn heavy(&self, x: &VertexSet) -> bool {
        2 * x.intersection(self.t).count() > self.t.len()
    }

    /// Keeps h of the h+1 sets: drops the one holding more than half the terminals, or else the one holding most.
    fn drop_heavy(&self, mut xs: Vec<VertexSet>) -> Vec<VertexSet> {
        let pos = xs.iter().position(|x| self.heavy(x)).unwrap_or_else(|| {
            let mut best = 0;
            for (i, x) in xs.iter().enumerate() {
                if x.intersection(self.t).count() > xs[best].intersection(self.t).count() {
                    best = i;
                }
            }
            best
        });
        xs.remove(pos);
        xs
    }

    fn out(&self, s: &VertexSet) -> Result<usize> {
        Ok(self.g.out_degree_mask(&self.g.mask(s)?))
    }

    /// Clustering with every cluster meeting `x` replaced by `parts`.
    fn recluster(&self, cl: &Clustering, x: &VertexSet, parts: Vec<VertexSet>) -> Result<Clustering> {
        let mut clusters: Vec<VertexSet> = cl.clusters.iter().filter(|c| c.is_disjoint(x)).cloned().collect();
        clusters.extend(parts);
        Clustering::from_clusters(self.g, clusters, cl.mode)
    }

    fn wl_parts(&self, x: &VertexSet) -> Result<Vec<VertexSet>> {
        let enforce = self.cfg.constants == ConstantsMode::Paper;
        Ok(well_linked_decomposition_with(self.g, x, self.p.alpha_wl, &self.cfg.solver, enforce)?.parts)
    }

    fn certify(&self, s: &VertexSet, hint: Option<&VertexSet>) -> Result<SubgraphCertificate> {
        certify_subgraph(self.input, s, hint, self.cfg)
    }
}

/// Case 1: h rounds of balanced cuts on the piece with the most marked super-nodes.
fn case1(ctx: &Ctx, cl: &Clustering, c: &Contraction, notes: &mut Vec<String>) -> Result<Step> {
    let h_graph = &c.graph;
    let k5 = (ctx.p.k as u128).saturating_pow(5);
    let z = (h_graph.n() as u128).min(k5) as usize;
    let zset: VertexSet = h_graph.ids()[..z].iter().copied().collect();
    let mut pieces = vec![h_graph.vertex_set()];
    let gamma = ctx.cfg.solver.balance_gamma;
    for round in 0..ctx.p.h {
        let (idx, _) = pieces
            .iter()
            .enumerate()
            .max_by(|a, b| a.1.intersection(&zset).count().cmp(&b.1.intersection(&zset).count()).then(b.0.cmp(&a.0)))
            .expect("pieces nonempty");
        let s = pieces.remove(idx);
        let zs: VertexSet = s.intersection(&zset).copied().collect();
        let cut = balanced_cut(h_graph, &s, &zs, &ctx.cfg.solver)?;
        let (za, zb) = (cut.side_a.intersection(&zset).count() as u64, cut.side_b.intersection(&zset).count() as u64);
        let need = (*gamma.numer() * zs.len() as u64).div_ceil(*gamma.denom());
        if za.min(zb) < need {
            return Err(Error::Invariant(format!("round {round}: balanced cut leaves {} marked of {}", za.min(zb), zs.len())));
        }
        let k2 = (ctx.p.k * ctx.p.k) as f64 * ctx.cfg.solver.arv_factor;
        notes.push(format!("round {round}: crossing {} (k²·arv = {k2})", cut.crossing));
        pieces.push(cut.side_a);
        pieces.push(cut.side_b);
    }
    let floor = to_f64(&gamma) * z as f64 / (2 * ctx.p.h) as f64;
    for p in &pieces {
        let zc = p.intersection(&zset).count();
        if (zc as f64) < floor - 1e-9 {
            return Err(Error::Invariant(format!("a piece keeps {zc} marked super-nodes, below γz/2h = {floor:.2}")));
        }
    }
    let xs: Vec<VertexSet> = pieces.iter().map(|p| c.expand(p.iter().map(|v| v.0 as usize))).collect();
    let xs = ctx.drop_heavy(xs);
    let mut chosen = Vec::new();
    for (i, x) in xs.iter().enumerate() {
        let parts = ctx.wl_parts(x)?;
        let mut best: Option<(usize, VertexSet)> = None;
        for p in &parts {
            let o = ctx.out(p)?;
            if o > ctx.p.r_prime && best.as_ref().is_none_or(|(b, _)| o > *b) {
                best = Some((o, p.clone()));
            }
        }
        match best {
            Some((_, ci)) => chosen.push(ci),
            None => {
                let next = ctx.recluster(cl, x, parts)?;
                if next.phi < cl.phi {
                    notes.push(format!("piece {i}: every well-linked part has boundary ≤ r′"));
                    return Ok(Step::Recluster(next));
                }
                let msg = format!("piece {i}: re-clustering does not lower φ ({} → {})", cl.phi, next.phi);
                if ctx.cfg.constants == ConstantsMode::Paper {
                    return Err(Error::Invariant(msg));
                }
                return Ok(Step::Stuck(msg));
            }
        }
    }
    let mut out = Vec::new();
    for ci in chosen {
        let mask = ctx.g.mask(&ci)?;
        let gamma_i: VertexSet = ctx
            .g
            .out_edges_mask(&mask)
            .into_iter()
            .map(|e| {
                let (u, v) = ctx.g.edge(e);
                ctx.g.id(if mask[u] { u } else { v })
            })
            .collect();
        let o = ctx.out(&ci)?;
        if gamma_i.len() * ctx.p.delta.max(1) < o {
            return Err(Error::Invariant(format!("|Γ| = {} below |out(C)|/Δ", gamma_i.len())));
        }
        let cert = ctx.certify(&ci, Some(&gamma_i))?;
        if cert.lower_bound < ctx.p.r {
            let msg = format!("a Case 1 cluster certifies only tw ≥ {}", cert.lower_bound);
            if ctx.cfg.constants == ConstantsMode::Paper {
                return Err(Error::Pipeline(msg));
            }
            return Ok(Step::Stuck(msg));
        }
        out.push((ci, cert));
    }
    Ok(Step::Done(out))
}

/// Splits `edges` of a max-degree-≤5 graph into matchings greedily.
fn edge_matchings(g: &Graph) -> Vec<Vec<(usize, usize)>> {
    let mut ms: Vec<Vec<(usize, usize)>> = Vec::new();
    let mut used: Vec<BTreeSet<usize>> = Vec::new();
    for &(u, v) in g.edges() {
        let slot = (0..ms.len()).find(|&i| !used[i].contains(&u) && !used[i].contains(&v));
        let i = slot.unwrap_or_else(|| {
            ms.push(Vec::new());
            used.push(BTreeSet::new());
            ms.len() - 1
        });
        ms[i].push((u, v));
        used[i].insert(u);
        used[i].insert(v);
    }
    ms
}

/// Result of embedding one expander into a piece of H.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Embedding {
    /// Super-nodes touched by the embedding paths.
    pub nodes: VertexSet,
    /// Their members in G.
    pub vertices: VertexSet,
    /// Boundary vertices standing for the expander's vertices.
    pub gamma: VertexSet,
    pub max_length: usize,
    pub edge_congestion: usize,
    pub certificate: SubgraphCertificate,
}

/// A vertex far from the lowest-index one, or a seeded random vertex on later attempts.
fn start_vertex(g: &Graph, attempt: usize, seed: u64) -> usize {
    if attempt == 0 {
        let d = g.bfs(0);
        let far = (0..g.n()).filter(|&i| d[i] != usize::MAX).max_by_key(|&i| (d[i], std::cmp::Reverse(i))).unwrap_or(0);
        return far;
    }
    generators::rng(seed ^ attempt as u64).random_range(0..g.n())
}

/// Embeds a small expander into H[part] by short paths and certifies the
/// subgraph of G behind the touched super-nodes.
pub fn embed_expander_witness(g: &Graph, input: &Graph, c: &Contraction, part: &VertexSet, p: &Params, cfg: &PipelineConfig) -> Result<Embedding> {
    // the largest component; trimming can leave a disconnected remainder
    let whole = c.graph.induced(part)?;
    let comps = whole.components_in(&vec![true; whole.n()]);
    let biggest = comps.into_iter().max_by_key(|cc| cc.len()).unwrap_or_default();
    let hp = whole.induced(&whole.set_of(biggest))?;
    if hp.m() < p.r_prime && cfg.constants == ConstantsMode::Paper {
        return Err(Error::Precondition(format!("piece has {} edges, below r′ = {}", hp.m(), p.r_prime)));
    }
    let split = split_vertices(&hp, cfg.expander_target, cfg.seed)?;
    let n2 = split.graph.n();
    if p.r_double_prime > n2 || p.r_double_prime < 2 {
        return Err(Error::Precondition(format!("r″ = {} does not fit the {n2}-vertex split graph", p.r_double_prime)));
    }
    let host = ExpanderWitness::new(split.graph.clone(), crate::expander::ExpanderKind::EdgeExpander);
    let x = build_small_expander(p.r_double_prime, cfg.expander_target, cfg.seed, 200)?;
    let matchings = edge_matchings(&x.graph);
    // the H edge standing behind each split-graph edge
    let mut image_of: BTreeMap<usize, usize> = BTreeMap::new();
    for (k, &e2) in split.edge_image.iter().enumerate() {
        image_of.insert(e2, k);
    }
    let mut last_err = None;
    for attempt in 0..cfg.embed_attempts.max(1) {
        let start = start_vertex(&hp, attempt, cfg.seed);
        let first = split.members[&hp.id(start)][0].0 as usize;
        let dist = split.graph.bfs(first);
        let mut order: Vec<usize> = (0..n2).filter(|&i| dist[i] != usize::MAX).collect();
        order.sort_by_key(|&i| (dist[i], i));
        let mut picked = Vec::new();
        let mut origins = BTreeSet::new();
        for &i in &order {
            if picked.len() < p.r_double_prime && origins.insert(split.origin[i]) {
                picked.push(i);
            }
        }
        for &i in &order {
            if picked.len() < p.r_double_prime && !picked.contains(&i) {
                picked.push(i);
            }
        }
        let mapped: Vec<Vec<(usize, usize)>> =
            matchings.iter().map(|m| m.iter().map(|&(a, b)| (picked[a], picked[b])).collect()).collect();
        let route = RouteConfig { seed: cfg.route.seed ^ attempt as u64, ..cfg.route.clone() };
        let paths = match route_matchings_short_paths(&host, &mapped, &route) {
            Ok(ps) => ps,
            Err(e) => {
                last_err = Some(e);
                continue;
            }
        };
        let mut nodes = VertexSet::new();
        for (_, path) in &paths.paths {
            for v in path {
                nodes.insert(split.origin[v.0 as usize]);
            }
        }
        if nodes.len() > p.r_prime {
            last_err = Some(Error::Pipeline(format!("embedding touches {} super-nodes, above r′ = {}", nodes.len(), p.r_prime)));
            continue;
        }
        let vertices = c.expand(nodes.iter().map(|v| v.0 as usize));
        let mut gamma = VertexSet::new();
        for &xv in &picked {
            let home = split.origin[xv].0 as usize;
            let members = &c.members[home];
            if members.len() == 1 {
                gamma.extend(members.iter().copied());
                continue;
            }
            // endpoint in the cluster of the G edge behind an H edge at x
            let hit = split.graph.neighbors(xv).iter().find_map(|&(_, e2)| image_of.get(&e2).copied());
            let v = hit.and_then(|k| {
                let (a, b) = hp.edge_ids(k);
                let (ca, cb) = (a.0 as usize, b.0 as usize);
                let other = if ca == home { cb } else { ca };
                (0..c.graph.m()).find_map(|he| {
                    let (u, w) = c.graph.edge(he);
                    if (u == home && w == other) || (w == home && u == other) {
                        let (gu, gw) = g.edge(c.edge_origin[he]);
                        Some(if c.cluster_of[gu] == home { g.id(gu) } else { g.id(gw) })
                    } else {
                        None
                    }
                })
            });
            gamma.insert(v.unwrap_or(*members.iter().next().expect("nonempty cluster")));
        }
        let certificate = certify_subgraph(input, &vertices, Some(&gamma), cfg)?;
        if certificate.lower_bound < p.r {
            last_err = Some(Error::Pipeline(format!("embedded subgraph certifies only tw ≥ {}", certificate.lower_bound)));
            continue;
        }
        return Ok(Embedding {
            nodes,
            vertices,
            gamma,
            max_length: paths.max_length,
            edge_congestion: paths.edge_congestion,
            certificate,
        });
    }
    Err(last_err.unwrap_or_else(|| Error::RetryExhausted("no embedding attempt".into())))
}

/// Case 2: high-conductance pieces of H, then repeated expander embedding and trimming.
fn case2(ctx: &Ctx, cl: &Clustering, c: &Contraction, notes: &mut Vec<String>) -> Result<Step> {
    let h_graph = &c.graph;
    let m = h_graph.m();
    let ccfg = ConductanceConfig {
        solver: ctx.cfg.solver.clone(),
        threshold: ctx.cfg.conductance_threshold.map_or(ThresholdRule::Paper, ThresholdRule::Explicit),
        ..ConductanceConfig::default()
    };
    let cp = decompose_high_conductance(h_graph, &ccfg)?;
    notes.push(format!("conductance pieces {}, boundary {} of m = {m}", cp.parts.len(), cp.boundary_total));
    let mut kept: Vec<(VertexSet, usize)> = Vec::new();
    for x in &cp.parts {
        let mask = h_graph.mask(x)?;
        let (inner, out) = (h_graph.inner_edges_mask(&mask), h_graph.out_degree_mask(&mask));
        if 2 * out < inner {
            kept.push((x.clone(), inner));
        }
    }
    let paper = ctx.cfg.constants == ConstantsMode::Paper;
    for (x, inner) in kept.iter().filter(|(_, inner)| *inner <= 2 * ctx.p.r_prime) {
        let xg = c.expand(x.iter().map(|v| v.0 as usize));
        // at desk scale a small piece can hold most terminals; it then goes on to packing
        if ctx.heavy(&xg) {
            if paper {
                return Err(Error::Invariant("a small piece holds more than half the terminals".into()));
            }
            notes.push(format!("small piece with {inner} edges holds most terminals; packing it instead"));
            continue;
        }
        let parts = ctx.wl_parts(&xg)?;
        let next = ctx.recluster(cl, &xg, parts)?;
        if next.phi < cl.phi {
            notes.push(format!("piece with {inner} edges is at most 2r′ = {}", 2 * ctx.p.r_prime));
            return Ok(Step::Recluster(next));
        }
        let msg = format!("re-clustering does not lower φ ({} → {})", cl.phi, next.phi);
        if paper {
            return Err(Error::Invariant(msg));
        }
        notes.push(msg);
    }
    if kept.is_empty() {
        return Err(Error::Pipeline("no piece has more internal edges than twice its boundary".into()));
    }
    kept.sort_by(|a, b| b.1.cmp(&a.1).then(a.0.cmp(&b.0)));
    let alpha_k = to_f64(&ctx.p.alpha_star) * ctx.p.k.max(1) as f64;
    let gamma_budget = to_f64(&ctx.cfg.trim_gamma);
    let mut out = Vec::new();
    for (x, mi) in &kept {
        if out.len() >= ctx.p.h {
            break;
        }
        let hi_paper = (6.0 * *mi as f64 * ctx.p.h as f64 / alpha_k).ceil() as usize;
        let hi = hi_paper.max(1).min(ctx.p.h - out.len());
        notes.push(format!("piece with m_i = {mi}: h_i = {hi_paper}, packing {hi}"));
        let big = h_graph.induced(x)?;
        let mut removed = VertexSet::new();
        let mut current = x.clone();
        let mut degree_sum = 0usize;
        for j in 0..hi {
            if j > 0 {
                let trim = match ctx.cfg.constants {
                    ConstantsMode::Paper => trim_after_removal(&big, &removed, ctx.cfg.trim_gamma, &ctx.cfg.solver)?,
                    ConstantsMode::Practical => trim_after_removal_unchecked(&big, &removed, ctx.cfg.trim_gamma, &ctx.cfg.solver)?,
                };
                notes.push(format!("trim {j}: kept {} edges of {}, peeled {}", trim.edges_kept, trim.m, trim.peeled.len()));
                current = trim.kept;
            }
            let emb = embed_expander_witness(ctx.g, ctx.input, c, &current, ctx.p, ctx.cfg)?;
            for v in &emb.nodes {
                degree_sum += h_graph.degree(h_graph.index_of(*v).expect("super-node"));
            }
            removed.extend(emb.nodes.iter().copied());
            notes.push(format!(
                "embedding {j}: {} super-nodes, path length ≤ {}, congestion {}",
                emb.nodes.len(),
                emb.max_length,
                emb.edge_congestion
            ));
            out.push((emb.vertices, emb.certificate));
        }
        let budget = gamma_budget * *mi as f64 / 8.0;
        if degree_sum as f64 > budget {
            let msg = format!("degree sum {degree_sum} of embedded super-nodes exceeds γm_i/8 = {budget:.3}");
            if ctx.cfg.constants == ConstantsMode::Paper {
                return Err(Error::Invariant(msg));
            }
            notes.push(msg);
        }
    }
    if out.len() < ctx.p.h {
        return Err(Error::Pipeline(format!("packed {} of {} subgraphs", out.len(), ctx.p.h)));
    }
    Ok(Step::Done(out))
}

/// One step of the first pipeline: a result, or a clustering with smaller φ.
pub fn iteration_thm1(
    g: &Graph,
    input: &Graph,
    t: &VertexSet,
    clustering: &Clustering,
    p: &Params,
    cfg: &PipelineConfig,
) -> Result<(Option<Clustering>, Vec<(VertexSet, SubgraphCertificate)>, IterationLog)> {
    let ctx = Ctx { g, input, t, p, cfg };
    let c = clustering.contract(g)?;
    let n = c.graph.n() as u128;
    let k = p.k as u128;
    let case = match cfg.case_rule {
        CaseRule::Paper => n >= k.saturating_pow(5),
        CaseRule::Quadratic { beta } => n >= beta as u128 * k * k,
        CaseRule::Always1 => true,
        CaseRule::Always2 => false,
    };
    let case = if case { CasePath::Case1 } else { CasePath::Case2 };
    let mut notes = Vec::new();
    let mut step = match case {
        CasePath::Case1 => case1(&ctx, clustering, &c, &mut notes)?,
        _ => case2(&ctx, clustering, &c, &mut notes)?,
    };
    let mut taken = case;
    if let Step::Stuck(msg) = &step {
        notes.push(format!("{msg}; trying the expander packing instead"));
        taken = CasePath::Case2;
        step = case2(&ctx, clustering, &c, &mut notes)?;
    }
    let mut log = IterationLog { iteration: 0, case: taken, phi: clustering.phi, phi_after: None, notes };
    match step {
        Step::Done(found) => Ok((None, found, log)),
        Step::Recluster(next) => {
            log.phi_after = Some(next.phi);
            Ok((Some(next), vec![], log))
        }
        Step::Stuck(msg) => Err(Error::Pipeline(msg)),
    }
}

/// Claim-4.3 search inside X′_j: a γ-well-linked boundary set, or the final split clusters.
fn recover_set(ctx: &Ctx, xj: &VertexSet, notes: &mut Vec<String>) -> Result<std::result::Result<VertexSet, Vec<VertexSet>>> {
    let g = ctx.g;
    let rp = ctx.p.r_prime;
    let mut w = vec![xj.clone()];
    loop {
        let mut pick: Option<(usize, usize)> = None;
        for (i, cset) in w.iter().enumerate() {
            let o = ctx.out(cset)?;
            if o >= rp && pick.is_none_or(|(_, b)| o > b) {
                pick = Some((i, o));
            }
        }
        let Some((i, _)) = pick else { return Ok(Err(w)) };
        let cset = w[i].clone();
        let mask = g.mask(&cset)?;
        let out = g.out_edges_mask(&mask);
        let gamma_edges = &out[..rp];
        let base = g.max_id().map_or(0, |v| v.0 + 1);
        let mut ids: Vec<VertexId> = cset.iter().copied().collect();
        let mut edges = Vec::new();
        for &(u, v) in g.edges() {
            if mask[u] && mask[v] {
                edges.push((g.id(u), g.id(v)));
            }
        }
        let mut terms = VertexSet::new();
        let mut inside = VertexSet::new();
        for (k, &e) in gamma_edges.iter().enumerate() {
            let t = VertexId(base + k as u32);
            let (u, v) = g.edge(e);
            let a = if mask[u] { u } else { v };
            ids.push(t);
            edges.push((g.id(a), t));
            terms.insert(t);
            inside.insert(g.id(a));
        }
        let inst = Graph::new(ids, edges)?;
        let cut = sparsest_cut(&inst, &terms, &ctx.cfg.solver)?;
        let phi = cut.sparsity.expect("two sides with terminals");
        let bar = to_f64(&ctx.p.gamma_wl) * ctx.cfg.solver.arv_factor;
        if to_f64(&phi) >= bar {
            notes.push(format!("found {} boundary vertices; sparsest cut {phi} ≥ {bar:.4}", inside.len()));
            return Ok(Ok(inside));
        }
        let a: VertexSet = cut.side_a.intersection(&cset).copied().collect();
        let b: VertexSet = cut.side_b.intersection(&cset).copied().collect();
        if a.is_empty() || b.is_empty() {
            return Err(Error::Invariant("sparse cut leaves one side of the cluster empty".into()));
        }
        w.remove(i);
        w.push(a);
        w.push(b);
    }
}

/// One step of the second pipeline.
pub fn iteration_thm2(
    g: &Graph,
    input: &Graph,
    t: &VertexSet,
    clustering: &Clustering,
    p: &Params,
    cfg: &PipelineConfig,
    iteration: usize,
    partitions: &mut Vec<PartitionCheck>,
) -> Result<(Option<Clustering>, Vec<(VertexSet, SubgraphCertificate)>, IterationLog)> {
    let ctx = Ctx { g, input, t, p, cfg };
    let c = clustering.contract(g)?;
    let hg = &c.graph;
    let m = hg.m();
    let h = p.h;
    let mut rng = generators::rng(cfg.seed ^ (iteration as u64).wrapping_mul(0x51_7cc1_b727_220a));
    let mut notes = Vec::new();
    let mut attempts = 0;
    let mut last = String::new();
    while attempts < cfg.partition_retries.max(1) {
        attempts += 1;
        let label: Vec<usize> = (0..hg.n()).map(|_| rng.random_range(0..=h)).collect();
        let mut out = vec![0usize; h + 1];
        let mut inner = vec![0usize; h + 1];
        for &(u, v) in hg.edges() {
            if label[u] == label[v] {
                inner[label[u]] += 1;
            } else {
                out[label[u]] += 1;
                out[label[v]] += 1;
            }
        }
        // |out(X_j)| < 16m/h and |E(X_j)| ≥ m/(8h²)
        let ok = (0..=h).all(|j| out[j] * h < 16 * m && inner[j] * 8 * h * h >= m);
        if !ok {
            notes.push(format!("partition {attempts} rejected: out {out:?}, inner {inner:?}"));
            continue;
        }
        let xs: Vec<VertexSet> = (0..=h).map(|j| c.expand((0..hg.n()).filter(|&i| label[i] == j))).collect();
        let xs = ctx.drop_heavy(xs);
        let mut found = Vec::new();
        let mut failed = false;
        for xj in &xs {
            match recover_set(&ctx, xj, &mut notes)? {
                Ok(sj) => {
                    let cert = ctx.certify(xj, Some(&sj))?;
                    if cert.lower_bound < p.r {
                        last = format!("part certifies only tw ≥ {}", cert.lower_bound);
                        failed = true;
                        break;
                    }
                    found.push((xj.clone(), cert));
                }
                Err(w) => {
                    let mut comps = Vec::new();
                    for cset in w {
                        let mask = g.mask(&cset)?;
                        comps.extend(g.components_in(&mask).into_iter().map(|cc| g.set_of(cc)));
                    }
                    let next = ctx.recluster(clustering, xj, comps)?;
                    if next.phi < clustering.phi {
                        partitions.push(PartitionCheck { attempts, m, out, inner });
                        notes.push("every split cluster has boundary below r′".into());
                        let log = IterationLog { iteration, case: CasePath::RandomPartition, phi: clustering.phi, phi_after: Some(next.phi), notes };
                        return Ok((Some(next), vec![], log));
                    }
                    last = format!("re-clustering does not lower φ ({} → {})", clustering.phi, next.phi);
                    failed = true;
                    break;
                }
            }
        }
        if failed {
            notes.push(format!("partition {attempts} abandoned: {last}"));
            continue;
        }
        partitions.push(PartitionCheck { attempts, m, out, inner });
        let log = IterationLog { iteration, case: CasePath::RandomPartition, phi: clustering.phi, phi_after: None, notes };
        return Ok((None, found, log));
    }
    Err(Error::RetryExhausted(format!("{attempts} random partitions without progress; last: {last}")))
}

fn run(g: &Graph, h: usize, r: usize, cfg: &PipelineConfig, theorem: u8) -> Run {
    let mut trace = Trace::default();
    let result = run_inner(g, h, r, cfg, theorem, &mut trace);
    let result = result.map(|mut res| {
        res.trace = trace.clone();
        res
    });
    Run { result, trace }
}

fn run_inner(g: &Graph, h: usize, r: usize, cfg: &PipelineConfig, theorem: u8, trace: &mut Trace) -> Result<DecompositionResult> {
    if h == 0 || r == 0 {
        return Err(Error::Precondition("h and r must be positive".into()));
    }
    let (work, t, delta) = preprocess(g, cfg, &mut trace.preprocess)?;
    let exact = t.mode == VerificationMode::Exhaustive;
    let p = derive_params(h, r, &t, delta, exact, cfg, theorem);
    if h == 1 {
        let all = g.vertex_set();
        let cert = certify_subgraph(g, &all, Some(&t.terminal_set).filter(|_| work.n() == g.n()), cfg)?;
        if cert.lower_bound >= r {
            trace.preprocess.push(format!("h = 1: the whole graph certifies tw ≥ {}", cert.lower_bound));
            return Ok(DecompositionResult { theorem, params: p, subgraphs: vec![all], certificates: vec![cert], trace: Trace::default() });
        }
    }
    feasibility(g.n(), &p, cfg, theorem)?;
    let mode = if theorem == 1 { ClusterMode::WellLinked } else { ClusterMode::Connected };
    let mut cl = Clustering::singletons(&work, mode);
    let budget = cfg.max_iterations.unwrap_or(work.m().max(1));
    let alpha_k3 = to_f64(&p.alpha_star) * p.k as f64 / 3.0;
    for it in 0..budget {
        trace.phi.push(cl.phi);
        if (cl.phi as f64) < alpha_k3 {
            let msg = format!("φ = {} is below α*k/3 = {alpha_k3:.3}", cl.phi);
            if exact {
                return Err(Error::Invariant(msg));
            }
            trace.preprocess.push(msg);
        }
        let (next, found, mut log) = if theorem == 1 {
            iteration_thm1(&work, g, &t.terminal_set, &cl, &p, cfg)?
        } else {
            iteration_thm2(&work, g, &t.terminal_set, &cl, &p, cfg, it, &mut trace.partitions)?
        };
        log.iteration = it;
        trace.iterations.push(log);
        match next {
            None => {
                let mut found = found;
                found.truncate(h);
                let (subgraphs, certificates) = found.into_iter().unzip();
                let res = DecompositionResult { theorem, params: p, subgraphs, certificates, trace: Trace::default() };
                let mut seen = VertexSet::new();
                for s in &res.subgraphs {
                    if s.iter().any(|v| !seen.insert(*v)) {
                        return Err(Error::Invariant("returned subgraphs overlap".into()));
                    }
                }
                return Ok(res);
            }
            Some(next) => {
                if next.phi + 1 > cl.phi {
                    return Err(Error::Invariant(format!("φ went from {} to {}", cl.phi, next.phi)));
                }
                let undecided = next.check_acceptable(&work, &t.terminal_set, p.r_prime, p.alpha_wl, &cfg.solver)?;
                if undecided > 0 {
                    if let Some(l) = trace.iterations.last_mut() {
                        l.notes.push(format!("{undecided} clusters too large for an exact goodness check"));
                    }
                }
                cl = next;
            }
        }
    }
    Err(Error::Pipeline(format!("no result after {budget} iterations; φ trace {:?}", trace.phi)))
}

/// First pipeline, with its trace kept on failure.
pub fn run_thm1(g: &Graph, h: usize, r: usize, cfg: &PipelineConfig) -> Run {
    run(g, h, r, cfg, 1)
}

/// Second pipeline, with its trace kept on failure.
pub fn run_thm2(g: &Graph, h: usize, r: usize, cfg: &PipelineConfig) -> Run {
    run(g, h, r, cfg, 2)
}

pub fn decompose_thm1(g: &Graph, h: usize, r: usize, cfg: &PipelineConfig) -> Result<DecompositionResult> {
    run_thm1(g, h, r, cfg).result
}

pub fn decompose_thm2(g: &Graph, h: usize, r: usize, cfg: &PipelineConfig) -> Result<DecompositionResult> {
    run_thm2(g, h, r, cfg).result
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::expander::{cut_matching_game, RandomMatching};
    use crate::treewidth::exact_treewidth_limited;

    fn exact_tw(g: &Graph, s: &VertexSet) -> usize {
        exact_treewidth_limited(&g.induced(s).unwrap(), 30).unwrap().0
    }

    fn assert_sound(g: &Graph, res: &DecompositionResult, h: usize, r: usize) {
        assert_eq!(res.subgraphs.len(), h);
        assert!(res.verify(g, &SolverConfig::default()).unwrap());
        assert!(res.phi_decreasing());
        for s in &res.subgraphs {
            if s.len() <= 20 {
                assert!(exact_tw(g, s) >= r);
            }
        }
    }

    #[test]
    fn preprocess_clique() {
        let g = generators::complete(12);
        let (_, t, delta) = preprocess(&g, &PipelineConfig::default(), &mut vec![]).unwrap();
        assert!(t.terminal_set.len() >= 6);
        assert_eq!(t.alpha, Rational::from_integer(1));
        assert_eq!(delta, 11);
    }

    #[test]
    fn preprocess_grid() {
        let g = generators::grid(8, 8);
        let (work, t, delta) = preprocess(&g, &PipelineConfig::default(), &mut vec![]).unwrap();
        assert_eq!(work, g);
        assert!(t.terminal_set.len() >= 8);
        assert_eq!(delta, 4);
    }

    #[test]
    fn disconnected_input_rejected() {
        let g = generators::disjoint_union(&generators::complete(4), &generators::complete(4));
        assert!(matches!(decompose_thm1(&g, 1, 1, &PipelineConfig::default()), Err(Error::Precondition(_))));
    }

    #[test]
    fn grid_first_pipeline() {
        let g = generators::grid(12, 12);
        for h in [2, 3] {
            let res = decompose_thm1(&g, h, 2, &PipelineConfig::default()).unwrap();
            assert_sound(&g, &res, h, 2);
            assert!(res.certificates.iter().all(|c| matches!(c.proof, TwProof::Exact { .. })));
        }
    }

    #[test]
    fn single_subgraph_is_whole_graph() {
        let g = generators::complete(6);
        let res = decompose_thm1(&g, 1, 5, &PipelineConfig::default()).unwrap();
        assert_eq!(res.subgraphs, vec![g.vertex_set()]);
        assert_eq!(res.certificates[0].lower_bound, 5);
    }

    #[test]
    fn infeasible_parameters() {
        let g = generators::grid(12, 12);
        assert!(matches!(decompose_thm1(&g, 40, 10, &PipelineConfig::default()), Err(Error::Infeasible(_))));
        assert!(matches!(decompose_thm1(&g, 5, 4, &PipelineConfig::default()), Err(Error::Infeasible(_))));
        let low = PipelineConfig { r_prime: Some(3), ..Default::default() };
        assert!(matches!(decompose_thm1(&g, 2, 2, &low), Err(Error::Infeasible(_))));
    }

    #[test]
    fn balanced_split_on_two_communities() {
        let mut g = generators::disjoint_union(&generators::grid(6, 6), &generators::grid(6, 6));
        g.add_edge(35, 36).unwrap();
        let cfg = PipelineConfig { case_rule: CaseRule::Always1, r_prime: Some(6), ..Default::default() };
        let run = run_thm1(&g, 2, 2, &cfg);
        let res = run.result.unwrap();
        assert_sound(&g, &res, 2, 2);
        assert!(run.trace.iterations.iter().all(|it| it.case == CasePath::Case1));
        assert!(run.trace.iterations[0].phi_after.is_some());
    }

    #[test]
    fn expander_host_packs_two() {
        let g = cut_matching_game(64, 12, &mut RandomMatching::new(0), 0).unwrap().witness.graph;
        let run = run_thm1(&g, 2, 2, &PipelineConfig::default());
        assert_sound(&g, &run.result.unwrap(), 2, 2);
        assert_eq!(run.trace.iterations[0].case, CasePath::Case2);
    }

    #[test]
    fn dense_random_second_pipeline() {
        let g = generators::connected_gnp(60, 0.3, &mut generators::rng(7));
        let run = run_thm2(&g, 2, 2, &PipelineConfig::default());
        let res = run.result.unwrap();
        assert_sound(&g, &res, 2, 2);
        for pc in &run.trace.partitions {
            for j in 0..pc.out.len() {
                assert!(pc.out[j] * 2 < 16 * pc.m);
                assert!(pc.inner[j] * 8 * 4 >= pc.m);
            }
        }
    }

    #[test]
    fn bad_partition_is_resampled() {
        let g = generators::grid(12, 12);
        let run = run_thm2(&g, 3, 2, &PipelineConfig::default());
        assert_sound(&g, &run.result.unwrap(), 3, 2);
        let rejected = run.trace.iterations.iter().any(|it| it.notes.iter().any(|n| n.contains("rejected")));
        assert!(rejected);
        assert!(run.trace.partitions.iter().any(|p| p.attempts > 1));
    }

    #[test]
    fn phi_drops_on_every_recluster() {
        let g = generators::grid(8, 8);
        let mut reclusters = 0;
        for seed in 0..20 {
            let run = run_thm2(&g, 2, 2, &PipelineConfig::default().with_seed(seed));
            for it in &run.trace.iterations {
                if let Some(after) = it.phi_after {
                    assert!(after < it.phi);
                    reclusters += 1;
                }
            }
            assert!(run.trace.iterations.len() <= g.m());
        }
        assert!(reclusters > 0);
    }

    #[test]
    fn deterministic_under_seed() {
        let g = generators::connected_gnp(40, 0.3, &mut generators::rng(3));
        let cfg = PipelineConfig::default().with_seed(5);
        let a = decompose_thm2(&g, 2, 2, &cfg).unwrap();
        let b = decompose_thm2(&g, 2, 2, &cfg).unwrap();
        assert_eq!(a, b);
    }

    fn params_for(g: &Graph, r: usize, r_prime: usize, rdd: usize) -> Params {
        let t = find_well_linked_set(g, &SolverConfig::default()).unwrap();
        let cfg = PipelineConfig { r_prime: Some(r_prime), r_double_prime: Some(rdd), ..Default::default() };
        derive_params(1, r, &t, g.max_degree(), true, &cfg, 1)
    }

    #[test]
    fn embedding_in_clique() {
        let g = generators::complete(8);
        let c = Clustering::singletons(&g, ClusterMode::WellLinked).contract(&g).unwrap();
        let p = params_for(&g, 3, 8, 6);
        let e = embed_expander_witness(&g, &g, &c, &g.vertex_set(), &p, &PipelineConfig::default()).unwrap();
        assert!(e.nodes.len() <= 8);
        assert!(exact_tw(&g, &e.vertices) >= 3);
        assert_eq!(e.gamma.len(), 6);
    }

    #[test]
    fn embedding_needs_room() {
        let g = generators::complete(5);
        let c = Clustering::singletons(&g, ClusterMode::WellLinked).contract(&g).unwrap();
        let p = params_for(&g, 2, 5, 40);
        let err = embed_expander_witness(&g, &g, &c, &g.vertex_set(), &p, &PipelineConfig::default());
        assert!(matches!(err, Err(Error::Precondition(_))));
    }

    #[test]
    fn singletons_are_acceptable() {
        let g = generators::grid(5, 5);
        let t = find_well_linked_set(&g, &SolverConfig::default()).unwrap();
        let cl = Clustering::singletons(&g, ClusterMode::WellLinked);
        assert_eq!(cl.phi, g.m());
        assert_eq!(cl.check_acceptable(&g, &t.terminal_set, 4, Rational::new(1, 8), &SolverConfig::default()).unwrap(), 0);
        assert!(cl.check_acceptable(&g, &t.terminal_set, 3, Rational::new(1, 8), &SolverConfig::default()).is_err());
    }

    #[test]
    fn certificate_tamper_detected() {
        let g = generators::grid(12, 12);
        let mut res = decompose_thm1(&g, 2, 2, &PipelineConfig::default()).unwrap();
        let v = *res.subgraphs[0].iter().next().unwrap();
        res.subgraphs[0].remove(&v);
        res.subgraphs[1].insert(v);
        assert!(!res.verify(&g, &SolverConfig::default()).unwrap());
    }
}
