//! Well-linkedness checks, the well-linked decomposition, extraction of a
//! well-linked vertex set, and node-well-linkedness verification.

use rand::seq::SliceRandom;
use serde::{Deserialize, Serialize};

use crate::cuts::{rational_below, sparsest_cut, to_f64, Cut, Rational, SolverConfig, SolverMode};
use crate::error::{Error, Result};
use crate::flow::{max_flow, min_edge_cut, CapacityMode};
use crate::generators;
use crate::graph::{subdivide_boundary, Graph, VertexId, VertexSet};

/// Returns a violating cut, or `None` when no violation was found. With an
/// exact solver `None` proves α-well-linkedness.
pub fn check_alpha_well_linked(g: &Graph, t: &VertexSet, alpha: Rational, cfg: &SolverConfig) -> Result<Option<Cut>> {
    if t.len() < 2 {
        return Ok(None);
    }
    let cut = sparsest_cut(g, t, cfg)?;
    Ok(cut.sparsity.filter(|s| *s < alpha).map(|_| cut))
}

/// α-goodness of `s`: its boundary terminals are α-well-linked in the subdivided G[S].
/// A violating cut is reported over the subdivided graph.
pub fn check_alpha_good(g: &Graph, s: &VertexSet, alpha: Rational, cfg: &SolverConfig) -> Result<Option<Cut>> {
    let sub = subdivide_boundary(g, s)?;
    check_alpha_well_linked(&sub.graph, &sub.terminals, alpha, cfg)
}

/// Whether a solver configuration gives an exact answer for this terminal set.
pub fn decides_exactly(g: &Graph, t: &VertexSet, cfg: &SolverConfig) -> bool {
    if cfg.mode == SolverMode::Heuristic {
        return false;
    }
    let pend = t
        .iter()
        .filter_map(|&v| g.index_of(v))
        .filter(|&i| g.degree(i) == 1 && g.degree(g.neighbors(i)[0].0) >= 2)
        .count();
    g.n() - pend <= cfg.exact_limit || t.len() <= cfg.terminal_limit || !g.is_connected()
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct WellLinkedDecomposition {
    pub parts: Vec<VertexSet>,
    /// |out(S)| of the operand.
    pub k_prime: usize,
    pub boundary_sum: usize,
    /// k′(1 + 16·α·arv·log k′).
    pub bound: f64,
    /// Every part was certified α-good by an exact solver.
    pub exact: bool,
}

fn log2_at_least_one(k: usize) -> f64 {
    if k <= 1 {
        0.0
    } else {
        (k as f64).log2()
    }
}

/// Partition of `s` into α-good parts whose boundaries sum to at most k′(1 + 16·α·arv·log k′).
pub fn well_linked_decomposition(g: &Graph, s: &VertexSet, alpha: Rational, cfg: &SolverConfig) -> Result<WellLinkedDecomposition> {
    well_linked_decomposition_with(g, s, alpha, cfg, true)
}

/// As [`well_linked_decomposition`]; with `enforce` off the α precondition and
/// the boundary-sum assertion are skipped (the sum is still reported).
pub fn well_linked_decomposition_with(
    g: &Graph,
    s: &VertexSet,
    alpha: Rational,
    cfg: &SolverConfig,
    enforce: bool,
) -> Result<WellLinkedDecomposition> {
    let mask = g.mask(s)?;
    let k_prime = g.out_degree_mask(&mask);
    let lg = log2_at_least_one(k_prime);
    let a = to_f64(&alpha);
    if enforce && k_prime >= 2 && !(a * 8.0 * cfg.arv_factor * lg < 1.0) {
        return Err(Error::Precondition(format!(
            "alpha {alpha} must be below 1/(8·{}·log {k_prime}) = {:.5}",
            cfg.arv_factor,
            1.0 / (8.0 * cfg.arv_factor * lg)
        )));
    }
    let mut queue: Vec<VertexSet> = g.components_in(&mask).into_iter().map(|c| g.set_of(c)).collect();
    let mut parts = Vec::new();
    let mut exact = true;
    while let Some(r) = queue.pop() {
        let sub = subdivide_boundary(g, &r)?;
        if sub.terminals.len() < 2 {
            parts.push(r);
            continue;
        }
        exact &= decides_exactly(&sub.graph, &sub.terminals, cfg);
        let cut = sparsest_cut(&sub.graph, &sub.terminals, cfg)?;
        let threshold = to_f64(&alpha) * cfg.arv_factor;
        let sparse = cut.sparsity.is_some_and(|x| to_f64(&x) < threshold);
        let a_side: VertexSet = cut.side_a.intersection(&r).copied().collect();
        let b_side: VertexSet = cut.side_b.intersection(&r).copied().collect();
        if !sparse || a_side.is_empty() || b_side.is_empty() {
            parts.push(r);
            continue;
        }
        for side in [a_side, b_side] {
            let m = g.mask(&side)?;
            queue.extend(g.components_in(&m).into_iter().map(|c| g.set_of(c)));
        }
    }
    parts.sort();
    let mut boundary_sum = 0;
    for p in &parts {
        boundary_sum += g.out_degree_mask(&g.mask(p)?);
    }
    let bound = k_prime as f64 * (1.0 + 16.0 * a * cfg.arv_factor * lg);
    if enforce && boundary_sum as f64 > bound + 1e-9 {
        return Err(Error::Invariant(format!("boundary sum {boundary_sum} exceeds {bound:.3}")));
    }
    Ok(WellLinkedDecomposition { parts, k_prime, boundary_sum, bound, exact })
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum CertKind {
    EdgeWellLinked,
    AlphaGood,
    NodeWellLinked,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum VerificationMode {
    /// α is the exact minimum sparsity (capped at 1).
    Exhaustive,
    /// α is the minimum over the recorded terminal splits only.
    Sampled,
}

/// One terminal split and the min cut separating it.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct SplitCheck {
    pub side_a: VertexSet,
    pub side_b: VertexSet,
    pub flow: usize,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct WellLinkedCertificate {
    pub terminal_set: VertexSet,
    pub alpha: Rational,
    pub kind: CertKind,
    pub mode: VerificationMode,
    pub witness: Vec<SplitCheck>,
}

impl WellLinkedCertificate {
    /// Recomputes every recorded split and, in exhaustive mode, the exact minimum sparsity.
    pub fn replay(&self, g: &Graph, cfg: &SolverConfig) -> Result<bool> {
        if self.alpha > Rational::new(1, 1) || *self.alpha.numer() == 0 {
            return Ok(false);
        }
        for c in &self.witness {
            let a = g.mask(&c.side_a)?;
            let b = g.mask(&c.side_b)?;
            let (flow, _) = min_edge_cut(g, &a, &b);
            let den = c.side_a.len().min(c.side_b.len()) as u64;
            if flow != c.flow || Rational::new(flow as u64, den.max(1)) < self.alpha {
                return Ok(false);
            }
        }
        if self.mode == VerificationMode::Exhaustive {
            let exact = SolverConfig { mode: SolverMode::Exact, ..cfg.clone() };
            return Ok(check_alpha_well_linked(g, &self.terminal_set, self.alpha, &exact)?.is_none());
        }
        Ok(true)
    }
}

/// Certificate for `t` in `g`: exact when the solver can decide, sampled otherwise.
pub fn certify_well_linked(g: &Graph, t: &VertexSet, cfg: &SolverConfig, samples: usize) -> Result<WellLinkedCertificate> {
    let one = Rational::new(1, 1);
    if t.len() < 2 {
        return Ok(WellLinkedCertificate {
            terminal_set: t.clone(),
            alpha: one,
            kind: CertKind::EdgeWellLinked,
            mode: VerificationMode::Exhaustive,
            witness: vec![],
        });
    }
    let split_check = |a: &VertexSet, b: &VertexSet| -> Result<SplitCheck> {
        let (flow, _) = min_edge_cut(g, &g.mask(a)?, &g.mask(b)?);
        Ok(SplitCheck { side_a: a.clone(), side_b: b.clone(), flow })
    };
    if decides_exactly(g, t, cfg) {
        let exact = SolverConfig { mode: SolverMode::Exact, ..cfg.clone() };
        let cut = sparsest_cut(g, t, &exact)?;
        let phi = cut.sparsity.expect("two terminals give a sparsity");
        let ta: VertexSet = cut.side_a.intersection(t).copied().collect();
        let tb: VertexSet = cut.side_b.intersection(t).copied().collect();
        let alpha = phi.min(one);
        if *alpha.numer() == 0 {
            return Err(Error::Invariant("terminal set is not well-linked for any α > 0".into()));
        }
        return Ok(WellLinkedCertificate {
            terminal_set: t.clone(),
            alpha,
            kind: CertKind::EdgeWellLinked,
            mode: VerificationMode::Exhaustive,
            witness: vec![split_check(&ta, &tb)?],
        });
    }
    let mut rng = generators::rng(cfg.seed ^ 0x3a11_5eed);
    let ids: Vec<VertexId> = t.iter().copied().collect();
    let mut witness = Vec::new();
    let mut alpha = one;
    for k in 0..samples.max(1) {
        let mut shuffled = ids.clone();
        shuffled.shuffle(&mut rng);
        let cut_at = 1 + k % (ids.len() / 2);
        let a: VertexSet = shuffled[..cut_at].iter().copied().collect();
        let b: VertexSet = shuffled[cut_at..].iter().copied().collect();
        let c = split_check(&a, &b)?;
        alpha = alpha.min(Rational::new(c.flow as u64, a.len().min(b.len()) as u64));
        witness.push(c);
    }
    // the heuristic cut is a further sample
    let cut = sparsest_cut(g, t, cfg)?;
    let ta: VertexSet = cut.side_a.intersection(t).copied().collect();
    let tb: VertexSet = cut.side_b.intersection(t).copied().collect();
    if !ta.is_empty() && !tb.is_empty() {
        let c = split_check(&ta, &tb)?;
        alpha = alpha.min(Rational::new(c.flow as u64, ta.len().min(tb.len()) as u64));
        witness.push(c);
    }
    if *alpha.numer() == 0 {
        return Err(Error::Invariant("sampled split with zero flow".into()));
    }
    Ok(WellLinkedCertificate { terminal_set: t.clone(), alpha, kind: CertKind::EdgeWellLinked, mode: VerificationMode::Sampled, witness })
}

/// Shrinks X = V toward the terminal-heavier side of sparse cuts until the
/// sparsest cut w.r.t. X meets α(depth) = (1 − 1/log n)^depth, then certifies X.
pub fn find_well_linked_set(g: &Graph, cfg: &SolverConfig) -> Result<WellLinkedCertificate> {
    let n = g.n();
    if n < 3 {
        return certify_well_linked(g, &g.vertex_set(), cfg, 0);
    }
    if !g.is_connected() {
        return Err(Error::Precondition("find_well_linked_set needs a connected graph".into()));
    }
    let shrink = 1.0 - 1.0 / (n as f64).log2();
    let mut x = g.vertex_set();
    let mut depth = 0i32;
    while x.len() > 2 {
        let target = shrink.max(0.0).powi(depth);
        let cut = sparsest_cut(g, &x, cfg)?;
        let phi = cut.sparsity.expect("two terminals give a sparsity");
        if to_f64(&phi) >= target {
            break;
        }
        let xa: VertexSet = cut.side_a.intersection(&x).copied().collect();
        let xb: VertexSet = cut.side_b.intersection(&x).copied().collect();
        x = match xa.len().cmp(&xb.len()) {
            std::cmp::Ordering::Greater => xa,
            std::cmp::Ordering::Less => xb,
            std::cmp::Ordering::Equal => {
                let ea = g.edges_within(&cut.side_a)?;
                let eb = g.edges_within(&cut.side_b)?;
                if eb > ea {
                    xb
                } else {
                    xa
                }
            }
        };
        depth += 1;
    }
    certify_well_linked(g, &x, cfg, 64)
}

/// Outcome of a node-well-linkedness check.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum NodeCheck {
    Pass { pairs_checked: usize, exhaustive: bool },
    /// |t1| = |t2| but only `paths` node-disjoint t1–t2 paths exist.
    Fail { t1: VertexSet, t2: VertexSet, paths: usize },
}

pub const NODE_EXHAUSTIVE_LIMIT: usize = 12;

/// Checks equal-size pairs (T1, T2) of `x`. Only pairs whose shared part is
/// all of X \ (T1 ∪ T2) are tested; smaller shared parts are implied.
pub fn verify_node_well_linked(g: &Graph, x: &VertexSet, seed: u64, samples: usize) -> Result<NodeCheck> {
    g.mask(x)?;
    let ids: Vec<VertexId> = x.iter().copied().collect();
    let k = ids.len();
    let check = |a: &VertexSet, b: &VertexSet| -> Result<Option<NodeCheck>> {
        let shared: VertexSet = x.iter().copied().filter(|v| !a.contains(v) && !b.contains(v)).collect();
        let t1: VertexSet = a.union(&shared).copied().collect();
        let t2: VertexSet = b.union(&shared).copied().collect();
        let r = max_flow(g, &t1, &t2, CapacityMode::Vertex)?;
        Ok((r.value < t1.len()).then_some(NodeCheck::Fail { t1, t2, paths: r.value }))
    };
    let mut pairs = 0;
    if k <= NODE_EXHAUSTIVE_LIMIT {
        // labels: 0 unused, 1 in A, 2 in B; the smallest labelled element sits in A
        let total = 3usize.pow(k as u32);
        for code in 0..total {
            let mut c = code;
            let mut a = VertexSet::new();
            let mut b = VertexSet::new();
            let mut first = None;
            for &v in &ids {
                match c % 3 {
                    1 => {
                        a.insert(v);
                        first.get_or_insert(1);
                    }
                    2 => {
                        b.insert(v);
                        first.get_or_insert(2);
                    }
                    _ => {}
                }
                c /= 3;
            }
            if a.is_empty() || a.len() != b.len() || first != Some(1) {
                continue;
            }
            pairs += 1;
            if let Some(fail) = check(&a, &b)? {
                return Ok(fail);
            }
        }
        return Ok(NodeCheck::Pass { pairs_checked: pairs, exhaustive: true });
    }
    let mut rng = generators::rng(seed);
    for s in 0..samples {
        let mut sh = ids.clone();
        sh.shuffle(&mut rng);
        let size = 1 + s % (k / 2);
        let a: VertexSet = sh[..size].iter().copied().collect();
        let b: VertexSet = sh[size..2 * size].iter().copied().collect();
        pairs += 1;
        if let Some(fail) = check(&a, &b)? {
            return Ok(fail);
        }
    }
    Ok(NodeCheck::Pass { pairs_checked: pairs, exhaustive: false })
}

/// Largest node-well-linked subset by exhaustive search (small graphs only).
pub fn max_node_well_linked(g: &Graph) -> Result<VertexSet> {
    if g.n() > NODE_EXHAUSTIVE_LIMIT {
        return Err(Error::TooLarge(format!("{} vertices", g.n())));
    }
    let mut best = VertexSet::new();
    for bits in 0u32..(1 << g.n()) {
        if bits.count_ones() as usize <= best.len() {
            continue;
        }
        let x = g.set_of((0..g.n()).filter(|&i| bits >> i & 1 == 1));
        if matches!(verify_node_well_linked(g, &x, 0, 0)?, NodeCheck::Pass { .. }) {
            best = x;
        }
    }
    Ok(best)
}

pub fn alpha_for_decomposition(k_prime: usize, arv_factor: f64) -> Rational {
    // largest dyadic α strictly below 1/(8·arv·log k′)
    let lg = log2_at_least_one(k_prime).max(1.0);
    let r = rational_below(1.0 / (8.0 * arv_factor * lg));
    if to_f64(&r) * 8.0 * arv_factor * lg < 1.0 {
        r
    } else {
        Rational::new(r.numer() - 1, *r.denom())
    }
}
