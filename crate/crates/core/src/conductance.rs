//! High-conductance decomposition and trimming of a graph after vertex removal.

use serde::{Deserialize, Serialize};

use crate::cuts::{min_conductance_cut, rational_below, to_f64, Cut, Rational, SolverConfig, SolverMode};
use crate::error::{Error, Result};
use crate::graph::{Graph, VertexId, VertexSet};
use crate::spectral::laplacian_spectrum;
use crate::well_linked::well_linked_decomposition_with;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub enum ThresholdRule {
    /// 1/(160·arv·log m).
    Paper,
    /// A caller-chosen target; the boundary bound is then only reported.
    Explicit(Rational),
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ConductanceConfig {
    pub solver: SolverConfig,
    pub threshold: ThresholdRule,
    /// Parts up to this many vertices get an exact conductance check.
    pub verify_limit: usize,
    /// Split small parts that fail the exact check along their minimum-conductance cut.
    pub refine: bool,
}

impl Default for ConductanceConfig {
    fn default() -> Self {
        ConductanceConfig { solver: SolverConfig::default(), threshold: ThresholdRule::Paper, verify_limit: 14, refine: true }
    }
}

impl ConductanceConfig {
    pub fn explicit(alpha: Rational) -> Self {
        ConductanceConfig { threshold: ThresholdRule::Explicit(alpha), ..Self::default() }
    }
}

pub fn paper_threshold(m: usize, arv_factor: f64) -> Rational {
    let lg = (m.max(2) as f64).log2();
    rational_below(1.0 / (160.0 * arv_factor * lg))
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PartCheck {
    pub edges: usize,
    /// Minimum conductance found; `None` when no cut has internal edges on both sides.
    pub conductance: Option<Rational>,
    /// `conductance` is the exact minimum.
    pub exact: bool,
    pub passes: bool,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ConductancePartition {
    pub parts: Vec<VertexSet>,
    pub checks: Vec<PartCheck>,
    pub m: usize,
    pub boundary_total: usize,
    pub threshold: Rational,
    /// Small parts split after failing their exact check.
    pub refined: usize,
    pub success: bool,
}

impl ConductancePartition {
    pub fn boundary_ok(&self) -> bool {
        10 * self.boundary_total <= self.m
    }

    /// Recomputes partition validity and boundary_total.
    pub fn replays(&self, h: &Graph) -> Result<bool> {
        let mut seen = VertexSet::new();
        let mut total = 0;
        for p in &self.parts {
            if p.is_empty() || p.iter().any(|v| !seen.insert(*v)) {
                return Ok(false);
            }
            total += h.out_degree_mask(&h.mask(p)?);
        }
        Ok(seen == h.vertex_set() && total == self.boundary_total)
    }
}

/// Ψ of g[s] with the exact solver when |s| ≤ limit.
fn check_part(h: &Graph, part: &VertexSet, threshold: Rational, cfg: &ConductanceConfig) -> Result<(PartCheck, Option<Cut>)> {
    let sub = h.induced(part)?;
    let exact = part.len() <= cfg.verify_limit;
    let solver = if exact {
        SolverConfig { mode: SolverMode::Exact, exact_limit: cfg.verify_limit.max(cfg.solver.exact_limit), ..cfg.solver.clone() }
    } else {
        cfg.solver.clone()
    };
    match min_conductance_cut(&sub, &solver) {
        Ok(cut) => {
            let c = cut.conductance.expect("valid conductance cut");
            let check = PartCheck { edges: sub.m(), conductance: Some(c), exact: cut.exact, passes: c >= threshold };
            Ok((check, Some(cut)))
        }
        Err(Error::NoValidCut) => Ok((PartCheck { edges: sub.m(), conductance: None, exact: true, passes: true }, None)),
        Err(e) => Err(e),
    }
}

/// The subdivided graph: v_e on every edge plus a pendant t_e on each v_e.
fn pendant_subdivision(h: &Graph) -> Result<(Graph, VertexSet)> {
    let base = h.max_id().map_or(0, |v| v.0 + 1);
    let m = h.m() as u32;
    let mut ids: Vec<VertexId> = h.ids().to_vec();
    let mut edges = Vec::with_capacity(3 * h.m());
    let mut core: VertexSet = h.vertex_set();
    for (e, &(u, v)) in h.edges().iter().enumerate() {
        let ve = VertexId(base + e as u32);
        let te = VertexId(base + m + e as u32);
        ids.push(ve);
        ids.push(te);
        core.insert(ve);
        edges.push((h.id(u), ve));
        edges.push((ve, h.id(v)));
        edges.push((ve, te));
    }
    Ok((Graph::new(ids, edges)?, core))
}

/// Partition of V(h) into parts of conductance at least the threshold whose
/// boundaries sum to at most m/10 when the run succeeds.
pub fn decompose_high_conductance(h: &Graph, cfg: &ConductanceConfig) -> Result<ConductancePartition> {
    let m = h.m();
    if m == 0 {
        return Err(Error::Precondition("graph has no edges".into()));
    }
    let threshold = match &cfg.threshold {
        ThresholdRule::Paper => paper_threshold(m, cfg.solver.arv_factor),
        ThresholdRule::Explicit(a) => *a,
    };
    let enforce = matches!(cfg.threshold, ThresholdRule::Paper);
    let mut raw: Vec<VertexSet> = Vec::new();
    for comp in h.components() {
        let cset = h.set_of(comp);
        let sub = h.induced(&cset)?;
        if sub.m() == 0 {
            raw.extend(cset.into_iter().map(|v| VertexSet::from([v])));
            continue;
        }
        let (big, core) = pendant_subdivision(&sub)?;
        let wl = well_linked_decomposition_with(&big, &core, threshold, &cfg.solver, enforce)?;
        for w in wl.parts {
            let proj: VertexSet = w.into_iter().filter(|v| cset.contains(v)).collect();
            if proj.is_empty() {
                continue;
            }
            let mask = h.mask(&proj)?;
            raw.extend(h.components_in(&mask).into_iter().map(|c| h.set_of(c)));
        }
    }
    let mut parts = Vec::new();
    let mut checks = Vec::new();
    let mut refined = 0;
    while let Some(p) = raw.pop() {
        let (check, cut) = check_part(h, &p, threshold, cfg)?;
        if !check.passes && check.exact && cfg.refine {
            let cut = cut.expect("a failing check has a cut");
            refined += 1;
            for side in [cut.side_a, cut.side_b] {
                let mask = h.mask(&side)?;
                raw.extend(h.components_in(&mask).into_iter().map(|c| h.set_of(c)));
            }
            continue;
        }
        parts.push(p);
        checks.push(check);
    }
    let mut order: Vec<usize> = (0..parts.len()).collect();
    order.sort_by(|&a, &b| parts[a].cmp(&parts[b]));
    let parts: Vec<VertexSet> = order.iter().map(|&i| parts[i].clone()).collect();
    let checks: Vec<PartCheck> = order.iter().map(|&i| checks[i].clone()).collect();
    let mut boundary_total = 0;
    for p in &parts {
        boundary_total += h.out_degree_mask(&h.mask(p)?);
    }
    let success = 10 * boundary_total <= m && checks.iter().all(|c| c.passes);
    let out = ConductancePartition { parts, checks, m, boundary_total, threshold, refined, success };
    if out.success && !out.boundary_ok() {
        return Err(Error::Invariant("successful run exceeds boundary budget".into()));
    }
    Ok(out)
}

/// λ₂(D − A)/Δ rounded down; a lower bound on Ψ for any graph.
pub fn spectral_conductance_bound(g: &Graph) -> Rational {
    let d = g.max_degree();
    if g.n() < 2 || d == 0 {
        return Rational::new(0, 1);
    }
    let ev = laplacian_spectrum(g);
    let l2 = (ev[1] - 1e-9).max(0.0);
    if l2 == 0.0 {
        Rational::new(0, 1)
    } else {
        rational_below(l2 / d as f64)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum PsiEvidence {
    Exhaustive,
    Spectral,
    /// No proof found either way.
    Unverified,
}

/// Proves Ψ(g) ≥ gamma exhaustively or spectrally. Returns an error if a cut below gamma is found.
pub fn certify_conductance(g: &Graph, gamma: Rational, cfg: &SolverConfig) -> Result<PsiEvidence> {
    if g.m() < 2 {
        return Ok(PsiEvidence::Exhaustive);
    }
    if g.n() <= cfg.exact_limit && cfg.mode != SolverMode::Heuristic {
        return match min_conductance_cut(g, &SolverConfig { mode: SolverMode::Exact, ..cfg.clone() }) {
            Ok(c) if c.conductance.expect("valid cut") < gamma => {
                Err(Error::Precondition(format!("conductance {} is below {gamma}", c.conductance.unwrap())))
            }
            Ok(_) | Err(Error::NoValidCut) => Ok(PsiEvidence::Exhaustive),
            Err(e) => Err(e),
        };
    }
    if spectral_conductance_bound(g) >= gamma {
        return Ok(PsiEvidence::Spectral);
    }
    match min_conductance_cut(g, cfg) {
        Ok(c) if c.conductance.expect("valid cut") < gamma => {
            Err(Error::Precondition(format!("found a cut of conductance {} below {gamma}", c.conductance.unwrap())))
        }
        _ => Ok(PsiEvidence::Unverified),
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TrimResult {
    pub kept: VertexSet,
    pub peeled: Vec<VertexSet>,
    /// |E(g_big)|.
    pub m: usize,
    pub edges_kept: usize,
    /// Edges lost to the removal.
    pub removed_edges: usize,
    /// |R|: removed edges plus every peeled cut.
    pub charge: usize,
    /// Conductance of the last cut examined, or `None` when no cut remained.
    pub conductance: Option<Rational>,
    /// `conductance` is the exact minimum over g_big[kept].
    pub exact: bool,
    /// How Ψ(g_big) ≥ γ was established; `None` in the unchecked variant.
    pub precondition: Option<PsiEvidence>,
}

/// Repeatedly peels the side with fewer internal edges off any cut of conductance
/// below γ/4 in g_big − removed. Preconditions: γ ≤ 1/10, Ψ(g_big) ≥ γ and at most
/// γm/8 edges lost. Guarantees |E(kept)| ≥ m/2 and |R| ≤ γm/4.
pub fn trim_after_removal(g_big: &Graph, removed: &VertexSet, gamma: Rational, cfg: &SolverConfig) -> Result<TrimResult> {
    if gamma > Rational::new(1, 10) || gamma == Rational::new(0, 1) {
        return Err(Error::Precondition(format!("gamma {gamma} must lie in (0, 1/10]")));
    }
    let m = g_big.m() as u64;
    let mask = g_big.mask(removed)?;
    let lost = (0..g_big.m()).filter(|&e| {
        let (u, v) = g_big.edge(e);
        mask[u] || mask[v]
    });
    let lost = lost.count() as u64;
    if 8 * lost * gamma.denom() > gamma.numer() * m {
        return Err(Error::Precondition(format!("removal loses {lost} edges, more than γm/8 with m = {m}")));
    }
    let evidence = certify_conductance(g_big, gamma, cfg)?;
    let mut out = trim_loop(g_big, removed, gamma, cfg)?;
    out.precondition = Some(evidence);
    if 4 * out.charge as u64 * gamma.denom() > gamma.numer() * m {
        return Err(Error::Invariant(format!("charge {} exceeds γm/4", out.charge)));
    }
    if 2 * out.edges_kept < out.m {
        return Err(Error::Invariant(format!("kept {} of {} edges", out.edges_kept, out.m)));
    }
    Ok(out)
}

/// The peeling loop without precondition checks or guarantee asserts.
pub fn trim_after_removal_unchecked(g_big: &Graph, removed: &VertexSet, gamma: Rational, cfg: &SolverConfig) -> Result<TrimResult> {
    trim_loop(g_big, removed, gamma, cfg)
}

fn trim_loop(g_big: &Graph, removed: &VertexSet, gamma: Rational, cfg: &SolverConfig) -> Result<TrimResult> {
    let removed_mask = g_big.mask(removed)?;
    let removed_edges = (0..g_big.m())
        .filter(|&e| {
            let (u, v) = g_big.edge(e);
            removed_mask[u] || removed_mask[v]
        })
        .count();
    let mut kept: VertexSet = g_big.vertex_set().difference(removed).copied().collect();
    let mut peeled = Vec::new();
    let mut charge = removed_edges;
    let (gn, gd) = (*gamma.numer() as u128, *gamma.denom() as u128);
    let (conductance, exact) = loop {
        let h = g_big.induced(&kept)?;
        let cut = match min_conductance_cut(&h, cfg) {
            Ok(c) => c,
            Err(Error::NoValidCut) => break (None, true),
            Err(e) => return Err(e),
        };
        let ea = h.edges_within(&cut.side_a)?;
        let eb = h.edges_within(&cut.side_b)?;
        let small = if ea <= eb { (&cut.side_a, ea) } else { (&cut.side_b, eb) };
        // crossing < γ·|E(A)|/4
        if 4 * cut.crossing as u128 * gd < gn * small.1 as u128 {
            charge += cut.crossing;
            kept = kept.difference(small.0).copied().collect();
            peeled.push(small.0.clone());
            continue;
        }
        break (cut.conductance, cut.exact);
    };
    let edges_kept = g_big.edges_within(&kept)?;
    Ok(TrimResult {
        kept,
        peeled,
        m: g_big.m(),
        edges_kept,
        removed_edges,
        charge,
        conductance,
        exact,
        precondition: None,
    })
}

/// Ψ as an f64 for diagnostics.
pub fn conductance_f64(c: &Option<Rational>) -> f64 {
    c.as_ref().map_or(f64::INFINITY, to_f64)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::cuts::ratio;
    use crate::expander::{cut_matching_game, RandomMatching};
    use crate::generators;

    fn exact_psi(g: &Graph) -> Option<Rational> {
        min_conductance_cut(g, &SolverConfig::exact()).ok().and_then(|c| c.conductance)
    }

    #[test]
    fn clique_is_one_part() {
        let g = generators::complete(6);
        let p = decompose_high_conductance(&g, &ConductanceConfig::default()).unwrap();
        assert_eq!(p.parts, vec![g.vertex_set()]);
        assert_eq!(p.boundary_total, 0);
        assert!(p.success);
    }

    #[test]
    fn two_cliques_split_at_bridge() {
        let g = generators::clique_chain(&[5, 5]);
        let p = decompose_high_conductance(&g, &ConductanceConfig::explicit(ratio(1, 8))).unwrap();
        assert_eq!(p.parts.len(), 2, "{:?}", p.parts);
        assert_eq!(p.boundary_total, 2);
        assert!(p.boundary_ok());
        // Ψ(K5) = 6: the 2|3 cut crosses 6 edges and leaves 1 inside the smaller side
        assert_eq!(exact_psi(&generators::complete(5)), Some(ratio(6, 1)));
        assert!(p.checks.iter().all(|c| c.exact && c.passes));
        assert!(p.replays(&g).unwrap());
    }

    #[test]
    fn clique_chain_three_parts() {
        let g = generators::clique_chain(&[5, 5, 5]);
        let p = decompose_high_conductance(&g, &ConductanceConfig::explicit(ratio(1, 8))).unwrap();
        assert_eq!(p.parts.len(), 3, "{:?}", p.parts);
        for part in &p.parts {
            let psi = exact_psi(&g.induced(part).unwrap());
            assert!(psi.is_none_or(|x| x >= ratio(1, 8)));
        }
    }

    #[test]
    fn paper_threshold_keeps_connected_graph_whole() {
        let g = generators::grid(4, 4);
        let p = decompose_high_conductance(&g, &ConductanceConfig::default()).unwrap();
        assert_eq!(p.parts.len(), 1);
        assert!(p.success);
    }

    #[test]
    fn components_handled_separately() {
        let g = generators::disjoint_union(&generators::complete(4), &generators::complete(4));
        let p = decompose_high_conductance(&g, &ConductanceConfig::default()).unwrap();
        assert_eq!(p.parts.len(), 2);
        assert_eq!(p.boundary_total, 0);
    }

    #[test]
    fn trim_without_removal_keeps_everything() {
        let g = generators::complete(8);
        let r = trim_after_removal(&g, &VertexSet::new(), ratio(1, 10), &SolverConfig::exact()).unwrap();
        assert_eq!(r.kept, g.vertex_set());
        assert!(r.peeled.is_empty());
        assert_eq!(r.precondition, Some(PsiEvidence::Exhaustive));
    }

    #[test]
    fn trim_k10_minus_vertex() {
        let g = generators::complete(10);
        let removed = VertexSet::from([VertexId(0)]);
        // 9 edges lost is above γm/8, so only the unchecked loop applies
        assert!(trim_after_removal(&g, &removed, ratio(1, 10), &SolverConfig::exact()).is_err());
        let r = trim_after_removal_unchecked(&g, &removed, ratio(1, 10), &SolverConfig::exact()).unwrap();
        assert_eq!(r.kept.len(), 9);
        assert_eq!(r.edges_kept, 36);
        assert!(2 * r.edges_kept >= r.m);
    }

    #[test]
    fn trim_game_expander_minus_vertex() {
        let res = cut_matching_game(16, 16, &mut RandomMatching::new(3), 3).unwrap();
        let g = res.witness.graph;
        let removed = VertexSet::from([g.id(0)]);
        let gamma = ratio(1, 10);
        let r = trim_after_removal_unchecked(&g, &removed, gamma, &SolverConfig::exact()).unwrap();
        assert!(2 * r.edges_kept >= r.m);
        let psi = exact_psi(&g.induced(&r.kept).unwrap());
        assert!(psi.is_none_or(|x| x >= gamma / 4));
    }

    #[test]
    fn trim_peels_pendant_clique() {
        // a K8 with a K6 hanging off one edge
        let g = generators::clique_chain(&[8, 6]);
        let r = trim_after_removal_unchecked(&g, &VertexSet::new(), ratio(1, 2), &SolverConfig::exact()).unwrap();
        assert_eq!(r.peeled.len(), 1);
        assert_eq!(r.kept.len(), 8);
    }

    #[test]
    fn spectral_bound_below_exact() {
        for g in [generators::complete(6), generators::grid(3, 4), generators::petersen()] {
            let exact = exact_psi(&g).unwrap();
            assert!(spectral_conductance_bound(&g) <= exact);
        }
    }
}
