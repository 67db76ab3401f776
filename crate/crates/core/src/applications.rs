//! Erdős–Pósa packing-or-covering for cycle families, a cycle-packing dynamic
//! program over tree decompositions, and the treewidth-based decision
//! skeleton for packing-type parameters.
//!
//! Everything here works on the underlying simple graph, so parallel edges do
//! not form cycles of length two.

use std::collections::{BTreeMap, HashMap};

use serde::{Deserialize, Serialize};

use crate::cuts::SolverConfig;
use crate::decompose::{decompose_thm1, PipelineConfig};
use crate::error::{Error, Result};
use crate::graph::{Graph, VertexId, VertexSet};
use crate::treewidth::{decompose_or_certify, exact_treewidth_limited, heuristic_treewidth, Heuristic, TreeDecomposition, TwOutcome};

/// Bitmask over vertex indices; the exhaustive searches run on at most 128 vertices.
type Mask = u128;

const MASK_BITS: usize = 128;

fn bit(i: usize) -> Mask {
    1 << i
}

fn full_mask(n: usize) -> Mask {
    if n == MASK_BITS {
        Mask::MAX
    } else {
        bit(n) - 1
    }
}

fn members(mask: Mask) -> impl Iterator<Item = usize> {
    let mut m = mask;
    std::iter::from_fn(move || {
        if m == 0 {
            return None;
        }
        let i = m.trailing_zeros() as usize;
        m &= m - 1;
        Some(i)
    })
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum CycleFamily {
    All,
    /// Cycles whose length is a multiple of m.
    ZeroMod(usize),
}

impl CycleFamily {
    pub fn admits(&self, len: usize) -> bool {
        len >= 3
            && match *self {
                CycleFamily::All => true,
                CycleFamily::ZeroMod(m) => len.is_multiple_of(m),
            }
    }

    /// `cycle` lists distinct vertices of g in cyclic order and has admissible length.
    pub fn is_member(&self, g: &Graph, cycle: &[VertexId]) -> bool {
        let mut seen = VertexSet::new();
        if !self.admits(cycle.len()) || !cycle.iter().all(|v| seen.insert(*v)) {
            return false;
        }
        let ix: Option<Vec<usize>> = cycle.iter().map(|&v| g.index_of(v)).collect();
        let Some(ix) = ix else { return false };
        (0..ix.len()).all(|i| {
            let (a, b) = (ix[i], ix[(i + 1) % ix.len()]);
            g.neighbors(a).iter().any(|&(x, _)| x == b)
        })
    }
}

/// Adjacency as bitmasks of a simple graph.
struct Adj {
    nb: Vec<Mask>,
}

impl Adj {
    fn new(g: &Graph) -> Result<Adj> {
        if g.n() > MASK_BITS {
            return Err(Error::TooLarge(format!("{} vertices; exhaustive cycle search handles at most {MASK_BITS}", g.n())));
        }
        let mut nb = vec![0; g.n()];
        for &(u, v) in g.edges() {
            nb[u] |= bit(v);
            nb[v] |= bit(u);
        }
        Ok(Adj { nb })
    }

    /// Drops vertices of degree ≤ 1 until none is left; they lie on no cycle.
    fn core(&self, mut mask: Mask) -> Mask {
        loop {
            let drop: Mask = members(mask).filter(|&v| (self.nb[v] & mask).count_ones() <= 1).fold(0, |a, v| a | bit(v));
            if drop == 0 {
                return mask;
            }
            mask &= !drop;
        }
    }
}

/// Step budget shared by the exhaustive searches of one call.
struct Budget(u64);

impl Budget {
    fn tick(&mut self) -> Result<()> {
        if self.0 == 0 {
            return Err(Error::TooLarge("cycle search budget exhausted".into()));
        }
        self.0 -= 1;
        Ok(())
    }
}

/// A shortest cycle of G[mask].
fn shortest_cycle(adj: &Adj, mask: Mask) -> Option<Vec<usize>> {
    let n = adj.nb.len();
    let mut best: Option<Vec<usize>> = None;
    for s in members(mask) {
        let mut dist = vec![usize::MAX; n];
        let mut parent = vec![usize::MAX; n];
        let mut queue = std::collections::VecDeque::from([s]);
        dist[s] = 0;
        while let Some(u) = queue.pop_front() {
            for v in members(adj.nb[u] & mask) {
                if dist[v] == usize::MAX {
                    dist[v] = dist[u] + 1;
                    parent[v] = u;
                    queue.push_back(v);
                } else if parent[u] != v && parent[v] != u && dist[v] >= dist[u] {
                    let len = dist[u] + dist[v] + 1;
                    if best.as_ref().is_some_and(|b| b.len() <= len) {
                        continue;
                    }
                    // walk both ends up to their meeting point
                    let (mut a, mut b) = (vec![u], vec![v]);
                    while a.last() != b.last() {
                        let (x, y) = (*a.last().unwrap(), *b.last().unwrap());
                        if dist[x] >= dist[y] {
                            a.push(parent[x]);
                        } else {
                            b.push(parent[y]);
                        }
                    }
                    b.pop();
                    b.reverse();
                    a.extend(b);
                    if a.len() >= 3 && best.as_ref().is_none_or(|c| a.len() < c.len()) {
                        best = Some(a);
                    }
                }
            }
        }
        if best.as_ref().is_some_and(|b| b.len() == 3) {
            break;
        }
    }
    best
}

/// Every family cycle of G[mask] through `v`, each listed once, starting at v.
fn cycles_through(adj: &Adj, mask: Mask, v: usize, fam: CycleFamily, budget: &mut Budget) -> Result<Vec<Vec<usize>>> {
    let mut out = Vec::new();
    let mut path = vec![v];
    fn dfs(adj: &Adj, mask: Mask, fam: CycleFamily, path: &mut Vec<usize>, used: Mask, out: &mut Vec<Vec<usize>>, budget: &mut Budget) -> Result<()> {
        budget.tick()?;
        let u = *path.last().unwrap();
        let v = path[0];
        for w in members(adj.nb[u] & mask) {
            if w == v && path.len() >= 3 && path[1] < u && fam.admits(path.len()) {
                out.push(path.clone());
            } else if used & bit(w) == 0 {
                path.push(w);
                dfs(adj, mask, fam, path, used | bit(w), out, budget)?;
                path.pop();
            }
        }
        Ok(())
    }
    dfs(adj, mask, fam, &mut path, bit(v), &mut out, budget)?;
    Ok(out)
}

/// A shortest family cycle of G[mask], if any.
fn find_member(adj: &Adj, mask: Mask, fam: CycleFamily, budget: &mut Budget) -> Result<Option<Vec<usize>>> {
    let mask = adj.core(mask);
    if fam == CycleFamily::All {
        return Ok(shortest_cycle(adj, mask));
    }
    let mut best: Option<Vec<usize>> = None;
    let mut rest = mask;
    for v in members(mask) {
        for c in cycles_through(adj, adj.core(rest), v, fam, budget)? {
            if best.as_ref().is_none_or(|b| c.len() < b.len()) {
                best = Some(c);
            }
        }
        rest &= !bit(v);
    }
    Ok(best)
}

/// Exhaustive maximum packing of family cycles, memoised on the vertex mask.
struct Packer<'a> {
    adj: &'a Adj,
    fam: CycleFamily,
    memo: HashMap<Mask, (usize, Option<Vec<usize>>)>,
    budget: Budget,
}

impl Packer<'_> {
    fn best(&mut self, mask: Mask) -> Result<usize> {
        let mask = self.adj.core(mask);
        if mask == 0 {
            return Ok(0);
        }
        if let Some(&(v, _)) = self.memo.get(&mask) {
            return Ok(v);
        }
        let v = mask.trailing_zeros() as usize;
        let mut value = self.best(mask & !bit(v))?;
        let mut choice = None;
        for c in cycles_through(self.adj, mask, v, self.fam, &mut self.budget)? {
            let cm = c.iter().fold(0, |a, &x| a | bit(x));
            let here = 1 + self.best(mask & !cm)?;
            if here > value {
                value = here;
                choice = Some(c);
            }
        }
        self.memo.insert(mask, (value, choice));
        Ok(value)
    }

    fn witness(&mut self, mask: Mask) -> Result<Vec<Vec<usize>>> {
        self.best(mask)?;
        let mut out = Vec::new();
        let mut m = self.adj.core(mask);
        while m != 0 {
            let (_, choice) = self.memo.get(&m).cloned().unwrap_or((0, None));
            match choice {
                Some(c) => {
                    m &= !c.iter().fold(0, |a, &x| a | bit(x));
                    out.push(c);
                }
                None => m &= !bit(m.trailing_zeros() as usize),
            }
            m = self.adj.core(m);
            self.best(m)?;
        }
        Ok(out)
    }
}

fn to_ids(g: &Graph, c: &[usize]) -> Vec<VertexId> {
    c.iter().map(|&i| g.id(i)).collect()
}

/// Maximum number of vertex-disjoint family cycles with a witness, by exhaustive search.
pub fn max_cycle_packing(g: &Graph, fam: CycleFamily, budget: u64) -> Result<Vec<Vec<VertexId>>> {
    let g = g.simple();
    let adj = Adj::new(&g)?;
    let mut p = Packer { adj: &adj, fam, memo: HashMap::new(), budget: Budget(budget) };
    Ok(p.witness(full_mask(g.n()))?.iter().map(|c| to_ids(&g, c)).collect())
}

/// Some cycle of a simple graph, closed by the first back edge of a depth-first search.
fn any_cycle(g: &Graph) -> Option<Vec<VertexId>> {
    let n = g.n();
    let mut parent = vec![usize::MAX; n];
    let mut depth = vec![usize::MAX; n];
    for root in 0..n {
        if depth[root] != usize::MAX {
            continue;
        }
        depth[root] = 0;
        let mut stack = vec![(root, 0usize)];
        while let Some(&mut (u, ref mut next)) = stack.last_mut() {
            if *next == g.neighbors(u).len() {
                stack.pop();
                continue;
            }
            let (v, _) = g.neighbors(u)[*next];
            *next += 1;
            if depth[v] == usize::MAX {
                depth[v] = depth[u] + 1;
                parent[v] = u;
                stack.push((v, 0));
            } else if v != parent[u] && depth[v] < depth[u] {
                let mut cyc = vec![g.id(u)];
                let mut x = u;
                while x != v {
                    x = parent[x];
                    cyc.push(g.id(x));
                }
                return Some(cyc);
            }
        }
    }
    None
}

/// G − removed has no family cycle, checked exhaustively.
pub fn family_free(g: &Graph, removed: &VertexSet, fam: CycleFamily, budget: u64) -> Result<bool> {
    let g = g.simple();
    if fam == CycleFamily::All {
        return Ok(any_cycle(&g.remove_vertices(removed)?).is_none());
    }
    let adj = Adj::new(&g)?;
    let keep = (0..g.n()).filter(|&i| !removed.contains(&g.id(i))).fold(0, |a, i| a | bit(i));
    Ok(find_member(&adj, keep, fam, &mut Budget(budget))?.is_none())
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum EpStrategy {
    /// Peel one bag per found cycle; cover ≤ k(w+1).
    Thomassen,
    /// Separator recursion; cover ≤ β·p(w+1)·log(p+1) with p the maximum packing.
    DivideConquer,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct EpConfig {
    pub strategy: EpStrategy,
    /// Separator-size ratio α and the constant β of the divide-and-conquer bound.
    pub alpha: f64,
    pub beta: f64,
    /// Try the decomposition pipeline for k subgraphs of treewidth ≥ 2 first.
    pub try_decomposition: bool,
    pub pipeline: PipelineConfig,
    pub exact_limit: usize,
    pub search_budget: u64,
    /// Treewidth at which the family is assumed present; recorded with mod-cycle runs.
    pub mod_threshold: Option<usize>,
    /// Before answering with a cover, look for k disjoint cycles exhaustively.
    pub exact_packing_check: bool,
}

impl Default for EpConfig {
    fn default() -> Self {
        EpConfig {
            strategy: EpStrategy::Thomassen,
            alpha: 1.0,
            beta: 5.0,
            try_decomposition: true,
            pipeline: PipelineConfig::default(),
            exact_limit: 16,
            search_budget: 50_000_000,
            mod_threshold: None,
            exact_packing_check: true,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub enum EpBranch {
    Packing(Vec<Vec<VertexId>>),
    Cover(VertexSet),
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct EpOutcome {
    pub family: CycleFamily,
    pub k: usize,
    pub strategy: EpStrategy,
    pub branch: EpBranch,
    /// Width of the decomposition the procedure worked on.
    pub width: usize,
    /// The bound instance, for instance "k(w+1) = 6".
    pub bound_formula: String,
    pub bound: usize,
    /// Set when the packing came from the decomposition pipeline.
    pub from_decomposition: bool,
    pub notes: Vec<String>,
}

impl EpOutcome {
    /// Packing: k disjoint family cycles. Cover: G − cover has no family cycle and the size bound holds.
    pub fn verify(&self, g: &Graph, budget: u64) -> Result<bool> {
        let g = g.simple();
        match &self.branch {
            EpBranch::Packing(cs) => {
                let mut seen = VertexSet::new();
                Ok(cs.len() == self.k && cs.iter().all(|c| self.family.is_member(&g, c) && c.iter().all(|v| seen.insert(*v))))
            }
            EpBranch::Cover(s) => Ok(s.len() <= self.bound && s.iter().all(|v| g.contains(*v)) && family_free(&g, s, self.family, budget)?),
        }
    }
}

/// Rooted view of a tree decomposition: parent links and a post-order.
struct Rooted {
    bags: Vec<Vec<usize>>,
    children: Vec<Vec<usize>>,
    post: Vec<usize>,
}

impl Rooted {
    fn new(g: &Graph, td: &TreeDecomposition) -> Result<Rooted> {
        let nb = td.bags.len();
        let bags: Vec<Vec<usize>> = td.bags.iter().map(|b| g.indices(b)).collect::<Result<_>>()?;
        let mut adj = vec![Vec::new(); nb];
        for &(a, b) in &td.tree_edges {
            adj[a].push(b);
            adj[b].push(a);
        }
        let mut children = vec![Vec::new(); nb];
        let mut order = Vec::with_capacity(nb);
        let mut seen = vec![false; nb];
        if nb > 0 {
            let mut stack = vec![0];
            seen[0] = true;
            while let Some(t) = stack.pop() {
                order.push(t);
                for &c in &adj[t] {
                    if !seen[c] {
                        seen[c] = true;
                        children[t].push(c);
                        stack.push(c);
                    }
                }
            }
        }
        order.reverse();
        Ok(Rooted { bags, children, post: order })
    }

    fn bag_mask(&self, t: usize) -> Mask {
        self.bags[t].iter().fold(0, |a, &v| a | bit(v))
    }

    /// Union of the bags below and at every node.
    fn subtree_masks(&self) -> Vec<Mask> {
        let mut s = vec![0; self.bags.len()];
        for &t in &self.post {
            s[t] = self.children[t].iter().fold(self.bag_mask(t), |a, &c| a | s[c]);
        }
        s
    }
}

fn working_decomposition(g: &Graph, exact_limit: usize) -> Result<TreeDecomposition> {
    if g.n() <= exact_limit {
        Ok(exact_treewidth_limited(g, exact_limit)?.1)
    } else {
        Ok(heuristic_treewidth(g, Heuristic::MinFill).1)
    }
}

/// Packing of k cycles from the decomposition pipeline, one shortest cycle per subgraph.
fn packing_by_decomposition(g: &Graph, k: usize, fam: CycleFamily, cfg: &EpConfig, notes: &mut Vec<String>) -> Result<Option<Vec<Vec<VertexId>>>> {
    if fam != CycleFamily::All || !g.is_connected() || g.n() < 3 * k {
        return Ok(None);
    }
    let res = match decompose_thm1(g, k, 2, &cfg.pipeline) {
        Ok(r) => r,
        Err(e) => {
            notes.push(format!("decomposition into {k} subgraphs of treewidth ≥ 2 not found: {e}"));
            return Ok(None);
        }
    };
    let mut out = Vec::new();
    for s in &res.subgraphs {
        let sub = g.induced(s)?;
        match any_cycle(&sub) {
            Some(c) => out.push(c),
            None => return Err(Error::Invariant("a subgraph of certified treewidth ≥ 2 has no cycle".into())),
        }
    }
    notes.push(format!("decomposition found {k} disjoint subgraphs of treewidth ≥ 2"));
    Ok(Some(out))
}

/// Either k vertex-disjoint family cycles or a small set meeting them all.
pub fn ep_family(g: &Graph, k: usize, fam: CycleFamily, cfg: &EpConfig) -> Result<EpOutcome> {
    if k == 0 {
        return Err(Error::Precondition("k must be at least 1".into()));
    }
    if let CycleFamily::ZeroMod(m) = fam {
        if m < 2 {
            return Err(Error::Precondition("the modulus must be at least 2".into()));
        }
    }
    let g = g.simple();
    let td = working_decomposition(&g, cfg.exact_limit)?;
    let w = td.width;
    let mut notes = Vec::new();
    if let Some(t) = cfg.mod_threshold.filter(|_| matches!(fam, CycleFamily::ZeroMod(_))) {
        notes.push(format!("configured treewidth threshold for the family: {t}"));
    }
    let base = |branch, bound_formula, bound, from_decomposition, notes| EpOutcome {
        family: fam,
        k,
        strategy: cfg.strategy,
        branch,
        width: w,
        bound_formula,
        bound,
        from_decomposition,
        notes,
    };
    if cfg.try_decomposition {
        if let Some(p) = packing_by_decomposition(&g, k, fam, cfg, &mut notes)? {
            return Ok(base(EpBranch::Packing(p), "k disjoint subgraphs of treewidth ≥ 2".into(), 0, true, notes));
        }
    }
    let adj = Adj::new(&g)?;
    let mut budget = Budget(cfg.search_budget);
    match cfg.strategy {
        EpStrategy::Thomassen => {
            let (branch, peeled) = thomassen(&g, &adj, &td, k, fam, &mut budget)?;
            let bound = k * (w + 1);
            if let EpBranch::Cover(c) = &branch {
                if c.len() > bound {
                    return Err(Error::Invariant(format!("cover of {} vertices exceeds k(w+1) = {bound}", c.len())));
                }
            }
            notes.push(format!("{peeled} bags peeled"));
            let branch = match branch {
                // peeling one bag can destroy several cycles of a maximum packing
                EpBranch::Cover(c) if cfg.exact_packing_check => {
                    let mut packer = Packer { adj: &adj, fam, memo: HashMap::new(), budget: Budget(cfg.search_budget) };
                    match packer.witness(full_mask(g.n())) {
                        Ok(best) if best.len() >= k => {
                            notes.push(format!("cover of {} found, but exhaustive search packs {} cycles", c.len(), best.len()));
                            EpBranch::Packing(best.into_iter().take(k).map(|c| to_ids(&g, &c)).collect())
                        }
                        Ok(_) => EpBranch::Cover(c),
                        Err(e) => {
                            notes.push(format!("exhaustive packing check skipped: {e}"));
                            EpBranch::Cover(c)
                        }
                    }
                }
                b => b,
            };
            Ok(base(branch, format!("k(w+1) = {k}·{} = {bound}", w + 1), bound, false, notes))
        }
        EpStrategy::DivideConquer => {
            let mut packer = Packer { adj: &adj, fam, memo: HashMap::new(), budget };
            let all = full_mask(g.n());
            let best = packer.witness(all)?;
            if best.len() >= k {
                let p = best.into_iter().take(k).map(|c| to_ids(&g, &c)).collect();
                let bound = (cfg.beta * (k * (w + 1)) as f64 * ((k + 1) as f64).log2()).floor() as usize;
                return Ok(base(EpBranch::Packing(p), format!("β·k(w+1)·log(k+1) = {bound}"), bound, false, notes));
            }
            let p = best.len();
            let rooted = Rooted::new(&g, &td)?;
            let mut separators = 0;
            let cover_mask = divide_conquer(&adj, &rooted, all, &mut packer, cfg.alpha, w, &mut separators)?;
            let bound = (cfg.beta * (p * (w + 1)) as f64 * ((p + 1) as f64).log2()).floor() as usize;
            let cover: VertexSet = members(cover_mask).map(|i| g.id(i)).collect();
            if cover.len() > bound {
                return Err(Error::Invariant(format!("cover of {} vertices exceeds β·p(w+1)·log(p+1) = {bound}", cover.len())));
            }
            notes.push(format!("maximum packing {p}, {separators} separators"));
            Ok(base(EpBranch::Cover(cover), format!("β·p(w+1)·log(p+1) with p = {p}: {bound}"), bound, false, notes))
        }
    }
}

/// Repeatedly takes the deepest node whose subtree holds a family cycle, keeps
/// one such cycle and deletes that node's bag.
fn thomassen(g: &Graph, adj: &Adj, td: &TreeDecomposition, k: usize, fam: CycleFamily, budget: &mut Budget) -> Result<(EpBranch, usize)> {
    let rooted = Rooted::new(g, td)?;
    let sub = rooted.subtree_masks();
    let mut alive = full_mask(g.n());
    let mut packing = Vec::new();
    let mut cover: Mask = 0;
    let mut peeled = 0;
    while packing.len() < k {
        // deepest node: its subtree holds a cycle and no child's subtree does
        let mut holds = vec![false; rooted.bags.len()];
        let mut pick = None;
        for &t in &rooted.post {
            if rooted.children[t].iter().any(|&c| holds[c]) {
                holds[t] = true;
                continue;
            }
            if let Some(c) = find_member(adj, sub[t] & alive, fam, budget)? {
                holds[t] = true;
                pick = Some((t, c));
                break;
            }
        }
        let Some((t, c)) = pick else {
            return Ok((EpBranch::Cover(members(cover).map(|i| g.id(i)).collect()), peeled));
        };
        let bag = rooted.bag_mask(t) & alive;
        if c.iter().all(|&x| bag & bit(x) == 0) {
            return Err(Error::Invariant("a cycle below the deepest node misses its bag".into()));
        }
        packing.push(to_ids(g, &c));
        cover |= bag;
        alive &= !bag;
        peeled += 1;
    }
    Ok((EpBranch::Packing(packing), peeled))
}

fn components_of(adj: &Adj, mask: Mask) -> Vec<Mask> {
    let mut rest = mask;
    let mut out = Vec::new();
    while rest != 0 {
        let mut comp = bit(rest.trailing_zeros() as usize);
        let mut frontier = comp;
        while frontier != 0 {
            let reach = members(frontier).fold(0, |a, u| a | adj.nb[u]) & mask & !comp;
            comp |= reach;
            frontier = reach;
        }
        out.push(comp);
        rest &= !comp;
    }
    out
}

/// Cover of G[mask] through separators of at most two bags each.
fn divide_conquer(adj: &Adj, rooted: &Rooted, mask: Mask, packer: &mut Packer, alpha: f64, w: usize, separators: &mut usize) -> Result<Mask> {
    let p = packer.best(mask)?;
    if p == 0 {
        return Ok(0);
    }
    let limit = 2 * p / 3;
    let sub = rooted.subtree_masks();
    let mut large = vec![false; rooted.bags.len()];
    let mut heavy_child = vec![None; rooted.bags.len()];
    for &t in &rooted.post {
        let below = sub[t] & mask & !rooted.bag_mask(t);
        for comp in components_of(adj, below) {
            if packer.best(comp)? > limit {
                large[t] = true;
                heavy_child[t] = rooted.children[t].iter().copied().find(|&c| comp & !sub[c] == 0);
            }
        }
    }
    let root = *rooted.post.last().expect("nonempty decomposition");
    let sep = if !large[root] {
        rooted.bag_mask(root)
    } else {
        let t = rooted.post.iter().copied().find(|&t| large[t] && rooted.children[t].iter().all(|&c| !large[c])).expect("a deepest large node");
        let c = heavy_child[t].ok_or_else(|| Error::Invariant("the heavy component spans several subtrees".into()))?;
        rooted.bag_mask(t) | rooted.bag_mask(c)
    } & mask;
    let sep_size = sep.count_ones() as usize;
    if sep_size as f64 > 2.0 * alpha * (w + 1) as f64 {
        return Err(Error::Invariant(format!("separator of {sep_size} vertices exceeds 2α(w+1)")));
    }
    *separators += 1;
    let mut cover = sep;
    for comp in components_of(adj, mask & !sep) {
        if packer.best(comp)? > limit {
            return Err(Error::Invariant("a component beyond the separator keeps a large packing".into()));
        }
        cover |= divide_conquer(adj, rooted, comp, packer, alpha, w, separators)?;
    }
    Ok(cover)
}

pub fn ep_cycles(g: &Graph, k: usize, cfg: &EpConfig) -> Result<EpOutcome> {
    ep_family(g, k, CycleFamily::All, cfg)
}

pub fn ep_mod_cycles(g: &Graph, k: usize, m: usize, cfg: &EpConfig) -> Result<EpOutcome> {
    ep_family(g, k, CycleFamily::ZeroMod(m), cfg)
}

// Bag-state DP. A state gives every bag vertex its status in the chosen
// 2-regular subgraph: FREE (degree 0 so far), DONE (degree 2) or an open path
// end, stored as OPEN + the bag position of the path's other end.
const FREE: u8 = 0;
const DONE: u8 = 1;
const OPEN: u8 = 2;

type Table = HashMap<Vec<u8>, usize>;

fn relax(t: &mut Table, s: Vec<u8>, v: usize) {
    let e = t.entry(s).or_insert(v);
    if *e < v {
        *e = v;
    }
}

/// Moves a table from bag `from` to bag `to`, forgetting and introducing vertices.
fn rebase(table: Table, from: &[usize], to: &[usize]) -> Table {
    let pos_to: BTreeMap<usize, usize> = to.iter().enumerate().map(|(i, &v)| (v, i)).collect();
    let mut out = Table::new();
    'state: for (s, val) in table {
        let mut ns = vec![FREE; to.len()];
        for (i, &v) in from.iter().enumerate() {
            match pos_to.get(&v) {
                Some(&j) => {
                    ns[j] = if s[i] >= OPEN {
                        let partner = from[(s[i] - OPEN) as usize];
                        match pos_to.get(&partner) {
                            Some(&q) => OPEN + q as u8,
                            None => continue 'state,
                        }
                    } else {
                        s[i]
                    }
                }
                // a forgotten vertex may not be a path end
                None if s[i] >= OPEN => continue 'state,
                None => {}
            }
        }
        relax(&mut out, ns, val);
    }
    out
}

fn add_edge_state(s: &[u8], a: usize, b: usize) -> Option<(Vec<u8>, usize)> {
    let mut ns = s.to_vec();
    match (s[a], s[b]) {
        (DONE, _) | (_, DONE) => None,
        (FREE, FREE) => {
            ns[a] = OPEN + b as u8;
            ns[b] = OPEN + a as u8;
            Some((ns, 0))
        }
        (FREE, pb) | (pb, FREE) => {
            let (free, end) = if s[a] == FREE { (a, b) } else { (b, a) };
            let other = (pb - OPEN) as usize;
            ns[end] = DONE;
            ns[free] = OPEN + other as u8;
            ns[other] = OPEN + free as u8;
            Some((ns, 0))
        }
        (pa, pb) => {
            let (oa, ob) = ((pa - OPEN) as usize, (pb - OPEN) as usize);
            ns[a] = DONE;
            ns[b] = DONE;
            if oa == b {
                return Some((ns, 1));
            }
            ns[oa] = OPEN + ob as u8;
            ns[ob] = OPEN + oa as u8;
            Some((ns, 0))
        }
    }
}

/// Combines two partial solutions on the same bag; None when a degree exceeds 2.
/// Open path ends of both sides link up into longer paths or close into cycles.
fn join_states(x: &[u8], y: &[u8]) -> Option<(Vec<u8>, usize)> {
    let deg = |s: u8| match s {
        FREE => 0,
        DONE => 2,
        _ => 1,
    };
    let n = x.len();
    if (0..n).any(|i| deg(x[i]) + deg(y[i]) > 2) {
        return None;
    }
    let mut links: Vec<Vec<usize>> = vec![Vec::new(); n];
    for s in [x, y] {
        for i in 0..n {
            if s[i] >= OPEN {
                links[i].push((s[i] - OPEN) as usize);
            }
        }
    }
    let mut ns: Vec<u8> = (0..n).map(|i| if x[i] == DONE || y[i] == DONE || links[i].len() == 2 { DONE } else { FREE }).collect();
    let mut seen = vec![false; n];
    let mut closed = 0;
    for i in 0..n {
        if seen[i] || links[i].is_empty() {
            continue;
        }
        let mut comp = vec![i];
        seen[i] = true;
        let mut k = 0;
        while k < comp.len() {
            for &z in &links[comp[k]] {
                if !seen[z] {
                    seen[z] = true;
                    comp.push(z);
                }
            }
            k += 1;
        }
        let ends: Vec<usize> = comp.iter().copied().filter(|&z| links[z].len() == 1).collect();
        match ends.as_slice() {
            [] => closed += 1,
            [a, b] => {
                ns[*a] = OPEN + *b as u8;
                ns[*b] = OPEN + *a as u8;
            }
            _ => unreachable!("link components are paths or cycles"),
        }
    }
    Some((ns, closed))
}

/// Maximum number of vertex-disjoint cycles, by dynamic programming over `td`.
pub fn cycle_packing_dp(td: &TreeDecomposition, g: &Graph) -> Result<usize> {
    const MAX_WIDTH: usize = 8;
    let g = g.simple();
    td.validate(&g)?;
    if td.width > MAX_WIDTH {
        return Err(Error::TooLarge(format!("width {} above the dynamic program's limit {MAX_WIDTH}", td.width)));
    }
    if g.n() == 0 {
        return Ok(0);
    }
    let rooted = Rooted::new(&g, td)?;
    let bags: Vec<Vec<usize>> = rooted.bags.iter().map(|b| {
        let mut b = b.clone();
        b.sort_unstable();
        b
    }).collect();
    // each edge is introduced at the first post-order node holding both ends
    let mut edges_at: Vec<Vec<(usize, usize)>> = vec![Vec::new(); bags.len()];
    for &(u, v) in g.edges() {
        let t = rooted.post.iter().copied().find(|&t| bags[t].binary_search(&u).is_ok() && bags[t].binary_search(&v).is_ok());
        edges_at[t.expect("validated decomposition covers every edge")].push((u, v));
    }
    let mut tables: Vec<Option<Table>> = vec![None; bags.len()];
    for &t in &rooted.post {
        let mut table: Table = [(vec![FREE; bags[t].len()], 0)].into();
        for &c in &rooted.children[t] {
            let child = rebase(tables[c].take().expect("child done"), &bags[c], &bags[t]);
            let mut joined = Table::new();
            for (x, vx) in &table {
                for (y, vy) in &child {
                    if let Some((s, closed)) = join_states(x, y) {
                        relax(&mut joined, s, vx + vy + closed);
                    }
                }
            }
            table = joined;
        }
        for &(u, v) in &edges_at[t] {
            let (a, b) = (bags[t].binary_search(&u).unwrap(), bags[t].binary_search(&v).unwrap());
            let mut next = table.clone();
            for (s, val) in &table {
                if let Some((ns, closed)) = add_edge_state(s, a, b) {
                    relax(&mut next, ns, val + closed);
                }
            }
            table = next;
        }
        tables[t] = Some(table);
    }
    let root = *rooted.post.last().unwrap();
    let table = tables[root].take().unwrap();
    Ok(table.into_iter().filter(|(s, _)| s.iter().all(|&x| x < OPEN)).map(|(_, v)| v).max().unwrap_or(0))
}

/// A graph parameter that is positive on every graph of treewidth at least `threshold`
/// and computable by dynamic programming over a tree decomposition.
#[derive(Clone, Debug)]
pub struct ParameterPlugin {
    pub name: String,
    pub threshold: usize,
    pub dp: fn(&TreeDecomposition, &Graph) -> Result<usize>,
    /// P of a disjoint union is the sum over its components.
    pub sum_over_components: bool,
    pub max_width: usize,
}

impl ParameterPlugin {
    pub fn cycle_packing() -> ParameterPlugin {
        ParameterPlugin { name: "cycle packing".into(), threshold: 2, dp: cycle_packing_dp, sum_over_components: true, max_width: 8 }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default)]
#[derive(Default)]
pub struct FptConfig {
    /// Treewidth threshold k′; defaults to p²(k+1).
    pub k_prime: Option<usize>,
    pub solver: SolverConfig,
    pub pipeline: PipelineConfig,
}


#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub enum FptRoute {
    /// P computed exactly over a decomposition of this width.
    DynamicProgram { width: usize, value: usize },
    /// k+1 disjoint subgraphs of treewidth ≥ p, so P ≥ k+1.
    Packing { subgraphs: Vec<VertexSet> },
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct FptDecision {
    /// Whether P(G) ≤ k.
    pub holds: bool,
    pub k_prime: usize,
    pub route: FptRoute,
}

fn dp_value(g: &Graph, td: Option<TreeDecomposition>, plugin: &ParameterPlugin) -> Result<(usize, usize)> {
    if plugin.sum_over_components && !g.is_connected() && g.n() > 0 {
        let (mut total, mut width) = (0, 0);
        for comp in g.components() {
            let sub = g.induced(&g.set_of(comp))?;
            let (v, w) = dp_value(&sub, None, plugin)?;
            total += v;
            width = width.max(w);
        }
        return Ok((total, width));
    }
    let td = match td {
        Some(td) if td.width <= plugin.max_width => td,
        _ => {
            let (w, td) = heuristic_treewidth(g, Heuristic::MinFill);
            if w <= plugin.max_width {
                td
            } else {
                exact_treewidth_limited(g, 25)?.1
            }
        }
    };
    if td.width > plugin.max_width {
        return Err(Error::TooLarge(format!("no decomposition of width ≤ {} for {}", plugin.max_width, plugin.name)));
    }
    Ok(((plugin.dp)(&td, g)?, td.width))
}

/// Decides P(G) ≤ k: a large-treewidth certificate leads to k+1 disjoint
/// subgraphs of treewidth ≥ p (so P > k); otherwise P is computed over the decomposition.
pub fn fpt_decide(g: &Graph, k: usize, plugin: &ParameterPlugin, cfg: &FptConfig) -> Result<FptDecision> {
    let p = plugin.threshold.max(1);
    let k_prime = cfg.k_prime.unwrap_or(p * p * (k + 1)).max(1);
    match decompose_or_certify(g, k_prime, &cfg.solver) {
        Ok(TwOutcome::Decomposition(td)) => {
            let (value, width) = dp_value(g, Some(td), plugin)?;
            Ok(FptDecision { holds: value <= k, k_prime, route: FptRoute::DynamicProgram { width, value } })
        }
        outcome => {
            if g.is_connected() {
                if let Ok(res) = decompose_thm1(g, k + 1, p, &cfg.pipeline) {
                    if res.verify(g, &cfg.solver)? {
                        return Ok(FptDecision { holds: false, k_prime, route: FptRoute::Packing { subgraphs: res.subgraphs } });
                    }
                }
            }
            // the certificate alone is not used as an answer: fall back to the program
            let (value, width) = dp_value(g, None, plugin).map_err(|e| match outcome {
                Err(o) => o,
                Ok(_) => e,
            })?;
            Ok(FptDecision { holds: value <= k, k_prime, route: FptRoute::DynamicProgram { width, value } })
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::generators;
    use crate::treewidth::exact_treewidth;
    use proptest::prelude::*;
    use rand::Rng;

    /// Vertex subsets carrying a Hamiltonian cycle of admissible length, by Held–Karp.
    fn cyclic_sets(g: &Graph, fam: CycleFamily) -> Vec<bool> {
        let n = g.n();
        let mut adj = vec![vec![false; n]; n];
        for &(u, v) in g.edges() {
            adj[u][v] = true;
            adj[v][u] = true;
        }
        let mut ok = vec![false; 1 << n];
        for s in 0..n {
            // paths from s through vertices > s only
            let mut reach = vec![vec![false; n]; 1 << n];
            reach[1 << s][s] = true;
            for mask in 0usize..1 << n {
                if mask & (1 << s) == 0 || mask & ((1 << s) - 1) != 0 {
                    continue;
                }
                for e in 0..n {
                    if !reach[mask][e] {
                        continue;
                    }
                    let len = mask.count_ones() as usize;
                    if adj[e][s] && fam.admits(len) {
                        ok[mask] = true;
                    }
                    for x in 0..n {
                        if adj[e][x] && mask & (1 << x) == 0 && x > s {
                            reach[mask | 1 << x][x] = true;
                        }
                    }
                }
            }
        }
        ok
    }

    fn oracle_packing(g: &Graph, fam: CycleFamily) -> usize {
        let n = g.n();
        let ok = cyclic_sets(g, fam);
        let mut best = vec![0usize; 1 << n];
        for mask in 1usize..1 << n {
            let v = mask.trailing_zeros() as usize;
            let mut b = best[mask & !(1 << v)];
            let rest = mask & !(1 << v);
            let mut sub = rest;
            loop {
                let s = sub | 1 << v;
                if ok[s] {
                    b = b.max(1 + best[mask & !s]);
                }
                if sub == 0 {
                    break;
                }
                sub = (sub - 1) & rest;
            }
            best[mask] = b;
        }
        best[(1 << n) - 1]
    }

    fn random_graph(rng: &mut impl Rng, max_n: usize) -> Graph {
        let n = rng.random_range(1..=max_n);
        let p = rng.random_range(0.1..0.7);
        generators::gnp(n, p, rng)
    }

    fn small_cfg(strategy: EpStrategy) -> EpConfig {
        EpConfig { strategy, try_decomposition: false, ..Default::default() }
    }

    #[test]
    fn forest_gets_empty_cover() {
        let g = generators::random_tree(12, &mut generators::rng(1));
        for k in 1..4 {
            let o = ep_cycles(&g, k, &EpConfig::default()).unwrap();
            assert_eq!(o.branch, EpBranch::Cover(VertexSet::new()));
            assert!(o.verify(&g, 1 << 20).unwrap());
        }
    }

    #[test]
    fn triangle_packs_one() {
        let g = generators::complete(3);
        for s in [EpStrategy::Thomassen, EpStrategy::DivideConquer] {
            let o = ep_cycles(&g, 1, &small_cfg(s)).unwrap();
            assert!(matches!(&o.branch, EpBranch::Packing(p) if p.len() == 1));
        }
    }

    #[test]
    fn two_triangles_with_path() {
        let mut g = generators::disjoint_union(&generators::complete(3), &generators::path(2));
        let g2 = generators::complete(3);
        g = generators::disjoint_union(&g, &g2);
        g.add_edge(2, 3).unwrap();
        g.add_edge(4, 5).unwrap();
        assert_eq!(oracle_packing(&g, CycleFamily::All), 2);
        for s in [EpStrategy::Thomassen, EpStrategy::DivideConquer] {
            let o = ep_cycles(&g, 2, &small_cfg(s)).unwrap();
            assert!(matches!(&o.branch, EpBranch::Packing(p) if p.len() == 2));
            assert!(o.verify(&g, 1 << 20).unwrap());
            let o = ep_cycles(&g, 3, &small_cfg(s)).unwrap();
            assert!(matches!(o.branch, EpBranch::Cover(_)));
            assert!(o.verify(&g, 1 << 20).unwrap());
        }
    }

    #[test]
    fn mod_cycle_examples() {
        let cfg = EpConfig::default();
        let o = ep_mod_cycles(&generators::cycle(6), 1, 3, &cfg).unwrap();
        assert!(matches!(&o.branch, EpBranch::Packing(p) if p[0].len() == 6));
        let c5 = generators::cycle(5);
        let o = ep_mod_cycles(&c5, 1, 3, &cfg).unwrap();
        assert!(matches!(o.branch, EpBranch::Cover(_)));
        assert!(o.verify(&c5, 1 << 20).unwrap());
        assert_eq!(oracle_packing(&c5, CycleFamily::ZeroMod(3)), 0);
        let two = generators::disjoint_union(&generators::cycle(4), &generators::cycle(4));
        let o = ep_mod_cycles(&two, 2, 2, &cfg).unwrap();
        assert!(matches!(&o.branch, EpBranch::Packing(p) if p.len() == 2));
        assert!(ep_mod_cycles(&two, 1, 1, &cfg).is_err());
    }

    #[test]
    fn packing_search_matches_oracle() {
        let mut rng = generators::rng(11);
        for _ in 0..60 {
            let g = random_graph(&mut rng, 9);
            for fam in [CycleFamily::All, CycleFamily::ZeroMod(2), CycleFamily::ZeroMod(3)] {
                let p = max_cycle_packing(&g, fam, 1 << 24).unwrap();
                assert_eq!(p.len(), oracle_packing(&g, fam));
                assert!(p.iter().all(|c| fam.is_member(&g, c)));
            }
        }
    }

    #[test]
    fn dp_examples() {
        let tri = generators::complete(3);
        assert_eq!(cycle_packing_dp(&exact_treewidth(&tri).unwrap().1, &tri).unwrap(), 1);
        let theta = generators::theta(3);
        assert_eq!(cycle_packing_dp(&exact_treewidth(&theta).unwrap().1, &theta).unwrap(), 1);
        let grid = generators::grid(3, 4);
        let td = exact_treewidth(&grid).unwrap().1;
        assert_eq!(cycle_packing_dp(&td, &grid).unwrap(), oracle_packing(&grid, CycleFamily::All));
        let k9 = generators::complete(9);
        assert_eq!(cycle_packing_dp(&exact_treewidth(&k9).unwrap().1, &k9).unwrap(), 3);
        let k10 = generators::complete(10);
        assert!(matches!(cycle_packing_dp(&exact_treewidth(&k10).unwrap().1, &k10), Err(Error::TooLarge(_))));
    }

    #[test]
    fn dp_on_heuristic_decompositions() {
        let mut rng = generators::rng(5);
        for _ in 0..40 {
            let g = random_graph(&mut rng, 9);
            let (w, td) = heuristic_treewidth(&g, Heuristic::MinFill);
            if w <= 8 {
                assert_eq!(cycle_packing_dp(&td, &g).unwrap(), oracle_packing(&g, CycleFamily::All));
            }
        }
    }

    #[test]
    fn fpt_examples() {
        let plugin = ParameterPlugin::cycle_packing();
        let cfg = FptConfig::default();
        let mut three = generators::complete(3);
        for _ in 0..2 {
            three = generators::disjoint_union(&three, &generators::complete(3));
        }
        assert!(fpt_decide(&three, 3, &plugin, &cfg).unwrap().holds);
        assert!(!fpt_decide(&three, 2, &plugin, &cfg).unwrap().holds);
        let tree = generators::random_tree(10, &mut generators::rng(2));
        assert!(fpt_decide(&tree, 0, &plugin, &cfg).unwrap().holds);
        let grid = generators::grid(4, 4);
        let truth = oracle_packing(&grid, CycleFamily::All);
        for k in 0..5 {
            assert_eq!(fpt_decide(&grid, k, &plugin, &cfg).unwrap().holds, truth <= k);
        }
    }

    #[test]
    fn large_treewidth_answers_by_packing() {
        let g = generators::complete(9);
        let d = fpt_decide(&g, 0, &ParameterPlugin::cycle_packing(), &FptConfig::default()).unwrap();
        assert!(!d.holds);
        assert!(matches!(d.route, FptRoute::Packing { .. }));
    }

    #[test]
    fn decomposition_route_on_grid() {
        let g = generators::grid(12, 12);
        let o = ep_cycles(&g, 2, &EpConfig::default()).unwrap();
        assert!(o.from_decomposition);
        assert!(o.verify(&g, 1 << 20).unwrap());
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(64))]

        #[test]
        fn ep_branches_verify(seed in any::<u64>(), k in 1usize..4, dc in any::<bool>()) {
            let g = random_graph(&mut generators::rng(seed), 8);
            let s = if dc { EpStrategy::DivideConquer } else { EpStrategy::Thomassen };
            let o = ep_cycles(&g, k, &small_cfg(s)).unwrap();
            prop_assert!(o.verify(&g, 1 << 22).unwrap());
            if oracle_packing(&g, CycleFamily::All) >= k {
                prop_assert!(matches!(o.branch, EpBranch::Packing(_)));
            }
        }

        #[test]
        fn dp_matches_oracle(seed in any::<u64>()) {
            let g = random_graph(&mut generators::rng(seed), 9);
            let td = exact_treewidth(&g).unwrap().1;
            prop_assert_eq!(cycle_packing_dp(&td, &g).unwrap(), oracle_packing(&g, CycleFamily::All));
        }
    }
}
