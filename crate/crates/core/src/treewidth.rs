//! Tree decompositions, exact treewidth for small graphs, elimination
//! heuristics, and lower-bound certificates that replay against the graph.

use std::collections::{BTreeSet, HashMap};
use std::fmt::Write as _;

use serde::{Deserialize, Serialize};

use crate::cuts::{Rational, SolverConfig};
use crate::error::{Error, Result};
use crate::graph::{Graph, VertexId, VertexSet};

pub const DEFAULT_EXACT_LIMIT: usize = 18;
const HARD_EXACT_LIMIT: usize = 25;

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct TreeDecomposition {
    pub bags: Vec<VertexSet>,
    pub tree_edges: Vec<(usize, usize)>,
    pub width: usize,
}

impl TreeDecomposition {
    fn width_of(bags: &[VertexSet]) -> usize {
        bags.iter().map(|b| b.len()).max().unwrap_or(1).saturating_sub(1)
    }

    /// Checks the tree shape, vertex and edge coverage, connected traces and the stored width.
    pub fn validate(&self, g: &Graph) -> Result<()> {
        let nb = self.bags.len();
        let bad = |m: String| Err(Error::Invariant(m));
        if nb == 0 {
            return if g.n() == 0 { Ok(()) } else { bad("no bags for a nonempty graph".into()) };
        }
        if self.tree_edges.len() != nb - 1 {
            return bad(format!("{} tree edges for {} bags", self.tree_edges.len(), nb));
        }
        let mut tadj = vec![Vec::new(); nb];
        for &(a, b) in &self.tree_edges {
            if a >= nb || b >= nb || a == b {
                return bad(format!("tree edge ({a}, {b}) is invalid"));
            }
            tadj[a].push(b);
            tadj[b].push(a);
        }
        let reach = |start: usize, allowed: &dyn Fn(usize) -> bool| {
            let mut seen = vec![false; nb];
            let mut stack = vec![start];
            seen[start] = true;
            let mut count = 1;
            while let Some(x) = stack.pop() {
                for &y in &tadj[x] {
                    if !seen[y] && allowed(y) {
                        seen[y] = true;
                        count += 1;
                        stack.push(y);
                    }
                }
            }
            count
        };
        if reach(0, &|_| true) != nb {
            return bad("tree is disconnected".into());
        }
        let mut holders: Vec<Vec<usize>> = vec![Vec::new(); g.n()];
        for (k, bag) in self.bags.iter().enumerate() {
            for &v in bag {
                let i = g.index_of(v).ok_or(Error::UnknownVertex(v))?;
                holders[i].push(k);
            }
        }
        for (i, hs) in holders.iter().enumerate() {
            if hs.is_empty() {
                return bad(format!("vertex {} is in no bag", g.id(i)));
            }
            let member = |k: usize| self.bags[k].contains(&g.id(i));
            if reach(hs[0], &member) != hs.len() {
                return bad(format!("bags holding vertex {} are not connected", g.id(i)));
            }
        }
        for &(u, v) in g.edges() {
            let (a, b) = (g.id(u), g.id(v));
            if !holders[u].iter().any(|&k| self.bags[k].contains(&b)) {
                return bad(format!("edge {a}-{b} is not covered"));
            }
        }
        if self.width != Self::width_of(&self.bags) {
            return bad(format!("stored width {} differs from bags", self.width));
        }
        Ok(())
    }

    /// PACE `.td` text; vertices are numbered by their position in `g` plus one.
    pub fn to_pace(&self, g: &Graph) -> Result<String> {
        let mut out = String::new();
        let top = self.bags.iter().map(|b| b.len()).max().unwrap_or(0);
        writeln!(out, "s td {} {} {}", self.bags.len(), top, g.n()).unwrap();
        for (k, bag) in self.bags.iter().enumerate() {
            write!(out, "b {}", k + 1).unwrap();
            for &v in bag {
                let i = g.index_of(v).ok_or(Error::UnknownVertex(v))?;
                write!(out, " {}", i + 1).unwrap();
            }
            out.push('\n');
        }
        for &(a, b) in &self.tree_edges {
            writeln!(out, "{} {}", a + 1, b + 1).unwrap();
        }
        Ok(out)
    }

    pub fn parse_pace(text: &str, g: &Graph) -> Result<TreeDecomposition> {
        let perr = |line: usize, m: &str| Error::Parse { line, message: m.to_string() };
        let mut bags: Vec<Option<VertexSet>> = Vec::new();
        let mut edges = Vec::new();
        let mut header = false;
        for (k, raw) in text.lines().enumerate() {
            let line = k + 1;
            let toks: Vec<&str> = raw.split_whitespace().collect();
            let nums = |ts: &[&str]| -> Result<Vec<usize>> {
                ts.iter().map(|t| t.parse::<usize>().map_err(|_| perr(line, "expected an integer"))).collect()
            };
            match toks.first().copied() {
                None | Some("c") => {}
                Some("s") => {
                    let v = nums(toks.get(2..).unwrap_or(&[]))?;
                    if toks.get(1) != Some(&"td") || v.len() != 3 {
                        return Err(perr(line, "header must be `s td <bags> <max bag> <n>`"));
                    }
                    if v[2] != g.n() {
                        return Err(perr(line, "vertex count differs from the graph"));
                    }
                    bags = vec![None; v[0]];
                    header = true;
                }
                Some("b") => {
                    let v = nums(&toks[1..])?;
                    let id = *v.first().ok_or_else(|| perr(line, "bag line without index"))?;
                    if !header || id == 0 || id > bags.len() {
                        return Err(perr(line, "bag index out of range"));
                    }
                    let mut bag = VertexSet::new();
                    for &x in &v[1..] {
                        if x == 0 || x > g.n() {
                            return Err(perr(line, "vertex out of range"));
                        }
                        bag.insert(g.id(x - 1));
                    }
                    bags[id - 1] = Some(bag);
                }
                Some(_) => {
                    let v = nums(&toks)?;
                    if v.len() != 2 || v.iter().any(|&x| x == 0 || x > bags.len()) {
                        return Err(perr(line, "tree edge must name two bags"));
                    }
                    edges.push((v[0] - 1, v[1] - 1));
                }
            }
        }
        if !header {
            return Err(perr(0, "missing header"));
        }
        let bags: Vec<VertexSet> = bags.into_iter().map(|b| b.unwrap_or_default()).collect();
        let width = Self::width_of(&bags);
        Ok(TreeDecomposition { bags, tree_edges: edges, width })
    }
}

fn simple_adjacency(g: &Graph) -> Vec<BTreeSet<usize>> {
    let mut adj = vec![BTreeSet::new(); g.n()];
    for &(u, v) in g.edges() {
        adj[u].insert(v);
        adj[v].insert(u);
    }
    adj
}

/// Decomposition whose bags are {v} ∪ later neighbors of v in the fill graph.
pub fn decomposition_from_order(g: &Graph, order: &[usize]) -> TreeDecomposition {
    let n = g.n();
    assert_eq!(order.len(), n, "order must list every vertex");
    let mut pos = vec![0; n];
    for (p, &v) in order.iter().enumerate() {
        pos[v] = p;
    }
    let mut adj = simple_adjacency(g);
    let mut bags = Vec::with_capacity(n);
    let mut parent = vec![None; n];
    for (p, &v) in order.iter().enumerate() {
        let later: Vec<usize> = adj[v].iter().copied().filter(|&u| pos[u] > p).collect();
        for (a, &x) in later.iter().enumerate() {
            for &y in &later[a + 1..] {
                adj[x].insert(y);
                adj[y].insert(x);
            }
        }
        parent[p] = later.iter().map(|&u| pos[u]).min();
        let mut bag: VertexSet = later.iter().map(|&u| g.id(u)).collect();
        bag.insert(g.id(v));
        bags.push(bag);
    }
    let mut tree_edges = Vec::new();
    let mut prev_root: Option<usize> = None;
    for p in 0..n {
        match parent[p] {
            Some(q) => tree_edges.push((p, q)),
            None => {
                if let Some(r) = prev_root {
                    tree_edges.push((r, p));
                }
                prev_root = Some(p);
            }
        }
    }
    let width = TreeDecomposition::width_of(&bags);
    TreeDecomposition { bags, tree_edges, width }
}

fn masks(g: &Graph) -> Vec<u64> {
    let mut adj = vec![0u64; g.n()];
    for &(u, v) in g.edges() {
        adj[u] |= 1 << v;
        adj[v] |= 1 << u;
    }
    adj
}

/// Number of vertices outside `rest ∪ {v}` adjacent to the component of v in G[rest ∪ {v}].
fn q_size(adj: &[u64], rest: u64, v: usize) -> u32 {
    let mut comp = 1u64 << v;
    let mut frontier = comp;
    let mut nb = 0u64;
    while frontier != 0 {
        let mut f = frontier;
        let mut fresh = 0u64;
        while f != 0 {
            let u = f.trailing_zeros() as usize;
            f &= f - 1;
            nb |= adj[u];
            fresh |= adj[u] & rest;
        }
        frontier = fresh & !comp;
        comp |= frontier;
    }
    (nb & !comp & !rest).count_ones()
}

pub fn exact_treewidth(g: &Graph) -> Result<(usize, TreeDecomposition)> {
    exact_treewidth_limited(g, DEFAULT_EXACT_LIMIT)
}

/// Subset dynamic programme over elimination orderings.
pub fn exact_treewidth_limited(g: &Graph, limit: usize) -> Result<(usize, TreeDecomposition)> {
    let n = g.n();
    if n > limit.min(HARD_EXACT_LIMIT) {
        return Err(Error::TooLarge(format!(
            "exact treewidth is limited to {} vertices, graph has {n}; use bounds instead",
            limit.min(HARD_EXACT_LIMIT)
        )));
    }
    if n == 0 {
        return Ok((0, TreeDecomposition { bags: vec![], tree_edges: vec![], width: 0 }));
    }
    let adj = masks(g);
    let size = 1usize << n;
    let mut tw = vec![u8::MAX; size];
    let mut choice = vec![0u8; size];
    tw[0] = 0;
    for s in 1..size {
        let mut best = u8::MAX;
        let mut bv = 0u8;
        let mut bits = s as u64;
        while bits != 0 {
            let v = bits.trailing_zeros() as usize;
            bits &= bits - 1;
            let rest = s as u64 & !(1 << v);
            let prev = tw[rest as usize];
            if prev >= best {
                continue;
            }
            let val = prev.max(q_size(&adj, rest, v) as u8);
            if val < best {
                best = val;
                bv = v as u8;
            }
        }
        tw[s] = best;
        choice[s] = bv;
    }
    let mut order = Vec::with_capacity(n);
    let mut s = size - 1;
    while s != 0 {
        let v = choice[s] as usize;
        order.push(v);
        s &= !(1 << v);
    }
    order.reverse();
    let td = decomposition_from_order(g, &order);
    let width = tw[size - 1] as usize;
    debug_assert_eq!(td.width, width);
    Ok((width, td))
}

/// Branch and bound over elimination orders with memoized eliminated sets.
pub fn treewidth_branch_and_bound(g: &Graph) -> Result<usize> {
    let n = g.n();
    if n > 30 {
        return Err(Error::TooLarge(format!("branch and bound on {n} vertices")));
    }
    if n == 0 {
        return Ok(0);
    }
    fn rec(adj: &[u64], remaining: u64, cur: usize, best: &mut usize, memo: &mut HashMap<u64, usize>) {
        let r = remaining.count_ones() as usize;
        if r <= cur + 1 {
            *best = (*best).min(cur);
            return;
        }
        if cur >= *best {
            return;
        }
        if memo.get(&remaining).is_some_and(|&w| w <= cur) {
            return;
        }
        memo.insert(remaining, cur);
        let mut bits = remaining;
        while bits != 0 {
            let v = bits.trailing_zeros() as usize;
            bits &= bits - 1;
            let nv = adj[v] & remaining & !(1 << v);
            let w = cur.max(nv.count_ones() as usize);
            if w >= *best {
                continue;
            }
            let mut next = adj.to_vec();
            let mut nbits = nv;
            while nbits != 0 {
                let u = nbits.trailing_zeros() as usize;
                nbits &= nbits - 1;
                next[u] |= nv & !(1 << u);
            }
            rec(&next, remaining & !(1 << v), w, best, memo);
        }
    }
    let adj = masks(g);
    let mut best = heuristic_treewidth(g, Heuristic::MinFill).0;
    rec(&adj, (1u64 << n) - 1, 0, &mut best, &mut HashMap::new());
    Ok(best)
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum Heuristic {
    MinDegree,
    MinFill,
}

fn fill_in(adj: &[BTreeSet<usize>], v: usize) -> usize {
    let nb: Vec<usize> = adj[v].iter().copied().collect();
    let mut missing = 0;
    for (a, &x) in nb.iter().enumerate() {
        for &y in &nb[a + 1..] {
            if !adj[x].contains(&y) {
                missing += 1;
            }
        }
    }
    missing
}

/// Greedy elimination order; ties broken by smallest index.
pub fn elimination_order(g: &Graph, h: Heuristic) -> Vec<usize> {
    let n = g.n();
    let mut adj = simple_adjacency(g);
    let score = |adj: &[BTreeSet<usize>], v: usize| match h {
        Heuristic::MinDegree => adj[v].len(),
        Heuristic::MinFill => fill_in(adj, v),
    };
    let mut cur: Vec<usize> = (0..n).map(|v| score(&adj, v)).collect();
    let mut queue: BTreeSet<(usize, usize)> = (0..n).map(|v| (cur[v], v)).collect();
    let mut order = Vec::with_capacity(n);
    while let Some((_, v)) = queue.pop_first() {
        order.push(v);
        let nb: Vec<usize> = adj[v].iter().copied().collect();
        for &u in &nb {
            adj[u].remove(&v);
        }
        for (a, &x) in nb.iter().enumerate() {
            for &y in &nb[a + 1..] {
                adj[x].insert(y);
                adj[y].insert(x);
            }
        }
        adj[v].clear();
        let mut touched: BTreeSet<usize> = nb.iter().copied().collect();
        if h == Heuristic::MinFill {
            for &u in &nb {
                touched.extend(adj[u].iter().copied());
            }
        }
        for u in touched {
            if queue.remove(&(cur[u], u)) {
                cur[u] = score(&adj, u);
                queue.insert((cur[u], u));
            }
        }
    }
    order
}

pub fn heuristic_treewidth(g: &Graph, h: Heuristic) -> (usize, TreeDecomposition) {
    let td = decomposition_from_order(g, &elimination_order(g, h));
    (td.width, td)
}

/// Upper bound: the better of min-degree and min-fill.
pub fn tw_upper_bound(g: &Graph, h: Heuristic) -> (usize, TreeDecomposition) {
    heuristic_treewidth(g, h)
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum MinorOp {
    Delete(VertexId),
    /// Contract the edge between the two vertices; the first keeps its id.
    Contract(VertexId, VertexId),
}

/// Applies `ops` to the simple graph of `g` and returns the resulting minor adjacency.
fn apply_minor_ops(g: &Graph, ops: &[MinorOp]) -> Result<Vec<Option<BTreeSet<usize>>>> {
    let mut adj: Vec<Option<BTreeSet<usize>>> = simple_adjacency(g).into_iter().map(Some).collect();
    let idx = |v: VertexId| g.index_of(v).ok_or(Error::UnknownVertex(v));
    for op in ops {
        match *op {
            MinorOp::Delete(v) => {
                let i = idx(v)?;
                let nb = adj[i].take().ok_or_else(|| Error::Invariant(format!("vertex {v} already removed")))?;
                for u in nb {
                    adj[u].as_mut().expect("live neighbor").remove(&i);
                }
            }
            MinorOp::Contract(keep, gone) => {
                let (k, x) = (idx(keep)?, idx(gone)?);
                let live_edge = adj[k].as_ref().is_some_and(|s| s.contains(&x));
                if !live_edge {
                    return Err(Error::Invariant(format!("{keep} and {gone} are not adjacent in the minor")));
                }
                let nb = adj[x].take().expect("live endpoint");
                for u in nb {
                    let su = adj[u].as_mut().expect("live neighbor");
                    su.remove(&x);
                    if u != k {
                        su.insert(k);
                        adj[k].as_mut().expect("live").insert(u);
                    }
                }
            }
        }
    }
    Ok(adj)
}

/// Minor-min-width: repeatedly contract a minimum-degree vertex into its
/// lowest-degree neighbor; the largest minimum degree seen bounds tw from below.
pub fn minor_min_width(g: &Graph) -> (usize, Vec<MinorOp>) {
    let n = g.n();
    let mut adj: Vec<Option<BTreeSet<usize>>> = simple_adjacency(g).into_iter().map(Some).collect();
    let mut alive = n;
    let mut ops = Vec::new();
    let (mut lb, mut witness_len) = (0usize, 0usize);
    while alive >= 2 {
        let (d, v) = (0..n).filter_map(|i| adj[i].as_ref().map(|s| (s.len(), i))).min().expect("alive vertex");
        if d > lb {
            lb = d;
            witness_len = ops.len();
        }
        if d == 0 {
            adj[v] = None;
            ops.push(MinorOp::Delete(g.id(v)));
        } else {
            let nb = adj[v].take().expect("alive");
            let u = *nb.iter().min_by_key(|&&u| (adj[u].as_ref().map_or(0, |s| s.len()), u)).expect("neighbor");
            for &x in &nb {
                let sx = adj[x].as_mut().expect("live");
                sx.remove(&v);
                if x != u {
                    sx.insert(u);
                    adj[u].as_mut().expect("live").insert(x);
                }
            }
            ops.push(MinorOp::Contract(g.id(u), g.id(v)));
        }
        alive -= 1;
    }
    ops.truncate(witness_len);
    (lb, ops)
}

/// max(0, ⌈α·t/(3Δ)⌉ − 1).
pub fn tw_lower_bound_from_well_linked(t_size: usize, alpha: Rational, delta: usize) -> usize {
    assert!(delta >= 1, "max degree must be positive");
    let num = *alpha.numer() as u128 * t_size as u128;
    let den = *alpha.denom() as u128 * 3 * delta as u128;
    (num.div_ceil(den) as usize).saturating_sub(1)
}

/// Bracket for tw given a verified node-well-linked set of size `x_size`.
///
/// A bag separating the set so that no component keeps more than half of it
/// must hold the shared vertices plus one vertex per crossing path, which
/// forces tw + 1 ≥ x/3. The upper end assumes `x_size` is the largest such set.
pub fn node_well_linked_bounds(x_size: usize) -> (usize, usize) {
    (x_size.div_ceil(3).saturating_sub(1), 4 * x_size)
}

/// Replayable evidence that tw(G) is at least some value.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum TwProof {
    /// Exact computation; replay recomputes it.
    Exact { width: usize },
    /// A minor reached by the listed operations has minimum degree `min_degree`.
    Minor { ops: Vec<MinorOp>, min_degree: usize },
    /// `terminals` are α-well-linked and the graph has maximum degree `max_degree`.
    WellLinked { terminals: VertexSet, alpha: Rational, max_degree: usize },
}

impl TwProof {
    pub fn lower_bound(&self) -> usize {
        match self {
            TwProof::Exact { width } => *width,
            TwProof::Minor { min_degree, .. } => *min_degree,
            TwProof::WellLinked { terminals, alpha, max_degree } => {
                tw_lower_bound_from_well_linked(terminals.len(), *alpha, (*max_degree).max(1))
            }
        }
    }

    /// Re-derives the claim from `g` alone.
    pub fn replay(&self, g: &Graph, cfg: &SolverConfig) -> Result<bool> {
        match self {
            TwProof::Exact { width } => Ok(exact_treewidth_limited(g, cfg.exact_limit.max(DEFAULT_EXACT_LIMIT))?.0 == *width),
            TwProof::Minor { ops, min_degree } => {
                let adj = apply_minor_ops(g, ops)?;
                let live: Vec<usize> = adj.iter().flatten().map(|s| s.len()).collect();
                Ok(*min_degree == 0 || (!live.is_empty() && live.iter().all(|&d| d >= *min_degree)))
            }
            TwProof::WellLinked { terminals, alpha, max_degree } => {
                if g.max_degree() != *max_degree {
                    return Ok(false);
                }
                let exact = SolverConfig { mode: crate::cuts::SolverMode::Exact, ..cfg.clone() };
                Ok(crate::well_linked::check_alpha_well_linked(g, terminals, *alpha, &exact)?.is_none())
            }
        }
    }
}

/// Best available lower bound with its proof: exact when small, else minor-min-width.
pub fn tw_lower_bound(g: &Graph, exact_limit: usize) -> TwProof {
    if g.n() <= exact_limit.min(HARD_EXACT_LIMIT) {
        if let Ok((w, _)) = exact_treewidth_limited(g, exact_limit) {
            return TwProof::Exact { width: w };
        }
    }
    let (lb, ops) = minor_min_width(g);
    TwProof::Minor { ops, min_degree: lb }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct TwBound {
    pub lower: usize,
    pub upper: usize,
    pub lower_witness: TwProof,
    pub upper_witness: TreeDecomposition,
}

pub fn tw_bounds(g: &Graph, exact_limit: usize) -> TwBound {
    let lower_witness = tw_lower_bound(g, exact_limit);
    let (upper, upper_witness) = match &lower_witness {
        TwProof::Exact { .. } => exact_treewidth_limited(g, exact_limit).expect("already computed"),
        _ => {
            let a = heuristic_treewidth(g, Heuristic::MinFill);
            let b = heuristic_treewidth(g, Heuristic::MinDegree);
            if b.0 < a.0 { b } else { a }
        }
    };
    TwBound { lower: lower_witness.lower_bound(), upper, lower_witness, upper_witness }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum TwOutcome {
    Decomposition(TreeDecomposition),
    Certificate(TwProof),
}

/// Either a decomposition of width at most 4w or a proof that tw > w.
pub fn decompose_or_certify(g: &Graph, w: usize, cfg: &SolverConfig) -> Result<TwOutcome> {
    if w < 1 {
        return Err(Error::Precondition("w must be at least 1".into()));
    }
    if g.n() <= cfg.exact_limit.min(HARD_EXACT_LIMIT) {
        let (tw, td) = exact_treewidth_limited(g, cfg.exact_limit)?;
        return Ok(if tw > w { TwOutcome::Certificate(TwProof::Exact { width: tw }) } else { TwOutcome::Decomposition(td) });
    }
    let (lb, ops) = minor_min_width(g);
    if lb > w {
        return Ok(TwOutcome::Certificate(TwProof::Minor { ops, min_degree: lb }));
    }
    let (ub, td) = heuristic_treewidth(g, Heuristic::MinFill);
    if ub <= 4 * w {
        return Ok(TwOutcome::Decomposition(td));
    }
    if g.is_connected() && g.max_degree() > 0 {
        let cert = crate::well_linked::find_well_linked_set(g, cfg)?;
        let proof = TwProof::WellLinked { terminals: cert.terminal_set, alpha: cert.alpha, max_degree: g.max_degree() };
        if proof.lower_bound() > w {
            return Ok(TwOutcome::Certificate(proof));
        }
    }
    Err(Error::Undecided(format!("min-fill width {ub} exceeds 4·{w} and lower bounds reach only {lb}")))
}
