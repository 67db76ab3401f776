//! Sparsest, minimum-conductance and balanced cuts.
//!
//! Each solver enumerates bipartitions exactly when the instance is small
//! enough and otherwise falls back to spectral sweeps refined by local moves
//! and min-cut completion. Returned cuts record whether they are exact.

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::flow::{min_edge_cut, min_edge_cut_limited};
use crate::generators;
use crate::graph::{Graph, VertexSet};
use crate::spectral;

pub type Rational = num_rational::Ratio<u64>;

pub fn ratio(num: u64, den: u64) -> Rational {
    Rational::new(num, den)
}

pub fn to_f64(r: &Rational) -> f64 {
    *r.numer() as f64 / *r.denom() as f64
}

/// Largest fraction with denominator 2^20 not above `x` (and at least 1/2^20 for positive x).
pub fn rational_below(x: f64) -> Rational {
    const D: u64 = 1 << 20;
    if x <= 0.0 {
        return Rational::new(0, 1);
    }
    let n = ((x * D as f64).floor() as u64).max(1);
    Rational::new(n, D)
}

/// a/b < c/d without division.
pub(crate) fn frac_lt(a: u64, b: u64, c: u64, d: u64) -> bool {
    (a as u128) * (d as u128) < (c as u128) * (b as u128)
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum SolverMode {
    Exact,
    Heuristic,
    Auto,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct SolverConfig {
    pub mode: SolverMode,
    /// Largest vertex count enumerated exhaustively.
    pub exact_limit: usize,
    /// Largest terminal count for terminal-split enumeration with min-cut completion.
    pub terminal_limit: usize,
    /// Approximation factor assumed by bound checks downstream.
    pub arv_factor: f64,
    pub seed: u64,
    /// Required balance of `balanced_cut`.
    pub balance_gamma: Rational,
    /// `balanced_cut` needs strictly more marked vertices than this.
    pub balance_floor: usize,
    /// Random starts for the heuristic.
    pub restarts: usize,
}

impl Default for SolverConfig {
    fn default() -> Self {
        SolverConfig {
            mode: SolverMode::Auto,
            exact_limit: 18,
            terminal_limit: 14,
            arv_factor: 1.0,
            seed: 0,
            balance_gamma: Rational::new(1, 4),
            balance_floor: 2,
            restarts: 3,
        }
    }
}

impl SolverConfig {
    pub fn exact() -> Self {
        SolverConfig { mode: SolverMode::Exact, ..Self::default() }
    }

    pub fn heuristic() -> Self {
        SolverConfig { mode: SolverMode::Heuristic, ..Self::default() }
    }

    pub fn with_seed(&self, seed: u64) -> Self {
        SolverConfig { seed, ..self.clone() }
    }

    fn allows_exact(&self) -> bool {
        self.mode != SolverMode::Heuristic
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Cut {
    pub side_a: VertexSet,
    pub side_b: VertexSet,
    pub crossing: usize,
    /// crossing / min(|T∩A|, |T∩B|) when a terminal set was given and both sides hold terminals.
    pub sparsity: Option<Rational>,
    /// crossing / min(|E(A)|, |E(B)|) when both sides have internal edges.
    pub conductance: Option<Rational>,
    /// True when the solver proved optimality for its objective.
    pub exact: bool,
}

impl Cut {
    pub fn evaluate(g: &Graph, in_a: &[bool], terminals: Option<&[bool]>, exact: bool) -> Cut {
        let mut crossing = 0u64;
        let (mut ea, mut eb) = (0u64, 0u64);
        for &(u, v) in g.edges() {
            match (in_a[u], in_a[v]) {
                (true, true) => ea += 1,
                (false, false) => eb += 1,
                _ => crossing += 1,
            }
        }
        let sparsity = terminals.and_then(|t| {
            let ta = (0..g.n()).filter(|&i| t[i] && in_a[i]).count() as u64;
            let tb = (0..g.n()).filter(|&i| t[i] && !in_a[i]).count() as u64;
            (ta > 0 && tb > 0).then(|| Rational::new(crossing, ta.min(tb)))
        });
        let conductance = (ea > 0 && eb > 0).then(|| Rational::new(crossing, ea.min(eb)));
        Cut {
            side_a: g.set_of_mask(in_a),
            side_b: g.set_of((0..g.n()).filter(|&i| !in_a[i])),
            crossing: crossing as usize,
            sparsity,
            conductance,
            exact,
        }
    }

    /// Recomputes all fields from `g`; true when they match the stored ones.
    pub fn replays(&self, g: &Graph, terminals: Option<&VertexSet>) -> Result<bool> {
        let mask = g.mask(&self.side_a)?;
        let tm = terminals.map(|t| g.mask(t)).transpose()?;
        let again = Cut::evaluate(g, &mask, tm.as_deref(), self.exact);
        Ok(again == *self)
    }

    pub fn mask(&self, g: &Graph) -> Result<Vec<bool>> {
        g.mask(&self.side_a)
    }
}

pub(crate) struct EnumState<'a> {
    pub side: &'a [bool],
    pub crossing: u64,
    pub inner_a: u64,
    pub size_a: usize,
    pub w_a: [u64; 2],
}

/// Visits every bipartition with vertex 0 on side A (including B = ∅) in Gray-code order.
pub(crate) fn enumerate_bipartitions(g: &Graph, w: &[[u64; 2]], mut f: impl FnMut(&EnumState)) {
    let n = g.n();
    if n == 0 {
        return;
    }
    assert!(n <= 40, "enumeration over {n} vertices");
    let mut side = vec![true; n];
    let mut crossing = 0u64;
    let mut inner_a = g.m() as u64;
    let mut size_a = n;
    let mut w_a = [0u64; 2];
    for x in w {
        w_a[0] += x[0];
        w_a[1] += x[1];
    }
    f(&EnumState { side: &side, crossing, inner_a, size_a, w_a });
    let total: u64 = 1u64 << (n - 1);
    for k in 1..total {
        let v = k.trailing_zeros() as usize + 1;
        let was_a = side[v];
        for &(u, _) in g.neighbors(v) {
            if side[u] == was_a {
                crossing += 1;
            } else {
                crossing -= 1;
            }
            if side[u] {
                if was_a {
                    inner_a -= 1;
                } else {
                    inner_a += 1;
                }
            }
        }
        side[v] = !was_a;
        if was_a {
            size_a -= 1;
            w_a[0] -= w[v][0];
            w_a[1] -= w[v][1];
        } else {
            size_a += 1;
            w_a[0] += w[v][0];
            w_a[1] += w[v][1];
        }
        f(&EnumState { side: &side, crossing, inner_a, size_a, w_a });
    }
}

fn component_split(g: &Graph, wanted: impl Fn(&[usize]) -> bool) -> Option<Vec<bool>> {
    let comps = g.components();
    let hits: Vec<&Vec<usize>> = comps.iter().filter(|c| wanted(c)).collect();
    if hits.len() < 2 {
        return None;
    }
    let mut mask = vec![false; g.n()];
    for &i in hits[0] {
        mask[i] = true;
    }
    Some(mask)
}

/// Cut minimizing crossing / min(|T∩A|, |T∩B|).
pub fn sparsest_cut(g: &Graph, terminals: &VertexSet, cfg: &SolverConfig) -> Result<Cut> {
    if g.n() < 2 {
        return Err(Error::Precondition("sparsest cut needs at least 2 vertices".into()));
    }
    if terminals.len() < 2 {
        return Err(Error::Precondition("sparsest cut needs at least 2 terminals".into()));
    }
    let tmask = g.mask(terminals)?;
    if let Some(mask) = component_split(g, |c| c.iter().any(|&i| tmask[i])) {
        return Ok(Cut::evaluate(g, &mask, Some(&tmask), true));
    }
    let pendant: Vec<bool> = (0..g.n())
        .map(|i| tmask[i] && g.degree(i) == 1 && g.degree(g.neighbors(i)[0].0) >= 2)
        .collect();
    let core = pendant.iter().filter(|&&p| !p).count();
    if cfg.allows_exact() && core <= cfg.exact_limit {
        return Ok(sparsest_by_enumeration(g, &tmask, &pendant));
    }
    if cfg.allows_exact() && terminals.len() <= cfg.terminal_limit {
        return Ok(sparsest_by_terminal_split(g, &tmask));
    }
    if cfg.mode == SolverMode::Exact {
        return Err(Error::TooLarge(format!(
            "{core} core vertices and {} terminals exceed the exact limits",
            terminals.len()
        )));
    }
    Ok(sparsest_heuristic(g, &tmask, cfg))
}

fn sparsest_by_enumeration(g: &Graph, tmask: &[bool], pendant: &[bool]) -> Cut {
    let core_mask: Vec<bool> = pendant.iter().map(|p| !p).collect();
    let (cg, map) = g.induced_mask(&core_mask);
    let mut pos = vec![usize::MAX; g.n()];
    for (k, &i) in map.iter().enumerate() {
        pos[i] = k;
    }
    let mut pend_of: Vec<Vec<usize>> = vec![Vec::new(); cg.n()];
    for i in (0..g.n()).filter(|&i| pendant[i]) {
        pend_of[pos[g.neighbors(i)[0].0]].push(i);
    }
    let w: Vec<[u64; 2]> = (0..cg.n())
        .map(|k| {
            let p = pend_of[k].len() as u64;
            [p + tmask[map[k]] as u64, p]
        })
        .collect();
    let total_t: u64 = w.iter().map(|x| x[0]).sum();
    let total_p: u64 = w.iter().map(|x| x[1]).sum();
    // best = (num, den, side, flip) where flip > 0 moves pendants A→B and < 0 moves B→A
    let mut best: Option<(u64, u64, Vec<bool>, i64)> = None;
    enumerate_bipartitions(&cg, &w, |st| {
        let (a, b) = (st.w_a[0], total_t - st.w_a[0]);
        let (pa, pb) = (st.w_a[1], total_p - st.w_a[1]);
        let nonempty_b = st.size_a < cg.n();
        let mut consider = |num: u64, den: u64, flip: i64| {
            if den == 0 {
                return;
            }
            if best.as_ref().is_none_or(|(bn, bd, _, _)| frac_lt(num, den, *bn, *bd)) {
                best = Some((num, den, st.side.to_vec(), flip));
            }
        };
        if nonempty_b && a > 0 && b > 0 {
            consider(st.crossing, a.min(b), 0);
        }
        for i in 1..=pa {
            if a - i == 0 {
                break;
            }
            consider(st.crossing + i, (a - i).min(b + i), i as i64);
        }
        for j in 1..=pb {
            if b - j == 0 {
                break;
            }
            consider(st.crossing + j, (a + j).min(b - j), -(j as i64));
        }
    });
    let (_, _, side, flip) = best.expect("two terminals always admit a cut");
    let mut in_a = vec![false; g.n()];
    for (k, &i) in map.iter().enumerate() {
        in_a[i] = side[k];
    }
    let mut budget = flip.unsigned_abs();
    for i in 0..g.n() {
        if pendant[i] {
            let host = in_a[g.neighbors(i)[0].0];
            in_a[i] = host;
            if budget > 0 && ((flip > 0 && host) || (flip < 0 && !host)) {
                in_a[i] = !host;
                budget -= 1;
            }
        }
    }
    Cut::evaluate(g, &in_a, Some(tmask), true)
}

fn sparsest_by_terminal_split(g: &Graph, tmask: &[bool]) -> Cut {
    let ts: Vec<usize> = (0..g.n()).filter(|&i| tmask[i]).collect();
    let t = ts.len();
    let mut best: Option<(u64, u64, Vec<bool>)> = None;
    for bits in 0..(1u64 << (t - 1)) {
        let mut a = vec![false; g.n()];
        let mut b = vec![false; g.n()];
        a[ts[0]] = true;
        let mut na = 1u64;
        for (k, &v) in ts.iter().enumerate().skip(1) {
            if bits >> (k - 1) & 1 == 1 {
                a[v] = true;
                na += 1;
            } else {
                b[v] = true;
            }
        }
        let nb = t as u64 - na;
        if nb == 0 {
            continue;
        }
        let den = na.min(nb);
        // any crossing at or above this bound cannot improve on the incumbent
        let limit = match &best {
            None => crate::flow::INF,
            Some((bn, bd, _)) => ((*bn as u128 * den as u128).div_ceil(*bd as u128)) as i64,
        };
        let (val, side) = min_edge_cut_limited(g, &a, &b, limit);
        if (val as i64) < limit && best.as_ref().is_none_or(|(bn, bd, _)| frac_lt(val as u64, den, *bn, *bd)) {
            best = Some((val as u64, den, side));
        }
    }
    let (_, _, side) = best.expect("at least one split");
    Cut::evaluate(g, &side, Some(tmask), true)
}

#[derive(Clone, Copy)]
enum Objective<'a> {
    Sparsity(&'a [bool]),
    Conductance,
    Balanced { z: &'a [bool], need: u64 },
}

/// (num, den) of the objective for a side mask, `None` when infeasible.
fn score(g: &Graph, in_a: &[bool], obj: Objective) -> Option<(u64, u64)> {
    let mut c = 0u64;
    let (mut ea, mut eb) = (0u64, 0u64);
    for &(u, v) in g.edges() {
        match (in_a[u], in_a[v]) {
            (true, true) => ea += 1,
            (false, false) => eb += 1,
            _ => c += 1,
        }
    }
    let na = in_a.iter().filter(|&&x| x).count();
    if na == 0 || na == g.n() {
        return None;
    }
    match obj {
        Objective::Sparsity(t) => {
            let ta = (0..g.n()).filter(|&i| t[i] && in_a[i]).count() as u64;
            let tb = (0..g.n()).filter(|&i| t[i] && !in_a[i]).count() as u64;
            (ta > 0 && tb > 0).then_some((c, ta.min(tb)))
        }
        Objective::Conductance => (ea > 0 && eb > 0).then_some((c, ea.min(eb))),
        Objective::Balanced { z, need } => {
            let za = (0..g.n()).filter(|&i| z[i] && in_a[i]).count() as u64;
            let zb = (0..g.n()).filter(|&i| z[i] && !in_a[i]).count() as u64;
            (za >= need && zb >= need).then_some((c, 1))
        }
    }
}

struct Tracker {
    in_a: Vec<bool>,
    c: i64,
    ea: i64,
    eb: i64,
    na: i64,
    wa: i64,
    w_total: i64,
}

impl Tracker {
    fn new(g: &Graph, in_a: Vec<bool>, w: &[bool]) -> Tracker {
        let mut t = Tracker { in_a, c: 0, ea: 0, eb: 0, na: 0, wa: 0, w_total: 0 };
        for &(u, v) in g.edges() {
            match (t.in_a[u], t.in_a[v]) {
                (true, true) => t.ea += 1,
                (false, false) => t.eb += 1,
                _ => t.c += 1,
            }
        }
        for i in 0..g.n() {
            t.na += t.in_a[i] as i64;
            t.w_total += w[i] as i64;
            t.wa += (w[i] && t.in_a[i]) as i64;
        }
        t
    }

    /// State after flipping v, without applying it: (c, ea, eb, na, wa).
    fn peek(&self, g: &Graph, v: usize, w: &[bool]) -> (i64, i64, i64, i64, i64) {
        let mut same = 0i64;
        let mut other = 0i64;
        for &(u, _) in g.neighbors(v) {
            if self.in_a[u] == self.in_a[v] {
                same += 1;
            } else {
                other += 1;
            }
        }
        let c = self.c + same - other;
        let (ea, eb, na, wa);
        if self.in_a[v] {
            ea = self.ea - same;
            eb = self.eb + other;
            na = self.na - 1;
            wa = self.wa - w[v] as i64;
        } else {
            ea = self.ea + other;
            eb = self.eb - same;
            na = self.na + 1;
            wa = self.wa + w[v] as i64;
        }
        (c, ea, eb, na, wa)
    }

    fn apply(&mut self, g: &Graph, v: usize, w: &[bool]) {
        let (c, ea, eb, na, wa) = self.peek(g, v, w);
        self.c = c;
        self.ea = ea;
        self.eb = eb;
        self.na = na;
        self.wa = wa;
        self.in_a[v] = !self.in_a[v];
    }
}

fn objective_value(obj: Objective, n: usize, c: i64, ea: i64, eb: i64, na: i64, wa: i64, wt: i64) -> Option<(u64, u64)> {
    if na <= 0 || na >= n as i64 {
        return None;
    }
    match obj {
        Objective::Sparsity(_) => (wa > 0 && wt - wa > 0).then_some((c as u64, wa.min(wt - wa) as u64)),
        Objective::Conductance => (ea > 0 && eb > 0).then_some((c as u64, ea.min(eb) as u64)),
        Objective::Balanced { need, .. } => (wa >= need as i64 && wt - wa >= need as i64).then_some((c as u64, 1)),
    }
}

fn weights_of(g: &Graph, obj: Objective) -> Vec<bool> {
    match obj {
        Objective::Sparsity(t) => t.to_vec(),
        Objective::Conductance => vec![false; g.n()],
        Objective::Balanced { z, .. } => z.to_vec(),
    }
}

/// Best prefix of `order` under the objective.
fn sweep(g: &Graph, order: &[usize], obj: Objective) -> Option<(u64, u64, Vec<bool>)> {
    let w = weights_of(g, obj);
    let mut tr = Tracker::new(g, vec![false; g.n()], &w);
    let mut best: Option<(u64, u64, usize)> = None;
    for (k, &v) in order.iter().enumerate().take(g.n().saturating_sub(1)) {
        tr.apply(g, v, &w);
        if let Some((num, den)) = objective_value(obj, g.n(), tr.c, tr.ea, tr.eb, tr.na, tr.wa, tr.w_total) {
            if best.is_none_or(|(bn, bd, _)| frac_lt(num, den, bn, bd)) {
                best = Some((num, den, k));
            }
        }
    }
    best.map(|(num, den, k)| {
        let mut in_a = vec![false; g.n()];
        for &v in &order[..=k] {
            in_a[v] = true;
        }
        (num, den, in_a)
    })
}

/// Single-vertex moves while they strictly improve the objective.
fn local_moves(g: &Graph, in_a: Vec<bool>, obj: Objective) -> Vec<bool> {
    let w = weights_of(g, obj);
    let mut tr = Tracker::new(g, in_a, &w);
    let Some(mut cur) = objective_value(obj, g.n(), tr.c, tr.ea, tr.eb, tr.na, tr.wa, tr.w_total) else {
        return tr.in_a;
    };
    for _ in 0..30 {
        let mut improved = false;
        for v in 0..g.n() {
            let (c, ea, eb, na, wa) = tr.peek(g, v, &w);
            if let Some(val) = objective_value(obj, g.n(), c, ea, eb, na, wa, tr.w_total) {
                if frac_lt(val.0, val.1, cur.0, cur.1) {
                    tr.apply(g, v, &w);
                    cur = val;
                    improved = true;
                }
            }
        }
        if !improved {
            break;
        }
    }
    tr.in_a
}

/// Keeps the split of `marks` and replaces the rest of the cut by a minimum one.
fn flow_improve(g: &Graph, in_a: &[bool], marks: &[bool]) -> Vec<bool> {
    let a: Vec<bool> = (0..g.n()).map(|i| marks[i] && in_a[i]).collect();
    let b: Vec<bool> = (0..g.n()).map(|i| marks[i] && !in_a[i]).collect();
    if !a.iter().any(|&x| x) || !b.iter().any(|&x| x) {
        return in_a.to_vec();
    }
    min_edge_cut(g, &a, &b).1
}

fn heuristic(g: &Graph, obj: Objective, cfg: &SolverConfig) -> Option<Vec<bool>> {
    let mut rng = generators::rng(cfg.seed ^ 0x5eed_c0de);
    let mut best: Option<(u64, u64, Vec<bool>)> = None;
    let offer = |in_a: Vec<bool>, best: &mut Option<(u64, u64, Vec<bool>)>| {
        if let Some((num, den)) = score(g, &in_a, obj) {
            if best.as_ref().is_none_or(|(bn, bd, _)| frac_lt(num, den, *bn, *bd)) {
                *best = Some((num, den, in_a));
            }
        }
    };
    for order in spectral::candidate_orders(g, cfg.restarts, &mut rng) {
        if let Some((_, _, side)) = sweep(g, &order, obj) {
            let side = local_moves(g, side, obj);
            let improved = match obj {
                Objective::Sparsity(t) => local_moves(g, flow_improve(g, &side, t), obj),
                Objective::Balanced { z, .. } => local_moves(g, flow_improve(g, &side, z), obj),
                Objective::Conductance => side.clone(),
            };
            offer(side, &mut best);
            offer(improved, &mut best);
        }
    }
    // a few random balanced starts guard against poor spectral information
    for _ in 0..cfg.restarts {
        let side: Vec<bool> = (0..g.n()).map(|_| rng.random::<bool>()).collect();
        offer(local_moves(g, side, obj), &mut best);
    }
    best.map(|(_, _, s)| s)
}

fn sparsest_heuristic(g: &Graph, tmask: &[bool], cfg: &SolverConfig) -> Cut {
    let side = heuristic(g, Objective::Sparsity(tmask), cfg).unwrap_or_else(|| {
        // fall back to isolating one terminal
        let mut s = vec![false; g.n()];
        s[tmask.iter().position(|&t| t).expect("terminals exist")] = true;
        s
    });
    Cut::evaluate(g, &side, Some(tmask), false)
}

/// Cut minimizing crossing / min(|E(A)|, |E(B)|) over cuts whose sides both have internal edges.
pub fn min_conductance_cut(g: &Graph, cfg: &SolverConfig) -> Result<Cut> {
    if g.m() < 2 {
        return Err(Error::NoValidCut);
    }
    let deg_mask: Vec<bool> = (0..g.n()).map(|i| g.degree(i) > 0).collect();
    if let Some(mask) = component_split(g, |c| c.iter().any(|&i| deg_mask[i] && g.degree(i) > 0) && c.len() > 1) {
        let cut = Cut::evaluate(g, &mask, None, true);
        if cut.conductance.is_some() {
            return Ok(cut);
        }
    }
    if cfg.allows_exact() && g.n() <= cfg.exact_limit {
        let m = g.m() as u64;
        let w = vec![[0u64; 2]; g.n()];
        let mut best: Option<(u64, u64, Vec<bool>)> = None;
        enumerate_bipartitions(g, &w, |st| {
            let eb = m - st.crossing - st.inner_a;
            if st.inner_a == 0 || eb == 0 {
                return;
            }
            let den = st.inner_a.min(eb);
            if best.as_ref().is_none_or(|(bn, bd, _)| frac_lt(st.crossing, den, *bn, *bd)) {
                best = Some((st.crossing, den, st.side.to_vec()));
            }
        });
        return best.map(|(_, _, s)| Cut::evaluate(g, &s, None, true)).ok_or(Error::NoValidCut);
    }
    if cfg.mode == SolverMode::Exact {
        return Err(Error::TooLarge(format!("{} vertices exceed exact limit {}", g.n(), cfg.exact_limit)));
    }
    heuristic(g, Objective::Conductance, cfg)
        .map(|s| Cut::evaluate(g, &s, None, false))
        .ok_or(Error::NoValidCut)
}

/// Minimum crossing partition (A, B) of `s` within g[s] with both sides holding
/// at least ⌈γ·|S∩Z|⌉ marked vertices.
pub fn balanced_cut(g: &Graph, s: &VertexSet, z_marks: &VertexSet, cfg: &SolverConfig) -> Result<Cut> {
    let h = g.induced(s)?;
    let z: Vec<bool> = h.ids().iter().map(|id| z_marks.contains(id)).collect();
    let zc = z.iter().filter(|&&x| x).count() as u64;
    if zc as usize <= cfg.balance_floor {
        return Err(Error::Precondition(format!(
            "balanced cut needs more than {} marked vertices (floor), found {zc}",
            cfg.balance_floor
        )));
    }
    let g_num = *cfg.balance_gamma.numer();
    let g_den = *cfg.balance_gamma.denom();
    let need = ((g_num as u128 * zc as u128).div_ceil(g_den as u128) as u64).max(1);
    if 2 * need > zc {
        return Err(Error::Infeasible(format!(
            "balance {} of {zc} marked vertices cannot be met (floor {})",
            cfg.balance_gamma, cfg.balance_floor
        )));
    }
    let zmask_full: VertexSet = h.ids().iter().copied().filter(|id| z_marks.contains(id)).collect();
    let cut_of = |side: &[bool], exact: bool| {
        let cut = Cut::evaluate(&h, side, Some(&z), exact);
        debug_assert!(cut.side_a.iter().filter(|v| zmask_full.contains(v)).count() as u64 >= need);
        cut
    };
    if cfg.allows_exact() && h.n() <= cfg.exact_limit {
        let w: Vec<[u64; 2]> = z.iter().map(|&x| [x as u64, 0]).collect();
        let mut best: Option<(u64, Vec<bool>)> = None;
        enumerate_bipartitions(&h, &w, |st| {
            let za = st.w_a[0];
            if za < need || zc - za < need {
                return;
            }
            if best.as_ref().is_none_or(|(bc, _)| st.crossing < *bc) {
                best = Some((st.crossing, st.side.to_vec()));
            }
        });
        let (_, side) = best.expect("balance is feasible");
        return Ok(cut_of(&side, true));
    }
    if cfg.allows_exact() && (zc as usize) <= cfg.terminal_limit {
        let zs: Vec<usize> = (0..h.n()).filter(|&i| z[i]).collect();
        let mut best: Option<(usize, Vec<bool>)> = None;
        for bits in 0..(1u64 << (zs.len() - 1)) {
            let mut a = vec![false; h.n()];
            let mut b = vec![false; h.n()];
            a[zs[0]] = true;
            let mut na = 1;
            for (k, &v) in zs.iter().enumerate().skip(1) {
                if bits >> (k - 1) & 1 == 1 {
                    a[v] = true;
                    na += 1;
                } else {
                    b[v] = true;
                }
            }
            if na < need || zc - na < need {
                continue;
            }
            let limit = best.as_ref().map_or(crate::flow::INF, |(c, _)| *c as i64);
            let (val, side) = min_edge_cut_limited(&h, &a, &b, limit);
            if (val as i64) < limit {
                best = Some((val, side));
            }
        }
        let (_, side) = best.expect("balance is feasible");
        return Ok(cut_of(&side, true));
    }
    if cfg.mode == SolverMode::Exact {
        return Err(Error::TooLarge(format!("{} vertices exceed exact limits", h.n())));
    }
    let obj = Objective::Balanced { z: &z, need };
    let side = heuristic(&h, obj, cfg).unwrap_or_else(|| {
        // take marked vertices in index order until the balance is met
        let mut s = vec![false; h.n()];
        let mut taken = 0;
        for i in 0..h.n() {
            if z[i] && taken < need {
                s[i] = true;
                taken += 1;
            }
        }
        s
    });
    Ok(cut_of(&side, false))
}
