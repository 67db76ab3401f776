//! Undirected multigraph with stable vertex identifiers.
//!
//! Vertices are addressed two ways: by their opaque [`VertexId`], which
//! survives induction, contraction and serialization, and by a dense index
//! `0..n` local to one `Graph` value. Ids are kept sorted, so the index of an
//! id is its rank.

use std::collections::{BTreeMap, BTreeSet, VecDeque};
use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(transparent)]
pub struct VertexId(pub u32);

impl fmt::Display for VertexId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.0)
    }
}

pub type VertexSet = BTreeSet<VertexId>;

pub fn vset<I: IntoIterator<Item = u32>>(ids: I) -> VertexSet {
    ids.into_iter().map(VertexId).collect()
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(into = "GraphRepr", try_from = "GraphRepr")]
pub struct Graph {
    ids: Vec<VertexId>,
    edges: Vec<(usize, usize)>,
    adj: Vec<Vec<(usize, usize)>>,
}

/// Serialized form: vertex ids and edges as id pairs in edge-index order.
#[derive(Serialize, Deserialize)]
struct GraphRepr {
    vertices: Vec<VertexId>,
    edges: Vec<(VertexId, VertexId)>,
}

impl From<Graph> for GraphRepr {
    fn from(g: Graph) -> Self {
        let edges = (0..g.m()).map(|e| g.edge_ids(e)).collect();
        GraphRepr { vertices: g.ids, edges }
    }
}

impl TryFrom<GraphRepr> for Graph {
    type Error = Error;

    fn try_from(r: GraphRepr) -> Result<Graph> {
        Graph::new(r.vertices, r.edges)
    }
}

impl Graph {
    /// Builds a graph from ids and id pairs. Parallel edges are kept.
    pub fn new<I, E>(ids: I, edges: E) -> Result<Graph>
    where
        I: IntoIterator<Item = VertexId>,
        E: IntoIterator<Item = (VertexId, VertexId)>,
    {
        let mut ids: Vec<VertexId> = ids.into_iter().collect();
        ids.sort_unstable();
        for w in ids.windows(2) {
            if w[0] == w[1] {
                return Err(Error::DuplicateVertex(w[0]));
            }
        }
        let mut g = Graph { adj: vec![Vec::new(); ids.len()], ids, edges: Vec::new() };
        for (a, b) in edges {
            let u = g.index_of(a).ok_or(Error::UnknownVertex(a))?;
            let v = g.index_of(b).ok_or(Error::UnknownVertex(b))?;
            g.push_edge(u, v)?;
        }
        Ok(g)
    }

    /// Graph on ids `0..n` with index-addressed edges.
    pub fn from_edges(n: usize, edges: &[(usize, usize)]) -> Result<Graph> {
        let mut g = Graph::empty(n);
        for &(u, v) in edges {
            if u >= n || v >= n {
                return Err(Error::UnknownVertex(VertexId(u.max(v) as u32)));
            }
            g.push_edge(u, v)?;
        }
        Ok(g)
    }

    pub fn empty(n: usize) -> Graph {
        Graph {
            ids: (0..n as u32).map(VertexId).collect(),
            edges: Vec::new(),
            adj: vec![Vec::new(); n],
        }
    }

    fn push_edge(&mut self, u: usize, v: usize) -> Result<usize> {
        if u == v {
            return Err(Error::SelfLoop(self.ids[u]));
        }
        let e = self.edges.len();
        let (a, b) = if u < v { (u, v) } else { (v, u) };
        self.edges.push((a, b));
        self.adj[a].push((b, e));
        self.adj[b].push((a, e));
        Ok(e)
    }

    /// Adds an edge between two existing indices. Used by builders that own the graph.
    pub fn add_edge(&mut self, u: usize, v: usize) -> Result<usize> {
        if u >= self.n() || v >= self.n() {
            return Err(Error::UnknownVertex(VertexId(u.max(v) as u32)));
        }
        self.push_edge(u, v)
    }

    pub fn n(&self) -> usize {
        self.ids.len()
    }

    pub fn m(&self) -> usize {
        self.edges.len()
    }

    pub fn ids(&self) -> &[VertexId] {
        &self.ids
    }

    pub fn id(&self, i: usize) -> VertexId {
        self.ids[i]
    }

    pub fn index_of(&self, id: VertexId) -> Option<usize> {
        self.ids.binary_search(&id).ok()
    }

    pub fn contains(&self, id: VertexId) -> bool {
        self.index_of(id).is_some()
    }

    pub fn edges(&self) -> &[(usize, usize)] {
        &self.edges
    }

    pub fn edge(&self, e: usize) -> (usize, usize) {
        self.edges[e]
    }

    pub fn edge_ids(&self, e: usize) -> (VertexId, VertexId) {
        let (u, v) = self.edges[e];
        (self.ids[u], self.ids[v])
    }

    /// `(neighbor index, edge index)` pairs, one per incident edge slot.
    pub fn neighbors(&self, i: usize) -> &[(usize, usize)] {
        &self.adj[i]
    }

    pub fn degree(&self, i: usize) -> usize {
        self.adj[i].len()
    }

    pub fn max_degree(&self) -> usize {
        self.adj.iter().map(Vec::len).max().unwrap_or(0)
    }

    pub fn max_id(&self) -> Option<VertexId> {
        self.ids.last().copied()
    }

    pub fn vertex_set(&self) -> VertexSet {
        self.ids.iter().copied().collect()
    }

    /// Dense indices of `s`, in ascending order.
    pub fn indices(&self, s: &VertexSet) -> Result<Vec<usize>> {
        s.iter().map(|&id| self.index_of(id).ok_or(Error::UnknownVertex(id))).collect()
    }

    pub fn mask(&self, s: &VertexSet) -> Result<Vec<bool>> {
        let mut m = vec![false; self.n()];
        for i in self.indices(s)? {
            m[i] = true;
        }
        Ok(m)
    }

    pub fn set_of(&self, idx: impl IntoIterator<Item = usize>) -> VertexSet {
        idx.into_iter().map(|i| self.ids[i]).collect()
    }

    pub fn set_of_mask(&self, mask: &[bool]) -> VertexSet {
        self.set_of((0..self.n()).filter(|&i| mask[i]))
    }

    /// Edge indices with exactly one endpoint in `s`, with multiplicity.
    pub fn out_edges(&self, s: &VertexSet) -> Result<Vec<usize>> {
        let m = self.mask(s)?;
        Ok(self.out_edges_mask(&m))
    }

    pub fn out_edges_mask(&self, mask: &[bool]) -> Vec<usize> {
        (0..self.m()).filter(|&e| {
            let (u, v) = self.edges[e];
            mask[u] != mask[v]
        })
        .collect()
    }

    pub fn out_degree_mask(&self, mask: &[bool]) -> usize {
        self.edges.iter().filter(|&&(u, v)| mask[u] != mask[v]).count()
    }

    /// Number of edges with both endpoints in the mask.
    pub fn inner_edges_mask(&self, mask: &[bool]) -> usize {
        self.edges.iter().filter(|&&(u, v)| mask[u] && mask[v]).count()
    }

    pub fn edges_within(&self, s: &VertexSet) -> Result<usize> {
        Ok(self.inner_edges_mask(&self.mask(s)?))
    }

    /// |E(A,B)| for disjoint A, B.
    pub fn edges_between(&self, a: &VertexSet, b: &VertexSet) -> Result<usize> {
        let ma = self.mask(a)?;
        let mb = self.mask(b)?;
        Ok(self
            .edges
            .iter()
            .filter(|&&(u, v)| (ma[u] && mb[v]) || (ma[v] && mb[u]))
            .count())
    }

    pub fn induced(&self, s: &VertexSet) -> Result<Graph> {
        let m = self.mask(s)?;
        Ok(self.induced_mask(&m).0)
    }

    /// Induced subgraph plus the map from new index to old index.
    pub fn induced_mask(&self, mask: &[bool]) -> (Graph, Vec<usize>) {
        let keep: Vec<usize> = (0..self.n()).filter(|&i| mask[i]).collect();
        let mut pos = vec![usize::MAX; self.n()];
        for (k, &i) in keep.iter().enumerate() {
            pos[i] = k;
        }
        let mut g = Graph {
            ids: keep.iter().map(|&i| self.ids[i]).collect(),
            edges: Vec::new(),
            adj: vec![Vec::new(); keep.len()],
        };
        for &(u, v) in &self.edges {
            if mask[u] && mask[v] {
                g.push_edge(pos[u], pos[v]).expect("induced edge is not a loop");
            }
        }
        (g, keep)
    }

    /// Subgraph on all vertices keeping only the listed edges.
    pub fn edge_subgraph(&self, edges: &[usize]) -> Graph {
        let mut g = Graph { ids: self.ids.clone(), edges: Vec::new(), adj: vec![Vec::new(); self.n()] };
        for &e in edges {
            let (u, v) = self.edges[e];
            g.push_edge(u, v).expect("edge of a loopless graph");
        }
        g
    }

    pub fn remove_vertices(&self, s: &VertexSet) -> Result<Graph> {
        let mut m = self.mask(s)?;
        m.iter_mut().for_each(|b| *b = !*b);
        Ok(self.induced_mask(&m).0)
    }

    /// Same vertices, parallel edges collapsed.
    pub fn simple(&self) -> Graph {
        let set: BTreeSet<(usize, usize)> = self.edges.iter().copied().collect();
        let mut g = Graph { ids: self.ids.clone(), edges: Vec::new(), adj: vec![Vec::new(); self.n()] };
        for (u, v) in set {
            g.push_edge(u, v).expect("loopless");
        }
        g
    }

    /// Relabels vertices to ids `0..n` in index order.
    pub fn relabeled(&self) -> Graph {
        Graph { ids: (0..self.n() as u32).map(VertexId).collect(), edges: self.edges.clone(), adj: self.adj.clone() }
    }

    /// Components as sorted index lists, ordered by smallest member.
    pub fn components(&self) -> Vec<Vec<usize>> {
        self.components_in(&vec![true; self.n()])
    }

    /// Components of the subgraph induced by `mask`.
    pub fn components_in(&self, mask: &[bool]) -> Vec<Vec<usize>> {
        let mut seen = vec![false; self.n()];
        let mut out = Vec::new();
        for s in 0..self.n() {
            if !mask[s] || seen[s] {
                continue;
            }
            seen[s] = true;
            let mut comp = vec![s];
            let mut q = VecDeque::from([s]);
            while let Some(u) = q.pop_front() {
                for &(v, _) in &self.adj[u] {
                    if mask[v] && !seen[v] {
                        seen[v] = true;
                        comp.push(v);
                        q.push_back(v);
                    }
                }
            }
            comp.sort_unstable();
            out.push(comp);
        }
        out
    }

    pub fn is_connected(&self) -> bool {
        self.n() <= 1 || self.components().len() == 1
    }

    pub fn is_connected_set(&self, s: &VertexSet) -> Result<bool> {
        let m = self.mask(s)?;
        Ok(s.is_empty() || self.components_in(&m).len() == 1)
    }

    /// BFS distances from `src`, `usize::MAX` when unreachable.
    pub fn bfs(&self, src: usize) -> Vec<usize> {
        let mut d = vec![usize::MAX; self.n()];
        d[src] = 0;
        let mut q = VecDeque::from([src]);
        while let Some(u) = q.pop_front() {
            for &(v, _) in &self.adj[u] {
                if d[v] == usize::MAX {
                    d[v] = d[u] + 1;
                    q.push_back(v);
                }
            }
        }
        d
    }

    pub fn has_cycle(&self) -> bool {
        // a multigraph is a forest iff m = n - components and no parallel edges
        self.m() + self.components().len() != self.n()
    }

    /// Edge id pairs sorted, for canonical comparisons.
    pub fn sorted_edge_ids(&self) -> Vec<(VertexId, VertexId)> {
        let mut v: Vec<_> = (0..self.m()).map(|e| self.edge_ids(e)).collect();
        v.sort_unstable();
        v
    }
}

/// Which acceptability check a clustering must pass before contraction.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum ClusterMode {
    /// Clusters may be disconnected; goodness is checked elsewhere.
    WellLinked,
    /// Every cluster must induce a connected subgraph.
    Connected,
}

#[derive(Clone, Debug)]
pub struct Contraction {
    /// Super-node `i` has id `i` and stands for `members[i]`.
    pub graph: Graph,
    pub members: Vec<VertexSet>,
    /// Index in `g` of the edge behind each contracted edge.
    pub edge_origin: Vec<usize>,
    /// Cluster of each vertex index of `g`.
    pub cluster_of: Vec<usize>,
}

impl Contraction {
    pub fn phi(&self) -> usize {
        self.graph.m()
    }

    /// Union of the members of the given super-node indices.
    pub fn expand(&self, nodes: impl IntoIterator<Item = usize>) -> VertexSet {
        let mut s = VertexSet::new();
        for c in nodes {
            s.extend(self.members[c].iter().copied());
        }
        s
    }
}

pub fn cluster_index(g: &Graph, clusters: &[VertexSet]) -> Result<Vec<usize>> {
    let mut of = vec![usize::MAX; g.n()];
    for (c, cl) in clusters.iter().enumerate() {
        if cl.is_empty() {
            return Err(Error::NotAPartition(format!("cluster {c} is empty")));
        }
        for &id in cl {
            let i = g.index_of(id).ok_or(Error::UnknownVertex(id))?;
            if of[i] != usize::MAX {
                return Err(Error::NotAPartition(format!("vertex {id} in clusters {} and {c}", of[i])));
            }
            of[i] = c;
        }
    }
    if let Some(i) = of.iter().position(|&c| c == usize::MAX) {
        return Err(Error::NotAPartition(format!("vertex {} is uncovered", g.id(i))));
    }
    Ok(of)
}

/// Contracts every cluster to one vertex, dropping loops and keeping parallel edges.
pub fn contract_clustering(g: &Graph, clusters: &[VertexSet], mode: ClusterMode) -> Result<Contraction> {
    let cluster_of = cluster_index(g, clusters)?;
    if mode == ClusterMode::Connected {
        for (c, cl) in clusters.iter().enumerate() {
            if !g.is_connected_set(cl)? {
                return Err(Error::DisconnectedCluster(c));
            }
        }
    }
    let mut h = Graph::empty(clusters.len());
    let mut edge_origin = Vec::new();
    for (e, &(u, v)) in g.edges().iter().enumerate() {
        let (a, b) = (cluster_of[u], cluster_of[v]);
        if a != b {
            h.push_edge(a, b)?;
            edge_origin.push(e);
        }
    }
    Ok(Contraction { graph: h, members: clusters.to_vec(), edge_origin, cluster_of })
}

#[derive(Clone, Debug)]
pub struct Subdivided {
    pub graph: Graph,
    pub terminals: VertexSet,
    /// Terminal id to the index in the source graph of the edge it subdivides.
    pub terminal_edge: BTreeMap<VertexId, usize>,
}

/// G[S] plus one new degree-1 terminal `t_e` per edge `e` of out(S).
pub fn subdivide_boundary(g: &Graph, s: &VertexSet) -> Result<Subdivided> {
    let mask = g.mask(s)?;
    let out = g.out_edges_mask(&mask);
    let base = g.max_id().map_or(0, |v| v.0 + 1);
    let mut ids: Vec<VertexId> = s.iter().copied().collect();
    let mut edges: Vec<(VertexId, VertexId)> = Vec::new();
    for &(u, v) in g.edges() {
        if mask[u] && mask[v] {
            edges.push((g.id(u), g.id(v)));
        }
    }
    let mut terminals = VertexSet::new();
    let mut terminal_edge = BTreeMap::new();
    for (k, &e) in out.iter().enumerate() {
        let t = VertexId(base + k as u32);
        let (u, v) = g.edge(e);
        let inside = if mask[u] { u } else { v };
        ids.push(t);
        edges.push((g.id(inside), t));
        terminals.insert(t);
        terminal_edge.insert(t, e);
    }
    Ok(Subdivided { graph: Graph::new(ids, edges)?, terminals, terminal_edge })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::generators;

    #[test]
    fn out_edges_of_triangle_vertex() {
        let g = generators::complete(3);
        let out = g.out_edges(&vset([0])).unwrap();
        assert_eq!(out.len(), 2);
        assert!(g.out_edges(&g.vertex_set()).unwrap().is_empty());
    }

    #[test]
    fn grid_corner_has_two_out_edges() {
        let g = generators::grid(3, 3);
        assert_eq!(g.out_edges(&vset([0])).unwrap().len(), 2);
    }

    #[test]
    fn unknown_vertex_is_domain_error() {
        let g = generators::path(3);
        assert_eq!(g.out_edges(&vset([7])), Err(Error::UnknownVertex(VertexId(7))));
    }

    #[test]
    fn self_loop_rejected() {
        assert!(matches!(Graph::from_edges(2, &[(1, 1)]), Err(Error::SelfLoop(_))));
    }

    #[test]
    fn singleton_contraction_is_identity() {
        let g = generators::grid(3, 3);
        let cl: Vec<VertexSet> = g.ids().iter().map(|&v| VertexSet::from([v])).collect();
        let c = contract_clustering(&g, &cl, ClusterMode::Connected).unwrap();
        assert_eq!(c.phi(), g.m());
        assert_eq!(c.graph.sorted_edge_ids(), g.sorted_edge_ids());
    }

    #[test]
    fn triangle_contracts_to_point() {
        let g = generators::complete(3);
        let c = contract_clustering(&g, &[g.vertex_set()], ClusterMode::Connected).unwrap();
        assert_eq!((c.graph.n(), c.phi()), (1, 0));
    }

    #[test]
    fn c4_contraction_keeps_parallel_edges() {
        let g = generators::cycle(4);
        let c = contract_clustering(&g, &[vset([0, 1]), vset([2, 3])], ClusterMode::Connected).unwrap();
        assert_eq!(c.graph.n(), 2);
        assert_eq!(c.graph.m(), 2);
        assert_eq!(c.graph.edge(0), c.graph.edge(1));
    }

    #[test]
    fn connected_mode_rejects_split_cluster() {
        let g = generators::path(3);
        let r = contract_clustering(&g, &[vset([0, 2]), vset([1])], ClusterMode::Connected);
        assert_eq!(r.unwrap_err(), Error::DisconnectedCluster(0));
        assert!(contract_clustering(&g, &[vset([0, 2]), vset([1])], ClusterMode::WellLinked).is_ok());
    }

    #[test]
    fn non_partition_rejected() {
        let g = generators::path(3);
        assert!(matches!(
            contract_clustering(&g, &[vset([0, 1])], ClusterMode::WellLinked),
            Err(Error::NotAPartition(_))
        ));
        assert!(matches!(
            contract_clustering(&g, &[vset([0, 1]), vset([1, 2])], ClusterMode::WellLinked),
            Err(Error::NotAPartition(_))
        ));
    }

    #[test]
    fn subdivide_closed_set_adds_nothing() {
        let g = generators::two_triangles_bridge();
        let s = g.vertex_set();
        let sub = subdivide_boundary(&g, &s).unwrap();
        assert!(sub.terminals.is_empty());
        assert_eq!(sub.graph.m(), g.m());
    }

    #[test]
    fn subdivide_single_vertex_gives_star() {
        let g = generators::star(3);
        let sub = subdivide_boundary(&g, &vset([0])).unwrap();
        assert_eq!(sub.graph.n(), 4);
        assert_eq!(sub.terminals.len(), 3);
        assert_eq!(sub.graph.degree(0), 3);
    }

    #[test]
    fn subdivide_counts_each_boundary_edge() {
        // two vertices of a K4 with a doubled edge: five boundary slots
        let mut g = generators::complete(4);
        g.add_edge(0, 2).unwrap();
        let sub = subdivide_boundary(&g, &vset([0, 1])).unwrap();
        assert_eq!(sub.terminals.len(), 5);
    }
}
