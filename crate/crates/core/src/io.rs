//! DIMACS and whitespace edge-list readers and writers.
//!
//! DIMACS is 1-indexed: `p edge n m` followed by `e u v` lines, `c` comments.
//! The edge list holds one `u v` pair per line; a line with a single token
//! declares an isolated vertex; `#` and `%` start comments. Edge-list ids are
//! 1-indexed unless `zero_indexed` is set.

use std::fmt::Write as _;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::graph::{Graph, VertexId};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum Format {
    Dimacs,
    Edgelist { zero_indexed: bool },
}

impl Format {
    /// Guess from a file name: `.col`, `.dimacs`, `.gr`, `.edge` mean DIMACS.
    pub fn from_path(path: &str, zero_indexed: bool) -> Format {
        let lower = path.to_ascii_lowercase();
        if [".col", ".dimacs", ".edge"].iter().any(|s| lower.ends_with(s)) {
            Format::Dimacs
        } else {
            Format::Edgelist { zero_indexed }
        }
    }
}

fn perr(line: usize, message: impl Into<String>) -> Error {
    Error::Parse { line, message: message.into() }
}

fn num(tok: &str, line: usize) -> Result<u64> {
    tok.parse::<u64>().map_err(|_| perr(line, format!("expected a non-negative integer, got {tok:?}")))
}

pub fn parse_graph(bytes: &[u8], format: Format) -> Result<Graph> {
    let text = std::str::from_utf8(bytes).map_err(|e| perr(0, format!("not UTF-8: {e}")))?;
    match format {
        Format::Dimacs => parse_dimacs(text),
        Format::Edgelist { zero_indexed } => parse_edgelist(text, zero_indexed),
    }
}

fn parse_dimacs(text: &str) -> Result<Graph> {
    let mut n: Option<usize> = None;
    let mut edges = Vec::new();
    for (k, raw) in text.lines().enumerate() {
        let line = k + 1;
        let toks: Vec<&str> = raw.split_whitespace().collect();
        match toks.first().copied() {
            None | Some("c") => {}
            Some("p") => {
                if n.is_some() {
                    return Err(perr(line, "second problem line"));
                }
                if toks.len() != 4 {
                    return Err(perr(line, "problem line must be `p <kind> <n> <m>`"));
                }
                n = Some(num(toks[2], line)? as usize);
            }
            Some("e") => {
                let nv = n.ok_or_else(|| perr(line, "edge before problem line"))?;
                if toks.len() != 3 {
                    return Err(perr(line, "edge line must be `e <u> <v>`"));
                }
                let (u, v) = (num(toks[1], line)?, num(toks[2], line)?);
                for x in [u, v] {
                    if x == 0 || x as usize > nv {
                        return Err(perr(line, format!("vertex {x} outside 1..={nv}")));
                    }
                }
                if u == v {
                    return Err(perr(line, "self-loop"));
                }
                edges.push((u as usize - 1, v as usize - 1));
            }
            Some(t) => return Err(perr(line, format!("unknown line type {t:?}"))),
        }
    }
    let n = n.ok_or_else(|| perr(0, "missing problem line"))?;
    Graph::from_edges(n, &edges)
}

fn parse_edgelist(text: &str, zero_indexed: bool) -> Result<Graph> {
    let shift = if zero_indexed { 0 } else { 1 };
    let mut ids = std::collections::BTreeSet::new();
    let mut edges = Vec::new();
    for (k, raw) in text.lines().enumerate() {
        let line = k + 1;
        let body = raw.split(['#', '%']).next().unwrap_or("");
        let toks: Vec<&str> = body.split_whitespace().collect();
        let read = |t: &str| -> Result<VertexId> {
            let x = num(t, line)?;
            if x < shift {
                return Err(perr(line, "vertex 0 in a 1-indexed edge list (use --zero-indexed)"));
            }
            let id = u32::try_from(x - shift).map_err(|_| perr(line, "vertex id too large"))?;
            Ok(VertexId(id))
        };
        match toks.len() {
            0 => {}
            1 => {
                ids.insert(read(toks[0])?);
            }
            2 => {
                let (u, v) = (read(toks[0])?, read(toks[1])?);
                if u == v {
                    return Err(perr(line, "self-loop"));
                }
                ids.insert(u);
                ids.insert(v);
                edges.push((u, v));
            }
            _ => return Err(perr(line, "expected `u v` or a single vertex")),
        }
    }
    Graph::new(ids, edges)
}

/// Deterministic writer: edges sorted by id pair, parallel edges repeated.
pub fn write_graph(g: &Graph, format: Format) -> Result<Vec<u8>> {
    let edges = g.sorted_edge_ids();
    let mut out = String::new();
    match format {
        Format::Dimacs => {
            if g.ids().iter().enumerate().any(|(i, v)| v.0 as usize != i) {
                return Err(Error::Precondition("DIMACS needs ids 0..n; relabel first".into()));
            }
            writeln!(out, "p edge {} {}", g.n(), g.m()).unwrap();
            for (u, v) in edges {
                writeln!(out, "e {} {}", u.0 + 1, v.0 + 1).unwrap();
            }
        }
        Format::Edgelist { zero_indexed } => {
            let shift = if zero_indexed { 0 } else { 1 };
            for i in 0..g.n() {
                if g.degree(i) == 0 {
                    writeln!(out, "{}", g.id(i).0 as u64 + shift).unwrap();
                }
            }
            for (u, v) in edges {
                writeln!(out, "{} {}", u.0 as u64 + shift, v.0 as u64 + shift).unwrap();
            }
        }
    }
    Ok(out.into_bytes())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::generators;

    #[test]
    fn dimacs_path() {
        let g = parse_graph(b"p edge 3 2\ne 1 2\ne 2 3\n", Format::Dimacs).unwrap();
        assert_eq!((g.n(), g.m()), (3, 2));
        assert_eq!(g.degree(1), 2);
    }

    #[test]
    fn dimacs_isolated_vertices() {
        let g = parse_graph(b"c nothing\np edge 4 0\n", Format::Dimacs).unwrap();
        assert_eq!((g.n(), g.m()), (4, 0));
    }

    #[test]
    fn duplicate_line_is_parallel_edge() {
        let g = parse_graph(b"p edge 2 2\ne 1 2\ne 1 2\n", Format::Dimacs).unwrap();
        assert_eq!(g.m(), 2);
        assert_eq!(g.degree(0), 2);
    }

    #[test]
    fn malformed_line_reports_number() {
        let err = parse_graph(b"p edge 3 1\ne 1 x\n", Format::Dimacs).unwrap_err();
        assert!(matches!(err, Error::Parse { line: 2, .. }));
        let err = parse_graph(b"1 2\n2 3 4\n", Format::Edgelist { zero_indexed: false }).unwrap_err();
        assert!(matches!(err, Error::Parse { line: 2, .. }));
        let err = parse_graph(b"p edge 3 1\ne 1 4\n", Format::Dimacs).unwrap_err();
        assert!(matches!(err, Error::Parse { line: 2, .. }));
    }

    #[test]
    fn edgelist_indexing() {
        let g = parse_graph(b"0 1\n1 2\n", Format::Edgelist { zero_indexed: true }).unwrap();
        assert_eq!(g.ids(), &[VertexId(0), VertexId(1), VertexId(2)]);
        let g = parse_graph(b"1 2\n2 3\n", Format::Edgelist { zero_indexed: false }).unwrap();
        assert_eq!(g.ids(), &[VertexId(0), VertexId(1), VertexId(2)]);
        assert!(parse_graph(b"0 1\n", Format::Edgelist { zero_indexed: false }).is_err());
    }

    #[test]
    fn writer_is_sorted_and_round_trips() {
        let g = Graph::from_edges(4, &[(2, 3), (0, 1), (1, 0)]).unwrap();
        let text = String::from_utf8(write_graph(&g, Format::Dimacs).unwrap()).unwrap();
        assert_eq!(text, "p edge 4 3\ne 1 2\ne 1 2\ne 3 4\n");
        for f in [Format::Dimacs, Format::Edgelist { zero_indexed: true }, Format::Edgelist { zero_indexed: false }] {
            let h = parse_graph(&write_graph(&g, f).unwrap(), f).unwrap();
            assert_eq!(h.ids(), g.ids());
            assert_eq!(h.sorted_edge_ids(), g.sorted_edge_ids());
        }
        let g = generators::grid(3, 3);
        let h = parse_graph(&write_graph(&g, Format::Dimacs).unwrap(), Format::Dimacs).unwrap();
        assert_eq!(h.sorted_edge_ids(), g.sorted_edge_ids());
    }
}
