//! Run reports: one JSON document per command, with the input graph, the
//! effective configuration, the outcome and everything needed to replay its
//! certificates. A SHA-256 digest over the canonical form (timings removed)
//! detects edits.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::applications::EpOutcome;
use crate::conductance::spectral_conductance_bound;
use crate::cuts::{min_conductance_cut, Rational, SolverConfig};
use crate::decompose::DecompositionResult;
use crate::error::{Error, Result};
use crate::expander::ExpanderWitness;
use crate::graph::Graph;
use crate::treewidth::{tw_bounds, TwBound};
use crate::well_linked::{find_well_linked_set, WellLinkedCertificate};

pub const SCHEMA: &str = "twdecomp-report/1";

/// Step budget for exhaustive cycle checks during replay.
const REPLAY_BUDGET: u64 = 1 << 26;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Analysis {
    pub n: usize,
    pub m: usize,
    pub max_degree: usize,
    pub components: usize,
    pub treewidth: TwBound,
    pub well_linked: Option<WellLinkedCertificate>,
    /// Minimum conductance found by the cut solver, and whether it is exact.
    pub min_conductance: Option<(Rational, bool)>,
    /// λ₂(L)/Δ, a lower bound on conductance.
    pub spectral_conductance: Option<Rational>,
}

pub fn analyze(g: &Graph, cfg: &SolverConfig, exact_tw_limit: usize) -> Result<Analysis> {
    let connected = g.n() >= 2 && g.is_connected() && g.m() > 0;
    let well_linked = if connected { Some(find_well_linked_set(g, cfg)?) } else { None };
    let min_conductance = if connected {
        match min_conductance_cut(g, cfg) {
            Ok(c) => c.conductance.map(|x| (x, c.exact)),
            Err(Error::NoValidCut) => None,
            Err(e) => return Err(e),
        }
    } else {
        None
    };
    let spectral_conductance = (connected && g.n() <= 2000).then(|| spectral_conductance_bound(g));
    Ok(Analysis {
        n: g.n(),
        m: g.m(),
        max_degree: g.max_degree(),
        components: g.components().len(),
        treewidth: tw_bounds(g, exact_tw_limit),
        well_linked,
        min_conductance,
        spectral_conductance,
    })
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ExpanderDemo {
    pub n: usize,
    pub rounds: usize,
    pub witness: ExpanderWitness,
    pub matchings: Vec<Vec<(usize, usize)>>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Outcome {
    Decomposition { result: DecompositionResult },
    Analysis { analysis: Analysis },
    ErdosPosa { outcome: EpOutcome },
    Expander { demo: ExpanderDemo },
    Failure { error: String, exit_code: i32 },
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RunReport {
    pub schema: String,
    pub command: String,
    pub input: Option<String>,
    pub graph: Option<Graph>,
    pub seed: u64,
    pub params: serde_json::Value,
    pub config: serde_json::Value,
    pub outcome: Outcome,
    pub phi_trace: Vec<usize>,
    pub warnings: Vec<String>,
    /// Wall-clock seconds per phase; excluded from the digest.
    pub timings: BTreeMap<String, f64>,
    pub digest: String,
}

impl RunReport {
    pub fn new(command: &str, input: Option<String>, graph: Option<Graph>, seed: u64, params: serde_json::Value, config: serde_json::Value, outcome: Outcome) -> RunReport {
        let phi_trace = match &outcome {
            Outcome::Decomposition { result } => result.trace.phi.clone(),
            _ => Vec::new(),
        };
        RunReport {
            schema: SCHEMA.into(),
            command: command.into(),
            input,
            graph,
            seed,
            params,
            config,
            outcome,
            phi_trace,
            warnings: Vec::new(),
            timings: BTreeMap::new(),
            digest: String::new(),
        }
    }

    /// JSON with timings and digest blanked; the digest is taken over these bytes.
    pub fn canonical_bytes(&self) -> Vec<u8> {
        let mut r = self.clone();
        r.timings.clear();
        r.digest.clear();
        serde_json::to_vec(&r).expect("report serializes")
    }

    pub fn compute_digest(&self) -> String {
        let h = Sha256::digest(self.canonical_bytes());
        h.iter().map(|b| format!("{b:02x}")).collect()
    }

    pub fn seal(mut self) -> RunReport {
        self.digest = self.compute_digest();
        self
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("report serializes")
    }

    pub fn from_json(text: &str) -> Result<RunReport> {
        serde_json::from_str(text).map_err(|e| Error::Parse { line: e.line(), message: e.to_string() })
    }

    /// φ trace as CSV for plotting.
    pub fn phi_csv(&self) -> String {
        let mut s = String::from("iteration,phi\n");
        for (i, p) in self.phi_trace.iter().enumerate() {
            s.push_str(&format!("{i},{p}\n"));
        }
        s
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct VerifyReport {
    pub checks: Vec<(String, bool)>,
}

impl VerifyReport {
    pub fn ok(&self) -> bool {
        !self.checks.is_empty() && self.checks.iter().all(|c| c.1)
    }
}

fn need_graph(r: &RunReport) -> Result<&Graph> {
    r.graph.as_ref().ok_or_else(|| Error::Precondition("report carries no graph".into()))
}

/// Replays every certificate in the report against its embedded graph.
pub fn verify_report(r: &RunReport, cfg: &SolverConfig) -> Result<VerifyReport> {
    let mut checks = vec![("schema".to_string(), r.schema == SCHEMA), ("digest".to_string(), r.digest == r.compute_digest())];
    match &r.outcome {
        Outcome::Decomposition { result } => {
            let g = need_graph(r)?;
            checks.push(("subgraphs disjoint and certified".into(), result.verify(g, cfg)?));
            checks.push(("phi strictly decreasing".into(), result.phi_decreasing()));
            checks.push(("phi trace matches".into(), r.phi_trace == result.trace.phi));
        }
        Outcome::Analysis { analysis } => {
            let g = need_graph(r)?;
            let tw = &analysis.treewidth;
            checks.push(("lower bound replays".into(), tw.lower_witness.replay(g, cfg)? && tw.lower_witness.lower_bound() == tw.lower));
            checks.push(("decomposition valid".into(), tw.upper_witness.validate(g).is_ok() && tw.upper_witness.width == tw.upper));
            if let Some(w) = &analysis.well_linked {
                checks.push(("well-linked set replays".into(), w.replay(g, cfg)?));
            }
            checks.push(("sizes".into(), analysis.n == g.n() && analysis.m == g.m()));
        }
        Outcome::ErdosPosa { outcome } => {
            let g = need_graph(r)?;
            checks.push(("packing or cover verified".into(), outcome.verify(g, REPLAY_BUDGET)?));
        }
        Outcome::Expander { demo } => {
            let mut union = Graph::empty(demo.n);
            for m in &demo.matchings {
                for &(a, b) in m {
                    union.add_edge(a, b)?;
                }
            }
            checks.push(("graph is the union of matchings".into(), union.sorted_edge_ids() == demo.witness.graph.sorted_edge_ids()));
            checks.push(("expansion replays".into(), demo.witness.replay()));
        }
        Outcome::Failure { .. } => {}
    }
    Ok(VerifyReport { checks })
}
