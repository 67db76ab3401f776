//! Browser bindings. Each export takes an edge list as text and returns a
//! JSON object `{ "report": RunReport, "checks": [[name, ok], ...] }`, the
//! checks coming from replaying the report's certificates in the page.

use serde_json::json;
use wasm_bindgen::prelude::*;

use twdecomp::applications::{ep_cycles, ep_mod_cycles, EpConfig};
use twdecomp::cuts::SolverConfig;
use twdecomp::decompose::{run_thm1, run_thm2, PipelineConfig};
use twdecomp::io::{parse_graph, Format};
use twdecomp::report::{analyze, verify_report, Outcome, RunReport};
use twdecomp::Graph;

/// Largest graph the page will accept; bigger inputs belong on the CLI.
pub const MAX_VERTICES: usize = 400;

fn read(text: &str, zero_indexed: bool) -> Result<Graph, String> {
    let g = parse_graph(text.as_bytes(), Format::Edgelist { zero_indexed }).map_err(|e| e.to_string())?;
    if g.n() > MAX_VERTICES {
        return Err(format!("{} vertices; the demo stops at {MAX_VERTICES}", g.n()));
    }
    Ok(g)
}

fn finish(report: RunReport) -> Result<String, String> {
    let report = report.seal();
    let checks = verify_report(&report, &SolverConfig::default()).map_err(|e| e.to_string())?;
    Ok(json!({ "report": report, "checks": checks.checks }).to_string())
}

pub fn analyze_json(text: &str, zero_indexed: bool) -> Result<String, String> {
    let g = read(text, zero_indexed)?;
    let cfg = SolverConfig::default();
    let analysis = analyze(&g, &cfg, 14).map_err(|e| e.to_string())?;
    let params = json!({ "exact_limit": 14 });
    finish(RunReport::new("analyze", None, Some(g), cfg.seed, params, serde_json::to_value(&cfg).unwrap(), Outcome::Analysis { analysis }))
}

pub fn decompose_json(text: &str, zero_indexed: bool, h: usize, r: usize, theorem: u8, seed: u64) -> Result<String, String> {
    if h == 0 || r == 0 {
        return Err("h and r must be positive".into());
    }
    let g = read(text, zero_indexed)?;
    let cfg = PipelineConfig::default().with_seed(seed);
    let run = match theorem {
        1 => run_thm1(&g, h, r, &cfg),
        2 => run_thm2(&g, h, r, &cfg),
        _ => return Err("theorem must be 1 or 2".into()),
    };
    let result = run.result.map_err(|e| e.to_string())?;
    let params = json!({ "h": h, "r": r, "theorem": theorem });
    finish(RunReport::new("decompose", None, Some(g), seed, params, serde_json::to_value(&cfg).unwrap(), Outcome::Decomposition { result }))
}

/// `modulus == 0` asks about all cycles.
pub fn ep_json(text: &str, zero_indexed: bool, k: usize, modulus: usize) -> Result<String, String> {
    if k == 0 {
        return Err("k must be positive".into());
    }
    let g = read(text, zero_indexed)?;
    let cfg = EpConfig::default();
    let outcome = match modulus {
        0 => ep_cycles(&g, k, &cfg),
        m => ep_mod_cycles(&g, k, m, &cfg),
    }
    .map_err(|e| e.to_string())?;
    let params = json!({ "k": k, "mod": (modulus > 0).then_some(modulus) });
    finish(RunReport::new("ep", None, Some(g), 0, params, serde_json::to_value(&cfg).unwrap(), Outcome::ErdosPosa { outcome }))
}

#[wasm_bindgen]
pub fn analyze_graph(text: &str, zero_indexed: bool) -> Result<String, JsError> {
    analyze_json(text, zero_indexed).map_err(|e| JsError::new(&e))
}

#[wasm_bindgen]
pub fn decompose_graph(text: &str, zero_indexed: bool, h: usize, r: usize, theorem: u8, seed: u64) -> Result<String, JsError> {
    decompose_json(text, zero_indexed, h, r, theorem, seed).map_err(|e| JsError::new(&e))
}

#[wasm_bindgen]
pub fn erdos_posa(text: &str, zero_indexed: bool, k: usize, modulus: usize) -> Result<String, JsError> {
    ep_json(text, zero_indexed, k, modulus).map_err(|e| JsError::new(&e))
}
