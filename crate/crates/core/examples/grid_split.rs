//! Split a 12x12 grid into two subgraphs of treewidth at least 2.

use twdecomp::decompose::{run_thm1, PipelineConfig};
use twdecomp::generators;

fn main() {
    let g = generators::grid(12, 12);
    let run = run_thm1(&g, 2, 2, &PipelineConfig::default().with_seed(1));
    let result = run.result.expect("a 12x12 grid splits in two");
    for (part, cert) in result.subgraphs.iter().zip(&result.certificates) {
        println!("{} vertices, treewidth >= {}", part.len(), cert.lower_bound);
    }
}
