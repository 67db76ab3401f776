//! `twdecomp`: decompositions, analyses and Erdős–Pósa runs on graph files.
//!
//! Exit codes: 0 success, 1 verification failure, 2 infeasible parameters,
//! 3 pipeline failure, 64 usage error, 66 unreadable input.

use std::io::Write;
use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::time::Instant;

use clap::{Parser, Subcommand, ValueEnum};
use serde_json::json;

use twdecomp::applications::{ep_cycles, ep_mod_cycles, EpConfig, EpStrategy};
use twdecomp::cuts::SolverConfig;
use twdecomp::decompose::{run_thm1, run_thm2, PipelineConfig};
use twdecomp::expander::{cut_matching_game, RandomMatching};
use twdecomp::io::{parse_graph, Format};
use twdecomp::report::{analyze, verify_report, ExpanderDemo, Outcome, RunReport};
use twdecomp::{Error, Graph};

const EXIT_VERIFY: u8 = 1;
const EXIT_INFEASIBLE: u8 = 2;
const EXIT_PIPELINE: u8 = 3;
const EXIT_USAGE: u8 = 64;
const EXIT_NOINPUT: u8 = 66;

#[derive(Parser)]
#[command(name = "twdecomp", version, about = "Disjoint large-treewidth subgraphs with replayable certificates")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Clone, Copy, ValueEnum)]
enum InputFormat {
    Auto,
    Dimacs,
    Edgelist,
}

#[derive(clap::Args)]
struct Input {
    /// Graph file (DIMACS `p edge` or whitespace edge list).
    file: PathBuf,
    #[arg(long, value_enum, default_value = "auto")]
    format: InputFormat,
    /// Edge-list ids start at 0 instead of 1.
    #[arg(long)]
    zero_indexed: bool,
}

#[derive(clap::Args)]
struct Output {
    /// Write the JSON report here instead of stdout.
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Subcommand)]
enum Command {
    /// Split the graph into h disjoint subgraphs of treewidth ≥ r.
    Decompose {
        #[command(flatten)]
        input: Input,
        #[arg(long, value_parser = clap::value_parser!(u64).range(1..))]
        h: u64,
        #[arg(long, value_parser = clap::value_parser!(u64).range(1..))]
        r: u64,
        #[arg(long, default_value = "1", value_parser = ["1", "2"])]
        theorem: String,
        /// Integer seed, or `random`.
        #[arg(long, default_value = "0")]
        seed: String,
        /// JSON file with pipeline settings; missing fields keep their defaults.
        #[arg(long)]
        config: Option<PathBuf>,
        /// Also write the φ trace as CSV.
        #[arg(long)]
        csv: Option<PathBuf>,
        #[command(flatten)]
        output: Output,
    },
    /// Treewidth bounds, a well-linked set and the conductance profile.
    Analyze {
        #[command(flatten)]
        input: Input,
        #[arg(long, default_value_t = 18)]
        exact_limit: usize,
        #[command(flatten)]
        output: Output,
    },
    /// Replay every certificate in a report.
    Verify { report: PathBuf },
    /// k disjoint cycles or a set meeting all of them.
    Ep {
        #[command(flatten)]
        input: Input,
        #[arg(long, value_parser = clap::value_parser!(u64).range(1..))]
        k: u64,
        /// Only cycles whose length is a multiple of this.
        #[arg(long = "mod", value_parser = clap::value_parser!(u64).range(2..))]
        modulus: Option<u64>,
        #[arg(long, value_enum, default_value = "thomassen")]
        strategy: Strategy,
        #[arg(long, default_value = "0")]
        seed: String,
        #[command(flatten)]
        output: Output,
    },
    /// Build an expander with the cut-matching game.
    Expander {
        #[arg(long, value_parser = clap::value_parser!(u64).range(2..))]
        n: u64,
        #[arg(long)]
        rounds: Option<usize>,
        #[arg(long, default_value = "0")]
        seed: String,
        #[command(flatten)]
        output: Output,
    },
}

#[derive(Clone, Copy, ValueEnum)]
enum Strategy {
    Thomassen,
    DivideConquer,
}

struct Failure {
    code: u8,
    message: String,
}

impl Failure {
    fn new(code: u8, message: impl Into<String>) -> Failure {
        Failure { code, message: message.into() }
    }
}

fn code_for(e: &Error) -> u8 {
    match e {
        Error::Infeasible(_) | Error::Precondition(_) => EXIT_INFEASIBLE,
        _ => EXIT_PIPELINE,
    }
}

fn parse_seed(s: &str) -> Result<u64, Failure> {
    if s == "random" {
        let nanos = std::time::SystemTime::now().duration_since(std::time::UNIX_EPOCH).map(|d| d.as_nanos()).unwrap_or(0);
        return Ok((nanos as u64) ^ ((nanos >> 64) as u64) ^ u64::from(std::process::id()));
    }
    s.parse().map_err(|_| Failure::new(EXIT_USAGE, format!("--seed expects an integer or `random`, got {s:?}")))
}

fn read_graph(input: &Input) -> Result<Graph, Failure> {
    let bytes = std::fs::read(&input.file).map_err(|e| Failure::new(EXIT_NOINPUT, format!("cannot read {}: {e}", input.file.display())))?;
    let path = input.file.to_string_lossy();
    let format = match input.format {
        InputFormat::Auto => Format::from_path(&path, input.zero_indexed),
        InputFormat::Dimacs => Format::Dimacs,
        InputFormat::Edgelist => Format::Edgelist { zero_indexed: input.zero_indexed },
    };
    parse_graph(&bytes, format).map_err(|e| Failure::new(EXIT_NOINPUT, format!("{}: {e}", input.file.display())))
}

fn write_out(path: Option<&Path>, text: &str) -> Result<(), Failure> {
    match path {
        Some(p) => std::fs::write(p, text).map_err(|e| Failure::new(EXIT_PIPELINE, format!("cannot write {}: {e}", p.display()))),
        // A closed pipe (`| head`) is not an error worth reporting.
        None => match writeln!(std::io::stdout().lock(), "{text}") {
            Err(e) if e.kind() != std::io::ErrorKind::BrokenPipe => Err(Failure::new(EXIT_PIPELINE, format!("cannot write stdout: {e}"))),
            _ => Ok(()),
        },
    }
}

fn emit(report: RunReport, started: Instant, output: &Output) -> Result<(), Failure> {
    let mut report = report.seal();
    report.timings.insert("total_seconds".into(), started.elapsed().as_secs_f64());
    write_out(output.out.as_deref(), &report.to_json())
}

fn input_name(input: &Input) -> Option<String> {
    input.file.file_name().map(|s| s.to_string_lossy().into_owned())
}

fn run(cli: Cli) -> Result<(), Failure> {
    let started = Instant::now();
    match cli.command {
        Command::Decompose { input, h, r, theorem, seed, config, csv, output } => {
            let seed = parse_seed(&seed)?;
            let g = read_graph(&input)?;
            let base: PipelineConfig = match &config {
                Some(p) => {
                    let text = std::fs::read_to_string(p).map_err(|e| Failure::new(EXIT_NOINPUT, format!("cannot read {}: {e}", p.display())))?;
                    serde_json::from_str(&text).map_err(|e| Failure::new(EXIT_USAGE, format!("{}: {e}", p.display())))?
                }
                None => PipelineConfig::default(),
            };
            let cfg = base.with_seed(seed);
            let (h, r) = (h as usize, r as usize);
            let run = if theorem == "1" { run_thm1(&g, h, r, &cfg) } else { run_thm2(&g, h, r, &cfg) };
            let params = json!({ "h": h, "r": r, "theorem": theorem.parse::<u8>().unwrap_or(1) });
            let config = serde_json::to_value(&cfg).expect("config serializes");
            let (outcome, failure) = match run.result {
                Ok(result) => (Outcome::Decomposition { result }, None),
                Err(e) => {
                    let code = code_for(&e);
                    (Outcome::Failure { error: e.to_string(), exit_code: i32::from(code) }, Some(Failure::new(code, e.to_string())))
                }
            };
            let mut report = RunReport::new("decompose", input_name(&input), Some(g), seed, params, config, outcome);
            if failure.is_some() {
                report.phi_trace = run.trace.phi.clone();
                report.warnings = run.trace.iterations.iter().flat_map(|it| it.notes.iter().cloned()).collect();
            }
            if let Some(p) = &csv {
                write_out(Some(p), &report.phi_csv())?;
            }
            if failure.is_none() || output.out.is_some() {
                emit(report, started, &output)?;
            }
            failure.map_or(Ok(()), Err)
        }
        Command::Analyze { input, exact_limit, output } => {
            let g = read_graph(&input)?;
            let cfg = SolverConfig::default();
            let analysis = analyze(&g, &cfg, exact_limit).map_err(|e| Failure::new(code_for(&e), e.to_string()))?;
            let report = RunReport::new(
                "analyze",
                input_name(&input),
                Some(g),
                cfg.seed,
                json!({ "exact_limit": exact_limit }),
                serde_json::to_value(&cfg).expect("config serializes"),
                Outcome::Analysis { analysis },
            );
            emit(report, started, &output)
        }
        Command::Verify { report } => {
            let text = std::fs::read_to_string(&report).map_err(|e| Failure::new(EXIT_NOINPUT, format!("cannot read {}: {e}", report.display())))?;
            let r = RunReport::from_json(&text).map_err(|e| Failure::new(EXIT_VERIFY, format!("{}: {e}", report.display())))?;
            let v = verify_report(&r, &SolverConfig::default()).map_err(|e| Failure::new(EXIT_VERIFY, e.to_string()))?;
            for (name, ok) in &v.checks {
                println!("{} {name}", if *ok { "ok  " } else { "FAIL" });
            }
            if v.ok() {
                Ok(())
            } else {
                Err(Failure::new(EXIT_VERIFY, "report does not verify"))
            }
        }
        Command::Ep { input, k, modulus, strategy, seed, output } => {
            let seed = parse_seed(&seed)?;
            let g = read_graph(&input)?;
            let strategy = match strategy {
                Strategy::Thomassen => EpStrategy::Thomassen,
                Strategy::DivideConquer => EpStrategy::DivideConquer,
            };
            let cfg = EpConfig { strategy, pipeline: PipelineConfig::default().with_seed(seed), ..EpConfig::default() };
            let k = k as usize;
            let res = match modulus {
                Some(m) => ep_mod_cycles(&g, k, m as usize, &cfg),
                None => ep_cycles(&g, k, &cfg),
            };
            let outcome = res.map_err(|e| Failure::new(code_for(&e), e.to_string()))?;
            let report = RunReport::new(
                "ep",
                input_name(&input),
                Some(g),
                seed,
                json!({ "k": k, "mod": modulus }),
                serde_json::to_value(&cfg).expect("config serializes"),
                Outcome::ErdosPosa { outcome },
            );
            emit(report, started, &output)
        }
        Command::Expander { n, rounds, seed, output } => {
            let seed = parse_seed(&seed)?;
            let n = n as usize;
            let rounds = rounds.unwrap_or_else(|| twdecomp::expander::default_rounds(n));
            let res = cut_matching_game(n, rounds, &mut RandomMatching::new(seed), seed).map_err(|e| Failure::new(code_for(&e), e.to_string()))?;
            let demo = ExpanderDemo { n, rounds, witness: res.witness, matchings: res.matchings };
            let report = RunReport::new("expander", None, None, seed, json!({ "n": n, "rounds": rounds }), serde_json::Value::Null, Outcome::Expander { demo });
            emit(report, started, &output)
        }
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { EXIT_USAGE } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(f) => {
            eprintln!("twdecomp: {}", f.message);
            ExitCode::from(f.code)
        }
    }
}
