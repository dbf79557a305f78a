//! Thin command-line front end over the `agcl` library: compile an
//! objective to a DFA, plan a curriculum, run a full experiment, render a
//! run summary, or run the built-in self-tests.

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};

use agcl::curriculum::{avg_jump, jump_score, sim_g, sim_t};
use agcl::harness::{self, ExperimentConfig};
use agcl::learner::gradient_check;
use agcl::ltlf::{compile_dfa, eval_trace, parse_ltlf, Alphabet, Symbol};

#[derive(Parser)]
#[command(name = "agcl", version, about = "Automaton-guided curriculum learning")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Parse a formula and compile it to a minimal DFA.
    Compile {
        /// Formula text, e.g. "F(tree) & F(rock)".
        #[arg(long)]
        formula: String,
        /// Comma-separated atomic propositions, e.g. "tree,rock".
        #[arg(long)]
        ap: String,
        /// Write Graphviz DOT here instead of stdout.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Synthesize the curriculum for a config without training.
    Plan {
        #[arg(long)]
        config: PathBuf,
        /// Output directory for manifest.json and the DOT files.
        #[arg(long, default_value = "plan-out")]
        out_dir: PathBuf,
    },
    /// Run the full experiment: curriculum plus baselines over all seeds.
    Run {
        #[arg(long)]
        config: PathBuf,
        #[arg(long, default_value = "run-out")]
        out_dir: PathBuf,
        /// Worker threads for independent (method, seed) jobs.
        #[arg(long, default_value_t = 1)]
        threads: usize,
    },
    /// Recompute and print the summary table of a finished run.
    Report {
        #[arg(long)]
        run_dir: PathBuf,
    },
    /// Quick oracle and property checks; exits nonzero on any failure.
    Selftest,
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match dispatch(cli.command) {
        Ok(()) => ExitCode::SUCCESS,
        Err(err) => {
            let record = serde_json::json!({ "error": err.to_string() });
            eprintln!("{record}");
            ExitCode::FAILURE
        }
    }
}

fn dispatch(command: Command) -> Result<(), Box<dyn std::error::Error>> {
    match command {
        Command::Compile { formula, ap, out } => {
            let alphabet = Alphabet::new(ap.split(',').map(str::trim).filter(|s| !s.is_empty()))?;
            let parsed = parse_ltlf(&formula, &alphabet)?;
            let dfa = compile_dfa(&parsed, &alphabet)?;
            eprintln!(
                "{} nodes, {} accepting, initial {}",
                dfa.node_count(),
                dfa.accepting_count(),
                dfa.initial()
            );
            match dfa.get_trace_paths() {
                Ok(paths) => {
                    for p in &paths {
                        eprintln!("path: {}", p.render(&alphabet));
                    }
                }
                Err(e) => eprintln!("paths unavailable: {e}"),
            }
            let dot = dfa.export_dot();
            match out {
                Some(path) => std::fs::write(path, dot)?,
                None => print!("{dot}"),
            }
            Ok(())
        }
        Command::Plan { config, out_dir } => {
            let cfg = load_config(&config)?;
            let plan = harness::plan(&cfg)?;
            harness::write_plan(&plan, &out_dir)?;
            let r = &plan.manifest.curriculum.report;
            eprintln!(
                "curriculum: {} vertices, {} roots, eta {} ({:?}), {} candidates",
                r.vertex_count, r.root_count, r.eta, r.eta_source, r.candidate_count
            );
            eprintln!("artifacts in {}", out_dir.display());
            Ok(())
        }
        Command::Run {
            config,
            out_dir,
            threads,
        } => {
            let cfg = load_config(&config)?;
            let run = harness::run(&cfg, threads)?;
            harness::write_run(&run, &out_dir)?;
            print!("{}", harness::summary_table(&run.summary));
            eprintln!("artifacts in {}", out_dir.display());
            Ok(())
        }
        Command::Report { run_dir } => {
            let curves = harness::parse_curves_csv(&std::fs::read_to_string(
                run_dir.join("curves.csv"),
            )?)?;
            let summary = harness::summarize(&curves, harness::DELTA_THRESHOLD);
            print!("{}", harness::summary_table(&summary));
            Ok(())
        }
        Command::Selftest => selftest(),
    }
}

/// Applies the `AGCL_SEED` master-seed override: replicate seeds become
/// consecutive values starting there.
fn load_config(path: &PathBuf) -> Result<ExperimentConfig, Box<dyn std::error::Error>> {
    let text = std::fs::read_to_string(path)?;
    let mut cfg = ExperimentConfig::from_json(&text)?;
    if let Ok(master) = std::env::var("AGCL_SEED") {
        let base: u64 = master.parse()?;
        cfg.seeds = (0..cfg.seeds.len() as u64).map(|i| base + i).collect();
    }
    Ok(cfg)
}

fn selftest() -> Result<(), Box<dyn std::error::Error>> {
    let mut failures = 0;
    let mut check = |name: &str, ok: bool, detail: String| {
        println!("{} {name}{detail}", if ok { "PASS" } else { "FAIL" });
        if !ok {
            failures += 1;
        }
    };

    // Analytic gradients against central finite differences.
    let worst = (0..3)
        .map(|seed| gradient_check(&[6, 16, 8, 4], seed, 4))
        .fold(0.0, f64::max);
    check(
        "gradient-check",
        worst < 1e-4,
        format!(" (worst relative error {worst:.2e})"),
    );

    // Compiled DFAs against the trace-semantics oracle.
    let suite = [
        ("F p", vec!["p"]),
        ("G p", vec!["p"]),
        ("!p U r", vec!["p", "r"]),
        ("F(tree) & F(rock)", vec!["tree", "rock"]),
    ];
    for (text, ap) in suite {
        let alphabet = Alphabet::new(ap.iter().copied())?;
        let f = parse_ltlf(text, &alphabet)?;
        let dfa = compile_dfa(&f, &alphabet)?;
        let mut mismatches = 0usize;
        let mut traces: Vec<Vec<Symbol>> = vec![vec![]];
        for _ in 0..5 {
            let mut next = Vec::new();
            for t in &traces {
                for sym in 0..alphabet.symbol_count() {
                    let mut t2 = t.clone();
                    t2.push(Symbol(sym as u16));
                    if dfa.accepts(&t2) != eval_trace(&f, &alphabet, &t2) {
                        mismatches += 1;
                    }
                    next.push(t2);
                }
            }
            traces = next;
        }
        check(
            &format!("dfa-oracle `{text}`"),
            mismatches == 0,
            format!(" ({mismatches} mismatches)"),
        );
    }

    // Telescoping identity on a small candidate list.
    let mk = |id: &str, s0: (f64, f64), sf: (f64, f64), target: bool| agcl::TaskConfig {
        id: id.into(),
        s0: agcl::OomdpState::new(
            [("x".to_string(), s0.0), ("y".to_string(), s0.1)]
                .into_iter()
                .collect(),
        ),
        sf: agcl::OomdpState::new(
            [("x".to_string(), sf.0), ("y".to_string(), sf.1)]
                .into_iter()
                .collect(),
        ),
        placement_seed: 0,
        is_target: target,
    };
    let target = mk("t", (2.0, 3.0), (4.0, 5.0), true);
    let tasks = vec![
        mk("a", (0.0, 1.0), (1.0, 0.0), false),
        mk("b", (1.0, 2.0), (2.0, 4.0), false),
        target.clone(),
    ];
    let pair_sum: f64 = tasks
        .windows(2)
        .map(|p| jump_score(&p[0], &p[1], &target).expect("schema"))
        .sum();
    let expected = 0.5 * (2.0 - sim_t(&tasks[0], &target)? - sim_g(&tasks[0], &target)?);
    check(
        "jump-telescoping",
        (pair_sum - expected).abs() < 1e-9,
        format!(" (difference {:.2e})", (pair_sum - expected).abs()),
    );
    let avg = avg_jump(&tasks, &target)?;
    check(
        "avg-jump-divisor",
        (avg - pair_sum / 3.0).abs() < 1e-12,
        String::new(),
    );

    if failures > 0 {
        return Err(format!("{failures} self-test(s) failed").into());
    }
    Ok(())
}
