use std::collections::BTreeMap;
use std::sync::atomic::{AtomicUsize, Ordering};
use std::sync::Mutex;

use serde::{Deserialize, Serialize};

use crate::automaton::Dfa;
use crate::curriculum::{agcg, AgcgOutput, CurriculumDag};
use crate::learner::{
    train, transfer_sequence, transfer_weighted, GsrsShaper, Hyper, QParams, TaskEnvFactory,
};
use crate::ltlf::{compile_dfa, parse_ltlf, Alphabet, Symbol};
use crate::oomdp::{apply_range_noise, OomdpSpec, TaskConfig};
use crate::seed::{derive_seed_indexed, derive_seed};

use super::config::{BaselineKind, ExperimentConfig};
use super::report::{CurveRow, SummaryRow};
use super::stats::welch_t_test;
use super::HarnessError;

/// Success-rate threshold the time-to-threshold metric is computed at.
pub const DELTA_THRESHOLD: f64 = 0.8;

/// Compact transition table for the manifest: node index to
/// (symbol predicate to successor).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DfaSummary {
    pub nodes: usize,
    pub initial: usize,
    pub accepting: Vec<usize>,
    pub alphabet: Vec<String>,
    pub adjacency: BTreeMap<String, BTreeMap<String, usize>>,
}

impl DfaSummary {
    pub fn new(dfa: &Dfa) -> Self {
        let mut adjacency = BTreeMap::new();
        for node in 0..dfa.node_count() {
            let mut row = BTreeMap::new();
            for sym in 0..dfa.alphabet().symbol_count() {
                let predicate = dfa.alphabet().render_symbol(Symbol(sym as u16));
                row.insert(predicate, dfa.step(node, Symbol(sym as u16)));
            }
            adjacency.insert(node.to_string(), row);
        }
        DfaSummary {
            nodes: dfa.node_count(),
            initial: dfa.initial(),
            accepting: (0..dfa.node_count()).filter(|&n| dfa.is_accepting(n)).collect(),
            alphabet: dfa.alphabet().names().to_vec(),
            adjacency,
        }
    }
}

/// Everything needed to reproduce a run bit-for-bit, plus summaries of
/// what the synthesis decided.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunManifest {
    pub tool_version: String,
    pub config: ExperimentConfig,
    pub resolved_hyper: Hyper,
    pub delta_threshold: f64,
    /// Task-space description actually used (post range noise).
    pub effective_oomdp: OomdpSpec,
    pub dfa_summary: DfaSummary,
    pub dfa: Dfa,
    pub curriculum: AgcgOutput,
}

/// Synthesis-only output: manifest and renderings, no training.
#[derive(Debug, Clone)]
pub struct PlanOutput {
    pub manifest: RunManifest,
    pub dfa_dot: String,
    pub curriculum_dot: String,
}

/// Full experiment output.
#[derive(Debug, Clone)]
pub struct RunOutput {
    pub plan: PlanOutput,
    pub curves: Vec<CurveRow>,
    pub summary: Vec<SummaryRow>,
    pub stats_json: String,
}

/// Compiles the objective and synthesizes the curriculum for a config.
pub fn plan(config: &ExperimentConfig) -> Result<PlanOutput, HarnessError> {
    config.validate()?;
    let alphabet = config.alphabet()?;
    let formula = parse_ltlf(&config.formula, &alphabet)?;
    let dfa = compile_dfa(&formula, &alphabet)?;
    let effective_oomdp = if config.noise.enabled {
        apply_range_noise(&config.oomdp, config.noise.seed)
    } else {
        config.oomdp.clone()
    };
    let target = config.target_task();
    let curriculum = agcg(
        &dfa,
        &alphabet,
        &effective_oomdp,
        &target,
        config.mode,
        config.eta,
        &config.sampling,
    )?;
    let manifest = RunManifest {
        tool_version: env!("CARGO_PKG_VERSION").to_string(),
        config: config.clone(),
        resolved_hyper: config.learner.resolve(),
        delta_threshold: DELTA_THRESHOLD,
        effective_oomdp,
        dfa_summary: DfaSummary::new(&dfa),
        dfa: dfa.clone(),
        curriculum: curriculum.clone(),
    };
    Ok(PlanOutput {
        dfa_dot: dfa.export_dot(),
        curriculum_dot: curriculum.dag.export_dot(),
        manifest,
    })
}

/// Earliest step at which the curve reaches the threshold, shifted by the
/// offset already spent elsewhere; `None` when never reached.
pub fn time_to_threshold(curve: &[(u64, f64)], delta: f64, offset: u64) -> Option<u64> {
    curve
        .iter()
        .find(|(_, success)| *success >= delta)
        .map(|(step, _)| offset + step)
}

struct JobContext {
    spec: OomdpSpec,
    dfa: Dfa,
    alphabet: Alphabet,
    hyper: Hyper,
    budget: u64,
    arch: Vec<usize>,
}

fn replicate_factory(
    ctx: &JobContext,
    task: &TaskConfig,
    replicate: u64,
) -> TaskEnvFactory {
    let mut cfg = task.clone();
    cfg.placement_seed = derive_seed_indexed(cfg.placement_seed, "replicate", replicate);
    TaskEnvFactory {
        cfg,
        spec: ctx.spec.clone(),
        step_cap: ctx.hyper.step_cap,
    }
}

/// Trains every vertex of the curriculum in topological order, leaves
/// first: roots start from seeded random parameters, chain vertices copy
/// their parent, merge vertices blend their parents with the recorded
/// transfer weights. Sources stop early at the source success rate; the
/// target trains last with every prior step charged as its offset.
fn run_curriculum(
    ctx: &JobContext,
    dag: &CurriculumDag,
    method: &str,
    replicate: u64,
) -> Result<Vec<CurveRow>, HarnessError> {
    let order = dag.topo_order()?;
    let per_source = (ctx.budget / (2 * dag.vertices.len() as u64)).max(1);
    let mut params: Vec<Option<QParams>> = vec![None; dag.vertices.len()];
    let mut used = 0u64;
    let mut rows = Vec::new();

    for v in order {
        let task = &dag.vertices[v];
        let is_sink = v == dag.sink;
        let budget_v = if is_sink {
            ctx.budget.saturating_sub(used).max(1)
        } else {
            per_source
        };
        let mut in_edges = dag.in_edges(v);
        in_edges.sort_by_key(|e| e.from);
        let init = if in_edges.is_empty() {
            QParams::init(&ctx.arch, derive_seed_indexed(replicate, "init", v as u64))
        } else if in_edges.len() == 1 {
            transfer_sequence(params[in_edges[0].from].as_ref().expect("topo order"))
        } else {
            let sources: Vec<(QParams, f64)> = in_edges
                .iter()
                .map(|e| (params[e.from].clone().expect("topo order"), e.beta))
                .collect();
            transfer_weighted(&sources)?
        };
        let factory = replicate_factory(ctx, task, replicate);
        let report = train(
            &factory,
            &init,
            budget_v,
            &ctx.hyper,
            None,
            derive_seed_indexed(replicate, "train", v as u64),
        )?;
        let phase = format!("v{v}:{}", task.id);
        for p in &report.eval_points {
            rows.push(CurveRow {
                method: method.to_string(),
                seed: replicate,
                phase: phase.clone(),
                cumulative_steps: used + p.step,
                eval_success: p.success_rate,
            });
        }
        used += report.train_steps;
        params[v] = Some(report.final_params);
    }
    Ok(rows)
}

/// Trains the target directly: from seeded random parameters, optionally
/// with the accept-distance shaping bonus wired to the monitor.
fn run_baseline(
    ctx: &JobContext,
    target: &TaskConfig,
    kind: BaselineKind,
    replicate: u64,
) -> Result<Vec<CurveRow>, HarnessError> {
    let shaper = match kind {
        BaselineKind::Scratch => None,
        BaselineKind::Gsrs => Some(GsrsShaper::new(
            ctx.dfa.clone(),
            ctx.alphabet.clone(),
            ctx.hyper.gsrs_c,
        )),
    };
    let init = QParams::init(
        &ctx.arch,
        derive_seed_indexed(replicate, kind.label(), u64::MAX),
    );
    let factory = replicate_factory(ctx, target, replicate);
    let report = train(
        &factory,
        &init,
        ctx.budget,
        &ctx.hyper,
        shaper,
        derive_seed(replicate, kind.label()),
    )?;
    Ok(report
        .eval_points
        .iter()
        .map(|p| CurveRow {
            method: kind.label().to_string(),
            seed: replicate,
            phase: "target".to_string(),
            cumulative_steps: p.step,
            eval_success: p.success_rate,
        })
        .collect())
}

fn mode_label(config: &ExperimentConfig) -> &'static str {
    match config.mode {
        crate::curriculum::Mode::Sequence => "sequence",
        crate::curriculum::Mode::Graph => "graph",
    }
}

/// Runs the whole experiment: the configured curriculum plus every
/// listed baseline, over every seed. Jobs are independent and may run on
/// `threads` worker threads; results are assembled in job order, so the
/// output is identical regardless of parallelism.
pub fn run(config: &ExperimentConfig, threads: usize) -> Result<RunOutput, HarnessError> {
    let plan = plan(config)?;
    let ctx = JobContext {
        spec: plan.manifest.effective_oomdp.clone(),
        dfa: plan.manifest.dfa.clone(),
        alphabet: config.alphabet()?,
        hyper: plan.manifest.resolved_hyper.clone(),
        budget: config.budget,
        arch: {
            let probe = TaskEnvFactory {
                cfg: config.target_task(),
                spec: plan.manifest.effective_oomdp.clone(),
                step_cap: plan.manifest.resolved_hyper.step_cap,
            };
            probe.architecture(&plan.manifest.resolved_hyper.hidden)?
        },
    };
    let target = config.target_task();
    let dag = &plan.manifest.curriculum.dag;
    let method = mode_label(config);

    enum Job {
        Curriculum(u64),
        Baseline(BaselineKind, u64),
    }
    let mut jobs = Vec::new();
    for &seed in &config.seeds {
        jobs.push(Job::Curriculum(seed));
    }
    for &baseline in &config.baselines {
        for &seed in &config.seeds {
            jobs.push(Job::Baseline(baseline, seed));
        }
    }

    let results: Vec<Option<Result<Vec<CurveRow>, HarnessError>>> =
        (0..jobs.len()).map(|_| None).collect();
    let results = Mutex::new(results);
    let next = AtomicUsize::new(0);
    let workers = threads.max(1).min(jobs.len().max(1));
    std::thread::scope(|scope| {
        for _ in 0..workers {
            scope.spawn(|| loop {
                let i = next.fetch_add(1, Ordering::SeqCst);
                if i >= jobs.len() {
                    break;
                }
                let out = match jobs[i] {
                    Job::Curriculum(seed) => run_curriculum(&ctx, dag, method, seed),
                    Job::Baseline(kind, seed) => run_baseline(&ctx, &target, kind, seed),
                };
                results.lock().expect("no poisoned jobs").get_mut(i).map(|slot| *slot = Some(out));
            });
        }
    });

    let mut curves = Vec::new();
    for slot in results.into_inner().expect("workers joined") {
        curves.extend(slot.expect("every job ran")?);
    }

    let summary = super::report::summarize(&curves, DELTA_THRESHOLD);
    let stats_json = compare_methods(&summary, method, &config.baselines, config.budget);

    Ok(RunOutput {
        plan,
        curves,
        summary,
        stats_json,
    })
}

/// Welch tests of the curriculum method against each baseline on
/// time-to-threshold, with never-reached runs charged the full budget.
fn compare_methods(
    summary: &[SummaryRow],
    method: &str,
    baselines: &[BaselineKind],
    budget: u64,
) -> String {
    let samples = |m: &str| -> Vec<f64> {
        summary
            .iter()
            .filter(|r| r.method == m)
            .map(|r| r.time_to_threshold.unwrap_or(budget) as f64)
            .collect()
    };
    let mut out = BTreeMap::new();
    let a = samples(method);
    for b in baselines {
        let bs = samples(b.label());
        let key = format!("{method}_vs_{}", b.label());
        let value = if a.len() >= 2 && bs.len() >= 2 {
            match welch_t_test(&a, &bs) {
                Ok(t) => serde_json::to_value(t).expect("serializable"),
                Err(e) => serde_json::json!({ "error": e.to_string() }),
            }
        } else {
            serde_json::json!({ "error": "needs at least two seeds per method" })
        };
        out.insert(key, value);
    }
    serde_json::to_string_pretty(&out).expect("serializable") + "\n"
}
