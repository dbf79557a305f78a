//! Scratch probe: pre-craft mastery then craft transfer (removed before release).
use agcl::harness::ExperimentConfig;
use agcl::learner::{train, transfer_sequence, Hyper, QParams, TaskEnvFactory};
use agcl::oomdp::{OomdpState, TaskConfig};

fn st(pairs: &[(&str, f64)]) -> OomdpState {
    OomdpState::new(pairs.iter().map(|(k, v)| (k.to_string(), *v)).collect())
}

fn main() {
    let text = std::fs::read_to_string("crates/agcl/configs/desk_pogo_graph.json").unwrap();
    let cfg = ExperimentConfig::from_json(&text).unwrap();
    let spec = cfg.oomdp.clone();
    let hyper = cfg.learner.resolve();

    // Stage A: collect 2 trees + 1 rock on the exact target world (no craft).
    let pre = TaskConfig {
        id: "pre".into(),
        s0: st(&[("width", 6.0), ("height", 6.0), ("trees_env", 2.0), ("trees_inv", 0.0),
                 ("rocks_env", 1.0), ("rocks_inv", 0.0), ("crafting_table_env", 1.0)]),
        sf: st(&[("width", 6.0), ("height", 6.0), ("trees_env", 0.0), ("trees_inv", 2.0),
                 ("rocks_env", 0.0), ("rocks_inv", 1.0), ("crafting_table_env", 1.0)]),
        placement_seed: 11,
        is_target: false,
    };
    let fa = TaskEnvFactory { cfg: pre, spec: spec.clone(), step_cap: hyper.step_cap };
    let arch = fa.architecture(&hyper.hidden).unwrap();
    let mut h = hyper.clone();
    h.delta_src = 2.0;
    let budget_a: u64 = std::env::args().nth(1).and_then(|a| a.parse().ok()).unwrap_or(60_000);
    let ra = train(&fa, &QParams::init(&arch, 0), budget_a, &h, None, 0).unwrap();
    println!("stage A (collect on target world, {budget_a} steps):");
    for p in ra.eval_points.iter().step_by(2) { print!("{}:{} ", p.step, p.success_rate); }
    println!();

    // Stage B: the craft target from A's parameters.
    let target = cfg.target_task();
    let mut tt = target.clone();
    tt.placement_seed = 12;
    let fb = TaskEnvFactory { cfg: tt, spec, step_cap: hyper.step_cap };
    let budget_b: u64 = std::env::args().nth(2).and_then(|a| a.parse().ok()).unwrap_or(120_000);
    let rb = train(&fb, &transfer_sequence(&ra.final_params), budget_b, &h, None, 1).unwrap();
    println!("stage B (craft target from A init, {budget_b} steps):");
    for p in rb.eval_points.iter().step_by(2) { print!("{}:{} ", p.step, p.success_rate); }
    println!();
}
