//! Scratch probe for tuning (removed before release).
use agcl::gridworld::{Action, GridEnv};
use agcl::learner::{train, Hyper, QParams, TaskEnvFactory};
use agcl::oomdp::{OomdpState, TaskConfig};
use agcl::harness::ExperimentConfig;
use rand::Rng;

fn main() {
    let text = std::fs::read_to_string("crates/agcl/configs/desk_pogo_graph.json").unwrap();
    let cfg = ExperimentConfig::from_json(&text).unwrap();
    let spec = cfg.oomdp.clone();
    // v0's task from the plan: 3 trees, 2 rocks, 1 table; start rocks_inv=1; goal trees_inv 1.
    let st = |pairs: &[(&str, f64)]| OomdpState::new(pairs.iter().map(|(k, v)| (k.to_string(), *v)).collect());
    let task = TaskConfig {
        id: "v0".into(),
        s0: st(&[("width", 6.0), ("height", 6.0), ("trees_env", 3.0), ("trees_inv", 0.0),
                 ("rocks_env", 2.0), ("rocks_inv", 1.0), ("crafting_table_env", 1.0)]),
        sf: st(&[("width", 6.0), ("height", 6.0), ("trees_env", 2.0), ("trees_inv", 1.0),
                 ("rocks_env", 2.0), ("rocks_inv", 1.0), ("crafting_table_env", 1.0)]),
        placement_seed: 77,
        is_target: false,
    };
    // Random-policy success over 200 episodes.
    let cap: usize = std::env::var("AGCL_CAP").ok().and_then(|v| v.parse().ok()).unwrap_or(150);
    let gamma: f64 = std::env::var("AGCL_GAMMA").ok().and_then(|v| v.parse().ok()).unwrap_or(0.95);
    let lr: f64 = std::env::var("AGCL_LR").ok().and_then(|v| v.parse().ok()).unwrap_or(5e-4);
    let mut env = GridEnv::new(&task, &spec, cap).unwrap();
    let mut rng = agcl::seed::rng_for(1, "random-policy");
    let mut succ = 0;
    for _ in 0..200 {
        env.reset();
        loop {
            let r = env.step(Action::from_index(rng.random_range(0..5)));
            if r.done { if r.success { succ += 1; } break; }
        }
    }
    println!("random policy: {}/200", succ);

    let factory = TaskEnvFactory { cfg: task, spec, step_cap: cap };
    let hyper = Hyper {
        gamma, learning_rate: lr, eps_end: 0.1,
        batch_size: std::env::var("AGCL_BATCH").ok().and_then(|v| v.parse().ok()).unwrap_or(32),
        train_every: std::env::var("AGCL_TE").ok().and_then(|v| v.parse().ok()).unwrap_or(4),
        n_step: std::env::var("AGCL_N").ok().and_then(|v| v.parse().ok()).unwrap_or(1),
        eval_period: 2000, eval_episodes: 25,
        learning_starts: 500, step_cap: cap, delta_src: 2.0, ..Hyper::default()
    };
    let arch = factory.architecture(&hyper.hidden).unwrap();
    let report = train(&factory, &QParams::init(&arch, 0), 40_000, &hyper, None, 0).unwrap();
    for p in &report.eval_points {
        print!("{}:{} ", p.step, p.success_rate);
    }
    println!();

    // Watch the final greedy policy on a few eval episodes.
    use agcl::learner::{Architecture, Mlp, Workspace};
    let net = Mlp::new(Architecture(report.final_params.arch.clone()), report.final_params.values.clone());
    let mut ws = Workspace::for_arch(&net.arch);
    let mut env = factory.make("eval").unwrap();
    for ep in 0..4 {
        let mut obs = env.reset();
        let mut actions = Vec::new();
        let (succ, steps) = loop {
            let a = {
                let out = net.forward(obs.as_slice(), &mut ws);
                let mut best = 0;
                for (i, &v) in out.iter().enumerate().skip(1) { if v > out[best] { best = i; } }
                best
            };
            actions.push(a);
            let r = env.step(Action::from_index(a));
            obs = r.obs;
            if r.done { break (r.success, actions.len()); }
        };
        let tail: Vec<usize> = actions.iter().rev().take(14).rev().copied().collect();
        println!("ep {ep}: success={succ} steps={steps} tail={tail:?}");
    }
}
