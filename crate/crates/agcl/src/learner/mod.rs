//! From-scratch DQN learner: experience replay, target-network updates,
//! epsilon-greedy exploration; plus the two value-function transfer
//! mechanisms (exact parameter copy for chains, convex parameter blending
//! for graph merges) and the accept-distance reward shaper.

mod net;
mod replay;

pub use net::{gradient_check, Architecture, Mlp, Workspace};
pub use replay::{ReplayBuffer, Transition};

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::automaton::{Dfa, NodeId};
use crate::gridworld::{Action, EnvError, GridEnv};
use crate::ltlf::{Alphabet, Symbol};
use crate::oomdp::{OomdpSpec, TaskConfig};
use crate::seed::{derive_seed, fnv1a, rng_for};
use net::{init_params, Adam};

#[derive(Debug, Clone, PartialEq, Error)]
pub enum LearnerError {
    #[error("architecture mismatch: {0}")]
    ArchMismatch(String),
    #[error("training budget must be positive")]
    BadBudget,
    #[error("transfer weights must be non-negative and sum to 1, got {0}")]
    BadWeights(f64),
    #[error("non-finite loss at step {step} ({details})")]
    NonFiniteLoss { step: u64, details: String },
    #[error("corrupt parameter blob: {0}")]
    BadBlob(String),
    #[error(transparent)]
    Env(#[from] EnvError),
}

/// Flat parameter vector of the action-value approximator, together with
/// its architecture descriptor and initialization seed. All tasks in one
/// run share one architecture, which is what makes parameter blending
/// well-defined.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct QParams {
    pub arch: Vec<usize>,
    pub seed: u64,
    pub values: Vec<f64>,
}

const BLOB_MAGIC: &[u8; 4] = b"AGQP";
const BLOB_VERSION: u16 = 1;

impl QParams {
    /// Fresh seeded initialization for the given layer widths.
    pub fn init(arch: &[usize], seed: u64) -> QParams {
        let a = Architecture(arch.to_vec());
        let values = init_params(&a, &mut rng_for(seed, "q-init"));
        QParams {
            arch: arch.to_vec(),
            seed,
            values,
        }
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    /// Little-endian binary encoding: magic, version, architecture,
    /// seed, parameter count, raw values, FNV-1a checksum of the values.
    pub fn to_bytes(&self) -> Vec<u8> {
        let mut out = Vec::with_capacity(24 + 4 * self.arch.len() + 8 * self.values.len());
        out.extend_from_slice(BLOB_MAGIC);
        out.extend_from_slice(&BLOB_VERSION.to_le_bytes());
        out.extend_from_slice(&(self.arch.len() as u16).to_le_bytes());
        for &d in &self.arch {
            out.extend_from_slice(&(d as u32).to_le_bytes());
        }
        out.extend_from_slice(&self.seed.to_le_bytes());
        out.extend_from_slice(&(self.values.len() as u64).to_le_bytes());
        let value_start = out.len();
        for &v in &self.values {
            out.extend_from_slice(&v.to_le_bytes());
        }
        let checksum = fnv1a(0, &out[value_start..]);
        out.extend_from_slice(&checksum.to_le_bytes());
        out
    }

    pub fn from_bytes(bytes: &[u8]) -> Result<QParams, LearnerError> {
        let bad = |m: &str| LearnerError::BadBlob(m.to_string());
        let mut pos = 0usize;
        let take = |pos: &mut usize, n: usize| -> Result<&[u8], LearnerError> {
            if *pos + n > bytes.len() {
                return Err(bad("truncated"));
            }
            let s = &bytes[*pos..*pos + n];
            *pos += n;
            Ok(s)
        };
        if take(&mut pos, 4)? != BLOB_MAGIC {
            return Err(bad("wrong magic"));
        }
        let version = u16::from_le_bytes(take(&mut pos, 2)?.try_into().unwrap());
        if version != BLOB_VERSION {
            return Err(bad(&format!("unsupported version {version}")));
        }
        let arch_len = u16::from_le_bytes(take(&mut pos, 2)?.try_into().unwrap()) as usize;
        let mut arch = Vec::with_capacity(arch_len);
        for _ in 0..arch_len {
            arch.push(u32::from_le_bytes(take(&mut pos, 4)?.try_into().unwrap()) as usize);
        }
        let seed = u64::from_le_bytes(take(&mut pos, 8)?.try_into().unwrap());
        let count = u64::from_le_bytes(take(&mut pos, 8)?.try_into().unwrap()) as usize;
        let value_start = pos;
        let mut values = Vec::with_capacity(count);
        for _ in 0..count {
            values.push(f64::from_le_bytes(take(&mut pos, 8)?.try_into().unwrap()));
        }
        let stored = u64::from_le_bytes(take(&mut pos, 8)?.try_into().unwrap());
        let computed = fnv1a(0, &bytes[value_start..value_start + 8 * count]);
        if stored != computed {
            return Err(bad("checksum mismatch"));
        }
        let expected = Architecture(arch.clone()).param_count();
        if expected != count {
            return Err(bad(&format!(
                "architecture wants {expected} parameters, blob has {count}"
            )));
        }
        Ok(QParams { arch, seed, values })
    }
}

/// Sequence transfer: the learned source parameters become the next
/// task's initial parameters, element for element.
pub fn transfer_sequence(src: &QParams) -> QParams {
    src.clone()
}

/// Graph transfer: element-wise convex combination of the source
/// parameter vectors. Weights must be non-negative and sum to one; all
/// architectures must match.
pub fn transfer_weighted(sources: &[(QParams, f64)]) -> Result<QParams, LearnerError> {
    assert!(!sources.is_empty(), "at least one source required");
    let arch = &sources[0].0.arch;
    for (p, beta) in sources {
        if &p.arch != arch {
            return Err(LearnerError::ArchMismatch(format!(
                "{:?} vs {arch:?}",
                p.arch
            )));
        }
        if *beta < 0.0 {
            return Err(LearnerError::BadWeights(*beta));
        }
    }
    let total: f64 = sources.iter().map(|(_, b)| b).sum();
    if (total - 1.0).abs() > 1e-9 {
        return Err(LearnerError::BadWeights(total));
    }
    let mut values = vec![0.0; sources[0].0.values.len()];
    for (p, beta) in sources {
        for (o, &v) in values.iter_mut().zip(&p.values) {
            *o += beta * v;
        }
    }
    Ok(QParams {
        arch: arch.clone(),
        seed: sources[0].0.seed,
        values,
    })
}

/// All learner knobs, recorded verbatim in the run manifest.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Hyper {
    pub replay_capacity: usize,
    pub batch_size: usize,
    pub gamma: f64,
    pub learning_rate: f64,
    pub eps_start: f64,
    pub eps_end: f64,
    /// Fraction of the task budget the epsilon anneal spans.
    pub eps_fraction: f64,
    pub target_sync: u64,
    /// Gradient step every this many environment steps.
    pub train_every: u64,
    /// Temporal-difference lookahead: rewards are aggregated over windows
    /// of up to this many steps before bootstrapping.
    pub n_step: usize,
    /// Replay size required before updates begin.
    pub learning_starts: usize,
    pub eval_period: u64,
    pub eval_episodes: usize,
    /// Early-stop success rate for source tasks.
    pub delta_src: f64,
    /// Internal scale applied to rewards before the TD update.
    pub reward_scale: f64,
    pub hidden: Vec<usize>,
    pub step_cap: usize,
    /// Shaping coefficient for the accept-distance baseline.
    pub gsrs_c: f64,
}

impl Default for Hyper {
    fn default() -> Self {
        Self {
            replay_capacity: 50_000,
            batch_size: 64,
            gamma: 0.99,
            learning_rate: 5e-4,
            eps_start: 1.0,
            eps_end: 0.05,
            eps_fraction: 0.1,
            target_sync: 1000,
            train_every: 4,
            n_step: 1,
            learning_starts: 1000,
            eval_period: 5000,
            eval_episodes: 50,
            delta_src: 0.9,
            reward_scale: 1e-3,
            hidden: vec![64, 64],
            step_cap: 500,
            gsrs_c: 1.0,
        }
    }
}

/// Builds environments for one task: the training stream plus a fixed
/// evaluation stream, both derived from the task's placement seed.
#[derive(Debug, Clone)]
pub struct TaskEnvFactory {
    pub cfg: TaskConfig,
    pub spec: OomdpSpec,
    pub step_cap: usize,
}

impl TaskEnvFactory {
    pub fn make(&self, stream: &str) -> Result<GridEnv, EnvError> {
        let mut cfg = self.cfg.clone();
        cfg.placement_seed = derive_seed(self.cfg.placement_seed, stream);
        GridEnv::new(&cfg, &self.spec, self.step_cap)
    }

    /// Layer widths for this task's environment.
    pub fn architecture(&self, hidden: &[usize]) -> Result<Vec<usize>, EnvError> {
        let env = self.make("probe")?;
        let mut arch = vec![env.observation_len()];
        arch.extend_from_slice(hidden);
        arch.push(env.action_count());
        Ok(arch)
    }
}

/// Per-step shaping bonus inversely proportional to the monitor's
/// distance from acceptance: `c / (1 + distance)`, zero from nodes that
/// cannot accept anymore.
pub fn gsrs_bonus(dfa: &Dfa, node: NodeId, c: f64) -> f64 {
    match dfa.accept_distance(node) {
        Some(d) => c / (1 + d) as f64,
        None => 0.0,
    }
}

/// Synchronous monitor plus bonus computation for the reward-shaping
/// baseline. Owns the per-episode monitor node.
#[derive(Debug, Clone)]
pub struct GsrsShaper {
    dfa: Dfa,
    alphabet: Alphabet,
    c: f64,
    node: NodeId,
}

impl GsrsShaper {
    pub fn new(dfa: Dfa, alphabet: Alphabet, c: f64) -> Self {
        let node = dfa.initial();
        Self {
            dfa,
            alphabet,
            c,
            node,
        }
    }

    pub fn reset(&mut self) {
        self.node = self.dfa.initial();
    }

    /// Advances the monitor with this step's event labels and returns the
    /// bonus for the node arrived at.
    pub fn on_step(&mut self, labels: &[String]) -> f64 {
        let mut bits = 0u16;
        for l in labels {
            if let Some(i) = self.alphabet.index_of(l) {
                bits |= 1 << i;
            }
        }
        let (next, _) = self.dfa.advance_monitor(self.node, Symbol(bits));
        self.node = next;
        gsrs_bonus(&self.dfa, next, self.c)
    }
}

/// One finished episode during training.
#[derive(Debug, Clone, PartialEq)]
pub struct EpisodeRecord {
    /// Training step at which the episode ended.
    pub end_step: u64,
    /// Undiscounted raw environment return (shaping excluded).
    pub return_raw: f64,
    pub success: bool,
}

/// One evaluation checkpoint.
#[derive(Debug, Clone, PartialEq)]
pub struct EvalPoint {
    pub step: u64,
    pub success_rate: f64,
}

/// Everything a training phase produced. Evaluation rollouts never count
/// against the training budget; their steps are tracked separately.
#[derive(Debug, Clone)]
pub struct TrainReport {
    pub episodes: Vec<EpisodeRecord>,
    pub eval_points: Vec<EvalPoint>,
    pub train_steps: u64,
    pub eval_steps: u64,
    pub early_stopped: bool,
    pub budget_exhausted: bool,
    pub final_params: QParams,
}

fn check_arch(factory: &TaskEnvFactory, init: &QParams) -> Result<(), LearnerError> {
    let env = factory.make("probe")?;
    if init.arch.len() < 2 {
        return Err(LearnerError::ArchMismatch("fewer than two layers".into()));
    }
    if init.arch[0] != env.observation_len() || *init.arch.last().unwrap() != env.action_count() {
        return Err(LearnerError::ArchMismatch(format!(
            "network {:?} does not fit observations ({}) and actions ({})",
            init.arch,
            env.observation_len(),
            env.action_count()
        )));
    }
    if init.values.len() != Architecture(init.arch.clone()).param_count() {
        return Err(LearnerError::ArchMismatch(
            "parameter vector does not match the architecture".into(),
        ));
    }
    Ok(())
}

/// Pops the oldest pending step and stores it with its discounted
/// in-window reward sum and the bootstrap discount for the state the
/// window ended at. Goal termination zeroes the bootstrap.
fn emit_front(
    window: &mut std::collections::VecDeque<(Box<[f64]>, usize, f64)>,
    end_obs: &crate::gridworld::Observation,
    success: bool,
    gamma: f64,
    replay: &mut ReplayBuffer,
) {
    let span = window.len();
    let (state, action, _) = window.front().cloned().expect("window nonempty");
    let mut reward = 0.0;
    for (i, (_, _, r)) in window.iter().enumerate() {
        reward += gamma.powi(i as i32) * r;
    }
    window.pop_front();
    replay.push(Transition {
        state,
        action,
        reward,
        next_state: end_obs.0.clone().into_boxed_slice(),
        discount: if success { 0.0 } else { gamma.powi(span as i32) },
    });
}

/// Epsilon-greedy temporal-difference training with replay and periodic
/// target sync, until the budget is exhausted or an evaluation checkpoint
/// reaches the early-stop rate. Pure function of (task, init, seeds,
/// hyper).
pub fn train(
    factory: &TaskEnvFactory,
    init: &QParams,
    budget: u64,
    hyper: &Hyper,
    mut shaper: Option<GsrsShaper>,
    train_seed: u64,
) -> Result<TrainReport, LearnerError> {
    if budget == 0 {
        return Err(LearnerError::BadBudget);
    }
    check_arch(factory, init)?;

    let arch = Architecture(init.arch.clone());
    let mut net = Mlp::new(arch.clone(), init.values.clone());
    let mut target = Mlp::new(arch.clone(), init.values.clone());
    let mut ws = Workspace::for_arch(&arch);
    let mut grad = vec![0.0; net.params.len()];
    let mut adam = Adam::new(hyper.learning_rate, net.params.len());
    let mut replay = ReplayBuffer::new(hyper.replay_capacity);
    let mut window: std::collections::VecDeque<(Box<[f64]>, usize, f64)> =
        std::collections::VecDeque::new();
    let mut explore_rng = rng_for(train_seed, "explore");
    let mut batch_rng = rng_for(train_seed, "batch");

    let mut env = factory.make("train")?;
    let n_actions = env.action_count();
    let warmup = hyper.learning_starts.max(hyper.batch_size);
    let anneal_steps = (hyper.eps_fraction * budget as f64).max(1.0);

    let mut episodes = Vec::new();
    let mut eval_points = Vec::new();
    let mut eval_steps = 0u64;
    let mut early_stopped = false;
    let mut train_steps = 0u64;

    let mut obs = env.reset();
    if let Some(s) = shaper.as_mut() {
        s.reset();
    }
    let mut ep_return = 0.0;

    for step in 1..=budget {
        train_steps = step;
        let eps = if (step as f64) < anneal_steps {
            hyper.eps_start + (hyper.eps_end - hyper.eps_start) * step as f64 / anneal_steps
        } else {
            hyper.eps_end
        };
        let action = if rand::Rng::random::<f64>(&mut explore_rng) < eps {
            rand::Rng::random_range(&mut explore_rng, 0..n_actions)
        } else {
            net.argmax(obs.as_slice(), &mut ws)
        };
        let r = env.step(Action::from_index(action));
        let bonus = shaper.as_mut().map_or(0.0, |s| s.on_step(&r.labels));
        window.push_back((
            obs.0.clone().into_boxed_slice(),
            action,
            (r.reward + bonus) * hyper.reward_scale,
        ));
        // Emit the oldest window entry once the lookahead is full; on an
        // episode boundary, flush everything against the final state.
        if window.len() == hyper.n_step.max(1) && !r.done {
            emit_front(&mut window, &r.obs, false, hyper.gamma, &mut replay);
        }
        if r.done {
            while !window.is_empty() {
                emit_front(&mut window, &r.obs, r.success, hyper.gamma, &mut replay);
            }
        }
        ep_return += r.reward;
        obs = r.obs;
        if r.done {
            episodes.push(EpisodeRecord {
                end_step: step,
                return_raw: ep_return,
                success: r.success,
            });
            ep_return = 0.0;
            obs = env.reset();
            if let Some(s) = shaper.as_mut() {
                s.reset();
            }
        }

        if replay.len() >= warmup && step % hyper.train_every == 0 {
            let indices = replay.sample_indices(hyper.batch_size, &mut batch_rng);
            let mut targets = Vec::with_capacity(indices.len());
            for &i in &indices {
                let t = replay.get(i);
                let y = if t.discount == 0.0 {
                    t.reward
                } else {
                    let q_next = target.forward(&t.next_state, &mut ws);
                    let max_next = q_next.iter().copied().fold(f64::NEG_INFINITY, f64::max);
                    t.reward + t.discount * max_next
                };
                targets.push(y);
            }
            let batch: Vec<(&[f64], usize, f64)> = indices
                .iter()
                .zip(&targets)
                .map(|(&i, &y)| {
                    let t = replay.get(i);
                    (&*t.state, t.action, y)
                })
                .collect();
            let loss = net.batch_gradient(&batch, &mut grad, &mut ws);
            if !loss.is_finite() {
                return Err(LearnerError::NonFiniteLoss {
                    step,
                    details: format!(
                        "batch of {} with parameter norm {:.3e}",
                        batch.len(),
                        net.params.iter().map(|p| p * p).sum::<f64>().sqrt()
                    ),
                });
            }
            adam.step(&mut net.params, &grad);
        }

        if step % hyper.target_sync == 0 {
            target.params.copy_from_slice(&net.params);
        }

        if step % hyper.eval_period == 0 || step == budget {
            let (rate, used) = evaluate_net(&net, factory, hyper.eval_episodes)?;
            eval_steps += used;
            eval_points.push(EvalPoint {
                step,
                success_rate: rate,
            });
            if rate >= hyper.delta_src {
                early_stopped = true;
                break;
            }
        }
    }

    Ok(TrainReport {
        episodes,
        eval_points,
        train_steps,
        eval_steps,
        early_stopped,
        budget_exhausted: !early_stopped,
        final_params: QParams {
            arch: init.arch.clone(),
            seed: init.seed,
            values: net.params,
        },
    })
}

fn evaluate_net(
    net: &Mlp,
    factory: &TaskEnvFactory,
    episodes: usize,
) -> Result<(f64, u64), LearnerError> {
    assert!(episodes >= 1);
    let mut env = factory.make("eval")?;
    let mut ws = Workspace::for_arch(&net.arch);
    let mut successes = 0usize;
    let mut steps = 0u64;
    for _ in 0..episodes {
        let mut obs = env.reset();
        loop {
            let action = net.argmax(obs.as_slice(), &mut ws);
            let r = env.step(Action::from_index(action));
            steps += 1;
            obs = r.obs;
            if r.done {
                if r.success {
                    successes += 1;
                }
                break;
            }
        }
    }
    Ok((successes as f64 / episodes as f64, steps))
}

/// Greedy-policy evaluation over seeded episodes: the fraction reaching
/// the task goal, plus the environment steps spent (tracked separately
/// from any training budget).
pub fn evaluate(
    params: &QParams,
    factory: &TaskEnvFactory,
    episodes: usize,
) -> Result<(f64, u64), LearnerError> {
    check_arch(factory, params)?;
    let net = Mlp::new(Architecture(params.arch.clone()), params.values.clone());
    evaluate_net(&net, factory, episodes)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::ltlf::{compile_dfa, parse_ltlf};
    use crate::oomdp::tests::{crafting_spec, state};

    fn qp(arch: &[usize], values: Vec<f64>) -> QParams {
        QParams {
            arch: arch.to_vec(),
            seed: 0,
            values,
        }
    }

    /// 4x4 grid, one tree, goal: one tree in inventory. Short horizon.
    fn trivial_factory() -> TaskEnvFactory {
        let cfg = TaskConfig {
            id: "trivial".into(),
            s0: state(&[
                ("width", 4.0),
                ("height", 4.0),
                ("trees_env", 1.0),
                ("trees_inv", 0.0),
                ("rocks_env", 0.0),
                ("rocks_inv", 0.0),
                ("crafting_table_env", 0.0),
            ]),
            sf: state(&[
                ("width", 4.0),
                ("height", 4.0),
                ("trees_env", 0.0),
                ("trees_inv", 1.0),
                ("rocks_env", 0.0),
                ("rocks_inv", 0.0),
                ("crafting_table_env", 0.0),
            ]),
            placement_seed: 5,
            is_target: false,
        };
        TaskEnvFactory {
            cfg,
            spec: crafting_spec(),
            step_cap: 60,
        }
    }

    fn fast_hyper() -> Hyper {
        Hyper {
            eval_period: 2000,
            eval_episodes: 20,
            learning_starts: 256,
            step_cap: 60,
            // Early-stop only once the trivial-task bar is met; the
            // shorter bootstrap horizon keeps the greedy policy from
            // drifting after mastery.
            delta_src: 0.95,
            gamma: 0.9,
            eps_end: 0.1,
            ..Hyper::default()
        }
    }

    #[test]
    fn sequence_transfer_is_an_exact_copy() {
        let p = QParams::init(&[4, 8, 3], 7);
        let copy = transfer_sequence(&p);
        assert_eq!(copy, p);
        let triple = transfer_sequence(&transfer_sequence(&transfer_sequence(&p)));
        assert_eq!(triple, p);
        let max_diff = copy
            .values
            .iter()
            .zip(&p.values)
            .map(|(a, b)| (a - b).abs())
            .fold(0.0, f64::max);
        assert_eq!(max_diff, 0.0);
    }

    #[test]
    fn weighted_transfer_blends_elementwise() {
        let a = qp(&[1, 1], vec![1.0, 3.0]);
        let b = qp(&[1, 1], vec![5.0, 7.0]);
        let blend = transfer_weighted(&[(a.clone(), 0.6), (b.clone(), 0.4)]).unwrap();
        assert_eq!(blend.values, vec![2.6, 4.6]);

        // Exact linearity to machine precision.
        let beta = 0.37;
        let blend = transfer_weighted(&[(a.clone(), beta), (b.clone(), 1.0 - beta)]).unwrap();
        for i in 0..2 {
            assert_eq!(blend.values[i], beta * a.values[i] + (1.0 - beta) * b.values[i]);
        }

        // Convexity fixed point: identical sources blend to themselves.
        let same = transfer_weighted(&[(a.clone(), 0.25), (a.clone(), 0.75)]).unwrap();
        assert_eq!(same.values, a.values);

        // A single source with weight 1 equals the sequence copy.
        let single = transfer_weighted(&[(a.clone(), 1.0)]).unwrap();
        assert_eq!(single.values, transfer_sequence(&a).values);
    }

    #[test]
    fn weighted_transfer_validates_inputs() {
        let a = qp(&[1, 1], vec![1.0, 3.0]);
        let b = qp(&[1, 2], vec![1.0, 3.0, 0.0, 0.0]);
        assert!(matches!(
            transfer_weighted(&[(a.clone(), 0.5), (b, 0.5)]),
            Err(LearnerError::ArchMismatch(_))
        ));
        assert!(matches!(
            transfer_weighted(&[(a.clone(), 0.5), (a.clone(), 0.6)]),
            Err(LearnerError::BadWeights(_))
        ));
        assert!(matches!(
            transfer_weighted(&[(a.clone(), -0.5), (a.clone(), 1.5)]),
            Err(LearnerError::BadWeights(_))
        ));
    }

    #[test]
    fn parameter_blob_roundtrips_and_rejects_corruption() {
        let p = QParams::init(&[6, 8, 4], 11);
        let bytes = p.to_bytes();
        let back = QParams::from_bytes(&bytes).unwrap();
        assert_eq!(back, p);

        let mut corrupt = bytes.clone();
        let mid = corrupt.len() / 2;
        corrupt[mid] ^= 0xff;
        assert!(matches!(
            QParams::from_bytes(&corrupt),
            Err(LearnerError::BadBlob(_))
        ));
        assert!(QParams::from_bytes(&bytes[..10]).is_err());
    }

    #[test]
    fn gsrs_bonus_follows_accept_distance() {
        let a = Alphabet::new(["tree", "rock"]).unwrap();
        let f = parse_ltlf("F(tree) & F(rock)", &a).unwrap();
        let d = compile_dfa(&f, &a).unwrap();
        let w0 = d.initial();
        let w1 = d.step(w0, a.symbol(&["tree"]));
        let w3 = d.step(w1, a.symbol(&["rock"]));
        assert_eq!(gsrs_bonus(&d, w3, 1.0), 1.0);
        assert_eq!(gsrs_bonus(&d, w0, 1.0), 1.0 / 3.0);
        assert_eq!(gsrs_bonus(&d, w1, 1.0), 0.5);

        let g = compile_dfa(&parse_ltlf("G tree", &a).unwrap(), &a).unwrap();
        let trap = g.step(g.initial(), Symbol::EMPTY);
        assert_eq!(gsrs_bonus(&g, trap, 1.0), 0.0);

        let mut shaper = GsrsShaper::new(d, a, 1.0);
        assert_eq!(shaper.on_step(&[]), 1.0 / 3.0);
        assert_eq!(shaper.on_step(&["tree".into()]), 0.5);
        assert_eq!(shaper.on_step(&["rock".into()]), 1.0);
        shaper.reset();
        assert_eq!(shaper.on_step(&[]), 1.0 / 3.0);
    }

    #[test]
    fn zero_budget_is_rejected() {
        let factory = trivial_factory();
        let init = QParams::init(&factory.architecture(&[8]).unwrap(), 0);
        assert_eq!(
            train(&factory, &init, 0, &fast_hyper(), None, 0).unwrap_err(),
            LearnerError::BadBudget
        );
    }

    #[test]
    fn architecture_mismatch_is_rejected() {
        let factory = trivial_factory();
        let init = QParams::init(&[3, 8, 2], 0);
        assert!(matches!(
            train(&factory, &init, 100, &fast_hyper(), None, 0),
            Err(LearnerError::ArchMismatch(_))
        ));
        assert!(matches!(
            evaluate(&init, &factory, 5),
            Err(LearnerError::ArchMismatch(_))
        ));
    }

    #[test]
    fn training_is_seed_deterministic() {
        let factory = trivial_factory();
        let arch = factory.architecture(&[16]).unwrap();
        let init = QParams::init(&arch, 3);
        let hyper = Hyper {
            eval_period: 1000,
            eval_episodes: 5,
            ..fast_hyper()
        };
        let a = train(&factory, &init, 2000, &hyper, None, 9).unwrap();
        let b = train(&factory, &init, 2000, &hyper, None, 9).unwrap();
        assert_eq!(a.final_params, b.final_params);
        assert_eq!(a.episodes, b.episodes);
        assert_eq!(a.eval_points, b.eval_points);
        assert_eq!(a.train_steps, b.train_steps);
        assert_eq!(a.eval_steps, b.eval_steps);
        let c = train(&factory, &init, 2000, &hyper, None, 10).unwrap();
        assert_ne!(a.final_params, c.final_params);
    }

    #[test]
    fn evaluation_is_deterministic_and_low_for_random_params() {
        let factory = trivial_factory();
        let arch = factory.architecture(&[64, 64]).unwrap();
        let params = QParams::init(&arch, 1);
        let (r1, s1) = evaluate(&params, &factory, 50).unwrap();
        let (r2, s2) = evaluate(&params, &factory, 50).unwrap();
        assert_eq!(r1, r2);
        assert_eq!(s1, s2);
        // A freshly initialized greedy policy spins or walks blindly.
        assert!(r1 <= 0.4, "random-ish policy succeeded {r1}");
    }

    #[test]
    fn learner_masters_the_trivial_collect_task() {
        // Sanity oracle first: the scripted policy in the gridworld tests
        // shows the task is solvable well within the horizon; the learner
        // must reach a 0.95 success rate within 20k steps.
        let factory = trivial_factory();
        let arch = factory.architecture(&[64, 64]).unwrap();
        let init = QParams::init(&arch, 0);
        let report = train(&factory, &init, 20_000, &fast_hyper(), None, 0).unwrap();
        let last = report.eval_points.last().unwrap();
        assert!(
            last.success_rate >= 0.95,
            "final success rate {}",
            last.success_rate
        );
        assert!(report.early_stopped || report.train_steps == 20_000);
        // Budget accounting: evaluation steps tracked separately.
        assert!(report.eval_steps > 0);
        assert!(report.train_steps <= 20_000);
        // Step counters strictly increase across episodes.
        for w in report.episodes.windows(2) {
            assert!(w[0].end_step < w[1].end_step);
        }
    }
}
