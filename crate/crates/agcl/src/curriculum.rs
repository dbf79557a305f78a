//! Curriculum synthesis from an objective DFA and a task-space
//! description: enumerate candidate task sequences along the accepting
//! paths, score them by how smoothly they approach the target, then pick
//! either the single best sequence or the thresholded set merged into a
//! transfer DAG. No environment interaction happens here.

use std::collections::HashMap;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::automaton::{AutomatonError, Dfa, NodeId, TracePath};
use crate::ltlf::Alphabet;
use crate::oomdp::{
    node_grid_size, sample_node_tasks, tasks_for_node, OomdpError, OomdpSpec, TaskConfig,
};
use crate::seed::{derive_seed_indexed, fnv1a, rng_for};

#[derive(Debug, Clone, PartialEq, Error)]
pub enum CurriculumError {
    #[error("task schemas differ: {0}")]
    SchemaMismatch(String),
    #[error("a path node contributed no tasks; no candidates can be formed")]
    EmptyCandidates,
    #[error("objective is unsatisfiable: the DFA has no accepting path")]
    UnsatisfiableSpec,
    #[error("{count} candidates exceed the {cap} enumeration guard; set sampling b or a subset fraction")]
    TooManyCandidates { count: u128, cap: u128 },
    #[error("invalid curriculum: {0}")]
    InvalidDag(String),
    #[error(transparent)]
    Automaton(#[from] AutomatonError),
    #[error(transparent)]
    Oomdp(#[from] OomdpError),
}

/// Curriculum shape to synthesize.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Mode {
    Sequence,
    Graph,
}

/// One ordered candidate: a task per non-initial node of a trace path,
/// ending at the target task, with its average jump score cached.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CandidateList {
    pub tasks: Vec<TaskConfig>,
    pub avg_jump: f64,
}

/// Per-parameter similarity of two values: 1 when both are zero,
/// otherwise the smaller magnitude over the larger. Bounded in [0, 1],
/// symmetric, and equal to the plain value ratio whenever
/// `0 < a <= b`.
fn param_ratio(a: f64, b: f64) -> f64 {
    let (a, b) = (a.abs(), b.abs());
    let (lo, hi) = if a <= b { (a, b) } else { (b, a) };
    if hi == 0.0 {
        1.0
    } else {
        lo / hi
    }
}

fn check_schema(a: &TaskConfig, b: &TaskConfig) -> Result<(), CurriculumError> {
    let ka: Vec<&String> = a.s0.values().keys().collect();
    let kb: Vec<&String> = b.s0.values().keys().collect();
    if ka != kb {
        return Err(CurriculumError::SchemaMismatch(format!(
            "`{}` has parameters {ka:?}, `{}` has {kb:?}",
            a.id, b.id
        )));
    }
    Ok(())
}

fn mean_state_similarity(
    a: &std::collections::BTreeMap<String, f64>,
    b: &std::collections::BTreeMap<String, f64>,
) -> f64 {
    let n = b.len() as f64;
    let mut sum = 0.0;
    for (name, &tv) in b {
        let v = a.get(name).copied().unwrap_or(0.0);
        sum += param_ratio(v, tv);
    }
    sum / n
}

/// Initial-state similarity of `task` to `target`: the mean over all
/// parameters of the per-parameter value overlap between the two initial
/// task-space states. 1 exactly when the initial states coincide.
pub fn sim_t(task: &TaskConfig, target: &TaskConfig) -> Result<f64, CurriculumError> {
    check_schema(task, target)?;
    Ok(mean_state_similarity(task.s0.values(), target.s0.values()))
}

/// Goal-state similarity, as [`sim_t`] but over the goal states.
pub fn sim_g(task: &TaskConfig, target: &TaskConfig) -> Result<f64, CurriculumError> {
    check_schema(task, target)?;
    Ok(mean_state_similarity(task.sf.values(), target.sf.values()))
}

/// Jump score between consecutive tasks: half the gain in initial-state
/// plus goal-state similarity to the target when moving from `mi` to
/// `mj`. Negative when `mj` is less target-similar than `mi`.
pub fn jump_score(
    mi: &TaskConfig,
    mj: &TaskConfig,
    target: &TaskConfig,
) -> Result<f64, CurriculumError> {
    Ok(0.5
        * ((sim_t(mj, target)? - sim_t(mi, target)?) + (sim_g(mj, target)? - sim_g(mi, target)?)))
}

/// Average jump score of an ordered task list: the sum over consecutive
/// pairs divided by the list length (the length, not the pair count).
pub fn avg_jump(tasks: &[TaskConfig], target: &TaskConfig) -> Result<f64, CurriculumError> {
    assert!(!tasks.is_empty(), "candidate lists are nonempty");
    let mut sum = 0.0;
    for pair in tasks.windows(2) {
        sum += jump_score(&pair[0], &pair[1], target)?;
    }
    Ok(sum / tasks.len() as f64)
}

/// Cartesian product of per-node task sets, sequenced in path order, each
/// scored against the target. `per_node` holds one task set per
/// transition of the path (the last one is the target singleton).
/// Enumeration is lexicographic with the first node most significant.
pub fn list_candidates(
    per_node: &[Vec<TaskConfig>],
    target: &TaskConfig,
) -> Result<Vec<CandidateList>, CurriculumError> {
    if per_node.is_empty() || per_node.iter().any(|ts| ts.is_empty()) {
        return Err(CurriculumError::EmptyCandidates);
    }
    let mut count: usize = 1;
    for ts in per_node {
        count = count.saturating_mul(ts.len());
    }
    let mut out = Vec::with_capacity(count);
    let mut odometer = vec![0usize; per_node.len()];
    loop {
        let tasks: Vec<TaskConfig> = per_node
            .iter()
            .zip(odometer.iter())
            .map(|(ts, &i)| ts[i].clone())
            .collect();
        let avg = avg_jump(&tasks, target)?;
        out.push(CandidateList {
            tasks,
            avg_jump: avg,
        });
        let mut pos = per_node.len();
        loop {
            if pos == 0 {
                return Ok(out);
            }
            pos -= 1;
            if odometer[pos] + 1 < per_node[pos].len() {
                odometer[pos] += 1;
                break;
            }
            odometer[pos] = 0;
        }
    }
}

/// Index of the candidate with the lowest average jump score; ties go to
/// the earliest in enumeration order.
pub fn select_sequence(candidates: &[CandidateList]) -> usize {
    assert!(!candidates.is_empty(), "candidates are nonempty");
    let mut best = 0;
    for (i, c) in candidates.iter().enumerate().skip(1) {
        if c.avg_jump < candidates[best].avg_jump {
            best = i;
        }
    }
    best
}

/// Floor applied to jump scores before inversion; inverse-jump weights
/// are undefined at zero and meaningless below it.
pub const BETA_JUMP_FLOOR: f64 = 1e-6;

/// Transfer weights for a shared successor: proportional to the inverse
/// jump score of each incoming edge, normalized to sum to one.
pub fn beta_weights(jumps: &[f64]) -> Vec<f64> {
    assert!(!jumps.is_empty(), "at least one in-edge required");
    let inv: Vec<f64> = jumps.iter().map(|j| 1.0 / j.max(BETA_JUMP_FLOOR)).collect();
    let total: f64 = inv.iter().sum();
    inv.into_iter().map(|w| w / total).collect()
}

/// Uniform sample without replacement of `ceil(fraction * n)` candidates,
/// deterministic given `seed`; the survivors keep enumeration order.
pub fn sample_candidate_subset(
    candidates: Vec<CandidateList>,
    fraction: f64,
    seed: u64,
) -> Vec<CandidateList> {
    assert!(
        fraction > 0.0 && fraction <= 1.0,
        "fraction must be in (0, 1]"
    );
    let n = candidates.len();
    let k = ((fraction * n as f64).ceil() as usize).clamp(1, n);
    if k == n {
        return candidates;
    }
    let mut rng = rng_for(seed, "candidate-subset");
    let mut indices: Vec<usize> = (0..n).collect();
    for i in 0..k {
        let j = rand::Rng::random_range(&mut rng, i..n);
        indices.swap(i, j);
    }
    let mut keep = indices[..k].to_vec();
    keep.sort_unstable();
    let mut iter = keep.into_iter().peekable();
    candidates
        .into_iter()
        .enumerate()
        .filter_map(|(i, c)| {
            if iter.peek() == Some(&i) {
                iter.next();
                Some(c)
            } else {
                None
            }
        })
        .collect()
}

/// Directed edge of a curriculum DAG, carrying the jump score between the
/// two tasks and the transfer weight toward the destination.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DagEdge {
    pub from: usize,
    pub to: usize,
    pub jump: f64,
    pub beta: f64,
}

/// A curriculum: tasks as vertices, knowledge-transfer direction as
/// edges, exactly one sink (the target task).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CurriculumDag {
    pub vertices: Vec<TaskConfig>,
    pub edges: Vec<DagEdge>,
    pub sink: usize,
}

impl CurriculumDag {
    /// Chain-shaped curriculum from a single candidate (all transfer
    /// weights 1).
    pub fn chain(candidate: &CandidateList, target: &TaskConfig) -> Self {
        let tasks = &candidate.tasks;
        let mut edges = Vec::new();
        for (i, pair) in tasks.windows(2).enumerate() {
            let jump = jump_score(&pair[0], &pair[1], target).expect("schema already checked");
            edges.push(DagEdge {
                from: i,
                to: i + 1,
                jump,
                beta: 1.0,
            });
        }
        CurriculumDag {
            vertices: tasks.clone(),
            edges,
            sink: tasks.len() - 1,
        }
    }

    /// Merges thresholded candidates into a DAG: tasks with equal
    /// (initial, goal) state pairs become one vertex, edges follow list
    /// order, and each vertex's incoming transfer weights are normalized
    /// inverse jump scores. The target never merges with a source, even
    /// at equal states: its success condition (the terminal event) is not
    /// part of the state pair, and the sink must stay the target.
    pub fn merge(candidates: &[CandidateList], target: &TaskConfig) -> Self {
        type Identity = (crate::oomdp::OomdpState, crate::oomdp::OomdpState, bool);
        let mut vertices: Vec<TaskConfig> = Vec::new();
        let mut by_identity: HashMap<Identity, usize> = HashMap::new();
        let mut edge_pairs: Vec<(usize, usize, f64)> = Vec::new();

        for cand in candidates {
            let mut prev: Option<usize> = None;
            for task in &cand.tasks {
                let key = (task.s0.clone(), task.sf.clone(), task.is_target);
                let v = match by_identity.get(&key) {
                    Some(&v) => v,
                    None => {
                        let v = vertices.len();
                        by_identity.insert(key, v);
                        vertices.push(task.clone());
                        v
                    }
                };
                if let Some(p) = prev {
                    if !edge_pairs.iter().any(|&(f, t, _)| f == p && t == v) {
                        let jump = jump_score(&vertices[p], &vertices[v], target)
                            .expect("schema already checked");
                        edge_pairs.push((p, v, jump));
                    }
                }
                prev = Some(v);
            }
        }

        let sink = vertices
            .iter()
            .position(|t| t.is_target)
            .expect("every candidate ends at the target");

        let mut edges = Vec::new();
        for v in 0..vertices.len() {
            let incoming: Vec<&(usize, usize, f64)> =
                edge_pairs.iter().filter(|&&(_, t, _)| t == v).collect();
            if incoming.is_empty() {
                continue;
            }
            let jumps: Vec<f64> = incoming.iter().map(|&&(_, _, j)| j).collect();
            let betas = beta_weights(&jumps);
            for (&&(from, to, jump), beta) in incoming.iter().zip(betas) {
                edges.push(DagEdge {
                    from,
                    to,
                    jump,
                    beta,
                });
            }
        }
        edges.sort_by_key(|e| (e.from, e.to));

        CurriculumDag {
            vertices,
            edges,
            sink,
        }
    }

    pub fn in_edges(&self, v: usize) -> Vec<&DagEdge> {
        self.edges.iter().filter(|e| e.to == v).collect()
    }

    pub fn roots(&self) -> Vec<usize> {
        (0..self.vertices.len())
            .filter(|&v| self.in_edges(v).is_empty())
            .collect()
    }

    /// Kahn topological order, deterministic (lowest vertex index first).
    pub fn topo_order(&self) -> Result<Vec<usize>, CurriculumError> {
        let n = self.vertices.len();
        let mut indeg = vec![0usize; n];
        for e in &self.edges {
            indeg[e.to] += 1;
        }
        let mut order = Vec::with_capacity(n);
        let mut ready: Vec<usize> = (0..n).filter(|&v| indeg[v] == 0).collect();
        while let Some(v) = ready.first().copied() {
            ready.remove(0);
            order.push(v);
            for e in self.edges.iter().filter(|e| e.from == v) {
                indeg[e.to] -= 1;
                if indeg[e.to] == 0 {
                    let pos = ready.partition_point(|&x| x < e.to);
                    ready.insert(pos, e.to);
                }
            }
        }
        if order.len() != n {
            return Err(CurriculumError::InvalidDag("cycle detected".into()));
        }
        Ok(order)
    }

    /// Checks every structural invariant: acyclic, a single sink that is
    /// the target, every vertex reaches the sink, and incoming transfer
    /// weights summing to one.
    pub fn validate(&self) -> Result<(), CurriculumError> {
        if self.vertices.is_empty() {
            return Err(CurriculumError::InvalidDag("no vertices".into()));
        }
        self.topo_order()?;
        let sinks: Vec<usize> = (0..self.vertices.len())
            .filter(|&v| !self.edges.iter().any(|e| e.from == v))
            .collect();
        if sinks != vec![self.sink] {
            return Err(CurriculumError::InvalidDag(format!(
                "expected single sink {} but found {sinks:?}",
                self.sink
            )));
        }
        if !self.vertices[self.sink].is_target {
            return Err(CurriculumError::InvalidDag(
                "sink is not the target task".into(),
            ));
        }
        // Reverse reachability from the sink.
        let mut reaches = vec![false; self.vertices.len()];
        reaches[self.sink] = true;
        let mut frontier = vec![self.sink];
        while let Some(v) = frontier.pop() {
            for e in self.edges.iter().filter(|e| e.to == v) {
                if !reaches[e.from] {
                    reaches[e.from] = true;
                    frontier.push(e.from);
                }
            }
        }
        if let Some(stranded) = reaches.iter().position(|&r| !r) {
            return Err(CurriculumError::InvalidDag(format!(
                "vertex {stranded} cannot reach the sink"
            )));
        }
        for v in 0..self.vertices.len() {
            let sum: f64 = self.in_edges(v).iter().map(|e| e.beta).sum();
            if !self.in_edges(v).is_empty() && (sum - 1.0).abs() > 1e-9 {
                return Err(CurriculumError::InvalidDag(format!(
                    "vertex {v} incoming transfer weights sum to {sum}"
                )));
            }
        }
        Ok(())
    }

    /// Graphviz DOT rendering: vertices annotated with initial/goal state
    /// summaries, edges with their transfer weights.
    pub fn export_dot(&self) -> String {
        fn summary(s: &crate::oomdp::OomdpState) -> String {
            s.values()
                .iter()
                .map(|(k, v)| format!("{k}={v}"))
                .collect::<Vec<_>>()
                .join(",")
        }
        let mut out = String::from("digraph curriculum {\n  rankdir=LR;\n  node [shape=box];\n");
        for (i, t) in self.vertices.iter().enumerate() {
            let shape = if i == self.sink {
                ", peripheries=2"
            } else {
                ""
            };
            out.push_str(&format!(
                "  v{i} [label=\"{}\\ns0: {}\\nsf: {}\"{}];\n",
                t.id,
                summary(&t.s0),
                summary(&t.sf),
                shape
            ));
        }
        for e in &self.edges {
            out.push_str(&format!(
                "  v{} -> v{} [label=\"β={:.3}\"];\n",
                e.from, e.to, e.beta
            ));
        }
        out.push_str("}\n");
        out
    }
}

/// Per-node sampling and candidate-subsetting knobs.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SamplingOptions {
    /// Tasks drawn per node; `None` enumerates the integer grid.
    pub b: Option<usize>,
    /// Fraction of candidates to keep, `None` or 1.0 keeps all.
    pub subset_fraction: Option<f64>,
    /// Seed for node sampling and candidate subsetting.
    pub seed: u64,
}

impl Default for SamplingOptions {
    fn default() -> Self {
        Self {
            b: None,
            subset_fraction: None,
            seed: 0,
        }
    }
}

/// Per-node grids larger than this force uniform sampling instead.
pub const NODE_GRID_CAP: u128 = 5_000;
/// Sample size used when sampling is forced by the grid cap.
pub const FORCED_SAMPLE_SIZE: usize = 25;
/// Guard on the total number of enumerated candidates.
pub const CANDIDATE_CAP: u128 = 200_000;

/// How the resolved jump-score threshold was chosen.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum EtaSource {
    Config,
    Percentile40,
}

/// Everything the synthesis recorded for the run manifest.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AgcgReport {
    pub paths: Vec<String>,
    pub node_task_counts: Vec<(String, usize)>,
    pub sampled_nodes: bool,
    pub candidate_count: usize,
    pub subset_count: Option<usize>,
    pub eta: f64,
    pub eta_source: EtaSource,
    pub selected_avg_jump: f64,
    pub graph_fallback_to_sequence: bool,
    pub vertex_count: usize,
    pub root_count: usize,
}

/// Output of [`agcg`]: the curriculum plus its synthesis report.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AgcgOutput {
    pub dag: CurriculumDag,
    pub report: AgcgReport,
}

/// Nearest-rank 40th percentile, the default threshold when none is
/// configured.
fn percentile40(scores: &[f64]) -> f64 {
    let mut sorted = scores.to_vec();
    sorted.sort_by(|a, b| a.partial_cmp(b).expect("scores are finite"));
    let idx = ((0.4 * sorted.len() as f64).ceil() as usize).max(1) - 1;
    sorted[idx]
}

/// End-to-end curriculum synthesis: enumerate the DFA's accepting paths,
/// attach task sets to every (node, event-prefix) pair, build and score
/// the candidate sequences, and select per `mode`. Deterministic given
/// the sampling seed.
///
/// Task sets are keyed by the node *and* its prefix event multiset, so a
/// node shared by several paths contributes the same tasks to each (the
/// graph merge relies on this), while nodes reachable with different
/// event histories stay distinct.
pub fn agcg(
    dfa: &Dfa,
    alphabet: &Alphabet,
    spec: &OomdpSpec,
    target: &TaskConfig,
    mode: Mode,
    eta: Option<f64>,
    sampling: &SamplingOptions,
) -> Result<AgcgOutput, CurriculumError> {
    let paths = dfa.get_trace_paths()?;
    if paths.is_empty() {
        return Err(CurriculumError::UnsatisfiableSpec);
    }
    let paths: Vec<&TracePath> = paths.iter().filter(|p| !p.is_empty()).collect();
    if paths.is_empty() {
        return Err(CurriculumError::UnsatisfiableSpec);
    }

    // The node-task dictionary, keyed by (node, prefix event multiset).
    type NodeKey = (NodeId, Vec<(usize, usize)>);
    let mut node_tasks: HashMap<NodeKey, Vec<TaskConfig>> = HashMap::new();
    let mut node_task_counts: Vec<(String, usize)> = Vec::new();
    let mut sampled_nodes = false;
    let mut per_path: Vec<Vec<Vec<TaskConfig>>> = Vec::new();

    for path in &paths {
        let mut sets = Vec::with_capacity(path.len());
        for node_index in 1..=path.len() {
            let node = path.nodes()[node_index];
            let counts = crate::oomdp::prefix_event_counts(path, node_index)?;
            let key: NodeKey = (node, counts.into_iter().collect());
            if !node_tasks.contains_key(&key) {
                let mut key_hash = fnv1a(0xdead_beef, &(node as u64).to_le_bytes());
                for &(p, c) in &key.1 {
                    key_hash = fnv1a(key_hash, &(p as u64).to_le_bytes());
                    key_hash = fnv1a(key_hash, &(c as u64).to_le_bytes());
                }
                let node_seed = derive_seed_indexed(sampling.seed, "node", key_hash);
                let tasks = match sampling.b {
                    Some(b) => {
                        sampled_nodes = true;
                        sample_node_tasks(dfa, path, node_index, spec, alphabet, target, b, node_seed)?
                    }
                    None => {
                        let grid = node_grid_size(dfa, path, node_index, spec, alphabet);
                        match grid {
                            Ok(size) if size <= NODE_GRID_CAP => tasks_for_node(
                                dfa, path, node_index, spec, alphabet, target, node_seed,
                            )?,
                            Ok(_) | Err(OomdpError::ContinuousRange { .. }) => {
                                sampled_nodes = true;
                                sample_node_tasks(
                                    dfa,
                                    path,
                                    node_index,
                                    spec,
                                    alphabet,
                                    target,
                                    FORCED_SAMPLE_SIZE,
                                    node_seed,
                                )?
                            }
                            Err(e) => return Err(e.into()),
                        }
                    }
                };
                let label = format!(
                    "ω{node}[{}]",
                    key.1
                        .iter()
                        .map(|&(p, c)| format!("{}x{c}", alphabet.name(p)))
                        .collect::<Vec<_>>()
                        .join(",")
                );
                node_task_counts.push((label, tasks.len()));
                node_tasks.insert(key.clone(), tasks);
            }
            sets.push(node_tasks[&key].clone());
        }
        per_path.push(sets);
    }

    // Guard the total enumeration before materializing.
    let mut total: u128 = 0;
    for sets in &per_path {
        let mut prod: u128 = 1;
        for s in sets {
            prod = prod.saturating_mul(s.len() as u128);
        }
        total = total.saturating_add(prod);
    }
    if total > CANDIDATE_CAP {
        return Err(CurriculumError::TooManyCandidates {
            count: total,
            cap: CANDIDATE_CAP,
        });
    }

    let mut candidates: Vec<CandidateList> = Vec::new();
    for sets in &per_path {
        candidates.extend(list_candidates(sets, target)?);
    }
    let candidate_count = candidates.len();

    let mut subset_count = None;
    if let Some(fraction) = sampling.subset_fraction {
        if fraction < 1.0 {
            candidates = sample_candidate_subset(candidates, fraction, sampling.seed);
            subset_count = Some(candidates.len());
        }
    }

    let scores: Vec<f64> = candidates.iter().map(|c| c.avg_jump).collect();
    let (resolved_eta, eta_source) = match eta {
        Some(e) => (e, EtaSource::Config),
        None => (percentile40(&scores), EtaSource::Percentile40),
    };

    let best = select_sequence(&candidates);
    let mut graph_fallback = false;
    let dag = match mode {
        Mode::Sequence => CurriculumDag::chain(&candidates[best], target),
        Mode::Graph => {
            let selected: Vec<CandidateList> = candidates
                .iter()
                .filter(|c| c.avg_jump <= resolved_eta)
                .cloned()
                .collect();
            if selected.is_empty() {
                graph_fallback = true;
                CurriculumDag::chain(&candidates[best], target)
            } else {
                CurriculumDag::merge(&selected, target)
            }
        }
    };
    dag.validate()?;

    let report = AgcgReport {
        paths: paths.iter().map(|p| p.render(alphabet)).collect(),
        node_task_counts,
        sampled_nodes,
        candidate_count,
        subset_count,
        eta: resolved_eta,
        eta_source,
        selected_avg_jump: candidates[best].avg_jump,
        graph_fallback_to_sequence: graph_fallback,
        vertex_count: dag.vertices.len(),
        root_count: dag.roots().len(),
    };
    Ok(AgcgOutput { dag, report })
}
