//! Object-oriented task-space description: classes with ranged parameters,
//! task states, and the machinery that turns DFA path prefixes into
//! concrete source-task configurations (grid enumeration, uniform
//! sampling, range noising).

use std::collections::BTreeMap;
use std::hash::{Hash, Hasher};

use rand::Rng;
use rand_distr::{Distribution, Normal};
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::automaton::{Dfa, TracePath};
use crate::ltlf::Alphabet;
use crate::seed::{derive_seed_indexed, rng_for};

#[derive(Debug, Clone, PartialEq, Error)]
pub enum OomdpError {
    #[error("invalid task-space description: {0}")]
    InvalidSpec(String),
    #[error("parameter `{param}` must be at least {required} but its range tops out at {max}")]
    Infeasible {
        param: String,
        required: i64,
        max: i64,
    },
    #[error("parameter `{param}` has a real-valued range; grid enumeration needs integer ranges")]
    ContinuousRange { param: String },
    #[error("integer grid for this node has {size} configurations, beyond the {cap} guard")]
    GridTooLarge { size: u128, cap: u128 },
    #[error("could not draw {requested} distinct configurations from a region of size {available}")]
    RetryExhausted { requested: usize, available: u128 },
    #[error("path step {step} carries {labels} event labels; the event model needs exactly one")]
    AmbiguousStep { step: usize, labels: usize },
    #[error("proposition `{prop}` has no binding in the task-space description")]
    UnboundProposition { prop: String },
    #[error("state is missing parameter `{0}`")]
    MissingParameter(String),
}

/// Kind of a class parameter.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ParamKind {
    Integer,
    Real,
}

/// One ranged parameter of a class.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ParamSpec {
    pub name: String,
    pub kind: ParamKind,
    pub lo: f64,
    pub hi: f64,
}

/// A class groups the parameters of one object kind.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ClassSpec {
    pub name: String,
    pub params: Vec<ParamSpec>,
}

/// How an atomic proposition relates to the task space: either a
/// consumable event (one environment object moves into the inventory) or
/// a terminal event that only requires supporting objects to be present.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "lowercase")]
pub enum Binding {
    Consumable {
        env: String,
        inventory: String,
    },
    Terminal {
        requires_env: String,
    },
}

/// The full task-space description: ordered classes plus one binding per
/// atomic proposition.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OomdpSpec {
    pub classes: Vec<ClassSpec>,
    pub bindings: BTreeMap<String, Binding>,
}

impl OomdpSpec {
    /// All parameters in declaration order.
    pub fn params(&self) -> impl Iterator<Item = &ParamSpec> {
        self.classes.iter().flat_map(|c| c.params.iter())
    }

    pub fn param(&self, name: &str) -> Option<&ParamSpec> {
        self.params().find(|p| p.name == name)
    }

    pub fn param_count(&self) -> usize {
        self.params().count()
    }

    /// Structural validation plus a check that every proposition of
    /// `alphabet` is bound to declared parameters.
    pub fn validate(&self, alphabet: &Alphabet) -> Result<(), OomdpError> {
        let mut seen = Vec::new();
        for p in self.params() {
            if seen.contains(&&p.name) {
                return Err(OomdpError::InvalidSpec(format!(
                    "duplicate parameter `{}`",
                    p.name
                )));
            }
            seen.push(&p.name);
            if p.lo > p.hi {
                return Err(OomdpError::InvalidSpec(format!(
                    "parameter `{}` has lo {} > hi {}",
                    p.name, p.lo, p.hi
                )));
            }
            if p.kind == ParamKind::Integer && (p.lo.fract() != 0.0 || p.hi.fract() != 0.0) {
                return Err(OomdpError::InvalidSpec(format!(
                    "integer parameter `{}` has non-integer endpoints [{}, {}]",
                    p.name, p.lo, p.hi
                )));
            }
        }
        for name in alphabet.names() {
            if !self.bindings.contains_key(name) {
                return Err(OomdpError::UnboundProposition { prop: name.clone() });
            }
        }
        for (prop, binding) in &self.bindings {
            let refs: Vec<&String> = match binding {
                Binding::Consumable { env, inventory } => vec![env, inventory],
                Binding::Terminal { requires_env } => vec![requires_env],
            };
            for r in refs {
                if self.param(r).is_none() {
                    return Err(OomdpError::InvalidSpec(format!(
                        "binding for `{prop}` references unknown parameter `{r}`"
                    )));
                }
            }
        }
        Ok(())
    }
}

/// Total assignment of a value to every declared parameter.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize, Default)]
pub struct OomdpState {
    values: BTreeMap<String, f64>,
}

impl OomdpState {
    pub fn new(values: BTreeMap<String, f64>) -> Self {
        Self { values }
    }

    pub fn get(&self, name: &str) -> Option<f64> {
        self.values.get(name).copied()
    }

    pub fn value(&self, name: &str) -> Result<f64, OomdpError> {
        self.get(name)
            .ok_or_else(|| OomdpError::MissingParameter(name.to_string()))
    }

    pub fn set(&mut self, name: &str, value: f64) {
        self.values.insert(name.to_string(), value);
    }

    pub fn values(&self) -> &BTreeMap<String, f64> {
        &self.values
    }

    /// Checks the assignment is total over `spec` and inside the declared
    /// ranges.
    pub fn validate(&self, spec: &OomdpSpec) -> Result<(), OomdpError> {
        for p in spec.params() {
            let v = self.value(&p.name)?;
            if v < p.lo || v > p.hi {
                return Err(OomdpError::InvalidSpec(format!(
                    "parameter `{}` value {} outside [{}, {}]",
                    p.name, v, p.lo, p.hi
                )));
            }
            if p.kind == ParamKind::Integer && v.fract() != 0.0 {
                return Err(OomdpError::InvalidSpec(format!(
                    "integer parameter `{}` has non-integer value {}",
                    p.name, v
                )));
            }
        }
        Ok(())
    }
}

// Task identity downstream (curriculum vertex merging) is bit-exact
// equality of the two states, so Eq/Hash go through the raw bits.
impl Eq for OomdpState {}

impl Hash for OomdpState {
    fn hash<H: Hasher>(&self, state: &mut H) {
        for (k, v) in &self.values {
            k.hash(state);
            v.to_bits().hash(state);
        }
    }
}

/// One concrete task: initial and goal task-space states plus the seed of
/// its layout distribution. A task is a reproducible distribution over
/// environment layouts, not a single fixed layout.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TaskConfig {
    pub id: String,
    pub s0: OomdpState,
    pub sf: OomdpState,
    pub placement_seed: u64,
    pub is_target: bool,
}

impl TaskConfig {
    /// Identity for curriculum-vertex merging: the (s0, sf) pair,
    /// placement seed excluded.
    pub fn identity(&self) -> (&OomdpState, &OomdpState) {
        (&self.s0, &self.sf)
    }
}

/// Multiset of event-proposition indices along a path prefix.
pub fn prefix_event_counts(
    path: &TracePath,
    node_index: usize,
) -> Result<BTreeMap<usize, usize>, OomdpError> {
    let mut counts = BTreeMap::new();
    for step in 0..node_index {
        let labels = path.step_label(step);
        if labels.len() != 1 {
            return Err(OomdpError::AmbiguousStep {
                step,
                labels: labels.len(),
            });
        }
        *counts.entry(labels[0]).or_insert(0) += 1;
    }
    Ok(counts)
}

/// Per-parameter feasibility bounds for the tasks reaching a node:
/// consumable events need that many environment objects at the start and
/// headroom in the inventory range for the collected ones; terminal
/// events need their supporting object present.
#[derive(Debug, Clone, Default)]
struct Requirements {
    /// parameter -> minimum initial value
    env_min: BTreeMap<String, i64>,
    /// parameter -> consumed count (environment decrement)
    env_dec: BTreeMap<String, i64>,
    /// parameter -> collected count (inventory increment)
    inv_inc: BTreeMap<String, i64>,
}

fn requirements(
    spec: &OomdpSpec,
    alphabet: &Alphabet,
    counts: &BTreeMap<usize, usize>,
) -> Result<Requirements, OomdpError> {
    let mut req = Requirements::default();
    for (&prop_index, &count) in counts {
        let prop = alphabet.name(prop_index);
        let binding = spec
            .bindings
            .get(prop)
            .ok_or_else(|| OomdpError::UnboundProposition {
                prop: prop.to_string(),
            })?;
        let count = count as i64;
        match binding {
            Binding::Consumable { env, inventory } => {
                *req.env_min.entry(env.clone()).or_insert(0) += count;
                *req.env_dec.entry(env.clone()).or_insert(0) += count;
                *req.inv_inc.entry(inventory.clone()).or_insert(0) += count;
            }
            Binding::Terminal { requires_env } => {
                let e = req.env_min.entry(requires_env.clone()).or_insert(0);
                *e = (*e).max(1);
            }
        }
    }
    Ok(req)
}

/// Feasible value domain of one parameter under the requirements.
fn feasible_bounds(p: &ParamSpec, req: &Requirements) -> Result<(f64, f64), OomdpError> {
    let mut lo = p.lo;
    let mut hi = p.hi;
    if let Some(&min) = req.env_min.get(&p.name) {
        lo = lo.max(min as f64);
    }
    if let Some(&inc) = req.inv_inc.get(&p.name) {
        hi -= inc as f64;
    }
    if lo > hi {
        return Err(OomdpError::Infeasible {
            param: p.name.clone(),
            required: lo as i64,
            max: p.hi as i64,
        });
    }
    Ok((lo, hi))
}

fn goal_state(s0: &OomdpState, req: &Requirements) -> OomdpState {
    let mut sf = s0.clone();
    for (param, dec) in &req.env_dec {
        let v = sf.get(param).unwrap_or(0.0);
        sf.set(param, v - *dec as f64);
    }
    for (param, inc) in &req.inv_inc {
        let v = sf.get(param).unwrap_or(0.0);
        sf.set(param, v + *inc as f64);
    }
    sf
}

/// Hard guard on grid materialization.
const GRID_GUARD: u128 = 1_000_000;

/// Size of the feasible integer grid for the node at `node_index` of
/// `path`, without materializing it.
pub fn node_grid_size(
    dfa: &Dfa,
    path: &TracePath,
    node_index: usize,
    spec: &OomdpSpec,
    alphabet: &Alphabet,
) -> Result<u128, OomdpError> {
    if dfa.is_accepting(path.nodes()[node_index]) {
        return Ok(1);
    }
    let counts = prefix_event_counts(path, node_index)?;
    let req = requirements(spec, alphabet, &counts)?;
    let mut size: u128 = 1;
    for p in spec.params() {
        if p.kind != ParamKind::Integer {
            return Err(OomdpError::ContinuousRange {
                param: p.name.clone(),
            });
        }
        let (lo, hi) = feasible_bounds(p, &req)?;
        size = size.saturating_mul((hi as i64 - lo as i64 + 1) as u128);
    }
    Ok(size)
}

/// Every task whose initial state provides the objects required by the
/// event multiset of the path prefix up to `node_index`, with all other
/// integer parameters ranging over their declared grids. Goal states are
/// the initial states advanced by the prefix events. For an accepting
/// node the single task is the declared target.
///
/// Enumeration order is the odometer over parameters in declaration
/// order, so output is deterministic; placement seeds derive from `seed`.
pub fn tasks_for_node(
    dfa: &Dfa,
    path: &TracePath,
    node_index: usize,
    spec: &OomdpSpec,
    alphabet: &Alphabet,
    target: &TaskConfig,
    seed: u64,
) -> Result<Vec<TaskConfig>, OomdpError> {
    let node = path.nodes()[node_index];
    if dfa.is_accepting(node) {
        return Ok(vec![target.clone()]);
    }
    let size = node_grid_size(dfa, path, node_index, spec, alphabet)?;
    if size > GRID_GUARD {
        return Err(OomdpError::GridTooLarge {
            size,
            cap: GRID_GUARD,
        });
    }

    let counts = prefix_event_counts(path, node_index)?;
    let req = requirements(spec, alphabet, &counts)?;
    let mut domains: Vec<(&ParamSpec, i64, i64)> = Vec::new();
    for p in spec.params() {
        let (lo, hi) = feasible_bounds(p, &req)?;
        domains.push((p, lo as i64, hi as i64));
    }

    let mut out = Vec::with_capacity(size as usize);
    let mut odometer: Vec<i64> = domains.iter().map(|&(_, lo, _)| lo).collect();
    loop {
        let mut values = BTreeMap::new();
        for ((p, _, _), &v) in domains.iter().zip(odometer.iter()) {
            values.insert(p.name.clone(), v as f64);
        }
        let s0 = OomdpState::new(values);
        let sf = goal_state(&s0, &req);
        let index = out.len() as u64;
        out.push(TaskConfig {
            id: format!("n{node}-g{index}"),
            s0,
            sf,
            placement_seed: derive_seed_indexed(seed, "placement", index),
            is_target: false,
        });

        // Advance the odometer, last parameter fastest.
        let mut pos = domains.len();
        loop {
            if pos == 0 {
                return Ok(out);
            }
            pos -= 1;
            if odometer[pos] < domains[pos].2 {
                odometer[pos] += 1;
                break;
            }
            odometer[pos] = domains[pos].1;
        }
    }
}

/// Draws `b` distinct tasks uniformly from the feasible region for the
/// node (integer parameters uniform on the feasible grid, real parameters
/// uniform in range), deterministic given `seed`. Duplicates are rejected
/// and resampled up to a retry cap.
pub fn sample_node_tasks(
    dfa: &Dfa,
    path: &TracePath,
    node_index: usize,
    spec: &OomdpSpec,
    alphabet: &Alphabet,
    target: &TaskConfig,
    b: usize,
    seed: u64,
) -> Result<Vec<TaskConfig>, OomdpError> {
    assert!(b >= 1, "sample size must be positive");
    let node = path.nodes()[node_index];
    if dfa.is_accepting(node) {
        return Ok(vec![target.clone()]);
    }
    let counts = prefix_event_counts(path, node_index)?;
    let req = requirements(spec, alphabet, &counts)?;

    let mut domains: Vec<(&ParamSpec, f64, f64)> = Vec::new();
    let mut grid_size: Option<u128> = Some(1);
    for p in spec.params() {
        let (lo, hi) = feasible_bounds(p, &req)?;
        if p.kind == ParamKind::Integer {
            grid_size = grid_size.map(|s| s.saturating_mul((hi as i64 - lo as i64 + 1) as u128));
        } else {
            grid_size = None; // uncountable region, dedup cannot exhaust it
        }
        domains.push((p, lo, hi));
    }
    if let Some(size) = grid_size {
        if size < b as u128 {
            return Err(OomdpError::RetryExhausted {
                requested: b,
                available: size,
            });
        }
    }

    let mut rng = rng_for(seed, "node-tasks");
    let mut seen: Vec<OomdpState> = Vec::new();
    let mut out = Vec::with_capacity(b);
    let mut attempts = 0usize;
    let attempt_cap = 1000 + 200 * b;
    while out.len() < b {
        attempts += 1;
        if attempts > attempt_cap {
            return Err(OomdpError::RetryExhausted {
                requested: b,
                available: grid_size.unwrap_or(u128::MAX),
            });
        }
        let mut values = BTreeMap::new();
        for &(p, lo, hi) in &domains {
            let v = match p.kind {
                ParamKind::Integer => rng.random_range(lo as i64..=hi as i64) as f64,
                ParamKind::Real => rng.random_range(lo..=hi),
            };
            values.insert(p.name.clone(), v);
        }
        let s0 = OomdpState::new(values);
        if seen.contains(&s0) {
            continue;
        }
        seen.push(s0.clone());
        let sf = goal_state(&s0, &req);
        let index = out.len() as u64;
        out.push(TaskConfig {
            id: format!("n{node}-s{index}"),
            s0,
            sf,
            placement_seed: derive_seed_indexed(seed, "placement", index),
            is_target: false,
        });
    }
    Ok(out)
}

/// Widens every parameter range with independent Gaussian draws of
/// standard deviation `(hi - lo) / 6`: the noisy range is
/// `[lo - g1, hi + g2]`. Integer ranges round outward; integer lower
/// bounds that started non-negative stay clamped at zero; a crossed range
/// collapses to its midpoint. Deterministic given `seed`.
pub fn apply_range_noise(spec: &OomdpSpec, seed: u64) -> OomdpSpec {
    let mut rng = rng_for(seed, "range-noise");
    let mut noisy = spec.clone();
    for class in &mut noisy.classes {
        for p in &mut class.params {
            let sigma = (p.hi - p.lo) / 6.0;
            if sigma == 0.0 {
                continue;
            }
            let normal = Normal::new(0.0, sigma).expect("sigma is positive");
            let g1: f64 = normal.sample(&mut rng);
            let g2: f64 = normal.sample(&mut rng);
            let mut lo = p.lo - g1;
            let mut hi = p.hi + g2;
            if lo > hi {
                let mid = (lo + hi) / 2.0;
                lo = mid;
                hi = mid;
            }
            if p.kind == ParamKind::Integer {
                lo = lo.floor();
                hi = hi.ceil();
                if p.lo >= 0.0 {
                    lo = lo.max(0.0);
                }
                if lo > hi {
                    hi = lo;
                }
            }
            p.lo = lo;
            p.hi = hi;
        }
    }
    noisy
}

#[cfg(test)]
pub(crate) mod tests {
    use super::*;
    use crate::ltlf::{compile_dfa, parse_ltlf};

    pub(crate) fn crafting_spec() -> OomdpSpec {
        let classes = vec![
            ClassSpec {
                name: "world_size".into(),
                params: vec![
                    ParamSpec {
                        name: "width".into(),
                        kind: ParamKind::Integer,
                        lo: 6.0,
                        hi: 6.0,
                    },
                    ParamSpec {
                        name: "height".into(),
                        kind: ParamKind::Integer,
                        lo: 6.0,
                        hi: 6.0,
                    },
                ],
            },
            ClassSpec {
                name: "trees".into(),
                params: vec![
                    ParamSpec {
                        name: "trees_env".into(),
                        kind: ParamKind::Integer,
                        lo: 0.0,
                        hi: 4.0,
                    },
                    ParamSpec {
                        name: "trees_inv".into(),
                        kind: ParamKind::Integer,
                        lo: 0.0,
                        hi: 4.0,
                    },
                ],
            },
            ClassSpec {
                name: "rocks".into(),
                params: vec![
                    ParamSpec {
                        name: "rocks_env".into(),
                        kind: ParamKind::Integer,
                        lo: 0.0,
                        hi: 2.0,
                    },
                    ParamSpec {
                        name: "rocks_inv".into(),
                        kind: ParamKind::Integer,
                        lo: 0.0,
                        hi: 2.0,
                    },
                ],
            },
            ClassSpec {
                name: "crafting_table".into(),
                params: vec![ParamSpec {
                    name: "crafting_table_env".into(),
                    kind: ParamKind::Integer,
                    lo: 0.0,
                    hi: 1.0,
                }],
            },
        ];
        let mut bindings = BTreeMap::new();
        bindings.insert(
            "tree".into(),
            Binding::Consumable {
                env: "trees_env".into(),
                inventory: "trees_inv".into(),
            },
        );
        bindings.insert(
            "rock".into(),
            Binding::Consumable {
                env: "rocks_env".into(),
                inventory: "rocks_inv".into(),
            },
        );
        OomdpSpec { classes, bindings }
    }

    pub(crate) fn state(pairs: &[(&str, f64)]) -> OomdpState {
        OomdpState::new(
            pairs
                .iter()
                .map(|(k, v)| (k.to_string(), *v))
                .collect::<BTreeMap<_, _>>(),
        )
    }

    fn fig1_setup() -> (Alphabet, Dfa, TracePath, OomdpSpec, TaskConfig) {
        let a = Alphabet::new(["tree", "rock"]).unwrap();
        let f = parse_ltlf("F(tree) & F(rock)", &a).unwrap();
        let d = compile_dfa(&f, &a).unwrap();
        let paths = d.get_trace_paths().unwrap();
        let spec = crafting_spec();
        let target = TaskConfig {
            id: "target".into(),
            s0: state(&[
                ("width", 6.0),
                ("height", 6.0),
                ("trees_env", 1.0),
                ("trees_inv", 0.0),
                ("rocks_env", 1.0),
                ("rocks_inv", 0.0),
                ("crafting_table_env", 0.0),
            ]),
            sf: state(&[
                ("width", 6.0),
                ("height", 6.0),
                ("trees_env", 0.0),
                ("trees_inv", 1.0),
                ("rocks_env", 0.0),
                ("rocks_inv", 1.0),
                ("crafting_table_env", 0.0),
            ]),
            placement_seed: 7,
            is_target: true,
        };
        (a, d, paths[0].clone(), spec, target)
    }

    #[test]
    fn tree_node_tasks_require_a_tree_and_collect_it() {
        let (a, d, path, spec, target) = fig1_setup();
        // Path 0 is tree-first; node index 1 has prefix {tree}.
        let tasks = tasks_for_node(&d, &path, 1, &spec, &a, &target, 0).unwrap();
        // Free grid: trees_env in [1,4] (4) x trees_inv in [0,3] (4) x
        // rocks_env 3 x rocks_inv 3 x table 2.
        assert_eq!(tasks.len(), 4 * 4 * 3 * 3 * 2);
        for t in &tasks {
            assert!(t.s0.get("trees_env").unwrap() >= 1.0);
            assert_eq!(
                t.sf.get("trees_inv").unwrap(),
                t.s0.get("trees_inv").unwrap() + 1.0
            );
            assert_eq!(
                t.sf.get("trees_env").unwrap(),
                t.s0.get("trees_env").unwrap() - 1.0
            );
            assert_eq!(t.sf.get("rocks_inv"), t.s0.get("rocks_inv"));
            assert!(!t.is_target);
        }
        // Brute-force oracle: filter the full odometer grid by the
        // requirement predicate and compare counts.
        let mut brute = 0usize;
        for trees_env in 0..=4 {
            for trees_inv in 0..=4 {
                for rocks_env in 0..=2 {
                    for rocks_inv in 0..=2 {
                        for _table in 0..=1 {
                            if trees_env >= 1 && trees_inv + 1 <= 4 && rocks_env <= 2 && rocks_inv <= 2
                            {
                                brute += 1;
                            }
                        }
                    }
                }
            }
        }
        assert_eq!(tasks.len(), brute);
    }

    #[test]
    fn empty_prefix_yields_degenerate_tasks() {
        let (a, d, path, spec, target) = fig1_setup();
        let tasks = tasks_for_node(&d, &path, 0, &spec, &a, &target, 0).unwrap();
        assert!(!tasks.is_empty());
        for t in &tasks {
            assert_eq!(t.s0, t.sf);
        }
    }

    #[test]
    fn accepting_node_returns_the_declared_target() {
        let (a, d, path, spec, target) = fig1_setup();
        let last = path.nodes().len() - 1;
        let tasks = tasks_for_node(&d, &path, last, &spec, &a, &target, 0).unwrap();
        assert_eq!(tasks, vec![target]);
    }

    #[test]
    fn infeasible_requirement_is_an_error() {
        let (a, d, _, mut spec, target) = fig1_setup();
        // Shrink the tree range below the requirement.
        spec.classes[1].params[0].hi = 0.0;
        let path = d.get_trace_paths().unwrap().remove(0);
        let err = tasks_for_node(&d, &path, 1, &spec, &a, &target, 0).unwrap_err();
        assert_eq!(
            err,
            OomdpError::Infeasible {
                param: "trees_env".into(),
                required: 1,
                max: 0,
            }
        );
    }

    #[test]
    fn sampling_is_deterministic_and_distinct() {
        let (a, d, path, spec, target) = fig1_setup();
        let s1 = sample_node_tasks(&d, &path, 1, &spec, &a, &target, 25, 9).unwrap();
        let s2 = sample_node_tasks(&d, &path, 1, &spec, &a, &target, 25, 9).unwrap();
        assert_eq!(s1, s2);
        assert_eq!(s1.len(), 25);
        for (i, t) in s1.iter().enumerate() {
            assert!(t.s0.get("trees_env").unwrap() >= 1.0);
            for u in &s1[..i] {
                assert_ne!(t.s0, u.s0);
            }
        }
        let single = sample_node_tasks(&d, &path, 1, &spec, &a, &target, 1, 9).unwrap();
        assert_eq!(single.len(), 1);
    }

    #[test]
    fn sampling_respects_real_ranges() {
        let (a, d, path, mut spec, target) = fig1_setup();
        spec.classes[0].params[0] = ParamSpec {
            name: "width".into(),
            kind: ParamKind::Real,
            lo: 2.0,
            hi: 4.0,
        };
        let tasks = sample_node_tasks(&d, &path, 1, &spec, &a, &target, 25, 3).unwrap();
        assert_eq!(tasks.len(), 25);
        for t in &tasks {
            let w = t.s0.get("width").unwrap();
            assert!((2.0..=4.0).contains(&w));
        }
    }

    #[test]
    fn sampling_more_than_the_region_is_an_error() {
        let (a, d, path, mut spec, target) = fig1_setup();
        // Leave exactly one feasible configuration: trees_env pinned to 1
        // and every other parameter to a single point (trees_inv keeps one
        // unit of headroom for the collected tree).
        for c in &mut spec.classes {
            for p in &mut c.params {
                match p.name.as_str() {
                    "trees_env" => (p.lo, p.hi) = (1.0, 1.0),
                    "trees_inv" => (p.lo, p.hi) = (0.0, 1.0),
                    _ => p.hi = p.lo,
                }
            }
        }
        let err = sample_node_tasks(&d, &path, 1, &spec, &a, &target, 2, 0).unwrap_err();
        assert!(matches!(err, OomdpError::RetryExhausted { .. }));
    }

    #[test]
    fn range_noise_is_outward_deterministic_and_skips_degenerate_ranges() {
        let spec = crafting_spec();
        let n1 = apply_range_noise(&spec, 11);
        let n2 = apply_range_noise(&spec, 11);
        assert_eq!(n1, n2);
        // width/height have zero-width ranges: sigma 0, unchanged.
        assert_eq!(n1.classes[0].params[0].lo, 6.0);
        assert_eq!(n1.classes[0].params[0].hi, 6.0);
        for (orig, noisy) in spec.params().zip(n1.params()) {
            assert!(noisy.lo <= noisy.hi, "{}", noisy.name);
            assert!(noisy.lo >= 0.0, "count parameter went negative");
            assert_eq!(noisy.lo.fract(), 0.0);
            assert_eq!(noisy.hi.fract(), 0.0);
            let _ = orig;
        }
        assert_ne!(
            apply_range_noise(&spec, 12).classes[1].params[0],
            n1.classes[1].params[0]
        );
    }

    #[test]
    fn grid_guard_trips_on_huge_grids() {
        let (a, d, path, mut spec, target) = fig1_setup();
        for c in &mut spec.classes {
            for p in &mut c.params {
                p.lo = 0.0;
                p.hi = 100.0;
            }
        }
        let err = tasks_for_node(&d, &path, 1, &spec, &a, &target, 0).unwrap_err();
        assert!(matches!(err, OomdpError::GridTooLarge { .. }));
    }

    #[test]
    fn spec_validation_catches_unbound_props_and_bad_ranges() {
        let spec = crafting_spec();
        let a = Alphabet::new(["tree", "rock"]).unwrap();
        spec.validate(&a).unwrap();
        let a_extra = Alphabet::new(["tree", "rock", "pogo"]).unwrap();
        assert!(matches!(
            spec.validate(&a_extra),
            Err(OomdpError::UnboundProposition { .. })
        ));
        let mut bad = spec.clone();
        bad.classes[0].params[0].lo = 9.0;
        assert!(bad.validate(&a).is_err());
    }
}
