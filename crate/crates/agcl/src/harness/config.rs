use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::curriculum::{Mode, SamplingOptions};
use crate::learner::Hyper;
use crate::ltlf::Alphabet;
use crate::oomdp::{Binding, OomdpSpec, OomdpState, TaskConfig};

use super::HarnessError;

/// The experiment configuration file. Unknown keys are rejected
/// everywhere so typos fail loudly.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    /// Objective formula over `ap`.
    pub formula: String,
    /// Atomic propositions, in declaration order.
    pub ap: Vec<String>,
    pub oomdp: OomdpSpec,
    pub target: TargetConfig,
    /// Curriculum shape trained alongside the baselines.
    pub mode: Mode,
    /// Jump-score threshold for graph curricula; derived from the
    /// candidate scores when absent.
    #[serde(default)]
    pub eta: Option<f64>,
    #[serde(default)]
    pub sampling: SamplingOptions,
    #[serde(default)]
    pub noise: NoiseConfig,
    #[serde(default)]
    pub learner: HyperPatch,
    /// Environment-step budget per method and seed.
    pub budget: u64,
    /// Replicate seeds.
    pub seeds: Vec<u64>,
    #[serde(default)]
    pub baselines: Vec<BaselineKind>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TargetConfig {
    pub s0: BTreeMap<String, f64>,
    pub sf: BTreeMap<String, f64>,
    #[serde(default)]
    pub placement_seed: u64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct NoiseConfig {
    #[serde(default)]
    pub enabled: bool,
    #[serde(default)]
    pub seed: u64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum BaselineKind {
    Scratch,
    Gsrs,
}

impl BaselineKind {
    pub fn label(self) -> &'static str {
        match self {
            BaselineKind::Scratch => "scratch",
            BaselineKind::Gsrs => "gsrs",
        }
    }
}

/// Partial learner settings; anything unset falls back to the defaults.
#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct HyperPatch {
    pub replay_capacity: Option<usize>,
    pub batch_size: Option<usize>,
    pub gamma: Option<f64>,
    pub learning_rate: Option<f64>,
    pub eps_start: Option<f64>,
    pub eps_end: Option<f64>,
    pub eps_fraction: Option<f64>,
    pub target_sync: Option<u64>,
    pub train_every: Option<u64>,
    pub n_step: Option<usize>,
    pub learning_starts: Option<usize>,
    pub eval_period: Option<u64>,
    pub eval_episodes: Option<usize>,
    pub delta_src: Option<f64>,
    pub reward_scale: Option<f64>,
    pub hidden: Option<Vec<usize>>,
    pub step_cap: Option<usize>,
    pub gsrs_c: Option<f64>,
}

impl HyperPatch {
    pub fn resolve(&self) -> Hyper {
        let d = Hyper::default();
        Hyper {
            replay_capacity: self.replay_capacity.unwrap_or(d.replay_capacity),
            batch_size: self.batch_size.unwrap_or(d.batch_size),
            gamma: self.gamma.unwrap_or(d.gamma),
            learning_rate: self.learning_rate.unwrap_or(d.learning_rate),
            eps_start: self.eps_start.unwrap_or(d.eps_start),
            eps_end: self.eps_end.unwrap_or(d.eps_end),
            eps_fraction: self.eps_fraction.unwrap_or(d.eps_fraction),
            target_sync: self.target_sync.unwrap_or(d.target_sync),
            train_every: self.train_every.unwrap_or(d.train_every),
            n_step: self.n_step.unwrap_or(d.n_step),
            learning_starts: self.learning_starts.unwrap_or(d.learning_starts),
            eval_period: self.eval_period.unwrap_or(d.eval_period),
            eval_episodes: self.eval_episodes.unwrap_or(d.eval_episodes),
            delta_src: self.delta_src.unwrap_or(d.delta_src),
            reward_scale: self.reward_scale.unwrap_or(d.reward_scale),
            hidden: self.hidden.clone().unwrap_or(d.hidden),
            step_cap: self.step_cap.unwrap_or(d.step_cap),
            gsrs_c: self.gsrs_c.unwrap_or(d.gsrs_c),
        }
    }
}

impl ExperimentConfig {
    pub fn from_json(text: &str) -> Result<Self, HarnessError> {
        let cfg: ExperimentConfig =
            serde_json::from_str(text).map_err(|e| HarnessError::Config(e.to_string()))?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn alphabet(&self) -> Result<Alphabet, HarnessError> {
        Ok(Alphabet::new(self.ap.iter().cloned())?)
    }

    /// The declared target task (the single `is_target` config of a run).
    pub fn target_task(&self) -> TaskConfig {
        TaskConfig {
            id: "target".into(),
            s0: OomdpState::new(self.target.s0.clone()),
            sf: OomdpState::new(self.target.sf.clone()),
            placement_seed: self.target.placement_seed,
            is_target: true,
        }
    }

    pub fn validate(&self) -> Result<(), HarnessError> {
        let alphabet = self.alphabet()?;
        self.oomdp.validate(&alphabet)?;
        if self.budget == 0 {
            return Err(HarnessError::Config("budget must be positive".into()));
        }
        if self.seeds.is_empty() {
            return Err(HarnessError::Config("at least one seed required".into()));
        }
        if let Some(f) = self.sampling.subset_fraction {
            if !(f > 0.0 && f <= 1.0) {
                return Err(HarnessError::Config(format!(
                    "sampling.subset_fraction must be in (0, 1], got {f}"
                )));
            }
        }
        if self.sampling.b == Some(0) {
            return Err(HarnessError::Config("sampling.b must be positive".into()));
        }
        let target = self.target_task();
        for (name, state) in [("target.s0", &target.s0), ("target.sf", &target.sf)] {
            state
                .validate(&self.oomdp)
                .map_err(|e| HarnessError::Config(format!("{name}: {e}")))?;
        }
        // Progress is monotone: goal inventories never drop below start.
        for binding in self.oomdp.bindings.values() {
            if let Binding::Consumable { inventory, .. } = binding {
                let s0 = target.s0.get(inventory).unwrap_or(0.0);
                let sf = target.sf.get(inventory).unwrap_or(0.0);
                if sf < s0 {
                    return Err(HarnessError::Config(format!(
                        "target goal inventory `{inventory}` ({sf}) below initial ({s0})"
                    )));
                }
            }
        }
        Ok(())
    }
}
