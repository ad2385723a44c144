//! Continuous partner model: processing capacity, gaze weights, focus-shift
//! counter and per-task awareness, plus classification into one of the 30
//! observation triples.

use std::collections::BTreeMap;
use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::scoring::{Action, HesitationType, NegationType, Observation};

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum CapacityClass {
    Low,
    High,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum GazeClass {
    Distracted,
    Uncertain,
    Focused,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum TaskClass {
    Unknown,
    Failure,
    MiscEnabledness,
    MiscComprehension,
    Success,
}

macro_rules! labelled {
    ($ty:ident { $($variant:ident => $label:literal),+ $(,)? }) => {
        impl $ty {
            pub const ALL: &'static [$ty] = &[$($ty::$variant),+];

            pub fn as_str(self) -> &'static str {
                match self {
                    $($ty::$variant => $label),+
                }
            }
        }

        impl fmt::Display for $ty {
            fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
                f.write_str(self.as_str())
            }
        }

        impl FromStr for $ty {
            type Err = Error;

            fn from_str(s: &str) -> Result<Self> {
                match s {
                    $($label => Ok($ty::$variant),)+
                    _ => Err(Error::Parse(s.to_string())),
                }
            }
        }
    };
}

labelled!(CapacityClass { Low => "low", High => "high" });
labelled!(GazeClass {
    Distracted => "distracted",
    Uncertain => "uncertain",
    Focused => "focused",
});
labelled!(TaskClass {
    Unknown => "unknown",
    Failure => "failure",
    MiscEnabledness => "misc_enabledness",
    MiscComprehension => "misc_comprehension",
    Success => "success",
});

impl TaskClass {
    /// Groups a task outcome by its two understanding dimensions.
    pub fn from_outcome(comprehension_ok: bool, enabledness_ok: bool) -> TaskClass {
        match (comprehension_ok, enabledness_ok) {
            (true, true) => TaskClass::Success,
            (false, false) => TaskClass::Failure,
            (true, false) => TaskClass::MiscEnabledness,
            (false, true) => TaskClass::MiscComprehension,
        }
    }
}

/// Classified monitoring state.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct ObservationTriple {
    pub capacity: CapacityClass,
    pub gaze: GazeClass,
    pub task: TaskClass,
}

impl ObservationTriple {
    pub const COUNT: usize = 30;

    pub const fn new(capacity: CapacityClass, gaze: GazeClass, task: TaskClass) -> Self {
        ObservationTriple {
            capacity,
            gaze,
            task,
        }
    }

    /// All 30 triples, capacity-major.
    pub fn all() -> impl Iterator<Item = ObservationTriple> + Clone {
        (0..Self::COUNT).map(Self::from_index)
    }

    pub fn index(self) -> usize {
        (self.capacity as usize * 3 + self.gaze as usize) * 5 + self.task as usize
    }

    /// # Panics
    /// If `index >= 30`.
    pub fn from_index(index: usize) -> ObservationTriple {
        assert!(index < Self::COUNT, "triple index {index} out of range");
        ObservationTriple::new(
            CapacityClass::ALL[index / 15],
            GazeClass::ALL[(index / 5) % 3],
            TaskClass::ALL[index % 5],
        )
    }

    pub fn observations(self) -> [Observation; 3] {
        [
            Observation::Capacity(self.capacity),
            Observation::Gaze(self.gaze),
            Observation::Task(self.task),
        ]
    }

    pub fn labels(self) -> [&'static str; 3] {
        [
            self.capacity.as_str(),
            self.gaze.as_str(),
            self.task.as_str(),
        ]
    }
}

impl fmt::Display for ObservationTriple {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "({}, {}, {})", self.capacity, self.gaze, self.task)
    }
}

/// Constants for the partner model. Every field can be overridden from the
/// `[partner_model]` section of a config file.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct PartnerModelConfig {
    pub capacity_max: f64,
    pub capacity_min: f64,
    /// Recovery when the same action is repeated.
    pub capacity_recovery: f64,
    /// Drain for a cognitively demanding action.
    pub capacity_demanding_cost: f64,
    /// Drain for any other action.
    pub capacity_light_cost: f64,
    /// `value >= capacity_threshold` classifies as high.
    pub capacity_threshold: f64,
    pub demanding_actions: Vec<Action>,

    pub targets: usize,
    pub gaze_step: f64,
    pub weight_min: f64,

    pub focus_shift_min: f64,
    pub focus_shift_max: f64,
    pub focus_shift_increment: f64,
    pub focus_shift_decrement: f64,

    /// Focused needs a dominant-target share at least this high...
    pub focused_share: f64,
    /// ...and at most this many accumulated focus shifts.
    pub focused_max_shifts: f64,
    /// Distracted below this share...
    pub distracted_share: f64,
    /// ...or at this many focus shifts and above.
    pub distracted_min_shifts: f64,
}

impl Default for PartnerModelConfig {
    fn default() -> Self {
        PartnerModelConfig {
            capacity_max: 100.0,
            capacity_min: 0.0,
            capacity_recovery: 5.0,
            capacity_demanding_cost: 20.0,
            capacity_light_cost: 10.0,
            capacity_threshold: 50.0,
            demanding_actions: vec![
                Action::new(NegationType::NegationAffirmation, HesitationType::None),
                Action::new(NegationType::Negation, HesitationType::None),
            ],
            targets: 3,
            gaze_step: 10.0,
            weight_min: 0.0,
            focus_shift_min: 0.0,
            focus_shift_max: 10.0,
            focus_shift_increment: 1.0,
            focus_shift_decrement: 1.0,
            focused_share: 0.6,
            focused_max_shifts: 3.0,
            distracted_share: 0.4,
            distracted_min_shifts: 7.0,
        }
    }
}

impl PartnerModelConfig {
    pub fn validate(&self) -> Result<()> {
        let bad = |msg: &str| Err(Error::InvalidConfig(format!("partner_model: {msg}")));
        let finite = [
            self.capacity_max,
            self.capacity_min,
            self.capacity_recovery,
            self.capacity_demanding_cost,
            self.capacity_light_cost,
            self.capacity_threshold,
            self.gaze_step,
            self.weight_min,
            self.focus_shift_min,
            self.focus_shift_max,
            self.focus_shift_increment,
            self.focus_shift_decrement,
            self.focused_share,
            self.focused_max_shifts,
            self.distracted_share,
            self.distracted_min_shifts,
        ];
        if finite.iter().any(|v| !v.is_finite()) {
            return bad("all constants must be finite");
        }
        if self.capacity_min > self.capacity_max {
            return bad("capacity_min exceeds capacity_max");
        }
        if self.capacity_recovery < 0.0
            || self.capacity_demanding_cost < 0.0
            || self.capacity_light_cost < 0.0
            || self.gaze_step < 0.0
            || self.focus_shift_increment < 0.0
            || self.focus_shift_decrement < 0.0
        {
            return bad("step sizes must be non-negative");
        }
        if self.targets < 2 {
            return bad("at least two gaze targets are required");
        }
        if self.weight_min < 0.0 || self.weight_min > self.capacity_max / self.targets as f64 {
            return bad("weight_min must lie in [0, capacity_max / targets]");
        }
        if self.focus_shift_min > self.focus_shift_max {
            return bad("focus_shift_min exceeds focus_shift_max");
        }
        Ok(())
    }

    pub fn is_demanding(&self, action: Action) -> bool {
        self.demanding_actions.contains(&action)
    }
}

/// Battery-like processing capacity.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct CapacityState {
    pub value: f64,
    pub last_action: Option<Action>,
}

impl CapacityState {
    pub fn new(cfg: &PartnerModelConfig) -> Self {
        CapacityState {
            value: cfg.capacity_max,
            last_action: None,
        }
    }

    /// Repeating the previous action recovers capacity; anything else drains it.
    pub fn update(&mut self, action: Action, cfg: &PartnerModelConfig) {
        self.value = if self.last_action == Some(action) {
            (self.value + cfg.capacity_recovery).min(cfg.capacity_max)
        } else if cfg.is_demanding(action) {
            (self.value - cfg.capacity_demanding_cost).max(cfg.capacity_min)
        } else {
            (self.value - cfg.capacity_light_cost).max(cfg.capacity_min)
        };
        self.last_action = Some(action);
    }

    pub fn class(&self, cfg: &PartnerModelConfig) -> CapacityClass {
        if self.value >= cfg.capacity_threshold {
            CapacityClass::High
        } else {
            CapacityClass::Low
        }
    }
}

/// Per-target attentional weights and the focus-shift counter.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct GazeState {
    pub weights: Vec<f64>,
    pub focus_shift: f64,
    pub last_focus: Option<usize>,
}

impl GazeState {
    pub fn new(cfg: &PartnerModelConfig) -> Self {
        GazeState {
            weights: vec![cfg.capacity_max / cfg.targets as f64; cfg.targets],
            focus_shift: cfg.focus_shift_min,
            last_focus: None,
        }
    }

    fn check_target(&self, target: usize) -> Result<()> {
        if target >= self.weights.len() {
            return Err(Error::TargetOutOfRange {
                target: target as i64,
                targets: self.weights.len(),
            });
        }
        Ok(())
    }

    /// Shifts weight to the fixated target and takes the gain evenly from
    /// the others, each clamped at `weight_min`.
    pub fn update_weights(&mut self, target: usize, cfg: &PartnerModelConfig) -> Result<()> {
        self.check_target(target)?;
        let fixated = self.weights[target];
        let gain = (fixated + cfg.gaze_step).min(cfg.capacity_max) - fixated;
        let share = gain / (self.weights.len() - 1) as f64;
        for (i, w) in self.weights.iter_mut().enumerate() {
            if i == target {
                *w = fixated + gain;
            } else {
                *w = (*w - share).max(cfg.weight_min);
            }
        }
        Ok(())
    }

    pub fn update_focus_shift(&mut self, target: usize, cfg: &PartnerModelConfig) -> Result<()> {
        self.check_target(target)?;
        self.focus_shift = if self.last_focus == Some(target) {
            (self.focus_shift - cfg.focus_shift_decrement).max(cfg.focus_shift_min)
        } else {
            (self.focus_shift + cfg.focus_shift_increment).min(cfg.focus_shift_max)
        };
        self.last_focus = Some(target);
        Ok(())
    }

    /// Share of the total weight held by the most attended target.
    pub fn dominant_share(&self) -> f64 {
        let total: f64 = self.weights.iter().sum();
        if total <= 0.0 {
            return 0.0;
        }
        self.weights.iter().copied().fold(f64::MIN, f64::max) / total
    }

    /// Distracted is tested first, then focused; anything else is uncertain.
    /// Before the first fixation there is no evidence of distraction and the
    /// gaze counts as focused.
    pub fn class(&self, cfg: &PartnerModelConfig) -> GazeClass {
        if self.last_focus.is_none() {
            return GazeClass::Focused;
        }
        let share = self.dominant_share();
        if share < cfg.distracted_share || self.focus_shift >= cfg.distracted_min_shifts {
            GazeClass::Distracted
        } else if share >= cfg.focused_share && self.focus_shift <= cfg.focused_max_shifts {
            GazeClass::Focused
        } else {
            GazeClass::Uncertain
        }
    }
}

/// Latest outcome class per task id. Unseen tasks are unknown.
#[derive(Clone, Debug, Default, PartialEq, Serialize)]
pub struct TaskAwareness {
    tasks: BTreeMap<String, TaskClass>,
}

impl TaskAwareness {
    pub fn record(
        &mut self,
        task: &str,
        comprehension_ok: bool,
        enabledness_ok: bool,
    ) -> TaskClass {
        let class = TaskClass::from_outcome(comprehension_ok, enabledness_ok);
        self.tasks.insert(task.to_string(), class);
        class
    }

    pub fn get(&self, task: &str) -> TaskClass {
        self.tasks.get(task).copied().unwrap_or(TaskClass::Unknown)
    }

    pub fn len(&self) -> usize {
        self.tasks.len()
    }

    pub fn is_empty(&self) -> bool {
        self.tasks.is_empty()
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct PartnerModel {
    #[serde(skip)]
    config: PartnerModelConfig,
    pub capacity: CapacityState,
    pub gaze: GazeState,
    pub awareness: TaskAwareness,
}

impl PartnerModel {
    pub fn new(config: PartnerModelConfig) -> Result<Self> {
        config.validate()?;
        Ok(PartnerModel {
            capacity: CapacityState::new(&config),
            gaze: GazeState::new(&config),
            awareness: TaskAwareness::default(),
            config,
        })
    }

    pub fn config(&self) -> &PartnerModelConfig {
        &self.config
    }

    pub fn targets(&self) -> usize {
        self.gaze.weights.len()
    }

    /// Applies one fixation event to both the weights and the focus-shift
    /// counter. Out-of-range targets leave the model untouched.
    pub fn fixate(&mut self, target: i64) -> Result<()> {
        let idx = usize::try_from(target)
            .ok()
            .filter(|t| *t < self.targets())
            .ok_or(Error::TargetOutOfRange {
                target,
                targets: self.targets(),
            })?;
        self.gaze.update_weights(idx, &self.config)?;
        self.gaze.update_focus_shift(idx, &self.config)
    }

    pub fn apply_action(&mut self, action: Action) {
        self.capacity.update(action, &self.config);
    }

    pub fn record_task(&mut self, task: &str, comprehension_ok: bool, enabledness_ok: bool) {
        self.awareness
            .record(task, comprehension_ok, enabledness_ok);
    }

    pub fn classify(&self, task: &str) -> ObservationTriple {
        ObservationTriple::new(
            self.capacity.class(&self.config),
            self.gaze.class(&self.config),
            self.awareness.get(task),
        )
    }
}
