//! Tabular Q-learning over the six cognitive states and six actions.
//!
//! Exploration is decayed epsilon-greedy. An exploring draw first picks
//! among the actions never tried in the current state; once all six have
//! been visited it picks uniformly. Exploiting draws take the argmax with
//! ties broken uniformly at random.

use std::io::{Read, Write};

use rand::seq::IndexedRandom;
use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::scoring::{Action, CognitiveState, GroundTruthMap};

const N: usize = CognitiveState::COUNT;
const M: usize = Action::COUNT;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct PolicyParams {
    pub alpha: f64,
    pub gamma: f64,
    /// Initial exploration rate.
    pub epsilon: f64,
    /// Multiplicative decay applied after every selection.
    pub epsilon_decay: f64,
    pub epsilon_min: f64,
    /// Prior value written to each state's ground-truth action.
    pub q_init: f64,
}

impl Default for PolicyParams {
    fn default() -> Self {
        PolicyParams {
            alpha: 0.25,
            gamma: 0.0,
            epsilon: 0.75,
            epsilon_decay: 0.95,
            epsilon_min: 0.01,
            q_init: 0.5,
        }
    }
}

impl PolicyParams {
    pub fn validate(&self) -> Result<()> {
        let bad = |msg: &str| Err(Error::InvalidConfig(format!("policy: {msg}")));
        if !(self.alpha > 0.0 && self.alpha <= 1.0) {
            return bad("alpha must lie in (0, 1]");
        }
        if !(0.0..1.0).contains(&self.gamma) {
            return bad("gamma must lie in [0, 1)");
        }
        if !(0.0..=1.0).contains(&self.epsilon) {
            return bad("epsilon must lie in [0, 1]");
        }
        if !(self.epsilon_decay > 0.0 && self.epsilon_decay <= 1.0) {
            return bad("epsilon_decay must lie in (0, 1]");
        }
        if !(0.0..=1.0).contains(&self.epsilon_min) {
            return bad("epsilon_min must lie in [0, 1]");
        }
        if !self.q_init.is_finite() {
            return bad("q_init must be finite");
        }
        Ok(())
    }
}

/// Outcome of one action selection.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct Selection {
    pub action: Action,
    pub explored: bool,
}

#[derive(Clone, Debug, PartialEq)]
pub struct QTable {
    values: [[f64; M]; N],
    visits: [[u64; M]; N],
    params: PolicyParams,
    selections: u64,
}

impl QTable {
    /// All-zero table: the unconfigured condition.
    pub fn zeros(params: PolicyParams) -> Result<Self> {
        params.validate()?;
        Ok(QTable {
            values: [[0.0; M]; N],
            visits: [[0; M]; N],
            params,
            selections: 0,
        })
    }

    /// Seeds every state reachable under `map`, plus `Uncertain`, with
    /// `q_init` on its ground-truth action.
    pub fn from_ground_truth(map: &GroundTruthMap, params: PolicyParams) -> Result<Self> {
        let mut q = QTable::zeros(params)?;
        let mut states = map.image();
        states.insert(CognitiveState::Uncertain);
        for s in states {
            q.values[s.index()][s.ground_truth_action().index()] = q.params.q_init;
        }
        Ok(q)
    }

    pub fn params(&self) -> &PolicyParams {
        &self.params
    }

    pub fn value(&self, state: CognitiveState, action: Action) -> f64 {
        self.values[state.index()][action.index()]
    }

    pub fn set_value(&mut self, state: CognitiveState, action: Action, value: f64) {
        self.values[state.index()][action.index()] = value;
    }

    pub fn visits(&self, state: CognitiveState, action: Action) -> u64 {
        self.visits[state.index()][action.index()]
    }

    pub fn set_visits(&mut self, state: CognitiveState, action: Action, visits: u64) {
        self.visits[state.index()][action.index()] = visits;
    }

    pub fn row(&self, state: CognitiveState) -> &[f64; M] {
        &self.values[state.index()]
    }

    pub fn total_visits(&self) -> u64 {
        self.visits.iter().flatten().sum()
    }

    pub fn selections(&self) -> u64 {
        self.selections
    }

    /// Current exploration rate: `max(epsilon0 * decay^k, epsilon_min)` after
    /// `k` selections.
    pub fn epsilon(&self) -> f64 {
        let k = i32::try_from(self.selections).unwrap_or(i32::MAX);
        (self.params.epsilon * self.params.epsilon_decay.powi(k)).max(self.params.epsilon_min)
    }

    /// Greedy action with uniform tie-breaking.
    pub fn greedy<R: Rng + ?Sized>(&self, state: CognitiveState, rng: &mut R) -> Action {
        let row = self.row(state);
        let best = row.iter().copied().fold(f64::NEG_INFINITY, f64::max);
        let ties: Vec<Action> = Action::ALL
            .into_iter()
            .filter(|a| row[a.index()] == best)
            .collect();
        *ties.choose(rng).expect("row has at least one maximum")
    }

    pub fn select_action<R: Rng + ?Sized>(
        &mut self,
        state: CognitiveState,
        rng: &mut R,
    ) -> Selection {
        let explore = rng.random::<f64>() < self.epsilon();
        let action = if explore {
            let unvisited: Vec<Action> = Action::ALL
                .into_iter()
                .filter(|a| self.visits(state, *a) == 0)
                .collect();
            let pool = if unvisited.is_empty() {
                &Action::ALL[..]
            } else {
                &unvisited[..]
            };
            *pool.choose(rng).expect("pool is non-empty")
        } else {
            self.greedy(state, rng)
        };
        self.selections += 1;
        Selection {
            action,
            explored: explore,
        }
    }

    /// One-step Q-learning backup.
    pub fn update(
        &mut self,
        state: CognitiveState,
        action: Action,
        reward: f64,
        next: CognitiveState,
    ) -> Result<()> {
        if !reward.is_finite() {
            return Err(Error::NonFiniteReward(reward));
        }
        let next_best = self
            .row(next)
            .iter()
            .copied()
            .fold(f64::NEG_INFINITY, f64::max);
        let cell = &mut self.values[state.index()][action.index()];
        *cell += self.params.alpha * (reward + self.params.gamma * next_best - *cell);
        self.visits[state.index()][action.index()] += 1;
        Ok(())
    }

    /// Writes `state,action,value,visits`, one row per cell.
    pub fn write_snapshot<W: Write>(&self, writer: W) -> Result<()> {
        let mut w = csv::Writer::from_writer(writer);
        w.write_record(["state", "action", "value", "visits"])?;
        for s in CognitiveState::ALL {
            for a in Action::ALL {
                w.write_record([
                    s.to_string(),
                    a.to_string(),
                    self.value(s, a).to_string(),
                    self.visits(s, a).to_string(),
                ])?;
            }
        }
        w.flush()?;
        Ok(())
    }

    /// Loads cell values and visit counts. Cells not listed stay zero.
    pub fn read_snapshot<R: Read>(reader: R, params: PolicyParams) -> Result<Self> {
        #[derive(Deserialize)]
        struct Row {
            state: String,
            action: String,
            value: f64,
            visits: u64,
        }
        let mut q = QTable::zeros(params)?;
        let mut rdr = csv::ReaderBuilder::new()
            .trim(csv::Trim::All)
            .from_reader(reader);
        for row in rdr.deserialize() {
            let row: Row = row?;
            let s: CognitiveState = row.state.parse()?;
            let a: Action = row.action.parse()?;
            if !row.value.is_finite() {
                return Err(Error::Parse(format!("value {}", row.value)));
            }
            q.set_value(s, a, row.value);
            q.set_visits(s, a, row.visits);
        }
        Ok(q)
    }
}
