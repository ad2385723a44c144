//! One explain-act-reward cycle per episode.
//!
//! Within a step: ingest gaze, classify and reduce, select an action, drain
//! or recover capacity for that action, receive task performance, record
//! task awareness, compute the reward, then back up the Q-value using the
//! freshly re-classified state as the successor.

use std::io::Write;
use std::sync::Arc;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::partner_model::{ObservationTriple, PartnerModel, PartnerModelConfig};
use crate::policy::{PolicyParams, QTable};
use crate::scoring::{Action, CognitiveState, ScoringTable};

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RewardParams {
    /// Slope of the exponential time penalty.
    pub k: f64,
    /// Positive reward factor.
    pub lambda: f64,
}

impl Default for RewardParams {
    fn default() -> Self {
        RewardParams {
            k: 0.1,
            lambda: 1.0,
        }
    }
}

impl RewardParams {
    pub fn validate(&self) -> Result<()> {
        if !(self.k.is_finite() && self.k >= 0.0) {
            return Err(Error::InvalidConfig(
                "reward: k must be non-negative".into(),
            ));
        }
        if !(self.lambda.is_finite() && self.lambda > 0.0) {
            return Err(Error::InvalidConfig(
                "reward: lambda must be positive".into(),
            ));
        }
        Ok(())
    }
}

/// Signed, time-discounted score for one understanding dimension.
pub fn tp_score(success: bool, time: f64, k: f64) -> Result<f64> {
    if !(time.is_finite() && time >= 0.0) {
        return Err(Error::InvalidTime(time));
    }
    let sign = if success { 1.0 } else { -1.0 };
    Ok(sign * (-k * time).exp())
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DimensionOutcome {
    pub success: bool,
    /// Seconds taken.
    pub time: f64,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct TaskPerformance {
    pub comprehension: DimensionOutcome,
    pub enabledness: DimensionOutcome,
}

impl TaskPerformance {
    pub fn both(success: bool, comprehension_time: f64, enabledness_time: f64) -> Self {
        TaskPerformance {
            comprehension: DimensionOutcome {
                success,
                time: comprehension_time,
            },
            enabledness: DimensionOutcome {
                success,
                time: enabledness_time,
            },
        }
    }
}

/// Mean of the two dimension scores, scaled by `lambda`.
pub fn reward(tp: &TaskPerformance, params: &RewardParams) -> Result<f64> {
    let c = tp_score(tp.comprehension.success, tp.comprehension.time, params.k)?;
    let e = tp_score(tp.enabledness.success, tp.enabledness.time, params.k)?;
    Ok(params.lambda * (c + e) / 2.0)
}

/// What the agent decided for one observation.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct Decision {
    pub triple: ObservationTriple,
    pub state: CognitiveState,
    pub action: Action,
    pub explored: bool,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct EpisodeRecord {
    /// 1-based.
    pub episode: usize,
    pub triple: ObservationTriple,
    pub state: CognitiveState,
    pub action: Action,
    pub reward: f64,
    pub cumulative_reward: f64,
    /// No task performance arrived; the Q-table was left untouched.
    pub timed_out: bool,
}

#[derive(Clone, Debug, Default, PartialEq)]
pub struct EpisodeLog {
    records: Vec<EpisodeRecord>,
}

impl EpisodeLog {
    pub fn push(&mut self, decision: &Decision, reward: f64, timed_out: bool) -> &EpisodeRecord {
        let cumulative_reward = self.cumulative_reward() + reward;
        self.records.push(EpisodeRecord {
            episode: self.records.len() + 1,
            triple: decision.triple,
            state: decision.state,
            action: decision.action,
            reward,
            cumulative_reward,
            timed_out,
        });
        self.records.last().expect("just pushed")
    }

    pub fn cumulative_reward(&self) -> f64 {
        self.records.last().map_or(0.0, |r| r.cumulative_reward)
    }

    pub fn records(&self) -> &[EpisodeRecord] {
        &self.records
    }

    pub fn len(&self) -> usize {
        self.records.len()
    }

    pub fn is_empty(&self) -> bool {
        self.records.is_empty()
    }

    pub fn cumulative_series(&self) -> Vec<f64> {
        self.records.iter().map(|r| r.cumulative_reward).collect()
    }

    pub fn write_csv<W: Write>(&self, writer: W) -> Result<()> {
        let mut w = csv::Writer::from_writer(writer);
        w.write_record([
            "episode",
            "capacity_class",
            "gaze_class",
            "task_class",
            "cognitive_state",
            "negation_type",
            "hesitation_type",
            "reward",
            "cumulative_reward",
        ])?;
        for r in &self.records {
            let [c, g, t] = r.triple.labels();
            w.write_record([
                r.episode.to_string().as_str(),
                c,
                g,
                t,
                r.state.as_str(),
                r.action.negation.as_str(),
                r.action.hesitation.as_str(),
                r.reward.to_string().as_str(),
                r.cumulative_reward.to_string().as_str(),
            ])?;
        }
        w.flush()?;
        Ok(())
    }
}

/// Scoring table, Q-table and the random source that drives selection.
#[derive(Clone, Debug)]
pub struct Agent {
    table: Arc<ScoringTable>,
    q: QTable,
    rng: ChaCha8Rng,
}

impl Agent {
    pub fn new(table: Arc<ScoringTable>, q: QTable, seed: u64) -> Self {
        Agent {
            table,
            q,
            rng: ChaCha8Rng::seed_from_u64(seed),
        }
    }

    /// Q-table seeded from `table` when `preconfigured`, all zeros otherwise.
    pub fn with_prior(
        table: Arc<ScoringTable>,
        params: PolicyParams,
        preconfigured: bool,
        seed: u64,
    ) -> Result<Self> {
        let q = if preconfigured {
            QTable::from_ground_truth(&table.ground_truth_map(), params)?
        } else {
            QTable::zeros(params)?
        };
        Ok(Agent::new(table, q, seed))
    }

    pub fn table(&self) -> &ScoringTable {
        &self.table
    }

    pub fn q_table(&self) -> &QTable {
        &self.q
    }

    pub fn decide(&mut self, triple: ObservationTriple) -> Decision {
        let state = self.table.reduce(triple);
        let sel = self.q.select_action(state, &mut self.rng);
        Decision {
            triple,
            state,
            action: sel.action,
            explored: sel.explored,
        }
    }

    pub fn learn(
        &mut self,
        decision: &Decision,
        reward: f64,
        next: ObservationTriple,
    ) -> Result<()> {
        let next_state = self.table.reduce(next);
        self.q
            .update(decision.state, decision.action, reward, next_state)
    }
}

#[derive(Clone, Debug)]
struct Pending {
    decision: Decision,
    task: String,
}

/// A single partner's sequential state machine.
#[derive(Clone, Debug)]
pub struct Session {
    partner: PartnerModel,
    agent: Agent,
    reward: RewardParams,
    log: EpisodeLog,
    pending: Option<Pending>,
}

impl Session {
    pub fn new(partner: PartnerModel, agent: Agent, reward: RewardParams) -> Result<Self> {
        reward.validate()?;
        Ok(Session {
            partner,
            agent,
            reward,
            log: EpisodeLog::default(),
            pending: None,
        })
    }

    /// Default partner model, table-seeded Q-table.
    pub fn with_defaults(
        partner: PartnerModelConfig,
        table: Arc<ScoringTable>,
        policy: PolicyParams,
        reward: RewardParams,
        seed: u64,
    ) -> Result<Self> {
        Session::new(
            PartnerModel::new(partner)?,
            Agent::with_prior(table, policy, true, seed)?,
            reward,
        )
    }

    pub fn partner(&self) -> &PartnerModel {
        &self.partner
    }

    pub fn agent(&self) -> &Agent {
        &self.agent
    }

    pub fn log(&self) -> &EpisodeLog {
        &self.log
    }

    pub fn has_pending(&self) -> bool {
        self.pending.is_some()
    }

    pub fn ingest_gaze(&mut self, target: i64) -> Result<()> {
        self.partner.fixate(target)
    }

    /// Classify, reduce and pick an action for `task`. The action's capacity
    /// effect is applied immediately.
    pub fn query(&mut self, task: &str) -> Result<Decision> {
        if self.pending.is_some() {
            return Err(Error::QueryPending);
        }
        let triple = self.partner.classify(task);
        let decision = self.agent.decide(triple);
        self.partner.apply_action(decision.action);
        self.pending = Some(Pending {
            decision,
            task: task.to_string(),
        });
        Ok(decision)
    }

    /// Closes the pending episode with the partner's task performance.
    pub fn complete(&mut self, task: Option<&str>, tp: &TaskPerformance) -> Result<EpisodeRecord> {
        let pending = self.pending.as_ref().ok_or(Error::NoPendingQuery)?;
        if let Some(task) = task {
            if task != pending.task {
                return Err(Error::TaskMismatch {
                    expected: pending.task.clone(),
                    got: task.to_string(),
                });
            }
        }
        let r = reward(tp, &self.reward)?;
        let pending = self.pending.take().expect("checked above");
        self.partner.record_task(
            &pending.task,
            tp.comprehension.success,
            tp.enabledness.success,
        );
        let next = self.partner.classify(&pending.task);
        self.agent.learn(&pending.decision, r, next)?;
        Ok(self.log.push(&pending.decision, r, false).clone())
    }

    /// Drops the pending query without learning from it.
    pub fn expire_pending(&mut self) -> Option<EpisodeRecord> {
        let pending = self.pending.take()?;
        Some(self.log.push(&pending.decision, 0.0, true).clone())
    }

    /// Runs a full episode against an environment callback.
    pub fn step<F>(&mut self, gaze: &[i64], task: &str, environment: F) -> Result<EpisodeRecord>
    where
        F: FnOnce(&Decision) -> TaskPerformance,
    {
        if let Some(&bad) = gaze
            .iter()
            .find(|t| usize::try_from(**t).map_or(true, |t| t >= self.partner.targets()))
        {
            return Err(Error::TargetOutOfRange {
                target: bad,
                targets: self.partner.targets(),
            });
        }
        for &target in gaze {
            self.ingest_gaze(target)?;
        }
        let decision = self.query(task)?;
        let tp = environment(&decision);
        self.complete(None, &tp)
    }
}
