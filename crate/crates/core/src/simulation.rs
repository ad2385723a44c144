//! Simulated users and Monte-Carlo campaigns.
//!
//! A run plays `horizon` episodes of the learner against one simulated user
//! and tracks the cumulative reward. Its recovery episode `Z` is the first
//! episode at which the cumulative reward is back at or above zero after
//! having dipped below it. A campaign repeats a run with seeds
//! `base_seed + i` and aggregates means and (population) standard
//! deviations. Censored runs, which never recover, count as `Z = horizon`.

use std::collections::BTreeSet;
use std::fmt;
use std::io::Write;
use std::str::FromStr;
use std::sync::Arc;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::partner_model::{
    CapacityClass, GazeClass, ObservationTriple, PartnerModel, PartnerModelConfig, TaskClass,
};
use crate::policy::PolicyParams;
use crate::scoring::{Action, Category, Observation, ScoringTable, Strategy};
use crate::session::{reward, Agent, RewardParams, Session, TaskPerformance};

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum UserType {
    A,
    B,
    C,
    D,
}

impl UserType {
    pub const ALL: [UserType; 4] = [UserType::A, UserType::B, UserType::C, UserType::D];
}

impl fmt::Display for UserType {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{self:?}")
    }
}

impl FromStr for UserType {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim() {
            "A" | "a" => Ok(UserType::A),
            "B" | "b" => Ok(UserType::B),
            "C" | "c" => Ok(UserType::C),
            "D" | "d" => Ok(UserType::D),
            other => Err(Error::Parse(format!("user type `{other}`"))),
        }
    }
}

/// How a simulated user judges an action.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum OutcomeRule {
    /// The user follows the reference configuration, except that an action
    /// containing a negation succeeds only when the user's own negation
    /// column votes for it in every category where that column departs
    /// from the reference.
    #[default]
    NegationRules,
    /// The user succeeds exactly when the action equals the ground truth
    /// of its own table.
    TableTruth,
}

impl FromStr for OutcomeRule {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "negation_rules" => Ok(OutcomeRule::NegationRules),
            "table_truth" => Ok(OutcomeRule::TableTruth),
            other => Err(Error::Parse(format!("outcome rule `{other}`"))),
        }
    }
}

/// Solve times, uniform on `[min, max]` seconds for each dimension.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct TimeDistribution {
    pub min: f64,
    pub max: f64,
}

impl Default for TimeDistribution {
    fn default() -> Self {
        TimeDistribution {
            min: 1.0,
            max: 10.0,
        }
    }
}

impl TimeDistribution {
    pub fn fixed(time: f64) -> Self {
        TimeDistribution {
            min: time,
            max: time,
        }
    }

    fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> f64 {
        let u: f64 = rng.random();
        self.min + (self.max - self.min) * u
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct UserModel {
    pub kind: UserType,
    /// The user's actual preference rubric.
    pub true_table: ScoringTable,
    /// The configuration the user otherwise follows.
    pub reference_table: ScoringTable,
    pub deviation_rate: f64,
    pub times: TimeDistribution,
    pub rule: OutcomeRule,
    perturbed: BTreeSet<Category>,
}

/// Builds user `kind` with a 5% deviation rate and default solve times.
///
/// * A: the shipped table.
/// * B: negation capacity rows inverted.
/// * C: B plus every negation task row inverted.
/// * D: C plus every negation gaze row inverted.
pub fn make_user(kind: UserType) -> UserModel {
    let reference = ScoringTable::default();
    let neg = Strategy::negation();
    let mut inverted: Vec<Observation> = Vec::new();
    if kind >= UserType::B {
        inverted.extend(CapacityClass::ALL.iter().map(|c| Observation::Capacity(*c)));
    }
    if kind >= UserType::C {
        inverted.extend(TaskClass::ALL.iter().map(|t| Observation::Task(*t)));
    }
    if kind >= UserType::D {
        inverted.extend(GazeClass::ALL.iter().map(|g| Observation::Gaze(*g)));
    }
    let mut table = reference.clone();
    for obs in inverted {
        let v = reference.entry(&neg, obs).expect("negation column");
        table = table.with_entry(&neg, obs, 1.0 - v).expect("0/1 entries");
    }
    UserModel::new(kind, table, reference).expect("built-in users are valid")
}

impl UserModel {
    pub fn new(
        kind: UserType,
        true_table: ScoringTable,
        reference_table: ScoringTable,
    ) -> Result<Self> {
        let neg = Strategy::negation();
        let mut perturbed = BTreeSet::new();
        for obs in Observation::ALL {
            if true_table.entry(&neg, obs)? != reference_table.entry(&neg, obs)? {
                perturbed.insert(obs.category());
            }
        }
        Ok(UserModel {
            kind,
            true_table,
            reference_table,
            deviation_rate: 0.05,
            times: TimeDistribution::default(),
            rule: OutcomeRule::default(),
            perturbed,
        })
    }

    pub fn with_deviation(mut self, rate: f64) -> Result<Self> {
        if !(0.0..=1.0).contains(&rate) {
            return Err(Error::InvalidConfig(format!("deviation rate {rate}")));
        }
        self.deviation_rate = rate;
        Ok(self)
    }

    pub fn with_times(mut self, times: TimeDistribution) -> Result<Self> {
        if !(times.min.is_finite()
            && times.max.is_finite()
            && 0.0 <= times.min
            && times.min <= times.max)
        {
            return Err(Error::InvalidConfig(format!(
                "time range [{}, {}]",
                times.min, times.max
            )));
        }
        self.times = times;
        Ok(self)
    }

    pub fn with_rule(mut self, rule: OutcomeRule) -> Self {
        self.rule = rule;
        self
    }

    /// Categories in which the user's negation column departs from the
    /// reference.
    pub fn perturbed_categories(&self) -> &BTreeSet<Category> {
        &self.perturbed
    }

    /// The action this user's own table prescribes for `triple`.
    pub fn ground_truth_action(&self, triple: ObservationTriple) -> Action {
        self.true_table.reduce(triple).ground_truth_action()
    }

    /// Whether the user does well with `action`, before deviation noise.
    pub fn performs_well(&self, triple: ObservationTriple, action: Action) -> bool {
        match self.rule {
            OutcomeRule::TableTruth => action == self.ground_truth_action(triple),
            OutcomeRule::NegationRules => {
                if action.negation.uses_negation() && !self.perturbed.is_empty() {
                    let neg = Strategy::negation();
                    triple
                        .observations()
                        .into_iter()
                        .filter(|o| self.perturbed.contains(&o.category()))
                        .all(|o| self.true_table.entry(&neg, o).expect("negation column") >= 0.5)
                } else {
                    action == self.reference_table.reduce(triple).ground_truth_action()
                }
            }
        }
    }

    /// Both dimensions succeed or fail together; the judgement is flipped
    /// with probability `deviation_rate`.
    pub fn simulate_outcome<R: Rng + ?Sized>(
        &self,
        triple: ObservationTriple,
        action: Action,
        rng: &mut R,
    ) -> TaskPerformance {
        let mut ok = self.performs_well(triple, action);
        if rng.random::<f64>() < self.deviation_rate {
            ok = !ok;
        }
        let t_comprehension = self.times.sample(rng);
        let t_enabledness = self.times.sample(rng);
        TaskPerformance::both(ok, t_comprehension, t_enabledness)
    }
}

/// Gaze and task scripting for runs that drive the full partner model.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct DynamicParams {
    pub fixations_per_episode: usize,
    /// Probability that a fixation stays on the previous target.
    pub stay_probability: f64,
    /// Episodes cycle through this many task ids.
    pub tasks: usize,
}

impl Default for DynamicParams {
    fn default() -> Self {
        DynamicParams {
            fixations_per_episode: 3,
            stay_probability: 0.7,
            tasks: 5,
        }
    }
}

/// Where each episode's observation triple comes from.
#[derive(Clone, Copy, Debug, Default, PartialEq, Serialize, Deserialize)]
pub enum TripleSampling {
    /// Uniform over all 30 triples, independently per episode.
    #[default]
    Uniform,
    /// Classified from a partner model fed with scripted gaze events and the
    /// user's own task outcomes.
    Dynamic(DynamicParams),
}

#[derive(Clone, Debug)]
pub struct RunConfig {
    pub policy: PolicyParams,
    pub preconfigured: bool,
    pub horizon: usize,
    pub sampling: TripleSampling,
    pub reward: RewardParams,
    pub partner: PartnerModelConfig,
    /// The agent's own scoring table (state reduction and prior).
    pub agent_table: Arc<ScoringTable>,
}

impl Default for RunConfig {
    fn default() -> Self {
        RunConfig {
            policy: PolicyParams::default(),
            preconfigured: true,
            horizon: 100,
            sampling: TripleSampling::Uniform,
            reward: RewardParams::default(),
            partner: PartnerModelConfig::default(),
            agent_table: Arc::new(ScoringTable::default()),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub enum Recovery {
    /// The cumulative reward never dipped below zero (`Z = 0`).
    NeverNegative,
    /// 1-based episode at which it climbed back to zero or above.
    At(usize),
    /// Dipped below zero and never came back within the horizon.
    Censored,
}

impl Recovery {
    /// `Z` with censored runs counted at `horizon`.
    pub fn z(self, horizon: usize) -> usize {
        match self {
            Recovery::NeverNegative => 0,
            Recovery::At(t) => t,
            Recovery::Censored => horizon,
        }
    }

    pub fn is_censored(self) -> bool {
        self == Recovery::Censored
    }
}

pub fn recovery_episode(series: &[f64]) -> Recovery {
    let mut dipped = false;
    for (i, &v) in series.iter().enumerate() {
        if v < 0.0 {
            dipped = true;
        } else if dipped {
            return Recovery::At(i + 1);
        }
    }
    if dipped {
        Recovery::Censored
    } else {
        Recovery::NeverNegative
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct RunMetrics {
    pub seed: u64,
    pub recovery: Recovery,
    pub final_cumulative_reward: f64,
    /// Cumulative reward after each episode.
    pub series: Vec<f64>,
}

impl RunMetrics {
    pub fn z(&self) -> usize {
        self.recovery.z(self.series.len())
    }
}

fn environment_rng(seed: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(1);
    rng
}

/// One seeded run. The agent's selections and the environment draw from
/// separate streams of the same seed.
pub fn run(user: &UserModel, cfg: &RunConfig, seed: u64) -> Result<RunMetrics> {
    if cfg.horizon == 0 {
        return Err(Error::InvalidConfig("horizon must be at least 1".into()));
    }
    let agent = Agent::with_prior(
        Arc::clone(&cfg.agent_table),
        cfg.policy.clone(),
        cfg.preconfigured,
        seed,
    )?;
    let mut env = environment_rng(seed);
    let series = match cfg.sampling {
        TripleSampling::Uniform => run_uniform(user, cfg, agent, &mut env)?,
        TripleSampling::Dynamic(dynamic) => run_dynamic(user, cfg, dynamic, agent, &mut env)?,
    };
    Ok(RunMetrics {
        seed,
        recovery: recovery_episode(&series),
        final_cumulative_reward: *series.last().expect("horizon >= 1"),
        series,
    })
}

fn sample_triple<R: Rng + ?Sized>(rng: &mut R) -> ObservationTriple {
    ObservationTriple::from_index(rng.random_range(0..ObservationTriple::COUNT))
}

fn run_uniform(
    user: &UserModel,
    cfg: &RunConfig,
    mut agent: Agent,
    env: &mut ChaCha8Rng,
) -> Result<Vec<f64>> {
    cfg.reward.validate()?;
    let mut series = Vec::with_capacity(cfg.horizon);
    let mut cumulative = 0.0;
    let mut triple = sample_triple(env);
    for _ in 0..cfg.horizon {
        let decision = agent.decide(triple);
        let tp = user.simulate_outcome(triple, decision.action, env);
        let r = reward(&tp, &cfg.reward)?;
        let next = sample_triple(env);
        agent.learn(&decision, r, next)?;
        cumulative += r;
        series.push(cumulative);
        triple = next;
    }
    Ok(series)
}

fn run_dynamic(
    user: &UserModel,
    cfg: &RunConfig,
    dynamic: DynamicParams,
    agent: Agent,
    env: &mut ChaCha8Rng,
) -> Result<Vec<f64>> {
    let partner = PartnerModel::new(cfg.partner.clone())?;
    let targets = partner.targets();
    let mut session = Session::new(partner, agent, cfg.reward.clone())?;
    let tasks = dynamic.tasks.max(1);
    let mut gaze = Vec::with_capacity(dynamic.fixations_per_episode);
    let mut last: Option<usize> = None;
    for episode in 0..cfg.horizon {
        gaze.clear();
        for _ in 0..dynamic.fixations_per_episode {
            let stay = env.random::<f64>() < dynamic.stay_probability;
            let target = match (stay, last) {
                (true, Some(t)) => t,
                _ => env.random_range(0..targets),
            };
            last = Some(target);
            gaze.push(target as i64);
        }
        let task = format!("task-{}", episode % tasks);
        session.step(&gaze, &task, |d| {
            user.simulate_outcome(d.triple, d.action, env)
        })?;
    }
    Ok(session.log().cumulative_series())
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub enum Execution {
    Serial,
    #[default]
    Parallel,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct CampaignSummary {
    pub runs: usize,
    pub horizon: usize,
    pub z_mean: f64,
    pub z_sd: f64,
    pub r_mean: f64,
    pub r_sd: f64,
    /// Fraction of runs that dipped below zero and never recovered.
    pub non_recovery_rate: f64,
    /// Fraction of runs with `Z < horizon`.
    pub recovered_rate: f64,
}

fn mean_sd(values: impl Iterator<Item = f64> + Clone) -> (f64, f64) {
    let n = values.clone().count() as f64;
    let mean = values.clone().sum::<f64>() / n;
    let var = values.map(|v| (v - mean).powi(2)).sum::<f64>() / n;
    (mean, var.sqrt())
}

#[derive(Clone, Debug, PartialEq)]
pub struct Campaign {
    pub user: UserType,
    pub runs: Vec<RunMetrics>,
    pub summary: CampaignSummary,
}

/// Runs `runs` independent seeds and aggregates them in seed order, so the
/// result does not depend on `exec`.
pub fn campaign(
    user: &UserModel,
    cfg: &RunConfig,
    runs: usize,
    base_seed: u64,
    exec: Execution,
) -> Result<Campaign> {
    if runs == 0 {
        return Err(Error::InvalidConfig("runs must be at least 1".into()));
    }
    let seeds: Vec<u64> = (0..runs as u64)
        .map(|i| base_seed.wrapping_add(i))
        .collect();
    let results: Vec<RunMetrics> = match exec {
        Execution::Serial => seeds
            .iter()
            .map(|s| run(user, cfg, *s))
            .collect::<Result<_>>()?,
        Execution::Parallel => seeds
            .par_iter()
            .map(|s| run(user, cfg, *s))
            .collect::<Result<_>>()?,
    };
    let horizon = cfg.horizon;
    let (z_mean, z_sd) = mean_sd(results.iter().map(|r| r.z() as f64));
    let (r_mean, r_sd) = mean_sd(results.iter().map(|r| r.final_cumulative_reward));
    let n = results.len() as f64;
    let summary = CampaignSummary {
        runs,
        horizon,
        z_mean,
        z_sd,
        r_mean,
        r_sd,
        non_recovery_rate: results.iter().filter(|r| r.recovery.is_censored()).count() as f64 / n,
        recovered_rate: results.iter().filter(|r| r.z() < horizon).count() as f64 / n,
    };
    Ok(Campaign {
        user: user.kind,
        runs: results,
        summary,
    })
}

impl Campaign {
    /// Per-episode mean and sd of the cumulative reward across runs.
    pub fn mean_series(&self) -> Vec<(f64, f64)> {
        let horizon = self.summary.horizon;
        (0..horizon)
            .map(|t| mean_sd(self.runs.iter().map(move |r| r.series[t])))
            .collect()
    }

    /// One row per run followed by a `summary` row.
    ///
    /// Columns: `seed,z,censored,final_cumulative_reward,z_sd,final_cumulative_reward_sd`.
    /// In the summary row `z` is the mean, `censored` the non-recovery rate
    /// and the reward column the mean; the sd columns are only filled there.
    pub fn write_runs_csv<W: Write>(&self, writer: W) -> Result<()> {
        let mut w = csv::Writer::from_writer(writer);
        w.write_record([
            "seed",
            "z",
            "censored",
            "final_cumulative_reward",
            "z_sd",
            "final_cumulative_reward_sd",
        ])?;
        for r in &self.runs {
            w.write_record([
                r.seed.to_string(),
                r.z().to_string(),
                r.recovery.is_censored().to_string(),
                r.final_cumulative_reward.to_string(),
                String::new(),
                String::new(),
            ])?;
        }
        let s = &self.summary;
        w.write_record([
            "summary".to_string(),
            s.z_mean.to_string(),
            s.non_recovery_rate.to_string(),
            s.r_mean.to_string(),
            s.z_sd.to_string(),
            s.r_sd.to_string(),
        ])?;
        w.flush()?;
        Ok(())
    }

    /// `episode,mean_cumulative_reward,sd`.
    pub fn write_series_csv<W: Write>(&self, writer: W) -> Result<()> {
        let mut w = csv::Writer::from_writer(writer);
        w.write_record(["episode", "mean_cumulative_reward", "sd"])?;
        for (i, (m, sd)) in self.mean_series().into_iter().enumerate() {
            w.write_record([(i + 1).to_string(), m.to_string(), sd.to_string()])?;
        }
        w.flush()?;
        Ok(())
    }
}

/// One hyperparameter setting of the parameter search.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct SweepPoint {
    pub preconfigured: bool,
    pub alpha: f64,
    pub gamma: f64,
    pub epsilon: f64,
}

/// The twelve settings of the parameter search, unconfigured before
/// preconfigured for each (alpha, gamma).
pub fn parameter_grid() -> Vec<SweepPoint> {
    let mut grid = Vec::with_capacity(12);
    for alpha in [0.25, 0.50] {
        for gamma in [0.00, 0.50, 0.95] {
            for preconfigured in [false, true] {
                grid.push(SweepPoint {
                    preconfigured,
                    alpha,
                    gamma,
                    epsilon: 0.75,
                });
            }
        }
    }
    grid
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct SweepRow {
    pub point: SweepPoint,
    pub summary: CampaignSummary,
}

/// Runs a campaign for every grid point with the same base seed.
pub fn sweep(
    user: &UserModel,
    base: &RunConfig,
    grid: &[SweepPoint],
    runs: usize,
    base_seed: u64,
    exec: Execution,
) -> Result<Vec<SweepRow>> {
    grid.iter()
        .map(|point| {
            let cfg = RunConfig {
                policy: PolicyParams {
                    alpha: point.alpha,
                    gamma: point.gamma,
                    epsilon: point.epsilon,
                    ..base.policy.clone()
                },
                preconfigured: point.preconfigured,
                ..base.clone()
            };
            let c = campaign(user, &cfg, runs, base_seed, exec)?;
            Ok(SweepRow {
                point: *point,
                summary: c.summary,
            })
        })
        .collect()
}

/// `H_S,alpha,gamma,epsilon,Z_m,Z_sd,R_m,R_sd` with `T`/`F` for `H_S`.
pub fn write_sweep_csv<W: Write>(rows: &[SweepRow], writer: W) -> Result<()> {
    let mut w = csv::Writer::from_writer(writer);
    w.write_record([
        "H_S", "alpha", "gamma", "epsilon", "Z_m", "Z_sd", "R_m", "R_sd",
    ])?;
    for row in rows {
        let p = &row.point;
        let s = &row.summary;
        w.write_record([
            if p.preconfigured { "T" } else { "F" }.to_string(),
            format!("{:.2}", p.alpha),
            format!("{:.2}", p.gamma),
            format!("{:.2}", p.epsilon),
            format!("{:.4}", s.z_mean),
            format!("{:.4}", s.z_sd),
            format!("{:.4}", s.r_mean),
            format!("{:.4}", s.r_sd),
        ])?;
    }
    w.flush()?;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::scoring::CognitiveState;
    use CapacityClass::*;
    use GazeClass::*;
    use TaskClass::*;

    fn t(c: CapacityClass, g: GazeClass, k: TaskClass) -> ObservationTriple {
        ObservationTriple::new(c, g, k)
    }

    #[test]
    fn perturbation_nesting() {
        let a = make_user(UserType::A);
        let expected = [(UserType::B, 2), (UserType::C, 7), (UserType::D, 10)];
        for (kind, n) in expected {
            let u = make_user(kind);
            assert_eq!(u.true_table.differing_entries(&a.true_table), n, "{kind}");
            for obs in Observation::ALL {
                assert_eq!(
                    u.true_table.entry(&Strategy::hesitation(), obs).unwrap(),
                    a.true_table.entry(&Strategy::hesitation(), obs).unwrap()
                );
            }
        }
        assert!(a.perturbed_categories().is_empty());
        assert_eq!(make_user(UserType::D).perturbed_categories().len(), 3);
    }

    #[test]
    fn make_user_examples() {
        let a = make_user(UserType::A);
        assert_eq!(
            a.ground_truth_action(t(High, Focused, Success)),
            CognitiveState::EngagedMisinterpreter.ground_truth_action()
        );

        let neg = Strategy::negation();
        let tr = t(Low, Focused, Success);
        let before = a.true_table.scaffolding_score(tr, &neg).unwrap();
        let after = make_user(UserType::B)
            .true_table
            .scaffolding_score(tr, &neg)
            .unwrap();
        assert!((before - 1.0 / 3.0).abs() < 1e-12);
        assert!((after - 2.0 / 3.0).abs() < 1e-12);

        let tr = t(High, Distracted, MiscEnabledness);
        assert_eq!(a.true_table.scaffolding_score(tr, &neg).unwrap(), 1.0);
        assert_eq!(
            make_user(UserType::D)
                .true_table
                .scaffolding_score(tr, &neg)
                .unwrap(),
            0.0
        );
        assert!("E".parse::<UserType>().is_err());
    }

    #[test]
    fn outcome_follows_ground_truth_without_noise() {
        let user = make_user(UserType::A).with_deviation(0.0).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        for tr in ObservationTriple::all() {
            let truth = user.ground_truth_action(tr);
            let ok = user.simulate_outcome(tr, truth, &mut rng);
            assert!(ok.comprehension.success && ok.enabledness.success);
            for a in Action::ALL.into_iter().filter(|a| *a != truth) {
                let bad = user.simulate_outcome(tr, a, &mut rng);
                assert!(!bad.comprehension.success && !bad.enabledness.success);
            }
        }
    }

    #[test]
    fn negation_rules_for_user_b() {
        let b = make_user(UserType::B);
        let negation = Action::ALL[4];
        let neg_aff_hes = Action::ALL[3];
        assert!(b.performs_well(t(Low, Focused, Failure), negation));
        assert!(b.performs_well(t(Low, Distracted, Success), neg_aff_hes));
        assert!(!b.performs_well(t(High, Distracted, Success), negation));
        // affirmations follow the reference configuration
        let observer = CognitiveState::EngagedObserver.ground_truth_action();
        assert!(b.performs_well(t(High, Focused, Unknown), observer));
        assert!(!b.performs_well(t(High, Focused, Success), observer));

        let d = make_user(UserType::D);
        assert!(d.performs_well(t(Low, Focused, Failure), negation));
        assert!(!d.performs_well(t(Low, Uncertain, Failure), negation));
        assert!(!d.performs_well(t(Low, Focused, MiscEnabledness), negation));
    }

    #[test]
    fn table_truth_rule() {
        let b = make_user(UserType::B).with_rule(OutcomeRule::TableTruth);
        for tr in ObservationTriple::all() {
            assert!(b.performs_well(tr, b.ground_truth_action(tr)));
        }
    }

    #[test]
    fn recovery_examples() {
        assert_eq!(recovery_episode(&[-1.0, -0.5, 0.2, 0.4]), Recovery::At(3));
        assert_eq!(recovery_episode(&[0.5, 1.0, 1.5]), Recovery::NeverNegative);
        assert_eq!(recovery_episode(&[-1.0, -2.0, -3.0]), Recovery::Censored);
        assert_eq!(recovery_episode(&[0.0, -0.1, 0.0]), Recovery::At(3));
        assert_eq!(Recovery::Censored.z(100), 100);
        assert_eq!(Recovery::NeverNegative.z(100), 0);
    }

    #[test]
    fn greedy_preconfigured_run_against_user_a_is_perfect() {
        let user = make_user(UserType::A)
            .with_deviation(0.0)
            .unwrap()
            .with_times(TimeDistribution::fixed(0.0))
            .unwrap();
        let cfg = RunConfig {
            policy: PolicyParams {
                epsilon: 0.0,
                epsilon_min: 0.0,
                ..PolicyParams::default()
            },
            ..RunConfig::default()
        };
        let m = run(&user, &cfg, 9).unwrap();
        assert_eq!(m.final_cumulative_reward, 100.0);
        assert_eq!(m.recovery, Recovery::NeverNegative);

        let unconfigured = RunConfig {
            preconfigured: false,
            ..cfg
        };
        let m = run(&user, &unconfigured, 9).unwrap();
        assert!(m.final_cumulative_reward < 100.0);
    }

    #[test]
    fn runs_are_seed_deterministic() {
        let user = make_user(UserType::C);
        let cfg = RunConfig::default();
        assert_eq!(run(&user, &cfg, 5).unwrap(), run(&user, &cfg, 5).unwrap());
        assert_ne!(run(&user, &cfg, 5).unwrap(), run(&user, &cfg, 6).unwrap());
        let dynamic = RunConfig {
            sampling: TripleSampling::Dynamic(DynamicParams::default()),
            ..RunConfig::default()
        };
        let a = run(&user, &dynamic, 5).unwrap();
        assert_eq!(a, run(&user, &dynamic, 5).unwrap());
        assert_eq!(a.series.len(), 100);
    }

    #[test]
    fn single_run_campaign_has_zero_sd() {
        let user = make_user(UserType::A);
        let c = campaign(&user, &RunConfig::default(), 1, 3, Execution::Serial).unwrap();
        assert_eq!(c.summary.z_sd, 0.0);
        assert_eq!(c.summary.r_sd, 0.0);
        assert!(campaign(&user, &RunConfig::default(), 0, 3, Execution::Serial).is_err());
    }

    #[test]
    fn zero_horizon_rejected() {
        let cfg = RunConfig {
            horizon: 0,
            ..RunConfig::default()
        };
        assert!(run(&make_user(UserType::A), &cfg, 0).is_err());
    }

    #[test]
    fn grid_matches_table_layout() {
        let g = parameter_grid();
        assert_eq!(g.len(), 12);
        assert!(!g[0].preconfigured && g[1].preconfigured);
        assert_eq!((g[4].alpha, g[4].gamma), (0.25, 0.95));
        assert_eq!((g[11].alpha, g[11].gamma), (0.50, 0.95));
    }
}
