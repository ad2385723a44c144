//! Scoring table, action space and the reduction of observation triples to
//! cognitive states.
//!
//! Each observation value (two capacity classes, three gaze classes, five
//! task-awareness classes) votes for or against every scaffolding strategy.
//! A strategy's score for a triple is the weighted fraction of its three
//! observation values that vote for it:
//!
//! ```text
//! score(strategy) = weight(strategy) * sum(entries for the triple) / max(strategy)
//! ```
//!
//! The negation and hesitation scores are then binned into a negation type
//! and a hesitation type, which together name one of the six cognitive states.

use std::collections::BTreeSet;
use std::fmt;
use std::io::{Read, Write};
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::partner_model::{CapacityClass, GazeClass, ObservationTriple, TaskClass};

/// The default scoring table: rows are observation values, columns are strategies.
pub const DEFAULT_TABLE_CSV: &str = include_str!("../data/default_scoring_table.csv");

/// Comparison slack for bin thresholds; entries may be re-weighted at runtime.
const BIN_EPS: f64 = 1e-9;

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum NegationType {
    Affirmation,
    NegationAffirmation,
    Negation,
}

impl NegationType {
    pub const ALL: [NegationType; 3] = [
        NegationType::Affirmation,
        NegationType::NegationAffirmation,
        NegationType::Negation,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            NegationType::Affirmation => "affirmation",
            NegationType::NegationAffirmation => "negation_affirmation",
            NegationType::Negation => "negation",
        }
    }

    /// True when the utterance contains a negation at all.
    pub fn uses_negation(self) -> bool {
        self != NegationType::Affirmation
    }
}

impl fmt::Display for NegationType {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for NegationType {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        NegationType::ALL
            .into_iter()
            .find(|n| n.as_str() == s)
            .ok_or_else(|| Error::Parse(s.to_string()))
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum HesitationType {
    None,
    Hesitation,
}

impl HesitationType {
    pub const ALL: [HesitationType; 2] = [HesitationType::None, HesitationType::Hesitation];

    pub fn as_str(self) -> &'static str {
        match self {
            HesitationType::None => "none",
            HesitationType::Hesitation => "hesitation",
        }
    }
}

impl fmt::Display for HesitationType {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for HesitationType {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        HesitationType::ALL
            .into_iter()
            .find(|h| h.as_str() == s)
            .ok_or_else(|| Error::Parse(s.to_string()))
    }
}

/// A scaffolding action: one negation type combined with one hesitation type.
///
/// Textual form is `negation_type/hesitation_type`, e.g. `negation/none`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(into = "String", try_from = "String")]
pub struct Action {
    pub negation: NegationType,
    pub hesitation: HesitationType,
}

impl Action {
    pub const COUNT: usize = 6;

    /// All actions in index order.
    pub const ALL: [Action; 6] = [
        Action::new(NegationType::Affirmation, HesitationType::None),
        Action::new(NegationType::Affirmation, HesitationType::Hesitation),
        Action::new(NegationType::NegationAffirmation, HesitationType::None),
        Action::new(
            NegationType::NegationAffirmation,
            HesitationType::Hesitation,
        ),
        Action::new(NegationType::Negation, HesitationType::None),
        Action::new(NegationType::Negation, HesitationType::Hesitation),
    ];

    pub const fn new(negation: NegationType, hesitation: HesitationType) -> Self {
        Action {
            negation,
            hesitation,
        }
    }

    pub fn index(self) -> usize {
        self.negation as usize * 2 + self.hesitation as usize
    }

    pub fn from_index(index: usize) -> Option<Action> {
        Action::ALL.get(index).copied()
    }
}

impl fmt::Display for Action {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}/{}", self.negation, self.hesitation)
    }
}

impl FromStr for Action {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let (neg, hes) = s
            .split_once('/')
            .ok_or_else(|| Error::Parse(s.to_string()))?;
        Ok(Action::new(neg.trim().parse()?, hes.trim().parse()?))
    }
}

impl From<Action> for String {
    fn from(a: Action) -> String {
        a.to_string()
    }
}

impl TryFrom<String> for Action {
    type Error = Error;

    fn try_from(s: String) -> Result<Self> {
        s.parse()
    }
}

/// The six reduced partner states. Each has exactly one ground-truth action.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum CognitiveState {
    EngagedObserver,
    EngagedMisinterpreter,
    DistractedMisinterpreter,
    OverwhelmedStruggler,
    Unfocused,
    Uncertain,
}

impl CognitiveState {
    pub const COUNT: usize = 6;

    pub const ALL: [CognitiveState; 6] = [
        CognitiveState::EngagedObserver,
        CognitiveState::EngagedMisinterpreter,
        CognitiveState::DistractedMisinterpreter,
        CognitiveState::OverwhelmedStruggler,
        CognitiveState::Unfocused,
        CognitiveState::Uncertain,
    ];

    pub fn index(self) -> usize {
        self as usize
    }

    pub fn from_index(index: usize) -> Option<CognitiveState> {
        CognitiveState::ALL.get(index).copied()
    }

    pub fn as_str(self) -> &'static str {
        match self {
            CognitiveState::EngagedObserver => "EngagedObserver",
            CognitiveState::EngagedMisinterpreter => "EngagedMisinterpreter",
            CognitiveState::DistractedMisinterpreter => "DistractedMisinterpreter",
            CognitiveState::OverwhelmedStruggler => "OverwhelmedStruggler",
            CognitiveState::Unfocused => "Unfocused",
            CognitiveState::Uncertain => "Uncertain",
        }
    }

    pub fn ground_truth_action(self) -> Action {
        use HesitationType as H;
        use NegationType as N;
        match self {
            CognitiveState::EngagedObserver => Action::new(N::Affirmation, H::None),
            CognitiveState::EngagedMisinterpreter => Action::new(N::NegationAffirmation, H::None),
            CognitiveState::DistractedMisinterpreter => Action::new(N::Negation, H::None),
            CognitiveState::OverwhelmedStruggler => Action::new(N::Affirmation, H::Hesitation),
            CognitiveState::Unfocused => Action::new(N::NegationAffirmation, H::Hesitation),
            CognitiveState::Uncertain => Action::new(N::Negation, H::Hesitation),
        }
    }

    /// Inverse of [`CognitiveState::ground_truth_action`].
    pub fn from_action(action: Action) -> CognitiveState {
        CognitiveState::ALL
            .into_iter()
            .find(|s| s.ground_truth_action() == action)
            .expect("ground-truth actions form a bijection")
    }
}

impl fmt::Display for CognitiveState {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for CognitiveState {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        CognitiveState::ALL
            .into_iter()
            .find(|c| c.as_str() == s)
            .ok_or_else(|| Error::Parse(s.to_string()))
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Category {
    Capacity,
    Gaze,
    Task,
}

impl Category {
    pub const ALL: [Category; 3] = [Category::Capacity, Category::Gaze, Category::Task];

    pub fn as_str(self) -> &'static str {
        match self {
            Category::Capacity => "capacity",
            Category::Gaze => "gaze",
            Category::Task => "task",
        }
    }
}

/// One row of the scoring table.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Observation {
    Capacity(CapacityClass),
    Gaze(GazeClass),
    Task(TaskClass),
}

impl Observation {
    pub const COUNT: usize = 10;

    /// Rows in table order.
    pub const ALL: [Observation; 10] = [
        Observation::Capacity(CapacityClass::Low),
        Observation::Capacity(CapacityClass::High),
        Observation::Gaze(GazeClass::Distracted),
        Observation::Gaze(GazeClass::Uncertain),
        Observation::Gaze(GazeClass::Focused),
        Observation::Task(TaskClass::Unknown),
        Observation::Task(TaskClass::Failure),
        Observation::Task(TaskClass::MiscEnabledness),
        Observation::Task(TaskClass::MiscComprehension),
        Observation::Task(TaskClass::Success),
    ];

    pub fn index(self) -> usize {
        match self {
            Observation::Capacity(c) => c as usize,
            Observation::Gaze(g) => 2 + g as usize,
            Observation::Task(t) => 5 + t as usize,
        }
    }

    pub fn category(self) -> Category {
        match self {
            Observation::Capacity(_) => Category::Capacity,
            Observation::Gaze(_) => Category::Gaze,
            Observation::Task(_) => Category::Task,
        }
    }

    pub fn value_str(self) -> &'static str {
        match self {
            Observation::Capacity(c) => c.as_str(),
            Observation::Gaze(g) => g.as_str(),
            Observation::Task(t) => t.as_str(),
        }
    }

    pub fn parse(category: &str, value: &str) -> Result<Observation> {
        Observation::ALL
            .into_iter()
            .find(|o| o.category().as_str() == category && o.value_str() == value)
            .ok_or_else(|| Error::Parse(format!("{category},{value}")))
    }
}

/// Name of a scaffolding strategy (a column of the scoring table).
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(transparent)]
pub struct Strategy(String);

impl Strategy {
    pub fn new(name: impl Into<String>) -> Self {
        Strategy(name.into())
    }

    pub fn negation() -> Self {
        Strategy::new("negation")
    }

    pub fn hesitation() -> Self {
        Strategy::new("hesitation")
    }

    pub fn as_str(&self) -> &str {
        &self.0
    }
}

impl fmt::Display for Strategy {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.0)
    }
}

/// Score thresholds, as fractions of the strategy weight.
///
/// Negation: `score <= negation_lower` is affirmation, `score <= negation_upper`
/// is negation+affirmation, anything above is pure negation. Hesitation is
/// added only when its score is strictly above `hesitation`, i.e. when at
/// least two of the three observation values vote for it.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct ReductionBins {
    pub negation_lower: f64,
    pub negation_upper: f64,
    pub hesitation: f64,
}

impl Default for ReductionBins {
    fn default() -> Self {
        ReductionBins {
            negation_lower: 1.0 / 3.0,
            negation_upper: 2.0 / 3.0,
            hesitation: 1.0 / 3.0,
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
struct Column {
    strategy: Strategy,
    entries: [f64; Observation::COUNT],
    weight: f64,
    max: u32,
}

impl Column {
    fn score(&self, triple: ObservationTriple) -> f64 {
        let sum: f64 = triple
            .observations()
            .iter()
            .map(|o| self.entries[o.index()])
            .sum();
        self.weight * (sum / self.max as f64)
    }
}

/// Configurable scoring system: one column of entries per strategy.
///
/// Immutable in use; [`ScoringTable::with_entry`] and
/// [`ScoringTable::with_weight`] return new versions.
#[derive(Clone, Debug, PartialEq)]
pub struct ScoringTable {
    columns: Vec<Column>,
    bins: ReductionBins,
}

impl Default for ScoringTable {
    fn default() -> Self {
        ScoringTable::from_csv(DEFAULT_TABLE_CSV.as_bytes()).expect("shipped table parses")
    }
}

impl ScoringTable {
    /// Builds a table from full columns. `S_max` defaults to the number of
    /// categories and every weight to 1.
    pub fn new(columns: Vec<(Strategy, [f64; Observation::COUNT])>) -> Result<Self> {
        let table = ScoringTable {
            columns: columns
                .into_iter()
                .map(|(strategy, entries)| Column {
                    strategy,
                    entries,
                    weight: 1.0,
                    max: Category::ALL.len() as u32,
                })
                .collect(),
            bins: ReductionBins::default(),
        };
        table.validate()?;
        Ok(table)
    }

    /// A table with every entry zero for negation and hesitation.
    pub fn zeros() -> Self {
        ScoringTable::new(vec![
            (Strategy::negation(), [0.0; Observation::COUNT]),
            (Strategy::hesitation(), [0.0; Observation::COUNT]),
        ])
        .expect("zero table is valid")
    }

    fn validate(&self) -> Result<()> {
        for required in [Strategy::negation(), Strategy::hesitation()] {
            if !self.columns.iter().any(|c| c.strategy == required) {
                return Err(Error::InvalidTable(format!("missing `{required}` column")));
            }
        }
        let mut seen = BTreeSet::new();
        for col in &self.columns {
            if !seen.insert(&col.strategy) {
                return Err(Error::InvalidTable(format!(
                    "duplicate strategy `{}`",
                    col.strategy
                )));
            }
            if !(col.weight.is_finite() && col.weight > 0.0) {
                return Err(Error::InvalidTable(format!(
                    "weight for `{}` must be positive",
                    col.strategy
                )));
            }
            if col.max == 0 {
                return Err(Error::InvalidTable(format!(
                    "max for `{}` must be positive",
                    col.strategy
                )));
            }
            if let Some(e) = col.entries.iter().find(|e| !e.is_finite() || **e < 0.0) {
                return Err(Error::InvalidTable(format!(
                    "entry {e} for `{}` must be finite and non-negative",
                    col.strategy
                )));
            }
        }
        let b = self.bins;
        if !(0.0..=1.0).contains(&b.negation_lower)
            || !(b.negation_lower..=1.0).contains(&b.negation_upper)
            || !(0.0..=1.0).contains(&b.hesitation)
        {
            return Err(Error::InvalidTable("reduction bins out of order".into()));
        }
        Ok(())
    }

    pub fn strategies(&self) -> impl Iterator<Item = &Strategy> {
        self.columns.iter().map(|c| &c.strategy)
    }

    pub fn bins(&self) -> ReductionBins {
        self.bins
    }

    fn column(&self, strategy: &Strategy) -> Result<&Column> {
        self.column_named(strategy.as_str())
            .ok_or_else(|| Error::UnknownStrategy(strategy.to_string()))
    }

    fn column_named(&self, name: &str) -> Option<&Column> {
        self.columns.iter().find(|c| c.strategy.as_str() == name)
    }

    fn column_mut(&mut self, strategy: &Strategy) -> Result<&mut Column> {
        self.columns
            .iter_mut()
            .find(|c| &c.strategy == strategy)
            .ok_or_else(|| Error::UnknownStrategy(strategy.to_string()))
    }

    pub fn entry(&self, strategy: &Strategy, observation: Observation) -> Result<f64> {
        Ok(self.column(strategy)?.entries[observation.index()])
    }

    pub fn weight(&self, strategy: &Strategy) -> Result<f64> {
        Ok(self.column(strategy)?.weight)
    }

    pub fn max(&self, strategy: &Strategy) -> Result<u32> {
        Ok(self.column(strategy)?.max)
    }

    pub fn with_entry(
        &self,
        strategy: &Strategy,
        observation: Observation,
        value: f64,
    ) -> Result<Self> {
        let mut next = self.clone();
        next.column_mut(strategy)?.entries[observation.index()] = value;
        next.validate()?;
        Ok(next)
    }

    pub fn with_weight(&self, strategy: &Strategy, weight: f64) -> Result<Self> {
        let mut next = self.clone();
        next.column_mut(strategy)?.weight = weight;
        next.validate()?;
        Ok(next)
    }

    pub fn with_bins(&self, bins: ReductionBins) -> Result<Self> {
        let mut next = self.clone();
        next.bins = bins;
        next.validate()?;
        Ok(next)
    }

    /// Adds a strategy column. It takes part in scoring but not in the
    /// negation/hesitation reduction.
    pub fn with_strategy(
        &self,
        strategy: Strategy,
        entries: [f64; Observation::COUNT],
    ) -> Result<Self> {
        let mut next = self.clone();
        next.columns.push(Column {
            strategy,
            entries,
            weight: 1.0,
            max: Category::ALL.len() as u32,
        });
        next.validate()?;
        Ok(next)
    }

    /// Number of entries (over all strategies) where the two tables differ.
    pub fn differing_entries(&self, other: &ScoringTable) -> usize {
        self.columns
            .iter()
            .map(|col| match other.column(&col.strategy) {
                Ok(o) => col
                    .entries
                    .iter()
                    .zip(o.entries.iter())
                    .filter(|(a, b)| a != b)
                    .count(),
                Err(_) => Observation::COUNT,
            })
            .sum()
    }

    /// Weighted share of the triple's three observation values voting for
    /// `strategy`.
    pub fn scaffolding_score(&self, triple: ObservationTriple, strategy: &Strategy) -> Result<f64> {
        Ok(self.column(strategy)?.score(triple))
    }

    /// Reduces a triple to its cognitive state.
    pub fn reduce(&self, triple: ObservationTriple) -> CognitiveState {
        CognitiveState::from_action(self.reduced_action(triple))
    }

    fn reduced_action(&self, triple: ObservationTriple) -> Action {
        let neg_col = self.column_named("negation").expect("validated");
        let hes_col = self.column_named("hesitation").expect("validated");
        let neg = neg_col.score(triple);
        let hes = hes_col.score(triple);

        let lower = neg_col.weight * self.bins.negation_lower;
        let upper = neg_col.weight * self.bins.negation_upper;
        let negation = if neg <= lower + BIN_EPS {
            NegationType::Affirmation
        } else if neg <= upper + BIN_EPS {
            NegationType::NegationAffirmation
        } else {
            NegationType::Negation
        };
        let hesitation = if hes > hes_col.weight * self.bins.hesitation + BIN_EPS {
            HesitationType::Hesitation
        } else {
            HesitationType::None
        };
        Action::new(negation, hesitation)
    }

    /// Reduced state and its action for every one of the 30 triples.
    pub fn ground_truth_map(&self) -> GroundTruthMap {
        GroundTruthMap {
            states: ObservationTriple::all().map(|t| self.reduce(t)).collect(),
        }
    }

    /// Reads the table from CSV with header `monitoring,observation,<strategy>...`.
    pub fn from_csv<R: Read>(reader: R) -> Result<Self> {
        let mut rdr = csv::ReaderBuilder::new()
            .comment(Some(b'#'))
            .trim(csv::Trim::All)
            .from_reader(reader);
        let headers = rdr.headers()?.clone();
        if headers.len() < 3
            || headers.get(0) != Some("monitoring")
            || headers.get(1) != Some("observation")
        {
            return Err(Error::InvalidTable(
                "header must start with `monitoring,observation`".into(),
            ));
        }
        let strategies: Vec<Strategy> = headers.iter().skip(2).map(Strategy::new).collect();
        let mut entries = vec![[f64::NAN; Observation::COUNT]; strategies.len()];
        let mut seen = [false; Observation::COUNT];
        for record in rdr.records() {
            let record = record?;
            let obs = Observation::parse(&record[0], &record[1])?;
            if std::mem::replace(&mut seen[obs.index()], true) {
                return Err(Error::InvalidTable(format!(
                    "duplicate row {},{}",
                    &record[0], &record[1]
                )));
            }
            for (col, cell) in entries.iter_mut().zip(record.iter().skip(2)) {
                col[obs.index()] = cell
                    .parse()
                    .map_err(|_| Error::InvalidTable(format!("bad entry `{cell}`")))?;
            }
        }
        if let Some(missing) = Observation::ALL.iter().find(|o| !seen[o.index()]) {
            return Err(Error::InvalidTable(format!(
                "missing row {},{}",
                missing.category().as_str(),
                missing.value_str()
            )));
        }
        if entries.iter().flatten().any(|e| e.is_nan()) {
            return Err(Error::InvalidTable("short row".into()));
        }
        ScoringTable::new(strategies.into_iter().zip(entries).collect())
    }

    pub fn write_csv<W: Write>(&self, writer: W) -> Result<()> {
        let mut w = csv::Writer::from_writer(writer);
        let mut header = vec!["monitoring".to_string(), "observation".to_string()];
        header.extend(self.columns.iter().map(|c| c.strategy.to_string()));
        w.write_record(&header)?;
        for obs in Observation::ALL {
            let mut row = vec![
                obs.category().as_str().to_string(),
                obs.value_str().to_string(),
            ];
            row.extend(
                self.columns
                    .iter()
                    .map(|c| c.entries[obs.index()].to_string()),
            );
            w.write_record(&row)?;
        }
        w.flush()?;
        Ok(())
    }
}

/// Total map from the 30 observation triples to cognitive states.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct GroundTruthMap {
    states: Vec<CognitiveState>,
}

impl GroundTruthMap {
    pub fn state(&self, triple: ObservationTriple) -> CognitiveState {
        self.states[triple.index()]
    }

    pub fn action(&self, triple: ObservationTriple) -> Action {
        self.state(triple).ground_truth_action()
    }

    pub fn iter(&self) -> impl Iterator<Item = (ObservationTriple, CognitiveState, Action)> + '_ {
        ObservationTriple::all()
            .zip(self.states.iter())
            .map(|(t, s)| (t, *s, s.ground_truth_action()))
    }

    /// The set of states that some triple reduces to.
    pub fn image(&self) -> BTreeSet<CognitiveState> {
        self.states.iter().copied().collect()
    }

    pub fn len(&self) -> usize {
        self.states.len()
    }

    pub fn is_empty(&self) -> bool {
        self.states.is_empty()
    }
}
