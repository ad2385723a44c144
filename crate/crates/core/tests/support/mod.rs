//! Independent reference evaluators and the randomized checks built on them.
//!
//! The evaluators use exact rational or integer arithmetic and never call
//! into the code under test; each `check_*` compares the two on random
//! inputs and returns the first disagreement.

#![allow(dead_code)]

use std::collections::BTreeSet;

use num_rational::Ratio;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use scaffold_core::{
    reward, Action, CapacityState, CognitiveState, GazeState, ObservationTriple,
    PartnerModelConfig, PolicyParams, QTable, RewardParams, ScoringTable, Strategy,
    TaskPerformance,
};

pub type Q = Ratio<i128>;

pub const CASES: usize = 10_000;
pub const TOL: f64 = 1e-9;

fn q(n: i128) -> Q {
    Q::from_integer(n)
}

fn to_f64(x: Q) -> f64 {
    *x.numer() as f64 / *x.denom() as f64
}

fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

// ---------------------------------------------------------------- capacity

/// Battery with the default constants in integer units.
pub fn capacity_oracle(start: i64, actions: &[usize]) -> i64 {
    let mut value = start;
    let mut last = None;
    for &a in actions {
        // negation_affirmation/none and negation/none cost the most
        let demanding = a == 2 || a == 4;
        value = if last == Some(a) {
            (value + 5).min(100)
        } else if demanding {
            (value - 20).max(0)
        } else {
            (value - 10).max(0)
        };
        last = Some(a);
    }
    value
}

pub fn check_capacity(cases: usize, seed: u64) -> Result<(), String> {
    let cfg = PartnerModelConfig::default();
    let mut r = rng(seed);
    for case in 0..cases {
        let start = r.random_range(0..=20) * 5;
        let len = r.random_range(1..30);
        let actions: Vec<usize> = (0..len)
            .map(|_| {
                if r.random_bool(0.4) {
                    1
                } else {
                    r.random_range(0..6)
                }
            })
            .collect();
        let mut cap = CapacityState::new(&cfg);
        cap.value = start as f64;
        for &a in &actions {
            cap.update(Action::from_index(a).unwrap(), &cfg);
        }
        let want = capacity_oracle(start, &actions) as f64;
        if (cap.value - want).abs() > TOL {
            return Err(format!(
                "case {case}: {actions:?} from {start}: got {}, want {want}",
                cap.value
            ));
        }
    }
    Ok(())
}

// -------------------------------------------------------------------- gaze

pub struct GazeOracle {
    pub weights: Vec<Q>,
    pub focus_shift: i64,
    pub last: Option<usize>,
    pub clamped: bool,
}

/// Exact replay of fixations for `n` targets with C_max = 100, step 10,
/// w_min = 0 and focus shift in [0, 10].
pub fn gaze_oracle(n: usize, fixations: &[usize]) -> GazeOracle {
    let mut o = GazeOracle {
        weights: vec![Q::new(100, n as i128); n],
        focus_shift: 0,
        last: None,
        clamped: false,
    };
    for &t in fixations {
        let before = o.weights[t];
        let after = std::cmp::min(before + q(10), q(100));
        let gain = after - before;
        let each = gain / q(n as i128 - 1);
        for i in 0..n {
            if i == t {
                o.weights[i] = after;
            } else {
                let w = o.weights[i] - each;
                if w < q(0) {
                    o.clamped = true;
                    o.weights[i] = q(0);
                } else {
                    o.weights[i] = w;
                }
            }
        }
        o.focus_shift = if o.last == Some(t) {
            (o.focus_shift - 1).max(0)
        } else {
            (o.focus_shift + 1).min(10)
        };
        o.last = Some(t);
    }
    o
}

fn gaze_config(n: usize) -> PartnerModelConfig {
    PartnerModelConfig {
        targets: n,
        ..PartnerModelConfig::default()
    }
}

fn random_fixations(r: &mut ChaCha8Rng, n: usize, len: usize) -> Vec<usize> {
    let stay = r.random_range(0.0..0.9);
    let mut out: Vec<usize> = Vec::with_capacity(len);
    for _ in 0..len {
        let t = match out.last() {
            Some(&prev) if r.random_bool(stay) => prev,
            _ => r.random_range(0..n),
        };
        out.push(t);
    }
    out
}

fn replay_gaze(n: usize, fixations: &[usize]) -> GazeState {
    let cfg = gaze_config(n);
    let mut g = GazeState::new(&cfg);
    for &t in fixations {
        g.update_weights(t, &cfg).unwrap();
        g.update_focus_shift(t, &cfg).unwrap();
    }
    g
}

pub fn check_gaze(cases: usize, seed: u64) -> Result<(), String> {
    let mut r = rng(seed);
    for case in 0..cases {
        let n = r.random_range(2..=5);
        let len = r.random_range(1..=24);
        let fixations = random_fixations(&mut r, n, len);
        let g = replay_gaze(n, &fixations);
        let o = gaze_oracle(n, &fixations);
        for (i, (got, want)) in g.weights.iter().zip(&o.weights).enumerate() {
            if (got - to_f64(*want)).abs() > TOL {
                return Err(format!(
                    "case {case}: n={n} {fixations:?}: weight {i} got {got}, want {}",
                    to_f64(*want)
                ));
            }
        }
        if (g.focus_shift - o.focus_shift as f64).abs() > TOL {
            return Err(format!(
                "case {case}: n={n} {fixations:?}: focus shift got {}, want {}",
                g.focus_shift, o.focus_shift
            ));
        }
    }
    Ok(())
}

/// Sequences on which the oracle never clamps; returns the largest
/// deviation of the weight sum from C_max.
pub fn check_weight_conservation(cases: usize, seed: u64) -> Result<f64, String> {
    let mut r = rng(seed);
    let mut worst: f64 = 0.0;
    let mut checked = 0;
    while checked < cases {
        let n = r.random_range(2..=5);
        let len = r.random_range(1..=40);
        let fixations = random_fixations(&mut r, n, len);
        if gaze_oracle(n, &fixations).clamped {
            continue;
        }
        checked += 1;
        let g = replay_gaze(n, &fixations);
        let dev = (g.weights.iter().sum::<f64>() - 100.0).abs();
        worst = worst.max(dev);
        if dev >= 1e-6 {
            return Err(format!("n={n} {fixations:?}: sum deviates by {dev}"));
        }
    }
    Ok(worst)
}

// ----------------------------------------------------------------- scoring

/// A table with entries k/8 and weights k/4, kept as exact rationals too.
pub struct RandomTable {
    pub table: ScoringTable,
    pub negation: [Q; 10],
    pub hesitation: [Q; 10],
    pub weights: [Q; 2],
}

pub fn random_table(r: &mut ChaCha8Rng, binary: bool) -> RandomTable {
    let entry = |r: &mut ChaCha8Rng| {
        if binary {
            q(r.random_range(0..=1))
        } else {
            Q::new(r.random_range(0..=8), 8)
        }
    };
    let negation: [Q; 10] = std::array::from_fn(|_| entry(r));
    let hesitation: [Q; 10] = std::array::from_fn(|_| entry(r));
    let weights = [
        Q::new(r.random_range(1..=8), 4),
        Q::new(r.random_range(1..=8), 4),
    ];
    let table = ScoringTable::new(vec![
        (Strategy::negation(), negation.map(to_f64)),
        (Strategy::hesitation(), hesitation.map(to_f64)),
    ])
    .unwrap()
    .with_weight(&Strategy::negation(), to_f64(weights[0]))
    .unwrap()
    .with_weight(&Strategy::hesitation(), to_f64(weights[1]))
    .unwrap();
    RandomTable {
        table,
        negation,
        hesitation,
        weights,
    }
}

/// Row of each observation in the table: capacity low/high, gaze
/// distracted/uncertain/focused, task unknown/failure/misc_enabledness/
/// misc_comprehension/success.
fn rows(t: ObservationTriple) -> [usize; 3] {
    let [c, g, k] = t.labels();
    let cap = ["low", "high"].iter().position(|x| *x == c).unwrap();
    let gaze = ["distracted", "uncertain", "focused"]
        .iter()
        .position(|x| *x == g)
        .unwrap();
    let task = [
        "unknown",
        "failure",
        "misc_enabledness",
        "misc_comprehension",
        "success",
    ]
    .iter()
    .position(|x| *x == k)
    .unwrap();
    [cap, 2 + gaze, 5 + task]
}

pub fn score_oracle(entries: &[Q; 10], weight: Q, t: ObservationTriple) -> Q {
    let sum: Q = rows(t).iter().map(|&i| entries[i]).sum();
    weight * sum / q(3)
}

/// (negation label, hesitates) from exact scores with bins at 1/3, 2/3 and
/// hesitation strictly above 1/3, all scaled by the weight.
pub fn reduce_oracle(rt: &RandomTable, t: ObservationTriple) -> (&'static str, bool) {
    let neg = score_oracle(&rt.negation, rt.weights[0], t);
    let hes = score_oracle(&rt.hesitation, rt.weights[1], t);
    let third = |w: Q| w / q(3);
    let negation = if neg <= third(rt.weights[0]) {
        "affirmation"
    } else if neg <= third(rt.weights[0]) * q(2) {
        "negation_affirmation"
    } else {
        "negation"
    };
    (negation, hes > third(rt.weights[1]))
}

pub fn check_scores(cases: usize, seed: u64) -> Result<(), String> {
    let mut r = rng(seed);
    for case in 0..cases {
        let binary = r.random_bool(0.5);
        let rt = random_table(&mut r, binary);
        let t = ObservationTriple::from_index(r.random_range(0..30));
        for (strategy, entries, w) in [
            (Strategy::negation(), &rt.negation, rt.weights[0]),
            (Strategy::hesitation(), &rt.hesitation, rt.weights[1]),
        ] {
            let got = rt.table.scaffolding_score(t, &strategy).unwrap();
            let want = to_f64(score_oracle(entries, w, t));
            if (got - want).abs() > TOL {
                return Err(format!(
                    "case {case}: {t} {strategy}: got {got}, want {want}"
                ));
            }
        }
        let action = rt.table.reduce(t).ground_truth_action();
        let (neg, hes) = reduce_oracle(&rt, t);
        if action.negation.as_str() != neg || (action.hesitation.as_str() == "hesitation") != hes {
            return Err(format!(
                "case {case}: {t}: reduced to {action}, want {neg}/{hes}"
            ));
        }
    }
    Ok(())
}

/// Distinct reduced states over all 30 triples of the default table.
pub fn default_image() -> BTreeSet<CognitiveState> {
    let table = ScoringTable::default();
    ObservationTriple::all().map(|t| table.reduce(t)).collect()
}

pub fn expected_default_image() -> BTreeSet<CognitiveState> {
    CognitiveState::ALL
        .into_iter()
        .filter(|s| *s != CognitiveState::Uncertain)
        .collect()
}

// ------------------------------------------------------------------ reward

/// exp(-x) by its Taylor series, for x in [0, 10].
pub fn exp_neg(x: f64) -> f64 {
    let mut term = 1.0;
    let mut sum = 1.0;
    for n in 1..200 {
        term *= -x / n as f64;
        sum += term;
    }
    sum
}

pub fn reward_oracle(ok: [bool; 2], times: [f64; 2], k: f64, lambda: f64) -> f64 {
    let tp = |ok: bool, t: f64| if ok { exp_neg(k * t) } else { -exp_neg(k * t) };
    lambda * (tp(ok[0], times[0]) + tp(ok[1], times[1])) / 2.0
}

pub fn check_rewards(cases: usize, seed: u64) -> Result<(), String> {
    let mut r = rng(seed);
    for case in 0..cases {
        let ok = [r.random_bool(0.5), r.random_bool(0.5)];
        let times = [r.random_range(0.0..10.0), r.random_range(0.0..10.0)];
        let k = r.random_range(0.0..1.0);
        let lambda = r.random_range(0.1..2.0);
        let mut tp = TaskPerformance::both(ok[0], times[0], times[1]);
        tp.enabledness.success = ok[1];
        let got = reward(&tp, &RewardParams { k, lambda }).unwrap();
        let want = reward_oracle(ok, times, k, lambda);
        if (got - want).abs() > TOL {
            return Err(format!(
                "case {case}: {ok:?} {times:?} k={k} l={lambda}: got {got}, want {want}"
            ));
        }
    }
    Ok(())
}

// ------------------------------------------------------------------ policy

/// (1 - alpha) * q + alpha * (r + gamma * next_max).
pub fn q_update_oracle(value: f64, alpha: f64, gamma: f64, reward: f64, next_max: f64) -> f64 {
    (1.0 - alpha) * value + alpha * (reward + gamma * next_max)
}

pub fn check_q_updates(cases: usize, seed: u64) -> Result<(), String> {
    let mut r = rng(seed);
    for case in 0..cases {
        let params = PolicyParams {
            alpha: r.random_range(0.01..=1.0),
            gamma: r.random_range(0.0..0.99),
            ..PolicyParams::default()
        };
        let mut table = QTable::zeros(params.clone()).unwrap();
        let s = CognitiveState::from_index(r.random_range(0..6)).unwrap();
        let next = CognitiveState::from_index(r.random_range(0..6)).unwrap();
        let a = Action::from_index(r.random_range(0..6)).unwrap();
        for st in CognitiveState::ALL {
            for act in Action::ALL {
                table.set_value(st, act, r.random_range(-5.0..5.0));
            }
        }
        let before = table.value(s, a);
        let next_max = Action::ALL
            .iter()
            .map(|x| table.value(next, *x))
            .fold(f64::NEG_INFINITY, f64::max);
        let reward = r.random_range(-1.0..1.0);
        table.update(s, a, reward, next).unwrap();
        let want = q_update_oracle(before, params.alpha, params.gamma, reward, next_max);
        if (table.value(s, a) - want).abs() > TOL {
            return Err(format!(
                "case {case}: got {}, want {want}",
                table.value(s, a)
            ));
        }
    }
    Ok(())
}
