//! Desk-scale leakage demonstrations.
//!
//! Each replicate draws a fresh synthetic frame and scores two protocols on
//! the same split: the honest one (guards on, one assess) and a leaky one
//! (guards off, test set consulted for a choice it should not inform). Only
//! the direction of the paired difference is claimed.

use std::fmt;
use std::str::FromStr;
use std::thread;

use leakguard_core::prelude::*;
use leakguard_core::{GuardMode, Result};
use rand::{RngCore, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use statrs::distribution::{Binomial, DiscreteCDF};

use crate::synth::{two_gaussian, DEMO_FEATURES, DEMO_ROWS, DEMO_SEPARATION};

pub const MIN_REPLICATES: usize = 20;
/// Seeds tried by the leaky arm of `seed_selection`.
pub const SEEDS: u64 = 10;
/// Candidates of `screen_selection`.
pub const SCREENED: [Algorithm; 4] =
    [Algorithm::Logistic, Algorithm::DecisionTree, Algorithm::RandomForest, Algorithm::Knn];
/// Share of dev size copied from test into dev by `duplicate_injection`.
pub const DUPLICATE_SHARE: f64 = 0.1;
const FOLDS: usize = 5;
const METRIC: &str = "roc_auc";

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum DemoKind {
    SeedSelection,
    ScreenSelection,
    DuplicateInjection,
}

impl DemoKind {
    pub fn name(self) -> &'static str {
        match self {
            DemoKind::SeedSelection => "seed_selection",
            DemoKind::ScreenSelection => "screen_selection",
            DemoKind::DuplicateInjection => "duplicate_injection",
        }
    }
}

impl fmt::Display for DemoKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for DemoKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self, Error> {
        [DemoKind::SeedSelection, DemoKind::ScreenSelection, DemoKind::DuplicateInjection]
            .into_iter()
            .find(|k| k.name() == s)
            .ok_or_else(|| Error::Config(format!("unknown demo {s:?}")))
    }
}

/// Paired honest and leaky scores for one protocol variant.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Arm {
    pub name: String,
    pub honest: Vec<f64>,
    pub leaky: Vec<f64>,
    /// Mean of leaky − honest.
    pub mean_inflation: f64,
    pub positive: usize,
    pub negative: usize,
    pub ties: usize,
    /// One-sided sign test of positive over negative differences, ties dropped.
    pub sign_test_p: f64,
}

impl Arm {
    fn new(name: &str, pairs: &[(f64, f64)]) -> Arm {
        let diffs: Vec<f64> = pairs.iter().map(|(h, l)| l - h).collect();
        let positive = diffs.iter().filter(|d| **d > 0.0).count();
        let negative = diffs.iter().filter(|d| **d < 0.0).count();
        Arm {
            name: name.into(),
            honest: pairs.iter().map(|p| p.0).collect(),
            leaky: pairs.iter().map(|p| p.1).collect(),
            mean_inflation: diffs.iter().sum::<f64>() / diffs.len() as f64,
            positive,
            negative,
            ties: diffs.len() - positive - negative,
            sign_test_p: sign_test(positive, negative),
        }
    }
}

/// P(X >= positive) for X ~ Binomial(positive + negative, 1/2).
pub fn sign_test(positive: usize, negative: usize) -> f64 {
    let n = (positive + negative) as u64;
    if n == 0 || positive == 0 {
        return 1.0;
    }
    let b = Binomial::new(0.5, n).expect("valid binomial");
    b.sf(positive as u64 - 1)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DemoReport {
    pub kind: DemoKind,
    pub replicates: usize,
    pub seed: u64,
    pub metric: String,
    pub rows: usize,
    pub features: usize,
    pub separation: f64,
    pub arms: Vec<Arm>,
    /// duplicate_injection only: decision_tree minus logistic mean inflation.
    #[serde(default)]
    pub capacity_gap: Option<f64>,
}

fn auc(e: &Evidence) -> Result<f64> {
    e.get(METRIC).ok_or_else(|| Error::Data("holdout lacks one of the classes".into()))
}

fn session(mode: GuardMode) -> Session {
    let s = Session::new();
    s.set_guards(mode);
    s
}

fn once(s: &Session, m: Model, test: &DataFrame) -> Result<f64> {
    auc(&assess(s, m, test)?.evidence)
}

fn seed_selection(df: &DataFrame, seed: u64) -> Result<Vec<(f64, f64)>> {
    let opts = SplitOptions::default().seed(seed);
    let honest_s = session(GuardMode::On);
    let p = split(&honest_s, df, "y", &opts)?;
    let committed = fit(&honest_s, p.dev(), "y", &FitOptions::new(Algorithm::RandomForest).seed(0))?;
    let honest = once(&honest_s, committed, p.test())?;

    let leaky_s = session(GuardMode::Off);
    let p = split(&leaky_s, df, "y", &opts)?;
    let mut best = f64::NEG_INFINITY;
    for s in 0..SEEDS {
        let m = fit(&leaky_s, p.dev(), "y", &FitOptions::new(Algorithm::RandomForest).seed(s))?;
        best = best.max(once(&leaky_s, m, p.test())?);
    }
    Ok(vec![(honest, best)])
}

fn screen_selection(df: &DataFrame, seed: u64) -> Result<Vec<(f64, f64)>> {
    let opts = SplitOptions::default().seed(seed);
    let honest_s = session(GuardMode::On);
    let p = split(&honest_s, df, "y", &opts)?;
    let c = cv(&honest_s, &p, FOLDS, seed)?;
    let board = screen(&honest_s, &c, "y", &SCREENED, 42)?;
    let chosen = fit(&honest_s, &c, "y", &FitOptions::new(board.best).seed(42))?;
    let honest = once(&honest_s, chosen, p.test())?;

    let leaky_s = session(GuardMode::Off);
    let p = split(&leaky_s, df, "y", &opts)?;
    let mut best = f64::NEG_INFINITY;
    for algo in SCREENED {
        let m = fit(&leaky_s, p.dev(), "y", &FitOptions::new(algo).seed(42))?;
        best = best.max(once(&leaky_s, m, p.test())?);
    }
    Ok(vec![(honest, best)])
}

/// Pairs for decision_tree, then logistic.
fn duplicate_injection(df: &DataFrame, seed: u64) -> Result<Vec<(f64, f64)>> {
    let opts = SplitOptions::default().seed(seed);
    let mut out = Vec::new();
    for algo in [Algorithm::DecisionTree, Algorithm::Logistic] {
        let honest_s = session(GuardMode::On);
        let p = split(&honest_s, df, "y", &opts)?;
        let honest = once(&honest_s, fit(&honest_s, p.dev(), "y", &FitOptions::new(algo))?, p.test())?;

        let leaky_s = session(GuardMode::Off);
        let p = split(&leaky_s, df, "y", &opts)?;
        let copies = ((p.dev().row_count() as f64 * DUPLICATE_SHARE).round() as usize).min(p.test().row_count());
        let rows: Vec<usize> = (0..copies).collect();
        let contaminated = p.dev().concat(&p.test().take_rows(&rows))?;
        let leaky = once(&leaky_s, fit(&leaky_s, &contaminated, "y", &FitOptions::new(algo))?, p.test())?;
        out.push((honest, leaky));
    }
    Ok(out)
}

/// Runs `replicates` independent replicates of `kind`, in parallel, with
/// results in replicate order.
pub fn demo_leakage(kind: DemoKind, replicates: usize, seed: u64) -> Result<DemoReport> {
    if replicates < MIN_REPLICATES {
        return Err(Error::Config(format!("demo needs at least {MIN_REPLICATES} replicates, got {replicates}")));
    }
    let mut master = ChaCha8Rng::seed_from_u64(seed);
    let seeds: Vec<(u64, u64)> = (0..replicates).map(|_| (master.next_u64(), master.next_u64())).collect();
    let protocol = match kind {
        DemoKind::SeedSelection => seed_selection,
        DemoKind::ScreenSelection => screen_selection,
        DemoKind::DuplicateInjection => duplicate_injection,
    };
    let replicate = |&(data_seed, split_seed): &(u64, u64)| {
        protocol(&two_gaussian(DEMO_ROWS, DEMO_FEATURES, DEMO_SEPARATION, data_seed), split_seed)
    };
    let workers = thread::available_parallelism().map_or(1, |n| n.get()).min(replicates);
    let chunk = replicates.div_ceil(workers);
    let results: Vec<Result<Vec<(f64, f64)>>> = thread::scope(|scope| {
        let handles: Vec<_> =
            seeds.chunks(chunk).map(|c| scope.spawn(move || c.iter().map(replicate).collect::<Vec<_>>())).collect();
        handles.into_iter().flat_map(|h| h.join().expect("replicate thread panicked")).collect()
    });
    let results = results.into_iter().collect::<Result<Vec<_>>>()?;
    let names: &[&str] = match kind {
        DemoKind::SeedSelection => &["random_forest_best_of_10_seeds"],
        DemoKind::ScreenSelection => &["best_of_4_algorithms"],
        DemoKind::DuplicateInjection => &["decision_tree", "logistic"],
    };
    let arms: Vec<Arm> = names
        .iter()
        .enumerate()
        .map(|(i, name)| Arm::new(name, &results.iter().map(|r| r[i]).collect::<Vec<_>>()))
        .collect();
    let capacity_gap = (kind == DemoKind::DuplicateInjection).then(|| arms[0].mean_inflation - arms[1].mean_inflation);
    Ok(DemoReport {
        kind,
        replicates,
        seed,
        metric: METRIC.into(),
        rows: DEMO_ROWS,
        features: DEMO_FEATURES,
        separation: DEMO_SEPARATION,
        arms,
        capacity_gap,
    })
}
