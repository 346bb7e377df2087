use std::fmt;

use num_bigint::BigInt;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use super::*;
use crate::decomposition::{build_divisor_chain, build_skewed, Decomposition, DecompositionError};
use crate::derivatives::default_zetas;

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SuiteConfig {
    pub depth: usize,
    pub counterexample_depth: usize,
    pub seed: u64,
}

impl Default for SuiteConfig {
    fn default() -> Self {
        SuiteConfig {
            depth: 15,
            counterexample_depth: 10,
            seed: 0x7a6a,
        }
    }
}

type Runner = Box<dyn Fn() -> CheckResult + Send + Sync>;

/// A registered check, identified as `family:instance:point`.
pub struct SuiteEntry {
    pub id: String,
    run: Runner,
}

impl SuiteEntry {
    fn new(id: impl Into<String>, run: impl Fn() -> CheckResult + Send + Sync + 'static) -> Self {
        SuiteEntry {
            id: id.into(),
            run: Box::new(run),
        }
    }

    pub fn run(&self) -> CheckResult {
        let mut r = (self.run)();
        r.id = self.id.clone();
        r
    }
}

impl fmt::Debug for SuiteEntry {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("SuiteEntry").field("id", &self.id).finish()
    }
}

/// Denominators `1, 2, 6, 12, 24, 48, 144, …` with step factors cycling through 2, 3, 2, 2.
pub fn cycling_chain(depth: usize) -> Result<Decomposition, DecompositionError> {
    let factors = [2u32, 3, 2, 2];
    let mut seq = vec![BigInt::from(1)];
    for i in 0..depth {
        let next = &seq[i] * factors[i % 4];
        seq.push(next);
    }
    build_divisor_chain(&seq, depth)
}

fn q(s: &str) -> Rational {
    s.parse().expect("literal rational")
}

fn w(s: &str) -> WeightSequence {
    s.parse().expect("literal weights")
}

fn instance(d: Result<Decomposition, DecompositionError>, weights: &str) -> Result<GeneralizedTakagi, String> {
    let d = d.map_err(|e| e.to_string())?;
    GeneralizedTakagi::new(d, w(weights)).map_err(|e| e.to_string())
}

fn build_failure(id: &str, depth: usize, e: String) -> CheckResult {
    CheckResult {
        id: id.to_string(),
        instance: String::new(),
        depth,
        status: Status::Fail,
        witnesses: Vec::new(),
        reason: Some(format!("error: {e}")),
        asserted: 0,
        seed: None,
        elapsed: Default::default(),
    }
}

#[derive(Clone, Copy)]
enum Grid {
    Radix(u64),
    Chain,
    Skewed,
    Counterexample,
}

impl Grid {
    fn label(self) -> String {
        match self {
            Grid::Radix(r) => format!("radix{r}"),
            Grid::Chain => "chain".into(),
            Grid::Skewed => "skewed".into(),
            Grid::Counterexample => "counterexample".into(),
        }
    }

    fn build(self, depth: usize) -> Result<Decomposition, DecompositionError> {
        match self {
            Grid::Radix(r) => build_radix(r, depth),
            Grid::Chain => cycling_chain(depth),
            Grid::Skewed => build_skewed(depth),
            Grid::Counterexample => build_counterexample(depth, false),
        }
    }
}

type PointCheck = fn(&GeneralizedTakagi, &Rational, usize) -> CheckResult;

fn point_entry(
    family: &'static str,
    check: PointCheck,
    grid: Grid,
    weights: &'static str,
    x: Rational,
    depth: usize,
) -> SuiteEntry {
    let slug = weights.replace(' ', "");
    let id = format!("{family}:{}:{slug}:{x}", grid.label());
    let depth = if matches!(grid, Grid::Skewed) {
        depth.min(11)
    } else {
        depth
    };
    let id2 = id.clone();
    SuiteEntry::new(id, move || match instance(grid.build(depth + 2), weights) {
        Ok(t) => check(&t, &x, depth),
        Err(e) => build_failure(&id2, depth, e),
    })
}

/// Every registered check for `config`, in a stable order.
pub fn suite_entries(config: &SuiteConfig) -> Vec<SuiteEntry> {
    let depth = config.depth;
    let seed = config.seed;
    let mut out = Vec::new();

    let d1_points = [
        (Grid::Radix(2), "1/2"),
        (Grid::Radix(3), "1/3"),
        (Grid::Radix(3), "2/3"),
        (Grid::Radix(10), "3/10"),
        (Grid::Chain, "1/2"),
        (Grid::Skewed, "7/12"),
        (Grid::Counterexample, "1/2"),
    ];
    for (grid, x) in d1_points {
        for weights in ["const 1", "alt 1", "geom 1 1/2", "const 0"] {
            out.push(point_entry(
                "adjacent-sums",
                check_adjacent_sums,
                grid,
                weights,
                q(x),
                depth,
            ));
        }
    }

    let d_points = [
        (Grid::Radix(2), "1/2"),
        (Grid::Radix(2), "3/8"),
        (Grid::Radix(3), "2/9"),
        (Grid::Chain, "5/12"),
        (Grid::Skewed, "7/12"),
    ];
    for (grid, x) in d_points {
        for weights in ["const 1", "alt 1", "geom 1 1/2"] {
            out.push(point_entry(
                "bookkeeping",
                check_quotient_bookkeeping,
                grid,
                weights,
                q(x),
                depth,
            ));
            out.push(point_entry(
                "weight-bounds",
                check_weight_bounds,
                grid,
                weights,
                q(x),
                depth,
            ));
        }
    }

    out.push(SuiteEntry::new("c0-counterexample:triples:1/2", move || {
        check_c0_counterexample(12, seed)
    }));

    let off_grid_points = [
        (Grid::Radix(3), "1/2"),
        (Grid::Radix(3), "1/4"),
        (Grid::Radix(2), "1/3"),
        (Grid::Radix(2), "5/6"),
        (Grid::Radix(10), "1/3"),
        (Grid::Chain, "1/5"),
        (Grid::Radix(2), "1/2"),
    ];
    for (grid, x) in off_grid_points {
        for weights in ["prefix [0] then const 1", "alt 1", "geom 1 1/2"] {
            out.push(point_entry(
                "parity-chords",
                check_parity_chords,
                grid,
                weights,
                q(x),
                depth,
            ));
        }
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    for _ in 0..4 {
        let den: i64 = rng.gen_range(5..=997);
        let x = Rational::ratio(rng.gen_range(1..den), den);
        out.push(point_entry(
            "parity-chords",
            check_parity_chords,
            Grid::Radix(3),
            "const 1",
            x,
            depth,
        ));
    }

    let cd = config.counterexample_depth;
    for with_zero in [false, true] {
        let label = if with_zero { "counterexample0" } else { "counterexample" };
        out.push(SuiteEntry::new(
            format!("counterexample-derivative:{label}:0"),
            move || check_counterexample_derivative(cd, with_zero, seed),
        ));
    }

    let horizon = depth.max(12);
    out.push(SuiteEntry::new("superdiff-example:radix2:5/6", move || {
        check_superdiff_example(horizon)
    }));

    for x in ["1/2", "1/4", "3/4"] {
        let x = q(x);
        let id = format!("local-min:radix2:const1:{x}");
        let id2 = id.clone();
        out.push(SuiteEntry::new(id, move || {
            match instance(build_radix(2, 24), "const 1") {
                Ok(t) => check_local_min(&t, &x, &default_zetas()),
                Err(e) => build_failure(&id2, 24, e),
            }
        }));
    }

    out.push(SuiteEntry::new(
        "empty-subdiff:radix2:const1:1/3",
        move || match instance(build_radix(2, horizon + 8), "const 1") {
            Ok(t) => check_empty_subdifferential(&t, &q("1/3"), horizon, 10),
            Err(e) => build_failure("empty-subdiff", horizon, e),
        },
    ));

    for weights in ["const 1", "alt 1"] {
        let slug = weights.replace(' ', "");
        out.push(SuiteEntry::new(
            format!("shifted-sum:radix4:{slug}:1/2"),
            move || match instance(build_radix(4, horizon + 8), weights) {
                Ok(t) => check_shifted_sum(&t, &q("1/2"), horizon),
                Err(e) => build_failure("shifted-sum", horizon, e),
            },
        ));
    }
    out
}

#[derive(Debug, Clone)]
pub struct SuiteSummary {
    pub results: Vec<CheckResult>,
    pub filter: Option<String>,
}

impl SuiteSummary {
    pub fn count(&self, status: Status) -> usize {
        self.results.iter().filter(|r| r.status == status).count()
    }

    /// No failures, and at least one check ran.
    pub fn exit_ok(&self) -> bool {
        !self.results.is_empty() && self.count(Status::Fail) == 0
    }

    pub fn failures(&self) -> impl Iterator<Item = &CheckResult> {
        self.results.iter().filter(|r| r.status == Status::Fail)
    }

    pub fn to_text(&self) -> String {
        let mut s = String::new();
        for r in &self.results {
            s.push_str(&r.to_string());
            s.push('\n');
        }
        if self.results.is_empty() {
            if let Some(f) = &self.filter {
                s.push_str(&format!("warning: no check matches {f:?}\n"));
            }
        }
        s.push_str(&format!(
            "{} checks: {} passed, {} failed, {} inapplicable\n",
            self.results.len(),
            self.count(Status::Pass),
            self.count(Status::Fail),
            self.count(Status::Inapplicable)
        ));
        s
    }

    pub fn to_csv(&self) -> String {
        let mut s = String::from(CheckResult::CSV_HEADER);
        s.push('\n');
        for r in &self.results {
            s.push_str(&r.csv_row());
            s.push('\n');
        }
        s
    }
}

/// Runs every entry whose id contains `filter` (all when `None`), in parallel.
pub fn run_suite(config: &SuiteConfig, filter: Option<&str>) -> SuiteSummary {
    let entries: Vec<SuiteEntry> = suite_entries(config)
        .into_iter()
        .filter(|e| filter.is_none_or(|f| e.id.contains(f)))
        .collect();
    let results = entries.par_iter().map(SuiteEntry::run).collect();
    SuiteSummary {
        results,
        filter: filter.map(str::to_string),
    }
}
