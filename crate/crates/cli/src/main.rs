mod plot;

use std::fs;
use std::io::Write as _;
use std::path::PathBuf;
use std::process::ExitCode;

use anyhow::{bail, Context, Result};
use clap::{Args, Parser, Subcommand, ValueEnum};
use num_bigint::BigInt;
use takagi_lab::decomposition::{
    build_cancelling_triples, build_counterexample, build_divisor_chain, build_radix, build_skewed, validate,
    validate_with_rho, Decomposition,
};
use takagi_lab::derivatives::{
    chord_limit_check, default_cauchy_tolerance, default_zetas, dini_with, subdifferential_estimate_with,
    superdifferential_estimate_with, ChordMode, DiniOptions, SubdiffEstimate, SubdiffOptions,
};
use takagi_lab::evaluation::{GeneralizedTakagi, Side, WeightSequence};
use takagi_lab::harness::{run_suite, SuiteConfig};
use takagi_lab::sequences::{chord_trace, delta_trace, parity_trace, reduce_to_d1, straddle_trace, QuotientTrace};
use takagi_lab::Rational;

#[derive(Parser, Debug)]
#[command(
    name = "takagi",
    version,
    about = "Exact experiments with generalized Takagi functions"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Build a decomposition and write it as text.
    Build {
        #[command(flatten)]
        decomp: DecompArgs,
        /// Write every level explicitly instead of the generator line.
        #[arg(long)]
        explicit: bool,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Check the axioms and hypothesis flags of a decomposition file.
    Validate {
        file: PathBuf,
        /// Uniformity constant to test instead of the declared one.
        #[arg(long)]
        rho: Option<Rational>,
    },
    /// Certified enclosure of T_w at one or more points.
    Eval {
        #[command(flatten)]
        inst: InstanceArgs,
        #[arg(long = "x", required = true, num_args = 1..)]
        x: Vec<Rational>,
        #[arg(long, default_value = "1/1000000")]
        eps: Rational,
    },
    /// Difference-quotient trace as CSV.
    Trace {
        #[command(flatten)]
        inst: InstanceArgs,
        #[arg(long = "x")]
        x: Rational,
        #[arg(long, value_enum, default_value_t = TraceKind::Auto)]
        kind: TraceKind,
        #[arg(long, value_enum, default_value_t = SideArg::Right)]
        side: SideArg,
        /// Cauchy tolerance for the chord limit check.
        #[arg(long)]
        tolerance: Option<Rational>,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Enclosures of the lower right and upper left Dini derivatives.
    Dini {
        #[command(flatten)]
        inst: InstanceArgs,
        #[arg(long = "x")]
        x: Rational,
        #[arg(long, default_value_t = 16)]
        horizon: usize,
        #[arg(long, default_value_t = 6)]
        refine: usize,
        #[arg(long, default_value_t = 4096)]
        budget: usize,
    },
    /// Sub- or superdifferential verdict at a point.
    Subdiff {
        #[command(flatten)]
        inst: InstanceArgs,
        #[arg(long = "x", required = true, num_args = 1..)]
        x: Vec<Rational>,
        #[arg(long, default_value_t = 16)]
        horizon: usize,
        /// Comma-separated test slopes for the all-reals evidence.
        #[arg(long, value_delimiter = ',')]
        zetas: Option<Vec<Rational>>,
        /// Report the superdifferential instead.
        #[arg(long = "super")]
        superdiff: bool,
        #[arg(long)]
        csv: bool,
    },
    /// Run the verification suite.
    Verify {
        /// Run every registered check (the default when no filter is given).
        #[arg(long)]
        all: bool,
        /// Only checks whose id contains this text.
        #[arg(long)]
        filter: Option<String>,
        #[arg(long, default_value_t = 15)]
        depth: usize,
        #[arg(long, default_value_t = 10)]
        counterexample_depth: usize,
        #[arg(long, default_value_t = SuiteConfig::default().seed)]
        seed: u64,
        /// Also write the results as CSV.
        #[arg(long)]
        csv: Option<PathBuf>,
    },
    /// Sampled values as CSV and SVG, with a quotient plot when a base point is given.
    Plot {
        #[command(flatten)]
        inst: InstanceArgs,
        #[arg(long, default_value_t = 1025)]
        resolution: usize,
        /// Base point for the quotient plot.
        #[arg(long = "x")]
        x: Option<Rational>,
        /// Output prefix; writes PREFIX.csv and PREFIX.svg.
        #[arg(long)]
        out: PathBuf,
    },
}

#[derive(Args, Debug, Clone)]
struct DecompArgs {
    #[arg(long, group = "decomposition")]
    radix: Option<u64>,
    /// Comma-separated divisor chain starting at 1.
    #[arg(long, group = "decomposition", value_delimiter = ',')]
    chain: Option<Vec<BigInt>>,
    #[arg(long, group = "decomposition")]
    counterexample: bool,
    /// Put 0 into D_0 of the counterexample.
    #[arg(long, requires = "counterexample")]
    with_zero: bool,
    #[arg(long, group = "decomposition")]
    skewed: bool,
    #[arg(long, group = "decomposition")]
    triples: bool,
    /// Decomposition file.
    #[arg(long, group = "decomposition")]
    file: Option<PathBuf>,
    #[arg(long, default_value_t = 20)]
    depth: usize,
}

#[derive(Args, Debug, Clone)]
struct InstanceArgs {
    #[command(flatten)]
    decomp: DecompArgs,
    #[arg(long, default_value = "const 1")]
    weights: WeightSequence,
}

#[derive(Copy, Clone, Debug, PartialEq, Eq, ValueEnum)]
enum TraceKind {
    /// Adjacent sequence for points of D, parity chords otherwise.
    Auto,
    Delta,
    Parity,
    Straddle,
    Chord,
}

#[derive(Copy, Clone, Debug, PartialEq, Eq, ValueEnum)]
enum SideArg {
    Left,
    Right,
}

impl From<SideArg> for Side {
    fn from(s: SideArg) -> Side {
        match s {
            SideArg::Left => Side::Left,
            SideArg::Right => Side::Right,
        }
    }
}

impl DecompArgs {
    fn build(&self) -> Result<Decomposition> {
        let d = self.depth;
        let built = if let Some(r) = self.radix {
            build_radix(r, d)
        } else if let Some(chain) = &self.chain {
            build_divisor_chain(chain, d)
        } else if self.counterexample {
            build_counterexample(d, self.with_zero)
        } else if self.skewed {
            build_skewed(d)
        } else if self.triples {
            build_cancelling_triples(d)
        } else if let Some(path) = &self.file {
            Decomposition::load(path)
        } else {
            build_radix(2, d)
        };
        Ok(built?)
    }
}

impl InstanceArgs {
    fn build(&self) -> Result<GeneralizedTakagi> {
        Ok(GeneralizedTakagi::new(self.decomp.build()?, self.weights.clone())?)
    }
}

/// A check ran and failed; exits with 1. Errors exit with 2.
struct CheckFailed;

fn write_out(path: &Option<PathBuf>, text: &str) -> Result<()> {
    match path {
        Some(p) => fs::write(p, text).with_context(|| format!("writing {}", p.display())),
        None => {
            std::io::stdout().write_all(text.as_bytes())?;
            Ok(())
        }
    }
}

fn trace(t: &GeneralizedTakagi, x: &Rational, kind: TraceKind, side: Side) -> Result<QuotientTrace> {
    let depth = t.depth();
    let d = t.decomposition();
    let in_d = d.first_level_containing(x).is_some();
    Ok(match kind {
        TraceKind::Auto if in_d => delta_trace(&reduce_to_d1(t, x)?.residual, x, side, depth)?,
        TraceKind::Auto | TraceKind::Parity => parity_trace(t, x, depth)?,
        TraceKind::Delta => delta_trace(t, x, side, depth)?,
        TraceKind::Straddle => straddle_trace(t, x, depth)?,
        TraceKind::Chord => chord_trace(t, x, side, depth)?,
    })
}

fn print_estimate(e: &SubdiffEstimate, csv: bool, superdiff: bool) {
    if csv {
        println!("{}", e.csv_row());
        return;
    }
    println!("x = {} ({}), horizon {}", e.point, e.class, e.horizon);
    println!("verdict: {}", e.verdict.label());
    match e.interval() {
        Some(i) => println!("interval: {i}"),
        None => println!("interval: none"),
    }
    if let Some(d) = &e.dini {
        let of = if superdiff { " (of -T)" } else { "" };
        println!("d_plus{of} in {}", d.d_plus);
        println!("D_minus{of} in {}", d.d_minus);
    }
}

fn run(cli: Cli) -> Result<Option<CheckFailed>> {
    match cli.command {
        Command::Build { decomp, explicit, out } => {
            let d = decomp.build()?;
            let text = if explicit {
                d.to_explicit_text(1 << 20)?
            } else {
                d.to_text()
            };
            write_out(&out, &text)?;
        }
        Command::Validate { file, rho } => {
            let d = Decomposition::load(&file)?;
            let report = match rho {
                Some(r) => validate_with_rho(&d, Some(r)),
                None => validate(&d),
            };
            println!("levels 0..={}, rho_inf = {}", d.depth(), report.rho_inf);
            println!("n,points,alpha,min_gap,rho_n,axiom3,axiom4,cond1,cond2a,cond2b,alpha_le_rho_over_1mrho");
            for l in &report.levels {
                println!(
                    "{},{},{},{},{},{},{},{},{},{},{}",
                    l.n,
                    l.point_count,
                    l.alpha,
                    l.min_gap,
                    l.rho_n,
                    l.axiom3,
                    l.axiom4,
                    l.cond1,
                    l.cond2a,
                    l.cond2b,
                    l.alpha_le_rho_over_1mrho
                );
            }
            if !report.axioms_hold() {
                eprintln!("axioms fail");
                return Ok(Some(CheckFailed));
            }
            println!("axioms hold");
        }
        Command::Eval { inst, x, eps } => {
            let t = inst.build()?;
            for x in &x {
                let e = t.evaluate(x, &eps)?;
                println!(
                    "x = {x}: [{}, {}] level {} tail {}{}",
                    e.interval.lo(),
                    e.interval.hi(),
                    e.level,
                    e.tail,
                    if e.exact { " exact" } else { "" }
                );
            }
        }
        Command::Trace {
            inst,
            x,
            kind,
            side,
            tolerance,
            out,
        } => {
            let t = inst.build()?;
            let side = Side::from(side);
            let tr = trace(&t, &x, kind, side)?;
            write_out(&out, &tr.to_csv())?;
            if matches!(kind, TraceKind::Straddle | TraceKind::Chord) {
                let mode = match (kind, side) {
                    (TraceKind::Straddle, _) => ChordMode::Straddle,
                    (_, Side::Right) => ChordMode::Right,
                    (_, Side::Left) => ChordMode::Left,
                };
                let tol = tolerance.unwrap_or_else(default_cauchy_tolerance);
                let c = chord_limit_check(&tr, mode, &tol)?;
                eprintln!("cauchy within {tol}: {}, oscillation {}", c.cauchy, c.oscillation);
            }
        }
        Command::Dini {
            inst,
            x,
            horizon,
            refine,
            budget,
        } => {
            let t = inst.build()?;
            let e = dini_with(&t, &x, horizon, &DiniOptions { refine, budget })?;
            println!("x = {x}, horizon {}, {} samples", e.horizon, e.samples);
            println!("d_plus in {}", e.d_plus);
            println!("D_minus in {}", e.d_minus);
        }
        Command::Subdiff {
            inst,
            x,
            horizon,
            zetas,
            superdiff,
            csv,
        } => {
            let t = inst.build()?;
            let opts = SubdiffOptions {
                zetas: zetas.unwrap_or_else(default_zetas),
                ..SubdiffOptions::default()
            };
            if csv {
                println!("{}", SubdiffEstimate::CSV_HEADER);
            }
            for x in &x {
                let e = if superdiff {
                    superdifferential_estimate_with(&t, x, horizon, &opts)?
                } else {
                    subdifferential_estimate_with(&t, x, horizon, &opts)?
                };
                print_estimate(&e, csv, superdiff);
            }
        }
        Command::Verify {
            all,
            filter,
            depth,
            counterexample_depth,
            seed,
            csv,
        } => {
            if all && filter.is_some() {
                bail!("--all and --filter are exclusive");
            }
            let config = SuiteConfig {
                depth,
                counterexample_depth,
                seed,
            };
            let summary = run_suite(&config, filter.as_deref());
            print!("{}", summary.to_text());
            if let Some(p) = csv {
                fs::write(&p, summary.to_csv()).with_context(|| format!("writing {}", p.display()))?;
            }
            if !summary.exit_ok() {
                return Ok(Some(CheckFailed));
            }
        }
        Command::Plot {
            inst,
            resolution,
            x,
            out,
        } => {
            let t = inst.build()?;
            for f in plot::plot(&t, resolution, x.as_ref(), &out)? {
                println!("wrote {}", f.display());
            }
        }
    }
    Ok(None)
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() {
                ExitCode::from(2)
            } else {
                ExitCode::SUCCESS
            };
        }
    };
    match run(cli) {
        Ok(None) => ExitCode::SUCCESS,
        Ok(Some(CheckFailed)) => ExitCode::from(1),
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(2)
        }
    }
}
