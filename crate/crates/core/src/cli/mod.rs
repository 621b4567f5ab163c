//! The `qmac` command line.
//!
//! Exit codes: 0 success, 1 domain failure (invalid channel, violated
//! inequality, cap exceeded), 2 usage or I/O error.

mod output;
mod parse;

use std::ffi::OsString;
use std::io::Write;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use rayon::prelude::*;
use serde::Serialize;

use crate::channel::format::{validate_channel, ChannelFile};
use crate::channel::{channel_state, CqMacChannel, Prior, Sender};
use crate::checks::{channel_suite, run_suite, Suite, SuiteSummary, CHECK_TOL};
use crate::coding::{
    average_error, codebook_sizes, simulate_draw, trial_seed, AveragingMode, Codebook, Evaluation,
    SequentialDecoder, SimReport, SimulationSpec,
};
use crate::entropy::info_report;
use crate::error::Error;
use crate::limits::Limits;
use crate::region::{
    boundary_sweep, corners_from_constraints, corners_from_table, is_member, mixture_constraints,
    upper_boundary_2d, EntropyTable, PriorGrid, RatePoint,
};

pub use output::fmt_sig;
use output::*;
use parse::*;

#[derive(Debug, Clone, PartialEq)]
pub enum CliError {
    Usage(String),
    Io(String),
    Domain(String),
}

impl CliError {
    pub fn exit_code(&self) -> u8 {
        match self {
            CliError::Domain(_) => 1,
            CliError::Usage(_) | CliError::Io(_) => 2,
        }
    }

    fn message(&self) -> &str {
        match self {
            CliError::Usage(m) | CliError::Io(m) | CliError::Domain(m) => m,
        }
    }
}

impl From<Error> for CliError {
    fn from(e: Error) -> Self {
        match e {
            Error::InvalidArgument(_)
            | Error::InvalidDistribution(_)
            | Error::DimensionMismatch { .. } => CliError::Usage(e.to_string()),
            _ => CliError::Domain(e.to_string()),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Csv,
    Json,
}

#[derive(Debug, Parser)]
#[command(
    name = "qmac",
    version,
    about = "Capacity regions and coding simulation for classical-quantum multiple-access channels"
)]
pub struct Cli {
    #[command(flatten)]
    pub common: Common,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Clone, Args)]
pub struct Common {
    /// Write output here instead of standard output.
    #[arg(long, global = true, value_name = "PATH")]
    pub out: Option<PathBuf>,
    #[arg(long, global = true, value_enum, default_value_t = Format::Json)]
    pub format: Format,
    /// Tolerance for membership tests and property checks.
    #[arg(long, global = true, default_value_t = CHECK_TOL, allow_hyphen_values = true)]
    pub tol: f64,
    /// Cap on the quantum block dimension d^n.
    #[arg(long, global = true, env = "QMAC_MAX_DIM", value_name = "INT")]
    pub max_block_dim: Option<usize>,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Check a channel file and list every violation.
    Validate {
        #[arg(long, value_name = "PATH")]
        channel: PathBuf,
    },
    /// Subsystem entropies and conditional mutual informations.
    Info {
        #[arg(long, value_name = "PATH")]
        channel: PathBuf,
        #[arg(long, default_value = "uniform", value_name = "SPEC")]
        prior: String,
    },
    /// Rate constraints, corner points and prior sweeps.
    Region(RegionArgs),
    /// Draw random codes and evaluate sequential decoding exactly.
    Simulate(SimulateArgs),
    /// Run the randomized property suites.
    Check(CheckArgs),
}

#[derive(Debug, Args)]
pub struct RegionArgs {
    #[arg(long, value_name = "PATH")]
    pub channel: PathBuf,
    /// `uniform`, `grid:K`, `p11,p12;p21,p22` or JSON.
    #[arg(long, default_value = "uniform", value_name = "SPEC")]
    pub prior: String,
    /// Also list the successive-decoding corners.
    #[arg(long)]
    pub corners: bool,
    /// Sweep every product prior with denominators `RES`.
    #[arg(long, value_name = "RES", conflicts_with = "mixture")]
    pub sweep: Option<usize>,
    /// Time-sharing of priors, `w1:PRIOR|w2:PRIOR`.
    #[arg(long, value_name = "SPEC")]
    pub mixture: Option<String>,
    /// Largest number of mixture components (default: number of senders).
    #[arg(long, value_name = "INT")]
    pub mixture_cap: Option<usize>,
    /// Test whether a rate tuple lies in the region.
    #[arg(long, value_name = "R1,R2,..", conflicts_with = "sweep")]
    pub point: Option<String>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Averaging {
    Ensemble,
    Empirical,
}

#[derive(Debug, Args)]
pub struct SimulateArgs {
    #[arg(long, value_name = "PATH")]
    pub channel: PathBuf,
    #[arg(long, default_value = "uniform", value_name = "SPEC")]
    pub prior: String,
    /// Block length.
    #[arg(short, long)]
    pub n: usize,
    /// Codebook sizes, one per sender.
    #[arg(long, value_name = "L1,L2,..", group = "size_source")]
    pub sizes: Option<String>,
    /// Rates in bits per letter; sizes are `ceil(2^(n(R-delta)))`.
    #[arg(long, value_name = "R1,R2,..", group = "size_source")]
    pub rates: Option<String>,
    /// Rates as this fraction of the corner for `--order`.
    #[arg(long, value_name = "F", group = "size_source")]
    pub corner_fraction: Option<f64>,
    /// Use every word of X_i^n as a codebook instead of drawing at random.
    #[arg(long, group = "size_source")]
    pub full_codebooks: bool,
    #[arg(long, default_value_t = 0.0)]
    pub delta: f64,
    /// One-based decoding order, first decoded first.
    #[arg(long, value_name = "ORDER")]
    pub order: Option<String>,
    #[arg(long, value_enum, default_value_t = Averaging::Ensemble)]
    pub averaging: Averaging,
    #[arg(long)]
    pub seed: u64,
    /// Independent codebook draws.
    #[arg(long, default_value_t = 1)]
    pub draws: usize,
    /// Sample this many message tuples per draw instead of all.
    #[arg(long)]
    pub trials: Option<usize>,
    /// Include wall-clock times (makes output vary between runs).
    #[arg(long)]
    pub timing: bool,
    /// Include the sampled codebooks.
    #[arg(long)]
    pub codebooks: bool,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum SuiteArg {
    Entropy,
    Lemmas,
    Region,
    All,
}

#[derive(Debug, Args)]
pub struct CheckArgs {
    #[arg(long, value_enum, default_value_t = SuiteArg::All)]
    pub suite: SuiteArg,
    #[arg(long, default_value_t = 200)]
    pub trials: usize,
    #[arg(long)]
    pub seed: u64,
    /// Also check the entropy identities and corner laws of this channel.
    #[arg(long, value_name = "PATH")]
    pub channel: Option<PathBuf>,
    #[arg(long, default_value = "uniform", value_name = "SPEC")]
    pub prior: String,
}

/// Settings shared by all commands after validation.
#[derive(Debug, Clone, PartialEq)]
pub struct RunConfig {
    pub tol: f64,
    pub limits: Limits,
    pub out: Option<PathBuf>,
    pub format: Format,
}

impl RunConfig {
    pub fn from_common(c: &Common) -> Result<Self, CliError> {
        if !(c.tol.is_finite() && c.tol > 0.0) {
            return Err(CliError::Usage(format!(
                "--tol must be positive, got {}",
                c.tol
            )));
        }
        let mut limits = Limits::default();
        if let Some(cap) = c.max_block_dim {
            if cap == 0 {
                return Err(CliError::Usage("--max-block-dim must be positive".into()));
            }
            limits.max_block_dim = cap;
        }
        Ok(Self {
            tol: c.tol,
            limits,
            out: c.out.clone(),
            format: c.format,
        })
    }
}

/// Output text plus the exit status it carries.
struct Outcome {
    text: String,
    code: u8,
}

impl Outcome {
    fn ok(text: String) -> Self {
        Self { text, code: 0 }
    }
}

pub fn load_channel(path: &Path) -> Result<CqMacChannel<f64>, CliError> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| CliError::Io(format!("{}: {e}", path.display())))?;
    let raw = ChannelFile::from_json(&text)
        .map_err(|e| CliError::Io(format!("{}: {e}", path.display())))?;
    validate_channel(&raw).map_err(CliError::from)
}

fn cmd_validate(path: &Path) -> Result<Outcome, CliError> {
    match load_channel(path) {
        Ok(ch) => {
            let alphabets: Vec<String> = ch.alphabet_sizes().iter().map(usize::to_string).collect();
            Ok(Outcome::ok(format!(
                "valid: {} sender{}, alphabets {}, output dimension {}, {} states\n",
                ch.num_senders(),
                if ch.num_senders() == 1 { "" } else { "s" },
                alphabets.join("x"),
                ch.output_dim(),
                ch.num_tuples()
            )))
        }
        Err(CliError::Domain(_)) => {
            let text = std::fs::read_to_string(path).map_err(|e| CliError::Io(e.to_string()))?;
            let raw = ChannelFile::from_json(&text).map_err(|e| CliError::Io(e.to_string()))?;
            let lines = match validate_channel::<f64>(&raw) {
                Err(Error::InvalidChannel(v)) => v,
                Err(e) => vec![e.to_string()],
                Ok(_) => Vec::new(),
            };
            Ok(Outcome {
                text: lines.iter().map(|l| format!("{l}\n")).collect(),
                code: 1,
            })
        }
        Err(e) => Err(e),
    }
}

fn cmd_info(cfg: &RunConfig, path: &Path, prior: &str) -> Result<Outcome, CliError> {
    let ch = load_channel(path)?;
    let p = fixed_prior(prior, ch.alphabet_sizes())?;
    let report = info_report(&channel_state(&ch, &p)?)?;
    Ok(Outcome::ok(match cfg.format {
        Format::Json => to_json(&report),
        Format::Csv => {
            let mut t = CsvTable::new(&["quantity", "mask", "value"])?;
            for (k, v) in &report.entropies {
                t.row(&["H", k, &fmt_sig(*v)])?;
            }
            for (k, v) in &report.mutual_informations {
                t.row(&["I_cond", k, &fmt_sig(*v)])?;
            }
            t.finish()?
        }
    }))
}

#[derive(Serialize)]
struct MixtureComponent<'a> {
    weight: f64,
    prior: &'a [Vec<f64>],
}

#[derive(Serialize)]
struct Membership {
    rates: Vec<f64>,
    member: bool,
}

#[derive(Serialize)]
struct RegionOutput<'a> {
    senders: &'a [Sender],
    #[serde(skip_serializing_if = "Option::is_none")]
    prior: Option<&'a [Vec<f64>]>,
    #[serde(skip_serializing_if = "Option::is_none")]
    mixture: Option<Vec<MixtureComponent<'a>>>,
    constraints: Vec<BoundRow>,
    #[serde(skip_serializing_if = "Option::is_none")]
    corners: Option<Vec<CornerRow>>,
    #[serde(skip_serializing_if = "Option::is_none")]
    point: Option<Membership>,
}

#[derive(Serialize)]
struct SweepRow<'a> {
    prior: &'a [Vec<f64>],
    constraints: Vec<BoundRow>,
    corners: Vec<CornerRow>,
}

#[derive(Serialize)]
struct SweepOutput<'a> {
    senders: &'a [Sender],
    resolution: usize,
    points: Vec<SweepRow<'a>>,
    /// Two senders only.
    #[serde(skip_serializing_if = "Option::is_none")]
    upper_boundary: Option<Vec<[f64; 2]>>,
}

fn cmd_region(cfg: &RunConfig, a: &RegionArgs) -> Result<Outcome, CliError> {
    let ch = load_channel(&a.channel)?;
    let alphabets = ch.alphabet_sizes();
    let grid = match (a.sweep, parse_prior(&a.prior, alphabets)?) {
        (Some(k), _) | (None, PriorSpec::Grid(k)) => Some(k),
        _ => None,
    };
    if let Some(k) = grid {
        if a.mixture.is_some() || a.point.is_some() {
            return Err(CliError::Usage(
                "a sweep cannot be combined with --mixture or --point".into(),
            ));
        }
        return region_sweep(cfg, &ch, k);
    }

    let (cs, corners, prior, mixture) = match &a.mixture {
        Some(spec) => {
            let mix = parse_mixture(spec, alphabets, a.mixture_cap)?;
            let cs = mixture_constraints(&ch, &mix)?;
            let corners = if a.corners {
                Some(corners_from_constraints(&cs, &cfg.limits)?)
            } else {
                None
            };
            (cs, corners, None, Some(mix))
        }
        None => {
            let p = fixed_prior(&a.prior, alphabets)?;
            let table = EntropyTable::new(&channel_state(&ch, &p)?)?;
            let corners = if a.corners {
                Some(corners_from_table(&table, &cfg.limits)?)
            } else {
                None
            };
            (table.constraint_set(), corners, Some(p), None)
        }
    };
    let point = match &a.point {
        Some(text) => {
            let rates = number_list(text)?;
            let rp = RatePoint::new(rates.clone())?;
            Some(Membership {
                member: is_member(&rp, &cs, cfg.tol)?,
                rates,
            })
        }
        None => None,
    };

    let text = match cfg.format {
        Format::Json => to_json(&RegionOutput {
            senders: ch.senders(),
            prior: prior.as_ref().map(|p| p.per_sender()),
            mixture: mixture.as_ref().map(|m| {
                m.components()
                    .iter()
                    .map(|(w, p)| MixtureComponent {
                        weight: *w,
                        prior: p.per_sender(),
                    })
                    .collect()
            }),
            constraints: bound_rows(&cs),
            corners: corners.as_deref().map(corner_rows),
            point,
        }),
        Format::Csv => {
            let mut t = CsvTable::new(&["kind", "label", "index", "value"])?;
            region_rows(&mut t, &[], &cs, corners.as_deref())?;
            if let Some(m) = &point {
                for (i, r) in m.rates.iter().enumerate() {
                    t.row(&[
                        "point".into(),
                        m.member.to_string(),
                        (i + 1).to_string(),
                        fmt_sig(*r),
                    ])?;
                }
            }
            t.finish()?
        }
    };
    Ok(Outcome::ok(text))
}

fn region_sweep(cfg: &RunConfig, ch: &CqMacChannel<f64>, k: usize) -> Result<Outcome, CliError> {
    let points = boundary_sweep(ch, &PriorGrid::Resolution(k), &cfg.limits)?;
    let upper = if ch.num_senders() == 2 {
        let cloud: Vec<RatePoint<f64>> = points
            .iter()
            .flat_map(|p| p.corners.iter().map(|c| c.point.clone()))
            .collect();
        Some(upper_boundary_2d(&cloud)?)
    } else {
        None
    };
    let text = match cfg.format {
        Format::Json => to_json(&SweepOutput {
            senders: ch.senders(),
            resolution: k,
            points: points
                .iter()
                .map(|p| SweepRow {
                    prior: p.prior.per_sender(),
                    constraints: bound_rows(&p.constraints),
                    corners: corner_rows(&p.corners),
                })
                .collect(),
            upper_boundary: upper,
        }),
        Format::Csv => {
            let mut t = CsvTable::new(&["point", "prior", "kind", "label", "index", "value"])?;
            for (i, p) in points.iter().enumerate() {
                region_rows(
                    &mut t,
                    &[i.to_string(), prior_label(&p.prior)],
                    &p.constraints,
                    Some(&p.corners),
                )?;
            }
            for (v, xy) in upper.iter().flatten().enumerate() {
                for (i, r) in xy.iter().enumerate() {
                    t.row(&[
                        String::new(),
                        String::new(),
                        "boundary".into(),
                        v.to_string(),
                        (i + 1).to_string(),
                        fmt_sig(*r),
                    ])?;
                }
            }
            t.finish()?
        }
    };
    Ok(Outcome::ok(text))
}

#[derive(Serialize)]
struct DrawOutput {
    draw: u64,
    report: SimReport,
    #[serde(skip_serializing_if = "Option::is_none")]
    codebooks: Option<Vec<Codebook>>,
}

#[derive(Serialize)]
struct SimulateOutput<'a> {
    prior: &'a [Vec<f64>],
    n: usize,
    sizes: &'a [usize],
    master_seed: u64,
    mean_avg_error: f64,
    draws: Vec<DrawOutput>,
}

fn cmd_simulate(cfg: &RunConfig, a: &SimulateArgs) -> Result<Outcome, CliError> {
    let ch = load_channel(&a.channel)?;
    let s = ch.num_senders();
    let prior = fixed_prior(&a.prior, ch.alphabet_sizes())?;
    if a.n == 0 {
        return Err(CliError::Usage("block length must be positive".into()));
    }
    if a.draws == 0 {
        return Err(CliError::Usage("--draws must be positive".into()));
    }
    let order = match &a.order {
        Some(o) => parse_order(o, s)?,
        None => (0..s).collect(),
    };
    let averaging = match a.averaging {
        Averaging::Ensemble => AveragingMode::Ensemble,
        Averaging::Empirical => AveragingMode::Empirical,
    };
    if a.full_codebooks {
        return simulate_full(cfg, a, &ch, &prior, order, averaging);
    }
    let sizes = if let Some(text) = &a.sizes {
        let sizes = usize_list(text)?;
        if sizes.len() != s || sizes.contains(&0) {
            return Err(CliError::Usage(format!(
                "--sizes needs {s} positive entries"
            )));
        }
        sizes
    } else {
        let rates = if let Some(text) = &a.rates {
            number_list(text)?
        } else if let Some(f) = a.corner_fraction {
            if f.is_nan() || f < 0.0 {
                return Err(CliError::Usage(
                    "--corner-fraction must be nonnegative".into(),
                ));
            }
            let corner = EntropyTable::new(&channel_state(&ch, &prior)?)?.corner(&order)?;
            corner.rates().iter().map(|r| f * r).collect()
        } else {
            return Err(CliError::Usage(
                "one of --sizes, --rates, --corner-fraction or --full-codebooks is required".into(),
            ));
        };
        if rates.len() != s || rates.iter().any(|r| *r < 0.0) {
            return Err(CliError::Usage(format!(
                "--rates needs {s} nonnegative entries"
            )));
        }
        codebook_sizes(&rates, a.n, a.delta)?
    };
    let spec = SimulationSpec {
        n: a.n,
        sizes: sizes.clone(),
        order,
        averaging,
        master_seed: a.seed,
        trials: a.trials,
    };
    let runs = (0..a.draws as u64)
        .into_par_iter()
        .map(|draw| simulate_draw(&ch, &prior, &spec, draw, &cfg.limits).map(|r| (draw, r)))
        .collect::<Result<Vec<_>, _>>()?;
    let draws: Vec<DrawOutput> = runs
        .into_iter()
        .map(|(draw, (books, report))| DrawOutput {
            draw,
            report,
            codebooks: a.codebooks.then_some(books),
        })
        .collect();
    simulation_output(cfg, a, &prior, &sizes, draws)
}

/// One deterministic run over the complete codebooks.
fn simulate_full(
    cfg: &RunConfig,
    a: &SimulateArgs,
    ch: &CqMacChannel<f64>,
    prior: &Prior<f64>,
    order: Vec<usize>,
    averaging: AveragingMode,
) -> Result<Outcome, CliError> {
    let books = ch
        .alphabet_sizes()
        .iter()
        .enumerate()
        .map(|(i, &x)| Codebook::full(i, x, a.n))
        .collect::<Result<Vec<_>, _>>()?;
    let sizes: Vec<usize> = books.iter().map(Codebook::len).collect();
    let dec = SequentialDecoder::new(ch, prior, &books, order, averaging, &cfg.limits)?;
    let evaluation = match a.trials {
        None => Evaluation::Exhaustive,
        Some(trials) => Evaluation::MonteCarlo {
            trials,
            seed: trial_seed(a.seed, 0),
        },
    };
    let report = average_error(&dec, evaluation, &cfg.limits)?;
    let draws = vec![DrawOutput {
        draw: 0,
        report,
        codebooks: a.codebooks.then_some(books),
    }];
    simulation_output(cfg, a, prior, &sizes, draws)
}

fn simulation_output(
    cfg: &RunConfig,
    a: &SimulateArgs,
    prior: &Prior<f64>,
    sizes: &[usize],
    mut draws: Vec<DrawOutput>,
) -> Result<Outcome, CliError> {
    if !a.timing {
        for d in &mut draws {
            d.report.wall_clock_ms = None;
        }
    }
    let s = sizes.len();
    let mean = draws.iter().map(|d| d.report.avg_error).sum::<f64>() / draws.len() as f64;
    let text = match cfg.format {
        Format::Json => to_json(&SimulateOutput {
            prior: prior.per_sender(),
            n: a.n,
            sizes,
            master_seed: a.seed,
            mean_avg_error: mean,
            draws,
        }),
        Format::Csv => {
            let mut header = vec!["draw".to_string(), "n".into()];
            header.extend((1..=s).map(|i| format!("L{i}")));
            header.extend(["order".to_string(), "avg_error".into()]);
            header.extend((1..=s).map(|t| format!("stage_{t}_error")));
            if a.timing {
                header.push("wall_clock_ms".into());
            }
            let mut t = CsvTable::new(&header.iter().map(String::as_str).collect::<Vec<_>>())?;
            for d in &draws {
                let r = &d.report;
                let mut row = vec![d.draw.to_string(), r.n.to_string()];
                row.extend(r.sizes.iter().map(usize::to_string));
                row.push(
                    r.order
                        .iter()
                        .map(usize::to_string)
                        .collect::<Vec<_>>()
                        .join("-"),
                );
                row.push(fmt_sig(r.avg_error));
                row.extend(r.stage_errors().into_iter().map(fmt_sig));
                if let Some(ms) = r.wall_clock_ms {
                    row.push(fmt_sig(ms));
                }
                t.row(&row)?;
            }
            t.finish()?
        }
    };
    Ok(Outcome::ok(text))
}

#[derive(Serialize)]
struct CheckOutput<'a> {
    passed: bool,
    tol: f64,
    suites: &'a [SuiteSummary],
}

fn cmd_check(cfg: &RunConfig, a: &CheckArgs, err: &mut dyn Write) -> Result<Outcome, CliError> {
    let suites: Vec<Suite> = match a.suite {
        SuiteArg::Entropy => vec![Suite::Entropy],
        SuiteArg::Lemmas => vec![Suite::Lemmas],
        SuiteArg::Region => vec![Suite::Region],
        SuiteArg::All => Suite::ALL.to_vec(),
    };
    let mut summaries: Vec<SuiteSummary> = suites
        .into_iter()
        .map(|s| run_suite(s, a.trials, a.seed, cfg.tol, &cfg.limits))
        .collect();
    if let Some(path) = &a.channel {
        let ch = load_channel(path)?;
        let p = fixed_prior(&a.prior, ch.alphabet_sizes())?;
        summaries.push(channel_suite(&ch, &p, cfg.tol, &cfg.limits)?);
    }
    let passed = summaries.iter().all(SuiteSummary::passed);
    for s in &summaries {
        let checked: usize = s.tallies.iter().map(|t| t.instances).sum();
        let _ = writeln!(
            err,
            "{}: {} trials, {} inequalities checked, {} violations",
            s.suite.name(),
            s.trials,
            checked,
            s.violations.len()
        );
    }
    let text = match cfg.format {
        Format::Json => to_json(&CheckOutput {
            passed,
            tol: cfg.tol,
            suites: &summaries,
        }),
        Format::Csv => {
            let mut t = CsvTable::new(&[
                "suite",
                "check",
                "instances",
                "failures",
                "skipped",
                "worst_slack",
            ])?;
            for s in &summaries {
                for tally in &s.tallies {
                    t.row(&[
                        s.suite.name().to_string(),
                        tally.check.clone(),
                        tally.instances.to_string(),
                        tally.failures.to_string(),
                        tally.skipped.to_string(),
                        tally.worst_slack.map(fmt_sig).unwrap_or_default(),
                    ])?;
                }
            }
            let table = t.finish()?;
            // violations still need to be replayable from CSV runs
            for s in &summaries {
                for v in &s.violations {
                    let _ = writeln!(
                        err,
                        "violation: {}",
                        serde_json::to_string(v).expect("serializes")
                    );
                }
            }
            table
        }
    };
    Ok(Outcome {
        text,
        code: u8::from(!passed),
    })
}

fn dispatch(cli: &Cli, err: &mut dyn Write) -> Result<Outcome, CliError> {
    let cfg = RunConfig::from_common(&cli.common)?;
    match &cli.command {
        Command::Validate { channel } => cmd_validate(channel),
        Command::Info { channel, prior } => cmd_info(&cfg, channel, prior),
        Command::Region(a) => cmd_region(&cfg, a),
        Command::Simulate(a) => cmd_simulate(&cfg, a),
        Command::Check(a) => cmd_check(&cfg, a, err),
    }
}

/// Parses `args` (program name first), runs the command and returns the exit code.
pub fn run<I, A>(args: I, out: &mut dyn Write, err: &mut dyn Write) -> u8
where
    I: IntoIterator<Item = A>,
    A: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { 2 } else { 0 };
            let text = e.render().to_string();
            let _ = if code == 0 {
                write!(out, "{text}")
            } else {
                write!(err, "{text}")
            };
            return code;
        }
    };
    let outcome = match dispatch(&cli, err) {
        Ok(o) => o,
        Err(e) => {
            let _ = writeln!(err, "error: {}", e.message());
            return e.exit_code();
        }
    };
    let written = match &cli.common.out {
        Some(path) => {
            std::fs::write(path, &outcome.text).map_err(|e| format!("{}: {e}", path.display()))
        }
        None => out
            .write_all(outcome.text.as_bytes())
            .map_err(|e| e.to_string()),
    };
    if let Err(e) = written {
        let _ = writeln!(err, "error: {e}");
        return 2;
    }
    outcome.code
}

pub fn main() -> ExitCode {
    let code = run(
        std::env::args_os(),
        &mut std::io::stdout().lock(),
        &mut std::io::stderr().lock(),
    );
    ExitCode::from(code)
}
