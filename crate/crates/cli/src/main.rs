//! `bscfb`: exponent tables, the p0(p) curve, exact oracle rows and
//! protocol simulations for the BSC with noisy feedback.

mod table;

use std::fs::File;
use std::io::{self, BufWriter, Write};
use std::path::PathBuf;
use std::process::ExitCode;

use bsc_feedback::codes::{make_almost_simplex, make_simplex3, Codebook, DEFAULT_SLACK_FRACTION};
use bsc_feedback::exponents::{exponent_active, exponent_f1, threshold_p0, ChannelParams};
use bsc_feedback::montecarlo::{estimate_with_setup, slope_ladder, Interval, SimulationSummary};
use bsc_feedback::oracle::{
    event_a1_probability, lattice_offset, lemma_exponent, lemma_point_probability,
    lemma_tail_probability,
};
use bsc_feedback::schemes::{write_transcripts, CodeKind, Scheme, SchemeParams, SchemeSetup};
use clap::{Args, Parser, Subcommand, ValueEnum};
use table::{Cell, Table};

#[derive(Parser)]
#[command(version, about, long_about = None)]
struct Cli {
    #[command(subcommand)]
    command: Command,

    /// Output format
    #[arg(long, value_enum, default_value_t = Format::Csv, global = true)]
    format: Format,

    /// Write to this file instead of stdout
    #[arg(long, global = true)]
    output: Option<PathBuf>,
}

#[derive(Clone, Copy, ValueEnum)]
enum Format {
    Csv,
    Json,
}

#[derive(Subcommand)]
enum Command {
    /// E, E2, F, F1 with its optimizer, p0 and the active-feedback exponent
    Exponent {
        /// Forward crossover probability
        #[arg(long)]
        p: f64,
        /// Feedback crossover probability (0 = noiseless feedback)
        #[arg(long, default_value_t = 0.0)]
        p1: f64,
    },
    /// Feedback threshold p0(p) over a grid of p
    P0Sweep {
        /// Explicit p values; defaults to an even grid on (0, 1/2)
        #[arg(long, value_delimiter = ',')]
        p: Vec<f64>,
        /// Grid size when --p is not given
        #[arg(long, default_value_t = 49)]
        points: usize,
    },
    /// Exact probabilities of the distance-offset event for the simplex triple
    Lemma {
        /// Block lengths (multiples of 3)
        #[arg(long, value_delimiter = ',', required = true)]
        m: Vec<usize>,
        /// Offset of d2 from d1, in units of 2m/3
        #[arg(long, default_value_t = 0.0, allow_negative_numbers = true)]
        t: f64,
        /// Offset of d3 from d1, in units of 2m/3
        #[arg(long, default_value_t = 0.0, allow_negative_numbers = true)]
        t1: f64,
        #[arg(long)]
        p: f64,
        /// Joint tail event instead of the point event
        #[arg(long)]
        tail: bool,
    },
    /// Exact probability of the pair-mismatch event under noisy feedback
    Oracle {
        /// Effective block lengths (multiples of 3)
        #[arg(long, value_delimiter = ',', required = true)]
        m: Vec<usize>,
        #[arg(long)]
        t: f64,
        #[arg(long)]
        p: f64,
        #[arg(long)]
        p1: f64,
    },
    /// Monte Carlo error rates by category
    Simulate {
        #[command(flatten)]
        sim: SimArgs,
        /// Blocklength
        #[arg(long)]
        n: usize,
        /// Also write every trial transcript as JSON Lines
        #[arg(long)]
        transcripts: Option<PathBuf>,
    },
    /// Empirical -ln(Pe)/n along a ladder of blocklengths
    SlopeLadder {
        #[command(flatten)]
        sim: SimArgs,
        /// Blocklengths
        #[arg(long, value_delimiter = ',', required = true)]
        n: Vec<usize>,
    },
    /// Build and print a codebook, one word per line
    Codebook {
        /// Number of words
        #[arg(long = "M", alias = "messages")]
        messages: usize,
        /// Codeword length
        #[arg(long)]
        n: usize,
        #[arg(long, value_enum, default_value_t = CodeArg::AlmostSimplex)]
        kind: CodeArg,
        #[arg(long, default_value_t = DEFAULT_SLACK_FRACTION)]
        slack: f64,
        #[arg(long, default_value_t = 0)]
        seed: u64,
    },
}

#[derive(Args)]
struct SimArgs {
    #[arg(long, value_enum)]
    scheme: SchemeArg,
    /// Number of messages
    #[arg(long = "M", alias = "messages", default_value_t = 3)]
    messages: usize,
    /// Forward crossover probability
    #[arg(long)]
    p: f64,
    /// Feedback crossover probability
    #[arg(long, default_value_t = 0.0)]
    p1: f64,
    /// Early-decision threshold fraction (default: optimal t*)
    #[arg(long)]
    t: Option<f64>,
    /// Phase-I fraction (default: the exponent-optimal value)
    #[arg(long)]
    gamma: Option<f64>,
    /// Feedback report fraction of the active scheme (default: balanced value)
    #[arg(long)]
    gamma1: Option<f64>,
    /// Number of Monte Carlo trials
    #[arg(long)]
    trials: u64,
    /// Seed of the channel noise and message choice
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Phase-I codebook family
    #[arg(long, value_enum, default_value_t = CodeArg::AlmostSimplex)]
    code: CodeArg,
    /// Allowed deviation of pairwise distances from half the length, as a fraction of it
    #[arg(long, default_value_t = DEFAULT_SLACK_FRACTION)]
    slack: f64,
    /// Seed of the codebooks
    #[arg(long, default_value_t = 0)]
    code_seed: u64,
}

#[derive(Clone, Copy, ValueEnum)]
enum SchemeArg {
    Baseline,
    NoiselessSwitch,
    NoisySwitch,
    Active,
}

impl From<SchemeArg> for Scheme {
    fn from(s: SchemeArg) -> Self {
        match s {
            SchemeArg::Baseline => Scheme::Baseline,
            SchemeArg::NoiselessSwitch => Scheme::NoiselessSwitch,
            SchemeArg::NoisySwitch => Scheme::NoisySwitch,
            SchemeArg::Active => Scheme::Active,
        }
    }
}

#[derive(Clone, Copy, ValueEnum)]
enum CodeArg {
    AlmostSimplex,
    Simplex3,
    Complementary,
}

impl From<CodeArg> for CodeKind {
    fn from(c: CodeArg) -> Self {
        match c {
            CodeArg::AlmostSimplex => CodeKind::AlmostSimplex,
            CodeArg::Simplex3 => CodeKind::Simplex3,
            CodeArg::Complementary => CodeKind::Complementary,
        }
    }
}

#[derive(Debug)]
enum CliError {
    Lib(bsc_feedback::Error),
    Usage(String),
    Io(io::Error),
}

impl From<bsc_feedback::Error> for CliError {
    fn from(e: bsc_feedback::Error) -> Self {
        CliError::Lib(e)
    }
}

impl From<io::Error> for CliError {
    fn from(e: io::Error) -> Self {
        CliError::Io(e)
    }
}

impl From<csv::Error> for CliError {
    fn from(e: csv::Error) -> Self {
        CliError::Io(e.into())
    }
}

impl From<serde_json::Error> for CliError {
    fn from(e: serde_json::Error) -> Self {
        CliError::Io(e.into())
    }
}

impl CliError {
    fn exit_code(&self) -> u8 {
        use bsc_feedback::Error;
        match self {
            CliError::Usage(_) => 2,
            CliError::Lib(Error::Domain(_) | Error::Lattice(_) | Error::Parse(_)) => 2,
            CliError::Lib(Error::Numerical(_)) => 3,
            CliError::Lib(Error::Codebook(_)) => 4,
            CliError::Io(_) => 1,
        }
    }
}

impl std::fmt::Display for CliError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            CliError::Lib(e) => write!(f, "{e}"),
            CliError::Usage(s) => f.write_str(s),
            CliError::Io(e) => write!(f, "i/o error: {e}"),
        }
    }
}

type CliResult<T> = Result<T, CliError>;

/// What a command produced.
enum Report {
    Rows(Table),
    Summary(Box<SimulationSummary>),
    Codebook(Codebook),
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(&cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code())
        }
    }
}

fn run(cli: &Cli) -> CliResult<()> {
    let report = match &cli.command {
        Command::Exponent { p, p1 } => cmd_exponent(*p, *p1)?,
        Command::P0Sweep { p, points } => cmd_p0_sweep(p, *points)?,
        Command::Lemma { m, t, t1, p, tail } => cmd_lemma(m, *t, *t1, *p, *tail)?,
        Command::Oracle { m, t, p, p1 } => cmd_oracle(m, *t, *p, *p1)?,
        Command::Simulate {
            sim,
            n,
            transcripts,
        } => cmd_simulate(sim, *n, transcripts.as_ref())?,
        Command::SlopeLadder { sim, n } => cmd_slope_ladder(sim, n)?,
        Command::Codebook {
            messages,
            n,
            kind,
            slack,
            seed,
        } => cmd_codebook(*messages, *n, *kind, *slack, *seed)?,
    };
    let mut out: Box<dyn Write> = match &cli.output {
        Some(path) => Box::new(BufWriter::new(File::create(path)?)),
        None => Box::new(BufWriter::new(io::stdout().lock())),
    };
    emit(&report, cli.format, &mut out)?;
    out.flush()?;
    Ok(())
}

fn emit(report: &Report, format: Format, out: &mut dyn Write) -> CliResult<()> {
    match (report, format) {
        (Report::Rows(t), Format::Csv) => t.write_csv(out)?,
        (Report::Rows(t), Format::Json) => {
            serde_json::to_writer_pretty(&mut *out, &t.to_json())?;
            writeln!(out)?;
        }
        (Report::Summary(s), Format::Csv) => summary_table(s).write_csv(out)?,
        (Report::Summary(s), Format::Json) => {
            serde_json::to_writer_pretty(&mut *out, s)?;
            writeln!(out)?;
        }
        (Report::Codebook(c), Format::Csv) => out.write_all(c.to_text().as_bytes())?,
        (Report::Codebook(c), Format::Json) => {
            serde_json::to_writer_pretty(&mut *out, c)?;
            writeln!(out)?;
        }
    }
    Ok(())
}

fn cmd_exponent(p: f64, p1: f64) -> CliResult<Report> {
    let params = ChannelParams::new(p, p1)?;
    let r = exponent_f1(&params)?;
    let active = if p1 > 0.0 && p1 < 0.5 {
        Some(exponent_active(p, p1)?)
    } else {
        None
    };
    let mut t = Table::new(&[
        "p",
        "p1",
        "E_nats",
        "E2_nats",
        "F_nats",
        "F1_nats",
        "t_star",
        "gamma_star",
        "p0",
        "G1_at_t_star_nats",
        "G2_at_t_star_nats",
        "F_over_E",
        "active_exponent_nats",
        "active_gamma",
        "active_gamma1",
    ]);
    t.push(vec![
        r.p.into(),
        r.p1.into(),
        r.e.into(),
        r.e2.into(),
        r.f.into(),
        r.f1.into(),
        r.t_star.into(),
        r.gamma_star.into(),
        r.p0.into(),
        r.g1_at_t_star.into(),
        r.g2_at_t_star.into(),
        (r.f / r.e).into(),
        active.map(|a| a.exponent).into(),
        active.map(|a| a.gamma).into(),
        active.map(|a| a.gamma1).into(),
    ]);
    Ok(Report::Rows(t))
}

fn cmd_p0_sweep(ps: &[f64], points: usize) -> CliResult<Report> {
    let grid: Vec<f64> = if ps.is_empty() {
        if points == 0 {
            return Err(CliError::Usage("--points must be positive".into()));
        }
        (1..=points)
            .map(|i| 0.5 * i as f64 / (points + 1) as f64)
            .collect()
    } else {
        ps.to_vec()
    };
    for &p in &grid {
        if !(p > 0.0 && p < 0.5) {
            return Err(CliError::Usage(format!("p = {p} outside (0, 1/2)")));
        }
    }
    let mut t = Table::new(&["p", "p0", "p0_over_p"]);
    for p in grid {
        let p0 = threshold_p0(p)?;
        t.push(vec![p.into(), p0.into(), (p0 / p).into()]);
    }
    Ok(Report::Rows(t))
}

fn cmd_lemma(ms: &[usize], t: f64, t1: f64, p: f64, tail: bool) -> CliResult<Report> {
    for &m in ms {
        lattice_offset(t, m)?;
        lattice_offset(t1, m)?;
    }
    let rows = ms
        .iter()
        .map(|&m| {
            if tail {
                lemma_tail_probability(m, t, t1, p)
            } else {
                lemma_point_probability(m, t, t1, p)
            }
        })
        .collect::<Result<Vec<_>, _>>()?;
    // offsets with no admissible lattice point have probability zero
    let analytic = match lemma_exponent(t, t1, p) {
        Err(bsc_feedback::Error::Domain(_)) if tail => None,
        Err(bsc_feedback::Error::Domain(_)) => Some(f64::INFINITY),
        other => Some(other?),
    };
    let mut table = Table::new(&[
        "m",
        "t",
        "t1",
        "p",
        "event",
        "log_p",
        "exponent_nats",
        "analytic_nats",
        "gap_nats",
        "feasible",
    ]);
    for r in rows {
        table.push(vec![
            r.m.into(),
            t.into(),
            t1.into(),
            p.into(),
            if tail { "tail" } else { "point" }.into(),
            r.log_p.into(),
            r.normalized_exponent.into(),
            analytic.into(),
            analytic.map(|a| gap(r.normalized_exponent, a)).into(),
            r.feasible.into(),
        ]);
    }
    Ok(Report::Rows(table))
}

fn cmd_oracle(ms: &[usize], t: f64, p: f64, p1: f64) -> CliResult<Report> {
    for &m in ms {
        if m == 0 || !m.is_multiple_of(3) {
            return Err(CliError::Usage(format!(
                "m = {m} is not a positive multiple of 3"
            )));
        }
    }
    let g2 = bsc_feedback::exponents::exponent_g2(t, p, p1)?;
    let mut table = Table::new(&[
        "m",
        "t",
        "p",
        "p1",
        "log_p",
        "exponent_nats",
        "G2_nats",
        "gap_nats",
        "feasible",
    ]);
    for &m in ms {
        let r = event_a1_probability(m, t, p, p1)?;
        table.push(vec![
            m.into(),
            t.into(),
            p.into(),
            p1.into(),
            r.log_p.into(),
            r.normalized_exponent.into(),
            g2.into(),
            gap(r.normalized_exponent, g2).into(),
            r.feasible.into(),
        ]);
    }
    Ok(Report::Rows(table))
}

/// `|x - y|`, zero when both are the same infinity.
fn gap(x: f64, y: f64) -> f64 {
    if x == y {
        0.0
    } else {
        (x - y).abs()
    }
}

/// Fills in exponent-optimal fractions for whatever was not given.
fn scheme_params(sim: &SimArgs, n: usize) -> CliResult<SchemeParams> {
    let scheme: Scheme = sim.scheme.into();
    let mut sp = SchemeParams::new(n, sim.messages, sim.p);
    sp.p1 = sim.p1;
    sp.slack_fraction = sim.slack;
    sp.seed = sim.code_seed;
    sp.code = sim.code.into();
    let need = |what: &str| {
        CliError::Usage(format!(
            "--{what} has no exponent-optimal default for p = {}, p1 = {}; pass it explicitly",
            sim.p, sim.p1
        ))
    };
    match scheme {
        Scheme::Baseline => {}
        Scheme::NoiselessSwitch | Scheme::NoisySwitch => {
            let p1 = if scheme == Scheme::NoiselessSwitch {
                0.0
            } else {
                sim.p1
            };
            // beyond p0 the optimal fraction leaves (0, 1) and there is no default
            let optimal = ChannelParams::new(sim.p, p1)
                .and_then(|c| exponent_f1(&c))
                .ok()
                .filter(|r| r.gamma_star < 1.0);
            sp.gamma = match (sim.gamma, &optimal) {
                (Some(g), _) => g,
                (None, Some(r)) => r.gamma_star,
                (None, None) => return Err(need("gamma")),
            };
            sp.t = match (sim.t, &optimal) {
                (Some(t), _) => t,
                (None, Some(r)) => r.t_star,
                (None, None) => 0.0,
            };
        }
        Scheme::Active => {
            let balanced = exponent_active(sim.p, sim.p1).ok();
            sp.gamma = sim
                .gamma
                .or(balanced.map(|a| a.gamma))
                .ok_or_else(|| need("gamma"))?;
            sp.gamma1 = sim
                .gamma1
                .or(balanced.map(|a| a.gamma1))
                .ok_or_else(|| need("gamma1"))?;
        }
    }
    sp.validate(scheme)?;
    Ok(sp)
}

fn cmd_simulate(sim: &SimArgs, n: usize, transcripts: Option<&PathBuf>) -> CliResult<Report> {
    if sim.trials == 0 {
        return Err(CliError::Usage("--trials must be positive".into()));
    }
    let sp = scheme_params(sim, n)?;
    let setup = SchemeSetup::new(sim.scheme.into(), sp)?;
    let summary = estimate_with_setup(&setup, sim.trials, sim.seed)?;
    if let Some(path) = transcripts {
        let mut w = BufWriter::new(File::create(path)?);
        for i in 0..sim.trials {
            write_transcripts(&mut w, &[setup.run_trial(sim.seed, i)])?;
        }
        w.flush()?;
    }
    Ok(Report::Summary(Box::new(summary)))
}

fn summary_table(s: &SimulationSummary) -> Table {
    let mut t = Table::new(&[
        "scheme",
        "n",
        "M",
        "p",
        "p1",
        "gamma",
        "t",
        "gamma1",
        "trials",
        "seed",
        "errors_P1",
        "rate_P1",
        "rate_P1_low",
        "rate_P1_high",
        "errors_P2",
        "rate_P2",
        "rate_P2_low",
        "rate_P2_high",
        "errors_P2n",
        "rate_P2n",
        "rate_P2n_low",
        "rate_P2n_high",
        "errors_P3",
        "rate_P3",
        "rate_P3_low",
        "rate_P3_high",
        "errors_total",
        "rate_total",
        "rate_total_low",
        "rate_total_high",
    ]);
    let c = s.errors_by_category;
    let w = s.wilson_intervals;
    let mut row: Vec<Cell> = vec![
        s.scheme.name().into(),
        s.params.n.into(),
        s.params.messages.into(),
        s.params.p.into(),
        s.params.p1.into(),
        s.params.gamma.into(),
        s.params.t.into(),
        s.params.gamma1.into(),
        s.trials.into(),
        s.seed.into(),
    ];
    let mut block = |k: u64, iv: Interval| {
        row.extend([k.into(), iv.estimate.into(), iv.low.into(), iv.high.into()]);
    };
    block(c.p1, w.p1);
    block(c.p2, w.p2);
    block(c.p2n, w.p2n);
    block(c.p3, w.p3);
    block(s.total_errors, w.total);
    t.push(row);
    t
}

fn cmd_slope_ladder(sim: &SimArgs, ladder: &[usize]) -> CliResult<Report> {
    if sim.trials == 0 {
        return Err(CliError::Usage("--trials must be positive".into()));
    }
    // validate every rung before any simulation
    let base = scheme_params(sim, ladder[0])?;
    for &n in ladder {
        SchemeParams { n, ..base }.validate(sim.scheme.into())?;
    }
    let points = slope_ladder(sim.scheme.into(), &base, ladder, sim.trials, sim.seed)?;
    let mut t = Table::new(&[
        "scheme",
        "n",
        "trials",
        "errors",
        "error_rate",
        "slope_nats",
        "slope_low_nats",
        "slope_high_nats",
        "reliable",
    ]);
    let name = Scheme::from(sim.scheme).name();
    for pt in points {
        t.push(vec![
            name.into(),
            pt.n.into(),
            pt.trials.into(),
            pt.errors.into(),
            pt.error_rate.into(),
            pt.slope.into(),
            pt.slope_low.into(),
            pt.slope_high.into(),
            pt.reliable.into(),
        ]);
    }
    Ok(Report::Rows(t))
}

fn cmd_codebook(
    messages: usize,
    n: usize,
    kind: CodeArg,
    slack: f64,
    seed: u64,
) -> CliResult<Report> {
    let code = match kind {
        CodeArg::AlmostSimplex => make_almost_simplex(messages, n, slack, seed)?,
        CodeArg::Simplex3 => {
            if messages != 3 {
                return Err(CliError::Usage(
                    "the simplex triple has exactly 3 words".into(),
                ));
            }
            make_simplex3(n)?
        }
        CodeArg::Complementary => {
            if messages != 2 {
                return Err(CliError::Usage(
                    "the complementary pair has exactly 2 words".into(),
                ));
            }
            Codebook::complementary_pair(n)?
        }
    };
    Ok(Report::Codebook(code))
}
