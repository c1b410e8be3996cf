//! Command-line front end.
//!
//! Exit codes: 0 success, 1 runtime failure, 2 usage error.

mod config;

use std::ffi::OsString;
use std::fmt::Write as _;
use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use clap::{Args, CommandFactory, Parser, Subcommand};

use crate::analysis::compare_high_freq;
use crate::engine::{plus_x_trajectory, EngineConfig};
use crate::error::{Error, Result};
use crate::heom::{pair_distance, solve_heom, HeomConfig};
use crate::measures::pairs::{pair_scan, PairFamily};
use crate::measures::{evaluate, Engine, Measure};
use crate::qcore::{plus_x_pair, SystemParams, DEFAULT_OMEGA0};
use crate::rwa::{solve_g_auto, IntegratorConfig};
use crate::sweep::{
    figure_dataset, format_g9, run_sweep, write_csv, write_meta, Axis, Figure, FigureOptions,
    Param, RunOptions, SweepSpec,
};

pub use config::{parse as parse_config, Entry as ConfigEntry};

pub const EXIT_OK: i32 = 0;
pub const EXIT_FAILURE: i32 = 1;
pub const EXIT_USAGE: i32 = 2;

#[derive(Debug, Parser)]
#[command(
    name = "nmqsim",
    version,
    about = "Driven qubit in a Lorentzian bath: dynamics and non-Markovianity"
)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Trace-distance trajectory of the |+-x> pair, written as CSV.
    Traj(TrajArgs),
    /// BLP and largest-revival measures at one parameter point.
    Measure(MeasureArgs),
    /// Grid sweep over one or more parameter axes.
    Sweep(SweepArgs),
    /// Dataset for one of the figures (fig1..fig4).
    Figure(FigureArgs),
    /// Scan antipodal initial-state pairs.
    Pairs(PairsArgs),
    /// Compare the driven system with its high-frequency static equivalent.
    #[command(name = "hf-check")]
    HfCheck(HfArgs),
}

impl Command {
    pub fn name(&self) -> &'static str {
        match self {
            Command::Traj(_) => "traj",
            Command::Measure(_) => "measure",
            Command::Sweep(_) => "sweep",
            Command::Figure(_) => "figure",
            Command::Pairs(_) => "pairs",
            Command::HfCheck(_) => "hf-check",
        }
    }

    pub fn common(&self) -> &Common {
        match self {
            Command::Traj(a) => &a.common,
            Command::Measure(a) => &a.common,
            Command::Sweep(a) => &a.common,
            Command::Figure(a) => &a.common,
            Command::Pairs(a) => &a.common,
            Command::HfCheck(a) => &a.common,
        }
    }
}

/// Flags shared by every subcommand. All values are dimensionless: energies
/// in units of the bath width lambda, times as tau = lambda t.
#[derive(Debug, Clone, Args)]
pub struct Common {
    /// Dynamics engine: rwa or heom.
    #[arg(long, default_value = "rwa")]
    pub engine: Engine,
    #[arg(long, default_value_t = 1.0)]
    pub gamma0: f64,
    #[arg(long, default_value_t = 0.0)]
    pub delta: f64,
    #[arg(long = "omega-d", default_value_t = 0.0)]
    pub omega_d: f64,
    #[arg(long, default_value_t = DEFAULT_OMEGA0)]
    pub omega0: f64,
    /// Hierarchy truncation depth (heom only).
    #[arg(long = "trunc-n", default_value_t = crate::heom::DEFAULT_DEPTH)]
    pub trunc_n: usize,
    #[arg(long = "tau-max")]
    pub tau_max: Option<f64>,
    #[arg(long)]
    pub dtau: Option<f64>,
    /// Worker threads (0 = all cores).
    #[arg(long, env = "NMQSIM_WORKERS", default_value_t = 0)]
    pub workers: usize,
    /// Output file (directory for `figure`).
    #[arg(long)]
    pub out: Option<PathBuf>,
    /// Config file of `key = value` lines; command-line flags win.
    #[arg(long)]
    pub config: Option<PathBuf>,
    /// Continue an interrupted sweep from its checkpoint.
    #[arg(long)]
    pub resume: bool,
    /// Seed for random pair families.
    #[arg(long)]
    pub seed: Option<u64>,
    /// Suppress progress messages.
    #[arg(long, short)]
    pub quiet: bool,
    /// Stop a sweep after this many new points (testing hook).
    #[arg(long = "stop-after", hide = true)]
    pub stop_after: Option<usize>,
}

impl Common {
    pub fn params(&self) -> Result<SystemParams> {
        SystemParams::new(self.gamma0, self.delta, self.omega_d, self.omega0)
    }

    pub fn engine_config(&self) -> Result<EngineConfig> {
        let mut cfg = match self.engine {
            Engine::Rwa => EngineConfig::Rwa(IntegratorConfig::default()),
            Engine::Heom => EngineConfig::Heom(HeomConfig {
                depth: self.trunc_n,
                ..Default::default()
            }),
        };
        cfg.set_horizon(self.tau_max, self.dtau);
        cfg.validate()?;
        Ok(cfg)
    }

    fn run_options(&self, checkpoint: Option<PathBuf>) -> RunOptions {
        RunOptions {
            workers: self.workers,
            checkpoint,
            resume: self.resume,
            stop_after: self.stop_after,
            progress: !self.quiet,
        }
    }
}

/// `blp`, `lr` or `all`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct MeasureSel(pub Option<Measure>);

impl MeasureSel {
    pub fn list(&self) -> Vec<Measure> {
        self.0.map_or_else(|| Measure::ALL.to_vec(), |m| vec![m])
    }
}

impl FromStr for MeasureSel {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        if s.trim().eq_ignore_ascii_case("all") {
            Ok(MeasureSel(None))
        } else {
            Ok(MeasureSel(Some(s.parse()?)))
        }
    }
}

/// `name:min:max:step`, e.g. `delta:0:20:0.5`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AxisArg(pub Axis);

impl FromStr for AxisArg {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let parts: Vec<&str> = s.split(':').collect();
        let bad = || Error::InvalidParams(format!("axis `{s}` is not name:min:max:step"));
        if parts.len() != 4 {
            return Err(bad());
        }
        let num = |x: &str| x.trim().parse::<f64>().map_err(|_| bad());
        let axis = Axis::new(
            parts[0].parse::<Param>()?,
            num(parts[1])?,
            num(parts[2])?,
            num(parts[3])?,
        );
        axis.validate()?;
        Ok(AxisArg(axis))
    }
}

#[derive(Debug, Clone, Args)]
#[command(allow_negative_numbers = true)]
pub struct TrajArgs {
    #[command(flatten)]
    pub common: Common,
}

#[derive(Debug, Clone, Args)]
#[command(allow_negative_numbers = true)]
pub struct MeasureArgs {
    #[command(flatten)]
    pub common: Common,
    /// blp, lr or all.
    #[arg(long, default_value = "all")]
    pub measure: MeasureSel,
}

#[derive(Debug, Clone, Args)]
#[command(allow_negative_numbers = true)]
pub struct SweepArgs {
    #[command(flatten)]
    pub common: Common,
    /// Grid axis `name:min:max:step`; repeat for more axes, the last varies fastest.
    #[arg(long, required = true)]
    pub axis: Vec<AxisArg>,
    #[arg(long, default_value = "all")]
    pub measure: MeasureSel,
    /// Also report values relative to the best static value at each coupling.
    #[arg(long)]
    pub relative: bool,
}

#[derive(Debug, Clone, Args)]
#[command(allow_negative_numbers = true)]
pub struct FigureArgs {
    /// fig1, fig2, fig3 or fig4.
    pub name: Figure,
    #[command(flatten)]
    pub common: Common,
    /// Points per grid axis (default depends on figure and engine).
    #[arg(long)]
    pub points: Option<usize>,
    /// Comma-separated couplings for fig2/fig3/fig4.
    #[arg(long = "gamma0-list", value_delimiter = ',')]
    pub gamma0_list: Option<Vec<f64>>,
}

#[derive(Debug, Clone, Args)]
#[command(allow_negative_numbers = true)]
pub struct PairsArgs {
    #[command(flatten)]
    pub common: Common,
    #[arg(long, default_value_t = 12)]
    pub polar: usize,
    #[arg(long, default_value_t = 12)]
    pub azimuthal: usize,
    /// Use this many random pairs (seeded by --seed) instead of the grid.
    #[arg(long)]
    pub random: Option<usize>,
    #[arg(long = "rank-by", default_value = "lr")]
    pub rank_by: Measure,
}

#[derive(Debug, Clone, Args)]
#[command(allow_negative_numbers = true)]
pub struct HfArgs {
    #[command(flatten)]
    pub common: Common,
    /// Keep Delta/omega_d fixed at this ratio and scan --omega-d-list.
    #[arg(long)]
    pub ratio: Option<f64>,
    #[arg(
        long = "omega-d-list",
        value_delimiter = ',',
        default_value = "5,10,20,40"
    )]
    pub omega_d_list: Vec<f64>,
}

fn usage_error(e: &Error) -> bool {
    matches!(e, Error::InvalidParams(_) | Error::Config { .. })
}

/// Subcommand and `--config` path, found without a full parse so that the
/// file may supply otherwise required flags.
fn config_request(argv: &[OsString]) -> Option<(String, PathBuf)> {
    let root = Cli::command();
    let sub = argv
        .iter()
        .skip(1)
        .filter_map(|a| a.to_str())
        .find(|a| root.find_subcommand(a).is_some())?
        .to_owned();
    let mut it = argv.iter().skip(1);
    while let Some(a) = it.next() {
        let s = a.to_str()?;
        if s == "--config" {
            return it.next().map(|p| (sub.clone(), PathBuf::from(p)));
        }
        if let Some(p) = s.strip_prefix("--config=") {
            return Some((sub, PathBuf::from(p)));
        }
    }
    None
}

/// Parse `args` (including the program name), run, and return the exit code.
pub fn run<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString>,
{
    let mut argv: Vec<OsString> = args.into_iter().map(Into::into).collect();
    if let Some((sub, path)) = config_request(&argv) {
        match config::merge(&Cli::command(), &argv, &sub, &path) {
            Ok(m) => argv = m,
            Err(e) => {
                eprintln!("error: {e}");
                return EXIT_USAGE;
            }
        }
    }
    let cli = match Cli::try_parse_from(&argv) {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return e.exit_code();
        }
    };
    let mut stdout = std::io::stdout().lock();
    match execute(&cli.command, &mut stdout) {
        Ok(()) => EXIT_OK,
        Err(e) => {
            let _ = stdout.flush();
            eprintln!("error: {e}");
            if usage_error(&e) {
                EXIT_USAGE
            } else {
                EXIT_FAILURE
            }
        }
    }
}

fn emit(out: &mut dyn Write, path: Option<&Path>, text: &str) -> Result<()> {
    match path {
        Some(p) => {
            if let Some(dir) = p.parent().filter(|d| !d.as_os_str().is_empty()) {
                fs::create_dir_all(dir)?;
            }
            fs::write(p, text)?;
        }
        None => out.write_all(text.as_bytes())?,
    }
    Ok(())
}

pub fn execute(cmd: &Command, out: &mut dyn Write) -> Result<()> {
    match cmd {
        Command::Traj(a) => cmd_traj(a, out),
        Command::Measure(a) => cmd_measure(a, out),
        Command::Sweep(a) => cmd_sweep(a, out),
        Command::Figure(a) => cmd_figure(a, out),
        Command::Pairs(a) => cmd_pairs(a, out),
        Command::HfCheck(a) => cmd_hf_check(a, out),
    }?;
    out.flush()?;
    Ok(())
}

fn cmd_traj(a: &TrajArgs, out: &mut dyn Write) -> Result<()> {
    let params = a.common.params()?;
    let cfg = a.common.engine_config()?;
    let (p, m) = plus_x_pair();
    let mut text = String::new();
    match cfg {
        EngineConfig::Rwa(c) => {
            let amp = solve_g_auto(&params, &c)?;
            let d = amp.distance(&p, &m)?;
            text.push_str("tau,D,re_G,im_G\n");
            for i in 0..amp.len() {
                let _ = writeln!(
                    text,
                    "{},{},{},{}",
                    format_g9(amp.tau[i]),
                    format_g9(d[i]),
                    format_g9(amp.g[i].re),
                    format_g9(amp.g[i].im)
                );
            }
        }
        EngineConfig::Heom(c) => {
            let states = solve_heom(&p, &params, &c)?;
            let (d, tau) = pair_distance(&p, &m, &params, &c)?;
            text.push_str("tau,D,rho00_re,rho01_re,rho01_im,min_eig\n");
            for i in 0..tau.len() {
                let r = &states.rho[i];
                let (lo, _) = r.hermitian_eigenvalues();
                let _ = writeln!(
                    text,
                    "{},{},{},{},{},{}",
                    format_g9(tau[i]),
                    format_g9(d[i]),
                    format_g9(r.get(0, 0).re),
                    format_g9(r.get(0, 1).re),
                    format_g9(r.get(0, 1).im),
                    format_g9(lo)
                );
            }
        }
    }
    emit(out, a.common.out.as_deref(), &text)
}

fn cmd_measure(a: &MeasureArgs, out: &mut dyn Write) -> Result<()> {
    let params = a.common.params()?;
    let cfg = a.common.engine_config()?;
    let r = evaluate(&plus_x_trajectory(&cfg, &params)?)?;
    let mut text = String::new();
    let _ = writeln!(text, "engine={}", cfg.engine());
    let _ = writeln!(text, "gamma0={}", format_g9(params.gamma0));
    let _ = writeln!(text, "delta={}", format_g9(params.delta));
    let _ = writeln!(text, "omega_d={}", format_g9(params.omega_d));
    let _ = writeln!(text, "omega0={}", format_g9(params.omega0));
    for m in a.measure.list() {
        match m {
            Measure::Blp => {
                let _ = writeln!(text, "n_blp={}", format_g9(r.n_blp));
            }
            Measure::Lr => {
                let _ = writeln!(text, "n_lr={}", format_g9(r.n_lr));
                let _ = writeln!(text, "lr_tau_low={}", format_g9(r.window.0));
                let _ = writeln!(text, "lr_tau_high={}", format_g9(r.window.1));
            }
        }
    }
    let _ = writeln!(text, "horizon={}", format_g9(r.horizon));
    let _ = writeln!(
        text,
        "trunc_n={}",
        cfg.trunc_n()
            .map_or_else(|| "null".into(), |n| n.to_string())
    );
    let _ = writeln!(text, "state_pair=|+x>,|-x>");
    emit(out, a.common.out.as_deref(), &text)
}

fn checkpoint_for(data: &Path) -> PathBuf {
    let mut s = data.as_os_str().to_owned();
    s.push(".ckpt");
    PathBuf::from(s)
}

fn cmd_sweep(a: &SweepArgs, out: &mut dyn Write) -> Result<()> {
    let c = &a.common;
    let mut spec = SweepSpec::new(
        c.engine_config()?,
        a.axis.iter().map(|x| x.0).collect(),
        c.params()?,
    );
    spec.measures = a.measure.list();
    spec.relative = a.relative;
    spec.validate()?;
    let data = c.out.clone().unwrap_or_else(|| PathBuf::from("sweep.csv"));
    if let Some(dir) = data.parent().filter(|d| !d.as_os_str().is_empty()) {
        fs::create_dir_all(dir)?;
    }
    let result = run_sweep(&spec, &c.run_options(Some(checkpoint_for(&data))))?;
    write_csv(&data, &result)?;
    let meta = write_meta(&data, &result, &[])?;
    let _ = writeln!(out, "records={}", result.records.len());
    let _ = writeln!(out, "errors={}", result.errors());
    let _ = writeln!(out, "data={}", data.display());
    let _ = writeln!(out, "meta={}", meta.display());
    Ok(())
}

fn cmd_figure(a: &FigureArgs, out: &mut dyn Write) -> Result<()> {
    let c = &a.common;
    let mut opts = FigureOptions::new(
        c.engine_config()?,
        c.out.clone().unwrap_or_else(|| PathBuf::from("figures")),
    );
    opts.omega0 = c.omega0;
    opts.points = a.points;
    opts.gamma0s = a.gamma0_list.clone();
    opts.run = c.run_options(None);
    if opts.points.map_or(false, |n| n < 2) {
        return Err(Error::InvalidParams("--points must be at least 2".into()));
    }
    let result = figure_dataset(a.name, &opts)?;
    for f in &result.files {
        let _ = writeln!(out, "file={}", f.display());
    }
    for (g, m, v) in &result.m_max {
        let _ = writeln!(
            out,
            "m_max.{m}.{}={}",
            format_g9(*g),
            v.map_or_else(|| "null".into(), format_g9)
        );
    }
    Ok(())
}

fn cmd_pairs(a: &PairsArgs, out: &mut dyn Write) -> Result<()> {
    let c = &a.common;
    let family = match a.random {
        Some(count) => PairFamily::Random {
            count,
            seed: c.seed.unwrap_or(0),
        },
        None => PairFamily::Grid {
            polar: a.polar,
            azimuthal: a.azimuthal,
        },
    };
    let scan = pair_scan(&c.engine_config()?, &c.params()?, &family, a.rank_by)?;
    let b = &scan.best;
    let mut text = String::new();
    let _ = writeln!(text, "pairs={}", scan.all.len());
    if let PairFamily::Random { seed, .. } = family {
        let _ = writeln!(text, "seed={seed}");
    }
    let _ = writeln!(text, "ranked_by={}", scan.ranked_by);
    let _ = writeln!(text, "best_theta={}", format_g9(b.pair.theta));
    let _ = writeln!(text, "best_phi={}", format_g9(b.pair.phi));
    let _ = writeln!(text, "n_blp={}", format_g9(b.result.n_blp));
    let _ = writeln!(text, "n_lr={}", format_g9(b.result.n_lr));
    out.write_all(text.as_bytes())?;
    if let Some(path) = &c.out {
        let mut csv = String::from("theta,phi,n_blp,n_lr\n");
        for s in &scan.all {
            let _ = writeln!(
                csv,
                "{},{},{},{}",
                format_g9(s.pair.theta),
                format_g9(s.pair.phi),
                format_g9(s.result.n_blp),
                format_g9(s.result.n_lr)
            );
        }
        emit(out, Some(path), &csv)?;
    }
    Ok(())
}

fn cmd_hf_check(a: &HfArgs, out: &mut dyn Write) -> Result<()> {
    let c = &a.common;
    let cfg = c.engine_config()?;
    let base = c.params()?;
    let points: Vec<SystemParams> = match a.ratio {
        Some(r) => a
            .omega_d_list
            .iter()
            .map(|&w| SystemParams::new(base.gamma0, r * w, w, base.omega0))
            .collect::<Result<_>>()?,
        None => vec![base],
    };
    let mut text = String::from(
        "gamma0,delta,omega_d,beta,gamma_eff,sup_gap,n_lr_driven,n_lr_equiv,n_lr_gap\n",
    );
    for p in &points {
        let r = compare_high_freq(&cfg, p)?;
        let _ = writeln!(
            text,
            "{},{},{},{},{},{},{},{},{}",
            format_g9(p.gamma0),
            format_g9(p.delta),
            format_g9(p.omega_d),
            format_g9(r.map.beta),
            format_g9(r.map.gamma_eff),
            format_g9(r.sup_gap),
            format_g9(r.driven.n_lr),
            format_g9(r.equivalent.n_lr),
            format_g9(r.n_lr_gap())
        );
    }
    emit(out, c.out.as_deref(), &text)
}
