//! Parameter-grid evaluation with checkpointed parallel execution.
//!
//! Grid points are independent tasks on a rayon pool. Finished points are
//! appended to a JSON-lines checkpoint through one locked writer, so an
//! interrupted sweep resumes without recomputing them. Records are always
//! returned in grid order, which makes the output independent of the worker
//! count.

mod figures;
mod output;
mod static_max;

use std::collections::BTreeMap;
use std::fmt;
use std::fs::{self, File, OpenOptions};
use std::io::{BufRead, BufReader, BufWriter, Write};
use std::path::{Path, PathBuf};
use std::str::FromStr;
use std::sync::atomic::{AtomicUsize, Ordering};
use std::sync::Mutex;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::engine::{measure_point, EngineConfig};
use crate::error::{Error, Result};
use crate::heom::convergence_check;
use crate::measures::{max_relative, n_relative, Engine, Measure};
use crate::qcore::SystemParams;

pub use figures::{figure_dataset, figure_specs, Figure, FigureOptions, FigureOutput};
pub use output::{
    format_g9, meta_path, read_csv_rows, render_csv, render_meta, write_csv, write_meta, CSV_HEADER,
};
pub use static_max::{static_max_table, StaticMax, StaticMaxTable, STATIC_DELTA_AXIS};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Param {
    Gamma0,
    Delta,
    OmegaD,
    Omega0,
}

impl Param {
    pub fn name(&self) -> &'static str {
        match self {
            Param::Gamma0 => "gamma0",
            Param::Delta => "delta",
            Param::OmegaD => "omega_d",
            Param::Omega0 => "omega0",
        }
    }

    pub fn set(&self, p: &mut SystemParams, value: f64) {
        match self {
            Param::Gamma0 => p.gamma0 = value,
            Param::Delta => p.delta = value,
            Param::OmegaD => p.omega_d = value,
            Param::Omega0 => p.omega0 = value,
        }
    }
}

impl fmt::Display for Param {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Param {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim().to_ascii_lowercase().replace('-', "_").as_str() {
            "gamma0" => Ok(Param::Gamma0),
            "delta" => Ok(Param::Delta),
            "omega_d" => Ok(Param::OmegaD),
            "omega0" => Ok(Param::Omega0),
            other => Err(Error::InvalidParams(format!(
                "unknown sweep parameter `{other}`"
            ))),
        }
    }
}

/// Evenly spaced values `min, min + step, ..., max`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Axis {
    pub param: Param,
    pub min: f64,
    pub max: f64,
    pub step: f64,
}

impl Axis {
    pub fn new(param: Param, min: f64, max: f64, step: f64) -> Self {
        Self {
            param,
            min,
            max,
            step,
        }
    }

    /// Axis with `points` values spanning `[min, max]`.
    pub fn with_points(param: Param, min: f64, max: f64, points: usize) -> Self {
        let step = if points > 1 {
            (max - min) / (points - 1) as f64
        } else {
            1.0
        };
        Self {
            param,
            min,
            max,
            step,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.step > 0.0)
            || !self.step.is_finite()
            || !(self.max >= self.min)
            || !self.min.is_finite()
            || !self.max.is_finite()
        {
            return Err(Error::InvalidParams(format!(
                "bad axis {}: min={} max={} step={}",
                self.param, self.min, self.max, self.step
            )));
        }
        Ok(())
    }

    pub fn len(&self) -> usize {
        ((self.max - self.min) / self.step + 1e-9).floor() as usize + 1
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn value(&self, i: usize) -> f64 {
        if i + 1 == self.len() && ((self.max - self.min) / self.step).fract().abs() < 1e-9 {
            self.max
        } else {
            self.min + i as f64 * self.step
        }
    }

    pub fn values(&self) -> Vec<f64> {
        (0..self.len()).map(|i| self.value(i)).collect()
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SweepSpec {
    pub engine: EngineConfig,
    pub measures: Vec<Measure>,
    /// Outermost axis first; the last axis varies fastest.
    pub axes: Vec<Axis>,
    /// Values of every parameter not covered by an axis.
    pub fixed: SystemParams,
    /// Attach relative values against the static maximum at each coupling.
    #[serde(default)]
    pub relative: bool,
    /// Static detuning grid for the relative denominators.
    #[serde(default = "default_static_axis")]
    pub static_delta: Axis,
}

fn default_static_axis() -> Axis {
    STATIC_DELTA_AXIS
}

impl SweepSpec {
    pub fn new(engine: EngineConfig, axes: Vec<Axis>, fixed: SystemParams) -> Self {
        Self {
            engine,
            measures: Measure::ALL.to_vec(),
            axes,
            fixed,
            relative: false,
            static_delta: STATIC_DELTA_AXIS,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.axes.is_empty() {
            return Err(Error::InvalidParams("sweep needs at least one axis".into()));
        }
        if self.measures.is_empty() {
            return Err(Error::InvalidParams(
                "sweep needs at least one measure".into(),
            ));
        }
        let mut seen = Vec::new();
        for a in &self.axes {
            a.validate()?;
            if seen.contains(&a.param) {
                return Err(Error::InvalidParams(format!(
                    "axis {} given twice",
                    a.param
                )));
            }
            seen.push(a.param);
        }
        self.static_delta.validate()?;
        self.engine.validate()?;
        for p in self.points() {
            p.validate()?;
        }
        Ok(())
    }

    pub fn len(&self) -> usize {
        self.axes.iter().map(Axis::len).product()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    /// Parameter point at flat grid index `index`.
    pub fn point(&self, mut index: usize) -> SystemParams {
        let mut p = self.fixed;
        for a in self.axes.iter().rev() {
            let n = a.len();
            a.param.set(&mut p, a.value(index % n));
            index /= n;
        }
        p
    }

    pub fn points(&self) -> Vec<SystemParams> {
        (0..self.len()).map(|i| self.point(i)).collect()
    }

    /// Every combination of axis endpoints, deduplicated.
    pub fn corners(&self) -> Vec<SystemParams> {
        let mut out: Vec<SystemParams> = Vec::new();
        for mask in 0..(1usize << self.axes.len()) {
            let mut p = self.fixed;
            for (k, a) in self.axes.iter().enumerate() {
                a.param.set(
                    &mut p,
                    if mask >> k & 1 == 1 {
                        a.value(a.len() - 1)
                    } else {
                        a.min
                    },
                );
            }
            if !out.contains(&p) {
                out.push(p);
            }
        }
        out
    }

    /// Couplings that need a static denominator.
    pub fn gamma0_values(&self) -> Vec<f64> {
        let mut g: Vec<f64> = match self.axes.iter().find(|a| a.param == Param::Gamma0) {
            Some(a) => a.values(),
            None => vec![self.fixed.gamma0],
        };
        g.dedup();
        g
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Status {
    Ok,
    Undefined,
    Error,
}

impl fmt::Display for Status {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Status::Ok => "ok",
            Status::Undefined => "undefined",
            Status::Error => "error",
        })
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SweepRecord {
    pub index: usize,
    pub params: SystemParams,
    pub engine: Engine,
    pub trunc_n: Option<usize>,
    /// Horizon actually integrated; absent when the engine failed.
    pub horizon: Option<f64>,
    pub n_blp: Option<f64>,
    pub n_lr: Option<f64>,
    pub rel_blp: Option<f64>,
    pub rel_lr: Option<f64>,
    pub error: Option<String>,
}

impl SweepRecord {
    pub fn value(&self, m: Measure) -> Option<f64> {
        match m {
            Measure::Blp => self.n_blp,
            Measure::Lr => self.n_lr,
        }
    }

    pub fn relative(&self, m: Measure) -> Option<f64> {
        match m {
            Measure::Blp => self.rel_blp,
            Measure::Lr => self.rel_lr,
        }
    }

    pub fn is_error(&self) -> bool {
        self.error.is_some()
    }
}

/// Execution settings that do not affect the records.
#[derive(Clone, Debug, Default)]
pub struct RunOptions {
    /// Worker threads; 0 means one per core.
    pub workers: usize,
    pub checkpoint: Option<PathBuf>,
    /// Reuse the records of a matching checkpoint.
    pub resume: bool,
    /// Stop after this many newly evaluated points (testing hook).
    pub stop_after: Option<usize>,
    pub progress: bool,
}

#[derive(Clone, Debug, PartialEq)]
pub struct SweepResult {
    pub spec: SweepSpec,
    pub records: Vec<SweepRecord>,
    pub static_max: Option<StaticMaxTable>,
    /// Points restored from a checkpoint rather than evaluated.
    pub resumed: usize,
}

impl SweepResult {
    pub fn errors(&self) -> usize {
        self.records.iter().filter(|r| r.is_error()).count()
    }
}

/// Evaluate one grid point; engine failures become error records.
pub fn evaluate_point(
    spec: &SweepSpec,
    index: usize,
    table: Option<&StaticMaxTable>,
) -> SweepRecord {
    let params = spec.point(index);
    let mut rec = SweepRecord {
        index,
        params,
        engine: spec.engine.engine(),
        trunc_n: spec.engine.trunc_n(),
        horizon: None,
        n_blp: None,
        n_lr: None,
        rel_blp: None,
        rel_lr: None,
        error: None,
    };
    match measure_point(&spec.engine, &params) {
        Ok(r) => {
            rec.horizon = Some(r.horizon);
            if spec.measures.contains(&Measure::Blp) {
                rec.n_blp = Some(r.n_blp);
            }
            if spec.measures.contains(&Measure::Lr) {
                rec.n_lr = Some(r.n_lr);
            }
            if let Some(t) = table {
                let rel = |m: Measure, v: Option<f64>| {
                    v.and_then(|v| {
                        t.get(params.gamma0, m)
                            .and_then(|s| s.max)
                            .and_then(|s| n_relative(v, s))
                    })
                };
                rec.rel_blp = rel(Measure::Blp, rec.n_blp);
                rec.rel_lr = rel(Measure::Lr, rec.n_lr);
            }
        }
        Err(e) => rec.error = Some(e.to_string()),
    }
    rec
}

#[derive(Serialize, Deserialize)]
struct CheckpointHeader {
    nmqsim_checkpoint: u32,
    spec: String,
}

fn spec_key(spec: &SweepSpec) -> Result<String> {
    Ok(serde_json::to_string(spec)?)
}

fn load_checkpoint(path: &Path, key: &str) -> Result<BTreeMap<usize, SweepRecord>> {
    let mut out = BTreeMap::new();
    let file = match File::open(path) {
        Ok(f) => f,
        Err(e) if e.kind() == std::io::ErrorKind::NotFound => return Ok(out),
        Err(e) => return Err(e.into()),
    };
    let mut lines = BufReader::new(file).lines();
    let header = match lines.next() {
        Some(l) => l?,
        None => return Ok(out),
    };
    let header: CheckpointHeader = serde_json::from_str(&header).map_err(|e| Error::Config {
        path: path.into(),
        line: 1,
        msg: format!("not a checkpoint: {e}"),
    })?;
    if header.spec != key {
        return Err(Error::Config {
            path: path.into(),
            line: 1,
            msg: "checkpoint belongs to a different sweep spec".into(),
        });
    }
    for line in lines {
        let line = line?;
        // a torn final line from a killed run is simply recomputed
        if let Ok(rec) = serde_json::from_str::<SweepRecord>(&line) {
            out.insert(rec.index, rec);
        }
    }
    Ok(out)
}

fn open_checkpoint(path: &Path, key: &str, append: bool) -> Result<BufWriter<File>> {
    if let Some(dir) = path.parent().filter(|d| !d.as_os_str().is_empty()) {
        fs::create_dir_all(dir)?;
    }
    if append && path.exists() && fs::metadata(path)?.len() > 0 {
        let mut w = BufWriter::new(OpenOptions::new().append(true).open(path)?);
        // terminate any torn line so the next record starts cleanly
        w.write_all(b"\n")?;
        return Ok(w);
    }
    let mut w = BufWriter::new(File::create(path)?);
    serde_json::to_writer(
        &mut w,
        &CheckpointHeader {
            nmqsim_checkpoint: 1,
            spec: key.to_owned(),
        },
    )?;
    w.write_all(b"\n")?;
    w.flush()?;
    Ok(w)
}

fn pool(workers: usize) -> Result<rayon::ThreadPool> {
    rayon::ThreadPoolBuilder::new()
        .num_threads(workers)
        .build()
        .map_err(|e| Error::InvalidParams(format!("cannot start worker pool: {e}")))
}

/// Verify hierarchy truncation at the grid corners (depth `N` against `N + 2`).
pub fn check_heom_corners(spec: &SweepSpec) -> Result<()> {
    let EngineConfig::Heom(cfg) = spec.engine else {
        return Ok(());
    };
    for p in spec.corners() {
        let report = convergence_check(&p, &cfg, &[cfg.depth, cfg.depth + 2])?;
        if !report.converged {
            return Err(Error::NotConverged(format!(
                "depth {} at corner ({p}): sup |D_N - D_N+2| = {:.3e}; increase --trunc-n",
                cfg.depth, report.deltas[0]
            )));
        }
    }
    Ok(())
}

/// Evaluate every grid point of `spec`.
pub fn run_sweep(spec: &SweepSpec, opts: &RunOptions) -> Result<SweepResult> {
    spec.validate()?;
    let pool = pool(opts.workers)?;
    pool.install(|| run_in_pool(spec, opts))
}

fn run_in_pool(spec: &SweepSpec, opts: &RunOptions) -> Result<SweepResult> {
    let key = spec_key(spec)?;
    let mut done = match (&opts.checkpoint, opts.resume) {
        (Some(path), true) => load_checkpoint(path, &key)?,
        _ => BTreeMap::new(),
    };
    done.retain(|i, _| *i < spec.len());
    let resumed = done.len();
    if resumed < spec.len() {
        check_heom_corners(spec)?;
    }
    let table = if spec.relative {
        Some(static_max_table(
            &spec.engine,
            &spec.measures,
            &spec.gamma0_values(),
            &spec.static_delta,
            spec.fixed.omega0,
        )?)
    } else {
        None
    };

    let writer = match &opts.checkpoint {
        Some(path) => Some(Mutex::new(open_checkpoint(
            path,
            &key,
            opts.resume && resumed > 0,
        )?)),
        None => None,
    };
    let pending: Vec<usize> = (0..spec.len()).filter(|i| !done.contains_key(i)).collect();
    let tickets = AtomicUsize::new(0);
    let finished = AtomicUsize::new(0);
    let total = pending.len();
    let limit = opts.stop_after.unwrap_or(usize::MAX);

    let fresh: Vec<SweepRecord> = pending
        .par_iter()
        .map(|&i| -> Result<Option<SweepRecord>> {
            if tickets.fetch_add(1, Ordering::SeqCst) >= limit {
                return Ok(None);
            }
            let rec = evaluate_point(spec, i, table.as_ref());
            if let Some(w) = &writer {
                let mut w = w.lock().expect("checkpoint writer poisoned");
                serde_json::to_writer(&mut *w, &rec)?;
                w.write_all(b"\n")?;
                w.flush()?;
            }
            let n = finished.fetch_add(1, Ordering::SeqCst) + 1;
            if opts.progress && (n % 50 == 0 || n == total) {
                eprintln!("[sweep] {n}/{total} points");
            }
            Ok(Some(rec))
        })
        .collect::<Result<Vec<_>>>()?
        .into_iter()
        .flatten()
        .collect();

    let new_count = fresh.len();
    for r in fresh {
        done.insert(r.index, r);
    }
    if done.len() < spec.len() {
        return Err(Error::Interrupted(new_count));
    }
    if let Some(path) = &opts.checkpoint {
        drop(writer);
        fs::remove_file(path)?;
    }
    Ok(SweepResult {
        spec: spec.clone(),
        records: done.into_values().collect(),
        static_max: table,
        resumed,
    })
}

/// Largest relative value over a finished sweep (the `M` figure of merit):
/// `None` when no point has a defined relative value.
pub fn m_max(records: &[SweepRecord], measure: Measure) -> Result<Option<f64>> {
    max_relative(records.iter().map(|r| r.relative(measure)))
}
