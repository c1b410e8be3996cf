//! Grid datasets behind the four density-plot figures.

use std::fmt;
use std::fs;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use super::output::{render_csv, render_meta};
use super::{m_max, meta_path, run_sweep, Axis, Param, RunOptions, SweepResult, SweepSpec};
use crate::analysis::{bessel_ridges, Ridge, RidgeSource};
use crate::engine::EngineConfig;
use crate::error::{Error, Result};
use crate::measures::{Engine, Measure};
use crate::qcore::{SystemParams, DEFAULT_OMEGA0};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Figure {
    Fig1,
    Fig2,
    Fig3,
    Fig4,
}

impl fmt::Display for Figure {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Figure::Fig1 => "fig1",
            Figure::Fig2 => "fig2",
            Figure::Fig3 => "fig3",
            Figure::Fig4 => "fig4",
        })
    }
}

impl FromStr for Figure {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim().to_ascii_lowercase().as_str() {
            "fig1" | "1" => Ok(Figure::Fig1),
            "fig2" | "2" => Ok(Figure::Fig2),
            "fig3" | "3" => Ok(Figure::Fig3),
            "fig4" | "4" => Ok(Figure::Fig4),
            other => Err(Error::InvalidParams(format!(
                "unknown figure `{other}` (fig1..fig4)"
            ))),
        }
    }
}

/// `fig4` window: weak coupling, low driving frequency.
pub const FIG4_GAMMA0: f64 = 0.1;
pub const FIG4_DELTA_MAX: f64 = 20.0;
pub const FIG4_OMEGA_D_MAX: f64 = 10.0;

#[derive(Clone, Debug)]
pub struct FigureOptions {
    pub engine: EngineConfig,
    pub omega0: f64,
    /// Points per axis of the 2-D grids; `None` picks the engine default.
    pub points: Option<usize>,
    /// Couplings for fig2/fig3 (defaults: 15 log-spaced in `[0.1, 10]`, and `{0.1, 1.4, 10}`).
    pub gamma0s: Option<Vec<f64>>,
    pub out_dir: PathBuf,
    pub run: RunOptions,
}

impl FigureOptions {
    pub fn new(engine: EngineConfig, out_dir: impl Into<PathBuf>) -> Self {
        Self {
            engine,
            omega0: DEFAULT_OMEGA0,
            points: None,
            gamma0s: None,
            out_dir: out_dir.into(),
            run: RunOptions::default(),
        }
    }

    fn points(&self, rwa_default: usize) -> usize {
        self.points.unwrap_or(match self.engine.engine() {
            Engine::Rwa => rwa_default,
            Engine::Heom => 21,
        })
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct FigureOutput {
    pub figure: Figure,
    pub files: Vec<PathBuf>,
    pub results: Vec<SweepResult>,
    /// `(gamma0, measure, M)` rows of fig2.
    pub m_max: Vec<(f64, Measure, Option<f64>)>,
    pub ridges: Vec<Ridge>,
}

pub fn fig2_gamma0s() -> Vec<f64> {
    (0..15)
        .map(|k| 10f64.powf(-1.0 + 2.0 * k as f64 / 14.0))
        .collect()
}

/// One sweep per coupling for fig2/fig3, a single sweep otherwise.
pub fn figure_specs(which: Figure, opts: &FigureOptions) -> Result<Vec<SweepSpec>> {
    let fixed = |g: f64, w: f64| SystemParams::new(g, 0.0, w, opts.omega0);
    let driven = |g: f64, dmax: f64, wmax: f64, n: usize| -> Result<SweepSpec> {
        let mut s = SweepSpec::new(
            opts.engine,
            vec![
                Axis::with_points(Param::Delta, 0.0, dmax, n),
                Axis::with_points(Param::OmegaD, 0.0, wmax, n),
            ],
            fixed(g, 0.0)?,
        );
        s.relative = true;
        Ok(s)
    };
    Ok(match which {
        Figure::Fig1 => {
            let n = opts.points(41);
            vec![SweepSpec::new(
                opts.engine,
                vec![
                    Axis::with_points(Param::Gamma0, 0.0, 10.0, n),
                    Axis::with_points(Param::Delta, 0.0, 10.0, n),
                ],
                fixed(0.0, 0.0)?,
            )]
        }
        Figure::Fig2 => {
            let n = opts.points(21);
            let gs = opts.gamma0s.clone().unwrap_or_else(fig2_gamma0s);
            gs.into_iter()
                .map(|g| driven(g, 20.0, 20.0, n))
                .collect::<Result<_>>()?
        }
        Figure::Fig3 => {
            let n = opts.points(41);
            let gs = opts.gamma0s.clone().unwrap_or_else(|| vec![0.1, 1.4, 10.0]);
            gs.into_iter()
                .map(|g| driven(g, 20.0, 20.0, n))
                .collect::<Result<_>>()?
        }
        Figure::Fig4 => {
            let n = opts.points(61);
            let g = opts
                .gamma0s
                .as_ref()
                .and_then(|g| g.first().copied())
                .unwrap_or(FIG4_GAMMA0);
            vec![driven(g, FIG4_DELTA_MAX, FIG4_OMEGA_D_MAX, n)?]
        }
    })
}

fn write_text(path: &Path, text: &str) -> Result<()> {
    fs::write(path, text)?;
    Ok(())
}

/// Compute and write the dataset of `which` into `opts.out_dir`.
pub fn figure_dataset(which: Figure, opts: &FigureOptions) -> Result<FigureOutput> {
    fs::create_dir_all(&opts.out_dir)?;
    let specs = figure_specs(which, opts)?;
    let mut results = Vec::with_capacity(specs.len());
    for (k, spec) in specs.iter().enumerate() {
        let mut run = opts.run.clone();
        run.checkpoint = Some(opts.out_dir.join(format!("{which}.part{k}.ckpt")));
        if run.progress {
            eprintln!(
                "[{which}] sweep {}/{} ({} points, gamma0={})",
                k + 1,
                specs.len(),
                spec.len(),
                spec.fixed.gamma0
            );
        }
        results.push(run_sweep(spec, &run)?);
    }

    let data = opts.out_dir.join(format!("{which}.csv"));
    let mut csv = String::new();
    for (k, r) in results.iter().enumerate() {
        let text = render_csv(r);
        csv.push_str(if k == 0 {
            &text
        } else {
            text.split_once('\n').map_or("", |x| x.1)
        });
    }
    write_text(&data, &csv)?;
    let mut files = vec![data.clone()];

    let mut mm = Vec::new();
    if which == Figure::Fig2 {
        let mut text = String::from("gamma0,measure,m_max\n");
        for r in &results {
            for &m in &r.spec.measures {
                let v = m_max(&r.records, m)?;
                text.push_str(&format!(
                    "{},{},{}\n",
                    super::format_g9(r.spec.fixed.gamma0),
                    m,
                    v.map_or_else(|| "null".into(), super::format_g9)
                ));
                mm.push((r.spec.fixed.gamma0, m, v));
            }
        }
        let path = opts.out_dir.join("fig2_mmax.csv");
        write_text(&path, &text)?;
        files.push(path);
    }

    let mut ridges = Vec::new();
    if which == Figure::Fig4 {
        ridges = bessel_ridges(0.05, 10.0)?;
        let mut text = String::from("source,index,root,ratio\n");
        for r in &ridges {
            let src = match r.source {
                RidgeSource::J0 => "J0",
                RidgeSource::J1 => "J1",
            };
            text.push_str(&format!(
                "{src},{},{},{}\n",
                r.index,
                super::format_g9(r.root),
                super::format_g9(r.ratio)
            ));
        }
        let path = opts.out_dir.join("fig4_ridges.csv");
        write_text(&path, &text)?;
        files.push(path);
    }

    let mut meta = format!("figure = {which}\nsweeps = {}\n", results.len());
    for (k, r) in results.iter().enumerate() {
        meta.push_str(&format!("[sweep {k}]\n{}", render_meta(r, &[])?));
    }
    let meta_file = meta_path(&data);
    write_text(&meta_file, &meta)?;
    files.push(meta_file);
    Ok(FigureOutput {
        figure: which,
        files,
        results,
        m_max: mm,
        ridges,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rwa::IntegratorConfig;

    fn quick(dir: &Path) -> FigureOptions {
        let mut o = FigureOptions::new(
            EngineConfig::Rwa(IntegratorConfig {
                tau_max: 10.0,
                dtau: 0.01,
                ..Default::default()
            }),
            dir,
        );
        o.points = Some(3);
        o.run.workers = 2;
        o
    }

    #[test]
    fn default_grids() {
        let o = FigureOptions::new(EngineConfig::default(), "unused");
        let f1 = figure_specs(Figure::Fig1, &o).unwrap();
        assert_eq!(f1[0].len(), 41 * 41);
        let f2 = figure_specs(Figure::Fig2, &o).unwrap();
        assert_eq!(f2.len(), 15);
        assert!(
            (f2[0].fixed.gamma0 - 0.1).abs() < 1e-15 && (f2[14].fixed.gamma0 - 10.0).abs() < 1e-12
        );
        assert_eq!(f2[0].len(), 21 * 21);
        let f3 = figure_specs(Figure::Fig3, &o).unwrap();
        assert_eq!(
            f3.iter().map(|s| s.fixed.gamma0).collect::<Vec<_>>(),
            vec![0.1, 1.4, 10.0]
        );
        assert_eq!(f3[0].len(), 41 * 41);
        let f4 = figure_specs(Figure::Fig4, &o).unwrap();
        assert_eq!(f4[0].len(), 61 * 61);
        assert_eq!(f4[0].axes[1].max, FIG4_OMEGA_D_MAX);
        let h = FigureOptions::new(EngineConfig::default_for(Engine::Heom), "unused");
        assert_eq!(figure_specs(Figure::Fig3, &h).unwrap()[0].len(), 21 * 21);
        assert_eq!("fig4".parse::<Figure>().unwrap(), Figure::Fig4);
        assert!("fig5".parse::<Figure>().is_err());
    }

    #[test]
    fn fig4_writes_ridges() {
        let dir = tempfile::tempdir().unwrap();
        let out = figure_dataset(Figure::Fig4, &quick(dir.path())).unwrap();
        assert!(out.files.iter().all(|f| f.exists()));
        let ridges = fs::read_to_string(dir.path().join("fig4_ridges.csv")).unwrap();
        assert!(ridges.starts_with("source,index,root,ratio\nJ"));
        assert!(ridges.contains("J0,1,2.40482556,0.415830577"));
        let meta = fs::read_to_string(dir.path().join("fig4.csv.meta")).unwrap();
        assert!(meta.contains("state_pair = |+x>,|-x>"));
        let leftovers: Vec<_> = fs::read_dir(dir.path())
            .unwrap()
            .map(|e| e.unwrap().file_name().into_string().unwrap())
            .filter(|n| n.contains("part"))
            .collect();
        assert!(leftovers.is_empty(), "{leftovers:?}");
    }

    #[test]
    fn fig2_m_max_table() {
        let dir = tempfile::tempdir().unwrap();
        let mut o = quick(dir.path());
        o.gamma0s = Some(vec![2.0, 5.0]);
        let out = figure_dataset(Figure::Fig2, &o).unwrap();
        assert_eq!(out.m_max.len(), 4);
        for (_, _, m) in &out.m_max {
            assert!(m.unwrap() > 0.0);
        }
        let csv = fs::read_to_string(dir.path().join("fig2.csv")).unwrap();
        assert_eq!(csv.matches("gamma0,delta").count(), 1);
        assert_eq!(csv.lines().count(), 1 + 2 * 9 * 4);
    }
}
