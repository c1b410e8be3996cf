use std::fmt::Write as _;
use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};

use super::{Status, SweepRecord, SweepResult};
use crate::error::Result;
use crate::measures::Measure;

pub const CSV_HEADER: &str =
    "gamma0,delta,omega_d,omega0,engine,measure,value,horizon,trunc_n,status";

/// `printf("%.9g")`: nine significant digits, trailing zeros dropped.
pub fn format_g9(x: f64) -> String {
    if !x.is_finite() {
        return "null".into();
    }
    if x == 0.0 {
        return "0".into();
    }
    let sci = format!("{:.8e}", x);
    let (mantissa, exp) = sci.split_once('e').expect("scientific format");
    let exp: i32 = exp.parse().expect("exponent");
    if !(-4..9).contains(&exp) {
        let m = trim_zeros(mantissa);
        let sign = if exp < 0 { '-' } else { '+' };
        return format!("{m}e{sign}{:02}", exp.abs());
    }
    let decimals = (8 - exp).max(0) as usize;
    trim_zeros(&format!("{:.*}", decimals, x)).to_owned()
}

fn trim_zeros(s: &str) -> &str {
    if s.contains('.') {
        s.trim_end_matches('0').trim_end_matches('.')
    } else {
        s
    }
}

fn opt(x: Option<f64>) -> String {
    x.map_or_else(|| "null".into(), format_g9)
}

fn row(out: &mut String, r: &SweepRecord, tag: &str, value: Option<f64>, status: Status) {
    let p = &r.params;
    let trunc = r.trunc_n.map_or_else(|| "null".into(), |n| n.to_string());
    let _ = writeln!(
        out,
        "{},{},{},{},{},{},{},{},{},{}",
        format_g9(p.gamma0),
        format_g9(p.delta),
        format_g9(p.omega_d),
        format_g9(p.omega0),
        r.engine,
        tag,
        opt(value),
        opt(r.horizon),
        trunc,
        status
    );
}

/// One row per point and measure, plus `<measure>_rel` rows for relative sweeps.
pub fn render_csv(result: &SweepResult) -> String {
    let mut out = String::with_capacity(64 * result.records.len() * result.spec.measures.len());
    out.push_str(CSV_HEADER);
    out.push('\n');
    let measures: Vec<Measure> = Measure::ALL
        .into_iter()
        .filter(|m| result.spec.measures.contains(m))
        .collect();
    for r in &result.records {
        for &m in &measures {
            let status = if r.is_error() {
                Status::Error
            } else {
                Status::Ok
            };
            row(&mut out, r, &m.to_string(), r.value(m), status);
        }
        if result.spec.relative {
            for &m in &measures {
                let v = r.relative(m);
                let status = match (r.is_error(), v) {
                    (true, _) => Status::Error,
                    (false, Some(_)) => Status::Ok,
                    (false, None) => Status::Undefined,
                };
                row(&mut out, r, &format!("{m}_rel"), v, status);
            }
        }
    }
    out
}

pub fn write_csv(path: &Path, result: &SweepResult) -> Result<()> {
    if let Some(dir) = path.parent().filter(|d| !d.as_os_str().is_empty()) {
        fs::create_dir_all(dir)?;
    }
    fs::write(path, render_csv(result))?;
    Ok(())
}

/// Sidecar next to a data file: `data.csv` gets `data.csv.meta`.
pub fn meta_path(data: &Path) -> PathBuf {
    let mut s = data.as_os_str().to_owned();
    s.push(".meta");
    PathBuf::from(s)
}

/// `key = value` metadata: tool version, spec, integrator settings, the
/// state pair and the static denominators. `extra` entries come last.
pub fn render_meta(result: &SweepResult, extra: &[(&str, String)]) -> Result<String> {
    let spec = &result.spec;
    let mut m = String::new();
    let mut kv = |k: &str, v: &str| {
        let _ = writeln!(m, "{k} = {v}");
    };
    kv("tool", concat!("nmqsim ", env!("CARGO_PKG_VERSION")));
    kv("engine", &spec.engine.engine().to_string());
    kv("integrator", &serde_json::to_string(&spec.engine)?);
    kv("spec", &serde_json::to_string(spec)?);
    kv("points", &result.records.len().to_string());
    kv("errors", &result.errors().to_string());
    kv("state_pair", "|+x>,|-x>");
    kv(
        "units",
        "dimensionless, energies in units of lambda, tau = lambda t",
    );
    if let Some(t) = &result.static_max {
        kv(
            "static_delta_grid",
            &serde_json::to_string(&spec.static_delta)?,
        );
        for e in &t.entries {
            kv(
                &format!("static_max.{}.{}", e.measure, format_g9(e.gamma0)),
                &format!("{} at delta={}", opt(e.max), opt(e.argmax_delta)),
            );
        }
        kv(
            "relative_note",
            "maxima over a finite grid are lower bounds on the true maxima",
        );
    }
    for (k, v) in extra {
        kv(k, v);
    }
    Ok(m)
}

pub fn write_meta(data: &Path, result: &SweepResult, extra: &[(&str, String)]) -> Result<PathBuf> {
    let path = meta_path(data);
    fs::File::create(&path)?.write_all(render_meta(result, extra)?.as_bytes())?;
    Ok(path)
}

/// Data rows of a file written by [`write_csv`], split on commas.
pub fn read_csv_rows(path: &Path) -> Result<Vec<Vec<String>>> {
    Ok(fs::read_to_string(path)?
        .lines()
        .skip(1)
        .filter(|l| !l.is_empty())
        .map(|l| l.split(',').map(str::to_owned).collect())
        .collect())
}
