//! Acceptance suite. Runs every criterion, prints one
//! `criterion NN PASS|FAIL` line each, and exits non-zero if any failed.
//!
//! Run with `cargo test -p nmqsim --test acceptance`.

use std::fs;
use std::path::Path;
use std::process::Command;
use std::time::Instant;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use nmqsim::analysis::{bessel_ridges, compare_high_freq, local_maxima, nearest_ridge, GridField};
use nmqsim::engine::{measure_point, EngineConfig};
use nmqsim::heom::{convergence_check, solve_heom, HeomConfig};
use nmqsim::measures::{largest_rise, rise_sum, Engine, Measure};
use nmqsim::qcore::{plus_x_pair, SystemParams};
use nmqsim::rwa::{solve_g, solve_g_auto, static_g_closed_form, weak_coupling_g, IntegratorConfig};
use nmqsim::sweep::{
    figure_specs, m_max, run_sweep, Axis, Figure, FigureOptions, Param, RunOptions, SweepRecord,
    SweepSpec,
};

/// Verdict and a one-line summary of the measured values.
type Outcome = (bool, String);

fn p(g: f64, d: f64, w: f64) -> SystemParams {
    SystemParams::driven(g, d, w).unwrap()
}

fn rwa() -> EngineConfig {
    EngineConfig::default()
}

/// Relative LR sweep over `(Delta, omega_d)` at fixed coupling.
fn relative_grid(spec: SweepSpec) -> Vec<SweepRecord> {
    let result = run_sweep(&spec, &RunOptions::default()).unwrap();
    assert_eq!(result.errors(), 0, "engine failures in the grid");
    result.records
}

fn driven_grid(g: f64, dmax: f64, wmax: f64, n: usize) -> SweepSpec {
    let mut s = SweepSpec::new(
        rwa(),
        vec![
            Axis::with_points(Param::Delta, 0.0, dmax, n),
            Axis::with_points(Param::OmegaD, 0.0, wmax, n),
        ],
        p(g, 0.0, 0.0),
    );
    s.measures = vec![Measure::Lr];
    s.relative = true;
    s
}

fn criterion_01_static_threshold() -> Outcome {
    let cfg = rwa();
    let lr = |g: f64| measure_point(&cfg, &p(g, 0.0, 0.0)).unwrap().n_lr;
    let below: Vec<f64> = [0.1, 0.3, 0.45].iter().map(|&g| lr(g)).collect();
    let above: Vec<f64> = [0.6, 1.0, 2.0, 10.0].iter().map(|&g| lr(g)).collect();
    let pass = below.iter().all(|v| *v < 1e-6)
        && above.iter().all(|v| *v > 0.01)
        && above.windows(2).all(|w| w[1] > w[0]);
    (
        pass,
        format!(
            "below={:?} above={above:.4?}",
            below.iter().map(|v| format!("{v:.1e}")).collect::<Vec<_>>()
        ),
    )
}

fn criterion_02_closed_form_oracle() -> Outcome {
    let cfg = IntegratorConfig {
        tau_max: 30.0,
        auto_horizon: false,
        ..Default::default()
    };
    let mut worst: f64 = 0.0;
    for g in [0.1, 0.5, 2.0, 10.0] {
        for d in [0.0, 2.0, 8.0] {
            let traj = solve_g(&p(g, d, 0.0), &cfg).unwrap();
            assert!((traj.horizon() - 30.0).abs() < 1e-12);
            let gap = traj
                .tau
                .iter()
                .zip(&traj.g)
                .map(|(tau, z)| (z - static_g_closed_form(g, d, *tau)).norm())
                .fold(0.0, f64::max);
            worst = worst.max(gap);
        }
    }
    (
        worst < 1e-7,
        format!("max sup gap {worst:.3e} over 12 points"),
    )
}

fn criterion_03_trace_distance_identity() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(20_240_611);
    let (plus, minus) = plus_x_pair();
    let cfg = IntegratorConfig::default();
    let mut worst: f64 = 0.0;
    for _ in 0..20 {
        let params = p(
            rng.gen_range(0.05..10.0),
            rng.gen_range(0.0..20.0),
            rng.gen_range(0.0..20.0),
        );
        let traj = solve_g_auto(&params, &cfg).unwrap();
        let d = traj.distance(&plus, &minus).unwrap();
        let gap = d
            .iter()
            .zip(&traj.g)
            .map(|(d, z)| (d - z.norm()).abs())
            .fold(0.0, f64::max);
        worst = worst.max(gap);
    }
    (
        worst < 1e-9,
        format!("max deviation {worst:.3e} over 20 points"),
    )
}

fn criterion_04_heom_physicality_and_convergence() -> Outcome {
    let cfg = HeomConfig::default();
    assert_eq!(cfg.depth, 10);
    let (plus, _) = plus_x_pair();
    let (mut trace, mut herm, mut eig, mut conv) = (0.0f64, 0.0f64, f64::INFINITY, 0.0f64);
    for g in [0.1, 2.0, 10.0] {
        for d in [0.0, 8.0] {
            for w in [0.0, 5.0] {
                let params = p(g, d, w);
                assert_eq!(params.omega0, 20.0);
                let traj = solve_heom(&plus, &params, &cfg).unwrap();
                trace = trace.max(traj.max_trace_error());
                herm = herm.max(traj.max_hermiticity_error());
                eig = eig.min(traj.min_eigenvalue());
                conv = conv.max(convergence_check(&params, &cfg, &[10, 12]).unwrap().deltas[0]);
            }
        }
    }
    let pass = trace < 1e-6 && herm < 1e-8 && eig > -1e-5 && conv < 1e-4;
    (
        pass,
        format!(
            "trace err {trace:.2e}, hermiticity {herm:.2e}, min eig {eig:.2e}, N10->12 {conv:.2e}"
        ),
    )
}

fn criterion_05_rwa_heom_lr_consistency() -> Outcome {
    let heom = EngineConfig::default_for(Engine::Heom);
    let mut worst: f64 = 0.0;
    let mut rows = Vec::new();
    for g in [0.1, 0.5, 2.0] {
        for d in [0.0, 2.0] {
            let params = p(g, d, 0.0);
            let h = measure_point(&heom, &params).unwrap().n_lr;
            let r = measure_point(&rwa(), &params).unwrap().n_lr;
            worst = worst.max((h - r).abs());
            rows.push(format!("({g},{d}): {h:.4}/{r:.4}"));
        }
    }
    (
        worst < 0.05,
        format!("max |diff| {worst:.4}; heom/rwa {}", rows.join(" ")),
    )
}

fn criterion_06_fluctuation_robustness() -> Outcome {
    let n = 20_001;
    let tau: Vec<f64> = (0..n).map(|i| 10.0 * i as f64 / (n - 1) as f64).collect();
    let base: Vec<f64> = tau.iter().map(|s| 0.9 - 0.002 * s).collect();
    assert_eq!(rise_sum(&base).unwrap(), 0.0);
    let counts = [5usize, 10, 20, 40];
    let mut blp = Vec::new();
    let mut lr = Vec::new();
    for &k in &counts {
        let noisy: Vec<f64> = tau
            .iter()
            .zip(&base)
            .map(|(s, b)| b + 0.01 * (2.0 * std::f64::consts::PI * k as f64 * s / 10.0).sin())
            .collect();
        blp.push(rise_sum(&noisy).unwrap());
        lr.push(largest_rise(&noisy).unwrap().0);
    }
    // each extra oscillation adds one peak-to-peak swing of 0.02
    let per_osc: Vec<f64> = (1..counts.len())
        .map(|i| (blp[i] - blp[i - 1]) / (counts[i] - counts[i - 1]) as f64)
        .collect();
    let linear = per_osc.iter().all(|r| (r - 0.02).abs() < 0.001);
    let bounded = lr.iter().all(|v| *v <= 0.02);
    (
        linear && bounded,
        format!("n_blp={blp:.4?} per oscillation={per_osc:.4?} n_lr={lr:.4?}"),
    )
}

fn criterion_07_driving_amplification() -> Outcome {
    let weak = m_max(
        &relative_grid(driven_grid(0.1, 20.0, 20.0, 21)),
        Measure::Lr,
    )
    .unwrap();
    let strong = m_max(
        &relative_grid(driven_grid(10.0, 20.0, 20.0, 21)),
        Measure::Lr,
    )
    .unwrap();
    let pass = weak.map_or(false, |m| m >= 5.0) && strong.map_or(false, |m| m <= 1.3);
    (pass, format!("M_LR(0.1)={weak:.4?} M_LR(10)={strong:.4?}"))
}

fn criterion_08_high_frequency_equivalence() -> Outcome {
    let gaps: Vec<f64> = [5.0, 10.0, 20.0, 40.0]
        .iter()
        .map(|&w| {
            compare_high_freq(&rwa(), &p(2.0, 0.8 * w, w))
                .unwrap()
                .sup_gap
        })
        .collect();
    let pass = gaps.windows(2).all(|w| w[1] < w[0]) && gaps[3] < 0.02;
    (pass, format!("sup gaps {gaps:.4?}"))
}

fn criterion_09_weak_coupling_scaling() -> Outcome {
    let cfg = IntegratorConfig {
        tau_max: 30.0,
        auto_horizon: false,
        rtol: 1e-11,
        atol: 1e-13,
        ..Default::default()
    };
    let err = |g: f64, d: f64, w: f64| {
        let traj = solve_g(&p(g, d, w), &cfg).unwrap();
        let series = weak_coupling_g(&traj.params, &traj.tau).unwrap();
        traj.g
            .iter()
            .zip(&series)
            .map(|(a, b)| (a - b).norm())
            .fold(0.0, f64::max)
    };
    let ratios: Vec<f64> = [(0.0, 1.0), (2.0, 1.0), (5.0, 3.0)]
        .iter()
        .map(|&(d, w)| err(0.05, d, w) / err(0.025, d, w))
        .collect();
    let pass = ratios.iter().all(|r| (3.5..=4.5).contains(r));
    (pass, format!("error ratios {ratios:.3?}"))
}

/// `omega_d / Delta`, with the undriven column counted as infinitely fast.
fn ratio(r: &SweepRecord) -> f64 {
    if r.params.delta == 0.0 {
        f64::INFINITY
    } else {
        r.params.omega_d / r.params.delta
    }
}

fn region(records: &[SweepRecord], keep: impl Fn(f64) -> bool) -> Vec<f64> {
    records
        .iter()
        .filter(|r| keep(ratio(r)))
        .map(|r| r.rel_lr.expect("defined relative value"))
        .collect()
}

fn criterion_10_regime_structure() -> Outcome {
    let mean = |v: &[f64]| v.iter().sum::<f64>() / v.len() as f64;
    let max = |v: &[f64]| v.iter().copied().fold(f64::NEG_INFINITY, f64::max);

    let weak = relative_grid(driven_grid(0.1, 20.0, 20.0, 41));
    let fast = mean(&region(&weak, |r| r > 2.0));
    let slow = max(&region(&weak, |r| r < 1.0));

    let strong = relative_grid(driven_grid(10.0, 20.0, 20.0, 41));
    let fast_strong = max(&region(&strong, |r| r > 1.0));
    let slow_strong = mean(&region(&strong, |r| r < 0.5));

    let pass = fast < 0.2 && slow > 3.0 && (0.8..=1.3).contains(&fast_strong) && slow_strong < 0.8;
    (pass,
        format!(
            "g=0.1: mean(r>2)={fast:.4} max(r<1)={slow:.3}; g=10: max(r>1)={fast_strong:.4} mean(r<1/2)={slow_strong:.4}"
        ),
    )
}

fn criterion_11_bessel_ridge_alignment() -> Outcome {
    let spec = figure_specs(Figure::Fig4, &FigureOptions::new(rwa(), "unused"))
        .unwrap()
        .remove(0);
    let deltas = spec.axes[0].values();
    let omegas = spec.axes[1].values();
    let records = relative_grid(spec);
    let values = records
        .iter()
        .map(|r| r.rel_lr.expect("defined relative value"))
        .collect();
    let field = GridField::new(deltas, omegas, values).unwrap();

    // rays through the large-amplitude half of the window
    let (lo, hi, rays) = (0.08f64, 0.7f64, 200);
    let ratios: Vec<f64> = (0..rays)
        .map(|k| lo * (hi / lo).powf(k as f64 / (rays - 1) as f64))
        .collect();
    let profile: Vec<f64> = ratios
        .iter()
        .map(|&r| field.ray_mean(r, 10.0, 20.0, 101).unwrap())
        .collect();
    let ridges = bessel_ridges(0.05, 10.0).unwrap();
    let peaks: Vec<(f64, f64)> = local_maxima(&profile)
        .into_iter()
        .map(|i| (ratios[i], nearest_ridge(&ridges, ratios[i]).unwrap().1))
        .collect();
    let pass = peaks.len() >= 3 && peaks.iter().all(|(_, off)| off.abs() <= 0.10);
    (pass, format!("peaks (ratio, offset) {peaks:.4?}"))
}

fn cli(args: &[&str]) -> (i32, String) {
    let out = Command::new(env!("CARGO_BIN_EXE_nmqsim"))
        .args(args)
        .env_remove("NMQSIM_WORKERS")
        .output()
        .unwrap();
    (
        out.status.code().unwrap_or(-1),
        String::from_utf8_lossy(&out.stdout).into_owned(),
    )
}

fn criterion_12_engineering() -> Outcome {
    let mut notes = Vec::new();

    let mut spec = SweepSpec::new(
        rwa(),
        vec![
            Axis::new(Param::Gamma0, 0.5, 2.5, 1.0),
            Axis::new(Param::Delta, 0.0, 4.0, 2.0),
            Axis::new(Param::OmegaD, 0.0, 6.0, 3.0),
        ],
        p(1.0, 0.0, 0.0),
    );
    spec.relative = true;
    let serial = run_sweep(
        &spec,
        &RunOptions {
            workers: 1,
            ..Default::default()
        },
    )
    .unwrap();
    let parallel = run_sweep(
        &spec,
        &RunOptions {
            workers: 4,
            ..Default::default()
        },
    )
    .unwrap();
    let same_records =
        serial.records == parallel.records && serial.static_max == parallel.static_max;
    notes.push(format!("serial==parallel {same_records}"));

    let dir = tempfile::tempdir().unwrap();
    let d = dir.path();
    let path = |name: &str| d.join(name).to_string_lossy().into_owned();
    let sweep = |out: &str, extra: &[&str]| {
        let mut args = vec![
            "sweep",
            "--axis",
            "gamma0:0.5:2.5:1",
            "--axis",
            "delta:0:4:2",
            "--axis",
            "omega-d:0:6:3",
            "--relative",
            "-q",
            "--out",
            out,
        ];
        args.extend_from_slice(extra);
        cli(&args).0
    };
    let full = path("full.csv");
    let part = path("part.csv");
    let codes = [
        sweep(&full, &[]),
        sweep(&part, &["--stop-after", "7"]),
        sweep(&part, &["--resume"]),
    ];
    let interrupted_ok = codes == [0, 1, 0];
    let identical = fs::read(&full).unwrap() == fs::read(&part).unwrap()
        && fs::read(format!("{full}.meta")).unwrap() == fs::read(format!("{part}.meta")).unwrap();
    let no_leftovers = !Path::new(&format!("{part}.ckpt")).exists();
    notes.push(format!(
        "resume codes {codes:?} identical {identical} checkpoint removed {no_leftovers}"
    ));

    let bad_conf = path("bad.conf");
    fs::write(&bad_conf, "no-such-key = 1\n").unwrap();
    let good_conf = path("good.conf");
    fs::write(&good_conf, "gamma0 = 2\n[measure]\ndelta = 1\n").unwrap();
    let blocker = path("blocker");
    fs::write(&blocker, "").unwrap();
    let inside_file = format!("{blocker}/x.csv");
    let matrix: Vec<(Vec<&str>, i32)> = vec![
        (vec!["measure", "--gamma0", "2"], 0),
        (vec!["traj", "--gamma0", "1", "--tau-max", "2"], 0),
        (vec!["measure", "--config", &good_conf], 0),
        (vec!["--help"], 0),
        (vec![], 2),
        (vec!["frobnicate"], 2),
        (vec!["measure", "--no-such-flag"], 2),
        (vec!["measure", "--gamma0", "abc"], 2),
        (vec!["measure", "--gamma0", "-1"], 2),
        (vec!["measure", "--engine", "exact"], 2),
        (
            vec!["sweep", "--axis", "delta:0:1:0.5", "--measure", "xyz"],
            2,
        ),
        (vec!["sweep", "--axis", "delta:1:0:0.5"], 2),
        (vec!["measure", "--config", &bad_conf], 2),
        (vec!["traj", "--tau-max", "2", "--out", &inside_file], 1),
    ];
    let mut mismatches = Vec::new();
    for (args, want) in &matrix {
        let (got, _) = cli(args);
        if got != *want {
            mismatches.push(format!("{args:?}: {got} != {want}"));
        }
    }
    notes.push(format!(
        "exit-code matrix {}/{} match {mismatches:?}",
        matrix.len() - mismatches.len(),
        matrix.len()
    ));

    let pass = same_records && interrupted_ok && identical && no_leftovers && mismatches.is_empty();
    (pass, notes.join("; "))
}

fn main() {
    let criteria: [(&str, fn() -> Outcome); 12] = [
        ("static no-revival threshold", criterion_01_static_threshold),
        (
            "integrator vs static closed form",
            criterion_02_closed_form_oracle,
        ),
        (
            "D = |G| for the +-x pair",
            criterion_03_trace_distance_identity,
        ),
        (
            "HEOM physicality and convergence",
            criterion_04_heom_physicality_and_convergence,
        ),
        (
            "RWA/HEOM N_LR agreement",
            criterion_05_rwa_heom_lr_consistency,
        ),
        (
            "BLP counts fluctuations, LR does not",
            criterion_06_fluctuation_robustness,
        ),
        (
            "driving-induced amplification",
            criterion_07_driving_amplification,
        ),
        (
            "high-frequency static equivalent",
            criterion_08_high_frequency_equivalence,
        ),
        (
            "first-order series error ~ gamma0^2",
            criterion_09_weak_coupling_scaling,
        ),
        (
            "weak/strong coupling regimes",
            criterion_10_regime_structure,
        ),
        (
            "relative NM maxima on Bessel root lines",
            criterion_11_bessel_ridge_alignment,
        ),
        (
            "parallel equivalence, resume identity, exit codes",
            criterion_12_engineering,
        ),
    ];
    let only: Vec<String> = std::env::args()
        .skip(1)
        .filter(|a| !a.starts_with('-'))
        .collect();
    let mut failed = 0;
    for (k, (name, run)) in criteria.iter().enumerate() {
        let id = k + 1;
        if !only.is_empty()
            && !only
                .iter()
                .any(|f| format!("criterion_{id:02}").contains(f.as_str()))
        {
            continue;
        }
        let start = Instant::now();
        let (pass, detail) = match std::panic::catch_unwind(run) {
            Ok(outcome) => outcome,
            Err(_) => (false, "panicked".to_owned()),
        };
        failed += usize::from(!pass);
        println!(
            "criterion {id:02} {} {name} ({:.1}s): {detail}",
            if pass { "PASS" } else { "FAIL" },
            start.elapsed().as_secs_f64()
        );
    }
    println!("acceptance: {} failed", failed);
    std::process::exit(i32::from(failed > 0));
}
