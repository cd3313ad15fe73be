//! Subcommand implementations. No numerics live here: each function calls
//! the library, writes artifacts, prints a summary, and reports pass/fail.

use crate::config::{write_manifest, ExperimentConfig, Manifest};
use anyhow::{Context, Result};
use spinharm::geom::SpherePoint;
use spinharm::harmonics::gram_residual;
use spinharm::io::FrameFile;
use spinharm::needlet::probe::kernel_amplitude;
use spinharm::stats::{clt_experiment, sj_calibration, uncorrelation_experiment};
use spinharm::{
    build_filter, build_frame, frame_bound_estimate, localization_probe, power_law_spectrum,
};
use std::fs::File;
use std::io::Write;
use std::path::Path;

fn open_out(dir: &Path, name: &str) -> Result<File> {
    std::fs::create_dir_all(dir)?;
    File::create(dir.join(name)).with_context(|| format!("creating {name}"))
}

pub fn harmonics_check(cfg: &ExperimentConfig, spins: &[i32], tolerance: f64) -> Result<bool> {
    let dir = cfg.out_dir();
    let mut csv = open_out(&dir, "gram_residuals.csv")?;
    writeln!(csv, "spin,l_max,residual")?;
    let mut ok = true;
    println!("{:>5} {:>6} {:>14}  status", "spin", "l_max", "residual");
    for &s in spins {
        let r = gram_residual(s, cfg.l_max());
        writeln!(csv, "{s},{},{r}", cfg.l_max())?;
        let pass = r < tolerance;
        ok &= pass;
        println!(
            "{s:>5} {:>6} {r:>14.3e}  {}",
            cfg.l_max(),
            if pass { "ok" } else { "FAIL" }
        );
    }
    write_manifest(
        &dir,
        &Manifest {
            command: "harmonics-check",
            config: cfg,
            outputs: vec!["gram_residuals.csv".into()],
        },
    )?;
    Ok(ok)
}

pub fn frame_build(
    cfg: &ExperimentConfig,
    trials: usize,
    cells: bool,
    frame_out: &str,
) -> Result<bool> {
    let dir = cfg.out_dir();
    let frame = build_frame(cfg.a(), cfg.b(), cfg.spin(), cfg.l_max())?;
    let bounds = if trials > 0 {
        Some(frame_bound_estimate(&frame, trials, cfg.seed()))
    } else {
        None
    };
    let file = FrameFile::from_frame(&frame, bounds.as_ref());
    let mut out = open_out(&dir, frame_out)?;
    let mut text = serde_json::to_string_pretty(&file)?;
    text.push('\n');
    out.write_all(text.as_bytes())?;
    let mut outputs = vec![frame_out.to_string()];
    if cells {
        for scale in &frame.scales {
            let name = format!("partition_j{}.json", scale.j);
            let mut f = open_out(&dir, &name)?;
            let mut text =
                serde_json::to_string(&spinharm::io::partition_to_json(&scale.partition))?;
            text.push('\n');
            f.write_all(text.as_bytes())?;
            outputs.push(name);
        }
    }
    let (j_lo, j_hi) = frame.j_range();
    println!(
        "frame: a={} b={} spin={} l_max={} scales j in [{j_lo},{j_hi}] cells={}",
        cfg.a(),
        cfg.b(),
        cfg.spin(),
        cfg.l_max(),
        frame.n_cells()
    );
    if let Some(b) = &bounds {
        println!(
            "bounds: A_est={:.6} B_est={:.6} C0_est={:.4} gap={:.3e}",
            b.a_est,
            b.b_est,
            b.c0_est,
            b.b_est - b.a_est
        );
    }
    write_manifest(
        &dir,
        &Manifest {
            command: "frame-build",
            config: cfg,
            outputs,
        },
    )?;
    Ok(true)
}

pub fn frame_check(cfg: &ExperimentConfig, frame_path: &Path, trials: usize) -> Result<bool> {
    let dir = cfg.out_dir();
    let text = std::fs::read_to_string(frame_path)
        .with_context(|| format!("reading {}", frame_path.display()))?;
    let file: FrameFile = serde_json::from_str(&text)?;
    let frame = file.rebuild()?;
    let bounds = frame_bound_estimate(&frame, trials, cfg.seed());
    let mut csv = open_out(&dir, "frame_check.csv")?;
    writeln!(csv, "trial,ratio")?;
    for (i, r) in bounds.trial_ratios.iter().enumerate() {
        writeln!(csv, "{i},{r}")?;
    }
    let eps = bounds.c0_est * frame.b;
    let ok = bounds.a_est > 0.0
        && bounds
            .trial_ratios
            .iter()
            .all(|r| (r - 1.0).abs() <= eps + 1e-9);
    println!(
        "frame-check: A_est={:.6} B_est={:.6} C0_est={:.4} eps={:.3e} trials={} -> {}",
        bounds.a_est,
        bounds.b_est,
        bounds.c0_est,
        eps,
        bounds.trial_ratios.len(),
        if ok { "ok" } else { "FAIL" }
    );
    write_manifest(
        &dir,
        &Manifest {
            command: "frame-check",
            config: cfg,
            outputs: vec!["frame_check.csv".into()],
        },
    )?;
    Ok(ok)
}

pub fn simulate(cfg: &ExperimentConfig) -> Result<bool> {
    let dir = cfg.out_dir();
    let spec = power_law_spectrum(cfg.spin(), cfg.l_max(), cfg.alpha(), cfg.c())?;
    let mut outputs = vec!["spectrum.csv".into(), "empirical_spectrum.csv".into()];
    spinharm::io::write_spectrum(open_out(&dir, "spectrum.csv")?, &spec)?;
    let mut samples = Vec::with_capacity(cfg.n_reps());
    for rep in 0..cfg.n_reps() {
        let f = spinharm::fields::sample_field_replicate(&spec, cfg.seed(), rep as u64);
        let name = format!("sample_{rep:05}.csv");
        spinharm::io::write_coefficients(open_out(&dir, &name)?, &f.coeffs)?;
        outputs.push(name);
        samples.push(f.coeffs);
    }
    let hat = spinharm::fields::empirical_spectrum_ensemble(&samples);
    let mut csv = open_out(&dir, "empirical_spectrum.csv")?;
    writeln!(csv, "l,c_hat,c_model")?;
    for (i, v) in hat.iter().enumerate() {
        let l = spec.l_min() + i as u32;
        writeln!(csv, "{l},{v},{}", spec.get(l))?;
    }
    println!(
        "simulate: {} replicates, spin={} l_max={} variance={:.4}",
        cfg.n_reps(),
        cfg.spin(),
        cfg.l_max(),
        spec.variance()
    );
    write_manifest(
        &dir,
        &Manifest {
            command: "simulate",
            config: cfg,
            outputs,
        },
    )?;
    Ok(true)
}

pub fn localization(
    cfg: &ExperimentConfig,
    j_probe: Option<Vec<i32>>,
    samples: usize,
    amp_tol: f64,
    slope_max: f64,
) -> Result<bool> {
    let dir = cfg.out_dir();
    let a = if cfg.a.is_some() { cfg.a() } else { 3.0 };
    let filter = build_filter(a);
    let js = j_probe.unwrap_or_else(|| vec![-2, -3, -4, -5]);
    let x = SpherePoint::from_angles(std::f64::consts::FRAC_PI_2, 0.3);
    let mut csv = open_out(&dir, "localization.csv")?;
    writeln!(csv, "t,d,d_over_t,abs_kernel")?;
    let mut summary = open_out(&dir, "localization_summary.csv")?;
    writeln!(summary, "t,amplitude,amp_t2,far_slope")?;
    let mut amp_t2 = Vec::new();
    let mut slopes = Vec::new();
    for &j in &js {
        let t = a.powi(j);
        let l_max = (a / t) as u32 + 8;
        // full probe only at affordable band limits; amplitude is closed form
        let amp = kernel_amplitude(&filter, t, cfg.spin());
        amp_t2.push(amp * t * t);
        if l_max <= 512 {
            let rep = localization_probe(&filter, t, cfg.spin(), &x, samples, l_max)?;
            for row in &rep.rows {
                writeln!(csv, "{t},{},{},{}", row.distance, row.d_over_t, row.abs_kernel)?;
            }
            writeln!(summary, "{t},{amp},{},{}", amp * t * t, rep.far_slope)?;
            slopes.push(rep.far_slope);
        } else {
            writeln!(summary, "{t},{amp},{},", amp * t * t)?;
        }
    }
    let lo = amp_t2.iter().cloned().fold(f64::INFINITY, f64::min);
    let hi = amp_t2.iter().cloned().fold(0.0f64, f64::max);
    let amp_ok = hi / lo <= 1.0 + 2.0 * amp_tol;
    let slope_ok = !slopes.is_empty() && slopes.iter().all(|s| *s <= slope_max);
    println!(
        "localization: amp*t^2 in [{lo:.5},{hi:.5}] ({}) far slopes {:?} ({})",
        if amp_ok { "ok" } else { "FAIL" },
        slopes,
        if slope_ok { "ok" } else { "FAIL" }
    );
    write_manifest(
        &dir,
        &Manifest {
            command: "localization",
            config: cfg,
            outputs: vec!["localization.csv".into(), "localization_summary.csv".into()],
        },
    )?;
    Ok(amp_ok && slope_ok)
}

pub fn uncorrelation(cfg: &ExperimentConfig, distance: f64, corr_max: f64) -> Result<bool> {
    let dir = cfg.out_dir();
    let filter = build_filter(cfg.a());
    let spec = power_law_spectrum(cfg.spin(), cfg.l_max(), cfg.alpha(), cfg.c())?;
    let js = cfg
        .j_list
        .clone()
        .unwrap_or_else(|| vec![-8, -12, -16, -20]);
    let x = SpherePoint::from_angles(1.2, 0.0);
    let y = SpherePoint::from_angles(1.2 + distance, 0.0);
    let rows = uncorrelation_experiment(&spec, &filter, &js, &[(x, y)], cfg.n_reps(), cfg.seed())?;
    let mut csv = open_out(&dir, "uncorrelation.csv")?;
    writeln!(csv, "j,pair_id,d_over_t,corr,se")?;
    for r in &rows {
        writeln!(csv, "{},{},{},{},{}", r.j, r.pair, r.d_over_t, r.corr, r.se)?;
    }
    let mut ok = true;
    for w in rows.windows(2) {
        if w[1].corr > w[0].corr + 2.0 * (w[0].se + w[1].se) {
            ok = false;
        }
    }
    let last = rows.last().map(|r| r.corr).unwrap_or(1.0);
    ok &= last < corr_max;
    println!(
        "uncorrelation: |corr| by scale {:?} final={last:.4} -> {}",
        rows.iter().map(|r| (r.j, r.corr)).collect::<Vec<_>>(),
        if ok { "ok" } else { "FAIL" }
    );
    write_manifest(
        &dir,
        &Manifest {
            command: "uncorrelation",
            config: cfg,
            outputs: vec!["uncorrelation.csv".into()],
        },
    )?;
    Ok(ok)
}

pub fn clt(cfg: &ExperimentConfig, ks_max: f64, dump_samples: bool) -> Result<bool> {
    let dir = cfg.out_dir();
    let filter = build_filter(cfg.a());
    let spec = power_law_spectrum(cfg.spin(), cfg.l_max(), cfg.alpha(), cfg.c())?;
    let js = cfg
        .j_list
        .clone()
        .unwrap_or_else(|| vec![-22, -23, -24, -25]);
    let report = clt_experiment(&spec, &filter, &js, cfg.n_reps(), cfg.seed());
    let mut csv = open_out(&dir, "clt.csv")?;
    writeln!(csv, "j,ks,n_reps,n_shells,dof")?;
    let mut outputs = vec!["clt.csv".into()];
    for sc in &report.scales {
        writeln!(csv, "{},{},{},{},{}", sc.j, sc.ks, cfg.n_reps(), sc.n_shells, sc.dof)?;
        if dump_samples {
            let name = format!("clt_samples_j{}.csv", sc.j);
            let mut f = open_out(&dir, &name)?;
            writeln!(f, "s_value")?;
            for v in &sc.samples {
                writeln!(f, "{v}")?;
            }
            outputs.push(name);
        }
    }
    println!(
        "clt: {:?}",
        report.scales.iter().map(|s| (s.j, s.ks)).collect::<Vec<_>>()
    );
    let ok = if ks_max > 0.0 {
        report
            .scales
            .last()
            .map(|s| s.ks < ks_max)
            .unwrap_or(false)
    } else {
        true
    };
    write_manifest(
        &dir,
        &Manifest {
            command: "clt",
            config: cfg,
            outputs,
        },
    )?;
    Ok(ok)
}

pub fn sj_test(
    cfg: &ExperimentConfig,
    j: Option<i32>,
    level: f64,
    scale: f64,
    rate_tol: f64,
    with_frame: bool,
) -> Result<bool> {
    let dir = cfg.out_dir();
    let filter = build_filter(cfg.a());
    let spec = power_law_spectrum(cfg.spin(), cfg.l_max(), cfg.alpha(), cfg.c())?;
    let j = j
        .or_else(|| cfg.j_list.as_ref().and_then(|v| v.first().copied()))
        .unwrap_or(-24);
    let cal = sj_calibration(&spec, &filter, j, cfg.n_reps(), level, cfg.seed(), scale)?;
    let mut csv = open_out(&dir, "sj.csv")?;
    writeln!(csv, "rep,s_value")?;
    for (i, s) in cal.s_samples.iter().enumerate() {
        writeln!(csv, "{i},{s}")?;
    }
    // per-scale table of one representative realization
    let js = cfg.j_list.clone().unwrap_or_else(|| vec![j]);
    let frame = if with_frame {
        Some(build_frame(cfg.a(), cfg.b(), cfg.spin(), cfg.l_max())?)
    } else {
        None
    };
    let sample = spinharm::fields::sample_field_replicate(&spec, cfg.seed(), 0);
    let rows = spinharm::stats::scale_statistics(
        &sample.coeffs,
        &spec,
        &filter,
        frame.as_ref(),
        &js,
    )?;
    let mut table = open_out(&dir, "scale_stats.csv")?;
    writeln!(table, "j,gamma_hat,gamma_tilde,gamma_j,mean,var,s_j")?;
    for r in &rows {
        let gt = r.gamma_tilde.map(|v| v.to_string()).unwrap_or_default();
        writeln!(
            table,
            "{},{},{gt},{},{},{},{}",
            r.j, r.gamma_hat, r.gamma_j, r.mean, r.var, r.s_value
        )?;
    }
    let ok = if rate_tol > 0.0 {
        (cal.rejection_rate - level).abs() <= rate_tol
    } else {
        true
    };
    println!(
        "sj-test: j={j} level={level} scale={scale} rejection_rate={:.4} -> {}",
        cal.rejection_rate,
        if ok { "ok" } else { "FAIL" }
    );
    write_manifest(
        &dir,
        &Manifest {
            command: "sj-test",
            config: cfg,
            outputs: vec!["sj.csv".into(), "scale_stats.csv".into()],
        },
    )?;
    Ok(ok)
}
