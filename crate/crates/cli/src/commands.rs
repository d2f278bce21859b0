use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};

use fctncd_core::bench::{self, cases, fmt_g6};
use fctncd_core::lp::OBJECTIVE_TOL;
use fctncd_core::{advance, Grid, ScalarField, SchemeKind};

use crate::config::{LoadedConfig, OUT_DIR_ENV};
use crate::CliError;

/// Snapshot CSV: `x,value` (1D) or `x,y,value` (2D), every lattice node.
pub fn snapshot_csv(grid: &Grid, field: &ScalarField) -> String {
    let mut out = String::from(if grid.dim() == 1 { "x,value\n" } else { "x,y,value\n" });
    for (p, v) in field.values().iter().enumerate() {
        let x = grid.point(p);
        if grid.dim() == 1 {
            let _ = writeln!(out, "{},{}", x[0], v);
        } else {
            let _ = writeln!(out, "{},{},{}", x[0], x[1], v);
        }
    }
    out
}

fn write(path: &Path, text: &str) -> Result<(), CliError> {
    fs::write(path, text).map_err(|e| CliError::Io(std::io::Error::new(e.kind(), format!("{}: {e}", path.display()))))
}

pub fn run(path: &Path) -> Result<(), CliError> {
    let cfg = LoadedConfig::load(path)?;
    let (case, step, has_exact) = cfg.build()?;
    let dir = cfg.output_dir();
    fs::create_dir_all(&dir)?;
    let prefix = cfg.prefix();
    let every = cfg.config.output.snapshot_every;
    let snapshot = |n: usize, f: &ScalarField| write(&dir.join(format!("{prefix}_{n:06}.csv")), &snapshot_csv(&case.grid, f));

    let mut field = ScalarField::initial(&case.grid, &case.spec, case.t0)?;
    if every > 0 {
        snapshot(0, &field)?;
    }
    let (mut lo, mut hi) = field.interior_min_max();
    let (mut outer, mut non_converged, mut gap) = (0usize, 0usize, None::<f64>);
    for n in 0..case.steps {
        field.set_time(case.t0 + n as f64 * step.dt);
        let (next, report) = advance(&case.grid, &case.spec, &field, &step)?;
        field = next;
        outer += report.iterations;
        non_converged += usize::from(!report.converged);
        if let Some(g) = report.oracle_gap {
            gap = Some(gap.map_or(g, |o| o.max(g)));
            if g > OBJECTIVE_TOL {
                eprintln!("fctncd: step {}: dense and separable limiter objectives differ by {g:e}", n + 1);
            }
        }
        let (a, b) = field.interior_min_max();
        lo = lo.min(a);
        hi = hi.max(b);
        let last = n + 1 == case.steps;
        if last || (every > 0 && (n + 1) % every == 0) {
            snapshot(n + 1, &field)?;
        }
    }
    field.set_time(case.t_end());

    let mut summary = format!(
        "summary {} steps={} t_end={} dt={} outer_iterations={outer} non_converged={non_converged} min={} max={}",
        cfg.echo(),
        case.steps,
        fmt_g6(case.t_end()),
        step.dt,
        fmt_g6(lo),
        fmt_g6(hi)
    );
    if let Some(g) = gap {
        let _ = write!(summary, " max_oracle_gap={g:e}");
    }
    if has_exact {
        let exact = case.exact_field(case.t_end())?;
        for w in &case.windows {
            let _ = write!(
                summary,
                " l1[{n}]={} l1_alt[{n}]={} y_max[{n}]={}",
                fmt_g6(bench::l1_error(&case.grid, &field, &exact, w)?),
                fmt_g6(bench::l1_alt(&case.grid, &field, &exact, w)?),
                fmt_g6(bench::max_value(&field, w)?),
                n = w.name
            );
        }
    }
    println!("{summary}");
    write(&dir.join(format!("{prefix}_summary.txt")), &format!("{summary}\n"))?;
    if non_converged > 0 {
        return Err(CliError::NonConvergence(format!(
            "{non_converged} of {} steps did not converge",
            case.steps
        )));
    }
    Ok(())
}

/// Relative `--out` paths are placed under `FCTNCD_OUT_DIR` when it is set.
fn resolve_out(out: &Path) -> PathBuf {
    match std::env::var_os(OUT_DIR_ENV) {
        Some(d) if !d.is_empty() && out.is_relative() => PathBuf::from(d).join(out),
        _ => out.to_path_buf(),
    }
}

pub fn bench(
    rotation: bool,
    schemes: &[SchemeKind],
    sigmas: &[f64],
    out: Option<&Path>,
    oracle: bool,
) -> Result<(), CliError> {
    if let Some(s) = sigmas.iter().find(|s| !(0.0..=1.0).contains(*s)) {
        return Err(CliError::Config(format!("sigma = {s} outside [0, 1]")));
    }
    if schemes.is_empty() || sigmas.is_empty() {
        return Err(CliError::Config("need at least one scheme and one sigma".into()));
    }
    let case = if rotation { cases::rotation_case()? } else { cases::advection_case()? };
    let report = bench::run_table_with(&case, schemes, sigmas, |c| c.with_oracle(oracle))?;
    let csv = report.to_csv();
    match out {
        Some(p) => {
            let p = resolve_out(p);
            if let Some(parent) = p.parent().filter(|d| !d.as_os_str().is_empty()) {
                fs::create_dir_all(parent)?;
            }
            write(&p, &csv)?;
        }
        None => print!("{csv}"),
    }
    for s in &report.stats {
        if let Some(g) = s.max_oracle_gap {
            eprintln!("fctncd: {} sigma={}: max dense/separable objective gap {g:e}", s.scheme, s.sigma);
        }
    }
    let failed: Vec<String> = report
        .stats
        .iter()
        .filter(|s| s.non_converged > 0)
        .map(|s| format!("{} sigma={} ({} steps)", s.scheme, s.sigma, s.non_converged))
        .collect();
    if !failed.is_empty() {
        return Err(CliError::NonConvergence(format!("non-converged steps in {}", failed.join(", "))));
    }
    Ok(())
}

pub fn converge(path: &Path) -> Result<(), CliError> {
    let cfg = LoadedConfig::load(path)?;
    let (levels, step, make) = cfg.converge_plan()?;
    let rows = bench::refinement_study(&levels, &step, make)?;
    let mut csv = String::from("cells,l1_error,max_error,order\n");
    for r in &rows {
        let order = r.order.map(fmt_g6).unwrap_or_default();
        let _ = writeln!(csv, "{},{},{},{order}", r.cells, fmt_g6(r.l1_error), fmt_g6(r.max_error));
    }
    print!("{csv}");
    let dir = cfg.output_dir();
    fs::create_dir_all(&dir)?;
    let prefix = cfg.config.output.prefix.clone().unwrap_or_else(|| "converge".into());
    write(&dir.join(format!("{prefix}_converge.csv")), &csv)?;
    Ok(())
}
