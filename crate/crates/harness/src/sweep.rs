use std::fs;
use std::path::Path;

use rayon::prelude::*;

use crate::config::{delta_steps, Mode, ScenarioConfig, SweepAxis};
use crate::output::{write_manifest, Cell, CsvTable};
use crate::run::{run_evolve, run_stationary, RunFigures, RunReport};
use crate::HarnessError;

pub const SUMMARY_COLUMNS: [&str; 14] = [
    "index",
    "axis",
    "value",
    "status",
    "h",
    "psi_l1",
    "psi_integral_abs",
    "min_rho",
    "sing_frac",
    "residual",
    "iterations",
    "tau_ratio",
    "error",
    "order",
];

/// The config of sweep entry `index`, writing below `dir`.
pub fn entry_config(config: &ScenarioConfig, index: usize, value: f64, dir: &Path) -> ScenarioConfig {
    let sweep = config.sweep.as_ref().expect("sweep config");
    let mut c = config.clone();
    c.sweep = None;
    c.output.dir = dir.join(format!("entry_{index:03}"));
    c.mode = match sweep.axis {
        SweepAxis::Delta => Mode::Evolve,
        SweepAxis::Epsilon => Mode::Perturbed,
        _ if config.params.eps_perturb > 0.0 => Mode::Perturbed,
        _ => Mode::Solve,
    };
    match sweep.axis {
        SweepAxis::Tau => c.params.tau = value,
        SweepAxis::H => c.grid.cells = vec![value as usize; c.grid.dim()],
        SweepAxis::Epsilon => c.params.eps_perturb = value,
        SweepAxis::Delta => {
            let evo = c.evolution.as_mut().expect("validated delta sweep");
            evo.steps = delta_steps(evo.final_time, value).expect("validated delta sweep");
        }
    }
    c
}

fn run_entry(c: &ScenarioConfig) -> (Result<RunFigures, HarnessError>, RunReport) {
    let mut report = RunReport::default();
    let dir = c.output.dir.clone();
    let result = fs::create_dir_all(&dir)
        .map_err(|source| HarnessError::Io { path: dir.clone(), source })
        .and_then(|_| write_manifest(&dir, c))
        .and_then(|m| {
            report.files.push(m);
            match c.mode {
                Mode::Evolve => run_evolve(c, &dir, &mut report),
                _ => run_stationary(c, &dir, &mut report),
            }
        });
    (result, report)
}

/// One run per value, concurrently, each in its own directory; the summary
/// is assembled in value order so it does not depend on scheduling.
pub(crate) fn run_sweep(config: &ScenarioConfig, dir: &Path, report: &mut RunReport) -> Result<(), HarnessError> {
    let sweep = config.sweep.as_ref().ok_or_else(|| HarnessError::Config("mode `sweep` needs [sweep]".into()))?;
    let entries: Vec<ScenarioConfig> =
        sweep.values.iter().enumerate().map(|(i, v)| entry_config(config, i, *v, dir)).collect();
    let results: Vec<_> = entries.par_iter().map(run_entry).collect();

    let mut table = CsvTable::new(&SUMMARY_COLUMNS);
    let mut failures = 0;
    let mut previous: Option<(f64, f64)> = None;
    for (i, ((result, entry_report), c)) in results.into_iter().zip(&entries).enumerate() {
        let value = sweep.values[i];
        let h = c.grid.lengths[0] / c.grid.cells[0] as f64;
        report.files.extend(entry_report.files);
        report.notes.extend(entry_report.notes.into_iter().map(|n| format!("entry {i}: {n}")));
        let mut row: Vec<Cell> = vec![i.into(), sweep.axis.name().into(), value.into()];
        match result {
            Ok(fig) => {
                let tau_ratio = (sweep.axis == SweepAxis::Tau).then(|| fig.psi_integral / c.params.tau.powf(1.0 / c.params.p));
                let order = match (previous, fig.error) {
                    (Some((h0, e0)), Some(e)) if h0 != h && e > 0.0 => Some((e0 / e).ln() / (h0 / h).ln()),
                    _ => None,
                };
                previous = fig.error.map(|e| (h, e));
                row.extend([Cell::from("ok"), h.into(), fig.psi_l1.into(), fig.psi_integral.into(), fig.min_rho.into()]);
                row.extend([fig.sing_frac.into(), fig.residual.into(), fig.iterations.into()]);
                row.extend([tau_ratio.into(), fig.error.into(), order.into()]);
            }
            Err(e) => {
                failures += 1;
                previous = None;
                report.notes.push(format!("entry {i} ({} = {value}) failed: {e}", sweep.axis.name()));
                row.push(format!("failed: {e}").into());
                row.push(h.into());
                row.extend(std::iter::repeat(Cell::Empty).take(SUMMARY_COLUMNS.len() - 5));
            }
        }
        table.push(row);
    }
    let path = dir.join("summary.csv");
    table.write(&path)?;
    report.files.push(path);
    if failures > 0 {
        return Err(HarnessError::Solver(format!("{failures} of {} sweep entries failed", entries.len())));
    }
    Ok(())
}
