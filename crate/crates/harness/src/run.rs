use std::fs;
use std::path::{Path, PathBuf};
use std::sync::Arc;

use crystal_core::grid::integrate;
use crystal_core::evolution::{dissipation_ledger_check, linearized_evolve, run_evolution_with, EvolutionRun};
use crystal_core::stationary::{
    claim32_assert, singular_tracker, solve_perturbed, solve_stationary, stationary_diagnostics, StationaryState,
};
use crystal_core::{EvolutionConfig64, Grid64, NodeField64, Params64};

use crate::config::{Mode, ScenarioConfig};
use crate::output::{write_file, write_manifest, write_snapshot, Cell, CsvTable};
use crate::HarnessError;

pub const LEDGER_COLUMNS: [&str; 9] = ["k", "t", "E", "D", "gap", "residual", "mass_gap", "min_rho", "sing_frac"];

const DIAGNOSTIC_COLUMNS: [&str; 32] = [
    "status",
    "termination",
    "iterations",
    "residual",
    "scale",
    "distinct_solutions",
    "residual_eq1",
    "residual_eq2",
    "identity_i1",
    "identity_i2",
    "identity_i3",
    "identity_i4",
    "claim32_pass",
    "claim32_min_slack",
    "claim32_inf_slack",
    "claim32_l2_slack",
    "claim32_q3_slack",
    "claim32_q4_slack",
    "claim32_q8_slack",
    "fisher",
    "p_energy",
    "tau_psi_sq",
    "tau_lp",
    "entropy",
    "entropy_bound",
    "min_rho",
    "max_psi",
    "singular_fraction",
    "high_fraction",
    "psi_l1",
    "perturbation_control",
    "error_max",
];

/// What a run wrote, plus anything the caller must surface.
#[derive(Debug, Clone, Default)]
pub struct RunReport {
    pub files: Vec<PathBuf>,
    /// Messages for the user, such as multi-solution findings.
    pub notes: Vec<String>,
}

impl RunReport {
    fn file(&mut self, path: PathBuf) -> &Path {
        self.files.push(path);
        self.files.last().expect("just pushed")
    }
}

/// Figures of one stationary or evolution run, for sweep summaries.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RunFigures {
    /// `sum |psi| h^dim`.
    pub psi_l1: f64,
    /// `|sum psi h^dim|`.
    pub psi_integral: f64,
    pub min_rho: f64,
    pub sing_frac: f64,
    pub residual: f64,
    pub iterations: usize,
    /// Max-norm distance to a known exact solution.
    pub error: Option<f64>,
}

/// Runs one config in its mode, writing into `config.output.dir`.
pub fn run_scenario(config: &ScenarioConfig) -> Result<RunReport, HarnessError> {
    let dir = config.output.dir.clone();
    fs::create_dir_all(&dir).map_err(|source| HarnessError::Io { path: dir.clone(), source })?;
    let mut report = RunReport::default();
    let manifest = write_manifest(&dir, config)?;
    report.files.push(manifest);
    match config.mode {
        Mode::Solve | Mode::Perturbed => run_stationary(config, &dir, &mut report).map(|_| ())?,
        Mode::Evolve => run_evolve(config, &dir, &mut report).map(|_| ())?,
        Mode::Linearized => run_linearized(config, &dir, &mut report)?,
        Mode::Sweep => crate::sweep::run_sweep(config, &dir, &mut report)?,
        Mode::Verify => crate::verify::run_verify(config, &dir, &mut report)?,
    }
    Ok(report)
}

pub(crate) fn effective_params(config: &ScenarioConfig) -> Params64 {
    let mut params = config.params.params();
    if config.mode != Mode::Perturbed {
        params.eps_perturb = 0.0;
    }
    params
}

pub(crate) fn run_stationary(config: &ScenarioConfig, dir: &Path, report: &mut RunReport) -> Result<RunFigures, HarnessError> {
    let grid = Arc::new(config.grid.build()?);
    let params = effective_params(config);
    let f = config.scenario.data(&grid, params.a, params.tau, config.seed)?;
    let opts = config.solver.stationary_options(config.seed);
    let result = if config.mode == Mode::Perturbed { solve_perturbed(&f, &params, &opts) } else { solve_stationary(&f, &params, &opts) };
    let exact = config.scenario.exact(&grid);
    let eps_sing = config.output.eps_sing;

    let mut table = CsvTable::new(&DIAGNOSTIC_COLUMNS);
    let (status, termination, iterations, residual, scale, state, history, alternatives) = match &result {
        Ok(r) => (
            "converged",
            format!("{:?}", r.termination),
            r.iterations,
            r.residual,
            Some(r.scale),
            Some(&r.state),
            &r.history,
            r.alternatives.len(),
        ),
        Err(e) => ("failed", e.error.to_string(), e.history.len(), e.best_residual, None, e.best.as_ref(), &e.history, 0),
    };
    let mut row: Vec<Cell> = vec![
        status.into(),
        termination.clone().into(),
        iterations.into(),
        residual.into(),
        scale.into(),
        (alternatives + 1).into(),
    ];
    let error = state.and_then(|s| exact.as_ref().map(|u| s.u.max_abs_diff(u)));
    match state {
        Some(s) => {
            let d = stationary_diagnostics(s, &f, &params).map_err(|e| HarnessError::Solver(e.to_string()))?;
            let c = claim32_assert(s, &f, &params).map_err(|e| HarnessError::Solver(e.to_string()))?;
            let t = singular_tracker(s, eps_sing);
            let q: Vec<Cell> = c.q_slacks.iter().map(|(_, s)| Cell::Real(*s)).collect();
            row.extend([d.residual_eq1, d.residual_eq2, d.identity_i1, d.identity_i2, d.identity_i3, d.identity_i4].map(Cell::from));
            row.push(Cell::Text(c.pass.to_string()));
            row.extend([c.min_slack(), c.inf_slack, c.l2_slack].map(Cell::from));
            row.extend(q);
            row.extend(
                [
                    d.fisher,
                    d.p_energy,
                    d.tau_psi_sq,
                    d.tau_lp,
                    d.entropy,
                    d.entropy_bound,
                    t.min_rho,
                    t.max_psi,
                    t.low_fraction,
                    t.high_fraction,
                    t.psi_l1,
                    d.perturbation_control,
                ]
                .map(Cell::from),
            );
            row.push(error.into());
        }
        None => row.extend(std::iter::repeat(Cell::Empty).take(DIAGNOSTIC_COLUMNS.len() - 6)),
    }
    table.push(row);
    table.write(report.file(dir.join("diagnostics.csv")))?;

    let mut log = CsvTable::new(&["iteration", "residual", "step", "merit", "eps_reg"]);
    for h in history {
        log.push(vec![h.iteration.into(), h.residual.into(), h.step.into(), h.merit.into(), h.eps_reg.into()]);
    }
    log.write(report.file(dir.join("iterations.csv")))?;

    if let Some(s) = state {
        write_state(dir, "", s, Some(&f), report)?;
    }
    if let Ok(r) = &result {
        if !r.alternatives.is_empty() {
            report.notes.push(format!(
                "NON-UNIQUENESS: {} distinct fixed points found; alternatives written as alt_*",
                r.alternatives.len() + 1
            ));
        }
        for (i, alt) in r.alternatives.iter().enumerate() {
            write_state(dir, &format!("alt_{}_", i + 1), alt, None, report)?;
        }
    }

    match result {
        Ok(r) => {
            let t = singular_tracker(&r.state, eps_sing);
            Ok(RunFigures {
                psi_l1: t.psi_l1,
                psi_integral: integrate(&r.state.psi).abs(),
                min_rho: t.min_rho,
                sing_frac: t.low_fraction,
                residual: r.residual,
                iterations: r.iterations,
                error,
            })
        }
        Err(e) => Err(HarnessError::Solver(format!("{e}; best residual {:e}", e.best_residual))),
    }
}

fn write_state(
    dir: &Path,
    prefix: &str,
    s: &StationaryState<f64>,
    f: Option<&NodeField64>,
    report: &mut RunReport,
) -> Result<(), HarnessError> {
    let grid = s.grid();
    let mut fields = CsvTable::new(&["node", "x", "y", "f", "u", "psi", "rho"]);
    for i in 0..grid.node_count() {
        let x = grid.position(i);
        let fi = f.map_or(Cell::Empty, |f| Cell::Real(f.values()[i]));
        fields.push(vec![i.into(), x[0].into(), x[1].into(), fi, s.u.values()[i].into(), s.psi.values()[i].into(), s.rho.values()[i].into()]);
    }
    fields.write(report.file(dir.join(format!("{prefix}fields.csv"))))?;
    for (name, field) in [("u", &s.u), ("psi", &s.psi), ("rho", &s.rho)] {
        write_snapshot(report.file(dir.join(format!("{prefix}{name}.txt"))), field)?;
    }
    Ok(())
}

fn evolution_config(config: &ScenarioConfig) -> Result<EvolutionConfig64, HarnessError> {
    let evo = config.evolution.ok_or_else(|| HarnessError::Config(format!("mode `{}` needs [evolution]", config.mode)))?;
    EvolutionConfig64::new(evo.final_time, evo.steps).map_err(|e| HarnessError::Config(e.to_string()))
}

fn snapshot_due(k: usize, last: usize, stride: usize) -> bool {
    k == last || (stride > 0 && k % stride == 0)
}

pub(crate) fn run_evolve(config: &ScenarioConfig, dir: &Path, report: &mut RunReport) -> Result<RunFigures, HarnessError> {
    let grid: Arc<Grid64> = Arc::new(config.grid.build()?);
    let params = effective_params(config);
    let cfg = evolution_config(config)?;
    let u0 = config.scenario.initial_height(&grid, params.a, params.tau, config.seed)?;
    let opts = config.solver.solver_options();
    let (run, failure) = match run_evolution_with(&u0, &cfg, &params, &opts, config.output.eps_sing) {
        Ok(run) => (run, None),
        Err(f) => (f.partial, Some(f.error)),
    };
    write_evolution(config, dir, &run, report)?;
    let check = dissipation_ledger_check(&run.ledger);
    report.notes.push(format!(
        "ledger: {} (worst margin {:e}, energy nonincreasing {})",
        if check.pass { "pass" } else { "violated" },
        check.worst_margin,
        check.energy_nonincreasing
    ));
    if let Some(k) = check.first_violation {
        report.notes.push(format!("ledger inequality first fails at step {k}"));
    }
    if let Some(error) = failure {
        return Err(HarnessError::Solver(format!("{error} after {} completed steps", run.ledger.rows.len())));
    }
    let last = run.states.last();
    let t = last.map(|s| singular_tracker(s, config.output.eps_sing));
    Ok(RunFigures {
        psi_l1: t.map_or(0.0, |t| t.psi_l1),
        psi_integral: last.map_or(0.0, |s| integrate(&s.psi).abs()),
        min_rho: t.map_or(1.0, |t| t.min_rho),
        sing_frac: t.map_or(0.0, |t| t.low_fraction),
        residual: run.ledger.rows.iter().fold(0.0, |m, r| m.max(r.residual)),
        iterations: run.ledger.rows.iter().map(|r| r.substeps).sum(),
        error: None,
    })
}

fn write_evolution(config: &ScenarioConfig, dir: &Path, run: &EvolutionRun<f64>, report: &mut RunReport) -> Result<(), HarnessError> {
    let mut ledger = CsvTable::new(&LEDGER_COLUMNS);
    let mut diag = CsvTable::new(&["k", "t", "slack", "mass_drift", "max_psi", "high_fraction", "psi_l1", "substeps"]);
    for (row, state) in run.ledger.rows.iter().zip(&run.states) {
        ledger.push(vec![
            row.k.into(),
            row.t.into(),
            row.energy.into(),
            row.dissipation.into(),
            row.gap.into(),
            row.residual.into(),
            row.mass_gap.into(),
            row.min_rho.into(),
            row.sing_frac.into(),
        ]);
        let t = singular_tracker(state, config.output.eps_sing);
        diag.push(vec![
            row.k.into(),
            row.t.into(),
            row.slack.into(),
            row.mass_drift.into(),
            t.max_psi.into(),
            t.high_fraction.into(),
            t.psi_l1.into(),
            row.substeps.into(),
        ]);
    }
    ledger.write(report.file(dir.join("ledger.csv")))?;
    diag.write(report.file(dir.join("diagnostics.csv")))?;
    let last = run.trajectory.len() - 1;
    for (k, u) in run.trajectory.iter().enumerate() {
        if snapshot_due(k, last, config.output.snapshot_stride) {
            write_snapshot(report.file(dir.join(format!("snapshots/u_{k:06}.txt"))), u)?;
            if k > 0 {
                write_snapshot(report.file(dir.join(format!("snapshots/psi_{k:06}.txt"))), &run.states[k - 1].psi)?;
            }
        }
    }
    Ok(())
}

fn run_linearized(config: &ScenarioConfig, dir: &Path, report: &mut RunReport) -> Result<(), HarnessError> {
    let grid = Arc::new(config.grid.build()?);
    let params = effective_params(config);
    let cfg = evolution_config(config)?;
    let u0 = config.scenario.initial_height(&grid, params.a, params.tau, config.seed)?;
    let run = linearized_evolve(&u0, &cfg, params.p, &config.solver.solver_options())
        .map_err(|e| HarnessError::Solver(e.to_string()))?;
    let delta = cfg.delta();
    let mut table = CsvTable::new(&["k", "t", "energy", "residual"]);
    for (k, e) in run.energies.iter().enumerate() {
        let residual = if k == 0 { Cell::Empty } else { Cell::Real(run.residuals[k - 1]) };
        table.push(vec![k.into(), (delta * k as f64).into(), (*e).into(), residual]);
    }
    table.write(report.file(dir.join("linearized.csv")))?;
    let last = run.trajectory.len() - 1;
    for (k, u) in run.trajectory.iter().enumerate() {
        if snapshot_due(k, last, config.output.snapshot_stride) {
            write_snapshot(report.file(dir.join(format!("snapshots/u_{k:06}.txt"))), u)?;
        }
    }
    match run.extinction_step {
        Some(k) => report.notes.push(format!("energy below extinction threshold from step {k}")),
        None => report.notes.push("no extinction within the run".into()),
    }
    Ok(())
}

pub(crate) fn write_text(dir: &Path, name: &str, text: &str, report: &mut RunReport) -> Result<(), HarnessError> {
    write_file(report.file(dir.join(name)), text)
}
