//! The `verify` suite: inequality kernels, oracle equivalence, the energy
//! gradient, the counterexample data, and the identities, bounds and ledger
//! of the configured scenario.

use std::path::Path;
use std::sync::Arc;

use crystal_core::evolution::{dissipation_ledger_check, run_evolution_with};
use crystal_core::grid::integrate;
use crystal_core::stationary::{claim32_assert, solve_stationary, stationary_diagnostics, DISTINCT_GAP};
use crystal_core::verification::{
    energy_gradient_check, fj_generator, oracle_stationary_dense, scalar_inequality_sweep, vector_inequality_sweep,
    SweepSummary, ORACLE_MIN_STARTS,
};
use crystal_core::{EvolutionConfig64, Grid64, NodeField64, Params64};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use crate::config::ScenarioConfig;
use crate::output::CsvTable;
use crate::run::{effective_params, write_text, RunReport};
use crate::HarnessError;

/// Absolute bound on the identity gaps.
pub const IDENTITY_TOL: f64 = 1e-9;
/// Max-norm agreement required between solver and oracle.
pub const ORACLE_AGREEMENT: f64 = 1e-8;
/// Bound on the per-step mass identity.
pub const MASS_TOL: f64 = 1e-10;
/// Relative bound of the energy gradient check.
pub const GRADIENT_TOL: f64 = 1e-5;
const SHARDS: usize = 8;
const VECTOR_PS: [f64; 4] = [1.1, 1.5, 2.0, 3.0];

/// Outcome of one check of the suite.
#[derive(Debug, Clone, PartialEq)]
pub struct CheckResult {
    pub name: &'static str,
    pub cases: usize,
    pub violations: usize,
    /// Worst observed value of the checked quantity, in the check's own units.
    pub worst: f64,
    pub details: Vec<String>,
}

impl CheckResult {
    fn new(name: &'static str) -> Self {
        Self { name, cases: 0, violations: 0, worst: 0.0, details: Vec::new() }
    }

    fn violate(&mut self, detail: String) {
        self.violations += 1;
        self.details.push(detail);
    }
}

/// Seed of shard `i`; fixed by the base seed alone.
pub fn shard_seed(base: u64, i: usize) -> u64 {
    base ^ (i as u64 + 1).wrapping_mul(0x9E37_79B9_7F4A_7C15)
}

fn shard_cases(total: usize, i: usize) -> usize {
    total / SHARDS + usize::from(i < total % SHARDS)
}

fn merge(name: &'static str, parts: impl Iterator<Item = SweepSummary>) -> CheckResult {
    let mut out = CheckResult::new(name);
    out.worst = f64::INFINITY;
    for s in parts {
        out.cases += s.cases;
        out.violations += s.violations;
        out.worst = out.worst.min(s.worst_relative);
    }
    if out.violations > 0 {
        out.details.push(format!("{} cases below -1e-12 relative slack (worst {:e})", out.violations, out.worst));
    }
    out
}

pub fn inequality_checks(vector_cases: usize, scalar_cases: usize, seed: u64) -> Vec<CheckResult> {
    let vector: Vec<SweepSummary> = (0..SHARDS)
        .into_par_iter()
        .map(|i| vector_inequality_sweep(shard_cases(vector_cases, i), &VECTOR_PS, shard_seed(seed, i)))
        .collect();
    let scalar: Vec<[SweepSummary; 3]> = (0..SHARDS)
        .into_par_iter()
        .map(|i| scalar_inequality_sweep(shard_cases(scalar_cases, i), &VECTOR_PS, shard_seed(seed ^ 1, i)))
        .collect();
    vec![
        merge("vector_monotonicity", vector.into_iter()),
        merge("scalar_convexity", scalar.iter().map(|s| s[0])),
        merge("scalar_young", scalar.iter().map(|s| s[1])),
        merge("edge_exponential", scalar.iter().map(|s| s[2])),
    ]
}

/// One random instance on at most five nodes.
#[derive(Debug, Clone)]
pub struct OracleInstance {
    pub f: NodeField64,
    pub p: f64,
    pub tau: f64,
}

/// Instance `k` cycles through 2 to 5 nodes, p in {1.2, 1.5, 2} and tau in
/// {0.5, 0.1}; data is uniform in [-1, 1].
pub fn oracle_instances(count: usize, seed: u64) -> Vec<OracleInstance> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    (0..count)
        .map(|k| {
            let cells = 1 + k % 4;
            let grid = Arc::new(Grid64::new(1, &[cells], &[1.0]).expect("valid grid"));
            let values = (0..=cells).map(|_| rng.gen_range(-1.0..1.0)).collect();
            OracleInstance {
                f: NodeField64::new(grid, values).expect("finite data"),
                p: [1.2, 1.5, 2.0][k % 3],
                tau: [0.5, 0.1][k % 2],
            }
        })
        .collect()
}

/// Solver against the dense multi-start oracle; records multi-solution
/// findings in `notes`.
pub fn oracle_check(instances: &[OracleInstance], seed: u64, notes: &mut Vec<String>) -> CheckResult {
    let outcomes: Vec<Result<(f64, usize), String>> = instances
        .par_iter()
        .enumerate()
        .map(|(k, inst)| {
            let params = Params64::new(inst.p, 1.0, inst.tau);
            let solved = solve_stationary(&inst.f, &params, &Default::default()).map_err(|e| e.to_string())?;
            let oracle = oracle_stationary_dense(&inst.f, inst.p, 1.0, inst.tau, ORACLE_MIN_STARTS, shard_seed(seed, k))
                .map_err(|e| e.to_string())?;
            let (_, gap) = oracle.closest(solved.state.u.values()).ok_or("oracle found no solution")?;
            Ok((gap, oracle.distinct()))
        })
        .collect();
    let mut out = CheckResult::new("oracle_equivalence");
    for (k, outcome) in outcomes.into_iter().enumerate() {
        out.cases += 1;
        match outcome {
            Ok((gap, distinct)) => {
                out.worst = out.worst.max(gap);
                if distinct > 1 {
                    notes.push(format!(
                        "NON-UNIQUENESS: oracle instance {k} has {distinct} fixed points more than {DISTINCT_GAP:e} apart"
                    ));
                }
                if !(gap <= ORACLE_AGREEMENT) {
                    out.violate(format!("instance {k}: solver and oracle differ by {gap:e}"));
                }
            }
            Err(e) => out.violate(format!("instance {k}: {e}")),
        }
    }
    out
}

fn gradient_check(seed: u64) -> CheckResult {
    let mut out = CheckResult::new("energy_gradient");
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    for (dim, cells) in [(1, vec![32]), (2, vec![8, 8])] {
        let g = Arc::new(Grid64::new(dim, &cells, &vec![1.0; dim]).expect("valid grid"));
        for p in [1.3, 1.5, 2.0] {
            // a uniform slope keeps every gradient away from zero
            let u = NodeField64::from_fn(g.clone(), |x| 2.0 * x[0] + x[1] + 0.01 * (5.0 * x[0]).sin());
            let v = NodeField64::new(g.clone(), (0..g.node_count()).map(|_| rng.gen_range(-1.0..1.0)).collect())
                .expect("finite direction");
            out.cases += 1;
            match energy_gradient_check(&u, p, &v, 1e-5) {
                Ok(c) => {
                    out.worst = out.worst.max(c.relative_error);
                    if !(c.relative_error <= GRADIENT_TOL) {
                        out.violate(format!("dim {dim}, p {p}: relative error {:e}", c.relative_error));
                    }
                }
                Err(e) => out.violate(format!("dim {dim}, p {p}: {e}")),
            }
        }
    }
    out
}

fn fj_check() -> CheckResult {
    let mut out = CheckResult::new("fj_quadrature");
    for j in [2usize, 10, 50] {
        let cells = 1024;
        let g = Arc::new(Grid64::new(1, &[cells], &[1.0]).expect("valid grid"));
        let f = fj_generator(j, g.clone()).expect("unit interval");
        let h = 1.0 / cells as f64;
        let integral = integrate(&f).abs();
        let bound = 4.0 * (j as f64).powi(3) * h * h;
        out.cases += 1;
        out.worst = out.worst.max(integral / bound);
        if !(integral <= bound) {
            out.violate(format!("j {j}: |sum f h| = {integral:e} exceeds {bound:e}"));
        }
    }
    out
}

fn stationary_checks(config: &ScenarioConfig) -> Result<Vec<CheckResult>, HarnessError> {
    let grid = Arc::new(config.grid.build()?);
    let params = effective_params(config);
    let f = config.scenario.data(&grid, params.a, params.tau, config.seed)?;
    let mut identities = CheckResult::new("identity_gaps");
    let mut claim = CheckResult::new("claim32_bounds");
    identities.cases = 4;
    claim.cases = 1;
    match solve_stationary(&f, &params, &config.solver.stationary_options(config.seed)) {
        Ok(r) => {
            let d = stationary_diagnostics(&r.state, &f, &params).map_err(|e| HarnessError::Solver(e.to_string()))?;
            for (name, gap) in [("I1", d.identity_i1), ("I2", d.identity_i2), ("I3", d.identity_i3), ("I4", d.identity_i4)] {
                identities.worst = identities.worst.max(gap.abs());
                if !(gap.abs() <= IDENTITY_TOL) {
                    identities.violate(format!("{name} gap {gap:e}"));
                }
            }
            let c = claim32_assert(&r.state, &f, &params).map_err(|e| HarnessError::Solver(e.to_string()))?;
            claim.worst = c.min_slack();
            if !c.pass {
                claim.violate(format!("min slack {:e} at scale {:e}", c.min_slack(), c.scale));
            }
        }
        Err(e) => {
            identities.violate(format!("stationary solve failed: {e}"));
            claim.violate(format!("stationary solve failed: {e}"));
        }
    }
    Ok(vec![identities, claim])
}

fn evolution_checks(config: &ScenarioConfig) -> Result<Vec<CheckResult>, HarnessError> {
    let Some(evo) = config.evolution else { return Ok(Vec::new()) };
    let grid = Arc::new(config.grid.build()?);
    let params = effective_params(config);
    let u0 = config.scenario.initial_height(&grid, params.a, params.tau, config.seed)?;
    let cfg = EvolutionConfig64::new(evo.final_time, evo.steps).map_err(|e| HarnessError::Config(e.to_string()))?;
    let mut ledger = CheckResult::new("dissipation_ledger");
    let mut mass = CheckResult::new("mass_identity");
    let run = match run_evolution_with(&u0, &cfg, &params, &config.solver.solver_options(), config.output.eps_sing) {
        Ok(run) => run,
        Err(f) => {
            ledger.violate(format!("evolution failed: {f}"));
            f.partial
        }
    };
    let check = dissipation_ledger_check(&run.ledger);
    ledger.cases += run.ledger.rows.len();
    ledger.worst = check.worst_margin;
    if let Some(k) = check.first_violation {
        ledger.violate(format!("energy inequality fails first at step {k} (worst margin {:e})", check.worst_margin));
    }
    if !check.energy_nonincreasing {
        ledger.violate("energy increases along the run".into());
    }
    for row in &run.ledger.rows {
        mass.cases += 1;
        mass.worst = mass.worst.max(row.mass_gap.abs());
        if !(row.mass_gap.abs() <= MASS_TOL) {
            mass.violate(format!("step {}: mass gap {:e}", row.k, row.mass_gap));
        }
    }
    Ok(vec![ledger, mass])
}

/// Runs every check of the suite.
pub fn verification_suite(config: &ScenarioConfig, notes: &mut Vec<String>) -> Result<Vec<CheckResult>, HarnessError> {
    let v = &config.verify;
    let mut checks = inequality_checks(v.vector_cases, v.scalar_cases, config.seed);
    checks.push(oracle_check(&oracle_instances(v.oracle_instances, config.seed), config.seed, notes));
    checks.push(gradient_check(config.seed));
    checks.push(fj_check());
    checks.extend(stationary_checks(config)?);
    checks.extend(evolution_checks(config)?);
    Ok(checks)
}

pub(crate) fn run_verify(config: &ScenarioConfig, dir: &Path, report: &mut RunReport) -> Result<(), HarnessError> {
    let checks = verification_suite(config, &mut report.notes)?;
    let mut table = CsvTable::new(&["check", "cases", "violations", "worst", "status"]);
    let mut details = String::new();
    for c in &checks {
        let status = if c.violations == 0 { "pass" } else { "violated" };
        table.push(vec![c.name.into(), c.cases.into(), c.violations.into(), c.worst.into(), status.into()]);
        for d in &c.details {
            details.push_str(&format!("{}: {d}\n", c.name));
        }
    }
    let path = dir.join("verify.csv");
    table.write(&path)?;
    report.files.push(path);
    write_text(dir, "violations.txt", &details, report)?;
    let violated: usize = checks.iter().filter(|c| c.violations > 0).count();
    if violated > 0 {
        return Err(HarnessError::Violations { checks: violated, details });
    }
    Ok(())
}
