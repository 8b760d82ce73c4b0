//! Line-based `key = value` configuration with `[section]` headers.
//!
//! ```text
//! mode = solve
//! scenario = random_smooth(3)
//!
//! [grid]
//! cells = 32, 32
//!
//! [params]
//! p = 1.5
//! tau = 0.1
//! ```
//!
//! Unknown keys and repeated keys are errors. A `[manifest]` section is
//! accepted and ignored, so a run manifest parses back into its config.

use std::collections::BTreeMap;
use std::fmt::{self, Write as _};
use std::path::PathBuf;
use std::str::FromStr;

use crystal_core::elliptic::SolverOptions;
use crystal_core::stationary::{StationaryMethod, StationaryOptions, DEFAULT_EPS_SING, DEFAULT_SEED};
use crystal_core::{Grid64, Params64};

use crate::scenario::Scenario;
use crate::HarnessError;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Mode {
    Solve,
    Perturbed,
    Evolve,
    Linearized,
    Sweep,
    Verify,
}

impl Mode {
    pub const ALL: [Mode; 6] = [Mode::Solve, Mode::Perturbed, Mode::Evolve, Mode::Linearized, Mode::Sweep, Mode::Verify];

    pub fn name(self) -> &'static str {
        match self {
            Mode::Solve => "solve",
            Mode::Perturbed => "perturbed",
            Mode::Evolve => "evolve",
            Mode::Linearized => "linearized",
            Mode::Sweep => "sweep",
            Mode::Verify => "verify",
        }
    }
}

impl fmt::Display for Mode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Mode {
    type Err = HarnessError;

    fn from_str(s: &str) -> Result<Self, HarnessError> {
        Mode::ALL
            .into_iter()
            .find(|m| m.name() == s)
            .ok_or_else(|| HarnessError::Config(format!("unknown mode `{s}`")))
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct GridSpec {
    pub cells: Vec<usize>,
    pub lengths: Vec<f64>,
}

impl GridSpec {
    pub fn dim(&self) -> usize {
        self.cells.len()
    }

    pub fn build(&self) -> Result<Grid64, HarnessError> {
        Grid64::new(self.dim(), &self.cells, &self.lengths).map_err(|e| HarnessError::Config(e.to_string()))
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ParamSpec {
    pub p: f64,
    pub a: f64,
    pub tau: f64,
    pub eps_perturb: f64,
    /// Allows `p > 2`.
    pub experimental: bool,
}

impl ParamSpec {
    pub fn params(&self) -> Params64 {
        let mut params = Params64::new(self.p, self.a, self.tau).with_perturbation(self.eps_perturb);
        params.experimental = self.experimental;
        params
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SolverSpec {
    pub tol: f64,
    pub max_iterations: usize,
    pub damping: f64,
    pub backtrack: f64,
    pub method: StationaryMethod,
    pub sigma_continuation: bool,
    pub restarts: usize,
}

impl Default for SolverSpec {
    fn default() -> Self {
        let s = StationaryOptions::<f64>::default();
        Self {
            tol: s.solver.tol,
            max_iterations: s.solver.max_iterations,
            damping: s.solver.damping_initial,
            backtrack: s.solver.backtrack,
            method: s.method,
            sigma_continuation: s.sigma_continuation,
            restarts: s.restarts,
        }
    }
}

impl SolverSpec {
    pub fn solver_options(&self) -> SolverOptions<f64> {
        SolverOptions {
            tol: self.tol,
            max_iterations: self.max_iterations,
            damping_initial: self.damping,
            backtrack: self.backtrack,
        }
    }

    pub fn stationary_options(&self, seed: u64) -> StationaryOptions<f64> {
        StationaryOptions {
            solver: self.solver_options(),
            method: self.method,
            sigma_continuation: self.sigma_continuation,
            restarts: self.restarts,
            seed,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EvolutionSpec {
    pub final_time: f64,
    pub steps: usize,
}

#[derive(Debug, Clone, PartialEq)]
pub struct OutputSpec {
    pub dir: PathBuf,
    /// Every `snapshot_stride`-th step is written; 0 writes only the last.
    pub snapshot_stride: usize,
    pub eps_sing: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SweepAxis {
    Tau,
    /// Values are cells per axis.
    H,
    Delta,
    Epsilon,
}

impl SweepAxis {
    pub fn name(self) -> &'static str {
        match self {
            SweepAxis::Tau => "tau",
            SweepAxis::H => "h",
            SweepAxis::Delta => "delta",
            SweepAxis::Epsilon => "epsilon",
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SweepSpec {
    pub axis: SweepAxis,
    pub values: Vec<f64>,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct VerifySpec {
    pub vector_cases: usize,
    pub scalar_cases: usize,
    pub oracle_instances: usize,
}

impl Default for VerifySpec {
    fn default() -> Self {
        Self { vector_cases: 10_000, scalar_cases: 100_000, oracle_instances: 20 }
    }
}

/// A complete, validated run description.
#[derive(Debug, Clone, PartialEq)]
pub struct ScenarioConfig {
    pub mode: Mode,
    pub seed: u64,
    pub scenario: Scenario,
    pub grid: GridSpec,
    pub params: ParamSpec,
    pub solver: SolverSpec,
    pub evolution: Option<EvolutionSpec>,
    pub output: OutputSpec,
    pub sweep: Option<SweepSpec>,
    pub verify: VerifySpec,
}

/// Raw `section.key -> (value, line)` pairs.
struct Entries {
    map: BTreeMap<String, (String, usize)>,
}

impl Entries {
    fn parse(text: &str) -> Result<Self, HarnessError> {
        let mut map = BTreeMap::new();
        let mut section = String::new();
        for (n, raw) in text.lines().enumerate() {
            let line_no = n + 1;
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            if let Some(rest) = line.strip_prefix('[') {
                let name = rest
                    .strip_suffix(']')
                    .map(str::trim)
                    .filter(|s| !s.is_empty() && s.chars().all(|c| c.is_ascii_alphanumeric() || c == '_'))
                    .ok_or_else(|| HarnessError::Config(format!("line {line_no}: malformed section header `{line}`")))?;
                section = name.to_string();
                continue;
            }
            let (key, value) = line
                .split_once('=')
                .ok_or_else(|| HarnessError::Config(format!("line {line_no}: expected `key = value`, got `{line}`")))?;
            let (key, value) = (key.trim(), value.trim());
            if key.is_empty() {
                return Err(HarnessError::Config(format!("line {line_no}: empty key")));
            }
            if section == "manifest" {
                continue;
            }
            let full = if section.is_empty() { key.to_string() } else { format!("{section}.{key}") };
            if map.insert(full.clone(), (value.to_string(), line_no)).is_some() {
                return Err(HarnessError::Config(format!("line {line_no}: duplicate key `{full}`")));
            }
        }
        Ok(Self { map })
    }

    fn take(&mut self, key: &str) -> Option<(String, usize)> {
        self.map.remove(key)
    }

    fn get<T: FromStr>(&mut self, key: &str) -> Result<Option<T>, HarnessError> {
        match self.take(key) {
            None => Ok(None),
            Some((v, line)) => v
                .parse()
                .map(Some)
                .map_err(|_| HarnessError::Config(format!("line {line}: cannot parse `{key} = {v}`"))),
        }
    }

    fn list<T: FromStr>(&mut self, key: &str) -> Result<Option<Vec<T>>, HarnessError> {
        match self.take(key) {
            None => Ok(None),
            Some((v, line)) => v
                .split(',')
                .map(|s| s.trim().parse())
                .collect::<Result<Vec<T>, _>>()
                .map(Some)
                .map_err(|_| HarnessError::Config(format!("line {line}: cannot parse list `{key} = {v}`"))),
        }
    }

    fn finish(self) -> Result<(), HarnessError> {
        match self.map.into_iter().next() {
            None => Ok(()),
            Some((key, (_, line))) => Err(HarnessError::Config(format!("line {line}: unknown key `{key}`"))),
        }
    }
}

fn bad(msg: impl Into<String>) -> HarnessError {
    HarnessError::Config(msg.into())
}

impl ScenarioConfig {
    /// Parses and validates a config. `mode` from the command line fills in
    /// a missing `mode` key and must agree with a present one.
    pub fn parse(text: &str, mode: Option<Mode>) -> Result<Self, HarnessError> {
        let mut e = Entries::parse(text)?;
        let file_mode: Option<Mode> = e.get("mode")?;
        let mode = match (file_mode, mode) {
            (Some(a), Some(b)) if a != b => return Err(bad(format!("config mode `{a}` conflicts with command `{b}`"))),
            (Some(m), _) | (None, Some(m)) => m,
            (None, None) => return Err(bad("missing `mode`")),
        };
        let seed = e.get("seed")?.unwrap_or(DEFAULT_SEED);
        let scenario: Scenario = match e.take("scenario") {
            Some((v, line)) => v.parse().map_err(|m| bad(format!("line {line}: {m}")))?,
            None => return Err(bad("missing `scenario`")),
        };

        let cells: Vec<usize> = e.list("grid.cells")?.ok_or_else(|| bad("missing `grid.cells`"))?;
        let dim: usize = e.get("grid.dim")?.unwrap_or(cells.len());
        if dim != cells.len() {
            return Err(bad(format!("grid.dim = {dim} but {} cell counts given", cells.len())));
        }
        let lengths: Vec<f64> = e.list("grid.lengths")?.unwrap_or_else(|| vec![1.0; dim]);
        let grid = GridSpec { cells, lengths };
        grid.build()?;

        let params = ParamSpec {
            p: e.get("params.p")?.ok_or_else(|| bad("missing `params.p`"))?,
            a: e.get("params.a")?.unwrap_or(1.0),
            tau: e.get("params.tau")?.ok_or_else(|| bad("missing `params.tau`"))?,
            eps_perturb: e.get("params.eps_perturb")?.unwrap_or(0.0),
            experimental: e.get("params.experimental")?.unwrap_or(false),
        };
        params.params().validate().map_err(|err| bad(err.to_string()))?;

        let d = SolverSpec::default();
        let method = match e.take("solver.method") {
            None => d.method,
            Some((v, _)) if v == "newton" => StationaryMethod::Newton,
            Some((v, _)) if v == "picard" => StationaryMethod::Picard,
            Some((v, line)) => return Err(bad(format!("line {line}: unknown solver method `{v}`"))),
        };
        let solver = SolverSpec {
            tol: e.get("solver.tol")?.unwrap_or(d.tol),
            max_iterations: e.get("solver.max_iterations")?.unwrap_or(d.max_iterations),
            damping: e.get("solver.damping")?.unwrap_or(d.damping),
            backtrack: e.get("solver.backtrack")?.unwrap_or(d.backtrack),
            method,
            sigma_continuation: e.get("solver.sigma_continuation")?.unwrap_or(d.sigma_continuation),
            restarts: e.get("solver.restarts")?.unwrap_or(d.restarts),
        };
        solver.solver_options().validate().map_err(|err| bad(err.to_string()))?;

        let final_time: Option<f64> = e.get("evolution.final_time")?;
        let steps: Option<usize> = e.get("evolution.steps")?;
        let evolution = match (final_time, steps) {
            (Some(final_time), Some(steps)) => {
                crystal_core::EvolutionConfig64::new(final_time, steps).map_err(|err| bad(err.to_string()))?;
                Some(EvolutionSpec { final_time, steps })
            }
            (None, None) => None,
            _ => return Err(bad("`evolution.final_time` and `evolution.steps` go together")),
        };

        let output = OutputSpec {
            dir: e.get::<String>("output.dir")?.map(PathBuf::from).unwrap_or_else(|| PathBuf::from("out")),
            snapshot_stride: e.get("output.snapshot_stride")?.unwrap_or(10),
            eps_sing: e.get("output.eps_sing")?.unwrap_or(DEFAULT_EPS_SING),
        };
        if !(output.eps_sing > 0.0) {
            return Err(bad("output.eps_sing must be positive"));
        }

        let axis = match e.take("sweep.axis") {
            None => None,
            Some((v, line)) => Some(match v.as_str() {
                "tau" => SweepAxis::Tau,
                "h" => SweepAxis::H,
                "delta" => SweepAxis::Delta,
                "epsilon" => SweepAxis::Epsilon,
                _ => return Err(bad(format!("line {line}: unknown sweep axis `{v}`"))),
            }),
        };
        let values: Option<Vec<f64>> = e.list("sweep.values")?;
        let sweep = match (axis, values) {
            (Some(axis), Some(values)) => Some(SweepSpec { axis, values }),
            (None, None) => None,
            _ => return Err(bad("`sweep.axis` and `sweep.values` go together")),
        };

        let dv = VerifySpec::default();
        let verify = VerifySpec {
            vector_cases: e.get("verify.vector_cases")?.unwrap_or(dv.vector_cases),
            scalar_cases: e.get("verify.scalar_cases")?.unwrap_or(dv.scalar_cases),
            oracle_instances: e.get("verify.oracle_instances")?.unwrap_or(dv.oracle_instances),
        };
        e.finish()?;

        let config = Self { mode, seed, scenario, grid, params, solver, evolution, output, sweep, verify };
        config.check_mode()?;
        Ok(config)
    }

    fn check_mode(&self) -> Result<(), HarnessError> {
        self.scenario.check(self)?;
        match self.mode {
            Mode::Evolve | Mode::Linearized if self.evolution.is_none() => {
                Err(bad(format!("mode `{}` needs an [evolution] section", self.mode)))
            }
            Mode::Perturbed if !(self.params.eps_perturb >= 0.0) => Err(bad("perturbed mode needs params.eps_perturb >= 0")),
            Mode::Sweep => {
                let sweep = self.sweep.as_ref().ok_or_else(|| bad("mode `sweep` needs a [sweep] section"))?;
                self.check_sweep(sweep)
            }
            _ => Ok(()),
        }
    }

    fn check_sweep(&self, sweep: &SweepSpec) -> Result<(), HarnessError> {
        if sweep.values.is_empty() {
            return Err(bad("sweep.values is empty"));
        }
        for &v in &sweep.values {
            let ok = match sweep.axis {
                SweepAxis::Tau => v > 0.0 && v.is_finite(),
                SweepAxis::H => v >= 1.0 && v.fract() == 0.0,
                SweepAxis::Epsilon => v >= 0.0 && v.is_finite(),
                SweepAxis::Delta => {
                    let evo = self.evolution.ok_or_else(|| bad("a delta sweep needs an [evolution] section"))?;
                    v > 0.0 && delta_steps(evo.final_time, v).is_some()
                }
            };
            if !ok {
                return Err(bad(format!("sweep value {v} is not admissible on axis `{}`", sweep.axis.name())));
            }
        }
        Ok(())
    }

    /// Canonical text form; parses back to an equal config.
    pub fn to_text(&self) -> String {
        let mut s = String::new();
        let join = |v: &[f64]| v.iter().map(|x| x.to_string()).collect::<Vec<_>>().join(", ");
        let _ = writeln!(s, "mode = {}", self.mode);
        let _ = writeln!(s, "seed = {}", self.seed);
        let _ = writeln!(s, "scenario = {}", self.scenario);
        let _ = writeln!(s, "\n[grid]");
        let _ = writeln!(s, "dim = {}", self.grid.dim());
        let cells: Vec<String> = self.grid.cells.iter().map(|c| c.to_string()).collect();
        let _ = writeln!(s, "cells = {}", cells.join(", "));
        let _ = writeln!(s, "lengths = {}", join(&self.grid.lengths));
        let p = &self.params;
        let _ = writeln!(s, "\n[params]");
        let _ = writeln!(s, "p = {}\na = {}\ntau = {}\neps_perturb = {}\nexperimental = {}", p.p, p.a, p.tau, p.eps_perturb, p.experimental);
        let v = &self.solver;
        let method = match v.method {
            StationaryMethod::Newton => "newton",
            StationaryMethod::Picard => "picard",
        };
        let _ = writeln!(s, "\n[solver]");
        let _ = writeln!(
            s,
            "tol = {}\nmax_iterations = {}\ndamping = {}\nbacktrack = {}\nmethod = {method}\nsigma_continuation = {}\nrestarts = {}",
            v.tol, v.max_iterations, v.damping, v.backtrack, v.sigma_continuation, v.restarts
        );
        if let Some(evo) = &self.evolution {
            let _ = writeln!(s, "\n[evolution]\nfinal_time = {}\nsteps = {}", evo.final_time, evo.steps);
        }
        let o = &self.output;
        let _ = writeln!(s, "\n[output]\ndir = {}\nsnapshot_stride = {}\neps_sing = {}", o.dir.display(), o.snapshot_stride, o.eps_sing);
        if let Some(sw) = &self.sweep {
            let _ = writeln!(s, "\n[sweep]\naxis = {}\nvalues = {}", sw.axis.name(), join(&sw.values));
        }
        let vf = &self.verify;
        let _ = writeln!(
            s,
            "\n[verify]\nvector_cases = {}\nscalar_cases = {}\noracle_instances = {}",
            vf.vector_cases, vf.scalar_cases, vf.oracle_instances
        );
        s
    }
}

/// Number of steps of length `delta` covering `final_time`, if integral.
pub fn delta_steps(final_time: f64, delta: f64) -> Option<usize> {
    let steps = (final_time / delta).round();
    (steps >= 1.0 && (steps * delta - final_time).abs() <= 1e-9 * final_time).then_some(steps as usize)
}

#[cfg(test)]
mod tests {
    use super::*;

    const BASE: &str = "scenario = constant\n[grid]\ncells = 8\n[params]\np = 2\ntau = 0.1\n";

    #[test]
    fn command_mode_fills_in_and_must_agree() {
        assert_eq!(ScenarioConfig::parse(BASE, Some(Mode::Solve)).unwrap().mode, Mode::Solve);
        let text = format!("mode = evolve\n{BASE}");
        assert!(ScenarioConfig::parse(&text, Some(Mode::Solve)).is_err());
        assert!(ScenarioConfig::parse(BASE, None).is_err());
    }

    #[test]
    fn rejects_unknown_and_duplicate_keys() {
        let unknown = format!("{BASE}tua = 0.1\n");
        let err = ScenarioConfig::parse(&unknown, Some(Mode::Solve)).unwrap_err().to_string();
        assert!(err.contains("params.tua"), "{err}");
        let dup = format!("{BASE}tau = 0.2\n");
        assert!(ScenarioConfig::parse(&dup, Some(Mode::Solve)).unwrap_err().to_string().contains("duplicate"));
    }

    #[test]
    fn p_above_two_needs_the_flag() {
        let text = BASE.replace("p = 2", "p = 3");
        assert!(ScenarioConfig::parse(&text, Some(Mode::Solve)).is_err());
        let flagged = format!("{text}experimental = true\n");
        assert!(ScenarioConfig::parse(&flagged, Some(Mode::Solve)).is_ok());
    }

    #[test]
    fn delta_steps_requires_integral_count() {
        assert_eq!(delta_steps(0.1, 1e-3), Some(100));
        assert_eq!(delta_steps(0.1, 0.03), None);
    }
}
