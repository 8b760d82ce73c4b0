use std::f64::consts::PI;
use std::fmt;
use std::str::FromStr;
use std::sync::Arc;

use crystal_core::verification::fj_generator;
use crystal_core::{Grid64, NodeField64};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::config::ScenarioConfig;
use crate::HarnessError;

/// Highest mode of [`Scenario::RandomSmooth`] along each axis.
const SMOOTH_MODES: usize = 4;
/// Width of [`Scenario::GaussianBump`] relative to the domain.
const BUMP_WIDTH: f64 = 0.1;

/// Named data sets. Each gives stationary data `f` and an initial height
/// for the time-dependent modes.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Scenario {
    Zero,
    /// `f = 1`.
    Constant,
    /// Data whose exact p = 2 solution is `prod cos(pi x_i)`; that product is
    /// also the initial height.
    ManufacturedP2,
    /// The concentrating counterexample data `f_j` on the unit interval.
    FjStress(usize),
    /// Centered Gaussian of width 0.1 in domain units.
    GaussianBump,
    /// Random cosine series with decaying coefficients; without a seed the
    /// run seed is used.
    RandomSmooth(Option<u64>),
}

impl fmt::Display for Scenario {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Scenario::Zero => f.write_str("zero"),
            Scenario::Constant => f.write_str("constant"),
            Scenario::ManufacturedP2 => f.write_str("manufactured_p2"),
            Scenario::FjStress(j) => write!(f, "fj_stress({j})"),
            Scenario::GaussianBump => f.write_str("gaussian_bump"),
            Scenario::RandomSmooth(None) => f.write_str("random_smooth"),
            Scenario::RandomSmooth(Some(s)) => write!(f, "random_smooth({s})"),
        }
    }
}

impl FromStr for Scenario {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, String> {
        let (name, arg) = match s.split_once('(') {
            Some((name, rest)) => {
                let arg = rest.strip_suffix(')').ok_or_else(|| format!("unbalanced parenthesis in `{s}`"))?;
                (name.trim(), Some(arg.trim()))
            }
            None => (s.trim(), None),
        };
        let int = |a: &str| a.parse::<u64>().map_err(|_| format!("bad argument `{a}` in `{s}`"));
        match (name, arg) {
            ("zero", None) => Ok(Scenario::Zero),
            ("constant", None) => Ok(Scenario::Constant),
            ("manufactured_p2", None) => Ok(Scenario::ManufacturedP2),
            ("gaussian_bump", None) => Ok(Scenario::GaussianBump),
            ("fj_stress", Some(a)) => Ok(Scenario::FjStress(int(a)? as usize)),
            ("random_smooth", None) => Ok(Scenario::RandomSmooth(None)),
            ("random_smooth", Some(a)) => Ok(Scenario::RandomSmooth(Some(int(a)?))),
            _ => Err(format!("unknown scenario `{s}`")),
        }
    }
}

impl Scenario {
    pub(crate) fn check(&self, config: &ScenarioConfig) -> Result<(), HarnessError> {
        let unit = config.grid.lengths.iter().all(|l| *l == 1.0);
        match self {
            Scenario::ManufacturedP2 if config.params.p != 2.0 || !unit => {
                Err(HarnessError::Config("manufactured_p2 needs p = 2 on the unit square".into()))
            }
            Scenario::FjStress(j) if config.grid.dim() != 1 || !unit || *j < 2 => {
                Err(HarnessError::Config("fj_stress(j) needs j >= 2 on the unit interval".into()))
            }
            _ => Ok(()),
        }
    }

    /// Stationary data `f`.
    pub fn data(&self, grid: &Arc<Grid64>, a: f64, tau: f64, seed: u64) -> Result<NodeField64, HarnessError> {
        let lengths = grid.lengths().to_vec();
        let dim = grid.dim();
        Ok(match *self {
            Scenario::Zero => NodeField64::zeros(grid.clone()),
            Scenario::Constant => NodeField64::constant(grid.clone(), 1.0),
            Scenario::ManufacturedP2 => NodeField64::from_fn(grid.clone(), |x| manufactured_data(&x[..dim], a, tau)),
            Scenario::FjStress(j) => fj_generator(j, grid.clone()).map_err(|e| HarnessError::Config(e.to_string()))?,
            Scenario::GaussianBump => NodeField64::from_fn(grid.clone(), |x| {
                let r2: f64 = (0..dim).map(|i| (x[i] / lengths[i] - 0.5).powi(2)).sum();
                (-r2 / (2.0 * BUMP_WIDTH * BUMP_WIDTH)).exp()
            }),
            Scenario::RandomSmooth(s) => {
                let mut rng = ChaCha8Rng::seed_from_u64(s.unwrap_or(seed));
                let ly = if dim == 2 { SMOOTH_MODES } else { 0 };
                let mut terms = Vec::new();
                for k in 0..=SMOOTH_MODES {
                    for l in 0..=ly {
                        let c: f64 = rng.gen_range(-1.0..=1.0);
                        terms.push((k as f64, l as f64, c / (1 + k * k + l * l) as f64));
                    }
                }
                NodeField64::from_fn(grid.clone(), |x| {
                    let (sx, sy) = (PI * x[0] / lengths[0], if dim == 2 { PI * x[1] / lengths[1] } else { 0.0 });
                    terms.iter().map(|(k, l, c)| c * (k * sx).cos() * (l * sy).cos()).sum()
                })
            }
        })
    }

    /// Initial height of the evolution modes.
    pub fn initial_height(&self, grid: &Arc<Grid64>, a: f64, tau: f64, seed: u64) -> Result<NodeField64, HarnessError> {
        match self.exact(grid) {
            Some(u) => Ok(u),
            None => self.data(grid, a, tau, seed),
        }
    }

    /// Exact stationary solution when one is known.
    pub fn exact(&self, grid: &Arc<Grid64>) -> Option<NodeField64> {
        let dim = grid.dim();
        match self {
            Scenario::ManufacturedP2 => Some(NodeField64::from_fn(grid.clone(), |x| cos_product(&x[..dim]))),
            _ => None,
        }
    }
}

fn cos_product(x: &[f64]) -> f64 {
    x.iter().map(|x| (PI * x).cos()).product()
}

/// `f = -Delta exp(psi) + tau psi + a u` with `u = prod cos(pi x_i)` and
/// `psi = (d pi^2 + tau) u`.
fn manufactured_data(x: &[f64], a: f64, tau: f64) -> f64 {
    let d = x.len() as f64;
    let u = cos_product(x);
    let k = d * PI * PI + tau;
    let psi = k * u;
    // |grad u|^2
    let grad_sq: f64 = (0..x.len())
        .map(|i| {
            let partial: f64 = x
                .iter()
                .enumerate()
                .map(|(j, xj)| if i == j { -PI * (PI * xj).sin() } else { (PI * xj).cos() })
                .product();
            partial * partial
        })
        .sum();
    let lap_psi = -d * PI * PI * psi;
    -psi.exp() * (lap_psi + k * k * grad_sq) + tau * psi + a * u
}
