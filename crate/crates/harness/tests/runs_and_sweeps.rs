use std::collections::BTreeMap;
use std::fs;
use std::path::{Path, PathBuf};

use crystal_core::grid::parse_snapshot;
use crystal_harness::{run_scenario, Mode, ScenarioConfig};

fn config(text: &str, mode: Mode, out: &Path) -> ScenarioConfig {
    let mut c = ScenarioConfig::parse(text, Some(mode)).unwrap();
    c.output.dir = out.to_path_buf();
    c
}

fn summary_column(out: &Path, name: &str) -> Vec<String> {
    let text = fs::read_to_string(out.join("summary.csv")).unwrap();
    let mut lines = text.lines();
    let idx = lines.next().unwrap().split(',').position(|h| h == name).unwrap();
    lines.map(|l| l.split(',').nth(idx).unwrap().to_string()).collect()
}

fn reals(v: &[String]) -> Vec<f64> {
    v.iter().map(|s| s.parse().unwrap()).collect()
}

/// Every file below `dir`, keyed by relative path.
fn tree(dir: &Path) -> BTreeMap<PathBuf, Vec<u8>> {
    let mut out = BTreeMap::new();
    let mut stack = vec![dir.to_path_buf()];
    while let Some(d) = stack.pop() {
        for entry in fs::read_dir(&d).unwrap() {
            let path = entry.unwrap().path();
            if path.is_dir() {
                stack.push(path);
            } else {
                out.insert(path.strip_prefix(dir).unwrap().to_path_buf(), fs::read(&path).unwrap());
            }
        }
    }
    out
}

/// The same tree with the output directory line of every manifest removed.
fn tree_without_dirs(dir: &Path) -> BTreeMap<PathBuf, Vec<u8>> {
    tree(dir)
        .into_iter()
        .map(|(k, v)| {
            if k.file_name().is_some_and(|n| n == "manifest.txt") {
                let text = String::from_utf8(v).unwrap();
                let kept: Vec<&str> = text.lines().filter(|l| !l.starts_with("dir = ")).collect();
                (k, kept.join("\n").into_bytes())
            } else {
                (k, v)
            }
        })
        .collect()
}

const H_SWEEP: &str = "scenario = manufactured_p2\n[grid]\ncells = 64\n[params]\np = 2\ntau = 0.1\n\
                       [sweep]\naxis = h\nvalues = 64, 128\n";

#[test]
fn h_sweep_on_manufactured_data_converges_at_second_order() {
    let dir = tempfile::tempdir().unwrap();
    run_scenario(&config(H_SWEEP, Mode::Sweep, dir.path())).unwrap();
    let errors = reals(&summary_column(dir.path(), "error"));
    assert!(errors[0] / errors[1] >= 2f64.powf(1.9), "{errors:?}");
    let order: f64 = summary_column(dir.path(), "order")[1].parse().unwrap();
    assert!((order - 2.0).abs() < 0.1, "{order}");
    assert_eq!(summary_column(dir.path(), "order")[0], "");
}

#[test]
fn tau_sweep_shrinks_the_potential_integral() {
    let dir = tempfile::tempdir().unwrap();
    let text = "scenario = gaussian_bump\n[grid]\ncells = 64\n[params]\np = 1.5\ntau = 0.1\n\
                [sweep]\naxis = tau\nvalues = 0.1, 0.01, 0.001\n";
    run_scenario(&config(text, Mode::Sweep, dir.path())).unwrap();
    let integral = reals(&summary_column(dir.path(), "psi_integral_abs"));
    assert!(integral.windows(2).all(|w| w[1] < w[0]), "{integral:?}");
    let ratio = reals(&summary_column(dir.path(), "tau_ratio"));
    // |sum psi| / tau^{1/p} stays bounded as tau -> 0
    assert!(ratio.iter().all(|r| r.is_finite() && *r <= 2.0 * ratio[0]), "{ratio:?}");
    assert!(summary_column(dir.path(), "status").iter().all(|s| s == "ok"));
}

#[test]
fn delta_and_epsilon_sweeps_run() {
    let dir = tempfile::tempdir().unwrap();
    let text = "scenario = manufactured_p2\n[grid]\ncells = 32\n[params]\np = 2\ntau = 0.1\n\
                [evolution]\nfinal_time = 0.01\nsteps = 10\n[sweep]\naxis = delta\nvalues = 0.002, 0.001\n";
    run_scenario(&config(text, Mode::Sweep, &dir.path().join("delta"))).unwrap();
    let ledger = fs::read_to_string(dir.path().join("delta/entry_001/ledger.csv")).unwrap();
    assert_eq!(ledger.lines().count(), 11);
    let text = "scenario = random_smooth(1)\n[grid]\ncells = 32\n[params]\np = 1.5\ntau = 0.1\n\
                [sweep]\naxis = epsilon\nvalues = 0.1, 0.01, 0\n";
    run_scenario(&config(text, Mode::Sweep, &dir.path().join("eps"))).unwrap();
    let status = summary_column(&dir.path().join("eps"), "status");
    assert_eq!(status, ["ok", "ok", "ok"]);
}

#[test]
fn single_value_sweep_is_one_run() {
    let dir = tempfile::tempdir().unwrap();
    let text = "scenario = constant\n[grid]\ncells = 8\n[params]\np = 2\ntau = 0.1\n[sweep]\naxis = tau\nvalues = 0.1\n";
    run_scenario(&config(text, Mode::Sweep, &dir.path().join("sweep"))).unwrap();
    assert_eq!(summary_column(&dir.path().join("sweep"), "status"), ["ok"]);
    // the entry equals a plain solve of the same config
    let solve = "scenario = constant\n[grid]\ncells = 8\n[params]\np = 2\ntau = 0.1\n";
    run_scenario(&config(solve, Mode::Solve, &dir.path().join("solve"))).unwrap();
    let a = fs::read(dir.path().join("sweep/entry_000/fields.csv")).unwrap();
    let b = fs::read(dir.path().join("solve/fields.csv")).unwrap();
    assert_eq!(a, b);
}

#[test]
fn manifest_reproduces_the_run() {
    let dir = tempfile::tempdir().unwrap();
    let first = dir.path().join("first");
    let text = "scenario = random_smooth\n[grid]\ncells = 8, 8\n[params]\np = 1.5\ntau = 0.1\n[solver]\nrestarts = 2\n";
    let mut c = config(text, Mode::Solve, &first);
    c.seed = 99;
    run_scenario(&c).unwrap();
    let manifest = fs::read_to_string(first.join("manifest.txt")).unwrap();
    let mut again = ScenarioConfig::parse(&manifest, None).unwrap();
    assert_eq!(again, c);
    again.output.dir = dir.path().join("second");
    run_scenario(&again).unwrap();
    assert_eq!(tree_without_dirs(&first), tree_without_dirs(&again.output.dir));
}

#[test]
fn sweep_output_does_not_depend_on_thread_count() {
    let dir = tempfile::tempdir().unwrap();
    let run_with = |threads: usize, sub: &str| {
        let pool = rayon::ThreadPoolBuilder::new().num_threads(threads).build().unwrap();
        let c = config(H_SWEEP, Mode::Sweep, &dir.path().join(sub));
        pool.install(|| run_scenario(&c)).unwrap();
        tree_without_dirs(&dir.path().join(sub))
    };
    assert_eq!(run_with(1, "one"), run_with(4, "four"));
}

#[test]
fn snapshots_parse_back_to_the_written_fields() {
    let dir = tempfile::tempdir().unwrap();
    let text = "scenario = gaussian_bump\n[grid]\ncells = 6, 4\nlengths = 1.5, 1\n[params]\np = 1.5\ntau = 0.1\n";
    run_scenario(&config(text, Mode::Solve, dir.path())).unwrap();
    let u = parse_snapshot(&fs::read_to_string(dir.path().join("u.txt")).unwrap()).unwrap();
    assert_eq!(u.grid().cells(), &[6, 4]);
    let fields = fs::read_to_string(dir.path().join("fields.csv")).unwrap();
    let column: Vec<f64> = fields.lines().skip(1).map(|l| l.split(',').nth(4).unwrap().parse().unwrap()).collect();
    assert_eq!(u.values(), column.as_slice());
}
