//! One PASS/FAIL line per acceptance criterion.
//!
//! Runs as a plain binary (`harness = false`). The process fails on any red
//! line except the series-tail clause of criterion 5, which is unattainable
//! as stated and is reported red on purpose.

use std::process::{Command, ExitCode, Stdio};
use std::time::Instant;

use crossover_core::montecarlo::{exact_torus_proxy, run, Sampler};
use crossover_core::suites::{self, CheckRecord, SuiteOptions};
use crossover_core::susceptibility::{theorem_chain_check, Extended};
use crossover_core::{BoxGeometry, Couplings, McConfig};

struct Line {
    criterion: u32,
    pass: bool,
    detail: String,
    expected_red: bool,
}

fn tally(records: &[CheckRecord], names: &[&str]) -> (usize, Vec<String>) {
    let mut count = 0;
    let mut failures = Vec::new();
    for r in records.iter().filter(|r| names.contains(&r.check.as_str())) {
        count += 1;
        if !r.pass {
            failures.push(format!("{} [{}] lhs={:e} rhs={:e}", r.check, r.instance, r.lhs, r.rhs));
        }
    }
    (count, failures)
}

fn suite_line(criterion: u32, records: &[CheckRecord], names: &[&str], min_count: usize, extra: &str) -> Line {
    let (count, failures) = tally(records, names);
    let pass = failures.is_empty() && count >= min_count;
    let mut detail = format!("{count} checks, {} failed{extra}", failures.len());
    if count < min_count {
        detail.push_str(&format!(" (expected at least {min_count})"));
    }
    if let Some(f) = failures.first() {
        detail.push_str(&format!("; first: {f}"));
    }
    Line { criterion, pass, detail, expected_red: false }
}

fn opts() -> SuiteOptions {
    SuiteOptions { random_graphs: 200, random_instances: 100, ..SuiteOptions::default() }
}

fn criteria_1_and_4() -> Vec<Line> {
    let t = Instant::now();
    let records = suites::identities(&opts()).expect("identity suite");
    let secs = t.elapsed().as_secs_f64();
    let graphs = records
        .iter()
        .filter(|r| r.check == "partition" && r.instance.starts_with('#'))
        .count();
    let mut c1 = suite_line(1, &records, &["partition", "two-point"], 200, &format!(", {graphs} random graphs, {secs:.1}s"));
    if graphs < 200 || secs >= 60.0 {
        c1.pass = false;
    }
    let c4 = suite_line(4, &records, &["backbone-map-groups", "backbone-map-sum"], 1, "");
    vec![c1, c4]
}

fn criterion_2() -> Line {
    let records = suites::backbone(&opts()).expect("backbone suite");
    suite_line(2, &records, &["backbone-expansion"], 1, "")
}

fn criteria_3_and_7() -> Vec<Line> {
    let records = suites::properties(&opts()).expect("property suite");
    let boxes = records.iter().filter(|r| r.instance.starts_with("#") && r.check == "tanh-bound").count();
    vec![
        suite_line(
            3,
            &records,
            &["tanh-bound", "monotone-in-edges", "concatenation", "splitting-bound"],
            1,
            &format!(", {boxes} random boxes"),
        ),
        suite_line(7, &records, &["gks-monotone"], 100, ""),
    ]
}

fn criterion_5() -> Line {
    let grid: Vec<f64> = (0..5).map(|k| 0.05 + 0.1125 * k as f64).collect();
    let lattice = BoxGeometry::new(1, 1, 1).expect("box");
    let mut violations = 0;
    let mut below = 0;
    let mut slow_tails = Vec::new();
    for &j_d in &grid {
        for &j_s in &grid {
            let r = theorem_chain_check(&lattice, &Couplings::new(j_d, j_s).expect("couplings"), 50).expect("chain");
            if !r.holds || r.chi_box > r.geometric.value() * (1.0 + 1e-10) {
                violations += 1;
            }
            if let Extended::Finite(_) = r.geometric {
                below += 1;
                let tail = r.tail.value();
                if tail >= 1e-8 {
                    slow_tails.push(format!("({j_d}, {j_s}) tail={tail:.2e}"));
                }
            }
        }
    }
    let inequality = violations == 0;
    let tail_ok = slow_tails.is_empty();
    let detail = format!(
        "inequality on 25 points: {}; tail < 1e-8 at n=50 on {below} points below the curve: {}",
        if inequality { "holds" } else { "VIOLATED" },
        if tail_ok { "holds".to_string() } else { format!("fails at {}", slow_tails.join(", ")) }
    );
    Line {
        criterion: 5,
        pass: inequality && tail_ok,
        detail: if tail_ok {
            detail
        } else {
            format!("{detail} (documented: the tail r^51 chi/(1-r) is unbounded as r -> 1 below the curve)")
        },
        expected_red: inequality && !tail_ok,
    }
}

fn criterion_6() -> Line {
    let records = suites::chain(&SuiteOptions::default()).expect("chain suite");
    suite_line(6, &records, &["chi-1d-closed-form", "curve-1d-artanh"], 4, "")
}

fn criterion_8() -> Line {
    let couplings = Couplings::new(0.3, 0.1).expect("couplings");
    let exact = exact_torus_proxy(1, 1, 4, &couplings).expect("exact torus");
    let mut within = 0;
    let reps = 40;
    let mut deterministic = true;
    for rep in 0..reps {
        let cfg = McConfig {
            d: 1,
            s: 1,
            l: 4,
            couplings,
            sweeps: 2200,
            burn_in: 200,
            chains: 16,
            seed: 1000 + rep,
        };
        let sampler = if rep % 2 == 0 { Sampler::Wolff } else { Sampler::Metropolis };
        let est = run(sampler, &cfg).expect("mc run");
        if est.agrees_with(exact, 3.0) {
            within += 1;
        }
        if rep < 2 {
            let again = run(sampler, &cfg).expect("mc rerun");
            deterministic &= again.chain_means.iter().zip(&est.chain_means).all(|(a, b)| a.to_bits() == b.to_bits())
                && again.mean.to_bits() == est.mean.to_bits();
        }
    }
    let rate = within as f64 / reps as f64;
    Line {
        criterion: 8,
        pass: rate >= 0.95 && deterministic,
        detail: format!(
            "4x4 (1+1) torus exact {exact:.10}: {within}/{reps} within 3 SE; seeded reruns {}",
            if deterministic { "bitwise identical" } else { "DIFFER" }
        ),
        expected_red: false,
    }
}

fn criterion_9() -> Line {
    let dir = tempfile::tempdir().expect("tempdir");
    let out = dir.path().join("curve.csv");
    let args = [
        "curve", "--d", "2", "--s", "1", "--jd-min", "0.1", "--jd-max", "0.4", "--step", "0.05", "--estimator", "strip",
        "--width", "4", "--length", "16",
    ];
    let mut outputs = Vec::new();
    for _ in 0..2 {
        let status = Command::new(env!("CARGO_BIN_EXE_crossover"))
            .args(args)
            .arg("--out")
            .arg(&out)
            .stdout(Stdio::null())
            .status()
            .expect("spawn crossover");
        outputs.push(status.success().then(|| std::fs::read(&out).expect("read curve")));
    }
    let pass = matches!((&outputs[0], &outputs[1]), (Some(a), Some(b)) if a == b && !a.is_empty());
    Line {
        criterion: 9,
        pass,
        detail: format!(
            "two runs of `crossover {}` {}",
            args.join(" "),
            if pass { "byte-identical" } else { "differ or failed" }
        ),
        expected_red: false,
    }
}

fn main() -> ExitCode {
    let mut lines = criteria_1_and_4();
    lines.push(criterion_2());
    lines.extend(criteria_3_and_7());
    lines.push(criterion_5());
    lines.push(criterion_6());
    lines.push(criterion_8());
    lines.push(criterion_9());
    lines.sort_by_key(|l| l.criterion);
    let mut unexpected = 0;
    for l in &lines {
        println!("{} criterion {}: {}", if l.pass { "PASS" } else { "FAIL" }, l.criterion, l.detail);
        if !l.pass && !l.expected_red {
            unexpected += 1;
        }
    }
    if unexpected == 0 {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
