use std::collections::BTreeMap;
use std::fmt;

use crossover_core::backbone::Comparison;
use crossover_core::montecarlo::{exact_torus_proxy, run, scan_curve, McConfig, Sampler};
use crossover_core::spin::two_point_row_sums;
use crossover_core::suites::{self, Scope, SuiteOptions};
use crossover_core::susceptibility::{bound_curve, chi_1d_exact, chi_finite_exact, Estimator};
use crossover_core::{BoxGeometry, Couplings, EdgeWeights, Error, TransferSystem};
use serde_json::json;

use crate::output::{sig, write_with_manifest};
use crate::{ChiArgs, CurveArgs, EstimatorArg, McArgs, MethodArg, SamplerArg, ScopeArg, VerifyArgs};

pub enum Status {
    Pass,
    Fail,
}

#[derive(Debug)]
pub enum CliError {
    Usage(String),
    Runtime(String),
}

impl CliError {
    pub fn exit_code(&self) -> u8 {
        match self {
            CliError::Usage(_) => 2,
            CliError::Runtime(_) => 1,
        }
    }
}

impl fmt::Display for CliError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            CliError::Usage(m) | CliError::Runtime(m) => f.write_str(m),
        }
    }
}

impl From<Error> for CliError {
    fn from(e: Error) -> Self {
        match e {
            Error::InvalidArgument(_) | Error::ZeroDimension | Error::CapExceeded { .. } | Error::OutOfRange { .. } => {
                CliError::Usage(e.to_string())
            }
            _ => CliError::Runtime(e.to_string()),
        }
    }
}

impl From<std::io::Error> for CliError {
    fn from(e: std::io::Error) -> Self {
        CliError::Runtime(e.to_string())
    }
}

type Outcome = Result<Status, CliError>;

fn status(pass: bool) -> Status {
    if pass {
        Status::Pass
    } else {
        Status::Fail
    }
}

pub fn verify(a: VerifyArgs) -> Outcome {
    let scope = match a.scope {
        ScopeArg::Identities => Scope::Identities,
        ScopeArg::Backbone => Scope::Backbone,
        ScopeArg::Properties => Scope::Properties,
        ScopeArg::Chain => Scope::Chain,
        ScopeArg::All => Scope::All,
    };
    let opts = SuiteOptions {
        seed: a.seed,
        max_edges: a.max_edges,
        random_graphs: a.random_graphs,
        random_instances: a.random_instances,
        instance: a.instance.clone(),
    };
    let records = suites::run(scope, &opts)?;
    let mut summary: BTreeMap<&str, (usize, usize)> = BTreeMap::new();
    for r in &records {
        let e = summary.entry(r.check.as_str()).or_default();
        if r.pass {
            e.0 += 1;
        } else {
            e.1 += 1;
        }
        if a.verbose || !r.pass {
            println!(
                "{} {} [{}] lhs={} rhs={}",
                if r.pass { "pass" } else { "FAIL" },
                r.check,
                r.instance,
                sig(r.lhs, 12),
                sig(r.rhs, 12)
            );
        }
    }
    for (check, (pass, fail)) in &summary {
        println!("{check}: {pass} passed, {fail} failed");
    }
    let failed: usize = summary.values().map(|v| v.1).sum();
    println!("{} checks, {} failed", records.len(), failed);
    if let Some(path) = &a.report {
        let report = json!({
            "scope": scope.to_string(),
            "seed": a.seed,
            "max_edges": a.max_edges,
            "checks": records,
            "failed": failed,
        });
        let bytes = serde_json::to_vec_pretty(&report).map_err(|e| CliError::Runtime(e.to_string()))?;
        let params = json!({
            "scope": scope.to_string(),
            "max_edges": a.max_edges,
            "random_graphs": a.random_graphs,
            "random_instances": a.random_instances,
            "instance": a.instance,
        });
        write_with_manifest(path, &bytes, params, vec![a.seed])?;
    }
    Ok(status(failed == 0))
}

fn estimator(kind: EstimatorArg, n: usize, width: usize, length: usize, widths: &[usize]) -> Estimator {
    match kind {
        EstimatorArg::Exact1d => Estimator::Exact1d,
        EstimatorArg::Enumeration => Estimator::Enumeration { n },
        EstimatorArg::Strip => Estimator::Strip { width, length },
        EstimatorArg::Extrapolated => Estimator::Extrapolated { widths: widths.to_vec() },
    }
}

/// `jd_min, jd_min + step, …` up to `jd_max`; a step wider than the range gives one point.
pub fn grid(jd_min: f64, jd_max: f64, step: f64) -> Result<Vec<f64>, CliError> {
    if !(jd_min > 0.0) || !(jd_max >= jd_min) || !jd_max.is_finite() {
        return Err(CliError::Usage(format!("need 0 < jd-min <= jd-max, got {jd_min}..{jd_max}")));
    }
    if !(step > 0.0) || !step.is_finite() {
        return Err(CliError::Usage(format!("step must be positive, got {step}")));
    }
    let count = ((jd_max - jd_min) / step + 1e-9).floor() as usize + 1;
    Ok((0..count).map(|k| jd_min + k as f64 * step).collect())
}

pub fn curve(a: CurveArgs) -> Outcome {
    let grid = grid(a.jd_min, a.jd_max, a.step)?;
    let est = estimator(a.estimator, a.n, a.width, a.length, &a.widths);
    let points = bound_curve(a.d, a.s, &grid, &est)?;
    let mut csv = String::from("j_d,chi_d,chi_provenance,j_s_bound\n");
    for p in &points {
        csv.push_str(&format!(
            "{},{},{},{}\n",
            sig(p.j_d, 12),
            sig(p.chi.value, 12),
            p.chi.provenance,
            sig(p.js_bound.value(), 12)
        ));
    }
    let params = json!({
        "d": a.d,
        "s": a.s,
        "jd_min": a.jd_min,
        "jd_max": a.jd_max,
        "step": a.step,
        "estimator": est,
        "certified": points.iter().all(|p| p.certified()),
    });
    write_with_manifest(&a.out, csv.as_bytes(), params, Vec::new())?;
    println!(
        "{} rows written to {} ({})",
        points.len(),
        a.out.display(),
        if points.iter().all(|p| p.certified()) { "certified" } else { "estimated" }
    );
    Ok(Status::Pass)
}

fn chi_lattice(a: &ChiArgs) -> Result<BoxGeometry, CliError> {
    match (a.n, a.width, a.length) {
        (Some(n), None, None) => Ok(BoxGeometry::new(a.d, 0, n)?),
        (None, Some(w), Some(l)) if a.d == 2 => Ok(BoxGeometry::rectangular(2, 0, &[w, l])?),
        (None, Some(_), Some(_)) => Err(CliError::Usage("--width/--length describe d = 2 strips".into())),
        _ => Err(CliError::Usage("give --n, or --width and --length".into())),
    }
}

pub fn chi(a: ChiArgs) -> Outcome {
    if !a.j_d.is_finite() || a.j_d < 0.0 {
        return Err(CliError::Usage(format!("J_d must be finite and nonnegative, got {}", a.j_d)));
    }
    let mut methods = a.method.clone();
    methods.dedup();
    if methods.contains(&MethodArg::ClosedForm) {
        if methods.len() > 1 {
            return Err(CliError::Usage("closed-form is an infinite-volume value; request it on its own".into()));
        }
        if a.d != 1 {
            return Err(CliError::Usage("closed-form is available for d = 1 only".into()));
        }
        let c = chi_1d_exact(a.j_d)?;
        println!("closed-form\t{}\t{}", sig(c.value, 12), c.provenance);
        return Ok(Status::Pass);
    }
    let lattice = chi_lattice(&a)?;
    let g = lattice.graph();
    let weights = EdgeWeights::uniform(g, a.j_d);
    let vertices: Vec<usize> = (0..g.n_vertices()).collect();
    let sup = |rows: Vec<f64>| rows.into_iter().fold(f64::NEG_INFINITY, f64::max);
    let mut values = Vec::new();
    for m in &methods {
        let (name, value, provenance) = match m {
            MethodArg::Spin => (
                "spin",
                sup(two_point_row_sums(g, &g.all_edges(), &weights, &vertices)?),
                "exact-enumeration",
            ),
            MethodArg::Currents => (
                "currents",
                chi_finite_exact(g, &g.all_edges(), &weights, &vertices)?,
                "exact-enumeration",
            ),
            MethodArg::Transfer => (
                "transfer",
                TransferSystem::from_box(&lattice, &weights)?.susceptibility(),
                "transfer-matrix",
            ),
            MethodArg::ClosedForm => unreachable!("handled above"),
        };
        println!("{name}\t{}\t{provenance}", sig(value, 12));
        values.push(value);
    }
    let reference = values[0];
    let agree = values.iter().all(|&v| Comparison::equal(v, reference).holds);
    if !agree {
        eprintln!("methods disagree beyond relative 1e-10");
    }
    Ok(status(agree))
}

fn sampler(s: SamplerArg) -> Sampler {
    match s {
        SamplerArg::Metropolis => Sampler::Metropolis,
        SamplerArg::Wolff => Sampler::Wolff,
    }
}

pub fn mc(a: McArgs) -> Outcome {
    let couplings = Couplings::new(a.j_d, a.j_s)?;
    let cfg = McConfig {
        d: a.d,
        s: a.s,
        l: a.l,
        couplings,
        sweeps: a.sweeps,
        burn_in: a.burn_in,
        chains: a.chains,
        seed: a.seed,
    };
    cfg.validate()?;
    if !a.scan_jd.is_empty() {
        return mc_scan(&a, &cfg);
    }
    let estimate = run(sampler(a.sampler), &cfg)?;
    println!(
        "proxy {} +- {} ({} chains, {} measurements)",
        sig(estimate.mean, 12),
        estimate.std_error.map_or("n/a".into(), |e| sig(e, 4)),
        a.chains,
        estimate.measurements
    );
    let mut pass = true;
    let mut exact = None;
    if a.exact {
        let value = exact_torus_proxy(a.d, a.s, a.l, &couplings)?;
        pass = estimate.agrees_with(value, 3.0);
        println!("exact {} -> {}", sig(value, 12), if pass { "within 3 SE" } else { "OUTSIDE 3 SE" });
        exact = Some(value);
    }
    if let Some(out) = &a.out {
        let body = json!({ "config": cfg, "sampler": format!("{:?}", a.sampler).to_lowercase(), "estimate": estimate, "exact": exact });
        let bytes = serde_json::to_vec_pretty(&body).map_err(|e| CliError::Runtime(e.to_string()))?;
        write_with_manifest(out, &bytes, json!({ "config": cfg, "exact": a.exact }), vec![a.seed])?;
    }
    Ok(status(pass))
}

fn mc_scan(a: &McArgs, template: &McConfig) -> Outcome {
    let est = estimator(a.estimator, 3, 8, 64, &[6, 8, 10]);
    let curve = bound_curve(a.d, a.s, &a.scan_jd, &est)?;
    let scan = scan_curve(template, sampler(a.sampler), &curve, a.margin, &a.ls)?;
    let mut csv = String::from("j_d,j_s,l,proxy,std_error,saturates\n");
    for p in &scan {
        let verdict = p.saturates.map_or("n/a", |s| if s { "yes" } else { "no" });
        for row in &p.rows {
            csv.push_str(&format!(
                "{},{},{},{},{},{}\n",
                sig(p.j_d, 12),
                p.j_s.map_or("inf".into(), |j| sig(j, 12)),
                row.l,
                sig(row.estimate.mean, 12),
                row.estimate.std_error.map_or("nan".into(), |e| sig(e, 12)),
                verdict
            ));
        }
    }
    print!("{csv}");
    if let Some(out) = &a.out {
        let params = json!({
            "template": template,
            "scan_jd": a.scan_jd,
            "margin": a.margin,
            "ls": a.ls,
            "estimator": est,
        });
        write_with_manifest(out, csv.as_bytes(), params, vec![template.seed])?;
    }
    // diagnostic only: saturation is reported, never turned into a verdict
    Ok(Status::Pass)
}
