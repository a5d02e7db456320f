//! Deterministic and randomized verification suites. Each check yields one
//! [`CheckRecord`] with both sides, the relation and the verdict.

use std::collections::HashMap;
use std::fmt;
use std::str::FromStr;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Serialize, Serializer};

use crate::backbone::{
    backbone_expansion_check, check_property_a, check_property_b, check_splitting_bound, check_tanh_bound,
    enumerate_consistent_paths, Comparison, ConsistentPath, RhoEvaluator,
};
use crate::currents::{
    backbone_map, for_each_sourced_class, partition_currents, sourced_sum, two_point_currents, ParityConfig,
};
use crate::error::{Error, Result};
use crate::lattice::{BoxGeometry, Graph};
use crate::spin::{partition_spin, two_point_spin, Couplings, EdgeWeights};
use crate::susceptibility::{artanh, bound_curve, chi_1d_exact, chi_d_box_exact, theorem_chain_check, Estimator};
use crate::tolerance::{close, IDENTITY_REL, INEQUALITY_SLACK};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Scope {
    Identities,
    Backbone,
    Properties,
    Chain,
    All,
}

impl FromStr for Scope {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "identities" => Ok(Scope::Identities),
            "backbone" => Ok(Scope::Backbone),
            "properties" => Ok(Scope::Properties),
            "chain" => Ok(Scope::Chain),
            "all" => Ok(Scope::All),
            _ => Err(Error::InvalidArgument(format!("unknown scope {s:?}"))),
        }
    }
}

impl fmt::Display for Scope {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s = match self {
            Scope::Identities => "identities",
            Scope::Backbone => "backbone",
            Scope::Properties => "properties",
            Scope::Chain => "chain",
            Scope::All => "all",
        };
        f.write_str(s)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum Relation {
    #[serde(rename = "eq")]
    Equal,
    #[serde(rename = "le")]
    AtMost,
}

fn finite_or_marker<S: Serializer>(x: &f64, s: S) -> std::result::Result<S::Ok, S::Error> {
    if x.is_finite() {
        s.serialize_f64(*x)
    } else if x.is_nan() {
        s.serialize_str("nan")
    } else if *x > 0.0 {
        s.serialize_str("inf")
    } else {
        s.serialize_str("-inf")
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CheckRecord {
    pub check: String,
    pub instance: String,
    #[serde(serialize_with = "finite_or_marker")]
    pub lhs: f64,
    #[serde(serialize_with = "finite_or_marker")]
    pub rhs: f64,
    pub relation: Relation,
    /// Relative tolerance for `eq`, absolute slack for `le`.
    pub tolerance: f64,
    pub pass: bool,
}

impl CheckRecord {
    fn equal(check: &str, instance: String, lhs: f64, rhs: f64, rel: f64) -> Self {
        CheckRecord {
            check: check.into(),
            instance,
            lhs,
            rhs,
            relation: Relation::Equal,
            tolerance: rel,
            // the absolute floor only matters for values that vanish exactly
            pass: close(lhs, rhs, rel, INEQUALITY_SLACK),
        }
    }

    fn at_most(check: &str, instance: String, lhs: f64, rhs: f64, slack: f64) -> Self {
        CheckRecord {
            check: check.into(),
            instance,
            lhs,
            rhs,
            relation: Relation::AtMost,
            tolerance: slack,
            pass: lhs <= rhs + slack,
        }
    }

    fn from_comparison(check: &str, instance: String, c: Comparison, relation: Relation) -> Self {
        let tolerance = match relation {
            Relation::Equal => IDENTITY_REL,
            Relation::AtMost => INEQUALITY_SLACK,
        };
        CheckRecord {
            check: check.into(),
            instance,
            lhs: c.lhs,
            rhs: c.rhs,
            relation,
            tolerance,
            pass: c.holds,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SuiteOptions {
    pub seed: u64,
    /// Edge budget for randomized graphs.
    pub max_edges: usize,
    pub random_graphs: usize,
    pub random_instances: usize,
    /// Restrict the fixed suite to one named instance (randomized parts are skipped).
    pub instance: Option<String>,
}

impl Default for SuiteOptions {
    fn default() -> Self {
        SuiteOptions {
            seed: 7,
            max_edges: 20,
            random_graphs: 200,
            random_instances: 100,
            instance: None,
        }
    }
}

/// A named test graph, with its box when it has one.
#[derive(Debug, Clone)]
pub struct Instance {
    pub name: String,
    pub graph: Graph,
    pub weights: EdgeWeights,
    pub lattice: Option<BoxGeometry>,
}

impl Instance {
    fn from_box(name: &str, lattice: BoxGeometry, weights: EdgeWeights) -> Self {
        Instance {
            name: name.into(),
            graph: lattice.graph().clone(),
            weights,
            lattice: Some(lattice),
        }
    }

    fn pairs(&self) -> Vec<(usize, usize)> {
        let n = self.graph.n_vertices();
        (0..n).flat_map(|x| (x + 1..n).map(move |y| (x, y))).collect()
    }
}

/// Single edge, two trees, the 4-cycle, the 3×3 grid and the (1+1) box at `N = 1`.
pub fn fixed_instances() -> Vec<Instance> {
    let edge = BoxGeometry::rectangular(1, 0, &[2]).expect("static box");
    let path = Graph::from_edges(4, &[(0, 1), (1, 2), (2, 3)]).expect("static graph");
    let tree = Graph::from_edges(6, &[(0, 1), (0, 2), (0, 3), (3, 4), (3, 5)]).expect("static graph");
    let square = BoxGeometry::rectangular(2, 0, &[2, 2]).expect("static box");
    let grid = BoxGeometry::new(2, 0, 1).expect("static box");
    let mixed = BoxGeometry::new(1, 1, 1).expect("static box");
    vec![
        Instance::from_box("single-edge", edge.clone(), EdgeWeights::uniform(edge.graph(), 0.7)),
        Instance {
            name: "path-4".into(),
            weights: EdgeWeights(vec![0.2, 0.9, 0.5]),
            graph: path,
            lattice: None,
        },
        Instance {
            name: "tree-6".into(),
            weights: EdgeWeights(vec![0.3, 1.1, 0.6, 0.15, 0.8]),
            graph: tree,
            lattice: None,
        },
        Instance::from_box("four-cycle", square.clone(), EdgeWeights::uniform(square.graph(), 0.45)),
        Instance::from_box("grid-3x3", grid.clone(), EdgeWeights::uniform(grid.graph(), 0.35)),
        Instance::from_box(
            "box-1+1-N1",
            mixed.clone(),
            Couplings::new(0.3, 0.1).expect("static couplings").weights(mixed.graph()),
        ),
    ]
}

fn selected(opts: &SuiteOptions) -> Result<Vec<Instance>> {
    let all = fixed_instances();
    match &opts.instance {
        None => Ok(all),
        Some(name) => {
            let picked: Vec<Instance> = all.into_iter().filter(|i| &i.name == name).collect();
            if picked.is_empty() {
                let names: Vec<String> = fixed_instances().into_iter().map(|i| i.name).collect();
                return Err(Error::InvalidArgument(format!("unknown instance {name:?}; known: {names:?}")));
            }
            Ok(picked)
        }
    }
}

fn log_uniform(rng: &mut ChaCha8Rng, lo: f64, hi: f64) -> f64 {
    rng.random_range(lo.ln()..hi.ln()).exp()
}

/// A random simple graph with at most `max_vertices` vertices, `max_edges`
/// edges and cyclomatic number at most `max_cyclomatic`, with weights
/// log-uniform in `[0.05, 1.5]`.
pub fn random_graph(
    rng: &mut ChaCha8Rng,
    max_vertices: usize,
    max_edges: usize,
    max_cyclomatic: usize,
) -> (Graph, EdgeWeights) {
    let max_vertices = max_vertices.max(2);
    let max_edges = max_edges.max(1);
    loop {
        let n = rng.random_range(2..=max_vertices);
        let m = rng.random_range(1..=max_edges.min(n * (n - 1) / 2));
        let mut pairs: Vec<(usize, usize)> = Vec::with_capacity(m);
        while pairs.len() < m {
            let a = rng.random_range(0..n);
            let b = rng.random_range(0..n);
            let p = (a.min(b), a.max(b));
            if a != b && !pairs.contains(&p) {
                pairs.push(p);
            }
        }
        let graph = Graph::from_edges(n, &pairs).expect("valid random edges");
        if graph.cyclomatic(&graph.all_edges()) <= max_cyclomatic {
            let weights = EdgeWeights((0..m).map(|_| log_uniform(rng, 0.05, 1.5)).collect());
            return (graph, weights);
        }
    }
}

fn describe(graph: &Graph) -> String {
    format!(
        "random(v={}, e={}, c={})",
        graph.n_vertices(),
        graph.n_edges(),
        graph.cyclomatic(&graph.all_edges())
    )
}

fn all_vertices(graph: &Graph) -> Vec<usize> {
    (0..graph.n_vertices()).collect()
}

fn identity_checks(name: &str, graph: &Graph, weights: &EdgeWeights, pairs: &[(usize, usize)]) -> Result<Vec<CheckRecord>> {
    let all = graph.all_edges();
    let vertices = all_vertices(graph);
    let mut out = vec![CheckRecord::equal(
        "partition",
        name.to_string(),
        partition_currents(graph, &all, weights)?,
        partition_spin(graph, &all, weights, &vertices)?,
        IDENTITY_REL,
    )];
    for &(x, y) in pairs {
        out.push(CheckRecord::equal(
            "two-point",
            format!("{name} x={x} y={y}"),
            two_point_currents(graph, &all, weights, x, y)?,
            two_point_spin(graph, &all, weights, &vertices, x, y)?,
            IDENTITY_REL,
        ));
    }
    Ok(out)
}

/// Ω on every sourced class for `(x, y)`: termination at `y`, consistency,
/// and `Σ_{Ω(η)=ω} w(η) / Z = ρ_E(ω)` for every backbone `ω`. The record
/// carries the worst group; its instance notes any walk failures.
fn backbone_map_check(name: &str, graph: &Graph, weights: &EdgeWeights, x: usize, y: usize) -> Result<Vec<CheckRecord>> {
    let all = graph.all_edges();
    let z = partition_currents(graph, &all, weights)?;
    let mut groups: HashMap<Vec<usize>, (ConsistentPath, f64)> = HashMap::new();
    let mut failures = 0usize;
    let mut walk_error = None;
    for_each_sourced_class(graph, &all, x, y, |odd| {
        let cfg = match ParityConfig::new(odd.clone(), all.clone()) {
            Ok(c) => c,
            Err(e) => {
                walk_error = Some(e);
                return;
            }
        };
        match backbone_map(graph, &cfg, x, y) {
            Ok(p) if p.end() == y && p.is_consistent(graph, &all) => {
                let w = cfg.weight(weights);
                groups.entry(p.vertices()).or_insert_with(|| (p, 0.0)).1 += w;
            }
            _ => failures += 1,
        }
    })?;
    if let Some(e) = walk_error {
        return Err(e);
    }
    let eval = RhoEvaluator::new(graph, &all, weights)?;
    let mut worst: Option<(f64, f64, f64)> = None;
    let mut total = 0.0;
    let mut keys: Vec<&Vec<usize>> = groups.keys().collect();
    keys.sort();
    for k in keys {
        let (path, w) = &groups[k];
        total += w;
        let lhs = w / z;
        let rhs = eval.eval(path)?;
        let dev = crate::tolerance::rel_diff(lhs, rhs);
        if worst.is_none_or(|(d, _, _)| dev > d) {
            worst = Some((dev, lhs, rhs));
        }
    }
    let instance = format!("{name} x={x} y={y} backbones={} failures={failures}", groups.len());
    let mut out = Vec::new();
    let mut soundness = CheckRecord::equal("backbone-map-groups", instance.clone(), 0.0, 0.0, IDENTITY_REL);
    if let Some((_, lhs, rhs)) = worst {
        soundness.lhs = lhs;
        soundness.rhs = rhs;
        soundness.pass = close(lhs, rhs, IDENTITY_REL, INEQUALITY_SLACK);
    }
    soundness.pass &= failures == 0;
    out.push(soundness);
    out.push(CheckRecord::equal(
        "backbone-map-sum",
        instance,
        total,
        sourced_sum(graph, &all, weights, x, y)?,
        IDENTITY_REL,
    ));
    Ok(out)
}

fn random_pairs(rng: &mut ChaCha8Rng, n: usize, k: usize) -> Vec<(usize, usize)> {
    let mut pairs = Vec::new();
    if n < 2 {
        return pairs;
    }
    pairs.push((0, n - 1));
    while pairs.len() < k.min(n * (n - 1) / 2) {
        let a = rng.random_range(0..n);
        let b = rng.random_range(0..n);
        let p = (a.min(b), a.max(b));
        if a != b && !pairs.contains(&p) {
            pairs.push(p);
        }
    }
    pairs
}

/// Currents against spins (partition functions and two-point functions) and
/// soundness of the backbone map.
pub fn identities(opts: &SuiteOptions) -> Result<Vec<CheckRecord>> {
    let mut out = Vec::new();
    for inst in selected(opts)? {
        out.extend(identity_checks(&inst.name, &inst.graph, &inst.weights, &inst.pairs())?);
        for (x, y) in inst.pairs() {
            out.extend(backbone_map_check(&inst.name, &inst.graph, &inst.weights, x, y)?);
        }
    }
    if opts.instance.is_some() {
        return Ok(out);
    }
    let mut rng = ChaCha8Rng::seed_from_u64(opts.seed);
    for i in 0..opts.random_graphs {
        let (g, w) = random_graph(&mut rng, 20, opts.max_edges.min(20), 12);
        let pairs = random_pairs(&mut rng, g.n_vertices(), 4);
        let name = format!("#{i} {}", describe(&g));
        out.extend(identity_checks(&name, &g, &w, &pairs)?);
        if g.cyclomatic(&g.all_edges()) <= 10 {
            if let Some(&(x, y)) = pairs.first() {
                out.extend(backbone_map_check(&name, &g, &w, x, y)?);
            }
        }
    }
    Ok(out)
}

/// `Σ_{ω∈C_xy} ρ_E(ω) = ⟨σ_x σ_y⟩` for every pair of every fixed instance.
pub fn backbone(opts: &SuiteOptions) -> Result<Vec<CheckRecord>> {
    let mut out = Vec::new();
    for inst in selected(opts)? {
        let all = inst.graph.all_edges();
        for (x, y) in inst.pairs() {
            let r = backbone_expansion_check(&inst.graph, &all, &inst.weights, x, y)?;
            let spin = two_point_spin(&inst.graph, &all, &inst.weights, &all_vertices(&inst.graph), x, y)?;
            let mut rec = CheckRecord::equal(
                "backbone-expansion",
                format!("{} x={x} y={y} paths={}", inst.name, r.paths.len()),
                r.sum_rho,
                spin,
                IDENTITY_REL,
            );
            rec.pass &= r.pass;
            out.push(rec);
        }
    }
    Ok(out)
}

/// Worst case of one inequality or identity over many paths.
#[derive(Default)]
struct Worst {
    count: usize,
    failures: usize,
    pick: Option<Comparison>,
    score: f64,
}

impl Worst {
    fn add(&mut self, c: Comparison, relation: Relation) {
        self.count += 1;
        if !c.holds {
            self.failures += 1;
        }
        let score = match relation {
            Relation::AtMost => c.lhs - c.rhs,
            Relation::Equal => crate::tolerance::rel_diff(c.lhs, c.rhs),
        };
        if self.pick.is_none() || score > self.score || (!c.holds && self.pick.is_some_and(|p| p.holds)) {
            self.pick = Some(c);
            self.score = score;
        }
    }

    fn record(&self, check: &str, instance: &str, relation: Relation) -> Option<CheckRecord> {
        let c = self.pick?;
        let mut r = CheckRecord::from_comparison(check, format!("{instance} paths={}", self.count), c, relation);
        r.pass = self.failures == 0;
        Some(r)
    }
}

/// The backbone inequalities on a list of paths of one instance.
fn path_properties(
    rng: &mut ChaCha8Rng,
    inst: &Instance,
    paths: &[ConsistentPath],
) -> Result<Vec<CheckRecord>> {
    let g = &inst.graph;
    let all = g.all_edges();
    let (mut tanh, mut prop_a, mut prop_b, mut split) =
        (Worst::default(), Worst::default(), Worst::default(), Worst::default());
    for p in paths {
        tanh.add(check_tanh_bound(g, &all, &inst.weights, p)?, Relation::AtMost);

        // U: the path's edges plus a random half of the rest
        let mut u = p.edges(g.n_edges());
        for e in all.iter() {
            if rng.random::<bool>() {
                u.insert(e);
            }
        }
        prop_a.add(check_property_a(g, &u, &all, &inst.weights, p)?, Relation::AtMost);

        let mut cuts = vec![1, p.len() / 2];
        cuts.dedup();
        for k in cuts.into_iter().filter(|&k| k >= 1 && k < p.len()) {
            let (first, second) = p.split_at(k);
            prop_b.add(check_property_b(g, &all, &inst.weights, &first, &second)?, Relation::Equal);
        }

        if let Some(lattice) = &inst.lattice {
            if lattice.s() > 0 {
                split.add(check_splitting_bound(lattice, &inst.weights, p)?, Relation::AtMost);
            }
        }
    }
    Ok([
        tanh.record("tanh-bound", &inst.name, Relation::AtMost),
        prop_a.record("monotone-in-edges", &inst.name, Relation::AtMost),
        prop_b.record("concatenation", &inst.name, Relation::Equal),
        split.record("splitting-bound", &inst.name, Relation::AtMost),
    ]
    .into_iter()
    .flatten()
    .collect())
}

fn paths_of(inst: &Instance, pairs: &[(usize, usize)]) -> Result<Vec<ConsistentPath>> {
    let all = inst.graph.all_edges();
    let mut paths = Vec::new();
    for &(x, y) in pairs {
        paths.extend(enumerate_consistent_paths(&inst.graph, &all, x, y, all.len())?);
    }
    Ok(paths)
}

/// `⟨σ_x σ_y⟩` does not decrease when one coupling grows.
fn gks_trial(rng: &mut ChaCha8Rng, i: usize) -> Result<CheckRecord> {
    let (g, mut w) = random_graph(rng, 10, 14, 6);
    let (x, y) = random_pairs(rng, g.n_vertices(), 1)[0];
    let vertices = all_vertices(&g);
    let all = g.all_edges();
    let before = two_point_spin(&g, &all, &w, &vertices, x, y)?;
    let e = rng.random_range(0..g.n_edges());
    let delta = log_uniform(rng, 0.01, 1.0);
    w.set(e, w.get(e) + delta);
    let after = two_point_spin(&g, &all, &w, &vertices, x, y)?;
    Ok(CheckRecord::at_most(
        "gks-monotone",
        format!("#{i} {} x={x} y={y} edge={e} delta={delta:.4}", describe(&g)),
        before,
        after,
        INEQUALITY_SLACK,
    ))
}

/// Tanh bound, monotonicity in the edge set, concatenation and the
/// splitting bound on every path of the fixed suite and on randomized
/// boxes, plus randomized coupling-monotonicity trials.
pub fn properties(opts: &SuiteOptions) -> Result<Vec<CheckRecord>> {
    let mut rng = ChaCha8Rng::seed_from_u64(opts.seed ^ 0x5eed_0003);
    let mut out = Vec::new();
    for inst in selected(opts)? {
        let paths = paths_of(&inst, &inst.pairs())?;
        out.extend(path_properties(&mut rng, &inst, &paths)?);
    }
    if opts.instance.is_some() {
        return Ok(out);
    }
    for i in 0..opts.random_instances {
        let sides = [rng.random_range(2..=3), rng.random_range(2..=3)];
        let lattice = BoxGeometry::rectangular(1, 1, &sides)?;
        let weights = EdgeWeights((0..lattice.n_edges()).map(|_| log_uniform(&mut rng, 0.05, 1.5)).collect());
        let inst = Instance::from_box(&format!("#{i} box {}x{}", sides[0], sides[1]), lattice, weights);
        let n = inst.graph.n_vertices();
        let pairs = random_pairs(&mut rng, n, 2);
        let paths = paths_of(&inst, &pairs)?;
        out.extend(path_properties(&mut rng, &inst, &paths)?);
    }
    for i in 0..opts.random_instances {
        out.push(gks_trial(&mut rng, i)?);
    }
    Ok(out)
}

/// The susceptibility chain on the (1+1) box over a 5×5 coupling grid, the
/// (2+1) minimum box, and the one-dimensional closed form.
pub fn chain(_opts: &SuiteOptions) -> Result<Vec<CheckRecord>> {
    let mut out = Vec::new();
    let lattice = BoxGeometry::new(1, 1, 1)?;
    let grid: Vec<f64> = (0..5).map(|k| 0.05 + 0.1125 * k as f64).collect();
    for &j_d in &grid {
        for &j_s in &grid {
            let r = theorem_chain_check(&lattice, &Couplings::new(j_d, j_s)?, 50)?;
            let name = format!("box-1+1-N1 j_d={j_d} j_s={j_s}");
            let upper = r.geometric.value();
            if let Some(b) = r.split_bound {
                out.push(CheckRecord::at_most("chain-exact-vs-split", name.clone(), r.chi_box, b, IDENTITY_REL * b));
                out.push(CheckRecord::at_most("chain-split-vs-geometric", name.clone(), b, upper, IDENTITY_REL * b));
            }
            out.push(CheckRecord::at_most("chain-exact-vs-geometric", name.clone(), r.chi_box, upper, IDENTITY_REL * r.chi_box));
            // below the curve the partial sum and its tail bracket the geometric bound
            if let (crate::susceptibility::Extended::Finite(total), crate::susceptibility::Extended::Finite(tail)) =
                (r.geometric, r.tail)
            {
                let mut rec = CheckRecord::at_most(
                    "series-bracket",
                    format!("{name} n_max={} tail={tail:.3e}", r.n_max),
                    total,
                    r.truncated + tail,
                    IDENTITY_REL * total,
                );
                rec.pass &= r.truncated <= total * (1.0 + IDENTITY_REL);
                out.push(rec);
            }
        }
    }
    for sides in [[2, 2, 2], [3, 2, 2]] {
        let lattice = BoxGeometry::rectangular(2, 1, &sides)?;
        let r = theorem_chain_check(&lattice, &Couplings::new(0.2, 0.05)?, 50)?;
        let name = format!("box-2+1 {}x{}x{}", sides[0], sides[1], sides[2]);
        let b = r.split_bound.unwrap_or(f64::INFINITY);
        out.push(CheckRecord::at_most("chain-exact-vs-split", name.clone(), r.chi_box, b, IDENTITY_REL * r.chi_box));
        out.push(CheckRecord::at_most("chain-split-vs-geometric", name, b, r.geometric.value(), IDENTITY_REL * r.chi_box));
    }
    for j in [0.1, 0.3, 0.5] {
        out.push(CheckRecord::equal(
            "chi-1d-closed-form",
            format!("chain N=40 J={j}"),
            chi_1d_exact(j)?.value,
            chi_d_box_exact(1, 40, j)?.value,
            1e-8,
        ));
    }
    let point = &bound_curve(1, 1, &[0.5], &Estimator::Exact1d)?[0];
    let target = (-1.0f64).exp() / 2.0;
    let bisected = artanh_bisection(target);
    let mut rec = CheckRecord::at_most(
        "curve-1d-artanh",
        "d=1 s=1 J_d=0.5".into(),
        (point.js_bound.value() - bisected).abs(),
        1e-12,
        0.0,
    );
    rec.pass &= (artanh(target)? - bisected).abs() <= 1e-12;
    out.push(rec);
    Ok(out)
}

/// Inverts `tanh` on `[0, 20]` by bisection.
pub fn artanh_bisection(x: f64) -> f64 {
    let (mut lo, mut hi) = (0.0f64, 20.0f64);
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if mid.tanh() < x {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    0.5 * (lo + hi)
}

pub fn run(scope: Scope, opts: &SuiteOptions) -> Result<Vec<CheckRecord>> {
    Ok(match scope {
        Scope::Identities => identities(opts)?,
        Scope::Backbone => backbone(opts)?,
        Scope::Properties => properties(opts)?,
        Scope::Chain => chain(opts)?,
        Scope::All => {
            let mut out = identities(opts)?;
            out.extend(backbone(opts)?);
            out.extend(properties(opts)?);
            out.extend(chain(opts)?);
            out
        }
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn small() -> SuiteOptions {
        SuiteOptions {
            random_graphs: 10,
            random_instances: 5,
            ..SuiteOptions::default()
        }
    }

    #[test]
    fn scopes_parse() {
        assert_eq!("all".parse::<Scope>().unwrap(), Scope::All);
        assert!("everything".parse::<Scope>().is_err());
    }

    #[test]
    fn single_edge_backbone_is_one_check() {
        let opts = SuiteOptions {
            instance: Some("single-edge".into()),
            ..SuiteOptions::default()
        };
        let r = backbone(&opts).unwrap();
        assert_eq!(r.len(), 1);
        assert!(r[0].pass);
    }

    #[test]
    fn unknown_instance_rejected() {
        let opts = SuiteOptions {
            instance: Some("nope".into()),
            ..SuiteOptions::default()
        };
        assert!(backbone(&opts).is_err());
    }

    #[test]
    fn small_suites_pass() {
        for scope in [Scope::Identities, Scope::Backbone, Scope::Properties, Scope::Chain] {
            let r = run(scope, &small()).unwrap();
            let failed: Vec<_> = r.iter().filter(|c| !c.pass).collect();
            assert!(failed.is_empty(), "{scope}: {failed:?}");
        }
    }

    #[test]
    fn random_graphs_respect_limits() {
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        for _ in 0..200 {
            let (g, w) = random_graph(&mut rng, 20, 20, 12);
            assert!(g.n_vertices() <= 20 && g.n_edges() <= 20);
            assert!(g.cyclomatic(&g.all_edges()) <= 12);
            assert!(w.0.iter().all(|&j| (0.05..=1.5).contains(&j)));
        }
    }

    #[test]
    fn infinities_serialize_as_markers() {
        let r = CheckRecord::at_most("x", "y".into(), 1.0, f64::INFINITY, 0.0);
        let json = serde_json::to_string(&r).unwrap();
        assert!(json.contains("\"rhs\":\"inf\""));
    }
}
