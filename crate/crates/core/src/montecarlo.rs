//! Metropolis and Wolff samplers on periodic boxes `(Z/LZ)^(d+s)`.
//!
//! The estimator is `⟨M²⟩/|Λ|` with `M = Σ_x σ_x`. On a torus this is the
//! translation-averaged summed two-point function, not the free-boundary
//! supremum, so it is only compared qualitatively with the curve.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::lattice::{EdgeClass, Graph};
use crate::spin::{two_point_matrix_spin, Couplings, EdgeWeights};
use crate::susceptibility::BoundCurvePoint;

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct McConfig {
    pub d: usize,
    pub s: usize,
    /// Linear size of the torus.
    pub l: usize,
    pub couplings: Couplings,
    pub sweeps: usize,
    pub burn_in: usize,
    pub chains: usize,
    pub seed: u64,
}

impl McConfig {
    pub fn validate(&self) -> Result<()> {
        if self.d + self.s == 0 {
            return Err(Error::ZeroDimension);
        }
        if self.l < 2 {
            return Err(Error::InvalidArgument(format!("torus size L = {} must be at least 2", self.l)));
        }
        if self.sweeps <= self.burn_in {
            return Err(Error::InvalidArgument("sweeps must exceed burn-in".into()));
        }
        if self.chains == 0 {
            return Err(Error::InvalidArgument("at least one chain is required".into()));
        }
        let n = (self.l as u128).checked_pow((self.d + self.s) as u32);
        if n.is_none_or(|n| n > 1 << 26) {
            return Err(Error::InvalidArgument("torus too large".into()));
        }
        Ok(())
    }

    pub fn n_sites(&self) -> usize {
        self.l.pow((self.d + self.s) as u32)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct McEstimate {
    /// Mean over chains of `⟨M²⟩/|Λ|`.
    pub mean: f64,
    /// Standard error across chains; absent for a single chain.
    pub std_error: Option<f64>,
    pub chain_means: Vec<f64>,
    /// Metropolis acceptance rate.
    pub acceptance: Option<f64>,
    /// Mean Wolff cluster size.
    pub mean_cluster: Option<f64>,
    pub measurements: usize,
}

impl McEstimate {
    /// `|mean − target| ≤ k · std_error`.
    pub fn agrees_with(&self, target: f64, k: f64) -> bool {
        match self.std_error {
            Some(se) => (self.mean - target).abs() <= k * se,
            None => false,
        }
    }
}

/// Periodic bonds `(x, x + e_axis)` for every site and axis, in site order.
/// For `L = 2` each pair is joined twice, as on the torus.
pub fn torus_bonds(d: usize, s: usize, l: usize) -> Vec<(usize, usize, EdgeClass)> {
    let dims = d + s;
    let n = l.pow(dims as u32);
    let mut strides = vec![1usize; dims];
    for k in (0..dims.saturating_sub(1)).rev() {
        strides[k] = strides[k + 1] * l;
    }
    let mut bonds = Vec::with_capacity(n * dims);
    for v in 0..n {
        for (axis, &st) in strides.iter().enumerate() {
            let c = (v / st) % l;
            let w = if c + 1 == l { v - c * st } else { v + st };
            let class = if axis < d { EdgeClass::Planar } else { EdgeClass::Vertical };
            bonds.push((v, w, class));
        }
    }
    bonds
}

struct Torus {
    n: usize,
    /// Per site: (neighbour, coupling), one entry per bond end.
    adj: Vec<Vec<(usize, f64)>>,
}

impl Torus {
    fn new(cfg: &McConfig) -> Self {
        let n = cfg.n_sites();
        let mut adj = vec![Vec::new(); n];
        for (a, b, class) in torus_bonds(cfg.d, cfg.s, cfg.l) {
            let j = cfg.couplings.for_class(class);
            adj[a].push((b, j));
            adj[b].push((a, j));
        }
        Torus { n, adj }
    }
}

/// One RNG per chain: the master seed picks the key, the chain index the stream.
fn chain_rng(seed: u64, chain: usize) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(chain as u64);
    rng
}

struct ChainResult {
    mean: f64,
    measurements: usize,
    accepted: u64,
    attempts: u64,
    cluster_total: u64,
    clusters: u64,
}

fn random_spins(rng: &mut ChaCha8Rng, n: usize) -> Vec<i8> {
    (0..n).map(|_| if rng.random::<bool>() { 1 } else { -1 }).collect()
}

fn magnetisation_sq_per_site(spins: &[i8]) -> f64 {
    let m: i64 = spins.iter().map(|&x| x as i64).sum();
    (m * m) as f64 / spins.len() as f64
}

fn metropolis_chain(torus: &Torus, cfg: &McConfig, chain: usize) -> ChainResult {
    let mut rng = chain_rng(cfg.seed, chain);
    let mut spins = random_spins(&mut rng, torus.n);
    let (mut accepted, mut attempts) = (0u64, 0u64);
    let mut total = 0.0;
    for sweep in 0..cfg.sweeps {
        for _ in 0..torus.n {
            let i = rng.random_range(0..torus.n);
            let field: f64 = torus.adj[i].iter().map(|&(j, c)| c * spins[j] as f64).sum();
            let delta = 2.0 * spins[i] as f64 * field;
            attempts += 1;
            if delta <= 0.0 || rng.random::<f64>() < (-delta).exp() {
                spins[i] = -spins[i];
                accepted += 1;
            }
        }
        if sweep >= cfg.burn_in {
            total += magnetisation_sq_per_site(&spins);
        }
    }
    let measurements = cfg.sweeps - cfg.burn_in;
    ChainResult {
        mean: total / measurements as f64,
        measurements,
        accepted,
        attempts,
        cluster_total: 0,
        clusters: 0,
    }
}

fn wolff_chain(torus: &Torus, cfg: &McConfig, chain: usize) -> ChainResult {
    let mut rng = chain_rng(cfg.seed, chain);
    let mut spins = random_spins(&mut rng, torus.n);
    let mut in_cluster = vec![false; torus.n];
    let mut stack = Vec::new();
    let mut members = Vec::new();
    let (mut cluster_total, mut clusters) = (0u64, 0u64);
    let mut total = 0.0;
    let mut grow = |rng: &mut ChaCha8Rng, spins: &mut [i8]| -> usize {
        let seed_site = rng.random_range(0..torus.n);
        let sign = spins[seed_site];
        in_cluster[seed_site] = true;
        stack.push(seed_site);
        members.push(seed_site);
        while let Some(i) = stack.pop() {
            for &(j, c) in &torus.adj[i] {
                if !in_cluster[j] && spins[j] == sign && rng.random::<f64>() < 1.0 - (-2.0 * c).exp() {
                    in_cluster[j] = true;
                    stack.push(j);
                    members.push(j);
                }
            }
        }
        for &i in &members {
            spins[i] = -sign;
            in_cluster[i] = false;
        }
        let size = members.len();
        members.clear();
        size
    };
    // Burn-in sweeps flip clusters until |Λ| spins have flipped. Measuring at
    // such a state-dependent time would bias ⟨M²⟩, so afterwards every sweep
    // uses a fixed cluster count taken from the burn-in average.
    let mut burn_flips = 0usize;
    let mut burn_clusters = 0usize;
    for _ in 0..cfg.burn_in {
        let mut flipped = 0;
        while flipped < torus.n {
            flipped += grow(&mut rng, &mut spins);
            burn_clusters += 1;
        }
        burn_flips += flipped;
    }
    let per_sweep = if burn_clusters == 0 {
        torus.n
    } else {
        (torus.n as f64 * burn_clusters as f64 / burn_flips as f64).ceil().max(1.0) as usize
    };
    for _ in cfg.burn_in..cfg.sweeps {
        for _ in 0..per_sweep {
            cluster_total += grow(&mut rng, &mut spins) as u64;
            clusters += 1;
        }
        total += magnetisation_sq_per_site(&spins);
    }
    let measurements = cfg.sweeps - cfg.burn_in;
    ChainResult {
        mean: total / measurements as f64,
        measurements,
        accepted: 0,
        attempts: 0,
        cluster_total,
        clusters,
    }
}

fn aggregate(results: Vec<ChainResult>, metropolis: bool) -> McEstimate {
    let k = results.len() as f64;
    let chain_means: Vec<f64> = results.iter().map(|r| r.mean).collect();
    let mean = chain_means.iter().sum::<f64>() / k;
    let std_error = (results.len() > 1).then(|| {
        let var = chain_means.iter().map(|m| (m - mean).powi(2)).sum::<f64>() / (k - 1.0);
        (var / k).sqrt()
    });
    let measurements = results.iter().map(|r| r.measurements).sum();
    let (acceptance, mean_cluster) = if metropolis {
        let acc: u64 = results.iter().map(|r| r.accepted).sum();
        let att: u64 = results.iter().map(|r| r.attempts).sum();
        (Some(acc as f64 / att as f64), None)
    } else {
        let size: u64 = results.iter().map(|r| r.cluster_total).sum();
        let count: u64 = results.iter().map(|r| r.clusters).sum();
        (None, Some(size as f64 / count as f64))
    };
    McEstimate {
        mean,
        std_error,
        chain_means,
        acceptance,
        mean_cluster,
        measurements,
    }
}

/// Single-spin Metropolis: a sweep is `|Λ|` updates at uniformly random sites.
pub fn run_metropolis(cfg: &McConfig) -> Result<McEstimate> {
    cfg.validate()?;
    let torus = Torus::new(cfg);
    let results = (0..cfg.chains)
        .into_par_iter()
        .map(|c| metropolis_chain(&torus, cfg, c))
        .collect();
    Ok(aggregate(results, true))
}

/// Wolff cluster updates with bond probability `1 − e^{−2J_b}`. A sweep is
/// about `|Λ|` flipped spins: as many clusters as that takes during burn-in,
/// then a fixed count set by the burn-in mean cluster size.
pub fn run_wolff(cfg: &McConfig) -> Result<McEstimate> {
    cfg.validate()?;
    let torus = Torus::new(cfg);
    let results = (0..cfg.chains)
        .into_par_iter()
        .map(|c| wolff_chain(&torus, cfg, c))
        .collect();
    Ok(aggregate(results, false))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Sampler {
    Metropolis,
    Wolff,
}

pub fn run(sampler: Sampler, cfg: &McConfig) -> Result<McEstimate> {
    match sampler {
        Sampler::Metropolis => run_metropolis(cfg),
        Sampler::Wolff => run_wolff(cfg),
    }
}

/// Exact `⟨M²⟩/|Λ|` on the torus by spin enumeration (within the spin cap).
pub fn exact_torus_proxy(d: usize, s: usize, l: usize, couplings: &Couplings) -> Result<f64> {
    if d + s == 0 {
        return Err(Error::ZeroDimension);
    }
    let (graph, weights) = torus_graph(d, s, l, couplings)?;
    let n = graph.n_vertices();
    let vertices: Vec<usize> = (0..n).collect();
    let m = two_point_matrix_spin(&graph, &graph.all_edges(), &weights, &vertices)?;
    Ok(m.iter().flatten().sum::<f64>() / n as f64)
}

/// The torus as a multigraph with its coupling weights.
pub fn torus_graph(d: usize, s: usize, l: usize, couplings: &Couplings) -> Result<(Graph, EdgeWeights)> {
    let n = l.pow((d + s) as u32);
    let graph = Graph::from_classed_edges(n, &torus_bonds(d, s, l))?;
    let weights = couplings.weights(&graph);
    Ok((graph, weights))
}

/// Relative change below which the proxy counts as saturated in `L`.
pub const SATURATION_THRESHOLD: f64 = 0.1;

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ScanRow {
    pub l: usize,
    pub estimate: McEstimate,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ScanPoint {
    pub j_d: f64,
    /// `(1 − margin) · j_s_bound`; absent when the bound is infinite.
    pub j_s: Option<f64>,
    pub rows: Vec<ScanRow>,
    /// Relative change of the proxy between the two largest sizes.
    pub relative_change: Option<f64>,
    pub saturates: Option<bool>,
}

/// Seed for point `i` at size `l`, mixed with SplitMix64 so streams never collide.
fn derived_seed(master: u64, i: usize, l: usize) -> u64 {
    let mut z = master ^ (i as u64).wrapping_mul(0x9E37_79B9_7F4A_7C15) ^ (l as u64).rotate_left(32);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// Runs each curve point at `J_s = (1 − margin) · bound` over the sizes `ls`.
/// Diagnostic only: saturation is the heuristic `relative change < 10%`
/// between the two largest sizes.
pub fn scan_curve(
    template: &McConfig,
    sampler: Sampler,
    curve: &[BoundCurvePoint],
    margin: f64,
    ls: &[usize],
) -> Result<Vec<ScanPoint>> {
    if !(0.0..=1.0).contains(&margin) {
        return Err(Error::InvalidArgument(format!("margin must lie in [0, 1], got {margin}")));
    }
    let mut sizes = ls.to_vec();
    sizes.sort_unstable();
    sizes.dedup();
    let mut out = Vec::with_capacity(curve.len());
    for (i, point) in curve.iter().enumerate() {
        let j_s = point.js_bound.is_finite().then(|| (1.0 - margin) * point.js_bound.value());
        let mut rows = Vec::new();
        if let Some(j_s) = j_s {
            for &l in &sizes {
                let cfg = McConfig {
                    l,
                    couplings: Couplings::new(point.j_d, j_s)?,
                    seed: derived_seed(template.seed, i, l),
                    ..template.clone()
                };
                rows.push(ScanRow { l, estimate: run(sampler, &cfg)? });
            }
        }
        let relative_change = match rows.as_slice() {
            [.., a, b] => Some((b.estimate.mean - a.estimate.mean).abs() / a.estimate.mean),
            _ => None,
        };
        out.push(ScanPoint {
            j_d: point.j_d,
            j_s,
            rows,
            relative_change,
            saturates: relative_change.map(|r| r < SATURATION_THRESHOLD),
        });
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::susceptibility::{bound_curve, Estimator};

    fn cfg(d: usize, s: usize, l: usize, j_d: f64, j_s: f64, seed: u64) -> McConfig {
        McConfig {
            d,
            s,
            l,
            couplings: Couplings::new(j_d, j_s).unwrap(),
            sweeps: 2200,
            burn_in: 200,
            chains: 16,
            seed,
        }
    }

    #[test]
    fn torus_bond_counts() {
        assert_eq!(torus_bonds(1, 1, 4).len(), 32);
        assert_eq!(torus_bonds(2, 1, 3).len(), 81);
        // L = 2: both neighbours coincide, giving doubled bonds
        let b = torus_bonds(1, 0, 2);
        assert_eq!(b, vec![(0, 1, EdgeClass::Planar), (1, 0, EdgeClass::Planar)]);
    }

    #[test]
    fn exact_proxy_small_cases() {
        let free = Couplings::new(0.0, 0.0).unwrap();
        assert!((exact_torus_proxy(1, 1, 3, &free).unwrap() - 1.0).abs() < 1e-12);
        // ring of 4: Σ_y ⟨σ_0 σ_y⟩ = Σ_r (t^r + t^{4-r}) / (1 + t^4)
        let j: f64 = 0.4;
        let t = j.tanh();
        let expected = (1.0 + 2.0 * t + 2.0 * t * t + 2.0 * t.powi(3) + t.powi(4)) / (1.0 + t.powi(4));
        let got = exact_torus_proxy(1, 0, 4, &Couplings::new(j, 0.0).unwrap()).unwrap();
        assert!((got - expected).abs() < 1e-12, "{got} {expected}");
    }

    #[test]
    fn validation() {
        assert!(run_metropolis(&cfg(1, 1, 1, 0.1, 0.1, 1)).is_err());
        let mut c = cfg(1, 1, 4, 0.1, 0.1, 1);
        c.burn_in = c.sweeps;
        assert!(run_wolff(&c).is_err());
    }

    #[test]
    fn zero_coupling_gives_one() {
        for sampler in [Sampler::Metropolis, Sampler::Wolff] {
            let e = run(sampler, &cfg(1, 1, 4, 0.0, 0.0, 11)).unwrap();
            assert!(e.agrees_with(1.0, 3.0), "{sampler:?} {e:?}");
        }
    }

    #[test]
    fn seeded_determinism() {
        let c = cfg(1, 1, 4, 0.3, 0.1, 42);
        for sampler in [Sampler::Metropolis, Sampler::Wolff] {
            let a = run(sampler, &c).unwrap();
            let b = run(sampler, &c).unwrap();
            assert_eq!(a.mean.to_bits(), b.mean.to_bits());
            assert_eq!(a, b);
        }
    }

    #[test]
    fn matches_exact_on_tiny_torus() {
        let exact = exact_torus_proxy(1, 1, 4, &Couplings::new(0.3, 0.1).unwrap()).unwrap();
        for (sampler, seed) in [(Sampler::Metropolis, 3), (Sampler::Wolff, 4)] {
            let e = run(sampler, &cfg(1, 1, 4, 0.3, 0.1, seed)).unwrap();
            assert!(e.agrees_with(exact, 3.0), "{sampler:?} {e:?} vs {exact}");
        }
    }

    #[test]
    fn samplers_and_seeds_agree() {
        let a = run_metropolis(&cfg(1, 1, 4, 0.3, 0.1, 5)).unwrap();
        let b = run_wolff(&cfg(1, 1, 4, 0.3, 0.1, 6)).unwrap();
        let c = run_metropolis(&cfg(1, 1, 4, 0.3, 0.1, 7)).unwrap();
        let se = |x: &McEstimate, y: &McEstimate| (x.std_error.unwrap().powi(2) + y.std_error.unwrap().powi(2)).sqrt();
        assert!((a.mean - b.mean).abs() <= 3.0 * se(&a, &b));
        assert!((a.mean - c.mean).abs() <= 3.0 * se(&a, &c));
    }

    #[test]
    fn decoupled_layers_match_lower_dimension() {
        // with J_s = 0 the proxy of the (1+1) torus is that of a single ring
        let ring = exact_torus_proxy(1, 0, 4, &Couplings::new(0.5, 0.0).unwrap()).unwrap();
        let layered = exact_torus_proxy(1, 1, 4, &Couplings::new(0.5, 0.0).unwrap()).unwrap();
        assert!((ring - layered).abs() < 1e-12);
        let e = run_wolff(&cfg(1, 1, 4, 0.5, 0.0, 8)).unwrap();
        assert!(e.agrees_with(ring, 3.0), "{e:?} vs {ring}");
    }

    #[test]
    fn scan_saturates_below_curve() {
        let curve = bound_curve(1, 1, &[0.5], &Estimator::Exact1d).unwrap();
        let mut template = cfg(1, 1, 8, 0.0, 0.0, 99);
        template.sweeps = 1200;
        template.chains = 8;
        let scan = scan_curve(&template, Sampler::Wolff, &curve, 0.2, &[8, 16, 32]).unwrap();
        assert_eq!(scan[0].rows.len(), 3);
        assert_eq!(scan[0].saturates, Some(true), "{:?}", scan[0]);
    }

    #[test]
    fn scan_with_full_margin_is_one_dimensional() {
        let curve = bound_curve(1, 1, &[0.5], &Estimator::Exact1d).unwrap();
        let template = cfg(1, 1, 4, 0.0, 0.0, 12);
        let scan = scan_curve(&template, Sampler::Wolff, &curve, 1.0, &[4]).unwrap();
        assert_eq!(scan[0].j_s, Some(0.0));
        let ring = exact_torus_proxy(1, 0, 4, &Couplings::new(0.5, 0.0).unwrap()).unwrap();
        assert!(scan[0].rows[0].estimate.agrees_with(ring, 3.0));
    }

    #[test]
    fn scan_detects_ordered_control() {
        let curve = bound_curve(2, 1, &[1.0], &Estimator::Strip { width: 4, length: 4 }).unwrap();
        let mut template = cfg(2, 1, 4, 0.0, 0.0, 13);
        template.sweeps = 300;
        template.burn_in = 50;
        template.chains = 4;
        let scan = scan_curve(&template, Sampler::Wolff, &curve, 0.2, &[4, 8]).unwrap();
        assert_eq!(scan[0].saturates, Some(false), "{:?}", scan[0]);
    }
}
