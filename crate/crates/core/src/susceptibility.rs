//! Susceptibilities, the geometric-series bound and the sub-criticality curve
//! `tanh(J_s) < 1 / (2 s χ_d(J_d))`.

use std::collections::BTreeMap;
use std::fmt;

use rayon::prelude::*;
use serde::Serialize;

use crate::backbone::{for_each_consistent_path_from, SplitBoundEvaluator};
use crate::caps;
use crate::currents::two_point_matrix_currents;
use crate::edgeset::EdgeSet;
use crate::error::{Error, Result};
use crate::lattice::{BoxGeometry, EdgeClass, Graph};
use crate::spin::{two_point_row_sums, Couplings, EdgeWeights};
use crate::tolerance::IDENTITY_REL;
use crate::transfer::TransferSystem;

/// How a susceptibility value was obtained.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum Provenance {
    ExactClosedForm,
    ExactEnumeration,
    TransferMatrix,
    Extrapolated,
}

impl Provenance {
    pub fn as_str(self) -> &'static str {
        match self {
            Provenance::ExactClosedForm => "exact-closed-form",
            Provenance::ExactEnumeration => "exact-enumeration",
            Provenance::TransferMatrix => "transfer-matrix",
            Provenance::Extrapolated => "extrapolated",
        }
    }
}

impl fmt::Display for Provenance {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

/// The volume a susceptibility refers to.
#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum Volume {
    Infinite,
    Box { dims: usize, n: usize },
    Strip { width: usize, length: usize },
    /// Extrapolated from strips of these widths.
    Widths { widths: Vec<usize> },
    Graph { vertices: usize },
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ChiEstimate {
    pub value: f64,
    pub provenance: Provenance,
    pub volume: Volume,
}

/// A real number or `+∞`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub enum Extended {
    Finite(f64),
    Infinite,
}

impl Extended {
    pub fn is_finite(self) -> bool {
        matches!(self, Extended::Finite(_))
    }

    pub fn value(self) -> f64 {
        match self {
            Extended::Finite(x) => x,
            Extended::Infinite => f64::INFINITY,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct BoundCurvePoint {
    pub j_d: f64,
    pub chi: ChiEstimate,
    pub js_bound: Extended,
}

impl BoundCurvePoint {
    /// Only closed-form susceptibilities give a rigorous bound; finite-volume
    /// values underestimate `χ_d`.
    pub fn certified(&self) -> bool {
        self.chi.provenance == Provenance::ExactClosedForm
    }
}

fn check_coupling(j: f64) -> Result<()> {
    if !j.is_finite() || j < 0.0 {
        return Err(Error::InvalidArgument(format!("coupling must be finite and nonnegative, got {j}")));
    }
    Ok(())
}

/// `χ_1(J) = Σ_r tanh(J)^|r| = e^{2J}`.
pub fn chi_1d_exact(j: f64) -> Result<ChiEstimate> {
    check_coupling(j)?;
    Ok(ChiEstimate {
        value: (2.0 * j).exp(),
        provenance: Provenance::ExactClosedForm,
        volume: Volume::Infinite,
    })
}

/// `sup_{x ∈ vertices} Σ_{y ∈ vertices} ⟨σ_x σ_y⟩` on the subgraph `edges`,
/// through even-subgraph enumeration.
pub fn chi_finite_exact(graph: &Graph, edges: &EdgeSet, weights: &EdgeWeights, vertices: &[usize]) -> Result<f64> {
    let m = two_point_matrix_currents(graph, edges, weights, vertices)?;
    Ok(m.iter().map(|row| row.iter().sum::<f64>()).fold(f64::NEG_INFINITY, f64::max))
}

/// Exact susceptibility of a full box, all couplings by edge class.
pub fn chi_box_exact(lattice: &BoxGeometry, couplings: &Couplings) -> Result<ChiEstimate> {
    let g = lattice.graph();
    let vertices: Vec<usize> = (0..g.n_vertices()).collect();
    let value = chi_finite_exact(g, &g.all_edges(), &couplings.weights(g), &vertices)?;
    Ok(ChiEstimate {
        value,
        provenance: Provenance::ExactEnumeration,
        volume: box_volume(lattice),
    })
}

/// Exact susceptibility of the d-dimensional box `Λ_N` (free boundary) at coupling `j`.
pub fn chi_d_box_exact(d: usize, n: usize, j: f64) -> Result<ChiEstimate> {
    check_coupling(j)?;
    let lattice = BoxGeometry::new(d, 0, n)?;
    chi_box_exact(&lattice, &Couplings::new(j, 0.0)?)
}

/// Exact susceptibility of the slab `Λ_N^0` of a (d+s) box.
pub fn chi_slab_exact(lattice: &BoxGeometry, couplings: &Couplings) -> Result<ChiEstimate> {
    let g = lattice.graph();
    let slab = lattice.central_slab()?;
    let value = chi_finite_exact(g, &slab.edges, &couplings.weights(g), &slab.vertices)?;
    Ok(ChiEstimate {
        value,
        provenance: Provenance::ExactEnumeration,
        volume: Volume::Graph { vertices: slab.vertices.len() },
    })
}

fn box_volume(lattice: &BoxGeometry) -> Volume {
    match lattice.half_side() {
        Some(n) => Volume::Box { dims: lattice.d() + lattice.s(), n },
        None => Volume::Graph { vertices: lattice.n_vertices() },
    }
}

/// Largest strip width accepted by [`chi_2d_strip`].
pub const MAX_STRIP_WIDTH: usize = 12;

/// Free-boundary `width × length` strip of Z^2 through row-to-row transfer matrices.
pub fn chi_2d_strip(width: usize, length: usize, j: f64) -> Result<ChiEstimate> {
    check_coupling(j)?;
    let cap = MAX_STRIP_WIDTH.min(caps::active().max_layer);
    if width == 0 || width > cap {
        return Err(Error::CapExceeded { what: "strip width", size: width, cap });
    }
    if length < width {
        return Err(Error::InvalidArgument(format!("strip length {length} is shorter than its width {width}")));
    }
    let lattice = BoxGeometry::rectangular(2, 0, &[width, length])?;
    let tm = TransferSystem::from_box(&lattice, &EdgeWeights::uniform(lattice.graph(), j))?;
    Ok(ChiEstimate {
        value: tm.susceptibility(),
        provenance: Provenance::TransferMatrix,
        volume: Volume::Strip { width, length },
    })
}

/// Ratio-of-increments extrapolation over square `w × w` boxes for increasing
/// `w`. With increments `Δ_1, Δ_2` and `r = Δ_2/Δ_1 ∈ (0, 1)`, the tail is
/// summed as a geometric series; otherwise the largest box value is returned.
pub fn chi_2d_extrapolated(widths: &[usize], j: f64) -> Result<ChiEstimate> {
    if widths.len() < 3 || widths.windows(2).any(|w| w[0] >= w[1]) {
        return Err(Error::InvalidArgument("extrapolation needs three or more increasing widths".into()));
    }
    let chis = widths
        .iter()
        .map(|&w| chi_2d_strip(w, w, j).map(|c| c.value))
        .collect::<Result<Vec<f64>>>()?;
    let k = chis.len();
    let (d1, d2) = (chis[k - 2] - chis[k - 3], chis[k - 1] - chis[k - 2]);
    let last = chis[k - 1];
    let value = if d1 > 0.0 && d2 > 0.0 && d2 < d1 {
        let r = d2 / d1;
        last + d2 * r / (1.0 - r)
    } else {
        last
    };
    Ok(ChiEstimate {
        value,
        provenance: Provenance::Extrapolated,
        volume: Volume::Widths { widths: widths.to_vec() },
    })
}

/// `0.5 · ln((1 + x) / (1 − x))` for `|x| < 1`.
pub fn artanh(x: f64) -> Result<f64> {
    if !(x.abs() < 1.0) {
        return Err(Error::InvalidArgument(format!("artanh is defined on (-1, 1), got {x}")));
    }
    Ok(0.5 * ((1.0 + x) / (1.0 - x)).ln())
}

fn check_chi_s(chi: f64, s: usize) -> Result<()> {
    if !(chi >= 1.0) || !chi.is_finite() {
        return Err(Error::InvalidArgument(format!("susceptibility must be finite and at least 1, got {chi}")));
    }
    if s == 0 {
        return Err(Error::InvalidArgument("s must be at least 1".into()));
    }
    Ok(())
}

/// `Σ_{n≥0} (2s tanh J_s)^n χ^{n+1} = χ / (1 − 2s tanh(J_s) χ)`, or `+∞` when the ratio is ≥ 1.
pub fn geometric_bound(chi: f64, s: usize, j_s: f64) -> Result<Extended> {
    check_chi_s(chi, s)?;
    check_coupling(j_s)?;
    let ratio = 2.0 * s as f64 * j_s.tanh() * chi;
    Ok(if ratio < 1.0 { Extended::Finite(chi / (1.0 - ratio)) } else { Extended::Infinite })
}

/// Partial sum `Σ_{n≤m}` of the geometric bound together with the tail
/// `(2s T χ)^{m+1} χ / (1 − 2s T χ)` (infinite when the series diverges).
pub fn truncated_series(chi: f64, s: usize, j_s: f64, m: usize) -> Result<(f64, Extended)> {
    check_chi_s(chi, s)?;
    check_coupling(j_s)?;
    let ratio = 2.0 * s as f64 * j_s.tanh() * chi;
    let mut term = chi;
    let mut sum = 0.0;
    for _ in 0..=m {
        sum += term;
        term *= ratio;
    }
    let tail = if ratio < 1.0 { Extended::Finite(term / (1.0 - ratio)) } else { Extended::Infinite };
    Ok((sum, tail))
}

/// `artanh(1 / (2 s χ))`, or `+∞` when `2 s χ ≤ 1`.
pub fn js_bound(chi: f64, s: usize) -> Result<Extended> {
    check_chi_s(chi, s)?;
    let x = 1.0 / (2.0 * s as f64 * chi);
    Ok(if x < 1.0 { Extended::Finite(artanh(x)?) } else { Extended::Infinite })
}

/// Source of `χ_d(J_d)` along a bound curve.
#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum Estimator {
    /// `e^{2J}`; d = 1 only.
    Exact1d,
    /// Exact finite box `Λ_N` in d dimensions.
    Enumeration { n: usize },
    /// `width × length` strip; d = 2 only.
    Strip { width: usize, length: usize },
    /// Ratio-of-increments over square boxes; d = 2 only.
    Extrapolated { widths: Vec<usize> },
}

impl Estimator {
    pub fn estimate(&self, d: usize, j: f64) -> Result<ChiEstimate> {
        match (self, d) {
            (Estimator::Exact1d, 1) => chi_1d_exact(j),
            (Estimator::Enumeration { n }, _) => chi_d_box_exact(d, *n, j),
            (Estimator::Strip { width, length }, 2) => chi_2d_strip(*width, *length, j),
            (Estimator::Extrapolated { widths }, 2) => chi_2d_extrapolated(widths, j),
            _ => Err(Error::InvalidArgument(format!("estimator {self:?} does not apply to d = {d}"))),
        }
    }

    fn check_dimension(&self, d: usize) -> Result<()> {
        let ok = match self {
            Estimator::Exact1d => d == 1,
            Estimator::Enumeration { .. } => d >= 1,
            Estimator::Strip { .. } | Estimator::Extrapolated { .. } => d == 2,
        };
        if ok {
            Ok(())
        } else {
            Err(Error::InvalidArgument(format!("estimator {self:?} does not apply to d = {d}")))
        }
    }
}

/// One point per grid value, ordered by `J_d`. Points are evaluated in parallel.
pub fn bound_curve(d: usize, s: usize, grid: &[f64], estimator: &Estimator) -> Result<Vec<BoundCurvePoint>> {
    if s == 0 {
        return Err(Error::InvalidArgument("s must be at least 1".into()));
    }
    estimator.check_dimension(d)?;
    if let Some(bad) = grid.iter().find(|j| !(**j > 0.0) || !j.is_finite()) {
        return Err(Error::InvalidArgument(format!("grid values must be positive and finite, got {bad}")));
    }
    let mut sorted = grid.to_vec();
    sorted.sort_by(f64::total_cmp);
    sorted
        .par_iter()
        .map(|&j_d| {
            let chi = estimator.estimate(d, j_d)?;
            let js_bound = js_bound(chi.value, s)?;
            Ok(BoundCurvePoint { j_d, chi, js_bound })
        })
        .collect()
}

/// One group of the path-split bound: paths with `n` vertical steps.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ChainTerm {
    pub n: usize,
    pub paths: usize,
    /// Sup over `x` of the summed splitting bounds (plus 1 for `n = 0`).
    pub split_sum: f64,
    /// `(2s tanh J_s)^n χ_slab^{n+1}`.
    pub series_term: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ChainReport {
    /// (i) exact `sup_x Σ_y ⟨σ_x σ_y⟩` on the box.
    pub chi_box: f64,
    pub chi_box_provenance: Provenance,
    /// (ii) `sup_x (1 + Σ_ω rhs(ω))`, absent when path enumeration exceeds the caps.
    pub split_bound: Option<f64>,
    pub split_skipped: Option<String>,
    pub terms: Vec<ChainTerm>,
    pub chi_slab: f64,
    /// (iii) geometric bound with the slab susceptibility.
    pub geometric: Extended,
    pub n_max: usize,
    pub truncated: f64,
    pub tail: Extended,
    pub holds: bool,
}

fn at_most(a: f64, b: f64) -> bool {
    a <= b + IDENTITY_REL * b.abs()
}

/// Checks `(i) ≤ (ii) ≤ (iii)` on a small box, with relative slack `1e-10`.
pub fn theorem_chain_check(lattice: &BoxGeometry, couplings: &Couplings, n_max: usize) -> Result<ChainReport> {
    if lattice.s() == 0 {
        return Err(Error::InvalidArgument("the chain needs at least one vertical direction".into()));
    }
    let g = lattice.graph();
    let weights = couplings.weights(g);
    let all = g.all_edges();
    let s = lattice.s();

    let (chi_box, chi_box_provenance) = if g.n_vertices() <= caps::active().max_spins {
        let vertices: Vec<usize> = (0..g.n_vertices()).collect();
        let rows = two_point_row_sums(g, &all, &weights, &vertices)?;
        (rows.into_iter().fold(f64::NEG_INFINITY, f64::max), Provenance::ExactEnumeration)
    } else {
        (TransferSystem::from_box(lattice, &weights)?.susceptibility(), Provenance::TransferMatrix)
    };

    let chi_slab = chi_slab_exact(lattice, couplings)?.value;
    let geometric = geometric_bound(chi_slab, s, couplings.j_s)?;
    let (truncated, tail) = truncated_series(chi_slab, s, couplings.j_s, n_max)?;
    let ratio = 2.0 * s as f64 * couplings.j_s.tanh();

    // a cheap counting pass keeps over-cap boxes from evaluating millions of bounds
    let counts: Vec<Result<usize>> = (0..g.n_vertices())
        .into_par_iter()
        .map(|x| for_each_consistent_path_from(g, &all, x, usize::MAX, |_| {}))
        .collect();
    let over_cap = counts.into_iter().find_map(|c| match c {
        Err(Error::CapExceeded { what, size, cap }) => Some(Ok(format!("{what}: {size} exceeds cap {cap}"))),
        Err(e) => Some(Err(e)),
        Ok(_) => None,
    });
    let over_cap = over_cap.transpose()?;

    let vertices: Vec<usize> = if over_cap.is_some() { Vec::new() } else { (0..g.n_vertices()).collect() };
    let per_x: Vec<Result<BTreeMap<usize, (usize, f64)>>> = vertices
        .into_par_iter()
        .map(|x| {
            let evaluator = SplitBoundEvaluator::new(lattice, &weights);
            let mut groups: BTreeMap<usize, (usize, f64)> = BTreeMap::new();
            groups.insert(0, (0, 1.0));
            let mut failure = None;
            for_each_consistent_path_from(g, &all, x, usize::MAX, |p| {
                if failure.is_some() {
                    return;
                }
                let n = p.steps().iter().filter(|s| g.class(s.edge) == EdgeClass::Vertical).count();
                match evaluator.eval(p) {
                    Ok(v) => {
                        let entry = groups.entry(n).or_insert((0, 0.0));
                        entry.0 += 1;
                        entry.1 += v;
                    }
                    Err(e) => failure = Some(e),
                }
            })?;
            match failure {
                Some(e) => Err(e),
                None => Ok(groups),
            }
        })
        .collect();

    let mut terms = Vec::new();
    let mut split_bound = None;
    let mut split_skipped = over_cap;
    let mut collected = Vec::with_capacity(per_x.len());
    for r in per_x {
        match r {
            Ok(m) => collected.push(m),
            Err(Error::CapExceeded { what, size, cap }) => {
                split_skipped = Some(format!("{what}: {size} exceeds cap {cap}"));
                break;
            }
            Err(e) => return Err(e),
        }
    }
    if split_skipped.is_none() {
        let max_n = collected.iter().flat_map(|m| m.keys().copied()).max().unwrap_or(0);
        for n in 0..=max_n {
            let paths = collected.iter().map(|m| m.get(&n).map_or(0, |e| e.0)).sum();
            let split_sum = collected
                .iter()
                .map(|m| m.get(&n).map_or(0.0, |e| e.1))
                .fold(0.0, f64::max);
            let series_term = ratio.powi(n as i32) * chi_slab.powi(n as i32 + 1);
            terms.push(ChainTerm { n, paths, split_sum, series_term });
        }
        split_bound = Some(
            collected
                .iter()
                .map(|m| m.values().map(|e| e.1).sum::<f64>())
                .fold(f64::NEG_INFINITY, f64::max),
        );
    }

    let upper = geometric.value();
    let holds = match split_bound {
        Some(b) => at_most(chi_box, b) && at_most(b, upper),
        None => at_most(chi_box, upper),
    };
    Ok(ChainReport {
        chi_box,
        chi_box_provenance,
        split_bound,
        split_skipped,
        terms,
        chi_slab,
        geometric,
        n_max,
        truncated,
        tail,
        holds,
    })
}
