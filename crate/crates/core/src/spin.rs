//! Brute-force spin sums: the ground truth every other module is checked against.
//!
//! Sums run over all `2^|V|` configurations of the selected vertices, with
//! the product-measure normalisation `2^{-|V|}` kept so that partition
//! functions are directly comparable with the current expansions. The
//! configuration space is cut into fixed blocks whose partial sums are
//! combined in block order, so the result does not depend on how many
//! threads take part.

use crate::caps;
use crate::edgeset::EdgeSet;
use crate::error::{Error, Result};
use crate::lattice::{BoxGeometry, EdgeClass, Graph};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

/// Planar and vertical couplings at β = 1.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Couplings {
    pub j_d: f64,
    pub j_s: f64,
}

impl Couplings {
    /// Zero couplings are admitted as degenerate test values.
    pub fn new(j_d: f64, j_s: f64) -> Result<Self> {
        for (name, j) in [("J_d", j_d), ("J_s", j_s)] {
            if !j.is_finite() || j < 0.0 {
                return Err(Error::InvalidArgument(format!("{name} = {j} must be finite and nonnegative")));
            }
        }
        Ok(Couplings { j_d, j_s })
    }

    pub fn for_class(&self, class: EdgeClass) -> f64 {
        match class {
            EdgeClass::Planar => self.j_d,
            EdgeClass::Vertical => self.j_s,
        }
    }

    pub fn weights(&self, graph: &Graph) -> EdgeWeights {
        EdgeWeights(graph.classes().iter().map(|&c| self.for_class(c)).collect())
    }
}

/// Per-edge coupling `J_b`, indexed like the graph's edges.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EdgeWeights(pub Vec<f64>);

impl EdgeWeights {
    pub fn uniform(graph: &Graph, j: f64) -> Self {
        EdgeWeights(vec![j; graph.n_edges()])
    }

    #[inline]
    pub fn get(&self, edge: usize) -> f64 {
        self.0[edge]
    }

    pub fn set(&mut self, edge: usize, j: f64) {
        self.0[edge] = j;
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn is_ferromagnetic(&self) -> bool {
        self.0.iter().all(|&j| j.is_finite() && j >= 0.0)
    }
}

const BLOCK_BITS: u32 = 12;

/// A spin system restricted to a vertex subset, with edges relabelled to
/// local bit positions.
struct LocalSystem {
    n: usize,
    bonds: Vec<(u32, u32, f64)>,
    /// Σ J_b, the energy of the all-aligned configuration.
    e_max: f64,
}

impl LocalSystem {
    fn new(graph: &Graph, edges: &EdgeSet, weights: &EdgeWeights, vertices: &[usize]) -> Result<Self> {
        let cap = caps::active().max_spins;
        if vertices.len() > cap {
            return Err(Error::CapExceeded {
                what: "spin system",
                size: vertices.len(),
                cap,
            });
        }
        if weights.len() != graph.n_edges() {
            return Err(Error::InvalidArgument("weight vector does not match the edge count".into()));
        }
        let mut local = vec![u32::MAX; graph.n_vertices()];
        for (i, &v) in vertices.iter().enumerate() {
            if v >= graph.n_vertices() || local[v] != u32::MAX {
                return Err(Error::InvalidArgument(format!("bad or repeated vertex {v}")));
            }
            local[v] = i as u32;
        }
        let mut bonds = Vec::with_capacity(edges.len());
        for e in edges.iter() {
            let [a, b] = graph.endpoints(e);
            if local[a] == u32::MAX || local[b] == u32::MAX {
                return Err(Error::Precondition(format!(
                    "edge {e} = {{{a}, {b}}} leaves the vertex set"
                )));
            }
            bonds.push((local[a], local[b], weights.get(e)));
        }
        let e_max = bonds.iter().map(|b| b.2).sum();
        Ok(LocalSystem { n: vertices.len(), bonds, e_max })
    }

    /// `exp(-H(c) - Σ J)`; bit `i` set means spin `i` is down.
    #[inline]
    fn shifted_weight(&self, c: u32) -> f64 {
        let mut energy = 0.0;
        for &(a, b, j) in &self.bonds {
            let disagree = ((c >> a) ^ (c >> b)) & 1;
            if disagree == 1 {
                energy -= 2.0 * j;
            }
        }
        energy.exp()
    }

    /// Folds every configuration into an accumulator, block by block.
    fn fold<A, F>(&self, init: impl Fn() -> A + Sync + Send, step: F) -> Vec<A>
    where
        A: Send,
        F: Fn(&mut A, u32, f64) + Sync + Send,
    {
        let total: u64 = 1u64 << self.n;
        let block: u64 = (1u64 << BLOCK_BITS).min(total);
        let n_blocks = total / block;
        (0..n_blocks)
            .into_par_iter()
            .map(|bi| {
                let mut acc = init();
                let start = bi * block;
                for c in start..start + block {
                    let c = c as u32;
                    let w = self.shifted_weight(c);
                    step(&mut acc, c, w);
                }
                acc
            })
            .collect()
    }

    fn log_prefactor(&self) -> f64 {
        self.e_max - self.n as f64 * std::f64::consts::LN_2
    }
}

#[inline]
fn spin(c: u32, i: u32) -> f64 {
    if (c >> i) & 1 == 1 { -1.0 } else { 1.0 }
}

/// `Z_U = 2^{-|U|} Σ_σ Π_{b ∈ edges} exp(J_b σ_x σ_y)`.
pub fn partition_spin(graph: &Graph, edges: &EdgeSet, weights: &EdgeWeights, vertices: &[usize]) -> Result<f64> {
    let sys = LocalSystem::new(graph, edges, weights, vertices)?;
    let sum: f64 = sys.fold(|| 0.0, |acc, _, w| *acc += w).into_iter().sum();
    Ok(sum * sys.log_prefactor().exp())
}

/// `⟨σ_x σ_y⟩_U`, with `x`, `y` graph vertex indices inside `vertices`.
pub fn two_point_spin(
    graph: &Graph,
    edges: &EdgeSet,
    weights: &EdgeWeights,
    vertices: &[usize],
    x: usize,
    y: usize,
) -> Result<f64> {
    let sys = LocalSystem::new(graph, edges, weights, vertices)?;
    let pos = |v: usize| {
        vertices
            .iter()
            .position(|&w| w == v)
            .map(|p| p as u32)
            .ok_or_else(|| Error::InvalidArgument(format!("vertex {v} is not in the vertex set")))
    };
    let (px, py) = (pos(x)?, pos(y)?);
    if px == py {
        return Ok(1.0);
    }
    let parts = sys.fold(
        || (0.0, 0.0),
        |acc, c, w| {
            acc.0 += w;
            acc.1 += w * spin(c, px) * spin(c, py);
        },
    );
    let (z, s) = parts.into_iter().fold((0.0, 0.0), |a, b| (a.0 + b.0, a.1 + b.1));
    Ok(s / z)
}

/// Row sums `Σ_{y ∈ U} ⟨σ_x σ_y⟩_U` for every `x` in `vertices` (same order).
pub fn two_point_row_sums(
    graph: &Graph,
    edges: &EdgeSet,
    weights: &EdgeWeights,
    vertices: &[usize],
) -> Result<Vec<f64>> {
    let sys = LocalSystem::new(graph, edges, weights, vertices)?;
    let n = sys.n;
    let parts = sys.fold(
        || (0.0, vec![0.0; n]),
        |acc, c, w| {
            acc.0 += w;
            // magnetisation M = n - 2·(number of down spins)
            let m = n as f64 - 2.0 * c.count_ones() as f64;
            for (i, r) in acc.1.iter_mut().enumerate() {
                *r += w * spin(c, i as u32) * m;
            }
        },
    );
    let mut z = 0.0;
    let mut rows = vec![0.0; n];
    for (pz, pr) in parts {
        z += pz;
        for (r, p) in rows.iter_mut().zip(pr) {
            *r += p;
        }
    }
    Ok(rows.into_iter().map(|r| r / z).collect())
}

/// Full two-point matrix over `vertices`.
pub fn two_point_matrix_spin(
    graph: &Graph,
    edges: &EdgeSet,
    weights: &EdgeWeights,
    vertices: &[usize],
) -> Result<Vec<Vec<f64>>> {
    let sys = LocalSystem::new(graph, edges, weights, vertices)?;
    let n = sys.n;
    let parts = sys.fold(
        || (0.0, vec![0.0; n * n]),
        |acc, c, w| {
            acc.0 += w;
            for i in 0..n {
                let si = spin(c, i as u32);
                for j in i + 1..n {
                    acc.1[i * n + j] += w * si * spin(c, j as u32);
                }
            }
        },
    );
    let mut z = 0.0;
    let mut flat = vec![0.0; n * n];
    for (pz, pf) in parts {
        z += pz;
        for (f, p) in flat.iter_mut().zip(pf) {
            *f += p;
        }
    }
    let mut m = vec![vec![1.0; n]; n];
    for i in 0..n {
        for j in i + 1..n {
            m[i][j] = flat[i * n + j] / z;
            m[j][i] = m[i][j];
        }
    }
    Ok(m)
}

/// χ_{Λ_N}: the supremum over `x` of `Σ_y ⟨σ_x σ_y⟩` on the whole box.
pub fn susceptibility_finite_spin(lattice: &BoxGeometry, couplings: &Couplings) -> Result<f64> {
    let g = lattice.graph();
    let vertices: Vec<usize> = (0..g.n_vertices()).collect();
    let rows = two_point_row_sums(g, &g.all_edges(), &couplings.weights(g), &vertices)?;
    Ok(rows.into_iter().fold(f64::NEG_INFINITY, f64::max))
}
