//! Random currents reduced to parity classes.
//!
//! Summing `W(η) = Π_b J_b^{η_b} / η_b!` over all integer currents with a
//! prescribed odd set `Γ` gives `Π_{b∈Γ} sinh J_b Π_{b∉Γ} cosh J_b`, so the
//! sourceless and two-source current sums become finite sums over even
//! subgraphs and over `{x, y}`-sourced subgraphs. Both families are cosets
//! of the cycle space: even subgraphs are its elements, sourced subgraphs
//! are one reference `x`–`y` path xor its elements.
//!
//! Internally every sum is `Π_b cosh J_b` times a sum of `tanh` products;
//! the `cosh` prefactor is carried as a logarithm and cancels in ratios.

use crate::backbone::ConsistentPath;
use crate::caps;
use crate::edgeset::EdgeSet;
use crate::error::{Error, Result};
use crate::lattice::Graph;
use crate::spin::EdgeWeights;
use rayon::prelude::*;

/// Basis of the cycle space of a subgraph, built from a BFS spanning forest.
#[derive(Debug, Clone)]
pub struct CycleSpace {
    width: usize,
    basis: Vec<EdgeSet>,
    parent: Vec<Option<(usize, usize)>>,
    depth: Vec<usize>,
    component: Vec<usize>,
}

impl CycleSpace {
    pub fn new(graph: &Graph, edges: &EdgeSet) -> Self {
        let n = graph.n_vertices();
        let width = graph.n_edges();
        let mut parent = vec![None; n];
        let mut depth = vec![0; n];
        let mut component = vec![usize::MAX; n];
        let mut tree = EdgeSet::empty(width);
        let mut queue = std::collections::VecDeque::new();
        let mut comp = 0;
        for root in 0..n {
            if component[root] != usize::MAX {
                continue;
            }
            component[root] = comp;
            queue.push_back(root);
            while let Some(v) = queue.pop_front() {
                for s in graph.steps(v) {
                    if edges.contains(s.edge) && component[s.to] == usize::MAX {
                        component[s.to] = comp;
                        parent[s.to] = Some((v, s.edge));
                        depth[s.to] = depth[v] + 1;
                        tree.insert(s.edge);
                        queue.push_back(s.to);
                    }
                }
            }
            comp += 1;
        }
        let mut space = CycleSpace {
            width,
            basis: Vec::new(),
            parent,
            depth,
            component,
        };
        for e in edges.iter() {
            if tree.contains(e) {
                continue;
            }
            let [a, b] = graph.endpoints(e);
            let mut cycle = space.tree_path(a, b).expect("endpoints of an edge share a component");
            cycle.toggle(e);
            space.basis.push(cycle);
        }
        space
    }

    pub fn dimension(&self) -> usize {
        self.basis.len()
    }

    pub fn basis(&self) -> &[EdgeSet] {
        &self.basis
    }

    pub fn connected(&self, x: usize, y: usize) -> bool {
        self.component[x] == self.component[y]
    }

    /// Edges of the spanning-forest path between `x` and `y`.
    pub fn tree_path(&self, x: usize, y: usize) -> Option<EdgeSet> {
        if !self.connected(x, y) {
            return None;
        }
        let mut out = EdgeSet::empty(self.width);
        let (mut a, mut b) = (x, y);
        while a != b {
            if self.depth[a] >= self.depth[b] {
                let (p, e) = self.parent[a].expect("non-root has a parent");
                out.toggle(e);
                a = p;
            } else {
                let (p, e) = self.parent[b].expect("non-root has a parent");
                out.toggle(e);
                b = p;
            }
        }
        Some(out)
    }

    fn check_cap(&self) -> Result<()> {
        let cap = caps::active().max_cyclomatic;
        if self.dimension() > cap {
            return Err(Error::CapExceeded {
                what: "cycle space",
                size: self.dimension(),
                cap,
            });
        }
        Ok(())
    }

    /// Visits `offset ⊕ C` for every element `C` of the cycle space, in Gray-code order.
    pub fn for_each_coset_element<F: FnMut(&EdgeSet)>(&self, offset: &EdgeSet, mut f: F) -> Result<()> {
        self.check_cap()?;
        let mut cur = offset.clone();
        f(&cur);
        for i in 1u64..(1u64 << self.dimension()) {
            cur.xor_with(&self.basis[i.trailing_zeros() as usize]);
            f(&cur);
        }
        Ok(())
    }

    /// `Σ_C Π_{b ∈ offset ⊕ C} tanh_b`, summed in fixed chunks so the result
    /// is independent of the thread count.
    fn coset_tanh_sum(&self, offset: &EdgeSet, tanh: &[f64]) -> Result<f64> {
        self.check_cap()?;
        const LOW_BITS: usize = 12;
        let k = self.dimension();
        let low = k.min(LOW_BITS);
        let high = k - low;
        let chunk = |h: u64| {
            let mut cur = offset.clone();
            for j in 0..high {
                if h >> j & 1 == 1 {
                    cur.xor_with(&self.basis[low + j]);
                }
            }
            let mut sum = tanh_product(&cur, tanh);
            for i in 1u64..(1u64 << low) {
                cur.xor_with(&self.basis[i.trailing_zeros() as usize]);
                sum += tanh_product(&cur, tanh);
            }
            sum
        };
        let parts: Vec<f64> = if high == 0 {
            vec![chunk(0)]
        } else {
            (0..1u64 << high).into_par_iter().map(chunk).collect()
        };
        Ok(parts.into_iter().sum())
    }
}

#[inline]
fn tanh_product(set: &EdgeSet, tanh: &[f64]) -> f64 {
    set.iter().map(|e| tanh[e]).product()
}

fn tanh_table(weights: &EdgeWeights) -> Vec<f64> {
    weights.0.iter().map(|j| j.tanh()).collect()
}

fn log_cosh_sum(edges: &EdgeSet, weights: &EdgeWeights) -> f64 {
    edges.iter().map(|e| weights.get(e).cosh().ln()).sum()
}

fn check_inputs(graph: &Graph, edges: &EdgeSet, weights: &EdgeWeights) -> Result<()> {
    if edges.width() != graph.n_edges() || weights.len() != graph.n_edges() {
        return Err(Error::InvalidArgument(
            "edge set or weights do not match the graph".into(),
        ));
    }
    Ok(())
}

/// `Σ_{even Γ ⊆ edges} Π_{b∈Γ} tanh J_b`: the partition function with the
/// `cosh` prefactor divided out.
pub fn even_tanh_sum(graph: &Graph, edges: &EdgeSet, weights: &EdgeWeights) -> Result<f64> {
    check_inputs(graph, edges, weights)?;
    let space = CycleSpace::new(graph, edges);
    space.coset_tanh_sum(&EdgeSet::empty(graph.n_edges()), &tanh_table(weights))
}

/// `Z = Σ_{∂η=∅} W(η) = Σ_{even Γ} Π_{b∈Γ} sinh J_b Π_{b∉Γ} cosh J_b`.
pub fn partition_currents(graph: &Graph, edges: &EdgeSet, weights: &EdgeWeights) -> Result<f64> {
    let s = even_tanh_sum(graph, edges, weights)?;
    Ok(s * log_cosh_sum(edges, weights).exp())
}

fn sourced_tanh_sum(graph: &Graph, edges: &EdgeSet, weights: &EdgeWeights, x: usize, y: usize) -> Result<f64> {
    check_inputs(graph, edges, weights)?;
    if x >= graph.n_vertices() || y >= graph.n_vertices() {
        return Err(Error::InvalidArgument(format!("vertex out of range: {x}, {y}")));
    }
    if x == y {
        return Err(Error::Precondition("sourced sums need two distinct sources".into()));
    }
    let space = CycleSpace::new(graph, edges);
    match space.tree_path(x, y) {
        None => Ok(0.0),
        Some(path) => space.coset_tanh_sum(&path, &tanh_table(weights)),
    }
}

/// `Σ_{∂η={x,y}} W(η)`; zero when `x` and `y` are not connected in `edges`.
pub fn sourced_sum(graph: &Graph, edges: &EdgeSet, weights: &EdgeWeights, x: usize, y: usize) -> Result<f64> {
    let s = sourced_tanh_sum(graph, edges, weights, x, y)?;
    Ok(s * log_cosh_sum(edges, weights).exp())
}

/// `⟨σ_x σ_y⟩` on the subgraph `edges` as the ratio of sourced to sourceless sums.
pub fn two_point_currents(graph: &Graph, edges: &EdgeSet, weights: &EdgeWeights, x: usize, y: usize) -> Result<f64> {
    if x == y {
        return Ok(1.0);
    }
    let num = sourced_tanh_sum(graph, edges, weights, x, y)?;
    if num == 0.0 {
        return Ok(0.0);
    }
    Ok(num / even_tanh_sum(graph, edges, weights)?)
}

/// All two-point functions among `vertices` on the subgraph `edges`, sharing
/// one cycle-space basis. Pairs are evaluated in parallel.
pub fn two_point_matrix_currents(
    graph: &Graph,
    edges: &EdgeSet,
    weights: &EdgeWeights,
    vertices: &[usize],
) -> Result<Vec<Vec<f64>>> {
    check_inputs(graph, edges, weights)?;
    if vertices.iter().any(|&v| v >= graph.n_vertices()) {
        return Err(Error::InvalidArgument("vertex out of range".into()));
    }
    let space = CycleSpace::new(graph, edges);
    let tanh = tanh_table(weights);
    let z = space.coset_tanh_sum(&EdgeSet::empty(graph.n_edges()), &tanh)?;
    let n = vertices.len();
    let pairs: Vec<(usize, usize)> = (0..n).flat_map(|i| (i + 1..n).map(move |j| (i, j))).collect();
    let values: Vec<Result<f64>> = pairs
        .par_iter()
        .map(|&(i, j)| match space.tree_path(vertices[i], vertices[j]) {
            None => Ok(0.0),
            Some(path) if vertices[i] != vertices[j] => Ok(space.coset_tanh_sum(&path, &tanh)? / z),
            Some(_) => Ok(1.0),
        })
        .collect();
    let mut m = vec![vec![1.0; n]; n];
    for (&(i, j), v) in pairs.iter().zip(values) {
        let v = v?;
        m[i][j] = v;
        m[j][i] = v;
    }
    Ok(m)
}

/// Sourceless current sum restricted to currents even on `even_on`,
/// divided by the unrestricted sum. Equals `S(edges ∖ even_on) / S(edges)`
/// where `S` is [`even_tanh_sum`].
pub fn constrained_sourceless_ratio(
    graph: &Graph,
    edges: &EdgeSet,
    weights: &EdgeWeights,
    even_on: &EdgeSet,
) -> Result<f64> {
    if !even_on.is_subset(edges) {
        return Err(Error::Precondition("constrained edges must lie in the edge set".into()));
    }
    let rest = edges.difference(even_on);
    Ok(even_tanh_sum(graph, &rest, weights)? / even_tanh_sum(graph, edges, weights)?)
}

/// A current configuration up to parity: the edges carrying odd current.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ParityConfig {
    pub odd: EdgeSet,
    pub universe: EdgeSet,
}

impl ParityConfig {
    pub fn new(odd: EdgeSet, universe: EdgeSet) -> Result<Self> {
        if !odd.is_subset(&universe) {
            return Err(Error::Precondition("odd edges must lie in the universe".into()));
        }
        Ok(ParityConfig { odd, universe })
    }

    /// ∂η: vertices of odd degree in the odd subgraph.
    pub fn sources(&self, graph: &Graph) -> Vec<usize> {
        graph.boundary(&self.odd)
    }

    /// Total current weight of the class: `Π_{odd} sinh Π_{even} cosh`.
    pub fn weight(&self, weights: &EdgeWeights) -> f64 {
        self.universe
            .iter()
            .map(|e| {
                let j = weights.get(e);
                if self.odd.contains(e) { j.sinh() } else { j.cosh() }
            })
            .product()
    }
}

/// Visits every parity class with sources exactly `{x, y}` on `edges`.
pub fn for_each_sourced_class<F: FnMut(&EdgeSet)>(
    graph: &Graph,
    edges: &EdgeSet,
    x: usize,
    y: usize,
    f: F,
) -> Result<()> {
    let space = CycleSpace::new(graph, edges);
    match space.tree_path(x, y) {
        Some(path) if x != y => space.for_each_coset_element(&path, f),
        _ => Ok(()),
    }
}

/// Visits every even subgraph of `edges`.
pub fn for_each_even_subgraph<F: FnMut(&EdgeSet)>(graph: &Graph, edges: &EdgeSet, f: F) -> Result<()> {
    let space = CycleSpace::new(graph, edges);
    space.for_each_coset_element(&EdgeSet::empty(graph.n_edges()), f)
}

/// Ω(η): starting at `x`, repeatedly take the ⪯-minimal step along an odd
/// edge not yet traversed, stopping on the first arrival at `y`.
///
/// Every odd edge at a visited vertex belongs to the odd component joining
/// `x` and `y`, so restricting to odd edges is the same as restricting to
/// that component.
pub fn backbone_map(graph: &Graph, config: &ParityConfig, x: usize, y: usize) -> Result<ConsistentPath> {
    let mut sources = config.sources(graph);
    sources.sort_unstable();
    let mut expected = vec![x, y];
    expected.sort_unstable();
    if x == y || sources != expected {
        return Err(Error::Precondition(format!(
            "backbone needs sources exactly {{{x}, {y}}}, found {sources:?}"
        )));
    }
    let mut remaining = config.odd.clone();
    let mut steps = Vec::new();
    let mut v = x;
    while v != y {
        let next = graph
            .steps(v)
            .iter()
            .find(|s| remaining.contains(s.edge))
            .copied()
            .ok_or_else(|| Error::Precondition(format!("backbone walk stuck at vertex {v}")))?;
        remaining.remove(next.edge);
        steps.push(next);
        v = next.to;
    }
    ConsistentPath::from_steps(graph, &config.universe, x, steps)
}
