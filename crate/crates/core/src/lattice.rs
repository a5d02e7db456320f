//! Finite boxes of Z^(d+s), their edge sets, slabs, and the step order.
//!
//! A vertex is written `(u, t)` with `u` the `d` planar coordinates and `t`
//! the `s` vertical coordinates. Vertices are indexed lexicographically on
//! `(u, t)` (last coordinate fastest) and edges in the order they are met
//! when scanning vertices by index and axes in increasing order, so every
//! subset of vertices or edges is a dense bit vector.

use crate::caps::Caps;
use crate::edgeset::EdgeSet;
use crate::error::{Error, Result};
use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum EdgeClass {
    Planar,
    Vertical,
}

#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct Vertex {
    pub u: Vec<i32>,
    pub t: Vec<i32>,
}

impl Vertex {
    pub fn coords(&self) -> Vec<i32> {
        self.u.iter().chain(self.t.iter()).copied().collect()
    }
}

/// A unit lattice direction `±e_axis`. Axes `0..d` are planar, `d..d+s` vertical.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct Direction {
    pub axis: usize,
    pub positive: bool,
}

/// Total order on the unit directions, identical at every vertex:
/// `+e_1, -e_1, ..., +e_d, -e_d, +f_1, -f_1, ..., +f_s, -f_s`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct StepOrder {
    dims: usize,
}

impl StepOrder {
    pub fn canonical(d: usize, s: usize) -> Self {
        StepOrder { dims: d + s }
    }

    pub fn rank(&self, dir: Direction) -> u32 {
        debug_assert!(dir.axis < self.dims);
        2 * dir.axis as u32 + u32::from(!dir.positive)
    }

    pub fn directions(&self) -> Vec<Direction> {
        (0..self.dims)
            .flat_map(|axis| {
                [true, false]
                    .into_iter()
                    .map(move |positive| Direction { axis, positive })
            })
            .collect()
    }
}

/// One outgoing step at a vertex, as stored in the ordered step lists.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct Step {
    pub from: usize,
    pub to: usize,
    pub edge: usize,
    pub rank: u32,
}

/// Undirected multigraph with, at every vertex, a strict total order on the
/// outgoing steps. All enumeration modules work on this type.
#[derive(Debug, Clone, PartialEq)]
pub struct Graph {
    n_vertices: usize,
    endpoints: Vec<[usize; 2]>,
    classes: Vec<EdgeClass>,
    steps: Vec<Vec<Step>>,
}

impl Graph {
    /// Builds a graph whose step order at each vertex follows edge index.
    pub fn from_edges(n_vertices: usize, edges: &[(usize, usize)]) -> Result<Self> {
        let classed: Vec<_> = edges
            .iter()
            .map(|&(a, b)| (a, b, EdgeClass::Planar))
            .collect();
        Graph::from_classed_edges(n_vertices, &classed)
    }

    pub fn from_classed_edges(
        n_vertices: usize,
        edges: &[(usize, usize, EdgeClass)],
    ) -> Result<Self> {
        let mut seen = vec![0u32; n_vertices];
        let mut ranked = Vec::with_capacity(edges.len());
        for &(a, b, class) in edges {
            if a >= n_vertices || b >= n_vertices {
                return Err(Error::InvalidArgument(format!(
                    "edge ({a}, {b}) has an endpoint outside 0..{n_vertices}"
                )));
            }
            let ra = seen[a];
            seen[a] += 1;
            let rb = seen[b];
            seen[b] += 1;
            ranked.push((a, b, class, ra, rb));
        }
        Graph::from_ranked(n_vertices, &ranked)
    }

    /// `edges[i] = (a, b, class, rank of step a->b, rank of step b->a)`.
    fn from_ranked(n_vertices: usize, edges: &[(usize, usize, EdgeClass, u32, u32)]) -> Result<Self> {
        let mut steps = vec![Vec::new(); n_vertices];
        let mut endpoints = Vec::with_capacity(edges.len());
        let mut classes = Vec::with_capacity(edges.len());
        for (e, &(a, b, class, ra, rb)) in edges.iter().enumerate() {
            if a == b {
                return Err(Error::InvalidArgument(format!("self-loop at vertex {a}")));
            }
            endpoints.push([a, b]);
            classes.push(class);
            steps[a].push(Step { from: a, to: b, edge: e, rank: ra });
            steps[b].push(Step { from: b, to: a, edge: e, rank: rb });
        }
        for list in steps.iter_mut() {
            list.sort_by_key(|s| s.rank);
            if list.windows(2).any(|w| w[0].rank == w[1].rank) {
                return Err(Error::InvalidArgument(
                    "step order is not strict at some vertex".into(),
                ));
            }
        }
        Ok(Graph {
            n_vertices,
            endpoints,
            classes,
            steps,
        })
    }

    #[inline]
    pub fn n_vertices(&self) -> usize {
        self.n_vertices
    }

    #[inline]
    pub fn n_edges(&self) -> usize {
        self.endpoints.len()
    }

    #[inline]
    pub fn endpoints(&self, edge: usize) -> [usize; 2] {
        self.endpoints[edge]
    }

    #[inline]
    pub fn class(&self, edge: usize) -> EdgeClass {
        self.classes[edge]
    }

    pub fn classes(&self) -> &[EdgeClass] {
        &self.classes
    }

    /// Outgoing steps at `v`, sorted by the step order.
    #[inline]
    pub fn steps(&self, v: usize) -> &[Step] {
        &self.steps[v]
    }

    pub fn all_edges(&self) -> EdgeSet {
        EdgeSet::full(self.n_edges())
    }

    pub fn edges_of_class(&self, class: EdgeClass) -> EdgeSet {
        EdgeSet::from_indices(
            self.n_edges(),
            (0..self.n_edges()).filter(|&e| self.classes[e] == class),
        )
    }

    /// The ⪯-minimal step from `from` to `to`, if they are adjacent.
    pub fn step(&self, from: usize, to: usize) -> Option<Step> {
        self.steps.get(from)?.iter().find(|s| s.to == to).copied()
    }

    /// The step along `edge` leaving `from`.
    pub fn step_along(&self, from: usize, edge: usize) -> Option<Step> {
        self.steps.get(from)?.iter().find(|s| s.edge == edge).copied()
    }

    /// Γ of a step restricted to `within`: the edges at `step.from` whose
    /// step precedes or equals `step`. Always contains the step's own edge
    /// when that edge is in `within`.
    pub fn cancelled_set(&self, step: Step, within: &EdgeSet) -> EdgeSet {
        let mut out = EdgeSet::empty(self.n_edges());
        self.cancel_into(step, within, &mut out);
        out
    }

    /// Adds Γ of `step` (restricted to `within`) to `acc`.
    #[inline]
    pub fn cancel_into(&self, step: Step, within: &EdgeSet, acc: &mut EdgeSet) {
        for s in &self.steps[step.from] {
            if s.rank > step.rank {
                break;
            }
            if within.contains(s.edge) {
                acc.insert(s.edge);
            }
        }
    }

    /// Degree of every vertex in the subgraph `edges`.
    pub fn degrees(&self, edges: &EdgeSet) -> Vec<usize> {
        let mut deg = vec![0; self.n_vertices];
        for e in edges.iter() {
            let [a, b] = self.endpoints[e];
            deg[a] += 1;
            deg[b] += 1;
        }
        deg
    }

    /// Vertices of odd degree in the subgraph `edges`, in increasing order.
    pub fn boundary(&self, edges: &EdgeSet) -> Vec<usize> {
        self.degrees(edges)
            .into_iter()
            .enumerate()
            .filter(|(_, d)| d % 2 == 1)
            .map(|(v, _)| v)
            .collect()
    }

    /// Component label of every vertex in the subgraph `edges`.
    pub fn components(&self, edges: &EdgeSet) -> Vec<usize> {
        let mut label = vec![usize::MAX; self.n_vertices];
        let mut next = 0;
        let mut stack = Vec::new();
        for root in 0..self.n_vertices {
            if label[root] != usize::MAX {
                continue;
            }
            label[root] = next;
            stack.push(root);
            while let Some(v) = stack.pop() {
                for s in &self.steps[v] {
                    if edges.contains(s.edge) && label[s.to] == usize::MAX {
                        label[s.to] = next;
                        stack.push(s.to);
                    }
                }
            }
            next += 1;
        }
        label
    }

    /// |E| - |V| + (number of components) of the subgraph `edges`.
    pub fn cyclomatic(&self, edges: &EdgeSet) -> usize {
        let labels = self.components(edges);
        let comps = labels.iter().max().map_or(0, |m| m + 1);
        edges.len() + comps - self.n_vertices
    }

    /// Edges of `edges` with both endpoints in `vertices`.
    pub fn induced(&self, edges: &EdgeSet, vertices: &[usize]) -> EdgeSet {
        let mut inside = vec![false; self.n_vertices];
        for &v in vertices {
            inside[v] = true;
        }
        EdgeSet::from_indices(
            self.n_edges(),
            edges.iter().filter(|&e| {
                let [a, b] = self.endpoints[e];
                inside[a] && inside[b]
            }),
        )
    }
}

/// A free-boundary box of Z^(d+s). Cubic boxes `[-N, N]^(d+s)` come from
/// [`BoxGeometry::new`]; rectangular grids `[0, L_i)` from
/// [`BoxGeometry::rectangular`].
#[derive(Debug, Clone, PartialEq)]
pub struct BoxGeometry {
    d: usize,
    s: usize,
    half_side: Option<usize>,
    lo: Vec<i32>,
    hi: Vec<i32>,
    strides: Vec<usize>,
    graph: Graph,
}

impl BoxGeometry {
    /// Λ_N: side length `2N + 1`, centred at the origin.
    pub fn new(d: usize, s: usize, n: usize) -> Result<Self> {
        let n_i = i32::try_from(n).map_err(|_| Error::InvalidArgument(format!("N = {n} too large")))?;
        let dims = d + s;
        let mut b = BoxGeometry::build(d, s, vec![-n_i; dims], vec![n_i; dims])?;
        b.half_side = Some(n);
        Ok(b)
    }

    /// Rectangular grid with `sides[i]` sites along axis `i`, coordinates `0..sides[i]`.
    pub fn rectangular(d: usize, s: usize, sides: &[usize]) -> Result<Self> {
        if sides.len() != d + s {
            return Err(Error::InvalidArgument(format!(
                "expected {} side lengths, got {}",
                d + s,
                sides.len()
            )));
        }
        if sides.iter().any(|&l| l == 0) {
            return Err(Error::InvalidArgument("side lengths must be positive".into()));
        }
        let hi = sides.iter().map(|&l| l as i32 - 1).collect();
        BoxGeometry::build(d, s, vec![0; d + s], hi)
    }

    fn build(d: usize, s: usize, lo: Vec<i32>, hi: Vec<i32>) -> Result<Self> {
        let dims = d + s;
        if dims == 0 {
            return Err(Error::ZeroDimension);
        }
        let sides: Vec<usize> = lo.iter().zip(&hi).map(|(l, h)| (h - l + 1) as usize).collect();
        let mut strides = vec![1usize; dims];
        for k in (0..dims.saturating_sub(1)).rev() {
            strides[k] = strides[k + 1]
                .checked_mul(sides[k + 1])
                .ok_or_else(|| Error::InvalidArgument("box too large".into()))?;
        }
        let n_vertices = strides[0]
            .checked_mul(sides[0])
            .ok_or_else(|| Error::InvalidArgument("box too large".into()))?;
        let order = StepOrder::canonical(d, s);
        let mut edges = Vec::new();
        let mut coord = lo.clone();
        for v in 0..n_vertices {
            for axis in 0..dims {
                if coord[axis] < hi[axis] {
                    let w = v + strides[axis];
                    let class = if axis < d { EdgeClass::Planar } else { EdgeClass::Vertical };
                    let up = order.rank(Direction { axis, positive: true });
                    let down = order.rank(Direction { axis, positive: false });
                    edges.push((v, w, class, up, down));
                }
            }
            // advance the odometer, last axis fastest
            for axis in (0..dims).rev() {
                if coord[axis] < hi[axis] {
                    coord[axis] += 1;
                    break;
                }
                coord[axis] = lo[axis];
            }
        }
        let graph = Graph::from_ranked(n_vertices, &edges)?;
        Ok(BoxGeometry {
            d,
            s,
            half_side: None,
            lo,
            hi,
            strides,
            graph,
        })
    }

    pub fn d(&self) -> usize {
        self.d
    }

    pub fn s(&self) -> usize {
        self.s
    }

    /// `N` for cubic boxes built with [`BoxGeometry::new`].
    pub fn half_side(&self) -> Option<usize> {
        self.half_side
    }

    pub fn graph(&self) -> &Graph {
        &self.graph
    }

    pub fn n_vertices(&self) -> usize {
        self.graph.n_vertices()
    }

    pub fn n_edges(&self) -> usize {
        self.graph.n_edges()
    }

    pub fn step_order(&self) -> StepOrder {
        StepOrder::canonical(self.d, self.s)
    }

    pub fn coords(&self, v: usize) -> Vec<i32> {
        let mut rem = v;
        self.strides
            .iter()
            .zip(&self.lo)
            .map(|(&st, &l)| {
                let q = rem / st;
                rem %= st;
                l + q as i32
            })
            .collect()
    }

    pub fn vertex(&self, v: usize) -> Vertex {
        let c = self.coords(v);
        Vertex {
            u: c[..self.d].to_vec(),
            t: c[self.d..].to_vec(),
        }
    }

    /// Vertical coordinate `t` of vertex `v`.
    pub fn vertical(&self, v: usize) -> Vec<i32> {
        self.coords(v)[self.d..].to_vec()
    }

    pub fn index_of(&self, coords: &[i32]) -> Option<usize> {
        if coords.len() != self.d + self.s {
            return None;
        }
        let mut idx = 0;
        for (k, &c) in coords.iter().enumerate() {
            if c < self.lo[k] || c > self.hi[k] {
                return None;
            }
            idx += (c - self.lo[k]) as usize * self.strides[k];
        }
        Some(idx)
    }

    pub fn index_of_vertex(&self, x: &Vertex) -> Option<usize> {
        self.index_of(&x.coords())
    }

    /// Λ^w and its planar edge set E^w.
    pub fn slab_of(&self, w: &[i32]) -> Result<Slab> {
        if w.len() != self.s {
            return Err(Error::InvalidArgument(format!(
                "vertical coordinate has {} entries, expected {}",
                w.len(),
                self.s
            )));
        }
        let in_range = w
            .iter()
            .enumerate()
            .all(|(j, &c)| c >= self.lo[self.d + j] && c <= self.hi[self.d + j]);
        if !in_range {
            return Err(Error::OutOfRange { coord: w.to_vec() });
        }
        let vertices: Vec<usize> = (0..self.n_vertices())
            .filter(|&v| self.coords(v)[self.d..] == *w)
            .collect();
        let planar = self.graph.edges_of_class(EdgeClass::Planar);
        let edges = self.graph.induced(&planar, &vertices);
        Ok(Slab {
            w: w.to_vec(),
            vertices,
            edges,
        })
    }

    /// All vertical coordinates `w` of the box, in lexicographic order.
    pub fn vertical_coords(&self) -> Vec<Vec<i32>> {
        let mut out = vec![Vec::new()];
        for j in 0..self.s {
            let axis = self.d + j;
            out = out
                .into_iter()
                .flat_map(|prefix| {
                    (self.lo[axis]..=self.hi[axis]).map(move |c| {
                        let mut p = prefix.clone();
                        p.push(c);
                        p
                    })
                })
                .collect();
        }
        out
    }

    /// The slab through the origin of the vertical coordinates (or through
    /// the lowest corner for rectangular boxes).
    pub fn central_slab(&self) -> Result<Slab> {
        let w: Vec<i32> = (0..self.s)
            .map(|j| {
                let axis = self.d + j;
                if self.lo[axis] <= 0 && self.hi[axis] >= 0 { 0 } else { self.lo[axis] }
            })
            .collect();
        self.slab_of(&w)
    }

    /// Whether the box is too large for the exact modules under `caps`.
    /// Building is still allowed; the exact operations enforce their own caps.
    pub fn exceeds_caps(&self, caps: &Caps) -> bool {
        let all = self.graph.all_edges();
        self.n_vertices() > caps.max_spins || self.graph.cyclomatic(&all) > caps.max_cyclomatic
    }
}

/// Λ^w: the vertices with vertical coordinate `w`, and the planar edges among them.
#[derive(Debug, Clone, PartialEq)]
pub struct Slab {
    pub w: Vec<i32>,
    pub vertices: Vec<usize>,
    pub edges: EdgeSet,
}
