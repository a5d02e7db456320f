//! Layer-to-layer transfer matrices for boxes sliced along their last axis.
//!
//! A box is cut into layers of `W` spins (all sites sharing the last
//! coordinate). Intra-layer bonds enter a diagonal weight, inter-layer bonds
//! join equal positions of consecutive layers and factor into `W` two-state
//! butterflies, so one transfer costs `W · 2^W`. Forward and backward sweeps
//! carry both the plain weight and the weight times the partial
//! magnetisation, which yields every row sum `Σ_y ⟨σ_x σ_y⟩` at once.

use crate::caps;
use crate::error::{Error, Result};
use crate::lattice::BoxGeometry;
use crate::spin::EdgeWeights;

#[derive(Debug, Clone)]
pub struct TransferSystem {
    width: usize,
    /// Graph vertex at (layer, position).
    sites: Vec<Vec<usize>>,
    /// Intra-layer bonds per layer, as (position, position, J).
    intra: Vec<Vec<(usize, usize, f64)>>,
    /// Inter-layer couplings per gap, one per position.
    inter: Vec<Vec<f64>>,
}

impl TransferSystem {
    pub fn from_box(lattice: &BoxGeometry, weights: &EdgeWeights) -> Result<Self> {
        let graph = lattice.graph();
        if weights.len() != graph.n_edges() {
            return Err(Error::InvalidArgument("weights do not match the box".into()));
        }
        let dims = lattice.d() + lattice.s();
        let last = dims - 1;
        let coords0 = lattice.coords(0);
        let coords_end = lattice.coords(graph.n_vertices() - 1);
        let n_layers = (coords_end[last] - coords0[last] + 1) as usize;
        let width = graph.n_vertices() / n_layers;
        let cap = caps::active().max_layer;
        if width > cap {
            return Err(Error::CapExceeded {
                what: "transfer-matrix layer",
                size: width,
                cap,
            });
        }
        // last axis fastest: v = position * n_layers + layer
        let layer_of = |v: usize| v % n_layers;
        let pos_of = |v: usize| v / n_layers;
        let sites: Vec<Vec<usize>> = (0..n_layers)
            .map(|l| (0..width).map(|p| p * n_layers + l).collect())
            .collect();
        let mut intra = vec![Vec::new(); n_layers];
        let mut inter = vec![vec![0.0; width]; n_layers.saturating_sub(1)];
        for e in 0..graph.n_edges() {
            let [a, b] = graph.endpoints(e);
            let (la, lb) = (layer_of(a), layer_of(b));
            if la == lb {
                intra[la].push((pos_of(a), pos_of(b), weights.get(e)));
            } else {
                debug_assert_eq!(pos_of(a), pos_of(b));
                inter[la.min(lb)][pos_of(a)] += weights.get(e);
            }
        }
        Ok(TransferSystem { width, sites, intra, inter })
    }

    pub fn width(&self) -> usize {
        self.width
    }

    pub fn layers(&self) -> usize {
        self.sites.len()
    }

    fn diagonal(&self, layer: usize) -> Vec<f64> {
        let bonds = &self.intra[layer];
        let shift: f64 = bonds.iter().map(|b| b.2).sum();
        (0..1usize << self.width)
            .map(|s| {
                let mut e = -shift;
                for &(i, j, jj) in bonds {
                    if (s >> i ^ s >> j) & 1 == 0 {
                        e += 2.0 * jj;
                    }
                }
                e.exp()
            })
            .collect()
    }

    fn magnetisation(&self) -> Vec<f64> {
        (0..1usize << self.width)
            .map(|s| self.width as f64 - 2.0 * s.count_ones() as f64)
            .collect()
    }

    /// In place `v ← T v` for the gap with couplings `js` (scaled by `e^{-J}`).
    fn apply_transfer(&self, js: &[f64], v: &mut [f64]) {
        for (i, &j) in js.iter().enumerate() {
            let same = 1.0;
            let flip = (-2.0 * j).exp();
            let bit = 1usize << i;
            for s in 0..v.len() {
                if s & bit == 0 {
                    let (a, b) = (v[s], v[s | bit]);
                    v[s] = same * a + flip * b;
                    v[s | bit] = flip * a + same * b;
                }
            }
        }
    }

    /// `Σ_y ⟨σ_x σ_y⟩` for every vertex `x`, indexed by graph vertex.
    pub fn row_sums(&self) -> Vec<f64> {
        let n_layers = self.layers();
        let states = 1usize << self.width;
        let diag: Vec<Vec<f64>> = (0..n_layers).map(|l| self.diagonal(l)).collect();
        let mag = self.magnetisation();

        let rescale = |p: &mut [f64], q: &mut [f64]| {
            let m = p.iter().fold(0.0f64, |a, &b| a.max(b));
            if m > 0.0 {
                p.iter_mut().for_each(|x| *x /= m);
                q.iter_mut().for_each(|x| *x /= m);
            }
        };

        // forward: layers 0..=l, including layer l's diagonal
        let mut fwd = Vec::with_capacity(n_layers);
        let mut p: Vec<f64> = diag[0].clone();
        let mut q: Vec<f64> = p.iter().zip(&mag).map(|(a, m)| a * m).collect();
        rescale(&mut p, &mut q);
        fwd.push((p.clone(), q.clone()));
        for l in 1..n_layers {
            self.apply_transfer(&self.inter[l - 1], &mut p);
            self.apply_transfer(&self.inter[l - 1], &mut q);
            for s in 0..states {
                q[s] = diag[l][s] * (q[s] + mag[s] * p[s]);
                p[s] *= diag[l][s];
            }
            rescale(&mut p, &mut q);
            fwd.push((p.clone(), q.clone()));
        }

        // backward: layers l+1.., conditioned on the state of layer l
        let mut bwd = vec![(Vec::new(), Vec::new()); n_layers];
        let mut bp = vec![1.0; states];
        let mut bq = vec![0.0; states];
        bwd[n_layers - 1] = (bp.clone(), bq.clone());
        for l in (0..n_layers - 1).rev() {
            for s in 0..states {
                bq[s] = diag[l + 1][s] * (bq[s] + mag[s] * bp[s]);
                bp[s] *= diag[l + 1][s];
            }
            self.apply_transfer(&self.inter[l], &mut bp);
            self.apply_transfer(&self.inter[l], &mut bq);
            rescale(&mut bp, &mut bq);
            bwd[l] = (bp.clone(), bq.clone());
        }

        let n_vertices = n_layers * self.width;
        let mut rows = vec![0.0; n_vertices];
        for l in 0..n_layers {
            let (fp, fq) = &fwd[l];
            let (bp, bq) = &bwd[l];
            let z: f64 = (0..states).map(|s| fp[s] * bp[s]).sum();
            for p in 0..self.width {
                let num: f64 = (0..states)
                    .map(|s| {
                        let sign = if s >> p & 1 == 1 { -1.0 } else { 1.0 };
                        sign * (fq[s] * bp[s] + fp[s] * bq[s])
                    })
                    .sum();
                rows[self.sites[l][p]] = num / z;
            }
        }
        rows
    }

    /// `sup_x Σ_y ⟨σ_x σ_y⟩`.
    pub fn susceptibility(&self) -> f64 {
        self.row_sums().into_iter().fold(f64::NEG_INFINITY, f64::max)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::spin::{two_point_row_sums, Couplings};
    use approx::assert_relative_eq;

    fn compare_with_spin(lattice: &BoxGeometry, weights: &EdgeWeights) {
        let g = lattice.graph();
        let vertices: Vec<usize> = (0..g.n_vertices()).collect();
        let brute = two_point_row_sums(g, &g.all_edges(), weights, &vertices).unwrap();
        let tm = TransferSystem::from_box(lattice, weights).unwrap().row_sums();
        for (a, b) in tm.iter().zip(&brute) {
            assert_relative_eq!(a, b, max_relative = 1e-12);
        }
    }

    #[test]
    fn matches_spin_oracle_on_small_boxes() {
        let b = BoxGeometry::new(1, 1, 1).unwrap();
        compare_with_spin(&b, &Couplings::new(0.3, 0.1).unwrap().weights(b.graph()));
        let r = BoxGeometry::rectangular(2, 0, &[3, 5]).unwrap();
        let w = EdgeWeights((0..r.n_edges()).map(|i| 0.1 + 0.05 * i as f64).collect());
        compare_with_spin(&r, &w);
        let c = BoxGeometry::rectangular(1, 2, &[2, 3, 3]).unwrap();
        compare_with_spin(&c, &Couplings::new(0.45, 0.25).unwrap().weights(c.graph()));
        let chain = BoxGeometry::new(1, 0, 5).unwrap();
        compare_with_spin(&chain, &EdgeWeights::uniform(chain.graph(), 0.8));
    }

    #[test]
    fn single_layer() {
        let b = BoxGeometry::rectangular(2, 0, &[3, 1]).unwrap();
        compare_with_spin(&b, &EdgeWeights::uniform(b.graph(), 0.5));
    }

    #[test]
    fn strong_coupling_does_not_overflow() {
        let b = BoxGeometry::rectangular(2, 0, &[4, 60]).unwrap();
        let chi = TransferSystem::from_box(&b, &EdgeWeights::uniform(b.graph(), 3.0))
            .unwrap()
            .susceptibility();
        assert!(chi.is_finite());
        assert!(chi <= 240.0 + 1e-9 && chi > 200.0);
    }

    #[test]
    fn layer_cap() {
        let b = BoxGeometry::rectangular(2, 0, &[17, 2]).unwrap();
        let r = TransferSystem::from_box(&b, &EdgeWeights::uniform(b.graph(), 0.1));
        assert!(matches!(r, Err(Error::CapExceeded { .. })));
    }
}
