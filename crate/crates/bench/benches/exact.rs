use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};
use std::hint::black_box;

use crossover_core::currents::even_tanh_sum;
use crossover_core::spin::two_point_row_sums;
use crossover_core::susceptibility::chi_2d_strip;
use crossover_core::{BoxGeometry, EdgeWeights};

fn even_subgraphs(c: &mut Criterion) {
    let mut group = c.benchmark_group("even_tanh_sum");
    for side in [3usize, 4] {
        let lattice = BoxGeometry::rectangular(2, 0, &[side, side + 1]).unwrap();
        let g = lattice.graph();
        let w = EdgeWeights::uniform(g, 0.4);
        let all = g.all_edges();
        group.bench_with_input(BenchmarkId::from_parameter(format!("{side}x{}", side + 1)), &all, |b, e| {
            b.iter(|| even_tanh_sum(g, black_box(e), &w).unwrap())
        });
    }
    group.finish();
}

fn spin_oracle(c: &mut Criterion) {
    let lattice = BoxGeometry::rectangular(2, 0, &[4, 4]).unwrap();
    let g = lattice.graph();
    let w = EdgeWeights::uniform(g, 0.4);
    let vertices: Vec<usize> = (0..g.n_vertices()).collect();
    c.bench_function("spin_row_sums_4x4", |b| {
        b.iter(|| two_point_row_sums(g, &g.all_edges(), &w, black_box(&vertices)).unwrap())
    });
}

fn strips(c: &mut Criterion) {
    let mut group = c.benchmark_group("strip_transfer");
    group.sample_size(20);
    for width in [4usize, 8] {
        group.bench_with_input(BenchmarkId::from_parameter(width), &width, |b, &w| {
            b.iter(|| chi_2d_strip(w, 64, black_box(0.4)).unwrap())
        });
    }
    group.finish();
}

criterion_group!(benches, even_subgraphs, spin_oracle, strips);
criterion_main!(benches);
