use std::f64::consts::PI;

use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};
use oamsort::field::{propagate_tree_field, rotate_field};
use oamsort::{build_tree, sample_lg, simulate_tree, BeamGeometry, ModeIndex, StageSpec};
use std::hint::black_box;

fn mode_space(c: &mut Criterion) {
    let mut group = c.benchmark_group("simulate_tree");
    for depth in [2u32, 4, 8] {
        let mut tree = build_tree(depth).unwrap();
        tree.set_stage(StageSpec::oam(0, 0).unwrap().with_arm_error(0.01))
            .unwrap();
        group.bench_with_input(BenchmarkId::from_parameter(depth), &tree, |b, tree| {
            b.iter(|| {
                for l in -16..16 {
                    black_box(simulate_tree(ModeIndex::oam(l), tree));
                }
            })
        });
    }
    group.finish();
}

fn grid(c: &mut Criterion) {
    let g = BeamGeometry::default();
    let f = sample_lg(ModeIndex::new(3, 1), &g).unwrap();
    c.bench_function("sample_lg 256", |b| {
        b.iter(|| sample_lg(black_box(ModeIndex::new(3, 1)), &g).unwrap())
    });
    c.bench_function("rotate_field quarter turn 256", |b| {
        b.iter(|| rotate_field(black_box(&f), PI / 2.0))
    });
    c.bench_function("rotate_field interpolated 256", |b| {
        b.iter(|| rotate_field(black_box(&f), PI / 4.0))
    });
    let tree = build_tree(2).unwrap();
    c.bench_function("field tree depth 2", |b| {
        b.iter(|| propagate_tree_field(f.clone(), black_box(&tree)).unwrap())
    });
}

criterion_group!(benches, mode_space, grid);
criterion_main!(benches);
