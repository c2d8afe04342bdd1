use criterion::{criterion_group, criterion_main, Criterion};
use dirseq_core::kronecker::{linear_schedule, net_growth_profile};
use dirseq_core::lattice::{decompose, monotone_sequence, strip_points};
use dirseq_core::rational::{int, rat};
use dirseq_core::{
    greedy_directional_sequence, make_bernoulli_shift, make_example_system, make_rotation_action,
    sequence_entropy_curve, Direction, LatticePoint, Strip,
};
use std::hint::black_box;

fn lattice(c: &mut Criterion) {
    let strip = Strip::planar(rat(13, 21), int(5)).unwrap();
    c.bench_function("strip_points 0..1000", |b| b.iter(|| strip_points(black_box(&strip), 0, 999).unwrap()));

    let (v, w) = (Direction::planar(int(0)), Direction::planar(int(1)));
    let width = int(9);
    c.bench_function("decompose grid 21x21", |b| {
        b.iter(|| {
            for m in -10..=10 {
                for n in -10..=10 {
                    black_box(decompose(&LatticePoint::planar(m, n), &v, &w, &width).unwrap());
                }
            }
        })
    });
}

fn entropy(c: &mut Criterion) {
    let ex = make_example_system();
    let alpha = ex.time_zero_partition().unwrap();
    let strip = Strip::planar(int(1), int(1)).unwrap();
    let seq = monotone_sequence(&strip, 64, 1, 1).unwrap();
    c.bench_function("curve example diagonal k=64", |b| {
        b.iter(|| sequence_entropy_curve(&ex, &alpha, black_box(&seq), 64).unwrap())
    });

    let rot = make_rotation_action(2, vec![rat(13, 21), rat(5, 8)]).unwrap();
    let arcs = rot.arc_partition(&[int(0), rat(1, 2)]).unwrap();
    c.bench_function("curve rotation diagonal k=64", |b| {
        b.iter(|| sequence_entropy_curve(&rot, &arcs, black_box(&seq), 64).unwrap())
    });

    let bern = make_bernoulli_shift(2, vec![rat(1, 2), rat(1, 2)]).unwrap();
    let alpha = bern.time_zero_partition().unwrap();
    c.bench_function("greedy bernoulli horizon 20", |b| {
        b.iter(|| greedy_directional_sequence(&bern, &alpha, black_box(&strip), 20, 8).unwrap())
    });
}

fn kronecker(c: &mut Criterion) {
    let rot = make_rotation_action(2, vec![rat(13, 21), rat(5, 8)]).unwrap();
    let set = rot.arcs(&[(int(0), rat(1, 2))]).unwrap();
    let strip = Strip::planar(int(1), int(1)).unwrap();
    let schedule = linear_schedule(8, 32);
    let mut group = c.benchmark_group("nets");
    group.sample_size(20);
    group.bench_function("rotation 8x32 eps 0.1", |b| {
        b.iter(|| net_growth_profile(&rot, &set, black_box(&strip), 0.1, &schedule).unwrap())
    });
    group.finish();
}

criterion_group!(benches, lattice, entropy, kronecker);
criterion_main!(benches);
