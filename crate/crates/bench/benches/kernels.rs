use criterion::{black_box, criterion_group, criterion_main, Criterion};
use vpb_bench::{skewed_distribution, small_two_shock};
use vpb_core::collision::{discrete_maxwellian, relax_cell, CollisionModel, RelaxScratch};
use vpb_core::phase_space::raw_moments;
use vpb_core::ChiBasis;

fn projections(c: &mut Criterion) {
    let (grid, state, f) = skewed_distribution(24);
    c.bench_function("chi_basis_24", |b| b.iter(|| ChiBasis::new(black_box(&state), &grid)));
    let basis = ChiBasis::new(&state, &grid);
    c.bench_function("p1_24", |b| b.iter(|| basis.p1(black_box(&f), &grid)));
    let target = raw_moments(&f, &grid).unwrap();
    c.bench_function("discrete_maxwellian_24", |b| b.iter(|| discrete_maxwellian(black_box(&target), &grid).unwrap()));
}

fn collision(c: &mut Criterion) {
    let (grid, _, f) = skewed_distribution(24);
    let model = CollisionModel::bgk(1.0);
    let f2: Vec<f64> = f.iter().map(|x| 0.01 * x).collect();
    let mut scratch = RelaxScratch::default();
    c.bench_function("relax_cell_24", |b| {
        b.iter_batched(
            || (f.clone(), f2.clone()),
            |(mut a, mut b2)| relax_cell(&mut a, &mut b2, &grid, &model, 0.01, &mut scratch).unwrap(),
            criterion::BatchSize::SmallInput,
        )
    });
}

fn solver_step(c: &mut Criterion) {
    let (state, cfg) = small_two_shock(64, 12);
    let dt = state.next_dt(&cfg);
    let mut group = c.benchmark_group("solver");
    group.sample_size(20);
    group.bench_function("step_64x12", |b| {
        b.iter_batched(
            || state.clone(),
            |mut s| s.step(dt, &cfg).unwrap(),
            criterion::BatchSize::LargeInput,
        )
    });
    group.finish();
}

criterion_group!(benches, projections, collision, solver_step);
criterion_main!(benches);
