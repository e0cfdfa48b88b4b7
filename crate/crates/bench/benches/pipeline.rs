use std::hint::black_box;

use criterion::{criterion_group, criterion_main, Criterion};

use interlace_bench::{benchmark_controller, benchmark_setup, N, T_FAST};
use interlace_core::*;

fn bench_decompose(c: &mut Criterion) {
    let ctrl = benchmark_controller();
    c.bench_function("decompose_sixth_order", |b| {
        b.iter(|| decompose(black_box(&ctrl), 0.85).unwrap())
    });
}

fn bench_rate_conversion(c: &mut Criterion) {
    let (blocks, _, _) = benchmark_setup();
    c.bench_function("to_slow_block_x3", |b| {
        b.iter(|| {
            for blk in &blocks.slow_blocks {
                black_box(to_slow_block(black_box(blk), N).unwrap());
            }
        })
    });
}

fn bench_lifting(c: &mut Criterion) {
    let (blocks, sched, plant) = benchmark_setup();
    c.bench_function("compose_and_close_loop", |b| {
        b.iter(|| {
            let k = compose_open_loop(black_box(&blocks), &sched).unwrap();
            let g = lift_dual_rate(&plant, N, N).unwrap();
            black_box(close_loop(&k, &g).unwrap())
        })
    });
}

fn bench_frequency_response(c: &mut Criterion) {
    let (blocks, sched, plant) = benchmark_setup();
    let k = compose_open_loop(&blocks, &sched).unwrap();
    let g = lift_dual_rate(&plant, N, N).unwrap();
    let open = series(&k, &g).unwrap();
    c.bench_function("dual_rate_response_point", |b| {
        b.iter(|| black_box(dual_rate_response(&open, black_box(1.3))).unwrap())
    });
    let grid = log_grid(1.0e-3, std::f64::consts::PI / T_FAST * 0.999, 400);
    c.bench_function("bode_sweep_400", |b| {
        b.iter(|| black_box(bode_sweep(&open, &grid).unwrap()))
    });
}

fn bench_simulation(c: &mut Criterion) {
    let (blocks, sched, plant) = benchmark_setup();
    let steps = 600;
    let reference = SignalSeq::new(vec![1.0; steps], T_FAST);
    c.bench_function("run_interlaced_600_steps", |b| {
        b.iter(|| black_box(run_interlaced(&blocks, &sched, &plant, &reference, steps).unwrap()))
    });
}

criterion_group!(
    benches,
    bench_decompose,
    bench_rate_conversion,
    bench_lifting,
    bench_frequency_response,
    bench_simulation
);
criterion_main!(benches);
