use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};
use fdsim::channel::{IuiLink, LinkBudget};
use fdsim::hardening::empirical_sqinr;
use fdsim::{default_scenario, run_campaign, Execution};

fn strategies() -> Vec<(&'static str, Execution)> {
    let mut v = vec![("sequential", Execution::Sequential)];
    if fdsim::exec::parallel_enabled() {
        v.push(("parallel", Execution::Parallel));
    }
    v
}

fn campaign(c: &mut Criterion) {
    let mut s = default_scenario();
    s.n_drops = 64;
    let mut group = c.benchmark_group("campaign_64_drops");
    group.sample_size(10);
    for (name, exec) in strategies() {
        group.bench_with_input(BenchmarkId::from_parameter(name), &exec, |b, &exec| {
            b.iter(|| run_campaign(&s, exec).unwrap())
        });
    }
    group.finish();
}

fn oracle(c: &mut Criterion) {
    let mut budget = LinkBudget::single_cell(64.0, 0.9, 200.0, 100.0, 4);
    budget.iui = (0..4)
        .map(|j| IuiLink { cell_id: 0, user_index: j, snr_iui: 1.0, p_frac_ul: 1.0 })
        .collect();
    let mut group = c.benchmark_group("oracle_8192_draws");
    group.sample_size(10);
    for (name, exec) in strategies() {
        group.bench_with_input(BenchmarkId::from_parameter(name), &exec, |b, &exec| {
            b.iter(|| empirical_sqinr(&budget, 8192, 1, exec).unwrap())
        });
    }
    group.finish();
}

criterion_group!(benches, campaign, oracle);
criterion_main!(benches);
