use std::hint::black_box;

use criterion::{criterion_group, criterion_main, Criterion};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use scaffold_core::protocol::Service;
use scaffold_core::simulation::{campaign, make_user, run, Execution, RunConfig, UserType};
use scaffold_core::{
    CognitiveState, Config, ObservationTriple, PolicyParams, QTable, ScoringTable,
};

fn reduce_all(c: &mut Criterion) {
    let table = ScoringTable::default();
    c.bench_function("reduce 30 triples", |b| {
        b.iter(|| {
            for t in ObservationTriple::all() {
                black_box(table.reduce(black_box(t)));
            }
        })
    });
}

fn select_and_update(c: &mut Criterion) {
    let mut q = QTable::zeros(PolicyParams::default()).unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(0);
    let s = CognitiveState::Unfocused;
    c.bench_function("select + update", |b| {
        b.iter(|| {
            let a = q.select_action(s, &mut rng).action;
            q.update(s, a, black_box(0.5), s).unwrap();
        })
    });
}

fn simulation(c: &mut Criterion) {
    let user = make_user(UserType::C);
    let cfg = RunConfig::default();
    c.bench_function("run 100 episodes", |b| {
        b.iter(|| run(&user, &cfg, black_box(1)).unwrap())
    });
    let mut group = c.benchmark_group("campaign 64 runs");
    group.sample_size(20);
    group.bench_function("serial", |b| {
        b.iter(|| campaign(&user, &cfg, 64, 1, Execution::Serial).unwrap())
    });
    group.bench_function("parallel", |b| {
        b.iter(|| campaign(&user, &cfg, 64, 1, Execution::Parallel).unwrap())
    });
    group.finish();
}

fn protocol(c: &mut Criterion) {
    let svc = Service::new(Config::default()).unwrap();
    svc.handle_line(r#"{"kind":"open_session"}"#);
    let lines = [
        r#"{"kind":"gaze_event","session":"s1","target":1}"#,
        r#"{"kind":"query_strategy","session":"s1","task":"t"}"#,
        r#"{"kind":"task_performance","session":"s1","task":"t","comprehension":{"success":true,"time":2.0},"enabledness":{"success":true,"time":3.0}}"#,
    ];
    c.bench_function("protocol episode", |b| {
        b.iter(|| {
            for l in lines {
                black_box(svc.handle_line(l));
            }
        })
    });
}

criterion_group!(benches, reduce_all, select_and_update, simulation, protocol);
criterion_main!(benches);
