use std::sync::Arc;

use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};
use jiragpt_core::eval::{behaviors, run_variant, Corpus, RunOptions};
use jiragpt_core::fixture::Fixture;
use jiragpt_core::jql::{evaluate, parse_jql};
use jiragpt_core::llm::{ScriptedBackend, Temperature};
use jiragpt_core::mockjira::MockJira;
use jiragpt_core::par::{self, Execution};
use jiragpt_core::pipeline::Pipeline;
use jiragpt_core::prompt::{PromptKit, Variant};

fn corpus_run(c: &mut Criterion) {
    let corpus = Corpus::bundled();
    let kit = PromptKit::bundled();
    let jira = MockJira::bundled();
    let lint = jira.fixture().lint_context();
    let llm = Arc::new(ScriptedBackend::new(behaviors::tempnoise(&corpus, &kit, 1)));
    let pipeline = Pipeline::new(Arc::new(kit), llm, Arc::new(jira), lint);
    let t = Temperature::new(0.5).unwrap();

    let mut group = c.benchmark_group("full_variant_70_cases");
    for (name, execution) in [("sequential", Execution::Sequential), ("parallel", Execution::Parallel)] {
        let opts = RunOptions {
            execution,
            ..RunOptions::default()
        };
        group.bench_with_input(BenchmarkId::from_parameter(name), &opts, |b, opts| {
            b.iter(|| run_variant(&pipeline, &corpus, Variant::Full, t, 0, opts))
        });
    }
    group.finish();
}

// Every reference query over a store of 20 000 issues.
fn references_large_store(c: &mut Criterion) {
    let corpus = Corpus::bundled();
    let fx = Fixture::bundled();
    let clock = fx.clock();
    let store: Vec<_> = (0..1000)
        .flat_map(|copy| {
            fx.issues.iter().map(move |i| {
                let mut i = i.clone();
                i.key = format!("{}-{copy}", i.key);
                i
            })
        })
        .collect();
    let queries: Vec<_> = corpus.cases.iter().map(|c| parse_jql(&c.reference_jql).unwrap()).collect();

    let mut group = c.benchmark_group("references_20k_issues");
    group.sample_size(20);
    for (name, execution) in [("sequential", Execution::Sequential), ("parallel", Execution::Parallel)] {
        group.bench_function(name, |b| {
            b.iter(|| par::map(execution, &queries, |q| evaluate(q, &store, &clock).unwrap().len()))
        });
    }
    group.finish();
}

criterion_group!(benches, corpus_run, references_large_store);
criterion_main!(benches);
