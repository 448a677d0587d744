use criterion::{criterion_group, criterion_main, Criterion};
use std::hint::black_box;

use emknot::calculus::{exterior_derivative, homotopy_potential, DiffMethod};
use emknot::forms::{hodge_dual, kernel_2form, Event, TwoForm, DEFAULT_TOL};
use emknot::helicity::{compute_helicities, HelicityOptions};
use emknot::lines::{trace_line, FieldKind, TraceParams};
use emknot::solutions::make_hopf_ranada;

fn pointwise(c: &mut Criterion) {
    let hopf = make_hopf_ranada();
    let p = Event::new(0.2, 0.5, -0.3, 0.7);
    let f = TwoForm([0.3, -1.2, 0.5, 0.8, -0.1, 0.4]);
    c.bench_function("hodge_dual", |b| b.iter(|| hodge_dual(black_box(&f))));
    c.bench_function("kernel_2form", |b| {
        b.iter(|| kernel_2form(black_box(&hopf.f(&p).unwrap()), DEFAULT_TOL))
    });
    c.bench_function("hopf_fields", |b| b.iter(|| hopf.fields(black_box(&p))));
    c.bench_function("hopf_dF_ad", |b| {
        b.iter(|| exterior_derivative(&hopf.form_field(false), black_box(&p), DiffMethod::Ad))
    });
    c.bench_function("homotopy_potential_32", |b| {
        b.iter(|| homotopy_potential(&hopf.form_field(false), black_box(&p), &Event::ORIGIN, 32))
    });
}

fn pipelines(c: &mut Criterion) {
    let hopf = make_hopf_ranada();
    let mut g = c.benchmark_group("pipelines");
    g.sample_size(10);
    g.bench_function("trace_unit_fiber", |b| {
        b.iter(|| {
            trace_line(
                &hopf,
                FieldKind::Magnetic,
                0.0,
                [1.0, 0.0, 0.0],
                &TraceParams::default(),
            )
        })
    });
    g.bench_function("helicity_nodes_16", |b| {
        b.iter(|| compute_helicities(&hopf, 0.0, 16, 1.0, &HelicityOptions::default()))
    });
    g.finish();
}

criterion_group!(benches, pointwise, pipelines);
criterion_main!(benches);
