//! Criterion benchmarks for the computational kernels: exact simplex,
//! vertex enumeration, AVI face enumeration, and polynomial calculus.

use criterion::{criterion_group, criterion_main, BatchSize, Criterion};

use mpec_core::cones::{linearized_cone, solve_avi, AviProblem};
use mpec_core::expr::{parse_expr, RationalMatrix};
use mpec_core::instance::{load_instance, EvalPoint};
use mpec_core::oracle::{random_instance, random_lp, Profile};
use mpec_core::polyhedra::{enumerate_vertices, solve_lp};
use mpec_core::rat::{rat, Rat};
use mpec_core::tangent::tangent_cone;

fn bench_simplex(c: &mut Criterion) {
    let problems: Vec<_> = (0..32).map(random_lp).collect();
    c.bench_function("simplex_random_batch", |b| {
        b.iter(|| {
            for lp in &problems {
                std::hint::black_box(solve_lp(lp));
            }
        })
    });
}

fn bench_vertex_enumeration(c: &mut Criterion) {
    // Hypercube with a diagonal cut in dimension 4.
    let dim = 4;
    let mut p = mpec_core::Polyhedron::whole_space(dim);
    for i in 0..dim {
        let mut row = vec![rat(0); dim];
        row[i] = rat(1);
        p.add_ineq(row.clone(), rat(1));
        let neg: Vec<Rat> = row.iter().map(|v| -v).collect();
        p.add_ineq(neg, rat(1));
    }
    p.add_ineq(vec![rat(1); dim], rat(2));
    c.bench_function("vertex_enumeration_dim4", |b| {
        b.iter(|| std::hint::black_box(enumerate_vertices(&p).unwrap()))
    });
}

fn bench_avi_faces(c: &mut Criterion) {
    // LCP over R^3_+ with a fixed positive definite matrix.
    let m_matrix = RationalMatrix::from_rows(vec![
        vec![rat(3), rat(1), rat(0)],
        vec![rat(1), rat(2), rat(1)],
        vec![rat(0), rat(1), rat(4)],
    ]);
    let mut k = mpec_core::Polyhedron::whole_space(3);
    for i in 0..3 {
        let mut row = vec![rat(0); 3];
        row[i] = rat(-1);
        k.add_ineq(row, rat(0));
    }
    let avi = AviProblem {
        q: vec![rat(-1), rat(2), rat(-3)],
        m_matrix,
        k_set: k,
    };
    c.bench_function("avi_face_enumeration_lcp3", |b| {
        b.iter(|| std::hint::black_box(solve_avi(&avi).unwrap()))
    });
}

fn bench_polynomials(c: &mut Criterion) {
    let p = parse_expr(
        "x1^3*y1 - 2*x2*y2^2 + 1/3*x1*x2*y1*y2 - y1^4 + 5*x2^2",
        (2, 2),
    )
    .unwrap();
    c.bench_function("poly_differentiate_all", |b| {
        b.iter(|| {
            for v in 0..4 {
                std::hint::black_box(p.differentiate(v).unwrap());
            }
        })
    });
    c.bench_function("poly_translate", |b| {
        let center = [rat(1), rat(-2), rat(3), rat(-1)];
        b.iter(|| std::hint::black_box(p.translate(&center).unwrap()))
    });
}

fn bench_full_analysis(c: &mut Criterion) {
    let doc = r#"{
        "n": 1, "m": 2, "l": 2,
        "f": "x1^2+x1+2*y1+y2^2",
        "F": ["x1^2+x1+y1", "x1^3+y2"],
        "g": ["-y1", "-y2"],
        "Z": null
    }"#;
    let inst = load_instance(doc).unwrap();
    let z = EvalPoint::new(vec![rat(0)], vec![rat(0), rat(0)]);
    c.bench_function("tangent_cone_degenerate_ncp", |b| {
        b.iter(|| std::hint::black_box(tangent_cone(&inst, &z).unwrap()))
    });
    c.bench_function("linearized_cone_degenerate_ncp", |b| {
        b.iter_batched(
            || vec![vec![rat(0), rat(0)]],
            |lams| std::hint::black_box(linearized_cone(&inst, &z, &lams).unwrap()),
            BatchSize::SmallInput,
        )
    });
    c.bench_function("random_instance_generation", |b| {
        let mut seed = 0u64;
        b.iter(|| {
            seed = seed.wrapping_add(1);
            std::hint::black_box(random_instance(seed, Profile::ViSmall))
        })
    });
}

criterion_group!(
    benches,
    bench_simplex,
    bench_vertex_enumeration,
    bench_avi_faces,
    bench_polynomials,
    bench_full_analysis
);
criterion_main!(benches);
