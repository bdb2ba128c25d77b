use criterion::{criterion_group, criterion_main, Criterion};
use std::hint::black_box;

use gelfand_core::algebra::preset_algebra;
use gelfand_core::function_algebra::make_poly;
use gelfand_core::gelfand::characters;
use gelfand_core::spaces::{polynomial_hull_raster, raster_from_shape, sample_raster};
use gelfand_core::{
    certify_peak, shilov_estimate, AlgebraSpec, CertifyOptions, Complex64, Preset, SampleStrategy, Shape, WitnessFamily,
};

fn origin() -> Complex64 {
    Complex64::new(0.0, 0.0)
}

fn bench_characters(c: &mut Criterion) {
    let algebras: Vec<AlgebraSpec> = [Preset::Pointwise { n: 3 }, Preset::TruncatedPoly { k: 3 }, Preset::CyclicGroup { n: 3 }]
        .into_iter()
        .map(|p| preset_algebra(p).unwrap())
        .collect();
    c.bench_function("characters/presets", |b| {
        b.iter(|| algebras.iter().map(|a| characters(black_box(a)).unwrap().len()).sum::<usize>())
    });
}

fn bench_hull(c: &mut Criterion) {
    let annulus = raster_from_shape(&Shape::Annulus { center: origin(), inner: 0.5, outer: 1.0 }, 32.0).unwrap();
    c.bench_function("hull/annulus_r32", |b| b.iter(|| polynomial_hull_raster(black_box(&annulus))));
}

fn disk_family(samples: usize, degree: usize) -> WitnessFamily {
    let disk = raster_from_shape(&Shape::Disk { center: origin(), radius: 1.0 }, 16.0).unwrap();
    let space = sample_raster(&disk, &SampleStrategy::Circle { center: origin(), radius: 1.0, n: samples }).unwrap();
    let interior = sample_raster(&disk, &SampleStrategy::InteriorGrid { step: 0.3 }).unwrap();
    WitnessFamily::from_system(&make_poly(&space.concat(&interior), &AlgebraSpec::complex(), degree).unwrap()).unwrap()
}

fn bench_certify(c: &mut Criterion) {
    let opts = CertifyOptions::default();
    let family = disk_family(32, 8);
    let mut group = c.benchmark_group("certify");
    group.sample_size(20);
    group.bench_function("single_circle_point", |b| b.iter(|| certify_peak(black_box(&family), 0, &opts).unwrap()));
    group.bench_function("single_interior_point", |b| {
        b.iter(|| certify_peak(black_box(&family), family.rows() - 1, &opts).unwrap())
    });
    group.bench_function("shilov_disk_32_deg8", |b| b.iter(|| shilov_estimate(black_box(&family), &opts).unwrap()));
    group.finish();
}

criterion_group!(benches, bench_characters, bench_hull, bench_certify);
criterion_main!(benches);
