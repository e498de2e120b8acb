use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};
use mechstate::conditional::{
    default_grid, most_probable_outcome, ConditionalWigner, OpticalInput,
};
use mechstate::params::{derive_scales, PhysicalParams};
use mechstate::plant::{Conditioning, PhotonMode, PlantModel};
use mechstate::simplecase::{
    conditional_wavefunction, fock_quadrature_wavefunction, wigner_from_wavefunction,
    Wavefunction1D, WignerOptions,
};
use mechstate::Exec;
use std::hint::black_box;

fn strategies() -> Vec<(&'static str, Exec)> {
    vec![
        ("sequential", Exec::Sequential),
        #[cfg(feature = "parallel")]
        ("parallel", Exec::Parallel),
    ]
}

fn conditional_grid(c: &mut Criterion) {
    let p = PhysicalParams::small_scale();
    let s = derive_scales(&p).unwrap();
    let chain = Conditioning::new(
        PlantModel::from_scales(&s).unwrap(),
        PhotonMode::small_scale(p.omega_m),
    )
    .unwrap();
    let out = most_probable_outcome(&chain.photon).unwrap();
    let w = ConditionalWigner::new(
        &OpticalInput::SinglePhoton,
        &chain.photon,
        chain.filters.v_c,
        &out,
    )
    .unwrap();
    let mut group = c.benchmark_group("conditional_wigner");
    for n in [128usize, 256, 512] {
        for (name, exec) in strategies() {
            let opts = WignerOptions {
                n_x: n,
                n_p: n,
                exec,
                ..default_grid()
            };
            group.bench_with_input(BenchmarkId::new(name, n), &opts, |b, o| {
                b.iter(|| black_box(w.render(o).unwrap()))
            });
        }
    }
    group.finish();
}

fn wavefunction_transform(c: &mut Criterion) {
    let photon = fock_quadrature_wavefunction(1).unwrap();
    let prior = Wavefunction1D::gaussian(4.0, 0.0).unwrap();
    let psi = conditional_wavefunction(&photon, &prior, 5.0, 0.8).unwrap();
    let mut group = c.benchmark_group("wavefunction_wigner");
    group.sample_size(20);
    for (name, exec) in strategies() {
        let opts = WignerOptions {
            exec,
            ..WignerOptions::default()
        };
        group.bench_function(name, |b| {
            b.iter(|| black_box(wigner_from_wavefunction(&psi, opts).unwrap()))
        });
    }
    group.finish();
}

criterion_group!(benches, conditional_grid, wavefunction_transform);
criterion_main!(benches);
