//! The rayon and single-thread paths must agree bit for bit.

use qmeas_core::distribution::{convolve, general_output_distributions, InputDistributions};
use qmeas_core::moments::{log_spaced, trajectory};
use qmeas_core::oracle::apply_interaction;
use qmeas_core::{GriddedDistribution, Hbar, InteractionParams, ObjectStateSpec, ProbeStateSpec, Wavefunction1D};

fn on_threads<R: Send>(threads: usize, f: impl FnOnce() -> R + Send) -> R {
    rayon::ThreadPoolBuilder::new().num_threads(threads).build().unwrap().install(f)
}

fn both<R: Send + PartialEq + std::fmt::Debug>(f: impl Fn() -> R + Send + Sync) {
    assert_eq!(on_threads(1, &f), on_threads(4, &f));
}

#[test]
fn trajectory_is_deterministic() {
    let p = InteractionParams::from_gains(0.3, 0.7, 1.0).unwrap();
    let grid = log_spaced(1e-2, 1e2, 5000).unwrap();
    both(|| trajectory(&p, &grid).unwrap());
}

#[test]
fn convolution_is_deterministic() {
    let f = GriddedDistribution::gaussian(0.0, 1.0, 1500, 10.0).unwrap();
    let g = GriddedDistribution::gaussian(1.0, 0.3, 1500, 10.0).unwrap();
    both(|| convolve(&f, &g).unwrap());
    let hbar = Hbar::NATURAL;
    let object = ObjectStateSpec::minimum_uncertainty(0.0, 0.0, 1.0, hbar).unwrap();
    let probe = ProbeStateSpec::minimum_uncertainty(0.5, hbar).unwrap();
    let inputs = InputDistributions::gaussian(&object, &probe, 4096, 10.0).unwrap();
    let p = InteractionParams::new(0.8, 1.1, 0.4, 1.5).unwrap();
    both(|| general_output_distributions(&p, &inputs).unwrap());
}

#[test]
fn oracle_is_deterministic() {
    let hbar = Hbar::NATURAL;
    let psi =
        Wavefunction1D::gaussian_packet(0.0, 1.0, 0.0, Wavefunction1D::default_axis(0.0, 1.0).unwrap(), hbar).unwrap();
    let big_psi =
        Wavefunction1D::gaussian_packet(0.0, 0.7, 0.0, Wavefunction1D::default_axis(0.0, 0.7).unwrap(), hbar).unwrap();
    let p = InteractionParams::new(1.0, 0.8, -0.3, 1.2).unwrap();
    both(|| {
        let joint = apply_interaction(&p, &psi, &big_psi, hbar, 128).unwrap();
        let mom = joint.momentum_representation(hbar);
        (joint.amplitudes().to_vec(), mom.amplitudes().to_vec())
    });
}
