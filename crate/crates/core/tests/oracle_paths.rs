use num_complex::Complex64;
use qmeas_core::fourier::KernelSign;
use qmeas_core::interaction::LinearMap;
use qmeas_core::oracle::{apply_interaction, gaussian_momentum_amplitude, MappedProductState};
use qmeas_core::verify::{compare_with_oracle, oracle_test_matrix};
use qmeas_core::{Axis, Error, Hbar, InteractionParams, JointWavefunction, Wavefunction1D};

const HBAR: Hbar = Hbar::NATURAL;

fn packet(mean_x: f64, sigma: f64, mean_k: f64) -> Wavefunction1D {
    let axis = Wavefunction1D::default_axis(mean_x, sigma).unwrap();
    Wavefunction1D::gaussian_packet(mean_x, sigma, mean_k, axis, HBAR).unwrap()
}

fn small(mean_x: f64, sigma: f64, mean_k: f64) -> Wavefunction1D {
    let axis = Axis::spanning(mean_x, 12.0 * sigma, 1024).unwrap();
    Wavefunction1D::gaussian_packet(mean_x, sigma, mean_k, axis, HBAR).unwrap()
}

fn max_gap(a: impl Iterator<Item = Complex64>, b: impl Iterator<Item = Complex64>) -> f64 {
    a.zip(b).map(|(x, y)| (x - y).norm()).fold(0.0, f64::max)
}

#[test]
fn packet_moments() {
    let psi = packet(0.0, 1.0, 0.0);
    assert!((psi.position_moments().variance - 1.0).abs() < 1e-6);
    assert!((psi.momentum_moments(HBAR).variance - 0.25).abs() < 1e-6);
    let moved = packet(2.0, 0.5, 1.0);
    assert!((moved.position_moments().mean - 2.0).abs() < 1e-6);
    assert!((moved.momentum_moments(HBAR).mean - 1.0).abs() < 1e-6);
}

#[test]
fn ideal_and_swap_pre_images() {
    let (psi, big_psi) = (small(0.2, 1.0, 0.5), small(-0.1, 0.7, -0.3));
    let ideal = MappedProductState::product(&psi, &big_psi).then(&InteractionParams::ideal().coordinate_map());
    let swap = InteractionParams::new(0.0, 1.0, -1.0, 0.0).unwrap();
    let swapped = MappedProductState::product(&psi, &big_psi).then(&swap.coordinate_map());
    for &(q, big_q) in &[(0.0, 0.0), (0.4, -1.3), (-2.0, 1.1), (1.7, 2.5)] {
        let expected = psi.value_at(q) * big_psi.value_at(big_q - q);
        assert!((ideal.amplitude(q, big_q) - expected).norm() < 1e-14);
        let expected = psi.value_at(big_q) * big_psi.value_at(-q);
        assert!((swapped.amplitude(q, big_q) - expected).norm() < 1e-14);
    }
}

#[test]
fn map_then_inverse_is_the_input() {
    let (psi, big_psi) = (small(0.0, 1.0, 0.0), small(0.0, 0.5, 0.0));
    let m = LinearMap::new([[1.5, -0.4], [0.7, 0.9]]);
    let there_and_back = MappedProductState::product(&psi, &big_psi).then(&m).then(&m.inverse());
    for &(q, big_q) in &[(0.1, 0.2), (-1.5, 0.9), (2.2, -0.3)] {
        let expected = psi.value_at(q) * big_psi.value_at(big_q);
        assert!((there_and_back.amplitude(q, big_q) - expected).norm() < 1e-12);
    }
}

/// After the ideal interaction `p' = p − P`, `P' = P`, so
/// `Φ'(p, P) = φ(p + P)Φ(P)`.
#[test]
fn ideal_momentum_amplitude_is_pointwise_product() {
    let (sq, sbq) = (1.0, 0.7);
    let joint =
        apply_interaction(&InteractionParams::ideal(), &packet(0.0, sq, 0.0), &packet(0.0, sbq, 0.0), HBAR, 512)
            .unwrap();
    let mom = joint.momentum_representation(HBAR);
    let axes = mom.axes();
    let mut worst = 0.0f64;
    for i in (0..axes.first.count).step_by(7) {
        let p = axes.first.coordinate(i);
        for j in (0..axes.second.count).step_by(7) {
            let big_p = axes.second.coordinate(j);
            let expected = gaussian_momentum_amplitude(0.0, sq, 0.0, HBAR, p + big_p)
                * gaussian_momentum_amplitude(0.0, sbq, 0.0, HBAR, big_p);
            worst = worst.max((mom.amplitude(i, j) - expected).norm());
        }
    }
    assert!(worst < 1e-5, "worst pointwise gap {worst:e}");
}

#[test]
fn product_marginals_are_the_factor_densities() {
    let (psi, big_psi) = (small(0.0, 1.0, 0.0), small(0.5, 0.6, 0.0));
    let (f, big_f) = JointWavefunction::product(&psi, &big_psi).marginals().unwrap();
    assert!(f.l1_distance(&psi.density().unwrap()).unwrap() < 1e-12);
    assert!(big_f.l1_distance(&big_psi.density().unwrap()).unwrap() < 1e-12);
}

#[test]
fn ideal_marginals_match_convolutions() {
    let case = oracle_test_matrix(7, HBAR).into_iter().find(|c| c.name == "ideal").unwrap();
    let c = compare_with_oracle(&case, 512, HBAR, KernelSign::Negative).unwrap();
    assert!(c.l1_position < 1e-3 && c.l1_momentum < 1e-3, "{c:?}");
    assert!(c.norm_error < 1e-6);
}

#[test]
fn momentum_round_trip_is_lossless() {
    let joint = apply_interaction(
        &InteractionParams::new(1.0, 0.8, -0.3, 1.2).unwrap(),
        &packet(0.0, 1.0, 0.0),
        &packet(0.0, 0.7, 0.0),
        HBAR,
        256,
    )
    .unwrap();
    let back = joint.momentum_representation(HBAR).position_representation(HBAR);
    let (a, b) = (back.axes().first, joint.axes().first);
    assert!(a.count == b.count && (a.step / b.step - 1.0).abs() < 1e-14 && (a.origin - b.origin).abs() < 1e-12);
    let gap = max_gap(back.amplitudes().iter().copied(), joint.amplitudes().iter().copied());
    assert!(gap < 1e-10, "{gap:e}");
}

#[test]
fn binary_file_round_trip() {
    let joint = JointWavefunction::product(&small(0.0, 1.0, 0.0), &small(0.0, 0.5, 0.2));
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("state.qmo");
    joint.write_binary(std::fs::File::create(&path).unwrap()).unwrap();
    let back = JointWavefunction::read_binary(std::fs::File::open(&path).unwrap()).unwrap();
    assert_eq!(back.axes().first, joint.axes().first);
    assert_eq!(back.axes().second, joint.axes().second);
    assert_eq!(back.amplitudes(), joint.amplitudes());

    let bytes = std::fs::read(&path).unwrap();
    assert_eq!(&bytes[..4], b"QMO1");
    assert!(JointWavefunction::read_binary(&bytes[..bytes.len() - 1]).is_err());
}

#[test]
fn narrow_inputs_are_rejected() {
    let axis = Axis::spanning(0.0, 3.0, 256).unwrap();
    assert!(matches!(Wavefunction1D::gaussian_packet(0.0, 1.0, 0.0, axis, HBAR), Err(Error::GridTooNarrow(_))));
}
