use num_complex::Complex64 as C64;
use qfi_core::gaussian::{finite_chain_correlations, Boundary};
use qfi_core::measures::{QfiConfig, SkewInfo};
use qfi_core::oracle::{self, EdBoundary};
use qfi_core::ChainModel;

fn cases() -> Vec<(usize, f64, f64)> {
    let mut v = Vec::new();
    for &l in &[4usize, 6, 8] {
        for &h in &[0.3, 0.5, 1.2] {
            for &b in &[0.5, 2.0, f64::INFINITY] {
                v.push((l, h, b));
            }
        }
    }
    v
}

#[test]
fn wydi_matches_exact_diagonalization() {
    let alphas = [C64::new(1.0 / 3.0, 0.0), C64::new(0.5, 0.0), C64::new(0.5, 0.7)];
    let mut worst: f64 = 0.0;
    for (l, h, beta) in cases() {
        let model = ChainModel::ising(h);
        let g = finite_chain_correlations(&model, l, beta, Boundary::Open).unwrap();
        let rho = oracle::thermal(&model, l, beta, EdBoundary::Open).unwrap();
        for a in [0..l / 2, l / 4..l / 4 + l / 2] {
            let sites: Vec<usize> = a.clone().collect();
            let ra = rho.reduce(&sites).unwrap();
            let x = oracle::sum_x(sites.len(), &(0..sites.len()).collect::<Vec<_>>());
            let sk = SkewInfo::new(&g, a.clone()).unwrap();
            let var = oracle::variance_exact(&ra, &x);
            assert!((sk.variance() - var).abs() < 1e-9, "variance L={l} h={h} β={beta}");
            for &al in &alphas {
                let e = oracle::wydi_exact(&ra, &x, al).unwrap();
                let v = sk.wydi(al).unwrap();
                worst = worst.max((e - v).abs());
                assert!((e - v).abs() < 1e-8, "L={l} h={h} β={beta} A={a:?} α={al}: {v} vs {e}");
            }
        }
    }
    eprintln!("worst WYDI deviation {worst:e}");
}

#[test]
fn qfi_estimate_matches_exact_diagonalization() {
    let cfg = QfiConfig::default();
    let mut worst: f64 = 0.0;
    for (l, h, beta) in cases() {
        let model = ChainModel::ising(h);
        let g = finite_chain_correlations(&model, l, beta, Boundary::Open).unwrap();
        let rho = oracle::thermal(&model, l, beta, EdBoundary::Open).unwrap();
        let a = 0..l / 2;
        let sites: Vec<usize> = a.clone().collect();
        let ra = rho.reduce(&sites).unwrap();
        let x = oracle::sum_x(sites.len(), &(0..sites.len()).collect::<Vec<_>>());
        let f4 = oracle::qfi_exact(&ra, &x).unwrap();
        let est = SkewInfo::new(&g, a).unwrap().qfi_estimate(&cfg).unwrap();
        let rel = (est.qfi_over_4 - f4).abs() / f4;
        worst = worst.max(rel);
        eprintln!("L={l} h={h} β={beta}: {} vs {f4} rel {rel:e} fit {:?}", est.qfi_over_4, est.fit);
    }
    assert!(worst < 1e-4, "worst relative error {worst:e}");
}

use ndarray::Array2;
use proptest::prelude::*;
use qfi_core::gaussian::{ground_state_correlations, CorrelationMatrix};
use qfi_core::measures::{chi, qfi_bounds, variance_x, wydi};

fn gaussian_state(seed: &[f64], modes: usize) -> CorrelationMatrix {
    use ndarray_linalg::QR;
    let n = 2 * modes;
    let a = Array2::from_shape_fn((n, n), |(i, j)| seed[(i * n + j) % seed.len()] * ((i + 2 * j) as f64).cos());
    let (q, _) = a.qr().unwrap();
    let mut blocks = Array2::<f64>::zeros((n, n));
    for m in 0..modes {
        let nu = seed[(7 * m + 3) % seed.len()].clamp(-0.999, 0.999);
        blocks[[2 * m, 2 * m + 1]] = nu;
        blocks[[2 * m + 1, 2 * m]] = -nu;
    }
    let r = q.dot(&blocks).dot(&q.t());
    CorrelationMatrix::new(r.mapv(|x| C64::new(0.0, -x))).unwrap()
}

#[test]
fn pure_states_collapse_to_the_variance() {
    let model = ChainModel::ising(1.4);
    let g = finite_chain_correlations(&model, 6, f64::INFINITY, Boundary::Open).unwrap();
    let sk = SkewInfo::new(&g, 0..6).unwrap();
    assert!(sk.is_pure());
    let var = sk.variance();
    for al in [C64::new(1.0 / 3.0, 0.0), C64::new(0.5, 0.0), C64::new(0.5, 1.0)] {
        assert!((sk.wydi(al).unwrap() - var).abs() < 1e-12);
    }
    assert!((sk.qfi_estimate(&QfiConfig::default()).unwrap().qfi_over_4 - var).abs() < 1e-6);
    let b = sk.bounds().unwrap();
    for v in [b.lower, b.upper_2i, b.upper_mixed, b.lower_rho2] {
        assert!((v - var).abs() < 1e-12);
    }
}

#[test]
fn infinite_temperature_has_no_skew_information() {
    let g = CorrelationMatrix::zeros(5);
    assert!((variance_x(&g, 0..5).unwrap() - 5.0).abs() < 1e-14);
    for al in [C64::new(1.0 / 3.0, 0.0), C64::new(0.5, 0.0), C64::new(0.5, 1.0)] {
        assert!(wydi(&g, 0..5, al).unwrap().abs() < 1e-12);
    }
    let b = qfi_bounds(&g, 0..5).unwrap();
    assert!(b.lower.abs() < 1e-12 && b.upper_mixed.abs() < 1e-12 && b.lower_rho2.abs() < 1e-12);
    assert_eq!(chi(0.0, 5), 0.0);
}

#[test]
fn classical_ferromagnet_saturates_the_variance() {
    let g = ground_state_correlations(&ChainModel::ising(0.0), 10);
    let v = variance_x(&g, 2..9).unwrap();
    assert!((v - 49.0).abs() < 1e-9);
    assert!((chi(v, 7) - 1.0).abs() < 1e-9 * 49.0);
}

#[test]
fn variance_matches_exact_ground_state() {
    let model = ChainModel::ising(0.5);
    let g = finite_chain_correlations(&model, 10, f64::INFINITY, Boundary::Open).unwrap();
    let rho = oracle::thermal(&model, 10, f64::INFINITY, EdBoundary::Open).unwrap();
    let x = oracle::sum_x(10, &(0..10).collect::<Vec<_>>());
    assert!((variance_x(&g, 0..10).unwrap() - oracle::variance_exact(&rho, &x)).abs() < 1e-8);
}

#[test]
fn bound_ordering_on_a_thermal_block() {
    let model = ChainModel::ising(0.5);
    let g = finite_chain_correlations(&model, 10, 2.0, Boundary::Open).unwrap();
    let rho = oracle::thermal(&model, 10, 2.0, EdBoundary::Open).unwrap();
    let sites: Vec<usize> = (2..7).collect();
    let ra = rho.reduce(&sites).unwrap();
    let f4 = oracle::qfi_exact(&ra, &oracle::sum_x(5, &[0, 1, 2, 3, 4])).unwrap();
    let b = qfi_bounds(&g, 2..7).unwrap();
    assert!(b.lower_rho2 <= b.lower + 1e-12);
    assert!(b.lower <= f4 + 1e-12);
    assert!(f4 <= b.upper_mixed + 1e-12);
    assert!(b.upper_mixed <= b.upper_2i + 1e-12);
}

#[test]
fn rotated_skew_information_is_real_and_even() {
    let model = ChainModel::new(0.7, 0.6);
    let g = finite_chain_correlations(&model, 8, 1.5, Boundary::Open).unwrap();
    let sk = SkewInfo::new(&g, 1..6).unwrap();
    for b in [0.3, 1.1, 2.4] {
        let p = sk.wydi_complex(C64::new(0.5, b)).unwrap();
        let m = sk.wydi_complex(C64::new(0.5, -b)).unwrap();
        assert!(p.im.abs() < 1e-9 && (p - m).norm() < 1e-9);
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(32))]

    #[test]
    fn random_gaussian_matches_dense(seed in prop::collection::vec(-1.0f64..1.0, 16), n in 1usize..4) {
        let g = gaussian_state(&seed, n);
        let rho = oracle::gaussian_density(g.data()).unwrap();
        let x = oracle::sum_x(n, &(0..n).collect::<Vec<_>>());
        let sk = SkewInfo::new(&g, 0..n).unwrap();
        for al in [C64::new(0.25, 0.0), C64::new(0.5, 0.0), C64::new(0.5, 0.9)] {
            let e = oracle::wydi_exact(&rho, &x, al).unwrap();
            prop_assert!((sk.wydi(al).unwrap() - e).abs() < 1e-9);
        }
    }

    #[test]
    fn skew_information_is_concave_in_alpha(seed in prop::collection::vec(-1.0f64..1.0, 16)) {
        let g = gaussian_state(&seed, 3);
        let sk = SkewInfo::new(&g, 0..3).unwrap();
        let v: Vec<f64> = (1..10).map(|k| sk.wydi(C64::new(k as f64 / 10.0, 0.0)).unwrap()).collect();
        for k in 1..8 {
            prop_assert!(v[k - 1] + v[k + 1] - 2.0 * v[k] <= 1e-9);
        }
        prop_assert!(v.iter().all(|&x| x <= v[4] + 1e-9));
    }
}
