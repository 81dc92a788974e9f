use ndarray::Array2;
use proptest::prelude::*;
use qfi_core::dynamics::KickKind;
use qfi_core::gaussian::quench_correlations;
use qfi_core::measures::two_point_table;
use qfi_core::quad;
use qfi_core::semiclassics::*;
use qfi_core::{ChainModel, Error, QuenchPair};

fn asin_m(z: f64) -> f64 {
    if z.abs() >= 1.0 {
        z.signum()
    } else {
        2.0 / std::f64::consts::PI * z.asin()
    }
}

#[test]
fn scaling_function_examples() {
    let sf = ScalingFunction::arcsin();
    assert!((scaling_m(&sf, 0.5) - 1.0 / 3.0).abs() < 1e-15);
    assert_eq!(scaling_m(&sf, 0.0), 0.0);
    assert_eq!(scaling_m(&sf, 1.7), 1.0);
    assert_eq!(scaling_m(&sf, -3.0), -1.0);
    assert!((sf.integral(-1.0, 1.0)).abs() < 1e-15);
    assert!((sf.integral(0.0, 2.0) - (1.0 + 1.0 - 2.0 / std::f64::consts::PI)).abs() < 1e-14);
}

#[test]
fn uniform_cross_section_reproduces_arcsin() {
    for h in [0.2, 0.5, 0.8] {
        let sf = ScalingFunction::uniform(&ChainModel::ising(h)).unwrap();
        for i in 0..=40 {
            let z = -1.2 + 0.06 * i as f64;
            assert!((sf.eval(z) - asin_m(z)).abs() < 2e-4, "h={h} ζ={z}");
        }
        let exact = ScalingFunction::arcsin();
        assert!((sf.integral(-0.3, 0.9) - exact.integral(-0.3, 0.9)).abs() < 2e-4);
    }
}

#[test]
fn conditional_profile_examples() {
    let sf = ScalingFunction::arcsin();
    assert!((conditional_m(&sf, 0.3, -1.0, 1.0).unwrap() - scaling_m(&sf, 0.3)).abs() < 1e-15);
    assert!((conditional_m(&sf, -0.2, -0.2, 0.7).unwrap() + 1.0).abs() < 1e-15);
    assert!((conditional_m(&sf, 0.7, -0.2, 0.7).unwrap() - 1.0).abs() < 1e-15);
    assert!(matches!(conditional_m(&sf, 2.0, 1.5, 3.0), Err(Error::EmptyWindow)));
    assert!(matches!(conditional_m(&sf, 0.0, 0.5, 0.1), Err(Error::Usage(_))));
}

#[test]
fn subsystem_probability_examples() {
    let sf = ScalingFunction::arcsin();
    assert_eq!(p_in_subsystem(&sf, -10.0, 10.0), 1.0);
    assert_eq!(p_in_subsystem(&sf, 0.0, 10.0), 0.5);
    assert!((p_in_subsystem(&sf, -0.5, 0.5) - 1.0 / 3.0).abs() < 1e-15);
}

#[test]
fn correlation_profile_examples() {
    let sf = ScalingFunction::arcsin();
    let m0 = 0.9;
    assert_eq!(predict_correlations(&sf, m0, 1.0, &[], 3.0, 1.0, 5.0), (m0, m0 * m0));
    let w = [Excitation { position: 0.0, time: 0.0 }];
    let (_, two) = predict_correlations(&sf, m0, 1.0, &w, 4.0, 2.0, 2.0);
    assert!((two - m0 * m0).abs() < 1e-15);
    let (one, two) = predict_correlations(&sf, m0, 2.0, &w, 5.0, -10.0, 10.0);
    assert!((two + m0 * m0).abs() < 1e-15);
    assert!((one + m0).abs() < 1e-15);
    // walls created later do not act yet
    let late = [Excitation { position: 0.0, time: 6.0 }];
    assert_eq!(predict_correlations(&sf, m0, 1.0, &late, 5.0, -3.0, 3.0), (m0, m0 * m0));
}

#[test]
fn kick_wall_positions() {
    assert_eq!(kick_walls(KickKind::MajoranaOdd, 4.0), vec![3.5]);
    assert_eq!(kick_walls(KickKind::MajoranaEven, 4.0), vec![4.5]);
    assert_eq!(kick_walls(KickKind::SpinFlip, 4.0), vec![3.5, 4.5]);
    assert!(kick_walls(KickKind::SigmaXString, 4.0).is_empty());
}

/// χ of one wall with ∫𝓜 by a plain midpoint sum.
fn single_wall_by_midpoint(l: f64, r: f64, j0: f64, vt: f64, kappa: f64, tr_o2: f64) -> f64 {
    let (zl, zr) = ((l - 0.5 - j0) / vt, (r + 0.5 - j0) / vt);
    let n = 4_000_000;
    let h = (zr - zl) / n as f64;
    let s: f64 = (0..n).map(|i| asin_m(zl + (i as f64 + 0.5) * h)).sum::<f64>() * h;
    let (ml, mr) = (asin_m(zl), asin_m(zr));
    let len = r - l + 1.0;
    let c = 0.5 * (ml + mr) - vt / len * s;
    tr_o2 - kappa * kappa * (1.0 - 0.5 * (mr - ml)) - 2.0 * kappa * kappa / (mr - ml) * c * c
}

#[test]
fn single_wall_matches_midpoint_quadrature() {
    let sf = ScalingFunction::arcsin();
    let (r, kappa, tr) = (30.0, 0.93, 0.88);
    for ratio in [0.2, 0.5, 0.8, 1.3] {
        let vt = ratio * r;
        let a = chi_single_dw(&sf, -r, r, -0.5, 1.0, vt, kappa, tr).unwrap();
        let b = single_wall_by_midpoint(-r, r, -0.5, vt, kappa, tr);
        assert!((a - b).abs() < 1e-8, "v̄t/r={ratio}: {a} vs {b}");
    }
}

#[test]
fn single_wall_outside_the_cone() {
    let sf = ScalingFunction::arcsin();
    let chi = chi_single_dw(&sf, 20.0, 40.0, 0.0, 1.0, 5.0, 0.9, 0.85).unwrap();
    assert!((chi - (0.85 - 0.81)).abs() < 1e-15);
}

#[test]
fn single_wall_decays_as_inverse_time() {
    let sf = ScalingFunction::arcsin();
    let (r, kappa) = (10.0, 0.9);
    let len = 2.0 * r + 1.0;
    let tail = |t: f64| t * chi_single_dw(&sf, -r, r, 0.0, 1.0, t, kappa, kappa * kappa).unwrap();
    let (a, b) = (tail(5.0 * len), tail(50.0 * len));
    assert!(a > 0.0 && ((a - b) / b).abs() < 0.02, "{a} {b}");
}

/// Independent evaluation of the multi-wall double integral: expand the
/// product over walls into separable terms and integrate each factor adaptively.
fn multi_wall_by_expansion(walls: &[(f64, f64)], l: f64, r: f64, t: f64, kappa: f64, tr_o2: f64) -> f64 {
    let (a, b) = (l - 0.5, r + 0.5);
    let mut data = Vec::new();
    for &(x, t0) in walls {
        let s = t - t0;
        let (zl, zr) = ((a - x) / s, (b - x) / s);
        let (ml, mr) = (asin_m(zl), asin_m(zr));
        let p = 0.5 * (mr - ml);
        if p > 1e-14 {
            data.push((x, s, ml, mr, p));
        }
    }
    let n = data.len();
    let mut total = 0.0;
    for mask in 0u32..(1 << n) {
        let mut weight = 1.0;
        for (j, d) in data.iter().enumerate() {
            weight *= if mask >> j & 1 == 1 { d.4 } else { 1.0 - d.4 };
        }
        let f = |y: f64| {
            let mut v = 1.0;
            for (j, &(x, s, ml, mr, _)) in data.iter().enumerate() {
                if mask >> j & 1 == 1 {
                    v *= (2.0 * asin_m((y - x) / s) - ml - mr) / (mr - ml);
                }
            }
            v
        };
        let pts = quad::breakpoints(a, b, data.iter().flat_map(|d| [d.0 - d.1, d.0 + d.1]));
        let i1 = quad::integrate_pts(f, &pts, 1e-13, 1e-13);
        total += weight * i1 * i1;
    }
    tr_o2 - kappa * kappa * total / ((b - a) * (b - a))
}

#[test]
fn multi_wall_reduces_to_single_wall() {
    let sf = ScalingFunction::arcsin();
    for ratio in [0.3, 0.7, 1.2] {
        let t = ratio * 20.0;
        let one = chi_single_dw(&sf, -20.0, 20.0, 0.5, 1.0, t, 0.9, 0.8).unwrap();
        let many = chi_multi_kick(&sf, &[Excitation { position: 0.5, time: 0.0 }], -20.0, 20.0, 1.0, t, 0.9, 0.8).unwrap();
        assert!((one - many).abs() < 1e-10, "{one} vs {many}");
    }
}

#[test]
fn multi_wall_matches_separable_expansion() {
    let sf = ScalingFunction::arcsin();
    let cases: Vec<Vec<(f64, f64)>> = vec![
        vec![(-0.5, 0.0), (-0.5, 0.0)],
        vec![(-40.5, 0.0), (39.5, 0.0)],
        vec![(-0.5, 0.0), (0.5, 0.0)],
        vec![(-0.5, 0.0), (-0.5, 12.0), (-0.5, 24.0)],
    ];
    for walls in &cases {
        for t in [10.0, 18.0, 30.0] {
            let ex: Vec<Excitation> = walls.iter().map(|&(p, t0)| Excitation { position: p, time: t0 }).collect();
            let a = chi_multi_kick(&sf, &ex, -20.0, 20.0, 1.0, t, 0.9, 0.8).unwrap();
            let live: Vec<(f64, f64)> = walls.iter().copied().filter(|w| w.1 < t).collect();
            let b = multi_wall_by_expansion(&live, -20.0, 20.0, t, 0.9, 0.8);
            assert!((a - b).abs() < 1e-8, "{walls:?} t={t}: {a} vs {b}");
        }
    }
}

#[test]
fn multi_wall_no_particle_limits() {
    let sf = ScalingFunction::arcsin();
    let none = chi_multi_kick(&sf, &[], -10.0, 10.0, 1.0, 5.0, 0.9, 0.85).unwrap();
    assert!((none - (0.85 - 0.81)).abs() < 1e-15);
    let far = [Excitation { position: 200.5, time: 0.0 }, Excitation { position: -300.5, time: 1.0 }];
    let v = chi_multi_kick(&sf, &far, -10.0, 10.0, 1.0, 5.0, 0.9, 0.85).unwrap();
    assert!((v - none).abs() < 1e-10);
}

#[test]
fn kick_time_only_enters_through_elapsed_time() {
    let sf = ScalingFunction::arcsin();
    let a = chi_multi_kick(&sf, &[Excitation { position: 0.5, time: 7.0 }], -15.0, 15.0, 1.0, 19.0, 0.9, 0.8).unwrap();
    let b = chi_multi_kick(&sf, &[Excitation { position: 0.5, time: 0.0 }], -15.0, 15.0, 1.0, 12.0, 0.9, 0.8).unwrap();
    assert!((a - b).abs() < 1e-12);
}

#[test]
fn surrogate_second_moment_limits() {
    let sf = ScalingFunction::arcsin();
    let gs: Vec<f64> = (0..11).map(|d| if d == 0 { 1.0 } else { 0.8 }).collect();
    let none = second_moment(&sf, 1.0, &[], 5.0, 0, 10, &gs).unwrap();
    assert!((none - (11.0 + 110.0 * 0.8)).abs() < 1e-12);
    // a wall that has swept past the whole block leaves the moment unchanged
    let past = [Excitation { position: -0.5, time: 0.0 }];
    let v = second_moment(&sf, 1.0, &past, 1000.0, 0, 10, &gs).unwrap();
    assert!(v < none && (none - v) / none < 0.02);
}

#[test]
fn magnetization_plateau() {
    for h in [0.2, 0.5, 0.8] {
        let m = ground_magnetization(&ChainModel::ising(h)).unwrap();
        assert!((m - (1.0 - h * h).powf(0.125)).abs() < 1e-10, "h={h}: {m}");
    }
    assert!(ground_magnetization(&ChainModel::ising(1.5)).is_err());
}

#[test]
fn quench_correlator_examples() {
    let q = QuenchPair::ising(0.0, 0.4);
    let qe = QuenchEnsemble::ising(&q).unwrap();
    let m0 = qe.m0();
    assert_eq!(quench_correlators(&qe, 0.0, 0.0, 5.0), (m0, m0 * m0));
    let flat = QuenchEnsemble::new(|_| 0.0, |k| k.sin(), 0.7).unwrap();
    let (one, two) = quench_correlators(&flat, 9.0, 0.0, 4.0);
    assert!((one - 0.7).abs() < 1e-15 && (two - 0.49).abs() < 1e-15);
    assert!(ising_rate(&q, 0.0).unwrap() == 0.0);
    // one-point decay at the exact rate ν_x(∞)/2, two-point at ν_x(d/t)
    for t in [2.0, 7.5, 20.0] {
        let (one, _) = quench_correlators(&qe, t, 0.0, 0.0);
        let nu_inf = ising_rate(&q, 10.0).unwrap();
        assert!(((m0 / one).ln() / t - 0.5 * nu_inf).abs() < 1e-8);
        for d in [1.0, 8.0, 30.0] {
            let (_, two) = quench_correlators(&qe, t, 0.0, d);
            let want = q.c_ff().unwrap() * (-t * ising_rate(&q, d / t).unwrap()).exp();
            assert!((two - want).abs() < 1e-8 * want);
        }
    }
}

#[test]
fn quench_correlators_follow_gaussian_numerics() {
    let q = QuenchPair::ising(0.0, 0.4);
    let qe = QuenchEnsemble::ising(&q).unwrap();
    for t in [10.0, 20.0] {
        let g = quench_correlations(&q, t, 31);
        for d in [16usize, 30] {
            let sim = g.two_point_x(0, d).unwrap();
            let sc = quench_correlators(&qe, t, 0.0, d as f64).1;
            assert!((sim / sc - 1.0).abs() < 0.01, "t={t} d={d}: {sim} vs {sc}");
        }
    }
}

#[test]
fn correlator_formula_examples() {
    let m0 = 0.8;
    let flat = Array2::from_elem((12, 12), m0 * m0);
    assert!(quench_chi_from_correlators(&flat).unwrap().abs() < 1e-15);
    let f: Vec<f64> = (0..12).map(|i| 0.5 + 0.03 * i as f64).collect();
    let fact = Array2::from_shape_fn((12, 12), |(i, j)| f[i] * f[j]);
    assert!(quench_chi_from_correlators(&fact).unwrap().abs() < 1e-14);
    let mut zero = flat.clone();
    zero[[0, 11]] = 0.0;
    assert!(matches!(quench_chi_from_correlators(&zero), Err(Error::PredictionUndefined)));
}

#[test]
fn correlator_formula_is_linear_in_the_table() {
    let qe = QuenchEnsemble::ising(&QuenchPair::ising(0.0, 0.4)).unwrap();
    let g = quench_two_point_table(&qe, 12.0, 16);
    let base = quench_qfi_from_correlators(&g).unwrap();
    for c in [0.3, 2.5] {
        let scaled = quench_qfi_from_correlators(&(&g * c)).unwrap();
        assert!((scaled - c * base).abs() < 1e-12 * base.abs().max(1.0));
    }
}

#[test]
fn asymptotic_formula_without_quench_vanishes() {
    for h in [0.2, 0.5] {
        let q = QuenchPair::ising(h, h);
        assert!((q.c_ff().unwrap() - (1.0 - h * h).powf(0.25)).abs() < 1e-15);
        assert!(ising_rate(&q, 0.7).unwrap().abs() < 1e-15);
        assert!(quench_chi_asymptotic(&q, 20, 15.0).unwrap().abs() < 1e-10);
    }
    assert!(matches!(quench_chi_asymptotic(&QuenchPair::ising(0.3, 1.4), 10, 5.0), Err(Error::Domain(_))));
}

#[test]
fn asymptotic_formula_approaches_the_correlator_formula() {
    // the asymptotic form is the continuum limit of the unshifted sum; the
    // edge shift is an O(1/|A|) correction, so the gap closes with |A|
    let q = QuenchPair::ising(0.0, 0.4);
    let vbar = q.post.max_velocity();
    for ratio in [0.5, 1.0] {
        let mut gaps = Vec::new();
        for a_len in [32usize, 64, 128] {
            let t = ratio * a_len as f64 / vbar;
            let g = quench_correlations(&q, t, a_len + 2);
            let from_sim = quench_chi_from_correlators(&two_point_table(&g).unwrap()).unwrap();
            let asym = quench_chi_asymptotic(&q, a_len, t).unwrap();
            gaps.push((from_sim - asym).abs() / from_sim);
        }
        assert!(gaps[0] > gaps[1] && gaps[1] > gaps[2] && gaps[2] < 0.08, "v̄t/|A|={ratio}: {gaps:?}");
    }
}

proptest! {
    #[test]
    fn scaling_function_is_odd_and_monotone(z in -1.5f64..1.5, dz in 0.0f64..0.5) {
        for sf in [ScalingFunction::arcsin(), ScalingFunction::uniform(&ChainModel::ising(0.5)).unwrap()] {
            prop_assert!((sf.eval(z) + sf.eval(-z)).abs() < 1e-4);
            prop_assert!(sf.eval(z + dz) >= sf.eval(z) - 1e-15);
        }
    }

    #[test]
    fn conditional_profile_is_bounded(z in -2.0f64..2.0, zl in -1.5f64..1.0, w in 0.05f64..2.0) {
        let sf = ScalingFunction::arcsin();
        let zr = zl + w;
        let zc = z.clamp(zl, zr);
        if let Ok(v) = conditional_m(&sf, zc, zl, zr) {
            prop_assert!((-1.0 - 1e-12..=1.0 + 1e-12).contains(&v));
        }
    }
}
