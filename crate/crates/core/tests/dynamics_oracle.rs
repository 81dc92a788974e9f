use ndarray::Array2;
use num_complex::Complex64 as C64;
use proptest::prelude::*;
use qfi_core::dynamics::{
    apply_kick, apply_majorana, apply_spin_flip, run_schedule, Evolver, KickEvent, KickKind, KickSchedule,
};
use qfi_core::gaussian::{finite_chain_correlations, ground_state_correlations, Boundary, CorrelationMatrix};
use qfi_core::oracle::{self, DenseState, EdBoundary, Pauli};
use qfi_core::ChainModel;

fn max_diff(a: &Array2<C64>, b: &Array2<C64>) -> f64 {
    a.iter().zip(b.iter()).fold(0.0, |m, (x, y)| m.max((x - y).norm()))
}

fn kick_operator(l: usize, kind: KickKind, j: usize) -> Array2<C64> {
    match kind {
        KickKind::SpinFlip => oracle::pauli_string(l, &[(j, Pauli::Z)]),
        KickKind::MajoranaOdd => oracle::majorana_operators(l)[2 * j].clone(),
        KickKind::MajoranaEven => oracle::majorana_operators(l)[2 * j + 1].clone(),
        KickKind::SigmaXString => oracle::pauli_string(l, &[(j, Pauli::X)]),
    }
}

fn ed_pair(model: &ChainModel, l: usize, beta: f64) -> (CorrelationMatrix, DenseState, Array2<C64>) {
    let g = finite_chain_correlations(model, l, beta, Boundary::Open).unwrap();
    let rho = oracle::thermal(model, l, beta, EdBoundary::Open).unwrap();
    let h = oracle::model_hamiltonian(model, l, EdBoundary::Open).unwrap();
    (g, rho, h)
}

#[test]
fn kick_then_evolve_matches_exact_diagonalization() {
    let l = 8;
    for &(hf, beta) in &[(0.5, f64::INFINITY), (0.5, 2.0), (1.3, f64::INFINITY)] {
        let model = ChainModel::ising(hf);
        let (g, rho, h) = ed_pair(&model, l, beta);
        let ev = Evolver::new(&model, l).unwrap();
        for kind in [KickKind::SpinFlip, KickKind::MajoranaOdd, KickKind::MajoranaEven, KickKind::SigmaXString] {
            let j = 3;
            let gk = apply_kick(&g, kind, j).unwrap();
            let rk = oracle::apply_unitary(&rho, &kick_operator(l, kind, j)).unwrap();
            for &t in &[0.0, 0.7, 2.5, 4.0] {
                let gt = ev.evolve(&gk, t).unwrap();
                let rt = oracle::evolve_exact(&rk, &h, t).unwrap();
                let d = max_diff(gt.data(), &oracle::majorana_correlations(&rt));
                assert!(d < 1e-7, "h={hf} β={beta} {kind:?} t={t}: {d:e}");
            }
        }
    }
}

#[test]
fn schedule_matches_exact_sequence() {
    let l = 8;
    let model = ChainModel::new(0.6, 0.8);
    let (g, rho, h) = ed_pair(&model, l, 3.0);
    let ev = Evolver::new(&model, l).unwrap();
    let events = vec![
        KickEvent { time: 0.5, site: 2, kind: KickKind::SpinFlip },
        KickEvent { time: 1.5, site: 5, kind: KickKind::MajoranaOdd },
        KickEvent { time: 1.5, site: 4, kind: KickKind::SigmaXString },
    ];
    let sched = KickSchedule::new(events.clone(), 3.0).unwrap();
    let times = [0.5, 1.0, 1.5, 3.0];
    let out = run_schedule(&g, &ev, &sched, &times, 0).unwrap();
    let mut r = rho.clone();
    let mut now = 0.0;
    let mut pending = events.iter().peekable();
    for (ts, sample) in times.iter().zip(&out.samples) {
        while let Some(e) = pending.peek() {
            if e.time >= *ts {
                break;
            }
            r = oracle::evolve_exact(&r, &h, e.time - now).unwrap();
            now = e.time;
            r = oracle::apply_unitary(&r, &kick_operator(l, e.kind, e.site)).unwrap();
            pending.next();
        }
        r = oracle::evolve_exact(&r, &h, ts - now).unwrap();
        now = *ts;
        let d = max_diff(sample.data(), &oracle::majorana_correlations(&r));
        assert!(d < 1e-8, "t={ts}: {d:e}");
    }
}

#[test]
fn ground_state_window_is_stationary_in_the_bulk() {
    let model = ChainModel::ising(1.6);
    let g = ground_state_correlations(&model, 60);
    let ev = Evolver::new(&model, 60).unwrap();
    let gt = ev.evolve(&g, 2.0).unwrap();
    let a = g.restrict_sites(25..35).unwrap();
    let b = gt.restrict_sites(25..35).unwrap();
    assert!(max_diff(a.data(), b.data()) < 1e-8);
}

#[test]
fn rotation_is_orthogonal() {
    let ev = Evolver::new(&ChainModel::new(0.4, 0.7), 12).unwrap();
    let r = ev.rotation(3.3);
    let id = Array2::<f64>::eye(24);
    let e = (&r.dot(&r.t()) - &id).iter().fold(0.0_f64, |m, x| m.max(x.abs()));
    assert!(e < 1e-10);
}

#[test]
fn pure_state_stays_pure() {
    let model = ChainModel::ising(0.5);
    let g = ground_state_correlations(&model, 30);
    let g = apply_spin_flip(&g, 15).unwrap();
    let ev = Evolver::new(&model, 30).unwrap();
    let gt = ev.evolve(&g, 5.0).unwrap();
    let k = gt.defect().unwrap();
    let lhs = Array2::<C64>::eye(60) - gt.data().dot(gt.data());
    let rhs = k.dot(&k.t().mapv(|x| x.conj()));
    assert!(max_diff(&lhs, &rhs) < 1e-9);
}

#[test]
fn lightcone_overflow_is_reported() {
    let model = ChainModel::ising(0.5);
    let g = ground_state_correlations(&model, 20);
    let ev = Evolver::new(&model, 20).unwrap();
    let sched = KickSchedule::new(vec![KickEvent { time: 0.0, site: 10, kind: KickKind::SpinFlip }], 12.0).unwrap();
    let out = run_schedule(&g, &ev, &sched, &[1.0, 12.0], 4).unwrap();
    assert_eq!(out.warnings.len(), 1);
    assert_eq!(out.warnings[0].sample_time, 12.0);
}

#[test]
fn periodic_schedule_spacing() {
    let s = KickSchedule::periodic(3, KickKind::SpinFlip, 0.0, 2.5, 10.0).unwrap();
    let t: Vec<f64> = s.events().iter().map(|e| e.time).collect();
    assert_eq!(t, vec![0.0, 2.5, 5.0, 7.5, 10.0]);
    assert!(KickSchedule::periodic(3, KickKind::SpinFlip, 0.0, 0.0, 1.0).is_err());
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn kicks_are_involutive(h in -1.5f64..1.5, j in 0usize..10, kind in 0usize..4) {
        let g = ground_state_correlations(&ChainModel::ising(h), 10);
        let kind = [KickKind::SpinFlip, KickKind::MajoranaOdd, KickKind::MajoranaEven, KickKind::SigmaXString][kind];
        let twice = apply_kick(&apply_kick(&g, kind, j).unwrap(), kind, j).unwrap();
        prop_assert!(max_diff(g.data(), twice.data()) < 1e-15);
    }

    #[test]
    fn distant_kicks_commute(t in 0.0f64..3.0) {
        let model = ChainModel::ising(0.5);
        let g = ground_state_correlations(&model, 60);
        let ev = Evolver::new(&model, 60).unwrap();
        let a = ev.evolve(&apply_majorana(&apply_spin_flip(&g, 10).unwrap(), 100).unwrap(), t).unwrap();
        let b = ev.evolve(&apply_spin_flip(&apply_majorana(&g, 100).unwrap(), 10).unwrap(), t).unwrap();
        prop_assert!(max_diff(a.data(), b.data()) < 1e-8);
    }
}
