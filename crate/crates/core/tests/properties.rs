use std::f64::consts::SQRT_2;

use num_complex::Complex64;
use proptest::prelude::*;

use histcorr::bell::{chained_bell, s_lgi, temporal_correlator, CorrelatorSpec};
use histcorr::histories::{
    chain_operator_sum, decoherence_functional, exhaustive_family, is_consistent_family, purity,
    temporal_partial_trace, to_trivial_bridging, weight,
};
use histcorr::linalg::{dagger, hermitian_eigen, kron, partial_trace, qubit, trace};
use histcorr::twostate::{
    abl_probability, coherent_bundle_probability, history_bundle, maximally_mixed,
    mixed_sequence_distribution, sequence_distribution,
};
use histcorr::{
    BridgingSet, ComplexMatrix, HistoryState, Ket, MeasurementSetting, OutcomeString, Sign,
    TimeGrid, TwoTimeExperiment,
};

const TOL: f64 = 1e-9;

fn entry() -> impl Strategy<Value = Complex64> {
    (-1.0..1.0f64, -1.0..1.0f64).prop_map(|(re, im)| Complex64::new(re, im))
}

fn matrix(rows: usize, cols: usize) -> impl Strategy<Value = ComplexMatrix> {
    prop::collection::vec(entry(), rows * cols)
        .prop_map(move |d| ComplexMatrix::new(rows, cols, d).unwrap())
}

fn square() -> impl Strategy<Value = ComplexMatrix> {
    (1usize..4).prop_flat_map(|d| matrix(d, d))
}

fn angles() -> impl Strategy<Value = (f64, f64)> {
    (
        0.0..std::f64::consts::PI,
        -std::f64::consts::PI..std::f64::consts::PI,
    )
}

fn setting() -> impl Strategy<Value = MeasurementSetting> {
    angles().prop_map(|(t, p)| MeasurementSetting::bloch(t, p))
}

fn qubit_ket() -> impl Strategy<Value = Ket> {
    angles().prop_map(|(t, p)| {
        Ket::new(vec![
            Complex64::new((t / 2.0).cos(), 0.0),
            Complex64::from_polar((t / 2.0).sin(), p),
        ])
        .unwrap()
    })
}

/// `e^{iγ}(cos a·I − i sin a·n·σ)`.
fn unitary() -> impl Strategy<Value = ComplexMatrix> {
    (angles(), -3.0..3.0f64, -3.0..3.0f64).prop_map(|((t, p), a, g)| {
        let n = qubit::bloch_observable(t, p);
        let u = &ComplexMatrix::identity(2).scale(Complex64::new(a.cos(), 0.0))
            - &n.scale(Complex64::new(0.0, a.sin()));
        u.scale(Complex64::from_polar(1.0, g))
    })
}

/// Random qubit density matrix with Bloch radius ≤ 1.
fn density() -> impl Strategy<Value = ComplexMatrix> {
    (angles(), 0.0..1.0f64).prop_map(|((t, p), r)| {
        let n = qubit::bloch_observable(t, p).scale(Complex64::new(r, 0.0));
        (&ComplexMatrix::identity(2) + &n).scale(Complex64::new(0.5, 0.0))
    })
}

fn projector_slot() -> impl Strategy<Value = ComplexMatrix> {
    qubit_ket().prop_map(|k| ComplexMatrix::projector(&k))
}

fn history(slots: usize, terms: usize) -> impl Strategy<Value = HistoryState> {
    prop::collection::vec(
        (entry(), prop::collection::vec(projector_slot(), slots)),
        1..=terms,
    )
    .prop_map(|t| HistoryState::from_slot_strings(t).unwrap())
    .prop_filter("non-zero history", |h| !h.is_zero() && h.norm_sqr() > 1e-6)
}

fn bridging(slots: usize) -> impl Strategy<Value = BridgingSet> {
    prop::collection::vec(unitary(), slots - 1)
        .prop_map(move |us| BridgingSet::new(TimeGrid::uniform(slots, 2).unwrap(), us).unwrap())
}

fn complement(p: &ComplexMatrix) -> Vec<ComplexMatrix> {
    vec![p.clone(), &ComplexMatrix::identity(p.rows()) - p]
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn kron_is_associative(a in square(), b in square(), c in square()) {
        let left = kron(&kron(&a, &b), &c);
        let right = kron(&a, &kron(&b, &c));
        prop_assert!(left.approx_eq(&right, 1e-12));
    }

    #[test]
    fn trace_is_cyclic((a, b) in (1usize..4, 1usize..4).prop_flat_map(|(m, n)| (matrix(m, n), matrix(n, m)))) {
        let ab = trace(&(&a * &b)).unwrap();
        let ba = trace(&(&b * &a)).unwrap();
        prop_assert!((ab - ba).norm() < 1e-12);
    }

    #[test]
    fn partial_trace_of_product(a in matrix(2, 2), b in matrix(3, 3)) {
        let ab = kron(&a, &b);
        let keep_a = partial_trace(&ab, &[2, 3], &[0]).unwrap();
        let keep_b = partial_trace(&ab, &[2, 3], &[1]).unwrap();
        prop_assert!(keep_a.approx_eq(&a.scale(trace(&b).unwrap()), 1e-12));
        prop_assert!(keep_b.approx_eq(&b.scale(trace(&a).unwrap()), 1e-12));
        prop_assert!((trace(&keep_a).unwrap() - trace(&ab).unwrap()).norm() < 1e-12);
    }

    #[test]
    fn dagger_is_an_involution(a in square(), b in square()) {
        prop_assert_eq!(dagger(&dagger(&a)), a.clone());
        if a.cols() == b.rows() {
            prop_assert!(dagger(&(&a * &b)).approx_eq(&(&dagger(&b) * &dagger(&a)), 1e-12));
        }
    }

    #[test]
    fn eigen_reconstructs_hermitian(a in square()) {
        let h = (&a + &dagger(&a)).scale(Complex64::new(0.5, 0.0));
        let d = h.rows();
        let mut back = ComplexMatrix::zeros(d, d);
        for (l, v) in hermitian_eigen(&h).unwrap() {
            let k = Ket::new(v).unwrap();
            back = &back + &ComplexMatrix::outer(&k, &k).scale(Complex64::new(l, 0.0));
        }
        prop_assert!(back.approx_eq(&h, 1e-9));
    }

    #[test]
    fn chain_operator_is_linear(h1 in history(3, 2), h2 in history(3, 2), b in bridging(3), x in entry(), y in entry()) {
        let combined = HistoryState::combine(&[(x, &h1), (y, &h2)]).unwrap();
        let k = if combined.is_zero() {
            ComplexMatrix::zeros(2, 2)
        } else {
            chain_operator_sum(&combined, &b).unwrap()
        };
        let want = &chain_operator_sum(&h1, &b).unwrap().scale(x) + &chain_operator_sum(&h2, &b).unwrap().scale(y);
        prop_assert!(k.approx_eq(&want, 1e-9));
    }

    #[test]
    fn trivial_rewrite_keeps_decoherence(h1 in history(3, 2), h2 in history(3, 2), b in bridging(3)) {
        let (t1, tb) = to_trivial_bridging(&h1, &b).unwrap();
        let (t2, _) = to_trivial_bridging(&h2, &b).unwrap();
        let d = decoherence_functional(&h1, &h2, &b).unwrap();
        let dt = decoherence_functional(&t1, &t2, &tb).unwrap();
        prop_assert!((d - dt).norm() < TOL);
    }

    #[test]
    fn weight_is_unitarily_invariant(h in history(3, 2), b in bridging(3), v in unitary()) {
        let vd = dagger(&v);
        let rotated = h.map_slots(|_, op| Ok(&(&v * op) * &vd)).unwrap();
        let us: Vec<_> = b.unitaries().iter().map(|u| &(&v * u) * &vd).collect();
        let rb = BridgingSet::new(b.grid().clone(), us).unwrap();
        let w = weight(&h, &b).unwrap();
        prop_assert!(w >= 0.0);
        prop_assert!((w - weight(&rotated, &rb).unwrap()).abs() < TOL);
    }

    #[test]
    fn two_slot_families_are_consistent_and_additive(p in projector_slot(), q in projector_slot(), b in bridging(2)) {
        let grid = b.grid().clone();
        let family = exhaustive_family(&grid, &[complement(&p), complement(&q)]).unwrap();
        let report = is_consistent_family(&family, &b, TOL).unwrap();
        prop_assert!(report.consistent);
        let parts: Vec<_> = family.iter().map(|h| (Complex64::new(1.0, 0.0), h)).collect();
        let whole = HistoryState::combine(&parts).unwrap();
        let total: f64 = report.weights().iter().sum();
        prop_assert!((weight(&whole, &b).unwrap() - total).abs() < TOL);
        prop_assert!((total - 2.0).abs() < TOL);
    }

    #[test]
    fn temporal_partial_trace_is_a_state(h in history(3, 3), keep in prop::sample::subsequence(vec![0usize, 1, 2], 1..3)) {
        let m = temporal_partial_trace(&h, &keep).unwrap();
        let probs = m.probabilities();
        prop_assert!(probs.iter().all(|p| *p > 0.0));
        prop_assert!((probs.iter().sum::<f64>() - 1.0).abs() < TOL);
        for (_, member) in m.ensemble() {
            prop_assert!((member.norm_sqr() - 1.0).abs() < TOL);
        }
        let pur = purity(&m);
        prop_assert!(pur <= 1.0 + TOL && pur >= 1.0 / probs.len() as f64 - TOL);
        let (a, b) = (&m.ensemble()[0].1, &m.ensemble()[probs.len() - 1].1);
        prop_assert!((m.matrix_element(a, b).unwrap() - m.matrix_element(b, a).unwrap().conj()).norm() < TOL);
    }

    #[test]
    fn correlator_closed_form_at_maximal_mixing(a in setting(), b in setting()) {
        let e = temporal_correlator(&maximally_mixed(2), &a, &ComplexMatrix::identity(2), &b).unwrap();
        let want = 0.5 * trace(&(a.observable() * b.observable())).unwrap().re;
        prop_assert!((e - want).abs() < 1e-12);
    }

    #[test]
    fn correlator_is_covariant(rho in density(), a in setting(), b in setting(), u in unitary(), v in unitary()) {
        let e = temporal_correlator(&rho, &a, &u, &b).unwrap();
        let rotated = temporal_correlator(
            &rho.conjugate_by(&v).unwrap(),
            &a.conjugated(&v).unwrap(),
            &u.conjugate_by(&v).unwrap(),
            &b.conjugated(&v).unwrap(),
        )
        .unwrap();
        prop_assert!((e - rotated).abs() < TOL);
    }

    #[test]
    fn correlator_exchange_symmetry(a in setting(), b in setting()) {
        let (rho, id) = (maximally_mixed(2), ComplexMatrix::identity(2));
        let ab = temporal_correlator(&rho, &a, &id, &b).unwrap();
        let ba = temporal_correlator(&rho, &b, &id, &a).unwrap();
        prop_assert!((ab - ba).abs() < 1e-12);
    }

    #[test]
    fn tsirelson_ceiling(rho in density(), u in unitary(), s in prop::collection::vec(setting(), 4)) {
        let mut spec = CorrelatorSpec::new(rho, [s[0].clone(), s[1].clone()], [s[2].clone(), s[3].clone()]);
        spec.interval_unitaries = vec![u];
        let r = s_lgi(&spec).unwrap();
        prop_assert!(r.value.abs() <= 2.0 * SQRT_2 + 1e-12);
    }

    #[test]
    fn chained_sum_is_n_blocks(n in 1usize..7, s in prop::collection::vec(setting(), 4)) {
        let settings = vec![[s[0].clone(), s[1].clone()], [s[2].clone(), s[3].clone()]];
        let r = chained_bell(n, &settings, &maximally_mixed(2), &ComplexMatrix::identity(2)).unwrap();
        prop_assert_eq!(r.values.len(), n);
        prop_assert!((r.sum - n as f64 * r.values[0]).abs() < TOL);
        prop_assert!(r.sum <= r.bound + 1e-12);
    }

    #[test]
    fn pure_and_mixed_engines_agree(pre in qubit_ket(), s in prop::collection::vec(setting(), 3), us in prop::collection::vec(unitary(), 4)) {
        let slots: Vec<_> = s.into_iter().map(Some).collect();
        let exp = TwoTimeExperiment::new(pre.clone(), None, slots.clone(), us.clone()).unwrap();
        let pure = sequence_distribution(&exp).unwrap();
        let mixed = mixed_sequence_distribution(&pre.density(), &slots, &us, None).unwrap();
        for (k, p) in pure.table() {
            prop_assert!((p - mixed.table()[k]).abs() < TOL);
        }
    }

    #[test]
    fn single_slot_sequence_is_abl(pre in qubit_ket(), post in qubit_ket(), s in setting(), us in prop::collection::vec(unitary(), 2)) {
        let exp = TwoTimeExperiment::new(pre, Some(post), vec![Some(s)], us).unwrap();
        match sequence_distribution(&exp) {
            Ok(d) => {
                let p = abl_probability(&exp, 0, Sign::Plus).unwrap();
                prop_assert!((d.probability("+").unwrap() - p).abs() < TOL);
            }
            Err(e) => {
                let impossible = matches!(e, histcorr::Error::ImpossiblePostselection { .. });
                prop_assert!(impossible, "{}", e);
            }
        }
    }

    #[test]
    fn bundle_weights_match(pre in qubit_ket(), post in prop::option::of(qubit_ket()), s in prop::collection::vec(setting(), 2), us in prop::collection::vec(unitary(), 3)) {
        let exp = TwoTimeExperiment::new(pre, post, s.into_iter().map(Some).collect(), us).unwrap();
        if let Ok(bundle) = history_bundle(&exp) {
            prop_assert!(bundle.max_weight_deviation().unwrap() < TOL);
        }
    }

    #[test]
    fn coherent_probabilities_normalize(h in history(3, 2), s in prop::collection::vec(setting(), 2)) {
        let b = BridgingSet::trivial(h.grid()).unwrap();
        let measured = vec![(1, s[0].clone()), (2, s[1].clone())];
        let mut total = 0.0;
        for k in OutcomeString::all(2) {
            match coherent_bundle_probability(&h, &b, &measured, &k) {
                Ok(c) => total += c.probability,
                Err(_) => return Ok(()),
            }
        }
        prop_assert!((total - 1.0).abs() < TOL);
    }

    #[test]
    fn coherent_matches_collapse_on_eigenstates((t, p) in angles()) {
        // pre is an eigenstate of the repeated setting, so every reading is deterministic
        let s = MeasurementSetting::bloch(t, p);
        let pre = ComplexMatrix::projector(&Ket::new(vec![
            Complex64::new((t / 2.0).cos(), 0.0),
            Complex64::from_polar((t / 2.0).sin(), p),
        ]).unwrap());
        let id = ComplexMatrix::identity(2);
        let h = HistoryState::from_slot_strings(vec![(Complex64::new(1.0, 0.0), vec![pre.clone(), id.clone(), id])]).unwrap();
        let b = BridgingSet::trivial(h.grid()).unwrap();
        let measured = vec![(1, s.clone()), (2, s.clone())];
        let coherent = coherent_bundle_probability(&h, &b, &measured, &"++".parse().unwrap()).unwrap();
        let collapse = mixed_sequence_distribution(&pre, &[Some(s.clone()), Some(s)], &[], None).unwrap();
        prop_assert!((coherent.probability - collapse.probability("++").unwrap()).abs() < TOL);
    }
}
