//! Both samplers against the dense Born-rule oracle.

mod common;

use cnc_qudit::circuit::{Circuit, Gate};
use cnc_qudit::clifford::NamedGate;
use cnc_qudit::cnc::{MeasurementKind, PhasePoint};
use cnc_qudit::dense::DenseCap;
use cnc_qudit::enumerate::{enumerate_phase_points, EnumerationCaps};
use cnc_qudit::oracle::{joint_distribution, joint_distribution_of_operator, tv_distance, DensityState, OracleCaps};
use cnc_qudit::pauli::{eigenprojector, OutcomeAssignment};
use cnc_qudit::simulate::{empirical_distribution, run_cnc, run_wigner, Ensemble, WignerDistribution};
use cnc_qudit::symplectic::{Subspace, SymplecticVector};
use cnc_qudit::Error;
use common::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

#[test]
fn born_probabilities_match_update_rule_for_every_qutrit_point() {
    let d = modulus(3);
    let cap = DenseCap::default();
    let points = enumerate_phase_points(1, d, &EnumerationCaps::new(1, d)).unwrap();
    let labels: Vec<_> = Subspace::full(d, 1).elements().into_iter().filter(|a| !a.is_zero()).collect();
    let projs: Vec<Vec<_>> = labels
        .iter()
        .map(|a| (0..3).map(|s| eigenprojector(a, s, cap).unwrap()).collect())
        .collect();
    for p in &points {
        let op = p.operator(cap).unwrap();
        for (a, pa) in labels.iter().zip(&projs) {
            for (s, proj) in pa.iter().enumerate() {
                let expected = match p.measurement_kind(a).unwrap() {
                    MeasurementKind::Deterministic(v) => (v == s as u32) as u8 as f64,
                    MeasurementKind::Uniform => 1.0 / 3.0,
                };
                assert!((proj.trace_product(&op).re - expected).abs() < 1e-9);
            }
        }
    }
}

/// Exact laws of both algorithms against the oracle on many random circuits.
#[test]
fn exact_simulator_laws_equal_born_distributions() {
    let mut rng = ChaCha8Rng::seed_from_u64(21);
    let caps = OracleCaps::default();
    for (d, n, rounds) in [(3, 1, 60), (3, 2, 120), (5, 1, 40)] {
        let d = modulus(d);
        for _ in 0..rounds {
            let circuit = random_circuit(d, n, rng.gen_range(1..=6), 4, &mut rng);
            let p = random_point(d, n, &mut rng);
            let oracle = joint_distribution_of_operator(&p.operator(caps.dense).unwrap(), &circuit, caps).unwrap();
            let law = exact_cnc_law(&p, &circuit);
            assert!(tv_distance(&oracle, &law).unwrap() < 1e-9, "{circuit:?} on {p:?}");

            let u = random_vector(d, n, &mut rng);
            let w = PhasePoint::wigner(&u).operator(caps.dense).unwrap();
            let oracle = joint_distribution_of_operator(&w, &circuit, caps).unwrap();
            assert!(tv_distance(&oracle, &exact_wigner_law(&u, &circuit)).unwrap() < 1e-9);
            assert!(tv_distance(&oracle, &exact_cnc_law(&PhasePoint::wigner(&u), &circuit)).unwrap() < 1e-9);
        }
    }
}

#[test]
fn computational_basis_input_measures_zero() {
    let d = modulus(3);
    let mut c = Circuit::new(d, 2).unwrap();
    c.push_measure(SymplecticVector::e(d, 2, 0), "z0").unwrap();
    c.push_measure(SymplecticVector::e(d, 2, 1), "z1").unwrap();
    let zero = SymplecticVector::zero(d, 2);
    let w = run_wigner(&WignerDistribution::point_mass(zero.clone()), &c, 1, 500).unwrap();
    assert!(w.iter().all(|r| r.outcomes == [0, 0]));
    let stab = OutcomeAssignment::new(
        d,
        2,
        &[(SymplecticVector::e(d, 2, 0), 0), (SymplecticVector::e(d, 2, 1), 0)],
    )
    .unwrap();
    let e = Ensemble::point_mass(PhasePoint::stabilizer(&stab).unwrap());
    let r = run_cnc(&e, &c, 1, 500).unwrap();
    assert!(r.iter().all(|r| r.outcomes == [0, 0]));
    let rho = DensityState::stabilizer_zero(d, 2, DenseCap::default()).unwrap();
    let oracle = joint_distribution(&rho, &c, OracleCaps::default()).unwrap();
    assert_eq!(oracle.len(), 1);
    assert!((oracle[&vec![0, 0]] - 1.0).abs() < 1e-12);
}

#[test]
fn feed_forward_copies_an_outcome() {
    // measure X on qudit 0, then shift qudit 1 by the outcome and read it out
    let d = modulus(3);
    let n = 2;
    let mut c = Circuit::new(d, n).unwrap();
    c.push_measure(SymplecticVector::f(d, n, 0), "m").unwrap();
    for k in 1..3 {
        let g = Gate::named(d, n, NamedGate::XShift(1, k)).unwrap();
        c.push_cond_gate(&[("m", 1)], -(k as i64), g).unwrap();
    }
    c.push_measure(SymplecticVector::e(d, n, 1), "copy").unwrap();
    let rho = DensityState::stabilizer_zero(d, n, DenseCap::default()).unwrap();
    let oracle = joint_distribution(&rho, &c, OracleCaps::default()).unwrap();
    assert_eq!(oracle.len(), 3);
    for (k, p) in &oracle {
        assert_eq!(k[0], k[1]);
        assert!((p - 1.0 / 3.0).abs() < 1e-12);
    }
    let stab = OutcomeAssignment::new(
        d,
        n,
        &[(SymplecticVector::e(d, n, 0), 0), (SymplecticVector::e(d, n, 1), 0)],
    )
    .unwrap();
    let start = PhasePoint::stabilizer(&stab).unwrap();
    assert!(tv_distance(&oracle, &exact_cnc_law(&start, &c)).unwrap() < 1e-12);
    let shots = run_cnc(&Ensemble::point_mass(start), &c, 9, 3000).unwrap();
    assert!(shots.iter().all(|r| r.outcome(&c, "m") == r.outcome(&c, "copy")));
    let emp = empirical_distribution(&shots);
    assert!(tv_distance(&oracle, &emp).unwrap() < 0.05);
    let shots = run_wigner(&WignerDistribution::point_mass(SymplecticVector::zero(d, n)), &c, 9, 3000).unwrap();
    assert!(shots.iter().all(|r| r.outcomes[0] == r.outcomes[1]));
}

#[test]
fn conjugated_inputs_give_relabelled_runs() {
    let mut rng = ChaCha8Rng::seed_from_u64(4);
    let d = modulus(3);
    for _ in 0..10 {
        let p = random_point(d, 2, &mut rng);
        let q = random_point(d, 2, &mut rng);
        let (g, _) = random_clifford(d, 2, 6, &mut rng);
        let circuit = random_circuit(d, 2, 5, 3, &mut rng);
        let e = Ensemble::new(vec![(p.clone(), 0.25), (q.clone(), 0.75)]).unwrap();
        let moved = Ensemble::new(vec![
            (g.act_on_phase_point(&p).unwrap(), 0.25),
            (g.act_on_phase_point(&q).unwrap(), 0.75),
        ])
        .unwrap();
        // undo g first, then run the original circuit
        let mut undone = Circuit::new(d, 2).unwrap();
        undone.push_gate(Gate::raw(g.inverse())).unwrap();
        for ins in circuit.instructions() {
            match ins {
                cnc_qudit::circuit::Instruction::Gate(h) => {
                    undone.push_gate(h.clone()).unwrap();
                }
                cnc_qudit::circuit::Instruction::Measure { label, var } => {
                    undone.push_measure(label.clone(), var.clone()).unwrap();
                }
                cnc_qudit::circuit::Instruction::CondGate { condition, gate } => {
                    let names: Vec<(String, i64)> = condition
                        .terms()
                        .iter()
                        .map(|&(i, c)| (circuit.variable(i).to_string(), c as i64))
                        .collect();
                    let refs: Vec<(&str, i64)> = names.iter().map(|(s, c)| (s.as_str(), *c)).collect();
                    undone
                        .push_cond_gate(&refs, condition.constant() as i64, gate.clone())
                        .unwrap();
                }
            }
        }
        let a = run_cnc(&e, &circuit, 77, 300).unwrap();
        let b = run_cnc(&moved, &undone, 77, 300).unwrap();
        assert_eq!(a, b);
    }
}

#[test]
fn simulators_refuse_bad_inputs() {
    let d = modulus(3);
    let c = Circuit::new(d, 2).unwrap();
    let e = Ensemble::point_mass(PhasePoint::maximally_mixed(d, 1));
    assert!(matches!(run_cnc(&e, &c, 0, 1), Err(Error::DimensionMismatch { .. })));
    let p = PhasePoint::maximally_mixed(d, 2);
    assert!(matches!(
        Ensemble::new(vec![(p.clone(), 1.2), (p.clone(), -0.2)]),
        Err(Error::NegativeWeight(_))
    ));
    assert_eq!(
        WignerDistribution::from_ensemble(&Ensemble::point_mass(p)).unwrap_err(),
        Error::NotWignerPoint
    );
}

#[test]
fn long_trajectories_never_grow_the_point() {
    let mut rng = ChaCha8Rng::seed_from_u64(12);
    let d = modulus(3);
    for _ in 0..50 {
        let p = random_point(d, 2, &mut rng);
        let circuit = random_circuit(d, 2, 20, 12, &mut rng);
        for r in run_cnc(&Ensemble::point_mass(p.clone()), &circuit, 5, 20).unwrap() {
            assert!(r.final_point.xi() <= p.xi());
            assert!(r.final_point.generator_count() <= 4 + p.xi());
        }
    }
}
