//! Symbolic rules checked against explicit matrices.

mod common;

use cnc_qudit::clifford::{named_gate_unitary, CliffordElement, NamedGate};
use cnc_qudit::cnc::{MeasurementKind, PhasePoint};
use cnc_qudit::dense::{roots_of_unity, DenseCap, DenseOperator};
use cnc_qudit::pauli::{beta, eigenprojector, pauli_matrix, PhasedPauli};
use cnc_qudit::symplectic::{Subspace, SymplecticVector};
use common::*;
use num_complex::Complex64;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

const TOL: f64 = 1e-9;

fn cap() -> DenseCap {
    DenseCap::default()
}

fn phase(d: cnc_qudit::field::Modulus, k: u32) -> Complex64 {
    roots_of_unity(d)[(k % d.get()) as usize]
}

#[test]
fn pauli_products_follow_the_half_form_cocycle() {
    for (d, n) in [(3, 1), (5, 1), (7, 1), (3, 2)] {
        let d = modulus(d);
        let all = Subspace::full(d, n).elements();
        let id = DenseOperator::identity(d, n, cap()).unwrap();
        for a in &all {
            let ta = pauli_matrix(a, cap()).unwrap();
            assert!(ta.mul(&ta.adjoint()).approx_eq(&id, TOL));
            assert!(ta.adjoint().approx_eq(&pauli_matrix(&a.neg(), cap()).unwrap(), TOL));
            for b in all.iter().step_by(if n == 2 { 5 } else { 1 }) {
                let pa = PhasedPauli::new(1, a.clone());
                let pb = PhasedPauli::new(2, b.clone());
                let prod = pa.matrix(cap()).unwrap().mul(&pb.matrix(cap()).unwrap());
                assert!(prod.approx_eq(&pa.product(&pb).matrix(cap()).unwrap(), TOL));
                if a.form(b) == 0 {
                    assert_eq!(beta(a, b).unwrap().value(), 0);
                    let tab = pauli_matrix(&a.plus(b), cap()).unwrap();
                    assert!(ta.mul(&pauli_matrix(b, cap()).unwrap()).approx_eq(&tab, TOL));
                }
            }
        }
    }
}

#[test]
fn named_gates_conjugate_as_declared() {
    for (d, n) in [(3, 1), (3, 2), (5, 1), (5, 2)] {
        let d = modulus(d);
        let mut gates = Vec::new();
        for q in 0..n {
            gates.extend([NamedGate::F(q), NamedGate::P(q), NamedGate::XShift(q, 1), NamedGate::ZShift(q, 2)]);
        }
        if n == 2 {
            gates.extend([NamedGate::Sum(0, 1), NamedGate::Sum(1, 0)]);
        }
        let all = Subspace::full(d, n).elements();
        for gate in &gates {
            let g = CliffordElement::named(d, n, gate).unwrap();
            let u = named_gate_unitary(d, n, gate, cap()).unwrap();
            for a in &all {
                let (sa, ph) = g.conjugate(a).unwrap();
                let lhs = u.mul(&pauli_matrix(a, cap()).unwrap()).mul(&u.adjoint());
                let rhs = pauli_matrix(&sa, cap()).unwrap().scale(phase(d, ph));
                assert!(lhs.approx_eq(&rhs, TOL), "{gate:?} on {a}");
            }
        }
    }
}

#[test]
fn intertwiner_unitary_matches_gate_words() {
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    let d = modulus(3);
    let all = Subspace::full(d, 2).elements();
    for _ in 0..20 {
        let (g, u) = random_clifford(d, 2, 8, &mut rng);
        let v = g.unitary(cap()).unwrap();
        // equal up to a global phase
        let overlap = v.adjoint().mul(&u).trace() / v.dim() as f64;
        assert!((overlap.norm() - 1.0).abs() < 1e-9);
        assert!(v.scale(overlap).approx_eq(&u, 1e-9));
        for a in all.iter().step_by(7) {
            let (sa, ph) = g.conjugate(a).unwrap();
            let lhs = v.mul(&pauli_matrix(a, cap()).unwrap()).mul(&v.adjoint());
            assert!(lhs.approx_eq(&pauli_matrix(&sa, cap()).unwrap().scale(phase(d, ph)), TOL));
        }
    }
}

#[test]
fn phase_point_operators_are_hermitian_with_unit_trace() {
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    for (d, n) in [(3, 1), (3, 2), (5, 1)] {
        let d = modulus(d);
        for _ in 0..30 {
            let p = random_point(d, n, &mut rng);
            let a = p.operator(cap()).unwrap();
            assert!(a.is_hermitian(TOL));
            assert!((a.trace() - 1.0).norm() < TOL);
        }
    }
}

#[test]
fn clifford_covariance_of_phase_points() {
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    for (d, n) in [(3, 1), (3, 2), (5, 1)] {
        let d = modulus(d);
        for _ in 0..40 {
            let p = random_point(d, n, &mut rng);
            let (g, u) = random_clifford(d, n, 6, &mut rng);
            let q = g.act_on_phase_point(&p).unwrap();
            assert_eq!((p.form(), p.xi()), (q.form(), q.xi()));
            let lhs = u.mul(&p.operator(cap()).unwrap()).mul(&u.adjoint());
            assert!(lhs.approx_eq(&q.operator(cap()).unwrap(), TOL));
        }
    }
}

#[test]
fn wigner_points_move_affinely() {
    let mut rng = ChaCha8Rng::seed_from_u64(8);
    let d = modulus(5);
    for _ in 0..50 {
        let u = random_vector(d, 2, &mut rng);
        let (g, _) = random_clifford(d, 2, 5, &mut rng);
        let moved = g.act_on_phase_point(&PhasePoint::wigner(&u)).unwrap();
        assert_eq!(moved, PhasePoint::wigner(&g.act_on_wigner(&u)));
    }
}

#[test]
fn single_measurement_matches_projection() {
    let mut rng = ChaCha8Rng::seed_from_u64(9);
    for (d, n) in [(3, 1), (3, 2), (5, 1)] {
        let d = modulus(d);
        for _ in 0..60 {
            let p = random_point(d, n, &mut rng);
            let a = random_nonzero(d, n, &mut rng);
            let op = p.operator(cap()).unwrap();
            let kind = p.measurement_kind(&a).unwrap();
            for s in 0..d.get() {
                let proj = eigenprojector(&a, s, cap()).unwrap();
                let prob = proj.trace_product(&op);
                let expected = match kind {
                    MeasurementKind::Deterministic(v) => (v == s) as u32 as f64,
                    MeasurementKind::Uniform => 1.0 / d.get() as f64,
                };
                assert!((prob - expected).norm() < TOL, "Born rule for {a}, s = {s}");
                if expected > 0.0 {
                    let next = p.post_measurement(&a, s).unwrap();
                    assert!(next.generator_count() <= 2 * n + p.xi());
                    assert!(next.xi() <= p.xi() || p.xi() == 0 && next.xi() == 0);
                    let lhs = proj.mul(&op).mul(&proj).scale(Complex64::new(1.0 / expected, 0.0));
                    assert!(lhs.approx_eq(&next.operator(cap()).unwrap(), TOL));
                } else {
                    assert!(p.post_measurement(&a, s).is_err());
                }
            }
        }
    }
}

#[test]
fn isotropic_projection_matches_dense_and_sequential_updates() {
    let mut rng = ChaCha8Rng::seed_from_u64(10);
    for (d, n) in [(3, 1), (3, 2), (5, 2)] {
        let d = modulus(d);
        for _ in 0..60 {
            let p = random_point(d, n, &mut rng);
            let dim = rng.gen_range(1..=n);
            let r = random_outcome(d, n, dim, &mut rng);
            let op = p.operator(cap()).unwrap();
            let proj = r.projector(cap()).unwrap();
            let upd = p.project_isotropic(&r).unwrap();
            let prob = proj.trace_product(&op);
            assert!((prob.re - upd.probability_f64()).abs() < TOL && prob.im.abs() < TOL);
            match &upd.point {
                None => assert!(upd.probability_f64() == 0.0),
                Some(q) => {
                    let lhs = proj.mul(&op).mul(&proj).scale(Complex64::new(1.0 / prob.re, 0.0));
                    assert!(lhs.approx_eq(&q.operator(cap()).unwrap(), TOL));
                    // one measurement per basis vector reaches the same point
                    let mut seq = p.clone();
                    for b in r.subspace().basis() {
                        seq = seq.post_measurement(&b, r.value(&b).unwrap()).unwrap();
                    }
                    assert_eq!(&seq, q);
                }
            }
        }
    }
}

use rand::Rng;

#[test]
fn wigner_points_are_orthogonal() {
    let d = modulus(3);
    let all = Subspace::full(d, 1).elements();
    let ops: Vec<_> = all.iter().map(|u| PhasePoint::wigner(u).operator(cap()).unwrap()).collect();
    for (i, a) in ops.iter().enumerate() {
        for (j, b) in ops.iter().enumerate() {
            let expected = if i == j { 3.0 } else { 0.0 };
            assert!((a.trace_product(b) - expected).norm() < TOL);
        }
    }
    let _ = SymplecticVector::zero(d, 1);
}
