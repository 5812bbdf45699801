#![allow(dead_code)]

use cnc_qudit::circuit::{Circuit, Gate};
use cnc_qudit::clifford::{named_gate_unitary, CliffordElement, NamedGate};
use cnc_qudit::cnc::{random_phase_point, PhasePoint};
use cnc_qudit::dense::{DenseCap, DenseOperator};
use cnc_qudit::field::Modulus;
use cnc_qudit::pauli::OutcomeAssignment;
use cnc_qudit::symplectic::{Subspace, SymplecticVector};
use rand::Rng;

pub fn modulus(d: u32) -> Modulus {
    Modulus::new(d).unwrap()
}

pub fn random_vector<R: Rng>(d: Modulus, n: usize, rng: &mut R) -> SymplecticVector {
    let c: Vec<i64> = (0..2 * n).map(|_| rng.gen_range(0..d.get()) as i64).collect();
    SymplecticVector::new(d, &c).unwrap()
}

pub fn random_nonzero<R: Rng>(d: Modulus, n: usize, rng: &mut R) -> SymplecticVector {
    loop {
        let v = random_vector(d, n, rng);
        if !v.is_zero() {
            return v;
        }
    }
}

pub fn random_named_gate<R: Rng>(d: Modulus, n: usize, rng: &mut R) -> NamedGate {
    let q = rng.gen_range(0..n);
    let k = rng.gen_range(1..d.get());
    match rng.gen_range(0..if n > 1 { 5 } else { 4 }) {
        0 => NamedGate::F(q),
        1 => NamedGate::P(q),
        2 => NamedGate::XShift(q, k),
        3 => NamedGate::ZShift(q, k),
        _ => {
            let t = (q + rng.gen_range(1..n)) % n;
            NamedGate::Sum(q, t)
        }
    }
}

/// A random word in the named gates, as a symplectic element and as the
/// product of the explicit gate matrices.
pub fn random_clifford<R: Rng>(d: Modulus, n: usize, len: usize, rng: &mut R) -> (CliffordElement, DenseOperator) {
    let cap = DenseCap::default();
    let mut g = CliffordElement::identity(d, n);
    let mut u = DenseOperator::identity(d, n, cap).unwrap();
    for _ in 0..len {
        let gate = random_named_gate(d, n, rng);
        g = CliffordElement::named(d, n, &gate).unwrap().compose(&g).unwrap();
        u = named_gate_unitary(d, n, &gate, cap).unwrap().mul(&u);
    }
    (g, u)
}

/// Any phase point shape that exists for (d, n), chosen at random.
pub fn random_point<R: Rng>(d: Modulus, n: usize, rng: &mut R) -> PhasePoint {
    loop {
        let xi = if rng.gen_bool(0.3) { 0 } else { rng.gen_range(2..=d.get() as usize * n + 1) };
        let core_dim = if xi == 0 { rng.gen_range(0..=2 * n) } else { rng.gen_range(0..n) };
        if xi > 0 && xi > d.get() as usize * (n - core_dim) + 1 {
            continue;
        }
        // large cliques are rare under rejection sampling; cap the search
        if xi > 5 {
            continue;
        }
        return random_phase_point(d, n, core_dim, xi, rng).unwrap();
    }
}

/// Random isotropic subspace of the given dimension with a random linear
/// outcome function.
pub fn random_outcome<R: Rng>(d: Modulus, n: usize, dim: usize, rng: &mut R) -> OutcomeAssignment {
    let mut s = Subspace::zero(d, n);
    while s.dim() < dim {
        let perp = s.perp();
        let mut v = vec![0i64; 2 * n];
        for b in perp.basis() {
            let c = rng.gen_range(0..d.get()) as i64;
            for (x, y) in v.iter_mut().zip(b.coords()) {
                *x += c * *y as i64;
            }
        }
        s = s.with_vector(&SymplecticVector::new(d, &v).unwrap());
    }
    let pairs: Vec<_> = s.basis().into_iter().map(|b| (b, rng.gen_range(0..d.get()))).collect();
    OutcomeAssignment::new(d, n, &pairs).unwrap()
}

/// Random adaptive circuit with exactly `len` instructions, between 1 and
/// `max_meas` of them measurements. Gates are named gates or raw Clifford
/// words; once an outcome exists, gates may be conditioned on it.
pub fn random_circuit<R: Rng>(d: Modulus, n: usize, len: usize, max_meas: usize, rng: &mut R) -> Circuit {
    let meas = rng.gen_range(1..=max_meas.min(len));
    let mut slots: Vec<bool> = (0..len).map(|i| i < meas).collect();
    // shuffle, keeping at least one measurement
    for i in (1..len).rev() {
        slots.swap(i, rng.gen_range(0..=i));
    }
    let mut c = Circuit::new(d, n).unwrap();
    for is_meas in slots {
        if is_meas {
            let var = format!("m{}", c.measurement_count());
            c.push_measure(random_nonzero(d, n, rng), var).unwrap();
            continue;
        }
        let gate = if rng.gen_bool(0.7) {
            Gate::named(d, n, random_named_gate(d, n, rng)).unwrap()
        } else {
            Gate::raw(random_clifford(d, n, 4, rng).0)
        };
        if c.measurement_count() > 0 && rng.gen_bool(0.5) {
            let vars: Vec<String> = c.variables().to_vec();
            let k = rng.gen_range(1..=vars.len());
            let coeffs: Vec<(&str, i64)> = vars[..k]
                .iter()
                .map(|v| (v.as_str(), rng.gen_range(0..d.get()) as i64))
                .collect();
            let constant = rng.gen_range(0..d.get()) as i64;
            c.push_cond_gate(&coeffs, constant, gate).unwrap();
        } else {
            c.push_gate(gate).unwrap();
        }
    }
    c
}

/// Exact outcome law of the CNC simulator started at `p`: deterministic
/// measurements branch once, the others branch uniformly.
pub fn exact_cnc_law(p: &PhasePoint, circuit: &Circuit) -> cnc_qudit::simulate::Distribution {
    use cnc_qudit::circuit::Instruction;
    use cnc_qudit::cnc::MeasurementKind;
    fn go(
        p: PhasePoint,
        c: &Circuit,
        i: usize,
        outcomes: &mut Vec<u32>,
        w: f64,
        out: &mut cnc_qudit::simulate::Distribution,
    ) {
        let d = c.modulus();
        let mut p = p;
        for (j, ins) in c.instructions().iter().enumerate().skip(i) {
            match ins {
                Instruction::Gate(g) => p = g.element().act_on_phase_point(&p).unwrap(),
                Instruction::CondGate { condition, gate } => {
                    if condition.fires(d, outcomes) {
                        p = gate.element().act_on_phase_point(&p).unwrap();
                    }
                }
                Instruction::Measure { label, .. } => {
                    let branches: Vec<u32> = match p.measurement_kind(label).unwrap() {
                        MeasurementKind::Deterministic(s) => vec![s],
                        MeasurementKind::Uniform => (0..d.get()).collect(),
                    };
                    let wb = w / branches.len() as f64;
                    for s in branches {
                        outcomes.push(s);
                        go(p.post_measurement(label, s).unwrap(), c, j + 1, outcomes, wb, out);
                        outcomes.pop();
                    }
                    return;
                }
            }
        }
        *out.entry(outcomes.clone()).or_default() += w;
    }
    let mut out = Default::default();
    go(p.clone(), circuit, 0, &mut Vec::new(), 1.0, &mut out);
    out
}

/// Exact outcome law of the Wigner simulator started at `u`.
pub fn exact_wigner_law(u: &SymplecticVector, circuit: &Circuit) -> cnc_qudit::simulate::Distribution {
    use cnc_qudit::circuit::Instruction;
    fn go(
        u: SymplecticVector,
        c: &Circuit,
        i: usize,
        outcomes: &mut Vec<u32>,
        w: f64,
        out: &mut cnc_qudit::simulate::Distribution,
    ) {
        let d = c.modulus();
        let mut u = u;
        for (j, ins) in c.instructions().iter().enumerate().skip(i) {
            match ins {
                Instruction::Gate(g) => u = g.element().act_on_wigner(&u),
                Instruction::CondGate { condition, gate } => {
                    if condition.fires(d, outcomes) {
                        u = gate.element().act_on_wigner(&u);
                    }
                }
                Instruction::Measure { label, .. } => {
                    outcomes.push(label.form(&u));
                    for t in 0..d.get() {
                        go(u.plus(&label.scaled(t)), c, j + 1, outcomes, w / d.get() as f64, out);
                    }
                    outcomes.pop();
                    return;
                }
            }
        }
        *out.entry(outcomes.clone()).or_default() += w;
    }
    let mut out = Default::default();
    go(u.clone(), circuit, 0, &mut Vec::new(), 1.0, &mut out);
    out
}
