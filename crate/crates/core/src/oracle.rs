//! Exact dense simulation by the Born rule, used as ground truth for the
//! samplers.

use std::collections::BTreeMap;

use num_complex::Complex64;

use crate::circuit::{Circuit, Instruction};
use crate::clifford::named_gate_unitary;
use crate::dense::{DenseCap, DenseOperator};
use crate::error::{Error, Result};
use crate::field::Modulus;
use crate::pauli::eigenprojector;
use crate::simulate::Distribution;

pub const STATE_TOL: f64 = 1e-9;
pub const DEFAULT_MAX_BRANCHES: u128 = 729;

/// Branches lighter than this are dropped from joint distributions.
const NEGLIGIBLE: f64 = 1e-13;

/// A density matrix: Hermitian, unit trace, PSD up to `STATE_TOL`.
#[derive(Clone, Debug)]
pub struct DensityState {
    op: DenseOperator,
}

impl DensityState {
    pub fn new(op: DenseOperator) -> Result<DensityState> {
        if !op.is_hermitian(STATE_TOL) {
            return Err(Error::InvalidState("not Hermitian".into()));
        }
        let tr = op.trace();
        if (tr - 1.0).norm() > STATE_TOL {
            return Err(Error::InvalidState(format!("trace {tr}")));
        }
        let min = op.hermitian_eigenvalues().into_iter().fold(f64::INFINITY, f64::min);
        if min < -STATE_TOL {
            return Err(Error::InvalidState(format!("eigenvalue {min}")));
        }
        Ok(DensityState { op })
    }

    /// `|ψ><ψ|` for a normalized copy of `amplitudes`.
    pub fn pure(d: Modulus, n: usize, amplitudes: &[Complex64], cap: DenseCap) -> Result<DensityState> {
        let dim = cap.check(d, n)?;
        if amplitudes.len() != dim {
            return Err(Error::DimensionMismatch {
                expected: dim,
                found: amplitudes.len(),
            });
        }
        let norm: f64 = amplitudes.iter().map(|a| a.norm_sqr()).sum::<f64>().sqrt();
        if norm == 0.0 {
            return Err(Error::InvalidState("zero vector".into()));
        }
        let mut op = DenseOperator::zeros(d, n, cap)?;
        for i in 0..dim {
            for j in 0..dim {
                op.matrix_mut()[(i, j)] = amplitudes[i] * amplitudes[j].conj() / (norm * norm);
            }
        }
        Ok(DensityState { op })
    }

    /// `|0…0><0…0|`.
    pub fn stabilizer_zero(d: Modulus, n: usize, cap: DenseCap) -> Result<DensityState> {
        let dim = cap.check(d, n)?;
        let mut amp = vec![Complex64::new(0.0, 0.0); dim];
        amp[0] = Complex64::new(1.0, 0.0);
        Self::pure(d, n, &amp, cap)
    }

    pub fn maximally_mixed(d: Modulus, n: usize, cap: DenseCap) -> Result<DensityState> {
        let id = DenseOperator::identity(d, n, cap)?;
        let dim = id.dim() as f64;
        Ok(DensityState {
            op: id.scale(Complex64::new(1.0 / dim, 0.0)),
        })
    }

    pub fn operator(&self) -> &DenseOperator {
        &self.op
    }

    pub fn into_operator(self) -> DenseOperator {
        self.op
    }

    pub fn modulus(&self) -> Modulus {
        self.op.modulus()
    }

    pub fn n(&self) -> usize {
        self.op.n()
    }

    /// `g ρ g†`.
    pub fn conjugate(&self, unitary: &DenseOperator) -> DensityState {
        DensityState {
            op: unitary.mul(&self.op).mul(&unitary.adjoint()),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct OracleCaps {
    pub dense: DenseCap,
    /// Largest allowed `d^m` for `m` measurements.
    pub max_branches: u128,
}

impl Default for OracleCaps {
    fn default() -> Self {
        OracleCaps {
            dense: DenseCap::default(),
            max_branches: DEFAULT_MAX_BRANCHES,
        }
    }
}

enum Step {
    Unitary(DenseOperator),
    Conditional(crate::circuit::Condition, DenseOperator),
    /// Eigenprojectors for outcomes `0..d`.
    Measure(Vec<DenseOperator>),
}

/// A circuit with every gate and projector materialized.
struct Compiled {
    d: Modulus,
    steps: Vec<Step>,
}

fn gate_unitary(circuit: &Circuit, gate: &crate::circuit::Gate, cap: DenseCap) -> Result<DenseOperator> {
    match gate.name() {
        Some(named) => named_gate_unitary(circuit.modulus(), circuit.n(), named, cap),
        None => gate.element().unitary(cap),
    }
}

impl Compiled {
    fn new(circuit: &Circuit, cap: DenseCap) -> Result<Compiled> {
        let d = circuit.modulus();
        let steps = circuit
            .instructions()
            .iter()
            .map(|ins| {
                Ok(match ins {
                    Instruction::Gate(g) => Step::Unitary(gate_unitary(circuit, g, cap)?),
                    Instruction::CondGate { condition, gate } => {
                        Step::Conditional(condition.clone(), gate_unitary(circuit, gate, cap)?)
                    }
                    Instruction::Measure { label, .. } => {
                        Step::Measure((0..d.get()).map(|s| eigenprojector(label, s, cap)).collect::<Result<_>>()?)
                    }
                })
            })
            .collect::<Result<_>>()?;
        Ok(Compiled { d, steps })
    }

    /// Unnormalized state after following `branch`.
    fn follow(&self, x: &DenseOperator, branch: &[u32]) -> Result<DenseOperator> {
        let mut x = x.clone();
        let mut outcomes: Vec<u32> = Vec::new();
        for step in &self.steps {
            match step {
                Step::Unitary(u) => x = u.mul(&x).mul(&u.adjoint()),
                Step::Conditional(c, u) => {
                    if c.fires(self.d, &outcomes) {
                        x = u.mul(&x).mul(&u.adjoint());
                    }
                }
                Step::Measure(projs) => {
                    let s = *branch.get(outcomes.len()).ok_or(Error::DimensionMismatch {
                        expected: outcomes.len() + 1,
                        found: branch.len(),
                    })?;
                    let p = projs.get(s as usize).ok_or_else(|| Error::precondition("outcome out of range"))?;
                    x = p.mul(&x).mul(p);
                    outcomes.push(s);
                }
            }
        }
        if outcomes.len() != branch.len() {
            return Err(Error::DimensionMismatch {
                expected: outcomes.len(),
                found: branch.len(),
            });
        }
        Ok(x)
    }

    fn explore(&self, from: usize, x: DenseOperator, outcomes: &mut Vec<u32>, out: &mut Distribution) {
        let mut x = x;
        for (i, step) in self.steps.iter().enumerate().skip(from) {
            match step {
                Step::Unitary(u) => x = u.mul(&x).mul(&u.adjoint()),
                Step::Conditional(c, u) => {
                    if c.fires(self.d, outcomes) {
                        x = u.mul(&x).mul(&u.adjoint());
                    }
                }
                Step::Measure(projs) => {
                    for (s, p) in projs.iter().enumerate() {
                        let y = p.mul(&x).mul(p);
                        if y.trace().re.abs() < NEGLIGIBLE {
                            continue;
                        }
                        outcomes.push(s as u32);
                        self.explore(i + 1, y, outcomes, out);
                        outcomes.pop();
                    }
                    return;
                }
            }
        }
        out.insert(outcomes.clone(), x.trace().re);
    }
}

fn check_circuit(op: &DenseOperator, circuit: &Circuit) -> Result<()> {
    if op.modulus() != circuit.modulus() {
        return Err(Error::ModulusMismatch {
            left: op.modulus().get(),
            right: circuit.modulus().get(),
        });
    }
    if op.n() != circuit.n() {
        return Err(Error::DimensionMismatch {
            expected: circuit.n(),
            found: op.n(),
        });
    }
    Ok(())
}

/// Joint probability of `branch` (one outcome per measurement) and the
/// normalized state it leaves behind.
pub fn evolve(rho: &DensityState, circuit: &Circuit, branch: &[u32], cap: DenseCap) -> Result<(f64, DensityState)> {
    check_circuit(rho.operator(), circuit)?;
    let x = Compiled::new(circuit, cap)?.follow(rho.operator(), branch)?;
    let p = x.trace().re;
    if p <= NEGLIGIBLE {
        return Err(Error::ZeroProbabilityBranch);
    }
    Ok((
        p,
        DensityState {
            op: x.scale(Complex64::new(1.0 / p, 0.0)),
        },
    ))
}

/// `Tr` of the branch-projected operator. Linear in `x`, so it also applies to
/// quasi-states such as single phase-point operators.
pub fn branch_probability(x: &DenseOperator, circuit: &Circuit, branch: &[u32], cap: DenseCap) -> Result<f64> {
    check_circuit(x, circuit)?;
    Ok(Compiled::new(circuit, cap)?.follow(x, branch)?.trace().re)
}

/// Full joint outcome distribution by branch enumeration. Branches of
/// negligible weight are omitted.
pub fn joint_distribution(rho: &DensityState, circuit: &Circuit, caps: OracleCaps) -> Result<Distribution> {
    joint_distribution_of_operator(rho.operator(), circuit, caps)
}

/// As [`joint_distribution`] for any unit-trace Hermitian operator.
pub fn joint_distribution_of_operator(x: &DenseOperator, circuit: &Circuit, caps: OracleCaps) -> Result<Distribution> {
    check_circuit(x, circuit)?;
    let m = circuit.measurement_count() as u32;
    let branches = (circuit.modulus().get() as u128).checked_pow(m).unwrap_or(u128::MAX);
    if branches > caps.max_branches {
        return Err(Error::CapExceeded {
            what: "oracle branches",
            needed: branches,
            limit: caps.max_branches,
            next_index: None,
        });
    }
    let compiled = Compiled::new(circuit, caps.dense)?;
    let mut out = BTreeMap::new();
    compiled.explore(0, x.clone(), &mut Vec::new(), &mut out);
    Ok(out)
}

/// `½ Σ |p − q|`, with absent outcomes counted as probability 0.
pub fn tv_distance(p: &Distribution, q: &Distribution) -> Result<f64> {
    let len = p.keys().chain(q.keys()).map(Vec::len).next();
    if let Some(len) = len {
        if let Some(k) = p.keys().chain(q.keys()).find(|k| k.len() != len) {
            return Err(Error::DimensionMismatch {
                expected: len,
                found: k.len(),
            });
        }
    }
    let mut total = 0.0;
    for (k, a) in p {
        total += (a - q.get(k).copied().unwrap_or(0.0)).abs();
    }
    for (k, b) in q {
        if !p.contains_key(k) {
            total += b.abs();
        }
    }
    Ok(total / 2.0)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::symplectic::SymplecticVector;

    fn m3() -> Modulus {
        Modulus::new(3).unwrap()
    }

    fn dist(entries: &[(&[u32], f64)]) -> Distribution {
        entries.iter().map(|(k, v)| (k.to_vec(), *v)).collect()
    }

    #[test]
    fn tv_examples() {
        let p = dist(&[(&[0], 0.5), (&[1], 0.5)]);
        let q = dist(&[(&[0], 1.0), (&[1], 0.0)]);
        assert_eq!(tv_distance(&p, &p).unwrap(), 0.0);
        assert!((tv_distance(&p, &q).unwrap() - 0.5).abs() < 1e-15);
        assert_eq!(tv_distance(&p, &q).unwrap(), tv_distance(&q, &p).unwrap());
        let a = dist(&[(&[0], 1.0)]);
        let b = dist(&[(&[2], 1.0)]);
        assert_eq!(tv_distance(&a, &b).unwrap(), 1.0);
        assert!(tv_distance(&a, &dist(&[(&[0, 1], 1.0)])).is_err());
    }

    #[test]
    fn empty_circuit_keeps_the_state() {
        let d = m3();
        let rho = DensityState::stabilizer_zero(d, 1, DenseCap::default()).unwrap();
        let c = Circuit::new(d, 1).unwrap();
        let (p, out) = evolve(&rho, &c, &[], DenseCap::default()).unwrap();
        assert!((p - 1.0).abs() < 1e-12);
        assert!(out.operator().approx_eq(rho.operator(), 1e-12));
    }

    #[test]
    fn z_on_zero_and_on_maximally_mixed() {
        let d = m3();
        let mut c = Circuit::new(d, 1).unwrap();
        c.push_measure(SymplecticVector::e(d, 1, 0), "z").unwrap();
        let zero = DensityState::stabilizer_zero(d, 1, DenseCap::default()).unwrap();
        let (p, _) = evolve(&zero, &c, &[0], DenseCap::default()).unwrap();
        assert!((p - 1.0).abs() < 1e-12);
        assert_eq!(
            evolve(&zero, &c, &[1], DenseCap::default()).unwrap_err(),
            Error::ZeroProbabilityBranch
        );
        let mixed = DensityState::maximally_mixed(d, 1, DenseCap::default()).unwrap();
        let j = joint_distribution(&mixed, &c, OracleCaps::default()).unwrap();
        assert_eq!(j.len(), 3);
        assert!(j.values().all(|p| (p - 1.0 / 3.0).abs() < 1e-12));
    }

    #[test]
    fn branch_cap_is_enforced() {
        let d = m3();
        let mut c = Circuit::new(d, 1).unwrap();
        for i in 0..7 {
            c.push_measure(SymplecticVector::e(d, 1, 0), format!("m{i}")).unwrap();
        }
        let rho = DensityState::maximally_mixed(d, 1, DenseCap::default()).unwrap();
        assert!(matches!(
            joint_distribution(&rho, &c, OracleCaps::default()),
            Err(Error::CapExceeded { needed: 2187, .. })
        ));
    }

    #[test]
    fn rejects_non_states() {
        let d = m3();
        let id = DenseOperator::identity(d, 1, DenseCap::default()).unwrap();
        assert!(DensityState::new(id).is_err());
        let w = crate::cnc::PhasePoint::wigner(&SymplecticVector::zero(d, 1))
            .operator(DenseCap::default())
            .unwrap();
        // Wigner point operators have a negative eigenvalue
        assert!(matches!(DensityState::new(w), Err(Error::InvalidState(_))));
    }
}
