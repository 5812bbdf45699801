//! Phased Pauli operators
//! `T_a = omega^{-<a_z|a_x>/2} (Z^{z_1} X^{x_1}) ⊗ .. ⊗ (Z^{z_n} X^{x_n})`,
//! their dense matrices and stabilizer projectors.
//!
//! `X|j> = |j+1>`, `Z|j> = omega^j |j>`, and qudit 0 is the most significant
//! tensor factor.

use num_complex::Complex64;

use crate::dense::{roots_of_unity, DenseCap, DenseOperator};
use crate::error::{Error, Result};
use crate::field::{FieldElement, Modulus};
use crate::symplectic::{check_vector, symplectic_product, Subspace, SymplecticVector, ValuedSubspace};

/// `omega^phase T_label`.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct PhasedPauli {
    phase: u32,
    label: SymplecticVector,
}

impl PhasedPauli {
    pub fn new(phase: u32, label: SymplecticVector) -> Self {
        let phase = phase % label.modulus().get();
        PhasedPauli { phase, label }
    }

    pub fn from_label(label: SymplecticVector) -> Self {
        PhasedPauli { phase: 0, label }
    }

    pub fn phase(&self) -> u32 {
        self.phase
    }

    pub fn label(&self) -> &SymplecticVector {
        &self.label
    }

    pub fn modulus(&self) -> Modulus {
        self.label.modulus()
    }

    pub fn n(&self) -> usize {
        self.label.n()
    }

    /// `T_a T_b = omega^{[a,b]/2} T_{a+b}`; the half-form vanishes on
    /// commuting pairs, which is `beta = 0`.
    pub fn product(&self, other: &PhasedPauli) -> PhasedPauli {
        let d = self.modulus();
        let cocycle = d.mul(d.half(), self.label.form(&other.label));
        PhasedPauli {
            phase: d.add(d.add(self.phase, other.phase), cocycle),
            label: self.label.plus(&other.label),
        }
    }

    /// `(omega^p T_a)^{-1} = omega^{-p} T_{-a}`.
    pub fn inverse(&self) -> PhasedPauli {
        PhasedPauli {
            phase: self.modulus().neg(self.phase),
            label: self.label.neg(),
        }
    }

    pub fn matrix(&self, cap: DenseCap) -> Result<DenseOperator> {
        let mut op = DenseOperator::zeros(self.modulus(), self.n(), cap)?;
        let roots = roots_of_unity(self.modulus());
        add_pauli(&mut op, &self.label, roots[self.phase as usize], &roots);
        Ok(op)
    }
}

/// `beta(a, b)` with `T_a T_b = omega^{-beta(a,b)} T_{a+b}` for commuting
/// labels. Identically zero for odd d.
pub fn beta(a: &SymplecticVector, b: &SymplecticVector) -> Result<FieldElement> {
    if symplectic_product(a, b)?.value() != 0 {
        return Err(Error::NotCommuting);
    }
    Ok(FieldElement::new(0, a.modulus()))
}

/// Exponent `e` with `T_a T_b = omega^e T_b T_a`; equals `[a, b]`.
pub fn commutator_phase(a: &SymplecticVector, b: &SymplecticVector) -> Result<FieldElement> {
    symplectic_product(a, b)
}

/// Adds `coeff * T_a` to `op` in place. Each column of `T_a` has one nonzero
/// entry, so this costs O(d^n).
pub(crate) fn add_pauli(
    op: &mut DenseOperator,
    a: &SymplecticVector,
    coeff: Complex64,
    roots: &[Complex64],
) {
    let d = a.modulus();
    let n = a.n();
    let dim = op.dim();
    let z = a.z();
    let x = a.x();
    // global phase omega^{-<z|x>/2}
    let global = d.neg(d.mul(d.half(), d.dot(z, x)));
    let mut digits = vec![0u32; n];
    let m = op.matrix_mut();
    for col in 0..dim {
        let mut row = 0usize;
        let mut phase = global;
        for k in 0..n {
            let jk = d.add(digits[k], x[k]);
            phase = d.add(phase, d.mul(z[k], jk));
            row = row * d.get() as usize + jk as usize;
        }
        m[(row, col)] += coeff * roots[phase as usize];
        for k in (0..n).rev() {
            digits[k] += 1;
            if digits[k] < d.get() {
                break;
            }
            digits[k] = 0;
        }
    }
}

/// `T_a |j> = omega^phase |row>` for the computational basis index `j`.
pub(crate) fn pauli_on_basis(a: &SymplecticVector, j: usize) -> (usize, u32) {
    let d = a.modulus();
    let n = a.n();
    let dm = d.get() as usize;
    let (z, x) = (a.z(), a.x());
    let mut phase = d.neg(d.mul(d.half(), d.dot(z, x)));
    let mut row = 0usize;
    let mut rem = j;
    let mut place = dm.pow(n as u32);
    for k in 0..n {
        place /= dm;
        let jk = (rem / place) as u32;
        rem %= place;
        let shifted = d.add(jk, x[k]);
        phase = d.add(phase, d.mul(z[k], shifted));
        row += shifted as usize * place;
    }
    (row, phase)
}

pub fn pauli_matrix(a: &SymplecticVector, cap: DenseCap) -> Result<DenseOperator> {
    PhasedPauli::from_label(a.clone()).matrix(cap)
}

/// An isotropic subspace together with a linear outcome function `r`.
/// Identifies the common eigenspace of `{T_a : a in I}` with eigenvalues
/// `omega^{r(a)}`.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct OutcomeAssignment {
    valued: ValuedSubspace,
}

impl OutcomeAssignment {
    /// `r` is given on spanning vectors and extended linearly.
    pub fn new(d: Modulus, n: usize, pairs: &[(SymplecticVector, u32)]) -> Result<Self> {
        for (v, _) in pairs {
            check_vector(d, n, v)?;
        }
        let valued = ValuedSubspace::from_pairs(d, n, pairs.iter().map(|(v, x)| (v, *x)))
            .map_err(|_| Error::NonlinearOutcome)?;
        Self::from_valued(valued)
    }

    pub fn from_valued(valued: ValuedSubspace) -> Result<Self> {
        if !valued.space().is_isotropic() {
            return Err(Error::NotIsotropic);
        }
        Ok(OutcomeAssignment { valued })
    }

    pub fn subspace(&self) -> &Subspace {
        self.valued.space()
    }

    pub fn valued(&self) -> &ValuedSubspace {
        &self.valued
    }

    pub fn value(&self, a: &SymplecticVector) -> Option<u32> {
        self.valued.value(a)
    }

    /// `Pi_I^r = (1/|I|) sum_{a in I} omega^{-r(a)} T_a`.
    pub fn projector(&self, cap: DenseCap) -> Result<DenseOperator> {
        let space = self.valued.space();
        let d = space.modulus();
        let mut op = DenseOperator::zeros(d, space.n(), cap)?;
        let roots = roots_of_unity(d);
        let elems = space.elements();
        let w = 1.0 / elems.len() as f64;
        for a in &elems {
            let r = self.valued.value(a).expect("element of the span");
            add_pauli(&mut op, a, roots[d.neg(r) as usize] * w, &roots);
        }
        Ok(op)
    }
}

/// Projector onto the `omega^s` eigenspace of `T_a`:
/// `(1/d) sum_j omega^{-js} T_{ja}`.
pub fn eigenprojector(a: &SymplecticVector, s: u32, cap: DenseCap) -> Result<DenseOperator> {
    if a.is_zero() {
        return Err(Error::ZeroLabel);
    }
    let d = a.modulus();
    let mut op = DenseOperator::zeros(d, a.n(), cap)?;
    let roots = roots_of_unity(d);
    let w = 1.0 / d.get() as f64;
    for j in 0..d.get() {
        let e = d.neg(d.mul(j, s % d.get()));
        add_pauli(&mut op, &a.scaled(j), roots[e as usize] * w, &roots);
    }
    Ok(op)
}
