//! Adaptive circuits: Clifford gates, Pauli measurements, and gates
//! conditioned on affine functions of earlier outcomes.

use crate::clifford::{CliffordElement, NamedGate};
use crate::error::{Error, Result};
use crate::field::Modulus;
use crate::symplectic::{check_vector, SymplecticVector};

/// A Clifford element, remembering the named gate it came from if any.
#[derive(Clone, Debug, PartialEq)]
pub struct Gate {
    name: Option<NamedGate>,
    element: CliffordElement,
}

impl Gate {
    pub fn named(d: Modulus, n: usize, gate: NamedGate) -> Result<Gate> {
        let element = CliffordElement::named(d, n, &gate)?;
        Ok(Gate {
            name: Some(gate),
            element,
        })
    }

    pub fn raw(element: CliffordElement) -> Gate {
        Gate { name: None, element }
    }

    pub fn name(&self) -> Option<&NamedGate> {
        self.name.as_ref()
    }

    pub fn element(&self) -> &CliffordElement {
        &self.element
    }
}

/// Fires iff `Σ c_v m_v + constant = 0` in Z_d.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Condition {
    /// (measurement index, coefficient)
    terms: Vec<(usize, u32)>,
    constant: u32,
}

impl Condition {
    pub fn terms(&self) -> &[(usize, u32)] {
        &self.terms
    }

    pub fn constant(&self) -> u32 {
        self.constant
    }

    /// `outcomes[i]` is the value of the i-th measurement so far.
    pub fn fires(&self, d: Modulus, outcomes: &[u32]) -> bool {
        let total = self
            .terms
            .iter()
            .fold(self.constant, |acc, &(i, c)| d.add(acc, d.mul(c, outcomes[i])));
        total == 0
    }
}

#[derive(Clone, Debug, PartialEq)]
pub enum Instruction {
    Gate(Gate),
    Measure { label: SymplecticVector, var: String },
    CondGate { condition: Condition, gate: Gate },
}

#[derive(Clone, Debug, PartialEq)]
pub struct Circuit {
    d: Modulus,
    n: usize,
    instructions: Vec<Instruction>,
    vars: Vec<String>,
}

impl Circuit {
    pub fn new(d: Modulus, n: usize) -> Result<Circuit> {
        if n == 0 {
            return Err(Error::NoQudits);
        }
        Ok(Circuit {
            d,
            n,
            instructions: Vec::new(),
            vars: Vec::new(),
        })
    }

    pub fn modulus(&self) -> Modulus {
        self.d
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn instructions(&self) -> &[Instruction] {
        &self.instructions
    }

    /// Outcome variable names in measurement order.
    pub fn variables(&self) -> &[String] {
        &self.vars
    }

    pub fn measurement_count(&self) -> usize {
        self.vars.len()
    }

    fn check_gate(&self, gate: &Gate) -> Result<()> {
        let el = gate.element();
        if el.modulus() != self.d {
            return Err(Error::ModulusMismatch {
                left: self.d.get(),
                right: el.modulus().get(),
            });
        }
        if el.n() != self.n {
            return Err(Error::DimensionMismatch {
                expected: self.n,
                found: el.n(),
            });
        }
        Ok(())
    }

    pub fn push_gate(&mut self, gate: Gate) -> Result<&mut Self> {
        self.check_gate(&gate)?;
        self.instructions.push(Instruction::Gate(gate));
        Ok(self)
    }

    pub fn push_named(&mut self, gate: NamedGate) -> Result<&mut Self> {
        let g = Gate::named(self.d, self.n, gate)?;
        self.push_gate(g)
    }

    pub fn push_measure(&mut self, label: SymplecticVector, var: impl Into<String>) -> Result<&mut Self> {
        check_vector(self.d, self.n, &label)?;
        if label.is_zero() {
            return Err(Error::ZeroLabel);
        }
        let var = var.into();
        if self.vars.contains(&var) {
            return Err(Error::DuplicateVariable(var));
        }
        self.vars.push(var.clone());
        self.instructions.push(Instruction::Measure { label, var });
        Ok(self)
    }

    /// Coefficients are keyed by variable name and must refer to earlier
    /// measurements.
    pub fn push_cond_gate(&mut self, coefficients: &[(&str, i64)], constant: i64, gate: Gate) -> Result<&mut Self> {
        self.check_gate(&gate)?;
        let mut terms = Vec::with_capacity(coefficients.len());
        for (name, c) in coefficients {
            let idx = self
                .vars
                .iter()
                .position(|v| v == name)
                .ok_or_else(|| Error::UnboundVariable(name.to_string()))?;
            terms.push((idx, self.d.reduce(*c)));
        }
        let condition = Condition {
            terms,
            constant: self.d.reduce(constant),
        };
        self.instructions.push(Instruction::CondGate { condition, gate });
        Ok(self)
    }

    /// Name of the variable for measurement `i`.
    pub fn variable(&self, i: usize) -> &str {
        &self.vars[i]
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn conditions_are_affine_in_outcomes() {
        let d = Modulus::new(3).unwrap();
        let mut c = Circuit::new(d, 1).unwrap();
        c.push_measure(SymplecticVector::e(d, 1, 0), "m0").unwrap();
        c.push_measure(SymplecticVector::f(d, 1, 0), "m1").unwrap();
        let g = Gate::named(d, 1, NamedGate::XShift(0, 1)).unwrap();
        c.push_cond_gate(&[("m0", 1), ("m1", 2)], -1, g).unwrap();
        let Instruction::CondGate { condition, .. } = &c.instructions()[2] else {
            panic!()
        };
        // m0 + 2 m1 = 1
        assert!(condition.fires(d, &[1, 0]));
        assert!(condition.fires(d, &[0, 2]));
        assert!(!condition.fires(d, &[0, 0]));
    }

    #[test]
    fn rejects_unbound_and_duplicate_variables() {
        let d = Modulus::new(3).unwrap();
        let mut c = Circuit::new(d, 2).unwrap();
        let g = Gate::named(d, 2, NamedGate::F(0)).unwrap();
        assert_eq!(
            c.push_cond_gate(&[("m", 1)], 0, g).unwrap_err(),
            Error::UnboundVariable("m".into())
        );
        c.push_measure(SymplecticVector::e(d, 2, 0), "m").unwrap();
        assert!(matches!(
            c.push_measure(SymplecticVector::e(d, 2, 1), "m"),
            Err(Error::DuplicateVariable(_))
        ));
        assert_eq!(
            c.push_measure(SymplecticVector::zero(d, 2), "z").unwrap_err(),
            Error::ZeroLabel
        );
        assert!(matches!(
            c.push_named(NamedGate::F(2)),
            Err(Error::QuditOutOfRange { index: 2, n: 2 })
        ));
    }
}
