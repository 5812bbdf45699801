//! Clifford unitaries as affine symplectic maps.
//!
//! The element `(S, b)` stands for `g = T_b U_S`, acting by
//! `g T_a g† = omega^{[b, S a]} T_{S a}`.

use nalgebra::DMatrix;
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::cnc::PhasePoint;
use crate::dense::{roots_of_unity, DenseCap, DenseOperator};
use crate::error::{Error, Result};
use crate::field::Modulus;
use crate::pauli::{pauli_matrix, pauli_on_basis};
use crate::symplectic::{check_vector, symplectic_raw, SymplecticVector};

#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct CliffordElement {
    d: Modulus,
    n: usize,
    /// Row-major 2n x 2n matrix acting on column vectors `[z.., x..]`.
    s: Vec<Vec<u32>>,
    b: SymplecticVector,
}

/// The generating gates. Qudit indices are 0-based.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum NamedGate {
    /// Fourier gate: `Z -> X`, `X -> Z^{-1}`.
    F(usize),
    /// Phase gate `|j> -> omega^{j^2/2} |j>`: `X -> T_{e+f}`.
    P(usize),
    /// `|j, k> -> |j, k + j>` with (control, target).
    Sum(usize, usize),
    /// `X^k` on a qudit.
    XShift(usize, u32),
    /// `Z^k` on a qudit.
    ZShift(usize, u32),
}

impl NamedGate {
    fn qudits(&self) -> Vec<usize> {
        match *self {
            NamedGate::F(q) | NamedGate::P(q) | NamedGate::XShift(q, _) | NamedGate::ZShift(q, _) => vec![q],
            NamedGate::Sum(c, t) => vec![c, t],
        }
    }
}

impl CliffordElement {
    pub fn identity(d: Modulus, n: usize) -> Self {
        let s = (0..2 * n)
            .map(|i| {
                let mut r = vec![0; 2 * n];
                r[i] = 1;
                r
            })
            .collect();
        CliffordElement {
            d,
            n,
            s,
            b: SymplecticVector::zero(d, n),
        }
    }

    /// Validates that `s` is symplectic.
    pub fn new(d: Modulus, n: usize, s: Vec<Vec<i64>>, b: SymplecticVector) -> Result<Self> {
        if s.len() != 2 * n || s.iter().any(|r| r.len() != 2 * n) {
            return Err(Error::DimensionMismatch {
                expected: 2 * n,
                found: s.len(),
            });
        }
        check_vector(d, n, &b)?;
        let s: Vec<Vec<u32>> = s.iter().map(|r| r.iter().map(|&x| d.reduce(x)).collect()).collect();
        let g = CliffordElement { d, n, s, b };
        if !g.is_symplectic() {
            return Err(Error::NotSymplectic);
        }
        Ok(g)
    }

    pub fn named(d: Modulus, n: usize, gate: &NamedGate) -> Result<Self> {
        for q in gate.qudits() {
            if q >= n {
                return Err(Error::QuditOutOfRange { index: q, n });
            }
        }
        if let NamedGate::Sum(c, t) = gate {
            if c == t {
                return Err(Error::precondition("SUM needs distinct control and target"));
            }
        }
        let mut g = Self::identity(d, n);
        let (z, x) = (|q: usize| q, |q: usize| n + q);
        let m = d.get() - 1; // -1 mod d
        match *gate {
            NamedGate::F(q) => {
                // (z, x) -> (-x, z)
                g.s[z(q)][z(q)] = 0;
                g.s[z(q)][x(q)] = m;
                g.s[x(q)][x(q)] = 0;
                g.s[x(q)][z(q)] = 1;
            }
            NamedGate::P(q) => {
                // (z, x) -> (z + x, x)
                g.s[z(q)][x(q)] = 1;
            }
            NamedGate::Sum(c, t) => {
                // z_c' = z_c - z_t, x_t' = x_t + x_c
                g.s[z(c)][z(t)] = m;
                g.s[x(t)][x(c)] = 1;
            }
            NamedGate::XShift(q, k) => {
                g.b = SymplecticVector::f(d, n, q).scaled(k);
            }
            NamedGate::ZShift(q, k) => {
                g.b = SymplecticVector::e(d, n, q).scaled(k);
            }
        }
        Ok(g)
    }

    pub fn modulus(&self) -> Modulus {
        self.d
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn matrix(&self) -> &[Vec<u32>] {
        &self.s
    }

    pub fn shift(&self) -> &SymplecticVector {
        &self.b
    }

    pub(crate) fn apply_raw(&self, v: &[u32]) -> Vec<u32> {
        self.s.iter().map(|row| self.d.dot(row, v)).collect()
    }

    /// `S a`.
    pub fn apply_vector(&self, a: &SymplecticVector) -> SymplecticVector {
        SymplecticVector::from_raw(self.d, self.apply_raw(a.coords()))
    }

    /// `g T_a g† = omega^phase T_{label}`.
    pub fn conjugate(&self, a: &SymplecticVector) -> Result<(SymplecticVector, u32)> {
        check_vector(self.d, self.n, a)?;
        let sa = self.apply_vector(a);
        let phase = self.b.form(&sa);
        Ok((sa, phase))
    }

    fn is_symplectic(&self) -> bool {
        let cols: Vec<Vec<u32>> = (0..2 * self.n)
            .map(|j| self.s.iter().map(|r| r[j]).collect())
            .collect();
        for i in 0..2 * self.n {
            for j in 0..2 * self.n {
                let mut ei = vec![0u32; 2 * self.n];
                let mut ej = vec![0u32; 2 * self.n];
                ei[i] = 1;
                ej[j] = 1;
                if symplectic_raw(self.d, &cols[i], &cols[j]) != symplectic_raw(self.d, &ei, &ej) {
                    return false;
                }
            }
        }
        true
    }

    /// `self ∘ other`: apply `other` first.
    pub fn compose(&self, other: &CliffordElement) -> Result<CliffordElement> {
        if self.d != other.d || self.n != other.n {
            return Err(Error::DimensionMismatch {
                expected: self.n,
                found: other.n,
            });
        }
        let dim = 2 * self.n;
        let s = (0..dim)
            .map(|i| {
                (0..dim)
                    .map(|j| {
                        (0..dim).fold(0, |acc, k| self.d.add(acc, self.d.mul(self.s[i][k], other.s[k][j])))
                    })
                    .collect()
            })
            .collect();
        let b = self.b.plus(&self.apply_vector(&other.b));
        Ok(CliffordElement {
            d: self.d,
            n: self.n,
            s,
            b,
        })
    }

    pub fn inverse(&self) -> CliffordElement {
        // [u, v] = u^T J v with J = [[0, I], [-I, 0]], and S^T J S = J gives
        // S^{-1} = J^{-1} S^T J.
        let dim = 2 * self.n;
        let n = self.n;
        let d = self.d;
        let j = |i: usize, k: usize| -> u32 {
            if i < n && k == i + n {
                1
            } else if i >= n && k + n == i {
                d.neg(1)
            } else {
                0
            }
        };
        let jinv = |i: usize, k: usize| -> u32 { d.neg(j(i, k)) };
        let mut st_j = vec![vec![0u32; dim]; dim];
        for i in 0..dim {
            for k in 0..dim {
                st_j[i][k] = (0..dim).fold(0, |acc, l| d.add(acc, d.mul(self.s[l][i], j(l, k))));
            }
        }
        let s: Vec<Vec<u32>> = (0..dim)
            .map(|i| (0..dim).fold(vec![0u32; dim], |mut row, l| {
                let c = jinv(i, l);
                if c != 0 {
                    d.axpy(&mut row, c, &st_j[l]);
                }
                row
            }))
            .collect();
        let inv = CliffordElement {
            d,
            n,
            s,
            b: SymplecticVector::zero(d, n),
        };
        let b = inv.apply_vector(&self.b).neg();
        CliffordElement { b, ..inv }
    }

    /// `g A g†` for a phase point; for Wigner points this is `u -> S u + b`.
    pub fn act_on_phase_point(&self, p: &PhasePoint) -> Result<PhasePoint> {
        if p.modulus() != self.d || p.n() != self.n {
            return Err(Error::DimensionMismatch {
                expected: self.n,
                found: p.n(),
            });
        }
        let b = self.b.coords().to_vec();
        let d = self.d;
        p.map(&|v| self.apply_raw(v), &|img| symplectic_raw(d, &b, img))
    }

    /// Wigner label transport `u -> S u + b`.
    pub fn act_on_wigner(&self, u: &SymplecticVector) -> SymplecticVector {
        self.apply_vector(u).plus(&self.b)
    }

    /// A unitary implementing the element, unique up to a global phase.
    pub fn unitary(&self, cap: DenseCap) -> Result<DenseOperator> {
        let dim = cap.check(self.d, self.n)?;
        let roots = roots_of_unity(self.d);
        let all = crate::symplectic::Subspace::full(self.d, self.n).elements();
        // M = Σ_a T_{Sa} E_jk T_a†  intertwines T_a and T_{Sa}
        let mut found = None;
        'search: for j in 0..dim {
            for k in 0..dim {
                let mut m = DMatrix::<Complex64>::zeros(dim, dim);
                for a in &all {
                    let (r1, p1) = pauli_on_basis(&self.apply_vector(a), j);
                    let (r2, p2) = pauli_on_basis(a, k);
                    m[(r1, r2)] += roots[self.d.sub(p1, p2) as usize];
                }
                if m.iter().any(|z| z.norm() > 1e-9) {
                    found = Some(m);
                    break 'search;
                }
            }
        }
        let m = found.ok_or_else(|| Error::internal("no intertwiner found"))?;
        let norm = (m.column(0).norm_squared()).sqrt();
        let u = DenseOperator::from_matrix(self.d, self.n, m / Complex64::new(norm, 0.0))?;
        let tb = pauli_matrix(&self.b, cap)?;
        Ok(tb.mul(&u))
    }
}

/// Explicit matrix of a named gate.
pub fn named_gate_unitary(d: Modulus, n: usize, gate: &NamedGate, cap: DenseCap) -> Result<DenseOperator> {
    let el = CliffordElement::named(d, n, gate)?;
    let dim = cap.check(d, n)?;
    let dm = d.get() as usize;
    let roots = roots_of_unity(d);
    let digit = |idx: usize, q: usize| (idx / dm.pow((n - 1 - q) as u32)) % dm;
    let with_digit = |idx: usize, q: usize, v: usize| {
        let place = dm.pow((n - 1 - q) as u32);
        idx - digit(idx, q) * place + v * place
    };
    let mut m = DMatrix::<Complex64>::zeros(dim, dim);
    match *gate {
        NamedGate::F(q) => {
            let s = 1.0 / (dm as f64).sqrt();
            for col in 0..dim {
                let j = digit(col, q);
                for k in 0..dm {
                    let e = d.neg(d.mul(j as u32, k as u32));
                    m[(with_digit(col, q, k), col)] += roots[e as usize] * s;
                }
            }
        }
        NamedGate::P(q) => {
            for col in 0..dim {
                let j = digit(col, q) as u32;
                m[(col, col)] = roots[d.mul(d.half(), d.mul(j, j)) as usize];
            }
        }
        NamedGate::Sum(c, t) => {
            for col in 0..dim {
                let (j, k) = (digit(col, c), digit(col, t));
                m[(with_digit(col, t, (k + j) % dm), col)] = Complex64::new(1.0, 0.0);
            }
        }
        NamedGate::XShift(..) | NamedGate::ZShift(..) => return pauli_matrix(el.shift(), cap),
    }
    DenseOperator::from_matrix(d, n, m)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn fourier_maps_z_to_x() {
        let d = Modulus::new(3).unwrap();
        let f = CliffordElement::named(d, 1, &NamedGate::F(0)).unwrap();
        let e = SymplecticVector::e(d, 1, 0);
        assert_eq!(f.apply_vector(&e), SymplecticVector::f(d, 1, 0));
    }

    #[test]
    fn inverse_undoes() {
        let d = Modulus::new(5).unwrap();
        let g = CliffordElement::named(d, 2, &NamedGate::Sum(0, 1))
            .unwrap()
            .compose(&CliffordElement::named(d, 2, &NamedGate::P(1)).unwrap())
            .unwrap()
            .compose(&CliffordElement::named(d, 2, &NamedGate::XShift(0, 2)).unwrap())
            .unwrap();
        assert_eq!(g.compose(&g.inverse()).unwrap(), CliffordElement::identity(d, 2));
        assert_eq!(g.inverse().compose(&g).unwrap(), CliffordElement::identity(d, 2));
    }

    #[test]
    fn non_symplectic_matrix_is_rejected() {
        let d = Modulus::new(3).unwrap();
        let r = CliffordElement::new(d, 1, vec![vec![1, 0], vec![0, 2]], SymplecticVector::zero(d, 1));
        assert_eq!(r.unwrap_err(), Error::NotSymplectic);
    }
}
