//! Vectors of Z_d^{2n}, the symplectic form and subspaces kept in reduced row
//! echelon form.
//!
//! Coordinates are stored as `[z_1, .., z_n, x_1, .., x_n]`, and
//! `[a, b] = <a_z|b_x> - <a_x|b_z>`.

use std::fmt;

use crate::error::{Error, Result};
use crate::field::{FieldElement, Modulus};

#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct SymplecticVector {
    d: Modulus,
    coords: Vec<u32>,
}

impl SymplecticVector {
    /// Builds a vector from `[z.., x..]` coordinates, reducing them mod d.
    pub fn new(d: Modulus, coords: &[i64]) -> Result<Self> {
        if coords.is_empty() || coords.len() % 2 != 0 {
            return Err(Error::DimensionMismatch {
                expected: 2 * (coords.len() / 2).max(1),
                found: coords.len(),
            });
        }
        Ok(SymplecticVector {
            d,
            coords: coords.iter().map(|&c| d.reduce(c)).collect(),
        })
    }

    /// Wraps already-reduced coordinates.
    pub(crate) fn from_raw(d: Modulus, coords: Vec<u32>) -> Self {
        debug_assert!(coords.len() % 2 == 0 && coords.iter().all(|&c| c < d.get()));
        SymplecticVector { d, coords }
    }

    pub fn from_zx(d: Modulus, z: &[i64], x: &[i64]) -> Result<Self> {
        if z.len() != x.len() {
            return Err(Error::DimensionMismatch {
                expected: z.len(),
                found: x.len(),
            });
        }
        let mut c = z.to_vec();
        c.extend_from_slice(x);
        Self::new(d, &c)
    }

    pub fn zero(d: Modulus, n: usize) -> Self {
        SymplecticVector {
            d,
            coords: vec![0; 2 * n],
        }
    }

    /// `e_k`: the Z-type unit vector on qudit k.
    pub fn e(d: Modulus, n: usize, k: usize) -> Self {
        let mut v = Self::zero(d, n);
        v.coords[k] = 1;
        v
    }

    /// `f_k`: the X-type unit vector on qudit k.
    pub fn f(d: Modulus, n: usize, k: usize) -> Self {
        let mut v = Self::zero(d, n);
        v.coords[n + k] = 1;
        v
    }

    #[inline]
    pub fn modulus(&self) -> Modulus {
        self.d
    }

    #[inline]
    pub fn n(&self) -> usize {
        self.coords.len() / 2
    }

    #[inline]
    pub fn coords(&self) -> &[u32] {
        &self.coords
    }

    pub fn z(&self) -> &[u32] {
        &self.coords[..self.n()]
    }

    pub fn x(&self) -> &[u32] {
        &self.coords[self.n()..]
    }

    pub fn is_zero(&self) -> bool {
        self.coords.iter().all(|&c| c == 0)
    }

    pub fn into_coords(self) -> Vec<u32> {
        self.coords
    }

    /// Symplectic form; panics if the dimensions differ.
    pub fn form(&self, other: &SymplecticVector) -> u32 {
        assert_eq!(self.coords.len(), other.coords.len(), "dimension mismatch");
        symplectic_raw(self.d, &self.coords, &other.coords)
    }

    pub fn plus(&self, other: &SymplecticVector) -> SymplecticVector {
        assert_eq!(self.coords.len(), other.coords.len(), "dimension mismatch");
        let d = self.d;
        SymplecticVector {
            d,
            coords: self
                .coords
                .iter()
                .zip(&other.coords)
                .map(|(a, b)| d.add(*a, *b))
                .collect(),
        }
    }

    pub fn minus(&self, other: &SymplecticVector) -> SymplecticVector {
        self.plus(&other.scaled(self.d.get() - 1))
    }

    pub fn scaled(&self, c: u32) -> SymplecticVector {
        let d = self.d;
        SymplecticVector {
            d,
            coords: self.coords.iter().map(|a| d.mul(*a, c % d.get())).collect(),
        }
    }

    pub fn neg(&self) -> SymplecticVector {
        self.scaled(self.d.get() - 1)
    }

    /// Scales the vector so its first nonzero coordinate is 1. Returns the
    /// normalized vector and the factor applied. Zero maps to itself with
    /// factor 1.
    pub fn normalized(&self) -> (SymplecticVector, u32) {
        match self.coords.iter().find(|&&c| c != 0) {
            None => (self.clone(), 1),
            Some(&lead) => {
                let s = self.d.inv(lead).expect("nonzero");
                (self.scaled(s), s)
            }
        }
    }

    /// The row `w` with `w . b = [self, b]` for all b.
    pub(crate) fn form_row(&self) -> Vec<u32> {
        let n = self.n();
        let mut w = Vec::with_capacity(2 * n);
        w.extend(self.coords[n..].iter().map(|&c| self.d.neg(c)));
        w.extend_from_slice(&self.coords[..n]);
        w
    }
}

impl fmt::Display for SymplecticVector {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "(z={:?}, x={:?})", self.z(), self.x())
    }
}

pub(crate) fn symplectic_raw(d: Modulus, a: &[u32], b: &[u32]) -> u32 {
    let n = a.len() / 2;
    let zx = d.dot(&a[..n], &b[n..]);
    let xz = d.dot(&a[n..], &b[..n]);
    d.sub(zx, xz)
}

/// Checked symplectic product.
pub fn symplectic_product(a: &SymplecticVector, b: &SymplecticVector) -> Result<FieldElement> {
    if a.d != b.d {
        return Err(Error::ModulusMismatch {
            left: a.d.get(),
            right: b.d.get(),
        });
    }
    if a.coords.len() != b.coords.len() {
        return Err(Error::DimensionMismatch {
            expected: a.coords.len(),
            found: b.coords.len(),
        });
    }
    Ok(FieldElement::new(
        symplectic_raw(a.d, &a.coords, &b.coords) as i64,
        a.d,
    ))
}

/// Result of Gauss-Jordan elimination.
pub(crate) struct Echelon {
    pub rows: Vec<Vec<u32>>,
    pub pivots: Vec<usize>,
    /// A row vanished on the pivot columns but not on the trailing columns.
    pub inconsistent: bool,
}

/// Reduced row echelon form, pivoting only on the first `pivot_cols` columns.
/// Trailing columns are carried along; this is how a linear functional is
/// tracked next to its basis.
pub(crate) fn echelon(d: Modulus, mut rows: Vec<Vec<u32>>, pivot_cols: usize) -> Echelon {
    let mut pivots = Vec::new();
    let mut r = 0;
    for c in 0..pivot_cols {
        if r == rows.len() {
            break;
        }
        let Some(i) = (r..rows.len()).find(|&i| rows[i][c] != 0) else {
            continue;
        };
        rows.swap(i, r);
        let s = d.inv(rows[r][c]).expect("nonzero pivot");
        d.scale(&mut rows[r], s);
        let pivot_row = rows[r].clone();
        for (k, row) in rows.iter_mut().enumerate() {
            if k != r && row[c] != 0 {
                let f = d.neg(row[c]);
                d.axpy(row, f, &pivot_row);
            }
        }
        pivots.push(c);
        r += 1;
    }
    let inconsistent = rows[r..].iter().any(|row| row.iter().any(|&x| x != 0));
    rows.truncate(r);
    Echelon {
        rows,
        pivots,
        inconsistent,
    }
}

/// Nullspace of the rows under the standard dot product.
pub(crate) fn nullspace(d: Modulus, rows: Vec<Vec<u32>>, ncols: usize) -> Vec<Vec<u32>> {
    let e = echelon(d, rows, ncols);
    let mut is_pivot = vec![false; ncols];
    for &p in &e.pivots {
        is_pivot[p] = true;
    }
    let mut out = Vec::new();
    for free in (0..ncols).filter(|&c| !is_pivot[c]) {
        let mut v = vec![0u32; ncols];
        v[free] = 1;
        for (row, &p) in e.rows.iter().zip(&e.pivots) {
            v[p] = d.neg(row[free]);
        }
        out.push(v);
    }
    out
}

/// A subspace of Z_d^{2n}, stored as its unique RREF basis.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Subspace {
    d: Modulus,
    n: usize,
    rows: Vec<Vec<u32>>,
    pivots: Vec<usize>,
}

impl Subspace {
    pub fn zero(d: Modulus, n: usize) -> Self {
        Subspace {
            d,
            n,
            rows: Vec::new(),
            pivots: Vec::new(),
        }
    }

    pub fn full(d: Modulus, n: usize) -> Self {
        let rows = (0..2 * n)
            .map(|i| {
                let mut r = vec![0; 2 * n];
                r[i] = 1;
                r
            })
            .collect();
        Subspace {
            d,
            n,
            rows,
            pivots: (0..2 * n).collect(),
        }
    }

    pub fn span<'a, I>(d: Modulus, n: usize, vectors: I) -> Result<Self>
    where
        I: IntoIterator<Item = &'a SymplecticVector>,
    {
        let mut rows = Vec::new();
        for v in vectors {
            check_vec(d, n, v)?;
            rows.push(v.coords.clone());
        }
        Ok(Self::from_rows(d, n, rows))
    }

    pub(crate) fn from_rows(d: Modulus, n: usize, rows: Vec<Vec<u32>>) -> Self {
        let e = echelon(d, rows, 2 * n);
        Subspace {
            d,
            n,
            rows: e.rows,
            pivots: e.pivots,
        }
    }

    #[inline]
    pub fn modulus(&self) -> Modulus {
        self.d
    }

    #[inline]
    pub fn n(&self) -> usize {
        self.n
    }

    #[inline]
    pub fn dim(&self) -> usize {
        self.rows.len()
    }

    /// Number of elements, `None` on overflow.
    pub fn size(&self) -> Option<u128> {
        (self.d.get() as u128).checked_pow(self.dim() as u32)
    }

    pub fn basis(&self) -> Vec<SymplecticVector> {
        self.rows
            .iter()
            .map(|r| SymplecticVector::from_raw(self.d, r.clone()))
            .collect()
    }

    pub(crate) fn rows(&self) -> &[Vec<u32>] {
        &self.rows
    }

    pub(crate) fn pivots(&self) -> &[usize] {
        &self.pivots
    }

    /// Reduces `v` modulo the span by zeroing every pivot coordinate. The
    /// result depends only on the coset `v + self`.
    pub(crate) fn reduce_raw(&self, v: &mut [u32]) {
        for (row, &p) in self.rows.iter().zip(&self.pivots) {
            let c = v[p];
            if c != 0 {
                self.d.axpy(v, self.d.neg(c), row);
            }
        }
    }

    pub fn reduce(&self, v: &SymplecticVector) -> SymplecticVector {
        let mut c = v.coords.clone();
        self.reduce_raw(&mut c);
        SymplecticVector::from_raw(self.d, c)
    }

    pub fn contains(&self, v: &SymplecticVector) -> bool {
        if v.coords.len() != 2 * self.n || v.d != self.d {
            return false;
        }
        self.coordinates_raw(&v.coords).is_some()
    }

    /// Coefficients of `v` in the RREF basis, if `v` lies in the span.
    pub(crate) fn coordinates_raw(&self, v: &[u32]) -> Option<Vec<u32>> {
        let coeffs: Vec<u32> = self.pivots.iter().map(|&p| v[p]).collect();
        let mut r = v.to_vec();
        for (row, &c) in self.rows.iter().zip(&coeffs) {
            self.d.axpy(&mut r, self.d.neg(c), row);
        }
        r.iter().all(|&x| x == 0).then_some(coeffs)
    }

    pub fn contains_subspace(&self, other: &Subspace) -> bool {
        other
            .rows
            .iter()
            .all(|r| self.coordinates_raw(r).is_some())
    }

    pub fn sum(&self, other: &Subspace) -> Subspace {
        let mut rows = self.rows.clone();
        rows.extend(other.rows.iter().cloned());
        Self::from_rows(self.d, self.n, rows)
    }

    pub fn with_vector(&self, v: &SymplecticVector) -> Subspace {
        let mut rows = self.rows.clone();
        rows.push(v.coords.clone());
        Self::from_rows(self.d, self.n, rows)
    }

    /// Vectors orthogonal under the standard dot product.
    fn annihilator(&self) -> Vec<Vec<u32>> {
        nullspace(self.d, self.rows.clone(), 2 * self.n)
    }

    pub fn intersection(&self, other: &Subspace) -> Subspace {
        let mut ann = self.annihilator();
        ann.extend(other.annihilator());
        Self::from_rows(self.d, self.n, nullspace(self.d, ann, 2 * self.n))
    }

    /// Symplectic complement `{b : [a, b] = 0 for all a in self}`.
    pub fn perp(&self) -> Subspace {
        let w: Vec<Vec<u32>> = self
            .rows
            .iter()
            .map(|r| SymplecticVector::from_raw(self.d, r.clone()).form_row())
            .collect();
        Self::from_rows(self.d, self.n, nullspace(self.d, w, 2 * self.n))
    }

    /// `self ∩ a^⊥`, computed by clearing the form against one basis row.
    pub fn intersect_perp(&self, a: &SymplecticVector) -> Subspace {
        let forms: Vec<u32> = self
            .rows
            .iter()
            .map(|r| symplectic_raw(self.d, &a.coords, r))
            .collect();
        let Some(k) = forms.iter().position(|&f| f != 0) else {
            return self.clone();
        };
        let inv = self.d.inv(forms[k]).expect("nonzero");
        let mut rows = Vec::with_capacity(self.rows.len() - 1);
        for (i, r) in self.rows.iter().enumerate() {
            if i == k {
                continue;
            }
            let mut r = r.clone();
            let c = self.d.neg(self.d.mul(forms[i], inv));
            self.d.axpy(&mut r, c, &self.rows[k]);
            rows.push(r);
        }
        Self::from_rows(self.d, self.n, rows)
    }

    pub fn is_isotropic(&self) -> bool {
        for i in 0..self.rows.len() {
            for j in i + 1..self.rows.len() {
                if symplectic_raw(self.d, &self.rows[i], &self.rows[j]) != 0 {
                    return false;
                }
            }
        }
        true
    }

    /// `self ∩ self^⊥`.
    pub fn radical(&self) -> Subspace {
        self.intersection(&self.perp())
    }

    /// `dim S - dim rad S`; always even.
    pub fn symplectic_rank(&self) -> usize {
        self.dim() - self.radical().dim()
    }

    /// All elements, in the order of their basis coefficients. Only call on
    /// small subspaces.
    pub fn elements(&self) -> Vec<SymplecticVector> {
        let d = self.d.get();
        let k = self.dim();
        let total = (d as usize).pow(k as u32);
        let mut out = Vec::with_capacity(total);
        let mut coeffs = vec![0u32; k];
        for _ in 0..total {
            let mut v = vec![0u32; 2 * self.n];
            for (row, &c) in self.rows.iter().zip(&coeffs) {
                self.d.axpy(&mut v, c, row);
            }
            out.push(SymplecticVector::from_raw(self.d, v));
            for c in coeffs.iter_mut() {
                *c += 1;
                if *c < d {
                    break;
                }
                *c = 0;
            }
        }
        out
    }
}

fn check_vec(d: Modulus, n: usize, v: &SymplecticVector) -> Result<()> {
    if v.d != d {
        return Err(Error::ModulusMismatch {
            left: d.get(),
            right: v.d.get(),
        });
    }
    if v.coords.len() != 2 * n {
        return Err(Error::DimensionMismatch {
            expected: 2 * n,
            found: v.coords.len(),
        });
    }
    Ok(())
}

pub(crate) fn check_vector(d: Modulus, n: usize, v: &SymplecticVector) -> Result<()> {
    check_vec(d, n, v)
}

/// A subspace together with a linear functional on it, stored as the value
/// of the functional on each RREF basis row.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct ValuedSubspace {
    space: Subspace,
    values: Vec<u32>,
}

impl ValuedSubspace {
    pub fn zero(d: Modulus, n: usize) -> Self {
        ValuedSubspace {
            space: Subspace::zero(d, n),
            values: Vec::new(),
        }
    }

    /// Spans the vectors and extends the given values linearly. Fails if the
    /// values are not the restriction of a linear functional.
    pub fn from_pairs<'a, I>(d: Modulus, n: usize, pairs: I) -> Result<Self>
    where
        I: IntoIterator<Item = (&'a SymplecticVector, u32)>,
    {
        let mut rows = Vec::new();
        for (v, val) in pairs {
            check_vec(d, n, v)?;
            let mut r = v.coords.clone();
            r.push(val % d.get());
            rows.push(r);
        }
        Self::from_augmented(d, n, rows)
            .ok_or_else(|| Error::InconsistentAssignment("values are not linear".into()))
    }

    /// Rows of length 2n + 1 with the value in the last column.
    pub(crate) fn from_augmented(d: Modulus, n: usize, rows: Vec<Vec<u32>>) -> Option<Self> {
        let e = echelon(d, rows, 2 * n);
        if e.inconsistent {
            return None;
        }
        let values = e.rows.iter().map(|r| r[2 * n]).collect();
        let rows = e
            .rows
            .into_iter()
            .map(|mut r| {
                r.truncate(2 * n);
                r
            })
            .collect();
        Some(ValuedSubspace {
            space: Subspace {
                d,
                n,
                rows,
                pivots: e.pivots,
            },
            values,
        })
    }

    pub(crate) fn augmented_rows(&self) -> Vec<Vec<u32>> {
        self.space
            .rows
            .iter()
            .zip(&self.values)
            .map(|(r, &v)| {
                let mut r = r.clone();
                r.push(v);
                r
            })
            .collect()
    }

    pub fn space(&self) -> &Subspace {
        &self.space
    }

    pub fn values(&self) -> &[u32] {
        &self.values
    }

    pub(crate) fn value_raw(&self, v: &[u32]) -> Option<u32> {
        let coeffs = self.space.coordinates_raw(v)?;
        let d = self.space.d;
        Some(
            coeffs
                .iter()
                .zip(&self.values)
                .fold(0, |acc, (&c, &x)| d.add(acc, d.mul(c, x))),
        )
    }

    /// Value of the functional at `v`, or `None` if `v` is outside the span.
    pub fn value(&self, v: &SymplecticVector) -> Option<u32> {
        if v.coords.len() != 2 * self.space.n {
            return None;
        }
        self.value_raw(&v.coords)
    }

    /// Reduces `(v, val)` modulo the valued span, returning the residual
    /// vector and value.
    pub(crate) fn reduce_pair(&self, v: &mut [u32], val: &mut u32) {
        let d = self.space.d;
        for ((row, &p), &x) in self.space.rows.iter().zip(&self.space.pivots).zip(&self.values) {
            let c = v[p];
            if c != 0 {
                let nc = d.neg(c);
                d.axpy(v, nc, row);
                *val = d.add(*val, d.mul(nc, x));
            }
        }
    }

    /// Restriction of the functional to a subspace of its domain.
    pub fn restrict(&self, sub: &Subspace) -> Result<ValuedSubspace> {
        let mut values = Vec::with_capacity(sub.dim());
        for r in &sub.rows {
            values.push(
                self.value_raw(r)
                    .ok_or_else(|| Error::internal("restriction outside domain"))?,
            );
        }
        Ok(ValuedSubspace {
            space: sub.clone(),
            values,
        })
    }

    /// `self ∩ a^⊥` with the functional restricted.
    pub fn intersect_perp(&self, a: &SymplecticVector) -> ValuedSubspace {
        let d = self.space.d;
        let forms: Vec<u32> = self
            .space
            .rows
            .iter()
            .map(|r| symplectic_raw(d, &a.coords, r))
            .collect();
        let Some(k) = forms.iter().position(|&f| f != 0) else {
            return self.clone();
        };
        let inv = d.inv(forms[k]).expect("nonzero");
        let full = self.augmented_rows();
        let mut rows = Vec::with_capacity(full.len() - 1);
        for (i, r) in full.iter().enumerate() {
            if i == k {
                continue;
            }
            let mut r = r.clone();
            let c = d.neg(d.mul(forms[i], inv));
            d.axpy(&mut r, c, &full[k]);
            rows.push(r);
        }
        Self::from_augmented(d, self.space.n, rows).expect("restriction stays consistent")
    }

    /// Adds `(v, val)` to the span. Fails if `v` is already in the span with a
    /// different value.
    pub fn with_pair(&self, v: &SymplecticVector, val: u32) -> Option<ValuedSubspace> {
        let mut rows = self.augmented_rows();
        let mut r = v.coords.clone();
        r.push(val % self.space.d.get());
        rows.push(r);
        Self::from_augmented(self.space.d, self.space.n, rows)
    }

    pub fn merge(&self, other: &ValuedSubspace) -> Option<ValuedSubspace> {
        let mut rows = self.augmented_rows();
        rows.extend(other.augmented_rows());
        Self::from_augmented(self.space.d, self.space.n, rows)
    }
}
