//! Closed noncontextual sets, their value assignments and the phase-point
//! operators they label.
//!
//! A CNC set is either a subspace `S` of `E = Z_d^{2n}` or a union
//! `⋃_k <a_k, I>` of `ξ >= 2` subspaces sharing an isotropic core `I`, where
//! the generators `a_k` lie in `I^⊥` and pairwise do not commute.

use std::collections::{BTreeSet, HashSet};

use num_bigint::BigUint;
use num_complex::Complex64;
use num_rational::BigRational;
use num_traits::Zero;
use rand::Rng;

use crate::dense::{roots_of_unity, DenseCap, DenseOperator};
use crate::error::{Error, Result};
use crate::field::Modulus;
use crate::pauli::{add_pauli, OutcomeAssignment};
use crate::symplectic::{check_vector, symplectic_raw, Subspace, SymplecticVector, ValuedSubspace};

/// Default bound on the number of set elements any routine will materialize.
pub const DEFAULT_MAX_ELEMENTS: u128 = 6561;

#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum CncSet {
    Subspace(Subspace),
    Cone {
        core: Subspace,
        generators: Vec<SymplecticVector>,
    },
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Form {
    Subspace,
    Cone,
}

impl Form {
    pub fn as_str(self) -> &'static str {
        match self {
            Form::Subspace => "subspace",
            Form::Cone => "cone",
        }
    }
}

impl CncSet {
    /// A cone set with its generators reduced modulo the core, scaled to a
    /// leading 1 and sorted. Collapses to a subspace when fewer than two
    /// generators remain.
    pub fn cone(core: Subspace, generators: Vec<SymplecticVector>) -> Result<CncSet> {
        let (d, n) = (core.modulus(), core.n());
        let mut gens = BTreeSet::new();
        for g in &generators {
            check_vector(d, n, g)?;
            let r = core.reduce(g);
            if r.is_zero() {
                return Err(Error::invalid_set("generator lies in the core"));
            }
            gens.insert(r.normalized().0);
        }
        let gens: Vec<_> = gens.into_iter().collect();
        if gens.len() <= 1 {
            return Ok(CncSet::Subspace(core.sum(&Subspace::span(d, n, &gens)?)));
        }
        Ok(CncSet::Cone {
            core,
            generators: gens,
        })
    }

    pub fn modulus(&self) -> Modulus {
        match self {
            CncSet::Subspace(s) => s.modulus(),
            CncSet::Cone { core, .. } => core.modulus(),
        }
    }

    pub fn n(&self) -> usize {
        match self {
            CncSet::Subspace(s) => s.n(),
            CncSet::Cone { core, .. } => core.n(),
        }
    }

    pub fn form(&self) -> Form {
        match self {
            CncSet::Subspace(_) => Form::Subspace,
            CncSet::Cone { .. } => Form::Cone,
        }
    }

    /// Number of pairwise noncommuting generators; 0 for subspaces.
    pub fn xi(&self) -> usize {
        match self {
            CncSet::Subspace(_) => 0,
            CncSet::Cone { generators, .. } => generators.len(),
        }
    }

    /// Number of stored generators: the basis of a subspace, or the core
    /// basis plus the noncommuting generators of a cone.
    pub fn generator_count(&self) -> usize {
        match self {
            CncSet::Subspace(s) => s.dim(),
            CncSet::Cone { core, generators } => core.dim() + generators.len(),
        }
    }

    /// The stored generators in value order: subspace basis, or core basis
    /// followed by the cone generators.
    pub fn generators(&self) -> Vec<SymplecticVector> {
        match self {
            CncSet::Subspace(s) => s.basis(),
            CncSet::Cone { core, generators } => {
                let mut g = core.basis();
                g.extend(generators.iter().cloned());
                g
            }
        }
    }

    pub fn span(&self) -> Subspace {
        match self {
            CncSet::Subspace(s) => s.clone(),
            CncSet::Cone { core, generators } => {
                let mut rows: Vec<Vec<u32>> = core.rows().to_vec();
                rows.extend(generators.iter().map(|g| g.coords().to_vec()));
                Subspace::from_rows(core.modulus(), core.n(), rows)
            }
        }
    }

    pub fn contains(&self, v: &SymplecticVector) -> bool {
        match self {
            CncSet::Subspace(s) => s.contains(v),
            CncSet::Cone { core, generators } => {
                if v.n() != core.n() || v.modulus() != core.modulus() {
                    return false;
                }
                let r = core.reduce(v);
                if r.is_zero() {
                    return true;
                }
                let r = r.normalized().0;
                generators.iter().any(|g| core.reduce(g).normalized().0 == r)
            }
        }
    }

    /// `|Ω| = (ξ(d-1) + 1) d^{dim I}` for cones; `None` on overflow.
    pub fn size(&self) -> Option<u128> {
        match self {
            CncSet::Subspace(s) => s.size(),
            CncSet::Cone { core, generators } => {
                let d = core.modulus().get() as u128;
                let lines = (generators.len() as u128).checked_mul(d - 1)?.checked_add(1)?;
                lines.checked_mul(core.size()?)
            }
        }
    }

    /// Structural check of the CNC invariants.
    pub fn validate(&self) -> bool {
        match self {
            CncSet::Subspace(_) => true,
            CncSet::Cone { core, generators } => {
                if generators.len() < 2 || !core.is_isotropic() {
                    return false;
                }
                let d = core.modulus();
                for g in generators {
                    if g.modulus() != d || g.n() != core.n() || core.reduce(g).is_zero() {
                        return false;
                    }
                    if core.rows().iter().any(|r| symplectic_raw(d, r, g.coords()) != 0) {
                        return false;
                    }
                }
                for i in 0..generators.len() {
                    for j in i + 1..generators.len() {
                        if generators[i].form(&generators[j]) == 0 {
                            return false;
                        }
                    }
                }
                true
            }
        }
    }

    /// True iff the set is closed under addition.
    pub fn is_additively_closed(&self) -> bool {
        match self {
            CncSet::Subspace(_) => true,
            CncSet::Cone { core, generators } => {
                generators.len() == core.modulus().get() as usize + 1
                    && self.span().dim() == core.dim() + 2
            }
        }
    }

    /// Every element, each once. Fails beyond `max_elements`.
    pub fn elements(&self, max_elements: u128) -> Result<Vec<SymplecticVector>> {
        let size = self.size().unwrap_or(u128::MAX);
        if size > max_elements {
            return Err(Error::CapExceeded {
                what: "CNC set size",
                needed: size,
                limit: max_elements,
                next_index: None,
            });
        }
        Ok(match self {
            CncSet::Subspace(s) => s.elements(),
            CncSet::Cone { core, generators } => {
                let d = core.modulus();
                let core_elems = core.elements();
                let mut out = core_elems.clone();
                for g in generators {
                    for lam in 1..d.get() {
                        let lg = g.scaled(lam);
                        out.extend(core_elems.iter().map(|i| lg.plus(i)));
                    }
                }
                out
            }
        })
    }
}

/// A CNC set together with values on its stored generators. Values of a
/// subspace form extend linearly; values of a cone form extend linearly on
/// each `<a_k, I>` separately.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct ValueAssignment {
    owner: CncSet,
    values: Vec<u32>,
}

/// Attaches generator values to a set.
pub fn extend_assignment(set: &CncSet, values: &[u32]) -> Result<ValueAssignment> {
    if !set.validate() {
        return Err(Error::invalid_set("set fails validation"));
    }
    if values.len() != set.generator_count() {
        return Err(Error::DimensionMismatch {
            expected: set.generator_count(),
            found: values.len(),
        });
    }
    let d = set.modulus().get();
    Ok(ValueAssignment {
        owner: set.clone(),
        values: values.iter().map(|v| v % d).collect(),
    })
}

impl ValueAssignment {
    pub fn owner(&self) -> &CncSet {
        &self.owner
    }

    pub fn values(&self) -> &[u32] {
        &self.values
    }

    fn repr(&self) -> PointRepr {
        let (d, n) = (self.owner.modulus(), self.owner.n());
        let pairs = |vecs: Vec<SymplecticVector>, vals: &[u32]| -> Vec<Vec<u32>> {
            vecs.into_iter()
                .zip(vals)
                .map(|(v, &x)| {
                    let mut r = v.into_coords();
                    r.push(x);
                    r
                })
                .collect()
        };
        match &self.owner {
            CncSet::Subspace(s) => PointRepr::Subspace(
                ValuedSubspace::from_augmented(d, n, pairs(s.basis(), &self.values))
                    .expect("basis rows are independent"),
            ),
            CncSet::Cone { core, generators } => {
                let k = core.dim();
                PointRepr::Cone {
                    core: ValuedSubspace::from_augmented(d, n, pairs(core.basis(), &self.values[..k]))
                        .expect("basis rows are independent"),
                    generators: generators
                        .iter()
                        .cloned()
                        .zip(self.values[k..].iter().copied())
                        .collect(),
                }
            }
        }
    }

    /// `γ(v)`, or `None` if `v` is not in the set.
    pub fn value_at(&self, v: &SymplecticVector) -> Option<u32> {
        self.repr().value(v)
    }

    pub fn is_linear(&self) -> bool {
        self.repr().is_linear()
    }
}

pub fn is_linear(assignment: &ValueAssignment) -> bool {
    assignment.is_linear()
}

/// Working representation: valued subspace, or valued core plus valued
/// generators. Not necessarily canonical.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub(crate) enum PointRepr {
    Subspace(ValuedSubspace),
    Cone {
        core: ValuedSubspace,
        generators: Vec<(SymplecticVector, u32)>,
    },
}

impl PointRepr {
    fn modulus(&self) -> Modulus {
        match self {
            PointRepr::Subspace(s) => s.space().modulus(),
            PointRepr::Cone { core, .. } => core.space().modulus(),
        }
    }

    fn n(&self) -> usize {
        match self {
            PointRepr::Subspace(s) => s.space().n(),
            PointRepr::Cone { core, .. } => core.space().n(),
        }
    }

    fn value(&self, v: &SymplecticVector) -> Option<u32> {
        if v.modulus() != self.modulus() || v.n() != self.n() {
            return None;
        }
        match self {
            PointRepr::Subspace(s) => s.value(v),
            PointRepr::Cone { core, generators } => {
                let d = self.modulus();
                let mut r = v.coords().to_vec();
                let mut val = 0u32;
                core.reduce_pair(&mut r, &mut val);
                // val now holds -γ(core part)
                let core_part = d.neg(val);
                let Some(&lead) = r.iter().find(|&&c| c != 0) else {
                    return Some(core_part);
                };
                let inv = d.inv(lead).expect("nonzero");
                let mut normalized = r.clone();
                d.scale(&mut normalized, inv);
                for (g, gv) in generators {
                    let mut gr = g.coords().to_vec();
                    let mut gval = *gv;
                    core.reduce_pair(&mut gr, &mut gval);
                    let glead = *gr.iter().find(|&&c| c != 0)?;
                    let ginv = d.inv(glead).expect("nonzero");
                    d.scale(&mut gr, ginv);
                    if gr == normalized {
                        // v = lead * (ginv * g_reduced) + core part
                        let scale = d.mul(lead, ginv);
                        return Some(d.add(core_part, d.mul(scale, gval)));
                    }
                }
                None
            }
        }
    }

    fn is_linear(&self) -> bool {
        match self {
            PointRepr::Subspace(_) => true,
            PointRepr::Cone { core, generators } => {
                let mut rows = core.augmented_rows();
                for (g, v) in generators {
                    let mut r = g.coords().to_vec();
                    r.push(*v);
                    rows.push(r);
                }
                ValuedSubspace::from_augmented(self.modulus(), self.n(), rows).is_some()
            }
        }
    }

    fn set(&self) -> CncSet {
        match self {
            PointRepr::Subspace(s) => CncSet::Subspace(s.space().clone()),
            PointRepr::Cone { core, generators } => CncSet::Cone {
                core: core.space().clone(),
                generators: generators.iter().map(|(g, _)| g.clone()).collect(),
            },
        }
    }

    fn values(&self) -> Vec<u32> {
        match self {
            PointRepr::Subspace(s) => s.values().to_vec(),
            PointRepr::Cone { core, generators } => {
                let mut v = core.values().to_vec();
                v.extend(generators.iter().map(|(_, x)| *x));
                v
            }
        }
    }

    /// Canonical form: reduced, normalized, sorted generators; cones with at
    /// most one generator, and additively closed cones carrying a linear
    /// assignment, become subspaces.
    fn canonicalize(self) -> Result<PointRepr> {
        let PointRepr::Cone { core, generators } = self else {
            return Ok(self);
        };
        if !core.space().is_isotropic() {
            return Err(Error::invalid_set("core is not isotropic"));
        }
        let d = core.space().modulus();
        let n = core.space().n();
        let mut gens: Vec<(SymplecticVector, u32)> = Vec::with_capacity(generators.len());
        for (g, v) in generators {
            let mut r = g.into_coords();
            let mut val = v;
            core.reduce_pair(&mut r, &mut val);
            let Some(&lead) = r.iter().find(|&&c| c != 0) else {
                if val != 0 {
                    return Err(Error::InconsistentAssignment(
                        "generator in the core with a conflicting value".into(),
                    ));
                }
                continue;
            };
            let s = d.inv(lead).expect("nonzero");
            d.scale(&mut r, s);
            gens.push((SymplecticVector::from_raw(d, r), d.mul(val, s)));
        }
        gens.sort();
        let mut deduped: Vec<(SymplecticVector, u32)> = Vec::with_capacity(gens.len());
        for (g, v) in gens {
            match deduped.last() {
                Some((pg, pv)) if *pg == g => {
                    if *pv != v {
                        return Err(Error::InconsistentAssignment(
                            "generator given twice with different values".into(),
                        ));
                    }
                }
                _ => deduped.push((g, v)),
            }
        }
        let gens = deduped;
        if gens.len() <= 1 {
            let mut s = core;
            if let Some((g, v)) = gens.first() {
                s = s
                    .with_pair(g, *v)
                    .ok_or_else(|| Error::internal("generator dependent on core"))?;
            }
            return Ok(PointRepr::Subspace(s));
        }
        if gens.len() == d.get() as usize + 1 {
            let mut rows = core.augmented_rows();
            for (g, v) in &gens {
                let mut r = g.coords().to_vec();
                r.push(*v);
                rows.push(r);
            }
            let plain: Vec<Vec<u32>> = rows.iter().map(|r| r[..2 * n].to_vec()).collect();
            if Subspace::from_rows(d, n, plain).dim() == core.space().dim() + 2 {
                if let Some(s) = ValuedSubspace::from_augmented(d, n, rows) {
                    return Ok(PointRepr::Subspace(s));
                }
            }
        }
        Ok(PointRepr::Cone {
            core,
            generators: gens,
        })
    }

    /// `Ω ∩ a^⊥` with `γ` restricted. Cones may come back degenerate; the
    /// caller canonicalizes.
    pub(crate) fn intersect_perp(&self, a: &SymplecticVector) -> PointRepr {
        match self {
            PointRepr::Subspace(s) => PointRepr::Subspace(s.intersect_perp(a)),
            PointRepr::Cone { core, generators } => {
                let d = self.modulus();
                let forms: Vec<u32> = core
                    .space()
                    .rows()
                    .iter()
                    .map(|r| symplectic_raw(d, a.coords(), r))
                    .collect();
                match forms.iter().position(|&f| f != 0) {
                    None => PointRepr::Cone {
                        core: core.clone(),
                        generators: generators
                            .iter()
                            .filter(|(g, _)| a.form(g) == 0)
                            .cloned()
                            .collect(),
                    },
                    Some(k) => {
                        let i0 = &core.space().rows()[k];
                        let i0_val = core.values()[k];
                        let inv = d.inv(forms[k]).expect("nonzero");
                        let gens = generators
                            .iter()
                            .map(|(g, v)| {
                                let t = d.neg(d.mul(a.form(g), inv));
                                let mut c = g.coords().to_vec();
                                d.axpy(&mut c, t, i0);
                                (SymplecticVector::from_raw(d, c), d.add(*v, d.mul(t, i0_val)))
                            })
                            .collect();
                        PointRepr::Cone {
                            core: core.intersect_perp(a),
                            generators: gens,
                        }
                    }
                }
            }
        }
    }

    /// Adds `(v, val)` to the linear part: the subspace itself, or the core.
    fn with_isotropic(&self, extra: &ValuedSubspace) -> Result<PointRepr> {
        let merged = |s: &ValuedSubspace| {
            s.merge(extra)
                .ok_or_else(|| Error::internal("measured values conflict with the assignment"))
        };
        Ok(match self {
            PointRepr::Subspace(s) => PointRepr::Subspace(merged(s)?),
            PointRepr::Cone { core, generators } => PointRepr::Cone {
                core: merged(core)?,
                generators: generators.clone(),
            },
        })
    }

    fn map(&self, f: &dyn Fn(&[u32]) -> Vec<u32>, shift: &dyn Fn(&[u32]) -> u32) -> PointRepr {
        let d = self.modulus();
        let n = self.n();
        let map_vs = |s: &ValuedSubspace| {
            let rows = s
                .augmented_rows()
                .into_iter()
                .map(|r| {
                    let mut img = f(&r[..2 * n]);
                    let val = d.sub(r[2 * n], shift(&img));
                    img.push(val);
                    img
                })
                .collect();
            ValuedSubspace::from_augmented(d, n, rows).expect("invertible map keeps rows independent")
        };
        match self {
            PointRepr::Subspace(s) => PointRepr::Subspace(map_vs(s)),
            PointRepr::Cone { core, generators } => PointRepr::Cone {
                core: map_vs(core),
                generators: generators
                    .iter()
                    .map(|(g, v)| {
                        let img = f(g.coords());
                        let val = d.sub(*v, shift(&img));
                        (SymplecticVector::from_raw(d, img), val)
                    })
                    .collect(),
            },
        }
    }
}

/// A phase point `(Ω, γ)` in canonical form. Two phase points are equal iff
/// they label the same operator.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct PhasePoint {
    repr: PointRepr,
}

/// What a Pauli measurement on a phase point does.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum MeasurementKind {
    /// `a ∈ Ω`: the outcome is fixed to `γ(a)`.
    Deterministic(u32),
    /// `a ∉ Ω`: every outcome has probability `1/d`.
    Uniform,
}

/// Result of projecting a phase point onto a stabilizer eigenspace.
#[derive(Clone, Debug)]
pub struct IsotropicUpdate {
    /// Exact `Tr(Π_I^r A_Ω^γ)`.
    pub probability: BigRational,
    pub point: Option<PhasePoint>,
}

impl IsotropicUpdate {
    pub fn probability_f64(&self) -> f64 {
        ratio_to_f64(&self.probability)
    }
}

pub(crate) fn ratio_to_f64(r: &BigRational) -> f64 {
    use num_traits::ToPrimitive;
    r.to_f64().unwrap_or(f64::NAN)
}

impl PhasePoint {
    pub(crate) fn from_repr(repr: PointRepr) -> Result<PhasePoint> {
        let repr = repr.canonicalize()?;
        Ok(PhasePoint { repr })
    }

    /// Validates the assignment's set and canonicalizes.
    pub fn new(assignment: &ValueAssignment) -> Result<PhasePoint> {
        if !assignment.owner.validate() {
            return Err(Error::invalid_set("set fails validation"));
        }
        Self::from_repr(assignment.repr())
    }

    /// Builds a point from value pairs on the linear part and on the cone
    /// generators. With no generators, the linear part is a subspace form.
    pub fn from_pairs(
        d: Modulus,
        n: usize,
        linear: &[(SymplecticVector, u32)],
        generators: &[(SymplecticVector, u32)],
    ) -> Result<PhasePoint> {
        if n == 0 {
            return Err(Error::NoQudits);
        }
        let base = ValuedSubspace::from_pairs(d, n, linear.iter().map(|(v, x)| (v, *x)))?;
        if generators.is_empty() {
            return Self::from_repr(PointRepr::Subspace(base));
        }
        for (g, _) in generators {
            check_vector(d, n, g)?;
        }
        let set = CncSet::Cone {
            core: base.space().clone(),
            generators: generators.iter().map(|(g, _)| g.clone()).collect(),
        };
        if !set.validate() {
            return Err(Error::invalid_set("cone generators fail validation"));
        }
        Self::from_repr(PointRepr::Cone {
            core: base,
            generators: generators.to_vec(),
        })
    }

    /// The Wigner point `A_u`: `Ω = E`, `γ(b) = [b, u]`.
    pub fn wigner(u: &SymplecticVector) -> PhasePoint {
        let d = u.modulus();
        let n = u.n();
        let pairs: Vec<(SymplecticVector, u32)> = (0..2 * n)
            .map(|k| {
                let mut c = vec![0u32; 2 * n];
                c[k] = 1;
                let b = SymplecticVector::from_raw(d, c);
                let v = b.form(u);
                (b, v)
            })
            .collect();
        Self::from_pairs(d, n, &pairs, &[]).expect("full space is a valid CNC set")
    }

    /// Maximally mixed state: `Ω = {0}`.
    pub fn maximally_mixed(d: Modulus, n: usize) -> PhasePoint {
        PhasePoint {
            repr: PointRepr::Subspace(ValuedSubspace::zero(d, n)),
        }
    }

    /// Stabilizer state `Π_L^r` for a Lagrangian outcome assignment.
    pub fn stabilizer(r: &OutcomeAssignment) -> Result<PhasePoint> {
        if r.subspace().dim() != r.subspace().n() {
            return Err(Error::precondition("stabilizer subspace must be Lagrangian"));
        }
        Self::from_repr(PointRepr::Subspace(r.valued().clone()))
    }

    pub fn modulus(&self) -> Modulus {
        self.repr.modulus()
    }

    pub fn n(&self) -> usize {
        self.repr.n()
    }

    pub fn set(&self) -> CncSet {
        self.repr.set()
    }

    pub fn form(&self) -> Form {
        match self.repr {
            PointRepr::Subspace(_) => Form::Subspace,
            PointRepr::Cone { .. } => Form::Cone,
        }
    }

    pub fn xi(&self) -> usize {
        match &self.repr {
            PointRepr::Subspace(_) => 0,
            PointRepr::Cone { generators, .. } => generators.len(),
        }
    }

    pub fn generator_count(&self) -> usize {
        match &self.repr {
            PointRepr::Subspace(s) => s.space().dim(),
            PointRepr::Cone { core, generators } => core.space().dim() + generators.len(),
        }
    }

    /// Values on [`CncSet::generators`] of [`PhasePoint::set`].
    pub fn values(&self) -> Vec<u32> {
        self.repr.values()
    }

    pub fn assignment(&self) -> ValueAssignment {
        ValueAssignment {
            owner: self.set(),
            values: self.values(),
        }
    }

    pub fn contains(&self, v: &SymplecticVector) -> bool {
        self.repr.value(v).is_some()
    }

    pub fn value(&self, v: &SymplecticVector) -> Option<u32> {
        self.repr.value(v)
    }

    pub fn is_linear(&self) -> bool {
        self.repr.is_linear()
    }

    /// `u` such that this point is `A_u`, if it is a Wigner point.
    pub fn wigner_label(&self) -> Option<SymplecticVector> {
        let PointRepr::Subspace(s) = &self.repr else {
            return None;
        };
        let (d, n) = (self.modulus(), self.n());
        if s.space().dim() != 2 * n {
            return None;
        }
        // γ(b) = [b, u] = w(b)·u, solved row by row
        let rows: Vec<Vec<u32>> = s
            .space()
            .basis()
            .iter()
            .zip(s.values())
            .map(|(b, &v)| {
                let mut r = b.form_row();
                r.push(v);
                r
            })
            .collect();
        let solved = ValuedSubspace::from_augmented(d, n, rows)?;
        let mut u = vec![0u32; 2 * n];
        for (&p, &v) in solved.space().pivots().iter().zip(solved.values()) {
            u[p] = v;
        }
        Some(SymplecticVector::from_raw(d, u))
    }

    /// All `(b, γ(b))` with `b ∈ Ω`.
    pub fn elements_with_values(&self, max_elements: u128) -> Result<Vec<(SymplecticVector, u32)>> {
        let d = self.modulus();
        let set = self.set();
        let size = set.size().unwrap_or(u128::MAX);
        if size > max_elements {
            return Err(Error::CapExceeded {
                what: "CNC set size",
                needed: size,
                limit: max_elements,
                next_index: None,
            });
        }
        let with_values = |s: &ValuedSubspace| -> Vec<(SymplecticVector, u32)> {
            s.space()
                .elements()
                .into_iter()
                .map(|e| {
                    let v = s.value(&e).expect("element of span");
                    (e, v)
                })
                .collect()
        };
        Ok(match &self.repr {
            PointRepr::Subspace(s) => with_values(s),
            PointRepr::Cone { core, generators } => {
                let core_elems = with_values(core);
                let mut out = core_elems.clone();
                for (g, gv) in generators {
                    for lam in 1..d.get() {
                        let lg = g.scaled(lam);
                        let lv = d.mul(lam, *gv);
                        out.extend(core_elems.iter().map(|(i, iv)| (lg.plus(i), d.add(lv, *iv))));
                    }
                }
                out
            }
        })
    }

    /// `A_Ω^γ = d^{-n} Σ_{b∈Ω} ω^{-γ(b)} T_b`.
    pub fn operator(&self, cap: DenseCap) -> Result<DenseOperator> {
        let d = self.modulus();
        let n = self.n();
        let mut op = DenseOperator::zeros(d, n, cap)?;
        let roots = roots_of_unity(d);
        let w = 1.0 / op.dim() as f64;
        for (b, g) in self.elements_with_values(cap.max_dim as u128 * cap.max_dim as u128)? {
            add_pauli(&mut op, &b, roots[d.neg(g) as usize] * Complex64::new(w, 0.0), &roots);
        }
        Ok(op)
    }

    pub fn measurement_kind(&self, a: &SymplecticVector) -> Result<MeasurementKind> {
        check_vector(self.modulus(), self.n(), a)?;
        if a.is_zero() {
            return Err(Error::ZeroLabel);
        }
        Ok(match self.repr.value(a) {
            Some(s) => MeasurementKind::Deterministic(s),
            None => MeasurementKind::Uniform,
        })
    }

    /// Post-measurement point after observing outcome `s` for `T_a`.
    pub fn post_measurement(&self, a: &SymplecticVector, s: u32) -> Result<PhasePoint> {
        let s = s % self.modulus().get();
        let piece = self.repr.intersect_perp(a);
        let out = match self.measurement_kind(a)? {
            MeasurementKind::Deterministic(v) => {
                if v != s {
                    return Err(Error::ZeroProbabilityBranch);
                }
                piece
            }
            MeasurementKind::Uniform => {
                let line = ValuedSubspace::from_pairs(self.modulus(), self.n(), [(a, s)])?;
                piece.with_isotropic(&line)?
            }
        };
        PhasePoint::from_repr(out)
    }

    /// Samples an outcome for `T_a` and returns it with the updated point.
    pub fn measure<R: Rng + ?Sized>(&self, a: &SymplecticVector, rng: &mut R) -> Result<(u32, PhasePoint)> {
        let s = match self.measurement_kind(a)? {
            MeasurementKind::Deterministic(s) => s,
            MeasurementKind::Uniform => rng.gen_range(0..self.modulus().get()),
        };
        let next = self.post_measurement(a, s)?;
        Ok((s, next))
    }

    /// `Π_I^r A Π_I^r`, normalized, together with the exact acceptance
    /// probability `|Ω ∩ I| / |I|` (zero when `r` and `γ` disagree on `Ω ∩ I`).
    pub fn project_isotropic(&self, r: &OutcomeAssignment) -> Result<IsotropicUpdate> {
        let i_space = r.subspace();
        if i_space.modulus() != self.modulus() || i_space.n() != self.n() {
            return Err(Error::DimensionMismatch {
                expected: self.n(),
                found: i_space.n(),
            });
        }
        let d = self.modulus();
        let agrees = |piece: &ValuedSubspace| -> Result<Option<usize>> {
            let inter = piece.space().intersection(i_space);
            for b in inter.basis() {
                let g = piece.value(&b).ok_or_else(|| Error::internal("intersection"))?;
                let rv = r.value(&b).ok_or_else(|| Error::internal("intersection"))?;
                if g != rv {
                    return Ok(None);
                }
            }
            Ok(Some(inter.dim()))
        };
        let dd = BigUint::from(d.get());
        let pow = |k: usize| dd.pow(k as u32);
        let count = match &self.repr {
            PointRepr::Subspace(s) => match agrees(s)? {
                None => None,
                Some(k) => Some(pow(k)),
            },
            PointRepr::Cone { core, generators } => match agrees(core)? {
                None => None,
                Some(c) => {
                    let mut total = pow(c);
                    let mut ok = true;
                    for (g, v) in generators {
                        let piece = core
                            .with_pair(g, *v)
                            .ok_or_else(|| Error::internal("generator in core"))?;
                        match agrees(&piece)? {
                            None => {
                                ok = false;
                                break;
                            }
                            Some(k) => total += pow(k) - pow(c),
                        }
                    }
                    ok.then_some(total)
                }
            },
        };
        let Some(count) = count else {
            return Ok(IsotropicUpdate {
                probability: BigRational::zero(),
                point: None,
            });
        };
        let probability = BigRational::new(count.into(), pow(i_space.dim()).into());
        let mut piece = self.repr.clone();
        for b in i_space.basis() {
            piece = piece.intersect_perp(&b);
        }
        let point = PhasePoint::from_repr(piece.with_isotropic(r.valued())?)?;
        Ok(IsotropicUpdate {
            probability,
            point: Some(point),
        })
    }

    /// Image under the affine symplectic map `v ↦ f(v)` with the value shift
    /// `γ'(f(v)) = γ(v) - shift(f(v))`.
    pub(crate) fn map(&self, f: &dyn Fn(&[u32]) -> Vec<u32>, shift: &dyn Fn(&[u32]) -> u32) -> Result<PhasePoint> {
        PhasePoint::from_repr(self.repr.map(f, shift))
    }
}

/// Single-measurement update of a phase point; see [`PhasePoint::measure`].
pub fn measure_update_single<R: Rng + ?Sized>(
    point: &PhasePoint,
    a: &SymplecticVector,
    rng: &mut R,
) -> Result<(u32, PhasePoint)> {
    point.measure(a, rng)
}

/// Isotropic projection of a phase point; see [`PhasePoint::project_isotropic`].
pub fn measure_update_isotropic(point: &PhasePoint, r: &OutcomeAssignment) -> Result<IsotropicUpdate> {
    point.project_isotropic(r)
}

pub fn phase_point_operator(point: &PhasePoint, cap: DenseCap) -> Result<DenseOperator> {
    point.operator(cap)
}

/// Smallest superset of `seed ∪ {0}` closed under adding commuting pairs.
pub fn closure(
    d: Modulus,
    n: usize,
    seed: &[SymplecticVector],
    max_elements: u128,
) -> Result<Vec<SymplecticVector>> {
    let mut set: HashSet<SymplecticVector> = HashSet::new();
    let mut all: Vec<SymplecticVector> = Vec::new();
    let mut queue: Vec<SymplecticVector> = Vec::new();
    let push = |v: SymplecticVector,
                set: &mut HashSet<SymplecticVector>,
                all: &mut Vec<SymplecticVector>,
                queue: &mut Vec<SymplecticVector>|
     -> Result<()> {
        if set.insert(v.clone()) {
            if set.len() as u128 > max_elements {
                return Err(Error::CapExceeded {
                    what: "closure size",
                    needed: set.len() as u128,
                    limit: max_elements,
                    next_index: None,
                });
            }
            all.push(v.clone());
            queue.push(v);
        }
        Ok(())
    };
    push(SymplecticVector::zero(d, n), &mut set, &mut all, &mut queue)?;
    for v in seed {
        check_vector(d, n, v)?;
        push(v.clone(), &mut set, &mut all, &mut queue)?;
    }
    while let Some(x) = queue.pop() {
        let mut k = 0;
        while k < all.len() {
            let y = all[k].clone();
            if x.form(&y) == 0 {
                push(x.plus(&y), &mut set, &mut all, &mut queue)?;
            }
            k += 1;
        }
    }
    all.sort();
    Ok(all)
}

/// Identifies the CNC structure of a closed set given by its elements.
pub fn classify(d: Modulus, n: usize, elements: &[SymplecticVector]) -> Result<CncSet> {
    let elems: BTreeSet<SymplecticVector> = elements.iter().cloned().collect();
    for v in &elems {
        check_vector(d, n, v)?;
    }
    if !elems.contains(&SymplecticVector::zero(d, n)) {
        return Err(Error::NotClosed);
    }
    let span = Subspace::span(d, n, &elems)?;
    let candidate = if span.size() == Some(elems.len() as u128) {
        CncSet::Subspace(span)
    } else {
        let core_elems: Vec<SymplecticVector> = elems
            .iter()
            .filter(|v| elems.iter().all(|w| v.form(w) == 0))
            .cloned()
            .collect();
        let core = Subspace::span(d, n, &core_elems)?;
        let mut gens = BTreeSet::new();
        for v in &elems {
            let r = core.reduce(v);
            if !r.is_zero() {
                gens.insert(r.normalized().0);
            }
        }
        let set = CncSet::cone(core, gens.into_iter().collect())?;
        if !set.validate() {
            return Err(Error::NotClosed);
        }
        set
    };
    let mut got = candidate.elements(u128::MAX)?;
    got.sort();
    if got.len() != elems.len() || got.iter().zip(&elems).any(|(a, b)| a != b) {
        return Err(Error::NotClosed);
    }
    Ok(candidate)
}

/// `dn + 1` pairwise noncommuting Pauli labels on n qudits.
pub fn noncommuting_construction(n: usize, d: Modulus) -> Result<Vec<SymplecticVector>> {
    if n == 0 {
        return Err(Error::NoQudits);
    }
    // single-qudit lines c_1 = e, c_2 = f, c_{2+t} = e + t f
    let dm = d.get();
    let mut c: Vec<(u32, u32)> = vec![(1, 0), (0, 1)];
    c.extend((1..dm).map(|t| (1, t)));
    let last = c[dm as usize];
    let make = |slots: &[(u32, u32)]| {
        let mut coords = vec![0u32; 2 * n];
        for (k, &(z, x)) in slots.iter().enumerate() {
            coords[k] = z;
            coords[n + k] = x;
        }
        SymplecticVector::from_raw(d, coords)
    };
    let mut out = Vec::with_capacity(dm as usize * n + 1);
    for k in 0..n {
        for cj in &c[..dm as usize] {
            let mut slots = vec![last; k];
            slots.push(*cj);
            slots.resize(n, (0, 0));
            out.push(make(&slots));
        }
    }
    out.push(make(&vec![last; n]));
    Ok(out)
}

/// Random canonical phase point: a random isotropic core of dimension
/// `core_dim` and `xi` pairwise noncommuting generators (`xi = 0` gives a
/// random subspace form of dimension `core_dim`). Values are uniform.
pub fn random_phase_point<R: Rng + ?Sized>(
    d: Modulus,
    n: usize,
    core_dim: usize,
    xi: usize,
    rng: &mut R,
) -> Result<PhasePoint> {
    let random_in = |s: &Subspace, rng: &mut R| -> SymplecticVector {
        let mut v = vec![0u32; 2 * n];
        for row in s.rows() {
            d.axpy(&mut v, rng.gen_range(0..d.get()), row);
        }
        SymplecticVector::from_raw(d, v)
    };
    let full = Subspace::full(d, n);
    if xi == 0 {
        if core_dim > 2 * n {
            return Err(Error::precondition("subspace dimension exceeds 2n"));
        }
        let mut s = Subspace::zero(d, n);
        while s.dim() < core_dim {
            s = s.with_vector(&random_in(&full, rng));
        }
        let pairs: Vec<_> = s.basis().into_iter().map(|b| (b, rng.gen_range(0..d.get()))).collect();
        return PhasePoint::from_pairs(d, n, &pairs, &[]);
    }
    if xi < 2 || core_dim >= n || xi > d.get() as usize * (n - core_dim) + 1 {
        return Err(Error::precondition("no cone with these parameters"));
    }
    let mut core = Subspace::zero(d, n);
    while core.dim() < core_dim {
        let v = random_in(&core.perp(), rng);
        core = core.with_vector(&v);
    }
    let perp = core.perp();
    let mut gens: Vec<SymplecticVector> = Vec::with_capacity(xi);
    let mut attempts = 0usize;
    while gens.len() < xi {
        attempts += 1;
        if attempts > 10_000 {
            // restart the generator search from scratch
            gens.clear();
            attempts = 0;
        }
        let v = random_in(&perp, rng);
        if core.reduce(&v).is_zero() || gens.iter().any(|g| g.form(&v) == 0) {
            continue;
        }
        gens.push(v);
    }
    let linear: Vec<_> = core.basis().into_iter().map(|b| (b, rng.gen_range(0..d.get()))).collect();
    let cone: Vec<_> = gens.into_iter().map(|g| (g, rng.gen_range(0..d.get()))).collect();
    PhasePoint::from_pairs(d, n, &linear, &cone)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn m3() -> Modulus {
        Modulus::new(3).unwrap()
    }

    fn v(c: &[i64]) -> SymplecticVector {
        SymplecticVector::new(m3(), c).unwrap()
    }

    /// The four lines of E for one qutrit: e, f, e+f, e+2f.
    fn four_lines() -> Vec<SymplecticVector> {
        vec![v(&[1, 0]), v(&[0, 1]), v(&[1, 1]), v(&[1, 2])]
    }

    #[test]
    fn four_line_cone_is_valid_with_nine_elements() {
        let set = CncSet::Cone {
            core: Subspace::zero(m3(), 1),
            generators: four_lines(),
        };
        assert!(set.validate());
        assert_eq!(set.elements(100).unwrap().len(), 9);
        assert!(set.is_additively_closed());
    }

    #[test]
    fn nonlinear_single_qutrit_assignment() {
        let set = CncSet::cone(Subspace::zero(m3(), 1), four_lines()).unwrap();
        // generators are sorted: f, e, e+f, e+2f
        let gens = set.generators();
        let vals: Vec<u32> = gens
            .iter()
            .map(|g| if *g == v(&[1, 1]) { 1 } else { 0 })
            .collect();
        let a = extend_assignment(&set, &vals).unwrap();
        assert!(!a.is_linear());
        let p = PhasePoint::new(&a).unwrap();
        assert_eq!(p.form(), Form::Cone);
        assert_eq!(p.value(&v(&[2, 2])), Some(2));
        assert_eq!(p.value(&v(&[0, 2])), Some(0));
    }

    #[test]
    fn linear_assignment_on_four_lines_becomes_subspace() {
        let pairs: Vec<_> = four_lines().into_iter().map(|g| (g, 0)).collect();
        let p = PhasePoint::from_pairs(m3(), 1, &[], &pairs).unwrap();
        assert_eq!(p.form(), Form::Subspace);
        assert_eq!(p, PhasePoint::wigner(&SymplecticVector::zero(m3(), 1)));
    }

    #[test]
    fn dependent_cone_generator_is_rejected() {
        let set = CncSet::Cone {
            core: Subspace::zero(m3(), 1),
            generators: vec![v(&[1, 0]), v(&[2, 0])],
        };
        assert!(!set.validate());
    }

    #[test]
    fn wigner_label_round_trips() {
        let d = Modulus::new(5).unwrap();
        let u = SymplecticVector::new(d, &[1, 4, 3, 2]).unwrap();
        assert_eq!(PhasePoint::wigner(&u).wigner_label(), Some(u));
    }

    #[test]
    fn closure_of_commuting_pair_is_their_span() {
        let c = closure(m3(), 2, &[v(&[1, 0, 0, 0]), v(&[0, 1, 0, 0])], 1000).unwrap();
        assert_eq!(c.len(), 9);
        assert_eq!(classify(m3(), 2, &c).unwrap().form(), Form::Subspace);
    }

    #[test]
    fn classify_rejects_unclosed_sets() {
        let s = vec![SymplecticVector::zero(m3(), 1), v(&[1, 0])];
        assert_eq!(classify(m3(), 1, &s), Err(Error::NotClosed));
    }

    #[test]
    fn construction_size_and_noncommutation() {
        let c = noncommuting_construction(2, m3()).unwrap();
        assert_eq!(c.len(), 7);
        for i in 0..c.len() {
            for j in i + 1..c.len() {
                assert_ne!(c[i].form(&c[j]), 0);
            }
        }
    }
}
