//! Enumeration of subspaces, isotropic subspaces and canonical phase points.
//!
//! Points come in a fixed order: subspace forms (subspaces in BFS order, then
//! value tuples lexicographically), followed by cone forms (isotropic cores,
//! then cliques of noncommuting lines in `I^⊥/I`, then value tuples). An index
//! into this sequence is a stable resumption point.

use std::collections::BTreeSet;
use std::ops::ControlFlow;

use serde::{Deserialize, Serialize};

use crate::cnc::{PhasePoint, PointRepr};
use crate::error::{Error, Result};
use crate::field::Modulus;
use crate::symplectic::{Subspace, SymplecticVector, ValuedSubspace};

/// Default bound on the number of subspaces any search will visit.
pub const DEFAULT_MAX_SUBSPACES: usize = 100_000;

/// Limits for [`enumerate_phase_points`].
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct EnumerationCaps {
    /// Largest number of noncommuting generators in a cone form.
    pub max_xi: usize,
    /// Most points returned by one call.
    pub max_points: u64,
    /// Index of the first point returned.
    pub start_index: u64,
    /// Most subspaces visited while listing supports.
    pub max_subspaces: usize,
}

impl EnumerationCaps {
    pub fn new(n: usize, d: Modulus) -> Self {
        EnumerationCaps {
            max_xi: d.get() as usize * n + 1,
            max_points: 1_000_000,
            start_index: 0,
            max_subspaces: DEFAULT_MAX_SUBSPACES,
        }
    }
}

/// Nonzero vectors of the space, one per line, scaled to a leading 1.
pub fn lines(s: &Subspace) -> Vec<SymplecticVector> {
    let set: BTreeSet<_> = s
        .elements()
        .into_iter()
        .filter(|v| !v.is_zero())
        .map(|v| v.normalized().0)
        .collect();
    set.into_iter().collect()
}

fn bfs_subspaces(d: Modulus, n: usize, isotropic: bool, max: usize) -> Result<Vec<Subspace>> {
    let full = Subspace::full(d, n);
    let all_lines = lines(&full);
    let mut out = vec![Subspace::zero(d, n)];
    let mut level = vec![Subspace::zero(d, n)];
    while !level.is_empty() {
        let mut next = BTreeSet::new();
        for s in &level {
            let pool = if isotropic { s.perp() } else { full.clone() };
            for l in &all_lines {
                if !pool.contains(l) || s.contains(l) {
                    continue;
                }
                next.insert(s.with_vector(l));
                if out.len() + next.len() > max {
                    return Err(Error::CapExceeded {
                        what: "subspace count",
                        needed: (out.len() + next.len()) as u128,
                        limit: max as u128,
                        next_index: None,
                    });
                }
            }
        }
        level = next.into_iter().collect();
        out.extend(level.iter().cloned());
    }
    Ok(out)
}

/// Every subspace of `Z_d^{2n}`, ordered by dimension.
pub fn all_subspaces(d: Modulus, n: usize, max: usize) -> Result<Vec<Subspace>> {
    bfs_subspaces(d, n, false, max)
}

/// Every isotropic subspace, ordered by dimension.
pub fn isotropic_subspaces(d: Modulus, n: usize, max: usize) -> Result<Vec<Subspace>> {
    bfs_subspaces(d, n, true, max)
}

/// Maximal isotropic subspaces (dimension n).
pub fn lagrangian_subspaces(d: Modulus, n: usize, max: usize) -> Result<Vec<Subspace>> {
    Ok(isotropic_subspaces(d, n, max)?
        .into_iter()
        .filter(|s| s.dim() == n)
        .collect())
}

/// Calls `f` on every clique of size in `[2, max]` of the noncommutation
/// graph on `lines`, in lexicographic order of index tuples.
fn for_each_clique<F>(lines: &[SymplecticVector], max: usize, f: &mut F) -> ControlFlow<()>
where
    F: FnMut(&[usize]) -> ControlFlow<()>,
{
    fn rec<F>(
        lines: &[SymplecticVector],
        adj: &[Vec<bool>],
        current: &mut Vec<usize>,
        start: usize,
        max: usize,
        f: &mut F,
    ) -> ControlFlow<()>
    where
        F: FnMut(&[usize]) -> ControlFlow<()>,
    {
        if current.len() >= 2 {
            f(current)?;
        }
        if current.len() == max {
            return ControlFlow::Continue(());
        }
        for j in start..lines.len() {
            if current.iter().all(|&i| adj[i][j]) {
                current.push(j);
                rec(lines, adj, current, j + 1, max, f)?;
                current.pop();
            }
        }
        ControlFlow::Continue(())
    }
    let adj: Vec<Vec<bool>> = lines
        .iter()
        .map(|a| lines.iter().map(|b| a.form(b) != 0).collect())
        .collect();
    rec(lines, &adj, &mut Vec::new(), 0, max, f)
}

fn value_tuples(d: u32, k: usize) -> impl Iterator<Item = Vec<u32>> {
    let total = (d as u64).pow(k as u32);
    (0..total).map(move |mut i| {
        let mut t = vec![0u32; k];
        for slot in t.iter_mut().rev() {
            *slot = (i % d as u64) as u32;
            i /= d as u64;
        }
        t
    })
}

/// Calls `f(index, point)` for every canonical phase point with
/// `index >= start`, in order. Whole blocks before `start` are skipped
/// without being built. Stops early when `f` breaks.
pub fn for_each_phase_point<F>(
    n: usize,
    d: Modulus,
    max_xi: usize,
    max_subspaces: usize,
    start: u64,
    mut f: F,
) -> Result<()>
where
    F: FnMut(u64, PhasePoint) -> ControlFlow<()>,
{
    if n == 0 {
        return Err(Error::NoQudits);
    }
    let dm = d.get() as u64;
    let mut index = 0u64;
    for s in all_subspaces(d, n, max_subspaces)? {
        let block = dm.pow(s.dim() as u32);
        if index + block <= start {
            index += block;
            continue;
        }
        for vals in value_tuples(d.get(), s.dim()) {
            if index < start {
                index += 1;
                continue;
            }
            let rows = augmented(&s, &vals);
            let vs = ValuedSubspace::from_augmented(d, n, rows).expect("independent rows");
            let p = PhasePoint::from_repr(PointRepr::Subspace(vs))?;
            if f(index, p).is_break() {
                return Ok(());
            }
            index += 1;
        }
    }
    let mut err = None;
    for core in isotropic_subspaces(d, n, max_subspaces)? {
        let perp = core.perp();
        let reps: BTreeSet<_> = perp
            .elements()
            .into_iter()
            .map(|v| core.reduce(&v))
            .filter(|v| !v.is_zero())
            .map(|v| v.normalized().0)
            .collect();
        let reps: Vec<_> = reps.into_iter().collect();
        let flow = for_each_clique(&reps, max_xi, &mut |clique| {
            let gens: Vec<SymplecticVector> = clique.iter().map(|&i| reps[i].clone()).collect();
            let k = core.dim();
            let mut block = dm.pow((k + gens.len()) as u32);
            if gens.len() == dm as usize + 1 && core.sum(&Subspace::span(d, n, &gens).expect("same space")).dim() == k + 2 {
                // the linear assignments belong to the subspace form
                block -= dm.pow(k as u32 + 2);
            }
            if index + block <= start {
                index += block;
                return ControlFlow::Continue(());
            }
            for vals in value_tuples(d.get(), k + gens.len()) {
                let core_vs = ValuedSubspace::from_augmented(d, n, augmented(&core, &vals[..k]))
                    .expect("independent rows");
                let repr = PointRepr::Cone {
                    core: core_vs,
                    generators: gens.iter().cloned().zip(vals[k..].iter().copied()).collect(),
                };
                let p = match PhasePoint::from_repr(repr) {
                    Ok(p) => p,
                    Err(e) => {
                        err = Some(e);
                        return ControlFlow::Break(());
                    }
                };
                // linear values on an additively closed union are subspace forms
                if p.form() != crate::cnc::Form::Cone {
                    continue;
                }
                if index < start {
                    index += 1;
                    continue;
                }
                f(index, p)?;
                index += 1;
            }
            ControlFlow::Continue(())
        });
        if let Some(e) = err {
            return Err(e);
        }
        if flow.is_break() {
            return Ok(());
        }
    }
    Ok(())
}

fn augmented(s: &Subspace, vals: &[u32]) -> Vec<Vec<u32>> {
    s.rows()
        .iter()
        .zip(vals)
        .map(|(r, &v)| {
            let mut r = r.clone();
            r.push(v);
            r
        })
        .collect()
}

/// Points `start_index .. start_index + max_points` of the canonical order.
/// If more points follow, fails with `CapExceeded` carrying the index to
/// resume from; use [`enumerate_phase_points_partial`] to keep the prefix.
pub fn enumerate_phase_points(n: usize, d: Modulus, caps: &EnumerationCaps) -> Result<Vec<PhasePoint>> {
    let (points, next) = enumerate_phase_points_partial(n, d, caps)?;
    match next {
        None => Ok(points),
        Some(next) => Err(Error::CapExceeded {
            what: "phase point count",
            needed: next as u128 + 1,
            limit: caps.max_points as u128,
            next_index: Some(next),
        }),
    }
}

/// Like [`enumerate_phase_points`] but returns the prefix and the resumption
/// index (`None` when the enumeration is complete).
pub fn enumerate_phase_points_partial(
    n: usize,
    d: Modulus,
    caps: &EnumerationCaps,
) -> Result<(Vec<PhasePoint>, Option<u64>)> {
    let mut out = Vec::new();
    let mut next = None;
    let end = caps.start_index.saturating_add(caps.max_points);
    for_each_phase_point(n, d, caps.max_xi, caps.max_subspaces, caps.start_index, |i, p| {
        if i >= end {
            next = Some(i);
            return ControlFlow::Break(());
        }
        out.push(p);
        ControlFlow::Continue(())
    })?;
    Ok((out, next))
}

/// Summary counts for an enumeration run.
#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct EnumerationCounts {
    pub total: u64,
    pub subspace_form: u64,
    pub cone_form: u64,
    pub linear: u64,
    pub nonlinear: u64,
}

/// Counts every point by block sizes, without building any point.
pub fn count_phase_points(n: usize, d: Modulus, max_xi: usize, max_subspaces: usize) -> Result<EnumerationCounts> {
    if n == 0 {
        return Err(Error::NoQudits);
    }
    let dm = d.get() as u64;
    let mut c = EnumerationCounts::default();
    for s in all_subspaces(d, n, max_subspaces)? {
        c.subspace_form += dm.pow(s.dim() as u32);
    }
    c.linear = c.subspace_form;
    for core in isotropic_subspaces(d, n, max_subspaces)? {
        let k = core.dim() as u32;
        let reps: BTreeSet<_> = core
            .perp()
            .elements()
            .into_iter()
            .map(|v| core.reduce(&v))
            .filter(|v| !v.is_zero())
            .map(|v| v.normalized().0)
            .collect();
        let reps: Vec<_> = reps.into_iter().collect();
        let _ = for_each_clique(&reps, max_xi, &mut |clique| {
            let gens: Vec<SymplecticVector> = clique.iter().map(|&i| reps[i].clone()).collect();
            let span = core.sum(&Subspace::span(d, n, &gens).expect("same space")).dim() as u32;
            let all = dm.pow(k + gens.len() as u32);
            if gens.len() == dm as usize + 1 && span == k + 2 {
                c.cone_form += all - dm.pow(span);
            } else {
                c.cone_form += all;
                c.linear += dm.pow(span);
            }
            ControlFlow::Continue(())
        });
    }
    c.total = c.subspace_form + c.cone_form;
    c.nonlinear = c.total - c.linear;
    Ok(c)
}

/// Counts by building and inspecting every point; slow reference for
/// [`count_phase_points`].
pub fn count_phase_points_by_visiting(
    n: usize,
    d: Modulus,
    max_xi: usize,
    max_subspaces: usize,
) -> Result<EnumerationCounts> {
    let mut c = EnumerationCounts::default();
    for_each_phase_point(n, d, max_xi, max_subspaces, 0, |_, p| {
        c.total += 1;
        match p.form() {
            crate::cnc::Form::Subspace => c.subspace_form += 1,
            crate::cnc::Form::Cone => c.cone_form += 1,
        }
        if p.is_linear() {
            c.linear += 1;
        } else {
            c.nonlinear += 1;
        }
        ControlFlow::Continue(())
    })?;
    Ok(c)
}
