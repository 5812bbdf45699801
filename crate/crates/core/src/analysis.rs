//! Wigner functions, CNC decompositions by linear programming, and the
//! Λ-polytope checks.

use std::f64::consts::PI;

use nalgebra::DMatrix;
use num_bigint::BigInt;
use num_complex::Complex64;
use num_rational::BigRational;
use num_traits::Zero;
use serde::Serialize;

use crate::clifford::{CliffordElement, NamedGate};
use crate::cnc::PhasePoint;
use crate::dense::{DenseCap, DenseOperator};
use crate::enumerate::{count_phase_points, enumerate_phase_points, for_each_phase_point, lagrangian_subspaces, EnumerationCaps};
use crate::error::{Error, Result};
use crate::field::Modulus;
use crate::lp::{self, LinearProgram, LpScalar, LpSolution};
use crate::oracle::{DensityState, STATE_TOL};
use crate::pauli::{pauli_matrix, OutcomeAssignment};
use crate::simulate::WignerDistribution;
use crate::symplectic::{Subspace, SymplecticVector};

/// Reconstruction tolerance for decompositions.
pub const RECONSTRUCTION_TOL: f64 = 1e-7;

/// Labels of `Z_d^{2n}` in index order: coordinate `i` is digit `i` base `d`.
pub fn all_labels(d: Modulus, n: usize) -> Vec<SymplecticVector> {
    let dm = d.get() as usize;
    let total = dm.pow(2 * n as u32);
    (0..total)
        .map(|mut idx| {
            let c: Vec<i64> = (0..2 * n)
                .map(|_| {
                    let x = idx % dm;
                    idx /= dm;
                    x as i64
                })
                .collect();
            SymplecticVector::new(d, &c).expect("in range")
        })
        .collect()
}

pub fn label_index(v: &SymplecticVector) -> usize {
    let dm = v.modulus().get() as usize;
    v.coords().iter().rev().fold(0, |acc, &c| acc * dm + c as usize)
}

/// `W(u) = d^{-n} Tr(ρ A_u)` on every label.
#[derive(Clone, Debug, PartialEq)]
pub struct WignerFunction {
    d: Modulus,
    n: usize,
    values: Vec<(SymplecticVector, f64)>,
}

pub fn wigner_function(rho: &DensityState, cap: DenseCap) -> Result<WignerFunction> {
    wigner_function_of(rho.operator(), cap)
}

/// As [`wigner_function`] for any Hermitian operator.
pub fn wigner_function_of(x: &DenseOperator, cap: DenseCap) -> Result<WignerFunction> {
    let (d, n) = (x.modulus(), x.n());
    let scale = 1.0 / x.dim() as f64;
    let values = all_labels(d, n)
        .into_iter()
        .map(|u| {
            let a = PhasePoint::wigner(&u).operator(cap)?;
            Ok((u, a.trace_product(x).re * scale))
        })
        .collect::<Result<_>>()?;
    Ok(WignerFunction { d, n, values })
}

impl WignerFunction {
    pub fn values(&self) -> &[(SymplecticVector, f64)] {
        &self.values
    }

    pub fn value(&self, u: &SymplecticVector) -> f64 {
        self.values[label_index(u)].1
    }

    pub fn min(&self) -> f64 {
        self.values.iter().map(|(_, w)| *w).fold(f64::INFINITY, f64::min)
    }

    pub fn sum(&self) -> f64 {
        self.values.iter().map(|(_, w)| *w).sum()
    }

    /// Sum of the negative values' magnitudes.
    pub fn negativity(&self) -> f64 {
        self.values.iter().map(|(_, w)| (-w).max(0.0)).sum()
    }

    /// `Σ_u W(u) A_u`.
    pub fn reconstruct(&self, cap: DenseCap) -> Result<DenseOperator> {
        let mut acc = DenseOperator::zeros(self.d, self.n, cap)?;
        for (u, w) in &self.values {
            acc = acc.add(&PhasePoint::wigner(u).operator(cap)?.scale(Complex64::new(*w, 0.0)));
        }
        Ok(acc)
    }

    /// Sampling distribution; fails if any value is below `-1e-9`.
    pub fn to_distribution(&self) -> Result<WignerDistribution> {
        if let Some((_, w)) = self.values.iter().find(|(_, w)| *w < -STATE_TOL) {
            return Err(Error::NegativeWeight(*w));
        }
        WignerDistribution::new(
            self.d,
            self.n,
            self.values
                .iter()
                .filter(|(_, w)| *w > 0.0)
                .map(|(u, w)| (u.clone(), *w))
                .collect(),
        )
    }
}

/// `[b, u]`-tables of all Wigner points, indexed `[u][b]`.
struct WignerTable {
    d: Modulus,
    dim: usize,
    gamma: Vec<Vec<u32>>,
}

impl WignerTable {
    fn new(d: Modulus, n: usize) -> WignerTable {
        let labels = all_labels(d, n);
        let gamma = labels
            .iter()
            .map(|u| {
                let p = PhasePoint::wigner(u);
                labels.iter().map(|b| p.value(b).expect("full space")).collect()
            })
            .collect();
        WignerTable {
            d,
            dim: (d.get() as usize).pow(n as u32),
            gamma,
        }
    }

    /// `counts[u][k] = #{b ∈ Ω : γ_u(b) − γ(b) = k}`; then
    /// `d^n Tr(A_u A_Ω^γ) = Σ_k counts[u][k] cos(2πk/d)`.
    fn phase_counts(&self, p: &PhasePoint) -> Result<Vec<Vec<u32>>> {
        let d = self.d;
        let elems = p.elements_with_values(u128::MAX)?;
        Ok(self
            .gamma
            .iter()
            .map(|gu| {
                let mut counts = vec![0u32; d.get() as usize];
                for (b, g) in &elems {
                    counts[d.sub(gu[label_index(b)], *g) as usize] += 1;
                }
                counts
            })
            .collect())
    }

    fn row_f64(&self, counts: &[u32]) -> f64 {
        let dm = self.d.get() as f64;
        counts
            .iter()
            .enumerate()
            .map(|(k, &c)| c as f64 * (2.0 * PI * k as f64 / dm).cos())
            .sum()
    }

    /// Exact for d = 3, where `cos(±2π/3) = −1/2`.
    fn row_exact(&self, counts: &[u32]) -> BigRational {
        let twice = 2 * counts[0] as i64 - counts[1] as i64 - counts[2] as i64;
        BigRational::new(BigInt::from(twice), BigInt::from(2))
    }
}

/// What to decompose.
#[derive(Clone, Copy, Debug)]
pub enum Target<'a> {
    State(&'a DensityState),
    Operator(&'a DenseOperator),
    Point(&'a PhasePoint),
}

impl Target<'_> {
    fn dims(&self) -> (Modulus, usize) {
        match self {
            Target::State(s) => (s.modulus(), s.n()),
            Target::Operator(x) => (x.modulus(), x.n()),
            Target::Point(p) => (p.modulus(), p.n()),
        }
    }

    fn operator(&self, cap: DenseCap) -> Result<DenseOperator> {
        match self {
            Target::State(s) => Ok(s.operator().clone()),
            Target::Operator(x) => Ok((*x).clone()),
            Target::Point(p) => p.operator(cap),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum DecomposeMode {
    Feasibility,
    MinNegativity,
}

/// Separating functional `Y = Σ_u y_u A_u` with `Tr(Y A) ≥ 0` on the whole
/// dictionary and `Tr(Y ρ) < 0`.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Certificate {
    /// `y_u` in label index order.
    pub witness: Vec<f64>,
    /// Exact `y_u` as `p/q` strings when solved in rational arithmetic.
    pub exact_witness: Option<Vec<String>>,
    /// `d^n Tr(Y ρ)`.
    pub target_value: f64,
    /// `min_i d^n Tr(Y A_i)`.
    pub min_dictionary_value: f64,
    /// The certificate inequalities were rechecked (exactly in rational mode).
    pub verified: bool,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Decomposition {
    pub feasible: bool,
    pub mode: DecomposeMode,
    pub exact: bool,
    /// Total negative weight `Σ max(0, −c_i)`; absent when infeasible.
    pub objective: Option<f64>,
    /// One coefficient per dictionary entry.
    pub coefficients: Vec<f64>,
    pub coefficient_sum: f64,
    /// Max-entry error of `Σ c_i A_i − ρ`, when a dense check was possible.
    pub residual: Option<f64>,
    pub certificate: Option<Certificate>,
}

impl Decomposition {
    /// Nonzero coefficients as `(dictionary index, value)`.
    pub fn sparse(&self, tol: f64) -> Vec<(usize, f64)> {
        self.coefficients
            .iter()
            .enumerate()
            .filter(|(_, c)| c.abs() > tol)
            .map(|(i, c)| (i, *c))
            .collect()
    }
}

fn rank(rows: &[Vec<f64>]) -> usize {
    let m = rows.len();
    if m == 0 {
        return 0;
    }
    let mat = DMatrix::from_fn(m, rows[0].len(), |i, j| rows[i][j]);
    let gram = &mat * mat.transpose();
    let scale = gram.iter().fold(0.0f64, |a, v| a.max(v.abs())).max(1.0);
    gram.symmetric_eigenvalues()
        .iter()
        .filter(|&&l| l > 1e-9 * scale)
        .count()
}

/// Decomposes the target over the dictionary, constrained in Wigner
/// coordinates: `Σ_i c_i d^n Tr(A_u A_i) = d^n Tr(A_u ρ)` for all `u`.
/// With `exact`, the program is solved over the rationals (d = 3 only);
/// dense targets are then taken at their exact binary values.
pub fn cnc_decompose(
    target: Target<'_>,
    dictionary: &[PhasePoint],
    mode: DecomposeMode,
    exact: bool,
    cap: DenseCap,
) -> Result<Decomposition> {
    let (d, n) = target.dims();
    if dictionary.is_empty() {
        return Err(Error::DictionaryDoesNotSpan {
            rank: 0,
            required: (d.get() as usize).pow(2 * n as u32),
        });
    }
    if let Some(p) = dictionary.iter().find(|p| p.modulus() != d || p.n() != n) {
        return Err(Error::DimensionMismatch {
            expected: n,
            found: p.n(),
        });
    }
    if exact && d.get() != 3 {
        return Err(Error::ExactModeUnsupported(d.get()));
    }
    let table = WignerTable::new(d, n);
    let labels = table.gamma.len();
    // columns: phase counts per dictionary entry
    let counts: Vec<Vec<Vec<u32>>> = dictionary.iter().map(|p| table.phase_counts(p)).collect::<Result<_>>()?;
    let m_f64: Vec<Vec<f64>> = (0..labels)
        .map(|u| counts.iter().map(|c| table.row_f64(&c[u])).collect())
        .collect();
    let r = rank(&m_f64);
    if r < labels {
        return Err(Error::DictionaryDoesNotSpan { rank: r, required: labels });
    }
    let (w_f64, w_exact): (Vec<f64>, Option<Vec<BigRational>>) = match target {
        Target::Point(p) => {
            let c = table.phase_counts(p)?;
            let f = c.iter().map(|cu| table.row_f64(cu)).collect();
            (f, exact.then(|| c.iter().map(|cu| table.row_exact(cu)).collect()))
        }
        Target::State(_) | Target::Operator(_) => {
            let x = target.operator(cap)?;
            if !x.is_hermitian(STATE_TOL) || (x.trace() - 1.0).norm() > STATE_TOL {
                return Err(Error::precondition("target must be Hermitian with unit trace"));
            }
            let wf = wigner_function_of(&x, cap)?;
            let scale = (table.dim * table.dim) as f64;
            let f: Vec<f64> = wf.values().iter().map(|(_, w)| w * scale).collect();
            let e = exact.then(|| {
                f.iter()
                    .map(|v| BigRational::from_float(*v).expect("finite"))
                    .collect()
            });
            (f, e)
        }
    };
    let cols = dictionary.len();
    let split = mode == DecomposeMode::MinNegativity;
    let build = |m: &[Vec<f64>]| -> LinearProgram<f64> {
        let a = m
            .iter()
            .map(|row| {
                let mut r = row.clone();
                if split {
                    r.extend(row.iter().map(|v| -v));
                }
                r
            })
            .collect();
        let mut c = vec![0.0; cols];
        if split {
            c.extend(vec![1.0; cols]);
        }
        LinearProgram { a, b: w_f64.clone(), c }
    };
    let (solution, certificate_exact): (LpSolution<f64>, Option<(Vec<BigRational>, bool)>) = if exact {
        let w = w_exact.expect("exact target");
        let m_q: Vec<Vec<BigRational>> = (0..labels)
            .map(|u| counts.iter().map(|c| table.row_exact(&c[u])).collect())
            .collect();
        let a = m_q
            .iter()
            .map(|row| {
                let mut r = row.clone();
                if split {
                    r.extend(row.iter().map(|v| -v.clone()));
                }
                r
            })
            .collect();
        let one = BigRational::from_integer(1.into());
        let mut c = vec![BigRational::zero(); cols];
        if split {
            c.extend(vec![one; cols]);
        }
        let lpq = LinearProgram { a, b: w, c };
        match lp::solve(&lpq) {
            LpSolution::Optimal { x, objective } => (
                LpSolution::Optimal {
                    x: x.iter().map(|v| v.to_f64()).collect(),
                    objective: objective.to_f64(),
                },
                None,
            ),
            LpSolution::Infeasible { farkas } => {
                let ok = lp::verify_farkas(&lpq, &farkas, &BigRational::zero());
                (
                    LpSolution::Infeasible {
                        farkas: farkas.iter().map(|v| v.to_f64()).collect(),
                    },
                    Some((farkas, ok)),
                )
            }
            LpSolution::Unbounded => (LpSolution::Unbounded, None),
        }
    } else {
        (lp::solve(&build(&m_f64)), None)
    };
    match solution {
        LpSolution::Unbounded => Err(Error::Unbounded),
        LpSolution::Optimal { x, objective } => {
            let coefficients: Vec<f64> = if split {
                (0..cols).map(|i| x[i] - x[cols + i]).collect()
            } else {
                x
            };
            let residual = match cap.check(d, n) {
                Ok(_) => {
                    let mut acc = DenseOperator::zeros(d, n, cap)?;
                    for (p, c) in dictionary.iter().zip(&coefficients) {
                        if *c != 0.0 {
                            acc = acc.add(&p.operator(cap)?.scale(Complex64::new(*c, 0.0)));
                        }
                    }
                    Some(acc.max_abs_diff(&target.operator(cap)?))
                }
                Err(_) => None,
            };
            let objective = if split {
                objective
            } else {
                coefficients.iter().map(|c| (-c).max(0.0)).sum()
            };
            Ok(Decomposition {
                feasible: true,
                mode,
                exact,
                objective: Some(objective),
                coefficient_sum: coefficients.iter().sum(),
                coefficients,
                residual,
                certificate: None,
            })
        }
        LpSolution::Infeasible { farkas } => {
            // only reachable in feasibility mode: the split program always
            // has a solution once the dictionary spans
            let lpf = build(&m_f64);
            let verified = match &certificate_exact {
                Some((_, ok)) => *ok,
                None => lp::verify_farkas(&lpf, &farkas, &1e-9),
            };
            let target_value = farkas.iter().zip(&w_f64).map(|(y, w)| y * w).sum();
            let min_dictionary_value = (0..cols)
                .map(|j| (0..labels).map(|u| farkas[u] * m_f64[u][j]).sum::<f64>())
                .fold(f64::INFINITY, f64::min);
            Ok(Decomposition {
                feasible: false,
                mode,
                exact,
                objective: None,
                coefficients: vec![0.0; cols],
                coefficient_sum: 0.0,
                residual: None,
                certificate: Some(Certificate {
                    witness: farkas,
                    exact_witness: certificate_exact.map(|(y, _)| y.iter().map(|v| v.to_string()).collect()),
                    target_value,
                    min_dictionary_value,
                    verified,
                }),
            })
        }
    }
}

pub fn wigner_dictionary(d: Modulus, n: usize) -> Vec<PhasePoint> {
    all_labels(d, n).iter().map(PhasePoint::wigner).collect()
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub struct DictionaryCaps {
    /// Points drawn from the enumeration, spread across its index range.
    pub enumerated: usize,
    /// Size limit of the Clifford orbit of the seed points.
    pub orbit: usize,
    pub max_subspaces: usize,
}

impl Default for DictionaryCaps {
    fn default() -> Self {
        DictionaryCaps {
            enumerated: 2000,
            orbit: 2000,
            max_subspaces: crate::enumerate::DEFAULT_MAX_SUBSPACES,
        }
    }
}

/// Every phase point when the enumeration fits in `caps.enumerated`;
/// otherwise Wigner points, stabilizer points, an evenly strided sample of
/// the enumeration, and a capped Clifford orbit of cone points built on
/// the noncommuting construction.
pub fn full_dictionary(d: Modulus, n: usize, caps: &DictionaryCaps) -> Result<Vec<PhasePoint>> {
    let max_xi = d.get() as usize * n + 1;
    let counts = count_phase_points(n, d, max_xi, caps.max_subspaces)?;
    if counts.total <= caps.enumerated as u64 {
        let mut ec = EnumerationCaps::new(n, d);
        ec.max_subspaces = caps.max_subspaces;
        return enumerate_phase_points(n, d, &ec);
    }
    let mut out: Vec<PhasePoint> = wigner_dictionary(d, n);
    for s in stabilizer_outcomes(d, n, caps.max_subspaces)? {
        out.push(PhasePoint::stabilizer(&s)?);
    }
    let stride = counts.total / caps.enumerated as u64;
    for k in 0..caps.enumerated as u64 {
        for_each_phase_point(n, d, max_xi, caps.max_subspaces, k * stride, |_, p| {
            out.push(p);
            std::ops::ControlFlow::Break(())
        })?;
    }
    let gens = crate::cnc::noncommuting_construction(n, d)?;
    let seeds = [
        PhasePoint::from_pairs(d, n, &[], &gens.iter().map(|g| (g.clone(), 0)).collect::<Vec<_>>())?,
        PhasePoint::from_pairs(
            d,
            n,
            &[],
            &gens.iter().enumerate().map(|(i, g)| (g.clone(), (i == 0) as u32)).collect::<Vec<_>>(),
        )?,
    ];
    out.extend(clifford_orbit(&seeds, caps.orbit)?);
    out.sort();
    out.dedup();
    Ok(out)
}

/// Breadth-first closure under the named generating gates, stopping at
/// `max` points.
pub fn clifford_orbit(seeds: &[PhasePoint], max: usize) -> Result<Vec<PhasePoint>> {
    let Some(first) = seeds.first() else {
        return Ok(Vec::new());
    };
    let (d, n) = (first.modulus(), first.n());
    let mut gens = Vec::new();
    for q in 0..n {
        gens.push(NamedGate::F(q));
        gens.push(NamedGate::P(q));
        gens.push(NamedGate::XShift(q, 1));
        gens.push(NamedGate::ZShift(q, 1));
        for t in 0..n {
            if t != q {
                gens.push(NamedGate::Sum(q, t));
            }
        }
    }
    let gens: Vec<CliffordElement> = gens
        .iter()
        .map(|g| CliffordElement::named(d, n, g))
        .collect::<Result<_>>()?;
    let mut seen: std::collections::BTreeSet<PhasePoint> = std::collections::BTreeSet::new();
    let mut queue = std::collections::VecDeque::new();
    for s in seeds {
        if seen.len() < max && seen.insert(s.clone()) {
            queue.push_back(s.clone());
        }
    }
    while let Some(p) = queue.pop_front() {
        for g in &gens {
            if seen.len() >= max {
                return Ok(seen.into_iter().collect());
            }
            let q = g.act_on_phase_point(&p)?;
            if seen.insert(q.clone()) {
                queue.push_back(q);
            }
        }
    }
    Ok(seen.into_iter().collect())
}

/// Number of pure stabilizer states, `d^n Π_{k=1}^n (d^k + 1)`.
pub fn stabilizer_state_count(d: Modulus, n: usize) -> u128 {
    let dd = d.get() as u128;
    (1..=n as u32).fold(dd.pow(n as u32), |acc, k| acc * (dd.pow(k) + 1))
}

/// All (Lagrangian subspace, linear outcome) pairs.
pub fn stabilizer_outcomes(d: Modulus, n: usize, max_subspaces: usize) -> Result<Vec<OutcomeAssignment>> {
    let mut out = Vec::new();
    for l in lagrangian_subspaces(d, n, max_subspaces)? {
        let basis = l.basis();
        let total = (d.get() as u64).pow(n as u32);
        for code in 0..total {
            let mut c = code;
            let pairs: Vec<(SymplecticVector, u32)> = basis
                .iter()
                .map(|b| {
                    let v = (c % d.get() as u64) as u32;
                    c /= d.get() as u64;
                    (b.clone(), v)
                })
                .collect();
            out.push(OutcomeAssignment::new(d, n, &pairs)?);
        }
    }
    Ok(out)
}

#[derive(Clone, Debug)]
pub struct StabilizerState {
    pub outcome: OutcomeAssignment,
    pub state: DensityState,
}

/// Default limit on the number of stabilizer states (covers n = 2, d = 3).
pub const DEFAULT_MAX_STABILIZER_STATES: u128 = 5000;

pub fn stabilizer_states(n: usize, d: Modulus, max_states: u128, cap: DenseCap) -> Result<Vec<StabilizerState>> {
    let needed = stabilizer_state_count(d, n);
    if needed > max_states {
        return Err(Error::CapExceeded {
            what: "stabilizer states",
            needed,
            limit: max_states,
            next_index: None,
        });
    }
    cap.check(d, n)?;
    stabilizer_outcomes(d, n, usize::MAX)?
        .into_iter()
        .map(|outcome| {
            let state = DensityState::new(outcome.projector(cap)?)?;
            Ok(StabilizerState { outcome, state })
        })
        .collect()
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct LambdaReport {
    pub member: bool,
    pub min_overlap: f64,
    /// Index of the stabilizer state attaining the minimum, when negative.
    pub violating_stabilizer: Option<usize>,
}

/// `X ∈ Λ` iff `Tr(σ X) ≥ −1e−9` for every pure stabilizer state `σ`.
pub fn lambda_membership(x: &DenseOperator, stabilizers: &[StabilizerState]) -> Result<LambdaReport> {
    if !x.is_hermitian(STATE_TOL) || (x.trace() - 1.0).norm() > STATE_TOL {
        return Err(Error::precondition("operator must be Hermitian with unit trace"));
    }
    let mut min = f64::INFINITY;
    let mut arg = 0;
    for (i, s) in stabilizers.iter().enumerate() {
        if s.state.modulus() != x.modulus() || s.state.n() != x.n() {
            return Err(Error::DimensionMismatch {
                expected: x.n(),
                found: s.state.n(),
            });
        }
        let o = s.state.operator().trace_product(x).re;
        if o < min {
            min = o;
            arg = i;
        }
    }
    let member = min >= -STATE_TOL;
    Ok(LambdaReport {
        member,
        min_overlap: min,
        violating_stabilizer: (!member).then_some(arg),
    })
}

/// `pr_M(X) = Σ_{b∈M} c_b T_b` where `X = Σ_b c_b T_b`.
pub fn pauli_projection(x: &DenseOperator, labels: &[SymplecticVector], cap: DenseCap) -> Result<DenseOperator> {
    let mut out = DenseOperator::zeros(x.modulus(), x.n(), cap)?;
    let scale = 1.0 / x.dim() as f64;
    for b in labels {
        let t = pauli_matrix(b, cap)?;
        let c = t.adjoint().trace_product(x) * scale;
        out = out.add(&t.scale(c));
    }
    Ok(out)
}

/// All linear outcome functions on an isotropic subspace.
pub fn linear_outcomes(i: &Subspace) -> Result<Vec<OutcomeAssignment>> {
    let d = i.modulus();
    let basis = i.basis();
    let total = (d.get() as u64).pow(basis.len() as u32);
    (0..total)
        .map(|code| {
            let mut c = code;
            let pairs: Vec<(SymplecticVector, u32)> = basis
                .iter()
                .map(|b| {
                    let v = (c % d.get() as u64) as u32;
                    c /= d.get() as u64;
                    (b.clone(), v)
                })
                .collect();
            OutcomeAssignment::new(d, i.n(), &pairs)
        })
        .collect()
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct IsoSample {
    /// Smallest barycentric coordinate `Tr(Π_I^γ X)`.
    pub min_coordinate: f64,
    pub coordinate_sum: f64,
    /// Max-entry distance between `pr_I(X)` and `Σ_γ λ_γ V_γ`.
    pub reconstruction_error: f64,
    /// Barycentric coordinates in [`linear_outcomes`] order.
    pub coordinates: Vec<f64>,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct IsoProjectionReport {
    pub vertices: usize,
    /// `pr_I(Π_I^γ) = Π_I^γ` for every vertex.
    pub vertices_fixed: bool,
    pub samples: Vec<IsoSample>,
    pub passed: bool,
}

/// Checks that `pr_I` fixes each `Π_I^γ` and that each sample projects into
/// the simplex spanned by the unit-trace vertices `V_γ = Π_I^γ / d^{n−k}`,
/// with barycentric coordinates `λ_γ = Tr(Π_I^γ X)`.
pub fn iso_projection_check(i: &Subspace, samples: &[DenseOperator], cap: DenseCap) -> Result<IsoProjectionReport> {
    if !i.is_isotropic() {
        return Err(Error::NotIsotropic);
    }
    let labels = i.elements();
    let outcomes = linear_outcomes(i)?;
    let projectors: Vec<DenseOperator> = outcomes.iter().map(|r| r.projector(cap)).collect::<Result<_>>()?;
    let norm = 1.0 / (i.modulus().get() as f64).powi((i.n() - i.dim()) as i32);
    let mut vertices_fixed = true;
    for p in &projectors {
        vertices_fixed &= pauli_projection(p, &labels, cap)?.approx_eq(p, 1e-9);
    }
    let mut out = Vec::with_capacity(samples.len());
    for x in samples {
        let coords: Vec<f64> = projectors.iter().map(|p| p.trace_product(x).re).collect();
        let mut recon = DenseOperator::zeros(i.modulus(), i.n(), cap)?;
        for (p, l) in projectors.iter().zip(&coords) {
            recon = recon.add(&p.scale(Complex64::new(l * norm, 0.0)));
        }
        let err = recon.max_abs_diff(&pauli_projection(x, &labels, cap)?);
        out.push(IsoSample {
            min_coordinate: coords.iter().copied().fold(f64::INFINITY, f64::min),
            coordinate_sum: coords.iter().sum(),
            reconstruction_error: err,
            coordinates: coords,
        });
    }
    let passed = vertices_fixed
        && out
            .iter()
            .all(|s| s.min_coordinate >= -RECONSTRUCTION_TOL && s.reconstruction_error <= 1e-9);
    Ok(IsoProjectionReport {
        vertices: projectors.len(),
        vertices_fixed,
        samples: out,
        passed,
    })
}

/// `d^{-n} Σ_{u∈Ω} e^{iη(u)} T_u` with `η(0) = 0` and `η(−u) = −η(u)`.
#[derive(Clone, Debug, PartialEq)]
pub struct GeneralizedPhaseOp {
    d: Modulus,
    n: usize,
    /// Phases in radians, indexed by label index; `None` off the support.
    eta: Vec<Option<f64>>,
}

const ANGLE_TOL: f64 = 1e-9;

fn angle_eq(a: f64, b: f64) -> bool {
    let x = (a - b).rem_euclid(2.0 * PI);
    x < ANGLE_TOL || 2.0 * PI - x < ANGLE_TOL
}

impl GeneralizedPhaseOp {
    pub fn new(d: Modulus, n: usize, entries: &[(SymplecticVector, f64)]) -> Result<GeneralizedPhaseOp> {
        let mut eta = vec![None; (d.get() as usize).pow(2 * n as u32)];
        for (v, e) in entries {
            crate::symplectic::check_vector(d, n, v)?;
            if !e.is_finite() {
                return Err(Error::precondition("phases must be finite"));
            }
            eta[label_index(v)] = Some(e.rem_euclid(2.0 * PI));
        }
        let zero = SymplecticVector::zero(d, n);
        match eta[label_index(&zero)] {
            Some(e) if angle_eq(e, 0.0) => {}
            _ => return Err(Error::precondition("support must contain 0 with η(0) = 0")),
        }
        for (v, e) in entries {
            match eta[label_index(&v.neg())] {
                Some(f) if angle_eq(*e, -f) => {}
                _ => return Err(Error::precondition(format!("η(−u) ≠ −η(u) at u = {v}"))),
            }
        }
        Ok(GeneralizedPhaseOp { d, n, eta })
    }

    /// `η = −2πγ/d`, so that the operator is `A_Ω^γ`.
    pub fn from_point(p: &PhasePoint) -> Result<GeneralizedPhaseOp> {
        let d = p.modulus();
        let entries: Vec<_> = p
            .elements_with_values(u128::MAX)?
            .into_iter()
            .map(|(b, g)| (b, -2.0 * PI * g as f64 / d.get() as f64))
            .collect();
        Self::new(d, p.n(), &entries)
    }

    pub fn modulus(&self) -> Modulus {
        self.d
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn eta(&self, v: &SymplecticVector) -> Option<f64> {
        self.eta[label_index(v)]
    }

    pub fn contains(&self, v: &SymplecticVector) -> bool {
        self.eta(v).is_some()
    }

    pub fn support(&self) -> Vec<SymplecticVector> {
        all_labels(self.d, self.n).into_iter().filter(|v| self.contains(v)).collect()
    }

    /// Copy with `η(v) = phase`, `η(−v) = −phase`.
    pub fn with_phase(&self, v: &SymplecticVector, phase: f64) -> GeneralizedPhaseOp {
        let mut out = self.clone();
        out.eta[label_index(v)] = Some(phase.rem_euclid(2.0 * PI));
        out.eta[label_index(&v.neg())] = Some((-phase).rem_euclid(2.0 * PI));
        out
    }

    pub fn operator(&self, cap: DenseCap) -> Result<DenseOperator> {
        let mut op = DenseOperator::zeros(self.d, self.n, cap)?;
        let scale = 1.0 / op.dim() as f64;
        for (v, e) in all_labels(self.d, self.n).iter().zip(&self.eta) {
            if let Some(e) = e {
                op = op.add(&pauli_matrix(v, cap)?.scale(Complex64::from_polar(scale, *e)));
            }
        }
        Ok(op)
    }

    /// `η(v)` as an element of Z_d, if it is an integer multiple of `2π/d`.
    fn integer_phase(&self, v: &SymplecticVector) -> Option<u32> {
        let e = self.eta(v)?;
        let k = (e * self.d.get() as f64 / (2.0 * PI)).round();
        let k = (k as i64).rem_euclid(self.d.get() as i64) as u32;
        angle_eq(e, 2.0 * PI * k as f64 / self.d.get() as f64).then_some(k)
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct SeparationReport {
    /// `Tr(pr_I(A) Y)`.
    pub lhs: f64,
    /// `max_γ Tr(V_γ Y)` over the unit-trace vertices of `pr_I(Λ)`.
    pub rhs_max: f64,
    pub separated: bool,
}

fn separation(a_op: &DenseOperator, y: &DenseOperator, i: &Subspace, cap: DenseCap) -> Result<SeparationReport> {
    let proj = pauli_projection(a_op, &i.elements(), cap)?;
    let lhs = proj.trace_product(y).re;
    let norm = 1.0 / (i.modulus().get() as f64).powi((i.n() - i.dim()) as i32);
    let mut rhs_max = f64::NEG_INFINITY;
    for r in linear_outcomes(i)? {
        rhs_max = rhs_max.max(r.projector(cap)?.trace_product(y).re * norm);
    }
    Ok(SeparationReport {
        lhs,
        rhs_max,
        separated: lhs > rhs_max + 1e-9,
    })
}

/// Hyperplane separating `pr_I(A)` from `pr_I(Λ)` when `Ω` contains
/// commuting `a, b` but not `a + b`: `Y` has the phases of `A` on `±a, ±b`
/// and on `±(a+b)` the summed phase shifted by `2π⌊d/2⌋/d`.
///
/// Needs `a, b` independent and `η(a), η(b)` integer multiples of `2π/d`;
/// outside that range the bound `rhs_max < 4` can fail.
pub fn separation_witness(
    op: &GeneralizedPhaseOp,
    a: &SymplecticVector,
    b: &SymplecticVector,
    cap: DenseCap,
) -> Result<SeparationReport> {
    let (d, n) = (op.modulus(), op.n());
    crate::symplectic::check_vector(d, n, a)?;
    crate::symplectic::check_vector(d, n, b)?;
    let (Some(ea), Some(eb)) = (op.eta(a), op.eta(b)) else {
        return Err(Error::precondition("a and b must lie in Ω"));
    };
    if a.form(b) != 0 {
        return Err(Error::NotCommuting);
    }
    let sum = a.plus(b);
    if op.contains(&sum) {
        return Err(Error::precondition("a + b must lie outside Ω"));
    }
    let i = Subspace::span(d, n, [a, b])?;
    if i.dim() != 2 {
        return Err(Error::precondition("a and b must be linearly independent"));
    }
    if op.integer_phase(a).is_none() || op.integer_phase(b).is_none() {
        return Err(Error::precondition("η(a), η(b) must be multiples of 2π/d"));
    }
    let theta = 2.0 * PI * (d.get() / 2) as f64 / d.get() as f64;
    let terms = [(a.clone(), ea), (b.clone(), eb), (sum, ea + eb + theta)];
    let mut y = DenseOperator::zeros(d, n, cap)?;
    for (v, e) in terms {
        y = y.add(&pauli_matrix(&v, cap)?.scale(Complex64::from_polar(1.0, e)));
        y = y.add(&pauli_matrix(&v.neg(), cap)?.scale(Complex64::from_polar(1.0, -e)));
    }
    separation(&op.operator(cap)?, &y, &i, cap)
}

/// Hyperplane with normal `A_I^{η|I}`: `lhs = |I|/d^n` and, when `η|I` is
/// not linear, `rhs_max < lhs`.
pub fn linearity_hyperplane(op: &GeneralizedPhaseOp, i: &Subspace, cap: DenseCap) -> Result<SeparationReport> {
    check_iso_support(op, i)?;
    let mut y = DenseOperator::zeros(op.modulus(), op.n(), cap)?;
    let scale = 1.0 / y.dim() as f64;
    for u in i.elements() {
        let e = op.eta(&u).expect("checked");
        y = y.add(&pauli_matrix(&u, cap)?.scale(Complex64::from_polar(scale, e)));
    }
    separation(&op.operator(cap)?, &y, i, cap)
}

fn check_iso_support(op: &GeneralizedPhaseOp, i: &Subspace) -> Result<()> {
    if i.modulus() != op.modulus() || i.n() != op.n() {
        return Err(Error::DimensionMismatch {
            expected: op.n(),
            found: i.n(),
        });
    }
    if !i.is_isotropic() {
        return Err(Error::NotIsotropic);
    }
    if i.elements().iter().any(|u| !op.contains(u)) {
        return Err(Error::precondition("I must be contained in Ω"));
    }
    Ok(())
}

/// Whether `η|I = (2π/d)·k` for a linear `k: I → Z_d`.
pub fn eta_linearity_check(op: &GeneralizedPhaseOp, i: &Subspace) -> Result<bool> {
    check_iso_support(op, i)?;
    let d = op.modulus();
    let basis = i.basis();
    let Some(ks) = basis.iter().map(|b| op.integer_phase(b)).collect::<Option<Vec<u32>>>() else {
        return Ok(false);
    };
    for u in i.elements() {
        let c = i.coordinates_raw(u.coords()).expect("element of I");
        let k = c.iter().zip(&ks).fold(0, |acc, (ci, ki)| d.add(acc, d.mul(*ci, *ki)));
        if !angle_eq(op.eta(&u).expect("checked"), 2.0 * PI * k as f64 / d.get() as f64) {
            return Ok(false);
        }
    }
    Ok(true)
}

/// Entry-wise check that `wigner_function(ρ)` reproduces ρ and sums to 1.
pub fn wigner_roundtrip_error(rho: &DensityState, cap: DenseCap) -> Result<(f64, f64)> {
    let w = wigner_function(rho, cap)?;
    let err = w.reconstruct(cap)?.max_abs_diff(rho.operator());
    Ok((err, (w.sum() - 1.0).abs()))
}
