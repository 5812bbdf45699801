//! Sampling simulators: Wigner phase space and CNC phase space.
//!
//! Shot `k` draws from `ChaCha8Rng::seed_from_u64(seed)` on stream `k`, so a
//! shot's record depends only on `(seed, k)` and shots run in parallel.

use std::collections::BTreeMap;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use crate::circuit::{Circuit, Instruction};
use crate::cnc::PhasePoint;
use crate::dense::{DenseCap, DenseOperator};
use crate::error::{Error, Result};
use crate::field::Modulus;
use crate::symplectic::{check_vector, Subspace, SymplecticVector};

/// Tolerance for weight sign and normalization checks.
pub const WEIGHT_TOL: f64 = 1e-9;

/// Joint outcome distribution keyed by outcome tuples in measurement order.
pub type Distribution = BTreeMap<Vec<u32>, f64>;

fn check_weights(weights: &[f64]) -> Result<Vec<f64>> {
    if weights.is_empty() {
        return Err(Error::NotNormalized(0.0));
    }
    if let Some(&w) = weights.iter().find(|w| !w.is_finite() || **w < -WEIGHT_TOL) {
        return Err(Error::NegativeWeight(w));
    }
    let sum: f64 = weights.iter().sum();
    if (sum - 1.0).abs() > WEIGHT_TOL {
        return Err(Error::NotNormalized(sum));
    }
    let mut acc = 0.0;
    Ok(weights
        .iter()
        .map(|w| {
            acc += w.max(0.0);
            acc
        })
        .collect())
}

fn sample_index<R: Rng + ?Sized>(cumulative: &[f64], rng: &mut R) -> usize {
    let total = *cumulative.last().expect("nonempty");
    let x = rng.gen::<f64>() * total;
    cumulative.partition_point(|&c| c <= x).min(cumulative.len() - 1)
}

/// Nonnegative mixture of phase points.
#[derive(Clone, Debug, PartialEq)]
pub struct Ensemble {
    d: Modulus,
    n: usize,
    points: Vec<PhasePoint>,
    weights: Vec<f64>,
    cumulative: Vec<f64>,
}

impl Ensemble {
    pub fn new(entries: Vec<(PhasePoint, f64)>) -> Result<Ensemble> {
        let first = entries.first().ok_or(Error::NotNormalized(0.0))?;
        let (d, n) = (first.0.modulus(), first.0.n());
        if let Some((p, _)) = entries.iter().find(|(p, _)| p.modulus() != d || p.n() != n) {
            return Err(Error::DimensionMismatch {
                expected: n,
                found: p.n(),
            });
        }
        let (points, weights): (Vec<_>, Vec<_>) = entries.into_iter().unzip();
        let cumulative = check_weights(&weights)?;
        Ok(Ensemble {
            d,
            n,
            points,
            weights,
            cumulative,
        })
    }

    pub fn point_mass(p: PhasePoint) -> Ensemble {
        Ensemble::new(vec![(p, 1.0)]).expect("unit weight")
    }

    pub fn modulus(&self) -> Modulus {
        self.d
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn entries(&self) -> impl Iterator<Item = (&PhasePoint, f64)> {
        self.points.iter().zip(self.weights.iter().copied())
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    pub fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> &PhasePoint {
        &self.points[sample_index(&self.cumulative, rng)]
    }

    /// `Σ_i w_i A_i`.
    pub fn operator(&self, cap: DenseCap) -> Result<DenseOperator> {
        let mut acc = DenseOperator::zeros(self.d, self.n, cap)?;
        for (p, w) in self.entries() {
            acc = acc.add(&p.operator(cap)?.scale(w.into()));
        }
        Ok(acc)
    }
}

/// Nonnegative distribution over Wigner labels `u ∈ Z_d^{2n}`.
#[derive(Clone, Debug, PartialEq)]
pub struct WignerDistribution {
    d: Modulus,
    n: usize,
    labels: Vec<SymplecticVector>,
    weights: Vec<f64>,
    cumulative: Vec<f64>,
}

impl WignerDistribution {
    pub fn new(d: Modulus, n: usize, entries: Vec<(SymplecticVector, f64)>) -> Result<WignerDistribution> {
        for (u, _) in &entries {
            check_vector(d, n, u)?;
        }
        let (labels, weights): (Vec<_>, Vec<_>) = entries.into_iter().unzip();
        let cumulative = check_weights(&weights)?;
        Ok(WignerDistribution {
            d,
            n,
            labels,
            weights,
            cumulative,
        })
    }

    pub fn point_mass(u: SymplecticVector) -> WignerDistribution {
        let (d, n) = (u.modulus(), u.n());
        WignerDistribution::new(d, n, vec![(u, 1.0)]).expect("unit weight")
    }

    pub fn uniform(d: Modulus, n: usize) -> WignerDistribution {
        let all = Subspace::full(d, n).elements();
        let w = 1.0 / all.len() as f64;
        WignerDistribution::new(d, n, all.into_iter().map(|u| (u, w)).collect()).expect("uniform")
    }

    /// Reads an ensemble whose points are all Wigner points.
    pub fn from_ensemble(e: &Ensemble) -> Result<WignerDistribution> {
        let entries = e
            .entries()
            .map(|(p, w)| p.wigner_label().map(|u| (u, w)).ok_or(Error::NotWignerPoint))
            .collect::<Result<Vec<_>>>()?;
        WignerDistribution::new(e.modulus(), e.n(), entries)
    }

    pub fn modulus(&self) -> Modulus {
        self.d
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn entries(&self) -> impl Iterator<Item = (&SymplecticVector, f64)> {
        self.labels.iter().zip(self.weights.iter().copied())
    }

    pub fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> &SymplecticVector {
        &self.labels[sample_index(&self.cumulative, rng)]
    }

    pub fn to_ensemble(&self) -> Ensemble {
        Ensemble::new(self.entries().map(|(u, w)| (PhasePoint::wigner(u), w)).collect()).expect("checked")
    }
}

/// One simulated run.
#[derive(Clone, Debug, PartialEq)]
pub struct ShotRecord {
    /// One outcome per measurement, in circuit order.
    pub outcomes: Vec<u32>,
    /// State at the end of the run (a Wigner point for the Wigner simulator).
    pub final_point: PhasePoint,
}

impl ShotRecord {
    pub fn outcome(&self, circuit: &Circuit, var: &str) -> Option<u32> {
        let i = circuit.variables().iter().position(|v| v == var)?;
        self.outcomes.get(i).copied()
    }
}

fn check_dims(d: Modulus, n: usize, circuit: &Circuit) -> Result<()> {
    if d != circuit.modulus() {
        return Err(Error::ModulusMismatch {
            left: d.get(),
            right: circuit.modulus().get(),
        });
    }
    if n != circuit.n() {
        return Err(Error::DimensionMismatch {
            expected: circuit.n(),
            found: n,
        });
    }
    Ok(())
}

/// Per-shot generator, independent of scheduling.
pub fn shot_rng(seed: u64, shot: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(shot);
    rng
}

/// One run of the CNC simulator from a given phase point.
pub fn run_cnc_shot<R: Rng + ?Sized>(start: &PhasePoint, circuit: &Circuit, rng: &mut R) -> Result<ShotRecord> {
    let d = circuit.modulus();
    let mut p = start.clone();
    let mut outcomes = Vec::with_capacity(circuit.measurement_count());
    let xi0 = p.xi();
    for ins in circuit.instructions() {
        match ins {
            Instruction::Gate(g) => p = g.element().act_on_phase_point(&p)?,
            Instruction::CondGate { condition, gate } => {
                if condition.fires(d, &outcomes) {
                    p = gate.element().act_on_phase_point(&p)?;
                }
            }
            Instruction::Measure { label, .. } => {
                let (s, next) = p.measure(label, rng)?;
                if next.xi() > p.xi() || next.generator_count() > 2 * p.n() + xi0 {
                    return Err(Error::internal("measurement update grew the phase point"));
                }
                outcomes.push(s);
                p = next;
            }
        }
    }
    Ok(ShotRecord {
        outcomes,
        final_point: p,
    })
}

/// One run of the Wigner simulator from a Wigner label.
pub fn run_wigner_shot<R: Rng + ?Sized>(start: &SymplecticVector, circuit: &Circuit, rng: &mut R) -> Result<ShotRecord> {
    let d = circuit.modulus();
    let mut u = start.clone();
    let mut outcomes = Vec::with_capacity(circuit.measurement_count());
    for ins in circuit.instructions() {
        match ins {
            Instruction::Gate(g) => u = g.element().act_on_wigner(&u),
            Instruction::CondGate { condition, gate } => {
                if condition.fires(d, &outcomes) {
                    u = gate.element().act_on_wigner(&u);
                }
            }
            Instruction::Measure { label, .. } => {
                outcomes.push(label.form(&u));
                // Γ_{a,u} = u + <a>
                let t = rng.gen_range(0..d.get());
                u = u.plus(&label.scaled(t));
            }
        }
    }
    Ok(ShotRecord {
        outcomes,
        final_point: PhasePoint::wigner(&u),
    })
}

/// The CNC simulator over `shots` independent runs.
pub fn run_cnc(ensemble: &Ensemble, circuit: &Circuit, seed: u64, shots: u64) -> Result<Vec<ShotRecord>> {
    check_dims(ensemble.modulus(), ensemble.n(), circuit)?;
    (0..shots)
        .into_par_iter()
        .map(|k| {
            let mut rng = shot_rng(seed, k);
            let start = ensemble.sample(&mut rng);
            run_cnc_shot(start, circuit, &mut rng)
        })
        .collect()
}

/// The Wigner simulator over `shots` independent runs.
pub fn run_wigner(dist: &WignerDistribution, circuit: &Circuit, seed: u64, shots: u64) -> Result<Vec<ShotRecord>> {
    check_dims(dist.modulus(), dist.n(), circuit)?;
    (0..shots)
        .into_par_iter()
        .map(|k| {
            let mut rng = shot_rng(seed, k);
            let start = dist.sample(&mut rng);
            run_wigner_shot(start, circuit, &mut rng)
        })
        .collect()
}

pub fn empirical_distribution(records: &[ShotRecord]) -> Distribution {
    let mut counts: BTreeMap<Vec<u32>, u64> = BTreeMap::new();
    for r in records {
        *counts.entry(r.outcomes.clone()).or_default() += 1;
    }
    let total = records.len().max(1) as f64;
    counts.into_iter().map(|(k, c)| (k, c as f64 / total)).collect()
}

/// Per-variable outcome frequencies.
pub fn marginals(circuit: &Circuit, records: &[ShotRecord]) -> BTreeMap<String, Vec<f64>> {
    let d = circuit.modulus().get() as usize;
    let total = records.len().max(1) as f64;
    circuit
        .variables()
        .iter()
        .enumerate()
        .map(|(i, v)| {
            let mut freq = vec![0.0; d];
            for r in records {
                freq[r.outcomes[i] as usize] += 1.0 / total;
            }
            (v.clone(), freq)
        })
        .collect()
}
