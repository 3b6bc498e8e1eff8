//! Finite-dimensional Keldysh quasi-probability for two sequentially measured
//! observables.
//!
//! Writing the state in the eigenbasis `{a_m, |m⟩}` of the first observable
//! and resolving the second in its eigenbasis `{b_k, |b_k⟩}`, every λ-integral
//! collapses to a delta function. The quasi-probability is therefore a finite
//! set of signed atoms at `((a_m + a_n)/2, b_k)` with weights
//! `Re{ρ_mn e^{-iγ1(a_m - a_n)} ⟨b_k|m⟩⟨n|b_k⟩}`. The backaction `γ2` on the
//! last observable only contributes a phase that cancels under the trace.

use nalgebra::{DMatrix, SymmetricEigen};
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{KqpdError, Result};
use crate::systems::{backaction_density, check_strength, imprecision_kernel};

const HERMITIAN_TOL: f64 = 1e-12;
const TRACE_TOL: f64 = 1e-12;
const PSD_TOL: f64 = 1e-10;
const MERGE_TOL: f64 = 1e-9;
const IMAGINARY_TOL: f64 = 1e-10;
const PRUNE_TOL: f64 = 1e-14;

/// A normalized, positive semidefinite state.
#[derive(Debug, Clone, PartialEq)]
pub struct DensityMatrix {
    entries: DMatrix<Complex64>,
}

impl DensityMatrix {
    pub fn new(entries: DMatrix<Complex64>) -> Result<Self> {
        check_hermitian("density matrix", &entries)?;
        let trace = entries.trace();
        if (trace - Complex64::new(1.0, 0.0)).norm() > TRACE_TOL {
            return Err(KqpdError::InvalidMatrix {
                kind: "density matrix",
                reason: format!("trace {trace} != 1"),
            });
        }
        let eig = hermitian_eigen(&entries)?;
        let min_eig = eig.eigenvalues.iter().copied().fold(f64::INFINITY, f64::min);
        if min_eig < -PSD_TOL {
            return Err(KqpdError::InvalidMatrix {
                kind: "density matrix",
                reason: format!("negative eigenvalue {min_eig:e}"),
            });
        }
        Ok(DensityMatrix { entries })
    }

    /// `|ψ⟩⟨ψ|` for a normalized state vector.
    pub fn pure(psi: &[Complex64]) -> Result<Self> {
        let norm: f64 = psi.iter().map(|c| c.norm_sqr()).sum();
        if (norm - 1.0).abs() > 1e-10 {
            return Err(KqpdError::NotNormalized { name: "psi", norm });
        }
        let n = psi.len();
        Self::new(DMatrix::from_fn(n, n, |i, j| psi[i] * psi[j].conj()))
    }

    pub fn maximally_mixed(dim: usize) -> Result<Self> {
        if dim == 0 {
            return Err(KqpdError::InvalidParameter("dimension must be positive".into()));
        }
        let v = Complex64::new(1.0 / dim as f64, 0.0);
        Self::new(DMatrix::from_diagonal_element(dim, dim, v))
    }

    pub fn dim(&self) -> usize {
        self.entries.nrows()
    }

    pub fn entries(&self) -> &DMatrix<Complex64> {
        &self.entries
    }
}

/// A Hermitian observable with a display label.
#[derive(Debug, Clone, PartialEq)]
pub struct Observable {
    entries: DMatrix<Complex64>,
    pub label: String,
}

impl Observable {
    pub fn new(entries: DMatrix<Complex64>, label: impl Into<String>) -> Result<Self> {
        check_hermitian("observable", &entries)?;
        Ok(Observable { entries, label: label.into() })
    }

    pub fn pauli_x() -> Self {
        let (o, l) = (Complex64::new(0.0, 0.0), Complex64::new(1.0, 0.0));
        Observable { entries: DMatrix::from_row_slice(2, 2, &[o, l, l, o]), label: "sigma_x".into() }
    }

    pub fn pauli_y() -> Self {
        let (o, i) = (Complex64::new(0.0, 0.0), Complex64::new(0.0, 1.0));
        Observable { entries: DMatrix::from_row_slice(2, 2, &[o, -i, i, o]), label: "sigma_y".into() }
    }

    pub fn pauli_z() -> Self {
        let (o, l) = (Complex64::new(0.0, 0.0), Complex64::new(1.0, 0.0));
        Observable { entries: DMatrix::from_row_slice(2, 2, &[l, o, o, -l]), label: "sigma_z".into() }
    }

    pub fn dim(&self) -> usize {
        self.entries.nrows()
    }

    pub fn entries(&self) -> &DMatrix<Complex64> {
        &self.entries
    }
}

fn check_hermitian(kind: &'static str, m: &DMatrix<Complex64>) -> Result<()> {
    if !m.is_square() || m.nrows() == 0 {
        return Err(KqpdError::InvalidMatrix { kind, reason: format!("shape {}x{}", m.nrows(), m.ncols()) });
    }
    let dev = (m - m.adjoint()).iter().map(|c| c.norm()).fold(0.0, f64::max);
    if dev > HERMITIAN_TOL {
        return Err(KqpdError::InvalidMatrix { kind, reason: format!("not Hermitian (deviation {dev:e})") });
    }
    Ok(())
}

fn hermitian_eigen(m: &DMatrix<Complex64>) -> Result<SymmetricEigen<Complex64, nalgebra::Dyn>> {
    SymmetricEigen::try_new(m.clone(), f64::EPSILON, 10_000)
        .ok_or_else(|| KqpdError::Eigen(format!("no convergence for {}x{} matrix", m.nrows(), m.ncols())))
}

/// One signed point mass of a discrete quasi-probability.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Atom {
    pub a1: f64,
    pub a2: f64,
    pub weight: f64,
}

/// Discrete quasi-probability: signed atoms evaluated at fixed backaction
/// variables `(γ1, γ2)`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SignedAtomDistribution {
    pub atoms: Vec<Atom>,
    pub backaction: (f64, f64),
}

impl SignedAtomDistribution {
    pub fn total_weight(&self) -> f64 {
        self.atoms.iter().map(|a| a.weight).sum()
    }

    /// Weight of the atom at `(a1, a2)`, zero if there is none.
    pub fn weight_at(&self, a1: f64, a2: f64) -> f64 {
        self.atoms
            .iter()
            .filter(|a| (a.a1 - a1).abs() <= MERGE_TOL && (a.a2 - a2).abs() <= MERGE_TOL)
            .map(|a| a.weight)
            .sum()
    }

    pub fn min_weight(&self) -> f64 {
        self.atoms.iter().map(|a| a.weight).fold(f64::INFINITY, f64::min)
    }
}

/// Sequential-ordering quasi-probability of `a1` followed by `a2` in state `rho`.
///
/// Atoms with `|weight| < 1e-14` are dropped. `gamma2` is accepted for
/// symmetry with the two-detector setting but does not enter the weights.
pub fn kqpd_generic_sequential(
    rho: &DensityMatrix,
    a1: &Observable,
    a2: &Observable,
    gamma1: f64,
    gamma2: f64,
) -> Result<SignedAtomDistribution> {
    let dim = rho.dim();
    if a1.dim() != dim || a2.dim() != dim {
        return Err(KqpdError::DimensionMismatch(format!(
            "state is {dim}-dimensional, observables are {} and {}",
            a1.dim(),
            a2.dim()
        )));
    }
    let eig1 = hermitian_eigen(a1.entries())?;
    let eig2 = hermitian_eigen(a2.entries())?;
    let v1 = &eig1.eigenvectors;
    let rho1 = v1.adjoint() * rho.entries() * v1;
    // overlap[(k, m)] = ⟨b_k|m⟩
    let overlap = eig2.eigenvectors.adjoint() * v1;

    let mut raw: Vec<(f64, f64, Complex64)> = Vec::new();
    for m in 0..dim {
        for n in 0..dim {
            let am = eig1.eigenvalues[m];
            let an = eig1.eigenvalues[n];
            let phase = Complex64::from_polar(1.0, -gamma1 * (am - an));
            let base = rho1[(m, n)] * phase;
            for k in 0..dim {
                let w = base * overlap[(k, m)] * overlap[(k, n)].conj();
                let pos = (0.5 * (am + an), eig2.eigenvalues[k]);
                match raw
                    .iter_mut()
                    .find(|(x, y, _)| (x - pos.0).abs() <= MERGE_TOL && (y - pos.1).abs() <= MERGE_TOL)
                {
                    Some(entry) => entry.2 += w,
                    None => raw.push((pos.0, pos.1, w)),
                }
            }
        }
    }

    let residue: f64 = raw.iter().map(|(_, _, w)| w.im.abs()).sum();
    if residue > IMAGINARY_TOL {
        return Err(KqpdError::ImaginaryResidue(residue));
    }
    let _ = gamma2;
    let mut atoms: Vec<Atom> = raw
        .into_iter()
        .filter(|(_, _, w)| w.re.abs() >= PRUNE_TOL)
        .map(|(a1, a2, w)| Atom { a1, a2, weight: w.re })
        .collect();
    atoms.sort_by(|x, y| x.a1.total_cmp(&y.a1).then(x.a2.total_cmp(&y.a2)));
    Ok(SignedAtomDistribution { atoms, backaction: (gamma1, gamma2) })
}

/// Measurement model for a weak (strength `χ`) measurement of the first
/// observable followed by a projective measurement of the second: the
/// quasi-probability is averaged over the backaction `γ1 ~ p(γ|χ)` and the
/// first outcome is blurred by the imprecision kernel `D(·|χ)`.
#[derive(Debug, Clone)]
pub struct SequentialMeasurement {
    pub rho: DensityMatrix,
    pub first: Observable,
    pub second: Observable,
}

impl SequentialMeasurement {
    pub fn new(rho: DensityMatrix, first: Observable, second: Observable) -> Self {
        SequentialMeasurement { rho, first, second }
    }

    /// Atom weights averaged over the backaction of the first detector
    /// (trapezoidal rule on ±12 standard deviations, 801 nodes).
    pub fn backaction_averaged(&self, chi: f64) -> Result<SignedAtomDistribution> {
        check_strength("chi", chi)?;
        let sd = chi / 2f64.sqrt();
        let n = 801usize;
        let half = (n / 2) as f64;
        let h = 12.0 * sd / half;
        let mut acc: Vec<Atom> = Vec::new();
        for i in 0..n {
            let gamma = (i as f64 - half) * h;
            let w = backaction_density(gamma, chi) * h;
            let dist = kqpd_generic_sequential(&self.rho, &self.first, &self.second, gamma, 0.0)?;
            for atom in dist.atoms {
                match acc
                    .iter_mut()
                    .find(|a| (a.a1 - atom.a1).abs() <= MERGE_TOL && (a.a2 - atom.a2).abs() <= MERGE_TOL)
                {
                    Some(a) => a.weight += w * atom.weight,
                    None => acc.push(Atom { weight: w * atom.weight, ..atom }),
                }
            }
        }
        acc.sort_by(|x, y| x.a1.total_cmp(&y.a1).then(x.a2.total_cmp(&y.a2)));
        Ok(SignedAtomDistribution { atoms: acc, backaction: (f64::NAN, f64::NAN) })
    }

    /// Measured density of `(σ1, σ2)`: continuous in the first outcome,
    /// discrete in the second.
    pub fn measured_density(averaged: &SignedAtomDistribution, sigma1: f64, sigma2: f64, chi: f64) -> f64 {
        averaged
            .atoms
            .iter()
            .filter(|a| (a.a2 - sigma2).abs() <= MERGE_TOL)
            .map(|a| a.weight * imprecision_kernel(sigma1 - a.a1, chi))
            .sum()
    }
}
