//! Empirical characteristic functions `Y_λ = (1/N) Σ_j e^{-iλ x_j}`.
//!
//! Values are accumulated for `λ ≥ 0` with a phasor recurrence (reseeded from
//! `sin_cos` every [`RESEED`] nodes) and mirrored by conjugation, so every
//! returned grid is exactly conjugate-symmetric.

use num_complex::Complex64;
use rayon::prelude::*;

use crate::error::{KqpdError, Result};
use crate::grid::{CharFnGrid, LambdaGrid};
use crate::sampling::{MeasurementRecord, RecordKind, System};

const RESEED: usize = 64;

/// Unnormalized sums `Σ_j e^{-iλ_k x_j}` over all grid nodes.
pub(crate) fn cf_sums<'a>(samples: impl Iterator<Item = &'a f64>, grid: &LambdaGrid) -> Vec<Complex64> {
    let half = grid.half();
    let h = grid.step();
    let mut acc = vec![Complex64::new(0.0, 0.0); half + 1];
    for &x in samples {
        let step = Complex64::from_polar(1.0, -h * x);
        let mut z = Complex64::new(1.0, 0.0);
        for (k, slot) in acc.iter_mut().enumerate() {
            if k % RESEED == 0 && k > 0 {
                z = Complex64::from_polar(1.0, -(k as f64) * h * x);
            }
            *slot += z;
            z *= step;
        }
    }
    mirror(&acc)
}

fn mirror(non_negative: &[Complex64]) -> Vec<Complex64> {
    let half = non_negative.len() - 1;
    let mut out = Vec::with_capacity(2 * half + 1);
    out.extend(non_negative[1..].iter().rev().map(|z| z.conj()));
    out.extend_from_slice(non_negative);
    out
}

fn cf_from_values(values: &[f64], grid: &LambdaGrid) -> Vec<Complex64> {
    let n = values.len() as f64;
    cf_sums(values.iter(), grid).into_iter().map(|z| z / n).collect()
}

/// Empirical CF of a single-observable record.
pub fn empirical_cf(record: &MeasurementRecord, grid: &LambdaGrid) -> Result<CharFnGrid> {
    let xs = record.singles()?;
    if xs.is_empty() {
        return Err(KqpdError::EmptyRecord);
    }
    Ok(CharFnGrid { axes: vec![grid.axis()], values: cf_from_values(xs, grid) })
}

/// Two-dimensional empirical CF of a joint `(x, p)` record on `grid × grid`.
/// Costs `N · n²` complex operations.
pub fn empirical_cf_joint_xp(record: &MeasurementRecord, grid: &LambdaGrid) -> Result<CharFnGrid> {
    if record.kind != RecordKind::Joint || record.system != System::FockXp {
        return Err(KqpdError::WrongRecord {
            expected: "fock_xp joint".into(),
            found: format!("{} {}", record.system, record.kind),
        });
    }
    if record.is_empty() {
        return Err(KqpdError::EmptyRecord);
    }
    let n = grid.n;
    let inv_n = 1.0 / record.len() as f64;
    let lambdas = grid.nodes();
    let h = grid.step();
    let rows: Vec<Vec<Complex64>> = lambdas
        .par_iter()
        .map(|&lx| {
            let mut row = vec![Complex64::new(0.0, 0.0); n];
            for pair in record.values.chunks_exact(2) {
                let (x, p) = (pair[0], pair[1]);
                let step = Complex64::from_polar(1.0, -h * p);
                let ux = Complex64::from_polar(1.0, -lx * x);
                let mut z = ux * Complex64::from_polar(1.0, -lambdas[0] * p);
                for (k, slot) in row.iter_mut().enumerate() {
                    if k % RESEED == 0 && k > 0 {
                        z = ux * Complex64::from_polar(1.0, -lambdas[k] * p);
                    }
                    *slot += z;
                    z *= step;
                }
            }
            row.into_iter().map(|z| z * inv_n).collect()
        })
        .collect();
    Ok(CharFnGrid { axes: vec![grid.axis(), grid.axis()], values: rows.concat() })
}

/// Hybrid empirical CFs of a joint spin record, `(Y_{λ,+1}, Y_{λ,-1})`.
/// Both are normalized by the total count, so `Y_{0,+1} + Y_{0,-1} = 1`.
pub fn empirical_cf_spin(record: &MeasurementRecord, grid: &LambdaGrid) -> Result<(CharFnGrid, CharFnGrid)> {
    if record.kind != RecordKind::Joint || record.system != System::Spin {
        return Err(KqpdError::WrongRecord {
            expected: "spin joint".into(),
            found: format!("{} {}", record.system, record.kind),
        });
    }
    if record.is_empty() {
        return Err(KqpdError::EmptyRecord);
    }
    let inv_n = 1.0 / record.len() as f64;
    let branch = |sigma2: f64| {
        let sums = cf_sums(
            record.values.chunks_exact(2).filter(|c| c[1] == sigma2).map(|c| &c[0]),
            grid,
        );
        CharFnGrid { axes: vec![grid.axis()], values: sums.into_iter().map(|z| z * inv_n).collect() }
    };
    Ok((branch(1.0), branch(-1.0)))
}
