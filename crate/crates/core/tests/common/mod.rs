//! Shared helpers for the integration suites: binned chi-square tests
//! against closed-form densities.

#![allow(dead_code)]

use statrs::distribution::{ChiSquared, ContinuousCDF};

/// Composite Simpson rule with `n` (even) panels.
pub fn simpson(f: impl Fn(f64) -> f64, a: f64, b: f64, n: usize) -> f64 {
    let h = (b - a) / n as f64;
    let mut s = f(a) + f(b);
    for i in 1..n {
        let x = a + i as f64 * h;
        s += if i % 2 == 1 { 4.0 } else { 2.0 } * f(x);
    }
    s * h / 3.0
}

/// Half-width `R` such that `[-R, R]` (or `[0, R]` if `from_zero`) holds all
/// but `1e-5` of the mass.
pub fn bulk_width(pdf: &impl Fn(f64) -> f64, from_zero: bool) -> f64 {
    let mut r = 0.5;
    loop {
        let lo = if from_zero { 0.0 } else { -r };
        if simpson(pdf, lo, r, 2000) > 1.0 - 1e-5 || r > 500.0 {
            return r;
        }
        r *= 1.25;
    }
}

/// Bin probabilities for `n_bins` equal bins over the bulk plus one tail bin
/// on each open side.
pub fn bin_edges(pdf: &impl Fn(f64) -> f64, n_bins: usize, from_zero: bool) -> Vec<f64> {
    let r = bulk_width(pdf, from_zero);
    let lo = if from_zero { 0.0 } else { -r };
    let h = (r - lo) / n_bins as f64;
    let mut edges = Vec::with_capacity(n_bins + 3);
    if !from_zero {
        edges.push(f64::NEG_INFINITY);
    }
    edges.extend((0..=n_bins).map(|i| lo + i as f64 * h));
    edges.push(f64::INFINITY);
    edges
}

/// Probability of each bin between consecutive `edges`; infinite edges are
/// replaced by a far cut-off.
pub fn bin_probabilities(pdf: &impl Fn(f64) -> f64, edges: &[f64]) -> Vec<f64> {
    let finite: Vec<f64> = edges.iter().copied().filter(|e| e.is_finite()).collect();
    let span = finite.last().unwrap() - finite.first().unwrap();
    let far_lo = finite.first().unwrap() - 3.0 * span;
    let far_hi = finite.last().unwrap() + 3.0 * span;
    edges
        .windows(2)
        .map(|w| {
            let a = if w[0].is_finite() { w[0] } else { far_lo };
            let b = if w[1].is_finite() { w[1] } else { far_hi };
            simpson(pdf, a, b, 400)
        })
        .collect()
}

pub fn bin_index(edges: &[f64], x: f64) -> usize {
    let k = edges.partition_point(|&e| e <= x);
    k.saturating_sub(1).min(edges.len() - 2)
}

#[derive(Debug, Clone, Copy)]
pub struct ChiSquareResult {
    pub statistic: f64,
    pub dof: usize,
    pub p_value: f64,
}

/// Pearson chi-square of observed counts against expected probabilities,
/// after merging adjacent cells until each expects at least 5 counts.
pub fn chi_square(observed: &[u64], probs: &[f64]) -> ChiSquareResult {
    assert_eq!(observed.len(), probs.len());
    let n: u64 = observed.iter().sum();
    let total_p: f64 = probs.iter().sum();
    let mut cells: Vec<(f64, f64)> = Vec::new();
    let (mut o_acc, mut e_acc) = (0.0, 0.0);
    for (&o, &p) in observed.iter().zip(probs) {
        o_acc += o as f64;
        e_acc += p / total_p * n as f64;
        if e_acc >= 5.0 {
            cells.push((o_acc, e_acc));
            o_acc = 0.0;
            e_acc = 0.0;
        }
    }
    if e_acc > 0.0 || o_acc > 0.0 {
        match cells.last_mut() {
            Some(last) => {
                last.0 += o_acc;
                last.1 += e_acc;
            }
            None => cells.push((o_acc, e_acc)),
        }
    }
    let statistic: f64 = cells.iter().map(|(o, e)| (o - e).powi(2) / e).sum();
    let dof = cells.len() - 1;
    let p_value = ChiSquared::new(dof as f64).unwrap().sf(statistic);
    ChiSquareResult { statistic, dof, p_value }
}

/// Chi-square of one-dimensional samples against `pdf`.
pub fn chi_square_1d(samples: &[f64], pdf: impl Fn(f64) -> f64, n_bins: usize) -> ChiSquareResult {
    let edges = bin_edges(&pdf, n_bins, false);
    let probs = bin_probabilities(&pdf, &edges);
    let mut counts = vec![0u64; probs.len()];
    for &x in samples {
        counts[bin_index(&edges, x)] += 1;
    }
    chi_square(&counts, &probs)
}

/// Chi-square of joint `(x, p)` samples against a rotation-invariant density
/// `pdf(r²)`: cells are `u = r²` bins times equal angle sectors.
pub fn chi_square_radial(pairs: &[f64], pdf_r2: impl Fn(f64) -> f64, n_u_bins: usize, n_sectors: usize) -> ChiSquareResult {
    // u = r² has density π pdf(u) when the angle is uniform.
    let density_u = |u: f64| std::f64::consts::PI * pdf_r2(u);
    let edges = bin_edges(&density_u, n_u_bins, true);
    let probs_u = bin_probabilities(&density_u, &edges);
    let mut counts = vec![0u64; probs_u.len() * n_sectors];
    for c in pairs.chunks_exact(2) {
        let u = c[0] * c[0] + c[1] * c[1];
        let theta = c[1].atan2(c[0]).rem_euclid(std::f64::consts::TAU);
        let s = ((theta / std::f64::consts::TAU * n_sectors as f64) as usize).min(n_sectors - 1);
        counts[bin_index(&edges, u) * n_sectors + s] += 1;
    }
    let probs: Vec<f64> = probs_u.iter().flat_map(|&p| std::iter::repeat_n(p / n_sectors as f64, n_sectors)).collect();
    chi_square(&counts, &probs)
}

/// Chi-square of spin joint samples: `σ1` bins for each `σ2` branch.
pub fn chi_square_spin_joint(pairs: &[f64], pdf: impl Fn(f64, f64) -> f64, n_bins: usize) -> ChiSquareResult {
    let marginal = |s: f64| pdf(s, 1.0) + pdf(s, -1.0);
    let edges = bin_edges(&marginal, n_bins, false);
    let mut probs = bin_probabilities(&|s| pdf(s, 1.0), &edges);
    probs.extend(bin_probabilities(&|s| pdf(s, -1.0), &edges));
    let nb = edges.len() - 1;
    let mut counts = vec![0u64; 2 * nb];
    for c in pairs.chunks_exact(2) {
        let branch = if c[1] > 0.0 { 0 } else { 1 };
        counts[branch * nb + bin_index(&edges, c[0])] += 1;
    }
    chi_square(&counts, &probs)
}
