//! Uniform grids over outcome space and over the Fourier variable.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{KqpdError, Result};

/// One uniform axis `min, min + step, ..., max`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Axis {
    pub min: f64,
    pub max: f64,
    pub step: f64,
}

impl Axis {
    pub fn new(min: f64, max: f64, step: f64) -> Result<Self> {
        if !(step > 0.0) || !step.is_finite() {
            return Err(KqpdError::InvalidParameter(format!("axis step must be > 0, got {step}")));
        }
        if !(max >= min) || !min.is_finite() || !max.is_finite() {
            return Err(KqpdError::InvalidParameter(format!("axis range [{min}, {max}] is invalid")));
        }
        Ok(Axis { min, max, step })
    }

    /// Two-node axis for the discrete `σ2 = ±1` outcome. Trapezoidal
    /// integration over it reduces to a plain sum.
    pub fn spin_pair() -> Self {
        Axis { min: -1.0, max: 1.0, step: 2.0 }
    }

    pub fn len(&self) -> usize {
        ((self.max - self.min) / self.step).round() as usize + 1
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn node(&self, i: usize) -> f64 {
        self.min + i as f64 * self.step
    }

    pub fn nodes(&self) -> Vec<f64> {
        (0..self.len()).map(|i| self.node(i)).collect()
    }

    pub fn trapezoid_weights(&self) -> Vec<f64> {
        trapezoid_weights(self.len(), self.step)
    }
}

/// Composite trapezoidal weights for `n` equally spaced nodes.
pub fn trapezoid_weights(n: usize, step: f64) -> Vec<f64> {
    match n {
        0 => Vec::new(),
        1 => vec![0.0],
        _ => {
            let mut w = vec![step; n];
            w[0] = 0.5 * step;
            w[n - 1] = 0.5 * step;
            w
        }
    }
}

/// Symmetric grid `[-λ_c, λ_c]` with an odd node count, so that `λ = 0` is a
/// node and `node(n-1-k) == -node(k)` holds bit-exactly.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LambdaGrid {
    pub lambda_c: f64,
    pub n: usize,
}

impl LambdaGrid {
    pub fn new(lambda_c: f64, n: usize) -> Result<Self> {
        if !(lambda_c >= 0.0) || !lambda_c.is_finite() {
            return Err(KqpdError::InvalidParameter(format!("lambda_c must be >= 0, got {lambda_c}")));
        }
        if n < 3 || n % 2 == 0 {
            return Err(KqpdError::InvalidParameter(format!("lambda grid needs an odd node count >= 3, got {n}")));
        }
        Ok(LambdaGrid { lambda_c, n })
    }

    pub fn half(&self) -> usize {
        self.n / 2
    }

    pub fn step(&self) -> f64 {
        self.lambda_c / self.half() as f64
    }

    pub fn node(&self, k: usize) -> f64 {
        (k as f64 - self.half() as f64) * self.step()
    }

    pub fn nodes(&self) -> Vec<f64> {
        (0..self.n).map(|k| self.node(k)).collect()
    }

    pub fn weights(&self) -> Vec<f64> {
        trapezoid_weights(self.n, self.step())
    }

    pub fn axis(&self) -> Axis {
        Axis { min: -self.lambda_c, max: self.lambda_c, step: self.step() }
    }
}

/// Real-valued (possibly signed) density sampled on a product grid.
/// Values are stored row-major, last axis fastest.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DensityGrid {
    pub axes: Vec<Axis>,
    pub values: Vec<f64>,
}

impl DensityGrid {
    pub fn new(axes: Vec<Axis>, values: Vec<f64>) -> Result<Self> {
        let expected: usize = axes.iter().map(Axis::len).product();
        if expected != values.len() {
            return Err(KqpdError::DimensionMismatch(format!(
                "grid expects {expected} values, got {}",
                values.len()
            )));
        }
        Ok(DensityGrid { axes, values })
    }

    pub fn from_fn_1d(axis: Axis, f: impl Fn(f64) -> f64) -> Self {
        let values = axis.nodes().into_iter().map(f).collect();
        DensityGrid { axes: vec![axis], values }
    }

    pub fn from_fn_2d(a: Axis, b: Axis, f: impl Fn(f64, f64) -> f64) -> Self {
        let bn = b.nodes();
        let mut values = Vec::with_capacity(a.len() * bn.len());
        for x in a.nodes() {
            for &y in &bn {
                values.push(f(x, y));
            }
        }
        DensityGrid { axes: vec![a, b], values }
    }

    pub fn shape(&self) -> Vec<usize> {
        self.axes.iter().map(Axis::len).collect()
    }

    pub fn get(&self, idx: &[usize]) -> f64 {
        self.values[flat_index(&self.shape(), idx)]
    }

    /// Product-trapezoidal integral over all axes.
    pub fn integrate(&self) -> f64 {
        let weights: Vec<Vec<f64>> = self.axes.iter().map(Axis::trapezoid_weights).collect();
        let shape = self.shape();
        let mut total = 0.0;
        let mut idx = vec![0usize; shape.len()];
        for &v in &self.values {
            let w: f64 = idx.iter().zip(&weights).map(|(&i, w)| w[i]).product();
            total += w * v;
            advance(&mut idx, &shape);
        }
        total
    }

    pub fn min_value(&self) -> f64 {
        self.values.iter().copied().fold(f64::INFINITY, f64::min)
    }
}

/// Complex characteristic-function values on a product λ-grid.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CharFnGrid {
    pub axes: Vec<Axis>,
    pub values: Vec<Complex64>,
}

impl CharFnGrid {
    pub fn shape(&self) -> Vec<usize> {
        self.axes.iter().map(Axis::len).collect()
    }

    pub fn get(&self, idx: &[usize]) -> Complex64 {
        self.values[flat_index(&self.shape(), idx)]
    }

    /// Value at the central node (λ = 0 on a symmetric grid).
    pub fn at_origin(&self) -> Complex64 {
        let centre: Vec<usize> = self.shape().iter().map(|n| n / 2).collect();
        self.get(&centre)
    }

    /// `max |Y(-λ) - conj Y(λ)|` over the grid.
    pub fn conjugate_asymmetry(&self) -> f64 {
        let shape = self.shape();
        let mut idx = vec![0usize; shape.len()];
        let mut worst = 0.0f64;
        for &v in &self.values {
            let mirror: Vec<usize> = idx.iter().zip(&shape).map(|(&i, &n)| n - 1 - i).collect();
            worst = worst.max((self.get(&mirror) - v.conj()).norm());
            advance(&mut idx, &shape);
        }
        worst
    }
}

fn flat_index(shape: &[usize], idx: &[usize]) -> usize {
    assert_eq!(shape.len(), idx.len(), "index rank mismatch");
    idx.iter().zip(shape).fold(0, |acc, (&i, &n)| {
        assert!(i < n, "index {i} out of bounds {n}");
        acc * n + i
    })
}

fn advance(idx: &mut [usize], shape: &[usize]) {
    for d in (0..shape.len()).rev() {
        idx[d] += 1;
        if idx[d] < shape[d] {
            return;
        }
        idx[d] = 0;
    }
}
