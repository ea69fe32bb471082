//! Per-mode coset weights `τ`.

use std::f64::consts::PI;

use nalgebra::{Matrix2, Vector2};
use serde::{Deserialize, Serialize};

use crate::channel::SyndromeRecord;
use crate::codes::GkpCodeLayout;
use crate::error::{GkpError, Result};
use crate::lattice::SymplecticMatrix;

/// Default number of lattice points kept per weight.
pub const DEFAULT_NV: usize = 4;

/// `ln Σ exp(x)` with max subtraction; `−∞` for an empty or all-`−∞` input.
pub fn log_sum_exp(xs: &[f64]) -> f64 {
    let max = xs.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    if max == f64::NEG_INFINITY || max.is_nan() {
        return max;
    }
    max + xs.iter().map(|&x| (x - max).exp()).sum::<f64>().ln()
}

/// Running log-sum-exp accumulator.
#[derive(Debug, Clone, Copy)]
pub struct StreamingLse {
    max: f64,
    sum: f64,
}

impl Default for StreamingLse {
    fn default() -> Self {
        Self {
            max: f64::NEG_INFINITY,
            sum: 0.0,
        }
    }
}

impl StreamingLse {
    pub fn push(&mut self, x: f64) {
        if x == f64::NEG_INFINITY {
            return;
        }
        if x <= self.max {
            self.sum += (x - self.max).exp();
        } else {
            self.sum = self.sum * (self.max - x).exp() + 1.0;
            self.max = x;
        }
    }

    pub fn value(&self) -> f64 {
        if self.max == f64::NEG_INFINITY {
            f64::NEG_INFINITY
        } else {
            self.max + self.sum.ln()
        }
    }
}

/// The `n` integers closest to `x`, nearest first (ties favour the lower one).
fn nearest_integers(x: f64, n: usize) -> impl Iterator<Item = f64> {
    let mut lo = x.floor();
    let mut hi = lo + 1.0;
    (0..n).map(move |_| {
        if x - lo <= hi - x {
            lo -= 1.0;
            lo + 1.0
        } else {
            hi += 1.0;
            hi - 1.0
        }
    })
}

/// `ln τ_sq(g)`: log of `Σ_n exp(−π(η − g − 2n)²/(2σ²))` over the `n_v`
/// integers `n` closest to `(η − g)/2`.
pub fn tau_square(eta: f64, g: u8, sigma: f64, n_v: usize) -> f64 {
    let x = (eta - g as f64) / 2.0;
    let scale = -2.0 * PI / (sigma * sigma);
    let terms: Vec<f64> = nearest_integers(x, n_v.max(1))
        .map(|n| scale * (x - n) * (x - n))
        .collect();
    log_sum_exp(&terms)
}

/// Label bits `(x, z)` of an F4 label as frame offsets.
fn label_offset(label: u8) -> Vector2<f64> {
    Vector2::new((label & 1) as f64, (label >> 1) as f64)
}

/// `ln τ(g)` for a general inner code: log of the Gaussian weight of the
/// `n_v` points of the lattice `2√π S Z²` closest to `y = √π S (η − g)`.
pub fn tau_general(s: &SymplecticMatrix, eta: [f64; 2], g: u8, sigma: f64, n_v: usize) -> f64 {
    tau_general_matrix(&s.matrix2(), eta, g, sigma, n_v)
}

pub(crate) fn tau_general_matrix(s: &Matrix2<f64>, eta: [f64; 2], g: u8, sigma: f64, n_v: usize) -> f64 {
    let n_v = n_v.max(1);
    let w = (Vector2::new(eta[0], eta[1]) - label_offset(g)) / 2.0;
    let centre = w.map(f64::round);
    let radius = 1 + (n_v as f64).sqrt().ceil() as i32;
    let scale = -4.0 * PI / (2.0 * sigma * sigma);
    let mut terms = Vec::with_capacity(((2 * radius + 1) * (2 * radius + 1)) as usize);
    for i in -radius..=radius {
        for j in -radius..=radius {
            let p = w - centre - Vector2::new(i as f64, j as f64);
            terms.push(scale * (s * p).norm_squared());
        }
    }
    let n_v = n_v.min(terms.len());
    terms.select_nth_unstable_by(n_v - 1, |a, b| b.total_cmp(a));
    log_sum_exp(&terms[..n_v])
}

/// Log-weights of the four local Pauli labels of every qubit for one
/// syndrome record, indexed by label `x + 2z` (I, X, Z, Y).
///
/// For square inner codes the weights factorize into a q side and a p side,
/// which are kept separately.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CosetWeightTable {
    labels: Vec<[f64; 4]>,
    sides: Option<Vec<[[f64; 2]; 2]>>,
}

impl CosetWeightTable {
    pub fn build(record: &SyndromeRecord, layout: &GkpCodeLayout, sigma: f64, n_v: usize) -> Result<Self> {
        if !(sigma > 0.0 && sigma.is_finite()) {
            return Err(GkpError::InvalidParameter(format!(
                "sigma must be positive, got {sigma}"
            )));
        }
        if n_v == 0 {
            return Err(GkpError::InvalidParameter("n_v must be at least 1".into()));
        }
        if record.n_modes() != layout.n_modes() {
            return Err(GkpError::InvalidInput(format!(
                "record has {} modes, layout has {}",
                record.n_modes(),
                layout.n_modes()
            )));
        }
        let inner = layout.inner_symplectic();
        let n = layout.n_modes();
        let table = if inner.is_identity() {
            let sides: Vec<[[f64; 2]; 2]> = (0..n)
                .map(|i| {
                    let [q, p] = record.mode_frame(i);
                    [
                        [tau_square(q, 0, sigma, n_v), tau_square(q, 1, sigma, n_v)],
                        [tau_square(p, 0, sigma, n_v), tau_square(p, 1, sigma, n_v)],
                    ]
                })
                .collect();
            Self::from_sides(sides)
        } else {
            let s = inner.matrix2();
            Self {
                labels: (0..n)
                    .map(|i| {
                        let eta = record.mode_frame(i);
                        std::array::from_fn(|l| tau_general_matrix(&s, eta, l as u8, sigma, n_v))
                    })
                    .collect(),
                sides: None,
            }
        };
        if table.labels.iter().flatten().any(|w| !w.is_finite()) {
            return Err(GkpError::NumericalFailure("non-finite coset weight".into()));
        }
        Ok(table)
    }

    /// Table from per-qubit `[q side, p side]` binary log-weights.
    pub fn from_sides(sides: Vec<[[f64; 2]; 2]>) -> Self {
        Self {
            labels: sides
                .iter()
                .map(|[q, p]| std::array::from_fn(|l| q[l & 1] + p[l >> 1]))
                .collect(),
            sides: Some(sides),
        }
    }

    /// Table from per-qubit F4 log-weights.
    pub fn from_labels(labels: Vec<[f64; 4]>) -> Self {
        Self { labels, sides: None }
    }

    pub fn len(&self) -> usize {
        self.labels.len()
    }

    pub fn is_empty(&self) -> bool {
        self.labels.is_empty()
    }

    pub fn labels(&self) -> &[[f64; 4]] {
        &self.labels
    }

    /// Binary log-weights of one quadrature side (0 = q, 1 = p), if factorized.
    pub fn side(&self, side: usize) -> Option<Vec<[f64; 2]>> {
        self.sides.as_ref().map(|s| s.iter().map(|t| t[side]).collect())
    }

    pub fn is_factorized(&self) -> bool {
        self.sides.is_some()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::codes::hexagonal_inner_symplectic;

    fn direct_square(eta: f64, g: u8, sigma: f64) -> f64 {
        let terms: Vec<f64> = (-50..=50)
            .map(|n| {
                let d = eta - g as f64 - 2.0 * n as f64;
                -PI * d * d / (2.0 * sigma * sigma)
            })
            .collect();
        log_sum_exp(&terms)
    }

    #[test]
    fn nearest_integers_order() {
        let v: Vec<f64> = nearest_integers(0.3, 4).collect();
        assert_eq!(v, [0.0, 1.0, -1.0, 2.0]);
        let v: Vec<f64> = nearest_integers(-0.7, 3).collect();
        assert_eq!(v, [-1.0, 0.0, -2.0]);
    }

    #[test]
    fn zero_offset_value() {
        let v = tau_square(0.0, 0, 0.6, 3);
        let expected = (1.0 + 2.0 * (-2.0 * PI / 0.36f64).exp()).ln();
        assert!((v - expected).abs() < 1e-15);
        assert!((v - direct_square(0.0, 0, 0.6)).abs() < 1e-15);
    }

    #[test]
    fn ratio_of_odd_to_even() {
        let ratio = (tau_square(0.0, 1, 0.6, 4) - tau_square(0.0, 0, 0.6, 4)).exp();
        let oracle = (direct_square(0.0, 1, 0.6) - direct_square(0.0, 0, 0.6)).exp();
        assert!((ratio - oracle).abs() < 1e-15);
        assert!((ratio - 2.0 * (-PI / 0.72f64).exp()).abs() < 1e-6);
        assert!((ratio - 2.55e-2).abs() < 5e-4);
    }

    #[test]
    fn identity_inner_code_factorizes() {
        let id = SymplecticMatrix::identity(1);
        for &(q, p) in &[(0.1, -0.3), (0.49, 0.2), (1.2, -1.4)] {
            for g in 0..4u8 {
                let general = tau_general(&id, [q, p], g, 0.55, 121);
                let product = tau_square(q, g & 1, 0.55, 11) + tau_square(p, g >> 1, 0.55, 11);
                assert!((general - product).abs() < 1e-13, "{general} vs {product}");
            }
        }
    }

    #[test]
    fn hexagonal_origin_dominates() {
        let s = hexagonal_inner_symplectic();
        let v = tau_general(&s, [0.0, 0.0], 0, 0.3, 4);
        assert!(v.abs() < 1e-12);
    }

    #[test]
    fn streaming_matches_batch() {
        let xs = [-3.0, 2.5, f64::NEG_INFINITY, 7.0, -100.0, 6.9];
        let mut s = StreamingLse::default();
        xs.iter().for_each(|&x| s.push(x));
        assert!((s.value() - log_sum_exp(&xs)).abs() < 1e-14);
        assert_eq!(StreamingLse::default().value(), f64::NEG_INFINITY);
    }
}
