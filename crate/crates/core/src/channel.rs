//! Gaussian random displacement sampling and syndrome-consistent candidates.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};
use serde::{Deserialize, Serialize};

use crate::codes::GkpCodeLayout;
use crate::error::{GkpError, Result};
use crate::lattice::{from_frame, to_frame, LogicalClass, PauliString, ShiftVector};

/// Key of one trial in the counter-based random stream.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct SeedPath {
    pub run_seed: u64,
    pub trial_index: u64,
}

impl SeedPath {
    pub fn new(run_seed: u64, trial_index: u64) -> Self {
        Self { run_seed, trial_index }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct NoiseSample {
    pub xi: ShiftVector,
    pub seed_path: SeedPath,
}

/// Draws `2·n_modes` i.i.d. `N(0, σ²)` quadrature shifts.
///
/// Trial `i` reads stream `i` of a ChaCha8 generator keyed by the run seed, so
/// any trial is reproducible on its own and the draws for different `σ` are
/// the same standard normals rescaled.
pub fn sample_shift(sigma: f64, n_modes: usize, seed_path: SeedPath) -> Result<NoiseSample> {
    if !(sigma > 0.0 && sigma.is_finite()) {
        return Err(GkpError::InvalidParameter(format!(
            "sigma must be positive, got {sigma}"
        )));
    }
    if n_modes == 0 {
        return Err(GkpError::InvalidParameter("at least one mode is required".into()));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed_path.run_seed);
    rng.set_stream(seed_path.trial_index);
    let components = (0..2 * n_modes)
        .map(|_| sigma * <StandardNormal as Distribution<f64>>::sample(&StandardNormal, &mut rng))
        .collect();
    Ok(NoiseSample {
        xi: ShiftVector::new(components)?,
        seed_path,
    })
}

/// A representative `η_s` of the syndrome class of a shift.
///
/// `frame` holds `η_s` in per-mode Pauli-frame units (`η_s = √π (⊕S) frame`).
/// It is the per-coordinate reduction into `(−½, ½]` plus the binary pure
/// error that reproduces the outer-code syndrome of the rounded part.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SyndromeRecord {
    pub candidate: ShiftVector,
    pub frame: Vec<f64>,
    pub reduced: Vec<f64>,
    pub syndrome: Vec<bool>,
    pub pure_error: PauliString,
    /// Class of `ξ − η_s`.
    pub true_class: LogicalClass,
}

impl SyndromeRecord {
    pub fn n_modes(&self) -> usize {
        self.frame.len() / 2
    }

    /// Frame coordinates `(η_q, η_p)` of mode `i`.
    pub fn mode_frame(&self, i: usize) -> [f64; 2] {
        [self.frame[2 * i], self.frame[2 * i + 1]]
    }
}

/// Nearest integer with ties sent down, so the remainder lies in `(−½, ½]`.
fn reduce(y: f64) -> (f64, i64) {
    let m = (y - 0.5).ceil();
    (y - m, m as i64)
}

/// Builds the syndrome record of `xi` for `layout`.
pub fn candidate_error(xi: &ShiftVector, layout: &GkpCodeLayout) -> Result<SyndromeRecord> {
    if xi.n_modes() != layout.n_modes() {
        return Err(GkpError::InvalidInput(format!(
            "shift has {} modes, layout has {}",
            xi.n_modes(),
            layout.n_modes()
        )));
    }
    let inner = layout.inner_symplectic().matrix2();
    let y = to_frame(xi.as_slice(), &inner);
    let mut reduced = Vec::with_capacity(y.len());
    let mut labels = Vec::with_capacity(layout.n_modes());
    for pair in y.chunks_exact(2) {
        let (rq, mq) = reduce(pair[0]);
        let (rp, mp) = reduce(pair[1]);
        reduced.push(rq);
        reduced.push(rp);
        labels.push(mq.rem_euclid(2) as u8 | (mp.rem_euclid(2) as u8) << 1);
    }
    let rounded = PauliString::from_labels(labels);
    let syndrome = layout.syndrome(&rounded);
    let mut pure_error = PauliString::identity(layout.n_modes());
    for (j, _) in syndrome.iter().enumerate().filter(|(_, &s)| s) {
        pure_error.mul_assign(&layout.pure_errors()[j]);
    }
    let frame: Vec<f64> = reduced
        .chunks_exact(2)
        .zip(pure_error.labels())
        .flat_map(|(r, &l)| [r[0] + (l & 1) as f64, r[1] + (l >> 1) as f64])
        .collect();
    let difference = rounded.mul(&pure_error);
    let true_class = LogicalClass::from_bits(
        difference.anticommutes(layout.logical_z()),
        difference.anticommutes(layout.logical_x()),
    );
    Ok(SyndromeRecord {
        candidate: ShiftVector::new(from_frame(&frame, &inner))?,
        frame,
        reduced,
        syndrome,
        pure_error,
        true_class,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::codes::{build_layout, Family};
    use crate::lattice::logical_class_of;

    #[test]
    fn identical_seed_paths_give_identical_bits() {
        let a = sample_shift(0.5, 9, SeedPath::new(7, 123)).unwrap();
        let b = sample_shift(0.5, 9, SeedPath::new(7, 123)).unwrap();
        let bits = |s: &NoiseSample| s.xi.as_slice().iter().map(|x| x.to_bits()).collect::<Vec<_>>();
        assert_eq!(bits(&a), bits(&b));
        let c = sample_shift(0.5, 9, SeedPath::new(7, 124)).unwrap();
        assert_ne!(bits(&a), bits(&c));
    }

    #[test]
    fn sigma_rescales_the_same_normals() {
        let a = sample_shift(0.5, 3, SeedPath::new(1, 2)).unwrap();
        let b = sample_shift(1.0, 3, SeedPath::new(1, 2)).unwrap();
        for (x, y) in a.xi.as_slice().iter().zip(b.xi.as_slice()) {
            assert!((x - 0.5 * y).abs() < 1e-15);
        }
    }

    #[test]
    fn empirical_moments() {
        let sigma = 0.6;
        let draws: Vec<f64> = (0..500_000u64)
            .flat_map(|i| {
                sample_shift(sigma, 1, SeedPath::new(99, i))
                    .unwrap()
                    .xi
                    .as_slice()
                    .to_vec()
            })
            .collect();
        let n = draws.len() as f64;
        let mean = draws.iter().sum::<f64>() / n;
        let var = draws.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / n;
        assert!(mean.abs() < 4.0 * sigma / n.sqrt(), "mean {mean}");
        assert!((var / (sigma * sigma) - 1.0).abs() < 0.01, "var {var}");
    }

    #[test]
    fn rejects_bad_arguments() {
        assert!(sample_shift(0.0, 1, SeedPath::new(0, 0)).is_err());
        assert!(sample_shift(0.5, 0, SeedPath::new(0, 0)).is_err());
        let layout = build_layout(Family::SurfaceSquare, 3).unwrap();
        assert!(candidate_error(&ShiftVector::zeros(2), &layout).is_err());
    }

    #[test]
    fn zero_shift_has_zero_candidate() {
        let layout = build_layout(Family::ColorHex, 3).unwrap();
        let r = candidate_error(&ShiftVector::zeros(7), &layout).unwrap();
        assert!(r.candidate.as_slice().iter().all(|&x| x == 0.0));
        assert_eq!(r.true_class, LogicalClass::I);
    }

    #[test]
    fn single_mode_logical_shift_is_absorbed() {
        let layout = build_layout(Family::SquareSingle, 1).unwrap();
        let xi = ShiftVector::new(vec![std::f64::consts::PI.sqrt(), 0.0]).unwrap();
        let r = candidate_error(&xi, &layout).unwrap();
        assert!(r.candidate.norm_squared() < 1e-24);
        assert_eq!(r.true_class, LogicalClass::X);
        let diff = xi.sub(&r.candidate).unwrap();
        assert_eq!(logical_class_of(&diff, &layout).unwrap(), LogicalClass::X);
    }

    #[test]
    fn small_shift_is_its_own_candidate() {
        let layout = build_layout(Family::SurfaceSquare, 3).unwrap();
        let xi = ShiftVector::new((0..18).map(|i| 0.8 * ((i as f64) / 18.0 - 0.5)).collect()).unwrap();
        let r = candidate_error(&xi, &layout).unwrap();
        for (a, b) in r.candidate.as_slice().iter().zip(xi.as_slice()) {
            assert!((a - b).abs() < 1e-15);
        }
    }

    #[test]
    fn tie_maps_to_positive_half() {
        assert_eq!(reduce(0.5), (0.5, 0));
        assert_eq!(reduce(-0.5), (0.5, -1));
        assert_eq!(reduce(1.5), (0.5, 1));
    }
}
