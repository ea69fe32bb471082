//! Achievable rates and capacity bounds: hashing bound of Pauli channels,
//! the Gaussian-channel capacity bounds, Gaussian-state entropies and the
//! coherent information of thermal inputs.

use nalgebra::{Complex, DMatrix, DVector, Matrix2, Matrix4};
use serde::{Deserialize, Serialize};

use crate::error::{GkpError, Result};
use crate::lattice::{omega, LogicalClass};

/// Two-sided 95% normal quantile.
pub const Z_95: f64 = 1.959_963_984_540_054;

/// Tolerance on the sum of a probability vector.
pub const TOL_PROBABILITY: f64 = 1e-12;

/// Tolerance on `V + iΩ/2 ⪰ 0` and on symplectic eigenvalue pairing.
pub const TOL_UNCERTAINTY: f64 = 1e-10;

/// Symplectic eigenvalues below `½ − TOL_PHYSICAL` are rejected.
pub const TOL_PHYSICAL: f64 = 1e-6;

/// Variance product of the ancilla pure states in the channel dilation.
pub const DILATION_ALPHA: f64 = 0.25;

/// Wilson score interval at 95% for `successes` out of `trials`.
pub fn wilson_interval(successes: u64, trials: u64) -> (f64, f64) {
    if trials == 0 {
        return (0.0, 1.0);
    }
    let n = trials as f64;
    let p = successes as f64 / n;
    let z2 = Z_95 * Z_95;
    let denom = 1.0 + z2 / n;
    let centre = (p + z2 / (2.0 * n)) / denom;
    let half = Z_95 * (p * (1.0 - p) / n + z2 / (4.0 * n * n)).sqrt() / denom;
    ((centre - half).max(0.0), (centre + half).min(1.0))
}

/// `p log₂ p` with `0 log 0 = 0`.
fn plogp(p: f64) -> f64 {
    if p > 0.0 {
        p * p.log2()
    } else {
        0.0
    }
}

/// Shannon entropy in bits.
pub fn shannon_entropy(p: &[f64]) -> f64 {
    -p.iter().map(|&x| plogp(x)).sum::<f64>()
}

/// Single-qubit Pauli channel estimated from logical-class counts.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PauliChannelEstimate {
    /// `(p_I, p_X, p_Y, p_Z)`.
    pub p: [f64; 4],
    pub trials: u64,
    /// Wilson 95% half-widths per component.
    pub ci_radius: [f64; 4],
}

impl PauliChannelEstimate {
    pub fn new(p: [f64; 4], trials: u64, ci_radius: [f64; 4]) -> Result<Self> {
        if p.iter().any(|&x| !x.is_finite() || x < 0.0) {
            return Err(GkpError::InvalidInput(format!(
                "probabilities must be finite and non-negative: {p:?}"
            )));
        }
        let total: f64 = p.iter().sum();
        if (total - 1.0).abs() > TOL_PROBABILITY {
            return Err(GkpError::InvalidInput(format!("probabilities sum to {total}, not 1")));
        }
        Ok(Self { p, trials, ci_radius })
    }

    /// An exact channel with no sampling uncertainty.
    pub fn exact(p: [f64; 4]) -> Result<Self> {
        Self::new(p, 0, [0.0; 4])
    }

    /// Counts in `LogicalClass::ALL` order.
    pub fn from_counts(counts: [u64; 4]) -> Result<Self> {
        let trials: u64 = counts.iter().sum();
        if trials == 0 {
            return Err(GkpError::InvalidInput("no trials".into()));
        }
        let p = counts.map(|c| c as f64 / trials as f64);
        let ci_radius = counts.map(|c| {
            let (lo, hi) = wilson_interval(c, trials);
            (hi - lo) / 2.0
        });
        // Renormalize so the sum is exact to rounding.
        let total: f64 = p.iter().sum();
        Self::new(p.map(|x| x / total), trials, ci_radius)
    }

    pub fn probability(&self, class: LogicalClass) -> f64 {
        self.p[class.index()]
    }

    pub fn fidelity(&self) -> f64 {
        self.p[0]
    }
}

/// `(1 + Σ p log₂ p) / N`.
pub fn hashing_rate(p: &PauliChannelEstimate, n_modes: usize) -> f64 {
    (1.0 - shannon_entropy(&p.p)) / n_modes as f64
}

/// Delta-method standard error of [`hashing_rate`] under multinomial sampling.
pub fn hashing_rate_se(p: &PauliChannelEstimate, n_modes: usize) -> f64 {
    if p.trials == 0 {
        return 0.0;
    }
    let logs = p.p.map(|x| if x > 0.0 { x.log2() } else { 0.0 });
    let mean: f64 = p.p.iter().zip(&logs).map(|(a, b)| a * b).sum();
    let second: f64 = p.p.iter().zip(&logs).map(|(a, b)| a * b * b).sum();
    ((second - mean * mean).max(0.0) / p.trials as f64).sqrt() / n_modes as f64
}

/// Lower and upper bounds on the quantum capacity of the Gaussian
/// random displacement channel, in qubits per mode.
pub fn capacity_bounds(sigma: f64) -> Result<(f64, f64)> {
    if !(sigma > 0.0 && sigma.is_finite()) {
        return Err(GkpError::InvalidParameter(format!(
            "sigma must be positive, got {sigma}"
        )));
    }
    let s2 = sigma * sigma;
    let lower = (-(std::f64::consts::E * s2).log2()).max(0.0);
    let upper = if sigma < 1.0 {
        ((1.0 - s2) / s2).log2().max(0.0)
    } else {
        0.0
    };
    Ok((lower, upper))
}

/// Entropy of a thermal state with mean photon number `n`, in bits.
/// Negative arguments are treated as zero.
pub fn entropy_g(n: f64) -> f64 {
    if n <= 0.0 {
        return 0.0;
    }
    // (n+1)log(n+1) − n log n = log(n+1) + n log(1 + 1/n)
    ((n + 1.0).ln() + n * (1.0 / n).ln_1p()) / std::f64::consts::LN_2
}

fn entropy_g_checked(n: f64) -> Result<f64> {
    if n < -1e-9 || n.is_nan() {
        return Err(GkpError::NumericalFailure(format!("entropy argument {n} is negative")));
    }
    Ok(entropy_g(n))
}

/// A Gaussian state given by its first two moments.
#[derive(Debug, Clone, PartialEq)]
pub struct GaussianState {
    mean: DVector<f64>,
    covariance: DMatrix<f64>,
}

impl GaussianState {
    /// Symmetrizes `covariance` and checks `V + iΩ/2 ⪰ 0`.
    pub fn new(mean: DVector<f64>, covariance: DMatrix<f64>) -> Result<Self> {
        let dim = covariance.nrows();
        if dim == 0 || !dim.is_multiple_of(2) || covariance.ncols() != dim || mean.len() != dim {
            return Err(GkpError::InvalidInput(format!(
                "covariance {}x{} and mean {} must share an even dimension",
                covariance.nrows(),
                covariance.ncols(),
                mean.len()
            )));
        }
        if covariance.iter().chain(mean.iter()).any(|x| !x.is_finite()) {
            return Err(GkpError::InvalidInput("non-finite moments".into()));
        }
        let asym = (&covariance - covariance.transpose()).amax();
        if asym > TOL_UNCERTAINTY * covariance.amax().max(1.0) {
            return Err(GkpError::InvalidInput(format!(
                "covariance is not symmetric (deviation {asym:.3e})"
            )));
        }
        let covariance = (&covariance + covariance.transpose()) * 0.5;
        let om = omega(dim / 2);
        let hermitian = DMatrix::from_fn(dim, dim, |i, j| Complex::new(covariance[(i, j)], 0.5 * om[(i, j)]));
        let min = hermitian.symmetric_eigenvalues().min();
        if min < -TOL_UNCERTAINTY * covariance.amax().max(1.0) {
            return Err(GkpError::InvalidState(format!(
                "covariance violates the uncertainty relation (min eigenvalue {min:.3e})"
            )));
        }
        Ok(Self { mean, covariance })
    }

    /// Zero-mean state.
    pub fn centred(covariance: DMatrix<f64>) -> Result<Self> {
        Self::new(DVector::zeros(covariance.nrows()), covariance)
    }

    /// Thermal state with mean photon number `n_bar` on one mode.
    pub fn thermal(n_bar: f64) -> Result<Self> {
        Self::centred(DMatrix::identity(2, 2) * (n_bar + 0.5))
    }

    pub fn mean(&self) -> &DVector<f64> {
        &self.mean
    }

    pub fn covariance(&self) -> &DMatrix<f64> {
        &self.covariance
    }

    pub fn n_modes(&self) -> usize {
        self.covariance.nrows() / 2
    }

    /// State after the symplectic map `x → S x`.
    pub fn transformed(&self, s: &DMatrix<f64>) -> Result<Self> {
        Self::new(s * &self.mean, s * &self.covariance * s.transpose())
    }

    /// Reduced state on the given modes.
    pub fn reduced(&self, modes: &[usize]) -> Result<Self> {
        let idx: Vec<usize> = modes.iter().flat_map(|&m| [2 * m, 2 * m + 1]).collect();
        if idx.iter().any(|&i| i >= self.covariance.nrows()) {
            return Err(GkpError::InvalidInput(format!("mode out of range: {modes:?}")));
        }
        let k = idx.len();
        Self::new(
            DVector::from_fn(k, |i, _| self.mean[idx[i]]),
            DMatrix::from_fn(k, k, |i, j| self.covariance[(idx[i], idx[j])]),
        )
    }

    /// Symplectic eigenvalues `ν_k`, ascending, from the `±iν_k` spectrum of `ΩV`.
    pub fn symplectic_eigenvalues(&self) -> Result<Vec<f64>> {
        let n = self.n_modes();
        let m = omega(n) * &self.covariance;
        let scale = self.covariance.amax().max(1.0);
        let eig = m.complex_eigenvalues();
        if let Some(bad) = eig.iter().find(|z| z.re.abs() > TOL_UNCERTAINTY * scale) {
            return Err(GkpError::NumericalFailure(format!(
                "ΩV has a non-imaginary eigenvalue {bad}"
            )));
        }
        let mut pos: Vec<f64> = eig.iter().filter(|z| z.im > 0.0).map(|z| z.im).collect();
        let mut neg: Vec<f64> = eig.iter().filter(|z| z.im < 0.0).map(|z| -z.im).collect();
        if pos.len() != n || neg.len() != n {
            return Err(GkpError::NumericalFailure(format!(
                "ΩV spectrum does not pair into ±iν: {eig:?}"
            )));
        }
        pos.sort_by(f64::total_cmp);
        neg.sort_by(f64::total_cmp);
        for (a, b) in pos.iter().zip(&neg) {
            if (a - b).abs() > TOL_UNCERTAINTY * scale {
                return Err(GkpError::NumericalFailure(format!(
                    "unpaired symplectic eigenvalues {a} and {b}"
                )));
            }
        }
        Ok(pos.iter().zip(&neg).map(|(a, b)| 0.5 * (a + b)).collect())
    }
}

/// Von Neumann entropy `Σ_k g(ν_k − ½)` in bits.
pub fn gaussian_entropy(state: &GaussianState) -> Result<f64> {
    let mut total = 0.0;
    for nu in state.symplectic_eigenvalues()? {
        if nu < 0.5 - TOL_PHYSICAL {
            return Err(GkpError::InvalidState(format!("symplectic eigenvalue {nu} below 1/2")));
        }
        total += entropy_g(nu - 0.5);
    }
    Ok(total)
}

/// Symplectic map of the three-mode dilation: first `q1 += q2, p2 −= p1`,
/// then `p1 += p3, q3 −= q1`. Ordering is `(q1, p1, q2, p2, q3, p3)`.
pub fn dilation_symplectic() -> DMatrix<f64> {
    let mut first = DMatrix::identity(6, 6);
    first[(0, 2)] = 1.0;
    first[(3, 1)] = -1.0;
    let mut second = DMatrix::identity(6, 6);
    second[(1, 5)] = 1.0;
    second[(4, 0)] = -1.0;
    second * first
}

/// Input of the dilation: a thermal system mode with a `q`-squeezed and a
/// `p`-squeezed pure ancilla, each of variance `σ²` in the squeezed quadrature.
pub fn dilation_input(n_bar: f64, sigma: f64) -> Result<GaussianState> {
    let s2 = sigma * sigma;
    let diag = [
        n_bar + 0.5,
        n_bar + 0.5,
        s2,
        DILATION_ALPHA / s2,
        DILATION_ALPHA / s2,
        s2,
    ];
    GaussianState::centred(DMatrix::from_diagonal(&DVector::from_row_slice(&diag)))
}

fn check_thermal_args(n_bar: f64, sigma: f64) -> Result<()> {
    if !(n_bar >= 0.0 && n_bar.is_finite()) {
        return Err(GkpError::InvalidParameter(format!(
            "n_bar must be non-negative, got {n_bar}"
        )));
    }
    if !(sigma > 0.0 && sigma.is_finite()) {
        return Err(GkpError::InvalidParameter(format!(
            "sigma must be positive, got {sigma}"
        )));
    }
    Ok(())
}

/// Coherent information of the Gaussian random displacement channel for a
/// thermal input, from the covariance of the dilated three-mode state.
pub fn thermal_coherent_information(n_bar: f64, sigma: f64) -> Result<f64> {
    check_thermal_args(n_bar, sigma)?;
    let out = dilation_input(n_bar, sigma)?.transformed(&dilation_symplectic())?;
    let system = gaussian_entropy(&out.reduced(&[0])?)?;
    let environment = gaussian_entropy(&out.reduced(&[1, 2])?)?;
    Ok(system - environment)
}

/// Closed form of [`thermal_coherent_information`].
pub fn thermal_coherent_information_closed_form(n_bar: f64, sigma: f64) -> Result<f64> {
    check_thermal_args(n_bar, sigma)?;
    let s2 = sigma * sigma;
    let tilde = (4.0 * DILATION_ALPHA + s2 * (2.0 + 4.0 * n_bar + s2)).sqrt();
    Ok(entropy_g_checked(n_bar + s2)?
        - entropy_g_checked((tilde + s2 - 1.0) / 2.0)?
        - entropy_g_checked((tilde - s2 - 1.0) / 2.0)?)
}

/// Von Neumann entropy (bits) of a Hermitian positive semidefinite matrix.
fn density_entropy<const D: usize>(m: nalgebra::SMatrix<Complex<f64>, D, D>) -> Result<f64>
where
    nalgebra::Const<D>: nalgebra::DimSub<nalgebra::U1>,
    nalgebra::DefaultAllocator: nalgebra::allocator::Allocator<nalgebra::DimDiff<nalgebra::Const<D>, nalgebra::U1>>,
{
    let eig = m.symmetric_eigenvalues();
    if let Some(bad) = eig.iter().find(|&&x| x < -TOL_UNCERTAINTY) {
        return Err(GkpError::InvalidInput(format!(
            "matrix is not positive semidefinite (eigenvalue {bad:.3e})"
        )));
    }
    Ok(shannon_entropy(eig.as_slice()))
}

fn check_density(rho: &Matrix2<Complex<f64>>) -> Result<()> {
    if (rho - rho.adjoint()).iter().any(|z| z.norm() > TOL_UNCERTAINTY) {
        return Err(GkpError::InvalidInput("density matrix is not Hermitian".into()));
    }
    if (rho.trace() - Complex::new(1.0, 0.0)).norm() > TOL_PROBABILITY.max(1e-10) {
        return Err(GkpError::InvalidInput(format!(
            "density matrix has trace {}",
            rho.trace()
        )));
    }
    density_entropy(*rho).map(|_| ())
}

/// `(Tr ρX, Tr ρY, Tr ρZ)`.
fn bloch(rho: &Matrix2<Complex<f64>>) -> [f64; 3] {
    [
        2.0 * rho[(0, 1)].re,
        -2.0 * rho[(0, 1)].im,
        (rho[(0, 0)] - rho[(1, 1)]).re,
    ]
}

/// Output of the Pauli channel `Σ_μ p_μ μ ρ μ` with `p` in `(I, X, Y, Z)` order.
pub fn pauli_channel_output(p: &[f64; 4], rho: &Matrix2<Complex<f64>>) -> Matrix2<Complex<f64>> {
    let c = |re: f64, im: f64| Complex::new(re, im);
    let paulis = [
        Matrix2::identity(),
        Matrix2::new(c(0.0, 0.0), c(1.0, 0.0), c(1.0, 0.0), c(0.0, 0.0)),
        Matrix2::new(c(0.0, 0.0), c(0.0, -1.0), c(0.0, 1.0), c(0.0, 0.0)),
        Matrix2::new(c(1.0, 0.0), c(0.0, 0.0), c(0.0, 0.0), c(-1.0, 0.0)),
    ];
    paulis.iter().zip(p).map(|(s, &w)| s * rho * s * Complex::from(w)).sum()
}

/// Environment output of the Pauli channel under the isometry
/// `ρ ↦ Σ_{μν} √(p_μ p_ν) μρν ⊗ |μ⟩⟨ν|`, basis order `(I, X, Y, Z)`.
pub fn pauli_complementary_output(p: &[f64; 4], rho: &Matrix2<Complex<f64>>) -> Matrix4<Complex<f64>> {
    let [x, y, z] = bloch(rho);
    let s = |a: usize, b: usize| (p[a] * p[b]).sqrt();
    let re = |v: f64| Complex::new(v, 0.0);
    let im = |v: f64| Complex::new(0.0, v);
    Matrix4::new(
        re(p[0]),
        re(s(0, 1) * x),
        re(s(0, 2) * y),
        re(s(0, 3) * z),
        re(s(0, 1) * x),
        re(p[1]),
        im(-s(1, 2) * z),
        im(s(1, 3) * y),
        re(s(0, 2) * y),
        im(s(1, 2) * z),
        re(p[2]),
        im(-s(2, 3) * x),
        re(s(0, 3) * z),
        im(-s(1, 3) * y),
        im(s(2, 3) * x),
        re(p[3]),
    )
}

fn check_probabilities(p: &[f64; 4]) -> Result<()> {
    PauliChannelEstimate::exact(*p).map(|_| ())
}

/// Entropy (bits) of the complementary Pauli-channel output.
pub fn pauli_complementary_entropy(p: &[f64; 4], rho: &Matrix2<Complex<f64>>) -> Result<f64> {
    check_probabilities(p)?;
    check_density(rho)?;
    density_entropy(pauli_complementary_output(p, rho))
}

/// Coherent information (bits) of the Pauli channel for input `ρ`.
pub fn pauli_coherent_information(p: &[f64; 4], rho: &Matrix2<Complex<f64>>) -> Result<f64> {
    check_probabilities(p)?;
    check_density(rho)?;
    Ok(density_entropy(pauli_channel_output(p, rho))? - pauli_complementary_entropy(p, rho)?)
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::E;

    fn maximally_mixed() -> Matrix2<Complex<f64>> {
        Matrix2::identity() * Complex::from(0.5)
    }

    #[test]
    fn hashing_rate_anchors() {
        let noiseless = PauliChannelEstimate::exact([1.0, 0.0, 0.0, 0.0]).unwrap();
        assert!((hashing_rate(&noiseless, 5) - 0.2).abs() < 1e-15);
        let uniform = PauliChannelEstimate::exact([0.25; 4]).unwrap();
        assert!((hashing_rate(&uniform, 1) + 1.0).abs() < 1e-15);
        let p = PauliChannelEstimate::exact([0.9, 0.05, 0.03, 0.02]).unwrap();
        // 1 + Σ p log2 p evaluated in 30-digit arithmetic.
        let expected = (1.0 - 0.617_543_123_312_014_7) / 9.0;
        assert!(
            (hashing_rate(&p, 9) - expected).abs() < 1e-15,
            "{}",
            hashing_rate(&p, 9)
        );
    }

    #[test]
    fn probabilities_are_validated() {
        assert!(PauliChannelEstimate::exact([0.5, 0.5, 0.1, 0.0]).is_err());
        assert!(PauliChannelEstimate::exact([1.1, -0.1, 0.0, 0.0]).is_err());
        let est = PauliChannelEstimate::from_counts([97, 1, 1, 1]).unwrap();
        assert_eq!(est.trials, 100);
        assert!((est.fidelity() - 0.97).abs() < 1e-15);
        assert!(est.ci_radius.iter().all(|&r| r > 0.0 && r < 0.1));
    }

    #[test]
    fn wilson_matches_reference_values() {
        // Closed-form Wilson bounds for 7/20.
        let (lo, hi) = wilson_interval(7, 20);
        assert!(
            (lo - 0.181_191_824).abs() < 1e-8 && (hi - 0.567_145_723).abs() < 1e-8,
            "{lo} {hi}"
        );
        let (lo, hi) = wilson_interval(0, 10);
        assert_eq!(lo, 0.0);
        assert!(hi > 0.0 && hi < 0.35);
    }

    #[test]
    fn capacity_bound_anchors() {
        let (lower, _) = capacity_bounds(1.0 / (2.0 * E).sqrt()).unwrap();
        assert!((lower - 1.0).abs() < 1e-12);
        let (lower, _) = capacity_bounds(1.0 / E.sqrt()).unwrap();
        assert!(lower.abs() < 1e-12);
        let (_, upper) = capacity_bounds(1.0 / 2f64.sqrt()).unwrap();
        assert!(upper.abs() < 1e-12);
        assert_eq!(capacity_bounds(1.5).unwrap(), (0.0, 0.0));
        assert!(capacity_bounds(0.0).is_err());
    }

    #[test]
    fn entropy_g_values() {
        assert_eq!(entropy_g(0.0), 0.0);
        assert!((entropy_g(1.0) - 2.0).abs() < 1e-15);
        let n = 1e6;
        assert!((entropy_g(n) - (E * n).log2()).abs() < 1e-5);
    }

    #[test]
    fn thermal_entropy_and_additivity() {
        for n in [0.0, 0.3, 2.0, 50.0] {
            let s = gaussian_entropy(&GaussianState::thermal(n).unwrap()).unwrap();
            assert!((s - entropy_g(n)).abs() < 1e-10);
        }
        let mut v = DMatrix::zeros(4, 4);
        v[(0, 0)] = 1.5;
        v[(1, 1)] = 1.5;
        v[(2, 2)] = 3.0;
        v[(3, 3)] = 3.0;
        let s = gaussian_entropy(&GaussianState::centred(v).unwrap()).unwrap();
        assert!((s - entropy_g(1.0) - entropy_g(2.5)).abs() < 1e-10);
    }

    #[test]
    fn squeezed_vacuum_is_pure() {
        let v = DMatrix::from_diagonal(&DVector::from_row_slice(&[0.5 * 4.0, 0.5 / 4.0]));
        let s = gaussian_entropy(&GaussianState::centred(v).unwrap()).unwrap();
        assert!(s.abs() < 1e-10);
    }

    #[test]
    fn unphysical_covariance_rejected() {
        let v = DMatrix::identity(2, 2) * 0.3;
        assert!(matches!(GaussianState::centred(v), Err(GkpError::InvalidState(_))));
        let mut v = DMatrix::identity(2, 2);
        v[(0, 1)] = 0.2;
        assert!(GaussianState::centred(v).is_err());
    }

    #[test]
    fn dilation_is_symplectic_and_reproduces_the_channel() {
        let s = dilation_symplectic();
        let om = omega(3);
        assert!((&s * &om * s.transpose() - &om).amax() < 1e-15);
        let (n_bar, sigma) = (0.7, 0.45);
        let out = dilation_input(n_bar, sigma).unwrap().transformed(&s).unwrap();
        let system = out.reduced(&[0]).unwrap();
        let expected = DMatrix::identity(2, 2) * (n_bar + 0.5 + sigma * sigma);
        assert!((system.covariance() - expected).amax() < 1e-14);
    }

    #[test]
    fn thermal_coherent_information_routes_agree() {
        for &n_bar in &[0.0, 0.5, 1.0, 10.0, 1e3, 1e4] {
            for &sigma in &[0.2, 0.4, 0.5, 0.6, 0.9] {
                let a = thermal_coherent_information(n_bar, sigma).unwrap();
                let b = thermal_coherent_information_closed_form(n_bar, sigma).unwrap();
                assert!((a - b).abs() < 1e-9, "n̄={n_bar} σ={sigma}: {a} vs {b}");
            }
        }
    }

    #[test]
    fn thermal_coherent_information_approaches_lower_bound() {
        let limit = -(E * 0.25).log2();
        let v = thermal_coherent_information(1e4, 0.5).unwrap();
        assert!((v - limit).abs() < 1e-3);
        assert!(v < limit);
        let a = thermal_coherent_information(10.0, 0.5).unwrap();
        let b = thermal_coherent_information(100.0, 0.5).unwrap();
        let c = thermal_coherent_information(1000.0, 0.5).unwrap();
        assert!(a < b && b < c);
    }

    #[test]
    fn complementary_output_of_maximally_mixed_input_is_diagonal() {
        let p = [0.7, 0.1, 0.15, 0.05];
        let m = pauli_complementary_output(&p, &maximally_mixed());
        for i in 0..4 {
            for j in 0..4 {
                let expected = if i == j { p[i] } else { 0.0 };
                assert!((m[(i, j)] - Complex::from(expected)).norm() < 1e-15);
            }
        }
        let s = pauli_complementary_entropy(&p, &maximally_mixed()).unwrap();
        assert!((s - shannon_entropy(&p)).abs() < 1e-12);
    }

    #[test]
    fn noiseless_complementary_output_is_pure() {
        let c = Complex::new;
        let rho = Matrix2::new(c(0.6, 0.0), c(0.2, -0.3), c(0.2, 0.3), c(0.4, 0.0));
        let s = pauli_complementary_entropy(&[1.0, 0.0, 0.0, 0.0], &rho).unwrap();
        assert!(s.abs() < 1e-12);
    }

    #[test]
    fn complementary_output_of_pure_input_matches_channel_output_entropy() {
        // For a pure input the isometry output is pure, so both marginals share entropy.
        let c = Complex::new;
        let (a, b) = (0.8f64.sqrt(), c(0.2f64.sqrt() * 0.6, 0.2f64.sqrt() * 0.8));
        let rho = Matrix2::new(c(a * a, 0.0), b.conj() * a, b * a, c(b.norm_sqr(), 0.0));
        let p = [0.6, 0.2, 0.12, 0.08];
        let env = pauli_complementary_entropy(&p, &rho).unwrap();
        let sys = density_entropy(pauli_channel_output(&p, &rho)).unwrap();
        assert!((env - sys).abs() < 1e-10, "{env} vs {sys}");
    }

    #[test]
    fn maximally_mixed_input_gives_hashing_numerator() {
        let p = [0.55, 0.2, 0.15, 0.1];
        let ic = pauli_coherent_information(&p, &maximally_mixed()).unwrap();
        let est = PauliChannelEstimate::exact(p).unwrap();
        assert!((ic - hashing_rate(&est, 1)).abs() < 1e-12);
    }

    #[test]
    fn invalid_density_rejected() {
        let rho = Matrix2::identity() * Complex::from(0.7);
        assert!(pauli_complementary_entropy(&[1.0, 0.0, 0.0, 0.0], &rho).is_err());
    }
}
