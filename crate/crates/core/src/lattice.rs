//! Quadrature-space primitives shared by every code family.
//!
//! Shift vectors are ordered `(q1, p1, q2, p2, ...)` with `ħ = 1`. A local Pauli
//! label on a single mode is the binary pair `(x, z)`; it corresponds to the
//! displacement `√π · S · (x, z)ᵀ` where `S` is the inner-code symplectic
//! matrix. Everything multi-mode is built by stacking that frame per mode.

use std::f64::consts::PI;
use std::fmt;
use std::str::FromStr;

use nalgebra::{DMatrix, Matrix2, Vector2};
use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::codes::GkpCodeLayout;
use crate::error::{GkpError, Result};

/// Absolute tolerance on frame coordinates when testing lattice membership.
pub const TOL_LATTICE: f64 = 1e-9;

/// Tolerance for `S Ω Sᵀ = Ω`.
pub const TOL_SYMPLECTIC: f64 = 1e-12;

pub(crate) const SQRT_PI: f64 = 1.772_453_850_905_516;

/// Real vector of quadrature shifts, length `2N`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "Vec<f64>", into = "Vec<f64>")]
pub struct ShiftVector(Vec<f64>);

impl ShiftVector {
    pub fn new(components: Vec<f64>) -> Result<Self> {
        if components.is_empty() || !components.len().is_multiple_of(2) {
            return Err(GkpError::InvalidInput(format!(
                "shift vector length must be a positive even number, got {}",
                components.len()
            )));
        }
        if let Some(i) = components.iter().position(|c| !c.is_finite()) {
            return Err(GkpError::InvalidInput(format!("shift component {i} is not finite")));
        }
        Ok(Self(components))
    }

    pub fn zeros(n_modes: usize) -> Self {
        Self(vec![0.0; 2 * n_modes])
    }

    pub fn n_modes(&self) -> usize {
        self.0.len() / 2
    }

    pub fn dim(&self) -> usize {
        self.0.len()
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.0
    }

    pub fn mode(&self, i: usize) -> Vector2<f64> {
        Vector2::new(self.0[2 * i], self.0[2 * i + 1])
    }

    pub fn norm_squared(&self) -> f64 {
        self.0.iter().map(|x| x * x).sum()
    }

    pub fn add(&self, other: &Self) -> Result<Self> {
        self.check_same_dim(other)?;
        Ok(Self(self.0.iter().zip(&other.0).map(|(a, b)| a + b).collect()))
    }

    pub fn sub(&self, other: &Self) -> Result<Self> {
        self.check_same_dim(other)?;
        Ok(Self(self.0.iter().zip(&other.0).map(|(a, b)| a - b).collect()))
    }

    pub fn scale(&self, factor: f64) -> Self {
        Self(self.0.iter().map(|x| x * factor).collect())
    }

    /// `selfᵀ Ω other` with the block-diagonal form `Ω = ⊕ [[0, 1], [-1, 0]]`.
    pub fn symplectic_product(&self, other: &Self) -> Result<f64> {
        self.check_same_dim(other)?;
        Ok(self
            .0
            .chunks_exact(2)
            .zip(other.0.chunks_exact(2))
            .map(|(a, b)| a[0] * b[1] - a[1] * b[0])
            .sum())
    }

    fn check_same_dim(&self, other: &Self) -> Result<()> {
        if self.0.len() != other.0.len() {
            return Err(GkpError::InvalidInput(format!(
                "dimension mismatch: {} vs {}",
                self.0.len(),
                other.0.len()
            )));
        }
        Ok(())
    }
}

impl TryFrom<Vec<f64>> for ShiftVector {
    type Error = GkpError;
    fn try_from(v: Vec<f64>) -> Result<Self> {
        Self::new(v)
    }
}

impl From<ShiftVector> for Vec<f64> {
    fn from(v: ShiftVector) -> Self {
        v.0
    }
}

/// Block-diagonal symplectic form on `n_modes` modes.
pub fn omega(n_modes: usize) -> DMatrix<f64> {
    let mut m = DMatrix::zeros(2 * n_modes, 2 * n_modes);
    for i in 0..n_modes {
        m[(2 * i, 2 * i + 1)] = 1.0;
        m[(2 * i + 1, 2 * i)] = -1.0;
    }
    m
}

/// A real symplectic matrix, validated on construction.
#[derive(Debug, Clone, PartialEq)]
pub struct SymplecticMatrix(DMatrix<f64>);

impl SymplecticMatrix {
    pub fn new(m: DMatrix<f64>) -> Result<Self> {
        if m.nrows() != m.ncols() || m.nrows() == 0 || !m.nrows().is_multiple_of(2) {
            return Err(GkpError::InvalidInput(format!(
                "symplectic matrix must be square with even dimension, got {}x{}",
                m.nrows(),
                m.ncols()
            )));
        }
        let deviation = symplectic_deviation(&m);
        if deviation >= TOL_SYMPLECTIC {
            return Err(GkpError::InvalidInput(format!(
                "matrix is not symplectic: max |SΩSᵀ - Ω| = {deviation:.3e}"
            )));
        }
        Ok(Self(m))
    }

    pub fn identity(n_modes: usize) -> Self {
        Self(DMatrix::identity(2 * n_modes, 2 * n_modes))
    }

    pub fn from_matrix2(m: Matrix2<f64>) -> Result<Self> {
        Self::new(DMatrix::from_iterator(2, 2, m.iter().copied()))
    }

    pub fn matrix(&self) -> &DMatrix<f64> {
        &self.0
    }

    pub fn n_modes(&self) -> usize {
        self.0.nrows() / 2
    }

    /// The top-left 2×2 block; the whole matrix for an inner code.
    pub fn matrix2(&self) -> Matrix2<f64> {
        Matrix2::new(self.0[(0, 0)], self.0[(0, 1)], self.0[(1, 0)], self.0[(1, 1)])
    }

    /// `S⁻¹ = Ωᵀ Sᵀ Ω`.
    pub fn inverse(&self) -> DMatrix<f64> {
        let om = omega(self.n_modes());
        om.transpose() * self.0.transpose() * om
    }

    pub fn is_identity(&self) -> bool {
        let n = self.0.nrows();
        self.0 == DMatrix::<f64>::identity(n, n)
    }

    /// `max |S Ω Sᵀ − Ω|`.
    pub fn deviation(&self) -> f64 {
        symplectic_deviation(&self.0)
    }
}

fn symplectic_deviation(m: &DMatrix<f64>) -> f64 {
    let om = omega(m.nrows() / 2);
    (m * &om * m.transpose() - om).amax()
}

/// Coset label of a dual-lattice vector modulo the stabilizer lattice.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum LogicalClass {
    I,
    X,
    Y,
    Z,
}

impl LogicalClass {
    /// Array order used by coset-weight and count vectors.
    pub const ALL: [LogicalClass; 4] = [Self::I, Self::X, Self::Y, Self::Z];

    /// Fixed preference order for breaking exact ties.
    pub const TIE_ORDER: [LogicalClass; 4] = [Self::I, Self::X, Self::Z, Self::Y];

    pub fn index(self) -> usize {
        match self {
            Self::I => 0,
            Self::X => 1,
            Self::Y => 2,
            Self::Z => 3,
        }
    }

    pub fn from_bits(x: bool, z: bool) -> Self {
        match (x, z) {
            (false, false) => Self::I,
            (true, false) => Self::X,
            (false, true) => Self::Z,
            (true, true) => Self::Y,
        }
    }

    /// `(x, z)` components.
    pub fn bits(self) -> (bool, bool) {
        match self {
            Self::I => (false, false),
            Self::X => (true, false),
            Self::Z => (false, true),
            Self::Y => (true, true),
        }
    }

    /// Local Pauli label (`x + 2z`).
    pub fn label(self) -> u8 {
        let (x, z) = self.bits();
        x as u8 | (z as u8) << 1
    }

    pub fn from_label(label: u8) -> Self {
        Self::from_bits(label & 1 == 1, label & 2 == 2)
    }
}

impl fmt::Display for LogicalClass {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let c = match self {
            Self::I => "I",
            Self::X => "X",
            Self::Y => "Y",
            Self::Z => "Z",
        };
        f.write_str(c)
    }
}

/// Klein four-group product.
pub fn compose(a: LogicalClass, b: LogicalClass) -> LogicalClass {
    LogicalClass::from_label(a.label() ^ b.label())
}

/// A Pauli string on the outer-code qubits stored as per-qubit labels
/// (`0 = I, 1 = X, 2 = Z, 3 = Y`), so that group multiplication is XOR.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct PauliString(Vec<u8>);

impl PauliString {
    pub fn identity(n: usize) -> Self {
        Self(vec![0; n])
    }

    pub fn from_labels(labels: Vec<u8>) -> Self {
        debug_assert!(labels.iter().all(|&l| l < 4));
        Self(labels)
    }

    /// Pauli `kind` (a single label) on each qubit of `support`.
    pub fn on_support(n: usize, support: &[usize], kind: u8) -> Self {
        let mut labels = vec![0; n];
        for &i in support {
            labels[i] = kind;
        }
        Self(labels)
    }

    pub fn labels(&self) -> &[u8] {
        &self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn support(&self) -> Vec<usize> {
        (0..self.0.len()).filter(|&i| self.0[i] != 0).collect()
    }

    pub fn weight(&self) -> usize {
        self.0.iter().filter(|&&l| l != 0).count()
    }

    pub fn mul(&self, other: &Self) -> Self {
        Self(self.0.iter().zip(&other.0).map(|(a, b)| a ^ b).collect())
    }

    pub fn mul_assign(&mut self, other: &Self) {
        for (a, b) in self.0.iter_mut().zip(&other.0) {
            *a ^= b;
        }
    }

    /// True when the two strings anticommute.
    pub fn anticommutes(&self, other: &Self) -> bool {
        self.0
            .iter()
            .zip(&other.0)
            .fold(0u8, |acc, (&a, &b)| acc ^ ((a & 1) & (b >> 1)) ^ ((a >> 1) & (b & 1)))
            == 1
    }

    /// The string with X and Z exchanged on every qubit.
    pub fn hadamard_conjugate(&self) -> Self {
        Self(self.0.iter().map(|&l| (l & 1) << 1 | (l >> 1)).collect())
    }

    pub fn permuted(&self, perm: &[usize]) -> Self {
        let mut out = vec![0; self.0.len()];
        for (i, &l) in self.0.iter().enumerate() {
            out[perm[i]] = l;
        }
        Self(out)
    }
}

impl fmt::Display for PauliString {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for &l in &self.0 {
            let c = match l {
                0 => 'I',
                1 => 'X',
                2 => 'Z',
                _ => 'Y',
            };
            write!(f, "{c}")?;
        }
        Ok(())
    }
}

impl FromStr for PauliString {
    type Err = GkpError;
    fn from_str(s: &str) -> Result<Self> {
        s.chars()
            .map(|c| match c {
                'I' => Ok(0),
                'X' => Ok(1),
                'Z' => Ok(2),
                'Y' => Ok(3),
                other => Err(GkpError::InvalidInput(format!("bad Pauli character {other:?}"))),
            })
            .collect::<Result<Vec<u8>>>()
            .map(Self)
    }
}

impl Serialize for PauliString {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        s.serialize_str(&self.to_string())
    }
}

impl<'de> Deserialize<'de> for PauliString {
    fn deserialize<D: Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let s = String::deserialize(d)?;
        s.parse().map_err(serde::de::Error::custom)
    }
}

/// Standard deviation of the i.i.d. quadrature noise.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GaussianNoiseModel {
    sigma: f64,
}

impl GaussianNoiseModel {
    pub fn new(sigma: f64) -> Result<Self> {
        if !(sigma > 0.0 && sigma.is_finite()) {
            return Err(GkpError::InvalidParameter(format!(
                "sigma must be positive and finite, got {sigma}"
            )));
        }
        Ok(Self { sigma })
    }

    pub fn sigma(&self) -> f64 {
        self.sigma
    }

    pub fn log_density(&self, xi: &ShiftVector) -> f64 {
        log_density_unchecked(xi.as_slice(), self.sigma)
    }
}

/// Natural-log density of the `2N`-dimensional isotropic Gaussian.
pub fn log_gaussian_density(xi: &ShiftVector, sigma: f64) -> Result<f64> {
    let model = GaussianNoiseModel::new(sigma)?;
    if xi.as_slice().iter().any(|c| !c.is_finite()) {
        return Err(GkpError::InvalidInput("non-finite shift component".into()));
    }
    Ok(model.log_density(xi))
}

fn log_density_unchecked(xi: &[f64], sigma: f64) -> f64 {
    let var = sigma * sigma;
    let norm2: f64 = xi.iter().map(|x| x * x).sum();
    -norm2 / (2.0 * var) - 0.5 * xi.len() as f64 * (2.0 * PI * var).ln()
}

/// Maps quadrature shifts into per-mode Pauli-frame coordinates: the inverse
/// of `v = √π (⊕ S) w`.
pub(crate) fn to_frame(v: &[f64], inner: &Matrix2<f64>) -> Vec<f64> {
    let inv = inner.try_inverse().expect("inner symplectic matrix is invertible");
    let mut out = Vec::with_capacity(v.len());
    for pair in v.chunks_exact(2) {
        let w = inv * Vector2::new(pair[0], pair[1]) / SQRT_PI;
        out.push(w[0]);
        out.push(w[1]);
    }
    out
}

pub(crate) fn from_frame(w: &[f64], inner: &Matrix2<f64>) -> Vec<f64> {
    let mut out = Vec::with_capacity(w.len());
    for pair in w.chunks_exact(2) {
        let v = inner * Vector2::new(pair[0], pair[1]) * SQRT_PI;
        out.push(v[0]);
        out.push(v[1]);
    }
    out
}

/// Quadrature displacement of a Pauli string under the layout's inner code.
pub fn pauli_displacement(p: &PauliString, layout: &GkpCodeLayout) -> ShiftVector {
    let inner = layout.inner_symplectic().matrix2();
    let frame: Vec<f64> = p
        .labels()
        .iter()
        .flat_map(|&l| [(l & 1) as f64, (l >> 1) as f64])
        .collect();
    ShiftVector(from_frame(&frame, &inner))
}

/// Rounds frame coordinates to integers and returns the Pauli string of their
/// parities, failing when any coordinate is further than `TOL_LATTICE` from an
/// integer.
pub(crate) fn frame_parities(frame: &[f64]) -> Result<PauliString> {
    let mut deviation: f64 = 0.0;
    let labels = frame
        .chunks_exact(2)
        .map(|w| {
            let mq = w[0].round();
            let mp = w[1].round();
            deviation = deviation.max((w[0] - mq).abs()).max((w[1] - mp).abs());
            (mq.rem_euclid(2.0) as u8) | (mp.rem_euclid(2.0) as u8) << 1
        })
        .collect();
    if deviation > TOL_LATTICE {
        return Err(GkpError::NotInDualLattice { deviation });
    }
    Ok(PauliString(labels))
}

/// Coset of a dual-lattice vector in `√(2π)(Λ⊥/Λ)`.
///
/// The X component is set iff `⟨v, Ω l_Z⟩/π` is odd and the Z component iff
/// `⟨v, Ω l_X⟩/π` is odd, where `l_X`, `l_Z` are the layout's logical
/// representatives in quadrature units.
pub fn logical_class_of(v: &ShiftVector, layout: &GkpCodeLayout) -> Result<LogicalClass> {
    if v.n_modes() != layout.n_modes() {
        return Err(GkpError::InvalidInput(format!(
            "vector has {} modes, layout has {}",
            v.n_modes(),
            layout.n_modes()
        )));
    }
    let inner = layout.inner_symplectic().matrix2();
    let parities = frame_parities(&to_frame(v.as_slice(), &inner))?;
    if layout.stabilizer_generators().iter().any(|g| g.anticommutes(&parities)) {
        return Err(GkpError::NotInDualLattice { deviation: 1.0 });
    }
    let odd = |l: &PauliString| -> Result<bool> {
        let prod = v.symplectic_product(&pauli_displacement(l, layout))? / PI;
        Ok((prod.round() as i64).rem_euclid(2) == 1)
    };
    Ok(LogicalClass::from_bits(
        odd(layout.logical_z())?,
        odd(layout.logical_x())?,
    ))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn log_density_of_zero_vector() {
        let xi = ShiftVector::zeros(1);
        let v = log_gaussian_density(&xi, 1.0).unwrap();
        assert!((v + (2.0 * PI).ln()).abs() < 1e-15);
    }

    #[test]
    fn log_density_of_unit_component() {
        let xi = ShiftVector::new(vec![1.0, 0.0]).unwrap();
        let v = log_gaussian_density(&xi, 1.0).unwrap();
        assert!((v - (-0.5 - (2.0 * PI).ln())).abs() < 1e-15);
    }

    #[test]
    fn log_density_cross_check() {
        // -(0.09 + 0.16)/(2 * 0.25) - ln(2π * 0.25), evaluated with mpmath at 30 digits.
        let expected = -0.5 - 0.451_582_705_289_454_9;
        let xi = ShiftVector::new(vec![0.3, -0.4]).unwrap();
        let v = log_gaussian_density(&xi, 0.5).unwrap();
        assert!((v - expected).abs() < 1e-14, "{v} vs {expected}");
    }

    #[test]
    fn log_density_rejects_bad_sigma() {
        let xi = ShiftVector::zeros(1);
        assert!(log_gaussian_density(&xi, 0.0).is_err());
        assert!(log_gaussian_density(&xi, -1.0).is_err());
    }

    #[test]
    fn shift_vector_validation() {
        assert!(ShiftVector::new(vec![1.0]).is_err());
        assert!(ShiftVector::new(vec![]).is_err());
        assert!(ShiftVector::new(vec![1.0, f64::NAN]).is_err());
    }

    #[test]
    fn klein_group_products() {
        use LogicalClass::*;
        assert_eq!(compose(I, X), X);
        assert_eq!(compose(X, Z), Y);
        assert_eq!(compose(Y, Y), I);
        for a in LogicalClass::ALL {
            assert_eq!(compose(a, a), I);
            for b in LogicalClass::ALL {
                assert_eq!(compose(a, b), compose(b, a));
            }
        }
    }

    #[test]
    fn symplectic_validation() {
        let bad = DMatrix::from_row_slice(2, 2, &[2.0, 0.0, 0.0, 1.0]);
        assert!(SymplecticMatrix::new(bad).is_err());
        let ok = DMatrix::from_row_slice(2, 2, &[2.0, 0.0, 0.0, 0.5]);
        let s = SymplecticMatrix::new(ok).unwrap();
        let inv = s.inverse();
        assert!((s.matrix() * inv - DMatrix::<f64>::identity(2, 2)).amax() < 1e-15);
    }

    #[test]
    fn pauli_string_parse_and_commutation() {
        let a: PauliString = "IXZZX".parse().unwrap();
        let b: PauliString = "XIXZZ".parse().unwrap();
        assert!(!a.anticommutes(&b));
        let x: PauliString = "XXXXX".parse().unwrap();
        let z: PauliString = "ZZZZZ".parse().unwrap();
        assert!(x.anticommutes(&z));
        assert_eq!(a.to_string(), "IXZZX");
        assert_eq!(a.mul(&b).to_string(), "XXYIY");
    }
}
