//! Constructors for the concatenated GKP code families.
//!
//! Every layout is one logical qubit: an outer stabilizer code on `N` qubits
//! whose qubits are single-mode GKP codes with a common inner symplectic
//! matrix (identity for square, [`hexagonal_inner_symplectic`] for hexagonal).
//!
//! Geometry conventions:
//!
//! * Rotated surface code: qubit `(a, b)` of the `d × d` grid has index
//!   `a·d + b`. Weight-two X checks sit on the left and right columns, so the
//!   logical X is the top row and the logical Z the left column.
//! * Triangular 6.6.6 color code: sites `(r, c)` of a triangular lattice with
//!   `r, c ≥ 0` and `r + c ≤ 3(d−1)/2`, neighbours `±(1,0), ±(0,1), ±(1,−1)`.
//!   Sites with `(r − c) mod 3 = 1` are faces, every other site is a qubit;
//!   qubits are indexed in lexicographic `(r, c)` order. Both logicals act on
//!   the `c = 0` boundary.

use std::fmt;
use std::str::FromStr;

use nalgebra::Matrix2;
use serde::{Deserialize, Serialize};

use crate::error::{GkpError, Result};
use crate::f2;
use crate::lattice::{PauliString, SymplecticMatrix};

/// Largest distance accepted by the constructors.
pub const MAX_DISTANCE: usize = 63;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Family {
    SquareSingle,
    HexSingle,
    SurfaceSquare,
    ColorSquare,
    ColorHex,
    #[serde(rename = "513-hex")]
    FiveOneThreeHex,
}

impl Family {
    pub const ALL: [Family; 6] = [
        Family::SquareSingle,
        Family::HexSingle,
        Family::SurfaceSquare,
        Family::ColorSquare,
        Family::ColorHex,
        Family::FiveOneThreeHex,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Family::SquareSingle => "square",
            Family::HexSingle => "hex",
            Family::SurfaceSquare => "surface-square",
            Family::ColorSquare => "color-square",
            Family::ColorHex => "color-hex",
            Family::FiveOneThreeHex => "513-hex",
        }
    }

    pub fn is_hexagonal(self) -> bool {
        matches!(self, Family::HexSingle | Family::ColorHex | Family::FiveOneThreeHex)
    }

    /// Mode count at distance `d`.
    pub fn n_modes(self, d: usize) -> usize {
        match self {
            Family::SquareSingle | Family::HexSingle => 1,
            Family::SurfaceSquare => d * d,
            Family::ColorSquare | Family::ColorHex => (3 * d * d + 1) / 4,
            Family::FiveOneThreeHex => 5,
        }
    }
}

impl fmt::Display for Family {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Family {
    type Err = GkpError;
    fn from_str(s: &str) -> Result<Self> {
        Family::ALL
            .into_iter()
            .find(|f| f.name() == s)
            .ok_or_else(|| GkpError::InvalidParameter(format!("unknown code family {s:?}")))
    }
}

/// 2×2 symplectic matrix of the hexagonal GKP code.
///
/// The symmetric square root of the Gram matrix `(2/√3)·[[1, ½], [½, 1]]`:
/// `S` has unit determinant and `S·Z²` (equivalently `Sᵀ·Z²`) is the
/// hexagonal lattice with minimum distance `(2/√3)^{1/2}`.
pub fn hexagonal_inner_symplectic() -> SymplecticMatrix {
    let k = (2.0 / 3f64.sqrt()).sqrt();
    let alpha = k * 1.5f64.sqrt();
    let beta = k * 0.5f64.sqrt();
    let m = Matrix2::new(
        0.5 * (alpha + beta),
        0.5 * (alpha - beta),
        0.5 * (alpha - beta),
        0.5 * (alpha + beta),
    );
    SymplecticMatrix::from_matrix2(m).expect("hexagonal matrix is symplectic")
}

/// A validated concatenated GKP code.
#[derive(Debug, Clone)]
pub struct GkpCodeLayout {
    family: Family,
    distance: usize,
    inner: SymplecticMatrix,
    generators: Vec<PauliString>,
    logical_x: PauliString,
    logical_z: PauliString,
    index_map: Vec<usize>,
    coords: Vec<(i32, i32)>,
    face_coords: Vec<(i32, i32)>,
    pure_errors: Vec<PauliString>,
}

impl GkpCodeLayout {
    pub fn family(&self) -> Family {
        self.family
    }

    pub fn distance(&self) -> usize {
        self.distance
    }

    pub fn n_modes(&self) -> usize {
        self.logical_x.len()
    }

    pub fn inner_symplectic(&self) -> &SymplecticMatrix {
        &self.inner
    }

    pub fn stabilizer_generators(&self) -> &[PauliString] {
        &self.generators
    }

    pub fn logical_x(&self) -> &PauliString {
        &self.logical_x
    }

    pub fn logical_z(&self) -> &PauliString {
        &self.logical_z
    }

    /// Pauli representative of a logical class.
    pub fn logical(&self, class: crate::lattice::LogicalClass) -> PauliString {
        let (x, z) = class.bits();
        let mut p = PauliString::identity(self.n_modes());
        if x {
            p.mul_assign(&self.logical_x);
        }
        if z {
            p.mul_assign(&self.logical_z);
        }
        p
    }

    /// Outer-code qubit → mode index.
    pub fn index_map(&self) -> &[usize] {
        &self.index_map
    }

    /// Geometric position of each qubit (grid or triangular-lattice coordinates).
    pub fn coords(&self) -> &[(i32, i32)] {
        &self.coords
    }

    /// Triangular-lattice position of each color-code face, in generator order.
    pub fn face_coords(&self) -> &[(i32, i32)] {
        &self.face_coords
    }

    /// `pure_errors()[j]` anticommutes with generator `j` only.
    pub fn pure_errors(&self) -> &[PauliString] {
        &self.pure_errors
    }

    /// Supports of generators made only of X.
    pub fn x_stabilizers(&self) -> Vec<Vec<usize>> {
        self.supports_of_kind(1)
    }

    /// Supports of generators made only of Z.
    pub fn z_stabilizers(&self) -> Vec<Vec<usize>> {
        self.supports_of_kind(2)
    }

    fn supports_of_kind(&self, kind: u8) -> Vec<Vec<usize>> {
        self.generators
            .iter()
            .filter(|g| g.labels().iter().all(|&l| l == 0 || l == kind))
            .map(PauliString::support)
            .collect()
    }

    /// Every generator is pure X or pure Z.
    pub fn is_css(&self) -> bool {
        self.x_stabilizers().len() + self.z_stabilizers().len() == self.generators.len()
    }

    /// Binary syndrome of a Pauli error.
    pub fn syndrome(&self, error: &PauliString) -> Vec<bool> {
        self.generators.iter().map(|g| g.anticommutes(error)).collect()
    }

    /// Checks every structural invariant of a one-logical-qubit stabilizer code.
    pub fn validate(&self) -> Result<()> {
        let n = self.n_modes();
        let fail = |msg: String| Err(GkpError::InvalidParameter(msg));
        if self.inner.deviation() >= crate::lattice::TOL_SYMPLECTIC {
            return fail("inner matrix is not symplectic".into());
        }
        if self.family.n_modes(self.distance) != n {
            return fail(format!("mode count {n} does not match family formula"));
        }
        if self.generators.len() + 1 != n {
            return fail(format!(
                "expected {} generators, found {}",
                n - 1,
                self.generators.len()
            ));
        }
        for (i, a) in self.generators.iter().enumerate() {
            if a.len() != n {
                return fail(format!("generator {i} has wrong length"));
            }
            for b in &self.generators[i + 1..] {
                if a.anticommutes(b) {
                    return fail(format!("generators {a} and {b} anticommute"));
                }
            }
            if a.anticommutes(&self.logical_x) || a.anticommutes(&self.logical_z) {
                return fail(format!("generator {a} anticommutes with a logical"));
            }
        }
        if !self.logical_x.anticommutes(&self.logical_z) {
            return fail("logical X and Z commute".into());
        }
        let rows: Vec<_> = self.generators.iter().map(f2::pauli_to_row).collect();
        if f2::rank(&rows) != self.generators.len() {
            return fail("generators are not independent".into());
        }
        if self.index_map.len() != n || self.coords.len() != n {
            return fail("index map or coordinates have wrong length".into());
        }
        Ok(())
    }

    #[allow(clippy::too_many_arguments)]
    fn assemble(
        family: Family,
        distance: usize,
        inner: SymplecticMatrix,
        generators: Vec<PauliString>,
        logical_x: PauliString,
        logical_z: PauliString,
        coords: Vec<(i32, i32)>,
        face_coords: Vec<(i32, i32)>,
    ) -> Result<Self> {
        let pure_errors = f2::destabilizers(&generators)
            .ok_or_else(|| GkpError::InvalidParameter("generators are not independent".into()))?;
        let n = logical_x.len();
        let layout = Self {
            family,
            distance,
            inner,
            generators,
            logical_x,
            logical_z,
            index_map: (0..n).collect(),
            coords,
            face_coords,
            pure_errors,
        };
        layout.validate()?;
        Ok(layout)
    }

    pub fn to_document(&self) -> LayoutDocument {
        LayoutDocument {
            family: self.family,
            d: self.distance,
            n_modes: self.n_modes(),
            inner_symplectic: {
                let m = self.inner.matrix2();
                [[m[(0, 0)], m[(0, 1)]], [m[(1, 0)], m[(1, 1)]]]
            },
            stabilizers: self.generators.clone(),
            x_stabilizers: self.x_stabilizers(),
            z_stabilizers: self.z_stabilizers(),
            logical_x: self.logical_x.clone(),
            logical_z: self.logical_z.clone(),
            index_map: self.index_map.clone(),
        }
    }

    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(&self.to_document())?)
    }

    /// Rebuilds a layout from its JSON document, re-running every invariant check.
    pub fn from_json(json: &str) -> Result<Self> {
        let doc: LayoutDocument = serde_json::from_str(json)?;
        let reference = build_layout(doc.family, doc.d)?;
        let [[a, b], [c, d]] = doc.inner_symplectic;
        let inner = SymplecticMatrix::from_matrix2(Matrix2::new(a, b, c, d))?;
        let layout = Self::assemble(
            doc.family,
            doc.d,
            inner,
            doc.stabilizers,
            doc.logical_x,
            doc.logical_z,
            reference.coords.clone(),
            reference.face_coords.clone(),
        )?;
        if doc.index_map != layout.index_map {
            return Err(GkpError::InvalidInput("index map must be the identity".into()));
        }
        Ok(layout)
    }
}

/// Serializable description of a layout.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LayoutDocument {
    pub family: Family,
    pub d: usize,
    pub n_modes: usize,
    pub inner_symplectic: [[f64; 2]; 2],
    pub stabilizers: Vec<PauliString>,
    pub x_stabilizers: Vec<Vec<usize>>,
    pub z_stabilizers: Vec<Vec<usize>>,
    pub logical_x: PauliString,
    pub logical_z: PauliString,
    pub index_map: Vec<usize>,
}

/// Builds and validates the layout of `family` at distance `d`.
///
/// Surface and color families accept `d = 1`, which is the single-mode code
/// with the family's inner lattice. The five-qubit code accepts `d ∈ {1, 3}`
/// and is stored with its true distance 3.
pub fn build_layout(family: Family, d: usize) -> Result<GkpCodeLayout> {
    let bad = || {
        Err(GkpError::InvalidParameter(format!(
            "unsupported combination: family {family}, d = {d}"
        )))
    };
    if d == 0 || d.is_multiple_of(2) || d > MAX_DISTANCE {
        return bad();
    }
    let square = SymplecticMatrix::identity(1);
    match family {
        Family::SquareSingle | Family::HexSingle if d != 1 => bad(),
        Family::FiveOneThreeHex if d > 3 => bad(),
        Family::SquareSingle => single_mode(family, square),
        Family::HexSingle => single_mode(family, hexagonal_inner_symplectic()),
        Family::SurfaceSquare if d == 1 => single_mode(family, square),
        Family::ColorSquare if d == 1 => single_mode(family, square),
        Family::ColorHex if d == 1 => single_mode(family, hexagonal_inner_symplectic()),
        Family::SurfaceSquare => surface_square(d),
        Family::ColorSquare => color(family, d, square),
        Family::ColorHex => color(family, d, hexagonal_inner_symplectic()),
        Family::FiveOneThreeHex => five_one_three(),
    }
}

fn single_mode(family: Family, inner: SymplecticMatrix) -> Result<GkpCodeLayout> {
    GkpCodeLayout::assemble(
        family,
        1,
        inner,
        Vec::new(),
        PauliString::from_labels(vec![1]),
        PauliString::from_labels(vec![2]),
        vec![(0, 0)],
        Vec::new(),
    )
}

fn five_one_three() -> Result<GkpCodeLayout> {
    let generators = ["IXZZX", "XIXZZ", "ZXIXZ", "ZZXIX"]
        .iter()
        .map(|s| s.parse())
        .collect::<Result<Vec<PauliString>>>()?;
    GkpCodeLayout::assemble(
        Family::FiveOneThreeHex,
        3,
        hexagonal_inner_symplectic(),
        generators,
        "XXXXX".parse()?,
        "ZZZZZ".parse()?,
        (0..5).map(|i| (0, i)).collect(),
        Vec::new(),
    )
}

/// Diamond picture of the rotated code inside the `(2d−1) × (2d−1)` grid of
/// the unrotated code: qubits at `r + c` even within Manhattan distance
/// `d − 1` of the centre, X checks at `(even, odd)`, Z checks at `(odd, even)`.
struct Diamond {
    d: usize,
    m: i32,
}

impl Diamond {
    fn new(d: usize) -> Self {
        Self { d, m: d as i32 - 1 }
    }

    fn dist(&self, (r, c): (i32, i32)) -> i32 {
        (r - self.m).abs() + (c - self.m).abs()
    }

    fn in_grid(&self, (r, c): (i32, i32)) -> bool {
        (0..=2 * self.m).contains(&r) && (0..=2 * self.m).contains(&c)
    }

    fn contains(&self, p: (i32, i32)) -> bool {
        (p.0 + p.1) % 2 == 0 && self.dist(p) <= self.m
    }

    fn rotated_index(&self, (r, c): (i32, i32)) -> usize {
        let a = (r - c + self.m) / 2;
        let b = (r + c - self.m) / 2;
        a as usize * self.d + b as usize
    }

    fn neighbours(&self, (r, c): (i32, i32)) -> impl Iterator<Item = (i32, i32)> + '_ {
        [(r - 1, c), (r + 1, c), (r, c - 1), (r, c + 1)]
            .into_iter()
            .filter(move |&p| self.in_grid(p))
    }

    /// X check at `p` that belongs to the rotated code: interior, or on the
    /// north-west / south-east edges.
    fn is_rotated_x_check(&self, (r, c): (i32, i32)) -> bool {
        let dist = self.dist((r, c));
        dist < self.m || (dist == self.m + 1 && ((r < self.m && c < self.m) || (r > self.m && c > self.m)))
    }

    fn is_rotated_z_check(&self, (r, c): (i32, i32)) -> bool {
        let dist = self.dist((r, c));
        dist < self.m || (dist == self.m + 1 && ((r < self.m && c > self.m) || (r > self.m && c < self.m)))
    }

    fn positions(&self, r_parity: i32) -> Vec<(i32, i32)> {
        let span = 0..=2 * self.m;
        span.clone()
            .flat_map(|r| span.clone().map(move |c| (r, c)))
            .filter(|&(r, c)| r % 2 == r_parity && (r + c) % 2 == 1)
            .collect()
    }

    fn x_positions(&self) -> Vec<(i32, i32)> {
        self.positions(0)
    }

    fn z_positions(&self) -> Vec<(i32, i32)> {
        self.positions(1)
    }
}

fn surface_square(d: usize) -> Result<GkpCodeLayout> {
    let dia = Diamond::new(d);
    let n = d * d;
    let check = |p: (i32, i32), kind: u8| {
        let support: Vec<usize> = dia
            .neighbours(p)
            .filter(|&q| dia.contains(q))
            .map(|q| dia.rotated_index(q))
            .collect();
        PauliString::on_support(n, &support, kind)
    };
    let mut generators: Vec<PauliString> = dia
        .x_positions()
        .into_iter()
        .filter(|&p| dia.is_rotated_x_check(p))
        .map(|p| check(p, 1))
        .collect();
    generators.extend(
        dia.z_positions()
            .into_iter()
            .filter(|&p| dia.is_rotated_z_check(p))
            .map(|p| check(p, 2)),
    );
    let top_row: Vec<usize> = (0..d).collect();
    let left_col: Vec<usize> = (0..d).map(|a| a * d).collect();
    GkpCodeLayout::assemble(
        Family::SurfaceSquare,
        d,
        SymplecticMatrix::identity(1),
        generators,
        PauliString::on_support(n, &top_row, 1),
        PauliString::on_support(n, &left_col, 2),
        (0..n).map(|i| ((i / d) as i32, (i % d) as i32)).collect(),
        Vec::new(),
    )
}

const TRIANGULAR_NEIGHBOURS: [(i32, i32); 6] = [(1, 0), (-1, 0), (0, 1), (0, -1), (1, -1), (-1, 1)];

fn color(family: Family, d: usize, inner: SymplecticMatrix) -> Result<GkpCodeLayout> {
    let side = 3 * (d as i32 - 1) / 2;
    let in_region = |(r, c): (i32, i32)| r >= 0 && c >= 0 && r + c <= side;
    let is_face = |(r, c): (i32, i32)| (r - c).rem_euclid(3) == 1;
    let sites: Vec<(i32, i32)> = (0..=side).flat_map(|r| (0..=side - r).map(move |c| (r, c))).collect();
    let qubits: Vec<(i32, i32)> = sites.iter().copied().filter(|&p| !is_face(p)).collect();
    let faces: Vec<(i32, i32)> = sites.iter().copied().filter(|&p| is_face(p)).collect();
    let n = qubits.len();
    let index_of = |p: (i32, i32)| qubits.binary_search(&p).ok();
    let supports: Vec<Vec<usize>> = faces
        .iter()
        .map(|&(r, c)| {
            let mut s: Vec<usize> = TRIANGULAR_NEIGHBOURS
                .iter()
                .map(|&(dr, dc)| (r + dr, c + dc))
                .filter(|&p| in_region(p))
                .filter_map(index_of)
                .collect();
            s.sort_unstable();
            s
        })
        .collect();
    let mut generators: Vec<PauliString> = supports.iter().map(|s| PauliString::on_support(n, s, 1)).collect();
    generators.extend(supports.iter().map(|s| PauliString::on_support(n, s, 2)));
    let boundary: Vec<usize> = (0..n).filter(|&i| qubits[i].1 == 0).collect();
    GkpCodeLayout::assemble(
        family,
        d,
        inner,
        generators,
        PauliString::on_support(n, &boundary, 1),
        PauliString::on_support(n, &boundary, 2),
        qubits,
        faces,
    )
}

/// Role of an unrotated-code qubit when evaluating the rotated code's
/// partition function.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum WeightClass {
    /// Carries the weight of the rotated-code qubit with this index.
    Mapped(usize),
    /// Weight fixed to one.
    ForcedOne,
    /// Weight fixed to zero.
    ForcedZero,
}

/// The distance-`d` unrotated surface code with a rotated code embedded on
/// its central diamond.
#[derive(Debug, Clone)]
pub struct UnrotatedEmbedding {
    d: usize,
    qubits: Vec<(i32, i32)>,
    weight_class: Vec<WeightClass>,
    x_checks: Vec<(i32, i32)>,
    incidence: Vec<Vec<usize>>,
}

impl UnrotatedEmbedding {
    pub fn distance(&self) -> usize {
        self.d
    }

    /// `d² + (d−1)²`.
    pub fn qubit_count(&self) -> usize {
        self.qubits.len()
    }

    /// Grid position `(r, c)` of each unrotated qubit (row-major, `r + c` even).
    pub fn qubits(&self) -> &[(i32, i32)] {
        &self.qubits
    }

    pub fn weight_class(&self) -> &[WeightClass] {
        &self.weight_class
    }

    /// Grid positions of the X-type checks of the unrotated code.
    pub fn x_checks(&self) -> &[(i32, i32)] {
        &self.x_checks
    }

    /// Indices of the X checks acting on each unrotated qubit (one or two).
    pub fn incidence(&self) -> &[Vec<usize>] {
        &self.incidence
    }

    pub fn count(&self, pred: impl Fn(&WeightClass) -> bool) -> usize {
        self.weight_class.iter().filter(|w| pred(w)).count()
    }
}

/// Embeds the rotated distance-`d` code into the unrotated one: qubits on the
/// central diamond are mapped, the `2d − 4` corner qubits next to the
/// north-west and south-east weight-two X checks are forced to one, and all
/// remaining corner qubits are forced to zero.
pub fn embed_rotated_into_unrotated(d: usize) -> Result<UnrotatedEmbedding> {
    if d < 3 || d.is_multiple_of(2) || d > MAX_DISTANCE {
        return Err(GkpError::InvalidParameter(format!(
            "embedding needs an odd distance >= 3, got {d}"
        )));
    }
    let dia = Diamond::new(d);
    let span = 0..=2 * dia.m;
    let qubits: Vec<(i32, i32)> = span
        .clone()
        .flat_map(|r| span.clone().map(move |c| (r, c)))
        .filter(|&(r, c)| (r + c) % 2 == 0)
        .collect();
    let mut forced_one = std::collections::BTreeSet::new();
    for p in dia.x_positions() {
        if dia.dist(p) == dia.m + 1 && dia.is_rotated_x_check(p) {
            forced_one.extend(dia.neighbours(p).filter(|&q| !dia.contains(q)));
        }
    }
    let weight_class = qubits
        .iter()
        .map(|&q| {
            if dia.contains(q) {
                WeightClass::Mapped(dia.rotated_index(q))
            } else if forced_one.contains(&q) {
                WeightClass::ForcedOne
            } else {
                WeightClass::ForcedZero
            }
        })
        .collect();
    let x_checks = dia.x_positions();
    let incidence = qubits
        .iter()
        .map(|&q| {
            dia.neighbours(q)
                .filter_map(|p| x_checks.binary_search(&p).ok())
                .collect()
        })
        .collect();
    Ok(UnrotatedEmbedding {
        d,
        qubits,
        weight_class,
        x_checks,
        incidence,
    })
}

/// Index permutation of the 90° rotation `(a, b) → (b, d − 1 − a)`.
pub fn quarter_turn(d: usize) -> Vec<usize> {
    (0..d * d)
        .map(|i| {
            let (a, b) = (i / d, i % d);
            b * d + (d - 1 - a)
        })
        .collect()
}

/// The surface layout turned by 90° with X and Z exchanged, so that its X
/// checks coincide with the original X checks and the Z side can be decoded
/// with the X-side machinery.
pub fn z_side_layout(layout: &GkpCodeLayout) -> Result<GkpCodeLayout> {
    if layout.family != Family::SurfaceSquare {
        return Err(GkpError::InvalidParameter(format!(
            "z-side layout needs a surface-square code, got {}",
            layout.family
        )));
    }
    let d = layout.distance;
    let perm = quarter_turn(d);
    let turn = |p: &PauliString| p.hadamard_conjugate().permuted(&perm);
    let mut generators: Vec<PauliString> = layout.generators.iter().map(turn).collect();
    generators.sort_by_key(|g| g.labels().contains(&2));
    GkpCodeLayout::assemble(
        Family::SurfaceSquare,
        d,
        layout.inner.clone(),
        generators,
        turn(&layout.logical_z),
        turn(&layout.logical_x),
        layout.coords.clone(),
        Vec::new(),
    )
}
