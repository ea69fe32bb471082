//! Tensor-network maximum-likelihood decoding of 6.6.6 color codes.
//!
//! Every face carries one spin: binary (whether the face's X, or Z, check is
//! in the group element) for square inner codes, quaternary
//! (`X^a Z^b` ↦ `a + 2b`) for hexagonal ones. The group element's label on a
//! qubit is the XOR of the spins of its faces, so each qubit is one factor
//! `table_i[L_c,i ⊕ (⊕ faces)]`. Faces are laid out in rows of constant
//! `r − c` with horizontal coordinate `r + c`; a qubit touches at most three
//! faces from two adjacent rows.

use crate::codes::{Family, GkpCodeLayout};
use crate::decoders::contract::{Method, SpinNetwork};
use crate::decoders::partition::dense_or_mps;
use crate::error::{GkpError, Result};
use crate::lattice::LogicalClass;

#[derive(Debug, Clone)]
pub struct ColorNetwork {
    network: SpinNetwork,
    factorized: bool,
    logical_support: Vec<bool>,
}

impl ColorNetwork {
    /// `factorized` selects per-quadrature binary networks (only valid for square inner codes).
    pub fn new(layout: &GkpCodeLayout, factorized: bool) -> Result<Self> {
        let family = layout.family();
        if !matches!(family, Family::ColorSquare | Family::ColorHex) || layout.distance() < 3 {
            return Err(GkpError::InvalidParameter(format!(
                "tensor-network decoding needs a color code with d >= 3, got {family} d={}",
                layout.distance()
            )));
        }
        if factorized && !layout.inner_symplectic().is_identity() {
            return Err(GkpError::InvalidParameter("only square inner codes factorize".into()));
        }
        let faces = layout.face_coords();
        let supports = layout.x_stabilizers();
        let positions = faces.iter().map(|&(r, c)| ((r - c - 1).div_euclid(3), r + c)).collect();
        let mut factors = vec![Vec::new(); layout.n_modes()];
        for (f, support) in supports.iter().enumerate() {
            for &i in support {
                factors[i].push(f);
            }
        }
        let q = if factorized { 2 } else { 4 };
        Ok(Self {
            network: SpinNetwork::new(q, positions, factors)?,
            factorized,
            logical_support: layout.logical_x().labels().iter().map(|&l| l != 0).collect(),
        })
    }

    pub fn network(&self) -> &SpinNetwork {
        &self.network
    }

    pub fn is_factorized(&self) -> bool {
        self.factorized
    }

    /// Log weights in `LogicalClass::ALL` order from F4 tables.
    pub fn log_weights_f4(&self, tables: &[[f64; 4]], method: Method) -> Result<[f64; 4]> {
        self.check_len(tables.len())?;
        let mut out = [0.0; 4];
        for (slot, class) in out.iter_mut().zip(LogicalClass::ALL) {
            let l = class.label() as usize;
            let shifted: Vec<[f64; 4]> = tables
                .iter()
                .zip(&self.logical_support)
                .map(|(t, &on)| {
                    let s = if on { l } else { 0 };
                    std::array::from_fn(|g| t[g ^ s])
                })
                .collect();
            *slot = self.network.log_partition(&shifted, method)?;
        }
        Ok(out)
    }

    /// Log weights in `LogicalClass::ALL` order from q-side and p-side binary tables.
    pub fn log_weights_sides(&self, q_side: &[[f64; 2]], p_side: &[[f64; 2]], method: Method) -> Result<[f64; 4]> {
        self.check_len(q_side.len())?;
        self.check_len(p_side.len())?;
        let side = |t: &[[f64; 2]]| -> Result<[f64; 2]> {
            let mut out = [0.0; 2];
            for (c, slot) in out.iter_mut().enumerate() {
                let shifted: Vec<[f64; 4]> = t
                    .iter()
                    .zip(&self.logical_support)
                    .map(|(t, &on)| {
                        let s = (c == 1 && on) as usize;
                        [t[s], t[1 ^ s], 0.0, 0.0]
                    })
                    .collect();
                *slot = self.network.log_partition(&shifted, method)?;
            }
            Ok(out)
        };
        let wq = side(q_side)?;
        let wp = side(p_side)?;
        Ok([wq[0] + wp[0], wq[1] + wp[0], wq[1] + wp[1], wq[0] + wp[1]])
    }

    pub fn method_for(&self, max_bond: usize) -> Method {
        dense_or_mps(&self.network, max_bond)
    }

    fn check_len(&self, n: usize) -> Result<()> {
        if n != self.logical_support.len() {
            return Err(GkpError::InvalidInput(format!(
                "expected {} per-qubit tables, got {n}",
                self.logical_support.len()
            )));
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::codes::build_layout;
    use crate::decoders::brute_force::BruteForce;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn rows_touch_at_most_three_faces() {
        for d in [3, 5, 7] {
            let layout = build_layout(Family::ColorHex, d).unwrap();
            let net = ColorNetwork::new(&layout, false).unwrap();
            assert!(net.network().factors().iter().all(|f| (1..=3).contains(&f.len())));
        }
    }

    #[test]
    fn f4_network_matches_brute_force() {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        for d in [3, 5] {
            let layout = build_layout(Family::ColorHex, d).unwrap();
            let net = ColorNetwork::new(&layout, false).unwrap();
            let bf = BruteForce::new(&layout).unwrap();
            let tables: Vec<[f64; 4]> = (0..layout.n_modes())
                .map(|_| std::array::from_fn(|_| rng.random_range(-5.0..0.0)))
                .collect();
            let expected = bf.log_weights(&tables).unwrap();
            for method in [Method::Dense, Method::Mps { max_bond: 0 }] {
                let got = net.log_weights_f4(&tables, method).unwrap();
                for c in 0..4 {
                    assert!((got[c] - expected[c]).abs() < 1e-9, "d={d} {method:?}");
                }
            }
        }
    }

    #[test]
    fn binary_sides_match_f4_for_square_codes() {
        let mut rng = ChaCha8Rng::seed_from_u64(12);
        let layout = build_layout(Family::ColorSquare, 5).unwrap();
        let binary = ColorNetwork::new(&layout, true).unwrap();
        let quaternary = ColorNetwork::new(&layout, false).unwrap();
        let q: Vec<[f64; 2]> = (0..19)
            .map(|_| [rng.random_range(-3.0..0.0), rng.random_range(-3.0..0.0)])
            .collect();
        let p: Vec<[f64; 2]> = (0..19)
            .map(|_| [rng.random_range(-3.0..0.0), rng.random_range(-3.0..0.0)])
            .collect();
        let f4: Vec<[f64; 4]> = q
            .iter()
            .zip(&p)
            .map(|(a, b)| std::array::from_fn(|l| a[l & 1] + b[l >> 1]))
            .collect();
        let a = binary.log_weights_sides(&q, &p, Method::Dense).unwrap();
        let b = quaternary.log_weights_f4(&f4, Method::Dense).unwrap();
        for c in 0..4 {
            assert!((a[c] - b[c]).abs() < 1e-9);
        }
    }

    #[test]
    fn uniform_tables_give_equal_weights() {
        let layout = build_layout(Family::ColorHex, 5).unwrap();
        let net = ColorNetwork::new(&layout, false).unwrap();
        let w = net
            .log_weights_f4(&vec![[-1.0; 4]; 19], Method::Mps { max_bond: 64 })
            .unwrap();
        for c in 1..4 {
            assert!((w[c] - w[0]).abs() < 1e-9);
        }
    }

    #[test]
    fn rejects_non_color_layouts() {
        let layout = build_layout(Family::SurfaceSquare, 3).unwrap();
        assert!(ColorNetwork::new(&layout, true).is_err());
        let layout = build_layout(Family::ColorHex, 3).unwrap();
        assert!(ColorNetwork::new(&layout, true).is_err());
    }
}
