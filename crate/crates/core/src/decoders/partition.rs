//! Exact maximum-likelihood decoding of surface-square codes via the
//! partition function of the unrotated code.
//!
//! The noise factorizes into q and p quadratures. On the q side the coset
//! weight of logical shift `c ∈ {0, 1}` is `Σ_{g ∈ G_X} Π_i t_i[cλ_i ⊕ g_i]`
//! with `λ` the logical-X support. Writing
//! `τ'_i = exp(t_i[1 ⊕ cλ_i] − t_i[cλ_i])` this is `Π_i t_i[cλ_i] · Z(τ')`,
//! where `Z(τ') = Σ_g Π_i τ'_i^{g_i}`. `Z` is evaluated on the unrotated code
//! with weight one on the forced-one qubits and zero on the forced-zero ones,
//! whose surviving group elements are exactly `G_X`. The p side reuses the
//! same network on the quarter-turned layout.

use crate::codes::Family;
use crate::codes::{
    embed_rotated_into_unrotated, quarter_turn, z_side_layout, GkpCodeLayout, UnrotatedEmbedding, WeightClass,
};
use crate::decoders::contract::{Method, SpinNetwork, DENSE_ENTRY_LIMIT};
use crate::error::{GkpError, Result};

#[derive(Debug, Clone)]
enum Weight {
    Mapped(usize),
    Zero,
}

#[derive(Debug, Clone)]
pub struct SurfacePartition {
    embedding: UnrotatedEmbedding,
    network: SpinNetwork,
    weights: Vec<Weight>,
    /// Rotated-code qubit → original qubit on the p side.
    p_source: Vec<usize>,
    /// Logical support on each side, in the side's own qubit indices.
    logical: [Vec<bool>; 2],
}

impl SurfacePartition {
    pub fn new(layout: &GkpCodeLayout) -> Result<Self> {
        if layout.family() != Family::SurfaceSquare || layout.distance() < 3 {
            return Err(GkpError::InvalidParameter(format!(
                "partition-function decoding needs a surface-square code with d >= 3, got {} d={}",
                layout.family(),
                layout.distance()
            )));
        }
        let d = layout.distance();
        let embedding = embed_rotated_into_unrotated(d)?;
        let turned = z_side_layout(layout)?;
        let sorted = |mut v: Vec<Vec<usize>>| {
            v.sort();
            v
        };
        if sorted(turned.x_stabilizers()) != sorted(layout.x_stabilizers()) {
            return Err(GkpError::InvalidState(
                "quarter turn does not preserve the X checks".into(),
            ));
        }
        let positions = embedding.x_checks().iter().map(|&(r, c)| (r / 2, c)).collect();
        let mut factors = Vec::new();
        let mut weights = Vec::new();
        for (u, class) in embedding.weight_class().iter().enumerate() {
            let w = match *class {
                WeightClass::Mapped(i) => Weight::Mapped(i),
                WeightClass::ForcedZero => Weight::Zero,
                WeightClass::ForcedOne => continue,
            };
            factors.push(embedding.incidence()[u].clone());
            weights.push(w);
        }
        let network = SpinNetwork::new(2, positions, factors)?;
        let perm = quarter_turn(d);
        let mut p_source = vec![0; d * d];
        for (i, &j) in perm.iter().enumerate() {
            p_source[j] = i;
        }
        let support = |l: &crate::lattice::PauliString| l.labels().iter().map(|&x| x != 0).collect();
        Ok(Self {
            embedding,
            network,
            weights,
            p_source,
            logical: [support(layout.logical_x()), support(turned.logical_x())],
        })
    }

    pub fn embedding(&self) -> &UnrotatedEmbedding {
        &self.embedding
    }

    pub fn network(&self) -> &SpinNetwork {
        &self.network
    }

    /// `ln Z(τ')` for per-rotated-qubit `ln τ'`.
    pub fn log_z(&self, log_tau: &[f64], method: Method) -> Result<f64> {
        let tables: Vec<[f64; 4]> = self
            .weights
            .iter()
            .map(|w| match *w {
                Weight::Mapped(i) => [0.0, log_tau[i], 0.0, 0.0],
                Weight::Zero => [0.0, f64::NEG_INFINITY, 0.0, 0.0],
            })
            .collect();
        self.network.log_partition(&tables, method)
    }

    /// Log coset weights `[trivial, logical]` of one side from binary log-weights
    /// indexed by the side's own qubit order.
    fn side_weights(&self, side: usize, t: &[[f64; 2]], method: Method) -> Result<[f64; 2]> {
        let lambda = &self.logical[side];
        let mut out = [0.0; 2];
        for (c, slot) in out.iter_mut().enumerate() {
            let shift = |i: usize| (c == 1 && lambda[i]) as usize;
            let prefactor: f64 = (0..t.len()).map(|i| t[i][shift(i)]).sum();
            let log_tau: Vec<f64> = (0..t.len()).map(|i| t[i][1 ^ shift(i)] - t[i][shift(i)]).collect();
            *slot = prefactor + self.log_z(&log_tau, method)?;
        }
        Ok(out)
    }

    /// Log weights in `LogicalClass::ALL` order from q-side and p-side binary tables.
    pub fn log_weights(&self, q_side: &[[f64; 2]], p_side: &[[f64; 2]], method: Method) -> Result<[f64; 4]> {
        let n = self.p_source.len();
        if q_side.len() != n || p_side.len() != n {
            return Err(GkpError::InvalidInput(format!("expected {n} per-qubit tables")));
        }
        let turned: Vec<[f64; 2]> = self.p_source.iter().map(|&i| p_side[i]).collect();
        let wq = self.side_weights(0, q_side, method)?;
        let wp = self.side_weights(1, &turned, method)?;
        Ok([wq[0] + wp[0], wq[1] + wp[0], wq[1] + wp[1], wq[0] + wp[1]])
    }

    /// Contraction method for a bond limit (`0` = exact).
    pub fn method_for(&self, max_bond: usize) -> Method {
        dense_or_mps(&self.network, max_bond)
    }
}

/// Exact dense boundary when `max_bond = 0` and it fits, else the MPS boundary.
pub(crate) fn dense_or_mps(network: &SpinNetwork, max_bond: usize) -> Method {
    let entries = (network.q() as f64).powi(network.max_boundary() as i32);
    if max_bond == 0 && entries <= DENSE_ENTRY_LIMIT as f64 {
        Method::Dense
    } else {
        Method::Mps { max_bond }
    }
}
