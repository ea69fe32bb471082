//! Exact coset weights by summing over the full stabilizer group.

use crate::codes::GkpCodeLayout;
use crate::decoders::weights::StreamingLse;
use crate::error::{GkpError, Result};
use crate::lattice::LogicalClass;

/// Largest generator count accepted (group size `2^24`).
pub const MAX_GENERATORS: usize = 24;

const RECOMPUTE_PERIOD: u64 = 4096;

#[derive(Debug, Clone)]
pub struct BruteForce {
    n: usize,
    /// Non-identity `(qubit, label)` pairs of each generator.
    generators: Vec<Vec<(usize, u8)>>,
    /// Label strings of the four logical representatives in `LogicalClass::ALL` order.
    logicals: [Vec<u8>; 4],
}

impl BruteForce {
    pub fn new(layout: &GkpCodeLayout) -> Result<Self> {
        let gens = layout.stabilizer_generators();
        if gens.len() > MAX_GENERATORS {
            return Err(GkpError::Infeasible(format!(
                "stabilizer group of size 2^{} exceeds 2^{MAX_GENERATORS}",
                gens.len()
            )));
        }
        Ok(Self {
            n: layout.n_modes(),
            generators: gens
                .iter()
                .map(|g| {
                    g.labels()
                        .iter()
                        .enumerate()
                        .filter(|(_, &l)| l != 0)
                        .map(|(i, &l)| (i, l))
                        .collect()
                })
                .collect(),
            logicals: LogicalClass::ALL.map(|c| layout.logical(c).labels().to_vec()),
        })
    }

    /// Number of stabilizer group elements summed per coset.
    pub fn group_size(&self) -> u64 {
        1 << self.generators.len()
    }

    /// `ln Σ_{g ∈ G} Π_i exp(tables[i][(L_c g)_i])` for each class `c`.
    pub fn log_weights(&self, tables: &[[f64; 4]]) -> Result<[f64; 4]> {
        if tables.len() != self.n {
            return Err(GkpError::InvalidInput(format!(
                "expected {} weight tables, got {}",
                self.n,
                tables.len()
            )));
        }
        let mut labels = self.logicals.clone();
        let total = |labels: &[u8]| -> f64 { labels.iter().zip(tables).map(|(&l, t)| t[l as usize]).sum() };
        let mut sums: [f64; 4] = std::array::from_fn(|c| total(&labels[c]));
        let mut acc = [StreamingLse::default(); 4];
        for c in 0..4 {
            acc[c].push(sums[c]);
        }
        for k in 1..self.group_size() {
            let j = k.trailing_zeros() as usize;
            for &(i, l) in &self.generators[j] {
                let t = &tables[i];
                for c in 0..4 {
                    let old = labels[c][i];
                    let new = old ^ l;
                    labels[c][i] = new;
                    sums[c] += t[new as usize] - t[old as usize];
                }
            }
            if k % RECOMPUTE_PERIOD == 0 {
                sums = std::array::from_fn(|c| total(&labels[c]));
            }
            for c in 0..4 {
                acc[c].push(sums[c]);
            }
        }
        Ok(acc.map(|a| a.value()))
    }
}
