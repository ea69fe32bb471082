//! Hard-decision baseline: nearest local coset per mode, then the
//! minimum-weight Pauli in each logical coset of the outer code.

use crate::codes::GkpCodeLayout;
use crate::error::{GkpError, Result};
use crate::lattice::{LogicalClass, PauliString};

/// Largest group enumerated per search (`2^24` elements).
pub const MAX_GENERATORS: usize = 24;

#[derive(Debug, Clone)]
pub struct Baseline {
    n: usize,
    css: bool,
    /// `(x mask, z mask)` of each generator.
    generators: Vec<(u64, u64)>,
    logicals: [(u64, u64); 4],
}

fn masks(p: &PauliString) -> (u64, u64) {
    p.labels().iter().enumerate().fold((0, 0), |(x, z), (i, &l)| {
        (x | ((l & 1) as u64) << i, z | ((l >> 1) as u64) << i)
    })
}

/// Minimum of `cost(v ⊕ g)` over the span of `gens`, by Gray code.
fn min_over_span(gens: &[u64], start: u64, cost: impl Fn(u64) -> u32) -> u32 {
    let mut v = start;
    let mut best = cost(v);
    for k in 1..(1u64 << gens.len()) {
        v ^= gens[k.trailing_zeros() as usize];
        best = best.min(cost(v));
    }
    best
}

impl Baseline {
    pub fn new(layout: &GkpCodeLayout) -> Result<Self> {
        let n = layout.n_modes();
        if n > 64 {
            return Err(GkpError::Infeasible(format!(
                "baseline supports at most 64 modes, got {n}"
            )));
        }
        let css = layout.inner_symplectic().is_identity() && layout.is_css();
        let generators: Vec<(u64, u64)> = layout.stabilizer_generators().iter().map(masks).collect();
        let largest = if css {
            generators
                .iter()
                .filter(|g| g.1 == 0)
                .count()
                .max(generators.iter().filter(|g| g.0 == 0).count())
        } else {
            generators.len()
        };
        if largest > MAX_GENERATORS {
            return Err(GkpError::Infeasible(format!(
                "baseline search over 2^{largest} group elements exceeds 2^{MAX_GENERATORS}"
            )));
        }
        Ok(Self {
            n,
            css,
            generators,
            logicals: LogicalClass::ALL.map(|c| masks(&layout.logical(c))),
        })
    }

    /// `−(minimum weight)` of each logical coset of the hard-decision error,
    /// in `LogicalClass::ALL` order; `tables` are per-qubit F4 log-weights and
    /// the hard decision is their argmax.
    pub fn log_weights(&self, tables: &[[f64; 4]]) -> Result<[f64; 4]> {
        if tables.len() != self.n {
            return Err(GkpError::InvalidInput(format!("expected {} weight tables", self.n)));
        }
        let (hx, hz) = tables.iter().enumerate().fold((0u64, 0u64), |(x, z), (i, t)| {
            let best = (0..4).fold(0, |b, l| if t[l] > t[b] { l } else { b }) as u64;
            (x | (best & 1) << i, z | (best >> 1) << i)
        });
        let mut out = [0.0; 4];
        if self.css {
            let xs: Vec<u64> = self.generators.iter().filter(|g| g.1 == 0).map(|g| g.0).collect();
            let zs: Vec<u64> = self.generators.iter().filter(|g| g.0 == 0).map(|g| g.1).collect();
            let count = |v: u64| v.count_ones();
            let (lx, lz) = (self.logicals[1].0, self.logicals[3].1);
            let wx = [min_over_span(&xs, hx, count), min_over_span(&xs, hx ^ lx, count)];
            let wz = [min_over_span(&zs, hz, count), min_over_span(&zs, hz ^ lz, count)];
            for (slot, class) in out.iter_mut().zip(LogicalClass::ALL) {
                let (x, z) = class.bits();
                *slot = -f64::from(wx[x as usize] + wz[z as usize]);
            }
        } else {
            // Pack (x, z) into one u128 so the span search works on a single word.
            let pack = |(x, z): (u64, u64)| (x as u128) | (z as u128) << 64;
            let gens: Vec<u128> = self.generators.iter().map(|&g| pack(g)).collect();
            for (slot, logical) in out.iter_mut().zip(self.logicals) {
                let start = pack((hx, hz)) ^ pack(logical);
                let mut v = start;
                let weight = |v: u128| ((v as u64) | (v >> 64) as u64).count_ones();
                let mut best = weight(v);
                for k in 1..(1u64 << gens.len()) {
                    v ^= gens[k.trailing_zeros() as usize];
                    best = best.min(weight(v));
                }
                *slot = -f64::from(best);
            }
        }
        Ok(out)
    }
}
