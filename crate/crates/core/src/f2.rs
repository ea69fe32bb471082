//! Dense linear algebra over F2 for stabilizer bookkeeping.

use crate::lattice::PauliString;

/// Bit-packed row vector.
#[derive(Debug, Clone, PartialEq, Eq)]
pub(crate) struct BitRow {
    words: Vec<u64>,
    len: usize,
}

impl BitRow {
    pub fn zeros(len: usize) -> Self {
        Self {
            words: vec![0; len.div_ceil(64)],
            len,
        }
    }

    pub fn get(&self, i: usize) -> bool {
        self.words[i / 64] >> (i % 64) & 1 == 1
    }

    pub fn set(&mut self, i: usize, v: bool) {
        let mask = 1u64 << (i % 64);
        if v {
            self.words[i / 64] |= mask;
        } else {
            self.words[i / 64] &= !mask;
        }
    }

    pub fn xor_assign(&mut self, other: &Self) {
        for (a, b) in self.words.iter_mut().zip(&other.words) {
            *a ^= b;
        }
    }

    pub fn len(&self) -> usize {
        self.len
    }
}

/// `(x | z)` layout of a Pauli string.
pub(crate) fn pauli_to_row(p: &PauliString) -> BitRow {
    let n = p.len();
    let mut row = BitRow::zeros(2 * n);
    for (i, &l) in p.labels().iter().enumerate() {
        row.set(i, l & 1 == 1);
        row.set(n + i, l & 2 == 2);
    }
    row
}

fn row_to_pauli(row: &BitRow) -> PauliString {
    let n = row.len() / 2;
    PauliString::from_labels((0..n).map(|i| row.get(i) as u8 | (row.get(n + i) as u8) << 1).collect())
}

pub(crate) fn rank(rows: &[BitRow]) -> usize {
    let mut rows = rows.to_vec();
    let Some(width) = rows.first().map(BitRow::len) else {
        return 0;
    };
    let mut rank = 0;
    for col in 0..width {
        let Some(pivot) = (rank..rows.len()).find(|&r| rows[r].get(col)) else {
            continue;
        };
        rows.swap(rank, pivot);
        let pivot_row = rows[rank].clone();
        for (r, row) in rows.iter_mut().enumerate() {
            if r != rank && row.get(col) {
                row.xor_assign(&pivot_row);
            }
        }
        rank += 1;
        if rank == rows.len() {
            break;
        }
    }
    rank
}

/// For independent generators `g_0..g_{m-1}`, returns Pauli strings `d_j`
/// that anticommute with `g_j` and commute with every other generator.
///
/// Returns `None` when the generators are dependent.
pub(crate) fn destabilizers(generators: &[PauliString]) -> Option<Vec<PauliString>> {
    let m = generators.len();
    let Some(n) = generators.first().map(PauliString::len) else {
        return Some(Vec::new());
    };
    // Row k of `a` is the symplectic dual of g_k so that a_k · v = ⟨g_k, v⟩.
    let mut a: Vec<BitRow> = generators
        .iter()
        .map(|g| {
            let mut row = BitRow::zeros(2 * n);
            for (i, &l) in g.labels().iter().enumerate() {
                row.set(i, l & 2 == 2);
                row.set(n + i, l & 1 == 1);
            }
            row
        })
        .collect();
    let mut track: Vec<BitRow> = (0..m)
        .map(|k| {
            let mut row = BitRow::zeros(m);
            row.set(k, true);
            row
        })
        .collect();
    let mut pivots = Vec::with_capacity(m);
    let mut r = 0;
    for col in 0..2 * n {
        if r == m {
            break;
        }
        let Some(p) = (r..m).find(|&i| a[i].get(col)) else {
            continue;
        };
        a.swap(r, p);
        track.swap(r, p);
        let (pa, pt) = (a[r].clone(), track[r].clone());
        for i in 0..m {
            if i != r && a[i].get(col) {
                a[i].xor_assign(&pa);
                track[i].xor_assign(&pt);
            }
        }
        pivots.push(col);
        r += 1;
    }
    if r < m {
        return None;
    }
    Some(
        (0..m)
            .map(|j| {
                let mut d = BitRow::zeros(2 * n);
                for (row, &col) in pivots.iter().enumerate() {
                    d.set(col, track[row].get(j));
                }
                row_to_pauli(&d)
            })
            .collect(),
    )
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn destabilizers_of_five_qubit_code() {
        let gens: Vec<PauliString> = ["IXZZX", "XIXZZ", "ZXIXZ", "ZZXIX"]
            .iter()
            .map(|s| s.parse().unwrap())
            .collect();
        let rows: Vec<BitRow> = gens.iter().map(pauli_to_row).collect();
        assert_eq!(rank(&rows), 4);
        let ds = destabilizers(&gens).unwrap();
        for (j, d) in ds.iter().enumerate() {
            for (k, g) in gens.iter().enumerate() {
                assert_eq!(d.anticommutes(g), j == k, "d{j} vs g{k}");
            }
        }
    }

    #[test]
    fn dependent_generators_are_rejected() {
        let gens: Vec<PauliString> = ["XXI", "IXX", "XIX"].iter().map(|s| s.parse().unwrap()).collect();
        assert!(destabilizers(&gens).is_none());
    }
}
