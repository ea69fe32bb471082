//! Partition functions of XOR spin networks.
//!
//! A network has `q`-valued spins (`q ∈ {2, 4}`, combined by bitwise XOR as
//! elements of F2 or F2²) placed at `(row, x)` positions, and factors that
//! depend on the XOR of the spins they touch. Its partition function is
//! `Σ_spins Π_f exp(table_f[⊕ spins(f)])`.
//!
//! Three evaluation methods share one elimination schedule: spins are added
//! in `(row, x)` order, a factor is applied once all of its spins are
//! present, and a spin is summed out after its last factor. The set of live
//! spins is the boundary of the contracted region.
//!
//! * [`Method::Exhaustive`] enumerates every configuration in Gray-code order.
//! * [`Method::Dense`] stores the boundary as a dense tensor (exact).
//! * [`Method::Mps`] stores the boundary as a matrix product state ordered by
//!   `(x, row)`, compressed by truncated SVD after every factor.

use nalgebra::DMatrix;

use crate::decoders::weights::StreamingLse;
use crate::error::{GkpError, Result};

/// Largest dense boundary tensor, in entries.
pub const DENSE_ENTRY_LIMIT: usize = 1 << 24;

/// Largest number of configuration bits for [`Method::Exhaustive`].
pub const EXHAUSTIVE_BIT_LIMIT: u32 = 24;

/// Singular values at or below this fraction of the largest are always
/// dropped, even under the bond limit.
pub const SVD_RELATIVE_CUTOFF: f64 = 1e-14;

const RECOMPUTE_PERIOD: u64 = 4096;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Method {
    Exhaustive,
    Dense,
    /// `max_bond = 0` keeps every singular value above the relative cutoff.
    ///
    /// Round-off is relative to the boundary norm, so the result loses
    /// precision once the final value falls about 1e-15 below the largest
    /// intermediate boundary component; this happens for strongly frustrated
    /// weights (small σ). [`Method::Dense`] has no such loss.
    Mps {
        max_bond: usize,
    },
}

#[derive(Debug, Clone, Copy)]
enum Step {
    Add(usize),
    Apply(usize),
    Eliminate(usize),
}

/// Structure of an XOR spin network; factor tables are supplied per evaluation.
#[derive(Debug, Clone)]
pub struct SpinNetwork {
    q: usize,
    bits: u32,
    positions: Vec<(i32, i32)>,
    factors: Vec<Vec<usize>>,
    site_factors: Vec<Vec<usize>>,
    schedule: Vec<Step>,
    max_boundary: usize,
}

impl SpinNetwork {
    /// `positions[s] = (row, x)` of spin `s`; `factors[f]` lists the spins of factor `f`.
    pub fn new(q: usize, positions: Vec<(i32, i32)>, factors: Vec<Vec<usize>>) -> Result<Self> {
        let bits = match q {
            2 => 1,
            4 => 2,
            _ => {
                return Err(GkpError::InvalidParameter(format!(
                    "spin dimension must be 2 or 4, got {q}"
                )))
            }
        };
        let n = positions.len();
        let mut site_factors = vec![Vec::new(); n];
        for (f, sites) in factors.iter().enumerate() {
            for &s in sites {
                if s >= n {
                    return Err(GkpError::InvalidParameter(format!("factor {f} references spin {s}")));
                }
                if site_factors[s].contains(&f) {
                    return Err(GkpError::InvalidParameter(format!("factor {f} repeats spin {s}")));
                }
                site_factors[s].push(f);
            }
        }
        let mut order: Vec<usize> = (0..n).collect();
        order.sort_by_key(|&s| (positions[s], s));
        let mut rank = vec![0; n];
        for (k, &s) in order.iter().enumerate() {
            rank[s] = k;
        }
        let mut by_last: Vec<Vec<usize>> = vec![Vec::new(); n];
        for (f, sites) in factors.iter().enumerate() {
            if let Some(&last) = sites.iter().max_by_key(|&&s| rank[s]) {
                by_last[rank[last]].push(f);
            }
        }
        let mut pending: Vec<usize> = site_factors.iter().map(Vec::len).collect();
        let mut live: Vec<usize> = Vec::new();
        let mut schedule = Vec::new();
        let mut max_boundary = 0;
        for (k, &s) in order.iter().enumerate() {
            schedule.push(Step::Add(s));
            live.push(s);
            max_boundary = max_boundary.max(live.len());
            for &f in &by_last[k] {
                schedule.push(Step::Apply(f));
                for &t in &factors[f] {
                    pending[t] -= 1;
                }
            }
            live.retain(|&t| {
                if pending[t] == 0 {
                    schedule.push(Step::Eliminate(t));
                    false
                } else {
                    true
                }
            });
        }
        Ok(Self {
            q,
            bits,
            positions,
            factors,
            site_factors,
            schedule,
            max_boundary,
        })
    }

    pub fn q(&self) -> usize {
        self.q
    }

    pub fn n_spins(&self) -> usize {
        self.positions.len()
    }

    pub fn factors(&self) -> &[Vec<usize>] {
        &self.factors
    }

    /// Largest number of simultaneously live spins in the schedule.
    pub fn max_boundary(&self) -> usize {
        self.max_boundary
    }

    /// `ln Z` for the given per-factor log tables (entries `≥ q` are ignored).
    pub fn log_partition(&self, tables: &[[f64; 4]], method: Method) -> Result<f64> {
        if tables.len() != self.factors.len() {
            return Err(GkpError::InvalidInput(format!(
                "expected {} factor tables, got {}",
                self.factors.len(),
                tables.len()
            )));
        }
        if tables
            .iter()
            .any(|t| t[..self.q].iter().any(|x| x.is_nan() || *x == f64::INFINITY))
        {
            return Err(GkpError::InvalidInput("factor table contains NaN or +inf".into()));
        }
        let value = match method {
            Method::Exhaustive => self.exhaustive(tables)?,
            Method::Dense => self.dense(tables)?,
            Method::Mps { max_bond } => self.mps(tables, max_bond)?,
        };
        if !value.is_finite() {
            return Err(GkpError::NumericalFailure(format!(
                "partition function evaluated to {value} ({method:?}, {} spins, {} factors)",
                self.n_spins(),
                self.factors.len()
            )));
        }
        Ok(value)
    }

    fn exhaustive(&self, tables: &[[f64; 4]]) -> Result<f64> {
        let total_bits = self.bits * self.n_spins() as u32;
        if total_bits > EXHAUSTIVE_BIT_LIMIT {
            return Err(GkpError::Infeasible(format!(
                "exhaustive enumeration over 2^{total_bits} configurations exceeds 2^{EXHAUSTIVE_BIT_LIMIT}"
            )));
        }
        let mut labels = vec![0usize; self.factors.len()];
        let recompute = |labels: &[usize]| {
            let mut sum = 0.0;
            let mut dead = 0usize;
            for (t, &l) in tables.iter().zip(labels) {
                if t[l] == f64::NEG_INFINITY {
                    dead += 1;
                } else {
                    sum += t[l];
                }
            }
            (sum, dead)
        };
        let (mut sum, mut dead) = recompute(&labels);
        let mut acc = StreamingLse::default();
        acc.push(if dead == 0 { sum } else { f64::NEG_INFINITY });
        for k in 1..(1u64 << total_bits) {
            let bit = k.trailing_zeros();
            let site = (bit / self.bits) as usize;
            let delta = 1usize << (bit % self.bits);
            for &f in &self.site_factors[site] {
                let old = tables[f][labels[f]];
                labels[f] ^= delta;
                let new = tables[f][labels[f]];
                match (old == f64::NEG_INFINITY, new == f64::NEG_INFINITY) {
                    (false, false) => sum += new - old,
                    (false, true) => {
                        sum -= old;
                        dead += 1;
                    }
                    (true, false) => {
                        sum += new;
                        dead -= 1;
                    }
                    (true, true) => {}
                }
            }
            if k % RECOMPUTE_PERIOD == 0 {
                (sum, dead) = recompute(&labels);
            }
            acc.push(if dead == 0 { sum } else { f64::NEG_INFINITY });
        }
        Ok(acc.value())
    }

    fn dense(&self, tables: &[[f64; 4]]) -> Result<f64> {
        let entries = (self.q as f64).powi(self.max_boundary as i32);
        if entries > DENSE_ENTRY_LIMIT as f64 {
            return Err(GkpError::Infeasible(format!(
                "dense boundary of {} spins exceeds {DENSE_ENTRY_LIMIT} entries",
                self.max_boundary
            )));
        }
        let mask = self.q - 1;
        let mut live: Vec<usize> = Vec::new();
        let mut data = vec![1.0f64];
        let mut log_scale = 0.0;
        for step in &self.schedule {
            match *step {
                Step::Add(s) => {
                    let len = data.len();
                    data.reserve(len * (self.q - 1));
                    for _ in 1..self.q {
                        data.extend_from_within(..len);
                    }
                    live.push(s);
                }
                Step::Apply(f) => {
                    let (factor, shift) = exp_table(&tables[f], self.q);
                    let shifts: Vec<u32> = self.factors[f]
                        .iter()
                        .map(|s| self.bits * live.iter().position(|t| t == s).expect("live spin") as u32)
                        .collect();
                    let mut max = 0.0f64;
                    for (idx, v) in data.iter_mut().enumerate() {
                        let l = shifts.iter().fold(0, |acc, &sh| acc ^ (idx >> sh) & mask);
                        *v *= factor[l];
                        max = max.max(*v);
                    }
                    if max <= 0.0 {
                        return Ok(f64::NEG_INFINITY);
                    }
                    data.iter_mut().for_each(|v| *v /= max);
                    log_scale += max.ln() + shift;
                }
                Step::Eliminate(s) => {
                    let axis = live.iter().position(|&t| t == s).expect("live spin");
                    let stride = 1usize << (self.bits as usize * axis);
                    let block = stride * self.q;
                    let mut out = Vec::with_capacity(data.len() / self.q);
                    for chunk in data.chunks_exact(block) {
                        for lo in 0..stride {
                            out.push((0..self.q).map(|v| chunk[v * stride + lo]).sum::<f64>());
                        }
                    }
                    data = out;
                    live.remove(axis);
                }
            }
        }
        debug_assert_eq!(data.len(), 1);
        Ok(data[0].ln() + log_scale)
    }

    fn mps(&self, tables: &[[f64; 4]], max_bond: usize) -> Result<f64> {
        let mut chain = Mps::new(self.q, max_bond);
        for step in &self.schedule {
            match *step {
                Step::Add(s) => {
                    let key = self.chain_key(s);
                    let pos = chain.sites.partition_point(|&t| self.chain_key(t) < key);
                    chain.insert(pos, s);
                }
                Step::Apply(f) => {
                    let pos: Vec<usize> = self.factors[f]
                        .iter()
                        .map(|s| chain.sites.iter().position(|t| t == s).expect("live spin"))
                        .collect();
                    let (factor, shift) = exp_table(&tables[f], self.q);
                    chain.apply(&pos, &factor)?;
                    chain.log_scale += shift;
                }
                Step::Eliminate(s) => {
                    let pos = chain.sites.iter().position(|&t| t == s).expect("live spin");
                    chain.eliminate(pos)?;
                }
            }
        }
        Ok(chain.log_scale)
    }

    fn chain_key(&self, s: usize) -> (i32, i32, usize) {
        let (row, x) = self.positions[s];
        (x, row, s)
    }
}

/// `exp(table − max)` and `max`.
fn exp_table(table: &[f64; 4], q: usize) -> ([f64; 4], f64) {
    let max = table[..q].iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let shift = if max.is_finite() { max } else { 0.0 };
    let mut out = [0.0; 4];
    for (o, &t) in out.iter_mut().zip(&table[..q]) {
        *o = (t - shift).exp();
    }
    (out, shift)
}

/// Thin SVD `m = u·diag(s)·vt`, singular values descending.
fn svd(m: &DMatrix<f64>) -> Result<(DMatrix<f64>, nalgebra::DVector<f64>, DMatrix<f64>)> {
    let f = faer::Mat::<f64>::from_fn(m.nrows(), m.ncols(), |i, j| m[(i, j)]);
    let svd = f
        .thin_svd()
        .map_err(|e| GkpError::NumericalFailure(format!("SVD did not converge: {e:?}")))?;
    let (u, s, v) = (svd.U(), svd.S().column_vector(), svd.V());
    let k = s.nrows();
    Ok((
        DMatrix::from_fn(m.nrows(), k, |i, j| u[(i, j)]),
        nalgebra::DVector::from_fn(k, |i, _| s[i]),
        DMatrix::from_fn(k, m.ncols(), |i, j| v[(j, i)]),
    ))
}

/// Row-major reshape.
fn reshape(m: &DMatrix<f64>, rows: usize, cols: usize) -> DMatrix<f64> {
    debug_assert_eq!(rows * cols, m.len());
    let c = m.ncols();
    DMatrix::from_fn(rows, cols, |i, j| {
        let f = i * cols + j;
        m[(f / c, f % c)]
    })
}

/// Boundary state as a matrix product state in mixed canonical form.
///
/// Site tensors are stored left-grouped as `(χ_left·q) × χ_right` matrices.
/// Sites left of `center` are left-orthonormal, sites right of it are
/// right-orthonormal.
struct Mps {
    q: usize,
    max_bond: usize,
    sites: Vec<usize>,
    tensors: Vec<DMatrix<f64>>,
    center: usize,
    log_scale: f64,
}

impl Mps {
    fn new(q: usize, max_bond: usize) -> Self {
        Self {
            q,
            max_bond,
            sites: Vec::new(),
            tensors: Vec::new(),
            center: 0,
            log_scale: 0.0,
        }
    }

    fn left_bond(&self, k: usize) -> usize {
        self.tensors[k].nrows() / self.q
    }

    /// Inserts `δ_ab/√q` for every spin value; both orthonormality conditions hold.
    fn insert(&mut self, pos: usize, site: usize) {
        let chi = if pos > 0 {
            self.tensors[pos - 1].ncols()
        } else if self.tensors.is_empty() {
            1
        } else {
            self.left_bond(0)
        };
        let q = self.q;
        let norm = 1.0 / (q as f64).sqrt();
        let t = DMatrix::from_fn(chi * q, chi, |row, b| if row / q == b { norm } else { 0.0 });
        self.log_scale += 0.5 * (q as f64).ln();
        if !self.tensors.is_empty() && pos <= self.center {
            self.center += 1;
        }
        self.tensors.insert(pos, t);
        self.sites.insert(pos, site);
    }

    fn move_center(&mut self, target: usize) {
        while self.center < target {
            self.push_right(self.center);
            self.center += 1;
        }
        while self.center > target {
            self.push_left(self.center);
            self.center -= 1;
        }
    }

    /// QR of site `k`; the triangular factor moves into site `k + 1`.
    fn push_right(&mut self, k: usize) {
        let qr = self.tensors[k].clone().qr();
        let (q_mat, r_mat) = (qr.q(), qr.r());
        let next = &self.tensors[k + 1];
        let chi = next.nrows() / self.q;
        let grouped = reshape(next, chi, self.q * next.ncols());
        let merged = &r_mat * grouped;
        self.tensors[k + 1] = reshape(&merged, r_mat.nrows() * self.q, next.ncols());
        self.tensors[k] = q_mat;
    }

    /// LQ of site `k`; the triangular factor moves into site `k − 1`.
    fn push_left(&mut self, k: usize) {
        let t = &self.tensors[k];
        let chi = t.nrows() / self.q;
        let right = t.ncols();
        let grouped = reshape(t, chi, self.q * right);
        let qr = grouped.transpose().qr();
        let (q_mat, r_mat) = (qr.q(), qr.r());
        let kept = q_mat.ncols();
        self.tensors[k] = reshape(&q_mat.transpose(), kept * self.q, right);
        self.tensors[k - 1] = &self.tensors[k - 1] * r_mat.transpose();
    }

    fn normalize_center(&mut self) -> Result<()> {
        let t = &mut self.tensors[self.center];
        let max = t.amax();
        if !(max > 0.0 && max.is_finite()) {
            return Err(GkpError::NumericalFailure(format!(
                "boundary state degenerated (max entry {max})"
            )));
        }
        *t /= max;
        self.log_scale += max.ln();
        Ok(())
    }

    /// Multiplies by `factor[⊕ spins at positions]` and re-splits the window.
    fn apply(&mut self, positions: &[usize], factor: &[f64; 4]) -> Result<()> {
        let q = self.q;
        let lo = *positions.iter().min().expect("non-empty factor");
        let hi = *positions.iter().max().expect("non-empty factor");
        let width = hi - lo + 1;
        self.move_center(lo);
        let chi_left = self.left_bond(lo);
        let mut theta = self.tensors[lo].clone();
        for k in lo + 1..=hi {
            let rows = theta.nrows();
            let next = &self.tensors[k];
            let chi = next.nrows() / q;
            let product = theta * reshape(next, chi, q * next.ncols());
            theta = reshape(&product, rows * q, next.ncols());
        }
        let phys = q.pow(width as u32);
        let digit = |spins: usize, offset: usize| spins / q.pow((width - 1 - offset) as u32) % q;
        for row in 0..theta.nrows() {
            let spins = row % phys;
            let l = positions.iter().fold(0, |acc, &p| acc ^ digit(spins, p - lo));
            let f = factor[l];
            if f != 1.0 {
                theta.row_mut(row).scale_mut(f);
            }
        }
        let right = theta.ncols();
        let mut chi = chi_left;
        let mut rest = phys / q;
        for k in lo..hi {
            let m = reshape(&theta, chi * q, rest * right);
            let (u, vt) = self.truncated_split(m)?;
            chi = u.ncols();
            self.tensors[k] = u;
            theta = reshape(&vt, chi * rest, right);
            rest /= q;
        }
        self.tensors[hi] = theta;
        self.center = hi;
        self.normalize_center()
    }

    /// `m ≈ U · (S Vᵀ)` with truncation and the largest entry of each column of `U` positive.
    fn truncated_split(&self, m: DMatrix<f64>) -> Result<(DMatrix<f64>, DMatrix<f64>)> {
        let (u, s, vt) = svd(&m)?;
        let mut order: Vec<usize> = (0..s.len()).collect();
        order.sort_by(|&a, &b| s[b].total_cmp(&s[a]));
        let s_max = s[order[0]];
        if !(s_max > 0.0 && s_max.is_finite()) {
            return Err(GkpError::NumericalFailure(format!("largest singular value is {s_max}")));
        }
        let mut keep: Vec<usize> = order
            .into_iter()
            .take_while(|&i| s[i] > SVD_RELATIVE_CUTOFF * s_max)
            .collect();
        if self.max_bond > 0 {
            keep.truncate(self.max_bond);
        }
        let mut u_out = DMatrix::zeros(u.nrows(), keep.len());
        let mut vt_out = DMatrix::zeros(keep.len(), vt.ncols());
        for (j, &i) in keep.iter().enumerate() {
            let col = u.column(i);
            let pivot = col
                .iter()
                .copied()
                .fold(0.0f64, |a, x| if x.abs() > a.abs() { x } else { a });
            let sign = if pivot < 0.0 { -1.0 } else { 1.0 };
            u_out.set_column(j, &(col * sign));
            vt_out.set_row(j, &(vt.row(i) * (sign * s[i])));
        }
        Ok((u_out, vt_out))
    }

    /// Sums out the spin at `pos` and absorbs the remaining bond matrix into a neighbour.
    fn eliminate(&mut self, pos: usize) -> Result<()> {
        let q = self.q;
        let t = self.tensors.remove(pos);
        self.sites.remove(pos);
        let chi = t.nrows() / q;
        let summed: DMatrix<f64> =
            DMatrix::from_fn(chi, t.ncols(), |a, b| (0..q).map(|s| t[(a * q + s, b)]).sum::<f64>());
        if self.tensors.is_empty() {
            let value = summed[(0, 0)];
            if !(value > 0.0 && value.is_finite()) {
                return Err(GkpError::NumericalFailure(format!(
                    "final contraction value {value} is not positive"
                )));
            }
            self.log_scale += value.ln();
            self.center = 0;
            return Ok(());
        }
        let old_center = self.center;
        let neighbour = if pos > 0 {
            self.tensors[pos - 1] = &self.tensors[pos - 1] * summed;
            pos - 1
        } else {
            let next = &self.tensors[0];
            let right = next.ncols();
            let grouped = reshape(next, next.nrows() / q, q * right);
            let merged = summed * grouped;
            self.tensors[0] = reshape(&merged, merged.nrows() * q, right);
            0
        };
        let center = match old_center.cmp(&pos) {
            std::cmp::Ordering::Less => old_center,
            std::cmp::Ordering::Greater => old_center - 1,
            std::cmp::Ordering::Equal => neighbour,
        };
        self.center = neighbour;
        self.move_center(center);
        self.normalize_center()
    }
}
