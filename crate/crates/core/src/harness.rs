//! Monte Carlo sweeps over distances and noise strengths, CSV output and
//! post-processing (optimal distance, crossing points, plateau checks).
//!
//! Trial `i` of every cell draws its shift from stream `i` of the run seed,
//! and trials are processed in fixed-size chunks whose counts are summed, so
//! results do not depend on the worker count or scheduling.

use std::io::{Read, Write};
use std::path::PathBuf;
use std::time::{Duration, Instant};

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::channel::{candidate_error, sample_shift, SeedPath};
use crate::codes::{build_layout, Family};
use crate::decoders::{Decoder, DecoderConfig, DecoderKind};
use crate::error::{GkpError, Result};
use crate::lattice::{logical_class_of, pauli_displacement, LogicalClass};
use crate::rates::{hashing_rate, hashing_rate_se, wilson_interval, PauliChannelEstimate, Z_95};

/// Trials per work unit.
pub const CHUNK_TRIALS: u64 = 256;

/// Significance (in standard errors) of the pairwise tests in [`plateau_check`].
pub const PLATEAU_Z: f64 = 3.0;

/// Two σ values closer than this are the same grid point.
pub const SIGMA_MATCH_TOL: f64 = 1e-12;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExperimentConfig {
    pub family: Family,
    pub distances: Vec<usize>,
    pub sigmas: Vec<f64>,
    pub trials: u64,
    pub run_seed: u64,
    pub decoder: DecoderConfig,
    pub output_path: Option<PathBuf>,
    pub workers: usize,
}

impl ExperimentConfig {
    pub fn validate(&self) -> Result<()> {
        let bad = |msg: String| Err(GkpError::InvalidParameter(msg));
        if self.trials == 0 {
            return bad("trials must be at least 1".into());
        }
        if self.workers == 0 {
            return bad("workers must be at least 1".into());
        }
        if self.distances.is_empty() || self.sigmas.is_empty() {
            return bad("at least one distance and one sigma are required".into());
        }
        if let Some(d) = self.distances.iter().find(|&&d| d % 2 == 0) {
            return bad(format!("distance {d} is not odd"));
        }
        if self.sigmas.iter().any(|&s| !(s > 0.0 && s.is_finite())) {
            return bad(format!("sigmas must be positive: {:?}", self.sigmas));
        }
        if self.sigmas.windows(2).any(|w| w[1] <= w[0]) {
            return bad(format!("sigmas must be strictly increasing: {:?}", self.sigmas));
        }
        Ok(())
    }
}

/// One CSV row: the outcome of one `(d, σ)` cell.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepRow {
    pub family: Family,
    pub d: usize,
    #[serde(rename = "N")]
    pub n_modes: usize,
    pub sigma: f64,
    pub trials: u64,
    #[serde(rename = "n_I")]
    pub n_i: u64,
    #[serde(rename = "n_X")]
    pub n_x: u64,
    #[serde(rename = "n_Y")]
    pub n_y: u64,
    #[serde(rename = "n_Z")]
    pub n_z: u64,
    pub fidelity: f64,
    pub fidelity_ci_lo: f64,
    pub fidelity_ci_hi: f64,
    pub rate: f64,
    pub seed: u64,
    pub decoder: DecoderKind,
    pub max_bond: usize,
    pub nv: usize,
}

impl SweepRow {
    /// Builds a row from class counts in `LogicalClass::ALL` order.
    #[allow(clippy::too_many_arguments)]
    pub fn from_counts(
        family: Family,
        d: usize,
        n_modes: usize,
        sigma: f64,
        counts: [u64; 4],
        seed: u64,
        decoder: DecoderConfig,
    ) -> Result<Self> {
        let estimate = PauliChannelEstimate::from_counts(counts)?;
        let (lo, hi) = wilson_interval(counts[0], estimate.trials);
        Ok(Self {
            family,
            d,
            n_modes,
            sigma,
            trials: estimate.trials,
            n_i: counts[0],
            n_x: counts[1],
            n_y: counts[2],
            n_z: counts[3],
            fidelity: estimate.fidelity(),
            fidelity_ci_lo: lo,
            fidelity_ci_hi: hi,
            rate: hashing_rate(&estimate, n_modes),
            seed,
            decoder: decoder.kind,
            max_bond: decoder.max_bond,
            nv: decoder.n_v,
        })
    }

    pub fn counts(&self) -> [u64; 4] {
        [self.n_i, self.n_x, self.n_y, self.n_z]
    }

    pub fn estimate(&self) -> Result<PauliChannelEstimate> {
        PauliChannelEstimate::from_counts(self.counts())
    }

    /// Binomial standard error of the fidelity.
    pub fn fidelity_se(&self) -> f64 {
        (self.fidelity * (1.0 - self.fidelity) / self.trials as f64).sqrt()
    }

    pub fn rate_se(&self) -> Result<f64> {
        Ok(hashing_rate_se(&self.estimate()?, self.n_modes))
    }
}

/// A cell that could not be run.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CellError {
    pub d: usize,
    pub sigma: f64,
    pub message: String,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SweepResult {
    pub rows: Vec<SweepRow>,
    /// Wall time of each row.
    pub wall_times: Vec<Duration>,
    pub errors: Vec<CellError>,
}

/// Decodes trial `seed_path` and returns the class of `ξ − η_s − l*`; the
/// trial succeeds iff it is `I`.
pub fn score_trial(decoder: &Decoder, sigma: f64, seed_path: SeedPath) -> Result<LogicalClass> {
    let layout = decoder.layout();
    let sample = sample_shift(sigma, layout.n_modes(), seed_path)?;
    let record = candidate_error(&sample.xi, layout)?;
    let decoded = decoder.decode(&record, sigma)?;
    let residual = sample
        .xi
        .sub(&record.candidate)?
        .sub(&pauli_displacement(&layout.logical(decoded.chosen), layout))?;
    logical_class_of(&residual, layout)
}

/// Class counts of trials `0..trials` in `LogicalClass::ALL` order, computed
/// on the current rayon pool.
pub fn simulate_cell(decoder: &Decoder, sigma: f64, trials: u64, run_seed: u64) -> Result<[u64; 4]> {
    let chunks = trials.div_ceil(CHUNK_TRIALS);
    (0..chunks)
        .into_par_iter()
        .map(|k| {
            let mut counts = [0u64; 4];
            for i in k * CHUNK_TRIALS..((k + 1) * CHUNK_TRIALS).min(trials) {
                counts[score_trial(decoder, sigma, SeedPath::new(run_seed, i))?.index()] += 1;
            }
            Ok(counts)
        })
        .try_reduce(|| [0; 4], |a, b| Ok(std::array::from_fn(|c| a[c] + b[c])))
}

/// Runs every `(d, σ)` cell of `config`. Cells whose decoder cannot be built
/// or fails are recorded in `errors` and the sweep continues.
pub fn run_sweep(config: &ExperimentConfig) -> Result<SweepResult> {
    config.validate()?;
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(config.workers)
        .build()
        .map_err(|e| GkpError::InvalidParameter(format!("cannot start {} workers: {e}", config.workers)))?;
    let mut result = SweepResult {
        rows: Vec::new(),
        wall_times: Vec::new(),
        errors: Vec::new(),
    };
    for &d in &config.distances {
        let decoder = build_layout(config.family, d).and_then(|l| Decoder::new(&l, config.decoder));
        let decoder = match decoder {
            Ok(decoder) => decoder,
            Err(e) => {
                result.errors.extend(config.sigmas.iter().map(|&sigma| CellError {
                    d,
                    sigma,
                    message: e.to_string(),
                }));
                continue;
            }
        };
        for &sigma in &config.sigmas {
            let start = Instant::now();
            let counts = pool.install(|| simulate_cell(&decoder, sigma, config.trials, config.run_seed));
            let row = counts.and_then(|counts| {
                SweepRow::from_counts(
                    config.family,
                    d,
                    decoder.layout().n_modes(),
                    sigma,
                    counts,
                    config.run_seed,
                    config.decoder,
                )
            });
            match row {
                Ok(row) => {
                    result.rows.push(row);
                    result.wall_times.push(start.elapsed());
                }
                Err(e) => result.errors.push(CellError {
                    d,
                    sigma,
                    message: e.to_string(),
                }),
            }
        }
    }
    Ok(result)
}

/// Writes rows as CSV, preceded by `# generated <unix seconds>` when a
/// timestamp is given.
pub fn write_csv<W: Write>(rows: &[SweepRow], mut out: W, timestamp: Option<u64>) -> Result<()> {
    if let Some(t) = timestamp {
        writeln!(out, "# generated {t}")?;
    }
    let mut writer = csv::Writer::from_writer(out);
    for row in rows {
        writer.serialize(row)?;
    }
    if rows.is_empty() {
        writer.write_record(CSV_COLUMNS)?;
    }
    writer.flush()?;
    Ok(())
}

/// Column order of the sweep CSV.
pub const CSV_COLUMNS: [&str; 17] = [
    "family",
    "d",
    "N",
    "sigma",
    "trials",
    "n_I",
    "n_X",
    "n_Y",
    "n_Z",
    "fidelity",
    "fidelity_ci_lo",
    "fidelity_ci_hi",
    "rate",
    "seed",
    "decoder",
    "max_bond",
    "nv",
];

/// Reads rows written by [`write_csv`]; `#` lines are skipped.
pub fn read_csv<R: Read>(input: R) -> Result<Vec<SweepRow>> {
    let mut reader = csv::ReaderBuilder::new().comment(Some(b'#')).from_reader(input);
    reader.deserialize().map(|r| r.map_err(GkpError::from)).collect()
}

fn rows_at(rows: &[SweepRow], sigma: f64) -> Vec<&SweepRow> {
    rows.iter()
        .filter(|r| (r.sigma - sigma).abs() < SIGMA_MATCH_TOL)
        .collect()
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct OptimalDistance {
    pub d: usize,
    pub rate: f64,
    /// The 95% rate intervals of the best and runner-up distances overlap.
    pub overlap: bool,
    /// Only one distance was available.
    pub degenerate: bool,
}

/// Distance with the highest achievable rate at `sigma`; ties go to the smaller distance.
pub fn optimal_distance_rate(rows: &[SweepRow], sigma: f64) -> Result<OptimalDistance> {
    let mut at = rows_at(rows, sigma);
    if at.is_empty() {
        return Err(GkpError::MissingData(format!("no rows at sigma = {sigma}")));
    }
    at.sort_by(|a, b| b.rate.total_cmp(&a.rate).then(a.d.cmp(&b.d)));
    let best = at[0];
    let overlap = match at.get(1) {
        Some(second) => best.rate - Z_95 * best.rate_se()? <= second.rate + Z_95 * second.rate_se()?,
        None => false,
    };
    Ok(OptimalDistance {
        d: best.d,
        rate: best.rate,
        overlap,
        degenerate: at.len() == 1,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Crossing {
    pub sigma: f64,
    pub ci_lo: f64,
    pub ci_hi: f64,
}

/// First zero of the piecewise-linear curve through `(x, y)`.
fn first_zero(x: &[f64], y: &[f64]) -> Option<f64> {
    for k in 0..x.len() {
        if y[k] == 0.0 {
            return Some(x[k]);
        }
        if k + 1 < x.len() && (y[k] > 0.0) != (y[k + 1] > 0.0) && y[k + 1] != 0.0 {
            return Some(x[k] + y[k] * (x[k + 1] - x[k]) / (y[k] - y[k + 1]));
        }
    }
    None
}

/// Where the fidelity curves of distances `d` and `d2` cross, by linear
/// interpolation of `F_d − F_d2` on their common σ grid.
///
/// The interval spans the zeros of the difference's Wilson lower and upper
/// envelopes; an envelope without a zero extends it to the grid edge.
pub fn crossing_point(rows: &[SweepRow], d: usize, d2: usize) -> Result<Crossing> {
    let mut grid: Vec<(f64, &SweepRow, &SweepRow)> = Vec::new();
    for a in rows.iter().filter(|r| r.d == d) {
        if let Some(b) = rows
            .iter()
            .find(|r| r.d == d2 && (r.sigma - a.sigma).abs() < SIGMA_MATCH_TOL)
        {
            grid.push((a.sigma, a, b));
        }
    }
    grid.sort_by(|a, b| a.0.total_cmp(&b.0));
    if grid.len() < 2 {
        return Err(GkpError::MissingData(format!(
            "fewer than two common sigmas for d={d} and d={d2}"
        )));
    }
    let x: Vec<f64> = grid.iter().map(|g| g.0).collect();
    let diff: Vec<f64> = grid.iter().map(|(_, a, b)| a.fidelity - b.fidelity).collect();
    let lower: Vec<f64> = grid
        .iter()
        .map(|(_, a, b)| a.fidelity_ci_lo - b.fidelity_ci_hi)
        .collect();
    let upper: Vec<f64> = grid
        .iter()
        .map(|(_, a, b)| a.fidelity_ci_hi - b.fidelity_ci_lo)
        .collect();
    let sigma = first_zero(&x, &diff).ok_or(GkpError::NoCrossing { d, d2 })?;
    let (first, last) = (x[0], x[x.len() - 1]);
    let (ci_lo, ci_hi) = match (first_zero(&x, &lower), first_zero(&x, &upper)) {
        (Some(a), Some(b)) => (a.min(b).min(sigma), a.max(b).max(sigma)),
        _ => (first, last),
    };
    Ok(Crossing { sigma, ci_lo, ci_hi })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Trend {
    Increasing,
    Flat,
    Decreasing,
    Ambiguous,
}

/// Classifies fidelity versus distance at one σ.
///
/// Each consecutive pair of distances is compared with a two-sample z-test
/// at [`PLATEAU_Z`]. All pairs significantly up (down) gives increasing
/// (decreasing); no significant pair among all pairs gives flat.
pub fn plateau_check(rows_at_sigma: &[SweepRow], distances: &[usize]) -> Result<Trend> {
    let mut ds = distances.to_vec();
    ds.sort_unstable();
    ds.dedup();
    if ds.len() < 3 {
        return Err(GkpError::MissingData(format!(
            "plateau check needs three distances, got {ds:?}"
        )));
    }
    let rows: Vec<&SweepRow> = ds
        .iter()
        .map(|&d| {
            rows_at_sigma
                .iter()
                .find(|r| r.d == d)
                .ok_or_else(|| GkpError::MissingData(format!("no row for d={d}")))
        })
        .collect::<Result<_>>()?;
    if rows
        .windows(2)
        .any(|w| (w[0].sigma - w[1].sigma).abs() >= SIGMA_MATCH_TOL)
    {
        return Err(GkpError::InvalidInput("rows span more than one sigma".into()));
    }
    let z = |a: &SweepRow, b: &SweepRow| {
        let se = (a.fidelity_se().powi(2) + b.fidelity_se().powi(2)).sqrt();
        let delta = b.fidelity - a.fidelity;
        if se > 0.0 {
            delta / se
        } else if delta == 0.0 {
            0.0
        } else {
            delta.signum() * f64::INFINITY
        }
    };
    let steps: Vec<f64> = rows.windows(2).map(|w| z(w[0], w[1])).collect();
    if steps.iter().all(|&s| s > PLATEAU_Z) {
        return Ok(Trend::Increasing);
    }
    if steps.iter().all(|&s| s < -PLATEAU_Z) {
        return Ok(Trend::Decreasing);
    }
    let any_significant = (0..rows.len())
        .flat_map(|i| (i + 1..rows.len()).map(move |j| (i, j)))
        .any(|(i, j)| z(rows[i], rows[j]).abs() > PLATEAU_Z);
    Ok(if any_significant { Trend::Ambiguous } else { Trend::Flat })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn fixture(d: usize, sigma: f64, n_i: u64, trials: u64) -> SweepRow {
        let config = DecoderConfig::default();
        SweepRow::from_counts(
            Family::SurfaceSquare,
            d,
            d * d,
            sigma,
            [n_i, trials - n_i, 0, 0],
            1,
            config,
        )
        .unwrap()
    }

    fn config(workers: usize) -> ExperimentConfig {
        ExperimentConfig {
            family: Family::SurfaceSquare,
            distances: vec![1, 3],
            sigmas: vec![0.45, 0.6],
            trials: 600,
            run_seed: 42,
            decoder: DecoderConfig::default(),
            output_path: None,
            workers,
        }
    }

    #[test]
    fn config_validation() {
        let mut c = config(1);
        assert!(c.validate().is_ok());
        c.sigmas = vec![0.6, 0.5];
        assert!(c.validate().is_err());
        let mut c = config(1);
        c.distances = vec![4];
        assert!(c.validate().is_err());
        let mut c = config(1);
        c.trials = 0;
        assert!(c.validate().is_err());
    }

    #[test]
    fn rows_are_consistent() {
        let result = run_sweep(&config(2)).unwrap();
        assert!(result.errors.is_empty());
        assert_eq!(result.rows.len(), 4);
        for row in &result.rows {
            assert_eq!(row.counts().iter().sum::<u64>(), row.trials);
            let est = row.estimate().unwrap();
            assert_eq!(row.fidelity, est.p[0]);
            assert!((row.rate - hashing_rate(&est, row.n_modes)).abs() < 1e-12);
            assert!(row.fidelity_ci_lo <= row.fidelity && row.fidelity <= row.fidelity_ci_hi);
        }
    }

    #[test]
    fn worker_count_does_not_change_output() {
        let mut outputs = Vec::new();
        for workers in [1, 3] {
            let mut buf = Vec::new();
            write_csv(&run_sweep(&config(workers)).unwrap().rows, &mut buf, None).unwrap();
            outputs.push(buf);
        }
        assert_eq!(outputs[0], outputs[1]);
    }

    #[test]
    fn csv_round_trip() {
        let rows = vec![fixture(3, 0.55, 900, 1000), fixture(5, 0.55, 950, 1000)];
        let mut buf = Vec::new();
        write_csv(&rows, &mut buf, Some(1_700_000_000)).unwrap();
        let text = String::from_utf8(buf.clone()).unwrap();
        assert!(text.starts_with("# generated 1700000000\n"));
        assert!(text.lines().nth(1).unwrap().starts_with(&CSV_COLUMNS.join(",")));
        assert_eq!(read_csv(buf.as_slice()).unwrap(), rows);
    }

    #[test]
    fn infeasible_cells_are_recorded() {
        let mut c = config(1);
        c.decoder = DecoderConfig::new(DecoderKind::BruteForce, 4, 0);
        c.distances = vec![3, 7];
        c.trials = 10;
        let result = run_sweep(&c).unwrap();
        assert_eq!(result.rows.len(), 2);
        assert_eq!(result.errors.len(), 2);
        assert!(result.errors.iter().all(|e| e.d == 7));
    }

    #[test]
    fn crossing_fixture_midpoint() {
        let rows = vec![
            fixture(3, 0.58, 90_000, 100_000),
            fixture(5, 0.58, 88_000, 100_000),
            fixture(3, 0.60, 88_000, 100_000),
            fixture(5, 0.60, 90_000, 100_000),
        ];
        let c = crossing_point(&rows, 3, 5).unwrap();
        assert!((c.sigma - 0.59).abs() < 1e-12);
        assert!(c.ci_lo <= c.sigma && c.sigma <= c.ci_hi);
        assert!(c.ci_lo >= 0.58 && c.ci_hi <= 0.60);
    }

    #[test]
    fn no_crossing_is_an_error() {
        let rows = vec![
            fixture(3, 0.58, 90_000, 100_000),
            fixture(5, 0.58, 88_000, 100_000),
            fixture(3, 0.60, 89_000, 100_000),
            fixture(5, 0.60, 87_000, 100_000),
        ];
        assert!(matches!(
            crossing_point(&rows, 3, 5),
            Err(GkpError::NoCrossing { d: 3, d2: 5 })
        ));
    }

    #[test]
    fn plateau_fixtures() {
        let up = vec![
            fixture(3, 0.5, 80_000, 100_000),
            fixture(5, 0.5, 85_000, 100_000),
            fixture(7, 0.5, 90_000, 100_000),
        ];
        assert_eq!(plateau_check(&up, &[3, 5, 7]).unwrap(), Trend::Increasing);
        let down: Vec<SweepRow> = up
            .iter()
            .rev()
            .zip([3, 5, 7])
            .map(|(r, d)| SweepRow { d, ..r.clone() })
            .collect();
        assert_eq!(plateau_check(&down, &[3, 5, 7]).unwrap(), Trend::Decreasing);
        let flat = vec![
            fixture(3, 0.5, 800, 1000),
            fixture(5, 0.5, 801, 1000),
            fixture(7, 0.5, 799, 1000),
        ];
        assert_eq!(plateau_check(&flat, &[3, 5, 7]).unwrap(), Trend::Flat);
        let mixed = vec![
            fixture(3, 0.5, 80_000, 100_000),
            fixture(5, 0.5, 90_000, 100_000),
            fixture(7, 0.5, 80_000, 100_000),
        ];
        assert_eq!(plateau_check(&mixed, &[3, 5, 7]).unwrap(), Trend::Ambiguous);
        assert!(plateau_check(&flat, &[3, 5]).is_err());
    }

    #[test]
    fn optimal_distance_selection() {
        let rows = vec![
            fixture(1, 0.5, 990, 1000),
            fixture(3, 0.5, 900, 1000),
            fixture(5, 0.5, 800, 1000),
        ];
        let best = optimal_distance_rate(&rows, 0.5).unwrap();
        assert_eq!(best.d, 1);
        assert!(!best.degenerate);
        let single = optimal_distance_rate(&rows[1..2], 0.5).unwrap();
        assert_eq!(single.d, 3);
        assert!(single.degenerate);
        assert!(matches!(
            optimal_distance_rate(&rows, 0.7),
            Err(GkpError::MissingData(_))
        ));
    }
}
