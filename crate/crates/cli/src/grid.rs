//! Parsing of distance lists and σ grids.

use std::str::FromStr;

use serde::Deserialize;

/// Grid points are rounded to this many decimals so that `0.55:0.61:0.005`
/// yields the same values as typing them out.
const GRID_DECIMALS: i32 = 12;

// Aliases keep clap from treating the fields as repeated arguments.
pub type DistanceList = Vec<usize>;
pub type SigmaGrid = Vec<f64>;

/// `"3,5,7"`.
pub fn parse_distances(s: &str) -> Result<Vec<usize>, String> {
    s.split(',')
        .map(|t| {
            let t = t.trim();
            usize::from_str(t).map_err(|_| format!("not a distance: {t:?}"))
        })
        .collect()
}

/// Either an inclusive range `start:stop:step` or a comma-separated list.
pub fn parse_sigmas(s: &str) -> Result<Vec<f64>, String> {
    let s = s.trim();
    if s.contains(':') {
        let parts: Vec<f64> = s
            .split(':')
            .map(|t| f64::from_str(t.trim()).map_err(|_| format!("not a number: {t:?}")))
            .collect::<Result<_, _>>()?;
        let [start, stop, step] = parts[..] else {
            return Err(format!("expected start:stop:step, got {s:?}"));
        };
        return range(start, stop, step);
    }
    s.split(',')
        .map(|t| f64::from_str(t.trim()).map_err(|_| format!("not a number: {t:?}")))
        .collect()
}

fn range(start: f64, stop: f64, step: f64) -> Result<Vec<f64>, String> {
    if !(step > 0.0 && start.is_finite() && stop.is_finite()) || stop < start {
        return Err(format!("bad range {start}:{stop}:{step}"));
    }
    // Tolerates `stop` landing a rounding error short of a grid point.
    let count = ((stop - start) / step + 1e-9).floor() as usize + 1;
    let scale = 10f64.powi(GRID_DECIMALS);
    Ok((0..count)
        .map(|i| ((start + i as f64 * step) * scale).round() / scale)
        .collect())
}

/// A list given either as an array or in its command-line string form.
#[derive(Debug, Clone, Deserialize)]
#[serde(untagged)]
pub enum ListOrString<T> {
    List(Vec<T>),
    Text(String),
}

impl ListOrString<usize> {
    pub fn distances(self) -> Result<Vec<usize>, String> {
        match self {
            ListOrString::List(v) => Ok(v),
            ListOrString::Text(s) => parse_distances(&s),
        }
    }
}

impl ListOrString<f64> {
    pub fn sigmas(self) -> Result<Vec<f64>, String> {
        match self {
            ListOrString::List(v) => Ok(v),
            ListOrString::Text(s) => parse_sigmas(&s),
        }
    }
}
