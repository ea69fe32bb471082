//! Maximum-likelihood and baseline decoders.
//!
//! Every decoder turns a [`SyndromeRecord`] into four log coset weights, one
//! per logical class `c`: the (unnormalized) log-probability that the shift is
//! `η_s + L_c` up to a stabilizer. The decision is their argmax with ties
//! broken in the order I, X, Z, Y.
//!
//! Backends:
//!
//! * brute force over the full stabilizer group (any code with at most 24 generators);
//! * partition function of the unrotated surface code (surface-square);
//! * tensor-network contraction over color-code faces (color-square, color-hex);
//! * a hard-decision minimum-weight baseline.
//!
//! For the contraction backends `max_bond = 0` means no truncation; the
//! boundary is then held exactly, as a dense tensor when it fits.

pub mod baseline;
pub mod brute_force;
pub mod contract;
pub mod partition;
pub mod tensor_network;
pub mod weights;

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::channel::SyndromeRecord;
use crate::codes::{Family, GkpCodeLayout};
use crate::error::{GkpError, Result};
use crate::lattice::LogicalClass;

use self::baseline::Baseline;
use self::brute_force::BruteForce;
use self::contract::Method;
use self::partition::SurfacePartition;
use self::tensor_network::ColorNetwork;
use self::weights::{CosetWeightTable, DEFAULT_NV};

/// How the surface partition function is evaluated.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum PfBackend {
    Exhaustive,
    TensorNetwork { max_bond: usize },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Backend {
    BruteForce,
    PartitionFunction(PfBackend),
    TensorNetwork { max_bond: usize },
    Baseline,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DecodeResult {
    pub chosen: LogicalClass,
    /// Unnormalized log coset weights in `LogicalClass::ALL` order (I, X, Y, Z).
    pub log_coset_weights: [f64; 4],
    pub backend: Backend,
}

/// Argmax with ties resolved in the order I, X, Z, Y.
pub fn argmax_class(weights: &[f64; 4]) -> LogicalClass {
    let mut best = LogicalClass::TIE_ORDER[0];
    for c in LogicalClass::TIE_ORDER {
        if weights[c.index()] > weights[best.index()] {
            best = c;
        }
    }
    best
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum DecoderKind {
    /// Exact decoder of the family: brute force, partition function or tensor network.
    Auto,
    #[serde(rename = "mld-bf")]
    BruteForce,
    #[serde(rename = "mld-pf-exhaustive")]
    PartitionExhaustive,
    #[serde(rename = "mld-pf")]
    PartitionFunction,
    #[serde(rename = "mld-tn")]
    TensorNetwork,
    Baseline,
}

impl DecoderKind {
    pub const ALL: [DecoderKind; 6] = [
        DecoderKind::Auto,
        DecoderKind::BruteForce,
        DecoderKind::PartitionExhaustive,
        DecoderKind::PartitionFunction,
        DecoderKind::TensorNetwork,
        DecoderKind::Baseline,
    ];

    pub fn name(self) -> &'static str {
        match self {
            DecoderKind::Auto => "auto",
            DecoderKind::BruteForce => "mld-bf",
            DecoderKind::PartitionExhaustive => "mld-pf-exhaustive",
            DecoderKind::PartitionFunction => "mld-pf",
            DecoderKind::TensorNetwork => "mld-tn",
            DecoderKind::Baseline => "baseline",
        }
    }
}

impl fmt::Display for DecoderKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for DecoderKind {
    type Err = GkpError;
    fn from_str(s: &str) -> Result<Self> {
        DecoderKind::ALL
            .into_iter()
            .find(|k| k.name() == s)
            .ok_or_else(|| GkpError::InvalidParameter(format!("unknown decoder {s:?}")))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct DecoderConfig {
    pub kind: DecoderKind,
    pub n_v: usize,
    /// Bond-dimension limit of the contraction backends; `0` means unbounded.
    pub max_bond: usize,
}

impl Default for DecoderConfig {
    fn default() -> Self {
        Self {
            kind: DecoderKind::Auto,
            n_v: DEFAULT_NV,
            max_bond: 0,
        }
    }
}

impl DecoderConfig {
    pub fn new(kind: DecoderKind, n_v: usize, max_bond: usize) -> Self {
        Self { kind, n_v, max_bond }
    }
}

#[derive(Debug, Clone)]
enum Engine {
    BruteForce(BruteForce),
    Partition(SurfacePartition, PfBackend),
    Tensor(ColorNetwork, usize),
    Baseline(Baseline),
}

/// A decoder prepared for one layout; immutable and shareable across threads.
#[derive(Debug, Clone)]
pub struct Decoder {
    layout: GkpCodeLayout,
    config: DecoderConfig,
    engine: Engine,
}

impl Decoder {
    pub fn new(layout: &GkpCodeLayout, config: DecoderConfig) -> Result<Self> {
        if config.n_v == 0 {
            return Err(GkpError::InvalidParameter("n_v must be at least 1".into()));
        }
        if config.max_bond == 1 {
            return Err(GkpError::InvalidParameter(
                "max_bond must be 0 (unbounded) or at least 2".into(),
            ));
        }
        let family = layout.family();
        let trivial = layout.stabilizer_generators().is_empty();
        let wrong = |what: &str| {
            Err(GkpError::InvalidParameter(format!(
                "{} decoding does not apply to {family}",
                what
            )))
        };
        let engine = match config.kind {
            DecoderKind::Baseline => Engine::Baseline(Baseline::new(layout)?),
            DecoderKind::BruteForce => Engine::BruteForce(BruteForce::new(layout)?),
            DecoderKind::PartitionExhaustive | DecoderKind::PartitionFunction if family != Family::SurfaceSquare => {
                return wrong("partition-function");
            }
            DecoderKind::TensorNetwork if !matches!(family, Family::ColorSquare | Family::ColorHex) => {
                return wrong("tensor-network");
            }
            _ if trivial => Engine::BruteForce(BruteForce::new(layout)?),
            DecoderKind::PartitionExhaustive => {
                Engine::Partition(SurfacePartition::new(layout)?, PfBackend::Exhaustive)
            }
            DecoderKind::PartitionFunction => Engine::Partition(
                SurfacePartition::new(layout)?,
                PfBackend::TensorNetwork {
                    max_bond: config.max_bond,
                },
            ),
            DecoderKind::TensorNetwork => Engine::Tensor(color_network(layout)?, config.max_bond),
            DecoderKind::Auto => match family {
                Family::SurfaceSquare => Engine::Partition(
                    SurfacePartition::new(layout)?,
                    PfBackend::TensorNetwork {
                        max_bond: config.max_bond,
                    },
                ),
                Family::ColorSquare | Family::ColorHex => Engine::Tensor(color_network(layout)?, config.max_bond),
                _ => Engine::BruteForce(BruteForce::new(layout)?),
            },
        };
        Ok(Self {
            layout: layout.clone(),
            config,
            engine,
        })
    }

    pub fn layout(&self) -> &GkpCodeLayout {
        &self.layout
    }

    pub fn config(&self) -> DecoderConfig {
        self.config
    }

    pub fn backend(&self) -> Backend {
        match &self.engine {
            Engine::BruteForce(_) => Backend::BruteForce,
            Engine::Partition(_, b) => Backend::PartitionFunction(*b),
            Engine::Tensor(_, max_bond) => Backend::TensorNetwork { max_bond: *max_bond },
            Engine::Baseline(_) => Backend::Baseline,
        }
    }

    /// Weight tables used by this decoder (the baseline keeps only the nearest point).
    pub fn weight_table(&self, record: &SyndromeRecord, sigma: f64) -> Result<CosetWeightTable> {
        let n_v = match self.engine {
            Engine::Baseline(_) => 1,
            _ => self.config.n_v,
        };
        CosetWeightTable::build(record, &self.layout, sigma, n_v)
    }

    pub fn decode(&self, record: &SyndromeRecord, sigma: f64) -> Result<DecodeResult> {
        self.decode_table(&self.weight_table(record, sigma)?)
    }

    /// Decodes from precomputed weight tables.
    pub fn decode_table(&self, table: &CosetWeightTable) -> Result<DecodeResult> {
        if table.len() != self.layout.n_modes() {
            return Err(GkpError::InvalidInput(format!(
                "weight table covers {} modes, layout has {}",
                table.len(),
                self.layout.n_modes()
            )));
        }
        let log_coset_weights = match &self.engine {
            Engine::BruteForce(bf) => bf.log_weights(table.labels())?,
            Engine::Baseline(b) => b.log_weights(table.labels())?,
            Engine::Partition(pf, backend) => {
                let method = match *backend {
                    PfBackend::Exhaustive => Method::Exhaustive,
                    PfBackend::TensorNetwork { max_bond } => pf.method_for(max_bond),
                };
                let (q, p) = sides(table)?;
                pf.log_weights(&q, &p, method)?
            }
            Engine::Tensor(net, max_bond) => {
                let method = net.method_for(*max_bond);
                if net.is_factorized() {
                    let (q, p) = sides(table)?;
                    net.log_weights_sides(&q, &p, method)?
                } else {
                    net.log_weights_f4(table.labels(), method)?
                }
            }
        };
        if log_coset_weights.iter().any(|w| w.is_nan()) {
            return Err(GkpError::NumericalFailure("NaN coset weight".into()));
        }
        Ok(DecodeResult {
            chosen: argmax_class(&log_coset_weights),
            log_coset_weights,
            backend: self.backend(),
        })
    }

    /// Full record of one decode for debugging and golden files.
    pub fn debug_dump(&self, record: &SyndromeRecord, sigma: f64) -> Result<DecodeDump> {
        let table = self.weight_table(record, sigma)?;
        let result = self.decode_table(&table)?;
        Ok(DecodeDump {
            family: self.layout.family(),
            d: self.layout.distance(),
            sigma,
            n_v: self.config.n_v,
            candidate: record.candidate.as_slice().to_vec(),
            frame: record.frame.clone(),
            syndrome: record.syndrome.clone(),
            weight_tables: table.labels().to_vec(),
            log_coset_weights: result.log_coset_weights,
            chosen: result.chosen,
            backend: result.backend,
        })
    }
}

fn color_network(layout: &GkpCodeLayout) -> Result<ColorNetwork> {
    ColorNetwork::new(layout, layout.inner_symplectic().is_identity())
}

/// Per-qubit `q` and `p` factor tables.
type Sides = (Vec<[f64; 2]>, Vec<[f64; 2]>);

fn sides(table: &CosetWeightTable) -> Result<Sides> {
    match (table.side(0), table.side(1)) {
        (Some(q), Some(p)) => Ok((q, p)),
        _ => Err(GkpError::InvalidInput(
            "this backend needs factorized square weight tables".into(),
        )),
    }
}

/// JSON-serializable trace of a single decode.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DecodeDump {
    pub family: Family,
    pub d: usize,
    pub sigma: f64,
    pub n_v: usize,
    pub candidate: Vec<f64>,
    pub frame: Vec<f64>,
    pub syndrome: Vec<bool>,
    /// Per-qubit log-weights indexed by label I, X, Z, Y.
    pub weight_tables: Vec<[f64; 4]>,
    /// Log coset weights in I, X, Y, Z order.
    pub log_coset_weights: [f64; 4],
    pub chosen: LogicalClass,
    pub backend: Backend,
}

pub fn decode_brute_force(
    record: &SyndromeRecord,
    layout: &GkpCodeLayout,
    sigma: f64,
    n_v: usize,
) -> Result<DecodeResult> {
    Decoder::new(layout, DecoderConfig::new(DecoderKind::BruteForce, n_v, 0))?.decode(record, sigma)
}

pub fn decode_partition_function(
    record: &SyndromeRecord,
    layout: &GkpCodeLayout,
    sigma: f64,
    n_v: usize,
    backend: PfBackend,
) -> Result<DecodeResult> {
    let config = match backend {
        PfBackend::Exhaustive => DecoderConfig::new(DecoderKind::PartitionExhaustive, n_v, 0),
        PfBackend::TensorNetwork { max_bond } => DecoderConfig::new(DecoderKind::PartitionFunction, n_v, max_bond),
    };
    Decoder::new(layout, config)?.decode(record, sigma)
}

pub fn decode_tensor_network(
    record: &SyndromeRecord,
    layout: &GkpCodeLayout,
    sigma: f64,
    n_v: usize,
    max_bond: usize,
) -> Result<DecodeResult> {
    Decoder::new(layout, DecoderConfig::new(DecoderKind::TensorNetwork, n_v, max_bond))?.decode(record, sigma)
}

pub fn decode_baseline(record: &SyndromeRecord, layout: &GkpCodeLayout, sigma: f64) -> Result<DecodeResult> {
    Decoder::new(layout, DecoderConfig::new(DecoderKind::Baseline, 1, 0))?.decode(record, sigma)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::channel::{candidate_error, sample_shift, SeedPath};
    use crate::codes::build_layout;
    use crate::lattice::ShiftVector;

    #[test]
    fn tie_order() {
        assert_eq!(argmax_class(&[0.0; 4]), LogicalClass::I);
        assert_eq!(argmax_class(&[0.0, 1.0, 1.0, 1.0]), LogicalClass::X);
        assert_eq!(argmax_class(&[0.0, 0.0, 1.0, 1.0]), LogicalClass::Z);
        assert_eq!(argmax_class(&[0.0, 0.0, 1.0, 0.0]), LogicalClass::Y);
    }

    #[test]
    fn kind_names_round_trip() {
        for k in DecoderKind::ALL {
            assert_eq!(k.name().parse::<DecoderKind>().unwrap(), k);
            assert_eq!(serde_json::to_string(&k).unwrap(), format!("\"{}\"", k.name()));
        }
        assert!("mld".parse::<DecoderKind>().is_err());
    }

    #[test]
    fn zero_shift_at_small_sigma_is_trivial() {
        for (family, d) in [
            (Family::SurfaceSquare, 3),
            (Family::ColorHex, 3),
            (Family::FiveOneThreeHex, 3),
            (Family::SquareSingle, 1),
        ] {
            let layout = build_layout(family, d).unwrap();
            let record = candidate_error(&ShiftVector::zeros(layout.n_modes()), &layout).unwrap();
            let r = Decoder::new(&layout, DecoderConfig::default())
                .unwrap()
                .decode(&record, 0.05)
                .unwrap();
            assert_eq!(r.chosen, LogicalClass::I);
            let second = r.log_coset_weights[1..]
                .iter()
                .copied()
                .fold(f64::NEG_INFINITY, f64::max);
            assert!(r.log_coset_weights[0] - second > 50.0, "{family}");
        }
    }

    #[test]
    fn mismatched_kinds_are_rejected() {
        let surface = build_layout(Family::SurfaceSquare, 3).unwrap();
        let color = build_layout(Family::ColorHex, 3).unwrap();
        assert!(Decoder::new(&surface, DecoderConfig::new(DecoderKind::TensorNetwork, 4, 0)).is_err());
        assert!(Decoder::new(&color, DecoderConfig::new(DecoderKind::PartitionFunction, 4, 0)).is_err());
        assert!(Decoder::new(&color, DecoderConfig::new(DecoderKind::TensorNetwork, 4, 1)).is_err());
        assert!(Decoder::new(&color, DecoderConfig::new(DecoderKind::TensorNetwork, 0, 0)).is_err());
    }

    #[test]
    fn trivial_layouts_fall_back_to_brute_force() {
        let layout = build_layout(Family::SurfaceSquare, 1).unwrap();
        let dec = Decoder::new(&layout, DecoderConfig::new(DecoderKind::PartitionFunction, 4, 0)).unwrap();
        assert_eq!(dec.backend(), Backend::BruteForce);
    }

    #[test]
    fn debug_dump_serializes() {
        let layout = build_layout(Family::ColorSquare, 3).unwrap();
        let xi = sample_shift(0.5, 7, SeedPath::new(3, 4)).unwrap().xi;
        let record = candidate_error(&xi, &layout).unwrap();
        let dec = Decoder::new(&layout, DecoderConfig::default()).unwrap();
        let dump = dec.debug_dump(&record, 0.5).unwrap();
        let json = serde_json::to_string(&dump).unwrap();
        let back: DecodeDump = serde_json::from_str(&json).unwrap();
        assert_eq!(back, dump);
        assert_eq!(dump.chosen, dec.decode(&record, 0.5).unwrap().chosen);
    }
}
