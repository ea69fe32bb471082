//! `gkp-sim`: Monte Carlo sweeps, capacity curves and decoder debugging for
//! multi-mode GKP codes.

mod grid;

use std::collections::BTreeMap;
use std::fs::File;
use std::io::{self, BufWriter, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::time::{SystemTime, UNIX_EPOCH};

use clap::{Args, Parser, Subcommand};
use gkp_core::channel::{candidate_error, sample_shift, SeedPath};
use gkp_core::codes::{build_layout, Family};
use gkp_core::decoders::weights::DEFAULT_NV;
use gkp_core::decoders::{DecodeDump, Decoder, DecoderConfig, DecoderKind};
use gkp_core::harness::{crossing_point, read_csv, run_sweep, write_csv, ExperimentConfig, SweepRow};
use gkp_core::lattice::LogicalClass;
use gkp_core::rates::{capacity_bounds, thermal_coherent_information_closed_form};
use serde::{Deserialize, Serialize};

use crate::grid::{parse_distances, parse_sigmas, DistanceList, ListOrString, SigmaGrid};

/// Default worker count when neither a flag nor the config file sets one.
const WORKERS_ENV: &str = "GKP_WORKERS";
const DEFAULT_TRIALS: u64 = 10_000;
const DEFAULT_NBAR: f64 = 1e4;

#[derive(Parser)]
#[command(
    name = "gkp-sim",
    version,
    about = "Decoding sweeps and capacity curves for multi-mode GKP codes"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Estimate logical fidelity and achievable rate over a (distance, σ) grid.
    Sweep(SweepArgs),
    /// Capacity bounds and thermal coherent information over a σ grid.
    Bounds(BoundsArgs),
    /// Crossing points of consecutive distances in a sweep CSV.
    Crossings(CrossingsArgs),
    /// Decode a single sampled trial and print the full trace as JSON.
    DecodeOne(DecodeOneArgs),
}

#[derive(Args, Debug, Default)]
struct SweepArgs {
    /// TOML file with the same keys as the long flags; flags win.
    #[arg(long)]
    config: Option<PathBuf>,
    /// square, hex, surface-square, color-square, color-hex or 513-hex.
    #[arg(long, value_parser = parse_family)]
    family: Option<Family>,
    /// Comma-separated odd distances.
    #[arg(long, value_parser = parse_distances)]
    distances: Option<DistanceList>,
    /// `start:stop:step` (inclusive) or a comma-separated list.
    #[arg(long, value_parser = parse_sigmas)]
    sigmas: Option<SigmaGrid>,
    /// Monte Carlo trials per (distance, σ) cell [default: 10000].
    #[arg(long)]
    trials: Option<u64>,
    /// auto, mld-bf, mld-pf-exhaustive, mld-pf, mld-tn or baseline.
    #[arg(long, value_parser = parse_decoder)]
    decoder: Option<DecoderKind>,
    /// Bond-dimension limit of the contraction backends; 0 is unbounded.
    #[arg(long)]
    max_bond: Option<usize>,
    /// Lattice sums keep the nv nearest terms (per quadrature for square
    /// codes, per mode for hexagonal ones).
    #[arg(long)]
    nv: Option<usize>,
    /// Run seed; required here or in the config file.
    #[arg(long)]
    seed: Option<u64>,
    /// Output CSV; standard output when absent.
    #[arg(long)]
    out: Option<PathBuf>,
    /// Worker threads [default: $GKP_WORKERS, else all cores].
    #[arg(long)]
    workers: Option<usize>,
    /// Omit the `# generated` header line for byte-reproducible output.
    #[arg(long)]
    no_timestamp: bool,
}

/// Sweep settings as read from a config file.
#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields, rename_all = "kebab-case")]
struct SweepFile {
    family: Option<String>,
    distances: Option<ListOrString<usize>>,
    sigmas: Option<ListOrString<f64>>,
    trials: Option<u64>,
    decoder: Option<String>,
    #[serde(alias = "max_bond")]
    max_bond: Option<usize>,
    nv: Option<usize>,
    seed: Option<u64>,
    out: Option<PathBuf>,
    workers: Option<usize>,
    timestamp: Option<bool>,
}

#[derive(Args)]
struct BoundsArgs {
    #[arg(long, value_parser = parse_sigmas, default_value = "0.05:0.95:0.01")]
    sigmas: SigmaGrid,
    /// Mean photon number of the thermal input.
    #[arg(long, default_value_t = DEFAULT_NBAR)]
    nbar: f64,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct CrossingsArgs {
    /// Sweep CSV as written by `sweep`.
    input: PathBuf,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct DecodeOneArgs {
    #[arg(long, value_parser = parse_family)]
    family: Family,
    #[arg(long)]
    distance: usize,
    #[arg(long)]
    sigma: f64,
    #[arg(long)]
    seed: u64,
    /// Trial index within the seed's stream.
    #[arg(long, default_value_t = 0)]
    trial: u64,
    #[arg(long, value_parser = parse_decoder, default_value = "auto")]
    decoder: DecoderKind,
    #[arg(long, default_value_t = 0)]
    max_bond: usize,
    #[arg(long, default_value_t = DEFAULT_NV)]
    nv: usize,
}

#[derive(Serialize)]
struct DecodeOneReport {
    seed: u64,
    trial: u64,
    xi: Vec<f64>,
    true_class: LogicalClass,
    success: bool,
    dump: DecodeDump,
}

#[derive(Serialize)]
struct BoundsRow {
    sigma: f64,
    lower: f64,
    upper: f64,
    ic_at_nbar: f64,
}

#[derive(Serialize)]
struct CrossingRow {
    family: Family,
    decoder: DecoderKind,
    max_bond: usize,
    nv: usize,
    d: usize,
    d2: usize,
    sigma: f64,
    ci_lo: f64,
    ci_hi: f64,
}

type CliResult<T> = Result<T, Box<dyn std::error::Error>>;

fn parse_family(s: &str) -> Result<Family, String> {
    s.parse().map_err(|e: gkp_core::GkpError| e.to_string())
}

fn parse_decoder(s: &str) -> Result<DecoderKind, String> {
    s.parse().map_err(|e: gkp_core::GkpError| e.to_string())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let outcome = match cli.command {
        Command::Sweep(args) => sweep(args),
        Command::Bounds(args) => bounds(args).map(|()| ExitCode::SUCCESS),
        Command::Crossings(args) => crossings(args).map(|()| ExitCode::SUCCESS),
        Command::DecodeOne(args) => decode_one(args).map(|()| ExitCode::SUCCESS),
    };
    outcome.unwrap_or_else(|e| {
        eprintln!("error: {e}");
        ExitCode::FAILURE
    })
}

fn output(path: Option<&Path>) -> CliResult<Box<dyn Write>> {
    Ok(match path {
        Some(p) => Box::new(BufWriter::new(File::create(p)?)),
        None => Box::new(BufWriter::new(io::stdout().lock())),
    })
}

fn default_workers() -> CliResult<usize> {
    match std::env::var(WORKERS_ENV) {
        Ok(v) => Ok(v
            .trim()
            .parse()
            .map_err(|_| format!("{WORKERS_ENV}={v:?} is not a worker count"))?),
        Err(_) => Ok(std::thread::available_parallelism().map_or(1, |n| n.get())),
    }
}

/// Merges flags over the config file over defaults.
fn resolve_sweep(args: SweepArgs) -> CliResult<(ExperimentConfig, bool)> {
    let file: SweepFile = match &args.config {
        Some(path) => {
            toml::from_str(&std::fs::read_to_string(path)?).map_err(|e| format!("{}: {e}", path.display()))?
        }
        None => SweepFile::default(),
    };
    let family = match (args.family, file.family) {
        (Some(f), _) => f,
        (None, Some(s)) => parse_family(&s)?,
        (None, None) => return Err("--family is required".into()),
    };
    let distances = match (args.distances, file.distances) {
        (Some(d), _) => d,
        (None, Some(d)) => d.distances()?,
        (None, None) => return Err("--distances is required".into()),
    };
    let sigmas = match (args.sigmas, file.sigmas) {
        (Some(s), _) => s,
        (None, Some(s)) => s.sigmas()?,
        (None, None) => return Err("--sigmas is required".into()),
    };
    let kind = match (args.decoder, file.decoder) {
        (Some(k), _) => k,
        (None, Some(s)) => parse_decoder(&s)?,
        (None, None) => DecoderKind::Auto,
    };
    let run_seed = args
        .seed
        .or(file.seed)
        .ok_or("--seed is required so that every output records its seed")?;
    let workers = match args.workers.or(file.workers) {
        Some(w) => w,
        None => default_workers()?,
    };
    let config = ExperimentConfig {
        family,
        distances,
        sigmas,
        trials: args.trials.or(file.trials).unwrap_or(DEFAULT_TRIALS),
        run_seed,
        decoder: DecoderConfig::new(
            kind,
            args.nv.or(file.nv).unwrap_or(DEFAULT_NV),
            args.max_bond.or(file.max_bond).unwrap_or(0),
        ),
        output_path: args.out.or(file.out),
        workers,
    };
    config.validate()?;
    let timestamp = !args.no_timestamp && file.timestamp.unwrap_or(true);
    Ok((config, timestamp))
}

fn sweep(args: SweepArgs) -> CliResult<ExitCode> {
    let (config, timestamp) = resolve_sweep(args)?;
    let result = run_sweep(&config)?;
    for (row, time) in result.rows.iter().zip(&result.wall_times) {
        eprintln!(
            "d={} sigma={} fidelity={:.6} rate={:.6} ({:.1}s)",
            row.d,
            row.sigma,
            row.fidelity,
            row.rate,
            time.as_secs_f64()
        );
    }
    let stamp = timestamp.then(|| SystemTime::now().duration_since(UNIX_EPOCH).map_or(0, |t| t.as_secs()));
    let mut out = output(config.output_path.as_deref())?;
    write_csv(&result.rows, &mut out, stamp)?;
    out.flush()?;
    for e in &result.errors {
        eprintln!("failed cell d={} sigma={}: {}", e.d, e.sigma, e.message);
    }
    Ok(if result.errors.is_empty() {
        ExitCode::SUCCESS
    } else {
        ExitCode::from(2)
    })
}

fn bounds(args: BoundsArgs) -> CliResult<()> {
    let mut writer = csv::Writer::from_writer(output(args.out.as_deref())?);
    for &sigma in &args.sigmas {
        let (lower, upper) = capacity_bounds(sigma)?;
        writer.serialize(BoundsRow {
            sigma,
            lower,
            upper,
            ic_at_nbar: thermal_coherent_information_closed_form(args.nbar, sigma)?,
        })?;
    }
    writer.flush()?;
    Ok(())
}

fn crossings(args: CrossingsArgs) -> CliResult<()> {
    let rows = read_csv(File::open(&args.input)?)?;
    let mut groups: BTreeMap<(&str, &str, usize, usize), Vec<SweepRow>> = BTreeMap::new();
    for row in &rows {
        let key = (row.family.name(), row.decoder.name(), row.max_bond, row.nv);
        groups.entry(key).or_default().push(row.clone());
    }
    let mut writer = csv::Writer::from_writer(output(args.out.as_deref())?);
    let mut found = 0;
    for group in groups.values() {
        let mut ds: Vec<usize> = group.iter().map(|r| r.d).collect();
        ds.sort_unstable();
        ds.dedup();
        for pair in ds.windows(2) {
            let head = &group[0];
            match crossing_point(group, pair[0], pair[1]) {
                Ok(c) => {
                    found += 1;
                    writer.serialize(CrossingRow {
                        family: head.family,
                        decoder: head.decoder,
                        max_bond: head.max_bond,
                        nv: head.nv,
                        d: pair[0],
                        d2: pair[1],
                        sigma: c.sigma,
                        ci_lo: c.ci_lo,
                        ci_hi: c.ci_hi,
                    })?;
                }
                Err(e) => eprintln!("{} {}: {e}", head.family.name(), head.decoder.name()),
            }
        }
    }
    if found == 0 {
        // Keep the header so downstream readers see the schema.
        writer.write_record([
            "family", "decoder", "max_bond", "nv", "d", "d2", "sigma", "ci_lo", "ci_hi",
        ])?;
    }
    writer.flush()?;
    Ok(())
}

fn decode_one(args: DecodeOneArgs) -> CliResult<()> {
    let layout = build_layout(args.family, args.distance)?;
    let decoder = Decoder::new(&layout, DecoderConfig::new(args.decoder, args.nv, args.max_bond))?;
    let xi = sample_shift(args.sigma, layout.n_modes(), SeedPath::new(args.seed, args.trial))?.xi;
    let record = candidate_error(&xi, &layout)?;
    let dump = decoder.debug_dump(&record, args.sigma)?;
    let report = DecodeOneReport {
        seed: args.seed,
        trial: args.trial,
        xi: xi.as_slice().to_vec(),
        true_class: record.true_class,
        success: dump.chosen == record.true_class,
        dump,
    };
    let mut out = io::stdout().lock();
    serde_json::to_writer_pretty(&mut out, &report)?;
    writeln!(out)?;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn flags_override_the_config_file() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("sweep.toml");
        std::fs::write(
            &path,
            "family = \"color-hex\"\ndistances = [3, 5]\nsigmas = \"0.5:0.6:0.05\"\ntrials = 99\nseed = 7\nworkers = 3\nmax-bond = 16\ntimestamp = false\n",
        )
        .unwrap();
        let args = SweepArgs {
            config: Some(path),
            trials: Some(11),
            distances: Some(vec![7]),
            ..SweepArgs::default()
        };
        let (config, timestamp) = resolve_sweep(args).unwrap();
        assert_eq!(config.family, Family::ColorHex);
        assert_eq!(config.distances, vec![7]);
        assert_eq!(config.sigmas, vec![0.5, 0.55, 0.6]);
        assert_eq!(config.trials, 11);
        assert_eq!(config.run_seed, 7);
        assert_eq!(config.workers, 3);
        assert_eq!(config.decoder, DecoderConfig::new(DecoderKind::Auto, DEFAULT_NV, 16));
        assert!(!timestamp);
    }

    #[test]
    fn seed_is_mandatory() {
        let args = SweepArgs {
            family: Some(Family::SquareSingle),
            distances: Some(vec![1]),
            sigmas: Some(vec![0.5]),
            workers: Some(1),
            ..SweepArgs::default()
        };
        assert!(resolve_sweep(args).unwrap_err().to_string().contains("seed"));
    }

    #[test]
    fn unknown_config_keys_are_rejected() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("bad.toml");
        std::fs::write(&path, "famly = \"hex\"\n").unwrap();
        let args = SweepArgs {
            config: Some(path),
            ..SweepArgs::default()
        };
        assert!(resolve_sweep(args).is_err());
    }

    #[test]
    fn command_line_definition_is_consistent() {
        use clap::CommandFactory;
        Cli::command().debug_assert();
    }
}
