use std::path::Path;
use std::process::{Command, Output};

use gkp_core::codes::Family;
use gkp_core::decoders::{DecoderConfig, DecoderKind};
use gkp_core::harness::{read_csv, write_csv, SweepRow};
use gkp_core::rates::hashing_rate;

fn gkp_sim(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_gkp-sim"))
        .args(args)
        .env_remove("GKP_WORKERS")
        .output()
        .unwrap()
}

fn sweep_to(path: &Path, workers: &str) -> Output {
    gkp_sim(&[
        "sweep",
        "--family",
        "surface-square",
        "--distances",
        "1,3",
        "--sigmas",
        "0.5:0.6:0.05",
        "--trials",
        "600",
        "--seed",
        "42",
        "--workers",
        workers,
        "--no-timestamp",
        "--out",
        path.to_str().unwrap(),
    ])
}

#[test]
fn sweep_output_is_reproducible_and_consistent() {
    let dir = tempfile::tempdir().unwrap();
    let a = dir.path().join("a.csv");
    let b = dir.path().join("b.csv");
    assert!(sweep_to(&a, "1").status.success());
    assert!(sweep_to(&b, "3").status.success());
    let bytes = std::fs::read(&a).unwrap();
    assert_eq!(bytes, std::fs::read(&b).unwrap());
    let text = String::from_utf8(bytes).unwrap();
    assert!(text.starts_with("family,d,N,sigma,trials,n_I,n_X,n_Y,n_Z,fidelity,"));

    let rows = read_csv(text.as_bytes()).unwrap();
    assert_eq!(rows.len(), 6);
    for row in &rows {
        assert_eq!(row.counts().iter().sum::<u64>(), row.trials);
        assert_eq!(row.fidelity, row.n_i as f64 / row.trials as f64);
        assert!((row.rate - hashing_rate(&row.estimate().unwrap(), row.n_modes)).abs() < 1e-12);
        assert_eq!(row.seed, 42);
    }
}

#[test]
fn timestamp_header_is_written_by_default() {
    let out = gkp_sim(&[
        "sweep",
        "--family",
        "square",
        "--distances",
        "1",
        "--sigmas",
        "0.5",
        "--trials",
        "10",
        "--seed",
        "1",
        "--workers",
        "1",
    ]);
    assert!(out.status.success());
    let text = String::from_utf8(out.stdout).unwrap();
    assert!(text.starts_with("# generated "));
    assert_eq!(read_csv(text.as_bytes()).unwrap().len(), 1);
}

#[test]
fn sweep_reads_a_config_file() {
    let dir = tempfile::tempdir().unwrap();
    let config = dir.path().join("sweep.toml");
    std::fs::write(
        &config,
        "family = \"hex\"\ndistances = \"1\"\nsigmas = [0.4, 0.5]\ntrials = 50\nseed = 9\nworkers = 2\ntimestamp = false\n",
    )
    .unwrap();
    let out = gkp_sim(&["sweep", "--config", config.to_str().unwrap(), "--trials", "20"]);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let rows = read_csv(&out.stdout[..]).unwrap();
    assert_eq!(rows.len(), 2);
    assert!(rows.iter().all(|r| r.trials == 20 && r.seed == 9));
}

#[test]
fn sweep_takes_workers_from_the_environment() {
    let out = Command::new(env!("CARGO_BIN_EXE_gkp-sim"))
        .args([
            "sweep",
            "--family",
            "square",
            "--distances",
            "1",
            "--sigmas",
            "0.5",
            "--trials",
            "10",
            "--seed",
            "1",
        ])
        .env("GKP_WORKERS", "zero")
        .output()
        .unwrap();
    assert!(!out.status.success());
    assert!(String::from_utf8_lossy(&out.stderr).contains("GKP_WORKERS"));
}

#[test]
fn infeasible_cells_are_reported_and_the_sweep_continues() {
    let out = gkp_sim(&[
        "sweep",
        "--family",
        "surface-square",
        "--distances",
        "1,3",
        "--sigmas",
        "0.5",
        "--trials",
        "10",
        "--seed",
        "1",
        "--workers",
        "1",
        "--decoder",
        "mld-tn",
        "--no-timestamp",
    ]);
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).contains("failed cell"));
}

#[test]
fn invalid_sweeps_are_rejected() {
    let even = gkp_sim(&[
        "sweep",
        "--family",
        "square",
        "--distances",
        "2",
        "--sigmas",
        "0.5",
        "--seed",
        "1",
    ]);
    assert!(!even.status.success());
    let unseeded = gkp_sim(&["sweep", "--family", "square", "--distances", "1", "--sigmas", "0.5"]);
    assert!(!unseeded.status.success());
    let descending = gkp_sim(&[
        "sweep",
        "--family",
        "square",
        "--distances",
        "1",
        "--sigmas",
        "0.6,0.5",
        "--seed",
        "1",
    ]);
    assert!(!descending.status.success());
}

#[test]
fn bounds_emits_the_capacity_curves() {
    let out = gkp_sim(&["bounds", "--sigmas", "0.4:0.6:0.1", "--nbar", "100"]);
    assert!(out.status.success());
    let text = String::from_utf8(out.stdout).unwrap();
    let mut lines = text.lines();
    assert_eq!(lines.next(), Some("sigma,lower,upper,ic_at_nbar"));
    let rows: Vec<Vec<f64>> = lines
        .map(|l| l.split(',').map(|x| x.parse().unwrap()).collect())
        .collect();
    assert_eq!(rows.len(), 3);
    for r in &rows {
        assert!(r[1] <= r[2]);
        assert!(r[3] <= r[1] + 1e-12);
    }
}

#[test]
fn crossings_are_found_in_a_fixture() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("fixture.csv");
    let decoder = DecoderConfig::new(DecoderKind::PartitionFunction, 4, 0);
    let mut rows = Vec::new();
    for (d, a, b) in [(3, 80_000, 70_000), (5, 78_000, 72_000)] {
        for (sigma, n_i) in [(0.58, a), (0.60, b)] {
            let counts = [n_i, 100_000 - n_i, 0, 0];
            rows.push(SweepRow::from_counts(Family::SurfaceSquare, d, d * d, sigma, counts, 1, decoder).unwrap());
        }
    }
    write_csv(&rows, std::fs::File::create(&path).unwrap(), Some(0)).unwrap();
    let out = gkp_sim(&["crossings", path.to_str().unwrap()]);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let text = String::from_utf8(out.stdout).unwrap();
    let line = text.lines().nth(1).unwrap();
    let fields: Vec<&str> = line.split(',').collect();
    assert_eq!(&fields[..6], ["surface-square", "mld-pf", "0", "4", "3", "5"]);
    let sigma: f64 = fields[6].parse().unwrap();
    assert!((sigma - 0.59).abs() < 1e-12);
    let (lo, hi): (f64, f64) = (fields[7].parse().unwrap(), fields[8].parse().unwrap());
    assert!(lo <= sigma && sigma <= hi);
}

#[test]
fn crossings_without_a_sign_change_keep_the_header() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("flat.csv");
    let decoder = DecoderConfig::default();
    let rows: Vec<SweepRow> = [(3, 0.5, 900), (3, 0.6, 800), (5, 0.5, 950), (5, 0.6, 850)]
        .into_iter()
        .map(|(d, sigma, n_i)| {
            SweepRow::from_counts(Family::ColorHex, d, 7, sigma, [n_i, 1000 - n_i, 0, 0], 1, decoder).unwrap()
        })
        .collect();
    write_csv(&rows, std::fs::File::create(&path).unwrap(), None).unwrap();
    let out = gkp_sim(&["crossings", path.to_str().unwrap()]);
    assert!(out.status.success());
    assert_eq!(
        String::from_utf8(out.stdout).unwrap().trim(),
        "family,decoder,max_bond,nv,d,d2,sigma,ci_lo,ci_hi"
    );
    assert!(String::from_utf8_lossy(&out.stderr).contains("no crossing"));
}

#[test]
fn decode_one_dumps_json() {
    let out = gkp_sim(&[
        "decode-one",
        "--family",
        "surface-square",
        "--distance",
        "3",
        "--sigma",
        "0.5",
        "--seed",
        "3",
        "--trial",
        "17",
    ]);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let v: serde_json::Value = serde_json::from_slice(&out.stdout).unwrap();
    assert_eq!(v["trial"], 17);
    assert_eq!(v["xi"].as_array().unwrap().len(), 18);
    assert_eq!(v["dump"]["weight_tables"].as_array().unwrap().len(), 9);
    assert_eq!(v["dump"]["log_coset_weights"].as_array().unwrap().len(), 4);
    let again = gkp_sim(&[
        "decode-one",
        "--family",
        "surface-square",
        "--distance",
        "3",
        "--sigma",
        "0.5",
        "--seed",
        "3",
        "--trial",
        "17",
    ]);
    assert_eq!(out.stdout, again.stdout);
}
