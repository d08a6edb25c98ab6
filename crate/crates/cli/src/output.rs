//! CSV and JSON output.
//!
//! The CSV starts with one `#` line naming the artifact version and the
//! config hash, followed by a header row and one row per record. Rows depend
//! only on the config and seed, never on timing or thread count.

use std::io;
use std::path::{Path, PathBuf};

use serde_json::{json, Value};
use sha2::{Digest, Sha256};

use lrcone_core::diagnostics::SweepRecord;

use crate::config::LoadedConfig;
use crate::run::RunOutput;

pub const VERSION: &str = env!("CARGO_PKG_VERSION");

pub const COLUMNS: [&str; 19] = [
    "experiment_id",
    "d",
    "L_extents",
    "N_tot",
    "n_max",
    "J",
    "U",
    "mu",
    "potential_form",
    "eta",
    "nu",
    "lambda",
    "x",
    "r",
    "R",
    "t",
    "s",
    "value",
    "flag",
];

pub fn config_hash(source: &str) -> String {
    let digest = Sha256::digest(source.as_bytes());
    digest.iter().map(|b| format!("{b:02x}")).collect()
}

/// Shortest round-trip decimal, switching to exponent form for very small or
/// very large magnitudes.
pub fn fmt_f64(v: f64) -> String {
    let a = v.abs();
    if v == 0.0 || (1e-4..1e15).contains(&a) || !v.is_finite() {
        format!("{v}")
    } else {
        format!("{v:e}")
    }
}

fn opt(v: Option<f64>) -> String {
    v.map(fmt_f64).unwrap_or_default()
}

pub fn header_line(loaded: &LoadedConfig) -> String {
    format!("# lrcone {VERSION} config_sha256={}", config_hash(&loaded.source))
}

fn row(loaded: &LoadedConfig, rec: &SweepRecord) -> Vec<String> {
    let cfg = &loaded.config;
    let lat = cfg.lattice.as_ref().expect("validated");
    let sector = cfg.sector.as_ref().expect("validated");
    let ham = cfg.hamiltonian.as_ref().expect("validated");
    let lambda = cfg.state.as_ref().and_then(|s| s.lambda);
    let extents: Vec<String> = lat.extents.iter().map(|e| e.to_string()).collect();
    let site = rec
        .site
        .as_ref()
        .map(|c| c.iter().map(|v| v.to_string()).collect::<Vec<_>>().join(";"))
        .unwrap_or_default();
    vec![
        cfg.id.clone(),
        lat.extents.len().to_string(),
        extents.join("x"),
        sector.n_tot.to_string(),
        sector.n_max.to_string(),
        fmt_f64(ham.j),
        fmt_f64(ham.u),
        fmt_f64(ham.mu),
        ham.form.label().to_string(),
        opt(rec.eta),
        rec.nu.map(|n| n.to_string()).unwrap_or_default(),
        opt(lambda),
        site,
        opt(rec.r),
        opt(rec.big_r),
        fmt_f64(rec.t),
        opt(rec.s),
        opt(rec.value),
        rec.flag.label().to_string(),
    ]
}

pub fn render_csv(loaded: &LoadedConfig, records: &[SweepRecord]) -> io::Result<String> {
    let mut out = header_line(loaded);
    out.push('\n');
    let mut w = csv::Writer::from_writer(Vec::new());
    w.write_record(COLUMNS)?;
    for rec in records {
        w.write_record(row(loaded, rec))?;
    }
    let body = w.into_inner().map_err(|e| e.into_error())?;
    out.push_str(std::str::from_utf8(&body).expect("csv output is UTF-8"));
    Ok(out)
}

pub fn sidecar(loaded: &LoadedConfig, output: &RunOutput, seed: u64, threads: usize, elapsed: f64) -> Value {
    json!({
        "version": VERSION,
        "config_sha256": config_hash(&loaded.source),
        "id": loaded.config.id,
        "experiment": loaded.config.experiment.name(),
        "seed": seed,
        "config": serde_json::to_value(&loaded.config).expect("serializable"),
        "basis_dim": output.basis.as_ref().map(|b| b.dim()),
        "threads": threads,
        "elapsed_seconds": elapsed,
        "records": output.records.len(),
        "density_check": output.density,
        "cap_saturation_weight": output.cap_weight,
        "checks": output.checks,
        "summary": output.summary,
    })
}

/// Writes `<id>.csv` (unless there are no records) and `<id>.json`.
pub fn write_outputs(
    dir: &Path,
    loaded: &LoadedConfig,
    output: &RunOutput,
    seed: u64,
    threads: usize,
    elapsed: f64,
) -> io::Result<Vec<PathBuf>> {
    std::fs::create_dir_all(dir)?;
    let mut written = Vec::new();
    let id = &loaded.config.id;
    if !output.records.is_empty() {
        let path = dir.join(format!("{id}.csv"));
        std::fs::write(&path, render_csv(loaded, &output.records)?)?;
        written.push(path);
    }
    let path = dir.join(format!("{id}.json"));
    let json = serde_json::to_string_pretty(&sidecar(loaded, output, seed, threads, elapsed))?;
    std::fs::write(&path, json + "\n")?;
    written.push(path);
    Ok(written)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn number_formatting_round_trips() {
        for v in [0.0, 0.5, 1.0, 2.0, 1e-7, 6.1332738525310005e-06, 123456.789, 1e20, -3.25e-9] {
            let s = fmt_f64(v);
            assert_eq!(s.parse::<f64>().unwrap(), v, "{s}");
        }
        assert_eq!(fmt_f64(0.5), "0.5");
        assert_eq!(fmt_f64(1e-7), "1e-7");
    }

    #[test]
    fn hash_is_stable() {
        assert_eq!(
            config_hash(""),
            "e3b0c44298fc1c149afbf4c8996fb92427ae41e4649b934ca495991b7852b855"
        );
    }
}
