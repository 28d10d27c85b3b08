//! Output files.
//!
//! Per run, in `gamma0_<value>/`:
//! - `spectrum.csv`: header `# energy,dP2_dE,dP1_dE`, one row per energy,
//!   every value in `{:.16e}` (17 significant digits);
//! - `metadata.json`: config, config hash, scalar results, ledger samples and
//!   a version stamp.
//!
//! Per sweep: `sweep_summary.csv` (one row per successful run),
//! `convergence.csv` (pairwise L¹ distances) and, when runs failed,
//! `failures.txt`.

use std::fmt::Write as _;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::pipeline::{RunRecord, RunScalars, Sample, SweepResult};
use crate::scenario::ScenarioConfig;
use crate::spectra::Spectrum;

pub const SPECTRUM_HEADER: &str = "# energy,dP2_dE,dP1_dE";
pub const SUMMARY_HEADER: &str = "# gamma0,P2,P1,neg_content,extent,duration,l1_to_ref";
pub const CONVERGENCE_HEADER: &str = "# gamma0_a,gamma0_b,l1_dP2,l1_dP1";

pub fn version_stamp() -> String {
    format!("capspectra {}", env!("CARGO_PKG_VERSION"))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Metadata {
    pub version: String,
    pub config_hash: String,
    pub gamma0: f64,
    pub config: ScenarioConfig,
    pub scalars: RunScalars,
    pub ledger: Vec<Sample>,
    pub spectrum_file: String,
}

pub fn run_dir_name(gamma0: f64) -> String {
    format!("gamma0_{gamma0}")
}

fn write_file(path: &Path, contents: &str) -> Result<()> {
    if let Some(dir) = path.parent() {
        std::fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
    }
    std::fs::write(path, contents).map_err(|e| Error::io(path, e))
}

pub fn format_spectrum(first: &Spectrum, second: &Spectrum) -> String {
    let mut out = String::with_capacity(64 * first.len());
    out.push_str(SPECTRUM_HEADER);
    out.push('\n');
    for i in 0..first.len() {
        let _ =
            writeln!(out, "{:.16e},{:.16e},{:.16e}", first.energies[i], first.density[i], second.at(first.energies[i]));
    }
    out
}

/// Parse a spectrum file into `(dP2/dε, dP1/dε)`.
pub fn read_spectrum(path: &Path) -> Result<(Spectrum, Spectrum)> {
    let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    let bad = |m: String| Error::Parse { path: path.to_path_buf(), message: m };
    let mut lines = text.lines();
    if lines.next() != Some(SPECTRUM_HEADER) {
        return Err(bad(format!("expected header `{SPECTRUM_HEADER}`")));
    }
    let (mut e, mut d2, mut d1) = (Vec::new(), Vec::new(), Vec::new());
    for (no, line) in lines.enumerate() {
        let fields: Vec<&str> = line.split(',').collect();
        if fields.len() != 3 {
            return Err(bad(format!("line {}: expected 3 fields", no + 2)));
        }
        let parse = |s: &str| s.trim().parse::<f64>().map_err(|err| bad(format!("line {}: {err}", no + 2)));
        e.push(parse(fields[0])?);
        d2.push(parse(fields[1])?);
        d1.push(parse(fields[2])?);
    }
    Ok((Spectrum { energies: e.clone(), density: d2 }, Spectrum { energies: e, density: d1 }))
}

pub fn metadata(record: &RunRecord) -> Metadata {
    Metadata {
        version: version_stamp(),
        config_hash: record.config.hash(),
        gamma0: record.gamma0,
        config: record.config.clone(),
        scalars: record.scalars.clone(),
        ledger: record.samples.clone(),
        spectrum_file: "spectrum.csv".into(),
    }
}

pub fn read_metadata(path: &Path) -> Result<Metadata> {
    let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    serde_json::from_str(&text).map_err(|e| Error::Parse { path: path.to_path_buf(), message: e.to_string() })
}

/// Write one run into `dir`; returns the spectrum and metadata paths.
pub fn write_run(record: &RunRecord, dir: &Path) -> Result<(PathBuf, PathBuf)> {
    let spectrum = dir.join("spectrum.csv");
    let meta = dir.join("metadata.json");
    write_file(&spectrum, &format_spectrum(&record.first, &record.second))?;
    let json = serde_json::to_string_pretty(&metadata(record)).expect("metadata always serializes");
    write_file(&meta, &(json + "\n"))?;
    Ok((spectrum, meta))
}

pub fn format_summary(sweep: &SweepResult) -> String {
    let reference = sweep.reference();
    let mut out = String::from(SUMMARY_HEADER);
    out.push('\n');
    for r in sweep.successes() {
        let l1 = reference.map_or(f64::NAN, |rf| r.first.l1_distance(&rf.first));
        let s = &r.scalars;
        let _ = writeln!(
            out,
            "{:.16e},{:.16e},{:.16e},{:.16e},{:.16e},{:.16e},{:.16e}",
            r.gamma0, s.p2, s.p1, s.neg_content, s.extent, s.duration, l1
        );
    }
    out
}

pub fn format_convergence(sweep: &SweepResult) -> String {
    let runs: Vec<&RunRecord> = sweep.successes().collect();
    let mut out = String::from(CONVERGENCE_HEADER);
    out.push('\n');
    for (a, ra) in runs.iter().enumerate() {
        for rb in &runs[a + 1..] {
            let _ = writeln!(
                out,
                "{:.16e},{:.16e},{:.16e},{:.16e}",
                ra.gamma0,
                rb.gamma0,
                ra.first.l1_distance(&rb.first),
                ra.second.l1_distance(&rb.second)
            );
        }
    }
    out
}

/// Write every run of a sweep plus the aggregate tables into `out`.
pub fn write_sweep(sweep: &SweepResult, out: &Path) -> Result<()> {
    for r in sweep.successes() {
        write_run(r, &out.join(run_dir_name(r.gamma0)))?;
    }
    write_file(&out.join("sweep_summary.csv"), &format_summary(sweep))?;
    write_file(&out.join("convergence.csv"), &format_convergence(sweep))?;
    let failures: Vec<String> = sweep
        .gamma0
        .iter()
        .zip(&sweep.runs)
        .filter_map(|(g, r)| r.as_ref().err().map(|e| format!("{g}: {e}")))
        .collect();
    if !failures.is_empty() {
        write_file(&out.join("failures.txt"), &(failures.join("\n") + "\n"))?;
    }
    Ok(())
}
