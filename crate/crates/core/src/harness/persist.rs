//! Snapshots of many-body states and tabular sweep output.
//!
//! Snapshot layout, all integers and floats little-endian:
//!
//! | bytes | content |
//! |-------|---------|
//! | 8     | magic `FOCSNAP\0` |
//! | 4     | format version |
//! | 4     | N |
//! | 16    | basis: max level, quadrature nodes, `M_z`, ordering version (u32 each) |
//! | 8     | box length (f64) |
//! | 8     | coefficient count (u64) |
//! | 32    | SHA-256 of the preceding 48 bytes |
//! | 16·len| coefficients as `(re, im)` f64 pairs |
//! | 32    | SHA-256 of the coefficient bytes |

use std::fs::{self, File};
use std::io::{BufRead, BufReader, BufWriter, Write};
use std::path::{Path, PathBuf};
use std::sync::Arc;

use num_complex::Complex64;
use serde::de::DeserializeOwned;
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use super::sweep::{SweepRecord, SweepResult};
use crate::dynamics::ManyBodyState;
use crate::spectral::{BasisDescriptor, SingleParticleBasis};
use crate::{Error, Result};

pub const SNAPSHOT_MAGIC: [u8; 8] = *b"FOCSNAP\0";
pub const SNAPSHOT_VERSION: u32 = 1;
const HEADER_LEN: usize = 48;
const DIGEST_LEN: usize = 32;

fn encode_header(psi: &ManyBodyState) -> Vec<u8> {
    let d = psi.basis().descriptor();
    let mut out = Vec::with_capacity(HEADER_LEN);
    out.extend_from_slice(&SNAPSHOT_MAGIC);
    out.extend_from_slice(&SNAPSHOT_VERSION.to_le_bytes());
    out.extend_from_slice(&(psi.n() as u32).to_le_bytes());
    for v in [d.max_level, d.quad_nodes, d.z_points] {
        out.extend_from_slice(&(v as u32).to_le_bytes());
    }
    out.extend_from_slice(&d.ordering_version.to_le_bytes());
    out.extend_from_slice(&d.box_length.to_le_bytes());
    out.extend_from_slice(&(psi.coeffs().len() as u64).to_le_bytes());
    out
}

/// Serializes `psi` into the snapshot byte format.
pub fn snapshot_bytes(psi: &ManyBodyState) -> Vec<u8> {
    let header = encode_header(psi);
    let mut payload = Vec::with_capacity(16 * psi.coeffs().len());
    for c in psi.coeffs() {
        payload.extend_from_slice(&c.re.to_le_bytes());
        payload.extend_from_slice(&c.im.to_le_bytes());
    }
    let mut out = header.clone();
    out.extend_from_slice(&Sha256::digest(&header));
    out.extend_from_slice(&payload);
    out.extend_from_slice(&Sha256::digest(&payload));
    out
}

fn u32_at(b: &[u8], at: usize) -> u32 {
    u32::from_le_bytes(b[at..at + 4].try_into().expect("4 bytes"))
}

fn f64_at(b: &[u8], at: usize) -> f64 {
    f64::from_le_bytes(b[at..at + 8].try_into().expect("8 bytes"))
}

/// Parses a snapshot. Every check runs before any state is built.
pub fn snapshot_from_bytes(bytes: &[u8]) -> Result<ManyBodyState> {
    if bytes.len() < HEADER_LEN + DIGEST_LEN {
        return Err(Error::Incompatible(format!("{} bytes is shorter than a snapshot header", bytes.len())));
    }
    let header = &bytes[..HEADER_LEN];
    if header[..8] != SNAPSHOT_MAGIC {
        return Err(Error::Incompatible("bad magic; not a snapshot file".into()));
    }
    if Sha256::digest(header).as_slice() != &bytes[HEADER_LEN..HEADER_LEN + DIGEST_LEN] {
        return Err(Error::Incompatible("header checksum mismatch (corrupted header)".into()));
    }
    let version = u32_at(header, 8);
    if version != SNAPSHOT_VERSION {
        return Err(Error::Incompatible(format!(
            "snapshot format version {version}, this build reads {SNAPSHOT_VERSION}"
        )));
    }
    let n = u32_at(header, 12) as usize;
    let descriptor = BasisDescriptor {
        max_level: u32_at(header, 16) as usize,
        quad_nodes: u32_at(header, 20) as usize,
        z_points: u32_at(header, 24) as usize,
        ordering_version: u32_at(header, 28),
        box_length: f64_at(header, 32),
    };
    let len = u64::from_le_bytes(header[40..48].try_into().expect("8 bytes")) as usize;
    let start = HEADER_LEN + DIGEST_LEN;
    let expected = len
        .checked_mul(16)
        .and_then(|p| p.checked_add(start + DIGEST_LEN))
        .ok_or_else(|| Error::Incompatible(format!("coefficient count {len} overflows")))?;
    if bytes.len() != expected {
        return Err(Error::Incompatible(format!("file has {} bytes, header implies {expected}", bytes.len())));
    }
    let payload = &bytes[start..start + 16 * len];
    if Sha256::digest(payload).as_slice() != &bytes[start + 16 * len..] {
        return Err(Error::Incompatible("coefficient checksum mismatch".into()));
    }
    let basis = SingleParticleBasis::from_descriptor(&descriptor)?;
    let coeffs = payload
        .chunks_exact(16)
        .map(|c| Complex64::new(f64_at(c, 0), f64_at(c, 8)))
        .collect();
    ManyBodyState::new(Arc::new(basis), n, coeffs)
}

pub fn save_snapshot(psi: &ManyBodyState, path: &Path) -> Result<()> {
    if let Some(dir) = path.parent() {
        fs::create_dir_all(dir)?;
    }
    fs::write(path, snapshot_bytes(psi))?;
    Ok(())
}

pub fn load_snapshot(path: &Path) -> Result<ManyBodyState> {
    snapshot_from_bytes(&fs::read(path)?)
}

/// Writes one JSON document per line.
pub fn write_jsonl<T: Serialize>(path: &Path, items: impl IntoIterator<Item = T>) -> Result<usize> {
    if let Some(dir) = path.parent() {
        fs::create_dir_all(dir)?;
    }
    let mut w = BufWriter::new(File::create(path)?);
    let mut count = 0;
    for item in items {
        serde_json::to_writer(&mut w, &item)?;
        w.write_all(b"\n")?;
        count += 1;
    }
    w.flush()?;
    Ok(count)
}

pub fn read_jsonl<T: DeserializeOwned>(path: &Path) -> Result<Vec<T>> {
    let reader = BufReader::new(File::open(path)?);
    let mut out = Vec::new();
    for line in reader.lines() {
        let line = line?;
        if !line.trim().is_empty() {
            out.push(serde_json::from_str(&line)?);
        }
    }
    Ok(out)
}

/// A line of `results.jsonl`.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum ResultLine {
    Sample(SweepRecord),
    CellFailure {
        config_hash: String,
        cell: usize,
        n: usize,
        omega: f64,
        error: String,
    },
}

/// A row of `gaps.csv`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GapRow {
    pub t: f64,
    #[serde(rename = "N")]
    pub n: usize,
    pub omega: f64,
    pub beta: f64,
    pub quantity: String,
    pub value: f64,
}

/// Long-format trend table: per-sample distances plus one
/// `sup_factorization_gap` row per successful cell at `t = T`.
pub fn gap_rows(result: &SweepResult) -> Vec<GapRow> {
    let mut rows = Vec::new();
    for cell in &result.cells {
        for r in &cell.records {
            for (quantity, value) in [
                ("factorization_gap", r.factorization_gap),
                ("hs_distance", r.hs_distance),
                ("dk_distance", r.dk_distance),
                ("structure_gap", r.structure_gap),
            ] {
                rows.push(GapRow {
                    t: r.t,
                    n: r.n,
                    omega: r.omega,
                    beta: r.beta,
                    quantity: quantity.into(),
                    value,
                });
            }
        }
        if let (Some(sup), Some(last)) = (cell.sup_gap, cell.records.last()) {
            rows.push(GapRow {
                t: last.t,
                n: last.n,
                omega: last.omega,
                beta: last.beta,
                quantity: "sup_factorization_gap".into(),
                value: sup,
            });
        }
    }
    rows
}

pub fn write_gaps_csv(path: &Path, rows: &[GapRow]) -> Result<()> {
    if let Some(dir) = path.parent() {
        fs::create_dir_all(dir)?;
    }
    let mut w = csv::Writer::from_path(path)?;
    for row in rows {
        w.serialize(row)?;
    }
    w.flush()?;
    Ok(())
}

pub fn read_gaps_csv(path: &Path) -> Result<Vec<GapRow>> {
    let mut r = csv::Reader::from_path(path)?;
    r.deserialize().map(|row| row.map_err(Error::from)).collect()
}

/// Paths written by [`write_sweep`].
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SweepFiles {
    pub results: PathBuf,
    pub gaps: PathBuf,
    pub snapshots: Vec<PathBuf>,
}

/// Writes `results.jsonl`, `gaps.csv` and, if requested, the final state of
/// each cell to `snapshots/cell{i}_N{n}.bin` under `dir`.
pub fn write_sweep(result: &SweepResult, dir: &Path, snapshots: bool) -> Result<SweepFiles> {
    fs::create_dir_all(dir)?;
    let lines = result.cells.iter().flat_map(|c| {
        let failure = c.error.as_ref().map(|e| ResultLine::CellFailure {
            config_hash: result.config_hash.clone(),
            cell: c.cell.index,
            n: c.cell.n,
            omega: c.cell.omega,
            error: e.clone(),
        });
        c.records.iter().cloned().map(ResultLine::Sample).chain(failure)
    });
    let results = dir.join("results.jsonl");
    write_jsonl(&results, lines)?;
    let gaps = dir.join("gaps.csv");
    write_gaps_csv(&gaps, &gap_rows(result))?;
    let mut written = Vec::new();
    if snapshots {
        for c in &result.cells {
            if let Some(psi) = &c.final_state {
                let path = dir.join("snapshots").join(format!("cell{}_N{}.bin", c.cell.index, c.cell.n));
                save_snapshot(psi, &path)?;
                written.push(path);
            }
        }
    }
    Ok(SweepFiles {
        results,
        gaps,
        snapshots: written,
    })
}
