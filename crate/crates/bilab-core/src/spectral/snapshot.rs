//! Binary snapshot of [`EigenData`] so downstream stages can run without
//! re-solving. Layout: magic, JSON header line (grid/coefficient signatures,
//! K, N, payload hash), then little-endian f64 blocks for eigenvalues,
//! eigenvectors and traces. The header stores the SHA-256 of the payload;
//! loading verifies it and refuses corrupted files.

use crate::error::{Error, Result};
use crate::geometry::{Grid, TracePair};
use crate::spectral::EigenData;
use crate::C64;
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};
use std::io::{Read, Write};
use std::path::Path;

const MAGIC: &[u8; 8] = b"BILABEG1";

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct SnapshotHeader {
    pub grid_signature: String,
    pub coeff_signature: String,
    pub k: usize,
    pub n: usize,
    pub n_boundary: usize,
    pub max_residual: f64,
    pub payload_sha256: String,
}

fn push_f64(buf: &mut Vec<u8>, v: f64) {
    buf.extend_from_slice(&v.to_le_bytes());
}

fn push_c64(buf: &mut Vec<u8>, v: C64) {
    push_f64(buf, v.re);
    push_f64(buf, v.im);
}

pub fn save_snapshot(path: &Path, data: &EigenData) -> Result<SnapshotHeader> {
    let n = data.vectors.first().map_or(0, |v| v.len());
    let nb = data.neumann_traces.first().map_or(0, |t| t.len());
    let mut payload = Vec::with_capacity(8 * data.k * (1 + 2 * n + 4 * nb));
    for &l in &data.lambdas {
        push_f64(&mut payload, l);
    }
    for v in &data.vectors {
        for &z in v {
            push_c64(&mut payload, z);
        }
    }
    for t in &data.neumann_traces {
        for &z in &t.c0 {
            push_c64(&mut payload, z);
        }
        for &z in &t.c1 {
            push_c64(&mut payload, z);
        }
    }
    let hash = Sha256::digest(&payload);
    let header = SnapshotHeader {
        grid_signature: data.grid_signature.clone(),
        coeff_signature: data.coeff_signature.clone(),
        k: data.k,
        n,
        n_boundary: nb,
        max_residual: data.max_residual,
        payload_sha256: hash.iter().map(|b| format!("{b:02x}")).collect(),
    };
    let mut f = std::fs::File::create(path)?;
    f.write_all(MAGIC)?;
    let hjson = serde_json::to_string(&header)
        .map_err(|e| Error::Snapshot(format!("header encode: {e}")))?;
    f.write_all(&(hjson.len() as u64).to_le_bytes())?;
    f.write_all(hjson.as_bytes())?;
    f.write_all(&payload)?;
    Ok(header)
}

pub fn load_snapshot(path: &Path, grid: &Grid) -> Result<(EigenData, SnapshotHeader)> {
    let mut f = std::fs::File::open(path)?;
    let mut magic = [0u8; 8];
    f.read_exact(&mut magic)?;
    if &magic != MAGIC {
        return Err(Error::Snapshot(format!(
            "{} is not an eigen snapshot",
            path.display()
        )));
    }
    let mut lenb = [0u8; 8];
    f.read_exact(&mut lenb)?;
    let hlen = u64::from_le_bytes(lenb) as usize;
    let mut hbuf = vec![0u8; hlen];
    f.read_exact(&mut hbuf)?;
    let header: SnapshotHeader = serde_json::from_slice(&hbuf)
        .map_err(|e| Error::Snapshot(format!("header decode: {e}")))?;
    let mut payload = Vec::new();
    f.read_to_end(&mut payload)?;
    let hash: String = Sha256::digest(&payload)
        .iter()
        .map(|b| format!("{b:02x}"))
        .collect();
    if hash != header.payload_sha256 {
        return Err(Error::Snapshot(format!(
            "payload hash mismatch in {} (stored {}, computed {})",
            path.display(),
            header.payload_sha256,
            hash
        )));
    }
    if header.n != grid.n_interior() || header.n_boundary != grid.n_boundary() {
        return Err(Error::Snapshot(format!(
            "snapshot shape ({}, {}) does not match the grid ({}, {})",
            header.n,
            header.n_boundary,
            grid.n_interior(),
            grid.n_boundary()
        )));
    }
    let need = 8 * (header.k + 2 * header.k * header.n + 4 * header.k * header.n_boundary);
    if payload.len() != need {
        return Err(Error::Snapshot(format!(
            "payload length {} does not match header (expected {need})",
            payload.len()
        )));
    }
    let mut off = 0usize;
    let mut rd_f64 = |payload: &[u8]| -> f64 {
        let v = f64::from_le_bytes(payload[off..off + 8].try_into().unwrap());
        off += 8;
        v
    };
    let lambdas: Vec<f64> = (0..header.k).map(|_| rd_f64(&payload)).collect();
    let mut vectors = Vec::with_capacity(header.k);
    for _ in 0..header.k {
        let v: Vec<C64> = (0..header.n)
            .map(|_| {
                let re = rd_f64(&payload);
                let im = rd_f64(&payload);
                C64::new(re, im)
            })
            .collect();
        vectors.push(v);
    }
    let mut traces = Vec::with_capacity(header.k);
    for _ in 0..header.k {
        let c0: Vec<C64> = (0..header.n_boundary)
            .map(|_| {
                let re = rd_f64(&payload);
                let im = rd_f64(&payload);
                C64::new(re, im)
            })
            .collect();
        let c1: Vec<C64> = (0..header.n_boundary)
            .map(|_| {
                let re = rd_f64(&payload);
                let im = rd_f64(&payload);
                C64::new(re, im)
            })
            .collect();
        traces.push(TracePair { c0, c1 });
    }
    let data = EigenData {
        lambdas,
        vectors,
        neumann_traces: traces,
        k: header.k,
        max_residual: header.max_residual,
        grid_signature: header.grid_signature.clone(),
        coeff_signature: header.coeff_signature.clone(),
    };
    Ok((data, header))
}
