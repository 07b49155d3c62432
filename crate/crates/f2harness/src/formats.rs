//! On-disk formats for streams, layout sidecars, and sketches.
//!
//! Stream binary format (extension-agnostic, used unless the path ends in
//! `.txt`): a little-endian `u64` element count followed by that many
//! little-endian `u64` ids. Text format: one decimal id per line.
//!
//! Layout sidecar: JSON, schema below, carrying the multi-level geometry
//! and optionally the planted instance's public parameters so a consumer
//! can locate active buckets and the referee suffix without re-deriving
//! them.
//!
//! Sketch files use the `F2SK` v1 byte format defined in
//! `f2sketch::codec`.

use std::fs::File;
use std::io::{BufRead, BufReader, BufWriter, Read, Write};
use std::path::Path;

use anyhow::{bail, Context, Result};
use f2sketch::codec::{self, EncodedSketch};
use f2sketch::streamgen::{EdisjInstance, MultiLevelLayout};
use f2sketch::F2Sketch;
use serde::{Deserialize, Serialize};

pub fn write_stream_binary(path: &Path, stream: &[u64]) -> Result<()> {
    let file = File::create(path).with_context(|| format!("creating {}", path.display()))?;
    let mut w = BufWriter::new(file);
    w.write_all(&(stream.len() as u64).to_le_bytes())?;
    for &x in stream {
        w.write_all(&x.to_le_bytes())?;
    }
    Ok(())
}

pub fn read_stream_binary(path: &Path) -> Result<Vec<u64>> {
    let file = File::open(path).with_context(|| format!("opening {}", path.display()))?;
    let mut r = BufReader::new(file);
    let mut buf = [0u8; 8];
    r.read_exact(&mut buf).context("reading length prefix")?;
    let n = u64::from_le_bytes(buf);
    let mut out = Vec::with_capacity(n as usize);
    for i in 0..n {
        r.read_exact(&mut buf)
            .with_context(|| format!("reading element {i} of {n}"))?;
        out.push(u64::from_le_bytes(buf));
    }
    if r.read(&mut buf)? != 0 {
        bail!("trailing bytes after {n} elements");
    }
    Ok(out)
}

pub fn write_stream_text(path: &Path, stream: &[u64]) -> Result<()> {
    let file = File::create(path).with_context(|| format!("creating {}", path.display()))?;
    let mut w = BufWriter::new(file);
    for &x in stream {
        writeln!(w, "{x}")?;
    }
    Ok(())
}

pub fn read_stream_text(path: &Path) -> Result<Vec<u64>> {
    let file = File::open(path).with_context(|| format!("opening {}", path.display()))?;
    let mut out = Vec::new();
    for (i, line) in BufReader::new(file).lines().enumerate() {
        let line = line?;
        let trimmed = line.trim();
        if trimmed.is_empty() {
            continue;
        }
        out.push(
            trimmed
                .parse::<u64>()
                .with_context(|| format!("line {}: {trimmed:?}", i + 1))?,
        );
    }
    Ok(out)
}

/// Text when the extension is `.txt`, binary otherwise.
pub fn read_stream_auto(path: &Path) -> Result<Vec<u64>> {
    if path.extension().is_some_and(|e| e == "txt") {
        read_stream_text(path)
    } else {
        read_stream_binary(path)
    }
}

/// JSON sidecar schema, version 1.
#[derive(Clone, Debug, Serialize, Deserialize, PartialEq)]
pub struct LayoutSidecar {
    pub version: u32,
    pub n: u64,
    pub epsilon: f64,
    pub levels: Vec<LevelSidecar>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub planted: Option<PlantedSidecar>,
}

#[derive(Clone, Debug, Serialize, Deserialize, PartialEq)]
pub struct LevelSidecar {
    pub level: u32,
    pub t: u64,
    pub d: u64,
    pub bucket_count: u64,
    pub bucket_len: u64,
    /// 1-based active bucket indices.
    pub active_indices: Vec<u64>,
    pub super_elements_per_bucket: u64,
}

/// Public parameters of a planted instance (the sets themselves live in
/// the stream).
#[derive(Clone, Debug, Serialize, Deserialize, PartialEq)]
pub struct PlantedSidecar {
    pub level: u32,
    pub label: String,
    pub t: u64,
    pub d: u64,
    pub k: u64,
    pub set_size: u64,
    /// Elements appended after the base stream: `k * d`.
    pub suffix_len: u64,
    pub exact_suffix_f2: Option<u128>,
}

pub fn sidecar_for(
    layout: &MultiLevelLayout,
    planted: Option<(u32, &EdisjInstance)>,
) -> LayoutSidecar {
    LayoutSidecar {
        version: 1,
        n: layout.n,
        epsilon: layout.epsilon,
        levels: layout
            .levels
            .iter()
            .map(|l| LevelSidecar {
                level: l.level,
                t: l.t,
                d: l.d,
                bucket_count: l.bucket_count,
                bucket_len: l.bucket_len,
                active_indices: l.active_indices.clone(),
                super_elements_per_bucket: l.super_elements_per_bucket,
            })
            .collect(),
        planted: planted.map(|(level, inst)| PlantedSidecar {
            level,
            label: inst.label.as_str().to_string(),
            t: inst.t,
            d: inst.d,
            k: inst.k,
            set_size: inst.set_size,
            suffix_len: inst.k * inst.d,
            exact_suffix_f2: None,
        }),
    }
}

pub fn write_sidecar(path: &Path, sidecar: &LayoutSidecar) -> Result<()> {
    let file = File::create(path).with_context(|| format!("creating {}", path.display()))?;
    serde_json::to_writer_pretty(BufWriter::new(file), sidecar)?;
    Ok(())
}

pub fn read_sidecar(path: &Path) -> Result<LayoutSidecar> {
    let file = File::open(path).with_context(|| format!("opening {}", path.display()))?;
    Ok(serde_json::from_reader(BufReader::new(file))?)
}

pub fn write_sketch_file(path: &Path, sketch: &F2Sketch) -> Result<()> {
    let bytes = codec::encode(sketch).to_bytes();
    std::fs::write(path, bytes).with_context(|| format!("writing {}", path.display()))
}

pub fn read_sketch_file(path: &Path) -> Result<F2Sketch> {
    let bytes = std::fs::read(path).with_context(|| format!("reading {}", path.display()))?;
    let enc = EncodedSketch::from_bytes(&bytes)?;
    Ok(codec::decode(&enc)?)
}
