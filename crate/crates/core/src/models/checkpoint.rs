//! Binary checkpoint container.
//!
//! ```text
//! b"KGSEMCKP" | version: u32 LE | header_len: u32 LE | header (JSON) | f64 LE payload
//! ```
//!
//! The payload holds every table row-major, entity tables first, in the order
//! and shapes listed by the header.

use std::fs::File;
use std::io::{BufReader, BufWriter, Read, Write};
use std::path::Path;

use serde::{Deserialize, Serialize};

use super::{Matrix, ModelKind, ModelParameters, Norm};
use crate::error::{Error, Result};

const MAGIC: &[u8; 8] = b"KGSEMCKP";
const VERSION: u32 = 1;

#[derive(Debug, Clone, PartialEq)]
pub struct Checkpoint {
    pub epoch: usize,
    pub params: ModelParameters,
}

#[derive(Serialize, Deserialize)]
struct Header {
    kind: ModelKind,
    dim: usize,
    seed: u64,
    epoch: usize,
    norm: Norm,
    entity_tables: Vec<(usize, usize)>,
    relation_tables: Vec<(usize, usize)>,
}

pub fn write_checkpoint(path: &Path, checkpoint: &Checkpoint) -> Result<()> {
    let p = &checkpoint.params;
    let shape = |m: &Matrix| (m.rows(), m.cols());
    let header = serde_json::to_vec(&Header {
        kind: p.kind,
        dim: p.dim,
        seed: p.seed,
        epoch: checkpoint.epoch,
        norm: p.norm,
        entity_tables: p.entity.iter().map(shape).collect(),
        relation_tables: p.relation.iter().map(shape).collect(),
    })?;
    let file = File::create(path).map_err(|e| Error::io(path, e))?;
    let mut w = BufWriter::new(file);
    let mut write = |bytes: &[u8]| w.write_all(bytes).map_err(|e| Error::io(path, e));
    write(MAGIC)?;
    write(&VERSION.to_le_bytes())?;
    write(&(header.len() as u32).to_le_bytes())?;
    write(&header)?;
    for m in p.tables() {
        for v in m.as_slice() {
            write(&v.to_le_bytes())?;
        }
    }
    w.flush().map_err(|e| Error::io(path, e))
}

pub fn read_checkpoint(path: &Path) -> Result<Checkpoint> {
    let file = File::open(path).map_err(|e| Error::io(path, e))?;
    let mut r = BufReader::new(file);
    let bad = |m: String| Error::Checkpoint(format!("{}: {m}", path.display()));
    let mut read = |buf: &mut [u8]| {
        r.read_exact(buf)
            .map_err(|e| Error::Checkpoint(format!("{}: truncated file ({e})", path.display())))
    };

    let mut magic = [0u8; 8];
    read(&mut magic)?;
    if &magic != MAGIC {
        return Err(bad("not a checkpoint file".into()));
    }
    let mut word = [0u8; 4];
    read(&mut word)?;
    let version = u32::from_le_bytes(word);
    if version != VERSION {
        return Err(bad(format!("unsupported checkpoint version {version}")));
    }
    read(&mut word)?;
    let mut header = vec![0u8; u32::from_le_bytes(word) as usize];
    read(&mut header)?;
    let header: Header = serde_json::from_slice(&header).map_err(|e| bad(format!("bad header: {e}")))?;
    if header.entity_tables.len() != header.kind.entity_tables()
        || header.relation_tables.len() != header.kind.relation_tables()
    {
        return Err(bad(format!("table count does not match model {}", header.kind)));
    }

    let mut load = |&(rows, cols): &(usize, usize)| -> Result<Matrix> {
        if cols != header.dim {
            return Err(bad(format!("table width {cols} differs from dim {}", header.dim)));
        }
        let mut bytes = vec![0u8; rows * cols * 8];
        read(&mut bytes)?;
        let data = bytes
            .chunks_exact(8)
            .map(|c| f64::from_le_bytes(c.try_into().expect("chunk of 8")))
            .collect();
        Matrix::from_vec(rows, cols, data)
    };
    let entity = header.entity_tables.iter().map(&mut load).collect::<Result<Vec<_>>>()?;
    let relation = header.relation_tables.iter().map(&mut load).collect::<Result<Vec<_>>>()?;
    let mut rest = [0u8; 1];
    if r.read(&mut rest).map_err(|e| Error::io(path, e))? != 0 {
        return Err(bad("trailing bytes after payload".into()));
    }
    Ok(Checkpoint {
        epoch: header.epoch,
        params: ModelParameters {
            kind: header.kind,
            dim: header.dim,
            seed: header.seed,
            norm: header.norm,
            entity,
            relation,
        },
    })
}
