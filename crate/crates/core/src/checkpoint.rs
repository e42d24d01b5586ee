//! On-disk formats for trained models.
//!
//! A model checkpoint is the JSON serialization of [`Model`]. Embedding
//! tables can additionally be exported in a compact binary layout:
//!
//! ```text
//! magic  b"WLEB"
//! u64    variant   0 atomic, 1 wl, 2 cwl, 3 gwl
//! u64    J         rows of the (atom-side) table, UNKNOWN row included
//! u64    d         output width
//! u64    d1, d2, J2   only for cwl / gwl
//! f64    ...       tables, then mixing or gate matrices, row-major
//! ```
//!
//! Every integer and float is little-endian.

use std::fs::File;
use std::io::{BufReader, BufWriter, Read, Write};
use std::path::Path;

use ndarray::Array2;

use crate::embedding::{EmbeddingKind, EmbeddingParams};
use crate::error::{Error, Result};
use crate::nn::Model;

const MAGIC: &[u8; 4] = b"WLEB";

/// Embedding parameters detached from a parameter store.
#[derive(Debug, Clone, PartialEq)]
pub enum EmbeddingCheckpoint {
    Atomic {
        table: Array2<f64>,
    },
    NaiveWl {
        table: Array2<f64>,
    },
    /// `mix` is `(d₁ + d₂) × d`.
    Cwl {
        atom_table: Array2<f64>,
        neighborhood_table: Array2<f64>,
        mix: Array2<f64>,
    },
    Gwl {
        atom_table: Array2<f64>,
        neighborhood_table: Array2<f64>,
        gate_atom: Array2<f64>,
        gate_neighborhood: Array2<f64>,
    },
}

fn variant_code(kind: EmbeddingKind) -> u64 {
    match kind {
        EmbeddingKind::Atomic => 0,
        EmbeddingKind::NaiveWl => 1,
        EmbeddingKind::Cwl => 2,
        EmbeddingKind::Gwl => 3,
    }
}

impl EmbeddingCheckpoint {
    pub fn kind(&self) -> EmbeddingKind {
        match self {
            Self::Atomic { .. } => EmbeddingKind::Atomic,
            Self::NaiveWl { .. } => EmbeddingKind::NaiveWl,
            Self::Cwl { .. } => EmbeddingKind::Cwl,
            Self::Gwl { .. } => EmbeddingKind::Gwl,
        }
    }

    pub fn from_model(model: &Model) -> Self {
        let get = |id| model.store.get(id).clone();
        match model.embedding {
            EmbeddingParams::Atomic { table } => Self::Atomic { table: get(table) },
            EmbeddingParams::NaiveWl { table } => Self::NaiveWl { table: get(table) },
            EmbeddingParams::Cwl {
                atom_table,
                neighborhood_table,
                mix,
            } => Self::Cwl {
                atom_table: get(atom_table),
                neighborhood_table: get(neighborhood_table),
                mix: get(mix),
            },
            EmbeddingParams::Gwl {
                atom_table,
                neighborhood_table,
                gate_atom,
                gate_neighborhood,
            } => Self::Gwl {
                atom_table: get(atom_table),
                neighborhood_table: get(neighborhood_table),
                gate_atom: get(gate_atom),
                gate_neighborhood: get(gate_neighborhood),
            },
        }
    }

    /// Copies the arrays into `model`, which must have the same variant and shapes.
    pub fn apply_to(&self, model: &mut Model) -> Result<()> {
        let pairs: Vec<(crate::autodiff::ParamId, &Array2<f64>)> = match (self, model.embedding) {
            (Self::Atomic { table: a }, EmbeddingParams::Atomic { table })
            | (Self::NaiveWl { table: a }, EmbeddingParams::NaiveWl { table }) => vec![(table, a)],
            (
                Self::Cwl {
                    atom_table: a,
                    neighborhood_table: n,
                    mix: m,
                },
                EmbeddingParams::Cwl {
                    atom_table,
                    neighborhood_table,
                    mix,
                },
            ) => vec![(atom_table, a), (neighborhood_table, n), (mix, m)],
            (
                Self::Gwl {
                    atom_table: a,
                    neighborhood_table: n,
                    gate_atom: g1,
                    gate_neighborhood: g2,
                },
                EmbeddingParams::Gwl {
                    atom_table,
                    neighborhood_table,
                    gate_atom,
                    gate_neighborhood,
                },
            ) => vec![
                (atom_table, a),
                (neighborhood_table, n),
                (gate_atom, g1),
                (gate_neighborhood, g2),
            ],
            (_, other) => {
                return Err(Error::WrongEmbeddingVariant {
                    expected: self.kind().name(),
                    actual: other.kind().name(),
                })
            }
        };
        for &(id, value) in &pairs {
            if model.store.get(id).dim() != value.dim() {
                return Err(Error::Checkpoint(format!(
                    "parameter {} has shape {:?}, checkpoint has {:?}",
                    model.store.name(id),
                    model.store.get(id).dim(),
                    value.dim()
                )));
            }
        }
        for (id, value) in pairs {
            model.store.get_mut(id).assign(value);
        }
        Ok(())
    }

    fn arrays(&self) -> Vec<&Array2<f64>> {
        match self {
            Self::Atomic { table } | Self::NaiveWl { table } => vec![table],
            Self::Cwl {
                atom_table,
                neighborhood_table,
                mix,
            } => vec![atom_table, neighborhood_table, mix],
            Self::Gwl {
                atom_table,
                neighborhood_table,
                gate_atom,
                gate_neighborhood,
            } => vec![atom_table, neighborhood_table, gate_atom, gate_neighborhood],
        }
    }

    pub fn write<W: Write>(&self, mut out: W) -> Result<()> {
        out.write_all(MAGIC)?;
        let mut header = vec![variant_code(self.kind())];
        match self {
            Self::Atomic { table } | Self::NaiveWl { table } => {
                header.extend([table.nrows() as u64, table.ncols() as u64]);
            }
            Self::Cwl {
                atom_table,
                neighborhood_table,
                mix,
            } => header.extend([
                atom_table.nrows() as u64,
                mix.ncols() as u64,
                atom_table.ncols() as u64,
                neighborhood_table.ncols() as u64,
                neighborhood_table.nrows() as u64,
            ]),
            Self::Gwl {
                atom_table,
                neighborhood_table,
                ..
            } => header.extend([
                atom_table.nrows() as u64,
                atom_table.ncols() as u64,
                atom_table.ncols() as u64,
                neighborhood_table.ncols() as u64,
                neighborhood_table.nrows() as u64,
            ]),
        }
        for v in header {
            out.write_all(&v.to_le_bytes())?;
        }
        for array in self.arrays() {
            for v in array.iter() {
                out.write_all(&v.to_le_bytes())?;
            }
        }
        out.flush()?;
        Ok(())
    }

    pub fn read<R: Read>(mut input: R) -> Result<Self> {
        let mut magic = [0u8; 4];
        input
            .read_exact(&mut magic)
            .map_err(|_| Error::Checkpoint("truncated header".into()))?;
        if &magic != MAGIC {
            return Err(Error::Checkpoint("not an embedding checkpoint".into()));
        }
        let mut next_u64 = || -> Result<usize> {
            let mut buf = [0u8; 8];
            input
                .read_exact(&mut buf)
                .map_err(|_| Error::Checkpoint("truncated header".into()))?;
            usize::try_from(u64::from_le_bytes(buf))
                .map_err(|_| Error::Checkpoint("header value out of range".into()))
        };
        let variant = next_u64()?;
        let rows = next_u64()?;
        let dim = next_u64()?;
        let split = match variant {
            0 | 1 => None,
            2 | 3 => Some((next_u64()?, next_u64()?, next_u64()?)),
            other => return Err(Error::Checkpoint(format!("unknown variant code {other}"))),
        };
        if let Some((d1, d2, _)) = split {
            if variant == 3 && (d1 != dim || d2 != dim) {
                return Err(Error::Checkpoint(
                    "gated tables must match the output width".into(),
                ));
            }
        }
        let mut read_array = |r: usize, c: usize| -> Result<Array2<f64>> {
            let len = r
                .checked_mul(c)
                .ok_or_else(|| Error::Checkpoint("array size overflows".into()))?;
            let mut bytes = vec![0u8; len * 8];
            input
                .read_exact(&mut bytes)
                .map_err(|_| Error::Checkpoint("truncated data".into()))?;
            let values = bytes
                .chunks_exact(8)
                .map(|b| f64::from_le_bytes(b.try_into().expect("8-byte chunk")))
                .collect();
            Ok(Array2::from_shape_vec((r, c), values).expect("length matches shape"))
        };
        let checkpoint = match (variant, split) {
            (0, _) => Self::Atomic {
                table: read_array(rows, dim)?,
            },
            (1, _) => Self::NaiveWl {
                table: read_array(rows, dim)?,
            },
            (2, Some((d1, d2, rows2))) => Self::Cwl {
                atom_table: read_array(rows, d1)?,
                neighborhood_table: read_array(rows2, d2)?,
                mix: read_array(d1 + d2, dim)?,
            },
            (_, Some((_, _, rows2))) => Self::Gwl {
                atom_table: read_array(rows, dim)?,
                neighborhood_table: read_array(rows2, dim)?,
                gate_atom: read_array(dim, dim)?,
                gate_neighborhood: read_array(dim, dim)?,
            },
            _ => unreachable!("split header read for variants 2 and 3"),
        };
        let mut rest = [0u8; 1];
        if input.read(&mut rest)? != 0 {
            return Err(Error::Checkpoint(
                "trailing bytes after embedding data".into(),
            ));
        }
        Ok(checkpoint)
    }
}

pub fn save_embedding(path: &Path, checkpoint: &EmbeddingCheckpoint) -> Result<()> {
    checkpoint.write(BufWriter::new(File::create(path)?))
}

pub fn load_embedding(path: &Path) -> Result<EmbeddingCheckpoint> {
    EmbeddingCheckpoint::read(BufReader::new(File::open(path)?))
}

pub fn save_model(path: &Path, model: &Model) -> Result<()> {
    let mut out = BufWriter::new(File::create(path)?);
    serde_json::to_writer(&mut out, model)?;
    out.flush()?;
    Ok(())
}

pub fn load_model(path: &Path) -> Result<Model> {
    let file = BufReader::new(File::open(path)?);
    serde_json::from_reader(file).map_err(|e| Error::Checkpoint(e.to_string()))
}

/// Loss history as `epoch,loss` lines, epochs counted from 1.
pub fn loss_history_csv(history: &[f64]) -> String {
    let mut out = String::from("epoch,loss\n");
    for (epoch, loss) in history.iter().enumerate() {
        out.push_str(&format!("{},{}\n", epoch + 1, loss));
    }
    out
}
