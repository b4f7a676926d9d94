//! Canonical dataset format: UTF-8 JSON Lines.
//!
//! First line is a header `{"grid_w": int, "grid_h": int, "name": str}`, then
//! one object per trajectory: `{"id": int, "cells": [int,...], "label": int|null}`.
//! Unknown keys are rejected. A blank file loads as the empty dataset.

use std::fs::File;
use std::io::{BufRead, BufReader, BufWriter, Read, Write};
use std::path::Path;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use super::{CellId, ClassLabel, DataError, Dataset, Trajectory};

#[derive(Debug, Error)]
pub enum IoError {
    #[error(transparent)]
    Io(#[from] std::io::Error),
    #[error("line {line}: {source}")]
    Parse {
        line: usize,
        #[source]
        source: serde_json::Error,
    },
    #[error("line {line}: trajectory {id}: class label code out of range: {code}")]
    BadLabel { line: usize, id: u64, code: u8 },
    #[error(transparent)]
    Data(#[from] DataError),
}

#[derive(Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct Header {
    grid_w: u32,
    grid_h: u32,
    name: String,
}

#[derive(Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct Record {
    id: u64,
    cells: Vec<u32>,
    #[serde(default)]
    label: Option<u8>,
}

/// Parse a dataset from any reader. Line numbers in errors are 1-based.
pub fn read_dataset<R: Read>(reader: R) -> Result<Dataset, IoError> {
    let mut lines = BufReader::new(reader).lines();
    let header: Header = loop {
        match lines.next() {
            None => return Ok(Dataset::empty()),
            Some(line) => {
                let line = line?;
                if line.trim().is_empty() {
                    continue;
                }
                break serde_json::from_str(&line)
                    .map_err(|source| IoError::Parse { line: 1, source })?;
            }
        }
    };
    let mut trajectories = Vec::new();
    for (idx, line) in lines.enumerate() {
        let line = line?;
        let line_no = idx + 2;
        let record: Record = serde_json::from_str(&line).map_err(|source| IoError::Parse {
            line: line_no,
            source,
        })?;
        let label = match record.label {
            None => None,
            Some(code) => Some(ClassLabel::from_code(code).ok_or(IoError::BadLabel {
                line: line_no,
                id: record.id,
                code,
            })?),
        };
        let cells = record.cells.into_iter().map(CellId::new).collect();
        trajectories.push(Trajectory::new(record.id, cells, label)?);
    }
    Ok(Dataset::new(
        header.grid_w,
        header.grid_h,
        header.name,
        trajectories,
    )?)
}

/// Write the canonical JSON Lines form of a dataset.
pub fn write_dataset<W: Write>(ds: &Dataset, writer: W) -> Result<(), IoError> {
    let mut w = BufWriter::new(writer);
    let header = Header {
        grid_w: ds.grid_w(),
        grid_h: ds.grid_h(),
        name: ds.name().to_string(),
    };
    serde_json::to_writer(&mut w, &header).map_err(io_from_json)?;
    w.write_all(b"\n")?;
    for t in ds {
        let record = Record {
            id: t.id(),
            cells: t.cells().iter().map(|c| c.value()).collect(),
            label: t.label().map(ClassLabel::code),
        };
        serde_json::to_writer(&mut w, &record).map_err(io_from_json)?;
        w.write_all(b"\n")?;
    }
    w.flush()?;
    Ok(())
}

fn io_from_json(err: serde_json::Error) -> IoError {
    IoError::Io(err.into())
}

pub fn load_dataset<P: AsRef<Path>>(path: P) -> Result<Dataset, IoError> {
    read_dataset(File::open(path)?)
}

pub fn save_dataset<P: AsRef<Path>>(ds: &Dataset, path: P) -> Result<(), IoError> {
    write_dataset(ds, File::create(path)?)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn parse(text: &str) -> Result<Dataset, IoError> {
        read_dataset(text.as_bytes())
    }

    #[test]
    fn minimal_dataset_round_trips() {
        let ds = parse(
            "{\"grid_w\":4,\"grid_h\":4,\"name\":\"toy\"}\n{\"id\":0,\"cells\":[1,2,3],\"label\":2}\n",
        )
        .unwrap();
        assert_eq!(ds.n(), 1);
        assert_eq!(ds.trajectories()[0].len(), 3);
        assert_eq!(ds.trajectories()[0].label(), Some(ClassLabel::Nt));

        let mut buf = Vec::new();
        write_dataset(&ds, &mut buf).unwrap();
        let back = read_dataset(buf.as_slice()).unwrap();
        assert_eq!(ds, back);
    }

    #[test]
    fn duplicate_cell_names_offending_id() {
        let err = parse("{\"grid_w\":4,\"grid_h\":4,\"name\":\"\"}\n{\"id\":0,\"cells\":[1,1,2]}\n")
            .unwrap_err();
        match err {
            IoError::Data(DataError::DuplicateCell { id: 0, cell: 1 }) => {}
            other => panic!("unexpected error {other:?}"),
        }
    }

    #[test]
    fn empty_file_is_empty_dataset() {
        let ds = parse("").unwrap();
        assert_eq!(ds.n(), 0);
        assert_eq!(ds, Dataset::empty());
    }

    #[test]
    fn malformed_line_reports_line_number() {
        let err =
            parse("{\"grid_w\":4,\"grid_h\":4,\"name\":\"\"}\n{\"id\":0,\"cells\":[1]}\nnot json\n")
                .unwrap_err();
        match err {
            IoError::Parse { line: 3, .. } => {}
            other => panic!("unexpected error {other:?}"),
        }
    }

    #[test]
    fn unknown_keys_rejected() {
        let err = parse("{\"grid_w\":4,\"grid_h\":4,\"name\":\"\",\"extra\":1}\n").unwrap_err();
        assert!(matches!(err, IoError::Parse { line: 1, .. }));
        let err =
            parse("{\"grid_w\":4,\"grid_h\":4,\"name\":\"\"}\n{\"id\":0,\"cells\":[1],\"x\":2}\n")
                .unwrap_err();
        assert!(matches!(err, IoError::Parse { line: 2, .. }));
    }

    #[test]
    fn missing_label_key_means_unlabeled() {
        let ds = parse("{\"grid_w\":4,\"grid_h\":4,\"name\":\"\"}\n{\"id\":7,\"cells\":[0]}\n").unwrap();
        assert_eq!(ds.trajectories()[0].label(), None);
        let ds = parse(
            "{\"grid_w\":4,\"grid_h\":4,\"name\":\"\"}\n{\"id\":7,\"cells\":[0],\"label\":null}\n",
        )
        .unwrap();
        assert_eq!(ds.trajectories()[0].label(), None);
    }

    #[test]
    fn save_to_unwritable_path_is_io_error() {
        let err = save_dataset(&Dataset::empty(), "/nonexistent-dir/out.jsonl").unwrap_err();
        assert!(matches!(err, IoError::Io(_)));
    }
}
