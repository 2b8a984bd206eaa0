//! `SOMQE1` map files.
//!
//! Layout: the ASCII line `SOMQE1`, the ASCII line `<rows> <cols> <dim>`,
//! then `rows * cols * dim` little-endian `f64` weights, node-major.

use std::fs;
use std::path::Path;

use thiserror::Error;

use crate::som::{SomError, SomMap};

pub const MAGIC: &str = "SOMQE1";

#[derive(Debug, Error)]
pub enum MapFileError {
    #[error("bad magic: expected `{MAGIC}`")]
    BadMagic,
    #[error("malformed dimension line: {0}")]
    BadHeader(String),
    #[error("truncated weight payload: expected {expected} bytes, found {found}")]
    Truncated { expected: usize, found: usize },
    #[error("{extra} trailing bytes after weight payload")]
    TrailingBytes { extra: usize },
    #[error(transparent)]
    Map(#[from] SomError),
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

pub fn encode_map(map: &SomMap) -> Vec<u8> {
    let mut out = format!("{MAGIC}\n{} {} {}\n", map.rows(), map.cols(), map.dim()).into_bytes();
    out.reserve(map.weights().len() * 8);
    for w in map.weights() {
        out.extend_from_slice(&w.to_le_bytes());
    }
    out
}

fn take_line(bytes: &[u8]) -> Option<(&[u8], &[u8])> {
    let nl = bytes.iter().position(|&b| b == b'\n')?;
    Some((&bytes[..nl], &bytes[nl + 1..]))
}

pub fn decode_map(bytes: &[u8]) -> Result<SomMap, MapFileError> {
    let (magic, rest) = take_line(bytes).ok_or(MapFileError::BadMagic)?;
    if magic != MAGIC.as_bytes() {
        return Err(MapFileError::BadMagic);
    }
    let (dims, payload) =
        take_line(rest).ok_or_else(|| MapFileError::BadHeader("missing newline".into()))?;
    let dims = std::str::from_utf8(dims).map_err(|_| MapFileError::BadHeader("not ASCII".into()))?;
    let parsed: Vec<usize> = dims
        .split(' ')
        .map(|t| t.parse::<usize>())
        .collect::<Result<_, _>>()
        .map_err(|_| MapFileError::BadHeader(format!("`{dims}`")))?;
    let [rows, cols, dim] = parsed[..] else {
        return Err(MapFileError::BadHeader(format!("`{dims}`")));
    };
    let expected = rows
        .checked_mul(cols)
        .and_then(|n| n.checked_mul(dim))
        .and_then(|n| n.checked_mul(8))
        .ok_or_else(|| MapFileError::BadHeader(format!("`{dims}` overflows")))?;
    if payload.len() < expected {
        return Err(MapFileError::Truncated { expected, found: payload.len() });
    }
    if payload.len() > expected {
        return Err(MapFileError::TrailingBytes { extra: payload.len() - expected });
    }
    let weights = payload
        .chunks_exact(8)
        .map(|c| f64::from_le_bytes(c.try_into().expect("chunk of 8")))
        .collect();
    Ok(SomMap::from_weights(rows, cols, dim, weights)?)
}

pub fn save_map(map: &SomMap, path: impl AsRef<Path>) -> Result<(), MapFileError> {
    fs::write(path, encode_map(map))?;
    Ok(())
}

pub fn load_map(path: impl AsRef<Path>) -> Result<SomMap, MapFileError> {
    decode_map(&fs::read(path)?)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn sample_map() -> SomMap {
        SomMap::from_weights(2, 3, 2, (0..12).map(|i| i as f64 * 0.1 - 0.3).collect()).unwrap()
    }

    #[test]
    fn header_layout() {
        let bytes = encode_map(&sample_map());
        assert!(bytes.starts_with(b"SOMQE1\n2 3 2\n"));
        assert_eq!(bytes.len(), 13 + 12 * 8);
        assert_eq!(&bytes[13..21], &(-0.3f64).to_le_bytes());
    }

    #[test]
    fn round_trip_is_bitwise() {
        let m = sample_map();
        let back = decode_map(&encode_map(&m)).unwrap();
        assert_eq!(
            back.weights().iter().map(|w| w.to_bits()).collect::<Vec<_>>(),
            m.weights().iter().map(|w| w.to_bits()).collect::<Vec<_>>()
        );
        assert_eq!((back.rows(), back.cols(), back.dim()), (2, 3, 2));
    }

    #[test]
    fn corrupted_magic_names_expected() {
        let mut bytes = encode_map(&sample_map());
        bytes[5] = b'2';
        let err = decode_map(&bytes).unwrap_err();
        assert!(matches!(err, MapFileError::BadMagic));
        assert!(err.to_string().contains("SOMQE1"));
    }

    #[test]
    fn truncated_payload_reports_counts() {
        let mut bytes = encode_map(&sample_map());
        bytes.truncate(bytes.len() - 5);
        let err = decode_map(&bytes).unwrap_err();
        match err {
            MapFileError::Truncated { expected, found } => {
                assert_eq!(expected, 96);
                assert_eq!(found, 91);
            }
            other => panic!("unexpected {other:?}"),
        }
        assert!(decode_map(&bytes).unwrap_err().to_string().contains("96"));
    }

    #[test]
    fn rejects_trailing_and_bad_dims() {
        let mut bytes = encode_map(&sample_map());
        bytes.push(0);
        assert!(matches!(decode_map(&bytes), Err(MapFileError::TrailingBytes { extra: 1 })));
        assert!(matches!(decode_map(b"SOMQE1\n2 x 2\n"), Err(MapFileError::BadHeader(_))));
        assert!(matches!(decode_map(b"SOMQE1\n0 1 1\n"), Err(MapFileError::Map(_))));
    }
}
