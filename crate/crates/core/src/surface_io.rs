//! SRTF binary surface files.
//!
//! Layout, little-endian throughout:
//!
//! | offset | type    | field                        |
//! |--------|---------|------------------------------|
//! | 0      | `[u8;4]`| magic `SRTF`                 |
//! | 4      | u32     | format version (1)           |
//! | 8      | u32     | m (last column index)        |
//! | 12     | u32     | n (last row index)           |
//! | 16     | f64     | grid spacing, mm             |
//! | 24     | f64     | x_min, mm                    |
//! | 32     | f64     | y_min, mm                    |
//! | 40     | f64     | uncut sentinel (stock), mm   |
//! | 48     | f64 × (m+1)(n+1) | heights, row-major, mm |

use std::fs;
use std::io::Write;
use std::path::Path;

use crate::error::{Error, FormatError, Result};
use crate::grid::{GridSpec, HeightField};

pub const MAGIC: [u8; 4] = *b"SRTF";
pub const VERSION: u32 = 1;
pub const HEADER_LEN: usize = 48;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SurfaceFileHeader {
    pub version: u32,
    pub m: u32,
    pub n: u32,
    pub spacing: f64,
    pub x_min: f64,
    pub y_min: f64,
    pub sentinel: f64,
}

impl SurfaceFileHeader {
    /// Number of payload values the header promises, if it fits in memory.
    pub fn value_count(&self) -> Option<usize> {
        (self.m as usize + 1).checked_mul(self.n as usize + 1)
    }
}

pub fn encode_surface(field: &HeightField) -> Result<Vec<u8>> {
    let spec = field.spec();
    let dim = |v: usize| {
        u32::try_from(v).map_err(|_| FormatError::Header(format!("dimension {v} exceeds u32")))
    };
    let (m, n) = (dim(spec.m())?, dim(spec.n())?);
    let mut out = Vec::with_capacity(HEADER_LEN + 8 * field.heights().len());
    out.extend_from_slice(&MAGIC);
    out.extend_from_slice(&VERSION.to_le_bytes());
    out.extend_from_slice(&m.to_le_bytes());
    out.extend_from_slice(&n.to_le_bytes());
    for v in [spec.spacing(), spec.x_min(), spec.y_min(), field.stock()] {
        out.extend_from_slice(&v.to_le_bytes());
    }
    for h in field.heights() {
        out.extend_from_slice(&h.to_le_bytes());
    }
    Ok(out)
}

fn u32_at(b: &[u8], at: usize) -> u32 {
    u32::from_le_bytes(b[at..at + 4].try_into().expect("4 bytes"))
}

fn f64_at(b: &[u8], at: usize) -> f64 {
    f64::from_le_bytes(b[at..at + 8].try_into().expect("8 bytes"))
}

pub fn decode_header(bytes: &[u8]) -> std::result::Result<SurfaceFileHeader, FormatError> {
    if bytes.len() < HEADER_LEN {
        return Err(FormatError::TruncatedHeader(bytes.len()));
    }
    let magic: [u8; 4] = bytes[0..4].try_into().expect("4 bytes");
    if magic != MAGIC {
        return Err(FormatError::BadMagic(magic));
    }
    let version = u32_at(bytes, 4);
    if version != VERSION {
        return Err(FormatError::Version {
            found: version,
            supported: VERSION,
        });
    }
    Ok(SurfaceFileHeader {
        version,
        m: u32_at(bytes, 8),
        n: u32_at(bytes, 12),
        spacing: f64_at(bytes, 16),
        x_min: f64_at(bytes, 24),
        y_min: f64_at(bytes, 32),
        sentinel: f64_at(bytes, 40),
    })
}

/// Parses a complete SRTF image. The payload length is checked against the
/// header before anything is allocated.
pub fn decode_surface(bytes: &[u8]) -> Result<HeightField> {
    let h = decode_header(bytes)?;
    let payload = &bytes[HEADER_LEN..];
    let expected = h
        .value_count()
        .and_then(|c| c.checked_mul(8))
        .ok_or_else(|| FormatError::Header(format!("{} x {} grid overflows", h.m, h.n)))?;
    if payload.len() < expected {
        return Err(FormatError::TruncatedPayload {
            expected,
            found: payload.len(),
        }
        .into());
    }
    if payload.len() > expected {
        return Err(FormatError::TrailingBytes(payload.len() - expected).into());
    }
    let spec = GridSpec::from_counts(h.spacing, (h.x_min, h.y_min), h.m as usize, h.n as usize)
        .map_err(|e| FormatError::Header(e.to_string()))?;
    if !h.sentinel.is_finite() {
        return Err(FormatError::Header("non-finite sentinel".into()).into());
    }
    let heights: Vec<f64> = payload
        .chunks_exact(8)
        .map(|c| f64::from_le_bytes(c.try_into().expect("8 bytes")))
        .collect();
    if let Some((index, v)) = heights
        .iter()
        .enumerate()
        .find(|(_, v)| !v.is_finite() || **v > h.sentinel)
    {
        return Err(FormatError::Height {
            index,
            reason: format!("{v} is not a finite value at or below the sentinel"),
        }
        .into());
    }
    HeightField::from_heights(spec, h.sentinel, heights)
}

/// Writes `bytes` to a sibling temporary file and renames it over `path`.
pub fn write_atomic(path: &Path, bytes: &[u8]) -> Result<()> {
    let dir = path.parent().filter(|p| !p.as_os_str().is_empty()).unwrap_or(Path::new("."));
    let name = path
        .file_name()
        .ok_or_else(|| Error::io(path, std::io::Error::other("not a file path")))?;
    let tmp = dir.join(format!(".{}.tmp{}", name.to_string_lossy(), std::process::id()));
    let result = (|| {
        let mut f = fs::File::create(&tmp)?;
        f.write_all(bytes)?;
        f.sync_all()?;
        fs::rename(&tmp, path)
    })();
    if let Err(e) = result {
        let _ = fs::remove_file(&tmp);
        return Err(Error::io(path, e));
    }
    Ok(())
}

pub fn write_surface(field: &HeightField, path: &Path) -> Result<()> {
    write_atomic(path, &encode_surface(field)?)
}

pub fn read_surface(path: &Path) -> Result<HeightField> {
    let bytes = fs::read(path).map_err(|e| Error::io(path, e))?;
    decode_surface(&bytes)
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn two_by_two() -> HeightField {
        let spec = GridSpec::from_counts(0.5, (0.0, 0.0), 1, 1).unwrap();
        HeightField::from_heights(spec, 0.5, vec![0.0, 0.1, 0.2, 0.3]).unwrap()
    }

    #[test]
    fn byte_accounting() {
        let bytes = encode_surface(&two_by_two()).unwrap();
        assert_eq!(bytes.len(), HEADER_LEN + 4 * 8);
        assert_eq!(&bytes[..4], b"SRTF");
        assert_eq!(decode_surface(&bytes).unwrap(), two_by_two());
    }

    #[test]
    fn structured_errors() {
        let bytes = encode_surface(&two_by_two()).unwrap();
        let short = &bytes[..bytes.len() - 8];
        assert!(matches!(
            decode_surface(short),
            Err(Error::Format(FormatError::TruncatedPayload { expected: 32, found: 24 }))
        ));
        let mut long = bytes.clone();
        long.push(0);
        assert!(matches!(decode_surface(&long), Err(Error::Format(FormatError::TrailingBytes(1)))));
        let mut magic = bytes.clone();
        magic[0] = b'X';
        assert!(matches!(decode_surface(&magic), Err(Error::Format(FormatError::BadMagic(_)))));
        let mut version = bytes.clone();
        version[4] = 2;
        assert!(matches!(
            decode_surface(&version),
            Err(Error::Format(FormatError::Version { found: 2, supported: 1 }))
        ));
        assert!(matches!(
            decode_surface(&bytes[..20]),
            Err(Error::Format(FormatError::TruncatedHeader(20)))
        ));
        let mut huge = bytes[..HEADER_LEN].to_vec();
        huge[8..12].copy_from_slice(&u32::MAX.to_le_bytes());
        huge[12..16].copy_from_slice(&u32::MAX.to_le_bytes());
        assert!(decode_surface(&huge).is_err());
        let mut nan = bytes.clone();
        nan[HEADER_LEN..HEADER_LEN + 8].copy_from_slice(&f64::NAN.to_le_bytes());
        assert!(matches!(decode_surface(&nan), Err(Error::Format(FormatError::Height { index: 0, .. }))));
    }

    #[test]
    fn file_round_trip() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("s.srtf");
        write_surface(&two_by_two(), &path).unwrap();
        assert_eq!(read_surface(&path).unwrap(), two_by_two());
        assert_eq!(fs::read_dir(dir.path()).unwrap().count(), 1);
        assert!(read_surface(&dir.path().join("missing.srtf")).is_err());
    }

    proptest! {
        #[test]
        fn round_trip_is_bit_exact(m in 1usize..6, n in 1usize..6, seed in prop::collection::vec(-1.0f64..0.5, 49)) {
            let spec = GridSpec::from_counts(0.01, (-0.3, 1.7), m, n).unwrap();
            let h: Vec<f64> = (0..spec.len()).map(|k| seed[k]).collect();
            let field = HeightField::from_heights(spec, 0.5, h).unwrap();
            let back = decode_surface(&encode_surface(&field).unwrap()).unwrap();
            prop_assert_eq!(
                back.heights().iter().map(|v| v.to_bits()).collect::<Vec<_>>(),
                field.heights().iter().map(|v| v.to_bits()).collect::<Vec<_>>()
            );
            prop_assert_eq!(back, field);
        }

        #[test]
        fn arbitrary_bytes_never_panic(bytes in prop::collection::vec(any::<u8>(), 0..128)) {
            let _ = decode_surface(&bytes);
        }
    }
}
