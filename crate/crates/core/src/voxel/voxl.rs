//! VOXL: a four-line ASCII header followed by one occupancy byte per voxel.
//!
//! ```text
//! VOXL 1
//! dim 3
//! size 32 32 32
//! spacing 1
//! <nx*ny*nz bytes, 0x00 exterior / 0x01 interior, x fastest>
//! ```

use std::fs;
use std::path::Path;

use thiserror::Error;

use super::{Grid, VoxelError, VoxelVolume};

#[derive(Debug, Error)]
pub enum VoxlError {
    #[error("malformed VOXL header: {0}")]
    MalformedHeader(String),
    #[error("unsupported VOXL version {0:?}")]
    UnsupportedVersion(String),
    #[error("payload has {actual} bytes but the header declares {expected} voxels")]
    SizeMismatch { expected: usize, actual: usize },
    #[error("occupancy byte {value:#04x} at voxel {index} is neither 0 nor 1")]
    InvalidOccupancy { index: usize, value: u8 },
    #[error(transparent)]
    Voxel(#[from] VoxelError),
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

const MAGIC: &str = "VOXL";
const VERSION: &str = "1";

/// Serializes a valid volume. Spacing uses the shortest decimal that
/// round-trips, so `read_voxl(write_voxl(v)) == v` bit-for-bit.
pub fn write_voxl(volume: &VoxelVolume) -> Result<Vec<u8>, VoxlError> {
    volume.ensure_valid()?;
    let grid = volume.grid();
    let size = grid
        .extents()
        .iter()
        .map(|n| n.to_string())
        .collect::<Vec<_>>()
        .join(" ");
    let header = format!(
        "{MAGIC} {VERSION}\ndim {}\nsize {size}\nspacing {}\n",
        grid.dim(),
        grid.spacing()
    );
    let mut out = Vec::with_capacity(header.len() + grid.len());
    out.extend_from_slice(header.as_bytes());
    out.extend(volume.occupancy().iter().map(|&b| b as u8));
    Ok(out)
}

pub fn read_voxl(bytes: &[u8]) -> Result<VoxelVolume, VoxlError> {
    let mut rest = bytes;
    let mut line = || -> Result<&str, VoxlError> {
        let end = rest
            .iter()
            .position(|&b| b == b'\n')
            .ok_or_else(|| VoxlError::MalformedHeader("truncated header".into()))?;
        let text = std::str::from_utf8(&rest[..end])
            .map_err(|_| VoxlError::MalformedHeader("header is not ASCII".into()))?;
        rest = &rest[end + 1..];
        Ok(text)
    };

    let magic = line()?;
    match magic.split_once(' ') {
        Some((MAGIC, VERSION)) => {}
        Some((MAGIC, other)) => return Err(VoxlError::UnsupportedVersion(other.to_string())),
        _ => {
            return Err(VoxlError::MalformedHeader(format!(
                "bad magic line {magic:?}"
            )))
        }
    }

    let dim: usize = keyed(line()?, "dim")?
        .parse()
        .map_err(|_| VoxlError::MalformedHeader("dim is not an integer".into()))?;
    if dim != 2 && dim != 3 {
        return Err(VoxlError::MalformedHeader(format!(
            "dim {dim} not in {{2, 3}}"
        )));
    }

    let extents = keyed(line()?, "size")?
        .split(' ')
        .map(|s| s.parse::<usize>())
        .collect::<Result<Vec<_>, _>>()
        .map_err(|_| VoxlError::MalformedHeader("size entries must be integers".into()))?;
    if extents.len() != dim {
        return Err(VoxlError::MalformedHeader(format!(
            "size lists {} extents for dim {dim}",
            extents.len()
        )));
    }

    let spacing: f64 = keyed(line()?, "spacing")?
        .parse()
        .map_err(|_| VoxlError::MalformedHeader("spacing is not a decimal".into()))?;

    let grid = Grid::new(dim, &extents, spacing)?;
    let payload = rest;
    if payload.len() != grid.len() {
        return Err(VoxlError::SizeMismatch {
            expected: grid.len(),
            actual: payload.len(),
        });
    }
    let occupancy = payload
        .iter()
        .enumerate()
        .map(|(index, &value)| match value {
            0 => Ok(false),
            1 => Ok(true),
            _ => Err(VoxlError::InvalidOccupancy { index, value }),
        })
        .collect::<Result<Vec<_>, _>>()?;
    Ok(VoxelVolume::from_occupancy(grid, occupancy)?)
}

fn keyed<'a>(line: &'a str, key: &str) -> Result<&'a str, VoxlError> {
    match line.split_once(' ') {
        Some((k, v)) if k == key && !v.is_empty() => Ok(v),
        _ => Err(VoxlError::MalformedHeader(format!(
            "expected `{key} ...`, found {line:?}"
        ))),
    }
}

pub fn read_voxl_file(path: impl AsRef<Path>) -> Result<VoxelVolume, VoxlError> {
    read_voxl(&fs::read(path)?)
}

pub fn write_voxl_file(volume: &VoxelVolume, path: impl AsRef<Path>) -> Result<(), VoxlError> {
    fs::write(path, write_voxl(volume)?)?;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn single_voxel() -> VoxelVolume {
        let grid = Grid::new(3, &[3, 3, 3], 1.0).unwrap();
        VoxelVolume::from_fn(grid, |c| c == [1, 1, 1])
    }

    #[test]
    fn header_layout_is_exact() {
        let bytes = write_voxl(&single_voxel()).unwrap();
        let header = b"VOXL 1\ndim 3\nsize 3 3 3\nspacing 1\n";
        assert_eq!(&bytes[..header.len()], header);
        assert_eq!(bytes.len(), header.len() + 27);
        assert_eq!(bytes[header.len() + 13], 1);
    }

    #[test]
    fn single_voxel_round_trip() {
        let v = single_voxel();
        assert_eq!(read_voxl(&write_voxl(&v).unwrap()).unwrap(), v);
    }

    #[test]
    fn truncated_payload_is_size_mismatch() {
        let mut bytes = write_voxl(&single_voxel()).unwrap();
        bytes.pop();
        assert!(matches!(
            read_voxl(&bytes),
            Err(VoxlError::SizeMismatch {
                expected: 27,
                actual: 26
            })
        ));
    }

    #[test]
    fn trailing_byte_is_size_mismatch() {
        let mut bytes = write_voxl(&single_voxel()).unwrap();
        bytes.push(0);
        assert!(matches!(
            read_voxl(&bytes),
            Err(VoxlError::SizeMismatch { .. })
        ));
    }

    #[test]
    fn version_two_is_unsupported() {
        let mut bytes = b"VOXL 2\ndim 3\nsize 3 3 3\nspacing 1\n".to_vec();
        bytes.extend([0u8; 27]);
        assert!(matches!(read_voxl(&bytes), Err(VoxlError::UnsupportedVersion(v)) if v == "2"));
    }

    #[test]
    fn bad_occupancy_byte_rejected() {
        let mut bytes = write_voxl(&single_voxel()).unwrap();
        let n = bytes.len();
        bytes[n - 1] = 2;
        assert!(matches!(
            read_voxl(&bytes),
            Err(VoxlError::InvalidOccupancy {
                index: 26,
                value: 2
            })
        ));
    }

    #[test]
    fn malformed_headers_rejected() {
        for header in [
            "VOXEL 1\ndim 3\nsize 3 3 3\nspacing 1\n",
            "VOXL 1\ndim 4\nsize 3 3 3\nspacing 1\n",
            "VOXL 1\ndim 3\nsize 3 3\nspacing 1\n",
            "VOXL 1\ndim 3\nsize 3 3 3\nspacing -1\n",
            "VOXL 1\ndim 3\nsize 3 3 3\nstep 1\n",
            "VOXL 1\ndim 3\n",
        ] {
            let mut bytes = header.as_bytes().to_vec();
            bytes.extend([0u8; 27]);
            assert!(read_voxl(&bytes).is_err(), "{header:?} accepted");
        }
    }

    #[test]
    fn writing_invalid_volume_fails() {
        let grid = Grid::new(2, &[3, 3], 1.0).unwrap();
        let empty = VoxelVolume::from_occupancy(grid, vec![false; 9]).unwrap();
        assert!(write_voxl(&empty).is_err());
    }

    fn valid_volume() -> impl Strategy<Value = VoxelVolume> {
        (
            2usize..=3,
            prop::collection::vec(3usize..8, 3),
            prop::sample::select(vec![1.0, 0.5, 0.25, 0.1, 1.0 / 3.0, 2.75]),
            any::<u64>(),
        )
            .prop_map(|(dim, ext, h, seed)| {
                let grid = Grid::new(dim, &ext[..dim], h).unwrap();
                let mut state = seed | 1;
                let mut v = VoxelVolume::from_fn(grid, |c| {
                    state ^= state << 13;
                    state ^= state >> 7;
                    state ^= state << 17;
                    !grid.on_box_face(c) && state % 3 == 0
                });
                if v.interior_count() == 0 {
                    let centre = grid.index([1, 1, if dim == 3 { 1 } else { 0 }]);
                    let mut occ = v.occupancy().to_vec();
                    occ[centre] = true;
                    v = VoxelVolume::from_occupancy(grid, occ).unwrap();
                }
                v
            })
    }

    proptest! {
        #[test]
        fn round_trip_is_bit_exact(v in valid_volume()) {
            let bytes = write_voxl(&v).unwrap();
            let back = read_voxl(&bytes).unwrap();
            prop_assert_eq!(back.spacing().to_bits(), v.spacing().to_bits());
            prop_assert_eq!(write_voxl(&back).unwrap(), bytes);
            prop_assert_eq!(back, v);
        }
    }
}
