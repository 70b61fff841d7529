//! Exact Euclidean distance from interior voxel centres to the nearest
//! exterior voxel centre, plus the equidistant bands sampled by the measure.
//!
//! The transform is the separable lower-envelope-of-parabolas method run on
//! integer squared distances. Envelope breakpoints are compared as exact
//! rationals, so the output is bit-identical to a brute-force search that
//! evaluates `h * sqrt(dx² + dy² + dz²)`.

use thiserror::Error;

use crate::voxel::{Grid, ScalarField, VoxelVolume};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum DistanceError {
    #[error("no interior voxel lies within {tolerance} of distance {delta}")]
    EmptyBand { delta: f64, tolerance: f64 },
    #[error("band parameters invalid: delta {delta}, tolerance {tolerance}")]
    InvalidBand { delta: f64, tolerance: f64 },
    #[error(transparent)]
    Voxel(#[from] crate::voxel::VoxelError),
}

const NO_SITE: i64 = i64::MAX;

/// Squared distance (in voxel units) from every voxel to the nearest exterior
/// voxel; zero on exterior voxels, [`i64::MAX`] if the grid has no exterior.
pub fn squared_distance_transform(volume: &VoxelVolume) -> Vec<i64> {
    let grid = volume.grid();
    let mut sq: Vec<i64> = volume
        .occupancy()
        .iter()
        .map(|&inside| if inside { NO_SITE } else { 0 })
        .collect();
    let ext = grid.extents3();
    let strides = grid.strides();
    let mut line = Vec::new();
    let mut out = Vec::new();
    let mut scratch = Envelope::default();
    for axis in 0..grid.dim() {
        let n = ext[axis];
        let stride = strides[axis];
        let (a, b) = match axis {
            0 => (1, 2),
            1 => (0, 2),
            _ => (0, 1),
        };
        for j in 0..ext[b] {
            for i in 0..ext[a] {
                let mut c = [0; 3];
                c[a] = i;
                c[b] = j;
                let start = grid.index(c);
                line.clear();
                line.extend((0..n).map(|k| sq[start + k * stride]));
                out.resize(n, 0);
                scratch.run(&line, &mut out);
                for (k, &v) in out.iter().enumerate() {
                    sq[start + k * stride] = v;
                }
            }
        }
    }
    sq
}

/// One-dimensional squared-distance transform of a sampled function,
/// reusing its buffers across lines.
#[derive(Default)]
struct Envelope {
    /// Parabola apex positions in the lower envelope.
    sites: Vec<i64>,
    /// Left boundary of each envelope segment as `(numerator, denominator)`;
    /// the first entry is −∞ (denominator 0).
    starts: Vec<(i128, i128)>,
}

impl Envelope {
    fn run(&mut self, f: &[i64], out: &mut [i64]) {
        self.sites.clear();
        self.starts.clear();
        for (q, &fq) in f.iter().enumerate() {
            if fq == NO_SITE {
                continue;
            }
            let q = q as i64;
            loop {
                let Some(&v) = self.sites.last() else {
                    self.sites.push(q);
                    self.starts.push((0, 0));
                    break;
                };
                let s = intersection(f, v, q);
                let &start = self.starts.last().unwrap();
                // Pop while the new parabola overtakes at or before the segment start.
                if start.1 != 0 && le(s, start) {
                    self.sites.pop();
                    self.starts.pop();
                    continue;
                }
                self.sites.push(q);
                self.starts.push(s);
                break;
            }
        }
        if self.sites.is_empty() {
            out.fill(NO_SITE);
            return;
        }
        let mut k = 0;
        for (q, o) in out.iter_mut().enumerate() {
            let qq = q as i128;
            while k + 1 < self.sites.len() && {
                let (num, den) = self.starts[k + 1];
                num < qq * den
            } {
                k += 1;
            }
            let v = self.sites[k];
            let d = q as i64 - v;
            *o = d * d + f[v as usize];
        }
    }
}

/// Abscissa where parabolas rooted at `v < q` meet, as an exact fraction.
fn intersection(f: &[i64], v: i64, q: i64) -> (i128, i128) {
    let fv = f[v as usize] as i128;
    let fq = f[q as usize] as i128;
    let (v, q) = (v as i128, q as i128);
    ((fq + q * q) - (fv + v * v), 2 * (q - v))
}

fn le(a: (i128, i128), b: (i128, i128)) -> bool {
    a.0 * b.1 <= b.0 * a.1
}

/// Distance from each interior voxel centre to the nearest exterior voxel
/// centre in world units; exterior voxels carry 0.
pub fn distance_transform(volume: &VoxelVolume) -> ScalarField {
    let h = volume.spacing();
    let values = squared_distance_transform(volume)
        .into_iter()
        .map(|s| {
            if s == NO_SITE {
                0.0
            } else {
                h * (s as f64).sqrt()
            }
        })
        .collect();
    ScalarField::new(volume, values).expect("distances are finite and sized to the grid")
}

/// Largest interior distance to the boundary; 0 for an empty interior.
pub fn max_thickness(dist: &ScalarField) -> f64 {
    dist.max_interior().unwrap_or(0.0)
}

/// Interior voxels whose boundary distance lies within a window around `delta`.
#[derive(Debug, Clone, PartialEq)]
pub struct Band {
    delta: f64,
    tolerance: f64,
    indices: Vec<usize>,
    grid: Grid,
}

impl Band {
    pub fn delta(&self) -> f64 {
        self.delta
    }

    pub fn tolerance(&self) -> f64 {
        self.tolerance
    }

    /// Voxel indices in ascending order.
    pub fn indices(&self) -> &[usize] {
        &self.indices
    }

    pub fn len(&self) -> usize {
        self.indices.len()
    }

    pub fn is_empty(&self) -> bool {
        self.indices.is_empty()
    }

    pub fn grid(&self) -> &Grid {
        &self.grid
    }
}

/// All interior voxels with `|d − delta| ≤ tolerance`.
pub fn extract_band(dist: &ScalarField, delta: f64, tolerance: f64) -> Result<Band, DistanceError> {
    if !(delta.is_finite() && delta >= 0.0 && tolerance.is_finite() && tolerance > 0.0) {
        return Err(DistanceError::InvalidBand { delta, tolerance });
    }
    let indices: Vec<usize> = dist
        .interior_values()
        .filter(|&(_, d)| (d - delta).abs() <= tolerance)
        .map(|(i, _)| i)
        .collect();
    if indices.is_empty() {
        return Err(DistanceError::EmptyBand { delta, tolerance });
    }
    Ok(Band {
        delta,
        tolerance,
        indices,
        grid: *dist.grid(),
    })
}
