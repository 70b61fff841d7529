//! Occupancy grids, scalar fields living on them, and the VOXL file format.
//!
//! Everything here is dimension-generic: a 2D grid is stored as a 3D grid
//! with `nz == 1`, and neighbour enumeration simply skips the third axis.
//! Linear indices are row-major with `x` fastest, then `y`, then `z`.

mod transform;
mod voxl;

use std::fmt;

use thiserror::Error;

pub use transform::RotationPlane;
pub use voxl::{read_voxl, read_voxl_file, write_voxl, write_voxl_file, VoxlError};

/// Errors raised while constructing grids, volumes and fields.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum VoxelError {
    #[error("unsupported dimension {0}; expected 2 or 3")]
    InvalidDimension(usize),
    #[error("expected {expected} extents for a {expected}D grid, got {actual}")]
    ExtentCount { expected: usize, actual: usize },
    #[error("grid extents must be positive, got {0:?}")]
    ZeroExtent(Vec<usize>),
    #[error("voxel spacing must be positive and finite, got {0}")]
    InvalidSpacing(f64),
    #[error("data length {actual} does not match grid voxel count {expected}")]
    LengthMismatch { expected: usize, actual: usize },
    #[error("field value at voxel {index} is not finite ({value})")]
    NonFinite { index: usize, value: f64 },
    #[error("grids do not match: {0}")]
    GridMismatch(String),
    #[error("invalid volume: {0}")]
    Invalid(ValidationReport),
    #[error("shift by {0:?} moves interior voxels into the padding layer")]
    ShiftOutOfBounds([isize; 3]),
}

/// Uniform axis-aligned grid geometry shared by volumes and fields.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Grid {
    dim: usize,
    extents: [usize; 3],
    spacing: f64,
}

impl Grid {
    pub fn new(dim: usize, extents: &[usize], spacing: f64) -> Result<Self, VoxelError> {
        if dim != 2 && dim != 3 {
            return Err(VoxelError::InvalidDimension(dim));
        }
        if extents.len() != dim {
            return Err(VoxelError::ExtentCount {
                expected: dim,
                actual: extents.len(),
            });
        }
        if extents.contains(&0) {
            return Err(VoxelError::ZeroExtent(extents.to_vec()));
        }
        if !(spacing.is_finite() && spacing > 0.0) {
            return Err(VoxelError::InvalidSpacing(spacing));
        }
        let mut full = [1; 3];
        full[..dim].copy_from_slice(extents);
        Ok(Self {
            dim,
            extents: full,
            spacing,
        })
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    /// Per-axis voxel counts, `dim` entries long.
    pub fn extents(&self) -> &[usize] {
        &self.extents[..self.dim]
    }

    /// Extents padded to three axes (`nz == 1` in 2D).
    pub fn extents3(&self) -> [usize; 3] {
        self.extents
    }

    pub fn spacing(&self) -> f64 {
        self.spacing
    }

    pub fn len(&self) -> usize {
        self.extents.iter().product()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    #[inline]
    pub fn index(&self, c: [usize; 3]) -> usize {
        c[0] + self.extents[0] * (c[1] + self.extents[1] * c[2])
    }

    #[inline]
    pub fn coords(&self, index: usize) -> [usize; 3] {
        let [nx, ny, _] = self.extents;
        [index % nx, (index / nx) % ny, index / (nx * ny)]
    }

    /// Linear index strides per axis.
    pub fn strides(&self) -> [usize; 3] {
        [1, self.extents[0], self.extents[0] * self.extents[1]]
    }

    /// True when `c` lies on the outer face of the grid box along any active axis.
    pub fn on_box_face(&self, c: [usize; 3]) -> bool {
        (0..self.dim).any(|a| c[a] == 0 || c[a] + 1 == self.extents[a])
    }

    /// Same extents and dimension; spacing compared bit-exactly.
    pub fn same_shape(&self, other: &Grid) -> bool {
        self.dim == other.dim
            && self.extents == other.extents
            && self.spacing.to_bits() == other.spacing.to_bits()
    }
}

/// One reason a volume fails its structural invariants.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Violation {
    NoInterior,
    NoExterior,
    /// Interior voxel sitting on the outer face of the grid box.
    MissingPadding {
        coords: [usize; 3],
    },
}

impl fmt::Display for Violation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Violation::NoInterior => f.write_str("no interior voxel"),
            Violation::NoExterior => f.write_str("no exterior voxel"),
            Violation::MissingPadding { coords } => write!(
                f,
                "missing exterior padding: interior voxel at {:?} touches the grid face",
                coords
            ),
        }
    }
}

/// Outcome of [`VoxelVolume::validate`]; empty iff the volume is valid.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct ValidationReport {
    pub violations: Vec<Violation>,
}

impl ValidationReport {
    pub fn is_valid(&self) -> bool {
        self.violations.is_empty()
    }

    pub fn contains(&self, needle: &str) -> bool {
        self.violations
            .iter()
            .any(|v| v.to_string().contains(needle))
    }
}

impl fmt::Display for ValidationReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.violations.is_empty() {
            return f.write_str("valid");
        }
        for (i, v) in self.violations.iter().enumerate() {
            if i > 0 {
                f.write_str("; ")?;
            }
            write!(f, "{v}")?;
        }
        Ok(())
    }
}

/// Binary occupancy grid: the discrete solid and, implicitly, its boundary.
#[derive(Debug, Clone, PartialEq)]
pub struct VoxelVolume {
    grid: Grid,
    occupancy: Vec<bool>,
}

impl VoxelVolume {
    /// Wraps an occupancy array. Only the length is checked here; structural
    /// invariants are reported by [`validate`](Self::validate).
    pub fn from_occupancy(grid: Grid, occupancy: Vec<bool>) -> Result<Self, VoxelError> {
        if occupancy.len() != grid.len() {
            return Err(VoxelError::LengthMismatch {
                expected: grid.len(),
                actual: occupancy.len(),
            });
        }
        Ok(Self { grid, occupancy })
    }

    /// Builds a volume by evaluating `inside` at every voxel's integer coordinates.
    pub fn from_fn(grid: Grid, mut inside: impl FnMut([usize; 3]) -> bool) -> Self {
        let occupancy = (0..grid.len()).map(|i| inside(grid.coords(i))).collect();
        Self { grid, occupancy }
    }

    pub fn grid(&self) -> &Grid {
        &self.grid
    }

    pub fn dim(&self) -> usize {
        self.grid.dim
    }

    pub fn spacing(&self) -> f64 {
        self.grid.spacing
    }

    pub fn occupancy(&self) -> &[bool] {
        &self.occupancy
    }

    #[inline]
    pub fn is_interior(&self, index: usize) -> bool {
        self.occupancy[index]
    }

    pub fn interior_count(&self) -> usize {
        self.occupancy.iter().filter(|&&b| b).count()
    }

    /// Interior voxel indices in ascending (row-major) order.
    pub fn interior_indices(&self) -> impl Iterator<Item = usize> + '_ {
        self.occupancy
            .iter()
            .enumerate()
            .filter_map(|(i, &b)| b.then_some(i))
    }

    pub fn validate(&self) -> ValidationReport {
        let mut violations = Vec::new();
        let interior = self.interior_count();
        if interior == 0 {
            violations.push(Violation::NoInterior);
        }
        if interior == self.occupancy.len() {
            violations.push(Violation::NoExterior);
        }
        // Only the first offender is reported; one is enough to reject the grid.
        if let Some(i) = self
            .interior_indices()
            .find(|&i| self.grid.on_box_face(self.grid.coords(i)))
        {
            violations.push(Violation::MissingPadding {
                coords: self.grid.coords(i),
            });
        }
        ValidationReport { violations }
    }

    pub fn ensure_valid(&self) -> Result<(), VoxelError> {
        let report = self.validate();
        if report.is_valid() {
            Ok(())
        } else {
            Err(VoxelError::Invalid(report))
        }
    }

    /// Interior voxel count times `h^dim`: volume in 3D, area in 2D.
    pub fn interior_measure(&self) -> f64 {
        self.interior_count() as f64 * self.grid.spacing.powi(self.grid.dim as i32)
    }

    /// Inclusive bounding box `(min, max)` of the interior, or `None` when empty.
    pub fn interior_bounds(&self) -> Option<([usize; 3], [usize; 3])> {
        let mut it = self.interior_indices().map(|i| self.grid.coords(i));
        let first = it.next()?;
        Some(it.fold((first, first), |(mut lo, mut hi), c| {
            for a in 0..3 {
                lo[a] = lo[a].min(c[a]);
                hi[a] = hi[a].max(c[a]);
            }
            (lo, hi)
        }))
    }

    /// Rotates the occupancy pattern by 90° in the given plane.
    pub fn rotated90(&self, plane: RotationPlane) -> Result<Self, VoxelError> {
        let (grid, source) = transform::rotation_map(&self.grid, plane)?;
        let occupancy = source.iter().map(|&s| self.occupancy[s]).collect();
        Ok(Self { grid, occupancy })
    }

    /// Translates the occupancy pattern inside the same grid box. Fails if the
    /// shifted pattern would touch the grid face.
    pub fn shifted(&self, offset: [isize; 3]) -> Result<Self, VoxelError> {
        let mut occupancy = vec![false; self.occupancy.len()];
        for i in self.interior_indices() {
            let c = self.grid.coords(i);
            let mut t = [0usize; 3];
            for a in 0..3 {
                let v = c[a] as isize + offset[a];
                let n = self.grid.extents[a] as isize;
                let lo = if a < self.grid.dim { 1 } else { 0 };
                let hi = if a < self.grid.dim { n - 2 } else { n - 1 };
                if v < lo || v > hi {
                    return Err(VoxelError::ShiftOutOfBounds(offset));
                }
                t[a] = v as usize;
            }
            occupancy[self.grid.index(t)] = true;
        }
        Ok(Self {
            grid: self.grid,
            occupancy,
        })
    }
}

/// Real values on a volume's grid, carrying the parent's interior mask.
///
/// Holds both the screened-Poisson field and the boundary distance. Exterior
/// voxels hold whatever the producer fixed there (zero for both producers in
/// this crate).
#[derive(Debug, Clone, PartialEq)]
pub struct ScalarField {
    grid: Grid,
    values: Vec<f64>,
    interior: Vec<bool>,
}

impl ScalarField {
    pub fn new(volume: &VoxelVolume, values: Vec<f64>) -> Result<Self, VoxelError> {
        if values.len() != volume.grid.len() {
            return Err(VoxelError::LengthMismatch {
                expected: volume.grid.len(),
                actual: values.len(),
            });
        }
        if let Some((index, &value)) = values.iter().enumerate().find(|(_, v)| !v.is_finite()) {
            return Err(VoxelError::NonFinite { index, value });
        }
        Ok(Self {
            grid: volume.grid,
            values,
            interior: volume.occupancy.clone(),
        })
    }

    pub fn grid(&self) -> &Grid {
        &self.grid
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    #[inline]
    pub fn value(&self, index: usize) -> f64 {
        self.values[index]
    }

    #[inline]
    pub fn is_interior(&self, index: usize) -> bool {
        self.interior[index]
    }

    pub fn interior_mask(&self) -> &[bool] {
        &self.interior
    }

    /// `(index, value)` pairs over interior voxels in row-major order.
    pub fn interior_values(&self) -> impl Iterator<Item = (usize, f64)> + '_ {
        self.values
            .iter()
            .zip(&self.interior)
            .enumerate()
            .filter_map(|(i, (&v, &inside))| inside.then_some((i, v)))
    }

    /// Largest interior value, `None` when the mask is empty.
    pub fn max_interior(&self) -> Option<f64> {
        self.interior_values().map(|(_, v)| v).reduce(f64::max)
    }

    pub fn min_interior(&self) -> Option<f64> {
        self.interior_values().map(|(_, v)| v).reduce(f64::min)
    }

    /// New field on the same grid and mask with replaced values.
    pub fn with_values(&self, values: Vec<f64>) -> Result<Self, VoxelError> {
        if values.len() != self.values.len() {
            return Err(VoxelError::LengthMismatch {
                expected: self.values.len(),
                actual: values.len(),
            });
        }
        if let Some((index, &value)) = values.iter().enumerate().find(|(_, v)| !v.is_finite()) {
            return Err(VoxelError::NonFinite { index, value });
        }
        Ok(Self {
            grid: self.grid,
            values,
            interior: self.interior.clone(),
        })
    }

    pub fn rotated90(&self, plane: RotationPlane) -> Result<Self, VoxelError> {
        let (grid, source) = transform::rotation_map(&self.grid, plane)?;
        Ok(Self {
            grid,
            values: source.iter().map(|&s| self.values[s]).collect(),
            interior: source.iter().map(|&s| self.interior[s]).collect(),
        })
    }

    /// Extracts the plane `coord[axis] == index` as rows of the remaining two
    /// axes (outer = higher axis, inner = lower axis). A 2D field has only one
    /// plane; `axis` must then be 2 and `index` 0.
    pub fn slice(&self, axis: usize, index: usize) -> Result<Vec<Vec<f64>>, VoxelError> {
        if axis > 2 || index >= self.grid.extents[axis] {
            return Err(VoxelError::GridMismatch(format!(
                "slice index {index} on axis {axis} outside extents {:?}",
                self.grid.extents()
            )));
        }
        let (inner, outer) = match axis {
            0 => (1, 2),
            1 => (0, 2),
            _ => (0, 1),
        };
        let rows = (0..self.grid.extents[outer])
            .map(|o| {
                (0..self.grid.extents[inner])
                    .map(|n| {
                        let mut c = [0; 3];
                        c[axis] = index;
                        c[outer] = o;
                        c[inner] = n;
                        self.values[self.grid.index(c)]
                    })
                    .collect()
            })
            .collect();
        Ok(rows)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn cube_grid(n: usize) -> Grid {
        Grid::new(3, &[n, n, n], 1.0).unwrap()
    }

    fn solid_cube(side: usize, h: f64) -> VoxelVolume {
        let n = side + 2;
        let grid = Grid::new(3, &[n, n, n], h).unwrap();
        VoxelVolume::from_fn(grid, |c| c.iter().all(|&x| x >= 1 && x <= side))
    }

    #[test]
    fn all_exterior_reports_missing_interior() {
        let grid = cube_grid(3);
        let v = VoxelVolume::from_occupancy(grid, vec![false; 27]).unwrap();
        let report = v.validate();
        assert!(report.contains("no interior voxel"), "{report}");
    }

    #[test]
    fn centered_single_voxel_is_valid() {
        let v = VoxelVolume::from_fn(cube_grid(3), |c| c == [1, 1, 1]);
        assert!(v.validate().is_valid());
        assert!(v.ensure_valid().is_ok());
    }

    #[test]
    fn interior_on_face_reports_missing_padding() {
        let v = VoxelVolume::from_fn(cube_grid(3), |c| c == [1, 1, 1] || c == [0, 1, 1]);
        assert!(v.validate().contains("missing exterior padding"));
    }

    #[test]
    fn all_interior_reports_missing_exterior() {
        let v = VoxelVolume::from_occupancy(cube_grid(2), vec![true; 8]).unwrap();
        let report = v.validate();
        assert!(report.contains("no exterior voxel"));
        assert!(report.contains("missing exterior padding"));
    }

    #[test]
    fn interior_measure_scales_with_spacing() {
        assert_eq!(solid_cube(10, 1.0).interior_measure(), 1000.0);
        assert_eq!(solid_cube(10, 0.5).interior_measure(), 125.0);
        let grid = Grid::new(2, &[3, 3], 1.0).unwrap();
        let disk = VoxelVolume::from_fn(grid, |c| c == [1, 1, 0]);
        assert_eq!(disk.interior_measure(), 1.0);
    }

    #[test]
    fn grid_rejects_bad_shapes() {
        assert!(matches!(
            Grid::new(4, &[1, 1, 1, 1], 1.0),
            Err(VoxelError::InvalidDimension(4))
        ));
        assert!(matches!(
            Grid::new(3, &[2, 2], 1.0),
            Err(VoxelError::ExtentCount { .. })
        ));
        assert!(matches!(
            Grid::new(2, &[0, 2], 1.0),
            Err(VoxelError::ZeroExtent(_))
        ));
        assert!(matches!(
            Grid::new(2, &[2, 2], -1.0),
            Err(VoxelError::InvalidSpacing(_))
        ));
    }

    #[test]
    fn index_and_coords_agree() {
        let g = Grid::new(3, &[4, 5, 6], 1.0).unwrap();
        for i in 0..g.len() {
            assert_eq!(g.index(g.coords(i)), i);
        }
        assert_eq!(g.index([1, 0, 0]), 1);
        assert_eq!(g.index([0, 1, 0]), 4);
        assert_eq!(g.index([0, 0, 1]), 20);
    }

    #[test]
    fn shift_preserves_measure_and_respects_padding() {
        let n = 8;
        let grid = cube_grid(n);
        let v = VoxelVolume::from_fn(grid, |c| c.iter().all(|&x| (1..=3).contains(&x)));
        let moved = v.shifted([2, 3, 1]).unwrap();
        assert_eq!(moved.interior_measure(), v.interior_measure());
        assert!(moved.validate().is_valid());
        assert!(v.shifted([-1, 0, 0]).is_err());
    }

    #[test]
    fn field_rejects_non_finite_values() {
        let v = solid_cube(1, 1.0);
        let mut values = vec![0.0; 27];
        values[13] = f64::NAN;
        assert!(matches!(
            ScalarField::new(&v, values),
            Err(VoxelError::NonFinite { index: 13, .. })
        ));
    }

    #[test]
    fn slice_extracts_plane_rows() {
        let grid = Grid::new(3, &[3, 4, 5], 1.0).unwrap();
        let v = VoxelVolume::from_fn(grid, |_| false);
        let values = (0..grid.len()).map(|i| i as f64).collect();
        let f = ScalarField::new(&v, values).unwrap();
        let plane = f.slice(2, 1).unwrap();
        assert_eq!(plane.len(), 4);
        assert_eq!(plane[0].len(), 3);
        assert_eq!(plane[2][1], grid.index([1, 2, 1]) as f64);
        assert!(f.slice(2, 5).is_err());
    }
}
