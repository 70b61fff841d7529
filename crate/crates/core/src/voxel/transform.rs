use super::{Grid, VoxelError};

/// Coordinate plane of a quarter-turn rotation.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum RotationPlane {
    XY,
    XZ,
    YZ,
}

impl RotationPlane {
    pub const ALL: [RotationPlane; 3] = [RotationPlane::XY, RotationPlane::XZ, RotationPlane::YZ];

    fn axes(self) -> (usize, usize) {
        match self {
            RotationPlane::XY => (0, 1),
            RotationPlane::XZ => (0, 2),
            RotationPlane::YZ => (1, 2),
        }
    }

    /// Planes that exist in a grid of the given dimension.
    pub fn for_dim(dim: usize) -> &'static [RotationPlane] {
        if dim == 2 {
            &Self::ALL[..1]
        } else {
            &Self::ALL
        }
    }
}

/// Rotated grid plus, for every voxel of the rotated grid, the source index in
/// the original grid. Old `(a, b)` lands at new `(b, n_a - 1 - a)`.
pub(super) fn rotation_map(
    grid: &Grid,
    plane: RotationPlane,
) -> Result<(Grid, Vec<usize>), VoxelError> {
    let (a, b) = plane.axes();
    if b >= grid.dim {
        return Err(VoxelError::GridMismatch(format!(
            "rotation plane {plane:?} needs a 3D grid"
        )));
    }
    let mut extents = grid.extents;
    extents.swap(a, b);
    let rotated = Grid { extents, ..*grid };
    let na = grid.extents[a];
    let source = (0..rotated.len())
        .map(|i| {
            let p = rotated.coords(i);
            let mut c = p;
            c[a] = na - 1 - p[b];
            c[b] = p[a];
            grid.index(c)
        })
        .collect();
    Ok((rotated, source))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn four_quarter_turns_are_identity() {
        let grid = Grid::new(3, &[2, 3, 4], 1.0).unwrap();
        for &plane in &RotationPlane::ALL {
            let mut g = grid;
            let mut idx: Vec<usize> = (0..grid.len()).collect();
            for _ in 0..4 {
                let (next, src) = rotation_map(&g, plane).unwrap();
                idx = src.iter().map(|&s| idx[s]).collect();
                g = next;
            }
            assert_eq!(g, grid);
            assert!(idx.iter().enumerate().all(|(i, &s)| i == s));
        }
    }

    #[test]
    fn planar_grid_only_rotates_in_xy() {
        let grid = Grid::new(2, &[3, 5], 1.0).unwrap();
        let (r, _) = rotation_map(&grid, RotationPlane::XY).unwrap();
        assert_eq!(r.extents(), &[5, 3]);
        assert!(rotation_map(&grid, RotationPlane::XZ).is_err());
    }
}
