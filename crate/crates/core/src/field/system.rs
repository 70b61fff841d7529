//! Finite-difference assembly of the screened Poisson system.
//!
//! For each interior voxel `c` with neighbours `n` (2·dim of them):
//!
//! ```text
//! (2·dim / h² + 1 / ρ²) v_c − Σ_{n interior} v_n / h² = 1
//! ```
//!
//! which is the 5/7-point discretization of `Δv − v/ρ² = −1` with `v = 0`
//! fixed at exterior voxel centres, negated so the matrix is SPD.

use crate::voxel::VoxelVolume;

/// Sentinel in the voxel → unknown map for exterior voxels.
pub const NOT_UNKNOWN: u32 = u32::MAX;

/// Symmetric sparse matrix in compressed row form with sorted column indices.
/// Since it is symmetric, the same arrays also describe its column form.
#[derive(Debug, Clone, PartialEq)]
pub struct SparseSymmetric {
    n: usize,
    row_ptr: Vec<usize>,
    col_idx: Vec<usize>,
    values: Vec<f64>,
}

impl SparseSymmetric {
    pub fn dim(&self) -> usize {
        self.n
    }

    pub fn nnz(&self) -> usize {
        self.values.len()
    }

    pub fn row_ptr(&self) -> &[usize] {
        &self.row_ptr
    }

    pub fn col_idx(&self) -> &[usize] {
        &self.col_idx
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    /// `(row, col, value)` for every stored entry.
    pub fn entries(&self) -> impl Iterator<Item = (usize, usize, f64)> + '_ {
        (0..self.n).flat_map(move |r| {
            (self.row_ptr[r]..self.row_ptr[r + 1])
                .map(move |k| (r, self.col_idx[k], self.values[k]))
        })
    }

    pub fn diagonal(&self) -> Vec<f64> {
        (0..self.n)
            .map(|r| {
                (self.row_ptr[r]..self.row_ptr[r + 1])
                    .find(|&k| self.col_idx[k] == r)
                    .map_or(0.0, |k| self.values[k])
            })
            .collect()
    }

    /// `y = A x`
    pub fn mul_vec(&self, x: &[f64], y: &mut [f64]) {
        for (r, out) in y.iter_mut().enumerate() {
            let mut acc = 0.0;
            for k in self.row_ptr[r]..self.row_ptr[r + 1] {
                acc += self.values[k] * x[self.col_idx[k]];
            }
            *out = acc;
        }
    }

    pub fn is_symmetric(&self) -> bool {
        self.entries().all(|(r, c, v)| {
            (self.row_ptr[c]..self.row_ptr[c + 1])
                .find(|&k| self.col_idx[k] == r)
                .is_some_and(|k| self.values[k] == v)
        })
    }
}

/// Assembled linear system plus the voxel ↔ unknown maps.
#[derive(Debug, Clone)]
pub struct ScreenedPoissonSystem {
    pub matrix: SparseSymmetric,
    pub rhs: Vec<f64>,
    /// Per voxel: unknown index, or [`NOT_UNKNOWN`] for exterior voxels.
    pub unknown_of: Vec<u32>,
    /// Per unknown: voxel index, ascending.
    pub voxel_of: Vec<usize>,
}

impl ScreenedPoissonSystem {
    /// Assembles the system for a volume whose interior never touches the
    /// grid face (guaranteed by a valid volume's padding).
    pub fn assemble(volume: &VoxelVolume, rho: f64) -> Self {
        let grid = volume.grid();
        let dim = grid.dim();
        let h2 = grid.spacing() * grid.spacing();
        let off = -1.0 / h2;
        let diag = 2.0 * dim as f64 / h2 + 1.0 / (rho * rho);

        let voxel_of: Vec<usize> = volume.interior_indices().collect();
        let mut unknown_of = vec![NOT_UNKNOWN; grid.len()];
        for (u, &v) in voxel_of.iter().enumerate() {
            unknown_of[v] = u as u32;
        }

        let strides = grid.strides();
        // Neighbour offsets in ascending linear order so each row comes out sorted.
        let mut below: Vec<usize> = strides[..dim].to_vec();
        below.reverse();
        let above: Vec<usize> = strides[..dim].to_vec();

        let n = voxel_of.len();
        let mut row_ptr = Vec::with_capacity(n + 1);
        let mut col_idx = Vec::with_capacity(n * (2 * dim + 1));
        let mut values = Vec::with_capacity(n * (2 * dim + 1));
        row_ptr.push(0);
        for &v in &voxel_of {
            for &s in &below {
                let u = unknown_of[v - s];
                if u != NOT_UNKNOWN {
                    col_idx.push(u as usize);
                    values.push(off);
                }
            }
            col_idx.push(unknown_of[v] as usize);
            values.push(diag);
            for &s in &above {
                let u = unknown_of[v + s];
                if u != NOT_UNKNOWN {
                    col_idx.push(u as usize);
                    values.push(off);
                }
            }
            row_ptr.push(col_idx.len());
        }

        Self {
            matrix: SparseSymmetric {
                n,
                row_ptr,
                col_idx,
                values,
            },
            rhs: vec![1.0; n],
            unknown_of,
            voxel_of,
        }
    }

    pub fn unknowns(&self) -> usize {
        self.voxel_of.len()
    }

    /// `‖b − A x‖₂ / ‖b‖₂`
    pub fn relative_residual(&self, x: &[f64]) -> f64 {
        let mut ax = vec![0.0; x.len()];
        self.matrix.mul_vec(x, &mut ax);
        let num: f64 = self
            .rhs
            .iter()
            .zip(&ax)
            .map(|(b, a)| (b - a) * (b - a))
            .sum();
        let den: f64 = self.rhs.iter().map(|b| b * b).sum();
        (num / den).sqrt()
    }

    /// Scatters unknowns back onto the full grid; exterior voxels get 0.
    pub fn scatter(&self, x: &[f64], grid_len: usize) -> Vec<f64> {
        let mut out = vec![0.0; grid_len];
        for (&v, &val) in self.voxel_of.iter().zip(x) {
            out[v] = val;
        }
        out
    }
}
