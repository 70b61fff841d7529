//! Entropy-based shape congruity on voxel grids.
//!
//! A solid is voxelized ([`voxel`]), a family of screened Poisson fields is
//! solved inside it ([`field`]), each field is sampled on voxel bands at fixed
//! distances from the boundary ([`distance`]), and the Shannon entropies of
//! the sampled values form the measure ([`measure`]). [`shapegen`] builds the
//! bundled test shapes and [`cli`] wires everything to the command line.

pub mod cli;
pub mod distance;
pub mod field;
pub mod measure;
pub mod shapegen;
pub mod voxel;

pub use distance::{distance_transform, extract_band, max_thickness, Band};
pub use field::{normalize, solve_screened_poisson, ScreenedPoissonProblem, SolverSettings};
pub use measure::{congruity_measure, order_shapes, CongruityResult, MeasureConfig, ShapeOrdering};
pub use voxel::{Grid, ScalarField, VoxelVolume};
