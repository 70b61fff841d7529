//! Screened Poisson fields `Δv − v/ρ² = −1` with `v = 0` on the boundary.
//!
//! The field is the scale-space axis of the measure: small `ρ` keeps the
//! solution close to a local, boundary-hugging profile; large `ρ` approaches
//! the pure Poisson solution and smooths the level sets.
//!
//! Systems up to [`SolverSettings::cholesky_limit`] unknowns are solved with a
//! sparse Cholesky factorization; larger ones fall back to preconditioned CG.
//! Both paths must meet the same relative residual bound, so callers cannot
//! tell them apart beyond rounding.

mod cg;
mod cholesky;
mod system;

use thiserror::Error;

use crate::voxel::{ScalarField, VoxelError, VoxelVolume};

pub use system::{ScreenedPoissonSystem, SparseSymmetric, NOT_UNKNOWN};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum FieldError {
    #[error("invalid problem: {0}")]
    InvalidProblem(String),
    #[error(transparent)]
    Voxel(#[from] VoxelError),
    #[error("conjugate gradient stopped after {iterations} iterations at relative residual {residual:e}")]
    NonConvergence { iterations: usize, residual: f64 },
    #[error("assembled matrix is not positive definite: {0}")]
    NotPositiveDefinite(String),
    #[error("factorization failed: {0}")]
    Factorization(String),
    #[error("solution violates the maximum principle: minimum interior value {0:e}")]
    NonPositiveSolution(f64),
    #[error("cannot normalize a field whose interior maximum is {0}")]
    NonPositiveMaximum(f64),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, serde::Serialize)]
pub enum SolverChoice {
    /// Cholesky up to `cholesky_limit` unknowns, CG beyond.
    #[default]
    Auto,
    Cholesky,
    ConjugateGradient,
}

#[derive(Debug, Clone, Copy, PartialEq, serde::Serialize)]
pub struct SolverSettings {
    /// Bound on `‖b − Av‖₂ / ‖b‖₂`.
    pub tolerance: f64,
    /// CG iteration cap.
    pub max_iterations: usize,
    pub cholesky_limit: usize,
    pub choice: SolverChoice,
}

impl Default for SolverSettings {
    fn default() -> Self {
        Self {
            tolerance: 1e-10,
            max_iterations: 50_000,
            cholesky_limit: 200_000,
            choice: SolverChoice::Auto,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, serde::Serialize)]
pub enum SolveMethod {
    Cholesky { refinement_steps: usize },
    ConjugateGradient { iterations: usize },
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SolveStats {
    pub method: SolveMethod,
    pub unknowns: usize,
    pub relative_residual: f64,
}

#[derive(Debug, Clone, Copy)]
pub struct ScreenedPoissonProblem<'a> {
    pub volume: &'a VoxelVolume,
    pub rho: f64,
    pub settings: SolverSettings,
}

impl<'a> ScreenedPoissonProblem<'a> {
    pub fn new(volume: &'a VoxelVolume, rho: f64) -> Self {
        Self {
            volume,
            rho,
            settings: SolverSettings::default(),
        }
    }

    pub fn with_settings(mut self, settings: SolverSettings) -> Self {
        self.settings = settings;
        self
    }

    pub fn check(&self) -> Result<(), FieldError> {
        self.volume.ensure_valid()?;
        if !(self.rho.is_finite() && self.rho > 0.0) {
            return Err(FieldError::InvalidProblem(format!(
                "rho must be positive, got {}",
                self.rho
            )));
        }
        let tol = self.settings.tolerance;
        if !(tol > 0.0 && tol <= 1e-4) {
            return Err(FieldError::InvalidProblem(format!(
                "solver tolerance {tol} outside (0, 1e-4]"
            )));
        }
        if self.settings.max_iterations == 0 {
            return Err(FieldError::InvalidProblem(
                "max_iterations must be positive".into(),
            ));
        }
        Ok(())
    }
}

/// Solves for the un-normalized field; exterior voxels carry 0.
pub fn solve_screened_poisson(problem: &ScreenedPoissonProblem) -> Result<ScalarField, FieldError> {
    solve_with_stats(problem).map(|(f, _)| f)
}

pub fn solve_with_stats(
    problem: &ScreenedPoissonProblem,
) -> Result<(ScalarField, SolveStats), FieldError> {
    problem.check()?;
    let system = ScreenedPoissonSystem::assemble(problem.volume, problem.rho);
    let settings = &problem.settings;
    let n = system.unknowns();
    let use_cholesky = match settings.choice {
        SolverChoice::Auto => n <= settings.cholesky_limit,
        SolverChoice::Cholesky => true,
        SolverChoice::ConjugateGradient => false,
    };

    let (x, method) = if use_cholesky {
        solve_direct(&system, settings)?
    } else {
        let mut x = vec![0.0; n];
        let out = cg::solve(
            &system.matrix,
            &system.rhs,
            &mut x,
            settings.tolerance,
            settings.max_iterations,
        );
        if !out.converged {
            return Err(FieldError::NonConvergence {
                iterations: out.iterations,
                residual: system.relative_residual(&x),
            });
        }
        (
            x,
            SolveMethod::ConjugateGradient {
                iterations: out.iterations,
            },
        )
    };

    let relative_residual = system.relative_residual(&x);
    let min = x.iter().copied().fold(f64::INFINITY, f64::min);
    if min <= 0.0 {
        return Err(FieldError::NonPositiveSolution(min));
    }
    let values = system.scatter(&x, problem.volume.grid().len());
    let field = ScalarField::new(problem.volume, values)?;
    Ok((
        field,
        SolveStats {
            method,
            unknowns: n,
            relative_residual,
        },
    ))
}

fn solve_direct(
    system: &ScreenedPoissonSystem,
    settings: &SolverSettings,
) -> Result<(Vec<f64>, SolveMethod), FieldError> {
    const MAX_REFINEMENT: usize = 3;
    let chol = cholesky::SparseCholesky::factorize(&system.matrix)?;
    let mut x = system.rhs.clone();
    chol.solve_in_place(&mut x);
    let n = x.len();
    let mut steps = 0;
    let mut ax = vec![0.0; n];
    while system.relative_residual(&x) > settings.tolerance && steps < MAX_REFINEMENT {
        system.matrix.mul_vec(&x, &mut ax);
        let mut d: Vec<f64> = system.rhs.iter().zip(&ax).map(|(b, a)| b - a).collect();
        chol.solve_in_place(&mut d);
        for (xi, di) in x.iter_mut().zip(&d) {
            *xi += di;
        }
        steps += 1;
    }
    let residual = system.relative_residual(&x);
    if residual > settings.tolerance {
        return Err(FieldError::NonConvergence {
            iterations: steps,
            residual,
        });
    }
    Ok((
        x,
        SolveMethod::Cholesky {
            refinement_steps: steps,
        },
    ))
}

/// Divides by the interior maximum so interior values land in `(0, 1]`.
pub fn normalize(field: &ScalarField) -> Result<ScalarField, FieldError> {
    let max = field.max_interior().unwrap_or(0.0);
    if !(max > 0.0) {
        return Err(FieldError::NonPositiveMaximum(max));
    }
    let values = field
        .values()
        .iter()
        .enumerate()
        .map(|(i, &v)| if field.is_interior(i) { v / max } else { v })
        .collect();
    Ok(field.with_values(values)?)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::voxel::{Grid, RotationPlane};
    use proptest::prelude::*;

    fn single(dim: usize, h: f64) -> VoxelVolume {
        let grid = Grid::new(dim, &vec![3; dim], h).unwrap();
        VoxelVolume::from_fn(grid, |c| (0..dim).all(|a| c[a] == 1))
    }

    fn block(n: usize) -> VoxelVolume {
        let grid = Grid::new(3, &[n + 2, n + 2, n + 2], 1.0).unwrap();
        VoxelVolume::from_fn(grid, |c| c.iter().all(|&x| x >= 1 && x <= n))
    }

    #[test]
    fn single_voxel_hand_solution() {
        // (6 + 1) v = 1
        let v = single(3, 1.0);
        let f = solve_screened_poisson(&ScreenedPoissonProblem::new(&v, 1.0)).unwrap();
        let centre = v.grid().index([1, 1, 1]);
        assert!((f.value(centre) - 1.0 / 7.0).abs() < 1e-15);
        assert_eq!(f.values().iter().filter(|&&x| x != 0.0).count(), 1);
    }

    #[test]
    fn both_paths_agree() {
        let v = block(9);
        let mut settings = SolverSettings {
            tolerance: 1e-12,
            choice: SolverChoice::Cholesky,
            ..Default::default()
        };
        let (a, sa) =
            solve_with_stats(&ScreenedPoissonProblem::new(&v, 5.0).with_settings(settings))
                .unwrap();
        settings.choice = SolverChoice::ConjugateGradient;
        let (b, sb) =
            solve_with_stats(&ScreenedPoissonProblem::new(&v, 5.0).with_settings(settings))
                .unwrap();
        assert!(matches!(sa.method, SolveMethod::Cholesky { .. }));
        assert!(matches!(sb.method, SolveMethod::ConjugateGradient { .. }));
        let diff = a
            .values()
            .iter()
            .zip(b.values())
            .map(|(x, y)| (x - y).abs())
            .fold(0.0, f64::max);
        assert!(diff < 1e-9, "max diff {diff}");
        assert!(sa.relative_residual <= 1e-12 && sb.relative_residual <= 1e-12);
    }

    #[test]
    fn auto_switches_on_limit() {
        let v = block(4);
        let settings = SolverSettings {
            cholesky_limit: 10,
            ..Default::default()
        };
        let (_, stats) =
            solve_with_stats(&ScreenedPoissonProblem::new(&v, 2.0).with_settings(settings))
                .unwrap();
        assert!(matches!(
            stats.method,
            SolveMethod::ConjugateGradient { .. }
        ));
    }

    #[test]
    fn cg_reports_non_convergence() {
        let v = block(8);
        let settings = SolverSettings {
            max_iterations: 2,
            choice: SolverChoice::ConjugateGradient,
            ..Default::default()
        };
        let err =
            solve_screened_poisson(&ScreenedPoissonProblem::new(&v, 100.0).with_settings(settings))
                .unwrap_err();
        assert!(matches!(err, FieldError::NonConvergence { .. }));
    }

    #[test]
    fn rejects_bad_parameters() {
        let v = single(2, 1.0);
        assert!(solve_screened_poisson(&ScreenedPoissonProblem::new(&v, 0.0)).is_err());
        let settings = SolverSettings {
            tolerance: 1e-3,
            ..Default::default()
        };
        assert!(solve_screened_poisson(
            &ScreenedPoissonProblem::new(&v, 1.0).with_settings(settings)
        )
        .is_err());
        let grid = Grid::new(2, &[3, 3], 1.0).unwrap();
        let empty = VoxelVolume::from_occupancy(grid, vec![false; 9]).unwrap();
        assert!(matches!(
            solve_screened_poisson(&ScreenedPoissonProblem::new(&empty, 1.0)),
            Err(FieldError::Voxel(_))
        ));
    }

    #[test]
    fn solution_positive_and_deterministic() {
        let v = block(6);
        let p = ScreenedPoissonProblem::new(&v, 3.0);
        let a = solve_screened_poisson(&p).unwrap();
        let b = solve_screened_poisson(&p).unwrap();
        assert_eq!(a, b);
        assert!(a.min_interior().unwrap() > 0.0);
    }

    #[test]
    fn normalize_examples() {
        let v = single(3, 1.0);
        let f = solve_screened_poisson(&ScreenedPoissonProblem::new(&v, 1.0)).unwrap();
        let n = normalize(&f).unwrap();
        assert_eq!(n.max_interior(), Some(1.0));

        let grid = Grid::new(2, &[4, 3], 1.0).unwrap();
        let pair = VoxelVolume::from_fn(grid, |c| c[1] == 1 && (c[0] == 1 || c[0] == 2));
        let values: Vec<f64> = (0..12)
            .map(|i| match i {
                5 => 2.0,
                6 => 4.0,
                _ => 0.0,
            })
            .collect();
        let f = ScalarField::new(&pair, values).unwrap();
        let n = normalize(&f).unwrap();
        assert_eq!((n.value(5), n.value(6)), (0.5, 1.0));
        assert_eq!(normalize(&n).unwrap(), n);
    }

    #[test]
    fn normalize_rejects_zero_field() {
        let v = single(2, 1.0);
        let f = ScalarField::new(&v, vec![0.0; 9]).unwrap();
        assert!(matches!(
            normalize(&f),
            Err(FieldError::NonPositiveMaximum(_))
        ));
    }

    fn random_volume() -> impl Strategy<Value = VoxelVolume> {
        (
            2usize..=3,
            3usize..9,
            3usize..9,
            3usize..9,
            proptest::collection::vec(any::<bool>(), 512),
        )
            .prop_map(|(dim, a, b, c, bits)| {
                let ext = [a, b, c];
                let grid = Grid::new(dim, &ext[..dim], 1.0).unwrap();
                let mut k = 0;
                VoxelVolume::from_fn(grid, |p| {
                    k += 1;
                    !grid.on_box_face(p) && bits[k % bits.len()]
                })
            })
            .prop_filter("needs interior", |v| v.interior_count() > 0)
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(48))]

        #[test]
        fn rotation_equivariant(v in random_volume(), rho in 0.5f64..8.0) {
            let f = solve_screened_poisson(&ScreenedPoissonProblem::new(&v, rho)).unwrap();
            for &plane in RotationPlane::for_dim(v.dim()) {
                let r = v.rotated90(plane).unwrap();
                let fr = solve_screened_poisson(&ScreenedPoissonProblem::new(&r, rho)).unwrap();
                let expected = f.rotated90(plane).unwrap();
                for (a, b) in fr.values().iter().zip(expected.values()) {
                    prop_assert!((a - b).abs() <= 1e-8);
                }
            }
        }

        #[test]
        fn bounded_by_plateau_and_increasing_in_rho(v in random_volume(), rho in 0.5f64..8.0) {
            let small = solve_screened_poisson(&ScreenedPoissonProblem::new(&v, rho)).unwrap();
            let large = solve_screened_poisson(&ScreenedPoissonProblem::new(&v, 2.0 * rho)).unwrap();
            for (i, x) in small.interior_values() {
                prop_assert!(x > 0.0 && x < rho * rho);
                prop_assert!(large.value(i) > x);
            }
            for (i, &x) in small.values().iter().enumerate() {
                if !v.is_interior(i) {
                    prop_assert_eq!(x, 0.0);
                }
            }
        }
    }
}
