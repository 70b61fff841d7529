//! The congruity measure: entropies of normalized screened-Poisson fields
//! sampled on voxel bands at fixed distances from the boundary.
//!
//! Two smoothness scales are used, `ρ₁ = |V|` (volume in 3D, area in 2D) and
//! `ρ₂ = ρ₁^0.3`, and two sampling distances, `δ_k = f_k · max thickness`
//! with `f = (0.05, 0.1)`. Each `(ρ_i, δ_k)` pair yields one Shannon entropy
//! `ê_ik` of the 64-bin histogram of field values on the band; the shape's
//! summary score is the mean of the four.
//!
//! A ball scores lowest: its bands are level sets of the field, so every
//! sample falls in one bin. Deviations spread the samples out; repeated,
//! congruent parts pull them back together.

use std::cmp::Ordering;
use std::fmt;

use serde::Serialize;
use thiserror::Error;

use crate::distance::{self, Band, DistanceError};
use crate::field::{self, FieldError, ScreenedPoissonProblem, SolverSettings};
use crate::voxel::{ScalarField, VoxelError, VoxelVolume};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum MeasureError {
    #[error("histogram needs at least one sample")]
    EmptySample,
    #[error("sample {index} = {value} lies outside [0, 1]")]
    OutOfRange { index: usize, value: f64 },
    #[error("invalid configuration: {0}")]
    Config(String),
    #[error("degenerate parameters: interior measure {0} must exceed 1 so that rho1 > rho2")]
    DegenerateVolume(f64),
    #[error("field and band come from different grids")]
    GridMismatch,
    #[error("field solve for rho_{i} failed: {source}")]
    Field { i: usize, source: FieldError },
    #[error("band extraction for delta_{k} (rho_{i}) failed: {source}")]
    Band {
        i: usize,
        k: usize,
        source: DistanceError,
    },
    #[error(transparent)]
    Voxel(#[from] VoxelError),
}

/// Bin counts over `[0, 1]`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Histogram {
    counts: Vec<u64>,
    total: u64,
}

impl Histogram {
    /// Wraps raw counts. Fails if every bin is empty.
    pub fn from_counts(counts: Vec<u64>) -> Result<Self, MeasureError> {
        let total = counts.iter().sum();
        if total == 0 || counts.is_empty() {
            return Err(MeasureError::EmptySample);
        }
        Ok(Self { counts, total })
    }

    pub fn bin_count(&self) -> usize {
        self.counts.len()
    }

    pub fn counts(&self) -> &[u64] {
        &self.counts
    }

    pub fn total(&self) -> u64 {
        self.total
    }

    pub fn probabilities(&self) -> impl Iterator<Item = f64> + '_ {
        let total = self.total as f64;
        self.counts.iter().map(move |&c| c as f64 / total)
    }

    pub fn entropy(&self) -> f64 {
        shannon_entropy(self)
    }
}

/// Bins `v` into `floor(v · B)`, with `v = 1` going to the last bin.
pub fn build_histogram(values: &[f64], bin_count: usize) -> Result<Histogram, MeasureError> {
    if bin_count == 0 {
        return Err(MeasureError::Config("bin count must be positive".into()));
    }
    if values.is_empty() {
        return Err(MeasureError::EmptySample);
    }
    let mut counts = vec![0u64; bin_count];
    for (index, &value) in values.iter().enumerate() {
        if !(0.0..=1.0).contains(&value) {
            return Err(MeasureError::OutOfRange { index, value });
        }
        let bin = ((value * bin_count as f64) as usize).min(bin_count - 1);
        counts[bin] += 1;
    }
    Histogram::from_counts(counts)
}

/// `−Σ p log₂ p` over non-empty bins, in bits.
pub fn shannon_entropy(hist: &Histogram) -> f64 {
    let h: f64 = hist
        .probabilities()
        .filter(|&p| p > 0.0)
        .map(|p| -p * p.log2())
        .sum();
    // A single occupied bin gives -1·log2(1) = -0.0.
    h.max(0.0)
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct MeasureConfig {
    pub bin_count: usize,
    pub rho_exponent: f64,
    pub delta_fractions: [f64; 2],
    /// Band half-width in world units; `None` means half the voxel spacing.
    pub band_tolerance: Option<f64>,
    pub solver: SolverSettings,
}

impl Default for MeasureConfig {
    fn default() -> Self {
        Self {
            bin_count: 64,
            rho_exponent: 0.3,
            delta_fractions: [0.05, 0.1],
            band_tolerance: None,
            solver: SolverSettings::default(),
        }
    }
}

impl MeasureConfig {
    pub fn check(&self) -> Result<(), MeasureError> {
        if self.bin_count < 2 {
            return Err(MeasureError::Config(format!(
                "bin count {} must be at least 2",
                self.bin_count
            )));
        }
        if !(self.rho_exponent.is_finite() && self.rho_exponent > 0.0) {
            return Err(MeasureError::Config(format!(
                "rho exponent {} must be positive",
                self.rho_exponent
            )));
        }
        let [a, b] = self.delta_fractions;
        if !(a > 0.0 && a < b && b < 1.0) {
            return Err(MeasureError::Config(format!(
                "delta fractions {:?} must be strictly increasing within (0, 1)",
                self.delta_fractions
            )));
        }
        if let Some(t) = self.band_tolerance {
            if !(t.is_finite() && t > 0.0) {
                return Err(MeasureError::Config(format!(
                    "band tolerance {t} must be positive"
                )));
            }
        }
        Ok(())
    }

    pub fn band_tolerance_for(&self, volume: &VoxelVolume) -> f64 {
        self.band_tolerance.unwrap_or(volume.spacing() / 2.0)
    }
}

/// The two smoothness scales and two sampling distances for one shape.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ScaleParameters {
    pub rho: [f64; 2],
    pub delta: [f64; 2],
    pub max_thickness: f64,
}

pub fn derive_parameters(
    volume: &VoxelVolume,
    dist: &ScalarField,
    config: &MeasureConfig,
) -> Result<ScaleParameters, MeasureError> {
    let size = volume.interior_measure();
    if !(size > 1.0) {
        return Err(MeasureError::DegenerateVolume(size));
    }
    let thickness = distance::max_thickness(dist);
    Ok(ScaleParameters {
        rho: [size, size.powf(config.rho_exponent)],
        delta: config.delta_fractions.map(|f| f * thickness),
        max_thickness: thickness,
    })
}

/// Field values on the band, in ascending voxel order.
pub fn sample_band(field: &ScalarField, band: &Band) -> Result<Vec<f64>, MeasureError> {
    if !field.grid().same_shape(band.grid()) {
        return Err(MeasureError::GridMismatch);
    }
    Ok(band.indices().iter().map(|&i| field.value(i)).collect())
}

/// Four entropies `ê_ik` (row `i` = scale `ρ_i`, column `k` = distance `δ_k`)
/// with everything needed to re-derive them.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CongruityResult {
    pub entropies: [[f64; 2]; 2],
    pub mean_entropy: f64,
    pub parameters: ScaleParameters,
    pub band_tolerance: f64,
    pub band_sizes: [usize; 2],
    pub relative_residuals: [f64; 2],
    pub config: MeasureConfig,
    pub warnings: Vec<String>,
}

impl CongruityResult {
    pub fn entropy(&self, i: usize, k: usize) -> f64 {
        self.entropies[i][k]
    }
}

/// Solves both fields, samples both bands and reports the four entropies.
/// The two solves run through `rayon::join`; the result does not depend on
/// how they are scheduled.
pub fn congruity_measure(
    volume: &VoxelVolume,
    config: &MeasureConfig,
) -> Result<CongruityResult, MeasureError> {
    config.check()?;
    volume.ensure_valid()?;
    let dist = distance::distance_transform(volume);
    let params = derive_parameters(volume, &dist, config)?;
    let tolerance = config.band_tolerance_for(volume);

    let solve = |i: usize| -> Result<(ScalarField, f64), MeasureError> {
        let problem =
            ScreenedPoissonProblem::new(volume, params.rho[i]).with_settings(config.solver);
        let (raw, stats) = field::solve_with_stats(&problem)
            .map_err(|source| MeasureError::Field { i: i + 1, source })?;
        let normalized =
            field::normalize(&raw).map_err(|source| MeasureError::Field { i: i + 1, source })?;
        Ok((normalized, stats.relative_residual))
    };
    let (first, second) = rayon::join(|| solve(0), || solve(1));
    let fields = [first?, second?];

    let mut bands = Vec::with_capacity(2);
    for (k, &delta) in params.delta.iter().enumerate() {
        let band = distance::extract_band(&dist, delta, tolerance).map_err(|source| {
            MeasureError::Band {
                i: 0,
                k: k + 1,
                source,
            }
        })?;
        bands.push(band);
    }

    let mut warnings = Vec::new();
    if bands[0].indices() == bands[1].indices() {
        warnings.push(format!(
            "delta_1 = {} and delta_2 = {} select the same voxel band; the shape is too thin for distinct sampling distances",
            params.delta[0], params.delta[1]
        ));
    }

    let mut entropies = [[0.0; 2]; 2];
    for (i, (f, _)) in fields.iter().enumerate() {
        for (k, band) in bands.iter().enumerate() {
            let samples = sample_band(f, band)?;
            entropies[i][k] = shannon_entropy(&build_histogram(&samples, config.bin_count)?);
        }
    }
    let mean_entropy =
        (entropies[0][0] + entropies[0][1] + entropies[1][0] + entropies[1][1]) / 4.0;

    Ok(CongruityResult {
        entropies,
        mean_entropy,
        parameters: params,
        band_tolerance: tolerance,
        band_sizes: [bands[0].len(), bands[1].len()],
        relative_residuals: [fields[0].1, fields[1].1],
        config: config.clone(),
        warnings,
    })
}

/// Which score an ordering ranks by.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum Criterion {
    Mean,
    Entropy { i: usize, k: usize },
}

impl fmt::Display for Criterion {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Criterion::Mean => f.write_str("mean"),
            Criterion::Entropy { i, k } => write!(f, "e_{i}{k}"),
        }
    }
}

/// Names sharing an exactly equal score under some criterion.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Tie {
    pub criterion: Criterion,
    pub value: f64,
    pub names: Vec<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ShapeOrdering {
    /// Ascending mean entropy.
    pub by_mean: Vec<String>,
    /// `by_measure[i][k]`: ascending `ê_{i+1,k+1}`.
    pub by_measure: [[Vec<String>; 2]; 2],
    /// All four per-measure orderings agree.
    pub consensus: bool,
    pub ties: Vec<Tie>,
}

/// Ranks shapes ascending by each score; ties fall back to name order.
pub fn order_shapes(results: &[(String, CongruityResult)]) -> ShapeOrdering {
    let mut ties = Vec::new();
    let mut rank = |criterion: Criterion, score: &dyn Fn(&CongruityResult) -> f64| -> Vec<String> {
        let mut entries: Vec<(f64, &str)> = results
            .iter()
            .map(|(name, r)| (score(r), name.as_str()))
            .collect();
        entries.sort_by(|a, b| a.0.total_cmp(&b.0).then_with(|| a.1.cmp(b.1)));
        for group in entries.chunk_by(|a, b| a.0.total_cmp(&b.0) == Ordering::Equal) {
            if group.len() > 1 {
                ties.push(Tie {
                    criterion,
                    value: group[0].0,
                    names: group.iter().map(|e| e.1.to_string()).collect(),
                });
            }
        }
        entries.into_iter().map(|e| e.1.to_string()).collect()
    };

    let by_mean = rank(Criterion::Mean, &|r| r.mean_entropy);
    let by_measure = [0, 1].map(|i| {
        [0, 1].map(|k| {
            rank(Criterion::Entropy { i: i + 1, k: k + 1 }, &|r| {
                r.entropies[i][k]
            })
        })
    });
    let first = &by_measure[0][0];
    let consensus = by_measure.iter().flatten().all(|o| o == first);
    ShapeOrdering {
        by_mean,
        by_measure,
        consensus,
        ties,
    }
}
