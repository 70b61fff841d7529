//! Deterministic voxel generators: balls, cubes, cubes with face-centred cubic
//! attachments, and concave dents. Also assembles the two bundled shape sets
//! used by the experiments.
//!
//! All generators produce unit-spacing grids with at least `padding` exterior
//! layers around the solid, so every output passes [`VoxelVolume::validate`].

use std::fmt;
use std::str::FromStr;

use thiserror::Error;

use crate::voxel::{Grid, VoxelError, VoxelVolume};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum ShapeError {
    #[error("{0}")]
    Precondition(String),
    #[error("attachments overlap: expected {expected} interior voxels, got {actual}")]
    Overlap { expected: usize, actual: usize },
    #[error("face {0} does not exist in a {1}D grid")]
    FaceOutOfDimension(Face, usize),
    #[error("unknown face {0:?}; expected one of +x,-x,+y,-y,+z,-z")]
    UnknownFace(String),
    #[error(transparent)]
    Voxel(#[from] VoxelError),
}

/// One of the six axis-aligned faces of a box.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Face {
    PosX,
    NegX,
    PosY,
    NegY,
    PosZ,
    NegZ,
}

impl Face {
    pub const ALL: [Face; 6] = [
        Face::PosX,
        Face::NegX,
        Face::PosY,
        Face::NegY,
        Face::PosZ,
        Face::NegZ,
    ];

    pub fn axis(self) -> usize {
        match self {
            Face::PosX | Face::NegX => 0,
            Face::PosY | Face::NegY => 1,
            Face::PosZ | Face::NegZ => 2,
        }
    }

    pub fn is_positive(self) -> bool {
        matches!(self, Face::PosX | Face::PosY | Face::PosZ)
    }

    /// Parses a comma-separated face list such as `+x,-x`. Empty input is the empty set.
    pub fn parse_list(s: &str) -> Result<Vec<Face>, ShapeError> {
        s.split(',')
            .map(str::trim)
            .filter(|t| !t.is_empty())
            .map(str::parse)
            .collect()
    }
}

impl fmt::Display for Face {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let sign = if self.is_positive() { '+' } else { '-' };
        let axis = ['x', 'y', 'z'][self.axis()];
        write!(f, "{sign}{axis}")
    }
}

impl FromStr for Face {
    type Err = ShapeError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        // Accept the typographic minus as well as ASCII.
        let normalized = s.trim().replace('\u{2212}', "-").to_ascii_lowercase();
        Ok(match normalized.as_str() {
            "+x" | "x" => Face::PosX,
            "-x" => Face::NegX,
            "+y" | "y" => Face::PosY,
            "-y" => Face::NegY,
            "+z" | "z" => Face::PosZ,
            "-z" => Face::NegZ,
            _ => return Err(ShapeError::UnknownFace(s.to_string())),
        })
    }
}

/// Base cube plus one centred, flush cubic attachment per listed face.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CompositeCubeSpec {
    pub dim: usize,
    pub base_side: usize,
    pub attach_side: usize,
    pub faces: Vec<Face>,
    pub padding: usize,
}

impl CompositeCubeSpec {
    pub fn new(base_side: usize, attach_side: usize, faces: &[Face]) -> Self {
        Self {
            dim: 3,
            base_side,
            attach_side,
            faces: faces.to_vec(),
            padding: DEFAULT_PADDING,
        }
    }

    pub fn check(&self) -> Result<(), ShapeError> {
        check_dim(self.dim)?;
        if self.padding == 0 {
            return Err(ShapeError::Precondition(
                "padding must be at least 1".into(),
            ));
        }
        if self.base_side == 0 {
            return Err(ShapeError::Precondition(
                "base side must be positive".into(),
            ));
        }
        if !self.faces.is_empty() {
            if self.attach_side == 0 {
                return Err(ShapeError::Precondition(
                    "attachment side must be positive".into(),
                ));
            }
            if self.attach_side >= self.base_side {
                return Err(ShapeError::Precondition(format!(
                    "attachment side {} must be smaller than base side {}",
                    self.attach_side, self.base_side
                )));
            }
        }
        for (i, &face) in self.faces.iter().enumerate() {
            if face.axis() >= self.dim {
                return Err(ShapeError::FaceOutOfDimension(face, self.dim));
            }
            if self.faces[..i].contains(&face) {
                return Err(ShapeError::Precondition(format!(
                    "face {face} listed twice"
                )));
            }
        }
        Ok(())
    }

    /// `base^dim + |faces| * attach^dim`.
    pub fn expected_interior(&self) -> usize {
        self.base_side.pow(self.dim as u32)
            + self.faces.len() * self.attach_side.pow(self.dim as u32)
    }
}

pub const DEFAULT_PADDING: usize = 2;
pub const DEFAULT_BASE_SIDE: usize = 35;
pub const DEFAULT_ATTACH_SIDE: usize = 11;
/// Ball radius whose voxelization matches a 35³ cube's volume within 2%.
pub const DEFAULT_BALL_RADIUS: f64 = 21.7;
/// Depth of the dent carved into the bundled concave shape.
pub const DEFAULT_CONCAVE_DEPTH: f64 = 7.0;

fn check_dim(dim: usize) -> Result<(), ShapeError> {
    if dim == 2 || dim == 3 {
        Ok(())
    } else {
        Err(VoxelError::InvalidDimension(dim).into())
    }
}

fn cubic_grid(dim: usize, n: usize) -> Result<Grid, ShapeError> {
    Ok(Grid::new(dim, &vec![n; dim], 1.0)?)
}

/// Voxels whose centres lie within `radius` of the grid centre. The grid has
/// odd extent so the centre coincides with a voxel centre.
pub fn make_sphere(dim: usize, radius: f64, padding: usize) -> Result<VoxelVolume, ShapeError> {
    check_dim(dim)?;
    if !(radius.is_finite() && radius > 0.0) {
        return Err(ShapeError::Precondition(format!(
            "radius must be positive, got {radius}"
        )));
    }
    if padding == 0 {
        return Err(ShapeError::Precondition(
            "padding must be at least 1".into(),
        ));
    }
    let reach = radius.floor() as usize;
    let n = 2 * (reach + padding) + 1;
    let centre = (reach + padding) as f64;
    let r2 = radius * radius;
    let grid = cubic_grid(dim, n)?;
    Ok(VoxelVolume::from_fn(grid, |c| {
        let d2: f64 = c[..dim].iter().map(|&x| (x as f64 - centre).powi(2)).sum();
        d2 <= r2
    }))
}

pub fn make_cube(dim: usize, side: usize, padding: usize) -> Result<VoxelVolume, ShapeError> {
    make_composite_cube(&CompositeCubeSpec {
        dim,
        base_side: side,
        attach_side: 0,
        faces: Vec::new(),
        padding,
    })
}

pub fn make_composite_cube(spec: &CompositeCubeSpec) -> Result<VoxelVolume, ShapeError> {
    spec.check()?;
    let dim = spec.dim;
    let (b, a, p) = (spec.base_side, spec.attach_side, spec.padding);
    // Room for an attachment on both sides of every axis keeps all composites
    // of one family on the same grid.
    let room = if spec.faces.is_empty() { 0 } else { a };
    let n = b + 2 * (room + p);
    let grid = cubic_grid(dim, n)?;
    let lo = p + room;
    let hi = lo + b;
    let side_lo = lo + (b - a.min(b)) / 2;
    let side_hi = side_lo + a;

    let in_base = |c: [usize; 3]| (0..dim).all(|ax| (lo..hi).contains(&c[ax]));
    let in_attachment = |c: [usize; 3], face: Face| {
        let axis = face.axis();
        let normal = if face.is_positive() {
            (hi..hi + a).contains(&c[axis])
        } else {
            (lo - a..lo).contains(&c[axis])
        };
        normal
            && (0..dim)
                .filter(|&ax| ax != axis)
                .all(|ax| (side_lo..side_hi).contains(&c[ax]))
    };

    let volume = VoxelVolume::from_fn(grid, |c| {
        in_base(c) || spec.faces.iter().any(|&f| in_attachment(c, f))
    });
    let expected = spec.expected_interior();
    let actual = volume.interior_count();
    if actual != expected {
        return Err(ShapeError::Overlap { expected, actual });
    }
    Ok(volume)
}

pub fn make_cube_with_attachment(
    dim: usize,
    base_side: usize,
    attach_side: usize,
    face: Face,
    padding: usize,
) -> Result<VoxelVolume, ShapeError> {
    if attach_side == 0 {
        return Err(ShapeError::Precondition(
            "attachment side must be positive".into(),
        ));
    }
    make_composite_cube(&CompositeCubeSpec {
        dim,
        base_side,
        attach_side,
        faces: vec![face],
        padding,
    })
}

/// Carves a half-ball of radius `depth` into the named face of the interior's
/// bounding box. The ball is centred on the face plane (the outer voxel
/// boundary) at the face centre; voxels are removed by centre inclusion.
pub fn make_concave_face(
    volume: &VoxelVolume,
    face: Face,
    depth: f64,
) -> Result<VoxelVolume, ShapeError> {
    volume.ensure_valid()?;
    let grid = *volume.grid();
    let dim = grid.dim();
    let axis = face.axis();
    if axis >= dim {
        return Err(ShapeError::FaceOutOfDimension(face, dim));
    }
    if !(depth.is_finite() && depth > 0.0) {
        return Err(ShapeError::Precondition(format!(
            "depth must be positive, got {depth}"
        )));
    }
    let (lo, hi) = volume.interior_bounds().expect("valid volume has interior");
    let extent = (hi[axis] - lo[axis] + 1) as f64;
    if depth >= extent / 2.0 {
        return Err(ShapeError::Precondition(format!(
            "depth {depth} must be below half the extent {extent} along the face normal"
        )));
    }

    let mut centre = [0.0f64; 3];
    for ax in 0..dim {
        centre[ax] = (lo[ax] + hi[ax]) as f64 / 2.0;
    }
    let (layer, plane) = if face.is_positive() {
        (hi[axis], hi[axis] as f64 + 0.5)
    } else {
        (lo[axis], lo[axis] as f64 - 0.5)
    };
    centre[axis] = plane;

    let dist2 =
        |c: [usize; 3]| -> f64 { (0..dim).map(|ax| (c[ax] as f64 - centre[ax]).powi(2)).sum() };
    let tangential2 = |c: [usize; 3]| -> f64 {
        (0..dim)
            .filter(|&ax| ax != axis)
            .map(|ax| (c[ax] as f64 - centre[ax]).powi(2))
            .sum()
    };

    // The dent's footprint on the outermost layer must be solid, otherwise the
    // face is not planar where the dent goes.
    let r2 = depth * depth;
    for i in 0..grid.len() {
        let c = grid.coords(i);
        if c[axis] == layer && tangential2(c) <= r2 && !volume.is_interior(i) {
            return Err(ShapeError::Precondition(format!(
                "face {face} is not planar under a dent of radius {depth}"
            )));
        }
    }

    let occupancy = (0..grid.len())
        .map(|i| volume.is_interior(i) && dist2(grid.coords(i)) > r2)
        .collect();
    Ok(VoxelVolume::from_occupancy(grid, occupancy)?)
}

/// A generated volume with a stable identifier.
#[derive(Debug, Clone, PartialEq)]
pub struct NamedVolume {
    pub name: String,
    pub volume: VoxelVolume,
}

impl NamedVolume {
    fn new(name: &str, volume: VoxelVolume) -> Self {
        Self {
            name: name.to_string(),
            volume,
        }
    }
}

/// Sizes for the two bundled shape sets.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ShapeSetParams {
    pub base_side: usize,
    pub attach_side: usize,
    pub ball_radius: f64,
    pub concave_depth: f64,
    pub padding: usize,
}

impl Default for ShapeSetParams {
    fn default() -> Self {
        Self {
            base_side: DEFAULT_BASE_SIDE,
            attach_side: DEFAULT_ATTACH_SIDE,
            ball_radius: DEFAULT_BALL_RADIUS,
            concave_depth: DEFAULT_CONCAVE_DEPTH,
            padding: DEFAULT_PADDING,
        }
    }
}

/// Face subsets of the composite-cube family, keyed by shape name.
pub const COMPOSITE_FAMILY: [(&str, &[Face]); 8] = [
    ("attach0", &[]),
    ("attach1", &[Face::PosX]),
    ("attach2_facing", &[Face::PosX, Face::NegX]),
    ("attach2_adjacent", &[Face::PosX, Face::PosY]),
    ("attach3", &[Face::PosX, Face::NegX, Face::PosY]),
    ("attach4", &[Face::PosX, Face::NegX, Face::PosY, Face::NegY]),
    (
        "attach5",
        &[Face::PosX, Face::NegX, Face::PosY, Face::NegY, Face::PosZ],
    ),
    ("attach6", &Face::ALL),
];

/// Base cube with zero to six identical cubic attachments.
pub fn composite_cube_set(params: &ShapeSetParams) -> Result<Vec<NamedVolume>, ShapeError> {
    COMPOSITE_FAMILY
        .iter()
        .map(|(name, faces)| {
            let spec = CompositeCubeSpec {
                dim: 3,
                base_side: params.base_side,
                attach_side: params.attach_side,
                faces: faces.to_vec(),
                padding: params.padding,
            };
            Ok(NamedVolume::new(name, make_composite_cube(&spec)?))
        })
        .collect()
}

/// Ball, cube, cube with one attachment, and the latter with a dented face,
/// in order of increasing deviation from the ball.
pub fn deviation_set(params: &ShapeSetParams) -> Result<Vec<NamedVolume>, ShapeError> {
    let ball = make_sphere(3, params.ball_radius, params.padding)?;
    let cube = make_cube(3, params.base_side, params.padding)?;
    let attached = make_cube_with_attachment(
        3,
        params.base_side,
        params.attach_side,
        Face::PosZ,
        params.padding,
    )?;
    let dented = make_concave_face(&attached, Face::NegZ, params.concave_depth)?;
    Ok(vec![
        NamedVolume::new("ball", ball),
        NamedVolume::new("cube", cube),
        NamedVolume::new("cube_attach", attached),
        NamedVolume::new("cube_attach_concave", dented),
    ])
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::voxel::RotationPlane;
    use std::f64::consts::PI;

    #[test]
    fn tiny_ball_is_single_voxel() {
        let v = make_sphere(3, 0.6, 1).unwrap();
        assert_eq!(v.interior_count(), 1);
        assert!(v.validate().is_valid());
    }

    #[test]
    fn ball_volume_close_to_analytic() {
        let v = make_sphere(3, 16.0, 1).unwrap();
        let exact = 4.0 / 3.0 * PI * 16f64.powi(3);
        assert!((v.interior_measure() - exact).abs() / exact < 0.05);
        let d = make_sphere(2, 16.0, 1).unwrap();
        let exact = PI * 256.0;
        assert!((d.interior_measure() - exact).abs() / exact < 0.05);
    }

    #[test]
    fn default_ball_matches_default_cube_volume() {
        let ball = make_sphere(3, DEFAULT_BALL_RADIUS, 1)
            .unwrap()
            .interior_measure();
        let cube = (DEFAULT_BASE_SIDE as f64).powi(3);
        assert!(
            (ball - cube).abs() / cube < 0.02,
            "ball {ball} vs cube {cube}"
        );
    }

    #[test]
    fn cube_counts() {
        assert_eq!(make_cube(3, 5, 1).unwrap().interior_count(), 125);
        assert_eq!(make_cube(3, 1, 1).unwrap().interior_count(), 1);
        assert_eq!(make_cube(3, 30, 1).unwrap().interior_measure(), 27000.0);
        assert_eq!(make_cube(2, 7, 1).unwrap().interior_count(), 49);
    }

    #[test]
    fn composite_counts() {
        let count = |faces: &[Face]| {
            make_composite_cube(&CompositeCubeSpec::new(30, 10, faces))
                .unwrap()
                .interior_count()
        };
        assert_eq!(count(&[]), 27000);
        assert_eq!(count(&[Face::PosX, Face::NegX]), 29000);
        assert_eq!(count(&Face::ALL), 33000);
    }

    #[test]
    fn single_attachment_counts_and_validates() {
        let v = make_cube_with_attachment(3, 30, 14, Face::PosZ, 1).unwrap();
        assert_eq!(v.interior_count(), 27000 + 2744);
        assert!(v.validate().is_valid());
        assert!(make_cube_with_attachment(3, 30, 0, Face::PosZ, 1).is_err());
        assert!(make_cube_with_attachment(3, 10, 10, Face::PosZ, 1).is_err());
    }

    #[test]
    fn composite_rejects_bad_specs() {
        let mut spec = CompositeCubeSpec::new(10, 4, &[Face::PosX, Face::PosX]);
        assert!(spec.check().is_err());
        spec.faces = vec![Face::PosZ];
        spec.dim = 2;
        assert!(matches!(
            spec.check(),
            Err(ShapeError::FaceOutOfDimension(..))
        ));
    }

    #[test]
    fn facing_pair_is_symmetric_under_half_turn() {
        let v =
            make_composite_cube(&CompositeCubeSpec::new(12, 4, &[Face::PosX, Face::NegX])).unwrap();
        let turned = v
            .rotated90(RotationPlane::XZ)
            .unwrap()
            .rotated90(RotationPlane::XZ)
            .unwrap();
        assert_eq!(turned, v);
        let turned = v
            .rotated90(RotationPlane::XY)
            .unwrap()
            .rotated90(RotationPlane::XY)
            .unwrap();
        assert_eq!(turned, v);
    }

    /// Independent count of voxel centres strictly inside the cube and inside a
    /// half-ball of radius `r` centred on the face plane: offsets are half-integers.
    fn half_ball_count(side: usize, r: f64) -> usize {
        let half = side as f64 / 2.0;
        let mut n = 0;
        for i in 0..side {
            for j in 0..side {
                for k in 0..side {
                    let x = i as f64 + 0.5 - half;
                    let y = j as f64 + 0.5 - half;
                    let z = k as f64 + 0.5; // depth below the face plane
                    if x * x + y * y + z * z <= r * r {
                        n += 1;
                    }
                }
            }
        }
        n
    }

    #[test]
    fn concave_face_removes_half_ball() {
        let cube = make_cube(3, 30, 1).unwrap();
        let dented = make_concave_face(&cube, Face::PosZ, 10.0).unwrap();
        let removed = half_ball_count(30, 10.0);
        assert_eq!(dented.interior_count(), 27000 - removed);
        // Half of the continuous ball volume, (2/3)πr³ ≈ 2094.
        assert!((removed as f64 - 2.0 / 3.0 * PI * 1000.0).abs() < 60.0);
        assert!(dented.validate().is_valid());
    }

    #[test]
    fn shallow_dent_removes_nothing() {
        let cube = make_cube(3, 30, 1).unwrap();
        let same = make_concave_face(&cube, Face::NegX, 0.4).unwrap();
        assert_eq!(same, cube);
    }

    #[test]
    fn dent_rejects_deep_or_non_planar_faces() {
        let cube = make_cube(3, 30, 1).unwrap();
        assert!(make_concave_face(&cube, Face::PosZ, 15.0).is_err());
        let attached = make_cube_with_attachment(3, 30, 10, Face::PosZ, 1).unwrap();
        assert!(make_concave_face(&attached, Face::PosZ, 10.0).is_err());
        assert!(make_concave_face(&attached, Face::NegZ, 10.0).is_ok());
    }

    #[test]
    fn face_parsing() {
        assert_eq!(
            Face::parse_list("+x,-x, \u{2212}y").unwrap(),
            vec![Face::PosX, Face::NegX, Face::NegY]
        );
        assert!(Face::parse_list("").unwrap().is_empty());
        assert!("+w".parse::<Face>().is_err());
        for f in Face::ALL {
            assert_eq!(f.to_string().parse::<Face>().unwrap(), f);
        }
    }

    #[test]
    fn generators_are_deterministic_and_valid() {
        let params = ShapeSetParams {
            base_side: 9,
            attach_side: 3,
            ball_radius: 5.6,
            concave_depth: 3.0,
            padding: 1,
        };
        let a = composite_cube_set(&params).unwrap();
        let b = composite_cube_set(&params).unwrap();
        assert_eq!(a, b);
        for s in a.iter().chain(deviation_set(&params).unwrap().iter()) {
            assert!(s.volume.validate().is_valid(), "{} invalid", s.name);
        }
    }
}
