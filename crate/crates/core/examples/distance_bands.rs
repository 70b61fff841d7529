//! Exact distance transform and the thin bands it selects.

use congruity::distance::{distance_transform, extract_band, max_thickness};
use congruity::shapegen::make_sphere;

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let ball = make_sphere(3, 12.4, 2)?;
    let dist = distance_transform(&ball);
    let thickness = max_thickness(&dist);
    println!("max thickness {thickness}");

    let tol = ball.spacing() / 2.0;
    for frac in [0.05, 0.1, 0.25, 0.5] {
        let band = extract_band(&dist, frac * thickness, tol)?;
        println!("delta {:>6.3}: {} voxels", band.delta(), band.len());
    }
    Ok(())
}
