//! Congruity of a ball against a cube of the same volume.

use congruity::measure::{congruity_measure, MeasureConfig};
use congruity::shapegen::{
    make_cube, make_sphere, DEFAULT_BALL_RADIUS, DEFAULT_BASE_SIDE, DEFAULT_PADDING,
};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let config = MeasureConfig::default();
    let ball = make_sphere(3, DEFAULT_BALL_RADIUS, DEFAULT_PADDING)?;
    let cube = make_cube(3, DEFAULT_BASE_SIDE, DEFAULT_PADDING)?;
    for (name, shape) in [("ball", &ball), ("cube", &cube)] {
        let r = congruity_measure(shape, &config)?;
        println!(
            "{name}: e = {:.4?}  mean {:.4}  bands {:?}",
            r.entropies, r.mean_entropy, r.band_sizes
        );
    }
    Ok(())
}
