//! Measure and rank both bundled shape sets.

use congruity::cli::{measure_all, order_report};
use congruity::measure::{order_shapes, MeasureConfig};
use congruity::shapegen::{composite_cube_set, deviation_set, ShapeSetParams};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let params = ShapeSetParams::default();
    let config = MeasureConfig::default();
    let pool = rayon::ThreadPoolBuilder::new().build()?;
    for (label, set) in [
        ("deviation", deviation_set(&params)?),
        ("composite", composite_cube_set(&params)?),
    ] {
        let results = measure_all(&set, &config, &pool)?;
        for (name, r) in &results {
            println!("{name:<20} mean {:.4}", r.mean_entropy);
        }
        println!("[{label}]\n{}", order_report(&order_shapes(&results)));
    }
    Ok(())
}
