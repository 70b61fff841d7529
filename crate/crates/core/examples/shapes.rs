//! Generate the bundled shape sets and print their voxel counts.

use congruity::shapegen::{composite_cube_set, deviation_set, ShapeSetParams};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let params = ShapeSetParams::default();
    println!("{params:?}");
    for (label, set) in [
        ("composite cubes", composite_cube_set(&params)?),
        ("deviation set", deviation_set(&params)?),
    ] {
        println!("{label}:");
        for shape in &set {
            let g = shape.volume.grid();
            println!(
                "  {:<22} grid {:?}  interior {}",
                shape.name,
                g.extents(),
                shape.volume.interior_count()
            );
        }
    }
    Ok(())
}
