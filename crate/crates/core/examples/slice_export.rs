//! Export the middle plane of both normalized fields of a shape as CSV.

use congruity::cli::slice_csv;
use congruity::measure::MeasureConfig;
use congruity::shapegen::{make_cube_with_attachment, Face};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let shape = make_cube_with_attachment(3, 16, 6, Face::PosX, 2)?;
    let out = std::env::temp_dir();
    for rho_index in [1, 2] {
        let csv = slice_csv(&shape, &MeasureConfig::default(), rho_index, 2, None)?;
        let path = out.join(format!("slice_rho{rho_index}.csv"));
        std::fs::write(&path, &csv)?;
        println!(
            "{} ({} rows)",
            path.display(),
            csv.iter().filter(|&&b| b == b'\n').count()
        );
    }
    Ok(())
}
