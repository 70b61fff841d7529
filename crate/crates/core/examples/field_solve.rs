//! Solve the screened Poisson field on a cube and compare the centre value
//! with the whole-space plateau rho².

use congruity::field::{normalize, solve_with_stats, ScreenedPoissonProblem};
use congruity::shapegen::make_cube;

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let side: usize = std::env::args().nth(1).map_or(Ok(25), |s| s.parse())?;
    let rho = 2.0;
    let cube = make_cube(3, side, 1)?;
    let (field, stats) = solve_with_stats(&ScreenedPoissonProblem::new(&cube, rho))?;
    let c = side / 2 + 1;
    let centre = field.value(cube.grid().index([c, c, c]));
    println!("{stats:?}");
    println!("centre value {centre:.6} (plateau {})", rho * rho);

    let unit = normalize(&field)?;
    println!(
        "normalized range [{:.3e}, {}]",
        unit.min_interior().unwrap(),
        unit.max_interior().unwrap()
    );
    Ok(())
}
