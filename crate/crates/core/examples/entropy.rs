//! Histogram entropy on a few hand-made samples.

use congruity::measure::{build_histogram, shannon_entropy, Histogram};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let constant = build_histogram(&[0.3; 10], 64)?;
    println!("constant sample: {} bits", shannon_entropy(&constant));

    let spread: Vec<f64> = (0..64).map(|i| (i as f64 + 0.5) / 64.0).collect();
    println!(
        "one value per bin: {} bits",
        shannon_entropy(&build_histogram(&spread, 64)?)
    );

    let skewed = Histogram::from_counts(vec![3, 1])?;
    println!("counts [3, 1]: {:.6} bits", skewed.entropy());
    Ok(())
}
