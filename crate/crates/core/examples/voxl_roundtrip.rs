//! Write a shape to the VOXL format, read it back and check it survived.

use congruity::shapegen::make_sphere;
use congruity::voxel::{read_voxl, write_voxl};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let ball = make_sphere(3, 6.5, 2)?;
    let bytes = write_voxl(&ball)?;
    let header_len = bytes
        .iter()
        .enumerate()
        .filter(|(_, &b)| b == b'\n')
        .nth(3)
        .map_or(0, |(i, _)| i);
    println!("{}", String::from_utf8_lossy(&bytes[..header_len]));

    let back = read_voxl(&bytes)?;
    assert_eq!(back, ball);
    println!(
        "{} bytes, {} interior voxels, round trip exact",
        bytes.len(),
        back.interior_count()
    );

    let report = back.validate();
    println!("valid: {}", report.is_valid());
    Ok(())
}
