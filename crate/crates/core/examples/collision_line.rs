//! Collision-line length between a body footprint and an obstacle.
//!
//! The length is the perimeter of the overlap region, so it is zero for
//! disjoint or merely touching outlines and grows with penetration.
//!
//! ```text
//! cargo run --example collision_line
//! ```

use mas_planner::world::{collision_length, Polygon};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let wall = Polygon::rectangle(2.0, -1.0, 2.2, 1.0)?;
    let trunk = Polygon::rectangle(-0.15, -0.25, 0.15, 0.25)?;

    println!("{:>6}  {:>10}", "x", "length");
    for i in 0..=12 {
        let x = 1.6 + 0.05 * f64::from(i);
        let placed = trunk.transformed(x, 0.0, 0.0);
        println!("{x:>6.2}  {:>10.4}", collision_length(&placed, &wall));
    }

    // Rotating the body inside the wall changes the overlap outline.
    let inside = trunk.transformed(2.1, 0.0, std::f64::consts::FRAC_PI_4);
    println!("rotated 45 deg at x=2.1: {:.4}", collision_length(&inside, &wall));
    Ok(())
}
