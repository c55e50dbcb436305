//! Line-of-sight and cone occlusion through a wall with a window.
//!
//! ```text
//! cargo run --example visibility_check
//! ```

use mas_planner::scenario::bundled;
use mas_planner::world::{cone_occlusion, segment_occluded, RayFan};
use nalgebra::{Point3, Unit};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let scenario = bundled::load("wall-with-window")?;
    let state = scenario.file.initial_state()?;
    let scene = &state.scene;
    let target = scene.target;

    println!("target at ({:.2}, {:.2}, {:.2})", target.x, target.y, target.z);
    println!("{:>6} {:>6}  {:>9}  {:>9}", "y", "z", "segment", "cone");
    // Behind the wall, through the window, under the sill, off to the side.
    for &(y, z) in &[(-0.5, 1.6), (1.8, 1.6), (1.8, 0.3), (2.5, 1.6)] {
        let eye = Point3::new(0.5, y, z);
        let occluded = segment_occluded(eye, target, scene);
        let axis = Unit::new_normalize(target - eye);
        let range = (target - eye).norm();
        let cone = cone_occlusion(eye, &axis, 5f64.to_radians(), range, RayFan::default(), scene);
        println!("{y:>6.2} {z:>6.2}  {occluded:>9.4}  {cone:>9.4}");
    }

    for rings in 1..=4 {
        println!("fan with {rings} rings casts {} rays", RayFan::new(rings).n_rays());
    }
    Ok(())
}
