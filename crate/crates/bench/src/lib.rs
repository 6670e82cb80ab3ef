//! Shared fixtures for the criterion benches.

use bismut_core::{get_manifold, Geometry, Point};

/// A geometry from the catalog at the default step, plus an interior point.
pub fn fixture(name: &str) -> (Geometry, Point) {
    let m = get_manifold(name).expect("catalog entry");
    let p = match m.dim() {
        6 => Point::new(vec![0.7, 0.3, -0.2, 0.5, 0.1, 0.9]),
        _ if name == "su2xu1" => Point::new(vec![1.0, 0.4, 2.0, 0.3]),
        _ => Point::new(vec![1.0, 0.3, -0.2, 0.5]),
    };
    (Geometry::new(&m, 1e-4).expect("positive step"), p)
}
