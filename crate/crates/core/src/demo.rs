//! Shipped demonstration geometries.

use crate::geometry::CubeUnion;

/// A named geometry with the seed used to build its reference basis.
#[derive(Debug, Clone)]
pub struct Demo {
    pub name: &'static str,
    pub union: CubeUnion,
    pub seed: u64,
}

fn demo(name: &'static str, dim: usize, beta: f64, corners: &[&[f64]], seed: u64) -> Demo {
    let corners = corners.iter().map(|c| c.to_vec()).collect();
    Demo {
        name,
        union: CubeUnion::new(dim, beta, corners).expect("demo geometry is valid"),
        seed,
    }
}

/// `{[0,1), [2.5,3.5)}`, the smallest case with a nontrivial correction.
pub fn two_intervals() -> Demo {
    demo("d1p2", 1, 1.0, &[&[0.0], &[2.5]], 0)
}

pub fn three_intervals() -> Demo {
    demo("d1p3", 1, 1.0, &[&[0.0], &[1.7], &[4.2]], 0)
}

pub fn two_squares() -> Demo {
    demo("d2p2", 2, 1.0, &[&[0.0, 0.0], &[1.5, 2.3]], 0)
}

pub fn three_squares() -> Demo {
    demo("d2p3", 2, 1.0, &[&[0.0, 0.0], &[1.5, 2.3], &[-2.2, 0.6]], 0)
}

pub fn two_cubes() -> Demo {
    demo("d3p2", 3, 1.0, &[&[0.0, 0.0, 0.0], &[1.3, 2.6, -1.7]], 0)
}

pub fn all() -> Vec<Demo> {
    vec![
        two_intervals(),
        three_intervals(),
        two_squares(),
        three_squares(),
        two_cubes(),
    ]
}

pub fn by_name(name: &str) -> Option<Demo> {
    all().into_iter().find(|d| d.name == name)
}
