use proptest::prelude::*;
use rieszcube::{CubeUnion, GeometryError, Partition, Rect};

mod common;
use common::{union_strategy, unions_with};

fn boxes_equal(a: &Rect, b: &Rect, tol: f64) -> bool {
    a.lo.iter().zip(&b.lo).all(|(x, y)| (x - y).abs() <= tol) && a.hi.iter().zip(&b.hi).all(|(x, y)| (x - y).abs() <= tol)
}

#[test]
fn validate_union_examples() {
    let single = CubeUnion::new(1, 1.0, vec![vec![0.0]]).unwrap();
    assert_eq!(single.len(), 1);
    assert_eq!(single.measure(), 1.0);
    assert!(CubeUnion::new(1, 1.0, vec![vec![0.0], vec![2.5]]).is_ok());
    assert!(matches!(
        CubeUnion::new(1, 1.0, vec![vec![0.0], vec![0.5]]),
        Err(GeometryError::Overlap { first: 0, second: 1 })
    ));
    assert!(matches!(
        CubeUnion::new(2, 1.0, vec![vec![0.0, 0.0], vec![3.0]]),
        Err(GeometryError::Dimension { index: 1, .. })
    ));
    assert!(CubeUnion::new(1, 0.0, vec![vec![0.0]]).is_err());
    assert!(CubeUnion::new(1, -1.0, vec![vec![0.0]]).is_err());
    assert!(CubeUnion::new(1, 1.0, vec![]).is_err());
}

#[test]
fn locate_wrap_examples() {
    let e = CubeUnion::new(2, 2.0, vec![vec![0.0, 0.0], vec![-3.5, 5.0]]).unwrap();
    let (n, gamma) = e.locate_wrap(0, 1);
    assert_eq!(n, vec![-2, 2]);
    assert_eq!(gamma, vec![0.5, 1.0]);
    let (n, gamma) = e.locate_wrap(1, 1);
    assert_eq!(n, vec![0, 0]);
    assert_eq!(gamma, vec![-3.5, 5.0]);
}

#[test]
fn two_interval_partition_labels() {
    let e = CubeUnion::new(1, 1.0, vec![vec![0.0], vec![2.5]]).unwrap();
    let part = Partition::build(&e).unwrap();
    assert_eq!(part.cell_count(), 2);
    assert!(boxes_equal(&part.cell(0, 0), &Rect::new(vec![0.0], vec![0.5]).unwrap(), 1e-12));
    assert!(boxes_equal(&part.cell(0, 1), &Rect::new(vec![0.5], vec![1.0]).unwrap(), 1e-12));
    assert!(boxes_equal(&part.cell(1, 0), &Rect::new(vec![3.0], vec![3.5]).unwrap(), 1e-12));
    assert!(boxes_equal(&part.cell(1, 1), &Rect::new(vec![2.5], vec![3.0]).unwrap(), 1e-12));
    assert_eq!(part.correction(0, 0, 1), vec![1]);
    assert_eq!(part.correction(0, 1, 1), vec![0]);
    assert_eq!(part.translation_set(0, 0), vec![vec![0], vec![3]]);
    assert_eq!(part.translation_set(0, 1), vec![vec![0], vec![2]]);
    assert_eq!(part.cell_of(&e, &[2.7]), Some((1, 1)));
    assert_eq!(part.cell_of(&e, &[1.0]), None);
}

#[test]
fn single_cube_cell_of() {
    let e = CubeUnion::new(1, 1.0, vec![vec![0.0]]).unwrap();
    let part = Partition::build(&e).unwrap();
    assert_eq!(part.cell_count(), 1);
    assert_eq!(part.translation_set(0, 0), vec![vec![0]]);
    assert_eq!(part.cell_of(&e, &[0.0]), Some((0, 0)));
    assert_eq!(part.cell_of(&e, &[1.0]), None);
}

proptest! {
    #![proptest_config(ProptestConfig { cases: 128, failure_persistence: None, ..ProptestConfig::default() })]

    #[test]
    fn wrap_anchor_lies_in_cube(e in union_strategy()) {
        let beta = e.beta();
        for j in 0..e.len() {
            for k in 0..e.len() {
                let (n, gamma) = e.locate_wrap(j, k);
                for t in 0..e.dim() {
                    let lo = e.corner(j)[t];
                    prop_assert!(gamma[t] >= lo - 1e-9 * beta && gamma[t] < lo + beta);
                    prop_assert!((gamma[t] - (e.corner(k)[t] - beta * n[t] as f64)).abs() <= 1e-12 * (1.0 + gamma[t].abs()));
                }
                if j == k {
                    prop_assert!(n.iter().all(|v| *v == 0));
                }
            }
        }
    }

    #[test]
    fn partition_cells_tile_every_cube(e in union_strategy()) {
        let part = Partition::build(&e).unwrap();
        let p = e.len();
        let d = e.dim();
        let tol = 1e-9 * e.beta();
        prop_assert!(part.cell_count() <= p.pow(d as u32));
        for j in 0..p {
            let cube = e.cube(j);
            let mut total = 0.0;
            for s in 0..part.cell_count() {
                let cell = part.cell(j, s);
                for t in 0..d {
                    prop_assert!(cell.lo[t] >= cube.lo[t] - tol && cell.hi[t] <= cube.hi[t] + tol);
                }
                total += cell.measure();
                for r in s + 1..part.cell_count() {
                    prop_assert!(cell.overlap_measure(&part.cell(j, r)) <= tol);
                }
            }
            prop_assert!((total - e.beta().powi(d as i32)).abs() <= 1e-9 * e.beta().powi(d as i32));
        }
    }

    #[test]
    fn translation_sets_distinct_and_closed(e in union_strategy()) {
        let part = Partition::build(&e).unwrap();
        let p = e.len();
        for j in 0..p {
            for s in 0..part.cell_count() {
                let set = part.translation_set(j, s);
                prop_assert_eq!(set.len(), p);
                prop_assert!(set[j].iter().all(|v| *v == 0));
                let mut sorted = set.clone();
                sorted.sort();
                sorted.dedup();
                prop_assert_eq!(sorted.len(), p);
                // Q_j^s + beta m lands exactly on cell s of cube k
                for (k, m) in set.iter().enumerate() {
                    let moved = part.cell(j, s).translated(m, e.beta());
                    prop_assert!(boxes_equal(&moved, &part.cell(k, s), 1e-9 * e.beta() * (1.0 + 10.0)));
                }
            }
        }
    }

    #[test]
    fn corrections_are_unit_and_relation_is_exact(e in union_strategy()) {
        let part = Partition::build(&e).unwrap();
        let p = e.len();
        for s in 0..part.cell_count() {
            for j in 0..p {
                for k in 0..p {
                    let c = part.correction(j, s, k);
                    prop_assert!(c.iter().all(|v| (-1..=1).contains(v)));
                    // n_kj + C_ks(j) = n_0j - n_0k + C_0s(j) - C_0s(k)
                    let lhs: Vec<i64> = part.wrap(k, j).iter().zip(part.correction(k, s, j)).map(|(a, b)| a + b).collect();
                    let rhs: Vec<i64> = (0..e.dim())
                        .map(|t| {
                            part.wrap(0, j)[t] - part.wrap(0, k)[t] + part.correction(0, s, j)[t]
                                - part.correction(0, s, k)[t]
                        })
                        .collect();
                    prop_assert_eq!(lhs, rhs);
                }
            }
        }
    }

    #[test]
    fn locate_wrap_shifts_with_beta_multiples(e in unions_with(2), v in proptest::collection::vec(-4i64..=4, 3)) {
        let d = e.dim();
        let beta = e.beta();
        // skip moves that make cube 1 collide with another cube
        let mut corners = e.corners().to_vec();
        for t in 0..d {
            corners[1][t] += beta * v[t] as f64;
        }
        let Ok(moved) = CubeUnion::new(d, beta, corners) else { return Ok(()) };
        let (n0, g0) = e.locate_wrap(0, 1);
        let (n1, g1) = moved.locate_wrap(0, 1);
        for t in 0..d {
            prop_assert_eq!(n1[t], n0[t] + v[t]);
            prop_assert!((g1[t] - g0[t]).abs() <= 1e-12 * (1.0 + beta * 10.0));
        }
    }

    #[test]
    fn cell_of_finds_containing_cell(e in union_strategy(), u in proptest::collection::vec(0.0f64..1.0, 4)) {
        let part = Partition::build(&e).unwrap();
        let d = e.dim();
        let j = ((u[3] * e.len() as f64) as usize).min(e.len() - 1);
        let omega: Vec<f64> = (0..d).map(|t| e.corner(j)[t] + e.beta() * u[t]).collect();
        let (cj, s) = part.cell_of(&e, &omega).unwrap();
        prop_assert_eq!(cj, j);
        let cell = part.cell(j, s);
        let tol = 1e-9 * e.beta();
        for t in 0..d {
            prop_assert!(omega[t] >= cell.lo[t] - tol && omega[t] < cell.hi[t] + tol);
        }
        let outside: Vec<f64> = (0..d).map(|t| e.corner(j)[t] + e.beta() * (1.0 + 100.0 * u[t]) + 1000.0).collect();
        prop_assert!(part.cell_of(&e, &outside).is_none());
    }
}
