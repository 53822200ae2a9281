//! Values pinned from an independent arbitrary-precision enumeration written
//! outside this crate (plain nested loops, direct exterior sums).

use dyson_core::analytics::g_coefficient;
use dyson_core::contour::{build_triangles, FlipPoint};
use dyson_core::{exact_gibbs, BoundaryCondition, CouplingModel, Volume};

#[test]
fn plus_profile_on_seven_sites() {
    let v = Volume::new(-3, 3).unwrap();
    let m = CouplingModel::power_law(1.5, 1.5).unwrap();
    let r = exact_gibbs(v, &BoundaryCondition::plus(1000).unwrap(), &m, None).unwrap();
    let golden = [
        (-3, 0.9999995443916292),
        (-2, 0.999999544349889),
        (-1, 0.9999995443491685),
        (0, 0.9999995443490585),
        (1, 0.9999995443491685),
        (2, 0.999999544349889),
        (3, 0.9999995443916292),
    ];
    for (site, want) in golden {
        assert!((r.magnetization[&site] - want).abs() < 1e-10, "site {site}");
    }
    assert!((r.log_partition - 39.792818058131225).abs() < 1e-9);
}

#[test]
fn g_coefficient_reference_point() {
    let g = g_coefficient(1.5, 5.0, 0.5, 3.0, 1.0).unwrap();
    assert!((g.m_alpha - 1.9318516525781366).abs() < 1e-12);
    assert!((g.prefactor / 1.6897542533152554e-24 - 1.0).abs() < 1e-10);
    assert!((g.bracket - -0.02603342809033431).abs() < 1e-12);
    assert!((g.value / -4.399009584401925e-26 - 1.0).abs() < 1e-10);
}

#[test]
fn tied_gaps_resolve_to_the_left_pair() {
    let flips: Vec<FlipPoint> =
        [-1i64, 3, 7].iter().enumerate().map(|(rank, &twice)| FlipPoint { twice, rank }).collect();
    let d = build_triangles(&flips).unwrap();
    assert_eq!(d.triangles.len(), 1);
    assert_eq!(d.triangles[0].0.position(), -0.5);
    assert_eq!(d.triangles[0].1.position(), 1.5);
    assert_eq!(d.interface.unwrap().position(), 3.5);
}
