//! Fixtures shared by the criterion benches in `benches/`.

use dyson_core::{BoundaryCondition, CouplingModel, FlipPoint, PreparedSystem, Volume};

/// Plus-boundary system on `[0, n-1]` at `alpha = 1.5`, `beta = 1`.
pub fn plus_system(n: i64, cutoff: u64) -> PreparedSystem {
    let v = Volume::new(0, n - 1).expect("positive length");
    let bc = BoundaryCondition::plus(cutoff).expect("positive cutoff");
    let m = CouplingModel::power_law(1.5, 1.0).expect("valid model");
    PreparedSystem::new(v, &bc, &m, None).expect("valid system")
}

/// `m` ordered flip points with irregular gaps in 1..=7.
pub fn flip_points(m: usize) -> Vec<FlipPoint> {
    let mut twice = -1;
    (0..m)
        .map(|rank| {
            twice += 2 * ((rank * rank + 3 * rank) % 7 + 1) as i64;
            FlipPoint { twice, rank }
        })
        .collect()
}
