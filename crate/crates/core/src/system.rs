//! Conditioning constraints and the reduced problem both engines work on.
//!
//! Frozen sites (from a [`Constraint`]) and the exterior are folded into a
//! per-free-site field and a constant energy offset, so the energy of a
//! configuration of the free sites is
//!
//! ```text
//! E(s) = offset - sum_a h_a s_a - sum_{a<b} J(|x_a - x_b|) s_a s_b
//! ```

use std::collections::BTreeMap;

use crate::error::{Error, Result};
use crate::lattice::{BoundaryCondition, BoundaryKind, CouplingModel, Hamiltonian, Spin, SpinConfig, Volume};

/// Partial assignment of sites inside a volume.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct Constraint {
    frozen: BTreeMap<i64, Spin>,
}

impl Constraint {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn freeze(mut self, site: i64, spin: Spin) -> Self {
        self.frozen.insert(site, spin);
        self
    }

    /// Freezes every site of `[lo, hi]` to `spin`.
    pub fn freeze_range(mut self, lo: i64, hi: i64, spin: Spin) -> Self {
        for i in lo..=hi {
            self.frozen.insert(i, spin);
        }
        self
    }

    /// Freezes every site of a configuration.
    pub fn freeze_config(mut self, config: &SpinConfig) -> Self {
        for (i, s) in config.volume().sites().zip(config.spins()) {
            self.frozen.insert(i, *s);
        }
        self
    }

    pub fn insert(&mut self, site: i64, spin: Spin) {
        self.frozen.insert(site, spin);
    }

    pub fn get(&self, site: i64) -> Option<Spin> {
        self.frozen.get(&site).copied()
    }

    pub fn is_frozen(&self, site: i64) -> bool {
        self.frozen.contains_key(&site)
    }

    pub fn len(&self) -> usize {
        self.frozen.len()
    }

    pub fn is_empty(&self) -> bool {
        self.frozen.is_empty()
    }

    pub fn iter(&self) -> impl Iterator<Item = (i64, Spin)> + '_ {
        self.frozen.iter().map(|(&i, &s)| (i, s))
    }

    pub fn validate(&self, volume: &Volume, bc: &BoundaryCondition) -> Result<()> {
        for (site, spin) in self.iter() {
            volume.check_site(site)?;
            if let BoundaryKind::Frozen(w) = bc.kind() {
                if w.get(site).is_some_and(|s| s != spin) {
                    return Err(Error::ConstraintConflict { site });
                }
            }
        }
        Ok(())
    }
}

/// A Gibbs specification reduced to its free sites.
#[derive(Clone, Debug)]
pub struct PreparedSystem {
    volume: Volume,
    bc: BoundaryCondition,
    model: CouplingModel,
    /// Volume index of each free site, ascending.
    free: Vec<usize>,
    /// `J(d)` for `0 <= d < |V|`.
    couplings: Vec<f64>,
    /// Exterior plus frozen-site field on each free site.
    fields: Vec<f64>,
    offset: f64,
    template: Vec<Spin>,
}

impl PreparedSystem {
    pub fn new(
        volume: Volume,
        bc: &BoundaryCondition,
        model: &CouplingModel,
        constraint: Option<&Constraint>,
    ) -> Result<Self> {
        let empty = Constraint::new();
        let constraint = constraint.unwrap_or(&empty);
        constraint.validate(&volume, bc)?;
        let ham = Hamiltonian::new(volume, bc, model)?;
        let ext = ham.exterior_fields();
        let couplings = ham.couplings().to_vec();

        let mut template = vec![Spin::Up; volume.len()];
        let mut frozen = Vec::with_capacity(constraint.len());
        for (site, spin) in constraint.iter() {
            let k = volume.index_of(site).expect("validated");
            template[k] = spin;
            frozen.push(k);
        }
        let free: Vec<usize> = (0..volume.len()).filter(|k| !constraint.is_frozen(volume.site_at(*k))).collect();

        let mut offset = 0.0;
        for (a, &i) in frozen.iter().enumerate() {
            let si = template[i].value();
            let mut inner = ext[i];
            for &j in &frozen[a + 1..] {
                inner += couplings[j.abs_diff(i)] * template[j].value();
            }
            offset -= si * inner;
        }
        let fields = free
            .iter()
            .map(|&k| {
                ext[k] + frozen.iter().map(|&j| couplings[j.abs_diff(k)] * template[j].value()).sum::<f64>()
            })
            .collect();

        Ok(PreparedSystem { volume, bc: bc.clone(), model: *model, free, couplings, fields, offset, template })
    }

    pub fn volume(&self) -> Volume {
        self.volume
    }

    pub fn boundary(&self) -> &BoundaryCondition {
        &self.bc
    }

    pub fn model(&self) -> &CouplingModel {
        &self.model
    }

    pub fn beta(&self) -> f64 {
        self.model.beta
    }

    pub fn n_free(&self) -> usize {
        self.free.len()
    }

    /// Volume indices of the free sites.
    pub fn free_indices(&self) -> &[usize] {
        &self.free
    }

    pub fn free_sites(&self) -> impl Iterator<Item = i64> + '_ {
        self.free.iter().map(|&k| self.volume.site_at(k))
    }

    pub fn is_free(&self, site: i64) -> bool {
        self.volume.index_of(site).is_some_and(|k| self.free.binary_search(&k).is_ok())
    }

    /// Full-volume spins with frozen values in place; free entries are
    /// placeholders.
    pub fn template(&self) -> &[Spin] {
        &self.template
    }

    /// `J` between free sites `a` and `b` (indices into the free list).
    #[inline]
    pub fn coupling(&self, a: usize, b: usize) -> f64 {
        self.couplings[self.free[a].abs_diff(self.free[b])]
    }

    /// `J(d)` by volume-index distance.
    pub fn coupling_table(&self) -> &[f64] {
        &self.couplings
    }

    /// Field on each free site from the exterior and the frozen sites.
    pub fn external_fields(&self) -> &[f64] {
        &self.fields
    }

    /// Energy of all frozen-frozen and frozen-exterior bonds.
    pub fn offset(&self) -> f64 {
        self.offset
    }

    /// Total local field on each free site for the given free spins.
    pub fn local_fields(&self, free_spins: &[Spin]) -> Vec<f64> {
        let n = self.free.len();
        let mut h = self.fields.clone();
        for a in 0..n {
            let sa = free_spins[a].value();
            for b in (a + 1)..n {
                let j = self.coupling(a, b);
                h[a] += j * free_spins[b].value();
                h[b] += j * sa;
            }
        }
        h
    }

    pub fn energy(&self, free_spins: &[Spin]) -> f64 {
        let n = self.free.len();
        let mut e = self.offset;
        for a in 0..n {
            let sa = free_spins[a].value();
            let mut inner = self.fields[a];
            for (b, sb) in free_spins.iter().enumerate().take(n).skip(a + 1) {
                inner += self.coupling(a, b) * sb.value();
            }
            e -= sa * inner;
        }
        e
    }

    /// Writes free spins into a full-volume buffer.
    pub fn fill(&self, free_spins: &[Spin], full: &mut [Spin]) {
        for (&k, &s) in self.free.iter().zip(free_spins) {
            full[k] = s;
        }
    }

    pub fn full_config(&self, free_spins: &[Spin]) -> SpinConfig {
        let mut full = self.template.clone();
        self.fill(free_spins, &mut full);
        SpinConfig::new(self.volume, full).expect("template matches volume")
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::lattice::energy;

    #[test]
    fn reduced_energy_matches_full_energy() {
        let v = Volume::new(-3, 3).unwrap();
        let m = CouplingModel::new(1.4, 1.0, 2.0).unwrap();
        let bc = BoundaryCondition::dobrushin_minus_plus(40).unwrap();
        let c = Constraint::new().freeze(-1, Spin::Down).freeze(2, Spin::Up);
        let sys = PreparedSystem::new(v, &bc, &m, Some(&c)).unwrap();
        assert_eq!(sys.n_free(), 5);
        for code in 0u32..32 {
            let free: Vec<Spin> =
                (0..5).map(|b| if code >> b & 1 == 1 { Spin::Up } else { Spin::Down }).collect();
            let full = sys.full_config(&free);
            let want = energy(&full, &bc, &m).unwrap();
            assert!((sys.energy(&free) - want).abs() < 1e-12);
            let h = sys.local_fields(&free);
            for (a, site) in sys.free_sites().enumerate() {
                let d = crate::lattice::delta_energy(&full, site, &bc, &m).unwrap();
                assert!((2.0 * free[a].value() * h[a] - d).abs() < 1e-12);
            }
        }
    }

    #[test]
    fn constraint_checks() {
        let v = Volume::new(0, 2).unwrap();
        let m = CouplingModel::power_law(1.5, 1.0).unwrap();
        let c = Constraint::new().freeze(5, Spin::Up);
        let err = PreparedSystem::new(v, &BoundaryCondition::free(), &m, Some(&c)).unwrap_err();
        assert!(matches!(err, Error::SiteOutsideVolume { site: 5, .. }));

        let w = SpinConfig::uniform(Volume::new(-3, 5).unwrap(), Spin::Up);
        let bc = BoundaryCondition::frozen(w, 3).unwrap();
        let c = Constraint::new().freeze(1, Spin::Down);
        let err = PreparedSystem::new(v, &bc, &m, Some(&c)).unwrap_err();
        assert!(matches!(err, Error::ConstraintConflict { site: 1 }));
    }
}
