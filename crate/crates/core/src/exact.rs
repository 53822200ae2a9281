//! Brute-force enumeration of all configurations of the free sites.
//!
//! Configurations are visited in Gray-code order so each step flips one spin
//! and the energy and local fields are updated in `O(n)`. The code space is
//! split into contiguous chunks that run in parallel; every chunk keeps a
//! streaming log-sum-exp accumulator and the chunks are merged in index order,
//! so results do not depend on the thread count.

use std::collections::BTreeMap;
use std::time::{Duration, Instant};

use rayon::prelude::*;
use serde_json::{json, Value};

use crate::error::{Error, Result};
use crate::lattice::{BoundaryCondition, CouplingModel, Spin, Volume};
use crate::system::{Constraint, PreparedSystem};

pub const DEFAULT_CAP: usize = 24;

const MAX_CHUNKS: u64 = 256;

/// Current configuration during enumeration.
pub struct State<'a> {
    /// Full-volume spins, frozen sites included.
    pub spins: &'a [Spin],
    /// Free spins as bits, bit `a` set when free site `a` is up.
    pub code: u64,
}

/// Accumulates weighted statistics over the enumeration.
///
/// Weights passed to `observe` are relative to a reference that the engine
/// may lower; `scale` is called with the correction factor when it does.
pub trait Observer: Send {
    fn observe(&mut self, state: &State<'_>, weight: f64);
    fn scale(&mut self, factor: f64);
    fn merge(&mut self, other: Self);
}

impl Observer for () {
    fn observe(&mut self, _: &State<'_>, _: f64) {}
    fn scale(&mut self, _: f64) {}
    fn merge(&mut self, _: Self) {}
}

/// Per-site weighted spin sums over the full volume.
#[derive(Clone, Debug)]
pub struct SiteSums(pub Vec<f64>);

impl Observer for SiteSums {
    fn observe(&mut self, state: &State<'_>, weight: f64) {
        for (acc, s) in self.0.iter_mut().zip(state.spins) {
            *acc += weight * s.value();
        }
    }

    fn scale(&mut self, factor: f64) {
        self.0.iter_mut().for_each(|v| *v *= factor);
    }

    fn merge(&mut self, other: Self) {
        for (a, b) in self.0.iter_mut().zip(other.0) {
            *a += b;
        }
    }
}

/// Weight of every individual configuration, indexed by `State::code`.
#[derive(Clone, Debug)]
pub struct Weights(pub Vec<f64>);

impl Observer for Weights {
    fn observe(&mut self, state: &State<'_>, weight: f64) {
        self.0[state.code as usize] += weight;
    }

    fn scale(&mut self, factor: f64) {
        self.0.iter_mut().for_each(|v| *v *= factor);
    }

    fn merge(&mut self, other: Self) {
        for (a, b) in self.0.iter_mut().zip(other.0) {
            *a += b;
        }
    }
}

struct Accumulator<O> {
    shift: f64,
    total: f64,
    obs: O,
}

impl<O: Observer> Accumulator<O> {
    fn new(obs: O) -> Self {
        Accumulator { shift: f64::NEG_INFINITY, total: 0.0, obs }
    }

    #[inline]
    fn push(&mut self, state: &State<'_>, log_weight: f64) {
        if log_weight > self.shift {
            let factor = (self.shift - log_weight).exp();
            self.total *= factor;
            self.obs.scale(factor);
            self.shift = log_weight;
        }
        let w = (log_weight - self.shift).exp();
        self.total += w;
        self.obs.observe(state, w);
    }

    fn merge(&mut self, mut other: Self) {
        if other.total == 0.0 {
            return;
        }
        if other.shift > self.shift {
            std::mem::swap(self, &mut other);
        }
        let factor = (other.shift - self.shift).exp();
        other.obs.scale(factor);
        self.total += other.total * factor;
        self.obs.merge(other.obs);
    }
}

/// Normalization plus the observer's accumulated sums.
pub struct Enumeration<O> {
    pub log_partition: f64,
    /// Sum of the relative weights the observer saw; divide observer sums by
    /// this to get expectations.
    pub total: f64,
    pub observer: O,
}

/// Enumerator with a configurable free-site cap.
#[derive(Clone, Copy, Debug)]
pub struct ExactEngine {
    pub cap: usize,
}

impl Default for ExactEngine {
    fn default() -> Self {
        ExactEngine { cap: DEFAULT_CAP }
    }
}

impl ExactEngine {
    /// Cap above the default; each extra site doubles the cost.
    pub fn with_cap(cap: usize) -> Self {
        ExactEngine { cap: cap.min(62) }
    }

    pub fn check(&self, sys: &PreparedSystem) -> Result<()> {
        if sys.n_free() > self.cap {
            return Err(Error::CapExceeded { free: sys.n_free(), cap: self.cap });
        }
        Ok(())
    }

    pub fn enumerate<O, F>(&self, sys: &PreparedSystem, make: F) -> Result<Enumeration<O>>
    where
        O: Observer,
        F: Fn() -> O + Sync,
    {
        self.check(sys)?;
        let n = sys.n_free();
        let total = 1u64 << n;
        let chunks = total.min(MAX_CHUNKS);
        let per = total / chunks;
        let parts: Vec<Accumulator<O>> = (0..chunks)
            .into_par_iter()
            .map(|c| run_chunk(sys, c * per, (c + 1) * per, make()))
            .collect();
        let mut acc = Accumulator::new(make());
        for p in parts {
            acc.merge(p);
        }
        Ok(Enumeration {
            log_partition: acc.shift + acc.total.ln(),
            total: acc.total,
            observer: acc.obs,
        })
    }

    pub fn gibbs(
        &self,
        volume: Volume,
        bc: &BoundaryCondition,
        model: &CouplingModel,
        constraint: Option<&Constraint>,
    ) -> Result<ExactResult> {
        let start = Instant::now();
        let sys = PreparedSystem::new(volume, bc, model, constraint)?;
        let len = volume.len();
        let e = self.enumerate(&sys, || SiteSums(vec![0.0; len]))?;
        let mut magnetization: BTreeMap<i64, f64> = BTreeMap::new();
        for (k, sum) in e.observer.0.iter().enumerate() {
            magnetization.insert(volume.site_at(k), sum / e.total);
        }
        // frozen sites report their value exactly
        for (k, s) in sys.template().iter().enumerate() {
            if !sys.free_indices().contains(&k) {
                magnetization.insert(volume.site_at(k), s.value());
            }
        }
        Ok(ExactResult {
            log_partition: e.log_partition,
            magnetization,
            volume,
            bc: bc.to_string(),
            model: *model,
            wall_time: start.elapsed(),
        })
    }

    pub fn conditional_magnetization(
        &self,
        volume: Volume,
        bc: &BoundaryCondition,
        model: &CouplingModel,
        constraint: &Constraint,
        site: i64,
    ) -> Result<f64> {
        volume.check_site(site)?;
        if constraint.is_frozen(site) {
            return Err(Error::SiteFrozen(site));
        }
        let r = self.gibbs(volume, bc, model, Some(constraint))?;
        Ok(r.magnetization[&site])
    }

    /// `<s_site>` on each of an ascending chain of volumes.
    pub fn nested_volume_bracket(
        &self,
        site: i64,
        volumes: &[Volume],
        bc: &BoundaryCondition,
        model: &CouplingModel,
        constraint: Option<&Constraint>,
    ) -> Result<Vec<f64>> {
        for (i, w) in volumes.windows(2).enumerate() {
            if !w[1].contains_volume(&w[0]) {
                return Err(Error::NotNested { index: i + 1 });
            }
        }
        volumes
            .iter()
            .map(|v| {
                v.check_site(site)?;
                let sys = PreparedSystem::new(*v, bc, model, constraint)?;
                let k = v.index_of(site).expect("checked");
                let e = self.enumerate(&sys, || SiteSums(vec![0.0; v.len()]))?;
                Ok(e.observer.0[k] / e.total)
            })
            .collect()
    }

    /// Gibbs probability of every free configuration, indexed by its code.
    pub fn distribution(&self, sys: &PreparedSystem) -> Result<Vec<f64>> {
        let size = 1usize << sys.n_free();
        self.check(sys)?;
        let e = self.enumerate(sys, || Weights(vec![0.0; size]))?;
        Ok(e.observer.0.iter().map(|w| w / e.total).collect())
    }
}

fn gray(t: u64) -> u64 {
    t ^ (t >> 1)
}

fn run_chunk<O: Observer>(sys: &PreparedSystem, from: u64, to: u64, obs: O) -> Accumulator<O> {
    let n = sys.n_free();
    let beta = sys.beta();
    let mut code = gray(from);
    let mut free: Vec<Spin> = (0..n).map(|a| if code >> a & 1 == 1 { Spin::Up } else { Spin::Down }).collect();
    let mut full = sys.template().to_vec();
    sys.fill(&free, &mut full);
    let mut h = sys.local_fields(&free);
    let mut energy = sys.energy(&free);
    let idx = sys.free_indices();

    // dense couplings among free sites keep the inner loop branch-free
    let mut jm = vec![0.0; n * n];
    for a in 0..n {
        for b in 0..n {
            if a != b {
                jm[a * n + b] = sys.coupling(a, b);
            }
        }
    }

    let mut acc = Accumulator::new(obs);
    let mut t = from;
    loop {
        acc.push(&State { spins: &full, code }, -beta * energy);
        t += 1;
        if t == to {
            break;
        }
        let a = t.trailing_zeros() as usize;
        let s = free[a].value();
        energy += 2.0 * s * h[a];
        let flipped = free[a].flip();
        free[a] = flipped;
        full[idx[a]] = flipped;
        code ^= 1 << a;
        let d = -2.0 * s;
        let row = &jm[a * n..(a + 1) * n];
        for (hb, j) in h.iter_mut().zip(row) {
            *hb += d * j;
        }
    }
    acc
}

/// Outcome of an exact computation.
#[derive(Clone, Debug)]
pub struct ExactResult {
    pub log_partition: f64,
    pub magnetization: BTreeMap<i64, f64>,
    pub volume: Volume,
    pub bc: String,
    pub model: CouplingModel,
    pub wall_time: Duration,
}

impl ExactResult {
    pub fn to_json(&self) -> Value {
        let mags: serde_json::Map<String, Value> =
            self.magnetization.iter().map(|(i, m)| (i.to_string(), json!(m))).collect();
        json!({
            "volume": { "lo": self.volume.lo(), "hi": self.volume.hi() },
            "bc": self.bc,
            "model": { "alpha": self.model.alpha, "beta": self.model.beta, "j1": self.model.j1 },
            "log_partition": self.log_partition,
            "magnetization": mags,
            "wall_time_seconds": self.wall_time.as_secs_f64(),
        })
    }
}

pub fn exact_gibbs(
    volume: Volume,
    bc: &BoundaryCondition,
    model: &CouplingModel,
    constraint: Option<&Constraint>,
) -> Result<ExactResult> {
    ExactEngine::default().gibbs(volume, bc, model, constraint)
}

pub fn exact_conditional_magnetization(
    volume: Volume,
    bc: &BoundaryCondition,
    model: &CouplingModel,
    constraint: &Constraint,
    site: i64,
) -> Result<f64> {
    ExactEngine::default().conditional_magnetization(volume, bc, model, constraint, site)
}

pub fn nested_volume_bracket(
    site: i64,
    volumes: &[Volume],
    bc: &BoundaryCondition,
    model: &CouplingModel,
    constraint: Option<&Constraint>,
) -> Result<Vec<f64>> {
    ExactEngine::default().nested_volume_bracket(site, volumes, bc, model, constraint)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::lattice::{boundary_field, energy, SpinConfig};

    fn brute_magnetization(
        volume: Volume,
        bc: &BoundaryCondition,
        model: &CouplingModel,
    ) -> (f64, Vec<f64>) {
        // plain sum of exp(-beta E), no shifts
        let n = volume.len();
        let mut z = 0.0;
        let mut m = vec![0.0; n];
        for code in 0u32..(1 << n) {
            let signs: Vec<i64> = (0..n).map(|b| if code >> b & 1 == 1 { 1 } else { -1 }).collect();
            let c = SpinConfig::from_signs(volume, &signs).unwrap();
            let w = (-model.beta * energy(&c, bc, model).unwrap()).exp();
            z += w;
            for (acc, s) in m.iter_mut().zip(&signs) {
                *acc += w * *s as f64;
            }
        }
        (z.ln(), m.into_iter().map(|x| x / z).collect())
    }

    #[test]
    fn matches_brute_force() {
        let v = Volume::new(-2, 3).unwrap();
        let m = CouplingModel::new(1.6, 0.8, 1.5).unwrap();
        for bc in [
            BoundaryCondition::plus(30).unwrap(),
            BoundaryCondition::dobrushin_minus_plus(30).unwrap(),
            BoundaryCondition::free(),
        ] {
            let r = exact_gibbs(v, &bc, &m, None).unwrap();
            let (lz, mags) = brute_magnetization(v, &bc, &m);
            assert!((r.log_partition - lz).abs() < 1e-10);
            for (k, want) in mags.iter().enumerate() {
                assert!((r.magnetization[&v.site_at(k)] - want).abs() < 1e-12);
            }
        }
    }

    #[test]
    fn infinite_temperature() {
        let v = Volume::new(0, 6).unwrap();
        let m = CouplingModel::power_law(1.5, 0.0).unwrap();
        let r = exact_gibbs(v, &BoundaryCondition::free(), &m, None).unwrap();
        assert!((r.log_partition - 7.0 * 2f64.ln()).abs() < 1e-12);
        assert!(r.magnetization.values().all(|x| x.abs() < 1e-15));
    }

    #[test]
    fn single_site_closed_form() {
        let v = Volume::new(0, 0).unwrap();
        let m = CouplingModel::power_law(2.0, 1.0).unwrap();
        let bc = BoundaryCondition::plus(1000).unwrap();
        let h = boundary_field(0, &v, &bc, &m).unwrap();
        let r = exact_gibbs(v, &bc, &m, None).unwrap();
        assert!((r.magnetization[&0] - h.tanh()).abs() < 1e-12);
    }

    #[test]
    fn large_beta_does_not_overflow() {
        let v = Volume::new(-4, 4).unwrap();
        let m = CouplingModel::new(1.5, 200.0, 3.0).unwrap();
        let r = exact_gibbs(v, &BoundaryCondition::plus(100).unwrap(), &m, None).unwrap();
        assert!(r.log_partition.is_finite());
        assert!(r.magnetization.values().all(|x| (x - 1.0).abs() < 1e-12));
    }

    #[test]
    fn constraint_and_cap() {
        let v = Volume::new(0, 4).unwrap();
        let m = CouplingModel::power_law(1.5, 1.0).unwrap();
        let bc = BoundaryCondition::plus(10).unwrap();
        let c = Constraint::new().freeze(2, Spin::Down);
        let r = exact_gibbs(v, &bc, &m, Some(&c)).unwrap();
        assert_eq!(r.magnetization[&2], -1.0);
        assert!(matches!(
            exact_conditional_magnetization(v, &bc, &m, &c, 2),
            Err(Error::SiteFrozen(2))
        ));
        let engine = ExactEngine { cap: 3 };
        assert!(matches!(engine.gibbs(v, &bc, &m, None), Err(Error::CapExceeded { free: 5, cap: 3 })));
        assert!(engine.gibbs(v, &bc, &m, Some(&c.clone().freeze(0, Spin::Up))).is_ok());
    }

    #[test]
    fn nested_checks_order() {
        let m = CouplingModel::power_law(1.5, 1.0).unwrap();
        let bc = BoundaryCondition::plus(50).unwrap();
        let vs = [Volume::new(-2, 2).unwrap(), Volume::new(-1, 1).unwrap()];
        assert!(matches!(nested_volume_bracket(0, &vs, &bc, &m, None), Err(Error::NotNested { index: 1 })));
    }

    #[test]
    fn json_summary_fields() {
        let v = Volume::new(0, 1).unwrap();
        let m = CouplingModel::power_law(1.5, 1.0).unwrap();
        let j = exact_gibbs(v, &BoundaryCondition::free(), &m, None).unwrap().to_json();
        for key in ["volume", "bc", "model", "log_partition", "magnetization", "wall_time_seconds"] {
            assert!(j.get(key).is_some(), "{key}");
        }
    }
}
