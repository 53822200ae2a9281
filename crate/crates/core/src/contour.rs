//! Spin-flip points, triangle matching and interface-point statistics.
//!
//! Flip points sit on the dual lattice (half-integers) and are stored doubled.
//! Triangles are built by repeatedly pairing the two currently adjacent flip
//! points with the smallest perturbed distance. Bases are perturbed as
//!
//! ```text
//! r_k = x_k + 2^-(k+1) / 100        (k = left-to-right rank)
//! ```
//!
//! which keeps every base within `1/100` of its site and makes all pairwise
//! distances distinct. Among pairs with equal raw gap the one with the
//! smaller left rank is strictly closer, so the matching only needs the
//! exact key `(gap, left rank)` and never compares floats.

use std::cmp::Reverse;
use std::collections::BinaryHeap;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::exact::{ExactEngine, Observer, State};
use crate::lattice::{BoundaryCondition, CouplingModel, Spin, SpinConfig, Volume};
use crate::mc::{run_chains, ChainObserver, Estimate, McParams};
use crate::system::PreparedSystem;

const PERTURBATION_SCALE: f64 = 0.01;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct FlipPoint {
    /// Twice the dual-lattice position; always odd.
    pub twice: i64,
    /// Left-to-right rank among the flips of the configuration.
    pub rank: usize,
}

impl FlipPoint {
    pub fn position(&self) -> f64 {
        self.twice as f64 / 2.0
    }

    /// Perturbed base `r`; informational, matching uses exact keys.
    pub fn perturbed_base(&self) -> f64 {
        self.position() + PERTURBATION_SCALE * 0.5f64.powi(self.rank as i32 + 1)
    }
}

/// Flip points of `config` under `bc`, left to right. The edges of the volume
/// count when the boundary supplies an exterior spin there.
pub fn spin_flip_points(config: &SpinConfig, bc: &BoundaryCondition) -> Vec<FlipPoint> {
    let v = config.volume();
    let mut out = Vec::new();
    let mut prev = bc.exterior_spin(&v, v.lo() - 1);
    let push = |out: &mut Vec<FlipPoint>, twice: i64| {
        let rank = out.len();
        out.push(FlipPoint { twice, rank });
    };
    for (i, &s) in v.sites().zip(config.spins()) {
        if prev.is_some_and(|p| p != s) {
            push(&mut out, 2 * i - 1);
        }
        prev = Some(s);
    }
    if let (Some(p), Some(r)) = (prev, bc.exterior_spin(&v, v.hi() + 1)) {
        if p != r {
            push(&mut out, 2 * v.hi() + 1);
        }
    }
    out
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct TriangleDiagram {
    /// `(left, right)` pairs in the order they were matched.
    pub triangles: Vec<(FlipPoint, FlipPoint)>,
    pub interface: Option<FlipPoint>,
}

impl TriangleDiagram {
    /// Any two triangles are nested or disjoint.
    pub fn is_non_crossing(&self) -> bool {
        let t = &self.triangles;
        for (i, a) in t.iter().enumerate() {
            for b in &t[i + 1..] {
                let (a0, a1, b0, b1) = (a.0.twice, a.1.twice, b.0.twice, b.1.twice);
                let crossing = (a0 < b0 && b0 < a1 && a1 < b1) || (b0 < a0 && a0 < b1 && b1 < a1);
                if crossing {
                    return false;
                }
            }
        }
        true
    }

    pub fn flip_count(&self) -> usize {
        2 * self.triangles.len() + usize::from(self.interface.is_some())
    }
}

/// Nearest-pair matching, `O(m log m)`.
pub fn build_triangles(flips: &[FlipPoint]) -> Result<TriangleDiagram> {
    for (i, w) in flips.windows(2).enumerate() {
        if w[1].twice <= w[0].twice {
            return Err(Error::UnorderedFlips { index: i + 1 });
        }
    }
    let m = flips.len();
    let none = usize::MAX;
    let mut prev: Vec<usize> = (0..m).map(|k| if k == 0 { none } else { k - 1 }).collect();
    let mut next: Vec<usize> = (0..m).map(|k| if k + 1 == m { none } else { k + 1 }).collect();
    let mut alive = vec![true; m];
    let mut heap = BinaryHeap::with_capacity(m);
    for k in 1..m {
        heap.push(Reverse((flips[k].twice - flips[k - 1].twice, k - 1, k)));
    }
    let mut triangles = Vec::with_capacity(m / 2);
    while let Some(Reverse((_, a, b))) = heap.pop() {
        if !alive[a] || !alive[b] || next[a] != b {
            continue;
        }
        alive[a] = false;
        alive[b] = false;
        triangles.push((flips[a], flips[b]));
        let (p, n) = (prev[a], next[b]);
        if p != none {
            next[p] = n;
        }
        if n != none {
            prev[n] = p;
        }
        if p != none && n != none {
            heap.push(Reverse((flips[n].twice - flips[p].twice, p, n)));
        }
    }
    let interface = (0..m).find(|&k| alive[k]).map(|k| flips[k]);
    Ok(TriangleDiagram { triangles, interface })
}

pub fn triangle_diagram(config: &SpinConfig, bc: &BoundaryCondition) -> TriangleDiagram {
    build_triangles(&spin_flip_points(config, bc)).expect("flip points are ordered")
}

/// Unpaired flip point under a Dobrushin boundary.
pub fn interface_point(config: &SpinConfig, bc: &BoundaryCondition) -> Result<f64> {
    if !bc.is_dobrushin() {
        return Err(Error::NotDobrushin);
    }
    Ok(interface_twice(config.volume(), config.spins(), bc).expect("odd flip count") as f64 / 2.0)
}

fn interface_twice(volume: Volume, spins: &[Spin], bc: &BoundaryCondition) -> Option<i64> {
    let config = SpinConfig::new(volume, spins.to_vec()).ok()?;
    triangle_diagram(&config, bc).interface.map(|f| f.twice)
}

/// Admissible interface locations `theta` for a volume of `2L + 1` sites:
/// odd multiples of `1/(2L)` from `-1 - 1/(2L)` to `1 + 1/(2L)`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct ThetaGrid {
    pub l: u64,
}

impl ThetaGrid {
    pub fn new(l: u64) -> Result<Self> {
        if l == 0 {
            return Err(Error::params("L must be positive"));
        }
        Ok(ThetaGrid { l })
    }

    /// Grid for an odd-length volume, centred on its middle site.
    pub fn for_volume(volume: &Volume) -> Result<Self> {
        if volume.len() % 2 == 0 || volume.len() < 3 {
            return Err(Error::params(format!("interface grid needs an odd volume of at least 3 sites, got {volume}")));
        }
        ThetaGrid::new((volume.len() as u64 - 1) / 2)
    }

    pub fn len(&self) -> usize {
        2 * self.l as usize + 2
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn value(&self, index: usize) -> f64 {
        let odd = 2 * index as i64 - 2 * self.l as i64 - 1;
        odd as f64 / (2 * self.l) as f64
    }

    pub fn values(&self) -> Vec<f64> {
        (0..self.len()).map(|k| self.value(k)).collect()
    }

    /// Bin of a doubled offset `d = 2 (I* - centre)`, clamped to the grid.
    pub fn index_of_twice_offset(&self, d: i64) -> usize {
        let l = self.l as i64;
        let k = (d - 1).div_euclid(2) + l + 1;
        k.clamp(0, 2 * l + 1) as usize
    }

    /// Nearest grid index to `theta`.
    pub fn nearest(&self, theta: f64) -> usize {
        (0..self.len())
            .min_by(|&a, &b| (self.value(a) - theta).abs().total_cmp(&(self.value(b) - theta).abs()))
            .expect("grid is non-empty")
    }
}

/// Probability of each grid point, with optional per-bin error bars.
#[derive(Clone, Debug)]
pub struct InterfaceHistogram {
    pub grid: ThetaGrid,
    pub probabilities: Vec<f64>,
    /// Per-bin standard errors across chains (MC only).
    pub std_errors: Option<Vec<f64>>,
    /// Raw counts (MC only).
    pub counts: Option<Vec<u64>>,
}

impl InterfaceHistogram {
    /// `P(|I*| > eps L)`, i.e. mass on `|theta| > eps`.
    pub fn escape_probability(&self, eps: f64) -> f64 {
        (0..self.grid.len())
            .filter(|&k| self.grid.value(k).abs() > eps + 1e-12)
            .map(|k| self.probabilities[k])
            .sum()
    }

    pub fn mode(&self) -> usize {
        (0..self.grid.len())
            .max_by(|&a, &b| self.probabilities[a].total_cmp(&self.probabilities[b]).then(b.cmp(&a)))
            .expect("grid is non-empty")
    }
}

/// Histogram plus per-bin conditional magnetization profiles.
#[derive(Clone, Debug)]
pub struct InterfaceAnalysis {
    pub volume: Volume,
    pub histogram: InterfaceHistogram,
    /// `profiles[bin][site index]`; `None` where the bin is empty.
    pub profiles: Vec<Option<Vec<f64>>>,
    /// Unconditional magnetization per site index.
    pub magnetization: Vec<f64>,
}

impl InterfaceAnalysis {
    /// `<s_i | I* = theta L>` with `theta` snapped to the grid.
    pub fn conditional_profile(&self, theta: f64) -> Result<&[f64]> {
        let k = self.histogram.grid.nearest(theta);
        self.profiles[k]
            .as_deref()
            .ok_or(Error::EmptyConditioningClass { theta: self.histogram.grid.value(k) })
    }
}

#[derive(Clone, Copy, Debug)]
pub enum Engine {
    Exact(ExactEngine),
    Mc(McParams),
}

impl Engine {
    pub fn exact() -> Self {
        Engine::Exact(ExactEngine::default())
    }

    pub fn name(&self) -> &'static str {
        match self {
            Engine::Exact(_) => "exact",
            Engine::Mc(_) => "mc",
        }
    }
}

struct Binner<'a> {
    volume: Volume,
    bc: &'a BoundaryCondition,
    grid: ThetaGrid,
    centre2: i64,
    bins: Vec<f64>,
    sums: Vec<Vec<f64>>,
}

impl<'a> Binner<'a> {
    fn new(volume: Volume, bc: &'a BoundaryCondition, grid: ThetaGrid) -> Self {
        Binner {
            volume,
            bc,
            grid,
            centre2: volume.lo() + volume.hi(),
            bins: vec![0.0; grid.len()],
            sums: vec![vec![0.0; volume.len()]; grid.len()],
        }
    }

    fn bin(&self, spins: &[Spin]) -> usize {
        let t = interface_twice(self.volume, spins, self.bc).expect("Dobrushin boundary");
        self.grid.index_of_twice_offset(t - self.centre2)
    }

    fn add(&mut self, spins: &[Spin], w: f64) {
        let k = self.bin(spins);
        self.bins[k] += w;
        for (acc, s) in self.sums[k].iter_mut().zip(spins) {
            *acc += w * s.value();
        }
    }
}

impl Observer for Binner<'_> {
    fn observe(&mut self, state: &State<'_>, weight: f64) {
        self.add(state.spins, weight);
    }

    fn scale(&mut self, factor: f64) {
        self.bins.iter_mut().for_each(|b| *b *= factor);
        self.sums.iter_mut().flatten().for_each(|s| *s *= factor);
    }

    fn merge(&mut self, other: Self) {
        for (a, b) in self.bins.iter_mut().zip(other.bins) {
            *a += b;
        }
        for (a, b) in self.sums.iter_mut().flatten().zip(other.sums.into_iter().flatten()) {
            *a += b;
        }
    }
}

impl ChainObserver for Binner<'_> {
    fn record(&mut self, spins: &[Spin]) {
        self.add(spins, 1.0);
    }
}

/// Interface histogram and conditional profiles on an odd-length volume
/// under a Dobrushin boundary.
pub fn interface_analysis(
    volume: Volume,
    model: &CouplingModel,
    bc: &BoundaryCondition,
    engine: &Engine,
) -> Result<InterfaceAnalysis> {
    if !bc.is_dobrushin() {
        return Err(Error::NotDobrushin);
    }
    let grid = ThetaGrid::for_volume(&volume)?;
    let sys = PreparedSystem::new(volume, bc, model, None)?;
    let (total, binner, std_errors, counts) = match engine {
        Engine::Exact(ex) => {
            let e = ex.enumerate(&sys, || Binner::new(volume, bc, grid))?;
            (e.total, e.observer, None, None)
        }
        Engine::Mc(params) => {
            let per_chain = run_chains(&sys, params, |_| Binner::new(volume, bc, grid))?;
            let n = params.samples_per_chain();
            let mut errs = vec![0.0; grid.len()];
            if per_chain.len() > 1 {
                for (k, e) in errs.iter_mut().enumerate() {
                    let means: Vec<f64> = per_chain.iter().map(|b| b.bins[k] / n as f64).collect();
                    *e = Estimate::from_chain_means(&means, n).std_error;
                }
            }
            let mut it = per_chain.into_iter();
            let mut acc = it.next().expect("at least one chain");
            for b in it {
                Observer::merge(&mut acc, b);
            }
            let counts = acc.bins.iter().map(|&c| c as u64).collect();
            (acc.bins.iter().sum::<f64>(), acc, Some(errs), Some(counts))
        }
    };
    let probabilities: Vec<f64> = binner.bins.iter().map(|b| b / total).collect();
    let mut magnetization = vec![0.0; volume.len()];
    let profiles = binner
        .bins
        .iter()
        .zip(&binner.sums)
        .map(|(&w, sums)| {
            for (m, s) in magnetization.iter_mut().zip(sums) {
                *m += s / total;
            }
            (w > 0.0).then(|| sums.iter().map(|s| s / w).collect())
        })
        .collect();
    Ok(InterfaceAnalysis {
        volume,
        histogram: InterfaceHistogram { grid, probabilities, std_errors, counts },
        profiles,
        magnetization,
    })
}

pub fn interface_histogram(
    volume: Volume,
    model: &CouplingModel,
    bc: &BoundaryCondition,
    engine: &Engine,
) -> Result<InterfaceHistogram> {
    Ok(interface_analysis(volume, model, bc, engine)?.histogram)
}

/// `<s_i | I* = theta L>` per site of the volume.
pub fn conditional_profile(
    volume: Volume,
    model: &CouplingModel,
    bc: &BoundaryCondition,
    theta: f64,
    engine: &Engine,
) -> Result<Vec<(i64, f64)>> {
    let a = interface_analysis(volume, model, bc, engine)?;
    let p = a.conditional_profile(theta)?;
    Ok(volume.sites().zip(p.iter().copied()).collect())
}
