//! Single-site Metropolis sampling with maintained local fields.
//!
//! Every chain owns a ChaCha8 stream selected by its index, so chains are
//! independent of scheduling. Chains run in parallel and are reduced in index
//! order.

use std::collections::BTreeMap;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::lattice::{BoundaryCondition, BoundaryKind, CouplingModel, Spin, SpinConfig, Volume};
use crate::system::{Constraint, PreparedSystem};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct McParams {
    pub sweeps: u64,
    pub burnin: u64,
    pub chains: usize,
    pub seed: u64,
    pub thin: u64,
}

impl McParams {
    pub fn new(sweeps: u64, burnin: u64, chains: usize, seed: u64) -> Self {
        McParams { sweeps, burnin, chains, seed, thin: 1 }
    }

    pub fn with_thin(mut self, thin: u64) -> Self {
        self.thin = thin;
        self
    }

    pub fn validate(&self) -> Result<()> {
        if self.sweeps <= self.burnin {
            return Err(Error::params(format!(
                "sweeps ({}) must exceed burnin ({})",
                self.sweeps, self.burnin
            )));
        }
        if self.chains == 0 {
            return Err(Error::params("chains must be at least 1"));
        }
        if self.thin == 0 {
            return Err(Error::params("thin must be at least 1"));
        }
        Ok(())
    }

    /// Recorded configurations per chain.
    pub fn samples_per_chain(&self) -> u64 {
        (self.sweeps - self.burnin) / self.thin
    }
}

/// Mean with its standard error.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Estimate {
    pub mean: f64,
    pub std_error: f64,
    pub n_samples: u64,
}

impl Estimate {
    /// Mean of per-chain means, error from their spread.
    pub fn from_chain_means(means: &[f64], samples_per_chain: u64) -> Self {
        let k = means.len() as f64;
        let mean = means.iter().sum::<f64>() / k;
        let std_error = if means.len() > 1 {
            let var = means.iter().map(|m| (m - mean).powi(2)).sum::<f64>() / (k - 1.0);
            (var / k).sqrt()
        } else {
            0.0
        };
        Estimate { mean, std_error, n_samples: samples_per_chain * means.len() as u64 }
    }

    /// `|mean - target| <= k * std_error`.
    pub fn within(&self, target: f64, k: f64) -> bool {
        (self.mean - target).abs() <= k * self.std_error
    }
}

/// Receives each recorded configuration of one chain.
pub trait ChainObserver: Send {
    fn record(&mut self, spins: &[Spin]);
}

/// Per-site spin sums.
#[derive(Clone, Debug)]
pub struct SpinTotals {
    pub sums: Vec<f64>,
    pub count: u64,
}

impl SpinTotals {
    pub fn new(len: usize) -> Self {
        SpinTotals { sums: vec![0.0; len], count: 0 }
    }
}

impl ChainObserver for SpinTotals {
    fn record(&mut self, spins: &[Spin]) {
        for (acc, s) in self.sums.iter_mut().zip(spins) {
            *acc += s.value();
        }
        self.count += 1;
    }
}

/// Counts of each free-site configuration, keyed by the same code the exact
/// engine uses.
#[derive(Clone, Debug)]
pub struct CodeCounts {
    free: Vec<usize>,
    pub counts: Vec<u64>,
}

impl CodeCounts {
    pub fn new(sys: &PreparedSystem) -> Self {
        CodeCounts { free: sys.free_indices().to_vec(), counts: vec![0; 1 << sys.n_free()] }
    }
}

impl ChainObserver for CodeCounts {
    fn record(&mut self, spins: &[Spin]) {
        let code = self
            .free
            .iter()
            .enumerate()
            .fold(0usize, |c, (a, &k)| if spins[k] == Spin::Up { c | 1 << a } else { c });
        self.counts[code] += 1;
    }
}

/// One Metropolis chain on a prepared system.
pub struct Chain<'a> {
    sys: &'a PreparedSystem,
    rng: ChaCha8Rng,
    free: Vec<Spin>,
    full: Vec<Spin>,
    fields: Vec<f64>,
    positions: Vec<usize>,
    sweep: u64,
}

impl<'a> Chain<'a> {
    pub fn new(sys: &'a PreparedSystem, seed: u64, index: usize) -> Self {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        rng.set_stream(index as u64);
        let free = initial_state(sys, &mut rng);
        let mut full = sys.template().to_vec();
        sys.fill(&free, &mut full);
        let fields = sys.local_fields(&free);
        Chain { sys, rng, free, full, fields, positions: sys.free_indices().to_vec(), sweep: 0 }
    }

    /// Full-volume spins.
    pub fn spins(&self) -> &[Spin] {
        &self.full
    }

    pub fn sweeps_done(&self) -> u64 {
        self.sweep
    }

    /// `n_free` random-site Metropolis proposals.
    pub fn sweep(&mut self) {
        let n = self.free.len();
        let beta = self.sys.beta();
        let table = self.sys.coupling_table();
        for _ in 0..n {
            let a = self.rng.random_range(0..n);
            let s = self.free[a].value();
            let de = 2.0 * s * self.fields[a];
            let accept = de <= 0.0 || self.rng.random::<f64>() < (-beta * de).exp();
            if accept {
                let flipped = self.free[a].flip();
                self.free[a] = flipped;
                self.full[self.positions[a]] = flipped;
                let d = -2.0 * s;
                let pa = self.positions[a];
                for (b, hb) in self.fields.iter_mut().enumerate() {
                    if b != a {
                        *hb += d * table[pa.abs_diff(self.positions[b])];
                    }
                }
            }
        }
        self.sweep += 1;
    }

    /// Runs the chain's schedule, handing recorded configurations to `obs`.
    pub fn run<O: ChainObserver>(&mut self, params: &McParams, obs: &mut O) {
        while self.sweep < params.sweeps {
            self.sweep();
            if is_recorded(self.sweep, params) {
                obs.record(&self.full);
            }
        }
    }
}

fn is_recorded(t: u64, p: &McParams) -> bool {
    t > p.burnin && (t - p.burnin) % p.thin == 0
}

/// Starting configuration aligned with the boundary: all up under plus,
/// all down under minus, a step at the volume centre under Dobrushin, the
/// majority exterior sign under a frozen pattern, and independent fair coins
/// under free boundaries (no phase to favour).
fn initial_state(sys: &PreparedSystem, rng: &mut ChaCha8Rng) -> Vec<Spin> {
    let v = sys.volume();
    let mid = v.lo() + (v.hi() - v.lo()) / 2;
    let uniform = |s: Spin| vec![s; sys.n_free()];
    match sys.boundary().kind() {
        BoundaryKind::Plus => uniform(Spin::Up),
        BoundaryKind::Minus => uniform(Spin::Down),
        BoundaryKind::Free => (0..sys.n_free()).map(|_| if rng.random::<bool>() { Spin::Up } else { Spin::Down }).collect(),
        BoundaryKind::DobrushinMinusPlus => {
            sys.free_sites().map(|i| if i < mid { Spin::Down } else { Spin::Up }).collect()
        }
        BoundaryKind::DobrushinPlusMinus => {
            sys.free_sites().map(|i| if i < mid { Spin::Up } else { Spin::Down }).collect()
        }
        BoundaryKind::Frozen(w) => {
            let net: f64 =
                w.volume().sites().zip(w.spins()).filter(|(i, _)| !v.contains(*i)).map(|(_, s)| s.value()).sum();
            uniform(if net >= 0.0 { Spin::Up } else { Spin::Down })
        }
    }
}

/// Runs every chain in parallel; observers come back in chain order.
pub fn run_chains<O, F>(sys: &PreparedSystem, params: &McParams, make: F) -> Result<Vec<O>>
where
    O: ChainObserver,
    F: Fn(usize) -> O + Sync,
{
    params.validate()?;
    Ok((0..params.chains)
        .into_par_iter()
        .map(|c| {
            let mut chain = Chain::new(sys, params.seed, c);
            let mut obs = make(c);
            chain.run(params, &mut obs);
            obs
        })
        .collect())
}

/// Per-site estimates; needs at least two chains for error bars.
pub fn mc_magnetization(
    volume: Volume,
    bc: &BoundaryCondition,
    model: &CouplingModel,
    constraint: Option<&Constraint>,
    sites: &[i64],
    params: &McParams,
) -> Result<BTreeMap<i64, Estimate>> {
    if params.chains < 2 {
        return Err(Error::params("error bars need at least 2 chains"));
    }
    for &s in sites {
        volume.check_site(s)?;
    }
    let sys = PreparedSystem::new(volume, bc, model, constraint)?;
    magnetization_on(&sys, sites, params)
}

/// As [`mc_magnetization`] on an already prepared system.
pub fn magnetization_on(sys: &PreparedSystem, sites: &[i64], params: &McParams) -> Result<BTreeMap<i64, Estimate>> {
    let v = sys.volume();
    let totals = run_chains(sys, params, |_| SpinTotals::new(v.len()))?;
    let per = params.samples_per_chain();
    let mut out = BTreeMap::new();
    for &site in sites {
        let k = v.check_site(site)?;
        let means: Vec<f64> = totals.iter().map(|t| t.sums[k] / t.count as f64).collect();
        out.insert(site, Estimate::from_chain_means(&means, per));
    }
    Ok(out)
}

/// Lazily generated recorded configurations, chain after chain.
pub struct SampleStream {
    sys: PreparedSystem,
    params: McParams,
    chain_index: usize,
    // the chain borrows `sys`; kept as raw state to avoid a self-referential
    // struct
    state: Option<StreamState>,
}

struct StreamState {
    rng: ChaCha8Rng,
    free: Vec<Spin>,
    fields: Vec<f64>,
    sweep: u64,
}

impl SampleStream {
    fn start_chain(&self, index: usize) -> StreamState {
        let c = Chain::new(&self.sys, self.params.seed, index);
        StreamState { rng: c.rng, free: c.free, fields: c.fields, sweep: 0 }
    }
}

impl Iterator for SampleStream {
    type Item = SpinConfig;

    fn next(&mut self) -> Option<SpinConfig> {
        loop {
            if self.chain_index >= self.params.chains {
                return None;
            }
            let st = match self.state.take() {
                Some(st) => st,
                None => self.start_chain(self.chain_index),
            };
            let mut chain = Chain {
                sys: &self.sys,
                rng: st.rng,
                full: {
                    let mut f = self.sys.template().to_vec();
                    self.sys.fill(&st.free, &mut f);
                    f
                },
                free: st.free,
                fields: st.fields,
                positions: self.sys.free_indices().to_vec(),
                sweep: st.sweep,
            };
            while chain.sweep < self.params.sweeps {
                chain.sweep();
                if is_recorded(chain.sweep, &self.params) {
                    let out = SpinConfig::new(self.sys.volume(), chain.full.clone()).expect("volume");
                    self.state =
                        Some(StreamState { rng: chain.rng, free: chain.free, fields: chain.fields, sweep: chain.sweep });
                    return Some(out);
                }
            }
            self.chain_index += 1;
        }
    }
}

pub fn mc_sample_stream(
    volume: Volume,
    bc: &BoundaryCondition,
    model: &CouplingModel,
    constraint: Option<&Constraint>,
    params: &McParams,
) -> Result<SampleStream> {
    params.validate()?;
    let sys = PreparedSystem::new(volume, bc, model, constraint)?;
    Ok(SampleStream { sys, params: *params, chain_index: 0, state: None })
}
