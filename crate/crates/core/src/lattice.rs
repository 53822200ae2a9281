//! Configurations, volumes, couplings, boundary conditions and energy
//! arithmetic for the Dyson Hamiltonian
//!
//! ```text
//! H(s | bc) = - sum_{ {i,j}, i in V } J(|i-j|) s_i s_j
//! ```
//!
//! Pairs are unordered and counted once. The second index runs over the
//! volume and over exterior sites within the boundary cutoff of the first
//! index. `J(1) = j1` and `J(d) = d^-alpha` otherwise.

use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::series;

/// Largest volume accepted anywhere in the crate.
pub const MAX_VOLUME_SITES: usize = 1 << 20;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum Spin {
    Down,
    Up,
}

impl Spin {
    #[inline]
    pub fn value(self) -> f64 {
        match self {
            Spin::Down => -1.0,
            Spin::Up => 1.0,
        }
    }

    #[inline]
    pub fn sign(self) -> i8 {
        match self {
            Spin::Down => -1,
            Spin::Up => 1,
        }
    }

    #[inline]
    pub fn flip(self) -> Spin {
        match self {
            Spin::Down => Spin::Up,
            Spin::Up => Spin::Down,
        }
    }

    pub fn from_sign(v: i64) -> Result<Spin> {
        match v {
            -1 => Ok(Spin::Down),
            1 => Ok(Spin::Up),
            other => Err(Error::InvalidSpin(other)),
        }
    }

    /// `Up` for even sites, `Down` for odd ones: `(-1)^i`.
    pub fn alternating(site: i64) -> Spin {
        if site.rem_euclid(2) == 0 {
            Spin::Up
        } else {
            Spin::Down
        }
    }
}

impl fmt::Display for Spin {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Spin::Down => "-",
            Spin::Up => "+",
        })
    }
}

/// Closed integer interval `[lo, hi]`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct Volume {
    lo: i64,
    hi: i64,
}

impl Volume {
    pub fn new(lo: i64, hi: i64) -> Result<Self> {
        if lo > hi {
            return Err(Error::InvalidVolume { lo, hi, reason: "lo exceeds hi" });
        }
        if (hi - lo) as u64 >= MAX_VOLUME_SITES as u64 {
            return Err(Error::InvalidVolume { lo, hi, reason: "more than 2^20 sites" });
        }
        Ok(Volume { lo, hi })
    }

    /// `[-l, l]`.
    pub fn centered(l: i64) -> Result<Self> {
        Volume::new(-l, l)
    }

    pub fn lo(&self) -> i64 {
        self.lo
    }

    pub fn hi(&self) -> i64 {
        self.hi
    }

    pub fn len(&self) -> usize {
        (self.hi - self.lo + 1) as usize
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn contains(&self, site: i64) -> bool {
        site >= self.lo && site <= self.hi
    }

    pub fn contains_volume(&self, other: &Volume) -> bool {
        self.lo <= other.lo && other.hi <= self.hi
    }

    pub fn index_of(&self, site: i64) -> Option<usize> {
        self.contains(site).then(|| (site - self.lo) as usize)
    }

    pub fn site_at(&self, index: usize) -> i64 {
        self.lo + index as i64
    }

    pub fn sites(&self) -> impl DoubleEndedIterator<Item = i64> + Clone {
        self.lo..=self.hi
    }

    pub(crate) fn check_site(&self, site: i64) -> Result<usize> {
        self.index_of(site).ok_or(Error::SiteOutsideVolume {
            site,
            lo: self.lo,
            hi: self.hi,
        })
    }
}

impl fmt::Display for Volume {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "[{}, {}]", self.lo, self.hi)
    }
}

/// Spins on a finite window.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct SpinConfig {
    volume: Volume,
    spins: Vec<Spin>,
}

impl SpinConfig {
    pub fn new(volume: Volume, spins: Vec<Spin>) -> Result<Self> {
        if spins.len() != volume.len() {
            return Err(Error::LengthMismatch { expected: volume.len(), got: spins.len() });
        }
        Ok(SpinConfig { volume, spins })
    }

    pub fn from_signs(volume: Volume, signs: &[i64]) -> Result<Self> {
        let spins = signs.iter().map(|&s| Spin::from_sign(s)).collect::<Result<Vec<_>>>()?;
        SpinConfig::new(volume, spins)
    }

    pub fn uniform(volume: Volume, spin: Spin) -> Self {
        SpinConfig { volume, spins: vec![spin; volume.len()] }
    }

    /// `(omega_alt)_i = (-1)^i` restricted to `volume`.
    pub fn alternating(volume: Volume) -> Self {
        SpinConfig { volume, spins: volume.sites().map(Spin::alternating).collect() }
    }

    pub fn volume(&self) -> Volume {
        self.volume
    }

    pub fn spins(&self) -> &[Spin] {
        &self.spins
    }

    pub fn get(&self, site: i64) -> Option<Spin> {
        self.volume.index_of(site).map(|i| self.spins[i])
    }

    pub fn set(&mut self, site: i64, spin: Spin) -> Result<()> {
        let i = self.volume.check_site(site)?;
        self.spins[i] = spin;
        Ok(())
    }

    pub fn flip(&mut self, site: i64) -> Result<()> {
        let i = self.volume.check_site(site)?;
        self.spins[i] = self.spins[i].flip();
        Ok(())
    }

    pub fn flipped_at(&self, site: i64) -> Result<Self> {
        let mut out = self.clone();
        out.flip(site)?;
        Ok(out)
    }

    /// Global spin flip.
    pub fn negated(&self) -> Self {
        SpinConfig { volume: self.volume, spins: self.spins.iter().map(|s| s.flip()).collect() }
    }

    /// Mirror image under `i -> -i`.
    pub fn reflected(&self) -> Self {
        let volume = Volume { lo: -self.volume.hi, hi: -self.volume.lo };
        SpinConfig { volume, spins: self.spins.iter().rev().copied().collect() }
    }

    pub fn magnetization(&self) -> f64 {
        self.spins.iter().map(|s| s.value()).sum::<f64>() / self.spins.len() as f64
    }
}

impl fmt::Display for SpinConfig {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}:", self.volume)?;
        for s in &self.spins {
            write!(f, "{s}")?;
        }
        Ok(())
    }
}

#[derive(Clone, Debug, PartialEq)]
pub enum BoundaryKind {
    Plus,
    Minus,
    Free,
    /// Minus to the left of the volume, plus to the right.
    DobrushinMinusPlus,
    /// Plus to the left of the volume, minus to the right.
    DobrushinPlusMinus,
    /// Explicit exterior spins. Entries of the window that fall inside the
    /// volume are ignored.
    Frozen(SpinConfig),
}

/// Exterior assignment plus the truncation radius of exterior sums.
///
/// With `tail_correction` on, each homogeneous exterior side adds the
/// continuum estimate `s * m^(1-alpha) / (alpha-1)` of the part beyond the
/// cutoff, where `m` is the larger of the cutoff and the last distance
/// covered. Frozen sides never get a correction.
#[derive(Clone, Debug, PartialEq)]
pub struct BoundaryCondition {
    kind: BoundaryKind,
    cutoff: u64,
    tail_correction: bool,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
enum Side {
    Left,
    Right,
}

enum SideSpins<'a> {
    Homogeneous(Spin),
    Empty,
    Pattern(&'a SpinConfig),
}

impl BoundaryCondition {
    pub fn new(kind: BoundaryKind, cutoff: u64) -> Result<Self> {
        if cutoff == 0 {
            return Err(Error::ZeroCutoff);
        }
        Ok(BoundaryCondition { kind, cutoff, tail_correction: false })
    }

    pub fn plus(cutoff: u64) -> Result<Self> {
        Self::new(BoundaryKind::Plus, cutoff)
    }

    pub fn minus(cutoff: u64) -> Result<Self> {
        Self::new(BoundaryKind::Minus, cutoff)
    }

    pub fn free() -> Self {
        BoundaryCondition { kind: BoundaryKind::Free, cutoff: 1, tail_correction: false }
    }

    pub fn dobrushin_minus_plus(cutoff: u64) -> Result<Self> {
        Self::new(BoundaryKind::DobrushinMinusPlus, cutoff)
    }

    pub fn dobrushin_plus_minus(cutoff: u64) -> Result<Self> {
        Self::new(BoundaryKind::DobrushinPlusMinus, cutoff)
    }

    pub fn frozen(window: SpinConfig, cutoff: u64) -> Result<Self> {
        Self::new(BoundaryKind::Frozen(window), cutoff)
    }

    pub fn with_tail_correction(mut self, on: bool) -> Self {
        self.tail_correction = on;
        self
    }

    pub fn kind(&self) -> &BoundaryKind {
        &self.kind
    }

    pub fn cutoff(&self) -> u64 {
        self.cutoff
    }

    pub fn tail_correction(&self) -> bool {
        self.tail_correction
    }

    pub fn is_dobrushin(&self) -> bool {
        matches!(self.kind, BoundaryKind::DobrushinMinusPlus | BoundaryKind::DobrushinPlusMinus)
    }

    /// Image under the global spin flip.
    pub fn flipped(&self) -> Self {
        let kind = match &self.kind {
            BoundaryKind::Plus => BoundaryKind::Minus,
            BoundaryKind::Minus => BoundaryKind::Plus,
            BoundaryKind::Free => BoundaryKind::Free,
            BoundaryKind::DobrushinMinusPlus => BoundaryKind::DobrushinPlusMinus,
            BoundaryKind::DobrushinPlusMinus => BoundaryKind::DobrushinMinusPlus,
            BoundaryKind::Frozen(w) => BoundaryKind::Frozen(w.negated()),
        };
        BoundaryCondition { kind, ..self.clone() }
    }

    /// Checks that the boundary is usable with `volume`: a frozen window must
    /// cover every exterior site within the cutoff.
    pub fn validate(&self, volume: &Volume) -> Result<()> {
        if self.cutoff == 0 {
            return Err(Error::ZeroCutoff);
        }
        if let BoundaryKind::Frozen(w) = &self.kind {
            let need_lo = volume.lo - self.cutoff as i64;
            let need_hi = volume.hi + self.cutoff as i64;
            if w.volume.lo > need_lo {
                return Err(Error::FrozenPatternGap { site: need_lo });
            }
            if w.volume.hi < need_hi {
                return Err(Error::FrozenPatternGap { site: need_hi });
            }
        }
        Ok(())
    }

    /// Spin of an exterior site, `None` for free boundaries and for sites
    /// inside the volume or outside a frozen window.
    pub fn exterior_spin(&self, volume: &Volume, site: i64) -> Option<Spin> {
        if volume.contains(site) {
            return None;
        }
        let side = if site < volume.lo { Side::Left } else { Side::Right };
        match self.side(side) {
            SideSpins::Homogeneous(s) => Some(s),
            SideSpins::Empty => None,
            SideSpins::Pattern(w) => w.get(site),
        }
    }

    fn side(&self, side: Side) -> SideSpins<'_> {
        use BoundaryKind::*;
        match (&self.kind, side) {
            (Plus, _) | (DobrushinMinusPlus, Side::Right) | (DobrushinPlusMinus, Side::Left) => {
                SideSpins::Homogeneous(Spin::Up)
            }
            (Minus, _) | (DobrushinMinusPlus, Side::Left) | (DobrushinPlusMinus, Side::Right) => {
                SideSpins::Homogeneous(Spin::Down)
            }
            (Free, _) => SideSpins::Empty,
            (Frozen(w), _) => SideSpins::Pattern(w),
        }
    }

    /// Field at `site` from one exterior side; `first` is the distance to the
    /// first exterior site on that side.
    fn side_field(&self, side: Side, site: i64, first: u64, model: &CouplingModel) -> f64 {
        let r = self.cutoff;
        match self.side(side) {
            SideSpins::Empty => 0.0,
            SideSpins::Homogeneous(s) => {
                let mut h = if first <= r { model.coupling_sum(first, r) } else { 0.0 };
                if self.tail_correction {
                    let m = r.max(first - 1) as f64;
                    h += series::integral_tail(model.alpha, m);
                }
                s.value() * h
            }
            SideSpins::Pattern(w) => {
                let mut h = 0.0;
                for d in first..=r {
                    let j = match side {
                        Side::Left => site - d as i64,
                        Side::Right => site + d as i64,
                    };
                    // validate() guarantees coverage
                    if let Some(s) = w.get(j) {
                        h += model.coupling(d) * s.value();
                    }
                }
                h
            }
        }
    }

    /// Exterior field `sum_{j exterior, |j-site| <= cutoff} J(site, j) s_j`,
    /// plus the tail correction when enabled.
    pub(crate) fn field_at(&self, volume: &Volume, site: i64, model: &CouplingModel) -> f64 {
        let left_first = (site - volume.lo + 1) as u64;
        let right_first = (volume.hi - site + 1) as u64;
        self.side_field(Side::Left, site, left_first, model)
            + self.side_field(Side::Right, site, right_first, model)
    }
}

impl fmt::Display for BoundaryCondition {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let kind = match &self.kind {
            BoundaryKind::Plus => "plus".to_string(),
            BoundaryKind::Minus => "minus".to_string(),
            BoundaryKind::Free => "free".to_string(),
            BoundaryKind::DobrushinMinusPlus => "dobrushin(-+)".to_string(),
            BoundaryKind::DobrushinPlusMinus => "dobrushin(+-)".to_string(),
            BoundaryKind::Frozen(w) => format!("frozen{}", w.volume),
        };
        write!(f, "{kind}, cutoff {}", self.cutoff)?;
        if self.tail_correction {
            f.write_str(", tail-corrected")?;
        }
        Ok(())
    }
}

/// Decay exponent, inverse temperature and nearest-neighbour boost.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct CouplingModel {
    pub alpha: f64,
    pub beta: f64,
    pub j1: f64,
}

impl CouplingModel {
    pub fn new(alpha: f64, beta: f64, j1: f64) -> Result<Self> {
        if !(alpha > 1.0 && alpha <= 2.0) {
            return Err(Error::InvalidModel(format!("alpha must exceed 1 and be at most 2, got {alpha}")));
        }
        if !(beta >= 0.0 && beta.is_finite()) {
            return Err(Error::InvalidModel(format!("beta must be finite and non-negative, got {beta}")));
        }
        if !(j1 >= 1.0 && j1.is_finite()) {
            return Err(Error::InvalidModel(format!("j1 must be at least 1, got {j1}")));
        }
        Ok(CouplingModel { alpha, beta, j1 })
    }

    /// Pure power law, `j1 = 1`.
    pub fn power_law(alpha: f64, beta: f64) -> Result<Self> {
        Self::new(alpha, beta, 1.0)
    }

    pub fn with_beta(self, beta: f64) -> Result<Self> {
        Self::new(self.alpha, beta, self.j1)
    }

    #[inline]
    pub fn coupling(&self, distance: u64) -> f64 {
        match distance {
            0 => 0.0,
            1 => self.j1,
            d => (d as f64).powf(-self.alpha),
        }
    }

    /// `sum_{d=a}^{b} J(d)` for `a >= 1`.
    pub fn coupling_sum(&self, a: u64, b: u64) -> f64 {
        if a > b {
            return 0.0;
        }
        let boost = if a == 1 { self.j1 - 1.0 } else { 0.0 };
        series::power_sum(self.alpha, a, b) + boost
    }

    /// `J(d)` for `d < len`.
    pub fn coupling_table(&self, len: usize) -> Vec<f64> {
        (0..len as u64).map(|d| self.coupling(d)).collect()
    }
}

/// A volume, its boundary and a model, with the exterior fields and the
/// coupling table precomputed.
#[derive(Clone, Debug)]
pub struct Hamiltonian {
    volume: Volume,
    bc: BoundaryCondition,
    model: CouplingModel,
    couplings: Vec<f64>,
    exterior: Vec<f64>,
}

impl Hamiltonian {
    pub fn new(volume: Volume, bc: &BoundaryCondition, model: &CouplingModel) -> Result<Self> {
        bc.validate(&volume)?;
        let exterior = volume.sites().map(|i| bc.field_at(&volume, i, model)).collect();
        Ok(Hamiltonian {
            volume,
            bc: bc.clone(),
            model: *model,
            couplings: model.coupling_table(volume.len()),
            exterior,
        })
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

    /// `J(d)` for `0 <= d < |V|`.
    pub fn couplings(&self) -> &[f64] {
        &self.couplings
    }

    /// Exterior field per volume index.
    pub fn exterior_fields(&self) -> &[f64] {
        &self.exterior
    }

    fn check(&self, config: &SpinConfig) -> Result<()> {
        if config.volume != self.volume {
            return Err(Error::params(format!(
                "configuration volume {} differs from {}",
                config.volume, self.volume
            )));
        }
        Ok(())
    }

    pub fn energy(&self, config: &SpinConfig) -> Result<f64> {
        self.check(config)?;
        let s = &config.spins;
        let mut e = 0.0;
        for i in 0..s.len() {
            let si = s[i].value();
            let mut inner = self.exterior[i];
            for (d, sj) in s[i + 1..].iter().enumerate() {
                inner += self.couplings[d + 1] * sj.value();
            }
            e -= si * inner;
        }
        Ok(e)
    }

    /// Full field at `site`: interior couplings plus exterior.
    pub fn local_field(&self, config: &SpinConfig, site: i64) -> Result<f64> {
        self.check(config)?;
        let k = self.volume.check_site(site)?;
        let s = &config.spins;
        let mut h = self.exterior[k];
        for (j, sj) in s.iter().enumerate() {
            if j != k {
                h += self.couplings[j.abs_diff(k)] * sj.value();
            }
        }
        Ok(h)
    }

    pub fn delta_energy(&self, config: &SpinConfig, site: i64) -> Result<f64> {
        let h = self.local_field(config, site)?;
        let s = config.get(site).expect("checked").value();
        Ok(2.0 * s * h)
    }
}

pub fn energy(config: &SpinConfig, bc: &BoundaryCondition, model: &CouplingModel) -> Result<f64> {
    Hamiltonian::new(config.volume(), bc, model)?.energy(config)
}

/// `energy(flip(config, site)) - energy(config)` in `O(|V| + cutoff)`.
pub fn delta_energy(
    config: &SpinConfig,
    site: i64,
    bc: &BoundaryCondition,
    model: &CouplingModel,
) -> Result<f64> {
    let volume = config.volume();
    let k = volume.check_site(site)?;
    bc.validate(&volume)?;
    let mut h = bc.field_at(&volume, site, model);
    for (j, sj) in config.spins.iter().enumerate() {
        if j != k {
            h += model.coupling(j.abs_diff(k) as u64) * sj.value();
        }
    }
    Ok(2.0 * config.spins[k].value() * h)
}

pub fn boundary_field(
    site: i64,
    volume: &Volume,
    bc: &BoundaryCondition,
    model: &CouplingModel,
) -> Result<f64> {
    volume.check_site(site)?;
    bc.validate(volume)?;
    Ok(bc.field_at(volume, site, model))
}
