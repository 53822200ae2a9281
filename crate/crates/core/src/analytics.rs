//! Closed-form quantities: the interface free-energy shape `f_alpha`, the
//! localization coefficient `g`, alternating remainders and the boundedness
//! observable `B`, the half-line field profiles `h_x`, and tail bounds.
//!
//! Infinite power sums go through [`crate::series::hurwitz_zeta`].

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::lattice::{Spin, SpinConfig, Volume};
use crate::series::{hurwitz_zeta, zeta};

/// `f(theta) = (1+theta)^(2-alpha) + (1-theta)^(2-alpha)` and derivatives.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct FAlpha {
    pub value: f64,
    pub d1: f64,
    pub d2: f64,
}

/// At `theta = +-1` the derivatives are the one-sided limits (infinite).
pub fn f_alpha(theta: f64, alpha: f64) -> Result<FAlpha> {
    if !(theta.abs() <= 1.0) {
        return Err(Error::params(format!("theta must lie in [-1, 1], got {theta}")));
    }
    if !(alpha > 1.0 && alpha < 2.0) {
        return Err(Error::params(format!("f_alpha needs 1 < alpha < 2, got {alpha}")));
    }
    let (p, m) = (1.0 + theta, 1.0 - theta);
    let e = 2.0 - alpha;
    Ok(FAlpha {
        value: p.powf(e) + m.powf(e),
        d1: e * (p.powf(1.0 - alpha) - m.powf(1.0 - alpha)),
        d2: e * (1.0 - alpha) * (p.powf(-alpha) + m.powf(-alpha)),
    })
}

/// Grid resolution for `M_alpha`.
pub const M_ALPHA_GRID: usize = 10_000;

/// `max f_alpha` over `eps <= |theta| <= 1`, on a grid of `M_ALPHA_GRID + 1`
/// points per side (the function is even).
pub fn m_alpha(alpha: f64, eps: f64) -> Result<f64> {
    if !(0.0..1.0).contains(&eps) {
        return Err(Error::params(format!("epsilon must lie in [0, 1), got {eps}")));
    }
    (0..=M_ALPHA_GRID)
        .map(|k| f_alpha(eps + (1.0 - eps) * k as f64 / M_ALPHA_GRID as f64, alpha).map(|f| f.value))
        .try_fold(f64::NEG_INFINITY, |acc, v| v.map(|v| acc.max(v)))
}

/// Factors of the localization coefficient, kept apart for auditing.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct GCoefficient {
    pub prefactor: f64,
    pub f_half: f64,
    pub m_alpha: f64,
    pub x: f64,
    pub bracket: f64,
    pub value: f64,
}

/// ```text
/// g = exp(-2 beta (zeta(alpha) + J)) / ((2-alpha)(alpha-1))
///     * [ f(1/2)(1 - x) - M_alpha (1 + x) ],   x = exp(-c1 beta)
/// ```
/// `c1` has no known value and must be supplied.
pub fn g_coefficient(alpha: f64, beta: f64, eps: f64, j1: f64, c1: f64) -> Result<GCoefficient> {
    if eps >= 1.0 {
        return Err(Error::params(format!("epsilon must be below 1, got {eps}")));
    }
    let m = m_alpha(alpha, eps)?;
    let f_half = f_alpha(0.5, alpha)?.value;
    let prefactor = (-2.0 * beta * (zeta(alpha) + j1)).exp() / ((2.0 - alpha) * (alpha - 1.0));
    let x = (-c1 * beta).exp();
    let bracket = f_half * (1.0 - x) - m * (1.0 + x);
    Ok(GCoefficient { prefactor, f_half, m_alpha: m, x, bracket, value: prefactor * bracket })
}

/// The `beta` at which the bracket of [`g_coefficient`] changes sign, if any.
pub fn g_bracket_crossing(alpha: f64, eps: f64, c1: f64) -> Result<Option<f64>> {
    let m = m_alpha(alpha, eps)?;
    let f = f_alpha(0.5, alpha)?.value;
    let x = (f - m) / (f + m);
    Ok((x > 0.0 && x < 1.0 && c1 > 0.0).then(|| -x.ln() / c1))
}

/// `R_N = sum_{n > N} (-1)^(n+1) n^-alpha`, from two Hurwitz zeta values at
/// half-integer spacing. Requires `alpha > 1`.
pub fn alternating_remainder(n: u64, alpha: f64) -> f64 {
    let odd = hurwitz_zeta(alpha, n.div_ceil(2) as f64 + 0.5);
    let even = hurwitz_zeta(alpha, (n / 2 + 1) as f64);
    2f64.powf(-alpha) * (odd - even)
}

/// Computed value against an analytic bound.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct BoundReport {
    pub computed_value: f64,
    pub analytic_bound: f64,
    pub satisfied: bool,
}

impl BoundReport {
    pub fn new(computed_value: f64, analytic_bound: f64) -> Self {
        BoundReport { computed_value, analytic_bound, satisfied: computed_value <= analytic_bound + 1e-12 }
    }
}

/// Coefficient of `w_j` in `B`: `sum_{i in [-L1,-1]} (-1)^i |i-j|^-alpha`.
pub fn b_coefficient(j: i64, l1: u64, alpha: f64) -> f64 {
    let l1i = l1 as i64;
    if j >= 0 {
        let j = j as u64;
        let sign = if j % 2 == 0 { -1.0 } else { 1.0 };
        sign * (alternating_remainder(j, alpha) - alternating_remainder(j + l1, alpha))
    } else if j < -l1i {
        let m = (-l1i - j) as u64;
        let sign = if (l1 + m + 1) % 2 == 0 { 1.0 } else { -1.0 };
        sign * (alternating_remainder(m - 1, alpha) - alternating_remainder(l1 + m - 1, alpha))
    } else {
        0.0
    }
}

/// `B(w) = sum_{j outside [-L1,-1]} sum_{i in [-L1,-1]} (-1)^i |i-j|^-alpha w_j`
/// by direct double summation over the window of `exterior`; entries inside
/// the block are ignored.
pub fn b_observable(exterior: &SpinConfig, l1: u64, alpha: f64) -> Result<f64> {
    if l1 == 0 {
        return Err(Error::params("L1 must be positive"));
    }
    let block = Volume::new(-(l1 as i64), -1)?;
    if !exterior.volume().contains_volume(&block) {
        return Err(Error::params(format!("window {} must contain the block {block}", exterior.volume())));
    }
    let mut b = 0.0;
    for (j, s) in exterior.volume().sites().zip(exterior.spins()) {
        if block.contains(j) {
            continue;
        }
        let mut c = 0.0;
        for i in block.sites() {
            let sign = if i.rem_euclid(2) == 0 { 1.0 } else { -1.0 };
            c += sign * ((i - j).unsigned_abs() as f64).powf(-alpha);
        }
        b += c * s.value();
    }
    Ok(b)
}

/// Maximizer of `B` on the window `[-L1 - cutoff, cutoff - 1]`: minus on
/// the right half-line, and on the far left plus for even `L1`, minus for odd.
pub fn b_maximizer(l1: u64, cutoff: u64) -> Result<SpinConfig> {
    let v = Volume::new(-(l1 as i64) - cutoff as i64, cutoff as i64 - 1)?;
    let left = if l1 % 2 == 0 { Spin::Up } else { Spin::Down };
    let spins = v.sites().map(|j| if j >= 0 { Spin::Down } else { left }).collect();
    SpinConfig::new(v, spins)
}

/// `sup |B|` at block length `L1` with its bounds.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct BMax {
    pub l1: u64,
    /// `B` at the maximizer, untruncated.
    pub value: f64,
    /// `L1 -> infinity` limit, `2 (1 - 2^-alpha) zeta(alpha)`.
    pub limit: f64,
    /// Bound on `|value - limit|`: `2 zeta(alpha, L1 + 1)`.
    pub tail_allowance: f64,
    /// Against the per-`L1` bound `2 zeta(alpha) + 2 zeta(alpha, L1 + 1)`.
    pub report: BoundReport,
}

/// Closed form: with `P = sum_{k<L1} |R_k|` and `A = (1 - 2^-alpha) zeta(alpha)`,
/// `B_max = 2P` for even `L1` and `2(2A - P)` for odd `L1`.
pub fn b_max(l1: u64, alpha: f64) -> Result<BMax> {
    if l1 == 0 {
        return Err(Error::params("L1 must be positive"));
    }
    let a = (1.0 - 2f64.powf(-alpha)) * zeta(alpha);
    let p: f64 = (0..l1).map(|k| alternating_remainder(k, alpha).abs()).sum();
    let value = if l1 % 2 == 0 { 2.0 * p } else { 2.0 * (2.0 * a - p) };
    let tail = hurwitz_zeta(alpha, l1 as f64 + 1.0);
    Ok(BMax {
        l1,
        value,
        limit: 2.0 * a,
        tail_allowance: 2.0 * tail,
        report: BoundReport::new(value, 2.0 * zeta(alpha) + 2.0 * tail),
    })
}

/// `L1`-independent bound `4 zeta(alpha)` on `sup |B|`.
pub fn b_uniform_bound(alpha: f64) -> f64 {
    4.0 * zeta(alpha)
}

/// Inputs of the half-line field profile.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct FieldProfileSpec {
    pub l: u64,
    pub n_annulus: u64,
    pub n_outer: u64,
    pub annulus_sign: i8,
    pub alpha: f64,
    /// Spins `w_{-k}` for `k = 1..=L`; default alternating `(-1)^k`.
    pub inner_pattern: Option<Vec<i8>>,
    /// Spins `w_{-k}` for `k = N+1..=n`; default `annulus_sign`.
    pub far_pattern: Option<Vec<i8>>,
}

impl FieldProfileSpec {
    pub fn new(l: u64, n_annulus: u64, n_outer: u64, annulus_sign: i8, alpha: f64) -> Result<Self> {
        let s = FieldProfileSpec {
            l,
            n_annulus,
            n_outer,
            annulus_sign,
            alpha,
            inner_pattern: None,
            far_pattern: None,
        };
        s.validate()?;
        Ok(s)
    }

    pub fn with_inner(mut self, pattern: Vec<i8>) -> Result<Self> {
        self.inner_pattern = Some(pattern);
        self.validate()?;
        Ok(self)
    }

    pub fn with_far(mut self, pattern: Vec<i8>) -> Result<Self> {
        self.far_pattern = Some(pattern);
        self.validate()?;
        Ok(self)
    }

    pub fn validate(&self) -> Result<()> {
        if !(1 <= self.l && self.l < self.n_annulus && self.n_annulus < self.n_outer) {
            return Err(Error::params(format!(
                "need 1 <= L < N < n, got L={}, N={}, n={}",
                self.l, self.n_annulus, self.n_outer
            )));
        }
        if self.annulus_sign.abs() != 1 {
            return Err(Error::params("annulus sign must be -1 or +1"));
        }
        if !(self.alpha > 1.0) {
            return Err(Error::params(format!("alpha must exceed 1, got {}", self.alpha)));
        }
        let check = |p: &Option<Vec<i8>>, len: u64, what: &str| -> Result<()> {
            match p {
                Some(v) if v.len() as u64 != len => {
                    Err(Error::params(format!("{what} pattern needs {len} entries, got {}", v.len())))
                }
                Some(v) if v.iter().any(|s| s.abs() != 1) => Err(Error::params(format!("{what} pattern must be +-1"))),
                _ => Ok(()),
            }
        };
        check(&self.inner_pattern, self.l, "inner")?;
        check(&self.far_pattern, self.n_outer - self.n_annulus, "far")
    }

    /// `L N^(1-alpha)`.
    pub fn smallness(&self) -> f64 {
        self.l as f64 * (self.n_annulus as f64).powf(1.0 - self.alpha)
    }
}

/// ```text
/// h_x = sum_{k=1}^{L} w_{-k}/(k+x)^a + s sum_{k=L+1}^{N} 1/(k+x)^a
///     + sum_{k=N+1}^{n} w_{-k}/(k+x)^a + 2 sum_{k>n} 1/(k+x)^a
/// ```
pub fn field_profile(spec: &FieldProfileSpec, x: u64) -> Result<f64> {
    spec.validate()?;
    let a = spec.alpha;
    let term = |k: u64| ((k + x) as f64).powf(-a);
    let inner: f64 = (1..=spec.l)
        .map(|k| {
            let s = match &spec.inner_pattern {
                Some(p) => p[(k - 1) as usize] as f64,
                None if k % 2 == 0 => 1.0,
                None => -1.0,
            };
            s * term(k)
        })
        .sum();
    let annulus = spec.annulus_sign as f64
        * (hurwitz_zeta(a, (spec.l + 1 + x) as f64) - hurwitz_zeta(a, (spec.n_annulus + 1 + x) as f64));
    let far = match &spec.far_pattern {
        Some(p) => (spec.n_annulus + 1..=spec.n_outer)
            .map(|k| p[(k - spec.n_annulus - 1) as usize] as f64 * term(k))
            .sum(),
        None => {
            spec.annulus_sign as f64
                * (hurwitz_zeta(a, (spec.n_annulus + 1 + x) as f64) - hurwitz_zeta(a, (spec.n_outer + 1 + x) as f64))
        }
    };
    let tail = 2.0 * hurwitz_zeta(a, (spec.n_outer + 1 + x) as f64);
    Ok(inner + annulus + far + tail)
}

/// `(3/(alpha-1)) L N^(1-alpha)`.
pub fn boundary_tail_bound(l: u64, n: u64, alpha: f64) -> f64 {
    3.0 / (alpha - 1.0) * l as f64 * (n as f64).powf(1.0 - alpha)
}

/// `sum_{j < -N} sum_{i=0}^{2L} |i - j|^-alpha`.
pub fn boundary_tail_exact(l: u64, n: u64, alpha: f64) -> f64 {
    (0..=2 * l).map(|i| hurwitz_zeta(alpha, (n + 1 + i) as f64)).sum()
}

/// Bond energy between a block of `L1` sites and its exterior against
/// `c L1^(2-alpha)`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct DecouplingReport {
    pub l1: u64,
    pub constant: f64,
    pub report: BoundReport,
}

/// `sum_{i in block} sum_{j outside} |i-j|^-alpha = 2 sum_{m=1}^{L1} zeta(alpha, m)`,
/// bounded by `c L1^(2-alpha)` with
/// `c = 2 zeta(alpha) + 2/(alpha-1) + 2/((alpha-1)(2-alpha))`.
pub fn decoupling_energy(l1: u64, alpha: f64) -> Result<DecouplingReport> {
    if l1 == 0 || !(alpha > 1.0 && alpha < 2.0) {
        return Err(Error::params("need L1 >= 1 and 1 < alpha < 2"));
    }
    let value: f64 = 2.0 * (1..=l1).map(|m| hurwitz_zeta(alpha, m as f64)).sum::<f64>();
    let c = 2.0 * zeta(alpha) + 2.0 / (alpha - 1.0) + 2.0 / ((alpha - 1.0) * (2.0 - alpha));
    Ok(DecouplingReport { l1, constant: c, report: BoundReport::new(value, c * (l1 as f64).powf(2.0 - alpha)) })
}

/// `3 - log 3 / log 2`.
pub fn alpha_plus() -> f64 {
    3.0 - 3f64.ln() / 2f64.ln()
}
