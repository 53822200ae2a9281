//! Power-law series: Hurwitz zeta, truncated tails and their integral brackets.
//!
//! Every infinite sum over `k^-s` in the crate goes through [`hurwitz_zeta`]:
//! an explicit partial sum up to offset [`EXPLICIT_OFFSET`] followed by an
//! Euler-Maclaurin tail with four Bernoulli corrections. For `s` in `(1, 3]`
//! the truncation error is below `1e-15` in absolute terms.

/// Terms with `a + k` below this offset are summed explicitly.
pub const EXPLICIT_OFFSET: f64 = 32.0;

/// `sum_{k >= 0} (a + k)^(-s)` for `a > 0`, `s > 1`.
pub fn hurwitz_zeta(s: f64, a: f64) -> f64 {
    debug_assert!(s > 1.0, "hurwitz_zeta needs s > 1, got {s}");
    debug_assert!(a > 0.0, "hurwitz_zeta needs a > 0, got {a}");
    let mut head = 0.0;
    let mut b = a;
    while b < EXPLICIT_OFFSET {
        head += b.powf(-s);
        b += 1.0;
    }
    head + euler_maclaurin_tail(s, b)
}

fn euler_maclaurin_tail(s: f64, b: f64) -> f64 {
    let f = b.powf(-s);
    let inv = 1.0 / b;
    let inv2 = inv * inv;
    let p1 = s * inv;
    let p3 = p1 * (s + 1.0) * (s + 2.0) * inv2;
    let p5 = p3 * (s + 3.0) * (s + 4.0) * inv2;
    let p7 = p5 * (s + 5.0) * (s + 6.0) * inv2;
    f * (b / (s - 1.0) + 0.5 + p1 / 12.0 - p3 / 720.0 + p5 / 30240.0 - p7 / 1_209_600.0)
}

/// Riemann zeta at `s > 1`.
pub fn zeta(s: f64) -> f64 {
    hurwitz_zeta(s, 1.0)
}

/// `sum_{k > m} k^(-s)`.
pub fn power_tail(s: f64, m: u64) -> f64 {
    hurwitz_zeta(s, m as f64 + 1.0)
}

/// `sum_{k = a}^{b} k^(-s)` for `1 <= a`; zero when `a > b`.
pub fn power_sum(s: f64, a: u64, b: u64) -> f64 {
    if a > b {
        return 0.0;
    }
    if b - a < 64 {
        return (a..=b).rev().map(|k| (k as f64).powf(-s)).sum();
    }
    hurwitz_zeta(s, a as f64) - hurwitz_zeta(s, b as f64 + 1.0)
}

/// `int_m^inf x^(-s) dx`.
pub fn integral_tail(s: f64, m: f64) -> f64 {
    m.powf(1.0 - s) / (s - 1.0)
}

/// Rigorous enclosure of a decreasing-term tail `sum_{k > m} k^(-s)`:
/// `[int_{m+1}^inf, int_m^inf]`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Bracket {
    pub lower: f64,
    pub upper: f64,
}

impl Bracket {
    pub fn power_tail(s: f64, m: u64) -> Self {
        Bracket {
            lower: integral_tail(s, m as f64 + 1.0),
            upper: integral_tail(s, m.max(1) as f64),
        }
    }

    pub fn width(&self) -> f64 {
        self.upper - self.lower
    }

    pub fn contains(&self, v: f64) -> bool {
        v >= self.lower && v <= self.upper
    }
}
