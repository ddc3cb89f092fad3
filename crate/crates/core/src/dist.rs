//! Gaussian and Student-t distribution functions.
//!
//! Every probability in the engine comes from here. The special functions
//! (`erfc_inv`, regularized incomplete beta) are taken from `statrs`, `erfc` from `libm`;
//! the location-scale wrappers and the Student-t quantile are local.

use serde::{Deserialize, Serialize};
use statrs::function::beta::beta_reg;
use libm::erfc;
use statrs::function::erf::erfc_inv;
use std::f64::consts::SQRT_2;

/// Tail shape of a sampling or posterior distribution.
///
/// `None` degrees of freedom means infinite, i.e. Gaussian.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Shape {
    pub df: Option<u32>,
}

impl Shape {
    pub const GAUSSIAN: Shape = Shape { df: None };

    pub fn student(df: u32) -> Self {
        Shape { df: Some(df) }
    }

    pub fn from_df(df: Option<u32>) -> Self {
        Shape { df }
    }

    /// Standardized CDF.
    pub fn cdf(&self, z: f64) -> f64 {
        match self.df {
            None => std_normal_cdf(z),
            Some(df) => student_t_cdf(z, f64::from(df)),
        }
    }

    /// Standardized quantile. `p` must lie in (0, 1).
    pub fn quantile(&self, p: f64) -> f64 {
        match self.df {
            None => std_normal_quantile(p),
            Some(df) => student_t_quantile(p, f64::from(df)),
        }
    }

    /// Two-sided critical value for a central interval at `level`.
    pub fn two_sided(&self, level: f64) -> f64 {
        self.quantile(0.5 + level / 2.0)
    }
}

pub fn std_normal_cdf(z: f64) -> f64 {
    if z.is_nan() {
        return f64::NAN;
    }
    0.5 * erfc(-z / SQRT_2)
}

pub fn std_normal_quantile(p: f64) -> f64 {
    if p <= 0.0 {
        return f64::NEG_INFINITY;
    }
    if p >= 1.0 {
        return f64::INFINITY;
    }
    // erfc_inv alone is only good to about 1e-11; polish with Halley steps.
    let mut x = -SQRT_2 * erfc_inv(2.0 * p);
    for _ in 0..2 {
        let e = std_normal_cdf(x) - p;
        let u = e * (2.0 * std::f64::consts::PI).sqrt() * (0.5 * x * x).exp();
        let next = x - u / (1.0 + 0.5 * x * u);
        if !next.is_finite() {
            break;
        }
        x = next;
    }
    x
}

pub fn student_t_cdf(t: f64, df: f64) -> f64 {
    if t.is_nan() {
        return f64::NAN;
    }
    if t.is_infinite() {
        return if t > 0.0 { 1.0 } else { 0.0 };
    }
    if t == 0.0 {
        return 0.5;
    }
    let x = df / (df + t * t);
    // Near x = 1 the complement form keeps relative accuracy for small |t|.
    let tail = if x > 0.9 {
        0.5 * (1.0 - beta_reg(0.5, df / 2.0, t * t / (df + t * t)))
    } else {
        0.5 * beta_reg(df / 2.0, 0.5, x)
    };
    if t > 0.0 {
        1.0 - tail
    } else {
        tail
    }
}

fn student_t_pdf(t: f64, df: f64) -> f64 {
    use statrs::function::gamma::ln_gamma;
    let ln_norm = ln_gamma((df + 1.0) / 2.0) - ln_gamma(df / 2.0) - 0.5 * (df * std::f64::consts::PI).ln();
    (ln_norm - (df + 1.0) / 2.0 * (1.0 + t * t / df).ln()).exp()
}

/// Student-t quantile by safeguarded Newton iteration on the CDF.
pub fn student_t_quantile(p: f64, df: f64) -> f64 {
    if p <= 0.0 {
        return f64::NEG_INFINITY;
    }
    if p >= 1.0 {
        return f64::INFINITY;
    }
    if p == 0.5 {
        return 0.0;
    }
    // Solve in the lower tail and mirror; the lower tail keeps p small and exact.
    let (lower_p, sign) = if p < 0.5 { (p, -1.0) } else { (1.0 - p, 1.0) };

    // Bracket [lo, hi] on the negative axis with cdf(lo) <= lower_p <= cdf(hi).
    let mut hi = 0.0_f64;
    let mut lo = std_normal_quantile(lower_p).min(-1.0);
    while student_t_cdf(lo, df) > lower_p {
        hi = lo;
        lo *= 2.0;
        if lo < -1e300 {
            return sign * f64::INFINITY;
        }
    }

    let mut x = 0.5 * (lo + hi);
    for _ in 0..200 {
        let f = student_t_cdf(x, df) - lower_p;
        if f > 0.0 {
            hi = x;
        } else {
            lo = x;
        }
        let d = student_t_pdf(x, df);
        let mut next = x - f / d;
        if !next.is_finite() || next <= lo || next >= hi {
            next = 0.5 * (lo + hi);
        }
        if (next - x).abs() <= 1e-15 * x.abs().max(1e-300) {
            x = next;
            break;
        }
        x = next;
    }
    -sign * x
}

/// A location-scale member of the Gaussian / Student-t family.
///
/// A zero scale degenerates to a point mass at `location`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LocationScale {
    pub location: f64,
    pub scale: f64,
    pub shape: Shape,
}

impl LocationScale {
    pub fn new(location: f64, scale: f64, shape: Shape) -> Self {
        LocationScale {
            location,
            scale,
            shape,
        }
    }

    pub fn cdf(&self, x: f64) -> f64 {
        if x == f64::INFINITY {
            return 1.0;
        }
        if x == f64::NEG_INFINITY {
            return 0.0;
        }
        if self.scale == 0.0 {
            return if x >= self.location { 1.0 } else { 0.0 };
        }
        self.shape.cdf((x - self.location) / self.scale)
    }

    pub fn quantile(&self, p: f64) -> f64 {
        self.location + self.scale * self.shape.quantile(p)
    }

    /// Probability mass in `(lo, hi]`.
    pub fn mass_between(&self, lo: f64, hi: f64) -> f64 {
        (self.cdf(hi) - self.cdf(lo)).max(0.0)
    }
}
