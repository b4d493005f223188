//! Gamma, Beta and the geometric constants of the unit sphere and ball.

use std::f64::consts::PI;
use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::{domain, Result};

/// Euclidean dimension `n >= 2`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(try_from = "u32", into = "u32")]
pub struct Dimension(u32);

impl Dimension {
    pub fn new(n: u32) -> Result<Self> {
        if n < 2 {
            return domain(format!("dimension must be at least 2, got {n}"));
        }
        Ok(Dimension(n))
    }

    pub fn get(self) -> u32 {
        self.0
    }

    pub fn as_f64(self) -> f64 {
        f64::from(self.0)
    }
}

impl TryFrom<u32> for Dimension {
    type Error = crate::Error;

    fn try_from(n: u32) -> Result<Self> {
        Dimension::new(n)
    }
}

impl From<Dimension> for u32 {
    fn from(d: Dimension) -> u32 {
        d.0
    }
}

impl fmt::Display for Dimension {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.0)
    }
}

// Lanczos approximation, g = 7, nine coefficients.
const LANCZOS_G: f64 = 7.0;
#[allow(clippy::excessive_precision)]
const LANCZOS_COEF: [f64; 9] = [
    0.999_999_999_999_809_93,
    676.520_368_121_885_1,
    -1_259.139_216_722_402_8,
    771.323_428_777_653_13,
    -176.615_029_162_140_59,
    12.507_343_278_686_905,
    -0.138_571_095_265_720_12,
    9.984_369_578_019_571_6e-6,
    1.505_632_735_149_311_6e-7,
];

fn lanczos_sum(x: f64) -> f64 {
    // x is the shifted argument (original minus one)
    let mut acc = LANCZOS_COEF[0];
    for (i, c) in LANCZOS_COEF.iter().enumerate().skip(1) {
        acc += c / (x + i as f64);
    }
    acc
}

/// Γ(x) for real `x > 0`.
pub fn gamma_fn(x: f64) -> Result<f64> {
    if x.is_nan() || x <= 0.0 || !x.is_finite() {
        return domain(format!("gamma requires a finite positive argument, got {x}"));
    }
    Ok(gamma_positive(x))
}

fn gamma_positive(x: f64) -> f64 {
    if x < 0.5 {
        // reflection: Γ(x)Γ(1−x) = π / sin(πx)
        return PI / ((PI * x).sin() * gamma_positive(1.0 - x));
    }
    if x == x.floor() && x <= 30.0 {
        // exact factorials for small integers
        return (1..x as u64).fold(1.0, |acc, k| acc * k as f64);
    }
    let z = x - 1.0;
    let t = z + LANCZOS_G + 0.5;
    // split the power to stay finite up to x ≈ 171
    let half = t.powf(0.5 * (z + 0.5));
    (2.0 * PI).sqrt() * half * (-t).exp() * half * lanczos_sum(z)
}

/// ln Γ(x) for real `x > 0`.
pub fn ln_gamma(x: f64) -> Result<f64> {
    if x.is_nan() || x <= 0.0 || !x.is_finite() {
        return domain(format!("ln_gamma requires a finite positive argument, got {x}"));
    }
    Ok(ln_gamma_positive(x))
}

fn ln_gamma_positive(x: f64) -> f64 {
    if x < 0.5 {
        return PI.ln() - (PI * x).sin().ln() - ln_gamma_positive(1.0 - x);
    }
    if x < 20.0 {
        return gamma_positive(x).ln();
    }
    let z = x - 1.0;
    let t = z + LANCZOS_G + 0.5;
    0.5 * (2.0 * PI).ln() + (z + 0.5) * t.ln() - t + lanczos_sum(z).ln()
}

/// B(a, b) = Γ(a)Γ(b)/Γ(a+b), evaluated in log space.
pub fn beta_fn(a: f64, b: f64) -> Result<f64> {
    if !(a > 0.0 && b > 0.0) || !a.is_finite() || !b.is_finite() {
        return domain(format!("beta requires positive arguments, got ({a}, {b})"));
    }
    Ok((ln_gamma_positive(a) + ln_gamma_positive(b) - ln_gamma_positive(a + b)).exp())
}

/// Surface measure ω_n = 2π^{n/2}/Γ(n/2) of the unit sphere S^{n−1}.
pub fn sphere_measure(n: Dimension) -> f64 {
    let half = 0.5 * n.as_f64();
    2.0 * PI.powf(half) / gamma_positive(half)
}

/// Volume Ω_n = π^{n/2}/Γ(1 + n/2) of the unit ball.
pub fn ball_volume(n: Dimension) -> f64 {
    let half = 0.5 * n.as_f64();
    PI.powf(half) / gamma_positive(1.0 + half)
}
