//! Closed-form sharp constants and numerical operator-norm ratios.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{domain, Result};
use crate::fields::{make_chi_ball, make_f0_fractional, ExtremizerFamilyEps, RandomProfileFamily};
use crate::norms::{mixed_norm_radial, weak_mixed_norm_monotone, MixedExponents};
use crate::operators::{
    dual_fractional_hardy_radial, dual_hardy_radial, fractional_hardy_radial, hardy_radial, FractionalOrder,
};
use crate::quadrature::{QuadratureSpec, RadialProfile};
use crate::specfun::{beta_fn, sphere_measure, Dimension};

/// Tolerance on `1/p − 1/q − β/n`.
pub const SCALING_TOLERANCE: f64 = 1e-12;

fn open_exponent(name: &str, v: f64) -> Result<()> {
    if !(v.is_finite() && v > 1.0) {
        return domain(format!("{name} must lie in (1, ∞), got {v}"));
    }
    Ok(())
}

/// `H, H*: L^p_{|x|}L^{p̄₁}_θ → L^p_{|x|}L^{p̄₂}_θ`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct HardyConfig {
    pub n: Dimension,
    pub p: f64,
    pub p_bar_1: f64,
    pub p_bar_2: f64,
}

impl HardyConfig {
    pub fn new(n: Dimension, p: f64, p_bar_1: f64, p_bar_2: f64) -> Result<Self> {
        open_exponent("p", p)?;
        open_exponent("p̄₁", p_bar_1)?;
        open_exponent("p̄₂", p_bar_2)?;
        Ok(HardyConfig { n, p, p_bar_1, p_bar_2 })
    }

    /// `ω_n^{1/p̄₂ − 1/p̄₁}`.
    pub fn omega_factor(&self) -> f64 {
        sphere_measure(self.n).powf(1.0 / self.p_bar_2 - 1.0 / self.p_bar_1)
    }

    pub fn input(&self) -> MixedExponents {
        MixedExponents::new(self.p, self.p_bar_1, self.n).expect("validated")
    }

    pub fn output(&self) -> MixedExponents {
        MixedExponents::new(self.p, self.p_bar_2, self.n).expect("validated")
    }
}

/// `H_β: L^p_{|x|}L^{p̄}_θ → L^q_{|x|}L^{q̄}_θ` with `1/p − 1/q = β/n`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FractionalConfig {
    pub n: Dimension,
    pub beta: f64,
    pub p: f64,
    pub q: f64,
    pub p_bar: f64,
    pub q_bar: f64,
}

impl FractionalConfig {
    pub fn new(n: Dimension, beta: f64, p: f64, q: f64, p_bar: f64, q_bar: f64) -> Result<Self> {
        FractionalOrder::new(beta, n)?;
        for (name, v) in [("p", p), ("q", q), ("p̄", p_bar), ("q̄", q_bar)] {
            open_exponent(name, v)?;
        }
        if p >= q {
            return domain(format!("need p < q, got p = {p}, q = {q}"));
        }
        let mismatch = 1.0 / p - 1.0 / q - beta / n.as_f64();
        if mismatch.abs() > SCALING_TOLERANCE {
            return domain(format!("1/p − 1/q − β/n = {mismatch:e}, the scaling relation fails"));
        }
        Ok(FractionalConfig { n, beta, p, q, p_bar, q_bar })
    }

    /// Derives `q` from `1/q = 1/p − β/n`.
    pub fn from_p(n: Dimension, beta: f64, p: f64, p_bar: f64, q_bar: f64) -> Result<Self> {
        let inv_q = 1.0 / p - beta / n.as_f64();
        if inv_q.is_nan() || inv_q <= 0.0 {
            return domain(format!("no finite q: 1/p − β/n = {inv_q} ≤ 0"));
        }
        Self::new(n, beta, p, 1.0 / inv_q, p_bar, q_bar)
    }

    pub fn order(&self) -> FractionalOrder {
        FractionalOrder::new(self.beta, self.n).expect("validated")
    }

    pub fn input(&self) -> MixedExponents {
        MixedExponents::new(self.p, self.p_bar, self.n).expect("validated")
    }

    pub fn output(&self) -> MixedExponents {
        MixedExponents::new(self.q, self.q_bar, self.n).expect("validated")
    }
}

/// `p/(p−1) · ω_n^{1/p̄₂−1/p̄₁}`.
pub fn sharp_hardy_constant(c: &HardyConfig) -> f64 {
    c.p / (c.p - 1.0) * c.omega_factor()
}

/// `p · ω_n^{1/p̄₂−1/p̄₁}`.
pub fn sharp_dual_constant(c: &HardyConfig) -> f64 {
    c.p * c.omega_factor()
}

/// `ω_n^{1/p̄₂−1/p̄₁}`, the weak-type norm of `H`.
pub fn sharp_weak_constant(c: &HardyConfig) -> f64 {
    c.omega_factor()
}

/// `C_{p,q,n,β} = (p'/q)^{1/q} (n/(qβ) · B(n/(qβ), n/(q'β)))^{−β/n}`.
pub fn fractional_core_constant(p: f64, q: f64, n: Dimension, beta: f64) -> Result<f64> {
    let c = FractionalConfig::new(n, beta, p, q, 2.0, 2.0)?;
    let nf = n.as_f64();
    let p_conj = c.p / (c.p - 1.0);
    let q_conj = c.q / (c.q - 1.0);
    let a = nf / (c.q * beta);
    let b = nf / (q_conj * beta);
    Ok((p_conj / c.q).powf(1.0 / c.q) * (a * beta_fn(a, b)?).powf(-beta / nf))
}

/// `C_{p,q,n,β} · ω_n^{1/q̄ − 1/p̄ + β/n}`.
pub fn sharp_fractional_constant(c: &FractionalConfig) -> f64 {
    let core = fractional_core_constant(c.p, c.q, c.n, c.beta).expect("validated config");
    core * sphere_measure(c.n).powf(1.0 / c.q_bar - 1.0 / c.p_bar + c.beta / c.n.as_f64())
}

/// Norm of `H*_β: L^{q'}_{|x|}L^{q̄'}_θ → L^{p'}_{|x|}L^{p̄'}_θ`, the adjoint
/// of `H_β` on the configuration `c`; equal to the norm of `H_β`.
pub fn sharp_dual_fractional_constant(c: &FractionalConfig) -> f64 {
    sharp_fractional_constant(c)
}

/// `n ε^ε (1 − ε^{n−ε−n/p})/(n − ε − n/p)`.
pub fn eps_lower_bound(epsilon: f64, p: f64, n: Dimension) -> Result<f64> {
    if !(epsilon > 0.0 && epsilon < 1.0) {
        return domain(format!("ε must lie in (0, 1), got {epsilon}"));
    }
    open_exponent("p", p)?;
    let nf = n.as_f64();
    let d = nf - epsilon - nf / p;
    if d <= 0.0 {
        return domain(format!("n − ε − n/p = {d} ≤ 0"));
    }
    let eps_pow_eps = if epsilon < 1e-300 { 1.0 } else { (epsilon * epsilon.ln()).exp() };
    Ok(nf * eps_pow_eps * (1.0 - epsilon.powf(d)) / d)
}

/// `‖H* f_ε‖/‖f_ε‖` without the `ω` factor, `p (1 + pε/n)^{−1/p'}`.
pub fn dual_eps_value(epsilon: f64, p: f64, n: Dimension) -> Result<f64> {
    ExtremizerFamilyEps::new(epsilon, p, n)?;
    Ok(p * (1.0 + p * epsilon / n.as_f64()).powf(1.0 / p - 1.0))
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum OperatorId {
    Hardy,
    DualHardy,
    Fractional(f64),
    DualFractional(f64),
    /// `H` into the weak mixed space.
    WeakHardy,
}

impl OperatorId {
    pub fn command(&self) -> &'static str {
        match self {
            OperatorId::Hardy => "verify-hardy",
            OperatorId::DualHardy => "verify-dual",
            OperatorId::Fractional(_) | OperatorId::DualFractional(_) => "verify-fractional",
            OperatorId::WeakHardy => "verify-weak",
        }
    }

    pub fn anchor(&self) -> &'static str {
        match self {
            OperatorId::Hardy => "Theorem 2.1",
            OperatorId::DualHardy => "Theorem 2.2",
            OperatorId::Fractional(_) => "Theorem 3.2",
            OperatorId::DualFractional(_) => "Theorem 3.2 (adjoint)",
            OperatorId::WeakHardy => "Theorem 4.1",
        }
    }

    fn beta(&self) -> Option<f64> {
        match self {
            OperatorId::Fractional(b) | OperatorId::DualFractional(b) => Some(*b),
            _ => None,
        }
    }
}

/// One experiment: a closed-form constant against a numerical ratio.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ReportRow {
    pub command: String,
    pub n: u32,
    pub p: f64,
    pub q: Option<f64>,
    pub pbar1: f64,
    pub pbar2: f64,
    pub beta: Option<f64>,
    pub family_param: Option<f64>,
    pub numerical_ratio: f64,
    pub closed_form_constant: f64,
    pub lower_bound: Option<f64>,
    pub relative_gap: f64,
    pub anchor: String,
}

impl ReportRow {
    /// `numerical_ratio ≤ closed_form_constant + tol` and, when a lower
    /// bound is present, `lower_bound − tol ≤ numerical_ratio`.
    pub fn within_bounds(&self, tol: f64) -> bool {
        self.numerical_ratio <= self.closed_form_constant + tol
            && self.lower_bound.is_none_or(|lb| lb - tol <= self.numerical_ratio)
    }
}

/// Closed-form constant of `op` between the given exponent pairs.
pub fn closed_form_constant(op: OperatorId, input: MixedExponents, output: MixedExponents) -> Result<f64> {
    let n = input.n();
    if output.n() != n {
        return domain("input and output exponents refer to different dimensions");
    }
    let same_p = || -> Result<HardyConfig> {
        if input.p() != output.p() {
            return domain(format!("H and H* keep p fixed, got {} → {}", input.p(), output.p()));
        }
        HardyConfig::new(n, input.p(), input.p_bar(), output.p_bar())
    };
    Ok(match op {
        OperatorId::Hardy => sharp_hardy_constant(&same_p()?),
        OperatorId::DualHardy => sharp_dual_constant(&same_p()?),
        OperatorId::WeakHardy => sharp_weak_constant(&same_p()?),
        OperatorId::Fractional(beta) => sharp_fractional_constant(&FractionalConfig::new(
            n,
            beta,
            input.p(),
            output.p(),
            input.p_bar(),
            output.p_bar(),
        )?),
        OperatorId::DualFractional(beta) => {
            // H*_β: (s, s̄) → (t, t̄) is the adjoint of H_β: (t', t̄') → (s', s̄')
            let (pre, post) = (output.dual(), input.dual());
            sharp_dual_fractional_constant(&FractionalConfig::new(
                n,
                beta,
                pre.p(),
                post.p(),
                pre.p_bar(),
                post.p_bar(),
            )?)
        }
    })
}

/// Applies `op` to `f` and reports `‖T f‖_out / ‖f‖_in` against the
/// closed-form constant.
pub fn ratio_experiment(
    op: OperatorId,
    f: &RadialProfile,
    input: MixedExponents,
    output: MixedExponents,
    spec: &QuadratureSpec,
) -> Result<ReportRow> {
    let constant = closed_form_constant(op, input, output)?;
    let n = input.n();
    let image = match op {
        OperatorId::Hardy | OperatorId::WeakHardy => hardy_radial(f, n, spec)?,
        OperatorId::DualHardy => dual_hardy_radial(f, n, spec)?,
        OperatorId::Fractional(beta) => fractional_hardy_radial(f, FractionalOrder::new(beta, n)?, spec)?,
        OperatorId::DualFractional(beta) => dual_fractional_hardy_radial(f, FractionalOrder::new(beta, n)?, spec)?,
    };
    let denominator = mixed_norm_radial(f, input, spec)?;
    if denominator == 0.0 {
        return domain("input has zero norm");
    }
    let numerator = match op {
        OperatorId::WeakHardy => weak_mixed_norm_monotone(&image, output, spec)?,
        _ => mixed_norm_radial(&image, output, spec)?,
    };
    let ratio = numerator / denominator;
    let fractional = op.beta().is_some();
    Ok(ReportRow {
        command: op.command().to_string(),
        n: n.get(),
        p: input.p(),
        q: fractional.then(|| output.p()),
        pbar1: input.p_bar(),
        pbar2: output.p_bar(),
        beta: op.beta(),
        family_param: None,
        numerical_ratio: ratio,
        closed_form_constant: constant,
        lower_bound: None,
        relative_gap: (constant - ratio) / constant,
        anchor: op.anchor().to_string(),
    })
}

/// `H f_ε` with the lower bound `eps_lower_bound · ω^{1/p̄₂−1/p̄₁}`.
pub fn hardy_eps_row(c: &HardyConfig, epsilon: f64, spec: &QuadratureSpec) -> Result<ReportRow> {
    let family = ExtremizerFamilyEps::new(epsilon, c.p, c.n)?;
    let mut row = ratio_experiment(OperatorId::Hardy, &family.profile(), c.input(), c.output(), spec)?;
    row.family_param = Some(epsilon);
    row.lower_bound = Some(eps_lower_bound(epsilon, c.p, c.n)? * c.omega_factor());
    Ok(row)
}

/// `H* f_ε`; the lower bound is the exact value `p (1 + pε/n)^{−1/p'} · ω^{1/p̄₂−1/p̄₁}`.
pub fn dual_eps_row(c: &HardyConfig, epsilon: f64, spec: &QuadratureSpec) -> Result<ReportRow> {
    let family = ExtremizerFamilyEps::new(epsilon, c.p, c.n)?;
    let mut row = ratio_experiment(OperatorId::DualHardy, &family.profile(), c.input(), c.output(), spec)?;
    row.family_param = Some(epsilon);
    row.lower_bound = Some(dual_eps_value(epsilon, c.p, c.n)? * c.omega_factor());
    Ok(row)
}

/// `H_β f₀`, expected to attain the constant.
pub fn fractional_f0_row(c: &FractionalConfig, spec: &QuadratureSpec) -> Result<ReportRow> {
    let f0 = make_f0_fractional(c.q, c.beta, c.n)?;
    ratio_experiment(OperatorId::Fractional(c.beta), &f0, c.input(), c.output(), spec)
}

/// Weak ratio of `H χ_{[0,r]}`, expected to attain the constant.
pub fn weak_chi_row(c: &HardyConfig, r: f64, spec: &QuadratureSpec) -> Result<ReportRow> {
    let mut row = ratio_experiment(OperatorId::WeakHardy, &make_chi_ball(r)?, c.input(), c.output(), spec)?;
    row.family_param = Some(r);
    Ok(row)
}

/// Ratios of `op` on `count` seeded random admissible profiles; each row's
/// `family_param` is the sample index.
pub fn random_family_rows(
    op: OperatorId,
    input: MixedExponents,
    output: MixedExponents,
    count: usize,
    seed: u64,
    spec: &QuadratureSpec,
) -> Result<Vec<ReportRow>> {
    let family = RandomProfileFamily::new(input.n(), input.p())?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    (0..count)
        .map(|i| {
            let f = family.sample(&mut rng);
            let mut row = ratio_experiment(op, &f, input, output, spec)?;
            row.family_param = Some(i as f64);
            Ok(row)
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::PI;

    fn dim(n: u32) -> Dimension {
        Dimension::new(n).unwrap()
    }

    fn close(a: f64, b: f64, tol: f64) -> bool {
        (a - b).abs() <= tol * b.abs()
    }

    #[test]
    fn hardy_constants() {
        for n in 2..6 {
            let c = HardyConfig::new(dim(n), 2.0, 3.0, 3.0).unwrap();
            assert_eq!(sharp_hardy_constant(&c), 2.0);
            assert_eq!(sharp_dual_constant(&c), 2.0);
            assert_eq!(sharp_weak_constant(&c), 1.0);
        }
        let c = HardyConfig::new(dim(2), 2.0, 2.0, 4.0).unwrap();
        assert!(close(sharp_hardy_constant(&c), 2.0 * (2.0 * PI).powf(-0.25), 1e-15));
        assert!((sharp_hardy_constant(&c) - 1.2632).abs() < 1e-4);
        assert!((sharp_weak_constant(&c) - 0.6316).abs() < 1e-4);
        let c = HardyConfig::new(dim(3), 3.0, 4.0, 4.0).unwrap();
        assert_eq!(sharp_hardy_constant(&c), 1.5);
        let c = HardyConfig::new(dim(2), 3.0, 2.0, 4.0).unwrap();
        assert!((sharp_dual_constant(&c) - 1.8948).abs() < 1e-4);
        let c = HardyConfig::new(dim(3), 2.0, 4.0, 2.0).unwrap();
        assert!(close(sharp_weak_constant(&c), (4.0 * PI).powf(0.25), 1e-15));
        assert!((sharp_weak_constant(&c) - 1.882_792_5).abs() < 1e-7);
        assert!(HardyConfig::new(dim(2), 1.0, 2.0, 2.0).is_err());
        assert!(HardyConfig::new(dim(2), 2.0, 2.0, f64::INFINITY).is_err());
    }

    #[test]
    fn hardy_and_dual_share_the_omega_factor() {
        for (p, b1, b2) in [(1.5, 2.0, 4.0), (3.0, 4.0, 1.5), (2.5, 7.0, 7.0)] {
            let c = HardyConfig::new(dim(3), p, b1, b2).unwrap();
            let w = sharp_weak_constant(&c);
            assert!(close(sharp_hardy_constant(&c) * (p - 1.0) / p, w, 1e-12));
            assert!(close(sharp_dual_constant(&c) / p, w, 1e-12));
        }
    }

    #[test]
    fn core_constant_examples() {
        let c = fractional_core_constant(4.0 / 3.0, 4.0, dim(2), 1.0).unwrap();
        assert!(close(c, 2.0 / PI.sqrt(), 1e-12));
        let c = fractional_core_constant(4.0 / 3.0, 4.0, dim(3), 1.5).unwrap();
        assert!(close(c, 2.0 / PI.sqrt(), 1e-12));
        assert!(fractional_core_constant(1.5, 4.0, dim(2), 1.0).is_err());
    }

    #[test]
    fn fractional_constant_examples() {
        let c = FractionalConfig::new(dim(2), 1.0, 4.0 / 3.0, 4.0, 2.0, 2.0).unwrap();
        assert!(close(sharp_fractional_constant(&c), 2.0 * 2f64.sqrt(), 1e-12));
        // Lebesgue exponents: the ω power vanishes
        let c = FractionalConfig::new(dim(3), 1.0, 1.5, 3.0, 1.5, 3.0).unwrap();
        let core = fractional_core_constant(1.5, 3.0, dim(3), 1.0).unwrap();
        assert!(close(sharp_fractional_constant(&c), core, 1e-12));
        assert!(FractionalConfig::new(dim(2), 1.0, 4.0, 4.0 / 3.0, 2.0, 2.0).is_err());
        let derived = FractionalConfig::from_p(dim(2), 1.0, 4.0 / 3.0, 2.0, 2.0).unwrap();
        assert!(close(derived.q, 4.0, 1e-14));
        assert!(FractionalConfig::from_p(dim(2), 1.0, 2.0, 2.0, 2.0).is_err());
    }

    #[test]
    fn eps_lower_bound_examples() {
        let v = eps_lower_bound(0.1, 2.0, dim(2)).unwrap();
        assert!(close(v, 2.0 * 0.1f64.powf(0.1) * (1.0 - 0.1f64.powf(0.9)) / 0.9, 1e-14));
        assert!((v - 1.5429).abs() < 1e-4);
        let v = eps_lower_bound(0.5, 3.0, dim(3)).unwrap();
        assert!(close(v, 3.0 * 0.5f64.sqrt() * (1.0 - 0.5f64.powf(1.5)) / 1.5, 1e-14));
        // √2·(1 − 2^{−3/2}) = √2 − 1/2
        assert!(close(v, 2f64.sqrt() - 0.5, 1e-13));
        assert!((eps_lower_bound(1e-12, 2.0, dim(2)).unwrap() - 2.0).abs() < 1e-9);
        assert!(eps_lower_bound(0.9, 1.1, dim(2)).is_err());
        assert!(eps_lower_bound(0.0, 2.0, dim(2)).is_err());
    }

    #[test]
    fn ratio_experiment_brackets_hardy() {
        let spec = QuadratureSpec::default();
        let c = HardyConfig::new(dim(2), 2.0, 2.0, 2.0).unwrap();
        let row = hardy_eps_row(&c, 0.01, &spec).unwrap();
        assert!(row.within_bounds(1e-6), "{row:?}");
        assert_eq!(row.anchor, "Theorem 2.1");
        assert!(row.relative_gap >= -1e-6);
    }

    #[test]
    fn fractional_and_weak_rows_attain() {
        let spec = QuadratureSpec::default();
        let c = FractionalConfig::new(dim(2), 1.0, 4.0 / 3.0, 4.0, 2.0, 2.0).unwrap();
        let row = fractional_f0_row(&c, &spec).unwrap();
        assert!(row.relative_gap.abs() <= 1e-6, "{row:?}");
        let c = HardyConfig::new(dim(2), 2.0, 2.0, 4.0).unwrap();
        let row = weak_chi_row(&c, 1.0, &spec).unwrap();
        assert!(close(row.numerical_ratio, (2.0 * PI).powf(-0.25), 1e-8));
    }

    #[test]
    fn dual_rows_match_exact_value() {
        let spec = QuadratureSpec::default();
        let c = HardyConfig::new(dim(3), 1.5, 2.0, 3.0).unwrap();
        for eps in [0.5, 0.1, 0.001] {
            let row = dual_eps_row(&c, eps, &spec).unwrap();
            assert!(close(row.numerical_ratio, row.lower_bound.unwrap(), 1e-8), "{row:?}");
        }
    }

    #[test]
    fn adjoint_extremizer_attains_the_dual_fractional_constant() {
        // g = (H_β f₀)^{q−1} attains the norm of H*_β: L^{q'} → L^{p'}
        let spec = QuadratureSpec::default();
        let c = FractionalConfig::new(dim(2), 1.0, 4.0 / 3.0, 4.0, 2.0, 2.0).unwrap();
        let f0 = make_f0_fractional(c.q, c.beta, c.n).unwrap();
        let image = fractional_hardy_radial(&f0, c.order(), &spec).unwrap();
        let q = c.q;
        let (from, scale, exponent) = image.tail().as_bound();
        let g = RadialProfile::from_fallible(
            move |r| Ok(image.try_eval(r)?.powf(q - 1.0)),
            crate::quadrature::Tail::bound(from, scale.powf(q - 1.0), exponent * (q - 1.0)),
        )
        .unwrap()
        .with_decay_zero(0.0)
        .unwrap();
        let input = c.output().dual();
        let output = c.input().dual();
        let row = ratio_experiment(OperatorId::DualFractional(c.beta), &g, input, output, &spec).unwrap();
        assert!(row.relative_gap.abs() <= 1e-6, "{row:?}");
    }

    #[test]
    fn upper_bounds_on_random_profiles() {
        let spec = QuadratureSpec::default();
        let c = HardyConfig::new(dim(2), 2.0, 2.0, 3.0).unwrap();
        for op in [OperatorId::Hardy, OperatorId::DualHardy] {
            for row in random_family_rows(op, c.input(), c.output(), 8, 11, &spec).unwrap() {
                assert!(row.within_bounds(1e-6), "{row:?}");
            }
        }
    }
}
