//! Radial integrals against `r^{n−1} dr` on `(0, ∞)`, cumulative radial
//! integrals and surface integrals on S¹ and S².
//!
//! Finite ranges are split at the profile breakpoints and at `r = 1`; wide
//! ranges are integrated in `ln r`, and a singular factor at the origin is
//! removed by a power substitution. Beyond the start of the tail:
//!
//! * compact tails contribute nothing;
//! * exact power tails are integrated in closed form (signed moments) or by
//!   mapping `[R, ∞)` onto `(0, 1]` through `x = (r/R)^γ`, where `γ` is the
//!   decay exponent of the integrand times `r`, which leaves a bounded
//!   integrand on a finite interval;
//! * bounded tails are truncated at the radius where the analytic tail bound
//!   drops below `tail_tol` of the accumulated integral.

mod gauss_kronrod;
mod profile;

use std::f64::consts::{PI, TAU};

use serde::{Deserialize, Serialize};

pub use profile::{AngularProfile, PowerTerm, RadialProfile, Tail};

use crate::error::{domain, Error, Result};
use crate::specfun::{sphere_measure, Dimension};
use gauss_kronrod::{adaptive, Tolerance};

/// Tolerances and limits for every numerical integral.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct QuadratureSpec {
    pub rel_tol: f64,
    pub abs_tol: f64,
    pub max_subdivisions: usize,
    pub tail_tol: f64,
}

impl Default for QuadratureSpec {
    fn default() -> Self {
        QuadratureSpec {
            rel_tol: 1e-10,
            abs_tol: 1e-14,
            max_subdivisions: 10_000,
            tail_tol: 1e-12,
        }
    }
}

impl QuadratureSpec {
    pub fn new(rel_tol: f64, abs_tol: f64, max_subdivisions: usize, tail_tol: f64) -> Result<Self> {
        let spec = QuadratureSpec {
            rel_tol,
            abs_tol,
            max_subdivisions,
            tail_tol,
        };
        spec.validate()?;
        Ok(spec)
    }

    pub fn validate(&self) -> Result<()> {
        let positive = |x: f64| x.is_finite() && x > 0.0;
        if !(positive(self.rel_tol) && positive(self.abs_tol) && positive(self.tail_tol)) {
            return domain("quadrature tolerances must be finite and positive");
        }
        if self.max_subdivisions < 1 {
            return domain("max_subdivisions must be at least 1");
        }
        Ok(())
    }

    /// Spec for integrals nested inside another integrand.
    pub(crate) fn inner(&self) -> QuadratureSpec {
        QuadratureSpec {
            rel_tol: (self.rel_tol * 1e-3).max(1e-14),
            abs_tol: self.abs_tol * 1e-3,
            ..*self
        }
    }

    fn tolerance(&self) -> Tolerance {
        Tolerance {
            rel: self.rel_tol,
            abs: self.abs_tol,
            max_subdivisions: self.max_subdivisions,
        }
    }
}

/// Integrand `|f(r)|^power · r^weight`, or `f(r) · r^weight` when signed.
#[derive(Debug, Clone, Copy)]
pub(crate) struct Moment {
    pub power: f64,
    pub signed: bool,
    pub weight: f64,
}

impl Moment {
    pub fn signed(weight: f64) -> Self {
        Moment {
            power: 1.0,
            signed: true,
            weight,
        }
    }

    pub fn abs_pow(power: f64, weight: f64) -> Self {
        Moment {
            power,
            signed: false,
            weight,
        }
    }

    fn apply(&self, v: f64, r: f64) -> f64 {
        let w = if self.weight == 0.0 { 1.0 } else { r.powf(self.weight) };
        if self.signed {
            v * w
        } else if self.power == 1.0 {
            v.abs() * w
        } else {
            v.abs().powf(self.power) * w
        }
    }
}

/// `∫₀^∞ f(r) r^{n−1} dr`.
pub fn integrate_radial(f: &RadialProfile, n: Dimension, spec: &QuadratureSpec) -> Result<f64> {
    integrate_moment(f, Moment::signed(n.as_f64() - 1.0), 0.0, None, spec)
}

/// `∫₀^r f(s) s^{n−1} ds`.
pub fn cumulative_radial(f: &RadialProfile, n: Dimension, r: f64, spec: &QuadratureSpec) -> Result<f64> {
    if !(r.is_finite() && r >= 0.0) {
        return domain(format!("cumulative radius must be finite and >= 0, got {r}"));
    }
    integrate_moment(f, Moment::signed(n.as_f64() - 1.0), 0.0, Some(r), spec)
}

/// `∫₀^∞ |f(r)|^q r^{n−1} dr`.
pub fn integrate_abs_pow(f: &RadialProfile, q: f64, n: Dimension, spec: &QuadratureSpec) -> Result<f64> {
    if !(q.is_finite() && q > 0.0) {
        return domain(format!("power must be positive, got {q}"));
    }
    integrate_moment(f, Moment::abs_pow(q, n.as_f64() - 1.0), 0.0, None, spec)
}

/// Integrates the moment `m` of `f` over `[lo, hi]`, `hi = None` meaning ∞.
pub(crate) fn integrate_moment(
    f: &RadialProfile,
    m: Moment,
    lo: f64,
    hi: Option<f64>,
    spec: &QuadratureSpec,
) -> Result<f64> {
    spec.validate()?;
    if !(lo.is_finite() && lo >= 0.0) {
        return domain(format!("lower limit must be finite and >= 0, got {lo}"));
    }
    if let Some(h) = hi {
        if h <= lo {
            return Ok(0.0);
        }
    }
    let origin_exp = m.power * f.decay_zero() + m.weight;
    if lo == 0.0 && origin_exp <= -1.0 {
        return domain(format!(
            "integrand ~ r^{origin_exp} is not integrable at the origin"
        ));
    }

    let tail = f.tail();
    let tail_start = tail.start();
    let finite_hi = match (tail, hi) {
        (Tail::Compact { support }, Some(h)) => h.min(*support),
        (Tail::Compact { support }, None) => *support,
        (_, Some(h)) => h,
        (_, None) => tail_start.max(lo),
    };

    let mut total = 0.0;
    if finite_hi > lo {
        let mut points = vec![lo, finite_hi];
        points.extend(f.breakpoints().iter().copied().filter(|b| *b > lo && *b < finite_hi));
        if lo < 1.0 && 1.0 < finite_hi {
            points.push(1.0);
        }
        points.sort_by(f64::total_cmp);
        points.dedup();
        for w in points.windows(2) {
            total += integrate_segment(f, m, w[0], w[1], origin_exp, spec)?;
        }
    }

    if hi.is_none() {
        let start = tail_start.max(lo);
        total += match tail {
            Tail::Compact { .. } => 0.0,
            Tail::Power { terms, .. } => power_tail(terms, m, start, spec)?,
            Tail::Bound { scale, exponent, .. } => {
                truncated_tail(f, m, start, *scale, *exponent, total, spec)?
            }
        };
    }
    Ok(total)
}

fn integrate_segment(
    f: &RadialProfile,
    m: Moment,
    a: f64,
    b: f64,
    origin_exp: f64,
    spec: &QuadratureSpec,
) -> Result<f64> {
    let g = |r: f64| -> Result<f64> { Ok(m.apply(f.try_eval(r)?, r)) };
    let tol = spec.tolerance();
    let est = if a == 0.0 && origin_exp < 0.0 {
        // r = b·y^k flattens r^{origin_exp} near the origin
        let k = 1.0 / (origin_exp + 1.0);
        adaptive(
            |y: f64| {
                let r = b * y.powf(k);
                if r == 0.0 {
                    return Ok(0.0);
                }
                Ok(g(r)? * b * k * y.powf(k - 1.0))
            },
            0.0,
            1.0,
            tol,
        )?
    } else if a > 0.0 && b / a > 4.0 {
        adaptive(
            |u: f64| {
                let r = u.exp();
                Ok(g(r)? * r)
            },
            a.ln(),
            b.ln(),
            tol,
        )?
    } else {
        adaptive(g, a, b, tol)?
    };
    Ok(est.value)
}

/// `∫_R^∞` of the moment of `Σ c_i r^{e_i}`.
fn power_tail(terms: &[PowerTerm], m: Moment, start: f64, spec: &QuadratureSpec) -> Result<f64> {
    let Some(lead) = terms.first() else {
        return Ok(0.0);
    };
    if start <= 0.0 {
        return domain("power tail must start at a positive radius");
    }
    let shift = m.weight + 1.0;
    if m.signed {
        let mut sum = 0.0;
        for t in terms {
            let gamma = t.exponent + shift;
            if gamma >= 0.0 {
                return domain(format!("tail term r^{} diverges against r^{}", t.exponent, m.weight));
            }
            sum += t.coef * start.powf(gamma) / -gamma;
        }
        return Ok(sum);
    }

    let q = m.power;
    let gamma = q * lead.exponent + shift;
    if gamma >= 0.0 {
        return domain(format!(
            "tail |r^{}|^{q} diverges against r^{}",
            lead.exponent, m.weight
        ));
    }
    let log_start = start.ln();
    let prefactor = (q * lead.coef.abs().ln() + gamma * log_start).exp() / -gamma;
    if terms.len() == 1 {
        return Ok(prefactor);
    }
    // x = (r/R)^γ ∈ (0, 1]; the integrand is |1 + δ(r)|^q with δ → 0 as x → 0
    let ratios: Vec<(f64, f64)> = terms[1..]
        .iter()
        .map(|t| (t.coef / lead.coef, t.exponent - lead.exponent))
        .collect();
    let est = adaptive(
        |x: f64| {
            let log_r = log_start + x.ln() / gamma;
            let delta: f64 = ratios.iter().map(|(c, d)| c * (d * log_r).exp()).sum();
            Ok((1.0 + delta).abs().powf(q))
        },
        0.0,
        1.0,
        spec.tolerance(),
    )?;
    Ok(prefactor * est.value)
}

/// Integrates `[start, R]` and stops at the first `R` whose tail bound
/// `scale^q R^γ / |γ|` is below `tail_tol` of the accumulated integral.
fn truncated_tail(
    f: &RadialProfile,
    m: Moment,
    start: f64,
    scale: f64,
    exponent: f64,
    head: f64,
    spec: &QuadratureSpec,
) -> Result<f64> {
    let q = m.power;
    let gamma = q * exponent + m.weight + 1.0;
    if gamma >= 0.0 {
        return domain(format!(
            "tail bound r^{exponent} does not make the integrand decay (γ = {gamma})"
        ));
    }
    if scale == 0.0 {
        return Ok(0.0);
    }
    let bound_at = |r: f64| (q * scale.ln() + gamma * r.ln()).exp() / -gamma;
    let mut radius = start.max(f64::MIN_POSITIVE);
    let mut acc = 0.0;
    for _ in 0..64 {
        let target = spec.tail_tol * (head + acc).abs().max(spec.abs_tol);
        if bound_at(radius) <= target {
            return Ok(acc);
        }
        // radius where the bound meets the target, with some margin
        let needed = ((target * -gamma).ln() - q * scale.ln()) / gamma;
        let next = needed.exp().max(radius * 2.0);
        if !next.is_finite() || next > 1e300 {
            return Err(Error::Quadrature(format!(
                "tail bound cannot reach {:e} below r = 1e300",
                spec.tail_tol
            )));
        }
        acc += integrate_segment(f, m, radius, next, 0.0, spec)?;
        radius = next;
    }
    Err(Error::Quadrature("tail truncation did not settle".into()))
}

/// `∫_lo^{cuts.last()} g` split at the (sorted) cut points.
pub(crate) fn integrate_pieces<F>(mut g: F, lo: f64, cuts: &[f64], spec: &QuadratureSpec) -> Result<f64>
where
    F: FnMut(f64) -> Result<f64>,
{
    spec.validate()?;
    let mut total = 0.0;
    let mut a = lo;
    for &b in cuts {
        if b > a {
            total += adaptive(&mut g, a, b, spec.tolerance())?.value;
            a = b;
        }
    }
    Ok(total)
}

/// `∫_{S^{n−1}} a(θ) dθ` with respect to the (unnormalized) surface measure.
pub fn integrate_sphere(a: &AngularProfile, n: Dimension, spec: &QuadratureSpec) -> Result<f64> {
    a.check_dimension(n.get())?;
    if let Some(c) = a.as_constant() {
        return Ok(c * sphere_measure(n));
    }
    integrate_sphere_with(n, |angles| Ok(a.eval(angles)), spec)
}

/// Surface integral of a closure of the angle tuple (`[φ]` or `[θ, φ]`).
pub(crate) fn integrate_sphere_with<F>(n: Dimension, f: F, spec: &QuadratureSpec) -> Result<f64>
where
    F: Fn(&[f64]) -> Result<f64>,
{
    spec.validate()?;
    match n.get() {
        2 => integrate_circle(|phi| f(&[phi]), spec),
        3 => {
            let est = adaptive(
                |theta: f64| {
                    let ring = integrate_circle(|phi| f(&[theta, phi]), &spec.inner())?;
                    Ok(ring * theta.sin())
                },
                0.0,
                PI,
                spec.tolerance(),
            )?;
            Ok(est.value)
        }
        other => Err(Error::UnsupportedDimension(other)),
    }
}

/// Periodic trapezoid rule with doubling; falls back to adaptive
/// Gauss–Kronrod when the integrand is not smooth enough to converge.
fn integrate_circle<F>(f: F, spec: &QuadratureSpec) -> Result<f64>
where
    F: Fn(f64) -> Result<f64>,
{
    let trapezoid = |points: usize| -> Result<f64> {
        let h = TAU / points as f64;
        let mut sum = 0.0;
        for k in 0..points {
            let v = f(h * k as f64)?;
            if !v.is_finite() {
                return Err(Error::Quadrature(format!("angular integrand not finite at φ = {}", h * k as f64)));
            }
            sum += v;
        }
        Ok(sum * h)
    };
    let mut points = 64;
    let mut prev = trapezoid(points)?;
    while points < 4096 {
        points *= 2;
        let next = trapezoid(points)?;
        if (next - prev).abs() <= spec.abs_tol.max(spec.rel_tol * next.abs()) {
            return Ok(next);
        }
        prev = next;
    }
    Ok(adaptive(f, 0.0, TAU, spec.tolerance())?.value)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn dim(n: u32) -> Dimension {
        Dimension::new(n).unwrap()
    }

    fn chi(r0: f64) -> RadialProfile {
        RadialProfile::new(move |r| if r <= r0 { 1.0 } else { 0.0 }, Tail::compact(r0)).unwrap()
    }

    fn close(a: f64, b: f64, tol: f64) -> bool {
        (a - b).abs() <= tol * b.abs().max(1e-300)
    }

    #[test]
    fn spec_validation() {
        assert!(QuadratureSpec::default().validate().is_ok());
        assert!(QuadratureSpec::new(0.0, 1e-14, 10, 1e-12).is_err());
        assert!(QuadratureSpec::new(1e-10, 1e-14, 0, 1e-12).is_err());
        assert!(QuadratureSpec::new(1e-10, -1.0, 10, 1e-12).is_err());
    }

    #[test]
    fn radial_examples() {
        let spec = QuadratureSpec::default();
        assert!(close(integrate_radial(&chi(1.0), dim(2), &spec).unwrap(), 0.5, 1e-12));
        // e^{-r} <= 40!·r^{-40}
        let exp = RadialProfile::new(
            |r: f64| (-r).exp(),
            Tail::bound(1.0, crate::specfun::gamma_fn(41.0).unwrap(), -40.0),
        )
        .unwrap();
        assert!(close(integrate_radial(&exp, dim(2), &spec).unwrap(), 1.0, 1e-10));
        let tail = RadialProfile::new(
            |r: f64| if r > 1.0 { r.powf(-2.2) } else { 0.0 },
            Tail::power(1.0, [PowerTerm::new(1.0, -2.2)]),
        )
        .unwrap();
        assert!(close(integrate_radial(&tail, dim(2), &spec).unwrap(), 5.0, 1e-12));
    }

    #[test]
    fn cumulative_examples() {
        let spec = QuadratureSpec::default();
        let c = chi(1.0);
        assert!(close(cumulative_radial(&c, dim(2), 0.5, &spec).unwrap(), 0.125, 1e-12));
        assert!(close(cumulative_radial(&c, dim(2), 2.0, &spec).unwrap(), 0.5, 1e-12));
        let lin = RadialProfile::new(|s| s, Tail::bound(1.0, 1.0, 1.0)).unwrap();
        assert!(close(cumulative_radial(&lin, dim(2), 1.0, &spec).unwrap(), 1.0 / 3.0, 1e-12));
        assert_eq!(cumulative_radial(&c, dim(2), 0.0, &spec).unwrap(), 0.0);
        assert!(cumulative_radial(&c, dim(2), -1.0, &spec).is_err());
    }

    #[test]
    fn divergence_is_detected_from_metadata() {
        let spec = QuadratureSpec::default();
        let slow = RadialProfile::new(
            |r: f64| if r > 1.0 { 1.0 / r } else { 0.0 },
            Tail::power(1.0, [PowerTerm::new(1.0, -1.0)]),
        )
        .unwrap();
        assert!(matches!(integrate_radial(&slow, dim(2), &spec), Err(Error::Domain(_))));
        let singular = chi(1.0).with_decay_zero(-2.5).unwrap();
        assert!(matches!(integrate_radial(&singular, dim(2), &spec), Err(Error::Domain(_))));
        let growing = RadialProfile::new(|r| r, Tail::bound(1.0, 1.0, 1.0)).unwrap();
        assert!(matches!(integrate_radial(&growing, dim(2), &spec), Err(Error::Domain(_))));
    }

    #[test]
    fn integrable_singularity_at_origin() {
        let spec = QuadratureSpec::default();
        // ∫₀¹ r^{-1.5} r dr = 2
        let f = RadialProfile::new(|r: f64| if r <= 1.0 { r.powf(-1.5) } else { 0.0 }, Tail::compact(1.0))
            .unwrap()
            .with_decay_zero(-1.5)
            .unwrap();
        assert!(close(integrate_radial(&f, dim(2), &spec).unwrap(), 2.0, 1e-10));
    }

    #[test]
    fn slowly_decaying_power_tail_with_correction() {
        let spec = QuadratureSpec::default();
        // |r^{-1.001} − r^{-2}|² r dr on [1, ∞), closed form
        let a = 1.001_f64;
        let f = RadialProfile::new(
            move |r: f64| if r > 1.0 { r.powf(-a) - r.powi(-2) } else { 0.0 },
            Tail::power(1.0, [PowerTerm::new(1.0, -a), PowerTerm::new(-1.0, -2.0)]),
        )
        .unwrap();
        let exact = 1.0 / (2.0 * a - 2.0) - 2.0 / (a + 2.0 - 2.0) + 1.0 / 2.0;
        let got = integrate_abs_pow(&f, 2.0, dim(2), &spec).unwrap();
        assert!(close(got, exact, 1e-10), "{got} vs {exact}");
    }

    #[test]
    fn sphere_examples() {
        let spec = QuadratureSpec::default();
        let one = AngularProfile::circle(|_| 1.0);
        assert!(close(integrate_sphere(&one, dim(2), &spec).unwrap(), TAU, 1e-14));
        let cos2 = AngularProfile::circle(|phi: f64| phi.cos().powi(2));
        assert!(close(integrate_sphere(&cos2, dim(2), &spec).unwrap(), PI, 1e-12));
        let one3 = AngularProfile::sphere(|_, _| 1.0);
        assert!(close(integrate_sphere(&one3, dim(3), &spec).unwrap(), 4.0 * PI, 1e-12));
        let abs_cos = AngularProfile::circle(|phi: f64| phi.cos().abs());
        assert!(close(integrate_sphere(&abs_cos, dim(2), &spec).unwrap(), 4.0, 1e-10));
        // ∫ cos²θ dS = 4π/3
        let z2 = AngularProfile::sphere(|theta: f64, _| theta.cos().powi(2));
        assert!(close(integrate_sphere(&z2, dim(3), &spec).unwrap(), 4.0 * PI / 3.0, 1e-10));
        assert!(matches!(
            integrate_sphere(&AngularProfile::circle(|_| 1.0), dim(4), &spec),
            Err(Error::UnsupportedDimension(4))
        ));
        assert!(close(
            integrate_sphere(&AngularProfile::constant(1.0), dim(6), &spec).unwrap(),
            sphere_measure(dim(6)),
            1e-14
        ));
    }
}
