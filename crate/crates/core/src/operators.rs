//! The Hardy operator, its dual and their fractional versions acting on
//! radial profiles, plus the spherical-average reduction and a direct
//! polar-coordinates oracle for non-radial fields.
//!
//! On radial inputs all four operators are one-dimensional:
//!
//! * `H_β f(r) = κ_β r^{β−n} ∫₀^r f(s) s^{n−1} ds`,
//! * `H*_β f(r) = κ_β ∫_r^∞ f(s) s^{β−1} ds`,
//!
//! with `κ_β = ω_n Ω_n^{β/n−1}`; `β = 0` gives `H` and `H*` (`κ₀ = n`).

use std::collections::HashMap;
use std::sync::Mutex;

use crate::error::{domain, Error, Result};
use crate::fields::SeparableField;
use crate::quadrature::{
    integrate_moment, integrate_sphere, integrate_sphere_with, Moment, PowerTerm, QuadratureSpec, RadialProfile,
    Tail,
};
use crate::specfun::{ball_volume, sphere_measure, Dimension};

/// Order `0 < β < n` of the fractional operators.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FractionalOrder {
    beta: f64,
    n: Dimension,
}

impl FractionalOrder {
    pub fn new(beta: f64, n: Dimension) -> Result<Self> {
        if !(beta > 0.0 && beta < n.as_f64()) {
            return domain(format!("fractional order must lie in (0, {n}), got {beta}"));
        }
        Ok(FractionalOrder { beta, n })
    }

    pub fn beta(&self) -> f64 {
        self.beta
    }

    pub fn n(&self) -> Dimension {
        self.n
    }
}

/// `κ_β = ω_n Ω_n^{β/n − 1}`.
fn kernel_constant(n: Dimension, beta: f64) -> f64 {
    sphere_measure(n) * ball_volume(n).powf(beta / n.as_f64() - 1.0)
}

/// Memoized evaluation keyed by the bit pattern of the radius.
#[derive(Default)]
struct Memo(Mutex<HashMap<u64, f64>>);

impl Memo {
    fn get_or_try(&self, r: f64, compute: impl FnOnce() -> Result<f64>) -> Result<f64> {
        let key = r.to_bits();
        if let Some(v) = self.0.lock().expect("memo lock").get(&key) {
            return Ok(*v);
        }
        let v = compute()?;
        self.0.lock().expect("memo lock").insert(key, v);
        Ok(v)
    }
}

/// `H f` for radial `f`: the mean of `f` over the ball of radius `r`.
pub fn hardy_radial(f: &RadialProfile, n: Dimension, spec: &QuadratureSpec) -> Result<RadialProfile> {
    averaging(f, n, 0.0, spec)
}

/// `H_β f` for radial `f`.
pub fn fractional_hardy_radial(
    f: &RadialProfile,
    order: FractionalOrder,
    spec: &QuadratureSpec,
) -> Result<RadialProfile> {
    averaging(f, order.n, order.beta, spec)
}

/// `H* f` for radial `f`.
pub fn dual_hardy_radial(f: &RadialProfile, n: Dimension, spec: &QuadratureSpec) -> Result<RadialProfile> {
    tail_integral(f, n, 0.0, spec)
}

/// `H*_β f` for radial `f`.
pub fn dual_fractional_hardy_radial(
    f: &RadialProfile,
    order: FractionalOrder,
    spec: &QuadratureSpec,
) -> Result<RadialProfile> {
    tail_integral(f, order.n, order.beta, spec)
}

fn averaging(f: &RadialProfile, n: Dimension, beta: f64, spec: &QuadratureSpec) -> Result<RadialProfile> {
    spec.validate()?;
    let nf = n.as_f64();
    let a0 = f.decay_zero();
    if a0 + nf <= 0.0 {
        return domain(format!("f ~ r^{a0} is not locally integrable against r^{}", nf - 1.0));
    }
    let kappa = kernel_constant(n, beta);
    let inner = spec.inner();
    let cumulative = Moment::signed(nf - 1.0);

    let out_tail = match f.tail() {
        Tail::Compact { support } => {
            let mass = integrate_moment(f, cumulative, 0.0, Some(*support), &inner)?;
            Tail::power(*support, [PowerTerm::new(kappa * mass, beta - nf)])
        }
        Tail::Power { from, terms } if terms.iter().all(|t| (t.exponent + nf).abs() > 1e-9) => {
            let mass = integrate_moment(f, cumulative, 0.0, Some(*from), &inner)?;
            let mut constant = mass;
            let mut out = Vec::with_capacity(terms.len() + 1);
            for t in terms {
                let k = t.exponent + nf;
                constant -= t.coef * from.powf(k) / k;
                out.push(PowerTerm::new(kappa * t.coef / k, t.exponent + beta));
            }
            out.push(PowerTerm::new(kappa * constant, beta - nf));
            Tail::power(*from, out)
        }
        tail => {
            let (from, mut scale, mut exponent) = tail.as_bound();
            if (exponent + nf).abs() <= 1e-9 {
                // r^{-n} <= from^{-0.01} r^{-n+0.01} on [from, ∞)
                scale *= from.powf(-0.01);
                exponent += 0.01;
            }
            let abs_mass = integrate_moment(f, Moment::abs_pow(1.0, nf - 1.0), 0.0, Some(from), &inner)?;
            let k = exponent + nf;
            if k < 0.0 {
                Tail::bound(from, kappa * (abs_mass + scale * from.powf(k) / -k), beta - nf)
            } else {
                Tail::bound(from, kappa * (abs_mass * from.powf(-k) + scale / k), exponent + beta)
            }
        }
    };

    let exact = match &out_tail {
        Tail::Power { from, terms } => Some((*from, terms.clone())),
        _ => None,
    };
    let source = f.clone();
    let memo = Memo::default();
    let limit_at_origin = if beta == 0.0 && a0 >= 0.0 {
        Some(f.try_eval(0.0)?)
    } else if a0 + beta > 0.0 {
        Some(0.0)
    } else {
        None
    };
    let eval = move |r: f64| -> Result<f64> {
        if r == 0.0 {
            return limit_at_origin.ok_or_else(|| Error::Domain("operator output is singular at the origin".into()));
        }
        if let Some((from, terms)) = &exact {
            if r >= *from {
                return Ok(Tail::power_value(terms, r));
            }
        }
        memo.get_or_try(r, || {
            let mass = integrate_moment(&source, cumulative, 0.0, Some(r), &inner)?;
            Ok(kappa * r.powf(beta - nf) * mass)
        })
    };
    RadialProfile::from_fallible(eval, out_tail)?
        .with_breakpoints(f.breakpoints().iter().copied())?
        .with_decay_zero(a0 + beta)
}

fn tail_integral(f: &RadialProfile, n: Dimension, beta: f64, spec: &QuadratureSpec) -> Result<RadialProfile> {
    spec.validate()?;
    let kappa = kernel_constant(n, beta);
    let weight = Moment::signed(beta - 1.0);
    let out_tail = match f.tail() {
        Tail::Compact { support } => Tail::compact(*support),
        Tail::Power { from, terms } => {
            let mut out = Vec::with_capacity(terms.len());
            for t in terms {
                let k = t.exponent + beta;
                if k >= 0.0 {
                    return domain(format!("∫^∞ s^{} s^{} ds diverges", t.exponent, beta - 1.0));
                }
                out.push(PowerTerm::new(kappa * t.coef / -k, k));
            }
            Tail::power(*from, out)
        }
        Tail::Bound { from, scale, exponent } => {
            let k = exponent + beta;
            if k >= 0.0 {
                return domain(format!("tail bound r^{exponent} does not make ∫^∞ f s^{} ds converge", beta - 1.0));
            }
            Tail::bound(*from, kappa * scale / -k, k)
        }
    };

    let local = f.decay_zero() + beta;
    let decay_zero = if local < 0.0 {
        local
    } else if local > 0.0 {
        0.0
    } else {
        // logarithmic growth at the origin
        -0.01
    };

    let exact = match &out_tail {
        Tail::Power { from, terms } => Some((*from, terms.clone())),
        Tail::Compact { support } => Some((*support, Vec::new())),
        _ => None,
    };
    let source = f.clone();
    let inner = spec.inner();
    let memo = Memo::default();
    let eval = move |r: f64| -> Result<f64> {
        if r == 0.0 && local <= 0.0 {
            return Err(Error::Domain("operator output is singular at the origin".into()));
        }
        if let Some((from, terms)) = &exact {
            if r >= *from {
                return Ok(Tail::power_value(terms, r));
            }
        }
        memo.get_or_try(r, || Ok(kappa * integrate_moment(&source, weight, r, None, &inner)?))
    };
    RadialProfile::from_fallible(eval, out_tail)?
        .with_breakpoints(f.breakpoints().iter().copied())?
        .with_decay_zero(decay_zero)
}

/// The radial function `r ↦ (1/ω_n) ∫_{S^{n−1}} F(rθ) dθ`; for separable
/// `F = R·A` this is `R` times the mean of `A`.
pub fn spherical_average(field: &SeparableField, n: Dimension, spec: &QuadratureSpec) -> Result<RadialProfile> {
    let mean = integrate_sphere(&field.angular, n, spec)? / sphere_measure(n);
    Ok(field.radial.scaled(mean))
}

/// `H F(x)` evaluated by direct quadrature over the ball `|y| < |x|` in polar
/// coordinates, without any radial reduction. Only `n ∈ {2, 3}`.
pub fn hardy_direct_oracle(field: &SeparableField, x: &[f64], spec: &QuadratureSpec) -> Result<f64> {
    let n = Dimension::new(x.len() as u32)?;
    if n.get() > 3 {
        return Err(Error::UnsupportedDimension(n.get()));
    }
    field.angular.check_dimension(n.get())?;
    let radius = x.iter().map(|c| c * c).sum::<f64>().sqrt();
    if !(radius > 0.0 && radius.is_finite()) {
        return domain("the oracle is defined for x ≠ 0 only");
    }
    let nf = n.as_f64();
    let inner = spec.inner();
    let shell = |s: f64| -> Result<f64> {
        let radial = field.radial.try_eval(s)?;
        let surface = integrate_sphere_with(n, |angles| Ok(radial * field.angular.eval(angles)), &inner)?;
        Ok(surface * s.powf(nf - 1.0))
    };
    let mut cuts: Vec<f64> = field
        .radial
        .breakpoints()
        .iter()
        .copied()
        .filter(|b| *b < radius)
        .collect();
    cuts.push(radius);
    let total = crate::quadrature::integrate_pieces(shell, 0.0, &cuts, spec)?;
    Ok(total / (ball_volume(n) * radius.powf(nf)))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fields::{make_chi_ball, make_f_eps, make_separable};
    use crate::quadrature::AngularProfile;
    use std::f64::consts::PI;

    fn dim(n: u32) -> Dimension {
        Dimension::new(n).unwrap()
    }

    fn close(a: f64, b: f64, tol: f64) -> bool {
        (a - b).abs() <= tol * b.abs().max(1.0)
    }

    fn power_on_ball(alpha: f64) -> RadialProfile {
        RadialProfile::new(move |s: f64| s.powf(alpha), Tail::bound(1.0, 1.0, alpha))
            .unwrap()
            .with_decay_zero(alpha.min(0.0))
            .unwrap()
    }

    #[test]
    fn hardy_of_ball_indicator() {
        let spec = QuadratureSpec::default();
        for n in [2, 3, 5] {
            let h = hardy_radial(&make_chi_ball(1.0).unwrap(), dim(n), &spec).unwrap();
            for r in [0.1f64, 0.5, 0.999, 1.0, 1.5, 4.0] {
                let expected = if r <= 1.0 { 1.0 } else { r.powi(-(n as i32)) };
                assert!(close(h.eval(r), expected, 1e-12), "n={n} r={r}");
            }
            assert_eq!(h.eval(0.0), 1.0);
        }
    }

    #[test]
    fn hardy_of_power() {
        let spec = QuadratureSpec::default();
        for alpha in [-1.2, 0.5, 2.0] {
            let h = hardy_radial(&power_on_ball(alpha), dim(2), &spec).unwrap();
            for r in [0.2, 0.9] {
                assert!(close(h.eval(r), 2.0 * r.powf(alpha) / (2.0 + alpha), 1e-10));
            }
        }
        assert!(hardy_radial(&power_on_ball(-1.2).with_decay_zero(-2.0).unwrap(), dim(2), &spec).is_err());
    }

    #[test]
    fn hardy_of_f_eps_matches_shell_formula() {
        let spec = QuadratureSpec::default();
        let (eps, p, n) = (0.1, 2.0, 2u32);
        let a = f64::from(n) / p + eps;
        let h = hardy_radial(&make_f_eps(eps, p, dim(n)).unwrap(), dim(n), &spec).unwrap();
        assert_eq!(h.eval(0.7), 0.0);
        for r in [1.5f64, 3.0, 100.0] {
            // (1/Ω) r^{-a} ∫_{1/r<|y|<1} |y|^{-a} dy = (ω/Ω) r^{-a} (1 − r^{a−n})/(n − a)
            let shell = sphere_measure(dim(n)) / ball_volume(dim(n)) * r.powf(-a) * (1.0 - r.powf(a - 2.0)) / (2.0 - a);
            assert!(close(h.eval(r), shell, 1e-12));
        }
    }

    #[test]
    fn dual_examples() {
        let spec = QuadratureSpec::default();
        for n in [2, 3] {
            let nf = f64::from(n);
            let d = dual_hardy_radial(&make_chi_ball(1.0).unwrap(), dim(n), &spec).unwrap();
            assert!(close(d.eval(0.25), nf * 4f64.ln(), 1e-10));
            assert_eq!(d.eval(1.0), 0.0);
            assert_eq!(d.eval(3.0), 0.0);
        }
        let a = 1.7;
        let tail = RadialProfile::new(
            move |s: f64| if s > 1.0 { s.powf(-a) } else { 0.0 },
            Tail::power(1.0, [PowerTerm::new(1.0, -a)]),
        )
        .unwrap();
        let d = dual_hardy_radial(&tail, dim(3), &spec).unwrap();
        assert!(close(d.eval(2.0), 3.0 / a * 2f64.powf(-a), 1e-12));
        assert!(close(d.eval(0.5), 3.0 / a, 1e-10));
        let flat = RadialProfile::new(|_| 1.0, Tail::bound(1.0, 1.0, 0.0)).unwrap();
        assert!(dual_hardy_radial(&flat, dim(2), &spec).is_err());
    }

    #[test]
    fn dual_of_exponential() {
        // E₁(1) = 0.219383934395520...
        let spec = QuadratureSpec::default();
        let exp = RadialProfile::new(|s: f64| (-s).exp(), Tail::bound(1.0, crate::specfun::gamma_fn(31.0).unwrap(), -30.0))
            .unwrap();
        let d = dual_hardy_radial(&exp, dim(2), &spec).unwrap();
        assert!(close(d.eval(1.0), 2.0 * 0.219_383_934_395_520_3, 1e-10));
    }

    #[test]
    fn fractional_examples() {
        let spec = QuadratureSpec::default();
        let order = FractionalOrder::new(1.0, dim(2)).unwrap();
        let h = fractional_hardy_radial(&make_chi_ball(1.0).unwrap(), order, &spec).unwrap();
        for r in [0.1, 0.5, 1.0] {
            assert!(close(h.eval(r), PI.sqrt() * r, 1e-12));
        }
        assert!(close(h.eval(2.0), PI.sqrt() / 2.0, 1e-12));
        assert!(FractionalOrder::new(0.0, dim(2)).is_err());
        assert!(FractionalOrder::new(2.0, dim(2)).is_err());
    }

    #[test]
    fn fractional_tends_to_hardy_as_beta_vanishes() {
        let spec = QuadratureSpec::default();
        let f = make_f_eps(0.3, 2.0, dim(3))
            .unwrap()
            .plus(&make_chi_ball(2.0).unwrap());
        let order = FractionalOrder::new(1e-12, dim(3)).unwrap();
        let hb = fractional_hardy_radial(&f, order, &spec).unwrap();
        let h = hardy_radial(&f, dim(3), &spec).unwrap();
        for r in [0.3, 1.0, 1.7, 2.5, 10.0] {
            assert!((hb.eval(r) - h.eval(r)).abs() <= 1e-9 * h.eval(r).abs().max(1.0));
        }
    }

    #[test]
    fn dual_fractional_examples() {
        let spec = QuadratureSpec::default();
        let order = FractionalOrder::new(1.0, dim(2)).unwrap();
        let d = dual_fractional_hardy_radial(&make_chi_ball(1.0).unwrap(), order, &spec).unwrap();
        for r in [0.0, 0.25, 0.8] {
            assert!(close(d.eval(r), 2.0 * PI.sqrt() * (1.0 - r), 1e-10));
        }
        assert_eq!(d.eval(1.5), 0.0);
        let a = 2.5;
        let tail = RadialProfile::new(
            move |s: f64| if s > 1.0 { s.powf(-a) } else { 0.0 },
            Tail::power(1.0, [PowerTerm::new(1.0, -a)]),
        )
        .unwrap();
        let d = dual_fractional_hardy_radial(&tail, order, &spec).unwrap();
        assert!(close(d.eval(1.0), 2.0 * PI.sqrt() / (a - 1.0), 1e-12));
        let exp = RadialProfile::new(|s: f64| (-s).exp(), Tail::bound(1.0, crate::specfun::gamma_fn(31.0).unwrap(), -30.0))
            .unwrap();
        let d = dual_fractional_hardy_radial(&exp, order, &spec).unwrap();
        assert!(close(d.eval(0.0), 2.0 * PI.sqrt(), 1e-10));
    }

    #[test]
    fn spherical_average_examples() {
        let spec = QuadratureSpec::default();
        let exp = RadialProfile::new(|s: f64| (-s).exp(), Tail::bound(1.0, 1.0, 0.0)).unwrap();
        let f = make_separable(exp.clone(), AngularProfile::circle(|phi: f64| 1.0 + phi.cos()));
        let g = spherical_average(&f, dim(2), &spec).unwrap();
        for r in [0.0, 0.5, 3.0] {
            assert!(close(g.eval(r), (-r).exp(), 1e-13));
        }
        let radial = make_separable(exp, AngularProfile::constant(1.0));
        let g = spherical_average(&radial, dim(4), &spec).unwrap();
        assert_eq!(g.eval(1.3), (-1.3f64).exp());
        let f = make_separable(make_chi_ball(1.0).unwrap(), AngularProfile::circle(|phi: f64| phi.cos().abs()));
        let g = spherical_average(&f, dim(2), &spec).unwrap();
        assert!(close(g.eval(0.5), 2.0 / PI, 1e-10));
        assert_eq!(g.eval(1.5), 0.0);
    }

    #[test]
    fn oracle_examples() {
        let spec = QuadratureSpec::default();
        let f = make_separable(make_chi_ball(1.0).unwrap(), AngularProfile::constant(1.0));
        assert!(close(hardy_direct_oracle(&f, &[0.3, 0.4], &spec).unwrap(), 1.0, 1e-10));
        let f = make_separable(make_chi_ball(1.0).unwrap(), AngularProfile::circle(|phi: f64| 1.0 + phi.cos()));
        assert!(close(hardy_direct_oracle(&f, &[2.0, 0.0], &spec).unwrap(), 0.25, 1e-10));
        assert!(hardy_direct_oracle(&f, &[0.0, 0.0], &spec).is_err());
        assert!(matches!(
            hardy_direct_oracle(&f, &[1.0, 0.0, 0.0, 0.0], &spec),
            Err(Error::UnsupportedDimension(4))
        ));
        assert!(hardy_direct_oracle(&f, &[1.0, 0.0, 0.0], &spec).is_err());
    }
}
