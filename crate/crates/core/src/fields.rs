//! Test functions and extremizer families, with their closed-form norms.

use rand::Rng;

use crate::error::{domain, Result};
use crate::quadrature::{AngularProfile, PowerTerm, RadialProfile, Tail};
use crate::specfun::{sphere_measure, Dimension};

fn check_p(p: f64) -> Result<()> {
    if !(p.is_finite() && p > 1.0) {
        return domain(format!("exponent must lie in (1, ∞), got {p}"));
    }
    Ok(())
}

/// The family `f_ε(x) = |x|^{−(n/p+ε)}·χ_{|x|>1}`, `0 < ε < 1`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ExtremizerFamilyEps {
    epsilon: f64,
    p: f64,
    n: Dimension,
}

impl ExtremizerFamilyEps {
    pub fn new(epsilon: f64, p: f64, n: Dimension) -> Result<Self> {
        if !(epsilon > 0.0 && epsilon < 1.0) {
            return domain(format!("ε must lie in (0, 1), got {epsilon}"));
        }
        check_p(p)?;
        Ok(ExtremizerFamilyEps { epsilon, p, n })
    }

    pub fn epsilon(&self) -> f64 {
        self.epsilon
    }

    pub fn p(&self) -> f64 {
        self.p
    }

    pub fn n(&self) -> Dimension {
        self.n
    }

    /// Decay exponent `n/p + ε`.
    pub fn exponent(&self) -> f64 {
        self.n.as_f64() / self.p + self.epsilon
    }

    pub fn profile(&self) -> RadialProfile {
        let a = self.exponent();
        RadialProfile::new(
            move |r: f64| if r > 1.0 { r.powf(-a) } else { 0.0 },
            Tail::power(1.0, [PowerTerm::new(1.0, -a)]),
        )
        .expect("valid tail")
    }

    /// `‖f_ε‖ = ω_n^{1/p̄} / (pε)^{1/p}` in `L^p_{|x|}L^{p̄}_θ`.
    pub fn closed_form_norm(&self, p_bar: f64) -> f64 {
        sphere_measure(self.n).powf(1.0 / p_bar) / (self.p * self.epsilon).powf(1.0 / self.p)
    }
}

pub fn make_f_eps(epsilon: f64, p: f64, n: Dimension) -> Result<RadialProfile> {
    Ok(ExtremizerFamilyEps::new(epsilon, p, n)?.profile())
}

/// `f₀(x) = (1 + |x|^{qβ})^{−(1 + n/(qβ))}`, the extremizer of the
/// fractional operator.
pub fn make_f0_fractional(q: f64, beta: f64, n: Dimension) -> Result<RadialProfile> {
    check_p(q)?;
    if !(beta > 0.0 && beta < n.as_f64()) {
        return domain(format!("β must lie in (0, {n}), got {beta}"));
    }
    let s = q * beta;
    let power = 1.0 + n.as_f64() / s;
    // (1 + r^s)^{−power} <= r^{−s·power} = r^{−(s+n)}
    RadialProfile::new(
        move |r: f64| (1.0 + r.powf(s)).powf(-power),
        Tail::bound(1.0, 1.0, -(s + n.as_f64())),
    )
}

/// Indicator of `[0, r]`.
pub fn make_chi_ball(r: f64) -> Result<RadialProfile> {
    if !(r.is_finite() && r > 0.0) {
        return domain(format!("ball radius must be positive, got {r}"));
    }
    RadialProfile::new(move |s| if s <= r { 1.0 } else { 0.0 }, Tail::compact(r))
}

/// `‖χ_{[0,r]}(|·|)‖ = ω_n^{1/p̄} r^{n/p} / n^{1/p}`.
pub fn chi_ball_closed_form_norm(r: f64, p: f64, p_bar: f64, n: Dimension) -> f64 {
    let nf = n.as_f64();
    sphere_measure(n).powf(1.0 / p_bar) * r.powf(nf / p) / nf.powf(1.0 / p)
}

/// `f(rθ) = R(r)·A(θ)`.
#[derive(Debug, Clone)]
pub struct SeparableField {
    pub radial: RadialProfile,
    pub angular: AngularProfile,
}

impl SeparableField {
    /// Value at radius `r` and angle tuple `angles` (`[φ]` or `[θ, φ]`).
    pub fn eval(&self, r: f64, angles: &[f64]) -> f64 {
        self.radial.eval(r) * self.angular.eval(angles)
    }
}

pub fn make_separable(radial: RadialProfile, angular: AngularProfile) -> SeparableField {
    SeparableField { radial, angular }
}

/// Seeded random non-negative profiles: up to three pieces `c·r^a·χ_{[r₁,r₂]}`
/// plus an optional power tail `c·r^a·χ_{r>r₁}`, admissible for exponent `p`
/// (finite `L^p(r^{n−1}dr)` norm).
#[derive(Debug, Clone, Copy)]
pub struct RandomProfileFamily {
    pub n: Dimension,
    pub p: f64,
}

#[derive(Debug, Clone, Copy)]
struct Piece {
    coef: f64,
    exponent: f64,
    lo: f64,
    hi: f64,
}

impl RandomProfileFamily {
    pub fn new(n: Dimension, p: f64) -> Result<Self> {
        check_p(p)?;
        Ok(RandomProfileFamily { n, p })
    }

    pub fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> RadialProfile {
        let critical = self.n.as_f64() / self.p;
        let count = rng.gen_range(1..=3);
        let mut pieces = Vec::with_capacity(count + 1);
        for _ in 0..count {
            let at_origin = rng.gen_bool(0.3);
            let lo = if at_origin { 0.0 } else { rng.gen_range(0.05..2.0) };
            let hi = lo + rng.gen_range(0.1..3.0);
            let exponent = if at_origin {
                rng.gen_range(-critical + 0.1..2.0)
            } else {
                rng.gen_range(-3.0..3.0)
            };
            pieces.push(Piece {
                coef: rng.gen_range(0.1..2.0),
                exponent,
                lo,
                hi,
            });
        }
        let tail = if rng.gen_bool(0.5) {
            Some(Piece {
                coef: rng.gen_range(0.1..2.0),
                exponent: rng.gen_range(-critical - 2.0..-critical - 0.1),
                lo: rng.gen_range(0.5..3.0),
                hi: f64::INFINITY,
            })
        } else {
            None
        };
        if let Some(t) = tail {
            pieces.push(t);
        }

        let decay_zero = pieces
            .iter()
            .filter(|p| p.lo == 0.0)
            .map(|p| p.exponent)
            .fold(0.0_f64, f64::min);
        let support = pieces.iter().filter(|p| p.hi.is_finite()).map(|p| p.hi).fold(0.0_f64, f64::max);
        let tail_spec = match tail {
            Some(t) => Tail::power(support.max(t.lo), [PowerTerm::new(t.coef, t.exponent)]),
            None => Tail::compact(support),
        };
        let breakpoints: Vec<f64> = pieces
            .iter()
            .flat_map(|p| [p.lo, p.hi])
            .filter(|b| b.is_finite() && *b > 0.0)
            .collect();
        let eval_pieces = pieces.clone();
        RadialProfile::new(
            move |r: f64| {
                eval_pieces
                    .iter()
                    .filter(|p| r > p.lo && r <= p.hi)
                    .map(|p| p.coef * r.powf(p.exponent))
                    .sum()
            },
            tail_spec,
        )
        .and_then(|f| f.with_breakpoints(breakpoints))
        .and_then(|f| f.with_decay_zero(decay_zero))
        .expect("sampled metadata is valid")
    }
}

/// Random bounded angular factor: `1 + Σ_{k≤3} (a_k cos kφ + b_k sin kφ)` on
/// the circle, or a low-degree polynomial in the Cartesian coordinates on S².
pub fn random_angular<R: Rng + ?Sized>(n: Dimension, rng: &mut R) -> Result<AngularProfile> {
    match n.get() {
        2 => {
            let coefs: Vec<(f64, f64)> = (0..3)
                .map(|_| (rng.gen_range(-0.6..0.6), rng.gen_range(-0.6..0.6)))
                .collect();
            Ok(AngularProfile::circle(move |phi: f64| {
                1.0 + coefs
                    .iter()
                    .enumerate()
                    .map(|(k, (a, b))| {
                        let m = (k + 1) as f64;
                        a * (m * phi).cos() + b * (m * phi).sin()
                    })
                    .sum::<f64>()
            }))
        }
        3 => {
            let c: Vec<f64> = (0..4).map(|_| rng.gen_range(-0.8..0.8)).collect();
            Ok(AngularProfile::sphere(move |theta: f64, phi: f64| {
                let (x, y, z) = (theta.sin() * phi.cos(), theta.sin() * phi.sin(), theta.cos());
                1.0 + c[0] * x + c[1] * y + c[2] * z + c[3] * x * z
            }))
        }
        other => Err(crate::Error::UnsupportedDimension(other)),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::quadrature::QuadratureSpec;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn dim(n: u32) -> Dimension {
        Dimension::new(n).unwrap()
    }

    #[test]
    fn f_eps_values() {
        let f = make_f_eps(0.1, 2.0, dim(2)).unwrap();
        assert_eq!(f.eval(0.5), 0.0);
        assert_eq!(f.eval(1.0), 0.0);
        assert!((f.eval(2.0) - 2f64.powf(-1.1)).abs() < 1e-15);
        assert!((f.eval(2.0) - 0.46651).abs() < 1e-5);
        assert_eq!(f.breakpoints(), &[1.0]);
        assert_eq!(f.decay_zero(), 0.0);
        assert_eq!(f.decay_inf(), -1.1);
        assert!(f.check_decay().is_ok());
    }

    #[test]
    fn f_eps_rejects_bad_parameters() {
        assert!(make_f_eps(0.0, 2.0, dim(2)).is_err());
        assert!(make_f_eps(1.0, 2.0, dim(2)).is_err());
        assert!(make_f_eps(0.5, 1.0, dim(2)).is_err());
        assert!(make_f_eps(0.5, f64::INFINITY, dim(2)).is_err());
    }

    #[test]
    fn f0_values() {
        let f = make_f0_fractional(4.0, 1.0, dim(2)).unwrap();
        assert_eq!(f.eval(0.0), 1.0);
        assert!((f.eval(1.0) - 2f64.powf(-1.5)).abs() < 1e-15);
        assert!((f.eval(2.0) - 17f64.powf(-1.5)).abs() < 1e-15);
        assert!((f.eval(2.0) - 0.014266).abs() < 1e-6);
        assert!(f.check_decay().is_ok());
        // strictly decreasing on a probe grid
        let grid: Vec<f64> = (0..200).map(|k| 0.01 * f64::from(k) * 1.07f64.powi(k)).collect();
        assert!(grid.windows(2).all(|w| f.eval(w[1]) < f.eval(w[0])));
        assert!(make_f0_fractional(1.0, 1.0, dim(2)).is_err());
        assert!(make_f0_fractional(4.0, 2.0, dim(2)).is_err());
        assert!(make_f0_fractional(4.0, 0.0, dim(2)).is_err());
    }

    #[test]
    fn chi_ball_values() {
        let c = make_chi_ball(1.0).unwrap();
        assert_eq!(c.eval(0.5), 1.0);
        assert_eq!(c.eval(1.5), 0.0);
        assert_eq!(c.breakpoints(), &[1.0]);
        assert!(make_chi_ball(0.0).is_err());
        assert!(make_chi_ball(-2.0).is_err());
        assert!(c.check_decay().is_ok());
    }

    #[test]
    fn separable_values() {
        let f = make_separable(make_chi_ball(1.0).unwrap(), AngularProfile::circle(|phi: f64| 1.0 + phi.cos()));
        assert_eq!(f.eval(0.5, &[0.0]), 2.0);
        assert_eq!(f.eval(1.5, &[0.0]), 0.0);
        let g = make_separable(
            RadialProfile::new(|r: f64| (-r).exp(), Tail::bound(1.0, 1.0, 0.0)).unwrap(),
            AngularProfile::constant(1.0),
        );
        assert_eq!(g.eval(0.7, &[1.0]), (-0.7f64).exp());
    }

    #[test]
    fn random_profiles_are_reproducible_and_admissible() {
        let fam = RandomProfileFamily::new(dim(2), 2.0).unwrap();
        let mut a = ChaCha8Rng::seed_from_u64(7);
        let mut b = ChaCha8Rng::seed_from_u64(7);
        let spec = QuadratureSpec::default();
        for _ in 0..10 {
            let f = fam.sample(&mut a);
            let g = fam.sample(&mut b);
            for r in [0.01, 0.3, 1.0, 2.5, 7.0] {
                assert_eq!(f.eval(r), g.eval(r));
                assert!(f.eval(r) >= 0.0);
            }
            assert!(f.check_decay().is_ok());
            let norm = crate::quadrature::integrate_abs_pow(&f, 2.0, dim(2), &spec).unwrap();
            assert!(norm.is_finite() && norm > 0.0);
        }
    }
}
