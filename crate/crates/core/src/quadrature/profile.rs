//! Radial and angular profiles: closures plus the metadata quadrature needs.

use std::fmt;
use std::sync::Arc;

use crate::error::{domain, Error, Result};

type RadialFn = dyn Fn(f64) -> Result<f64> + Send + Sync;

/// One term `coef · r^exponent` of an exact power-law tail.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PowerTerm {
    pub coef: f64,
    pub exponent: f64,
}

impl PowerTerm {
    pub fn new(coef: f64, exponent: f64) -> Self {
        PowerTerm { coef, exponent }
    }
}

/// Behaviour of a profile beyond its last breakpoint.
#[derive(Debug, Clone, PartialEq)]
pub enum Tail {
    /// The profile vanishes for `r > support`.
    Compact { support: f64 },
    /// For `r >= from` the profile equals `Σ coef·r^exponent` exactly.
    Power { from: f64, terms: Vec<PowerTerm> },
    /// For `r >= from`, `|f(r)| <= scale · r^exponent`.
    Bound { from: f64, scale: f64, exponent: f64 },
}

impl Tail {
    pub fn compact(support: f64) -> Self {
        Tail::Compact { support }
    }

    /// Exact power-law tail; equal exponents are merged, zero terms dropped and
    /// the terms ordered by decreasing exponent.
    pub fn power(from: f64, terms: impl IntoIterator<Item = PowerTerm>) -> Self {
        Tail::Power {
            from,
            terms: normalize_terms(terms),
        }
    }

    pub fn bound(from: f64, scale: f64, exponent: f64) -> Self {
        Tail::Bound {
            from,
            scale,
            exponent,
        }
    }

    /// Radius at which the tail description takes over.
    pub fn start(&self) -> f64 {
        match *self {
            Tail::Compact { support } => support,
            Tail::Power { from, .. } | Tail::Bound { from, .. } => from,
        }
    }

    /// Exponent `a∞` with `|f(r)| = O(r^{a∞})` as `r → ∞`; `-∞` for compact support.
    pub fn decay_inf(&self) -> f64 {
        match self {
            Tail::Compact { .. } => f64::NEG_INFINITY,
            Tail::Power { terms, .. } => terms.first().map_or(f64::NEG_INFINITY, |t| t.exponent),
            Tail::Bound { exponent, .. } => *exponent,
        }
    }

    fn validate(&self) -> Result<()> {
        let start = self.start();
        if !(start.is_finite() && start >= 0.0) {
            return domain(format!("tail must start at a finite radius >= 0, got {start}"));
        }
        match self {
            Tail::Compact { .. } => Ok(()),
            Tail::Power { terms, .. } => {
                if terms.iter().any(|t| !t.coef.is_finite() || !t.exponent.is_finite()) {
                    return domain("power tail terms must be finite");
                }
                if start == 0.0 && terms.iter().any(|t| t.exponent < 0.0) {
                    return domain("a power tail with negative exponents must start at r > 0");
                }
                Ok(())
            }
            Tail::Bound { scale, exponent, .. } => {
                if !(scale.is_finite() && *scale >= 0.0 && exponent.is_finite()) {
                    return domain("tail bound must have finite non-negative scale and finite exponent");
                }
                if start == 0.0 && *exponent < 0.0 {
                    return domain("a decaying tail bound must start at r > 0");
                }
                Ok(())
            }
        }
    }

    /// Value of an exact power tail at `r`.
    pub(crate) fn power_value(terms: &[PowerTerm], r: f64) -> f64 {
        terms.iter().map(|t| t.coef * r.powf(t.exponent)).sum()
    }

    /// Upper bound `(scale, exponent)` for `|f|` on `[from, ∞)`.
    pub(crate) fn as_bound(&self) -> (f64, f64, f64) {
        match self {
            Tail::Compact { support } => (*support, 0.0, 0.0),
            Tail::Power { from, terms } => {
                let lead = terms.first().map_or(0.0, |t| t.exponent);
                let scale = terms
                    .iter()
                    .map(|t| t.coef.abs() * from.powf(t.exponent - lead))
                    .sum();
                (*from, scale, lead)
            }
            Tail::Bound {
                from,
                scale,
                exponent,
            } => (*from, *scale, *exponent),
        }
    }

    fn scaled(&self, c: f64) -> Tail {
        match self {
            Tail::Compact { support } => Tail::compact(*support),
            Tail::Power { from, terms } => Tail::power(
                *from,
                terms.iter().map(|t| PowerTerm::new(c * t.coef, t.exponent)),
            ),
            Tail::Bound {
                from,
                scale,
                exponent,
            } => Tail::bound(*from, c.abs() * scale, *exponent),
        }
    }

    fn dilated(&self, t: f64) -> Tail {
        match self {
            Tail::Compact { support } => Tail::compact(support / t),
            Tail::Power { from, terms } => Tail::power(
                from / t,
                terms
                    .iter()
                    .map(|term| PowerTerm::new(term.coef * t.powf(term.exponent), term.exponent)),
            ),
            Tail::Bound {
                from,
                scale,
                exponent,
            } => Tail::bound(from / t, scale * t.powf(*exponent), *exponent),
        }
    }

    fn sum(&self, other: &Tail) -> Tail {
        use Tail::*;
        match (self, other) {
            (Compact { support: a }, Compact { support: b }) => Tail::compact(a.max(*b)),
            (Compact { support }, Power { from, terms }) | (Power { from, terms }, Compact { support }) => {
                Tail::power(from.max(*support), terms.iter().copied())
            }
            (Power { from: f1, terms: t1 }, Power { from: f2, terms: t2 }) => {
                Tail::power(f1.max(*f2), t1.iter().chain(t2.iter()).copied())
            }
            _ => {
                let from = self.start().max(other.start()).max(f64::MIN_POSITIVE);
                let (_, s1, e1) = self.as_bound();
                let (_, s2, e2) = other.as_bound();
                let lead = match (self, other) {
                    (Compact { .. }, _) => e2,
                    (_, Compact { .. }) => e1,
                    _ => e1.max(e2),
                };
                let part = |tail: &Tail, s: f64, e: f64| match tail {
                    Compact { .. } => 0.0,
                    _ => s * from.powf(e - lead),
                };
                Tail::bound(from, part(self, s1, e1) + part(other, s2, e2), lead)
            }
        }
    }
}

pub(crate) fn normalize_terms(terms: impl IntoIterator<Item = PowerTerm>) -> Vec<PowerTerm> {
    let mut sorted: Vec<PowerTerm> = terms.into_iter().collect();
    sorted.sort_by(|a, b| b.exponent.total_cmp(&a.exponent));
    let mut merged: Vec<PowerTerm> = Vec::with_capacity(sorted.len());
    for t in sorted {
        match merged.last_mut() {
            Some(last) if (last.exponent - t.exponent).abs() <= 1e-14 * last.exponent.abs().max(1.0) => {
                last.coef += t.coef;
            }
            _ => merged.push(t),
        }
    }
    merged.retain(|t| t.coef != 0.0);
    merged
}

/// A scalar function of the radius `r >= 0`.
///
/// Besides the closure, a profile carries the radii where it is not smooth,
/// the exponent `a₀` of its behaviour `O(r^{a₀})` near the origin, and a
/// [`Tail`] describing it for large `r`. Quadrature splits at the breakpoints
/// and treats the tail analytically or by a certified truncation.
#[derive(Clone)]
pub struct RadialProfile {
    eval: Arc<RadialFn>,
    breakpoints: Vec<f64>,
    decay_zero: f64,
    tail: Tail,
}

impl fmt::Debug for RadialProfile {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("RadialProfile")
            .field("breakpoints", &self.breakpoints)
            .field("decay_zero", &self.decay_zero)
            .field("tail", &self.tail)
            .finish_non_exhaustive()
    }
}

impl RadialProfile {
    /// Profile from an infallible closure. Breakpoints default to the tail
    /// start (when positive) and `decay_zero` to 0.
    pub fn new<F>(f: F, tail: Tail) -> Result<Self>
    where
        F: Fn(f64) -> f64 + Send + Sync + 'static,
    {
        Self::from_fallible(move |r| Ok(f(r)), tail)
    }

    pub fn from_fallible<F>(f: F, tail: Tail) -> Result<Self>
    where
        F: Fn(f64) -> Result<f64> + Send + Sync + 'static,
    {
        tail.validate()?;
        let start = tail.start();
        let breakpoints = if start > 0.0 { vec![start] } else { Vec::new() };
        Ok(RadialProfile {
            eval: Arc::new(f),
            breakpoints,
            decay_zero: 0.0,
            tail,
        })
    }

    /// The zero function.
    pub fn zero() -> Self {
        RadialProfile {
            eval: Arc::new(|_| Ok(0.0)),
            breakpoints: Vec::new(),
            decay_zero: 0.0,
            tail: Tail::compact(0.0),
        }
    }

    /// Adds breakpoints; they are merged with the existing ones.
    pub fn with_breakpoints(mut self, points: impl IntoIterator<Item = f64>) -> Result<Self> {
        for b in points {
            if !(b.is_finite() && b > 0.0) {
                return domain(format!("breakpoints must be finite and positive, got {b}"));
            }
            self.breakpoints.push(b);
        }
        self.breakpoints.sort_by(f64::total_cmp);
        self.breakpoints.dedup();
        Ok(self)
    }

    pub fn with_decay_zero(mut self, a0: f64) -> Result<Self> {
        if !a0.is_finite() {
            return domain(format!("decay_zero must be finite, got {a0}"));
        }
        self.decay_zero = a0;
        Ok(self)
    }

    pub fn try_eval(&self, r: f64) -> Result<f64> {
        (self.eval)(r)
    }

    /// Evaluates the profile; `NaN` if the underlying computation fails.
    pub fn eval(&self, r: f64) -> f64 {
        self.try_eval(r).unwrap_or(f64::NAN)
    }

    pub fn breakpoints(&self) -> &[f64] {
        &self.breakpoints
    }

    pub fn decay_zero(&self) -> f64 {
        self.decay_zero
    }

    pub fn decay_inf(&self) -> f64 {
        self.tail.decay_inf()
    }

    pub fn tail(&self) -> &Tail {
        &self.tail
    }

    /// `r ↦ c·f(r)`.
    pub fn scaled(&self, c: f64) -> RadialProfile {
        let inner = Arc::clone(&self.eval);
        RadialProfile {
            eval: Arc::new(move |r| Ok(c * inner(r)?)),
            breakpoints: self.breakpoints.clone(),
            decay_zero: self.decay_zero,
            tail: self.tail.scaled(c),
        }
    }

    /// `r ↦ f(t·r)` for `t > 0`.
    pub fn dilated(&self, t: f64) -> Result<RadialProfile> {
        if !(t.is_finite() && t > 0.0) {
            return domain(format!("dilation factor must be positive, got {t}"));
        }
        let inner = Arc::clone(&self.eval);
        Ok(RadialProfile {
            eval: Arc::new(move |r| inner(t * r)),
            breakpoints: self.breakpoints.iter().map(|b| b / t).collect(),
            decay_zero: self.decay_zero,
            tail: self.tail.dilated(t),
        })
    }

    /// `r ↦ f(r) + g(r)`.
    pub fn plus(&self, other: &RadialProfile) -> RadialProfile {
        let f = Arc::clone(&self.eval);
        let g = Arc::clone(&other.eval);
        let tail = self.tail.sum(&other.tail);
        let mut breakpoints: Vec<f64> = self
            .breakpoints
            .iter()
            .chain(other.breakpoints.iter())
            .copied()
            .chain(std::iter::once(tail.start()).filter(|s| *s > 0.0))
            .collect();
        breakpoints.sort_by(f64::total_cmp);
        breakpoints.dedup();
        RadialProfile {
            eval: Arc::new(move |r| Ok(f(r)? + g(r)?)),
            breakpoints,
            decay_zero: self.decay_zero.min(other.decay_zero),
            tail,
        }
    }

    /// Probe check of the decay metadata: `|f(r)|·r^{−a}` must stay bounded on
    /// geometric grids towards 0 (with `a = a₀`) and towards ∞ (with `a = a∞`).
    pub fn check_decay(&self) -> Result<()> {
        let bounded = |radii: &[f64], a: f64, side: &str| -> Result<()> {
            let ratios = radii
                .iter()
                .map(|&r| self.try_eval(r).map(|v| v.abs() * r.powf(-a)))
                .collect::<Result<Vec<f64>>>()?;
            if ratios.iter().any(|v| !v.is_finite()) {
                return domain(format!("profile is not finite on the {side} probe grid"));
            }
            let half = ratios.len() / 2;
            let reference = ratios[..half].iter().fold(0.0_f64, |m, v| m.max(*v));
            let far = ratios[half..].iter().fold(0.0_f64, |m, v| m.max(*v));
            if far > 10.0 * reference + 1e-300 {
                return domain(format!(
                    "decay metadata inconsistent near {side}: |f|·r^(−{a}) grows from {reference:e} to {far:e}"
                ));
            }
            Ok(())
        };
        let near: Vec<f64> = (1..=24).map(|k| 10f64.powf(-0.5 * f64::from(k))).collect();
        bounded(&near, self.decay_zero, "zero")?;
        let a_inf = self.decay_inf();
        if a_inf.is_finite() {
            let start = self.tail.start().max(1.0);
            let far: Vec<f64> = (1..=24).map(|k| start * 10f64.powf(0.5 * f64::from(k))).collect();
            bounded(&far, a_inf, "infinity")?;
        } else {
            let support = self.tail.start();
            for k in 1..=8 {
                let r = support * (1.0 + f64::from(k)) + f64::from(k);
                if self.try_eval(r)? != 0.0 {
                    return domain(format!("profile declared compactly supported on [0, {support}] but f({r}) != 0"));
                }
            }
        }
        Ok(())
    }
}

type AngularFn2 = dyn Fn(f64) -> f64 + Send + Sync;
type AngularFn3 = dyn Fn(f64, f64) -> f64 + Send + Sync;

#[derive(Clone)]
enum AngularKind {
    Constant(f64),
    Circle(Arc<AngularFn2>),
    Sphere(Arc<AngularFn3>),
}

/// A function on the unit sphere.
///
/// On S¹ it is parameterized by the angle φ ∈ [0, 2π); on S² by the polar
/// angle θ ∈ [0, π] and the azimuth φ ∈ [0, 2π). Constant profiles are valid
/// in every dimension.
#[derive(Clone)]
pub struct AngularProfile {
    kind: AngularKind,
}

impl fmt::Debug for AngularProfile {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match &self.kind {
            AngularKind::Constant(c) => write!(f, "AngularProfile::Constant({c})"),
            AngularKind::Circle(_) => write!(f, "AngularProfile::Circle(..)"),
            AngularKind::Sphere(_) => write!(f, "AngularProfile::Sphere(..)"),
        }
    }
}

impl AngularProfile {
    pub fn constant(c: f64) -> Self {
        AngularProfile {
            kind: AngularKind::Constant(c),
        }
    }

    /// A function of the angle φ on the circle (n = 2).
    pub fn circle<F>(f: F) -> Self
    where
        F: Fn(f64) -> f64 + Send + Sync + 'static,
    {
        AngularProfile {
            kind: AngularKind::Circle(Arc::new(f)),
        }
    }

    /// A function of (θ, φ) on the 2-sphere (n = 3).
    pub fn sphere<F>(f: F) -> Self
    where
        F: Fn(f64, f64) -> f64 + Send + Sync + 'static,
    {
        AngularProfile {
            kind: AngularKind::Sphere(Arc::new(f)),
        }
    }

    pub fn as_constant(&self) -> Option<f64> {
        match self.kind {
            AngularKind::Constant(c) => Some(c),
            _ => None,
        }
    }

    /// The dimension this profile lives in, `None` for constants.
    pub fn dimension(&self) -> Option<u32> {
        match self.kind {
            AngularKind::Constant(_) => None,
            AngularKind::Circle(_) => Some(2),
            AngularKind::Sphere(_) => Some(3),
        }
    }

    /// Evaluates at the angle tuple: `[φ]` on the circle, `[θ, φ]` on S².
    pub fn eval(&self, angles: &[f64]) -> f64 {
        match &self.kind {
            AngularKind::Constant(c) => *c,
            AngularKind::Circle(f) => f(angles[0]),
            AngularKind::Sphere(f) => f(angles[0], angles[1]),
        }
    }

    pub(crate) fn check_dimension(&self, n: u32) -> Result<()> {
        match self.dimension() {
            None => Ok(()),
            Some(d) if d == n => Ok(()),
            Some(_) if n >= 4 => Err(Error::UnsupportedDimension(n)),
            Some(d) => domain(format!("angular profile lives on S^{} but n = {n}", d - 1)),
        }
    }

    /// Probe check that the profile is bounded on the sphere.
    pub fn check_bounded(&self) -> Result<()> {
        let probes = 64;
        let step = std::f64::consts::TAU / f64::from(probes);
        let ok = match &self.kind {
            AngularKind::Constant(c) => c.is_finite(),
            AngularKind::Circle(f) => (0..probes).all(|k| f(step * f64::from(k)).is_finite()),
            AngularKind::Sphere(f) => (0..=probes / 2).all(|i| {
                (0..probes).all(|k| f(step * f64::from(i), step * f64::from(k)).is_finite())
            }),
        };
        if ok {
            Ok(())
        } else {
            domain("angular profile is not bounded on the sphere")
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn terms_are_merged_and_sorted() {
        let terms = normalize_terms([
            PowerTerm::new(1.0, -3.0),
            PowerTerm::new(2.0, -1.0),
            PowerTerm::new(-1.0, -3.0),
            PowerTerm::new(0.5, -1.0),
        ]);
        assert_eq!(terms, vec![PowerTerm::new(2.5, -1.0)]);
    }

    #[test]
    fn decay_inf_follows_tail() {
        assert_eq!(Tail::compact(1.0).decay_inf(), f64::NEG_INFINITY);
        let t = Tail::power(1.0, [PowerTerm::new(1.0, -2.0), PowerTerm::new(3.0, -1.5)]);
        assert_eq!(t.decay_inf(), -1.5);
        assert_eq!(Tail::bound(2.0, 1.0, -4.0).decay_inf(), -4.0);
    }

    #[test]
    fn rejects_bad_metadata() {
        assert!(RadialProfile::new(|_| 1.0, Tail::compact(f64::NAN)).is_err());
        assert!(RadialProfile::new(|r| r, Tail::power(0.0, [PowerTerm::new(1.0, -1.0)])).is_err());
        let p = RadialProfile::new(|_| 1.0, Tail::compact(1.0)).unwrap();
        assert!(p.clone().with_breakpoints([-1.0]).is_err());
        assert!(p.with_decay_zero(f64::INFINITY).is_err());
    }

    #[test]
    fn decay_probe_detects_wrong_metadata() {
        let ok = RadialProfile::new(|r: f64| (1.0 + r * r).powf(-1.5), Tail::bound(1.0, 1.0, -3.0)).unwrap();
        assert!(ok.check_decay().is_ok());
        let wrong = RadialProfile::new(|r: f64| (1.0 + r).powf(-1.0), Tail::bound(1.0, 1.0, -3.0)).unwrap();
        assert!(wrong.check_decay().is_err());
        let singular = RadialProfile::new(|r: f64| if r <= 1.0 { r.powf(-0.5) } else { 0.0 }, Tail::compact(1.0)).unwrap();
        assert!(singular.check_decay().is_err());
        assert!(singular.with_decay_zero(-0.5).unwrap().check_decay().is_ok());
    }

    #[test]
    fn arithmetic_on_profiles() {
        let f = RadialProfile::new(|r: f64| if r > 1.0 { r.powi(-3) } else { 0.0 }, Tail::power(1.0, [PowerTerm::new(1.0, -3.0)]))
            .unwrap();
        let g = f.scaled(2.0).dilated(2.0).unwrap();
        // 2·(2r)^{-3} = r^{-3}/4 for r > 1/2
        assert!((g.eval(1.0) - 0.25).abs() < 1e-15);
        assert_eq!(g.tail(), &Tail::power(0.5, [PowerTerm::new(0.25, -3.0)]));
        let h = f.plus(&RadialProfile::new(|r| if r <= 2.0 { 1.0 } else { 0.0 }, Tail::compact(2.0)).unwrap());
        assert_eq!(h.tail().start(), 2.0);
        assert!((h.eval(1.5) - (1.0 + 1.5f64.powi(-3))).abs() < 1e-15);
    }

    #[test]
    fn angular_dimension_checks() {
        let a = AngularProfile::circle(|phi: f64| 1.0 + phi.cos());
        assert!(a.check_dimension(2).is_ok());
        assert!(a.check_dimension(3).is_err());
        assert!(matches!(a.check_dimension(5), Err(Error::UnsupportedDimension(5))));
        assert!(AngularProfile::constant(2.0).check_dimension(7).is_ok());
        assert!(AngularProfile::circle(|phi: f64| 1.0 / phi.sin()).check_bounded().is_err());
    }
}
