//! Mixed radial-angular norms `L^p_{|x|}L^{p̄}_θ` and the weak mixed norm.

use crate::error::{domain, Result};
use crate::fields::SeparableField;
use crate::quadrature::{integrate_abs_pow, integrate_sphere_with, QuadratureSpec, RadialProfile, Tail};
use crate::specfun::{sphere_measure, Dimension};

/// Radial exponent `p`, angular exponent `p̄`, both in `(1, ∞)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MixedExponents {
    p: f64,
    p_bar: f64,
    n: Dimension,
}

impl MixedExponents {
    pub fn new(p: f64, p_bar: f64, n: Dimension) -> Result<Self> {
        for (name, v) in [("p", p), ("p̄", p_bar)] {
            if !(v.is_finite() && v > 1.0) {
                return domain(format!("{name} must lie in (1, ∞), got {v}"));
            }
        }
        Ok(MixedExponents { p, p_bar, n })
    }

    pub fn p(&self) -> f64 {
        self.p
    }

    pub fn p_bar(&self) -> f64 {
        self.p_bar
    }

    pub fn n(&self) -> Dimension {
        self.n
    }

    pub fn p_conj(&self) -> f64 {
        self.p / (self.p - 1.0)
    }

    pub fn p_bar_conj(&self) -> f64 {
        self.p_bar / (self.p_bar - 1.0)
    }

    /// The conjugate pair `(p', p̄')`.
    pub fn dual(&self) -> MixedExponents {
        MixedExponents {
            p: self.p_conj(),
            p_bar: self.p_bar_conj(),
            n: self.n,
        }
    }
}

/// `‖f(|·|)‖ = ω_n^{1/p̄} (∫₀^∞ |f(r)|^p r^{n−1} dr)^{1/p}`.
pub fn mixed_norm_radial(f: &RadialProfile, e: MixedExponents, spec: &QuadratureSpec) -> Result<f64> {
    let integral = integrate_abs_pow(f, e.p, e.n, spec)?;
    Ok(sphere_measure(e.n).powf(1.0 / e.p_bar) * integral.powf(1.0 / e.p))
}

/// Norm of `R(r)·A(θ)`: the product of the angular `L^{p̄}` norm and the
/// radial `L^p(r^{n−1}dr)` norm.
pub fn mixed_norm_separable(field: &SeparableField, e: MixedExponents, spec: &QuadratureSpec) -> Result<f64> {
    let angular = match field.angular.as_constant() {
        Some(c) => c.abs() * sphere_measure(e.n).powf(1.0 / e.p_bar),
        None => {
            let a = &field.angular;
            a.check_bounded()?;
            integrate_sphere_with(e.n, |angles| Ok(a.eval(angles).abs().powf(e.p_bar)), spec)?.powf(1.0 / e.p_bar)
        }
    };
    let radial = integrate_abs_pow(&field.radial, e.p, e.n, spec)?.powf(1.0 / e.p);
    Ok(angular * radial)
}

const GRID_DECADES: f64 = 8.0;
const GRID_PER_DECADE: usize = 100;

/// `sup_λ λ ‖χ_{|g|>λ}‖` for nonnegative nonincreasing radial `g`.
///
/// The super-level set of `g` at height `λ` is the ball of radius
/// `r_λ = sup{r : g(r) > λ}`, so the quantity equals
/// `ω_n^{1/p̄} n^{−1/p} sup_r g(r⁻) r^{n/p}`. The supremum over `r` is taken
/// over the breakpoints, the asymptotic limits at `0` and `∞`, and a
/// logarithmic grid refined by golden-section search.
pub fn weak_mixed_norm_monotone(g: &RadialProfile, e: MixedExponents, spec: &QuadratureSpec) -> Result<f64> {
    spec.validate()?;
    let nf = e.n.as_f64();
    let k = nf / e.p;
    let a0 = g.decay_zero();
    if a0 + k < 0.0 {
        return domain(format!("g ~ r^{a0} near the origin has infinite weak norm"));
    }
    let limit_inf = match g.tail() {
        Tail::Compact { .. } => 0.0,
        Tail::Power { terms, .. } => match terms.first() {
            None => 0.0,
            Some(lead) if lead.exponent + k > 1e-12 => {
                return domain(format!("tail r^{} has infinite weak norm", lead.exponent))
            }
            Some(lead) if (lead.exponent + k).abs() <= 1e-12 => lead.coef,
            Some(_) => 0.0,
        },
        Tail::Bound { exponent, .. } if exponent + k < 0.0 => 0.0,
        Tail::Bound { exponent, .. } => {
            return domain(format!("tail bound r^{exponent} cannot certify a finite weak norm"))
        }
    };

    let mut knots: Vec<f64> = g.breakpoints().to_vec();
    let start = g.tail().start();
    if start > 0.0 {
        knots.push(start);
    }
    let lo = knots.iter().copied().fold(1.0_f64, f64::min) * 10f64.powf(-GRID_DECADES);
    let hi = knots.iter().copied().fold(1.0_f64, f64::max) * 10f64.powf(GRID_DECADES);
    let count = ((hi / lo).log10() * GRID_PER_DECADE as f64).ceil() as usize;
    let step = (hi / lo).ln() / count as f64;
    let grid: Vec<f64> = (0..=count).map(|i| lo * (step * i as f64).exp()).collect();

    check_monotone(g, &grid, &knots)?;

    // h(r) = g(r⁻) r^{n/p}
    let h = |r: f64| -> Result<f64> {
        let left = g.try_eval(r * (1.0 - 4.0 * f64::EPSILON))?;
        Ok(left.max(g.try_eval(r)?) * r.powf(k))
    };

    let mut best = limit_inf;
    if a0 + k == 0.0 {
        best = best.max(h(lo * 1e-8)?);
    }
    for &b in &knots {
        best = best.max(h(b)?);
    }
    let values = grid.iter().map(|&r| h(r)).collect::<Result<Vec<f64>>>()?;
    let (arg, &top) = values
        .iter()
        .enumerate()
        .max_by(|a, b| a.1.total_cmp(b.1))
        .expect("grid is nonempty");
    best = best.max(top);
    if arg > 0 && arg < grid.len() - 1 {
        best = best.max(golden_max(&h, grid[arg - 1].ln(), grid[arg + 1].ln())?);
    }
    Ok(sphere_measure(e.n).powf(1.0 / e.p_bar) * nf.powf(-1.0 / e.p) * best)
}

fn check_monotone(g: &RadialProfile, grid: &[f64], knots: &[f64]) -> Result<()> {
    let mut probes: Vec<f64> = grid.to_vec();
    for &b in knots {
        probes.extend([b * (1.0 - 1e-9), b, b * (1.0 + 1e-9)]);
    }
    probes.sort_by(f64::total_cmp);
    let mut previous = f64::INFINITY;
    for r in probes {
        let v = g.try_eval(r)?;
        if v.is_nan() || v < 0.0 {
            return domain(format!("weak norm needs a nonnegative profile, g({r}) = {v}"));
        }
        if v > previous * (1.0 + 1e-12) + 1e-300 {
            return domain(format!("profile is not nonincreasing near r = {r}"));
        }
        previous = v;
    }
    Ok(())
}

/// Maximum of `h(e^u)` on `[a, b]` by golden-section search.
fn golden_max(h: &impl Fn(f64) -> Result<f64>, mut a: f64, mut b: f64) -> Result<f64> {
    let inv_phi = (5f64.sqrt() - 1.0) / 2.0;
    let mut c = b - inv_phi * (b - a);
    let mut d = a + inv_phi * (b - a);
    let mut hc = h(c.exp())?;
    let mut hd = h(d.exp())?;
    let mut best = hc.max(hd);
    while (b - a).abs() > 1e-12 * (1.0 + a.abs()) {
        if hc >= hd {
            b = d;
            d = c;
            hd = hc;
            c = b - inv_phi * (b - a);
            hc = h(c.exp())?;
        } else {
            a = c;
            c = d;
            hc = hd;
            d = a + inv_phi * (b - a);
            hd = h(d.exp())?;
        }
        best = best.max(hc).max(hd);
    }
    Ok(best)
}
