//! 21-point Gauss–Kronrod rule and a globally adaptive bisection driver.

use std::cmp::Ordering;
use std::collections::BinaryHeap;

use crate::error::{Error, Result};

#[allow(clippy::excessive_precision)]
const XGK: [f64; 11] = [
    0.995_657_163_025_808_080_735_527_280_689_003,
    0.973_906_528_517_171_720_077_964_012_084_452,
    0.930_157_491_355_708_226_001_207_180_059_508,
    0.865_063_366_688_984_510_732_096_688_423_493,
    0.780_817_726_586_416_897_063_717_578_345_042,
    0.679_409_568_299_024_406_234_327_365_114_874,
    0.562_757_134_668_604_683_339_000_099_272_694,
    0.433_395_394_129_247_190_799_265_943_165_784,
    0.294_392_862_701_460_198_131_126_603_103_866,
    0.148_874_338_981_631_210_884_826_001_129_720,
    0.0,
];

#[allow(clippy::excessive_precision)]
const WG: [f64; 5] = [
    0.066_671_344_308_688_137_593_568_809_893_332,
    0.149_451_349_150_580_593_145_776_339_657_697,
    0.219_086_362_515_982_043_995_534_934_228_163,
    0.269_266_719_309_996_355_091_226_921_569_469,
    0.295_524_224_714_752_870_173_892_994_651_338,
];

#[allow(clippy::excessive_precision)]
const WGK: [f64; 11] = [
    0.011_694_638_867_371_874_278_064_396_062_192,
    0.032_558_162_307_964_727_478_818_972_459_390,
    0.054_755_896_574_351_996_031_381_300_244_580,
    0.075_039_674_810_919_952_767_043_140_916_190,
    0.093_125_454_583_697_605_535_065_465_083_366,
    0.109_387_158_802_297_641_899_210_590_325_805,
    0.123_491_976_262_065_851_077_208_068_029_450,
    0.134_709_217_311_473_325_928_054_001_771_707,
    0.142_775_938_577_060_080_797_094_273_138_717,
    0.147_739_104_901_338_491_374_841_515_972_068,
    0.149_445_554_002_916_905_664_936_468_389_821,
];

/// Result of applying the rule to one interval.
#[derive(Debug, Clone, Copy)]
pub(crate) struct RuleEstimate {
    pub value: f64,
    pub error: f64,
    /// Integral of |f| over the interval, used for the round-off floor.
    pub abs_value: f64,
}

fn checked<F>(f: &mut F, x: f64) -> Result<f64>
where
    F: FnMut(f64) -> Result<f64>,
{
    let v = f(x)?;
    if v.is_finite() {
        Ok(v)
    } else {
        Err(Error::Quadrature(format!("integrand is not finite at {x:e}")))
    }
}

pub(crate) fn gk21<F>(f: &mut F, a: f64, b: f64) -> Result<RuleEstimate>
where
    F: FnMut(f64) -> Result<f64>,
{
    let center = 0.5 * (a + b);
    let half = 0.5 * (b - a);
    let f_center = checked(f, center)?;

    let mut res_k = WGK[10] * f_center;
    let mut res_g = 0.0;
    let mut res_abs = res_k.abs();
    let mut fv1 = [0.0; 10];
    let mut fv2 = [0.0; 10];

    for j in 0..10 {
        let dx = half * XGK[j];
        let f1 = checked(f, center - dx)?;
        let f2 = checked(f, center + dx)?;
        fv1[j] = f1;
        fv2[j] = f2;
        res_k += WGK[j] * (f1 + f2);
        res_abs += WGK[j] * (f1.abs() + f2.abs());
        if j % 2 == 1 {
            res_g += WG[j / 2] * (f1 + f2);
        }
    }

    let mean = 0.5 * res_k;
    let mut res_asc = WGK[10] * (f_center - mean).abs();
    for j in 0..10 {
        res_asc += WGK[j] * ((fv1[j] - mean).abs() + (fv2[j] - mean).abs());
    }

    let scale = half.abs();
    let value = res_k * half;
    let res_abs = res_abs * scale;
    let res_asc = res_asc * scale;
    let mut error = ((res_k - res_g) * half).abs();
    if res_asc != 0.0 && error != 0.0 {
        error = res_asc * (200.0 * error / res_asc).powf(1.5).min(1.0);
    }
    if res_abs > f64::MIN_POSITIVE / (50.0 * f64::EPSILON) {
        error = error.max(50.0 * f64::EPSILON * res_abs);
    }
    Ok(RuleEstimate {
        value,
        error,
        abs_value: res_abs,
    })
}

#[derive(Debug, Clone, Copy)]
struct Piece {
    a: f64,
    b: f64,
    est: RuleEstimate,
}

impl PartialEq for Piece {
    fn eq(&self, other: &Self) -> bool {
        self.est.error.total_cmp(&other.est.error) == Ordering::Equal
    }
}

impl Eq for Piece {}

impl PartialOrd for Piece {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl Ord for Piece {
    fn cmp(&self, other: &Self) -> Ordering {
        self.est.error.total_cmp(&other.est.error)
    }
}

/// Tolerances consumed by [`adaptive`].
#[derive(Debug, Clone, Copy)]
pub(crate) struct Tolerance {
    pub rel: f64,
    pub abs: f64,
    pub max_subdivisions: usize,
}

/// Globally adaptive integration of `f` over the finite interval `[a, b]`.
///
/// The interval with the largest error estimate is bisected until the summed
/// error drops below `max(abs, rel·|I|)`, or below the round-off floor set by
/// `∫|f|`.
pub(crate) fn adaptive<F>(mut f: F, a: f64, b: f64, tol: Tolerance) -> Result<RuleEstimate>
where
    F: FnMut(f64) -> Result<f64>,
{
    if a == b {
        return Ok(RuleEstimate {
            value: 0.0,
            error: 0.0,
            abs_value: 0.0,
        });
    }
    let first = gk21(&mut f, a, b)?;
    let mut heap = BinaryHeap::new();
    heap.push(Piece { a, b, est: first });
    let mut frozen = Vec::new();
    let mut pieces = 1usize;

    loop {
        let (value, error, abs_value) = heap
            .iter()
            .chain(frozen.iter())
            .fold((0.0, 0.0, 0.0), |(v, e, s), p: &Piece| {
                (v + p.est.value, e + p.est.error, s + p.est.abs_value)
            });
        let target = tol.abs.max(tol.rel * value.abs());
        let roundoff = 1e3 * f64::EPSILON * abs_value;
        if error <= target || error <= roundoff {
            return Ok(RuleEstimate {
                value,
                error,
                abs_value,
            });
        }
        let Some(worst) = heap.pop() else {
            return Err(Error::Quadrature(format!(
                "intervals on [{a:e}, {b:e}] cannot be refined further; error {error:e} exceeds {target:e}"
            )));
        };
        if pieces >= tol.max_subdivisions {
            return Err(Error::Quadrature(format!(
                "no convergence on [{a:e}, {b:e}] after {pieces} subdivisions; error {error:e} exceeds {target:e}"
            )));
        }
        let mid = 0.5 * (worst.a + worst.b);
        let width = (worst.b - worst.a).abs();
        if width <= 64.0 * f64::EPSILON * worst.a.abs().max(worst.b.abs()) || mid == worst.a || mid == worst.b {
            frozen.push(worst);
            continue;
        }
        let left = gk21(&mut f, worst.a, mid)?;
        let right = gk21(&mut f, mid, worst.b)?;
        heap.push(Piece {
            a: worst.a,
            b: mid,
            est: left,
        });
        heap.push(Piece {
            a: mid,
            b: worst.b,
            est: right,
        });
        pieces += 1;
    }
}
