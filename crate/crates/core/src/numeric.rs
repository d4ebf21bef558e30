//! Small numerical toolkit: Gaussian tail functions, adaptive quadrature and
//! compensated summation.

use libm::erfc;
use statrs::function::erf::erfc_inv;
use std::collections::BinaryHeap;
use std::f64::consts::{PI, SQRT_2};

/// Standard normal density.
pub fn normal_pdf(x: f64) -> f64 {
    (-0.5 * x * x).exp() / (2.0 * PI).sqrt()
}

/// Gaussian tail `Q(x) = P(N(0,1) > x)`.
pub fn q_func(x: f64) -> f64 {
    0.5 * erfc(x / SQRT_2)
}

/// `ln Q(x)`, accurate far into the upper tail where `Q` underflows.
pub fn ln_q_func(x: f64) -> f64 {
    if x < 30.0 {
        return q_func(x).ln();
    }
    // Asymptotic expansion of Mills' ratio.
    let x2 = x * x;
    let series = 1.0 - 1.0 / x2 + 3.0 / (x2 * x2) - 15.0 / (x2 * x2 * x2);
    -0.5 * x2 - (x * (2.0 * PI).sqrt()).ln() + series.ln()
}

/// Inverse of the Gaussian tail: returns `x` with `Q(x) = a`, for `0 < a < 1`.
pub fn q_inv(a: f64) -> f64 {
    debug_assert!(a > 0.0 && a < 1.0, "q_inv argument {a} outside (0,1)");
    if a > 0.5 {
        return -q_inv(1.0 - a);
    }
    let mut x = SQRT_2 * erfc_inv(2.0 * a);
    // Newton refinement on ln Q to keep relative accuracy for tiny tails.
    let target = a.ln();
    for _ in 0..3 {
        let q = q_func(x);
        if q <= 0.0 {
            break;
        }
        let g = q.ln() - target;
        let dg = -normal_pdf(x) / q;
        let step = g / dg;
        x -= step;
        if step.abs() < 1e-15 * x.abs().max(1.0) {
            break;
        }
    }
    x
}

/// `ln C(n, k)`.
pub fn ln_binomial(n: u64, k: u64) -> f64 {
    statrs::function::factorial::ln_binomial(n, k)
}

/// Neumaier compensated accumulator.
#[derive(Debug, Clone, Copy, Default)]
pub struct CompensatedSum {
    sum: f64,
    comp: f64,
}

impl CompensatedSum {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn add(&mut self, x: f64) {
        let t = self.sum + x;
        if self.sum.abs() >= x.abs() {
            self.comp += (self.sum - t) + x;
        } else {
            self.comp += (x - t) + self.sum;
        }
        self.sum = t;
    }

    pub fn value(&self) -> f64 {
        self.sum + self.comp
    }
}

impl std::iter::Sum<f64> for CompensatedSum {
    fn sum<I: Iterator<Item = f64>>(iter: I) -> Self {
        let mut acc = CompensatedSum::new();
        for x in iter {
            acc.add(x);
        }
        acc
    }
}

const XGK: [f64; 8] = [
    0.991_455_371_120_812_6,
    0.949_107_912_342_758_5,
    0.864_864_423_359_769_1,
    0.741_531_185_599_394_4,
    0.586_087_235_467_691_1,
    0.405_845_151_377_397_2,
    0.207_784_955_007_898_5,
    0.0,
];
const WGK: [f64; 8] = [
    0.022_935_322_010_529_22,
    0.063_092_092_629_978_55,
    0.104_790_010_322_250_18,
    0.140_653_259_715_525_92,
    0.169_004_726_639_267_9,
    0.190_350_578_064_785_4,
    0.204_432_940_075_298_9,
    0.209_482_141_084_727_83,
];
const WG: [f64; 4] = [
    0.129_484_966_168_869_7,
    0.279_705_391_489_276_7,
    0.381_830_050_505_118_9,
    0.417_959_183_673_469_4,
];

fn gk15<F: Fn(f64) -> f64>(f: &F, a: f64, b: f64) -> (f64, f64) {
    let c = 0.5 * (a + b);
    let h = 0.5 * (b - a);
    let fc = f(c);
    let mut kron = fc * WGK[7];
    let mut gauss = fc * WG[3];
    for j in 0..7 {
        let dx = h * XGK[j];
        let s = f(c - dx) + f(c + dx);
        kron += WGK[j] * s;
        if j % 2 == 1 {
            gauss += WG[j / 2] * s;
        }
    }
    (kron * h, ((kron - gauss) * h).abs())
}

struct Segment {
    a: f64,
    b: f64,
    value: f64,
    err: f64,
}

impl PartialEq for Segment {
    fn eq(&self, other: &Self) -> bool {
        self.err == other.err
    }
}
impl Eq for Segment {}
impl PartialOrd for Segment {
    fn partial_cmp(&self, other: &Self) -> Option<std::cmp::Ordering> {
        Some(self.cmp(other))
    }
}
impl Ord for Segment {
    fn cmp(&self, other: &Self) -> std::cmp::Ordering {
        self.err.total_cmp(&other.err)
    }
}

/// Globally adaptive Gauss–Kronrod (7/15) quadrature of `f` over `[a, b]`.
///
/// Bisects the segment with the largest error estimate until the summed
/// estimate drops below `abs_tol` or the segment budget is spent.
pub fn integrate<F: Fn(f64) -> f64>(f: F, a: f64, b: f64, abs_tol: f64) -> f64 {
    integrate_tol(f, a, b, abs_tol, 0.0)
}

/// As [`integrate`], stopping once the error estimate is below
/// `max(abs_tol, rel_tol * |integral|)`.
pub fn integrate_tol<F: Fn(f64) -> f64>(f: F, a: f64, b: f64, abs_tol: f64, rel_tol: f64) -> f64 {
    const MAX_SEGMENTS: usize = 4000;
    // Seed with a uniform split so narrow peaks are not missed entirely.
    const INITIAL: usize = 32;
    let mut heap = BinaryHeap::with_capacity(2 * INITIAL);
    let width = (b - a) / INITIAL as f64;
    for i in 0..INITIAL {
        let lo = a + width * i as f64;
        let hi = if i + 1 == INITIAL { b } else { lo + width };
        let (value, err) = gk15(&f, lo, hi);
        heap.push(Segment { a: lo, b: hi, value, err });
    }
    let mut total_err: f64 = heap.iter().map(|s| s.err).sum();
    let mut total: f64 = heap.iter().map(|s| s.value).sum();
    let done = |err: f64, total: f64| err <= abs_tol.max(rel_tol * total.abs());
    while !done(total_err, total) && heap.len() < MAX_SEGMENTS {
        let worst = heap.pop().expect("non-empty");
        let mid = 0.5 * (worst.a + worst.b);
        if mid <= worst.a || mid >= worst.b {
            heap.push(worst);
            break;
        }
        let (v1, e1) = gk15(&f, worst.a, mid);
        let (v2, e2) = gk15(&f, mid, worst.b);
        total_err += e1 + e2 - worst.err;
        total += v1 + v2 - worst.value;
        heap.push(Segment { a: worst.a, b: mid, value: v1, err: e1 });
        heap.push(Segment { a: mid, b: worst.b, value: v2, err: e2 });
        // Periodic resummation guards against drift in the running totals.
        if heap.len() % 256 == 0 {
            total_err = heap.iter().map(|s| s.err).sum();
            total = heap.iter().map(|s| s.value).sum();
        }
    }
    heap.iter().map(|s| s.value).sum::<CompensatedSum>().value()
}
