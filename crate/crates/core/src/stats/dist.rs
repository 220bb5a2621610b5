//! Special functions and distribution tails used by the rank tests.

use std::f64::consts::{PI, SQRT_2};

const GAMMA_EPS: f64 = 1e-16;
const GAMMA_MAX_ITER: usize = 10_000;

/// Lanczos coefficients for g = 7, n = 9.
const LANCZOS: [f64; 9] = [
    0.999_999_999_999_809_9,
    676.520_368_121_885_1,
    -1_259.139_216_722_402_8,
    771.323_428_777_653_1,
    -176.615_029_162_140_6,
    12.507_343_278_686_905,
    -0.138_571_095_265_720_12,
    9.984_369_578_019_572e-6,
    1.505_632_735_149_311_6e-7,
];

/// ln Γ(x) for x > 0.
pub fn ln_gamma(x: f64) -> f64 {
    if x < 0.5 {
        // reflection
        return (PI / (PI * x).sin()).ln() - ln_gamma(1.0 - x);
    }
    let x = x - 1.0;
    let t = x + 7.5;
    let series = LANCZOS[1..]
        .iter()
        .enumerate()
        .fold(LANCZOS[0], |acc, (i, c)| acc + c / (x + i as f64 + 1.0));
    0.5 * (2.0 * PI).ln() + (x + 0.5) * t.ln() - t + series.ln()
}

/// Lower regularized gamma by its power series; valid for x < a + 1.
fn gamma_p_series(a: f64, x: f64) -> f64 {
    let mut ap = a;
    let mut term = 1.0 / a;
    let mut sum = term;
    for _ in 0..GAMMA_MAX_ITER {
        ap += 1.0;
        term *= x / ap;
        sum += term;
        if term.abs() < sum.abs() * GAMMA_EPS {
            break;
        }
    }
    sum * (-x + a * x.ln() - ln_gamma(a)).exp()
}

/// Upper regularized gamma by modified Lentz continued fraction; valid for x ≥ a + 1.
fn gamma_q_continued_fraction(a: f64, x: f64) -> f64 {
    const TINY: f64 = 1e-300;
    let mut b = x + 1.0 - a;
    let mut c = 1.0 / TINY;
    let mut d = 1.0 / b;
    let mut h = d;
    for i in 1..GAMMA_MAX_ITER {
        let an = -(i as f64) * (i as f64 - a);
        b += 2.0;
        d = an * d + b;
        if d.abs() < TINY {
            d = TINY;
        }
        c = b + an / c;
        if c.abs() < TINY {
            c = TINY;
        }
        d = 1.0 / d;
        let delta = d * c;
        h *= delta;
        if (delta - 1.0).abs() < GAMMA_EPS {
            break;
        }
    }
    (-x + a * x.ln() - ln_gamma(a)).exp() * h
}

/// Regularized lower incomplete gamma P(a, x).
pub fn gamma_p(a: f64, x: f64) -> f64 {
    if x <= 0.0 {
        0.0
    } else if x < a + 1.0 {
        gamma_p_series(a, x)
    } else {
        1.0 - gamma_q_continued_fraction(a, x)
    }
}

/// Regularized upper incomplete gamma Q(a, x) = 1 − P(a, x).
pub fn gamma_q(a: f64, x: f64) -> f64 {
    if x <= 0.0 {
        1.0
    } else if x < a + 1.0 {
        1.0 - gamma_p_series(a, x)
    } else {
        gamma_q_continued_fraction(a, x)
    }
}

/// P(X > x) for X ~ χ²(df).
pub fn chi_square_sf(x: f64, df: f64) -> f64 {
    if x <= 0.0 {
        return 1.0;
    }
    gamma_q(df / 2.0, x / 2.0).clamp(0.0, 1.0)
}

/// Standard normal density.
pub fn normal_pdf(z: f64) -> f64 {
    (-0.5 * z * z).exp() / (2.0 * PI).sqrt()
}

/// Standard normal CDF through erfc(t) = Q(1/2, t²), accurate in both tails.
pub fn normal_cdf(z: f64) -> f64 {
    let half_sq = 0.5 * z * z;
    if z < 0.0 {
        0.5 * gamma_q(0.5, half_sq)
    } else {
        0.5 + 0.5 * gamma_p(0.5, half_sq)
    }
}

/// Complementary error function.
pub fn erfc(x: f64) -> f64 {
    2.0 * normal_cdf(-x * SQRT_2)
}

// Gauss–Kronrod 7/15 nodes and weights on [-1, 1].
const GK_NODES: [f64; 8] = [
    0.991_455_371_120_812_6,
    0.949_107_912_342_758_5,
    0.864_864_423_359_769_1,
    0.741_531_185_599_394_4,
    0.586_087_235_467_691_1,
    0.405_845_151_377_397_2,
    0.207_784_955_007_898_5,
    0.0,
];
const GK_KRONROD: [f64; 8] = [
    0.022_935_322_010_529_22,
    0.063_092_092_629_978_55,
    0.104_790_010_322_250_2,
    0.140_653_259_715_525_9,
    0.169_004_726_639_267_9,
    0.190_350_578_064_785_4,
    0.204_432_940_075_298_9,
    0.209_482_141_084_727_8,
];
const GK_GAUSS: [f64; 4] = [
    0.129_484_966_168_869_7,
    0.279_705_391_489_276_7,
    0.381_830_050_505_118_9,
    0.417_959_183_673_469_4,
];

fn gauss_kronrod<F: Fn(f64) -> f64>(f: &F, a: f64, b: f64) -> (f64, f64) {
    let center = 0.5 * (a + b);
    let half = 0.5 * (b - a);
    let fc = f(center);
    let mut kronrod = GK_KRONROD[7] * fc;
    let mut gauss = GK_GAUSS[3] * fc;
    for (i, &node) in GK_NODES[..7].iter().enumerate() {
        let pair = f(center - half * node) + f(center + half * node);
        kronrod += GK_KRONROD[i] * pair;
        if i % 2 == 1 {
            gauss += GK_GAUSS[i / 2] * pair;
        }
    }
    (kronrod * half, ((kronrod - gauss) * half).abs())
}

/// Globally adaptive Gauss–Kronrod quadrature to a relative tolerance.
pub fn integrate<F: Fn(f64) -> f64>(f: F, a: f64, b: f64, rel_tol: f64, max_intervals: usize) -> f64 {
    const INITIAL: usize = 16;
    let width = (b - a) / INITIAL as f64;
    let mut intervals: Vec<(f64, f64, f64, f64)> = (0..INITIAL)
        .map(|i| {
            let lo = a + width * i as f64;
            let hi = if i + 1 == INITIAL { b } else { lo + width };
            let (v, e) = gauss_kronrod(&f, lo, hi);
            (lo, hi, v, e)
        })
        .collect();

    loop {
        let total: f64 = intervals.iter().map(|iv| iv.2).sum();
        let error: f64 = intervals.iter().map(|iv| iv.3).sum();
        if error <= rel_tol * total.abs() || error < f64::MIN_POSITIVE || intervals.len() >= max_intervals {
            return total;
        }
        let (worst, _) = intervals
            .iter()
            .enumerate()
            .max_by(|x, y| x.1 .3.total_cmp(&y.1 .3))
            .expect("at least one interval");
        let (lo, hi, _, _) = intervals.swap_remove(worst);
        let mid = 0.5 * (lo + hi);
        let (v1, e1) = gauss_kronrod(&f, lo, mid);
        let (v2, e2) = gauss_kronrod(&f, mid, hi);
        intervals.push((lo, mid, v1, e1));
        intervals.push((mid, hi, v2, e2));
    }
}

/// Relative accuracy requested from the studentized-range quadrature.
pub const STUDENTIZED_RANGE_TOLERANCE: f64 = 1e-10;

/// Survival function of the studentized range of `k` independent standard
/// normals (infinite degrees of freedom): P(max − min > q).
///
/// Integrates `k φ(z) [Φ(z)^{k−1} − (Φ(z) − Φ(z−q))^{k−1}]` with the
/// difference of powers factored so that no cancellation occurs, which
/// keeps tiny tail probabilities accurate.
pub fn studentized_range_sf(q: f64, k: usize) -> f64 {
    if k < 2 || q <= 0.0 {
        return 1.0;
    }
    if !q.is_finite() {
        return 0.0;
    }
    let m = (k - 1) as i32;
    let integrand = |z: f64| {
        let a = normal_cdf(z);
        let b = normal_cdf(z - q);
        let d = (a - b).max(0.0);
        // a^m − d^m = (a − d) Σ_{i<m} a^{m−1−i} d^i, with a − d = Φ(z − q)
        let mut sum = 0.0;
        let mut d_pow = 1.0;
        for i in 0..m {
            sum += a.powi(m - 1 - i) * d_pow;
            d_pow *= d;
        }
        normal_pdf(z) * b * sum
    };
    let center = 0.5 * q;
    let value = k as f64
        * integrate(
            integrand,
            center - 10.0,
            center + 10.0,
            STUDENTIZED_RANGE_TOLERANCE,
            4096,
        );
    value.clamp(0.0, 1.0)
}
