//! Gauss–Legendre rules and adaptive Gauss–Kronrod (7/15) integration.

use std::ops::{Add, Mul};

use num_complex::Complex64;

use crate::error::{Error, Result};

/// Node count used for every semi-infinite radial integral.
pub const RADIAL_NODES: usize = 128;

/// Gauss–Legendre nodes and weights on `[-1, 1]`.
#[derive(Debug, Clone)]
pub struct GaussLegendre {
    nodes: Vec<f64>,
    weights: Vec<f64>,
}

impl GaussLegendre {
    /// Nodes from Newton iteration on `P_n`, starting at the Chebyshev guesses.
    pub fn new(n: usize) -> Self {
        assert!(n >= 1, "Gauss-Legendre rule needs at least one node");
        let mut nodes = vec![0.0; n];
        let mut weights = vec![0.0; n];
        for i in 0..n.div_ceil(2) {
            let mut x = (std::f64::consts::PI * (i as f64 + 0.75) / (n as f64 + 0.5)).cos();
            let mut dp = 0.0;
            for _ in 0..100 {
                let (p, d) = legendre(n, x);
                dp = d;
                let dx = p / d;
                x -= dx;
                if dx.abs() < 1e-16 {
                    break;
                }
            }
            let (_, d) = legendre(n, x);
            dp = if d != 0.0 { d } else { dp };
            let w = 2.0 / ((1.0 - x * x) * dp * dp);
            nodes[i] = -x;
            nodes[n - 1 - i] = x;
            weights[i] = w;
            weights[n - 1 - i] = w;
        }
        Self { nodes, weights }
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    /// Nodes and weights mapped onto `[a, b]`.
    pub fn mapped(&self, a: f64, b: f64) -> impl Iterator<Item = (f64, f64)> + '_ {
        let half = 0.5 * (b - a);
        let mid = 0.5 * (a + b);
        self.nodes
            .iter()
            .zip(&self.weights)
            .map(move |(&x, &w)| (mid + half * x, half * w))
    }

    pub fn integrate(&self, a: f64, b: f64, f: impl Fn(f64) -> f64) -> f64 {
        self.mapped(a, b).map(|(x, w)| w * f(x)).sum()
    }

    pub fn integrate_complex(&self, a: f64, b: f64, f: impl Fn(f64) -> Complex64) -> Complex64 {
        self.mapped(a, b).map(|(x, w)| f(x) * w).sum()
    }

    /// `∫₀^∞ f(r) dr` after the substitution `r = t / (1 - t)`.
    pub fn integrate_half_line_complex(&self, f: impl Fn(f64) -> Complex64) -> Complex64 {
        self.mapped(0.0, 1.0)
            .map(|(t, w)| {
                let r = t / (1.0 - t);
                f(r) * (w / ((1.0 - t) * (1.0 - t)))
            })
            .sum()
    }

    pub fn integrate_half_line(&self, f: impl Fn(f64) -> f64) -> f64 {
        self.integrate_half_line_complex(|r| Complex64::new(f(r), 0.0)).re
    }
}

fn legendre(n: usize, x: f64) -> (f64, f64) {
    let (mut p0, mut p1) = (1.0, x);
    for k in 2..=n {
        let p2 = ((2 * k - 1) as f64 * x * p1 - (k - 1) as f64 * p0) / k as f64;
        p0 = p1;
        p1 = p2;
    }
    if n == 0 {
        return (1.0, 0.0);
    }
    let d = n as f64 * (x * p1 - p0) / (x * x - 1.0);
    (p1, d)
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
    0.104_790_010_322_250_2,
    0.140_653_259_715_525_9,
    0.169_004_726_639_267_9,
    0.190_350_578_064_785_4,
    0.204_432_940_075_298_9,
    0.209_482_141_084_728_0,
];
const WG: [f64; 4] = [
    0.129_484_966_168_869_7,
    0.279_705_391_489_276_7,
    0.381_830_050_505_118_9,
    0.417_959_183_673_469_4,
];

/// Tolerances for [`adaptive_gk`].
#[derive(Debug, Clone, Copy)]
pub struct AdaptiveConfig {
    pub abs_tol: f64,
    pub rel_tol: f64,
    pub max_intervals: usize,
}

impl Default for AdaptiveConfig {
    fn default() -> Self {
        Self {
            abs_tol: 1e-14,
            rel_tol: 1e-12,
            max_intervals: 2000,
        }
    }
}

fn gk15(f: &impl Fn(f64) -> f64, a: f64, b: f64) -> (f64, f64) {
    let half = 0.5 * (b - a);
    let mid = 0.5 * (a + b);
    let fc = f(mid);
    let mut kronrod = WGK[7] * fc;
    let mut gauss = WG[3] * fc;
    for k in 0..7 {
        let dx = half * XGK[k];
        let s = f(mid - dx) + f(mid + dx);
        kronrod += WGK[k] * s;
        if k % 2 == 1 {
            gauss += WG[k / 2] * s;
        }
    }
    (kronrod * half, ((kronrod - gauss) * half).abs())
}

/// Globally adaptive G7/K15 integration of a real function on `[a, b]`.
///
/// Returns the integral and the summed error estimate.
pub fn adaptive_gk(f: impl Fn(f64) -> f64, a: f64, b: f64, cfg: AdaptiveConfig) -> Result<(f64, f64)> {
    if a == b {
        return Ok((0.0, 0.0));
    }
    let (v, e) = gk15(&f, a, b);
    let mut intervals = vec![(a, b, v, e)];
    loop {
        let total: f64 = intervals.iter().map(|iv| iv.2).sum();
        let err: f64 = intervals.iter().map(|iv| iv.3).sum();
        if err <= cfg.abs_tol.max(cfg.rel_tol * total.abs()) {
            return Ok((total, err));
        }
        if intervals.len() >= cfg.max_intervals {
            return Err(Error::Config(format!(
                "adaptive quadrature did not converge: error {err:e} after {} intervals",
                intervals.len()
            )));
        }
        let (worst, _) = intervals
            .iter()
            .enumerate()
            .max_by(|x, y| x.1 .3.total_cmp(&y.1 .3))
            .expect("non-empty");
        let (lo, hi, _, _) = intervals.swap_remove(worst);
        let mid = 0.5 * (lo + hi);
        let (v1, e1) = gk15(&f, lo, mid);
        let (v2, e2) = gk15(&f, mid, hi);
        intervals.push((lo, mid, v1, e1));
        intervals.push((mid, hi, v2, e2));
    }
}

/// Integral of `f` over the ordered sector `0 <= x_1 < x_2 < ... < x_n <= upper`,
/// nested Gauss–Legendre in every coordinate. Exact for polynomial integrands
/// whose total degree is below `2 * rule.len()`.
pub fn ordered_sector<T>(rule: &GaussLegendre, n: usize, upper: f64, f: &mut impl FnMut(&[f64]) -> T) -> T
where
    T: Copy + Default + Add<Output = T> + Mul<f64, Output = T>,
{
    let mut point = vec![0.0; n];
    sector_level(rule, n, upper, 1.0, &mut point, f)
}

fn sector_level<T>(
    rule: &GaussLegendre,
    level: usize,
    upper: f64,
    weight: f64,
    point: &mut [f64],
    f: &mut impl FnMut(&[f64]) -> T,
) -> T
where
    T: Copy + Default + Add<Output = T> + Mul<f64, Output = T>,
{
    if level == 0 {
        return f(point) * weight;
    }
    let mut acc = T::default();
    for (x, w) in rule.mapped(0.0, upper) {
        point[level - 1] = x;
        acc = acc + sector_level(rule, level - 1, x, weight * w, point, f);
    }
    acc
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn legendre_rule_is_exact_for_polynomials() {
        let rule = GaussLegendre::new(5);
        let v = rule.integrate(0.0, 2.0, |x| x.powi(9));
        assert!((v - 2f64.powi(10) / 10.0).abs() < 1e-11);
        let w: f64 = rule.mapped(-1.0, 1.0).map(|(_, w)| w).sum();
        assert!((w - 2.0).abs() < 1e-14);
    }

    #[test]
    fn large_rule_weights_sum_to_two() {
        let rule = GaussLegendre::new(128);
        let w: f64 = rule.mapped(-1.0, 1.0).map(|(_, w)| w).sum();
        assert!((w - 2.0).abs() < 1e-13);
        assert!((rule.integrate(0.0, std::f64::consts::PI, f64::sin) - 2.0).abs() < 1e-13);
    }

    #[test]
    fn half_line_power_law() {
        // ∫₀^∞ (1+r)^-3 dr = 1/2
        let rule = GaussLegendre::new(RADIAL_NODES);
        assert!((rule.integrate_half_line(|r| (1.0 + r).powi(-3)) - 0.5).abs() < 1e-13);
    }

    #[test]
    fn adaptive_handles_kinks() {
        let (v, _) = adaptive_gk(|x: f64| (x - 0.3).abs(), 0.0, 1.0, AdaptiveConfig::default()).unwrap();
        assert!((v - (0.09 + 0.49) / 2.0).abs() < 1e-12);
        let (s, _) = adaptive_gk(f64::sqrt, 0.0, 1.0, AdaptiveConfig::default()).unwrap();
        assert!((s - 2.0 / 3.0).abs() < 1e-10);
    }

    #[test]
    fn ordered_sector_volume() {
        // volume of {0 < x1 < x2 < x3 < 1} is 1/6
        let rule = GaussLegendre::new(4);
        let v: f64 = ordered_sector(&rule, 3, 1.0, &mut |_| 1.0);
        assert!((v - 1.0 / 6.0).abs() < 1e-14);
        let m: f64 = ordered_sector(&rule, 2, 1.0, &mut |x| x[0] * x[1]);
        // ∫₀¹ x2 ∫₀^{x2} x1 dx1 dx2 = 1/8
        assert!((m - 0.125).abs() < 1e-14);
    }
}
