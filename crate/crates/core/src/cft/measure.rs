//! Flavour-space measures on skew (fermionic) and symmetric (bosonic) complex
//! matrices, their normalizations, and samplers.
//!
//! Coordinates are the independent entries (strict upper triangle for skew,
//! upper triangle including the diagonal for symmetric), each with the flat
//! measure `dRe dIm`.

use std::f64::consts::PI;

use num_complex::Complex64;
use rand::Rng;
use rand_distr::StandardNormal;

use crate::error::{Error, Result};
use crate::haar::{run_batches, Estimate, McConfig, WeightedSum};
use crate::linalg::{det_row_major, log_gamma, ComplexMatrix};
use crate::quadrature::{GaussLegendre, RADIAL_NODES};

/// `C₀^F = π^{-n(n-1)/2} Π_{i=1}^{n-1} Γ(N+2i)/Γ(N+i)`, closed form.
pub fn c0_fermionic_paper(colours: usize, flavours: usize) -> Result<f64> {
    check_counts(colours, flavours)?;
    let (nc, nf) = (colours as f64, flavours as f64);
    let mut log = -0.5 * nf * (nf - 1.0) * PI.ln();
    for i in 1..flavours {
        let i = i as f64;
        log += log_gamma(nc + 2.0 * i)? - log_gamma(nc + i)?;
    }
    Ok(log.exp())
}

/// `C₀^B = π^{-n(n+1)/2} (N-2n)/2 Π_{i=1}^{n-1} (N/2-i) Γ(N-1-i)/Γ(N-1-2i)`, closed form.
pub fn c0_bosonic_paper(colours: usize, flavours: usize) -> Result<f64> {
    check_counts(colours, flavours)?;
    check_bosonic_integrable(colours, flavours)?;
    let (nc, nf) = (colours as f64, flavours as f64);
    let mut log = -0.5 * nf * (nf + 1.0) * PI.ln() + ((nc - 2.0 * nf) / 2.0).ln();
    for i in 1..flavours {
        let i = i as f64;
        log += (nc / 2.0 - i).ln() + log_gamma(nc - 1.0 - i)? - log_gamma(nc - 1.0 - 2.0 * i)?;
    }
    Ok(log.exp())
}

fn check_counts(colours: usize, flavours: usize) -> Result<()> {
    if colours == 0 || flavours == 0 {
        return Err(Error::Domain("colour and flavour counts must be positive".into()));
    }
    Ok(())
}

fn check_bosonic_integrable(colours: usize, flavours: usize) -> Result<()> {
    if colours <= 2 * flavours {
        return Err(Error::Domain(format!(
            "bosonic measure needs N > 2n, got N={colours}, n={flavours}"
        )));
    }
    Ok(())
}

/// Number of independent complex entries of an `n×n` skew matrix.
pub fn skew_entries(n: usize) -> usize {
    n * n.saturating_sub(1) / 2
}

/// Number of independent complex entries of an `n×n` symmetric matrix.
pub fn symmetric_entries(n: usize) -> usize {
    n * (n + 1) / 2
}

fn skew_from_entries(n: usize, w: &[Complex64]) -> ComplexMatrix {
    let mut z = ComplexMatrix::zeros(n, n);
    let mut k = 0;
    for a in 0..n {
        for b in a + 1..n {
            z[(a, b)] = w[k];
            z[(b, a)] = -w[k];
            k += 1;
        }
    }
    z
}

fn symmetric_from_entries(n: usize, w: &[Complex64]) -> ComplexMatrix {
    let mut z = ComplexMatrix::zeros(n, n);
    let mut k = 0;
    for a in 0..n {
        for b in a..n {
            z[(a, b)] = w[k];
            z[(b, a)] = w[k];
            k += 1;
        }
    }
    z
}

/// `det(1 + s Z Z†)` (real for Hermitian argument), `s = ±1`.
fn det_one_plus(z: &ComplexMatrix, s: f64) -> f64 {
    let n = z.rows();
    let zzd = z.matmul(&z.adjoint()).expect("square");
    let m: Vec<Complex64> = (0..n * n)
        .map(|k| {
            let (i, j) = (k / n, k % n);
            let id = if i == j { 1.0 } else { 0.0 };
            Complex64::new(id, 0.0) + zzd[(i, j)] * s
        })
        .collect();
    det_row_major(&m, n).re
}

/// `1 - Z Z†` positive definite, tested by its leading principal minors.
fn contraction(z: &ComplexMatrix) -> Option<f64> {
    let n = z.rows();
    let zzd = z.matmul(&z.adjoint()).expect("square");
    let m = |i: usize, j: usize| {
        let id = if i == j { 1.0 } else { 0.0 };
        Complex64::new(id, 0.0) - zzd[(i, j)]
    };
    let mut last = 1.0;
    for k in 1..=n {
        let sub: Vec<Complex64> = (0..k * k).map(|t| m(t / k, t % k)).collect();
        last = det_row_major(&sub, k).re;
        if last <= 0.0 {
            return None;
        }
    }
    Some(last)
}

/// Defensive mixture proposal on `d = 2k` real coordinates: with probability
/// ½ an isotropic Gaussian of per-coordinate variance `s²`, otherwise a
/// multivariate Cauchy (Student t, one degree of freedom) of the same scale.
/// The Cauchy half decays like `|x|^{-(d+1)}` along every direction, which
/// keeps importance weights square-integrable on the low-rank strata where
/// `det(1 + Z Z†)` grows slowest.
struct MixtureProposal {
    dim: usize,
    scale2: f64,
    log_gauss_norm: f64,
    log_cauchy_norm: f64,
}

impl MixtureProposal {
    fn new(entries: usize, scale2: f64) -> Self {
        let d = (2 * entries) as f64;
        Self {
            dim: 2 * entries,
            scale2,
            log_gauss_norm: -0.5 * d * (2.0 * PI * scale2).ln(),
            log_cauchy_norm: libm::lgamma(0.5 * (d + 1.0))
                - libm::lgamma(0.5)
                - 0.5 * d * PI.ln()
                - 0.5 * d * scale2.ln(),
        }
    }

    fn log_density(&self, norm2: f64) -> f64 {
        let d = self.dim as f64;
        let g = self.log_gauss_norm - 0.5 * norm2 / self.scale2;
        let c = self.log_cauchy_norm - 0.5 * (d + 1.0) * (norm2 / self.scale2).ln_1p();
        let hi = g.max(c);
        hi + (0.5 * ((g - hi).exp() + (c - hi).exp())).ln()
    }

    /// Complex entries and the log proposal density at them.
    fn draw<R: Rng + ?Sized>(&self, rng: &mut R) -> (Vec<Complex64>, f64) {
        let heavy = rng.random::<bool>();
        let stretch = if heavy {
            let chi: f64 = rng.sample(StandardNormal);
            1.0 / chi.abs()
        } else {
            1.0
        };
        let s = self.scale2.sqrt() * stretch;
        let mut norm2 = 0.0;
        let entries: Vec<Complex64> = (0..self.dim / 2)
            .map(|_| {
                let re: f64 = rng.sample(StandardNormal);
                let im: f64 = rng.sample(StandardNormal);
                let w = Complex64::new(re * s, im * s);
                norm2 += w.norm_sqr();
                w
            })
            .collect();
        (entries, self.log_density(norm2))
    }
}

/// The fermionic flavour measure `dZ dZ† / det^{N/2+n-1}(1 + Z Z†)` on complex
/// skew `n×n` matrices, carrying its self-consistent normalization
/// `(∫ dμ)^{-1}`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FermionicMeasure {
    pub colours: usize,
    pub flavours: usize,
    pub normalization: f64,
}

impl FermionicMeasure {
    /// Measure with normalization from [`c0_fermionic_selfconsistent`];
    /// `cfg` is only used when `n >= 3`.
    pub fn new(colours: usize, flavours: usize, cfg: McConfig) -> Result<Self> {
        let normalization = c0_fermionic_selfconsistent(colours, flavours, cfg)?.mean.re;
        Ok(Self {
            colours,
            flavours,
            normalization,
        })
    }

    pub fn exponent(&self) -> f64 {
        fermionic_exponent(self.colours, self.flavours)
    }

    /// Unnormalized density `det^{-(N/2+n-1)}(1 + Z Z†)`.
    pub fn density(&self, z: &ComplexMatrix) -> f64 {
        det_one_plus(z, 1.0).powf(-self.exponent())
    }

    /// Importance sample `(Z, w)` from a Gaussian/Cauchy mixture whose bulk
    /// matches `exp(-e tr Z Z†)`, the small-`Z` form of the density;
    /// `w = density / proposal`. Weighted averages `Σ w f / Σ w` estimate
    /// `∫ dμ f / ∫ dμ`, and `E[w] = ∫ dμ`.
    pub fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> (ComplexMatrix, f64) {
        let n = self.flavours;
        let k = skew_entries(n);
        if k == 0 {
            return (ComplexMatrix::zeros(n, n), 1.0);
        }
        // tr Z Z† = 2 Σ|w|², so each real coordinate has variance 1/(4e)
        let proposal = MixtureProposal::new(k, 0.25 / self.exponent());
        let (entries, log_q) = proposal.draw(rng);
        let z = skew_from_entries(n, &entries);
        let w = (-self.exponent() * det_one_plus(&z, 1.0).ln() - log_q).exp();
        (z, w)
    }
}

fn fermionic_exponent(colours: usize, flavours: usize) -> f64 {
    colours as f64 / 2.0 + flavours as f64 - 1.0
}

/// `(∫ dμ)^{-1}` for the fermionic measure with flat coordinates. Exact for
/// `n = 1` (a point) and `n = 2` (radial quadrature of
/// `π ∫₀^∞ (1+r)^{-(N+2)} dr`); importance-sampled for larger `n`.
pub fn c0_fermionic_selfconsistent(colours: usize, flavours: usize, cfg: McConfig) -> Result<Estimate> {
    check_counts(colours, flavours)?;
    let e = fermionic_exponent(colours, flavours);
    let nf = flavours as f64;
    // scaling Z -> tZ: det grows like t^{2n}, volume like t^{n(n-1)}
    if flavours >= 2 && 2.0 * nf * e <= nf * (nf - 1.0) {
        return Err(Error::Domain(format!("fermionic measure diverges for N={colours}, n={flavours}")));
    }
    match flavours {
        1 => Ok(Estimate::exact(Complex64::new(1.0, 0.0))),
        2 => {
            let rule = GaussLegendre::new(RADIAL_NODES);
            // det(1 + ZZ†) = (1 + |a|²)², d²a = π d|a|²
            let volume = PI * rule.integrate_half_line(|r| (1.0 + r).powf(-2.0 * e));
            Ok(Estimate::exact(Complex64::new(1.0 / volume, 0.0)))
        }
        _ => {
            let measure = FermionicMeasure {
                colours,
                flavours,
                normalization: f64::NAN,
            };
            let acc = run_batches(cfg.samples, cfg.stream, WeightedSum::default, |rng, acc| {
                let (_, w) = measure.sample(rng);
                acc.push(1.0, Complex64::new(w, 0.0));
                Ok(())
            })?;
            let vol = acc.estimate();
            let v = vol.mean.re;
            Ok(Estimate {
                mean: Complex64::new(1.0 / v, 0.0),
                std_error: vol.std_error / (v * v),
                samples: vol.samples,
            })
        }
    }
}

/// The bosonic flavour measure `det^{N/2-n-1}(1 - Z Z†) dZ dZ†` on complex
/// symmetric `n×n` matrices with `1 - Z Z† > 0`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BosonicMeasure {
    pub colours: usize,
    pub flavours: usize,
    pub normalization: f64,
}

/// Proposals tried before the rejection sampler gives up.
const MAX_REJECTIONS: usize = 10_000_000;

impl BosonicMeasure {
    pub fn new(colours: usize, flavours: usize, cfg: McConfig) -> Result<Self> {
        let normalization = c0_bosonic_selfconsistent(colours, flavours, cfg)?.mean.re;
        Ok(Self {
            colours,
            flavours,
            normalization,
        })
    }

    pub fn exponent(&self) -> f64 {
        bosonic_exponent(self.colours, self.flavours)
    }

    /// Unnormalized density; zero outside the domain.
    pub fn density(&self, z: &ComplexMatrix) -> f64 {
        match contraction(z) {
            Some(_) => det_one_plus(z, -1.0).powf(self.exponent()),
            None => 0.0,
        }
    }

    /// Exact draw from the normalized measure. For `n = 1` the radius is
    /// inverted from its CDF; otherwise entries are proposed uniformly in the
    /// unit disc and accepted with probability `det^{N/2-n-1}(1 - Z Z†)`,
    /// which needs `N >= 2n + 2`.
    pub fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> Result<ComplexMatrix> {
        let n = self.flavours;
        let e = self.exponent();
        if n == 1 {
            // density of r = |z|² is ∝ (1-r)^{e}, e = N/2 - 2 > -1
            let u: f64 = 1.0 - rng.random::<f64>();
            let r = 1.0 - u.powf(1.0 / (e + 1.0));
            let theta = 2.0 * PI * rng.random::<f64>();
            return Ok(ComplexMatrix::from_fn(1, 1, |_, _| Complex64::from_polar(r.sqrt(), theta)));
        }
        if e < 0.0 {
            return Err(Error::Config(format!(
                "rejection sampler needs N >= 2n + 2 for n >= 2, got N={}, n={n}",
                self.colours
            )));
        }
        let k = symmetric_entries(n);
        let mut entries = vec![Complex64::new(0.0, 0.0); k];
        for _ in 0..MAX_REJECTIONS {
            for w in entries.iter_mut() {
                *w = uniform_disc(rng);
            }
            let z = symmetric_from_entries(n, &entries);
            if let Some(det) = contraction(&z) {
                if rng.random::<f64>() < det.powf(e) {
                    return Ok(z);
                }
            }
        }
        Err(Error::Config("bosonic rejection sampler exhausted its proposal budget".into()))
    }
}

fn uniform_disc<R: Rng + ?Sized>(rng: &mut R) -> Complex64 {
    let r = rng.random::<f64>().sqrt();
    let theta = 2.0 * PI * rng.random::<f64>();
    Complex64::from_polar(r, theta)
}

fn bosonic_exponent(colours: usize, flavours: usize) -> f64 {
    colours as f64 / 2.0 - flavours as f64 - 1.0
}

/// `(∫ dμ)^{-1}` for the bosonic measure. Closed radial integral for
/// `n = 1`, Monte Carlo over the product of unit discs otherwise.
pub fn c0_bosonic_selfconsistent(colours: usize, flavours: usize, cfg: McConfig) -> Result<Estimate> {
    check_counts(colours, flavours)?;
    check_bosonic_integrable(colours, flavours)?;
    let e = bosonic_exponent(colours, flavours);
    if flavours == 1 {
        // π ∫₀¹ (1-r)^e dr, e > -1
        let volume = PI / (e + 1.0);
        return Ok(Estimate::exact(Complex64::new(1.0 / volume, 0.0)));
    }
    let k = symmetric_entries(flavours);
    let box_volume = PI.powi(k as i32);
    let acc = run_batches(cfg.samples, cfg.stream, WeightedSum::default, |rng, acc| {
        let entries: Vec<Complex64> = (0..k).map(|_| uniform_disc(rng)).collect();
        let z = symmetric_from_entries(flavours, &entries);
        let v = contraction(&z).map_or(0.0, |d| d.powf(e));
        acc.push(1.0, Complex64::new(v * box_volume, 0.0));
        Ok(())
    })?;
    let vol = acc.estimate();
    let v = vol.mean.re;
    Ok(Estimate {
        mean: Complex64::new(1.0 / v, 0.0),
        std_error: vol.std_error / (v * v),
        samples: vol.samples,
    })
}
