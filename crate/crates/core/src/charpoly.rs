//! Moments `F_G(z) = ⟨|det(z − G O)|^{2m}⟩` of the characteristic polynomial
//! of `G O`, with `G` real diagonal and `O` Haar on O(N).
//!
//! Three evaluators: the closed `m = 1` sum over elementary symmetric
//! polynomials, the flavour-space integral of a product of Pfaffians
//! (`m ≤ 2`), and direct Haar Monte Carlo.

use num_complex::Complex64;

use crate::cft::FermionicMeasure;
use crate::error::{Error, Result};
use crate::haar::{mc_expectation, run_batches, Estimate, Group, McConfig, WeightedSum};
use crate::linalg::{
    binomial, determinant, elementary_symmetric_all, pfaffian, ComplexMatrix, RealVector,
};
use crate::quadrature::{GaussLegendre, RADIAL_NODES};

/// Largest `m` the Pfaffian integral supports.
pub const MAX_PFAFFIAN_MOMENT: usize = 2;

/// Minimum Kish effective sample size, as a fraction of the nominal count.
pub const MIN_ESS_FRACTION: f64 = 0.01;

#[derive(Debug, Clone, PartialEq)]
pub struct MomentQuery {
    pub z: Complex64,
    pub g: RealVector,
    pub m: usize,
}

impl MomentQuery {
    pub fn new(z: Complex64, g: RealVector, m: usize) -> Result<Self> {
        if m == 0 {
            return Err(Error::Config("moment order m must be at least 1".into()));
        }
        if g.is_empty() {
            return Err(Error::Dimension("G needs at least one entry".into()));
        }
        if !(z.re.is_finite() && z.im.is_finite()) {
            return Err(Error::Domain("z must be finite".into()));
        }
        Ok(Self { z, g, m })
    }

    pub fn colours(&self) -> usize {
        self.g.len()
    }
}

/// `Σ_l |z|^{2(N−l)} S^l(G²) / C(N, l)`.
pub fn moment_m1_closed(q: &MomentQuery) -> Result<f64> {
    if q.m != 1 {
        return Err(Error::Config(format!("closed form needs m = 1, got m = {}", q.m)));
    }
    let n = q.colours();
    let s = elementary_symmetric_all(&q.g.squared());
    let r = q.z.norm_sqr();
    Ok((0..=n).map(|l| r.powi((n - l) as i32) * s[l] / binomial(n, l)).sum())
}

/// `|det(z − G O)|^{2m}` for one group element.
pub fn moment_integrand(q: &MomentQuery, o: &ComplexMatrix) -> Complex64 {
    let n = q.colours();
    let a = ComplexMatrix::from_fn(n, n, |i, j| {
        let diag = if i == j { q.z } else { Complex64::new(0.0, 0.0) };
        diag - o[(i, j)] * q.g.values()[i]
    });
    let d = determinant(&a).expect("square");
    Complex64::new(d.norm_sqr().powi(q.m as i32), 0.0)
}

/// Haar Monte-Carlo estimate of `F_G(z)`.
pub fn moment_mc(q: &MomentQuery, cfg: McConfig) -> Result<Estimate> {
    mc_expectation(|o| moment_integrand(q, o), q.colours(), cfg.samples, cfg.stream, Group::O)
}

/// `[[g² Z, 𝒵⊗I_m], [−𝒵⊗I_m, Z†]]` with `𝒵 = diag(z, z̄)`; `Z` is `2m×2m`.
pub fn build_pf_kernel(zm: &ComplexMatrix, g: f64, z: Complex64, m: usize) -> Result<ComplexMatrix> {
    if m == 0 || zm.rows() != 2 * m || zm.cols() != 2 * m {
        return Err(Error::Shape(format!(
            "kernel for m = {m} needs a {0}x{0} flavour matrix, got {1}x{2}",
            2 * m,
            zm.rows(),
            zm.cols()
        )));
    }
    let script = ComplexMatrix::diagonal(&[z, z.conj()]).kron(&ComplexMatrix::identity(m));
    let minus = script.scale(Complex64::new(-1.0, 0.0));
    let top = zm.scale(Complex64::new(g * g, 0.0));
    ComplexMatrix::block2x2(&top, &script, &minus, &zm.adjoint())
}

/// `Π_i pf K(Z, g_i, z)`.
fn pfaffian_product(zm: &ComplexMatrix, q: &MomentQuery) -> Result<Complex64> {
    let mut p = Complex64::new(1.0, 0.0);
    for &g in q.g.values() {
        p *= pfaffian(&build_pf_kernel(zm, g, q.z, q.m)?)?;
    }
    Ok(p)
}

/// Constant fixed by `F_0(z) = |z|^{2Nm}`: at `G = 0` the product of
/// Pfaffians no longer depends on `Z`, so the constant is its inverse at
/// `Z = 0, z = 1`.
fn calibration(colours: usize, m: usize) -> Result<Complex64> {
    let zero = ComplexMatrix::zeros(2 * m, 2 * m);
    let one = pfaffian(&build_pf_kernel(&zero, 0.0, Complex64::new(1.0, 0.0), m)?)?;
    Ok(one.powi(colours as i32).inv())
}

/// Result of [`moment_pfaffian_integral`].
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PfaffianMoment {
    pub estimate: Estimate,
    /// Kish effective sample size; `None` for the quadrature path.
    pub effective_samples: Option<f64>,
}

/// `F_G(z)` as the normalized flavour-space integral of `Π_i pf K_i`.
///
/// `m = 1`: the integrand depends on `r = |Z₁₂|²` only and the normalized
/// measure is `(N+1)(1+r)^{-(N+2)} dr`; the polynomial integrand makes the
/// substituted Gauss–Legendre rule exact. `m = 2`: self-normalized importance
/// sampling over the six entries of a `4×4` skew `Z`.
pub fn moment_pfaffian_integral(q: &MomentQuery, cfg: McConfig) -> Result<PfaffianMoment> {
    let n = q.colours();
    let c = calibration(n, q.m)?;
    match q.m {
        1 => {
            let rule = GaussLegendre::new(RADIAL_NODES);
            let density = (n + 1) as f64;
            let mut v = Complex64::new(0.0, 0.0);
            for (t, w) in rule.mapped(0.0, 1.0) {
                // r = t/(1−t): (1+r)^{-(N+2)} dr = (1−t)^N dt
                let a = Complex64::new((t / (1.0 - t)).sqrt(), 0.0);
                let zm = ComplexMatrix::from_fn(2, 2, |i, j| match (i, j) {
                    (0, 1) => a,
                    (1, 0) => -a,
                    _ => Complex64::new(0.0, 0.0),
                });
                v += pfaffian_product(&zm, q)? * (density * w * (1.0 - t).powi(n as i32));
            }
            Ok(PfaffianMoment {
                estimate: Estimate::exact(v * c),
                effective_samples: None,
            })
        }
        2 => {
            if cfg.samples < 2 {
                return Err(Error::Config(format!("need at least 2 samples, got {}", cfg.samples)));
            }
            let measure = FermionicMeasure {
                colours: n,
                flavours: 2 * q.m,
                normalization: f64::NAN,
            };
            let acc = run_batches(cfg.samples, cfg.stream, WeightedSum::default, |rng, acc| {
                let (zm, w) = measure.sample(rng);
                acc.push(w, pfaffian_product(&zm, q)? * c);
                Ok(())
            })?;
            let ess = acc.effective_samples();
            if ess < MIN_ESS_FRACTION * cfg.samples as f64 {
                return Err(Error::Config(format!(
                    "effective sample size {ess:.0} below {:.0}% of {} samples",
                    100.0 * MIN_ESS_FRACTION,
                    cfg.samples
                )));
            }
            Ok(PfaffianMoment {
                estimate: acc.estimate(),
                effective_samples: Some(ess),
            })
        }
        m => Err(Error::Config(format!(
            "Pfaffian integral supports m <= {MAX_PFAFFIAN_MOMENT}, got m = {m}"
        ))),
    }
}
