//! Averages `I_W(λ, γ) = ∫ dA W(AAᵀ) det(λ − A) det(γ − Aᵀ)` over real `N×N`
//! matrices whose weight factorizes over squared singular values.
//!
//! After the flavour integral the average becomes
//! `∫₀^∞ dr (1+r)^{-(N+2)} J(r; λγ)` with the singular-value integral
//! `J(r; p) = ∫ Π_{i<j}|g_i² − g_j²| Π_i (p + r g_i²) W(g_i²) dg_i`.
//! `J` is evaluated three ways: directly on the ordered sector, as a
//! determinant of monomial columns, and (Jacobi weight only) as a Pfaffian of
//! the skew matrix `α` assembled from Beta-function sums. Every average is
//! reported as a ratio to a reference point, since the prefactor is not
//! tracked.

use std::cell::RefCell;

use num_complex::Complex64;
use rand_distr::StandardNormal;

use crate::error::{Error, Result};
use crate::haar::{run_batches, Estimate, McConfig, WeightedSum};
use crate::linalg::{
    det_row_major, determinant, factorial, log_beta, log_gamma, pfaffian, symmetric_coefficients,
    ComplexMatrix,
};
use crate::quadrature::{adaptive_gk, ordered_sector, AdaptiveConfig, GaussLegendre, RADIAL_NODES};

/// Largest dimension handled by the nested singular-value quadrature.
pub const MAX_QUADRATURE_DIM: usize = 4;

/// Relative tolerance between closed-form and quadrature `α` components.
pub const ALPHA_RTOL: f64 = 1e-6;

/// Cutoff for Gaussian singular values; `g² e^{-g²/2}` is below `1e-40` beyond it.
const GAUSSIAN_G_MAX: f64 = 14.0;
const GAUSSIAN_NODES: usize = 80;

fn c(re: f64) -> Complex64 {
    Complex64::new(re, 0.0)
}

/// Jacobi-ensemble query: `W(x) = x^a (1 − x)^b` on `[0, 1]`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct JacobiQuery {
    pub lambda: Complex64,
    pub gamma: Complex64,
    pub a: u32,
    pub b: u32,
    pub n: usize,
}

impl JacobiQuery {
    pub fn new(lambda: Complex64, gamma: Complex64, a: u32, b: u32, n: usize) -> Result<Self> {
        if n == 0 {
            return Err(Error::Dimension("matrix dimension must be at least 1".into()));
        }
        for v in [lambda, gamma] {
            if !(v.re.is_finite() && v.im.is_finite()) {
                return Err(Error::Domain("λ and γ must be finite".into()));
            }
        }
        Ok(Self { lambda, gamma, a, b, n })
    }

    /// `λγ`, the only combination the average depends on.
    pub fn lg(&self) -> Complex64 {
        self.lambda * self.gamma
    }

    /// Same query with `λ = lg`, `γ = 1`.
    pub fn with_lg(&self, lg: Complex64) -> Self {
        Self {
            lambda: lg,
            gamma: c(1.0),
            ..*self
        }
    }

    fn weight(&self) -> SingularWeight {
        SingularWeight::Jacobi { a: self.a, b: self.b }
    }
}

/// Separable singular-value weight `W(g²)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum SingularWeight {
    /// `x^a (1 − x)^b`, `x ∈ [0, 1]`.
    Jacobi { a: u32, b: u32 },
    /// `e^{-x/2}`, the Ginibre ensemble.
    Gaussian,
}

impl SingularWeight {
    fn at(&self, g: f64) -> f64 {
        let x = g * g;
        match *self {
            Self::Jacobi { a, b } => x.powi(a as i32) * (1.0 - x).powi(b as i32),
            Self::Gaussian => (-0.5 * x).exp(),
        }
    }

    fn upper(&self) -> f64 {
        match self {
            Self::Jacobi { .. } => 1.0,
            Self::Gaussian => GAUSSIAN_G_MAX,
        }
    }

    /// Nodes per coordinate. For the Jacobi weight the nested rule is exact:
    /// the outermost coordinate carries a polynomial of degree at most
    /// `N(N−1) + N(2a+2b+2) + N`.
    fn nodes(&self, n: usize) -> usize {
        match *self {
            Self::Jacobi { a, b } => {
                let degree = n * (n - 1) + n * (2 * (a + b) as usize + 2) + n;
                degree / 2 + 2
            }
            Self::Gaussian => GAUSSIAN_NODES,
        }
    }
}

/// Range of the flavour radial variable `r`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum RDomain {
    /// `[0, ∞)`, the range of `|a|²` for a complex flavour variable `a`.
    #[default]
    HalfLine,
    /// `[0, 1]`; kept only to show that it breaks the Ginibre check.
    Unit,
}

/// `h(a, b; x) = ∫₀^x g^{2a} (1 − g²)^b dg` by its finite Γ-sum.
pub fn h_closed(a: f64, b: u32, x: f64) -> Result<f64> {
    if !(0.0..=1.0).contains(&x) {
        return Err(Error::Domain(format!("h needs x in [0, 1], got {x}")));
    }
    if a.is_nan() || a < 0.0 {
        return Err(Error::Domain(format!("h needs a >= 0, got {a}")));
    }
    if x == 0.0 {
        return Ok(0.0);
    }
    let bf = b as f64;
    let head = log_gamma(bf + 1.0)? + log_gamma(a + 0.5)?;
    let (lx, y) = (x.ln(), 1.0 - x * x);
    let mut sum = 0.0;
    for i in 0..=b {
        let fi = i as f64;
        let log = head - log_gamma(bf - fi + 1.0)? - log_gamma(a + fi + 1.5)? + (2.0 * (a + fi) + 1.0) * lx;
        sum += 0.5 * log.exp() * y.powi((b - i) as i32);
    }
    Ok(sum)
}

/// `k_i(a, b; x) = h(a+i, b; x) + (r/λγ) h(a+i+1, b; x)`.
pub fn k_func(i: u32, a: u32, b: u32, r: f64, lg: Complex64, x: f64) -> Result<Complex64> {
    let rho = rho(r, lg)?;
    let base = (a + i) as f64;
    Ok(c(h_closed(base, b, x)?) + rho * h_closed(base + 1.0, b, x)?)
}

fn rho(r: f64, lg: Complex64) -> Result<Complex64> {
    if lg == c(0.0) {
        return Err(Error::Domain("λγ = 0: use the direct quadrature".into()));
    }
    Ok(c(r) / lg)
}

/// `α_ij = A0 + ρ A1 + ρ² A2` with `ρ = r/λγ`; the components depend on
/// `(i, j, a, b)` only.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct AlphaComponents {
    pub a0: f64,
    pub a1: f64,
    pub a2: f64,
}

impl AlphaComponents {
    pub fn value(&self, rho: Complex64) -> Complex64 {
        c(self.a0) + rho * self.a1 + rho * rho * self.a2
    }

    fn max_rel_diff(&self, other: &Self) -> f64 {
        [(self.a0, other.a0), (self.a1, other.a1), (self.a2, other.a2)]
            .iter()
            .map(|&(x, y)| (x - y).abs() / x.abs().max(y.abs()).max(1e-300))
            .filter(|d| d.is_finite())
            .fold(0.0, f64::max)
    }
}

/// `∫₀¹ g^{2c} (1−g²)^b h(d, b; g) dg` by the Beta sum.
fn beta_block(cc: f64, d: f64, b: u32) -> Result<f64> {
    let bf = b as f64;
    let head = log_gamma(bf + 1.0)? + log_gamma(d + 0.5)?;
    let mut sum = 0.0;
    for l in 0..=b {
        let fl = l as f64;
        let log = head + log_beta(cc + d + fl + 1.0, 2.0 * bf - fl + 1.0)?
            - log_gamma(bf - fl + 1.0)?
            - log_gamma(d + fl + 1.5)?;
        sum += 0.25 * log.exp();
    }
    Ok(sum)
}

impl std::ops::Neg for AlphaComponents {
    type Output = Self;
    fn neg(self) -> Self {
        Self {
            a0: -self.a0,
            a1: -self.a1,
            a2: -self.a2,
        }
    }
}

/// Closed-form `α` components; `α_ji = −α_ij` bit for bit.
pub fn alpha_components(i: u32, j: u32, a: u32, b: u32) -> Result<AlphaComponents> {
    if i == j {
        return Ok(AlphaComponents::default());
    }
    if i > j {
        return Ok(-alpha_components(j, i, a, b)?);
    }
    let (ci, cj) = ((a + i) as f64, (a + j) as f64);
    let t = |x: f64, y: f64| beta_block(x, y, b);
    Ok(AlphaComponents {
        a0: t(ci, cj)? - t(cj, ci)?,
        a1: t(ci, cj + 1.0)? + t(ci + 1.0, cj)? - t(cj, ci + 1.0)? - t(cj + 1.0, ci)?,
        a2: t(ci + 1.0, cj + 1.0)? - t(cj + 1.0, ci + 1.0)?,
    })
}

/// `α` components from the defining integral
/// `∫₀¹ (1+ρg²) g^{2a}(1−g²)^b (g^{2i} k_j(g) − g^{2j} k_i(g)) dg`,
/// with `k` itself integrated numerically: nested adaptive Gauss–Kronrod,
/// independent of the Γ-sums.
pub fn alpha_components_quadrature(i: u32, j: u32, a: u32, b: u32) -> Result<AlphaComponents> {
    if i == j {
        return Ok(AlphaComponents::default());
    }
    if i > j {
        return Ok(-alpha_components_quadrature(j, i, a, b)?);
    }
    let cfg = AdaptiveConfig::default();
    let w = |g: f64| g.powi(2 * a as i32) * (1.0 - g * g).powi(b as i32);
    // k_i(g) = inner(a+i, g) + ρ inner(a+i+1, g)
    let inner = |e: u32, g: f64| adaptive_gk(|t| t.powi(2 * e as i32) * (1.0 - t * t).powi(b as i32), 0.0, g, cfg);
    let outer = |f: &dyn Fn(f64) -> Result<f64>| -> Result<f64> {
        let err = RefCell::new(None);
        let v = adaptive_gk(
            |g| {
                f(g).unwrap_or_else(|e| {
                    err.borrow_mut().get_or_insert(e);
                    0.0
                })
            },
            0.0,
            1.0,
            cfg,
        )?;
        match err.into_inner() {
            Some(e) => Err(e),
            None => Ok(v.0),
        }
    };
    let (pi, pj) = (2 * i as i32, 2 * j as i32);
    let a0 = outer(&|g| Ok(w(g) * (g.powi(pi) * inner(a + j, g)?.0 - g.powi(pj) * inner(a + i, g)?.0)))?;
    let a1 = outer(&|g| {
        let g2 = g * g;
        let kj = g.powi(pi) * (inner(a + j + 1, g)?.0 + g2 * inner(a + j, g)?.0);
        let ki = g.powi(pj) * (inner(a + i + 1, g)?.0 + g2 * inner(a + i, g)?.0);
        Ok(w(g) * (kj - ki))
    })?;
    let a2 = outer(&|g| {
        let g2 = g * g;
        Ok(w(g) * g2 * (g.powi(pi) * inner(a + j + 1, g)?.0 - g.powi(pj) * inner(a + i + 1, g)?.0))
    })?;
    Ok(AlphaComponents { a0, a1, a2 })
}

/// Closed-form `α_ij` at `(r, λγ)`.
pub fn alpha_entry(i: u32, j: u32, a: u32, b: u32, r: f64, lg: Complex64) -> Result<Complex64> {
    Ok(alpha_components(i, j, a, b)?.value(rho(r, lg)?))
}

/// Quadrature `α_ij` at `(r, λγ)`.
pub fn alpha_entry_quadrature(i: u32, j: u32, a: u32, b: u32, r: f64, lg: Complex64) -> Result<Complex64> {
    Ok(alpha_components_quadrature(i, j, a, b)?.value(rho(r, lg)?))
}

/// A parameter cell where the closed form and the defining integral disagree.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AlphaFlag {
    pub i: u32,
    pub j: u32,
    pub a: u32,
    pub b: u32,
    pub closed: AlphaComponents,
    pub quadrature: AlphaComponents,
    pub rel_diff: f64,
}

/// `α` components for indices `0..dim`, cross-checked entry by entry. The
/// quadrature value is used wherever a cell is flagged.
#[derive(Debug, Clone, PartialEq)]
pub struct AlphaTable {
    pub dim: usize,
    pub a: u32,
    pub b: u32,
    entries: Vec<AlphaComponents>,
    pub flags: Vec<AlphaFlag>,
}

impl AlphaTable {
    pub fn new(dim: usize, a: u32, b: u32) -> Result<Self> {
        let mut entries = vec![AlphaComponents::default(); dim * dim];
        let mut flags = Vec::new();
        for i in 0..dim as u32 {
            for j in i + 1..dim as u32 {
                let closed = alpha_components(i, j, a, b)?;
                let quadrature = alpha_components_quadrature(i, j, a, b)?;
                let rel_diff = closed.max_rel_diff(&quadrature);
                let used = if rel_diff > ALPHA_RTOL {
                    flags.push(AlphaFlag {
                        i,
                        j,
                        a,
                        b,
                        closed,
                        quadrature,
                        rel_diff,
                    });
                    quadrature
                } else {
                    closed
                };
                entries[i as usize * dim + j as usize] = used;
                entries[j as usize * dim + i as usize] = -used;
            }
        }
        Ok(Self {
            dim,
            a,
            b,
            entries,
            flags,
        })
    }

    pub fn components(&self, i: usize, j: usize) -> AlphaComponents {
        self.entries[i * self.dim + j]
    }

    /// `α(ρ)` as a dense skew matrix.
    pub fn matrix(&self, rho: Complex64) -> ComplexMatrix {
        ComplexMatrix::from_fn(self.dim, self.dim, |i, j| self.components(i, j).value(rho))
    }
}

/// `J(r; λγ)` assembled from Pfaffians (de Bruijn): for even `N`,
/// `(λγ)^N N! pf(−α)`; for odd `N`, `α` is bordered by `k_i(a, b; 1)`.
pub fn inner_integral_pfaffian(q: &JacobiQuery, table: &AlphaTable, r: f64) -> Result<Complex64> {
    let n = q.n;
    if table.dim != n || (table.a, table.b) != (q.a, q.b) {
        return Err(Error::Shape(format!("α table is {}-dimensional, query needs {n}", table.dim)));
    }
    let lg = q.lg();
    let rho = rho(r, lg)?;
    let alpha = table.matrix(rho);
    let prefactor = lg.powi(n as i32) * factorial(n);
    if n % 2 == 0 {
        let sign = if (n / 2) % 2 == 0 { 1.0 } else { -1.0 };
        return Ok(prefactor * sign * pfaffian(&alpha)?);
    }
    let mut border = Vec::with_capacity(n);
    for i in 0..n as u32 {
        border.push(k_func(i, q.a, q.b, r, lg, 1.0)?);
    }
    let bordered = ComplexMatrix::from_fn(n + 1, n + 1, |i, j| match (i < n, j < n) {
        (true, true) => alpha[(i, j)],
        (true, false) => border[i],
        (false, true) => -border[j],
        (false, false) => c(0.0),
    });
    // pf[[−α, k], [−kᵀ, 0]] = (−1)^{(N+1)/2 + 1} pf[[α, k], [−kᵀ, 0]]
    let sign = if ((n + 1) / 2 + 1) % 2 == 0 { 1.0 } else { -1.0 };
    Ok(prefactor * sign * pfaffian(&bordered)?)
}

fn check_quadrature_dim(n: usize) -> Result<()> {
    if n > MAX_QUADRATURE_DIM {
        return Err(Error::Config(format!(
            "nested quadrature supports N <= {MAX_QUADRATURE_DIM}, got N = {n}"
        )));
    }
    Ok(())
}

/// `E_l = ∫ Π_{i<j}|g_i² − g_j²| Π_i W(g_i²) S^l(g²) dg` over `[0, upper]^N`,
/// so that `J(r; p) = Σ_l p^{N−l} r^l E_l`. Integrated on the ordered sector
/// and multiplied by `N!`.
pub fn singular_value_moments(weight: SingularWeight, n: usize) -> Result<Vec<f64>> {
    check_quadrature_dim(n)?;
    let rule = GaussLegendre::new(weight.nodes(n));
    let mut out = Vec::with_capacity(n + 1);
    for l in 0..=n {
        let v: f64 = ordered_sector(&rule, n, weight.upper(), &mut |g| {
            let sq: Vec<f64> = g.iter().map(|x| x * x).collect();
            let mut f = 1.0;
            for i in 0..n {
                f *= weight.at(g[i]);
                for j in i + 1..n {
                    f *= (sq[i] - sq[j]).abs();
                }
            }
            let e = symmetric_coefficients(&sq);
            f * e[l]
        });
        out.push(v * factorial(n));
    }
    Ok(out)
}

/// `J(r; λγ)` by direct quadrature of the singular-value integral.
pub fn inner_integral_quadrature(q: &JacobiQuery, r: f64) -> Result<Complex64> {
    let e = singular_value_moments(q.weight(), q.n)?;
    Ok(polynomial_in_r(&e, q.lg(), r))
}

fn polynomial_in_r(e: &[f64], lg: Complex64, r: f64) -> Complex64 {
    let n = e.len() - 1;
    (0..=n).map(|l| lg.powi((n - l) as i32) * r.powi(l as i32) * e[l]).sum()
}

/// `N! ∫_{0<g_1<…<g_N<1} det[W(g_i²) g_i^{2j} (λγ + r g_i²)]`, the
/// determinant form of `J(r; λγ)` with monomial columns. Rows are ordered by
/// increasing `g`, where the monomial determinant is positive.
pub fn mehta_determinant(q: &JacobiQuery, r: f64) -> Result<Complex64> {
    let n = q.n;
    check_quadrature_dim(n)?;
    let weight = q.weight();
    let rule = GaussLegendre::new(weight.nodes(n));
    let lg = q.lg();
    let mut m = vec![c(0.0); n * n];
    let v: Complex64 = ordered_sector(&rule, n, weight.upper(), &mut |g| {
        for i in 0..n {
            let x = g[i] * g[i];
            let row = (lg + r * x) * weight.at(g[i]);
            for j in 0..n {
                m[i * n + j] = row * x.powi(j as i32);
            }
        }
        det_row_major(&m, n)
    });
    Ok(v * factorial(n))
}

/// `R_l = ∫ r^l (1+r)^{-(N+2)} dr` over the chosen domain, `l = 0..=N`.
fn radial_moments(n: usize, domain: RDomain) -> Vec<f64> {
    let rule = GaussLegendre::new(RADIAL_NODES);
    let p = -(n as i32 + 2);
    (0..=n)
        .map(|l| match domain {
            RDomain::HalfLine => rule.integrate_half_line(|r| r.powi(l as i32) * (1.0 + r).powi(p)),
            RDomain::Unit => rule.integrate(0.0, 1.0, |r| r.powi(l as i32) * (1.0 + r).powi(p)),
        })
        .collect()
}

/// `I(λγ)` up to its constant, from the singular-value moments.
fn reduced_average(e: &[f64], radial: &[f64], lg: Complex64) -> Complex64 {
    let n = e.len() - 1;
    (0..=n).map(|l| lg.powi((n - l) as i32) * e[l] * radial[l]).sum()
}

/// `I_W(λ, γ) / I_W(1, 1)` by nested quadrature, `N <= 4`.
pub fn jacobi_quadrature(q: &JacobiQuery) -> Result<Complex64> {
    let e = singular_value_moments(q.weight(), q.n)?;
    let radial = radial_moments(q.n, RDomain::HalfLine);
    Ok(reduced_average(&e, &radial, q.lg()) / reduced_average(&e, &radial, c(1.0)))
}

/// Result of [`jacobi_pfaffian`].
#[derive(Debug, Clone, PartialEq)]
pub struct JacobiResult {
    pub ratio: Complex64,
    /// `α` cells where the closed form was replaced by quadrature.
    pub flags: Vec<AlphaFlag>,
}

/// `I_W(λ, γ) / I_W(1, 1)` from the Pfaffian assembly, any `N`. The
/// integrand in `r` is a degree-`N` polynomial times `(1+r)^{-(N+2)}`, which
/// the substituted Gauss–Legendre rule integrates exactly.
pub fn jacobi_pfaffian(q: &JacobiQuery) -> Result<JacobiResult> {
    let table = AlphaTable::new(q.n, q.a, q.b)?;
    let rule = GaussLegendre::new(RADIAL_NODES);
    let integral = |query: &JacobiQuery| -> Result<Complex64> {
        let mut acc = c(0.0);
        for (t, w) in rule.mapped(0.0, 1.0) {
            // r = t/(1−t): (1+r)^{-(N+2)} dr = (1−t)^N dt
            let r = t / (1.0 - t);
            acc += inner_integral_pfaffian(query, &table, r)? * (w * (1.0 - t).powi(query.n as i32));
        }
        Ok(acc)
    };
    let num = integral(q)?;
    let den = integral(&q.with_lg(c(1.0)))?;
    Ok(JacobiResult {
        ratio: num / den,
        flags: table.flags,
    })
}

/// `Σ_{k=0}^{N} (λγ)^k / k!`, the Ginibre average normalized at `λγ = 0`.
pub fn ginibre_closed(lambda: Complex64, gamma: Complex64, n: usize) -> Complex64 {
    let p = lambda * gamma;
    let mut term = c(1.0);
    let mut sum = term;
    for k in 1..=n {
        term = term * p / k as f64;
        sum += term;
    }
    sum
}

/// Monte-Carlo average of `det(λ − A) det(γ − Aᵀ)` over real Gaussian `A`,
/// divided by its `λγ = 0` value `N!`.
pub fn ginibre_mc(lambda: Complex64, gamma: Complex64, n: usize, cfg: McConfig) -> Result<Estimate> {
    if n == 0 {
        return Err(Error::Dimension("matrix dimension must be at least 1".into()));
    }
    if cfg.samples < 2 {
        return Err(Error::Config(format!("need at least 2 samples, got {}", cfg.samples)));
    }
    let acc = run_batches(cfg.samples, cfg.stream, WeightedSum::default, |rng, acc| {
        use rand::Rng;
        let a: Vec<f64> = (0..n * n).map(|_| rng.sample(StandardNormal)).collect();
        let shifted = |s: Complex64, transpose: bool| {
            ComplexMatrix::from_fn(n, n, |i, j| {
                let x = if transpose { a[j * n + i] } else { a[i * n + j] };
                let d = if i == j { s } else { c(0.0) };
                d - x
            })
        };
        let v = determinant(&shifted(lambda, false))? * determinant(&shifted(gamma, true))?;
        acc.push(1.0, v);
        Ok(())
    })?;
    Ok(acc.estimate().scale(1.0 / factorial(n)))
}

/// The Ginibre average through the singular-value reduction with
/// `W(x) = e^{-x/2}`, normalized at `λγ = 0`.
pub fn ginibre_pipeline_ratio(lambda: Complex64, gamma: Complex64, n: usize, domain: RDomain) -> Result<Complex64> {
    if n == 0 {
        return Err(Error::Dimension("matrix dimension must be at least 1".into()));
    }
    let e = singular_value_moments(SingularWeight::Gaussian, n)?;
    let radial = radial_moments(n, domain);
    Ok(reduced_average(&e, &radial, lambda * gamma) / reduced_average(&e, &radial, c(0.0)))
}
