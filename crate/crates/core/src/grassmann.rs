//! Sparse Grassmann (exterior) algebra with complex coefficients.
//!
//! A monomial is a bit set over the generators; its canonical form is the
//! product of the set generators in increasing index order. Products pick up
//! the sign `(-1)^k` where `k` counts generator pairs that must be swapped to
//! restore canonical order.

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::linalg::ComplexMatrix;

/// Largest supported universe, `2 * N * n`.
pub const MAX_GENERATORS: u32 = 16;

/// Terms smaller than this fraction of the largest coefficient are dropped.
pub const PRUNE_RTOL: f64 = 1e-15;

/// Sign `+1`/`-1` of the canonical reordering of `a * b` (disjoint monomials).
#[inline]
pub fn reorder_sign(a: u32, b: u32) -> f64 {
    let mut crossings = 0u32;
    let mut rest = b;
    while rest != 0 {
        let y = rest.trailing_zeros();
        crossings += (a >> y >> 1).count_ones();
        rest &= rest - 1;
    }
    if crossings % 2 == 0 {
        1.0
    } else {
        -1.0
    }
}

/// Element of the Grassmann algebra on `universe` generators.
#[derive(Debug, Clone, PartialEq)]
pub struct Multivector {
    universe: u32,
    // sorted by monomial, no zero coefficients
    terms: Vec<(u32, Complex64)>,
}

impl Multivector {
    pub fn zero(universe: u32) -> Self {
        assert!(universe <= MAX_GENERATORS, "universe of {universe} generators exceeds the cap");
        Self {
            universe,
            terms: Vec::new(),
        }
    }

    pub fn scalar(universe: u32, c: Complex64) -> Self {
        Self::from_terms(universe, [(0, c)])
    }

    pub fn one(universe: u32) -> Self {
        Self::scalar(universe, Complex64::new(1.0, 0.0))
    }

    /// The single generator `e_k`.
    pub fn generator(universe: u32, k: u32) -> Result<Self> {
        if k >= universe {
            return Err(Error::Index(format!("generator {k} outside universe of {universe}")));
        }
        Ok(Self::from_terms(universe, [(1 << k, Complex64::new(1.0, 0.0))]))
    }

    /// Build from `(monomial, coefficient)` pairs; repeated monomials are summed.
    pub fn from_terms(universe: u32, terms: impl IntoIterator<Item = (u32, Complex64)>) -> Self {
        let mut out = Self::zero(universe);
        let mut raw: Vec<(u32, Complex64)> = terms.into_iter().collect();
        debug_assert!(raw.iter().all(|(m, _)| universe == 32 || m >> universe == 0));
        raw.sort_unstable_by_key(|t| t.0);
        out.terms = combine_sorted(raw);
        out
    }

    /// `Σ c · e_p e_q` over the given triples.
    pub fn bilinear(universe: u32, pairs: impl IntoIterator<Item = (u32, u32, Complex64)>) -> Result<Self> {
        let mut raw = Vec::new();
        for (p, q, c) in pairs {
            if p >= universe || q >= universe {
                return Err(Error::Index(format!("generator pair ({p}, {q}) outside universe of {universe}")));
            }
            if p == q {
                continue;
            }
            let sign = if p < q { 1.0 } else { -1.0 };
            raw.push(((1u32 << p) | (1u32 << q), c * sign));
        }
        Ok(Self::from_terms(universe, raw))
    }

    pub fn universe(&self) -> u32 {
        self.universe
    }

    pub fn terms(&self) -> &[(u32, Complex64)] {
        &self.terms
    }

    pub fn len(&self) -> usize {
        self.terms.len()
    }

    pub fn is_empty(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn coefficient(&self, monomial: u32) -> Complex64 {
        match self.terms.binary_search_by_key(&monomial, |t| t.0) {
            Ok(i) => self.terms[i].1,
            Err(_) => Complex64::new(0.0, 0.0),
        }
    }

    pub fn scalar_part(&self) -> Complex64 {
        self.coefficient(0)
    }

    /// Highest grade present (0 for the zero element).
    pub fn max_grade(&self) -> u32 {
        self.terms.iter().map(|t| t.0.count_ones()).max().unwrap_or(0)
    }

    pub fn is_even(&self) -> bool {
        self.terms.iter().all(|t| t.0.count_ones() % 2 == 0)
    }

    pub fn scale(&self, s: Complex64) -> Self {
        Self::from_terms(self.universe, self.terms.iter().map(|&(m, c)| (m, c * s)))
    }

    pub fn add(&self, other: &Self) -> Result<Self> {
        self.check_universe(other)?;
        Ok(Self::from_terms(
            self.universe,
            self.terms.iter().chain(&other.terms).copied(),
        ))
    }

    pub fn sub(&self, other: &Self) -> Result<Self> {
        self.add(&other.scale(Complex64::new(-1.0, 0.0)))
    }

    /// Graded (wedge) product.
    pub fn gmul(&self, other: &Self) -> Result<Self> {
        self.check_universe(other)?;
        let mut raw = Vec::with_capacity(self.terms.len() * other.terms.len());
        for &(ma, ca) in &self.terms {
            for &(mb, cb) in &other.terms {
                if ma & mb != 0 {
                    continue;
                }
                raw.push((ma | mb, ca * cb * reorder_sign(ma, mb)));
            }
        }
        raw.sort_unstable_by_key(|t| t.0);
        Ok(Self {
            universe: self.universe,
            terms: combine_sorted(raw),
        })
    }

    /// `Σ_k x^k / k!` for an even element without scalar part; the series
    /// terminates once the powers vanish.
    pub fn gexp(&self) -> Result<Self> {
        if !self.is_even() {
            return Err(Error::Domain("exponential of an element with odd-grade terms".into()));
        }
        if self.scalar_part() != Complex64::new(0.0, 0.0) {
            return Err(Error::Domain("exponential of an element with a scalar part".into()));
        }
        let mut sum = Self::one(self.universe);
        let mut power = Self::one(self.universe);
        let mut k = 1.0;
        loop {
            power = power.gmul(self)?.scale(Complex64::new(1.0 / k, 0.0));
            if power.is_empty() {
                return Ok(sum);
            }
            sum = sum.add(&power)?;
            k += 1.0;
        }
    }

    fn check_universe(&self, other: &Self) -> Result<()> {
        if self.universe != other.universe {
            return Err(Error::Shape(format!(
                "generator universes differ: {} vs {}",
                self.universe, other.universe
            )));
        }
        Ok(())
    }
}

fn combine_sorted(raw: Vec<(u32, Complex64)>) -> Vec<(u32, Complex64)> {
    let mut out: Vec<(u32, Complex64)> = Vec::with_capacity(raw.len());
    for (m, c) in raw {
        match out.last_mut() {
            Some(last) if last.0 == m => last.1 += c,
            _ => out.push((m, c)),
        }
    }
    let largest = out.iter().map(|t| t.1.norm()).fold(0.0, f64::max);
    let floor = PRUNE_RTOL * largest;
    out.retain(|t| t.1.norm() > floor);
    out
}

/// Determinant of a square array of mutually commuting (even) elements by the
/// Leibniz expansion. Intended for orders up to 4.
pub fn leibniz_det(entries: &[Multivector], n: usize) -> Result<Multivector> {
    if entries.len() != n * n || n == 0 {
        return Err(Error::Shape(format!("{} entries do not form a non-empty {n}x{n} array", entries.len())));
    }
    let universe = entries[0].universe();
    let mut total = Multivector::zero(universe);
    let mut perm: Vec<usize> = (0..n).collect();
    for_each_permutation(&mut perm, 0, 1.0, &mut |p, sign| {
        let mut term = Multivector::scalar(universe, Complex64::new(sign, 0.0));
        for (row, &col) in p.iter().enumerate() {
            term = term.gmul(&entries[row * n + col])?;
        }
        total = total.add(&term)?;
        Ok(())
    })?;
    Ok(total)
}

fn for_each_permutation(
    perm: &mut Vec<usize>,
    k: usize,
    sign: f64,
    f: &mut impl FnMut(&[usize], f64) -> Result<()>,
) -> Result<()> {
    if k == perm.len() {
        return f(perm, sign);
    }
    for i in k..perm.len() {
        perm.swap(k, i);
        let s = if i == k { sign } else { -sign };
        for_each_permutation(perm, k + 1, s, f)?;
        perm.swap(k, i);
    }
    Ok(())
}

/// Generator layout for `N` colours and `n` flavours: the `ψ̄` block
/// (`ψ̄^i_a` at `i*n + a`) precedes the `ψ` block (`ψ^i_a` at `N*n + i*n + a`).
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct ColourFlavourLayout {
    pub colours: usize,
    pub flavours: usize,
}

impl ColourFlavourLayout {
    pub fn new(colours: usize, flavours: usize) -> Result<Self> {
        if colours == 0 || flavours == 0 {
            return Err(Error::Dimension("colour and flavour counts must be positive".into()));
        }
        if colours * flavours > (MAX_GENERATORS / 2) as usize {
            return Err(Error::Config(format!(
                "N*n = {} exceeds the supported maximum of {}",
                colours * flavours,
                MAX_GENERATORS / 2
            )));
        }
        Ok(Self { colours, flavours })
    }

    pub fn universe(&self) -> u32 {
        (2 * self.colours * self.flavours) as u32
    }

    /// Index of `ψ̄^i_a`.
    pub fn bar(&self, colour: usize, flavour: usize) -> u32 {
        (colour * self.flavours + flavour) as u32
    }

    /// Index of `ψ^i_a`.
    pub fn psi(&self, colour: usize, flavour: usize) -> u32 {
        (self.colours * self.flavours + colour * self.flavours + flavour) as u32
    }

    /// Mask of the whole `ψ̄` block.
    pub fn bar_mask(&self) -> u32 {
        (1u32 << (self.colours * self.flavours)) - 1
    }

    /// Human-readable monomial label such as `pb1_1 p2_1` (1-based colour_flavour).
    pub fn label(&self, monomial: u32) -> String {
        if monomial == 0 {
            return "1".into();
        }
        let block = (self.colours * self.flavours) as u32;
        let mut parts = Vec::new();
        for k in 0..self.universe() {
            if monomial >> k & 1 == 1 {
                let (prefix, idx) = if k < block { ("pb", k) } else { ("p", k - block) };
                let idx = idx as usize;
                parts.push(format!("{prefix}{}_{}", idx / self.flavours + 1, idx % self.flavours + 1));
            }
        }
        parts.join(" ")
    }
}

/// `exp(ψ̄^i_a O_ij ψ^j_a)`, summed over colours `i, j` and flavours `a`.
///
/// The exponent splits into one commuting piece per flavour, so the
/// exponential is evaluated as the product of the per-flavour exponentials.
pub fn lhs_integrand(o: &ComplexMatrix, layout: ColourFlavourLayout) -> Result<Multivector> {
    let n = layout.colours;
    if o.rows() != n || o.cols() != n {
        return Err(Error::Shape(format!("O is {}x{}, expected {n}x{n}", o.rows(), o.cols())));
    }
    let universe = layout.universe();
    let mut out = Multivector::one(universe);
    for a in 0..layout.flavours {
        let x = Multivector::bilinear(
            universe,
            (0..n).flat_map(|i| (0..n).map(move |j| (i, j))).map(|(i, j)| (layout.bar(i, a), layout.psi(j, a), o[(i, j)])),
        )?;
        out = out.gmul(&x.gexp()?)?;
    }
    Ok(out)
}

/// `exp ½(ψ̄^i_a Z_ab ψ̄^i_b + ψ^i_a Z†_ab ψ^i_b)` for an `n×n` skew `Z`,
/// evaluated as the product over colours of the commuting per-colour pieces.
pub fn rhs_integrand(z: &ComplexMatrix, layout: ColourFlavourLayout) -> Result<Multivector> {
    let nf = layout.flavours;
    if z.rows() != nf || z.cols() != nf {
        return Err(Error::Shape(format!("Z is {}x{}, expected {nf}x{nf}", z.rows(), z.cols())));
    }
    if !z.is_skew(1e-12 * z.max_abs().max(1.0)) {
        return Err(Error::Shape("Z must be skew-symmetric".into()));
    }
    let zd = z.adjoint();
    let universe = layout.universe();
    let mut out = Multivector::one(universe);
    let half = Complex64::new(0.5, 0.0);
    for i in 0..layout.colours {
        let mut pairs = Vec::with_capacity(2 * nf * nf);
        for a in 0..nf {
            for b in 0..nf {
                pairs.push((layout.bar(i, a), layout.bar(i, b), z[(a, b)] * half));
                pairs.push((layout.psi(i, a), layout.psi(i, b), zd[(a, b)] * half));
            }
        }
        let y = Multivector::bilinear(universe, pairs)?;
        out = out.gmul(&y.gexp()?)?;
    }
    Ok(out)
}

/// `det 𝓜` with `𝓜_ij = ψ̄^i_a (1 + Z Z†)_ab ψ^j_b`.
pub fn colour_determinant(z: &ComplexMatrix, layout: ColourFlavourLayout) -> Result<Multivector> {
    let nf = layout.flavours;
    if z.rows() != nf || z.cols() != nf {
        return Err(Error::Shape(format!("Z is {}x{}, expected {nf}x{nf}", z.rows(), z.cols())));
    }
    let kernel = ComplexMatrix::identity(nf).add(&z.matmul(&z.adjoint())?)?;
    let universe = layout.universe();
    let nc = layout.colours;
    let mut entries = Vec::with_capacity(nc * nc);
    for i in 0..nc {
        for j in 0..nc {
            let pairs = (0..nf)
                .flat_map(|a| (0..nf).map(move |b| (a, b)))
                .map(|(a, b)| (layout.bar(i, a), layout.psi(j, b), kernel[(a, b)]));
            entries.push(Multivector::bilinear(universe, pairs)?);
        }
    }
    leibniz_det(&entries, nc)
}
