//! Monte-Carlo verification of the colour-flavour identities.
//!
//! Fermionic identities are compared monomial by monomial: the left side is a
//! Haar average of `exp(ψ̄ O ψ)`, the right side a weighted average of
//! `exp ½(ψ̄ Z ψ̄ + ψ Z† ψ)` over the flavour measure. Bosonic identities are
//! compared as functions at probe vectors.

use num_complex::Complex64;
use rand::Rng;
use rand_distr::StandardNormal;

use super::measure::{c0_bosonic_paper, c0_fermionic_paper, BosonicMeasure, FermionicMeasure};
use crate::error::{Error, Result};
use crate::grassmann::{colour_determinant, lhs_integrand, rhs_integrand, ColourFlavourLayout, Multivector};
use crate::haar::{haar_real, run_batches, to_complex, Estimate, Group, McConfig, SlotSums};
use crate::linalg::ComplexMatrix;

/// Default pass threshold on the largest |z-score|.
pub const Z_THRESHOLD: f64 = 4.0;

/// Smallest sample budget accepted by the verifiers.
pub const MIN_SAMPLES: usize = 10_000;

/// Largest colour count for the SO(N) variant (Leibniz expansion of det 𝓜).
pub const MAX_SON_COLOURS: usize = 3;

/// Which constant multiplies the flavour-side average.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Normalization {
    /// `(∫ dμ)^{-1}`, fixed by matching constant terms.
    #[default]
    SelfConsistent,
    /// The closed-form product-of-Gamma constant.
    Paper,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Variant {
    Fermionic,
    Bosonic,
    SpecialOrthogonal,
}

impl Variant {
    pub fn name(&self) -> &'static str {
        match self {
            Variant::Fermionic => "fermionic",
            Variant::Bosonic => "bosonic",
            Variant::SpecialOrthogonal => "son",
        }
    }
}

/// One compared quantity: a monomial coefficient or a probe value.
#[derive(Debug, Clone, PartialEq)]
pub struct ComparisonRow {
    pub id: String,
    pub lhs: Estimate,
    pub rhs: Estimate,
    pub z_score: f64,
}

/// Flavour-side constant actually used versus the closed-form one.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct NormalizationAudit {
    pub self_consistent: f64,
    pub paper: f64,
    /// `paper / self_consistent`.
    pub ratio: f64,
    pub used: Normalization,
}

#[derive(Debug, Clone, PartialEq)]
pub struct VerificationReport {
    pub variant: Variant,
    pub colours: usize,
    pub flavours: usize,
    pub samples: usize,
    pub rows: Vec<ComparisonRow>,
    pub max_abs_z: f64,
    pub threshold: f64,
    pub passed: bool,
    pub normalization: NormalizationAudit,
    /// Kish effective sample size of the flavour-side weights.
    pub effective_samples: f64,
    /// SO(N) only: fitted coefficient of the `det 𝓜` term.
    pub fitted_k: Option<Complex64>,
    /// SO(N) only: largest |z| between the O(N) average and the mean of the
    /// SO(N) and reflected SO(N) averages.
    pub reflection_max_z: Option<f64>,
}

impl VerificationReport {
    fn finish(mut self) -> Self {
        self.max_abs_z = self.rows.iter().map(|r| r.z_score).fold(0.0, f64::max);
        if let Some(r) = self.reflection_max_z {
            self.max_abs_z = self.max_abs_z.max(r);
        }
        self.passed = self.max_abs_z <= self.threshold;
        self
    }
}

fn check_samples(samples: usize) -> Result<()> {
    if samples < MIN_SAMPLES {
        return Err(Error::Config(format!("verification needs at least {MIN_SAMPLES} samples, got {samples}")));
    }
    Ok(())
}

fn accumulate_multivector(acc: &mut SlotSums, w: f64, x: &Multivector) {
    for &(m, c) in x.terms() {
        acc.add(m as usize, w, c);
    }
}

/// Haar average of `lhs_integrand` over O(N) or SO(N), slot = monomial.
fn lhs_average(layout: ColourFlavourLayout, group: Group, cfg: McConfig) -> Result<SlotSums> {
    let slots = 1usize << layout.universe();
    run_batches(cfg.samples, cfg.stream, || SlotSums::new(slots), |rng, acc| {
        let o = to_complex(&haar_real(layout.colours, group, rng));
        let x = lhs_integrand(&o, layout)?;
        acc.begin(1.0);
        accumulate_multivector(acc, 1.0, &x);
        Ok(())
    })
}

fn compare_slots(
    layout: ColourFlavourLayout,
    lhs: &SlotSums,
    rhs: &SlotSums,
    rhs_scale: f64,
) -> Vec<ComparisonRow> {
    (0..lhs.slots())
        .filter(|&m| lhs.touched(m) || rhs.touched(m))
        .map(|m| {
            let l = lhs.estimate(m);
            let r = rhs.estimate(m).scale(rhs_scale);
            ComparisonRow {
                id: layout.label(m as u32),
                z_score: l.z_score_against(&r),
                lhs: l,
                rhs: r,
            }
        })
        .collect()
}

fn fermionic_audit(
    colours: usize,
    flavours: usize,
    measure: &FermionicMeasure,
    used: Normalization,
) -> Result<NormalizationAudit> {
    let paper = c0_fermionic_paper(colours, flavours)?;
    Ok(NormalizationAudit {
        self_consistent: measure.normalization,
        paper,
        ratio: paper / measure.normalization,
        used,
    })
}

/// Coefficient-wise check of the fermionic identity over O(N).
///
/// Left and right sides use disjoint substreams of `cfg`. The flavour-side
/// average is multiplied by `C_used / C_self`, which is 1 under
/// [`Normalization::SelfConsistent`].
pub fn verify_fermionic_cft(
    colours: usize,
    flavours: usize,
    cfg: McConfig,
    normalization: Normalization,
) -> Result<VerificationReport> {
    check_samples(cfg.samples)?;
    let layout = ColourFlavourLayout::new(colours, flavours)?;
    let measure = FermionicMeasure::new(colours, flavours, cfg.substream(2))?;
    let audit = fermionic_audit(colours, flavours, &measure, normalization)?;
    let lhs = lhs_average(layout, Group::O, cfg)?;
    let slots = 1usize << layout.universe();
    let rhs = run_batches(cfg.samples, cfg.stream.substream(1), || SlotSums::new(slots), |rng, acc| {
        let (z, w) = measure.sample(rng);
        let x = rhs_integrand(&z, layout)?;
        acc.begin(w);
        accumulate_multivector(acc, w, &x);
        Ok(())
    })?;
    let scale = match normalization {
        Normalization::SelfConsistent => 1.0,
        Normalization::Paper => audit.ratio,
    };
    Ok(VerificationReport {
        variant: Variant::Fermionic,
        colours,
        flavours,
        samples: cfg.samples,
        rows: compare_slots(layout, &lhs, &rhs, scale),
        max_abs_z: 0.0,
        threshold: Z_THRESHOLD,
        passed: false,
        normalization: audit,
        effective_samples: rhs.effective_samples(),
        fitted_k: None,
        reflection_max_z: None,
    }
    .finish())
}

/// Check of the SO(N) identity with its `det 𝓜` correction. The unknown
/// constant `K` is fitted by weighted least squares over all monomials, and
/// the O(N) average is cross-checked against the mean of the SO(N) and
/// reflected SO(N) averages with `R = diag(1, …, 1, -1)`.
pub fn verify_son_cft(colours: usize, flavours: usize, cfg: McConfig) -> Result<VerificationReport> {
    check_samples(cfg.samples)?;
    if colours > MAX_SON_COLOURS {
        return Err(Error::Config(format!(
            "SO(N) verification supports N <= {MAX_SON_COLOURS}, got {colours}"
        )));
    }
    let layout = ColourFlavourLayout::new(colours, flavours)?;
    let slots = 1usize << layout.universe();
    let measure = FermionicMeasure::new(colours, flavours, cfg.substream(2))?;
    let audit = fermionic_audit(colours, flavours, &measure, Normalization::SelfConsistent)?;

    // slots [0, S): SO(N) average; [S, 2S): mean of SO(N) and reflected SO(N)
    let son = run_batches(cfg.samples, cfg.stream, || SlotSums::new(2 * slots), |rng, acc| {
        let o = to_complex(&haar_real(colours, Group::SO, rng));
        let mut reflected = o.clone();
        for j in 0..colours {
            reflected[(colours - 1, j)] = -reflected[(colours - 1, j)];
        }
        let x = lhs_integrand(&o, layout)?;
        let y = lhs_integrand(&reflected, layout)?;
        acc.begin(1.0);
        accumulate_multivector(acc, 1.0, &x);
        let avg = x.add(&y)?.scale(Complex64::new(0.5, 0.0));
        for &(m, c) in avg.terms() {
            acc.add(slots + m as usize, 1.0, c);
        }
        Ok(())
    })?;
    let full = lhs_average(layout, Group::O, cfg.substream(3))?;

    // slots [0, S): exp(...) ; [S, 2S): exp(...) det 𝓜
    let rhs = run_batches(cfg.samples, cfg.stream.substream(1), || SlotSums::new(2 * slots), |rng, acc| {
        let (z, w) = measure.sample(rng);
        let x = rhs_integrand(&z, layout)?;
        let xd = x.gmul(&colour_determinant(&z, layout)?)?;
        acc.begin(w);
        accumulate_multivector(acc, w, &x);
        for &(m, c) in xd.terms() {
            acc.add(slots + m as usize, w, c);
        }
        Ok(())
    })?;

    let active: Vec<usize> = (0..slots)
        .filter(|&m| son.touched(m) || rhs.touched(m) || rhs.touched(slots + m))
        .collect();
    // weighted least squares for K in  L ≈ R0 + K R1
    let mut num = Complex64::new(0.0, 0.0);
    let mut den = 0.0;
    for &m in &active {
        let (l, r0, r1) = (son.estimate(m), rhs.estimate(m), rhs.estimate(slots + m));
        let var = (l.std_error.powi(2) + r0.std_error.powi(2)).max(1e-20);
        num += r1.mean.conj() * (l.mean - r0.mean) / var;
        den += r1.mean.norm_sqr() / var;
    }
    let k = if den > 0.0 { num / den } else { Complex64::new(0.0, 0.0) };

    let rows = active
        .iter()
        .map(|&m| {
            let l = son.estimate(m);
            let r0 = rhs.estimate(m);
            let r1 = rhs.estimate(slots + m);
            let r = Estimate {
                mean: r0.mean + k * r1.mean,
                std_error: r0.std_error.hypot(k.norm() * r1.std_error),
                samples: r0.samples,
            };
            ComparisonRow {
                id: layout.label(m as u32),
                z_score: l.z_score_against(&r),
                lhs: l,
                rhs: r,
            }
        })
        .collect();

    let reflection = (0..slots)
        .filter(|&m| full.touched(m) || son.touched(slots + m))
        .map(|m| full.estimate(m).z_score_against(&son.estimate(slots + m)))
        .fold(0.0, f64::max);

    Ok(VerificationReport {
        variant: Variant::SpecialOrthogonal,
        colours,
        flavours,
        samples: cfg.samples,
        rows,
        max_abs_z: 0.0,
        threshold: Z_THRESHOLD,
        passed: false,
        normalization: audit,
        effective_samples: rhs.effective_samples(),
        fitted_k: Some(k),
        reflection_max_z: Some(reflection),
    }
    .finish())
}

/// A pair of independent complex `N×n` source arrays `(φ, φ̄)`, row-major in
/// colour, column in flavour.
#[derive(Debug, Clone, PartialEq)]
pub struct Probe {
    pub phi: Vec<Complex64>,
    pub phi_bar: Vec<Complex64>,
}

impl Probe {
    pub fn zero(colours: usize, flavours: usize) -> Self {
        let z = vec![Complex64::new(0.0, 0.0); colours * flavours];
        Self {
            phi: z.clone(),
            phi_bar: z,
        }
    }
}

/// Random probes whose arrays have Frobenius norm uniform in `(0, max_norm]`.
pub fn random_probes<R: Rng + ?Sized>(
    colours: usize,
    flavours: usize,
    count: usize,
    max_norm: f64,
    rng: &mut R,
) -> Vec<Probe> {
    let draw = |rng: &mut R| {
        let v: Vec<Complex64> = (0..colours * flavours)
            .map(|_| Complex64::new(rng.sample(StandardNormal), rng.sample(StandardNormal)))
            .collect();
        let norm = v.iter().map(|c| c.norm_sqr()).sum::<f64>().sqrt();
        let target = max_norm * (1.0 - rng.random::<f64>());
        v.into_iter().map(|c| c * (target / norm)).collect::<Vec<_>>()
    };
    (0..count)
        .map(|_| {
            let phi = draw(rng);
            let phi_bar = draw(rng);
            Probe { phi, phi_bar }
        })
        .collect()
}

/// `exp(φ̄^i_a O_ij φ^j_a)`.
pub fn bosonic_lhs_value(o: &ComplexMatrix, probe: &Probe, flavours: usize) -> Complex64 {
    let nc = o.rows();
    let mut s = Complex64::new(0.0, 0.0);
    for a in 0..flavours {
        for i in 0..nc {
            let pb = probe.phi_bar[i * flavours + a];
            for j in 0..nc {
                s += pb * o[(i, j)] * probe.phi[j * flavours + a];
            }
        }
    }
    s.exp()
}

/// `exp ½(φ̄^i_a Z_ab φ̄^i_b + φ^i_a Z†_ab φ^i_b)`.
pub fn bosonic_rhs_value(z: &ComplexMatrix, probe: &Probe, colours: usize) -> Complex64 {
    let nf = z.rows();
    let mut s = Complex64::new(0.0, 0.0);
    for i in 0..colours {
        for a in 0..nf {
            for b in 0..nf {
                let pa = probe.phi_bar[i * nf + a];
                let pb = probe.phi_bar[i * nf + b];
                let qa = probe.phi[i * nf + a];
                let qb = probe.phi[i * nf + b];
                s += pa * z[(a, b)] * pb + qa * z[(b, a)].conj() * qb;
            }
        }
    }
    (s * 0.5).exp()
}

/// Probe-wise check of the bosonic identity over O(N).
pub fn verify_bosonic_cft(
    colours: usize,
    flavours: usize,
    probes: &[Probe],
    cfg: McConfig,
    normalization: Normalization,
) -> Result<VerificationReport> {
    check_samples(cfg.samples)?;
    let measure = BosonicMeasure::new(colours, flavours, cfg.substream(2))?;
    for p in probes {
        if p.phi.len() != colours * flavours || p.phi_bar.len() != colours * flavours {
            return Err(Error::Shape(format!("probe arrays must have {} entries", colours * flavours)));
        }
    }
    let paper = c0_bosonic_paper(colours, flavours)?;
    let audit = NormalizationAudit {
        self_consistent: measure.normalization,
        paper,
        ratio: paper / measure.normalization,
        used: normalization,
    };
    let np = probes.len();
    let lhs = run_batches(cfg.samples, cfg.stream, || SlotSums::new(np), |rng, acc| {
        let o = to_complex(&haar_real(colours, Group::O, rng));
        acc.begin(1.0);
        for (k, p) in probes.iter().enumerate() {
            acc.add(k, 1.0, bosonic_lhs_value(&o, p, flavours));
        }
        Ok(())
    })?;
    let rhs = run_batches(cfg.samples, cfg.stream.substream(1), || SlotSums::new(np), |rng, acc| {
        let z = measure.sample(rng)?;
        acc.begin(1.0);
        for (k, p) in probes.iter().enumerate() {
            acc.add(k, 1.0, bosonic_rhs_value(&z, p, colours));
        }
        Ok(())
    })?;
    let scale = match normalization {
        Normalization::SelfConsistent => 1.0,
        Normalization::Paper => audit.ratio,
    };
    let rows = (0..np)
        .map(|k| {
            let l = lhs.estimate(k);
            let r = rhs.estimate(k).scale(scale);
            ComparisonRow {
                id: format!("probe{k}"),
                z_score: l.z_score_against(&r),
                lhs: l,
                rhs: r,
            }
        })
        .collect();
    Ok(VerificationReport {
        variant: Variant::Bosonic,
        colours,
        flavours,
        samples: cfg.samples,
        rows,
        max_abs_z: 0.0,
        threshold: Z_THRESHOLD,
        passed: false,
        normalization: audit,
        effective_samples: rhs.effective_samples(),
        fitted_k: None,
        reflection_max_z: None,
    }
    .finish())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::haar::RngStream;

    #[test]
    fn one_colour_one_flavour_passes() {
        let r = verify_fermionic_cft(1, 1, McConfig::new(10_000, 0), Normalization::SelfConsistent).unwrap();
        assert!(r.passed, "{r:#?}");
        // E[O] over O(1) vanishes
        let row = r.rows.iter().find(|row| row.id == "pb1_1 p1_1").unwrap();
        assert!(row.lhs.mean.norm() < 4.0 * row.lhs.std_error);
        assert_eq!(r.rows[0].lhs.mean, Complex64::new(1.0, 0.0));
        assert_eq!(r.rows[0].rhs.mean, Complex64::new(1.0, 0.0));
    }

    #[test]
    fn sample_floor_and_cap() {
        assert!(matches!(
            verify_fermionic_cft(1, 1, McConfig::new(100, 0), Normalization::SelfConsistent),
            Err(Error::Config(_))
        ));
        assert!(matches!(
            verify_fermionic_cft(3, 3, McConfig::new(10_000, 0), Normalization::SelfConsistent),
            Err(Error::Config(_))
        ));
        assert!(matches!(verify_son_cft(4, 1, McConfig::new(10_000, 0)), Err(Error::Config(_))));
    }

    #[test]
    fn two_colours_two_flavours() {
        let r = verify_fermionic_cft(2, 2, McConfig::new(200_000, 1), Normalization::SelfConsistent).unwrap();
        assert!(r.passed, "max z {}", r.max_abs_z);
        assert!((r.normalization.ratio - 1.0).abs() < 1e-12);
    }

    #[test]
    fn lhs_monomials_are_balanced() {
        // each monomial of exp(ψ̄ O ψ) has as many ψ̄ as ψ in every flavour
        let layout = ColourFlavourLayout::new(2, 2).unwrap();
        let lhs = lhs_average(layout, Group::O, McConfig::new(20_000, 4)).unwrap();
        for m in (0..lhs.slots()).filter(|&m| lhs.touched(m)) {
            for a in 0..2 {
                let bars = (0..2).filter(|&i| m >> layout.bar(i, a) & 1 == 1).count();
                let psis = (0..2).filter(|&i| m >> layout.psi(i, a) & 1 == 1).count();
                assert_eq!(bars, psis, "{}", layout.label(m as u32));
            }
        }
    }

    #[test]
    fn son_single_colour_fits_exactly() {
        let r = verify_son_cft(1, 1, McConfig::new(10_000, 2)).unwrap();
        assert!(r.passed, "{r:#?}");
        let k = r.fitted_k.unwrap();
        assert!((k - Complex64::new(1.0, 0.0)).norm() < 1e-12, "{k}");
    }

    #[test]
    fn son_two_colours_one_flavour() {
        let r = verify_son_cft(2, 1, McConfig::new(200_000, 3)).unwrap();
        assert!(r.passed, "{r:#?}");
        assert!(r.reflection_max_z.unwrap() <= 4.0);
    }

    #[test]
    fn bosonic_zero_probe_is_exact() {
        let probes = vec![Probe::zero(4, 1)];
        let r = verify_bosonic_cft(4, 1, &probes, McConfig::new(10_000, 5), Normalization::SelfConsistent).unwrap();
        assert_eq!(r.rows[0].lhs.mean, Complex64::new(1.0, 0.0));
        assert_eq!(r.rows[0].rhs.mean, Complex64::new(1.0, 0.0));
        assert_eq!(r.max_abs_z, 0.0);
    }

    #[test]
    fn bosonic_random_probes() {
        let probes = random_probes(4, 1, 5, 0.5, &mut RngStream::new(6, 7).rng());
        let r = verify_bosonic_cft(4, 1, &probes, McConfig::new(200_000, 6), Normalization::SelfConsistent).unwrap();
        assert!(r.passed, "{r:#?}");
        assert!(matches!(
            verify_bosonic_cft(2, 1, &probes, McConfig::new(10_000, 0), Normalization::SelfConsistent),
            Err(Error::Domain(_))
        ));
    }

    #[test]
    fn bosonic_rhs_is_colour_rotation_invariant() {
        let mut rng = RngStream::new(8, 0).rng();
        let probe = random_probes(4, 1, 1, 0.5, &mut rng).pop().unwrap();
        let u = to_complex(&haar_real(4, Group::O, &mut rng));
        let rotate = |v: &[Complex64]| -> Vec<Complex64> {
            (0..4).map(|i| (0..4).map(|j| u[(i, j)] * v[j]).sum()).collect()
        };
        let rotated = Probe {
            phi: rotate(&probe.phi),
            phi_bar: rotate(&probe.phi_bar),
        };
        let m = BosonicMeasure::new(4, 1, McConfig::new(10, 0)).unwrap();
        for _ in 0..100 {
            let z = m.sample(&mut rng).unwrap();
            let a = bosonic_rhs_value(&z, &probe, 4);
            let b = bosonic_rhs_value(&z, &rotated, 4);
            assert!((a - b).norm() < 1e-12);
        }
    }
}
