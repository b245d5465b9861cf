//! Haar sampling on O(N) and SO(N) and a batched, seeded Monte-Carlo driver.
//!
//! Every Monte-Carlo estimate in the crate is produced by [`run_batches`]:
//! the sample budget is cut into fixed-size batches and batch `b` draws from
//! ChaCha stream `(stream_index << 32) | b` of the configured seed. Batches are
//! evaluated on the rayon pool and merged in batch order, so a given
//! `(seed, stream_index, samples)` reproduces bit-identical results for any
//! worker count.

use nalgebra::DMatrix;
use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::linalg::ComplexMatrix;

/// Samples evaluated per RNG stream.
pub const BATCH_SIZE: usize = 4096;

/// A reproducible random stream: identical `(seed, stream_index)` yields an
/// identical sample sequence.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct RngStream {
    pub seed: u64,
    pub stream_index: u32,
}

impl RngStream {
    pub fn new(seed: u64, stream_index: u32) -> Self {
        Self { seed, stream_index }
    }

    /// A sibling stream with a different index; used to give independent
    /// estimators of one run disjoint randomness.
    pub fn substream(&self, offset: u32) -> Self {
        Self {
            seed: self.seed,
            stream_index: self.stream_index.wrapping_add(offset),
        }
    }

    /// Generator for batch `batch` of this stream.
    pub fn batch_rng(&self, batch: u32) -> ChaCha8Rng {
        let mut rng = ChaCha8Rng::seed_from_u64(self.seed);
        rng.set_stream(((self.stream_index as u64) << 32) | batch as u64);
        rng
    }

    pub fn rng(&self) -> ChaCha8Rng {
        self.batch_rng(0)
    }
}

/// Sample budget and random stream for one Monte-Carlo estimate.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct McConfig {
    pub samples: usize,
    pub stream: RngStream,
}

impl McConfig {
    pub fn new(samples: usize, seed: u64) -> Self {
        Self {
            samples,
            stream: RngStream::new(seed, 0),
        }
    }

    /// Same budget on a sibling stream.
    pub fn substream(&self, offset: u32) -> Self {
        Self {
            samples: self.samples,
            stream: self.stream.substream(offset),
        }
    }
}

/// A Monte-Carlo result: mean, standard error of the mean and sample count.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Estimate {
    pub mean: Complex64,
    pub std_error: f64,
    pub samples: u64,
}

impl Estimate {
    /// An exact value, carried as an estimate with zero error.
    pub fn exact(value: Complex64) -> Self {
        Self {
            mean: value,
            std_error: 0.0,
            samples: 0,
        }
    }

    /// Distance to `value` in units of this estimate's standard error.
    pub fn z_score(&self, value: Complex64) -> f64 {
        z_score(self.mean - value, self.std_error)
    }

    /// Distance to another estimate in units of the combined standard error.
    pub fn z_score_against(&self, other: &Estimate) -> f64 {
        z_score(self.mean - other.mean, self.std_error.hypot(other.std_error))
    }

    pub fn scale(&self, s: f64) -> Self {
        Self {
            mean: self.mean * s,
            std_error: self.std_error * s.abs(),
            samples: self.samples,
        }
    }
}

/// `|diff| / sigma`; exact agreement (to rounding) with zero sigma scores 0.
pub fn z_score(diff: Complex64, sigma: f64) -> f64 {
    let d = diff.norm();
    if sigma > 0.0 {
        d / sigma
    } else if d <= 1e-10 {
        0.0
    } else {
        f64::INFINITY
    }
}

/// Which compact group to sample.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Group {
    O,
    SO,
}

/// Partial sums that can be merged across batches.
pub trait Accumulate: Send {
    fn merge(&mut self, other: Self);
}

/// Weighted sums for a (self-normalized) importance-sampling mean of a
/// complex quantity. Plain Monte Carlo is the special case `w = 1`.
#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct WeightedSum {
    n: u64,
    sw: f64,
    sw2: f64,
    swf: Complex64,
    sw2f: Complex64,
    sw2f2: f64,
}

impl WeightedSum {
    pub fn push(&mut self, w: f64, f: Complex64) {
        self.n += 1;
        self.sw += w;
        self.sw2 += w * w;
        self.swf += f * w;
        self.sw2f += f * (w * w);
        self.sw2f2 += w * w * f.norm_sqr();
    }

    pub fn count(&self) -> u64 {
        self.n
    }

    /// Kish effective sample size `(Σw)² / Σw²`.
    pub fn effective_samples(&self) -> f64 {
        if self.sw2 > 0.0 {
            self.sw * self.sw / self.sw2
        } else {
            0.0
        }
    }

    /// Mean of the raw weights, i.e. the unnormalized integral estimate.
    pub fn weight_mean(&self) -> f64 {
        self.sw / self.n as f64
    }

    /// Self-normalized mean `Σwf / Σw` with its delta-method standard error.
    pub fn estimate(&self) -> Estimate {
        ratio_estimate(self.n, self.sw, self.sw2, self.swf, self.sw2f, self.sw2f2)
    }
}

impl Accumulate for WeightedSum {
    fn merge(&mut self, o: Self) {
        self.n += o.n;
        self.sw += o.sw;
        self.sw2 += o.sw2;
        self.swf += o.swf;
        self.sw2f += o.sw2f;
        self.sw2f2 += o.sw2f2;
    }
}

fn ratio_estimate(n: u64, sw: f64, sw2: f64, swf: Complex64, sw2f: Complex64, sw2f2: f64) -> Estimate {
    if sw == 0.0 {
        return Estimate {
            mean: Complex64::new(0.0, 0.0),
            std_error: f64::INFINITY,
            samples: n,
        };
    }
    let mean = swf / sw;
    let ss = sw2f2 - 2.0 * (mean.conj() * sw2f).re + mean.norm_sqr() * sw2;
    Estimate {
        mean,
        std_error: ss.max(0.0).sqrt() / sw.abs(),
        samples: n,
    }
}

/// [`WeightedSum`] for many quantities sharing one weight per sample, indexed
/// by dense slot numbers.
#[derive(Debug, Clone, PartialEq)]
pub struct SlotSums {
    n: u64,
    sw: f64,
    sw2: f64,
    swf: Vec<Complex64>,
    sw2f: Vec<Complex64>,
    sw2f2: Vec<f64>,
    touched: Vec<bool>,
}

impl SlotSums {
    pub fn new(slots: usize) -> Self {
        Self {
            n: 0,
            sw: 0.0,
            sw2: 0.0,
            swf: vec![Complex64::new(0.0, 0.0); slots],
            sw2f: vec![Complex64::new(0.0, 0.0); slots],
            sw2f2: vec![0.0; slots],
            touched: vec![false; slots],
        }
    }

    /// Start a new sample of weight `w`; slots not added to are zero for it.
    pub fn begin(&mut self, w: f64) {
        self.n += 1;
        self.sw += w;
        self.sw2 += w * w;
    }

    pub fn add(&mut self, slot: usize, w: f64, f: Complex64) {
        self.swf[slot] += f * w;
        self.sw2f[slot] += f * (w * w);
        self.sw2f2[slot] += w * w * f.norm_sqr();
        self.touched[slot] = true;
    }

    pub fn slots(&self) -> usize {
        self.swf.len()
    }

    /// Whether any sample ever wrote to `slot`.
    pub fn touched(&self, slot: usize) -> bool {
        self.touched[slot]
    }

    pub fn estimate(&self, slot: usize) -> Estimate {
        ratio_estimate(self.n, self.sw, self.sw2, self.swf[slot], self.sw2f[slot], self.sw2f2[slot])
    }

    pub fn effective_samples(&self) -> f64 {
        if self.sw2 > 0.0 {
            self.sw * self.sw / self.sw2
        } else {
            0.0
        }
    }

    pub fn count(&self) -> u64 {
        self.n
    }

    pub fn weight_mean(&self) -> f64 {
        self.sw / self.n as f64
    }
}

impl Accumulate for SlotSums {
    fn merge(&mut self, o: Self) {
        self.n += o.n;
        self.sw += o.sw;
        self.sw2 += o.sw2;
        for i in 0..self.swf.len() {
            self.swf[i] += o.swf[i];
            self.sw2f[i] += o.sw2f[i];
            self.sw2f2[i] += o.sw2f2[i];
            self.touched[i] |= o.touched[i];
        }
    }
}

impl<A: Accumulate, B: Accumulate> Accumulate for (A, B) {
    fn merge(&mut self, o: Self) {
        self.0.merge(o.0);
        self.1.merge(o.1);
    }
}

/// Run `body` once per sample, batch-parallel, and merge the per-batch
/// accumulators in batch order. `body` may return an error to abort.
pub fn run_batches<A, I, F>(samples: usize, stream: RngStream, init: I, body: F) -> Result<A>
where
    A: Accumulate,
    I: Fn() -> A + Sync,
    F: Fn(&mut ChaCha8Rng, &mut A) -> Result<()> + Sync,
{
    let batches = samples.div_ceil(BATCH_SIZE);
    if batches > u32::MAX as usize {
        return Err(Error::Config(format!("{samples} samples exceed the stream budget")));
    }
    let parts: Vec<Result<A>> = (0..batches)
        .into_par_iter()
        .map(|b| {
            let count = BATCH_SIZE.min(samples - b * BATCH_SIZE);
            let mut rng = stream.batch_rng(b as u32);
            let mut acc = init();
            for _ in 0..count {
                body(&mut rng, &mut acc)?;
            }
            Ok(acc)
        })
        .collect();
    let mut total = init();
    for part in parts {
        total.merge(part?);
    }
    Ok(total)
}

fn gaussian_square<R: Rng + ?Sized>(n: usize, rng: &mut R) -> DMatrix<f64> {
    // column-major fill order, fixed for reproducibility
    DMatrix::from_fn(n, n, |_, _| rng.sample(StandardNormal))
}

/// Haar-distributed element of O(N) as a dense real matrix (nalgebra form).
pub(crate) fn haar_orthogonal_real<R: Rng + ?Sized>(n: usize, rng: &mut R) -> DMatrix<f64> {
    let qr = gaussian_square(n, rng).qr();
    let r = qr.r();
    let mut q = qr.q();
    for j in 0..n {
        if r[(j, j)] < 0.0 {
            q.column_mut(j).neg_mut();
        }
    }
    q
}

pub(crate) fn haar_special_orthogonal_real<R: Rng + ?Sized>(n: usize, rng: &mut R) -> DMatrix<f64> {
    let mut q = haar_orthogonal_real(n, rng);
    if q.determinant() < 0.0 {
        q.row_mut(n - 1).neg_mut();
    }
    q
}

pub(crate) fn haar_real<R: Rng + ?Sized>(n: usize, group: Group, rng: &mut R) -> DMatrix<f64> {
    match group {
        Group::O => haar_orthogonal_real(n, rng),
        Group::SO => haar_special_orthogonal_real(n, rng),
    }
}

pub(crate) fn to_complex(m: &DMatrix<f64>) -> ComplexMatrix {
    ComplexMatrix::from_fn(m.nrows(), m.ncols(), |i, j| Complex64::new(m[(i, j)], 0.0))
}

/// Haar sample on the full orthogonal group: QR of a standard Gaussian matrix
/// with the columns of Q re-signed by the signs of R's diagonal.
pub fn sample_orthogonal<R: Rng + ?Sized>(n: usize, rng: &mut R) -> Result<ComplexMatrix> {
    check_dim(n)?;
    Ok(to_complex(&haar_orthogonal_real(n, rng)))
}

/// Haar sample on SO(N): an O(N) draw whose last row is negated when its
/// determinant is -1.
pub fn sample_special_orthogonal<R: Rng + ?Sized>(n: usize, rng: &mut R) -> Result<ComplexMatrix> {
    check_dim(n)?;
    Ok(to_complex(&haar_special_orthogonal_real(n, rng)))
}

fn check_dim(n: usize) -> Result<()> {
    if n == 0 {
        return Err(Error::Dimension("group dimension must be at least 1".into()));
    }
    Ok(())
}

/// Haar average of `f` over O(N) or SO(N).
pub fn mc_expectation<F>(f: F, n: usize, samples: usize, stream: RngStream, group: Group) -> Result<Estimate>
where
    F: Fn(&ComplexMatrix) -> Complex64 + Sync,
{
    check_dim(n)?;
    if samples < 2 {
        return Err(Error::Config(format!("need at least 2 samples, got {samples}")));
    }
    let acc = run_batches(samples, stream, WeightedSum::default, |rng, acc| {
        let o = to_complex(&haar_real(n, group, rng));
        acc.push(1.0, f(&o));
        Ok(())
    })?;
    Ok(acc.estimate())
}
