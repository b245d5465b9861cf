use clap::{Parser, Subcommand, ValueEnum};
use num_complex::Complex64;

use crate::output::Format;

#[derive(Debug, Parser)]
#[command(name = "ocft", version, about = "O(N) colour-flavour transformation checks and averages")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,

    /// Worker threads for Monte-Carlo runs; results do not depend on it.
    #[arg(long, global = true, env = "OCFT_WORKERS")]
    pub workers: Option<usize>,

    #[arg(long, global = true, value_enum, default_value_t = Format::Json)]
    pub format: Format,

    /// Add wall-clock `elapsed_ms` to the record (breaks byte-identical output).
    #[arg(long, global = true)]
    pub timing: bool,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Pfaffian and determinant of a complex skew matrix.
    Pfaffian {
        /// Strict upper triangle, row-major, entries `re,im` separated by `;`.
        #[arg(long, allow_hyphen_values = true)]
        upper: String,
    },
    /// Haar estimate of `E[O_ij O_kl]`.
    HaarMoment {
        #[arg(long)]
        n: usize,
        #[arg(long, value_enum, default_value_t = GroupArg::O)]
        group: GroupArg,
        /// One-based indices `i,j,k,l`.
        #[arg(long, default_value = "1,1,1,1")]
        indices: String,
        #[arg(long, default_value_t = 1_000_000)]
        samples: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long, default_value_t = 3.0)]
        z_threshold: f64,
    },
    /// `⟨|det(z − G O)|^{2m}⟩` over O(N).
    Moment {
        #[arg(long)]
        n: usize,
        #[arg(long, default_value_t = 1)]
        m: usize,
        #[arg(long, value_parser = parse_complex, allow_hyphen_values = true)]
        z: Complex64,
        /// Singular values `g1,g2,...`; a single value is repeated N times.
        #[arg(long, allow_hyphen_values = true)]
        g: String,
        #[arg(long, value_enum, default_value_t = MomentMethod::Closed)]
        method: MomentMethod,
        #[arg(long, default_value_t = 1_000_000)]
        samples: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
    },
    /// Jacobi-ensemble average, as a ratio to `λγ = 1`.
    Jacobi {
        #[arg(long)]
        n: usize,
        #[arg(long, default_value_t = 0)]
        a: u32,
        #[arg(long, default_value_t = 0)]
        b: u32,
        #[arg(long, value_parser = parse_complex, allow_hyphen_values = true)]
        lambda: Complex64,
        #[arg(long, value_parser = parse_complex, allow_hyphen_values = true)]
        gamma: Complex64,
        #[arg(long, value_enum, default_value_t = JacobiMethod::Pfaffian)]
        method: JacobiMethod,
    },
    /// Ginibre average: closed form, singular-value pipeline and Monte Carlo.
    GinibreCheck {
        #[arg(long)]
        n: usize,
        #[arg(long, value_parser = parse_complex, allow_hyphen_values = true)]
        lambda: Complex64,
        #[arg(long, value_parser = parse_complex, allow_hyphen_values = true)]
        gamma: Complex64,
        #[arg(long, default_value_t = 1_000_000)]
        samples: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long, default_value_t = 3.0)]
        z_threshold: f64,
    },
    /// Monte-Carlo verification of a colour-flavour identity.
    VerifyCft {
        #[arg(long, value_enum)]
        variant: VariantArg,
        #[arg(long)]
        colors: usize,
        #[arg(long)]
        flavors: usize,
        #[arg(long, default_value_t = 1_000_000)]
        samples: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long, value_enum, default_value_t = NormalizationArg::SelfConsistent)]
        normalization: NormalizationArg,
        /// Bosonic variant: number of random probe points.
        #[arg(long, default_value_t = 10)]
        probes: usize,
        /// Bosonic variant: largest probe norm.
        #[arg(long, default_value_t = 0.5)]
        probe_norm: f64,
        #[arg(long)]
        z_threshold: Option<f64>,
    },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum GroupArg {
    O,
    So,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum MomentMethod {
    Closed,
    Pfaffian,
    Mc,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum JacobiMethod {
    Pfaffian,
    Quadrature,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum VariantArg {
    Fermionic,
    Bosonic,
    Son,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum NormalizationArg {
    #[value(name = "self")]
    SelfConsistent,
    Paper,
}

/// `re,im` or a bare real `x` meaning `x,0`.
pub fn parse_complex(s: &str) -> Result<Complex64, String> {
    let parts: Vec<&str> = s.split(',').map(str::trim).collect();
    let num = |p: &str| p.parse::<f64>().map_err(|e| format!("bad number {p:?}: {e}"));
    let z = match parts.as_slice() {
        [re] => Complex64::new(num(re)?, 0.0),
        [re, im] => Complex64::new(num(re)?, num(im)?),
        _ => return Err(format!("expected re,im or a real number, got {s:?}")),
    };
    if !(z.re.is_finite() && z.im.is_finite()) {
        return Err(format!("non-finite value {s:?}"));
    }
    Ok(z)
}

/// Comma-separated reals.
pub fn parse_reals(s: &str) -> Result<Vec<f64>, String> {
    s.split(',')
        .map(|p| p.trim().parse::<f64>().map_err(|e| format!("bad number {p:?}: {e}")))
        .collect()
}
