//! Finite-volume traces: the single-particle trace, the fixed-N trace of the
//! free product construction (via cumulant additivity), the Poissonized
//! trace, marked variants, and centered variants.
//!
//! The fixed-N trace is computed through the cumulant route: free cumulants
//! of the N-particle operators are N times the single-particle cumulants, so
//! the trace is the non-crossing resummation of `N * R(B)` over blocks. The
//! operator route lives in the `fock` module as an independent certifier.

use num_traits::{One, Signed, ToPrimitive, Zero};

use crate::combinat::{enumerate_nc_partitions, touchard};
use crate::cumulants::{centered_cumulant, free_cumulant, WORD_CAP};
use crate::error::{Error, Result};
use crate::rational::{rat_f64, Rat};
use crate::space::{product_space_moment, DiscreteSpace, JumpMeasure, TestFunction};

/// Fixed particle number or Poisson-distributed particle number.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum ParticleCount {
    FixedN(u64),
    PoissonAlpha(Rat),
}

/// A finite system of freely independent particles: a window with exact
/// sigma-masses, an optional jump measure (absent means the unmarked case,
/// equivalent to nu = delta_1), and a particle-count mode.
#[derive(Clone, Debug)]
pub struct ParticleSystemSpec {
    pub space: DiscreteSpace,
    pub jumps: Option<JumpMeasure>,
    pub count: ParticleCount,
}

impl ParticleSystemSpec {
    fn validate(&self, fs: &[&TestFunction]) -> Result<()> {
        if fs.is_empty() {
            return Err(Error::Usage("word of test functions must be nonempty".into()));
        }
        if fs.len() > WORD_CAP {
            return Err(Error::ResourceLimit(format!(
                "word length {} exceeds cap {WORD_CAP}",
                fs.len()
            )));
        }
        match &self.count {
            ParticleCount::FixedN(n) if *n == 0 => {
                // N = 0 is the empty system; allowed, the trace of any
                // nonempty word is 0.
                let _ = n;
            }
            ParticleCount::PoissonAlpha(alpha) if alpha.is_negative() => {
                return Err(Error::Usage("Poisson parameter must be >= 0".into()));
            }
            _ => {}
        }
        self.space.integrate_product(&fs[..1])?;
        Ok(())
    }
}

/// The single-particle mixed moment: the normalized spatial integral in the
/// unmarked case, the factorized product-space moment in the marked case.
pub fn single_particle_moment(spec: &ParticleSystemSpec, fs: &[&TestFunction]) -> Result<Rat> {
    if fs.is_empty() {
        return Err(Error::Usage("word of test functions must be nonempty".into()));
    }
    match &spec.jumps {
        None => {
            let v = spec.space.total_mass();
            Ok(spec.space.integrate_product(fs)? / v)
        }
        Some(jm) => product_space_moment(&spec.space, jm, fs),
    }
}

/// Free cumulant of the single-particle trace.
pub fn single_particle_free_cumulant(
    spec: &ParticleSystemSpec,
    fs: &[&TestFunction],
) -> Result<Rat> {
    spec.validate(fs)?;
    let mf = |word: &[&TestFunction]| {
        single_particle_moment(spec, word).expect("validated by the outer call")
    };
    free_cumulant(&mf, fs)
}

/// Weight applied to a partition with i blocks in the NC resummation.
enum CountWeight {
    /// N^i, i.e. each block carries a factor N.
    Fixed(u64),
    /// Touchard polynomial T_i(alpha), the Poisson(alpha) i-th moment.
    Poissonized(Rat),
}

fn nc_resummation(
    spec: &ParticleSystemSpec,
    fs: &[&TestFunction],
    weight: CountWeight,
    centered: bool,
) -> Result<Rat> {
    spec.validate(fs)?;
    let k = fs.len();
    let mf = |word: &[&TestFunction]| {
        single_particle_moment(spec, word).expect("validated by the outer call")
    };
    let mut acc = Rat::zero();
    for theta in enumerate_nc_partitions(k)? {
        let mut prod = Rat::one();
        for block in theta.blocks() {
            let sub: Vec<&TestFunction> = block.iter().map(|&p| fs[p - 1]).collect();
            let r = if centered {
                centered_cumulant(&mf, &sub)?
            } else {
                free_cumulant(&mf, &sub)?
            };
            prod *= r;
            if prod.is_zero() {
                break;
            }
        }
        if prod.is_zero() {
            continue;
        }
        let w = match &weight {
            CountWeight::Fixed(n) => {
                Rat::from_integer(num_bigint::BigInt::from(*n).pow(theta.num_blocks() as u32))
            }
            CountWeight::Poissonized(alpha) => touchard(theta.num_blocks() as u32, alpha),
        };
        acc += w * prod;
    }
    Ok(acc)
}

/// The trace of the N-particle free product system on a word of operators
/// `A(Lambda,N;f) = sum_i M_i(f)`: cumulant additivity gives
/// `sum over NC partitions of prod over blocks of N * R_single(block)`.
pub fn fixed_n_trace(spec: &ParticleSystemSpec, fs: &[&TestFunction]) -> Result<Rat> {
    let n = match &spec.count {
        ParticleCount::FixedN(n) => *n,
        ParticleCount::PoissonAlpha(_) => {
            return Err(Error::Usage("fixed_n_trace requires a FixedN count".into()))
        }
    };
    nc_resummation(spec, fs, CountWeight::Fixed(n), false)
}

/// The Poissonized trace: the Poisson(alpha)-weighted mixture of the fixed-N
/// traces, in closed form via Touchard polynomials. Exact rational output.
pub fn poissonized_trace(spec: &ParticleSystemSpec, fs: &[&TestFunction]) -> Result<Rat> {
    let alpha = match &spec.count {
        ParticleCount::PoissonAlpha(a) => a.clone(),
        ParticleCount::FixedN(_) => {
            return Err(Error::Usage(
                "poissonized_trace requires a PoissonAlpha count".into(),
            ))
        }
    };
    nc_resummation(spec, fs, CountWeight::Poissonized(alpha), false)
}

/// Centered fixed-N trace: singleton cumulants replaced by zero.
pub fn centered_fixed_n_trace(spec: &ParticleSystemSpec, fs: &[&TestFunction]) -> Result<Rat> {
    let n = match &spec.count {
        ParticleCount::FixedN(n) => *n,
        ParticleCount::PoissonAlpha(_) => {
            return Err(Error::Usage("centered_fixed_n_trace requires FixedN".into()))
        }
    };
    nc_resummation(spec, fs, CountWeight::Fixed(n), true)
}

/// Centered Poissonized trace.
pub fn centered_poissonized_trace(
    spec: &ParticleSystemSpec,
    fs: &[&TestFunction],
) -> Result<Rat> {
    let alpha = match &spec.count {
        ParticleCount::PoissonAlpha(a) => a.clone(),
        ParticleCount::FixedN(_) => {
            return Err(Error::Usage(
                "centered_poissonized_trace requires PoissonAlpha".into(),
            ))
        }
    };
    nc_resummation(spec, fs, CountWeight::Poissonized(alpha), true)
}

/// Direct Poisson-series evaluation of the Poissonized trace, in floating
/// point, with a certified tail bound: used only as an oracle for
/// `poissonized_trace`.
///
/// The fixed-N trace is a polynomial in N of degree <= k; the tail of the
/// Poisson-weighted series is bounded geometrically from the coefficient
/// magnitudes.
pub fn poissonized_trace_series(
    spec: &ParticleSystemSpec,
    fs: &[&TestFunction],
    n_max: u64,
    tail_tol: f64,
) -> Result<f64> {
    let alpha = match &spec.count {
        ParticleCount::PoissonAlpha(a) => a.clone(),
        ParticleCount::FixedN(_) => {
            return Err(Error::Usage(
                "poissonized_trace_series requires PoissonAlpha".into(),
            ))
        }
    };
    spec.validate(fs)?;
    if n_max < 1 {
        return Err(Error::Usage("n_max must be >= 1".into()));
    }
    let k = fs.len();
    let fixed = |n: u64| -> Result<Rat> {
        let s = ParticleSystemSpec {
            space: spec.space.clone(),
            jumps: spec.jumps.clone(),
            count: ParticleCount::FixedN(n),
        };
        fixed_n_trace(&s, fs)
    };

    // Monomial coefficients of N -> fixed_n_trace(N): c_i multiplies N^i,
    // where c_i sums the block-cumulant products over partitions with i
    // blocks. Used only for the tail bound.
    let coeff_bound = {
        let mf = |word: &[&TestFunction]| {
            single_particle_moment(spec, word).expect("validated above")
        };
        let mut c = Rat::zero();
        for theta in enumerate_nc_partitions(k)? {
            let mut prod = Rat::one();
            for block in theta.blocks() {
                let sub: Vec<&TestFunction> = block.iter().map(|&p| fs[p - 1]).collect();
                prod *= free_cumulant(&mf, &sub)?;
            }
            c += prod.abs();
        }
        rat_f64(&c)
    };

    let a = rat_f64(&alpha);
    if a == 0.0 {
        // trace of the empty system: fs is nonempty, so the value is 0
        return Ok(0.0);
    }

    // Certified geometric tail bound on sum_{N > n_max} e^-a a^N N^k / N!.
    let m = (n_max + 1) as f64;
    let ratio = a * (1.0 + 1.0 / m).powi(k as i32) / (m + 1.0);
    let log_term = -a + m * a.ln() + (k as f64) * m.ln() - ln_factorial(n_max + 1);
    let tail = if ratio < 1.0 {
        coeff_bound * log_term.exp() / (1.0 - ratio)
    } else {
        f64::INFINITY
    };
    if tail.is_nan() || tail > tail_tol {
        return Err(Error::Truncation(format!(
            "tail bound {tail:.3e} exceeds tolerance {tail_tol:.3e} at n_max={n_max}"
        )));
    }

    let mut sum = 0.0;
    let mut weight = (-a).exp(); // e^-a a^N / N!
    for n in 0..=n_max {
        let term = rat_f64(&fixed(n)?);
        sum += weight * term;
        weight *= a / (n as f64 + 1.0);
    }
    Ok(sum)
}

fn ln_factorial(n: u64) -> f64 {
    (1..=n).map(|i| (i as f64).ln()).sum()
}

/// Convenience: N = round(rho * V) with ties to even, the deterministic
/// particle-number rule used by the convergence experiments.
pub fn n_from_ratio(rho: &Rat, volume: &Rat) -> Result<u64> {
    let n = crate::rational::round_half_even(&(rho * volume));
    n.to_u64()
        .ok_or_else(|| Error::Usage(format!("particle count {n} out of range")))
}
