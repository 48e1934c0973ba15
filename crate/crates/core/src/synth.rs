//! Seeded random matrices for the experiments.
//!
//! Randomness comes from ChaCha8 (`rand_chacha` 0.3) seeded with a `u64`;
//! normal deviates use the Box-Muller transform. Output is deterministic for
//! a given seed within this implementation.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::linalg::qr;
use crate::matrix::Matrix;
use crate::scalar::Scalar;

/// ChaCha8 stream with a Box-Muller normal sampler.
#[derive(Clone, Debug)]
pub struct GaussianRng {
    inner: ChaCha8Rng,
    spare: Option<f64>,
}

impl GaussianRng {
    pub fn new(seed: u64) -> Self {
        Self {
            inner: ChaCha8Rng::seed_from_u64(seed),
            spare: None,
        }
    }

    /// Uniform on `[0, 1)`.
    pub fn uniform(&mut self) -> f64 {
        self.inner.gen::<f64>()
    }

    /// Uniform on `[lo, hi)`.
    pub fn uniform_in(&mut self, lo: f64, hi: f64) -> f64 {
        lo + (hi - lo) * self.uniform()
    }

    /// Standard normal deviate.
    pub fn normal(&mut self) -> f64 {
        if let Some(z) = self.spare.take() {
            return z;
        }
        // 1 - U lies in (0, 1], keeping ln finite.
        let u1 = 1.0 - self.uniform();
        let u2 = self.uniform();
        let radius = (-2.0 * u1.ln()).sqrt();
        let theta = std::f64::consts::TAU * u2;
        self.spare = Some(radius * theta.sin());
        radius * theta.cos()
    }

    /// m×n matrix of i.i.d. N(0, 1) entries, filled row by row.
    pub fn normal_matrix<T: Scalar>(&mut self, m: usize, n: usize) -> Matrix<T> {
        Matrix::from_fn(m, n, |_, _| T::of(self.normal()))
    }

    /// m×n matrix with entries uniform on `[lo, hi)`.
    pub fn uniform_matrix<T: Scalar>(&mut self, m: usize, n: usize, lo: f64, hi: f64) -> Matrix<T> {
        Matrix::from_fn(m, n, |_, _| T::of(self.uniform_in(lo, hi)))
    }
}

/// Low-rank-plus-noise test matrix `A = L Rᵀ + α E`.
#[derive(Clone, Debug, PartialEq)]
pub struct SynthSpec {
    pub m: usize,
    pub n: usize,
    pub true_rank: usize,
    /// `α = noise_factor · max_ij (L Rᵀ)_ij`.
    pub noise_factor: f64,
    pub seed: u64,
}

impl SynthSpec {
    pub fn validate(&self) -> Result<()> {
        if self.true_rank > self.m.min(self.n) {
            return Err(Error::RankOutOfRange {
                rank: self.true_rank,
                min: 0,
                max: self.m.min(self.n),
            });
        }
        if !(self.noise_factor >= 0.0) || !self.noise_factor.is_finite() {
            return Err(Error::invalid("noise_factor must be finite and >= 0"));
        }
        Ok(())
    }
}

/// Draws `L` (m×r), `R` (n×r) then `E` (m×n) from one seeded stream.
pub fn gen_low_rank_plus_noise<T: Scalar>(spec: &SynthSpec) -> Result<Matrix<T>> {
    spec.validate()?;
    let mut rng = GaussianRng::new(spec.seed);
    let l: Matrix<T> = rng.normal_matrix(spec.m, spec.true_rank);
    let r: Matrix<T> = rng.normal_matrix(spec.n, spec.true_rank);
    let e: Matrix<T> = rng.normal_matrix(spec.m, spec.n);
    let low = l.matmul_t(&r);
    let alpha = T::of(spec.noise_factor) * low.max_entry().unwrap_or(T::zero());
    if alpha == T::zero() {
        return Ok(low);
    }
    Ok(&low + &e.scale(alpha))
}

/// Matrix with a prescribed singular spectrum.
#[derive(Clone, Debug, PartialEq)]
pub struct SpectrumSpec {
    pub m: usize,
    pub n: usize,
    /// Non-increasing, non-negative; padded with zeros up to `min(m, n)`.
    pub singular_values: Vec<f64>,
    pub seed: u64,
}

impl SpectrumSpec {
    /// `distinct` geometrically spaced values from `kappa` down towards 1,
    /// followed by `repeated` copies of 1, so `σ_max / σ_min = kappa`.
    pub fn geometric(
        m: usize,
        n: usize,
        distinct: usize,
        repeated: usize,
        kappa: f64,
        seed: u64,
    ) -> Result<Self> {
        if !(kappa >= 1.0) || !kappa.is_finite() {
            return Err(Error::invalid("condition number must be finite and >= 1"));
        }
        let mut s: Vec<f64> = (0..distinct)
            .map(|i| kappa.powf((distinct - i) as f64 / distinct as f64))
            .collect();
        s.extend(std::iter::repeat_n(1.0, repeated));
        if repeated == 0 {
            // Keep the ratio exact without a repeated tail.
            if let Some(last) = s.last_mut() {
                *last = 1.0;
            }
            if let Some(first) = s.first_mut() {
                *first = kappa;
            }
        }
        let spec = Self {
            m,
            n,
            singular_values: s,
            seed,
        };
        spec.validate()?;
        Ok(spec)
    }

    /// `σ_max / σ_min` over the non-zero part of the spectrum.
    pub fn condition_number(&self) -> f64 {
        let nz: Vec<f64> = self
            .singular_values
            .iter()
            .copied()
            .filter(|&s| s > 0.0)
            .collect();
        match (nz.first(), nz.last()) {
            (Some(a), Some(b)) => a / b,
            _ => f64::NAN,
        }
    }

    pub fn validate(&self) -> Result<()> {
        let s = &self.singular_values;
        if s.len() > self.m.min(self.n) {
            return Err(Error::invalid(format!(
                "{} singular values exceed min(m, n) = {}",
                s.len(),
                self.m.min(self.n)
            )));
        }
        if s.iter().any(|&x| !(x >= 0.0) || !x.is_finite()) {
            return Err(Error::invalid(
                "singular values must be finite and non-negative",
            ));
        }
        if s.windows(2).any(|w| w[0] < w[1]) {
            return Err(Error::invalid("singular values must be non-increasing"));
        }
        Ok(())
    }
}

/// `A = U diag(σ) Vᵀ` with `U`, `V` the Q factors of seeded Gaussian matrices.
pub fn gen_conditioned<T: Scalar>(spec: &SpectrumSpec) -> Result<Matrix<T>> {
    spec.validate()?;
    let q = spec.m.min(spec.n);
    let mut rng = GaussianRng::new(spec.seed);
    let gu: Matrix<T> = rng.normal_matrix(spec.m, q);
    let gv: Matrix<T> = rng.normal_matrix(spec.n, q);
    let u = qr(&gu).q;
    let v = qr(&gv).q;
    let mut sigma = vec![T::zero(); q];
    for (dst, &s) in sigma.iter_mut().zip(&spec.singular_values) {
        *dst = T::of(s);
    }
    let us = Matrix::from_fn(spec.m, q, |i, j| u[(i, j)] * sigma[j]);
    Ok(us.matmul_t(&v))
}
