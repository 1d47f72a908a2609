//! Parameter-free coordinate dictionaries fed to the trunk network.
//!
//! Three kinds share one configuration type, [`SpectralDictionary`]:
//!
//! - `Identity` passes domain-normalized coordinates through unchanged.
//! - `Fourier` emits a deterministic integer-frequency sin/cos grid.
//! - `Chebyshev` emits the tensor product `T_i(ξ_x) T_j(ξ_t)` of first-kind
//!   Chebyshev polynomials on the affinely mapped domain, flattened with the
//!   temporal index varying fastest and then cropped or zero-padded to the
//!   trunk width.

use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::Matrix;

/// Slack allowed when checking domain membership, to absorb grid roundoff.
pub const DOMAIN_TOL: f64 = 1e-12;

/// Closed interval `[lo, hi]`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Interval {
    pub lo: f64,
    pub hi: f64,
}

impl Interval {
    pub const UNIT: Interval = Interval { lo: 0.0, hi: 1.0 };

    pub fn new(lo: f64, hi: f64) -> Result<Self> {
        if !(hi - lo > 0.0) || !lo.is_finite() || !hi.is_finite() {
            return Err(Error::Config(format!("interval [{lo}, {hi}] has no positive length")));
        }
        Ok(Self { lo, hi })
    }

    pub fn len(&self) -> f64 {
        self.hi - self.lo
    }

    /// `n` equispaced points including both endpoints.
    pub fn linspace(&self, n: usize) -> Vec<f64> {
        match n {
            0 => Vec::new(),
            1 => vec![self.lo],
            _ => {
                let h = self.len() / (n - 1) as f64;
                (0..n).map(|i| if i == n - 1 { self.hi } else { self.lo + i as f64 * h }).collect()
            }
        }
    }

    fn check(&self, v: f64) -> Result<()> {
        if !(v >= self.lo - DOMAIN_TOL && v <= self.hi + DOMAIN_TOL) {
            return Err(Error::Domain(format!("{v} lies outside [{}, {}]", self.lo, self.hi)));
        }
        Ok(())
    }
}

/// A query point. Purely spatial 1-D problems leave `t` empty; 2-D spatial
/// problems put `y` in the `t` slot.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Coordinate {
    pub x: f64,
    pub t: Option<f64>,
}

impl Coordinate {
    pub fn new(x: f64, t: f64) -> Self {
        Self { x, t: Some(t) }
    }

    pub fn spatial(x: f64) -> Self {
        Self { x, t: None }
    }

    pub fn dim(&self) -> usize {
        1 + usize::from(self.t.is_some())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum EmbeddingKind {
    Identity,
    Fourier,
    Chebyshev,
}

/// Fixed embedding configuration. Holds no trainable state.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SpectralDictionary {
    pub kind: EmbeddingKind,
    pub k_x: usize,
    pub k_t: usize,
    pub d_trunk: usize,
    pub domain_x: Interval,
    pub domain_t: Interval,
}

impl SpectralDictionary {
    pub fn new(kind: EmbeddingKind, k_x: usize, k_t: usize, d_trunk: usize, domain_x: Interval, domain_t: Interval) -> Result<Self> {
        let dict = Self { kind, k_x, k_t, d_trunk, domain_x, domain_t };
        dict.validate()?;
        Ok(dict)
    }

    pub fn identity(domain_x: Interval, domain_t: Interval) -> Self {
        Self { kind: EmbeddingKind::Identity, k_x: 1, k_t: 1, d_trunk: 2, domain_x, domain_t }
    }

    /// Chebyshev dictionary whose trunk width equals the full tensor size.
    pub fn chebyshev(k_x: usize, k_t: usize, domain_x: Interval, domain_t: Interval) -> Result<Self> {
        Self::new(EmbeddingKind::Chebyshev, k_x, k_t, k_x * k_t, domain_x, domain_t)
    }

    pub fn validate(&self) -> Result<()> {
        if self.k_x == 0 || self.k_t == 0 || self.d_trunk == 0 {
            return Err(Error::Config("k_x, k_t and d_trunk must all be at least 1".into()));
        }
        Interval::new(self.domain_x.lo, self.domain_x.hi)?;
        Interval::new(self.domain_t.lo, self.domain_t.hi)?;
        Ok(())
    }

    /// Width of [`embed`] output for coordinates of dimension `coord_dim`.
    pub fn output_width(&self, coord_dim: usize) -> usize {
        match self.kind {
            EmbeddingKind::Identity => coord_dim,
            _ => self.d_trunk,
        }
    }

    pub fn embed(&self, c: &Coordinate) -> Result<Vec<f64>> {
        embed(c, self)
    }

    /// Embeds every coordinate into one row of a matrix, preserving order.
    pub fn embed_all(&self, coords: &[Coordinate]) -> Result<Matrix> {
        let dim = coords.first().map_or(2, Coordinate::dim);
        let width = self.output_width(dim);
        let mut out = Matrix::zeros(coords.len(), width);
        for (q, c) in coords.iter().enumerate() {
            if c.dim() != dim {
                return Err(Error::Shape("mixed coordinate dimensions in one grid".into()));
            }
            out.row_mut(q).copy_from_slice(&self.embed(c)?);
        }
        Ok(out)
    }
}

/// Maps `v ∈ domain` linearly onto `[-1, 1]`, endpoints exactly.
pub fn affine_to_reference(v: f64, domain: Interval) -> Result<f64> {
    domain.check(v)?;
    let xi = 2.0 * (v - domain.lo) / domain.len() - 1.0;
    Ok(xi.clamp(-1.0, 1.0))
}

/// Maps `v ∈ domain` linearly onto `[0, 1]`.
pub fn normalize_unit(v: f64, domain: Interval) -> Result<f64> {
    domain.check(v)?;
    Ok(((v - domain.lo) / domain.len()).clamp(0.0, 1.0))
}

/// `[T_0(ξ), …, T_{n_max-1}(ξ)]` by the three-term recurrence.
pub fn cheb_eval_all(xi: f64, n_max: usize) -> Result<Vec<f64>> {
    let mut out = vec![0.0; n_max];
    cheb_eval_into(xi, &mut out)?;
    Ok(out)
}

/// Fills `out` with `T_0(ξ), T_1(ξ), …`.
pub fn cheb_eval_into(xi: f64, out: &mut [f64]) -> Result<()> {
    if !(xi.abs() <= 1.0 + DOMAIN_TOL) {
        return Err(Error::Domain(format!("Chebyshev argument {xi} outside [-1, 1]")));
    }
    if out.is_empty() {
        return Err(Error::Config("need at least one Chebyshev mode".into()));
    }
    out[0] = 1.0;
    if out.len() > 1 {
        out[1] = xi;
    }
    for n in 2..out.len() {
        out[n] = 2.0 * xi * out[n - 1] - out[n - 2];
    }
    Ok(())
}

/// Full tensor-product dictionary, index `i * k_t + j`.
///
/// A coordinate without a temporal part is accepted only when `k_t == 1`,
/// in which case the result is the 1-D basis `T_i(ξ_x)`.
pub fn cheb_tensor_features(c: &Coordinate, dict: &SpectralDictionary) -> Result<Vec<f64>> {
    if dict.kind != EmbeddingKind::Chebyshev {
        return Err(Error::Config("dictionary is not Chebyshev".into()));
    }
    let tx = cheb_eval_all(affine_to_reference(c.x, dict.domain_x)?, dict.k_x)?;
    let tt = match c.t {
        Some(t) => cheb_eval_all(affine_to_reference(t, dict.domain_t)?, dict.k_t)?,
        None if dict.k_t == 1 => vec![1.0],
        None => return Err(Error::Domain("temporal coordinate missing for k_t > 1".into())),
    };
    let mut full = Vec::with_capacity(tx.len() * tt.len());
    for a in &tx {
        full.extend(tt.iter().map(|b| a * b));
    }
    Ok(full)
}

/// Keeps the first `d_trunk` entries, or appends zeros up to `d_trunk`.
pub fn crop_pad(full: &[f64], d_trunk: usize) -> Vec<f64> {
    let mut out = full[..full.len().min(d_trunk)].to_vec();
    out.resize(d_trunk, 0.0);
    out
}

/// `[1, sin(2πk x̂), cos(2πk x̂), sin(2πk t̂), cos(2πk t̂), …]` for
/// `k = 1..max(K_x, K_t)`, each axis contributing only while `k` is within
/// its own count, then cropped or padded to `d_trunk`.
pub fn fourier_features(c: &Coordinate, dict: &SpectralDictionary) -> Result<Vec<f64>> {
    if dict.kind != EmbeddingKind::Fourier {
        return Err(Error::Config("dictionary is not Fourier".into()));
    }
    let xh = normalize_unit(c.x, dict.domain_x)?;
    let th = c.t.map(|t| normalize_unit(t, dict.domain_t)).transpose()?;
    let mut full = Vec::with_capacity(1 + 2 * (dict.k_x + dict.k_t));
    full.push(1.0);
    for k in 1..=dict.k_x.max(dict.k_t) {
        let w = 2.0 * PI * k as f64;
        if k <= dict.k_x {
            full.push((w * xh).sin());
            full.push((w * xh).cos());
        }
        if let (Some(th), true) = (th, k <= dict.k_t) {
            full.push((w * th).sin());
            full.push((w * th).cos());
        }
    }
    Ok(crop_pad(&full, dict.d_trunk))
}

/// Dispatches on the dictionary kind.
pub fn embed(c: &Coordinate, dict: &SpectralDictionary) -> Result<Vec<f64>> {
    match dict.kind {
        EmbeddingKind::Identity => {
            let mut v = vec![normalize_unit(c.x, dict.domain_x)?];
            if let Some(t) = c.t {
                v.push(normalize_unit(t, dict.domain_t)?);
            }
            Ok(v)
        }
        EmbeddingKind::Chebyshev => Ok(crop_pad(&cheb_tensor_features(c, dict)?, dict.d_trunk)),
        EmbeddingKind::Fourier => fourier_features(c, dict),
    }
}
