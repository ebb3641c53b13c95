//! Embedding vectors and the unit-hypersphere primitives used by every loss.
//!
//! All similarities in this crate are cosine similarities between
//! L2-normalized vectors, so the squared Euclidean distance between two
//! embeddings is always `2 - 2 * cos`.

use crate::error::{Error, Result};

/// Norms at or below this are rejected by [`normalize`].
pub const MIN_NORM: f64 = 1e-12;

/// Unconstrained encoder output. Entries are finite.
#[derive(Debug, Clone, PartialEq)]
pub struct RawVector(Vec<f64>);

impl RawVector {
    pub fn new(values: Vec<f64>) -> Result<Self> {
        if let Some(i) = values.iter().position(|v| !v.is_finite()) {
            return Err(Error::NonFinite(i));
        }
        Ok(Self(values))
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.0
    }

    pub fn dim(&self) -> usize {
        self.0.len()
    }

    pub fn norm(&self) -> f64 {
        l2_norm(&self.0)
    }

    pub fn into_inner(self) -> Vec<f64> {
        self.0
    }
}

/// A point on the unit hypersphere with at least two dimensions.
#[derive(Debug, Clone, PartialEq)]
pub struct UnitVector(Vec<f64>);

impl UnitVector {
    /// Wraps values that are already unit-norm (within 1e-9).
    pub fn from_unit(values: Vec<f64>) -> Result<Self> {
        if values.len() < 2 {
            return Err(Error::DimensionTooSmall(values.len()));
        }
        if let Some(i) = values.iter().position(|v| !v.is_finite()) {
            return Err(Error::NonFinite(i));
        }
        let norm = l2_norm(&values);
        if (norm - 1.0).abs() > 1e-9 {
            return Err(Error::NotUnit { norm });
        }
        Ok(Self(values))
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.0
    }

    pub fn dim(&self) -> usize {
        self.0.len()
    }

    pub fn into_inner(self) -> Vec<f64> {
        self.0
    }
}

impl AsRef<[f64]> for UnitVector {
    fn as_ref(&self) -> &[f64] {
        &self.0
    }
}

pub(crate) fn l2_norm(values: &[f64]) -> f64 {
    values.iter().map(|v| v * v).sum::<f64>().sqrt()
}

pub(crate) fn dot(u: &[f64], v: &[f64]) -> f64 {
    u.iter().zip(v).map(|(a, b)| a * b).sum()
}

fn check_dims(u: &[f64], v: &[f64]) -> Result<()> {
    if u.len() != v.len() {
        return Err(Error::DimensionMismatch {
            left: u.len(),
            right: v.len(),
        });
    }
    Ok(())
}

/// Projects `v` onto the unit sphere.
pub fn normalize(v: &RawVector) -> Result<UnitVector> {
    normalize_slice(v.as_slice())
}

pub(crate) fn normalize_slice(v: &[f64]) -> Result<UnitVector> {
    if v.len() < 2 {
        return Err(Error::DimensionTooSmall(v.len()));
    }
    let norm = l2_norm(v);
    if norm.is_nan() || norm <= MIN_NORM {
        return Err(Error::ZeroVector { norm });
    }
    Ok(UnitVector(v.iter().map(|x| x / norm).collect()))
}

/// Dot product of two unit vectors, clamped to `[-1, 1]`.
pub fn cosine_sim(u: &UnitVector, v: &UnitVector) -> Result<f64> {
    check_dims(&u.0, &v.0)?;
    Ok(dot(&u.0, &v.0).clamp(-1.0, 1.0))
}

pub fn squared_l2(u: &UnitVector, v: &UnitVector) -> Result<f64> {
    check_dims(&u.0, &v.0)?;
    Ok(u.0.iter().zip(&v.0).map(|(a, b)| (a - b) * (a - b)).sum())
}

/// Vector-Jacobian product through `g = v / |v|`.
///
/// The Jacobian is `(I - g g^T) / |v|`, which is symmetric, so this returns
/// `(upstream - (g . upstream) g) / |v|`.
pub fn normalize_vjp(v: &RawVector, upstream: &[f64]) -> Result<Vec<f64>> {
    normalize_vjp_slice(v.as_slice(), upstream)
}

pub(crate) fn normalize_vjp_slice(v: &[f64], upstream: &[f64]) -> Result<Vec<f64>> {
    check_dims(v, upstream)?;
    let norm = l2_norm(v);
    if norm.is_nan() || norm <= MIN_NORM {
        return Err(Error::ZeroVector { norm });
    }
    let g: Vec<f64> = v.iter().map(|x| x / norm).collect();
    let along = dot(&g, upstream);
    Ok(upstream.iter().zip(&g).map(|(u, gi)| (u - along * gi) / norm).collect())
}
