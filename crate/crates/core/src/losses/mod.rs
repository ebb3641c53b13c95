//! Margin losses on cosine similarities and their piecewise-constant
//! gradients.
//!
//! For a triplet with similarities `phi_ap` (anchor-positive) and `phi_an`
//! (anchor-negative), AdaTriplet is
//!
//! ```text
//! L = [phi_an - phi_ap + eps]+ + lambda * [phi_an - beta]+
//! ```
//!
//! The two hinges split the `(phi_ap, phi_an)` plane into four regions, and
//! within each region the gradient is constant (see [`TripletRegion`]).
//! A hinge whose argument is exactly zero counts as inactive.

mod surface;

pub use surface::{surface_grid, write_surface_csv, SurfaceCell, SurfaceLoss};

use crate::error::{Error, Result};
use crate::vector::UnitVector;

/// Upper bound (exclusive) on the strict margin in cosine form.
pub const EPSILON_MAX: f64 = 2.0;

/// Similarities of one triplet, with `delta = phi_ap - phi_an` cached.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TripletSims {
    phi_ap: f64,
    phi_an: f64,
    delta: f64,
}

fn check_similarity(name: &'static str, value: f64) -> Result<()> {
    if !(-1.0..=1.0).contains(&value) {
        return Err(Error::SimilarityOutOfRange { name, value });
    }
    Ok(())
}

impl TripletSims {
    pub fn new(phi_ap: f64, phi_an: f64) -> Result<Self> {
        check_similarity("phi_ap", phi_ap)?;
        check_similarity("phi_an", phi_an)?;
        Ok(Self {
            phi_ap,
            phi_an,
            delta: phi_ap - phi_an,
        })
    }

    /// Builds sims from stored fields; `delta` must equal `phi_ap - phi_an`
    /// bit for bit.
    pub fn from_parts(phi_ap: f64, phi_an: f64, delta: f64) -> Result<Self> {
        let sims = Self::new(phi_ap, phi_an)?;
        if sims.delta != delta {
            return Err(Error::InconsistentDelta {
                stored: delta,
                expected: sims.delta,
            });
        }
        Ok(sims)
    }

    pub fn phi_ap(&self) -> f64 {
        self.phi_ap
    }

    pub fn phi_an(&self) -> f64 {
        self.phi_an
    }

    pub fn delta(&self) -> f64 {
        self.delta
    }
}

fn check_epsilon(epsilon: f64) -> Result<()> {
    if !(0.0..EPSILON_MAX).contains(&epsilon) {
        return Err(Error::MarginOutOfRange {
            name: "epsilon",
            value: epsilon,
            range: "[0, 2)",
        });
    }
    Ok(())
}

fn check_beta(beta: f64) -> Result<()> {
    if !(0.0..=1.0).contains(&beta) {
        return Err(Error::MarginOutOfRange {
            name: "beta",
            value: beta,
            range: "[0, 1]",
        });
    }
    Ok(())
}

fn check_non_negative(name: &'static str, value: f64) -> Result<()> {
    if !(value >= 0.0 && value.is_finite()) {
        return Err(Error::MarginOutOfRange {
            name,
            value,
            range: "[0, inf)",
        });
    }
    Ok(())
}

/// Strict margin `epsilon`, relaxing margin `beta`, and regularizer weight
/// `lambda`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MarginState {
    epsilon: f64,
    beta: f64,
    lambda: f64,
}

impl MarginState {
    pub fn new(epsilon: f64, beta: f64, lambda: f64) -> Result<Self> {
        check_epsilon(epsilon)?;
        check_beta(beta)?;
        check_non_negative("lambda", lambda)?;
        Ok(Self { epsilon, beta, lambda })
    }

    pub fn epsilon(&self) -> f64 {
        self.epsilon
    }

    pub fn beta(&self) -> f64 {
        self.beta
    }

    pub fn lambda(&self) -> f64 {
        self.lambda
    }

    pub fn with_margins(self, epsilon: f64, beta: f64) -> Result<Self> {
        Self::new(epsilon, beta, self.lambda)
    }
}

/// Which hinges of AdaTriplet are active for a triplet.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum TripletRegion {
    /// Triplet hinge and negative-pair hinge both active.
    HardBoth,
    /// Only `phi_an > beta`.
    HardNegOnly,
    /// Only `phi_an - phi_ap + eps > 0`.
    HardTripletOnly,
    Easy,
}

impl TripletRegion {
    pub const ALL: [TripletRegion; 4] = [
        TripletRegion::HardBoth,
        TripletRegion::HardNegOnly,
        TripletRegion::HardTripletOnly,
        TripletRegion::Easy,
    ];

    /// The constant `(dL/dphi_ap, dL/dphi_an)` of AdaTriplet in this region.
    pub fn gradient(self, lambda: f64) -> (f64, f64) {
        match self {
            TripletRegion::HardBoth => (-1.0, 1.0 + lambda),
            TripletRegion::HardNegOnly => (0.0, lambda),
            TripletRegion::HardTripletOnly => (-1.0, 1.0),
            TripletRegion::Easy => (0.0, 0.0),
        }
    }
}

#[inline]
fn hinge(x: f64) -> f64 {
    if x > 0.0 {
        x
    } else {
        0.0
    }
}

#[inline]
fn triplet_arg(sims: &TripletSims, epsilon: f64) -> f64 {
    sims.phi_an - sims.phi_ap + epsilon
}

/// Triplet loss on squared Euclidean distances with margin in `[0, 4)`.
pub fn triplet_l2(anchor: &UnitVector, positive: &UnitVector, negative: &UnitVector, epsilon4: f64) -> Result<f64> {
    if !(0.0..4.0).contains(&epsilon4) {
        return Err(Error::MarginOutOfRange {
            name: "epsilon",
            value: epsilon4,
            range: "[0, 4)",
        });
    }
    let d_ap = crate::vector::squared_l2(anchor, positive)?;
    let d_an = crate::vector::squared_l2(anchor, negative)?;
    Ok(hinge(d_ap - d_an + epsilon4))
}

/// Triplet loss on cosine similarities: `[phi_an - phi_ap + eps]+`.
pub fn triplet_cos(sims: &TripletSims, epsilon: f64) -> Result<f64> {
    check_epsilon(epsilon)?;
    Ok(hinge(triplet_arg(sims, epsilon)))
}

/// Subgradient of [`triplet_cos`]: `(-1, 1)` when the hinge is active.
pub fn triplet_cos_grad(sims: &TripletSims, epsilon: f64) -> Result<(f64, f64)> {
    check_epsilon(epsilon)?;
    if triplet_arg(sims, epsilon) > 0.0 {
        Ok((-1.0, 1.0))
    } else {
        Ok((0.0, 0.0))
    }
}

/// Anchor-negative regularizer `[phi_an - beta]+`.
pub fn an_penalty(phi_an: f64, beta: f64) -> Result<f64> {
    check_beta(beta)?;
    check_similarity("phi_an", phi_an)?;
    Ok(hinge(phi_an - beta))
}

pub fn adatriplet(sims: &TripletSims, m: &MarginState) -> Result<f64> {
    check_epsilon(m.epsilon)?;
    Ok(hinge(triplet_arg(sims, m.epsilon)) + m.lambda * hinge(sims.phi_an - m.beta))
}

pub fn classify_triplet(sims: &TripletSims, m: &MarginState) -> TripletRegion {
    let triplet_active = triplet_arg(sims, m.epsilon) > 0.0;
    let negative_active = sims.phi_an - m.beta > 0.0;
    match (triplet_active, negative_active) {
        (true, true) => TripletRegion::HardBoth,
        (false, true) => TripletRegion::HardNegOnly,
        (true, false) => TripletRegion::HardTripletOnly,
        (false, false) => TripletRegion::Easy,
    }
}

/// `(dL/dphi_ap, dL/dphi_an)` of [`adatriplet`].
pub fn adatriplet_grad(sims: &TripletSims, m: &MarginState) -> Result<(f64, f64)> {
    check_epsilon(m.epsilon)?;
    Ok(classify_triplet(sims, m).gradient(m.lambda))
}

/// Two-margin contrastive loss on the squared distance `2 - 2 phi`.
///
/// Positive pairs are penalized beyond `m_pos`, negative pairs inside
/// `m_neg`.
pub fn contrastive(phi: f64, is_positive: bool, m_pos: f64, m_neg: f64) -> Result<f64> {
    check_non_negative("m_pos", m_pos)?;
    check_non_negative("m_neg", m_neg)?;
    check_similarity("phi", phi)?;
    let dist = 2.0 - 2.0 * phi;
    Ok(if is_positive {
        hinge(dist - m_pos)
    } else {
        hinge(m_neg - dist)
    })
}

/// Derivative of [`contrastive`] with respect to `phi`.
pub fn contrastive_grad(phi: f64, is_positive: bool, m_pos: f64, m_neg: f64) -> Result<f64> {
    check_non_negative("m_pos", m_pos)?;
    check_non_negative("m_neg", m_neg)?;
    check_similarity("phi", phi)?;
    let dist = 2.0 - 2.0 * phi;
    Ok(if is_positive {
        if dist - m_pos > 0.0 {
            -2.0
        } else {
            0.0
        }
    } else if m_neg - dist > 0.0 {
        2.0
    } else {
        0.0
    })
}

/// Embedding gradients from similarity gradients of one triplet.
pub struct EmbeddingGrads {
    pub anchor: Vec<f64>,
    pub positive: Vec<f64>,
    pub negative: Vec<f64>,
}

/// Chain rule through `phi_ap = a.p` and `phi_an = a.n`.
pub fn triplet_grad_to_embeddings(
    anchor: &UnitVector,
    positive: &UnitVector,
    negative: &UnitVector,
    d_phi_ap: f64,
    d_phi_an: f64,
) -> Result<EmbeddingGrads> {
    let (a, p, n) = (anchor.as_slice(), positive.as_slice(), negative.as_slice());
    for other in [p, n] {
        if other.len() != a.len() {
            return Err(Error::DimensionMismatch {
                left: a.len(),
                right: other.len(),
            });
        }
    }
    Ok(EmbeddingGrads {
        anchor: p.iter().zip(n).map(|(pi, ni)| d_phi_ap * pi + d_phi_an * ni).collect(),
        positive: a.iter().map(|ai| d_phi_ap * ai).collect(),
        negative: a.iter().map(|ai| d_phi_an * ai).collect(),
    })
}
