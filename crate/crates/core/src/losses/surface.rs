//! Dense loss-surface and negative-gradient-field grids over
//! `(phi_an, phi_ap) in [-1, 1]^2`.

use std::io::Write;

use super::{adatriplet, adatriplet_grad, triplet_cos, triplet_cos_grad, MarginState, TripletSims};
use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SurfaceLoss {
    Triplet,
    AdaTriplet,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SurfaceCell {
    pub phi_an: f64,
    pub phi_ap: f64,
    pub loss: f64,
    pub neg_grad_ap: f64,
    pub neg_grad_an: f64,
}

/// Grid coordinate `k` of `resolution` evenly spaced points in `[-1, 1]`.
pub fn grid_coord(k: usize, resolution: usize) -> f64 {
    if k + 1 == resolution {
        return 1.0;
    }
    -1.0 + 2.0 * k as f64 / (resolution - 1) as f64
}

/// Evaluates the loss on a `resolution x resolution` grid.
///
/// Rows run over `phi_ap` (ascending), columns over `phi_an` (ascending);
/// the output is row-major with `phi_an` varying fastest.
pub fn surface_grid(loss: SurfaceLoss, m: &MarginState, resolution: usize) -> Result<Vec<SurfaceCell>> {
    if resolution < 2 {
        return Err(Error::ConfigInvalid {
            field: "resolution",
            reason: format!("{resolution} < 2"),
        });
    }
    let mut cells = Vec::with_capacity(resolution * resolution);
    for row in 0..resolution {
        let phi_ap = grid_coord(row, resolution);
        for col in 0..resolution {
            let phi_an = grid_coord(col, resolution);
            let sims = TripletSims::new(phi_ap, phi_an)?;
            let (value, (g_ap, g_an)) = match loss {
                SurfaceLoss::Triplet => (triplet_cos(&sims, m.epsilon())?, triplet_cos_grad(&sims, m.epsilon())?),
                SurfaceLoss::AdaTriplet => (adatriplet(&sims, m)?, adatriplet_grad(&sims, m)?),
            };
            cells.push(SurfaceCell {
                phi_an,
                phi_ap,
                loss: value,
                // 0 - g keeps zero gradients as +0
                neg_grad_ap: 0.0 - g_ap,
                neg_grad_an: 0.0 - g_an,
            });
        }
    }
    Ok(cells)
}

pub fn write_surface_csv<W: Write>(cells: &[SurfaceCell], mut out: W) -> Result<()> {
    writeln!(out, "phi_an,phi_ap,loss,neg_grad_ap,neg_grad_an")?;
    for c in cells {
        writeln!(
            out,
            "{},{},{},{},{}",
            c.phi_an, c.phi_ap, c.loss, c.neg_grad_ap, c.neg_grad_an
        )?;
    }
    Ok(())
}
