//! Reid product versus the closed-form minimum along a squeezing sweep of
//! the two-mode squeezed vacuum, with a fixed off-optimal local rotation.

use std::io::Write;

use nalgebra::Matrix2;
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::gaussian::LocalSymplectic;
use crate::report::fmt_sig12;
use crate::states::tmsv;
use crate::steering::{det_schur_complement_b, reid_product};

pub const ROTATION_V_A: f64 = 0.16;
pub const ROTATION_V_B: f64 = 0.19;

pub const CSV_HEADER: &str = "r,det_m_b,reid_product_rotated,reid_product_standard";

/// `[[1, v], [v, 1 + v²]]`, i.e. chart coordinates `u = v/(1+v²)`, `w = 1+v²`.
pub fn shear(v: f64) -> Matrix2<f64> {
    Matrix2::new(1.0, v, v, 1.0 + v * v)
}

/// The fixed local transform applied to every state of the sweep.
pub fn sweep_rotation() -> LocalSymplectic {
    LocalSymplectic::new(shear(ROTATION_V_A), shear(ROTATION_V_B))
        .expect("shears have unit determinant")
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SweepRow {
    pub r: f64,
    pub det_m_b: f64,
    pub reid_product_rotated: f64,
    pub reid_product_standard: f64,
}

/// `steps` evenly spaced points from `min` to `max` inclusive.
pub fn r_grid(min: f64, max: f64, steps: usize) -> Result<Vec<f64>> {
    if !(min.is_finite() && max.is_finite()) || min < 0.0 || max < min || steps == 0 {
        return Err(Error::InvalidArgument(format!(
            "invalid r grid: min {min}, max {max}, steps {steps}"
        )));
    }
    if steps == 1 {
        return Ok(vec![min]);
    }
    let h = (max - min) / (steps - 1) as f64;
    Ok((0..steps)
        .map(|i| {
            if i + 1 == steps {
                max
            } else {
                min + h * i as f64
            }
        })
        .collect())
}

pub fn sweep_row(r: f64) -> Result<SweepRow> {
    let cm = tmsv(r)?.cm;
    Ok(SweepRow {
        r,
        det_m_b: det_schur_complement_b(&cm)?,
        reid_product_rotated: reid_product(&cm.apply_local(&sweep_rotation()))?,
        reid_product_standard: reid_product(&cm)?,
    })
}

/// Evaluates the grid in parallel; rows keep grid order.
pub fn sweep(grid: &[f64]) -> Result<Vec<SweepRow>> {
    grid.par_iter().map(|&r| sweep_row(r)).collect()
}

pub fn write_csv<W: Write>(rows: &[SweepRow], mut w: W) -> std::io::Result<()> {
    writeln!(w, "{CSV_HEADER}")?;
    for row in rows {
        writeln!(
            w,
            "{},{},{},{}",
            fmt_sig12(row.r),
            fmt_sig12(row.det_m_b),
            fmt_sig12(row.reid_product_rotated),
            fmt_sig12(row.reid_product_standard)
        )?;
    }
    Ok(())
}
