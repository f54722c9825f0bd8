use chrono::{DateTime, Utc};
use serde::{Deserialize, Serialize};

use super::LayoutError;
use crate::slicing::TimeSlice;

/// Horizontal extent of one slice on the time axis.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AxisSlice {
    pub x0: f64,
    pub x1: f64,
    /// Days per canvas unit; denser coils mean a longer slice.
    pub coil_density: f64,
    pub start: DateTime<Utc>,
    pub end: DateTime<Utc>,
}

impl AxisSlice {
    pub fn width(&self) -> f64 {
        self.x1 - self.x0
    }

    pub fn duration_days(&self) -> f64 {
        (self.end - self.start).num_seconds() as f64 / 86_400.0
    }
}

/// Contiguous left-to-right slice extents starting at x = 0.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SpringAxis {
    pub slices: Vec<AxisSlice>,
}

impl SpringAxis {
    pub fn width(&self) -> f64 {
        self.slices.last().map_or(0.0, |s| s.x1)
    }

    /// Move the whole axis right by `dx`.
    pub fn shifted(mut self, dx: f64) -> Self {
        for s in &mut self.slices {
            s.x0 += dx;
            s.x1 += dx;
        }
        self
    }
}

/// Width of a slice lasting `days`: `w_min + w_scale * log2(1 + days)`.
pub fn slice_width(days: f64, w_min: f64, w_scale: f64) -> f64 {
    w_min + w_scale * (1.0 + days.max(0.0)).log2()
}

pub fn spring_axis(slices: &[TimeSlice], w_min: f64, w_scale: f64) -> Result<SpringAxis, LayoutError> {
    if !(w_min.is_finite() && w_min > 0.0) {
        return Err(LayoutError::InvalidParameter(format!("w_min must be positive, got {w_min}")));
    }
    if !(w_scale.is_finite() && w_scale >= 0.0) {
        return Err(LayoutError::InvalidParameter(format!("w_scale must be non-negative, got {w_scale}")));
    }
    let mut x = 0.0;
    let mut out = Vec::with_capacity(slices.len());
    for s in slices {
        let days = s.duration_days().max(0.0);
        let width = slice_width(days, w_min, w_scale);
        out.push(AxisSlice {
            x0: x,
            x1: x + width,
            coil_density: days / width,
            start: s.start,
            end: s.end,
        });
        x += width;
    }
    Ok(SpringAxis { slices: out })
}
