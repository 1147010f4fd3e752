//! Local maxima with topographic prominence and half-prominence widths.

use serde::{Deserialize, Serialize};

use crate::error::FitError;
use crate::scalar::Real;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Peak<T> {
    /// Grid index of the maximum.
    pub index: usize,
    pub freq: T,
    pub height: T,
    /// Full width at half prominence, linearly interpolated.
    pub width: T,
    pub prominence: T,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct PeakList<T> {
    /// Sorted by ascending frequency.
    pub peaks: Vec<Peak<T>>,
}

impl<T> PeakList<T> {
    pub fn len(&self) -> usize {
        self.peaks.len()
    }

    pub fn is_empty(&self) -> bool {
        self.peaks.is_empty()
    }

    pub fn iter(&self) -> std::slice::Iter<'_, Peak<T>> {
        self.peaks.iter()
    }
}

/// Peaks of `(freq, value)` with prominence of at least `min_prominence`.
///
/// A flat plateau counts as one peak at its middle sample. End points are
/// never peaks.
pub fn find_peaks<T: Real>(trace: &[(T, T)], min_prominence: T) -> Result<PeakList<T>, FitError> {
    if trace.len() < 3 {
        return Err(FitError::TooFewPoints { need: 3, got: trace.len() });
    }
    if trace.windows(2).any(|w| !(w[1].0 > w[0].0)) {
        return Err(FitError::Unsorted);
    }
    let y: Vec<T> = trace.iter().map(|p| p.1).collect();
    let mut peaks = Vec::new();
    for i in local_maxima(&y) {
        let (prominence, left_base, right_base) = prominence(&y, i);
        if !(prominence >= min_prominence) || prominence <= T::zero() {
            continue;
        }
        let width = half_width(trace, i, prominence, left_base, right_base);
        peaks.push(Peak { index: i, freq: trace[i].0, height: y[i], width, prominence });
    }
    Ok(PeakList { peaks })
}

fn local_maxima<T: Real>(y: &[T]) -> Vec<usize> {
    let mut out = Vec::new();
    let n = y.len();
    let mut i = 1;
    while i + 1 < n {
        if y[i - 1] < y[i] {
            let mut ahead = i + 1;
            while ahead + 1 < n && y[ahead] == y[i] {
                ahead += 1;
            }
            if y[ahead] < y[i] {
                out.push((i + ahead - 1) / 2);
                i = ahead;
                continue;
            }
        }
        i += 1;
    }
    out
}

/// Prominence and the indices of the left and right bases.
fn prominence<T: Real>(y: &[T], i: usize) -> (T, usize, usize) {
    let h = y[i];
    let mut left_min = h;
    let mut left_base = i;
    let mut j = i;
    while j > 0 {
        j -= 1;
        if y[j] > h {
            break;
        }
        if y[j] < left_min {
            left_min = y[j];
            left_base = j;
        }
    }
    let mut right_min = h;
    let mut right_base = i;
    let mut j = i;
    while j + 1 < y.len() {
        j += 1;
        if y[j] > h {
            break;
        }
        if y[j] < right_min {
            right_min = y[j];
            right_base = j;
        }
    }
    (h - left_min.max(right_min), left_base, right_base)
}

fn half_width<T: Real>(trace: &[(T, T)], i: usize, prominence: T, left_base: usize, right_base: usize) -> T {
    let level = trace[i].1 - prominence / T::lit(2.0);
    let cross = |a: usize, b: usize| {
        let (fa, ya) = trace[a];
        let (fb, yb) = trace[b];
        if ya == yb {
            fa
        } else {
            fa + (fb - fa) * (level - ya) / (yb - ya)
        }
    };
    let mut j = i;
    while j > left_base && trace[j].1 > level {
        j -= 1;
    }
    let left = if trace[j].1 <= level { cross(j, j + 1) } else { trace[j].0 };
    let mut k = i;
    while k < right_base && trace[k].1 > level {
        k += 1;
    }
    let right = if trace[k].1 <= level { cross(k - 1, k) } else { trace[k].0 };
    right - left
}

/// Vertex of the parabola through the peak sample and its neighbours,
/// clamped to half a bin either side.
pub fn refine_peak<T: Real>(trace: &[(T, T)], index: usize) -> T {
    if index == 0 || index + 1 >= trace.len() {
        return trace[index].0;
    }
    let (y0, y1, y2) = (trace[index - 1].1, trace[index].1, trace[index + 1].1);
    let denom = y0 - T::lit(2.0) * y1 + y2;
    if denom >= T::zero() {
        return trace[index].0;
    }
    let half = T::lit(0.5);
    let delta = (half * (y0 - y2) / denom).max(-half).min(half);
    let step = if delta >= T::zero() { trace[index + 1].0 - trace[index].0 } else { trace[index].0 - trace[index - 1].0 };
    trace[index].0 + delta * step
}
