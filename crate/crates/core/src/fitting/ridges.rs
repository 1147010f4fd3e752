//! Linking per-column peaks of a transmission map into branches.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::peaks::{find_peaks, refine_peak};
use crate::coupled::TransmissionMap;
use crate::scalar::Real;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RidgeOptions<T> {
    /// Minimum peak prominence in dB.
    pub min_prominence: T,
    /// Largest allowed distance, in frequency bins per column, between a
    /// peak and the extrapolated ridge.
    pub max_jump_bins: T,
    /// Columns a ridge may skip before it is closed.
    pub max_gap: usize,
    /// Ridges with fewer points are discarded.
    pub min_points: usize,
    /// Parabolic sub-bin refinement of each peak.
    pub refine: bool,
}

impl<T: Real> Default for RidgeOptions<T> {
    fn default() -> Self {
        Self { min_prominence: T::lit(10.0), max_jump_bins: T::lit(10.0), max_gap: 2, min_points: 3, refine: false }
    }
}

/// One branch: `(B, f)` points in increasing `B`, plus the column indices.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Ridge<T> {
    pub points: Vec<(T, T)>,
    pub columns: Vec<usize>,
}

impl<T: Real> Ridge<T> {
    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    fn last_column(&self) -> usize {
        *self.columns.last().expect("ridges are never empty")
    }

    /// Linear extrapolation of the last two points to column `c`.
    fn predict(&self, c: usize) -> T {
        let n = self.points.len();
        let f_last = self.points[n - 1].1;
        if n < 2 {
            return f_last;
        }
        let (c1, c0) = (self.columns[n - 1], self.columns[n - 2]);
        let rate = (f_last - self.points[n - 2].1) / T::from_usize(c1 - c0).expect("column index");
        f_last + rate * T::from_usize(c - c1).expect("column index")
    }
}

/// Peaks in every `B` column of `map`, linked across columns.
///
/// Each open ridge predicts its next frequency by linear extrapolation and
/// takes the nearest unclaimed peak within `max_jump_bins` bins per column
/// elapsed; matches are made greedily in order of increasing distance, so a
/// closer (straighter) continuation always wins. Unclaimed peaks open new ridges.
pub fn extract_ridges<T: Real>(map: &TransmissionMap<T>, opts: &RidgeOptions<T>) -> Vec<Ridge<T>> {
    let (nb, nf) = map.shape();
    let f_axis = map.f_axis();
    let b_axis = map.b_axis();
    let bin = (f_axis[nf - 1] - f_axis[0]) / T::from_usize(nf - 1).expect("grid size");
    let columns: Vec<Vec<T>> = (0..nb)
        .into_par_iter()
        .map(|ib| {
            let trace: Vec<(T, T)> = f_axis.iter().copied().zip(map.column_db(ib)).collect();
            match find_peaks(&trace, opts.min_prominence) {
                Ok(list) => list
                    .iter()
                    .map(|p| if opts.refine { refine_peak(&trace, p.index) } else { p.freq })
                    .collect(),
                Err(_) => Vec::new(),
            }
        })
        .collect();

    let mut open: Vec<Ridge<T>> = Vec::new();
    let mut done: Vec<Ridge<T>> = Vec::new();
    for (ib, peaks) in columns.iter().enumerate() {
        let (keep, closed): (Vec<_>, Vec<_>) = open.into_iter().partition(|r| ib - r.last_column() <= opts.max_gap + 1);
        done.extend(closed);
        open = keep;

        let mut pairs: Vec<(T, T, usize, usize)> = Vec::new();
        for (ri, ridge) in open.iter().enumerate() {
            let elapsed = T::from_usize(ib - ridge.last_column()).expect("column index");
            let pred = ridge.predict(ib);
            let limit = opts.max_jump_bins * bin * elapsed;
            let f_last = ridge.points[ridge.len() - 1].1;
            for (pi, &f) in peaks.iter().enumerate() {
                let d = (f - pred).abs();
                if d <= limit {
                    pairs.push((d, (f - f_last).abs(), ri, pi));
                }
            }
        }
        pairs.sort_by(|a, b| {
            a.0.partial_cmp(&b.0)
                .unwrap_or(std::cmp::Ordering::Equal)
                .then(a.1.partial_cmp(&b.1).unwrap_or(std::cmp::Ordering::Equal))
                .then(a.2.cmp(&b.2))
                .then(a.3.cmp(&b.3))
        });
        let mut ridge_used = vec![false; open.len()];
        let mut peak_used = vec![false; peaks.len()];
        for (_, _, ri, pi) in pairs {
            if ridge_used[ri] || peak_used[pi] {
                continue;
            }
            ridge_used[ri] = true;
            peak_used[pi] = true;
            open[ri].points.push((b_axis[ib], peaks[pi]));
            open[ri].columns.push(ib);
        }
        for (pi, &f) in peaks.iter().enumerate() {
            if !peak_used[pi] {
                open.push(Ridge { points: vec![(b_axis[ib], f)], columns: vec![ib] });
            }
        }
    }
    done.extend(open);
    done.retain(|r| r.len() >= opts.min_points.max(1));
    done.sort_by(|a, b| {
        a.columns[0].cmp(&b.columns[0]).then(a.points[0].1.partial_cmp(&b.points[0].1).unwrap_or(std::cmp::Ordering::Equal))
    });
    done
}
