//! Spectral fitting: peaks, Fano lineshapes, ridges and avoided crossings.

pub mod crossing;
pub mod fano;
pub mod lm;
pub mod peaks;
pub mod pipeline;
pub mod ridges;

pub use crossing::{fit_avoided_crossing, fit_avoided_crossing_with, CrossingFit, CrossingFixed, Side};
pub use fano::{fit_fano, fit_fano_with, linewidth_stats, FanoFit, FanoParams};
pub use lm::{levenberg_marquardt, LmOptions, LmSolution, Problem};
pub use peaks::{find_peaks, refine_peak, Peak, PeakList};
pub use pipeline::{fit_map, fit_ridge, ModeFailure, ModeFit, PipelineOptions, PipelineReport};
pub use ridges::{extract_ridges, Ridge, RidgeOptions};
