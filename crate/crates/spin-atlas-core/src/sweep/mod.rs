//! Field sweeps, crossing detection, feature clustering and temperature shifts.
//!
//! A sweep diagonalises the cluster Hamiltonian on a field grid and records,
//! for every eigenstate, its overlap p_i with the probe NV's m_S = 0 subspace.
//! Crossings that can transfer polarisation show up as p_i exchanges between
//! neighbouring levels or as narrow minima of the level gap.

mod cluster;
mod continuation;
mod detect;
mod engine;
mod refine;
mod sectors;

use alloc::vec::Vec;

use serde::{Deserialize, Serialize};

pub use cluster::{cluster_features, cluster_lines, group_lines, DEFAULT_LINE_MERGE};
pub use continuation::{ShiftPoint, TemperatureShift};
pub use detect::detect_events;
pub use engine::{Analysis, Engine, Prepared};

use crate::eigen::Eigen;
use crate::{Error, Result};

/// Evenly spaced field grid, gauss.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FieldRange {
    /// First grid point.
    pub b_min: f64,
    /// Last grid point.
    pub b_max: f64,
    /// Number of points (≥ 2).
    pub points: usize,
}

impl FieldRange {
    /// Validated grid; requires 0 ≤ b_min < b_max and at least two points.
    pub fn new(b_min: f64, b_max: f64, points: usize) -> Result<Self> {
        if !(b_min.is_finite() && b_max.is_finite()) || !(b_min < b_max) {
            return Err(Error::InvalidRange(alloc::format!("need b_min < b_max, got {b_min}..{b_max}")));
        }
        if b_min < 0.0 {
            return Err(Error::InvalidRange("fields must be non-negative".into()));
        }
        if points < 2 {
            return Err(Error::InvalidRange("need at least two grid points".into()));
        }
        Ok(FieldRange { b_min, b_max, points })
    }

    /// Spacing between points.
    pub fn step(&self) -> f64 {
        (self.b_max - self.b_min) / (self.points - 1) as f64
    }

    /// Field at index `i`.
    pub fn at(&self, i: usize) -> f64 {
        if i + 1 == self.points {
            self.b_max
        } else {
            self.b_min + self.step() * i as f64
        }
    }

    /// All grid points.
    pub fn grid(&self) -> Vec<f64> {
        (0..self.points).map(|i| self.at(i)).collect()
    }
}

/// Which m_S = 0 the probe projector refers to.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ProbeBasis {
    /// m_S = 0 quantised along the applied field (lab z).
    #[default]
    Field,
    /// m_S = 0 quantised along the probe NV's own axis.
    NvAxis,
}

/// Which eigenvectors a sweep keeps.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum VectorRetention {
    /// Keep none.
    #[default]
    None,
    /// Every point below dimension 128, otherwise only points bracketing
    /// detected candidates.
    Auto,
}

/// Thresholds and resolutions of the detection pipeline.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SweepOptions {
    /// |Δp_i| between adjacent points that marks an exchange.
    pub jump_threshold: f64,
    /// Gap minima above this (MHz) are ignored.
    pub gap_ceiling: f64,
    /// Refined gaps below this (MHz) are true crossings.
    pub gap_true: f64,
    /// Field resolution of refinement, G.
    pub resolution: f64,
    /// Half width (G) of the window over which a p_i swing is measured.
    pub swing_window: f64,
    /// Minimum min(p, 1 − p) of both levels for a mixed gap minimum.
    pub mix_floor: f64,
    /// Events closer than this (G) belong to the same line.
    pub line_merge: f64,
    /// Single-linkage radius (G) grouping lines into features.
    pub cluster_radius: f64,
    /// Added to |min eigenvalue| for the positivity shift, MHz.
    pub positivity_margin: f64,
    /// Probe projector convention.
    pub probe_basis: ProbeBasis,
    /// Eigenvector retention policy.
    pub retain_vectors: VectorRetention,
    /// Half width (G) of the window searched when following a crossing in temperature.
    pub continuation_window: f64,
    /// Field resolution (G) when following a crossing in temperature.
    pub continuation_resolution: f64,
}

impl Default for SweepOptions {
    fn default() -> Self {
        SweepOptions {
            jump_threshold: 0.4,
            gap_ceiling: 30.0,
            gap_true: 0.05,
            resolution: 0.01,
            swing_window: 21.5,
            mix_floor: 0.15,
            line_merge: 3.0,
            cluster_radius: 15.0,
            positivity_margin: 100.0,
            probe_basis: ProbeBasis::Field,
            retain_vectors: VectorRetention::None,
            continuation_window: 5.0,
            continuation_resolution: 1e-4,
        }
    }
}

/// Default number of grid points.
pub const DEFAULT_POINTS: usize = 2048;

/// Eigenvectors kept at one grid point.
#[derive(Debug, Clone, PartialEq)]
pub struct RetainedVectors {
    /// Grid index.
    pub index: usize,
    /// Unshifted eigenpairs.
    pub eigen: Eigen,
}

/// Output of a field sweep.
#[derive(Debug, Clone, PartialEq)]
pub struct SweepResult {
    /// Field grid, ascending, G.
    pub field_grid: Vec<f64>,
    /// Per point, ascending eigenvalues after the positivity shift, MHz.
    pub eigenvalues: Vec<Vec<f64>>,
    /// Per point, m_S = 0 overlap p_i of each eigenstate.
    pub projections: Vec<Vec<f64>>,
    /// Diagonal shift added to every eigenvalue, MHz.
    pub shift_applied: f64,
    /// Temperature of the sweep, K.
    pub temperature: f64,
    /// Zero-field splitting used, MHz.
    pub zfs: f64,
    /// Eigenvectors kept according to the retention policy.
    pub eigenvectors: Vec<RetainedVectors>,
}

impl SweepResult {
    /// Composite dimension.
    pub fn dimension(&self) -> usize {
        self.eigenvalues.first().map_or(0, Vec::len)
    }

    /// Number of grid points.
    pub fn len(&self) -> usize {
        self.field_grid.len()
    }

    /// True for an empty grid.
    pub fn is_empty(&self) -> bool {
        self.field_grid.is_empty()
    }

    /// Grid spacing.
    pub fn step(&self) -> f64 {
        if self.len() < 2 {
            0.0
        } else {
            (self.field_grid[self.len() - 1] - self.field_grid[0]) / (self.len() - 1) as f64
        }
    }
}

/// True crossing (exact degeneracy) or avoided crossing (finite gap).
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum CrossingKind {
    /// Levels cross.
    True,
    /// Levels repel.
    Avoided,
}

/// What flagged a candidate.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Signature {
    /// p_i jumps between two adjacent grid points.
    ProjectionJump,
    /// Narrow local minimum of the level gap.
    GapMinimum,
    /// p_i of one level passes 0.5 during a broad exchange.
    ProjectionMidpoint,
}

/// A located crossing between two adjacent levels.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CrossingEvent {
    /// Field of the crossing, G.
    pub field: f64,
    /// Level pair (i, i + 1).
    pub levels: (usize, usize),
    /// Gap ε_{i+1} − ε_i at `field`, MHz.
    pub min_gap: f64,
    /// Classification.
    pub kind: CrossingKind,
    /// Largest |Δp| involved.
    pub projection_jump: f64,
    /// Field interval that contains the crossing.
    pub bracket: (f64, f64),
    /// Detector that found it.
    pub signature: Signature,
    /// Level whose projection is followed (midpoint events).
    pub tracked_level: usize,
}

/// Events within a few gauss of each other, reported as one line.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SpectralLine {
    /// Median field of the member events, G.
    pub field: f64,
    /// True if any member is a true crossing.
    pub kind: CrossingKind,
    /// Smallest member gap, MHz.
    pub min_gap: f64,
    /// Member events, ascending in field.
    pub events: Vec<CrossingEvent>,
}

/// Character of a feature's lines.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum FeatureKind {
    /// Only true crossings.
    True,
    /// Only avoided crossings.
    Avoided,
    /// Both.
    Mixed,
}

/// A cluster of lines forming one predicted PL feature.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CrossingFeature {
    /// Median of the line fields, G.
    pub center: f64,
    /// Lowest and highest line field, G.
    pub span: (f64, f64),
    /// Member lines, ascending.
    pub lines: Vec<SpectralLine>,
    /// Smallest gap over all lines, MHz.
    pub min_gap: f64,
    /// Character of the member lines.
    pub kind: FeatureKind,
}

impl CrossingFeature {
    /// Line closest to the center.
    pub fn central_line(&self) -> &SpectralLine {
        self.lines
            .iter()
            .min_by(|a, b| (a.field - self.center).abs().total_cmp(&(b.field - self.center).abs()))
            .expect("features have at least one line")
    }
}

/// Runs independent jobs, returning results in index order.
pub trait Executor: Sync {
    /// `(0..n).map(f)`, possibly in parallel, collected in order.
    fn map_indexed<T: Send, F: Fn(usize) -> T + Sync>(&self, n: usize, f: F) -> Vec<T>;
}

/// Runs jobs one after another on the calling thread.
#[derive(Debug, Clone, Copy, Default)]
pub struct Sequential;

impl Executor for Sequential {
    fn map_indexed<T: Send, F: Fn(usize) -> T + Sync>(&self, n: usize, f: F) -> Vec<T> {
        (0..n).map(f).collect()
    }
}

impl<X: Executor + ?Sized> Executor for &X {
    fn map_indexed<T: Send, F: Fn(usize) -> T + Sync>(&self, n: usize, f: F) -> Vec<T> {
        (**self).map_indexed(n, f)
    }
}
