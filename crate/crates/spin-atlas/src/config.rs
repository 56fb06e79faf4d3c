//! TOML run configuration. Every key is optional; command-line flags win over
//! the file and the file wins over built-in defaults.
//!
//! ```toml
//! [sweep]
//! bmin = 0.0
//! bmax = 1100.0
//! points = 2048
//! temp = 300.0
//! jump_threshold = 0.4
//!
//! [thermal]
//! d0 = 2877.6
//!
//! [tshift]
//! tmin = 4.0
//! tmax = 300.0
//! tstep = 8.0
//!
//! [fit]
//! seeds = [500.0, 512.0, 524.0]
//! ```

use std::path::Path;

use serde::Deserialize;
use spin_atlas_core::sweep::SweepOptions;
use spin_atlas_core::thermal::ThermalZfsModel;

use crate::{io, AtlasError};

/// `[sweep]` table.
#[derive(Debug, Clone, Default, PartialEq, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SweepSection {
    /// Catalog id.
    pub system: Option<String>,
    /// Spec file path.
    pub spec: Option<String>,
    /// Lower field, G.
    pub bmin: Option<f64>,
    /// Upper field, G.
    pub bmax: Option<f64>,
    /// Grid points.
    pub points: Option<usize>,
    /// Temperature, K.
    pub temp: Option<f64>,
    /// See [`SweepOptions::jump_threshold`].
    pub jump_threshold: Option<f64>,
    /// See [`SweepOptions::gap_ceiling`].
    pub gap_ceiling: Option<f64>,
    /// See [`SweepOptions::gap_true`].
    pub gap_true: Option<f64>,
    /// See [`SweepOptions::cluster_radius`].
    pub cluster_radius: Option<f64>,
    /// See [`SweepOptions::resolution`].
    pub resolution: Option<f64>,
}

/// `[thermal]` table.
#[derive(Debug, Clone, Default, PartialEq, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ThermalSection {
    /// D at 0 K, MHz.
    pub d0: Option<f64>,
    /// Mode-1 coupling, MHz.
    pub c1: Option<f64>,
    /// Mode-2 coupling, MHz.
    pub c2: Option<f64>,
    /// Mode-1 energy, meV.
    pub delta1: Option<f64>,
    /// Mode-2 energy, meV.
    pub delta2: Option<f64>,
}

/// `[tshift]` table.
#[derive(Debug, Clone, Default, PartialEq, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TshiftSection {
    /// Lowest temperature, K.
    pub tmin: Option<f64>,
    /// Highest temperature, K.
    pub tmax: Option<f64>,
    /// Temperature step, K.
    pub tstep: Option<f64>,
    /// Search half width when following the feature, G.
    pub window: Option<f64>,
}

/// `[fit]` table.
#[derive(Debug, Clone, Default, PartialEq, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FitSection {
    /// Seed fields, G.
    pub seeds: Option<Vec<f64>>,
    /// Central dip for separations, G.
    pub central: Option<f64>,
    /// Prominence factor for automatic seeds.
    pub prominence: Option<f64>,
    /// Relative convergence tolerance.
    pub tolerance: Option<f64>,
    /// Iteration cap.
    pub max_iterations: Option<usize>,
}

/// Whole configuration file.
#[derive(Debug, Clone, Default, PartialEq, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Config {
    /// Sweep settings.
    #[serde(default)]
    pub sweep: SweepSection,
    /// Thermal-model overrides.
    #[serde(default)]
    pub thermal: ThermalSection,
    /// Temperature-shift settings.
    #[serde(default)]
    pub tshift: TshiftSection,
    /// Trace-fit settings.
    #[serde(default)]
    pub fit: FitSection,
}

impl Config {
    /// Parse TOML text.
    pub fn parse(text: &str, path: &Path) -> Result<Self, AtlasError> {
        toml::from_str(text).map_err(|e| AtlasError::parse(path, e.to_string()))
    }

    /// Read and parse a file.
    pub fn load(path: &Path) -> Result<Self, AtlasError> {
        Self::parse(&io::read_text(path)?, path)
    }

    /// Thermal model with file overrides applied to `base`.
    pub fn thermal_model(&self, base: ThermalZfsModel) -> ThermalZfsModel {
        let t = &self.thermal;
        ThermalZfsModel {
            d0: t.d0.unwrap_or(base.d0),
            c1: t.c1.unwrap_or(base.c1),
            c2: t.c2.unwrap_or(base.c2),
            delta1: t.delta1.unwrap_or(base.delta1),
            delta2: t.delta2.unwrap_or(base.delta2),
            ..base
        }
    }

    /// Detection options with file overrides applied to `base`.
    pub fn sweep_options(&self, base: SweepOptions) -> SweepOptions {
        let s = &self.sweep;
        SweepOptions {
            jump_threshold: s.jump_threshold.unwrap_or(base.jump_threshold),
            gap_ceiling: s.gap_ceiling.unwrap_or(base.gap_ceiling),
            gap_true: s.gap_true.unwrap_or(base.gap_true),
            cluster_radius: s.cluster_radius.unwrap_or(base.cluster_radius),
            resolution: s.resolution.unwrap_or(base.resolution),
            continuation_window: self.tshift.window.unwrap_or(base.continuation_window),
            ..base
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn partial_file_overrides_only_given_keys() {
        let c = Config::parse("[sweep]\npoints = 512\ngap_true = 0.1\n[thermal]\nd0 = 2880.0\n", Path::new("c.toml")).unwrap();
        assert_eq!(c.sweep.points, Some(512));
        let o = c.sweep_options(SweepOptions::default());
        assert_eq!(o.gap_true, 0.1);
        assert_eq!(o.jump_threshold, SweepOptions::default().jump_threshold);
        assert_eq!(c.thermal_model(ThermalZfsModel::default()).d0, 2880.0);
        assert!(Config::parse("[sweep]\nbogus = 1\n", Path::new("c.toml")).is_err());
    }
}
