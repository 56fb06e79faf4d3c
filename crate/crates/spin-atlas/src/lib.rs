//! Field sweeps, crossing maps, temperature shifts and trace fitting for
//! NV⁻-centre spin clusters.
//!
//! This crate wraps [`spin_atlas_core`] with a LAPACK-class eigensolver
//! (faer), a rayon executor for grid points, file formats and the
//! `spin-atlas` command line.
//!
//! ```no_run
//! use spin_atlas::prelude::*;
//!
//! let engine = spin_atlas::default_engine(SweepOptions::default());
//! let entry = catalog::get_system("nv-nv").unwrap();
//! let range = FieldRange::new(0.0, 1100.0, 2048).unwrap();
//! let analysis = engine.analyze(&entry.spec, range, 300.0, &ThermalZfsModel::default()).unwrap();
//! for f in &analysis.features {
//!     println!("{:.2} G ({:?})", f.center, f.kind);
//! }
//! ```

pub mod cli;
pub mod config;
mod error;
pub mod io;
pub mod parallel;
pub mod solver;

pub use error::AtlasError;
pub use spin_atlas_core as core;

use spin_atlas_core::sweep::{Engine, SweepOptions};

/// Eigensolver used by [`default_engine`].
#[cfg(feature = "faer")]
pub type DefaultSolver = solver::FaerSolver;
/// Eigensolver used by [`default_engine`].
#[cfg(not(feature = "faer"))]
pub type DefaultSolver = spin_atlas_core::eigen::NativeSolver;

/// Engine with the default solver and a rayon executor.
pub type AtlasEngine = Engine<DefaultSolver, parallel::Rayon>;

/// Engine with the default solver, sized by `SPIN_ATLAS_THREADS`.
pub fn default_engine(options: SweepOptions) -> AtlasEngine {
    Engine::new(DefaultSolver::default(), parallel::Rayon::from_env(), options)
}

/// Common imports.
pub mod prelude {
    pub use crate::{default_engine, AtlasEngine, AtlasError, DefaultSolver};
    pub use spin_atlas_core::prelude::*;
}
