//! Spin-Hamiltonian engine for NV⁻-centre cross-relaxation maps.
//!
//! The crate builds composite spin Hamiltonians (NV electrons, P1 centres,
//! ¹⁴N/¹⁵N/¹³C nuclei), sweeps the axial magnetic field, and locates the level
//! crossings that show up as dips in NV photoluminescence. It also carries the
//! two-phonon model of the zero-field splitting, a catalog of preset spin
//! clusters, and a Lorentzian dip fitter for measured traces.
//!
//! Everything here is `no_std` with `alloc`. File IO, the command line and the
//! parallel/BLAS-backed eigensolvers live in the `spin-atlas` crate.
//!
//! Units: energies in MHz (h = 1), fields in gauss, temperatures in kelvin.
//!
//! ```
//! use spin_atlas_core::prelude::*;
//!
//! let entry = catalog::get_system("nv").unwrap();
//! let engine = Engine::new(NativeSolver, Sequential, SweepOptions::default());
//! let model = ThermalZfsModel::default();
//! let sweep = engine.sweep(&entry.spec, FieldRange::new(1000.0, 1050.0, 101).unwrap(), 300.0, &model).unwrap();
//! let events = engine.detect_events(&sweep);
//! assert_eq!(events.len(), 1);
//! ```

#![cfg_attr(not(test), no_std)]
#![warn(missing_docs)]

extern crate alloc;

pub mod catalog;
pub mod eigen;
mod error;
pub mod linalg;
pub(crate) mod math;
pub mod spin;
pub mod sweep;
pub mod thermal;
pub mod trace;

pub use error::Error;

/// Result alias used across the crate.
pub type Result<T, E = Error> = core::result::Result<T, E>;

/// Convenience re-exports of the types most callers need.
pub mod prelude {
    pub use crate::catalog::{self, CatalogEntry, ExpectedFeature};
    pub use crate::eigen::{Eigen, EigenSolver, NativeSolver};
    pub use crate::linalg::{HermitianMatrix, Vec3};
    pub use crate::spin::{
        AxisOrientation, CouplingSpec, InteractionTensor, SiteSpec, SpeciesKind, SpinSpecies,
        SpinSystemSpec,
    };
    pub use crate::sweep::{
        CrossingEvent, CrossingFeature, CrossingKind, Engine, Executor, FieldRange, Sequential,
        SpectralLine, SweepOptions, SweepResult,
    };
    pub use crate::thermal::ThermalZfsModel;
    pub use crate::Error;
}
