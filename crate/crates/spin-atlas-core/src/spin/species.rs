use serde::{Deserialize, Serialize};

/// Electron gyromagnetic ratio, MHz/G.
pub const GAMMA_E: f64 = 2.8024;
/// ¹⁴N nuclear gyromagnetic ratio magnitude, MHz/G.
pub const GAMMA_N14: f64 = 3.077e-4;
/// ¹⁵N nuclear gyromagnetic ratio magnitude, MHz/G.
pub const GAMMA_N15: f64 = 4.316e-4;
/// ¹³C nuclear gyromagnetic ratio magnitude, MHz/G.
pub const GAMMA_C13: f64 = 1.0705e-3;

/// The spin species that can appear in a cluster.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SpeciesKind {
    /// NV⁻ electron spin, S = 1.
    NvElectron,
    /// P1 (substitutional nitrogen) electron, S = 1/2.
    P1Electron,
    /// ¹⁴N nucleus, I = 1.
    N14,
    /// ¹⁵N nucleus, I = 1/2.
    N15,
    /// ¹³C nucleus, I = 1/2.
    C13,
}

impl SpeciesKind {
    /// 2S + 1.
    pub fn multiplicity(self) -> usize {
        match self {
            SpeciesKind::NvElectron | SpeciesKind::N14 => 3,
            SpeciesKind::P1Electron | SpeciesKind::N15 | SpeciesKind::C13 => 2,
        }
    }

    /// Whether this is an electron spin.
    pub fn is_electron(self) -> bool {
        matches!(self, SpeciesKind::NvElectron | SpeciesKind::P1Electron)
    }

    /// Default signed Zeeman coefficient γ in H = γ B·S, MHz/G.
    ///
    /// Electrons enter with a positive sign. Nuclei carry the sign of −γ_n
    /// (¹⁵N has a negative nuclear γ_n, hence a positive coefficient).
    pub fn default_gamma(self) -> f64 {
        match self {
            SpeciesKind::NvElectron | SpeciesKind::P1Electron => GAMMA_E,
            SpeciesKind::N14 => -GAMMA_N14,
            SpeciesKind::N15 => GAMMA_N15,
            SpeciesKind::C13 => -GAMMA_C13,
        }
    }

    /// Snake-case label used in documents.
    pub fn label(self) -> &'static str {
        match self {
            SpeciesKind::NvElectron => "nv_electron",
            SpeciesKind::P1Electron => "p1_electron",
            SpeciesKind::N14 => "n14",
            SpeciesKind::N15 => "n15",
            SpeciesKind::C13 => "c13",
        }
    }
}

/// A species together with its Zeeman coefficient.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SpinSpecies {
    /// Which spin.
    pub kind: SpeciesKind,
    /// Signed Zeeman coefficient, MHz/G.
    pub gyromagnetic_ratio: f64,
}

impl SpinSpecies {
    /// Species with its default Zeeman coefficient.
    pub fn new(kind: SpeciesKind) -> Self {
        SpinSpecies { kind, gyromagnetic_ratio: kind.default_gamma() }
    }

    /// 2S + 1.
    pub fn multiplicity(&self) -> usize {
        self.kind.multiplicity()
    }
}
