use alloc::format;
use alloc::string::{String, ToString};
use alloc::vec::Vec;

use serde::{Deserialize, Serialize};

use super::species::{SpeciesKind, SpinSpecies};
use super::tensor::{AxisOrientation, InteractionTensor};
use crate::{Error, Result};

/// Largest composite dimension accepted by the dense engine.
pub const DIMENSION_CAP: usize = 1024;

/// Zero-field splitting and strain of an NV electron, MHz.
///
/// The axial splitting D normally comes from the thermal model at sweep time;
/// set `d` to pin it for this site.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ZfsParams {
    /// Fixed D for this site, overriding the temperature-dependent value.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub d: Option<f64>,
    /// Axial strain d∥.
    #[serde(default)]
    pub d_parallel: f64,
    /// Transverse strain d_x.
    #[serde(default)]
    pub d_x: f64,
    /// Transverse strain d_y.
    #[serde(default)]
    pub d_y: f64,
}

/// Hyperfine coupling of a nucleus to an electron of the same cluster.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct HyperfineSpec {
    /// Index of the electron site.
    pub electron: usize,
    /// Coupling tensor, MHz.
    pub tensor: InteractionTensor,
}

/// One spin of the cluster.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SiteSpec {
    /// Species and Zeeman coefficient.
    pub species: SpinSpecies,
    /// Symmetry axis (NV axis, P1 Jahn-Teller axis, bond direction).
    pub axis: AxisOrientation,
    /// NV electrons only.
    pub zfs: Option<ZfsParams>,
    /// I = 1 nuclei only.
    pub quadrupole: Option<InteractionTensor>,
    /// Nuclei only.
    pub hyperfine: Option<HyperfineSpec>,
}

impl SiteSpec {
    /// NV electron with zero strain.
    pub fn nv(axis: AxisOrientation) -> Self {
        SiteSpec {
            species: SpinSpecies::new(SpeciesKind::NvElectron),
            axis,
            zfs: Some(ZfsParams::default()),
            quadrupole: None,
            hyperfine: None,
        }
    }

    /// Bare spin of the given kind (NV electrons get zero strain).
    pub fn new(kind: SpeciesKind, axis: AxisOrientation) -> Self {
        if kind == SpeciesKind::NvElectron {
            return Self::nv(axis);
        }
        SiteSpec { species: SpinSpecies::new(kind), axis, zfs: None, quadrupole: None, hyperfine: None }
    }

    /// Attach a hyperfine coupling to electron site `electron`.
    pub fn with_hyperfine(mut self, electron: usize, tensor: InteractionTensor) -> Self {
        self.hyperfine = Some(HyperfineSpec { electron, tensor });
        self
    }

    /// Attach a quadrupole tensor.
    pub fn with_quadrupole(mut self, tensor: InteractionTensor) -> Self {
        self.quadrupole = Some(tensor);
        self
    }

    /// Replace the strain parameters.
    pub fn with_zfs(mut self, zfs: ZfsParams) -> Self {
        self.zfs = Some(zfs);
        self
    }

    /// 2S + 1.
    pub fn multiplicity(&self) -> usize {
        self.species.multiplicity()
    }
}

/// Electron–electron (or any two-site) coupling S_a·T·S_b.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CouplingSpec {
    /// First site.
    pub site_a: usize,
    /// Second site.
    pub site_b: usize,
    /// Coupling tensor, MHz.
    pub tensor: InteractionTensor,
}

impl CouplingSpec {
    /// |T_zz| / max(|T_xx|, |T_yy|) in the lab frame.
    pub fn secular_fraction(&self) -> f64 {
        let t = self.tensor.lab();
        let transverse = t[(0, 0)].abs().max(t[(1, 1)].abs());
        if transverse == 0.0 {
            f64::INFINITY
        } else {
            t[(2, 2)].abs() / transverse
        }
    }
}

/// A declarative spin cluster.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "SpecDoc", into = "SpecDoc")]
pub struct SpinSystemSpec {
    sites: Vec<SiteSpec>,
    couplings: Vec<CouplingSpec>,
    probe_site: usize,
}

impl SpinSystemSpec {
    /// Validate and build.
    pub fn new(sites: Vec<SiteSpec>, couplings: Vec<CouplingSpec>, probe_site: usize) -> Result<Self> {
        let spec = SpinSystemSpec { sites, couplings, probe_site };
        spec.validate()?;
        Ok(spec)
    }

    /// Sites in Kronecker order.
    pub fn sites(&self) -> &[SiteSpec] {
        &self.sites
    }

    /// Two-site couplings.
    pub fn couplings(&self) -> &[CouplingSpec] {
        &self.couplings
    }

    /// NV electron whose m_S = 0 population is monitored.
    pub fn probe_site(&self) -> usize {
        self.probe_site
    }

    /// Per-site multiplicities.
    pub fn dims(&self) -> Vec<usize> {
        self.sites.iter().map(SiteSpec::multiplicity).collect()
    }

    /// Composite dimension.
    pub fn dimension(&self) -> usize {
        self.sites.iter().map(SiteSpec::multiplicity).product()
    }

    /// Copy with a different probe site.
    pub fn with_probe(&self, probe_site: usize) -> Result<Self> {
        Self::new(self.sites.clone(), self.couplings.clone(), probe_site)
    }

    /// Copy with every two-site coupling tensor multiplied by `factor`.
    pub fn with_scaled_couplings(&self, factor: f64) -> Self {
        let mut s = self.clone();
        for c in s.couplings.iter_mut() {
            c.tensor = c.tensor.scaled(factor);
        }
        s
    }

    /// Parse a JSON document.
    pub fn from_json(text: &str) -> Result<Self> {
        serde_json::from_str(text).map_err(|e| Error::SpecParse(e.to_string()))
    }

    /// Emit a pretty-printed JSON document.
    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("spec serialisation cannot fail")
    }

    fn validate(&self) -> Result<()> {
        let n = self.sites.len();
        if n == 0 {
            return Err(Error::MalformedSpec("no sites".into()));
        }
        let dim = self.dimension();
        if dim > DIMENSION_CAP {
            return Err(Error::DimensionCap { dim, cap: DIMENSION_CAP });
        }
        for (i, s) in self.sites.iter().enumerate() {
            let kind = s.species.kind;
            if (kind == SpeciesKind::NvElectron) != s.zfs.is_some() {
                return Err(Error::MalformedSpec(format!("site {i}: zfs block is required for NV electrons and only for them")));
            }
            if s.quadrupole.is_some() && kind != SpeciesKind::N14 {
                return Err(Error::MalformedSpec(format!("site {i}: quadrupole only allowed for I = 1 nuclei")));
            }
            if !s.species.gyromagnetic_ratio.is_finite() {
                return Err(Error::MalformedSpec(format!("site {i}: non-finite gyromagnetic ratio")));
            }
            if let Some(hf) = s.hyperfine {
                if kind.is_electron() {
                    return Err(Error::MalformedSpec(format!("site {i}: hyperfine block belongs on the nucleus")));
                }
                let e = self.sites.get(hf.electron).ok_or(Error::SiteOutOfRange { index: hf.electron, len: n })?;
                if !e.species.kind.is_electron() {
                    return Err(Error::MalformedSpec(format!("site {i}: hyperfine partner {} is not an electron", hf.electron)));
                }
            }
        }
        for c in &self.couplings {
            for idx in [c.site_a, c.site_b] {
                if idx >= n {
                    return Err(Error::SiteOutOfRange { index: idx, len: n });
                }
            }
            if c.site_a == c.site_b {
                return Err(Error::MalformedSpec("coupling joins a site to itself".into()));
            }
        }
        match self.sites.get(self.probe_site) {
            None => return Err(Error::SiteOutOfRange { index: self.probe_site, len: n }),
            Some(s) if s.species.kind != SpeciesKind::NvElectron => {
                return Err(Error::MalformedSpec("probe site must be an NV electron".into()))
            }
            _ => {}
        }
        Ok(())
    }
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct SiteDoc {
    kind: SpeciesKind,
    axis: AxisOrientation,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    gamma: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    zfs: Option<ZfsParams>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    quadrupole: Option<InteractionTensor>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    hyperfine: Option<HyperfineSpec>,
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct SpecDoc {
    sites: Vec<SiteDoc>,
    #[serde(default)]
    couplings: Vec<CouplingSpec>,
    probe_site: usize,
}

impl TryFrom<SpecDoc> for SpinSystemSpec {
    type Error = Error;
    fn try_from(doc: SpecDoc) -> Result<Self> {
        let sites = doc
            .sites
            .into_iter()
            .map(|s| {
                let mut species = SpinSpecies::new(s.kind);
                if let Some(g) = s.gamma {
                    species.gyromagnetic_ratio = g;
                }
                let zfs = match (s.kind, s.zfs) {
                    (SpeciesKind::NvElectron, None) => Some(ZfsParams::default()),
                    (_, z) => z,
                };
                SiteSpec { species, axis: s.axis, zfs, quadrupole: s.quadrupole, hyperfine: s.hyperfine }
            })
            .collect();
        SpinSystemSpec::new(sites, doc.couplings, doc.probe_site)
    }
}

impl From<SpinSystemSpec> for SpecDoc {
    fn from(spec: SpinSystemSpec) -> SpecDoc {
        SpecDoc {
            sites: spec
                .sites
                .into_iter()
                .map(|s| SiteDoc {
                    kind: s.species.kind,
                    axis: s.axis,
                    gamma: (s.species.gyromagnetic_ratio != s.species.kind.default_gamma())
                        .then_some(s.species.gyromagnetic_ratio),
                    zfs: s.zfs,
                    quadrupole: s.quadrupole,
                    hyperfine: s.hyperfine,
                })
                .collect(),
            couplings: spec.couplings,
            probe_site: spec.probe_site,
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use alloc::vec;

    fn nv_p1() -> SpinSystemSpec {
        let p1 = AxisOrientation::off_axis();
        SpinSystemSpec::new(
            vec![
                SiteSpec::nv(AxisOrientation::Z),
                SiteSpec::new(SpeciesKind::P1Electron, p1),
                SiteSpec::new(SpeciesKind::N14, p1)
                    .with_hyperfine(1, InteractionTensor::axial(81.3, 114.0, p1))
                    .with_quadrupole(InteractionTensor::quadrupole(-3.97, p1)),
            ],
            vec![CouplingSpec { site_a: 0, site_b: 1, tensor: InteractionTensor::lab_diagonal(5.0, 5.0, 0.0) }],
            0,
        )
        .unwrap()
    }

    #[test]
    fn json_round_trip() {
        let spec = nv_p1();
        let text = spec.to_json();
        let back = SpinSystemSpec::from_json(&text).unwrap();
        assert_eq!(back, spec);
        assert_eq!(back.to_json(), text);
    }

    #[test]
    fn missing_zfs_defaults_for_nv() {
        let s = SpinSystemSpec::from_json(r#"{"sites":[{"kind":"nv_electron","axis":[0,0,1]}],"probe_site":0}"#).unwrap();
        assert_eq!(s.sites()[0].zfs, Some(ZfsParams::default()));
        assert_eq!(s.dimension(), 3);
    }

    #[test]
    fn rejects_bad_documents() {
        let cases = [
            r#"{"sites":[{"kind":"p1_electron","axis":[0,0,1]}],"probe_site":0}"#,
            r#"{"sites":[{"kind":"nv_electron","axis":[0,0,2]}],"probe_site":0}"#,
            r#"{"sites":[{"kind":"nv_electron","axis":[0,0,1]}],"probe_site":3}"#,
            r#"{"sites":[{"kind":"c13","axis":[0,0,1],"zfs":{}},{"kind":"nv_electron","axis":[0,0,1]}],"probe_site":1}"#,
            r#"{"sites":[{"kind":"nv_electron","axis":[0,0,1]}],"couplings":[{"site_a":0,"site_b":0,"tensor":{"principal":[[1,0,0],[0,1,0],[0,0,0]],"axis":[0,0,1]}}],"probe_site":0}"#,
            r#"{"sites":[{"kind":"nv_electron","axis":[0,0,1],"color":"red"}],"probe_site":0}"#,
            r#"not json"#,
        ];
        for c in cases {
            assert!(SpinSystemSpec::from_json(c).is_err(), "{c}");
        }
    }

    #[test]
    fn dimension_cap_enforced() {
        let sites = vec![SiteSpec::nv(AxisOrientation::Z); 7];
        assert_eq!(SpinSystemSpec::new(sites, vec![], 0), Err(Error::DimensionCap { dim: 2187, cap: 1024 }));
    }
}
