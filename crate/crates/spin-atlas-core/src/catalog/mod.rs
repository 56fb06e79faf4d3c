//! Preset spin clusters with the features they are known to produce.
//!
//! Every entry is stored as a JSON spec file in the `catalog/` directory of
//! this crate, using the same schema as [`SpinSystemSpec::from_json`].

use alloc::string::ToString;
use alloc::vec::Vec;

use serde::{Deserialize, Serialize};

use crate::spin::SpinSystemSpec;
use crate::sweep::{Analysis, CrossingKind};
use crate::{Error, Result};

/// How an expected feature is compared with an analysis.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Check {
    /// Some line lies in the window.
    Line,
    /// Some feature center lies in the window.
    Center,
    /// Some feature has its center in [low, high] and its whole span inside
    /// the window.
    Span,
}

/// A feature (or band) a catalog system should produce at 300 K.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ExpectedFeature {
    /// Lower edge of the reported position, G.
    pub low: f64,
    /// Upper edge (equal to `low` for a single position), G.
    pub high: f64,
    /// Allowed deviation beyond the edges, G.
    pub tolerance: f64,
    /// Required crossing character of the matching line, if any.
    pub kind: Option<CrossingKind>,
    /// Comparison rule.
    pub check: Check,
}

impl ExpectedFeature {
    const fn at(center: f64, tolerance: f64, check: Check) -> Self {
        ExpectedFeature { low: center, high: center, tolerance, kind: None, check }
    }

    const fn band(low: f64, high: f64, tolerance: f64, check: Check) -> Self {
        ExpectedFeature { low, high, tolerance, kind: None, check }
    }

    const fn of_kind(mut self, kind: CrossingKind) -> Self {
        self.kind = Some(kind);
        self
    }

    /// Midpoint of the reported position.
    pub fn center(&self) -> f64 {
        0.5 * (self.low + self.high)
    }

    /// Accepted field window.
    pub fn window(&self) -> (f64, f64) {
        (self.low - self.tolerance, self.high + self.tolerance)
    }

    fn inside(&self, b: f64) -> bool {
        let (lo, hi) = self.window();
        (lo..=hi).contains(&b)
    }

    /// Field of the best match in `a`, if any: the candidate nearest the
    /// reported position.
    pub fn find(&self, a: &Analysis) -> Option<f64> {
        let c = self.center();
        let nearest = |it: &mut dyn Iterator<Item = f64>| it.min_by(|x, y| (x - c).abs().total_cmp(&(y - c).abs()));
        match self.check {
            Check::Line => nearest(
                &mut a
                    .lines
                    .iter()
                    .filter(|l| self.kind.is_none_or(|k| k == l.kind) && self.inside(l.field))
                    .map(|l| l.field),
            ),
            Check::Center => nearest(&mut a.features.iter().map(|f| f.center).filter(|&x| self.inside(x))),
            Check::Span => nearest(
                &mut a
                    .features
                    .iter()
                    .filter(|f| {
                        (self.low..=self.high).contains(&f.center) && self.inside(f.span.0) && self.inside(f.span.1)
                    })
                    .map(|f| f.center),
            ),
        }
    }
}

/// A catalog system.
#[derive(Debug, Clone, PartialEq)]
pub struct CatalogEntry {
    /// Identifier used on the command line.
    pub id: &'static str,
    /// One-line description.
    pub description: &'static str,
    /// Physical origin of the expected features.
    pub origin: &'static str,
    /// The cluster.
    pub spec: SpinSystemSpec,
    /// Features a 0–1100 G sweep at 300 K should contain.
    pub expected_features: Vec<ExpectedFeature>,
}

struct Preset {
    id: &'static str,
    description: &'static str,
    origin: &'static str,
    json: &'static str,
    expected: &'static [ExpectedFeature],
}

use Check::{Center, Line, Span};
use CrossingKind::{Avoided, True};

macro_rules! spec_file {
    ($name:literal) => {
        include_str!(concat!(env!("CARGO_MANIFEST_DIR"), "/catalog/", $name, ".json"))
    };
}

const PRESETS: &[Preset] = &[
    Preset {
        id: "nv",
        description: "Single NV along the field",
        origin: "ground-state level anti-crossing at D/γe",
        json: spec_file!("nv"),
        expected: &[ExpectedFeature::at(1024.0, 2.0, Center)],
    },
    Preset {
        id: "nv-nv",
        description: "On-axis NV coupled to an off-axis NV",
        origin: "NV-NV flip-flops at zero field and 591 G, plus the GSLAC",
        json: spec_file!("nv-nv"),
        expected: &[
            ExpectedFeature::at(0.0, 2.0, Line),
            ExpectedFeature::at(591.0, 2.0, Center),
            ExpectedFeature::at(1024.0, 2.0, Center),
        ],
    },
    Preset {
        id: "nv-p1",
        description: "On-axis NV coupled to a P1 center",
        origin: "NV |0>↔|−1> resonant with the P1 electron at D/2γe; hyperfine-split lines near the GSLAC",
        json: spec_file!("nv-p1"),
        expected: &[ExpectedFeature::at(512.0, 2.0, Center), ExpectedFeature::at(1024.0, 8.0, Center)],
    },
    Preset {
        id: "nv-2p1",
        description: "On-axis NV coupled to two P1 centers",
        origin: "NV flip against a double P1 flip at D/3γe, split by the 14N hyperfine states",
        json: spec_file!("nv-2p1"),
        expected: &[ExpectedFeature::band(314.0, 368.0, 4.0, Span), ExpectedFeature::at(342.0, 8.0, Center)],
    },
    Preset {
        id: "nv-3p1",
        description: "On-axis NV coupled to three P1 centers",
        origin: "NV flip against a triple P1 flip at D/4γe",
        json: spec_file!("nv-3p1"),
        expected: &[ExpectedFeature::at(257.0, 8.0, Center)],
    },
    Preset {
        id: "onv-2p1",
        description: "Off-axis NV coupled to two P1 centers",
        origin: "off-axis NV transition against a double P1 flip; nine hyperfine lines",
        json: spec_file!("onv-2p1"),
        expected: &[ExpectedFeature::at(591.0, 2.0, Line)],
    },
    Preset {
        id: "onv-3p1",
        description: "Off-axis NV coupled to three P1 centers",
        origin: "off-axis NV transitions against a triple P1 flip",
        json: spec_file!("onv-3p1"),
        expected: &[ExpectedFeature::at(347.0, 8.0, Center), ExpectedFeature::at(497.0, 8.0, Center)],
    },
    Preset {
        id: "2nv-13c",
        description: "Two on-axis NVs, one with a first-shell 13C",
        origin: "NV-NV flip-flops detuned by the 13C hyperfine interaction",
        json: spec_file!("2nv-13c"),
        expected: &[
            ExpectedFeature::at(329.0, 5.0, Line),
            ExpectedFeature::at(355.0, 5.0, Line),
            ExpectedFeature::at(879.0, 5.0, Line).of_kind(True),
            ExpectedFeature::band(952.0, 956.0, 2.0, Line).of_kind(Avoided),
            ExpectedFeature::at(954.0, 8.0, Center),
            ExpectedFeature::at(1.0, 2.0, Line),
        ],
    },
    Preset {
        id: "nv-onv-13c",
        description: "On-axis NV with a first-shell 13C coupled to an off-axis NV",
        origin: "hyperfine-split NV-NV resonances",
        json: spec_file!("nv-onv-13c"),
        expected: &[
            ExpectedFeature::band(4.0, 7.0, 5.0, Line),
            ExpectedFeature::band(29.0, 32.0, 5.0, Line),
            ExpectedFeature::band(551.0, 556.0, 5.0, Line),
            ExpectedFeature::at(584.0, 5.0, Line),
            ExpectedFeature::at(606.0, 5.0, Line),
            ExpectedFeature::band(636.0, 642.0, 5.0, Line),
            ExpectedFeature::at(1005.0, 5.0, Line),
            ExpectedFeature::at(1048.0, 5.0, Line),
        ],
    },
    Preset {
        id: "2onv-13c",
        description: "Two off-axis NVs, one with a first-shell 13C",
        origin: "intra-branch crossings of the hyperfine-split off-axis NV pair",
        json: spec_file!("2onv-13c"),
        expected: &[
            ExpectedFeature::band(24.0, 34.0, 8.0, Line),
            ExpectedFeature::at(501.0, 5.0, Line),
            ExpectedFeature::at(572.0, 5.0, Line),
            ExpectedFeature::at(700.0, 5.0, Line),
        ],
    },
    Preset {
        id: "nv-onv-p1",
        description: "On-axis and off-axis NV sharing a P1 center",
        origin: "three-body NV-NV-P1 resonances",
        json: spec_file!("nv-onv-p1"),
        expected: &[
            ExpectedFeature::band(0.0, 96.0, 8.0, Line),
            ExpectedFeature::band(332.0, 342.0, 8.0, Line),
            ExpectedFeature::band(365.0, 394.0, 8.0, Line),
            ExpectedFeature::band(492.0, 502.0, 8.0, Line),
            ExpectedFeature::band(795.0, 868.0, 8.0, Line),
        ],
    },
    Preset {
        id: "2onv-p1",
        description: "Two off-axis NVs sharing a P1 center",
        origin: "off-axis NV pair against a P1 flip; five hyperfine lines",
        json: spec_file!("2onv-p1"),
        expected: &[
            ExpectedFeature::at(695.0, 3.0, Line),
            ExpectedFeature::at(714.0, 3.0, Line),
            ExpectedFeature::at(732.0, 3.0, Line),
            ExpectedFeature::at(750.0, 3.0, Line),
            ExpectedFeature::at(769.0, 3.0, Line),
            ExpectedFeature::at(732.0, 8.0, Center),
        ],
    },
    Preset {
        id: "nv-13c",
        description: "Single on-axis NV with a first-shell 13C",
        origin: "13C hyperfine structure of the GSLAC",
        json: spec_file!("nv-13c"),
        expected: &[ExpectedFeature::at(1024.0, 8.0, Center)],
    },
];

/// Alternative names.
const ALIASES: &[(&str, &str)] = &[("nv-nv-13c", "2nv-13c")];

/// `(id, description)` of every system, in a fixed order.
pub fn list_systems() -> Vec<(&'static str, &'static str)> {
    PRESETS.iter().map(|p| (p.id, p.description)).collect()
}

/// Identifiers accepted by [`get_system`], aliases included.
pub fn known_ids() -> Vec<&'static str> {
    PRESETS.iter().map(|p| p.id).chain(ALIASES.iter().map(|a| a.0)).collect()
}

/// Load a system by id or alias.
pub fn get_system(id: &str) -> Result<CatalogEntry> {
    let id = ALIASES.iter().find(|a| a.0 == id).map_or(id, |a| a.1);
    let p = PRESETS.iter().find(|p| p.id == id).ok_or_else(|| Error::UnknownSystem {
        id: id.to_string(),
        available: known_ids().join(", "),
    })?;
    Ok(CatalogEntry {
        id: p.id,
        description: p.description,
        origin: p.origin,
        spec: SpinSystemSpec::from_json(p.json)?,
        expected_features: p.expected.to_vec(),
    })
}

/// Raw JSON of a system's spec file.
pub fn spec_json(id: &str) -> Option<&'static str> {
    let id = ALIASES.iter().find(|a| a.0 == id).map_or(id, |a| a.1);
    PRESETS.iter().find(|p| p.id == id).map(|p| p.json)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn ids_unique_and_loadable() {
        let ids = list_systems();
        assert!(ids.len() >= 13);
        for (i, (id, _)) in ids.iter().enumerate() {
            assert!(ids[..i].iter().all(|(o, _)| o != id));
            let e = get_system(id).unwrap();
            for f in &e.expected_features {
                assert!(f.low >= 0.0 && f.high <= 1100.0 && f.low <= f.high);
            }
        }
        assert_eq!(get_system("nv-nv-13c").unwrap().id, "2nv-13c");
    }

    #[test]
    fn unknown_id_lists_available() {
        match get_system("nv-9p1") {
            Err(Error::UnknownSystem { available, .. }) => assert!(available.contains("2onv-p1")),
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn dimensions() {
        let dim = |id| get_system(id).unwrap().spec.dimension();
        assert_eq!(dim("nv"), 3);
        assert_eq!(dim("nv-p1"), 18);
        assert_eq!(dim("2onv-p1"), 54);
        assert_eq!(dim("nv-3p1"), 648);
        assert_eq!(dim("2nv-13c"), 18);
    }
}
