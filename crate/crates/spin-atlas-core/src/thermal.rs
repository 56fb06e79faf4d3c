//! Temperature dependence of the NV ground-state zero-field splitting.
//!
//! D(T) = D0 + c1·n1(T) + c2·n2(T), with n_i the Bose occupation of an
//! effective phonon mode of energy Δ_i.

use serde::{Deserialize, Serialize};

use crate::{math, Error, Result};

/// Boltzmann constant, meV/K.
pub const BOLTZMANN_MEV_PER_K: f64 = 8.617333e-2;

/// Two-mode model parameters.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ThermalZfsModel {
    /// D at T = 0, MHz.
    pub d0: f64,
    /// Mode-1 coupling, MHz.
    pub c1: f64,
    /// Mode-2 coupling, MHz.
    pub c2: f64,
    /// Mode-1 energy, meV.
    pub delta1: f64,
    /// Mode-2 energy, meV.
    pub delta2: f64,
    /// k_B, meV/K.
    pub boltzmann: f64,
}

impl Default for ThermalZfsModel {
    fn default() -> Self {
        ThermalZfsModel {
            d0: 2877.6,
            c1: -54.91,
            c2: -249.6,
            delta1: 58.73,
            delta2: 145.5,
            boltzmann: BOLTZMANN_MEV_PER_K,
        }
    }
}

fn check_t(t: f64) -> Result<()> {
    if !(t >= 0.0) || !t.is_finite() {
        return Err(Error::InvalidTemperature(t));
    }
    Ok(())
}

/// Bose occupation 1/(exp(Δ/k_B T) − 1) using the default k_B; 0 at T = 0.
pub fn occupation(delta: f64, t: f64) -> Result<f64> {
    occupation_with(delta, t, BOLTZMANN_MEV_PER_K)
}

fn occupation_with(delta: f64, t: f64, kb: f64) -> Result<f64> {
    check_t(t)?;
    if !(delta > 0.0) {
        return Err(Error::InvalidParameter("mode energy must be positive".into()));
    }
    if t == 0.0 {
        return Ok(0.0);
    }
    Ok(1.0 / math::expm1(delta / (kb * t)))
}

fn occupation_slope(delta: f64, t: f64, kb: f64) -> f64 {
    let x = delta / (kb * t);
    let em1 = math::expm1(x);
    // dn/dT = (x/T) e^x / (e^x − 1)²; written to stay finite for large x
    (x / t) * (1.0 / em1) * ((em1 + 1.0) / em1)
}

impl ThermalZfsModel {
    /// Mode occupations (n1, n2) at `t`.
    pub fn occupations(&self, t: f64) -> Result<(f64, f64)> {
        Ok((occupation_with(self.delta1, t, self.boltzmann)?, occupation_with(self.delta2, t, self.boltzmann)?))
    }

    /// D(T), MHz.
    pub fn zfs_at(&self, t: f64) -> Result<f64> {
        let (n1, n2) = self.occupations(t)?;
        Ok(self.d0 + self.c1 * n1 + self.c2 * n2)
    }

    /// dD/dT, MHz/K. Rejects T = 0.
    pub fn zfs_slope(&self, t: f64) -> Result<f64> {
        check_t(t)?;
        if t == 0.0 {
            return Err(Error::InvalidTemperature(t));
        }
        Ok(self.c1 * occupation_slope(self.delta1, t, self.boltzmann)
            + self.c2 * occupation_slope(self.delta2, t, self.boltzmann))
    }
}

/// D(T) with `model`.
pub fn zfs_at(model: &ThermalZfsModel, t: f64) -> Result<f64> {
    model.zfs_at(t)
}

/// dD/dT with `model`.
pub fn zfs_slope(model: &ThermalZfsModel, t: f64) -> Result<f64> {
    model.zfs_slope(t)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn occupations_at_room_temperature() {
        assert_eq!(occupation(58.73, 0.0).unwrap(), 0.0);
        assert!((occupation(58.73, 300.0).unwrap() - 0.1150).abs() < 5e-5);
        assert!((occupation(145.5, 300.0).unwrap() - 3.608e-3).abs() < 5e-7);
        assert!(matches!(occupation(58.73, -1.0), Err(Error::InvalidTemperature(_))));
    }

    #[test]
    fn zfs_values() {
        let m = ThermalZfsModel::default();
        assert_eq!(m.zfs_at(0.0).unwrap(), m.d0);
        assert!((m.zfs_at(300.0).unwrap() - 2870.38).abs() < 0.01);
        assert!(m.zfs_at(100.0).unwrap() > m.zfs_at(300.0).unwrap());
        assert!((m.zfs_slope(300.0).unwrap() + 0.0703).abs() < 5e-5);
        assert!(m.zfs_slope(10.0).unwrap().abs() < 1e-4);
        assert!(m.zfs_slope(0.0).is_err());
    }
}
