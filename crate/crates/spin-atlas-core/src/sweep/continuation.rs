use alloc::vec::Vec;

use serde::{Deserialize, Serialize};

use super::{CrossingFeature, Engine, Executor, FieldRange, Prepared, SweepOptions};
use crate::eigen::EigenSolver;
use crate::spin::SpinSystemSpec;
use crate::thermal::ThermalZfsModel;
use crate::{Error, Result};

/// Temperature at which features are referenced, K.
pub const REFERENCE_TEMPERATURE: f64 = 300.0;

/// Half width of the central difference used for the slope, K.
pub const SLOPE_STEP: f64 = 5.0;

/// Field of a followed crossing and its level pair, once known.
type Anchor = (f64, Option<(usize, usize)>);

/// Grid spacing of the local re-detection window, G.
const LOCAL_STEP: f64 = 0.05;

/// Feature center at one temperature.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ShiftPoint {
    /// Temperature, K.
    pub t: f64,
    /// Center, G.
    pub center: f64,
    /// center − center at the reference temperature, G.
    pub delta_b: f64,
}

/// A feature followed through temperature.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TemperatureShift {
    /// Center at the reference temperature, G.
    pub reference_center: f64,
    /// One entry per requested temperature that was reached, ascending in T.
    pub points: Vec<ShiftPoint>,
    /// d(center)/dT at the reference temperature, G/K.
    pub slope_300k: Option<f64>,
    /// Temperatures at which the feature could no longer be found.
    pub lost_at: Vec<f64>,
}

impl TemperatureShift {
    /// True if the feature was followed over the whole grid.
    pub fn complete(&self) -> bool {
        self.lost_at.is_empty()
    }
}

impl<S: EigenSolver, X: Executor> Engine<S, X> {
    fn local_engine(&self) -> Engine<&S, &X> {
        let options = SweepOptions { resolution: self.options.continuation_resolution, ..self.options };
        Engine::new(&self.solver, &self.executor, options)
    }

    /// Position at temperature `t` of the crossing nearest `seed`, found by
    /// re-detecting within `seed ± continuation_window`.
    pub fn follow_line(&self, p: &Prepared, seed: f64, t: f64, model: &ThermalZfsModel) -> Result<Option<f64>> {
        Ok(self.follow(p, (seed, None), t, model)?.map(|a| a.0))
    }

    /// Like [`Engine::follow_line`], preferring a crossing of the same level
    /// pair. Lines bundle several crossings whose detection depends on the
    /// window, so a single crossing is the stable thing to follow.
    fn follow(&self, p: &Prepared, (seed, pair): Anchor, t: f64, model: &ThermalZfsModel) -> Result<Option<Anchor>> {
        let d = model.zfs_at(t)?;
        let w = self.options.continuation_window;
        let lo = (seed - w).max(0.0);
        let hi = seed + w;
        let points = (crate::math::round((hi - lo) / LOCAL_STEP) as usize).max(2) + 1;
        let local = self.local_engine();
        let a = local.analyze_prepared(p, FieldRange::new(lo, hi, points)?, t, d)?;
        let nearest = |same: bool| {
            a.events
                .iter()
                .filter(|e| !same || Some(e.levels) == pair)
                .min_by(|x, y| (x.field - seed).abs().total_cmp(&(y.field - seed).abs()))
                .map(|e| (e.field, Some(e.levels)))
        };
        Ok(nearest(true).or_else(|| nearest(false)))
    }

    /// Follow `feature` (located at 300 K) over `temps`.
    ///
    /// The crossing nearest the central line is re-located at each
    /// temperature (same level pair where possible), marching outward from
    /// 300 K and seeding each step with the previous position. When it
    /// cannot be found the march in that direction stops and the temperature
    /// is recorded in `lost_at`.
    pub fn temperature_shift(
        &self,
        spec: &SpinSystemSpec,
        feature: &CrossingFeature,
        temps: &[f64],
        model: &ThermalZfsModel,
    ) -> Result<TemperatureShift> {
        if let Some(&t) = temps.iter().find(|t| !(**t >= 0.0) || !t.is_finite()) {
            return Err(Error::InvalidTemperature(t));
        }
        let p = self.prepare(spec)?;
        let track = |seed: Anchor, t: f64| self.follow(&p, seed, t, model);
        let anchor = track((feature.central_line().field, None), REFERENCE_TEMPERATURE)?
            .ok_or_else(|| Error::InvalidParameter("feature not found at the reference temperature".into()))?;
        let reference = anchor.0;

        let mut lost_at = Vec::new();
        let slope = match (track(anchor, REFERENCE_TEMPERATURE + SLOPE_STEP)?, track(anchor, REFERENCE_TEMPERATURE - SLOPE_STEP)?) {
            (Some(up), Some(down)) => Some((up.0 - down.0) / (2.0 * SLOPE_STEP)),
            _ => None,
        };

        let mut sorted: Vec<f64> = temps.to_vec();
        sorted.sort_by(f64::total_cmp);
        sorted.dedup();
        let split = sorted.partition_point(|&t| t < REFERENCE_TEMPERATURE);
        let mut points = Vec::with_capacity(sorted.len());
        let mut march = |ts: &mut dyn Iterator<Item = f64>, out: &mut Vec<ShiftPoint>| -> Result<()> {
            let mut seed = anchor;
            for t in ts {
                match track(seed, t)? {
                    Some(c) => {
                        seed = c;
                        out.push(ShiftPoint { t, center: c.0, delta_b: c.0 - reference });
                    }
                    None => {
                        lost_at.push(t);
                        break;
                    }
                }
            }
            Ok(())
        };
        let mut below = Vec::new();
        march(&mut sorted[..split].iter().rev().copied(), &mut below)?;
        below.reverse();
        points.extend(below);
        march(&mut sorted[split..].iter().copied(), &mut points)?;
        lost_at.sort_by(f64::total_cmp);
        Ok(TemperatureShift { reference_center: reference, points, slope_300k: slope, lost_at })
    }
}
