use serde::{Deserialize, Serialize};

use crate::linalg::{Mat3, Vec3};
use crate::{math, Error, Result};

/// Tolerance on |axis| − 1.
pub const AXIS_TOL: f64 = 1e-12;
/// Tolerance on tensor asymmetry, MHz.
pub const SYMMETRY_TOL: f64 = 1e-12;

/// A unit direction in the lab frame (lab z ∥ applied field ∥ one ⟨111⟩ axis).
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "[f64; 3]", into = "[f64; 3]")]
pub struct AxisOrientation(Vec3);

impl AxisOrientation {
    /// Lab z, the on-axis NV direction.
    pub const Z: AxisOrientation = AxisOrientation(Vec3::Z);

    /// Validate a unit vector.
    pub fn new(x: f64, y: f64, z: f64) -> Result<Self> {
        let v = Vec3::new(x, y, z);
        if !((v.norm() - 1.0).abs() <= AXIS_TOL) {
            return Err(Error::NonUnitAxis(x, y, z));
        }
        Ok(AxisOrientation(v))
    }

    /// Normalise an arbitrary non-zero vector.
    pub fn from_direction(v: Vec3) -> Result<Self> {
        let n = v.norm();
        if !(n > 0.0) || !n.is_finite() {
            return Err(Error::NonUnitAxis(v[0], v[1], v[2]));
        }
        Ok(AxisOrientation(v.normalized()))
    }

    /// Axis at polar angle θ (cos θ given) and azimuth 0: (sin θ, 0, cos θ).
    pub fn from_polar_cos(cos_theta: f64) -> Result<Self> {
        if !(-1.0..=1.0).contains(&cos_theta) {
            return Err(Error::InvalidParameter("cos θ outside [-1, 1]".into()));
        }
        Ok(AxisOrientation(Vec3::new(math::sqrt(1.0 - cos_theta * cos_theta), 0.0, cos_theta)))
    }

    /// Off-axis ⟨111⟩ direction with cos θ = −1/3 at azimuth 0.
    pub fn off_axis() -> Self {
        AxisOrientation(Vec3::new(math::sqrt(8.0 / 9.0), 0.0, -1.0 / 3.0))
    }

    /// The four ⟨111⟩ classes: lab z, then the three off-axis directions at
    /// azimuths 0°, 120° and 240°.
    pub fn tetrahedral(index: usize) -> Self {
        let s = math::sqrt(8.0 / 9.0);
        match index % 4 {
            0 => Self::Z,
            1 => AxisOrientation(Vec3::new(s, 0.0, -1.0 / 3.0)),
            2 => AxisOrientation(Vec3::new(-0.5 * s, 0.5 * math::sqrt(3.0) * s, -1.0 / 3.0)),
            _ => AxisOrientation(Vec3::new(-0.5 * s, -0.5 * math::sqrt(3.0) * s, -1.0 / 3.0)),
        }
    }

    /// Underlying vector.
    pub fn vector(&self) -> Vec3 {
        self.0
    }

    /// Rotation taking lab z onto this axis.
    pub fn rotation(&self) -> Mat3 {
        Mat3::rotation_from_z(self.0)
    }
}

impl TryFrom<[f64; 3]> for AxisOrientation {
    type Error = Error;
    fn try_from(v: [f64; 3]) -> Result<Self> {
        AxisOrientation::new(v[0], v[1], v[2])
    }
}

impl From<AxisOrientation> for [f64; 3] {
    fn from(a: AxisOrientation) -> [f64; 3] {
        a.0 .0
    }
}

/// A real symmetric 3×3 interaction, given in its principal frame, plus the
/// lab direction of the principal z axis.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "TensorDoc", into = "TensorDoc")]
pub struct InteractionTensor {
    matrix: Mat3,
    principal_axis: AxisOrientation,
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct TensorDoc {
    principal: [[f64; 3]; 3],
    axis: AxisOrientation,
}

impl TryFrom<TensorDoc> for InteractionTensor {
    type Error = Error;
    fn try_from(d: TensorDoc) -> Result<Self> {
        InteractionTensor::new(Mat3(d.principal), d.axis)
    }
}

impl From<InteractionTensor> for TensorDoc {
    fn from(t: InteractionTensor) -> TensorDoc {
        TensorDoc { principal: t.matrix.0, axis: t.principal_axis }
    }
}

impl InteractionTensor {
    /// General principal-frame tensor; must be symmetric within 1e-12 MHz.
    pub fn new(matrix: Mat3, principal_axis: AxisOrientation) -> Result<Self> {
        if !(matrix.asymmetry() <= SYMMETRY_TOL) {
            return Err(Error::MalformedSpec("interaction tensor is not symmetric".into()));
        }
        Ok(InteractionTensor { matrix, principal_axis })
    }

    /// Axial tensor diag(A⊥, A⊥, A∥) with A∥ along `axis`.
    pub fn axial(perpendicular: f64, parallel: f64, axis: AxisOrientation) -> Self {
        InteractionTensor { matrix: Mat3::diag(perpendicular, perpendicular, parallel), principal_axis: axis }
    }

    /// Traceless axial quadrupole diag(−P/3, −P/3, 2P/3); I·Q·I then equals
    /// P[(n·I)² − I(I+1)/3].
    pub fn quadrupole(p: f64, axis: AxisOrientation) -> Self {
        Self::axial(-p / 3.0, 2.0 * p / 3.0, axis)
    }

    /// Lab-frame diagonal tensor (principal axis = lab z).
    pub fn lab_diagonal(xx: f64, yy: f64, zz: f64) -> Self {
        InteractionTensor { matrix: Mat3::diag(xx, yy, zz), principal_axis: AxisOrientation::Z }
    }

    /// Principal-frame matrix.
    pub fn principal(&self) -> &Mat3 {
        &self.matrix
    }

    /// Principal z axis in the lab frame.
    pub fn axis(&self) -> AxisOrientation {
        self.principal_axis
    }

    /// Same tensor with every element multiplied by `s`.
    pub fn scaled(&self, s: f64) -> Self {
        let mut m = self.matrix;
        for row in m.0.iter_mut() {
            for v in row.iter_mut() {
                *v *= s;
            }
        }
        InteractionTensor { matrix: m, principal_axis: self.principal_axis }
    }

    /// Lab-frame matrix R·T·Rᵀ.
    pub fn lab(&self) -> Mat3 {
        rotate_tensor(self)
    }
}

/// Express a principal-frame tensor in the lab frame: R·T·Rᵀ with R the
/// rotation carrying lab z onto the principal axis.
pub fn rotate_tensor(t: &InteractionTensor) -> Mat3 {
    let r = t.principal_axis.rotation();
    r.matmul(&t.matrix).matmul(&r.transpose())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn identity_rotation_for_lab_z() {
        let t = InteractionTensor::axial(81.3, 81.3, AxisOrientation::Z);
        let m = InteractionTensor::new(Mat3([[1.0, 2.0, 3.0], [2.0, 4.0, 5.0], [3.0, 5.0, 6.0]]), AxisOrientation::Z)
            .unwrap();
        assert_eq!(rotate_tensor(&m), *m.principal());
        assert_eq!(rotate_tensor(&t), *t.principal());
    }

    #[test]
    fn p1_hyperfine_zz_on_off_axis() {
        // zz = A⊥ sin²θ + A∥ cos²θ with cos θ = -1/3
        let t = InteractionTensor::axial(81.3, 114.0, AxisOrientation::off_axis());
        let zz = rotate_tensor(&t)[(2, 2)];
        let expected = 81.3 * 8.0 / 9.0 + 114.0 / 9.0;
        assert!((zz - expected).abs() < 1e-12);
        assert!((zz - 84.93).abs() < 0.005);
    }

    #[test]
    fn tetrahedral_axes_meet_at_minus_one_third() {
        for i in 0..4 {
            for j in 0..4 {
                let c = AxisOrientation::tetrahedral(i).vector().dot(AxisOrientation::tetrahedral(j).vector());
                let e = if i == j { 1.0 } else { -1.0 / 3.0 };
                assert!((c - e).abs() < 1e-14, "{i} {j} {c}");
            }
        }
    }

    #[test]
    fn non_unit_axis_rejected() {
        assert!(matches!(AxisOrientation::new(1.0, 1.0, 0.0), Err(Error::NonUnitAxis(..))));
        assert!(AxisOrientation::new(0.6, 0.0, 0.8).is_ok());
    }
}
