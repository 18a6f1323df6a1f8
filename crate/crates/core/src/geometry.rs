//! Vector math and pointing conventions for the room model.
//!
//! The frame has its origin at a floor corner, the floor spanning the x–y
//! plane and z pointing up. Azimuth is measured in the floor plane from +x
//! towards +y; elevation is measured from the horizontal plane.

use std::ops::{Add, AddAssign, Div, Mul, Neg, Sub};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// A point or direction in metres (directions are dimensionless).
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
#[serde(from = "[f64; 3]", into = "[f64; 3]")]
pub struct Vec3 {
    pub x: f64,
    pub y: f64,
    pub z: f64,
}

impl Vec3 {
    pub const ZERO: Vec3 = Vec3::new(0.0, 0.0, 0.0);
    pub const X: Vec3 = Vec3::new(1.0, 0.0, 0.0);
    pub const Y: Vec3 = Vec3::new(0.0, 1.0, 0.0);
    pub const Z: Vec3 = Vec3::new(0.0, 0.0, 1.0);

    pub const fn new(x: f64, y: f64, z: f64) -> Self {
        Vec3 { x, y, z }
    }

    pub fn dot(self, other: Vec3) -> f64 {
        self.x * other.x + self.y * other.y + self.z * other.z
    }

    pub fn cross(self, other: Vec3) -> Vec3 {
        Vec3::new(
            self.y * other.z - self.z * other.y,
            self.z * other.x - self.x * other.z,
            self.x * other.y - self.y * other.x,
        )
    }

    pub fn norm(self) -> f64 {
        self.dot(self).sqrt()
    }

    pub fn distance(self, other: Vec3) -> f64 {
        (self - other).norm()
    }

    /// Unit vector along `self`, or `None` for the zero vector.
    pub fn normalized(self) -> Option<Vec3> {
        let n = self.norm();
        if n > 0.0 && n.is_finite() {
            Some(self / n)
        } else {
            None
        }
    }

    pub fn is_finite(self) -> bool {
        self.x.is_finite() && self.y.is_finite() && self.z.is_finite()
    }
}

impl From<[f64; 3]> for Vec3 {
    fn from(a: [f64; 3]) -> Self {
        Vec3::new(a[0], a[1], a[2])
    }
}

impl From<Vec3> for [f64; 3] {
    fn from(v: Vec3) -> Self {
        [v.x, v.y, v.z]
    }
}

impl Add for Vec3 {
    type Output = Vec3;
    fn add(self, o: Vec3) -> Vec3 {
        Vec3::new(self.x + o.x, self.y + o.y, self.z + o.z)
    }
}

impl AddAssign for Vec3 {
    fn add_assign(&mut self, o: Vec3) {
        *self = *self + o;
    }
}

impl Sub for Vec3 {
    type Output = Vec3;
    fn sub(self, o: Vec3) -> Vec3 {
        Vec3::new(self.x - o.x, self.y - o.y, self.z - o.z)
    }
}

impl Mul<f64> for Vec3 {
    type Output = Vec3;
    fn mul(self, s: f64) -> Vec3 {
        Vec3::new(self.x * s, self.y * s, self.z * s)
    }
}

impl Mul<Vec3> for f64 {
    type Output = Vec3;
    fn mul(self, v: Vec3) -> Vec3 {
        v * self
    }
}

impl Div<f64> for Vec3 {
    type Output = Vec3;
    fn div(self, s: f64) -> Vec3 {
        Vec3::new(self.x / s, self.y / s, self.z / s)
    }
}

impl Neg for Vec3 {
    type Output = Vec3;
    fn neg(self) -> Vec3 {
        Vec3::new(-self.x, -self.y, -self.z)
    }
}

/// Which hemisphere a pointing angle refers to.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Facing {
    /// Ceiling-mounted transmitter branches look down.
    Down,
    /// Floor receivers look up.
    Up,
}

/// Azimuth/elevation pointing in degrees.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Orientation {
    pub azimuth_deg: f64,
    pub elevation_deg: f64,
}

impl Orientation {
    pub fn new(azimuth_deg: f64, elevation_deg: f64) -> Result<Self> {
        let o = Orientation {
            azimuth_deg,
            elevation_deg,
        };
        o.validate("orientation")?;
        Ok(o)
    }

    pub fn validate(&self, path: &str) -> Result<()> {
        if !(0.0..360.0).contains(&self.azimuth_deg) {
            return Err(Error::validation(
                format!("{path}.azimuth_deg"),
                "must lie in [0, 360)",
            ));
        }
        if !(0.0..=90.0).contains(&self.elevation_deg) {
            return Err(Error::validation(
                format!("{path}.elevation_deg"),
                "must lie in [0, 90]",
            ));
        }
        Ok(())
    }
}

pub fn direction_from_orientation(o: Orientation, facing: Facing) -> Vec3 {
    let (sa, ca) = o.azimuth_deg.to_radians().sin_cos();
    let (se, ce) = o.elevation_deg.to_radians().sin_cos();
    let z = match facing {
        Facing::Down => -se,
        Facing::Up => se,
    };
    Vec3::new(ce * ca, ce * sa, z)
}

/// Inverse of [`direction_from_orientation`] for a unit direction. The
/// azimuth is undefined at the poles and is reported as 0 there.
pub fn orientation_from_direction(d: Vec3) -> (Orientation, Facing) {
    let facing = if d.z < 0.0 { Facing::Down } else { Facing::Up };
    let horizontal = d.x.hypot(d.y);
    let elevation = d.z.abs().atan2(horizontal).to_degrees();
    let mut azimuth = if horizontal == 0.0 {
        0.0
    } else {
        d.y.atan2(d.x).to_degrees()
    };
    if azimuth < 0.0 {
        azimuth += 360.0;
    }
    if azimuth >= 360.0 {
        azimuth -= 360.0;
    }
    (
        Orientation {
            azimuth_deg: azimuth,
            elevation_deg: elevation,
        },
        facing,
    )
}

/// Mirror `incident` about the plane with unit normal `normal`.
pub fn specular_reflect(incident: Vec3, normal: Vec3) -> Vec3 {
    incident - normal * (2.0 * incident.dot(normal))
}

/// Mirror normal that sends a ray from `ap_pos` through `mirror_center` on to
/// `user_pos`: the normalized difference of the outgoing and incoming unit
/// directions.
pub fn steer_mirror(ap_pos: Vec3, mirror_center: Vec3, user_pos: Vec3) -> Result<Vec3> {
    let u_in = (mirror_center - ap_pos)
        .normalized()
        .ok_or(Error::DegenerateSteering)?;
    let u_out = (user_pos - mirror_center)
        .normalized()
        .ok_or(Error::DegenerateSteering)?;
    steer_between(u_in, u_out)
}

/// Bisector normal for unit incoming and outgoing directions.
pub fn steer_between(u_in: Vec3, u_out: Vec3) -> Result<Vec3> {
    let diff = u_out - u_in;
    if diff.norm() < 1e-12 {
        return Err(Error::DegenerateSteering);
    }
    diff.normalized().ok_or(Error::DegenerateSteering)
}

/// Angle between a ray arriving at a surface and the surface normal, in
/// radians. Rays hitting the back of the surface give angles above π/2.
pub fn incidence_angle(ray_dir: Vec3, surface_normal: Vec3) -> f64 {
    (-ray_dir.dot(surface_normal)).clamp(-1.0, 1.0).acos()
}

/// Binary field-of-view gate, inclusive at the boundary.
pub fn fov_gate(incidence: f64, fov_half_angle: f64) -> f64 {
    if incidence <= fov_half_angle {
        1.0
    } else {
        0.0
    }
}

/// Slack on the FOV comparison for `acos` rounding at the exact boundary.
pub(crate) const FOV_EPS: f64 = 1e-12;

pub(crate) fn within_fov(ray_dir: Vec3, surface_normal: Vec3, fov_half_angle: f64) -> bool {
    fov_gate(
        incidence_angle(ray_dir, surface_normal),
        fov_half_angle + FOV_EPS,
    ) > 0.0
}

/// Axis-aligned room box `[0, width] × [0, length] × [0, height]`, metres.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Room {
    pub width: f64,
    pub length: f64,
    pub height: f64,
}

impl Room {
    pub fn contains(&self, p: Vec3) -> bool {
        const EPS: f64 = 1e-9;
        p.is_finite()
            && (-EPS..=self.width + EPS).contains(&p.x)
            && (-EPS..=self.length + EPS).contains(&p.y)
            && (-EPS..=self.height + EPS).contains(&p.z)
    }

    pub fn check(&self, p: Vec3) -> Result<()> {
        if self.contains(p) {
            Ok(())
        } else {
            Err(Error::OutOfBounds {
                x: p.x,
                y: p.y,
                z: p.z,
            })
        }
    }
}

impl Default for Room {
    fn default() -> Self {
        Room {
            width: 5.0,
            length: 5.0,
            height: 3.0,
        }
    }
}

/// One rotational mirror of the IRS wall.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MirrorElement {
    pub center: Vec3,
    pub normal: Vec3,
    pub width: f64,
    pub height: f64,
    pub reflectivity: f64,
}

impl MirrorElement {
    pub fn new(
        center: Vec3,
        normal: Vec3,
        width: f64,
        height: f64,
        reflectivity: f64,
    ) -> Result<Self> {
        let m = MirrorElement {
            center,
            normal,
            width,
            height,
            reflectivity,
        };
        m.validate()?;
        Ok(m)
    }

    pub fn validate(&self) -> Result<()> {
        if (self.normal.norm() - 1.0).abs() > 1e-9 {
            return Err(Error::validation("mirror.normal", "must have unit norm"));
        }
        if !(0.0..=1.0).contains(&self.reflectivity) {
            return Err(Error::validation(
                "mirror.reflectivity",
                "must lie in [0, 1]",
            ));
        }
        if !(self.width > 0.0) || !(self.height > 0.0) {
            return Err(Error::validation(
                "mirror.size",
                "width and height must be > 0",
            ));
        }
        Ok(())
    }

    /// Copy of this element rotated to `normal`.
    pub fn with_normal(&self, normal: Vec3) -> MirrorElement {
        MirrorElement { normal, ..*self }
    }

    /// In-plane unit axes `(width_axis, height_axis)`. The width axis stays
    /// horizontal unless the mirror faces straight up or down.
    pub fn axes(&self) -> (Vec3, Vec3) {
        let u = Vec3::Z.cross(self.normal).normalized().unwrap_or(Vec3::X);
        let v = self.normal.cross(u);
        (u, v)
    }

    pub fn faces(&self, inward: Vec3) -> bool {
        self.normal.dot(inward) > 0.0
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;
    use proptest::prelude::*;
    use std::f64::consts::PI;

    fn close(a: Vec3, b: Vec3, tol: f64) -> bool {
        (a - b).norm() <= tol
    }

    #[test]
    fn orientation_examples() {
        let d = direction_from_orientation(Orientation::new(0.0, 90.0).unwrap(), Facing::Down);
        assert!(close(d, Vec3::new(0.0, 0.0, -1.0), 1e-12));
        let d = direction_from_orientation(Orientation::new(0.0, 60.0).unwrap(), Facing::Down);
        assert!(close(
            d,
            Vec3::new(0.5, 0.0, -0.866_025_403_784_438_6),
            1e-12
        ));
        let d = direction_from_orientation(Orientation::new(90.0, 60.0).unwrap(), Facing::Up);
        assert!(close(
            d,
            Vec3::new(0.0, 0.5, 0.866_025_403_784_438_6),
            1e-12
        ));
    }

    #[test]
    fn orientation_ranges_rejected() {
        assert!(Orientation::new(360.0, 10.0).is_err());
        assert!(Orientation::new(-1.0, 10.0).is_err());
        assert!(Orientation::new(10.0, 90.5).is_err());
        assert!(Orientation::new(359.9, 0.0).is_ok());
    }

    #[test]
    fn reflect_examples() {
        let n = Vec3::Z;
        assert!(close(specular_reflect(-Vec3::Z, n), Vec3::Z, 1e-15));
        let s = std::f64::consts::FRAC_1_SQRT_2;
        assert!(close(
            specular_reflect(Vec3::new(s, 0.0, -s), n),
            Vec3::new(s, 0.0, s),
            1e-15
        ));
        assert!(close(
            specular_reflect(Vec3::new(0.6, 0.0, -0.8), n),
            Vec3::new(0.6, 0.0, 0.8),
            1e-15
        ));
    }

    #[test]
    fn steering_examples() {
        let n = steer_between(Vec3::Y, -Vec3::Y).unwrap();
        assert!(close(n, -Vec3::Y, 1e-15));

        let ap = Vec3::new(2.5, 2.5, 3.0);
        let m = Vec3::new(2.5, 5.0, 1.5);
        let user = Vec3::new(2.5, 0.0, 0.5);
        let n = steer_mirror(ap, m, user).unwrap();
        assert_abs_diff_eq!(n.x, 0.0, epsilon = 1e-15);
        let u_in = (m - ap).normalized().unwrap();
        let u_out = (user - m).normalized().unwrap();
        assert!(close(specular_reflect(u_in, n), u_out, 1e-9));

        assert!(matches!(
            steer_between(Vec3::X, Vec3::X),
            Err(Error::DegenerateSteering)
        ));
        assert!(matches!(
            steer_mirror(Vec3::ZERO, Vec3::X, Vec3::new(2.0, 0.0, 0.0)),
            Err(Error::DegenerateSteering)
        ));
        assert!(steer_mirror(Vec3::ZERO, Vec3::ZERO, Vec3::X).is_err());
    }

    #[test]
    fn incidence_examples() {
        assert_abs_diff_eq!(incidence_angle(-Vec3::Z, Vec3::Z), 0.0);
        let s = std::f64::consts::FRAC_1_SQRT_2;
        assert_abs_diff_eq!(
            incidence_angle(Vec3::new(s, 0.0, -s), Vec3::Z),
            PI / 4.0,
            epsilon = 1e-12
        );
        assert_abs_diff_eq!(incidence_angle(Vec3::Z, Vec3::Z), PI);
    }

    #[test]
    fn fov_gate_is_inclusive() {
        let fov = 25f64.to_radians();
        assert_eq!(fov_gate(20f64.to_radians(), fov), 1.0);
        assert_eq!(fov_gate(25f64.to_radians(), fov), 1.0);
        assert_eq!(fov_gate(30f64.to_radians(), fov), 0.0);
    }

    #[test]
    fn mirror_validation() {
        assert!(MirrorElement::new(Vec3::ZERO, -Vec3::Y, 0.15, 0.1, 0.95).is_ok());
        assert!(
            MirrorElement::new(Vec3::ZERO, Vec3::new(0.0, -2.0, 0.0), 0.15, 0.1, 0.95).is_err()
        );
        assert!(MirrorElement::new(Vec3::ZERO, -Vec3::Y, 0.15, 0.1, 1.2).is_err());
        assert!(MirrorElement::new(Vec3::ZERO, -Vec3::Y, 0.0, 0.1, 0.5).is_err());
        let m = MirrorElement::new(Vec3::ZERO, -Vec3::Y, 0.15, 0.1, 0.95).unwrap();
        let (u, v) = m.axes();
        assert_abs_diff_eq!(u.z, 0.0);
        assert_abs_diff_eq!(u.dot(v), 0.0, epsilon = 1e-15);
        assert_abs_diff_eq!(v.dot(m.normal), 0.0, epsilon = 1e-15);
    }

    fn unit() -> impl Strategy<Value = Vec3> {
        (-1.0f64..1.0, -1.0f64..1.0, -1.0f64..1.0).prop_filter_map("zero", |(x, y, z)| {
            let v = Vec3::new(x, y, z);
            (v.norm() > 1e-3).then(|| v.normalized().unwrap())
        })
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(1000))]

        #[test]
        fn reflection_is_involutive_and_norm_preserving(v in unit(), n in unit()) {
            let r = specular_reflect(v, n);
            prop_assert!((r.norm() - 1.0).abs() < 1e-12);
            prop_assert!(close(specular_reflect(r, n), v, 1e-12));
            // tangential kept, normal flipped
            prop_assert!((r.dot(n) + v.dot(n)).abs() < 1e-12);
            let vt = v - n * v.dot(n);
            let rt = r - n * r.dot(n);
            prop_assert!(close(vt, rt, 1e-12));
        }

        #[test]
        fn steering_satisfies_reflection_law(u_in in unit(), u_out in unit()) {
            prop_assume!((u_out - u_in).norm() > 1e-3);
            let n = steer_between(u_in, u_out).unwrap();
            prop_assert!(close(specular_reflect(u_in, n), u_out, 1e-9));
        }

        #[test]
        fn orientation_round_trips(az in 0.0f64..360.0, el in 1e-3f64..89.999, up in any::<bool>()) {
            let facing = if up { Facing::Up } else { Facing::Down };
            let d = direction_from_orientation(Orientation { azimuth_deg: az, elevation_deg: el }, facing);
            prop_assert!((d.norm() - 1.0).abs() < 1e-12);
            let (o, f) = orientation_from_direction(d);
            prop_assert_eq!(f, facing);
            prop_assert!((o.elevation_deg - el).abs() < 1e-9);
            let daz = (o.azimuth_deg - az).rem_euclid(360.0);
            prop_assert!(daz.min(360.0 - daz) < 1e-9);
        }
    }
}
