//! Single-mode Gaussian beam propagation and aperture capture.

use std::f64::consts::{PI, SQRT_2};

use crate::error::{Error, Result};
use crate::geometry::{MirrorElement, Vec3};

/// One VCSEL beam.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GaussianBeam {
    /// Waist radius at the emitter (1/e² intensity), m.
    pub waist_w0: f64,
    /// m
    pub wavelength: f64,
    /// Optical power, W.
    pub power_pt: f64,
    pub origin: Vec3,
    /// Unit propagation direction.
    pub axis: Vec3,
}

impl GaussianBeam {
    pub fn new(
        waist_w0: f64,
        wavelength: f64,
        power_pt: f64,
        origin: Vec3,
        axis: Vec3,
    ) -> Result<Self> {
        let b = GaussianBeam {
            waist_w0,
            wavelength,
            power_pt,
            origin,
            axis,
        };
        b.validate()?;
        Ok(b)
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.waist_w0 > 0.0) {
            return Err(Error::validation("beam.waist_w0", "must be > 0"));
        }
        if !(self.wavelength > 0.0) {
            return Err(Error::validation("beam.wavelength", "must be > 0"));
        }
        if !(self.power_pt >= 0.0) {
            return Err(Error::validation("beam.power_pt", "must be >= 0"));
        }
        if (self.axis.norm() - 1.0).abs() > 1e-9 {
            return Err(Error::validation("beam.axis", "must have unit norm"));
        }
        Ok(())
    }

    /// Same beam re-pointed from `origin` at `target`.
    pub fn aimed(&self, origin: Vec3, target: Vec3) -> Option<GaussianBeam> {
        let axis = (target - origin).normalized()?;
        Some(GaussianBeam {
            origin,
            axis,
            ..*self
        })
    }

    pub fn rayleigh_range(&self) -> f64 {
        PI * self.waist_w0 * self.waist_w0 / self.wavelength
    }

    /// Beam radius W_d at distance `d` from the waist.
    pub fn waist_at(&self, d: f64) -> f64 {
        let ratio = d / self.rayleigh_range();
        self.waist_w0 * ratio.hypot(1.0)
    }

    /// Transverse intensity in W/m² at radius `r` and distance `d`.
    pub fn intensity(&self, r: f64, d: f64) -> f64 {
        let w = self.waist_at(d);
        2.0 * self.power_pt / (PI * w * w) * (-2.0 * r * r / (w * w)).exp()
    }

    /// Power through a centred circular aperture of radius `r0` normal to the
    /// axis at distance `d`.
    pub fn power_through_circle(&self, r0: f64, d: f64) -> f64 {
        self.power_pt * circle_fraction(r0, self.waist_at(d))
    }

    /// Power through a `width` × `height` rectangle normal to the axis at
    /// distance `d`, its centre displaced by `offset` (along the width and
    /// height directions) from the beam axis.
    pub fn power_through_rectangle(
        &self,
        width: f64,
        height: f64,
        d: f64,
        offset: (f64, f64),
    ) -> f64 {
        self.power_pt * rectangle_fraction(width, height, offset, self.waist_at(d))
    }

    /// Small-aperture estimate for a detector of radius `r0` displaced `r`
    /// from the axis: the local intensity times the aperture area. Only valid
    /// for `r0` much smaller than the beam radius.
    pub fn power_small_aperture_off_axis(&self, r0: f64, r: f64, d: f64) -> f64 {
        (self.intensity(r, d) * PI * r0 * r0).min(self.power_pt)
    }

    /// Power intercepted by a (possibly tilted) mirror. The mirror rectangle
    /// is projected onto the plane transverse to the beam axis; each edge
    /// shrinks by the cosine of its tilt against that plane.
    pub fn power_onto_mirror(&self, mirror: &MirrorElement) -> f64 {
        let rel = mirror.center - self.origin;
        let d = rel.dot(self.axis);
        if d <= 0.0 {
            return 0.0;
        }
        let transverse = rel - self.axis * d;
        let (u, v) = mirror.axes();
        let u_proj = u - self.axis * u.dot(self.axis);
        let v_proj = v - self.axis * v.dot(self.axis);
        let (Some(u_dir), Some(v_dir)) = (u_proj.normalized(), v_proj.normalized()) else {
            // mirror seen edge-on
            return 0.0;
        };
        let width = mirror.width * u_proj.norm();
        let height = mirror.height * v_proj.norm();
        let offset = (transverse.dot(u_dir), transverse.dot(v_dir));
        self.power_through_rectangle(width, height, d, offset)
    }
}

/// Fraction of a beam of radius `w` inside a centred circle of radius `r0`.
pub fn circle_fraction(r0: f64, w: f64) -> f64 {
    -(-2.0 * r0 * r0 / (w * w)).exp_m1()
}

/// Fraction of a beam of radius `w` inside an axis-aligned rectangle whose
/// centre is displaced by `offset`. The Gaussian separates in Cartesian
/// coordinates, so this is a product of two 1-D erf differences.
pub fn rectangle_fraction(width: f64, height: f64, offset: (f64, f64), w: f64) -> f64 {
    let scale = SQRT_2 / w;
    let fx = erf_diff(
        scale * (offset.0 - 0.5 * width),
        scale * (offset.0 + 0.5 * width),
    );
    let fy = erf_diff(
        scale * (offset.1 - 0.5 * height),
        scale * (offset.1 + 0.5 * height),
    );
    (0.25 * fx * fy).clamp(0.0, 1.0)
}

/// erf(b) − erf(a) for a ≤ b, switching to erfc in the tails to avoid
/// cancellation.
fn erf_diff(a: f64, b: f64) -> f64 {
    if a >= 0.0 {
        libm::erfc(a) - libm::erfc(b)
    } else if b <= 0.0 {
        libm::erfc(-b) - libm::erfc(-a)
    } else {
        libm::erf(b) - libm::erf(a)
    }
}
