//! Per-user optical channel gains: the direct path, single-bounce mirror
//! paths, and select-best combining across the angle-diversity receiver.
//!
//! Gains are power fractions (received / transmitted per beam) and do not
//! depend on the beam power. A reflected beam is modelled as the incident
//! beam continued over the unfolded distance `d1 + d2`, scaled by the
//! mirror reflectivity and by the share of the beam the finite mirror
//! actually intercepts.

use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use crate::beam::{circle_fraction, GaussianBeam};
use crate::error::{Error, Result};
use crate::geometry::{
    direction_from_orientation, specular_reflect, within_fov, Facing, MirrorElement, Orientation,
    Room, Vec3,
};

/// One photodiode of the angle-diversity receiver.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct AdrBranch {
    pub orientation: Orientation,
    pub fov_half_angle_deg: f64,
    /// m²
    pub pd_area: f64,
    /// A/W
    pub responsivity: f64,
}

impl AdrBranch {
    pub fn validate(&self, path: &str) -> Result<()> {
        self.orientation.validate(&format!("{path}.orientation"))?;
        if !(self.fov_half_angle_deg > 0.0 && self.fov_half_angle_deg <= 90.0) {
            return Err(Error::validation(
                format!("{path}.fov_half_angle_deg"),
                "must lie in (0, 90]",
            ));
        }
        if !(self.pd_area > 0.0) {
            return Err(Error::validation(format!("{path}.pd_area"), "must be > 0"));
        }
        if !(self.responsivity > 0.0) {
            return Err(Error::validation(
                format!("{path}.responsivity"),
                "must be > 0",
            ));
        }
        Ok(())
    }

    pub fn normal(&self) -> Vec3 {
        direction_from_orientation(self.orientation, Facing::Up)
    }

    pub fn pd_radius(&self) -> f64 {
        (self.pd_area / PI).sqrt()
    }

    pub fn fov_half_angle(&self) -> f64 {
        self.fov_half_angle_deg.to_radians()
    }

    /// Whether a ray travelling along `ray_dir` falls inside this branch's FOV.
    pub fn accepts(&self, ray_dir: Vec3) -> bool {
        within_fov(ray_dir, self.normal(), self.fov_half_angle())
    }
}

/// Reference receiver: four branches at azimuth 0/90/180/270°, elevation 60°,
/// 25° FOV, with a 20 mm², 0.4 A/W photodiode each.
pub fn default_adr() -> Vec<AdrBranch> {
    [0.0, 90.0, 180.0, 270.0]
        .into_iter()
        .map(|az| AdrBranch {
            orientation: Orientation {
                azimuth_deg: az,
                elevation_deg: 60.0,
            },
            fov_half_angle_deg: 25.0,
            pd_area: 20e-6,
            responsivity: 0.4,
        })
        .collect()
}

/// Gain of one path and the receiver branch that picked it up.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct BranchGain {
    pub gain: f64,
    /// `None` when no branch sees the path.
    pub branch: Option<usize>,
}

impl BranchGain {
    pub const ZERO: BranchGain = BranchGain {
        gain: 0.0,
        branch: None,
    };
}

#[derive(Debug, Clone, PartialEq, Default)]
pub struct ChannelGain {
    pub h_los: f64,
    pub h_nlos: f64,
    pub q: f64,
    pub serving_branch_los: Option<usize>,
    /// Branch receiving the strongest mirror path.
    pub serving_branch_nlos: Option<usize>,
    /// Individual mirror-path gains in assignment order.
    pub nlos_terms: Vec<f64>,
}

/// Select-best over branches: the largest gain, lowest index on ties.
fn select_best(branches: &[AdrBranch], mut gain_for: impl FnMut(&AdrBranch) -> f64) -> BranchGain {
    let mut best = BranchGain::ZERO;
    for (i, b) in branches.iter().enumerate() {
        let g = gain_for(b);
        if g > best.gain {
            best = BranchGain {
                gain: g,
                branch: Some(i),
            };
        }
    }
    best
}

/// Direct-path gain from an AP branch at `ap_pos` to the receiver at
/// `user_pos`, with the beam aimed at the receiver.
pub fn los_gain(
    room: &Room,
    ap_pos: Vec3,
    user_pos: Vec3,
    user_branches: &[AdrBranch],
    beam: &GaussianBeam,
    blocked: bool,
) -> Result<BranchGain> {
    room.check(user_pos)?;
    if blocked {
        return Ok(BranchGain::ZERO);
    }
    let Some(ray) = (user_pos - ap_pos).normalized() else {
        return Ok(BranchGain::ZERO);
    };
    let d = ap_pos.distance(user_pos);
    let w = beam.waist_at(d);
    Ok(select_best(user_branches, |b| {
        if b.accepts(ray) {
            circle_fraction(b.pd_radius(), w)
        } else {
            0.0
        }
    }))
}

/// Gain of the AP → mirror → user path. `mirror` carries its current
/// normal; use [`steered_irs_gain`] to steer it at the user first.
///
/// The AP beam is aimed at the mirror centre. If the reflected axis misses
/// the receiver (mirror not steered at this user) the small-aperture
/// off-axis estimate is used instead of the on-axis circle.
pub fn irs_gain(
    room: &Room,
    ap_pos: Vec3,
    mirror: &MirrorElement,
    user_pos: Vec3,
    user_branches: &[AdrBranch],
    beam: &GaussianBeam,
) -> Result<BranchGain> {
    room.check(user_pos)?;
    if mirror.reflectivity == 0.0 {
        return Ok(BranchGain::ZERO);
    }
    let n = mirror.normal;
    // both ends must be on the reflective side
    if n.dot(ap_pos - mirror.center) <= 0.0 || n.dot(user_pos - mirror.center) <= 0.0 {
        return Ok(BranchGain::ZERO);
    }
    let Some(aimed) = beam.aimed(ap_pos, mirror.center) else {
        return Ok(BranchGain::ZERO);
    };
    let unit_beam = GaussianBeam {
        power_pt: 1.0,
        ..aimed
    };
    let intercept = unit_beam.power_onto_mirror(mirror);
    if intercept <= 0.0 {
        return Ok(BranchGain::ZERO);
    }

    let Some(ray) = (user_pos - mirror.center).normalized() else {
        return Ok(BranchGain::ZERO);
    };
    let d1 = ap_pos.distance(mirror.center);
    let d2 = mirror.center.distance(user_pos);
    let reflected_axis = specular_reflect(aimed.axis, n);
    let along = (user_pos - mirror.center).dot(reflected_axis);
    if along <= 0.0 {
        return Ok(BranchGain::ZERO);
    }
    let off_axis = ((user_pos - mirror.center) - reflected_axis * along).norm();
    let on_axis = off_axis <= 1e-9 * d2.max(1.0);

    let rho = mirror.reflectivity;
    Ok(select_best(user_branches, |b| {
        if !b.accepts(ray) {
            return 0.0;
        }
        let captured = if on_axis {
            circle_fraction(b.pd_radius(), aimed.waist_at(d1 + d2))
        } else {
            unit_beam.power_small_aperture_off_axis(b.pd_radius(), off_axis, d1 + along)
        };
        let into_pd = (captured / intercept).min(1.0);
        intercept * rho * into_pd
    }))
}

/// Steer `mirror` at `user_pos` and evaluate the reflected path.
pub fn steered_irs_gain(
    room: &Room,
    ap_pos: Vec3,
    mirror: &MirrorElement,
    user_pos: Vec3,
    user_branches: &[AdrBranch],
    beam: &GaussianBeam,
) -> Result<BranchGain> {
    let n = crate::geometry::steer_mirror(ap_pos, mirror.center, user_pos)?;
    irs_gain(
        room,
        ap_pos,
        &mirror.with_normal(n),
        user_pos,
        user_branches,
        beam,
    )
}

pub fn total_gain(los: BranchGain, nlos: &[BranchGain]) -> ChannelGain {
    let h_nlos: f64 = nlos.iter().map(|g| g.gain).sum();
    let strongest =
        nlos.iter().copied().fold(
            BranchGain::ZERO,
            |best, g| if g.gain > best.gain { g } else { best },
        );
    ChannelGain {
        h_los: los.gain,
        h_nlos,
        q: los.gain + h_nlos,
        serving_branch_los: los.branch,
        serving_branch_nlos: strongest.branch,
        nlos_terms: nlos.iter().map(|g| g.gain).collect(),
    }
}
