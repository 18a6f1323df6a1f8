//! Scenario assembly, mirror assignment, per-user evaluation and the two
//! experiment sweeps (sum rate against transmit SNR and against user count).

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::beam::GaussianBeam;
use crate::channel::{los_gain, steered_irs_gain, total_gain, AdrBranch, BranchGain, ChannelGain};
use crate::config::{AdtConfig, ConfigDocument, IrsConfig, PowerSplit, Wall};
use crate::error::{Error, Result};
use crate::geometry::{direction_from_orientation, Facing, MirrorElement, Orientation, Room, Vec3};
use crate::link::{achievable_rate, noise_variance, sinr_from_gain, LinkResult};
use crate::output::{ResultRow, ResultTable};

/// One transmitter branch of the ceiling AP.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AdtBranch {
    pub position: Vec3,
    pub orientation: Orientation,
    pub axis: Vec3,
}

#[derive(Debug, Clone, PartialEq)]
pub struct AdtSpec {
    pub center: Vec3,
    pub branches: Vec<AdtBranch>,
    pub vcsels_per_side: usize,
    pub waist_w0: f64,
    pub wavelength: f64,
}

impl AdtSpec {
    fn from_config(cfg: &AdtConfig, room: &Room) -> Result<Self> {
        if !room.contains(cfg.center) {
            return Err(Error::validation("adt.center", "must lie inside the room"));
        }
        if cfg.branch_orientations.is_empty() {
            return Err(Error::validation(
                "adt.branch_orientations",
                "must not be empty",
            ));
        }
        if cfg.vcsels_per_side == 0 {
            return Err(Error::validation("adt.vcsels_per_side", "must be >= 1"));
        }
        if !(cfg.side_offset >= 0.0) {
            return Err(Error::validation("adt.side_offset", "must be >= 0"));
        }
        let mut branches = Vec::with_capacity(cfg.branch_orientations.len());
        for (i, o) in cfg.branch_orientations.iter().enumerate() {
            let path = format!("adt.branch_orientations[{i}]");
            o.validate(&path)?;
            let position = if o.elevation_deg < 90.0 {
                let (s, c) = o.azimuth_deg.to_radians().sin_cos();
                cfg.center + Vec3::new(c, s, 0.0) * cfg.side_offset
            } else {
                cfg.center
            };
            if !room.contains(position) {
                return Err(Error::validation(
                    path,
                    "branch position falls outside the room",
                ));
            }
            branches.push(AdtBranch {
                position,
                orientation: *o,
                axis: direction_from_orientation(*o, Facing::Down),
            });
        }
        let template = GaussianBeam {
            waist_w0: cfg.waist_w0,
            wavelength: cfg.wavelength,
            power_pt: 1.0,
            origin: cfg.center,
            axis: -Vec3::Z,
        };
        template.validate().map_err(|e| match e {
            Error::Validation { path, message } => {
                Error::validation(path.replace("beam.", "adt."), message)
            }
            other => other,
        })?;
        Ok(AdtSpec {
            center: cfg.center,
            branches,
            vcsels_per_side: cfg.vcsels_per_side,
            waist_w0: cfg.waist_w0,
            wavelength: cfg.wavelength,
        })
    }

    pub fn beams_per_branch(&self) -> usize {
        self.vcsels_per_side * self.vcsels_per_side
    }

    pub fn capacity(&self) -> usize {
        self.beams_per_branch() * self.branches.len()
    }

    /// Unit-power beam with the array's waist and wavelength.
    pub fn beam_template(&self) -> GaussianBeam {
        GaussianBeam {
            waist_w0: self.waist_w0,
            wavelength: self.wavelength,
            power_pt: 1.0,
            origin: self.center,
            axis: -Vec3::Z,
        }
    }

    /// Branch indices by increasing angle between the branch axis and the
    /// direction from the branch to `target`.
    pub fn ranked_branches(&self, target: Vec3) -> Vec<usize> {
        let mut scored: Vec<(f64, usize)> = self
            .branches
            .iter()
            .enumerate()
            .map(|(i, b)| {
                let cos = (target - b.position)
                    .normalized()
                    .map_or(-1.0, |d| d.dot(b.axis));
                (cos, i)
            })
            .collect();
        scored.sort_by(|a, b| b.0.total_cmp(&a.0).then(a.1.cmp(&b.1)));
        scored.into_iter().map(|(_, i)| i).collect()
    }

    pub fn nominal_branch(&self, target: Vec3) -> usize {
        self.ranked_branches(target)[0]
    }
}

/// The M × M mirror wall.
#[derive(Debug, Clone, PartialEq)]
pub struct IrsPanel {
    pub wall: Wall,
    pub grid_m: usize,
    pub element_size: (f64, f64),
    pub reflectivity: f64,
    pub panel_center: Vec3,
    /// Wall normal pointing into the room.
    pub inward: Vec3,
    /// Row-major from the bottom row, columns along the wall.
    pub elements: Vec<MirrorElement>,
}

impl IrsPanel {
    fn from_config(cfg: &IrsConfig, room: &Room) -> Result<Self> {
        if cfg.grid_m == 0 {
            return Err(Error::validation("irs.grid_m", "must be >= 1"));
        }
        if !(cfg.element_width > 0.0) {
            return Err(Error::validation("irs.element_width", "must be > 0"));
        }
        if !(cfg.element_height > 0.0) {
            return Err(Error::validation("irs.element_height", "must be > 0"));
        }
        if !(0.0..=1.0).contains(&cfg.reflectivity) {
            return Err(Error::validation("irs.reflectivity", "must lie in [0, 1]"));
        }
        let (inward, along_axis, wall_len, origin) = match cfg.wall {
            Wall::XMin => (Vec3::X, Vec3::Y, room.length, Vec3::ZERO),
            Wall::XMax => (
                -Vec3::X,
                Vec3::Y,
                room.length,
                Vec3::new(room.width, 0.0, 0.0),
            ),
            Wall::YMin => (Vec3::Y, Vec3::X, room.width, Vec3::ZERO),
            Wall::YMax => (
                -Vec3::Y,
                Vec3::X,
                room.width,
                Vec3::new(0.0, room.length, 0.0),
            ),
        };
        let m = cfg.grid_m as f64;
        let half_w = 0.5 * m * cfg.element_width;
        let half_h = 0.5 * m * cfg.element_height;
        const EPS: f64 = 1e-9;
        if cfg.center_along - half_w < -EPS || cfg.center_along + half_w > wall_len + EPS {
            return Err(Error::validation(
                "irs.center_along",
                format!(
                    "panel of width {:.3} m does not fit on the wall",
                    2.0 * half_w
                ),
            ));
        }
        if cfg.center_height - half_h < -EPS || cfg.center_height + half_h > room.height + EPS {
            return Err(Error::validation(
                "irs.center_height",
                format!(
                    "panel of height {:.3} m does not fit on the wall",
                    2.0 * half_h
                ),
            ));
        }
        let panel_center = origin + along_axis * cfg.center_along + Vec3::Z * cfg.center_height;
        let mut elements = Vec::with_capacity(cfg.grid_m * cfg.grid_m);
        for row in 0..cfg.grid_m {
            for col in 0..cfg.grid_m {
                let du = (col as f64 - 0.5 * (m - 1.0)) * cfg.element_width;
                let dv = (row as f64 - 0.5 * (m - 1.0)) * cfg.element_height;
                let center = panel_center + along_axis * du + Vec3::Z * dv;
                elements.push(MirrorElement::new(
                    center,
                    inward,
                    cfg.element_width,
                    cfg.element_height,
                    cfg.reflectivity,
                )?);
            }
        }
        Ok(IrsPanel {
            wall: cfg.wall,
            grid_m: cfg.grid_m,
            element_size: (cfg.element_width, cfg.element_height),
            reflectivity: cfg.reflectivity,
            panel_center,
            inward,
            elements,
        })
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct User {
    pub position: Vec3,
    pub blocked: bool,
    pub branches: Vec<AdrBranch>,
}

/// A validated, immutable simulation scenario.
#[derive(Debug, Clone, PartialEq)]
pub struct Scenario {
    pub room: Room,
    pub adt: AdtSpec,
    pub irs: Option<IrsPanel>,
    pub users: Vec<User>,
    pub noise: crate::link::NoiseParams,
    /// Optical power per user, W.
    pub p_tot: f64,
    pub eye_safety_cap: f64,
    pub power_split: PowerSplit,
    pub max_mirrors_per_user: Option<usize>,
    pub rng_seed: u64,
    doc: ConfigDocument,
}

/// Build and validate a scenario. Fields left at their defaults in
/// `overrides` give the reference room of the experiments.
pub fn build_default_scenario(overrides: &ConfigDocument) -> Result<Scenario> {
    let mut doc = overrides.clone();
    let room = doc.room;
    for (name, v) in [
        ("width", room.width),
        ("length", room.length),
        ("height", room.height),
    ] {
        if !(v > 0.0) || !v.is_finite() {
            return Err(Error::validation(format!("room.{name}"), "must be > 0"));
        }
    }
    let adt = AdtSpec::from_config(&doc.adt, &room)?;
    let irs = if doc.irs.enabled {
        Some(IrsPanel::from_config(&doc.irs, &room)?)
    } else {
        None
    };
    doc.noise.validate("noise")?;

    let p = &doc.power;
    if !(p.eye_safety_cap > 0.0) {
        return Err(Error::validation("power.eye_safety_cap", "must be > 0"));
    }
    if !(p.p_tot >= 0.0) || !p.p_tot.is_finite() {
        return Err(Error::validation("power.p_tot", "must be >= 0"));
    }
    if p.p_tot > p.eye_safety_cap {
        return Err(Error::validation(
            "power.p_tot",
            format!(
                "{} W exceeds power.eye_safety_cap {} W",
                p.p_tot, p.eye_safety_cap
            ),
        ));
    }

    let u = &doc.users;
    if u.adr.is_empty() {
        return Err(Error::validation(
            "users.adr",
            "must have at least one branch",
        ));
    }
    for (i, b) in u.adr.iter().enumerate() {
        b.validate(&format!("users.adr[{i}]"))?;
    }
    if !(0.0..=room.height).contains(&u.receiver_height) {
        return Err(Error::validation(
            "users.receiver_height",
            "must lie in [0, room.height]",
        ));
    }
    let count = match (&u.positions, u.count) {
        (Some(ps), Some(k)) if ps.len() != k => {
            return Err(Error::validation(
                "users.count",
                format!("{k} does not match {} explicit positions", ps.len()),
            ))
        }
        (Some(ps), _) => ps.len(),
        (None, k) => k.unwrap_or(4),
    };
    if count == 0 {
        return Err(Error::validation("users.count", "must be >= 1"));
    }
    if count > adt.capacity() {
        return Err(Error::validation(
            "users.count",
            format!(
                "{count} users exceed the {} VCSELs of the AP",
                adt.capacity()
            ),
        ));
    }
    if let Some(ps) = &u.positions {
        for (i, p) in ps.iter().enumerate() {
            if !room.contains(*p) {
                return Err(Error::validation(
                    format!("users.positions[{i}]"),
                    format!("({}, {}, {}) lies outside the room", p.x, p.y, p.z),
                ));
            }
        }
    }
    if let Some(&b) = u.blocked.iter().find(|&&b| b >= count) {
        return Err(Error::validation(
            "users.blocked",
            format!("index {b} out of range for {count} users"),
        ));
    }
    doc.users.count = Some(count);

    let mut scenario = Scenario {
        room,
        adt,
        irs,
        users: Vec::new(),
        noise: doc.noise,
        p_tot: doc.power.p_tot,
        eye_safety_cap: doc.power.eye_safety_cap,
        power_split: doc.power.power_split,
        max_mirrors_per_user: doc.power.max_mirrors_per_user,
        rng_seed: doc.users.seed,
        doc,
    };
    scenario.users = scenario.users_for_drop(0, count)?;
    Ok(scenario)
}

/// `k` i.i.d. uniform positions on the receiver plane at `receiver_height`.
/// Each `(seed, stream)` pair is an independent sequence, and a prefix of a
/// longer draw equals a shorter draw.
pub fn place_users_uniform(
    k: usize,
    room: &Room,
    receiver_height: f64,
    seed: u64,
    stream: u64,
) -> Vec<Vec3> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(stream);
    (0..k)
        .map(|_| {
            let x = rng.gen::<f64>() * room.width;
            let y = rng.gen::<f64>() * room.length;
            Vec3::new(x, y, receiver_height)
        })
        .collect()
}

impl Scenario {
    /// The fully populated configuration this scenario was built from.
    pub fn config(&self) -> &ConfigDocument {
        &self.doc
    }

    pub fn rebuild(&self, edit: impl FnOnce(&mut ConfigDocument)) -> Result<Scenario> {
        let mut doc = self.doc.clone();
        edit(&mut doc);
        build_default_scenario(&doc)
    }

    pub fn with_p_tot(&self, p_tot: f64) -> Result<Scenario> {
        self.rebuild(|d| d.power.p_tot = p_tot)
    }

    pub fn with_variant(&self, variant: Variant) -> Result<Scenario> {
        self.rebuild(|d| match variant {
            Variant::NoIrs => d.irs.enabled = false,
            Variant::Irs(m) => {
                d.irs.enabled = true;
                d.irs.grid_m = m;
            }
        })
    }

    pub fn mirror_count(&self) -> usize {
        self.irs.as_ref().map_or(0, |p| p.elements.len())
    }

    /// Users for one Monte Carlo drop. Drop 0 is the scenario's own
    /// placement; explicit positions are the same in every drop.
    pub fn users_for_drop(&self, drop: u64, k: usize) -> Result<Vec<User>> {
        let u = &self.doc.users;
        let positions = match &u.positions {
            Some(ps) => {
                if k > ps.len() {
                    return Err(Error::validation(
                        "users.positions",
                        format!("{k} users requested but only {} positions given", ps.len()),
                    ));
                }
                ps[..k].to_vec()
            }
            None => place_users_uniform(k, &self.room, u.receiver_height, self.rng_seed, drop),
        };
        Ok(positions
            .into_iter()
            .enumerate()
            .map(|(i, position)| User {
                position,
                blocked: u.blocked.contains(&i),
                branches: u.adr.clone(),
            })
            .collect())
    }

    pub fn reference_responsivity(&self) -> f64 {
        self.doc.users.adr[0].responsivity
    }

    /// P_tot giving transmit SNR `(R·P_tot)² / σ²_thermal` of `snr_db`.
    pub fn transmit_power_for_snr(&self, snr_db: f64) -> f64 {
        let snr = 10f64.powf(snr_db / 10.0);
        (snr * self.noise.thermal_variance()).sqrt() / self.reference_responsivity()
    }
}

/// Mirror indices served to each user. Mirror sets are disjoint.
#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct Assignment {
    pub per_user: Vec<Vec<usize>>,
}

impl Assignment {
    pub fn empty(users: usize) -> Self {
        Assignment {
            per_user: vec![Vec::new(); users],
        }
    }

    pub fn total_mirrors(&self) -> usize {
        self.per_user.iter().map(Vec::len).sum()
    }

    pub fn validate(&self, mirrors: usize, max_per_user: Option<usize>) -> Result<()> {
        let mut seen = vec![false; mirrors];
        for (u, list) in self.per_user.iter().enumerate() {
            if max_per_user.is_some_and(|m| list.len() > m) {
                return Err(Error::validation(
                    format!("assignment[{u}]"),
                    "more mirrors than max_mirrors_per_user",
                ));
            }
            for &m in list {
                if m >= mirrors {
                    return Err(Error::validation(
                        format!("assignment[{u}]"),
                        format!("mirror {m} out of range"),
                    ));
                }
                if std::mem::replace(&mut seen[m], true) {
                    return Err(Error::validation(
                        format!("assignment[{u}]"),
                        format!("mirror {m} assigned twice"),
                    ));
                }
            }
        }
        Ok(())
    }

    pub fn total_gain(&self, gains: &[Vec<f64>]) -> f64 {
        self.per_user
            .iter()
            .enumerate()
            .map(|(u, ms)| ms.iter().map(|&m| gains[u][m]).sum::<f64>())
            .sum()
    }
}

/// Greedy matching: repeatedly take the largest remaining positive
/// `gains[user][mirror]`, skipping used mirrors and full users, until
/// `max_total` mirrors are placed. Ties go to the lowest (user, mirror).
pub fn greedy_assignment(
    gains: &[Vec<f64>],
    max_per_user: Option<usize>,
    max_total: Option<usize>,
) -> Result<Assignment> {
    let mirrors = gains.first().map_or(0, Vec::len);
    if let Some((u, row)) = gains.iter().enumerate().find(|(_, r)| r.len() != mirrors) {
        return Err(Error::DimensionMismatch(format!(
            "gain row {u} has {} columns, expected {mirrors}",
            row.len()
        )));
    }
    let mut candidates: Vec<(f64, usize, usize)> = Vec::new();
    for (u, row) in gains.iter().enumerate() {
        for (m, &g) in row.iter().enumerate() {
            if g.is_nan() || g < 0.0 {
                return Err(Error::validation(
                    format!("gains[{u}][{m}]"),
                    "must be >= 0",
                ));
            }
            if g > 0.0 {
                candidates.push((g, u, m));
            }
        }
    }
    candidates.sort_by(|a, b| b.0.total_cmp(&a.0).then(a.1.cmp(&b.1)).then(a.2.cmp(&b.2)));

    let mut out = Assignment::empty(gains.len());
    let mut used = vec![false; mirrors];
    let mut placed = 0usize;
    for (_, u, m) in candidates {
        if max_total.is_some_and(|t| placed >= t) {
            break;
        }
        if used[m] || max_per_user.is_some_and(|cap| out.per_user[u].len() >= cap) {
            continue;
        }
        used[m] = true;
        out.per_user[u].push(m);
        placed += 1;
    }
    Ok(out)
}

/// Assign mirrors for `scenario`'s users. The number of mirror beams is
/// bounded by the VCSELs left after one direct beam per user.
pub fn assign_mirrors(
    scenario: &Scenario,
    gains: &[Vec<f64>],
    max_per_user: Option<usize>,
) -> Result<Assignment> {
    if gains.len() != scenario.users.len() {
        return Err(Error::DimensionMismatch(format!(
            "{} gain rows for {} users",
            gains.len(),
            scenario.users.len()
        )));
    }
    assign_for_users(scenario, gains, max_per_user)
}

fn assign_for_users(
    scenario: &Scenario,
    gains: &[Vec<f64>],
    max_per_user: Option<usize>,
) -> Result<Assignment> {
    let mirrors = scenario.mirror_count();
    if let Some((u, row)) = gains.iter().enumerate().find(|(_, r)| r.len() != mirrors) {
        return Err(Error::DimensionMismatch(format!(
            "gain row {u} has {} columns for {mirrors} mirrors",
            row.len()
        )));
    }
    let spare = scenario.adt.capacity().saturating_sub(gains.len());
    greedy_assignment(gains, max_per_user, Some(spare))
}

/// `gains[user][mirror]` with every mirror steered at that user and the
/// beam leaving the angularly closest AP branch.
pub fn gain_matrix(scenario: &Scenario, users: &[User]) -> Result<Vec<Vec<f64>>> {
    let Some(panel) = &scenario.irs else {
        return Ok(vec![Vec::new(); users.len()]);
    };
    let beam = scenario.adt.beam_template();
    let origins: Vec<Vec3> = panel
        .elements
        .iter()
        .map(|m| scenario.adt.branches[scenario.adt.nominal_branch(m.center)].position)
        .collect();
    users
        .iter()
        .map(|user| {
            panel
                .elements
                .iter()
                .zip(&origins)
                .map(|(m, &ap)| irs_path(scenario, panel, ap, m, user, &beam).map(|g| g.gain))
                .collect()
        })
        .collect()
}

fn irs_path(
    scenario: &Scenario,
    panel: &IrsPanel,
    ap: Vec3,
    mirror: &MirrorElement,
    user: &User,
    beam: &GaussianBeam,
) -> Result<BranchGain> {
    let g = steered_irs_gain(
        &scenario.room,
        ap,
        mirror,
        user.position,
        &user.branches,
        beam,
    )?;
    // a steered normal that points into the wall is not realisable
    let n = crate::geometry::steer_mirror(ap, mirror.center, user.position)?;
    if !mirror.with_normal(n).faces(panel.inward) {
        return Ok(BranchGain::ZERO);
    }
    Ok(g)
}

/// Which AP branch emits each beam. Direct beams are placed first in user
/// order, then mirror beams by mirror index; each goes to the closest
/// branch that still has a free VCSEL.
#[derive(Debug, Clone, PartialEq)]
pub struct BeamPlan {
    pub los_branch: Vec<usize>,
    /// Indexed by mirror; `None` for idle mirrors.
    pub mirror_branch: Vec<Option<usize>>,
}

pub fn plan_beams(
    scenario: &Scenario,
    users: &[User],
    assignment: &Assignment,
) -> Result<BeamPlan> {
    let per_branch = scenario.adt.beams_per_branch();
    let mut load = vec![0usize; scenario.adt.branches.len()];
    let mut take = |target: Vec3| -> Result<usize> {
        let b = scenario
            .adt
            .ranked_branches(target)
            .into_iter()
            .find(|&b| load[b] < per_branch)
            .ok_or_else(|| {
                Error::validation(
                    "adt.vcsels_per_side",
                    "not enough VCSELs for the requested beams",
                )
            })?;
        load[b] += 1;
        Ok(b)
    };
    let los_branch = users
        .iter()
        .map(|u| take(u.position))
        .collect::<Result<Vec<_>>>()?;
    let mut mirror_branch = vec![None; scenario.mirror_count()];
    let mut assigned: Vec<usize> = assignment.per_user.iter().flatten().copied().collect();
    assigned.sort_unstable();
    if let Some(panel) = &scenario.irs {
        for m in assigned {
            mirror_branch[m] = Some(take(panel.elements[m].center)?);
        }
    }
    Ok(BeamPlan {
        los_branch,
        mirror_branch,
    })
}

/// Channel of one user with its serving beams, independent of power.
#[derive(Debug, Clone, PartialEq)]
pub struct UserChannel {
    pub gain: ChannelGain,
    pub mirror_beams: usize,
    pub responsivity: f64,
}

pub fn user_channel(
    scenario: &Scenario,
    users: &[User],
    index: usize,
    assignment: &Assignment,
    plan: &BeamPlan,
) -> Result<UserChannel> {
    let user = &users[index];
    let beam = scenario.adt.beam_template();
    let ap = scenario.adt.branches[plan.los_branch[index]].position;
    let los = los_gain(
        &scenario.room,
        ap,
        user.position,
        &user.branches,
        &beam,
        user.blocked,
    )?;
    let mirrors = assignment
        .per_user
        .get(index)
        .map_or(&[][..], Vec::as_slice);
    let mut nlos = Vec::with_capacity(mirrors.len());
    if let Some(panel) = &scenario.irs {
        for &m in mirrors {
            let branch = plan.mirror_branch[m].ok_or_else(|| {
                Error::validation("assignment", format!("mirror {m} has no beam"))
            })?;
            let ap = scenario.adt.branches[branch].position;
            nlos.push(irs_path(
                scenario,
                panel,
                ap,
                &panel.elements[m],
                user,
                &beam,
            )?);
        }
    }
    let gain = total_gain(los, &nlos);
    let serving = if gain.h_los >= nlos.iter().map(|g| g.gain).fold(0.0, f64::max) {
        gain.serving_branch_los
    } else {
        gain.serving_branch_nlos
    };
    let responsivity = user.branches[serving.unwrap_or(0)].responsivity;
    Ok(UserChannel {
        gain,
        mirror_beams: mirrors.len(),
        responsivity,
    })
}

/// Effective gain entering the SINR and the power carried by each active
/// beam, for one user under the scenario's power-split rule.
pub fn split_power(split: PowerSplit, ch: &UserChannel, p_tot: f64) -> (f64, Vec<f64>) {
    let g = &ch.gain;
    match split {
        PowerSplit::Equal => {
            let n = 1 + ch.mirror_beams;
            (g.q, vec![p_tot / n as f64; n])
        }
        PowerSplit::LosPriority => {
            if g.h_los > 0.0 || ch.mirror_beams == 0 {
                (g.h_los, vec![p_tot])
            } else {
                let n = ch.mirror_beams;
                (g.h_nlos, vec![p_tot / n as f64; n])
            }
        }
    }
}

pub fn link_result(scenario: &Scenario, ch: &UserChannel, p_tot: f64) -> Result<LinkResult> {
    let (q, beams) = split_power(scenario.power_split, ch, p_tot);
    for &p in &beams {
        if p > scenario.eye_safety_cap * (1.0 + 1e-12) {
            return Err(Error::EyeSafety {
                power_w: p,
                cap_w: scenario.eye_safety_cap,
            });
        }
    }
    let received = q * p_tot;
    let sigma2 = noise_variance(&scenario.noise, received, ch.responsivity);
    let gamma = sinr_from_gain(q, p_tot, ch.responsivity, sigma2)?;
    Ok(LinkResult {
        gain: ch.gain.clone(),
        effective_gain: q,
        received_optical_power: received,
        noise_variance: sigma2,
        sinr: gamma,
        rate: achievable_rate(gamma, scenario.noise.bandwidth_b),
    })
}

/// Evaluate one of the scenario's own users under `assignment`.
pub fn evaluate_user(
    scenario: &Scenario,
    assignment: &Assignment,
    user_index: usize,
) -> Result<LinkResult> {
    if user_index >= scenario.users.len() {
        return Err(Error::validation(
            "user_index",
            format!("{user_index} out of range"),
        ));
    }
    if assignment.per_user.len() > scenario.users.len() {
        return Err(Error::DimensionMismatch(
            "assignment has more users than the scenario".into(),
        ));
    }
    assignment.validate(scenario.mirror_count(), None)?;
    let plan = plan_beams(scenario, &scenario.users, assignment)?;
    let ch = user_channel(scenario, &scenario.users, user_index, assignment, &plan)?;
    link_result(scenario, &ch, scenario.p_tot)
}

/// Gains, assignment and beam plan for a set of users; power-independent.
#[derive(Debug, Clone, PartialEq)]
pub struct NetworkChannels {
    pub assignment: Assignment,
    pub channels: Vec<UserChannel>,
}

pub fn network_channels(scenario: &Scenario, users: &[User]) -> Result<NetworkChannels> {
    let assignment = if scenario.irs.is_some() {
        let gains = gain_matrix(scenario, users)?;
        assign_for_users(scenario, &gains, scenario.max_mirrors_per_user)?
    } else {
        Assignment::empty(users.len())
    };
    let plan = plan_beams(scenario, users, &assignment)?;
    let channels = (0..users.len())
        .map(|i| user_channel(scenario, users, i, &assignment, &plan))
        .collect::<Result<Vec<_>>>()?;
    Ok(NetworkChannels {
        assignment,
        channels,
    })
}

impl NetworkChannels {
    pub fn results(&self, scenario: &Scenario, p_tot: f64) -> Result<Vec<LinkResult>> {
        self.channels
            .iter()
            .map(|c| link_result(scenario, c, p_tot))
            .collect()
    }
}

/// Assign mirrors and evaluate every user of the scenario at its P_tot.
pub fn evaluate_scenario(scenario: &Scenario) -> Result<(Assignment, Vec<LinkResult>)> {
    let net = network_channels(scenario, &scenario.users)?;
    let results = net.results(scenario, scenario.p_tot)?;
    Ok((net.assignment, results))
}

/// IRS configuration compared in a sweep.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Variant {
    NoIrs,
    /// M × M mirror array.
    Irs(usize),
}

impl Variant {
    pub fn label(&self) -> String {
        match self {
            Variant::NoIrs => "none".to_string(),
            Variant::Irs(m) => format!("{m}x{m}"),
        }
    }

    pub fn parse(s: &str) -> Option<Variant> {
        if s == "none" {
            return Some(Variant::NoIrs);
        }
        let (a, b) = s.split_once('x')?;
        let m: usize = a.parse().ok()?;
        (b.parse::<usize>().ok()? == m && m > 0).then_some(Variant::Irs(m))
    }

    /// No IRS, 5 × 5 and 10 × 10.
    pub fn snr_sweep_set() -> Vec<Variant> {
        vec![Variant::NoIrs, Variant::Irs(5), Variant::Irs(10)]
    }

    /// The configured IRS against no IRS.
    pub fn user_sweep_set(scenario: &Scenario) -> Vec<Variant> {
        let m = scenario.config().irs.grid_m;
        vec![Variant::Irs(m), Variant::NoIrs]
    }
}

/// Running per-user means over drops.
struct DropMean {
    sum_rate: f64,
    per_user: Vec<f64>,
    n: usize,
}

impl DropMean {
    fn new(users: usize) -> Self {
        DropMean {
            sum_rate: 0.0,
            per_user: vec![0.0; users],
            n: 0,
        }
    }

    fn add(&mut self, results: &[LinkResult]) {
        for (acc, r) in self.per_user.iter_mut().zip(results) {
            *acc += r.rate;
        }
        self.sum_rate += results.iter().map(|r| r.rate).sum::<f64>();
        self.n += 1;
    }

    fn row(&self, sweep_var: f64, variant: &str) -> ResultRow {
        let n = self.n.max(1) as f64;
        ResultRow {
            sweep_var,
            variant: variant.to_string(),
            sum_rate_bps: self.sum_rate / n,
            per_user_rates_bps: self.per_user.iter().map(|r| r / n).collect(),
        }
    }
}

/// Sum rate against transmit SNR for each variant, averaged over `drops`
/// user placements that are shared by all variants and points.
pub fn sweep_snr(
    scenario: &Scenario,
    snr_points_db: &[f64],
    drops: usize,
    variants: &[Variant],
) -> Result<ResultTable> {
    if snr_points_db.is_empty() {
        return Err(Error::validation("sweep.snr_db", "must not be empty"));
    }
    let powers: Vec<f64> = snr_points_db
        .iter()
        .map(|&s| scenario.transmit_power_for_snr(s))
        .collect();
    if let Some((s, p)) = snr_points_db
        .iter()
        .zip(&powers)
        .find(|(_, &p)| p > scenario.eye_safety_cap)
    {
        return Err(Error::validation(
            "sweep.snr_db",
            format!(
                "{s} dB needs P_tot = {p:.4} W, above power.eye_safety_cap {} W",
                scenario.eye_safety_cap
            ),
        ));
    }
    let k = scenario.users.len();
    let mut table = ResultTable::default();
    for &variant in variants {
        let sc = scenario.with_variant(variant)?;
        let mut means: Vec<DropMean> = powers.iter().map(|_| DropMean::new(k)).collect();
        for d in 0..drops.max(1) as u64 {
            let users = sc.users_for_drop(d, k)?;
            let net = network_channels(&sc, &users)?;
            for (mean, &p) in means.iter_mut().zip(&powers) {
                mean.add(&net.results(&sc, p)?);
            }
        }
        let label = variant.label();
        for (mean, &s) in means.iter().zip(snr_points_db) {
            table.rows.push(mean.row(s, &label));
        }
    }
    table.sort();
    Ok(table)
}

/// Sum rate against user count at the scenario's P_tot. Within a drop the
/// first K users are the same for every K.
pub fn sweep_users(
    scenario: &Scenario,
    k_values: &[usize],
    drops: usize,
    variants: &[Variant],
) -> Result<ResultTable> {
    if k_values.contains(&0) {
        return Err(Error::validation("sweep.k_values", "every K must be >= 1"));
    }
    let k_max = k_values.iter().copied().max().unwrap_or(0);
    let mut table = ResultTable::default();
    for &variant in variants {
        let sc = scenario.with_variant(variant)?;
        let mut means: Vec<DropMean> = k_values.iter().map(|&k| DropMean::new(k)).collect();
        for d in 0..drops.max(1) as u64 {
            let all = sc.users_for_drop(d, k_max)?;
            for (mean, &k) in means.iter_mut().zip(k_values) {
                let users = &all[..k];
                let net = network_channels(&sc, users)?;
                mean.add(&net.results(&sc, sc.p_tot)?);
            }
        }
        let label = variant.label();
        for (mean, &k) in means.iter().zip(k_values) {
            table.rows.push(mean.row(k as f64, &label));
        }
    }
    table.sort();
    Ok(table)
}
