//! JSON configuration document.
//!
//! Every field has a default, so `{}` describes the reference scenario: a
//! 5 × 5 × 3 m room, one five-branch ceiling AP, a 5 × 5 mirror wall and
//! four users. See `docs/config.md` for the key reference.

use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::channel::{default_adr, AdrBranch};
use crate::error::{Error, Result};
use crate::geometry::{Orientation, Room, Vec3};
use crate::link::NoiseParams;
use crate::network::{build_default_scenario, Scenario};

#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct ConfigDocument {
    pub room: Room,
    pub adt: AdtConfig,
    pub irs: IrsConfig,
    pub users: UsersConfig,
    pub noise: NoiseParams,
    pub power: PowerConfig,
    pub sweep: SweepSpec,
    pub output: OutputConfig,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct AdtConfig {
    pub center: Vec3,
    /// Horizontal distance of tilted branches from the centre, m.
    pub side_offset: f64,
    /// One entry per branch; branches with elevation below 90° sit
    /// `side_offset` out along their azimuth.
    pub branch_orientations: Vec<Orientation>,
    /// N for the N × N VCSEL array of each branch.
    pub vcsels_per_side: usize,
    pub waist_w0: f64,
    pub wavelength: f64,
}

impl Default for AdtConfig {
    fn default() -> Self {
        let mut branch_orientations = vec![Orientation {
            azimuth_deg: 0.0,
            elevation_deg: 90.0,
        }];
        branch_orientations.extend([0.0, 90.0, 180.0, 270.0].map(|az| Orientation {
            azimuth_deg: az,
            elevation_deg: 65.0,
        }));
        AdtConfig {
            center: Vec3::new(2.5, 2.5, 3.0),
            side_offset: 0.3,
            branch_orientations,
            vcsels_per_side: 5,
            waist_w0: 5e-6,
            wavelength: 1550e-9,
        }
    }
}

/// Room wall carrying the mirror array, named by the fixed coordinate.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Wall {
    XMin,
    XMax,
    YMin,
    YMax,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct IrsConfig {
    pub enabled: bool,
    pub wall: Wall,
    /// M for the M × M mirror array.
    pub grid_m: usize,
    pub element_width: f64,
    pub element_height: f64,
    pub reflectivity: f64,
    /// Panel centre coordinate along the wall, m.
    pub center_along: f64,
    pub center_height: f64,
}

impl Default for IrsConfig {
    fn default() -> Self {
        IrsConfig {
            enabled: true,
            wall: Wall::YMax,
            grid_m: 5,
            element_width: 0.15,
            element_height: 0.10,
            reflectivity: 0.95,
            center_along: 2.5,
            center_height: 1.5,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct UsersConfig {
    /// Number of users; `null` means 4, or the number of explicit positions.
    pub count: Option<usize>,
    pub seed: u64,
    /// Fixed positions; when absent users are drawn uniformly on the
    /// receiver plane.
    pub positions: Option<Vec<Vec3>>,
    pub receiver_height: f64,
    /// Indices of users whose direct path is blocked.
    pub blocked: Vec<usize>,
    pub adr: Vec<AdrBranch>,
}

impl Default for UsersConfig {
    fn default() -> Self {
        UsersConfig {
            count: None,
            seed: 1,
            positions: None,
            receiver_height: 0.0,
            blocked: Vec::new(),
            adr: default_adr(),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum PowerSplit {
    /// P_tot shared equally by the direct beam and every mirror beam.
    Equal,
    /// All of P_tot on the direct beam when it reaches the user; mirror
    /// beams only carry power otherwise.
    LosPriority,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct PowerConfig {
    /// Optical power per user, W.
    pub p_tot: f64,
    /// Per-beam cap, W.
    pub eye_safety_cap: f64,
    pub power_split: PowerSplit,
    /// `null` for no limit.
    pub max_mirrors_per_user: Option<usize>,
}

impl Default for PowerConfig {
    fn default() -> Self {
        PowerConfig {
            p_tot: 0.01,
            eye_safety_cap: 2.0,
            power_split: PowerSplit::Equal,
            max_mirrors_per_user: None,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct SweepSpec {
    /// Transmit SNR points, dB.
    pub snr_db: Vec<f64>,
    pub k_values: Vec<usize>,
    /// Independent user placements averaged per sweep point.
    pub drops: usize,
}

impl Default for SweepSpec {
    fn default() -> Self {
        SweepSpec {
            snr_db: (0..13).map(|i| 65.0 + 5.0 * i as f64).collect(),
            k_values: (1..=8).collect(),
            drops: 20,
        }
    }
}

impl SweepSpec {
    pub fn validate(&self) -> Result<()> {
        if self.snr_db.is_empty() {
            return Err(Error::validation("sweep.snr_db", "must not be empty"));
        }
        if self.snr_db.iter().any(|s| !s.is_finite()) {
            return Err(Error::validation("sweep.snr_db", "must be finite"));
        }
        if self.k_values.is_empty() {
            return Err(Error::validation("sweep.k_values", "must not be empty"));
        }
        if self.k_values.contains(&0) {
            return Err(Error::validation("sweep.k_values", "every K must be >= 1"));
        }
        if self.drops == 0 {
            return Err(Error::validation("sweep.drops", "must be >= 1"));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct OutputConfig {
    pub simulate_csv: String,
    pub snr_csv: String,
    pub snr_svg: String,
    pub users_csv: String,
    pub users_svg: String,
}

impl Default for OutputConfig {
    fn default() -> Self {
        OutputConfig {
            simulate_csv: "simulate.csv".into(),
            snr_csv: "fig2.csv".into(),
            snr_svg: "fig2.svg".into(),
            users_csv: "fig3.csv".into(),
            users_svg: "fig3.svg".into(),
        }
    }
}

impl ConfigDocument {
    pub fn from_json(text: &str) -> Result<Self> {
        let de = &mut serde_json::Deserializer::from_str(text);
        serde_path_to_error::deserialize(de).map_err(|e| {
            let path = e.path().to_string();
            Error::Parse {
                path,
                message: e.into_inner().to_string(),
            }
        })
    }

    pub fn to_json(&self) -> String {
        let mut s = serde_json::to_string_pretty(self).expect("config serializes");
        s.push('\n');
        s
    }
}

/// Read, validate and build. Missing keys take their defaults.
pub fn load_config(path: impl AsRef<Path>) -> Result<(Scenario, SweepSpec)> {
    let path = path.as_ref();
    let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    let doc = ConfigDocument::from_json(&text)?;
    let scenario = build_default_scenario(&doc)?;
    doc.sweep.validate()?;
    Ok((scenario, doc.sweep))
}
