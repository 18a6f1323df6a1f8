//! Quick invariant checks run by the `selftest` command.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::beam::{circle_fraction, rectangle_fraction};
use crate::config::ConfigDocument;
use crate::geometry::{specular_reflect, steer_mirror, Vec3};
use crate::link::achievable_rate;
use crate::network::{
    build_default_scenario, greedy_assignment, network_channels, sweep_snr, Variant,
};

#[derive(Debug, Clone, PartialEq)]
pub struct Check {
    pub name: &'static str,
    pub passed: bool,
    pub detail: String,
}

impl std::fmt::Display for Check {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        let tag = if self.passed { "PASS" } else { "FAIL" };
        write!(f, "{tag} {}: {}", self.name, self.detail)
    }
}

fn check(name: &'static str, result: Result<String, String>) -> Check {
    match result {
        Ok(detail) => Check {
            name,
            passed: true,
            detail,
        },
        Err(detail) => Check {
            name,
            passed: false,
            detail,
        },
    }
}

fn random_unit(rng: &mut ChaCha8Rng) -> Vec3 {
    loop {
        let v = Vec3::new(
            rng.gen_range(-1.0..1.0),
            rng.gen_range(-1.0..1.0),
            rng.gen_range(-1.0..1.0),
        );
        if let Some(u) = v.normalized().filter(|_| v.norm() > 0.1) {
            return u;
        }
    }
}

fn reflection() -> Result<String, String> {
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    for _ in 0..200 {
        let n = random_unit(&mut rng);
        let i = random_unit(&mut rng);
        let r = specular_reflect(i, n);
        let back = specular_reflect(r, n);
        if (back - i).norm() > 1e-12
            || (r.norm() - 1.0).abs() > 1e-12
            || (r.dot(n) + i.dot(n)).abs() > 1e-12
        {
            return Err(format!("reflection law broken for i={i:?} n={n:?}"));
        }
    }
    Ok("200 random reflections".into())
}

fn steering() -> Result<String, String> {
    let mut rng = ChaCha8Rng::seed_from_u64(12);
    for _ in 0..200 {
        let ap = Vec3::new(rng.gen_range(0.0..5.0), rng.gen_range(0.0..5.0), 3.0);
        let m = Vec3::new(rng.gen_range(0.0..5.0), 5.0, rng.gen_range(0.5..2.5));
        let u = Vec3::new(rng.gen_range(0.0..5.0), rng.gen_range(0.0..4.9), 0.0);
        let n = steer_mirror(ap, m, u).map_err(|e| e.to_string())?;
        let inc = (m - ap).normalized().unwrap();
        let out = (u - m).normalized().unwrap();
        if (specular_reflect(inc, n) - out).norm() > 1e-9 {
            return Err(format!("steered mirror at {m:?} misses user {u:?}"));
        }
    }
    Ok("200 steered mirrors hit their users".into())
}

fn capture_bounds() -> Result<String, String> {
    let mut rng = ChaCha8Rng::seed_from_u64(13);
    for _ in 0..200 {
        let w = rng.gen_range(1e-3..1.0);
        let side = rng.gen_range(1e-3..1.0);
        let square = rectangle_fraction(side, side, (0.0, 0.0), w);
        let inner = circle_fraction(side / 2.0, w);
        let outer = circle_fraction(side / std::f64::consts::SQRT_2, w);
        if !(inner <= square + 1e-12 && square <= outer + 1e-12 && outer <= 1.0) {
            return Err(format!(
                "square capture {square} outside [{inner}, {outer}]"
            ));
        }
    }
    Ok("inscribed <= square <= circumscribed on 200 cases".into())
}

fn rate_unit_point() -> Result<String, String> {
    let r = achievable_rate(2.0 * std::f64::consts::PI / std::f64::consts::E, 1.5e9);
    if (r - 1.5e9).abs() <= 1e-6 {
        Ok(format!("rate at gamma = 2pi/e is {r:.6e}"))
    } else {
        Err(format!("rate at gamma = 2pi/e is {r}, expected B"))
    }
}

fn greedy_worked_example() -> Result<String, String> {
    let gains = [vec![2.0, 1.0], vec![1.0, 3.0]];
    let a = greedy_assignment(&gains, Some(1), None).map_err(|e| e.to_string())?;
    if a.per_user == vec![vec![0], vec![1]] {
        Ok("2x2 greedy picks the optimum, total 5".into())
    } else {
        Err(format!("unexpected assignment {:?}", a.per_user))
    }
}

fn config_round_trip() -> Result<String, String> {
    let s = build_default_scenario(&ConfigDocument::default()).map_err(|e| e.to_string())?;
    let doc = ConfigDocument::from_json(&s.config().to_json()).map_err(|e| e.to_string())?;
    let t = build_default_scenario(&doc).map_err(|e| e.to_string())?;
    if s == t {
        Ok("effective config rebuilds the same scenario".into())
    } else {
        Err("round-tripped scenario differs".into())
    }
}

fn scenario_checks() -> Result<String, String> {
    let s = build_default_scenario(&ConfigDocument::default()).map_err(|e| e.to_string())?;
    for v in Variant::snr_sweep_set() {
        let sc = s.with_variant(v).map_err(|e| e.to_string())?;
        let net = network_channels(&sc, &sc.users).map_err(|e| e.to_string())?;
        net.assignment
            .validate(sc.mirror_count(), sc.max_mirrors_per_user)
            .map_err(|e| e.to_string())?;
        if net.assignment.total_mirrors() + sc.users.len() > sc.adt.capacity() {
            return Err(format!("{}: more beams than VCSELs", v.label()));
        }
        let results = net.results(&sc, sc.p_tot).map_err(|e| e.to_string())?;
        if results.iter().any(|r| !r.rate.is_finite() || r.rate < 0.0) {
            return Err(format!("{}: non-finite or negative rate", v.label()));
        }
    }
    Ok("assignments disjoint, within capacity, rates finite".into())
}

fn ordering() -> Result<String, String> {
    let s = build_default_scenario(&ConfigDocument::default()).map_err(|e| e.to_string())?;
    let points = [65.0, 95.0, 125.0];
    let t = sweep_snr(&s, &points, 3, &Variant::snr_sweep_set()).map_err(|e| e.to_string())?;
    let none = t.series("none");
    let five = t.series("5x5");
    let ten = t.series("10x10");
    for i in 0..points.len() {
        if !(ten[i].1 >= five[i].1 && five[i].1 >= none[i].1) {
            return Err(format!("ordering broken at {} dB", points[i]));
        }
    }
    Ok("10x10 >= 5x5 >= none at 65, 95, 125 dB".into())
}

/// Run every check in a fixed order.
pub fn run_selftest() -> Vec<Check> {
    vec![
        check("reflection_law", reflection()),
        check("mirror_steering", steering()),
        check("capture_bounds", capture_bounds()),
        check("rate_unit_point", rate_unit_point()),
        check("greedy_worked_example", greedy_worked_example()),
        check("config_round_trip", config_round_trip()),
        check("scenario_invariants", scenario_checks()),
        check("irs_ordering", ordering()),
    ]
}
