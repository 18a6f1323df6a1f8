//! Independent reference computations shared by the integration tests and
//! the acceptance target. Nothing here calls the closed forms under test.

#![allow(dead_code)]

use std::f64::consts::PI;

use num_complex::Complex64;

/// Beam radius from the complex beam parameter q(d) = d + i·z_R, using
/// 1/q = 1/R − i·λ/(π·W²).
pub fn waist_from_q(w0: f64, wavelength: f64, d: f64) -> f64 {
    let z_r = PI * w0 * w0 / wavelength;
    let q = Complex64::new(d, z_r);
    let inv = q.inv();
    (-wavelength / (PI * inv.im)).sqrt()
}

pub fn gaussian_intensity(power: f64, w: f64, r: f64) -> f64 {
    2.0 * power / (PI * w * w) * (-2.0 * r * r / (w * w)).exp()
}

/// Composite Simpson rule with `n` (even) intervals.
pub fn simpson(f: impl Fn(f64) -> f64, a: f64, b: f64, n: usize) -> f64 {
    assert!(n.is_multiple_of(2));
    let h = (b - a) / n as f64;
    let mut s = f(a) + f(b);
    for i in 1..n {
        let x = a + h * i as f64;
        s += if i % 2 == 1 { 4.0 } else { 2.0 } * f(x);
    }
    s * h / 3.0
}

/// Power through a centred circle by radial quadrature of the intensity.
pub fn circle_power_quadrature(power: f64, w: f64, r0: f64) -> f64 {
    simpson(
        |r| gaussian_intensity(power, w, r) * 2.0 * PI * r,
        0.0,
        r0,
        4000,
    )
}

/// Power through an axis-aligned rectangle by 2-D Simpson quadrature.
pub fn rectangle_power_quadrature(
    power: f64,
    w: f64,
    width: f64,
    height: f64,
    offset: (f64, f64),
    n: usize,
) -> f64 {
    let (x0, x1) = (offset.0 - width / 2.0, offset.0 + width / 2.0);
    let (y0, y1) = (offset.1 - height / 2.0, offset.1 + height / 2.0);
    simpson(
        |x| simpson(|y| gaussian_intensity(power, w, x.hypot(y)), y0, y1, n),
        x0,
        x1,
        n,
    )
}

pub type P3 = [f64; 3];

pub fn sub(a: P3, b: P3) -> P3 {
    [a[0] - b[0], a[1] - b[1], a[2] - b[2]]
}
pub fn add(a: P3, b: P3) -> P3 {
    [a[0] + b[0], a[1] + b[1], a[2] + b[2]]
}
pub fn scale(a: P3, s: f64) -> P3 {
    [a[0] * s, a[1] * s, a[2] * s]
}
pub fn dot(a: P3, b: P3) -> f64 {
    a[0] * b[0] + a[1] * b[1] + a[2] * b[2]
}
pub fn cross(a: P3, b: P3) -> P3 {
    [
        a[1] * b[2] - a[2] * b[1],
        a[2] * b[0] - a[0] * b[2],
        a[0] * b[1] - a[1] * b[0],
    ]
}
pub fn norm(a: P3) -> f64 {
    dot(a, a).sqrt()
}
pub fn unit(a: P3) -> P3 {
    scale(a, 1.0 / norm(a))
}

/// Mirror image of `p` across the plane through `c` with unit normal `n`.
pub fn image(p: P3, c: P3, n: P3) -> P3 {
    sub(p, scale(n, 2.0 * dot(sub(p, c), n)))
}

/// Branch normal for azimuth/elevation in degrees, facing up.
pub fn up_normal(az_deg: f64, el_deg: f64) -> P3 {
    let (az, el) = (az_deg.to_radians(), el_deg.to_radians());
    [el.cos() * az.cos(), el.cos() * az.sin(), el.sin()]
}

/// Reference AP → mirror → receiver power for a unit-power beam aimed at the
/// mirror centre. The receiver disc of radius `r0` sits transverse to the
/// reflected path at `user`. Each disc point is imaged back across the
/// mirror plane; it receives light when the straight line from the AP to
/// its image crosses the mirror plane inside the `width` × `height`
/// rectangle, and then sees the free-space field of the real beam at the
/// image point, scaled by `rho`.
#[allow(clippy::too_many_arguments)]
pub fn two_bounce_quadrature(
    ap: P3,
    center: P3,
    normal: P3,
    width: f64,
    height: f64,
    rho: f64,
    user: P3,
    r0: f64,
    w0: f64,
    wavelength: f64,
) -> f64 {
    let axis = unit(sub(center, ap));
    // rectangle axes: horizontal in the mirror plane, then the second in-plane axis
    let zhat = [0.0, 0.0, 1.0];
    let u_ax = {
        let c = cross(zhat, normal);
        if norm(c) < 1e-12 {
            [1.0, 0.0, 0.0]
        } else {
            unit(c)
        }
    };
    let v_ax = cross(normal, u_ax);

    let out = unit(sub(user, center));
    let e1 = {
        let c = cross(out, zhat);
        if norm(c) < 1e-12 {
            unit(cross(out, [1.0, 0.0, 0.0]))
        } else {
            unit(c)
        }
    };
    let e2 = cross(out, e1);

    let nr = 400;
    let nt = 256;
    let ring = |r: f64| -> f64 {
        let mut acc = 0.0;
        for k in 0..nt {
            let t = 2.0 * PI * k as f64 / nt as f64;
            let p = add(user, add(scale(e1, r * t.cos()), scale(e2, r * t.sin())));
            let img = image(p, center, normal);
            let dir = sub(img, ap);
            let denom = dot(dir, normal);
            if denom.abs() < 1e-15 {
                continue;
            }
            let s = dot(sub(center, ap), normal) / denom;
            if !(0.0..=1.0).contains(&s) {
                continue;
            }
            let hit = sub(add(ap, scale(dir, s)), center);
            if dot(hit, u_ax).abs() > width / 2.0 || dot(hit, v_ax).abs() > height / 2.0 {
                continue;
            }
            let rel = sub(img, ap);
            let along = dot(rel, axis);
            let radial = norm(sub(rel, scale(axis, along)));
            let w = waist_from_q(w0, wavelength, along);
            acc += gaussian_intensity(1.0, w, radial);
        }
        acc * 2.0 * PI / nt as f64 * r
    };
    rho * simpson(ring, 0.0, r0, nr)
}

/// Exhaustive best total gain with at most one mirror per user.
pub fn brute_force_one_each(gains: &[Vec<f64>]) -> f64 {
    fn rec(gains: &[Vec<f64>], u: usize, used: &mut Vec<bool>) -> f64 {
        if u == gains.len() {
            return 0.0;
        }
        let mut best = rec(gains, u + 1, used);
        for m in 0..used.len() {
            if !used[m] {
                used[m] = true;
                best = best.max(gains[u][m] + rec(gains, u + 1, used));
                used[m] = false;
            }
        }
        best
    }
    let mirrors = gains.first().map_or(0, Vec::len);
    rec(gains, 0, &mut vec![false; mirrors])
}
