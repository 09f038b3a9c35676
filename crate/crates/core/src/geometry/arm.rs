//! Generic serial-chain forward kinematics and link/obstacle collision.

use alloc::vec::Vec;

use crate::math;

/// One revolute joint: rotate about `axis` by the joint angle, then
/// translate by `translation` in the rotated frame.
#[derive(Debug, Clone, PartialEq)]
pub struct Link {
    pub axis: [f64; 3],
    pub translation: [f64; 3],
}

impl Link {
    /// Planar link of the given length, rotating about the z axis.
    pub fn planar(length: f64) -> Self {
        Link {
            axis: [0.0, 0.0, 1.0],
            translation: [length, 0.0, 0.0],
        }
    }
}

/// A slab obstacle `{x > x_gt, y_lo < y < y_hi}`, unbounded in z.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Slab {
    pub x_gt: f64,
    pub y_lo: f64,
    pub y_hi: f64,
}

impl Default for Slab {
    fn default() -> Self {
        Slab {
            x_gt: 0.1,
            y_lo: -0.1,
            y_hi: 0.1,
        }
    }
}

type Mat3 = [[f64; 3]; 3];

fn mat_mul(a: &Mat3, b: &Mat3) -> Mat3 {
    let mut out = [[0.0; 3]; 3];
    for i in 0..3 {
        for j in 0..3 {
            for (k, bk) in b.iter().enumerate() {
                out[i][j] += a[i][k] * bk[j];
            }
        }
    }
    out
}

fn mat_vec(a: &Mat3, v: &[f64; 3]) -> [f64; 3] {
    let mut out = [0.0; 3];
    for (i, row) in a.iter().enumerate() {
        out[i] = row[0] * v[0] + row[1] * v[1] + row[2] * v[2];
    }
    out
}

/// Rodrigues rotation matrix about a unit axis.
fn rotation(axis: &[f64; 3], angle: f64) -> Mat3 {
    let (x, y, z) = (axis[0], axis[1], axis[2]);
    let c = math::cos(angle);
    let s = math::sin(angle);
    let t = 1.0 - c;
    [
        [t * x * x + c, t * x * y - s * z, t * x * z + s * y],
        [t * x * y + s * z, t * y * y + c, t * y * z - s * x],
        [t * x * z - s * y, t * y * z + s * x, t * z * z + c],
    ]
}

/// Base-to-tip joint positions for the chain at the given joint angles.
/// Returns `links.len() + 1` points, starting at the origin.
pub fn forward_kinematics(links: &[Link], angles: &[f64]) -> Vec<[f64; 3]> {
    debug_assert_eq!(links.len(), angles.len());
    let mut rot: Mat3 = [[1.0, 0.0, 0.0], [0.0, 1.0, 0.0], [0.0, 0.0, 1.0]];
    let mut pos = [0.0_f64; 3];
    let mut out = Vec::with_capacity(links.len() + 1);
    out.push(pos);
    for (link, &angle) in links.iter().zip(angles) {
        rot = mat_mul(&rot, &rotation(&link.axis, angle));
        let step = mat_vec(&rot, &link.translation);
        pos = [pos[0] + step[0], pos[1] + step[1], pos[2] + step[2]];
        out.push(pos);
    }
    out
}

/// The open t-interval of [0, 1] where `a + t (b - a)` satisfies
/// `lo < value < hi`. Returned as (start, end); empty if start >= end.
fn strip_interval(a: f64, b: f64, lo: f64, hi: f64) -> (f64, f64) {
    let d = b - a;
    if math::abs(d) < 1e-300 {
        return if a > lo && a < hi {
            (0.0, 1.0)
        } else {
            (1.0, 0.0)
        };
    }
    let (mut t0, mut t1) = ((lo - a) / d, (hi - a) / d);
    if t0 > t1 {
        core::mem::swap(&mut t0, &mut t1);
    }
    (t0.max(0.0), t1.min(1.0))
}

/// Whether the segment p -> q passes through the (open) slab.
pub fn segment_hits_slab(p: &[f64; 3], q: &[f64; 3], slab: &Slab) -> bool {
    let (x0, x1) = strip_interval(p[0], q[0], slab.x_gt, f64::INFINITY);
    let (y0, y1) = strip_interval(p[1], q[1], slab.y_lo, slab.y_hi);
    let lo = x0.max(y0);
    let hi = x1.min(y1);
    hi > lo
}

/// Whether any link segment of the chain at `angles` intersects the slab.
pub fn chain_collides(links: &[Link], angles: &[f64], slab: &Slab) -> bool {
    let joints = forward_kinematics(links, angles);
    joints
        .windows(2)
        .any(|w| segment_hits_slab(&w[0], &w[1], slab))
}
