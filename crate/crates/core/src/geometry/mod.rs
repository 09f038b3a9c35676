//! Environment definitions: Finsler norms, charts, local costs, free-space
//! predicates, penalties, sampling and clamping/projection.
//!
//! A point lives in a *state representation* space of dimension `rep_dim`;
//! angles are embedded as consecutive `(cos, sin)` pairs, so `rep_dim` can
//! exceed the manifold dimension `man_dim`. Tangent vectors always have
//! `man_dim` components (angular components are scalar angular velocities).

pub mod arm;

use alloc::vec;
use alloc::vec::Vec;

use rand::Rng;

use crate::error::{CoreError, Result};
use crate::math;

pub use arm::{Link, Slab};

/// Retry cap for free-space rejection sampling.
pub const SAMPLE_CAP: u32 = 10_000;

/// A point in the state-representation coordinate space.
#[derive(Debug, Clone, PartialEq)]
pub struct StatePoint {
    pub coords: Vec<f64>,
}

impl StatePoint {
    pub fn new(coords: Vec<f64>) -> Result<Self> {
        if coords.iter().any(|c| !c.is_finite()) {
            return Err(CoreError::InvalidInput("non-finite state coordinate"));
        }
        Ok(StatePoint { coords })
    }

    pub fn dim(&self) -> usize {
        self.coords.len()
    }
}

/// A tangent vector in manifold coordinates.
#[derive(Debug, Clone, PartialEq)]
pub struct TangentVector {
    pub components: Vec<f64>,
}

impl TangentVector {
    pub fn new(components: Vec<f64>) -> Result<Self> {
        if components.iter().any(|c| !c.is_finite()) {
            return Err(CoreError::InvalidInput("non-finite tangent component"));
        }
        Ok(TangentVector { components })
    }
}

/// An axis-aligned obstacle rectangle (closed).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Rect {
    pub x_min: f64,
    pub x_max: f64,
    pub y_min: f64,
    pub y_max: f64,
}

impl Rect {
    pub fn contains(&self, x: f64, y: f64) -> bool {
        x >= self.x_min && x <= self.x_max && y >= self.y_min && y <= self.y_max
    }
}

/// How a slice of representation coordinates is constrained and clamped.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum CoordGroup {
    /// Two planar coordinates constrained to the closed unit disk
    /// (radial projection on clamping). Two tangent components.
    Disk,
    /// One box-clamped coordinate. One tangent component.
    Interval { lo: f64, hi: f64 },
    /// An angle stored as a `(cos, sin)` pair. One tangent component
    /// (the angular velocity); displacement is the wrapped difference.
    AnglePair,
}

impl CoordGroup {
    fn rep_len(&self) -> usize {
        match self {
            CoordGroup::Interval { .. } => 1,
            _ => 2,
        }
    }

    fn man_len(&self) -> usize {
        match self {
            CoordGroup::Disk => 2,
            _ => 1,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
enum EnvKind {
    Matsumoto,
    CarLike {
        c_c: f64,
        r_min: f64,
    },
    Euclid2d {
        obstacles: Vec<Rect>,
        boundary_unsafe: bool,
    },
    KinematicArm {
        links: Vec<Link>,
        slab: Slab,
    },
    MultiAgent {
        agents: usize,
        d_thres: f64,
    },
}

/// A metric descriptor: Finsler norm, chart/clamping rules, free-space
/// predicate and collision penalty.
#[derive(Debug, Clone, PartialEq)]
pub struct Environment {
    kind: EnvKind,
    pub c_p: f64,
    pub symmetric: bool,
    groups: Vec<CoordGroup>,
}

impl Environment {
    /// Round field with a central mountain: Matsumoto slope metric on the
    /// unit disk with height h(p) = -|p|^2.
    pub fn matsumoto() -> Self {
        Environment {
            kind: EnvKind::Matsumoto,
            c_p: 0.0,
            symmetric: false,
            groups: vec![CoordGroup::Disk],
        }
    }

    /// Unidirectional car-like vehicle on the unit disk with heading on S^1.
    pub fn carlike() -> Self {
        Environment {
            kind: EnvKind::CarLike {
                c_c: 100.0,
                r_min: 0.2,
            },
            c_p: 0.0,
            symmetric: false,
            groups: vec![CoordGroup::Disk, CoordGroup::AnglePair],
        }
    }

    /// Euclidean plane [-1, 1]^2 with rectangular obstacles; the outside
    /// boundary also counts as unsafe.
    pub fn euclid2d(obstacles: Vec<Rect>) -> Self {
        Environment {
            kind: EnvKind::Euclid2d {
                obstacles,
                boundary_unsafe: true,
            },
            c_p: 10.0,
            symmetric: true,
            groups: vec![
                CoordGroup::Interval { lo: -1.0, hi: 1.0 },
                CoordGroup::Interval { lo: -1.0, hi: 1.0 },
            ],
        }
    }

    /// Obstacle-free Euclidean plane [-1, 1]^2 (trivial free space).
    pub fn euclid2d_free() -> Self {
        Environment {
            kind: EnvKind::Euclid2d {
                obstacles: Vec::new(),
                boundary_unsafe: false,
            },
            c_p: 0.0,
            symmetric: true,
            groups: vec![
                CoordGroup::Interval { lo: -1.0, hi: 1.0 },
                CoordGroup::Interval { lo: -1.0, hi: 1.0 },
            ],
        }
    }

    /// The default obstacle map: two staggered walls forming an S-shaped
    /// corridor. The exact rectangles are a fixture, not taken from any
    /// published map.
    pub fn euclid2d_default_map() -> Self {
        Self::euclid2d(vec![
            Rect {
                x_min: -0.55,
                x_max: -0.25,
                y_min: -1.0,
                y_max: 0.35,
            },
            Rect {
                x_min: 0.25,
                x_max: 0.55,
                y_min: -0.35,
                y_max: 1.0,
            },
        ])
    }

    /// Serial-chain arm in joint space with a slab obstacle in the
    /// workspace. Joint limits become the clamp box.
    pub fn kinematic_arm(links: Vec<Link>, limits: Vec<(f64, f64)>, slab: Slab) -> Result<Self> {
        if links.len() != limits.len() {
            return Err(CoreError::ShapeMismatch {
                expected: links.len(),
                got: limits.len(),
            });
        }
        let groups = limits
            .iter()
            .map(|&(lo, hi)| CoordGroup::Interval { lo, hi })
            .collect();
        Ok(Environment {
            kind: EnvKind::KinematicArm { links, slab },
            c_p: 10.0,
            symmetric: true,
            groups,
        })
    }

    /// The shipped arm: a planar 3-link chain with unit links in the
    /// [-pi, pi]^3 joint box and the default slab obstacle.
    pub fn arm3() -> Self {
        use core::f64::consts::PI;
        let links = vec![Link::planar(1.0), Link::planar(1.0), Link::planar(1.0)];
        let limits = vec![(-PI, PI); 3];
        Self::kinematic_arm(links, limits, Slab::default()).expect("matching link/limit counts")
    }

    /// `agents` point agents in [-1, 1]^2; a state is free when every
    /// pairwise distance is at least `d_thres`.
    pub fn multi_agent(agents: usize, d_thres: f64) -> Self {
        let mut groups = Vec::with_capacity(agents * 2);
        for _ in 0..agents * 2 {
            groups.push(CoordGroup::Interval { lo: -1.0, hi: 1.0 });
        }
        Environment {
            kind: EnvKind::MultiAgent { agents, d_thres },
            c_p: 10.0,
            symmetric: true,
            groups,
        }
    }

    /// Three agents with the default threshold 0.5.
    pub fn three_agents() -> Self {
        Self::multi_agent(3, 0.5)
    }

    pub fn groups(&self) -> &[CoordGroup] {
        &self.groups
    }

    /// Dimension of the state-representation space.
    pub fn rep_dim(&self) -> usize {
        self.groups.iter().map(CoordGroup::rep_len).sum()
    }

    /// Dimension of the underlying manifold (tangent vectors).
    pub fn man_dim(&self) -> usize {
        self.groups.iter().map(CoordGroup::man_len).sum()
    }

    pub fn kind_name(&self) -> &'static str {
        match self.kind {
            EnvKind::Matsumoto => "matsumoto",
            EnvKind::CarLike { .. } => "carlike",
            EnvKind::Euclid2d { .. } => "euclid2d_obstacles",
            EnvKind::KinematicArm { .. } => "kinematic_arm",
            EnvKind::MultiAgent { .. } => "multi_agent",
        }
    }

    /// Obstacle rectangles of a planar environment (empty elsewhere).
    pub fn obstacle_rects(&self) -> &[Rect] {
        match &self.kind {
            EnvKind::Euclid2d { obstacles, .. } => obstacles,
            _ => &[],
        }
    }

    /// Checks finiteness and manifold bounds.
    pub fn validate_point(&self, p: &StatePoint) -> Result<()> {
        if p.coords.len() != self.rep_dim() {
            return Err(CoreError::ShapeMismatch {
                expected: self.rep_dim(),
                got: p.coords.len(),
            });
        }
        if p.coords.iter().any(|c| !c.is_finite()) {
            return Err(CoreError::InvalidInput("non-finite state coordinate"));
        }
        let mut i = 0;
        for g in &self.groups {
            match *g {
                CoordGroup::Disk => {
                    if math::hypot(p.coords[i], p.coords[i + 1]) > 1.0 + 1e-9 {
                        return Err(CoreError::Domain("point outside the unit disk"));
                    }
                }
                CoordGroup::Interval { lo, hi } => {
                    if p.coords[i] < lo - 1e-9 || p.coords[i] > hi + 1e-9 {
                        return Err(CoreError::Domain("coordinate outside its clamp box"));
                    }
                }
                CoordGroup::AnglePair => {
                    let n = math::hypot(p.coords[i], p.coords[i + 1]);
                    if math::abs(n - 1.0) > 1e-6 {
                        return Err(CoreError::Domain("angle pair not on the unit circle"));
                    }
                }
            }
            i += g.rep_len();
        }
        Ok(())
    }

    /// F(p, v): the Finsler norm of tangent vector `v` at `p`.
    pub fn finsler_norm(&self, p: &StatePoint, v: &TangentVector) -> Result<f64> {
        self.validate_point(p)?;
        if v.components.len() != self.man_dim() {
            return Err(CoreError::ShapeMismatch {
                expected: self.man_dim(),
                got: v.components.len(),
            });
        }
        if v.components.iter().any(|c| !c.is_finite()) {
            return Err(CoreError::InvalidInput("non-finite tangent component"));
        }
        let v = &v.components;
        Ok(match &self.kind {
            EnvKind::Matsumoto => {
                // h(p) = -|p|^2, grad h = -2p; F = alpha^2 / (alpha - beta).
                let beta = -2.0 * (v[0] * p.coords[0] + v[1] * p.coords[1]);
                let alpha = math::sqrt(v[0] * v[0] + v[1] * v[1] + beta * beta);
                if alpha - beta <= 0.0 {
                    // alpha >= |beta| with equality only at v = 0.
                    0.0
                } else {
                    alpha * alpha / (alpha - beta)
                }
            }
            EnvKind::CarLike { c_c, r_min } => {
                let theta = math::atan2(p.coords[3], p.coords[2]);
                let (st, ct) = (math::sin(theta), math::cos(theta));
                let side = -v[0] * st + v[1] * ct;
                let xi = (r_min * math::abs(v[2]) - v[0] * ct - v[1] * st).max(0.0);
                math::sqrt(v[0] * v[0] + v[1] * v[1] + c_c * (side * side + xi * xi))
            }
            EnvKind::Euclid2d { .. } | EnvKind::KinematicArm { .. } | EnvKind::MultiAgent { .. } => {
                math::norm(v)
            }
        })
    }

    /// Componentwise coordinate displacement from `x` to `y` as a tangent
    /// vector at `x`; angular components use the wrapped difference in
    /// [-pi, pi].
    pub fn displacement(&self, x: &StatePoint, y: &StatePoint) -> TangentVector {
        let mut out = Vec::with_capacity(self.man_dim());
        let mut i = 0;
        for g in &self.groups {
            match g {
                CoordGroup::Disk => {
                    out.push(y.coords[i] - x.coords[i]);
                    out.push(y.coords[i + 1] - x.coords[i + 1]);
                }
                CoordGroup::Interval { .. } => out.push(y.coords[i] - x.coords[i]),
                CoordGroup::AnglePair => {
                    let a = math::atan2(x.coords[i + 1], x.coords[i]);
                    let b = math::atan2(y.coords[i + 1], y.coords[i]);
                    out.push(math::wrap_angle(b - a));
                }
            }
            i += g.rep_len();
        }
        TangentVector { components: out }
    }

    /// Local cost C(x, y) = F(x, displacement(x, y)).
    pub fn local_cost(&self, x: &StatePoint, y: &StatePoint) -> Result<f64> {
        self.validate_point(y)?;
        let d = self.displacement(x, y);
        self.finsler_norm(x, &d)
    }

    /// Whether `p` lies in the free space.
    pub fn is_free(&self, p: &StatePoint) -> bool {
        match &self.kind {
            EnvKind::Matsumoto | EnvKind::CarLike { .. } => true,
            EnvKind::Euclid2d {
                obstacles,
                boundary_unsafe,
            } => {
                let (x, y) = (p.coords[0], p.coords[1]);
                if *boundary_unsafe && !(x > -1.0 && x < 1.0 && y > -1.0 && y < 1.0) {
                    return false;
                }
                !obstacles.iter().any(|r| r.contains(x, y))
            }
            EnvKind::KinematicArm { links, slab } => !arm::chain_collides(links, &p.coords, slab),
            EnvKind::MultiAgent { agents, d_thres } => {
                for i in 0..*agents {
                    for j in (i + 1)..*agents {
                        let dx = p.coords[2 * i] - p.coords[2 * j];
                        let dy = p.coords[2 * i + 1] - p.coords[2 * j + 1];
                        if math::hypot(dx, dy) < *d_thres {
                            return false;
                        }
                    }
                }
                true
            }
        }
    }

    /// P(x, y): 0 when both points are free or both unfree, c_P otherwise.
    pub fn penalty(&self, x: &StatePoint, y: &StatePoint) -> f64 {
        if self.is_free(x) == self.is_free(y) {
            0.0
        } else {
            self.c_p
        }
    }

    /// C'(x, y) = C(x, y) + P(x, y).
    pub fn obstructed_cost(&self, x: &StatePoint, y: &StatePoint) -> Result<f64> {
        Ok(self.local_cost(x, y)? + self.penalty(x, y))
    }

    /// Joint positions of the arm chain; only valid for the arm kind.
    pub fn forward_kinematics(&self, joint_angles: &[f64]) -> Result<Vec<[f64; 3]>> {
        match &self.kind {
            EnvKind::KinematicArm { links, .. } => {
                if joint_angles.len() != links.len() {
                    return Err(CoreError::ShapeMismatch {
                        expected: links.len(),
                        got: joint_angles.len(),
                    });
                }
                Ok(arm::forward_kinematics(links, joint_angles))
            }
            _ => Err(CoreError::InvalidInput(
                "forward kinematics is only defined for the kinematic arm",
            )),
        }
    }

    fn sample_raw<R: Rng + ?Sized>(&self, rng: &mut R) -> Option<Vec<f64>> {
        use core::f64::consts::PI;
        let mut out = Vec::with_capacity(self.rep_dim());
        for g in &self.groups {
            match *g {
                CoordGroup::Disk => {
                    let x = rng.gen::<f64>() * 2.0 - 1.0;
                    let y = rng.gen::<f64>() * 2.0 - 1.0;
                    if math::hypot(x, y) > 1.0 {
                        return None;
                    }
                    out.push(x);
                    out.push(y);
                }
                CoordGroup::Interval { lo, hi } => {
                    out.push(lo + rng.gen::<f64>() * (hi - lo));
                }
                CoordGroup::AnglePair => {
                    let theta = rng.gen::<f64>() * 2.0 * PI - PI;
                    out.push(math::cos(theta));
                    out.push(math::sin(theta));
                }
            }
        }
        Some(out)
    }

    /// A uniformly distributed free point, by rejection sampling from the
    /// uniform distribution on the coordinate box (or disk).
    pub fn sample_free<R: Rng + ?Sized>(&self, rng: &mut R) -> Result<StatePoint> {
        for _ in 0..SAMPLE_CAP {
            let Some(coords) = self.sample_raw(rng) else {
                continue;
            };
            let p = StatePoint { coords };
            if self.is_free(&p) {
                return Ok(p);
            }
        }
        Err(CoreError::UnsatisfiableEnvironment { tries: SAMPLE_CAP })
    }

    /// Clamp/project a raw representation vector onto the manifold:
    /// box clamping, radial disk projection, and S^1 normalization of
    /// angle pairs (a zero pair maps to (1, 0)).
    pub fn clamp_project(&self, raw: &[f64]) -> StatePoint {
        debug_assert_eq!(raw.len(), self.rep_dim());
        let mut out = Vec::with_capacity(raw.len());
        let mut i = 0;
        for g in &self.groups {
            match *g {
                CoordGroup::Disk => {
                    let (x, y) = (raw[i], raw[i + 1]);
                    let n = math::hypot(x, y);
                    if n > 1.0 {
                        out.push(x / n);
                        out.push(y / n);
                    } else {
                        out.push(x);
                        out.push(y);
                    }
                }
                CoordGroup::Interval { lo, hi } => out.push(raw[i].clamp(lo, hi)),
                CoordGroup::AnglePair => {
                    let x = raw[i].clamp(-1.0, 1.0);
                    let y = raw[i + 1].clamp(-1.0, 1.0);
                    let n = math::hypot(x, y);
                    if n == 0.0 {
                        out.push(1.0);
                        out.push(0.0);
                    } else {
                        out.push(x / n);
                        out.push(y / n);
                    }
                }
            }
            i += g.rep_len();
        }
        StatePoint { coords: out }
    }

    /// Move from `p` by `scale * v` in coordinates: box/disk coordinates
    /// add directly (clamped afterwards by the caller), angular components
    /// advance modulo 2*pi. Returns the raw representation vector.
    pub fn advance(&self, p: &StatePoint, v: &TangentVector, scale: f64) -> Vec<f64> {
        let mut out = Vec::with_capacity(self.rep_dim());
        let mut i = 0;
        let mut j = 0;
        for g in &self.groups {
            match g {
                CoordGroup::Disk => {
                    out.push(p.coords[i] + scale * v.components[j]);
                    out.push(p.coords[i + 1] + scale * v.components[j + 1]);
                }
                CoordGroup::Interval { .. } => {
                    out.push(p.coords[i] + scale * v.components[j]);
                }
                CoordGroup::AnglePair => {
                    let theta = math::atan2(p.coords[i + 1], p.coords[i])
                        + scale * v.components[j];
                    out.push(math::cos(theta));
                    out.push(math::sin(theta));
                }
            }
            i += g.rep_len();
            j += g.man_len();
        }
        out
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use alloc::vec;
    use core::f64::consts::PI;
    use rand::SeedableRng;
    use rand_chacha::ChaCha20Rng;

    fn pt(coords: &[f64]) -> StatePoint {
        StatePoint {
            coords: coords.to_vec(),
        }
    }

    fn tv(components: &[f64]) -> TangentVector {
        TangentVector {
            components: components.to_vec(),
        }
    }

    #[test]
    fn matsumoto_norm_values() {
        let env = Environment::matsumoto();
        let f = env.finsler_norm(&pt(&[0.0, 0.0]), &tv(&[1.0, 0.0])).unwrap();
        assert!((f - 1.0).abs() < 1e-12);
        // Downhill at (0.5, 0): beta = -1, alpha = sqrt(2).
        let f = env.finsler_norm(&pt(&[0.5, 0.0]), &tv(&[1.0, 0.0])).unwrap();
        assert!((f - 2.0 / (2f64.sqrt() + 1.0)).abs() < 1e-12);
        // Uphill: beta = +1.
        let f = env
            .finsler_norm(&pt(&[0.5, 0.0]), &tv(&[-1.0, 0.0]))
            .unwrap();
        assert!((f - 2.0 * (2f64.sqrt() + 1.0)).abs() < 1e-12);
        // Zero vector.
        let f = env.finsler_norm(&pt(&[0.5, 0.0]), &tv(&[0.0, 0.0])).unwrap();
        assert_eq!(f, 0.0);
    }

    #[test]
    fn carlike_norm_values() {
        let env = Environment::carlike();
        let p = pt(&[0.0, 0.0, 1.0, 0.0]); // theta = 0
        let f = env.finsler_norm(&p, &tv(&[1.0, 0.0, 0.0])).unwrap();
        assert!((f - 1.0).abs() < 1e-12, "forward motion is free");
        let f = env.finsler_norm(&p, &tv(&[-1.0, 0.0, 0.0])).unwrap();
        assert!((f - 101f64.sqrt()).abs() < 1e-9, "backward is penalized");
        let f = env.finsler_norm(&p, &tv(&[0.0, 1.0, 0.0])).unwrap();
        assert!((f - 101f64.sqrt()).abs() < 1e-9, "sideways is penalized");
        let f = env.finsler_norm(&p, &tv(&[0.0, 0.0, 1.0])).unwrap();
        assert!((f - 2.0).abs() < 1e-12, "turning in place");
    }

    #[test]
    fn norm_rejects_bad_input() {
        let env = Environment::matsumoto();
        assert!(matches!(
            env.finsler_norm(&pt(&[2.0, 0.0]), &tv(&[1.0, 0.0])),
            Err(CoreError::Domain(_))
        ));
        let bad = StatePoint {
            coords: vec![f64::NAN, 0.0],
        };
        assert!(env.finsler_norm(&bad, &tv(&[1.0, 0.0])).is_err());
    }

    #[test]
    fn positive_homogeneity() {
        let env = Environment::matsumoto();
        let mut rng = ChaCha20Rng::seed_from_u64(7);
        for _ in 0..200 {
            let p = env.sample_free(&mut rng).unwrap();
            let v = tv(&[rng.gen::<f64>() * 2.0 - 1.0, rng.gen::<f64>() * 2.0 - 1.0]);
            let lambda = rng.gen::<f64>() * 10.0 + 1e-3;
            let f1 = env.finsler_norm(&p, &v).unwrap();
            let scaled = tv(&[v.components[0] * lambda, v.components[1] * lambda]);
            let f2 = env.finsler_norm(&p, &scaled).unwrap();
            assert!((f2 - lambda * f1).abs() <= 1e-9 * (1.0 + lambda * f1));
        }
    }

    #[test]
    fn local_cost_euclid() {
        let env = Environment::euclid2d_free();
        let c = env.local_cost(&pt(&[0.0, 0.0]), &pt(&[0.6, 0.8])).unwrap();
        assert!((c - 1.0).abs() < 1e-12);
        let c = env.local_cost(&pt(&[0.3, -0.2]), &pt(&[0.3, -0.2])).unwrap();
        assert_eq!(c, 0.0);
    }

    #[test]
    fn local_cost_wraps_angles() {
        let env = Environment::carlike();
        let x = pt(&[0.0, 0.0, (3.0f64).cos(), (3.0f64).sin()]);
        let y = pt(&[0.0, 0.0, (-3.0f64).cos(), (-3.0f64).sin()]);
        let d = env.displacement(&x, &y);
        // -6.0 wrapped into [-pi, pi] is +0.2831853...
        assert!((d.components[2] - (2.0 * PI - 6.0)).abs() < 1e-12);
        let c = env.local_cost(&x, &y).unwrap();
        let expected = env
            .finsler_norm(&x, &tv(&[0.0, 0.0, 2.0 * PI - 6.0]))
            .unwrap();
        assert!((c - expected).abs() < 1e-12);
    }

    #[test]
    fn asymmetry_witnesses() {
        let env = Environment::matsumoto();
        let p = pt(&[0.5, 0.0]);
        let q = pt(&[0.51, 0.0]);
        let down = env.local_cost(&p, &q).unwrap();
        let up = env.local_cost(&q, &p).unwrap();
        assert!(down < up, "downhill should be cheaper than uphill");

        let env = Environment::carlike();
        let p = pt(&[0.0, 0.0, 1.0, 0.0]);
        let fwd = pt(&[0.01, 0.0, 1.0, 0.0]);
        let forward = env.local_cost(&p, &fwd).unwrap();
        let backward = env.local_cost(&fwd, &p).unwrap();
        assert!(backward > forward);
    }

    #[test]
    fn penalty_two_case_definition() {
        let env = Environment::euclid2d_default_map();
        let free_a = pt(&[-0.9, 0.8]);
        let free_b = pt(&[0.9, -0.8]);
        let inside_a = pt(&[-0.4, 0.0]);
        let inside_b = pt(&[0.4, 0.0]);
        assert_eq!(env.penalty(&free_a, &free_b), 0.0);
        assert_eq!(env.penalty(&free_a, &inside_a), 10.0);
        assert_eq!(env.penalty(&inside_a, &free_a), 10.0);
        assert_eq!(env.penalty(&inside_a, &inside_b), 0.0);
    }

    #[test]
    fn obstructed_cost_sums() {
        let env = Environment::euclid2d_default_map();
        let x = pt(&[-0.9, 0.8]);
        let y = pt(&[-0.85, 0.8]);
        assert!((env.obstructed_cost(&x, &y).unwrap() - 0.05).abs() < 1e-12);
        let z = pt(&[-0.4, 0.0]); // inside the left wall
        let c = env.obstructed_cost(&x, &z).unwrap();
        assert!((c - (env.local_cost(&x, &z).unwrap() + 10.0)).abs() < 1e-12);
        assert_eq!(env.obstructed_cost(&x, &x).unwrap(), 0.0);
    }

    #[test]
    fn multi_agent_free_boundary_inclusive() {
        let env = Environment::three_agents();
        // Minimum pairwise distance exactly 0.5 is free.
        let p = pt(&[0.0, 0.0, 0.5, 0.0, 0.0, 0.9]);
        assert!(env.is_free(&p));
        let q = pt(&[0.0, 0.0, 0.49, 0.0, 0.0, 0.9]);
        assert!(!env.is_free(&q));
    }

    #[test]
    fn euclid_boundary_unsafe() {
        let env = Environment::euclid2d_default_map();
        assert!(!env.is_free(&pt(&[1.0, 0.9])));
        assert!(env.is_free(&pt(&[0.99, 0.9])));
        assert!(!env.is_free(&pt(&[-0.4, 0.2]))); // in the left wall
    }

    #[test]
    fn arm_first_link_hits_slab() {
        let env = Environment::arm3();
        // All joints at 0: first link spans (0,0,0) -> (1,0,0) through the slab.
        assert!(!env.is_free(&pt(&[0.0, 0.0, 0.0])));
        // Pointing straight up avoids it.
        assert!(env.is_free(&pt(&[PI / 2.0, 0.0, 0.0])));
    }

    #[test]
    fn sample_free_postconditions() {
        for env in [
            Environment::matsumoto(),
            Environment::carlike(),
            Environment::euclid2d_default_map(),
            Environment::arm3(),
            Environment::three_agents(),
        ] {
            let mut rng = ChaCha20Rng::seed_from_u64(3);
            for _ in 0..50 {
                let p = env.sample_free(&mut rng).unwrap();
                assert!(env.is_free(&p));
                assert!(env.validate_point(&p).is_ok());
            }
        }
    }

    #[test]
    fn sample_free_deterministic() {
        let env = Environment::carlike();
        let mut a = ChaCha20Rng::seed_from_u64(42);
        let mut b = ChaCha20Rng::seed_from_u64(42);
        for _ in 0..20 {
            assert_eq!(
                env.sample_free(&mut a).unwrap(),
                env.sample_free(&mut b).unwrap()
            );
        }
    }

    #[test]
    fn clamp_project_examples() {
        let env = Environment::carlike();
        // Angle pair (2, 0) clamps to (1, 0) then normalizes to (1, 0).
        let p = env.clamp_project(&[0.0, 0.0, 2.0, 0.0]);
        assert_eq!(&p.coords[2..], &[1.0, 0.0]);
        // In-range input is unchanged.
        let raw = [0.3, -0.4, 0.6, 0.8];
        let p = env.clamp_project(&raw);
        assert_eq!(p.coords.as_slice(), &raw);
        // Zero angle pair maps to (1, 0).
        let p = env.clamp_project(&[0.0, 0.0, 0.0, 0.0]);
        assert_eq!(&p.coords[2..], &[1.0, 0.0]);

        // Disk: radial projection.
        let env = Environment::matsumoto();
        let p = env.clamp_project(&[2.0, 0.0]);
        assert_eq!(p.coords.as_slice(), &[1.0, 0.0]);
    }

    #[test]
    fn clamp_project_idempotent() {
        let env = Environment::carlike();
        let mut rng = ChaCha20Rng::seed_from_u64(11);
        for _ in 0..100 {
            let raw: Vec<f64> = (0..4).map(|_| rng.gen::<f64>() * 6.0 - 3.0).collect();
            let once = env.clamp_project(&raw);
            let twice = env.clamp_project(&once.coords);
            for (a, b) in once.coords.iter().zip(&twice.coords) {
                assert!((a - b).abs() < 1e-15);
            }
        }
    }

    #[test]
    fn local_cost_linear_in_step() {
        // C scales linearly as y -> x along a fixed direction.
        let env = Environment::matsumoto();
        let p = pt(&[0.3, 0.2]);
        let dir = [0.6, -0.8];
        let mut prev_ratio = None;
        for k in 2..=6 {
            let h = libm::pow(10.0, -(k as f64));
            let q = pt(&[p.coords[0] + h * dir[0], p.coords[1] + h * dir[1]]);
            let c = env.local_cost(&p, &q).unwrap();
            let ratio = c / h;
            if let Some(prev) = prev_ratio {
                let rel: f64 = (ratio - prev) / prev;
                assert!(rel.abs() < 1e-6);
            }
            prev_ratio = Some(ratio);
        }
    }

    #[test]
    fn forward_kinematics_dimension_check() {
        let env = Environment::arm3();
        assert!(env.forward_kinematics(&[0.0, 0.0]).is_err());
        assert_eq!(env.forward_kinematics(&[0.0, 0.0, 0.0]).unwrap().len(), 4);
        assert!(Environment::matsumoto().forward_kinematics(&[0.0]).is_err());
    }

    #[test]
    fn triangle_inequality_euclid() {
        let env = Environment::euclid2d_free();
        let mut rng = ChaCha20Rng::seed_from_u64(5);
        for _ in 0..200 {
            let x = env.sample_free(&mut rng).unwrap();
            let y = env.sample_free(&mut rng).unwrap();
            let z = env.sample_free(&mut rng).unwrap();
            let xz = env.local_cost(&x, &z).unwrap();
            let xy = env.local_cost(&x, &y).unwrap();
            let yz = env.local_cost(&y, &z).unwrap();
            assert!(xz <= xy + yz + 1e-12);
        }
    }
}
