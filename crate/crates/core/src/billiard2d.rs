//! Exact planar ray tracing against a periodic wall, and the
//! macro-reflection map: launch a particle from the interface line into
//! the microstructure, reflect specularly until it re-crosses the
//! interface upward, and report the exit state.

use crate::geom::Vec2;
use crate::num::Float;
use crate::tol;
use crate::wall::{SegKind, Wall};

/// A state on the interface line: position `x` and angle `theta` in
/// (0, pi). The incoming physical velocity is the unit vector at angle
/// `pi + theta`; the outgoing velocity after the interaction is at angle
/// `theta'` directly.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ReflState<F> {
    pub x: F,
    pub theta: F,
}

#[derive(Clone, Copy, Debug)]
pub struct Limits<F> {
    pub max_bounces: u64,
    pub max_time: F,
}

impl<F: Float> Default for Limits<F> {
    fn default() -> Self {
        Self { max_bounces: tol::MAX_BOUNCES, max_time: F::infinity() }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum SingularKind {
    /// |<dir, normal>| below the tangency tolerance.
    Tangential,
    /// Hit within the endpoint tolerance of a segment end.
    CornerEndpoint,
    /// Two distinct segments hit at indistinguishable times.
    CornerTie,
    /// No intersection found inside a wide search window.
    Lost,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Terminal {
    Returned,
    Singular(SingularKind),
    Capped,
}

#[derive(Clone, Copy, Debug)]
pub struct SegmentId {
    pub period: i64,
    pub index: usize,
}

#[derive(Clone, Copy, Debug)]
pub struct Event<F> {
    pub position: Vec2<F>,
    pub incoming: Vec2<F>,
    pub outgoing: Vec2<F>,
    pub segment: SegmentId,
    pub flight_time: F,
}

#[derive(Clone, Debug)]
pub struct TrajectoryLog<F> {
    pub events: Vec<Event<F>>,
    pub terminal: Terminal,
    /// Exit state when `terminal == Returned`.
    pub exit: Option<ReflState<F>>,
    pub total_time: F,
    pub bounces: u64,
}

#[derive(Debug, thiserror::Error, Clone, Copy, PartialEq, Eq)]
pub enum TraceError {
    #[error("singular trajectory: {0:?}")]
    Singular(SingularKind),
    #[error("trajectory exceeded bounce or time limit")]
    Capped,
    #[error("direction not incoming against the normal")]
    NotIncoming,
}

/// Specular reflection of `dir` about the plane orthogonal to `normal`.
/// Both must be unit vectors and `dir` must point against the normal.
pub fn reflect<F: Float>(dir: Vec2<F>, normal: Vec2<F>) -> Result<Vec2<F>, TraceError> {
    let unit_tol = F::of(tol::KE_NORM);
    if (dir.norm() - F::one()).abs() > unit_tol || (normal.norm() - F::one()).abs() > unit_tol {
        return Err(TraceError::NotIncoming);
    }
    let dn = dir.dot(normal);
    if dn >= F::zero() {
        return Err(TraceError::NotIncoming);
    }
    Ok(reflect_raw(dir, normal, dn))
}

#[inline]
fn reflect_raw<F: Float>(dir: Vec2<F>, normal: Vec2<F>, dn: F) -> Vec2<F> {
    (dir - normal * (F::of(2.0) * dn)).normalized()
}

struct Hit<F> {
    t: F,
    point: Vec2<F>,
    normal: Vec2<F>,
    endpoint_dist: F,
    segment: SegmentId,
}

/// First intersection of the ray `p + t*d` with a segment translated by
/// `dx`, for `t >= t_min`. Returns the hit with its (orientation-free)
/// unit normal and the distance from the hit to the nearest endpoint.
fn first_hit<F: Float>(
    seg: &SegKind<F>,
    dx: F,
    p: Vec2<F>,
    d: Vec2<F>,
    t_min: F,
    id: SegmentId,
) -> Option<Hit<F>> {
    match *seg {
        SegKind::Line { p0, p1 } => {
            let p0 = Vec2::new(p0.x + dx, p0.y);
            let p1 = Vec2::new(p1.x + dx, p1.y);
            let e = p1 - p0;
            let den = d.cross(e);
            if den.abs() < F::of(1e-300) {
                return None;
            }
            let t = (p0 - p).cross(e) / den;
            if t < t_min {
                return None;
            }
            let hit = p + d * t;
            let elen = e.norm();
            let s = (hit - p0).dot(e) / (elen * elen);
            if s < -F::of(1e-12) || s > F::one() + F::of(1e-12) {
                return None;
            }
            // One Newton step on the signed line distance keeps the
            // residual at rounding level even for long flights.
            let n = e.normalized().perp();
            let g = (hit - p0).dot(n);
            let gp = d.dot(n);
            let t = if gp.abs() > F::of(1e-300) { t - g / gp } else { t };
            let hit = p + d * t;
            let s_clamped = s.max(F::zero()).min(F::one());
            let end_d = (s_clamped * elen).min((F::one() - s_clamped) * elen);
            Some(Hit { t, point: hit, normal: n, endpoint_dist: end_d, segment: id })
        }
        SegKind::Arc { center, semi, .. } => {
            let c = Vec2::new(center.x + dx, center.y);
            // ((x-cx)/a)^2 + ((y-cy)/b)^2 = 1 along p + t d.
            let q = Vec2::new((p.x - c.x) / semi.x, (p.y - c.y) / semi.y);
            let e = Vec2::new(d.x / semi.x, d.y / semi.y);
            let a2 = e.norm2();
            let b1 = q.dot(e);
            let c2 = q.norm2() - F::one();
            let disc = b1 * b1 - a2 * c2;
            if disc < F::zero() {
                return None;
            }
            let sq = disc.sqrt();
            // Numerically stable pair of roots.
            let qq = -(b1 + b1.signum() * sq);
            let (mut t0, mut t1) = if qq.abs() < F::of(1e-300) {
                let t = -b1 / a2;
                (t, t)
            } else {
                (qq / a2, c2 / qq)
            };
            if t0 > t1 {
                core::mem::swap(&mut t0, &mut t1);
            }
            let shifted = seg.translated(dx);
            let mut best: Option<Hit<F>> = None;
            for t in [t0, t1] {
                if !t.is_finite() || t < t_min {
                    continue;
                }
                // Newton polish on the implicit ellipse equation.
                let mut tt = t;
                for _ in 0..2 {
                    let h = p + d * tt;
                    let u = Vec2::new((h.x - c.x) / semi.x, (h.y - c.y) / semi.y);
                    let g = u.norm2() - F::one();
                    let gp = F::of(2.0) * u.dot(e);
                    if gp.abs() < F::of(1e-300) {
                        break;
                    }
                    tt -= g / gp;
                }
                if tt < t_min {
                    continue;
                }
                let hit = p + d * tt;
                let g = shifted.arc_param_of(hit);
                let (in_range, edge) = shifted.arc_in_range(g);
                if !in_range {
                    continue;
                }
                if best.as_ref().is_none_or(|b| tt < b.t) {
                    let n = shifted.outward_normal_at(hit);
                    best = Some(Hit { t: tt, point: hit, normal: n, endpoint_dist: edge, segment: id });
                }
            }
            best
        }
    }
}

/// Core stepping loop shared by `trace` and `macro_reflection`.
fn trace_core<F: Float>(
    wall: &Wall<F>,
    pos: Vec2<F>,
    dir: Vec2<F>,
    limits: Limits<F>,
    mut on_event: impl FnMut(Event<F>),
) -> (Terminal, Option<ReflState<F>>, F, u64) {
    let period = wall.period();
    let tangency = F::of(tol::TANGENCY);
    let endpoint = F::of(tol::ENDPOINT);
    let tie = F::of(tol::CORNER_TIE);

    let mut p = pos;
    let mut d = dir.normalized();
    let mut t_total = F::zero();
    let mut bounces: u64 = 0;
    let mut first_step = true;

    loop {
        if bounces >= limits.max_bounces {
            return (Terminal::Capped, None, t_total, bounces);
        }
        // Upward interface crossing ends the excursion.
        if d.y > F::zero() && p.y >= -F::of(1e-300) {
            let theta = d.angle();
            return (Terminal::Returned, Some(ReflState { x: p.x, theta }), t_total, bounces);
        }
        let t_up = if d.y > F::zero() { Some(-p.y / d.y) } else { None };

        // Search widening windows of periods around the current position.
        let t_min = if first_step { F::zero() } else { F::of(1e-13) * period.max(F::one()) };
        let mut found: Option<Hit<F>> = None;
        let mut tie_hit = false;
        for radius in [2i64, 8, 64] {
            let k0 = wall.period_index_of(p.x) - radius;
            let k1 = wall.period_index_of(p.x) + radius;
            found = None;
            tie_hit = false;
            for k in k0..=k1 {
                let dx = F::from_i64(k).unwrap() * period;
                for (idx, seg) in wall.segments().iter().enumerate() {
                    let id = SegmentId { period: k, index: idx };
                    if let Some(h) = first_hit(seg, dx, p, d, t_min, id) {
                        match &found {
                            Some(b) => {
                                let same_seg = b.segment.period == h.segment.period
                                    && b.segment.index == h.segment.index;
                                if (h.t - b.t).abs() < tie && !same_seg {
                                    // Shared endpoints of adjacent segments
                                    // are corners, caught below by the
                                    // endpoint distance check.
                                    if h.point.dist(b.point) > endpoint {
                                        tie_hit = true;
                                    }
                                }
                                if h.t < b.t {
                                    found = Some(h);
                                }
                            }
                            None => found = Some(h),
                        }
                    }
                }
            }
            // A trajectory below the interface cannot pass a period
            // boundary without crossing the wall (the boundary reaches
            // depth 0 there), so any first hit lies within a couple of
            // periods; widening only covers numerically marginal cases.
            if found.is_some() || t_up.is_some() || radius == 64 {
                break;
            }
        }
        first_step = false;

        match (found, t_up) {
            (None, Some(tu)) => {
                // Free exit through the interface.
                if t_total + tu > limits.max_time {
                    return (Terminal::Capped, None, t_total, bounces);
                }
                let x = p.x + tu * d.x;
                return (
                    Terminal::Returned,
                    Some(ReflState { x, theta: d.angle() }),
                    t_total + tu,
                    bounces,
                );
            }
            (None, None) => {
                return (Terminal::Singular(SingularKind::Lost), None, t_total, bounces);
            }
            (Some(hit), tu) => {
                if let Some(tu) = tu {
                    if tu < hit.t {
                        if t_total + tu > limits.max_time {
                            return (Terminal::Capped, None, t_total, bounces);
                        }
                        let x = p.x + tu * d.x;
                        return (
                            Terminal::Returned,
                            Some(ReflState { x, theta: d.angle() }),
                            t_total + tu,
                            bounces,
                        );
                    }
                }
                if tie_hit {
                    return (Terminal::Singular(SingularKind::CornerTie), None, t_total, bounces);
                }
                let mut hit = hit;
                if hit.endpoint_dist < endpoint {
                    // A hit at a segment junction is fine when the pieces
                    // continue each other smoothly (flat walls tile into
                    // collinear segments); a genuine corner is singular.
                    match wall.boundary_normal_at(hit.point, F::of(1e-9)) {
                        Some(n) => hit.normal = n,
                        None => {
                            return (
                                Terminal::Singular(SingularKind::CornerEndpoint),
                                None,
                                t_total,
                                bounces,
                            )
                        }
                    }
                }
                let mut n = hit.normal;
                let mut dn = d.dot(n);
                if dn > F::zero() {
                    n = -n;
                    dn = -dn;
                }
                if dn.abs() < tangency {
                    return (Terminal::Singular(SingularKind::Tangential), None, t_total, bounces);
                }
                if t_total + hit.t > limits.max_time {
                    return (Terminal::Capped, None, t_total, bounces);
                }
                let out = reflect_raw(d, n, dn);
                on_event(Event {
                    position: hit.point,
                    incoming: d,
                    outgoing: out,
                    segment: hit.segment,
                    flight_time: hit.t,
                });
                t_total += hit.t;
                p = hit.point;
                d = out;
                bounces += 1;
            }
        }
    }
}

/// Trace a particle through the microstructure, logging every reflection.
/// `pos` must lie in the billiard domain at or below the interface line
/// (or exactly on it, heading down).
pub fn trace<F: Float>(
    wall: &Wall<F>,
    pos: Vec2<F>,
    dir: Vec2<F>,
    limits: Limits<F>,
) -> TrajectoryLog<F> {
    let mut events = Vec::new();
    let (terminal, exit, total_time, bounces) =
        trace_core(wall, pos, dir, limits, |e| events.push(e));
    TrajectoryLog { events, terminal, exit, total_time, bounces }
}

/// Outcome of a macro reflection, with flight metadata.
#[derive(Clone, Copy, Debug)]
pub struct MacroOutcome<F> {
    pub state: ReflState<F>,
    pub bounces: u64,
    pub total_time: F,
}

/// The macro-reflection map: from `(x, theta)` on the interface to the
/// interface re-crossing state `(x', theta')`.
pub fn macro_reflection<F: Float>(
    wall: &Wall<F>,
    s: ReflState<F>,
    limits: Limits<F>,
) -> Result<MacroOutcome<F>, TraceError> {
    debug_assert!(s.theta > F::zero() && s.theta < F::PI());
    let dir = Vec2::from_angle(F::PI() + s.theta);
    let (terminal, exit, total_time, bounces) =
        trace_core(wall, Vec2::new(s.x, F::zero()), dir, limits, |_| {});
    match terminal {
        Terminal::Returned => Ok(MacroOutcome { state: exit.unwrap(), bounces, total_time }),
        Terminal::Singular(k) => Err(TraceError::Singular(k)),
        Terminal::Capped => Err(TraceError::Capped),
    }
}
