//! Periodic microstructured walls.
//!
//! A wall is described by a `WallSpec`: a parametric family (flat wall,
//! rectangular teeth, triangular teeth, focusing circular or elliptical
//! arcs, or a custom segment list), a roughness scale `eps`, and a datum
//! (`half_plane` puts the boundary in the band `[-eps*h_max, 0]`,
//! `disk_wall` shifts it down by 1). Geometry is stored as one normalized
//! period of line and arc segments; all queries reduce the horizontal
//! coordinate modulo the period.

use serde::{Deserialize, Serialize};

use crate::geom::{wrap_two_pi, Vec2};
use crate::num::Float;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Datum {
    HalfPlane,
    DiskWall,
}

/// Segment description used by the `custom` family (JSON-facing).
#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(rename_all = "snake_case", tag = "kind")]
pub enum SegmentSpec<F> {
    Line {
        p0: [F; 2],
        p1: [F; 2],
    },
    /// Circular arc, parametrized by the angle measured counterclockwise
    /// from straight down at the center: point(g) = center + r*(sin g, -cos g).
    Arc {
        center: [F; 2],
        radius: F,
        angle_start: F,
        angle_end: F,
        concave: bool,
    },
    /// Axis-aligned elliptical arc with the same angular convention:
    /// point(g) = center + (a*sin g, -b*cos g).
    EllArc {
        center: [F; 2],
        semi_x: F,
        semi_y: F,
        angle_start: F,
        angle_end: F,
        concave: bool,
    },
}

#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(rename_all = "snake_case", tag = "family", content = "params")]
pub enum WallFamily<F> {
    Flat,
    RectTeeth {
        /// Tooth height over tooth width.
        r: F,
    },
    TriTeeth {
        /// Opening angle spanned by each peak and valley, in (0, pi).
        psi: F,
    },
    CircArcs {
        /// Half the angle spanned by the arc of one period, in (0, pi/2].
        xi: F,
    },
    EllArcs {
        xi: F,
        /// Horizontal over vertical semi-axis.
        axis_ratio: F,
    },
    Custom {
        segments: Vec<SegmentSpec<F>>,
    },
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct WallSpec<F> {
    #[serde(flatten)]
    pub family: WallFamily<F>,
    pub scale: F,
    pub datum: Datum,
}

#[derive(Debug, thiserror::Error)]
pub enum GeometryError {
    #[error("invalid parameter: {0}")]
    InvalidParam(String),
    #[error("malformed custom wall: {0}")]
    MalformedCustom(String),
}

/// Concrete boundary piece at absolute coordinates.
///
/// Arcs are stored in elliptical form (`semi.x == semi.y` for circles),
/// parametrized by `point(g) = center + (semi.x * sin g, -semi.y * cos g)`
/// for `g` in `[ang0, ang1]`. Segments are listed in path order with the
/// solid wall below/right of the traversal direction, so the outward
/// normal (into free space) is the tangent rotated by +90 degrees.
#[derive(Clone, Copy, Debug)]
pub enum SegKind<F> {
    Line { p0: Vec2<F>, p1: Vec2<F> },
    Arc { center: Vec2<F>, semi: Vec2<F>, ang0: F, ang1: F, concave: bool },
}

/// One boundary segment together with the period it belongs to.
#[derive(Clone, Copy, Debug)]
pub struct BoundarySegment<F> {
    pub kind: SegKind<F>,
    pub period_index: i64,
}

impl<F: Float> SegKind<F> {
    pub fn translated(&self, dx: F) -> Self {
        match *self {
            SegKind::Line { p0, p1 } => SegKind::Line {
                p0: Vec2::new(p0.x + dx, p0.y),
                p1: Vec2::new(p1.x + dx, p1.y),
            },
            SegKind::Arc { center, semi, ang0, ang1, concave } => SegKind::Arc {
                center: Vec2::new(center.x + dx, center.y),
                semi,
                ang0,
                ang1,
                concave,
            },
        }
    }

    pub fn scaled(&self, s: F) -> Self {
        match *self {
            SegKind::Line { p0, p1 } => SegKind::Line { p0: p0 * s, p1: p1 * s },
            SegKind::Arc { center, semi, ang0, ang1, concave } => SegKind::Arc {
                center: center * s,
                semi: semi * s,
                ang0,
                ang1,
                concave,
            },
        }
    }

    /// Vertical stretch `(x, y) -> (x, y * s)`. Circles become ellipses.
    pub fn stretched_y(&self, s: F) -> Self {
        match *self {
            SegKind::Line { p0, p1 } => SegKind::Line {
                p0: Vec2::new(p0.x, p0.y * s),
                p1: Vec2::new(p1.x, p1.y * s),
            },
            SegKind::Arc { center, semi, ang0, ang1, concave } => SegKind::Arc {
                center: Vec2::new(center.x, center.y * s),
                semi: Vec2::new(semi.x, semi.y * s),
                ang0,
                ang1,
                concave,
            },
        }
    }

    pub fn point_at(&self, g: F) -> Vec2<F> {
        match *self {
            SegKind::Line { p0, p1 } => p0 + (p1 - p0) * g,
            SegKind::Arc { center, semi, .. } => {
                Vec2::new(center.x + semi.x * g.sin(), center.y - semi.y * g.cos())
            }
        }
    }

    pub fn start(&self) -> Vec2<F> {
        match *self {
            SegKind::Line { p0, .. } => p0,
            SegKind::Arc { ang0, .. } => self.point_at(ang0),
        }
    }

    pub fn end(&self) -> Vec2<F> {
        match *self {
            SegKind::Line { p1, .. } => p1,
            SegKind::Arc { ang1, .. } => self.point_at(ang1),
        }
    }

    /// Unsigned curvature at parameter `g` (ignored for lines).
    pub fn curvature(&self, g: F) -> F {
        match *self {
            SegKind::Line { .. } => F::zero(),
            SegKind::Arc { semi, .. } => {
                let (a, b) = (semi.x, semi.y);
                let w = (a * g.cos()) * (a * g.cos()) + (b * g.sin()) * (b * g.sin());
                a * b / w.powf(F::of(1.5))
            }
        }
    }

    /// Outward unit normal (pointing into free space) at a boundary point.
    pub fn outward_normal_at(&self, p: Vec2<F>) -> Vec2<F> {
        match *self {
            SegKind::Line { p0, p1 } => (p1 - p0).normalized().perp(),
            SegKind::Arc { center, semi, concave, .. } => {
                // Gradient of ((x-cx)/a)^2 + ((y-cy)/b)^2 points away from
                // the center; a concave (focusing) arc has its free side
                // toward the center.
                let g = Vec2::new(
                    (p.x - center.x) / (semi.x * semi.x),
                    (p.y - center.y) / (semi.y * semi.y),
                )
                .normalized();
                if concave {
                    -g
                } else {
                    g
                }
            }
        }
    }

    /// Angular parameter of a point assumed to lie on an arc.
    pub fn arc_param_of(&self, p: Vec2<F>) -> F {
        match *self {
            SegKind::Line { .. } => F::zero(),
            SegKind::Arc { center, semi, .. } => {
                ((p.x - center.x) / semi.x).atan2((center.y - p.y) / semi.y)
            }
        }
    }

    /// Whether the angular parameter `g` falls inside the arc range,
    /// handling wraparound; also returns the arc-length-ish distance to the
    /// nearest end of the range (in radians times mean radius).
    pub fn arc_in_range(&self, g: F) -> (bool, F) {
        match *self {
            SegKind::Line { .. } => (true, F::infinity()),
            SegKind::Arc { semi, ang0, ang1, .. } => {
                let span = ang1 - ang0;
                let rel = wrap_two_pi(g - ang0);
                let rad = F::of(0.5) * (semi.x + semi.y);
                if rel <= span {
                    (true, rel.min(span - rel) * rad)
                } else {
                    let out = (rel - span).min(F::PI() + F::PI() - rel);
                    (false, out * rad)
                }
            }
        }
    }

    fn min_depth(&self) -> F {
        match *self {
            SegKind::Line { p0, p1 } => p0.y.min(p1.y),
            SegKind::Arc { center, semi, .. } => {
                let (inr, _) = self.arc_in_range(F::zero());
                let ends = self.start().y.min(self.end().y);
                if inr {
                    ends.min(center.y - semi.y)
                } else {
                    ends
                }
            }
        }
    }

    fn chord(&self) -> F {
        self.start().dist(self.end())
    }
}

/// An immutable wall: one period of boundary segments at absolute scale,
/// plus the periodic extension rule. Safe to share across threads.
#[derive(Clone, Debug)]
pub struct Wall<F: Float> {
    spec: WallSpec<F>,
    period: F,
    segs: Vec<SegKind<F>>,
    h_max: F,
    min_feature: F,
}

impl<F: Float> Wall<F> {
    pub fn spec(&self) -> &WallSpec<F> {
        &self.spec
    }

    pub fn scale(&self) -> F {
        self.spec.scale
    }

    pub fn datum(&self) -> Datum {
        self.spec.datum
    }

    /// Period length (a family-determined multiple of the scale).
    pub fn period(&self) -> F {
        self.period
    }

    /// Segments of the canonical period, path-ordered left to right.
    /// Depths are relative to the interface line at 0; the `disk_wall`
    /// datum shift is applied by the disk-wall module, not here.
    pub fn segments(&self) -> &[SegKind<F>] {
        &self.segs
    }

    /// Segments of one period as `BoundarySegment`s.
    pub fn period_segments(&self, period_index: i64) -> Vec<BoundarySegment<F>> {
        let dx = F::from_i64(period_index).unwrap() * self.period;
        self.segs
            .iter()
            .map(|s| BoundarySegment { kind: s.translated(dx), period_index })
            .collect()
    }

    /// Maximum boundary depth (positive number).
    pub fn h_max(&self) -> F {
        self.h_max
    }

    /// Smallest segment chord; collision detection derives safe step
    /// sizes from this.
    pub fn min_feature(&self) -> F {
        self.min_feature
    }

    pub fn period_index_of(&self, x: F) -> i64 {
        (x / self.period).floor().to_i64().unwrap_or(0)
    }

    /// Boundary graph height at `x` (walls are subgraphs of their
    /// height profile; at vertical faces this returns the higher side).
    pub fn height(&self, x: F) -> F {
        let k = (x / self.period).floor();
        let xr = x - k * self.period;
        let mut h = -F::infinity();
        for s in &self.segs {
            if let Some(y) = seg_height_at(s, xr) {
                h = h.max(y);
            }
        }
        // Allow for the query landing within rounding of a period edge.
        if h.is_infinite() {
            for s in &self.segs {
                for xq in [xr + self.period, xr - self.period] {
                    if let Some(y) = seg_height_at(s, xq) {
                        h = h.max(y);
                    }
                }
            }
        }
        h
    }

    /// Outward normal at a point lying on the boundary, provided every
    /// segment through the point agrees on the tangent (collinear
    /// junctions, e.g. consecutive flat pieces). `None` at genuine
    /// corners where the normals disagree, or off the boundary.
    pub fn boundary_normal_at(&self, p: Vec2<F>, near: F) -> Option<Vec2<F>> {
        let k0 = self.period_index_of(p.x);
        let mut normal: Option<Vec2<F>> = None;
        for k in (k0 - 1)..=(k0 + 1) {
            let dx = F::from_i64(k).unwrap() * self.period;
            for seg in &self.segs {
                let s = seg.translated(dx);
                if !seg_contains_point(&s, p, near) {
                    continue;
                }
                let n = s.outward_normal_at(p);
                match normal {
                    None => normal = Some(n),
                    Some(n0) => {
                        if n0.cross(n).abs() > F::of(1e-9) || n0.dot(n) < F::zero() {
                            return None;
                        }
                    }
                }
            }
        }
        normal
    }

    /// Polyline sampling of one period (for CSV export).
    pub fn polyline(&self, samples_per_segment: usize) -> Vec<Vec2<F>> {
        let n = samples_per_segment.max(1);
        let mut pts = Vec::new();
        for s in &self.segs {
            for i in 0..=n {
                let t = F::from_usize(i).unwrap() / F::from_usize(n).unwrap();
                let p = match *s {
                    SegKind::Line { .. } => s.point_at(t),
                    SegKind::Arc { ang0, ang1, .. } => s.point_at(ang0 + (ang1 - ang0) * t),
                };
                if pts.last().is_none_or(|q: &Vec2<F>| q.dist(p) > F::of(1e-12)) {
                    pts.push(p);
                }
            }
        }
        pts
    }
}

fn seg_contains_point<F: Float>(s: &SegKind<F>, p: Vec2<F>, near: F) -> bool {
    match *s {
        SegKind::Line { p0, p1 } => {
            let e = p1 - p0;
            let len = e.norm();
            let t = (p - p0).dot(e) / (len * len);
            let slack = near / len;
            if t < -slack || t > F::one() + slack {
                return false;
            }
            let foot = p0 + e * t.max(F::zero()).min(F::one());
            p.dist(foot) <= near
        }
        SegKind::Arc { center, semi, .. } => {
            let xi = Vec2::new((p.x - center.x) / semi.x, (p.y - center.y) / semi.y);
            let scale = semi.x.min(semi.y);
            if (xi.norm() - F::one()).abs() * scale > near {
                return false;
            }
            let g = s.arc_param_of(p);
            let (inr, edge) = s.arc_in_range(g);
            inr || edge <= near
        }
    }
}

fn seg_height_at<F: Float>(s: &SegKind<F>, x: F) -> Option<F> {
    match *s {
        SegKind::Line { p0, p1 } => {
            let (lo, hi) = (p0.x.min(p1.x), p0.x.max(p1.x));
            if x < lo || x > hi {
                return None;
            }
            if (p1.x - p0.x).abs() < F::of(1e-300) {
                Some(p0.y.max(p1.y))
            } else {
                let t = (x - p0.x) / (p1.x - p0.x);
                Some(p0.y + (p1.y - p0.y) * t)
            }
        }
        SegKind::Arc { center, semi, concave, .. } => {
            let u = (x - center.x) / semi.x;
            if u.abs() > F::one() {
                return None;
            }
            let dy = semi.y * (F::one() - u * u).sqrt();
            // Focusing arcs are the lower part of the ellipse; check that
            // the candidate point actually lies in the angular range.
            let y = if concave { center.y - dy } else { center.y + dy };
            let g = s.arc_param_of(Vec2::new(x, y));
            let (inr, _) = s.arc_in_range(g);
            if inr {
                Some(y)
            } else {
                None
            }
        }
    }
}

/// Construct the segment list for one period from a wall spec.
pub fn build_wall<F: Float>(spec: &WallSpec<F>) -> Result<Wall<F>, GeometryError> {
    let eps = spec.scale;
    if !(eps > F::zero()) || !eps.is_finite() {
        return Err(GeometryError::InvalidParam(format!("scale must be > 0, got {eps}")));
    }
    let (period1, segs1): (F, Vec<SegKind<F>>) = match &spec.family {
        WallFamily::Flat => (
            F::one(),
            vec![SegKind::Line { p0: Vec2::zero(), p1: Vec2::new(F::one(), F::zero()) }],
        ),
        WallFamily::RectTeeth { r } => {
            let r = *r;
            if !(r > F::zero()) || !r.is_finite() {
                return Err(GeometryError::InvalidParam(format!("rect_teeth r must be > 0, got {r}")));
            }
            let one = F::one();
            let two = F::of(2.0);
            (
                two,
                vec![
                    SegKind::Line { p0: Vec2::zero(), p1: Vec2::new(one, F::zero()) },
                    SegKind::Line { p0: Vec2::new(one, F::zero()), p1: Vec2::new(one, -r) },
                    SegKind::Line { p0: Vec2::new(one, -r), p1: Vec2::new(two, -r) },
                    SegKind::Line { p0: Vec2::new(two, -r), p1: Vec2::new(two, F::zero()) },
                ],
            )
        }
        WallFamily::TriTeeth { psi } => {
            let psi = *psi;
            if !(psi > F::zero() && psi < F::PI()) {
                return Err(GeometryError::InvalidParam(format!(
                    "tri_teeth psi must be in (0, pi), got {psi}"
                )));
            }
            let half = F::of(0.5);
            let depth = half / (psi * half).tan();
            (
                F::one(),
                vec![
                    SegKind::Line { p0: Vec2::zero(), p1: Vec2::new(half, -depth) },
                    SegKind::Line { p0: Vec2::new(half, -depth), p1: Vec2::new(F::one(), F::zero()) },
                ],
            )
        }
        WallFamily::CircArcs { xi } => {
            let xi = *xi;
            check_xi(xi)?;
            let half = F::of(0.5);
            let radius = half / xi.sin();
            let cy = half / xi.tan();
            (
                F::one(),
                vec![SegKind::Arc {
                    center: Vec2::new(half, cy),
                    semi: Vec2::new(radius, radius),
                    ang0: -xi,
                    ang1: xi,
                    concave: true,
                }],
            )
        }
        WallFamily::EllArcs { xi, axis_ratio } => {
            let (xi, q) = (*xi, *axis_ratio);
            check_xi(xi)?;
            if !(q > F::zero()) || !q.is_finite() {
                return Err(GeometryError::InvalidParam(format!(
                    "ell_arcs axis_ratio must be > 0, got {q}"
                )));
            }
            let half = F::of(0.5);
            let a = half / xi.sin();
            (
                F::one(),
                vec![SegKind::Arc {
                    center: Vec2::new(half, half / xi.tan() / q),
                    semi: Vec2::new(a, a / q),
                    ang0: -xi,
                    ang1: xi,
                    concave: true,
                }],
            )
        }
        WallFamily::Custom { segments } => build_custom(segments)?,
    };

    let mut h_max = F::zero();
    let mut min_feature = F::infinity();
    for s in &segs1 {
        h_max = h_max.max(-s.min_depth());
        min_feature = min_feature.min(s.chord());
    }
    Ok(Wall {
        spec: spec.clone(),
        period: period1 * eps,
        segs: segs1.iter().map(|s| s.scaled(eps)).collect(),
        h_max: h_max * eps,
        min_feature: min_feature * eps,
    })
}

fn check_xi<F: Float>(xi: F) -> Result<(), GeometryError> {
    let half_pi = F::FRAC_PI_2();
    if !(xi > F::zero() && xi <= half_pi + F::of(1e-15)) {
        return Err(GeometryError::InvalidParam(format!("xi must be in (0, pi/2], got {xi}")));
    }
    Ok(())
}

fn build_custom<F: Float>(
    specs: &[SegmentSpec<F>],
) -> Result<(F, Vec<SegKind<F>>), GeometryError> {
    if specs.is_empty() {
        return Err(GeometryError::MalformedCustom("no segments".into()));
    }
    let tol = F::of(1e-9);
    let segs: Vec<SegKind<F>> = specs
        .iter()
        .map(|s| match s {
            SegmentSpec::Line { p0, p1 } => SegKind::Line {
                p0: Vec2::new(p0[0], p0[1]),
                p1: Vec2::new(p1[0], p1[1]),
            },
            SegmentSpec::Arc { center, radius, angle_start, angle_end, concave } => SegKind::Arc {
                center: Vec2::new(center[0], center[1]),
                semi: Vec2::new(*radius, *radius),
                ang0: *angle_start,
                ang1: *angle_end,
                concave: *concave,
            },
            SegmentSpec::EllArc { center, semi_x, semi_y, angle_start, angle_end, concave } => {
                SegKind::Arc {
                    center: Vec2::new(center[0], center[1]),
                    semi: Vec2::new(*semi_x, *semi_y),
                    ang0: *angle_start,
                    ang1: *angle_end,
                    concave: *concave,
                }
            }
        })
        .collect();

    for s in &segs {
        if let SegKind::Arc { semi, ang0, ang1, .. } = s {
            if !(semi.x > F::zero() && semi.y > F::zero()) {
                return Err(GeometryError::MalformedCustom("arc with non-positive semi-axis".into()));
            }
            if !(*ang1 > *ang0) || *ang1 - *ang0 > F::PI() + F::PI() {
                return Err(GeometryError::MalformedCustom("bad arc angular range".into()));
            }
        }
    }

    // Segments must chain into a single path across the period, starting
    // at (0, 0) and ending at (period, 0).
    let start = segs[0].start();
    if start.dist(Vec2::zero()) > tol {
        return Err(GeometryError::MalformedCustom("path must start at (0, 0)".into()));
    }
    for w in segs.windows(2) {
        if w[0].end().dist(w[1].start()) > tol {
            return Err(GeometryError::MalformedCustom("segments do not chain".into()));
        }
    }
    let end = segs.last().unwrap().end();
    if end.y.abs() > tol || !(end.x > tol) {
        return Err(GeometryError::MalformedCustom(
            "path must end on the interface at (period, 0) with period > 0".into(),
        ));
    }
    // Depth band: normalized cells live in [-1, 0].
    for s in &segs {
        let lo = s.min_depth();
        let hi = s.start().y.max(s.end().y);
        if hi > tol || lo < -F::one() - tol {
            return Err(GeometryError::MalformedCustom("segment leaves the datum band".into()));
        }
    }
    // Overlap check between non-adjacent segments (coarse for arcs).
    let n = segs.len();
    for i in 0..n {
        for j in (i + 2)..n {
            if i == 0 && j == n - 1 {
                continue; // closes across the period boundary
            }
            if segments_touch(&segs[i], &segs[j], tol) {
                return Err(GeometryError::MalformedCustom(format!(
                    "segments {i} and {j} overlap"
                )));
            }
        }
    }
    Ok((end.x, segs))
}

fn segments_touch<F: Float>(a: &SegKind<F>, b: &SegKind<F>, tol: F) -> bool {
    let k = 33;
    let mut min_d = F::infinity();
    for i in 0..=k {
        let t = F::from_i32(i).unwrap() / F::from_i32(k).unwrap();
        let p = sample_seg(a, t);
        for j in 0..=k {
            let u = F::from_i32(j).unwrap() / F::from_i32(k).unwrap();
            min_d = min_d.min(p.dist(sample_seg(b, u)));
        }
    }
    min_d < tol
}

fn sample_seg<F: Float>(s: &SegKind<F>, t: F) -> Vec2<F> {
    match *s {
        SegKind::Line { .. } => s.point_at(t),
        SegKind::Arc { ang0, ang1, .. } => s.point_at(ang0 + (ang1 - ang0) * t),
    }
}

/// Foreshortening by mass ratio: the wall seen by the transverse part of
/// the disk-wall dynamics, compressed horizontally by `(1 + m/J)^{-1/2}`
/// at fixed depth. In the normalized (scale-1 cell + scale) representation
/// this is a vertical stretch of the cell by `(1 + m/J)^{1/2}` together
/// with `scale -> (1 + m/J)^{-1/2} * scale`.
pub fn foreshorten<F: Float>(
    spec: &WallSpec<F>,
    m: F,
    j: F,
) -> Result<WallSpec<F>, GeometryError> {
    if !(m > F::zero() && j > F::zero()) {
        return Err(GeometryError::InvalidParam(format!("m, J must be > 0, got m={m} J={j}")));
    }
    let c = (F::one() + m / j).sqrt().recip();
    foreshorten_by(spec, c)
}

/// Foreshortening with an explicit horizontal compression factor `c > 0`.
/// `foreshorten_by(c)` then `foreshorten_by(1/c)` recovers the original.
pub fn foreshorten_by<F: Float>(spec: &WallSpec<F>, c: F) -> Result<WallSpec<F>, GeometryError> {
    if !(c > F::zero()) || !c.is_finite() {
        return Err(GeometryError::InvalidParam(format!("factor must be > 0, got {c}")));
    }
    let family = match &spec.family {
        WallFamily::Flat => WallFamily::Flat,
        WallFamily::RectTeeth { r } => WallFamily::RectTeeth { r: *r / c },
        WallFamily::TriTeeth { psi } => {
            let half = F::of(0.5);
            WallFamily::TriTeeth { psi: F::of(2.0) * (c * (*psi * half).tan()).atan() }
        }
        WallFamily::CircArcs { xi } => {
            if (c - F::one()).abs() < F::of(1e-12) {
                WallFamily::CircArcs { xi: *xi }
            } else {
                WallFamily::EllArcs { xi: *xi, axis_ratio: c }
            }
        }
        WallFamily::EllArcs { xi, axis_ratio } => {
            let q = *axis_ratio * c;
            if (q - F::one()).abs() < F::of(1e-12) {
                WallFamily::CircArcs { xi: *xi }
            } else {
                WallFamily::EllArcs { xi: *xi, axis_ratio: q }
            }
        }
        WallFamily::Custom { segments } => {
            let s = c.recip();
            let stretched = segments
                .iter()
                .map(|seg| match seg {
                    SegmentSpec::Line { p0, p1 } => SegmentSpec::Line {
                        p0: [p0[0], p0[1] * s],
                        p1: [p1[0], p1[1] * s],
                    },
                    SegmentSpec::Arc { center, radius, angle_start, angle_end, concave } => {
                        SegmentSpec::EllArc {
                            center: [center[0], center[1] * s],
                            semi_x: *radius,
                            semi_y: *radius * s,
                            angle_start: *angle_start,
                            angle_end: *angle_end,
                            concave: *concave,
                        }
                    }
                    SegmentSpec::EllArc { center, semi_x, semi_y, angle_start, angle_end, concave } => {
                        SegmentSpec::EllArc {
                            center: [center[0], center[1] * s],
                            semi_x: *semi_x,
                            semi_y: *semi_y * s,
                            angle_start: *angle_start,
                            angle_end: *angle_end,
                            concave: *concave,
                        }
                    }
                })
                .collect();
            WallFamily::Custom { segments: stretched }
        }
    };
    Ok(WallSpec { family, scale: spec.scale * c, datum: spec.datum })
}
