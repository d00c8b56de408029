//! Disk-with-satellites bouncing on a microstructured wall.
//!
//! The system state is a configuration-space point `y = (x1, x2, alpha)`
//! (disk center and orientation) and a velocity `w = (v1, v2, omega)` of
//! unit kinetic-energy norm. The representing point mass moves linearly
//! and reflects specularly, in the kinetic-energy inner product, whenever
//! one of the N rim satellites touches the wall. Two collision laws are
//! provided: the full law (`collide`, event detection on the satellite
//! clearances) and the cylindrical law (`collide_cyl`, where the axial
//! motion along the rolling direction decouples and the transverse motion
//! is a planar billiard in the foreshortened wall).

use rand::Rng;

use crate::billiard2d::{macro_reflection, Limits, ReflState, TraceError};
use crate::geom::Vec2;
use crate::kernels::Kernel;
use crate::num::Float;
use crate::tol;
use crate::wall::{build_wall, foreshorten, Datum, GeometryError, SegKind, Wall, WallSpec};

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct V3<F> {
    pub x: F,
    pub y: F,
    pub z: F,
}

impl<F: Float> V3<F> {
    pub fn new(x: F, y: F, z: F) -> Self {
        Self { x, y, z }
    }
    pub fn zero() -> Self {
        Self::new(F::zero(), F::zero(), F::zero())
    }
}

impl<F: Float> core::ops::Add for V3<F> {
    type Output = Self;
    fn add(self, o: Self) -> Self {
        Self::new(self.x + o.x, self.y + o.y, self.z + o.z)
    }
}
impl<F: Float> core::ops::Sub for V3<F> {
    type Output = Self;
    fn sub(self, o: Self) -> Self {
        Self::new(self.x - o.x, self.y - o.y, self.z - o.z)
    }
}
impl<F: Float> core::ops::Neg for V3<F> {
    type Output = Self;
    fn neg(self) -> Self {
        Self::new(-self.x, -self.y, -self.z)
    }
}
impl<F: Float> core::ops::Mul<F> for V3<F> {
    type Output = Self;
    fn mul(self, s: F) -> Self {
        Self::new(self.x * s, self.y * s, self.z * s)
    }
}

#[derive(Debug, thiserror::Error)]
pub enum DiskError {
    #[error("invalid parameter: {0}")]
    InvalidParam(String),
    #[error("velocity parallel to the rolling axis; spherical angle undefined")]
    DegenerateAngle,
    #[error("singular collision: {0}")]
    Singular(&'static str),
    #[error("exceeded bounce or time limit")]
    Capped,
    #[error(transparent)]
    Geometry(#[from] GeometryError),
}

impl From<TraceError> for DiskError {
    fn from(e: TraceError) -> Self {
        match e {
            TraceError::Singular(_) => DiskError::Singular("transverse billiard singular"),
            TraceError::Capped => DiskError::Capped,
            TraceError::NotIncoming => DiskError::Singular("not incoming"),
        }
    }
}

/// Mass, inertia, roughness scale and the satellite layout. The number of
/// satellites follows `N = max(8, round(2 pi eps^{-1/3}))`, which keeps
/// `rho -> 0` and `eps^{1/2}/rho -> 0` as `eps -> 0` with `2 pi / rho`
/// an integer.
#[derive(Clone, Copy, Debug)]
pub struct DiskParams<F> {
    pub m: F,
    pub j: F,
    pub eps: F,
    pub n_satellites: u32,
    pub rho: F,
}

impl<F: Float> DiskParams<F> {
    pub fn new(m: F, j: F, eps: F) -> Result<Self, DiskError> {
        if !(m > F::zero() && j > F::zero() && eps > F::zero()) {
            return Err(DiskError::InvalidParam(format!(
                "m, J, eps must be > 0, got m={m} J={j} eps={eps}"
            )));
        }
        let two_pi = F::PI() + F::PI();
        let n = (two_pi * eps.powf(-F::one() / F::of(3.0))).round().as_f64() as i64;
        let n = n.max(8) as u32;
        Ok(Self { m, j, eps, n_satellites: n, rho: two_pi / F::from_u32(n).unwrap() })
    }

    /// Kinetic-energy inner product `m(a1 b1 + a2 b2) + J a3 b3`.
    pub fn ke_dot(&self, a: V3<F>, b: V3<F>) -> F {
        self.m * (a.x * b.x + a.y * b.y) + self.j * a.z * b.z
    }

    pub fn ke_norm(&self, a: V3<F>) -> F {
        self.ke_dot(a, a).sqrt()
    }

    /// Unit rolling axis `(m+J)^{-1/2} (-1, 0, 1)`.
    pub fn chi(&self) -> V3<F> {
        let s = (self.m + self.j).sqrt().recip();
        V3::new(-s, F::zero(), s)
    }

    /// Unit vector spanning the interface plane together with `chi`.
    pub fn chi_perp(&self) -> V3<F> {
        let s = (self.m.recip() + self.j.recip()).sqrt().recip();
        V3::new(s / self.m, F::zero(), s / self.j)
    }

    /// Unit vertical `(0, m^{-1/2}, 0)`.
    pub fn e2_hat(&self) -> V3<F> {
        V3::new(F::zero(), self.m.sqrt().recip(), F::zero())
    }

    /// Bound on satellite speed for a unit-KE velocity.
    pub fn max_satellite_speed(&self) -> F {
        self.m.sqrt().recip() + self.j.sqrt().recip()
    }
}

/// A state on the interface plane: `y = (x1, 0, alpha)`, `w` of unit
/// kinetic-energy norm with `v2 > 0` for collision-law inputs. The
/// collision laws evolve the trajectory started at `(y, -w)`.
#[derive(Clone, Copy, Debug)]
pub struct ConfigState<F> {
    pub y: V3<F>,
    pub w: V3<F>,
}

impl<F: Float> ConfigState<F> {
    /// Validate the kinetic-energy norm (within 1e-9) and renormalize it
    /// to exactly 1.
    pub fn new(y: V3<F>, w: V3<F>, params: &DiskParams<F>) -> Result<Self, DiskError> {
        let n = params.ke_norm(w);
        if (n - F::one()).abs() > F::of(1e-9) {
            return Err(DiskError::InvalidParam(format!("|w| must be 1, got {n}")));
        }
        Ok(Self { y, w: w * n.recip() })
    }
}

/// Coordinates adapted to the rolling axis: spatial coordinates along
/// `(chi_perp, chi)` within the interface plane and spherical velocity
/// angles with the pole at `chi`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct TiltedState<F> {
    pub y1: F,
    pub y3: F,
    pub theta: F,
    pub psi: F,
}

pub fn to_tilted<F: Float>(
    s: &ConfigState<F>,
    params: &DiskParams<F>,
) -> Result<TiltedState<F>, DiskError> {
    let y1 = params.ke_dot(s.y, params.chi_perp());
    let y3 = params.ke_dot(s.y, params.chi());
    let w1 = params.ke_dot(s.w, params.chi_perp());
    let w2 = params.ke_dot(s.w, params.e2_hat());
    let wc = params.ke_dot(s.w, params.chi());
    let sin_psi = (w1 * w1 + w2 * w2).sqrt();
    if sin_psi < F::of(tol::DEGENERATE_POLE) {
        return Err(DiskError::DegenerateAngle);
    }
    Ok(TiltedState { y1, y3, theta: w2.atan2(w1), psi: sin_psi.atan2(wc) })
}

pub fn from_tilted<F: Float>(t: &TiltedState<F>, params: &DiskParams<F>) -> ConfigState<F> {
    let y = params.chi_perp() * t.y1 + params.chi() * t.y3;
    let w = params.chi_perp() * (t.theta.cos() * t.psi.sin())
        + params.e2_hat() * (t.theta.sin() * t.psi.sin())
        + params.chi() * t.psi.cos();
    ConfigState { y, w }
}

/// Positions of the N satellites for configuration `y`.
pub fn satellite_positions<F: Float>(y: V3<F>, params: &DiskParams<F>) -> Vec<Vec2<F>> {
    (0..params.n_satellites).map(|k| satellite_position(y, k, params)).collect()
}

#[inline]
pub fn satellite_position<F: Float>(y: V3<F>, k: u32, params: &DiskParams<F>) -> Vec2<F> {
    let phi = y.z + F::from_u32(k).unwrap() * params.rho;
    Vec2::new(y.x + phi.sin(), y.y - phi.cos())
}

/// Inward unit normal to the configuration-space boundary when the
/// satellite at rim angle `alpha_bar` touches the wall with outward wall
/// normal `k`: the kinetic-energy normalization of
/// `(k1/m, k2/m, (k1 cos(alpha_bar) + k2 sin(alpha_bar))/J)`.
pub fn contact_normal<F: Float>(k: Vec2<F>, alpha_bar: F, params: &DiskParams<F>) -> V3<F> {
    let torque = k.x * alpha_bar.cos() + k.y * alpha_bar.sin();
    let n = V3::new(k.x / params.m, k.y / params.m, torque / params.j);
    n * params.ke_norm(n).recip()
}

/// Projection of the velocity onto the (unnormalized) rolling direction:
/// `-m v1 + J omega`. Conserved by rough collision laws.
pub fn rolling_momentum<F: Float>(w: V3<F>, params: &DiskParams<F>) -> F {
    -params.m * w.x + params.j * w.z
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum CollisionKind {
    Smooth,
    NoSlip,
}

/// The deterministic collision matrices acting on actual velocities:
/// `Smooth` flips the vertical velocity; `NoSlip` also exchanges
/// translation and spin along the rolling direction.
pub fn collision_matrix<F: Float>(kind: CollisionKind, params: &DiskParams<F>) -> [[F; 3]; 3] {
    let (m, j) = (params.m, params.j);
    let s = m + j;
    let z = F::zero();
    match kind {
        CollisionKind::Smooth => [
            [F::one(), z, z],
            [z, -F::one(), z],
            [z, z, F::one()],
        ],
        CollisionKind::NoSlip => [
            [(m - j) / s, z, -(j + j) / s],
            [z, -F::one(), z],
            [-(m + m) / s, z, (j - m) / s],
        ],
    }
}

pub fn apply_collision_matrix<F: Float>(
    kind: CollisionKind,
    u: V3<F>,
    params: &DiskParams<F>,
) -> V3<F> {
    let a = collision_matrix(kind, params);
    V3::new(
        a[0][0] * u.x + a[0][1] * u.y + a[0][2] * u.z,
        a[1][0] * u.x + a[1][1] * u.y + a[1][2] * u.z,
        a[2][0] * u.x + a[2][1] * u.y + a[2][2] * u.z,
    )
}

/// One step of a rough collision law in tilted coordinates: the outgoing
/// angle is drawn from the kernel, the polar angle flips, and the spatial
/// coordinates stay put.
pub fn rough_collision_sample<F: Float, R: Rng>(
    kernel: &Kernel<F>,
    t: &TiltedState<F>,
    rng: &mut R,
) -> TiltedState<F> {
    TiltedState {
        y1: t.y1,
        y3: t.y3,
        theta: kernel.sample(t.theta, rng),
        psi: F::PI() - t.psi,
    }
}

#[derive(Clone, Copy, Debug)]
pub struct CollideOutcome<F> {
    pub state: ConfigState<F>,
    pub bounces: u64,
    pub time: F,
}

/// Simulator for one collision event (a single return to the interface
/// plane). Holds the wall at its own scale plus the foreshortened wall
/// used by the cylindrical law.
pub struct Collider<F: Float> {
    params: DiskParams<F>,
    wall: Wall<F>,
    fw_wall: Wall<F>,
    sqrt_m: F,
}

impl<F: Float> Collider<F> {
    pub fn new(spec: &WallSpec<F>, params: DiskParams<F>) -> Result<Self, DiskError> {
        if spec.datum != Datum::DiskWall {
            return Err(DiskError::InvalidParam(
                "collision laws need a wall in the disk_wall datum".into(),
            ));
        }
        if (spec.scale - params.eps).abs() > F::of(1e-12) * params.eps {
            return Err(DiskError::InvalidParam(
                "wall scale and DiskParams::eps disagree".into(),
            ));
        }
        let wall = build_wall(spec)?;
        let fw_wall = build_wall(&foreshorten(spec, params.m, params.j)?)?;
        Ok(Self { params, wall, fw_wall, sqrt_m: params.m.sqrt() })
    }

    pub fn params(&self) -> &DiskParams<F> {
        &self.params
    }

    pub fn foreshortened_wall(&self) -> &Wall<F> {
        &self.fw_wall
    }

    pub fn wall(&self) -> &Wall<F> {
        &self.wall
    }

    /// Cylindrical collision law: the velocity component along the
    /// rolling axis is constant for the whole excursion, and the
    /// transverse part runs the planar macro-reflection in the
    /// foreshortened wall.
    pub fn collide_cyl(
        &self,
        s: &ConfigState<F>,
        limits: Limits<F>,
    ) -> Result<CollideOutcome<F>, DiskError> {
        let t = to_tilted(s, &self.params)?;
        self.check_on_plane(s)?;
        // The transverse billiard runs in coordinates scaled by
        // m^{-1/2}, where the obstacle is exactly the foreshortened wall.
        let x2d = t.y1 / self.sqrt_m;
        let out = macro_reflection(&self.fw_wall, ReflState { x: x2d, theta: t.theta }, limits)?;
        let y1p = out.state.x * self.sqrt_m;
        let transverse_len = out.total_time * self.sqrt_m;
        let psi = t.psi;
        // Axial speed of the actual motion is -cos(psi); elapsed time is
        // the transverse path length over the transverse speed sin(psi).
        let y3p = t.y3 - psi.cos() * transverse_len / psi.sin();
        let tilted = TiltedState { y1: y1p, y3: y3p, theta: out.state.theta, psi: F::PI() - psi };
        Ok(CollideOutcome {
            state: from_tilted(&tilted, &self.params),
            bounces: out.bounces,
            time: transverse_len / psi.sin(),
        })
    }

    fn check_on_plane(&self, s: &ConfigState<F>) -> Result<(), DiskError> {
        if s.y.y.abs() > F::of(1e-9) {
            return Err(DiskError::InvalidParam("state must lie on the interface plane".into()));
        }
        if !(s.w.y > F::zero()) {
            return Err(DiskError::InvalidParam("velocity must have v2 > 0".into()));
        }
        let n = self.params.ke_norm(s.w);
        if (n - F::one()).abs() > F::of(1e-9) {
            return Err(DiskError::InvalidParam(format!("|w| must be 1, got {n}")));
        }
        Ok(())
    }

    /// Full collision law: free flight of the representing point mass,
    /// satellite-wall contact detection by safe stepping plus bisection
    /// plus Newton polish, specular reflection in the kinetic-energy
    /// inner product, until the trajectory returns to the interface
    /// plane.
    pub fn collide(
        &self,
        s: &ConfigState<F>,
        limits: Limits<F>,
    ) -> Result<CollideOutcome<F>, DiskError> {
        self.check_on_plane(s)?;
        let params = &self.params;
        let v_max = params.max_satellite_speed() * F::of(1.01);
        let d_enter = F::of(0.2) * self.wall.min_feature().min(params.eps);
        let d_floor = d_enter / F::of(64.0);

        let mut y = V3::new(s.y.x, F::zero(), s.y.z);
        let mut u = -s.w;
        let mut bounces: u64 = 0;
        let mut t_abs = F::zero();

        // Contact exactly at departure (the wall tops can touch the
        // plane): reflect immediately if some satellite is incoming.
        if let Some(c) = self.touching_contact(y, u)? {
            u = self.reflect_at(&c, u);
            bounces += 1;
        }

        let mut guard = 0u64;
        loop {
            guard += 1;
            if guard > 2_000_000 {
                return Err(DiskError::Capped);
            }
            if bounces > limits.max_bounces {
                return Err(DiskError::Capped);
            }
            // Time to cross the interface plane upward.
            let t_plane = if u.y > F::zero() { Some(-y.y / u.y) } else { None };

            // March to the next contact bracket.
            let mut t_lo = F::zero();
            let mut c_lo = self.clearance(y, u, t_lo).0;
            // Right after a reflection the bounced satellite sits on the
            // boundary within rounding; step off it before bracketing so
            // the bracket always starts on the positive side. A satellite
            // that fails to separate within a floor step is singular.
            if c_lo <= F::zero() {
                let mut freed = false;
                for k in 1..=8 {
                    let t = F::from_i32(k).unwrap() * d_floor / (F::of(8.0) * v_max);
                    let c = self.clearance(y, u, t).0;
                    if c > F::zero() {
                        t_lo = t;
                        c_lo = c;
                        freed = true;
                        break;
                    }
                }
                if !freed {
                    return Err(DiskError::Singular("satellite failed to separate"));
                }
            }
            let bracket = loop {
                if let Some(tp) = t_plane {
                    if t_lo >= tp {
                        break None;
                    }
                }
                // A step bounded by the clearance lower bound cannot skip
                // past a boundary; the floor keeps Zeno sequences moving
                // and is far smaller than any wall feature, so a crossing
                // within a floor step is still caught by the sign change.
                let step = if c_lo > d_enter {
                    (F::of(0.9) * c_lo).max(d_floor * F::of(0.25)) / v_max
                } else {
                    (F::of(0.5) * c_lo).max(d_floor * F::of(0.25)) / v_max
                };
                let mut t_hi = t_lo + step;
                if let Some(tp) = t_plane {
                    if t_hi > tp {
                        t_hi = tp;
                    }
                }
                let c_hi = self.clearance(y, u, t_hi).0;
                if c_hi < F::zero() {
                    break Some((t_lo, t_hi));
                }
                if t_abs + t_hi > limits.max_time {
                    return Err(DiskError::Capped);
                }
                t_lo = t_hi;
                c_lo = c_hi;
                if let Some(tp) = t_plane {
                    if t_lo >= tp && c_hi >= F::zero() {
                        break None;
                    }
                }
            };

            match bracket {
                None => {
                    // Free exit through the plane.
                    let tp = t_plane.ok_or(DiskError::Singular("no contact and no exit"))?;
                    let mut yp = y + u * tp;
                    yp.y = F::zero();
                    let out = ConfigState { y: yp, w: u };
                    return Ok(CollideOutcome { state: out, bounces, time: t_abs + tp });
                }
                Some((mut lo, mut hi)) => {
                    for _ in 0..90 {
                        let mid = (lo + hi) * F::of(0.5);
                        if self.clearance(y, u, mid).0 < F::zero() {
                            hi = mid;
                        } else {
                            lo = mid;
                        }
                    }
                    let (_, pair) = self.clearance(y, u, hi);
                    let Some(pair) = pair else {
                        return Err(DiskError::Singular("lost contact pair"));
                    };
                    let t_star = self.polish_contact(y, u, (lo + hi) * F::of(0.5), &pair)?;
                    let c = self.identify_contact(y, u, t_star, &pair)?;
                    y = y + u * t_star;
                    t_abs += t_star;
                    u = self.reflect_at(&c, u);
                    bounces += 1;
                }
            }
        }
    }

    /// Minimum signed clearance over satellites at flight parameter `t`,
    /// plus the realizing (satellite, segment) pair. The returned value
    /// is a lower bound on the true distance when positive.
    fn clearance(&self, y: V3<F>, u: V3<F>, t: F) -> (F, Option<PairRef>) {
        let yt = y + u * t;
        let params = &self.params;
        let mut best = F::infinity();
        let mut best_pair = None;
        for k in 0..params.n_satellites {
            let p = satellite_position(yt, k, params);
            let q = Vec2::new(p.x, p.y + F::one());
            if q.y >= best {
                continue; // the wall is below the interface of its band
            }
            let (d, pair) = self.wall_distance(q);
            if d < best {
                best = d;
                best_pair = pair.map(|(seg, period)| PairRef { satellite: k, seg, period });
            }
        }
        (best, best_pair)
    }

    /// Signed distance (lower bound) from a point to the wall boundary,
    /// negative inside the wall.
    fn wall_distance(&self, q: Vec2<F>) -> (F, Option<(usize, i64)>) {
        let wall = &self.wall;
        let period = wall.period();
        let k0 = wall.period_index_of(q.x);
        let mut best = F::infinity();
        let mut best_ref = None;
        for k in (k0 - 2)..=(k0 + 2) {
            let dx = F::from_i64(k).unwrap() * period;
            for (i, seg) in wall.segments().iter().enumerate() {
                let d = point_seg_lower_bound(seg, dx, q);
                if d < best {
                    best = d;
                    best_ref = Some((i, k));
                }
            }
        }
        let inside = q.y < wall.height(q.x);
        (if inside { -best } else { best }, best_ref)
    }

    /// Newton polish of the contact time on the identified pair's smooth
    /// implicit function, clamped near the bisection bracket.
    fn polish_contact(
        &self,
        y: V3<F>,
        u: V3<F>,
        t0: F,
        pair: &PairRef,
    ) -> Result<F, DiskError> {
        let params = &self.params;
        let seg = self.seg_of(pair);
        let mut t = t0;
        for _ in 0..4 {
            let yt = y + u * t;
            let p = satellite_position(yt, pair.satellite, params);
            let q = Vec2::new(p.x, p.y + F::one());
            let phi = yt.z + F::from_u32(pair.satellite).unwrap() * params.rho;
            let qdot = Vec2::new(u.x + u.z * phi.cos(), u.y + u.z * phi.sin());
            let (g, grad) = implicit_value(&seg, q);
            let gp = grad.dot(qdot);
            if gp.abs() < F::of(1e-300) {
                break;
            }
            let step = g / gp;
            t -= step;
            if step.abs() < F::of(1e-16) * (F::one() + t.abs()) {
                break;
            }
        }
        if !t.is_finite() || (t - t0).abs() > d_guard(t0) {
            return Ok(t0);
        }
        Ok(t.max(F::zero()))
    }

    fn seg_of(&self, pair: &PairRef) -> SegKind<F> {
        self.wall.segments()[pair.seg]
            .translated(F::from_i64(pair.period).unwrap() * self.wall.period())
    }

    /// Validate a polished contact and build its reflection data.
    fn identify_contact(
        &self,
        y: V3<F>,
        u: V3<F>,
        t: F,
        pair: &PairRef,
    ) -> Result<Contact<F>, DiskError> {
        let params = &self.params;
        let yt = y + u * t;
        let seg = self.seg_of(pair);
        let p = satellite_position(yt, pair.satellite, params);
        let q = Vec2::new(p.x, p.y + F::one());

        // Corner / extent check; collinear junctions are not corners.
        let interior = match seg {
            SegKind::Line { p0, p1 } => {
                let e = p1 - p0;
                let s = (q - p0).dot(e) / e.norm2();
                let end_d = s.min(F::one() - s) * e.norm();
                end_d >= F::of(tol::ENDPOINT)
            }
            SegKind::Arc { .. } => {
                let g = seg.arc_param_of(q);
                let (inr, edge) = seg.arc_in_range(g);
                inr && edge >= F::of(tol::ENDPOINT)
            }
        };
        let junction_normal = if interior {
            None
        } else {
            Some(
                self.wall
                    .boundary_normal_at(q, F::of(1e-9))
                    .ok_or(DiskError::Singular("contact at a wall corner"))?,
            )
        };

        // Multi-satellite contact check.
        for k in 0..params.n_satellites {
            if k == pair.satellite {
                continue;
            }
            let pk = satellite_position(yt, k, params);
            let qk = Vec2::new(pk.x, pk.y + F::one());
            if qk.y >= F::of(2.0) * F::of(tol::MULTI_CONTACT) {
                continue;
            }
            let (d, _) = self.wall_distance(qk);
            if d.abs() < F::of(tol::MULTI_CONTACT) {
                return Err(DiskError::Singular("simultaneous multi-satellite contact"));
            }
        }

        // Wall normal, oriented against the satellite velocity.
        let mut k_normal = junction_normal.unwrap_or_else(|| seg.outward_normal_at(q));
        let phi = yt.z + F::from_u32(pair.satellite).unwrap() * params.rho;
        let qdot = Vec2::new(u.x + u.z * phi.cos(), u.y + u.z * phi.sin());
        let approach = qdot.dot(k_normal);
        if approach > F::zero() {
            k_normal = -k_normal;
        }
        if qdot.dot(k_normal).abs() < F::of(tol::TANGENCY) * qdot.norm().max(F::of(1e-30)) {
            return Err(DiskError::Singular("tangential contact"));
        }
        Ok(Contact { k_normal, alpha_bar: phi })
    }

    fn reflect_at(&self, c: &Contact<F>, u: V3<F>) -> V3<F> {
        let n = contact_normal(c.k_normal, c.alpha_bar, &self.params);
        let un = self.params.ke_dot(u, n);
        u - n * (F::of(2.0) * un)
    }

    /// Contact at t = 0 with an incoming satellite, if any.
    fn touching_contact(&self, y: V3<F>, u: V3<F>) -> Result<Option<Contact<F>>, DiskError> {
        let params = &self.params;
        let touch = F::of(1e-12);
        let mut found: Option<PairRef> = None;
        let mut n_touching = 0;
        for k in 0..params.n_satellites {
            let p = satellite_position(y, k, params);
            let q = Vec2::new(p.x, p.y + F::one());
            if q.y > F::of(2.0) * touch {
                continue;
            }
            let (d, pair) = self.wall_distance(q);
            if d.abs() <= touch {
                n_touching += 1;
                found = pair.map(|(seg, period)| PairRef { satellite: k, seg, period });
            }
        }
        if n_touching == 0 {
            return Ok(None);
        }
        if n_touching > 1 {
            return Err(DiskError::Singular("simultaneous multi-satellite contact"));
        }
        let pair = found.ok_or(DiskError::Singular("lost contact pair"))?;
        let c = self.identify_contact(y, u, F::zero(), &pair)?;
        // Only an incoming satellite reflects; a separating touch flies on.
        let phi = c.alpha_bar;
        let qdot = Vec2::new(u.x + u.z * phi.cos(), u.y + u.z * phi.sin());
        if qdot.dot(c.k_normal) < F::zero() {
            Ok(Some(c))
        } else {
            Ok(None)
        }
    }
}

fn d_guard<F: Float>(t: F) -> F {
    F::of(1e-6) * (F::one() + t.abs())
}

#[derive(Clone, Copy, Debug)]
struct PairRef {
    satellite: u32,
    seg: usize,
    period: i64,
}

struct Contact<F> {
    k_normal: Vec2<F>,
    alpha_bar: F,
}

/// Implicit function of a segment whose zero set contains the boundary,
/// with its gradient; positive on the free side for lines and arcs alike.
fn implicit_value<F: Float>(seg: &SegKind<F>, q: Vec2<F>) -> (F, Vec2<F>) {
    match *seg {
        SegKind::Line { p0, p1 } => {
            let n = (p1 - p0).normalized().perp();
            ((q - p0).dot(n), n)
        }
        SegKind::Arc { center, semi, concave, .. } => {
            let ux = (q.x - center.x) / semi.x;
            let uy = (q.y - center.y) / semi.y;
            let g = ux * ux + uy * uy - F::one();
            let grad = Vec2::new(F::of(2.0) * ux / semi.x, F::of(2.0) * uy / semi.y);
            if concave {
                (-g, -grad)
            } else {
                (g, grad)
            }
        }
    }
}

/// Lower bound on the distance from `q` to a segment translated by `dx`.
/// Exact for lines; for arcs the ellipse is rescaled to a circle, which
/// under-estimates by at most the axis ratio.
fn point_seg_lower_bound<F: Float>(seg: &SegKind<F>, dx: F, q: Vec2<F>) -> F {
    match *seg {
        SegKind::Line { p0, p1 } => {
            let p0 = Vec2::new(p0.x + dx, p0.y);
            let p1 = Vec2::new(p1.x + dx, p1.y);
            let e = p1 - p0;
            let s = ((q - p0).dot(e) / e.norm2()).max(F::zero()).min(F::one());
            (q - (p0 + e * s)).norm()
        }
        SegKind::Arc { center, semi, .. } => {
            // Rescaling the ellipse to a circle shrinks lengths by at
            // most min(a, b), so this bounds the distance to the full
            // ellipse (hence to the arc) from below. Loose near the
            // continuation of the arc, which only shortens march steps.
            let c = Vec2::new(center.x + dx, center.y);
            let scale = semi.x.min(semi.y);
            let xi = Vec2::new((q.x - c.x) / semi.x, (q.y - c.y) / semi.y);
            (xi.norm() - F::one()).abs() * scale
        }
    }
}
