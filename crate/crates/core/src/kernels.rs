//! Markov transition kernels on the reflection angle.
//!
//! Built-in kernels: specular and retro reflection, Lambertian
//! reflection (density sin(theta')/2), and the closed-form kernels of the
//! rectangular-teeth, triangular-teeth, and circular-arc microstructures.
//! The closed forms are validated against direct trajectory simulation;
//! where a printed formula and the trajectory dynamics disagree, the
//! dynamics win, so every function here is reconciled to the tracer.

use rand::Rng;
use rayon::prelude::*;

use crate::billiard2d::{macro_reflection, Limits, ReflState};
use crate::geom::{wrap_pi, wrap_two_pi, Vec2};
use crate::num::Float;
use crate::rng::{sample_sin_theta, uniform, Streams};
use crate::stats::EmpiricalDist;
use crate::tol;
use crate::wall::{build_wall, Wall, WallSpec};

#[derive(Debug, thiserror::Error, Clone, PartialEq)]
pub enum KernelError {
    #[error("argument sits on a switching boundary of the closed form")]
    BoundaryCase,
    #[error("singular trajectory (tangential or corner)")]
    Singular,
    #[error("too many excluded samples: {excluded} of {total}")]
    TooManySingular { excluded: usize, total: usize },
    #[error("invalid parameter: {0}")]
    InvalidParam(String),
    #[error("exceeded bounce or time limit")]
    Capped,
}

/// Angle kernel: for each incoming angle in (0, pi), a distribution of
/// outgoing angles in (0, pi).
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum Kernel<F> {
    /// theta -> pi - theta.
    Specular,
    /// theta -> theta.
    Retro,
    /// theta' ~ sin(theta')/2, independent of theta.
    Lambertian,
    /// Two atoms at {pi - theta, theta}.
    RectTeeth { r: F },
    /// Finitely many atoms from the wedge between two teeth.
    TriTeeth { psi: F },
    /// Continuous kernel of the focusing circular arc.
    CircArcs { xi: F },
    /// theta -> theta/2. Deliberately not measure-preserving; used as a
    /// negative control in the statistics tests.
    HalfAngle,
}

impl<F: Float> Kernel<F> {
    pub fn name(&self) -> &'static str {
        match self {
            Kernel::Specular => "specular",
            Kernel::Retro => "retro",
            Kernel::Lambertian => "lambertian",
            Kernel::RectTeeth { .. } => "rect_teeth",
            Kernel::TriTeeth { .. } => "tri_teeth",
            Kernel::CircArcs { .. } => "circ_arcs",
            Kernel::HalfAngle => "half_angle",
        }
    }

    /// Atom list `(angle, mass)` for purely atomic kernels, `None` for
    /// kernels with a continuous part.
    pub fn atoms(&self, theta: F) -> Result<Option<Vec<(F, F)>>, KernelError> {
        check_theta(theta)?;
        match *self {
            Kernel::Specular => Ok(Some(vec![(F::PI() - theta, F::one())])),
            Kernel::Retro => Ok(Some(vec![(theta, F::one())])),
            Kernel::HalfAngle => Ok(Some(vec![(theta * F::of(0.5), F::one())])),
            Kernel::RectTeeth { r } => {
                let p = rect_specular_prob(theta, r)?;
                Ok(Some(vec![(F::PI() - theta, p), (theta, F::one() - p)]))
            }
            Kernel::TriTeeth { psi } => Ok(Some(tri_atoms(theta, psi)?)),
            Kernel::Lambertian | Kernel::CircArcs { .. } => Ok(None),
        }
    }

    /// Density of the continuous part at `theta'` (only Lambertian has a
    /// closed-form density).
    pub fn density(&self, _theta: F, theta_out: F) -> Option<F> {
        match self {
            Kernel::Lambertian => Some(F::of(0.5) * theta_out.sin()),
            _ => None,
        }
    }

    /// Draw an outgoing angle. Arguments on a switching boundary of the
    /// closed forms are jittered by 1e-12 (logged once per process).
    pub fn sample<R: Rng>(&self, theta: F, rng: &mut R) -> F {
        match *self {
            Kernel::Specular => F::PI() - theta,
            Kernel::Retro => theta,
            Kernel::HalfAngle => theta * F::of(0.5),
            Kernel::Lambertian => sample_sin_theta(rng),
            Kernel::RectTeeth { r } => {
                let th = match rect_specular_prob(theta, r) {
                    Ok(_) => theta,
                    Err(_) => {
                        warn_jitter();
                        theta + F::of(1e-12)
                    }
                };
                let p = rect_specular_prob(th, r).expect("jittered angle still on boundary");
                let u: F = uniform(rng);
                if u < p {
                    F::PI() - th
                } else {
                    th
                }
            }
            Kernel::TriTeeth { psi } => {
                for _ in 0..64 {
                    let x: F = uniform(rng);
                    if let Ok((out, _)) = tri_exit(x, theta, psi) {
                        return out;
                    }
                    warn_jitter();
                }
                F::PI() - theta
            }
            Kernel::CircArcs { xi } => {
                for _ in 0..64 {
                    let x: F = uniform(rng);
                    if let Ok((out, _)) = circ_arc_map(x, theta, xi) {
                        return out;
                    }
                    warn_jitter();
                }
                F::PI() - theta
            }
        }
    }
}

fn check_theta<F: Float>(theta: F) -> Result<(), KernelError> {
    if theta > F::zero() && theta < F::PI() {
        Ok(())
    } else {
        Err(KernelError::InvalidParam(format!("theta must be in (0, pi), got {theta}")))
    }
}

fn warn_jitter() {
    use std::sync::Once;
    static ONCE: Once = Once::new();
    ONCE.call_once(|| {
        log::warn!("kernel argument on a switching boundary; jittered by 1e-12");
    });
}

/// Probability that the rectangular-teeth microstructure reflects
/// specularly (atom at pi - theta; the remaining mass retro-reflects).
///
/// Over one period, half the incoming rays land on tooth tops and reflect
/// specularly. Rays over a crevice of width 1 and depth `r` unfold to a
/// straight line that travels `z = 2 r |cot theta|` horizontally; the
/// number of crevice-wall crossings is floor(z) or floor(z)+1 with
/// probabilities 1-{z} and {z}, and an even count is specular. The tie
/// `z` integer is rejected as a boundary case.
pub fn rect_specular_prob<F: Float>(theta: F, r: F) -> Result<F, KernelError> {
    check_theta(theta)?;
    if !(r > F::zero()) || !r.is_finite() {
        return Err(KernelError::InvalidParam(format!("r must be > 0, got {r}")));
    }
    let z = F::of(2.0) * r * (theta.cos() / theta.sin()).abs();
    if (z - z.round()).abs() < F::of(tol::BOUNDARY_CASE) {
        return Err(KernelError::BoundaryCase);
    }
    let frac = z - z.floor();
    let even = (z.floor().as_f64() as i64) % 2 == 0;
    let half = F::of(0.5);
    let p_even_crossings = if even { F::one() - frac } else { frac };
    Ok(half + half * p_even_crossings)
}

/// Exit angle and bounce count for a particle entering the wedge between
/// two triangular teeth at fractional position `x` in (0, 1) across the
/// mouth, with incoming angle `theta`. Exact reflection recursion in the
/// physical wedge; every step is a closed-form ray/segment intersection.
pub fn tri_exit<F: Float>(x: F, theta: F, psi: F) -> Result<(F, u32), KernelError> {
    check_theta(theta)?;
    if !(psi > F::zero() && psi < F::PI()) {
        return Err(KernelError::InvalidParam(format!("psi must be in (0, pi), got {psi}")));
    }
    if !(x > F::zero() && x < F::one()) {
        return Err(KernelError::Singular);
    }
    let half = F::of(0.5);
    let depth = half / (psi * half).tan();
    let apex = Vec2::new(half, -depth);
    let peak_l = Vec2::<F>::zero();
    let peak_r = Vec2::new(F::one(), F::zero());
    // Every step is one closed-form intersection, so corner ambiguity
    // only exists at rounding level; a loose cutoff would bias the atom
    // masses by its own width.
    let corner_tol = F::of(1e-14);

    let mut p = Vec2::new(x, F::zero());
    let mut d = Vec2::from_angle(F::PI() + theta);
    let mut bounces = 0u32;
    for step in 0..256 {
        let t_min = if step == 0 { F::zero() } else { F::of(1e-14) };
        let mut best: Option<(F, Vec2<F>, Vec2<F>, F)> = None; // t, point, face dir, endpoint dist
        for (a, b) in [(peak_l, apex), (apex, peak_r)] {
            let e = b - a;
            let den = d.cross(e);
            if den.abs() < F::of(1e-300) {
                continue;
            }
            let t = (a - p).cross(e) / den;
            if t < t_min {
                continue;
            }
            let hit = p + d * t;
            let s = (hit - a).dot(e) / e.norm2();
            if s < -F::of(1e-12) || s > F::one() + F::of(1e-12) {
                continue;
            }
            let end_d = s.min(F::one() - s).max(F::zero()) * e.norm();
            if best.as_ref().is_none_or(|bb| t < bb.0) {
                best = Some((t, hit, e, end_d));
            }
        }
        let t_up = if d.y > F::zero() { Some(-p.y / d.y) } else { None };
        match (best, t_up) {
            (Some((t, hit, e, end_d)), tu) => {
                if let Some(tu) = tu {
                    if tu < t {
                        return Ok((d.angle(), bounces));
                    }
                }
                if end_d < corner_tol {
                    return Err(KernelError::Singular);
                }
                let n = e.normalized().perp();
                let dn = d.dot(n);
                if dn.abs() < F::of(tol::TANGENCY) {
                    return Err(KernelError::Singular);
                }
                d = (d - n * (F::of(2.0) * dn)).normalized();
                p = hit;
                bounces += 1;
            }
            (None, Some(_)) => return Ok((d.angle(), bounces)),
            (None, None) => return Err(KernelError::Singular),
        }
    }
    Err(KernelError::Capped)
}

/// Atom list of the triangular-teeth kernel, obtained by partitioning the
/// entry position into maximal intervals with a common outcome. The
/// breakpoints are pinned by bisection, so the masses are exact up to
/// rounding. Grooves with psi <= pi/2 produce at most two atoms; obtuse
/// grooves can produce three.
pub fn tri_atoms<F: Float>(theta: F, psi: F) -> Result<Vec<(F, F)>, KernelError> {
    check_theta(theta)?;
    const GRID: usize = 4096;
    let eval = |x: F| tri_exit(x, theta, psi).ok();
    let key = |o: &Option<(F, u32)>| o.map(|(th, nb)| ((th.as_f64() / 1e-9).round() as i64, nb));

    let xs: Vec<F> = (0..GRID)
        .map(|i| (F::from_usize(i).unwrap() + F::of(0.5)) / F::from_usize(GRID).unwrap())
        .collect();
    let outs: Vec<Option<(F, u32)>> = xs.iter().map(|&x| eval(x)).collect();

    let mut cuts: Vec<F> = vec![F::zero()];
    let mut labels: Vec<Option<(F, u32)>> = vec![outs[0]];
    for i in 1..GRID {
        if key(&outs[i]) != key(&outs[i - 1]) {
            // Bisect for the breakpoint between outcome i-1 and outcome i.
            let mut lo = xs[i - 1];
            let mut hi = xs[i];
            let left_key = key(&outs[i - 1]);
            for _ in 0..70 {
                let mid = (lo + hi) * F::of(0.5);
                if key(&eval(mid)) == left_key {
                    lo = mid;
                } else {
                    hi = mid;
                }
            }
            cuts.push((lo + hi) * F::of(0.5));
            labels.push(outs[i]);
        }
    }
    cuts.push(F::one());

    let mut atoms: Vec<(F, F)> = Vec::new();
    for (i, label) in labels.iter().enumerate() {
        let len = cuts[i + 1] - cuts[i];
        let Some((th, _)) = label else { continue };
        match atoms.iter_mut().find(|(a, _)| (*a - *th).abs() < F::of(1e-9)) {
            Some((_, m)) => *m += len,
            None => atoms.push((*th, len)),
        }
    }
    let total: F = atoms.iter().map(|&(_, m)| m).sum();
    if total < F::of(0.999) {
        return Err(KernelError::Singular);
    }
    for a in atoms.iter_mut() {
        a.1 = a.1 / total;
    }
    atoms.sort_by(|a, b| a.0.partial_cmp(&b.0).unwrap());
    Ok(atoms)
}

/// Deterministic exit angle of the focusing circular-arc microstructure:
/// entry position `x` in (0, 1) across one period, incoming angle
/// `theta`, arc half-angle `xi`. Returns the exit angle and the number of
/// arc hits.
///
/// The entry point lies inside the circle, so the forward ray-circle
/// intersection is unique; successive hit parameters advance by a
/// constant angle (equal chords subtend equal arcs), and the direction
/// advances by the same constant per bounce.
pub fn circ_arc_map<F: Float>(x: F, theta: F, xi: F) -> Result<(F, u32), KernelError> {
    check_theta(theta)?;
    if !(xi > F::zero() && xi <= F::FRAC_PI_2() + F::of(1e-15)) {
        return Err(KernelError::InvalidParam(format!("xi must be in (0, pi/2], got {xi}")));
    }
    if !(x >= F::zero() && x <= F::one()) {
        return Err(KernelError::InvalidParam(format!("x must be in [0, 1], got {x}")));
    }
    let endpoint = F::of(tol::ENDPOINT);
    if x < endpoint || x > F::one() - endpoint {
        return Err(KernelError::Singular);
    }
    let half = F::of(0.5);
    let radius = half / xi.sin();
    let center = Vec2::new(half, half / xi.tan());

    let delta0 = F::PI() + theta;
    let d = Vec2::from_angle(delta0);
    let q = Vec2::new(x, F::zero()) - center;
    let b = q.dot(d);
    let c2 = q.norm2() - radius * radius;
    debug_assert!(c2 <= F::zero(), "entry point must be inside the circle");
    let t = -b + (b * b - c2).sqrt();
    let hit = Vec2::new(x, F::zero()) + d * t;
    let gamma0 = (hit.x - center.x).atan2(center.y - hit.y);
    if (xi - gamma0.abs()) * radius < endpoint {
        return Err(KernelError::Singular);
    }

    // Per-bounce advance of both the hit parameter and the direction.
    let dpos = wrap_pi(F::of(2.0) * (gamma0 - delta0));
    if dpos.abs() < F::of(2.0 * tol::TANGENCY) {
        return Err(KernelError::Singular);
    }
    let span = if dpos > F::zero() { xi - gamma0 } else { -xi - gamma0 };
    let steps = span / dpos; // >= 0
    if (steps - steps.round()).abs() < F::of(1e-12) * (F::one() + steps) {
        return Err(KernelError::Singular); // exit chord grazes the arc end
    }
    let n = steps.floor().as_f64() as u32 + 1;
    let out = wrap_two_pi(delta0 + F::from_u32(n).unwrap() * dpos);
    if out <= F::of(tol::TANGENCY) || out >= F::PI() - F::of(tol::TANGENCY) {
        return Err(KernelError::Singular);
    }
    Ok((out, n))
}

/// Empirical law of the outgoing angle from `n` macro-reflections with
/// the entry position uniform over one period and fixed `theta`.
/// Singular and capped trajectories are excluded and counted; more than
/// 1% exclusions is an error.
pub fn averaged_kernel<F: Float>(
    spec: &WallSpec<F>,
    theta: F,
    n: usize,
    streams: &Streams,
) -> Result<EmpiricalDist<F>, KernelError> {
    check_theta(theta)?;
    let wall: Wall<F> =
        build_wall(spec).map_err(|e| KernelError::InvalidParam(e.to_string()))?;
    let period = wall.period();
    let results: Vec<Option<F>> = (0..n as u64)
        .into_par_iter()
        .map(|i| {
            let mut rng = streams.rng(i);
            let x: F = uniform::<F, _>(&mut rng) * period;
            macro_reflection(&wall, ReflState { x, theta }, Limits::default())
                .ok()
                .map(|o| o.state.theta)
        })
        .collect();
    let mut samples = Vec::with_capacity(n);
    let mut excluded = 0usize;
    for r in results {
        match r {
            Some(th) => samples.push(th),
            None => excluded += 1,
        }
    }
    if excluded * 100 > n {
        return Err(KernelError::TooManySingular { excluded, total: n });
    }
    Ok(EmpiricalDist::from_samples(samples, excluded, streams.seed))
}

/// Monte Carlo estimate of the symmetry defect
/// `E[f(theta, theta')] - E[f(theta', theta)]` with `theta ~ sin/2` and
/// `theta' ~ kernel(theta, .)`. Zero for kernels in detailed balance with
/// the sine measure.
pub fn detailed_balance_defect<F: Float>(
    kernel: &Kernel<F>,
    f: impl Fn(F, F) -> F + Sync,
    n: usize,
    streams: &Streams,
) -> F {
    // Collected in index order and summed sequentially: a parallel
    // reduction would make the rounding depend on the split points.
    let terms: Vec<F> = (0..n as u64)
        .into_par_iter()
        .map(|i| {
            let mut rng = streams.rng(i);
            let th: F = sample_sin_theta(&mut rng);
            let out = kernel.sample(th, &mut rng);
            f(th, out) - f(out, th)
        })
        .collect();
    terms.into_iter().sum::<F>() / F::from_usize(n).unwrap()
}

/// Exact symmetry defect for purely atomic kernels: the maximum over a
/// grid of `|p(theta -> theta') sin(theta) - p(theta' -> theta) sin(theta')|`.
pub fn detailed_balance_atomic_defect<F: Float>(
    kernel: &Kernel<F>,
    grid: &[F],
) -> Result<F, KernelError> {
    let mut worst = F::zero();
    for &th in grid {
        let atoms = kernel
            .atoms(th)?
            .ok_or_else(|| KernelError::InvalidParam("kernel has a continuous part".into()))?;
        for (out, p) in atoms {
            if p < F::of(1e-15) {
                continue;
            }
            let reverse = kernel.atoms(out)?.unwrap();
            let q = reverse
                .iter()
                .find(|(a, _)| (*a - th).abs() < F::of(1e-8))
                .map(|&(_, q)| q)
                .unwrap_or(F::zero());
            worst = worst.max((p * th.sin() - q * out.sin()).abs());
        }
    }
    Ok(worst)
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ChannelExit<F> {
    pub time: F,
    pub bounces: u64,
}

/// Escape of a particle from a planar channel of unit width and length
/// `length`, starting on the wall at axial position 0. Each flight at
/// angle `theta` (from the wall) crosses the channel in time
/// `1/sin(theta)` while moving `cot(theta)` along the axis; at each wall
/// hit the angle is resampled from the kernel. Returns the first time the
/// axial position leaves `[0, length]` (crossings interpolated within a
/// flight). With `entry = None` the initial angle is drawn from the
/// equilibrium density sin/2.
pub fn knudsen_exit_time<F: Float, R: Rng>(
    kernel: &Kernel<F>,
    length: F,
    entry: Option<F>,
    limits: Limits<F>,
    rng: &mut R,
) -> Result<ChannelExit<F>, KernelError> {
    if !(length >= F::zero()) {
        return Err(KernelError::InvalidParam(format!("length must be >= 0, got {length}")));
    }
    if length == F::zero() {
        return Ok(ChannelExit { time: F::zero(), bounces: 0 });
    }
    let mut theta = match entry {
        Some(t) => {
            check_theta(t)?;
            t
        }
        None => sample_sin_theta(rng),
    };
    let mut x = F::zero();
    let mut time = F::zero();
    let mut bounces = 0u64;
    loop {
        let dx = theta.cos() / theta.sin();
        let dt = theta.sin().recip();
        let x_new = x + dx;
        if dx > F::zero() && x_new >= length {
            return Ok(ChannelExit { time: time + (length - x) / dx * dt, bounces });
        }
        if dx < F::zero() && x_new <= F::zero() {
            return Ok(ChannelExit { time: time + (F::zero() - x) / dx * dt, bounces });
        }
        x = x_new;
        time += dt;
        bounces += 1;
        if bounces >= limits.max_bounces || time > limits.max_time {
            return Err(KernelError::Capped);
        }
        theta = kernel.sample(theta, rng);
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;
    use std::f64::consts::{FRAC_PI_2, FRAC_PI_3, FRAC_PI_4, PI};

    #[test]
    fn rect_prob_values() {
        // z = 2 r |cot theta|; p = 1/2 + (probability of an even number of
        // crevice-wall crossings)/2, checked by hand against short traces.
        assert_relative_eq!(rect_specular_prob(FRAC_PI_4, 0.3).unwrap(), 0.7, epsilon = 1e-15);
        let z = 2.0 / 3f64.sqrt();
        assert_relative_eq!(
            rect_specular_prob(FRAC_PI_3, 1.0).unwrap(),
            0.5 + 0.5 * (z - 1.0),
            epsilon = 1e-15
        );
        // Symmetric in theta <-> pi - theta.
        assert_relative_eq!(
            rect_specular_prob(1.1, 0.77).unwrap(),
            rect_specular_prob(PI - 1.1, 0.77).unwrap(),
            epsilon = 1e-15
        );
    }

    #[test]
    fn rect_prob_boundary_cases() {
        assert_eq!(rect_specular_prob(FRAC_PI_2, 1.0), Err(KernelError::BoundaryCase));
        // 2 r cot(pi/4) = 2 r: integer for r = 1.
        assert_eq!(rect_specular_prob(FRAC_PI_4, 1.0), Err(KernelError::BoundaryCase));
        assert!(rect_specular_prob(1.0, -1.0).is_err());
    }

    #[test]
    fn tri_right_angle_corner_retroreflects() {
        // psi = pi/2, theta = pi/4: every entry position retro-reflects.
        for x in [0.1, 0.3, 0.5, 0.7, 0.9] {
            let (out, _) = tri_exit(x, FRAC_PI_4, FRAC_PI_2).unwrap();
            assert_relative_eq!(out, FRAC_PI_4, epsilon = 1e-12);
        }
        let atoms = tri_atoms(FRAC_PI_4, FRAC_PI_2).unwrap();
        assert_eq!(atoms.len(), 1);
        assert_relative_eq!(atoms[0].0, FRAC_PI_4, epsilon = 1e-12);
        assert_relative_eq!(atoms[0].1, 1.0, epsilon = 1e-12);
    }

    #[test]
    fn tri_atoms_right_angle_at_pi_3() {
        // psi = pi/2, theta = pi/3: single-bounce exits at pi/6 for
        // entries left of tan(pi/6)... the breakpoint is at x = 1/sqrt(3);
        // the rest double-bounce to retro. Checked by hand.
        let atoms = tri_atoms(FRAC_PI_3, FRAC_PI_2).unwrap();
        assert_eq!(atoms.len(), 2);
        let p_spec = atoms.iter().find(|(a, _)| (a - PI / 6.0).abs() < 1e-9).unwrap().1;
        let p_retro = atoms.iter().find(|(a, _)| (a - FRAC_PI_3).abs() < 1e-9).unwrap().1;
        assert_relative_eq!(p_spec, 1.0 / 3f64.sqrt(), epsilon = 1e-10);
        assert_relative_eq!(p_retro, 1.0 - 1.0 / 3f64.sqrt(), epsilon = 1e-10);
    }

    #[test]
    fn tri_shallow_entry_always_single_bounce() {
        // psi = pi/2, theta = pi/6: the ray always hits the descending
        // face first and leaves at pi/3 (checked by hand; this makes the
        // kernel's detailed balance with the pi/3 state exact).
        let atoms = tri_atoms(PI / 6.0, FRAC_PI_2).unwrap();
        assert_eq!(atoms.len(), 1);
        assert_relative_eq!(atoms[0].0, FRAC_PI_3, epsilon = 1e-12);
    }

    #[test]
    fn tri_obtuse_groove_three_atoms() {
        let atoms = tri_atoms(0.7, 2.5).unwrap();
        assert_eq!(atoms.len(), 3);
        let masses: f64 = atoms.iter().map(|&(_, m)| m).sum();
        assert_relative_eq!(masses, 1.0, epsilon = 1e-12);
        // Single bounces off either face plus the double bounce.
        assert!(atoms.iter().any(|(a, _)| (a - 1.8).abs() < 1e-9));
        assert!(atoms.iter().any(|(a, _)| (a - (2.0 * PI - 2.5 - 0.7)).abs() < 1e-9));
        assert!(atoms.iter().any(|(a, _)| (a - (PI + 0.7 + 2.0 * 2.5 - 2.0 * PI)).abs() < 1e-9));
    }

    #[test]
    fn circ_normal_incidence_retro() {
        let (out, n) = circ_arc_map(0.5, FRAC_PI_2, FRAC_PI_2).unwrap();
        assert_relative_eq!(out, FRAC_PI_2, epsilon = 1e-12);
        assert_eq!(n, 1);
    }

    #[test]
    fn circ_flat_limit_is_specular() {
        let (out, _) = circ_arc_map(0.5, FRAC_PI_3, 0.1).unwrap();
        assert!((out - (PI - FRAC_PI_3)).abs() < 1e-2);
    }

    #[test]
    fn circ_endpoint_chord_is_singular() {
        // Entry at x = 1/4 with vertical incidence in the semicircular
        // bowl sends the second hit exactly onto the arc endpoint.
        assert_eq!(circ_arc_map(0.25, FRAC_PI_2, FRAC_PI_2), Err(KernelError::Singular));
    }

    #[test]
    fn circ_semicircle_worked_case() {
        // x = 0.26, theta = pi/2: first hit at gamma_0 = asin(-0.48),
        // per-bounce advance 2*(gamma_0 + pi/2), one hit (the second
        // chord would land past the arc end), exit angle wrapped into
        // (0, pi). Value frozen from the derivation and cross-checked
        // against an independent tracer.
        let (out, n) = circ_arc_map(0.26, FRAC_PI_2, FRAC_PI_2).unwrap();
        let gamma0 = (-0.48f64).asin();
        let dpos = 2.0 * (gamma0 + FRAC_PI_2);
        let expect = (3.0 * FRAC_PI_2 + dpos).rem_euclid(2.0 * PI);
        assert_eq!(n, 1);
        assert_relative_eq!(out, expect, epsilon = 1e-12);
        assert_relative_eq!(out, 0.5694869019857194, epsilon = 1e-12);
    }

    #[test]
    fn deterministic_kernels_sample_exactly() {
        let streams = Streams::new(9, "deterministic");
        let mut rng = streams.rng(0);
        assert_relative_eq!(Kernel::<f64>::Specular.sample(0.7, &mut rng), PI - 0.7);
        assert_relative_eq!(Kernel::<f64>::Retro.sample(0.7, &mut rng), 0.7);
        assert_relative_eq!(Kernel::<f64>::HalfAngle.sample(0.7, &mut rng), 0.35);
    }

    #[test]
    fn rect_sampler_hits_only_the_two_atoms() {
        let streams = Streams::new(11, "rect-atoms");
        let mut rng = streams.rng(0);
        let (theta, r) = (0.8, 0.6);
        let p = rect_specular_prob(theta, r).unwrap();
        let mut spec_count = 0usize;
        let n = 20_000;
        for _ in 0..n {
            let out = Kernel::RectTeeth { r }.sample(theta, &mut rng);
            if (out - (PI - theta)).abs() < 1e-12 {
                spec_count += 1;
            } else {
                assert_relative_eq!(out, theta, epsilon = 1e-12);
            }
        }
        let frac = spec_count as f64 / n as f64;
        assert!((frac - p).abs() < 4.0 * (p * (1.0 - p) / n as f64).sqrt());
    }

    #[test]
    fn samplers_stay_in_range() {
        let streams = Streams::new(42, "kernel-range");
        let mut rng = streams.rng(0);
        for kernel in [
            Kernel::Specular,
            Kernel::Retro,
            Kernel::Lambertian,
            Kernel::RectTeeth { r: 0.8 },
            Kernel::TriTeeth { psi: 1.1 },
            Kernel::CircArcs { xi: 1.0 },
        ] {
            for i in 0..200 {
                let th = 0.05 + 3.0 * (i as f64) / 200.0 * 0.98;
                let out = kernel.sample(th, &mut rng);
                assert!(out > 0.0 && out < PI, "{:?} {} -> {}", kernel, th, out);
            }
        }
    }

    #[test]
    fn knudsen_degenerate_cases() {
        let streams = Streams::new(1, "knudsen");
        let mut rng = streams.rng(0);
        let out = knudsen_exit_time(&Kernel::<f64>::Lambertian, 0.0, None, Limits::default(), &mut rng)
            .unwrap();
        assert_eq!(out.time, 0.0);
        assert_eq!(out.bounces, 0);

        // Retro from normal entry never makes axial progress.
        let capped = knudsen_exit_time(
            &Kernel::<f64>::Retro,
            10.0,
            Some(FRAC_PI_2),
            Limits { max_bounces: 10_000, max_time: f64::INFINITY },
            &mut rng,
        );
        assert_eq!(capped, Err(KernelError::Capped));
    }

    #[test]
    fn specular_kernel_exact_balance() {
        let grid: Vec<f64> = (0..64).map(|i| PI * (2.0 * i as f64 + 1.0) / 128.0).collect();
        let d = detailed_balance_atomic_defect(&Kernel::Specular, &grid).unwrap();
        assert!(d < 1e-15);
        let d = detailed_balance_atomic_defect(&Kernel::Retro, &grid).unwrap();
        assert!(d < 1e-15);
    }
}
