//! Numerical tolerances shared across modules, as `f64` values (convert
//! with `F::of` where generic code needs them). Chosen for double
//! precision headroom across up to 10^6 reflections per trajectory.

/// A hit is tangential when |<dir, normal>| falls below this.
pub const TANGENCY: f64 = 1e-9;

/// Hits closer than this to a segment endpoint are treated as corner hits.
pub const ENDPOINT: f64 = 1e-11;

/// Target residual for first-hit intersection refinement.
pub const RESIDUAL: f64 = 1e-12;

/// Two first hits within this time of each other count as a corner tie.
pub const CORNER_TIE: f64 = 1e-11;

/// Kernel arguments this close to a discrete switching value are rejected
/// (or jittered by samplers) because the closed forms are undefined there.
pub const BOUNDARY_CASE: f64 = 1e-12;

/// Two satellites both within this distance of the wall at contact time
/// make the collision ill-defined.
pub const MULTI_CONTACT: f64 = 1e-11;

/// sin(psi) below this leaves the azimuthal angle undefined.
pub const DEGENERATE_POLE: f64 = 1e-12;

/// Kinetic-energy norm conservation per reflection.
pub const KE_NORM: f64 = 1e-12;

/// Default cap on reflections per trajectory.
pub const MAX_BOUNCES: u64 = 1_000_000;
