//! Billiards on periodic microstructured walls.
//!
//! The crate simulates two coupled systems and the closed forms that
//! describe their small-scale limits:
//!
//! * a point particle reflecting specularly from a wall built from
//!   repeated cells (flat, rectangular teeth, triangular teeth, focusing
//!   circular or elliptical arcs, or custom segments), together with the
//!   macro-reflection map from the interface line back to itself
//!   ([`billiard2d`]);
//! * a disk carrying rim satellites bouncing on such a wall in a
//!   three-dimensional configuration space with a kinetic-energy inner
//!   product ([`diskwall`]), including the cylindrical law whose
//!   transverse part is exactly the planar billiard in a foreshortened
//!   wall.
//!
//! [`kernels`] holds the closed-form angle kernels of the built-in
//! microstructures plus samplers; [`stats`] the empirical-distribution
//! and verification machinery; [`verify`] the full acceptance suite; and
//! [`cli`] the command-line front end.
//!
//! All numerical code is generic over the scalar type via [`num::Float`];
//! the `Real` alias fixes the precision used by the binary.

// Parameter guards are written as `!(x > 0)` so that NaN fails them.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod billiard2d;
pub mod cli;
pub mod diskwall;
pub mod geom;
pub mod kernels;
pub mod num;
pub mod rng;
pub mod stats;
pub mod tol;
pub mod verify;
pub mod wall;

/// Scalar type used by the CLI and the acceptance suite.
pub type Real = f64;

pub type RealWall = wall::Wall<Real>;
pub type RealWallSpec = wall::WallSpec<Real>;
pub type RealKernel = kernels::Kernel<Real>;
pub type RealDiskParams = diskwall::DiskParams<Real>;
