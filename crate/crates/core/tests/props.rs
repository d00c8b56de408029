//! Property tests for the geometric and algebraic invariants.

use proptest::prelude::*;

use rough_billiards::billiard2d::{macro_reflection, reflect, Limits, ReflState};
use rough_billiards::diskwall::{
    apply_collision_matrix, from_tilted, rolling_momentum, to_tilted, CollisionKind, ConfigState,
    DiskParams, TiltedState, V3,
};
use rough_billiards::geom::Vec2;
use rough_billiards::wall::{build_wall, foreshorten_by, Datum, WallFamily, WallSpec};

fn unit_angle() -> impl Strategy<Value = f64> {
    0.0..(2.0 * std::f64::consts::PI)
}

fn open_theta() -> impl Strategy<Value = f64> {
    0.05..(std::f64::consts::PI - 0.05)
}

proptest! {
    #[test]
    fn reflect_preserves_norm_and_involutes(d in unit_angle(), n in unit_angle()) {
        let dir = Vec2::from_angle(d);
        let normal = Vec2::from_angle(n);
        prop_assume!(dir.dot(normal) < -1e-6);
        let out = reflect(dir, normal).unwrap();
        prop_assert!((out.norm() - 1.0).abs() < 1e-12);
        // Reflecting the reversed outgoing ray recovers the reversed input.
        let back = reflect(-out, normal).unwrap();
        prop_assert!((back.x + dir.x).abs() < 1e-12);
        prop_assert!((back.y + dir.y).abs() < 1e-12);
    }

    #[test]
    fn macro_reflection_angle_stays_open(x in 0.0..2.0f64, theta in open_theta()) {
        let wall = build_wall(&WallSpec {
            family: WallFamily::TriTeeth { psi: 1.0 },
            scale: 1.0,
            datum: Datum::HalfPlane,
        })
        .unwrap();
        if let Ok(out) = macro_reflection(&wall, ReflState { x, theta }, Limits::default()) {
            prop_assert!(out.state.theta > 0.0 && out.state.theta < std::f64::consts::PI);
            prop_assert!((out.state.x - x).abs() <= wall.period() + 1e-9);
        }
    }

    #[test]
    fn foreshorten_round_trip(c in 0.2..5.0f64, psi in 0.3..2.8f64, scale in 0.1..3.0f64) {
        let spec = WallSpec {
            family: WallFamily::TriTeeth { psi },
            scale,
            datum: Datum::HalfPlane,
        };
        let back = foreshorten_by(&foreshorten_by(&spec, c).unwrap(), 1.0 / c).unwrap();
        let w0 = build_wall(&spec).unwrap();
        let w1 = build_wall(&back).unwrap();
        prop_assert!((w0.period() - w1.period()).abs() < 1e-12 * (1.0 + w0.period()));
        for (a, b) in w0.segments().iter().zip(w1.segments()) {
            prop_assert!(a.start().dist(b.start()) < 1e-9);
            prop_assert!(a.end().dist(b.end()) < 1e-9);
        }
    }

    #[test]
    fn tilted_round_trip(
        m in 0.2..4.0f64,
        j in 0.2..4.0f64,
        theta in open_theta(),
        psi in open_theta(),
        y1 in -2.0..2.0f64,
        y3 in -2.0..2.0f64,
    ) {
        let params = DiskParams::new(m, j, 1.0).unwrap();
        let t = TiltedState { y1, y3, theta, psi };
        let s = from_tilted(&t, &params);
        prop_assert!((params.ke_norm(s.w) - 1.0).abs() < 1e-12);
        let back = to_tilted(&s, &params).unwrap();
        prop_assert!((back.y1 - y1).abs() < 1e-12);
        prop_assert!((back.y3 - y3).abs() < 1e-12);
        prop_assert!((back.theta - theta).abs() < 1e-12);
        prop_assert!((back.psi - psi).abs() < 1e-12);
    }

    #[test]
    fn collision_matrices_are_ke_isometric_involutions(
        m in 0.1..6.0f64,
        j in 0.1..6.0f64,
        ux in -1.0..1.0f64,
        uy in -1.0..1.0f64,
        uz in -1.0..1.0f64,
    ) {
        let params = DiskParams::new(m, j, 1.0).unwrap();
        let u = V3::new(ux, uy, uz);
        for kind in [CollisionKind::Smooth, CollisionKind::NoSlip] {
            let v = apply_collision_matrix(kind, u, &params);
            prop_assert!((params.ke_dot(v, v) - params.ke_dot(u, u)).abs() < 1e-12);
            let w = apply_collision_matrix(kind, v, &params);
            prop_assert!((w.x - u.x).abs() < 1e-12);
            prop_assert!((w.y - u.y).abs() < 1e-12);
            prop_assert!((w.z - u.z).abs() < 1e-12);
        }
        prop_assert!(
            (rolling_momentum(apply_collision_matrix(CollisionKind::NoSlip, u, &params), &params)
                - rolling_momentum(u, &params))
            .abs()
                < 1e-12
        );
    }
}

#[test]
fn f32_instantiation_smoke() {
    // The core math is generic over the scalar; exercise it at f32.
    let spec = WallSpec::<f32> {
        family: WallFamily::RectTeeth { r: 1.0f32 },
        scale: 1.0,
        datum: Datum::HalfPlane,
    };
    let wall = build_wall(&spec).unwrap();
    assert_eq!(wall.segments().len(), 4);
    let out = macro_reflection(
        &wall,
        ReflState { x: 0.4f32, theta: 0.7 },
        Limits { max_bounces: 1000, max_time: f32::INFINITY },
    )
    .unwrap();
    assert!((out.state.theta - (std::f32::consts::PI - 0.7)).abs() < 1e-5);

    let p = DiskParams::new(1.0f32, 1.0, 0.5).unwrap();
    let w = V3::new(0.0f32, 1.0, 0.0);
    let w = w * p.ke_norm(w).recip();
    let s = ConfigState { y: V3::new(0.0f32, 0.0, 0.0), w };
    let t = to_tilted(&s, &p).unwrap();
    assert!((t.psi - std::f32::consts::FRAC_PI_2).abs() < 1e-5);
}
