//! Minimal planar vector type used by the wall geometry and the 2D tracer.

use crate::num::Float;

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Vec2<F> {
    pub x: F,
    pub y: F,
}

impl<F: Float> Vec2<F> {
    pub fn new(x: F, y: F) -> Self {
        Self { x, y }
    }

    pub fn zero() -> Self {
        Self::new(F::zero(), F::zero())
    }

    /// Unit vector at direction angle `a` (counterclockwise from +x).
    pub fn from_angle(a: F) -> Self {
        Self::new(a.cos(), a.sin())
    }

    pub fn angle(self) -> F {
        self.y.atan2(self.x)
    }

    pub fn dot(self, o: Self) -> F {
        self.x * o.x + self.y * o.y
    }

    /// z-component of the cross product.
    pub fn cross(self, o: Self) -> F {
        self.x * o.y - self.y * o.x
    }

    pub fn norm2(self) -> F {
        self.dot(self)
    }

    pub fn norm(self) -> F {
        self.norm2().sqrt()
    }

    pub fn normalized(self) -> Self {
        self / self.norm()
    }

    /// Rotation by +90 degrees.
    pub fn perp(self) -> Self {
        Self::new(-self.y, self.x)
    }

    pub fn dist(self, o: Self) -> F {
        (self - o).norm()
    }
}

impl<F: Float> core::ops::Add for Vec2<F> {
    type Output = Self;
    fn add(self, o: Self) -> Self {
        Self::new(self.x + o.x, self.y + o.y)
    }
}

impl<F: Float> core::ops::Sub for Vec2<F> {
    type Output = Self;
    fn sub(self, o: Self) -> Self {
        Self::new(self.x - o.x, self.y - o.y)
    }
}

impl<F: Float> core::ops::Neg for Vec2<F> {
    type Output = Self;
    fn neg(self) -> Self {
        Self::new(-self.x, -self.y)
    }
}

impl<F: Float> core::ops::Mul<F> for Vec2<F> {
    type Output = Self;
    fn mul(self, s: F) -> Self {
        Self::new(self.x * s, self.y * s)
    }
}

impl<F: Float> core::ops::Div<F> for Vec2<F> {
    type Output = Self;
    fn div(self, s: F) -> Self {
        Self::new(self.x / s, self.y / s)
    }
}

/// Wrap an angle into (-pi, pi].
pub fn wrap_pi<F: Float>(a: F) -> F {
    let two_pi = F::PI() + F::PI();
    let mut r = a % two_pi;
    if r <= -F::PI() {
        r += two_pi;
    } else if r > F::PI() {
        r -= two_pi;
    }
    r
}

/// Wrap an angle into [0, 2*pi).
pub fn wrap_two_pi<F: Float>(a: F) -> F {
    let two_pi = F::PI() + F::PI();
    let mut r = a % two_pi;
    if r < F::zero() {
        r += two_pi;
    }
    r
}
