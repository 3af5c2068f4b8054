use std::ops::{Add, AddAssign, Div, Mul, Neg, Sub, SubAssign};

/// A point value of the magnetization, or any other real 3-vector.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct Vec3 {
    pub x1: f64,
    pub x2: f64,
    pub x3: f64,
}

impl Vec3 {
    pub const ZERO: Vec3 = Vec3::new(0.0, 0.0, 0.0);
    pub const E1: Vec3 = Vec3::new(1.0, 0.0, 0.0);
    pub const E2: Vec3 = Vec3::new(0.0, 1.0, 0.0);
    pub const E3: Vec3 = Vec3::new(0.0, 0.0, 1.0);

    pub const fn new(x1: f64, x2: f64, x3: f64) -> Self {
        Vec3 { x1, x2, x3 }
    }

    /// Unit basis vector for a 1-based component index.
    pub fn basis(component: usize) -> Option<Vec3> {
        match component {
            1 => Some(Vec3::E1),
            2 => Some(Vec3::E2),
            3 => Some(Vec3::E3),
            _ => None,
        }
    }

    /// Component by 1-based index, matching the (m1, m2, m3) convention.
    pub fn component(&self, index: usize) -> f64 {
        match index {
            1 => self.x1,
            2 => self.x2,
            3 => self.x3,
            _ => panic!("component index {index} out of range 1..=3"),
        }
    }

    pub fn to_array(self) -> [f64; 3] {
        [self.x1, self.x2, self.x3]
    }

    pub fn dot(self, other: Vec3) -> f64 {
        self.x1 * other.x1 + self.x2 * other.x2 + self.x3 * other.x3
    }

    pub fn norm_sq(self) -> f64 {
        self.dot(self)
    }

    pub fn norm(self) -> f64 {
        self.norm_sq().sqrt()
    }

    pub fn is_finite(self) -> bool {
        self.x1.is_finite() && self.x2.is_finite() && self.x3.is_finite()
    }

    pub fn max_abs(self) -> f64 {
        self.x1.abs().max(self.x2.abs()).max(self.x3.abs())
    }

    pub fn cross(self, other: Vec3) -> Vec3 {
        cross(self, other)
    }
}

/// Right-handed cross product `a × b`.
pub fn cross(a: Vec3, b: Vec3) -> Vec3 {
    Vec3::new(
        a.x2 * b.x3 - a.x3 * b.x2,
        a.x3 * b.x1 - a.x1 * b.x3,
        a.x1 * b.x2 - a.x2 * b.x1,
    )
}

/// `a × (b × c)` evaluated as two nested cross products.
pub fn triple_cross(a: Vec3, b: Vec3, c: Vec3) -> Vec3 {
    cross(a, cross(b, c))
}

impl Add for Vec3 {
    type Output = Vec3;
    fn add(self, rhs: Vec3) -> Vec3 {
        Vec3::new(self.x1 + rhs.x1, self.x2 + rhs.x2, self.x3 + rhs.x3)
    }
}

impl AddAssign for Vec3 {
    fn add_assign(&mut self, rhs: Vec3) {
        self.x1 += rhs.x1;
        self.x2 += rhs.x2;
        self.x3 += rhs.x3;
    }
}

impl Sub for Vec3 {
    type Output = Vec3;
    fn sub(self, rhs: Vec3) -> Vec3 {
        Vec3::new(self.x1 - rhs.x1, self.x2 - rhs.x2, self.x3 - rhs.x3)
    }
}

impl SubAssign for Vec3 {
    fn sub_assign(&mut self, rhs: Vec3) {
        self.x1 -= rhs.x1;
        self.x2 -= rhs.x2;
        self.x3 -= rhs.x3;
    }
}

impl Neg for Vec3 {
    type Output = Vec3;
    fn neg(self) -> Vec3 {
        Vec3::new(-self.x1, -self.x2, -self.x3)
    }
}

impl Mul<f64> for Vec3 {
    type Output = Vec3;
    fn mul(self, s: f64) -> Vec3 {
        Vec3::new(self.x1 * s, self.x2 * s, self.x3 * s)
    }
}

impl Mul<Vec3> for f64 {
    type Output = Vec3;
    fn mul(self, v: Vec3) -> Vec3 {
        v * self
    }
}

impl Div<f64> for Vec3 {
    type Output = Vec3;
    fn div(self, s: f64) -> Vec3 {
        Vec3::new(self.x1 / s, self.x2 / s, self.x3 / s)
    }
}

impl From<[f64; 3]> for Vec3 {
    fn from(a: [f64; 3]) -> Self {
        Vec3::new(a[0], a[1], a[2])
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn bac_cab(a: Vec3, b: Vec3, c: Vec3) -> Vec3 {
        b * a.dot(c) - c * a.dot(b)
    }

    #[test]
    fn cross_basis_and_antisymmetry() {
        assert_eq!(cross(Vec3::E1, Vec3::E2), Vec3::E3);
        let a = Vec3::new(0.3, -1.7, 2.2);
        assert_eq!(cross(a, a), Vec3::ZERO);
    }

    #[test]
    fn cross_hand_evaluated() {
        // (2*6 - 3*5, 3*4 - 1*6, 1*5 - 2*4)
        let got = cross(Vec3::new(1.0, 2.0, 3.0), Vec3::new(4.0, 5.0, 6.0));
        assert_eq!(got, Vec3::new(-3.0, 6.0, -3.0));
    }

    #[test]
    fn triple_cross_cases() {
        let got = triple_cross(Vec3::E1, Vec3::E1, Vec3::E2);
        assert_eq!(got, Vec3::new(0.0, -1.0, 0.0));
        let b = Vec3::new(0.5, 0.1, -2.0);
        assert_eq!(triple_cross(Vec3::new(1.0, 2.0, 3.0), b, b), Vec3::ZERO);

        let (a, b, c) = (
            Vec3::new(1.0, 2.0, 3.0),
            Vec3::new(4.0, 5.0, 6.0),
            Vec3::new(7.0, 8.0, 9.0),
        );
        let nested = triple_cross(a, b, c);
        let expanded = bac_cab(a, b, c);
        // b(a.c) - c(a.b) = (4,5,6)*50 - (7,8,9)*32 = (-24, -6, 12)
        assert_eq!(expanded, Vec3::new(-24.0, -6.0, 12.0));
        assert!((nested - expanded).norm() <= 1e-14 * expanded.norm());
    }

    fn vec3_strategy() -> impl Strategy<Value = Vec3> {
        (-10.0..10.0f64, -10.0..10.0f64, -10.0..10.0f64).prop_map(|(a, b, c)| Vec3::new(a, b, c))
    }

    fn unit(v: Vec3) -> Option<Vec3> {
        let n = v.norm();
        (n > 1e-3).then(|| v / n)
    }

    proptest! {
        #[test]
        fn cross_is_orthogonal_and_antisymmetric(a in vec3_strategy(), b in vec3_strategy()) {
            let (Some(a), Some(b)) = (unit(a), unit(b)) else { return Ok(()); };
            let c = cross(a, b);
            prop_assert!(c.dot(a).abs() <= 1e-14);
            prop_assert!(c.dot(b).abs() <= 1e-14);
            prop_assert!((c + cross(b, a)).max_abs() == 0.0);
        }

        #[test]
        fn lagrange_identity(a in vec3_strategy(), b in vec3_strategy()) {
            let (Some(a), Some(b)) = (unit(a), unit(b)) else { return Ok(()); };
            let lhs = cross(a, b).norm_sq();
            let rhs = a.norm_sq() * b.norm_sq() - a.dot(b).powi(2);
            prop_assert!((lhs - rhs).abs() <= 1e-12 * (1.0 + lhs.abs()));
        }

        #[test]
        fn triple_cross_matches_bac_cab(a in vec3_strategy(), b in vec3_strategy(), c in vec3_strategy()) {
            let nested = triple_cross(a, b, c);
            let expanded = bac_cab(a, b, c);
            let scale = a.norm() * b.norm() * c.norm();
            prop_assert!((nested - expanded).max_abs() <= 1e-14 * scale);
        }
    }
}
