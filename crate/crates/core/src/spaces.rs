//! Metric space models: circle, sphere, flat torus, box and finite rational
//! spaces, with distance, circular order and uniform-measure ball volumes.
//!
//! The adjacency threshold is fixed at 1 throughout the crate; spaces are
//! expected to be scaled accordingly.

use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::metric::{to_f64, RationalMetricSpace};

/// Tolerance used only when checking that a sphere point has norm `r`.
pub const SPHERE_NORM_TOLERANCE: f64 = 1e-9;

/// A point of a space. Its arity and interpretation are fixed by the owning
/// [`SpaceDescriptor`]: one residue for circles, a 3-vector of norm `r` for
/// spheres, coordinates for tori and boxes, a label index for finite spaces.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(transparent)]
pub struct Point(pub Vec<f64>);

impl Point {
    pub fn coords(&self) -> &[f64] {
        &self.0
    }
}

impl From<Vec<f64>> for Point {
    fn from(v: Vec<f64>) -> Self {
        Point(v)
    }
}

/// Reduces `x` into `[0, length)`.
#[inline]
pub fn wrap(x: f64, length: f64) -> f64 {
    let r = x.rem_euclid(length);
    if r >= length {
        0.0
    } else {
        r
    }
}

/// The circle ℝ/Lℤ with the quotient metric.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Circle {
    #[serde(rename = "L")]
    pub length: f64,
}

impl Circle {
    pub fn new(length: f64) -> Result<Self> {
        if !(length.is_finite() && length > 0.0) {
            return Err(Error::InvalidSpace(format!("circle length {length}")));
        }
        Ok(Circle { length })
    }

    pub fn point(&self, x: f64) -> Point {
        Point(vec![wrap(x, self.length)])
    }

    pub fn residue(&self, p: &Point) -> Result<f64> {
        match p.0.as_slice() {
            [x] if (0.0..self.length).contains(x) => Ok(*x),
            _ => Err(Error::MismatchedSpace(format!(
                "{:?} is not a residue in [0, {})",
                p.0, self.length
            ))),
        }
    }

    /// `min(|x-y|, L-|x-y|)` on residues.
    #[inline]
    pub fn residue_distance(&self, x: f64, y: f64) -> f64 {
        let d = (x - y).abs();
        d.min(self.length - d)
    }

    pub fn distance(&self, p: &Point, q: &Point) -> Result<f64> {
        Ok(self.residue_distance(self.residue(p)?, self.residue(q)?))
    }

    /// Circular order on residues. False whenever two arguments coincide.
    #[inline]
    pub fn order_residues(x: f64, y: f64, z: f64) -> bool {
        (x < y && y < z) || (y < z && z < x) || (z < x && x < y)
    }

    pub fn circular_order(&self, a: &Point, b: &Point, c: &Point) -> Result<bool> {
        let (x, y, z) = (self.residue(a)?, self.residue(b)?, self.residue(c)?);
        if x == y || y == z || x == z {
            return Err(Error::DegenerateTriple);
        }
        Ok(Self::order_residues(x, y, z))
    }

    /// Group translation `a +_L [z]`, reduced into `[0, L)`.
    pub fn shift(&self, a: &Point, z: f64) -> Result<Point> {
        Ok(self.point(self.residue(a)? + z))
    }

    /// Residue of `x + k` for an integer shift `k`. The shift is reduced
    /// modulo `L` first so that integer `L` gives exact wrap-around.
    #[inline]
    pub fn shift_residue(&self, x: f64, k: i64) -> f64 {
        let kr = (k as f64).rem_euclid(self.length);
        let s = x + kr;
        let s = if s >= self.length { s - self.length } else { s };
        if s >= self.length || s < 0.0 {
            wrap(s, self.length)
        } else {
            s
        }
    }

    /// Offsets `d1, d2 ∈ [0, L)` with `b = a + d1`, `c = a + d2`, and the point
    /// `e = a + (d2 - d1)`.
    pub fn lemma_offsets(&self, a: &Point, b: &Point, c: &Point) -> Result<(f64, f64, Point)> {
        let (x, y, z) = (self.residue(a)?, self.residue(b)?, self.residue(c)?);
        if x == y || y == z || x == z {
            return Err(Error::DegenerateTriple);
        }
        let d1 = wrap(y - x, self.length);
        let d2 = wrap(z - x, self.length);
        Ok((d1, d2, self.point(x + (d2 - d1))))
    }
}

/// Sphere of radius `r` in ℝ³ with the geodesic metric.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Sphere {
    pub r: f64,
}

impl Sphere {
    pub fn new(r: f64) -> Result<Self> {
        if !(r.is_finite() && r > 0.0) {
            return Err(Error::InvalidSpace(format!("sphere radius {r}")));
        }
        Ok(Sphere { r })
    }

    /// Point in direction `v`, renormalized to norm `r`.
    pub fn point(&self, v: [f64; 3]) -> Result<Point> {
        let norm = (v[0] * v[0] + v[1] * v[1] + v[2] * v[2]).sqrt();
        if !(norm > 0.0 && norm.is_finite()) {
            return Err(Error::MismatchedSpace("zero direction vector".into()));
        }
        let s = self.r / norm;
        Ok(Point(vec![v[0] * s, v[1] * s, v[2] * s]))
    }

    fn check(&self, p: &Point) -> Result<()> {
        match p.0.as_slice() {
            [x, y, z] => {
                let norm = (x * x + y * y + z * z).sqrt();
                if (norm - self.r).abs() <= SPHERE_NORM_TOLERANCE * self.r.max(1.0) {
                    Ok(())
                } else {
                    Err(Error::MismatchedSpace(format!("norm {norm} != r {}", self.r)))
                }
            }
            _ => Err(Error::MismatchedSpace(format!("sphere point {:?}", p.0))),
        }
    }

    /// Geodesic distance via the two-argument arctangent of |p×q| and p·q.
    #[inline]
    pub fn raw_distance(&self, p: &[f64], q: &[f64]) -> f64 {
        let cx = p[1] * q[2] - p[2] * q[1];
        let cy = p[2] * q[0] - p[0] * q[2];
        let cz = p[0] * q[1] - p[1] * q[0];
        let cross = (cx * cx + cy * cy + cz * cz).sqrt();
        let dot = p[0] * q[0] + p[1] * q[1] + p[2] * q[2];
        self.r * cross.atan2(dot)
    }

    /// Area of the spherical cap of geodesic radius `rho`.
    pub fn cap_area(&self, rho: f64) -> f64 {
        let theta = (rho / self.r).min(PI);
        2.0 * PI * self.r * self.r * (1.0 - theta.cos())
    }
}

/// Flat torus ℝ²/(L1ℤ × L2ℤ).
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct FlatTorus {
    #[serde(rename = "L1")]
    pub l1: f64,
    #[serde(rename = "L2")]
    pub l2: f64,
}

impl FlatTorus {
    pub fn new(l1: f64, l2: f64) -> Result<Self> {
        if !(l1.is_finite() && l1 > 0.0 && l2.is_finite() && l2 > 0.0) {
            return Err(Error::InvalidSpace(format!("torus sides {l1} x {l2}")));
        }
        Ok(FlatTorus { l1, l2 })
    }

    #[inline]
    pub fn raw_distance(&self, p: &[f64], q: &[f64]) -> f64 {
        let dx = (p[0] - q[0]).abs();
        let dy = (p[1] - q[1]).abs();
        let dx = dx.min(self.l1 - dx);
        let dy = dy.min(self.l2 - dy);
        (dx * dx + dy * dy).sqrt()
    }

    /// Area of {(x, y) ∈ [-L1/2, L1/2] × [-L2/2, L2/2] : x² + y² < ρ²}.
    pub fn disc_area(&self, rho: f64) -> f64 {
        let a = rho.min(self.l1 / 2.0);
        let h = self.l2 / 2.0;
        // ∫ sqrt(ρ² - x²) dx
        let g = |x: f64| {
            let x = x.min(rho);
            0.5 * (x * (rho * rho - x * x).max(0.0).sqrt() + rho * rho * (x / rho).asin())
        };
        let quarter = if rho <= h {
            g(a)
        } else {
            let x0 = (rho * rho - h * h).sqrt();
            if a <= x0 {
                h * a
            } else {
                h * x0 + g(a) - g(x0)
            }
        };
        4.0 * quarter
    }
}

/// Axis-aligned box with the Euclidean metric (no uniform measure).
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct BoxSpace {
    pub sides: Vec<f64>,
}

impl BoxSpace {
    pub fn new(sides: Vec<f64>) -> Result<Self> {
        if sides.is_empty() || sides.iter().any(|s| !(s.is_finite() && *s > 0.0)) {
            return Err(Error::InvalidSpace(format!("box sides {sides:?}")));
        }
        Ok(BoxSpace { sides })
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum SpaceDescriptor {
    Circle(Circle),
    Sphere(Sphere),
    FlatTorus(FlatTorus),
    Box(BoxSpace),
    Finite { space: RationalMetricSpace },
}

impl SpaceDescriptor {
    pub fn circle(length: f64) -> Result<Self> {
        Ok(SpaceDescriptor::Circle(Circle::new(length)?))
    }

    pub fn sphere(r: f64) -> Result<Self> {
        Ok(SpaceDescriptor::Sphere(Sphere::new(r)?))
    }

    pub fn flat_torus(l1: f64, l2: f64) -> Result<Self> {
        Ok(SpaceDescriptor::FlatTorus(FlatTorus::new(l1, l2)?))
    }

    pub fn boxed(sides: Vec<f64>) -> Result<Self> {
        Ok(SpaceDescriptor::Box(BoxSpace::new(sides)?))
    }

    /// Re-checks the positivity invariants, e.g. after deserialization.
    pub fn validate(&self) -> Result<()> {
        match self {
            SpaceDescriptor::Circle(c) => Circle::new(c.length).map(|_| ()),
            SpaceDescriptor::Sphere(s) => Sphere::new(s.r).map(|_| ()),
            SpaceDescriptor::FlatTorus(t) => FlatTorus::new(t.l1, t.l2).map(|_| ()),
            SpaceDescriptor::Box(b) => BoxSpace::new(b.sides.clone()).map(|_| ()),
            SpaceDescriptor::Finite { space } => {
                let v = space.validate();
                if v.is_empty() {
                    Ok(())
                } else {
                    Err(Error::InvalidMetric(format!("{v:?}")))
                }
            }
        }
    }

    pub fn as_circle(&self) -> Option<&Circle> {
        match self {
            SpaceDescriptor::Circle(c) => Some(c),
            _ => None,
        }
    }

    pub fn kind_name(&self) -> &'static str {
        match self {
            SpaceDescriptor::Circle(_) => "circle",
            SpaceDescriptor::Sphere(_) => "sphere",
            SpaceDescriptor::FlatTorus(_) => "flat_torus",
            SpaceDescriptor::Box(_) => "box",
            SpaceDescriptor::Finite { .. } => "finite",
        }
    }

    pub fn arity(&self) -> usize {
        match self {
            SpaceDescriptor::Circle(_) | SpaceDescriptor::Finite { .. } => 1,
            SpaceDescriptor::Sphere(_) => 3,
            SpaceDescriptor::FlatTorus(_) => 2,
            SpaceDescriptor::Box(b) => b.sides.len(),
        }
    }

    /// Checks that `p` lies in the fundamental domain of this space.
    pub fn check_point(&self, p: &Point) -> Result<()> {
        let c = p.coords();
        if c.len() != self.arity() {
            return Err(Error::MismatchedSpace(format!(
                "arity {} for a {} space",
                c.len(),
                self.kind_name()
            )));
        }
        let in_range = |x: f64, hi: f64| (0.0..hi).contains(&x);
        let ok = match self {
            SpaceDescriptor::Circle(circle) => in_range(c[0], circle.length),
            SpaceDescriptor::Sphere(s) => return s.check(p),
            SpaceDescriptor::FlatTorus(t) => in_range(c[0], t.l1) && in_range(c[1], t.l2),
            SpaceDescriptor::Box(b) => c.iter().zip(&b.sides).all(|(&x, &s)| (0.0..=s).contains(&x)),
            SpaceDescriptor::Finite { space } => {
                c[0] >= 0.0 && c[0].fract() == 0.0 && (c[0] as usize) < space.len()
            }
        };
        if ok {
            Ok(())
        } else {
            Err(Error::MismatchedSpace(format!("{:?} outside the {} domain", c, self.kind_name())))
        }
    }

    pub fn distance(&self, p: &Point, q: &Point) -> Result<f64> {
        self.check_point(p)?;
        self.check_point(q)?;
        Ok(self.distance_unchecked(p, q))
    }

    /// Distance for points already known to belong to the space.
    #[inline]
    pub fn distance_unchecked(&self, p: &Point, q: &Point) -> f64 {
        let (a, b) = (p.coords(), q.coords());
        match self {
            SpaceDescriptor::Circle(c) => c.residue_distance(a[0], b[0]),
            SpaceDescriptor::Sphere(s) => s.raw_distance(a, b),
            SpaceDescriptor::FlatTorus(t) => t.raw_distance(a, b),
            SpaceDescriptor::Box(_) => a
                .iter()
                .zip(b)
                .map(|(x, y)| (x - y) * (x - y))
                .sum::<f64>()
                .sqrt(),
            SpaceDescriptor::Finite { space } => to_f64(space.dist(a[0] as usize, b[0] as usize)),
        }
    }

    /// Total mass of the canonical measure.
    pub fn total_measure(&self) -> Result<f64> {
        match self {
            SpaceDescriptor::Circle(c) => Ok(c.length),
            SpaceDescriptor::Sphere(s) => Ok(4.0 * PI * s.r * s.r),
            SpaceDescriptor::FlatTorus(t) => Ok(t.l1 * t.l2),
            SpaceDescriptor::Box(_) | SpaceDescriptor::Finite { .. } => Err(Error::NotUniform),
        }
    }

    /// μ(B_radius(x)) for the uniformly distributed measure; independent of x.
    pub fn ball_measure(&self, radius: f64) -> Result<f64> {
        if !(radius > 0.0) {
            return Err(Error::InvalidConfig(format!("ball radius {radius}")));
        }
        match self {
            SpaceDescriptor::Circle(c) => Ok((2.0 * radius).min(c.length)),
            SpaceDescriptor::Sphere(s) => Ok(s.cap_area(radius)),
            SpaceDescriptor::FlatTorus(t) => Ok(t.disc_area(radius)),
            SpaceDescriptor::Box(_) | SpaceDescriptor::Finite { .. } => Err(Error::NotUniform),
        }
    }

    /// Ball volume μ(X)/μ(B_1(x)).
    pub fn ball_volume_ratio(&self) -> Result<f64> {
        Ok(self.total_measure()? / self.ball_measure(1.0)?)
    }

    /// The α value a g.e.c. graph on a dense subset of this space has:
    /// the reciprocal of the ball volume.
    pub fn alpha_target(&self) -> Result<f64> {
        Ok(1.0 / self.ball_volume_ratio()?)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx_eq::close;

    mod approx_eq {
        pub fn close(a: f64, b: f64, tol: f64) -> bool {
            (a - b).abs() <= tol
        }
    }

    fn c5() -> Circle {
        Circle::new(5.0).unwrap()
    }

    #[test]
    fn circle_distance_examples() {
        let c = c5();
        let d = c.distance(&c.point(0.5), &c.point(4.8)).unwrap();
        assert!(close(d, 0.7, 1e-12));
        assert_eq!(c.distance(&c.point(1.3), &c.point(1.3)).unwrap(), 0.0);
    }

    #[test]
    fn sphere_antipodal() {
        let s = Sphere::new(2.0).unwrap();
        let space = SpaceDescriptor::Sphere(s);
        let p = s.point([1.0, 0.0, 0.0]).unwrap();
        let q = s.point([-1.0, 0.0, 0.0]).unwrap();
        assert!(close(space.distance(&p, &q).unwrap(), 2.0 * PI, 1e-12));
        assert_eq!(space.distance(&p, &p).unwrap(), 0.0);
    }

    #[test]
    fn circular_order_examples() {
        let c = c5();
        let p = |x| c.point(x);
        assert!(c.circular_order(&p(1.0), &p(2.0), &p(3.0)).unwrap());
        assert!(!c.circular_order(&p(2.0), &p(1.0), &p(3.0)).unwrap());
        assert!(c.circular_order(&p(4.0), &p(0.5), &p(2.0)).unwrap());
        assert_eq!(
            c.circular_order(&p(1.0), &p(1.0), &p(3.0)),
            Err(Error::DegenerateTriple)
        );
    }

    #[test]
    fn shift_examples() {
        let c = c5();
        assert_eq!(c.shift(&c.point(4.0), 2.0).unwrap(), c.point(1.0));
        assert_eq!(c.shift(&c.point(1.0), 0.0).unwrap(), c.point(1.0));
        assert_eq!(c.shift(&c.point(1.0), -3.0).unwrap(), c.point(3.0));
        assert_eq!(c.shift_residue(1.0, -3), 3.0);
        let c6 = Circle::new(6.0).unwrap();
        assert_eq!(c6.shift_residue(2.25, 6), 2.25);
        assert_eq!(c6.shift_residue(2.25, -12), 2.25);
    }

    #[test]
    fn lemma_offsets_examples() {
        let c = c5();
        let p = |x| c.point(x);
        let (d1, d2, e) = c.lemma_offsets(&p(0.0), &p(1.0), &p(3.0)).unwrap();
        assert_eq!((d1, d2), (1.0, 3.0));
        assert_eq!(e, p(2.0));
        let (d1, d2, e) = c.lemma_offsets(&p(4.0), &p(0.0), &p(1.0)).unwrap();
        assert_eq!((d1, d2), (1.0, 2.0));
        assert_eq!(e, p(0.0));
    }

    #[test]
    fn ball_measure_examples() {
        let c = SpaceDescriptor::circle(5.0).unwrap();
        assert_eq!(c.ball_measure(1.0).unwrap(), 2.0);
        assert_eq!(SpaceDescriptor::circle(3.0).unwrap().ball_measure(2.0).unwrap(), 3.0);
        let s = SpaceDescriptor::sphere(1.0).unwrap();
        // 2π(1 - cos 1), evaluated independently.
        assert!(close(s.ball_measure(1.0).unwrap(), 2.888_365_797_513_64, 1e-9));
        let b = SpaceDescriptor::boxed(vec![1.0, 2.0]).unwrap();
        assert_eq!(b.ball_measure(1.0), Err(Error::NotUniform));
    }

    #[test]
    fn ball_volume_examples() {
        assert_eq!(SpaceDescriptor::circle(5.0).unwrap().ball_volume_ratio().unwrap(), 2.5);
        assert_eq!(SpaceDescriptor::circle(2.0).unwrap().ball_volume_ratio().unwrap(), 1.0);
        let v = SpaceDescriptor::sphere(1.0).unwrap().ball_volume_ratio().unwrap();
        assert!(close(v, 4.350_685_299_34, 1e-9), "{v}");
        assert!(close(2.0 / (1.0 - 1f64.cos()), v, 1e-12));
    }

    #[test]
    fn torus_disc_area_limits() {
        let t = FlatTorus::new(3.0, 4.0).unwrap();
        assert!(close(t.disc_area(1.0), PI, 1e-12));
        assert!(close(t.disc_area(10.0), 12.0, 1e-9));
        // ρ between L1/2 and L2/2: disc clipped by the x-strip only.
        let rho: f64 = 1.8;
        let x0 = 1.5f64;
        let expected = 2.0 * (x0 * (rho * rho - x0 * x0).sqrt() + rho * rho * (x0 / rho).asin());
        assert!(close(t.disc_area(rho), expected, 1e-12));
    }

    #[test]
    fn serde_tagged_record() {
        let s = SpaceDescriptor::circle(5.3).unwrap();
        let text = serde_json::to_string(&s).unwrap();
        assert_eq!(text, r#"{"kind":"circle","L":5.3}"#);
        let back: SpaceDescriptor = serde_json::from_str(&text).unwrap();
        assert_eq!(back, s);
        let t: SpaceDescriptor = serde_json::from_str(r#"{"kind":"flat_torus","L1":2,"L2":3}"#).unwrap();
        assert_eq!(t, SpaceDescriptor::flat_torus(2.0, 3.0).unwrap());
    }

    #[test]
    fn mismatched_points_rejected() {
        let c = SpaceDescriptor::circle(5.0).unwrap();
        assert!(matches!(
            c.distance(&Point(vec![6.0]), &Point(vec![1.0])),
            Err(Error::MismatchedSpace(_))
        ));
        assert!(matches!(
            c.distance(&Point(vec![1.0, 2.0]), &Point(vec![1.0])),
            Err(Error::MismatchedSpace(_))
        ));
    }
}
