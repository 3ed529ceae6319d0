//! Finite metric spaces with exact rational distances.

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};
use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::error::{Error, Result};

pub type Rational = BigRational;

pub fn rat(num: i64, den: i64) -> Rational {
    BigRational::new(BigInt::from(num), BigInt::from(den))
}

pub fn int(n: i64) -> Rational {
    BigRational::from_integer(BigInt::from(n))
}

/// Smallest integer `n` with `q <= n`.
pub fn ceil_int(q: &Rational) -> i64 {
    q.ceil().to_integer().to_i64().expect("distance fits in i64")
}

/// Distance band index: `n` such that `n - 1 < q < n`, or `None` when `q`
/// is an integer.
pub fn band(q: &Rational) -> Option<i64> {
    if q.is_integer() {
        None
    } else {
        Some(ceil_int(q))
    }
}

pub fn to_f64(q: &Rational) -> f64 {
    q.to_f64().unwrap_or(f64::NAN)
}

/// A finite metric space. `d` is a full symmetric matrix.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RationalMetricSpace {
    pub labels: Vec<String>,
    #[serde(rename = "distances", with = "matrix_serde")]
    pub d: Vec<Vec<Rational>>,
    #[serde(default)]
    pub integer_distance_free: bool,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "violation", rename_all = "snake_case")]
pub enum MetricViolation {
    Shape,
    NonZeroDiagonal { point: usize },
    Asymmetric { a: usize, b: usize },
    NonPositive { a: usize, b: usize },
    Triangle { a: usize, b: usize, c: usize },
    IntegerDistance { a: usize, b: usize },
}

impl RationalMetricSpace {
    pub fn new(labels: Vec<String>, d: Vec<Vec<Rational>>, integer_distance_free: bool) -> Self {
        RationalMetricSpace {
            labels,
            d,
            integer_distance_free,
        }
    }

    pub fn singleton(label: &str) -> Self {
        Self::new(vec![label.to_string()], vec![vec![Rational::zero()]], true)
    }

    pub fn len(&self) -> usize {
        self.labels.len()
    }

    pub fn is_empty(&self) -> bool {
        self.labels.is_empty()
    }

    #[inline]
    pub fn dist(&self, a: usize, b: usize) -> &Rational {
        &self.d[a][b]
    }

    pub fn diameter(&self) -> Rational {
        let mut best = Rational::zero();
        for row in &self.d {
            for q in row {
                if *q > best {
                    best = q.clone();
                }
            }
        }
        best
    }

    pub fn index_of(&self, label: &str) -> Option<usize> {
        self.labels.iter().position(|l| l == label)
    }

    /// Exact check of every metric axiom, plus integer-distance freeness when
    /// the space is flagged with it.
    pub fn validate(&self) -> Vec<MetricViolation> {
        let n = self.len();
        let mut out = Vec::new();
        if self.d.len() != n || self.d.iter().any(|r| r.len() != n) {
            out.push(MetricViolation::Shape);
            return out;
        }
        for a in 0..n {
            if !self.d[a][a].is_zero() {
                out.push(MetricViolation::NonZeroDiagonal { point: a });
            }
            for b in a + 1..n {
                if self.d[a][b] != self.d[b][a] {
                    out.push(MetricViolation::Asymmetric { a, b });
                }
                if !self.d[a][b].is_positive() {
                    out.push(MetricViolation::NonPositive { a, b });
                }
                if self.integer_distance_free && self.d[a][b].is_integer() {
                    out.push(MetricViolation::IntegerDistance { a, b });
                }
            }
        }
        for a in 0..n {
            for b in 0..n {
                for c in 0..n {
                    if a != b && b != c && a != c && self.d[a][c] > &self.d[a][b] + &self.d[b][c] {
                        out.push(MetricViolation::Triangle { a, b, c });
                    }
                }
            }
        }
        out
    }

    pub fn is_valid(&self) -> bool {
        self.validate().is_empty()
    }

    /// Appends a point whose distances to the existing points are `f`.
    /// The caller is responsible for `f` being Katetov.
    pub(crate) fn push_point(&mut self, label: String, f: &[Rational]) {
        debug_assert_eq!(f.len(), self.len());
        for (row, q) in self.d.iter_mut().zip(f) {
            row.push(q.clone());
        }
        let mut last: Vec<Rational> = f.to_vec();
        last.push(Rational::zero());
        self.d.push(last);
        self.labels.push(label);
    }

    /// A label not yet used in the space, built from `prefix`.
    pub fn fresh_label(&self, prefix: &str) -> String {
        let mut k = self.len();
        loop {
            let l = format!("{prefix}{k}");
            if self.index_of(&l).is_none() {
                return l;
            }
            k += 1;
        }
    }

    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(self)?)
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let s: RationalMetricSpace = serde_json::from_str(text)?;
        if s.d.len() != s.labels.len() {
            return Err(Error::InvalidMetric("distance matrix shape".into()));
        }
        Ok(s)
    }
}

/// `true` when `q` lies strictly between consecutive integers `n-1` and `n`.
pub fn strictly_in_band(q: &Rational, n: i64) -> bool {
    q > &int(n - 1) && q < &int(n)
}

/// Fractional distance to the nearest integers below and above.
pub fn integer_gaps(q: &Rational) -> (Rational, Rational) {
    let lo = q.floor();
    let hi = &lo + Rational::one();
    (q - &lo, hi - q)
}

mod matrix_serde {
    use super::*;

    pub fn serialize<S: Serializer>(d: &[Vec<Rational>], s: S) -> std::result::Result<S::Ok, S::Error> {
        let strings: Vec<Vec<String>> = d
            .iter()
            .map(|row| row.iter().map(|q| q.to_string()).collect())
            .collect();
        strings.serialize(s)
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(de: D) -> std::result::Result<Vec<Vec<Rational>>, D::Error> {
        let strings: Vec<Vec<String>> = Vec::deserialize(de)?;
        strings
            .into_iter()
            .map(|row| {
                row.into_iter()
                    .map(|s| {
                        s.trim()
                            .parse::<Rational>()
                            .map_err(|_| serde::de::Error::custom(format!("bad rational `{s}`")))
                    })
                    .collect()
            })
            .collect()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn space3(ab: Rational, bc: Rational, ac: Rational) -> RationalMetricSpace {
        let z = Rational::zero;
        RationalMetricSpace::new(
            vec!["a".into(), "b".into(), "c".into()],
            vec![
                vec![z(), ab.clone(), ac.clone()],
                vec![ab, z(), bc.clone()],
                vec![ac, bc, z()],
            ],
            false,
        )
    }

    #[test]
    fn one_point_space_is_valid() {
        assert!(RationalMetricSpace::singleton("x").is_valid());
    }

    #[test]
    fn triangle_violation_reported() {
        let s = space3(int(1), int(1), int(3));
        let v = s.validate();
        assert!(v.contains(&MetricViolation::Triangle { a: 0, b: 1, c: 2 }));
    }

    #[test]
    fn integer_flag_checked() {
        let mut s = space3(rat(13, 10), rat(7, 10), int(2));
        assert!(s.is_valid());
        s.integer_distance_free = true;
        assert_eq!(s.validate(), vec![MetricViolation::IntegerDistance { a: 0, b: 2 }]);
    }

    #[test]
    fn json_round_trip_is_exact() {
        let s = space3(rat(13, 10), rat(7, 10), rat(3, 2));
        let back = RationalMetricSpace::from_json(&s.to_json().unwrap()).unwrap();
        assert_eq!(s, back);
        assert!(s.to_json().unwrap().contains("\"13/10\""));
    }

    #[test]
    fn bands() {
        assert_eq!(band(&rat(13, 10)), Some(2));
        assert_eq!(band(&int(2)), None);
        assert_eq!(band(&rat(1, 3)), Some(1));
        assert!(strictly_in_band(&rat(197, 100), 2));
    }
}
