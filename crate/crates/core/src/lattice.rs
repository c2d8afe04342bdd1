//! Directional strips in `Z^q`, window enumeration, canonical monotone
//! sequences, and the two-strip decomposition of `Z^2`.
//!
//! A direction is `(1, b_2, ..., b_q)` with exact rational slopes. The strip of
//! widths `(w_2, ..., w_q)` holds the lattice points with
//! `b_i * m_1 - w_i / 2 <= m_i <= b_i * m_1 + w_i / 2` for every `i >= 2`,
//! both bounds inclusive.

use crate::error::{Error, Result};
use crate::rational::{self, ceil_i64, floor_i64, int, nearest_i64, Rational};
use num_traits::Signed;
use serde::Serialize;
use std::fmt;
use std::ops::{Add, Neg, Sub};

#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize)]
pub struct Direction {
    #[serde(serialize_with = "rational::serde_vec::serialize")]
    slopes: Vec<Rational>,
}

impl Direction {
    pub fn new(slopes: Vec<Rational>) -> Result<Self> {
        if slopes.is_empty() {
            return Err(Error::InvalidDirection(
                "a direction needs at least one slope (q >= 2)".into(),
            ));
        }
        Ok(Direction { slopes })
    }

    /// The planar direction `(1, beta)`.
    pub fn planar(beta: Rational) -> Self {
        Direction { slopes: vec![beta] }
    }

    pub fn q(&self) -> usize {
        self.slopes.len() + 1
    }

    pub fn slopes(&self) -> &[Rational] {
        &self.slopes
    }

    /// Slope of a planar direction.
    pub fn beta(&self) -> Result<&Rational> {
        if self.q() != 2 {
            return Err(Error::DimensionMismatch { expected: 2, found: self.q() });
        }
        Ok(&self.slopes[0])
    }
}

impl fmt::Display for Direction {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "(1")?;
        for s in &self.slopes {
            write!(f, ",{}", rational::format_rational(s))?;
        }
        write!(f, ")")
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize)]
pub struct Strip {
    direction: Direction,
    #[serde(serialize_with = "rational::serde_vec::serialize")]
    widths: Vec<Rational>,
}

impl Strip {
    pub fn new(direction: Direction, widths: Vec<Rational>) -> Result<Self> {
        if widths.len() != direction.slopes.len() {
            return Err(Error::DimensionMismatch {
                expected: direction.slopes.len(),
                found: widths.len(),
            });
        }
        if let Some(w) = widths.iter().find(|w| !w.is_positive()) {
            return Err(Error::InvalidWidth(format!(
                "widths must be positive, got {}",
                rational::format_rational(w)
            )));
        }
        Ok(Strip { direction, widths })
    }

    /// Same width in every transverse coordinate.
    pub fn uniform(direction: Direction, width: Rational) -> Result<Self> {
        let widths = vec![width; direction.slopes.len()];
        Strip::new(direction, widths)
    }

    /// The planar strip around `(1, beta)` of width `width`.
    pub fn planar(beta: Rational, width: Rational) -> Result<Self> {
        Strip::new(Direction::planar(beta), vec![width])
    }

    pub fn direction(&self) -> &Direction {
        &self.direction
    }

    pub fn widths(&self) -> &[Rational] {
        &self.widths
    }

    pub fn q(&self) -> usize {
        self.direction.q()
    }

    pub fn contains(&self, p: &LatticePoint) -> Result<bool> {
        strip_contains(self, p)
    }

    /// Integer range of coordinate `i + 2` allowed above `m`, or `None` when empty.
    fn transverse_ranges(&self, m: i64) -> Option<Vec<(i64, i64)>> {
        let m = int(m);
        let mut ranges = Vec::with_capacity(self.widths.len());
        for (beta, width) in self.direction.slopes.iter().zip(&self.widths) {
            let center = beta * &m;
            let half = width / int(2);
            let lo = ceil_i64(&(&center - &half));
            let hi = floor_i64(&(&center + &half));
            if lo > hi {
                return None;
            }
            ranges.push((lo, hi));
        }
        Some(ranges)
    }
}

/// A point of `Z^q`.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize)]
#[serde(transparent)]
pub struct LatticePoint(Vec<i64>);

impl LatticePoint {
    pub fn new(coords: Vec<i64>) -> Self {
        LatticePoint(coords)
    }

    pub fn planar(m: i64, n: i64) -> Self {
        LatticePoint(vec![m, n])
    }

    pub fn zero(q: usize) -> Self {
        LatticePoint(vec![0; q])
    }

    pub fn q(&self) -> usize {
        self.0.len()
    }

    pub fn coords(&self) -> &[i64] {
        &self.0
    }

    /// First coordinate `m_1`.
    pub fn m(&self) -> i64 {
        self.0[0]
    }

    pub fn is_zero(&self) -> bool {
        self.0.iter().all(|&c| c == 0)
    }

    fn check_same_q(&self, other: &LatticePoint) {
        assert_eq!(self.q(), other.q(), "lattice points of different dimension");
    }
}

impl fmt::Display for LatticePoint {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "(")?;
        for (i, c) in self.0.iter().enumerate() {
            if i > 0 {
                write!(f, ",")?;
            }
            write!(f, "{c}")?;
        }
        write!(f, ")")
    }
}

impl Add for &LatticePoint {
    type Output = LatticePoint;
    fn add(self, rhs: &LatticePoint) -> LatticePoint {
        self.check_same_q(rhs);
        LatticePoint(self.0.iter().zip(&rhs.0).map(|(a, b)| a + b).collect())
    }
}

impl Sub for &LatticePoint {
    type Output = LatticePoint;
    fn sub(self, rhs: &LatticePoint) -> LatticePoint {
        self.check_same_q(rhs);
        LatticePoint(self.0.iter().zip(&rhs.0).map(|(a, b)| a - b).collect())
    }
}

impl Neg for &LatticePoint {
    type Output = LatticePoint;
    fn neg(self) -> LatticePoint {
        LatticePoint(self.0.iter().map(|c| -c).collect())
    }
}

/// An ordered list of lattice points, optionally tied to the strip it was
/// drawn from. When a strip is attached, first coordinates are strictly
/// monotone and every point lies in the strip.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SequenceSpec {
    points: Vec<LatticePoint>,
    strip: Option<Strip>,
}

impl SequenceSpec {
    pub fn new(points: Vec<LatticePoint>, strip: Option<Strip>) -> Result<Self> {
        let q = match (&strip, points.first()) {
            (Some(s), _) => s.q(),
            (None, Some(p)) => p.q(),
            (None, None) => return Ok(SequenceSpec { points, strip }),
        };
        if let Some(p) = points.iter().find(|p| p.q() != q) {
            return Err(Error::DimensionMismatch { expected: q, found: p.q() });
        }
        if let Some(strip) = &strip {
            let increasing = points.windows(2).all(|w| w[0].m() < w[1].m());
            let decreasing = points.windows(2).all(|w| w[0].m() > w[1].m());
            if !(increasing || decreasing) {
                return Err(Error::InvalidArgument(
                    "first coordinates of a strip sequence must be strictly monotone".into(),
                ));
            }
            for p in &points {
                if !strip_contains(strip, p)? {
                    return Err(Error::InvalidArgument(format!("{p} is not in the strip")));
                }
            }
        }
        Ok(SequenceSpec { points, strip })
    }

    /// A free sequence with no strip attached.
    pub fn explicit(points: Vec<LatticePoint>) -> Result<Self> {
        SequenceSpec::new(points, None)
    }

    pub fn points(&self) -> &[LatticePoint] {
        &self.points
    }

    pub fn strip(&self) -> Option<&Strip> {
        self.strip.as_ref()
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    pub(crate) fn from_parts_unchecked(points: Vec<LatticePoint>, strip: Option<Strip>) -> Self {
        SequenceSpec { points, strip }
    }
}

pub fn strip_contains(strip: &Strip, p: &LatticePoint) -> Result<bool> {
    if p.q() != strip.q() {
        return Err(Error::DimensionMismatch { expected: strip.q(), found: p.q() });
    }
    let m = int(p.m());
    let two = int(2);
    Ok(strip
        .direction
        .slopes
        .iter()
        .zip(&strip.widths)
        .zip(&p.0[1..])
        .all(|((beta, width), &coord)| {
            let center = beta * &m;
            let half = width / &two;
            let c = int(coord);
            &center - &half <= c && c <= &center + &half
        }))
}

/// All strip points with `m_1` in `[m_lo, m_hi]`, in lexicographic order.
pub fn strip_points(strip: &Strip, m_lo: i64, m_hi: i64) -> Result<Vec<LatticePoint>> {
    if m_lo > m_hi {
        return Err(Error::InvalidArgument(format!("empty m-range [{m_lo}, {m_hi}]")));
    }
    let mut out = Vec::new();
    for m in m_lo..=m_hi {
        let Some(ranges) = strip.transverse_ranges(m) else {
            continue;
        };
        let mut current: Vec<i64> = std::iter::once(m).chain(ranges.iter().map(|r| r.0)).collect();
        // odometer over the transverse ranges, last coordinate fastest
        loop {
            out.push(LatticePoint(current.clone()));
            let mut axis = ranges.len();
            loop {
                if axis == 0 {
                    break;
                }
                let (lo, hi) = ranges[axis - 1];
                if current[axis] < hi {
                    current[axis] += 1;
                    break;
                }
                current[axis] = lo;
                axis -= 1;
            }
            if axis == 0 {
                break;
            }
        }
    }
    Ok(out)
}

/// Canonical monotone sequence in `strip`: `m_i = start_m + i * stride` for
/// `i = 0..count`, each transverse coordinate the nearest integer to
/// `b_j * m_i` (ties toward negative infinity).
pub fn monotone_sequence(strip: &Strip, count: usize, stride: i64, start_m: i64) -> Result<SequenceSpec> {
    if count == 0 {
        return Err(Error::InvalidArgument("count must be at least 1".into()));
    }
    if stride < 1 {
        return Err(Error::InvalidArgument("stride must be at least 1".into()));
    }
    let mut points = Vec::with_capacity(count);
    for i in 0..count as i64 {
        let m = start_m + i * stride;
        let mr = int(m);
        let mut coords = vec![m];
        coords.extend(strip.direction.slopes.iter().map(|beta| nearest_i64(&(beta * &mr))));
        let p = LatticePoint(coords);
        if !strip_contains(strip, &p)? {
            return Err(Error::InfeasiblePoint { m });
        }
        points.push(p);
    }
    Ok(SequenceSpec { points, strip: Some(strip.clone()) })
}

/// Smallest width `b` is required to exceed for [`decompose`]:
/// `4 * (floor|b_1 - b_2| + 1)`.
pub fn decomposition_width_bound(v: &Direction, w: &Direction) -> Result<Rational> {
    let gap = (v.beta()? - w.beta()?).abs();
    Ok(int(4 * (floor_i64(&gap) + 1)))
}

/// Splits `p` into `p1 + p2` with `p1` in the `v`-strip and `p2` in the
/// `w`-strip, both of width `b`.
///
/// `m_1` is the integer nearest to `(n - b_2 m) / (b_1 - b_2)` (ties toward
/// negative infinity), which keeps `|n - b_2 m - (b_1 - b_2) m_1| <= |b_1 - b_2| / 2`.
/// `n_1` is the integer nearest to `b_1 m_1`, so `n_1 = b_1 m_1 + r` with
/// `|r| <= 1/2` and `|n_2 - b_2 m_2| <= |b_1 - b_2| / 2 + 1/2 <= b / 2`.
pub fn decompose(
    p: &LatticePoint,
    v: &Direction,
    w: &Direction,
    b: &Rational,
) -> Result<(LatticePoint, LatticePoint)> {
    if p.q() != 2 {
        return Err(Error::DimensionMismatch { expected: 2, found: p.q() });
    }
    let beta1 = v.beta()?;
    let beta2 = w.beta()?;
    if beta1 == beta2 {
        return Err(Error::ParallelDirections);
    }
    let minimum = decomposition_width_bound(v, w)?;
    if *b <= minimum {
        return Err(Error::WidthTooSmall { width: Box::new(b.clone()), minimum: Box::new(minimum) });
    }
    let (m, n) = (int(p.m()), int(p.0[1]));
    let gap = beta1 - beta2;
    let offset = &n - beta2 * &m;
    let m1 = nearest_i64(&(offset / &gap));
    let n1 = nearest_i64(&(beta1 * int(m1)));
    let p1 = LatticePoint::planar(m1, n1);
    let p2 = p - &p1;
    debug_assert!({
        let sv = Strip::planar(beta1.clone(), b.clone())?;
        let sw = Strip::planar(beta2.clone(), b.clone())?;
        strip_contains(&sv, &p1)? && strip_contains(&sw, &p2)?
    });
    Ok((p1, p2))
}

/// Points of the box `[-radius, radius]^q` ordered by sup-norm shell, then
/// lexicographically, so every smaller box is a prefix of a larger one.
pub fn box_points(q: usize, radius: i64) -> Vec<LatticePoint> {
    let mut pts: Vec<LatticePoint> = (0..q)
        .map(|_| -radius..=radius)
        .fold(vec![Vec::new()], |acc, range| {
            acc.into_iter()
                .flat_map(|prefix| {
                    range.clone().map(move |c| {
                        let mut v = prefix.clone();
                        v.push(c);
                        v
                    })
                })
                .collect()
        })
        .into_iter()
        .map(LatticePoint)
        .collect();
    pts.sort_by(|a, b| {
        let na = a.0.iter().map(|c| c.abs()).max().unwrap_or(0);
        let nb = b.0.iter().map(|c| c.abs()).max().unwrap_or(0);
        na.cmp(&nb).then_with(|| a.cmp(b))
    });
    pts
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rational::rat;

    fn strip(beta: Rational, b: i64) -> Strip {
        Strip::planar(beta, int(b)).unwrap()
    }

    fn pts(v: &[(i64, i64)]) -> Vec<LatticePoint> {
        v.iter().map(|&(m, n)| LatticePoint::planar(m, n)).collect()
    }

    #[test]
    fn contains_examples() {
        let flat = strip(int(0), 1);
        assert!(strip_contains(&flat, &LatticePoint::planar(0, 0)).unwrap());
        assert!(!strip_contains(&flat, &LatticePoint::planar(5, 1)).unwrap());
        let diag = strip(int(1), 1);
        assert!(strip_contains(&diag, &LatticePoint::planar(3, 3)).unwrap());
        // closed boundary: n = b/2 is included
        let half_width = strip(int(0), 2);
        assert!(strip_contains(&half_width, &LatticePoint::planar(4, 1)).unwrap());
        assert!(strip_contains(&half_width, &LatticePoint::planar(4, -1)).unwrap());
    }

    #[test]
    fn contains_rejects_dimension_mismatch() {
        let s = strip(int(0), 1);
        let err = strip_contains(&s, &LatticePoint::new(vec![0, 0, 0])).unwrap_err();
        assert_eq!(err, Error::DimensionMismatch { expected: 2, found: 3 });
    }

    #[test]
    fn points_examples() {
        assert_eq!(strip_points(&strip(int(0), 1), 0, 2).unwrap(), pts(&[(0, 0), (1, 0), (2, 0)]));
        assert_eq!(
            strip_points(&strip(int(0), 4), 0, 0).unwrap(),
            pts(&[(0, -2), (0, -1), (0, 0), (0, 1), (0, 2)])
        );
        assert_eq!(strip_points(&strip(rat(1, 2), 1), 0, 1).unwrap(), pts(&[(0, 0), (1, 0), (1, 1)]));
    }

    #[test]
    fn points_in_three_dimensions() {
        let dir = Direction::new(vec![int(1), rat(-1, 2)]).unwrap();
        let s = Strip::new(dir, vec![int(2), int(1)]).unwrap();
        let got = strip_points(&s, 0, 1).unwrap();
        let want: Vec<LatticePoint> = [
            [0, -1, 0],
            [0, 0, 0],
            [0, 1, 0],
            [1, 0, -1],
            [1, 0, 0],
            [1, 1, -1],
            [1, 1, 0],
            [1, 2, -1],
            [1, 2, 0],
        ]
        .iter()
        .map(|c| LatticePoint::new(c.to_vec()))
        .collect();
        assert_eq!(got, want);
    }

    #[test]
    fn narrow_strip_can_skip_columns() {
        // width 1/3 around slope 1/2: m odd gives n in [m/2 - 1/6, m/2 + 1/6], empty
        let s = strip(rat(1, 2), 1);
        let narrow = Strip::planar(rat(1, 2), rat(1, 3)).unwrap();
        assert_eq!(strip_points(&narrow, 0, 3).unwrap(), pts(&[(0, 0), (2, 1)]));
        assert_eq!(strip_points(&s, 3, 3).unwrap(), pts(&[(3, 1), (3, 2)]));
    }

    #[test]
    fn monotone_examples() {
        let seq = monotone_sequence(&strip(int(0), 1), 3, 1, 1).unwrap();
        assert_eq!(seq.points(), pts(&[(1, 0), (2, 0), (3, 0)]).as_slice());
        let seq = monotone_sequence(&strip(int(1), 1), 3, 2, 2).unwrap();
        assert_eq!(seq.points(), pts(&[(2, 2), (4, 4), (6, 6)]).as_slice());
        let seq = monotone_sequence(&strip(rat(1, 2), 1), 2, 1, 1).unwrap();
        assert_eq!(seq.points(), pts(&[(1, 0), (2, 1)]).as_slice());
    }

    #[test]
    fn monotone_reports_infeasible_column() {
        let narrow = Strip::planar(rat(1, 2), rat(1, 3)).unwrap();
        assert_eq!(monotone_sequence(&narrow, 3, 1, 0).unwrap_err(), Error::InfeasiblePoint { m: 1 });
        assert!(monotone_sequence(&narrow, 0, 1, 0).is_err());
        assert!(monotone_sequence(&narrow, 1, 0, 0).is_err());
    }

    #[test]
    fn sequence_spec_validates() {
        let s = strip(int(0), 1);
        assert!(SequenceSpec::new(pts(&[(1, 0), (1, 0)]), Some(s.clone())).is_err());
        assert!(SequenceSpec::new(pts(&[(1, 1)]), Some(s.clone())).is_err());
        assert!(SequenceSpec::new(pts(&[(3, 0), (1, 0)]), Some(s)).is_ok());
        assert!(SequenceSpec::explicit(pts(&[(1, 1), (1, 1)])).is_ok());
    }

    #[test]
    fn decompose_examples() {
        let v = Direction::planar(int(0));
        let w = Direction::planar(int(1));
        let (p1, p2) = decompose(&LatticePoint::planar(5, 3), &v, &w, &int(9)).unwrap();
        // |3 - 5 + m_1| <= 1 admits m_1 in {1, 2, 3}; the centre 2 is chosen
        assert_eq!(p1, LatticePoint::planar(2, 0));
        assert_eq!(p2, LatticePoint::planar(3, 3));
        let (p1, p2) = decompose(&LatticePoint::planar(0, 0), &v, &w, &int(9)).unwrap();
        assert!(p1.is_zero() && p2.is_zero());
    }

    #[test]
    fn decompose_handles_far_points_and_fractional_slopes() {
        let v = Direction::planar(rat(-7, 3));
        let w = Direction::planar(rat(5, 4));
        let b = decomposition_width_bound(&v, &w).unwrap() + rat(1, 10);
        let sv = Strip::planar(rat(-7, 3), b.clone()).unwrap();
        let sw = Strip::planar(rat(5, 4), b.clone()).unwrap();
        for (m, n) in [(1000, -3), (-777, 4242), (3, 3), (0, 1), (-1, 0)] {
            let p = LatticePoint::planar(m, n);
            let (p1, p2) = decompose(&p, &v, &w, &b).unwrap();
            assert!(strip_contains(&sv, &p1).unwrap(), "{p}");
            assert!(strip_contains(&sw, &p2).unwrap(), "{p}");
            assert_eq!(&p1 + &p2, p);
        }
    }

    #[test]
    fn decompose_rejects_small_width_and_parallel() {
        let v = Direction::planar(int(0));
        let w = Direction::planar(rat(5, 2));
        let err = decompose(&LatticePoint::planar(1, 1), &v, &w, &int(12)).unwrap_err();
        assert_eq!(err, Error::WidthTooSmall { width: Box::new(int(12)), minimum: Box::new(int(12)) });
        assert!(decompose(&LatticePoint::planar(1, 1), &v, &w, &rat(25, 2)).is_ok());
        assert_eq!(
            decompose(&LatticePoint::planar(1, 1), &v, &v, &int(100)).unwrap_err(),
            Error::ParallelDirections
        );
    }

    #[test]
    fn box_points_are_shell_ordered() {
        let b = box_points(2, 1);
        assert_eq!(b.len(), 9);
        assert_eq!(b[0], LatticePoint::planar(0, 0));
        let b2 = box_points(2, 2);
        assert_eq!(&b2[..9], b.as_slice());
    }
}
