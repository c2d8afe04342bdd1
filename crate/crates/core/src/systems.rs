//! Measure-preserving `Z^q` systems whose set algebra is exactly computable.
//!
//! * Bernoulli shifts over `Z^q` with a rational probability vector.
//! * The product system `T^(m,n) = T1^m T2^n` with `T1` the identity and `T2`
//!   the two-sided (1/2, 1/2) shift on `{0,1}^Z`.
//! * Circle rotations `x -> x + sum w_i a_i (mod 1)` with rational angles.
//!
//! Cylinder sets live on the shift index lattice; the action moves cylinder
//! coordinates by the image of `w` in that lattice. Rotation sets are finite
//! unions of half-open arcs.

use crate::error::{Error, Result};
use crate::lattice::LatticePoint;
use crate::measure::{self, ArcUnion, Cell, Cylinder, CylinderUnion, Label, MeasurableSet, Partition, Shape};
use crate::rational::{self, fract, int, rat, Rational};
use num_traits::{One, Signed, Zero};
use rand::Rng;
use serde::Serialize;
use std::collections::hash_map::DefaultHasher;
use std::hash::{Hash, Hasher};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum SystemKind {
    BernoulliShift,
    ExampleProduct,
    RotationAction,
}

/// Identifies the system a set was built for.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct SystemTag(u64);

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct System {
    kind: SystemKind,
    q: usize,
    probs: Vec<Rational>,
    angles: Vec<Rational>,
    tag: SystemTag,
}

impl System {
    fn build(kind: SystemKind, q: usize, probs: Vec<Rational>, angles: Vec<Rational>) -> System {
        let mut h = DefaultHasher::new();
        (kind, q, &probs, &angles).hash(&mut h);
        let tag = SystemTag(h.finish());
        System { kind, q, probs, angles, tag }
    }

    pub fn kind(&self) -> SystemKind {
        self.kind
    }

    /// Rank of the acting group `Z^q`.
    pub fn q(&self) -> usize {
        self.q
    }

    pub fn tag(&self) -> SystemTag {
        self.tag
    }

    /// Symbol probabilities of a shift system; empty for rotations.
    pub fn probs(&self) -> &[Rational] {
        &self.probs
    }

    pub fn angles(&self) -> &[Rational] {
        &self.angles
    }

    pub fn is_shift(&self) -> bool {
        !matches!(self.kind, SystemKind::RotationAction)
    }

    pub fn alphabet_size(&self) -> usize {
        self.probs.len()
    }

    /// Dimension of the lattice indexing shift coordinates.
    pub fn index_dim(&self) -> usize {
        match self.kind {
            SystemKind::BernoulliShift => self.q,
            SystemKind::ExampleProduct => 1,
            SystemKind::RotationAction => 0,
        }
    }

    pub(crate) fn check_action(&self, w: &LatticePoint) -> Result<()> {
        if w.q() != self.q {
            return Err(Error::DimensionMismatch { expected: self.q, found: w.q() });
        }
        Ok(())
    }

    /// Image of `w` in the shift index lattice.
    pub(crate) fn shift_offset(&self, w: &LatticePoint) -> Vec<i64> {
        match self.kind {
            SystemKind::BernoulliShift => w.coords().to_vec(),
            SystemKind::ExampleProduct => vec![w.coords()[1]],
            SystemKind::RotationAction => Vec::new(),
        }
    }

    /// Total rotation `sum w_i a_i` reduced mod 1.
    pub(crate) fn rotation_offset(&self, w: &LatticePoint) -> Rational {
        let total = w
            .coords()
            .iter()
            .zip(&self.angles)
            .fold(Rational::zero(), |acc, (&c, a)| acc + int(c) * a);
        fract(&total)
    }

    pub fn full_set(&self) -> MeasurableSet {
        let shape = if self.is_shift() {
            Shape::Cylinders(CylinderUnion::full())
        } else {
            Shape::Arcs(ArcUnion::full())
        };
        MeasurableSet::new(self.tag, shape)
    }

    pub fn empty_set(&self) -> MeasurableSet {
        let shape = if self.is_shift() {
            Shape::Cylinders(CylinderUnion::empty())
        } else {
            Shape::Arcs(ArcUnion::empty())
        };
        MeasurableSet::new(self.tag, shape)
    }

    /// Cylinder fixing `x_c = symbol` for each `(c, symbol)` pair.
    pub fn cylinder(&self, constraints: &[(Vec<i64>, u32)]) -> Result<MeasurableSet> {
        if !self.is_shift() {
            return Err(Error::InvalidArgument("cylinders need a shift system".into()));
        }
        let mut cyl = Cylinder::full();
        for (coord, symbol) in constraints {
            if coord.len() != self.index_dim() {
                return Err(Error::DimensionMismatch { expected: self.index_dim(), found: coord.len() });
            }
            if *symbol as usize >= self.alphabet_size() {
                return Err(Error::InvalidArgument(format!("symbol {symbol} outside the alphabet")));
            }
            match cyl.constrain(coord.clone(), *symbol) {
                Some(c) => cyl = c,
                None => return Ok(self.empty_set()),
            }
        }
        Ok(MeasurableSet::new(self.tag, Shape::Cylinders(CylinderUnion::from_cylinder(cyl))))
    }

    /// Union of half-open arcs `[a, c)`, with `0 <= a <= c <= 1`.
    pub fn arcs(&self, arcs: &[(Rational, Rational)]) -> Result<MeasurableSet> {
        if self.is_shift() {
            return Err(Error::InvalidArgument("arcs need a rotation system".into()));
        }
        let mut acc = ArcUnion::empty();
        for (a, c) in arcs {
            if a.is_negative() || c > &Rational::one() || a > c {
                return Err(Error::InvalidArgument(format!(
                    "arc [{}, {}) is not inside [0, 1]",
                    rational::format_rational(a),
                    rational::format_rational(c)
                )));
            }
            acc = acc.union(&ArcUnion::interval(a.clone(), c.clone()));
        }
        Ok(MeasurableSet::new(self.tag, Shape::Arcs(acc)))
    }

    /// Rotation set of the circular arc starting at `start` with the given length,
    /// wrapping through 0 if needed.
    pub fn circular_arc(&self, start: &Rational, length: &Rational) -> Result<MeasurableSet> {
        if self.is_shift() {
            return Err(Error::InvalidArgument("arcs need a rotation system".into()));
        }
        Ok(MeasurableSet::new(self.tag, Shape::Arcs(ArcUnion::circular(start, length))))
    }

    /// Partition by the symbol at coordinate zero.
    pub fn time_zero_partition(&self) -> Result<Partition> {
        if !self.is_shift() {
            return Err(Error::InvalidArgument(
                "time-zero partition needs a shift system; use arc_partition".into(),
            ));
        }
        let origin = vec![0; self.index_dim()];
        let cells = (0..self.alphabet_size() as u32)
            .map(|j| {
                Ok(Cell { label: Label::single(j), set: self.cylinder(&[(origin.clone(), j)])? })
            })
            .collect::<Result<Vec<_>>>()?;
        Ok(Partition::from_cells_unchecked(self.tag, cells))
    }

    /// Arcs between consecutive cuts, the last wrapping through 0.
    pub fn arc_partition(&self, cuts: &[Rational]) -> Result<Partition> {
        if self.is_shift() {
            return Err(Error::InvalidArgument("arc partitions need a rotation system".into()));
        }
        if cuts.is_empty()
            || cuts.windows(2).any(|w| w[0] >= w[1])
            || cuts.iter().any(|c| c.is_negative() || c >= &Rational::one())
        {
            return Err(Error::UnsortedCuts);
        }
        let n = cuts.len();
        let cells = (0..n)
            .map(|i| {
                let start = &cuts[i];
                let length = if i + 1 < n { &cuts[i + 1] - start } else { &cuts[0] + int(1) - start };
                Ok(Cell { label: Label::single(i as u32), set: self.circular_arc(start, &length)? })
            })
            .collect::<Result<Vec<_>>>()?;
        Ok(Partition::from_cells_unchecked(self.tag, cells))
    }

    /// Uniform partition into `pieces` arcs starting at 0.
    pub fn uniform_arc_partition(&self, pieces: u32) -> Result<Partition> {
        if pieces == 0 {
            return Err(Error::InvalidArgument("need at least one arc".into()));
        }
        let cuts: Vec<Rational> = (0..pieces as i64).map(|i| rat(i, pieces as i64)).collect();
        self.arc_partition(&cuts)
    }

    /// A random partition with at most `max_cells` cells: cylinders on one or
    /// two coordinates near the origin for shifts, arcs between cuts on a
    /// `1/grid` lattice for rotations, grouped at random.
    pub fn random_partition<R: Rng>(&self, rng: &mut R, max_cells: u32, grid: u32) -> Result<Partition> {
        if max_cells == 0 || grid == 0 {
            return Err(Error::InvalidArgument("max_cells and grid must be at least 1".into()));
        }
        let pieces: Vec<MeasurableSet> = if self.is_shift() {
            let k = self.alphabet_size() as u32;
            let first = vec![0; self.index_dim()];
            let mut second: Vec<i64> = (0..self.index_dim()).map(|_| rng.random_range(-2..=2)).collect();
            if second == first {
                second[0] = 1;
            }
            let coords = if rng.random_bool(0.5) { vec![first] } else { vec![first, second] };
            let total = k.pow(coords.len() as u32);
            (0..total)
                .map(|code| {
                    let constraints: Vec<(Vec<i64>, u32)> =
                        coords.iter().enumerate().map(|(i, c)| (c.clone(), code / k.pow(i as u32) % k)).collect();
                    self.cylinder(&constraints)
                })
                .collect::<Result<_>>()?
        } else {
            let mut cuts: Vec<Rational> =
                (0..grid as i64).filter(|_| rng.random_bool(0.3)).map(|c| rat(c, grid as i64)).collect();
            if cuts.is_empty() {
                cuts.push(Rational::zero());
            }
            self.arc_partition(&cuts)?.cells().iter().map(|c| c.set.clone()).collect()
        };
        let groups = rng.random_range(1..=max_cells) as usize;
        let mut cells: Vec<Option<MeasurableSet>> = vec![None; groups];
        for piece in pieces {
            let g = rng.random_range(0..groups);
            cells[g] = Some(match cells[g].take() {
                None => piece,
                Some(acc) => measure::union(self, &acc, &piece)?,
            });
        }
        let cells = cells
            .into_iter()
            .flatten()
            .enumerate()
            .map(|(i, set)| Cell { label: Label::single(i as u32), set })
            .collect();
        Ok(Partition::from_cells_unchecked(self.tag, cells))
    }
}

fn check_probs(probs: &[Rational]) -> Result<()> {
    if probs.len() < 2 {
        return Err(Error::InvalidProbabilities("need at least two symbols".into()));
    }
    if let Some(p) = probs.iter().find(|p| !p.is_positive()) {
        return Err(Error::InvalidProbabilities(format!(
            "probability {} is not positive",
            rational::format_rational(p)
        )));
    }
    let total: Rational = probs.iter().sum();
    if !total.is_one() {
        return Err(Error::InvalidProbabilities(format!(
            "probabilities sum to {}",
            rational::format_rational(&total)
        )));
    }
    Ok(())
}

/// Full shift on `probs.len()` symbols indexed by `Z^q`, with product measure.
pub fn make_bernoulli_shift(q: usize, probs: Vec<Rational>) -> Result<System> {
    if q < 1 {
        return Err(Error::InvalidArgument("q must be at least 1".into()));
    }
    check_probs(&probs)?;
    Ok(System::build(SystemKind::BernoulliShift, q, probs, Vec::new()))
}

/// `{0,1}^Z` with the (1/2, 1/2) product measure, acted on by
/// `T^(m,n) = T2^n`: the first generator is the identity.
pub fn make_example_system() -> System {
    System::build(SystemKind::ExampleProduct, 2, vec![rat(1, 2), rat(1, 2)], Vec::new())
}

/// Circle rotation by `sum w_i a_i`, one rational angle per generator.
pub fn make_rotation_action(q: usize, angles: Vec<Rational>) -> Result<System> {
    if q < 1 || angles.len() != q {
        return Err(Error::InvalidAngles(format!("expected {q} angles, got {}", angles.len())));
    }
    if let Some(a) = angles.iter().find(|a| a.is_negative() || *a >= &Rational::one()) {
        return Err(Error::InvalidAngles(format!(
            "angle {} outside [0, 1)",
            rational::format_rational(a)
        )));
    }
    Ok(System::build(SystemKind::RotationAction, q, Vec::new(), angles))
}
