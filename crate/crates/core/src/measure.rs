//! Measurable sets with exact set algebra, finite partitions, and the Shannon
//! functionals on them.
//!
//! Sets come in two shapes: finite disjoint unions of cylinders (shift
//! systems) and finite unions of half-open arcs of the circle (rotations).
//! Measures are exact rationals; entropies are `f64` in nats.

use crate::error::{Error, Result};
use crate::lattice::LatticePoint;
use crate::rational::{fract, to_f64, Rational};
use crate::systems::{System, SystemTag};
use num_traits::{One, Zero};
use serde::{Serialize, Serializer};
use std::collections::{BTreeMap, BTreeSet, HashSet};
use std::fmt;

/// A cylinder: finitely many coordinates pinned to symbols.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Cylinder {
    constraints: BTreeMap<Vec<i64>, u32>,
}

impl Cylinder {
    /// The unconstrained cylinder (the whole space).
    pub fn full() -> Self {
        Cylinder { constraints: BTreeMap::new() }
    }

    pub fn constraints(&self) -> &BTreeMap<Vec<i64>, u32> {
        &self.constraints
    }

    /// Adds `x_coord = symbol`; `None` if it conflicts with an existing pin.
    pub fn constrain(&self, coord: Vec<i64>, symbol: u32) -> Option<Cylinder> {
        match self.constraints.get(&coord) {
            Some(&s) if s != symbol => None,
            Some(_) => Some(self.clone()),
            None => {
                let mut c = self.clone();
                c.constraints.insert(coord, symbol);
                Some(c)
            }
        }
    }

    pub fn intersect(&self, other: &Cylinder) -> Option<Cylinder> {
        let (small, large) = if self.constraints.len() <= other.constraints.len() {
            (self, other)
        } else {
            (other, self)
        };
        let mut out = large.clone();
        for (coord, &symbol) in &small.constraints {
            match out.constraints.get(coord) {
                Some(&s) if s != symbol => return None,
                Some(_) => {}
                None => {
                    out.constraints.insert(coord.clone(), symbol);
                }
            }
        }
        Some(out)
    }

    fn shifted(&self, offset: &[i64]) -> Cylinder {
        let constraints = self
            .constraints
            .iter()
            .map(|(c, &s)| (c.iter().zip(offset).map(|(a, b)| a + b).collect(), s))
            .collect();
        Cylinder { constraints }
    }

    fn measure(&self, probs: &[Rational]) -> Rational {
        self.constraints
            .values()
            .fold(Rational::one(), |acc, &s| acc * &probs[s as usize])
    }

    /// Disjoint cylinders covering the complement.
    fn complement(&self, alphabet: u32) -> Vec<Cylinder> {
        let mut out = Vec::new();
        let mut prefix = Cylinder::full();
        for (coord, &symbol) in &self.constraints {
            for other in (0..alphabet).filter(|&t| t != symbol) {
                let mut c = prefix.clone();
                c.constraints.insert(coord.clone(), other);
                out.push(c);
            }
            prefix.constraints.insert(coord.clone(), symbol);
        }
        out
    }
}

/// A finite union of pairwise disjoint cylinders, kept sorted.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct CylinderUnion(Vec<Cylinder>);

impl CylinderUnion {
    pub fn full() -> Self {
        CylinderUnion(vec![Cylinder::full()])
    }

    pub fn empty() -> Self {
        CylinderUnion(Vec::new())
    }

    pub fn from_cylinder(c: Cylinder) -> Self {
        CylinderUnion(vec![c])
    }

    pub fn cylinders(&self) -> &[Cylinder] {
        &self.0
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    fn normalized(mut cyls: Vec<Cylinder>) -> Self {
        cyls.sort();
        cyls.dedup();
        CylinderUnion(cyls)
    }

    pub fn intersect(&self, other: &CylinderUnion) -> CylinderUnion {
        let cyls = self
            .0
            .iter()
            .flat_map(|a| other.0.iter().filter_map(move |b| a.intersect(b)))
            .collect();
        CylinderUnion::normalized(cyls)
    }

    pub fn complement(&self, alphabet: u32) -> CylinderUnion {
        self.0.iter().fold(CylinderUnion::full(), |acc, c| {
            acc.intersect(&CylinderUnion::normalized(c.complement(alphabet)))
        })
    }

    fn shifted(&self, offset: &[i64]) -> CylinderUnion {
        CylinderUnion(self.0.iter().map(|c| c.shifted(offset)).collect())
    }

    pub fn measure(&self, probs: &[Rational]) -> Rational {
        self.0.iter().map(|c| c.measure(probs)).sum()
    }

    fn support(&self) -> BTreeSet<Vec<i64>> {
        self.0.iter().flat_map(|c| c.constraints.keys().cloned()).collect()
    }
}

/// A finite union of half-open arcs `[a, c)` with `0 <= a < c <= 1`, sorted,
/// disjoint, and with touching arcs merged.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct ArcUnion(Vec<(Rational, Rational)>);

impl ArcUnion {
    pub fn full() -> Self {
        ArcUnion(vec![(Rational::zero(), Rational::one())])
    }

    pub fn empty() -> Self {
        ArcUnion(Vec::new())
    }

    /// `[a, c)`; empty when `a >= c`.
    pub fn interval(a: Rational, c: Rational) -> Self {
        if a < c {
            ArcUnion(vec![(a, c)])
        } else {
            ArcUnion::empty()
        }
    }

    /// Arc of the given length starting at `start` (taken mod 1).
    pub fn circular(start: &Rational, length: &Rational) -> Self {
        if length >= &Rational::one() {
            return ArcUnion::full();
        }
        if length <= &Rational::zero() {
            return ArcUnion::empty();
        }
        let a = fract(start);
        let c = &a + length;
        if c <= Rational::one() {
            ArcUnion(vec![(a, c)])
        } else {
            ArcUnion::normalized(vec![(Rational::zero(), c - Rational::one()), (a, Rational::one())])
        }
    }

    pub fn arcs(&self) -> &[(Rational, Rational)] {
        &self.0
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    fn normalized(mut arcs: Vec<(Rational, Rational)>) -> Self {
        arcs.retain(|(a, c)| a < c);
        arcs.sort();
        let mut out: Vec<(Rational, Rational)> = Vec::with_capacity(arcs.len());
        for (a, c) in arcs {
            match out.last_mut() {
                Some(last) if a <= last.1 => {
                    if c > last.1 {
                        last.1 = c;
                    }
                }
                _ => out.push((a, c)),
            }
        }
        ArcUnion(out)
    }

    pub fn union(&self, other: &ArcUnion) -> ArcUnion {
        ArcUnion::normalized(self.0.iter().chain(&other.0).cloned().collect())
    }

    pub fn intersect(&self, other: &ArcUnion) -> ArcUnion {
        let (mut i, mut j) = (0, 0);
        let mut out = Vec::new();
        while i < self.0.len() && j < other.0.len() {
            let (a1, c1) = &self.0[i];
            let (a2, c2) = &other.0[j];
            let lo = if a1 > a2 { a1 } else { a2 };
            let hi = if c1 < c2 { c1 } else { c2 };
            if lo < hi {
                out.push((lo.clone(), hi.clone()));
            }
            if c1 < c2 {
                i += 1;
            } else {
                j += 1;
            }
        }
        ArcUnion(out)
    }

    pub fn complement(&self) -> ArcUnion {
        let mut out = Vec::new();
        let mut cursor = Rational::zero();
        for (a, c) in &self.0 {
            if &cursor < a {
                out.push((cursor.clone(), a.clone()));
            }
            cursor = c.clone();
        }
        if cursor < Rational::one() {
            out.push((cursor, Rational::one()));
        }
        ArcUnion(out)
    }

    /// The image under `x -> x + theta (mod 1)`.
    pub fn rotated(&self, theta: &Rational) -> ArcUnion {
        let theta = fract(theta);
        if theta.is_zero() {
            return self.clone();
        }
        let pieces = self
            .0
            .iter()
            .flat_map(|(a, c)| ArcUnion::circular(&(a + &theta), &(c - a)).0)
            .collect();
        ArcUnion::normalized(pieces)
    }

    pub fn length(&self) -> Rational {
        self.0.iter().map(|(a, c)| c - a).sum()
    }

    pub fn contains(&self, x: &Rational) -> bool {
        self.0.iter().any(|(a, c)| a <= x && x < c)
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub enum Shape {
    Cylinders(CylinderUnion),
    Arcs(ArcUnion),
}

/// A measurable set tied to the system it was built for.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct MeasurableSet {
    tag: SystemTag,
    shape: Shape,
}

impl MeasurableSet {
    pub(crate) fn new(tag: SystemTag, shape: Shape) -> Self {
        MeasurableSet { tag, shape }
    }

    pub fn tag(&self) -> SystemTag {
        self.tag
    }

    pub fn shape(&self) -> &Shape {
        &self.shape
    }

    pub fn is_empty(&self) -> bool {
        match &self.shape {
            Shape::Cylinders(u) => u.is_empty(),
            Shape::Arcs(u) => u.is_empty(),
        }
    }

    /// Shift coordinates the set depends on; `None` for arc sets, which
    /// depend on the whole circle coordinate.
    pub fn support(&self) -> Option<BTreeSet<Vec<i64>>> {
        match &self.shape {
            Shape::Cylinders(u) => Some(u.support()),
            Shape::Arcs(_) => None,
        }
    }

    fn check(&self, sys: &System) -> Result<()> {
        if self.tag != sys.tag() {
            return Err(Error::ForeignSet);
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Label(Vec<u32>);

impl Label {
    pub fn single(j: u32) -> Self {
        Label(vec![j])
    }

    pub fn parts(&self) -> &[u32] {
        &self.0
    }

    pub fn pair(a: &Label, b: &Label) -> Self {
        Label(a.0.iter().chain(&b.0).copied().collect())
    }
}

impl fmt::Display for Label {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for (i, p) in self.0.iter().enumerate() {
            if i > 0 {
                write!(f, ".")?;
            }
            write!(f, "{p}")?;
        }
        Ok(())
    }
}

impl Serialize for Label {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        s.collect_str(self)
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Cell {
    pub label: Label,
    pub set: MeasurableSet,
}

/// A finite measurable partition: disjoint cells of total measure one.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Partition {
    tag: SystemTag,
    cells: Vec<Cell>,
}

impl Partition {
    /// Validates disjointness, full measure, unique labels and ownership.
    pub fn new(sys: &System, cells: Vec<Cell>) -> Result<Self> {
        if cells.is_empty() {
            return Err(Error::InvalidPartition("no cells".into()));
        }
        let mut labels = HashSet::new();
        for c in &cells {
            c.set.check(sys)?;
            if !labels.insert(&c.label) {
                return Err(Error::InvalidPartition(format!("duplicate label {}", c.label)));
            }
        }
        for (i, a) in cells.iter().enumerate() {
            for b in &cells[i + 1..] {
                if !set_measure(sys, &intersect(&a.set, &b.set)?)?.is_zero() {
                    return Err(Error::InvalidPartition(format!(
                        "cells {} and {} overlap",
                        a.label, b.label
                    )));
                }
            }
        }
        let total: Rational = cells.iter().map(|c| set_measure(sys, &c.set)).sum::<Result<_>>()?;
        if !total.is_one() {
            return Err(Error::InvalidPartition(format!("cells cover measure {total}")));
        }
        Ok(Partition { tag: sys.tag(), cells })
    }

    pub(crate) fn from_cells_unchecked(tag: SystemTag, cells: Vec<Cell>) -> Self {
        Partition { tag, cells }
    }

    /// `{X}`.
    pub fn trivial(sys: &System) -> Self {
        Partition { tag: sys.tag(), cells: vec![Cell { label: Label::single(0), set: sys.full_set() }] }
    }

    /// `{B, B^c}` labelled 0 and 1.
    pub fn binary(sys: &System, set: &MeasurableSet) -> Result<Self> {
        let comp = complement(sys, set)?;
        Ok(Partition {
            tag: sys.tag(),
            cells: vec![
                Cell { label: Label::single(0), set: set.clone() },
                Cell { label: Label::single(1), set: comp },
            ],
        })
    }

    pub fn tag(&self) -> SystemTag {
        self.tag
    }

    pub fn cells(&self) -> &[Cell] {
        &self.cells
    }

    pub fn len(&self) -> usize {
        self.cells.len()
    }

    pub fn is_empty(&self) -> bool {
        self.cells.is_empty()
    }

    /// `T^{-w} alpha`, cell by cell.
    pub fn translate(&self, sys: &System, w: &LatticePoint) -> Result<Partition> {
        let cells = self
            .cells
            .iter()
            .map(|c| Ok(Cell { label: c.label.clone(), set: translate(sys, &c.set, w)? }))
            .collect::<Result<Vec<_>>>()?;
        Ok(Partition { tag: self.tag, cells })
    }

    /// Union of the supports of all cells; `None` for arc partitions.
    pub fn support(&self) -> Option<BTreeSet<Vec<i64>>> {
        let mut acc = BTreeSet::new();
        for c in &self.cells {
            acc.extend(c.set.support()?);
        }
        Some(acc)
    }

    fn check(&self, sys: &System) -> Result<()> {
        if self.tag != sys.tag() {
            return Err(Error::ForeignSet);
        }
        Ok(())
    }
}

/// Logarithm base for reported entropies. Computations run in nats.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum LogBase {
    #[default]
    Natural,
    Two,
}

impl LogBase {
    pub fn from_nats(self, nats: f64) -> f64 {
        match self {
            LogBase::Natural => nats,
            LogBase::Two => nats / std::f64::consts::LN_2,
        }
    }
}

pub fn set_measure(sys: &System, a: &MeasurableSet) -> Result<Rational> {
    a.check(sys)?;
    Ok(match &a.shape {
        Shape::Cylinders(u) => u.measure(sys.probs()),
        Shape::Arcs(u) => u.length(),
    })
}

/// `T^{-w} A` for shift systems (cylinder coordinates move by the image of
/// `w`); for rotations the arcs are carried forward by `sum w_i a_i`.
pub fn translate(sys: &System, a: &MeasurableSet, w: &LatticePoint) -> Result<MeasurableSet> {
    a.check(sys)?;
    sys.check_action(w)?;
    let shape = match &a.shape {
        Shape::Cylinders(u) => Shape::Cylinders(u.shifted(&sys.shift_offset(w))),
        Shape::Arcs(u) => Shape::Arcs(u.rotated(&sys.rotation_offset(w))),
    };
    Ok(MeasurableSet { tag: a.tag, shape })
}

pub fn intersect(a: &MeasurableSet, b: &MeasurableSet) -> Result<MeasurableSet> {
    if a.tag != b.tag {
        return Err(Error::ForeignSet);
    }
    let shape = match (&a.shape, &b.shape) {
        (Shape::Cylinders(x), Shape::Cylinders(y)) => Shape::Cylinders(x.intersect(y)),
        (Shape::Arcs(x), Shape::Arcs(y)) => Shape::Arcs(x.intersect(y)),
        _ => return Err(Error::ForeignSet),
    };
    Ok(MeasurableSet { tag: a.tag, shape })
}

/// `A ∪ B`; cylinder unions stay disjoint by adding `B \ A`.
pub fn union(sys: &System, a: &MeasurableSet, b: &MeasurableSet) -> Result<MeasurableSet> {
    a.check(sys)?;
    b.check(sys)?;
    let shape = match (&a.shape, &b.shape) {
        (Shape::Cylinders(x), Shape::Cylinders(y)) => {
            let rest = y.intersect(&x.complement(sys.alphabet_size() as u32));
            Shape::Cylinders(CylinderUnion::normalized(x.0.iter().chain(&rest.0).cloned().collect()))
        }
        (Shape::Arcs(x), Shape::Arcs(y)) => Shape::Arcs(x.union(y)),
        _ => return Err(Error::ForeignSet),
    };
    Ok(MeasurableSet { tag: a.tag, shape })
}

pub fn complement(sys: &System, a: &MeasurableSet) -> Result<MeasurableSet> {
    a.check(sys)?;
    let shape = match &a.shape {
        Shape::Cylinders(u) => Shape::Cylinders(u.complement(sys.alphabet_size() as u32)),
        Shape::Arcs(u) => Shape::Arcs(u.complement()),
    };
    Ok(MeasurableSet { tag: a.tag, shape })
}

/// `mu(A Δ B) = mu(A) + mu(B) - 2 mu(A ∩ B)`.
pub fn sym_diff_measure(sys: &System, a: &MeasurableSet, b: &MeasurableSet) -> Result<Rational> {
    let both = set_measure(sys, &intersect(a, b)?)?;
    Ok(set_measure(sys, a)? + set_measure(sys, b)? - both * Rational::from_integer(2.into()))
}

fn neg_plogp(p: &Rational) -> f64 {
    if p.is_zero() {
        return 0.0;
    }
    let x = to_f64(p);
    -x * x.ln()
}

/// `H(alpha) = -sum mu(A) log mu(A)` in nats.
pub fn partition_entropy(sys: &System, alpha: &Partition) -> Result<f64> {
    alpha.check(sys)?;
    alpha
        .cells
        .iter()
        .map(|c| set_measure(sys, &c.set).map(|m| neg_plogp(&m)))
        .sum()
}

/// Common refinement: all nonempty pairwise intersections, labels paired.
pub fn join(alpha: &Partition, eta: &Partition) -> Result<Partition> {
    join_capped(alpha, eta, usize::MAX).map(|p| p.expect("uncapped join"))
}

/// As [`join`], but gives up (returning `None`) once more than `cap` cells appear.
pub(crate) fn join_capped(alpha: &Partition, eta: &Partition, cap: usize) -> Result<Option<Partition>> {
    if alpha.tag != eta.tag {
        return Err(Error::ForeignSet);
    }
    let mut cells = Vec::new();
    for a in &alpha.cells {
        for d in &eta.cells {
            let set = intersect(&a.set, &d.set)?;
            if set.is_empty() {
                continue;
            }
            if cells.len() == cap {
                return Ok(None);
            }
            cells.push(Cell { label: Label::pair(&a.label, &d.label), set });
        }
    }
    Ok(Some(Partition { tag: alpha.tag, cells }))
}

/// `H(alpha | eta) = -sum_{A,D} mu(A ∩ D) log(mu(A ∩ D) / mu(D))` in nats.
pub fn conditional_entropy(sys: &System, alpha: &Partition, eta: &Partition) -> Result<f64> {
    alpha.check(sys)?;
    eta.check(sys)?;
    let mut total = 0.0;
    for d in &eta.cells {
        let md = set_measure(sys, &d.set)?;
        if md.is_zero() {
            continue;
        }
        for a in &alpha.cells {
            let mad = set_measure(sys, &intersect(&a.set, &d.set)?)?;
            if mad.is_zero() {
                continue;
            }
            let ratio = &mad / &md;
            total -= to_f64(&mad) * to_f64(&ratio).ln();
        }
    }
    Ok(total)
}

/// `sum_j mu(A_j Δ B_j)`, cells matched by label.
pub fn partition_distance(sys: &System, alpha: &Partition, eta: &Partition) -> Result<Rational> {
    alpha.check(sys)?;
    eta.check(sys)?;
    if alpha.len() != eta.len() {
        return Err(Error::CellCountMismatch { left: alpha.len(), right: eta.len() });
    }
    let mut total = Rational::zero();
    for a in &alpha.cells {
        let b = eta
            .cells
            .iter()
            .find(|b| b.label == a.label)
            .ok_or_else(|| Error::InvalidPartition(format!("label {} missing on one side", a.label)))?;
        total += sym_diff_measure(sys, &a.set, &b.set)?;
    }
    Ok(total)
}

/// Exact test that every cell of `fine` lies, up to measure zero, inside one
/// cell of `coarse`.
pub fn refines(sys: &System, fine: &Partition, coarse: &Partition) -> Result<bool> {
    fine.check(sys)?;
    coarse.check(sys)?;
    for d in &fine.cells {
        let md = set_measure(sys, &d.set)?;
        if md.is_zero() {
            continue;
        }
        let mut inside = false;
        for a in &coarse.cells {
            if set_measure(sys, &intersect(&a.set, &d.set)?)? == md {
                inside = true;
                break;
            }
        }
        if !inside {
            return Ok(false);
        }
    }
    Ok(true)
}
