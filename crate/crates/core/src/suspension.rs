//! The skew maps `phi_{s,t}(x, u, v) = (T^([s+u], [t+v]) x, {s+u}, {t+v})` on
//! `X × [0,1)^2`, where `[a]` is the floor and `{a}` the fractional part, and
//! the single transformation `W = phi_{1,beta}` they induce for a direction
//! `(1, beta)`.

use crate::error::{Error, Result};
use crate::lattice::LatticePoint;
use crate::measure::{MeasurableSet, Shape};
use crate::rational::{floor_i64, fract, int, rat, to_f64, Rational};
use crate::systems::System;
use num_traits::{One, Signed};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

/// A point of the base system.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub enum BasePoint {
    /// Exact coordinate in `[0, 1)` for rotation systems.
    Circle(Rational),
    /// A shift configuration whose symbols are drawn on demand from `seed`;
    /// `offset` records how far the configuration has been shifted.
    Shift { seed: u64, offset: Vec<i64> },
}

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct SuspensionPoint {
    pub base: BasePoint,
    pub u: Rational,
    pub v: Rational,
}

fn in_unit(r: &Rational) -> bool {
    !r.is_negative() && r < &Rational::one()
}

impl SuspensionPoint {
    pub fn new(base: BasePoint, u: Rational, v: Rational) -> Result<Self> {
        if !in_unit(&u) || !in_unit(&v) {
            return Err(Error::InvalidArgument("u and v must lie in [0, 1)".into()));
        }
        Ok(SuspensionPoint { base, u, v })
    }
}

fn base_action(sys: &System, base: &BasePoint, w: &LatticePoint) -> Result<BasePoint> {
    sys.check_action(w)?;
    match base {
        BasePoint::Circle(x) if !sys.is_shift() => Ok(BasePoint::Circle(fract(&(x + sys.rotation_offset(w))))),
        BasePoint::Shift { seed, offset } if sys.is_shift() => {
            let shift = sys.shift_offset(w);
            Ok(BasePoint::Shift { seed: *seed, offset: offset.iter().zip(&shift).map(|(a, b)| a + b).collect() })
        }
        _ => Err(Error::InvalidArgument("base point does not match the system kind".into())),
    }
}

pub fn phi(sys: &System, s: &Rational, t: &Rational, p: &SuspensionPoint) -> Result<SuspensionPoint> {
    if sys.q() != 2 {
        return Err(Error::DimensionMismatch { expected: 2, found: sys.q() });
    }
    let su = s + &p.u;
    let tv = t + &p.v;
    let (i, j) = (floor_i64(&su), floor_i64(&tv));
    let base = base_action(sys, &p.base, &LatticePoint::planar(i, j))?;
    Ok(SuspensionPoint { base, u: su - int(i), v: tv - int(j) })
}

/// `W^n p` as `n` applications of `phi_{1, beta}`.
pub fn w_power(sys: &System, beta: &Rational, p: &SuspensionPoint, n: u32) -> Result<SuspensionPoint> {
    let one = Rational::one();
    let mut cur = p.clone();
    for _ in 0..n {
        cur = phi(sys, &one, beta, &cur)?;
    }
    Ok(cur)
}

/// Whether `W^n p == phi_{n, n beta}(p)` holds exactly.
pub fn cocycle_identity_holds(sys: &System, beta: &Rational, p: &SuspensionPoint, n: u32) -> Result<bool> {
    let iterated = w_power(sys, beta, p, n)?;
    let direct = phi(sys, &int(n as i64), &(beta * int(n as i64)), p)?;
    Ok(iterated == direct)
}

fn splitmix(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9e37_79b9_7f4a_7c15);
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^ (z >> 31)
}

/// Symbol of the configuration `seed` at an absolute coordinate.
fn symbol_at(sys: &System, seed: u64, coord: &[i64]) -> u32 {
    let h = coord.iter().fold(splitmix(seed), |acc, &c| splitmix(acc ^ c as u64));
    let r = (h >> 11) as f64 / (1u64 << 53) as f64;
    let mut cum = 0.0;
    for (j, p) in sys.probs().iter().enumerate() {
        cum += to_f64(p);
        if r < cum {
            return j as u32;
        }
    }
    (sys.alphabet_size() - 1) as u32
}

/// Whether the base point lies in `set`.
pub fn base_contains(sys: &System, base: &BasePoint, set: &MeasurableSet) -> Result<bool> {
    if set.tag() != sys.tag() {
        return Err(Error::ForeignSet);
    }
    match (base, set.shape()) {
        (BasePoint::Circle(x), Shape::Arcs(arcs)) => Ok(arcs.contains(x)),
        (BasePoint::Shift { seed, offset }, Shape::Cylinders(cyls)) => Ok(cyls.cylinders().iter().any(|c| {
            c.constraints().iter().all(|(coord, &s)| {
                let abs: Vec<i64> = coord.iter().zip(offset).map(|(a, b)| a + b).collect();
                symbol_at(sys, *seed, &abs) == s
            })
        })),
        _ => Err(Error::InvalidArgument("base point does not match the system kind".into())),
    }
}

/// A product set `A × [u0, u1) × [v0, v1)`.
#[derive(Debug, Clone)]
pub struct SuspensionSet {
    pub label: String,
    pub base: MeasurableSet,
    pub u_range: (Rational, Rational),
    pub v_range: (Rational, Rational),
}

impl SuspensionSet {
    pub fn whole(sys: &System) -> Self {
        SuspensionSet {
            label: "whole".into(),
            base: sys.full_set(),
            u_range: (Rational::from_integer(0.into()), Rational::one()),
            v_range: (Rational::from_integer(0.into()), Rational::one()),
        }
    }

    pub fn empty(sys: &System) -> Self {
        SuspensionSet { label: "empty".into(), base: sys.empty_set(), ..SuspensionSet::whole(sys) }
    }

    pub fn contains(&self, sys: &System, p: &SuspensionPoint) -> Result<bool> {
        let within = |x: &Rational, r: &(Rational, Rational)| &r.0 <= x && x < &r.1;
        Ok(within(&p.u, &self.u_range) && within(&p.v, &self.v_range) && base_contains(sys, &p.base, &self.base)?)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SetFrequency {
    pub label: String,
    pub before: f64,
    pub after: f64,
    pub difference: f64,
    pub pass: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PreservationReport {
    pub samples: usize,
    /// Allowed deviation `3 / sqrt(samples)`.
    pub bound: f64,
    pub sets: Vec<SetFrequency>,
    pub passed: bool,
}

const GRID_BITS: u32 = 32;

fn sample_unit(rng: &mut ChaCha8Rng) -> Rational {
    rat(rng.random::<u32>() as i64, 1i64 << GRID_BITS)
}

/// Draws a point from `mu × Lebesgue` (coordinates on a 2^-32 grid).
pub fn sample_point(sys: &System, rng: &mut ChaCha8Rng) -> SuspensionPoint {
    let base = if sys.is_shift() {
        BasePoint::Shift { seed: rng.random(), offset: vec![0; sys.index_dim()] }
    } else {
        BasePoint::Circle(sample_unit(rng))
    };
    let u = sample_unit(rng);
    let v = sample_unit(rng);
    SuspensionPoint { base, u, v }
}

/// Monte Carlo check that `W = phi_{1, beta}` preserves `mu × Lebesgue`:
/// each test set's empirical frequency before and after one step of `W`
/// must agree within `3 / sqrt(samples)`.
pub fn measure_preservation_check(
    sys: &System,
    beta: &Rational,
    sample_count: usize,
    sets: &[SuspensionSet],
    seed: u64,
) -> Result<PreservationReport> {
    if sample_count == 0 {
        return Err(Error::InvalidArgument("sample_count must be at least 1".into()));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut before = vec![0usize; sets.len()];
    let mut after = vec![0usize; sets.len()];
    let one = Rational::one();
    for _ in 0..sample_count {
        let p = sample_point(sys, &mut rng);
        let q = phi(sys, &one, beta, &p)?;
        for (i, set) in sets.iter().enumerate() {
            before[i] += set.contains(sys, &p)? as usize;
            after[i] += set.contains(sys, &q)? as usize;
        }
    }
    let n = sample_count as f64;
    let bound = 3.0 / n.sqrt();
    let results: Vec<SetFrequency> = sets
        .iter()
        .zip(before.iter().zip(&after))
        .map(|(set, (&b, &a))| {
            let (fb, fa) = (b as f64 / n, a as f64 / n);
            let difference = (fb - fa).abs();
            SetFrequency { label: set.label.clone(), before: fb, after: fa, difference, pass: difference <= bound }
        })
        .collect();
    let passed = results.iter().all(|r| r.pass);
    Ok(PreservationReport { samples: sample_count, bound, sets: results, passed })
}
