#![allow(dead_code)]

use dirseq_core::measure::{join, partition_entropy, union, Cell, Label, Partition};
use dirseq_core::rational::{int, rat, Rational};
use dirseq_core::systems::{make_bernoulli_shift, make_example_system, make_rotation_action, System};
use dirseq_core::LatticePoint;
use rand::Rng;

pub const LN2: f64 = std::f64::consts::LN_2;

pub fn fair_bernoulli() -> System {
    make_bernoulli_shift(2, vec![rat(1, 2), rat(1, 2)]).unwrap()
}

pub fn rotation() -> System {
    make_rotation_action(2, vec![rat(13, 21), rat(5, 8)]).unwrap()
}

pub fn zoo() -> Vec<System> {
    vec![
        fair_bernoulli(),
        make_bernoulli_shift(2, vec![rat(1, 3), rat(2, 3)]).unwrap(),
        make_bernoulli_shift(2, vec![rat(1, 5), rat(3, 10), rat(1, 2)]).unwrap(),
        make_example_system(),
        rotation(),
    ]
}

/// Groups `pieces` (disjoint, covering) into at most `groups` labelled cells.
fn grouped(sys: &System, pieces: Vec<dirseq_core::MeasurableSet>, groups: u32, rng: &mut impl Rng) -> Partition {
    let mut cells: Vec<Option<dirseq_core::MeasurableSet>> = vec![None; groups as usize];
    for piece in pieces {
        let g = rng.random_range(0..groups) as usize;
        cells[g] = Some(match cells[g].take() {
            None => piece,
            Some(acc) => union(sys, &acc, &piece).unwrap(),
        });
    }
    let cells = cells
        .into_iter()
        .flatten()
        .enumerate()
        .map(|(i, set)| Cell { label: Label::single(i as u32), set })
        .collect();
    Partition::new(sys, cells).unwrap()
}

/// A random finite partition: cylinder cells over a few coordinates near the
/// origin for shifts, unions of arcs on a 1/24 grid for rotations.
pub fn random_partition(sys: &System, rng: &mut impl Rng) -> Partition {
    let groups = rng.random_range(1..=4u32);
    if sys.is_shift() {
        let coords = rng.random_range(1..=3usize);
        let mut chosen: Vec<Vec<i64>> = Vec::new();
        while chosen.len() < coords {
            let c: Vec<i64> = (0..sys.index_dim()).map(|_| rng.random_range(-2..=2)).collect();
            if !chosen.contains(&c) {
                chosen.push(c);
            }
        }
        let k = sys.alphabet_size() as u32;
        let mut pieces = Vec::new();
        let total = k.pow(coords as u32);
        for code in 0..total {
            let mut rest = code;
            let constraints: Vec<(Vec<i64>, u32)> = chosen
                .iter()
                .map(|c| {
                    let s = rest % k;
                    rest /= k;
                    (c.clone(), s)
                })
                .collect();
            pieces.push(sys.cylinder(&constraints).unwrap());
        }
        grouped(sys, pieces, groups, rng)
    } else {
        let mut cuts: Vec<i64> = (0..24).filter(|_| rng.random_bool(0.25)).collect();
        if cuts.is_empty() {
            cuts.push(rng.random_range(0..24));
        }
        let cuts: Vec<Rational> = cuts.into_iter().map(|c| rat(c, 24)).collect();
        let arcs = sys.arc_partition(&cuts).unwrap();
        let pieces = arcs.cells().iter().map(|c| c.set.clone()).collect();
        grouped(sys, pieces, groups, rng)
    }
}

/// Oracle: the entropy of the explicitly materialised join.
pub fn brute_joint_entropy(sys: &System, alpha: &Partition, points: &[LatticePoint]) -> f64 {
    let mut acc = Partition::trivial(sys);
    for w in points {
        acc = join(&acc, &alpha.translate(sys, w).unwrap()).unwrap();
    }
    partition_entropy(sys, &acc).unwrap()
}

pub fn half() -> Rational {
    rat(1, 2)
}

pub fn zero() -> Rational {
    int(0)
}

/// Cells `0..count` formed by merging `pieces[i]` into cell `labels[i]`.
pub fn labelled(sys: &System, pieces: &[dirseq_core::MeasurableSet], labels: &[u32], count: usize) -> Partition {
    let mut cells: Vec<Option<dirseq_core::MeasurableSet>> = vec![None; count];
    for (piece, &l) in pieces.iter().zip(labels) {
        let l = l as usize;
        cells[l] = Some(match cells[l].take() {
            None => piece.clone(),
            Some(acc) => union(sys, &acc, piece).unwrap(),
        });
    }
    let cells = cells
        .into_iter()
        .enumerate()
        .map(|(i, set)| Cell { label: Label::single(i as u32), set: set.unwrap_or_else(|| sys.empty_set()) })
        .collect();
    Partition::new(sys, cells).unwrap()
}

/// Atoms for `labelled`: the 24 grid arcs for rotations, or all cylinders on
/// three coordinates near the origin for shifts.
pub fn atoms(sys: &System) -> Vec<dirseq_core::MeasurableSet> {
    if sys.is_shift() {
        let d = sys.index_dim();
        let coords: Vec<Vec<i64>> = (0..3i64).map(|i| (0..d as i64).map(|j| if j == 0 { i } else { 0 }).collect()).collect();
        let k = sys.alphabet_size() as u32;
        (0..k.pow(3))
            .map(|code| {
                let mut rest = code;
                let constraints: Vec<(Vec<i64>, u32)> = coords
                    .iter()
                    .map(|c| {
                        let s = rest % k;
                        rest /= k;
                        (c.clone(), s)
                    })
                    .collect();
                sys.cylinder(&constraints).unwrap()
            })
            .collect()
    } else {
        (0..24).map(|i| sys.arcs(&[(rat(i, 24), rat(i + 1, 24))]).unwrap()).collect()
    }
}
