//! Compactness diagnostics for Koopman orbits restricted to strips.
//!
//! For a set `B`, the orbit `{U^w 1_B : w in window}` is examined through the
//! L² distances `||1_{T^{-w}B} - 1_{T^{-u}B}||_2 = sqrt(mu(T^{-w}B Δ T^{-u}B))`.
//! Greedy ε-nets over growing windows give a growth profile; bounded nets
//! suggest a precompact orbit, linearly growing nets suggest the opposite.

use crate::entropy::{estimate_limsup, greedy_directional_sequence};
use crate::error::{Error, Result};
use crate::lattice::{box_points, strip_points, Direction, LatticePoint, Strip};
use crate::measure::{sym_diff_measure, translate, MeasurableSet, Partition};
use crate::rational::{to_f64, Rational};
use crate::systems::System;
use rayon::prelude::*;
use serde::Serialize;
use std::collections::HashMap;

/// `mu(T^{-w}B Δ T^{-u}B)`, the squared orbit distance, exactly.
pub fn orbit_distance_squared(sys: &System, set: &MeasurableSet, w: &LatticePoint, u: &LatticePoint) -> Result<Rational> {
    let a = translate(sys, set, w)?;
    let b = translate(sys, set, u)?;
    sym_diff_measure(sys, &a, &b)
}

/// L² distance between the Koopman images `U^w 1_B` and `U^u 1_B`.
pub fn orbit_distance(sys: &System, set: &MeasurableSet, w: &LatticePoint, u: &LatticePoint) -> Result<f64> {
    Ok(to_f64(&orbit_distance_squared(sys, set, w, u)?).sqrt())
}

/// Dense symmetric matrix with zero diagonal.
#[derive(Debug, Clone, PartialEq)]
pub struct DistanceMatrix {
    n: usize,
    entries: Vec<f64>,
}

impl DistanceMatrix {
    pub fn new(rows: Vec<Vec<f64>>) -> Result<Self> {
        let n = rows.len();
        if let Some(bad) = rows.iter().position(|r| r.len() != n) {
            return Err(Error::NonSymmetricMatrix { row: bad, col: rows[bad].len() });
        }
        for (i, row) in rows.iter().enumerate() {
            if row[i] != 0.0 {
                return Err(Error::NonSymmetricMatrix { row: i, col: i });
            }
            if let Some(j) = (i + 1..n).find(|&j| row[j] != rows[j][i]) {
                return Err(Error::NonSymmetricMatrix { row: i, col: j });
            }
        }
        Ok(DistanceMatrix { n, entries: rows.into_iter().flatten().collect() })
    }

    pub fn len(&self) -> usize {
        self.n
    }

    pub fn is_empty(&self) -> bool {
        self.n == 0
    }

    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.entries[i * self.n + j]
    }

    /// Pairwise orbit distances over `points`.
    pub fn from_orbit(sys: &System, set: &MeasurableSet, points: &[LatticePoint]) -> Result<Self> {
        let orbit = Orbit::new(sys, set, points)?;
        let n = points.len();
        let mut entries = vec![0.0; n * n];
        for i in 0..n {
            for j in 0..n {
                entries[i * n + j] = orbit.distance(i, j);
            }
        }
        Ok(DistanceMatrix { n, entries })
    }
}

/// Translates of one set, deduplicated, with distances between the
/// distinct translates.
struct Orbit {
    ids: Vec<usize>,
    distinct: usize,
    table: Vec<f64>,
}

impl Orbit {
    fn new(sys: &System, set: &MeasurableSet, points: &[LatticePoint]) -> Result<Self> {
        let mut index: HashMap<MeasurableSet, usize> = HashMap::new();
        let mut reps: Vec<MeasurableSet> = Vec::new();
        let mut ids = Vec::with_capacity(points.len());
        for w in points {
            let image = translate(sys, set, w)?;
            let id = *index.entry(image.clone()).or_insert_with(|| {
                reps.push(image);
                reps.len() - 1
            });
            ids.push(id);
        }
        let distinct = reps.len();
        let rows = (0..distinct)
            .into_par_iter()
            .map(|i| {
                (0..distinct)
                    .map(|j| {
                        if i == j {
                            Ok(0.0)
                        } else {
                            sym_diff_measure(sys, &reps[i], &reps[j]).map(|d| to_f64(&d).sqrt())
                        }
                    })
                    .collect::<Result<Vec<f64>>>()
            })
            .collect::<Result<Vec<_>>>()?;
        // symmetrise: both halves are computed independently in floating point
        let mut table: Vec<f64> = rows.into_iter().flatten().collect();
        for i in 0..distinct {
            for j in i + 1..distinct {
                table[j * distinct + i] = table[i * distinct + j];
            }
        }
        Ok(Orbit { ids, distinct, table })
    }

    fn distance(&self, i: usize, j: usize) -> f64 {
        self.table[self.ids[i] * self.distinct + self.ids[j]]
    }

    fn greedy_net(&self, count: usize, epsilon: f64) -> Vec<usize> {
        greedy_net_by(count, epsilon, |i, j| self.distance(i, j))
    }
}

fn greedy_net_by(n: usize, epsilon: f64, dist: impl Fn(usize, usize) -> f64) -> Vec<usize> {
    let mut net: Vec<usize> = Vec::new();
    for i in 0..n {
        if net.iter().all(|&j| dist(i, j) >= epsilon) {
            net.push(i);
        }
    }
    net
}

/// Scans points in index order and keeps each one that has no kept point
/// strictly within `epsilon`. The kept points form an ε-net, and their count
/// lies between the ε-covering number and the ε-packing number.
pub fn greedy_epsilon_net(distances: &DistanceMatrix, epsilon: f64) -> Vec<usize> {
    greedy_net_by(distances.n, epsilon, |i, j| distances.get(i, j))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum Verdict {
    CompactLikely,
    NonCompactLikely,
    Inconclusive,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct WindowSample {
    pub m_lo: i64,
    pub m_hi: i64,
    pub points: usize,
    pub net_size: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Evidence {
    /// Least-squares slope of net size against window length (columns of `m`).
    pub slope: f64,
    /// Net-size change across the second half of the schedule.
    pub last_half_growth: usize,
    pub strictly_growing: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct NetProfile {
    pub set_label: String,
    /// `None` for full-plane box windows.
    pub strip: Option<Strip>,
    pub epsilon: f64,
    pub windows: Vec<WindowSample>,
    pub verdict: Verdict,
    pub evidence: Evidence,
}

/// Slope at or above which growing nets count as non-compact.
pub const GROWTH_SLOPE_THRESHOLD: f64 = 0.5;

fn decide(windows: &[WindowSample]) -> (Verdict, Evidence) {
    let n = windows.len();
    let sizes: Vec<usize> = windows.iter().map(|w| w.net_size).collect();
    let second = &sizes[n / 2..];
    let last_half_growth = second[second.len() - 1] - second[0];
    let strictly_growing = sizes.windows(2).all(|p| p[1] > p[0]);
    let xs: Vec<f64> = windows.iter().map(|w| (w.m_hi - w.m_lo + 1) as f64).collect();
    let ys: Vec<f64> = sizes.iter().map(|&s| s as f64).collect();
    let mx = xs.iter().sum::<f64>() / n as f64;
    let my = ys.iter().sum::<f64>() / n as f64;
    let num: f64 = xs.iter().zip(&ys).map(|(x, y)| (x - mx) * (y - my)).sum();
    let den: f64 = xs.iter().map(|x| (x - mx) * (x - mx)).sum();
    let slope = if den > 0.0 { num / den } else { 0.0 };
    let verdict = if last_half_growth == 0 {
        Verdict::CompactLikely
    } else if strictly_growing && slope >= GROWTH_SLOPE_THRESHOLD {
        Verdict::NonCompactLikely
    } else {
        Verdict::Inconclusive
    };
    (verdict, Evidence { slope, last_half_growth, strictly_growing })
}

fn check_schedule(schedule: &[(i64, i64)]) -> Result<()> {
    if schedule.len() < 2 {
        return Err(Error::InvalidSchedule("need at least two windows".into()));
    }
    let lo = schedule[0].0;
    for (i, &(a, b)) in schedule.iter().enumerate() {
        if a != lo || a > b {
            return Err(Error::InvalidSchedule(format!(
                "window {i} must be [{lo}, m_hi] with m_hi >= {lo}"
            )));
        }
        if i > 0 && b <= schedule[i - 1].1 {
            return Err(Error::InvalidSchedule("window ends must increase".into()));
        }
    }
    Ok(())
}

/// `count` windows `[0, step - 1], [0, 2 step - 1], ...`.
pub fn linear_schedule(count: usize, step: i64) -> Vec<(i64, i64)> {
    (1..=count as i64).map(|j| (0, j * step - 1)).collect()
}

/// Net growth profiles for several ε over one schedule. Windows share their
/// lower end, so each smaller window is a prefix of the largest.
pub fn net_growth_profiles(
    sys: &System,
    set: &MeasurableSet,
    strip: &Strip,
    epsilons: &[f64],
    schedule: &[(i64, i64)],
) -> Result<Vec<NetProfile>> {
    check_schedule(schedule)?;
    if strip.q() != sys.q() {
        return Err(Error::DimensionMismatch { expected: sys.q(), found: strip.q() });
    }
    let (lo, hi) = (schedule[0].0, schedule[schedule.len() - 1].1);
    let points = strip_points(strip, lo, hi)?;
    let orbit = Orbit::new(sys, set, &points)?;
    let counts: Vec<usize> = schedule
        .iter()
        .map(|&(_, b)| points.partition_point(|p| p.m() <= b))
        .collect();
    Ok(epsilons
        .iter()
        .map(|&epsilon| {
            let windows: Vec<WindowSample> = schedule
                .iter()
                .zip(&counts)
                .map(|(&(m_lo, m_hi), &count)| WindowSample {
                    m_lo,
                    m_hi,
                    points: count,
                    net_size: orbit.greedy_net(count, epsilon).len(),
                })
                .collect();
            let (verdict, evidence) = decide(&windows);
            NetProfile { set_label: "B".into(), strip: Some(strip.clone()), epsilon, windows, verdict, evidence }
        })
        .collect())
}

pub fn net_growth_profile(
    sys: &System,
    set: &MeasurableSet,
    strip: &Strip,
    epsilon: f64,
    schedule: &[(i64, i64)],
) -> Result<NetProfile> {
    let mut v = net_growth_profiles(sys, set, strip, &[epsilon], schedule)?;
    Ok(v.remove(0))
}

/// Profile over full boxes `[-r, r]^q` instead of strips.
pub fn box_growth_profile(sys: &System, set: &MeasurableSet, epsilon: f64, radii: &[i64]) -> Result<NetProfile> {
    if radii.len() < 2 || radii.windows(2).any(|r| r[1] <= r[0]) || radii[0] < 0 {
        return Err(Error::InvalidSchedule("radii must be nonnegative and increasing".into()));
    }
    let points = box_points(sys.q(), radii[radii.len() - 1]);
    let orbit = Orbit::new(sys, set, &points)?;
    let windows: Vec<WindowSample> = radii
        .iter()
        .map(|&r| {
            let count = (2 * r as usize + 1).pow(sys.q() as u32);
            WindowSample { m_lo: -r, m_hi: r, points: count, net_size: orbit.greedy_net(count, epsilon).len() }
        })
        .collect();
    let (verdict, evidence) = decide(&windows);
    Ok(NetProfile { set_label: "B".into(), strip: None, epsilon, windows, verdict, evidence })
}

/// Whether the compactness verdicts at widths `b1` and `b2` agree.
pub fn b_independence_check(
    sys: &System,
    set: &MeasurableSet,
    direction: &Direction,
    b1: &Rational,
    b2: &Rational,
    epsilon: f64,
    schedule: &[(i64, i64)],
) -> Result<bool> {
    let (first, second) = b_independence_profiles(sys, set, direction, b1, b2, epsilon, schedule)?;
    Ok(first.verdict == second.verdict)
}

pub fn b_independence_profiles(
    sys: &System,
    set: &MeasurableSet,
    direction: &Direction,
    b1: &Rational,
    b2: &Rational,
    epsilon: f64,
    schedule: &[(i64, i64)],
) -> Result<(NetProfile, NetProfile)> {
    if b1 == b2 {
        return Err(Error::InvalidArgument("the two widths must differ".into()));
    }
    let s1 = Strip::uniform(direction.clone(), b1.clone())?;
    let s2 = Strip::uniform(direction.clone(), b2.clone())?;
    Ok((
        net_growth_profile(sys, set, &s1, epsilon, schedule)?,
        net_growth_profile(sys, set, &s2, epsilon, schedule)?,
    ))
}

/// Parameters for the joint compactness / nullity check.
#[derive(Debug, Clone)]
pub struct NullityOptions {
    pub epsilons: Vec<f64>,
    pub schedule: Vec<(i64, i64)>,
    pub horizon: usize,
    pub window: i64,
    /// Tail increments at or below this count as zero entropy.
    pub null_tolerance: f64,
    /// Tail increments above this count as positive entropy.
    pub positive_threshold: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SetDiagnosis {
    pub label: String,
    pub verdicts: Vec<Verdict>,
    /// Largest greedy increment of `{B, B^c}` over the last quarter of the horizon.
    pub tail_increment: f64,
    pub final_average: f64,
    pub compact: bool,
    pub null: bool,
    pub positive: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct NullityReport {
    pub strip: Strip,
    pub sets: Vec<SetDiagnosis>,
    pub all_compact: bool,
    pub all_null: bool,
    /// Every set is either compact and null, or non-compact and positive.
    pub consistent: bool,
}

/// Pairs the ε-net verdicts of each set with the greedy directional entropy
/// of `{B, B^c}` in the same strip.
pub fn directional_nullity_check(
    sys: &System,
    sets: &[(String, MeasurableSet)],
    strip: &Strip,
    opts: &NullityOptions,
) -> Result<NullityReport> {
    let mut diagnoses = Vec::with_capacity(sets.len());
    for (label, set) in sets {
        let profiles = net_growth_profiles(sys, set, strip, &opts.epsilons, &opts.schedule)?;
        let verdicts: Vec<Verdict> = profiles.iter().map(|p| p.verdict).collect();
        let alpha = Partition::binary(sys, set)?;
        let (_, curve) = greedy_directional_sequence(sys, &alpha, strip, opts.horizon, opts.window)?;
        let tail = (curve.len() / 4).max(1);
        let est = estimate_limsup(&curve, tail)?;
        let compact = verdicts.iter().all(|v| *v == Verdict::CompactLikely);
        let noncompact = verdicts.iter().all(|v| *v == Verdict::NonCompactLikely);
        let null = est.tail_max_increment <= opts.null_tolerance;
        let positive = est.tail_max_increment > opts.positive_threshold;
        diagnoses.push((
            SetDiagnosis {
                label: label.clone(),
                verdicts,
                tail_increment: est.tail_max_increment,
                final_average: est.last_average,
                compact,
                null,
                positive,
            },
            noncompact,
        ));
    }
    let all_compact = diagnoses.iter().all(|(d, _)| d.compact);
    let all_null = diagnoses.iter().all(|(d, _)| d.null);
    let consistent = diagnoses
        .iter()
        .all(|(d, noncompact)| (d.compact && d.null) || (*noncompact && d.positive));
    Ok(NullityReport {
        strip: strip.clone(),
        sets: diagnoses.into_iter().map(|(d, _)| d).collect(),
        all_compact,
        all_null,
        consistent,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rational::{int, rat};
    use crate::systems::{make_bernoulli_shift, make_example_system, make_rotation_action};

    fn fair() -> System {
        make_bernoulli_shift(2, vec![rat(1, 2), rat(1, 2)]).unwrap()
    }

    fn rotation() -> System {
        make_rotation_action(2, vec![rat(13, 21), rat(5, 8)]).unwrap()
    }

    #[test]
    fn orbit_distance_examples() {
        let sys = fair();
        let b = sys.cylinder(&[(vec![0, 0], 0)]).unwrap();
        let o = LatticePoint::zero(2);
        assert_eq!(orbit_distance(&sys, &b, &o, &o).unwrap(), 0.0);
        let d = orbit_distance_squared(&sys, &b, &o, &LatticePoint::planar(1, 1)).unwrap();
        assert_eq!(d, rat(1, 2));
        assert!((orbit_distance(&sys, &b, &o, &LatticePoint::planar(1, 1)).unwrap() - 0.5f64.sqrt()).abs() < 1e-15);
        let ex = make_example_system();
        let b = ex.cylinder(&[(vec![0], 0)]).unwrap();
        assert_eq!(orbit_distance(&ex, &b, &LatticePoint::planar(5, 0), &LatticePoint::planar(9, 0)).unwrap(), 0.0);
    }

    #[test]
    fn net_examples() {
        let zeros = DistanceMatrix::new(vec![vec![0.0; 4]; 4]).unwrap();
        assert_eq!(greedy_epsilon_net(&zeros, 0.1), vec![0]);
        let ones: Vec<Vec<f64>> = (0..5).map(|i| (0..5).map(|j| if i == j { 0.0 } else { 1.0 }).collect()).collect();
        let m = DistanceMatrix::new(ones).unwrap();
        assert_eq!(greedy_epsilon_net(&m, 0.5).len(), 5);
        assert_eq!(greedy_epsilon_net(&m, 2.0).len(), 1);
        // strict comparison: a point at exactly epsilon is not covered
        assert_eq!(greedy_epsilon_net(&m, 1.0).len(), 5);
    }

    #[test]
    fn matrix_validation() {
        assert_eq!(
            DistanceMatrix::new(vec![vec![0.0, 1.0], vec![2.0, 0.0]]).unwrap_err(),
            Error::NonSymmetricMatrix { row: 0, col: 1 }
        );
        assert_eq!(
            DistanceMatrix::new(vec![vec![0.0, 1.0], vec![1.0, 0.5]]).unwrap_err(),
            Error::NonSymmetricMatrix { row: 1, col: 1 }
        );
        assert!(DistanceMatrix::new(vec![vec![0.0, 1.0]]).is_err());
    }

    #[test]
    fn orbit_matrix_matches_pairwise_distances() {
        let sys = rotation();
        let b = sys.arcs(&[(int(0), rat(1, 2))]).unwrap();
        let strip = Strip::planar(int(1), int(2)).unwrap();
        let pts = strip_points(&strip, 0, 4).unwrap();
        let m = DistanceMatrix::from_orbit(&sys, &b, &pts).unwrap();
        for i in 0..pts.len() {
            for j in 0..pts.len() {
                assert_eq!(m.get(i, j), orbit_distance(&sys, &b, &pts[i], &pts[j]).unwrap());
            }
        }
    }

    #[test]
    fn rotation_profile_is_compact() {
        let sys = rotation();
        let b = sys.arcs(&[(int(0), rat(1, 2))]).unwrap();
        let strip = Strip::planar(int(0), int(1)).unwrap();
        let p = net_growth_profile(&sys, &b, &strip, 0.1, &linear_schedule(8, 8)).unwrap();
        assert_eq!(p.verdict, Verdict::CompactLikely);
        assert!(p.windows.windows(2).all(|w| w[0].net_size <= w[1].net_size));
        // 21 distinct offsets at most: 13 m / 21 mod 1
        assert!(p.windows.last().unwrap().net_size <= 21);
    }

    #[test]
    fn bernoulli_profile_is_noncompact() {
        let sys = fair();
        let b = sys.cylinder(&[(vec![0, 0], 0)]).unwrap();
        let strip = Strip::planar(int(1), int(1)).unwrap();
        let p = net_growth_profile(&sys, &b, &strip, 0.5, &linear_schedule(8, 4)).unwrap();
        assert_eq!(p.verdict, Verdict::NonCompactLikely);
        for w in &p.windows {
            assert_eq!(w.net_size, w.points);
        }
        assert!((p.evidence.slope - 1.0).abs() < 1e-12);
    }

    #[test]
    fn example_profile_is_trivially_compact() {
        let sys = make_example_system();
        let b = sys.cylinder(&[(vec![0], 0)]).unwrap();
        let strip = Strip::planar(int(0), int(1)).unwrap();
        let p = net_growth_profile(&sys, &b, &strip, 0.5, &linear_schedule(8, 4)).unwrap();
        assert!(p.windows.iter().all(|w| w.net_size == 1));
        assert_eq!(p.verdict, Verdict::CompactLikely);
    }

    #[test]
    fn schedule_validation() {
        let sys = fair();
        let b = sys.cylinder(&[(vec![0, 0], 0)]).unwrap();
        let strip = Strip::planar(int(1), int(1)).unwrap();
        assert!(net_growth_profile(&sys, &b, &strip, 0.5, &[(0, 3)]).is_err());
        assert!(net_growth_profile(&sys, &b, &strip, 0.5, &[(0, 3), (1, 5)]).is_err());
        assert!(net_growth_profile(&sys, &b, &strip, 0.5, &[(0, 3), (0, 3)]).is_err());
    }

    #[test]
    fn inconclusive_when_growth_is_slow() {
        let windows: Vec<WindowSample> = [1usize, 1, 2, 2, 2, 3]
            .iter()
            .enumerate()
            .map(|(i, &s)| WindowSample { m_lo: 0, m_hi: 10 * i as i64 + 9, points: 10 * (i + 1), net_size: s })
            .collect();
        assert_eq!(decide(&windows).0, Verdict::Inconclusive);
    }

    #[test]
    fn b_independence_examples() {
        let sched = linear_schedule(8, 8);
        let ex = make_example_system();
        let b = ex.cylinder(&[(vec![0], 0)]).unwrap();
        let dir = Direction::planar(int(0));
        assert!(b_independence_check(&ex, &b, &dir, &int(1), &int(3), 0.5, &sched).unwrap());
        assert!(b_independence_check(&ex, &b, &dir, &int(1), &int(1), 0.5, &sched).is_err());
    }

    #[test]
    fn box_profile_for_rotation() {
        let sys = rotation();
        let b = sys.arcs(&[(int(0), rat(1, 2))]).unwrap();
        let p = box_growth_profile(&sys, &b, 0.1, &[4, 8, 12, 16, 20, 24, 28, 32]).unwrap();
        assert_eq!(p.verdict, Verdict::CompactLikely);
        assert!(p.windows.last().unwrap().net_size <= 168);
    }
}
