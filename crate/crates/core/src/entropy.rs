//! Entropy of iterated joins along lattice sequences.
//!
//! `H_k = H(T^{-w_1} alpha ∨ ... ∨ T^{-w_k} alpha)` is accumulated through the
//! chain rule `H_k = H_{k-1} + H(T^{-w_k} alpha | previous join)`.
//!
//! For shift systems the running join is kept as independent components:
//! translates whose cylinder supports never meet are independent under the
//! product measure, so the conditional entropy of a new translate only needs
//! the components whose supports it touches. Arc partitions have no such
//! structure and always form a single component.

use crate::error::{Error, Result};
use crate::lattice::{strip_points, LatticePoint, SequenceSpec, Strip};
use crate::measure::{conditional_entropy, join_capped, refines, Partition};
use crate::systems::System;
use rayon::prelude::*;
use serde::Serialize;
use std::collections::BTreeSet;

pub const DEFAULT_CELL_CAP: usize = 1 << 20;
pub const DEFAULT_GREEDY_WINDOW: i64 = 8;

/// Scores closer than this are treated as ties in the greedy search.
const TIE_TOLERANCE: f64 = 1e-12;

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct EntropySample {
    pub k: usize,
    pub joint: f64,
    pub average: f64,
    pub increment: f64,
    pub point: LatticePoint,
}

/// Where a curve stopped because a join outgrew the cell cap.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct Truncation {
    pub at_k: usize,
    pub cell_cap: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct EntropyCurve {
    pub partition_label: String,
    pub samples: Vec<EntropySample>,
    pub sequence: SequenceSpec,
    pub truncated: Option<Truncation>,
}

impl EntropyCurve {
    pub fn len(&self) -> usize {
        self.samples.len()
    }

    pub fn is_empty(&self) -> bool {
        self.samples.is_empty()
    }

    pub fn last(&self) -> Option<&EntropySample> {
        self.samples.last()
    }

    pub fn averages(&self) -> Vec<f64> {
        self.samples.iter().map(|s| s.average).collect()
    }

    pub fn increments(&self) -> Vec<f64> {
        self.samples.iter().map(|s| s.increment).collect()
    }

    pub fn with_label(mut self, label: impl Into<String>) -> Self {
        self.partition_label = label.into();
        self
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct CurveOptions {
    pub cell_cap: usize,
}

impl Default for CurveOptions {
    fn default() -> Self {
        CurveOptions { cell_cap: DEFAULT_CELL_CAP }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct GreedyOptions {
    /// Candidates at step `i` have `m_1` in `(m_{i-1}, m_{i-1} + window]`.
    pub window: i64,
    pub cell_cap: usize,
    /// The first step searches `m_1` in `[start_m, start_m + window)`.
    pub start_m: i64,
}

impl Default for GreedyOptions {
    fn default() -> Self {
        GreedyOptions { window: DEFAULT_GREEDY_WINDOW, cell_cap: DEFAULT_CELL_CAP, start_m: 0 }
    }
}

struct Component {
    support: Option<BTreeSet<Vec<i64>>>,
    partition: Partition,
}

/// The running join, factored into mutually independent components.
struct JoinState<'a> {
    sys: &'a System,
    components: Vec<Component>,
    cap: usize,
}

impl<'a> JoinState<'a> {
    fn new(sys: &'a System, cap: usize) -> Self {
        JoinState { sys, components: Vec::new(), cap }
    }

    fn related(&self, support: &Option<BTreeSet<Vec<i64>>>) -> Vec<usize> {
        self.components
            .iter()
            .enumerate()
            .filter(|(_, c)| match (support, &c.support) {
                (Some(a), Some(b)) => !a.is_disjoint(b),
                _ => true,
            })
            .map(|(i, _)| i)
            .collect()
    }

    /// Join of the components in `idx`, or `None` past the cap.
    fn context(&self, idx: &[usize]) -> Result<Option<Partition>> {
        let mut acc = Partition::trivial(self.sys);
        for &i in idx {
            match join_capped(&self.components[i].partition, &acc, self.cap)? {
                Some(p) => acc = p,
                None => return Ok(None),
            }
        }
        Ok(Some(acc))
    }

    /// `H(beta | current join)`, or `None` past the cap.
    fn score(&self, beta: &Partition) -> Result<Option<f64>> {
        let idx = self.related(&beta.support());
        match self.context(&idx)? {
            Some(ctx) => conditional_entropy(self.sys, beta, &ctx).map(Some),
            None => Ok(None),
        }
    }

    /// Adds `beta` to the join and returns the entropy increment.
    fn push(&mut self, beta: Partition) -> Result<Option<f64>> {
        let support = beta.support();
        let idx = self.related(&support);
        let Some(ctx) = self.context(&idx)? else {
            return Ok(None);
        };
        let increment = conditional_entropy(self.sys, &beta, &ctx)?;
        let Some(merged) = join_capped(&ctx, &beta, self.cap)? else {
            return Ok(None);
        };
        let mut merged_support = support;
        for &i in idx.iter().rev() {
            let comp = self.components.swap_remove(i);
            merged_support = match (merged_support, comp.support) {
                (Some(mut a), Some(b)) => {
                    a.extend(b);
                    Some(a)
                }
                _ => None,
            };
        }
        self.components.push(Component { support: merged_support, partition: merged });
        Ok(Some(increment))
    }
}

fn check_alpha(sys: &System, alpha: &Partition) -> Result<()> {
    if alpha.tag() != sys.tag() {
        return Err(Error::ForeignSet);
    }
    Ok(())
}

/// Entropy curve of `alpha` along the first `k_max` points of `seq`.
pub fn sequence_entropy_curve(sys: &System, alpha: &Partition, seq: &SequenceSpec, k_max: usize) -> Result<EntropyCurve> {
    sequence_entropy_curve_with(sys, alpha, seq, k_max, &CurveOptions::default())
}

pub fn sequence_entropy_curve_with(
    sys: &System,
    alpha: &Partition,
    seq: &SequenceSpec,
    k_max: usize,
    opts: &CurveOptions,
) -> Result<EntropyCurve> {
    check_alpha(sys, alpha)?;
    if k_max > seq.len() {
        return Err(Error::InvalidArgument(format!(
            "horizon {k_max} exceeds sequence length {}",
            seq.len()
        )));
    }
    let mut state = JoinState::new(sys, opts.cell_cap);
    let mut samples = Vec::with_capacity(k_max);
    let mut truncated = None;
    let mut joint = 0.0;
    for (i, w) in seq.points()[..k_max].iter().enumerate() {
        let k = i + 1;
        let beta = alpha.translate(sys, w)?;
        let Some(increment) = state.push(beta)? else {
            truncated = Some(Truncation { at_k: k, cell_cap: opts.cell_cap });
            break;
        };
        joint += increment;
        samples.push(EntropySample { k, joint, average: joint / k as f64, increment, point: w.clone() });
    }
    Ok(EntropyCurve { partition_label: "alpha".into(), samples, sequence: seq.clone(), truncated })
}

/// Finite-horizon summary standing in for `limsup_k H_k / k`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct LimsupEstimate {
    pub tail: usize,
    /// Largest `H_k / k` over the tail.
    pub tail_max_average: f64,
    pub last_average: f64,
    /// Least-squares slope of `H_k / k` against `k` over the tail.
    pub tail_slope: f64,
    /// Largest conditional-entropy increment over the tail.
    pub tail_max_increment: f64,
}

pub fn estimate_limsup(curve: &EntropyCurve, tail: usize) -> Result<LimsupEstimate> {
    if tail == 0 || tail > curve.len() {
        return Err(Error::InvalidArgument(format!(
            "tail {tail} must be in 1..={}",
            curve.len()
        )));
    }
    let window = &curve.samples[curve.len() - tail..];
    let tail_max_average = window.iter().map(|s| s.average).fold(f64::NEG_INFINITY, f64::max);
    let tail_max_increment = window.iter().map(|s| s.increment).fold(f64::NEG_INFINITY, f64::max);
    let n = window.len() as f64;
    let mean_k = window.iter().map(|s| s.k as f64).sum::<f64>() / n;
    let mean_a = window.iter().map(|s| s.average).sum::<f64>() / n;
    let (num, den) = window.iter().fold((0.0, 0.0), |(num, den), s| {
        let dk = s.k as f64 - mean_k;
        (num + dk * (s.average - mean_a), den + dk * dk)
    });
    let tail_slope = if den > 0.0 { num / den } else { 0.0 };
    Ok(LimsupEstimate {
        tail,
        tail_max_average,
        last_average: window[window.len() - 1].average,
        tail_slope,
        tail_max_increment,
    })
}

/// Greedy sup-seeking sequence inside `strip`: each step takes the candidate
/// with the largest entropy increment among strip points whose `m_1` lies in
/// the next `window` columns (ties go to the lexicographically smallest point).
/// The resulting averages bound the directional entropy of `alpha` from below.
pub fn greedy_directional_sequence(
    sys: &System,
    alpha: &Partition,
    strip: &Strip,
    horizon: usize,
    window: i64,
) -> Result<(SequenceSpec, EntropyCurve)> {
    let opts = GreedyOptions { window, ..GreedyOptions::default() };
    greedy_directional_sequence_with(sys, alpha, strip, horizon, &opts)
}

pub fn greedy_directional_sequence_with(
    sys: &System,
    alpha: &Partition,
    strip: &Strip,
    horizon: usize,
    opts: &GreedyOptions,
) -> Result<(SequenceSpec, EntropyCurve)> {
    check_alpha(sys, alpha)?;
    if horizon == 0 || opts.window < 1 {
        return Err(Error::InvalidArgument("horizon and window must be at least 1".into()));
    }
    if strip.q() != sys.q() {
        return Err(Error::DimensionMismatch { expected: sys.q(), found: strip.q() });
    }
    let mut state = JoinState::new(sys, opts.cell_cap);
    let mut points = Vec::with_capacity(horizon);
    let mut samples = Vec::with_capacity(horizon);
    let mut truncated = None;
    let mut joint = 0.0;
    let mut last_m = opts.start_m - 1;
    for k in 1..=horizon {
        let candidates = strip_points(strip, last_m + 1, last_m + opts.window)?;
        if candidates.is_empty() {
            return Err(Error::EmptyCandidateWindow { after: last_m, last: last_m + opts.window });
        }
        let translated = candidates
            .iter()
            .map(|w| alpha.translate(sys, w))
            .collect::<Result<Vec<_>>>()?;
        let scores = translated
            .par_iter()
            .map(|beta| state.score(beta))
            .collect::<Result<Vec<_>>>()?;
        let Some(scores) = scores.into_iter().collect::<Option<Vec<f64>>>() else {
            truncated = Some(Truncation { at_k: k, cell_cap: opts.cell_cap });
            break;
        };
        let best = scores.iter().copied().fold(f64::NEG_INFINITY, f64::max);
        let pick = scores
            .iter()
            .position(|&s| s >= best - TIE_TOLERANCE)
            .expect("nonempty candidates");
        let Some(increment) = state.push(translated.into_iter().nth(pick).expect("pick in range"))? else {
            truncated = Some(Truncation { at_k: k, cell_cap: opts.cell_cap });
            break;
        };
        let w = candidates[pick].clone();
        last_m = w.m();
        joint += increment;
        samples.push(EntropySample { k, joint, average: joint / k as f64, increment, point: w.clone() });
        points.push(w);
    }
    let seq = SequenceSpec::from_parts_unchecked(points, Some(strip.clone()));
    let curve = EntropyCurve { partition_label: "alpha".into(), samples, sequence: seq.clone(), truncated };
    Ok((seq, curve))
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RefinementEstimate {
    pub index: usize,
    pub cells: usize,
    /// `H_K / K` at the end of the curve.
    pub average: f64,
    pub estimate: LimsupEstimate,
    pub truncated: Option<Truncation>,
}

/// Entropy estimates along `seq` for an increasing chain of partitions.
pub fn refinement_scan(
    sys: &System,
    partitions: &[Partition],
    seq: &SequenceSpec,
    k_max: usize,
) -> Result<Vec<RefinementEstimate>> {
    if partitions.is_empty() || k_max == 0 {
        return Err(Error::InvalidArgument("need at least one partition and k >= 1".into()));
    }
    for (i, pair) in partitions.windows(2).enumerate() {
        if !refines(sys, &pair[1], &pair[0])? {
            return Err(Error::RefinementViolation { previous: i, index: i + 1 });
        }
    }
    partitions
        .iter()
        .enumerate()
        .map(|(index, alpha)| {
            let curve = sequence_entropy_curve(sys, alpha, seq, k_max)?;
            let tail = (curve.len() / 2).max(1).min(curve.len());
            let estimate = estimate_limsup(&curve, tail)?;
            Ok(RefinementEstimate {
                index,
                cells: alpha.len(),
                average: curve.last().map_or(0.0, |s| s.average),
                estimate,
                truncated: curve.truncated,
            })
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::lattice::monotone_sequence;
    use crate::measure::{join, partition_entropy};
    use crate::rational::{int, rat};
    use crate::systems::{make_bernoulli_shift, make_example_system, make_rotation_action};

    const LN2: f64 = std::f64::consts::LN_2;

    fn fair() -> System {
        make_bernoulli_shift(2, vec![rat(1, 2), rat(1, 2)]).unwrap()
    }

    /// Independent oracle: materialise the join and take its entropy.
    fn brute_joint(sys: &System, alpha: &Partition, points: &[LatticePoint]) -> f64 {
        let mut acc = Partition::trivial(sys);
        for w in points {
            acc = join(&acc, &alpha.translate(sys, w).unwrap()).unwrap();
        }
        partition_entropy(sys, &acc).unwrap()
    }

    fn explicit(points: &[(i64, i64)]) -> SequenceSpec {
        SequenceSpec::explicit(points.iter().map(|&(m, n)| LatticePoint::planar(m, n)).collect()).unwrap()
    }

    #[test]
    fn vertical_sequence_on_example_system() {
        let sys = make_example_system();
        let alpha = sys.time_zero_partition().unwrap();
        let seq = explicit(&(1..=16).map(|n| (0, n)).collect::<Vec<_>>());
        let curve = sequence_entropy_curve(&sys, &alpha, &seq, 16).unwrap();
        for s in &curve.samples {
            assert!((s.average - LN2).abs() < 1e-12);
        }
    }

    #[test]
    fn horizontal_sequence_on_example_system_stalls() {
        let sys = make_example_system();
        let alpha = sys.time_zero_partition().unwrap();
        let strip = Strip::planar(int(0), int(1)).unwrap();
        let seq = monotone_sequence(&strip, 10, 1, 1).unwrap();
        let curve = sequence_entropy_curve(&sys, &alpha, &seq, 10).unwrap();
        for s in &curve.samples {
            assert!((s.joint - LN2).abs() < 1e-12);
            assert!((s.average - LN2 / s.k as f64).abs() < 1e-12);
        }
    }

    #[test]
    fn bernoulli_curve_matches_brute_force() {
        let sys = fair();
        let alpha = sys.time_zero_partition().unwrap();
        let pts = [(0, 0), (1, 3), (0, 0), (2, -1), (1, 3), (5, 5), (-3, 2), (4, 4), (7, 0), (2, 2)];
        let seq = explicit(&pts);
        let curve = sequence_entropy_curve(&sys, &alpha, &seq, pts.len()).unwrap();
        for s in &curve.samples {
            let oracle = brute_joint(&sys, &alpha, &seq.points()[..s.k]);
            assert!((s.joint - oracle).abs() < 1e-12, "k = {}", s.k);
        }
        // repeated points contribute nothing
        assert_eq!(curve.samples[2].increment, 0.0);
        assert_eq!(curve.samples[4].increment, 0.0);
    }

    #[test]
    fn overlapping_supports_merge_components() {
        let sys = make_bernoulli_shift(2, vec![rat(1, 3), rat(2, 3)]).unwrap();
        let a = sys.cylinder(&[(vec![0, 0], 0), (vec![1, 0], 1)]).unwrap();
        let alpha = Partition::binary(&sys, &a).unwrap();
        let pts = [(0, 0), (1, 0), (3, 0), (2, 0), (0, 1), (1, 1)];
        let seq = explicit(&pts);
        let curve = sequence_entropy_curve(&sys, &alpha, &seq, pts.len()).unwrap();
        for s in &curve.samples {
            let oracle = brute_joint(&sys, &alpha, &seq.points()[..s.k]);
            assert!((s.joint - oracle).abs() < 1e-12, "k = {}", s.k);
        }
    }

    #[test]
    fn rotation_curve_matches_brute_force_and_arc_bound() {
        let sys = make_rotation_action(2, vec![rat(13, 21), rat(5, 8)]).unwrap();
        let alpha = sys.arc_partition(&[int(0), rat(1, 2)]).unwrap();
        let strip = Strip::planar(int(1), int(1)).unwrap();
        let seq = monotone_sequence(&strip, 12, 1, 1).unwrap();
        let curve = sequence_entropy_curve(&sys, &alpha, &seq, 12).unwrap();
        for s in &curve.samples {
            let oracle = brute_joint(&sys, &alpha, &seq.points()[..s.k]);
            assert!((s.joint - oracle).abs() < 1e-12);
            assert!(s.joint <= ((2 * s.k) as f64).ln() + 1e-12);
        }
    }

    #[test]
    fn cell_cap_truncates() {
        let sys = make_rotation_action(1, vec![rat(1, 7)]).unwrap();
        let alpha = sys.arc_partition(&[int(0), rat(1, 2)]).unwrap();
        let seq = explicit(&[(0, 0)]);
        let _ = seq;
        let pts: Vec<LatticePoint> = (0..6).map(|i| LatticePoint::new(vec![i])).collect();
        let seq = SequenceSpec::explicit(pts).unwrap();
        let curve = sequence_entropy_curve_with(&sys, &alpha, &seq, 6, &CurveOptions { cell_cap: 4 }).unwrap();
        assert_eq!(curve.truncated, Some(Truncation { at_k: 3, cell_cap: 4 }));
        assert_eq!(curve.len(), 2);
    }

    #[test]
    fn curve_rejects_long_horizon_and_foreign_partition() {
        let sys = fair();
        let alpha = sys.time_zero_partition().unwrap();
        let seq = explicit(&[(0, 0)]);
        assert!(sequence_entropy_curve(&sys, &alpha, &seq, 2).is_err());
        let other = make_example_system();
        assert_eq!(sequence_entropy_curve(&other, &alpha, &seq, 1).unwrap_err(), Error::ForeignSet);
    }

    #[test]
    fn limsup_examples() {
        let sys = fair();
        let alpha = sys.time_zero_partition().unwrap();
        let seq = explicit(&(0..8).map(|n| (n, 0)).collect::<Vec<_>>());
        let flat = sequence_entropy_curve(&sys, &alpha, &seq, 8).unwrap();
        let est = estimate_limsup(&flat, 4).unwrap();
        assert!((est.tail_max_average - LN2).abs() < 1e-12);
        assert!(est.tail_slope.abs() < 1e-12);

        let ex = make_example_system();
        let alpha = ex.time_zero_partition().unwrap();
        let decaying = sequence_entropy_curve(&ex, &alpha, &seq, 8).unwrap();
        let est = estimate_limsup(&decaying, 4).unwrap();
        assert!((est.tail_max_average - LN2 / 5.0).abs() < 1e-12);
        assert!((est.last_average - LN2 / 8.0).abs() < 1e-12);
        assert!(est.tail_slope < 0.0);
        assert_eq!(est.tail_max_increment, 0.0);

        assert!(estimate_limsup(&decaying, 0).is_err());
        assert!(estimate_limsup(&decaying, 9).is_err());
    }

    #[test]
    fn greedy_bernoulli_takes_fresh_points() {
        let sys = fair();
        let alpha = sys.time_zero_partition().unwrap();
        let strip = Strip::planar(int(1), int(1)).unwrap();
        let (seq, curve) = greedy_directional_sequence(&sys, &alpha, &strip, 20, 8).unwrap();
        assert_eq!(seq.len(), 20);
        // ties resolve to the first column of each window
        assert_eq!(seq.points()[0], LatticePoint::planar(0, 0));
        assert_eq!(seq.points()[1], LatticePoint::planar(1, 1));
        for s in &curve.samples {
            assert!((s.increment - LN2).abs() < 1e-12);
        }
    }

    #[test]
    fn greedy_example_system_horizontal_stalls() {
        let sys = make_example_system();
        let alpha = sys.time_zero_partition().unwrap();
        let strip = Strip::planar(int(0), int(1)).unwrap();
        let (_, curve) = greedy_directional_sequence(&sys, &alpha, &strip, 20, 8).unwrap();
        assert!((curve.samples[0].increment - LN2).abs() < 1e-12);
        assert!(curve.samples[1..].iter().all(|s| s.increment == 0.0));
    }

    #[test]
    fn greedy_prefers_informative_candidates() {
        // widths 3 around slope 0: the greedy step can pick n = -1, 0, 1 freely;
        // on the example system a fresh n must win over a repeated one.
        let sys = make_example_system();
        let alpha = sys.time_zero_partition().unwrap();
        let strip = Strip::planar(int(0), int(3)).unwrap();
        let (seq, curve) = greedy_directional_sequence(&sys, &alpha, &strip, 4, 2).unwrap();
        let ns: Vec<i64> = seq.points().iter().map(|p| p.coords()[1]).collect();
        assert_eq!(&ns[..3], &[-1, 0, 1]);
        assert!((curve.samples[2].joint - 3.0 * LN2).abs() < 1e-12);
        assert_eq!(curve.samples[3].increment, 0.0);
    }

    #[test]
    fn greedy_rotation_respects_arc_bound() {
        let sys = make_rotation_action(2, vec![rat(13, 21), rat(5, 8)]).unwrap();
        let alpha = sys.arc_partition(&[int(0), rat(1, 2)]).unwrap();
        let strip = Strip::planar(int(0), int(2)).unwrap();
        let (_, curve) = greedy_directional_sequence(&sys, &alpha, &strip, 20, 8).unwrap();
        for s in &curve.samples {
            assert!(s.average <= ((2 * s.k) as f64).ln() / s.k as f64 + 1e-12);
        }
    }

    #[test]
    fn greedy_rejects_empty_window() {
        let sys = make_example_system();
        let alpha = sys.time_zero_partition().unwrap();
        let narrow = Strip::planar(rat(1, 2), rat(1, 3)).unwrap();
        let err = greedy_directional_sequence(&sys, &alpha, &narrow, 3, 1).unwrap_err();
        assert_eq!(err, Error::EmptyCandidateWindow { after: 0, last: 1 });
    }

    #[test]
    fn refinement_scan_examples() {
        let sys = fair();
        let base = sys.time_zero_partition().unwrap();
        let mut chain = vec![base.clone()];
        for n in 1..3 {
            let next = join(&chain[n - 1], &base.translate(&sys, &LatticePoint::planar(0, n as i64)).unwrap()).unwrap();
            chain.push(next);
        }
        let strip = Strip::planar(int(1), int(1)).unwrap();
        let seq = monotone_sequence(&strip, 6, 1, 1).unwrap();
        let scan = refinement_scan(&sys, &chain, &seq, 6).unwrap();
        for (n, est) in scan.iter().enumerate() {
            assert!((est.average - (n + 1) as f64 * LN2).abs() < 1e-12);
        }

        let rev: Vec<Partition> = chain.iter().rev().cloned().collect();
        assert_eq!(
            refinement_scan(&sys, &rev, &seq, 6).unwrap_err(),
            Error::RefinementViolation { previous: 0, index: 1 }
        );

        let trivial = refinement_scan(&sys, &[Partition::trivial(&sys)], &seq, 6).unwrap();
        assert_eq!(trivial[0].average, 0.0);
    }
}
