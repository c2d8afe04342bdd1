//! Executes one experiment configuration in memory. Writing files and the
//! manifest is left to the caller.

use crate::config::{
    rational, rationals, EntropyRun, ExperimentConfig, NamedSet, PartitionSpec, SequenceSpecConfig, StripSpec,
    TaskSpec,
};
use crate::error::CliError;
use dirseq_core::entropy::{
    estimate_limsup, greedy_directional_sequence_with, sequence_entropy_curve_with, CurveOptions, EntropyCurve,
    GreedyOptions, DEFAULT_CELL_CAP,
};
use dirseq_core::kronecker::{
    b_independence_profiles, box_growth_profile, directional_nullity_check, net_growth_profiles, NullityOptions,
};
use dirseq_core::lattice::{decompose, monotone_sequence, strip_points};
use dirseq_core::measure::{conditional_entropy, join, partition_entropy};
use dirseq_core::rational::{format_rational, rat};
use dirseq_core::suspension::{cocycle_identity_holds, measure_preservation_check, sample_point, SuspensionSet};
use dirseq_core::{
    make_bernoulli_shift, make_example_system, make_rotation_action, Direction, LatticePoint, LogBase, NetProfile,
    SequenceSpec, Strip, System,
};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;
use serde_json::{json, Value};
use std::time::Instant;

pub struct Artifact {
    pub name: String,
    pub bytes: Vec<u8>,
}

#[derive(Default)]
pub struct Outcome {
    pub artifacts: Vec<Artifact>,
    pub summary: Value,
    pub warnings: Vec<String>,
    pub timings: Vec<(String, f64)>,
    /// Set when a built-in check did not hold; artifacts are still written.
    pub failure: Option<String>,
    /// Short human-readable result line.
    pub headline: Option<String>,
}

impl Outcome {
    fn push_csv(&mut self, name: String, header: &[String], rows: &[Vec<String>]) -> Result<(), CliError> {
        self.artifacts.push(Artifact { name, bytes: csv_bytes(header, rows)? });
        Ok(())
    }

    fn push_json(&mut self, name: &str, value: &impl Serialize) -> Result<(), CliError> {
        self.artifacts.push(Artifact { name: name.into(), bytes: json_bytes(value)? });
        Ok(())
    }

    fn time<T>(&mut self, stage: String, f: impl FnOnce() -> T) -> T {
        let start = Instant::now();
        let out = f();
        self.timings.push((stage, start.elapsed().as_secs_f64()));
        out
    }
}

pub fn csv_bytes(header: &[String], rows: &[Vec<String>]) -> Result<Vec<u8>, CliError> {
    let mut w = csv::WriterBuilder::new().terminator(csv::Terminator::Any(b'\n')).from_writer(Vec::new());
    w.write_record(header)?;
    for row in rows {
        w.write_record(row)?;
    }
    w.into_inner().map_err(|e| CliError::Io(e.into_error()))
}

pub fn json_bytes(value: &impl Serialize) -> Result<Vec<u8>, CliError> {
    let mut bytes = serde_json::to_vec_pretty(value).map_err(|e| CliError::Failed(e.to_string()))?;
    bytes.push(b'\n');
    Ok(bytes)
}

/// File-name-safe form of a label.
pub fn slug(label: &str) -> String {
    let s: String = label
        .chars()
        .map(|c| if c.is_ascii_alphanumeric() || c == '-' || c == '_' { c } else { '_' })
        .collect();
    if s.is_empty() {
        "unnamed".into()
    } else {
        s
    }
}

pub fn execute(cfg: &ExperimentConfig) -> Result<Outcome, CliError> {
    let mut out = Outcome::default();
    let cell_cap = cfg.cell_cap.unwrap_or(DEFAULT_CELL_CAP);
    let base: LogBase = cfg.log_base.into();
    let system = match &cfg.system {
        Some(s) => Some(s.build()?),
        None => None,
    };
    let sys = || system.as_ref().ok_or_else(|| CliError::Config("task needs a system".into()));
    match &cfg.task {
        TaskSpec::Entropy { partition, runs } => entropy(&mut out, sys()?, partition, runs, cell_cap, base)?,
        TaskSpec::Kronecker { sets, strips, epsilons, schedule, box_radii, nullity } => {
            let sys = sys()?;
            let schedule = schedule.windows();
            let built = build_sets(sys, sets)?;
            let mut profiles: Vec<NetProfile> = Vec::new();
            for (si, strip_spec) in strips.iter().enumerate() {
                let strip = strip_spec.build()?;
                for (label, set) in &built {
                    let ps = out.time(format!("nets {label} strip {si}"), || {
                        net_growth_profiles(sys, set, &strip, epsilons, &schedule)
                    })?;
                    for (ei, mut p) in ps.into_iter().enumerate() {
                        p.set_label = label.clone();
                        out.push_csv(format!("net-{}-strip{si}-eps{ei}.csv", slug(label)), &net_header(), &net_rows(&p))?;
                        profiles.push(p);
                    }
                }
            }
            if !box_radii.is_empty() {
                for (label, set) in &built {
                    for (ei, eps) in epsilons.iter().enumerate() {
                        let mut p = out.time(format!("box nets {label}"), || box_growth_profile(sys, set, *eps, box_radii))?;
                        p.set_label = label.clone();
                        out.push_csv(format!("net-{}-box-eps{ei}.csv", slug(label)), &net_header(), &net_rows(&p))?;
                        profiles.push(p);
                    }
                }
            }
            let mut reports = Vec::new();
            if let Some(n) = nullity {
                let opts = NullityOptions {
                    epsilons: epsilons.clone(),
                    schedule: schedule.clone(),
                    horizon: n.horizon,
                    window: n.window,
                    null_tolerance: n.null_tolerance,
                    positive_threshold: n.positive_threshold,
                };
                for (si, strip_spec) in strips.iter().enumerate() {
                    let strip = strip_spec.build()?;
                    let report = out.time(format!("nullity strip {si}"), || {
                        directional_nullity_check(sys, &built, &strip, &opts)
                    })?;
                    if !report.consistent {
                        out.warnings.push(format!("strip {si}: verdicts and greedy entropies disagree"));
                    }
                    reports.push(report);
                }
            }
            let verdicts: Vec<Value> = profiles
                .iter()
                .map(|p| json!({"set": p.set_label, "strip": p.strip, "epsilon": p.epsilon, "verdict": p.verdict}))
                .collect();
            out.summary = json!({"verdicts": verdicts, "nullity": reports});
            out.push_json("profiles.json", &json!({"profiles": profiles, "nullity": reports}))?;
        }
        TaskSpec::BIndependence { sets, slopes, width_pairs, epsilon, schedule } => {
            let sys = sys()?;
            let direction = Direction::new(rationals(slopes)?).map_err(|e| CliError::Config(e.to_string()))?;
            let schedule = schedule.windows();
            let mut rows = Vec::new();
            let mut all = true;
            for (label, set) in build_sets(sys, sets)? {
                for [b1, b2] in width_pairs {
                    let (r1, r2) = (rational(b1)?, rational(b2)?);
                    let (p1, p2) = out.time(format!("widths {b1},{b2} for {label}"), || {
                        b_independence_profiles(sys, &set, &direction, &r1, &r2, *epsilon, &schedule)
                    })?;
                    let agree = p1.verdict == p2.verdict;
                    all &= agree;
                    rows.push(vec![
                        label.clone(),
                        b1.clone(),
                        b2.clone(),
                        verdict_name(&p1),
                        verdict_name(&p2),
                        agree.to_string(),
                    ]);
                }
            }
            let header = ["set", "b1", "b2", "verdict1", "verdict2", "agree"].map(String::from).to_vec();
            out.push_csv("b-independence.csv".into(), &header, &rows)?;
            out.summary = json!({"checks": rows.len(), "all_agree": all});
            out.headline = Some(format!("{}/{} width pairs agree", rows.iter().filter(|r| r[5] == "true").count(), rows.len()));
            if !all {
                out.failure = Some("compactness verdicts depend on the strip width".into());
            }
        }
        TaskSpec::DecomposeGrid { v, w, width, radius } => {
            let (v, w, b) = (Direction::planar(rational(v)?), Direction::planar(rational(w)?), rational(width)?);
            let sv = Strip::uniform(v.clone(), b.clone())?;
            let sw = Strip::uniform(w.clone(), b.clone())?;
            let mut rows = Vec::new();
            let mut verified = 0usize;
            let start = Instant::now();
            for m in -radius..=*radius {
                for n in -radius..=*radius {
                    let p = LatticePoint::planar(m, n);
                    let (p1, p2) = decompose(&p, &v, &w, &b)?;
                    let ok = &p1 + &p2 == p && sv.contains(&p1)? && sw.contains(&p2)?;
                    verified += ok as usize;
                    let c = |q: &LatticePoint, i: usize| q.coords()[i].to_string();
                    rows.push(vec![m.to_string(), n.to_string(), c(&p1, 0), c(&p1, 1), c(&p2, 0), c(&p2, 1), ok.to_string()]);
                }
            }
            out.timings.push(("decompose".into(), start.elapsed().as_secs_f64()));
            let total = rows.len();
            let header = ["m", "n", "m1", "n1", "m2", "n2", "verified"].map(String::from).to_vec();
            out.push_csv("decompose.csv".into(), &header, &rows)?;
            let line = format!("{verified}/{total} verified");
            out.summary = json!({"verified": verified, "total": total, "report": line});
            out.push_json("report.json", &out.summary.clone())?;
            out.headline = Some(line);
            if verified != total {
                out.failure = Some(format!("{} points failed to decompose", total - verified));
            }
        }
        TaskSpec::Strip { strip, m_lo, m_hi } => {
            let s = strip.build()?;
            let points = strip_points(&s, *m_lo, *m_hi)?;
            let header: Vec<String> = (1..=s.q()).map(|i| format!("m{i}")).collect();
            let rows: Vec<Vec<String>> =
                points.iter().map(|p| p.coords().iter().map(|c| c.to_string()).collect()).collect();
            out.push_csv("points.csv".into(), &header, &rows)?;
            out.summary = json!({"points": rows.len()});
        }
        TaskSpec::ChainRule { triples } => chain_rule(&mut out, *triples, cfg.seed, base)?,
        TaskSpec::Suspension { beta, samples, random_betas, n_max, sets } => {
            let sys = sys()?;
            let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
            let mut rows = Vec::new();
            let mut cocycle_ok = true;
            let start = Instant::now();
            for _ in 0..*random_betas {
                let b = rat(rng.random_range(-60..=60), rng.random_range(1..=24));
                let p = sample_point(sys, &mut rng);
                let mut holds = true;
                for n in 0..=*n_max {
                    holds &= cocycle_identity_holds(sys, &b, &p, n)?;
                }
                cocycle_ok &= holds;
                rows.push(vec![format_rational(&b), n_max.to_string(), holds.to_string()]);
            }
            out.timings.push(("cocycle".into(), start.elapsed().as_secs_f64()));
            let header = ["beta", "n_max", "holds"].map(String::from).to_vec();
            out.push_csv("cocycle.csv".into(), &header, &rows)?;
            let test_sets = sets
                .iter()
                .map(|s| {
                    let base = match &s.base {
                        Some(b) => b.build(sys)?,
                        None => sys.full_set(),
                    };
                    Ok(SuspensionSet {
                        label: s.label.clone(),
                        base,
                        u_range: (rational(&s.u[0])?, rational(&s.u[1])?),
                        v_range: (rational(&s.v[0])?, rational(&s.v[1])?),
                    })
                })
                .collect::<Result<Vec<_>, CliError>>()?;
            let beta = rational(beta)?;
            let report = out.time("preservation".into(), || {
                measure_preservation_check(sys, &beta, *samples, &test_sets, cfg.seed)
            })?;
            out.push_json("preservation.json", &report)?;
            out.summary = json!({"cocycle_identity": cocycle_ok, "betas": rows.len(), "preservation_passed": report.passed});
            out.headline = Some(format!(
                "cocycle identity {} for {} values of beta; measure preservation {}",
                if cocycle_ok { "holds" } else { "FAILS" },
                rows.len(),
                if report.passed { "passes" } else { "FAILS" }
            ));
            if !cocycle_ok || !report.passed {
                out.failure = Some("suspension identities do not hold".into());
            }
        }
    }
    Ok(out)
}

fn build_sets(sys: &System, sets: &[NamedSet]) -> Result<Vec<(String, dirseq_core::MeasurableSet)>, CliError> {
    sets.iter().map(|s| Ok((s.label.clone(), s.set.build(sys)?))).collect()
}

fn verdict_name(p: &NetProfile) -> String {
    serde_json::to_value(p.verdict).ok().and_then(|v| v.as_str().map(String::from)).unwrap_or_default()
}

fn net_header() -> Vec<String> {
    ["window", "points", "net_size"].map(String::from).to_vec()
}

fn net_rows(p: &NetProfile) -> Vec<Vec<String>> {
    p.windows
        .iter()
        .map(|w| vec![format!("{}..{}", w.m_lo, w.m_hi), w.points.to_string(), w.net_size.to_string()])
        .collect()
}

fn entropy(
    out: &mut Outcome,
    sys: &System,
    partition: &PartitionSpec,
    runs: &[EntropyRun],
    cell_cap: usize,
    base: LogBase,
) -> Result<(), CliError> {
    let alpha = partition.build(sys)?;
    let mut curves = Vec::new();
    let mut summaries = Vec::new();
    for run in runs {
        let strip = run.strip.as_ref().map(StripSpec::build).transpose()?;
        let curve = out.time(format!("curve {}", run.label), || -> Result<EntropyCurve, CliError> {
            let need = || strip.clone().ok_or_else(|| CliError::Config(format!("run {} needs a strip", run.label)));
            Ok(match &run.sequence {
                SequenceSpecConfig::Explicit { .. } => {
                    let points = run.sequence.explicit_points().unwrap_or_default();
                    let seq = SequenceSpec::new(points, strip.clone())?;
                    sequence_entropy_curve_with(sys, &alpha, &seq, seq.len(), &CurveOptions { cell_cap })?
                }
                SequenceSpecConfig::Monotone { count, stride, start } => {
                    let seq = monotone_sequence(&need()?, *count, *stride, *start)?;
                    sequence_entropy_curve_with(sys, &alpha, &seq, seq.len(), &CurveOptions { cell_cap })?
                }
                SequenceSpecConfig::Greedy { horizon, window, start } => {
                    let opts = GreedyOptions { window: *window, cell_cap, start_m: *start };
                    greedy_directional_sequence_with(sys, &alpha, &need()?, *horizon, &opts)?.1
                }
            })
        })?;
        let mut curve = curve.with_label(partition.label());
        for s in &mut curve.samples {
            s.joint = base.from_nats(s.joint);
            s.average = base.from_nats(s.average);
            s.increment = base.from_nats(s.increment);
        }
        if let Some(t) = &curve.truncated {
            out.warnings.push(format!(
                "run {}: join exceeded the cell cap {} at k = {}; curve truncated",
                run.label, t.cell_cap, t.at_k
            ));
        }
        let q = sys.q();
        let mut header = ["k", "joint", "average", "increment"].map(String::from).to_vec();
        header.extend((1..=q).map(|i| format!("m{i}")));
        let rows: Vec<Vec<String>> = curve
            .samples
            .iter()
            .map(|s| {
                let mut r = vec![s.k.to_string(), s.joint.to_string(), s.average.to_string(), s.increment.to_string()];
                r.extend(s.point.coords().iter().map(|c| c.to_string()));
                r
            })
            .collect();
        out.push_csv(format!("curve-{}.csv", slug(&run.label)), &header, &rows)?;
        let estimate = if curve.is_empty() { None } else { Some(estimate_limsup(&curve, (curve.len() / 4).max(1))?) };
        summaries.push(json!({
            "label": run.label,
            "points": curve.len(),
            "final_joint": curve.last().map(|s| s.joint),
            "final_average": curve.last().map(|s| s.average),
            "estimate": estimate,
            "truncated": curve.truncated,
        }));
        curves.push(json!({"label": run.label, "strip": strip, "curve": curve}));
    }
    out.summary = json!({"partition": partition.label(), "log_base": base, "runs": summaries});
    out.push_json("curves.json", &json!({"partition": partition.label(), "log_base": base, "runs": curves}))?;
    Ok(())
}

/// Systems used by the randomized chain-rule check.
pub fn chain_rule_zoo() -> Vec<(&'static str, System)> {
    vec![
        ("bernoulli(1/2,1/2)", make_bernoulli_shift(2, vec![rat(1, 2), rat(1, 2)]).expect("valid")),
        ("bernoulli(1/3,2/3)", make_bernoulli_shift(2, vec![rat(1, 3), rat(2, 3)]).expect("valid")),
        ("bernoulli(1/5,3/10,1/2)", make_bernoulli_shift(2, vec![rat(1, 5), rat(3, 10), rat(1, 2)]).expect("valid")),
        ("example", make_example_system()),
        ("rotation(13/21,5/8)", make_rotation_action(2, vec![rat(13, 21), rat(5, 8)]).expect("valid")),
    ]
}

fn chain_rule(out: &mut Outcome, triples: usize, seed: u64, base: LogBase) -> Result<(), CliError> {
    let zoo = chain_rule_zoo();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut rows = Vec::with_capacity(triples);
    let mut failures = 0usize;
    let start = Instant::now();
    for i in 0..triples {
        let (name, sys) = &zoo[i % zoo.len()];
        let alpha = sys.random_partition(&mut rng, 4, 24)?;
        let eta = sys.random_partition(&mut rng, 4, 24)?;
        let h_join = partition_entropy(sys, &join(&alpha, &eta)?)?;
        let h_eta = partition_entropy(sys, &eta)?;
        let h_alpha = partition_entropy(sys, &alpha)?;
        let cond = conditional_entropy(sys, &alpha, &eta)?;
        let log_cells = (alpha.len() as f64).ln();
        let gap = (h_join - h_eta - cond).abs();
        let ok = gap <= 1e-12 && cond >= -1e-12 && cond <= h_alpha + 1e-12 && h_alpha <= log_cells + 1e-12;
        failures += !ok as usize;
        let f = |x: f64| base.from_nats(x).to_string();
        rows.push(vec![
            i.to_string(),
            name.to_string(),
            alpha.len().to_string(),
            eta.len().to_string(),
            f(h_join),
            f(h_eta),
            f(cond),
            f(h_alpha),
            f(log_cells),
            gap.to_string(),
            ok.to_string(),
        ]);
    }
    out.timings.push(("chain rule".into(), start.elapsed().as_secs_f64()));
    let header = [
        "triple", "system", "cells_alpha", "cells_eta", "joint", "h_eta", "conditional", "h_alpha", "log_cells", "gap", "ok",
    ]
    .map(String::from)
    .to_vec();
    out.push_csv("chain-rule.csv".into(), &header, &rows)?;
    let line = format!("{}/{} triples satisfy the chain rule and bounds", triples - failures, triples);
    out.summary = json!({"triples": triples, "failures": failures, "report": line});
    out.headline = Some(line);
    if failures > 0 {
        out.failure = Some(format!("{failures} triples violate the chain rule or bounds"));
    }
    Ok(())
}

/// `p1 + p2 = p` for a single point, used by the `decompose` subcommand.
pub fn decompose_point(p: &LatticePoint, v: &str, w: &str, width: &str) -> Result<Value, CliError> {
    let (v, w, b) = (Direction::planar(rational(v)?), Direction::planar(rational(w)?), rational(width)?);
    let (p1, p2) = decompose(p, &v, &w, &b)?;
    Ok(json!({"point": p, "p1": p1, "p2": p2}))
}
