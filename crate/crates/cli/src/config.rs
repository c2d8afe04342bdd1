//! Experiment configuration files. Every rational is written as a string
//! (`"3/7"`, `"-2"`, `"0.25"`) and parsed exactly.

use crate::error::CliError;
use dirseq_core::kronecker::linear_schedule;
use dirseq_core::measure::{Cell, Label};
use dirseq_core::rational::Rational;
use dirseq_core::{
    make_bernoulli_shift, make_example_system, make_rotation_action, parse_rational, Direction, LatticePoint,
    LogBase, MeasurableSet, Partition, Strip, System,
};
use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    pub experiment: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub description: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub system: Option<SystemSpec>,
    pub task: TaskSpec,
    #[serde(default)]
    pub log_base: LogBaseSpec,
    #[serde(default)]
    pub seed: u64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub cell_cap: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub output: Option<OutputSpec>,
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum LogBaseSpec {
    #[default]
    Natural,
    Two,
}

impl From<LogBaseSpec> for LogBase {
    fn from(b: LogBaseSpec) -> Self {
        match b {
            LogBaseSpec::Natural => LogBase::Natural,
            LogBaseSpec::Two => LogBase::Two,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OutputSpec {
    pub dir: String,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case", deny_unknown_fields)]
pub enum SystemSpec {
    BernoulliShift { q: usize, probs: Vec<String> },
    ExampleProduct,
    RotationAction { q: usize, angles: Vec<String> },
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case", deny_unknown_fields)]
pub enum SetSpec {
    Cylinder { constraints: Vec<Constraint> },
    Arcs { arcs: Vec<[String; 2]> },
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Constraint {
    pub coord: Vec<i64>,
    pub symbol: u32,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct NamedSet {
    pub label: String,
    pub set: SetSpec,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case", deny_unknown_fields)]
pub enum PartitionSpec {
    TimeZero,
    Arcs { cuts: Vec<String> },
    UniformArcs { pieces: u32 },
    Binary { set: SetSpec },
    Cells { cells: Vec<SetSpec> },
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct StripSpec {
    pub slopes: Vec<String>,
    pub widths: Vec<String>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case", deny_unknown_fields)]
pub enum SequenceSpecConfig {
    Explicit {
        points: Vec<Vec<i64>>,
    },
    Monotone {
        count: usize,
        #[serde(default = "one")]
        stride: i64,
        #[serde(default)]
        start: i64,
    },
    Greedy {
        horizon: usize,
        #[serde(default = "default_window")]
        window: i64,
        #[serde(default)]
        start: i64,
    },
}

fn one() -> i64 {
    1
}

fn default_window() -> i64 {
    dirseq_core::entropy::DEFAULT_GREEDY_WINDOW
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct EntropyRun {
    pub label: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub strip: Option<StripSpec>,
    pub sequence: SequenceSpecConfig,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case", deny_unknown_fields)]
pub enum ScheduleSpec {
    Linear { count: usize, step: i64 },
    Windows { windows: Vec<[i64; 2]> },
}

impl ScheduleSpec {
    pub fn windows(&self) -> Vec<(i64, i64)> {
        match self {
            ScheduleSpec::Linear { count, step } => linear_schedule(*count, *step),
            ScheduleSpec::Windows { windows } => windows.iter().map(|w| (w[0], w[1])).collect(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct NullitySpec {
    pub horizon: usize,
    #[serde(default = "default_window")]
    pub window: i64,
    #[serde(default = "default_null_tolerance")]
    pub null_tolerance: f64,
    #[serde(default = "default_positive_threshold")]
    pub positive_threshold: f64,
}

fn default_null_tolerance() -> f64 {
    1e-9
}

fn default_positive_threshold() -> f64 {
    0.1
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case", deny_unknown_fields)]
pub enum TaskSpec {
    /// Entropy curves of one partition along one or more sequences.
    Entropy { partition: PartitionSpec, runs: Vec<EntropyRun> },
    /// ε-net growth of each set in each strip, optionally paired with the
    /// greedy entropy of `{B, B^c}`.
    Kronecker {
        sets: Vec<NamedSet>,
        strips: Vec<StripSpec>,
        epsilons: Vec<f64>,
        schedule: ScheduleSpec,
        #[serde(default, skip_serializing_if = "Vec::is_empty")]
        box_radii: Vec<i64>,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        nullity: Option<NullitySpec>,
    },
    /// Compactness verdicts at two strip widths.
    BIndependence {
        sets: Vec<NamedSet>,
        slopes: Vec<String>,
        width_pairs: Vec<[String; 2]>,
        epsilon: f64,
        schedule: ScheduleSpec,
    },
    /// Decomposition of every point of `[-radius, radius]^2`.
    DecomposeGrid { v: String, w: String, width: String, radius: i64 },
    /// Strip points with first coordinate in `[m_lo, m_hi]`.
    Strip { strip: StripSpec, m_lo: i64, m_hi: i64 },
    /// Chain rule and entropy bounds on random partitions.
    ChainRule { triples: usize },
    /// Cocycle identity on random rational `beta` and measure preservation.
    Suspension {
        beta: String,
        samples: usize,
        #[serde(default = "default_betas")]
        random_betas: usize,
        #[serde(default = "default_n_max")]
        n_max: u32,
        sets: Vec<SuspensionSetSpec>,
    },
}

fn default_betas() -> usize {
    50
}

fn default_n_max() -> u32 {
    64
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SuspensionSetSpec {
    pub label: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub base: Option<SetSpec>,
    pub u: [String; 2],
    pub v: [String; 2],
}

pub fn parse_config(text: &str) -> Result<ExperimentConfig, CliError> {
    let cfg: ExperimentConfig = serde_json::from_str(text).map_err(|e| CliError::Config(e.to_string()))?;
    cfg.validate()?;
    Ok(cfg)
}

pub fn rational(s: &str) -> Result<Rational, CliError> {
    parse_rational(s).map_err(|_| CliError::Config(format!("not a rational: {s:?}")))
}

pub fn rationals(v: &[String]) -> Result<Vec<Rational>, CliError> {
    v.iter().map(|s| rational(s)).collect()
}

fn config_err(e: dirseq_core::Error) -> CliError {
    CliError::Config(e.to_string())
}

impl SystemSpec {
    pub fn q(&self) -> usize {
        match self {
            SystemSpec::BernoulliShift { q, .. } | SystemSpec::RotationAction { q, .. } => *q,
            SystemSpec::ExampleProduct => 2,
        }
    }

    pub fn build(&self) -> Result<System, CliError> {
        match self {
            SystemSpec::BernoulliShift { q, probs } => make_bernoulli_shift(*q, rationals(probs)?).map_err(config_err),
            SystemSpec::ExampleProduct => Ok(make_example_system()),
            SystemSpec::RotationAction { q, angles } => {
                make_rotation_action(*q, rationals(angles)?).map_err(config_err)
            }
        }
    }
}

impl SetSpec {
    pub fn build(&self, sys: &System) -> Result<MeasurableSet, CliError> {
        match self {
            SetSpec::Cylinder { constraints } => {
                let c: Vec<(Vec<i64>, u32)> = constraints.iter().map(|c| (c.coord.clone(), c.symbol)).collect();
                sys.cylinder(&c).map_err(config_err)
            }
            SetSpec::Arcs { arcs } => {
                let a = arcs.iter().map(|[a, c]| Ok((rational(a)?, rational(c)?))).collect::<Result<Vec<_>, CliError>>()?;
                sys.arcs(&a).map_err(config_err)
            }
        }
    }
}

impl PartitionSpec {
    pub fn build(&self, sys: &System) -> Result<Partition, CliError> {
        match self {
            PartitionSpec::TimeZero => sys.time_zero_partition().map_err(config_err),
            PartitionSpec::Arcs { cuts } => sys.arc_partition(&rationals(cuts)?).map_err(config_err),
            PartitionSpec::UniformArcs { pieces } => sys.uniform_arc_partition(*pieces).map_err(config_err),
            PartitionSpec::Binary { set } => Partition::binary(sys, &set.build(sys)?).map_err(config_err),
            PartitionSpec::Cells { cells } => {
                let cells = cells
                    .iter()
                    .enumerate()
                    .map(|(i, s)| Ok(Cell { label: Label::single(i as u32), set: s.build(sys)? }))
                    .collect::<Result<Vec<_>, CliError>>()?;
                Partition::new(sys, cells).map_err(config_err)
            }
        }
    }

    pub fn label(&self) -> String {
        match self {
            PartitionSpec::TimeZero => "time-zero".into(),
            PartitionSpec::Arcs { cuts } => format!("arcs({})", cuts.join(",")),
            PartitionSpec::UniformArcs { pieces } => format!("uniform-arcs({pieces})"),
            PartitionSpec::Binary { .. } => "binary".into(),
            PartitionSpec::Cells { cells } => format!("cells({})", cells.len()),
        }
    }
}

impl StripSpec {
    pub fn q(&self) -> usize {
        self.slopes.len() + 1
    }

    pub fn build(&self) -> Result<Strip, CliError> {
        let d = Direction::new(rationals(&self.slopes)?).map_err(config_err)?;
        Strip::new(d, rationals(&self.widths)?).map_err(config_err)
    }
}

impl SequenceSpecConfig {
    pub fn explicit_points(&self) -> Option<Vec<LatticePoint>> {
        match self {
            SequenceSpecConfig::Explicit { points } => Some(points.iter().cloned().map(LatticePoint::new).collect()),
            _ => None,
        }
    }
}

fn check_q(what: &str, expected: usize, found: usize) -> Result<(), CliError> {
    if expected != found {
        return Err(CliError::Config(format!("{what} has dimension {found}, the system has q = {expected}")));
    }
    Ok(())
}

impl ExperimentConfig {
    fn need_system(&self) -> Result<&SystemSpec, CliError> {
        self.system.as_ref().ok_or_else(|| CliError::Config(format!("task {} needs a system", self.task.name())))
    }

    /// Parses every rational and checks that dimensions agree.
    pub fn validate(&self) -> Result<(), CliError> {
        if self.experiment.is_empty() {
            return Err(CliError::Config("experiment name is empty".into()));
        }
        if let Some(sys) = &self.system {
            sys.build()?;
        }
        match &self.task {
            TaskSpec::Entropy { partition, runs } => {
                let sys = self.need_system()?.build()?;
                partition.build(&sys)?;
                if runs.is_empty() {
                    return Err(CliError::Config("entropy task needs at least one run".into()));
                }
                for run in runs {
                    if let Some(s) = &run.strip {
                        check_q("strip", sys.q(), s.q())?;
                        s.build()?;
                    }
                    match &run.sequence {
                        SequenceSpecConfig::Explicit { points } => {
                            for p in points {
                                check_q("point", sys.q(), p.len())?;
                            }
                        }
                        SequenceSpecConfig::Monotone { .. } | SequenceSpecConfig::Greedy { .. } => {
                            if run.strip.is_none() {
                                return Err(CliError::Config(format!("run {} needs a strip", run.label)));
                            }
                        }
                    }
                }
            }
            TaskSpec::Kronecker { sets, strips, epsilons, schedule, .. } => {
                let sys = self.need_system()?.build()?;
                for s in sets {
                    s.set.build(&sys)?;
                }
                for s in strips {
                    check_q("strip", sys.q(), s.q())?;
                    s.build()?;
                }
                if sets.is_empty() || epsilons.is_empty() {
                    return Err(CliError::Config("kronecker task needs sets and epsilons".into()));
                }
                check_schedule(schedule)?;
            }
            TaskSpec::BIndependence { sets, slopes, width_pairs, schedule, .. } => {
                let sys = self.need_system()?.build()?;
                for s in sets {
                    s.set.build(&sys)?;
                }
                check_q("direction", sys.q(), slopes.len() + 1)?;
                rationals(slopes)?;
                for [a, b] in width_pairs {
                    rational(a)?;
                    rational(b)?;
                }
                check_schedule(schedule)?;
            }
            TaskSpec::DecomposeGrid { v, w, width, radius } => {
                rational(v)?;
                rational(w)?;
                rational(width)?;
                if *radius < 0 {
                    return Err(CliError::Config("radius must be nonnegative".into()));
                }
            }
            TaskSpec::Strip { strip, m_lo, m_hi } => {
                strip.build()?;
                if m_lo > m_hi {
                    return Err(CliError::Config("m_lo must not exceed m_hi".into()));
                }
            }
            TaskSpec::ChainRule { .. } => {}
            TaskSpec::Suspension { beta, sets, .. } => {
                let sys = self.need_system()?.build()?;
                check_q("suspension", 2, sys.q())?;
                rational(beta)?;
                for s in sets {
                    if let Some(b) = &s.base {
                        b.build(&sys)?;
                    }
                    rationals(&s.u)?;
                    rationals(&s.v)?;
                }
            }
        }
        Ok(())
    }
}

fn check_schedule(schedule: &ScheduleSpec) -> Result<(), CliError> {
    if schedule.windows().len() < 2 {
        return Err(CliError::Config("schedule needs at least two windows".into()));
    }
    Ok(())
}

impl TaskSpec {
    pub fn name(&self) -> &'static str {
        match self {
            TaskSpec::Entropy { .. } => "entropy",
            TaskSpec::Kronecker { .. } => "kronecker",
            TaskSpec::BIndependence { .. } => "b-independence",
            TaskSpec::DecomposeGrid { .. } => "decompose-grid",
            TaskSpec::Strip { .. } => "strip",
            TaskSpec::ChainRule { .. } => "chain-rule",
            TaskSpec::Suspension { .. } => "suspension",
        }
    }
}
