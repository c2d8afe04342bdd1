//! Built-in experiments. Each entry is an ordinary configuration, so
//! `dirseq list --json` shows exactly what `dirseq run <name>` executes.

use crate::config::ExperimentConfig;
use serde::Serialize;
use serde_json::{json, Value};

#[derive(Debug, Clone, Serialize)]
pub struct Builtin {
    pub name: &'static str,
    pub description: &'static str,
    pub reproduces: &'static str,
    pub config: ExperimentConfig,
}

fn entry(name: &'static str, description: &'static str, reproduces: &'static str, body: Value) -> Builtin {
    let mut body = body;
    body["experiment"] = json!(name);
    body["description"] = json!(description);
    let config = serde_json::from_value(body).unwrap_or_else(|e| panic!("built-in {name} is malformed: {e}"));
    Builtin { name, description, reproduces, config }
}

fn example() -> Value {
    json!({"kind": "example-product"})
}

fn fair_bernoulli() -> Value {
    json!({"kind": "bernoulli-shift", "q": 2, "probs": ["1/2", "1/2"]})
}

fn rotation() -> Value {
    json!({"kind": "rotation-action", "q": 2, "angles": ["13/21", "5/8"]})
}

fn strip(slope: &str, width: &str) -> Value {
    json!({"slopes": [slope], "widths": [width]})
}

fn origin_cylinder() -> Value {
    json!({"label": "x(0,0)=0", "set": {"kind": "cylinder", "constraints": [{"coord": [0, 0], "symbol": 0}]}})
}

fn half_arc() -> Value {
    json!({"label": "[0,1/2)", "set": {"kind": "arcs", "arcs": [["0", "1/2"]]}})
}

fn b_independence(name: &'static str, system: Value, set: Value, slope: &str, schedule: Value) -> Builtin {
    entry(
        name,
        "compactness verdicts at strip widths 1 vs 4 and 1 vs 3",
        "the directional Kronecker algebra does not depend on the strip width",
        json!({
            "system": system,
            "task": {"kind": "b-independence", "sets": [set], "slopes": [slope],
                     "width_pairs": [["1", "4"], ["1", "3"]], "epsilon": 0.1, "schedule": schedule}
        }),
    )
}

pub fn builtins() -> Vec<Builtin> {
    let vertical: Vec<Value> = (1..=32).map(|n| json!([0, n])).collect();
    vec![
        entry(
            "example5-vertical",
            "identity x shift product, time-zero partition, points (0,n) for n = 1..32",
            "vertical sequence entropy of the product system equals log 2",
            json!({
                "system": example(),
                "task": {"kind": "entropy", "partition": {"kind": "time-zero"},
                         "runs": [{"label": "vertical", "sequence": {"kind": "explicit", "points": vertical}}]}
            }),
        ),
        entry(
            "example5-direction-1-0",
            "identity x shift product, monotone sequence of length 64 in the horizontal strip of width 1",
            "the horizontal direction is null for the product system: H_k = log 2, average (log 2)/k",
            json!({
                "system": example(),
                "task": {"kind": "entropy", "partition": {"kind": "time-zero"},
                         "runs": [{"label": "direction-1-0", "strip": strip("0", "1"),
                                   "sequence": {"kind": "monotone", "count": 64, "stride": 1, "start": 1}}]}
            }),
        ),
        entry(
            "one-zero-direction",
            "identity x shift product, greedy sequences in directions (1,1) and (1,-1), monotone in (1,0)",
            "a non-null action has at most one zero-entropy direction",
            json!({
                "system": example(),
                "task": {"kind": "entropy", "partition": {"kind": "time-zero"},
                         "runs": [
                            {"label": "direction-1-1", "strip": strip("1", "1"), "sequence": {"kind": "greedy", "horizon": 32}},
                            {"label": "direction-1-m1", "strip": strip("-1", "1"), "sequence": {"kind": "greedy", "horizon": 32}},
                            {"label": "direction-1-0", "strip": strip("0", "1"),
                             "sequence": {"kind": "monotone", "count": 64, "stride": 1, "start": 1}}]}
            }),
        ),
        entry(
            "bernoulli-greedy",
            "Bernoulli(1/2,1/2) Z^2 shift, time-zero partition, greedy sequence of length 20 in strip (1,1)",
            "the greedy construction attains H(alpha) when the directional Kronecker algebra is trivial",
            json!({
                "system": fair_bernoulli(),
                "task": {"kind": "entropy", "partition": {"kind": "time-zero"},
                         "runs": [{"label": "direction-1-1", "strip": strip("1", "1"),
                                   "sequence": {"kind": "greedy", "horizon": 20}}]}
            }),
        ),
        entry(
            "rotation-curves",
            "rotation by (13/21, 5/8), two-arc partition, monotone sequences of length 64 in three directions",
            "sequence entropy of a rotation grows at most like log(2k)",
            json!({
                "system": rotation(),
                "task": {"kind": "entropy", "partition": {"kind": "arcs", "cuts": ["0", "1/2"]},
                         "runs": [
                            {"label": "direction-1-0", "strip": strip("0", "1"), "sequence": {"kind": "monotone", "count": 64}},
                            {"label": "direction-1-1", "strip": strip("1", "1"), "sequence": {"kind": "monotone", "count": 64}},
                            {"label": "direction-1-m1", "strip": strip("-1", "1"), "sequence": {"kind": "monotone", "count": 64}}]}
            }),
        ),
        entry(
            "kronecker-rotation",
            "rotation by (13/21, 5/8): epsilon-net growth in strips and boxes, paired with greedy entropies",
            "directional discrete spectrum is equivalent to directional nullity (rotation side)",
            json!({
                "system": rotation(),
                "task": {"kind": "kronecker",
                         "sets": [half_arc(), {"label": "[1/3,3/4)", "set": {"kind": "arcs", "arcs": [["1/3", "3/4"]]}}],
                         "strips": [strip("0", "1"), strip("1", "1"), strip("-1", "1")],
                         "epsilons": [0.05, 0.1, 0.2],
                         "schedule": {"kind": "linear", "count": 8, "step": 64},
                         "box_radii": [2, 4, 6, 8, 10, 12, 14, 16],
                         "nullity": {"horizon": 256}}
            }),
        ),
        entry(
            "kronecker-bernoulli",
            "Bernoulli(1/2,1/2): epsilon-net growth of a time-zero cylinder, paired with greedy entropies",
            "directional discrete spectrum is equivalent to directional nullity (Bernoulli side)",
            json!({
                "system": fair_bernoulli(),
                "task": {"kind": "kronecker", "sets": [origin_cylinder()],
                         "strips": [strip("1", "1"), strip("0", "1")],
                         "epsilons": [0.5],
                         "schedule": {"kind": "linear", "count": 8, "step": 16},
                         "box_radii": [1, 2, 3, 4],
                         "nullity": {"horizon": 32}}
            }),
        ),
        b_independence(
            "b-independence-rotation",
            rotation(),
            half_arc(),
            "1",
            json!({"kind": "linear", "count": 8, "step": 64}),
        ),
        b_independence(
            "b-independence-bernoulli",
            fair_bernoulli(),
            origin_cylinder(),
            "1",
            json!({"kind": "linear", "count": 8, "step": 16}),
        ),
        b_independence(
            "b-independence-example",
            example(),
            json!({"label": "x0=0", "set": {"kind": "cylinder", "constraints": [{"coord": [0], "symbol": 0}]}}),
            "0",
            json!({"kind": "linear", "count": 8, "step": 16}),
        ),
        entry(
            "decompose-grid",
            "decomposes every point of [-50,50]^2 into strips (1,0) and (1,1) of width 9",
            "Z^2 is the sum of two strips in distinct directions",
            json!({"task": {"kind": "decompose-grid", "v": "0", "w": "1", "width": "9", "radius": 50}}),
        ),
        entry(
            "chain-rule",
            "200 random (system, alpha, eta) triples over shifts, the product system and a rotation",
            "H(alpha v eta) = H(eta) + H(alpha|eta) and 0 <= H(alpha|eta) <= H(alpha) <= log #cells",
            json!({"task": {"kind": "chain-rule", "triples": 200}, "seed": 20241015u64}),
        ),
        entry(
            "suspension-check",
            "skew maps over the rotation: cocycle identity for 50 random beta and measure preservation",
            "the suspension turns a direction into a single measure-preserving map",
            json!({
                "system": rotation(),
                "seed": 2024,
                "task": {"kind": "suspension", "beta": "3/7", "samples": 10000,
                         "sets": [
                            {"label": "[0,1/2)x[0,1/2)x[0,1)", "base": {"kind": "arcs", "arcs": [["0", "1/2"]]},
                             "u": ["0", "1/2"], "v": ["0", "1"]},
                            {"label": "[1/3,1)x[1/4,3/4)x[1/2,1)", "base": {"kind": "arcs", "arcs": [["1/3", "1"]]},
                             "u": ["1/4", "3/4"], "v": ["1/2", "1"]},
                            {"label": "Xx[0,1)x[0,1/3)", "u": ["0", "1"], "v": ["0", "1/3"]}]}
            }),
        ),
        entry(
            "suspension-check-example",
            "skew maps over the identity x shift product: cocycle identity and measure preservation",
            "the suspension turns a direction into a single measure-preserving map",
            json!({
                "system": example(),
                "seed": 2024,
                "task": {"kind": "suspension", "beta": "3/7", "samples": 10000,
                         "sets": [
                            {"label": "[x0=0]x[0,1/2)x[0,1)",
                             "base": {"kind": "cylinder", "constraints": [{"coord": [0], "symbol": 0}]},
                             "u": ["0", "1/2"], "v": ["0", "1"]},
                            {"label": "[x1=1]x[0,1)x[1/4,1)",
                             "base": {"kind": "cylinder", "constraints": [{"coord": [1], "symbol": 1}]},
                             "u": ["0", "1"], "v": ["1/4", "1"]}]}
            }),
        ),
    ]
}

pub fn find(name: &str) -> Option<Builtin> {
    builtins().into_iter().find(|b| b.name == name)
}
