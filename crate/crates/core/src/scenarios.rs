//! Measurement scenarios, behaviors and their exclusivity graphs.
//!
//! Basic events are the joint outcomes of the maximal contexts, numbered
//! context by context in declaration order, with outcome tuples in
//! lexicographic order (first measurement of the context most significant).
//! For CHSH this gives vertex `4·k + 2a + b` for context `k` in the order
//! `A1B1, A1B2, A2B1, A2B2`.

use std::collections::BTreeSet;
use std::fmt::Write as _;

use fixedbitset::FixedBitSet;
use num_traits::{One, Zero};
use serde_json::{json, Value};

use crate::assignments::{separator_json, validate_assignment, ProbabilityAssignment, Verdict};
use crate::error::{resource_limit, Error, Result};
use crate::graph::Graph;
use crate::lp::{hull_membership, HullVerdict, Separator};
use crate::scalar::ScalarQ2;

/// Cap on the number of deterministic strategies enumerated by
/// [`in_classical`].
pub const DEFAULT_STRATEGY_CAP: usize = 1 << 16;

const MAX_CONTEXT_SIZE: usize = 16;

/// Per-measurement colours; CHSH gets A1 red, A2 yellow, B1 cyan, B2 purple.
const PALETTE: [&str; 8] = ["red", "yellow", "cyan", "purple", "green", "orange", "blue", "magenta"];

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Measurement {
    pub name: String,
    pub outcomes: Vec<String>,
}

impl Measurement {
    pub fn new(name: impl Into<String>, outcomes: &[&str]) -> Self {
        Measurement { name: name.into(), outcomes: outcomes.iter().map(|s| s.to_string()).collect() }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct MeasurementScenario {
    measurements: Vec<Measurement>,
    /// Maximal contexts, each in its declared measurement order.
    maximal: Vec<Vec<usize>>,
    /// All nonempty subsets of maximal contexts, as sorted index lists.
    closure: BTreeSet<Vec<usize>>,
}

impl MeasurementScenario {
    pub fn new(measurements: Vec<Measurement>, contexts: Vec<Vec<usize>>) -> Result<Self> {
        let m = measurements.len();
        if m == 0 {
            return Err(Error::InvalidArgument("scenario has no measurements".into()));
        }
        let mut names = BTreeSet::new();
        for x in &measurements {
            if x.outcomes.is_empty() {
                return Err(Error::InvalidArgument(format!("measurement {} has no outcomes", x.name)));
            }
            if !names.insert(x.name.as_str()) {
                return Err(Error::InvalidArgument(format!("measurement name {} repeated", x.name)));
            }
            if x.outcomes.iter().collect::<BTreeSet<_>>().len() != x.outcomes.len() {
                return Err(Error::InvalidArgument(format!("measurement {} repeats an outcome", x.name)));
            }
        }
        let mut sets: Vec<BTreeSet<usize>> = Vec::new();
        for c in &contexts {
            if c.is_empty() {
                return Err(Error::InvalidArgument("empty context".into()));
            }
            if c.len() > MAX_CONTEXT_SIZE {
                return Err(resource_limit("context size", c.len() as u128, MAX_CONTEXT_SIZE));
            }
            let s: BTreeSet<usize> = c.iter().copied().collect();
            if s.len() != c.len() {
                return Err(Error::InvalidArgument(format!("context {c:?} repeats a measurement")));
            }
            if let Some(&bad) = s.iter().find(|&&i| i >= m) {
                return Err(Error::InvalidArgument(format!("context {c:?} names measurement {bad} of {m}")));
            }
            sets.push(s);
        }
        let mut maximal = Vec::new();
        let mut kept: Vec<&BTreeSet<usize>> = Vec::new();
        for (i, s) in sets.iter().enumerate() {
            let dominated = sets.iter().enumerate().any(|(j, t)| j != i && s.is_subset(t) && (s != t || j < i));
            if !dominated && !kept.contains(&s) {
                kept.push(s);
                maximal.push(contexts[i].clone());
            }
        }
        let mut closure = BTreeSet::new();
        for s in &kept {
            let v: Vec<usize> = s.iter().copied().collect();
            for mask in 1u32..(1 << v.len()) {
                closure.insert((0..v.len()).filter(|b| mask >> b & 1 == 1).map(|b| v[b]).collect::<Vec<_>>());
            }
        }
        if let Some(i) = (0..m).find(|i| !closure.contains(&vec![*i])) {
            return Err(Error::InvalidArgument(format!(
                "measurement {} appears in no context",
                measurements[i].name
            )));
        }
        Ok(MeasurementScenario { measurements, maximal, closure })
    }

    pub fn measurements(&self) -> &[Measurement] {
        &self.measurements
    }

    pub fn maximal_contexts(&self) -> &[Vec<usize>] {
        &self.maximal
    }

    /// Every context (downward closure of the declared ones), sorted.
    pub fn contexts(&self) -> impl Iterator<Item = &Vec<usize>> {
        self.closure.iter()
    }

    pub fn is_context(&self, ms: &[usize]) -> bool {
        let mut v = ms.to_vec();
        v.sort_unstable();
        self.closure.contains(&v)
    }

    pub fn measurement_index(&self, name: &str) -> Option<usize> {
        self.measurements.iter().position(|m| m.name == name)
    }

    fn outcome_counts(&self, ctx: &[usize]) -> Vec<usize> {
        ctx.iter().map(|&m| self.measurements[m].outcomes.len()).collect()
    }

    /// Number of joint outcomes of maximal context `k`.
    pub fn context_size(&self, k: usize) -> usize {
        self.outcome_counts(&self.maximal[k]).iter().product()
    }

    fn offsets(&self) -> Vec<usize> {
        let mut o = vec![0];
        for k in 0..self.maximal.len() {
            o.push(o[k] + self.context_size(k));
        }
        o
    }

    pub fn event_count(&self) -> usize {
        (0..self.maximal.len()).map(|k| self.context_size(k)).sum()
    }

    pub fn basic_events(&self) -> Vec<Event> {
        let mut out = Vec::with_capacity(self.event_count());
        for (k, ctx) in self.maximal.iter().enumerate() {
            let radix = self.outcome_counts(ctx);
            for t in 0..self.context_size(k) {
                out.push(Event { context: ctx.clone(), outcomes: digits(t, &radix) });
            }
        }
        out
    }

    /// Index of a basic event, if `e` is one.
    pub fn event_index(&self, e: &Event) -> Option<usize> {
        let k = self.maximal.iter().position(|c| *c == e.context)?;
        let radix = self.outcome_counts(&e.context);
        if e.outcomes.iter().zip(&radix).any(|(o, r)| o >= r) {
            return None;
        }
        Some(self.offsets()[k] + e.outcomes.iter().zip(&radix).fold(0, |acc, (o, r)| acc * r + o))
    }

    pub fn event_label(&self, e: &Event) -> String {
        let outs = self.join_outcomes(&e.context, &e.outcomes);
        let names: String = e.context.iter().map(|&m| self.measurements[m].name.as_str()).collect();
        format!("{outs}|{names}")
    }

    fn join_outcomes(&self, ctx: &[usize], outcomes: &[usize]) -> String {
        let labels: Vec<&str> =
            ctx.iter().zip(outcomes).map(|(&m, &o)| self.measurements[m].outcomes[o].as_str()).collect();
        if self.single_char_outcomes() {
            labels.concat()
        } else {
            labels.join(",")
        }
    }

    fn single_char_outcomes(&self) -> bool {
        self.measurements.iter().all(|m| m.outcomes.iter().all(|o| o.chars().count() == 1))
    }

    pub fn to_json(&self) -> Value {
        json!({
            "measurements": self.measurements.iter().map(|m| json!({"name": m.name, "outcomes": m.outcomes})).collect::<Vec<_>>(),
            "contexts": self.maximal,
        })
    }

    pub fn from_json(v: &Value) -> Result<Self> {
        let bad = |what: &str| Error::Parse(format!("scenario: {what}"));
        let ms = v.get("measurements").and_then(Value::as_array).ok_or_else(|| bad("missing measurements"))?;
        let mut measurements = Vec::new();
        for m in ms {
            let name = m.get("name").and_then(Value::as_str).ok_or_else(|| bad("measurement without a name"))?;
            let outcomes = m
                .get("outcomes")
                .and_then(Value::as_array)
                .ok_or_else(|| bad("measurement without outcomes"))?
                .iter()
                .map(|o| match o {
                    Value::String(s) => Ok(s.clone()),
                    Value::Number(n) => Ok(n.to_string()),
                    _ => Err(bad("outcome labels must be strings or numbers")),
                })
                .collect::<Result<Vec<_>>>()?;
            measurements.push(Measurement { name: name.to_string(), outcomes });
        }
        let cs = v.get("contexts").and_then(Value::as_array).ok_or_else(|| bad("missing contexts"))?;
        let contexts = cs
            .iter()
            .map(|c| {
                c.as_array()
                    .ok_or_else(|| bad("context must be an array"))?
                    .iter()
                    .map(|i| i.as_u64().map(|i| i as usize).ok_or_else(|| bad("context entries must be indices")))
                    .collect::<Result<Vec<_>>>()
            })
            .collect::<Result<Vec<_>>>()?;
        MeasurementScenario::new(measurements, contexts)
    }
}

fn digits(mut t: usize, radix: &[usize]) -> Vec<usize> {
    let mut d = vec![0; radix.len()];
    for i in (0..radix.len()).rev() {
        d[i] = t % radix[i];
        t /= radix[i];
    }
    d
}

/// Four two-outcome measurements `A1, A2, B1, B2` (indices 0..4) with
/// maximal contexts `A1B1, A1B2, A2B1, A2B2`.
pub fn bell_chsh_scenario() -> MeasurementScenario {
    let ms = ["A1", "A2", "B1", "B2"].iter().map(|n| Measurement::new(*n, &["0", "1"])).collect();
    MeasurementScenario::new(ms, vec![vec![0, 2], vec![0, 3], vec![1, 2], vec![1, 3]]).expect("valid scenario")
}

/// Five two-outcome measurements `C1..C5` with contexts `{C_j, C_{j+1}}`.
pub fn kcbs_scenario() -> MeasurementScenario {
    let ms = (1..=5).map(|j| Measurement::new(format!("C{j}"), &["0", "1"])).collect();
    MeasurementScenario::new(ms, (0..5).map(|j| vec![j, (j + 1) % 5]).collect()).expect("valid scenario")
}

/// Outcomes of the measurements of a context; `outcomes[i]` belongs to
/// `context[i]`.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord)]
pub struct Event {
    pub context: Vec<usize>,
    pub outcomes: Vec<usize>,
}

impl Event {
    pub fn new(s: &MeasurementScenario, context: Vec<usize>, outcomes: Vec<usize>) -> Result<Self> {
        if context.len() != outcomes.len() {
            return Err(Error::InvalidArgument("one outcome per measurement is required".into()));
        }
        if !s.is_context(&context) {
            return Err(Error::InvalidArgument(format!("{context:?} is not a context")));
        }
        for (&m, &o) in context.iter().zip(&outcomes) {
            if o >= s.measurements[m].outcomes.len() {
                return Err(Error::InvalidArgument(format!("outcome {o} invalid for {}", s.measurements[m].name)));
            }
        }
        Ok(Event { context, outcomes })
    }

    /// Parses `"00|A1B1"`-style labels (outcome labels, then measurement
    /// names, each concatenated) for single-character outcome labels, or
    /// `"0,0|A1,B1"` in general.
    pub fn parse(s: &MeasurementScenario, text: &str) -> Result<Self> {
        let (outs, names) =
            text.split_once('|').ok_or_else(|| Error::Parse(format!("event {text:?} lacks '|'")))?;
        let context = split_names(s, names)?;
        let labels: Vec<String> = if outs.contains(',') {
            outs.split(',').map(|x| x.trim().to_string()).collect()
        } else {
            outs.chars().map(|c| c.to_string()).collect()
        };
        if labels.len() != context.len() {
            return Err(Error::Parse(format!("event {text:?}: outcome count mismatch")));
        }
        let outcomes = context
            .iter()
            .zip(&labels)
            .map(|(&m, l)| {
                s.measurements[m]
                    .outcomes
                    .iter()
                    .position(|o| o == l)
                    .ok_or_else(|| Error::Parse(format!("outcome {l:?} unknown for {}", s.measurements[m].name)))
            })
            .collect::<Result<Vec<_>>>()?;
        Event::new(s, context, outcomes)
    }

    fn outcome_of(&self, m: usize) -> Option<usize> {
        self.context.iter().position(|&x| x == m).map(|i| self.outcomes[i])
    }
}

/// Splits `"A1B1"`, `"A1,B1"` or `"0,2"` into measurement indices.
fn split_names(s: &MeasurementScenario, text: &str) -> Result<Vec<usize>> {
    let text = text.trim();
    let parts: Vec<&str> = text.split(',').map(str::trim).collect();
    if parts.iter().all(|p| s.measurement_index(p).is_some()) {
        return Ok(parts.iter().map(|p| s.measurement_index(p).unwrap()).collect());
    }
    if parts.iter().all(|p| p.parse::<usize>().is_ok_and(|i| i < s.measurements.len())) {
        return Ok(parts.iter().map(|p| p.parse().unwrap()).collect());
    }
    // Greedy longest-name match for concatenated names.
    let mut rest = text;
    let mut out = Vec::new();
    while !rest.is_empty() {
        let best = (0..s.measurements.len())
            .filter(|&i| rest.starts_with(s.measurements[i].name.as_str()))
            .max_by_key(|&i| s.measurements[i].name.len())
            .ok_or_else(|| Error::Parse(format!("unknown measurements in {text:?}")))?;
        out.push(best);
        rest = &rest[s.measurements[best].name.len()..];
    }
    Ok(out)
}

/// One distribution per maximal context, entries in basic-event order.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Behavior {
    dists: Vec<Vec<ScalarQ2>>,
}

impl Behavior {
    /// Checks shape only; see [`validate_behavior`] for the probability rules.
    pub fn new(s: &MeasurementScenario, dists: Vec<Vec<ScalarQ2>>) -> Result<Self> {
        if dists.len() != s.maximal.len() {
            return Err(Error::InvalidArgument(format!(
                "{} distributions for {} maximal contexts",
                dists.len(),
                s.maximal.len()
            )));
        }
        for (k, d) in dists.iter().enumerate() {
            if d.len() != s.context_size(k) {
                return Err(Error::InvalidArgument(format!(
                    "context {k} needs {} entries, got {}",
                    s.context_size(k),
                    d.len()
                )));
            }
        }
        Ok(Behavior { dists })
    }

    pub fn from_flat(s: &MeasurementScenario, flat: Vec<ScalarQ2>) -> Result<Self> {
        if flat.len() != s.event_count() {
            return Err(Error::InvalidArgument(format!("{} entries for {} events", flat.len(), s.event_count())));
        }
        let mut it = flat.into_iter();
        let dists = (0..s.maximal.len()).map(|k| it.by_ref().take(s.context_size(k)).collect()).collect();
        Behavior::new(s, dists)
    }

    pub fn uniform(s: &MeasurementScenario) -> Self {
        let dists = (0..s.maximal.len())
            .map(|k| {
                let n = s.context_size(k);
                vec![ScalarQ2::from_ratio(1, n as i64); n]
            })
            .collect();
        Behavior { dists }
    }

    /// The behavior of the global outcome function `strategy[m]`.
    pub fn deterministic(s: &MeasurementScenario, strategy: &[usize]) -> Result<Self> {
        if strategy.len() != s.measurements.len()
            || strategy.iter().zip(&s.measurements).any(|(&o, m)| o >= m.outcomes.len())
        {
            return Err(Error::InvalidArgument("strategy must give a valid outcome per measurement".into()));
        }
        let mut flat = vec![ScalarQ2::zero(); s.event_count()];
        for v in strategy_support(s, strategy).ones() {
            flat[v] = ScalarQ2::one();
        }
        Behavior::from_flat(s, flat)
    }

    pub fn distributions(&self) -> &[Vec<ScalarQ2>] {
        &self.dists
    }

    pub fn flat(&self) -> Vec<ScalarQ2> {
        self.dists.iter().flatten().cloned().collect()
    }

    pub fn probability(&self, s: &MeasurementScenario, e: &Event) -> Option<&ScalarQ2> {
        let v = s.event_index(e)?;
        let offs = s.offsets();
        let k = offs.iter().rposition(|&o| o <= v)?;
        self.dists.get(k)?.get(v - offs[k])
    }

    pub fn to_json(&self, s: &MeasurementScenario) -> Value {
        let contexts: Vec<Value> = s
            .maximal
            .iter()
            .enumerate()
            .map(|(k, ctx)| {
                let radix = s.outcome_counts(ctx);
                let mut probs = serde_json::Map::new();
                for (t, p) in self.dists[k].iter().enumerate() {
                    probs.insert(s.join_outcomes(ctx, &digits(t, &radix)), serde_json::to_value(p).unwrap());
                }
                let key = ctx.iter().map(|i| i.to_string()).collect::<Vec<_>>().join(",");
                json!({"context": key, "probs": probs})
            })
            .collect();
        Value::Array(contexts)
    }

    /// Accepts an array of `{"context": "i,j", "probs": {"ab": scalar}}`
    /// (missing entries are 0; contexts by index or name), the same wrapped
    /// as `{"behavior": [...]}`, or for CHSH `{"chsh8": [8 scalars]}`.
    pub fn from_json(s: &MeasurementScenario, v: &Value) -> Result<Self> {
        if let Some(eight) = v.get("chsh8") {
            if *s != bell_chsh_scenario() {
                return Err(Error::InvalidArgument("chsh8 shorthand needs the CHSH scenario".into()));
            }
            let vals = eight
                .as_array()
                .ok_or_else(|| Error::Parse("chsh8 must be an array".into()))?
                .iter()
                .map(ScalarQ2::from_json)
                .collect::<Result<Vec<_>>>()?;
            return complete_chsh_behavior(&vals);
        }
        let list = match v {
            Value::Array(a) => a,
            Value::Object(m) => m
                .get("behavior")
                .and_then(Value::as_array)
                .ok_or_else(|| Error::Parse("behavior must be an array of contexts".into()))?,
            _ => return Err(Error::Parse("behavior must be an array of contexts".into())),
        };
        let mut dists: Vec<Option<Vec<ScalarQ2>>> = vec![None; s.maximal.len()];
        for item in list {
            let key = item.get("context").ok_or_else(|| Error::Parse("entry without context".into()))?;
            let ctx = match key {
                Value::String(t) => split_names(s, t)?,
                Value::Array(a) => a
                    .iter()
                    .map(|i| i.as_u64().map(|i| i as usize).ok_or_else(|| Error::Parse("bad context index".into())))
                    .collect::<Result<Vec<_>>>()?,
                _ => return Err(Error::Parse("context must be a string or array".into())),
            };
            let k = s
                .maximal
                .iter()
                .position(|c| *c == ctx)
                .ok_or_else(|| Error::InvalidArgument(format!("{ctx:?} is not a maximal context")))?;
            if dists[k].is_some() {
                return Err(Error::InvalidArgument(format!("context {ctx:?} given twice")));
            }
            let radix = s.outcome_counts(&ctx);
            let mut d = vec![ScalarQ2::zero(); s.context_size(k)];
            let probs = item
                .get("probs")
                .and_then(Value::as_object)
                .ok_or_else(|| Error::Parse("entry without probs".into()))?;
            for (label, val) in probs {
                let t = (0..d.len())
                    .find(|&t| s.join_outcomes(&ctx, &digits(t, &radix)) == *label)
                    .ok_or_else(|| Error::Parse(format!("outcome {label:?} unknown in context {ctx:?}")))?;
                d[t] = ScalarQ2::from_json(val)?;
            }
            dists[k] = Some(d);
        }
        let dists = dists
            .into_iter()
            .enumerate()
            .map(|(k, d)| d.ok_or_else(|| Error::InvalidArgument(format!("maximal context {k} missing"))))
            .collect::<Result<Vec<_>>>()?;
        Behavior::new(s, dists)
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum ConstraintKind {
    /// Entries of maximal context `context` sum to 1.
    Normalization { context: usize },
    /// The marginal on `measurements` with `outcomes` agrees between two
    /// maximal contexts containing them.
    NoDisturbance { contexts: (usize, usize), measurements: Vec<usize>, outcomes: Vec<usize> },
}

/// `Σ sign·p_event = rhs`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct LinearConstraint {
    pub kind: ConstraintKind,
    pub terms: Vec<(usize, i8)>,
    pub rhs: ScalarQ2,
}

/// Normalization per maximal context, then no-disturbance for each pair of
/// maximal contexts sharing measurements and each joint outcome of the
/// shared ones.
pub fn behavior_constraints(s: &MeasurementScenario) -> Vec<LinearConstraint> {
    let offs = s.offsets();
    let mut out = Vec::new();
    for k in 0..s.maximal.len() {
        out.push(LinearConstraint {
            kind: ConstraintKind::Normalization { context: k },
            terms: (offs[k]..offs[k + 1]).map(|v| (v, 1)).collect(),
            rhs: ScalarQ2::one(),
        });
    }
    let events = s.basic_events();
    for i in 0..s.maximal.len() {
        for j in i + 1..s.maximal.len() {
            let shared: Vec<usize> = s.maximal[i].iter().copied().filter(|m| s.maximal[j].contains(m)).collect();
            if shared.is_empty() {
                continue;
            }
            let radix = s.outcome_counts(&shared);
            for t in 0..radix.iter().product() {
                let outs = digits(t, &radix);
                let matches = |v: usize| shared.iter().zip(&outs).all(|(&m, &o)| events[v].outcome_of(m) == Some(o));
                let mut terms: Vec<(usize, i8)> = (offs[i]..offs[i + 1]).filter(|&v| matches(v)).map(|v| (v, 1)).collect();
                terms.extend((offs[j]..offs[j + 1]).filter(|&v| matches(v)).map(|v| (v, -1)));
                out.push(LinearConstraint {
                    kind: ConstraintKind::NoDisturbance { contexts: (i, j), measurements: shared.clone(), outcomes: outs },
                    terms,
                    rhs: ScalarQ2::zero(),
                });
            }
        }
    }
    out
}

fn eval(c: &LinearConstraint, p: &[ScalarQ2]) -> ScalarQ2 {
    c.terms.iter().fold(ScalarQ2::zero(), |acc, &(v, sg)| if sg > 0 { acc + p[v].clone() } else { acc - p[v].clone() })
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CheckResult {
    pub kind: ConstraintKind,
    pub holds: bool,
    pub description: String,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ValidationReport {
    pub checks: Vec<CheckResult>,
    /// Basic events with a negative probability.
    pub negative: Vec<usize>,
}

impl ValidationReport {
    pub fn passed(&self) -> bool {
        self.negative.is_empty() && self.checks.iter().all(|c| c.holds)
    }

    pub fn normalization_checks(&self) -> usize {
        self.checks.iter().filter(|c| matches!(c.kind, ConstraintKind::Normalization { .. })).count()
    }

    pub fn no_disturbance_checks(&self) -> usize {
        self.checks.len() - self.normalization_checks()
    }

    pub fn failures(&self) -> Vec<&CheckResult> {
        self.checks.iter().filter(|c| !c.holds).collect()
    }

    pub fn to_json(&self) -> Value {
        json!({
            "passed": self.passed(),
            "normalization_checks": self.normalization_checks(),
            "no_signalling_checks": self.no_disturbance_checks(),
            "negative_entries": self.negative,
            "violations": self.failures().iter().map(|c| c.description.clone()).collect::<Vec<_>>(),
        })
    }
}

pub fn validate_behavior(s: &MeasurementScenario, b: &Behavior) -> Result<ValidationReport> {
    Behavior::new(s, b.dists.clone())?;
    let p = b.flat();
    let name = |m: usize| s.measurements[m].name.as_str();
    let ctx_name = |k: usize| s.maximal[k].iter().map(|&m| name(m)).collect::<String>();
    let checks = behavior_constraints(s)
        .into_iter()
        .map(|c| {
            let lhs = eval(&c, &p);
            let holds = lhs == c.rhs;
            let description = match &c.kind {
                ConstraintKind::Normalization { context } => {
                    format!("sum over context {} = {lhs}, expected 1", ctx_name(*context))
                }
                ConstraintKind::NoDisturbance { contexts: (i, j), measurements, outcomes } => {
                    let marg: Vec<String> = measurements
                        .iter()
                        .zip(outcomes)
                        .map(|(&m, &o)| format!("{}={}", name(m), s.measurements[m].outcomes[o]))
                        .collect();
                    let side = |k: usize| {
                        c.terms
                            .iter()
                            .filter(|(v, _)| s.offsets()[k] <= *v && *v < s.offsets()[k + 1])
                            .fold(ScalarQ2::zero(), |acc, (v, _)| acc + p[*v].clone())
                    };
                    format!(
                        "P({}) is {} in context {} but {} in context {}",
                        marg.join(","),
                        side(*i),
                        ctx_name(*i),
                        side(*j),
                        ctx_name(*j)
                    )
                }
            };
            CheckResult { kind: c.kind, holds, description }
        })
        .collect();
    let negative = (0..p.len()).filter(|&v| p[v].is_negative()).collect();
    Ok(ValidationReport { checks, negative })
}

/// Fills the unknown entries from the linear constraints. Fails unless they
/// are uniquely determined, consistent, and all in `[0, 1]`.
pub fn complete_behavior(s: &MeasurementScenario, known: &[Option<ScalarQ2>]) -> Result<Behavior> {
    let n = s.event_count();
    if known.len() != n {
        return Err(Error::InvalidArgument(format!("{} entries for {n} events", known.len())));
    }
    let labels: Vec<String> = s.basic_events().iter().map(|e| s.event_label(e)).collect();
    for (v, k) in known.iter().enumerate() {
        if let Some(x) = k {
            if x.is_negative() || *x > ScalarQ2::one() {
                return Err(Error::InvalidArgument(format!("P({}) = {x} is outside [0,1]", labels[v])));
            }
        }
    }
    let unknown: Vec<usize> = (0..n).filter(|&v| known[v].is_none()).collect();
    let col = |v: usize| unknown.iter().position(|&u| u == v);
    let cons = behavior_constraints(s);
    let width = unknown.len();
    let mut rows: Vec<Vec<ScalarQ2>> = cons
        .iter()
        .map(|c| {
            let mut r = vec![ScalarQ2::zero(); width + 1];
            r[width] = c.rhs.clone();
            for &(v, sg) in &c.terms {
                let coef = if sg > 0 { ScalarQ2::one() } else { -ScalarQ2::one() };
                match (col(v), &known[v]) {
                    (Some(j), _) => r[j] = r[j].clone() + coef,
                    (None, Some(x)) => r[width] = r[width].clone() - coef * x.clone(),
                    (None, None) => unreachable!(),
                }
            }
            r
        })
        .collect();
    let mut rank = 0;
    let mut pivots = Vec::new();
    for j in 0..width {
        let Some(piv) = (rank..rows.len()).find(|&i| !rows[i][j].is_zero()) else { continue };
        rows.swap(rank, piv);
        let inv = ScalarQ2::one() / rows[rank][j].clone();
        for x in rows[rank].iter_mut() {
            *x = x.clone() * inv.clone();
        }
        for i in 0..rows.len() {
            if i != rank && !rows[i][j].is_zero() {
                let f = rows[i][j].clone();
                for c in 0..=width {
                    let d = f.clone() * rows[rank][c].clone();
                    rows[i][c] = rows[i][c].clone() - d;
                }
            }
        }
        pivots.push(j);
        rank += 1;
    }
    if (rank..rows.len()).any(|i| !rows[i][width].is_zero()) {
        return Err(Error::InfeasibleBehavior("the given entries violate the normalization and no-signalling constraints".into()));
    }
    if rank < width {
        return Err(Error::InvalidArgument(format!(
            "{width} unknown entries but the constraints have rank {rank}; the completion is not unique"
        )));
    }
    let mut flat: Vec<ScalarQ2> = known.iter().map(|k| k.clone().unwrap_or_else(ScalarQ2::zero)).collect();
    for (r, &j) in pivots.iter().enumerate() {
        flat[unknown[j]] = rows[r][width].clone();
    }
    for &v in &unknown {
        if flat[v].is_negative() {
            return Err(Error::InfeasibleBehavior(format!("completed P({}) = {} < 0", labels[v], flat[v])));
        }
        if flat[v] > ScalarQ2::one() {
            return Err(Error::InfeasibleBehavior(format!("completed P({}) = {} > 1", labels[v], flat[v])));
        }
    }
    Behavior::from_flat(s, flat)
}

/// The eight CHSH entries with `a ⊕ b = (x−1)(y−1)` as basic-event indices,
/// two per context in the order `A1B1, A1B2, A2B1, A2B2`.
pub const CHSH_PARAMETER_EVENTS: [usize; 8] = [0, 3, 4, 7, 8, 11, 13, 14];

pub fn complete_chsh_behavior(eight: &[ScalarQ2]) -> Result<Behavior> {
    if eight.len() != 8 {
        return Err(Error::InvalidArgument(format!("expected 8 CHSH parameters, got {}", eight.len())));
    }
    let s = bell_chsh_scenario();
    let mut known = vec![None; 16];
    for (&v, x) in CHSH_PARAMETER_EVENTS.iter().zip(eight) {
        known[v] = Some(x.clone());
    }
    complete_behavior(&s, &known)
}

/// Inverse of [`complete_chsh_behavior`].
pub fn chsh_parameters(b: &Behavior) -> Result<Vec<ScalarQ2>> {
    let flat = b.flat();
    if flat.len() != 16 {
        return Err(Error::InvalidArgument("not a CHSH behavior".into()));
    }
    Ok(CHSH_PARAMETER_EVENTS.iter().map(|&v| flat[v].clone()).collect())
}

/// Why two events are exclusive.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum EdgeWitness {
    /// Both events come from one joint measurement of `context`; they differ
    /// on `differing`.
    SameContext { context: Vec<usize>, differing: Vec<usize> },
    /// Measure `root`; on each branch outcome measure the rest of that
    /// branch's event.
    SequentialTree { root: usize, branches: [TreeBranch; 2] },
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TreeBranch {
    pub root_outcome: usize,
    pub then_measure: Vec<usize>,
    pub event: Event,
}

impl EdgeWitness {
    /// Measurements whose differing outcomes decide the exclusivity.
    pub fn deciding(&self) -> Vec<usize> {
        match self {
            EdgeWitness::SameContext { differing, .. } => differing.clone(),
            EdgeWitness::SequentialTree { root, .. } => vec![*root],
        }
    }

    /// Checks the witness explains the exclusivity of `e1` and `e2`.
    pub fn validate(&self, s: &MeasurementScenario, e1: &Event, e2: &Event) -> bool {
        match self {
            EdgeWitness::SameContext { context, differing } => {
                let set = |c: &[usize]| c.iter().copied().collect::<BTreeSet<_>>();
                s.is_context(context)
                    && set(context) == set(&e1.context)
                    && set(context) == set(&e2.context)
                    && !differing.is_empty()
                    && differing.iter().all(|&m| {
                        matches!((e1.outcome_of(m), e2.outcome_of(m)), (Some(a), Some(b)) if a != b)
                    })
            }
            EdgeWitness::SequentialTree { root, branches } => {
                let [b0, b1] = branches;
                let ok = |b: &TreeBranch| {
                    b.event.outcome_of(*root) == Some(b.root_outcome)
                        && !b.then_measure.contains(root)
                        && {
                            let mut all = b.then_measure.clone();
                            all.push(*root);
                            s.is_context(&all)
                                && all.iter().collect::<BTreeSet<_>>() == b.event.context.iter().collect::<BTreeSet<_>>()
                        }
                };
                b0.root_outcome != b1.root_outcome
                    && ok(b0)
                    && ok(b1)
                    && ((b0.event == *e1 && b1.event == *e2) || (b0.event == *e2 && b1.event == *e1))
            }
        }
    }

    pub fn to_json(&self, s: &MeasurementScenario) -> Value {
        let name = |m: usize| s.measurements[m].name.clone();
        match self {
            EdgeWitness::SameContext { context, differing } => json!({
                "type": "same_context",
                "measure": context.iter().map(|&m| name(m)).collect::<Vec<_>>(),
                "differing": differing.iter().map(|&m| name(m)).collect::<Vec<_>>(),
            }),
            EdgeWitness::SequentialTree { root, branches } => json!({
                "type": "sequential_tree",
                "root": name(*root),
                "branches": branches.iter().map(|b| json!({
                    "outcome": s.measurements[*root].outcomes[b.root_outcome],
                    "then_measure": b.then_measure.iter().map(|&m| name(m)).collect::<Vec<_>>(),
                    "event": s.event_label(&b.event),
                })).collect::<Vec<_>>(),
            }),
        }
    }
}

/// Exclusivity witness for two events, or `None` when no shared
/// measurement separates them.
pub fn edge_witness(s: &MeasurementScenario, e1: &Event, e2: &Event) -> Option<EdgeWitness> {
    let differing: Vec<usize> = e1
        .context
        .iter()
        .copied()
        .filter(|&m| matches!((e1.outcome_of(m), e2.outcome_of(m)), (Some(a), Some(b)) if a != b))
        .collect();
    if differing.is_empty() {
        return None;
    }
    debug_assert!(s.is_context(&e1.context) && s.is_context(&e2.context));
    let set = |c: &[usize]| c.iter().copied().collect::<BTreeSet<_>>();
    if set(&e1.context) == set(&e2.context) {
        return Some(EdgeWitness::SameContext { context: e1.context.clone(), differing });
    }
    let root = differing[0];
    let branch = |e: &Event| TreeBranch {
        root_outcome: e.outcome_of(root).unwrap(),
        then_measure: e.context.iter().copied().filter(|&m| m != root).collect(),
        event: e.clone(),
    };
    Some(EdgeWitness::SequentialTree { root, branches: [branch(e1), branch(e2)] })
}

#[derive(Debug, Clone)]
pub struct ColoredExclusivityGraph {
    pub graph: Graph,
    pub events: Vec<Event>,
    /// `(u, v, witness)` for every edge `u < v`, in edge order.
    pub witnesses: Vec<(usize, usize, EdgeWitness)>,
}

impl ColoredExclusivityGraph {
    pub fn witness(&self, u: usize, v: usize) -> Option<&EdgeWitness> {
        let (a, b) = if u < v { (u, v) } else { (v, u) };
        self.witnesses
            .binary_search_by(|(x, y, _)| (*x, *y).cmp(&(a, b)))
            .ok()
            .map(|i| &self.witnesses[i].2)
    }

    pub fn to_json(&self, s: &MeasurementScenario) -> Value {
        json!({
            "vertices": self.graph.n(),
            "edges": self.graph.edge_count(),
            "events": self.events.iter().map(|e| s.event_label(e)).collect::<Vec<_>>(),
            "witnesses": self.witnesses.iter().map(|(u, v, w)| json!({"edge": [u, v], "witness": w.to_json(s)})).collect::<Vec<_>>(),
        })
    }

    /// DOT with vertices filled by the colours of their measurements and
    /// edges coloured by the deciding measurement(s).
    pub fn to_dot(&self, s: &MeasurementScenario) -> String {
        let color = |m: usize| PALETTE[m % PALETTE.len()];
        let mut out = String::from("graph exclusivity {\n  node [style=wedged];\n");
        for (v, e) in self.events.iter().enumerate() {
            let fill: Vec<&str> = e.context.iter().map(|&m| color(m)).collect();
            writeln!(out, "  {v} [label={:?}, fillcolor={:?}];", s.event_label(e), fill.join(":")).unwrap();
        }
        for (u, v, w) in &self.witnesses {
            let ms = w.deciding();
            let c: Vec<&str> = ms.iter().map(|&m| color(m)).collect();
            let names: Vec<&str> = ms.iter().map(|&m| s.measurements[m].name.as_str()).collect();
            writeln!(out, "  {u} -- {v} [color={:?}, measurement={:?}];", c.join(":"), names.join(",")).unwrap();
        }
        out.push_str("}\n");
        out
    }
}

/// One vertex per basic event; events are adjacent iff a measurement in
/// both contexts has different outcomes.
pub fn exclusivity_graph(s: &MeasurementScenario) -> ColoredExclusivityGraph {
    let events = s.basic_events();
    let n = events.len();
    let mut edges = Vec::new();
    let mut witnesses = Vec::new();
    for u in 0..n {
        for v in u + 1..n {
            if let Some(w) = edge_witness(s, &events[u], &events[v]) {
                edges.push((u, v));
                witnesses.push((u, v, w));
            }
        }
    }
    let labels = events.iter().map(|e| s.event_label(e)).collect();
    let graph = Graph::from_edges(n, edges)
        .and_then(|g| g.with_labels(labels))
        .expect("events index a valid graph");
    ColoredExclusivityGraph { graph, events, witnesses }
}

/// The five KCBS events `(C_j = 1, C_{j+1} = 0)`, `j = 1..5`.
pub fn kcbs_pentagon_events(s: &MeasurementScenario) -> Result<Vec<usize>> {
    (0..5)
        .map(|j| {
            let e = Event::new(s, vec![j, (j + 1) % 5], vec![1, 0])?;
            s.event_index(&e).ok_or_else(|| Error::InvalidArgument("not the KCBS scenario".into()))
        })
        .collect()
}

/// Five CHSH events inducing a pentagon and containing `00|A1B1` and
/// `11|A1B2`: the lexicographically first such set of basic events.
pub fn chsh_pentagon_events(s: &MeasurementScenario) -> Result<Vec<usize>> {
    let g = exclusivity_graph(s).graph;
    let a = s.event_index(&Event::parse(s, "00|A1B1")?).ok_or_else(|| Error::InvalidArgument("not CHSH".into()))?;
    let b = s.event_index(&Event::parse(s, "11|A1B2")?).ok_or_else(|| Error::InvalidArgument("not CHSH".into()))?;
    let n = g.n();
    let c5 = crate::graph::cycle_graph(5)?;
    for mask in 0u32..(1 << n) {
        if mask.count_ones() != 5 || mask >> a & 1 == 0 || mask >> b & 1 == 0 {
            continue;
        }
        let set: Vec<usize> = (0..n).filter(|i| mask >> i & 1 == 1).collect();
        let (sub, _) = crate::graph::induced_subgraph(&g, &set)?;
        if sub.edge_count() == 5 && crate::graph::find_isomorphism(&sub, &c5).is_some() {
            return Ok(set);
        }
    }
    Err(Error::InvalidArgument("no pentagon through the given events".into()))
}

/// `p_v` = probability of basic event `v`; fails if `b` does not pass
/// [`validate_behavior`] or (which should never happen) the edge bounds.
pub fn behavior_to_assignment(s: &MeasurementScenario, b: &Behavior) -> Result<ProbabilityAssignment> {
    let report = validate_behavior(s, b)?;
    if !report.passed() {
        let what: Vec<String> = report.failures().iter().map(|c| c.description.clone()).collect();
        return Err(Error::InfeasibleBehavior(if what.is_empty() {
            format!("negative entries at events {:?}", report.negative)
        } else {
            what.join("; ")
        }));
    }
    validate_assignment(&exclusivity_graph(s).graph, b.flat())
}

/// Basic events consistent with a global outcome function.
fn strategy_support(s: &MeasurementScenario, strategy: &[usize]) -> FixedBitSet {
    let events = s.basic_events();
    let mut set = FixedBitSet::with_capacity(events.len());
    for (v, e) in events.iter().enumerate() {
        if e.context.iter().zip(&e.outcomes).all(|(&m, &o)| strategy[m] == o) {
            set.insert(v);
        }
    }
    set
}

/// All global outcome functions, in lexicographic order.
pub fn deterministic_strategies(s: &MeasurementScenario, cap: usize) -> Result<Vec<Vec<usize>>> {
    let radix: Vec<usize> = s.measurements.iter().map(|m| m.outcomes.len()).collect();
    let mut total: u128 = 1;
    for &r in &radix {
        total = total.saturating_mul(r as u128);
    }
    if total > cap as u128 {
        return Err(resource_limit("deterministic strategies", total, cap));
    }
    Ok((0..total as usize).map(|t| digits(t, &radix)).collect())
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum ClassicalVerdict {
    /// Convex decomposition over deterministic strategies.
    In(Vec<(Vec<usize>, ScalarQ2)>),
    /// A noncontextuality (Bell) inequality violated by the behavior, over
    /// basic events: `Σ c_v p_v ≤ bound` for every local behavior.
    Out(Separator<ScalarQ2>),
}

impl ClassicalVerdict {
    pub fn verdict(&self) -> Verdict {
        match self {
            ClassicalVerdict::In(_) => Verdict::In,
            ClassicalVerdict::Out(_) => Verdict::Out,
        }
    }

    pub fn to_json(&self, s: &MeasurementScenario) -> Value {
        match self {
            ClassicalVerdict::In(terms) => json!({
                "verdict": "IN",
                "decomposition": terms.iter().map(|(st, c)| {
                    let m: serde_json::Map<String, Value> = st
                        .iter()
                        .enumerate()
                        .map(|(i, &o)| (s.measurements[i].name.clone(), json!(s.measurements[i].outcomes[o])))
                        .collect();
                    json!({"strategy": m, "coefficient": c})
                }).collect::<Vec<_>>(),
            }),
            ClassicalVerdict::Out(sep) => {
                let labels: Vec<String> = s.basic_events().iter().map(|e| s.event_label(e)).collect();
                let mut v = json!({"verdict": "OUT", "inequality": separator_json(sep)});
                v["inequality"]["events"] = json!(labels);
                v
            }
        }
    }
}

pub fn in_classical(s: &MeasurementScenario, b: &Behavior) -> Result<ClassicalVerdict> {
    in_classical_capped(s, b, DEFAULT_STRATEGY_CAP)
}

/// Exact membership of `b` in the local (noncontextual) polytope.
pub fn in_classical_capped(s: &MeasurementScenario, b: &Behavior, cap: usize) -> Result<ClassicalVerdict> {
    Behavior::new(s, b.dists.clone())?;
    let strategies = deterministic_strategies(s, cap)?;
    let vertices: Vec<FixedBitSet> = strategies.iter().map(|st| strategy_support(s, st)).collect();
    Ok(match hull_membership(&vertices, &b.flat()) {
        HullVerdict::Inside(terms) => {
            ClassicalVerdict::In(terms.into_iter().map(|(j, c)| (strategies[j].clone(), c)).collect())
        }
        HullVerdict::Outside(sep) => ClassicalVerdict::Out(sep),
    })
}

/// Eq.-(9)-style parameters of the stock CHSH example behavior.
pub fn chsh_example_parameters() -> Vec<ScalarQ2> {
    let q = ScalarQ2::from_ratio;
    let r2 = ScalarQ2::sqrt2();
    vec![
        q(2993, 5500),
        q(22, 125),
        q(107, 700),
        q(37, 700),
        q(7, 11) + r2.clone() * q(1, 9),
        r2 * q(1, 9),
        q(137, 500),
        q(8, 1375),
    ]
}

/// `P(ab|xy) = 1/2` iff `a ⊕ b = (x−1)(y−1)`.
pub fn pr_box() -> Behavior {
    let s = bell_chsh_scenario();
    let h = ScalarQ2::from_ratio(1, 2);
    let z = ScalarQ2::zero();
    let same = vec![h.clone(), z.clone(), z.clone(), h.clone()];
    let diff = vec![z.clone(), h.clone(), h, z];
    Behavior::new(&s, vec![same.clone(), same.clone(), same, diff]).expect("CHSH shape")
}
