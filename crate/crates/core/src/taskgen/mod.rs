//! Seeded generation of paired tasks: one plan rendered as a program and as a
//! narrative, with ground truth taken from executing the program.

mod exchange;
mod names;
mod ranking;
mod recurring;
mod variants;

use std::fmt;
use std::str::FromStr;

use rand::seq::IndexedRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::algolib::{self, oracle_run, OracleInput, OracleOutput, Style};
use crate::dsl::{execute_final, render_source, Program, Statement, VarId, DEFAULT_STEP_LIMIT};

pub use exchange::{critical_plan, parallel_plan, straight_line_plan, Agent, Event, EventPlan, Goods, VALUE_CAP};
pub use names::{ordinal, Pronoun, GOODS, PEOPLE};
pub use ranking::{ranking_plan, sorting_input, Order, RankedObject, RankingPlan, MAX_ELEMENT};
pub use recurring::{nested_plan, Level, RecurringPlan};
pub use variants::approximate_program;

pub const BATCH_SCHEMA_VERSION: u32 = 1;

#[derive(Debug, Clone, Error, PartialEq, Eq)]
pub enum TaskGenError {
    #[error("infeasible parameters: {0}")]
    InfeasibleParams(String),
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum TaskFamily {
    StraightLine,
    CriticalPath,
    ParallelPaths,
    NestedLoops,
    Sorting,
    ApproximateLoops,
    FaultTolerant,
}

impl TaskFamily {
    pub const ALL: [TaskFamily; 7] = [
        TaskFamily::StraightLine,
        TaskFamily::CriticalPath,
        TaskFamily::ParallelPaths,
        TaskFamily::NestedLoops,
        TaskFamily::Sorting,
        TaskFamily::ApproximateLoops,
        TaskFamily::FaultTolerant,
    ];

    /// Directory and CLI name, e.g. `straight-line`.
    pub fn slug(self) -> &'static str {
        match self {
            TaskFamily::StraightLine => "straight-line",
            TaskFamily::CriticalPath => "critical-path",
            TaskFamily::ParallelPaths => "parallel-paths",
            TaskFamily::NestedLoops => "nested-loops",
            TaskFamily::Sorting => "sorting",
            TaskFamily::ApproximateLoops => "approximate-loops",
            TaskFamily::FaultTolerant => "fault-tolerant",
        }
    }

    /// Name of the naturalistic twin, if the family has one.
    pub fn naturalistic_name(self) -> Option<&'static str> {
        match self {
            TaskFamily::StraightLine => Some("good exchange"),
            TaskFamily::CriticalPath => Some("critical good exchange"),
            TaskFamily::ParallelPaths => Some("clique good exchange"),
            TaskFamily::NestedLoops => Some("recurring calculation"),
            TaskFamily::Sorting => Some("ranking objects"),
            TaskFamily::ApproximateLoops | TaskFamily::FaultTolerant => None,
        }
    }

    pub fn is_paired(self) -> bool {
        self.naturalistic_name().is_some()
    }

    /// Parameter varied along the x-axis of this family's results.
    pub fn control_variable(self) -> &'static str {
        match self {
            TaskFamily::StraightLine | TaskFamily::ParallelPaths => "n_ops",
            TaskFamily::CriticalPath => "len_critical_path",
            TaskFamily::NestedLoops => "depth",
            TaskFamily::Sorting => "vector_len",
            TaskFamily::ApproximateLoops => "n_loops",
            TaskFamily::FaultTolerant => "n_variants",
        }
    }
}

impl fmt::Display for TaskFamily {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.slug())
    }
}

impl FromStr for TaskFamily {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        TaskFamily::ALL
            .into_iter()
            .find(|f| f.slug() == s || f.slug().replace('-', "_") == s)
            .ok_or_else(|| format!("unknown family `{s}`"))
    }
}

/// Instruction classes a straight-line program may draw from.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum OpClass {
    /// `+=` and `-=`
    AddSub,
    /// `=` between variables
    Mov,
    /// `&=` and `|=` over {0, 1}; synthetic only
    Logic,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Rendering {
    Synthetic,
    Naturalistic,
}

impl Rendering {
    pub const BOTH: [Rendering; 2] = [Rendering::Synthetic, Rendering::Naturalistic];
}

impl fmt::Display for Rendering {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Rendering::Synthetic => "synthetic",
            Rendering::Naturalistic => "naturalistic",
        })
    }
}

impl FromStr for Rendering {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "synthetic" => Ok(Rendering::Synthetic),
            "naturalistic" => Ok(Rendering::Naturalistic),
            _ => Err(format!("unknown rendering `{s}`")),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum AnswerKind {
    Int,
    Tuple,
    Sequence,
    Name,
}

#[derive(Clone, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(tag = "kind", content = "value", rename_all = "snake_case")]
pub enum Answer {
    Int(i64),
    Tuple(Vec<i64>),
    Sequence(Vec<i64>),
    Name(String),
}

impl Answer {
    pub fn kind(&self) -> AnswerKind {
        match self {
            Answer::Int(_) => AnswerKind::Int,
            Answer::Tuple(_) => AnswerKind::Tuple,
            Answer::Sequence(_) => AnswerKind::Sequence,
            Answer::Name(_) => AnswerKind::Name,
        }
    }

    /// Elements compared by similarity metrics; a single integer is a
    /// one-element sequence.
    pub fn elements(&self) -> Option<Vec<i64>> {
        match self {
            Answer::Int(n) => Some(vec![*n]),
            Answer::Tuple(v) | Answer::Sequence(v) => Some(v.clone()),
            Answer::Name(_) => None,
        }
    }
}

impl fmt::Display for Answer {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Answer::Int(n) => write!(f, "{n}"),
            Answer::Tuple(v) | Answer::Sequence(v) => f.write_str(&algolib::format_list(v)),
            Answer::Name(s) => f.write_str(s),
        }
    }
}

fn d_n_ops() -> usize {
    10
}
fn d_n_vars() -> usize {
    3
}
fn d_path_len() -> usize {
    5
}
fn d_n_paths() -> usize {
    3
}
fn d_depth() -> usize {
    1
}
fn d_vector_len() -> usize {
    10
}
fn d_n_variants() -> usize {
    2
}
fn d_op_subset() -> Vec<OpClass> {
    vec![OpClass::AddSub, OpClass::Mov]
}

/// Generation parameters. Only the fields relevant to `family` are read:
///
/// | family | fields |
/// |---|---|
/// | straight-line | `n_ops`, `n_vars`, `op_subset` |
/// | critical-path | `n_ops`, `n_vars`, `path_len`, `op_subset` |
/// | parallel-paths | `n_ops`, `n_vars`, `n_paths`, `op_subset` |
/// | nested-loops | `depth`, `n_ops` (per level), `distractors` |
/// | sorting | `vector_len`, `algorithm`, `style` |
/// | approximate-loops | `n_paths` (loops), `n_ops` (per loop) |
/// | fault-tolerant | `n_variants`, `n_ops`, `n_vars` |
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct GenParams {
    pub family: TaskFamily,
    #[serde(default = "d_n_ops")]
    pub n_ops: usize,
    #[serde(default = "d_n_vars")]
    pub n_vars: usize,
    #[serde(default = "d_path_len")]
    pub path_len: usize,
    #[serde(default = "d_n_paths")]
    pub n_paths: usize,
    #[serde(default = "d_depth")]
    pub depth: usize,
    #[serde(default = "d_vector_len")]
    pub vector_len: usize,
    #[serde(default = "d_n_variants")]
    pub n_variants: usize,
    #[serde(default = "d_op_subset")]
    pub op_subset: Vec<OpClass>,
    /// Noise sentences in recurring calculations.
    #[serde(default)]
    pub distractors: usize,
    /// Sorting routine shown in the synthetic task; drawn per instance when unset.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub algorithm: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub style: Option<Style>,
    #[serde(default)]
    pub seed: u64,
}

impl GenParams {
    pub fn new(family: TaskFamily) -> Self {
        Self {
            family,
            n_ops: d_n_ops(),
            n_vars: d_n_vars(),
            path_len: d_path_len(),
            n_paths: d_n_paths(),
            depth: d_depth(),
            vector_len: d_vector_len(),
            n_variants: d_n_variants(),
            op_subset: d_op_subset(),
            distractors: 0,
            algorithm: None,
            style: None,
            seed: 0,
        }
    }

    pub fn with_seed(mut self, seed: u64) -> Self {
        self.seed = seed;
        self
    }

    /// Value of the family's control variable.
    pub fn control_value(&self) -> usize {
        match self.family {
            TaskFamily::StraightLine | TaskFamily::ParallelPaths => self.n_ops,
            TaskFamily::CriticalPath => self.path_len,
            TaskFamily::NestedLoops => self.depth,
            TaskFamily::Sorting => self.vector_len,
            TaskFamily::ApproximateLoops => self.n_paths,
            TaskFamily::FaultTolerant => self.n_variants,
        }
    }

    /// Sets the family's control variable.
    pub fn set_control_value(&mut self, x: usize) {
        match self.family {
            TaskFamily::StraightLine | TaskFamily::ParallelPaths => self.n_ops = x,
            TaskFamily::CriticalPath => self.path_len = x,
            TaskFamily::NestedLoops => self.depth = x,
            TaskFamily::Sorting => self.vector_len = x,
            TaskFamily::ApproximateLoops => self.n_paths = x,
            TaskFamily::FaultTolerant => self.n_variants = x,
        }
    }

    /// File-name stem listing the relevant parameters, e.g. `n_ops-40_n_vars-3`.
    pub fn stem(&self) -> String {
        let mut parts = match self.family {
            TaskFamily::StraightLine => vec![format!("n_ops-{}", self.n_ops), format!("n_vars-{}", self.n_vars)],
            TaskFamily::CriticalPath => vec![
                format!("n_ops-{}", self.n_ops),
                format!("n_vars-{}", self.n_vars),
                format!("len_critical_path-{}", self.path_len),
            ],
            TaskFamily::ParallelPaths => vec![
                format!("n_ops-{}", self.n_ops),
                format!("n_vars-{}", self.n_vars),
                format!("n_paths-{}", self.n_paths),
            ],
            TaskFamily::NestedLoops => vec![format!("depth-{}", self.depth), format!("n_ops-{}", self.n_ops)],
            TaskFamily::Sorting => vec![format!("vector_len-{}", self.vector_len)],
            TaskFamily::ApproximateLoops => vec![format!("n_loops-{}", self.n_paths), format!("n_ops-{}", self.n_ops)],
            TaskFamily::FaultTolerant => vec![
                format!("n_ops-{}", self.n_ops),
                format!("n_vars-{}", self.n_vars),
                format!("n_variants-{}", self.n_variants),
            ],
        };
        let uses_ops = matches!(
            self.family,
            TaskFamily::StraightLine | TaskFamily::CriticalPath | TaskFamily::ParallelPaths
        );
        if uses_ops && self.op_subset != d_op_subset() {
            let names: Vec<&str> = self
                .op_subset
                .iter()
                .map(|o| match o {
                    OpClass::AddSub => "add_sub",
                    OpClass::Mov => "mov",
                    OpClass::Logic => "logic",
                })
                .collect();
            parts.push(format!("ops-{}", names.join("+")));
        }
        if self.family == TaskFamily::NestedLoops && self.distractors > 0 {
            parts.push(format!("distractors-{}", self.distractors));
        }
        if self.family == TaskFamily::Sorting {
            if let Some(a) = &self.algorithm {
                parts.push(format!("algorithm-{a}"));
            }
            if let Some(s) = self.style {
                parts.push(format!("style-{s}"));
            }
        }
        parts.join("_")
    }
}

/// Name of a batch file: `<stem>_n_instances-<n>_batch-<b>.json`.
pub fn batch_file_name(params: &GenParams, n_instances: usize, batch: usize) -> String {
    format!("{}_n_instances-{n_instances}_batch-{batch}.json", params.stem())
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Plan {
    Exchange(EventPlan),
    Recurring(RecurringPlan),
    Ranking(RankingPlan),
}

impl Plan {
    pub fn narrative(&self) -> String {
        match self {
            Plan::Exchange(p) => p.narrative(),
            Plan::Recurring(p) => p.narrative(),
            Plan::Ranking(p) => p.narrative(),
        }
    }

    pub fn question(&self) -> String {
        match self {
            Plan::Exchange(p) => p.question(),
            Plan::Recurring(p) => p.question(),
            Plan::Ranking(p) => p.question(),
        }
    }

    /// Answer computed from the plan alone, without the interpreter.
    pub fn evaluate(&self) -> Answer {
        match self {
            Plan::Exchange(p) => match p.target_values().as_slice() {
                [x] => Answer::Int(*x),
                xs => Answer::Tuple(xs.to_vec()),
            },
            Plan::Recurring(p) => Answer::Int(p.evaluate()),
            Plan::Ranking(p) => Answer::Name(p.evaluate()),
        }
    }
}

/// Narrative followed by its question.
pub fn render_naturalistic(plan: &Plan) -> String {
    format!("{} {}", plan.narrative(), plan.question())
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct AlgorithmRef {
    pub name: String,
    pub style: Style,
}

impl AlgorithmRef {
    pub fn entry(&self) -> Option<&'static algolib::AlgorithmEntry> {
        algolib::entry(&self.name, self.style)
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct PairedInstance {
    pub id: String,
    pub family: TaskFamily,
    pub params: GenParams,
    pub seed: u64,
    /// The program behind the synthetic rendering; absent for sorting, whose
    /// code comes from the algorithm corpus.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub program: Option<Program>,
    /// Equivalent programs of a fault-tolerant task, the first being `program`.
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub variants: Vec<Program>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub targets: Vec<VarId>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub algorithm: Option<AlgorithmRef>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub sort_input: Option<Vec<i64>>,
    pub synthetic_source: String,
    pub synthetic_question: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub plan: Option<Plan>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub naturalistic_text: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub naturalistic_question: Option<String>,
    pub ground_truth: Answer,
    /// Set when the naturalistic answer differs in type from the synthetic
    /// one (ranking objects answers with a name).
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub naturalistic_truth: Option<Answer>,
}

impl PairedInstance {
    pub fn has(&self, rendering: Rendering) -> bool {
        match rendering {
            Rendering::Synthetic => true,
            Rendering::Naturalistic => self.naturalistic_text.is_some(),
        }
    }

    pub fn truth(&self, rendering: Rendering) -> Option<&Answer> {
        match rendering {
            Rendering::Synthetic => Some(&self.ground_truth),
            Rendering::Naturalistic if self.has(rendering) => {
                Some(self.naturalistic_truth.as_ref().unwrap_or(&self.ground_truth))
            }
            Rendering::Naturalistic => None,
        }
    }

    pub fn question(&self, rendering: Rendering) -> Option<&str> {
        match rendering {
            Rendering::Synthetic => Some(&self.synthetic_question),
            Rendering::Naturalistic => self.naturalistic_question.as_deref(),
        }
    }

    /// Ground truth recomputed from `program` (or the sorting oracle) for
    /// the synthetic rendering.
    pub fn recompute_synthetic(&self) -> Option<Answer> {
        if let (Some(a), Some(input)) = (&self.algorithm, &self.sort_input) {
            return match oracle_run(a.entry()?, &OracleInput::Vector(input.clone())).ok()? {
                OracleOutput::Vector(v) => Some(Answer::Sequence(v)),
                _ => None,
            };
        }
        let env = execute_final(self.program.as_ref()?, DEFAULT_STEP_LIMIT).ok()?;
        let values: Option<Vec<i64>> = self.targets.iter().map(|&t| env.get(t)).collect();
        Some(project(self.family, values?))
    }
}

fn project(family: TaskFamily, values: Vec<i64>) -> Answer {
    match (family, values.as_slice()) {
        (TaskFamily::ParallelPaths | TaskFamily::ApproximateLoops, _) => Answer::Tuple(values),
        (_, [x]) => Answer::Int(*x),
        _ => Answer::Tuple(values),
    }
}

fn value_question(targets: &[VarId]) -> String {
    match targets {
        [t] => format!("What is the value of {t} at the end?"),
        ts => {
            let names: Vec<String> = ts.iter().map(|t| t.to_string()).collect();
            let refs: Vec<&str> = names.iter().map(String::as_str).collect();
            format!(
                "What are the values of {} at the end? Reply with a list in that order.",
                names::join_names(&refs)
            )
        }
    }
}

/// splitmix64 finaliser.
fn mix(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9e37_79b9_7f4a_7c15);
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^ (z >> 31)
}

/// Deterministic child seed for a position (e.g. grid point, repeat, index).
pub fn derive_seed(base: u64, path: &[u64]) -> u64 {
    path.iter().fold(mix(base), |acc, &p| mix(acc ^ mix(p)))
}

fn instance_from_program(
    params: &GenParams,
    program: Program,
    targets: Vec<VarId>,
    plan: Option<Plan>,
) -> Result<PairedInstance, TaskGenError> {
    let env = execute_final(&program, DEFAULT_STEP_LIMIT)
        .map_err(|e| TaskGenError::InfeasibleParams(format!("generated program failed: {e}")))?;
    let values: Vec<i64> = targets.iter().map(|&t| env.get(t).unwrap_or_default()).collect();
    Ok(PairedInstance {
        id: instance_id(params),
        family: params.family,
        params: params.clone(),
        seed: params.seed,
        synthetic_source: render_source(&program),
        synthetic_question: value_question(&targets),
        naturalistic_text: plan.as_ref().map(Plan::narrative),
        naturalistic_question: plan.as_ref().map(Plan::question),
        ground_truth: project(params.family, values),
        naturalistic_truth: None,
        program: Some(program),
        variants: Vec::new(),
        targets,
        algorithm: None,
        sort_input: None,
        plan,
    })
}

fn instance_id(params: &GenParams) -> String {
    format!("{}_{}_seed-{:016x}", params.family.slug(), params.stem(), params.seed)
}

fn exchange_instance(params: &GenParams, plan: EventPlan) -> Result<PairedInstance, TaskGenError> {
    plan.validate()?;
    let program = plan.compile();
    let targets = plan.targets.iter().map(|&t| VarId(t as u32)).collect();
    instance_from_program(params, program, targets, Some(Plan::Exchange(plan)))
}

/// Logic-only straight-line program over {0, 1}; there is no naturalistic twin.
fn logic_program(rng: &mut ChaCha8Rng, n_ops: usize, n_vars: usize, ops: &[OpClass]) -> Result<Program, TaskGenError> {
    if ops.contains(&OpClass::AddSub) {
        return Err(TaskGenError::InfeasibleParams("logic and add/sub instructions cannot be mixed".into()));
    }
    if n_vars < 2 {
        return Err(TaskGenError::InfeasibleParams("logic programs need at least two variables".into()));
    }
    let with_mov = ops.contains(&OpClass::Mov);
    let mut values: Vec<i64> = (0..n_vars).map(|_| rng.random_range(0..=1)).collect();
    let mut stmts: Vec<Statement> = values
        .iter()
        .enumerate()
        .map(|(i, &value)| Statement::Init { var: VarId(i as u32), value })
        .collect();
    let mut prev_noop = false;
    while stmts.len() < n_vars + n_ops {
        let dst = rng.random_range(0..n_vars);
        let src = (dst + rng.random_range(1..n_vars)) % n_vars;
        let (d, s) = (VarId(dst as u32), VarId(src as u32));
        let choice = rng.random_range(0..if with_mov { 3 } else { 2 });
        let (stmt, next) = match choice {
            0 => (Statement::AndAssign { dst: d, src: s }, values[dst] & values[src]),
            1 => (Statement::OrAssign { dst: d, src: s }, values[dst] | values[src]),
            _ => (Statement::Assign { dst: d, src: s }, values[src]),
        };
        let noop = next == values[dst];
        // once every value is equal nothing can change, so no-ops are allowed
        let stuck = values.iter().all(|&v| v == values[0]);
        if noop && prev_noop && !stuck {
            continue;
        }
        prev_noop = noop;
        values[dst] = next;
        stmts.push(stmt);
    }
    Ok(Program::straight_line(n_vars as u32, stmts))
}

fn sorting_instance(params: &GenParams, rng: &mut ChaCha8Rng) -> Result<PairedInstance, TaskGenError> {
    let candidates: Vec<&algolib::AlgorithmEntry> = algolib::corpus()
        .iter()
        .filter(|e| params.algorithm.as_deref().is_none_or(|a| a == e.name))
        .filter(|e| params.style.is_none_or(|s| s == e.style))
        .collect();
    let entry = *candidates
        .choose(rng)
        .ok_or_else(|| TaskGenError::InfeasibleParams("no sorting routine matches the request".into()))?;
    let input = sorting_input(rng, params.vector_len);
    let oracle_input = OracleInput::Vector(input.clone());
    let sorted = match oracle_run(entry, &oracle_input) {
        Ok(OracleOutput::Vector(v)) => v,
        other => {
            return Err(TaskGenError::InfeasibleParams(format!(
                "{} {} cannot sort {} element(s): {other:?}",
                entry.style, entry.name, params.vector_len
            )))
        }
    };
    let ranking = ranking_plan(rng, params.vector_len)?;
    let plan = Plan::Ranking(ranking);
    Ok(PairedInstance {
        id: instance_id(params),
        family: params.family,
        params: params.clone(),
        seed: params.seed,
        program: None,
        variants: Vec::new(),
        targets: Vec::new(),
        algorithm: Some(AlgorithmRef { name: entry.name.to_string(), style: entry.style }),
        sort_input: Some(input),
        synthetic_source: entry.source_text.to_string(),
        synthetic_question: format!(
            "What is the output of {}? Reply with a list.",
            entry.call_expression(&oracle_input)
        ),
        naturalistic_text: Some(plan.narrative()),
        naturalistic_question: Some(plan.question()),
        naturalistic_truth: Some(plan.evaluate()),
        ground_truth: Answer::Sequence(sorted),
        plan: Some(plan),
    })
}

/// Joins equivalent programs into one source, each under a numbered header.
pub fn join_variants(variants: &[Program]) -> String {
    variants
        .iter()
        .enumerate()
        .map(|(i, p)| format!("# Program {}\n{}", i + 1, render_source(p)))
        .collect::<Vec<_>>()
        .join("\n\n")
}

/// Generates one instance. Equal parameters (including the seed) give equal
/// instances.
pub fn generate_pair(params: &GenParams) -> Result<PairedInstance, TaskGenError> {
    let mut rng = ChaCha8Rng::seed_from_u64(params.seed);
    let rng = &mut rng;
    let ops = &params.op_subset;
    match params.family {
        TaskFamily::StraightLine if ops.contains(&OpClass::Logic) => {
            let program = logic_program(rng, params.n_ops, params.n_vars, ops)?;
            let target = VarId(rng.random_range(0..params.n_vars) as u32);
            instance_from_program(params, program, vec![target], None)
        }
        TaskFamily::StraightLine => {
            let plan = straight_line_plan(rng, params.n_ops, params.n_vars, ops)?;
            exchange_instance(params, plan)
        }
        TaskFamily::CriticalPath => {
            let plan = critical_plan(rng, params.n_ops, params.n_vars, params.path_len, ops)?;
            exchange_instance(params, plan)
        }
        TaskFamily::ParallelPaths => {
            let plan = parallel_plan(rng, params.n_ops, params.n_vars, params.n_paths, ops)?;
            exchange_instance(params, plan)
        }
        TaskFamily::NestedLoops => {
            let plan = nested_plan(rng, params.depth, params.n_ops, params.distractors)?;
            let program = plan.compile();
            instance_from_program(params, program, vec![VarId(0)], Some(Plan::Recurring(plan)))
        }
        TaskFamily::Sorting => sorting_instance(params, rng),
        TaskFamily::ApproximateLoops => {
            let program = approximate_program(rng, params.n_paths, params.n_ops)?;
            let targets = (0..params.n_paths as u32).map(VarId).collect();
            instance_from_program(params, program, targets, None)
        }
        TaskFamily::FaultTolerant => {
            let plan = straight_line_plan(rng, params.n_ops, params.n_vars, ops)?;
            let program = plan.compile();
            let target = VarId(plan.targets[0] as u32);
            let variants = variants::equivalent_variants(&program, params.n_variants, &[target], rng)?;
            let mut inst = instance_from_program(params, program, vec![target], None)?;
            inst.synthetic_source = join_variants(&variants);
            inst.synthetic_question =
                format!("Run every program and report the value of {target} at the end, which all of them share.");
            inst.variants = variants;
            Ok(inst)
        }
    }
}

/// `k` independent single-level loops with `n` statements each; the answer
/// is the `k`-tuple of their accumulators.
pub fn approximate_instance(k: usize, n: usize, seed: u64) -> Result<PairedInstance, TaskGenError> {
    let mut params = GenParams::new(TaskFamily::ApproximateLoops).with_seed(seed);
    params.n_paths = k;
    params.n_ops = n;
    generate_pair(&params)
}

/// `m` programs with pairwise distinct text and equal values on `targets`.
pub fn equivalent_variants(
    program: &Program,
    m: usize,
    targets: &[VarId],
    seed: u64,
) -> Result<Vec<Program>, TaskGenError> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    variants::equivalent_variants(program, m, targets, &mut rng)
}

/// `n` instances; instance `i` uses seed `derive_seed(seed, [i])`.
pub fn generate_batch(template: &GenParams, n: usize, seed: u64) -> Result<Vec<PairedInstance>, TaskGenError> {
    (0..n)
        .map(|i| generate_pair(&template.clone().with_seed(derive_seed(seed, &[i as u64]))))
        .collect()
}

/// JSON document holding one batch of instances.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct InstanceBatch {
    pub schema_version: u32,
    pub family: TaskFamily,
    pub params: GenParams,
    pub batch: usize,
    pub instances: Vec<PairedInstance>,
}

/// Default control-variable grids.
pub fn default_grid(family: TaskFamily) -> Vec<GenParams> {
    let base = GenParams::new(family);
    let with = |f: &dyn Fn(&mut GenParams)| {
        let mut p = base.clone();
        f(&mut p);
        p
    };
    match family {
        TaskFamily::StraightLine => (1..=5).map(|i| with(&|p| p.n_ops = 10 * i)).collect(),
        TaskFamily::CriticalPath => [20, 30]
            .into_iter()
            .flat_map(|n| {
                [5, 10, 15, 20].into_iter().map(move |l| (n, l))
            })
            .map(|(n, l)| {
                with(&|p| {
                    p.n_ops = n;
                    p.n_vars = 6;
                    p.path_len = l;
                })
            })
            .collect(),
        TaskFamily::ParallelPaths => (1..=5)
            .map(|i| {
                with(&|p| {
                    p.n_ops = 10 * i;
                    p.n_vars = 6;
                    p.n_paths = 3;
                })
            })
            .collect(),
        TaskFamily::NestedLoops => (1..=9)
            .map(|k| {
                with(&|p| {
                    p.depth = k;
                    p.n_ops = 2;
                })
            })
            .collect(),
        TaskFamily::Sorting => [10, 20, 30, 40].into_iter().map(|n| with(&|p| p.vector_len = n)).collect(),
        TaskFamily::ApproximateLoops => (1..=9)
            .map(|k| {
                with(&|p| {
                    p.n_paths = k;
                    p.n_ops = 3;
                })
            })
            .collect(),
        TaskFamily::FaultTolerant => (2..=5).map(|m| with(&|p| p.n_variants = m)).collect(),
    }
}
