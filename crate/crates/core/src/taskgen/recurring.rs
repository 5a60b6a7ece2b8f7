//! Recurring calculations: nested repetitions of score changes, paired with
//! nested `for` loops over a single accumulator.

use rand::seq::SliceRandom;
use rand::Rng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::names::{NOISE, UNITS};
use super::TaskGenError;
use crate::dsl::{LoopBlock, Node, Operand, Program, Statement, VarId, MAX_LOOP_DEPTH};

const MAX_ATTEMPTS: usize = 10_000;

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Level {
    /// Repetitions of this level inside its parent.
    pub count: u32,
    /// Score changes applied once per repetition, before the inner level runs.
    pub deltas: Vec<i64>,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct RecurringPlan {
    /// Outermost level first.
    pub levels: Vec<Level>,
    /// Noise sentences and the sentence index they are inserted before.
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub noise: Vec<(usize, String)>,
}

impl RecurringPlan {
    /// Closed-form total: each delta at level `j` runs once per repetition of
    /// levels `0..=j`.
    pub fn evaluate(&self) -> i64 {
        let mut reps = 1i64;
        let mut total = 0i64;
        for level in &self.levels {
            reps *= level.count as i64;
            total += reps * level.deltas.iter().sum::<i64>();
        }
        total
    }

    pub fn compile(&self) -> Program {
        fn level_nodes(levels: &[Level]) -> Vec<Node> {
            let Some((first, rest)) = levels.split_first() else {
                return Vec::new();
            };
            let mut body: Vec<Node> = first
                .deltas
                .iter()
                .map(|&d| {
                    Node::Stmt(if d >= 0 {
                        Statement::AddAssign { dst: VarId(0), operand: Operand::Lit(d) }
                    } else {
                        Statement::SubAssign { dst: VarId(0), operand: Operand::Lit(-d) }
                    })
                })
                .collect();
            body.extend(level_nodes(rest));
            vec![Node::Loop(LoopBlock { count: first.count, body })]
        }
        let mut body = vec![Node::Stmt(Statement::Init { var: VarId(0), value: 0 })];
        body.extend(level_nodes(&self.levels));
        Program::new(1, body)
    }

    fn plain_sentences(&self) -> Vec<String> {
        let mut out = vec!["A player starts a game with a score of 0.".to_string()];
        for (j, level) in self.levels.iter().enumerate() {
            let (singular, plural) = UNITS[j];
            if j == 0 {
                out.push(format!("The game lasts {} {plural}.", level.count));
            } else {
                let (parent, _) = UNITS[j - 1];
                out.push(format!("Each {parent} has {} {plural}.", level.count));
            }
            if !level.deltas.is_empty() {
                let parts: Vec<String> = level
                    .deltas
                    .iter()
                    .map(|&d| {
                        let n = d.abs();
                        let unit = if n == 1 { "point" } else { "points" };
                        if d >= 0 {
                            format!("wins {n} {unit}")
                        } else {
                            format!("loses {n} {unit}")
                        }
                    })
                    .collect();
                out.push(format!("In each {singular}, the player {}.", parts.join(", then ")));
            }
        }
        out
    }

    pub fn sentences(&self) -> Vec<String> {
        let plain = self.plain_sentences();
        let n = plain.len();
        let mut out = Vec::with_capacity(n + self.noise.len());
        for (i, s) in plain.into_iter().enumerate() {
            out.extend(self.noise.iter().filter(|(at, _)| *at == i).map(|(_, n)| n.clone()));
            out.push(s);
        }
        out.extend(self.noise.iter().filter(|(at, _)| *at >= n).map(|(_, n)| n.clone()));
        out
    }

    pub fn question(&self) -> String {
        "What is the player's score at the end of the game?".to_string()
    }

    pub fn narrative(&self) -> String {
        self.sentences().join(" ")
    }
}

/// `depth` levels, each repeated twice with `n_ops` unit score changes. Plans
/// are resampled until the total lies within `±2^depth`.
pub fn nested_plan(
    rng: &mut ChaCha8Rng,
    depth: usize,
    n_ops: usize,
    distractors: usize,
) -> Result<RecurringPlan, TaskGenError> {
    if depth == 0 || depth > MAX_LOOP_DEPTH {
        return Err(TaskGenError::InfeasibleParams(format!("depth must be in 1..={MAX_LOOP_DEPTH}")));
    }
    if n_ops == 0 {
        return Err(TaskGenError::InfeasibleParams("each level needs at least one operation".into()));
    }
    let bound = 1i64 << depth;
    for _ in 0..MAX_ATTEMPTS {
        let levels: Vec<Level> = (0..depth)
            .map(|_| Level {
                count: 2,
                deltas: (0..n_ops).map(|_| if rng.random_bool(0.5) { 1 } else { -1 }).collect(),
            })
            .collect();
        let mut plan = RecurringPlan { levels, noise: Vec::new() };
        if plan.evaluate().abs() <= bound {
            let n_sentences = plan.plain_sentences().len();
            let mut pool = NOISE.to_vec();
            pool.shuffle(rng);
            plan.noise = (0..distractors)
                .map(|i| (rng.random_range(1..=n_sentences), pool[i % pool.len()].to_string()))
                .collect();
            plan.noise.sort_by_key(|(at, _)| *at);
            return Ok(plan);
        }
    }
    Err(TaskGenError::InfeasibleParams(format!(
        "no nested program within ±{bound} found for depth {depth} and {n_ops} operations per level"
    )))
}
