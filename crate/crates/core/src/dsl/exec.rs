use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use super::{Node, Operand, Program, Statement, VarId};

pub const DEFAULT_STEP_LIMIT: u64 = 1_000_000;

#[derive(Debug, Clone, Error, PartialEq, Eq)]
pub enum ExecError {
    #[error("step limit {limit} exceeded")]
    StepLimitExceeded { limit: u64 },
    #[error("statement {stmt} reads {var} before it is initialised")]
    UninitialisedRead { var: VarId, stmt: usize },
    #[error("statement {stmt} references undeclared variable {var}")]
    UndeclaredVariable { var: VarId, stmt: usize },
    #[error("integer overflow at statement {stmt}")]
    Overflow { stmt: usize },
}

/// Machine state: one slot per declared variable.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct Env {
    values: Vec<Option<i64>>,
}

impl Env {
    fn new(n_vars: u32) -> Self {
        Self {
            values: vec![None; n_vars as usize],
        }
    }

    pub fn get(&self, var: VarId) -> Option<i64> {
        self.values.get(var.index()).copied().flatten()
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    /// Initialised variables and their values, in index order.
    pub fn iter(&self) -> impl Iterator<Item = (VarId, i64)> + '_ {
        self.values
            .iter()
            .enumerate()
            .filter_map(|(i, v)| v.map(|v| (VarId(i as u32), v)))
    }

    pub fn to_map(&self) -> BTreeMap<String, i64> {
        self.iter().map(|(k, v)| (k.to_string(), v)).collect()
    }

    /// Builds an environment from `(var, value)` pairs; useful for expected values in tests.
    pub fn from_pairs(n_vars: u32, pairs: &[(u32, i64)]) -> Self {
        let mut env = Self::new(n_vars);
        for &(v, x) in pairs {
            env.values[v as usize] = Some(x);
        }
        env
    }
}

impl Serialize for Env {
    fn serialize<S: serde::Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        self.values.serialize(s)
    }
}

impl<'de> Deserialize<'de> for Env {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        Ok(Self {
            values: Vec::deserialize(d)?,
        })
    }
}

/// One executed statement: its source-order index and the state after it ran.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct TraceStep {
    pub stmt: usize,
    pub env: Env,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Execution {
    pub final_env: Env,
    pub trace: Vec<TraceStep>,
}

/// Runs `program` under sequential big-step semantics and records a full trace.
pub fn execute(program: &Program, step_limit: u64) -> Result<Execution, ExecError> {
    let mut m = Machine::new(program, step_limit, true);
    m.run_nodes(&program.body, 0)?;
    Ok(Execution {
        final_env: m.env,
        trace: m.trace,
    })
}

/// Like [`execute`] but skips trace recording.
pub fn execute_final(program: &Program, step_limit: u64) -> Result<Env, ExecError> {
    let mut m = Machine::new(program, step_limit, false);
    m.run_nodes(&program.body, 0)?;
    Ok(m.env)
}

fn leaf_count(nodes: &[Node]) -> usize {
    nodes
        .iter()
        .map(|n| match n {
            Node::Stmt(_) => 1,
            Node::Loop(l) => leaf_count(&l.body),
        })
        .sum()
}

struct Machine {
    env: Env,
    trace: Vec<TraceStep>,
    record: bool,
    steps: u64,
    limit: u64,
}

impl Machine {
    fn new(program: &Program, limit: u64, record: bool) -> Self {
        Self {
            env: Env::new(program.n_vars),
            trace: Vec::new(),
            record,
            steps: 0,
            limit,
        }
    }

    fn run_nodes(&mut self, nodes: &[Node], base: usize) -> Result<(), ExecError> {
        let mut idx = base;
        for node in nodes {
            match node {
                Node::Stmt(s) => {
                    self.step(s, idx)?;
                    idx += 1;
                }
                Node::Loop(l) => {
                    for _ in 0..l.count {
                        self.run_nodes(&l.body, idx)?;
                    }
                    idx += leaf_count(&l.body);
                }
            }
        }
        Ok(())
    }

    fn read(&self, var: VarId, stmt: usize) -> Result<i64, ExecError> {
        match self.env.values.get(var.index()) {
            None => Err(ExecError::UndeclaredVariable { var, stmt }),
            Some(None) => Err(ExecError::UninitialisedRead { var, stmt }),
            Some(Some(v)) => Ok(*v),
        }
    }

    fn write(&mut self, var: VarId, value: i64, stmt: usize) -> Result<(), ExecError> {
        match self.env.values.get_mut(var.index()) {
            None => Err(ExecError::UndeclaredVariable { var, stmt }),
            Some(slot) => {
                *slot = Some(value);
                Ok(())
            }
        }
    }

    fn operand(&self, op: Operand, stmt: usize) -> Result<i64, ExecError> {
        match op {
            Operand::Var(v) => self.read(v, stmt),
            Operand::Lit(n) => Ok(n),
        }
    }

    fn step(&mut self, s: &Statement, idx: usize) -> Result<(), ExecError> {
        self.steps += 1;
        if self.steps > self.limit {
            return Err(ExecError::StepLimitExceeded { limit: self.limit });
        }
        match s {
            Statement::Init { var, value } => self.write(*var, *value, idx)?,
            Statement::MultiInit { vars, value } => {
                for v in vars {
                    self.write(*v, *value, idx)?;
                }
            }
            Statement::Assign { dst, src } => {
                let x = self.read(*src, idx)?;
                self.write(*dst, x, idx)?;
            }
            Statement::AddAssign { dst, operand } => {
                let a = self.read(*dst, idx)?;
                let b = self.operand(*operand, idx)?;
                let x = a.checked_add(b).ok_or(ExecError::Overflow { stmt: idx })?;
                self.write(*dst, x, idx)?;
            }
            Statement::SubAssign { dst, operand } => {
                let a = self.read(*dst, idx)?;
                let b = self.operand(*operand, idx)?;
                let x = a.checked_sub(b).ok_or(ExecError::Overflow { stmt: idx })?;
                self.write(*dst, x, idx)?;
            }
            Statement::AndAssign { dst, src } => {
                let x = (self.read(*dst, idx)? != 0 && self.read(*src, idx)? != 0) as i64;
                self.write(*dst, x, idx)?;
            }
            Statement::OrAssign { dst, src } => {
                let x = (self.read(*dst, idx)? != 0 || self.read(*src, idx)? != 0) as i64;
                self.write(*dst, x, idx)?;
            }
        }
        if self.record {
            self.trace.push(TraceStep {
                stmt: idx,
                env: self.env.clone(),
            });
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dsl::{parse_source, LoopBlock};

    fn v(i: u32) -> VarId {
        VarId(i)
    }

    #[test]
    fn straight_line_reference_program() {
        let p = parse_source("a0=-1; a1=0; a2=-6\na1 += a2\na0 = a2\na0 -= a0\na1 = a0\na0 -= a2")
            .unwrap();
        let out = execute(&p, DEFAULT_STEP_LIMIT).unwrap();
        assert_eq!(out.final_env, Env::from_pairs(3, &[(0, 6), (1, 0), (2, -6)]));
        assert_eq!(out.trace.len(), 8);
        assert_eq!(out.trace.last().unwrap().env, out.final_env);
    }

    #[test]
    fn empty_body() {
        let p = Program::straight_line(1, vec![Statement::Init { var: v(0), value: 0 }]);
        let env = execute_final(&p, DEFAULT_STEP_LIMIT).unwrap();
        assert_eq!(env.get(v(0)), Some(0));
    }

    #[test]
    fn loop_increment() {
        let p = Program::new(
            1,
            vec![
                Node::Stmt(Statement::Init { var: v(0), value: 0 }),
                Node::Loop(LoopBlock {
                    count: 3,
                    body: vec![Node::Stmt(Statement::AddAssign {
                        dst: v(0),
                        operand: Operand::Lit(1),
                    })],
                }),
            ],
        );
        let out = execute(&p, DEFAULT_STEP_LIMIT).unwrap();
        assert_eq!(out.final_env.get(v(0)), Some(3));
        let idx: Vec<usize> = out.trace.iter().map(|t| t.stmt).collect();
        assert_eq!(idx, vec![0, 1, 1, 1]);
    }

    #[test]
    fn uninitialised_read() {
        let p = Program::straight_line(
            2,
            vec![
                Statement::Init { var: v(0), value: 1 },
                Statement::AddAssign {
                    dst: v(0),
                    operand: Operand::Var(v(1)),
                },
            ],
        );
        assert_eq!(
            execute(&p, 100).unwrap_err(),
            ExecError::UninitialisedRead { var: v(1), stmt: 1 }
        );
    }

    #[test]
    fn step_limit() {
        let p = Program::new(
            1,
            vec![
                Node::Stmt(Statement::Init { var: v(0), value: 0 }),
                Node::Loop(LoopBlock {
                    count: 10,
                    body: vec![Node::Stmt(Statement::AddAssign {
                        dst: v(0),
                        operand: Operand::Lit(1),
                    })],
                }),
            ],
        );
        assert!(execute(&p, 11).is_ok());
        assert_eq!(
            execute(&p, 10).unwrap_err(),
            ExecError::StepLimitExceeded { limit: 10 }
        );
    }

    #[test]
    fn overflow_is_rejected() {
        let p = Program::straight_line(
            1,
            vec![
                Statement::Init { var: v(0), value: i64::MAX },
                Statement::AddAssign {
                    dst: v(0),
                    operand: Operand::Lit(1),
                },
            ],
        );
        assert_eq!(execute(&p, 10).unwrap_err(), ExecError::Overflow { stmt: 1 });
    }

    #[test]
    fn logical_ops_yield_bits() {
        let p = parse_source("a0=1\na1=0\na0 &= a1\na1 |= a0\na0 |= a0").unwrap();
        let env = execute_final(&p, 100).unwrap();
        assert_eq!(env, Env::from_pairs(2, &[(0, 0), (1, 0)]));
        let p = parse_source("a0=1\na1=0\na1 |= a0\na0 &= a1").unwrap();
        assert_eq!(execute_final(&p, 100).unwrap(), Env::from_pairs(2, &[(0, 1), (1, 1)]));
    }
}
