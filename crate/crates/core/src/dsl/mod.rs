//! The restricted imperative language used for synthetic tasks.
//!
//! Programs are straight-line sequences of integer assignments, optionally
//! wrapped in constant-bound `for` loops. [`execute`] is the ground-truth
//! oracle for every generated task; [`render_source`] produces the Python-like
//! surface text shown to models and [`parse_source`] reads it back.

mod exec;
mod render;
mod slice;

use std::fmt;

use serde::{Deserialize, Serialize};
use thiserror::Error;

pub use exec::{execute, execute_final, Env, ExecError, Execution, TraceStep, DEFAULT_STEP_LIMIT};
pub use render::{parse_source, render_source, ParseError};
pub use slice::{backward_slice, critical_path_length, restrict, SliceError};

/// Deepest loop nesting a program may contain.
pub const MAX_LOOP_DEPTH: usize = 9;

/// A program variable, rendered as `a0`, `a1`, ...
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(transparent)]
pub struct VarId(pub u32);

impl VarId {
    pub fn index(self) -> usize {
        self.0 as usize
    }
}

impl fmt::Display for VarId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "a{}", self.0)
    }
}

/// Right-hand side of an additive compound assignment.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Operand {
    Var(VarId),
    Lit(i64),
}

impl fmt::Display for Operand {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Operand::Var(v) => v.fmt(f),
            Operand::Lit(n) => n.fmt(f),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "op", rename_all = "snake_case")]
pub enum Statement {
    /// `a0=-1`
    Init { var: VarId, value: i64 },
    /// `a0 = a1 = a2 = 1`
    MultiInit { vars: Vec<VarId>, value: i64 },
    /// `a0 = a2`
    Assign { dst: VarId, src: VarId },
    /// `a1 += a2`, `a1 += 3`
    AddAssign { dst: VarId, operand: Operand },
    /// `a1 -= a2`, `a1 -= 3`
    SubAssign { dst: VarId, operand: Operand },
    /// `a0 &= a1`, logical and over {0, 1}
    AndAssign { dst: VarId, src: VarId },
    /// `a0 |= a1`, logical or over {0, 1}
    OrAssign { dst: VarId, src: VarId },
}

impl Statement {
    /// Variables written by the statement.
    pub fn defs(&self) -> Vec<VarId> {
        match self {
            Statement::Init { var, .. } => vec![*var],
            Statement::MultiInit { vars, .. } => vars.clone(),
            Statement::Assign { dst, .. }
            | Statement::AddAssign { dst, .. }
            | Statement::SubAssign { dst, .. }
            | Statement::AndAssign { dst, .. }
            | Statement::OrAssign { dst, .. } => vec![*dst],
        }
    }

    /// Variables read by the statement. Compound assignments read their destination.
    pub fn uses(&self) -> Vec<VarId> {
        match self {
            Statement::Init { .. } | Statement::MultiInit { .. } => vec![],
            Statement::Assign { src, .. } => vec![*src],
            Statement::AddAssign { dst, operand } | Statement::SubAssign { dst, operand } => {
                match operand {
                    Operand::Var(src) => vec![*dst, *src],
                    Operand::Lit(_) => vec![*dst],
                }
            }
            Statement::AndAssign { dst, src } | Statement::OrAssign { dst, src } => {
                vec![*dst, *src]
            }
        }
    }

    /// True for literal initialisations, which are setup rather than operations.
    pub fn is_init(&self) -> bool {
        matches!(self, Statement::Init { .. } | Statement::MultiInit { .. })
    }

    pub fn is_logical(&self) -> bool {
        matches!(self, Statement::AndAssign { .. } | Statement::OrAssign { .. })
    }

    pub fn is_additive(&self) -> bool {
        matches!(self, Statement::AddAssign { .. } | Statement::SubAssign { .. })
    }

    fn vars(&self) -> Vec<VarId> {
        let mut v = self.defs();
        v.extend(self.uses());
        v
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct LoopBlock {
    pub count: u32,
    pub body: Vec<Node>,
}

impl LoopBlock {
    /// Nesting depth of this loop, counting itself (a loop with no inner loop has depth 1).
    pub fn depth(&self) -> usize {
        1 + nesting_depth(&self.body)
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Node {
    Stmt(Statement),
    Loop(LoopBlock),
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Program {
    pub n_vars: u32,
    pub body: Vec<Node>,
}

#[derive(Debug, Clone, Error, PartialEq, Eq)]
pub enum ProgramError {
    #[error("variable {var} is out of range for a program with {n_vars} variables")]
    UndeclaredVariable { var: VarId, n_vars: u32 },
    #[error("{var} may be read before it is initialised")]
    ReadBeforeInit { var: VarId },
    #[error("loop with zero iterations")]
    ZeroIterationLoop,
    #[error("loop with an empty body")]
    EmptyLoopBody,
    #[error("loop nesting depth {0} exceeds {MAX_LOOP_DEPTH}")]
    TooDeep(usize),
    #[error("logical statements require every variable to be initialised to 0 or 1 and no additive statements")]
    MixedLogic,
    #[error("empty variable list in multi-initialisation")]
    EmptyMultiInit,
}

fn nesting_depth(nodes: &[Node]) -> usize {
    nodes
        .iter()
        .map(|n| match n {
            Node::Stmt(_) => 0,
            Node::Loop(l) => l.depth(),
        })
        .max()
        .unwrap_or(0)
}

impl Program {
    pub fn new(n_vars: u32, body: Vec<Node>) -> Self {
        Self { n_vars, body }
    }

    /// Builds a loop-free program from a statement list.
    pub fn straight_line(n_vars: u32, stmts: Vec<Statement>) -> Self {
        Self::new(n_vars, stmts.into_iter().map(Node::Stmt).collect())
    }

    pub fn vars(&self) -> impl Iterator<Item = VarId> {
        (0..self.n_vars).map(VarId)
    }

    pub fn nesting_depth(&self) -> usize {
        nesting_depth(&self.body)
    }

    pub fn is_straight_line(&self) -> bool {
        self.body.iter().all(|n| matches!(n, Node::Stmt(_)))
    }

    /// Leaf statements in source order (loop bodies are visited once).
    pub fn statements(&self) -> Vec<&Statement> {
        fn walk<'a>(nodes: &'a [Node], out: &mut Vec<&'a Statement>) {
            for n in nodes {
                match n {
                    Node::Stmt(s) => out.push(s),
                    Node::Loop(l) => walk(&l.body, out),
                }
            }
        }
        let mut out = Vec::new();
        walk(&self.body, &mut out);
        out
    }

    /// Number of non-initialisation statements in the source text.
    pub fn op_count(&self) -> usize {
        self.statements().iter().filter(|s| !s.is_init()).count()
    }

    /// Checks the static well-formedness rules: declared variables only,
    /// initialisation before first read, bounded nesting, non-empty loops and
    /// the {0, 1} discipline for logical programs.
    pub fn validate(&self) -> Result<(), ProgramError> {
        let depth = self.nesting_depth();
        if depth > MAX_LOOP_DEPTH {
            return Err(ProgramError::TooDeep(depth));
        }
        let mut initialised = vec![false; self.n_vars as usize];
        self.validate_nodes(&self.body, &mut initialised)?;

        let stmts = self.statements();
        if stmts.iter().any(|s| s.is_logical()) {
            let bad = stmts.iter().any(|s| match s {
                Statement::Init { value, .. } | Statement::MultiInit { value, .. } => {
                    !(0..=1).contains(value)
                }
                s => s.is_additive(),
            });
            if bad {
                return Err(ProgramError::MixedLogic);
            }
        }
        Ok(())
    }

    fn validate_nodes(&self, nodes: &[Node], initialised: &mut [bool]) -> Result<(), ProgramError> {
        for node in nodes {
            match node {
                Node::Stmt(s) => {
                    if let Statement::MultiInit { vars, .. } = s {
                        if vars.is_empty() {
                            return Err(ProgramError::EmptyMultiInit);
                        }
                    }
                    for v in s.vars() {
                        if v.0 >= self.n_vars {
                            return Err(ProgramError::UndeclaredVariable {
                                var: v,
                                n_vars: self.n_vars,
                            });
                        }
                    }
                    for v in s.uses() {
                        if !initialised[v.index()] {
                            return Err(ProgramError::ReadBeforeInit { var: v });
                        }
                    }
                    for v in s.defs() {
                        initialised[v.index()] = true;
                    }
                }
                Node::Loop(l) => {
                    if l.count == 0 {
                        return Err(ProgramError::ZeroIterationLoop);
                    }
                    if l.body.is_empty() {
                        return Err(ProgramError::EmptyLoopBody);
                    }
                    self.validate_nodes(&l.body, initialised)?;
                }
            }
        }
        Ok(())
    }
}
