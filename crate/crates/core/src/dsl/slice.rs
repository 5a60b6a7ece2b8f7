use std::collections::{BTreeSet, HashSet};

use thiserror::Error;

use super::{Node, Program, Statement, VarId};

#[derive(Debug, Clone, Error, PartialEq, Eq)]
pub enum SliceError {
    #[error("slicing is only defined for loop-free programs")]
    NotStraightLine,
    #[error("{0} is not declared")]
    UnknownVariable(VarId),
}

fn straight_statements(program: &Program, target: VarId) -> Result<Vec<&Statement>, SliceError> {
    if target.0 >= program.n_vars {
        return Err(SliceError::UnknownVariable(target));
    }
    program
        .body
        .iter()
        .map(|n| match n {
            Node::Stmt(s) => Ok(s),
            Node::Loop(_) => Err(SliceError::NotStraightLine),
        })
        .collect()
}

/// Indices of the statements the final value of `target` depends on, via
/// reaching definitions walked backwards from the end of the program.
pub fn backward_slice(program: &Program, target: VarId) -> Result<BTreeSet<usize>, SliceError> {
    let stmts = straight_statements(program, target)?;
    let mut live: HashSet<VarId> = HashSet::from([target]);
    let mut slice = BTreeSet::new();
    for (i, s) in stmts.iter().enumerate().rev() {
        let defs = s.defs();
        if !defs.iter().any(|d| live.contains(d)) {
            continue;
        }
        slice.insert(i);
        for d in &defs {
            live.remove(d);
        }
        live.extend(s.uses());
    }
    Ok(slice)
}

/// Number of operations on the critical path of `target`; initialisations are
/// excluded.
pub fn critical_path_length(program: &Program, target: VarId) -> Result<usize, SliceError> {
    let stmts = straight_statements(program, target)?;
    Ok(backward_slice(program, target)?
        .into_iter()
        .filter(|&i| !stmts[i].is_init())
        .count())
}

/// Keeps only the top-level statements whose indices are in `keep`.
pub fn restrict(program: &Program, keep: &BTreeSet<usize>) -> Program {
    Program::new(
        program.n_vars,
        program
            .body
            .iter()
            .enumerate()
            .filter(|(i, _)| keep.contains(i))
            .map(|(_, n)| n.clone())
            .collect(),
    )
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dsl::{execute_final, parse_source, LoopBlock, Operand};

    #[test]
    fn single_variable_program_slices_everything() {
        let p = parse_source("a0=1\na0 += 2\na0 -= 5\na0 += a0").unwrap();
        assert_eq!(backward_slice(&p, VarId(0)).unwrap(), (0..4).collect());
        assert_eq!(critical_path_length(&p, VarId(0)).unwrap(), 3);
    }

    #[test]
    fn two_element_chain() {
        let p = parse_source("a0=1\na1=2\na2=3\na3=4\na0 += a1\na1 -= 3\na3 = a2").unwrap();
        assert_eq!(backward_slice(&p, VarId(3)).unwrap(), BTreeSet::from([2, 6]));
        assert_eq!(critical_path_length(&p, VarId(3)).unwrap(), 1);
    }

    #[test]
    fn chain_of_five() {
        let p = parse_source("a0=0\na1=1\na0 += 1\na0 += 2\na1 += 1\na0 -= 3\na0 += 4\na0 += 5").unwrap();
        assert_eq!(critical_path_length(&p, VarId(0)).unwrap(), 5);
    }

    #[test]
    fn no_update_after_init() {
        let p = parse_source("a0=0\na1=1\na1 += 4").unwrap();
        assert_eq!(critical_path_length(&p, VarId(0)).unwrap(), 0);
    }

    #[test]
    fn multi_init_and_overwrite() {
        let p = parse_source("a0 = a1 = a2 = 1\na0 -= a1\na0 += a1\na1 = a2\na0 = a1").unwrap();
        let s = backward_slice(&p, VarId(0)).unwrap();
        assert_eq!(s, BTreeSet::from([0, 3, 4]));
        let full = execute_final(&p, 100).unwrap();
        let part = execute_final(&restrict(&p, &s), 100).unwrap();
        assert_eq!(full.get(VarId(0)), part.get(VarId(0)));
    }

    #[test]
    fn loops_are_rejected() {
        let p = Program::new(
            1,
            vec![
                Node::Stmt(Statement::Init { var: VarId(0), value: 0 }),
                Node::Loop(LoopBlock {
                    count: 2,
                    body: vec![Node::Stmt(Statement::AddAssign {
                        dst: VarId(0),
                        operand: Operand::Lit(1),
                    })],
                }),
            ],
        );
        assert_eq!(backward_slice(&p, VarId(0)), Err(SliceError::NotStraightLine));
        assert_eq!(backward_slice(&p, VarId(3)), Err(SliceError::UnknownVariable(VarId(3))));
    }
}
