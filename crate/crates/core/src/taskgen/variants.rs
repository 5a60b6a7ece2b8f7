//! Semantics-preserving rewrites of straight-line programs, and independent
//! loops for approximate computation.

use std::collections::BTreeSet;

use rand::seq::{IndexedRandom, SliceRandom};
use rand::Rng;
use rand_chacha::ChaCha8Rng;

use super::TaskGenError;
use crate::dsl::{render_source, LoopBlock, Node, Operand, Program, Statement, VarId, MAX_LOOP_DEPTH};

const MAX_ATTEMPTS: usize = 500;

fn touches(s: &Statement) -> BTreeSet<VarId> {
    s.defs().into_iter().chain(s.uses()).collect()
}

fn independent(a: &Statement, b: &Statement) -> bool {
    touches(a).is_disjoint(&touches(b))
}

fn stmts(p: &Program) -> Vec<Statement> {
    p.statements().into_iter().cloned().collect()
}

/// Swaps one random pair of adjacent statements over disjoint variables.
fn reorder(rng: &mut ChaCha8Rng, s: &mut [Statement]) -> bool {
    let spots: Vec<usize> = (1..s.len()).filter(|&i| independent(&s[i - 1], &s[i])).collect();
    let Some(&i) = spots.choose(rng) else { return false };
    s.swap(i - 1, i);
    true
}

/// Rewrites `x += k` as `x += j; x += k - j` (same for `-=`).
fn split(rng: &mut ChaCha8Rng, s: &mut Vec<Statement>) -> bool {
    let spots: Vec<usize> = (0..s.len())
        .filter(|&i| {
            matches!(s[i], Statement::AddAssign { operand: Operand::Lit(k), .. }
                | Statement::SubAssign { operand: Operand::Lit(k), .. } if k.abs() >= 2)
        })
        .collect();
    let Some(&i) = spots.choose(rng) else { return false };
    let (dst, k, add) = match s[i] {
        Statement::AddAssign { dst, operand: Operand::Lit(k) } => (dst, k, true),
        Statement::SubAssign { dst, operand: Operand::Lit(k) } => (dst, k, false),
        _ => unreachable!(),
    };
    let j = rng.random_range(1..k.abs()) * k.signum();
    let make = |n: i64| {
        if add {
            Statement::AddAssign { dst, operand: Operand::Lit(n) }
        } else {
            Statement::SubAssign { dst, operand: Operand::Lit(n) }
        }
    };
    s.splice(i..=i, [make(j), make(k - j)]);
    true
}

fn rename_var(v: VarId, map: &[u32]) -> VarId {
    VarId(map[v.index()])
}

fn rename_statement(s: &Statement, map: &[u32]) -> Statement {
    let r = |v: VarId| rename_var(v, map);
    let ro = |o: Operand| match o {
        Operand::Var(v) => Operand::Var(r(v)),
        lit => lit,
    };
    match s {
        Statement::Init { var, value } => Statement::Init { var: r(*var), value: *value },
        Statement::MultiInit { vars, value } => Statement::MultiInit { vars: vars.iter().map(|&v| r(v)).collect(), value: *value },
        Statement::Assign { dst, src } => Statement::Assign { dst: r(*dst), src: r(*src) },
        Statement::AddAssign { dst, operand } => Statement::AddAssign { dst: r(*dst), operand: ro(*operand) },
        Statement::SubAssign { dst, operand } => Statement::SubAssign { dst: r(*dst), operand: ro(*operand) },
        Statement::AndAssign { dst, src } => Statement::AndAssign { dst: r(*dst), src: r(*src) },
        Statement::OrAssign { dst, src } => Statement::OrAssign { dst: r(*dst), src: r(*src) },
    }
}

/// Permutes the names of the variables outside `keep`.
fn rename(rng: &mut ChaCha8Rng, s: &mut [Statement], n_vars: u32, keep: &[VarId]) -> bool {
    let free: Vec<u32> = (0..n_vars).filter(|v| !keep.contains(&VarId(*v))).collect();
    if free.len() < 2 {
        return false;
    }
    let mut shuffled = free.clone();
    while shuffled == free {
        shuffled.shuffle(rng);
    }
    let mut map: Vec<u32> = (0..n_vars).collect();
    for (from, to) in free.iter().zip(&shuffled) {
        map[*from as usize] = *to;
    }
    for st in s.iter_mut() {
        *st = rename_statement(st, &map);
    }
    true
}

/// `m` programs with pairwise distinct source text that agree on every
/// variable in `targets`. The first is `program` itself; the others apply one
/// to three random rewrites each: swapping adjacent independent statements,
/// splitting a literal addition or subtraction, renaming non-target variables.
pub fn equivalent_variants(
    program: &Program,
    m: usize,
    targets: &[VarId],
    rng: &mut ChaCha8Rng,
) -> Result<Vec<Program>, TaskGenError> {
    if m < 2 {
        return Err(TaskGenError::InfeasibleParams("at least two variants are needed".into()));
    }
    if !program.is_straight_line() {
        return Err(TaskGenError::InfeasibleParams("variants are defined for loop-free programs".into()));
    }
    let mut seen: BTreeSet<String> = BTreeSet::from([render_source(program)]);
    let mut out = vec![program.clone()];
    let mut attempts = 0;
    while out.len() < m {
        attempts += 1;
        if attempts > MAX_ATTEMPTS {
            return Err(TaskGenError::InfeasibleParams(format!(
                "program too small for {m} distinct variants"
            )));
        }
        let mut s = stmts(program);
        let n_rewrites = rng.random_range(1..=3);
        let mut applied = false;
        for _ in 0..n_rewrites {
            applied |= match rng.random_range(0..3) {
                0 => reorder(rng, &mut s),
                1 => split(rng, &mut s),
                _ => rename(rng, &mut s, program.n_vars, targets),
            };
        }
        if !applied {
            continue;
        }
        let p = Program::straight_line(program.n_vars, s);
        if seen.insert(render_source(&p)) {
            out.push(p);
        }
    }
    Ok(out)
}

/// `k` accumulators, each updated by its own single loop of `n` literal
/// additions or subtractions. The loops share no variable.
pub fn approximate_program(rng: &mut ChaCha8Rng, k: usize, n: usize) -> Result<Program, TaskGenError> {
    if k == 0 || k > MAX_LOOP_DEPTH {
        return Err(TaskGenError::InfeasibleParams(format!("number of loops must be in 1..={MAX_LOOP_DEPTH}")));
    }
    if n == 0 {
        return Err(TaskGenError::InfeasibleParams("loops need at least one operation".into()));
    }
    let mut body: Vec<Node> = (0..k)
        .map(|i| Node::Stmt(Statement::Init { var: VarId(i as u32), value: rng.random_range(-9..=9) }))
        .collect();
    for i in 0..k {
        let dst = VarId(i as u32);
        let ops = (0..n)
            .map(|_| {
                let lit = Operand::Lit(rng.random_range(1..=9));
                Node::Stmt(if rng.random_bool(0.5) {
                    Statement::AddAssign { dst, operand: lit }
                } else {
                    Statement::SubAssign { dst, operand: lit }
                })
            })
            .collect();
        body.push(Node::Loop(LoopBlock { count: rng.random_range(2..=5), body: ops }));
    }
    Ok(Program::new(k as u32, body))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dsl::{execute_final, parse_source, DEFAULT_STEP_LIMIT};
    use rand::SeedableRng;

    #[test]
    fn split_of_a_single_addition() {
        let p = parse_source("a0=0\na0 += 2").unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(0);
        let vs = equivalent_variants(&p, 2, &[VarId(0)], &mut rng).unwrap();
        assert_eq!(render_source(&vs[1]), "a0=0\na0 += 1\na0 += 1");
    }

    #[test]
    fn reorder_of_disjoint_statements_keeps_the_whole_env() {
        let p = parse_source("a0=1\na1=2\na0 += 3\na1 -= 1").unwrap();
        let mut s = stmts(&p);
        let mut rng = ChaCha8Rng::seed_from_u64(0);
        assert!(reorder(&mut rng, &mut s));
        let q = Program::straight_line(2, s);
        assert_ne!(render_source(&q), render_source(&p));
        assert_eq!(execute_final(&q, DEFAULT_STEP_LIMIT), execute_final(&p, DEFAULT_STEP_LIMIT));
    }

    #[test]
    fn too_small_or_too_few() {
        let p = parse_source("a0=0\na0 += 1").unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(0);
        assert!(equivalent_variants(&p, 2, &[VarId(0)], &mut rng).is_err());
        assert!(equivalent_variants(&p, 1, &[VarId(0)], &mut rng).is_err());
    }

    #[test]
    fn renaming_keeps_targets() {
        let p = parse_source("a0=1\na1=2\na2=3\na0 += a1\na2 -= a1").unwrap();
        let mut s = stmts(&p);
        let mut rng = ChaCha8Rng::seed_from_u64(4);
        assert!(rename(&mut rng, &mut s, 3, &[VarId(0)]));
        let q = Program::straight_line(3, s);
        let (a, b) = (execute_final(&p, DEFAULT_STEP_LIMIT).unwrap(), execute_final(&q, DEFAULT_STEP_LIMIT).unwrap());
        assert_eq!(a.get(VarId(0)), b.get(VarId(0)));
        assert_eq!(a.get(VarId(1)), b.get(VarId(2)));
    }
}
