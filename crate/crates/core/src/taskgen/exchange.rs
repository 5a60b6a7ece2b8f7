//! Good exchange plans: agents trading one kind of good, narrated sentence by
//! sentence and compiled to the equivalent straight-line program.

use std::collections::BTreeSet;

use rand::seq::{IndexedRandom, SliceRandom};
use rand::Rng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::names::{join_names, Pronoun, GOODS, PEOPLE};
use super::{OpClass, TaskGenError};
use crate::dsl::{Operand, Program, Statement, VarId};

/// Upper bound on any agent's count during generation.
pub const VALUE_CAP: i64 = 999;
const MAX_LITERAL: i64 = 9;
const MAX_INITIAL: i64 = 9;
const MAX_ATTEMPTS: usize = 2_000;

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Agent {
    pub name: String,
    pub pronoun: Pronoun,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Goods {
    pub singular: String,
    pub plural: String,
}

impl Goods {
    fn count(&self, n: i64) -> String {
        match n {
            0 => format!("no {}", self.plural),
            1 => format!("1 {}", self.singular),
            n => format!("{n} {}", self.plural),
        }
    }
}

/// One narrated action. Agent fields index into [`EventPlan::agents`]; agent
/// `i` is variable `a<i>` in the compiled program.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "event", rename_all = "snake_case")]
pub enum Event {
    /// `from -= qty; to += qty`
    Give { from: usize, to: usize, qty: i64 },
    /// `to += from; from -= from`
    GiveAll { from: usize, to: usize },
    /// `agent += qty`
    Acquire { agent: usize, qty: i64 },
    /// `agent -= qty`
    Lose { agent: usize, qty: i64 },
    /// `agent += other`
    AcquireMatching { agent: usize, other: usize },
    /// `agent -= other`
    LoseMatching { agent: usize, other: usize },
    /// `agent = other`
    Match { agent: usize, other: usize },
    /// `agent -= agent`
    LoseAll { agent: usize },
}

fn v(i: usize) -> VarId {
    VarId(i as u32)
}

impl Event {
    pub fn statements(&self) -> Vec<Statement> {
        match *self {
            Event::Give { from, to, qty } => vec![
                Statement::SubAssign { dst: v(from), operand: Operand::Lit(qty) },
                Statement::AddAssign { dst: v(to), operand: Operand::Lit(qty) },
            ],
            Event::GiveAll { from, to } => vec![
                Statement::AddAssign { dst: v(to), operand: Operand::Var(v(from)) },
                Statement::SubAssign { dst: v(from), operand: Operand::Var(v(from)) },
            ],
            Event::Acquire { agent, qty } => vec![Statement::AddAssign { dst: v(agent), operand: Operand::Lit(qty) }],
            Event::Lose { agent, qty } => vec![Statement::SubAssign { dst: v(agent), operand: Operand::Lit(qty) }],
            Event::AcquireMatching { agent, other } => {
                vec![Statement::AddAssign { dst: v(agent), operand: Operand::Var(v(other)) }]
            }
            Event::LoseMatching { agent, other } => {
                vec![Statement::SubAssign { dst: v(agent), operand: Operand::Var(v(other)) }]
            }
            Event::Match { agent, other } => vec![Statement::Assign { dst: v(agent), src: v(other) }],
            Event::LoseAll { agent } => vec![Statement::SubAssign { dst: v(agent), operand: Operand::Var(v(agent)) }],
        }
    }

    /// Number of statements the event compiles to.
    pub fn cost(&self) -> usize {
        match self {
            Event::Give { .. } | Event::GiveAll { .. } => 2,
            _ => 1,
        }
    }

    /// Applies the event to a count vector, directly and without the interpreter.
    pub fn apply(&self, counts: &mut [i64]) {
        match *self {
            Event::Give { from, to, qty } => {
                counts[from] -= qty;
                counts[to] += qty;
            }
            Event::GiveAll { from, to } => {
                counts[to] += counts[from];
                counts[from] = 0;
            }
            Event::Acquire { agent, qty } => counts[agent] += qty,
            Event::Lose { agent, qty } => counts[agent] -= qty,
            Event::AcquireMatching { agent, other } => counts[agent] += counts[other],
            Event::LoseMatching { agent, other } => counts[agent] -= counts[other],
            Event::Match { agent, other } => counts[agent] = counts[other],
            Event::LoseAll { agent } => counts[agent] = 0,
        }
    }

    fn agents(&self) -> Vec<usize> {
        match *self {
            Event::Give { from, to, .. } | Event::GiveAll { from, to } => vec![from, to],
            Event::Acquire { agent, .. } | Event::Lose { agent, .. } | Event::LoseAll { agent } => vec![agent],
            Event::AcquireMatching { agent, other }
            | Event::LoseMatching { agent, other }
            | Event::Match { agent, other } => vec![agent, other],
        }
    }

    fn quantity(&self) -> Option<i64> {
        match *self {
            Event::Give { qty, .. } | Event::Acquire { qty, .. } | Event::Lose { qty, .. } => Some(qty),
            _ => None,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct EventPlan {
    pub agents: Vec<Agent>,
    pub goods: Goods,
    pub initial: Vec<i64>,
    pub events: Vec<Event>,
    /// Agents asked about, in question order.
    pub targets: Vec<usize>,
}

impl EventPlan {
    pub fn validate(&self) -> Result<(), TaskGenError> {
        let bad = |m: &str| Err(TaskGenError::InfeasibleParams(m.to_string()));
        let n = self.agents.len();
        let distinct: BTreeSet<&str> = self.agents.iter().map(|a| a.name.as_str()).collect();
        if distinct.len() != n {
            return bad("agent names must be distinct");
        }
        if self.initial.len() != n {
            return bad("one initial count per agent");
        }
        if self.targets.is_empty() || self.targets.iter().any(|&t| t >= n) {
            return bad("targets must name existing agents");
        }
        for e in &self.events {
            if e.agents().iter().any(|&a| a >= n) {
                return bad("event references an unknown agent");
            }
            if e.quantity().is_some_and(|q| q <= 0) {
                return bad("quantities must be positive");
            }
        }
        Ok(())
    }

    /// Final counts of every agent, by direct simulation of the events.
    pub fn evaluate(&self) -> Vec<i64> {
        let mut counts = self.initial.clone();
        for e in &self.events {
            e.apply(&mut counts);
        }
        counts
    }

    pub fn target_values(&self) -> Vec<i64> {
        let counts = self.evaluate();
        self.targets.iter().map(|&t| counts[t]).collect()
    }

    /// The synthetic twin: one initialisation per agent followed by the
    /// statements of every event.
    pub fn compile(&self) -> Program {
        let mut stmts: Vec<Statement> = self
            .initial
            .iter()
            .enumerate()
            .map(|(i, &value)| Statement::Init { var: v(i), value })
            .collect();
        stmts.extend(self.events.iter().flat_map(Event::statements));
        Program::straight_line(self.agents.len() as u32, stmts)
    }

    /// One sentence per initial count, then one per event.
    pub fn sentences(&self) -> Vec<String> {
        let mut out: Vec<String> = self
            .agents
            .iter()
            .zip(&self.initial)
            .map(|(a, &n)| format!("{} has {}.", a.name, self.goods.count(n)))
            .collect();
        out.extend(self.events.iter().map(|e| self.sentence(e)));
        out
    }

    pub fn sentence(&self, e: &Event) -> String {
        let name = |i: usize| self.agents[i].name.as_str();
        let g = &self.goods;
        match *e {
            Event::Give { from, to, qty } => format!("{} gives {} {}.", name(from), name(to), g.count(qty)),
            Event::GiveAll { from, to } => format!(
                "{} gives {} everything {} has.",
                name(from),
                name(to),
                self.agents[from].pronoun.subject()
            ),
            Event::Acquire { agent, qty } => format!("{} buys {}.", name(agent), g.count(qty)),
            Event::Lose { agent, qty } => format!("{} loses {}.", name(agent), g.count(qty)),
            Event::AcquireMatching { agent, other } => {
                format!("{} buys as many {} as {} has.", name(agent), g.plural, name(other))
            }
            Event::LoseMatching { agent, other } => {
                format!("{} loses as many {} as {} has.", name(agent), g.plural, name(other))
            }
            Event::Match { agent, other } => format!(
                "{} throws away {} {} and takes as many as {} has.",
                name(agent),
                self.agents[agent].pronoun.possessive(),
                g.plural,
                name(other)
            ),
            Event::LoseAll { agent } => format!(
                "{} throws away all {} {}.",
                name(agent),
                self.agents[agent].pronoun.possessive(),
                g.plural
            ),
        }
    }

    pub fn question(&self) -> String {
        match self.targets.as_slice() {
            [t] => format!("How many {} does {} have at the end?", self.goods.plural, self.agents[*t].name),
            ts => {
                let names: Vec<&str> = ts.iter().map(|&t| self.agents[t].name.as_str()).collect();
                format!(
                    "How many {} do {} each have at the end? Reply with a list in that order.",
                    self.goods.plural,
                    join_names(&names)
                )
            }
        }
    }

    pub fn narrative(&self) -> String {
        self.sentences().join(" ")
    }
}

/// Event kinds available for an operation subset.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
enum Kind {
    Give,
    GiveAll,
    Acquire,
    Lose,
    AcquireMatching,
    LoseMatching,
    Match,
    LoseAll,
}

impl Kind {
    fn cost(self) -> usize {
        match self {
            Kind::Give | Kind::GiveAll => 2,
            _ => 1,
        }
    }

    fn needs_other(self) -> bool {
        !matches!(self, Kind::Acquire | Kind::Lose | Kind::LoseAll)
    }
}

fn kinds(ops: &[OpClass]) -> Result<Vec<Kind>, TaskGenError> {
    let mut out = Vec::new();
    if ops.contains(&OpClass::AddSub) {
        out.extend([
            Kind::Give,
            Kind::GiveAll,
            Kind::Acquire,
            Kind::Lose,
            Kind::AcquireMatching,
            Kind::LoseMatching,
            Kind::LoseAll,
        ]);
    }
    if ops.contains(&OpClass::Mov) {
        out.push(Kind::Match);
    }
    if out.is_empty() || ops.contains(&OpClass::Logic) {
        return Err(TaskGenError::InfeasibleParams(
            "good exchange supports add/sub and mov only".into(),
        ));
    }
    Ok(out)
}

fn pick_agents(rng: &mut ChaCha8Rng, n: usize) -> Vec<Agent> {
    let mut people = PEOPLE.to_vec();
    people.shuffle(rng);
    people[..n]
        .iter()
        .map(|&(name, pronoun)| Agent { name: name.to_string(), pronoun })
        .collect()
}

fn pick_goods(rng: &mut ChaCha8Rng) -> Goods {
    let (singular, plural) = GOODS[rng.random_range(0..GOODS.len())];
    Goods { singular: singular.into(), plural: plural.into() }
}

fn literal(rng: &mut ChaCha8Rng, max: i64) -> i64 {
    rng.random_range(1..=max.min(MAX_LITERAL))
}

fn other_than(rng: &mut ChaCha8Rng, pool: &[usize], x: usize) -> Option<usize> {
    let rest: Vec<usize> = pool.iter().copied().filter(|&p| p != x).collect();
    rest.choose(rng).copied()
}

/// Samples one event over `pool` that keeps every count in `[0, VALUE_CAP]`.
fn forward_event(rng: &mut ChaCha8Rng, kinds: &[Kind], pool: &[usize], counts: &[i64], budget: usize) -> Option<Event> {
    let usable: Vec<Kind> = kinds
        .iter()
        .copied()
        .filter(|k| k.cost() <= budget && (!k.needs_other() || pool.len() >= 2))
        .collect();
    let kind = *usable.choose(rng)?;
    let a = *pool.choose(rng)?;
    let e = match kind {
        Kind::Acquire => Event::Acquire { agent: a, qty: literal(rng, MAX_LITERAL) },
        Kind::Lose if counts[a] > 0 => Event::Lose { agent: a, qty: literal(rng, counts[a]) },
        Kind::LoseAll => Event::LoseAll { agent: a },
        Kind::Give if counts[a] > 0 => {
            let to = other_than(rng, pool, a)?;
            Event::Give { from: a, to, qty: literal(rng, counts[a]) }
        }
        Kind::GiveAll => Event::GiveAll { from: a, to: other_than(rng, pool, a)? },
        Kind::AcquireMatching => Event::AcquireMatching { agent: a, other: other_than(rng, pool, a)? },
        Kind::LoseMatching => Event::LoseMatching { agent: a, other: other_than(rng, pool, a)? },
        Kind::Match => Event::Match { agent: a, other: other_than(rng, pool, a)? },
        _ => return None,
    };
    let mut next = counts.to_vec();
    e.apply(&mut next);
    next.iter().all(|&c| (0..=VALUE_CAP).contains(&c)).then_some(e)
}

fn writes_only(e: &Event) -> Option<usize> {
    match *e {
        Event::Match { agent, .. } => Some(agent),
        _ => None,
    }
}

/// Forward sampling of events worth exactly `budget` statements over `pool`.
/// No two consecutive events leave the counts unchanged, and an agent is not
/// overwritten twice in a row.
fn forward_events(
    rng: &mut ChaCha8Rng,
    kinds: &[Kind],
    pool: &[usize],
    counts: &mut [i64],
    budget: usize,
) -> Result<Vec<Event>, TaskGenError> {
    let mut out: Vec<Event> = Vec::new();
    let mut left = budget;
    let mut prev_noop = false;
    while left > 0 {
        let mut chosen = None;
        // taken only when every sampled event is a repeated no-op, which
        // happens once copy-only programs have equalised all counts
        let mut fallback = None;
        for _ in 0..MAX_ATTEMPTS {
            let Some(e) = forward_event(rng, kinds, pool, counts, left) else {
                continue;
            };
            let mut next = counts.to_vec();
            e.apply(&mut next);
            let noop = next == counts;
            if let (Some(prev), Some(now)) = (out.last().and_then(writes_only), writes_only(&e)) {
                if prev == now {
                    continue;
                }
            }
            if noop && prev_noop {
                fallback.get_or_insert((e, next));
                continue;
            }
            prev_noop = noop;
            chosen = Some((e, next));
            break;
        }
        let (e, next) = chosen.or(fallback).ok_or_else(|| {
            TaskGenError::InfeasibleParams(format!("cannot place an event over {} agent(s)", pool.len()))
        })?;
        counts.copy_from_slice(&next);
        left -= e.cost();
        out.push(e);
    }
    Ok(out)
}

fn initial_counts(rng: &mut ChaCha8Rng, n: usize) -> Vec<i64> {
    (0..n).map(|_| rng.random_range(0..=MAX_INITIAL)).collect()
}

/// A plan with exactly `n_ops` statements over `n_agents` agents and one target.
pub fn straight_line_plan(
    rng: &mut ChaCha8Rng,
    n_ops: usize,
    n_agents: usize,
    ops: &[OpClass],
) -> Result<EventPlan, TaskGenError> {
    let kinds = kinds(ops)?;
    if n_agents == 0 || n_agents > PEOPLE.len() {
        return Err(TaskGenError::InfeasibleParams(format!("n_vars must be in 1..={}", PEOPLE.len())));
    }
    let agents = pick_agents(rng, n_agents);
    let goods = pick_goods(rng);
    let initial = initial_counts(rng, n_agents);
    let pool: Vec<usize> = (0..n_agents).collect();
    let mut counts = initial.clone();
    let events = forward_events(rng, &kinds, &pool, &mut counts, n_ops)?;
    let target = rng.random_range(0..n_agents);
    Ok(EventPlan { agents, goods, initial, events, targets: vec![target] })
}

/// Agents are split into `n_paths` disjoint groups; events never cross a
/// group, and the question asks for one agent of each group.
pub fn parallel_plan(
    rng: &mut ChaCha8Rng,
    n_ops: usize,
    n_agents: usize,
    n_paths: usize,
    ops: &[OpClass],
) -> Result<EventPlan, TaskGenError> {
    let kinds = kinds(ops)?;
    if n_paths == 0 || n_agents < n_paths || n_agents > PEOPLE.len() {
        return Err(TaskGenError::InfeasibleParams(format!(
            "{n_paths} paths need between {n_paths} and {} variables, got {n_agents}",
            PEOPLE.len()
        )));
    }
    if n_ops < n_paths {
        return Err(TaskGenError::InfeasibleParams(format!("{n_ops} operations cannot cover {n_paths} paths")));
    }
    let agents = pick_agents(rng, n_agents);
    let goods = pick_goods(rng);
    let initial = initial_counts(rng, n_agents);

    let mut order: Vec<usize> = (0..n_agents).collect();
    order.shuffle(rng);
    let mut groups: Vec<Vec<usize>> = vec![Vec::new(); n_paths];
    for (i, a) in order.into_iter().enumerate() {
        groups[i % n_paths].push(a);
    }
    for g in &mut groups {
        g.sort_unstable();
    }

    let mut budgets = vec![1usize; n_paths];
    for _ in n_paths..n_ops {
        budgets[rng.random_range(0..n_paths)] += 1;
    }
    let mut counts = initial.clone();
    let mut per_group = Vec::with_capacity(n_paths);
    for (g, &b) in groups.iter().zip(&budgets) {
        let evs = forward_events(rng, &kinds, g, &mut counts, b)?;
        per_group.push(evs.into_iter().rev().collect::<Vec<_>>());
    }
    // random merge that keeps each group's order
    let mut events = Vec::new();
    loop {
        let open: Vec<usize> = (0..n_paths).filter(|&i| !per_group[i].is_empty()).collect();
        let Some(&g) = open.choose(rng) else { break };
        events.push(per_group[g].pop().unwrap());
    }

    let mut targets: Vec<usize> = groups.iter().map(|g| *g.choose(rng).unwrap()).collect();
    targets.sort_unstable();
    Ok(EventPlan { agents, goods, initial, events, targets })
}

/// Critical events are chosen backwards from the target so that every one of
/// them writes a variable that is still live; quantities are filled in
/// afterwards in program order.
fn critical_skeleton(
    rng: &mut ChaCha8Rng,
    kinds: &[Kind],
    crit: &[usize],
    target: usize,
    path_len: usize,
) -> Option<Vec<Event>> {
    let mut live: BTreeSet<usize> = BTreeSet::from([target]);
    let mut rev = Vec::new();
    let mut left = path_len;
    while left > 0 {
        let live_vec: Vec<usize> = live.iter().copied().collect();
        let usable: Vec<Kind> = kinds
            .iter()
            .copied()
            .filter(|k| k.cost() <= left)
            .filter(|k| match k {
                Kind::Give | Kind::GiveAll => live.len() >= 2,
                k if k.needs_other() => crit.len() >= 2,
                _ => true,
            })
            .collect();
        let kind = *usable.choose(rng)?;
        let a = *live_vec.choose(rng)?;
        let e = match kind {
            Kind::Acquire => Event::Acquire { agent: a, qty: 1 },
            Kind::Lose => Event::Lose { agent: a, qty: 1 },
            Kind::LoseAll => Event::LoseAll { agent: a },
            Kind::AcquireMatching | Kind::LoseMatching | Kind::Match => {
                let b = other_than(rng, crit, a)?;
                if kind == Kind::Match {
                    live.remove(&a);
                }
                live.insert(b);
                match kind {
                    Kind::AcquireMatching => Event::AcquireMatching { agent: a, other: b },
                    Kind::LoseMatching => Event::LoseMatching { agent: a, other: b },
                    _ => Event::Match { agent: a, other: b },
                }
            }
            Kind::Give | Kind::GiveAll => {
                let b = other_than(rng, &live_vec, a)?;
                if kind == Kind::Give {
                    Event::Give { from: b, to: a, qty: 1 }
                } else {
                    Event::GiveAll { from: b, to: a }
                }
            }
        };
        left -= e.cost();
        rev.push(e);
    }
    rev.reverse();
    Some(rev)
}

/// Fills quantities in program order. Rewrites only swap an event for one with
/// the same reads and writes (e.g. `Lose` for `Acquire`), so the slice is kept.
fn fill_quantities(rng: &mut ChaCha8Rng, skeleton: Vec<Event>, counts: &mut [i64]) -> Option<Vec<Event>> {
    let mut out = Vec::with_capacity(skeleton.len());
    for e in skeleton {
        let filled: Vec<Event> = match e {
            Event::Acquire { agent, .. } | Event::Lose { agent, .. } => {
                let c = counts[agent];
                let lose = matches!(e, Event::Lose { .. });
                let room = VALUE_CAP - c;
                if (lose && c > 0) || room < 1 {
                    if c == 0 {
                        return None;
                    }
                    vec![Event::Lose { agent, qty: literal(rng, c) }]
                } else {
                    vec![Event::Acquire { agent, qty: literal(rng, room) }]
                }
            }
            Event::Give { from, to, .. } => {
                let (f, t) = if counts[from] > 0 {
                    (from, to)
                } else if counts[to] > 0 {
                    (to, from)
                } else {
                    (usize::MAX, usize::MAX)
                };
                if f == usize::MAX {
                    vec![
                        Event::Acquire { agent: from, qty: literal(rng, MAX_LITERAL) },
                        Event::Acquire { agent: to, qty: literal(rng, MAX_LITERAL) },
                    ]
                } else {
                    vec![Event::Give { from: f, to: t, qty: literal(rng, counts[f]) }]
                }
            }
            Event::AcquireMatching { agent, other } | Event::LoseMatching { agent, other } => {
                let (a, b) = (counts[agent], counts[other]);
                let want_lose = matches!(e, Event::LoseMatching { .. });
                if (want_lose && a >= b) || a + b > VALUE_CAP {
                    vec![Event::LoseMatching { agent, other }]
                } else {
                    vec![Event::AcquireMatching { agent, other }]
                }
            }
            e => vec![e],
        };
        for f in filled {
            f.apply(counts);
            if counts.iter().any(|&c| !(0..=VALUE_CAP).contains(&c)) {
                return None;
            }
            out.push(f);
        }
    }
    Some(out)
}

/// A plan with `n_ops` statements of which exactly `path_len` lie on the
/// dependency chain of the target. The remaining statements only involve
/// agents outside the chain.
pub fn critical_plan(
    rng: &mut ChaCha8Rng,
    n_ops: usize,
    n_agents: usize,
    path_len: usize,
    ops: &[OpClass],
) -> Result<EventPlan, TaskGenError> {
    let kinds = kinds(ops)?;
    if path_len > n_ops {
        return Err(TaskGenError::InfeasibleParams(format!(
            "path length {path_len} exceeds {n_ops} operations"
        )));
    }
    if n_agents == 0 || n_agents > PEOPLE.len() {
        return Err(TaskGenError::InfeasibleParams(format!("n_vars must be in 1..={}", PEOPLE.len())));
    }
    let n_crit = n_agents.div_ceil(2);
    if n_ops > path_len && n_crit == n_agents {
        return Err(TaskGenError::InfeasibleParams(
            "distractor operations need at least two variables".into(),
        ));
    }
    let agents = pick_agents(rng, n_agents);
    let goods = pick_goods(rng);

    for _ in 0..MAX_ATTEMPTS {
        let mut order: Vec<usize> = (0..n_agents).collect();
        order.shuffle(rng);
        let (crit, rest) = order.split_at(n_crit);
        let (mut crit, mut rest) = (crit.to_vec(), rest.to_vec());
        crit.sort_unstable();
        rest.sort_unstable();
        let target = *crit.choose(rng).unwrap();

        let initial = initial_counts(rng, n_agents);
        let Some(skeleton) = critical_skeleton(rng, &kinds, &crit, target, path_len) else {
            continue;
        };
        let mut counts = initial.clone();
        let Some(critical) = fill_quantities(rng, skeleton, &mut counts) else {
            continue;
        };
        let Ok(noise) = forward_events(rng, &kinds, &rest, &mut counts, n_ops - path_len) else {
            continue;
        };

        let mut slots: Vec<bool> = std::iter::repeat_n(true, critical.len())
            .chain(std::iter::repeat_n(false, noise.len()))
            .collect();
        slots.shuffle(rng);
        let (mut c, mut d) = (critical.into_iter(), noise.into_iter());
        let events = slots.into_iter().map(|s| if s { c.next() } else { d.next() }.unwrap()).collect();
        return Ok(EventPlan { agents, goods, initial, events, targets: vec![target] });
    }
    Err(TaskGenError::InfeasibleParams(format!(
        "no critical path of length {path_len} found over {n_agents} variables"
    )))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dsl::{critical_path_length, execute_final, DEFAULT_STEP_LIMIT};
    use rand::SeedableRng;

    fn plan(events: Vec<Event>) -> EventPlan {
        EventPlan {
            agents: vec![
                Agent { name: "Alice".into(), pronoun: Pronoun::She },
                Agent { name: "Bob".into(), pronoun: Pronoun::He },
            ],
            goods: Goods { singular: "apple".into(), plural: "apples".into() },
            initial: vec![5, 2],
            events,
            targets: vec![1],
        }
    }

    #[test]
    fn sentence_templates() {
        let p = plan(vec![
            Event::Give { from: 0, to: 1, qty: 3 },
            Event::GiveAll { from: 0, to: 1 },
            Event::Acquire { agent: 1, qty: 1 },
            Event::GiveAll { from: 1, to: 0 },
        ]);
        let s = p.sentences();
        assert_eq!(s[0], "Alice has 5 apples.");
        assert_eq!(s[2], "Alice gives Bob 3 apples.");
        assert_eq!(s[3], "Alice gives Bob everything she has.");
        assert_eq!(s[4], "Bob buys 1 apple.");
        assert_eq!(s[5], "Bob gives Alice everything he has.");
        assert_eq!(p.question(), "How many apples does Bob have at the end?");
    }

    #[test]
    fn give_all_zeroes_the_sender() {
        let p = plan(vec![Event::GiveAll { from: 0, to: 1 }]);
        assert_eq!(p.evaluate(), vec![0, 7]);
        let env = execute_final(&p.compile(), DEFAULT_STEP_LIMIT).unwrap();
        assert_eq!((env.get(v(0)), env.get(v(1))), (Some(0), Some(7)));
        assert_eq!(p.compile().op_count(), 2);
    }

    #[test]
    fn critical_plans_hit_the_requested_length() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        for (n_ops, path_len) in [(20, 5), (20, 20), (30, 15), (10, 0), (12, 1)] {
            let p = critical_plan(&mut rng, n_ops, 6, path_len, &[OpClass::AddSub, OpClass::Mov]).unwrap();
            let prog = p.compile();
            assert_eq!(prog.op_count(), n_ops);
            assert_eq!(critical_path_length(&prog, v(p.targets[0])).unwrap(), path_len);
        }
    }

    #[test]
    fn mov_only_plans() {
        let mut rng = ChaCha8Rng::seed_from_u64(9);
        let p = straight_line_plan(&mut rng, 10, 3, &[OpClass::Mov]).unwrap();
        assert!(p.events.iter().all(|e| matches!(e, Event::Match { .. })));
        let p = critical_plan(&mut rng, 20, 6, 10, &[OpClass::Mov]).unwrap();
        assert_eq!(critical_path_length(&p.compile(), v(p.targets[0])).unwrap(), 10);
    }

    #[test]
    fn infeasible_requests() {
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let ops = [OpClass::AddSub];
        assert!(critical_plan(&mut rng, 5, 6, 10, &ops).is_err());
        assert!(critical_plan(&mut rng, 10, 1, 5, &ops).is_err());
        assert!(parallel_plan(&mut rng, 10, 2, 3, &ops).is_err());
        assert!(straight_line_plan(&mut rng, 10, 3, &[OpClass::Logic]).is_err());
    }
}
