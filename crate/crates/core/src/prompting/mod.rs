//! Prompt texts sent to model backends.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::algolib::{oracle_run, AlgorithmEntry, OracleInput, OracleOutput};
use crate::dsl::{execute_final, Program, VarId, DEFAULT_STEP_LIMIT};
use crate::taskgen::{join_variants, AnswerKind, PairedInstance, Rendering, TaskFamily};

/// Chain-of-simulation template; `@code@` and `@input@` are substituted.
pub const COSM_TEMPLATE: &str = include_str!("../../assets/templates/cosm.txt");

pub const COT_INSTRUCTION: &str = "Think step by step and reply with the final answer.";

/// `@input@` value for programs that take no input.
const NO_INPUT: &str = "None";

const PROBE_INSTRUCTION: &str =
    "Complete the following Python code. Continue exactly where it stops and reply with the missing lines only.";

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum PromptStyle {
    Direct,
    Cot,
    Cosm,
    FaultTolerantMulti,
    MemorisationProbe,
}

impl PromptStyle {
    pub const ALL: [PromptStyle; 5] = [
        PromptStyle::Direct,
        PromptStyle::Cot,
        PromptStyle::Cosm,
        PromptStyle::FaultTolerantMulti,
        PromptStyle::MemorisationProbe,
    ];

    pub fn name(self) -> &'static str {
        match self {
            PromptStyle::Direct => "direct",
            PromptStyle::Cot => "cot",
            PromptStyle::Cosm => "cosm",
            PromptStyle::FaultTolerantMulti => "fault-tolerant-multi",
            PromptStyle::MemorisationProbe => "memorisation-probe",
        }
    }

    /// Whether `build_prompt` accepts this style for the given instance and rendering.
    pub fn applies_to(self, instance: &PairedInstance, rendering: Rendering) -> bool {
        instance.has(rendering)
            && match self {
                PromptStyle::Direct | PromptStyle::Cot => true,
                PromptStyle::Cosm => rendering == Rendering::Synthetic,
                PromptStyle::FaultTolerantMulti => {
                    rendering == Rendering::Synthetic && instance.family == TaskFamily::FaultTolerant
                }
                PromptStyle::MemorisationProbe => false,
            }
    }
}

impl fmt::Display for PromptStyle {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for PromptStyle {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        PromptStyle::ALL
            .into_iter()
            .find(|p| p.name() == s || p.name().replace('-', "_") == s)
            .ok_or_else(|| format!("unknown prompt style `{s}`"))
    }
}

#[derive(Debug, Error, PartialEq)]
pub enum PromptError {
    #[error("style {style} cannot be used with the {rendering} rendering of {family}")]
    StyleMismatch { style: PromptStyle, rendering: Rendering, family: TaskFamily },
    #[error("instance {0} has no naturalistic rendering")]
    MissingRendering(String),
    #[error("at least two programs are needed, got {0}")]
    TooFewVariants(usize),
    #[error("programs disagree on {0}")]
    VariantsDisagree(VarId),
    #[error("source has {0} line(s); probing needs at least 4")]
    SourceTooShort(usize),
    #[error("truncation fraction {0} is outside (0, 1)")]
    BadFraction(f64),
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PromptBundle {
    pub instance_id: String,
    pub style: PromptStyle,
    pub user_text: String,
    /// Absent for completion probes, whose reply is code.
    pub answer_format: Option<AnswerKind>,
    /// Lines withheld from a memorisation probe.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub held_out: Option<String>,
}

fn answer_line(kind: AnswerKind) -> &'static str {
    match kind {
        AnswerKind::Int => "End your reply with a line of the form `Answer: <integer>`.",
        AnswerKind::Tuple | AnswerKind::Sequence => "End your reply with a line of the form `Answer: [<integer>, ...]`.",
        AnswerKind::Name => "End your reply with a line of the form `Answer: <name>`.",
    }
}

/// Fills the chain-of-simulation template.
pub fn render_cosm(code: &str, input: &str) -> String {
    COSM_TEMPLATE.replace("@input@", input).replace("@code@", code)
}

fn fenced(code: &str) -> String {
    format!("```python\n{code}\n```")
}

/// Task body followed by the question and the reasoning and answer instructions.
fn assemble(body: String, question: &str, cot: bool, kind: AnswerKind) -> String {
    let mut parts = vec![body, question.to_string()];
    if cot {
        parts.push(COT_INSTRUCTION.to_string());
    }
    parts.push(answer_line(kind).to_string());
    parts.join("\n\n")
}

fn cosm_input(instance: &PairedInstance, entry: Option<&AlgorithmEntry>) -> String {
    match (entry, &instance.sort_input) {
        (Some(e), Some(v)) => e.arguments(&OracleInput::Vector(v.clone())),
        _ => NO_INPUT.to_string(),
    }
}

pub fn build_prompt(
    instance: &PairedInstance,
    rendering: Rendering,
    style: PromptStyle,
) -> Result<PromptBundle, PromptError> {
    let mismatch = || PromptError::StyleMismatch { style, rendering, family: instance.family };
    if !instance.has(rendering) {
        return Err(PromptError::MissingRendering(instance.id.clone()));
    }
    if !style.applies_to(instance, rendering) {
        return Err(mismatch());
    }
    if style == PromptStyle::FaultTolerantMulti {
        let mut bundle = build_fault_tolerant(&instance.variants, instance.targets[0], PromptStyle::Direct)?;
        bundle.instance_id = instance.id.clone();
        bundle.style = style;
        return Ok(bundle);
    }
    let kind = instance.truth(rendering).map(|a| a.kind()).ok_or_else(mismatch)?;
    let question = instance.question(rendering).ok_or_else(mismatch)?;
    let user_text = match (rendering, style) {
        (Rendering::Naturalistic, _) => {
            let text = instance.naturalistic_text.clone().unwrap_or_default();
            assemble(text, question, style == PromptStyle::Cot, kind)
        }
        (Rendering::Synthetic, PromptStyle::Cosm) => {
            let entry = instance.algorithm.as_ref().and_then(|a| a.entry());
            let block = render_cosm(&instance.synthetic_source, &cosm_input(instance, entry));
            assemble(block, question, false, kind)
        }
        (Rendering::Synthetic, _) => {
            assemble(fenced(&instance.synthetic_source), question, style == PromptStyle::Cot, kind)
        }
    };
    Ok(PromptBundle { instance_id: instance.id.clone(), style, user_text, answer_format: Some(kind), held_out: None })
}

/// One prompt holding every program, asking for the value of `target` they share.
pub fn build_fault_tolerant(variants: &[Program], target: VarId, style: PromptStyle) -> Result<PromptBundle, PromptError> {
    if variants.len() < 2 {
        return Err(PromptError::TooFewVariants(variants.len()));
    }
    let values: Vec<Option<i64>> = variants
        .iter()
        .map(|p| execute_final(p, DEFAULT_STEP_LIMIT).ok().and_then(|env| env.get(target)))
        .collect();
    if values[0].is_none() || values.iter().any(|v| *v != values[0]) {
        return Err(PromptError::VariantsDisagree(target));
    }
    let code = join_variants(variants);
    let question = format!(
        "The {} programs above end with the same value of {target}. Run all of them and report that value.",
        variants.len()
    );
    let user_text = match style {
        PromptStyle::Direct | PromptStyle::FaultTolerantMulti => assemble(fenced(&code), &question, false, AnswerKind::Int),
        PromptStyle::Cot => assemble(fenced(&code), &question, true, AnswerKind::Int),
        PromptStyle::Cosm => assemble(render_cosm(&code, NO_INPUT), &question, false, AnswerKind::Int),
        PromptStyle::MemorisationProbe => {
            return Err(PromptError::StyleMismatch {
                style,
                rendering: Rendering::Synthetic,
                family: TaskFamily::FaultTolerant,
            })
        }
    };
    Ok(PromptBundle {
        instance_id: String::new(),
        style: PromptStyle::FaultTolerantMulti,
        user_text,
        answer_format: Some(AnswerKind::Int),
        held_out: None,
    })
}

/// Asks for the output of a corpus routine on `input`.
pub fn build_algorithm_prompt(
    entry: &AlgorithmEntry,
    input: &OracleInput,
    style: PromptStyle,
) -> Result<PromptBundle, PromptError> {
    let (kind, question) = match oracle_run(entry, input) {
        Ok(OracleOutput::Vector(_)) => (AnswerKind::Sequence, format!("What is the output of {}?", entry.call_expression(input))),
        Ok(OracleOutput::Bool(_)) => (
            AnswerKind::Int,
            format!("What is the output of {}? Reply 1 for True and 0 for False.", entry.call_expression(input)),
        ),
        _ => (AnswerKind::Int, format!("What is the output of {}?", entry.call_expression(input))),
    };
    let user_text = match style {
        PromptStyle::Direct => assemble(fenced(entry.source_text), &question, false, kind),
        PromptStyle::Cot => assemble(fenced(entry.source_text), &question, true, kind),
        PromptStyle::Cosm => assemble(render_cosm(entry.source_text, &entry.arguments(input)), &question, false, kind),
        _ => {
            return Err(PromptError::StyleMismatch {
                style,
                rendering: Rendering::Synthetic,
                family: TaskFamily::Sorting,
            })
        }
    };
    Ok(PromptBundle {
        instance_id: format!("{}_{}", entry.style, entry.name),
        style,
        user_text,
        answer_format: Some(kind),
        held_out: None,
    })
}

/// Shows the first lines of a corpus source and asks for the rest. The cut is
/// the line boundary nearest `fraction`, keeping at least one line on each side.
pub fn build_memorisation_probe(entry: &AlgorithmEntry, fraction: f64) -> Result<PromptBundle, PromptError> {
    if !(fraction > 0.0 && fraction < 1.0) {
        return Err(PromptError::BadFraction(fraction));
    }
    let lines: Vec<&str> = entry.source_text.lines().collect();
    let n = lines.len();
    if n < 4 {
        return Err(PromptError::SourceTooShort(n));
    }
    let cut = ((fraction * n as f64).round() as usize).clamp(1, n - 1);
    let prefix = lines[..cut].join("\n");
    Ok(PromptBundle {
        instance_id: format!("{}_{}_probe-{cut}of{n}", entry.style, entry.name),
        style: PromptStyle::MemorisationProbe,
        user_text: format!("{PROBE_INSTRUCTION}\n\n{}", fenced(&prefix)),
        answer_format: None,
        held_out: Some(lines[cut..].join("\n")),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::algolib::{classic_corpus, entry, Style};
    use crate::dsl::parse_source;
    use crate::taskgen::{generate_pair, GenParams};

    fn instance(family: TaskFamily) -> PairedInstance {
        generate_pair(&GenParams::new(family).with_seed(3)).unwrap()
    }

    #[test]
    fn direct_synthetic_has_code_and_one_question() {
        let inst = instance(TaskFamily::StraightLine);
        let b = build_prompt(&inst, Rendering::Synthetic, PromptStyle::Direct).unwrap();
        assert!(b.user_text.starts_with("```python\n"));
        assert!(b.user_text.contains(&inst.synthetic_source));
        assert!(b.user_text.contains(&format!("What is the value of {} at the end?", inst.targets[0])));
        assert!(!b.user_text.contains(COT_INSTRUCTION));
        assert_eq!(b.user_text.matches('?').count(), 1);
        assert_eq!(b.answer_format, Some(AnswerKind::Int));
    }

    #[test]
    fn cot_naturalistic_adds_the_instruction() {
        let inst = instance(TaskFamily::CriticalPath);
        let b = build_prompt(&inst, Rendering::Naturalistic, PromptStyle::Cot).unwrap();
        assert!(b.user_text.starts_with(inst.naturalistic_text.as_deref().unwrap()));
        assert!(b.user_text.contains(COT_INSTRUCTION));
        assert!(b.user_text.ends_with("`Answer: <integer>`."));
    }

    #[test]
    fn cosm_needs_code() {
        let inst = instance(TaskFamily::NestedLoops);
        let err = build_prompt(&inst, Rendering::Naturalistic, PromptStyle::Cosm).unwrap_err();
        assert!(matches!(err, PromptError::StyleMismatch { .. }));
        let b = build_prompt(&inst, Rendering::Synthetic, PromptStyle::Cosm).unwrap();
        assert!(b.user_text.contains("following input: None."));
    }

    #[test]
    fn cosm_on_sorting_passes_the_call_arguments() {
        let inst = instance(TaskFamily::Sorting);
        let b = build_prompt(&inst, Rendering::Synthetic, PromptStyle::Cosm).unwrap();
        let v = inst.sort_input.clone().unwrap();
        let args = inst.algorithm.as_ref().unwrap().entry().unwrap().arguments(&OracleInput::Vector(v));
        assert!(b.user_text.contains(&format!("following input: {args}.")));
        assert_eq!(b.answer_format, Some(AnswerKind::Sequence));
        let nat = build_prompt(&inst, Rendering::Naturalistic, PromptStyle::Direct).unwrap();
        assert_eq!(nat.answer_format, Some(AnswerKind::Name));
    }

    #[test]
    fn answer_formats_follow_the_family() {
        let inst = instance(TaskFamily::ParallelPaths);
        for r in Rendering::BOTH {
            let b = build_prompt(&inst, r, PromptStyle::Direct).unwrap();
            assert_eq!(b.answer_format, Some(AnswerKind::Tuple));
        }
        let inst = instance(TaskFamily::ApproximateLoops);
        assert!(matches!(
            build_prompt(&inst, Rendering::Naturalistic, PromptStyle::Direct),
            Err(PromptError::MissingRendering(_))
        ));
    }

    #[test]
    fn fault_tolerant_bundles() {
        let a = parse_source("a0=1\na1=2\na0 += 3\na1 -= 1").unwrap();
        let b = parse_source("a0=1\na1=2\na1 -= 1\na0 += 3").unwrap();
        let bundle = build_fault_tolerant(&[a.clone(), b.clone()], VarId(0), PromptStyle::Direct).unwrap();
        assert!(bundle.user_text.contains("# Program 1\n") && bundle.user_text.contains("# Program 2\n"));
        assert_eq!(bundle.answer_format, Some(AnswerKind::Int));
        assert_eq!(build_fault_tolerant(std::slice::from_ref(&a), VarId(0), PromptStyle::Direct), Err(PromptError::TooFewVariants(1)));
        let c = parse_source("a0=2\na1=2").unwrap();
        assert_eq!(build_fault_tolerant(&[a, c], VarId(0), PromptStyle::Direct), Err(PromptError::VariantsDisagree(VarId(0))));
    }

    #[test]
    fn fault_tolerant_instance_multi_style() {
        let mut p = GenParams::new(TaskFamily::FaultTolerant).with_seed(1);
        p.n_variants = 5;
        let inst = generate_pair(&p).unwrap();
        let b = build_prompt(&inst, Rendering::Synthetic, PromptStyle::FaultTolerantMulti).unwrap();
        assert_eq!(b.user_text.matches("# Program ").count(), 5);
        assert_eq!(b.instance_id, inst.id);
    }

    #[test]
    fn probes_split_at_the_nearest_line() {
        let e = entry("merge", Style::Iterative).unwrap();
        let n = e.line_count();
        let b = build_memorisation_probe(e, 0.5).unwrap();
        let held = b.held_out.clone().unwrap();
        assert_eq!(held.lines().count(), n - (n as f64 * 0.5).round() as usize);
        let prefix = b.user_text.split("```python\n").nth(1).unwrap().trim_end_matches("\n```");
        assert_eq!(format!("{prefix}\n{held}"), e.source_text.trim_end_matches('\n'));
        assert!(build_memorisation_probe(e, 1.0).is_err());
        let fib = classic_corpus().iter().find(|e| e.name == "fibonacci").unwrap();
        assert!(build_memorisation_probe(fib, 0.5).unwrap().held_out.is_some());
    }

    #[test]
    fn prompts_are_deterministic() {
        let inst = instance(TaskFamily::StraightLine);
        for style in [PromptStyle::Direct, PromptStyle::Cot, PromptStyle::Cosm] {
            assert_eq!(
                build_prompt(&inst, Rendering::Synthetic, style),
                build_prompt(&inst, Rendering::Synthetic, style)
            );
        }
    }
}
