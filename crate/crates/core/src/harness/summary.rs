//! Aggregation of run records into per-group summaries.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use super::{HarnessError, RunRecord};
use crate::metrics::{mean_abs_error, mean_similarity, mean_std, pearson, token_stats, ErrorCategory, TokenStats};
use crate::prompting::PromptStyle;
use crate::taskgen::{Rendering, TaskFamily};

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RunSummary {
    pub family: TaskFamily,
    pub control_value: usize,
    pub rendering: Rendering,
    pub style: PromptStyle,
    pub n: usize,
    pub repeats: usize,
    /// Mean over per-repeat accuracies.
    pub accuracy: f64,
    /// Population deviation over repeats; needs at least two.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub accuracy_stddev: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub mean_abs_error: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub levenshtein_similarity: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub tokens: Option<TokenStats>,
    pub failures: BTreeMap<ErrorCategory, usize>,
}

/// Synthetic against naturalistic accuracy across a family's grid.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Correlation {
    pub family: TaskFamily,
    pub style: PromptStyle,
    pub control_values: Vec<usize>,
    pub synthetic: Vec<f64>,
    pub naturalistic: Vec<f64>,
    /// Absent for fewer than two points or a constant series.
    pub pearson: Option<f64>,
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct Scoreboard {
    pub summaries: Vec<RunSummary>,
    pub correlations: Vec<Correlation>,
}

type GroupKey = (TaskFamily, usize, &'static str, &'static str);

fn key(r: &RunRecord) -> GroupKey {
    (r.family, r.control_value, super::rendering_name(r.rendering), r.style.name())
}

fn family_order(f: TaskFamily) -> usize {
    TaskFamily::ALL.iter().position(|x| *x == f).unwrap_or(usize::MAX)
}

/// Groups records by family, control value, rendering and style. Each
/// group's accuracy is averaged over its batches (repeats).
pub fn score(records: &[RunRecord]) -> Result<Scoreboard, HarnessError> {
    if records.is_empty() {
        return Err(HarnessError::EmptyInput);
    }
    let mut groups: BTreeMap<(usize, GroupKey), Vec<&RunRecord>> = BTreeMap::new();
    for r in records {
        groups.entry((family_order(r.family), key(r))).or_default().push(r);
    }
    let mut summaries = Vec::with_capacity(groups.len());
    for rs in groups.values() {
        let first = rs[0];
        let mut by_batch: BTreeMap<usize, (usize, usize)> = BTreeMap::new();
        for r in rs {
            let e = by_batch.entry(r.batch).or_default();
            e.0 += r.correct as usize;
            e.1 += 1;
        }
        let accs: Vec<f64> = by_batch.values().map(|(c, n)| *c as f64 / *n as f64).collect();
        let (accuracy, accuracy_stddev) = mean_std(&accs).expect("group is nonempty");
        let owned: Vec<RunRecord> = rs.iter().map(|r| (*r).clone()).collect();
        let tokens = token_stats(rs.iter().map(|r| ((), r.input_tokens, r.output_tokens)))
            .ok()
            .and_then(|m| m.get(&()).copied());
        let mut failures = BTreeMap::new();
        for r in rs {
            if let Some(e) = r.error {
                *failures.entry(e).or_insert(0) += 1;
            }
        }
        summaries.push(RunSummary {
            family: first.family,
            control_value: first.control_value,
            rendering: first.rendering,
            style: first.style,
            n: rs.len(),
            repeats: by_batch.len(),
            accuracy,
            accuracy_stddev,
            mean_abs_error: mean_abs_error(&owned).ok().map(|m| m.value),
            levenshtein_similarity: mean_similarity(&owned).ok().flatten(),
            tokens,
            failures,
        });
    }
    Ok(Scoreboard { correlations: correlations(&summaries), summaries })
}

/// Synthetic and naturalistic accuracy per control value.
type Series = BTreeMap<usize, [Option<f64>; 2]>;

fn correlations(summaries: &[RunSummary]) -> Vec<Correlation> {
    let mut series: BTreeMap<(usize, &'static str), (TaskFamily, PromptStyle, Series)> = BTreeMap::new();
    for s in summaries {
        let e = series
            .entry((family_order(s.family), s.style.name()))
            .or_insert_with(|| (s.family, s.style, BTreeMap::new()));
        let slot = match s.rendering {
            Rendering::Synthetic => 0,
            Rendering::Naturalistic => 1,
        };
        e.2.entry(s.control_value).or_default()[slot] = Some(s.accuracy);
    }
    series
        .into_values()
        .filter_map(|(family, style, points)| {
            let paired: Vec<(usize, f64, f64)> =
                points.into_iter().filter_map(|(c, [s, n])| Some((c, s?, n?))).collect();
            if paired.is_empty() {
                return None;
            }
            let synthetic: Vec<f64> = paired.iter().map(|p| p.1).collect();
            let naturalistic: Vec<f64> = paired.iter().map(|p| p.2).collect();
            Some(Correlation {
                family,
                style,
                control_values: paired.iter().map(|p| p.0).collect(),
                pearson: pearson(&synthetic, &naturalistic),
                synthetic,
                naturalistic,
            })
        })
        .collect()
}

#[derive(Serialize)]
struct SummaryRow<'a> {
    family: &'a str,
    control_variable: &'a str,
    control_value: usize,
    rendering: String,
    style: &'a str,
    mean: f64,
    stddev: Option<f64>,
    n: usize,
    mean_abs_error: Option<f64>,
    levenshtein_similarity: Option<f64>,
    mean_input_tokens: Option<f64>,
    mean_output_tokens: Option<f64>,
}

/// Accuracy against control value, one row per group.
pub fn summaries_to_csv(summaries: &[RunSummary]) -> Result<String, HarnessError> {
    let mut w = csv::Writer::from_writer(Vec::new());
    for s in summaries {
        w.serialize(SummaryRow {
            family: s.family.slug(),
            control_variable: s.family.control_variable(),
            control_value: s.control_value,
            rendering: s.rendering.to_string(),
            style: s.style.name(),
            mean: s.accuracy,
            stddev: s.accuracy_stddev,
            n: s.n,
            mean_abs_error: s.mean_abs_error,
            levenshtein_similarity: s.levenshtein_similarity,
            mean_input_tokens: s.tokens.map(|t| t.mean_input),
            mean_output_tokens: s.tokens.map(|t| t.mean_output),
        })
        .map_err(|e| HarnessError::Config(e.to_string()))?;
    }
    let bytes = w.into_inner().map_err(|e| HarnessError::Config(e.to_string()))?;
    Ok(String::from_utf8(bytes).expect("csv output is utf-8"))
}

/// Token statistics per family, rendering, style and control value.
pub fn token_table(records: &[RunRecord]) -> Result<String, HarnessError> {
    let stats = token_stats(records.iter().map(|r| {
        ((family_order(r.family), r.family.slug(), r.rendering.to_string(), r.style.name(), r.control_value), r.input_tokens, r.output_tokens)
    }))
    .map_err(|e| HarnessError::Config(e.to_string()))?;
    let mut w = csv::Writer::from_writer(Vec::new());
    w.write_record(["family", "rendering", "style", "control_value", "n", "mean_input_tokens", "mean_output_tokens", "total_output_tokens"])
        .map_err(|e| HarnessError::Config(e.to_string()))?;
    for ((_, family, rendering, style, control), t) in stats {
        w.write_record([
            family.to_string(),
            rendering,
            style.to_string(),
            control.to_string(),
            t.n.to_string(),
            t.mean_input.to_string(),
            t.mean_output.to_string(),
            t.total_output.to_string(),
        ])
        .map_err(|e| HarnessError::Config(e.to_string()))?;
    }
    let bytes = w.into_inner().map_err(|e| HarnessError::Config(e.to_string()))?;
    Ok(String::from_utf8(bytes).expect("csv output is utf-8"))
}
