//! Scoring of model answers against ground truth.

mod extract;

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::taskgen::Answer;

pub use extract::{extract_answer, ExtractedAnswer};

#[derive(Debug, Error, PartialEq, Eq)]
pub enum MetricsError {
    #[error("no records to score")]
    EmptyInput,
    #[error("expected {expected} components, got {got}")]
    LengthMismatch { expected: usize, got: usize },
    #[error("record {0} carries no token counts")]
    MissingTokenCounts(usize),
    #[error("mean absolute error needs integer answers")]
    NotInteger,
    #[error("csv export failed: {0}")]
    Csv(String),
}

/// Anything scored against a ground truth.
pub trait Scored {
    fn truth(&self) -> &Answer;
    /// `None` when no answer could be extracted.
    fn predicted(&self) -> Option<&Answer>;

    fn is_correct(&self) -> bool {
        self.predicted() == Some(self.truth())
    }
}

impl Scored for (Answer, Option<Answer>) {
    fn truth(&self) -> &Answer {
        &self.0
    }
    fn predicted(&self) -> Option<&Answer> {
        self.1.as_ref()
    }
}

/// Fraction of exact matches; failed extractions count as wrong.
pub fn accuracy<R: Scored>(records: &[R]) -> Result<f64, MetricsError> {
    if records.is_empty() {
        return Err(MetricsError::EmptyInput);
    }
    Ok(records.iter().filter(|r| r.is_correct()).count() as f64 / records.len() as f64)
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct MaeReport {
    pub value: f64,
    pub scored: usize,
    /// Records without an extracted answer, left out of `value`.
    pub failures: usize,
}

/// Mean of `|pred - truth|` over records with an extracted integer answer.
pub fn mean_abs_error<R: Scored>(records: &[R]) -> Result<MaeReport, MetricsError> {
    let mut total = 0f64;
    let (mut scored, mut failures) = (0, 0);
    for r in records {
        let Answer::Int(truth) = r.truth() else {
            return Err(MetricsError::NotInteger);
        };
        match r.predicted() {
            Some(Answer::Int(p)) => {
                total += (p - truth).unsigned_abs() as f64;
                scored += 1;
            }
            Some(_) => return Err(MetricsError::NotInteger),
            None => failures += 1,
        }
    }
    if scored == 0 {
        return Err(MetricsError::EmptyInput);
    }
    Ok(MaeReport { value: total / scored as f64, scored, failures })
}

/// Unit-cost edit distance over whole elements.
pub fn levenshtein_distance<T: PartialEq>(a: &[T], b: &[T]) -> usize {
    let (a, b): (Vec<&T>, Vec<&T>) = (a.iter().collect(), b.iter().collect());
    strsim::generic_levenshtein(&a, &b)
}

/// `1 - distance / max(len)`; two empty sequences are identical.
pub fn levenshtein_similarity<T: PartialEq>(pred: &[T], truth: &[T]) -> f64 {
    let longest = pred.len().max(truth.len());
    if longest == 0 {
        return 1.0;
    }
    1.0 - levenshtein_distance(pred, truth) as f64 / longest as f64
}

/// Mean similarity over records; a failed extraction scores 0.
pub fn mean_similarity<R: Scored>(records: &[R]) -> Result<Option<f64>, MetricsError> {
    if records.is_empty() {
        return Err(MetricsError::EmptyInput);
    }
    let mut sum = 0.0;
    for r in records {
        let Some(truth) = r.truth().elements() else {
            return Ok(None);
        };
        sum += r
            .predicted()
            .and_then(Answer::elements)
            .map_or(0.0, |p| levenshtein_similarity(&p, &truth));
    }
    Ok(Some(sum / records.len() as f64))
}

/// Per-component error rate `delta` and the chance `(1 - delta)^k` of an
/// exact answer when each of `k` components fails independently.
pub fn approximation_delta(pred: &[i64], truth: &[i64], k: usize) -> Result<(f64, f64), MetricsError> {
    for len in [pred.len(), truth.len()] {
        if len != k {
            return Err(MetricsError::LengthMismatch { expected: k, got: len });
        }
    }
    if k == 0 {
        return Err(MetricsError::EmptyInput);
    }
    let matches = pred.iter().zip(truth).filter(|(p, t)| p == t).count();
    let delta = 1.0 - matches as f64 / k as f64;
    Ok((delta, (1.0 - delta).powi(k as i32)))
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct TokenStats {
    pub n: usize,
    pub total_input: u64,
    pub total_output: u64,
    pub mean_input: f64,
    pub mean_output: f64,
}

/// Token totals and means per group. Groups without records do not appear.
pub fn token_stats<K: Ord + Clone>(
    records: impl IntoIterator<Item = (K, Option<u64>, Option<u64>)>,
) -> Result<BTreeMap<K, TokenStats>, MetricsError> {
    let mut acc: BTreeMap<K, (usize, u64, u64)> = BTreeMap::new();
    for (i, (key, input, output)) in records.into_iter().enumerate() {
        let (Some(input), Some(output)) = (input, output) else {
            return Err(MetricsError::MissingTokenCounts(i));
        };
        let e = acc.entry(key).or_default();
        e.0 += 1;
        e.1 += input;
        e.2 += output;
    }
    Ok(acc
        .into_iter()
        .map(|(k, (n, i, o))| {
            let stats = TokenStats {
                n,
                total_input: i,
                total_output: o,
                mean_input: i as f64 / n as f64,
                mean_output: o as f64 / n as f64,
            };
            (k, stats)
        })
        .collect())
}

/// Why an answer was scored wrong.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ErrorCategory {
    ExtractionFailed,
    BackendError,
    /// Sorted output that drops some of the truth's elements.
    SkippedRepeats,
    WrongValue,
}

/// True when `pred` is sorted and a strict sub-multiset of `truth`.
pub fn skips_repeats(pred: &[i64], truth: &[i64]) -> bool {
    if pred.len() >= truth.len() || !pred.windows(2).all(|w| w[0] <= w[1]) {
        return false;
    }
    let mut counts: BTreeMap<i64, i64> = BTreeMap::new();
    for x in truth {
        *counts.entry(*x).or_default() += 1;
    }
    for x in pred {
        let c = counts.entry(*x).or_default();
        *c -= 1;
        if *c < 0 {
            return false;
        }
    }
    true
}

/// Category of a wrong answer, `None` when it is correct.
pub fn classify(predicted: Option<&Answer>, truth: &Answer) -> Option<ErrorCategory> {
    match (predicted, truth) {
        (None, _) => Some(ErrorCategory::ExtractionFailed),
        (Some(p), t) if p == t => None,
        (Some(Answer::Sequence(p)), Answer::Sequence(t)) if skips_repeats(p, t) => Some(ErrorCategory::SkippedRepeats),
        _ => Some(ErrorCategory::WrongValue),
    }
}

/// Mean and population standard deviation; the deviation needs two values.
pub fn mean_std(values: &[f64]) -> Option<(f64, Option<f64>)> {
    if values.is_empty() {
        return None;
    }
    let n = values.len() as f64;
    let mean = values.iter().sum::<f64>() / n;
    let std = (values.len() >= 2).then(|| (values.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / n).sqrt());
    Some((mean, std))
}

/// Pearson correlation; `None` for fewer than two points or a constant series.
pub fn pearson(xs: &[f64], ys: &[f64]) -> Option<f64> {
    if xs.len() != ys.len() || xs.len() < 2 {
        return None;
    }
    let (mx, _) = mean_std(xs)?;
    let (my, _) = mean_std(ys)?;
    let cov: f64 = xs.iter().zip(ys).map(|(x, y)| (x - mx) * (y - my)).sum();
    let vx: f64 = xs.iter().map(|x| (x - mx).powi(2)).sum();
    let vy: f64 = ys.iter().map(|y| (y - my).powi(2)).sum();
    if vx == 0.0 || vy == 0.0 {
        return None;
    }
    Some(cov / (vx * vy).sqrt())
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct GroupStat {
    pub mean: f64,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub stddev: Option<f64>,
    pub n: usize,
}

/// Metrics of one record set, with accuracy broken down by control value.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ScoreReport {
    pub family: String,
    pub accuracy: f64,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub mean_abs_error: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub levenshtein_similarity: Option<f64>,
    pub n: usize,
    pub failures: usize,
    pub by_group: BTreeMap<usize, GroupStat>,
}

impl ScoreReport {
    /// `records` are tagged with their control value and repeat index; each
    /// group's mean and deviation are taken over per-repeat accuracies.
    pub fn build<R: Scored>(family: &str, records: &[(usize, usize, R)]) -> Result<Self, MetricsError> {
        let plain: Vec<&R> = records.iter().map(|(_, _, r)| r).collect();
        let refs: Vec<(Answer, Option<Answer>)> =
            plain.iter().map(|r| (r.truth().clone(), r.predicted().cloned())).collect();
        let accuracy = accuracy(&refs)?;
        let mean_abs_error = mean_abs_error(&refs).ok().map(|m| m.value);
        let levenshtein_similarity = mean_similarity(&refs)?;
        let failures = refs.iter().filter(|r| r.1.is_none()).count();
        let mut parts: BTreeMap<usize, BTreeMap<usize, (usize, usize)>> = BTreeMap::new();
        for (control, repeat, r) in records {
            let e = parts.entry(*control).or_default().entry(*repeat).or_default();
            e.0 += r.is_correct() as usize;
            e.1 += 1;
        }
        let by_group = parts
            .into_iter()
            .map(|(control, reps)| {
                let accs: Vec<f64> = reps.values().map(|(c, n)| *c as f64 / *n as f64).collect();
                let (mean, stddev) = mean_std(&accs).expect("group has records");
                let n = reps.values().map(|(_, n)| n).sum();
                (control, GroupStat { mean, stddev, n })
            })
            .collect();
        Ok(ScoreReport {
            family: family.to_string(),
            accuracy,
            mean_abs_error,
            levenshtein_similarity,
            n: records.len(),
            failures,
            by_group,
        })
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("report serialises")
    }
}

#[derive(Serialize)]
struct CsvRow<'a> {
    family: &'a str,
    control_value: usize,
    mean: f64,
    stddev: Option<f64>,
    n: usize,
}

/// One row per group: family, control value, mean, stddev, n.
pub fn reports_to_csv(reports: &[ScoreReport]) -> Result<String, MetricsError> {
    let mut w = csv::Writer::from_writer(Vec::new());
    for r in reports {
        for (control, g) in &r.by_group {
            w.serialize(CsvRow { family: &r.family, control_value: *control, mean: g.mean, stddev: g.stddev, n: g.n })
                .map_err(|e| MetricsError::Csv(e.to_string()))?;
        }
    }
    let bytes = w.into_inner().map_err(|e| MetricsError::Csv(e.to_string()))?;
    Ok(String::from_utf8(bytes).expect("csv output is utf-8"))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn rec(t: i64, p: Option<i64>) -> (Answer, Option<Answer>) {
        (Answer::Int(t), p.map(Answer::Int))
    }

    #[test]
    fn accuracy_counts_failures_as_wrong() {
        let mut rs: Vec<_> = (0..6).map(|i| rec(i, Some(i))).collect();
        rs.extend((0..3).map(|i| rec(i, Some(i + 1))));
        rs.push(rec(0, None));
        assert_eq!(accuracy(&rs), Ok(0.6));
        assert_eq!(accuracy::<(Answer, Option<Answer>)>(&[]), Err(MetricsError::EmptyInput));
    }

    #[test]
    fn mae_cases() {
        assert_eq!(mean_abs_error(&[rec(5, Some(5)), rec(5, Some(7))]).unwrap().value, 1.0);
        assert_eq!(mean_abs_error(&[rec(-2, Some(10))]).unwrap().value, 12.0);
        let m = mean_abs_error(&[rec(1, Some(1)), rec(3, None)]).unwrap();
        assert_eq!((m.value, m.scored, m.failures), (0.0, 1, 1));
        assert_eq!(mean_abs_error(&[rec(1, None)]), Err(MetricsError::EmptyInput));
    }

    #[test]
    fn similarity_cases() {
        assert_eq!(levenshtein_similarity(&[1, 2, 3], &[1, 2, 3]), 1.0);
        assert_eq!(levenshtein_similarity::<i64>(&[], &[1, 2]), 0.0);
        assert_eq!(levenshtein_similarity::<i64>(&[], &[]), 1.0);
        assert!((levenshtein_similarity(&[1, 2, 3], &[1, 3]) - 2.0 / 3.0).abs() < 1e-12);
        assert_eq!(levenshtein_distance(&[10, 200], &[10, 20]), 1);
    }

    #[test]
    fn delta_cases() {
        assert_eq!(approximation_delta(&[1, 2], &[1, 2], 2), Ok((0.0, 1.0)));
        assert_eq!(approximation_delta(&[0, 0], &[1, 2], 2), Ok((1.0, 0.0)));
        assert_eq!(approximation_delta(&[1, 0, 3, 0], &[1, 2, 3, 4], 4), Ok((0.5, 0.0625)));
        assert!(approximation_delta(&[1], &[1, 2], 2).is_err());
    }

    #[test]
    fn token_groups() {
        let s = token_stats([(10, Some(50), Some(100)), (10, Some(70), Some(200)), (20, Some(90), Some(10))]).unwrap();
        assert_eq!(s[&10].mean_output, 150.0);
        assert_eq!(s[&10].mean_input, 60.0);
        assert!(!s.contains_key(&30));
        assert_eq!(token_stats([(1, None, Some(3))]), Err(MetricsError::MissingTokenCounts(0)));
    }

    #[test]
    fn skipped_repeats() {
        assert!(skips_repeats(&[1, 2, 3], &[1, 2, 2, 3]));
        assert!(!skips_repeats(&[1, 2, 2, 3], &[1, 2, 2, 3]));
        assert!(!skips_repeats(&[2, 1], &[1, 2, 2]));
        assert!(!skips_repeats(&[1, 4], &[1, 2, 2]));
        let t = Answer::Sequence(vec![1, 1, 5]);
        assert_eq!(classify(Some(&Answer::Sequence(vec![1, 5])), &t), Some(ErrorCategory::SkippedRepeats));
        assert_eq!(classify(Some(&t), &t), None);
        assert_eq!(classify(None, &t), Some(ErrorCategory::ExtractionFailed));
    }

    #[test]
    fn spread_and_correlation() {
        let (m, s) = mean_std(&[1.0, 0.9, 0.8]).unwrap();
        assert!((m - 0.9).abs() < 1e-12);
        assert!((s.unwrap() - 0.081_649_658).abs() < 1e-8);
        assert_eq!(mean_std(&[0.5]), Some((0.5, None)));
        let xs = [0.9, 0.7, 0.4, 0.3, 0.1];
        assert!((pearson(&xs, &xs).unwrap() - 1.0).abs() < 1e-12);
        assert_eq!(pearson(&[1.0, 1.0], &[1.0, 1.0]), None);
    }

    #[test]
    fn report_groups_and_csv() {
        let mut rs = Vec::new();
        for (rep, correct) in [(0, 10), (1, 9), (2, 8)] {
            for i in 0..10 {
                rs.push((10, rep, rec(i, Some(if i < correct { i } else { i + 1 }))));
            }
        }
        let r = ScoreReport::build("straight-line", &rs).unwrap();
        let g = r.by_group[&10];
        assert!((g.mean - 0.9).abs() < 1e-12);
        assert_eq!(g.n, 30);
        let csv = reports_to_csv(&[r]).unwrap();
        assert!(csv.starts_with("family,control_value,mean,stddev,n\nstraight-line,10,0.9"));
    }
}
