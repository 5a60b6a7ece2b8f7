//! Memorisation probes on corpus routines.

use std::time::Instant;

use serde::{Deserialize, Serialize};

use super::{Backend, HarnessError, Request};
use crate::algolib::AlgorithmEntry;
use crate::prompting::{build_memorisation_probe, PromptStyle};
use crate::taskgen::{Answer, Rendering};

/// Mean of the lowest `k_percent` of the token log-likelihoods (at least one token).
pub fn memorisation_min_k(logprobs: Option<&[f64]>, k_percent: f64) -> Result<f64, HarnessError> {
    let values = logprobs.filter(|v| !v.is_empty()).ok_or(HarnessError::CapabilityMissing)?;
    if !(k_percent > 0.0 && k_percent <= 100.0) {
        return Err(HarnessError::Config(format!("k must be in (0, 100], got {k_percent}")));
    }
    let mut sorted = values.to_vec();
    sorted.sort_by(f64::total_cmp);
    let take = ((sorted.len() as f64 * k_percent / 100.0).ceil() as usize).clamp(1, sorted.len());
    Ok(sorted[..take].iter().sum::<f64>() / take as f64)
}

fn code_lines(text: &str) -> Vec<&str> {
    text.lines()
        .filter(|l| !l.trim_start().starts_with("```"))
        .map(str::trim_end)
        .filter(|l| !l.trim().is_empty())
        .collect()
}

fn lcs(a: &[&str], b: &[&str]) -> usize {
    let mut prev = vec![0usize; b.len() + 1];
    for x in a {
        let mut cur = vec![0usize; b.len() + 1];
        for (j, y) in b.iter().enumerate() {
            cur[j + 1] = if x == y { prev[j] + 1 } else { prev[j + 1].max(cur[j]) };
        }
        prev = cur;
    }
    prev[b.len()]
}

/// Share of the held-out lines the response reproduces in order (line-level
/// longest common subsequence over the held-out line count). Blank lines and
/// code fences are ignored.
pub fn verbatim_recovery(response: &str, held_out: &str) -> f64 {
    let truth = code_lines(held_out);
    if truth.is_empty() {
        return 1.0;
    }
    lcs(&code_lines(response), &truth) as f64 / truth.len() as f64
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ProbeRecord {
    pub name: String,
    pub style: String,
    pub fraction: f64,
    pub prompt: String,
    pub held_out: String,
    pub response: String,
    pub recovery: f64,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub token_logprobs: Option<Vec<f64>>,
    pub latency_ms: u64,
}

/// Sends a truncated corpus source and scores the completion.
pub async fn probe(backend: &Backend, entry: &AlgorithmEntry, fraction: f64) -> Result<ProbeRecord, HarnessError> {
    let bundle = build_memorisation_probe(entry, fraction)?;
    let held_out = bundle.held_out.clone().unwrap_or_default();
    // the oracle "answer" of a probe is the withheld text itself
    let truth = Answer::Name(held_out.clone());
    let req = Request {
        instance_id: &bundle.instance_id,
        rendering: Rendering::Synthetic,
        style: PromptStyle::MemorisationProbe,
        prompt: &bundle.user_text,
        truth: &truth,
    };
    let start = Instant::now();
    let reply = backend.complete(&req).await.map_err(|e| HarnessError::Config(e.to_string()))?;
    let latency_ms = start.elapsed().as_millis() as u64;
    let text = reply.text.strip_prefix("Answer: ").unwrap_or(&reply.text).to_string();
    Ok(ProbeRecord {
        name: entry.name.to_string(),
        style: entry.style.to_string(),
        fraction,
        prompt: bundle.user_text,
        recovery: verbatim_recovery(&text, &held_out),
        held_out,
        response: text,
        token_logprobs: reply.token_logprobs,
        latency_ms,
    })
}
