#![allow(dead_code)]

use std::path::PathBuf;
use std::process::{Command, Output};

use codesim::harness::{batch_prompts, Fixture, FixtureEntry, RunConfig};
use codesim::taskgen::Answer;

pub fn bin() -> PathBuf {
    PathBuf::from(env!("CARGO_BIN_EXE_codesim"))
}

pub fn cli(args: &[&str]) -> Output {
    Command::new(bin()).args(args).output().expect("binary runs")
}

/// A fixture answering every prompt of `config`, the first `wrong` of each
/// batch with an off-by-one integer and the rest correctly.
pub fn scripted_fixture(config: &RunConfig, wrong: usize) -> Fixture {
    let mut responses = Vec::new();
    for params in &config.grid {
        for batch in 1..=config.repeats {
            for (i, (instance, rendering, bundle)) in batch_prompts(config, params, batch).unwrap().into_iter().enumerate() {
                let truth = instance.truth(rendering).unwrap();
                let response = match truth {
                    Answer::Int(v) if i < wrong => format!("I traced it. Answer: {}", v + 1),
                    other => format!("Answer: {other}"),
                };
                responses.push(FixtureEntry {
                    instance_id: instance.id.clone(),
                    rendering: Some(rendering),
                    style: Some(bundle.style),
                    response,
                    input_tokens: Some(100),
                    output_tokens: Some(5),
                    token_logprobs: None,
                });
            }
        }
    }
    Fixture { delay_ms: 0, responses }
}
