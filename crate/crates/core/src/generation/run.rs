use thiserror::Error;

use super::chain::{PromptChain, PromptSpec, StageKind};
use super::markup::{render_plain, visible_len};
use super::validate::ValidationReport;
use crate::clients::{ClientError, CompletionClient, CompletionRequest};

#[derive(Debug, Clone, PartialEq, Error)]
pub enum GenerationError {
    #[error("completion client: {0}")]
    Client(#[from] ClientError),
    #[error("stage {stage:?} failed its hard constraints after retries: {reasons:?}")]
    Failed { stage: StageKind, reasons: Vec<String> },
    #[error("assembled message is invalid: {0:?}")]
    Invalid(ValidationReport),
}

impl GenerationError {
    pub fn is_retryable(&self) -> bool {
        matches!(self, GenerationError::Client(e) if e.is_retryable())
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ChainOutput {
    pub stage_outputs: Vec<(StageKind, String)>,
    pub text: String,
}

fn stage_seed(seed: u64, stage: usize, attempt: u32) -> u64 {
    seed ^ ((stage as u64 + 1) << 32) ^ (u64::from(attempt) << 48)
}

/// Length and required-string checks, on visible text.
pub fn hard_violations(text: &str, spec: &PromptSpec) -> Vec<String> {
    let mut out = Vec::new();
    let len = visible_len(text);
    if len > spec.char_limit {
        out.push(format!("length {len} exceeds {}", spec.char_limit));
    }
    let plain = render_plain(text);
    for r in &spec.required_strings {
        if !plain.contains(r.as_str()) {
            out.push(format!("missing required string {r:?}"));
        }
    }
    if spec.kind == StageKind::P4Synthesis && plain.trim().is_empty() {
        out.push("empty output".into());
    }
    out
}

/// Runs the stages in order, splicing earlier outputs into synthesis.
/// Each stage gets `max_retries` extra attempts to meet its hard limits.
pub fn run_chain(
    chain: &PromptChain,
    llm: &dyn CompletionClient,
    seed: u64,
    max_retries: u32,
) -> Result<ChainOutput, GenerationError> {
    run_chain_with(chain, llm, seed, max_retries, &|_, text| text.to_string())
}

/// As [`run_chain`], but each stage's hard limits are checked on
/// `finish(kind, output)`, the form the text will finally be shown in.
pub fn run_chain_with(
    chain: &PromptChain,
    llm: &dyn CompletionClient,
    seed: u64,
    max_retries: u32,
    finish: &dyn Fn(StageKind, &str) -> String,
) -> Result<ChainOutput, GenerationError> {
    let mut outputs: Vec<(StageKind, String)> = Vec::new();
    for (i, spec) in chain.stages.iter().enumerate() {
        let earlier: Vec<String> = outputs.iter().map(|(_, o)| o.clone()).collect();
        let prompt = spec.instantiate(&earlier);
        let mut reasons = Vec::new();
        let mut accepted = None;
        let mut budget = spec.char_limit;
        for attempt in 0..=max_retries {
            // a retry after finishing overshot leaves room for what finishing adds
            let stated = format!("at most {} characters", spec.char_limit);
            let request = CompletionRequest {
                prompt: prompt.replace(&stated, &format!("at most {budget} characters")),
                max_output_chars: budget,
                seed: stage_seed(seed, i, attempt),
            };
            let mut out = llm.complete(&request)?.trim().to_string();
            if spec.kind == StageKind::P3Member && out == "NONE" {
                out.clear();
            }
            let finished = finish(spec.kind, &out);
            reasons = hard_violations(&finished, spec);
            if reasons.is_empty() {
                accepted = Some(out);
                break;
            }
            let over = visible_len(&finished).saturating_sub(spec.char_limit);
            let growth = visible_len(&finished).saturating_sub(visible_len(&out));
            budget = budget
                .saturating_sub(over)
                .min(spec.char_limit.saturating_sub(growth))
                .max(1);
            log::debug!("stage {:?} attempt {attempt}: {reasons:?}", spec.kind);
        }
        match accepted {
            Some(out) => outputs.push((spec.kind, out)),
            None => {
                return Err(GenerationError::Failed {
                    stage: spec.kind,
                    reasons,
                })
            }
        }
    }
    let text = outputs.last().map(|(_, o)| o.clone()).unwrap_or_default();
    Ok(ChainOutput {
        stage_outputs: outputs,
        text,
    })
}
