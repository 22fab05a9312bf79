//! Message generation: prompt chains over selected signals, constraint
//! checking, assembly into channel markup, and the four rendering
//! conditions.

mod assemble;
mod chain;
mod conditions;
pub mod markup;
mod message;
mod run;
mod validate;

use std::collections::{BTreeMap, BTreeSet};

pub use assemble::{assemble_message, protected_strings, render_mentions, AssemblyContext};
pub use chain::{
    build_prompt_chain, paper_gist, required_strings, CharLimits, MemberNames, PromptChain,
    PromptSpec, StageKind, SYNTHESIS_INSTRUCTION,
};
pub use conditions::{summary, template_body, template_sentence, SUMMARY_LIMIT};
pub use markup::split_sentences;
pub use message::{BotMessage, Condition, MetadataBlock};
pub use run::{hard_violations, run_chain, run_chain_with, ChainOutput, GenerationError};
pub use validate::{validate_message, MessageConstraints, RuleId, ValidationReport, Violation};

use crate::agent::recently_mentioned;
use crate::clients::{CompletionClient, PaperRecord};
use crate::kb::{ChannelState, Member, MemberId};
use crate::signals::SelectedSignals;

/// Everything needed to turn a selection into a message for one channel.
pub struct Generator<'a> {
    pub llm: &'a dyn CompletionClient,
    pub limits: CharLimits,
    pub max_retries: u32,
    pub members: BTreeMap<MemberId, Member>,
    /// Members under mention cooldown.
    pub blocked: BTreeSet<MemberId>,
    pub agent_id: String,
    pub permalink: &'a dyn Fn(u64) -> String,
    pub seed: u64,
}

impl<'a> Generator<'a> {
    pub fn for_channel(
        channel: &ChannelState,
        llm: &'a dyn CompletionClient,
        permalink: &'a dyn Fn(u64) -> String,
        seed: u64,
    ) -> Self {
        let cfg = &channel.config;
        Generator {
            llm,
            limits: cfg.char_limits,
            max_retries: cfg.max_retries,
            members: channel
                .members()
                .into_iter()
                .filter(|(id, _)| !channel.is_agent(id))
                .collect(),
            blocked: recently_mentioned(channel, cfg.mention_cooldown),
            agent_id: cfg.agent_id.clone(),
            permalink,
            seed,
        }
    }

    pub fn names(&self) -> MemberNames {
        self.blocked
            .iter()
            .fold(MemberNames::new().with_agent(&self.agent_id), |n, id| {
                let name = self.members.get(id).map_or(id.as_str(), |m| m.name());
                n.with_plain(id, name)
            })
    }

    pub fn chain(&self, paper: &PaperRecord, selected: &SelectedSignals) -> PromptChain {
        build_prompt_chain(paper, selected, &self.limits, &self.names())
    }

    fn assembly(&self) -> AssemblyContext<'_> {
        AssemblyContext {
            members: &self.members,
            blocked: &self.blocked,
            permalink: self.permalink,
        }
    }

    /// Seed for the `attempt`-th full pass; the first pass uses the base seed.
    pub fn attempt_seed(&self, attempt: u32) -> u64 {
        self.seed.wrapping_add(u64::from(attempt).wrapping_mul(0x9e37_79b9_7f4a_7c15))
    }

    pub fn constraints(
        &self,
        paper: &PaperRecord,
        selected: &SelectedSignals,
        condition: Condition,
    ) -> MessageConstraints {
        let mut c = MessageConstraints::new(self.members.keys().cloned().collect());
        c.cooldown_blocked = self.blocked.clone();
        c.thread_link = selected
            .paper_connection
            .as_ref()
            .and_then(|s| s.payload.prior())
            .map(|p| (self.permalink)(p.thread_seq));
        if condition == Condition::C4LlmSynthesis {
            let p4 = self.chain(paper, selected).synthesis().clone();
            c.max_len = Some(p4.char_limit);
            c.required = p4.required_strings;
            c.forbidden_bold = p4.forbidden_bold_strings;
        } else {
            c.forbidden_bold = protected_strings(selected, &[]);
        }
        c
    }

    /// Assembles `raw` as the given condition's message.
    pub fn assemble(
        &self,
        raw: &str,
        paper: &PaperRecord,
        selected: &SelectedSignals,
        condition: Condition,
    ) -> BotMessage {
        let extra = if condition == Condition::C4LlmSynthesis {
            self.chain(paper, selected).synthesis().forbidden_bold_strings.clone()
        } else {
            Vec::new()
        };
        assemble_message(raw, selected, paper, &self.assembly(), condition, &extra)
    }

    /// One pass of the chain for `attempt`. Synthesis limits are checked
    /// on the assembled body, since mention and link rendering can change
    /// its visible length.
    pub fn run(
        &self,
        paper: &PaperRecord,
        selected: &SelectedSignals,
        attempt: u32,
    ) -> Result<ChainOutput, GenerationError> {
        let finish = |kind: StageKind, text: &str| match kind {
            StageKind::P4Synthesis => self.assemble(text, paper, selected, Condition::C4LlmSynthesis).body,
            _ => text.to_string(),
        };
        run_chain_with(
            &self.chain(paper, selected),
            self.llm,
            self.attempt_seed(attempt),
            self.max_retries,
            &finish,
        )
    }

    /// Full chain output, retried as a whole until the assembled message
    /// validates. Never returns an invalid message.
    pub fn generate(
        &self,
        paper: &PaperRecord,
        selected: &SelectedSignals,
    ) -> Result<BotMessage, GenerationError> {
        let constraints = self.constraints(paper, selected, Condition::C4LlmSynthesis);
        let mut last = None;
        for attempt in 0..=self.max_retries {
            let out = self.run(paper, selected, attempt)?;
            let msg = self.assemble(&out.text, paper, selected, Condition::C4LlmSynthesis);
            let report = validate_message(&msg, &constraints);
            if report.ok {
                return Ok(msg);
            }
            log::debug!("generation attempt {attempt} invalid: {:?}", report.violations);
            last = Some(report);
        }
        Err(GenerationError::Invalid(last.unwrap_or_default()))
    }

    pub fn render_condition(
        &self,
        paper: &PaperRecord,
        selected: &SelectedSignals,
        condition: Condition,
    ) -> Result<BotMessage, GenerationError> {
        let none = SelectedSignals::default();
        match condition {
            Condition::C1Tldr => Ok(self.assemble(&summary(paper), paper, &none, condition)),
            Condition::C2Template => {
                Ok(self.assemble(&template_body(selected, &self.names()), paper, selected, condition))
            }
            Condition::C3TemplateTldr => {
                let c2 = self.render_condition(paper, selected, Condition::C2Template)?;
                let c1 = self.render_condition(paper, &none, Condition::C1Tldr)?;
                let body = if c2.body.is_empty() {
                    c1.body
                } else {
                    format!("{}\n\n{}", c2.body, c1.body)
                };
                Ok(BotMessage {
                    body,
                    condition,
                    ..c2
                })
            }
            Condition::C4LlmSynthesis => self.generate(paper, selected),
        }
    }
}
