//! Natural-language to JQL assistant.
//!
//! The crate holds everything that does not touch the network: the JQL
//! engine ([`jql`]), the issue model, the mock Jira store, prompt assembly,
//! the three-phase pipeline, a scripted chat backend and the evaluation
//! harness. HTTP transports live in `jiragpt-http`.

pub mod fixture;
pub mod issue;
pub mod jql;
pub mod mockjira;
pub mod par;
pub mod source;
pub mod vocab;
pub mod llm;
pub mod prompt;
pub mod pipeline;
pub mod eval;
