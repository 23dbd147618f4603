//! JSON-lines transition log: one `{seq, kind, payload, rng_counter}` object per line.

use deepie_core::EvolutionParams;
use serde::{Deserialize, Serialize};

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct LogRecord {
    /// 0-based position in the session's log.
    pub seq: u64,
    #[serde(flatten)]
    pub event: Event,
    /// Session RNG position (32-bit words consumed) after the transition.
    pub rng_counter: u64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", content = "payload", rename_all = "snake_case")]
pub enum Event {
    Create(CreatePayload),
    Advance(AdvancePayload),
    Review(ReviewPayload),
    Best(BestPayload),
}

impl Event {
    pub fn kind(&self) -> &'static str {
        match self {
            Event::Create(_) => "create",
            Event::Advance(_) => "advance",
            Event::Review(_) => "review",
            Event::Best(_) => "best",
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CreatePayload {
    pub session_id: String,
    pub model_id: String,
    pub params: EvolutionParams,
    pub seed: u64,
    pub at_ms: u64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct AdvancePayload {
    pub expected_generation: u64,
    pub selected: Vec<usize>,
    pub mutation_std: f64,
    /// Generation index after the advance.
    pub generation: u64,
    /// SHA-256 prefix over the resulting population's ids and latent bits.
    pub population_digest: String,
    pub at_ms: u64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ReviewPayload {
    pub review_seed: u64,
    pub entries: usize,
    pub at_ms: u64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct BestPayload {
    pub position: usize,
    /// Generation the picked image was shown in.
    pub generation: u64,
    pub ratio: f64,
    pub at_ms: u64,
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn record_shape_on_the_wire() {
        let record = LogRecord {
            seq: 3,
            event: Event::Best(BestPayload { position: 1, generation: 4, ratio: 0.5, at_ms: 10 }),
            rng_counter: 99,
        };
        let line = serde_json::to_string(&record).unwrap();
        let value: serde_json::Value = serde_json::from_str(&line).unwrap();
        assert_eq!(value["seq"], 3);
        assert_eq!(value["kind"], "best");
        assert_eq!(value["payload"]["ratio"], 0.5);
        assert_eq!(value["rng_counter"], 99);
        assert_eq!(serde_json::from_str::<LogRecord>(&line).unwrap(), record);
    }
}
