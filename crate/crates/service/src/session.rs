//! One user's evolution run as a serialized state machine.
//!
//! Every transition appends a [`LogRecord`]. Replaying those records against
//! the same model registry rebuilds the session bit for bit, because all
//! randomness comes from a single ChaCha stream seeded at creation.

use std::collections::HashSet;
use std::io::{BufRead, Write};

use deepie_core::evolution::{init_population, next_generation};
use deepie_core::{EvolutionParams, Member, MemberId, MutationMagnitude, Population};
use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::error::{RestoreError, SessionError};
use crate::log::{AdvancePayload, BestPayload, CreatePayload, Event, LogRecord, ReviewPayload};
use crate::registry::ModelRegistry;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SessionStatus {
    Active,
    Reviewing,
    Closed,
}

/// Snapshot of one displayed generation and what the user did with it.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct GenerationRecord {
    pub generation: u64,
    pub members: Vec<Member>,
    /// Indices the user kept; empty until the generation is advanced.
    pub selected: Vec<usize>,
    /// Magnitude used to advance; `None` for the current generation.
    pub mutation_std: Option<f64>,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct ReviewEntry {
    pub generation: u64,
    pub member_index: usize,
    pub member_id: MemberId,
}

/// Every image the user ever selected, in a seeded random order.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ReviewSet {
    pub seed: u64,
    pub entries: Vec<ReviewEntry>,
    pub pick: Option<usize>,
}

#[derive(Clone, Debug)]
pub struct Session {
    id: String,
    model_id: String,
    params: EvolutionParams,
    seed: u64,
    rng: ChaCha8Rng,
    population: Population,
    history: Vec<GenerationRecord>,
    status: SessionStatus,
    review: Option<ReviewSet>,
    ratio: Option<f64>,
    created_ms: u64,
    updated_ms: u64,
    log: Vec<LogRecord>,
}

impl Session {
    pub fn create(
        registry: &ModelRegistry,
        id: String,
        model_id: &str,
        params: EvolutionParams,
        seed: u64,
        now_ms: u64,
    ) -> Result<Self, SessionError> {
        let entry = registry.get(model_id).ok_or_else(|| SessionError::UnknownModel(model_id.to_owned()))?;
        params.validate().map_err(|e| SessionError::Validation(e.to_string()))?;
        if !entry.generator.accepts_latent_dim(params.n) {
            return Err(SessionError::Validation(format!(
                "model {model_id:?} cannot render latents of length {}",
                params.n
            )));
        }
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let population = init_population(&params, &mut rng)?;
        let mut session = Self {
            id: id.clone(),
            model_id: model_id.to_owned(),
            params,
            seed,
            rng,
            history: vec![GenerationRecord {
                generation: 0,
                members: population.members.clone(),
                selected: Vec::new(),
                mutation_std: None,
            }],
            population,
            status: SessionStatus::Active,
            review: None,
            ratio: None,
            created_ms: now_ms,
            updated_ms: now_ms,
            log: Vec::new(),
        };
        session.record(Event::Create(CreatePayload {
            session_id: id,
            model_id: model_id.to_owned(),
            params,
            seed,
            at_ms: now_ms,
        }));
        Ok(session)
    }

    pub fn id(&self) -> &str {
        &self.id
    }

    pub fn model_id(&self) -> &str {
        &self.model_id
    }

    pub fn params(&self) -> &EvolutionParams {
        &self.params
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }

    pub fn population(&self) -> &Population {
        &self.population
    }

    pub fn generation(&self) -> u64 {
        self.population.generation
    }

    pub fn history(&self) -> &[GenerationRecord] {
        &self.history
    }

    pub fn status(&self) -> SessionStatus {
        self.status
    }

    pub fn review(&self) -> Option<&ReviewSet> {
        self.review.as_ref()
    }

    pub fn ratio(&self) -> Option<f64> {
        self.ratio
    }

    pub fn created_ms(&self) -> u64 {
        self.created_ms
    }

    pub fn updated_ms(&self) -> u64 {
        self.updated_ms
    }

    pub fn log(&self) -> &[LogRecord] {
        &self.log
    }

    /// RNG words consumed so far.
    pub fn rng_counter(&self) -> u64 {
        u64::try_from(self.rng.get_word_pos()).expect("RNG position fits in u64")
    }

    pub fn require_status(&self, required: SessionStatus) -> Result<(), SessionError> {
        if self.status == required {
            Ok(())
        } else {
            Err(SessionError::WrongStatus { required, actual: self.status })
        }
    }

    /// Applies the user's selection and returns the new generation index.
    pub fn advance(
        &mut self,
        selected: &[usize],
        mutation_std: f64,
        expected_generation: u64,
        now_ms: u64,
    ) -> Result<u64, SessionError> {
        self.require_status(SessionStatus::Active)?;
        if expected_generation != self.generation() {
            return Err(SessionError::StaleGeneration { expected: expected_generation, actual: self.generation() });
        }
        if selected.is_empty() {
            return Err(SessionError::Validation("at least one image must be selected".into()));
        }
        if !(0.0..=1.0).contains(&mutation_std) {
            return Err(SessionError::Validation(format!("mutation_std {mutation_std} must lie in [0, 1]")));
        }
        let mag = MutationMagnitude::new(mutation_std).map_err(|e| SessionError::Validation(e.to_string()))?;
        let next = next_generation(&self.population, selected, mag, &self.params, &mut self.rng)
            .map_err(|e| SessionError::Validation(e.to_string()))?;

        let current = self.history.last_mut().expect("history is never empty");
        current.selected = selected.to_vec();
        current.mutation_std = Some(mutation_std);
        self.history.push(GenerationRecord {
            generation: next.generation,
            members: next.members.clone(),
            selected: Vec::new(),
            mutation_std: None,
        });
        self.population = next;
        self.updated_ms = now_ms;
        let generation = self.generation();
        self.record(Event::Advance(AdvancePayload {
            expected_generation,
            selected: selected.to_vec(),
            mutation_std,
            generation,
            population_digest: population_digest(&self.population),
            at_ms: now_ms,
        }));
        Ok(generation)
    }

    /// Ends evolution and builds the blinded review. Without `review_seed` one is drawn from the session RNG.
    pub fn start_review(
        &mut self,
        expected_generation: Option<u64>,
        review_seed: Option<u64>,
        now_ms: u64,
    ) -> Result<&ReviewSet, SessionError> {
        self.require_status(SessionStatus::Active)?;
        if let Some(expected) = expected_generation.filter(|&g| g != self.generation()) {
            return Err(SessionError::StaleGeneration { expected, actual: self.generation() });
        }
        if self.generation() == 0 {
            return Err(SessionError::Validation("no generation has been advanced yet".into()));
        }
        let seed = review_seed.unwrap_or_else(|| self.rng.random());
        let entries = review_entries(&self.history, seed);
        self.status = SessionStatus::Reviewing;
        self.updated_ms = now_ms;
        let count = entries.len();
        self.review = Some(ReviewSet { seed, entries, pick: None });
        self.record(Event::Review(ReviewPayload { review_seed: seed, entries: count, at_ms: now_ms }));
        Ok(self.review.as_ref().expect("just set"))
    }

    /// Records the review pick and returns `(generation + 1) / generations advanced`.
    pub fn submit_best(&mut self, position: usize, now_ms: u64) -> Result<f64, SessionError> {
        self.require_status(SessionStatus::Reviewing)?;
        let review = self.review.as_mut().expect("reviewing sessions carry a review set");
        let entry = *review
            .entries
            .get(position)
            .ok_or(SessionError::InvalidPosition { position, len: review.entries.len() })?;
        review.pick = Some(position);
        let ratio = best_iteration_ratio(entry.generation, self.population.generation);
        self.ratio = Some(ratio);
        self.status = SessionStatus::Closed;
        self.updated_ms = now_ms;
        self.record(Event::Best(BestPayload { position, generation: entry.generation, ratio, at_ms: now_ms }));
        Ok(ratio)
    }

    /// Latent of a member shown in a past or current generation.
    pub fn member(&self, generation: u64, index: usize) -> Option<&Member> {
        self.history.get(generation as usize)?.members.get(index)
    }

    pub fn persist<W: Write>(&self, mut out: W) -> std::io::Result<()> {
        for record in &self.log {
            serde_json::to_writer(&mut out, record)?;
            out.write_all(b"\n")?;
        }
        out.flush()
    }

    /// Rebuilds a session by replaying its log. Every record's RNG counter is checked.
    pub fn restore<R: BufRead>(input: R, registry: &ModelRegistry) -> Result<Self, RestoreError> {
        let mut session: Option<Session> = None;
        for (i, line) in input.lines().enumerate() {
            let line_no = i + 1;
            let fail = |reason: String| RestoreError { line: line_no, reason };
            let line = line.map_err(|e| fail(e.to_string()))?;
            if line.trim().is_empty() {
                continue;
            }
            let record: LogRecord =
                serde_json::from_str(&line).map_err(|e| fail(format!("corrupt record: {e}")))?;
            let expected_seq = session.as_ref().map_or(0, |s| s.log.len() as u64);
            if record.seq != expected_seq {
                return Err(fail(format!("sequence number {} where {} was expected", record.seq, expected_seq)));
            }
            let applied = match (&mut session, &record.event) {
                (None, Event::Create(p)) => {
                    Session::create(registry, p.session_id.clone(), &p.model_id, p.params, p.seed, p.at_ms)
                        .map(|s| session = Some(s))
                }
                (None, other) => return Err(fail(format!("log starts with {:?} instead of create", other.kind()))),
                (Some(_), Event::Create(_)) => return Err(fail("duplicate create record".into())),
                (Some(s), Event::Advance(p)) => s.advance(&p.selected, p.mutation_std, p.expected_generation, p.at_ms).map(drop),
                (Some(s), Event::Review(p)) => s.start_review(None, Some(p.review_seed), p.at_ms).map(drop),
                (Some(s), Event::Best(p)) => s.submit_best(p.position, p.at_ms).map(drop),
            };
            applied.map_err(|e| fail(format!("replaying {}: {e}", record.event.kind())))?;
            let s = session.as_ref().expect("create applied");
            let replayed = s.log.last().expect("replay appended a record");
            if replayed != &record {
                return Err(fail(format!(
                    "replay diverged from the logged {} record (logged rng_counter {}, replayed {})",
                    record.event.kind(),
                    record.rng_counter,
                    replayed.rng_counter
                )));
            }
        }
        session.ok_or(RestoreError { line: 0, reason: "empty log".into() })
    }

    fn record(&mut self, event: Event) {
        let record = LogRecord { seq: self.log.len() as u64, event, rng_counter: self.rng_counter() };
        self.log.push(record);
    }
}

/// `(generation + 1) / advanced`: a pick from the last displayed-and-advanced generation scores 1.
pub fn best_iteration_ratio(picked_generation: u64, advanced: u64) -> f64 {
    (picked_generation + 1) as f64 / advanced as f64
}

/// Hex SHA-256 prefix of member ids and latent bit patterns, in order.
pub fn population_digest(population: &Population) -> String {
    let mut hasher = Sha256::new();
    hasher.update(population.generation.to_le_bytes());
    for member in &population.members {
        hasher.update(member.id.0.to_le_bytes());
        for v in member.values.as_slice() {
            hasher.update(v.to_bits().to_le_bytes());
        }
    }
    hasher.finalize()[..8].iter().map(|b| format!("{b:02x}")).collect()
}

fn review_entries(history: &[GenerationRecord], seed: u64) -> Vec<ReviewEntry> {
    let mut seen = HashSet::new();
    let mut entries: Vec<ReviewEntry> = history
        .iter()
        .flat_map(|record| {
            record.selected.iter().map(move |&index| ReviewEntry {
                generation: record.generation,
                member_index: index,
                member_id: record.members[index].id,
            })
        })
        .filter(|e| seen.insert(e.member_id))
        .collect();
    entries.shuffle(&mut ChaCha8Rng::seed_from_u64(seed));
    entries
}
