//! The selection protocol driven over HTTP against a running service,
//! ending with the blinded review and a best pick.

use std::time::Instant;

use base64::Engine;
use deepie_core::generator::Shape;
use deepie_core::Image;
use reqwest::blocking::{Client, Response};
use serde::de::DeserializeOwned;
use serde::{Deserialize, Serialize};
use serde_json::{json, Value};

use crate::run::{Prepared, Trajectory};
use crate::SimError;

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct RemoteRun {
    pub session_id: String,
    pub trajectory: Trajectory,
    pub review_size: usize,
    /// Ratio returned by the service for the review pick.
    pub service_ratio: f64,
}

#[derive(Deserialize)]
struct ModelInfo {
    id: String,
    output: Shape,
}

#[derive(Deserialize)]
struct Encoded {
    png_base64: String,
}

#[derive(Deserialize)]
struct Generation {
    generation: u64,
    images: Vec<Encoded>,
}

pub struct ServiceClient {
    base: String,
    http: Client,
}

impl ServiceClient {
    pub fn new(base: &str) -> Self {
        Self { base: base.trim_end_matches('/').to_owned(), http: Client::new() }
    }

    fn read<T: DeserializeOwned>(resp: reqwest::Result<Response>) -> Result<T, SimError> {
        let resp = resp.map_err(|e| SimError::Service(e.to_string()))?;
        let status = resp.status();
        let body: Value = resp.json().map_err(|e| SimError::Service(e.to_string()))?;
        if !status.is_success() {
            return Err(SimError::Service(format!("{status}: {body}")));
        }
        serde_json::from_value(body).map_err(|e| SimError::Service(e.to_string()))
    }

    fn get<T: DeserializeOwned>(&self, path: &str) -> Result<T, SimError> {
        Self::read(self.http.get(format!("{}{path}", self.base)).send())
    }

    fn post<T: DeserializeOwned>(&self, path: &str, body: Value) -> Result<T, SimError> {
        Self::read(self.http.post(format!("{}{path}", self.base)).json(&body).send())
    }

    /// Output shape of a registered model.
    pub fn model_shape(&self, model_id: &str) -> Result<Shape, SimError> {
        let models: Vec<ModelInfo> = self.get("/models")?;
        models
            .into_iter()
            .find(|m| m.id == model_id)
            .map(|m| m.output)
            .ok_or_else(|| SimError::Service(format!("model {model_id:?} is not served")))
    }

    fn decode(&self, encoded: &[String], like: &Image) -> Result<Vec<Image>, SimError> {
        encoded
            .iter()
            .map(|b64| {
                let png = base64::engine::general_purpose::STANDARD
                    .decode(b64)
                    .map_err(|e| SimError::Service(format!("bad base64: {e}")))?;
                Ok(Image::from_encoded(&png, like.width(), like.height(), like.channels())?)
            })
            .collect()
    }

    fn distances(&self, encoded: &[String], target: &Image) -> Result<Vec<f64>, SimError> {
        self.decode(encoded, target)?.iter().map(|img| Ok(img.distance(target)?)).collect()
    }

    /// One full session for `seed`: selection rounds, review, then the nearest review image as best.
    pub fn run(&self, model_id: &str, prepared: &Prepared, seed: u64) -> Result<RemoteRun, SimError> {
        let start = Instant::now();
        let config = &prepared.config;
        #[derive(Deserialize)]
        struct Created {
            session_id: String,
        }
        let created: Created = self.post(
            "/sessions",
            json!({"model_id": model_id, "seed": seed, "params": config.params}),
        )?;
        let id = created.session_id;

        let mut best = Vec::with_capacity(config.generations);
        for round in 0..config.generations {
            let gen: Generation = self.get(&format!("/sessions/{id}/generation"))?;
            let encoded: Vec<String> = gen.images.into_iter().map(|e| e.png_base64).collect();
            let distances = self.distances(&encoded, &prepared.target)?;
            best.push(distances.iter().copied().fold(f64::INFINITY, f64::min));
            let body = json!({
                "selected": config.selector.select(&distances),
                "mutation_std": config.schedule.std_at(round, config.generations),
                "expected_generation": gen.generation,
            });
            let _: Value = self.post(&format!("/sessions/{id}/advance"), body)?;
        }

        #[derive(Deserialize)]
        struct Started {
            entries: usize,
        }
        let started: Started = self.post(
            &format!("/sessions/{id}/review"),
            json!({"expected_generation": config.generations, "seed": seed}),
        )?;
        #[derive(Deserialize)]
        struct Review {
            images: Vec<Encoded>,
        }
        let review: Review = self.get(&format!("/sessions/{id}/review"))?;
        let encoded: Vec<String> = review.images.into_iter().map(|e| e.png_base64).collect();
        let distances = self.distances(&encoded, &prepared.target)?;
        let position = config.selector.select(&distances)[0];
        #[derive(Deserialize)]
        struct Best {
            ratio: f64,
        }
        let picked: Best = self.post(&format!("/sessions/{id}/best"), json!({"position": position}))?;

        Ok(RemoteRun {
            session_id: id,
            trajectory: Trajectory::from_distances(seed, best, start.elapsed().as_secs_f64() * 1e3),
            review_size: started.entries,
            service_ratio: picked.ratio,
        })
    }
}
