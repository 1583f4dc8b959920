pub mod api;
pub mod bench;
pub mod cli;

use inld_core::strategies::Diagnoser;
use serde_json::{json, Value};

/// Parse trace plus model graph; served at `/sessions/{id}/model` and
/// written by `diagnose --dump-model`.
pub fn model_export(engine: &Diagnoser) -> Value {
    json!({
        "trace": engine.trace().to_json(),
        "model": engine.model().map(|m| m.to_json()),
    })
}
