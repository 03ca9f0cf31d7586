//! The verdict: one JSON object per run, containing the task echo, the
//! computed quantities, the pass/fail answer and a provenance block with
//! every tolerance and grid size that shaped the numbers. Serialization is
//! deterministic — identical configuration yields byte-identical output —
//! and lossless, so verdicts can be archived and re-read.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};
use serde_json::Value;

use crate::config::{RunConfig, SurfaceKind};
use reeb_lab_core::Vec4;

#[derive(Debug, Clone, Serialize, Deserialize, PartialEq)]
pub struct SurfaceEcho {
    pub kind: String,
    pub r1: f64,
    pub r2: f64,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub eps: Option<f64>,
}

#[derive(Debug, Clone, Serialize, Deserialize, PartialEq)]
pub struct Verdict {
    pub task: String,
    pub surface: SurfaceEcho,
    /// Computed quantities, keyed alphabetically.
    pub results: BTreeMap<String, Value>,
    pub pass: bool,
    /// Tolerances, grid sizes and oracle cross-check deltas.
    pub provenance: BTreeMap<String, Value>,
}

impl Verdict {
    pub fn new(cfg: &RunConfig) -> Verdict {
        Verdict {
            task: cfg.task.as_str().to_string(),
            surface: SurfaceEcho {
                kind: cfg.surface.kind.as_str().to_string(),
                r1: if cfg.surface.kind == SurfaceKind::Sphere { 1.0 } else { cfg.surface.r1 },
                r2: if cfg.surface.kind == SurfaceKind::Sphere { 1.0 } else { cfg.surface.r2 },
                eps: if cfg.surface.kind == SurfaceKind::PerturbedEllipsoid {
                    cfg.surface.eps
                } else {
                    None
                },
            },
            results: BTreeMap::new(),
            pass: false,
            provenance: BTreeMap::new(),
        }
    }

    /// Pretty JSON with a trailing newline; stable key order throughout.
    pub fn to_json(&self) -> String {
        let mut s = serde_json::to_string_pretty(self).expect("verdict serializes");
        s.push('\n');
        s
    }

    pub fn result(&mut self, key: &str, value: impl Into<Value>) {
        self.results.insert(key.to_string(), value.into());
    }

    pub fn provenance(&mut self, key: &str, value: impl Into<Value>) {
        self.provenance.insert(key.to_string(), value.into());
    }
}

/// JSON array form of an ambient point or direction.
pub fn vec4_value(v: Vec4) -> Value {
    Value::from(vec![v.x1, v.y1, v.x2, v.y2])
}
