//! Report envelope shared by every CLI emission: schema tag, crate version,
//! field order, and provenance (the invoking command and any sampling seed).
//! Rationals serialize as "numerator/denominator" strings so reports stay
//! exact. Output is deterministic byte for byte apart from recorded wall
//! times.

use serde::Serialize;

pub const SCHEMA_ID: &str = "kakeya-lab/report/v1";

#[derive(Clone, Debug, Serialize)]
pub struct Provenance {
    pub command: String,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub seed: Option<u64>,
}

#[derive(Clone, Debug, Serialize)]
pub struct Envelope<T: Serialize> {
    pub schema: &'static str,
    pub version: &'static str,
    pub q: u64,
    pub provenance: Provenance,
    pub payload: T,
}

pub fn envelope<T: Serialize>(q: u64, command: String, seed: Option<u64>, payload: T) -> Envelope<T> {
    Envelope {
        schema: SCHEMA_ID,
        version: env!("CARGO_PKG_VERSION"),
        q,
        provenance: Provenance { command, seed },
        payload,
    }
}

pub fn to_json<T: Serialize>(e: &Envelope<T>) -> String {
    serde_json::to_string_pretty(e).expect("report serialization")
}

/// JSON Schema for the envelope and the search-report payload, emitted by
/// the `schema` subcommand so downstream tooling can validate reports.
pub const REPORT_JSON_SCHEMA: &str = r##"{
  "$schema": "https://json-schema.org/draft/2020-12/schema",
  "$id": "kakeya-lab/report/v1",
  "title": "kakeya-lab report envelope",
  "type": "object",
  "required": ["schema", "version", "q", "provenance", "payload"],
  "properties": {
    "schema": { "const": "kakeya-lab/report/v1" },
    "version": { "type": "string" },
    "q": { "type": "integer", "minimum": 3 },
    "provenance": {
      "type": "object",
      "required": ["command"],
      "properties": {
        "command": { "type": "string" },
        "seed": { "type": "integer" }
      }
    },
    "payload": {
      "oneOf": [
        { "$ref": "#/$defs/searchReport" },
        { "$ref": "#/$defs/auditReport" },
        { "type": "object" }
      ]
    }
  },
  "$defs": {
    "rational": {
      "type": "string",
      "pattern": "^-?[0-9]+/[0-9]+$",
      "description": "exact rational as numerator/denominator"
    },
    "value": {
      "oneOf": [
        { "type": "integer", "minimum": 0 },
        { "$ref": "#/$defs/rational" }
      ]
    },
    "witness": {
      "type": "object",
      "required": ["kind"],
      "oneOf": [
        {
          "properties": {
            "kind": { "const": "permutation" },
            "table": { "type": "array", "items": { "type": "integer", "minimum": 0 } }
          },
          "required": ["kind", "table"]
        },
        {
          "properties": {
            "kind": { "const": "cover" },
            "keys": { "type": "array", "items": { "type": "integer", "minimum": 0 } }
          },
          "required": ["kind", "keys"]
        }
      ]
    },
    "certificate": {
      "type": "object",
      "required": ["reduction", "symmetry_group_order", "orbit_representatives", "shards"],
      "properties": {
        "reduction": { "type": "string" },
        "symmetry_group_order": { "type": "integer", "minimum": 1 },
        "orbit_representatives": { "type": "string" },
        "shards": {
          "type": "array",
          "items": {
            "type": "object",
            "required": ["shard", "nodes"],
            "properties": {
              "shard": { "type": "string" },
              "nodes": { "type": "integer", "minimum": 0 }
            }
          }
        }
      }
    },
    "searchReport": {
      "type": "object",
      "required": [
        "q", "objective", "witnesses", "witnesses_truncated", "search_space_size",
        "nodes_visited", "exhaustive", "symmetry_group_order", "wall_time_secs"
      ],
      "properties": {
        "q": { "type": "integer" },
        "objective": { "type": "string" },
        "minimum": { "$ref": "#/$defs/value" },
        "maximum": { "$ref": "#/$defs/value" },
        "statistics": {
          "type": "object",
          "additionalProperties": { "$ref": "#/$defs/value" }
        },
        "witnesses": { "type": "array", "items": { "$ref": "#/$defs/witness" } },
        "witnesses_truncated": { "type": "boolean" },
        "search_space_size": { "type": "string" },
        "nodes_visited": { "type": "integer", "minimum": 0 },
        "exhaustive": { "type": "boolean" },
        "symmetry_group_order": { "type": "integer", "minimum": 1 },
        "certificate": { "$ref": "#/$defs/certificate" },
        "seed": { "type": "integer" },
        "note": { "type": "string" },
        "wall_time_secs": { "type": "number" }
      }
    },
    "auditReport": {
      "type": "object",
      "required": ["q", "kind", "checks"],
      "properties": {
        "q": { "type": "integer" },
        "kind": { "type": "string" },
        "checks": {
          "type": "array",
          "items": {
            "type": "object",
            "required": ["name", "lhs", "rhs", "holds"],
            "properties": {
              "name": { "type": "string" },
              "lhs": { "$ref": "#/$defs/rational" },
              "rhs": { "$ref": "#/$defs/rational" },
              "holds": { "type": "boolean" }
            }
          }
        }
      }
    }
  }
}
"##;

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn envelope_serializes_with_schema_tag() {
        let e = envelope(5, "verify --q 5".into(), None, serde_json::json!({"ok": true}));
        let s = to_json(&e);
        assert!(s.contains("\"schema\": \"kakeya-lab/report/v1\""));
        assert!(s.contains("\"command\": \"verify --q 5\""));
        assert!(!s.contains("\"seed\""));
    }

    #[test]
    fn schema_document_is_valid_json() {
        let v: serde_json::Value = serde_json::from_str(REPORT_JSON_SCHEMA).unwrap();
        assert_eq!(v["$id"], "kakeya-lab/report/v1");
    }
}
