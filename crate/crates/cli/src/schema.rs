//! Bundled JSON Schemas for every file the tool reads or writes.

use serde_json::Value;

use crate::error::{CliError, CliResult};

pub const CIRCUIT: &str = include_str!("../schemas/circuit.schema.json");
pub const POINT: &str = include_str!("../schemas/point.schema.json");
pub const POINT_LIST: &str = include_str!("../schemas/point-list.schema.json");
pub const DENSE: &str = include_str!("../schemas/dense.schema.json");
pub const SHOT: &str = include_str!("../schemas/shot.schema.json");
pub const SIMULATE_SUMMARY: &str = include_str!("../schemas/simulate-summary.schema.json");
pub const DECOMPOSE_REPORT: &str = include_str!("../schemas/decompose-report.schema.json");
pub const ENUMERATE_REPORT: &str = include_str!("../schemas/enumerate-report.schema.json");
pub const LAMBDA_REPORT: &str = include_str!("../schemas/lambda-report.schema.json");
pub const VERIFY_REPORT: &str = include_str!("../schemas/verify-report.schema.json");

pub const ALL: [(&str, &str); 10] = [
    ("circuit", CIRCUIT),
    ("point", POINT),
    ("point-list", POINT_LIST),
    ("dense", DENSE),
    ("shot", SHOT),
    ("simulate-summary", SIMULATE_SUMMARY),
    ("decompose-report", DECOMPOSE_REPORT),
    ("enumerate-report", ENUMERATE_REPORT),
    ("lambda-report", LAMBDA_REPORT),
    ("verify-report", VERIFY_REPORT),
];

/// Checks `instance` against a bundled schema, reporting the first
/// violation by JSON pointer.
pub fn validate(schema: &str, instance: &Value) -> CliResult<()> {
    let schema: Value = serde_json::from_str(schema).expect("bundled schemas parse");
    let validator = jsonschema::validator_for(&schema).expect("bundled schemas compile");
    let first = validator.iter_errors(instance).next().map(|e| CliError::Schema {
        pointer: e.instance_path().to_string(),
        message: e.to_string(),
    });
    first.map_or(Ok(()), Err)
}

#[cfg(test)]
mod tests {
    use super::*;
    use serde_json::json;

    #[test]
    fn bundled_schemas_compile() {
        for (name, s) in ALL {
            let v: Value = serde_json::from_str(s).unwrap_or_else(|e| panic!("{name}: {e}"));
            jsonschema::validator_for(&v).unwrap_or_else(|e| panic!("{name}: {e}"));
        }
    }

    #[test]
    fn violations_carry_pointers() {
        let bad = json!({"d": 3, "n": 1, "instructions": [{"op": "measure", "a": [0, "x"], "var": "m"}]});
        match validate(CIRCUIT, &bad) {
            Err(CliError::Schema { pointer, .. }) => assert!(pointer.starts_with("/instructions/0"), "{pointer}"),
            other => panic!("{other:?}"),
        }
        assert!(validate(SHOT, &json!({"shot": 0, "outcomes": [1, 2]})).is_ok());
    }
}
