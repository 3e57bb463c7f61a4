use std::collections::BTreeSet;

use cone_minkowski_cli::ExperimentConfig;
use serde_json::Value;

fn schema() -> Value {
    let text = include_str!("../../../docs/config.schema.json");
    serde_json::from_str(text).unwrap()
}

fn keys(v: &Value) -> BTreeSet<String> {
    v.as_object().unwrap().keys().cloned().collect()
}

#[test]
fn schema_lists_every_config_key() {
    let s = schema();
    let defaults = serde_json::to_value(ExperimentConfig::default()).unwrap();
    assert_eq!(keys(&s["properties"]), keys(&defaults));
    assert_eq!(keys(&s["properties"]["thresholds"]["properties"]), keys(&defaults["thresholds"]));
    assert_eq!(keys(&s["properties"]["sweep"]["properties"]), keys(&defaults["sweep"]));
}

#[test]
fn schema_defaults_match_the_code() {
    let s = schema();
    let defaults = serde_json::to_value(ExperimentConfig::default()).unwrap();
    for (key, spec) in s["properties"].as_object().unwrap() {
        if let Some(d) = spec.get("default") {
            assert_eq!(d, &defaults[key], "{key}");
        }
    }
    for (key, spec) in s["properties"]["thresholds"]["properties"].as_object().unwrap() {
        assert_eq!(spec["default"].as_f64(), defaults["thresholds"][key].as_f64(), "{key}");
    }
}
