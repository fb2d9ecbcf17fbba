use std::fs;
use std::path::Path;

use anyhow::{Context, Result};
use serde::de::DeserializeOwned;
use serde::Serialize;
use serde_json::{Map, Value};

use crate::UsageError;

/// Keys handled by the top-level options rather than a subcommand.
pub const GLOBAL_KEYS: [&str; 2] = ["seed", "out"];

pub fn load(path: &Path) -> Result<Map<String, Value>> {
    let text = fs::read_to_string(path).with_context(|| format!("reading config {}", path.display()))?;
    match serde_json::from_str(&text) {
        Ok(Value::Object(m)) => Ok(m
            .into_iter()
            .map(|(k, v)| (k.replace('-', "_"), v))
            .collect()),
        Ok(_) => Err(UsageError(format!("config {} must hold a JSON object", path.display())).into()),
        Err(e) => Err(UsageError(format!("config {}: {e}", path.display())).into()),
    }
}

/// Replaces the fields of `args` named in `cfg`. Unknown keys are rejected.
pub fn overlay<T: Serialize + DeserializeOwned>(args: &T, cfg: &Map<String, Value>) -> Result<T> {
    let mut value = serde_json::to_value(args)?;
    let fields = value
        .as_object_mut()
        .expect("subcommand arguments serialize to an object");
    for (k, v) in cfg {
        if GLOBAL_KEYS.contains(&k.as_str()) {
            continue;
        }
        match fields.get_mut(k) {
            Some(slot) => *slot = v.clone(),
            None => {
                let mut known: Vec<&String> = fields.keys().collect();
                known.sort();
                return Err(UsageError(format!(
                    "config key {k:?} is not an option of this command (known: {})",
                    known.iter().map(|s| s.as_str()).collect::<Vec<_>>().join(", ")
                ))
                .into());
            }
        }
    }
    serde_json::from_value(value).map_err(|e| UsageError(format!("config: {e}")).into())
}

#[cfg(test)]
mod tests {
    use super::*;
    use serde::Deserialize;

    #[derive(Debug, Serialize, Deserialize, PartialEq)]
    struct A {
        qmax: u64,
        odd: bool,
    }

    #[test]
    fn overlay_replaces_known_fields() {
        let a = A { qmax: 10, odd: false };
        let cfg: Map<String, Value> = serde_json::from_str(r#"{"qmax": 99, "seed": 3}"#).unwrap();
        assert_eq!(overlay(&a, &cfg).unwrap(), A { qmax: 99, odd: false });
        let bad: Map<String, Value> = serde_json::from_str(r#"{"qmin": 1}"#).unwrap();
        assert!(overlay(&a, &bad).unwrap_err().to_string().contains("qmin"));
        let wrong_type: Map<String, Value> = serde_json::from_str(r#"{"odd": 2}"#).unwrap();
        assert!(overlay(&a, &wrong_type).is_err());
    }
}
