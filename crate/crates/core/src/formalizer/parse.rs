use serde::{Deserialize, Serialize};
use serde_json::{Map, Value};

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum FormalizerOutput {
    Pddl { df: String, pf: String },
    Actions { actions: Vec<String> },
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Expected {
    Pddl,
    /// An action list; `single` demands exactly one entry.
    Actions { single: bool },
}

#[derive(Clone, Debug, PartialEq, Eq, thiserror::Error)]
#[error("{0}")]
pub struct FormatError(pub String);

/// Body of the first fenced block, if any.
fn strip_fences(raw: &str) -> &str {
    let Some(open) = raw.find("```") else { return raw };
    let after = &raw[open + 3..];
    let body_start = after.find('\n').map_or(after.len(), |i| i + 1);
    let body = &after[body_start..];
    match body.find("```") {
        Some(close) => &body[..close],
        None => body,
    }
}

/// First JSON object embedded in `text`.
fn first_object(text: &str) -> Option<Map<String, Value>> {
    for (i, _) in text.match_indices('{') {
        let mut stream = serde_json::Deserializer::from_str(&text[i..]).into_iter::<Value>();
        if let Some(Ok(Value::Object(map))) = stream.next() {
            return Some(map);
        }
    }
    None
}

fn string_field(map: &Map<String, Value>, key: &str) -> Result<String, FormatError> {
    match map.get(key) {
        Some(Value::String(s)) => Ok(s.clone()),
        Some(_) => Err(FormatError(format!("field '{key}' must be a string"))),
        None => Err(FormatError(format!("missing field '{key}'"))),
    }
}

/// Pulls the strict JSON answer out of raw model text. Code fences and
/// surrounding prose are ignored; the object itself must have exactly the
/// expected keys.
pub fn parse_output(raw: &str, expected: Expected) -> Result<FormalizerOutput, FormatError> {
    let body = strip_fences(raw);
    let map = first_object(body)
        .or_else(|| first_object(raw))
        .ok_or_else(|| FormatError("no JSON object found in the output".to_string()))?;
    let mut keys: Vec<&str> = map.keys().map(String::as_str).collect();
    keys.sort();
    match expected {
        Expected::Pddl => {
            if keys != ["df", "pf"] {
                return Err(FormatError(format!(
                    "expected exactly the keys \"df\" and \"pf\", got {keys:?}"
                )));
            }
            Ok(FormalizerOutput::Pddl {
                df: string_field(&map, "df")?,
                pf: string_field(&map, "pf")?,
            })
        }
        Expected::Actions { single } => {
            if keys != ["actions"] {
                return Err(FormatError(format!(
                    "expected exactly the key \"actions\", got {keys:?}"
                )));
            }
            let Some(Value::Array(items)) = map.get("actions") else {
                return Err(FormatError("field 'actions' must be a list".to_string()));
            };
            let actions = items
                .iter()
                .map(|v| match v {
                    Value::String(s) => Ok(s.trim().to_string()),
                    _ => Err(FormatError("every action must be a string".to_string())),
                })
                .collect::<Result<Vec<_>, _>>()?;
            if single && actions.len() != 1 {
                return Err(FormatError(format!(
                    "exactly one action is allowed per step, got {}",
                    actions.len()
                )));
            }
            if actions.is_empty() {
                return Err(FormatError("the action list is empty".to_string()));
            }
            Ok(FormalizerOutput::Actions { actions })
        }
    }
}
