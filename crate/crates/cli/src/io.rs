use std::fs;
use std::io::{self, Read, Write};
use std::path::Path;

use fano_cqed::trace::SCHEMA;
use serde::de::DeserializeOwned;
use serde_json::Value;

use crate::failure::{CliResult, Failure};

pub fn read_input(path: Option<&Path>) -> CliResult<String> {
    match path {
        Some(p) => fs::read_to_string(p).map_err(|e| Failure::input(format!("{}: {e}", p.display()))),
        None => {
            let mut s = String::new();
            io::stdin()
                .read_to_string(&mut s)
                .map_err(|e| Failure::input(format!("stdin: {e}")))?;
            Ok(s)
        }
    }
}

/// Parses a JSON document, checking the `schema` tag when present.
pub fn parse_doc<T: DeserializeOwned>(text: &str) -> CliResult<T> {
    let mut v: Value = serde_json::from_str(text)?;
    if let Some(obj) = v.as_object_mut() {
        if let Some(tag) = obj.remove("schema") {
            if tag.as_str() != Some(SCHEMA) {
                return Err(Failure::input(format!("schema must be \"{SCHEMA}\", got {tag}")));
            }
        }
    }
    Ok(serde_json::from_value(v)?)
}

/// Writes everything at once so a failed run leaves no partial file.
pub fn write_output(path: Option<&Path>, bytes: &[u8]) -> CliResult<()> {
    let res = match path {
        Some(p) => fs::write(p, bytes),
        None => io::stdout().lock().write_all(bytes),
    };
    res.map_err(|e| Failure::Numerical(format!("writing output: {e}")))
}
