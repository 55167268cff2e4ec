use std::fmt::Display;
use std::fs;
use std::io::Write;
use std::path::Path;

use serde::Serialize;
use serde_json::{Map, Value};

pub const EXIT_INPUT: u8 = 2;

#[derive(Debug)]
pub struct Failure {
    pub code: u8,
    pub msg: String,
}

impl Failure {
    pub fn input(msg: impl Display) -> Self {
        Self { code: EXIT_INPUT, msg: msg.to_string() }
    }
}

pub type Outcome = Result<u8, Failure>;

pub fn read(path: &Path) -> Result<String, Failure> {
    fs::read_to_string(path).map_err(|e| Failure::input(format!("{}: {e}", path.display())))
}

pub fn write(path: &Path, text: &str) -> Result<(), Failure> {
    fs::write(path, text).map_err(|e| Failure::input(format!("{}: {e}", path.display())))
}

/// `body` as a JSON object with the resolved config under `config`.
pub fn json_doc(config: &Value, body: impl Serialize) -> String {
    let mut map = match serde_json::to_value(body).expect("output serializes") {
        Value::Object(m) => m,
        other => {
            let mut m = Map::new();
            m.insert("result".into(), other);
            m
        }
    };
    map.insert("config".into(), config.clone());
    serde_json::to_string_pretty(&Value::Object(map)).expect("output serializes") + "\n"
}

/// Writes to `out` if given, else to stdout. Nothing is printed before the
/// whole document exists, so failures leave stdout empty.
pub fn emit(out: Option<&Path>, text: &str) -> Result<(), Failure> {
    match out {
        Some(path) => write(path, text),
        None => {
            let mut stdout = std::io::stdout().lock();
            stdout.write_all(text.as_bytes()).and_then(|_| stdout.flush()).map_err(Failure::input)
        }
    }
}

pub fn csv_field(s: &str) -> String {
    if s.contains([',', '"', '\n']) {
        format!("\"{}\"", s.replace('"', "\"\""))
    } else {
        s.to_string()
    }
}
