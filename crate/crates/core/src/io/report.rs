//! Frontier CSV and canonical JSON reports.

use std::io::{Read, Write};

use serde::de::DeserializeOwned;
use serde::{Deserialize, Serialize};
use serde_json::Value;
use sha2::{Digest, Sha256};

use crate::error::{Error, Result};
use crate::metrics::Frontier;

use super::document::to_document;
use super::render::render_f64;
use crate::instance::Instance;

pub const REPORT_SCHEMA_VERSION: u32 = 1;

pub const FRONTIER_HEADER: &str = "lambda,U_lambda,V_lambda,P_lambda,pull,push,degenerate_pull,degenerate_push";

/// One parsed frontier CSV row.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FrontierRow {
    pub lambda: f64,
    #[serde(rename = "U_lambda")]
    pub u_lambda: f64,
    #[serde(rename = "V_lambda")]
    pub v_lambda: f64,
    #[serde(rename = "P_lambda")]
    pub p_lambda: f64,
    pub pull: f64,
    pub push: f64,
    pub degenerate_pull: bool,
    pub degenerate_push: bool,
}

pub fn write_frontier_csv<W: Write>(frontier: &Frontier, mut out: W) -> Result<()> {
    let mut s = String::with_capacity(64 * (frontier.points.len() + 1));
    s.push_str(FRONTIER_HEADER);
    s.push('\n');
    for p in &frontier.points {
        let cells = [
            render_f64(p.lambda),
            render_f64(p.u_lambda),
            render_f64(p.v_lambda),
            render_f64(p.p_lambda),
            render_f64(p.pull),
            render_f64(p.push),
            p.degenerate_pull.to_string(),
            p.degenerate_push.to_string(),
        ];
        s.push_str(&cells.join(","));
        s.push('\n');
    }
    out.write_all(s.as_bytes())?;
    out.flush()?;
    Ok(())
}

pub fn read_frontier_csv<R: Read>(reader: R) -> Result<Vec<FrontierRow>> {
    let mut rdr = csv::Reader::from_reader(reader);
    if rdr.headers()?.iter().collect::<Vec<_>>().join(",") != FRONTIER_HEADER {
        return Err(Error::invalid("unexpected frontier CSV header"));
    }
    rdr.deserialize().map(|r| r.map_err(Error::from)).collect()
}

/// `sha256:` digest of raw bytes.
pub fn digest_bytes(bytes: &[u8]) -> String {
    format!("sha256:{}", hex::encode(Sha256::digest(bytes)))
}

/// Digest of an instance's explicit document.
pub fn instance_digest(instance: &Instance) -> String {
    let json = serde_json::to_string(&to_document(instance)).expect("documents serialize");
    digest_bytes(json.as_bytes())
}

/// Envelope around every JSON report.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Report<T> {
    pub schema_version: u32,
    pub kind: String,
    pub input_digest: String,
    pub body: T,
}

impl<T> Report<T> {
    pub fn new(kind: impl Into<String>, input_digest: impl Into<String>, body: T) -> Self {
        Report {
            schema_version: REPORT_SCHEMA_VERSION,
            kind: kind.into(),
            input_digest: input_digest.into(),
            body,
        }
    }
}

/// Canonical JSON: sorted keys, no insignificant whitespace, floats rendered
/// like the CSV, trailing newline.
pub fn to_canonical_json<T: Serialize>(value: &T) -> Result<String> {
    let v = serde_json::to_value(value)?;
    let mut out = String::new();
    write_value(&v, &mut out);
    out.push('\n');
    Ok(out)
}

fn write_value(v: &Value, out: &mut String) {
    match v {
        Value::Null => out.push_str("null"),
        Value::Bool(b) => out.push_str(if *b { "true" } else { "false" }),
        Value::Number(n) => {
            if n.is_f64() {
                out.push_str(&render_f64(n.as_f64().expect("f64 number")));
            } else {
                out.push_str(&n.to_string());
            }
        }
        Value::String(s) => out.push_str(&Value::String(s.clone()).to_string()),
        Value::Array(items) => {
            out.push('[');
            for (i, item) in items.iter().enumerate() {
                if i > 0 {
                    out.push(',');
                }
                write_value(item, out);
            }
            out.push(']');
        }
        Value::Object(map) => {
            let mut keys: Vec<&String> = map.keys().collect();
            keys.sort();
            out.push('{');
            for (i, k) in keys.into_iter().enumerate() {
                if i > 0 {
                    out.push(',');
                }
                out.push_str(&Value::String(k.clone()).to_string());
                out.push(':');
                write_value(&map[k], out);
            }
            out.push('}');
        }
    }
}

pub fn write_report_json<T: Serialize, W: Write>(report: &Report<T>, mut out: W) -> Result<()> {
    out.write_all(to_canonical_json(report)?.as_bytes())?;
    out.flush()?;
    Ok(())
}

pub fn read_report_json<T: DeserializeOwned>(json: &str) -> Result<Report<T>> {
    Ok(serde_json::from_str(json)?)
}
