//! Instance JSON documents.
//!
//! ```json
//! {
//!   "schema_version": 1,
//!   "catalog": ["o0", "o1", "o2"],
//!   "partition": [["o0", "o1"], ["o2"]],
//!   "types": ["t0"],
//!   "prior": [1.0],
//!   "agent_u": {"t0": [3.0, 1.0, 2.0]},
//!   "advocate_v": {"t0": [0.0, 4.0, 0.0]},
//!   "discount": {"kind": "dcg"},
//!   "signal_model": {"signals": ["s0"], "likelihood": {"t0": [1.0]}}
//! }
//! ```
//!
//! or, instead of the explicit fields, `{"schema_version": 1, "generate": {...}}`
//! with a scenario spec.

use std::collections::BTreeMap;

use serde::{Deserialize, Deserializer, Serialize};

use crate::discount::{make_discount, DiscountSpec};
use crate::error::{Error, Result, Violations};
use crate::inference::SignalChannel;
use crate::instance::{check_probability_vector, Instance, Matrix, TypeSpace, UtilityTable};
use crate::partition::{Catalog, Partition};
use crate::scenarios::{generate, ScenarioSpec};

pub const SCHEMA_VERSION: u32 = 1;

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct InstanceDocument {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub schema_version: Option<u32>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub catalog: Option<Vec<String>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub partition: Option<Vec<Vec<String>>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub types: Option<Vec<String>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub prior: Option<Vec<f64>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub agent_u: Option<BTreeMap<String, Vec<f64>>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub advocate_v: Option<BTreeMap<String, Vec<f64>>>,
    #[serde(
        default,
        skip_serializing_if = "Option::is_none",
        deserialize_with = "lenient_discount"
    )]
    pub discount: Option<DiscountSpec>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub signal_model: Option<SignalModelDocument>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub generate: Option<ScenarioSpec>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SignalModelDocument {
    pub signals: Vec<String>,
    pub likelihood: BTreeMap<String, Vec<f64>>,
}

/// Accepts `{"kind": "dcg"}` without a `params` object.
fn lenient_discount<'de, D: Deserializer<'de>>(d: D) -> std::result::Result<Option<DiscountSpec>, D::Error> {
    let mut v = serde_json::Value::deserialize(d)?;
    if let serde_json::Value::Object(map) = &mut v {
        map.entry("params")
            .or_insert_with(|| serde_json::Value::Object(Default::default()));
    }
    DiscountSpec::deserialize(v).map(Some).map_err(serde::de::Error::custom)
}

impl InstanceDocument {
    fn has_explicit_fields(&self) -> bool {
        self.catalog.is_some()
            || self.partition.is_some()
            || self.types.is_some()
            || self.prior.is_some()
            || self.agent_u.is_some()
            || self.advocate_v.is_some()
            || self.discount.is_some()
            || self.signal_model.is_some()
    }
}

pub fn parse_instance_document(json: &str) -> Result<InstanceDocument> {
    Ok(serde_json::from_str(json)?)
}

/// Parses and validates an instance JSON document.
pub fn parse_instance(json: &str) -> Result<Instance> {
    load_instance(&parse_instance_document(json)?)
}

/// Validates a document, reporting every violated field.
pub fn load_instance(doc: &InstanceDocument) -> Result<Instance> {
    let mut v = Violations::new();
    match doc.schema_version {
        None => v.push("schema_version: missing"),
        Some(SCHEMA_VERSION) => {}
        Some(other) => v.push(format!(
            "schema_version: unsupported version {other} (supported: {SCHEMA_VERSION})"
        )),
    }
    if let Some(spec) = &doc.generate {
        if doc.has_explicit_fields() {
            v.push("generate: cannot be combined with explicit instance fields");
        }
        v.finish()?;
        return generate(spec).map_err(|e| prefix("generate", e));
    }

    macro_rules! required {
        ($field:ident) => {{
            if doc.$field.is_none() {
                v.push(concat!(stringify!($field), ": missing"));
            }
            doc.$field.as_ref()
        }};
    }
    let catalog_ids = required!(catalog);
    let partition_ids = required!(partition);
    let type_ids = required!(types);
    let prior = required!(prior);
    let agent_u = required!(agent_u);
    let advocate_v = required!(advocate_v);
    let discount_spec = required!(discount);

    let catalog = catalog_ids.and_then(|ids| v.absorb("catalog", Catalog::new(ids.clone())));

    let partition = match (&catalog, partition_ids) {
        (Some(cat), Some(blocks)) => {
            let mut idx_blocks = Vec::with_capacity(blocks.len());
            let mut ok = true;
            for (b, block) in blocks.iter().enumerate() {
                let mut idx = Vec::with_capacity(block.len());
                for id in block {
                    match cat.index_of(id) {
                        Some(i) => idx.push(i),
                        None => {
                            v.push(format!("partition: block {b} references unknown object `{id}`"));
                            ok = false;
                        }
                    }
                }
                idx_blocks.push(idx);
            }
            if ok {
                v.absorb("partition", Partition::new(idx_blocks, cat.len()))
            } else {
                None
            }
        }
        _ => None,
    };

    let mut types_ok = true;
    if let Some(p) = prior {
        if v.absorb("prior", check_probability_vector(p)).is_none() {
            types_ok = false;
        }
        if let Some(t) = type_ids {
            if t.len() != p.len() {
                v.push(format!("prior: has {} entries for {} types", p.len(), t.len()));
                types_ok = false;
            }
        }
    }
    let types = match (type_ids, prior) {
        (Some(t), Some(p)) if types_ok => v.absorb("types", TypeSpace::new(t.clone(), p.clone())),
        _ => None,
    };

    let m = catalog.as_ref().map(Catalog::len);
    let agent = keyed_matrix("agent_u", agent_u, type_ids, m, &mut v);
    let advocate = keyed_matrix("advocate_v", advocate_v, type_ids, m, &mut v);
    let utilities = match (agent, advocate) {
        (Some(a), Some(b)) => v.absorb("utilities", UtilityTable::new(a, b)),
        _ => None,
    };

    let discount = match (discount_spec, m) {
        (Some(spec), Some(m)) => v.absorb("discount", make_discount(spec, m)),
        _ => None,
    };

    let channel = match &doc.signal_model {
        None => Some(None),
        Some(sm) => {
            let mat = keyed_matrix(
                "signal_model.likelihood",
                Some(&sm.likelihood),
                type_ids,
                Some(sm.signals.len()),
                &mut v,
            );
            mat.and_then(|mat| v.absorb("signal_model", SignalChannel::new(sm.signals.clone(), mat)))
                .map(Some)
        }
    };

    if !v.is_empty() {
        v.finish()?;
    }
    match (catalog, partition, types, utilities, discount, channel) {
        (Some(c), Some(p), Some(t), Some(u), Some(d), Some(ch)) => Instance::new(c, p, t, u, d, ch),
        _ => Err(Error::invalid("instance: incomplete")),
    }
}

fn prefix(field: &str, e: Error) -> Error {
    match e {
        Error::Validation(msgs) => Error::Validation(msgs.into_iter().map(|m| format!("{field}: {m}")).collect()),
        other => other,
    }
}

/// Rows keyed by type id, reassembled in type order.
fn keyed_matrix(
    field: &str,
    rows: Option<&BTreeMap<String, Vec<f64>>>,
    type_ids: Option<&Vec<String>>,
    cols: Option<usize>,
    v: &mut Violations,
) -> Option<Matrix> {
    let (rows, type_ids) = (rows?, type_ids?);
    let mut ok = true;
    for key in rows.keys() {
        if !type_ids.contains(key) {
            v.push(format!("{field}: unknown type `{key}`"));
            ok = false;
        }
    }
    let mut out = Vec::with_capacity(type_ids.len());
    for t in type_ids {
        match rows.get(t) {
            None => {
                v.push(format!("{field}: missing row for type `{t}`"));
                ok = false;
            }
            Some(row) => {
                if let Some(c) = cols {
                    if row.len() != c {
                        v.push(format!(
                            "{field}: row for type `{t}` has {} entries, expected {c}",
                            row.len()
                        ));
                        ok = false;
                    }
                }
                out.push(row.clone());
            }
        }
    }
    if !ok || cols.is_none() {
        return None;
    }
    Matrix::from_rows(out).ok()
}

/// Explicit document for an instance.
pub fn to_document(instance: &Instance) -> InstanceDocument {
    let cat = instance.catalog();
    let type_ids = instance.types().ids();
    let keyed = |m: &Matrix| -> BTreeMap<String, Vec<f64>> { type_ids.iter().cloned().zip(m.to_rows()).collect() };
    InstanceDocument {
        schema_version: Some(SCHEMA_VERSION),
        catalog: Some(cat.ids().to_vec()),
        partition: Some(
            instance
                .partition()
                .blocks()
                .iter()
                .map(|b| b.iter().map(|&x| cat.id(x).to_string()).collect())
                .collect(),
        ),
        types: Some(type_ids.to_vec()),
        prior: Some(instance.types().prior().to_vec()),
        agent_u: Some(keyed(instance.utilities().agent())),
        advocate_v: Some(keyed(instance.utilities().advocate())),
        discount: Some(instance.discount().spec().clone()),
        signal_model: instance.signal_model().map(|ch| SignalModelDocument {
            signals: ch.signals().to_vec(),
            likelihood: keyed(ch.likelihood()),
        }),
        generate: None,
    }
}

/// Pretty JSON for an instance, with full float precision.
pub fn write_instance_json(instance: &Instance) -> Result<String> {
    let mut s = serde_json::to_string_pretty(&to_document(instance))?;
    s.push('\n');
    Ok(s)
}
