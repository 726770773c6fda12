//! Relevance-score logs: per-user scores a platform already computes,
//! turned into one point-mass instance per user.

use std::collections::HashMap;
use std::io::Read;

use serde::{Deserialize, Serialize};

use crate::discount::{make_discount, DiscountSpec};
use crate::error::{Error, Result};
use crate::inference::PosteriorModel;
use crate::instance::{Instance, Matrix, TypeSpace, UtilityTable};
use crate::partition::{Catalog, Partition};

pub const LOG_HEADER: [&str; 6] = [
    "user_id",
    "group_label",
    "object_id",
    "block_id",
    "agent_score",
    "advocate_score",
];

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RelevanceLogRow {
    pub user_id: String,
    pub group_label: String,
    pub object_id: String,
    pub block_id: String,
    pub agent_score: f64,
    pub advocate_score: f64,
}

/// Reads a log CSV whose header must be exactly [`LOG_HEADER`].
pub fn read_relevance_log<R: Read>(reader: R) -> Result<Vec<RelevanceLogRow>> {
    let mut rdr = csv::ReaderBuilder::new().trim(csv::Trim::All).from_reader(reader);
    let header: Vec<String> = rdr.headers()?.iter().map(str::to_string).collect();
    if header != LOG_HEADER {
        return Err(Error::invalid(format!(
            "log header must be `{}`, got `{}`",
            LOG_HEADER.join(","),
            header.join(",")
        )));
    }
    let mut rows = Vec::new();
    for rec in rdr.deserialize() {
        rows.push(rec?);
    }
    Ok(rows)
}

pub fn write_relevance_log<W: std::io::Write>(rows: &[RelevanceLogRow], out: W) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    for r in rows {
        w.serialize(r)?;
    }
    w.flush()?;
    Ok(())
}

#[derive(Debug, Clone, PartialEq)]
pub struct IngestOptions {
    /// Discount applied to every user's list, truncated to its length.
    pub discount: DiscountSpec,
}

impl Default for IngestOptions {
    fn default() -> Self {
        IngestOptions {
            discount: DiscountSpec::Dcg {},
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct IngestedUser {
    pub user_id: String,
    pub group_label: String,
    pub instance: Instance,
    pub posterior: PosteriorModel,
}

#[derive(Default)]
struct UserRows<'a> {
    group: &'a str,
    rows: Vec<&'a RelevanceLogRow>,
}

/// One single-type instance per user, in order of first appearance.
///
/// Objects keep row order; blocks are the `block_id` groups in order of first
/// appearance, each listing its objects in row order.
pub fn ingest_relevance_log(rows: &[RelevanceLogRow], opts: &IngestOptions) -> Result<Vec<IngestedUser>> {
    if rows.is_empty() {
        return Err(Error::invalid("relevance log has no rows"));
    }
    let mut errs = Vec::new();
    let mut users: Vec<(&str, UserRows<'_>)> = Vec::new();
    let mut slot: HashMap<&str, usize> = HashMap::new();
    let mut seen: HashMap<(&str, &str), usize> = HashMap::new();
    for (i, r) in rows.iter().enumerate() {
        // 1-based data row, as a spreadsheet shows it below the header.
        let line = i + 1;
        for (name, s) in [("agent_score", r.agent_score), ("advocate_score", r.advocate_score)] {
            if !s.is_finite() || s < 0.0 {
                errs.push(format!("row {line}: {name} = {s} must be finite and nonnegative"));
            }
        }
        if let Some(first) = seen.insert((&r.user_id, &r.object_id), line) {
            errs.push(format!(
                "row {line}: duplicate object `{}` for user `{}` (first at row {first})",
                r.object_id, r.user_id
            ));
            continue;
        }
        let idx = *slot.entry(&r.user_id).or_insert_with(|| {
            users.push((
                &r.user_id,
                UserRows {
                    group: &r.group_label,
                    rows: Vec::new(),
                },
            ));
            users.len() - 1
        });
        let u = &mut users[idx].1;
        if u.group != r.group_label {
            errs.push(format!(
                "row {line}: user `{}` has group `{}`, earlier `{}`",
                r.user_id, r.group_label, u.group
            ));
        }
        u.rows.push(r);
    }
    if !errs.is_empty() {
        return Err(Error::Validation(errs));
    }

    users
        .into_iter()
        .map(|(user, data)| {
            let m = data.rows.len();
            let catalog = Catalog::new(data.rows.iter().map(|r| r.object_id.clone()).collect())?;
            let mut block_ids: Vec<&str> = Vec::new();
            let mut blocks: Vec<Vec<usize>> = Vec::new();
            for (x, r) in data.rows.iter().enumerate() {
                match block_ids.iter().position(|b| *b == r.block_id) {
                    Some(b) => blocks[b].push(x),
                    None => {
                        block_ids.push(&r.block_id);
                        blocks.push(vec![x]);
                    }
                }
            }
            let agent = Matrix::from_rows(vec![data.rows.iter().map(|r| r.agent_score).collect()])?;
            let advocate = Matrix::from_rows(vec![data.rows.iter().map(|r| r.advocate_score).collect()])?;
            let instance = Instance::new(
                catalog,
                Partition::new(blocks, m)?,
                TypeSpace::single(user),
                UtilityTable::new(agent, advocate)?,
                make_discount(&opts.discount, m)?,
                None,
            )?;
            Ok(IngestedUser {
                user_id: user.to_string(),
                group_label: data.group.to_string(),
                instance,
                posterior: PosteriorModel::point_mass(1, 0),
            })
        })
        .collect()
}
