//! Instance files, relevance logs, and reports.

mod document;
mod log;
mod render;
mod report;

pub use document::{
    load_instance, parse_instance, parse_instance_document, to_document, write_instance_json, InstanceDocument,
    SignalModelDocument, SCHEMA_VERSION,
};
pub use log::{
    ingest_relevance_log, read_relevance_log, write_relevance_log, IngestOptions, IngestedUser, RelevanceLogRow,
    LOG_HEADER,
};
pub use render::render_f64;
pub use report::{
    digest_bytes, instance_digest, read_frontier_csv, read_report_json, to_canonical_json, write_frontier_csv,
    write_report_json, FrontierRow, Report, FRONTIER_HEADER, REPORT_SCHEMA_VERSION,
};
