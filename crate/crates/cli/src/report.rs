//! The report document and its JSON and CSV renderings.

use std::io::Write;

use serde::Serialize;

use crate::analysis::{Analysis, Status};
use crate::config::{CommandKind, RunConfig};
use crate::corpus::CorpusSummary;
use crate::CliError;

pub const SCHEMA_VERSION: &str = "1";

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Report {
    pub schema_version: &'static str,
    pub config: RunConfig,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub analysis: Option<Analysis>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub corpus: Option<CorpusSummary>,
    pub verdict: Status,
}

impl Report {
    pub fn to_json(&self) -> Result<String, CliError> {
        let mut s = serde_json::to_string_pretty(self)?;
        s.push('\n');
        Ok(s)
    }

    pub fn to_csv(&self) -> Result<String, CliError> {
        let mut w = csv::Writer::from_writer(Vec::new());
        match self.config.command {
            CommandKind::Corpus => write_corpus_rows(&mut w, self.corpus.as_ref())?,
            CommandKind::Hscan => write_h_rows(&mut w, self.analysis.as_ref())?,
            CommandKind::Verify => write_verify_rows(&mut w, self.analysis.as_ref())?,
        }
        w.flush()?;
        let bytes = w.into_inner().map_err(|e| CliError::Io(e.into_error()))?;
        Ok(String::from_utf8(bytes).expect("csv output is utf-8"))
    }

    pub fn render(&self) -> Result<String, CliError> {
        match self.config.format {
            crate::config::Format::Json => self.to_json(),
            crate::config::Format::Csv => self.to_csv(),
        }
    }
}

#[derive(Serialize)]
struct TermRow<'a> {
    section: &'a str,
    label: &'a str,
    value: f64,
    err_est: f64,
    verdict: &'a str,
}

fn verdict_name<T: Serialize>(v: &T) -> String {
    serde_json::to_value(v)
        .ok()
        .and_then(|v| v.as_str().map(str::to_string))
        .unwrap_or_default()
}

fn write_chain<W: Write>(
    w: &mut csv::Writer<W>,
    section: &str,
    r: &hhbox::ChainReport64,
) -> Result<(), CliError> {
    for t in &r.terms {
        w.serialize(TermRow {
            section,
            label: &t.label,
            value: t.value,
            err_est: t.err_est,
            verdict: "",
        })?;
    }
    for l in &r.links {
        let label = format!("{}->{}", l.from, l.to);
        w.serialize(TermRow {
            section,
            label: &label,
            value: l.margin,
            err_est: l.slack,
            verdict: &verdict_name(&l.verdict),
        })?;
    }
    Ok(())
}

/// Chain terms, then links (value = margin, err_est = slack).
fn write_verify_rows<W: Write>(
    w: &mut csv::Writer<W>,
    a: Option<&Analysis>,
) -> Result<(), CliError> {
    let Some(a) = a else { return Ok(()) };
    if let Some(c) = &a.chain {
        write_chain(w, c.chain.label(), c)?;
    }
    if let Some(i) = &a.intermediates {
        for r in &i.reports {
            write_chain(w, r.chain.label(), r)?;
        }
    }
    Ok(())
}

#[derive(Serialize)]
struct NodeRow {
    t: f64,
    s: f64,
    r: Option<f64>,
    value: f64,
    err_est: f64,
}

/// One row per H node, for plotting.
fn write_h_rows<W: Write>(w: &mut csv::Writer<W>, a: Option<&Analysis>) -> Result<(), CliError> {
    let nodes = a
        .and_then(|a| a.hmap.as_ref())
        .and_then(|h| h.nodes.as_ref());
    for n in nodes.into_iter().flatten() {
        w.serialize(NodeRow {
            t: n.params[0],
            s: n.params[1],
            r: n.params.get(2).copied(),
            value: n.value,
            err_est: n.err_est,
        })?;
    }
    Ok(())
}

#[derive(Serialize)]
struct CheckRow<'a> {
    function: &'a str,
    #[serde(rename = "box")]
    box_name: &'a str,
    check: &'a str,
    passed: bool,
}

fn write_corpus_rows<W: Write>(
    w: &mut csv::Writer<W>,
    c: Option<&CorpusSummary>,
) -> Result<(), CliError> {
    for m in c.iter().flat_map(|c| &c.members) {
        for check in &m.checks {
            w.serialize(CheckRow {
                function: &m.function,
                box_name: &m.box_name,
                check: check.name,
                passed: check.passed,
            })?;
        }
    }
    Ok(())
}
