//! Timing report rendering and annotation files.
//!
//! Reports are deterministic text (no timestamps, fixed precision) so runs
//! can be diffed. Annotations serialize to one CSV with a `kind` column:
//! `load` rows carry the per-net pi model, `sink` rows the per-sink wire
//! delay and slew increments for each edge.

use std::fmt::Write as _;
use std::path::Path;

use crate::design::{Design, NetId};
use crate::error::{Error, Result};
use crate::timing::graph::{Annotations, SlackReport, TimingGraph};
use crate::timing::{Edge, PiModel};

/// Renders the slack summary and the worst endpoints as diff-stable text.
pub fn render_timing_report(design: &Design, graph: &TimingGraph<'_>, max_endpoints: usize) -> String {
    let report = graph.slack_report();
    let mut out = String::new();
    let _ = writeln!(out, "design {}", design.name);
    let _ = writeln!(out, "clock_period_ns {:.6}", report.clock_period_ns);
    let _ = writeln!(out, "endpoints {}", report.endpoints.len());
    let _ = writeln!(out, "violating {}", report.violating());
    let _ = writeln!(out, "ws_ns {:.6}", report.ws());
    let _ = writeln!(out, "tns_ns {:.6}", report.tns());
    let _ = writeln!(out, "worst endpoints:");
    for e in report.endpoints.iter().take(max_endpoints) {
        let _ = writeln!(
            out,
            "  {} {} slack_ns {:.6}",
            design.instance(e.inst).name,
            e.edge.name(),
            e.slack_ns
        );
    }
    out
}

/// Compact slack summary for logs: `ws/tns/violating`.
pub fn summary_line(report: &SlackReport) -> String {
    format!(
        "ws {:.6} ns, tns {:.6} ns, {} of {} endpoints violating",
        report.ws(),
        report.tns(),
        report.violating(),
        report.endpoints.len()
    )
}

pub fn write_annotations(path: impl AsRef<Path>, design: &Design, ann: &Annotations) -> Result<()> {
    let path = path.as_ref();
    let mut w = csv::Writer::from_path(path).map_err(|e| Error::parse(path, "csv open", e.to_string()))?;
    let err = |e: csv::Error| Error::parse(path, "csv write", e.to_string());
    w.write_record(["kind", "net", "sink", "edge", "delay_ns", "slew_ns", "r_kohm", "c1_pf", "c2_pf"])
        .map_err(err)?;
    for (net, pi) in ann.sorted_loads() {
        w.write_record([
            "load",
            &design.net(net).name,
            "",
            "",
            "",
            "",
            &format!("{}", pi.r),
            &format!("{}", pi.c1),
            &format!("{}", pi.c2),
        ])
        .map_err(err)?;
    }
    for (net, sink, edge, delay, slew) in ann.sorted_sinks() {
        w.write_record([
            "sink",
            &design.net(net).name,
            &sink.to_string(),
            Edge::BOTH[edge].name(),
            &format!("{delay}"),
            &format!("{slew}"),
            "",
            "",
            "",
        ])
        .map_err(err)?;
    }
    w.flush().map_err(|e| Error::io(path, e))
}

pub fn read_annotations(path: impl AsRef<Path>, design: &Design) -> Result<Annotations> {
    let path = path.as_ref();
    let mut by_name = std::collections::HashMap::new();
    for (i, net) in design.nets.iter().enumerate() {
        by_name.insert(net.name.as_str(), NetId(i as u32));
    }
    let mut ann = Annotations::new();
    let mut r = csv::Reader::from_path(path).map_err(|e| Error::parse(path, "csv open", e.to_string()))?;
    for (row, rec) in r.records().enumerate() {
        let rec = rec.map_err(|e| Error::parse(path, format!("row {row}"), e.to_string()))?;
        let ctx = || format!("row {row}");
        let bad = |m: &str| Error::parse(path, ctx(), m.to_string());
        let get = |i: usize| rec.get(i).ok_or_else(|| bad("missing field"));
        let num = |i: usize| -> Result<f64> {
            get(i)?.parse::<f64>().map_err(|_| bad("bad number"))
        };
        let net = *by_name.get(get(1)?).ok_or_else(|| bad("unknown net"))?;
        match get(0)? {
            "load" => {
                ann.set_load(net, PiModel { r: num(6)?, c1: num(7)?, c2: num(8)? });
            }
            "sink" => {
                let sink: usize = get(2)?.parse().map_err(|_| bad("bad sink index"))?;
                if sink >= design.net(net).sinks.len() {
                    return Err(bad("sink index out of range"));
                }
                let edge = Edge::parse(get(3)?).ok_or_else(|| bad("bad edge"))?;
                ann.set_sink(net, sink, edge, num(4)?, num(5)?);
            }
            other => return Err(bad(&format!("unknown kind '{other}'"))),
        }
    }
    Ok(ann)
}
