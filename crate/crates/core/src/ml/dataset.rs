//! Feature rows with provenance, and their CSV form.
//!
//! One dataset holds row-major features, one or more named target columns,
//! and per-row provenance (design, utilization, clock, net, sink, edge) so
//! evaluations can slice by origin. CSV layout: feature columns in schema
//! order, then targets, then provenance.

use std::path::Path;

use crate::error::{Error, Result};
use crate::timing::Edge;

/// Provenance columns appended after the targets in CSV form.
const PROVENANCE: [&str; 6] = ["design", "utilization", "clock_ns", "net", "sink", "edge"];

#[derive(Clone, Debug, PartialEq)]
pub struct RowMeta {
    pub design: String,
    /// Placement utilization the design was generated at.
    pub utilization: f64,
    pub clock_ns: f64,
    pub net: String,
    /// Sink index within the net; absent for net-level rows.
    pub sink: Option<u32>,
    /// Transition edge; absent for net-level rows.
    pub edge: Option<Edge>,
}

#[derive(Clone, Debug, Default, PartialEq)]
pub struct Dataset {
    pub schema: Vec<String>,
    pub rows: Vec<Vec<f64>>,
    /// Named target columns, each as long as `rows`.
    pub targets: Vec<(String, Vec<f64>)>,
    pub meta: Vec<RowMeta>,
}

impl Dataset {
    pub fn new(schema: Vec<String>, target_names: &[&str]) -> Dataset {
        Dataset {
            schema,
            rows: Vec::new(),
            targets: target_names.iter().map(|n| (n.to_string(), Vec::new())).collect(),
            meta: Vec::new(),
        }
    }

    pub fn len(&self) -> usize {
        self.rows.len()
    }

    pub fn is_empty(&self) -> bool {
        self.rows.is_empty()
    }

    pub fn push(&mut self, meta: RowMeta, features: Vec<f64>, targets: &[f64]) {
        debug_assert_eq!(features.len(), self.schema.len());
        debug_assert_eq!(targets.len(), self.targets.len());
        self.rows.push(features);
        for (slot, &v) in self.targets.iter_mut().zip(targets) {
            slot.1.push(v);
        }
        self.meta.push(meta);
    }

    pub fn target(&self, name: &str) -> Result<&[f64]> {
        self.targets
            .iter()
            .find(|(n, _)| n == name)
            .map(|(_, v)| v.as_slice())
            .ok_or_else(|| Error::Other(format!("dataset has no target '{name}'")))
    }

    pub fn target_mut(&mut self, name: &str) -> Result<&mut Vec<f64>> {
        self.targets
            .iter_mut()
            .find(|(n, _)| n == name)
            .map(|(_, v)| v)
            .ok_or_else(|| Error::Other(format!("dataset has no target '{name}'")))
    }

    /// Column-major feature copy for training.
    pub fn columns(&self) -> Vec<Vec<f64>> {
        let mut cols = vec![Vec::with_capacity(self.rows.len()); self.schema.len()];
        for row in &self.rows {
            for (c, &v) in cols.iter_mut().zip(row) {
                c.push(v);
            }
        }
        cols
    }

    /// Appends all rows of `other`; schemas and targets must match.
    pub fn extend(&mut self, other: &Dataset) -> Result<()> {
        let names = |d: &Dataset| d.targets.iter().map(|(n, _)| n.clone()).collect::<Vec<_>>();
        if self.schema != other.schema || names(self) != names(other) {
            return Err(Error::SchemaMismatch {
                model: format!("{:?} / {:?}", self.schema, names(self)),
                rows: format!("{:?} / {:?}", other.schema, names(other)),
            });
        }
        self.rows.extend(other.rows.iter().cloned());
        for (mine, theirs) in self.targets.iter_mut().zip(&other.targets) {
            mine.1.extend(theirs.1.iter().copied());
        }
        self.meta.extend(other.meta.iter().cloned());
        Ok(())
    }

    /// Rows whose provenance satisfies the predicate.
    pub fn filter(&self, keep: impl Fn(&RowMeta) -> bool) -> Dataset {
        let mut out = Dataset {
            schema: self.schema.clone(),
            rows: Vec::new(),
            targets: self.targets.iter().map(|(n, _)| (n.clone(), Vec::new())).collect(),
            meta: Vec::new(),
        };
        for (i, m) in self.meta.iter().enumerate() {
            if keep(m) {
                let t: Vec<f64> = self.targets.iter().map(|(_, v)| v[i]).collect();
                out.push(m.clone(), self.rows[i].clone(), &t);
            }
        }
        out
    }

    /// Drops the feature column `name`, leaving targets and provenance
    /// intact. Used by the ablation study.
    pub fn without_feature(&self, name: &str) -> Result<Dataset> {
        let idx = self
            .schema
            .iter()
            .position(|s| s == name)
            .ok_or_else(|| Error::Other(format!("dataset has no feature '{name}'")))?;
        let mut out = self.clone();
        out.schema.remove(idx);
        for row in &mut out.rows {
            row.remove(idx);
        }
        Ok(out)
    }

    pub fn save_csv(&self, path: impl AsRef<Path>) -> Result<()> {
        let path = path.as_ref();
        let mut w =
            csv::Writer::from_path(path).map_err(|e| Error::parse(path, "csv open", e.to_string()))?;
        let err = |e: csv::Error| Error::parse(path, "csv write", e.to_string());
        let mut header: Vec<String> = self.schema.clone();
        header.extend(self.targets.iter().map(|(n, _)| n.clone()));
        header.extend(PROVENANCE.iter().map(|s| s.to_string()));
        w.write_record(&header).map_err(err)?;
        for (i, row) in self.rows.iter().enumerate() {
            let m = &self.meta[i];
            let mut rec: Vec<String> = row.iter().map(|v| format!("{v}")).collect();
            rec.extend(self.targets.iter().map(|(_, t)| format!("{}", t[i])));
            rec.push(m.design.clone());
            rec.push(format!("{}", m.utilization));
            rec.push(format!("{}", m.clock_ns));
            rec.push(m.net.clone());
            rec.push(m.sink.map_or(String::new(), |s| s.to_string()));
            rec.push(m.edge.map_or(String::new(), |e| e.name().to_string()));
            w.write_record(&rec).map_err(err)?;
        }
        w.flush().map_err(|e| Error::io(path, e))
    }

    /// Loads a CSV written by [`Dataset::save_csv`]; feature/target split
    /// comes from the expected schema.
    pub fn load_csv(path: impl AsRef<Path>, schema: &[String], target_names: &[&str]) -> Result<Dataset> {
        let path = path.as_ref();
        let mut r =
            csv::Reader::from_path(path).map_err(|e| Error::parse(path, "csv open", e.to_string()))?;
        let mut expected: Vec<String> = schema.to_vec();
        expected.extend(target_names.iter().map(|s| s.to_string()));
        expected.extend(PROVENANCE.iter().map(|s| s.to_string()));
        let header = r.headers().map_err(|e| Error::parse(path, "header", e.to_string()))?;
        let found: Vec<String> = header.iter().map(str::to_string).collect();
        if found != expected {
            return Err(Error::SchemaMismatch { model: expected.join(","), rows: found.join(",") });
        }
        let nf = schema.len();
        let nt = target_names.len();
        let mut out = Dataset::new(schema.to_vec(), target_names);
        for (line, rec) in r.records().enumerate() {
            let rec = rec.map_err(|e| Error::parse(path, format!("row {line}"), e.to_string()))?;
            let bad = |m: String| Error::parse(path, format!("row {line}"), m);
            let num = |i: usize| -> Result<f64> {
                rec.get(i)
                    .and_then(|s| s.parse().ok())
                    .ok_or_else(|| bad(format!("bad number in field {i}")))
            };
            let features = (0..nf).map(num).collect::<Result<Vec<f64>>>()?;
            let targets = (nf..nf + nt).map(num).collect::<Result<Vec<f64>>>()?;
            let p = nf + nt;
            let sink = match rec.get(p + 4).unwrap_or("") {
                "" => None,
                s => Some(s.parse::<u32>().map_err(|_| bad("bad sink index".into()))?),
            };
            let edge = match rec.get(p + 5).unwrap_or("") {
                "" => None,
                s => Some(Edge::parse(s).ok_or_else(|| bad("bad edge".into()))?),
            };
            let meta = RowMeta {
                design: rec.get(p).unwrap_or("").to_string(),
                utilization: num(p + 1)?,
                clock_ns: num(p + 2)?,
                net: rec.get(p + 3).unwrap_or("").to_string(),
                sink,
                edge,
            };
            out.push(meta, features, &targets);
        }
        Ok(out)
    }
}
