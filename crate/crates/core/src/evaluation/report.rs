//! Result rows, their CSV form, and markdown tables derived from them.
//!
//! CSV columns, in order:
//! `system,protocol,source,target,fold,macro_f1,claim_f1,tp,fp,fn,tn,seed,config_hash`.
//! F1 values are percentages at full precision; `fold` is a fold index or
//! `ALL` for the pooled / whole-corpus score. LODO rows carry the
//! `+`-joined source names.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt::Write as _;
use std::io::{Read, Write};

use serde::{Deserialize, Serialize};

use super::{Protocol, ScoreReport};
use crate::error::{invalid, Error, Result};

pub const FOLD_ALL: &str = "ALL";

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ResultRow {
    pub system: String,
    pub protocol: Protocol,
    pub source: String,
    pub target: String,
    pub fold: String,
    pub macro_f1: f64,
    pub claim_f1: f64,
    pub tp: usize,
    pub fp: usize,
    #[serde(rename = "fn")]
    pub fn_: usize,
    pub tn: usize,
    pub seed: u64,
    pub config_hash: String,
}

impl ResultRow {
    #[allow(clippy::too_many_arguments)]
    pub fn new(
        system: &str,
        protocol: Protocol,
        source: &str,
        target: &str,
        fold: Option<usize>,
        report: &ScoreReport,
        seed: u64,
        config_hash: &str,
    ) -> ResultRow {
        let c = report.confusion;
        ResultRow {
            system: system.to_string(),
            protocol,
            source: source.to_string(),
            target: target.to_string(),
            fold: fold.map(|f| f.to_string()).unwrap_or_else(|| FOLD_ALL.to_string()),
            macro_f1: report.macro_f1_pct(),
            claim_f1: report.claim_f1_pct(),
            tp: c.tp,
            fp: c.fp,
            fn_: c.fn_,
            tn: c.tn,
            seed,
            config_hash: config_hash.to_string(),
        }
    }

    pub fn is_overall(&self) -> bool {
        self.fold == FOLD_ALL
    }

    /// Key used to pair results of different systems.
    pub fn pairing_key(&self) -> (Protocol, String, String, String) {
        (self.protocol, self.source.clone(), self.target.clone(), self.fold.clone())
    }
}

fn csv_err(e: csv::Error) -> Error {
    invalid(format!("results CSV: {e}"))
}

pub fn write_results<W: Write>(rows: &[ResultRow], writer: W) -> Result<()> {
    let mut w = csv::Writer::from_writer(writer);
    for r in rows {
        w.serialize(r).map_err(csv_err)?;
    }
    if rows.is_empty() {
        w.write_record([
            "system", "protocol", "source", "target", "fold", "macro_f1", "claim_f1", "tp", "fp",
            "fn", "tn", "seed", "config_hash",
        ])
        .map_err(csv_err)?;
    }
    w.flush()?;
    Ok(())
}

pub fn read_results<R: Read>(reader: R) -> Result<Vec<ResultRow>> {
    csv::Reader::from_reader(reader)
        .deserialize()
        .map(|r| r.map_err(csv_err))
        .collect()
}

fn ordered_unique<'a>(items: impl Iterator<Item = &'a str>) -> Vec<String> {
    let mut seen = BTreeSet::new();
    items
        .filter(|s| seen.insert(s.to_string()))
        .map(str::to_string)
        .collect()
}

struct Grid {
    header: String,
    rows: Vec<String>,
    cols: Vec<String>,
    cells: BTreeMap<(String, String), (f64, f64)>,
    italic: BTreeSet<(String, String)>,
}

impl Grid {
    fn best(&self, col: &str, claim: bool) -> Option<f64> {
        self.cells
            .iter()
            .filter(|((r, c), _)| c == col && !self.italic.contains(&(r.clone(), c.clone())))
            .map(|(_, &(m, cl))| if claim { cl } else { m })
            .fold(None, |acc: Option<f64>, v| Some(acc.map_or(v, |a| a.max(v))))
    }

    fn averages(&self, row: &str) -> Option<(f64, f64)> {
        let vals: Vec<(f64, f64)> = self
            .cols
            .iter()
            .filter(|c| !self.italic.contains(&(row.to_string(), c.to_string())))
            .filter_map(|c| self.cells.get(&(row.to_string(), c.clone())).copied())
            .collect();
        if vals.is_empty() {
            return None;
        }
        let n = vals.len() as f64;
        Some((
            vals.iter().map(|v| v.0).sum::<f64>() / n,
            vals.iter().map(|v| v.1).sum::<f64>() / n,
        ))
    }

    fn render(&self, out: &mut String) {
        let mut header = format!("| {} |", self.header);
        let mut rule = String::from("|---|");
        for c in self.cols.iter().map(String::as_str).chain(["Average"]) {
            let _ = write!(header, " {c} Macro | {c} Claim |");
            rule.push_str("---:|---:|");
        }
        let _ = writeln!(out, "{header}\n{rule}");
        let mut with_avg = self.cells.clone();
        for r in &self.rows {
            if let Some(a) = self.averages(r) {
                with_avg.insert((r.clone(), "Average".into()), a);
            }
        }
        let cols: Vec<String> = self.cols.iter().cloned().chain(["Average".to_string()]).collect();
        let best: BTreeMap<(String, bool), f64> = cols
            .iter()
            .flat_map(|c| [(c.clone(), false), (c.clone(), true)])
            .filter_map(|(c, claim)| {
                let v = if c == "Average" {
                    self.rows
                        .iter()
                        .filter_map(|r| with_avg.get(&(r.clone(), c.clone())))
                        .map(|&(m, cl)| if claim { cl } else { m })
                        .fold(None, |acc: Option<f64>, v| Some(acc.map_or(v, |a| a.max(v))))
                } else {
                    self.best(&c, claim)
                };
                v.map(|v| ((c, claim), v))
            })
            .collect();
        for r in &self.rows {
            let mut line = format!("| {r} |");
            for c in &cols {
                match with_avg.get(&(r.clone(), c.clone())) {
                    None => line.push_str(" - | - |"),
                    Some(&(m, cl)) => {
                        let italic = self.italic.contains(&(r.clone(), c.clone()));
                        for (v, claim) in [(m, false), (cl, true)] {
                            let s = format!("{v:.1}");
                            let is_best = !italic
                                && best
                                    .get(&(c.clone(), claim))
                                    .is_some_and(|b| format!("{b:.1}") == s);
                            let cell = if italic {
                                format!("*{s}*")
                            } else if is_best && self.rows.len() > 1 {
                                format!("**{s}**")
                            } else {
                                s
                            };
                            let _ = write!(line, " {cell} |");
                        }
                    }
                }
            }
            let _ = writeln!(out, "{line}");
        }
    }
}

/// Markdown tables (in-domain, cross-domain, leave-one-domain-out) derived
/// from the overall rows of a result set. Best values per column are bold;
/// in-domain reference cells inside the cross-domain grid are italic.
pub fn markdown_tables(rows: &[ResultRow]) -> String {
    let overall: Vec<&ResultRow> = rows.iter().filter(|r| r.is_overall()).collect();
    let systems = ordered_unique(overall.iter().map(|r| r.system.as_str()));
    let targets: Vec<String> = overall
        .iter()
        .map(|r| r.target.clone())
        .collect::<BTreeSet<_>>()
        .into_iter()
        .collect();
    let mut out = String::new();

    let in_domain: Vec<&&ResultRow> = overall.iter().filter(|r| r.protocol == Protocol::InDomain).collect();
    if !in_domain.is_empty() {
        out.push_str("## In-domain (cross-validation)\n\n");
        let grid = Grid {
            header: "System".into(),
            rows: systems.iter().filter(|s| in_domain.iter().any(|r| &r.system == *s)).cloned().collect(),
            cols: targets.clone(),
            cells: in_domain
                .iter()
                .map(|r| ((r.system.clone(), r.target.clone()), (r.macro_f1, r.claim_f1)))
                .collect(),
            italic: BTreeSet::new(),
        };
        grid.render(&mut out);
        out.push('\n');
    }

    let cross: Vec<&&ResultRow> = overall.iter().filter(|r| r.protocol == Protocol::CrossDomain).collect();
    if !cross.is_empty() {
        out.push_str("## Cross-domain (rows: source, columns: target)\n\n");
        for system in systems.iter().filter(|s| cross.iter().any(|r| &r.system == *s)) {
            let _ = writeln!(out, "### {system}\n");
            let mut cells: BTreeMap<(String, String), (f64, f64)> = cross
                .iter()
                .filter(|r| &r.system == system)
                .map(|r| ((r.source.clone(), r.target.clone()), (r.macro_f1, r.claim_f1)))
                .collect();
            let mut italic = BTreeSet::new();
            for r in in_domain.iter().filter(|r| &r.system == system) {
                cells.insert((r.target.clone(), r.target.clone()), (r.macro_f1, r.claim_f1));
                italic.insert((r.target.clone(), r.target.clone()));
            }
            let sources = ordered_unique(
                targets
                    .iter()
                    .map(String::as_str)
                    .filter(|t| cells.keys().any(|(s, _)| s == t)),
            );
            Grid { header: "Source".into(), rows: sources, cols: targets.clone(), cells, italic }
                .render(&mut out);
            out.push('\n');
        }
    }

    let lodo: Vec<&&ResultRow> = overall.iter().filter(|r| r.protocol == Protocol::Lodo).collect();
    if !lodo.is_empty() {
        out.push_str("## Leave-one-domain-out (columns: held-out target)\n\n");
        let grid = Grid {
            header: "System".into(),
            rows: systems.iter().filter(|s| lodo.iter().any(|r| &r.system == *s)).cloned().collect(),
            cols: targets,
            cells: lodo
                .iter()
                .map(|r| ((r.system.clone(), r.target.clone()), (r.macro_f1, r.claim_f1)))
                .collect(),
            italic: BTreeSet::new(),
        };
        grid.render(&mut out);
        out.push('\n');
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::evaluation::ConfusionMatrix;

    fn row(system: &str, protocol: Protocol, source: &str, target: &str, tp: usize) -> ResultRow {
        let rep = ConfusionMatrix { tp, fp: 2, fn_: 3, tn: 10 }.report();
        ResultRow::new(system, protocol, source, target, None, &rep, 1, "h")
    }

    #[test]
    fn csv_round_trip() {
        let rows = vec![
            row("LR_ALL", Protocol::InDomain, "MT", "MT", 4),
            row("MAJORITY", Protocol::CrossDomain, "OC", "MT", 0),
        ];
        let mut buf = Vec::new();
        write_results(&rows, &mut buf).unwrap();
        let text = String::from_utf8(buf.clone()).unwrap();
        assert!(text.starts_with("system,protocol,source,target,fold,macro_f1,claim_f1,tp,fp,fn,tn,seed,config_hash\n"));
        assert_eq!(read_results(buf.as_slice()).unwrap(), rows);
    }

    #[test]
    fn markdown_highlights_best() {
        let rows = vec![
            row("LR_ALL", Protocol::InDomain, "MT", "MT", 9),
            row("MAJORITY", Protocol::InDomain, "MT", "MT", 1),
            row("LR_ALL", Protocol::CrossDomain, "OC", "MT", 5),
            row("LR_ALL", Protocol::CrossDomain, "MT", "OC", 6),
            row("LR_ALL", Protocol::InDomain, "OC", "OC", 9),
        ];
        let md = markdown_tables(&rows);
        assert!(md.contains("## In-domain"));
        assert!(md.contains("## Cross-domain"));
        assert!(md.contains("**"));
        assert!(md.contains('*'));
        assert!(!md.contains("Leave-one"));
    }
}
