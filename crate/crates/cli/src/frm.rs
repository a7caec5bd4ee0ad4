//! The `.frm` file format: a header naming the chart, then one expression.
//!
//! ```text
//! # omega0
//! chart: p1 x y z
//! weights: 1 1 1 1
//! d(p1*(dx - z*dy)) + x*dx^dy
//! ```
//!
//! `weights:` is optional. `#` starts a comment anywhere.

use std::fmt;
use std::path::Path;
use std::sync::Arc;

use martinet_core::{Chart, DiffForm};

use crate::dsl::{parse_expr_at, DslError, FormExpr};

#[derive(Debug)]
pub enum FrmError {
    Io(String, std::io::Error),
    Header { line: usize, msg: String },
    Dsl(DslError),
}

impl fmt::Display for FrmError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            FrmError::Io(p, e) => write!(f, "{p}: {e}"),
            FrmError::Header { line, msg } => write!(f, "line {line}: {msg}"),
            FrmError::Dsl(e) => write!(f, "{e}"),
        }
    }
}

impl std::error::Error for FrmError {}

impl From<DslError> for FrmError {
    fn from(e: DslError) -> Self {
        FrmError::Dsl(e)
    }
}

#[derive(Clone, Debug)]
pub struct FrmFile {
    pub chart: Arc<Chart>,
    pub expr: FormExpr,
    /// Expression text as written, comments stripped.
    pub source: String,
}

impl FrmFile {
    pub fn form(&self, jet: u32) -> Result<DiffForm, DslError> {
        self.expr.eval(&self.chart, jet)
    }
}

fn strip_comment(line: &str) -> &str {
    line.split('#').next().unwrap_or("")
}

pub fn parse_frm(text: &str) -> Result<FrmFile, FrmError> {
    let lines: Vec<&str> = text.lines().collect();
    let mut vars: Option<Vec<String>> = None;
    let mut weights: Option<(usize, Vec<u32>)> = None;
    let mut i = 0;
    while i < lines.len() {
        let body = strip_comment(lines[i]).trim();
        if body.is_empty() {
            i += 1;
            continue;
        }
        if let Some(rest) = body.strip_prefix("chart:") {
            if vars.is_some() {
                return Err(FrmError::Header { line: i + 1, msg: "duplicate chart line".into() });
            }
            let v: Vec<String> = rest.split_whitespace().map(String::from).collect();
            if v.is_empty() {
                return Err(FrmError::Header { line: i + 1, msg: "chart needs at least one variable".into() });
            }
            vars = Some(v);
        } else if let Some(rest) = body.strip_prefix("weights:") {
            let w = rest
                .split_whitespace()
                .map(|s| s.parse::<u32>().ok().filter(|&w| w > 0))
                .collect::<Option<Vec<u32>>>()
                .ok_or_else(|| FrmError::Header { line: i + 1, msg: "weights must be positive integers".into() })?;
            weights = Some((i + 1, w));
        } else {
            break;
        }
        i += 1;
    }
    let vars = vars.ok_or(FrmError::Header { line: i.min(lines.len()) + 1, msg: "missing `chart:` line".into() })?;
    let chart = match weights {
        Some((line, w)) => {
            if w.len() != vars.len() {
                return Err(FrmError::Header { line, msg: format!("{} weights for {} variables", w.len(), vars.len()) });
            }
            Chart::with_weights(vars, w).map_err(|e| FrmError::Header { line, msg: e.to_string() })?
        }
        None => Chart::new(vars).map_err(|e| FrmError::Header { line: 1, msg: e.to_string() })?,
    };
    let rest = lines[i.min(lines.len())..].join("\n");
    let expr = parse_expr_at(&rest, i + 1)?;
    let source = rest.lines().map(|l| strip_comment(l).trim()).filter(|l| !l.is_empty()).collect::<Vec<_>>().join(" ");
    Ok(FrmFile { chart, expr, source })
}

pub fn read_frm(path: &Path) -> Result<FrmFile, FrmError> {
    let text = std::fs::read_to_string(path).map_err(|e| FrmError::Io(path.display().to_string(), e))?;
    parse_frm(&text)
}

/// Writes `w` in `.frm` syntax.
pub fn write_frm(w: &DiffForm) -> String {
    let chart = w.chart();
    let mut out = format!("chart: {}\n", chart.vars().join(" "));
    if let Some(ws) = chart.weights() {
        let ws: Vec<String> = ws.iter().map(u32::to_string).collect();
        out.push_str(&format!("weights: {}\n", ws.join(" ")));
    }
    out.push_str(&w.to_string());
    out.push('\n');
    out
}

/// Parses a chart given as space- or comma-separated names.
pub fn parse_chart(arg: &str) -> Result<Arc<Chart>, FrmError> {
    let vars: Vec<&str> = arg.split(|c: char| c == ',' || c.is_whitespace()).filter(|s| !s.is_empty()).collect();
    Chart::new(vars).map_err(|e| FrmError::Header { line: 1, msg: e.to_string() })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dsl::Pos;

    #[test]
    fn header_and_multiline_body() {
        let f = parse_frm("# two lines\nchart: p1 x y z\n\nd(p1*(dx - z*dy))\n  + x*dx^dy  # tail\n").unwrap();
        assert_eq!(f.chart.dim(), 4);
        let w = f.form(8).unwrap();
        assert_eq!(w.degree(), 2);
        assert!(w.is_closed());
        assert_eq!(f.source, "d(p1*(dx - z*dy)) + x*dx^dy");
    }

    #[test]
    fn errors_carry_file_lines() {
        let e = parse_frm("chart: x y\n\nx*dx +\n dy^dx").unwrap().form(4).unwrap_err();
        assert_eq!(e.pos, Pos { line: 3, col: 6 });
        let FrmError::Dsl(e) = parse_frm("chart: x y\n# c\nx*(dx\n + dy").unwrap_err() else { panic!() };
        assert_eq!(e.pos.line, 4);
        assert!(matches!(parse_frm("x*dx"), Err(FrmError::Header { .. })));
        assert!(matches!(parse_frm("chart: x y\nweights: 1\nx"), Err(FrmError::Header { line: 2, .. })));
    }

    #[test]
    fn write_then_read() {
        let f = parse_frm("chart: p1 x y z\nweights: 1 2 1 1\nd(p1*(dy + z*dx)) + x*dx^dy").unwrap();
        let w = f.form(8).unwrap();
        let back = parse_frm(&write_frm(&w)).unwrap();
        assert_eq!(back.chart.weights(), Some(&[1, 2, 1, 1][..]));
        assert_eq!(back.form(8).unwrap(), w);
    }
}
