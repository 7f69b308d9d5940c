//! Result tables. Every row names the operation that produced it, the module
//! and backend it ran on, and the tolerance its value is good to.

use serde::Serialize;

use frobtr::{Backend, Scalar};

use crate::config::Format;

/// Significant digits printed for bigfloat values.
pub const DIGITS: usize = 30;

#[derive(Clone, Debug, Serialize, PartialEq)]
pub struct Row {
    pub paper_anchor: String,
    pub quantity: String,
    pub value: String,
    pub provenance: String,
    pub tolerance: String,
}

#[derive(Clone, Debug, Serialize)]
pub struct Report {
    pub command: String,
    pub backend: String,
    pub rows: Vec<Row>,
}

impl Report {
    pub fn new(command: &str, be: &Backend) -> Report {
        Report { command: command.into(), backend: be.name(), rows: Vec::new() }
    }

    /// A computed scalar, tolerance from the backend.
    pub fn scalar(&mut self, anchor: &str, quantity: String, v: &Scalar, provenance: &str, be: &Backend) {
        let tol = if v.is_exact() { "0".to_string() } else { fmt_f64(be.tolerance()) };
        self.push(anchor, quantity, v.render(DIGITS), provenance, be, tol);
    }

    /// A measured deviation checked against `tol`.
    pub fn measure(&mut self, anchor: &str, quantity: String, v: f64, provenance: &str, be: &Backend, tol: f64) {
        self.push(anchor, quantity, fmt_f64(v), provenance, be, fmt_f64(tol));
    }

    pub fn text(&mut self, anchor: &str, quantity: String, v: String, provenance: &str, be: &Backend) {
        self.push(anchor, quantity, v, provenance, be, "0".into());
    }

    fn push(&mut self, anchor: &str, quantity: String, value: String, provenance: &str, be: &Backend, tolerance: String) {
        self.rows.push(Row {
            paper_anchor: anchor.into(),
            quantity,
            value,
            provenance: format!("{provenance} [{}]", be.name()),
            tolerance,
        });
    }

    pub fn render(&self, format: Format) -> String {
        match format {
            Format::Json => {
                let mut s = serde_json::to_string_pretty(self).expect("report serializes");
                s.push('\n');
                s
            }
            Format::Csv => {
                let mut w = csv::Writer::from_writer(Vec::new());
                for r in &self.rows {
                    w.serialize(r).expect("row serializes");
                }
                String::from_utf8(w.into_inner().expect("in-memory writer")).expect("csv is utf-8")
            }
        }
    }
}

/// Fixed-width scientific notation, so reruns print identical bytes.
pub fn fmt_f64(x: f64) -> String {
    if x == 0.0 {
        "0".into()
    } else {
        format!("{x:.3e}")
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn csv_and_json_carry_the_same_rows() {
        let be = Backend::Exact;
        let mut r = Report::new("demo", &be);
        r.scalar("eo_step", "omega_{1,1}, a, b".into(), &Scalar::rat(1, 8), "eo_recursion::correlator", &be);
        let csv = r.render(Format::Csv);
        assert!(csv.starts_with("paper_anchor,quantity,value,provenance,tolerance\n"));
        assert!(csv.contains("\"omega_{1,1}, a, b\",1/8"));
        let json: serde_json::Value = serde_json::from_str(&r.render(Format::Json)).unwrap();
        assert_eq!(json["rows"][0]["value"], "1/8");
        assert_eq!(json["rows"][0]["provenance"], "eo_recursion::correlator [exact]");
    }
}
