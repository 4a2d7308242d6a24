//! `key = value` records of evaluation results.

use std::fmt::Write as _;

use rae_core::eval::EvalReport;

pub fn report_text(r: &EvalReport) -> String {
    let values: Vec<String> = r.values.iter().map(|v| format!("{v}")).collect();
    let mut s = String::new();
    let _ = writeln!(s, "metric = {}", r.metric);
    let _ = writeln!(s, "runs = {}", r.runs());
    let _ = writeln!(s, "values = {}", values.join(","));
    let _ = writeln!(s, "mean = {}", r.mean);
    let _ = writeln!(s, "std = {}", r.std);
    let _ = writeln!(s, "stderr = {}", r.stderr());
    s
}

/// Parses a record written by [`report_text`].
pub fn parse_report(text: &str) -> Option<EvalReport> {
    let mut metric = None;
    let mut values = None;
    for line in text.lines() {
        let (k, v) = line.split_once('=')?;
        match k.trim() {
            "metric" => metric = Some(v.trim().to_string()),
            "values" => {
                let v = v.trim();
                values = Some(if v.is_empty() {
                    Vec::new()
                } else {
                    v.split(',')
                        .map(|x| x.parse().ok())
                        .collect::<Option<Vec<f64>>>()?
                });
            }
            _ => {}
        }
    }
    Some(EvalReport::new(metric?, values?))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn record_round_trip() {
        let r = EvalReport::new("silhouette", vec![0.25, 0.5, 1.0 / 3.0]);
        let s = report_text(&r);
        assert!(s.contains("runs = 3\n"));
        assert_eq!(parse_report(&s), Some(r));
    }
}
