use snl_core::mixed_norm::Subcriticality;
use snl_core::MixedExponent;

use crate::config::ExperimentConfig;
use crate::error::{Error, Result};
use crate::output::{num, Outcome, Table};

#[derive(Debug, Clone, PartialEq)]
pub struct CheckRow {
    pub name: String,
    pub exponent: MixedExponent,
    pub result: Subcriticality,
}

impl CheckRow {
    /// `2/q + sum 1/p_i` as an exact rational.
    pub fn sum(&self) -> String {
        self.exponent.scaling_sum().to_string()
    }

    pub fn margin(&self) -> String {
        self.result.margin.to_string()
    }
}

fn list(e: &MixedExponent) -> String {
    let p: Vec<String> = e.space().iter().map(|p| p.to_string()).collect();
    format!("({})", p.join(", "))
}

/// Every `[[checks]]` view, or the `[exponents]` table at its threshold.
pub fn check(cfg: &ExperimentConfig) -> Result<Vec<CheckRow>> {
    let mut rows = Vec::new();
    for (i, c) in cfg.checks.iter().enumerate() {
        let field = format!("checks[{i}]");
        let p = c.p.iter().enumerate().map(|(j, v)| v.resolve(&format!("{field}.p[{j}]"))).collect::<Result<_>>()?;
        let e = MixedExponent::new(p, c.q.resolve(&format!("{field}.q"))?)?;
        for &threshold in &c.thresholds {
            rows.push(CheckRow { name: c.name.clone(), exponent: e.clone(), result: e.check_subcritical(threshold)? });
        }
    }
    if let Some(section) = &cfg.exponents {
        let e = section.resolve("exponents")?;
        rows.push(CheckRow { name: "exponents".into(), result: e.check_subcritical(section.threshold)?, exponent: e });
    }
    if rows.is_empty() {
        return Err(Error::field("checks", "no [[checks]] views and no [exponents] table"));
    }
    Ok(rows)
}

pub fn outcome(rows: &[CheckRow]) -> Outcome {
    let mut t = Table::new("", &["name", "p", "q", "threshold", "sum", "margin", "margin_f64", "pass"]);
    let mut summary = Vec::new();
    for r in rows {
        t.push(vec![
            r.name.clone(),
            list(&r.exponent),
            r.exponent.time().to_string(),
            r.result.threshold.to_string(),
            r.sum(),
            r.margin(),
            num(r.result.margin_f64()),
            r.result.pass.to_string(),
        ]);
        summary.push(format!(
            "{}: p = {}, q = {}, threshold {}: {} (margin {})",
            r.name,
            list(&r.exponent),
            r.exponent.time(),
            r.result.threshold,
            if r.result.pass { "pass" } else { "fail" },
            r.margin()
        ));
    }
    Outcome { tables: vec![t], summary, ..Default::default() }
}
