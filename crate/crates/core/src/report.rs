//! Machine-readable outcome of a verification suite.

use serde::Serialize;

use crate::params::FracParams;

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Case {
    pub name: String,
    pub metric: String,
    pub value: f64,
    pub threshold: f64,
    pub pass: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Exponent {
    pub name: String,
    pub fitted: f64,
    pub expected: f64,
}

/// A numeric table destined for CSV output.
#[derive(Debug, Clone, PartialEq)]
pub struct Table {
    pub name: String,
    pub header: Vec<String>,
    pub rows: Vec<Vec<f64>>,
}

impl Table {
    pub fn new(name: impl Into<String>, header: &[&str]) -> Self {
        Self { name: name.into(), header: header.iter().map(|s| s.to_string()).collect(), rows: Vec::new() }
    }

    pub fn push(&mut self, row: Vec<f64>) {
        debug_assert_eq!(row.len(), self.header.len());
        self.rows.push(row);
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ParamsJson {
    pub n: usize,
    pub alpha: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Report {
    pub suite: String,
    pub params: ParamsJson,
    pub cases: Vec<Case>,
    pub exponents: Vec<Exponent>,
    overall_pass: bool,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub wall_time_seconds: Option<f64>,
    #[serde(skip)]
    pub tables: Vec<Table>,
}

impl Report {
    pub fn new(suite: impl Into<String>, params: &FracParams) -> Self {
        Self {
            suite: suite.into(),
            params: ParamsJson { n: params.n, alpha: params.alpha },
            cases: Vec::new(),
            exponents: Vec::new(),
            overall_pass: true,
            wall_time_seconds: None,
            tables: Vec::new(),
        }
    }

    pub fn case(&mut self, name: impl Into<String>, metric: impl Into<String>, value: f64, threshold: f64, pass: bool) -> bool {
        // NaN never passes
        let pass = pass && !value.is_nan();
        self.cases.push(Case { name: name.into(), metric: metric.into(), value, threshold, pass });
        self.overall_pass &= pass;
        self.check_invariant();
        pass
    }

    /// Case passing when `value <= threshold`.
    pub fn case_le(&mut self, name: impl Into<String>, metric: impl Into<String>, value: f64, threshold: f64) -> bool {
        self.case(name, metric, value, threshold, value <= threshold)
    }

    pub fn exponent(&mut self, name: impl Into<String>, fitted: f64, expected: f64) {
        self.exponents.push(Exponent { name: name.into(), fitted, expected });
    }

    pub fn table(&mut self, table: Table) {
        self.tables.push(table);
    }

    /// Appends another report's cases, exponents and tables, prefixing case names.
    pub fn absorb(&mut self, prefix: &str, other: Report) {
        for c in other.cases {
            self.case(format!("{prefix}/{}", c.name), c.metric, c.value, c.threshold, c.pass);
        }
        for e in other.exponents {
            self.exponent(format!("{prefix}/{}", e.name), e.fitted, e.expected);
        }
        self.tables.extend(other.tables);
    }

    pub fn overall_pass(&self) -> bool {
        self.overall_pass
    }

    pub fn case_named(&self, name: &str) -> Option<&Case> {
        self.cases.iter().find(|c| c.name == name)
    }

    fn check_invariant(&self) {
        assert_eq!(self.overall_pass, self.cases.iter().all(|c| c.pass), "overall_pass out of sync");
    }
}
