//! Datasets of complete assignments, CSV input/output, the shipped scenario
//! descriptions and synthetic data generators.

mod lung_cancer;
mod synthetic;

use std::io::{Read, Write};

use thiserror::Error;

use crate::logic::{LogicError, Scenario};

pub use lung_cancer::{generate_lung_cancer, LungCancerParams};
pub use synthetic::{generate_teamwork, generate_trolley, TrolleyParams};

/// Name of the optional trailing column holding a per-row utility.
pub const UTILITY_COLUMN: &str = "utility";

#[derive(Debug, Error)]
pub enum DataError {
    #[error("csv: {0}")]
    Csv(#[from] csv::Error),
    #[error("header mismatch: {0}")]
    Header(String),
    #[error("row {row}, column `{column}`: expected 0 or 1, found `{value}`")]
    NonBinary { row: usize, column: String, value: String },
    #[error("row {row}: bad utility value `{value}`")]
    BadUtility { row: usize, value: String },
    #[error("row {row}: expected {expected} cells, found {found}")]
    RowLength { row: usize, expected: usize, found: usize },
    #[error("row {row}: one-hot group `{group}` has {active} active indicators")]
    OneHot { row: usize, group: String, active: usize },
    #[error("row {row} violates constraint {constraint}")]
    Constraint { row: usize, constraint: usize },
    #[error("invalid generator parameter: {0}")]
    Parameter(String),
    #[error(transparent)]
    Logic(#[from] LogicError),
}

/// Fully observed rows over the variables of one scenario.
#[derive(Debug, Clone, PartialEq)]
pub struct Dataset {
    names: Vec<String>,
    rows: Vec<Vec<bool>>,
    utilities: Option<Vec<f64>>,
}

impl Dataset {
    /// Validates every row against the scenario.
    pub fn new(scenario: &Scenario, rows: Vec<Vec<bool>>, utilities: Option<Vec<f64>>) -> Result<Dataset, DataError> {
        if let Some(u) = &utilities {
            if u.len() != rows.len() {
                return Err(DataError::Parameter(format!("{} utilities for {} rows", u.len(), rows.len())));
            }
        }
        for (i, r) in rows.iter().enumerate() {
            if r.len() != scenario.num_vars() {
                return Err(DataError::RowLength { row: i, expected: scenario.num_vars(), found: r.len() });
            }
            check_row(scenario, r, i)?;
        }
        let names = scenario.variables().iter().map(|v| v.name.clone()).collect();
        Ok(Dataset { names, rows, utilities })
    }

    pub fn names(&self) -> &[String] {
        &self.names
    }

    pub fn rows(&self) -> &[Vec<bool>] {
        &self.rows
    }

    pub fn utilities(&self) -> Option<&[f64]> {
        self.utilities.as_deref()
    }

    pub fn len(&self) -> usize {
        self.rows.len()
    }

    pub fn is_empty(&self) -> bool {
        self.rows.is_empty()
    }

    pub fn write_csv<W: Write>(&self, out: W) -> Result<(), DataError> {
        let mut w = csv::Writer::from_writer(out);
        let mut header: Vec<&str> = self.names.iter().map(String::as_str).collect();
        if self.utilities.is_some() {
            header.push(UTILITY_COLUMN);
        }
        w.write_record(&header)?;
        for (i, r) in self.rows.iter().enumerate() {
            let mut rec: Vec<String> = r.iter().map(|b| if *b { "1" } else { "0" }.to_string()).collect();
            if let Some(u) = &self.utilities {
                // shortest representation that parses back to the same f64
                rec.push(format!("{:?}", u[i]));
            }
            w.write_record(&rec)?;
        }
        w.flush().map_err(csv::Error::from)?;
        Ok(())
    }

    pub fn to_csv_string(&self) -> String {
        let mut buf = Vec::new();
        self.write_csv(&mut buf).expect("writing to memory cannot fail");
        String::from_utf8(buf).expect("csv output is utf-8")
    }
}

/// Reads a CSV dataset whose header lists exactly the scenario's variables in
/// declaration order, optionally followed by a `utility` column.
pub fn load_dataset<R: Read>(input: R, scenario: &Scenario) -> Result<Dataset, DataError> {
    let mut rd = csv::ReaderBuilder::new().trim(csv::Trim::All).from_reader(input);
    let header = rd.headers()?.clone();
    let n = scenario.num_vars();
    let has_utility = header.len() == n + 1 && &header[n] == UTILITY_COLUMN;
    if header.len() != n && !has_utility {
        return Err(DataError::Header(format!("expected {n} variable columns, found {}", header.len())));
    }
    for (i, v) in scenario.variables().iter().enumerate() {
        if header[i] != v.name {
            return Err(DataError::Header(format!("column {} is `{}`, expected `{}`", i + 1, &header[i], v.name)));
        }
    }
    let mut rows = Vec::new();
    let mut utilities = has_utility.then(Vec::new);
    for (i, rec) in rd.records().enumerate() {
        let rec = rec?;
        if rec.len() != header.len() {
            return Err(DataError::RowLength { row: i, expected: header.len(), found: rec.len() });
        }
        let mut row = Vec::with_capacity(n);
        for (j, cell) in rec.iter().take(n).enumerate() {
            row.push(match cell {
                "0" => false,
                "1" => true,
                _ => {
                    return Err(DataError::NonBinary {
                        row: i,
                        column: scenario.variables()[j].name.clone(),
                        value: cell.to_string(),
                    })
                }
            });
        }
        check_row(scenario, &row, i)?;
        if let Some(u) = utilities.as_mut() {
            let cell = &rec[n];
            let v: f64 = cell.parse().map_err(|_| DataError::BadUtility { row: i, value: cell.to_string() })?;
            if !v.is_finite() {
                return Err(DataError::BadUtility { row: i, value: cell.to_string() });
            }
            u.push(v);
        }
        rows.push(row);
    }
    let names = scenario.variables().iter().map(|v| v.name.clone()).collect();
    Ok(Dataset { names, rows, utilities })
}

fn check_row(scenario: &Scenario, row: &[bool], index: usize) -> Result<(), DataError> {
    for g in scenario.groups() {
        let active = g.members.iter().filter(|v| row[v.index()]).count();
        if active != 1 {
            return Err(DataError::OneHot { row: index, group: g.name.clone(), active });
        }
    }
    for (k, c) in scenario.constraints().iter().enumerate() {
        if !c.eval(row)? {
            return Err(DataError::Constraint { row: index, constraint: k + 1 });
        }
    }
    Ok(())
}

/// A scenario description shipped with the library.
#[derive(Debug, Clone, Copy)]
pub struct Builtin {
    pub name: &'static str,
    pub text: &'static str,
}

impl Builtin {
    pub fn scenario(&self) -> Scenario {
        Scenario::parse(self.text).expect("shipped scenario descriptions parse")
    }
}

pub const LUNG_CANCER: Builtin = Builtin { name: "lung_cancer", text: include_str!("../../fixtures/lung_cancer.scn") };
pub const TEAMWORK: Builtin = Builtin { name: "teamwork", text: include_str!("../../fixtures/teamwork.scn") };
pub const TROLLEY: Builtin = Builtin { name: "trolley", text: include_str!("../../fixtures/trolley.scn") };

pub fn builtin_scenarios() -> [Builtin; 3] {
    [LUNG_CANCER, TEAMWORK, TROLLEY]
}

pub fn builtin(name: &str) -> Option<Builtin> {
    let name = name.replace('-', "_");
    builtin_scenarios().into_iter().find(|b| b.name == name)
}
