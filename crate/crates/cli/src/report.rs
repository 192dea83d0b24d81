use anyhow::Result;
use otmlab::bounds::{SdpCertificate, WITNESS_TOL};
use otmlab::protocol::Verdict;
use serde::Serialize;
use serde_json::{json, Value};

use crate::args::{Cli, Command, Format};

/// CSV content: a header and string rows.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Table {
    pub header: Vec<String>,
    pub rows: Vec<Vec<String>>,
}

impl Table {
    pub fn single<S: AsRef<str>>(header: &[S], record: impl IntoIterator<Item = String>) -> Self {
        Self {
            header: header.iter().map(|h| h.as_ref().to_string()).collect(),
            rows: vec![record.into_iter().collect()],
        }
    }

    /// Flatten serializable records through their field names.
    pub fn from_records<T: Serialize>(records: &[T]) -> Result<Self> {
        let mut header = Vec::new();
        let mut rows = Vec::new();
        for record in records {
            let Value::Object(fields) = serde_json::to_value(record)? else {
                anyhow::bail!("record is not a struct");
            };
            if header.is_empty() {
                header = fields.keys().cloned().collect();
            }
            rows.push(fields.values().map(cell).collect());
        }
        Ok(Self { header, rows })
    }

    fn to_csv(&self) -> Result<Vec<u8>> {
        let mut w = csv::Writer::from_writer(Vec::new());
        w.write_record(&self.header)?;
        for row in &self.rows {
            w.write_record(row)?;
        }
        Ok(w.into_inner()?)
    }
}

fn cell(v: &Value) -> String {
    match v {
        Value::Null => String::new(),
        Value::String(s) => s.clone(),
        other => other.to_string(),
    }
}

/// A finished run: the JSON envelope, its CSV view, and whether it passed.
#[derive(Debug, Clone)]
pub struct Artifact {
    pub passed: bool,
    pub json: Value,
    pub table: Table,
}

impl Artifact {
    pub fn new<T: Serialize>(cli: &Cli, command: &str, passed: bool, report: &T, table: Table) -> Result<Self> {
        let json = json!({
            "command": command,
            "config": config_json(cli)?,
            "report": report,
        });
        Ok(Self { passed, json, table })
    }

    pub fn render(&self, cli: &Cli) -> Result<Vec<u8>> {
        match resolved_format(cli) {
            Format::Json => {
                let mut bytes = serde_json::to_vec_pretty(&self.json)?;
                bytes.push(b'\n');
                Ok(bytes)
            }
            Format::Csv => self.table.to_csv(),
        }
    }
}

pub fn resolved_format(cli: &Cli) -> Format {
    cli.common.format.unwrap_or(match cli.command {
        Command::Bounds { .. } => Format::Csv,
        _ => Format::Json,
    })
}

fn config_json(cli: &Cli) -> Result<Value> {
    let mut config = serde_json::to_value(&cli.common)?;
    let extra = match &cli.command {
        Command::Protocol => json!({}),
        Command::Attack { name } => json!({ "attack": name }),
        Command::Bounds { n_max } => json!({ "n_max": n_max }),
        Command::VerifySdp { tensor_max } => json!({ "tensor_max": tensor_max }),
        Command::UcDistinguish { adversary } => json!({ "adversary": adversary }),
    };
    let map = config.as_object_mut().expect("config is an object");
    map.insert("format".into(), serde_json::to_value(resolved_format(cli))?);
    if let Value::Object(extra) = extra {
        map.extend(extra);
    }
    Ok(config)
}

/// One line of the bound table.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct BoundsRow {
    pub n: u32,
    pub m: u64,
    pub noninteractive_bound: f64,
    pub interactive_bound: f64,
}

/// SDP certificate plus its verdict.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SdpReport {
    pub value: f64,
    pub tolerance: f64,
    #[serde(flatten)]
    pub certificate: SdpCertificate,
    pub verdict: Verdict,
}

impl SdpReport {
    pub fn new(certificate: SdpCertificate) -> Self {
        let passed = certificate.all_satisfied()
            && certificate.primal_feasible
            && certificate.dual_feasible
            && certificate.duality_gap <= WITNESS_TOL;
        Self {
            value: certificate.primal_value,
            tolerance: WITNESS_TOL,
            certificate,
            verdict: Verdict::from_pass(passed),
        }
    }

    /// One row per constraint, then the tensor powers and the duality gap.
    pub fn table(&self) -> Table {
        let mut rows: Vec<Vec<String>> = self
            .certificate
            .constraints
            .iter()
            .map(|c| vec![c.name.clone(), c.slack.to_string(), c.satisfied.to_string()])
            .collect();
        for t in &self.certificate.tensor_powers {
            rows.push(vec![
                format!("tensor power n={}: primal = dual = α^n", t.n),
                (t.primal_value - t.dual_value).abs().to_string(),
                t.satisfied.to_string(),
            ]);
        }
        rows.push(vec![
            "duality gap".into(),
            self.certificate.duality_gap.to_string(),
            (self.certificate.duality_gap <= WITNESS_TOL).to_string(),
        ]);
        Table { header: vec!["constraint".into(), "slack".into(), "satisfied".into()], rows }
    }
}
