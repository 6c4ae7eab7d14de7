//! Deterministic CSV/JSON rendering of sweep tables.
//!
//! CSV: header `variable,<id>_amps,<id>_phase_rad,...` in coil order,
//! "." decimal separator, LF line endings, values at 9 significant
//! digits. Identical tables render to identical bytes on any machine:
//! no timestamps, no locale.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::model::{Phasor, SweepRow, SweepTable};

/// Output rendering selected by a scenario's `output.format`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum OutputFormat {
    Csv,
    Json,
}

/// Renders a table in the requested format.
pub fn emit_table(table: &SweepTable, format: OutputFormat) -> Vec<u8> {
    match format {
        OutputFormat::Csv => emit_csv(table).into_bytes(),
        OutputFormat::Json => emit_json(table).into_bytes(),
    }
}

/// Formats with 9 significant digits: values below 1 in magnitude get 9
/// decimal places, larger values keep 9 digits total. Zero renders as
/// `0.000000000`; values that round to zero never keep a minus sign.
pub fn format_value(x: f64) -> String {
    debug_assert!(x.is_finite(), "table values are finite by construction");
    let magnitude = x.abs();
    let integer_digits = if magnitude < 1.0 { 0 } else { magnitude.log10().floor() as i64 + 1 };
    let decimals = (9 - integer_digits).max(0) as usize;
    let rendered = format!("{x:.decimals$}");
    if rendered.starts_with('-') && rendered[1..].bytes().all(|b| b == b'0' || b == b'.') {
        rendered[1..].to_string()
    } else {
        rendered
    }
}

pub fn emit_csv(table: &SweepTable) -> String {
    let mut out = String::from("variable");
    for id in table.coil_ids() {
        out.push_str(&format!(",{id}_amps,{id}_phase_rad"));
    }
    out.push('\n');
    for row in table.rows() {
        out.push_str(&format_value(row.variable));
        for phasor in &row.phasors {
            out.push(',');
            out.push_str(&format_value(phasor.amps));
            out.push(',');
            out.push_str(&format_value(phasor.phase_rad));
        }
        out.push('\n');
    }
    out
}

#[derive(Serialize, Deserialize)]
struct JsonTable {
    variable_name: String,
    columns: Vec<String>,
    rows: Vec<Vec<f64>>,
}

/// JSON mirror of the CSV: the same columns as an array of row arrays.
pub fn emit_json(table: &SweepTable) -> String {
    let mut columns = vec!["variable".to_string()];
    for id in table.coil_ids() {
        columns.push(format!("{id}_amps"));
        columns.push(format!("{id}_phase_rad"));
    }
    let rows = table
        .rows()
        .iter()
        .map(|row| {
            let mut flat = Vec::with_capacity(columns.len());
            flat.push(row.variable);
            for phasor in &row.phasors {
                flat.push(phasor.amps);
                flat.push(phasor.phase_rad);
            }
            flat
        })
        .collect();
    let doc = JsonTable { variable_name: table.variable_name().to_string(), columns, rows };
    let mut text = serde_json::to_string_pretty(&doc).expect("json rendering cannot fail");
    text.push('\n');
    text
}

/// Reads back [`emit_csv`] output. The CSV does not carry the sweep
/// variable's name, so the caller supplies it. Re-emitting the parsed
/// table is byte-identical to the input.
pub fn parse_table_csv(text: &str, variable_name: &str) -> Result<SweepTable> {
    let mut lines = text.lines();
    let header = lines.next().ok_or_else(|| Error::Config("empty csv document".into()))?;
    let mut fields = header.split(',');
    if fields.next() != Some("variable") {
        return Err(Error::Config("csv header must start with 'variable'".into()));
    }
    let mut coil_ids = Vec::new();
    let rest: Vec<&str> = fields.collect();
    if rest.is_empty() || rest.len() % 2 != 0 {
        return Err(Error::Config("csv header needs an _amps,_phase_rad pair per coil".into()));
    }
    for pair in rest.chunks(2) {
        let id = pair[0]
            .strip_suffix("_amps")
            .ok_or_else(|| Error::Config(format!("expected an _amps column, got '{}'", pair[0])))?;
        let phase = pair[1]
            .strip_suffix("_phase_rad")
            .ok_or_else(|| Error::Config(format!("expected a _phase_rad column, got '{}'", pair[1])))?;
        if id != phase {
            return Err(Error::Config(format!("column pair mismatch: '{id}' vs '{phase}'")));
        }
        coil_ids.push(id.to_string());
    }
    let mut rows = Vec::new();
    for (k, line) in lines.enumerate() {
        if line.is_empty() {
            continue;
        }
        let values: Vec<f64> = line
            .split(',')
            .map(|s| {
                s.parse::<f64>()
                    .map_err(|e| Error::Config(format!("csv row {}: bad number '{s}': {e}", k + 1)))
            })
            .collect::<Result<_>>()?;
        if values.len() != 1 + 2 * coil_ids.len() {
            return Err(Error::Config(format!(
                "csv row {}: expected {} values, got {}",
                k + 1,
                1 + 2 * coil_ids.len(),
                values.len()
            )));
        }
        let phasors = values[1..]
            .chunks(2)
            .map(|pair| Phasor { amps: pair[0], phase_rad: pair[1] })
            .collect();
        rows.push(SweepRow { variable: values[0], phasors });
    }
    SweepTable::new(variable_name, coil_ids, rows)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn sample_table() -> SweepTable {
        let rows = vec![
            SweepRow {
                variable: 30_000.0,
                phasors: vec![
                    Phasor { amps: 1.0, phase_rad: 0.0 },
                    Phasor { amps: 0.042_871_234_5, phase_rad: -1.570_796_326_794_896_6 },
                ],
            },
            SweepRow {
                variable: 46_770.0,
                phasors: vec![
                    Phasor { amps: 1.0, phase_rad: 0.0 },
                    Phasor { amps: 0.359_216_000_087, phase_rad: -1.570_796_326_8 },
                ],
            },
        ];
        SweepTable::new("frequency_hz", vec!["A1".into(), "B1".into()], rows).unwrap()
    }

    #[test]
    fn significant_digit_formatting() {
        assert_eq!(format_value(0.0), "0.000000000");
        assert_eq!(format_value(-0.0), "0.000000000");
        assert_eq!(format_value(1e-12), "0.000000000");
        assert_eq!(format_value(-1e-12), "0.000000000");
        assert_eq!(format_value(0.359216000087), "0.359216000");
        assert_eq!(format_value(-1.5707963267948966), "-1.57079633");
        assert_eq!(format_value(46_770.0), "46770.0000");
        assert_eq!(format_value(1_234_567_890.0), "1234567890");
        assert_eq!(format_value(0.675), "0.675000000");
    }

    #[test]
    fn csv_shape_single_row() {
        let rows = vec![SweepRow {
            variable: 0.6,
            phasors: vec![Phasor { amps: 0.0, phase_rad: 0.0 }, Phasor { amps: 0.1, phase_rad: 0.5 }],
        }];
        let table = SweepTable::new("distance_m", vec!["B1".into(), "A2".into()], rows).unwrap();
        let csv = emit_csv(&table);
        let lines: Vec<&str> = csv.lines().collect();
        assert_eq!(lines.len(), 2, "header plus one row");
        assert_eq!(lines[0], "variable,B1_amps,B1_phase_rad,A2_amps,A2_phase_rad");
        assert_eq!(lines[1], "0.600000000,0.000000000,0.000000000,0.100000000,0.500000000");
        assert!(csv.ends_with('\n'));
        assert!(!csv.contains('\r'), "LF endings only");
    }

    #[test]
    fn csv_round_trip_is_byte_identical() {
        let table = sample_table();
        let first = emit_csv(&table);
        let parsed = parse_table_csv(&first, "frequency_hz").unwrap();
        let second = emit_csv(&parsed);
        assert_eq!(first.as_bytes(), second.as_bytes());
        assert_eq!(parsed.coil_ids(), table.coil_ids());
    }

    #[test]
    fn json_mirror_is_deterministic() {
        let table = sample_table();
        let a = emit_json(&table);
        let b = emit_json(&table);
        assert_eq!(a, b);
        let doc: serde_json::Value = serde_json::from_str(&a).unwrap();
        assert_eq!(doc["variable_name"], "frequency_hz");
        assert_eq!(doc["columns"][1], "A1_amps");
        assert_eq!(doc["rows"].as_array().unwrap().len(), 2);
        assert_eq!(doc["rows"][0].as_array().unwrap().len(), 5);
    }

    #[test]
    fn parse_rejects_malformed_documents() {
        assert!(parse_table_csv("", "frequency_hz").is_err());
        assert!(parse_table_csv("time,A1_amps,A1_phase_rad\n", "frequency_hz").is_err());
        assert!(parse_table_csv("variable,A1_amps\n", "frequency_hz").is_err());
        assert!(parse_table_csv("variable,A1_amps,B1_phase_rad\n", "frequency_hz").is_err());
        assert!(parse_table_csv("variable,A1_amps,A1_phase_rad\n1.0,2.0\n", "frequency_hz").is_err());
        assert!(parse_table_csv("variable,A1_amps,A1_phase_rad\n1.0,x,0.0\n", "frequency_hz").is_err());
    }
}
