use std::io::Read;

use nalgebra::DMatrix;

use crate::{CliError, CliResult};

/// Parses a headerless numeric CSV into a dense matrix.
pub fn read_matrix<R: Read>(input: R) -> CliResult<DMatrix<f64>> {
    let mut rdr = csv::ReaderBuilder::new().has_headers(false).trim(csv::Trim::All).from_reader(input);
    let mut values = Vec::new();
    let mut cols = None;
    let mut rows = 0;
    for (i, record) in rdr.records().enumerate() {
        let line = i + 1;
        let record = record.map_err(|e| CliError::Validation(format!("matrix line {line}: {e}")))?;
        if *cols.get_or_insert(record.len()) != record.len() {
            return Err(CliError::Validation(format!(
                "matrix line {line}: expected {} entries, found {}",
                cols.unwrap_or(0),
                record.len()
            )));
        }
        for (j, field) in record.iter().enumerate() {
            let v: f64 = field.parse().map_err(|_| {
                CliError::Validation(format!("matrix line {line}, column {}: `{field}` is not a number", j + 1))
            })?;
            if !v.is_finite() {
                return Err(CliError::Validation(format!("matrix line {line}, column {}: entry is not finite", j + 1)));
            }
            values.push(v);
        }
        rows += 1;
    }
    match cols {
        Some(c) if c > 0 => Ok(DMatrix::from_row_slice(rows, c, &values)),
        _ => Err(CliError::Validation("matrix file is empty".into())),
    }
}
