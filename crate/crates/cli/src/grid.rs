//! Λ-grid syntax: `a:b:logN`, `a:b:linN`, a comma list, or a single value.

use crate::error::CliError;

pub fn parse_grid(spec: &str) -> Result<Vec<f64>, CliError> {
    let bad = |why: &str| CliError::Usage(format!("bad lambda grid '{spec}': {why}"));
    let number = |s: &str| -> Result<f64, CliError> {
        let v: f64 = s.trim().parse().map_err(|_| bad(&format!("'{s}' is not a number")))?;
        if !(v > 0.0) || !v.is_finite() {
            return Err(bad("values must be positive and finite"));
        }
        Ok(v)
    };
    let parts: Vec<&str> = spec.split(':').collect();
    match parts.as_slice() {
        [a, b, kind] => {
            let (a, b) = (number(a)?, number(b)?);
            if b < a {
                return Err(bad("upper end below lower end"));
            }
            let (log, n) = if let Some(n) = kind.strip_prefix("log") {
                (true, n)
            } else if let Some(n) = kind.strip_prefix("lin") {
                (false, n)
            } else {
                return Err(bad("third field must be logN or linN"));
            };
            let n: usize = n.parse().map_err(|_| bad("point count is not an integer"))?;
            if n == 0 {
                return Err(bad("point count must be at least 1"));
            }
            if n == 1 {
                return Ok(vec![a]);
            }
            Ok(if log {
                // a·(b/a)^t keeps round values exact where exp/ln would not
                let ratio = b / a;
                (0..n)
                    .map(|i| if i == n - 1 { b } else { a * ratio.powf(i as f64 / (n - 1) as f64) })
                    .collect()
            } else {
                (0..n).map(|i| a + (b - a) * i as f64 / (n - 1) as f64).collect()
            })
        }
        [list] => list.split(',').map(number).collect(),
        _ => Err(bad("expected a:b:logN, a:b:linN or a comma list")),
    }
}
