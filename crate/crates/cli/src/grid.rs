//! Grid specifications: `a,b,c` lists or `start:stop:count` ranges.

use crate::error::{CliError, CliResult};

/// Parse a grid. An empty string is an empty grid; `start:stop:count`
/// gives `count` evenly spaced points including both ends.
pub fn parse(spec: &str) -> CliResult<Vec<f64>> {
    let spec = spec.trim();
    if spec.is_empty() {
        return Ok(Vec::new());
    }
    let bad = |why: String| CliError::Input(format!("invalid grid `{spec}`: {why}"));
    let num = |t: &str| {
        t.trim()
            .parse::<f64>()
            .map_err(|_| bad(format!("`{}` is not a number", t.trim())))
    };
    let parts: Vec<&str> = spec.split(':').collect();
    match parts.as_slice() {
        [single] => single.split(',').map(num).collect(),
        [start, stop, count] => {
            let (a, b) = (num(start)?, num(stop)?);
            let n: usize = count
                .trim()
                .parse()
                .map_err(|_| bad(format!("count `{}` is not a non-negative integer", count.trim())))?;
            Ok(match n {
                0 => Vec::new(),
                1 => vec![a],
                _ => (0..n).map(|k| a + (b - a) * k as f64 / (n - 1) as f64).collect(),
            })
        }
        _ => Err(bad("expected `a,b,c` or `start:stop:count`".into())),
    }
}

/// Parse a grid of positive integers such as reception capabilities.
pub fn parse_counts(spec: &str) -> CliResult<Vec<u32>> {
    parse(spec)?
        .into_iter()
        .map(|x| {
            let r = x.round();
            if (x - r).abs() > 1e-9 || r < 1.0 || r > f64::from(u32::MAX) {
                Err(CliError::Input(format!("invalid grid `{spec}`: {x} is not a positive integer")))
            } else {
                Ok(r as u32)
            }
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn lists_and_ranges() {
        assert_eq!(parse("").unwrap(), Vec::<f64>::new());
        assert_eq!(parse("1, 2.5,3").unwrap(), vec![1.0, 2.5, 3.0]);
        assert_eq!(parse("1:2:3").unwrap(), vec![1.0, 1.5, 2.0]);
        assert_eq!(parse("4:9:1").unwrap(), vec![4.0]);
        assert!(parse("1:2").is_err());
        assert!(parse("a,b").is_err());
        assert_eq!(parse_counts("1:4:4").unwrap(), vec![1, 2, 3, 4]);
        assert!(parse_counts("0.5").is_err());
    }
}
