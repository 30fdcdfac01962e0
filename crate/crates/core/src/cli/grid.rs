//! Parameter grids: `0.01,0.05` lists, `a:b:count` linear ranges and
//! `log:a:b:count` log-spaced ranges, both ends inclusive.

use crate::error::{Error, Result};

fn number(s: &str) -> Result<f64> {
    let v: f64 = s
        .trim()
        .parse()
        .map_err(|_| Error::domain(format!("'{s}' is not a number")))?;
    if !v.is_finite() {
        return Err(Error::domain(format!("grid value '{s}' is not finite")));
    }
    Ok(v)
}

fn count(s: &str) -> Result<usize> {
    s.trim()
        .parse()
        .map_err(|_| Error::domain(format!("'{s}' is not a point count")))
}

fn linspace(a: f64, b: f64, k: usize) -> Vec<f64> {
    match k {
        0 => Vec::new(),
        1 => vec![a],
        _ => (0..k)
            .map(|i| {
                if i + 1 == k {
                    b
                } else {
                    a + (b - a) * i as f64 / (k - 1) as f64
                }
            })
            .collect(),
    }
}

/// Parses one grid specification into its points, in order.
pub fn parse_grid(spec: &str) -> Result<Vec<f64>> {
    let spec = spec.trim();
    if spec.is_empty() {
        return Ok(Vec::new());
    }
    let parts: Vec<&str> = spec.split(':').collect();
    match parts.as_slice() {
        ["log", a, b, k] => {
            let (a, b) = (number(a)?, number(b)?);
            if a <= 0.0 || b <= 0.0 {
                return Err(Error::domain(format!(
                    "log grid '{spec}' needs positive ends"
                )));
            }
            let k = count(k)?;
            // Exact ends, so `log:1e-6:1e-2:5` starts at 1e-6 on the nose.
            Ok(linspace(a.log10(), b.log10(), k)
                .into_iter()
                .enumerate()
                .map(|(i, e)| {
                    if i == 0 {
                        a
                    } else if i + 1 == k {
                        b
                    } else {
                        10f64.powf(e)
                    }
                })
                .collect())
        }
        [a, b, k] => Ok(linspace(number(a)?, number(b)?, count(k)?)),
        [_] => spec.split(',').map(number).collect(),
        _ => Err(Error::domain(format!(
            "cannot parse grid '{spec}'; use a list, a:b:count or log:a:b:count"
        ))),
    }
}

/// A grid of block lengths; every point must be a positive integer.
pub fn parse_lengths(spec: &str) -> Result<Vec<usize>> {
    parse_grid(spec)?
        .into_iter()
        .map(|v| {
            if v >= 1.0 && v.fract() == 0.0 && v <= u32::MAX as f64 {
                Ok(v as usize)
            } else {
                Err(Error::domain(format!(
                    "block length {v} is not a positive integer"
                )))
            }
        })
        .collect()
}

/// Sample counts may be written as `1e6`.
pub fn parse_count(spec: &str) -> Result<usize> {
    let v = number(spec)?;
    if v < 1.0 || v.fract() != 0.0 || v > 1e12 {
        return Err(Error::domain(format!(
            "'{spec}' is not a positive whole count"
        )));
    }
    Ok(v as usize)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn lists_and_ranges() {
        assert_eq!(parse_grid("0.01, 0.05,0.1").unwrap(), vec![0.01, 0.05, 0.1]);
        assert_eq!(
            parse_grid("0:1:5").unwrap(),
            vec![0.0, 0.25, 0.5, 0.75, 1.0]
        );
        assert_eq!(parse_grid("0.3:0.7:1").unwrap(), vec![0.3]);
        assert!(parse_grid("0:1:0").unwrap().is_empty());
        assert!(parse_grid("").unwrap().is_empty());
        let l = parse_grid("log:1e-6:1e-2:5").unwrap();
        assert_eq!(l.len(), 5);
        assert_eq!((l[0], l[4]), (1e-6, 1e-2));
        assert!((l[2] - 1e-4).abs() < 1e-18);
        assert!(parse_grid("log:0:1:3").is_err());
        assert!(parse_grid("a,b").is_err());
        assert!(parse_grid("1:2").is_err());
    }

    #[test]
    fn lengths_and_counts() {
        assert_eq!(parse_lengths("100,1000").unwrap(), vec![100, 1000]);
        assert_eq!(parse_lengths("2:10:5").unwrap(), vec![2, 4, 6, 8, 10]);
        assert!(parse_lengths("2.5").is_err());
        assert_eq!(parse_count("1e6").unwrap(), 1_000_000);
        assert!(parse_count("0").is_err());
    }
}
