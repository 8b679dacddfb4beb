//! Grids given on the command line, either `start:stop:count` or a comma list.

use std::fmt;

#[derive(Debug, Clone, PartialEq)]
pub struct GridError(pub String);

impl fmt::Display for GridError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "invalid grid: {}", self.0)
    }
}

impl std::error::Error for GridError {}

/// Parse a grid, converting each value with `value`. Ranges include both
/// ends.
pub fn parse_grid<F>(text: &str, value: F) -> Result<Vec<f64>, GridError>
where
    F: Fn(&str) -> Option<f64>,
{
    let bad = |what: &str| GridError(format!("'{text}': {what}"));
    let parts: Vec<&str> = text.split(':').collect();
    let grid = match parts.as_slice() {
        [start, stop, count] => {
            let start = value(start).ok_or_else(|| bad("bad start"))?;
            let stop = value(stop).ok_or_else(|| bad("bad stop"))?;
            let count: usize = count.trim().parse().map_err(|_| bad("bad count"))?;
            if count < 2 || stop <= start {
                return Err(bad("need count >= 2 and stop > start"));
            }
            (0..count)
                .map(|i| start + (stop - start) * i as f64 / (count - 1) as f64)
                .collect()
        }
        [list] => list
            .split(',')
            .map(|v| value(v).ok_or_else(|| bad("bad value")))
            .collect::<Result<Vec<f64>, _>>()?,
        _ => return Err(bad("expected start:stop:count or a comma list")),
    };
    if grid.windows(2).any(|w| w[1] <= w[0]) {
        return Err(bad("values must be strictly increasing"));
    }
    Ok(grid)
}

pub fn number(text: &str) -> Option<f64> {
    text.trim().parse().ok().filter(|v: &f64| v.is_finite())
}

pub fn duration(text: &str) -> Option<f64> {
    perc_core::physics::parse_seconds(text).ok()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn range_and_list() {
        assert_eq!(
            parse_grid("0:1:5", number).unwrap(),
            vec![0.0, 0.25, 0.5, 0.75, 1.0]
        );
        assert_eq!(parse_grid("0.2,0.4", number).unwrap(), vec![0.2, 0.4]);
        let t = parse_grid("0:100ms:3", duration).unwrap();
        assert_eq!(t, vec![0.0, 0.05, 0.1]);
    }

    #[test]
    fn rejects_malformed() {
        assert!(parse_grid("1:0:5", number).is_err());
        assert!(parse_grid("0:1:1", number).is_err());
        assert!(parse_grid("0.5,0.4", number).is_err());
        assert!(parse_grid("a,b", number).is_err());
        assert!(parse_grid("0:1", number).is_err());
    }
}
