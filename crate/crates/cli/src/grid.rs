use anyhow::{bail, Context, Result};
use clap::ValueEnum;

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Spacing {
    Lin,
    Log,
}

/// Parses `start:stop:count` into `count` points from `start` to `stop`
/// inclusive, evenly spaced or geometric. A bare number is a one-point grid.
pub fn parse_grid(text: &str, spacing: Spacing) -> Result<Vec<f64>> {
    if let Ok(x) = text.trim().parse::<f64>() {
        if !x.is_finite() {
            bail!("grid point must be finite");
        }
        return Ok(vec![x]);
    }
    let parts: Vec<&str> = text.split(':').collect();
    let [start, stop, count] = parts[..] else {
        bail!("grid `{text}` must have the form start:stop:count");
    };
    let start: f64 = start.trim().parse().with_context(|| format!("bad grid start `{start}`"))?;
    let stop: f64 = stop.trim().parse().with_context(|| format!("bad grid stop `{stop}`"))?;
    let count: usize = count.trim().parse().with_context(|| format!("bad grid count `{count}`"))?;
    if !start.is_finite() || !stop.is_finite() {
        bail!("grid endpoints must be finite");
    }
    if count == 0 {
        bail!("grid count must be at least 1");
    }
    if count == 1 {
        return Ok(vec![start]);
    }
    let step = |i: usize| i as f64 / (count - 1) as f64;
    let mut out: Vec<f64> = match spacing {
        Spacing::Lin => (0..count).map(|i| start + (stop - start) * step(i)).collect(),
        Spacing::Log => {
            if !(start > 0.0 && stop > 0.0) {
                bail!("log grid `{text}` needs positive endpoints; pass --grid lin for a linear grid");
            }
            (0..count).map(|i| start * (stop / start).powf(step(i))).collect()
        }
    };
    // Pin the endpoints exactly.
    out[count - 1] = stop;
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn log_grid_hits_decades() {
        let g = parse_grid("1:1e4:5", Spacing::Log).unwrap();
        for (x, y) in g.iter().zip([1.0, 10.0, 100.0, 1000.0, 1e4]) {
            assert!((x - y).abs() < 1e-12 * y);
        }
    }

    #[test]
    fn linear_grid() {
        assert_eq!(parse_grid("0:1:3", Spacing::Lin).unwrap(), vec![0.0, 0.5, 1.0]);
        assert_eq!(parse_grid("2:9:1", Spacing::Lin).unwrap(), vec![2.0]);
        assert_eq!(parse_grid("7.5", Spacing::Log).unwrap(), vec![7.5]);
    }

    #[test]
    fn rejects_malformed_grids() {
        assert!(parse_grid("1:2", Spacing::Lin).is_err());
        assert!(parse_grid("1:x:3", Spacing::Lin).is_err());
        assert!(parse_grid("1:2:0", Spacing::Lin).is_err());
        assert!(parse_grid("0:2:3", Spacing::Log).is_err());
    }
}
