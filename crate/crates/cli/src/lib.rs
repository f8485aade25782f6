//! Command-line front end for the `majorize` crate: scenario files, engine
//! dispatch and the built-in demo scenarios.

pub mod config;
pub mod demo;
pub mod run;

use anyhow::{bail, Context, Result};

/// Parses `a,b,c` or `lin:start:end:count` into snapshot times.
pub fn parse_times(s: &str) -> Result<Vec<f64>> {
    if let Some(rest) = s.strip_prefix("lin:") {
        let parts: Vec<&str> = rest.split(':').collect();
        if parts.len() != 3 {
            bail!("expected lin:start:end:count, got `{s}`");
        }
        let start: f64 = parts[0].parse().with_context(|| format!("bad start in `{s}`"))?;
        let end: f64 = parts[1].parse().with_context(|| format!("bad end in `{s}`"))?;
        let count: usize = parts[2].parse().with_context(|| format!("bad count in `{s}`"))?;
        if count < 2 {
            bail!("lin needs at least 2 points");
        }
        return Ok((0..count)
            .map(|i| start + (end - start) * i as f64 / (count - 1) as f64)
            .collect());
    }
    s.split(',')
        .map(|p| p.trim().parse::<f64>().with_context(|| format!("bad time `{p}`")))
        .collect()
}
