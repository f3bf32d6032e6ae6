use super::{GammaPolicy, GridSpec, Method};
use crate::error::{Error, Result};
use crate::pipeline::TieRule;
use crate::rng::Seed;

fn parse_err(line: usize, msg: impl Into<String>) -> Error {
    Error::Parse { line, msg: msg.into() }
}

/// `start:step:end` (inclusive, up to rounding) or a single number.
fn parse_values(line: usize, text: &str) -> Result<Vec<f64>> {
    let mut out = Vec::new();
    for item in text.split(',').map(str::trim).filter(|s| !s.is_empty()) {
        let nums: Vec<f64> = item
            .split(':')
            .map(|t| t.trim().parse::<f64>().map_err(|_| parse_err(line, format!("not a number: '{t}'"))))
            .collect::<Result<_>>()?;
        match nums.as_slice() {
            [x] => out.push(*x),
            [start, step, end] => {
                if !(*step > 0.0) || end < start {
                    return Err(parse_err(line, format!("bad range '{item}'")));
                }
                let count = ((end - start) / step + 1e-9).floor() as usize;
                out.extend((0..=count).map(|k| start + k as f64 * step));
            }
            _ => return Err(parse_err(line, format!("expected value or start:step:end, got '{item}'"))),
        }
    }
    if out.is_empty() {
        return Err(parse_err(line, "empty list"));
    }
    Ok(out)
}

fn parse_usize(line: usize, text: &str) -> Result<usize> {
    text.parse().map_err(|_| parse_err(line, format!("not a non-negative integer: '{text}'")))
}

/// Parse `key = value` lines. Keys: `alphas`, `betas`, `n`, `reps`,
/// `methods`, `gamma` (`auto` or a number), `mu` (`auto`, `half`, `gw`,
/// `oracle`), `seed`, `n1`, `n2`, `tie_rule`. `#` starts a comment.
pub fn parse_grid_config(text: &str) -> Result<GridSpec> {
    let mut spec = GridSpec::new(Vec::new(), Vec::new(), 0, 1);
    let (mut n1, mut n2) = (None, None);
    for (i, raw) in text.lines().enumerate() {
        let line = i + 1;
        let content = raw.split('#').next().unwrap_or("").trim();
        if content.is_empty() {
            continue;
        }
        let (key, value) = content
            .split_once('=')
            .ok_or_else(|| parse_err(line, format!("expected key = value, got '{content}'")))?;
        let (key, value) = (key.trim().to_ascii_lowercase(), value.trim());
        match key.as_str() {
            "alphas" => spec.alphas = parse_values(line, value)?,
            "betas" => spec.betas = parse_values(line, value)?,
            "n" => spec.n = parse_usize(line, value)?,
            "reps" => spec.reps = parse_usize(line, value)?,
            "methods" => {
                spec.methods = value
                    .split(',')
                    .map(|m| m.parse::<Method>().map_err(|e| parse_err(line, e.to_string())))
                    .collect::<Result<_>>()?;
            }
            "gamma" => {
                spec.gamma_policy = if value.eq_ignore_ascii_case("auto") {
                    GammaPolicy::Auto
                } else {
                    GammaPolicy::Fixed(
                        value
                            .parse()
                            .map_err(|_| parse_err(line, format!("gamma must be 'auto' or a number, got '{value}'")))?,
                    )
                }
            }
            "mu" => spec.mu_policy = value.parse().map_err(|e: Error| parse_err(line, e.to_string()))?,
            "seed" => spec.base_seed = Seed(value.parse().map_err(|_| parse_err(line, "seed must be a u64"))?),
            "n1" => n1 = Some(parse_usize(line, value)?),
            "n2" => n2 = Some(parse_usize(line, value)?),
            "tie_rule" => spec.tie_rule = value.parse::<TieRule>().map_err(|e| parse_err(line, e.to_string()))?,
            other => return Err(parse_err(line, format!("unknown key '{other}'"))),
        }
    }
    match (n1, n2) {
        (Some(a), Some(b)) => {
            if spec.n == 0 {
                spec.n = a + b;
            }
            spec.sizes = Some((a, b));
        }
        (None, None) => {}
        _ => return Err(parse_err(0, "n1 and n2 must be given together")),
    }
    spec.validate()?;
    Ok(spec)
}
