use anyhow::{bail, Context, Result};
use serde::{Deserialize, Serialize};
use std::path::PathBuf;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "kebab-case")]
pub enum Command {
    Beta,
    Mass,
    Norm,
    Membership,
    LjCheck,
    Factorize,
    ComposeCheck,
    Approx,
    Reproduce,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "lowercase")]
pub enum Format {
    Csv,
    Json,
}

/// Every flag a run may use, fully materialized.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    pub command: Command,
    pub exhaustion: String,
    pub frame: String,
    /// β sample count.
    pub grid: usize,
    pub p: f64,
    pub f: Option<String>,
    pub family: String,
    /// `start:stop:step`.
    pub q_grid: String,
    /// Comma-separated zeros, e.g. `0.5,0.3+0.1i`.
    pub zeros: Option<String>,
    pub symbol: String,
    /// Test function for `lj-check`: `abs2`, `one` or `harmonic`.
    pub phi: String,
    /// Comma-separated pseudosphere levels.
    pub r: String,
    /// Comma-separated dilation radii.
    pub rho: String,
    pub case: String,
    pub tol: f64,
    pub format: Format,
    pub out: Option<PathBuf>,
    pub expect: Option<String>,
    pub timestamp: bool,
}

impl RunConfig {
    pub fn defaults(command: Command) -> Self {
        RunConfig {
            command,
            exhaustion: "paper-u".into(),
            frame: "disc".into(),
            grid: 4096,
            p: 1.0,
            f: None,
            family: "pow(1-z,-2q)".into(),
            q_grid: "0.1:0.45:0.05".into(),
            zeros: None,
            symbol: "mobius:0.5,0".into(),
            phi: "abs2".into(),
            r: "-1,-0.5,-0.1".into(),
            rho: "0.9,0.99,0.999,0.9999".into(),
            case: "all".into(),
            tol: 1e-10,
            format: match command {
                Command::Factorize | Command::ComposeCheck => Format::Json,
                _ => Format::Csv,
            },
            out: None,
            expect: None,
            timestamp: false,
        }
    }

    /// Layer a TOML file over the defaults; unknown keys are rejected.
    pub fn merge_toml(&mut self, text: &str) -> Result<()> {
        let table: toml::Table = toml::from_str(text).context("config file is not valid TOML")?;
        let mut v = serde_json::to_value(&*self)?;
        let obj = v.as_object_mut().unwrap();
        for (k, val) in table {
            let key = k.replace('-', "_");
            if key == "command" {
                bail!("the command cannot be set from a config file");
            }
            if !obj.contains_key(&key) {
                bail!("unknown config key '{k}'");
            }
            obj.insert(key, serde_json::to_value(val)?);
        }
        *self = serde_json::from_value(v).context("config file has a value of the wrong type")?;
        Ok(())
    }

    pub fn header(&self) -> String {
        serde_json::to_string(self).unwrap()
    }
}

pub fn parse_list(s: &str) -> Result<Vec<f64>> {
    s.split(',')
        .map(|x| x.trim())
        .filter(|x| !x.is_empty())
        .map(|x| x.parse::<f64>().with_context(|| format!("'{x}' is not a number")))
        .collect()
}

/// `start:stop:step`, inclusive of `stop` up to rounding.
pub fn parse_grid(s: &str) -> Result<Vec<f64>> {
    let parts = parse_colon(s)?;
    let [a, b, h] = parts[..] else { bail!("grid '{s}' must be start:stop:step") };
    if !(h > 0.0) || b < a {
        bail!("grid '{s}' is empty");
    }
    let n = ((b - a) / h + 1e-9).floor() as usize;
    Ok((0..=n).map(|k| ((a + h * k as f64) * 1e12).round() / 1e12).collect())
}

fn parse_colon(s: &str) -> Result<Vec<f64>> {
    s.split(':').map(|x| x.trim().parse::<f64>().with_context(|| format!("'{x}' is not a number"))).collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn q_grid() {
        let g = parse_grid("0.1:0.45:0.05").unwrap();
        assert_eq!(g, vec![0.1, 0.15, 0.2, 0.25, 0.3, 0.35, 0.4, 0.45]);
        assert!(parse_grid("0.5:0.1:0.1").is_err());
    }

    #[test]
    fn toml_layering() {
        let mut c = RunConfig::defaults(Command::Norm);
        c.merge_toml("p = 2.0\nexhaustion = \"green\"\n").unwrap();
        assert_eq!(c.p, 2.0);
        assert_eq!(c.exhaustion, "green");
        assert!(c.merge_toml("bogus = 1").is_err());
        assert!(c.merge_toml("p = \"two\"").is_err());
    }
}
