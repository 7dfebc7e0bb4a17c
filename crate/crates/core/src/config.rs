//! Presets, parameter files, grid specs and overrides.

use std::path::Path;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::experiments::{linspace, DetuningProtocol};
use crate::model::SystemParams;

const PRESETS: [(&str, &str); 3] = [
    ("paper_fig1", include_str!("../presets/paper_fig1.toml")),
    ("paper_fig2", include_str!("../presets/paper_fig2.toml")),
    ("paper_fig3", include_str!("../presets/paper_fig3.toml")),
];

pub fn preset_names() -> Vec<&'static str> {
    PRESETS.iter().map(|p| p.0).collect()
}

/// `lo:hi:points`, or a comma-separated list of values.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "String", into = "String")]
pub enum GridSpec {
    Range { lo: f64, hi: f64, points: usize },
    List(Vec<f64>),
}

impl GridSpec {
    pub fn values(&self) -> Vec<f64> {
        match self {
            GridSpec::Range { lo, hi, points } => linspace(*lo, *hi, *points),
            GridSpec::List(v) => v.clone(),
        }
    }
}

impl FromStr for GridSpec {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let bad = || Error::Config(format!("bad grid spec '{s}' (use lo:hi:points or v1,v2,...)"));
        let parts: Vec<&str> = s.split(':').map(str::trim).collect();
        match parts.len() {
            3 => {
                let lo: f64 = parts[0].parse().map_err(|_| bad())?;
                let hi: f64 = parts[1].parse().map_err(|_| bad())?;
                let points: usize = parts[2].parse().map_err(|_| bad())?;
                if points == 0 || (points > 1 && !(hi > lo)) {
                    return Err(bad());
                }
                Ok(GridSpec::Range { lo, hi, points })
            }
            1 => s
                .split(',')
                .map(|v| v.trim().parse::<f64>().map_err(|_| bad()))
                .collect::<Result<Vec<_>>>()
                .map(GridSpec::List),
            _ => Err(bad()),
        }
    }
}

impl TryFrom<String> for GridSpec {
    type Error = Error;
    fn try_from(s: String) -> Result<Self> {
        s.parse()
    }
}

impl From<GridSpec> for String {
    fn from(g: GridSpec) -> String {
        g.to_string()
    }
}

impl std::fmt::Display for GridSpec {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            GridSpec::Range { lo, hi, points } => write!(f, "{lo}:{hi}:{points}"),
            GridSpec::List(v) => {
                let s: Vec<String> = v.iter().map(|x| x.to_string()).collect();
                write!(f, "{}", s.join(","))
            }
        }
    }
}

/// Grid and protocol defaults carried by a preset.
#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Defaults {
    #[serde(default = "default_gamma_grid")]
    pub gamma_tip: GridSpec,
    #[serde(default = "default_delta_grid")]
    pub delta: GridSpec,
    #[serde(default = "default_protocol")]
    pub protocol: String,
    #[serde(default = "default_j_grid")]
    pub j_grid: Vec<f64>,
    #[serde(default = "default_lep_range")]
    pub lep_range: [f64; 2],
    #[serde(default = "default_spectrum_tips")]
    pub spectrum_gamma_tips: Vec<f64>,
    #[serde(default = "default_distribution_tips")]
    pub distribution_gamma_tips: Vec<f64>,
}

fn default_gamma_grid() -> GridSpec {
    GridSpec::Range { lo: 0.0, hi: 12.0, points: 121 }
}
fn default_delta_grid() -> GridSpec {
    GridSpec::Range { lo: -6.0, hi: 6.0, points: 241 }
}
fn default_protocol() -> String {
    "track_upper_branch".into()
}
fn default_j_grid() -> Vec<f64> {
    vec![0.5, 1.0, 1.5, 2.0, 2.5, 3.0, 3.5, 4.0]
}
fn default_lep_range() -> [f64; 2] {
    [0.0, 20.0]
}
fn default_spectrum_tips() -> Vec<f64> {
    vec![0.0, 2.0, 5.3, 8.9, 12.0]
}
fn default_distribution_tips() -> Vec<f64> {
    vec![6.0, 8.9]
}

impl Default for Defaults {
    fn default() -> Self {
        Defaults {
            gamma_tip: default_gamma_grid(),
            delta: default_delta_grid(),
            protocol: default_protocol(),
            j_grid: default_j_grid(),
            lep_range: default_lep_range(),
            spectrum_gamma_tips: default_spectrum_tips(),
            distribution_gamma_tips: default_distribution_tips(),
        }
    }
}

impl Defaults {
    pub fn protocol(&self) -> Result<DetuningProtocol> {
        self.protocol.parse()
    }
}

#[derive(Clone, Debug)]
pub struct Preset {
    pub name: String,
    pub params: SystemParams,
    pub defaults: Defaults,
}

fn split_table(mut table: toml::Table, origin: &str) -> Result<(SystemParams, Defaults)> {
    let defaults = match table.remove("defaults") {
        Some(v) => v
            .try_into()
            .map_err(|e| Error::Config(format!("{origin}: [defaults]: {e}")))?,
        None => Defaults::default(),
    };
    let params: SystemParams = toml::Value::Table(table)
        .try_into()
        .map_err(|e| Error::Config(format!("{origin}: {e}")))?;
    params.validate().map_err(|e| Error::Config(format!("{origin}: {e}")))?;
    Ok((params, defaults))
}

pub fn parse_toml(text: &str, origin: &str) -> Result<(SystemParams, Defaults)> {
    let table: toml::Table = text
        .parse()
        .map_err(|e| Error::Config(format!("{origin}: {e}")))?;
    split_table(table, origin)
}

pub fn load_preset(name: &str) -> Result<Preset> {
    let text = PRESETS
        .iter()
        .find(|p| p.0 == name)
        .map(|p| p.1)
        .ok_or_else(|| {
            Error::Config(format!("unknown preset '{name}' (available: {})", preset_names().join(", ")))
        })?;
    let (params, defaults) = parse_toml(text, name)?;
    Ok(Preset {
        name: name.to_string(),
        params,
        defaults,
    })
}

/// Reads a flat key/value parameter file (TOML, or JSON by extension).
pub fn load_params_file(path: &Path) -> Result<(SystemParams, Defaults)> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| Error::Config(format!("{}: {e}", path.display())))?;
    let origin = path.display().to_string();
    if path.extension().and_then(|e| e.to_str()) == Some("json") {
        let mut value: serde_json::Value =
            serde_json::from_str(&text).map_err(|e| Error::Config(format!("{origin}: {e}")))?;
        let defaults = match value.as_object_mut().and_then(|o| o.remove("defaults")) {
            Some(d) => serde_json::from_value(d).map_err(|e| Error::Config(format!("{origin}: {e}")))?,
            None => Defaults::default(),
        };
        let params: SystemParams =
            serde_json::from_value(value).map_err(|e| Error::Config(format!("{origin}: {e}")))?;
        params.validate().map_err(|e| Error::Config(format!("{origin}: {e}")))?;
        Ok((params, defaults))
    } else {
        parse_toml(&text, &origin)
    }
}

/// Applies `key=value` overrides in order, logging each one.
pub fn apply_overrides(p: &mut SystemParams, overrides: &[String]) -> Result<()> {
    for o in overrides {
        let (k, v) = o
            .split_once('=')
            .ok_or_else(|| Error::Config(format!("override '{o}' is not key=value")))?;
        let value: f64 = v
            .trim()
            .parse()
            .map_err(|_| Error::Config(format!("override '{o}': value is not a number")))?;
        p.set(k.trim(), value)?;
        log::info!("override {} = {}", k.trim(), value);
    }
    p.validate().map_err(|e| Error::Config(e.to_string()))
}
