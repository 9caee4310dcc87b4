//! TOML run configuration and `--set` overrides.

use std::path::Path;

use serde::Deserialize;

use optomech::model::{DetuningRef, Parameterization, Saturation, SystemParams};
use optomech::sweep::{Axis, AxisScale, Output, Param, SweepSpec};

#[derive(Debug)]
pub struct ConfigError(pub String);

impl std::fmt::Display for ConfigError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(&self.0)
    }
}

impl std::error::Error for ConfigError {}

fn err(msg: impl Into<String>) -> ConfigError {
    ConfigError(msg.into())
}

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Config {
    /// Mechanical frequency in Hz, used only to quote rates in SI units.
    pub omega_m_hz: Option<f64>,
    #[serde(default)]
    pub params: ParamsConfig,
    pub sweep: Option<SweepConfig>,
}

/// Every rate is in units of the mechanical frequency.
#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ParamsConfig {
    pub omega_m: Option<f64>,
    pub kappa: Option<f64>,
    pub kappa1: Option<f64>,
    pub kappa2: Option<f64>,
    pub gamma_m: Option<f64>,
    pub g: Option<f64>,
    pub g1: Option<f64>,
    pub g2: Option<f64>,
    #[serde(rename = "Delta")]
    pub delta: Option<f64>,
    #[serde(rename = "Delta1")]
    pub delta1: Option<f64>,
    #[serde(rename = "Delta2")]
    pub delta2: Option<f64>,
    /// `"effective"` or `"bare"`.
    pub detuning: Option<String>,
    #[serde(rename = "J")]
    pub hopping: Option<f64>,
    pub theta: Option<f64>,
    #[serde(alias = "g_s", alias = "gs")]
    pub g0: Option<f64>,
    #[serde(alias = "f_s", alias = "fs")]
    pub f0: Option<f64>,
    pub n_th: Option<f64>,
    /// `"linear"` or `"full"`.
    pub saturation: Option<String>,
    /// `"direct_g"` or `"drive"`; inferred from the coupling keys when absent.
    pub mode: Option<String>,
    #[serde(rename = "G")]
    pub coupling: Option<f64>,
    #[serde(rename = "G1")]
    pub coupling1: Option<f64>,
    #[serde(rename = "G2")]
    pub coupling2: Option<f64>,
    #[serde(rename = "E")]
    pub drive: Option<f64>,
    #[serde(rename = "E1")]
    pub drive1: Option<f64>,
    #[serde(rename = "E2")]
    pub drive2: Option<f64>,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SweepConfig {
    pub name: Option<String>,
    pub outputs: Vec<String>,
    pub plot: Option<String>,
    #[serde(rename = "axis")]
    pub axes: Vec<AxisConfig>,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct AxisConfig {
    pub param: String,
    pub min: f64,
    pub max: f64,
    pub count: usize,
    #[serde(default)]
    pub scale: Option<String>,
}

fn pair(both: Option<f64>, first: Option<f64>, second: Option<f64>, default: [f64; 2]) -> [f64; 2] {
    let base = both.map_or(default, |v| [v, v]);
    [first.unwrap_or(base[0]), second.unwrap_or(base[1])]
}

impl ParamsConfig {
    /// Applies the configured keys on top of `base`.
    pub fn apply(&self, base: SystemParams) -> Result<SystemParams, ConfigError> {
        let mut p = base;
        if let Some(v) = self.omega_m {
            p.omega_m = v;
        }
        p.kappa = pair(self.kappa, self.kappa1, self.kappa2, p.kappa);
        if let Some(v) = self.gamma_m {
            p.gamma_m = v;
        }
        p.g = pair(self.g, self.g1, self.g2, p.g);
        p.delta = pair(self.delta, self.delta1, self.delta2, p.delta);
        if let Some(d) = &self.detuning {
            p.detuning = match d.as_str() {
                "effective" => DetuningRef::Effective,
                "bare" => DetuningRef::Bare,
                other => return Err(err(format!("params.detuning: expected \"effective\" or \"bare\", got \"{other}\""))),
            };
        }
        if let Some(v) = self.hopping {
            p.hopping = v;
        }
        if let Some(v) = self.theta {
            p.theta = v;
        }
        if let Some(v) = self.g0 {
            p.gain0 = v;
        }
        if let Some(v) = self.f0 {
            p.loss0 = v;
        }
        if let Some(v) = self.n_th {
            p.n_th = v;
        }
        if let Some(s) = &self.saturation {
            p.saturation = match s.as_str() {
                "linear" => Saturation::Linear,
                "full" => Saturation::Full,
                other => return Err(err(format!("params.saturation: expected \"linear\" or \"full\", got \"{other}\""))),
            };
        }

        let has_g = self.coupling.or(self.coupling1).or(self.coupling2).is_some();
        let has_e = self.drive.or(self.drive1).or(self.drive2).is_some();
        let drive_mode = match self.mode.as_deref() {
            None => has_e || (!has_g && matches!(p.mode, Parameterization::Drive { .. })),
            Some("direct_g") => false,
            Some("drive") => true,
            Some(other) => return Err(err(format!("params.mode: expected \"direct_g\" or \"drive\", got \"{other}\""))),
        };
        if drive_mode && has_g {
            return Err(err("params: G/G1/G2 cannot be combined with drive mode"));
        }
        if !drive_mode && has_e {
            return Err(err("params: E/E1/E2 require drive mode"));
        }
        p.mode = if drive_mode {
            let current = match p.mode {
                Parameterization::Drive { amplitude } => amplitude,
                Parameterization::DirectG { .. } => [0.0; 2],
            };
            Parameterization::Drive {
                amplitude: pair(self.drive, self.drive1, self.drive2, current),
            }
        } else {
            let current = match p.mode {
                Parameterization::DirectG { coupling } => coupling,
                Parameterization::Drive { .. } => [0.0; 2],
            };
            Parameterization::DirectG {
                coupling: pair(self.coupling, self.coupling1, self.coupling2, current),
            }
        };
        p.validate().map_err(|e| err(e.to_string()))?;
        Ok(p)
    }
}

impl Config {
    pub fn params(&self, base: SystemParams) -> Result<SystemParams, ConfigError> {
        self.params.apply(base)
    }

    pub fn sweep_spec(&self) -> Result<SweepSpec, ConfigError> {
        let sweep = self
            .sweep
            .as_ref()
            .ok_or_else(|| err("configuration has no [sweep] section"))?;
        let base = self.params(SystemParams::default())?;
        let axes = sweep
            .axes
            .iter()
            .map(|a| {
                let param: Param = a.param.parse().map_err(|e: optomech::Error| err(e.to_string()))?;
                let scale = match a.scale.as_deref() {
                    None | Some("linear") => AxisScale::Linear,
                    Some("log") => AxisScale::Log,
                    Some(other) => return Err(err(format!("sweep.axis.scale: expected \"linear\" or \"log\", got \"{other}\""))),
                };
                Ok(Axis {
                    param,
                    min: a.min,
                    max: a.max,
                    count: a.count,
                    scale,
                })
            })
            .collect::<Result<Vec<_>, _>>()?;
        let outputs = sweep
            .outputs
            .iter()
            .map(|o| o.parse::<Output>().map_err(|e| err(e.to_string())))
            .collect::<Result<Vec<_>, _>>()?;
        let mut spec = SweepSpec::new(sweep.name.clone().unwrap_or_else(|| "sweep".into()), base, axes, outputs);
        if let Some(plot) = &sweep.plot {
            let column = spec
                .columns()
                .into_iter()
                .find(|c| c == plot)
                .ok_or_else(|| err(format!("sweep.plot: '{plot}' is not a column of the requested outputs")))?;
            spec = spec.with_plot(column);
        }
        if let Some(hz) = self.omega_m_hz {
            spec = spec.with_note(format!("omega_m = {hz} Hz"));
        }
        spec.validate().map_err(|e| err(e.to_string()))?;
        Ok(spec)
    }
}

/// Parses a config document after applying `key=value` overrides. Bare keys
/// address `[params]`; dotted keys address any table.
pub fn load(path: Option<&Path>, overrides: &[String]) -> Result<Config, ConfigError> {
    let mut table: toml::Table = match path {
        Some(path) => {
            let text = std::fs::read_to_string(path).map_err(|e| err(format!("{}: {e}", path.display())))?;
            text.parse().map_err(|e| err(format!("{}: {e}", path.display())))?
        }
        None => toml::Table::new(),
    };
    for item in overrides {
        apply_override(&mut table, item)?;
    }
    toml::Value::Table(table).try_into().map_err(|e: toml::de::Error| err(e.message().to_string()))
}

fn apply_override(table: &mut toml::Table, item: &str) -> Result<(), ConfigError> {
    let (key, raw) = item
        .split_once('=')
        .ok_or_else(|| err(format!("--set expects key=value, got '{item}'")))?;
    let key = key.trim();
    let raw = raw.trim();
    let mut path: Vec<&str> = key.split('.').collect();
    if path.len() == 1 && key != "omega_m_hz" {
        path.insert(0, "params");
    }
    let value = parse_value(raw);
    let (last, parents) = path.split_last().unwrap();
    let mut current = table;
    for part in parents {
        let entry = current
            .entry(part.to_string())
            .or_insert_with(|| toml::Value::Table(toml::Table::new()));
        current = entry
            .as_table_mut()
            .ok_or_else(|| err(format!("--set {key}: '{part}' is not a table")))?;
    }
    current.insert(last.to_string(), value);
    Ok(())
}

/// A TOML literal if it parses as one, otherwise the raw text as a string.
fn parse_value(raw: &str) -> toml::Value {
    format!("v = {raw}")
        .parse::<toml::Table>()
        .ok()
        .and_then(|mut t| t.remove("v"))
        .unwrap_or_else(|| toml::Value::String(raw.to_string()))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn unknown_key_is_named() {
        let msg = load(None, &["Jx=0.1".into()]).unwrap_err().0;
        assert!(msg.contains("Jx"), "{msg}");
    }

    #[test]
    fn overrides_reach_params() {
        let cfg = load(None, &["J=0.3".into(), "params.n_th=1000".into(), "G=0.1".into()]).unwrap();
        let p = cfg.params(SystemParams::default()).unwrap();
        assert_eq!((p.hopping, p.n_th), (0.3, 1000.0));
        assert_eq!(p.mode, Parameterization::DirectG { coupling: [0.1, 0.1] });
    }

    #[test]
    fn drive_keys_switch_mode() {
        let cfg = load(None, &["E1=2".into(), "detuning=bare".into()]).unwrap();
        let p = cfg.params(SystemParams::default()).unwrap();
        assert_eq!(p.mode, Parameterization::Drive { amplitude: [2.0, 0.0] });
        assert_eq!(p.detuning, DetuningRef::Bare);
        assert!(load(None, &["E=1".into(), "G=0.1".into()]).unwrap().params(SystemParams::default()).is_err());
    }

    #[test]
    fn sweep_section_round_trip() {
        let text = r#"
            omega_m_hz = 1e7
            [params]
            n_th = 200
            [sweep]
            name = "cut"
            outputs = ["R_min", "C_t"]
            plot = "C_t"
            [[sweep.axis]]
            param = "theta"
            min = 0
            max = 6.283185307179586
            count = 5
        "#;
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("c.toml");
        std::fs::write(&path, text).unwrap();
        let spec = load(Some(&path), &[]).unwrap().sweep_spec().unwrap();
        assert_eq!(spec.name, "cut");
        assert_eq!(spec.base.n_th, 200.0);
        assert_eq!(spec.plot_column(), "C_t");
        assert_eq!(spec.axes[0].count, 5);
    }

    #[test]
    fn bad_enum_values_are_rejected() {
        let cfg = load(None, &["saturation=strong".into()]).unwrap();
        assert!(cfg.params(SystemParams::default()).is_err());
    }
}
