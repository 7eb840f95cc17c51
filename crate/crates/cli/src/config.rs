//! Command-line options merged with an optional flat TOML config file.
//!
//! Precedence, highest first: command-line flag, config file, `QET_SEED`
//! (seed only), built-in default.

use std::collections::BTreeMap;
use std::fmt;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use clap::Args;
use qet_core::analysis::{linspace, SweepGrid};
use qet_core::mitigation::PRESETS;
use qet_core::{MitigationMethod, ModelParams, ProtocolMode, Quantity, ReadoutNoise};

pub const SEED_ENV: &str = "QET_SEED";

/// Keys accepted in a config file; identical to the long flag names.
pub const CONFIG_KEYS: [&str; 16] = [
    "h",
    "k",
    "target",
    "mode",
    "shots",
    "seed",
    "noise",
    "mitigation",
    "calibration-shots",
    "out",
    "grid-h",
    "grid-k",
    "t-max",
    "t-steps",
    "pairs",
    "format",
];

#[derive(Debug)]
pub struct ConfigError(pub String);

impl fmt::Display for ConfigError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.0)
    }
}

impl std::error::Error for ConfigError {}

fn err(msg: impl Into<String>) -> ConfigError {
    ConfigError(msg.into())
}

/// Flags shared by every subcommand. Options a command does not use are ignored.
#[derive(Debug, Clone, Default, Args)]
pub struct Options {
    /// Flat `key = value` TOML file; flags override its values.
    #[arg(long, value_name = "FILE")]
    pub config: Option<PathBuf>,
    /// Local field strength.
    #[arg(long)]
    pub h: Option<String>,
    /// Coupling strength.
    #[arg(long)]
    pub k: Option<String>,
    /// E0, H1, V or E1.
    #[arg(long)]
    pub target: Option<String>,
    /// conditional or deferred.
    #[arg(long)]
    pub mode: Option<String>,
    /// Shots per circuit.
    #[arg(long)]
    pub shots: Option<String>,
    /// Base seed (default: $QET_SEED, then 1).
    #[arg(long)]
    pub seed: Option<String>,
    /// none, a preset name, or four probabilities "p10,p01,p10,p01" for qubits 0 and 1.
    #[arg(long)]
    pub noise: Option<String>,
    /// none, direct or least-squares.
    #[arg(long)]
    pub mitigation: Option<String>,
    /// Shots per calibration circuit (default: same as --shots).
    #[arg(long)]
    pub calibration_shots: Option<String>,
    /// Also write the output to this file.
    #[arg(long)]
    pub out: Option<PathBuf>,
    /// h axis: "lo:hi:n" or a comma-separated list.
    #[arg(long)]
    pub grid_h: Option<String>,
    /// k axis: "lo:hi:n" or a comma-separated list.
    #[arg(long)]
    pub grid_k: Option<String>,
    /// End of the time grid (default 2π/k).
    #[arg(long)]
    pub t_max: Option<String>,
    /// Number of time points, both ends included.
    #[arg(long)]
    pub t_steps: Option<String>,
    /// Parameter pairs "h:k,h:k,..." for the report.
    #[arg(long)]
    pub pairs: Option<String>,
    /// csv or json (report and mitigate-demo).
    #[arg(long)]
    pub format: Option<String>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Format {
    Csv,
    Json,
    Text,
}

impl FromStr for Format {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, String> {
        match s {
            "csv" => Ok(Self::Csv),
            "json" => Ok(Self::Json),
            "text" => Ok(Self::Text),
            other => Err(format!("unknown format {other:?} (expected csv|json|text)")),
        }
    }
}

/// A noise model together with the text the user gave for it.
#[derive(Debug, Clone, PartialEq)]
pub struct NoiseSpec {
    pub label: String,
    pub noise: ReadoutNoise,
}

impl FromStr for NoiseSpec {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, String> {
        let noise: ReadoutNoise = s.parse().map_err(|e: qet_core::QetError| {
            let names: Vec<&str> = PRESETS.iter().map(|p| p.0).collect();
            format!(
                "{e} (expected none, one of {}, or four probabilities)",
                names.join(", ")
            )
        })?;
        let label = if s == "none" || PRESETS.iter().any(|p| p.0 == s) {
            s.to_string()
        } else {
            noise.to_string()
        };
        Ok(Self { label, noise })
    }
}

/// `none` or a mitigation method.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Mitigation(pub Option<MitigationMethod>);

impl Mitigation {
    pub fn as_str(&self) -> &'static str {
        self.0.map_or("none", |m| m.as_str())
    }
}

impl FromStr for Mitigation {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, String> {
        if s == "none" {
            Ok(Self(None))
        } else {
            s.parse().map(|m| Self(Some(m)))
        }
    }
}

fn parse_axis(s: &str) -> Result<Vec<f64>, String> {
    let bad = || format!("invalid grid axis {s:?} (expected lo:hi:n or a comma-separated list)");
    if let [lo, hi, n] = s.split(':').collect::<Vec<_>>()[..] {
        let lo: f64 = lo.trim().parse().map_err(|_| bad())?;
        let hi: f64 = hi.trim().parse().map_err(|_| bad())?;
        let n: usize = n.trim().parse().map_err(|_| bad())?;
        return Ok(linspace((lo, hi), n));
    }
    s.split(',')
        .map(|v| v.trim().parse::<f64>().map_err(|_| bad()))
        .collect()
}

#[derive(Debug, Clone, PartialEq)]
pub struct Axis(pub Vec<f64>);

impl FromStr for Axis {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, String> {
        parse_axis(s).map(Self)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Pairs(pub Vec<(f64, f64)>);

impl FromStr for Pairs {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, String> {
        s.split(',')
            .map(|pair| {
                let (h, k) = pair
                    .split_once(':')
                    .ok_or_else(|| format!("invalid pair {pair:?} (expected h:k)"))?;
                let parse = |v: &str| {
                    v.trim()
                        .parse::<f64>()
                        .map_err(|_| format!("invalid pair {pair:?} (expected h:k)"))
                };
                Ok((parse(h)?, parse(k)?))
            })
            .collect::<Result<_, String>>()
            .map(Self)
    }
}

/// Reads a flat config file. Values may be strings, integers, floats or booleans.
pub fn load_config(path: &Path) -> Result<BTreeMap<String, String>, ConfigError> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| err(format!("cannot read config {}: {e}", path.display())))?;
    let table: toml::Table = text
        .parse()
        .map_err(|e| err(format!("invalid config {}: {e}", path.display())))?;
    let mut out = BTreeMap::new();
    for (key, value) in table {
        if !CONFIG_KEYS.contains(&key.as_str()) {
            return Err(err(format!(
                "unknown config key {key:?} (expected one of {})",
                CONFIG_KEYS.join(", ")
            )));
        }
        let text = match value {
            toml::Value::String(s) => s,
            toml::Value::Integer(i) => i.to_string(),
            toml::Value::Float(f) => f.to_string(),
            toml::Value::Boolean(b) => b.to_string(),
            other => {
                return Err(err(format!(
                    "config key {key:?} must be a scalar, got {}",
                    other.type_str()
                )))
            }
        };
        out.insert(key, text);
    }
    Ok(out)
}

/// Options after merging flags, config file and environment.
pub struct Resolved {
    flags: Options,
    file: BTreeMap<String, String>,
    env_seed: Option<String>,
}

impl Resolved {
    pub fn new(flags: Options, env_seed: Option<String>) -> Result<Self, ConfigError> {
        let file = match &flags.config {
            Some(path) => load_config(path)?,
            None => BTreeMap::new(),
        };
        Ok(Self {
            flags,
            file,
            env_seed,
        })
    }

    fn raw(&self, key: &str) -> Option<String> {
        let flag = match key {
            "h" => &self.flags.h,
            "k" => &self.flags.k,
            "target" => &self.flags.target,
            "mode" => &self.flags.mode,
            "shots" => &self.flags.shots,
            "seed" => &self.flags.seed,
            "noise" => &self.flags.noise,
            "mitigation" => &self.flags.mitigation,
            "calibration-shots" => &self.flags.calibration_shots,
            "grid-h" => &self.flags.grid_h,
            "grid-k" => &self.flags.grid_k,
            "t-max" => &self.flags.t_max,
            "t-steps" => &self.flags.t_steps,
            "pairs" => &self.flags.pairs,
            "format" => &self.flags.format,
            _ => &None,
        };
        flag.clone().or_else(|| self.file.get(key).cloned())
    }

    pub fn get<T>(&self, key: &str) -> Result<Option<T>, ConfigError>
    where
        T: FromStr,
        T::Err: fmt::Display,
    {
        self.raw(key)
            .map(|s| {
                s.trim()
                    .parse::<T>()
                    .map_err(|e| err(format!("invalid --{key} value {s:?}: {e}")))
            })
            .transpose()
    }

    pub fn get_or<T>(&self, key: &str, default: T) -> Result<T, ConfigError>
    where
        T: FromStr,
        T::Err: fmt::Display,
    {
        Ok(self.get(key)?.unwrap_or(default))
    }

    pub fn out(&self) -> Option<PathBuf> {
        self.flags
            .out
            .clone()
            .or_else(|| self.file.get("out").map(PathBuf::from))
    }

    pub fn seed(&self) -> Result<u64, ConfigError> {
        if let Some(seed) = self.get::<u64>("seed")? {
            return Ok(seed);
        }
        match &self.env_seed {
            Some(s) => s
                .trim()
                .parse()
                .map_err(|e| err(format!("invalid {SEED_ENV} value {s:?}: {e}"))),
            None => Ok(1),
        }
    }

    pub fn params(&self) -> Result<ModelParams, ConfigError> {
        let h = self.get_or("h", 1.0)?;
        let k = self.get_or("k", 1.0)?;
        ModelParams::new(h, k).map_err(|e| err(e.to_string()))
    }

    pub fn shots(&self) -> Result<u64, ConfigError> {
        let shots = self.get_or("shots", 100_000u64)?;
        if shots == 0 {
            return Err(err("--shots must be at least 1"));
        }
        Ok(shots)
    }

    pub fn calibration_shots(&self, shots: u64) -> Result<u64, ConfigError> {
        let n = self.get_or("calibration-shots", shots)?;
        if n == 0 {
            return Err(err("--calibration-shots must be at least 1"));
        }
        Ok(n)
    }

    pub fn target(&self) -> Result<Quantity, ConfigError> {
        self.get_or("target", Quantity::V)
    }

    pub fn mode(&self) -> Result<ProtocolMode, ConfigError> {
        self.get_or("mode", ProtocolMode::Conditional)
    }

    pub fn noise(&self, default: &str) -> Result<NoiseSpec, ConfigError> {
        match self.get("noise")? {
            Some(n) => Ok(n),
            None => default.parse().map_err(err),
        }
    }

    pub fn mitigation(&self, default: Mitigation) -> Result<Mitigation, ConfigError> {
        self.get_or("mitigation", default)
    }

    pub fn grid(&self) -> Result<SweepGrid, ConfigError> {
        let default = || Axis(linspace((0.05, 2.0), 50));
        let h = self.get::<Axis>("grid-h")?.unwrap_or_else(default);
        let k = self.get::<Axis>("grid-k")?.unwrap_or_else(default);
        SweepGrid::new(h.0, k.0).map_err(|e| err(e.to_string()))
    }

    pub fn format(&self, default: Format) -> Result<Format, ConfigError> {
        self.get_or("format", default)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn axis_forms() {
        assert_eq!(parse_axis("0.5,1,1.5").unwrap(), vec![0.5, 1.0, 1.5]);
        assert_eq!(parse_axis("1:2:3").unwrap(), vec![1.0, 1.5, 2.0]);
        assert!(parse_axis("1:2").is_err());
        assert!(parse_axis("a").is_err());
    }

    #[test]
    fn pairs_form() {
        let p: Pairs = "1:0.2, 1.5:1".parse().unwrap();
        assert_eq!(p.0, vec![(1.0, 0.2), (1.5, 1.0)]);
        assert!("1,2".parse::<Pairs>().is_err());
    }

    #[test]
    fn noise_labels() {
        let preset: NoiseSpec = "lima-like".parse().unwrap();
        assert_eq!(preset.label, "lima-like");
        let explicit: NoiseSpec = "0.1,0.2,0,1".parse().unwrap();
        assert_eq!(explicit.label, "0.1,0.2,0,1");
        assert!("nope".parse::<NoiseSpec>().is_err());
    }

    #[test]
    fn flags_override_file_and_env() {
        let flags = Options {
            seed: Some("5".into()),
            ..Options::default()
        };
        let mut r = Resolved::new(flags, Some("9".into())).unwrap();
        r.file.insert("seed".into(), "7".into());
        assert_eq!(r.seed().unwrap(), 5);
        r.flags.seed = None;
        assert_eq!(r.seed().unwrap(), 7);
        r.file.clear();
        assert_eq!(r.seed().unwrap(), 9);
        r.env_seed = None;
        assert_eq!(r.seed().unwrap(), 1);
    }

    #[test]
    fn zero_shots_is_a_config_error() {
        let flags = Options {
            shots: Some("0".into()),
            ..Options::default()
        };
        assert!(Resolved::new(flags, None).unwrap().shots().is_err());
    }
}
