//! Experiment configuration files.
//!
//! Grammar (one item per line):
//!
//! ```text
//! # comment            ; comment
//! [section]            sections: gate, opa2, opa3, spectral
//! key = value          value: number | number dB | number % | true | false | auto
//! ```
//!
//! `x dB` converts to the power ratio `10^{x/10}` and `x %` to `x/100`. For
//! `ancilla_squeezing` and `ancilla_antisqueezing` a dB value is a magnitude:
//! `ancilla_squeezing = 3.6 dB` means `S- = 10^{-0.36}`. Spectral frequencies
//! are in THz, delays in fs.
//!
//! | key | default |
//! |-----|---------|
//! | `gate.T` | required |
//! | `gate.ancilla_r` or `gate.ancilla_squeezing` + `gate.ancilla_antisqueezing` | required |
//! | `gate.ancilla_loss`, `gate.lower_arm_loss`, `gate.tap_loss` | 0 |
//! | `gate.displacement_R` | 1 % |
//! | `gate.ff_attenuation` | auto |
//! | `gate.phase_error` (rad) | 0 |
//! | `gate.feedforward` | true |
//! | `opa2.gain` | required |
//! | `opa2.loss` | 0, or derived from the split |
//! | `opa2.coupling_loss` + `opa2.propagation_loss` | lumped model when absent |
//! | `opa2.length` (m) | 1 |
//! | `opa3.gain` | 0 dB |
//! | `opa3.loss` | 0 |
//! | `opa3.explicit_gain` | false |
//! | `spectral.delta_tau_fs`, `spectral.gdd_fs2` | 0 |
//! | `spectral.mask_inner_THz` / `spectral.mask_outer_THz` | 0.1 / 1.3 |

use std::collections::BTreeMap;
use std::fmt::{self, Write as _};

use sha2::{Digest, Sha256};

use crate::gate::{Ancilla, FfAttenuation, GateConfig, Opa2Arm, Readout, SpectralModel, WaveguideSplit};
use crate::gaussian::{from_db, to_db};

const SECTIONS: &[(&str, &[&str])] = &[
    (
        "gate",
        &[
            "T",
            "ancilla_r",
            "ancilla_squeezing",
            "ancilla_antisqueezing",
            "ancilla_loss",
            "lower_arm_loss",
            "tap_loss",
            "displacement_R",
            "ff_attenuation",
            "phase_error",
            "feedforward",
        ],
    ),
    ("opa2", &["gain", "loss", "coupling_loss", "propagation_loss", "length"]),
    ("opa3", &["gain", "loss", "explicit_gain"]),
    ("spectral", &["delta_tau_fs", "gdd_fs2", "mask_inner_THz", "mask_outer_THz"]),
];

#[derive(Debug, Clone, PartialEq)]
pub struct ConfigError {
    /// 1-based `(line, column)` when the error points into the text.
    pub location: Option<(usize, usize)>,
    pub message: String,
}

impl ConfigError {
    fn at(line: usize, column: usize, message: impl Into<String>) -> Self {
        Self { location: Some((line, column)), message: message.into() }
    }

    fn general(message: impl Into<String>) -> Self {
        Self { location: None, message: message.into() }
    }
}

impl fmt::Display for ConfigError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self.location {
            Some((l, c)) => write!(f, "line {l}, column {c}: {}", self.message),
            None => f.write_str(&self.message),
        }
    }
}

impl std::error::Error for ConfigError {}

#[derive(Debug, Clone, Copy, PartialEq)]
enum Unit {
    Plain,
    Db,
    Percent,
}

#[derive(Debug, Clone, Copy, PartialEq)]
enum Value {
    Number { value: f64, unit: Unit },
    Bool(bool),
    Auto,
}

#[derive(Debug, Clone, Copy)]
struct Entry {
    value: Value,
    line: usize,
    column: usize,
}

impl Entry {
    fn number(&self, key: &str) -> Result<f64, ConfigError> {
        match self.value {
            Value::Number { value, unit: Unit::Plain } => Ok(value),
            Value::Number { value, unit: Unit::Db } => Ok(from_db(value)),
            Value::Number { value, unit: Unit::Percent } => Ok(value / 100.0),
            _ => Err(ConfigError::at(self.line, self.column, format!("`{key}` expects a number"))),
        }
    }

    /// Power gain as dB: `x dB` taken as-is, plain values as linear ratios.
    fn gain_db(&self, key: &str) -> Result<f64, ConfigError> {
        match self.value {
            Value::Number { value, unit: Unit::Db } => Ok(value),
            Value::Number { value, unit: Unit::Plain } if value > 0.0 => {
                to_db(value).map_err(|e| ConfigError::at(self.line, self.column, e.to_string()))
            }
            _ => Err(ConfigError::at(self.line, self.column, format!("`{key}` expects a positive gain"))),
        }
    }

    /// Squeezing level with the quoted-magnitude dB convention.
    fn level(&self, key: &str, above_shot_noise: bool) -> Result<f64, ConfigError> {
        match self.value {
            Value::Number { value, unit: Unit::Db } => {
                let m = value.abs();
                Ok(from_db(if above_shot_noise { m } else { -m }))
            }
            _ => self.number(key),
        }
    }

    fn boolean(&self, key: &str) -> Result<bool, ConfigError> {
        match self.value {
            Value::Bool(b) => Ok(b),
            _ => Err(ConfigError::at(self.line, self.column, format!("`{key}` expects true or false"))),
        }
    }
}

fn parse_value(raw: &str, line: usize, column: usize) -> Result<Value, ConfigError> {
    match raw.to_ascii_lowercase().as_str() {
        "true" => return Ok(Value::Bool(true)),
        "false" => return Ok(Value::Bool(false)),
        "auto" => return Ok(Value::Auto),
        _ => {}
    }
    let (number, unit) = if let Some(n) = raw.strip_suffix("dB") {
        (n, Unit::Db)
    } else if let Some(n) = raw.strip_suffix('%') {
        (n, Unit::Percent)
    } else {
        (raw, Unit::Plain)
    };
    let value: f64 =
        number.trim_end().parse().map_err(|_| ConfigError::at(line, column, format!("cannot parse value `{raw}`")))?;
    if !value.is_finite() {
        return Err(ConfigError::at(line, column, format!("value `{raw}` is not finite")));
    }
    Ok(Value::Number { value, unit })
}

type Table = BTreeMap<(String, String), Entry>;

fn tokenize(text: &str) -> Result<Table, ConfigError> {
    let mut table = Table::new();
    let mut section: Option<String> = None;
    for (idx, full) in text.lines().enumerate() {
        let line_no = idx + 1;
        let content = match full.find(['#', ';']) {
            Some(pos) => &full[..pos],
            None => full,
        };
        let trimmed = content.trim();
        if trimmed.is_empty() {
            continue;
        }
        let indent = content.len() - content.trim_start().len();
        if let Some(rest) = trimmed.strip_prefix('[') {
            let Some(name) = rest.strip_suffix(']') else {
                return Err(ConfigError::at(line_no, indent + 1, "unterminated section header"));
            };
            let name = name.trim();
            if !SECTIONS.iter().any(|(s, _)| *s == name) {
                return Err(ConfigError::at(line_no, indent + 2, format!("unknown section `[{name}]`")));
            }
            section = Some(name.to_string());
            continue;
        }
        let Some(eq) = content.find('=') else {
            return Err(ConfigError::at(line_no, indent + 1, "expected `key = value`"));
        };
        let key = content[..eq].trim();
        let raw = content[eq + 1..].trim();
        let value_col = eq + 2 + (content[eq + 1..].len() - content[eq + 1..].trim_start().len());
        let Some(sec) = section.as_deref() else {
            return Err(ConfigError::at(line_no, indent + 1, format!("key `{key}` outside of any section")));
        };
        let known = SECTIONS.iter().find(|(s, _)| *s == sec).map(|(_, k)| *k).unwrap_or(&[]);
        if !known.contains(&key) {
            return Err(ConfigError::at(line_no, indent + 1, format!("unknown key `{sec}.{key}`")));
        }
        if raw.is_empty() {
            return Err(ConfigError::at(line_no, value_col, format!("missing value for `{sec}.{key}`")));
        }
        let value = parse_value(raw, line_no, value_col)?;
        let entry = Entry { value, line: line_no, column: value_col };
        if table.insert((sec.to_string(), key.to_string()), entry).is_some() {
            return Err(ConfigError::at(line_no, indent + 1, format!("duplicate key `{sec}.{key}`")));
        }
    }
    Ok(table)
}

/// A fully resolved experiment.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ExperimentConfig {
    pub gate: GateConfig,
    pub spectral: SpectralModel,
}

struct Lookup<'a>(&'a Table);

impl Lookup<'_> {
    fn get(&self, section: &str, key: &str) -> Option<&Entry> {
        self.0.get(&(section.to_string(), key.to_string()))
    }

    fn required(&self, section: &str, key: &str) -> Result<&Entry, ConfigError> {
        self.get(section, key).ok_or_else(|| ConfigError::general(format!("missing required key `{section}.{key}`")))
    }

    fn number_or(&self, section: &str, key: &str, default: f64) -> Result<f64, ConfigError> {
        self.get(section, key).map_or(Ok(default), |e| e.number(key))
    }
}

pub fn parse(text: &str) -> Result<ExperimentConfig, ConfigError> {
    let table = tokenize(text)?;
    let cfg = Lookup(&table);

    let transmittance = cfg.required("gate", "T")?.number("T")?;

    let ancilla = match (
        cfg.get("gate", "ancilla_r"),
        cfg.get("gate", "ancilla_squeezing"),
        cfg.get("gate", "ancilla_antisqueezing"),
    ) {
        (Some(r), None, None) => Ancilla::Squeezed { r: r.number("ancilla_r")? },
        (None, Some(sq), Some(anti)) => Ancilla::Measured {
            s_minus: sq.level("ancilla_squeezing", false)?,
            s_plus: anti.level("ancilla_antisqueezing", true)?,
        },
        (Some(e), _, _) => {
            return Err(ConfigError::at(e.line, e.column, "give either `ancilla_r` or the measured pair, not both"))
        }
        (None, None, None) => {
            return Err(ConfigError::general(
                "missing required key `gate.ancilla_r` (or `gate.ancilla_squeezing` + `gate.ancilla_antisqueezing`)",
            ))
        }
        (None, Some(_), None) => return Err(ConfigError::general("missing required key `gate.ancilla_antisqueezing`")),
        (None, None, Some(_)) => return Err(ConfigError::general("missing required key `gate.ancilla_squeezing`")),
    };

    let ff_attenuation = match cfg.get("gate", "ff_attenuation") {
        None => FfAttenuation::Auto,
        Some(Entry { value: Value::Auto, .. }) => FfAttenuation::Auto,
        Some(e) => FfAttenuation::Fixed(e.number("ff_attenuation")?),
    };

    let opa2_gain_db = cfg.required("opa2", "gain")?.gain_db("gain")?;
    let length = cfg.number_or("opa2", "length", 1.0)?;
    let mut opa2 = match (cfg.get("opa2", "coupling_loss"), cfg.get("opa2", "propagation_loss")) {
        (Some(c), Some(p)) => {
            Opa2Arm::waveguide(opa2_gain_db, c.number("coupling_loss")?, p.number("propagation_loss")?, length)
        }
        (None, None) => Opa2Arm::lumped(opa2_gain_db, 0.0),
        _ => {
            return Err(ConfigError::general("`opa2.coupling_loss` and `opa2.propagation_loss` must be given together"))
        }
    };
    if let Some(l) = cfg.get("opa2", "loss") {
        opa2.loss = l.number("loss")?;
    }

    let readout = Readout {
        loss: cfg.number_or("opa3", "loss", 0.0)?,
        gain_db: cfg.get("opa3", "gain").map_or(Ok(0.0), |e| e.gain_db("gain"))?,
        explicit_gain: cfg.get("opa3", "explicit_gain").map_or(Ok(false), |e| e.boolean("explicit_gain"))?,
    };

    let gate = GateConfig {
        transmittance,
        ancilla,
        ancilla_loss: cfg.number_or("gate", "ancilla_loss", 0.0)?,
        opa2,
        readout,
        lower_arm_loss: cfg.number_or("gate", "lower_arm_loss", 0.0)?,
        tap_loss: cfg.number_or("gate", "tap_loss", 0.0)?,
        displacement_r: cfg.number_or("gate", "displacement_R", 0.01)?,
        ff_attenuation,
        phase_error: cfg.number_or("gate", "phase_error", 0.0)?,
        feedforward_enabled: cfg.get("gate", "feedforward").map_or(Ok(true), |e| e.boolean("feedforward"))?,
    };
    gate.validate().map_err(|e| ConfigError::general(e.to_string()))?;

    let spectral = SpectralModel {
        delta_tau: cfg.number_or("spectral", "delta_tau_fs", 0.0)? * 1e-15,
        gdd: cfg.number_or("spectral", "gdd_fs2", 0.0)? * 1e-30,
        mask_inner: cfg.number_or("spectral", "mask_inner_THz", 0.1)? * 1e12,
        mask_outer: cfg.number_or("spectral", "mask_outer_THz", 1.3)? * 1e12,
    };
    spectral.validate().map_err(|e| ConfigError::general(e.to_string()))?;

    Ok(ExperimentConfig { gate, spectral })
}

fn num(x: f64) -> String {
    format!("{x:.16e}")
}

impl ExperimentConfig {
    /// Every setting with defaults materialized, in a fixed order.
    pub fn canonical_text(&self) -> String {
        let g = &self.gate;
        let mut out = String::new();
        let mut kv = |k: &str, v: String| {
            let _ = writeln!(out, "{k} = {v}");
        };
        kv("gate.T", num(g.transmittance));
        match g.ancilla {
            Ancilla::Squeezed { r } => kv("gate.ancilla_r", num(r)),
            Ancilla::Measured { s_minus, s_plus } => {
                kv("gate.ancilla_s_minus", num(s_minus));
                kv("gate.ancilla_s_plus", num(s_plus));
            }
        }
        kv("gate.ancilla_loss", num(g.ancilla_loss));
        kv("gate.lower_arm_loss", num(g.lower_arm_loss));
        kv("gate.tap_loss", num(g.tap_loss));
        kv("gate.displacement_R", num(g.displacement_r));
        kv(
            "gate.ff_attenuation",
            match g.ff_attenuation {
                FfAttenuation::Auto => "auto".into(),
                FfAttenuation::Fixed(a) => num(a),
            },
        );
        kv("gate.phase_error", num(g.phase_error));
        kv("gate.feedforward", g.feedforward_enabled.to_string());
        kv("opa2.gain_dB", num(g.opa2.gain_db));
        kv("opa2.loss", num(g.opa2.loss));
        match g.opa2.waveguide {
            Some(WaveguideSplit { coupling_loss, propagation_loss, length }) => {
                kv("opa2.model", "waveguide".into());
                kv("opa2.coupling_loss", num(coupling_loss));
                kv("opa2.propagation_loss", num(propagation_loss));
                kv("opa2.length", num(length));
            }
            None => kv("opa2.model", "lumped".into()),
        }
        kv("opa3.gain_dB", num(g.readout.gain_db));
        kv("opa3.loss", num(g.readout.loss));
        kv("opa3.explicit_gain", g.readout.explicit_gain.to_string());
        let s = &self.spectral;
        kv("spectral.delta_tau_s", num(s.delta_tau));
        kv("spectral.gdd_s2", num(s.gdd));
        kv("spectral.mask_inner_Hz", num(s.mask_inner));
        kv("spectral.mask_outer_Hz", num(s.mask_outer));
        out
    }

    /// Hex SHA-256 of [`ExperimentConfig::canonical_text`].
    pub fn digest(&self) -> String {
        Sha256::digest(self.canonical_text().as_bytes()).iter().map(|b| format!("{b:02x}")).collect()
    }
}
