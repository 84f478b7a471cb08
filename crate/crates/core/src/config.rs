//! Plain-text `key = value` files for [`SimConfig`].
//!
//! Keys match the config field names (the drive is flattened into
//! `vibration_freq_hz`, `vibration_duty`, `vibration_phase`). Every key is
//! required and unknown keys are rejected. Integers are plain decimal;
//! reals must contain a decimal point. `#` starts a comment.

use std::collections::BTreeSet;
use std::path::Path;

use sha2::{Digest, Sha256};

use crate::error::{Error, Result};
use crate::synth::SimConfig;

/// Config keys in canonical order.
pub const CONFIG_KEYS: [&str; 13] = [
    "fiber_points",
    "num_traces",
    "pulse_width_points",
    "meters_per_point",
    "trace_rate_hz",
    "vibration_point",
    "vibration_freq_hz",
    "vibration_duty",
    "vibration_phase",
    "vibration_depth",
    "noise_sigma",
    "sop_sigma",
    "seed",
];

fn parse_int<T: std::str::FromStr>(key: &str, value: &str) -> Result<T> {
    let bad = || Error::BadValue {
        key: key.to_string(),
        value: value.to_string(),
    };
    if value.is_empty() || !value.bytes().all(|b| b.is_ascii_digit()) {
        return Err(bad());
    }
    value.parse().map_err(|_| bad())
}

fn parse_real(key: &str, value: &str) -> Result<f64> {
    let bad = || Error::BadValue {
        key: key.to_string(),
        value: value.to_string(),
    };
    if !value.contains('.') {
        return Err(bad());
    }
    let v: f64 = value.parse().map_err(|_| bad())?;
    if v.is_finite() {
        Ok(v)
    } else {
        Err(bad())
    }
}

fn fmt_real(v: f64) -> String {
    let s = v.to_string();
    if s.contains('.') {
        s
    } else {
        format!("{s}.0")
    }
}

impl SimConfig {
    /// Sets one field from its textual form.
    pub fn set_key(&mut self, key: &str, value: &str) -> Result<()> {
        match key {
            "fiber_points" => self.fiber_points = parse_int(key, value)?,
            "num_traces" => self.num_traces = parse_int(key, value)?,
            "pulse_width_points" => self.pulse_width_points = parse_int(key, value)?,
            "meters_per_point" => self.meters_per_point = parse_real(key, value)?,
            "trace_rate_hz" => self.trace_rate_hz = parse_real(key, value)?,
            "vibration_point" => self.vibration_point = parse_int(key, value)?,
            "vibration_freq_hz" => self.vibration.freq_hz = parse_real(key, value)?,
            "vibration_duty" => self.vibration.duty = parse_real(key, value)?,
            "vibration_phase" => self.vibration.phase = parse_real(key, value)?,
            "vibration_depth" => self.vibration_depth = parse_real(key, value)?,
            "noise_sigma" => self.noise_sigma = parse_real(key, value)?,
            "sop_sigma" => self.sop_sigma = parse_real(key, value)?,
            "seed" => self.seed = parse_int(key, value)?,
            other => return Err(Error::UnknownKey(other.to_string())),
        }
        Ok(())
    }

    pub fn from_kv_str(text: &str) -> Result<Self> {
        let mut cfg = SimConfig::full_scale();
        let mut seen = BTreeSet::new();
        for (lineno, raw) in text.lines().enumerate() {
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let (key, value) = line.split_once('=').ok_or_else(|| {
                Error::BadConfig(format!("line {}: expected `key = value`", lineno + 1))
            })?;
            let key = key.trim();
            cfg.set_key(key, value.trim())?;
            if !seen.insert(key.to_string()) {
                return Err(Error::BadConfig(format!("duplicate key `{key}`")));
            }
        }
        if let Some(missing) = CONFIG_KEYS.iter().find(|k| !seen.contains(**k)) {
            return Err(Error::MissingKey(missing.to_string()));
        }
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        Self::from_kv_str(&text)
    }

    /// Canonical text form; parses back to an identical config.
    pub fn to_kv_string(&self) -> String {
        let d = &self.vibration;
        let values = [
            self.fiber_points.to_string(),
            self.num_traces.to_string(),
            self.pulse_width_points.to_string(),
            fmt_real(self.meters_per_point),
            fmt_real(self.trace_rate_hz),
            self.vibration_point.to_string(),
            fmt_real(d.freq_hz),
            fmt_real(d.duty),
            fmt_real(d.phase),
            fmt_real(self.vibration_depth),
            fmt_real(self.noise_sigma),
            fmt_real(self.sop_sigma),
            self.seed.to_string(),
        ];
        CONFIG_KEYS
            .iter()
            .zip(values)
            .map(|(k, v)| format!("{k} = {v}\n"))
            .collect()
    }

    /// First 16 hex digits of the SHA-256 of the canonical text form.
    pub fn digest(&self) -> String {
        let hash = Sha256::digest(self.to_kv_string().as_bytes());
        hex::encode(&hash[..8])
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn canonical_text_round_trips() {
        let mut cfg = SimConfig::full_scale();
        cfg.noise_sigma = 1e-7;
        cfg.trace_rate_hz = 10_000.0;
        cfg.seed = 42;
        let text = cfg.to_kv_string();
        assert!(text.contains("noise_sigma = 0.0000001\n"), "{text}");
        assert!(text.contains("trace_rate_hz = 10000.0\n"), "{text}");
        assert_eq!(SimConfig::from_kv_str(&text).unwrap(), cfg);
    }

    #[test]
    fn comments_and_blank_lines_are_ignored() {
        let text = format!("# header\n\n{}", SimConfig::full_scale().to_kv_string())
            .replace("seed = 0", "seed = 0   # trailing");
        assert_eq!(SimConfig::from_kv_str(&text).unwrap(), SimConfig::full_scale());
    }

    #[test]
    fn missing_key_is_named() {
        let text: String = SimConfig::full_scale()
            .to_kv_string()
            .lines()
            .filter(|l| !l.starts_with("sop_sigma"))
            .map(|l| format!("{l}\n"))
            .collect();
        match SimConfig::from_kv_str(&text) {
            Err(Error::MissingKey(k)) => assert_eq!(k, "sop_sigma"),
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn unknown_and_duplicate_keys_are_rejected() {
        let base = SimConfig::full_scale().to_kv_string();
        assert!(matches!(
            SimConfig::from_kv_str(&format!("{base}colour = 1\n")),
            Err(Error::UnknownKey(k)) if k == "colour"
        ));
        assert!(matches!(
            SimConfig::from_kv_str(&format!("{base}seed = 3\n")),
            Err(Error::BadConfig(_))
        ));
    }

    #[test]
    fn number_formats_are_strict() {
        let base = SimConfig::full_scale().to_kv_string();
        let with = |from: &str, to: &str| SimConfig::from_kv_str(&base.replace(from, to));
        assert!(matches!(
            with("meters_per_point = 1.0", "meters_per_point = 1"),
            Err(Error::BadValue { .. })
        ));
        assert!(matches!(
            with("fiber_points = 1500", "fiber_points = 1500.0"),
            Err(Error::BadValue { .. })
        ));
        assert!(matches!(
            with("seed = 0", "seed = -1"),
            Err(Error::BadValue { .. })
        ));
        assert!(with("noise_sigma = 0.1", "noise_sigma = 1.0e-2").is_ok());
    }

    #[test]
    fn invalid_geometry_is_bad_config() {
        let base = SimConfig::full_scale().to_kv_string();
        let text = base.replace("vibration_point = 1049", "vibration_point = 2000");
        assert!(matches!(SimConfig::from_kv_str(&text), Err(Error::BadConfig(_))));
    }

    #[test]
    fn digest_tracks_content() {
        let a = SimConfig::full_scale();
        let mut b = a.clone();
        assert_eq!(a.digest(), b.digest());
        assert_eq!(a.digest().len(), 16);
        b.seed = 1;
        assert_ne!(a.digest(), b.digest());
    }
}
