//! Flat `key = value` configuration files.
//!
//! Blank lines and `#` comments are ignored. Every key in [`CONFIG_KEYS`] is
//! required and no other key is accepted.

use std::collections::BTreeMap;
use std::path::Path;

use sha2::{Digest, Sha256};

use crate::error::{Error, Result};
use crate::model::SystemConfig;

pub const CONFIG_KEYS: [&str; 14] = [
    "num_miners",
    "carrier_frequency_hz",
    "distance_m",
    "bandwidth_hz",
    "noise_psd_dbm_hz",
    "tx_power_w",
    "snr_threshold_db",
    "compute_power_w",
    "lambda0",
    "mobility_power_w",
    "speed_mps",
    "ack_bits",
    "latency_model",
    "rng_seed",
];

/// `key → (line number, raw value)`, rejecting duplicates.
pub(crate) fn parse_pairs(text: &str) -> Result<BTreeMap<String, (usize, String)>> {
    let mut pairs = BTreeMap::new();
    for (idx, raw) in text.lines().enumerate() {
        let line_no = idx + 1;
        let line = raw.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        let (key, value) = line.split_once('=').ok_or_else(|| Error::Parse {
            line: line_no,
            message: format!("expected `key = value`, found `{line}`"),
        })?;
        let key = key.trim().to_string();
        if pairs
            .insert(key.clone(), (line_no, value.trim().to_string()))
            .is_some()
        {
            return Err(Error::Parse {
                line: line_no,
                message: format!("duplicate key `{key}`"),
            });
        }
    }
    Ok(pairs)
}

fn parse_value<T: std::str::FromStr>(key: &str, line: usize, raw: &str) -> Result<T>
where
    T::Err: std::fmt::Display,
{
    raw.parse().map_err(|e| Error::Parse {
        line,
        message: format!("bad value for `{key}`: {e}"),
    })
}

/// Sets one config key from its textual value.
pub fn apply_key(config: &mut SystemConfig, key: &str, line: usize, raw: &str) -> Result<()> {
    let c = &mut config.channel;
    let m = &mut config.miner;
    match key {
        "num_miners" => config.num_miners = parse_value(key, line, raw)?,
        "carrier_frequency_hz" => c.carrier_frequency_hz = parse_value(key, line, raw)?,
        "distance_m" => c.distance_m = parse_value(key, line, raw)?,
        "bandwidth_hz" => c.bandwidth_hz = parse_value(key, line, raw)?,
        "noise_psd_dbm_hz" => c.noise_psd_dbm_hz = parse_value(key, line, raw)?,
        "tx_power_w" => c.tx_power_w = parse_value(key, line, raw)?,
        "snr_threshold_db" => {
            c.set_snr_threshold_db(parse_value(key, line, raw)?);
        }
        "compute_power_w" => m.compute_power_w = parse_value(key, line, raw)?,
        "lambda0" => m.lambda0 = parse_value(key, line, raw)?,
        "mobility_power_w" => m.mobility_power_w = parse_value(key, line, raw)?,
        "speed_mps" => m.speed_mps = parse_value(key, line, raw)?,
        "ack_bits" => m.ack_bits = parse_value(key, line, raw)?,
        "latency_model" => config.latency_model = parse_value(key, line, raw)?,
        "rng_seed" => config.rng_seed = parse_value(key, line, raw)?,
        other => return Err(Error::UnknownKey(other.to_string())),
    }
    Ok(())
}

/// Parses and validates a complete config file.
pub fn parse_config(text: &str) -> Result<SystemConfig> {
    let pairs = parse_pairs(text)?;
    if let Some(unknown) = pairs.keys().find(|k| !CONFIG_KEYS.contains(&k.as_str())) {
        return Err(Error::UnknownKey(unknown.clone()));
    }
    if let Some(missing) = CONFIG_KEYS.iter().find(|k| !pairs.contains_key(**k)) {
        return Err(Error::MissingKey(missing.to_string()));
    }
    let mut config = SystemConfig::default();
    for key in CONFIG_KEYS {
        let (line, raw) = &pairs[key];
        apply_key(&mut config, key, *line, raw)?;
    }
    config.validate().map_err(Error::InvalidConfig)?;
    Ok(config)
}

pub fn load_config(path: impl AsRef<Path>) -> Result<SystemConfig> {
    parse_config(&std::fs::read_to_string(path)?)
}

/// Canonical text for `config`, keys in [`CONFIG_KEYS`] order.
pub fn render_config(config: &SystemConfig) -> String {
    let c = &config.channel;
    let m = &config.miner;
    let values = [
        config.num_miners.to_string(),
        c.carrier_frequency_hz.to_string(),
        c.distance_m.to_string(),
        c.bandwidth_hz.to_string(),
        c.noise_psd_dbm_hz.to_string(),
        c.tx_power_w.to_string(),
        c.snr_threshold_db().to_string(),
        m.compute_power_w.to_string(),
        m.lambda0.to_string(),
        m.mobility_power_w.to_string(),
        m.speed_mps.to_string(),
        m.ack_bits.to_string(),
        config.latency_model.to_string(),
        config.rng_seed.to_string(),
    ];
    CONFIG_KEYS
        .iter()
        .zip(values)
        .map(|(k, v)| format!("{k} = {v}\n"))
        .collect()
}

/// First 64 bits of the SHA-256 of the canonical text, as hex. The linear
/// threshold's bit pattern is included since dB text need not pin it down.
pub fn config_hash(config: &SystemConfig) -> String {
    let mut hasher = Sha256::new();
    hasher.update(render_config(config).as_bytes());
    hasher.update(format!(
        "mixture_truncation = {}\nquadrature_tol = {}\nsnr_threshold_bits = {:016x}\n",
        config.mixture_truncation,
        config.quadrature_tol,
        config.channel.snr_threshold.to_bits()
    ));
    hasher.finalize()[..8]
        .iter()
        .map(|b| format!("{b:02x}"))
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn default_round_trips() {
        let cfg = SystemConfig::default();
        let parsed = parse_config(&render_config(&cfg)).unwrap();
        assert_eq!(parsed.num_miners, cfg.num_miners);
        assert_eq!(parsed.channel.tx_power_w, cfg.channel.tx_power_w);
        assert_eq!(parsed, cfg);
        assert_eq!(config_hash(&parsed), config_hash(&cfg));
    }

    #[test]
    fn missing_key_is_named() {
        let text: String = render_config(&SystemConfig::default())
            .lines()
            .filter(|l| !l.starts_with("lambda0"))
            .map(|l| format!("{l}\n"))
            .collect();
        match parse_config(&text) {
            Err(Error::MissingKey(k)) => assert_eq!(k, "lambda0"),
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn unknown_key_rejected() {
        let text = render_config(&SystemConfig::default()) + "antenna_gain = 3\n";
        assert!(matches!(parse_config(&text), Err(Error::UnknownKey(k)) if k == "antenna_gain"));
    }

    #[test]
    fn comments_and_blank_lines() {
        let text = format!("# header\n\n{}", render_config(&SystemConfig::default()))
            .replace("num_miners = 10", "num_miners = 3   # three drones");
        assert_eq!(parse_config(&text).unwrap().num_miners, 3);
    }

    #[test]
    fn bad_values_report_line() {
        let text =
            render_config(&SystemConfig::default()).replace("rng_seed = 42", "rng_seed = -1");
        assert!(matches!(
            parse_config(&text),
            Err(Error::Parse { line: 14, .. })
        ));
        let text =
            render_config(&SystemConfig::default()).replace("num_miners = 10", "num_miners = 0");
        assert!(matches!(parse_config(&text), Err(Error::InvalidConfig(_))));
    }

    #[test]
    fn duplicate_key_rejected() {
        let text = render_config(&SystemConfig::default()) + "num_miners = 4\n";
        assert!(matches!(
            parse_config(&text),
            Err(Error::Parse { line: 15, .. })
        ));
    }

    #[test]
    fn hash_tracks_content() {
        let a = SystemConfig::default();
        let b = SystemConfig {
            num_miners: 11,
            ..a
        };
        assert_eq!(config_hash(&a), config_hash(&a));
        assert_ne!(config_hash(&a), config_hash(&b));
        assert_eq!(config_hash(&a).len(), 16);
    }

    proptest! {
        #[test]
        fn render_parse_is_stable(
            miners in 1u32..500,
            tx in 1e-3f64..10.0,
            db in 0.0f64..90.0,
            speed in 0.5f64..40.0,
            seed in any::<u64>(),
        ) {
            let mut cfg = SystemConfig { num_miners: miners, rng_seed: seed, ..Default::default() };
            cfg.channel.tx_power_w = tx;
            cfg.channel.set_snr_threshold_db(db);
            cfg.miner.speed_mps = speed;
            let once = parse_config(&render_config(&cfg)).unwrap();
            let twice = parse_config(&render_config(&once)).unwrap();
            prop_assert_eq!(once.num_miners, miners);
            prop_assert_eq!(once.rng_seed, seed);
            prop_assert_eq!(once.channel.tx_power_w, tx);
            prop_assert!((once.channel.snr_threshold / cfg.channel.snr_threshold - 1.0).abs() < 1e-12);
            prop_assert_eq!(twice, once);
        }
    }
}
