use std::path::PathBuf;

pub const DEFAULT_PORT: u16 = 8080;
pub const DEFAULT_DATA_DIR: &str = "fleetline-data";

/// Service settings, normally read from `FLEETLINE_*` environment variables.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Config {
    pub port: u16,
    pub data_dir: PathBuf,
    /// Without one the trip QR endpoint answers 503.
    pub qr_passphrase: Option<String>,
    /// Used only when the log is empty and the admin account must be created.
    pub admin_password: Option<String>,
}

impl Default for Config {
    fn default() -> Self {
        Self {
            port: DEFAULT_PORT,
            data_dir: PathBuf::from(DEFAULT_DATA_DIR),
            qr_passphrase: None,
            admin_password: None,
        }
    }
}

impl Config {
    pub fn from_env() -> Result<Self, String> {
        Self::from_lookup(|k| std::env::var(k).ok())
    }

    pub fn from_lookup(get: impl Fn(&str) -> Option<String>) -> Result<Self, String> {
        let non_empty = |k: &str| get(k).filter(|v| !v.is_empty());
        let port = match non_empty("FLEETLINE_PORT") {
            Some(p) => p
                .parse()
                .map_err(|_| format!("FLEETLINE_PORT: not a port number: {p}"))?,
            None => DEFAULT_PORT,
        };
        Ok(Self {
            port,
            data_dir: non_empty("FLEETLINE_DATA_DIR")
                .map_or_else(|| PathBuf::from(DEFAULT_DATA_DIR), PathBuf::from),
            qr_passphrase: non_empty("FLEETLINE_QR_PASSPHRASE"),
            admin_password: non_empty("FLEETLINE_ADMIN_PASSWORD"),
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn defaults_and_overrides() {
        assert_eq!(Config::from_lookup(|_| None).unwrap(), Config::default());
        let c = Config::from_lookup(|k| match k {
            "FLEETLINE_PORT" => Some("9000".into()),
            "FLEETLINE_DATA_DIR" => Some("/tmp/x".into()),
            "FLEETLINE_QR_PASSPHRASE" => Some("".into()),
            _ => None,
        })
        .unwrap();
        assert_eq!(c.port, 9000);
        assert_eq!(c.data_dir, PathBuf::from("/tmp/x"));
        assert_eq!(c.qr_passphrase, None);
        assert!(Config::from_lookup(|k| (k == "FLEETLINE_PORT").then(|| "http".into())).is_err());
    }
}
