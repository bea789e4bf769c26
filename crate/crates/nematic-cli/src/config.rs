//! Layered settings: command-line flag, then the command's INI section, then the
//! INI general section, then the built-in default.

use std::path::Path;
use std::str::FromStr;

use ini::Ini;

use crate::CliError;

pub struct Settings {
    ini: Option<Ini>,
    section: &'static str,
}

impl Settings {
    pub fn load(path: Option<&Path>, section: &'static str) -> Result<Self, CliError> {
        let ini = match path {
            Some(p) => Some(
                Ini::load_from_file(p).map_err(|e| CliError::Usage(format!("cannot read config {}: {e}", p.display())))?,
            ),
            None => None,
        };
        Ok(Self { ini, section })
    }

    fn raw(&self, key: &str) -> Option<&str> {
        let ini = self.ini.as_ref()?;
        ini.section(Some(self.section))
            .and_then(|s| s.get(key))
            .or_else(|| ini.general_section().get(key))
    }

    pub fn get<T: FromStr>(&self, flag: Option<T>, key: &str, default: T) -> Result<T, CliError> {
        Ok(self.opt(flag, key)?.unwrap_or(default))
    }

    pub fn opt<T: FromStr>(&self, flag: Option<T>, key: &str) -> Result<Option<T>, CliError> {
        if flag.is_some() {
            return Ok(flag);
        }
        match self.raw(key) {
            None => Ok(None),
            Some(v) => v
                .trim()
                .parse()
                .map(Some)
                .map_err(|_| CliError::Usage(format!("config key {key}: cannot parse {v:?}"))),
        }
    }

    /// Comma-separated list of reals.
    pub fn list(&self, flag: Option<Vec<f64>>, key: &str) -> Result<Option<Vec<f64>>, CliError> {
        if flag.is_some() {
            return Ok(flag);
        }
        match self.raw(key) {
            None => Ok(None),
            Some(v) => v
                .split(',')
                .map(|s| s.trim().parse::<f64>())
                .collect::<Result<Vec<_>, _>>()
                .map(Some)
                .map_err(|_| CliError::Usage(format!("config key {key}: cannot parse list {v:?}"))),
        }
    }

    pub fn flag(&self, flag: bool, key: &str) -> Result<bool, CliError> {
        if flag {
            return Ok(true);
        }
        self.get(None, key, false)
    }
}
