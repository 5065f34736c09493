//! JSON state files.
//!
//! Gaussian state:
//!
//! ```json
//! {"cm": [[1,0,0,0],[0,1,0,0],[0,0,1,0],[0,0,0,1]], "mean": [0,0,0,0], "convention": "vacuum-unit"}
//! ```
//!
//! `mean` defaults to zero. `convention` is optional but must be
//! `"vacuum-unit"` when present.
//!
//! Gaussian mixture:
//!
//! ```json
//! {"components": [{"weight": 0.5, "cm": [[..]], "mean": [..]}, ...]}
//! ```

use std::fs;
use std::io::{Read, Write};
use std::path::Path;

use nalgebra::Matrix4;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::gaussian::{validate_bona_fide, CovMatrix};
use crate::states::{GaussianMixtureSpec, GaussianStateSpec, MixtureComponent, StateSpec};

pub const CONVENTION: &str = "vacuum-unit";

/// A Gaussian state file as written, before any physicality check.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CmFile {
    pub cm: [[f64; 4]; 4],
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub mean: Option<[f64; 4]>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub convention: Option<String>,
}

impl CmFile {
    pub fn matrix(&self) -> Matrix4<f64> {
        Matrix4::from_fn(|i, j| self.cm[i][j])
    }

    pub fn into_state(self) -> Result<GaussianStateSpec> {
        let cm = validate_bona_fide(&self.matrix())?;
        let mean = self.mean.unwrap_or([0.0; 4]);
        if mean.iter().any(|m| !m.is_finite()) {
            return Err(Error::NonFinite);
        }
        Ok(GaussianStateSpec::with_mean(cm, mean))
    }
}

impl From<&GaussianStateSpec> for CmFile {
    fn from(s: &GaussianStateSpec) -> Self {
        Self {
            cm: s.cm.to_rows(),
            mean: Some(s.mean),
            convention: Some(CONVENTION.to_owned()),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ComponentFile {
    pub weight: f64,
    pub cm: [[f64; 4]; 4],
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub mean: Option<[f64; 4]>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MixtureFile {
    pub components: Vec<ComponentFile>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub convention: Option<String>,
}

impl MixtureFile {
    pub fn into_state(self) -> Result<GaussianMixtureSpec> {
        let components = self
            .components
            .into_iter()
            .map(|c| {
                let state = CmFile {
                    cm: c.cm,
                    mean: c.mean,
                    convention: None,
                }
                .into_state()?;
                Ok(MixtureComponent {
                    weight: c.weight,
                    state,
                })
            })
            .collect::<Result<Vec<_>>>()?;
        GaussianMixtureSpec::new(components)
    }
}

impl From<&GaussianMixtureSpec> for MixtureFile {
    fn from(m: &GaussianMixtureSpec) -> Self {
        Self {
            components: m
                .components()
                .iter()
                .map(|c| ComponentFile {
                    weight: c.weight,
                    cm: c.state.cm.to_rows(),
                    mean: Some(c.state.mean),
                })
                .collect(),
            convention: Some(CONVENTION.to_owned()),
        }
    }
}

/// Either kind of state file.
#[derive(Debug, Clone, PartialEq)]
pub enum StateFile {
    Gaussian(CmFile),
    Mixture(MixtureFile),
}

impl StateFile {
    pub fn into_state(self) -> Result<StateSpec> {
        Ok(match self {
            Self::Gaussian(f) => f.into_state()?.into(),
            Self::Mixture(f) => f.into_state()?.into(),
        })
    }
}

fn check_convention(c: Option<&str>) -> Result<()> {
    match c {
        None | Some(CONVENTION) => Ok(()),
        Some(other) => Err(Error::Schema(format!(
            "unsupported convention \"{other}\", expected \"{CONVENTION}\""
        ))),
    }
}

fn schema<E: std::fmt::Display>(e: E) -> Error {
    Error::Schema(e.to_string())
}

/// Parses a Gaussian state file without checking physicality.
pub fn parse_cm_file(text: &str) -> Result<CmFile> {
    let f: CmFile = serde_json::from_str(text).map_err(schema)?;
    check_convention(f.convention.as_deref())?;
    Ok(f)
}

/// Parses either schema; a top-level `components` key selects the mixture.
pub fn parse_state_file(text: &str) -> Result<StateFile> {
    let value: serde_json::Value = serde_json::from_str(text).map_err(schema)?;
    let is_mixture = value.get("components").is_some();
    let file = if is_mixture {
        let f: MixtureFile = serde_json::from_value(value).map_err(schema)?;
        check_convention(f.convention.as_deref())?;
        StateFile::Mixture(f)
    } else {
        let f: CmFile = serde_json::from_value(value).map_err(schema)?;
        check_convention(f.convention.as_deref())?;
        StateFile::Gaussian(f)
    };
    Ok(file)
}

pub fn parse_gaussian(text: &str) -> Result<GaussianStateSpec> {
    parse_cm_file(text)?.into_state()
}

pub fn parse_state(text: &str) -> Result<StateSpec> {
    parse_state_file(text)?.into_state()
}

pub fn cm_to_json(cm: &CovMatrix) -> String {
    let file = CmFile::from(&GaussianStateSpec::new(*cm));
    serde_json::to_string_pretty(&file).expect("plain data serializes")
}

/// Reads `path`, or standard input when `path` is `-`.
pub fn read_input(path: &Path) -> std::io::Result<String> {
    if path.as_os_str() == "-" {
        let mut s = String::new();
        std::io::stdin().read_to_string(&mut s)?;
        Ok(s)
    } else {
        fs::read_to_string(path)
    }
}

/// Writes `bytes` to `path`, or to `fallback` when no path (or `-`) is given.
pub fn write_output<W: Write + ?Sized>(
    path: Option<&Path>,
    bytes: &[u8],
    fallback: &mut W,
) -> std::io::Result<()> {
    match path {
        Some(p) if p.as_os_str() != "-" => fs::write(p, bytes),
        _ => fallback.write_all(bytes),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::states::tmsv;

    const VACUUM: &str = r#"{"cm": [[1,0,0,0],[0,1,0,0],[0,0,1,0],[0,0,0,1]]}"#;

    #[test]
    fn parses_minimal_file() {
        let s = parse_gaussian(VACUUM).unwrap();
        assert_eq!(s.cm, CovMatrix::vacuum());
        assert_eq!(s.mean, [0.0; 4]);
    }

    #[test]
    fn convention_checked() {
        let ok =
            r#"{"cm": [[1,0,0,0],[0,1,0,0],[0,0,1,0],[0,0,0,1]], "convention": "vacuum-unit"}"#;
        assert!(parse_gaussian(ok).is_ok());
        let bad = r#"{"cm": [[1,0,0,0],[0,1,0,0],[0,0,1,0],[0,0,0,1]], "convention": "hbar=1"}"#;
        assert!(matches!(parse_gaussian(bad), Err(Error::Schema(_))));
    }

    #[test]
    fn malformed_is_schema_error() {
        assert!(matches!(parse_gaussian("{"), Err(Error::Schema(_))));
        assert!(matches!(
            parse_gaussian(r#"{"cm": [[1,0],[0,1]]}"#),
            Err(Error::Schema(_))
        ));
        assert!(matches!(parse_state("[]"), Err(Error::Schema(_))));
    }

    #[test]
    fn unphysical_is_not_schema_error() {
        let half = r#"{"cm": [[0.5,0,0,0],[0,0.5,0,0],[0,0,0.5,0],[0,0,0,0.5]]}"#;
        assert!(matches!(
            parse_gaussian(half),
            Err(Error::UnphysicalState { .. })
        ));
        assert!(parse_cm_file(half).is_ok());
    }

    #[test]
    fn mixture_round_trip() {
        let t = tmsv(0.3).unwrap();
        let mix = GaussianMixtureSpec::new(vec![
            MixtureComponent {
                weight: 0.25,
                state: GaussianStateSpec::with_mean(t.cm, [1.0, 0.0, 0.5, 0.0]),
            },
            MixtureComponent {
                weight: 0.75,
                state: t,
            },
        ])
        .unwrap();
        let text = serde_json::to_string(&MixtureFile::from(&mix)).unwrap();
        match parse_state(&text).unwrap() {
            StateSpec::Mixture(m) => assert_eq!(m, mix),
            other => panic!("expected mixture, got {other:?}"),
        }
    }

    #[test]
    fn gaussian_round_trip() {
        let t = tmsv(0.9).unwrap();
        assert_eq!(parse_gaussian(&cm_to_json(&t.cm)).unwrap().cm, t.cm);
        assert!(matches!(
            parse_state(VACUUM).unwrap(),
            StateSpec::Gaussian(_)
        ));
    }
}
