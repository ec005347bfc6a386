use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::euler::{BaseFlow, Family};
use crate::geometry::Geometry;
use crate::layer::LayerSettings;
use crate::ns::NsSettings;
use crate::spaces::NormSpec;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GeometryConfig {
    /// `"annulus"` or `"channel"`.
    pub kind: String,
    #[serde(default = "one")]
    pub r1: f64,
    #[serde(default = "two")]
    pub r2: f64,
    #[serde(default = "one")]
    pub height: f64,
    #[serde(default = "default_eta")]
    pub collar_width: f64,
}

fn one() -> f64 {
    1.0
}
fn two() -> f64 {
    2.0
}
fn default_eta() -> f64 {
    0.45
}

impl GeometryConfig {
    pub fn build(&self) -> Result<Geometry> {
        match self.kind.as_str() {
            "annulus" => Geometry::annulus(self.r1, self.r2, self.collar_width),
            "channel" => Geometry::flat_channel(self.height, self.collar_width),
            k => Err(Error::Config(format!("unknown geometry kind {k:?}"))),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct EulerConfig {
    pub family: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct StudySection {
    pub nu_list: Vec<f64>,
    #[serde(default = "default_norms")]
    pub norms: Vec<String>,
    /// Norms tabulated for the remainder.
    #[serde(default = "default_remainder_norms")]
    pub remainder_norms: Vec<String>,
    #[serde(default = "default_t_end")]
    pub t_end: f64,
    /// Evaluation times; empty means `t_end·k/8`, `k = 1..8`.
    #[serde(default)]
    pub t_eval: Vec<f64>,
    #[serde(default = "default_out")]
    pub output_dir: PathBuf,
}

fn default_norms() -> Vec<String> {
    ["l2", "h1", "linf", "lp:4"].map(String::from).to_vec()
}
fn default_remainder_norms() -> Vec<String> {
    ["lp:4", "h1"].map(String::from).to_vec()
}
fn default_t_end() -> f64 {
    0.5
}
fn default_out() -> PathBuf {
    PathBuf::from("out")
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct StudyConfig {
    pub geometry: GeometryConfig,
    pub euler: EulerConfig,
    #[serde(default)]
    pub layer: LayerSettings,
    #[serde(default)]
    pub ns: NsSettings,
    pub study: StudySection,
}

/// Validated pieces of a study configuration.
#[derive(Debug, Clone)]
pub struct ResolvedStudy {
    pub geometry: Geometry,
    pub flow: BaseFlow,
    pub layer: LayerSettings,
    pub ns: NsSettings,
    pub nu_list: Vec<f64>,
    pub norms: Vec<NormSpec>,
    pub remainder_norms: Vec<NormSpec>,
    pub t_eval: Vec<f64>,
}

fn parse_norms(list: &[String]) -> Result<Vec<NormSpec>> {
    list.iter()
        .map(|s| {
            let n: NormSpec = s.parse()?;
            if !n.is_volume() {
                return Err(Error::Config(format!("norm {s:?} does not apply to volume fields")));
            }
            Ok(n)
        })
        .collect()
}

impl StudyConfig {
    pub fn from_toml(text: &str) -> Result<Self> {
        toml::from_str(text).map_err(|e| Error::Config(e.to_string()))
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| Error::Config(format!("cannot read {}: {e}", path.display())))?;
        Self::from_toml(&text)
    }

    pub fn to_toml(&self) -> String {
        toml::to_string(self).expect("config serializes")
    }

    pub fn preset(name: &str) -> Result<Self> {
        let (geometry, family) = match name {
            "rigid-annulus" => (annulus(), "rigid:1"),
            "vortex-annulus" => (annulus(), "vortex:1"),
            "flat-shear" => (
                GeometryConfig { kind: "channel".into(), r1: 1.0, r2: 2.0, height: 1.0, collar_width: 0.45 },
                "shear_poly:0,0,3,-2",
            ),
            _ => return Err(Error::Config(format!("unknown preset {name:?}"))),
        };
        Ok(Self {
            geometry,
            euler: EulerConfig { family: family.into() },
            layer: LayerSettings::default(),
            ns: NsSettings::default(),
            study: StudySection {
                nu_list: vec![1e-2, 3e-3, 1e-3, 3e-4, 1e-4],
                norms: default_norms(),
                remainder_norms: default_remainder_norms(),
                t_end: 0.5,
                t_eval: Vec::new(),
                output_dir: PathBuf::from("out").join(name),
            },
        })
    }

    pub fn resolve(&self) -> Result<ResolvedStudy> {
        let geometry = self.geometry.build()?;
        let family: Family = self.euler.family.parse()?;
        let flow = family.build(&geometry)?;
        if flow.profile().is_none() {
            return Err(Error::Config(format!(
                "family {} has no viscous reference solver; use it with `layer solve`",
                self.euler.family
            )));
        }
        let s = &self.study;
        let nus = &s.nu_list;
        if nus.len() < 3 {
            return Err(Error::Config(format!("nu_list needs at least 3 values, got {}", nus.len())));
        }
        if nus.iter().any(|v| !(*v > 0.0)) || nus.windows(2).any(|w| !(w[1] < w[0])) {
            return Err(Error::Config("nu_list must be positive and strictly decreasing".into()));
        }
        if nus[0] / nus[nus.len() - 1] < 100.0 * (1.0 - 1e-12) {
            return Err(Error::Config("nu_list must span at least two decades".into()));
        }
        let eta = geometry.collar_width;
        if nus[0] > (0.25 * eta).powi(2) * (1.0 + 1e-12) {
            return Err(Error::Config(format!(
                "largest viscosity {} exceeds (eta/4)^2 = {}",
                nus[0],
                (0.25 * eta).powi(2)
            )));
        }
        if !(s.t_end > 0.0) {
            return Err(Error::Config("t_end must be positive".into()));
        }
        let t_eval = if s.t_eval.is_empty() {
            (1..=8).map(|k| s.t_end * k as f64 / 8.0).collect()
        } else {
            s.t_eval.clone()
        };
        if t_eval.iter().any(|&t| !(t > 0.0 && t <= s.t_end)) {
            return Err(Error::Config("t_eval entries must lie in (0, t_end]".into()));
        }
        let mut layer = self.layer.clone();
        layer.t_end = s.t_end;
        layer.store_times = t_eval.clone();
        let mut ns = self.ns.clone();
        ns.t_end = s.t_end;
        ns.store_times = t_eval.clone();
        Ok(ResolvedStudy {
            geometry,
            flow,
            layer,
            ns,
            nu_list: nus.clone(),
            norms: parse_norms(&s.norms)?,
            remainder_norms: parse_norms(&s.remainder_norms)?,
            t_eval,
        })
    }
}

fn annulus() -> GeometryConfig {
    GeometryConfig { kind: "annulus".into(), r1: 1.0, r2: 2.0, height: 1.0, collar_width: 0.45 }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn presets_round_trip_through_toml() {
        for name in ["rigid-annulus", "vortex-annulus", "flat-shear"] {
            let c = StudyConfig::preset(name).unwrap();
            let back = StudyConfig::from_toml(&c.to_toml()).unwrap();
            assert_eq!(c, back);
            c.resolve().unwrap();
        }
    }

    #[test]
    fn rejects_short_or_narrow_viscosity_lists() {
        let mut c = StudyConfig::preset("rigid-annulus").unwrap();
        c.study.nu_list = vec![1e-2, 1e-3];
        assert!(c.resolve().unwrap_err().is_config());
        c.study.nu_list = vec![1e-2, 5e-3, 1e-3];
        assert!(c.resolve().unwrap_err().is_config());
        c.study.nu_list = vec![1e-1, 1e-2, 1e-3];
        assert!(c.resolve().unwrap_err().is_config());
    }

    #[test]
    fn minimal_toml() {
        let c = StudyConfig::from_toml(
            "[geometry]\nkind = \"annulus\"\n[euler]\nfamily = \"rigid\"\n[study]\nnu_list = [1e-2, 1e-3, 1e-4]\n",
        )
        .unwrap();
        let r = c.resolve().unwrap();
        assert_eq!(r.t_eval.len(), 8);
        assert_eq!(r.norms.len(), 4);
        assert!(StudyConfig::from_toml("[geometry]\nkind = 3\n").unwrap_err().is_config());
    }
}
