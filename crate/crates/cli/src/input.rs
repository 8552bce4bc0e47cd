use std::path::PathBuf;

use clap::Args;
use serde::Serialize;
use tension_core::catalog::{self, CatalogEntry, CatalogParams};
use tension_core::{Error, Result};

/// A catalog entry with parameters, or a JSON file.
#[derive(Args, Clone, Debug, Serialize)]
pub struct Input {
    /// Built-in distribution (see `catalog list`)
    #[arg(long, conflicts_with = "file")]
    pub catalog: Option<String>,
    /// Joint distribution in JSON
    #[arg(long)]
    pub file: Option<PathBuf>,
    #[command(flatten)]
    pub params: Params,
}

#[derive(Args, Clone, Debug, Default, Serialize)]
pub struct Params {
    /// String length of the string-OT pair
    #[arg(long = "L")]
    #[serde(rename = "L", skip_serializing_if = "Option::is_none")]
    pub l: Option<usize>,
    /// Size of the shared component of uniform-common
    #[arg(long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub k: Option<usize>,
    #[arg(long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub x_extra: Option<usize>,
    #[arg(long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub y_extra: Option<usize>,
    /// Parameter of the z-source
    #[arg(long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub p: Option<f64>,
    /// Cross-block mass of the connected example
    #[arg(long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub delta: Option<f64>,
}

impl Params {
    fn to_catalog(&self) -> CatalogParams {
        CatalogParams {
            l: self.l,
            k: self.k,
            x_extra: self.x_extra,
            y_extra: self.y_extra,
            p: self.p,
            delta: self.delta,
        }
    }
}

impl Input {
    pub fn load(&self) -> Result<CatalogEntry> {
        match (&self.catalog, &self.file) {
            (Some(name), _) => catalog::by_name(name, &self.params.to_catalog()),
            (None, Some(path)) => catalog::from_file(path),
            (None, None) => Err(Error::OutOfRange(
                "either --catalog or --file is required".into(),
            )),
        }
    }
}

/// Parses `name`, `name:key=value,...` or a path ending in `.json`.
pub fn load_spec(spec: &str) -> Result<CatalogEntry> {
    if spec.ends_with(".json") {
        return catalog::from_file(spec);
    }
    let (name, rest) = spec.split_once(':').unwrap_or((spec, ""));
    let mut p = CatalogParams::default();
    for kv in rest.split(',').filter(|s| !s.is_empty()) {
        let (k, v) = kv
            .split_once('=')
            .ok_or_else(|| Error::Parse(format!("expected key=value, got {kv:?}")))?;
        let int = || {
            v.parse::<usize>()
                .map_err(|e| Error::Parse(format!("{k}: {e}")))
        };
        let real = || {
            v.parse::<f64>()
                .map_err(|e| Error::Parse(format!("{k}: {e}")))
        };
        match k {
            "L" => p.l = Some(int()?),
            "k" => p.k = Some(int()?),
            "x-extra" => p.x_extra = Some(int()?),
            "y-extra" => p.y_extra = Some(int()?),
            "p" => p.p = Some(real()?),
            "delta" => p.delta = Some(real()?),
            other => return Err(Error::Parse(format!("unknown parameter {other:?}"))),
        }
    }
    catalog::by_name(name, &p)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn spec_parsing() {
        let e = load_spec("string-ot:L=2").unwrap();
        assert_eq!(e.joint.nx(), 128);
        let e = load_spec("z-source:p=0.3").unwrap();
        assert!((e.joint.masses()[0] - 0.3).abs() < 1e-15);
        assert!(matches!(load_spec("z-source:q=1"), Err(Error::Parse(_))));
        assert!(load_spec("nothing").is_err());
    }
}
