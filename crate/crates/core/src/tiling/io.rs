//! JSON interchange for regions and tilings.

use std::sync::Arc;

use serde::{Deserialize, Serialize};
use serde_json::{json, Value};

use super::Tiling;
use crate::error::{Error, Result};
use crate::lattice::{build_aztec, build_box, AztecKind, CellCoord, PeriodLattice, Region, Topology};

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RegionJson(pub Value);

impl RegionJson {
    pub fn from_region(r: &Region) -> Self {
        let v = match r.topology() {
            Topology::Torus(d) => json!({"version": 1, "topology": "torus", "dims": d}),
            Topology::Open => json!({"version": 1, "topology": "open", "cells": r.cells()}),
            Topology::Periodic(l) => json!({
                "version": 1,
                "topology": "periodic",
                "lattice": l.basis().iter().map(|(p, v)| json!([p, v])).collect::<Vec<_>>(),
                "cells": r.cells(),
            }),
        };
        RegionJson(v)
    }

    pub fn to_region(&self) -> Result<Region> {
        region_from_value(&self.0)
    }
}

fn get_i64(v: &Value, key: &str) -> Result<i64> {
    v.get(key).and_then(Value::as_i64).ok_or_else(|| Error::Parse(format!("missing integer field `{key}`")))
}

fn cells_of(v: &Value) -> Result<Vec<CellCoord>> {
    let cells = v.get("cells").ok_or_else(|| Error::Parse("missing `cells`".into()))?;
    Ok(serde_json::from_value(cells.clone())?)
}

pub fn region_from_value(v: &Value) -> Result<Region> {
    if let Some(b) = v.get("builder").and_then(Value::as_str) {
        let args = v.get("args").cloned().unwrap_or(Value::Null);
        return match b {
            "box" => build_box(get_i64(&args, "a")?, get_i64(&args, "b")?, get_i64(&args, "c")?),
            "torus" => {
                let d: [i64; 3] = serde_json::from_value(args.get("dims").cloned().unwrap_or(Value::Null))?;
                Region::torus(d)
            }
            "pyramid" => build_aztec(AztecKind::Pyramid { k: get_i64(&args, "k")? }),
            "octahedron" => build_aztec(AztecKind::Octahedron { k: get_i64(&args, "k")? }),
            "prism" => build_aztec(AztecKind::Prism { k: get_i64(&args, "k")?, height: get_i64(&args, "height")? }),
            other => Err(Error::Parse(format!("unknown region builder `{other}`"))),
        };
    }
    if let Some(ver) = v.get("version").and_then(Value::as_i64) {
        if ver != 1 {
            return Err(Error::Parse(format!("unsupported region version {ver}")));
        }
    }
    match v.get("topology").and_then(Value::as_str).unwrap_or("open") {
        "open" => Ok(Region::open(cells_of(v)?)),
        "torus" => {
            let d: [i64; 3] = serde_json::from_value(v.get("dims").cloned().unwrap_or(Value::Null))?;
            Region::torus(d)
        }
        "periodic" => {
            let basis: Vec<(usize, CellCoord)> =
                serde_json::from_value(v.get("lattice").cloned().unwrap_or(Value::Null))?;
            Ok(Region::periodic(PeriodLattice::new(basis)?, cells_of(v)?))
        }
        other => Err(Error::Parse(format!("unknown topology `{other}`"))),
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TilingJson {
    pub version: u32,
    pub region: Value,
    pub tiles: Vec<[CellCoord; 2]>,
}

impl TilingJson {
    pub fn from_tiling(t: &Tiling) -> Self {
        TilingJson {
            version: 1,
            region: RegionJson::from_region(t.region()).0,
            tiles: t.tiles().into_iter().map(|x| [x.even, x.odd()]).collect(),
        }
    }

    /// `resolve` maps a string region reference (e.g. a file name) to a region.
    pub fn to_tiling_with(&self, resolve: impl Fn(&str) -> Result<Region>) -> Result<Tiling> {
        if self.version != 1 {
            return Err(Error::Parse(format!("unsupported tiling version {}", self.version)));
        }
        let region = match &self.region {
            Value::String(s) => resolve(s)?,
            v => region_from_value(v)?,
        };
        let pairs: Vec<_> = self.tiles.iter().map(|p| (p[0], p[1])).collect();
        Tiling::from_pairs(Arc::new(region), &pairs)
            .map_err(|v| Error::InvalidTiling(format!("{} violations, first: {:?}", v.len(), v[0])))
    }

    pub fn to_tiling(&self) -> Result<Tiling> {
        self.to_tiling_with(|s| Err(Error::Parse(format!("unresolved region reference `{s}`"))))
    }
}

impl Tiling {
    pub fn to_json(&self) -> String {
        serde_json::to_string(&TilingJson::from_tiling(self)).expect("tiling serializes")
    }

    pub fn from_json(s: &str) -> Result<Tiling> {
        let j: TilingJson = serde_json::from_str(s)?;
        j.to_tiling()
    }
}

impl Region {
    pub fn to_json(&self) -> String {
        serde_json::to_string(&RegionJson::from_region(self).0).expect("region serializes")
    }

    pub fn from_json(s: &str) -> Result<Region> {
        region_from_value(&serde_json::from_str(s)?)
    }
}
