//! Box meshes for tilings, one box per tile, colored by tile direction.

use std::fmt::Write as _;
use std::sync::Arc;

use dimerlab::tiling::{region_from_value, RegionJson};
use dimerlab::{CellCoord, Dir, Error, Result, Tile, Tiling};
use serde_json::{json, Value};

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum MeshFormat {
    Ply,
    Obj,
    Json,
}

impl std::str::FromStr for MeshFormat {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, String> {
        match s.to_ascii_lowercase().as_str() {
            "ply" => Ok(MeshFormat::Ply),
            "obj" => Ok(MeshFormat::Obj),
            "json" => Ok(MeshFormat::Json),
            o => Err(format!("unknown mesh format `{o}` (ply, obj, json)")),
        }
    }
}

/// Inset on each side of a box so neighbouring tiles stay visible.
const GAP: f64 = 0.05;

pub fn color(d: Dir) -> [u8; 3] {
    match d {
        Dir::XPos => [228, 26, 28],
        Dir::XNeg => [255, 127, 0],
        Dir::YPos => [55, 126, 184],
        Dir::YNeg => [152, 78, 163],
        Dir::ZPos => [77, 175, 74],
        Dir::ZNeg => [230, 200, 30],
    }
}

fn bounds(t: &Tile) -> ([f64; 3], [f64; 3]) {
    let a = t.even.to_array();
    let b = t.odd().to_array();
    let mut lo = [0.0; 3];
    let mut hi = [0.0; 3];
    for i in 0..3 {
        lo[i] = a[i].min(b[i]) as f64 + GAP;
        hi[i] = a[i].max(b[i]) as f64 + 1.0 - GAP;
    }
    (lo, hi)
}

fn corners(lo: [f64; 3], hi: [f64; 3]) -> [[f64; 3]; 8] {
    let mut c = [[0.0; 3]; 8];
    for (k, p) in c.iter_mut().enumerate() {
        for i in 0..3 {
            p[i] = if k >> i & 1 == 1 { hi[i] } else { lo[i] };
        }
    }
    c
}

// Outward-wound quads over the corner numbering above.
const FACES: [[usize; 4]; 6] = [
    [0, 4, 6, 2],
    [1, 3, 7, 5],
    [0, 1, 5, 4],
    [2, 6, 7, 3],
    [0, 2, 3, 1],
    [4, 5, 7, 6],
];

pub fn export_mesh(t: &Tiling, format: MeshFormat) -> Vec<u8> {
    let tiles = t.tiles();
    let mut s = String::new();
    match format {
        MeshFormat::Ply => {
            let _ = writeln!(s, "ply\nformat ascii 1.0\ncomment dimerlab tiling mesh");
            let _ = writeln!(s, "element vertex {}", 8 * tiles.len());
            let _ = writeln!(s, "property float x\nproperty float y\nproperty float z");
            let _ = writeln!(s, "property uchar red\nproperty uchar green\nproperty uchar blue");
            let _ = writeln!(s, "element face {}", 6 * tiles.len());
            let _ = writeln!(s, "property list uchar int vertex_indices\nend_header");
            for tile in &tiles {
                let (lo, hi) = bounds(tile);
                let [r, g, b] = color(tile.dir);
                for p in corners(lo, hi) {
                    let _ = writeln!(s, "{:.6} {:.6} {:.6} {r} {g} {b}", p[0], p[1], p[2]);
                }
            }
            for k in 0..tiles.len() {
                for f in FACES {
                    let _ = writeln!(s, "4 {} {} {} {}", 8 * k + f[0], 8 * k + f[1], 8 * k + f[2], 8 * k + f[3]);
                }
            }
        }
        MeshFormat::Obj => {
            let _ = writeln!(s, "# dimerlab tiling mesh, vertex colors as rgb in [0,1]");
            for tile in &tiles {
                let (lo, hi) = bounds(tile);
                let c = color(tile.dir).map(|x| x as f64 / 255.0);
                for p in corners(lo, hi) {
                    let _ = writeln!(s, "v {:.6} {:.6} {:.6} {:.6} {:.6} {:.6}", p[0], p[1], p[2], c[0], c[1], c[2]);
                }
            }
            for (k, tile) in tiles.iter().enumerate() {
                let _ = writeln!(s, "g tile{k} {}", tile.dir.name());
                for f in FACES {
                    let i = |j: usize| 8 * k + f[j] + 1;
                    let _ = writeln!(s, "f {} {} {} {}", i(0), i(1), i(2), i(3));
                }
            }
        }
        MeshFormat::Json => {
            let boxes: Vec<Value> = tiles
                .iter()
                .map(|tile| {
                    let (lo, hi) = bounds(tile);
                    json!({
                        "even": tile.even,
                        "odd": tile.odd(),
                        "dir": tile.dir.name(),
                        "color": color(tile.dir),
                        "min": lo.map(round6),
                        "max": hi.map(round6),
                    })
                })
                .collect();
            let v = json!({"version": 1, "region": RegionJson::from_region(t.region()).0, "boxes": boxes});
            s = serde_json::to_string_pretty(&v).expect("mesh serializes");
            s.push('\n');
        }
    }
    s.into_bytes()
}

fn round6(x: f64) -> f64 {
    (x * 1e6).round() / 1e6
}

/// Reads a JSON mesh back into the tiling it was made from.
pub fn import_mesh_json(text: &str) -> Result<Tiling> {
    let v: Value = serde_json::from_str(text)?;
    if v.get("version").and_then(Value::as_i64) != Some(1) {
        return Err(Error::Parse("mesh json needs version 1".into()));
    }
    let region = Arc::new(region_from_value(v.get("region").unwrap_or(&Value::Null))?);
    let boxes = v.get("boxes").and_then(Value::as_array).ok_or_else(|| Error::Parse("missing `boxes`".into()))?;
    let mut pairs = Vec::with_capacity(boxes.len());
    for b in boxes {
        let even: CellCoord = serde_json::from_value(b.get("even").cloned().unwrap_or(Value::Null))?;
        let odd: CellCoord = serde_json::from_value(b.get("odd").cloned().unwrap_or(Value::Null))?;
        pairs.push((even, odd));
    }
    Tiling::from_pairs(region, &pairs).map_err(|v| Error::InvalidTiling(format!("{} violations", v.len())))
}
