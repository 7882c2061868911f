//! Dimer tilings of regions and of all of Z³ (periodic).

mod glue;
mod io;
mod tau_v;

use std::collections::HashMap;
use std::fmt;
use std::sync::Arc;

use num_rational::Ratio;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::lattice::{CellCoord, Dir, Region};

pub use glue::{glue_halfspaces, glue_with_gap, GluePlane};
pub use io::{region_from_value, RegionJson, TilingJson};
pub use tau_v::{tau_v, tau_v_word, Phase, TauV, TauVWord};

/// A dimer stored by its even cell and the direction to its odd cell.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct Tile {
    pub even: CellCoord,
    pub dir: Dir,
}

impl Tile {
    pub fn new(even: CellCoord, dir: Dir) -> Self {
        Tile { even, dir }
    }

    pub fn odd(&self) -> CellCoord {
        self.even.step(self.dir)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum TilingMode {
    Perfect,
    /// Tiles may stick out of an open region, but every region cell is covered.
    FreeBoundary,
}

#[derive(Clone, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Violation {
    Uncovered { cell: CellCoord },
    DoubleCovered { cell: CellCoord },
    NonAdjacent { a: CellCoord, b: CellCoord },
    OutsideRegion { cell: CellCoord },
    Asymmetric { cell: CellCoord },
}

/// Anything that can report the partner of a cell.
pub trait DimerCover {
    fn mate_dir(&self, c: CellCoord) -> Option<Dir>;

    fn mate_of(&self, c: CellCoord) -> Option<CellCoord> {
        self.mate_dir(c).map(|d| c.step(d))
    }
}

#[derive(Clone, PartialEq, Eq)]
pub struct Tiling {
    region: Arc<Region>,
    mates: Vec<Option<Dir>>,
}

impl fmt::Debug for Tiling {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("Tiling").field("region", &self.region).field("tiles", &self.tiles()).finish()
    }
}

impl Tiling {
    /// Builds a tiling from a list of cell pairs. Pairs may name an endpoint by any
    /// representative in periodic regions; in open regions one endpoint may lie outside.
    pub fn from_pairs(region: Arc<Region>, pairs: &[(CellCoord, CellCoord)]) -> std::result::Result<Tiling, Vec<Violation>> {
        let (t, v) = Self::assemble(region, pairs);
        if v.is_empty() {
            Ok(t)
        } else {
            Err(v)
        }
    }

    pub fn from_tiles(region: Arc<Region>, tiles: &[Tile]) -> std::result::Result<Tiling, Vec<Violation>> {
        let pairs: Vec<_> = tiles.iter().map(|t| (t.even, t.odd())).collect();
        Self::from_pairs(region, &pairs)
    }

    fn assemble(region: Arc<Region>, pairs: &[(CellCoord, CellCoord)]) -> (Tiling, Vec<Violation>) {
        let mut mates = vec![None; region.len()];
        let mut viol = Vec::new();
        let claim = |i: usize, d: Dir, viol: &mut Vec<Violation>, mates: &mut Vec<Option<Dir>>| {
            if mates[i].is_some() {
                viol.push(Violation::DoubleCovered { cell: region.cell(i) });
            } else {
                mates[i] = Some(d);
            }
        };
        for &(a, b) in pairs {
            let Some(d) = pair_dir(&region, a, b) else {
                viol.push(Violation::NonAdjacent { a, b });
                continue;
            };
            let ia = region.index_of(a);
            let ib = region.index_of(b);
            match (ia, ib) {
                (None, None) => {
                    viol.push(Violation::OutsideRegion { cell: a });
                }
                (Some(i), None) => claim(i, d, &mut viol, &mut mates),
                (None, Some(j)) => claim(j, d.opposite(), &mut viol, &mut mates),
                (Some(i), Some(j)) => {
                    if i == j {
                        viol.push(Violation::NonAdjacent { a, b });
                        continue;
                    }
                    claim(i, d, &mut viol, &mut mates);
                    claim(j, d.opposite(), &mut viol, &mut mates);
                }
            }
        }
        (Tiling { region, mates }, viol)
    }

    /// Unchecked constructor from a per-cell direction table.
    pub fn from_mates(region: Arc<Region>, mates: Vec<Option<Dir>>) -> Tiling {
        assert_eq!(region.len(), mates.len());
        Tiling { region, mates }
    }

    pub fn region(&self) -> &Region {
        &self.region
    }

    pub fn region_arc(&self) -> &Arc<Region> {
        &self.region
    }

    pub fn mates(&self) -> &[Option<Dir>] {
        &self.mates
    }

    pub fn mate_dir_at(&self, i: usize) -> Option<Dir> {
        self.mates[i]
    }

    /// Index of the partner of cell `i` when the partner is in the region.
    pub fn mate(&self, i: usize) -> Option<usize> {
        self.mates[i].and_then(|d| self.region.neighbor(i, d))
    }

    /// All tiles in canonical order (sorted by even cell, then direction).
    pub fn tiles(&self) -> Vec<Tile> {
        let mut out = Vec::with_capacity(self.mates.len() / 2 + 1);
        for (i, m) in self.mates.iter().enumerate() {
            let Some(d) = *m else { continue };
            let c = self.region.cell(i);
            if c.is_even() {
                out.push(Tile::new(c, d));
            } else if self.region.neighbor(i, d).is_none() {
                out.push(Tile::new(c.step(d), d.opposite()));
            }
        }
        out.sort();
        out
    }

    pub fn tile_count(&self) -> usize {
        self.tiles().len()
    }

    pub fn validate(&self, mode: TilingMode) -> Vec<Violation> {
        let r = &*self.region;
        let mut v = Vec::new();
        for i in 0..r.len() {
            match self.mates[i] {
                None => v.push(Violation::Uncovered { cell: r.cell(i) }),
                Some(d) => match r.neighbor(i, d) {
                    Some(j) => {
                        if self.mates[j] != Some(d.opposite()) {
                            v.push(Violation::Asymmetric { cell: r.cell(i) });
                        }
                    }
                    None => {
                        if mode == TilingMode::Perfect {
                            v.push(Violation::OutsideRegion { cell: r.cell(i).step(d) });
                        }
                    }
                },
            }
        }
        v
    }

    pub fn is_valid(&self) -> bool {
        self.validate(TilingMode::Perfect).is_empty()
    }

    /// Tiles crossing out of an open region.
    pub fn overhangs(&self) -> Vec<Tile> {
        self.tiles()
            .into_iter()
            .filter(|t| !self.region.contains(t.even) || !self.region.contains(t.odd()))
            .collect()
    }
}

/// Diagnostic check of a raw pair list against a region.
pub fn validate_pairs(region: &Arc<Region>, pairs: &[(CellCoord, CellCoord)], mode: TilingMode) -> Vec<Violation> {
    let (t, mut v) = Tiling::assemble(region.clone(), pairs);
    for w in t.validate(mode) {
        if !v.contains(&w) {
            v.push(w);
        }
    }
    v
}

fn pair_dir(region: &Region, a: CellCoord, b: CellCoord) -> Option<Dir> {
    if let Some(d) = Dir::from_vector(b - a) {
        return Some(d);
    }
    if region.is_open() {
        return None;
    }
    let rb = region.reduce(b);
    Dir::ALL.into_iter().find(|&d| region.reduce(a.step(d)) == rb)
}

impl DimerCover for Tiling {
    fn mate_dir(&self, c: CellCoord) -> Option<Dir> {
        if let Some(i) = self.region.index_of(c) {
            return self.mates[i];
        }
        for d in Dir::ALL {
            if let Some(j) = self.region.index_of(c.step(d)) {
                if self.mates[j] == Some(d.opposite()) {
                    return Some(d);
                }
            }
        }
        None
    }
}

/// All tiles parallel to `dir`.
///
/// On a torus the tiles are (e, e + dir) for every even e. On an open region the same
/// oriented rule is used when it covers the region exactly; otherwise each maximal run
/// of cells along the axis is cut into consecutive dominoes.
pub fn brickwork(region: &Arc<Region>, dir: Dir) -> Result<Tiling> {
    let r = &**region;
    let mut mates = vec![None; r.len()];
    let mut oriented = true;
    for i in 0..r.len() {
        if !r.is_even(i) {
            continue;
        }
        match r.neighbor(i, dir) {
            Some(j) if mates[j].is_none() => {
                mates[i] = Some(dir);
                mates[j] = Some(dir.opposite());
            }
            _ => {
                oriented = false;
                break;
            }
        }
    }
    if oriented && mates.iter().all(Option::is_some) {
        return Ok(Tiling::from_mates(region.clone(), mates));
    }
    if !r.is_open() {
        return Err(Error::IncompatibleRegion(format!("no {dir:?} brickwork on {:?}", r.topology())));
    }
    let fwd = Dir::along(dir.axis(), 1);
    let mut mates = vec![None; r.len()];
    for i in 0..r.len() {
        if mates[i].is_some() || r.neighbor(i, Dir::along(dir.axis(), -1)).is_some() {
            continue;
        }
        let mut cur = i;
        loop {
            match r.neighbor(cur, fwd) {
                Some(j) => {
                    mates[cur] = Some(fwd);
                    mates[j] = Some(fwd.opposite());
                    match r.neighbor(j, fwd) {
                        Some(k) => cur = k,
                        None => break,
                    }
                }
                None => {
                    return Err(Error::IncompatibleRegion(format!(
                        "odd run along axis {} ending at {}",
                        dir.axis(),
                        r.cell(cur)
                    )))
                }
            }
        }
    }
    if mates.iter().any(Option::is_none) {
        return Err(Error::IncompatibleRegion("region has cycles along the brickwork axis".into()));
    }
    Ok(Tiling::from_mates(region.clone(), mates))
}

/// A tiling of Z³ invariant under translation by rᵢηᵢ.
#[derive(Clone, PartialEq, Eq, Debug)]
pub struct PeriodicTiling {
    dims: [i64; 3],
    mates: Vec<Dir>,
}

impl PeriodicTiling {
    pub fn from_fn(dims: [i64; 3], mut f: impl FnMut(CellCoord) -> Dir) -> Result<Self> {
        if dims.iter().any(|&d| d <= 0 || d % 2 != 0) {
            return Err(Error::InvalidTiling(format!("periods must be positive and even: {dims:?}")));
        }
        let mut mates = Vec::with_capacity((dims[0] * dims[1] * dims[2]) as usize);
        for x in 0..dims[0] {
            for y in 0..dims[1] {
                for z in 0..dims[2] {
                    mates.push(f(CellCoord::new(x, y, z)));
                }
            }
        }
        let t = PeriodicTiling { dims, mates };
        t.check()?;
        Ok(t)
    }

    fn check(&self) -> Result<()> {
        for x in 0..self.dims[0] {
            for y in 0..self.dims[1] {
                for z in 0..self.dims[2] {
                    let c = CellCoord::new(x, y, z);
                    let d = self.at(c);
                    if self.at(c.step(d)) != d.opposite() {
                        return Err(Error::InvalidTiling(format!("periodic tiling is not a matching at {c}")));
                    }
                }
            }
        }
        Ok(())
    }

    /// The oriented brickwork: tiles (e, e + dir) for all even e.
    pub fn brickwork(dir: Dir) -> Self {
        Self::from_fn([2, 2, 2], |c| if c.is_even() { dir } else { dir.opposite() })
            .expect("brickwork is a matching")
    }

    pub fn dims(&self) -> [i64; 3] {
        self.dims
    }

    fn idx(&self, c: CellCoord) -> usize {
        let x = c.x.rem_euclid(self.dims[0]);
        let y = c.y.rem_euclid(self.dims[1]);
        let z = c.z.rem_euclid(self.dims[2]);
        ((x * self.dims[1] + y) * self.dims[2] + z) as usize
    }

    pub fn at(&self, c: CellCoord) -> Dir {
        self.mates[self.idx(c)]
    }

    /// The same tiling shifted by `t`.
    pub fn translate(&self, t: CellCoord) -> Self {
        let mut out = self.clone();
        for x in 0..self.dims[0] {
            for y in 0..self.dims[1] {
                for z in 0..self.dims[2] {
                    let c = CellCoord::new(x, y, z);
                    let i = out.idx(c);
                    out.mates[i] = self.at(c - t);
                }
            }
        }
        out
    }

    /// Re-expresses the tiling on a larger fundamental domain (each new period a multiple of the old).
    pub fn with_periods(&self, dims: [i64; 3]) -> Result<Self> {
        for a in 0..3 {
            if dims[a] % self.dims[a] != 0 {
                return Err(Error::InvalidTiling(format!("{dims:?} is not a multiple of {:?}", self.dims)));
            }
        }
        Self::from_fn(dims, |c| self.at(c))
    }

    /// Mean current over one fundamental domain.
    pub fn mean_current(&self) -> [Ratio<i64>; 3] {
        let mut sum = [0i64; 3];
        let mut evens = 0i64;
        for x in 0..self.dims[0] {
            for y in 0..self.dims[1] {
                for z in 0..self.dims[2] {
                    let c = CellCoord::new(x, y, z);
                    if c.is_even() {
                        evens += 1;
                        let d = self.at(c);
                        sum[d.axis()] += d.sign();
                    }
                }
            }
        }
        sum.map(|s| Ratio::new(s, evens))
    }

    /// The tiling on the torus of its fundamental domain.
    pub fn to_torus(&self) -> Tiling {
        let region = Arc::new(Region::torus(self.dims).expect("even periods"));
        let mates = region.cells().iter().map(|&c| Some(self.at(c))).collect();
        Tiling::from_mates(region, mates)
    }

    /// Restriction to a region. Open regions give free-boundary tilings; periodic regions
    /// must be compatible with the period.
    pub fn restrict(&self, region: &Arc<Region>) -> Tiling {
        let mates = region.cells().iter().map(|&c| Some(self.at(c))).collect();
        Tiling::from_mates(region.clone(), mates)
    }
}

impl DimerCover for PeriodicTiling {
    fn mate_dir(&self, c: CellCoord) -> Option<Dir> {
        Some(self.at(c))
    }
}

impl<T: DimerCover + ?Sized> DimerCover for &T {
    fn mate_dir(&self, c: CellCoord) -> Option<Dir> {
        (**self).mate_dir(c)
    }
}

/// Torus of dims `dims` whose horizontal layers are brickworks, layer z using the
/// direction of the layer group containing z (the pattern repeats up the torus).
pub fn stacked_brickwork(dims: [i64; 3], layers: &[(Dir, i64)]) -> Result<(Arc<Region>, Tiling)> {
    if layers.is_empty() || layers.iter().any(|&(d, k)| !d.is_horizontal() || k < 1) {
        return Err(Error::IncompatibleRegion("layers must be horizontal with positive thickness".into()));
    }
    let period: i64 = layers.iter().map(|l| l.1).sum();
    if dims[2] % period != 0 {
        return Err(Error::IncompatibleRegion(format!(
            "height {} is not a multiple of the layer period {period}",
            dims[2]
        )));
    }
    let region = Arc::new(Region::torus(dims)?);
    let mut by_z = Vec::new();
    for &(d, k) in layers {
        for _ in 0..k {
            by_z.push(d);
        }
    }
    let mates = region
        .cells()
        .iter()
        .map(|&c| {
            let d = by_z[(c.z % period) as usize];
            Some(if c.is_even() { d } else { d.opposite() })
        })
        .collect();
    Ok((region.clone(), Tiling::from_mates(region, mates)))
}

/// Shortest alternating cycles of a tiling on a torus: the overall minimum and the
/// minimum over contractible cycles (zero lifted displacement). Lengths count edges.
pub fn shortest_alternating_cycles(t: &Tiling, max_len: usize) -> (Option<usize>, Option<usize>) {
    let r = t.region();
    // A step from even e goes along a non-tile edge to odd o, then along o's tile to an even cell.
    let mut best_any: Option<usize> = None;
    let mut best_contractible: Option<usize> = None;
    let max_steps = max_len / 2;
    for s in 0..r.len() {
        if !r.is_even(s) {
            continue;
        }
        let mut frontier: HashMap<(usize, CellCoord), ()> = HashMap::new();
        frontier.insert((s, CellCoord::ORIGIN), ());
        let mut seen: HashMap<(usize, CellCoord), usize> = HashMap::new();
        for step in 1..=max_steps {
            let mut next = HashMap::new();
            for &(e, disp) in frontier.keys() {
                let me = t.mates[e];
                for d in Dir::ALL {
                    if Some(d) == me {
                        continue;
                    }
                    let Some(o) = r.neighbor(e, d) else { continue };
                    let Some(d2) = t.mates[o] else { continue };
                    let Some(e2) = r.neighbor(o, d2) else { continue };
                    let disp2 = disp + d.vector() + d2.vector();
                    if e2 == s {
                        if best_any.map_or(true, |b| 2 * step < b) {
                            best_any = Some(2 * step);
                        }
                        if disp2 == CellCoord::ORIGIN && best_contractible.map_or(true, |b| 2 * step < b) {
                            best_contractible = Some(2 * step);
                        }
                        continue;
                    }
                    if seen.contains_key(&(e2, disp2)) {
                        continue;
                    }
                    seen.insert((e2, disp2), step);
                    next.insert((e2, disp2), ());
                }
            }
            frontier = next;
            if best_contractible.is_some_and(|b| b <= 2 * step) {
                break;
            }
        }
    }
    (best_any, best_contractible)
}
