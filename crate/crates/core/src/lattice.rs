//! Cells of Z³, parity, regions (open, toroidal, or periodic in a sublattice) and dual surfaces.

use std::collections::{HashMap, HashSet};
use std::fmt;
use std::ops::{Add, Neg, Sub};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Default, Serialize, Deserialize)]
#[serde(from = "[i64; 3]", into = "[i64; 3]")]
pub struct CellCoord {
    pub x: i64,
    pub y: i64,
    pub z: i64,
}

impl CellCoord {
    pub const ORIGIN: CellCoord = CellCoord { x: 0, y: 0, z: 0 };

    pub const fn new(x: i64, y: i64, z: i64) -> Self {
        CellCoord { x, y, z }
    }

    pub fn parity(self) -> Parity {
        parity(self)
    }

    pub fn is_even(self) -> bool {
        parity(self) == Parity::Even
    }

    pub fn get(self, axis: usize) -> i64 {
        match axis {
            0 => self.x,
            1 => self.y,
            2 => self.z,
            _ => panic!("axis out of range: {axis}"),
        }
    }

    pub fn set(&mut self, axis: usize, v: i64) {
        match axis {
            0 => self.x = v,
            1 => self.y = v,
            2 => self.z = v,
            _ => panic!("axis out of range: {axis}"),
        }
    }

    pub fn step(self, d: Dir) -> Self {
        self + d.vector()
    }

    pub fn scale(self, k: i64) -> Self {
        CellCoord::new(self.x * k, self.y * k, self.z * k)
    }

    pub fn dot(self, o: CellCoord) -> i64 {
        self.x * o.x + self.y * o.y + self.z * o.z
    }

    pub fn l1(self) -> i64 {
        self.x.abs() + self.y.abs() + self.z.abs()
    }

    pub fn to_array(self) -> [i64; 3] {
        [self.x, self.y, self.z]
    }
}

impl From<[i64; 3]> for CellCoord {
    fn from(a: [i64; 3]) -> Self {
        CellCoord::new(a[0], a[1], a[2])
    }
}

impl From<CellCoord> for [i64; 3] {
    fn from(c: CellCoord) -> Self {
        c.to_array()
    }
}

impl fmt::Debug for CellCoord {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "({},{},{})", self.x, self.y, self.z)
    }
}

impl fmt::Display for CellCoord {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "({},{},{})", self.x, self.y, self.z)
    }
}

impl Add for CellCoord {
    type Output = CellCoord;
    fn add(self, o: CellCoord) -> CellCoord {
        CellCoord::new(self.x + o.x, self.y + o.y, self.z + o.z)
    }
}

impl Sub for CellCoord {
    type Output = CellCoord;
    fn sub(self, o: CellCoord) -> CellCoord {
        CellCoord::new(self.x - o.x, self.y - o.y, self.z - o.z)
    }
}

impl Neg for CellCoord {
    type Output = CellCoord;
    fn neg(self) -> CellCoord {
        CellCoord::new(-self.x, -self.y, -self.z)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Parity {
    Even,
    Odd,
}

pub fn parity(c: CellCoord) -> Parity {
    if (c.x + c.y + c.z).rem_euclid(2) == 0 {
        Parity::Even
    } else {
        Parity::Odd
    }
}

/// One of the six unit directions ±η₁, ±η₂, ±η₃.
#[derive(Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum Dir {
    XPos,
    XNeg,
    YPos,
    YNeg,
    ZPos,
    ZNeg,
}

impl Dir {
    pub const ALL: [Dir; 6] = [Dir::XPos, Dir::XNeg, Dir::YPos, Dir::YNeg, Dir::ZPos, Dir::ZNeg];

    pub fn index(self) -> usize {
        self as usize
    }

    pub fn from_index(i: usize) -> Dir {
        Dir::ALL[i]
    }

    pub fn axis(self) -> usize {
        self.index() / 2
    }

    pub fn sign(self) -> i64 {
        if self.index() % 2 == 0 {
            1
        } else {
            -1
        }
    }

    pub fn along(axis: usize, sign: i64) -> Dir {
        assert!(axis < 3 && sign != 0);
        Dir::ALL[2 * axis + usize::from(sign < 0)]
    }

    pub fn opposite(self) -> Dir {
        Dir::ALL[self.index() ^ 1]
    }

    pub fn vector(self) -> CellCoord {
        let mut c = CellCoord::ORIGIN;
        c.set(self.axis(), self.sign());
        c
    }

    pub fn from_vector(v: CellCoord) -> Option<Dir> {
        if v.l1() != 1 {
            return None;
        }
        (0..3).find(|&a| v.get(a) != 0).map(|a| Dir::along(a, v.get(a)))
    }

    pub fn is_horizontal(self) -> bool {
        self.axis() != 2
    }

    pub fn name(self) -> &'static str {
        ["+x", "-x", "+y", "-y", "+z", "-z"][self.index()]
    }

    pub fn parse(s: &str) -> Option<Dir> {
        let t = s.trim().to_ascii_lowercase();
        let t = t.replace("eta", "").replace('η', "");
        match t.as_str() {
            "+x" | "x" | "+1" | "1" => Some(Dir::XPos),
            "-x" | "-1" => Some(Dir::XNeg),
            "+y" | "y" | "+2" | "2" => Some(Dir::YPos),
            "-y" | "-2" => Some(Dir::YNeg),
            "+z" | "z" | "+3" | "3" => Some(Dir::ZPos),
            "-z" | "-3" => Some(Dir::ZNeg),
            _ => None,
        }
    }
}

impl fmt::Debug for Dir {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

/// A sublattice of periodic translations.
///
/// Every basis vector has a pivot axis on which it is positive and all other basis
/// vectors vanish, so reduction is a sequence of independent floor divisions.
#[derive(Clone, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct PeriodLattice {
    basis: Vec<(usize, CellCoord)>,
}

impl PeriodLattice {
    pub fn new(basis: Vec<(usize, CellCoord)>) -> Result<Self> {
        let mut seen = [false; 3];
        for &(p, v) in &basis {
            if p > 2 || seen[p] || v.get(p) <= 0 {
                return Err(Error::InvalidRegion(format!("bad period basis vector {v:?} on axis {p}")));
            }
            seen[p] = true;
            if (v.x + v.y + v.z).rem_euclid(2) != 0 {
                return Err(Error::InvalidRegion(format!("period {v:?} does not preserve parity")));
            }
        }
        for &(p, _) in &basis {
            for &(q, w) in &basis {
                if p != q && w.get(p) != 0 {
                    return Err(Error::InvalidRegion("period basis not in pivot form".into()));
                }
            }
        }
        Ok(PeriodLattice { basis })
    }

    pub fn diagonal(dims: [i64; 3]) -> Result<Self> {
        Self::new(
            (0..3)
                .map(|a| {
                    let mut v = CellCoord::ORIGIN;
                    v.set(a, dims[a]);
                    (a, v)
                })
                .collect(),
        )
    }

    pub fn basis(&self) -> &[(usize, CellCoord)] {
        &self.basis
    }

    pub fn reduce(&self, mut c: CellCoord) -> CellCoord {
        for &(p, v) in &self.basis {
            let t = c.get(p).div_euclid(v.get(p));
            if t != 0 {
                c = c - v.scale(t);
            }
        }
        c
    }

    /// Integer coefficients t with c − reduce(c) = Σ tⱼ bⱼ.
    pub fn wrap_count(&self, c: CellCoord) -> Vec<i64> {
        self.basis.iter().map(|&(p, v)| c.get(p).div_euclid(v.get(p))).collect()
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub enum Topology {
    Open,
    Torus([i64; 3]),
    Periodic(PeriodLattice),
}

impl Topology {
    fn lattice(&self) -> Option<PeriodLattice> {
        match self {
            Topology::Open => None,
            Topology::Torus(d) => Some(PeriodLattice::diagonal(*d).expect("validated dims")),
            Topology::Periodic(l) => Some(l.clone()),
        }
    }
}

pub(crate) const NONE: u32 = u32::MAX;

/// A finite set of cells with its adjacency graph.
#[derive(Clone)]
pub struct Region {
    topology: Topology,
    lattice: Option<PeriodLattice>,
    cells: Vec<CellCoord>,
    index: HashMap<CellCoord, u32>,
    nbr: Vec<[u32; 6]>,
}

impl PartialEq for Region {
    fn eq(&self, o: &Region) -> bool {
        self.topology == o.topology && self.cells == o.cells
    }
}

impl Eq for Region {}

impl fmt::Debug for Region {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("Region")
            .field("topology", &self.topology)
            .field("cells", &self.cells.len())
            .finish()
    }
}

impl Region {
    pub fn open<I: IntoIterator<Item = CellCoord>>(cells: I) -> Self {
        Self::build(Topology::Open, cells.into_iter().collect())
    }

    pub fn torus(dims: [i64; 3]) -> Result<Self> {
        if dims.iter().any(|&d| d <= 0) {
            return Err(Error::InvalidRegion(format!("torus dims must be positive: {dims:?}")));
        }
        if dims.iter().any(|&d| d % 2 != 0) {
            return Err(Error::InvalidRegion(format!(
                "torus dims must all be even for a consistent parity: {dims:?}"
            )));
        }
        let mut cells = Vec::new();
        for x in 0..dims[0] {
            for y in 0..dims[1] {
                for z in 0..dims[2] {
                    cells.push(CellCoord::new(x, y, z));
                }
            }
        }
        Ok(Self::build(Topology::Torus(dims), cells))
    }

    /// Cells are reduced into the fundamental domain of `lattice`; duplicates are merged.
    pub fn periodic<I: IntoIterator<Item = CellCoord>>(lattice: PeriodLattice, cells: I) -> Self {
        let cells = cells.into_iter().map(|c| lattice.reduce(c)).collect();
        Self::build(Topology::Periodic(lattice), cells)
    }

    fn build(topology: Topology, mut cells: Vec<CellCoord>) -> Self {
        let lattice = topology.lattice();
        if let Some(l) = &lattice {
            for c in cells.iter_mut() {
                *c = l.reduce(*c);
            }
        }
        cells.sort();
        cells.dedup();
        let index: HashMap<CellCoord, u32> =
            cells.iter().enumerate().map(|(i, &c)| (c, i as u32)).collect();
        let mut r = Region { topology, lattice, cells, index, nbr: Vec::new() };
        let nbr = r
            .cells
            .iter()
            .map(|&c| {
                let mut row = [NONE; 6];
                for d in Dir::ALL {
                    if let Some(&j) = r.index.get(&r.reduce(c.step(d))) {
                        row[d.index()] = j;
                    }
                }
                row
            })
            .collect();
        r.nbr = nbr;
        r
    }

    pub fn topology(&self) -> &Topology {
        &self.topology
    }

    pub fn period_lattice(&self) -> Option<&PeriodLattice> {
        self.lattice.as_ref()
    }

    pub fn torus_dims(&self) -> Option<[i64; 3]> {
        match self.topology {
            Topology::Torus(d) => Some(d),
            _ => None,
        }
    }

    pub fn is_open(&self) -> bool {
        matches!(self.topology, Topology::Open)
    }

    pub fn reduce(&self, c: CellCoord) -> CellCoord {
        match &self.lattice {
            Some(l) => l.reduce(c),
            None => c,
        }
    }

    pub fn len(&self) -> usize {
        self.cells.len()
    }

    pub fn is_empty(&self) -> bool {
        self.cells.is_empty()
    }

    pub fn cells(&self) -> &[CellCoord] {
        &self.cells
    }

    pub fn cell(&self, i: usize) -> CellCoord {
        self.cells[i]
    }

    pub fn contains(&self, c: CellCoord) -> bool {
        self.index.contains_key(&self.reduce(c))
    }

    pub fn index_of(&self, c: CellCoord) -> Option<usize> {
        self.index.get(&self.reduce(c)).map(|&i| i as usize)
    }

    /// Neighbor of cell `i` in direction `d`, if it belongs to the region.
    pub fn neighbor(&self, i: usize, d: Dir) -> Option<usize> {
        let j = self.nbr[i][d.index()];
        (j != NONE).then_some(j as usize)
    }

    pub(crate) fn neighbor_row(&self, i: usize) -> &[u32; 6] {
        &self.nbr[i]
    }

    pub fn degree(&self, i: usize) -> usize {
        self.nbr[i].iter().filter(|&&j| j != NONE).count()
    }

    pub fn is_even(&self, i: usize) -> bool {
        self.cells[i].is_even()
    }

    pub fn even_count(&self) -> usize {
        self.cells.iter().filter(|c| c.is_even()).count()
    }

    pub fn odd_count(&self) -> usize {
        self.len() - self.even_count()
    }

    pub fn bounding_box(&self) -> Option<(CellCoord, CellCoord)> {
        let first = *self.cells.first()?;
        let mut lo = first;
        let mut hi = first;
        for &c in &self.cells {
            for a in 0..3 {
                lo.set(a, lo.get(a).min(c.get(a)));
                hi.set(a, hi.get(a).max(c.get(a)));
            }
        }
        Some((lo, hi))
    }

    /// Sub-region on a subset of cells, keeping the topology.
    pub fn subregion<I: IntoIterator<Item = CellCoord>>(&self, cells: I) -> Region {
        Region::build(self.topology.clone(), cells.into_iter().collect())
    }
}

pub fn build_box(a: i64, b: i64, c: i64) -> Result<Region> {
    if a < 1 || b < 1 || c < 1 {
        return Err(Error::InvalidRegion(format!("box dimensions must be positive: {a}x{b}x{c}")));
    }
    let mut cells = Vec::with_capacity((a * b * c) as usize);
    for x in 0..a {
        for y in 0..b {
            for z in 0..c {
                cells.push(CellCoord::new(x, y, z));
            }
        }
    }
    Ok(Region::open(cells))
}

/// Cells of [lo, hi] (inclusive) in every coordinate.
pub fn cube_between(lo: CellCoord, hi: CellCoord) -> Vec<CellCoord> {
    let mut out = Vec::new();
    for x in lo.x..=hi.x {
        for y in lo.y..=hi.y {
            for z in lo.z..=hi.z {
                out.push(CellCoord::new(x, y, z));
            }
        }
    }
    out
}

/// Footprint of the order-n Aztec diamond: |x−n+½| + |y−n+½| ≤ n.
pub fn aztec_footprint(n: i64) -> Vec<(i64, i64)> {
    let mut out = Vec::new();
    for x in 0..2 * n {
        for y in 0..2 * n {
            if (2 * x - 2 * n + 1).abs() + (2 * y - 2 * n + 1).abs() <= 2 * n {
                out.push((x, y));
            }
        }
    }
    out
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase")]
pub enum AztecKind {
    Pyramid { k: i64 },
    Octahedron { k: i64 },
    Prism { k: i64, height: i64 },
}

/// Layers are Aztec diamonds centred on the axis x = y = k − ½ with z starting at 0.
pub fn build_aztec(kind: AztecKind) -> Result<Region> {
    let (k, orders): (i64, Vec<i64>) = match kind {
        AztecKind::Pyramid { k } => (k, (1..=k).rev().collect()),
        AztecKind::Octahedron { k } => (k, (1..=k).chain((1..=k).rev()).collect()),
        AztecKind::Prism { k, height } => {
            if height < 1 {
                return Err(Error::InvalidRegion("prism height must be positive".into()));
            }
            (k + 1, (0..height).map(|z| if z % 2 == 0 { k } else { k + 1 }).collect())
        }
    };
    if orders.iter().any(|&o| o < 1) || k < 1 {
        return Err(Error::InvalidRegion("Aztec order must be at least 1".into()));
    }
    let mut cells = Vec::new();
    for (z, &n) in orders.iter().enumerate() {
        let off = k - n;
        for (x, y) in aztec_footprint(n) {
            cells.push(CellCoord::new(x + off, y + off, z as i64));
        }
    }
    Ok(Region::open(cells))
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Color {
    White,
    Black,
}

/// A dual square, stored as the cell on its inner side and the outward normal.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct Square {
    pub inner: CellCoord,
    pub normal: Dir,
}

impl Square {
    pub fn new(inner: CellCoord, normal: Dir) -> Self {
        Square { inner, normal }
    }

    pub fn outer(&self) -> CellCoord {
        self.inner.step(self.normal)
    }

    /// Twice the centre, so that all coordinates are integers.
    pub fn center2(&self) -> CellCoord {
        self.inner.scale(2) + self.normal.vector()
    }

    pub fn center(&self) -> [f64; 3] {
        let c = self.center2();
        [c.x as f64 / 2.0, c.y as f64 / 2.0, c.z as f64 / 2.0]
    }

    pub fn color(&self) -> Color {
        if self.inner.is_even() {
            Color::White
        } else {
            Color::Black
        }
    }
}

#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct DiscreteSurface {
    pub squares: Vec<Square>,
}

impl DiscreteSurface {
    pub fn new(mut squares: Vec<Square>) -> Self {
        squares.sort();
        squares.dedup();
        DiscreteSurface { squares }
    }

    pub fn len(&self) -> usize {
        self.squares.len()
    }

    pub fn is_empty(&self) -> bool {
        self.squares.is_empty()
    }

    pub fn color_counts(&self) -> (usize, usize) {
        let w = self.squares.iter().filter(|s| s.color() == Color::White).count();
        (w, self.squares.len() - w)
    }

    pub fn is_monochromatic(&self, c: Color) -> bool {
        self.squares.iter().all(|s| s.color() == c)
    }

    /// Plane cross-section between layers `at` and `at + 1` of `axis`, over the rectangle
    /// spanned by the other two axes.
    pub fn plane(axis: usize, at: i64, lo: [i64; 2], hi: [i64; 2]) -> Self {
        let (a, b) = other_axes(axis);
        let mut sq = Vec::new();
        for u in lo[0]..hi[0] {
            for v in lo[1]..hi[1] {
                let mut c = CellCoord::ORIGIN;
                c.set(axis, at);
                c.set(a, u);
                c.set(b, v);
                sq.push(Square::new(c, Dir::along(axis, 1)));
            }
        }
        DiscreteSurface::new(sq)
    }
}

pub fn other_axes(axis: usize) -> (usize, usize) {
    match axis {
        0 => (1, 2),
        1 => (0, 2),
        2 => (0, 1),
        _ => panic!("axis out of range: {axis}"),
    }
}

/// ∂U with outward normals. In periodic regions adjacency wraps.
pub fn boundary_surface(r: &Region, u: &[CellCoord]) -> DiscreteSurface {
    let set: HashSet<CellCoord> = u.iter().map(|&c| r.reduce(c)).collect();
    let mut sq = Vec::new();
    for &c in &set {
        for d in Dir::ALL {
            if !set.contains(&r.reduce(c.step(d))) {
                sq.push(Square::new(c, d));
            }
        }
    }
    DiscreteSurface::new(sq)
}

/// The part of ∂U facing cells of `r` outside U.
pub fn interior_surface(r: &Region, u: &[CellCoord]) -> DiscreteSurface {
    let set: HashSet<CellCoord> = u.iter().map(|&c| r.reduce(c)).collect();
    let mut sq = Vec::new();
    for &c in &set {
        for d in Dir::ALL {
            let n = r.reduce(c.step(d));
            if !set.contains(&n) && r.contains(n) {
                sq.push(Square::new(c, d));
            }
        }
    }
    DiscreteSurface::new(sq)
}
