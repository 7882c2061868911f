//! Flows on lattice edges: pretiling, tiling and double-dimer flows, their divergence,
//! fluxes, mean currents, torus windings and discrete traces.

use std::collections::HashMap;
use std::sync::Arc;

use num_rational::Ratio;
use num_traits::{One, Zero};
use serde::Serialize;

use crate::error::{Error, Result};
use crate::lattice::{other_axes, CellCoord, Dir, DiscreteSurface, Region, Square};
use crate::scalar::FlowScalar;
use crate::tiling::{DimerCover, Tiling};
use crate::transport::{Atom, SignedPointMeasure};

type Q = Ratio<i64>;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum FlowKind {
    Pretiling,
    Tiling,
    DoubleDimer,
}

/// Values on edges oriented even → odd, for every edge with an endpoint in the region.
#[derive(Clone, Debug)]
pub struct DimerFlow<S> {
    region: Arc<Region>,
    kind: FlowKind,
    inner: Vec<Option<S>>,
    outer: HashMap<(CellCoord, Dir), S>,
}

impl<S: FlowScalar> DimerFlow<S> {
    pub fn region(&self) -> &Region {
        &self.region
    }

    pub fn kind(&self) -> FlowKind {
        self.kind
    }

    /// Value on the edge from even cell `e` in direction `d`.
    pub fn value(&self, e: CellCoord, d: Dir) -> Option<S> {
        debug_assert!(e.is_even());
        match self.region.index_of(e) {
            Some(i) => self.inner[6 * i + d.index()].clone(),
            None => self.outer.get(&(e, d)).cloned(),
        }
    }

    /// Value on the edge from `a` to its neighbour in direction `d`, in that orientation.
    pub fn oriented(&self, a: CellCoord, d: Dir) -> Option<S> {
        if a.is_even() {
            self.value(a, d)
        } else {
            self.value(a.step(d), d.opposite()).map(|v| -v)
        }
    }

    /// Iterates over (even cell, direction, value).
    pub fn edges(&self) -> impl Iterator<Item = (CellCoord, Dir, S)> + '_ {
        let inner = self.inner.iter().enumerate().filter_map(move |(k, v)| {
            v.clone().map(|v| (self.region.cell(k / 6), Dir::from_index(k % 6), v))
        });
        let mut outer: Vec<_> = self.outer.iter().map(|(&(c, d), v)| (c, d, v.clone())).collect();
        outer.sort_by(|a, b| (a.0, a.1).cmp(&(b.0, b.1)));
        inner.chain(outer)
    }

    fn build(region: &Arc<Region>, kind: FlowKind, mut f: impl FnMut(CellCoord, Dir) -> S) -> Self {
        let r = &**region;
        let mut inner = vec![None; 6 * r.len()];
        let mut outer = HashMap::new();
        for (i, &c) in r.cells().iter().enumerate() {
            if c.is_even() {
                for d in Dir::ALL {
                    inner[6 * i + d.index()] = Some(f(c, d));
                }
            } else {
                for d in Dir::ALL {
                    let e = c.step(d);
                    if !r.contains(e) {
                        outer.insert((e, d.opposite()), f(e, d.opposite()));
                    }
                }
            }
        }
        DimerFlow { region: region.clone(), kind, inner, outer }
    }

    pub fn map(&self, kind: FlowKind, f: impl Fn(&S) -> S) -> Self {
        DimerFlow {
            region: self.region.clone(),
            kind,
            inner: self.inner.iter().map(|v| v.as_ref().map(&f)).collect(),
            outer: self.outer.iter().map(|(k, v)| (*k, f(v))).collect(),
        }
    }
}

fn matched(cover: &dyn DimerCover, e: CellCoord, d: Dir) -> bool {
    cover.mate_dir(e) == Some(d)
}

/// v_τ on every edge touching `region`, read from any cover of those cells.
pub fn pretiling_flow_of<S: FlowScalar>(cover: &dyn DimerCover, region: &Arc<Region>) -> DimerFlow<S> {
    DimerFlow::build(region, FlowKind::Pretiling, |e, d| if matched(cover, e, d) { S::one() } else { S::zero() })
}

pub fn tiling_flow_of<S: FlowScalar>(cover: &dyn DimerCover, region: &Arc<Region>) -> DimerFlow<S> {
    DimerFlow::build(region, FlowKind::Tiling, |e, d| {
        if matched(cover, e, d) {
            S::from_ratio(5, 6)
        } else {
            S::from_ratio(-1, 6)
        }
    })
}

pub fn pretiling_flow<S: FlowScalar>(t: &Tiling) -> DimerFlow<S> {
    pretiling_flow_of(t, t.region_arc())
}

pub fn tiling_flow<S: FlowScalar>(t: &Tiling) -> DimerFlow<S> {
    tiling_flow_of(t, t.region_arc())
}

pub fn double_dimer_flow<S: FlowScalar>(t1: &Tiling, t2: &Tiling) -> Result<DimerFlow<S>> {
    if t1.region() != t2.region() {
        return Err(Error::InvalidTiling("tilings live on different regions".into()));
    }
    Ok(DimerFlow::build(t1.region_arc(), FlowKind::DoubleDimer, |e, d| {
        let a = i64::from(matched(t1, e, d));
        let b = i64::from(matched(t2, e, d));
        S::from_ratio(a - b, 1)
    }))
}

/// Sum over the six edges at `c`, each oriented away from `c`.
pub fn divergence<S: FlowScalar>(flow: &DimerFlow<S>, c: CellCoord) -> Result<S> {
    let r = flow.region();
    let i = r.index_of(c).ok_or(Error::PartialStencil(c))?;
    if r.degree(i) < 6 {
        return Err(Error::PartialStencil(c));
    }
    let mut s = S::zero();
    for d in Dir::ALL {
        s = s + flow.oriented(r.cell(i), d).ok_or(Error::PartialStencil(c))?;
    }
    Ok(s)
}

fn square_edge(sq: &Square) -> (CellCoord, Dir, i64) {
    if sq.inner.is_even() {
        (sq.inner, sq.normal, 1)
    } else {
        (sq.outer(), sq.normal.opposite(), -1)
    }
}

/// Σ over pierced edges of sign⟨ξ, e⟩·F(e).
pub fn flux<S: FlowScalar>(flow: &DimerFlow<S>, surface: &DiscreteSurface) -> Result<S> {
    let mut s = S::zero();
    for sq in &surface.squares {
        let (e, d, sign) = square_edge(sq);
        let e = flow.region().reduce(e);
        let v = flow
            .value(e, d)
            .ok_or_else(|| Error::MalformedSurface(format!("square at {:?} pierces no edge of the flow", sq.center())))?;
        s = if sign > 0 { s + v } else { s - v };
    }
    Ok(s)
}

/// Flux of v_τ read straight from a cover.
pub fn cover_flux(cover: &dyn DimerCover, surface: &DiscreteSurface) -> Result<i64> {
    let mut s = 0;
    for sq in &surface.squares {
        let (e, d, sign) = square_edge(sq);
        if cover.mate_dir(sq.inner).is_none() {
            return Err(Error::Unmatched(sq.inner));
        }
        if matched(cover, e, d) {
            s += sign;
        }
    }
    Ok(s)
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub struct MeanCurrent {
    pub s: [Q; 3],
}

impl MeanCurrent {
    pub fn new(s: [Q; 3]) -> Self {
        MeanCurrent { s }
    }

    pub fn l1(&self) -> Q {
        self.s.iter().fold(Q::zero(), |a, b| a + if *b < Q::zero() { -*b } else { *b })
    }

    pub fn in_octahedron(&self) -> bool {
        self.l1() <= Q::one()
    }

    pub fn to_f64(&self) -> [f64; 3] {
        self.s.map(|q| crate::scalar::ratio_to_f64(&q))
    }
}

/// Average tile direction over the even cells of `window`.
pub fn mean_current_of(cover: &dyn DimerCover, window: &[CellCoord]) -> Result<MeanCurrent> {
    let mut sum = [0i64; 3];
    let mut n = 0i64;
    for &c in window {
        if !c.is_even() {
            continue;
        }
        let d = cover.mate_dir(c).ok_or(Error::Unmatched(c))?;
        sum[d.axis()] += d.sign();
        n += 1;
    }
    if n == 0 {
        return Err(Error::OutOfRange("window has no even cells".into()));
    }
    Ok(MeanCurrent::new(sum.map(|x| Q::new(x, n))))
}

pub fn mean_current(t: &Tiling, window: &Region) -> Result<MeanCurrent> {
    let cells: Vec<CellCoord> = window.cells().iter().map(|&c| t.region().reduce(c)).collect();
    for &c in &cells {
        if !t.region().contains(c) {
            return Err(Error::OutOfRange(format!("window cell {c} is outside the tiling's region")));
        }
    }
    mean_current_of(t, &cells)
}

/// Cross-section of a torus between layers `layer` and `layer + 1` of `axis`.
pub fn torus_cross_section(dims: [i64; 3], axis: usize, layer: i64) -> DiscreteSurface {
    let (a, b) = other_axes(axis);
    DiscreteSurface::plane(axis, layer, [0, 0], [dims[a], dims[b]])
}

pub fn winding_at(t: &Tiling, axis: usize, layer: i64) -> Result<i64> {
    let dims = t.region().torus_dims().ok_or(Error::NotTorus)?;
    let s = torus_cross_section(dims, axis, layer);
    let mut total = 0;
    for sq in &s.squares {
        let (e, d, sign) = square_edge(sq);
        let i = t.region().index_of(e).expect("torus cell");
        if t.mate_dir_at(i) == Some(d) {
            total += sign;
        }
    }
    Ok(total)
}

/// a(τ): flux of v_τ through the cross-section between layers 0 and 1 of each axis.
pub fn winding(t: &Tiling) -> Result<[i64; 3]> {
    Ok([winding_at(t, 0, 0)?, winding_at(t, 1, 0)?, winding_at(t, 2, 0)?])
}

/// Mean current of a winding class: sᵢ = 2aᵢ/(n_j n_k).
pub fn winding_to_mean_current(a: [i64; 3], dims: [i64; 3]) -> MeanCurrent {
    MeanCurrent::new([
        Q::new(2 * a[0], dims[1] * dims[2]),
        Q::new(2 * a[1], dims[0] * dims[2]),
        Q::new(2 * a[2], dims[0] * dims[1]),
    ])
}

#[derive(Clone, Debug, Serialize)]
pub struct PatchFlux {
    pub id: usize,
    pub normal: Dir,
    pub flux: i64,
    pub expected: f64,
    pub deviation: f64,
}

#[derive(Clone, Debug, Serialize)]
pub struct NearConstancy {
    pub patch_side: i64,
    pub max_deviation: f64,
    pub patches: Vec<PatchFlux>,
}

impl NearConstancy {
    pub fn to_csv(&self) -> String {
        let mut out = String::from("patch,normal,flux,expected,deviation\n");
        for p in &self.patches {
            out.push_str(&format!("{},{},{},{:.6},{:.6}\n", p.id, p.normal.name(), p.flux, p.expected, p.deviation));
        }
        out
    }
}

/// Max over εn×εn patches of ∂B_n (B_n = [−n, n]³) of |flux(v_τ, α) − ½⟨ξ_α, s⟩ area| / area.
pub fn nearly_constant_deviation(cover: &dyn DimerCover, n: i64, eps: f64, s: MeanCurrent) -> Result<NearConstancy> {
    let m = (eps * n as f64).floor() as i64;
    if m < 1 || n < 1 {
        return Err(Error::OutOfRange(format!("patch side εn = {} must be at least 1", eps * n as f64)));
    }
    let side = 2 * n + 1;
    let per = side / m;
    let sf = s.to_f64();
    let mut patches = Vec::new();
    let mut max_dev: f64 = 0.0;
    for axis in 0..3 {
        let (a, b) = other_axes(axis);
        for sign in [1i64, -1] {
            let normal = Dir::along(axis, sign);
            for i in 0..per {
                for j in 0..per {
                    let mut sq = Vec::with_capacity((m * m) as usize);
                    for u in 0..m {
                        for v in 0..m {
                            let mut c = CellCoord::ORIGIN;
                            c.set(axis, sign * n);
                            c.set(a, -n + i * m + u);
                            c.set(b, -n + j * m + v);
                            sq.push(Square::new(c, normal));
                        }
                    }
                    let flux = cover_flux(cover, &DiscreteSurface::new(sq))?;
                    let area = (m * m) as f64;
                    let expected = 0.5 * sign as f64 * sf[axis] * area;
                    let deviation = (flux as f64 - expected).abs() / area;
                    max_dev = max_dev.max(deviation);
                    patches.push(PatchFlux { id: patches.len(), normal, flux, expected, deviation });
                }
            }
        }
    }
    Ok(NearConstancy { patch_side: m, max_deviation: max_dev, patches })
}

/// Discrete trace of f_τ at scale n: one atom per pierced edge at (square centre)/n with
/// weight (2/n²)·sign⟨ξ, e⟩·f(e).
pub fn trace(cover: &dyn DimerCover, n: i64, surface: &DiscreteSurface) -> Result<SignedPointMeasure<Q>> {
    if n < 1 {
        return Err(Error::OutOfRange("scale must be positive".into()));
    }
    let mut atoms = Vec::with_capacity(surface.len());
    for sq in &surface.squares {
        let (e, d, sign) = square_edge(sq);
        if cover.mate_dir(e).is_none() && cover.mate_dir(e.step(d)).is_none() {
            return Err(Error::Unmatched(e));
        }
        let f = if matched(cover, e, d) { Q::new(5, 6) } else { Q::new(-1, 6) };
        let w = Q::new(2 * sign, n * n) * f;
        let c2 = sq.center2();
        let point = [Q::new(c2.x, 2 * n), Q::new(c2.y, 2 * n), Q::new(c2.z, 2 * n)];
        atoms.push(Atom { point, weight: w });
    }
    Ok(SignedPointMeasure::new(atoms))
}

/// Trace through the plane {x_axis = position} (scaled units) over the scaled window
/// [lo, hi)² of the other two axes. A plane through cell centres is moved off the lattice
/// by shifting the lattice a quarter cell.
pub fn trace_plane(cover: &dyn DimerCover, n: i64, axis: usize, position: Q, lo: [i64; 2], hi: [i64; 2]) -> Result<SignedPointMeasure<Q>> {
    let p = position * Q::from(n);
    let layer = if p.is_integer() { (p - Q::new(1, 4)).floor().to_integer() } else { p.floor().to_integer() };
    trace(cover, n, &DiscreteSurface::plane(axis, layer, lo, hi))
}
