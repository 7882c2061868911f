//! Lobachevsky function, boundary entropy, exact tiling counts, and entropy estimates.

use std::collections::{BTreeMap, HashMap};
use std::f64::consts::PI;
use std::fmt::Write as _;

use num_bigint::BigUint;
use num_rational::Ratio;
use num_traits::{One, Signed, ToPrimitive, Zero};
use serde::Serialize;

use crate::error::{Error, Result};
use crate::lattice::{Dir, Region, Topology};
use crate::scalar::ratio_to_f64;

type Q = Ratio<i64>;

fn simpson(f: &impl Fn(f64) -> f64, a: f64, b: f64, fa: f64, fm: f64, fb: f64, whole: f64, tol: f64, depth: u32) -> f64 {
    let m = 0.5 * (a + b);
    let lm = 0.5 * (a + m);
    let rm = 0.5 * (m + b);
    let flm = f(lm);
    let frm = f(rm);
    let left = (m - a) / 6.0 * (fa + 4.0 * flm + fm);
    let right = (b - m) / 6.0 * (fm + 4.0 * frm + fb);
    let diff = left + right - whole;
    if depth == 0 || diff.abs() <= 15.0 * tol {
        return left + right + diff / 15.0;
    }
    simpson(f, a, m, fa, flm, fm, left, tol / 2.0, depth - 1) + simpson(f, m, b, fm, frm, fb, right, tol / 2.0, depth - 1)
}

fn adaptive_simpson(f: impl Fn(f64) -> f64, a: f64, b: f64, tol: f64) -> f64 {
    if a == b {
        return 0.0;
    }
    let fa = f(a);
    let fb = f(b);
    let fm = f(0.5 * (a + b));
    let whole = (b - a) / 6.0 * (fa + 4.0 * fm + fb);
    simpson(&f, a, b, fa, fm, fb, whole, tol, 50)
}

fn log_sinc(x: f64) -> f64 {
    if x < 1e-4 {
        let x2 = x * x;
        -x2 / 6.0 - x2 * x2 / 180.0
    } else {
        (x.sin() / x).ln()
    }
}

/// L(θ) = −∫₀^θ ln(2 sin x) dx for θ ∈ [0, π].
///
/// The logarithmic singularity is removed analytically: ln(2 sin x) = ln(2x) + ln(sin x / x).
/// Arguments past π/2 use L(π − θ) = −L(θ).
pub fn lobachevsky(theta: f64) -> Result<f64> {
    if !(0.0..=PI).contains(&theta) {
        return Err(Error::OutOfRange(format!("Lobachevsky argument {theta} outside [0, π]")));
    }
    if theta > PI / 2.0 {
        return Ok(-lobachevsky(PI - theta)?);
    }
    if theta == 0.0 {
        return Ok(0.0);
    }
    let singular = theta * (2.0 * theta).ln() - theta;
    let smooth = adaptive_simpson(log_sinc, 0.0, theta, 1e-15);
    Ok(-(singular + smooth))
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub enum EntSource {
    BoundaryFormula,
    Enumeration { sizes: Vec<String> },
    Interpolated,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct FiniteSize {
    pub label: String,
    /// Linear size used for the 1/n extrapolation.
    pub n: i64,
    /// Mean current of the class actually counted.
    pub s: [f64; 3],
    pub even_cells: u64,
    pub log_count: f64,
    pub value: f64,
}

/// Entropy in nats per even vertex.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct EntEstimate {
    pub s: [f64; 3],
    pub value: f64,
    pub source: EntSource,
    pub finite_size: Vec<FiniteSize>,
    pub authoritative: bool,
}

fn on_boundary(s: &[Q; 3]) -> bool {
    s.iter().map(|x| x.abs()).sum::<Q>() == Q::one()
}

pub fn ent_boundary_f64(s: [f64; 3]) -> Result<f64> {
    let mut v = 0.0;
    for x in s {
        v += lobachevsky(PI * x.abs())?;
    }
    Ok(v / PI)
}

/// (1/π)(L(π|s₁|) + L(π|s₂|) + L(π|s₃|)) for s on the boundary of the octahedron.
pub fn ent_boundary(s: [Q; 3]) -> Result<EntEstimate> {
    if !on_boundary(&s) {
        return Err(Error::BadMeanCurrent(format!("{s:?} is not on the boundary of the octahedron")));
    }
    let sf = s.map(|x| ratio_to_f64(&x));
    Ok(EntEstimate {
        s: sf,
        value: ent_boundary_f64(sf)?,
        source: EntSource::BoundaryFormula,
        finite_size: Vec::new(),
        authoritative: true,
    })
}

pub const DEFAULT_BUDGET: usize = 1 << 20;

/// Order in which the counter sweeps the cells: lexicographic with the longest
/// bounding-box axis most significant.
fn sweep_order(r: &Region) -> Vec<usize> {
    let span = match r.topology() {
        Topology::Torus(d) => *d,
        _ => match r.bounding_box() {
            Some((lo, hi)) => [hi.x - lo.x + 1, hi.y - lo.y + 1, hi.z - lo.z + 1],
            None => [0; 3],
        },
    };
    let mut axes = [0usize, 1, 2];
    axes.sort_by_key(|&a| std::cmp::Reverse(span[a]));
    let mut order: Vec<usize> = (0..r.len()).collect();
    order.sort_by_key(|&i| {
        let c = r.cell(i);
        (c.get(axes[0]), c.get(axes[1]), c.get(axes[2]))
    });
    order
}

/// Contribution of the tile at even cell e in direction d to the winding vector.
fn winding_step(e: crate::lattice::CellCoord, d: Dir) -> [i64; 3] {
    let mut w = [0; 3];
    let a = d.axis();
    if d.sign() > 0 && e.get(a) == 0 {
        w[a] = 1;
    } else if d.sign() < 0 && e.get(a) == 1 {
        w[a] = -1;
    }
    w
}

/// Frontier dynamic program over the sweep order. The state is the set of not yet
/// processed cells already covered by a tile from a processed cell, plus (on tori) the
/// winding accumulated so far.
fn frontier_count(r: &Region, track_winding: bool, budget: usize) -> Result<BTreeMap<[i64; 3], BigUint>> {
    let order = sweep_order(r);
    let mut pos = vec![0u32; r.len()];
    for (p, &i) in order.iter().enumerate() {
        pos[i] = p as u32;
    }
    let mut states: HashMap<(Vec<u32>, [i64; 3]), BigUint> = HashMap::new();
    states.insert((Vec::new(), [0; 3]), BigUint::one());
    for (p, &i) in order.iter().enumerate() {
        let p = p as u32;
        let mut next: HashMap<(Vec<u32>, [i64; 3]), BigUint> = HashMap::with_capacity(states.len());
        let cell = r.cell(i);
        for ((set, w), count) in states {
            if set.first() == Some(&p) {
                *next.entry((set[1..].to_vec(), w)).or_insert_with(BigUint::zero) += count;
                continue;
            }
            for d in Dir::ALL {
                let Some(j) = r.neighbor(i, d) else { continue };
                let q = pos[j];
                if q <= p || set.binary_search(&q).is_ok() {
                    continue;
                }
                let mut s2 = set.clone();
                let at = s2.binary_search(&q).unwrap_err();
                s2.insert(at, q);
                let mut w2 = w;
                if track_winding {
                    let (e, de) = if cell.is_even() { (cell, d) } else { (r.cell(j), d.opposite()) };
                    let step = winding_step(e, de);
                    for k in 0..3 {
                        w2[k] += step[k];
                    }
                }
                *next.entry((s2, w2)).or_insert_with(BigUint::zero) += count.clone();
            }
        }
        if next.len() > budget {
            return Err(Error::BudgetExceeded(format!("{} frontier states at cell {p}", next.len())));
        }
        states = next;
    }
    let mut out = BTreeMap::new();
    for ((set, w), c) in states {
        debug_assert!(set.is_empty());
        *out.entry(w).or_insert_with(BigUint::zero) += c;
    }
    Ok(out)
}

/// Exact number of dimer tilings.
pub fn count_tilings(r: &Region, budget: usize) -> Result<BigUint> {
    if r.len() % 2 == 1 || r.even_count() != r.odd_count() {
        return Ok(BigUint::zero());
    }
    Ok(frontier_count(r, false, budget)?.into_values().sum())
}

/// Tiling counts of a torus split by winding vector a(τ).
pub fn count_torus_by_winding(r: &Region, budget: usize) -> Result<BTreeMap<[i64; 3], BigUint>> {
    if !matches!(r.topology(), Topology::Torus(_)) {
        return Err(Error::NotTorus);
    }
    frontier_count(r, true, budget)
}

pub fn ln_big(x: &BigUint) -> f64 {
    let bits = x.bits();
    if bits < 1000 {
        return x.to_f64().unwrap_or(f64::INFINITY).ln();
    }
    let shift = bits - 60;
    (x >> shift).to_f64().unwrap().ln() + shift as f64 * std::f64::consts::LN_2
}

/// Honeycomb dimer covers of an L×M torus, which are the tilings of one slab between two
/// consecutive diagonal levels using only +η₁, +η₂, +η₃ tiles. Rows carry k tiles of
/// type +η₂ each; the count is restricted to exactly `t1` tiles of type +η₁ in total.
pub fn slab_torus_count(l: usize, m: usize, k: usize, t1: usize) -> Result<u128> {
    if l == 0 || m == 0 || k > l || l > 30 {
        return Err(Error::OutOfRange(format!("slab torus L={l}, M={m}, k={k}")));
    }
    let states: Vec<u32> = (0u32..(1 << l)).filter(|s| s.count_ones() as usize == k).collect();
    let index: HashMap<u32, usize> = states.iter().enumerate().map(|(i, &s)| (s, i)).collect();
    // row transitions: odd positions `s` are taken from below, even positions `s2` send
    // tiles up; the remaining cells of the row pair along the row
    let mut trans: Vec<Vec<(usize, usize, u128)>> = vec![Vec::new(); states.len()];
    for (a, &s) in states.iter().enumerate() {
        for (b, &s2) in states.iter().enumerate() {
            for (t, mult) in row_matchings(l, s, s2) {
                trans[a].push((b, t, mult));
            }
        }
    }
    let tmax = (l - k) * m;
    if t1 > tmax {
        return Ok(0);
    }
    let width = tmax + 1;
    let rot = |s: u32| ((s << 1) | (s >> (l - 1))) & ((1u32 << l) - 1);
    let mut total: u128 = 0;
    let mut done = vec![false; states.len()];
    for (start, &s0) in states.iter().enumerate() {
        if done[start] {
            continue;
        }
        // the trace contribution is the same for every rotation of the start state
        let mut orbit = 0u128;
        let mut s = s0;
        loop {
            let i = index[&s];
            if !done[i] {
                done[i] = true;
                orbit += 1;
            }
            s = rot(s);
            if s == s0 {
                break;
            }
        }
        let mut cur = vec![0u128; states.len() * width];
        cur[start * width] = 1;
        for _ in 0..m {
            let mut nxt = vec![0u128; states.len() * width];
            for a in 0..states.len() {
                let row = &cur[a * width..(a + 1) * width];
                if row.iter().all(|&x| x == 0) {
                    continue;
                }
                for &(b, t, mult) in &trans[a] {
                    for (acc, &v) in row.iter().enumerate() {
                        if v == 0 || acc + t >= width {
                            continue;
                        }
                        let add = v.checked_mul(mult).ok_or_else(|| Error::PrecisionOverflow("slab count".into()))?;
                        let slot = &mut nxt[b * width + acc + t];
                        *slot = slot.checked_add(add).ok_or_else(|| Error::PrecisionOverflow("slab count".into()))?;
                    }
                }
            }
            cur = nxt;
        }
        let closed = cur[start * width + t1];
        total = closed
            .checked_mul(orbit)
            .and_then(|x| total.checked_add(x))
            .ok_or_else(|| Error::PrecisionOverflow("slab count".into()))?;
    }
    Ok(total)
}

/// Matchings of one honeycomb row: odd sites in `taken` and even sites in `sent` are
/// already used. Returns (number of +η₁ tiles, multiplicity) pairs.
fn row_matchings(l: usize, taken: u32, sent: u32) -> Vec<(usize, u128)> {
    // interleaved cycle: slot 2a is odd site a, slot 2a+1 is even site a, which meets
    // odd a by a +η₃ tile and odd a+1 by a +η₁ tile
    let n = 2 * l;
    let present = |slot: usize| {
        let a = slot / 2;
        if slot % 2 == 0 {
            taken & (1 << a) == 0
        } else {
            sent & (1 << a) == 0
        }
    };
    let Some(gap) = (0..n).find(|&s| !present(s)) else {
        return vec![(0, 1), (l, 1)];
    };
    let mut t1 = 0;
    let mut run_start: Option<usize> = None;
    for off in 1..=n {
        let slot = (gap + off) % n;
        if off < n && present(slot) {
            if run_start.is_none() {
                run_start = Some(off);
            }
            continue;
        }
        if let Some(st) = run_start.take() {
            if (off - st) % 2 != 0 {
                return Vec::new();
            }
            let mut o = st;
            while o < off {
                if (gap + o) % n % 2 == 1 {
                    t1 += 1;
                }
                o += 2;
            }
        }
    }
    vec![(t1, 1)]
}

/// Class (p₁, p₂, p₃) of a face point, with `p` the absolute values of s.
fn face_point(s: &[Q; 3]) -> Result<[f64; 3]> {
    if !on_boundary(s) {
        return Err(Error::BadMeanCurrent(format!("{s:?} is not on the boundary of the octahedron")));
    }
    Ok(s.map(|x| ratio_to_f64(&x.abs())))
}

/// ln(count)/(L·M) for the honeycomb torus of size n×n, in the class nearest to p.
/// The +η₂ type carries the particles.
pub fn slab_entropy(p: [f64; 3], n: usize) -> Result<FiniteSize> {
    let k = (p[1] * n as f64).round() as usize;
    let t1 = (p[0] * (n * n) as f64).round() as usize;
    let count = slab_torus_count(n, n, k, t1)?;
    let evens = (n * n) as u64;
    let log_count = if count == 0 { f64::NEG_INFINITY } else { (count as f64).ln() };
    let t2 = k * n;
    let t3 = n * n - t1 - t2;
    let nn = (n * n) as f64;
    Ok(FiniteSize {
        label: format!("slab {n}x{n}"),
        n: n as i64,
        s: [t1 as f64 / nn, t2 as f64 / nn, t3 as f64 / nn],
        even_cells: evens,
        log_count,
        value: log_count / evens as f64,
    })
}

/// Least-squares intercept of value against 1/n.
pub fn extrapolate(points: &[FiniteSize]) -> Option<f64> {
    let pts: Vec<(f64, f64)> = points.iter().filter(|p| p.value.is_finite()).map(|p| (1.0 / p.n as f64, p.value)).collect();
    if pts.len() < 2 {
        return pts.first().map(|p| p.1);
    }
    let k = pts.len() as f64;
    let mx = pts.iter().map(|p| p.0).sum::<f64>() / k;
    let my = pts.iter().map(|p| p.1).sum::<f64>() / k;
    let sxx: f64 = pts.iter().map(|p| (p.0 - mx).powi(2)).sum();
    if sxx == 0.0 {
        return Some(my);
    }
    let sxy: f64 = pts.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
    Some(my - sxy / sxx * mx)
}

/// Estimates for a point on the boundary face from honeycomb slab tori of the given sizes.
pub fn empirical_ent_boundary(s: [Q; 3], sizes: &[usize]) -> Result<EntEstimate> {
    let p = face_point(&s)?;
    let mut fs = Vec::new();
    for &n in sizes {
        let f = slab_entropy(p, n)?;
        if f.value.is_finite() {
            fs.push(f);
        }
    }
    let value = extrapolate(&fs).unwrap_or(f64::NAN).max(0.0);
    Ok(EntEstimate {
        s: s.map(|x| ratio_to_f64(&x)),
        value,
        source: EntSource::Enumeration { sizes: fs.iter().map(|f| f.label.clone()).collect() },
        finite_size: fs,
        authoritative: false,
    })
}

/// Per-even-vertex entropy of the winding class of an n₁×n₂×n₃ torus nearest to s.
pub fn torus_entropy(s: [Q; 3], dims: [i64; 3], budget: usize) -> Result<Option<FiniteSize>> {
    let classes = count_torus_by_winding(&Region::torus(dims)?, budget)?;
    Ok(nearest_class(s, dims, &classes))
}

/// Interior estimate from exact torus counts over the given torus shapes.
pub fn empirical_ent(s: [Q; 3], tori: &[[i64; 3]], budget: usize) -> Result<EntEstimate> {
    if s.iter().map(|x| x.abs()).sum::<Q>() > Q::one() {
        return Err(Error::BadMeanCurrent(format!("{s:?} is outside the octahedron")));
    }
    let mut fs = Vec::new();
    for &d in tori {
        if let Some(f) = torus_entropy(s, d, budget)? {
            fs.push(f);
        }
    }
    let value = extrapolate(&fs).unwrap_or(f64::NAN).max(0.0);
    Ok(EntEstimate {
        s: s.map(|x| ratio_to_f64(&x)),
        value,
        source: EntSource::Enumeration { sizes: fs.iter().map(|f| f.label.clone()).collect() },
        finite_size: fs,
        authoritative: false,
    })
}

/// Interior entropy estimates on the grid (1/6)Z³ ∩ O, interpolated multilinearly.
/// Estimate-only: the interior entropy has no closed form.
#[derive(Clone, Debug, Default, PartialEq, Serialize)]
pub struct EntTable {
    pub values: BTreeMap<[i64; 3], f64>,
}

pub const TABLE_STEP: i64 = 6;

impl EntTable {
    /// Fills the grid from torus counts: each grid point takes the estimate of the class
    /// nearest to it on every torus shape, extrapolated over the shapes.
    pub fn build(tori: &[[i64; 3]], budget: usize) -> Result<Self> {
        let mut per_shape = Vec::new();
        for &d in tori {
            per_shape.push((d, count_torus_by_winding(&Region::torus(d)?, budget)?));
        }
        let mut values = BTreeMap::new();
        for g in grid_points() {
            let s = g.map(|x| Q::new(x, TABLE_STEP));
            if on_boundary(&s) {
                values.insert(g, ent_boundary(s)?.value);
                continue;
            }
            let mut fs = Vec::new();
            for (d, classes) in &per_shape {
                if let Some(f) = nearest_class(s, *d, classes) {
                    fs.push(f);
                }
            }
            if let Some(v) = extrapolate(&fs) {
                values.insert(g, v.max(0.0));
            }
        }
        Ok(EntTable { values })
    }

    pub fn to_csv(&self) -> String {
        let mut out = String::from("# version 1\ns1,s2,s3,ent\n");
        for (g, v) in &self.values {
            let _ = writeln!(out, "{}/{TABLE_STEP},{}/{TABLE_STEP},{}/{TABLE_STEP},{v:.12}", g[0], g[1], g[2]);
        }
        out
    }

    pub fn from_csv(text: &str) -> Result<Self> {
        let mut values = BTreeMap::new();
        let mut lines = text.lines().filter(|l| !l.trim().is_empty());
        match lines.next() {
            Some(l) if l.trim() == "# version 1" => {}
            other => return Err(Error::Parse(format!("bad table header {other:?}"))),
        }
        for line in lines.skip(1) {
            let f: Vec<&str> = line.split(',').collect();
            if f.len() != 4 {
                return Err(Error::Parse(format!("bad table row `{line}`")));
            }
            let mut g = [0i64; 3];
            for i in 0..3 {
                let q: Q = f[i].trim().parse().map_err(|_| Error::Parse(format!("bad coordinate `{}`", f[i])))?;
                let scaled = q * Q::from(TABLE_STEP);
                if !scaled.is_integer() {
                    return Err(Error::Parse(format!("coordinate `{}` off the grid", f[i])));
                }
                g[i] = scaled.to_integer();
            }
            let v: f64 = f[3].trim().parse().map_err(|_| Error::Parse(format!("bad value `{}`", f[3])))?;
            values.insert(g, v);
        }
        Ok(EntTable { values })
    }

    fn at(&self, g: [i64; 3]) -> f64 {
        if let Some(v) = self.values.get(&g) {
            return *v;
        }
        // off the table: project radially onto the boundary face
        let l1: i64 = g.iter().map(|x| x.abs()).sum();
        if l1 == 0 {
            return 0.0;
        }
        ent_boundary_f64(g.map(|x| x as f64 / l1 as f64)).unwrap_or(0.0)
    }

    pub fn lookup(&self, s: [Q; 3]) -> Result<f64> {
        if s.iter().map(|x| x.abs()).sum::<Q>() > Q::one() {
            return Err(Error::BadMeanCurrent(format!("{s:?} is outside the octahedron")));
        }
        if on_boundary(&s) {
            return Ok(ent_boundary(s)?.value);
        }
        let x = s.map(|v| ratio_to_f64(&v) * TABLE_STEP as f64);
        let base = x.map(|v| v.floor() as i64);
        let frac = [0, 1, 2].map(|i| x[i] - base[i] as f64);
        let mut v = 0.0;
        for corner in 0..8 {
            let mut w = 1.0;
            let mut g = base;
            for i in 0..3 {
                if corner & (1 << i) != 0 {
                    g[i] += 1;
                    w *= frac[i];
                } else {
                    w *= 1.0 - frac[i];
                }
            }
            if w > 0.0 {
                v += w * self.at(g);
            }
        }
        Ok(v)
    }
}

fn grid_points() -> Vec<[i64; 3]> {
    let mut out = Vec::new();
    for a in -TABLE_STEP..=TABLE_STEP {
        for b in -TABLE_STEP..=TABLE_STEP {
            for c in -TABLE_STEP..=TABLE_STEP {
                if a.abs() + b.abs() + c.abs() <= TABLE_STEP {
                    out.push([a, b, c]);
                }
            }
        }
    }
    out
}

fn nearest_class(s: [Q; 3], dims: [i64; 3], classes: &BTreeMap<[i64; 3], BigUint>) -> Option<FiniteSize> {
    let target = s.map(|x| ratio_to_f64(&x));
    let current = |a: &[i64; 3]| {
        [0, 1, 2].map(|i| 2.0 * a[i] as f64 / (dims[(i + 1) % 3] * dims[(i + 2) % 3]) as f64)
    };
    let (a, c) = classes.iter().filter(|(_, c)| !c.is_zero()).min_by(|a, b| {
        let da: f64 = current(a.0).iter().zip(&target).map(|(x, y)| (x - y).abs()).sum();
        let db: f64 = current(b.0).iter().zip(&target).map(|(x, y)| (x - y).abs()).sum();
        da.partial_cmp(&db).unwrap().then(a.0.cmp(b.0))
    })?;
    let evens = (dims[0] * dims[1] * dims[2] / 2) as u64;
    let lc = ln_big(c);
    Some(FiniteSize {
        label: format!("torus {}x{}x{}", dims[0], dims[1], dims[2]),
        n: *dims.iter().min().unwrap(),
        s: current(a),
        even_cells: evens,
        log_count: lc,
        value: lc / evens as f64,
    })
}

/// A flow constant on each unit cell of an a×b×c box, cells in x-major order.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct PiecewiseConstantFlow {
    pub dims: [i64; 3],
    pub values: Vec<[Q; 3]>,
}

impl PiecewiseConstantFlow {
    pub fn constant(dims: [i64; 3], v: [Q; 3]) -> Self {
        PiecewiseConstantFlow { dims, values: vec![v; (dims[0] * dims[1] * dims[2]) as usize] }
    }

    fn idx(&self, c: [i64; 3]) -> usize {
        ((c[0] * self.dims[1] + c[1]) * self.dims[2] + c[2]) as usize
    }

    pub fn at(&self, c: [i64; 3]) -> [Q; 3] {
        self.values[self.idx(c)]
    }

    /// Normal components agree across every interior face.
    pub fn check_divergence_free(&self) -> Result<()> {
        let d = self.dims;
        for x in 0..d[0] {
            for y in 0..d[1] {
                for z in 0..d[2] {
                    let c = [x, y, z];
                    for axis in 0..3 {
                        let mut n = c;
                        n[axis] += 1;
                        if n[axis] < d[axis] && self.at(c)[axis] != self.at(n)[axis] {
                            return Err(Error::Divergence(crate::lattice::CellCoord::from(c)));
                        }
                    }
                }
            }
        }
        Ok(())
    }
}

/// Ent(g) = volume average of ent(g(x)).
pub fn ent_functional(g: &PiecewiseConstantFlow, table: &EntTable) -> Result<f64> {
    if g.values.len() as i64 != g.dims.iter().product::<i64>() || g.values.is_empty() {
        return Err(Error::InvalidRegion("flow does not match its box".into()));
    }
    g.check_divergence_free()?;
    let mut total = 0.0;
    for v in &g.values {
        total += table.lookup(*v)?;
    }
    Ok(total / g.values.len() as f64)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::lattice::{build_aztec, build_box, AztecKind};

    #[test]
    fn lobachevsky_values() {
        assert_eq!(lobachevsky(0.0).unwrap(), 0.0);
        assert!(lobachevsky(PI).unwrap().abs() < 1e-14);
        assert!((lobachevsky(PI / 3.0).unwrap() - 0.3383138688032179).abs() < 1e-12);
        assert!(lobachevsky(-0.1).is_err());
    }

    #[test]
    fn small_counts() {
        assert_eq!(count_tilings(&build_box(2, 2, 2).unwrap(), DEFAULT_BUDGET).unwrap(), BigUint::from(9u32));
        assert_eq!(count_tilings(&build_box(2, 2, 1).unwrap(), DEFAULT_BUDGET).unwrap(), BigUint::from(2u32));
        let ad = build_aztec(AztecKind::Prism { k: 2, height: 1 }).unwrap();
        assert_eq!(count_tilings(&ad, DEFAULT_BUDGET).unwrap(), BigUint::from(8u32));
    }

    #[test]
    fn honeycomb_rows() {
        assert_eq!(row_matchings(3, 0, 0), vec![(0, 1), (3, 1)]);
        // odd 0 and even 0 used: remaining slots odd1 even1 odd2 even2 pair as η₃, η₃
        assert_eq!(row_matchings(3, 1, 1), vec![(0, 1)]);
        assert!(row_matchings(3, 1, 2).len() == 1);
    }
}
