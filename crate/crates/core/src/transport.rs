//! Signed point measures, the generalized Wasserstein distance W₁^{1,1}, and the flow
//! distance d_W built from component measures.

use std::cmp::Ordering;
use std::collections::{BTreeMap, BinaryHeap, HashMap};

use num_rational::Ratio;
use num_traits::ToPrimitive;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::lattice::{CellCoord, Dir, Region};
use crate::scalar::{ratio_to_f64, FlowScalar, Real};
use crate::tiling::DimerCover;

type Q = Ratio<i64>;

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Atom<T> {
    pub point: [T; 3],
    pub weight: T,
}

#[derive(Clone, Debug, Default, PartialEq, Serialize)]
pub struct SignedPointMeasure<T> {
    pub atoms: Vec<Atom<T>>,
}

impl<T: FlowScalar> SignedPointMeasure<T> {
    pub fn new(atoms: Vec<Atom<T>>) -> Self {
        SignedPointMeasure { atoms }
    }

    pub fn total_mass(&self) -> T {
        self.atoms.iter().fold(T::zero(), |s, a| s + a.weight.clone())
    }

    pub fn total_variation(&self) -> T {
        self.atoms.iter().fold(T::zero(), |s, a| s + a.weight.abs())
    }

    pub fn positive_part(&self) -> Self {
        Self::new(self.atoms.iter().filter(|a| a.weight > T::zero()).cloned().collect())
    }

    pub fn negative_part(&self) -> Self {
        Self::new(
            self.atoms
                .iter()
                .filter(|a| a.weight < T::zero())
                .map(|a| Atom { point: a.point.clone(), weight: -a.weight.clone() })
                .collect(),
        )
    }

    pub fn plus(&self, other: &Self) -> Self {
        let mut atoms = self.atoms.clone();
        atoms.extend(other.atoms.iter().cloned());
        Self::new(atoms)
    }

    pub fn negated(&self) -> Self {
        Self::new(self.atoms.iter().map(|a| Atom { point: a.point.clone(), weight: -a.weight.clone() }).collect())
    }

    pub fn translated(&self, t: [T; 3]) -> Self {
        Self::new(
            self.atoms
                .iter()
                .map(|a| Atom {
                    point: [
                        a.point[0].clone() + t[0].clone(),
                        a.point[1].clone() + t[1].clone(),
                        a.point[2].clone() + t[2].clone(),
                    ],
                    weight: a.weight.clone(),
                })
                .collect(),
        )
    }
}

impl SignedPointMeasure<Q> {
    pub fn to_real<T: Real>(&self) -> SignedPointMeasure<T> {
        let c = |q: &Q| T::from_f64(ratio_to_f64(q)).expect("finite");
        SignedPointMeasure {
            atoms: self.atoms.iter().map(|a| Atom { point: [c(&a.point[0]), c(&a.point[1]), c(&a.point[2])], weight: c(&a.weight) }).collect(),
        }
    }
}

impl<T: Real> SignedPointMeasure<T> {
    pub fn to_csv(&self) -> String {
        let mut s = String::from("x,y,z,weight\n");
        for a in &self.atoms {
            let f = |v: T| v.to_f64().unwrap_or(f64::NAN);
            s.push_str(&format!("{:.6},{:.6},{:.6},{:.9}\n", f(a.point[0]), f(a.point[1]), f(a.point[2]), f(a.weight)));
        }
        s
    }
}

pub const DEFAULT_SCALE: f64 = 1e6;

type Key = [u64; 3];

fn key_of<T: Real>(p: &[T; 3]) -> Key {
    p.map(|v| {
        let f = v.to_f64().unwrap_or(f64::NAN);
        if f == 0.0 {
            0
        } else {
            f.to_bits()
        }
    })
}

fn point_of(k: &Key) -> [f64; 3] {
    k.map(f64::from_bits)
}

fn dist(a: &[f64; 3], b: &[f64; 3]) -> f64 {
    ((a[0] - b[0]).powi(2) + (a[1] - b[1]).powi(2) + (a[2] - b[2]).powi(2)).sqrt()
}

/// W₁^{1,1}(μ₊ + ν₋, ν₊ + μ₋) with Euclidean ground cost and unit add/delete cost.
///
/// Each atom's weight is rounded to a multiple of 1/`scale` before anything else, so the
/// value depends on μ − ν only through these integers.
pub fn w11<T: Real>(mu: &SignedPointMeasure<T>, nu: &SignedPointMeasure<T>, scale: f64) -> Result<T> {
    if !(scale.is_finite() && scale > 0.0) {
        return Err(Error::PrecisionOverflow(format!("bad scale {scale}")));
    }
    let mut net: BTreeMap<Key, i64> = BTreeMap::new();
    for (m, sign) in [(mu, 1i64), (nu, -1i64)] {
        for a in &m.atoms {
            let w = a.weight.to_f64().unwrap_or(f64::NAN) * scale;
            if !w.is_finite() || w.abs() > 9.0e15 {
                return Err(Error::PrecisionOverflow(format!("weight {w} at scale {scale}")));
            }
            *net.entry(key_of(&a.point)).or_insert(0) += sign * w.round() as i64;
        }
    }
    let mut pos: Vec<(Key, i64)> = Vec::new();
    let mut neg: Vec<(Key, i64)> = Vec::new();
    for (k, m) in net {
        match m.cmp(&0) {
            Ordering::Greater => pos.push((k, m)),
            Ordering::Less => neg.push((k, -m)),
            Ordering::Equal => {}
        }
    }
    // The cost is symmetric in the two sides; fix the orientation so that (μ, ν) and
    // (ν, μ) hand the solver the same problem.
    if pos > neg {
        std::mem::swap(&mut pos, &mut neg);
    }
    let cost = solve_unbalanced(&pos, &neg)?;
    Ok(T::from_f64(cost / scale).expect("finite"))
}

/// Minimum of Σ d·flow + (deleted + created mass) over partial transports.
fn solve_unbalanced(src: &[(Key, i64)], snk: &[(Key, i64)]) -> Result<f64> {
    let sp: Vec<[f64; 3]> = src.iter().map(|s| point_of(&s.0)).collect();
    let tp: Vec<[f64; 3]> = snk.iter().map(|s| point_of(&s.0)).collect();
    if src.is_empty() || snk.is_empty() {
        let total: i64 = src.iter().chain(snk.iter()).map(|s| s.1).sum();
        return Ok(total as f64);
    }
    let full = src.len() * snk.len() <= 200_000;
    let mut arcs: Vec<(usize, usize)> = Vec::new();
    if full {
        for i in 0..src.len() {
            for j in 0..snk.len() {
                if dist(&sp[i], &tp[j]) < 2.0 {
                    arcs.push((i, j));
                }
            }
        }
    } else {
        let k = 10.min(snk.len());
        for i in 0..src.len() {
            let mut d: Vec<(f64, usize)> = (0..snk.len()).map(|j| (dist(&sp[i], &tp[j]), j)).collect();
            d.select_nth_unstable_by(k - 1, |a, b| a.partial_cmp(b).unwrap());
            arcs.extend(d[..k].iter().filter(|x| x.0 < 2.0).map(|x| (i, x.1)));
        }
        for j in 0..snk.len() {
            let mut d: Vec<(f64, usize)> = (0..src.len()).map(|i| (dist(&sp[i], &tp[j]), i)).collect();
            let k = 10.min(src.len());
            d.select_nth_unstable_by(k - 1, |a, b| a.partial_cmp(b).unwrap());
            arcs.extend(d[..k].iter().filter(|x| x.0 < 2.0).map(|x| (x.1, j)));
        }
        arcs.sort_unstable();
        arcs.dedup();
    }
    loop {
        let (cost, pot) = min_cost(src, snk, &sp, &tp, &arcs);
        if full {
            return Ok(cost);
        }
        let ns = src.len();
        let mut extra = Vec::new();
        for i in 0..src.len() {
            for j in 0..snk.len() {
                let d = dist(&sp[i], &tp[j]);
                if d < 2.0 && d + pot[i] - pot[ns + j] < -1e-9 {
                    extra.push((i, j));
                }
            }
        }
        if extra.is_empty() {
            return Ok(cost);
        }
        arcs.extend(extra);
        arcs.sort_unstable();
        arcs.dedup();
    }
}

struct Graph {
    head: Vec<usize>,
    next: Vec<usize>,
    to: Vec<usize>,
    cap: Vec<i64>,
    cost: Vec<f64>,
}

const NIL: usize = usize::MAX;

impl Graph {
    fn new(n: usize) -> Self {
        Graph { head: vec![NIL; n], next: Vec::new(), to: Vec::new(), cap: Vec::new(), cost: Vec::new() }
    }

    fn add(&mut self, u: usize, v: usize, cap: i64, cost: f64) {
        for (a, b, c, w) in [(u, v, cap, cost), (v, u, 0, -cost)] {
            self.to.push(b);
            self.cap.push(c);
            self.cost.push(w);
            self.next.push(self.head[a]);
            self.head[a] = self.to.len() - 1;
        }
    }
}

#[derive(PartialEq)]
struct HeapItem(f64, usize);
impl Eq for HeapItem {}
impl PartialOrd for HeapItem {
    fn partial_cmp(&self, o: &Self) -> Option<Ordering> {
        Some(self.cmp(o))
    }
}
impl Ord for HeapItem {
    fn cmp(&self, o: &Self) -> Ordering {
        o.0.partial_cmp(&self.0).unwrap_or(Ordering::Equal).then(o.1.cmp(&self.1))
    }
}

/// Successive shortest paths with potentials. Returns the cost and the node potentials
/// (sources first, then sinks).
fn min_cost(src: &[(Key, i64)], snk: &[(Key, i64)], sp: &[[f64; 3]], tp: &[[f64; 3]], arcs: &[(usize, usize)]) -> (f64, Vec<f64>) {
    let ns = src.len();
    let nt = snk.len();
    let void = ns + nt;
    let s = void + 1;
    let t = void + 2;
    let mut g = Graph::new(void + 3);
    let supply: i64 = src.iter().map(|x| x.1).sum();
    let demand: i64 = snk.iter().map(|x| x.1).sum();
    for (i, x) in src.iter().enumerate() {
        g.add(s, i, x.1, 0.0);
        g.add(i, void, x.1, 1.0);
    }
    for (j, x) in snk.iter().enumerate() {
        g.add(ns + j, t, x.1, 0.0);
        g.add(void, ns + j, x.1, 1.0);
    }
    if supply > demand {
        g.add(void, t, supply - demand, 0.0);
    } else if demand > supply {
        g.add(s, void, demand - supply, 0.0);
    }
    let big = supply.max(demand);
    for &(i, j) in arcs {
        g.add(i, ns + j, big, dist(&sp[i], &tp[j]));
    }
    let n = void + 3;
    let mut pot = vec![0.0f64; n];
    let mut dist_v = vec![f64::INFINITY; n];
    let mut prev = vec![NIL; n];
    let mut done = vec![false; n];
    let mut remaining = supply.max(demand);
    let mut total = 0.0;
    while remaining > 0 {
        dist_v.iter_mut().for_each(|d| *d = f64::INFINITY);
        prev.iter_mut().for_each(|p| *p = NIL);
        done.iter_mut().for_each(|d| *d = false);
        dist_v[s] = 0.0;
        let mut heap = BinaryHeap::new();
        heap.push(HeapItem(0.0, s));
        let mut dt = f64::INFINITY;
        while let Some(HeapItem(d, u)) = heap.pop() {
            if done[u] {
                continue;
            }
            done[u] = true;
            if u == t {
                dt = d;
                break;
            }
            let mut e = g.head[u];
            while e != NIL {
                if g.cap[e] > 0 {
                    let v = g.to[e];
                    let rc = (g.cost[e] + pot[u] - pot[v]).max(0.0);
                    let nd = d + rc;
                    if nd < dist_v[v] {
                        dist_v[v] = nd;
                        prev[v] = e;
                        heap.push(HeapItem(nd, v));
                    }
                }
                e = g.next[e];
            }
        }
        if !dt.is_finite() {
            break;
        }
        for v in 0..n {
            pot[v] += dist_v[v].min(dt);
        }
        let mut push = remaining;
        let mut v = t;
        while v != s {
            let e = prev[v];
            push = push.min(g.cap[e]);
            v = g.to[e ^ 1];
        }
        let mut v = t;
        while v != s {
            let e = prev[v];
            g.cap[e] -= push;
            g.cap[e ^ 1] += push;
            total += push as f64 * g.cost[e];
            v = g.to[e ^ 1];
        }
        remaining -= push;
    }
    (total, pot[..ns + nt].to_vec())
}

/// Component measures of f_τ at scale n over the edges joining two window cells:
/// one atom per edge ∥ ηᵢ at its scaled midpoint, weight (2/n³)·f(e) with e oriented +ηᵢ.
pub fn flow_to_component_measures(cover: &dyn DimerCover, n: i64, window: &Region) -> Result<[SignedPointMeasure<Q>; 3]> {
    if n < 1 {
        return Err(Error::OutOfRange("scale must be positive".into()));
    }
    let mut out: [Vec<Atom<Q>>; 3] = Default::default();
    let n3 = n * n * n;
    for &c in window.cells() {
        for axis in 0..3 {
            let d = Dir::along(axis, 1);
            if !window.contains(c.step(d)) {
                continue;
            }
            let (e, ed) = if c.is_even() { (c, d) } else { (c.step(d), d.opposite()) };
            let m = cover.mate_dir(e).ok_or(Error::Unmatched(e))?;
            let f = if m == ed { Q::new(5, 6) } else { Q::new(-1, 6) };
            let f = if c.is_even() { f } else { -f };
            out[axis].push(Atom { point: midpoint(c, axis, n), weight: Q::new(2, n3) * f });
        }
    }
    Ok(out.map(SignedPointMeasure::new))
}

fn midpoint(c: CellCoord, axis: usize, n: i64) -> [Q; 3] {
    let mut p = [Q::new(c.x, n), Q::new(c.y, n), Q::new(c.z, n)];
    p[axis] += Q::new(1, 2 * n);
    p
}

/// The constant flow v sampled on the same edge midpoints: weight vᵢ/n³ per edge ∥ ηᵢ.
pub fn constant_flow_measures(v: [Q; 3], n: i64, window: &Region) -> [SignedPointMeasure<Q>; 3] {
    let mut out: [Vec<Atom<Q>>; 3] = Default::default();
    let n3 = n * n * n;
    for &c in window.cells() {
        for axis in 0..3 {
            if window.contains(c.step(Dir::along(axis, 1))) {
                out[axis].push(Atom { point: midpoint(c, axis, n), weight: v[axis] / Q::from(n3) });
            }
        }
    }
    out.map(SignedPointMeasure::new)
}

pub type ComponentMeasures<T> = [SignedPointMeasure<T>; 3];

pub fn d_w<T: Real>(f: &ComponentMeasures<T>, g: &ComponentMeasures<T>, scale: f64) -> Result<T> {
    let mut s = T::zero();
    for i in 0..3 {
        s = s + w11(&f[i], &g[i], scale)?;
    }
    Ok(s)
}

/// M(10ε⁴ + δ) summed over the three components, for the partition of the common
/// support into cubes of side ε/√3 (diameter ε) anchored at the origin.
pub fn box_discrepancy_bound<T: Real>(f: &ComponentMeasures<T>, g: &ComponentMeasures<T>, eps: f64) -> Result<f64> {
    if !(eps > 0.0 && eps.is_finite()) {
        return Err(Error::OutOfRange(format!("partition size {eps} must be positive")));
    }
    let h = eps / 3f64.sqrt();
    let mut bound = 0.0;
    for i in 0..3 {
        let mut boxes: HashMap<[i64; 3], f64> = HashMap::new();
        for (m, sign) in [(&f[i], 1.0), (&g[i], -1.0)] {
            for a in &m.atoms {
                let k = a.point.map(|v| (v.to_f64().unwrap() / h).floor() as i64);
                *boxes.entry(k).or_insert(0.0) += sign * a.weight.to_f64().unwrap();
            }
        }
        let delta = boxes.values().fold(0.0f64, |acc, v| acc.max(v.abs()));
        bound += boxes.len() as f64 * (10.0 * eps.powi(4) + delta);
    }
    Ok(bound)
}

pub fn to_real3<T: Real>(m: &ComponentMeasures<Q>) -> ComponentMeasures<T> {
    [m[0].to_real(), m[1].to_real(), m[2].to_real()]
}

/// Exact total mass of each component.
pub fn component_masses(m: &ComponentMeasures<Q>) -> [Q; 3] {
    [m[0].total_mass(), m[1].total_mass(), m[2].total_mass()]
}

pub fn mass_f64(m: &SignedPointMeasure<Q>) -> f64 {
    m.total_mass().to_f64().unwrap_or(f64::NAN)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn delta(p: [f64; 3], w: f64) -> SignedPointMeasure<f64> {
        SignedPointMeasure::new(vec![Atom { point: p, weight: w }])
    }

    #[test]
    fn point_masses() {
        for (d, expect) in [(0.5, 0.5), (1.9, 1.9), (2.1, 2.0), (3.0, 2.0)] {
            let w = w11(&delta([0.0; 3], 1.0), &delta([d, 0.0, 0.0], 1.0), DEFAULT_SCALE).unwrap();
            assert!((w - expect).abs() < 1e-12, "{d}: {w}");
        }
        let m = delta([1.0, 2.0, 3.0], 0.25);
        assert_eq!(w11(&m, &m, DEFAULT_SCALE).unwrap(), 0.0);
    }

    #[test]
    fn signed_masses_cancel() {
        let mu = delta([0.0; 3], -1.0);
        let nu = delta([0.3, 0.0, 0.0], -1.0);
        assert!((w11(&mu, &nu, DEFAULT_SCALE).unwrap() - 0.3).abs() < 1e-12);
        assert!((w11(&mu, &SignedPointMeasure::default(), DEFAULT_SCALE).unwrap() - 1.0).abs() < 1e-12);
    }

    #[test]
    fn single_precision() {
        let a: SignedPointMeasure<f32> = SignedPointMeasure::new(vec![Atom { point: [0.0; 3], weight: 1.0 }]);
        let b: SignedPointMeasure<f32> = SignedPointMeasure::new(vec![Atom { point: [0.0, 0.5, 0.0], weight: 1.0 }]);
        assert!((w11(&a, &b, DEFAULT_SCALE).unwrap() - 0.5).abs() < 1e-6);
    }

    #[test]
    fn brickwork_component_masses() {
        use crate::lattice::build_box;
        use crate::tiling::PeriodicTiling;
        use num_traits::Zero;
        let t = PeriodicTiling::brickwork(Dir::XPos);
        for n in [4, 8] {
            let window = build_box(n, n, n).unwrap();
            let m = flow_to_component_measures(&t, n, &window).unwrap();
            assert_eq!(component_masses(&m), [Q::new(n - 1, n), Q::zero(), Q::zero()]);
        }
    }
}
