//! Superpositions of two tilings: cycle decomposition, displacements, chain swapping.

use std::sync::Arc;

use num_rational::Ratio;
use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::lattice::{CellCoord, Dir, Topology};
use crate::tiling::{Tile, Tiling};

type Q = Ratio<i64>;

/// An alternating cycle, traversed along τ₁ tiles from even to odd cells and along
/// τ₂ tiles back. `steps[k]` is the τ₁ direction at the k-th even cell followed by the
/// τ₂ direction out of the next odd cell (both as traversal steps).
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct Cycle {
    pub evens: Vec<CellCoord>,
    pub steps: Vec<(Dir, Dir)>,
    pub displacement: [i64; 3],
    pub winding: [i64; 3],
}

impl Cycle {
    /// Number of cells on the cycle.
    pub fn cell_count(&self) -> usize {
        2 * self.steps.len()
    }

    pub fn edge_count(&self) -> usize {
        2 * self.steps.len()
    }

    pub fn is_winding(&self) -> bool {
        self.winding != [0, 0, 0]
    }

    pub fn tau1_tiles(&self) -> Vec<Tile> {
        self.evens.iter().zip(&self.steps).map(|(&e, s)| Tile::new(e, s.0)).collect()
    }

    /// τ₂ tiles of the cycle, each named from its even cell.
    pub fn tau2_tiles(&self) -> Vec<Tile> {
        let n = self.evens.len();
        (0..n).map(|k| Tile::new(self.evens[(k + 1) % n], self.steps[k].1.opposite())).collect()
    }
}

#[derive(Clone, Debug)]
pub struct DoubleDimerConfig {
    pub t1: Tiling,
    pub t2: Tiling,
    pub double_edges: Vec<Tile>,
    pub cycles: Vec<Cycle>,
}

fn same_region(a: &Tiling, b: &Tiling) -> bool {
    Arc::ptr_eq(a.region_arc(), b.region_arc()) || a.region() == b.region()
}

pub fn superpose(t1: &Tiling, t2: &Tiling) -> Result<DoubleDimerConfig> {
    if !same_region(t1, t2) {
        return Err(Error::InvalidTiling("tilings live on different regions".into()));
    }
    let r = t1.region();
    let dims = match r.topology() {
        Topology::Torus(d) => Some(*d),
        _ => None,
    };
    let mut seen = vec![false; r.len()];
    let mut double_edges = Vec::new();
    let mut cycles = Vec::new();
    for s in 0..r.len() {
        if seen[s] || !r.is_even(s) {
            continue;
        }
        let d1 = t1.mate_dir_at(s).ok_or(Error::Unmatched(r.cell(s)))?;
        let d2 = t2.mate_dir_at(s).ok_or(Error::Unmatched(r.cell(s)))?;
        if d1 == d2 {
            seen[s] = true;
            if let Some(o) = r.neighbor(s, d1) {
                seen[o] = true;
            }
            double_edges.push(Tile::new(r.cell(s), d1));
            continue;
        }
        let mut evens = Vec::new();
        let mut steps = Vec::new();
        let mut disp = CellCoord::ORIGIN;
        let mut e = s;
        loop {
            seen[e] = true;
            let a = t1.mate_dir_at(e).ok_or(Error::Unmatched(r.cell(e)))?;
            let o = r.neighbor(e, a).ok_or(Error::Unmatched(r.cell(e)))?;
            seen[o] = true;
            let b = t2.mate_dir_at(o).ok_or(Error::Unmatched(r.cell(o)))?;
            let e2 = r.neighbor(o, b).ok_or(Error::Unmatched(r.cell(o)))?;
            evens.push(r.cell(e));
            steps.push((a, b));
            disp = disp + a.vector() + b.vector();
            e = e2;
            if e == s {
                break;
            }
        }
        let displacement = disp.to_array();
        let winding = match dims {
            Some(d) => [displacement[0] / d[0], displacement[1] / d[1], displacement[2] / d[2]],
            None => [0, 0, 0],
        };
        cycles.push(Cycle { evens, steps, displacement, winding });
    }
    Ok(DoubleDimerConfig { t1: t1.clone(), t2: t2.clone(), double_edges, cycles })
}

/// Σ_{e∈γ∩τ₁} dir(e) − Σ_{e∈γ∩τ₂} dir(e) in the universal cover, directions even→odd.
pub fn cycle_displacement(g: &Cycle) -> [i64; 3] {
    g.displacement
}

/// Sum of cycle windings; equals a(τ₁) − a(τ₂) on a torus.
pub fn total_winding(cfg: &DoubleDimerConfig) -> [i64; 3] {
    let mut w = [0; 3];
    for c in &cfg.cycles {
        for i in 0..3 {
            w[i] += c.winding[i];
        }
    }
    w
}

/// Replaces the tiles of `t` on cycle `g` by the other tiling's tiles. `from_t1` says
/// whether `t` currently holds the τ₁ side of the cycle.
pub fn shift_along(t: &Tiling, g: &Cycle, from_t1: bool) -> Tiling {
    let r = t.region_arc().clone();
    let mut mates = t.mates().to_vec();
    let n = g.evens.len();
    for k in 0..n {
        let e = r.index_of(g.evens[k]).expect("cycle cell in region");
        let (a, b) = g.steps[k];
        let o = r.neighbor(e, a).expect("cycle step in region");
        let e2 = r.neighbor(o, b).expect("cycle step in region");
        if from_t1 {
            mates[o] = Some(b);
            mates[e2] = Some(b.opposite());
        } else {
            mates[e] = Some(a);
            mates[o] = Some(a.opposite());
        }
    }
    Tiling::from_mates(r, mates)
}

#[derive(Clone, Debug)]
pub struct SwapResult {
    pub t1: Tiling,
    pub t2: Tiling,
    pub swapped: Vec<usize>,
}

/// Swaps τ₁/τ₂ along each nonzero-winding cycle independently with probability p.
pub fn chain_swap(t1: &Tiling, t2: &Tiling, p: f64, seed: u64) -> Result<SwapResult> {
    if !(0.0..=1.0).contains(&p) {
        return Err(Error::OutOfRange(format!("swap probability {p}")));
    }
    if !matches!(t1.region().topology(), Topology::Torus(_)) {
        return Err(Error::NotTorus);
    }
    let cfg = superpose(t1, t2)?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut a = t1.clone();
    let mut b = t2.clone();
    let mut swapped = Vec::new();
    for (k, c) in cfg.cycles.iter().enumerate() {
        if !c.is_winding() {
            continue;
        }
        if rng.gen_bool(p) {
            a = shift_along(&a, c, true);
            b = shift_along(&b, c, false);
            swapped.push(k);
        }
    }
    Ok(SwapResult { t1: a, t2: b, swapped })
}

#[derive(Clone, Debug, Serialize)]
pub struct SlopeStatistics {
    /// Two-step displacement per τ₁ tile on each cycle.
    pub slopes: Vec<[Q; 3]>,
    /// Σ_γ |γ| slope(γ) / |R|; double edges count with slope zero.
    pub weighted_mean: [Q; 3],
}

pub fn slope_statistics(cfg: &DoubleDimerConfig) -> SlopeStatistics {
    let cells = cfg.t1.region().len() as i64;
    let mut mean = [Q::from(0); 3];
    let mut slopes = Vec::with_capacity(cfg.cycles.len());
    for c in &cfg.cycles {
        let k = c.steps.len() as i64;
        let s = c.displacement.map(|d| Q::new(d, k));
        for i in 0..3 {
            mean[i] += s[i] * Q::from(c.cell_count() as i64) / Q::from(cells);
        }
        slopes.push(s);
    }
    SlopeStatistics { slopes, weighted_mean: mean }
}

/// Union of the two tilings as a sorted multiset of tiles.
pub fn edge_multiset(t1: &Tiling, t2: &Tiling) -> Vec<Tile> {
    let mut v = t1.tiles();
    v.extend(t2.tiles());
    v.sort();
    v
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::lattice::{build_box, Region};
    use crate::tiling::brickwork;

    #[test]
    fn identical_tilings() {
        let b = Arc::new(build_box(2, 2, 2).unwrap());
        let t = brickwork(&b, Dir::XPos).unwrap();
        let c = superpose(&t, &t).unwrap();
        assert!(c.cycles.is_empty());
        assert_eq!(c.double_edges.len(), 4);
        assert_eq!(slope_statistics(&c).weighted_mean, [Q::from(0); 3]);
    }

    #[test]
    fn two_by_two_square() {
        let b = Arc::new(build_box(2, 2, 1).unwrap());
        let x = brickwork(&b, Dir::XPos).unwrap();
        let y = brickwork(&b, Dir::YPos).unwrap();
        let c = superpose(&x, &y).unwrap();
        assert_eq!(c.cycles.len(), 1);
        assert_eq!(c.cycles[0].edge_count(), 4);
        assert_eq!(cycle_displacement(&c.cycles[0]), [0, 0, 0]);
        assert_eq!(shift_along(&x, &c.cycles[0], true), y);
    }

    #[test]
    fn opposite_brickworks() {
        let r = Arc::new(Region::torus([4, 4, 4]).unwrap());
        let p = brickwork(&r, Dir::XPos).unwrap();
        let m = brickwork(&r, Dir::XNeg).unwrap();
        let c = superpose(&p, &m).unwrap();
        assert_eq!(c.cycles.len(), 16);
        assert!(c.cycles.iter().all(|g| g.winding == [1, 0, 0] && g.displacement == [4, 0, 0]));
        let s = slope_statistics(&c);
        assert!(s.slopes.iter().all(|v| *v == [Q::from(2), Q::from(0), Q::from(0)]));
        assert_eq!(s.weighted_mean, [Q::from(2), Q::from(0), Q::from(0)]);
        let all = chain_swap(&p, &m, 1.0, 0).unwrap();
        assert_eq!(all.t1, m);
        assert_eq!(all.t2, p);
        let none = chain_swap(&p, &m, 0.0, 0).unwrap();
        assert_eq!(none.t1, p);
    }
}
