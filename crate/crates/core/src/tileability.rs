//! Exact tileability by bipartite matching, with Hall-violator certificates when a
//! region cannot be tiled.

use std::collections::{HashSet, VecDeque};
use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::lattice::{boundary_surface, interior_surface, cube_between, CellCoord, Dir, DiscreteSurface, Region, NONE};
use crate::tiling::{DimerCover, Tile, Tiling, TilingMode};

const INF: u32 = u32::MAX;

/// Maximum matching between cells of parity `left_even` and the others.
///
/// `seed` proposes initial pairs, accepted greedily in cell order when compatible.
/// Returns the per-cell direction table.
pub fn max_matching(region: &Region, left_even: bool, seed: Option<&dyn DimerCover>) -> Vec<Option<Dir>> {
    let n = region.len();
    let mut mate: Vec<Option<Dir>> = vec![None; n];
    let is_left = |i: usize| region.is_even(i) == left_even;
    if let Some(s) = seed {
        for i in 0..n {
            if !is_left(i) || mate[i].is_some() {
                continue;
            }
            if let Some(d) = s.mate_dir(region.cell(i)) {
                if let Some(j) = region.neighbor(i, d) {
                    if mate[j].is_none() && j != i {
                        mate[i] = Some(d);
                        mate[j] = Some(d.opposite());
                    }
                }
            }
        }
    }
    let left: Vec<usize> = (0..n).filter(|&i| is_left(i)).collect();
    let mut dist = vec![INF; n];
    let mut it = vec![0u8; n];
    let partner = |mate: &Vec<Option<Dir>>, j: usize| -> Option<usize> { mate[j].and_then(|d| region.neighbor(j, d)) };
    loop {
        let mut queue = VecDeque::new();
        for &u in &left {
            if mate[u].is_none() {
                dist[u] = 0;
                queue.push_back(u);
            } else {
                dist[u] = INF;
            }
        }
        let mut found = false;
        while let Some(u) = queue.pop_front() {
            for &v in region.neighbor_row(u) {
                if v == NONE {
                    continue;
                }
                match partner(&mate, v as usize) {
                    None => found = true,
                    Some(w) => {
                        if dist[w] == INF {
                            dist[w] = dist[u] + 1;
                            queue.push_back(w);
                        }
                    }
                }
            }
        }
        if !found {
            break;
        }
        for &u in &left {
            it[u] = 0;
        }
        let mut augmented = false;
        for &root in &left {
            if mate[root].is_some() {
                continue;
            }
            let mut stack = vec![root];
            while let Some(&u) = stack.last() {
                if it[u] as usize == 6 {
                    dist[u] = INF;
                    stack.pop();
                    continue;
                }
                let d = Dir::from_index(it[u] as usize);
                it[u] += 1;
                let Some(v) = region.neighbor(u, d) else { continue };
                match partner(&mate, v) {
                    None => {
                        for &x in &stack {
                            let dx = Dir::from_index(it[x] as usize - 1);
                            let y = region.neighbor(x, dx).unwrap();
                            mate[x] = Some(dx);
                            mate[y] = Some(dx.opposite());
                        }
                        augmented = true;
                        for &x in &stack {
                            dist[x] = INF;
                        }
                        break;
                    }
                    Some(w) => {
                        if dist[w] != INF && dist[w] == dist[u] + 1 {
                            stack.push(w);
                        }
                    }
                }
            }
        }
        if !augmented {
            break;
        }
    }
    mate
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct HallCertificate {
    #[serde(rename = "U")]
    pub u: Vec<CellCoord>,
    /// even(U) − odd(U), or odd(U) − even(U) when `swapped`.
    pub imbalance: i64,
    pub interior_boundary: Vec<CellCoord>,
    /// Squares of ∂U facing the rest of the region.
    pub surface: DiscreteSurface,
    /// Squares of ∂U on the majority-parity side (white unless swapped).
    pub white: usize,
    pub black: usize,
    pub surface_area: usize,
    pub swapped: bool,
}

impl HallCertificate {
    pub fn from_set(region: &Region, mut u: Vec<CellCoord>, swapped: bool) -> Self {
        for c in u.iter_mut() {
            *c = region.reduce(*c);
        }
        u.sort();
        u.dedup();
        let set: HashSet<CellCoord> = u.iter().copied().collect();
        let evens = u.iter().filter(|c| c.is_even()).count() as i64;
        let odds = u.len() as i64 - evens;
        let imbalance = if swapped { odds - evens } else { evens - odds };
        let interior_boundary: Vec<CellCoord> = u
            .iter()
            .copied()
            .filter(|&c| {
                Dir::ALL.iter().any(|&d| {
                    let nb = region.reduce(c.step(d));
                    region.contains(nb) && !set.contains(&nb)
                })
            })
            .collect();
        let (w, b) = boundary_surface(region, &u).color_counts();
        let (white, black) = if swapped { (b, w) } else { (w, b) };
        let surface = interior_surface(region, &u);
        let surface_area = surface.len();
        HallCertificate { u, imbalance, interior_boundary, surface, white, black, surface_area, swapped }
    }

    /// Checks every certificate invariant against the region it was computed for.
    pub fn check(&self, region: &Region) -> std::result::Result<(), String> {
        if self.u.iter().any(|&c| !region.contains(c)) {
            return Err("U is not contained in the region".into());
        }
        let fresh = HallCertificate::from_set(region, self.u.clone(), self.swapped);
        if fresh != *self {
            return Err("stored fields disagree with U".into());
        }
        if self.imbalance <= 0 {
            return Err(format!("imbalance {} is not positive", self.imbalance));
        }
        let minority_even = self.swapped;
        if self.interior_boundary.iter().any(|c| c.is_even() != minority_even) {
            return Err("interior boundary contains a majority-parity cell".into());
        }
        if 6 * self.imbalance != self.white as i64 - self.black as i64 {
            return Err("6·imbalance ≠ white − black".into());
        }
        Ok(())
    }
}

pub fn imbalance(region: &Region, u: &[CellCoord]) -> i64 {
    let set: HashSet<CellCoord> = u.iter().map(|&c| region.reduce(c)).collect();
    set.iter().map(|c| if c.is_even() { 1 } else { -1 }).sum()
}

pub fn surface_color_counts(region: &Region, u: &[CellCoord]) -> (usize, usize) {
    let counts = boundary_surface(region, u).color_counts();
    debug_assert_eq!(6 * imbalance(region, u), counts.0 as i64 - counts.1 as i64);
    counts
}

#[derive(Clone, Debug)]
pub enum MatchOutcome {
    Tiling(Tiling),
    /// `region` is the region that was actually matched (the input minus fixed cells).
    Certificate { cert: HallCertificate, region: Arc<Region> },
}

impl MatchOutcome {
    pub fn tiling(self) -> Option<Tiling> {
        match self {
            MatchOutcome::Tiling(t) => Some(t),
            MatchOutcome::Certificate { .. } => None,
        }
    }

    pub fn is_tiling(&self) -> bool {
        matches!(self, MatchOutcome::Tiling(_))
    }
}

/// Perfect matching of `region` extending the `fixed` tiles, or a Hall certificate for
/// the region left after removing the fixed cells. Fixed tiles may stick out of an open
/// region.
pub fn find_matching(region: &Arc<Region>, fixed: &[Tile]) -> Result<MatchOutcome> {
    find_matching_seeded(region, fixed, None)
}

pub fn find_matching_seeded(region: &Arc<Region>, fixed: &[Tile], seed: Option<&dyn DimerCover>) -> Result<MatchOutcome> {
    let mut fixed_dir: Vec<Option<Dir>> = vec![None; region.len()];
    for t in fixed {
        for (c, d) in [(t.even, t.dir), (t.odd(), t.dir.opposite())] {
            if let Some(i) = region.index_of(c) {
                if fixed_dir[i].is_some() {
                    return Err(Error::InconsistentConstraints(c));
                }
                fixed_dir[i] = Some(d);
            }
        }
    }
    let free_cells: Vec<CellCoord> =
        (0..region.len()).filter(|&i| fixed_dir[i].is_none()).map(|i| region.cell(i)).collect();
    let sub = if free_cells.len() == region.len() {
        region.clone()
    } else {
        Arc::new(region.subregion(free_cells))
    };
    match match_region(&sub, seed) {
        Ok(m) => {
            let mut mates = fixed_dir;
            for (k, &c) in sub.cells().iter().enumerate() {
                let i = region.index_of(c).unwrap();
                mates[i] = m[k];
            }
            let t = Tiling::from_mates(region.clone(), mates);
            let v = t.validate(TilingMode::FreeBoundary);
            assert!(v.is_empty(), "matcher produced an invalid tiling: {v:?}");
            Ok(MatchOutcome::Tiling(t))
        }
        Err(cert) => Ok(MatchOutcome::Certificate { cert, region: sub }),
    }
}

/// Perfect matching of the whole region or a certificate.
fn match_region(region: &Region, seed: Option<&dyn DimerCover>) -> std::result::Result<Vec<Option<Dir>>, HallCertificate> {
    let mate = max_matching(region, true, seed);
    if mate.iter().all(Option::is_some) {
        return Ok(mate);
    }
    let free_even = (0..region.len()).any(|i| region.is_even(i) && mate[i].is_none());
    let swapped = !free_even;
    let left_even = !swapped;
    let partner = |j: usize| mate[j].and_then(|d| region.neighbor(j, d));
    let mut seen = vec![false; region.len()];
    let mut queue = VecDeque::new();
    for i in 0..region.len() {
        if region.is_even(i) == left_even && mate[i].is_none() {
            seen[i] = true;
            queue.push_back(i);
        }
    }
    let mut u = Vec::new();
    let mut in_u = vec![false; region.len()];
    while let Some(x) = queue.pop_front() {
        if !in_u[x] {
            in_u[x] = true;
            u.push(region.cell(x));
        }
        for &y in region.neighbor_row(x) {
            if y == NONE {
                continue;
            }
            let y = y as usize;
            if !in_u[y] {
                in_u[y] = true;
                u.push(region.cell(y));
            }
            let w = partner(y).expect("maximum matching leaves no augmenting path");
            if !seen[w] {
                seen[w] = true;
                queue.push_back(w);
            }
        }
    }
    let cert = HallCertificate::from_set(region, u, swapped);
    if let Err(e) = cert.check(region) {
        panic!("certificate construction violated an invariant: {e}");
    }
    Err(cert)
}

/// Greedy local improvements of a certificate: fill dents with majority-parity cells
/// (possibly together with one minority neighbour) and drop isolated minority cells,
/// accepting a move only if the interior surface shrinks and the imbalance does not drop.
pub fn tighten_certificate(region: &Region, cert: &HallCertificate) -> HallCertificate {
    let majority_even = !cert.swapped;
    let mut in_u = vec![false; region.len()];
    for &c in &cert.u {
        if let Some(i) = region.index_of(c) {
            in_u[i] = true;
        }
    }
    let nbrs = |i: usize| region.neighbor_row(i).iter().filter(|&&j| j != NONE).map(|&j| j as usize);
    let mut improved = true;
    while improved {
        improved = false;
        for x in 0..region.len() {
            if in_u[x] {
                if region.is_even(x) != majority_even && nbrs(x).all(|j| !in_u[j]) {
                    in_u[x] = false;
                    improved = true;
                }
                continue;
            }
            if region.is_even(x) != majority_even {
                continue;
            }
            let missing: Vec<usize> = nbrs(x).filter(|&j| !in_u[j]).collect();
            match missing.as_slice() {
                [] => {
                    if nbrs(x).next().is_some() {
                        in_u[x] = true;
                        improved = true;
                    }
                }
                [y] => {
                    let y = *y;
                    let to_u_x = nbrs(x).filter(|&j| in_u[j]).count() as i64;
                    let to_u_y = nbrs(y).filter(|&j| in_u[j]).count() as i64;
                    let out_y = nbrs(y).filter(|&j| !in_u[j] && j != x).count() as i64;
                    if out_y - to_u_y - to_u_x < 0 {
                        in_u[x] = true;
                        in_u[y] = true;
                        improved = true;
                    }
                }
                _ => {}
            }
        }
    }
    let u: Vec<CellCoord> = (0..region.len()).filter(|&i| in_u[i]).map(|i| region.cell(i)).collect();
    let out = HallCertificate::from_set(region, u, cert.swapped);
    if out.check(region).is_err() || out.surface_area > cert.surface_area || out.imbalance < cert.imbalance {
        return cert.clone();
    }
    out
}

#[derive(Clone, Debug)]
pub enum PatchOutcome {
    Tiling(Tiling),
    Certificate { cert: HallCertificate, region: Arc<Region>, balanced: bool },
}

/// Tiles the annulus B_n ∖ B_m, m = ⌊(1−δ)n⌋, with `outer` outside B_n and `inner` inside B_m.
/// Boxes are B_k = [−k, k]³.
pub fn patch(outer: &dyn DimerCover, inner: &dyn DimerCover, n: i64, delta: f64) -> Result<PatchOutcome> {
    if n < 2 || !(0.0..1.0).contains(&delta) || delta <= 0.0 {
        return Err(Error::OutOfRange(format!("patch needs n ≥ 2 and 0 < δ < 1 (n = {n}, δ = {delta})")));
    }
    let m = ((1.0 - delta) * n as f64).floor() as i64;
    if m >= n {
        return Err(Error::OutOfRange("annulus is empty".into()));
    }
    let inb = |c: CellCoord, k: i64| c.x.abs() <= k && c.y.abs() <= k && c.z.abs() <= k;
    let cells: Vec<CellCoord> = cube_between(CellCoord::new(-n, -n, -n), CellCoord::new(n, n, n))
        .into_iter()
        .filter(|&c| m < 0 || !inb(c, m))
        .collect();
    let annulus = Arc::new(Region::open(cells));
    let mut fixed = Vec::new();
    for &c in annulus.cells() {
        let from_outer = outer.mate_dir(c).filter(|&d| !inb(c.step(d), n));
        let from_inner = inner.mate_dir(c).filter(|&d| m >= 0 && inb(c.step(d), m));
        match (from_outer, from_inner) {
            (Some(_), Some(_)) => return Err(Error::InconsistentConstraints(c)),
            (Some(d), None) | (None, Some(d)) => {
                let t = if c.is_even() { Tile::new(c, d) } else { Tile::new(c.step(d), d.opposite()) };
                fixed.push(t);
            }
            (None, None) => {}
        }
    }
    let out = find_matching_seeded(&annulus, &fixed, Some(inner))?;
    Ok(match out {
        MatchOutcome::Tiling(t) => PatchOutcome::Tiling(t),
        MatchOutcome::Certificate { cert, region } => {
            let balanced = region.even_count() == region.odd_count();
            PatchOutcome::Certificate { cert, region, balanced }
        }
    })
}
