//! Local moves, the twist, the loop-shift chain, and tiling-graph connectivity.

use std::collections::{BTreeMap, HashMap, HashSet, VecDeque};
use std::sync::Arc;

use num_bigint::BigInt;
use num_rational::{BigRational, Ratio};
use num_traits::{One, Zero};
use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use crate::doubledimer::{shift_along, superpose};
use crate::error::{Error, Result};
use crate::lattice::{build_box, CellCoord, Dir, Region};
use crate::tileability::find_matching;
use crate::tiling::{Tile, Tiling};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize)]
pub enum MoveKind {
    Flip,
    Trit,
    LoopShift,
}

/// Replaces `removed` tiles by `added` tiles along one alternating cycle.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize)]
pub struct Move {
    pub kind: MoveKind,
    pub removed: Vec<Tile>,
    pub added: Vec<Tile>,
}

fn tile_at(r: &Region, i: usize, d: Dir) -> Tile {
    if r.is_even(i) {
        Tile::new(r.cell(i), d)
    } else {
        let j = r.neighbor(i, d).expect("edge inside region");
        Tile::new(r.cell(j), d.opposite())
    }
}

fn has_tile(t: &Tiling, tile: &Tile) -> bool {
    t.region().index_of(tile.even).is_some_and(|i| t.mate_dir_at(i) == Some(tile.dir))
}

/// Cells of a 4-cycle i, i+u, i+u+v, i+v, when all are distinct region cells.
fn square(r: &Region, i: usize, u: Dir, v: Dir) -> Option<[usize; 4]> {
    let j = r.neighbor(i, u)?;
    let k = r.neighbor(i, v)?;
    let l = r.neighbor(j, v)?;
    if r.neighbor(k, u)? != l {
        return None;
    }
    let s = [i, j, l, k];
    let distinct = (0..4).all(|a| (a + 1..4).all(|b| s[a] != s[b]));
    distinct.then_some(s)
}

pub fn find_flips(t: &Tiling) -> Vec<Move> {
    let r = t.region();
    let mut out = HashSet::new();
    for i in 0..r.len() {
        for a in 0..3 {
            for b in a + 1..3 {
                let (u, v) = (Dir::along(a, 1), Dir::along(b, 1));
                let Some([i0, j, l, k]) = square(r, i, u, v) else { continue };
                for (p, q) in [(u, v), (v, u)] {
                    // tiles i→i+p and (i+q)→(i+q)+p become i→i+q and (i+p)→(i+p)+q
                    let (ip, iq) = if p == u { (j, k) } else { (k, j) };
                    if t.mate_dir_at(i0) == Some(p) && t.mate_dir_at(iq) == Some(p) && t.mate(iq) == Some(l) {
                        let mut removed = vec![tile_at(r, i0, p), tile_at(r, iq, p)];
                        let mut added = vec![tile_at(r, i0, q), tile_at(r, ip, q)];
                        removed.sort();
                        added.sort();
                        out.insert(Move { kind: MoveKind::Flip, removed, added });
                    }
                }
            }
        }
    }
    let mut v: Vec<Move> = out.into_iter().collect();
    v.sort();
    v
}

/// Moves on the hexagons of 2×2×2 cubes that avoid one pair of antipodal corners.
pub fn find_trits(t: &Tiling) -> Vec<Move> {
    let r = t.region();
    let axes = [Dir::XPos, Dir::YPos, Dir::ZPos];
    let mut out = HashSet::new();
    for i in 0..r.len() {
        // corners indexed by bit mask over the three axes
        let mut corner = [usize::MAX; 8];
        corner[0] = i;
        let mut ok = true;
        for m in 1..8usize {
            let low = m.trailing_zeros() as usize;
            match r.neighbor(corner[m & !(1 << low)], axes[low]) {
                Some(c) => corner[m] = c,
                None => {
                    ok = false;
                    break;
                }
            }
        }
        if !ok {
            continue;
        }
        // every path between corners must agree, and all corners must differ
        let consistent = (0..8usize).all(|m| {
            (0..3).all(|a| m & (1 << a) != 0 || r.neighbor(corner[m], axes[a]) == Some(corner[m | (1 << a)]))
        });
        let distinct = (0..8).all(|a| (a + 1..8).all(|b| corner[a] != corner[b]));
        if !consistent || !distinct {
            continue;
        }
        for c0 in [0usize, 1, 2, 4] {
            let e = [1usize, 2, 4];
            let hex = [c0 ^ e[0], c0 ^ e[0] ^ e[1], c0 ^ e[1], c0 ^ e[1] ^ e[2], c0 ^ e[2], c0 ^ e[2] ^ e[0]];
            let edge = |a: usize, b: usize| -> (usize, Dir) {
                let bit = (hex[a] ^ hex[b]).trailing_zeros() as usize;
                let sign = if hex[b] & (1 << bit) != 0 { 1 } else { -1 };
                (corner[hex[a]], Dir::along(bit, sign))
            };
            let m_a = [edge(0, 1), edge(2, 3), edge(4, 5)];
            let m_b = [edge(1, 2), edge(3, 4), edge(5, 0)];
            for (from, to) in [(m_a, m_b), (m_b, m_a)] {
                if from.iter().all(|&(c, d)| t.mate_dir_at(c) == Some(d)) {
                    let mut removed: Vec<Tile> = from.iter().map(|&(c, d)| tile_at(r, c, d)).collect();
                    let mut added: Vec<Tile> = to.iter().map(|&(c, d)| tile_at(r, c, d)).collect();
                    removed.sort();
                    added.sort();
                    out.insert(Move { kind: MoveKind::Trit, removed, added });
                }
            }
        }
    }
    let mut v: Vec<Move> = out.into_iter().collect();
    v.sort();
    v
}

pub fn apply(t: &Tiling, m: &Move) -> Result<Tiling> {
    let r = t.region_arc().clone();
    let mut mates = t.mates().to_vec();
    for tile in &m.removed {
        if !has_tile(t, tile) {
            return Err(Error::InvalidTiling(format!("move removes absent tile {tile:?}")));
        }
        let i = r.index_of(tile.even).unwrap();
        mates[i] = None;
        if let Some(j) = r.neighbor(i, tile.dir) {
            mates[j] = None;
        }
    }
    for tile in &m.added {
        let i = r.index_of(tile.even).ok_or_else(|| Error::InvalidTiling(format!("{tile:?} outside region")))?;
        let j = r.neighbor(i, tile.dir).ok_or_else(|| Error::InvalidTiling(format!("{tile:?} leaves region")))?;
        if mates[i].is_some() || mates[j].is_some() {
            return Err(Error::InvalidTiling(format!("move adds overlapping tile {tile:?}")));
        }
        mates[i] = Some(tile.dir);
        mates[j] = Some(tile.dir.opposite());
    }
    Ok(Tiling::from_mates(r, mates))
}

/// Twist value with a flag recording whether the region is a full prism D×[z₀, z₁] of
/// even height, where integrality is guaranteed.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub struct Twist {
    pub value: Ratio<i64>,
    pub prism: bool,
}

impl Twist {
    pub fn integer(&self) -> Option<i64> {
        self.value.is_integer().then(|| self.value.to_integer())
    }
}

fn is_even_prism(r: &Region) -> bool {
    let Some((lo, hi)) = r.bounding_box() else { return true };
    if (hi.z - lo.z + 1) % 2 != 0 {
        return false;
    }
    let mut cols: BTreeMap<(i64, i64), usize> = BTreeMap::new();
    for c in r.cells() {
        *cols.entry((c.x, c.y)).or_default() += 1;
    }
    cols.values().all(|&k| k as i64 == hi.z - lo.z + 1)
}

/// Signed crossing sum over unordered pairs of orthogonal horizontal tiles stacked in a
/// common column. The sign is det(d_upper, d_lower) of the even→odd directions.
pub fn crossing_sum(t: &Tiling) -> i64 {
    let mut cols: HashMap<(i64, i64), Vec<(i64, Dir, CellCoord)>> = HashMap::new();
    for tile in t.tiles() {
        if !tile.dir.is_horizontal() {
            continue;
        }
        for c in [tile.even, tile.odd()] {
            cols.entry((c.x, c.y)).or_default().push((c.z, tile.dir, tile.even));
        }
    }
    let mut sum = 0;
    for list in cols.values() {
        for a in 0..list.len() {
            for b in a + 1..list.len() {
                let (za, da, _) = list[a];
                let (zb, db, _) = list[b];
                if za == zb || da.axis() == db.axis() {
                    continue;
                }
                let (up, low) = if za > zb { (da, db) } else { (db, da) };
                let (u, l) = (up.vector(), low.vector());
                sum += u.x * l.y - u.y * l.x;
            }
        }
    }
    sum
}

/// T(τ) = ¼ × signed crossing sum, oriented so `canonical_trit` raises it by one.
pub fn twist(t: &Tiling) -> Result<Twist> {
    if !t.region().is_open() {
        return Err(Error::InvalidRegion("twist needs a finite region".into()));
    }
    Ok(Twist { value: Ratio::new(crossing_sum(t), 4), prism: is_even_prism(t.region()) })
}

/// A trit inside box(3,3,2): the unit cube at the origin minus the corners (1,0,0) and
/// (0,1,1) carries the tiles (000,010), (110,111), (001,101), which the trit replaces by
/// (010,110), (111,101), (001,000).
pub fn canonical_trit() -> (Tiling, Move) {
    let c = CellCoord::new;
    let r = Arc::new(build_box(3, 3, 2).unwrap());
    let pairs = [
        (c(0, 0, 0), c(0, 1, 0)),
        (c(1, 1, 0), c(1, 1, 1)),
        (c(1, 0, 1), c(0, 0, 1)),
        (c(1, 0, 0), c(2, 0, 0)),
        (c(0, 1, 1), c(0, 2, 1)),
        (c(0, 2, 0), c(1, 2, 0)),
        (c(2, 1, 0), c(2, 2, 0)),
        (c(2, 0, 1), c(2, 1, 1)),
        (c(2, 2, 1), c(1, 2, 1)),
    ];
    let t = Tiling::from_pairs(r.clone(), &pairs).expect("canonical trit tiling");
    let tile = |a: CellCoord, b: CellCoord| {
        let d = Dir::from_vector(b - a).unwrap();
        if a.is_even() {
            Tile::new(a, d)
        } else {
            Tile::new(b, d.opposite())
        }
    };
    let mut removed = vec![tile(c(0, 0, 0), c(0, 1, 0)), tile(c(1, 1, 0), c(1, 1, 1)), tile(c(0, 0, 1), c(1, 0, 1))];
    let mut added = vec![tile(c(0, 1, 0), c(1, 1, 0)), tile(c(1, 1, 1), c(1, 0, 1)), tile(c(0, 0, 1), c(0, 0, 0))];
    removed.sort();
    added.sort();
    (t, Move { kind: MoveKind::Trit, removed, added })
}

/// One step of the loop-shift chain: start at a uniform odd cell, follow tiles from odd
/// cells and uniform non-tile edges from even cells until the path closes, then shift
/// the loop. A dead end leaves τ unchanged.
pub fn loop_shift_step<R: Rng>(t: &Tiling, rng: &mut R) -> Tiling {
    let r = t.region();
    let odds: Vec<usize> = (0..r.len()).filter(|&i| !r.is_even(i)).collect();
    if odds.is_empty() {
        return t.clone();
    }
    let start = odds[rng.gen_range(0..odds.len())];
    let mut pos: HashMap<usize, usize> = HashMap::new();
    // path of odd cells and the random edge that reached each of them (from the previous even)
    let mut path: Vec<(usize, Dir)> = Vec::new();
    let mut o = start;
    pos.insert(o, 0);
    let mut choices: Vec<Dir> = Vec::with_capacity(6);
    loop {
        let Some(d) = t.mate_dir_at(o) else { return t.clone() };
        let Some(e) = r.neighbor(o, d) else { return t.clone() };
        let back = d.opposite();
        choices.clear();
        choices.extend(Dir::ALL.into_iter().filter(|&x| x != back && r.neighbor(e, x).is_some()));
        if choices.is_empty() {
            return t.clone();
        }
        let c = choices[rng.gen_range(0..choices.len())];
        let o2 = r.neighbor(e, c).unwrap();
        path.push((e, c));
        if let Some(&k) = pos.get(&o2) {
            return shift_path(t, &path[k..]);
        }
        pos.insert(o2, path.len());
        o = o2;
    }
}

/// Replaces the tiles along a closed walk by its random edges: `loop_edges` lists
/// (even cell, chosen direction) in order.
fn shift_path(t: &Tiling, loop_edges: &[(usize, Dir)]) -> Tiling {
    let r = t.region_arc().clone();
    let mut mates = t.mates().to_vec();
    for &(e, c) in loop_edges {
        let o = r.neighbor(e, c).unwrap();
        mates[e] = Some(c);
        mates[o] = Some(c.opposite());
    }
    Tiling::from_mates(r, mates)
}

/// Random generator for chain `stream` under `seed`.
pub fn chain_rng(seed: u64, stream: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(stream);
    rng
}

/// Starting tiling used by the sampler.
pub fn initial_tiling(region: &Arc<Region>) -> Result<Tiling> {
    find_matching(region, &[])?.tiling().ok_or(Error::Untileable)
}

pub fn sample_uniform(region: &Arc<Region>, steps: u64, seed: u64) -> Result<Tiling> {
    let mut t = initial_tiling(region)?;
    let mut rng = chain_rng(seed, 0);
    for _ in 0..steps {
        t = loop_shift_step(&t, &mut rng);
    }
    Ok(t)
}

/// Runs the chain and calls `visit` on the state after every `every` steps.
pub fn run_chain(start: &Tiling, steps: u64, every: u64, rng: &mut impl Rng, mut visit: impl FnMut(&Tiling)) -> Tiling {
    let mut t = start.clone();
    for k in 1..=steps {
        t = loop_shift_step(&t, rng);
        if every > 0 && k % every == 0 {
            visit(&t);
        }
    }
    t
}

/// Every tiling of a region, by depth-first search on the first uncovered cell.
pub fn enumerate_tilings(region: &Arc<Region>, budget: usize) -> Result<Vec<Tiling>> {
    let r = &**region;
    let mut mates = vec![None; r.len()];
    let mut out = Vec::new();
    fn rec(r: &Region, i: usize, mates: &mut Vec<Option<Dir>>, out: &mut Vec<Vec<Option<Dir>>>, budget: usize) -> bool {
        let mut i = i;
        while i < r.len() && mates[i].is_some() {
            i += 1;
        }
        if i == r.len() {
            out.push(mates.clone());
            return out.len() <= budget;
        }
        for d in Dir::ALL {
            let Some(j) = r.neighbor(i, d) else { continue };
            if j == i || mates[j].is_some() {
                continue;
            }
            mates[i] = Some(d);
            mates[j] = Some(d.opposite());
            let ok = rec(r, i + 1, mates, out, budget);
            mates[i] = None;
            mates[j] = None;
            if !ok {
                return false;
            }
        }
        true
    }
    let mut raw = Vec::new();
    if !rec(r, 0, &mut mates, &mut raw, budget) {
        return Err(Error::BudgetExceeded(format!("more than {budget} tilings")));
    }
    for m in raw {
        out.push(Tiling::from_mates(region.clone(), m));
    }
    Ok(out)
}

#[derive(Clone, Debug)]
pub struct TilingGraph {
    pub tilings: Vec<Tiling>,
    pub component: Vec<usize>,
    pub components: Vec<Vec<usize>>,
}

impl TilingGraph {
    pub fn component_of(&self, t: &Tiling) -> Option<usize> {
        self.tilings.iter().position(|x| x == t).map(|i| self.component[i])
    }
}

/// Components of the tiling graph of `region` under the given move kinds.
pub fn connectivity(region: &Arc<Region>, moves: &[MoveKind], budget: usize) -> Result<TilingGraph> {
    let tilings = enumerate_tilings(region, budget)?;
    let index: HashMap<Vec<Option<Dir>>, usize> =
        tilings.iter().enumerate().map(|(i, t)| (t.mates().to_vec(), i)).collect();
    let mut component = vec![usize::MAX; tilings.len()];
    let mut components = Vec::new();
    for s in 0..tilings.len() {
        if component[s] != usize::MAX {
            continue;
        }
        let id = components.len();
        let mut members = vec![s];
        component[s] = id;
        let mut queue = VecDeque::from([s]);
        while let Some(u) = queue.pop_front() {
            let t = &tilings[u];
            let mut mv = Vec::new();
            if moves.contains(&MoveKind::Flip) {
                mv.extend(find_flips(t));
            }
            if moves.contains(&MoveKind::Trit) {
                mv.extend(find_trits(t));
            }
            for m in mv {
                let n = apply(t, &m)?;
                let v = index[n.mates()];
                if component[v] == usize::MAX {
                    component[v] = id;
                    members.push(v);
                    queue.push_back(v);
                }
            }
        }
        members.sort_unstable();
        components.push(members);
    }
    Ok(TilingGraph { tilings, component, components })
}

/// Flip-free tilings of box(3,3,2).
pub fn hopfions() -> Vec<Tiling> {
    let r = Arc::new(build_box(3, 3, 2).unwrap());
    enumerate_tilings(&r, 10_000)
        .unwrap()
        .into_iter()
        .filter(|t| find_flips(t).is_empty())
        .collect()
}

/// Exact transition probabilities P(τ, ·) of the loop-shift chain, by enumerating
/// every walk.
pub fn transition_row(t: &Tiling) -> HashMap<Vec<Option<Dir>>, BigRational> {
    let r = t.region();
    let odds: Vec<usize> = (0..r.len()).filter(|&i| !r.is_even(i)).collect();
    let mut row: HashMap<Vec<Option<Dir>>, BigRational> = HashMap::new();
    if odds.is_empty() {
        row.insert(t.mates().to_vec(), BigRational::one());
        return row;
    }
    let start_p = BigRational::new(BigInt::one(), BigInt::from(odds.len()));
    struct Walk<'a> {
        t: &'a Tiling,
        row: &'a mut HashMap<Vec<Option<Dir>>, BigRational>,
    }
    fn go(w: &mut Walk, o: usize, path: &mut Vec<(usize, Dir)>, pos: &mut HashMap<usize, usize>, p: BigRational) {
        let t = w.t;
        let r = t.region();
        let finish = |w: &mut Walk, state: Vec<Option<Dir>>, p: BigRational| {
            *w.row.entry(state).or_insert_with(BigRational::zero) += p;
        };
        let Some(d) = t.mate_dir_at(o) else { return finish(w, t.mates().to_vec(), p) };
        let Some(e) = r.neighbor(o, d) else { return finish(w, t.mates().to_vec(), p) };
        let back = d.opposite();
        let choices: Vec<Dir> = Dir::ALL.into_iter().filter(|&x| x != back && r.neighbor(e, x).is_some()).collect();
        if choices.is_empty() {
            return finish(w, t.mates().to_vec(), p);
        }
        let q = p / BigInt::from(choices.len());
        for c in choices {
            let o2 = r.neighbor(e, c).unwrap();
            path.push((e, c));
            if let Some(&k) = pos.get(&o2) {
                let s = shift_path(t, &path[k..]);
                finish(w, s.mates().to_vec(), q.clone());
            } else {
                pos.insert(o2, path.len());
                go(w, o2, path, pos, q.clone());
                pos.remove(&o2);
            }
            path.pop();
        }
    }
    let mut w = Walk { t, row: &mut row };
    for &o in &odds {
        let mut pos = HashMap::from([(o, 0usize)]);
        go(&mut w, o, &mut Vec::new(), &mut pos, start_p.clone());
    }
    row
}

/// Exact transition matrix over `tilings` (rows sum to one when the list is complete).
pub fn transition_matrix(tilings: &[Tiling]) -> Vec<Vec<BigRational>> {
    let index: HashMap<Vec<Option<Dir>>, usize> =
        tilings.iter().enumerate().map(|(i, t)| (t.mates().to_vec(), i)).collect();
    tilings
        .iter()
        .map(|t| {
            let mut v = vec![BigRational::zero(); tilings.len()];
            for (k, p) in transition_row(t) {
                v[index[&k]] += p;
            }
            v
        })
        .collect()
}

/// Sequence of tilings from `from` to `to`, each obtained from the previous one by
/// shifting a single alternating cycle of the superposition.
pub fn loop_shift_path(from: &Tiling, to: &Tiling) -> Result<Vec<Tiling>> {
    let cfg = superpose(from, to)?;
    let mut out = vec![from.clone()];
    let mut cur = from.clone();
    for c in &cfg.cycles {
        cur = shift_along(&cur, c, true);
        out.push(cur.clone());
    }
    Ok(out)
}

/// Applies a uniformly chosen move of the given kind, if any exists.
pub fn random_move(t: &Tiling, kind: MoveKind, rng: &mut impl Rng) -> Option<(Move, Tiling)> {
    let moves = match kind {
        MoveKind::Flip => find_flips(t),
        MoveKind::Trit => find_trits(t),
        MoveKind::LoopShift => return None,
    };
    if moves.is_empty() {
        return None;
    }
    let m = moves[rng.gen_range(0..moves.len())].clone();
    let n = apply(t, &m).ok()?;
    Some((m, n))
}
