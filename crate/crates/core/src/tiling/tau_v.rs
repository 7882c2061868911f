//! Periodic tilings of prescribed rational mean current, built from stacked lozenge
//! brickworks and thinned against the −η₁ brickwork.

use num_integer::Integer;
use num_rational::Ratio;
use num_traits::{One, Signed, Zero};

use super::PeriodicTiling;
use crate::error::{Error, Result};
use crate::lattice::{CellCoord, Dir};

type Q = Ratio<i64>;

/// Pattern offset on C₀ plus an even translation of the finished tiling.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub struct Phase {
    pub pattern_offset: i64,
    pub shift: CellCoord,
}

impl Phase {
    pub fn shifted(shift: CellCoord) -> Self {
        Phase { pattern_offset: 0, shift }
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct TauVWord {
    /// Point of ∂O with w₁ ≥ 0 on the ray from −η₁ through v.
    pub w: [Q; 3],
    /// Fraction of C₀ sites whose paths are kept.
    pub density: Q,
    /// Tile directions of consecutive slabs, one period.
    pub word: Vec<Dir>,
    /// Normal (1, σ₂, σ₃) of the slab planes.
    pub xi: CellCoord,
}

#[derive(Clone, Debug)]
pub struct TauV {
    pub tiling: PeriodicTiling,
    pub word: TauVWord,
}

fn sgn(q: &Q) -> i64 {
    if q.is_negative() {
        -1
    } else {
        1
    }
}

pub fn in_octahedron(v: &[Q; 3]) -> bool {
    v[0].abs() + v[1].abs() + v[2].abs() <= Q::one()
}

pub fn tau_v_word(v: [Q; 3]) -> Result<TauVWord> {
    if !in_octahedron(&v) {
        return Err(Error::BadMeanCurrent(format!("{v:?} is outside O")));
    }
    let one = Q::one();
    let two = Q::from(2);
    let weight_ref = (one - v[0] - v[1].abs() - v[2].abs()) / two;
    let density = one - weight_ref;
    if density.is_zero() {
        return Err(Error::BadMeanCurrent("v = -η₁ is the reference brickwork itself".into()));
    }
    let w = [(v[0] + weight_ref) / density, v[1] / density, v[2] / density];
    let s2 = sgn(&v[1]);
    let s3 = sgn(&v[2]);
    let r = w.iter().fold(1i64, |acc, q| acc.lcm(q.denom()));
    let counts: Vec<i64> = w.iter().map(|q| (q.abs() * Q::from(r)).to_integer()).collect();
    let mut word = Vec::with_capacity(r as usize);
    for (axis, (&c, s)) in counts.iter().zip([1, s2, s3]).enumerate() {
        for _ in 0..c {
            word.push(Dir::along(axis, s));
        }
    }
    debug_assert_eq!(word.len() as i64, r);
    Ok(TauVWord { w, density, word, xi: CellCoord::new(1, s2, s3) })
}

struct Builder<'a> {
    w: &'a TauVWord,
    r: i64,
    partial: Vec<CellCoord>,
    full: CellCoord,
    p: i64,
    q: i64,
    offset: i64,
}

impl Builder<'_> {
    fn slab(&self, c: CellCoord) -> i64 {
        self.w.xi.dot(c).div_euclid(2)
    }

    fn letter(&self, k: i64) -> Dir {
        self.w.word[k.rem_euclid(self.r) as usize]
    }

    /// C₀ site of the path through even cell `y`.
    fn site(&self, y: CellCoord) -> CellCoord {
        let k = self.slab(y);
        let (n, m) = (k.div_euclid(self.r), k.rem_euclid(self.r));
        y - self.full.scale(n) - self.partial[m as usize]
    }

    fn kept(&self, site: CellCoord) -> bool {
        (site.z + self.offset).rem_euclid(self.q) < self.p
    }

    fn even_dir(&self, y: CellCoord) -> Dir {
        if self.kept(self.site(y)) {
            self.letter(self.slab(y))
        } else {
            Dir::XNeg
        }
    }

    fn dir(&self, c: CellCoord) -> Dir {
        if c.is_even() {
            return self.even_dir(c);
        }
        let up = c.step(Dir::XPos);
        if self.even_dir(up) == Dir::XNeg {
            Dir::XPos
        } else {
            self.letter(self.slab(c)).opposite()
        }
    }
}

/// The periodic tiling τ_v.
pub fn tau_v(v: [Q; 3], phase: Phase) -> Result<TauV> {
    if !phase.shift.is_even() {
        return Err(Error::OutOfRange("phase shift must be an even vector".into()));
    }
    let word = tau_v_word(v)?;
    let r = word.word.len() as i64;
    let mut partial = vec![CellCoord::ORIGIN];
    for &d in &word.word {
        let last = *partial.last().unwrap();
        partial.push(last + d.vector() + Dir::XPos.vector());
    }
    let full = partial.pop().unwrap();
    let b = Builder {
        w: &word,
        r,
        partial,
        full,
        p: *word.density.numer(),
        q: *word.density.denom(),
        offset: phase.pattern_offset,
    };
    let mut dims = [0i64; 3];
    for (axis, dim) in dims.iter_mut().enumerate() {
        *dim = period_along(&b, axis).ok_or_else(|| {
            Error::BudgetExceeded(format!("no period along axis {axis} for v = {v:?}"))
        })?;
    }
    let base = PeriodicTiling::from_fn(dims, |c| b.dir(c))?;
    let tiling = if phase.shift == CellCoord::ORIGIN { base } else { base.translate(phase.shift) };
    Ok(TauV { tiling, word })
}

fn period_along(b: &Builder<'_>, axis: usize) -> Option<i64> {
    let xi = b.w.xi.get(axis);
    let limit = 4 * b.r * b.q + 4;
    (1..=limit).map(|h| 2 * h).find(|&len| {
        let shift = xi * len;
        if shift.rem_euclid(2 * b.r) != 0 {
            return false;
        }
        let m = shift / (2 * b.r);
        let mut t = CellCoord::ORIGIN;
        t.set(axis, len);
        let residual = t - b.full.scale(m);
        residual.z.rem_euclid(b.q) == 0
    })
}
