//! Gluing two periodic tilings across a plane by tiling a periodic slab between them.

use std::sync::Arc;

use num_integer::Integer;
use num_rational::Ratio;

use super::{PeriodicTiling, Tile, Tiling};
use crate::error::{Error, Result};
use crate::lattice::{CellCoord, Dir, PeriodLattice, Region};
use crate::tileability::{find_matching_seeded, MatchOutcome};

/// The plane ξ·x = offset − ½ with ξ a coordinate axis or (1, ±1, ±1). Cells with
/// ξ·x < offset belong to the left tiling.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct GluePlane {
    pub normal: CellCoord,
    pub offset: i64,
}

impl GluePlane {
    pub fn axis(axis: usize, offset: i64) -> Self {
        GluePlane { normal: Dir::along(axis, 1).vector(), offset }
    }

    pub fn diagonal(s2: i64, s3: i64, offset: i64) -> Self {
        GluePlane { normal: CellCoord::new(1, s2.signum(), s3.signum()), offset }
    }

    fn validate(&self) -> Result<()> {
        let n = self.normal;
        let coordinate = n.l1() == 1 && n.to_array().iter().all(|&a| a >= 0);
        let diagonal = n.x == 1 && n.y.abs() == 1 && n.z.abs() == 1;
        if coordinate || diagonal {
            Ok(())
        } else {
            Err(Error::OutOfRange(format!("unsupported gluing normal {n:?}")))
        }
    }
}

#[derive(Clone, Debug)]
pub struct GlueResult {
    pub gap: i64,
    /// Tiling of the slab region; its boundary tiles stick out into the two half-spaces.
    pub slab: Tiling,
}

fn flux_per_even(t: &PeriodicTiling, n: CellCoord) -> Ratio<i64> {
    let s = t.mean_current();
    s[0] * n.x + s[1] * n.y + s[2] * n.z
}

fn slab_region(plane: &GluePlane, period: i64, gap: i64) -> Result<Region> {
    let n = plane.normal;
    let mut cells = Vec::new();
    let basis;
    if n.l1() == 1 {
        let axis = (0..3).find(|&a| n.get(a) != 0).unwrap();
        let others: Vec<usize> = (0..3).filter(|&a| a != axis).collect();
        basis = others
            .iter()
            .map(|&a| {
                let mut v = CellCoord::ORIGIN;
                v.set(a, period);
                (a, v)
            })
            .collect();
        for t in plane.offset..plane.offset + gap {
            for u in 0..period {
                for w in 0..period {
                    let mut c = CellCoord::ORIGIN;
                    c.set(axis, t);
                    c.set(others[0], u);
                    c.set(others[1], w);
                    cells.push(c);
                }
            }
        }
    } else {
        basis = vec![
            (1, CellCoord::new(-n.y * period, period, 0)),
            (2, CellCoord::new(-n.z * period, 0, period)),
        ];
        for t in plane.offset..plane.offset + gap {
            for y in 0..period {
                for z in 0..period {
                    cells.push(CellCoord::new(t - n.y * y - n.z * z, y, z));
                }
            }
        }
    }
    Ok(Region::periodic(PeriodLattice::new(basis)?, cells))
}

/// Attempts the gluing at one slab width.
pub fn glue_with_gap(left: &PeriodicTiling, right: &PeriodicTiling, plane: GluePlane, gap: i64) -> Result<Option<GlueResult>> {
    plane.validate()?;
    if gap < 0 || gap % 2 != 0 {
        return Err(Error::OutOfRange(format!("gap must be a non-negative even integer, got {gap}")));
    }
    let fl = flux_per_even(left, plane.normal);
    let fr = flux_per_even(right, plane.normal);
    if fl != fr {
        return Err(Error::FluxMismatch { left: fl.to_string(), right: fr.to_string() });
    }
    let period = left.dims().iter().chain(right.dims().iter()).fold(2i64, |a, &b| a.lcm(&b));
    let region = Arc::new(slab_region(&plane, period, gap)?);
    let n = plane.normal;
    let side = |c: CellCoord| {
        let h = n.dot(c);
        if h < plane.offset {
            -1
        } else if h >= plane.offset + gap {
            1
        } else {
            0
        }
    };
    let mut fixed = Vec::new();
    for &c in region.cells() {
        let mut from = None;
        for d in Dir::ALL {
            let nb = c.step(d);
            let owner = match side(nb) {
                -1 => left,
                1 => right,
                _ => continue,
            };
            if owner.at(nb) == d.opposite() {
                if from.is_some() {
                    return Ok(None);
                }
                from = Some(d);
            }
        }
        if let Some(d) = from {
            fixed.push(if c.is_even() { Tile::new(c, d) } else { Tile::new(c.step(d), d.opposite()) });
        }
    }
    match find_matching_seeded(&region, &fixed, Some(left))? {
        MatchOutcome::Tiling(slab) => Ok(Some(GlueResult { gap, slab })),
        MatchOutcome::Certificate { .. } => Ok(None),
    }
}

/// Smallest even gap in 2..=gap_max at which the slab can be tiled.
pub fn glue_halfspaces(left: &PeriodicTiling, right: &PeriodicTiling, plane: GluePlane, gap_max: i64) -> Result<GlueResult> {
    for gap in (2..=gap_max).step_by(2) {
        if let Some(r) = glue_with_gap(left, right, plane, gap)? {
            return Ok(r);
        }
    }
    Err(Error::GapExhausted(gap_max))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::tiling::TilingMode;

    #[test]
    fn brickwork_to_itself() {
        let b = PeriodicTiling::brickwork(Dir::YPos);
        let g = glue_halfspaces(&b, &b, GluePlane::axis(0, 0), 8).unwrap();
        assert_eq!(g.gap, 2);
        assert!(g.slab.validate(TilingMode::FreeBoundary).is_empty());
        for (i, &c) in g.slab.region().cells().iter().enumerate() {
            assert_eq!(g.slab.mate_dir_at(i), Some(b.at(c)));
        }
    }

    #[test]
    fn opposite_brickworks_mismatch() {
        let a = PeriodicTiling::brickwork(Dir::XPos);
        let b = PeriodicTiling::brickwork(Dir::XNeg);
        assert!(matches!(
            glue_with_gap(&a, &b, GluePlane::axis(0, 0), 2),
            Err(Error::FluxMismatch { .. })
        ));
    }
}
