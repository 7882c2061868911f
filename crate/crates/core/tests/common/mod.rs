//! Independent oracles shared by the integration tests.
#![allow(dead_code)]

use std::collections::HashMap;
use std::f64::consts::PI;
use std::sync::Arc;

use dimerlab::tileability::{find_matching, MatchOutcome};
use dimerlab::{CellCoord, Dir, Region};

/// Perfect matchings of a cell set by plain backtracking. On a torus the six
/// directions are distinct edges, so a side of length 2 gives a double edge.
pub fn naive_count(cells: &[CellCoord], torus: Option<[i64; 3]>) -> u64 {
    let index: HashMap<CellCoord, usize> = cells.iter().enumerate().map(|(i, &c)| (c, i)).collect();
    let nbr = |c: CellCoord, d: Dir| -> Option<usize> {
        let mut n = c.step(d);
        if let Some(dims) = torus {
            n = CellCoord::new(n.x.rem_euclid(dims[0]), n.y.rem_euclid(dims[1]), n.z.rem_euclid(dims[2]));
        }
        index.get(&n).copied()
    };
    fn go(i0: usize, cells: &[CellCoord], used: &mut [bool], nbr: &dyn Fn(CellCoord, Dir) -> Option<usize>) -> u64 {
        let Some(i) = (i0..cells.len()).find(|&k| !used[k]) else { return 1 };
        used[i] = true;
        let mut total = 0;
        for d in Dir::ALL {
            if let Some(j) = nbr(cells[i], d) {
                if !used[j] && j != i {
                    used[j] = true;
                    total += go(i + 1, cells, used, nbr);
                    used[j] = false;
                }
            }
        }
        used[i] = false;
        total
    }
    let mut used = vec![false; cells.len()];
    go(0, cells, &mut used, &nbr)
}

pub fn naive_tileable(cells: &[CellCoord]) -> bool {
    if cells.len() % 2 == 1 {
        return false;
    }
    let index: HashMap<CellCoord, usize> = cells.iter().enumerate().map(|(i, &c)| (c, i)).collect();
    fn go(cells: &[CellCoord], used: &mut [bool], index: &HashMap<CellCoord, usize>) -> bool {
        let Some(i) = (0..cells.len()).find(|&k| !used[k]) else { return true };
        used[i] = true;
        for d in Dir::ALL {
            if let Some(&j) = index.get(&cells[i].step(d)) {
                if !used[j] {
                    used[j] = true;
                    if go(cells, used, index) {
                        return true;
                    }
                    used[j] = false;
                }
            }
        }
        used[i] = false;
        false
    }
    let mut used = vec![false; cells.len()];
    go(cells, &mut used, &index)
}

pub fn box_cells(a: i64, b: i64, c: i64) -> Vec<CellCoord> {
    let mut v = Vec::new();
    for x in 0..a {
        for y in 0..b {
            for z in 0..c {
                v.push(CellCoord::new(x, y, z));
            }
        }
    }
    v
}

/// Double-exponential quadrature of f over [a, b]; handles integrable endpoint singularities.
pub fn tanh_sinh(f: impl Fn(f64) -> f64, a: f64, b: f64) -> f64 {
    let half = 0.5 * (b - a);
    let mut prev = f64::NAN;
    let mut h = 0.5;
    loop {
        let mut sum = 0.0;
        let mut k: i64 = -((6.0 / h) as i64);
        while (k as f64) * h <= 6.0 {
            let t = k as f64 * h;
            let u = 0.5 * PI * t.sinh();
            let x = u.tanh();
            let w = 0.5 * PI * t.cosh() / u.cosh().powi(2);
            // distance to the nearer endpoint, computed without cancellation
            let gap = half / (u.abs().exp() * u.abs().cosh());
            let xv = if x < 0.0 { a + gap } else { b - gap };
            if gap > 0.0 && w > 0.0 && xv > a && xv < b {
                let fx = f(xv);
                if fx.is_finite() {
                    sum += w * fx;
                }
            }
            k += 1;
        }
        let est = half * h * sum;
        if (est - prev).abs() < 1e-14 * est.abs().max(1.0) || h < 1.0 / 512.0 {
            return est;
        }
        prev = est;
        h /= 2.0;
    }
}

/// L(θ) = −∫₀^θ ln(2 sin x) dx by direct quadrature of the defining integral.
pub fn lobachevsky_oracle(theta: f64) -> f64 {
    if theta == 0.0 {
        return 0.0;
    }
    -tanh_sinh(|x| (2.0 * x.sin()).ln(), 0.0, theta)
}

pub const CATALAN: f64 = 0.915_965_594_177_219_015_054_603_514_932_384_110_774;

/// Σ (obs − exp)²/exp with equal expected counts.
pub fn chi_square_uniform(counts: &[u64]) -> f64 {
    let n: u64 = counts.iter().sum();
    let e = n as f64 / counts.len() as f64;
    counts.iter().map(|&c| (c as f64 - e).powi(2) / e).sum()
}

/// Runs the matcher on every nonempty subset of a box against backtracking; returns
/// (tileable, certified) counts.
pub fn exhaustive_subsets(a: i64, b: i64, c: i64) -> (usize, usize) {
    let all = box_cells(a, b, c);
    let mut tileable = 0;
    let mut certified = 0;
    for mask in 1u32..(1 << all.len()) {
        let cells: Vec<CellCoord> = (0..all.len()).filter(|&i| mask >> i & 1 == 1).map(|i| all[i]).collect();
        let want = naive_tileable(&cells);
        let r = Arc::new(Region::open(cells));
        match find_matching(&r, &[]).unwrap() {
            MatchOutcome::Tiling(t) => {
                assert!(want, "matcher tiled an untileable region {:?}", r.cells());
                assert!(t.is_valid());
                tileable += 1;
            }
            MatchOutcome::Certificate { cert, region } => {
                assert!(!want, "matcher missed a tiling of {:?}", r.cells());
                cert.check(&region).unwrap();
                certified += 1;
            }
        }
    }
    (tileable, certified)
}
