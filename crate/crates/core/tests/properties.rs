use std::collections::HashSet;
use std::sync::Arc;

use dimerlab::doubledimer::{chain_swap, edge_multiset, slope_statistics, superpose, total_winding};
use dimerlab::dynamics::{apply, find_flips, find_trits, loop_shift_path, random_move, sample_uniform, twist, MoveKind};
use dimerlab::entropy::ent_boundary;
use dimerlab::flowcalc::{divergence, mean_current, mean_current_of, tiling_flow, winding, winding_at};
use dimerlab::lattice::{boundary_surface, build_box};
use dimerlab::tileability::{find_matching, max_matching, patch, MatchOutcome, PatchOutcome};
use dimerlab::tiling::{glue_halfspaces, tau_v, GluePlane, Phase};
use dimerlab::transport::{w11, Atom, SignedPointMeasure};
use dimerlab::{CellCoord, Dir, Error, Rational, Region, Tiling};
use num_traits::{Signed, Zero};
use proptest::prelude::*;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

fn cfg(cases: u32) -> ProptestConfig {
    ProptestConfig { cases, ..ProptestConfig::default() }
}

fn cell() -> impl Strategy<Value = CellCoord> {
    (0i64..4, 0i64..4, 0i64..3).prop_map(|(x, y, z)| CellCoord::new(x, y, z))
}

fn cell_set() -> impl Strategy<Value = Vec<CellCoord>> {
    prop::collection::btree_set(cell(), 1..30).prop_map(|s| s.into_iter().collect())
}

/// Rational v in O other than −η₁, with small denominators.
fn octahedron_point() -> impl Strategy<Value = [Rational; 3]> {
    (1i64..=6, -6i64..=6, -6i64..=6, -6i64..=6)
        .prop_filter("inside O", |(q, a, b, c)| a.abs() + b.abs() + c.abs() <= *q && !(*a == -*q))
        .prop_map(|(q, a, b, c)| [Rational::new(a, q), Rational::new(b, q), Rational::new(c, q)])
}

fn sampled(dims: (i64, i64, i64), seed: u64) -> Tiling {
    let r = Arc::new(build_box(dims.0, dims.1, dims.2).unwrap());
    sample_uniform(&r, 200, seed).unwrap()
}

fn sampled_torus(dims: [i64; 3], seed: u64) -> Tiling {
    let r = Arc::new(Region::torus(dims).unwrap());
    sample_uniform(&r, 300, seed).unwrap()
}

proptest! {
    #![proptest_config(cfg(64))]

    #[test]
    fn surface_colors_count_imbalance(cells in cell_set()) {
        let r = Region::open(cells.clone());
        let (w, b) = boundary_surface(&r, &cells).color_counts();
        let imb = r.even_count() as i64 - r.odd_count() as i64;
        prop_assert_eq!(w as i64 - b as i64, 6 * imb);
        prop_assert_eq!(boundary_surface(&r, &cells), boundary_surface(&r, &cells));
    }

    #[test]
    fn degrees(cells in cell_set(), d in (1i64..4, 1i64..4, 1i64..4)) {
        let r = Region::open(cells);
        prop_assert!((0..r.len()).all(|i| r.degree(i) <= 6));
        let t = Region::torus([2 * d.0, 2 * d.1, 2 * d.2]).unwrap();
        prop_assert!((0..t.len()).all(|i| t.degree(i) == 6));
    }

    #[test]
    fn tau_v_mean_current_is_exact(v in octahedron_point()) {
        let t = tau_v(v, Phase::default()).unwrap();
        prop_assert_eq!(t.tiling.mean_current(), v);
    }

    #[test]
    fn tiling_json_round_trip(seed in any::<u64>(), dims in (1i64..4, 2i64..4, 2i64..4)) {
        let t = sampled((dims.0, dims.1, 2 * (dims.2 / 2)), seed);
        prop_assert_eq!(Tiling::from_json(&t.to_json()).unwrap(), t.clone());
        let u = sampled_torus([2, 4, 2], seed);
        prop_assert_eq!(Tiling::from_json(&u.to_json()).unwrap(), u);
    }

    #[test]
    fn flows_are_divergence_free(seed in any::<u64>()) {
        let t = sampled((4, 4, 4), seed);
        let f = tiling_flow::<Rational>(&t);
        let mut interior = 0;
        for &c in t.region().cells() {
            match divergence(&f, c) {
                Ok(d) => {
                    prop_assert!(d.is_zero());
                    interior += 1;
                }
                Err(Error::PartialStencil(_)) => {}
                Err(e) => return Err(TestCaseError::fail(e.to_string())),
            }
        }
        prop_assert_eq!(interior, 8);
    }

    #[test]
    fn winding_is_layer_independent(seed in any::<u64>()) {
        let t = sampled_torus([4, 4, 2], seed);
        let dims = [4, 4, 2];
        for axis in 0..3 {
            let a = winding_at(&t, axis, 0).unwrap();
            for layer in 1..dims[axis] {
                prop_assert_eq!(winding_at(&t, axis, layer).unwrap(), a);
            }
        }
    }

    #[test]
    fn mean_current_is_additive(seed in any::<u64>(), cut in 1i64..4) {
        let t = sampled((4, 4, 2), seed);
        let (a, b): (Vec<CellCoord>, Vec<CellCoord>) = t.region().cells().iter().partition(|c| c.x < cut);
        let whole = mean_current(&t, t.region()).unwrap();
        let ma = mean_current_of(&t, &a).unwrap();
        let mb = mean_current_of(&t, &b).unwrap();
        let ea = a.iter().filter(|c| c.is_even()).count() as i64;
        let eb = b.iter().filter(|c| c.is_even()).count() as i64;
        for i in 0..3 {
            let avg = (ma.s[i] * ea + mb.s[i] * eb) / Rational::from(ea + eb);
            prop_assert_eq!(avg, whole.s[i]);
        }
    }

    #[test]
    fn local_moves_keep_winding(seed in any::<u64>()) {
        let mut t = sampled_torus([4, 4, 4], seed);
        let a = winding(&t).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        for k in 0..20 {
            let kind = if k % 2 == 0 { MoveKind::Flip } else { MoveKind::Trit };
            if let Some((_, u)) = random_move(&t, kind, &mut rng) {
                t = u;
                prop_assert_eq!(winding(&t).unwrap(), a);
            }
        }
    }

    #[test]
    fn matcher_is_sound(cells in cell_set()) {
        let r = Arc::new(Region::open(cells));
        match find_matching(&r, &[]).unwrap() {
            MatchOutcome::Tiling(t) => prop_assert!(t.is_valid()),
            MatchOutcome::Certificate { cert, region } => {
                prop_assert!(cert.check(&region).is_ok());
                prop_assert!(cert.imbalance > 0);
                prop_assert_eq!(6 * cert.imbalance, cert.white as i64 - cert.black as i64);
            }
        }
    }

    #[test]
    fn matching_size_is_side_independent(cells in cell_set()) {
        let r = Region::open(cells);
        let size = |m: Vec<Option<Dir>>| m.iter().filter(|x| x.is_some()).count();
        prop_assert_eq!(size(max_matching(&r, true, None)), size(max_matching(&r, false, None)));
    }

    #[test]
    fn moves_preserve_cells_and_twist_laws(seed in any::<u64>()) {
        let t = sampled((3, 3, 4), seed);
        let cells: HashSet<CellCoord> = t.region().cells().iter().copied().collect();
        let tw = twist(&t).unwrap().value;
        for m in find_flips(&t).into_iter().chain(find_trits(&t)) {
            let u = apply(&t, &m).unwrap();
            prop_assert!(u.is_valid());
            let covered: HashSet<CellCoord> = u.tiles().iter().flat_map(|x| [x.even, x.odd()]).collect();
            prop_assert_eq!(&covered, &cells);
            let d = twist(&u).unwrap().value - tw;
            match m.kind {
                MoveKind::Flip => prop_assert!(d.is_zero()),
                _ => prop_assert_eq!(d.abs(), Rational::from(1)),
            }
        }
    }

    #[test]
    fn loop_shifts_connect(s1 in any::<u64>(), s2 in any::<u64>()) {
        let a = sampled((2, 3, 4), s1);
        let b = sampled((2, 3, 4), s2);
        let path = loop_shift_path(&a, &b).unwrap();
        prop_assert_eq!(path.last().unwrap_or(&a), &b);
        prop_assert!(path.iter().all(Tiling::is_valid));
    }
}

proptest! {
    #![proptest_config(cfg(24))]

    #[test]
    fn glue_halves_match_inputs(v in octahedron_point(), shift in (0i64..3, 0i64..3, 0i64..3)) {
        let left = tau_v(v, Phase::default()).unwrap().tiling;
        let sh = CellCoord::new(2 * shift.0, 2 * shift.1, 2 * shift.2);
        let right = left.translate(sh);
        let plane = GluePlane::axis(0, 0);
        let Ok(g) = glue_halfspaces(&left, &right, plane, 24) else { return Ok(()) };
        let slab = &g.slab;
        for (i, &c) in slab.region().cells().iter().enumerate() {
            for d in Dir::ALL {
                let nb = c.step(d);
                let h = nb.x;
                let owner = if h < 0 { &left } else if h >= g.gap { &right } else { continue };
                prop_assert_eq!(owner.at(nb) == d.opposite(), slab.mate_dir_at(i) == Some(d));
            }
        }
    }

    #[test]
    fn patch_collars_match_inputs(v in octahedron_point(), shift in (0i64..3, 0i64..3, 0i64..3)) {
        let outer = tau_v(v, Phase::default()).unwrap().tiling;
        let inner = outer.translate(CellCoord::new(2 * shift.0, 2 * shift.1, 2 * shift.2));
        let (n, m) = (6, 3);
        let PatchOutcome::Tiling(t) = patch(&outer, &inner, n, 0.5).unwrap() else { return Ok(()) };
        let inb = |c: CellCoord, k: i64| c.x.abs() <= k && c.y.abs() <= k && c.z.abs() <= k;
        for (i, &c) in t.region().cells().iter().enumerate() {
            let mine = t.mate_dir_at(i).unwrap();
            let o = outer.at(c);
            prop_assert_eq!(!inb(c.step(o), n), !inb(c.step(mine), n) && mine == o);
            let q = inner.at(c);
            prop_assert_eq!(inb(c.step(q), m), inb(c.step(mine), m) && mine == q);
        }
    }

    #[test]
    fn swap_conserves(s1 in any::<u64>(), s2 in any::<u64>(), p in 0.0f64..=1.0, seed in any::<u64>()) {
        let a = sampled_torus([4, 4, 2], s1);
        let b = sampled_torus([4, 4, 2], s2);
        let res = chain_swap(&a, &b, p, seed).unwrap();
        prop_assert_eq!(edge_multiset(&a, &b), edge_multiset(&res.t1, &res.t2));
        let (wa, wb) = (winding(&a).unwrap(), winding(&b).unwrap());
        let (wa2, wb2) = (winding(&res.t1).unwrap(), winding(&res.t2).unwrap());
        for i in 0..3 {
            prop_assert_eq!(wa[i] + wb[i], wa2[i] + wb2[i]);
        }
        let cfg = superpose(&a, &b).unwrap();
        let tw = total_winding(&cfg);
        for i in 0..3 {
            prop_assert_eq!(tw[i], wa[i] - wb[i]);
        }
        let mut on_swapped: HashSet<CellCoord> = HashSet::new();
        for &k in &res.swapped {
            let g = &cfg.cycles[k];
            prop_assert!(g.is_winding());
            for t in g.tau1_tiles() {
                on_swapped.insert(t.even);
                on_swapped.insert(a.region().reduce(t.odd()));
            }
        }
        for (i, &c) in a.region().cells().iter().enumerate() {
            if res.t1.mate_dir_at(i) != a.mate_dir_at(i) {
                prop_assert!(on_swapped.contains(&c));
            }
        }
    }

    #[test]
    fn contractible_cycles_carry_no_current(s1 in any::<u64>(), s2 in any::<u64>()) {
        let a = sampled_torus([4, 4, 2], s1);
        let b = sampled_torus([4, 4, 2], s2);
        let cfg = superpose(&a, &b).unwrap();
        for g in cfg.cycles.iter().filter(|g| !g.is_winding()) {
            prop_assert_eq!(g.displacement, [0, 0, 0]);
        }
        let stats = slope_statistics(&cfg);
        let sa = mean_current(&a, a.region()).unwrap();
        let sb = mean_current(&b, b.region()).unwrap();
        for i in 0..3 {
            prop_assert_eq!(stats.weighted_mean[i], sa.s[i] - sb.s[i]);
        }
    }

    #[test]
    fn boundary_entropy_is_concave(a in 0u32..=60, b in 0u32..=60, c in 0u32..=60, d in 0u32..=60) {
        let face = |x: u32, y: u32| {
            let (x, y) = (x.min(60), y.min(60 - x.min(60)));
            [Rational::new(x as i64, 60), Rational::new(y as i64, 60), Rational::new(60 - x as i64 - y as i64, 60)]
        };
        let s1 = face(a, b);
        let s2 = face(c, d);
        let mid = [0, 1, 2].map(|i| (s1[i] + s2[i]) / 2);
        let e = |s: [Rational; 3]| ent_boundary(s).unwrap().value;
        let gap = e(mid) - (e(s1) + e(s2)) / 2.0;
        prop_assert!(gap >= -1e-12);
        let interior = mid.iter().all(|x| x.is_positive());
        if s1 != s2 && interior {
            prop_assert!(gap > 0.0);
        }
    }
}

fn measure() -> impl Strategy<Value = SignedPointMeasure<f64>> {
    prop::collection::vec(((0i32..12, 0i32..12, 0i32..12), -64i32..=64), 0..8).prop_map(|v| {
        SignedPointMeasure::new(
            v.into_iter()
                .filter(|(_, w)| *w != 0)
                .map(|((x, y, z), w)| Atom { point: [x as f64 / 4.0, y as f64 / 4.0, z as f64 / 4.0], weight: w as f64 / 16.0 })
                .collect(),
        )
    })
}

proptest! {
    #![proptest_config(cfg(128))]

    #[test]
    fn w11_is_a_metric(a in measure(), b in measure(), c in measure()) {
        let s = 1e6;
        let ab = w11(&a, &b, s).unwrap();
        prop_assert_eq!(ab, w11(&b, &a, s).unwrap());
        prop_assert!(ab >= 0.0);
        prop_assert_eq!(w11(&a, &a, s).unwrap(), 0.0);
        let ac = w11(&a, &c, s).unwrap();
        let cb = w11(&c, &b, s).unwrap();
        prop_assert!(ab <= ac + cb + 1e-9);
        prop_assert!(ab <= a.total_variation() + b.total_variation() + 1e-12);
        let diff = a.plus(&b.negated());
        if diff.total_variation() > 0.0 {
            let netted: f64 = {
                let mut m = std::collections::BTreeMap::new();
                for at in &diff.atoms {
                    *m.entry(at.point.map(f64::to_bits)).or_insert(0.0) += at.weight;
                }
                m.values().map(|w: &f64| w.abs()).sum()
            };
            if netted > 0.0 {
                prop_assert!(ab > 0.0);
            }
        }
    }

    #[test]
    fn w11_mass_shift(a in measure(), b in measure(), c in measure()) {
        let s = 1e6;
        prop_assert_eq!(w11(&a.plus(&c), &b.plus(&c), s).unwrap(), w11(&a, &b, s).unwrap());
    }

    #[test]
    fn w11_translation(a in measure(), b in measure(), t in (-8i32..8, -8i32..8, -8i32..8)) {
        let s = 1e6;
        let v = [t.0 as f64 / 4.0, t.1 as f64 / 4.0, t.2 as f64 / 4.0];
        let d0 = w11(&a, &b, s).unwrap();
        let d1 = w11(&a.translated(v), &b.translated(v), s).unwrap();
        prop_assert!((d0 - d1).abs() < 1e-9);
    }
}
