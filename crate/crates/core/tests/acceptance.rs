//! Acceptance criteria. Prints one PASS/FAIL line per criterion; exits nonzero when a
//! criterion fails that is not listed in `KNOWN_FAILURES` (see the README).

mod common;

use std::collections::HashMap;
use std::f64::consts::PI;
use std::sync::Arc;
use std::time::Instant;

use common::*;
use dimerlab::doubledimer::{chain_swap, edge_multiset, slope_statistics, superpose};
use dimerlab::dynamics::{
    chain_rng, connectivity, enumerate_tilings, hopfions, initial_tiling, random_move, run_chain, sample_uniform,
    transition_matrix, twist, MoveKind,
};
use dimerlab::entropy::{ent_boundary, slab_entropy};
use dimerlab::flowcalc::winding;
use dimerlab::lattice::build_box;
use dimerlab::tileability::{find_matching, patch, MatchOutcome, PatchOutcome};
use dimerlab::tiling::{brickwork, tau_v, tau_v_word, Phase};
use dimerlab::transport::{
    box_discrepancy_bound, constant_flow_measures, d_w, flow_to_component_measures, to_real3, w11, Atom, SignedPointMeasure,
};
use dimerlab::{CellCoord, Dir, PeriodicTiling, Rational, Region};
use num_integer::Integer;
use num_traits::{Signed, Zero};
use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use statrs::distribution::{ChiSquared, ContinuousCDF};

/// Criteria that fail for documented reasons.
const KNOWN_FAILURES: &[u32] = &[6];

struct Outcome {
    pass: bool,
    detail: String,
}

fn outcome(pass: bool, detail: impl Into<String>) -> Outcome {
    Outcome { pass, detail: detail.into() }
}

fn sampler_uniformity() -> Outcome {
    let t0 = Instant::now();
    let r = Arc::new(build_box(2, 2, 2).unwrap());
    let all = enumerate_tilings(&r, 100).unwrap();
    let index: HashMap<Vec<Option<Dir>>, usize> = all.iter().enumerate().map(|(i, t)| (t.mates().to_vec(), i)).collect();
    let mut counts = vec![0u64; all.len()];
    let mut rng = chain_rng(1, 0);
    run_chain(&initial_tiling(&r).unwrap(), 100_000, 10, &mut rng, |t| counts[index[t.mates()]] += 1);
    let n: u64 = counts.iter().sum();
    let tv = 0.5 * counts.iter().map(|&c| (c as f64 / n as f64 - 1.0 / all.len() as f64).abs()).sum::<f64>();
    let stat = chi_square_uniform(&counts);
    let p = 1.0 - ChiSquared::new((all.len() - 1) as f64).unwrap().cdf(stat);
    let secs = t0.elapsed().as_secs_f64();
    outcome(
        all.len() == 9 && tv < 0.05 && p > 0.001 && secs < 10.0,
        format!("{} tilings, TV {tv:.4}, chi2 {stat:.2} p {p:.3}, {secs:.2}s", all.len()),
    )
}

fn transition_symmetry() -> Outcome {
    let r = Arc::new(build_box(2, 2, 2).unwrap());
    let all = enumerate_tilings(&r, 100).unwrap();
    let p = transition_matrix(&all);
    let mut asym = 0;
    let mut nonzero = 0;
    for i in 0..all.len() {
        for j in 0..all.len() {
            if p[i][j] != p[j][i] {
                asym += 1;
            }
            if i != j && !p[i][j].is_zero() {
                nonzero += 1;
            }
        }
    }
    outcome(asym == 0 && nonzero > 0, format!("{} states, {nonzero} off-diagonal transitions, {asym} asymmetric pairs", all.len()))
}

fn twist_laws() -> Outcome {
    let t0 = Instant::now();
    let r = Arc::new(build_box(4, 4, 4).unwrap());
    let (mut flips, mut trits, mut bad) = (0, 0, 0);
    let mut seed = 0;
    while (flips < 1000 || trits < 1000) && seed < 200 {
        let mut t = sample_uniform(&r, 2000, seed).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(1000 + seed);
        for k in 0..100 {
            let kind = if k % 2 == 0 { MoveKind::Flip } else { MoveKind::Trit };
            let Some((_, u)) = random_move(&t, kind, &mut rng) else { continue };
            let d = twist(&u).unwrap().value - twist(&t).unwrap().value;
            match kind {
                MoveKind::Flip => {
                    flips += 1;
                    bad += usize::from(!d.is_zero());
                }
                _ => {
                    trits += 1;
                    bad += usize::from(d.abs() != Rational::from(1));
                }
            }
            t = u;
        }
        seed += 1;
    }
    let secs = t0.elapsed().as_secs_f64();
    outcome(
        flips >= 1000 && trits >= 1000 && bad == 0 && secs < 60.0,
        format!("{flips} flips, {trits} trits, {bad} violations, {secs:.1}s"),
    )
}

fn hopfion_rigidity() -> Outcome {
    let t0 = Instant::now();
    let r = Arc::new(build_box(3, 3, 2).unwrap());
    let flip = connectivity(&r, &[MoveKind::Flip], 10_000).unwrap();
    let both = connectivity(&r, &[MoveKind::Flip, MoveKind::Trit], 10_000).unwrap();
    let hs = hopfions();
    let singleton = hs.iter().all(|h| flip.components[flip.component_of(h).unwrap()].len() == 1);
    let tw: Vec<Rational> = hs.iter().map(|h| twist(h).unwrap().value).collect();
    let chiral = hs.len() == 2 && tw[0] == -tw[1] && !tw[0].is_zero();
    let mut sizes: Vec<usize> = flip.components.iter().map(Vec::len).collect();
    sizes.sort_unstable_by(|a, b| b.cmp(a));
    let secs = t0.elapsed().as_secs_f64();
    outcome(
        singleton && chiral && both.components.len() == 1 && secs < 300.0,
        format!(
            "{} tilings, flip components {sizes:?}, hopfion twists {}/{}, flip+trit components {}, {secs:.2}s",
            flip.tilings.len(),
            tw[0],
            tw[1],
            both.components.len()
        ),
    )
}

fn mutilated_box(rng: &mut ChaCha8Rng) -> Region {
    let (a, b, c) = (rng.gen_range(2..=5), rng.gen_range(2..=5), rng.gen_range(1..=4));
    let mut cells = box_cells(a, b, c);
    cells.shuffle(rng);
    let k = rng.gen_range(1..=6).min(cells.len() - 1);
    cells.truncate(cells.len() - k);
    Region::open(cells)
}

fn hall_certificates() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    let mut regions: Vec<Region> = (0..100).map(|_| mutilated_box(&mut rng)).collect();
    let isolated = [(0, 0, 0), (1, 0, 0), (2, 0, 0), (1, 2, 0)].map(|(x, y, z)| CellCoord::new(x, y, z));
    regions.push(Region::open(isolated));
    let (mut tiled, mut certified, mut bad) = (0, 0, 0);
    for r in regions {
        let r = Arc::new(r);
        match find_matching(&r, &[]).unwrap() {
            MatchOutcome::Tiling(t) => {
                tiled += 1;
                bad += usize::from(!t.is_valid());
            }
            MatchOutcome::Certificate { cert, region } => {
                certified += 1;
                bad += usize::from(cert.check(&region).is_err());
            }
        }
    }
    let mut exhaustive = 0;
    for (a, b, c) in [(2, 7, 1), (2, 2, 3), (3, 4, 1), (1, 3, 4)] {
        let (t, u) = exhaustive_subsets(a, b, c);
        exhaustive += t + u;
    }
    outcome(
        bad == 0,
        format!("{tiled} tiled, {certified} certified, {bad} invalid; {exhaustive} subsets of <= 14 cells agree with backtracking"),
    )
}

fn patching() -> Outcome {
    let third = [Rational::new(1, 3); 3];
    let inner = tau_v(third, Phase::default()).unwrap().tiling;
    let outer = tau_v(third, Phase::shifted(CellCoord::new(2, 0, 0))).unwrap().tiling;
    let t0 = Instant::now();
    let shifted = patch(&outer, &inner, 24, 0.25).unwrap();
    let s1 = t0.elapsed().as_secs_f64();
    let t1 = Instant::now();
    let bricks = patch(&PeriodicTiling::brickwork(Dir::XPos), &PeriodicTiling::brickwork(Dir::XNeg), 24, 0.25).unwrap();
    let s2 = t1.elapsed().as_secs_f64();
    let describe = |p: &PatchOutcome| match p {
        PatchOutcome::Tiling(t) => format!("tiling ({} tiles)", t.tile_count()),
        PatchOutcome::Certificate { cert, .. } => format!("certificate (imbalance {})", cert.imbalance),
    };
    let ok1 = matches!(shifted, PatchOutcome::Tiling(ref t) if t.is_valid());
    let ok2 = match &bricks {
        PatchOutcome::Certificate { cert, region, .. } => cert.check(region).is_ok(),
        _ => false,
    };
    outcome(
        ok1 && ok2 && s1 < 120.0 && s2 < 120.0,
        format!("shifted tau(1/3,1/3,1/3): {} in {s1:.2}s; +x vs -x brickwork: {} in {s2:.2}s", describe(&shifted), describe(&bricks)),
    )
}

fn random_octahedron_point(rng: &mut ChaCha8Rng) -> [Rational; 3] {
    loop {
        let q = rng.gen_range(1..=12i64);
        let v = [0; 3].map(|_| rng.gen_range(-q..=q));
        if v.iter().map(|x| x.abs()).sum::<i64>() <= q && v[0] != -q {
            return v.map(|a| Rational::new(a, q));
        }
    }
}

fn parallel(a: [Rational; 3], b: [Rational; 3]) -> bool {
    let cross = [a[1] * b[2] - a[2] * b[1], a[2] * b[0] - a[0] * b[2], a[0] * b[1] - a[1] * b[0]];
    let dot = a[0] * b[0] + a[1] * b[1] + a[2] * b[2];
    cross.iter().all(Zero::is_zero) && dot.is_positive()
}

fn tau_v_exactness() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    let (mut exact, mut aligned, mut cycles) = (0, 0, 0);
    for _ in 0..20 {
        let v = random_octahedron_point(&mut rng);
        let tv = tau_v(v, Phase::default()).unwrap();
        exact += usize::from(tv.tiling.mean_current() == v);
        let w = tau_v_word(v).unwrap().w;
        let dir = [w[0] + 1, w[1], w[2]];
        let d = tv.tiling.dims();
        let dims = [d[0].lcm(&2), d[1].lcm(&2), d[2].lcm(&2)];
        let t1 = tv.tiling.with_periods(dims).unwrap().to_torus();
        let t2 = PeriodicTiling::brickwork(Dir::XNeg).with_periods(dims).unwrap().to_torus();
        let cfg = superpose(&t1, &t2).unwrap();
        let stats = slope_statistics(&cfg);
        cycles += cfg.cycles.len();
        let first = stats.slopes.first().copied();
        let ok = stats.slopes.iter().all(|s| Some(*s) == first && parallel(*s, dir));
        aligned += usize::from(ok);
    }
    outcome(exact == 20 && aligned == 20, format!("20 currents: {exact} exact, {aligned} with constant slope along w(v)+e1 ({cycles} cycles)"))
}

fn chain_swap_conservation() -> Outcome {
    let r = Arc::new(Region::torus([6, 6, 6]).unwrap());
    let a = brickwork(&r, Dir::XPos).unwrap();
    let b = brickwork(&r, Dir::XNeg).unwrap();
    let (wa, wb) = (winding(&a).unwrap(), winding(&b).unwrap());
    let union = edge_multiset(&a, &b);
    let mut exact_fail = 0;
    let mut lines = Vec::new();
    let mut within = true;
    for (k, p) in [0.25, 0.5].into_iter().enumerate() {
        let trials = 200;
        let mut sum = 0.0;
        for i in 0..trials {
            let res = chain_swap(&a, &b, p, (k * 1000 + i) as u64).unwrap();
            let (w1, w2) = (winding(&res.t1).unwrap(), winding(&res.t2).unwrap());
            if edge_multiset(&res.t1, &res.t2) != union || (0..3).any(|j| w1[j] + w2[j] != wa[j] + wb[j]) {
                exact_fail += 1;
            }
            sum += w1[0] as f64;
        }
        let mean = sum / trials as f64;
        let expect = (1.0 - p) * wa[0] as f64 + p * wb[0] as f64;
        let cycles = superpose(&a, &b).unwrap().cycles.len() as f64;
        let sigma = (cycles * p * (1.0 - p) / trials as f64).sqrt();
        within &= (mean - expect).abs() <= 3.0 * sigma;
        lines.push(format!("p={p}: mean a1 {mean:.3} vs {expect:.1} (sigma {sigma:.3})"));
    }
    outcome(
        exact_fail == 0 && within,
        format!("a1 {} vs {}, {exact_fail} conservation failures; {}", wa[0], wb[0], lines.join("; ")),
    )
}

fn boundary_entropy() -> Outcome {
    let t0 = Instant::now();
    let third = [Rational::new(1, 3); 3];
    let formula = ent_boundary(third).unwrap().value;
    let oracle = 3.0 / PI * lobachevsky_oracle(PI / 3.0);
    let err = (formula - oracle).abs();
    let n = 12;
    let base = slab_entropy([1.0 / 3.0; 3], n).unwrap().value;
    let e1 = slab_entropy([0.5, 0.25, 0.25], n).unwrap().value;
    let e2 = slab_entropy([0.5, 0.5, 0.0], n).unwrap().value;
    let f1 = ent_boundary([Rational::new(1, 2), Rational::new(1, 4), Rational::new(1, 4)]).unwrap().value / formula;
    let r1 = e1 / base;
    let r2 = e2 / base;
    let ok1 = ((r1 - f1) / f1).abs() <= 0.15;
    let ok2 = r2 <= 0.15;
    let secs = t0.elapsed().as_secs_f64();
    outcome(
        err < 1e-10 && ok1 && ok2 && secs < 600.0,
        format!(
            "formula {formula:.12} vs quadrature (err {err:.1e}); n={n} ratios {r1:.4} (formula {f1:.4}), {r2:.4} (formula 0), {secs:.1}s"
        ),
    )
}

fn random_measure(rng: &mut ChaCha8Rng) -> SignedPointMeasure<f64> {
    let k = rng.gen_range(0..7);
    SignedPointMeasure::new(
        (0..k)
            .map(|_| Atom {
                point: [0; 3].map(|_| rng.gen_range(0..16) as f64 / 4.0),
                weight: rng.gen_range(-32..=32) as f64 / 8.0,
            })
            .collect(),
    )
}

fn transport_metric() -> Outcome {
    let scale = 1e6;
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    let (mut sym, mut tri, mut shift) = (0, 0, 0);
    let mut worst: f64 = 0.0;
    for _ in 0..500 {
        let (a, b, c) = (random_measure(&mut rng), random_measure(&mut rng), random_measure(&mut rng));
        let ab = w11(&a, &b, scale).unwrap();
        sym += usize::from(ab != w11(&b, &a, scale).unwrap());
        let slack = ab - w11(&a, &c, scale).unwrap() - w11(&c, &b, scale).unwrap();
        worst = worst.max(slack);
        tri += usize::from(slack > 1e-9);
        shift += usize::from(w11(&a.plus(&c), &b.plus(&c), scale).unwrap() != ab);
    }
    let mut deltas = Vec::new();
    let mut delta_ok = true;
    for d in [0.5f64, 1.9, 2.1, 3.0] {
        let mu = SignedPointMeasure::new(vec![Atom { point: [0.0; 3], weight: 1.0 }]);
        let nu = SignedPointMeasure::new(vec![Atom { point: [d, 0.0, 0.0], weight: 1.0 }]);
        let got = w11(&mu, &nu, scale).unwrap();
        delta_ok &= (got - d.min(2.0)).abs() < 1e-9;
        deltas.push(format!("{got}"));
    }
    let mut pairs = 0;
    let mut dominated = 0;
    let third = [Rational::new(1, 3); 3];
    let tv = tau_v(third, Phase::default()).unwrap().tiling;
    for n in [4i64, 6, 8] {
        let window = build_box(n, n, n).unwrap();
        let r = Arc::new(window.clone());
        let mut flows = vec![
            flow_to_component_measures(&tv, n, &window).unwrap(),
            constant_flow_measures(third, n, &window),
            constant_flow_measures([Rational::zero(); 3], n, &window),
        ];
        for seed in 0..3 {
            let t = sample_uniform(&r, 500, seed).unwrap();
            flows.push(flow_to_component_measures(&t, n, &window).unwrap());
        }
        let flows: Vec<_> = flows.iter().map(to_real3::<f64>).collect();
        for i in 0..flows.len() {
            for j in i + 1..flows.len() {
                let d = d_w(&flows[i], &flows[j], scale).unwrap();
                for eps in [0.25, 0.5] {
                    pairs += 1;
                    dominated += usize::from(box_discrepancy_bound(&flows[i], &flows[j], eps).unwrap() >= d);
                }
            }
        }
    }
    outcome(
        sym == 0 && tri == 0 && shift == 0 && delta_ok && dominated == pairs,
        format!(
            "500 instances: {sym} asymmetric, {tri} triangle violations (worst slack {worst:.1e}), {shift} shift mismatches; delta masses [{}]; bound dominates {dominated}/{pairs}",
            deltas.join(", ")
        ),
    )
}

fn flow_convergence() -> Outcome {
    let t0 = Instant::now();
    let third = [Rational::new(1, 3); 3];
    let tv = tau_v(third, Phase::default()).unwrap().tiling;
    let mut ds = Vec::new();
    for n in [4i64, 8, 16] {
        let window = build_box(n, n, n).unwrap();
        let f = to_real3::<f64>(&flow_to_component_measures(&tv, n, &window).unwrap());
        let g = to_real3::<f64>(&constant_flow_measures(third, n, &window));
        ds.push(d_w(&f, &g, 1e6).unwrap());
    }
    let decreasing = ds.windows(2).all(|w| w[1] < w[0]);
    let drop = 1.0 - ds[2] / ds[1];
    let secs = t0.elapsed().as_secs_f64();
    outcome(
        decreasing && drop >= 0.40,
        format!("d_W at n=4,8,16: {:.5}, {:.5}, {:.5}; drop 8->16 {:.1}%, {secs:.1}s", ds[0], ds[1], ds[2], 100.0 * drop),
    )
}

fn main() {
    let criteria: [(u32, &str, fn() -> Outcome); 11] = [
        (1, "sampler uniformity", sampler_uniformity),
        (2, "transition symmetry", transition_symmetry),
        (3, "twist laws", twist_laws),
        (4, "hopfion flip rigidity", hopfion_rigidity),
        (5, "Hall certificates", hall_certificates),
        (6, "patching", patching),
        (7, "tau_v exactness", tau_v_exactness),
        (8, "chain-swap conservation", chain_swap_conservation),
        (9, "boundary entropy", boundary_entropy),
        (10, "transport metric", transport_metric),
        (11, "flow convergence", flow_convergence),
    ];
    let filter: Vec<String> = std::env::args().skip(1).filter(|a| !a.starts_with('-')).collect();
    let mut unexpected = Vec::new();
    for (id, name, run) in criteria {
        if !filter.is_empty() && !filter.iter().any(|f| name.contains(f.as_str()) || id.to_string() == *f) {
            continue;
        }
        let o = run();
        let tag = if o.pass { "PASS" } else { "FAIL" };
        let note = if !o.pass && KNOWN_FAILURES.contains(&id) { " [known]" } else { "" };
        println!("criterion {id:>2} {tag}{note} {name}: {}", o.detail);
        if !o.pass && !KNOWN_FAILURES.contains(&id) {
            unexpected.push(id);
        }
    }
    if !unexpected.is_empty() {
        eprintln!("unexpected failures: {unexpected:?}");
        std::process::exit(1);
    }
}
