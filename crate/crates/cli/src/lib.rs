//! Command-line front end for dimerlab. Every command is a pure function of its flags
//! and input files; JSON output carries a `version` field.

pub mod mesh;

use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};
use std::sync::Arc;

use clap::{Args, Parser, Subcommand};
use dimerlab::doubledimer::{chain_swap, superpose, total_winding};
use dimerlab::dynamics::{crossing_sum, sample_uniform, twist};
use dimerlab::entropy::{self, count_tilings, count_torus_by_winding, ent_boundary, DEFAULT_BUDGET};
use dimerlab::flowcalc::{winding, MeanCurrent};
use dimerlab::lattice::build_box;
use dimerlab::tileability::{find_matching, patch, MatchOutcome, PatchOutcome};
use dimerlab::tiling::{region_from_value, tau_v, Phase, TilingJson};
use dimerlab::transport::{box_discrepancy_bound, constant_flow_measures, d_w, flow_to_component_measures, to_real3};
use dimerlab::{CellCoord, Dir, Error, PeriodicTiling, Rational, Region, Tiling};
use serde_json::{json, Value};

pub use mesh::{export_mesh, import_mesh_json, MeshFormat};

pub const EXIT_OK: i32 = 0;
pub const EXIT_NEGATIVE: i32 = 2;
pub const EXIT_USAGE: i32 = 64;
pub const EXIT_DATA: i32 = 65;

pub const SCHEMA_VERSION: u32 = 1;

#[derive(Parser, Debug)]
#[command(name = "dimerlab", version, about = "Dimer tilings of Z³: sampling, counting, tileability, flows")]
pub struct Cli {
    /// Write output here instead of stdout.
    #[arg(long, global = true)]
    pub out: Option<PathBuf>,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Args, Debug, Clone)]
pub struct RegionArgs {
    /// Region JSON file.
    #[arg(long, conflicts_with_all = ["box_dims", "torus"])]
    pub region: Option<PathBuf>,
    /// Box a,b,c with its corner at the origin.
    #[arg(long = "box", value_name = "A,B,C")]
    pub box_dims: Option<String>,
    /// Torus n1,n2,n3.
    #[arg(long, value_name = "N1,N2,N3", conflicts_with = "box_dims")]
    pub torus: Option<String>,
}

#[derive(Subcommand, Debug)]
pub enum Command {
    /// Sample a tiling with the loop-shift chain.
    Sample {
        #[command(flatten)]
        region: RegionArgs,
        /// Number of chain steps; scientific notation is accepted.
        #[arg(long, default_value = "1e4")]
        steps: String,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        /// Emit a mesh (ply, obj, json) instead of the tiling JSON.
        #[arg(long)]
        export: Option<MeshFormat>,
    },
    /// Count the tilings of a region exactly.
    Count {
        #[command(flatten)]
        region: RegionArgs,
        #[arg(long, default_value_t = DEFAULT_BUDGET)]
        budget: usize,
        /// On a torus, report counts per winding class as JSON.
        #[arg(long)]
        by_winding: bool,
    },
    /// Decide tileability; emits a tiling or a Hall certificate (exit 2).
    Check {
        #[command(flatten)]
        region: RegionArgs,
    },
    /// Tile the annulus between two periodic tilings.
    Patch {
        /// Tiling outside the annulus: `brick:+x` or `tau:p/q,p/q,p/q[@dx,dy,dz]`.
        #[arg(long)]
        outer: String,
        /// Tiling inside the annulus, same syntax.
        #[arg(long)]
        inner: String,
        #[arg(long, default_value_t = 24)]
        n: i64,
        #[arg(long, default_value_t = 0.25)]
        delta: f64,
    },
    /// Twist of a tiling of an open region.
    Twist {
        #[arg(long)]
        tiling: PathBuf,
    },
    /// Entropy at a mean current.
    Entropy {
        /// Mean current, e.g. 1/3,1/3,1/3.
        #[arg(long, allow_hyphen_values = true)]
        s: String,
        /// Slab sizes for an empirical estimate on the boundary.
        #[arg(long, value_delimiter = ',')]
        slab: Vec<usize>,
        /// Tori for an interior estimate, e.g. `2,2,2;2,2,4`.
        #[arg(long)]
        tori: Option<String>,
        #[arg(long, default_value_t = DEFAULT_BUDGET)]
        budget: usize,
    },
    /// Chain swap of two torus tilings along winding cycles.
    Swap {
        #[arg(long)]
        t1: PathBuf,
        #[arg(long)]
        t2: PathBuf,
        #[arg(long, default_value_t = 0.5)]
        p: f64,
        #[arg(long, default_value_t = 0)]
        seed: u64,
    },
    /// Transport distance between the flow of a tiling and another flow.
    Distance {
        #[arg(long)]
        tiling: PathBuf,
        /// Second tiling on the same region.
        #[arg(long, conflicts_with = "constant")]
        other: Option<PathBuf>,
        /// Constant flow, e.g. 1/3,1/3,1/3.
        #[arg(long, allow_hyphen_values = true)]
        constant: Option<String>,
        /// Scale n; points are rescaled by 1/n. Defaults to the longest side.
        #[arg(long)]
        n: Option<i64>,
        /// Mass resolution of the transport solver.
        #[arg(long, default_value_t = 1e-6)]
        precision: f64,
        /// Also report the box-discrepancy bound at this ε.
        #[arg(long)]
        eps: Option<f64>,
    },
    /// Mesh of a tiling.
    Export {
        #[arg(long)]
        tiling: PathBuf,
        #[arg(long, default_value = "ply")]
        format: MeshFormat,
    },
}

/// Failure modes mapped to exit codes.
#[derive(Debug)]
pub enum Failure {
    Usage(String),
    Data(String),
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        match e {
            Error::OutOfRange(_) | Error::BadMeanCurrent(_) | Error::NotTorus => Failure::Usage(e.to_string()),
            _ => Failure::Data(e.to_string()),
        }
    }
}

type CmdResult = std::result::Result<(i32, Vec<u8>), Failure>;

fn verbose() -> bool {
    std::env::var_os("DIMERLAB_VERBOSE").is_some_and(|v| v != "0")
}

fn log(msg: impl AsRef<str>) {
    if verbose() {
        eprintln!("dimerlab: {}", msg.as_ref());
    }
}

fn json_bytes(v: &Value) -> Vec<u8> {
    let mut s = serde_json::to_string_pretty(v).expect("json serializes");
    s.push('\n');
    s.into_bytes()
}

fn read(p: &Path) -> std::result::Result<String, Failure> {
    fs::read_to_string(p).map_err(|e| Failure::Data(format!("{}: {e}", p.display())))
}

fn parse_triple<T: std::str::FromStr>(s: &str) -> std::result::Result<[T; 3], Failure> {
    let parts: Vec<&str> = s.split(',').map(str::trim).collect();
    if parts.len() != 3 {
        return Err(Failure::Usage(format!("expected three comma-separated values, got `{s}`")));
    }
    let mut out = Vec::with_capacity(3);
    for p in parts {
        out.push(p.parse::<T>().map_err(|_| Failure::Usage(format!("cannot parse `{p}`")))?);
    }
    Ok(out.try_into().ok().expect("three values"))
}

pub fn parse_rational3(s: &str) -> std::result::Result<[Rational; 3], Failure> {
    parse_triple::<Rational>(s)
}

fn parse_count(s: &str) -> std::result::Result<u64, Failure> {
    if let Ok(k) = s.parse::<u64>() {
        return Ok(k);
    }
    let x: f64 = s.parse().map_err(|_| Failure::Usage(format!("bad count `{s}`")))?;
    if x < 0.0 || x.fract() != 0.0 || x > u64::MAX as f64 {
        return Err(Failure::Usage(format!("bad count `{s}`")));
    }
    Ok(x as u64)
}

fn load_region(a: &RegionArgs) -> std::result::Result<Arc<Region>, Failure> {
    let r = if let Some(p) = &a.region {
        let v: Value = serde_json::from_str(&read(p)?).map_err(|e| Failure::Data(format!("{}: {e}", p.display())))?;
        region_from_value(&v)?
    } else if let Some(b) = &a.box_dims {
        let [x, y, z] = parse_triple::<i64>(b)?;
        build_box(x, y, z).map_err(|e| Failure::Usage(e.to_string()))?
    } else if let Some(t) = &a.torus {
        Region::torus(parse_triple::<i64>(t)?).map_err(|e| Failure::Usage(e.to_string()))?
    } else {
        return Err(Failure::Usage("one of --region, --box, --torus is required".into()));
    };
    Ok(Arc::new(r))
}

/// Loads a tiling file; a string `region` field is a path relative to the file.
pub fn load_tiling(p: &Path) -> std::result::Result<Tiling, Failure> {
    let text = read(p)?;
    let j: TilingJson = serde_json::from_str(&text).map_err(|e| Failure::Data(format!("{}: {e}", p.display())))?;
    let base = p.parent().map(Path::to_path_buf).unwrap_or_default();
    let t = j.to_tiling_with(|s| {
        let text = fs::read_to_string(base.join(s)).map_err(|e| Error::Parse(format!("{s}: {e}")))?;
        Region::from_json(&text)
    })?;
    Ok(t)
}

fn tiling_value(t: &Tiling) -> Value {
    serde_json::to_value(TilingJson::from_tiling(t)).expect("tiling serializes")
}

fn periodic_spec(s: &str) -> std::result::Result<PeriodicTiling, Failure> {
    if let Some(d) = s.strip_prefix("brick:") {
        let dir = Dir::parse(d).ok_or_else(|| Failure::Usage(format!("bad direction `{d}`")))?;
        return Ok(PeriodicTiling::brickwork(dir));
    }
    if let Some(rest) = s.strip_prefix("tau:") {
        let (v, shift) = match rest.split_once('@') {
            Some((v, sh)) => (v, CellCoord::from(parse_triple::<i64>(sh)?)),
            None => (rest, CellCoord::ORIGIN),
        };
        let v = parse_rational3(v)?;
        return Ok(tau_v(v, Phase::shifted(shift))?.tiling);
    }
    Err(Failure::Usage(format!("tiling spec `{s}` must start with brick: or tau:")))
}

pub fn execute(cli: &Cli) -> CmdResult {
    match &cli.command {
        Command::Sample { region, steps, seed, export } => {
            let r = load_region(region)?;
            let steps = parse_count(steps)?;
            log(format!("sampling {} cells, {steps} steps, seed {seed}", r.len()));
            let t = sample_uniform(&r, steps, *seed)?;
            match export {
                Some(f) => Ok((EXIT_OK, export_mesh(&t, *f))),
                None => Ok((EXIT_OK, json_bytes(&tiling_value(&t)))),
            }
        }
        Command::Count { region, budget, by_winding } => {
            let r = load_region(region)?;
            if *by_winding {
                let classes = count_torus_by_winding(&r, *budget)?;
                let list: Vec<Value> =
                    classes.iter().map(|(a, c)| json!({"winding": a, "count": c.to_string()})).collect();
                return Ok((EXIT_OK, json_bytes(&json!({"version": SCHEMA_VERSION, "classes": list}))));
            }
            let c = count_tilings(&r, *budget)?;
            Ok((EXIT_OK, format!("{c}\n").into_bytes()))
        }
        Command::Check { region } => {
            let r = load_region(region)?;
            match find_matching(&r, &[])? {
                MatchOutcome::Tiling(t) => Ok((
                    EXIT_OK,
                    json_bytes(&json!({"version": SCHEMA_VERSION, "tileable": true, "tiling": tiling_value(&t)})),
                )),
                MatchOutcome::Certificate { cert, .. } => Ok((
                    EXIT_NEGATIVE,
                    json_bytes(&json!({"version": SCHEMA_VERSION, "tileable": false, "certificate": cert})),
                )),
            }
        }
        Command::Patch { outer, inner, n, delta } => {
            let o = periodic_spec(outer)?;
            let i = periodic_spec(inner)?;
            match patch(&o, &i, *n, *delta)? {
                PatchOutcome::Tiling(t) => Ok((
                    EXIT_OK,
                    json_bytes(&json!({"version": SCHEMA_VERSION, "patched": true, "tiling": tiling_value(&t)})),
                )),
                PatchOutcome::Certificate { cert, balanced, .. } => Ok((
                    EXIT_NEGATIVE,
                    json_bytes(&json!({
                        "version": SCHEMA_VERSION,
                        "patched": false,
                        "balanced": balanced,
                        "certificate": cert,
                    })),
                )),
            }
        }
        Command::Twist { tiling } => {
            let t = load_tiling(tiling)?;
            let tw = twist(&t)?;
            Ok((
                EXIT_OK,
                json_bytes(&json!({
                    "version": SCHEMA_VERSION,
                    "twist": tw.value.to_string(),
                    "prism": tw.prism,
                    "crossing_sum": crossing_sum(&t),
                })),
            ))
        }
        Command::Entropy { s, slab, tori, budget } => {
            let s = parse_rational3(s)?;
            let l1 = MeanCurrent::new(s).l1();
            let mut out = json!({"version": SCHEMA_VERSION});
            if l1 == Rational::from(1) {
                out["boundary"] = serde_json::to_value(ent_boundary(s)?).expect("serializes");
                if !slab.is_empty() {
                    let e = entropy::empirical_ent_boundary(s, slab)?;
                    out["empirical"] = serde_json::to_value(e).expect("serializes");
                }
            } else {
                let tori: Vec<[i64; 3]> = match tori {
                    Some(t) => t.split(';').map(parse_triple::<i64>).collect::<std::result::Result<_, _>>()?,
                    None => vec![[2, 2, 2], [2, 2, 4], [4, 4, 2]],
                };
                let e = entropy::empirical_ent(s, &tori, *budget)?;
                out["empirical"] = serde_json::to_value(e).expect("serializes");
            }
            Ok((EXIT_OK, json_bytes(&out)))
        }
        Command::Swap { t1, t2, p, seed } => {
            let a = load_tiling(t1)?;
            let b = load_tiling(t2)?;
            let before = [winding(&a)?, winding(&b)?];
            let res = chain_swap(&a, &b, *p, *seed)?;
            let cfg = superpose(&a, &b)?;
            let after = [winding(&res.t1)?, winding(&res.t2)?];
            Ok((
                EXIT_OK,
                json_bytes(&json!({
                    "version": SCHEMA_VERSION,
                    "cycles": cfg.cycles.len(),
                    "winding_cycles": cfg.cycles.iter().filter(|c| c.is_winding()).count(),
                    "total_winding": total_winding(&cfg),
                    "swapped": res.swapped,
                    "winding_before": before,
                    "winding_after": after,
                    "t1": tiling_value(&res.t1),
                    "t2": tiling_value(&res.t2),
                })),
            ))
        }
        Command::Distance { tiling, other, constant, n, precision, eps } => {
            let t = load_tiling(tiling)?;
            let window = t.region().clone();
            let n = match n {
                Some(n) => *n,
                None => match window.bounding_box() {
                    Some((lo, hi)) => (hi - lo).to_array().into_iter().max().unwrap_or(0) + 1,
                    None => 1,
                },
            };
            if n < 1 || !(*precision > 0.0) {
                return Err(Failure::Usage("need n ≥ 1 and precision > 0".into()));
            }
            let f = flow_to_component_measures(&t, n, &window)?;
            let g = match (other, constant) {
                (Some(p), None) => flow_to_component_measures(&load_tiling(p)?, n, &window)?,
                (None, Some(v)) => constant_flow_measures(parse_rational3(v)?, n, &window),
                _ => return Err(Failure::Usage("give exactly one of --other, --constant".into())),
            };
            let (f, g) = (to_real3::<f64>(&f), to_real3::<f64>(&g));
            let d = d_w(&f, &g, 1.0 / precision)?;
            let mut out = json!({"version": SCHEMA_VERSION, "n": n, "d_w": d});
            if let Some(e) = eps {
                out["bound"] = json!(box_discrepancy_bound(&f, &g, *e)?);
            }
            Ok((EXIT_OK, json_bytes(&out)))
        }
        Command::Export { tiling, format } => {
            let t = load_tiling(tiling)?;
            Ok((EXIT_OK, export_mesh(&t, *format)))
        }
    }
}

/// Parses `args`, runs the command and writes its output. Returns the exit code.
pub fn run<I, S>(args: I) -> i32
where
    I: IntoIterator<Item = S>,
    S: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { EXIT_USAGE } else { EXIT_OK };
            let _ = e.print();
            return code;
        }
    };
    match execute(&cli) {
        Ok((code, bytes)) => {
            let written = match &cli.out {
                Some(p) => fs::write(p, &bytes).map_err(|e| format!("{}: {e}", p.display())),
                None => std::io::stdout().write_all(&bytes).map_err(|e| e.to_string()),
            };
            match written {
                Ok(()) => code,
                Err(e) => {
                    eprintln!("dimerlab: {e}");
                    EXIT_DATA
                }
            }
        }
        Err(Failure::Usage(m)) => {
            eprintln!("dimerlab: usage: {m}");
            EXIT_USAGE
        }
        Err(Failure::Data(m)) => {
            eprintln!("dimerlab: {m}");
            EXIT_DATA
        }
    }
}
