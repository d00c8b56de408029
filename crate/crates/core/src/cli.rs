//! Command-line front end. Exit codes: 0 success, 1 verification
//! failure, 2 usage error, 3 runtime error.

use std::fs;
use std::io::Write as _;
use std::path::PathBuf;

use clap::{Args, Parser, Subcommand};
use sha2::{Digest, Sha256};

use crate::billiard2d::{macro_reflection, Limits, ReflState};
use crate::diskwall::{from_tilted, to_tilted, Collider, ConfigState, DiskParams, TiltedState, V3};
use crate::kernels::{knudsen_exit_time, Kernel};
use crate::rng::{uniform, Streams};
use crate::stats::convergence_study;
use crate::verify::{run_all, VERSION};
use crate::wall::{build_wall, WallSpec};
use crate::Real;

#[derive(Parser, Debug)]
#[command(name = "rough-billiards", version, about = "Billiards on microstructured walls")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Emit the per-period segment list (JSON) and a sampled polyline (CSV).
    Wall {
        /// Wall spec JSON file.
        #[arg(long)]
        wall: PathBuf,
        /// Polyline CSV output path (stdout if omitted).
        #[arg(long)]
        out_csv: Option<PathBuf>,
        /// Segment list JSON output path.
        #[arg(long)]
        out_json: Option<PathBuf>,
        #[arg(long, default_value_t = 64)]
        samples_per_segment: usize,
    },
    /// Sample the macro-reflection law at a fixed angle.
    Reflect {
        #[arg(long)]
        wall: PathBuf,
        #[arg(long)]
        theta: Real,
        #[arg(long)]
        samples: u64,
        #[arg(long)]
        seed: u64,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Tabulate the atoms of a closed-form kernel over an angle grid.
    Kernel {
        #[command(flatten)]
        kernel: KernelArgs,
        #[arg(long, default_value_t = 16)]
        theta_grid: usize,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Sample one disk-wall collision law at fixed incoming angles.
    Collide {
        #[arg(long)]
        wall: PathBuf,
        #[arg(long, default_value_t = 1.0)]
        m: Real,
        #[arg(long, default_value_t = 1.0)]
        j: Real,
        /// Roughness scale; overrides the wall spec's scale when given.
        #[arg(long)]
        eps: Option<Real>,
        #[arg(long)]
        theta: Real,
        #[arg(long)]
        psi: Real,
        #[arg(long)]
        samples: u64,
        #[arg(long)]
        seed: u64,
        /// Use the cylindrical collision law instead of the full one.
        #[arg(long)]
        cyl: bool,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Convergence study of the full law against the foreshortened wall.
    Converge {
        #[arg(long)]
        wall: PathBuf,
        /// Comma-separated decreasing list of scales.
        #[arg(long, value_delimiter = ',')]
        eps_list: Vec<Real>,
        #[arg(long, default_value_t = 1.0)]
        m: Real,
        #[arg(long, default_value_t = 1.0)]
        j: Real,
        #[arg(long, default_value_t = 1.0)]
        theta: Real,
        #[arg(long, default_value_t = 2.0)]
        psi: Real,
        #[arg(long, default_value_t = 10_000)]
        n: usize,
        #[arg(long)]
        seed: u64,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Escape times from a planar channel with a rough-wall kernel.
    Knudsen {
        #[command(flatten)]
        kernel: KernelArgs,
        #[arg(long)]
        length: Real,
        #[arg(long)]
        runs: u64,
        #[arg(long)]
        seed: u64,
        /// Fixed entry angle; drawn from the equilibrium density if omitted.
        #[arg(long)]
        theta: Option<Real>,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Run the full verification suite; exit 1 on any failure.
    Verify {
        #[arg(long)]
        seed: u64,
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

#[derive(Args, Debug)]
struct KernelArgs {
    /// specular | retro | lambertian | rect | tri | circ
    #[arg(long)]
    family: String,
    #[arg(long)]
    r: Option<Real>,
    #[arg(long)]
    psi: Option<Real>,
    #[arg(long)]
    xi: Option<Real>,
}

impl KernelArgs {
    fn build(&self) -> Result<Kernel<Real>, String> {
        match self.family.as_str() {
            "specular" => Ok(Kernel::Specular),
            "retro" => Ok(Kernel::Retro),
            "lambertian" => Ok(Kernel::Lambertian),
            "rect" => self.r.map(|r| Kernel::RectTeeth { r }).ok_or("rect needs --r".into()),
            "tri" => self.psi.map(|psi| Kernel::TriTeeth { psi }).ok_or("tri needs --psi".into()),
            "circ" => self.xi.map(|xi| Kernel::CircArcs { xi }).ok_or("circ needs --xi".into()),
            other => Err(format!("unknown kernel family {other}")),
        }
    }
}

/// Entry point used by the binary and by the CLI tests.
pub fn run<I>(argv: I) -> i32
where
    I: IntoIterator,
    I::Item: Into<std::ffi::OsString> + Clone,
{
    let mut args: Vec<std::ffi::OsString> = vec!["rough-billiards".into()];
    args.extend(argv.into_iter().map(Into::into));
    let argv_text: String = args
        .iter()
        .map(|a| a.to_string_lossy().into_owned())
        .collect::<Vec<_>>()
        .join(" ");
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            // Help and version requests are not usage errors.
            let _ = e.print();
            return if e.exit_code() == 0 { 0 } else { 2 };
        }
    };
    init_threads();
    match dispatch(cli.command, &argv_text) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e}");
            3
        }
    }
}

fn init_threads() {
    if let Ok(v) = std::env::var("ROUGH_BILLIARDS_THREADS") {
        if let Ok(n) = v.parse::<usize>() {
            // Ignore failure: the global pool may already exist.
            let _ = rayon::ThreadPoolBuilder::new().num_threads(n).build_global();
        }
    }
}

fn fmt(x: Real) -> String {
    format!("{x:.16e}")
}

fn meta_line(argv: &str, seed: Option<u64>) -> String {
    let mut hasher = Sha256::new();
    hasher.update(argv.as_bytes());
    let hash = hasher.finalize();
    let hex: String = hash.iter().take(8).map(|b| format!("{b:02x}")).collect();
    match seed {
        Some(s) => format!("# rough-billiards v{VERSION} seed={s} config={hex}"),
        None => format!("# rough-billiards v{VERSION} config={hex}"),
    }
}

fn write_out(path: &Option<PathBuf>, content: &str) -> Result<(), String> {
    match path {
        Some(p) => fs::write(p, content).map_err(|e| format!("writing {}: {e}", p.display())),
        None => {
            let mut out = std::io::stdout().lock();
            out.write_all(content.as_bytes()).map_err(|e| e.to_string())
        }
    }
}

fn load_spec(path: &PathBuf) -> Result<WallSpec<Real>, String> {
    let text =
        fs::read_to_string(path).map_err(|e| format!("reading {}: {e}", path.display()))?;
    serde_json::from_str(&text).map_err(|e| format!("parsing {}: {e}", path.display()))
}

fn dispatch(cmd: Command, argv: &str) -> Result<i32, String> {
    match cmd {
        Command::Wall { wall, out_csv, out_json, samples_per_segment } => {
            let spec = load_spec(&wall)?;
            let w = build_wall(&spec).map_err(|e| e.to_string())?;
            let segments: Vec<serde_json::Value> = w
                .period_segments(0)
                .iter()
                .map(|b| segment_json(&b.kind, b.period_index))
                .collect();
            let json = serde_json::json!({
                "meta": meta_json(argv, None),
                "period": w.period(),
                "scale": w.scale(),
                "h_max": w.h_max(),
                "segments": segments,
            });
            if let Some(p) = &out_json {
                fs::write(p, serde_json::to_string_pretty(&json).unwrap())
                    .map_err(|e| e.to_string())?;
            }
            let mut csv = String::new();
            csv.push_str(&meta_line(argv, None));
            csv.push_str("\nx,y\n");
            for p in w.polyline(samples_per_segment) {
                csv.push_str(&format!("{},{}\n", fmt(p.x), fmt(p.y)));
            }
            if out_json.is_none() || out_csv.is_some() {
                write_out(&out_csv, &csv)?;
            }
            Ok(0)
        }
        Command::Reflect { wall, theta, samples, seed, out } => {
            let spec = load_spec(&wall)?;
            let w = build_wall(&spec).map_err(|e| e.to_string())?;
            if !(theta > 0.0 && theta < std::f64::consts::PI) {
                return Err(format!("theta must be in (0, pi), got {theta}"));
            }
            let streams = Streams::new(seed, "cli-reflect");
            let mut csv = String::new();
            csv.push_str(&meta_line(argv, Some(seed)));
            csv.push_str("\nx,theta,x_out,theta_out,bounces,status\n");
            for i in 0..samples {
                let mut rng = streams.rng(i);
                let x: Real = uniform::<Real, _>(&mut rng) * w.period();
                match macro_reflection(&w, ReflState { x, theta }, Limits::default()) {
                    Ok(o) => csv.push_str(&format!(
                        "{},{},{},{},{},ok\n",
                        fmt(x),
                        fmt(theta),
                        fmt(o.state.x),
                        fmt(o.state.theta),
                        o.bounces
                    )),
                    Err(e) => csv.push_str(&format!(
                        "{},{},nan,nan,0,{}\n",
                        fmt(x),
                        fmt(theta),
                        status_of(&e)
                    )),
                }
            }
            write_out(&out, &csv)?;
            Ok(0)
        }
        Command::Kernel { kernel, theta_grid, out } => {
            let k = kernel.build()?;
            let mut csv = String::new();
            csv.push_str(&meta_line(argv, None));
            csv.push_str("\ntheta,atom_angle,atom_prob\n");
            for i in 0..theta_grid {
                let theta =
                    std::f64::consts::PI * (2.0 * i as Real + 1.0) / (2.0 * theta_grid as Real);
                match k.atoms(theta).map_err(|e| e.to_string())? {
                    Some(atoms) => {
                        for (a, p) in atoms {
                            csv.push_str(&format!("{},{},{}\n", fmt(theta), fmt(a), fmt(p)));
                        }
                    }
                    None => {
                        return Err(format!(
                            "kernel {} has a continuous part; no atom table",
                            k.name()
                        ))
                    }
                }
            }
            write_out(&out, &csv)?;
            Ok(0)
        }
        Command::Collide { wall, m, j, eps, theta, psi, samples, seed, cyl, out } => {
            let mut spec = load_spec(&wall)?;
            if let Some(e) = eps {
                spec.scale = e;
            }
            let params = DiskParams::new(m, j, spec.scale).map_err(|e| e.to_string())?;
            let collider = Collider::new(&spec, params).map_err(|e| e.to_string())?;
            let streams = Streams::new(seed, "cli-collide");
            let mut csv = String::new();
            csv.push_str(&meta_line(argv, Some(seed)));
            csv.push_str("\ny1,y3,theta,psi,y1_out,y3_out,theta_out,psi_out,bounces,status\n");
            for i in 0..samples {
                let mut rng = streams.rng(i);
                let x1: Real = uniform::<Real, _>(&mut rng) * collider.wall().period();
                let alpha: Real = uniform::<Real, _>(&mut rng) * params.rho;
                let w_in = from_tilted(&TiltedState { y1: 0.0, y3: 0.0, theta, psi }, &params).w;
                let s = ConfigState { y: V3::new(x1, 0.0, alpha), w: w_in };
                let t_in = to_tilted(&s, &params).map_err(|e| e.to_string())?;
                let res = if cyl {
                    collider.collide_cyl(&s, Limits::default())
                } else {
                    collider.collide(&s, Limits::default())
                };
                match res.and_then(|o| Ok((to_tilted(&o.state, &params)?, o.bounces))) {
                    Ok((t_out, bounces)) => csv.push_str(&format!(
                        "{},{},{},{},{},{},{},{},{},ok\n",
                        fmt(t_in.y1),
                        fmt(t_in.y3),
                        fmt(theta),
                        fmt(psi),
                        fmt(t_out.y1),
                        fmt(t_out.y3),
                        fmt(t_out.theta),
                        fmt(t_out.psi),
                        bounces
                    )),
                    Err(e) => csv.push_str(&format!(
                        "{},{},{},{},nan,nan,nan,nan,0,{}\n",
                        fmt(t_in.y1),
                        fmt(t_in.y3),
                        fmt(theta),
                        fmt(psi),
                        disk_status(&e)
                    )),
                }
            }
            write_out(&out, &csv)?;
            Ok(0)
        }
        Command::Converge { wall, eps_list, m, j, theta, psi, n, seed, out } => {
            if eps_list.len() < 2 {
                return Err("need at least two scales in --eps-list".into());
            }
            let base = load_spec(&wall)?;
            let study = convergence_study(
                |eps| {
                    let mut s = base.clone();
                    s.scale = eps;
                    s
                },
                m,
                j,
                theta,
                psi,
                &eps_list,
                n,
                seed,
            )
            .map_err(|e| e.to_string())?;
            let json = serde_json::json!({
                "meta": meta_json(argv, Some(seed)),
                "rows": study.rows,
                "reports": study.reports,
            });
            write_out(&out, &format!("{}\n", serde_json::to_string_pretty(&json).unwrap()))?;
            Ok(0)
        }
        Command::Knudsen { kernel, length, runs, seed, theta, out } => {
            let k = kernel.build()?;
            let streams = Streams::new(seed, "cli-knudsen");
            let mut csv = String::new();
            csv.push_str(&meta_line(argv, Some(seed)));
            csv.push_str("\ntime,bounces,status\n");
            for i in 0..runs {
                let mut rng = streams.rng(i);
                match knudsen_exit_time(&k, length, theta, Limits::default(), &mut rng) {
                    Ok(e) => csv.push_str(&format!("{},{},ok\n", fmt(e.time), e.bounces)),
                    Err(_) => csv.push_str("nan,0,capped\n"),
                }
            }
            write_out(&out, &csv)?;
            Ok(0)
        }
        Command::Verify { seed, out } => {
            let report = run_all(seed);
            for t in &report.tests {
                println!(
                    "[{}] {} statistic={:.6e} threshold={:.6e}",
                    if t.passed { "PASS" } else { "FAIL" },
                    t.name,
                    t.statistic,
                    t.threshold
                );
            }
            let json = serde_json::json!({
                "meta": meta_json(argv, Some(seed)),
                "tests": report.tests,
                "passed": report.passed,
            });
            write_out(&out, &format!("{}\n", serde_json::to_string_pretty(&json).unwrap()))?;
            Ok(if report.passed { 0 } else { 1 })
        }
    }
}

fn meta_json(argv: &str, seed: Option<u64>) -> serde_json::Value {
    let mut hasher = Sha256::new();
    hasher.update(argv.as_bytes());
    let hash = hasher.finalize();
    let hex: String = hash.iter().take(8).map(|b| format!("{b:02x}")).collect();
    serde_json::json!({
        "version": VERSION,
        "seed": seed,
        "config_hash": hex,
    })
}

fn segment_json(kind: &crate::wall::SegKind<Real>, period_index: i64) -> serde_json::Value {
    match kind {
        crate::wall::SegKind::Line { p0, p1 } => serde_json::json!({
            "kind": "line",
            "p0": [p0.x, p0.y],
            "p1": [p1.x, p1.y],
            "period_index": period_index,
        }),
        crate::wall::SegKind::Arc { center, semi, ang0, ang1, concave } => serde_json::json!({
            "kind": if (semi.x - semi.y).abs() < 1e-15 { "arc" } else { "ell_arc" },
            "center": [center.x, center.y],
            "semi_x": semi.x,
            "semi_y": semi.y,
            "angle_start": ang0,
            "angle_end": ang1,
            "concave": concave,
            "period_index": period_index,
        }),
    }
}

fn status_of(e: &crate::billiard2d::TraceError) -> &'static str {
    match e {
        crate::billiard2d::TraceError::Singular(_) => "singular",
        crate::billiard2d::TraceError::Capped => "capped",
        crate::billiard2d::TraceError::NotIncoming => "not_incoming",
    }
}

fn disk_status(e: &crate::diskwall::DiskError) -> &'static str {
    match e {
        crate::diskwall::DiskError::Singular(_) => "singular",
        crate::diskwall::DiskError::Capped => "capped",
        crate::diskwall::DiskError::DegenerateAngle => "degenerate",
        _ => "error",
    }
}
