//! Command line front end.  Every command reads sets and bodies from JSON
//! files or regenerates them from `fixture:` / `body:` names, and writes
//! reports whose bytes depend only on the flags: fixed seeds, no
//! timestamps, sorted keys in ad-hoc JSON.
//!
//! Exit codes: 0 clean, 1 failed verification assertion, 2 bad input.

use anyhow::{bail, Context};
use clap::{Parser, Subcommand, ValueEnum};
use serde_json::json;
use std::path::{Path, PathBuf};
use wulfflab::fixtures;
use wulfflab::io::{
    csv_string, decode_set, decode_shape, encode_set, encode_shape, json_string, read_json,
    JohnFile, SelectFile, ShapeFile, WhitneyFile,
};
use wulfflab::svg;
use wulfflab::whitney::decompose;
use wulfflab::{
    anisotropic_perimeter, asymmetry, estimate_john, isoperimetric_deficit, normalize_shape,
    qwi_ratio, run_suite, solve_selection, trace_constant, wulff_from_tension, wulff_margin,
    GeomSet, PolygonSystem, SelectionProblem, TensionSpec, WulffShape,
};

#[derive(Parser)]
#[command(name = "wulfflab", version, about = "Anisotropic isoperimetry workbench")]
struct Cli {
    #[command(subcommand)]
    cmd: Cmd,
}

#[derive(Debug, Clone, Copy, PartialEq, ValueEnum)]
enum Format {
    Json,
    Csv,
    Svg,
}

#[derive(Subcommand)]
enum Cmd {
    /// Build a Wulff body from a sampled surface tension, recentred and
    /// rescaled to unit-ball volume.
    BuildWulff {
        /// Tension file: {dim, samples: [{dir, value}]}.
        #[arg(long)]
        input: PathBuf,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Anisotropic perimeter of a set against a body.
    Perimeter {
        /// Set file, or fixture:{disc,square,lshape,cusp,hexagon,star}.
        #[arg(long)]
        input: String,
        /// Body file, or body:{disc,disc1024,square,hexagon}.
        #[arg(long)]
        shape: String,
        #[arg(long, default_value_t = 42)]
        seed: u64,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Best-translate symmetric difference to the body.
    Asymmetry {
        #[arg(long)]
        input: String,
        #[arg(long)]
        shape: String,
        #[arg(long, default_value_t = 42)]
        seed: u64,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Isoperimetric deficit and Wulff margin.
    Deficit {
        #[arg(long)]
        input: String,
        #[arg(long)]
        shape: String,
        #[arg(long, default_value_t = 42)]
        seed: u64,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Quantitative ratio sweep over the shrinking ellipse family.
    QwiSweep {
        #[arg(long, default_value = "body:disc")]
        shape: String,
        #[arg(long, default_value_t = 42)]
        seed: u64,
        #[arg(long)]
        out: Option<PathBuf>,
        #[arg(long, value_enum, default_value_t = Format::Csv)]
        format: Format,
    },
    /// Whitney cube decomposition of a domain.
    Whitney {
        #[arg(long)]
        input: String,
        #[arg(long, default_value_t = 8)]
        max_level: u32,
        #[arg(long, default_value_t = 42)]
        seed: u64,
        #[arg(long)]
        out: Option<PathBuf>,
        #[arg(long, value_enum, default_value_t = Format::Json)]
        format: Format,
    },
    /// John constant estimate from the domain barycenter.
    John {
        #[arg(long)]
        input: String,
        #[arg(long, default_value_t = 8)]
        max_level: u32,
        #[arg(long, default_value_t = 42)]
        seed: u64,
        #[arg(long)]
        out: Option<PathBuf>,
        #[arg(long, value_enum, default_value_t = Format::Json)]
        format: Format,
    },
    /// Trace constant of the standard 20-field suite on a domain.
    Trace {
        #[arg(long)]
        input: String,
        #[arg(long, default_value_t = 8)]
        max_level: u32,
        #[arg(long, default_value_t = 42)]
        seed: u64,
        #[arg(long)]
        out: Option<PathBuf>,
        #[arg(long, value_enum, default_value_t = Format::Json)]
        format: Format,
    },
    /// Penalized perimeter minimization anchored at the input's asymmetry.
    Select {
        #[arg(long)]
        input: String,
        #[arg(long)]
        shape: String,
        #[arg(long, default_value_t = 42)]
        seed: u64,
        /// Energy slack the solver may leave on the table.
        #[arg(long)]
        tol: Option<f64>,
        #[arg(long)]
        out: Option<PathBuf>,
        #[arg(long, value_enum, default_value_t = Format::Json)]
        format: Format,
    },
    /// Run a verification suite: wulff, whitney, john, trace, qwi,
    /// selection, or all.
    Verify {
        suite: String,
        #[arg(long)]
        out: Option<PathBuf>,
        #[arg(long, value_enum, default_value_t = Format::Json)]
        format: Format,
    },
    /// Render a report file (whitney/john/select JSON, or sweep CSV) to SVG.
    Plot {
        #[arg(long)]
        input: PathBuf,
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

fn main() {
    if let Ok(v) = std::env::var("WULFFLAB_THREADS") {
        match v.parse::<usize>() {
            Ok(n) if n > 0 => {
                wulfflab::set_thread_cap(n);
            }
            _ => {
                eprintln!("error: WULFFLAB_THREADS must be a positive integer, got '{v}'");
                std::process::exit(2);
            }
        }
    }
    match run(Cli::parse()) {
        Ok(code) => std::process::exit(code),
        Err(e) => {
            eprintln!("error: {e:#}");
            std::process::exit(2);
        }
    }
}

fn resolve_set(spec: &str, seed: u64) -> anyhow::Result<GeomSet> {
    if let Some(name) = spec.strip_prefix("fixture:") {
        Ok(fixtures::set_by_name(name, seed)?)
    } else {
        Ok(wulfflab::io::read_set(Path::new(spec))?)
    }
}

fn resolve_shape(spec: &str) -> anyhow::Result<WulffShape> {
    if let Some(name) = spec.strip_prefix("body:") {
        Ok(fixtures::body_by_name(name)?)
    } else {
        let file: ShapeFile = read_json(Path::new(spec))?;
        Ok(decode_shape(&file)?)
    }
}

fn emit(out: &Option<PathBuf>, content: &str) -> anyhow::Result<()> {
    match out {
        Some(path) => std::fs::write(path, content)
            .with_context(|| format!("writing {}", path.display())),
        None => {
            print!("{content}");
            Ok(())
        }
    }
}

/// Domain point the john and trace commands anchor at.
fn anchor(set: &GeomSet) -> [f64; 3] {
    match set {
        GeomSet::Polygon(sys) => {
            let b = sys.barycenter();
            [b.x, b.y, 0.0]
        }
        GeomSet::Voxels(g) => {
            let c = [
                g.origin[0] + 0.5 * g.h * g.dims[0] as f64,
                g.origin[1] + 0.5 * g.h * g.dims[1] as f64,
                g.origin[2] + 0.5 * g.h * g.dims[2] as f64,
            ];
            c
        }
    }
}

fn body_outline(k: &WulffShape) -> anyhow::Result<GeomSet> {
    let verts = k
        .polygon()
        .context("body has no planar outline")?
        .to_vec();
    Ok(GeomSet::Polygon(PolygonSystem::single(verts)?))
}

fn run(cli: Cli) -> anyhow::Result<i32> {
    match cli.cmd {
        Cmd::BuildWulff { input, out } => {
            let tension: TensionSpec = read_json(&input)?;
            let shape = normalize_shape(&wulff_from_tension(&tension)?)?;
            emit(&out, &json_string(&encode_shape(&shape)?))?;
            Ok(0)
        }
        Cmd::Perimeter { input, shape, seed, out } => {
            let set = resolve_set(&input, seed)?;
            let k = resolve_shape(&shape)?;
            let p = anisotropic_perimeter(&set, &k)?;
            emit(&out, &json_string(&json!({ "perimeter": p })))?;
            Ok(0)
        }
        Cmd::Asymmetry { input, shape, seed, out } => {
            let set = resolve_set(&input, seed)?;
            let k = resolve_shape(&shape)?;
            let a = asymmetry(&set, &k)?;
            emit(
                &out,
                &json_string(&json!({
                    "value": a.value,
                    "translate": [a.translate.x, a.translate.y],
                })),
            )?;
            Ok(0)
        }
        Cmd::Deficit { input, shape, seed, out } => {
            let set = resolve_set(&input, seed)?;
            let k = resolve_shape(&shape)?;
            let d = isoperimetric_deficit(&set, &k)?;
            let m = wulff_margin(&set, &k)?;
            emit(&out, &json_string(&json!({ "deficit": d, "margin": m })))?;
            Ok(0)
        }
        Cmd::QwiSweep { shape, seed: _, out, format } => {
            let k = resolve_shape(&shape)?;
            let ts = [0.2, 0.1, 0.05, 0.025];
            let mut rows = Vec::new();
            for &t in &ts {
                let e = fixtures::ellipse_on_rays(t, 256, k.volume);
                let r = qwi_ratio(&e, &k)?;
                rows.push(vec![t, r.ratio, r.excess, r.asymmetry]);
            }
            match format {
                Format::Csv => emit(&out, &csv_string(&["t", "ratio", "excess", "asymmetry"], &rows)),
                Format::Json => {
                    let items: Vec<_> = rows
                        .iter()
                        .map(|r| {
                            json!({ "t": r[0], "ratio": r[1], "excess": r[2], "asymmetry": r[3] })
                        })
                        .collect();
                    emit(&out, &json_string(&items))
                }
                Format::Svg => {
                    let pts: Vec<(f64, f64)> = rows.iter().map(|r| (r[0], r[1])).collect();
                    emit(&out, &svg::render_scatter(&pts, "t", "ratio"))
                }
            }?;
            Ok(0)
        }
        Cmd::Whitney { input, max_level, seed, out, format } => {
            let dom = resolve_set(&input, seed)?;
            let w = decompose(&dom, max_level)?;
            match format {
                Format::Csv => emit(&out, &w.to_csv()),
                Format::Json => emit(
                    &out,
                    &json_string(&WhitneyFile { domain: encode_set(&dom), decomposition: w }),
                ),
                Format::Svg => emit(&out, &svg::render_whitney(&dom, &w)),
            }?;
            Ok(0)
        }
        Cmd::John { input, max_level, seed, out, format } => {
            let dom = resolve_set(&input, seed)?;
            let w = decompose(&dom, max_level)?;
            let est = estimate_john(&dom, anchor(&dom), &w)?;
            match format {
                Format::Json => emit(
                    &out,
                    &json_string(&JohnFile { domain: encode_set(&dom), estimate: est }),
                ),
                Format::Svg => emit(&out, &svg::render_john(&dom, &est)),
                Format::Csv => bail!("john reports are json or svg"),
            }?;
            Ok(0)
        }
        Cmd::Trace { input, max_level, seed, out, format } => {
            let dom = resolve_set(&input, seed)?;
            let w = decompose(&dom, max_level)?;
            let suite = fixtures::trace_suite();
            let rep = trace_constant(&dom, &suite, &w, anchor(&dom), 800)?;
            match format {
                Format::Json => emit(&out, &json_string(&rep)),
                Format::Csv => {
                    let mut s = String::from("label,lhs,rhs,ratio,shift\n");
                    for f in &rep.fields {
                        s.push_str(&format!(
                            "{},{},{},{},{}\n",
                            f.label, f.lhs, f.rhs, f.ratio, f.shift
                        ));
                    }
                    emit(&out, &s)
                }
                Format::Svg => bail!("trace reports are json or csv"),
            }?;
            Ok(0)
        }
        Cmd::Select { input, shape, seed, tol, out, format } => {
            let set = resolve_set(&input, seed)?;
            let k = resolve_shape(&shape)?;
            let mut problem = SelectionProblem::new(set, k)?;
            if let Some(t) = tol {
                problem.solver.tolerance = t;
            }
            let res = solve_selection(&problem)?;
            match format {
                Format::Json => {
                    let file = SelectFile {
                        input: encode_set(&problem.input_set),
                        body: encode_shape(&problem.shape)?,
                        minimizer: encode_set(&res.minimizer),
                        lambda_k: res.lambda_k,
                        energies: res.energies,
                        checks: res.checks,
                        converged: res.converged,
                        fell_back: res.fell_back,
                    };
                    emit(&out, &json_string(&file))
                }
                Format::Svg => {
                    let body = body_outline(&problem.shape)?;
                    emit(
                        &out,
                        &svg::render_sets(&[
                            ("input", &problem.input_set),
                            ("minimizer", &res.minimizer),
                            ("body", &body),
                        ]),
                    )
                }
                Format::Csv => bail!("select reports are json or svg"),
            }?;
            Ok(0)
        }
        Cmd::Verify { suite, out, format } => {
            let reports = run_suite(&suite)?;
            let mut all = true;
            for r in &reports {
                println!("{}", r.line());
                all &= r.passed;
            }
            if let Some(path) = out {
                let content = match format {
                    Format::Json => {
                        let items: Vec<_> = reports
                            .iter()
                            .map(|r| {
                                json!({ "name": r.name, "passed": r.passed, "detail": r.detail })
                            })
                            .collect();
                        json_string(&items)
                    }
                    Format::Csv => {
                        let mut s = String::from("name,passed\n");
                        for r in &reports {
                            s.push_str(&format!("{},{}\n", r.name, r.passed));
                        }
                        s
                    }
                    Format::Svg => bail!("verify reports are json or csv"),
                };
                emit(&Some(path), &content)?;
            }
            Ok(if all { 0 } else { 1 })
        }
        Cmd::Plot { input, out } => {
            let text = std::fs::read_to_string(&input)
                .with_context(|| format!("reading {}", input.display()))?;
            let svg_text = render_report(&text)
                .with_context(|| format!("{} is not a renderable report", input.display()))?;
            emit(&out, &svg_text)?;
            Ok(0)
        }
    }
}

/// Dispatch on report content: whitney and john and select files carry
/// marker fields; anything else must parse as a two-column sweep CSV.
fn render_report(text: &str) -> anyhow::Result<String> {
    if let Ok(value) = serde_json::from_str::<serde_json::Value>(text) {
        if value.get("decomposition").is_some() {
            let file: WhitneyFile = serde_json::from_value(value)?;
            let dom = decode_set(&file.domain)?;
            return Ok(svg::render_whitney(&dom, &file.decomposition));
        }
        if value.get("estimate").is_some() {
            let file: JohnFile = serde_json::from_value(value)?;
            let dom = decode_set(&file.domain)?;
            return Ok(svg::render_john(&dom, &file.estimate));
        }
        if value.get("minimizer").is_some() {
            let file: SelectFile = serde_json::from_value(value)?;
            let input = decode_set(&file.input)?;
            let minimizer = decode_set(&file.minimizer)?;
            let body = body_outline(&decode_shape(&file.body)?)?;
            return Ok(svg::render_sets(&[
                ("input", &input),
                ("minimizer", &minimizer),
                ("body", &body),
            ]));
        }
        bail!("json report has none of the known marker fields");
    }
    scatter_from_csv(text)
}

fn scatter_from_csv(text: &str) -> anyhow::Result<String> {
    let mut lines = text.lines();
    let header = lines.next().context("empty report")?;
    let labels: Vec<&str> = header.split(',').collect();
    if labels.len() < 2 {
        bail!("sweep csv needs at least two columns");
    }
    let mut pts = Vec::new();
    for line in lines {
        let cols: Vec<&str> = line.split(',').collect();
        if cols.len() < 2 {
            continue;
        }
        if let (Ok(x), Ok(y)) = (cols[0].parse::<f64>(), cols[1].parse::<f64>()) {
            pts.push((x, y));
        }
    }
    if pts.is_empty() {
        bail!("no numeric rows in the sweep csv");
    }
    Ok(svg::render_scatter(&pts, labels[0], labels[1]))
}
