//! Command-line surface: evaluate surface tensions, construct frozen
//! boundaries, reconstruct heights, minimize the dimer energy, sample Aztec
//! tilings, and run the verification suite.
//!
//! Exit codes: 0 success, 2 input error, 3 validation failure, 4 numerical
//! non-convergence.

use clap::{Args, Parser, Subcommand};
use dimers::error::Error;
use dimers::frozen::FrozenBoundaryModel;
use dimers::geom::GradientPolygon;
use dimers::height::{integrate_h, ArcAssignment, GridSpec};
use dimers::io;
use dimers::tension::{
    calibrate_arcs, lozenge_grad_sigma, CalibrationTarget, LozengeSurfaceTension, SurfaceTension,
};
use dimers::variational::{
    self, aztec_diamond_domain, example_71, extract_liquid_region, lozenge_hexagon,
    DiscreteEnergyProblem, MinimizeOptions,
};
use num_complex::Complex64;
use serde::Serialize;
use std::path::PathBuf;
use std::sync::Arc;

#[derive(Parser)]
#[command(name = "dimers", version, about = "Dimer limit shapes: surface tensions, frozen boundaries, heights, minimization, and an Aztec sampling oracle")]
struct Cli {
    /// Worker threads for internal parallelism (1 reproduces bit-exactly).
    #[arg(long, global = true, default_value_t = 0)]
    threads: usize,
    /// Output directory.
    #[arg(long, global = true, default_value = "out")]
    out: PathBuf,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Evaluate σ and ∇σ over a grid; optionally at a single point.
    Sigma(SigmaArgs),
    /// Build a frozen-boundary model, run the checks, export SVG/CSV/JSON.
    Boundary(BoundaryArgs),
    /// Reconstruct the limit height field on a liquid domain.
    Height(HeightArgs),
    /// Minimize the dimer energy on a polygonal domain.
    Minimize(MinimizeArgs),
    /// Sample uniform Aztec-diamond tilings (domino shuffling).
    Sample(SampleArgs),
    /// Run the acceptance cross-validation suite.
    Verify(VerifyArgs),
}

#[derive(Args)]
struct SigmaArgs {
    /// Model: lozenge | triangle-harmonic | square-harmonic, or a JSON file
    /// via --input.
    #[arg(long, default_value = "lozenge")]
    model: String,
    #[arg(long)]
    input: Option<PathBuf>,
    /// Grid resolution (rows = grid²).
    #[arg(long, default_value_t = 64)]
    grid: usize,
    /// Evaluate at a single point "x,y" instead of a grid.
    #[arg(long)]
    at: Option<String>,
}

#[derive(Args)]
struct BoundaryArgs {
    /// Canonical epicycloid degree (shortcut without --input).
    #[arg(long)]
    canonical: Option<usize>,
    /// JSON model description.
    #[arg(long)]
    input: Option<PathBuf>,
    #[arg(long, default_value_t = 2048)]
    samples: usize,
}

#[derive(Args)]
struct HeightArgs {
    /// Assignment: aztec | lozenge-disc.
    #[arg(long, default_value = "aztec")]
    model: String,
    /// Grid spacing 1/n.
    #[arg(long, default_value_t = 64)]
    grid: usize,
}

#[derive(Args)]
struct MinimizeArgs {
    /// Problem JSON (domain vertices, labels, N corners, grid, options).
    #[arg(long)]
    input: Option<PathBuf>,
    /// Built-in presets: aztec-square | lozenge-hexagon | pentagon-trivial.
    #[arg(long)]
    preset: Option<String>,
    /// Grid spacing 1/n (presets only).
    #[arg(long, default_value_t = 64)]
    grid: usize,
    #[arg(long, default_value_t = 2000)]
    max_iters: usize,
    #[arg(long, default_value_t = 1e-10)]
    tol: f64,
    /// Liquid-region threshold on dist(∇h, ∂N).
    #[arg(long, default_value_t = 0.05)]
    threshold: f64,
}

#[derive(Args)]
struct SampleArgs {
    /// Diamond order.
    #[arg(long, default_value_t = 64)]
    n: usize,
    #[arg(long, default_value_t = 200)]
    samples: usize,
    #[arg(long, default_value_t = 1)]
    seed: u64,
    /// Also dump the raw dominoes of the first tiling.
    #[arg(long, default_value_t = false)]
    dump: bool,
}

#[derive(Args)]
struct VerifyArgs {
    /// Run only these comma-separated criteria ids (default: all).
    #[arg(long)]
    only: Option<String>,
}

#[derive(Serialize)]
struct VerifyReport {
    schema: u32,
    all_pass: bool,
    criteria: Vec<dimers::acceptance::CriterionResult>,
}

fn main() {
    let cli = Cli::parse();
    if cli.threads > 0 {
        rayon::ThreadPoolBuilder::new()
            .num_threads(cli.threads)
            .build_global()
            .ok();
    }
    if let Err(e) = std::fs::create_dir_all(&cli.out) {
        eprintln!("error: cannot create output directory: {e}");
        std::process::exit(2);
    }
    let code = match run(&cli) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e}");
            e.exit_code()
        }
    };
    std::process::exit(code);
}

fn parse_point(s: &str) -> Result<Complex64, Error> {
    let parts: Vec<&str> = s.split(',').collect();
    if parts.len() != 2 {
        return Err(Error::Validation(format!("expected \"x,y\", got `{s}`")));
    }
    let x: f64 = parts[0]
        .trim()
        .parse()
        .map_err(|_| Error::Validation(format!("bad number `{}`", parts[0])))?;
    let y: f64 = parts[1]
        .trim()
        .parse()
        .map_err(|_| Error::Validation(format!("bad number `{}`", parts[1])))?;
    Ok(Complex64::new(x, y))
}

fn run(cli: &Cli) -> Result<i32, Error> {
    match &cli.command {
        Command::Sigma(args) => cmd_sigma(cli, args),
        Command::Boundary(args) => cmd_boundary(cli, args),
        Command::Height(args) => cmd_height(cli, args),
        Command::Minimize(args) => cmd_minimize(cli, args),
        Command::Sample(args) => cmd_sample(cli, args),
        Command::Verify(args) => cmd_verify(cli, args),
    }
}

fn build_tension(model: &str, input: &Option<PathBuf>) -> Result<Box<dyn SurfaceTension>, Error> {
    if let Some(path) = input {
        let text = std::fs::read_to_string(path)?;
        let doc: io::TensionJson = serde_json::from_str(&text)?;
        return Ok(Box::new(doc.into_tension()?));
    }
    match model {
        "lozenge" => Ok(Box::new(LozengeSurfaceTension::new())),
        "triangle-harmonic" => {
            let tri = GradientPolygon::lozenge_triangle();
            let cal = calibrate_arcs(&tri, CalibrationTarget::Symmetric)?;
            let anchor = cal.tension.anchor_from_boundary(&[0.0; 3])?;
            Ok(Box::new(
                cal.tension.with_sigma_ref((tri.centroid(), anchor)),
            ))
        }
        "square-harmonic" => {
            let sq = GradientPolygon::domino_square();
            let cal = calibrate_arcs(&sq, CalibrationTarget::Symmetric)?;
            let anchor = cal.tension.anchor_from_boundary(&[0.0; 4])?;
            Ok(Box::new(cal.tension.with_sigma_ref((sq.centroid(), anchor))))
        }
        other => Err(Error::Validation(format!("unknown σ model `{other}`"))),
    }
}

fn cmd_sigma(cli: &Cli, args: &SigmaArgs) -> Result<i32, Error> {
    let st = build_tension(&args.model, &args.input)?;
    if let Some(at) = &args.at {
        let p = parse_point(at)?;
        // boundary/exterior points are singular for the gradient
        if st.polygon().signed_edge_distance(p) <= 0.0 {
            return Err(Error::Domain(format!(
                "boundary singularity: {p} is not interior to N"
            )));
        }
        let sigma = st.sigma(p)?;
        let grad = st.grad(p)?;
        println!(
            "sigma({},{}) = {}",
            io::fmt(p.re),
            io::fmt(p.im),
            io::fmt(sigma)
        );
        println!("grad = ({}, {})", io::fmt(grad.re), io::fmt(grad.im));
        return Ok(0);
    }
    let csv = cli.out.join("sigma.csv");
    io::write_sigma_csv(&csv, st.as_ref(), args.grid)?;
    println!("wrote {} ({}² rows)", csv.display(), args.grid);
    // cross-check against the closed form when evaluating the triangle model
    if args.model == "triangle-harmonic" {
        let mut worst = 0.0f64;
        for i in 0..24 {
            for j in 0..24 {
                let s = 0.06 + 0.8 * i as f64 / 24.0;
                let t = 0.06 + 0.8 * j as f64 / 24.0;
                if s + t > 0.92 {
                    continue;
                }
                let g = st.grad(Complex64::new(s, t))?;
                let g0 = lozenge_grad_sigma(s, t)?;
                worst = worst.max((g - g0).norm());
            }
        }
        println!("max |Δ∇σ| against the lozenge closed form: {}", io::fmt(worst));
        if worst > 1e-5 {
            return Err(Error::Validation(format!(
                "harmonic model disagrees with the closed form: {worst:.3e}"
            )));
        }
    }
    Ok(0)
}

#[derive(Serialize)]
struct BoundaryReport {
    schema: u32,
    degree: usize,
    cusp_count: usize,
    cusps: Vec<io::CuspJson>,
    univalence_pass: bool,
    winding: i64,
    self_reflect_residual: f64,
    self_reflect_pass: bool,
    pole_free_pass: bool,
    tangent_identity_residual: f64,
}

fn cmd_boundary(cli: &Cli, args: &BoundaryArgs) -> Result<i32, Error> {
    let model: FrozenBoundaryModel = if let Some(d) = args.canonical {
        FrozenBoundaryModel::canonical(d)?
    } else if let Some(path) = &args.input {
        let text = std::fs::read_to_string(path)?;
        let doc: io::BoundaryInputJson = serde_json::from_str(&text)?;
        doc.build()?
    } else {
        return Err(Error::Validation(
            "boundary needs --canonical <d> or --input <json>".into(),
        ));
    };
    let report_raw = model.check_characterization();
    let cusps = match model.find_cusps() {
        Ok(c) => c,
        Err(e) if report_raw.all_pass() => return Err(e),
        Err(_) => Vec::new(),
    };
    let tangent_residual = model.tangent_identity_check(2048, 1e-3).unwrap_or(f64::NAN);
    io::write_boundary_csv(&cli.out.join("boundary.csv"), &model, args.samples)?;
    io::write_boundary_svg(&cli.out.join("boundary.svg"), &model, args.samples)?;
    io::write_json(&cli.out.join("model.json"), &io::ModelJson::from_model(&model))?;
    let report = BoundaryReport {
        schema: 1,
        degree: model.degree(),
        cusp_count: cusps.len(),
        cusps: cusps
            .iter()
            .map(|c| io::CuspJson {
                angle: c.angle,
                point: [c.point.re, c.point.im],
            })
            .collect(),
        univalence_pass: report_raw.univalence_pass,
        winding: report_raw.winding,
        self_reflect_residual: report_raw.self_reflect_residual,
        self_reflect_pass: report_raw.self_reflect_pass,
        pole_free_pass: report_raw.pole_free_pass,
        tangent_identity_residual: tangent_residual,
    };
    io::write_json(&cli.out.join("report.json"), &report)?;
    println!(
        "degree {}: {} cusps; univalence {}, self-reflectivity residual {:.3e}, poles {}",
        report.degree,
        report.cusp_count,
        report.univalence_pass,
        report.self_reflect_residual,
        report.pole_free_pass
    );
    if !(report.univalence_pass && report.self_reflect_pass && report.pole_free_pass) {
        return Ok(3);
    }
    Ok(0)
}

fn cmd_height(cli: &Cli, args: &HeightArgs) -> Result<i32, Error> {
    let model = FrozenBoundaryModel::canonical(2)?;
    let assignment = match args.model.as_str() {
        "aztec" => ArcAssignment::aztec(),
        "lozenge-disc" => ArcAssignment::lozenge_on_disc(),
        other => {
            return Err(Error::Validation(format!(
                "unknown height model `{other}` (aztec | lozenge-disc)"
            )))
        }
    };
    let field = integrate_h(
        &model,
        &assignment,
        GridSpec {
            spacing: 1.0 / args.grid as f64,
            padding: 0.05,
        },
    )?;
    let path = cli.out.join("height.csv");
    io::write_height_csv(&path, &field)?;
    println!(
        "wrote {} ({}x{} nodes, max plaquette curl {:.3e})",
        path.display(),
        field.nx,
        field.ny,
        field.max_plaquette_curl
    );
    Ok(0)
}

fn cmd_minimize(cli: &Cli, args: &MinimizeArgs) -> Result<i32, Error> {
    let spacing = 1.0 / args.grid as f64;
    let (domain, tension, spacing, shrink, opts): (
        _,
        Arc<dyn SurfaceTension>,
        f64,
        f64,
        MinimizeOptions,
    ) = if let Some(path) = &args.input {
        let text = std::fs::read_to_string(path)?;
        let doc: io::ProblemJson = serde_json::from_str(&text)?;
        let domain = doc.domain()?;
        let tension: Arc<dyn SurfaceTension> = match doc.sigma.as_str() {
            "lozenge" => Arc::new(LozengeSurfaceTension::new()),
            "square-harmonic" => {
                let sq = GradientPolygon::domino_square();
                let cal = calibrate_arcs(&sq, CalibrationTarget::Symmetric)?;
                let anchor = cal.tension.anchor_from_boundary(&[0.0; 4])?;
                let st = cal.tension.with_sigma_ref((sq.centroid(), anchor));
                Arc::new(dimers::tension::TabulatedTension::build(
                    &st, doc.shrink, 257,
                )?)
            }
            other => return Err(Error::Validation(format!("unknown σ `{other}`"))),
        };
        (
            domain,
            tension,
            doc.spacing,
            doc.shrink,
            MinimizeOptions {
                max_iters: doc.max_iters,
                tol: doc.tol,
                seed_field: None,
            },
        )
    } else {
        let preset = args.preset.as_deref().unwrap_or("aztec-square");
        let opts = MinimizeOptions {
            max_iters: args.max_iters,
            tol: args.tol,
            seed_field: None,
        };
        match preset {
            "aztec-square" => {
                let sq = GradientPolygon::domino_square();
                let cal = calibrate_arcs(&sq, CalibrationTarget::Symmetric)?;
                let anchor = cal.tension.anchor_from_boundary(&[0.0; 4])?;
                let st = cal.tension.with_sigma_ref((sq.centroid(), anchor));
                let table = dimers::tension::TabulatedTension::build(&st, 1e-3, 257)?;
                (
                    aztec_diamond_domain()?,
                    Arc::new(table) as Arc<dyn SurfaceTension>,
                    spacing,
                    1e-3,
                    opts,
                )
            }
            "lozenge-hexagon" => (
                lozenge_hexagon(1.0, 1.0, 1.0)?,
                Arc::new(LozengeSurfaceTension::new()) as Arc<dyn SurfaceTension>,
                spacing,
                1e-3,
                opts,
            ),
            "pentagon-trivial" => (
                example_71::cut_domain()?,
                Arc::new(LozengeSurfaceTension::new()) as Arc<dyn SurfaceTension>,
                spacing,
                1e-3,
                opts,
            ),
            other => {
                return Err(Error::Validation(format!(
                    "unknown preset `{other}` (aztec-square | lozenge-hexagon | pentagon-trivial)"
                )))
            }
        }
    };
    let problem = DiscreteEnergyProblem {
        domain,
        tension,
        spacing,
        shrink,
    };
    let out = variational::minimize(&problem, &opts)?;
    io::write_height_csv(&cli.out.join("solution.csv"), &out.field)?;
    io::write_energy_trace_csv(&cli.out.join("trace.csv"), &out.energy_trace)?;
    let region = extract_liquid_region(&out.field, problem.tension.polygon(), args.threshold);
    io::write_mask_pbm(
        &cli.out.join("liquid.pbm"),
        &region.cell_mask,
        region.ncx,
        region.ncy,
    )?;
    #[derive(Serialize)]
    struct MinimizeReport {
        schema: u32,
        iterations: usize,
        converged: bool,
        energy: f64,
        liquid_components: usize,
        euler_characteristic: i64,
        liquid_area: f64,
    }
    io::write_json(
        &cli.out.join("report.json"),
        &MinimizeReport {
            schema: 1,
            iterations: out.iterations,
            converged: out.converged,
            energy: *out.energy_trace.last().unwrap(),
            liquid_components: region.components,
            euler_characteristic: region.euler_characteristic,
            liquid_area: region.liquid_area,
        },
    )?;
    println!(
        "energy {:.9} after {} iterations; liquid: {} component(s), area {:.4}",
        out.energy_trace.last().unwrap(),
        out.iterations,
        region.components,
        region.liquid_area
    );
    if !out.converged {
        return Err(Error::NonConvergence {
            iters: out.iterations,
            residual: f64::NAN,
        });
    }
    Ok(0)
}

fn cmd_sample(cli: &Cli, args: &SampleArgs) -> Result<i32, Error> {
    if args.dump {
        let tiling = dimers::aztec::sample_tiling(args.n, args.seed);
        let path = cli.out.join("tiling.csv");
        io::write_tiling_dump(&path, &tiling)?;
        println!("wrote {} ({} dominoes)", path.display(), tiling.dominoes.len());
    }
    let field = dimers::aztec::empirical_density(args.n, args.samples, args.seed);
    let path = cli.out.join("density.csv");
    io::write_empirical_csv(&path, &field)?;
    println!(
        "wrote {} (n = {}, {} samples)",
        path.display(),
        args.n,
        args.samples
    );
    Ok(0)
}

fn cmd_verify(cli: &Cli, args: &VerifyArgs) -> Result<i32, Error> {
    let only: Option<Vec<usize>> = args.only.as_ref().map(|s| {
        s.split(',')
            .filter_map(|t| t.trim().parse().ok())
            .collect()
    });
    let all = [
        dimers::acceptance::criterion_1 as fn() -> dimers::acceptance::CriterionResult,
        dimers::acceptance::criterion_2,
        dimers::acceptance::criterion_3,
        dimers::acceptance::criterion_4,
        dimers::acceptance::criterion_5,
        dimers::acceptance::criterion_6,
        dimers::acceptance::criterion_7,
        dimers::acceptance::criterion_8,
        dimers::acceptance::criterion_9,
        dimers::acceptance::criterion_10,
        dimers::acceptance::criterion_11,
    ];
    let mut results = Vec::new();
    for (i, f) in all.iter().enumerate() {
        if let Some(ids) = &only {
            if !ids.contains(&(i + 1)) {
                continue;
            }
        }
        let r = f();
        println!(
            "criterion {:>2} [{}] {} ({:.2}s): {}",
            r.id,
            if r.pass { "PASS" } else { "FAIL" },
            r.name,
            r.seconds,
            r.details
        );
        results.push(r);
    }
    let all_pass = results.iter().all(|r| r.pass);
    io::write_json(
        &cli.out.join("verify.json"),
        &VerifyReport {
            schema: 1,
            all_pass,
            criteria: results,
        },
    )?;
    if all_pass {
        println!("all criteria passed");
        Ok(0)
    } else {
        println!("some criteria FAILED");
        Ok(3)
    }
}
