//! Command-line front end: weight certification, oscillation fits, kernel
//! and symbol verification, maximal-operator exports, and campaigns.
//!
//! Exit codes: 0 when all requested checks pass, 1 when any check fails or
//! a verification flags divergence, 2 on configuration or usage errors.

use std::io::Write;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use mlineq_core::bmo::{self, SymbolRecipe};
use mlineq_core::czkernel::{
    model_kernel, power_kernel, size_sample_plan, smoothness_sample_plan, verify_size,
    verify_smoothness,
};
use mlineq_core::grid::{BallFamily, GridFunction, GridSpec};
use mlineq_core::harness::{self, run_campaign, CampaignConfig};
use mlineq_core::maximal::{
    critical_cover, critical_maximal, local_maximal, local_product_maximal,
    local_scalar_maximal, local_sharp_maximal, MaximalParams,
};
use mlineq_core::pseudo::{
    class_check, constant_symbol, growth_symbol, model_symbol, shell_samples,
};
use mlineq_core::weights::{
    certify_vector_refined, certify_weight_refined, ExponentVector, WeightRecipe, WeightVector,
};

#[derive(Parser)]
#[command(name = "mlineq", about = "weighted-inequality toolkit", version)]
struct Cli {
    /// Campaign or check configuration file (JSON).
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// Output path for reports.
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    /// Grid as `n,L,G`.
    #[arg(long, global = true, value_parser = parse_grid)]
    grid: Option<(usize, f64, usize)>,
    /// Seed for every pseudo-random draw.
    #[arg(long, global = true)]
    seed: Option<u64>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Certify a weight recipe (or vector of recipes) in the growth class.
    CertifyWeight(CertifyArgs),
    /// Fit the oscillation envelope of a symbol recipe.
    BmoFit(BmoArgs),
    /// Verify the size and smoothness conditions of a kernel.
    VerifyKernel(KernelArgs),
    /// Check a symbol against its derivative-bound class.
    VerifySymbol(SymbolArgs),
    /// Evaluate a maximal operator and export the grid.
    Maximal(MaximalArgs),
    /// Run a bounded-ratio campaign from a config file.
    Campaign,
}

#[derive(Args)]
struct CertifyArgs {
    /// Weight recipe as JSON (repeat for a vector of weights).
    #[arg(long = "recipe", required = true)]
    recipes: Vec<String>,
    /// Exponents, one per recipe.
    #[arg(long, value_delimiter = ',', required = true)]
    p: Vec<f64>,
    #[arg(long, value_delimiter = ',')]
    radii: Option<Vec<f64>>,
    #[arg(long, default_value_t = 8)]
    stride: usize,
}

#[derive(Args)]
struct BmoArgs {
    /// Symbol recipe as JSON, e.g. `{"kind":"linear","slope":1.0}`.
    #[arg(long)]
    symbol: String,
    #[arg(long, value_delimiter = ',')]
    radii: Option<Vec<f64>>,
    #[arg(long, default_value_t = 8)]
    stride: usize,
}

#[derive(Args)]
struct KernelArgs {
    /// Kernel family: `model` or `power` (negative fixture).
    #[arg(long, default_value = "model")]
    kernel: String,
    #[arg(long, default_value_t = 2)]
    m: usize,
    #[arg(long, default_value_t = 1)]
    n: usize,
    #[arg(long, default_value_t = 1.0)]
    scale: f64,
    /// Size-condition exponents.
    #[arg(long, value_delimiter = ',', default_value = "2,3,4")]
    exponents: Vec<f64>,
    /// Smoothness-condition exponents.
    #[arg(long, value_delimiter = ',', default_value = "1,2")]
    smoothness_exponents: Vec<f64>,
    #[arg(long, default_value_t = 4.0)]
    region: f64,
    #[arg(long, default_value_t = 600)]
    count: usize,
}

#[derive(Args)]
struct SymbolArgs {
    /// Symbol family: `model`, `constant` or `growth` (negative fixture).
    #[arg(long, default_value = "model")]
    symbol: String,
    #[arg(long, default_value_t = 2)]
    m: usize,
    #[arg(long, default_value_t = 1)]
    n: usize,
    #[arg(long, default_value_t = 7)]
    shells: usize,
    #[arg(long, default_value_t = 40)]
    per_shell: usize,
}

#[derive(Args)]
struct MaximalArgs {
    /// Operator: `local`, `sharp`, `critical`, `product`, `local-product`
    /// or `scalar-local`.
    #[arg(long, default_value = "local")]
    operator: String,
    /// Test-function family for the inputs.
    #[arg(long, default_value = "gaussian-packet")]
    family: String,
    /// Instance index within the family.
    #[arg(long, default_value_t = 0)]
    instance: usize,
    #[arg(long, default_value_t = 2)]
    m: usize,
    #[arg(long, default_value_t = 1.0)]
    s: f64,
    #[arg(long, default_value_t = 4.0)]
    alpha: f64,
    /// Output format: `csv` or `bin` (little-endian f64 values).
    #[arg(long, default_value = "csv")]
    format: String,
}

fn parse_grid(text: &str) -> Result<(usize, f64, usize), String> {
    let parts: Vec<&str> = text.split(',').collect();
    if parts.len() != 3 {
        return Err("expected n,L,G".into());
    }
    Ok((
        parts[0].parse().map_err(|e| format!("n: {e}"))?,
        parts[1].parse().map_err(|e| format!("L: {e}"))?,
        parts[2].parse().map_err(|e| format!("G: {e}"))?,
    ))
}

fn default_radii(grid: &GridSpec) -> Vec<f64> {
    BallFamily::dyadic_radii(grid)
}

fn write_text(path: Option<&PathBuf>, text: &str) -> std::io::Result<()> {
    match path {
        Some(p) => {
            if let Some(dir) = p.parent() {
                if !dir.as_os_str().is_empty() {
                    std::fs::create_dir_all(dir)?;
                }
            }
            std::fs::write(p, text)
        }
        None => std::io::stdout().write_all(text.as_bytes()),
    }
}

fn run() -> Result<u8, String> {
    let cli = Cli::parse();
    let grid_params = cli.grid.unwrap_or((1, 8.0, 1024));
    let grid = GridSpec::new(grid_params.0, grid_params.1, grid_params.2)
        .map_err(|e| format!("grid: {e}"))?;
    let seed = cli.seed.unwrap_or(7);

    match &cli.command {
        Command::CertifyWeight(args) => {
            let recipes: Vec<WeightRecipe> = args
                .recipes
                .iter()
                .map(|r| serde_json::from_str(r).map_err(|e| format!("recipe: {e}")))
                .collect::<Result<_, _>>()?;
            if recipes.len() != args.p.len() {
                return Err(format!(
                    "{} recipes but {} exponents",
                    recipes.len(),
                    args.p.len()
                ));
            }
            let radii = args.radii.clone().unwrap_or_else(|| default_radii(&grid));
            let fine_grid = grid.refine();
            let fam = BallFamily::new(&grid, &radii, args.stride).map_err(|e| e.to_string())?;
            let fam_fine = BallFamily::new(&fine_grid, &radii, args.stride * 2)
                .map_err(|e| e.to_string())?;

            let cert = if recipes.len() == 1 {
                let w = recipes[0].materialize(grid).map_err(|e| e.to_string())?;
                let wf = recipes[0]
                    .materialize(fine_grid)
                    .map_err(|e| e.to_string())?;
                certify_weight_refined((&w, &fam), (&wf, &fam_fine), args.p[0])
                    .map_err(|e| e.to_string())?
            } else {
                let ev = ExponentVector::new(&args.p).map_err(|e| e.to_string())?;
                let wv = WeightVector::new(
                    recipes
                        .iter()
                        .map(|r| r.materialize(grid))
                        .collect::<Result<_, _>>()
                        .map_err(|e: mlineq_core::Error| e.to_string())?,
                    ev.clone(),
                )
                .map_err(|e| e.to_string())?;
                let wv_fine = WeightVector::new(
                    recipes
                        .iter()
                        .map(|r| r.materialize(fine_grid))
                        .collect::<Result<_, _>>()
                        .map_err(|e: mlineq_core::Error| e.to_string())?,
                    ev,
                )
                .map_err(|e| e.to_string())?;
                certify_vector_refined((&wv, &fam), (&wv_fine, &fam_fine))
                    .map_err(|e| e.to_string())?
            };

            let mut csv = String::from("recipe,p,c,theta,argmax_center,argmax_radius,in_class\n");
            let (c, theta) = cert
                .fit
                .map(|f| (f.c, f.theta))
                .unwrap_or((f64::NAN, f64::NAN));
            let ball = cert
                .argmax_ball
                .map(|b| (b.center.x, b.radius))
                .unwrap_or((f64::NAN, f64::NAN));
            csv.push_str(&format!(
                "\"{}\",\"{:?}\",{},{},{},{},{}\n",
                args.recipes.join(";").replace('"', "\"\""),
                args.p,
                c,
                theta,
                ball.0,
                ball.1,
                cert.in_class
            ));
            write_text(cli.out.as_ref(), &csv).map_err(|e| e.to_string())?;
            eprintln!(
                "certificate: C = {c:.6}, theta = {theta:.4}, in tested class: {}",
                cert.in_class
            );
            Ok(if cert.in_class { 0 } else { 1 })
        }
        Command::BmoFit(args) => {
            let recipe: SymbolRecipe =
                serde_json::from_str(&args.symbol).map_err(|e| format!("symbol: {e}"))?;
            let radii = args.radii.clone().unwrap_or_else(|| default_radii(&grid));
            let fam = BallFamily::new(&grid, &radii, args.stride).map_err(|e| e.to_string())?;
            let mut sym = recipe.materialize(grid).map_err(|e| e.to_string())?;
            let fit = bmo::fit(&mut sym, &fam).map_err(|e| e.to_string())?;
            let mut csv = String::from("symbol,c,theta\n");
            csv.push_str(&format!(
                "\"{}\",{},{}\n",
                args.symbol.replace('"', "\"\""),
                fit.c,
                fit.theta
            ));
            write_text(cli.out.as_ref(), &csv).map_err(|e| e.to_string())?;
            eprintln!("oscillation fit: C = {:.6}, theta = {:.4}", fit.c, fit.theta);
            Ok(0)
        }
        Command::VerifyKernel(args) => {
            let kernel = match args.kernel.as_str() {
                "model" => model_kernel(args.m, args.n, args.scale),
                "power" => power_kernel(args.m, args.n),
                other => return Err(format!("unknown kernel '{other}'")),
            }
            .map_err(|e| e.to_string())?;
            let (sb, sd) = size_sample_plan(args.m, args.n, args.region, args.count, seed);
            let size = verify_size(&kernel, &sb, &sd, &args.exponents);
            let (pb, pd) = smoothness_sample_plan(args.m, args.n, args.region, args.count, seed);
            let smooth = verify_smoothness(&kernel, &pb, &pd, &args.smoothness_exponents);

            let mut csv = String::from("condition,N,c_base,c_extended,divergent\n");
            for e in &size.entries {
                csv.push_str(&format!(
                    "size,{},{},{},{}\n",
                    e.exponent, e.c_base, e.c_extended, e.divergent
                ));
            }
            for e in &smooth.entries {
                csv.push_str(&format!(
                    "smoothness,{},{},{},{}\n",
                    e.exponent, e.c_base, e.c_extended, e.divergent
                ));
            }
            write_text(cli.out.as_ref(), &csv).map_err(|e| e.to_string())?;
            let bad = size.any_divergent() || smooth.any_divergent();
            eprintln!(
                "size: {} entries, smoothness: {} entries ({} rejected), divergent: {bad}",
                size.entries.len(),
                smooth.entries.len(),
                smooth.rejected
            );
            Ok(if bad { 1 } else { 0 })
        }
        Command::VerifySymbol(args) => {
            let symbol = match args.symbol.as_str() {
                "model" => model_symbol(args.m, args.n),
                "constant" => constant_symbol(args.m, args.n),
                "growth" => growth_symbol(args.m, args.n),
                other => return Err(format!("unknown symbol '{other}'")),
            }
            .map_err(|e| e.to_string())?;
            let samples = shell_samples(
                args.m,
                args.n,
                grid.half_width(),
                args.shells,
                args.per_shell,
                seed,
            );
            let table = class_check(&symbol, &samples, 2).map_err(|e| e.to_string())?;
            let mut csv = String::from("alpha,beta,c,divergent\n");
            for row in &table.rows {
                csv.push_str(&format!(
                    "\"{:?}\",\"{:?}\",{},{}\n",
                    row.alpha, row.beta, row.c_extended, row.divergent
                ));
            }
            write_text(cli.out.as_ref(), &csv).map_err(|e| e.to_string())?;
            let bad = table.any_divergent();
            eprintln!(
                "{} derivative rows, {} skipped samples, divergent: {bad}",
                table.rows.len(),
                table.skipped
            );
            Ok(if bad { 1 } else { 0 })
        }
        Command::Maximal(args) => {
            let kind = match args.family.as_str() {
                "gaussian-packet" => harness::FamilyKind::GaussianPacket,
                "trig-band" => harness::FamilyKind::TrigBand,
                "bump-train" => harness::FamilyKind::BumpTrain,
                other => return Err(format!("unknown family '{other}'")),
            };
            let fam_cfg = harness::FamilyConfig {
                kind,
                count: args.instance + 1,
                seed,
            };
            let instances = harness::generate_family(
                &fam_cfg,
                args.m,
                grid.dim(),
                grid.half_width(),
                grid.points_per_axis(),
            );
            let fvec: Vec<GridFunction<f64>> = instances[args.instance]
                .iter()
                .map(|f| f.materialize(grid))
                .collect::<Result<_, _>>()
                .map_err(|e: mlineq_core::Error| e.to_string())?;
            let refs: Vec<&GridFunction<f64>> = fvec.iter().collect();

            let radii = default_radii(&grid);
            let family = BallFamily::new(&grid, &radii, 2).map_err(|e| e.to_string())?;
            let cover = critical_cover(&grid);
            let out = match args.operator.as_str() {
                "local" => local_maximal(refs[0], args.alpha, &family),
                "sharp" => local_sharp_maximal(refs[0], args.alpha, &family),
                "critical" => {
                    let params = MaximalParams::defaults(&grid, args.m, args.s)
                        .map_err(|e| e.to_string())?;
                    critical_maximal(&refs, &params, &cover)
                }
                "product" => mlineq_core::maximal::product_maximal(&refs, args.s, &family),
                "local-product" => local_product_maximal(&refs, args.s, &cover, &family),
                "scalar-local" => local_scalar_maximal(refs[0], args.s, &cover, &family),
                other => return Err(format!("unknown operator '{other}'")),
            }
            .map_err(|e| e.to_string())?;

            match args.format.as_str() {
                "csv" => {
                    let mut csv = String::from("x,y,value\n");
                    for i in 0..grid.num_points() {
                        let p = grid.point(i);
                        csv.push_str(&format!("{},{},{}\n", p.x, p.y, out.value(i)));
                    }
                    write_text(cli.out.as_ref(), &csv).map_err(|e| e.to_string())?;
                }
                "bin" => {
                    let mut bytes = Vec::with_capacity(8 * grid.num_points());
                    for v in out.values() {
                        bytes.extend_from_slice(&v.to_le_bytes());
                    }
                    match cli.out.as_ref() {
                        Some(p) => std::fs::write(p, &bytes).map_err(|e| e.to_string())?,
                        None => return Err("binary output needs --out".into()),
                    }
                }
                other => return Err(format!("unknown format '{other}'")),
            }
            Ok(0)
        }
        Command::Campaign => {
            let path = cli
                .config
                .as_ref()
                .ok_or_else(|| "campaign needs --config".to_string())?;
            let text = std::fs::read_to_string(path).map_err(|e| format!("config: {e}"))?;
            let mut cfg: CampaignConfig =
                serde_json::from_str(&text).map_err(|e| format!("config: {e}"))?;
            if let Some((n, l, g)) = cli.grid {
                cfg.grid = harness::GridConfig { n, l, g };
            }
            if let Some(s) = cli.seed {
                cfg.family.seed = s;
            }
            if let Some(out) = &cli.out {
                cfg.out = Some(out.display().to_string());
            }
            let run = run_campaign(&cfg).map_err(|e| format!("campaign: {e}"))?;
            for w in &run.warnings {
                eprintln!("warning: {w}");
            }
            for r in &run.reports {
                eprintln!(
                    "{}: max ratio {:.6} over {} instances, refinement {:.4} -> {}",
                    r.check_id,
                    r.max_ratio,
                    r.instances,
                    r.refinement_factor,
                    if r.pass { "PASS" } else { "FAIL" }
                );
            }
            if cfg.out.is_none() {
                print!("{}", harness::to_csv(&run.reports));
            }
            Ok(if run.all_pass() { 0 } else { 1 })
        }
    }
}

fn main() -> ExitCode {
    match run() {
        Ok(code) => ExitCode::from(code),
        Err(msg) => {
            eprintln!("error: {msg}");
            ExitCode::from(2)
        }
    }
}
