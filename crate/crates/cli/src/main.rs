use std::fs::File;
use std::io::{BufReader, BufWriter, Write};
use std::path::{Path, PathBuf};

use anyhow::{bail, Context, Result};
use clap::{Parser, Subcommand, ValueEnum};
use serde::Serialize;
use serde_json::json;

use sbmsketch::certificate::{check_certificate, CertificateTolerances};
use sbmsketch::encoding::estimate_mu;
use sbmsketch::experiment::{emit_csv, emit_heatmap_svg, parse_grid_config, run_grid, HeatmapOptions, Method, Metric, Overlay};
use sbmsketch::io::{read_graph, read_partition, write_graph, write_partition};
use sbmsketch::pipeline::{sketch_and_solve, GammaChoice, MuChoice, SketchConfig, TieRule};
use sbmsketch::sbm::{sample_sbm, LogScaleParams};
use sbmsketch::sdp::{solve_sdp, Rank, SolverConfig};
use sbmsketch::theory;
use sbmsketch::{Graph, Seed};

#[derive(Parser)]
#[command(name = "sbmsketch", version, about = "Planted bisection recovery by sketch-and-solve SDP")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Sample a two-community SBM graph with log-scaled rates.
    Generate {
        #[arg(long)]
        alpha: f64,
        #[arg(long)]
        beta: f64,
        #[arg(long)]
        n: usize,
        /// Community sizes (default n/2 each).
        #[arg(long, requires = "n2")]
        n1: Option<usize>,
        #[arg(long, requires = "n1")]
        n2: Option<usize>,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long)]
        out: PathBuf,
        /// Also write the planted partition.
        #[arg(long)]
        planted: Option<PathBuf>,
    },
    /// Solve the (A, mu)-SDP on a graph file and round to a partition.
    Solve {
        graph: PathBuf,
        #[arg(long, default_value = "auto")]
        mu: String,
        /// Factor rank (default: auto).
        #[arg(long)]
        rank: Option<usize>,
        #[arg(long, default_value_t = 1e-12)]
        tol: f64,
        #[arg(long, default_value_t = 5000)]
        max_sweeps: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        /// Partition output file.
        #[arg(long)]
        out: PathBuf,
    },
    /// Check the dual certificate of a partition.
    Certify {
        graph: PathBuf,
        partition: PathBuf,
        #[arg(long, default_value = "auto")]
        mu: String,
    },
    /// Sketch, solve, certify and extend by majority vote.
    Sketch {
        graph: PathBuf,
        #[arg(long, default_value = "auto")]
        gamma: String,
        #[arg(long)]
        alpha: Option<f64>,
        #[arg(long)]
        beta: Option<f64>,
        #[arg(long, default_value = "auto")]
        mu: String,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long, value_enum, default_value = "fail")]
        tie_rule: TieArg,
        #[arg(long)]
        no_certify: bool,
        #[arg(long)]
        out: PathBuf,
    },
    /// Closed-form thresholds for (alpha, beta), or the phase curve as CSV.
    Thresholds {
        #[arg(long, required_unless_present = "curve")]
        alpha: Option<f64>,
        #[arg(long, required_unless_present = "curve")]
        beta: Option<f64>,
        #[arg(long, default_value_t = 0.0)]
        delta: f64,
        #[arg(long, value_enum)]
        curve: Option<CurveArg>,
        #[arg(long, default_value_t = 0.0)]
        beta_min: f64,
        #[arg(long, default_value_t = 10.0)]
        beta_max: f64,
        #[arg(long, default_value_t = 101)]
        points: usize,
    },
    /// Run a grid experiment.
    Experiment {
        #[arg(long)]
        grid: PathBuf,
        #[arg(long)]
        out_csv: Option<PathBuf>,
        #[arg(long)]
        out_svg: Option<PathBuf>,
        #[arg(long, value_enum, default_value = "recovery-rate")]
        metric: MetricArg,
        #[arg(long, value_enum, default_value = "none")]
        overlay: OverlayArg,
        /// Gamma of the conjectured iso-line overlay.
        #[arg(long, default_value_t = 0.5)]
        overlay_gamma: f64,
        /// Method shown in the heatmap when the grid runs several.
        #[arg(long)]
        method: Option<String>,
        #[arg(long)]
        jobs: Option<usize>,
    },
}

#[derive(Clone, Copy, ValueEnum)]
enum TieArg {
    Fail,
    ToFirst,
    Random,
}

#[derive(Clone, Copy, ValueEnum)]
enum CurveArg {
    Prop1,
}

#[derive(Clone, Copy, ValueEnum)]
enum MetricArg {
    #[value(alias = "recovery_rate")]
    RecoveryRate,
    #[value(alias = "mean_runtime")]
    MeanRuntime,
}

#[derive(Clone, Copy, ValueEnum)]
enum OverlayArg {
    None,
    #[value(alias = "prop1_curve")]
    Prop1Curve,
    #[value(alias = "conjecture_gamma_iso")]
    ConjectureGammaIso,
}

fn load_graph(path: &Path) -> Result<Graph> {
    let file = File::open(path).with_context(|| format!("cannot open {}", path.display()))?;
    read_graph(BufReader::new(file)).with_context(|| format!("cannot read graph {}", path.display()))
}

fn create(path: &Path) -> Result<BufWriter<File>> {
    Ok(BufWriter::new(
        File::create(path).with_context(|| format!("cannot create {}", path.display()))?,
    ))
}

fn resolve_mu(arg: &str, graph: &Graph) -> Result<f64> {
    if arg.eq_ignore_ascii_case("auto") {
        Ok(estimate_mu(graph)?.mu)
    } else {
        arg.parse().with_context(|| format!("--mu must be 'auto' or a number, got '{arg}'"))
    }
}

fn print_json<T: Serialize>(value: &T) -> Result<()> {
    println!("{}", serde_json::to_string_pretty(value)?);
    Ok(())
}

/// Threshold with its display value clamped to [0, 1].
fn gamma_entry(raw: f64) -> serde_json::Value {
    json!({ "value": raw, "display": raw.clamp(0.0, 1.0), "vacuous": raw >= 1.0 })
}

fn run(cli: Cli) -> Result<()> {
    match cli.command {
        Command::Generate { alpha, beta, n, n1, n2, seed, out, planted } => {
            let (n1, n2) = match (n1, n2) {
                (Some(a), Some(b)) if a + b == n => (a, b),
                (Some(a), Some(b)) => bail!("--n1 {a} and --n2 {b} must sum to --n {n}"),
                _ => (n / 2, n - n / 2),
            };
            let scale = LogScaleParams { alpha, beta, n };
            let (params, clamped) = scale.to_sbm_sizes(n1, n2)?;
            let (graph, truth) = sample_sbm(&params, Seed(seed));
            write_graph(&graph, create(&out)?)?;
            if let Some(path) = planted {
                write_partition(&truth, create(&path)?)?;
            }
            print_json(&json!({
                "n": graph.num_vertices(),
                "edges": graph.edge_count(),
                "p": params.p(),
                "q": params.q(),
                "clamped": clamped,
            }))
        }
        Command::Solve { graph, mu, rank, tol, max_sweeps, seed, out } => {
            let graph = load_graph(&graph)?;
            let mu = resolve_mu(&mu, &graph)?;
            let config = SolverConfig {
                rank: rank.map_or(Rank::Auto, Rank::Fixed),
                max_sweeps,
                objective_tolerance: tol,
                ..SolverConfig::default().with_seed(Seed(seed))
            };
            let sol = solve_sdp(&graph, mu, &config)?;
            write_partition(&sol.rounded_cut, create(&out)?)?;
            print_json(&json!({
                "mu": mu,
                "objective": sol.objective,
                "rank_one_gap": sol.rank_one_gap,
                "sweeps_used": sol.sweeps_used,
                "converged": sol.converged,
            }))
        }
        Command::Certify { graph, partition, mu } => {
            let graph = load_graph(&graph)?;
            let file = File::open(&partition).with_context(|| format!("cannot open {}", partition.display()))?;
            let partition = read_partition(BufReader::new(file))?;
            let mu = resolve_mu(&mu, &graph)?;
            let report = check_certificate(&graph, &partition, mu, &CertificateTolerances::default())?;
            print_json(&json!({
                "verdict": report.verdict,
                "lambda2_lower": report.lambda2_lower,
                "zg_residual": report.z_g_residual,
            }))
        }
        Command::Sketch { graph, gamma, alpha, beta, mu, seed, tie_rule, no_certify, out } => {
            let graph = load_graph(&graph)?;
            let gamma = if gamma.eq_ignore_ascii_case("auto") {
                match (alpha, beta) {
                    (Some(alpha), Some(beta)) => GammaChoice::Auto { alpha, beta },
                    _ => bail!("--gamma auto needs --alpha and --beta"),
                }
            } else {
                GammaChoice::Fixed(gamma.parse().with_context(|| format!("bad --gamma '{gamma}'"))?)
            };
            let mut config = SketchConfig::new(gamma, Seed(seed));
            if !mu.eq_ignore_ascii_case("auto") {
                config.mu = MuChoice::Fixed(resolve_mu(&mu, &graph)?);
            }
            config.certify = !no_certify;
            config.tie_rule = match tie_rule {
                TieArg::Fail => TieRule::Fail,
                TieArg::ToFirst => TieRule::ToFirst,
                TieArg::Random => TieRule::Random,
            };
            let res = sketch_and_solve(&graph, &config)?;
            write_partition(&res.full_partition, create(&out)?)?;
            let ms = |d: std::time::Duration| d.as_secs_f64() * 1e3;
            print_json(&json!({
                "gamma": res.gamma_used,
                "mu": res.mu_used,
                "sketch_size": res.sketch_vertices.len(),
                "objective": res.sdp.objective,
                "rank_one_gap": res.sdp.rank_one_gap,
                "verdict": res.certificate.as_ref().map(|c| c.verdict),
                "fell_back_random": res.fell_back_random,
                "unassigned": res.unassigned,
                "timings_ms": {
                    "estimate": ms(res.timings.estimate),
                    "sample": ms(res.timings.sample),
                    "solve": ms(res.timings.solve),
                    "certify": ms(res.timings.certify),
                    "extend": ms(res.timings.extend),
                },
            }))
        }
        Command::Thresholds { alpha, beta, delta, curve, beta_min, beta_max, points } => {
            if let Some(CurveArg::Prop1) = curve {
                if points < 2 || !(beta_max > beta_min) || beta_min < 0.0 {
                    bail!("need --points >= 2 and 0 <= --beta-min < --beta-max");
                }
                let mut out = std::io::stdout().lock();
                writeln!(out, "beta,alpha")?;
                for k in 0..points {
                    let b = beta_min + (beta_max - beta_min) * k as f64 / (points - 1) as f64;
                    writeln!(out, "{b},{}", theory::prop1_curve_alpha(b))?;
                }
                return Ok(());
            }
            let (alpha, beta) = (alpha.unwrap_or_default(), beta.unwrap_or_default());
            let r = theory::threshold_report(alpha, beta, delta)?;
            print_json(&json!({
                "alpha": alpha,
                "beta": beta,
                "prop1_phase": r.prop1_phase,
                "lemma2_gamma": gamma_entry(r.lemma2_gamma),
                "theorem6_gamma": gamma_entry(r.theorem6_gamma),
                "conjecture_gamma": gamma_entry(r.conjecture_gamma),
                "auto_gamma": r.auto_gamma,
                "delta": delta,
                "corollary5_holds": r.corollary5_holds,
            }))
        }
        Command::Experiment { grid, out_csv, out_svg, metric, overlay, overlay_gamma, method, jobs } => {
            let text = std::fs::read_to_string(&grid).with_context(|| format!("cannot read {}", grid.display()))?;
            let spec = parse_grid_config(&text)?;
            let results = run_grid(&spec, jobs)?;
            match out_csv {
                Some(path) => emit_csv(&results, create(&path)?)?,
                None => emit_csv(&results, std::io::stdout().lock())?,
            }
            if let Some(path) = out_svg {
                let options = HeatmapOptions {
                    metric: match metric {
                        MetricArg::RecoveryRate => Metric::RecoveryRate,
                        MetricArg::MeanRuntime => Metric::MeanRuntime,
                    },
                    overlay: match overlay {
                        OverlayArg::None => Overlay::None,
                        OverlayArg::Prop1Curve => Overlay::Prop1Curve,
                        OverlayArg::ConjectureGammaIso => Overlay::ConjectureGammaIso(overlay_gamma),
                    },
                    method: match method {
                        Some(m) => Some(m.parse::<Method>()?),
                        None if spec.methods.len() == 1 => Some(spec.methods[0]),
                        None => Some(Method::Sketch),
                    },
                };
                emit_heatmap_svg(&results, &options, create(&path)?)?;
            }
            Ok(())
        }
    }
}

fn main() {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    if let Err(e) = run(Cli::parse()) {
        eprintln!("error: {e:#}");
        std::process::exit(1);
    }
}
