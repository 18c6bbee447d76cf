use std::io::Write;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use dnet::config::ExperimentConfig;
use dnet::error::{HarnessError, HarnessResult, EXIT_BOUND_VIOLATION};
use dnet::report::{emit_reports, fmt_f64, to_json_bytes, write_atomic};
use dnet::select::run_select;
use dnet::sweep::{cover_hash, run_theorem1_sweep};
use dnet_core::bounds::{rademacher_bound, risk_rates};
use dnet_core::markov::{empirical_error, reconstruct, refined_bound};
use dnet_core::packing::{build_packing, quadrature_nodes, verify_orthonormality};
use dnet_core::spectral::{identity_family, projection_example, toeplitz_demo, MatrixFamily};
use dnet_core::variation::{rescale_canonical, subnetwork_variations_with, VariationMode};
use dnet_core::{uniform_points, LinkSelector, Measure, Network, NetworkSpec, SigmaMode};
use serde::Deserialize;
use serde_json::json;

#[derive(Parser)]
#[command(name = "dnet", version, about = "Variation, sparsification and bound tools for deep ramp networks")]
struct Cli {
    #[command(subcommand)]
    cmd: Cmd,
}

#[derive(Subcommand)]
enum Cmd {
    /// Variation summary of a network file.
    Variation {
        #[arg(long)]
        net: PathBuf,
        #[arg(long, value_enum, default_value_t = Selector::Argmax)]
        selector: Selector,
    },
    /// Sample M paths and report the sparse element's error and bounds.
    Sparsify(SparsifyArgs),
    /// Risk and Rademacher rates over a grid of n, as CSV.
    Bounds {
        #[arg(long, conflicts_with = "params")]
        preset: Option<String>,
        #[arg(long)]
        params: Option<PathBuf>,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Closed-form matrix families, as CSV.
    Examples {
        #[command(subcommand)]
        family: Family,
        #[arg(long, global = true)]
        out: Option<PathBuf>,
    },
    /// Packing set with its certificates, as JSON.
    Packing {
        #[arg(long = "d")]
        d_in: usize,
        #[arg(long = "A")]
        a: u64,
        #[arg(long = "B", default_value_t = 1.0)]
        b: f64,
        #[arg(long = "T")]
        t: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
    },
    /// Monte Carlo sweep from a config file.
    Sweep {
        #[arg(long)]
        config: PathBuf,
        /// Exit with code 4 if any summary flag fails.
        #[arg(long)]
        certify: bool,
    },
    /// Penalized selection over an enumerated cover.
    Select {
        #[arg(long)]
        config: PathBuf,
    },
}

#[derive(Clone, Copy, ValueEnum)]
enum Selector {
    Argmax,
    Diagonal,
}

#[derive(Clone, Copy, ValueEnum)]
enum Sigma {
    One,
    Estimate,
    Reduced,
}

#[derive(Args)]
struct SparsifyArgs {
    #[arg(long)]
    net: PathBuf,
    #[arg(long)]
    m: usize,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long, default_value_t = 512)]
    points: usize,
    #[arg(long, default_value_t = 0x5eed)]
    points_seed: u64,
    #[arg(long, value_enum, default_value_t = Sigma::Estimate)]
    sigma: Sigma,
    /// Cover at a variation budget above V.
    #[arg(long)]
    budget: Option<f64>,
}

#[derive(Subcommand)]
enum Family {
    Projection {
        #[arg(long, default_value_t = 0.5)]
        t: f64,
        #[arg(long, default_value_t = 0.5)]
        s: f64,
        #[arg(long, value_delimiter = ',', default_value = "4,8,16,32,64,128,256")]
        l: Vec<usize>,
    },
    Identity {
        #[arg(long, value_delimiter = ',', default_value = "2,20,200")]
        d: Vec<usize>,
        #[arg(long, default_value_t = 5)]
        l: usize,
    },
    Toeplitz {
        #[arg(long, value_delimiter = ',', default_value = "2,0.5,0.25")]
        coeffs: Vec<f64>,
        #[arg(long, default_value_t = 64)]
        n: usize,
    },
    /// Any family given as JSON, e.g. `{"kind": "constant_q", "q": [[1,0],[0,1]]}`.
    Custom {
        #[arg(long)]
        spec: PathBuf,
        #[arg(long, value_delimiter = ',')]
        l: Vec<usize>,
        #[arg(long, default_value_t = 1.0)]
        w0: f64,
        /// First-layer row; defaults to all ones.
        #[arg(long, value_delimiter = ',')]
        w1: Vec<f64>,
    },
}

#[derive(Deserialize)]
struct BoundParams {
    l: usize,
    v: f64,
    d_bar: f64,
    d_in: usize,
    #[serde(default = "unit")]
    b: f64,
    n: Vec<f64>,
}

fn unit() -> f64 {
    1.0
}

fn preset(name: &str) -> HarnessResult<BoundParams> {
    match name {
        "default" => Ok(BoundParams {
            l: 3,
            v: 1.0,
            d_bar: 8.0,
            d_in: 4,
            b: 1.0,
            n: (2..=6).map(|k| 10f64.powi(k)).collect(),
        }),
        "deep" => Ok(BoundParams {
            l: 10,
            v: 2.0,
            d_bar: 64.0,
            d_in: 16,
            b: 1.0,
            n: (3..=9).map(|k| 10f64.powi(k)).collect(),
        }),
        other => Err(HarnessError::config("--preset", "preset", format!("unknown preset `{other}` (default, deep)"))),
    }
}

fn load_network(path: &Path) -> HarnessResult<Network> {
    let text = std::fs::read_to_string(path).map_err(|e| HarnessError::io(path, e))?;
    Ok(NetworkSpec::from_json(&text)?.to_network()?)
}

fn emit(out: Option<&Path>, bytes: &[u8]) -> HarnessResult<()> {
    match out {
        Some(p) => write_atomic(p, bytes),
        None => std::io::stdout()
            .write_all(bytes)
            .map_err(|e| HarnessError::io("<stdout>", e)),
    }
}

fn csv_bytes(header: &[&str], rows: Vec<Vec<String>>) -> HarnessResult<Vec<u8>> {
    let mut w = csv::Writer::from_writer(Vec::new());
    let wrap = |e: csv::Error| HarnessError::Output(e.to_string());
    w.write_record(header).map_err(wrap)?;
    for r in rows {
        w.write_record(r).map_err(wrap)?;
    }
    w.into_inner().map_err(|e| HarnessError::Output(e.to_string()))
}

fn run(cli: Cli) -> HarnessResult<i32> {
    match cli.cmd {
        Cmd::Variation { net, selector } => {
            let net = load_network(&net)?;
            let sel = match selector {
                Selector::Argmax => LinkSelector::Argmax,
                Selector::Diagonal => LinkSelector::Diagonal,
            };
            let s = subnetwork_variations_with(&net, sel);
            let canon = subnetwork_variations_with(&rescale_canonical(&net, VariationMode::Plain).0, sel);
            let out = json!({
                "V": s.v,
                "v_bar": s.v_bar,
                "v_bar_red": s.v_bar_red,
                "v_composite": s.v_composite,
                "v_composite_red": s.v_composite_red,
                "v_bar_geometric": s.v_bar_geometric(),
                "canonical_v_bar": canon.v_bar,
                "canonical_v_composite": canon.v_composite,
                "v_out_layer": s.v_out_layer,
                "v_in_layer": s.v_in_layer,
            });
            emit(None, &to_json_bytes(&out)?)?;
        }
        Cmd::Sparsify(a) => {
            let net = load_network(&a.net)?;
            let points = uniform_points(net.d_in(), a.points, a.points_seed);
            let measure = Measure::normalize(&net, a.budget)?;
            let counts = measure.sample_paths(a.m, a.seed);
            let el = reconstruct(&counts, &measure)?;
            let sigma = match a.sigma {
                Sigma::One => SigmaMode::One,
                Sigma::Estimate => SigmaMode::Estimate,
                Sigma::Reduced => SigmaMode::Reduced,
            };
            let b = refined_bound(&net, a.m, sigma, &points, a.budget)?;
            let out = json!({
                "m": a.m,
                "seed": a.seed,
                "empirical_error": empirical_error(&net, &el, &points)?,
                "refined": b.refined,
                "bound2": b.bound2,
                "bound3": b.bound3,
                "cross_term_factor": b.cross_term_factor,
                "cover_hash": cover_hash(&net, &counts),
                "active_dims": el.active_dims,
                "null_paths": counts.null,
            });
            emit(None, &to_json_bytes(&out)?)?;
        }
        Cmd::Bounds { preset: p, params, out } => {
            let bp = match (p, params) {
                (_, Some(path)) => {
                    let text = std::fs::read_to_string(&path).map_err(|e| HarnessError::io(&path, e))?;
                    serde_json::from_str::<BoundParams>(&text)
                        .map_err(|e| HarnessError::config(path.display().to_string(), "<document>", e.to_string()))?
                }
                (Some(name), None) => preset(&name)?,
                (None, None) => preset("default")?,
            };
            let mut rows = Vec::new();
            for &n in &bp.n {
                let r = risk_rates(bp.l, bp.v, n, bp.d_bar, bp.d_in)?;
                let rad = rademacher_bound(bp.l, bp.v, n, bp.d_bar, bp.d_in, bp.b)?;
                rows.push(
                    [n, r.theorem2, r.theorem3, r.theorem3_d_bar_free, r.barron, rad.dudley, rad.final_rate]
                        .into_iter()
                        .map(fmt_f64)
                        .collect(),
                );
            }
            let header = ["n", "theorem2", "theorem3", "theorem3_d_bar_free", "barron", "rademacher_dudley", "rademacher_final"];
            emit(out.as_deref(), &csv_bytes(&header, rows)?)?;
        }
        Cmd::Examples { family, out } => {
            let bytes = match family {
                Family::Projection { t, s, l } => {
                    let mut rows = Vec::new();
                    for l in l {
                        let r = projection_example(t, s, l, 1.0, &[1.0, 1.0])?;
                        rows.push(vec![
                            l.to_string(),
                            fmt_f64(r.v_bar_exact),
                            fmt_f64(r.v_bar_pipeline),
                            fmt_f64(r.v_bar_asymptotic),
                            fmt_f64(r.q_spectral),
                        ]);
                    }
                    csv_bytes(&["l", "v_bar_exact", "v_bar_pipeline", "v_bar_asymptotic", "q_spectral"], rows)?
                }
                Family::Identity { d, l } => {
                    let mut rows = Vec::new();
                    for d in d {
                        let r = identity_family(1.0, &vec![1.0 / d as f64; d], l)?;
                        rows.push(vec![d.to_string(), l.to_string(), fmt_f64(r.plain), fmt_f64(r.reduced)]);
                    }
                    csv_bytes(&["d", "l", "plain", "reduced"], rows)?
                }
                Family::Toeplitz { coeffs, n } => {
                    let rows = toeplitz_demo(&coeffs, n)
                        .into_iter()
                        .map(|r| vec![r.index.to_string(), fmt_f64(r.eigenvalue), fmt_f64(r.symbol)])
                        .collect();
                    csv_bytes(&["index", "eigenvalue", "symbol"], rows)?
                }
                Family::Custom { spec, l, w0, w1 } => {
                    let text = std::fs::read_to_string(&spec).map_err(|e| HarnessError::io(&spec, e))?;
                    let fam: MatrixFamily = serde_json::from_str(&text)
                        .map_err(|e| HarnessError::config(spec.display().to_string(), "kind", e.to_string()))?;
                    let mut rows = Vec::new();
                    for l in l {
                        let width = fam.layers(l)?[0].rows();
                        let w1 = if w1.is_empty() { vec![1.0; width] } else { w1.clone() };
                        let net = fam.network(l, w0, &w1)?;
                        let s = subnetwork_variations_with(&net, LinkSelector::Argmax);
                        rows.push(vec![
                            l.to_string(),
                            fmt_f64(s.v),
                            fmt_f64(s.v_bar_global(VariationMode::Plain)),
                            fmt_f64(s.v_bar_global(VariationMode::Reduced)),
                        ]);
                    }
                    csv_bytes(&["l", "V", "v_bar", "v_bar_red"], rows)?
                }
            };
            emit(out.as_deref(), &bytes)?;
        }
        Cmd::Packing { d_in, a, b, t, seed } => {
            let p = build_packing(d_in, a, b, t, seed)?;
            let ortho = verify_orthonormality(&p.frequencies, quadrature_nodes(a))?;
            let out = json!({
                "packing": p,
                "checker": dnet_core::packing::check_code(&p.code).err(),
                "orthonormality": ortho,
            });
            emit(None, &to_json_bytes(&out)?)?;
        }
        Cmd::Sweep { config, certify } => {
            let cfg = ExperimentConfig::from_file(&config)?;
            let (result, _, _) = run_theorem1_sweep(&cfg)?;
            if let Some(o) = &cfg.output {
                let files = emit_reports(&o.dir, &o.stem, &result.records, &result.summary)?;
                eprintln!("wrote {}", files.records_csv.display());
            }
            emit(None, &to_json_bytes(&result.summary)?)?;
            if certify && !result.summary.all_pass {
                let failed: Vec<String> = result
                    .summary
                    .cells
                    .iter()
                    .filter(|c| !c.all_pass())
                    .map(|c| format!("net {} M {}", c.net, c.m))
                    .collect();
                eprintln!("{}", HarnessError::BoundViolation(failed.join(", ")));
                return Ok(EXIT_BOUND_VIOLATION);
            }
        }
        Cmd::Select { config } => {
            let cfg = ExperimentConfig::from_file(&config)?;
            let report = run_select(&cfg)?;
            let bytes = to_json_bytes(&report)?;
            if let Some(o) = &cfg.output {
                write_atomic(&o.dir.join(format!("{}_select.json", o.stem)), &bytes)?;
            }
            emit(None, &bytes)?;
        }
    }
    Ok(0)
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(code) => ExitCode::from(code as u8),
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
