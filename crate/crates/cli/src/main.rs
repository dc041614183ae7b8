use std::path::PathBuf;
use std::process::ExitCode;

use anyhow::{Context, Result};
use arclosure::frames::{self, ARChart};
use arclosure::invert::{affine_reduce, decide_abelian, decide_affine, fourier_symbol, Status, Verdict};
use arclosure::limits::{self, GroupTag, LimitOperator};
use arclosure::opalgebra;
use arclosure::pipeline::opparse::{parse_abelian, parse_params};
use arclosure::pipeline::{
    run_closure, run_epsilon_sandwich, ChartConfig, ClosureConfig, OutputConfig, PipelineError, SolverConfig,
    WeightsConfig,
};
use arclosure::selftest;
use arclosure::symexpr::{parse_rational, Expr, Rational};
use clap::{Args, Parser, Subcommand};

/// Domains of closure for almost-Riemannian Laplacians.
#[derive(Parser)]
#[command(name = "arclosure", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Classify one point, or scan the window for singular points.
    Classify {
        #[command(flatten)]
        chart: ChartArgs,
        /// Comma separated coordinates, e.g. `0,0`.
        #[arg(long)]
        point: Option<String>,
        #[arg(long, default_value_t = 32)]
        resolution: usize,
    },
    /// Print the metric, volume density and Laplacian of a chart.
    Laplacian {
        #[command(flatten)]
        chart: ChartArgs,
    },
    /// Print `s^(2-gamma) (Delta - h/s^2) s^gamma` in coordinates and in the Lie frame.
    Conjugate {
        #[command(flatten)]
        chart: ChartArgs,
        #[arg(long)]
        gamma: Option<String>,
    },
    /// Freeze the weighted operator at a singular point.
    LimitOp {
        #[command(flatten)]
        chart: ChartArgs,
        #[arg(long)]
        point: String,
        #[arg(long)]
        gamma: Option<String>,
    },
    /// Decide left invertibility of a limit operator.
    Decide {
        /// Abelian operator text, e.g. `D2 + 2*D - a` or `Z1^2 + Z2^2 - 1`.
        #[arg(long, conflicts_with = "point")]
        abelian: Option<String>,
        /// Number of generators of `--abelian`; inferred from `Z1`/`Z2` when omitted.
        #[arg(long)]
        dim: Option<usize>,
        /// `name=value` bindings substituted into the operator.
        #[arg(long = "param")]
        params: Vec<String>,
        /// Decide the limit operator of a chart at this point instead.
        #[arg(long, requires = "f_or_s")]
        point: Option<String>,
        #[command(flatten)]
        chart: ChartArgs,
        #[arg(long)]
        gamma: Option<String>,
    },
    /// Run the full closure analysis from a TOML config and print the JSON report.
    Closure {
        #[arg(long)]
        config: PathBuf,
        /// Write CSV sidecars to this directory.
        #[arg(long)]
        emit_csv: Option<PathBuf>,
        /// Write the report here instead of stdout.
        #[arg(long)]
        output: Option<PathBuf>,
        #[command(flatten)]
        overrides: Overrides,
    },
    /// Weights `3/2 +- eps` around the critical one-dimensional case.
    Sandwich {
        #[arg(long)]
        config: PathBuf,
        /// Comma separated epsilons, e.g. `1/10,1/2,1`.
        #[arg(long)]
        eps: Option<String>,
        #[arg(long)]
        output: Option<PathBuf>,
    },
    /// Run the acceptance criteria.
    Selftest {
        /// Run a single criterion.
        #[arg(long)]
        only: Option<u8>,
        /// Print JSON instead of one line per criterion.
        #[arg(long)]
        json: bool,
    },
}

#[derive(Args, Clone, Default)]
#[group(id = "f_or_s", multiple = true)]
struct ChartArgs {
    /// Frame function of a planar chart (`Dx`, `f Dy`).
    #[arg(long)]
    f: Option<String>,
    /// Defining function; alone it selects a one-dimensional chart.
    #[arg(long)]
    s: Option<String>,
    /// Perturbation `h` in `Delta - h/s^2`.
    #[arg(long)]
    h: Option<String>,
    /// Potential `V` of a one-dimensional chart.
    #[arg(long)]
    potential: Option<String>,
    /// `x0,x1` or `x0,x1,y0,y1`.
    #[arg(long)]
    window: Option<String>,
}

#[derive(Args, Clone, Default)]
struct Overrides {
    #[arg(long)]
    gamma: Option<String>,
    #[arg(long)]
    samples: Option<usize>,
    #[arg(long)]
    resolution: Option<usize>,
    #[arg(long)]
    timestamp: bool,
}

fn list(text: &str) -> Vec<String> {
    text.split(',').map(|t| t.trim().to_string()).collect()
}

fn rationals(text: &str) -> Result<Vec<Rational>, PipelineError> {
    list(text)
        .iter()
        .map(|t| parse_rational(t).map_err(|e| PipelineError::Config(format!("{t}: {e}"))))
        .collect()
}

impl ChartArgs {
    fn config(&self, gamma: Option<&String>, params: &[String]) -> ClosureConfig {
        let dim = if self.f.is_none() && self.s.is_some() { 1 } else { 2 };
        let window = match (&self.window, dim) {
            (Some(w), _) => list(w),
            (None, 1) => list("0,1"),
            (None, _) => list("-1,1,-1,1"),
        };
        ClosureConfig {
            chart: ChartConfig {
                dim,
                f: self.f.clone(),
                s: self.s.clone(),
                h: self.h.clone(),
                potential: self.potential.clone(),
                window,
                normal_form: None,
                phi: None,
                psi: None,
                big_psi: None,
                params: params
                    .iter()
                    .filter_map(|p| p.split_once('='))
                    .map(|(k, v)| (k.trim().to_string(), v.trim().to_string()))
                    .collect(),
            },
            weights: WeightsConfig { gamma: gamma.cloned() },
            solver: SolverConfig::default(),
            output: OutputConfig::default(),
        }
    }

    fn chart(&self) -> Result<ARChart, PipelineError> {
        if self.f.is_none() && self.s.is_none() {
            return Err(PipelineError::Config(
                "give --f (planar chart) or --s (interval chart)".into(),
            ));
        }
        self.config(None, &[]).build_chart()
    }
}

fn freeze_at(
    chart: &ChartArgs,
    point: &str,
    gamma: Option<&String>,
    params: &[String],
) -> Result<LimitOperator, PipelineError> {
    let cfg = chart.config(gamma, params);
    let ch = cfg.build_chart()?;
    let p = limits::frame_operator(&ch, &cfg.gamma()?)?;
    let q = rationals(point)?;
    if q.len() != ch.dim {
        return Err(PipelineError::Config(format!("--point needs {} coordinates", ch.dim)));
    }
    Ok(limits::limit_at(&ch, &p, &q)?)
}

fn print_verdict(v: &Verdict) -> i32 {
    println!("status: {:?}", v.status);
    println!(
        "{}",
        serde_json::to_string_pretty(&v.evidence).expect("evidence serializes")
    );
    if v.status == Status::Inconclusive {
        3
    } else {
        0
    }
}

fn decide(op: &LimitOperator) -> Result<Verdict, PipelineError> {
    Ok(match op.group {
        GroupTag::Abelian(_) => decide_abelian(&fourier_symbol(op)?),
        GroupTag::Affine => decide_affine(&affine_reduce(&op.normalized()?)?),
    })
}

fn emit(text: &str, output: Option<&PathBuf>) -> Result<()> {
    match output {
        Some(path) => std::fs::write(path, text).with_context(|| format!("writing {}", path.display())),
        None => {
            println!("{text}");
            Ok(())
        }
    }
}

fn load(path: &PathBuf) -> Result<ClosureConfig> {
    let text = std::fs::read_to_string(path).map_err(|e| PipelineError::Config(format!("{}: {e}", path.display())))?;
    Ok(ClosureConfig::from_toml(&text)?)
}

fn run(cli: Cli) -> Result<i32> {
    match cli.command {
        Command::Classify {
            chart,
            point,
            resolution,
        } => {
            let ch = chart.chart()?;
            match point {
                Some(p) => {
                    let q: Vec<f64> = list(&p)
                        .iter()
                        .map(|t| t.parse::<f64>().map_err(|e| PipelineError::Config(format!("{t}: {e}"))))
                        .collect::<Result<_, _>>()?;
                    println!("{}", frames::classify_point(&ch, &q).map_err(PipelineError::from)?);
                    Ok(0)
                }
                None => {
                    let scan = frames::genericity_scan(&ch, resolution).map_err(PipelineError::from)?;
                    println!("{}", serde_json::to_string_pretty(&scan)?);
                    Ok(if scan.is_generic() { 0 } else { 3 })
                }
            }
        }
        Command::Laplacian { chart } => {
            let ch = chart.chart()?;
            if ch.dim == 2 {
                let (g, vol) = frames::metric_and_volume(&ch).map_err(PipelineError::from)?;
                println!("metric: [[{}, {}], [{}, {}]]", g[0][0], g[0][1], g[1][0], g[1][1]);
                println!("volume density: {vol}");
            }
            let lb = frames::laplace_beltrami(&ch).map_err(PipelineError::from)?;
            println!("Laplace-Beltrami: {lb}");
            let p = frames::perturbed_laplacian(&ch).map_err(PipelineError::from)?;
            if p != lb {
                println!("perturbed: {p}");
            }
            Ok(0)
        }
        Command::Conjugate { chart, gamma } => {
            let cfg = chart.config(gamma.as_ref(), &[]);
            let ch = cfg.build_chart()?;
            let g = cfg.gamma()?;
            let lap = frames::perturbed_laplacian(&ch).map_err(PipelineError::from)?;
            let conj =
                opalgebra::conjugate_by_weight(&lap, &ch.s, &(Expr::int(2) - &g), &g).map_err(PipelineError::from)?;
            println!("gamma: {g}");
            println!("coordinates: {conj}");
            let p = limits::frame_operator(&ch, &g)?;
            println!("frame: {p}");
            Ok(0)
        }
        Command::LimitOp { chart, point, gamma } => {
            let op = freeze_at(&chart, &point, gamma.as_ref(), &[])?;
            println!("group: {}", op.group);
            if let Some(b) = &op.bracket {
                println!("bracket: [Z1, Z2] = {b}*Z2");
            }
            println!("limit operator: {op}");
            if op.bracket.as_ref().is_some_and(|b| *b != Expr::int(2)) {
                println!("normalized: {}", op.normalized().map_err(PipelineError::from)?);
            }
            Ok(0)
        }
        Command::Decide {
            abelian,
            dim,
            params,
            point,
            chart,
            gamma,
        } => {
            let bound = parse_params(params.iter().map(String::as_str))?;
            let op = match (abelian, point) {
                (Some(text), _) => {
                    let dim = dim.unwrap_or(if text.contains("Z1") || text.contains("Z2") {
                        2
                    } else {
                        1
                    });
                    parse_abelian(&text, dim, &bound)?
                }
                (None, Some(p)) => freeze_at(&chart, &p, gamma.as_ref(), &params)?,
                (None, None) => return Err(PipelineError::Config("give --abelian or --point".into()).into()),
            };
            println!("operator: {op} [{}]", op.group);
            Ok(print_verdict(&decide(&op)?))
        }
        Command::Closure {
            config,
            emit_csv,
            output,
            overrides,
        } => {
            let mut cfg = load(&config)?;
            if let Some(dir) = emit_csv {
                cfg.output.csv_dir = Some(dir.display().to_string());
            }
            if let Some(g) = overrides.gamma {
                cfg.weights.gamma = Some(g);
            }
            if let Some(n) = overrides.samples {
                cfg.solver.samples = n;
            }
            if let Some(n) = overrides.resolution {
                cfg.solver.scan_resolution = n;
            }
            cfg.output.timestamp |= overrides.timestamp;
            let report = run_closure(&cfg)?;
            emit(&report.to_json(), output.as_ref())?;
            eprintln!("{}", report.conclusion.statement);
            Ok(if report.has_inconclusive() { 3 } else { 0 })
        }
        Command::Sandwich { config, eps, output } => {
            let mut cfg = load(&config)?;
            if let Some(e) = eps {
                cfg.solver.epsilons = list(&e);
            }
            let report = run_epsilon_sandwich(&cfg)?;
            emit(&report.to_json(), output.as_ref())?;
            Ok(0)
        }
        Command::Selftest { only, json } => {
            let results = match only {
                Some(id) => vec![selftest::run(id).ok_or_else(|| PipelineError::Config(format!("no criterion {id}")))?],
                None => selftest::run_all(),
            };
            if json {
                println!("{}", serde_json::to_string_pretty(&results)?);
            } else {
                for r in &results {
                    println!("{r}");
                }
            }
            Ok(if results.iter().all(|r| r.pass) { 0 } else { 1 })
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(code) => ExitCode::from(code as u8),
        Err(e) => {
            eprintln!("error: {e:#}");
            let code = e.downcast_ref::<PipelineError>().map_or(4, PipelineError::exit_code);
            ExitCode::from(code as u8)
        }
    }
}
