//! Command-line front end for the tension library.

mod input;
mod output;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::Serialize;
use serde_json::json;
use tension_core::catalog::{self, CatalogEntry};
use tension_core::derived::wyner_common_information;
use tension_core::oracle::{brute_force_supports, GridSpec};
use tension_core::ratebound::rate_upper_bound;
use tension_core::structure::{intercepts_exact, is_perfectly_resolvable};
use tension_core::tension_opt::{
    octant_directions, slice_z, trace_region, CertifiedBound, Provenance, SlicePoint,
};
use tension_core::{DirectionWeights, Error, OptimizerConfig, RegionApprox};

use input::{load_spec, Input, Params};
use output::{emit, json, sig12, Csv, Envelope};

const EXIT_INVALID: u8 = 2;
const EXIT_REFUSED: u8 = 3;
const EXIT_FLAGGED: u8 = 4;

#[derive(Parser)]
#[command(
    name = "tension",
    version,
    about = "Region of tension of finite correlated pairs"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
    #[command(flatten)]
    common: Common,
}

#[derive(Args, Serialize)]
struct Common {
    /// Seed of every random restart
    #[arg(long, default_value_t = 0, global = true)]
    seed: u64,
    /// Worker threads (default: all cores); results do not depend on it
    #[arg(long, global = true)]
    #[serde(skip)]
    workers: Option<usize>,
    /// Write to this file instead of standard output
    #[arg(long, global = true)]
    #[serde(skip)]
    output: Option<PathBuf>,
    #[arg(long, value_enum, default_value_t = Format::Json, global = true)]
    format: Format,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "snake_case")]
enum Format {
    Json,
    Csv,
}

#[derive(Args, Clone, Serialize)]
struct OptArgs {
    #[arg(long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    restarts: Option<usize>,
    #[arg(long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    max_iterations: Option<usize>,
    /// Auxiliary alphabet size (default |X||Y|+2)
    #[arg(long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    q_cardinality: Option<usize>,
}

impl OptArgs {
    fn config(&self, seed: u64) -> OptimizerConfig {
        let mut cfg = OptimizerConfig::default().with_seed(seed);
        if let Some(r) = self.restarts {
            cfg.restarts = r;
        }
        if let Some(m) = self.max_iterations {
            cfg.max_iterations = m;
        }
        cfg.q_cardinality = self.q_cardinality;
        cfg
    }
}

#[derive(Subcommand)]
enum Command {
    /// Exact axis intercepts, GK common information and resolvability
    Intercepts(Input),
    /// Exact Gács-Körner common information
    Gk(Input),
    /// Wyner common information through the z = 0 slice
    Wyner {
        #[command(flatten)]
        input: Input,
        #[command(flatten)]
        opt: OptArgs,
    },
    /// Trace the region along spread-out directions
    Trace {
        #[command(flatten)]
        input: Input,
        #[arg(long, default_value_t = 32)]
        directions: usize,
        #[command(flatten)]
        opt: OptArgs,
    },
    /// Boundary of the z = 0 slice
    Slice {
        #[command(flatten)]
        input: Input,
        #[arg(long, default_value_t = 21)]
        grid: usize,
        #[command(flatten)]
        opt: OptArgs,
    },
    /// Upper bound on the secure-sampling rate of a target from a setup
    RateBound(RateArgs),
    /// Brute-force grid supports on tiny inputs
    Oracle {
        #[command(flatten)]
        input: Input,
        #[arg(long, default_value_t = 2)]
        q: usize,
        #[arg(long, default_value_t = 8)]
        steps: usize,
        #[arg(long, default_value_t = 8)]
        directions: usize,
        #[arg(long, default_value_t = tension_core::oracle::DEFAULT_BUDGET)]
        budget: f64,
    },
    /// Built-in distributions
    Catalog {
        #[command(subcommand)]
        action: CatalogAction,
    },
}

#[derive(Args, Serialize)]
struct RateArgs {
    /// Setup pair: `name`, `name:key=value,...` or a `.json` file
    #[arg(long)]
    setup: String,
    /// Target pair, same syntax as --setup
    #[arg(long)]
    target: String,
    /// Add optimizer points of the setup along this many directions
    #[arg(long, default_value_t = 0)]
    setup_directions: usize,
    /// Add optimizer points of the setup slice on a grid of this size
    #[arg(long, default_value_t = 0)]
    setup_slice_grid: usize,
    /// Treat this value as a lower bound on the target slice support at
    /// weights (1/2, 1/2); the bound is then not certified
    #[arg(long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    assume_target_slice: Option<f64>,
    #[command(flatten)]
    opt: OptArgs,
}

#[derive(Subcommand)]
enum CatalogAction {
    List,
    Show {
        name: String,
        #[command(flatten)]
        params: Params,
    },
}

struct Outcome {
    text: String,
    flagged: bool,
}

impl Outcome {
    fn ok(text: String) -> Self {
        Self {
            text,
            flagged: false,
        }
    }
}

type Run = Result<Outcome, Error>;

fn envelope<C: Serialize, R: Serialize>(command: &str, config: C, result: R) -> String {
    json(&Envelope {
        command,
        config,
        result,
    })
}

fn input_config(input: &Input, common: &Common, extra: serde_json::Value) -> serde_json::Value {
    json!({ "input": input, "seed": common.seed, "options": extra })
}

fn cmd_intercepts(input: &Input, common: &Common) -> Run {
    let e = input.load()?;
    let i = intercepts_exact(&e.joint);
    let (resolvable, common_part) = is_perfectly_resolvable(&e.joint);
    let mi = e.joint.mutual_information();
    Ok(Outcome::ok(match common.format {
        Format::Json => envelope(
            "intercepts",
            input_config(input, common, json!({})),
            json!({
                "tx": i.tx,
                "ty": i.ty,
                "tz": i.tz,
                "gk": common_part.entropy_bits,
                "mutual_information": mi,
                "resolvable": resolvable,
            }),
        ),
        Format::Csv => {
            let mut c = Csv::new(&["tx", "ty", "tz", "gk", "mutual_information", "resolvable"]);
            c.row(&[
                sig12(i.tx),
                sig12(i.ty),
                sig12(i.tz),
                sig12(common_part.entropy_bits),
                sig12(mi),
                resolvable.to_string(),
            ]);
            c.finish()
        }
    }))
}

fn cmd_gk(input: &Input, common: &Common) -> Run {
    let e = input.load()?;
    let (_, cp) = is_perfectly_resolvable(&e.joint);
    Ok(Outcome::ok(match common.format {
        Format::Json => envelope(
            "gk",
            input_config(input, common, json!({})),
            json!({
                "gk": cp.entropy_bits,
                "components": cp.graph.component_count,
                "component_distribution": cp.distribution,
            }),
        ),
        Format::Csv => {
            let mut c = Csv::new(&["gk", "components"]);
            c.row(&[sig12(cp.entropy_bits), cp.graph.component_count.to_string()]);
            c.finish()
        }
    }))
}

fn cmd_wyner(input: &Input, opt: &OptArgs, common: &Common) -> Run {
    let e = input.load()?;
    let w = wyner_common_information(&e.joint, &opt.config(common.seed))?;
    let text = match common.format {
        Format::Json => envelope("wyner", input_config(input, common, json!(opt)), &w),
        Format::Csv => {
            let mut c = Csv::new(&[
                "value",
                "mutual_information",
                "r1",
                "r2",
                "residual",
                "direct",
                "flagged",
            ]);
            c.row(&[
                sig12(w.value),
                sig12(w.mutual_information),
                sig12(w.r1),
                sig12(w.r2),
                sig12(w.residual),
                sig12(w.direct),
                w.flagged.to_string(),
            ]);
            c.finish()
        }
    };
    Ok(Outcome {
        text,
        flagged: w.flagged,
    })
}

/// Seed evidence of `e` joined with optimizer output.
fn merged(e: &CatalogEntry, extra: RegionApprox) -> Result<RegionApprox, Error> {
    let mut r = extra;
    let seed = e.seed_region()?;
    for p in seed.inner_points {
        if !r.inner_points.contains(&p) {
            r.inner_points.push(p);
        }
    }
    r.certified.extend(seed.certified);
    Ok(r)
}

fn cmd_trace(input: &Input, directions: usize, opt: &OptArgs, common: &Common) -> Run {
    let e = input.load()?;
    let traced = trace_region(
        &e.joint,
        &octant_directions(directions),
        &opt.config(common.seed),
    )?;
    let region = merged(&e, traced)?;
    let flagged = region.support_upper.iter().any(|s| s.flagged);
    let text = match common.format {
        Format::Json => envelope(
            "trace",
            input_config(
                input,
                common,
                json!({ "directions": directions, "optimizer": opt }),
            ),
            &region,
        ),
        Format::Csv => {
            let mut c = Csv::new(&["r1", "r2", "r3"]);
            for p in &region.inner_points {
                c.row(&[sig12(p.point.r1), sig12(p.point.r2), sig12(p.point.r3)]);
            }
            c.finish()
        }
    };
    Ok(Outcome { text, flagged })
}

fn slice_caveat(p: &SlicePoint) -> &'static str {
    match (p.feasible, p.converged) {
        (true, true) => "",
        (false, true) => "penalty saturated",
        (true, false) => "iteration cap",
        (false, false) => "penalty saturated; iteration cap",
    }
}

fn cmd_slice(input: &Input, grid: usize, opt: &OptArgs, common: &Common) -> Run {
    let e = input.load()?;
    let pts = slice_z(&e.joint, grid, &opt.config(common.seed))?;
    let flagged = pts.iter().any(|p| !slice_caveat(p).is_empty());
    let text = match common.format {
        Format::Json => envelope(
            "slice",
            input_config(input, common, json!({ "grid": grid, "optimizer": opt })),
            &pts,
        ),
        Format::Csv => {
            let mut c = Csv::new(&["alpha", "r1", "r2", "residual", "caveat"]);
            for p in &pts {
                c.row(&[
                    sig12(p.alpha),
                    sig12(p.r1),
                    sig12(p.r2),
                    sig12(p.residual),
                    slice_caveat(p).to_string(),
                ]);
            }
            c.finish()
        }
    };
    Ok(Outcome { text, flagged })
}

fn cmd_rate_bound(a: &RateArgs, common: &Common) -> Run {
    let setup = load_spec(&a.setup)?;
    let target = load_spec(&a.target)?;
    let cfg = a.opt.config(common.seed);
    let mut extra = RegionApprox::new();
    if a.setup_directions > 0 {
        extra = trace_region(&setup.joint, &octant_directions(a.setup_directions), &cfg)?;
    }
    if a.setup_slice_grid > 0 {
        for p in slice_z(&setup.joint, a.setup_slice_grid, &cfg)? {
            extra.push_point(p.point(), Some(p.witness));
        }
    }
    let setup_region = merged(&setup, extra)?;
    let mut target_region = target.seed_region()?;
    if let Some(v) = a.assume_target_slice {
        target_region.certified.push(CertifiedBound::slice(
            0.5,
            0.5,
            v,
            Provenance::numerical("target slice value supplied on the command line"),
        )?);
    }
    let mut report = rate_upper_bound(&setup_region, &target_region)?;
    if report
        .target_evidence
        .as_ref()
        .is_some_and(|c| c.provenance.kind == tension_core::tension_opt::EvidenceKind::Numerical)
    {
        report
            .caveats
            .push("target evidence is numerical: the bound is an estimate, not certified".into());
    }
    let text = match common.format {
        Format::Json => envelope(
            "rate-bound",
            json!({ "seed": common.seed, "options": a }),
            &report,
        ),
        Format::Csv => {
            let mut c = Csv::new(&[
                "bound",
                "l1",
                "l2",
                "l3",
                "slice",
                "setup_value",
                "target_value",
            ]);
            let (l, slice) = report
                .binding_direction
                .as_ref()
                .map_or(([f64::NAN; 3], false), |b| (b.lambda.weights(), b.slice));
            let cell = |v: f64| if v.is_nan() { String::new() } else { sig12(v) };
            c.row(&[
                sig12(report.bound),
                cell(l[0]),
                cell(l[1]),
                cell(l[2]),
                slice.to_string(),
                report
                    .setup_evidence
                    .as_ref()
                    .map_or(String::new(), |s| sig12(s.value)),
                report
                    .target_evidence
                    .as_ref()
                    .map_or(String::new(), |t| sig12(t.value)),
            ]);
            c.finish()
        }
    };
    Ok(Outcome::ok(text))
}

fn cmd_oracle(
    input: &Input,
    q: usize,
    steps: usize,
    directions: usize,
    budget: f64,
    common: &Common,
) -> Run {
    let e = input.load()?;
    let g = GridSpec {
        budget,
        ..GridSpec::new(q, steps)
    };
    let dirs: Vec<DirectionWeights> = octant_directions(directions);
    let sup = brute_force_supports(&e.joint, &dirs, &g)?;
    Ok(Outcome::ok(match common.format {
        Format::Json => envelope(
            "oracle",
            input_config(
                input,
                common,
                json!({ "q": q, "steps": steps, "directions": directions }),
            ),
            &sup,
        ),
        Format::Csv => {
            let mut c = Csv::new(&["l1", "l2", "l3", "value", "r1", "r2", "r3"]);
            for s in &sup {
                let [l1, l2, l3] = s.lambda.weights();
                c.row(&[
                    sig12(l1),
                    sig12(l2),
                    sig12(l3),
                    sig12(s.value),
                    sig12(s.argmin.r1),
                    sig12(s.argmin.r2),
                    sig12(s.argmin.r3),
                ]);
            }
            c.finish()
        }
    }))
}

fn cmd_catalog(action: &CatalogAction, common: &Common) -> Run {
    Ok(Outcome::ok(match action {
        CatalogAction::List => match common.format {
            Format::Json => json(
                &catalog::list()
                    .into_iter()
                    .map(|(name, description)| json!({ "name": name, "description": description }))
                    .collect::<Vec<_>>(),
            ),
            Format::Csv => {
                let mut c = Csv::new(&["name", "description"]);
                for (name, description) in catalog::list() {
                    c.row(&[name.into(), format!("\"{description}\"")]);
                }
                c.finish()
            }
        },
        CatalogAction::Show { name, params } => {
            let input = Input {
                catalog: Some(name.clone()),
                file: None,
                params: params.clone(),
            };
            let e = input.load()?;
            match common.format {
                Format::Json => e.to_json_string() + "\n",
                Format::Csv => {
                    let mut c = Csv::new(&["x", "y", "p"]);
                    for x in 0..e.joint.nx() {
                        for y in 0..e.joint.ny() {
                            c.row(&[
                                format!("\"{}\"", e.joint.x_alphabet().label(x)),
                                format!("\"{}\"", e.joint.y_alphabet().label(y)),
                                sig12(e.joint.p(x, y)),
                            ]);
                        }
                    }
                    c.finish()
                }
            }
        }
    }))
}

fn run(cli: &Cli) -> Run {
    let c = &cli.common;
    match &cli.command {
        Command::Intercepts(input) => cmd_intercepts(input, c),
        Command::Gk(input) => cmd_gk(input, c),
        Command::Wyner { input, opt } => cmd_wyner(input, opt, c),
        Command::Trace {
            input,
            directions,
            opt,
        } => cmd_trace(input, *directions, opt, c),
        Command::Slice { input, grid, opt } => cmd_slice(input, *grid, opt, c),
        Command::RateBound(a) => cmd_rate_bound(a, c),
        Command::Oracle {
            input,
            q,
            steps,
            directions,
            budget,
        } => cmd_oracle(input, *q, *steps, *directions, *budget, c),
        Command::Catalog { action } => cmd_catalog(action, c),
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    if let Some(n) = cli.common.workers {
        if let Err(e) = rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build_global()
        {
            eprintln!("error: {e}");
            return ExitCode::from(EXIT_INVALID);
        }
    }
    match run(&cli) {
        Ok(out) => {
            if let Err(e) = emit(&out.text, cli.common.output.as_deref()) {
                eprintln!("error: {e}");
                return ExitCode::from(EXIT_INVALID);
            }
            if out.flagged {
                eprintln!("warning: some results did not converge or missed the slice tolerance");
                ExitCode::from(EXIT_FLAGGED)
            } else {
                ExitCode::SUCCESS
            }
        }
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(match e {
                Error::Refused(_) | Error::BudgetExceeded { .. } => EXIT_REFUSED,
                _ => EXIT_INVALID,
            })
        }
    }
}
