//! qpflow: verification suites, flow integration, leaf construction and
//! spin-RS trajectories for the master phase space, with reproducible seeds
//! and machine-readable output.

use std::io::Write;
use std::path::PathBuf;

use anyhow::{bail, Context};
use clap::{Args, Parser, Subcommand};

use qpflow_core::dynamics::{gauge_fix, integrate_reduced, sample_master_flow};
use qpflow_core::matlie::ClassFn;
use qpflow_core::phasespace::{point_from_json, point_to_json, random_point, MPoint, BALL_MARGIN};
use qpflow_core::spinrs::{build_leaf_point, integrate_rs, leaf_residual, LeafSpec};
use qpflow_core::suites;

#[derive(Parser)]
#[command(name = "qpflow", version, about = "quasi-Poisson master phase space numerics")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run randomized verification suites and emit a JSON report.
    Verify(VerifyArgs),
    /// Integrate a master (or reduced) flow and emit a trajectory CSV.
    Flow(FlowArgs),
    /// Construct a point on the leaf Φ⁻¹(e^{iγ}1) and emit it as JSON.
    Leaf(LeafArgs),
    /// Integrate the spin Ruijsenaars-Schneider equations on a leaf point.
    Rs(RsArgs),
}

#[derive(Args)]
struct CommonSpace {
    /// Matrix size n.
    #[arg(long, default_value_t = 2)]
    n: usize,
    /// Number of spin vectors d.
    #[arg(long, default_value_t = 2)]
    d: usize,
    /// Ball parameters x_1,...,x_d (comma separated, nonzero).
    #[arg(long, value_delimiter = ',', allow_hyphen_values = true)]
    x: Option<Vec<f64>>,
    /// RNG seed.
    #[arg(long, default_value_t = 42)]
    seed: u64,
}

impl CommonSpace {
    fn xs(&self) -> anyhow::Result<Vec<f64>> {
        let xs = self.x.clone().unwrap_or_else(|| suites::default_xs(self.d));
        if xs.len() != self.d {
            bail!("--x needs exactly d = {} entries", self.d);
        }
        if xs.iter().any(|&v| v == 0.0 || !v.is_finite()) {
            bail!("ball parameters must be finite and nonzero");
        }
        Ok(xs)
    }
}

#[derive(Args)]
struct VerifyArgs {
    #[command(flatten)]
    space: CommonSpace,
    /// Suite selector: scalars | bracket | jacobi | moment | pencil | forms |
    /// psi | flows | reduced | integrals | spinrs | all.
    #[arg(long, default_value = "all")]
    suite: String,
    /// Pencil parameters z_{αβ} for α<β (comma separated); random when absent.
    #[arg(long, value_delimiter = ',', allow_hyphen_values = true)]
    z: Option<Vec<f64>>,
    /// Number of random cases per sweep.
    #[arg(long, default_value_t = 25)]
    cases: usize,
    /// Override every tolerance with this value.
    #[arg(long)]
    tol: Option<f64>,
    /// Leaf angle for the spinrs suite.
    #[arg(long, default_value_t = 1.1)]
    gamma: f64,
}

#[derive(Args)]
struct FlowArgs {
    #[command(flatten)]
    space: CommonSpace,
    /// Start from a point file instead of a seeded random point.
    #[arg(long)]
    point: Option<PathBuf>,
    /// Hamiltonian spec, e.g. "re_tr:1 + 0.5*im_tr:2".
    #[arg(long = "h", default_value = "re_tr:1", allow_hyphen_values = true)]
    hamiltonian: String,
    /// Final time.
    #[arg(long, default_value_t = 1.0)]
    t: f64,
    /// Time step (sampling step for the exact master flow).
    #[arg(long, default_value_t = 1e-2)]
    dt: f64,
    /// Integrate the reduced flow on the gauge slice instead.
    #[arg(long)]
    reduced: bool,
    /// Output file (stdout when absent).
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct LeafArgs {
    #[command(flatten)]
    space: CommonSpace,
    /// Leaf angle γ ∈ (0, 2π) with kγ ∉ 2πZ for k ≤ n.
    #[arg(long)]
    gamma: f64,
    /// Output file (stdout when absent).
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct RsArgs {
    /// Leaf point file produced by `qpflow leaf`.
    #[arg(long)]
    point: PathBuf,
    /// Final time.
    #[arg(long, default_value_t = 1.0)]
    t: f64,
    /// Time step.
    #[arg(long, default_value_t = 5e-4)]
    dt: f64,
    /// Output file (stdout when absent).
    #[arg(long)]
    out: Option<PathBuf>,
}

fn main() {
    let cli = Cli::parse();
    let code = match cli.command {
        Command::Verify(args) => cmd_verify(args),
        Command::Flow(args) => cmd_flow(args),
        Command::Leaf(args) => cmd_leaf(args),
        Command::Rs(args) => cmd_rs(args),
    };
    match code {
        Ok(code) => std::process::exit(code),
        Err(err) => {
            eprintln!("error: {err:#}");
            std::process::exit(2);
        }
    }
}

fn out_writer(path: &Option<PathBuf>) -> anyhow::Result<Box<dyn Write>> {
    Ok(match path {
        Some(p) => Box::new(std::fs::File::create(p).context("creating output file")?),
        None => Box::new(std::io::stdout()),
    })
}

fn cmd_verify(args: VerifyArgs) -> anyhow::Result<i32> {
    let xs = args.space.xs()?;
    if args.space.n == 0 || args.space.d == 0 {
        bail!("need n >= 1 and d >= 1");
    }
    let mut cfg = suites::SuiteConfig::new(args.space.n, args.space.d, args.space.seed, args.cases);
    cfg.x = xs;
    if let Some(z) = &args.z {
        if z.len() != args.space.d * (args.space.d - 1) / 2 {
            bail!(
                "--z needs d(d-1)/2 = {} entries",
                args.space.d * (args.space.d - 1) / 2
            );
        }
        cfg.z = Some(z.clone());
    }
    let mut reports = Vec::new();
    let selected: Vec<&str> = match args.suite.as_str() {
        "all" => vec![
            "scalars", "bracket", "jacobi", "moment", "pencil", "forms", "psi", "flows",
            "reduced", "integrals", "spinrs",
        ],
        other => vec![other],
    };
    for name in selected {
        let mut batch = match name {
            "scalars" => suites::suite_scalars(1000),
            "bracket" => suites::suite_bracket(&cfg),
            "jacobi" => suites::suite_jacobi(&cfg),
            "moment" => suites::suite_moment(&cfg),
            "pencil" => {
                if cfg.d < 2 {
                    if args.suite == "all" {
                        continue; // the pencil is empty at d = 1
                    }
                    bail!("the pencil suite needs d >= 2");
                }
                suites::suite_pencil(&cfg)
            }
            "forms" => suites::suite_forms(&cfg),
            "psi" => suites::suite_psi(&cfg),
            "flows" => suites::suite_flows(&cfg),
            "reduced" => suites::suite_reduced(&cfg),
            "integrals" => suites::suite_integrals(&cfg),
            "spinrs" => suites::suite_spinrs(&cfg, args.gamma)
                .map_err(|e| anyhow::anyhow!("spinrs suite: {e}"))?,
            other => bail!("unknown suite `{other}`"),
        };
        if let Some(tol) = args.tol {
            for r in batch.iter_mut() {
                r.tolerance = tol;
                r.pass = r.max_residual <= tol;
            }
        }
        reports.extend(batch);
    }
    for r in &reports {
        eprintln!("{}", suites::render(r));
    }
    println!("{}", serde_json::to_string_pretty(&reports)?);
    Ok(if reports.iter().all(|r| r.pass) { 0 } else { 1 })
}

fn fmt(x: f64) -> String {
    format!("{x:.17e}")
}

fn cmd_flow(args: FlowArgs) -> anyhow::Result<i32> {
    if args.t <= 0.0 || args.dt <= 0.0 {
        bail!("need positive --t and --dt");
    }
    let m0: MPoint = match &args.point {
        Some(path) => {
            let text = std::fs::read_to_string(path).context("reading point file")?;
            point_from_json(&text)
                .map_err(|e| anyhow::anyhow!("parsing point file: {e}"))?
                .0
        }
        None => {
            let xs = args.space.xs()?;
            let mut rng =
                <rand_chacha::ChaCha8Rng as rand::SeedableRng>::seed_from_u64(args.space.seed);
            random_point(args.space.n, args.space.d, &xs, &mut rng, BALL_MARGIN)
                .map_err(|e| anyhow::anyhow!("sampling start point: {e}"))?
        }
    };
    let h = ClassFn::parse(&args.hamiltonian)
        .map_err(|e| anyhow::anyhow!("parsing hamiltonian spec: {e}"))?;
    let mut w = out_writer(&args.out)?;
    let n = m0.n();
    let d = m0.d();
    if !args.reduced {
        let steps = (args.t / args.dt).round() as usize;
        let times: Vec<f64> = (0..=steps).map(|k| k as f64 * args.dt).collect();
        let res = sample_master_flow(&h, &m0, &times);
        let mut header = vec!["t".to_string()];
        for tag in ["A", "B"] {
            for i in 0..n {
                for j in 0..n {
                    header.push(format!("re_{tag}{i}{j}"));
                    header.push(format!("im_{tag}{i}{j}"));
                }
            }
        }
        for alpha in 0..d {
            for i in 0..n {
                header.push(format!("re_v{alpha}_{i}"));
                header.push(format!("im_v{alpha}_{i}"));
            }
        }
        header.extend(["phi_drift", "psi_drift", "spec_drift", "unit_drift"].map(String::from));
        writeln!(w, "{}", header.join(","))?;
        for (t, m) in res.times.iter().zip(&res.points) {
            let mut row = vec![fmt(*t)];
            for mat in [m.a.mat(), m.b.mat()] {
                for i in 0..n {
                    for j in 0..n {
                        row.push(fmt(mat[(i, j)].re));
                        row.push(fmt(mat[(i, j)].im));
                    }
                }
            }
            for bv in &m.balls {
                for z in &bv.v {
                    row.push(fmt(z.re));
                    row.push(fmt(z.im));
                }
            }
            row.push(fmt(res.log.phi_drift));
            row.push(fmt(res.log.psi_drift));
            row.push(fmt(res.log.spectral_drift));
            row.push(fmt(res.log.unitarity_drift));
            writeln!(w, "{}", row.join(","))?;
        }
        return Ok(0);
    }
    // Reduced flow on the gauge slice.
    let (s0, _) = gauge_fix(&m0).map_err(|e| anyhow::anyhow!("gauge fixing: {e}"))?;
    let result = integrate_reduced(&h, &s0, args.t, args.dt);
    let mut header = vec!["t".to_string()];
    for i in 0..n {
        for j in 0..n {
            header.push(format!("re_A{i}{j}"));
            header.push(format!("im_A{i}{j}"));
        }
    }
    for j in 0..n {
        header.push(format!("q{j}"));
    }
    for alpha in 0..d {
        for i in 0..n {
            header.push(format!("re_v{alpha}_{i}"));
            header.push(format!("im_v{alpha}_{i}"));
        }
    }
    header.extend(["offdiag_drift", "spec_drift", "unit_drift"].map(String::from));
    writeln!(w, "{}", header.join(","))?;
    match result {
        Ok(res) => {
            for (t, s) in res.times.iter().zip(&res.points) {
                let mut row = vec![fmt(*t)];
                for i in 0..n {
                    for j in 0..n {
                        row.push(fmt(s.a.mat()[(i, j)].re));
                        row.push(fmt(s.a.mat()[(i, j)].im));
                    }
                }
                for &q in s.q.phases() {
                    row.push(fmt(q));
                }
                for bv in &s.balls {
                    for z in &bv.v {
                        row.push(fmt(z.re));
                        row.push(fmt(z.im));
                    }
                }
                row.push(fmt(res.log.offdiag_drift));
                row.push(fmt(res.log.spectral_drift));
                row.push(fmt(res.log.unitarity_drift));
                writeln!(w, "{}", row.join(","))?;
            }
            // Endpoint-error estimate against a half-step run; halving --dt
            // shrinks this by the RK4 factor of ~16.
            if let Ok(half) = integrate_reduced(&h, &s0, args.t, args.dt / 2.0) {
                let a = res.points.last().expect("nonempty trajectory");
                let b = half.points.last().expect("nonempty trajectory");
                let mut err = (a.a.mat() - b.a.mat()).norm_fro();
                for (x, y) in a.q.phases().iter().zip(b.q.phases()) {
                    err = err.max((x - y).abs());
                }
                writeln!(w, "# rk4_endpoint_error_estimate,{}", fmt(err))?;
            }
            Ok(0)
        }
        Err(err) => {
            writeln!(w, "# truncated: {err}")?;
            eprintln!("flow aborted: {err}");
            Ok(1)
        }
    }
}

fn cmd_leaf(args: LeafArgs) -> anyhow::Result<i32> {
    let xs = args.space.xs()?;
    let spec = LeafSpec::new(args.space.n, args.space.d, xs, args.gamma)
        .map_err(|e| anyhow::anyhow!("{e}"))?;
    match build_leaf_point(&spec, args.space.seed) {
        Ok(m) => {
            let residual = leaf_residual(&m, args.gamma);
            let mut w = out_writer(&args.out)?;
            writeln!(w, "{}", point_to_json(&m, Some(args.gamma), Some(residual)))?;
            eprintln!("leaf point built: residual {residual:.3e}");
            Ok(0)
        }
        Err(err) => {
            eprintln!("leaf construction failed: {err}");
            Ok(1)
        }
    }
}

fn cmd_rs(args: RsArgs) -> anyhow::Result<i32> {
    if args.t <= 0.0 || args.dt <= 0.0 {
        bail!("need positive --t and --dt");
    }
    let text = std::fs::read_to_string(&args.point).context("reading point file")?;
    let (m, gamma) =
        point_from_json(&text).map_err(|e| anyhow::anyhow!("parsing point file: {e}"))?;
    let gamma = gamma.context("point file carries no gamma tag; build it with `qpflow leaf`")?;
    let (slice, _) = gauge_fix(&m).map_err(|e| anyhow::anyhow!("gauge fixing: {e}"))?;
    let n = slice.n();
    let mut w = out_writer(&args.out)?;
    let mut header = vec!["t".to_string()];
    for j in 0..n {
        header.push(format!("q{j}"));
    }
    for i in 0..n {
        for j in 0..n {
            header.push(format!("re_F{i}{j}"));
            header.push(format!("im_F{i}{j}"));
        }
    }
    header.push("leaf_drift".into());
    writeln!(w, "{}", header.join(","))?;
    match integrate_rs(&slice, gamma, args.t, args.dt) {
        Ok(traj) => {
            for sample in &traj.samples {
                let mut row = vec![fmt(sample.t)];
                for &q in &sample.state.q {
                    row.push(fmt(q));
                }
                for i in 0..n {
                    for j in 0..n {
                        row.push(fmt(sample.f[(i, j)].re));
                        row.push(fmt(sample.f[(i, j)].im));
                    }
                }
                row.push(fmt(sample.leaf_drift));
                writeln!(w, "{}", row.join(","))?;
            }
            eprintln!(
                "integrated to t = {}: leaf drift {:.3e}, tr F drift {:.3e}",
                args.t, traj.max_leaf_drift, traj.max_trf_drift
            );
            Ok(0)
        }
        Err(err) => {
            writeln!(w, "# truncated: {err}")?;
            eprintln!("rs integration aborted: {err}");
            Ok(1)
        }
    }
}
