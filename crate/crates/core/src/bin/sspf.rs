//! Command-line front end.
//!
//! Every command reads and writes plain files: fields as `xi1,xi2,value`
//! CSV with a JSON sidecar, profiles as `xi,chi,dchi` CSV, reports as
//! JSON. Outputs are deterministic byte for byte: no timestamps, floats
//! in shortest round-trip form, sorted JSON maps. Exit code 0 is success,
//! 1 is a verified failure (a violated precondition, a non-convergent
//! solve, or a ViolationCandidate verdict under --strict), 2 is a usage
//! or file-format error.

use std::path::{Path, PathBuf};
use std::str::FromStr;

use clap::{Args, Parser, Subcommand, ValueEnum};

use sspf::ellipticity::{
    check_wall_conditions, make_barrier, max_sound_speed, sweep_delta, verify_max_principle,
    Verdict,
};
use sspf::error::{Error, Result};
use sspf::exact::{self, Branch1d, Ic1d, Sign};
use sspf::field::{self, ScalarField, TransformOp, Variable};
use sspf::gas::{pseudo_mach_classify, GasModel, DEFAULT_TOL_L};
use sspf::grid::{GridSpec, WallEdge, WallSet};
use sspf::io::{self, Manifest};
use sspf::solver::{solve_dirichlet, SolverConfig};

#[derive(Parser)]
#[command(
    name = "sspf",
    version,
    about = "Self-similar potential flow: exact solutions, grid solver, ellipticity checks"
)]
struct Cli {
    #[command(subcommand)]
    cmd: Cmd,
}

#[derive(Subcommand)]
enum Cmd {
    /// Sample a closed-form solution to files
    Exact {
        #[command(subcommand)]
        which: ExactCmd,
    },
    /// Solve the interior chi problem from Dirichlet boundary data
    Solve(SolveArgs),
    /// Pseudo-Mach number and type tag at every node
    Classify(ClassifyArgs),
    /// Discrete residual of a field
    Residual(ResidualArgs),
    /// Apply a self-similarity symmetry to a field
    Transform(TransformArgs),
    /// Even reflection of a chi field across a wall edge
    Reflect(ReflectArgs),
    /// Check the maximum principle for L^2 + barrier on a field
    Verify(VerifyArgs),
    /// Run the verifier over a list of margins delta
    SweepDelta(SweepArgs),
    /// Wall compatibility norms along one edge
    WallCheck(WallArgs),
    /// Rewrite a field in the other representation (chi/psi)
    Export(ExportArgs),
}

#[derive(Subcommand)]
enum ExactCmd {
    /// Constant-velocity flow chi = v.xi - |xi|^2/2 + A'
    Uniform(UniformArgs),
    /// One-dimensional affine or rarefaction profile
    Oned(OnedArgs),
    /// Radially symmetric profile chi(r)
    Radial(RadialArgs),
}

#[derive(Args, Clone)]
struct GasArgs {
    /// Polytropic exponent gamma
    #[arg(long, allow_negative_numbers = true)]
    gamma: f64,
    /// Base sound speed c0
    #[arg(long, default_value_t = 1.0)]
    c0: f64,
    /// Base density rho0
    #[arg(long, default_value_t = 1.0)]
    rho0: f64,
    /// Bernoulli constant A
    #[arg(long, default_value_t = 0.0, allow_negative_numbers = true)]
    bernoulli: f64,
}

impl GasArgs {
    fn build(&self) -> Result<GasModel> {
        Ok(GasModel::new(self.gamma, self.c0, self.rho0)?.with_bernoulli(self.bernoulli))
    }
}

/// Gas flags for commands whose input may already carry a gas in its
/// sidecar. Flags win over the sidecar; gamma must come from one of them.
#[derive(Args, Clone)]
struct GasOverride {
    /// Polytropic exponent gamma
    #[arg(long, allow_negative_numbers = true)]
    gamma: Option<f64>,
    /// Base sound speed c0
    #[arg(long)]
    c0: Option<f64>,
    /// Base density rho0
    #[arg(long)]
    rho0: Option<f64>,
    /// Bernoulli constant A
    #[arg(long, allow_negative_numbers = true)]
    bernoulli: Option<f64>,
}

impl GasOverride {
    fn resolve(&self, sidecar: Option<GasModel>) -> Result<GasModel> {
        let gamma = self
            .gamma
            .or(sidecar.map(|g| g.gamma))
            .ok_or_else(|| {
                Error::InvalidArgument(
                    "--gamma is required (the field sidecar carries no gas)".into(),
                )
            })?;
        let c0 = self.c0.or(sidecar.map(|g| g.c0)).unwrap_or(1.0);
        let rho0 = self.rho0.or(sidecar.map(|g| g.rho0)).unwrap_or(1.0);
        let a = self
            .bernoulli
            .or(sidecar.map(|g| g.bernoulli_a))
            .unwrap_or(0.0);
        Ok(GasModel::new(gamma, c0, rho0)?.with_bernoulli(a))
    }
}

#[derive(Clone, Copy)]
struct GridDims([usize; 2]);

impl FromStr for GridDims {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let (a, b) = s.split_once('x').ok_or_else(|| {
            Error::InvalidArgument(format!("expected N1xN2 (e.g. 65x65), got {s:?}"))
        })?;
        let parse = |t: &str| {
            t.trim()
                .parse::<usize>()
                .map_err(|_| Error::InvalidArgument(format!("bad grid size {t:?}")))
        };
        Ok(GridDims([parse(a)?, parse(b)?]))
    }
}

#[derive(Clone, Copy)]
struct Extent {
    lo: [f64; 2],
    hi: [f64; 2],
}

fn parse_range(s: &str) -> Result<[f64; 2]> {
    let (a, b) = s
        .split_once(':')
        .ok_or_else(|| Error::InvalidArgument(format!("expected lo:hi, got {s:?}")))?;
    let parse = |t: &str| {
        t.trim()
            .parse::<f64>()
            .map_err(|_| Error::InvalidArgument(format!("bad number {t:?}")))
    };
    Ok([parse(a)?, parse(b)?])
}

impl FromStr for Extent {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let (x, y) = s.split_once(',').ok_or_else(|| {
            Error::InvalidArgument(format!(
                "expected lo:hi,lo:hi (e.g. -0.5:0.5,-0.5:0.5), got {s:?}"
            ))
        })?;
        let rx = parse_range(x)?;
        let ry = parse_range(y)?;
        Ok(Extent {
            lo: [rx[0], ry[0]],
            hi: [rx[1], ry[1]],
        })
    }
}

#[derive(Clone, Copy)]
struct Interval([f64; 2]);

impl FromStr for Interval {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        parse_range(s).map(Interval)
    }
}

/// The gauge c_hat: a number, or "auto" for the largest computed sound
/// speed times (1 + 1e-12).
#[derive(Clone, Copy)]
enum ChatArg {
    Auto,
    Value(f64),
}

impl FromStr for ChatArg {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        if s == "auto" {
            return Ok(ChatArg::Auto);
        }
        s.parse::<f64>()
            .map(ChatArg::Value)
            .map_err(|_| Error::InvalidArgument(format!("expected auto or a number, got {s:?}")))
    }
}

impl ChatArg {
    fn resolve(&self, field: &ScalarField, gas: &GasModel) -> Result<(f64, String)> {
        match self {
            ChatArg::Value(v) => Ok((*v, format!("{v}"))),
            ChatArg::Auto => {
                let c = max_sound_speed(field, gas)? * (1.0 + 1e-12);
                Ok((c, "auto".into()))
            }
        }
    }
}

#[derive(Clone, Copy)]
struct OpArg(TransformOp);

impl FromStr for OpArg {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let (name, rest) = s.split_once(':').unwrap_or((s, ""));
        let op = match name {
            "translate" => {
                let (a, b) = rest.split_once(',').ok_or_else(|| {
                    Error::InvalidArgument(format!("expected translate:dx,dy, got {s:?}"))
                })?;
                let parse = |t: &str| {
                    t.trim()
                        .parse::<f64>()
                        .map_err(|_| Error::InvalidArgument(format!("bad shift {t:?}")))
                };
                TransformOp::Translate([parse(a)?, parse(b)?])
            }
            "rotate" => {
                let k = if rest.is_empty() {
                    1
                } else {
                    rest.parse::<u32>().map_err(|_| {
                        Error::InvalidArgument(format!("bad quarter-turn count {rest:?}"))
                    })?
                };
                TransformOp::RotateQuarter(k)
            }
            "scale" => {
                let v = rest.parse::<f64>().map_err(|_| {
                    Error::InvalidArgument(format!("expected scale:factor, got {s:?}"))
                })?;
                TransformOp::Scale(v)
            }
            other => {
                return Err(Error::InvalidArgument(format!(
                    "unknown op {other:?} (expected translate:dx,dy | rotate[:k] | scale:s)"
                )))
            }
        };
        Ok(OpArg(op))
    }
}

#[derive(Clone, Copy, ValueEnum)]
enum BranchArg {
    Affine,
    RarefactionPlus,
    RarefactionMinus,
}

impl BranchArg {
    fn to_branch(self) -> Branch1d {
        match self {
            BranchArg::Affine => Branch1d::Affine,
            BranchArg::RarefactionPlus => Branch1d::Rarefaction(Sign::Plus),
            BranchArg::RarefactionMinus => Branch1d::Rarefaction(Sign::Minus),
        }
    }

    fn name(self) -> &'static str {
        match self {
            BranchArg::Affine => "affine",
            BranchArg::RarefactionPlus => "rarefaction-plus",
            BranchArg::RarefactionMinus => "rarefaction-minus",
        }
    }
}

#[derive(Clone, Copy, ValueEnum)]
enum VarArg {
    Chi,
    Psi,
}

impl VarArg {
    fn to_var(self) -> Variable {
        match self {
            VarArg::Chi => Variable::Chi,
            VarArg::Psi => Variable::Psi,
        }
    }
}

#[derive(Args)]
struct UniformArgs {
    #[command(flatten)]
    gas: GasArgs,
    /// Velocity component v1
    #[arg(long, default_value_t = 0.0, allow_negative_numbers = true)]
    vx: f64,
    /// Velocity component v2
    #[arg(long, default_value_t = 0.0, allow_negative_numbers = true)]
    vy: f64,
    /// Additive constant A' of chi
    #[arg(long, default_value_t = 0.0, allow_negative_numbers = true)]
    aprime: f64,
    /// Nodes per axis, N1xN2
    #[arg(long)]
    grid: GridDims,
    /// Domain lo:hi,lo:hi
    #[arg(long, allow_hyphen_values = true)]
    extent: Extent,
    /// Slip edges, comma-separated (left,right,bottom,top)
    #[arg(long, value_delimiter = ',')]
    walls: Option<Vec<WallEdge>>,
    /// Output representation
    #[arg(long, value_enum, default_value = "chi")]
    var: VarArg,
    /// Output CSV path (sidecar JSON lands next to it)
    #[arg(long)]
    out: PathBuf,
}

#[derive(Args)]
struct OnedArgs {
    #[command(flatten)]
    gas: GasArgs,
    /// Solution branch
    #[arg(long, value_enum)]
    branch: BranchArg,
    /// Initial coordinate xi0
    #[arg(long, default_value_t = 0.0, allow_negative_numbers = true)]
    x0: f64,
    /// chi(xi0)
    #[arg(long, allow_negative_numbers = true)]
    chi0: f64,
    /// chi'(xi0)
    #[arg(long, allow_negative_numbers = true)]
    dchi0: f64,
    /// Output interval lo:hi
    #[arg(long, allow_hyphen_values = true)]
    interval: Interval,
    /// Number of samples
    #[arg(long, default_value_t = 101)]
    n: usize,
    /// Output CSV path
    #[arg(long)]
    out: PathBuf,
}

#[derive(Args)]
struct RadialArgs {
    #[command(flatten)]
    gas: GasArgs,
    /// Space dimension d
    #[arg(long, default_value_t = 2)]
    dim: u32,
    /// Initial radius r0 > 0
    #[arg(long)]
    r0: f64,
    /// chi(r0)
    #[arg(long, allow_negative_numbers = true)]
    chi0: f64,
    /// chi'(r0)
    #[arg(long, allow_negative_numbers = true)]
    dchi0: f64,
    /// Target radius
    #[arg(long)]
    r1: f64,
    /// Number of samples
    #[arg(long, default_value_t = 101)]
    n: usize,
    /// Output CSV path
    #[arg(long)]
    out: PathBuf,
}

#[derive(Args)]
struct SolveArgs {
    /// Boundary data: field CSV whose Dirichlet-edge values are used
    #[arg(long)]
    boundary: PathBuf,
    /// Optional initial iterate (field CSV)
    #[arg(long)]
    guess: Option<PathBuf>,
    #[command(flatten)]
    gas: GasOverride,
    /// Override the slip edges of the boundary grid
    #[arg(long, value_delimiter = ',')]
    walls: Option<Vec<WallEdge>>,
    /// Newton iteration cap
    #[arg(long)]
    max_iters: Option<usize>,
    /// Residual max-norm target
    #[arg(long)]
    tol: Option<f64>,
    /// Frozen-coefficient warmup iterations
    #[arg(long)]
    picard: Option<usize>,
    /// Lower clamp for c^2 during iteration
    #[arg(long)]
    c2_floor: Option<f64>,
    /// Pseudo-Mach damping threshold
    #[arg(long)]
    l_guard: Option<f64>,
    /// key=value file supplying defaults for the solver options
    #[arg(long)]
    config: Option<PathBuf>,
    /// Output CSV path
    #[arg(long)]
    out: PathBuf,
}

#[derive(Args)]
struct ClassifyArgs {
    /// Input field CSV
    #[arg(long)]
    field: PathBuf,
    #[command(flatten)]
    gas: GasOverride,
    /// Half-width of the parabolic band around L = 1
    #[arg(long, default_value_t = DEFAULT_TOL_L)]
    tol_l: f64,
    /// Output CSV path (values are L)
    #[arg(long)]
    out: PathBuf,
}

#[derive(Args)]
struct ResidualArgs {
    /// Input field CSV
    #[arg(long)]
    field: PathBuf,
    #[command(flatten)]
    gas: GasOverride,
    /// Output CSV path
    #[arg(long)]
    out: PathBuf,
}

#[derive(Args)]
struct TransformArgs {
    /// Input field CSV
    #[arg(long)]
    field: PathBuf,
    /// translate:dx,dy | rotate[:k] | scale:s
    #[arg(long)]
    op: OpArg,
    /// Output CSV path
    #[arg(long)]
    out: PathBuf,
}

#[derive(Args)]
struct ReflectArgs {
    /// Input field CSV (chi)
    #[arg(long)]
    field: PathBuf,
    /// Wall edge to reflect across
    #[arg(long)]
    edge: WallEdge,
    /// Slip tolerance override
    #[arg(long)]
    slip_tol: Option<f64>,
    /// Output CSV path
    #[arg(long)]
    out: PathBuf,
}

#[derive(Args)]
struct VerifyArgs {
    /// Input field CSV
    #[arg(long)]
    field: PathBuf,
    #[command(flatten)]
    gas: GasOverride,
    /// Ellipticity margin delta in (0, 1)
    #[arg(long)]
    delta: f64,
    /// Sound-speed gauge c_hat: a number or "auto"
    #[arg(long, default_value = "auto")]
    chat: ChatArg,
    /// Tolerance constant in tol = k_ver h^2 scale
    #[arg(long)]
    k_ver: Option<f64>,
    /// Exit 1 on a ViolationCandidate verdict
    #[arg(long)]
    strict: bool,
    /// Report path; stdout when absent
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct SweepArgs {
    /// Input field CSV
    #[arg(long)]
    field: PathBuf,
    #[command(flatten)]
    gas: GasOverride,
    /// Margins to test, comma-separated
    #[arg(long, value_delimiter = ',', required = true)]
    deltas: Vec<f64>,
    /// Sound-speed gauge c_hat: a number or "auto"
    #[arg(long, default_value = "auto")]
    chat: ChatArg,
    /// Tolerance constant in tol = k_ver h^2 scale
    #[arg(long)]
    k_ver: Option<f64>,
    /// Report path; stdout when absent
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct WallArgs {
    /// Input field CSV
    #[arg(long)]
    field: PathBuf,
    #[command(flatten)]
    gas: GasOverride,
    /// Wall edge to check
    #[arg(long)]
    edge: WallEdge,
    /// Report path; stdout when absent
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct ExportArgs {
    /// Input field CSV
    #[arg(long)]
    field: PathBuf,
    /// Target representation
    #[arg(long, value_enum)]
    to: VarArg,
    /// Output CSV path
    #[arg(long)]
    out: PathBuf,
}

fn main() {
    let cli = Cli::parse();
    match run(cli.cmd) {
        Ok(code) => std::process::exit(code),
        Err(e) => {
            eprintln!("sspf: {e}");
            std::process::exit(match e {
                Error::Precondition(_)
                | Error::InvalidState { .. }
                | Error::Degenerate(_)
                | Error::InconsistentIc(_) => 1,
                _ => 2,
            });
        }
    }
}

fn run(cmd: Cmd) -> Result<i32> {
    match cmd {
        Cmd::Exact { which } => match which {
            ExactCmd::Uniform(a) => exact_uniform(a),
            ExactCmd::Oned(a) => exact_oned(a),
            ExactCmd::Radial(a) => exact_radial(a),
        },
        Cmd::Solve(a) => solve(a),
        Cmd::Classify(a) => classify(a),
        Cmd::Residual(a) => residual(a),
        Cmd::Transform(a) => transform(a),
        Cmd::Reflect(a) => reflect(a),
        Cmd::Verify(a) => verify(a),
        Cmd::SweepDelta(a) => sweep(a),
        Cmd::WallCheck(a) => wall_check(a),
        Cmd::Export(a) => export(a),
    }
}

fn wall_set(edges: &[WallEdge]) -> WallSet {
    edges.iter().fold(WallSet::empty(), |s, e| s.with(*e))
}

/// Loads a field and resolves the gas against the sidecar; psi inputs are
/// converted so downstream code always sees chi.
fn load_chi(path: &Path, gas: &GasOverride) -> Result<(ScalarField, GasModel)> {
    let (field, side_gas) = io::read_field(path)?;
    let gas = gas.resolve(side_gas)?;
    let field = match field.var() {
        Variable::Psi => field::convert(&field)?,
        _ => field,
    };
    Ok((field, gas))
}

fn emit_report(out: Option<&Path>, manifest: &Manifest) -> Result<()> {
    match out {
        Some(path) => io::write_json(path, manifest),
        None => {
            println!("{}", serde_json::to_string_pretty(manifest)?);
            Ok(())
        }
    }
}

fn exact_uniform(a: UniformArgs) -> Result<i32> {
    let gas = a.gas.build()?;
    let mut grid = GridSpec::from_extent(a.extent.lo, a.extent.hi, a.grid.0)?;
    if let Some(walls) = &a.walls {
        grid = grid.with_walls(wall_set(walls));
    }
    let mut field = exact::uniform_flow([a.vx, a.vy], a.aprime, &gas, grid)?;
    if a.var.to_var() == Variable::Psi {
        field = field::convert(&field)?;
    }
    let mut manifest = Manifest::new("exact uniform").with_field(&field).with_gas(&gas);
    manifest.insert(
        "config",
        serde_json::json!({
            "vx": a.vx, "vy": a.vy, "aprime": a.aprime,
        }),
    )?;
    io::write_field_with_manifest(&a.out, &field, &manifest)?;
    Ok(0)
}

fn exact_oned(a: OnedArgs) -> Result<i32> {
    let gas = a.gas.build()?;
    let ic = Ic1d {
        coord: a.x0,
        chi: a.chi0,
        dchi: a.dchi0,
    };
    let profile = exact::solve_1d(&gas, a.branch.to_branch(), ic, a.interval.0, a.n)?;
    let mut manifest = Manifest::new("exact oned").with_gas(&gas);
    manifest.insert(
        "config",
        serde_json::json!({
            "branch": a.branch.name(),
            "x0": a.x0, "chi0": a.chi0, "dchi0": a.dchi0,
            "interval": a.interval.0, "n": a.n,
        }),
    )?;
    manifest.insert("sonic_points", &profile.sonic_points)?;
    manifest.insert("truncated", profile.truncated)?;
    io::write_profile_csv(&a.out, &profile)?;
    io::write_json(&io::sidecar_path(&a.out), &manifest)?;
    Ok(0)
}

fn exact_radial(a: RadialArgs) -> Result<i32> {
    let gas = a.gas.build()?;
    let ic = Ic1d {
        coord: a.r0,
        chi: a.chi0,
        dchi: a.dchi0,
    };
    let profile = exact::solve_radial(&gas, a.dim, ic, a.r1, a.n)?;
    let mut manifest = Manifest::new("exact radial").with_gas(&gas);
    manifest.insert(
        "config",
        serde_json::json!({
            "dim": a.dim,
            "r0": a.r0, "chi0": a.chi0, "dchi0": a.dchi0,
            "r1": a.r1, "n": a.n,
        }),
    )?;
    manifest.insert("sonic_points", &profile.sonic_points)?;
    manifest.insert("truncated", profile.truncated)?;
    io::write_profile_csv(&a.out, &profile)?;
    io::write_json(&io::sidecar_path(&a.out), &manifest)?;
    Ok(0)
}

fn get_knob<T: FromStr>(
    flag: Option<T>,
    cfg: &std::collections::BTreeMap<String, String>,
    key: &str,
) -> Result<Option<T>> {
    if flag.is_some() {
        return Ok(flag);
    }
    match cfg.get(key) {
        None => Ok(None),
        Some(raw) => raw
            .parse::<T>()
            .map(Some)
            .map_err(|_| Error::Format(format!("config key {key}: bad value {raw:?}"))),
    }
}

fn solve(a: SolveArgs) -> Result<i32> {
    let cfg = match &a.config {
        Some(path) => {
            let map = io::read_config(path)?;
            const KNOWN: [&str; 5] = ["max-iters", "tol", "picard", "c2-floor", "l-guard"];
            if let Some(k) = map.keys().find(|k| !KNOWN.contains(&k.as_str())) {
                return Err(Error::Format(format!(
                    "config key {k:?} is not a solver option (expected one of {KNOWN:?})"
                )));
            }
            map
        }
        None => Default::default(),
    };
    let (boundary, gas) = load_chi(&a.boundary, &a.gas)?;
    let mut grid = *boundary.grid();
    if let Some(walls) = &a.walls {
        grid = grid.with_walls(wall_set(walls));
    }
    let guess = match &a.guess {
        Some(path) => {
            let (g, _) = io::read_field(path)?;
            Some(match g.var() {
                Variable::Psi => field::convert(&g)?,
                _ => g,
            })
        }
        None => None,
    };

    let defaults = SolverConfig::default();
    let config = SolverConfig {
        max_newton_iters: get_knob(a.max_iters, &cfg, "max-iters")?
            .unwrap_or(defaults.max_newton_iters),
        residual_tol: get_knob(a.tol, &cfg, "tol")?,
        picard_warmup_iters: get_knob(a.picard, &cfg, "picard")?
            .unwrap_or(defaults.picard_warmup_iters),
        c2_floor: get_knob(a.c2_floor, &cfg, "c2-floor")?,
        l_guard: get_knob(a.l_guard, &cfg, "l-guard")?.unwrap_or(defaults.l_guard),
        ..defaults
    };

    let (field, report) = solve_dirichlet(grid, &boundary, &gas, &config, guess.as_ref())?;
    let converged = report.converged;
    let mut manifest = Manifest::new("solve").with_field(&field).with_gas(&gas);
    manifest.insert(
        "config",
        serde_json::json!({
            "max-iters": config.max_newton_iters,
            "tol": config.residual_tol,
            "picard": config.picard_warmup_iters,
            "c2-floor": config.c2_floor,
            "l-guard": config.l_guard,
        }),
    )?;
    manifest.insert("report", &report)?;
    io::write_field_with_manifest(&a.out, &field, &manifest)?;
    if converged {
        Ok(0)
    } else {
        eprintln!(
            "sspf: solver did not reach the residual target (see {})",
            io::sidecar_path(&a.out).display()
        );
        Ok(1)
    }
}

fn classify(a: ClassifyArgs) -> Result<i32> {
    let (field, gas) = load_chi(&a.field, &a.gas)?;
    let g = *field.grid();
    let mut values = Vec::with_capacity(g.len());
    let mut counts = [0usize; 3];
    let mut max_l: f64 = 0.0;
    for i1 in 0..g.dims[0] {
        for i2 in 0..g.dims[1] {
            // One-sided gradients on the boundary: classification only
            // needs first derivatives, unlike the full point state.
            let grad = field::grad_chi_at(&field, i1, i2);
            let c2 = gas.sound_speed_sq(field.value(i1, i2), &grad)?;
            let (l, tag) = pseudo_mach_classify(&grad, c2, a.tol_l)?;
            values.push(l);
            max_l = max_l.max(l);
            counts[tag as usize] += 1;
        }
    }
    let out_field = ScalarField::from_values(g, Variable::Residual, values)?;
    let mut manifest = Manifest::new("classify").with_field(&out_field).with_gas(&gas);
    manifest.insert("config", serde_json::json!({ "tol-l": a.tol_l }))?;
    manifest.insert(
        "summary",
        serde_json::json!({
            "elliptic": counts[0],
            "parabolic": counts[1],
            "hyperbolic": counts[2],
            "max_l": max_l,
        }),
    )?;
    io::write_field_with_manifest(&a.out, &out_field, &manifest)?;
    Ok(0)
}

fn residual(a: ResidualArgs) -> Result<i32> {
    let (field, side_gas) = io::read_field(&a.field)?;
    let gas = a.gas.resolve(side_gas)?;
    let res = match field.var() {
        Variable::Chi => field::residual_chi(&field, &gas)?,
        Variable::Psi => field::residual_psi(&field, &gas)?,
        Variable::Residual => {
            return Err(Error::Precondition(
                "input is already a residual field".into(),
            ))
        }
    };
    let mut manifest = Manifest::new("residual").with_field(&res).with_gas(&gas);
    manifest.insert(
        "summary",
        serde_json::json!({
            "inf_norm": res.inf_norm(),
            "l2_norm": res.l2_norm(),
        }),
    )?;
    io::write_field_with_manifest(&a.out, &res, &manifest)?;
    Ok(0)
}

fn transform(a: TransformArgs) -> Result<i32> {
    let (field, side_gas) = io::read_field(&a.field)?;
    let out_field = field::transform(&field, a.op.0)?;
    let mut manifest = Manifest::new("transform").with_field(&out_field);
    manifest.gas = side_gas;
    manifest.insert(
        "config",
        serde_json::json!({ "op": format!("{:?}", a.op.0) }),
    )?;
    io::write_field_with_manifest(&a.out, &out_field, &manifest)?;
    Ok(0)
}

fn reflect(a: ReflectArgs) -> Result<i32> {
    let (field, side_gas) = io::read_field(&a.field)?;
    let field = match field.var() {
        Variable::Psi => field::convert(&field)?,
        _ => field,
    };
    let out_field = field::reflect_even(&field, a.edge, a.slip_tol)?;
    let mut manifest = Manifest::new("reflect").with_field(&out_field);
    manifest.gas = side_gas;
    manifest.insert(
        "config",
        serde_json::json!({ "edge": a.edge.name(), "slip-tol": a.slip_tol }),
    )?;
    io::write_field_with_manifest(&a.out, &out_field, &manifest)?;
    Ok(0)
}

fn verify(a: VerifyArgs) -> Result<i32> {
    let (field, gas) = load_chi(&a.field, &a.gas)?;
    let (c_hat, chat_echo) = a.chat.resolve(&field, &gas)?;
    let barrier = make_barrier(field.grid(), c_hat, a.delta)?;
    let report = verify_max_principle(&field, &gas, &barrier, a.delta, a.k_ver)?;
    let violation = report.verdict == Verdict::ViolationCandidate;
    let mut manifest = Manifest::new("verify").with_field(&field).with_gas(&gas);
    manifest.insert(
        "config",
        serde_json::json!({
            "delta": a.delta,
            "chat": chat_echo,
            "c_hat": c_hat,
            "k_ver": a.k_ver,
            "strict": a.strict,
        }),
    )?;
    manifest.insert("report", &report)?;
    emit_report(a.out.as_deref(), &manifest)?;
    if violation && a.strict {
        eprintln!("sspf: interior maximum candidate (strict mode)");
        return Ok(1);
    }
    Ok(0)
}

fn sweep(a: SweepArgs) -> Result<i32> {
    let (field, gas) = load_chi(&a.field, &a.gas)?;
    let (c_hat, chat_echo) = a.chat.resolve(&field, &gas)?;
    let report = sweep_delta(&field, &gas, c_hat, &a.deltas, a.k_ver)?;
    let mut manifest = Manifest::new("sweep-delta").with_field(&field).with_gas(&gas);
    manifest.insert(
        "config",
        serde_json::json!({
            "deltas": a.deltas,
            "chat": chat_echo,
            "c_hat": c_hat,
            "k_ver": a.k_ver,
        }),
    )?;
    manifest.insert("report", &report)?;
    emit_report(a.out.as_deref(), &manifest)?;
    Ok(0)
}

fn wall_check(a: WallArgs) -> Result<i32> {
    let (field, gas) = load_chi(&a.field, &a.gas)?;
    let norms = check_wall_conditions(&field, &gas, a.edge)?;
    let mut manifest = Manifest::new("wall-check").with_field(&field).with_gas(&gas);
    manifest.insert("config", serde_json::json!({ "edge": a.edge.name() }))?;
    manifest.insert("report", &norms)?;
    emit_report(a.out.as_deref(), &manifest)?;
    Ok(0)
}

fn export(a: ExportArgs) -> Result<i32> {
    let (field, side_gas) = io::read_field(&a.field)?;
    let target = a.to.to_var();
    let out_field = if field.var() == target {
        field
    } else {
        field::convert(&field)?
    };
    let mut manifest = Manifest::new("export").with_field(&out_field);
    manifest.gas = side_gas;
    io::write_field_with_manifest(&a.out, &out_field, &manifest)?;
    Ok(0)
}
