use rayon::prelude::*;
use serde::Serialize;

use geyor_core::bounds::{self, BoundsConfig, SandwichReport};
use geyor_core::harnack::{self, ChainConfig, Control};
use geyor_core::kernels::{gamma0, KernelSpec, QuadratureConfig};
use geyor_core::montecarlo::{self, DensitySurface, GridSpec, KdeTransform};
use geyor_core::pricing::{self, Method, PriceReport, PricingConfig, PricingInput};
use geyor_core::value::{self, Branch};
use geyor_core::{GPoint, McConfig, PsiValue, Scheme, SdeModel};

use crate::args::*;
use crate::output::{json, num, row};
use crate::{parse, CliError, CommandOutput};

pub(crate) fn run(cli: &Cli) -> Result<CommandOutput, CliError> {
    match &cli.command {
        Command::Psi(a) => psi(a, cli.format),
        Command::Kernel(a) => kernel(a, cli.format),
        Command::Bounds(a) => bounds(a),
        Command::Simulate(a) => simulate(a, cli.format),
        Command::Price(a) => price(a),
        Command::Harnack(a) => harnack(a),
    }
}

fn plain(text: String) -> CommandOutput {
    CommandOutput {
        text,
        seeds: Vec::new(),
        failed: false,
    }
}

/// `(point, pole)` pairs from either `--point/--pole` or `--grid`.
fn pairs(
    point: &Option<String>,
    pole: &Option<String>,
    grid: &Option<std::path::PathBuf>,
) -> Result<Vec<parse::Pair>, CliError> {
    match (point, pole, grid) {
        (Some(p), Some(q), None) => Ok(vec![(
            parse::triple(p, "--point")?,
            parse::triple(q, "--pole")?,
        )]),
        (None, None, Some(g)) => parse::pair_grid(g),
        (None, Some(_), Some(_)) => Err(CliError::Usage(
            "--pole cannot be combined with --grid".into(),
        )),
        _ => Err(CliError::Usage("give --point and --pole, or --grid".into())),
    }
}

fn coords(z: [f64; 3], p: [f64; 3]) -> Vec<String> {
    z.iter().chain(p.iter()).map(|v| num(*v)).collect()
}

#[derive(Serialize)]
struct PsiRow {
    x: f64,
    y: f64,
    t: f64,
    x0: f64,
    y0: f64,
    t0: f64,
    #[serde(rename = "E")]
    energy: Option<f64>,
    psi: PsiValue,
    branch: Option<Branch>,
}

fn psi_row(z: [f64; 3], p: [f64; 3]) -> Result<PsiRow, CliError> {
    let start = GPoint::new(z[0], z[1], z[2])?;
    let end = GPoint::new(p[0], p[1], p[2])?;
    let psi = value::psi(&start, &end)?;
    let (energy, branch) = if psi.is_finite() {
        match value::synthesize(&start, &end) {
            Ok(s) => (Some(s.energy), Some(s.branch)),
            Err(_) => (value::energy(&start, &end).ok(), None),
        }
    } else {
        (None, None)
    };
    Ok(PsiRow {
        x: z[0],
        y: z[1],
        t: z[2],
        x0: p[0],
        y0: p[1],
        t0: p[2],
        energy,
        psi,
        branch,
    })
}

fn psi(a: &PsiArgs, format: Format) -> Result<CommandOutput, CliError> {
    let input = pairs(&a.point, &a.pole, &a.grid)?;
    let rows: Vec<PsiRow> = input
        .par_iter()
        .map(|&(z, p)| psi_row(z, p))
        .collect::<Result<_, _>>()?;
    let traj = match a.traj {
        Some(n) => {
            let (z, p) = input[0];
            let start = GPoint::new(z[0], z[1], z[2])?;
            let end = GPoint::new(p[0], p[1], p[2])?;
            if !rows[0].psi.is_finite() {
                return Err(CliError::Usage("no trajectory: psi is infinite".into()));
            }
            Some(value::trajectory(&start, &end, n)?)
        }
        None => None,
    };
    let text = match format {
        Format::Json => {
            #[derive(Serialize)]
            struct Doc<'a> {
                rows: &'a [PsiRow],
                #[serde(skip_serializing_if = "Option::is_none")]
                trajectory: Option<&'a [geyor_core::TrajectorySample]>,
            }
            json(&Doc {
                rows: &rows,
                trajectory: traj.as_deref(),
            })?
        }
        Format::Csv => {
            let mut s = String::from("x,y,t,x0,y0,t0,E,psi,branch\n");
            for r in &rows {
                let mut f = coords([r.x, r.y, r.t], [r.x0, r.y0, r.t0]);
                f.push(num(r.energy.unwrap_or(f64::NAN)));
                f.push(match r.psi {
                    PsiValue::Finite(v) => num(v),
                    PsiValue::Infinite => "inf".into(),
                });
                f.push(
                    r.branch
                        .map_or_else(|| "none".to_string(), |b| b.to_string()),
                );
                s += &row(&f);
            }
            if let Some(tr) = &traj {
                s += "\ns,t,x,y,lambda1,lambda2,omega\n";
                for p in tr {
                    s += &row(&[p.s, p.t, p.x, p.y, p.lambda1, p.lambda2, p.omega].map(num));
                }
            }
            s
        }
    };
    Ok(plain(text))
}

fn kernel(a: &KernelArgs, format: Format) -> Result<CommandOutput, CliError> {
    let need_mu = || {
        a.mu.ok_or_else(|| CliError::Usage("--mu is required for this kernel".into()))
    };
    let spec = match a.kind {
        KernelType::Gamma0 => KernelSpec::Gamma0,
        KernelType::Kolmo => KernelSpec::Kolmogorov,
        KernelType::KolmoMu => KernelSpec::KolmogorovMu { mu: need_mu()? },
        KernelType::GammaMu => KernelSpec::GammaMu { mu: need_mu()? },
    };
    let input = pairs(&a.point, &a.pole, &a.grid)?;
    let cfg = QuadratureConfig::default();
    let evals: Vec<_> = input
        .par_iter()
        .map(|&(z, p)| spec.evaluate(z, p, &cfg).map_err(CliError::from))
        .collect::<Result<_, _>>()?;
    let text = match format {
        Format::Json => {
            #[derive(Serialize)]
            struct Row {
                point: [f64; 3],
                pole: [f64; 3],
                value: f64,
                est_error: f64,
                flags: String,
            }
            let rows: Vec<Row> = input
                .iter()
                .zip(&evals)
                .map(|(&(z, p), e)| Row {
                    point: z,
                    pole: p,
                    value: e.value,
                    est_error: e.est_error,
                    flags: e.flags.to_string(),
                })
                .collect();
            json(&rows)?
        }
        Format::Csv => {
            let mut s = String::from("x,y,t,x0,y0,t0,value,est_error,flags\n");
            for (&(z, p), e) in input.iter().zip(&evals) {
                let mut f = coords(z, p);
                f.extend([num(e.value), num(e.est_error), e.flags.to_string()]);
                s += &row(&f);
            }
            s
        }
    };
    Ok(plain(text))
}

fn gamma_on(grid: &[GPoint], pole: &GPoint) -> Result<Vec<f64>, CliError> {
    let cfg = QuadratureConfig::default();
    grid.par_iter()
        .map(|z| {
            gamma0(z, pole, &cfg)
                .map(|e| e.value)
                .map_err(CliError::from)
        })
        .collect()
}

#[derive(Serialize)]
struct BoundsDoc {
    config: BoundsConfig,
    #[serde(skip_serializing_if = "Option::is_none")]
    calibrated: Option<BoundsConfig>,
    /// Constants the check used (calibrated and relaxed, or `config`).
    checked_with: BoundsConfig,
    report: SandwichReport,
}

fn bounds(a: &BoundsArgs) -> Result<CommandOutput, CliError> {
    let grid = match (&a.grid, &a.r#box) {
        (Some(g), None) => parse::point_grid(g)?,
        (None, Some(b)) => parse::box_grid(b)?,
        _ => return Err(CliError::Usage("give --grid or --box".into())),
    };
    let pole = parse::point(&a.pole, "--pole")?;
    let base = BoundsConfig {
        eps: a.eps,
        big_c_minus: a.big_c_minus,
        c_minus_eps: a.c_minus_eps,
        c_plus: a.c_plus,
        big_c_plus_eps: a.big_c_plus_eps,
        horizon: a.horizon,
        ..BoundsConfig::default()
    };
    base.validate()?;
    if !(a.relax >= 1.0) {
        return Err(CliError::Usage(format!(
            "--relax must be at least 1, got {}",
            a.relax
        )));
    }
    let check_grid = match (&a.check_grid, &a.check_box) {
        (Some(g), None) => Some(parse::point_grid(g)?),
        (None, Some(b)) => Some(parse::box_grid(b)?),
        _ => None,
    };
    for (name, g) in [("grid", Some(&grid)), ("check grid", check_grid.as_ref())] {
        if let Some(g) = g {
            if !g.iter().any(|z| bounds::bound_admissible(&base, z, &pole)) {
                return Err(CliError::Usage(format!(
                    "{name} has no point in the admissible region"
                )));
            }
        }
    }

    let gamma = gamma_on(&grid, &pole)?;
    let calibrated = if a.calibrate {
        Some(bounds::calibrate_constants(&base, &grid, &pole, &gamma)?)
    } else {
        None
    };
    let mut used = calibrated.unwrap_or(base);
    used.c_minus_eps /= a.relax;
    used.big_c_plus_eps *= a.relax;
    let report = match &check_grid {
        Some(cg) => bounds::check_sandwich(&used, cg, &pole, &gamma_on(cg, &pole)?)?,
        None => bounds::check_sandwich(&used, &grid, &pole, &gamma)?,
    };
    let doc = BoundsDoc {
        config: base,
        calibrated,
        checked_with: used,
        report,
    };
    Ok(plain(json(&doc)?))
}

#[derive(Serialize)]
struct SimSummary {
    n_paths: usize,
    mean_x: f64,
    se_x: f64,
    mean_y: f64,
    se_y: f64,
    resimulated: usize,
}

fn simulate(a: &SimulateArgs, format: Format) -> Result<CommandOutput, CliError> {
    let model = match a.model {
        ModelName::L0 => SdeModel::l0(),
        ModelName::Yor => SdeModel::yor(),
        ModelName::Sine => SdeModel::sine(),
        ModelName::Gbm => SdeModel::constant(a.mu, a.sigma),
    };
    let scheme = match a.scheme {
        SchemeName::ExactLognormal => Scheme::ExactLognormal,
        SchemeName::Euler => Scheme::Euler,
        SchemeName::Milstein => Scheme::Milstein,
    };
    let cfg = McConfig {
        n_paths: a.paths,
        n_steps: a.steps,
        horizon: a.horizon,
        seed: a.seed,
        scheme,
    };
    cfg.validate()?;
    let samples = montecarlo::simulate_paths(&model, a.x0, a.y0, &cfg, false)?;

    let text = if let Some(d) = &a.density {
        let [gx, gy] = parse::axes::<2>(d, "--density")?;
        let transform = if a.log_kde {
            KdeTransform::Log { y_origin: a.y0 }
        } else {
            KdeTransform::Identity
        };
        let surface = montecarlo::density_estimate(
            &samples.x,
            &samples.y,
            &GridSpec::uniform(gx, gy),
            transform,
            None,
        )?;
        density_text(&surface, format)?
    } else if a.summary {
        let (mean_x, se_x) = montecarlo::mean_and_se(&samples.x);
        let (mean_y, se_y) = montecarlo::mean_and_se(&samples.y);
        json(&SimSummary {
            n_paths: samples.len(),
            mean_x,
            se_x,
            mean_y,
            se_y,
            resimulated: samples.resimulated,
        })?
    } else {
        match format {
            Format::Json => json(&samples)?,
            Format::Csv => {
                let mut s = String::from("path_id,x,y\n");
                for (i, (x, y)) in samples.x.iter().zip(&samples.y).enumerate() {
                    s += &row(&[i.to_string(), num(*x), num(*y)]);
                }
                s
            }
        }
    };
    Ok(CommandOutput {
        text,
        seeds: vec![a.seed],
        failed: false,
    })
}

fn density_text(surface: &DensitySurface, format: Format) -> Result<String, CliError> {
    Ok(match format {
        Format::Json => json(surface)?,
        Format::Csv => {
            let mut s = String::from("x,y,value,rel_se\n");
            for (((x, y), v), se) in surface
                .grid
                .nodes()
                .zip(&surface.values)
                .zip(&surface.rel_se)
            {
                s += &row(&[x, y, *v, *se].map(num));
            }
            s
        }
    })
}

fn price(a: &PriceArgs) -> Result<CommandOutput, CliError> {
    let doc = match (&a.input, &a.json) {
        (Some(p), None) => Some(
            std::fs::read_to_string(p)
                .map_err(|e| CliError::Usage(format!("{}: {e}", p.display())))?,
        ),
        (None, Some(s)) => Some(s.clone()),
        _ => None,
    };
    let input: Option<PricingInput> = doc
        .map(|d| {
            serde_json::from_str(&d).map_err(|e| CliError::Usage(format!("pricing input: {e}")))
        })
        .transpose()?;
    let method = match a.method {
        MethodName::Auto => Method::Auto,
        MethodName::Quadrature => Method::Quadrature,
        MethodName::ClosedForm => Method::ClosedForm,
        MethodName::MonteCarlo => Method::MonteCarlo,
    };
    let mc = McConfig {
        n_paths: a.paths,
        n_steps: a.steps,
        seed: a.seed,
        ..McConfig::default()
    };
    let cfg = PricingConfig {
        method,
        mc,
        ..PricingConfig::default()
    };

    if let Some(Benchmark::K0) = a.benchmark {
        return k0_benchmark(input.as_ref(), &cfg);
    }
    let input = input.ok_or_else(|| CliError::Usage("give --input or --json".into()))?;
    let report = pricing::price(&input.option, &input.market, &cfg)?;
    let seeds = if report.method == Method::MonteCarlo {
        vec![a.seed]
    } else {
        Vec::new()
    };
    Ok(CommandOutput {
        text: json(&report)?,
        seeds,
        failed: false,
    })
}

/// Markets used by `--benchmark k0` when no input is given: `(r, σ, T)` at `S₀ = 100`.
const K0_MARKETS: [(f64, f64, f64); 3] = [(0.05, 1.0, 1.0), (0.03, 0.8, 2.0), (0.02, 0.5, 4.0)];

fn k0_benchmark(
    input: Option<&PricingInput>,
    cfg: &PricingConfig,
) -> Result<CommandOutput, CliError> {
    use geyor_core::pricing::{Average, Right, Style};
    use geyor_core::{AsianOption, Market};
    let cases: Vec<(Market, f64)> = match input {
        Some(i) => vec![(i.market, i.option.maturity)],
        None => K0_MARKETS
            .iter()
            .map(|&(r, sigma, t)| {
                (
                    Market {
                        s0: 100.0,
                        a0: 0.0,
                        r,
                        sigma,
                    },
                    t,
                )
            })
            .collect(),
    };
    let cfg = PricingConfig {
        method: if cfg.method == Method::Auto {
            Method::Quadrature
        } else {
            cfg.method
        },
        ..*cfg
    };
    let mut text = String::new();
    let mut all = true;
    for (market, maturity) in cases {
        let option = AsianOption {
            style: Style::FixedStrike,
            right: Right::Call,
            average: Average::Arithmetic,
            strike: 0.0,
            maturity,
        };
        let rep: PriceReport = pricing::price(&option, &market, &cfg)?;
        let exact = pricing::k0_call_value(&market, maturity);
        let diff = (rep.price - exact).abs();
        let ok = diff <= rep.est_error.max(1e-12 * exact.abs());
        all &= ok;
        text += &format!(
            "{} k0 S0={} A0={} r={} sigma={} T={} method={} price={} exact={} abs_diff={} est_error={}\n",
            if ok { "PASS" } else { "FAIL" },
            market.s0,
            market.a0,
            market.r,
            market.sigma,
            maturity,
            serde_json::to_value(rep.method).ok().and_then(|v| v.as_str().map(String::from)).unwrap_or_default(),
            num(rep.price),
            num(exact),
            num(diff),
            num(rep.est_error),
        );
    }
    text += if all {
        "PASS k0 overall\n"
    } else {
        "FAIL k0 overall\n"
    };
    let seeds = if cfg.method == Method::MonteCarlo {
        vec![cfg.mc.seed]
    } else {
        Vec::new()
    };
    Ok(CommandOutput {
        text,
        seeds,
        failed: !all,
    })
}

fn control(spec: &str, duration: f64) -> Result<Control, CliError> {
    let bad = |m: String| CliError::Usage(format!("--omega: {m}"));
    let parse_f = |s: &str| {
        s.trim()
            .parse::<f64>()
            .map_err(|e| bad(format!("cannot parse {s:?}: {e}")))
    };
    if spec == "zero" {
        return Ok(Control::Zero { duration });
    }
    if let Some(v) = spec.strip_prefix("const:") {
        return Ok(Control::Constant {
            value: parse_f(v)?,
            duration,
        });
    }
    if let Some(v) = spec.strip_prefix("pw:") {
        let values = v.split(';').map(parse_f).collect::<Result<Vec<_>, _>>()?;
        return Ok(Control::PiecewiseConstant { values, duration });
    }
    Err(bad(format!(
        "expected zero, const:<c> or pw:<v1>;<v2>;..., got {spec:?}"
    )))
}

#[derive(Serialize)]
struct HarnackDoc {
    times: Vec<f64>,
    length: usize,
    bound: f64,
    phi: f64,
    beta: f64,
    multiplier: f64,
    points: Vec<[f64; 3]>,
    in_paraboloid: Vec<bool>,
    verified: bool,
}

fn harnack(a: &HarnackArgs) -> Result<CommandOutput, CliError> {
    let cfg = ChainConfig::new(a.theta, a.m, a.t_boundary)?;
    if !(a.t < a.t0) {
        return Err(CliError::Usage(format!(
            "need t < t0, got t={} t0={}",
            a.t, a.t0
        )));
    }
    let omega = control(&a.omega, a.t0 - a.t)?;
    let xy = parse::floats(&a.start, 2, "--start")?;
    let start = GPoint::new(xy[0], xy[1], a.t0)?;
    let path = harnack::integrate_admissible_path(&start, &omega, a.steps)?;
    let times = harnack::chain_times(a.t, a.t0, &cfg, &omega)?;
    let phi = omega.total_energy();
    let pts = harnack::chain_points(&path, &times, a.theta)?;
    let doc = HarnackDoc {
        length: times.len() - 1,
        bound: harnack::chain_length_bound(phi, a.t, a.t0, &cfg),
        phi,
        beta: cfg.beta(),
        multiplier: harnack::lower_bound_multiplier(phi, a.t, a.t0, &cfg)?,
        points: pts.points.iter().map(|p| [p.x(), p.y(), p.t()]).collect(),
        verified: pts.verified(),
        in_paraboloid: pts.in_paraboloid,
        times,
    };
    Ok(plain(json(&doc)?))
}
