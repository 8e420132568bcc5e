use std::fs::File;
use std::io::{BufReader, BufWriter, Write};
use std::path::{Path, PathBuf};

use log::{info, warn};
use pswf_radon::io::{
    read_config, read_data_csv, read_function_csv, read_sidecar, to_json_pretty, write_curve_csv, write_data_csv,
    write_function_csv, DataSidecar, ResidualCurve, SIDECAR_SCHEMA_VERSION,
};
use pswf_radon::pswf::build_basis_cached;
use pswf_radon::radon::cormack2d_invert_fn;
use pswf_radon::special::gauss_legendre;
use pswf_radon::{
    apply_fc, hankel_forward, invert_fc_truncated, make_phantom, naive_inverse, run_experiment, run_reconstruction,
    select_m, simulate_data, Complex64, FbpSettings, HankelDataset, HankelOrder, MChoice, Method, PhantomSpec, PswfBasis,
    Reconstructor, ResidualEvaluator, SampledFunction1D, UniformGrid,
};
use serde::Serialize;

use crate::args::{
    Cli, DataOpts, ForwardCmd, Format, PhantomCmd, PhantomKind, PhantomOpts, ReconstructCmd, RunCmd, SweepCmd,
};
use crate::error::{usage, CliError, CliResult};
use crate::plot::{self, Series, Style};

/// Relative tolerance when comparing r, σ and ν from different sources.
const META_TOLERANCE: f64 = 1e-12;

pub struct Context {
    pub format: Format,
    pub cache_dir: Option<PathBuf>,
}

impl From<&Cli> for Context {
    fn from(cli: &Cli) -> Self {
        Self {
            format: cli.format,
            cache_dir: cli.cache_dir.clone(),
        }
    }
}

fn read_bytes(path: &Path) -> CliResult<Vec<u8>> {
    std::fs::read(path).map_err(|e| CliError::file(path, e))
}

fn open(path: &Path) -> CliResult<BufReader<File>> {
    File::open(path).map(BufReader::new).map_err(|e| CliError::file(path, e))
}

/// Creates `path` (and its parent directory) and hands a buffered writer to
/// `body`. Errors carry the path.
fn write_with(path: &Path, body: impl FnOnce(&mut BufWriter<File>) -> pswf_radon::Result<()>) -> CliResult<()> {
    let result = (|| {
        if let Some(dir) = path.parent().filter(|d| !d.as_os_str().is_empty()) {
            std::fs::create_dir_all(dir)?;
        }
        let mut w = BufWriter::new(File::create(path)?);
        body(&mut w)?;
        w.flush()?;
        Ok(())
    })();
    result.map_err(|e: pswf_radon::Error| CliError::file(path, e))
}

fn write_json<T: Serialize>(path: &Path, value: &T) -> CliResult<()> {
    let text = to_json_pretty(value)?;
    write_with(path, |w| Ok(w.write_all(text.as_bytes())?))
}

fn write_function(path: &Path, format: Format, f: &SampledFunction1D) -> CliResult<()> {
    match format {
        Format::Csv => write_with(path, |w| write_function_csv(w, f)),
        Format::Json => write_json(path, f),
    }
}

fn default_sidecar(path: &Path) -> PathBuf {
    path.with_extension("meta.json")
}

fn is_json(path: &Path) -> bool {
    path.extension().is_some_and(|e| e.eq_ignore_ascii_case("json"))
}

/// Basis of bandwidth `c` reaching past the usable range, from the cache
/// directory when one is configured.
pub fn load_basis(ctx: &Context, c: f64) -> CliResult<PswfBasis> {
    let Some(dir) = &ctx.cache_dir else {
        return Ok(PswfBasis::for_bandwidth(c)?);
    };
    let mut max_index = (2.0 * c / std::f64::consts::PI).ceil() as usize + 24;
    loop {
        let basis = build_basis_cached(dir, c, max_index).map_err(|e| CliError::file(dir, e))?;
        if basis.exhausts_usable_range() {
            return Ok(basis);
        }
        max_index += 16;
    }
}

fn parse_interval(s: &str) -> CliResult<(f64, f64)> {
    let parsed = s.split_once(':').and_then(|(lo, hi)| Some((lo.trim().parse().ok()?, hi.trim().parse().ok()?)));
    match parsed {
        Some(p) => Ok(p),
        None => usage(format!("interval must look like LO:HI, got '{s}'")),
    }
}

/// Builds the phantom described by the flags. Custom samples must cover
/// [0, σ] on a uniform grid.
fn phantom_spec(opts: &PhantomOpts, sigma: f64) -> CliResult<PhantomSpec> {
    if opts.omega.is_some() && opts.phantom != PhantomKind::Harmonic {
        return usage("--omega applies to the harmonic phantom only");
    }
    if !opts.intervals.is_empty() && opts.phantom != PhantomKind::TwoStep {
        return usage("--interval applies to the two-step phantom only");
    }
    if opts.samples.is_some() && opts.phantom != PhantomKind::Custom {
        return usage("--samples applies to the custom phantom only");
    }
    let spec = match opts.phantom {
        PhantomKind::TwoStep if opts.intervals.is_empty() => PhantomSpec::two_step(),
        PhantomKind::TwoStep => PhantomSpec::TwoStep {
            intervals: opts.intervals.iter().map(|s| parse_interval(s)).collect::<CliResult<_>>()?,
        },
        PhantomKind::Harmonic => match opts.omega {
            Some(omega) => PhantomSpec::Harmonic { omega },
            None => return usage("the harmonic phantom needs --omega"),
        },
        PhantomKind::Custom => {
            let Some(path) = &opts.samples else {
                return usage("the custom phantom needs --samples");
            };
            let f = read_function_csv(open(path)?).map_err(|e| CliError::file(path, e))?;
            let span = META_TOLERANCE.max(1e-9) * sigma;
            if f.grid.a.abs() > span || (f.grid.b - sigma).abs() > span {
                return usage(format!(
                    "custom samples span [{}, {}] but σ = {sigma}; they must cover [0, σ]",
                    f.grid.a, f.grid.b
                ));
            }
            PhantomSpec::Custom {
                samples: f.real_parts(),
            }
        }
    };
    spec.validate(sigma)?;
    Ok(spec)
}

pub fn phantom(ctx: &Context, cmd: &PhantomCmd) -> CliResult<()> {
    let spec = phantom_spec(&cmd.phantom, cmd.sigma)?;
    let grid = UniformGrid::new(0.0, cmd.sigma, cmd.n)?;
    let f = make_phantom(&spec, cmd.sigma, grid)?;
    write_function(&cmd.out, ctx.format, &f)?;
    info!("wrote {} samples to {}", f.len(), cmd.out.display());
    Ok(())
}

pub fn forward(ctx: &Context, cmd: &ForwardCmd) -> CliResult<()> {
    let meta = match &cmd.from_meta {
        Some(path) => {
            let meta = read_sidecar(&read_bytes(path)?).map_err(|e| CliError::file(path, e))?;
            if meta.phantom.is_none() {
                return usage(format!("{}: sidecar has no phantom to regenerate", path.display()));
            }
            meta
        }
        None => {
            HankelOrder::from_nu(cmd.nu)?;
            if !(cmd.sigma > 0.0 && cmd.sigma.is_finite()) {
                return usage(format!("--sigma must be positive, got {}", cmd.sigma));
            }
            DataSidecar {
                schema_version: SIDECAR_SCHEMA_VERSION,
                nu: cmd.nu,
                r: cmd.r,
                sigma: cmd.sigma,
                n_samples: cmd.n,
                n_phantom: cmd.n_phantom,
                phantom: Some(phantom_spec(&cmd.phantom, cmd.sigma)?),
                noise_level: cmd.noise,
                seed: cmd.seed,
            }
        }
    };
    meta.validate()?;
    let order = HankelOrder::from_nu(meta.nu)?;
    let spec = meta.phantom.as_ref().expect("phantom checked above");
    let f = make_phantom(spec, meta.sigma, UniformGrid::new(0.0, meta.sigma, meta.n_phantom)?)?;
    let data = simulate_data(order, &f, meta.r, meta.sigma, meta.n_samples, meta.noise_level, meta.seed)?;

    match ctx.format {
        Format::Csv => write_with(&cmd.out, |w| write_data_csv(w, &data.h))?,
        Format::Json => write_json(&cmd.out, &data)?,
    }
    let meta_path = cmd.meta.clone().unwrap_or_else(|| default_sidecar(&cmd.out));
    write_json(&meta_path, &meta)?;
    info!(
        "wrote {} data samples (ν = {}, r = {}, noise {}) to {}",
        meta.n_samples,
        meta.nu,
        meta.r,
        meta.noise_level,
        cmd.out.display()
    );
    Ok(())
}

/// Picks a value from the flag or the metadata, insisting they agree.
fn reconcile(name: &str, flag: Option<f64>, meta: Option<f64>) -> CliResult<Option<f64>> {
    match (flag, meta) {
        (Some(a), Some(b)) if (a - b).abs() > META_TOLERANCE * a.abs().max(b.abs()).max(1.0) => {
            usage(format!("--{name} = {a} contradicts the metadata value {b}"))
        }
        (Some(a), _) => Ok(Some(a)),
        (None, b) => Ok(b),
    }
}

/// Loads data and metadata; flags, sidecar and a JSON dataset must agree.
fn load_data(opts: &DataOpts) -> CliResult<(HankelDataset, Option<DataSidecar>)> {
    let meta_path = opts.meta.clone().or_else(|| {
        let p = default_sidecar(&opts.data);
        p.exists().then_some(p)
    });
    let meta = match &meta_path {
        Some(p) => Some(read_sidecar(&read_bytes(p)?).map_err(|e| CliError::file(p, e))?),
        None => None,
    };

    if is_json(&opts.data) {
        let data: HankelDataset = serde_json::from_slice(&read_bytes(&opts.data)?)
            .map_err(|e| CliError::file(&opts.data, pswf_radon::Error::from(e)))?;
        data.validate().map_err(|e| CliError::file(&opts.data, e))?;
        reconcile("nu", opts.nu, Some(data.order.nu()))?;
        reconcile("r", opts.r, Some(data.r))?;
        reconcile("sigma", opts.sigma, Some(data.sigma))?;
        if let Some(m) = &meta {
            reconcile("nu", Some(m.nu), Some(data.order.nu()))?;
            reconcile("r", Some(m.r), Some(data.r))?;
            reconcile("sigma", Some(m.sigma), Some(data.sigma))?;
        }
        return Ok((data, meta));
    }

    let h = read_data_csv(open(&opts.data)?).map_err(|e| CliError::file(&opts.data, e))?;
    let nu = reconcile("nu", opts.nu, meta.as_ref().map(|m| m.nu))?;
    let sigma = reconcile("sigma", opts.sigma, meta.as_ref().map(|m| m.sigma))?;
    let r = reconcile("r", opts.r, meta.as_ref().map(|m| m.r))?;
    let (Some(nu), Some(sigma)) = (nu, sigma) else {
        return usage("ν and σ are unknown: pass --nu and --sigma or a sidecar with --meta");
    };
    let r = r.unwrap_or(h.grid.b);
    reconcile("r", Some(r), Some(h.grid.b))
        .map_err(|_| CliError::Usage(format!("r = {r} but the data grid ends at t = {}", h.grid.b)))?;
    if let Some(m) = &meta {
        if m.n_samples != h.len() {
            return usage(format!("sidecar expects {} samples, data file has {}", m.n_samples, h.len()));
        }
    }
    let (noise, seed) = meta.as_ref().map_or((0.0, 0), |m| (m.noise_level, m.seed));
    let data = HankelDataset::new(HankelOrder::from_nu(nu)?, h.grid.b, sigma, h, noise, seed)?;
    Ok((data, meta))
}

fn fbp_settings(opts: &DataOpts) -> FbpSettings {
    FbpSettings::with_grid(opts.grid_n)
}

fn check_method(method: Method, data: &HankelDataset) -> CliResult<()> {
    if method == Method::PswfFbp && !data.order.is_integer() {
        return usage(format!(
            "pswf-fbp needs an integer order, got ν = {}; use pswf-cormack",
            data.order.nu()
        ));
    }
    Ok(())
}

pub fn reconstruct(ctx: &Context, cmd: &ReconstructCmd) -> CliResult<()> {
    let opts = &cmd.data;
    let (data, meta) = load_data(opts)?;
    let method = Method::from(opts.method);
    check_method(method, &data)?;
    let out_grid = UniformGrid::new(0.0, data.sigma, opts.n_out)?;

    // The naive inverse alone needs neither a basis nor a residual, which
    // keeps it usable on zero data, where the relative residual is undefined.
    if method == Method::Naive && cmd.report.is_none() && cmd.plot.is_none() {
        let f = naive_inverse(&data, out_grid)?;
        write_function(&cmd.out, ctx.format, &f)?;
        println!("method naive");
        return Ok(());
    }

    let basis = if method == Method::Naive {
        // run_reconstruction never touches the basis for the naive method.
        pswf_radon::build_basis(1.0, 0)?
    } else {
        load_basis(ctx, data.c())?
    };
    let phantom = meta.as_ref().and_then(|m| m.phantom.clone());
    let report = run_reconstruction(
        &basis,
        &data,
        method,
        cmd.m,
        &fbp_settings(opts),
        out_grid,
        opts.smooth_cutoff,
        phantom.is_some(),
    )?;
    if report.imag_ratio > 1e-3 && phantom.is_some() {
        warn!("imaginary part of f̃ is {:.2e} of the real part", report.imag_ratio);
    }

    write_function(&cmd.out, ctx.format, &report.f_rec)?;
    if let Some(path) = &cmd.report {
        write_json(path, &report)?;
    }
    if let Some(path) = &cmd.plot {
        let truth = match (&phantom, &meta) {
            (Some(spec), Some(m)) => Some(make_phantom(spec, m.sigma, out_grid)?),
            _ => None,
        };
        let mut series = Vec::new();
        if let Some(f) = &truth {
            series.push(Series {
                label: "f",
                f,
                style: Style::Dotted,
            });
        }
        series.push(Series {
            label: "reconstruction",
            f: &report.f_rec,
            style: Style::Bold,
        });
        series.push(Series {
            label: "naive",
            f: &report.f_naive,
            style: Style::Dashed,
        });
        let title = format!("ν = {}, c = {}, m = {}", data.order.nu(), data.c(), fmt_m(report.m_selected));
        let svg = plot::render(&title, &series);
        write_with(path, |w| Ok(w.write_all(svg.as_bytes())?))?;
    }
    println!(
        "method {}  m {}  residual {:.4e}  naive {:.4e}",
        method_name(method),
        fmt_m(report.m_selected),
        report.residual,
        report.err_naive
    );
    Ok(())
}

fn fmt_m(m: Option<usize>) -> String {
    m.map_or_else(|| "-".to_string(), |m| m.to_string())
}

fn method_name(m: Method) -> &'static str {
    match m {
        Method::Naive => "naive",
        Method::PswfCormack => "pswf-cormack",
        Method::PswfFbp => "pswf-fbp",
    }
}

#[derive(Serialize)]
struct SweepReport {
    m_selected: usize,
    m: Vec<usize>,
    residual: Vec<f64>,
    naive: f64,
}

pub fn sweep(ctx: &Context, cmd: &SweepCmd) -> CliResult<()> {
    let opts = &cmd.data;
    let (data, _) = load_data(opts)?;
    let method = Method::from(opts.method);
    if method == Method::Naive {
        return usage("sweep needs a PSWF method");
    }
    check_method(method, &data)?;
    if let Some(m_max) = cmd.m_max {
        if cmd.m_min > m_max {
            return usage(format!("empty m range {}..={m_max}", cmd.m_min));
        }
    }
    let out_grid = UniformGrid::new(0.0, data.sigma, opts.n_out)?;
    let basis = load_basis(ctx, data.c())?;
    let rec = Reconstructor::new(&basis, &data)?.with_smooth_cutoff(opts.smooth_cutoff)?;
    let m_max = cmd.m_max.unwrap_or(rec.m_cap());
    if cmd.m_min > m_max {
        return usage(format!("empty m range {}..={m_max}", cmd.m_min));
    }
    let m_values: Vec<usize> = (cmd.m_min..=m_max).collect();
    let evaluator = ResidualEvaluator::new(&data, out_grid)?;
    let naive = evaluator.residual(&naive_inverse(&data, out_grid)?)?;
    let sel = select_m(&rec, &evaluator, method, &m_values, &fbp_settings(opts), out_grid)?;

    match ctx.format {
        Format::Csv => {
            let curve = ResidualCurve {
                m: sel.m_values.clone(),
                residual: sel.residuals.clone(),
                naive,
            };
            write_with(&cmd.out, |w| write_curve_csv(w, &curve))?
        }
        Format::Json => write_json(
            &cmd.out,
            &SweepReport {
                m_selected: sel.m,
                m: sel.m_values.clone(),
                residual: sel.residuals.clone(),
                naive,
            },
        )?,
    }
    let best = sel.residuals.iter().copied().fold(f64::INFINITY, f64::min);
    println!("m* {}  residual {best:.4e}  naive {naive:.4e}", sel.m);
    Ok(())
}

pub fn run(ctx: &Context, cmd: &RunCmd) -> CliResult<()> {
    let config = read_config(&read_bytes(&cmd.config)?).map_err(|e| CliError::file(&cmd.config, e))?;
    let basis = if config.method == Method::Naive {
        None
    } else {
        Some(load_basis(ctx, config.c())?)
    };
    let exp = run_experiment(&config, basis.as_ref())?;
    // Relative output paths are resolved against the config's directory.
    let base = cmd.config.parent().unwrap_or(Path::new("."));
    if let Some(p) = &config.outputs.data {
        let path = base.join(p);
        write_with(&path, |w| write_data_csv(w, &exp.data.h))?;
        let meta = DataSidecar {
            schema_version: SIDECAR_SCHEMA_VERSION,
            nu: config.nu,
            r: config.r,
            sigma: config.sigma,
            n_samples: config.n_samples,
            n_phantom: config.n_out,
            phantom: Some(config.phantom.clone()),
            noise_level: config.noise_level,
            seed: config.seed,
        };
        write_json(&default_sidecar(&path), &meta)?;
    }
    if let Some(p) = &config.outputs.reconstruction {
        write_function(&base.join(p), ctx.format, &exp.report.f_rec)?;
    }
    if let Some(p) = &config.outputs.report {
        write_json(&base.join(p), &exp.report)?;
    }
    println!(
        "method {}  m {}  residual {:.4e}  naive {:.4e}",
        method_name(config.method),
        fmt_m(exp.report.m_selected),
        exp.report.residual,
        exp.report.err_naive
    );
    Ok(())
}

struct Check {
    name: &'static str,
    value: f64,
    limit: f64,
}

/// Short numerical checks with known answers. Every line is printed; the
/// command fails if any check misses its limit.
pub fn selftest(ctx: &Context) -> CliResult<()> {
    let c = 10.0;
    let basis = load_basis(ctx, c)?;
    let mut checks = Vec::new();

    // Orthonormality of the first 21 functions on [-1, 1].
    let (x, w) = gauss_legendre(200);
    let psi: Vec<Vec<f64>> = (0..=20).map(|j| basis.eval_psi(j, &x)).collect::<Result<_, _>>()?;
    let mut worst = 0.0f64;
    for (i, a) in psi.iter().enumerate() {
        for (j, b) in psi.iter().enumerate() {
            let g: f64 = a.iter().zip(b).zip(&w).map(|((p, q), wk)| p * q * wk).sum();
            worst = worst.max((g - if i == j { 1.0 } else { 0.0 }).abs());
        }
    }
    checks.push(Check {
        name: "pswf orthonormality (c = 10, j ≤ 20)",
        value: worst,
        limit: 1e-9,
    });

    // Truncated inversion recovers a single mode.
    let grid = UniformGrid::new(-1.0, 1.0, 1024)?;
    let psi3 = SampledFunction1D::from_real_fn(grid, |x| basis.eval_psi(3, &[x]).map(|v| v[0]).unwrap_or(f64::NAN));
    let g = apply_fc(&basis, &psi3)?;
    let back = invert_fc_truncated(&basis, &g, 8)?;
    let err = back.values.iter().zip(&psi3.values).map(|(a, b)| (a - b).norm()).fold(0.0, f64::max);
    checks.push(Check {
        name: "truncated inversion of F_c ψ_3 (m = 8)",
        value: err,
        limit: 1e-6,
    });

    // Radon inversion of the unit disk: w(y) = 2√(1 − y²) ↦ f = 1.
    let s: Vec<f64> = (1..=100).map(|k| k as f64 / 100.0).collect();
    let f = cormack2d_invert_fn(0, |t| Complex64::new(2.0 * (1.0 - t * t).max(0.0).sqrt(), 0.0), &s)?;
    let err = s
        .iter()
        .zip(&f)
        .filter(|(s, _)| (0.05..=0.9).contains(*s))
        .map(|(_, v)| (v.re - 1.0).abs())
        .fold(0.0, f64::max);
    checks.push(Check {
        name: "Cormack inversion of the unit disk",
        value: err,
        limit: 5e-3,
    });

    // Hankel transform of the unit box at ν = 1/2 against its closed form.
    let box_f = SampledFunction1D::from_real_fn(UniformGrid::new(0.0, 1.0, 4001)?, |_| 1.0);
    let t = std::f64::consts::PI;
    let h = hankel_forward(HankelOrder::new(1)?, &box_f, &[t])?[0].re;
    let exact = (2.0 / std::f64::consts::PI).sqrt() * (1.0 - t.cos()) / t;
    checks.push(Check {
        name: "Hankel transform of a box (ν = 1/2)",
        value: (h - exact).abs(),
        limit: 1e-6,
    });

    // End to end: noiseless two-step data, PSWF beats the naive inverse.
    let out_grid = UniformGrid::new(0.0, 1.0, 256)?;
    let phantom = make_phantom(&PhantomSpec::two_step(), 1.0, out_grid)?;
    let data = simulate_data(HankelOrder::new(0)?, &phantom, c, 1.0, 256, 0.0, 0)?;
    let report = run_reconstruction(
        &basis,
        &data,
        Method::PswfCormack,
        MChoice::Fixed(10),
        &FbpSettings::with_grid(256),
        out_grid,
        None,
        true,
    )?;
    checks.push(Check {
        name: "pipeline residual relative to naive (ν = 0, m = 10)",
        value: report.residual / report.err_naive,
        limit: 0.5,
    });

    let mut failed = Vec::new();
    for ch in &checks {
        let ok = ch.value <= ch.limit;
        println!("{} {}: {:.3e} (limit {:.0e})", if ok { "PASS" } else { "FAIL" }, ch.name, ch.value, ch.limit);
        if !ok {
            failed.push(ch.name);
        }
    }
    if failed.is_empty() {
        Ok(())
    } else {
        Err(CliError::SelfTest(failed.join("; ")))
    }
}
