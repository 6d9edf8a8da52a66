//! `larmor` command-line front end.
//!
//! Exit codes: 0 success, 1 domain error (guards, singular points, failed
//! verification), 2 usage error. Data goes to `--out` or standard output,
//! diagnostics to standard error.

use std::ffi::OsString;
use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde_json::{json, Map, Value};

use crate::dirac::{build_hamiltonian, standard_basis};
use crate::error::{Error, Result};
use crate::oracle::{classify_spin, diagonalize, Branch, Spin, CLUSTER_TOL};
use crate::output::{write_table, Cell, Format, OutputEnvelope, Table};
use crate::quantities::{cross_coupling, interaction_energy, to_natural, FieldPoint, NaturalParams, ParticleSpec, Registry};
use crate::spectrum::{
    eigenvalues_analytic, kinematics_of, natural_limits, relativistic_limits, spin_splitting, spin_splitting_si,
    splitting_derivative, splitting_highspeed, splitting_lowspeed, EtaMode,
};
use crate::sweep::{doppler_compare, sweep_delta, sweep_velocity, Grid, SweepOptions, SweepRow, DEFAULT_DELTAS, DEFAULT_VELOCITIES};
use crate::verify::{self, DEFAULT_SAMPLES, DEFAULT_SEED};

const SWEEP_COLUMNS: [&str; 6] = [
    "series_label",
    "swept_value",
    "splitting",
    "splitting_numeric",
    "lowspeed_approx",
    "highspeed_approx",
];

#[derive(Debug, Parser)]
#[command(name = "larmor", version, about = "Relativistic spin splitting of neutral particles with dipole moments")]
struct Cli {
    /// Particle/constants registry (TOML).
    #[arg(long, global = true, env = "LARMOR_REGISTRY")]
    registry: Option<PathBuf>,
    #[arg(long, global = true, value_enum, default_value_t = FormatArg::Csv)]
    format: FormatArg,
    /// Significant digits for numeric output, 6..=17.
    #[arg(long, global = true, default_value_t = 17, value_parser = clap::value_parser!(u8).range(6..=17))]
    precision: u8,
    /// Write data here instead of standard output.
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    /// How η is derived from velocity: exact uses sqrt(p² + π²), approx uses p.
    #[arg(long, global = true, value_enum, default_value_t = EtaModeArg::Approx)]
    eta_mode: EtaModeArg,
    /// π̃ (units of mc), used in exact eta mode and for --numeric.
    #[arg(long, global = true, default_value_t = 0.0, allow_hyphen_values = true)]
    pi: f64,
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
enum FormatArg {
    Csv,
    Json,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
enum EtaModeArg {
    Exact,
    Approx,
}

impl From<EtaModeArg> for EtaMode {
    fn from(m: EtaModeArg) -> Self {
        match m {
            EtaModeArg::Exact => EtaMode::Exact,
            EtaModeArg::Approx => EtaMode::Approx,
        }
    }
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Four labeled energies.
    Spectrum {
        #[command(flatten)]
        point: PointArgs,
        /// Also diagonalize numerically and report the deviation.
        #[arg(long)]
        numeric: bool,
    },
    /// Spin splitting, optionally with its η derivative or an expansion.
    Split {
        #[command(flatten)]
        point: PointArgs,
        /// Add dΔ/dη̃
        #[arg(long)]
        derivative: bool,
        /// Add the low-speed expansion Δ₀(1 − η̃²/(2|1 − δ̃²|))
        #[arg(long, conflicts_with = "highspeed")]
        lowspeed: bool,
        /// Add the high-speed expansion 2δ̃/η̃
        #[arg(long)]
        highspeed: bool,
    },
    /// Upper limits on splitting, Larmor frequency, and the matching wavelength.
    Limits {
        /// Registry particle for SI limits
        #[arg(long, conflicts_with = "natural", required_unless_present = "natural")]
        particle: Option<String>,
        /// Natural units, mc² = ħ = c = 1
        #[arg(long)]
        natural: bool,
    },
    /// Splitting against δ̃ for a set of velocities.
    SweepDelta {
        /// Comma-separated velocities, one series each (fraction of c)
        #[arg(long, value_delimiter = ',', default_values_t = DEFAULT_VELOCITIES)]
        velocities: Vec<f64>,
        /// δ̃ grid as start:stop:count
        #[arg(long, default_value = "0:3:31", value_parser = parse_grid)]
        delta_range: Grid,
        /// Diagonalize every row and fail on disagreement
        #[arg(long)]
        validate: bool,
    },
    /// Splitting against velocity for a set of δ̃ values.
    SweepVelocity {
        /// Comma-separated δ̃ values, one series each
        #[arg(long, value_delimiter = ',', default_values_t = DEFAULT_DELTAS)]
        deltas: Vec<f64>,
        /// Velocity grid as start:stop:count
        #[arg(long, default_value = "0:0.99:61", value_parser = parse_grid)]
        velocity_range: Grid,
        /// Diagonalize every row and fail on disagreement
        #[arg(long)]
        validate: bool,
    },
    /// Motional red shift beside the Doppler ratios.
    Doppler {
        /// Velocity grid as start:stop:count; rows outside the red-shift domain are dropped
        #[arg(long, default_value = "0:0.3:31", value_parser = parse_grid)]
        velocity_range: Grid,
        /// δ̃ for the red-shift column
        #[arg(long, default_value_t = 0.0, allow_hyphen_values = true)]
        delta: f64,
    },
    /// Run the self-verification suite.
    Verify {
        /// Random parameter tuples per sampled check
        #[arg(long, default_value_t = DEFAULT_SAMPLES)]
        samples: usize,
        /// Generator seed
        #[arg(long, default_value_t = DEFAULT_SEED)]
        seed: u64,
    },
}

/// A single evaluation point, either in natural units or, with `--particle`,
/// from SI fields and momentum.
#[derive(Debug, Args)]
struct PointArgs {
    /// η̃ (units of mc²).
    #[arg(long, allow_hyphen_values = true)]
    eta: Option<f64>,
    /// δ̃ (units of mc²).
    #[arg(long, allow_hyphen_values = true)]
    delta: Option<f64>,
    /// Registry particle; switches on SI inputs and outputs.
    #[arg(long)]
    particle: Option<String>,
    /// Electric field along x, V/m.
    #[arg(long, default_value_t = 0.0, allow_hyphen_values = true, requires = "particle")]
    e_field: f64,
    /// Magnetic field along x, T.
    #[arg(long, default_value_t = 0.0, allow_hyphen_values = true, requires = "particle")]
    b_field: f64,
    /// Momentum, kg·m/s.
    #[arg(long, allow_hyphen_values = true, requires = "particle", conflicts_with = "velocity")]
    momentum: Option<f64>,
    /// Velocity as a fraction of c.
    #[arg(long, allow_hyphen_values = true, requires = "particle")]
    velocity: Option<f64>,
}

fn parse_grid(s: &str) -> std::result::Result<Grid, String> {
    s.parse().map_err(|e: Error| e.to_string())
}

struct Context {
    registry: Registry,
    eta_mode: EtaMode,
    pi: f64,
}

/// The natural-units point plus, in SI mode, the particle it came from.
struct ResolvedPoint {
    eta: f64,
    delta: f64,
    params: Option<NaturalParams>,
    si: Option<(ParticleSpec, f64)>,
}

enum SiPoint {
    Natural(ResolvedPoint),
    /// Massless particle: (cp, cπ, δ) in joules.
    Massless { cp: f64, cpi: f64, delta: f64 },
}

fn resolve_point(args: &PointArgs, ctx: &Context) -> Result<SiPoint> {
    let Some(name) = &args.particle else {
        let (eta, delta) = match (args.eta, args.delta) {
            (Some(e), Some(d)) => (e, d),
            _ => return Err(Error::InvalidSweep("--eta and --delta are required without --particle".into())),
        };
        return Ok(SiPoint::Natural(ResolvedPoint { eta, delta, params: None, si: None }));
    };
    let particle = ctx.registry.particle(name)?.clone();
    let k = &ctx.registry.constants;
    let fields = FieldPoint { e_field: args.e_field, b_field: args.b_field };
    let momentum = match (args.momentum, args.velocity) {
        (Some(p), _) => p,
        (None, Some(v)) => kinematics_of(v)?.p_tilde * particle.mass * k.c,
        (None, None) => 0.0,
    };
    let rest = particle.rest_energy(k);
    if particle.mass == 0.0 {
        return Ok(SiPoint::Massless {
            cp: k.c * momentum,
            cpi: k.c * cross_coupling(&particle, fields, k),
            delta: interaction_energy(&particle, fields),
        });
    }
    let np = to_natural(&particle, fields, momentum, k)?;
    let eta = args.eta.unwrap_or(match ctx.eta_mode {
        EtaMode::Exact => np.eta_tilde(),
        EtaMode::Approx => np.p_tilde().abs(),
    });
    let delta = args.delta.unwrap_or(np.delta_tilde());
    let params = (args.eta.is_none() && args.delta.is_none()).then_some(np);
    Ok(SiPoint::Natural(ResolvedPoint { eta, delta, params, si: Some((particle, rest)) }))
}

/// Hamiltonian parameters for a bare (η̃, δ̃) point: p̃ = sqrt(η̃² − π̃²).
fn params_for(point: &ResolvedPoint, pi: f64) -> Result<NaturalParams> {
    if let Some(np) = point.params {
        return Ok(np);
    }
    if point.eta < pi.abs() {
        return Err(Error::OutsideExpansionDomain(format!("--pi {pi} exceeds eta {}", point.eta)));
    }
    Ok(NaturalParams::new((point.eta * point.eta - pi * pi).sqrt(), pi, point.delta))
}

fn spectrum_table(point: &ResolvedPoint, numeric: bool, ctx: &Context) -> Result<Table> {
    let s = eigenvalues_analytic(point.eta, point.delta)?;
    let mut cols = vec!["branch", "spin", "energy"];
    if numeric {
        cols.extend(["energy_numeric", "deviation"]);
    }
    if point.si.is_some() {
        cols.push("energy_J");
    }
    let labeled = if numeric {
        let np = params_for(point, ctx.pi)?;
        Some(classify_spin(&diagonalize(&build_hamiltonian(&np)?)?, &standard_basis(), CLUSTER_TOL)?)
    } else {
        None
    };
    let mut t = Table::new(&cols);
    let levels = [
        (Branch::Positive, Spin::Up, "+", "up", s.e_plus_up),
        (Branch::Positive, Spin::Down, "+", "down", s.e_plus_down),
        (Branch::Negative, Spin::Up, "-", "up", s.e_minus_up),
        (Branch::Negative, Spin::Down, "-", "down", s.e_minus_down),
    ];
    for (branch, spin, b, sp, e) in levels {
        let mut row = vec![b.into(), sp.into(), Cell::Num(e)];
        if let Some(l) = &labeled {
            let n = l.energy(branch, spin).ok_or_else(|| Error::AmbiguousLabeling("missing level".into()))?;
            row.extend([Cell::Num(n), Cell::Num((n - e).abs())]);
        }
        if let Some((_, rest)) = &point.si {
            row.push(Cell::Num(e * rest));
        }
        t.push(row);
    }
    Ok(t)
}

fn split_table(point: &SiPoint, derivative: bool, lowspeed: bool, highspeed: bool, hbar: f64) -> Result<Table> {
    let point = match point {
        SiPoint::Natural(p) => p,
        SiPoint::Massless { cp, cpi, delta } => {
            if derivative || lowspeed || highspeed {
                return Err(Error::MasslessConversion);
            }
            let s = spin_splitting_si(*cp, *cpi, *delta, 0.0)?;
            let mut t = Table::new(&["cp_J", "cpi_J", "delta_J", "splitting_J", "larmor_rad_per_s"]);
            t.push(vec![Cell::Num(*cp), Cell::Num(*cpi), Cell::Num(*delta), Cell::Num(s), Cell::Num(s / hbar)]);
            return Ok(t);
        }
    };
    let s = spin_splitting(point.eta, point.delta)?;
    let mut cols = vec!["eta", "delta", "splitting"];
    let mut row = vec![Cell::Num(point.eta), Cell::Num(point.delta), Cell::Num(s)];
    if derivative {
        cols.push("derivative");
        row.push(Cell::Num(splitting_derivative(point.eta, point.delta)?));
    }
    if lowspeed {
        cols.push("lowspeed_approx");
        row.push(Cell::Num(splitting_lowspeed(point.eta, point.delta)?));
    }
    if highspeed {
        cols.push("highspeed_approx");
        row.push(Cell::Num(splitting_highspeed(point.eta, point.delta)?));
    }
    if let Some((_, rest)) = &point.si {
        cols.extend(["splitting_J", "larmor_rad_per_s"]);
        row.extend([Cell::Num(s * rest), Cell::Num(s * rest / hbar)]);
    }
    let mut t = Table::new(&cols);
    t.push(row);
    Ok(t)
}

fn sweep_table(rows: &[SweepRow]) -> Table {
    let mut t = Table::new(&SWEEP_COLUMNS);
    for r in rows {
        t.push(vec![
            r.series_label.into(),
            r.swept_value.into(),
            r.splitting.into(),
            r.splitting_numeric.into(),
            r.lowspeed_approx.into(),
            r.highspeed_approx.into(),
        ]);
    }
    t
}

fn execute(cli: &Cli, meta: &mut Map<String, Value>) -> Result<(Table, bool)> {
    let registry = Registry::resolve(cli.registry.as_deref())?;
    let ctx = Context { registry, eta_mode: cli.eta_mode.into(), pi: cli.pi };
    let sweep_opts = |validate| SweepOptions { eta_mode: ctx.eta_mode, pi_tilde: ctx.pi, validate };
    let mut params = Map::new();
    params.insert("eta_mode".into(), json!(format!("{:?}", cli.eta_mode).to_lowercase()));
    params.insert("pi".into(), json!(cli.pi));

    let (name, table, ok) = match &cli.command {
        Command::Spectrum { point, numeric } => {
            insert_point(&mut params, point);
            params.insert("numeric".into(), json!(numeric));
            let p = match resolve_point(point, &ctx)? {
                SiPoint::Natural(p) => p,
                SiPoint::Massless { .. } => return Err(Error::MasslessConversion),
            };
            ("spectrum", spectrum_table(&p, *numeric, &ctx)?, true)
        }
        Command::Split { point, derivative, lowspeed, highspeed } => {
            insert_point(&mut params, point);
            params.insert("derivative".into(), json!(derivative));
            params.insert("lowspeed".into(), json!(lowspeed));
            params.insert("highspeed".into(), json!(highspeed));
            let p = resolve_point(point, &ctx)?;
            ("split", split_table(&p, *derivative, *lowspeed, *highspeed, ctx.registry.constants.hbar)?, true)
        }
        Command::Limits { particle, .. } => {
            let table = match particle {
                None => {
                    let l = natural_limits();
                    let mut t = Table::new(&["max_splitting", "max_larmor", "min_wavelength"]);
                    t.push(vec![l.max_splitting.into(), l.max_larmor.into(), l.min_wavelength.into()]);
                    t
                }
                Some(name) => {
                    params.insert("particle".into(), json!(name));
                    let p = ctx.registry.particle(name)?;
                    let k = &ctx.registry.constants;
                    let l = relativistic_limits(p.mass, k)?;
                    let compton = k.hbar / (p.mass * k.c);
                    let mut t = Table::new(&[
                        "particle",
                        "max_splitting_J",
                        "max_larmor_rad_per_s",
                        "min_wavelength_m",
                        "reduced_compton_wavelength_m",
                    ]);
                    t.push(vec![
                        name.as_str().into(),
                        l.max_splitting.into(),
                        l.max_larmor.into(),
                        l.min_wavelength.into(),
                        compton.into(),
                    ]);
                    t
                }
            };
            ("limits", table, true)
        }
        Command::SweepDelta { velocities, delta_range, validate } => {
            params.insert("velocities".into(), json!(velocities));
            params.insert("delta_range".into(), json!(delta_range.to_string()));
            params.insert("validate".into(), json!(validate));
            ("sweep-delta", sweep_table(&sweep_delta(velocities, delta_range, &sweep_opts(*validate))?), true)
        }
        Command::SweepVelocity { deltas, velocity_range, validate } => {
            params.insert("deltas".into(), json!(deltas));
            params.insert("velocity_range".into(), json!(velocity_range.to_string()));
            params.insert("validate".into(), json!(validate));
            ("sweep-velocity", sweep_table(&sweep_velocity(deltas, velocity_range, &sweep_opts(*validate))?), true)
        }
        Command::Doppler { velocity_range, delta } => {
            params.insert("velocity_range".into(), json!(velocity_range.to_string()));
            params.insert("delta".into(), json!(delta));
            let d = doppler_compare(velocity_range, *delta)?;
            let mut t = Table::new(&["velocity", "motional_ratio", "nonrel_doppler", "rel_doppler"]);
            for r in &d.rows {
                t.push(vec![r.velocity.into(), r.motional_ratio.into(), r.nonrel_doppler.into(), r.rel_doppler.into()]);
            }
            if d.dropped > 0 {
                t.note("dropped_rows", d.dropped as i64);
            }
            ("doppler", t, true)
        }
        Command::Verify { samples, seed } => {
            params.insert("samples".into(), json!(samples));
            meta.insert("seed".into(), json!(seed));
            let report = verify::run(*samples, *seed, &ctx.registry)?;
            ("verify", report.to_table(), report.all_passed())
        }
    };
    meta.insert("command".into(), json!(name));
    meta.insert("parameters".into(), Value::Object(params));
    meta.entry("seed").or_insert(Value::Null);
    meta.insert("version".into(), json!(env!("CARGO_PKG_VERSION")));
    Ok((table, ok))
}

fn insert_point(params: &mut Map<String, Value>, p: &PointArgs) {
    params.insert("eta".into(), json!(p.eta));
    params.insert("delta".into(), json!(p.delta));
    if let Some(name) = &p.particle {
        params.insert("particle".into(), json!(name));
        params.insert("e_field".into(), json!(p.e_field));
        params.insert("b_field".into(), json!(p.b_field));
        params.insert("momentum".into(), json!(p.momentum));
        params.insert("velocity".into(), json!(p.velocity));
    }
}

/// Runs the CLI against the given streams and returns the exit code.
pub fn run_with<I, T>(args: I, stdout: &mut dyn Write, stderr: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let code = e.exit_code();
            let text = e.render().to_string();
            let _ = if code == 0 { stdout.write_all(text.as_bytes()) } else { stderr.write_all(text.as_bytes()) };
            return code;
        }
    };
    let envelope = OutputEnvelope::new(
        match cli.format {
            FormatArg::Csv => Format::Csv,
            FormatArg::Json => Format::Json,
        },
        usize::from(cli.precision),
    )
    .expect("precision range enforced by clap");

    let mut meta = Map::new();
    let (table, ok) = match execute(&cli, &mut meta) {
        Ok(r) => r,
        Err(e) => {
            let _ = writeln!(stderr, "error: {e}");
            return if e.is_usage() { 2 } else { 1 };
        }
    };

    let written = match &cli.out {
        Some(path) => File::create(path).map_err(Error::from).and_then(|f| {
            let mut w = BufWriter::new(f);
            write_table(&table, meta, &envelope, &mut w)?;
            w.flush().map_err(Error::from)
        }),
        None => write_table(&table, meta, &envelope, stdout),
    };
    if let Err(e) = written {
        let _ = writeln!(stderr, "error: {e}");
        return 1;
    }
    if !ok {
        let failed: Vec<String> = table
            .rows
            .iter()
            .filter(|r| matches!(&r[1], Cell::Text(s) if s == "fail"))
            .filter_map(|r| match &r[0] {
                Cell::Text(s) => Some(s.clone()),
                _ => None,
            })
            .collect();
        let _ = writeln!(stderr, "verification failed: {}", failed.join(", "));
        return 1;
    }
    0
}

pub fn run<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let stdout = std::io::stdout();
    let stderr = std::io::stderr();
    run_with(args, &mut stdout.lock(), &mut stderr.lock())
}
