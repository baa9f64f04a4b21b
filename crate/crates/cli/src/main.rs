use std::fs;
use std::io::{BufWriter, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use num_complex::Complex64;
use serde_json::json;

use hsmaps_core::automorphism::{regularity_report, MapError};
use hsmaps_core::dsl::{self, MapDefinition};
use hsmaps_core::green::{
    distortion_constant, escape_radius, green_plus, raster_slice, FloatMap, GreenOptions,
    SliceSpec,
};
use hsmaps_core::suite;
use hsmaps_core::symmetry::{compute_n, shared_iterate_search, SearchError, Status};
use hsmaps_core::{Budget, PolyMap};

const EXIT_NEGATIVE: u8 = 1;
const EXIT_PARSE: u8 = 2;
const EXIT_INVERSE: u8 = 3;
const EXIT_UNSOLVED: u8 = 4;
const EXIT_OTHER: u8 = 5;

/// Hénon–Sibony map toolkit.
#[derive(Parser)]
#[command(name = "hsmaps", version)]
struct Cli {
    #[command(flatten)]
    config: RunConfig,
    #[command(subcommand)]
    command: Command,
}

#[derive(Args, Clone, Debug)]
struct RunConfig {
    /// Emit JSON instead of text.
    #[arg(long, global = true)]
    json: bool,
    /// Escape radius R.
    #[arg(long, global = true, default_value_t = 1e4)]
    radius: f64,
    /// Iteration budget N.
    #[arg(long, global = true, default_value_t = 200)]
    max_iter: u32,
    /// Numeric tolerance.
    #[arg(long, global = true, default_value_t = 1e-6)]
    tol: f64,
    /// Largest polynomial degree any intermediate may reach.
    #[arg(long, global = true, default_value_t = 256)]
    degree_budget: u32,
    /// Largest term count any intermediate may reach.
    #[arg(long, global = true, default_value_t = 1_000_000)]
    term_budget: usize,
    /// Worker threads for rendering (0 = all cores).
    #[arg(long, global = true, default_value_t = 0)]
    threads: usize,
}

impl RunConfig {
    fn budget(&self) -> Budget {
        Budget {
            max_degree: self.degree_budget,
            max_terms: self.term_budget,
        }
    }

    fn green(&self) -> GreenOptions {
        GreenOptions {
            radius: self.radius,
            max_iter: self.max_iter,
        }
    }

    fn validate(&self) -> Result<(), Failure> {
        if !(self.radius > 0.0 && self.tol > 0.0)
            || self.max_iter == 0
            || self.degree_budget == 0
            || self.term_budget == 0
        {
            return Err(Failure::usage(
                "--radius, --tol, --max-iter and the budgets must be positive",
            ));
        }
        Ok(())
    }
}

#[derive(Subcommand)]
enum Command {
    /// Regularity report: degrees, indeterminacy forms, disjointness.
    Check(MapArgs),
    /// Affine conjugation symmetries.
    Symmetries {
        #[command(flatten)]
        map: MapArgs,
        #[arg(long, default_value_t = 5)]
        rounds: usize,
    },
    /// Canonical form of the n-th iterate (negative n iterates the inverse).
    Iterate {
        #[command(flatten)]
        map: MapArgs,
        #[arg(allow_negative_numbers = true)]
        n: i32,
    },
    /// First (n, m) with F^n = G^m.
    SharedIterate {
        file: PathBuf,
        first: String,
        second: String,
        #[arg(long, default_value_t = 3)]
        nmax: u32,
    },
    /// Green function estimate at a point.
    Green {
        #[command(flatten)]
        map: MapArgs,
        /// Comma-separated complex coordinates, e.g. `1+2i,0,-3`.
        #[arg(long, allow_hyphen_values = true)]
        point: String,
        /// Use the inverse map (G^-).
        #[arg(long)]
        minus: bool,
    },
    /// Rasterize G^+ on a complex 2-D slice to PGM and CSV.
    Render {
        #[command(flatten)]
        map: MapArgs,
        #[arg(long, default_value_t = 256)]
        width: usize,
        #[arg(long, default_value_t = 256)]
        height: usize,
        /// `u_min,u_max,v_min,v_max`.
        #[arg(long, default_value = "-2,2,-2,2", allow_hyphen_values = true)]
        window: String,
        /// Slice origin (defaults to 0).
        #[arg(long, allow_hyphen_values = true)]
        base: Option<String>,
        /// First direction (defaults to e1).
        #[arg(long, allow_hyphen_values = true)]
        dir_u: Option<String>,
        /// Second direction (defaults to e2).
        #[arg(long, allow_hyphen_values = true)]
        dir_v: Option<String>,
        /// Value mapped to white.
        #[arg(long, default_value_t = 1.0)]
        v_cap: f64,
        /// Output prefix; writes PREFIX.pgm and PREFIX.csv.
        #[arg(long)]
        out: PathBuf,
    },
    /// Run the built-in reproduction checks.
    VerifyPaper,
}

#[derive(Args)]
struct MapArgs {
    file: PathBuf,
    /// Map name; optional when the file holds one map.
    #[arg(long = "map")]
    name: Option<String>,
}

struct Failure {
    code: u8,
    message: String,
}

impl Failure {
    fn new(code: u8, message: impl Into<String>) -> Self {
        Self {
            code,
            message: message.into(),
        }
    }

    fn usage(message: impl Into<String>) -> Self {
        Self::new(EXIT_PARSE, message)
    }
}

impl From<MapError> for Failure {
    fn from(e: MapError) -> Self {
        let code = match e {
            MapError::MissingInverse | MapError::InverseNotVerified | MapError::NotRegular(_) => {
                EXIT_INVERSE
            }
            _ => EXIT_OTHER,
        };
        Self::new(code, e.to_string())
    }
}

fn load_defs(path: &Path) -> Result<Vec<MapDefinition>, Failure> {
    let text = fs::read_to_string(path)
        .map_err(|e| Failure::usage(format!("{}: {e}", path.display())))?;
    dsl::parse_file(&text).map_err(|e| Failure::usage(format!("{}:{e}", path.display())))
}

fn pick(defs: Vec<MapDefinition>, name: Option<&str>) -> Result<MapDefinition, Failure> {
    match name {
        Some(n) => defs
            .into_iter()
            .find(|d| d.name == n)
            .ok_or_else(|| Failure::usage(format!("no map named '{n}'"))),
        None if defs.len() == 1 => Ok(defs.into_iter().next().unwrap()),
        None => Err(Failure::usage(format!(
            "file holds {} maps; choose one with --map",
            defs.len()
        ))),
    }
}

fn load_map(args: &MapArgs) -> Result<(MapDefinition, PolyMap), Failure> {
    let def = pick(load_defs(&args.file)?, args.name.as_deref())?;
    let f = def.to_polymap()?;
    Ok((def, f))
}

/// `3`, `-1.5`, `2i`, `-i`, `1+2i`, `0.5-0.25i`.
fn parse_complex(s: &str) -> Result<Complex64, String> {
    let t: String = s.chars().filter(|c| !c.is_whitespace()).collect();
    if t.is_empty() {
        return Err("empty number".into());
    }
    let bad = || format!("not a complex number: '{s}'");
    let imag = |u: &str| -> Result<f64, String> {
        match u {
            "" | "+" => Ok(1.0),
            "-" => Ok(-1.0),
            _ => u.parse::<f64>().map_err(|_| bad()),
        }
    };
    if let Some(body) = t.strip_suffix('i') {
        // split at the last sign that is not an exponent sign or leading
        let split = body
            .char_indices()
            .rev()
            .find(|&(i, c)| {
                (c == '+' || c == '-')
                    && i > 0
                    && !matches!(body.as_bytes()[i - 1], b'e' | b'E')
            })
            .map(|(i, _)| i);
        return match split {
            Some(i) => {
                let re = body[..i].parse::<f64>().map_err(|_| bad())?;
                Ok(Complex64::new(re, imag(&body[i..])?))
            }
            None => Ok(Complex64::new(0.0, imag(body)?)),
        };
    }
    t.parse::<f64>().map(|re| Complex64::new(re, 0.0)).map_err(|_| bad())
}

fn parse_vector(s: &str, k: usize, what: &str) -> Result<Vec<Complex64>, Failure> {
    let v = s
        .split(',')
        .map(parse_complex)
        .collect::<Result<Vec<_>, _>>()
        .map_err(|e| Failure::usage(format!("--{what}: {e}")))?;
    if v.len() != k {
        return Err(Failure::usage(format!(
            "--{what}: expected {k} coordinates, got {}",
            v.len()
        )));
    }
    Ok(v)
}

fn unit(k: usize, i: usize) -> Vec<Complex64> {
    (0..k)
        .map(|j| Complex64::new((i == j) as u8 as f64, 0.0))
        .collect()
}

fn fmt_complex(c: &Complex64) -> String {
    if c.im == 0.0 {
        format!("{}", c.re)
    } else if c.im < 0.0 {
        format!("{}-{}i", c.re, -c.im)
    } else {
        format!("{}+{}i", c.re, c.im)
    }
}

fn cmd_check(cfg: &RunConfig, args: &MapArgs) -> Result<u8, Failure> {
    let (def, f) = load_map(args)?;
    let report = regularity_report(&f, &cfg.budget())?;
    if cfg.json {
        println!("{}", report.to_json(&def.variables));
    } else {
        print!("{}", report.to_text(&def.variables));
    }
    Ok(if report.is_regular() { 0 } else { EXIT_NEGATIVE })
}

fn cmd_symmetries(cfg: &RunConfig, args: &MapArgs, rounds: usize) -> Result<u8, Failure> {
    let (_, f) = load_map(args)?;
    let budget = cfg.budget();
    let inv = f.verified_inverse(&budget)?.clone();
    let n = compute_n(&f, &inv, rounds, &budget).map_err(|e| Failure::new(EXIT_OTHER, e.to_string()))?;
    let fam = &n.family;
    if cfg.json {
        println!("{}", n.to_json());
    } else {
        println!("member: {}", n.member().render());
        println!("status: {}", fam.status.as_str());
        for (i, v) in fam.assignments() {
            println!("assign: {} = {}", fam.params[i], v.render(&fam.params, &[]));
        }
        for r in &fam.relations {
            println!("relation: {}", r.render(&fam.params));
        }
        for e in fam.residual.render_equations(&fam.params) {
            println!("residual: {e} = 0");
        }
        match fam.element_count() {
            Some(c) => println!("elements: {c}"),
            None => println!("elements: unknown"),
        }
        println!("rounds: {}", n.rounds);
        println!("stabilized: {}", n.stabilized);
    }
    Ok(match fam.status {
        Status::Solved if n.stabilized => 0,
        Status::Solved => EXIT_NEGATIVE,
        Status::Unsolved | Status::Inconsistent => {
            for e in fam.residual.render_equations(&fam.params) {
                eprintln!("unsolved: {e} = 0");
            }
            EXIT_UNSOLVED
        }
    })
}

fn cmd_iterate(cfg: &RunConfig, args: &MapArgs, n: i32) -> Result<u8, Failure> {
    let (def, f) = load_map(args)?;
    let budget = cfg.budget();
    let base = if n < 0 {
        f.verified_inverse(&budget)?.clone()
    } else {
        f.forget_inverse()
    };
    let it = base.iterate(n.unsigned_abs(), &budget)?;
    let text = dsl::print(&MapDefinition {
        name: format!("{}_{}", def.name, n).replace('-', "m"),
        variables: def.variables.clone(),
        components: it.components().to_vec(),
        inverse_components: None,
    });
    if cfg.json {
        println!(
            "{}",
            json!({ "n": n, "degree": it.degree(), "map": text })
        );
    } else {
        println!("{text}");
    }
    Ok(0)
}

fn cmd_shared(
    cfg: &RunConfig,
    file: &Path,
    first: &str,
    second: &str,
    nmax: u32,
) -> Result<u8, Failure> {
    let defs = load_defs(file)?;
    let f = pick(defs.clone(), Some(first))?.to_polymap()?;
    let g = pick(defs, Some(second))?.to_polymap()?;
    match shared_iterate_search(&f, &g, nmax, &cfg.budget()) {
        Ok(found) => {
            if cfg.json {
                let pair = found.map(|(n, m)| json!([n, m]));
                println!("{}", json!({ "nmax": nmax, "shared": pair }));
            } else {
                match found {
                    Some((n, m)) => println!("({n},{m})"),
                    None => println!("none up to {nmax}"),
                }
            }
            Ok(if found.is_some() { 0 } else { EXIT_NEGATIVE })
        }
        Err(SearchError::BudgetExceeded { reason, untested }) => Err(Failure::new(
            EXIT_OTHER,
            format!("budget exceeded ({reason}); untested pairs: {untested:?}"),
        )),
        Err(SearchError::Map(e)) => Err(e.into()),
    }
}

fn cmd_green(cfg: &RunConfig, args: &MapArgs, point: &str, minus: bool) -> Result<u8, Failure> {
    let (_, f) = load_map(args)?;
    let map = if minus {
        f.verified_inverse(&cfg.budget())?.clone()
    } else {
        f
    };
    let fm = FloatMap::from_polymap(&map);
    let d = fm.degree();
    let z = parse_vector(point, fm.dim(), "point")?;
    let opts = cfg.green();
    let r_min = escape_radius(&fm);
    if opts.radius < r_min {
        eprintln!("warning: radius {} is below the empirical minimum {r_min}", opts.radius);
    }
    let g = green_plus(&fm, d, &z, &opts).map_err(|e| Failure::new(EXIT_OTHER, e.to_string()))?;
    let c_r = distortion_constant(d, opts.radius);
    if cfg.json {
        println!(
            "{}",
            json!({
                "point": z.iter().map(fmt_complex).collect::<Vec<_>>(),
                "sign": if minus { "minus" } else { "plus" },
                "degree": d,
                "value": g.value,
                "iterations": g.iterations_used,
                "escaped": g.escaped,
                "error_bound": g.error_bound,
                "radius": opts.radius,
                "radius_min": r_min,
                "distortion_constant": c_r,
            })
        );
    } else {
        let shown: Vec<String> = z.iter().map(fmt_complex).collect();
        println!("point: {}", shown.join(","));
        println!("value: {}", g.value);
        println!("iterations: {}", g.iterations_used);
        println!("escaped: {}", g.escaped);
        println!("error_bound: {}", g.error_bound);
        println!("radius: {} (empirical minimum {r_min})", opts.radius);
        println!("distortion_constant: {c_r}");
    }
    Ok(0)
}

#[allow(clippy::too_many_arguments)]
fn cmd_render(
    cfg: &RunConfig,
    args: &MapArgs,
    width: usize,
    height: usize,
    window: &str,
    base: Option<&str>,
    dir_u: Option<&str>,
    dir_v: Option<&str>,
    v_cap: f64,
    out: &Path,
) -> Result<u8, Failure> {
    let (_, f) = load_map(args)?;
    let fm = FloatMap::from_polymap(&f);
    let k = fm.dim();
    if k < 2 {
        return Err(Failure::usage("slices need at least two coordinates"));
    }
    let w: Vec<f64> = window
        .split(',')
        .map(|s| s.trim().parse::<f64>())
        .collect::<Result<_, _>>()
        .map_err(|_| Failure::usage(format!("--window: cannot parse '{window}'")))?;
    let [u0, u1, v0, v1] = w[..] else {
        return Err(Failure::usage("--window needs four numbers"));
    };
    if v_cap.is_nan() || v_cap <= 0.0 {
        return Err(Failure::usage("--v-cap must be positive"));
    }
    let spec = SliceSpec {
        base: match base {
            Some(s) => parse_vector(s, k, "base")?,
            None => vec![Complex64::new(0.0, 0.0); k],
        },
        dir_u: match dir_u {
            Some(s) => parse_vector(s, k, "dir-u")?,
            None => unit(k, 0),
        },
        dir_v: match dir_v {
            Some(s) => parse_vector(s, k, "dir-v")?,
            None => unit(k, 1),
        },
        window: (u0, u1, v0, v1),
        width,
        height,
    };
    spec.validate(k).map_err(|e| Failure::usage(e.to_string()))?;
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(cfg.threads)
        .build()
        .map_err(|e| Failure::new(EXIT_OTHER, e.to_string()))?;
    let grid = pool
        .install(|| raster_slice(&fm, fm.degree(), &spec, &cfg.green()))
        .map_err(|e| Failure::new(EXIT_OTHER, e.to_string()))?;
    let write = |ext: &str, body: &dyn Fn(&mut BufWriter<fs::File>) -> std::io::Result<()>| {
        let path = out.with_extension(ext);
        let file = fs::File::create(&path)
            .map_err(|e| Failure::new(EXIT_OTHER, format!("{}: {e}", path.display())))?;
        let mut w = BufWriter::new(file);
        body(&mut w)
            .and_then(|_| w.flush())
            .map_err(|e| Failure::new(EXIT_OTHER, format!("{}: {e}", path.display())))?;
        Ok::<PathBuf, Failure>(path)
    };
    let pgm = write("pgm", &|w| grid.write_pgm(v_cap, w))?;
    let csv = write("csv", &|w| grid.write_csv(w))?;
    let escaped = grid.cells.iter().filter(|c| c.escaped).count();
    if cfg.json {
        println!(
            "{}",
            json!({
                "pgm": pgm.display().to_string(),
                "csv": csv.display().to_string(),
                "width": width,
                "height": height,
                "escaped": escaped,
                "bounded": grid.cells.len() - escaped,
            })
        );
    } else {
        println!("wrote {} and {}", pgm.display(), csv.display());
        println!("escaped: {escaped}, bounded: {}", grid.cells.len() - escaped);
    }
    Ok(0)
}

fn cmd_verify_paper(cfg: &RunConfig) -> Result<u8, Failure> {
    let checks = suite::paper_suite(&cfg.budget());
    let all = checks.iter().all(|c| c.pass);
    if cfg.json {
        println!("{}", json!({ "pass": all, "checks": checks }));
    } else {
        for c in &checks {
            println!(
                "{} {}: {}",
                if c.pass { "PASS" } else { "FAIL" },
                c.name,
                c.detail
            );
        }
    }
    Ok(if all { 0 } else { EXIT_NEGATIVE })
}

fn run(cli: Cli) -> Result<u8, Failure> {
    let cfg = &cli.config;
    cfg.validate()?;
    match &cli.command {
        Command::Check(m) => cmd_check(cfg, m),
        Command::Symmetries { map, rounds } => cmd_symmetries(cfg, map, *rounds),
        Command::Iterate { map, n } => cmd_iterate(cfg, map, *n),
        Command::SharedIterate {
            file,
            first,
            second,
            nmax,
        } => cmd_shared(cfg, file, first, second, *nmax),
        Command::Green { map, point, minus } => cmd_green(cfg, map, point, *minus),
        Command::Render {
            map,
            width,
            height,
            window,
            base,
            dir_u,
            dir_v,
            v_cap,
            out,
        } => cmd_render(
            cfg,
            map,
            *width,
            *height,
            window,
            base.as_deref(),
            dir_u.as_deref(),
            dir_v.as_deref(),
            *v_cap,
            out,
        ),
        Command::VerifyPaper => cmd_verify_paper(cfg),
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { EXIT_PARSE } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    match run(cli) {
        Ok(code) => ExitCode::from(code),
        Err(f) => {
            eprintln!("error: {}", f.message);
            ExitCode::from(f.code)
        }
    }
}
