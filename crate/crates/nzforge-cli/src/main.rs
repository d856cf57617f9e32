use std::io::Write;
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};
use num_complex::Complex64;
use rayon::prelude::*;
use serde_json::{json, Value};

use nzforge::apoly::{eliminate, verify_properties, EliminationOptions};
use nzforge::catalog::{self, CatalogEntry};
use nzforge::dehn::{dehn_fill, FillingOptions};
use nzforge::dilog::{identity_suite, log_phi_gamma, QDilogParams};
use nzforge::potential::GluingSystem;
use nzforge::saddle::{complete_structure, taylor_v, SaddleSolution, SolveOptions};
use nzforge::triangulation::ptb_triangulation;
use nzforge::Error;

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
enum Output {
    Json,
    Table,
}

#[derive(Parser, Debug)]
#[command(name = "nzforge", version, about = "Volumes, gluing equations, A-polynomials and Dehn fillings from Neumann-Zagier potentials")]
struct Cli {
    #[arg(long, global = true, value_enum, default_value = "json")]
    output: Output,
    /// tolerance override for the pass/fail decision of the command
    #[arg(long, global = true)]
    tol: Option<f64>,
    #[arg(long, global = true, default_value_t = 0)]
    seed: u64,
    /// worker threads (0 = all cores)
    #[arg(long, global = true, default_value_t = 0)]
    jobs: usize,
    #[command(subcommand)]
    cmd: Cmd,
}

#[derive(Subcommand, Debug)]
enum Cmd {
    /// List catalog entries
    List,
    /// Geometric volume of an entry, or of every entry when no name is given
    Volume { name: Option<String> },
    /// A-polynomial by elimination (--exact) or zero-locus check (--numeric)
    Apoly {
        name: String,
        #[arg(long, conflicts_with = "numeric")]
        exact: bool,
        #[arg(long)]
        numeric: bool,
        /// number of continuation samples for --numeric
        #[arg(long, default_value_t = 8)]
        samples: usize,
        /// check the polynomial exactly as stored, without recorded corrections
        #[arg(long)]
        verbatim: bool,
    },
    /// Taylor coefficients of 2v(u) at the complete structure
    Taylor {
        name: String,
        #[arg(long, default_value_t = 5)]
        order: usize,
    },
    /// Hyperbolic (p, q) Dehn filling
    Dehn {
        name: String,
        #[arg(allow_negative_numbers = true)]
        p: i64,
        #[arg(allow_negative_numbers = true)]
        q: i64,
        #[arg(long, default_value_t = 800)]
        steps: usize,
    },
    /// Faddeev quantum dilogarithm
    Phi {
        #[arg(long)]
        gamma: f64,
        #[arg(long, allow_negative_numbers = true, default_value_t = 0.0)]
        re: f64,
        #[arg(long, allow_negative_numbers = true, default_value_t = 0.0)]
        im: f64,
    },
    /// Gluing and longitude equations generated from the potential
    Gluing { name: String },
    /// Run the special-function identity suite
    Verify,
    /// Once-punctured torus bundle from a word in L and R
    Ptb {
        #[arg(long)]
        word: String,
        /// print the volume only
        #[arg(long)]
        volume: bool,
    },
}

struct Report {
    value: Value,
    code: u8,
}

impl Report {
    fn ok(value: Value) -> Self {
        Report { value, code: 0 }
    }
    fn check(value: Value, pass: bool) -> Self {
        Report { value, code: if pass { 0 } else { 1 } }
    }
}

fn exit_code(e: &Error) -> u8 {
    match e {
        Error::NotFound { .. } => 2,
        Error::SwellLimit(_) => 3,
        _ => 1,
    }
}

fn c2(z: Complex64) -> Value {
    json!([z.re, z.im])
}

fn solve(entry: &CatalogEntry, seed: u64) -> nzforge::Result<(SaddleSolution, GluingSystem)> {
    let v = entry.working_potential()?;
    let opts = SolveOptions { extra_starts: entry.start_points(), seed, ..Default::default() };
    complete_structure(&v, &opts)
}

fn volume_value(entry: &CatalogEntry, seed: u64, tol: f64) -> nzforge::Result<(Value, bool)> {
    let (sol, _) = solve(entry, seed)?;
    let diff = (sol.volume - entry.expected_volume).abs();
    let pass = diff <= tol;
    let mut out = json!({
        "name": entry.name,
        "volume": sol.volume,
        "expected": entry.expected_volume,
        "difference": diff,
        "pass": pass,
        "residual": sol.residual,
        "solution": sol.to_json(),
    });
    out["shape_vars"] = json!(entry.shape_vars);
    Ok((out, pass))
}

fn run(cli: &Cli) -> nzforge::Result<Report> {
    match &cli.cmd {
        Cmd::List => {
            let all = catalog::load()?;
            let rows: Vec<Value> = all
                .iter()
                .map(|e| {
                    json!({
                        "name": e.name,
                        "aliases": e.aliases,
                        "shapes": e.n_shapes(),
                        "expected_volume": e.expected_volume,
                        "newton_matrix": e.newton_matrix.is_some(),
                        "explicit_polynomial": e.explicit_apoly.is_some(),
                    })
                })
                .collect();
            Ok(Report::ok(json!(rows)))
        }
        Cmd::Volume { name } => {
            let tol = cli.tol.unwrap_or(1e-4);
            match name {
                Some(n) => {
                    let entry = catalog::get(n)?;
                    let (v, pass) = volume_value(&entry, cli.seed, tol)?;
                    Ok(Report::check(v, pass))
                }
                None => {
                    let all = catalog::load()?;
                    let rows = all
                        .par_iter()
                        .map(|e| volume_value(e, cli.seed, tol))
                        .collect::<nzforge::Result<Vec<_>>>()?;
                    let pass = rows.iter().all(|(_, p)| *p);
                    let rows: Vec<Value> = rows
                        .into_iter()
                        .map(|(mut v, _)| {
                            v.as_object_mut().unwrap().remove("solution");
                            v
                        })
                        .collect();
                    Ok(Report::check(json!(rows), pass))
                }
            }
        }
        Cmd::Apoly { name, exact, numeric: _, samples, verbatim } => {
            let entry = catalog::get(name)?;
            if *exact {
                let (_, sys) = solve(&entry, cli.seed)?;
                let a = match eliminate(&sys, &EliminationOptions::default()) {
                    Err(e @ Error::SwellLimit(_)) => {
                        eprintln!("elimination exceeded the term budget; try --numeric");
                        return Err(e);
                    }
                    r => r?,
                };
                let m = a.matrix()?;
                let props = verify_properties(&a);
                let mut out = json!({
                    "name": entry.name,
                    "polynomial": a.poly.to_string(),
                    "matrix": m.rows,
                    "properties": props,
                    "warning": a.warning,
                });
                let mut pass = true;
                if let Some((kind, reference)) = entry.reference_matrix(!verbatim)? {
                    let hit = m.match_up_to_symmetry(&reference);
                    pass = hit.is_some();
                    out["reference"] = json!(kind);
                    out["match"] = json!(hit);
                }
                Ok(Report::check(out, pass))
            } else {
                let tol = cli.tol.unwrap_or(1e-6);
                let chk = catalog::locus_check(&entry, *samples, !verbatim)?;
                let pass = chk.report.max_residual <= tol;
                let mut out = serde_json::to_value(&chk).unwrap();
                out["tol"] = json!(tol);
                out["pass"] = json!(pass);
                Ok(Report::check(out, pass))
            }
        }
        Cmd::Taylor { name, order } => {
            let entry = catalog::get(name)?;
            let v = entry.working_potential()?;
            let (sol, _) = solve(&entry, cli.seed)?;
            let c = taylor_v(&v, &sol, *order)?;
            Ok(Report::ok(json!({
                "name": entry.name,
                "series": "2v(u) = sum c_k u^k",
                "coefficients": c.iter().map(|z| c2(*z)).collect::<Vec<_>>(),
            })))
        }
        Cmd::Dehn { name, p, q, steps } => {
            let entry = catalog::get(name)?;
            let v = entry.working_potential()?;
            let (sol, _) = solve(&entry, cli.seed)?;
            let r = dehn_fill(&v, &sol, *p, *q, &FillingOptions { steps: *steps, ..Default::default() })?;
            let tol = cli.tol.unwrap_or(1e-9);
            let pass = r.constraint_residual <= tol;
            let mut out = serde_json::to_value(&r).unwrap();
            out["name"] = json!(entry.name);
            out["complete_volume"] = json!(sol.volume);
            Ok(Report::check(out, pass))
        }
        Cmd::Phi { gamma, re, im } => {
            let p = QDilogParams::new(*gamma);
            let phi = Complex64::new(*re, *im);
            let l = log_phi_gamma(&p, phi)?;
            let lm = log_phi_gamma(&p, -phi)?;
            let g = *gamma;
            let forced = -(phi * phi / 2.0 + (std::f64::consts::PI.powi(2) + g * g) / 6.0) / Complex64::new(0.0, 2.0 * g);
            let inv = ((l + lm).exp() - forced.exp()).norm();
            Ok(Report::ok(json!({
                "gamma": g,
                "phi": c2(phi),
                "value": c2(l.exp()),
                "log_value": c2(l),
                "inversion_residual": inv,
            })))
        }
        Cmd::Gluing { name } => {
            let entry = catalog::get(name)?;
            let (_, sys) = solve(&entry, cli.seed)?;
            let eqs: Vec<Value> = sys
                .equations
                .iter()
                .zip(&sys.vars)
                .map(|(e, var)| json!({"variable": var, "num": e.num.to_string(), "den": e.den.to_string(), "root": e.root}))
                .collect();
            let lon = &sys.longitude;
            let mut out = json!({
                "name": entry.name,
                "vars": sys.vars,
                "gluing": eqs,
                "longitude": {"l_power": lon.d, "num": lon.eq.num.to_string(), "den": lon.eq.den.to_string()},
            });
            let mut pass = true;
            if entry.printed_equations.is_some() {
                let checks = catalog::check_printed_equations(&entry)?;
                pass = checks.iter().all(|c| c.matched.is_some());
                out["printed_check"] = json!(checks);
            }
            Ok(Report::check(out, pass))
        }
        Cmd::Verify => {
            let checks = identity_suite(cli.seed)?;
            let pass = checks.iter().all(|c| c.pass);
            Ok(Report::check(json!(checks), pass))
        }
        Cmd::Ptb { word, volume } => {
            let t = ptb_triangulation(word)?;
            let v = t.build_potential()?;
            let opts = SolveOptions { seed: cli.seed, ..Default::default() };
            let (sol, _) = complete_structure(&v, &opts)?;
            if *volume {
                return Ok(Report::ok(json!({"word": word, "volume": sol.volume})));
            }
            Ok(Report::ok(json!({
                "word": word,
                "volume": sol.volume,
                "potential": v.to_string(),
                "triangulation": serde_json::to_value(&t).unwrap(),
                "solution": sol.to_json(),
            })))
        }
    }
}

fn table(v: &Value, indent: usize, out: &mut String) {
    let pad = " ".repeat(indent);
    match v {
        Value::Object(map) => {
            for (k, x) in map {
                match x {
                    Value::Object(_) => {
                        out.push_str(&format!("{pad}{k}:\n"));
                        table(x, indent + 2, out);
                    }
                    Value::Array(items) if items.iter().any(|i| i.is_object()) => {
                        out.push_str(&format!("{pad}{k}:\n"));
                        table(x, indent + 2, out);
                    }
                    _ => out.push_str(&format!("{pad}{k:<20} {}\n", x)),
                }
            }
        }
        Value::Array(items) => {
            for (i, x) in items.iter().enumerate() {
                if x.is_object() {
                    out.push_str(&format!("{pad}[{i}]\n"));
                    table(x, indent + 2, out);
                } else {
                    out.push_str(&format!("{pad}{x}\n"));
                }
            }
        }
        _ => out.push_str(&format!("{pad}{v}\n")),
    }
}

// a closed pipe (e.g. `| head`) is not an error
fn emit(s: &str) {
    let _ = std::io::stdout().lock().write_all(s.as_bytes());
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    if cli.jobs > 0 {
        rayon::ThreadPoolBuilder::new().num_threads(cli.jobs).build_global().ok();
    }
    match run(&cli) {
        Ok(r) => {
            match cli.output {
                Output::Json => emit(&format!("{}\n", serde_json::to_string_pretty(&r.value).unwrap())),
                Output::Table => {
                    let mut s = String::new();
                    table(&r.value, 0, &mut s);
                    emit(&s);
                }
            }
            ExitCode::from(r.code)
        }
        Err(e) => {
            eprintln!("error: {e}");
            let code = exit_code(&e);
            if cli.output == Output::Json {
                emit(&format!("{}\n", json!({"error": e.to_string(), "exit_code": code})));
            }
            ExitCode::from(code)
        }
    }
}
