//! The `powerfree` command line.

use std::path::{Path, PathBuf};

use clap::{Parser, Subcommand, ValueEnum};
use log::info;
use serde_json::{json, Value};

use powerfree_core::density::{bb_constant, density, estermann_constant, twin_constant};
use powerfree_core::ergodic::{exponent_fit, Condition, ErgodicSetup};
use powerfree_core::kfree::{count_rows, e_f_tail};
use powerfree_core::local_roots::{LocalRoots, RootOptions};

use crate::config::ExperimentConfig;
use crate::descriptor::{parse_factors, ArgMapSpec, ConditionSpec, SystemSpec};
use crate::output::{emit, json_bytes, real, Table};
use crate::parallel::DEFAULT_SEGMENT;
use crate::repro::{read_mask, IDS};
use crate::{repro, row, LabError, Result, Runner};

#[derive(Debug, Parser)]
#[command(name = "powerfree", version, about = "Power-free polynomial values and ergodic averages along Omega(n)")]
pub struct Cli {
    /// Worker threads; 0 uses the hardware parallelism. Output does not depend on it.
    #[arg(long, global = true, default_value_t = 0)]
    pub threads: usize,
    /// Entries per sieve segment.
    #[arg(long, global = true, default_value_t = DEFAULT_SEGMENT)]
    pub segment: usize,
    /// Output file (directory for `repro`); standard output when absent.
    #[arg(long, global = true)]
    pub out: Option<PathBuf>,
    /// Tabular output format.
    #[arg(long, global = true, value_enum, default_value_t = Format::Csv)]
    pub format: Format,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Csv,
    Json,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Constant {
    Twin,
    Estermann,
    Legendre,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Omega, Moebius, Liouville and squarefreeness on [lo, N].
    Sieve {
        #[arg(long, default_value_t = 1)]
        lo: u64,
        #[arg(long = "N")]
        n: u64,
    },
    /// Root counts rho(p) and rho(p^k) for primes up to a bound.
    Rho {
        #[arg(long)]
        poly: String,
        #[arg(long, default_value_t = 2)]
        k: u32,
        #[arg(long)]
        primes: u64,
    },
    /// Euler product with tail interval, as JSON.
    Density {
        #[arg(long, required_unless_present = "constant")]
        poly: Option<String>,
        #[arg(long, default_value_t = 2)]
        k: u32,
        #[arg(long = "P")]
        p: u64,
        /// A closed-form product instead of a polynomial.
        #[arg(long, value_enum, conflicts_with = "poly")]
        constant: Option<Constant>,
    },
    /// k-free value counts against the density, with an error exponent fit.
    Count {
        /// Coefficients, or factors joined by '*'.
        #[arg(long)]
        poly: String,
        #[arg(long, default_value_t = 2)]
        k: u32,
        #[arg(long, value_delimiter = ',')]
        checkpoints: Vec<u64>,
        #[arg(long = "P", default_value_t = 1_000_000)]
        p: u64,
    },
    /// The tail count E_f(Y, N) over a grid of N.
    Eftail {
        #[arg(long)]
        poly: String,
        #[arg(long, default_value_t = 2)]
        k: u32,
        #[arg(long, value_delimiter = ',')]
        checkpoints: Vec<u64>,
        /// Y = N^(1 - delta) unless --Y is given.
        #[arg(long, default_value_t = 0.1)]
        delta: f64,
        #[arg(long = "Y")]
        y: Option<f64>,
    },
    /// Convergence report of an ergodic average.
    Ergodic {
        #[arg(long)]
        system: String,
        #[arg(long, default_value = "all")]
        condition: String,
        #[arg(long, default_value = "id")]
        argmap: String,
        #[arg(long, value_delimiter = ',')]
        checkpoints: Vec<u64>,
        #[arg(long = "P", default_value_t = 1_000_000)]
        p: u64,
    },
    /// A named experiment; writes <id>.csv and <id>.json.
    Repro {
        #[arg(value_parser = clap::builder::PossibleValuesParser::new(IDS))]
        id: String,
    },
    /// An ergodic report described by a JSON config file.
    Run {
        #[arg(long)]
        config: PathBuf,
    },
}

/// Writes a table in the chosen format; CSV written to a file gets a JSON
/// metadata sidecar next to it.
fn emit_table(cli: &Cli, table: &Table, meta: Value) -> Result<()> {
    match cli.format {
        Format::Csv => {
            emit(cli.out.as_deref(), &table.to_csv()?)?;
            if let Some(p) = &cli.out {
                emit(Some(&p.with_extension("json")), &json_bytes(&meta)?)?;
            }
            Ok(())
        }
        Format::Json => {
            let doc = json!({ "meta": meta, "columns": table.columns, "rows": table.rows });
            emit(cli.out.as_deref(), &json_bytes(&doc)?)
        }
    }
}

fn condition(spec: &ConditionSpec, n: u64) -> Result<Condition> {
    Ok(match spec {
        ConditionSpec::All => Condition::All,
        ConditionSpec::Twin => Condition::TwinSquarefree,
        ConditionSpec::KFree { f, k } => Condition::KFreePoly { f: f.clone(), k: *k },
        ConditionSpec::Product { factors, k } => Condition::ProductPoly { factors: factors.clone(), k: *k },
        ConditionSpec::Mask(path) => Condition::CustomMask(read_mask(path, n)?),
    })
}

#[allow(clippy::too_many_arguments)]
fn ergodic(
    cli: &Cli,
    runner: &Runner,
    system: &str,
    cond: &str,
    argmap: &str,
    cps: &[u64],
    p: u64,
    extra: Value,
) -> Result<()> {
    if cps.is_empty() {
        return Err(LabError::Usage("--checkpoints is required".into()));
    }
    let sys: SystemSpec = system.parse()?;
    let cspec: ConditionSpec = cond.parse()?;
    let amap: ArgMapSpec = argmap.parse()?;
    let n = *cps.last().unwrap();
    let setup = ErgodicSetup {
        system: sys.system,
        observable: sys.observable.clone(),
        x: sys.x,
        condition: condition(&cspec, n)?,
        argmap: amap.0,
        p_bound: p,
    };
    let rows = runner.convergence(&setup, cps)?;
    let mut t = Table::new(&["N", "selected", "average", "target", "residual"]);
    for r in &rows {
        t.push(row![r.n, r.selected, r.average, r.target, r.residual]);
    }
    let meta = json!({
        "system": sys.to_string(), "condition": cspec.to_string(), "argmap": amap.to_string(),
        "checkpoints": cps, "P": p, "config": extra,
    });
    emit_table(cli, &t, meta)
}

pub fn run(cli: &Cli) -> Result<()> {
    let runner = Runner::new(cli.threads, cli.segment)?;
    info!("{} worker threads, segment {}", runner.threads(), runner.segment());
    match &cli.command {
        Command::Sieve { lo, n } => {
            let t = runner.tables(*lo, n + 1)?;
            let mut table = Table::new(&["n", "omega", "mobius", "liouville", "squarefree"]);
            for m in *lo..=*n {
                table.push(row![m, t.omega(m)?, t.mobius(m)? as i64, t.liouville(m)? as i64, t.is_squarefree(m)?]);
            }
            emit_table(cli, &table, json!({ "lo": lo, "N": n }))
        }
        Command::Rho { poly, k, primes } => {
            let f: powerfree_core::IntPolynomial = poly.parse().map_err(|e| LabError::Usage(format!("{e}")))?;
            let lr = LocalRoots::with_options(&f, RootOptions::fast());
            let mut table = Table::new(&["p", "rho_p", "rho_pk", "bad"]);
            for p in powerfree_core::arith::primes_up_to(*primes)? {
                table.push(row![p, lr.count_roots_mod_p(p)?, lr.rho(p, *k)?, lr.is_bad(p)]);
            }
            emit_table(cli, &table, json!({ "coeffs": f.to_string(), "k": k, "primes": primes }))
        }
        Command::Density { poly, k, p, constant } => {
            let (r, coeffs) = match (constant, poly) {
                (Some(Constant::Twin), _) => (twin_constant(*p)?, Value::from("twin")),
                (Some(Constant::Estermann), _) => (estermann_constant(*p)?, Value::from("estermann")),
                (Some(Constant::Legendre), _) => (bb_constant(*p)?, Value::from("legendre")),
                (None, Some(s)) => {
                    let fs = parse_factors(s)?;
                    let f = fs.iter().skip(1).fold(fs[0].clone(), |a, g| a.mul(g));
                    let c: Vec<Value> = f
                        .coeffs()
                        .iter()
                        .map(|c| i64::try_from(c).map_or_else(|_| Value::from(c.to_string()), Value::from))
                        .collect();
                    (density(&f, *k, *p)?, Value::from(c))
                }
                (None, None) => return Err(LabError::Usage("--poly or --constant is required".into())),
            };
            let doc = json!({
                "value": r.value, "lower": r.lower, "upper": r.upper, "P": r.p_bound,
                "bad_primes": r.bad_primes, "k": r.k, "coeffs": coeffs,
            });
            emit(cli.out.as_deref(), &json_bytes(&doc)?)
        }
        Command::Count { poly, k, checkpoints, p } => {
            let cps = checkpoints.clone();
            let n = *cps.last().ok_or_else(|| LabError::Usage("--checkpoints is required".into()))?;
            let fs = parse_factors(poly)?;
            let (mask, f) = if fs.len() == 1 {
                (runner.kfree_mask(&fs[0], *k, n)?, fs[0].clone())
            } else {
                let m = runner.product_mask(&fs, *k, n)?;
                let f = m.poly().clone();
                (m, f)
            };
            let d = density(&f, *k, *p)?;
            let rows = count_rows(mask.bits(), &cps, d.value)?;
            let mut table = Table::new(&["N", "count", "target", "abs_error", "rel_error"]);
            for r in &rows {
                table.push(row![r.n, r.count, r.target, r.abs_error, r.rel_error]);
            }
            let fit = if rows.len() >= 2 {
                Some(exponent_fit(&rows.iter().map(|r| (r.n as f64, r.abs_error)).collect::<Vec<_>>())?)
            } else {
                None
            };
            emit_table(
                cli,
                &table,
                json!({
                    "poly": poly, "k": k, "P": p, "density": d.value, "lower": d.lower, "upper": d.upper,
                    "error_exponent": fit.map(real),
                }),
            )
        }
        Command::Eftail { poly, k, checkpoints, delta, y } => {
            let f: powerfree_core::IntPolynomial = poly.parse().map_err(|e| LabError::Usage(format!("{e}")))?;
            let cps = checkpoints.clone();
            if cps.is_empty() {
                return Err(LabError::Usage("--checkpoints is required".into()));
            }
            let cfg = runner.kfree_config();
            let mut table = Table::new(&["N", "Y", "E_f"]);
            let mut pts = Vec::new();
            for &n in &cps {
                let yy = y.unwrap_or_else(|| (n as f64).powf(1.0 - delta));
                let t = e_f_tail(&f, *k, yy, n, &cfg)?;
                table.push(row![n, yy, t.value]);
                pts.push((n as f64, t.value as f64));
            }
            let fit = if pts.len() >= 2 { Some(exponent_fit(&pts)?) } else { None };
            emit_table(cli, &table, json!({ "poly": poly, "k": k, "delta": delta, "Y": y, "exponent": fit.map(real) }))
        }
        Command::Ergodic { system, condition, argmap, checkpoints, p } => {
            ergodic(cli, &runner, system, condition, argmap, &checkpoints.clone(), *p, Value::Null)
        }
        Command::Repro { id } => {
            let rep = repro::run(id, &runner)?;
            let dir = cli.out.clone().unwrap_or_else(|| PathBuf::from("."));
            let (csv, js) = rep.write(&dir)?;
            eprintln!(
                "{}: {} ({} and {})",
                rep.id,
                if rep.pass { "pass" } else { "FAIL" },
                csv.display(),
                js.display()
            );
            Ok(())
        }
        Command::Run { config } => run_config(cli, &runner, config),
    }
}

fn run_config(cli: &Cli, runner: &Runner, path: &Path) -> Result<()> {
    let cfg = ExperimentConfig::load(path)?;
    let sub = Cli {
        threads: cli.threads,
        segment: cli.segment,
        out: cfg.out.as_ref().map(PathBuf::from).or_else(|| cli.out.clone()),
        format: cli.format,
        command: Command::Run { config: path.to_path_buf() },
    };
    let meta = serde_json::to_value(&cfg)?;
    ergodic(&sub, runner, &cfg.system, &cfg.condition, &cfg.argmap, &cfg.effective_checkpoints(), cfg.p, meta)
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::fs;

    fn invoke(args: &[&str]) -> Result<()> {
        let cli = Cli::try_parse_from(std::iter::once("powerfree").chain(args.iter().copied()))
            .map_err(|e| LabError::Usage(e.to_string()))?;
        run(&cli)
    }

    fn invoke_to(dir: &Path, file: &str, args: &[&str]) -> String {
        let out = dir.join(file);
        let mut a = args.to_vec();
        let o = out.to_str().unwrap().to_owned();
        a.extend(["--out", &o]);
        invoke(&a).unwrap();
        fs::read_to_string(out).unwrap()
    }

    #[test]
    fn density_json() {
        let dir = tempfile::tempdir().unwrap();
        let text = invoke_to(dir.path(), "d.json", &["density", "--poly", "1,0,1", "--k", "2", "--P", "100000"]);
        let v: Value = serde_json::from_str(&text).unwrap();
        let value = v["value"].as_f64().unwrap();
        assert!((value - 0.8948).abs() < 1e-4);
        assert!(v["lower"].as_f64().unwrap() <= value && value <= v["upper"].as_f64().unwrap());
        assert_eq!(v["coeffs"], json!([1, 0, 1]));
    }

    #[test]
    fn rho_table() {
        let dir = tempfile::tempdir().unwrap();
        let text = invoke_to(dir.path(), "rho.csv", &["rho", "--poly", "1,0,1", "--k", "2", "--primes", "50"]);
        let twos: Vec<u64> = text
            .lines()
            .skip(1)
            .filter_map(|l| {
                let f: Vec<&str> = l.split(',').collect();
                (f[2] == "2").then(|| f[0].parse().unwrap())
            })
            .collect();
        assert_eq!(twos, [5, 13, 17, 29, 37, 41]);
        assert!(dir.path().join("rho.json").exists());
    }

    #[test]
    fn exit_codes() {
        let code = |a: &[&str]| invoke(a).unwrap_err().exit_code();
        assert_eq!(code(&["count", "--poly", "4,4", "--checkpoints", "100"]), 4);
        assert_eq!(code(&["count", "--poly", "1,2,1", "--checkpoints", "100"]), 4);
        assert_eq!(code(&["count", "--poly", "1,0,1"]), 2);
        assert_eq!(code(&["repro", "nope"]), 2);
        assert_eq!(code(&["count", "--poly", "1,0,1", "--checkpoints", "100000000000", "--segment", "1024"]), 3);
        let e = invoke(&["count", "--poly", "4,4", "--checkpoints", "100"]).unwrap_err();
        assert!(e.explain().contains("fixed k-th power divisor"));
    }

    #[test]
    fn repro_writes_files_and_is_repeatable() {
        let dir = tempfile::tempdir().unwrap();
        let d = dir.path().to_str().unwrap();
        invoke(&["repro", "cor12", "--out", d, "--threads", "1"]).unwrap();
        let csv1 = fs::read(dir.path().join("cor12.csv")).unwrap();
        let js1 = fs::read(dir.path().join("cor12.json")).unwrap();
        assert!(String::from_utf8_lossy(&csv1).lines().next().unwrap().contains("residual"));
        let meta: Value = serde_json::from_slice(&js1).unwrap();
        assert_eq!(meta["id"], "cor12");
        assert!(meta["tolerances"].is_object() && meta["hypotheses"].is_array());
        invoke(&["repro", "cor12", "--out", d, "--threads", "3"]).unwrap();
        assert_eq!(fs::read(dir.path().join("cor12.csv")).unwrap(), csv1);
        assert_eq!(fs::read(dir.path().join("cor12.json")).unwrap(), js1);
    }

    #[test]
    fn ergodic_over_mask_and_config() {
        let dir = tempfile::tempdir().unwrap();
        let mask = dir.path().join("mask.txt");
        fs::write(&mask, (1..=300).step_by(3).map(|n| format!("{n}\n")).collect::<String>()).unwrap();
        let cond = format!("mask:{}", mask.display());
        let text = invoke_to(
            dir.path(),
            "erg.csv",
            &["ergodic", "--system", "cyclic:3,0,g=1;0;0", "--condition", &cond, "--checkpoints", "300"],
        );
        let row: Vec<&str> = text.lines().nth(1).unwrap().split(',').collect();
        assert_eq!(row[1], "100");
        assert_eq!(row[3].parse::<f64>().unwrap(), 1.0 / 9.0);

        let cfg = dir.path().join("run.json");
        let csv = dir.path().join("out.csv");
        let doc = json!({
            "name": "liouville", "N": 1000, "checkpoints": [10, 1000],
            "system": "twopoint:1,-1,0", "condition": "all", "argmap": "id", "P": 100,
            "out": csv.to_str().unwrap(),
        });
        fs::write(&cfg, doc.to_string()).unwrap();
        invoke(&["run", "--config", cfg.to_str().unwrap()]).unwrap();
        let text = fs::read_to_string(&csv).unwrap();
        assert_eq!(text.lines().nth(1).unwrap(), "10,10,0,0,0");
        let meta: Value = serde_json::from_slice(&fs::read(csv.with_extension("json")).unwrap()).unwrap();
        assert_eq!(meta["config"]["name"], "liouville");
    }

    #[test]
    fn sieve_json_rows() {
        let dir = tempfile::tempdir().unwrap();
        let text = invoke_to(dir.path(), "s.json", &["sieve", "--N", "12", "--format", "json"]);
        let v: Value = serde_json::from_str(&text).unwrap();
        assert_eq!(v["rows"][11], json!(["12", "3", "0", "-1", "false"]));
    }
}
