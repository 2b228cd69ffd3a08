use std::fs;
use std::io::Write as _;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand};

use utm::config::parse_config;
use utm::{QuadSettings, UtmError};
use utm_cli::checks::{run_criterion, suite, CRITERIA};
use utm_cli::commands::{converge_csv, eval_csv, field_svg, run_scenario, scenario, special_csv};
use utm_cli::{exit, exit_code};

#[derive(Parser)]
#[command(name = "utm", version, about = "Half-line IBVP solutions by the unified transform method")]
struct Cli {
    #[command(subcommand)]
    cmd: Cmd,
}

#[derive(Subcommand)]
enum Cmd {
    /// Evaluate a configured problem on its grid and write CSV.
    Eval {
        #[arg(long)]
        config: PathBuf,
        /// CSV path; overrides outputs.csv, default stdout.
        #[arg(long)]
        out: Option<PathBuf>,
        #[arg(long)]
        dry_run: bool,
    },
    /// Run a built-in figure scenario.
    Scenario {
        name: String,
        /// Output directory for <name>.csv (and <name>.svg); default stdout.
        #[arg(long)]
        out: Option<PathBuf>,
        /// Switch-off time of g_0 for airy2-discdata.
        #[arg(long, default_value_t = 0.25)]
        t1: f64,
        #[arg(long)]
        svg: bool,
        #[arg(long)]
        dry_run: bool,
    },
    /// Evaluate I_{ω,m,j} at the points of a file.
    Special {
        #[arg(long, allow_hyphen_values = true)]
        omega: String,
        #[arg(long, allow_hyphen_values = true)]
        m: i32,
        /// 1-based component index, `sum`, or `C`.
        #[arg(long)]
        component: String,
        #[arg(long)]
        points: PathBuf,
        #[arg(long, default_value_t = 1e-10)]
        tol: f64,
    },
    /// Run an acceptance suite (anchors, oracles, rates, weakform, all) or one criterion by number.
    Verify {
        suite: String,
        /// Report CSV path; default stdout.
        #[arg(long)]
        report: Option<PathBuf>,
    },
    /// Re-evaluate a configured grid at tightening tolerances.
    Converge {
        #[arg(long)]
        config: PathBuf,
    },
}

fn fail(e: &UtmError) -> i32 {
    eprintln!("error: {e}");
    exit_code(e)
}

fn read(path: &Path) -> Result<String, i32> {
    fs::read_to_string(path).map_err(|e| {
        eprintln!("error: cannot read {}: {e}", path.display());
        exit::USAGE
    })
}

fn write(path: Option<&Path>, text: &str) -> Result<(), i32> {
    match path {
        Some(p) => fs::write(p, text).map_err(|e| {
            eprintln!("error: cannot write {}: {e}", p.display());
            exit::USAGE
        }),
        None => {
            // A closed pipe downstream is not an error.
            let _ = std::io::stdout().lock().write_all(text.as_bytes());
            Ok(())
        }
    }
}

fn run(cli: Cli) -> Result<i32, i32> {
    match cli.cmd {
        Cmd::Eval { config, out, dry_run } => {
            let cfg = parse_config(&read(&config)?).map_err(|e| fail(&e))?;
            if dry_run {
                write(None, &(serde_json::to_string_pretty(&cfg.config).unwrap_or_default() + "\n"))?;
                return Ok(exit::OK);
            }
            let (csv, failed) = eval_csv(&cfg).map_err(|e| fail(&e))?;
            let path = out.or(cfg.config.outputs.csv.as_ref().map(PathBuf::from));
            write(path.as_deref(), &csv)?;
            if let Some(svg) = &cfg.config.outputs.svg {
                let values = csv_values(&csv);
                write(Some(Path::new(svg)), &field_svg(&cfg.xs, &cfg.ts, &values, "Re q"))?;
            }
            if failed > 0 {
                eprintln!("error: {failed} points failed");
                return Ok(exit::NUMERICAL);
            }
            Ok(exit::OK)
        }
        Cmd::Scenario { name, out, t1, svg, dry_run } => {
            let sc = scenario(&name, t1).map_err(|e| fail(&e))?;
            if dry_run {
                write(None, &(serde_json::to_string_pretty(&sc).unwrap_or_default() + "\n"))?;
                return Ok(exit::OK);
            }
            let (csv, values, failed) = run_scenario(&sc, &QuadSettings::default()).map_err(|e| fail(&e))?;
            match &out {
                Some(dir) => {
                    fs::create_dir_all(dir).map_err(|e| {
                        eprintln!("error: cannot create {}: {e}", dir.display());
                        exit::USAGE
                    })?;
                    write(Some(&dir.join(format!("{name}.csv"))), &csv)?;
                    if svg {
                        write(Some(&dir.join(format!("{name}.svg"))), &field_svg(&sc.xs, &sc.ts, &values, sc.description))?;
                    }
                }
                None => write(None, &csv)?,
            }
            Ok(if failed > 0 { exit::NUMERICAL } else { exit::OK })
        }
        Cmd::Special { omega, m, component, points, tol } => {
            let src = read(&points)?;
            let (csv, failed) = special_csv(&omega, m, &component, &src, &QuadSettings::with_tol(tol)).map_err(|e| fail(&e))?;
            write(None, &csv)?;
            Ok(if failed > 0 { exit::NUMERICAL } else { exit::OK })
        }
        Cmd::Verify { suite: name, report } => {
            let Some(ids) = suite(name.trim()) else {
                eprintln!("error: unknown suite '{name}'; valid: anchors, oracles, rates, weakform, all, 1-15");
                return Err(exit::USAGE);
            };
            let mut text = String::from("check,expected,actual,tol,pass\n");
            let mut all = true;
            for id in ids {
                let rows = run_criterion(id);
                let ok = rows.iter().all(|r| r.pass);
                all &= ok;
                let label = CRITERIA.iter().find(|c| c.0 == id).map(|c| c.1).unwrap_or("");
                eprintln!("criterion {id:2} {label}: {}", if ok { "pass" } else { "FAIL" });
                for r in rows {
                    text.push_str(&r.csv_row());
                    text.push('\n');
                }
            }
            write(report.as_deref(), &text)?;
            Ok(if all { exit::OK } else { exit::VERIFY_FAILED })
        }
        Cmd::Converge { config } => {
            let cfg = parse_config(&read(&config)?).map_err(|e| fail(&e))?;
            let csv = converge_csv(&cfg).map_err(|e| fail(&e))?;
            write(None, &csv)?;
            Ok(exit::OK)
        }
    }
}

fn csv_values(csv: &str) -> Vec<utm::C64> {
    csv.lines()
        .skip(1)
        .filter(|l| !l.starts_with('#'))
        .map(|l| {
            let f: Vec<&str> = l.split(',').collect();
            let p = |i: usize| f.get(i).and_then(|s| s.parse().ok()).unwrap_or(f64::NAN);
            utm::C64::new(p(2), p(3))
        })
        .collect()
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let code = match run(cli) {
        Ok(c) | Err(c) => c,
    };
    ExitCode::from(code as u8)
}
