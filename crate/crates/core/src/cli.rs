//! Command-line front end. Every subcommand produces a JSON payload (or a
//! text rendering of one); failures become `{"error": ..., "kind": ...}`
//! with exit code 1, and malformed invocations exit with code 2.

use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde_json::{json, Value};

use crate::encoder::{
    encode_product_r1, encode_variety, samples_from_json, verify_isomorphism, EncodingCertificate, TargetVariety,
};
use crate::error::{Error, Result};
use crate::euler::{curve_invariants, invariants_table};
use crate::game::{Game, StrategyProfile};
use crate::linmap::{base_locus_check, image_dimension};
use crate::m2::export_macaulay2;
use crate::poly::Rational;
use crate::solver::{
    degree_witness3, fiber_sample3, jacobian_agreement, jacobian_spot_check, linear_grid, nash_count3,
    totally_mixed_nash3, EquilibriumPoint, Tolerance,
};
use crate::spohn::{ci_system, nash_polynomial};

#[derive(Debug, Parser)]
#[command(name = "spohnci", version, about = "Spohn CI curves of binary games")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
enum TableFormat {
    Json,
    Csv,
    Markdown,
}

#[derive(Debug, Args)]
struct TolArgs {
    /// Relative residual threshold.
    #[arg(long, default_value_t = 1e-9)]
    eps: f64,
    /// Newton iterations used to polish roots.
    #[arg(long, default_value_t = 50)]
    newton_iters: usize,
}

impl TolArgs {
    fn tolerance(&self) -> Result<Tolerance> {
        Tolerance::new(self.eps, self.newton_iters)
    }
}

/// `a:b:steps` with rational endpoints.
#[derive(Debug, Clone)]
struct Grid {
    from: Rational,
    to: Rational,
    steps: usize,
}

fn parse_grid(text: &str) -> std::result::Result<Grid, String> {
    let parts: Vec<&str> = text.split(':').collect();
    let [a, b, k] = parts[..] else {
        return Err(format!("expected a:b:steps, got {text:?}"));
    };
    let from = crate::parse_rational(a).map_err(|e| e.to_string())?;
    let to = crate::parse_rational(b).map_err(|e| e.to_string())?;
    let steps = k.parse::<usize>().map_err(|e| format!("bad step count {k:?}: {e}"))?;
    Ok(Grid { from, to, steps })
}

#[derive(Debug, Subcommand)]
enum Command {
    /// CI polynomials F_i and Nash polynomials G_i of a game.
    Equations {
        game: PathBuf,
        /// Restrict to the chart where every second coordinate is 1.
        #[arg(long)]
        dehomogenize: bool,
    },
    /// Degree, genus and Euler characteristic of the generic curve.
    Invariants {
        #[arg(long, value_parser = clap::value_parser!(u64).range(2..=4096))]
        n: u64,
    },
    /// Invariants for n = 2..=max-n.
    Table {
        #[arg(long, default_value_t = 9, value_parser = clap::value_parser!(u64).range(2..=4096))]
        max_n: u64,
        #[arg(long, value_enum, default_value_t = TableFormat::Json)]
        format: TableFormat,
    },
    /// Ranks of the payoff-to-divisor maps.
    Rank {
        #[arg(long, value_parser = clap::value_parser!(u64).range(3..=16))]
        n: u64,
    },
    /// Check the base loci of the two edge-player linear systems.
    BaseLocus {
        #[arg(long, value_parser = clap::value_parser!(u64).range(3..=16))]
        n: u64,
    },
    /// Encode a target variety (or a game, via the product construction).
    Encode {
        input: PathBuf,
        /// Where to write the encoded game.
        #[arg(short = 'o', long = "output")]
        output: Option<PathBuf>,
        /// Where to write the encoding certificate.
        #[arg(long)]
        certificate: Option<PathBuf>,
    },
    /// Transport sample points of a target through an encoding.
    Verify {
        target: PathBuf,
        game: PathBuf,
        certificate: PathBuf,
        #[arg(long)]
        samples: PathBuf,
    },
    /// Totally mixed Nash equilibria of a three-player game.
    Nash {
        game: PathBuf,
        #[command(flatten)]
        tol: TolArgs,
    },
    /// Sample the curve of a three-player game fiber by fiber.
    Sample {
        game: PathBuf,
        #[arg(long, value_parser = parse_grid, default_value = "1/4:4:16")]
        grid: Grid,
        #[arg(long)]
        csv: Option<PathBuf>,
        #[command(flatten)]
        tol: TolArgs,
    },
    /// Degree of the curve from a random hyperplane section.
    DegreeWitness {
        game: PathBuf,
        #[arg(long, default_value_t = 1)]
        seed: u64,
    },
    /// Jacobian ranks at sampled curve points.
    Jacobian {
        game: PathBuf,
        #[arg(long, value_parser = parse_grid, default_value = "1/4:4:16")]
        grid: Grid,
        #[command(flatten)]
        tol: TolArgs,
    },
    /// Macaulay2 script for the curve.
    ExportM2 {
        game: PathBuf,
        #[arg(short = 'o', long = "output")]
        output: Option<PathBuf>,
    },
}

impl Command {
    fn name(&self) -> &'static str {
        match self {
            Command::Equations { .. } => "equations",
            Command::Invariants { .. } => "invariants",
            Command::Table { .. } => "table",
            Command::Rank { .. } => "rank",
            Command::BaseLocus { .. } => "base-locus",
            Command::Encode { .. } => "encode",
            Command::Verify { .. } => "verify",
            Command::Nash { .. } => "nash",
            Command::Sample { .. } => "sample",
            Command::DegreeWitness { .. } => "degree-witness",
            Command::Jacobian { .. } => "jacobian",
            Command::ExportM2 { .. } => "export-m2",
        }
    }
}

/// Outcome of one invocation: the structured payload, its rendering and
/// the process exit code.
#[derive(Clone, Debug, PartialEq)]
pub struct CommandResult {
    pub command: String,
    pub payload: Value,
    pub exit_code: i32,
    pub output: String,
}

impl CommandResult {
    pub fn is_error(&self) -> bool {
        self.payload.get("error").is_some()
    }
}

/// Run a subcommand given its arguments (without the program name).
pub fn run_command<I, S>(args: I) -> CommandResult
where
    I: IntoIterator<Item = S>,
    S: Into<String>,
{
    let argv: Vec<String> = std::iter::once("spohnci".to_string()).chain(args.into_iter().map(Into::into)).collect();
    let cli = match Cli::try_parse_from(&argv) {
        Ok(cli) => cli,
        Err(e) => {
            use clap::error::ErrorKind;
            let text = e.render().to_string();
            if matches!(e.kind(), ErrorKind::DisplayHelp | ErrorKind::DisplayVersion) {
                return CommandResult { command: "help".into(), payload: json!({"help": text}), exit_code: 0, output: text };
            }
            let payload = json!({"error": text.trim_end(), "kind": "Usage"});
            return CommandResult {
                command: argv.get(1).cloned().unwrap_or_default(),
                output: pretty(&payload),
                payload,
                exit_code: 2,
            };
        }
    };
    let name = cli.command.name().to_string();
    match dispatch(cli.command) {
        Ok((payload, text)) => CommandResult {
            command: name,
            output: text.unwrap_or_else(|| pretty(&payload)),
            payload,
            exit_code: 0,
        },
        Err(e) => {
            let payload = json!({"error": e.to_string(), "kind": e.kind(), "command": name});
            CommandResult { command: name, output: pretty(&payload), payload, exit_code: 1 }
        }
    }
}

/// Cap rayon's worker count from `SPOHNCI_THREADS`, if set.
pub fn configure_threads() {
    if let Some(k) = std::env::var("SPOHNCI_THREADS").ok().and_then(|v| v.trim().parse::<usize>().ok()) {
        if k > 0 {
            let _ = rayon::ThreadPoolBuilder::new().num_threads(k).build_global();
        }
    }
}

fn pretty(v: &Value) -> String {
    serde_json::to_string_pretty(v).expect("JSON values serialise")
}

fn read_json(path: &Path) -> Result<Value> {
    let text = fs::read_to_string(path)
        .map_err(|e| Error::Io(std::io::Error::new(e.kind(), format!("{}: {e}", path.display()))))?;
    Ok(serde_json::from_str(&text)?)
}

fn read_game(path: &Path) -> Result<Game> {
    Game::from_json(&read_json(path)?)
}

fn write_text(path: &Path, text: &str) -> Result<()> {
    fs::write(path, text).map_err(|e| Error::Io(std::io::Error::new(e.kind(), format!("{}: {e}", path.display()))))
}

fn points_json(points: &[EquilibriumPoint]) -> Value {
    serde_json::to_value(points).expect("points serialise")
}

fn grid_values(g: &Grid) -> Result<Vec<Rational>> {
    if g.steps == 0 {
        return Err(Error::Precondition("a grid needs at least one step".into()));
    }
    Ok(linear_grid(&g.from, &g.to, g.steps))
}

type Rendered = (Value, Option<String>);

fn dispatch(cmd: Command) -> Result<Rendered> {
    match cmd {
        Command::Equations { game, dehomogenize } => equations(&read_game(&game)?, dehomogenize),
        Command::Invariants { n } => {
            let inv = curve_invariants(n as usize);
            let mut v = serde_json::to_value(&inv)?;
            v["canonicalDegree"] = json!(big(&(inv.genus.clone() * 2 - 2)));
            Ok((v, None))
        }
        Command::Table { max_n, format } => table(max_n as usize, format),
        Command::Rank { n } => Ok((serde_json::to_value(image_dimension(n as usize)?)?, None)),
        Command::BaseLocus { n } => {
            let n = n as usize;
            let reports = [base_locus_check(n, n - 1)?, base_locus_check(n, n)?];
            if let Some(bad) = reports.iter().find(|r| !r.passed()) {
                return Err(Error::Assertion(format!("base locus check failed for player {}", bad.player)));
            }
            Ok((json!({"n": n, "passed": true, "reports": reports.iter().map(|r| r.to_json()).collect::<Vec<_>>()}), None))
        }
        Command::Encode { input, output, certificate } => encode(&read_json(&input)?, output, certificate),
        Command::Verify { target, game, certificate, samples } => {
            let target = TargetVariety::from_json(&read_json(&target)?)?;
            let game = read_game(&game)?;
            let cert = EncodingCertificate::from_json(&read_json(&certificate)?)?;
            let samples = samples_from_json(&read_json(&samples)?)?;
            let report = verify_isomorphism(&target, &game, &cert, &samples)?;
            Ok((serde_json::to_value(report)?, None))
        }
        Command::Nash { game, tol } => {
            let game = read_game(&game)?;
            let tol = tol.tolerance()?;
            let count = nash_count3(&game, &tol)?;
            let points = totally_mixed_nash3(&game, &tol)?;
            Ok((json!({"count": count, "points": points_json(&points)}), None))
        }
        Command::Sample { game, grid, csv, tol } => {
            let game = read_game(&game)?;
            let sample = fiber_sample3(&game, &grid_values(&grid)?, &tol.tolerance()?)?;
            if let Some(path) = csv {
                write_text(&path, &sample_csv(&sample.points))?;
            }
            Ok((serde_json::to_value(&sample)?, None))
        }
        Command::DegreeWitness { game, seed } => {
            Ok((serde_json::to_value(degree_witness3(&read_game(&game)?, seed)?)?, None))
        }
        Command::Jacobian { game, grid, tol } => {
            let game = read_game(&game)?;
            let tol = tol.tolerance()?;
            let sample = fiber_sample3(&game, &grid_values(&grid)?, &tol)?;
            let report = jacobian_spot_check(&game, &sample.points, &tol)?;
            let mut worst: f64 = 0.0;
            for (p, r) in sample.points.iter().zip(&report.records) {
                if r.included {
                    worst = worst.max(jacobian_agreement(&game, p, 1e-7)?);
                }
            }
            let mut v = serde_json::to_value(report)?;
            v["finiteDifferenceGap"] = json!(worst);
            Ok((v, None))
        }
        Command::ExportM2 { game, output } => {
            let script = export_macaulay2(&read_game(&game)?)?;
            match output {
                Some(path) => {
                    write_text(&path, &script)?;
                    Ok((json!({"written": path.display().to_string()}), None))
                }
                None => Ok((json!({"script": script}), Some(script))),
            }
        }
    }
}

fn big(v: &num_bigint::BigInt) -> Value {
    use num_traits::ToPrimitive;
    match v.to_i64() {
        Some(x) => json!(x),
        None => json!(v.to_string()),
    }
}

fn equations(game: &Game, dehomogenize: bool) -> Result<Rendered> {
    let system = ci_system(game);
    let render = |p: &crate::poly::MultiPoly| if dehomogenize { p.dehomogenize().to_string() } else { p.to_string() };
    let f: Vec<String> = system.polys.iter().map(render).collect();
    let g: Vec<String> = (1..=game.players())
        .map(|i| nash_polynomial(game, i).map(|p| render(&p)))
        .collect::<Result<_>>()?;
    Ok((
        json!({
            "players": game.players(),
            "dehomogenized": dehomogenize,
            "F": f,
            "G": g,
            "zeroPlayers": system.zero_players,
        }),
        None,
    ))
}

fn table(max_n: usize, format: TableFormat) -> Result<Rendered> {
    let rows = invariants_table(max_n);
    let payload = serde_json::to_value(&rows)?;
    let text = match format {
        TableFormat::Json => None,
        TableFormat::Csv => {
            let mut s = String::from("n,genus,degree\n");
            for r in &rows {
                writeln!(s, "{},{},{}", r.n, r.genus, r.degree).unwrap();
            }
            Some(s)
        }
        TableFormat::Markdown => {
            let mut s = String::from("| n | genus | degree |\n|---|---|---|\n");
            for r in &rows {
                writeln!(s, "| {} | {} | {} |", r.n, r.genus, r.degree).unwrap();
            }
            Some(s)
        }
    };
    Ok((payload, text))
}

fn encode(input: &Value, output: Option<PathBuf>, certificate: Option<PathBuf>) -> Result<Rendered> {
    let (game, cert) = if input.get("vars").is_some() {
        encode_variety(&TargetVariety::from_json(input)?)?
    } else {
        encode_product_r1(&Game::from_json(input)?)?
    };
    let mut payload = json!({
        "kind": cert.kind,
        "players": game.players(),
        "dictionary": cert.dictionary().into_iter().map(|(a, b)| json!([a, b])).collect::<Vec<_>>(),
        "slots": serde_json::to_value(&cert.slots)?,
    });
    match output {
        Some(path) => {
            write_text(&path, &pretty(&game.to_json()))?;
            payload["gameFile"] = json!(path.display().to_string());
        }
        None => payload["game"] = game.to_json(),
    }
    match certificate {
        Some(path) => {
            write_text(&path, &pretty(&cert.to_json()))?;
            payload["certificateFile"] = json!(path.display().to_string());
        }
        None => payload["certificate"] = cert.to_json(),
    }
    Ok((payload, None))
}

/// One row per point: `t`, the four taus, the `p` entries, both residuals
/// and the three flags.
pub fn sample_csv(points: &[EquilibriumPoint]) -> String {
    let n = points.first().map(EquilibriumPoint::players).unwrap_or(3);
    let mut header = vec!["t".to_string(), "t11".into(), "t12".into(), "t21".into(), "t22".into()];
    header.extend(StrategyProfile::all(n).map(|p| format!("p{}", p.label())));
    header.extend(["spohn_residual", "segre_residual", "on_spohn", "on_segre", "in_simplex"].map(String::from));
    let mut s = header.join(",");
    s.push('\n');
    for pt in points {
        let mut row: Vec<String> = pt.sigma.iter().map(|x| x.to_string()).collect();
        row.extend(pt.tau.iter().map(|x| x.to_string()));
        row.extend(pt.p.iter().map(|x| x.to_string()));
        row.push(pt.residuals.spohn.to_string());
        row.push(pt.residuals.segre.to_string());
        row.extend([pt.flags.on_spohn, pt.flags.on_segre, pt.flags.in_simplex].map(|b| b.to_string()));
        s.push_str(&row.join(","));
        s.push('\n');
    }
    s
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn table_csv() {
        let r = run_command(["table", "--max-n", "9", "--format", "csv"]);
        assert_eq!(r.exit_code, 0);
        let lines: Vec<&str> = r.output.lines().collect();
        assert_eq!(lines.len(), 9);
        assert_eq!(lines[0], "n,genus,degree");
        assert_eq!(*lines.last().unwrap(), "9,1494879,478670");
    }

    #[test]
    fn invariants_json() {
        let r = run_command(["invariants", "--n", "3"]);
        assert_eq!(r.exit_code, 0);
        assert_eq!(r.payload["degree"], json!(8));
        assert_eq!(r.payload["genus"], json!(3));
        assert_eq!(r.payload["canonicalDegree"], json!(4));
    }

    #[test]
    fn usage_errors_exit_two() {
        let r = run_command(["table", "--bogus"]);
        assert_eq!(r.exit_code, 2);
        assert!(r.is_error());
        assert_eq!(run_command(["frobnicate"]).exit_code, 2);
        assert_eq!(run_command(["sample", "g.json", "--grid", "1:2"]).exit_code, 2);
    }

    #[test]
    fn domain_errors_are_json() {
        let r = run_command(["nash", "/nonexistent/game.json"]);
        assert_eq!(r.exit_code, 1);
        let v: Value = serde_json::from_str(&r.output).unwrap();
        assert_eq!(v["kind"], json!("Io"));
        assert!(v["error"].is_string());
    }

    #[test]
    fn markdown_table() {
        let r = run_command(["table", "--max-n", "3", "--format", "markdown"]);
        assert_eq!(r.output, "| n | genus | degree |\n|---|---|---|\n| 2 | 1 | 4 |\n| 3 | 3 | 8 |\n");
    }
}
