//! Command line front end: `gradient`, `verify`, `membership`, `solve` and
//! `selftest`.
//!
//! Exit codes: 0 when every requested check passes, 1 when a tolerance
//! fails (the failing row is printed), 2 for usage and input errors.

use std::ffi::OsString;
use std::path::{Path, PathBuf};
use std::time::Instant;

use clap::{Args, Parser, Subcommand, ValueEnum};

use crate::csv::{Cell, Table};
use crate::error::{FracError, Result};
use crate::experiments::{run_scan, Check, Scan, ScanSpec};
use crate::field::{MatrixField, ScalarField, VectorField};
use crate::frf1;
use crate::membership::{expected_verdict, membership_scan, ExampleMap, Verdict};
use crate::minors::{cof, det};
use crate::ops::{Backend, FracOperator};
use crate::params::FracParams;
use crate::solve::{self, ProblemConfig, SolverOptions, Termination};

/// Environment variable overriding `--out`.
pub const OUT_ENV: &str = "FRACVAR_OUT";

/// Width of the band around the critical `sp` in which scans may abstain.
pub const TRANSITION_BAND: f64 = 0.1;

/// Residuals below this are treated as round-off and exempt from order checks.
const ROUNDOFF: f64 = 1e-12;

#[derive(Debug, Parser)]
#[command(name = "fracvar", version, about = "Riesz fractional gradient experiments")]
#[command(arg_required_else_help = true)]
struct Cli {
    #[command(flatten)]
    common: Common,
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Args)]
struct Common {
    /// Output directory (overridden by FRACVAR_OUT).
    #[arg(long, global = true, default_value = "fracvar-out")]
    out: PathBuf,
    /// Worker threads; defaults to the available cores.
    #[arg(long, global = true)]
    threads: Option<usize>,
}

#[derive(Debug, Args, Clone)]
struct Scale {
    /// Dimension.
    #[arg(long)]
    n: Option<usize>,
    /// Fractional orders, comma separated.
    #[arg(long, value_delimiter = ',')]
    s: Vec<f64>,
    /// Grid points per axis, comma separated and increasing.
    #[arg(long = "N", value_delimiter = ',')]
    points: Vec<usize>,
    /// Box half-width (at the first resolution for scans that grow the box).
    #[arg(long = "L")]
    extent: Option<f64>,
    #[arg(long, value_parser = parse_backend)]
    backend: Option<Backend>,
    /// Tolerance on the final residual.
    #[arg(long)]
    tol: Option<f64>,
}

fn parse_backend(s: &str) -> std::result::Result<Backend, String> {
    s.parse().map_err(|_| format!("expected `quad` or `spec`, got `{s}`"))
}

#[derive(Debug, Clone, Copy, ValueEnum)]
enum VerifyKind {
    Piola,
    Ibp,
    Product,
    DetIbp,
    DetRiesz,
    CrossBackend,
}

impl From<VerifyKind> for Check {
    fn from(k: VerifyKind) -> Self {
        match k {
            VerifyKind::Piola => Check::Piola,
            VerifyKind::Ibp => Check::Ibp,
            VerifyKind::Product => Check::Product,
            VerifyKind::DetIbp => Check::DetIbp,
            VerifyKind::DetRiesz => Check::DetRiesz,
            VerifyKind::CrossBackend => Check::CrossBackend,
        }
    }
}

#[derive(Debug, Clone, Copy, ValueEnum)]
enum OpKind {
    Grad,
    Div,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
enum ExampleKind {
    Fracture,
    Cavitation,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Apply D^s or div^s to a field file.
    Gradient {
        #[arg(long)]
        input: PathBuf,
        #[arg(long, value_enum, default_value = "grad")]
        op: OpKind,
        #[arg(long)]
        s: f64,
        #[arg(long, default_value_t = 2.0)]
        p: f64,
        #[arg(long, value_parser = parse_backend, default_value = "quad")]
        backend: Backend,
    },
    /// Residual scans under grid refinement.
    Verify {
        #[arg(value_enum)]
        check: VerifyKind,
        #[command(flatten)]
        scale: Scale,
        /// Minimum observed order between consecutive resolutions.
        #[arg(long, default_value_t = 1.0)]
        min_order: f64,
    },
    /// W^{s,p} threshold scans of the fracture and cavitation maps.
    Membership {
        #[arg(long, value_enum)]
        example: ExampleKind,
        #[command(flatten)]
        scale: Scale,
        /// Integrability exponents, comma separated.
        #[arg(long, value_delimiter = ',')]
        p: Vec<f64>,
    },
    /// Minimize a fractional energy described by a TOML file.
    Solve {
        #[arg(long)]
        config: PathBuf,
        #[arg(long, value_parser = parse_backend)]
        backend: Option<Backend>,
        /// Projected-gradient tolerance.
        #[arg(long)]
        tol: Option<f64>,
    },
    /// Run the invariant suite.
    Selftest {
        /// Coarse grids only.
        #[arg(long)]
        quick: bool,
    },
}

/// Outcome of a subcommand that ran to completion.
struct Outcome {
    /// Rendered rows that failed their tolerance.
    failures: Vec<String>,
}

impl Outcome {
    fn pass() -> Self {
        Self { failures: Vec::new() }
    }
}

/// Runs the tool and returns the process exit code.
pub fn run<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return e.exit_code();
        }
    };
    let out = std::env::var_os(OUT_ENV).map_or(cli.common.out.clone(), PathBuf::from);
    let mut pool = rayon::ThreadPoolBuilder::new();
    if let Some(t) = cli.common.threads {
        if t == 0 {
            eprintln!("error: --threads must be positive");
            return 2;
        }
        pool = pool.num_threads(t);
    }
    let pool = match pool.build() {
        Ok(p) => p,
        Err(e) => {
            eprintln!("error: {e}");
            return 2;
        }
    };
    match pool.install(|| dispatch(&cli.command, &out)) {
        Ok(o) if o.failures.is_empty() => 0,
        Ok(o) => {
            for f in &o.failures {
                eprintln!("tolerance failure: {f}");
            }
            1
        }
        Err(e) => {
            eprintln!("error: {e}");
            2
        }
    }
}

fn dispatch(cmd: &Command, out: &Path) -> Result<Outcome> {
    std::fs::create_dir_all(out)?;
    match cmd {
        Command::Gradient {
            input,
            op,
            s,
            p,
            backend,
        } => gradient(input, *op, *s, *p, *backend, out),
        Command::Verify { check, scale, min_order } => verify((*check).into(), scale, *min_order, out),
        Command::Membership { example, scale, p } => membership(*example, scale, p, out),
        Command::Solve { config, backend, tol } => solve_cmd(config, *backend, *tol, out),
        Command::Selftest { quick } => selftest(*quick, out),
    }
}

fn gradient(input: &Path, op: OpKind, s: f64, p: f64, backend: Backend, out: &Path) -> Result<Outcome> {
    let raw = frf1::load(input)?;
    let grid = raw.grid;
    let n = grid.n();
    let fop = FracOperator::new(FracParams::new(n, s, p)?, grid, backend)?;
    let name = match op {
        OpKind::Grad => "gradient.frf1",
        OpKind::Div => "divergence.frf1",
    };
    let path = out.join(name);
    match (op, raw.comps) {
        (OpKind::Grad, 1) => frf1::save(&path, &fop.ds_grad(&raw.into_field::<ScalarField>()?)?)?,
        (OpKind::Grad, c) if c == n => frf1::save(&path, &fop.ds_grad_vec(&raw.into_field::<VectorField>()?)?)?,
        (OpKind::Div, c) if c == n => frf1::save(&path, &fop.ds_div(&raw.into_field::<VectorField>()?)?)?,
        (OpKind::Div, c) if c == n * n => {
            frf1::save(&path, &fop.ds_div_matrix(&raw.into_field::<MatrixField>()?)?)?
        }
        (_, c) => {
            return Err(crate::error::invalid(
                "input",
                format!("a field with {c} components cannot be passed to this operator in n = {n}"),
            ))
        }
    }
    println!("wrote {}", path.display());
    Ok(Outcome::pass())
}

fn default_tol(check: Check, backend: Backend) -> f64 {
    match (check, backend) {
        (Check::Piola, Backend::Quadrature) => 5e-2,
        (Check::Piola, Backend::Spectral) => 1e-3,
        (Check::Ibp, _) => 1e-10,
        (Check::CrossBackend, _) => 1e-1,
        _ => 1e-2,
    }
}

fn scan_spec(check: Check, scale: &Scale) -> ScanSpec {
    let n = scale.n.unwrap_or(match check {
        Check::Piola | Check::DetIbp | Check::DetRiesz => 2,
        _ => 1,
    });
    let points = if scale.points.is_empty() {
        match check {
            Check::Product => vec![64, 128, 256],
            _ => vec![32, 64, 128],
        }
    } else {
        scale.points.clone()
    };
    ScanSpec {
        check,
        n,
        s_list: if scale.s.is_empty() { vec![0.5] } else { scale.s.clone() },
        points,
        extent: scale.extent.unwrap_or(if check == Check::CrossBackend { 6.0 } else { 4.0 }),
        backend: scale.backend.unwrap_or(Backend::Quadrature),
    }
}

/// Failing rows of a scan: orders below `min_order` (unless at round-off)
/// and final residuals above `tol`.
fn scan_failures(scan: &Scan, table: &Table, tol: f64, min_order: f64) -> Vec<String> {
    let mut bad = Vec::new();
    let mut idx = 0;
    for line in scan.lines() {
        for (k, r) in line.iter().enumerate() {
            let v = scan.primary(r);
            let order_bad = r.order.is_some_and(|o| !(o >= min_order)) && v > ROUNDOFF;
            let last_bad = k + 1 == line.len() && !(v <= tol);
            if order_bad || last_bad {
                bad.push(table.render_row(idx + k));
            }
        }
        idx += line.len();
    }
    bad
}

fn verify(check: Check, scale: &Scale, min_order: f64, out: &Path) -> Result<Outcome> {
    let spec = scan_spec(check, scale);
    let scan = run_scan(&spec)?;
    let table = scan.to_table();
    let path = out.join(format!("verify_{}.csv", check.name()));
    table.save(&path)?;
    print!("{table}");
    let tol = scale.tol.unwrap_or(default_tol(check, spec.backend));
    Ok(Outcome {
        failures: scan_failures(&scan, &table, tol, min_order),
    })
}

fn membership_table(kind: &ExampleMap, n: usize, rows: &[crate::membership::MembershipRow]) -> (Table, Vec<String>) {
    let mut t = Table::new(["kind", "n", "s", "p", "sp", "N", "seminorm", "ratio", "verdict", "expected"]);
    let mut bad = Vec::new();
    for r in rows {
        let expected = expected_verdict(kind, n, r.s, r.p, TRANSITION_BAND);
        let verdict_cell: Cell = r.verdict.map_or(Cell::Empty, |v| v.as_str().into());
        let expected_cell: Cell = match (r.verdict, expected) {
            (None, _) => Cell::Empty,
            (Some(_), None) => "band".into(),
            (Some(_), Some(e)) => e.as_str().into(),
        };
        t.push(vec![
            r.kind.into(),
            r.n.into(),
            r.s.into(),
            r.p.into(),
            (r.s * r.p).into(),
            r.points.into(),
            r.seminorm.into(),
            r.ratio.into(),
            verdict_cell,
            expected_cell,
        ]);
        if let (Some(v), Some(e)) = (r.verdict, expected) {
            if v != e && v != Verdict::Abstain {
                bad.push(t.render_row(t.rows().len() - 1));
            }
        }
    }
    (t, bad)
}

/// Default scan settings `(n, L, s, p, N)` of each example.
fn membership_defaults(kind: ExampleKind) -> (ExampleMap, usize, f64, Vec<f64>, Vec<f64>, Vec<usize>) {
    match kind {
        ExampleKind::Fracture => (
            ExampleMap::CubeFracture { side: 1.0 },
            1,
            2.0,
            vec![0.2, 0.3, 0.4, 0.6, 0.7, 0.8],
            vec![1.5, 2.0],
            vec![32, 64, 128, 256],
        ),
        ExampleKind::Cavitation => (
            ExampleMap::Cavitation {
                radius: 1.0,
                amplitude: 1.0,
            },
            2,
            2.0,
            vec![0.4, 0.5, 0.75, 0.9],
            vec![2.5, 3.0],
            vec![16, 32, 64, 128],
        ),
    }
}

fn membership(example: ExampleKind, scale: &Scale, p: &[f64], out: &Path) -> Result<Outcome> {
    let (kind, n0, l0, s0, p0, pts0) = membership_defaults(example);
    let n = scale.n.unwrap_or(n0);
    let s_list = if scale.s.is_empty() { s0 } else { scale.s.clone() };
    let p_list = if p.is_empty() { p0 } else { p.to_vec() };
    let points = if scale.points.is_empty() { pts0 } else { scale.points.clone() };
    let rows = membership_scan(&kind, n, scale.extent.unwrap_or(l0), &s_list, &p_list, &points)?;
    let (table, failures) = membership_table(&kind, n, &rows);
    table.save(&out.join(format!("membership_{}.csv", kind.name())))?;
    print!("{table}");
    Ok(Outcome { failures })
}

fn solve_cmd(config: &Path, backend: Option<Backend>, tol: Option<f64>, out: &Path) -> Result<Outcome> {
    let mut cfg = ProblemConfig::load(config)?;
    if let Some(b) = backend {
        cfg.problem = cfg.problem.with_backend(b)?;
    }
    let opts = SolverOptions {
        tol_g: tol.or(cfg.tol_g),
        max_iters: cfg.max_iters,
        ..SolverOptions::default()
    };
    let prob = &cfg.problem;
    let (u, report) = solve::minimize(prob, prob.complement(), opts)?;
    frf1::save(&out.join("minimizer.frf1"), &u)?;
    let json = serde_json::to_string_pretty(&report).map_err(|e| FracError::Format(e.to_string()))?;
    std::fs::write(out.join("solve_report.json"), json)?;
    println!(
        "{:?} after {} iterations: energy {:.10e}, gradient {:.3e}, el residual {:.3e}",
        report.termination,
        report.iterations,
        report.final_energy(),
        report.final_gradient(),
        report.el_residual
    );
    let mut failures = Vec::new();
    if report.termination != Termination::Converged {
        failures.push(format!("termination {:?}", report.termination));
    }
    if report.el_residual > 10.0 * report.tol_g {
        failures.push(format!("el residual {:e} > 10 tol_g = {:e}", report.el_residual, 10.0 * report.tol_g));
    }
    Ok(Outcome { failures })
}

/// One line of the self-test summary.
struct SelfCheck {
    name: String,
    value: f64,
    relation: &'static str,
    limit: f64,
    pass: bool,
}

fn selftest(quick: bool, out: &Path) -> Result<Outcome> {
    let start = Instant::now();
    let mut checks: Vec<SelfCheck> = Vec::new();
    let mut record = |name: String, value: f64, relation: &'static str, limit: f64| {
        let pass = match relation {
            "<=" => value <= limit,
            _ => value >= limit,
        };
        checks.push(SelfCheck {
            name,
            value,
            relation,
            limit,
            pass,
        })
    };

    let (coarse, mid, fine) = if quick { (16, 32, 64) } else { (32, 64, 128) };
    let scans = [
        (Check::Ibp, 1, Backend::Quadrature, vec![mid, fine]),
        (Check::Ibp, 2, Backend::Spectral, vec![mid]),
        (Check::Piola, 2, Backend::Quadrature, vec![coarse, mid, fine]),
        (Check::Piola, 2, Backend::Spectral, vec![coarse, mid, fine]),
        (Check::Product, 1, Backend::Quadrature, vec![2 * mid, 2 * fine]),
        (Check::DetIbp, 2, Backend::Quadrature, vec![mid, fine]),
        (Check::DetRiesz, 2, Backend::Quadrature, vec![mid, fine]),
        (Check::CrossBackend, 1, Backend::Quadrature, vec![mid, fine]),
    ];
    for (check, n, backend, points) in scans {
        let spec = ScanSpec {
            check,
            n,
            s_list: vec![0.5],
            points,
            extent: if check == Check::CrossBackend { 6.0 } else { 4.0 },
            backend,
        };
        let scan = run_scan(&spec)?;
        scan.to_table()
            .save(&out.join(format!("selftest_{}_{}_n{}.csv", check.name(), backend.name(), n)))?;
        let label = format!("{} {} n={}", check.name(), backend.name(), n);
        if check == Check::Ibp {
            let worst = scan.rows.iter().map(|r| scan.primary(r)).fold(0.0, f64::max);
            record(format!("{label} defect"), worst, "<=", 1e-10);
        } else {
            let last = scan.primary(scan.rows.last().expect("non-empty scan"));
            if last > ROUNDOFF {
                record(format!("{label} order"), scan.min_order().unwrap_or(f64::NAN), ">=", 1.0);
            }
        }
    }

    let kind = ExampleMap::CubeFracture { side: 1.0 };
    let pts = if quick { vec![32, 64, 128] } else { vec![32, 64, 128, 256] };
    let rows = membership_scan(&kind, 1, 2.0, &[0.3, 0.8], &[2.0], &pts)?;
    let (table, bad) = membership_table(&kind, 1, &rows);
    table.save(&out.join("selftest_membership_fracture.csv"))?;
    record("membership fracture misclassified".into(), bad.len() as f64, "<=", 0.0);

    let sample = [0.3, -1.2, 0.7, 2.0, 0.1, -0.4, 1.5, 0.9, -0.8];
    let mut worst = 0f64;
    for n in 1..=3 {
        let a = &sample[..n * n];
        let c = cof(n, a)?;
        let d = det(n, a)?;
        for i in 0..n {
            for j in 0..n {
                let s: f64 = (0..n).map(|k| a[i * n + k] * c[j * n + k]).sum();
                let target = if i == j { d } else { 0.0 };
                worst = worst.max((s - target).abs());
            }
        }
    }
    record("minors F cof(F)^T - det I".into(), worst, "<=", 1e-12);

    let solver_pts = if quick { 32 } else { 64 };
    let cfg = ProblemConfig::parse(&format!(
        "[frac]\nn = 1\ns = 0.5\n[grid]\nN = {solver_pts}\nL = 8\n[density]\nname = \"quadratic\"\n"
    ))?;
    let prob = &cfg.problem;
    let (_, rep) = solve::minimize(prob, prob.complement(), SolverOptions::default())?;
    let flag = |b: bool| if b { 1.0 } else { 0.0 };
    record("solver quadratic converged".into(), flag(rep.termination == Termination::Converged), ">=", 1.0);
    record("solver quadratic monotone".into(), flag(rep.is_monotone()), ">=", 1.0);
    record("solver quadratic el residual / tol_g".into(), rep.el_residual / rep.tol_g, "<=", 10.0);
    for (name, cfg_text) in [
        ("quadratic", "name = \"quadratic\"\n[complement]\nkind = \"dilation\"\nstretch = 0.3\n"),
        ("dirichlet", "name = \"dirichlet\"\n[complement]\nkind = \"dilation\"\nstretch = 0.3\n"),
        ("polyconvex", "name = \"polyconvex\"\n[complement]\nkind = \"dilation\"\nstretch = 0.3\n"),
    ] {
        let cfg = ProblemConfig::parse(&format!(
            "[frac]\nn = 2\ns = 0.5\np = 4\n[grid]\nN = 16\nL = 2\n[density]\n{cfg_text}"
        ))?;
        let u = solve::random_admissible(&cfg.problem, 0.2, 11)?;
        let gap = solve::gradient_check(&cfg.problem, &u, 20, 7)?;
        record(format!("energy gradient vs finite differences ({name})"), gap, "<=", 1e-5);
    }

    let mut table = Table::new(["check", "value", "relation", "limit", "status"]);
    for c in &checks {
        table.push(vec![
            c.name.clone().into(),
            c.value.into(),
            c.relation.into(),
            c.limit.into(),
            c.pass.into(),
        ]);
    }
    table.save(&out.join("selftest.csv"))?;
    print!("{table}");
    println!("selftest finished in {:.1} s", start.elapsed().as_secs_f64());
    let failures = (0..checks.len())
        .filter(|&i| !checks[i].pass)
        .map(|i| table.render_row(i))
        .collect();
    Ok(Outcome { failures })
}
