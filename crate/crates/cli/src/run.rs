use crate::cases::{family_member, q_grid_table, run_all, run_case, CaseResult, Context};
use crate::config::{parse_grid, parse_list, Command, Format, RunConfig};
use crate::table::{Cell, Table};
use anyhow::{bail, Context as _, Result};
use psh::compose::{general_boundedness, mobius_boundedness, BoundednessReport, EtaGrid, Symbol};
use psh::exhaustion::{by_name, Exhaustion};
use psh::expr::{parse_complex_list, Expr};
use psh::factor::{factorize, factors_in_space, h2_split, zeros_by_newton};
use psh::frame::ConformalFrame;
use psh::hardy::{
    classical_membership, dilation_approximation, membership, norm_boundary_with, norm_limit_with, HardyFunction,
    Outcome, Verdict,
};
use psh::measure::{lelong_jensen_with, ma_mass, BetaGrid, BoundaryDensity, TestFunction};
use psh::quad::CirclePoint;
use psh::Loc;
use serde::Serialize;
use serde_json::{json, Value};
use std::path::Path;

pub const EXIT_OK: i32 = 0;
pub const EXIT_ERROR: i32 = 1;
pub const EXIT_VERDICT: i32 = 2;

/// What a command produced, before rendering.
pub enum Artifact {
    Table(Table),
    Json(Value),
    Bundle(Vec<CaseResult>),
}

pub struct Produced {
    pub artifact: Artifact,
    /// Verdict checked against `--expect`, if the command yields one.
    pub verdict: Option<Outcome>,
    /// Reproduce: every case passed.
    pub all_pass: Option<bool>,
}

impl Produced {
    fn plain(artifact: Artifact) -> Self {
        Produced { artifact, verdict: None, all_pass: None }
    }
}

fn frame(cfg: &RunConfig) -> Result<ConformalFrame> {
    Ok(cfg.frame.parse::<ConformalFrame>()?)
}

fn exhaustion(cfg: &RunConfig) -> Result<Exhaustion> {
    let fr = frame(cfg)?;
    let name = cfg.exhaustion.trim();
    if name.ends_with(".json") {
        let text = std::fs::read_to_string(name).with_context(|| format!("cannot read exhaustion spec {name}"))?;
        let stem = Path::new(name).file_stem().and_then(|s| s.to_str()).unwrap_or("custom");
        return Ok(Exhaustion::from_json_spec(stem, fr, &text)?);
    }
    Ok(by_name(name, fr)?)
}

fn density(cfg: &RunConfig) -> Result<BoundaryDensity> {
    let u = exhaustion(cfg)?;
    Ok(BoundaryDensity::build_with(&u, BetaGrid { points: cfg.grid, ..Default::default() })?)
}

fn function(cfg: &RunConfig) -> Result<HardyFunction> {
    let Some(src) = &cfg.f else { bail!("--f is required for {:?}", cfg.command) };
    Ok(HardyFunction::on_frame(Expr::parse(src)?, frame(cfg)?)?)
}

fn opt_cell(r: psh::Result<f64>) -> (Cell, Option<String>) {
    match r {
        Ok(v) => (Cell::Num(v), None),
        Err(e) => (Cell::Text(String::new()), Some(e.to_string())),
    }
}

pub fn execute(cfg: &RunConfig) -> Result<Produced> {
    if !(cfg.p >= 1.0) {
        bail!("--p must be >= 1");
    }
    match cfg.command {
        Command::Beta => beta(cfg),
        Command::Mass => mass(cfg),
        Command::Norm => norm(cfg),
        Command::Membership => membership_cmd(cfg),
        Command::LjCheck => lj_check(cfg),
        Command::Factorize => factorize_cmd(cfg),
        Command::ComposeCheck => compose_check(cfg),
        Command::Approx => approx(cfg),
        Command::Reproduce => reproduce(cfg),
    }
}

fn beta(cfg: &RunConfig) -> Result<Produced> {
    let bd = density(cfg)?;
    let mut t = Table::new(&["t", "beta", "tag_distance"]);
    let n = cfg.grid;
    for k in 0..n {
        let s = std::f64::consts::TAU * (k as f64 + 0.5) / n as f64;
        let p = CirclePoint::at(s);
        let d = bd.tags.iter().map(|g| p.distance_to(&g.anchor)).fold(f64::INFINITY, f64::min);
        t.push(vec![s.into(), bd.beta_dt(s).into(), d.into()]);
    }
    Ok(Produced::plain(Artifact::Table(t)))
}

fn mass(cfg: &RunConfig) -> Result<Produced> {
    let u = exhaustion(cfg)?;
    let ma = ma_mass(&u)?;
    let mut t = Table::new(&["exhaustion", "ma", "raw_ma"]);
    t.push(vec![u.name.clone().into(), ma.into(), (std::f64::consts::TAU * ma).into()]);
    Ok(Produced::plain(Artifact::Table(t)))
}

fn norm(cfg: &RunConfig) -> Result<Produced> {
    let f = function(cfg)?;
    let bd = density(cfg)?;
    let v = membership(&f, cfg.p, &bd);
    let (nb, e1) = opt_cell(norm_boundary_with(&f, cfg.p, &bd, cfg.tol));
    let (nl, e2) = opt_cell(norm_limit_with(&f, cfg.p, &bd.u, &[], cfg.tol.max(1e-9)).map(|n| n.value));
    let gap = match (&nb, &nl) {
        (Cell::Num(a), Cell::Num(b)) => Cell::Num((a - b).abs() / a.abs().max(1e-300)),
        _ => Cell::Text(String::new()),
    };
    let notes: Vec<String> = [e1, e2].into_iter().flatten().collect();
    let mut t = Table::new(&["f", "p", "exhaustion", "membership", "norm_boundary", "norm_limit", "rel_gap", "notes"]);
    t.push(vec![
        f.name.clone().into(),
        cfg.p.into(),
        bd.u.name.clone().into(),
        v.outcome.to_string().into(),
        nb,
        nl,
        gap,
        notes.join("; ").into(),
    ]);
    Ok(Produced { artifact: Artifact::Table(t), verdict: Some(v.outcome), all_pass: None })
}

fn membership_cmd(cfg: &RunConfig) -> Result<Produced> {
    let bd = density(cfg)?;
    if let Some(src) = &cfg.f {
        let f = HardyFunction::on_frame(Expr::parse(src)?, frame(cfg)?)?;
        let c = classical_membership(&f, cfg.p);
        let m = membership(&f, cfg.p, &bd);
        let mut t = Table::new(&["f", "classical_verdict", "u_verdict", "exponent", "evidence"]);
        t.push(vec![
            f.name.clone().into(),
            c.outcome.to_string().into(),
            m.outcome.to_string().into(),
            m.exponent.map_or(Cell::Text(String::new()), Cell::Num),
            m.diagnostics.clone().into(),
        ]);
        return Ok(Produced { artifact: Artifact::Table(t), verdict: Some(m.outcome), all_pass: None });
    }
    if !frame(cfg)?.is_disc() {
        bail!("q-families are evaluated on the disc frame only");
    }
    family_member(&cfg.family, 0.1)?;
    let qs = parse_grid(&cfg.q_grid)?;
    let t = q_grid_table(&bd, &cfg.family, &qs, cfg.p)?;
    Ok(Produced::plain(Artifact::Table(t)))
}

fn test_function(name: &str) -> Result<(TestFunction, Option<fn(f64) -> f64>)> {
    Ok(match name {
        "abs2" => (TestFunction::new(|l: &Loc| l.z().norm_sqr(), |_| 4.0), Some(|r: f64| (2.0 * r).exp())),
        "one" => (TestFunction::constant(1.0), Some(|_| 1.0)),
        "harmonic" => (
            TestFunction::harmonic(|l: &Loc| {
                let z = l.z();
                2.0 + z.re + z.re * z.re - z.im * z.im
            }),
            Some(|_| 2.0),
        ),
        _ => bail!("unknown test function '{name}' (expected abs2, one or harmonic)"),
    })
}

fn lj_check(cfg: &RunConfig) -> Result<Produced> {
    let u = exhaustion(cfg)?;
    let (phi, exact) = test_function(&cfg.phi)?;
    let centred_green = u.green_pole().map_or(false, |w| w.norm() == 0.0) && u.frame.is_disc();
    let mut t = Table::new(&["r", "value", "exact", "rel_err"]);
    for r in parse_list(&cfg.r)? {
        let v = lelong_jensen_with(&u, r, &phi, cfg.tol.max(1e-12))?;
        match exact.filter(|_| centred_green) {
            Some(e) => {
                let x = e(r);
                t.push(vec![r.into(), v.into(), x.into(), ((v - x).abs() / x.abs()).into()]);
            }
            None => t.push(vec![r.into(), v.into(), "".into(), "".into()]),
        }
    }
    Ok(Produced::plain(Artifact::Table(t)))
}

fn verdict_json(v: &Verdict) -> Value {
    serde_json::to_value(v).unwrap()
}

fn factorize_cmd(cfg: &RunConfig) -> Result<Produced> {
    let f = function(cfg)?;
    let zeros = match &cfg.zeros {
        Some(z) if !z.trim().is_empty() => parse_complex_list(z)?,
        _ => zeros_by_newton(&f),
    };
    let bd = density(cfg)?;
    let fac = factorize(&f, &zeros)?;
    let verdicts = factors_in_space(&fac, cfg.p, &bd);
    let norm = |g: &HardyFunction, p: f64| norm_boundary_with(g, p, &bd, cfg.tol).ok();
    let split = h2_split(&f, cfg.p, &zeros).ok().map(|(g, h)| {
        json!({
            "norm_g_2": norm(&g, 2.0),
            "norm_h_2": norm(&h, 2.0),
            "g": verdict_json(&membership(&g, 2.0, &bd)),
            "h": verdict_json(&membership(&h, 2.0, &bd)),
        })
    });
    let zs: Vec<[f64; 2]> = zeros.iter().map(|z| [z.re, z.im]).collect();
    let all = verdicts.all_hold();
    let v = json!({
        "f": f.name,
        "p": cfg.p,
        "zeros": zs,
        "reconstruction_residual": fac.residual,
        "singular_sup": fac.singular_sup,
        "norms": {
            "f": norm(&f, cfg.p),
            "blaschke": norm(&fac.blaschke.as_hardy(), cfg.p),
            "singular": norm(&fac.singular, cfg.p),
            "outer": norm(&fac.outer, cfg.p),
        },
        "verdicts": {
            "blaschke": verdict_json(&verdicts.blaschke),
            "singular": verdict_json(&verdicts.singular),
            "outer": verdict_json(&verdicts.outer),
        },
        "h2_split": split,
    });
    let outcome = if all { Outcome::Holds } else { Outcome::Fails };
    Ok(Produced { artifact: Artifact::Json(v), verdict: Some(outcome), all_pass: None })
}

fn compose_check(cfg: &RunConfig) -> Result<Produced> {
    let s: Symbol = cfg.symbol.parse()?;
    if !frame(cfg)?.is_disc() {
        bail!("composition analysis runs on the disc frame only");
    }
    let bd = density(cfg)?;
    let r: BoundednessReport = match s {
        Symbol::Mobius { .. } => mobius_boundedness(&s, &bd, cfg.p)?,
        _ => general_boundedness(&s, &bd, cfg.p, &EtaGrid::default())?,
    };
    let outcome = r.verdict.outcome;
    Ok(Produced { artifact: Artifact::Json(serde_json::to_value(&r)?), verdict: Some(outcome), all_pass: None })
}

fn approx(cfg: &RunConfig) -> Result<Produced> {
    let f = function(cfg)?;
    let bd = density(cfg)?;
    let rhos = parse_list(&cfg.rho)?;
    if rhos.iter().any(|r| !(*r > 0.0 && *r < 1.0)) {
        bail!("dilation radii must lie in (0, 1)");
    }
    let nf = norm_boundary_with(&f, cfg.p, &bd, cfg.tol)?;
    let mut t = Table::new(&["rho", "gap", "rel_gap"]);
    for (rho, g) in dilation_approximation(&f, cfg.p, &bd, &rhos)? {
        t.push(vec![rho.into(), g.into(), (g / nf).into()]);
    }
    Ok(Produced::plain(Artifact::Table(t)))
}

fn reproduce(cfg: &RunConfig) -> Result<Produced> {
    let ctx = Context::new(cfg.grid);
    let results = if cfg.case == "all" { run_all(&ctx) } else { vec![run_case(&cfg.case, &ctx)?] };
    let all = results.iter().all(|r| r.pass);
    Ok(Produced { artifact: Artifact::Bundle(results), verdict: None, all_pass: Some(all) })
}

/// `--expect` vocabulary: a positive claim fails on `Fails`, a negative one on `Holds`.
pub fn expectation_met(expect: &str, got: Outcome) -> Result<bool> {
    Ok(match expect {
        "holds" | "bounded" | "member" => got == Outcome::Holds,
        "fails" | "unbounded" | "nonmember" => got == Outcome::Fails,
        _ => bail!("unknown --expect value '{expect}' (expected holds, bounded, member, fails, unbounded or nonmember)"),
    })
}

fn header_lines(cfg: &RunConfig) -> String {
    let mut h = format!("# psh {}\n# config: {}\n", env!("CARGO_PKG_VERSION"), cfg.header());
    if cfg.timestamp {
        let secs = std::time::SystemTime::now().duration_since(std::time::UNIX_EPOCH).map_or(0, |d| d.as_secs());
        h.push_str(&format!("# timestamp: {secs}\n"));
    }
    h
}

#[derive(Serialize)]
struct JsonDoc<'a, T: Serialize> {
    psh_version: &'a str,
    config: &'a RunConfig,
    #[serde(skip_serializing_if = "Option::is_none")]
    timestamp: Option<u64>,
    result: T,
}

pub fn json_document<T: Serialize>(cfg: &RunConfig, result: T) -> String {
    let timestamp = cfg
        .timestamp
        .then(|| std::time::SystemTime::now().duration_since(std::time::UNIX_EPOCH).map_or(0, |d| d.as_secs()));
    let doc = JsonDoc { psh_version: env!("CARGO_PKG_VERSION"), config: cfg, timestamp, result };
    serde_json::to_string_pretty(&doc).unwrap() + "\n"
}

fn summary_table(results: &[CaseResult]) -> Table {
    let mut t = Table::new(&["criterion", "case", "status", "summary"]);
    for r in results {
        t.push(vec![
            r.criterion.to_string().into(),
            r.id.clone().into(),
            if r.pass { "PASS" } else { "FAIL" }.into(),
            r.summary.clone().into(),
        ]);
    }
    t
}

/// Render the artifact; returns the text for stdout and writes files under `--out`.
pub fn render(cfg: &RunConfig, artifact: &Artifact) -> Result<String> {
    let write = |path: &Path, text: &str| -> Result<()> {
        if let Some(dir) = path.parent().filter(|d| !d.as_os_str().is_empty()) {
            std::fs::create_dir_all(dir)?;
        }
        std::fs::write(path, text).with_context(|| format!("cannot write {}", path.display()))
    };
    let body = match (artifact, cfg.format) {
        (Artifact::Table(t), Format::Csv) => header_lines(cfg) + &t.to_csv(),
        (Artifact::Table(t), Format::Json) => json_document(cfg, t),
        (Artifact::Json(v), _) => json_document(cfg, v),
        (Artifact::Bundle(results), Format::Json) => json_document(cfg, results),
        (Artifact::Bundle(results), Format::Csv) => {
            if let Some(dir) = &cfg.out {
                std::fs::create_dir_all(dir)?;
                for r in results {
                    let head = format!("# case: {} criterion {} {}\n# {}\n", r.id, r.criterion, if r.pass { "PASS" } else { "FAIL" }, r.summary);
                    write(&dir.join(format!("{}.csv", r.id)), &(header_lines(cfg) + &head + &r.table.to_csv()))?;
                }
                let summary = header_lines(cfg) + &summary_table(results).to_csv();
                write(&dir.join("summary.csv"), &summary)?;
                return Ok(summary_table(results).to_text());
            }
            let mut out = header_lines(cfg);
            for r in results {
                out.push_str(&format!("# case: {} criterion {} {}\n# {}\n", r.id, r.criterion, if r.pass { "PASS" } else { "FAIL" }, r.summary));
                out.push_str(&r.table.to_csv());
            }
            out.push_str("# summary\n");
            out.push_str(&summary_table(results).to_csv());
            out
        }
    };
    match &cfg.out {
        Some(path) => {
            write(path, &body)?;
            Ok(String::new())
        }
        None => Ok(body),
    }
}

/// Run a resolved config: returns the exit code and the text destined for stdout.
pub fn run_config(cfg: &RunConfig) -> Result<(i32, String)> {
    let out = execute(cfg)?;
    let text = render(cfg, &out.artifact)?;
    let mut code = EXIT_OK;
    if let Some(expect) = &cfg.expect {
        match out.verdict {
            Some(v) => {
                if !expectation_met(expect, v)? {
                    code = EXIT_VERDICT;
                }
            }
            None if out.all_pass.is_some() => {}
            None => bail!("--expect is not meaningful for {:?}", cfg.command),
        }
    }
    if out.all_pass == Some(false) {
        code = EXIT_VERDICT;
    }
    Ok((code, text))
}
