//! Batch runner behind the `renyi-epi` binary.
//!
//! A [`RunConfig`] names a command and a flat parameter map. Parameters come
//! from an optional JSON file and are overridden by command-line flags. Every
//! output starts with a JSON header holding the full config and the crate
//! version, so a result file can be reproduced on its own.
//!
//! Exit codes: 0 when every checked contract holds, 1 when one fails, 2 for
//! configuration errors.

use std::collections::BTreeMap;
use std::fmt;
use std::fs::File;
use std::io::{self, Write};
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use serde_json::{json, Value};

use crate::constants::{
    epi_constant, epi_exponent, exponent_threshold, ratio_diagnostics, verify_simplex_min,
    ConstantBundle,
};
use crate::convolve::clt_iterate;
use crate::coupling::{
    build_transfer, canonical_example, canonical_transfer, delta_max, entropy_gain, find_shift_set,
};
use crate::density::{
    make_gaussian, make_pareto_grid, make_two_block_with_step, make_uniform, pareto_grid_step,
    GridDensity,
};
use crate::entropy::{entropy_power, renyi_entropy, RenyiOrder};
use crate::epi::{counterexample_experiment, epi_check, modified_epi_check};
use crate::error::{Error, Result};
use crate::sconcave::{certify_s_concave, random_s_concave, CERT_TOL};

pub const VERSION: &str = env!("CARGO_PKG_VERSION");

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Command {
    Entropy,
    Clt,
    Counterexample,
    Constants,
    VerifyEpi,
    Coverzhang,
    Certify,
}

impl fmt::Display for Command {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let name = match self {
            Self::Entropy => "entropy",
            Self::Clt => "clt",
            Self::Counterexample => "counterexample",
            Self::Constants => "constants",
            Self::VerifyEpi => "verify-epi",
            Self::Coverzhang => "coverzhang",
            Self::Certify => "certify",
        };
        f.write_str(name)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunConfig {
    pub command: Command,
    pub params: BTreeMap<String, Value>,
    pub seed: u64,
    pub output: Option<PathBuf>,
}

impl RunConfig {
    pub fn new(command: Command) -> Self {
        Self {
            command,
            params: BTreeMap::new(),
            seed: 0,
            output: None,
        }
    }

    pub fn with(mut self, key: &str, value: impl Into<Value>) -> Self {
        self.params.insert(key.to_string(), value.into());
        self
    }
}

/// Contents of a `--config` file. Flags given on the command line win.
#[derive(Debug, Clone, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FileConfig {
    pub command: Option<Command>,
    #[serde(default)]
    pub params: BTreeMap<String, Value>,
    pub seed: Option<u64>,
    pub output: Option<PathBuf>,
}

pub fn load_config(path: &Path) -> Result<FileConfig> {
    Ok(serde_json::from_reader(File::open(path)?)?)
}

#[derive(Debug, Clone, Copy)]
enum Kind {
    Num,
    Int,
    List,
    Text,
}

fn as_int(v: &Value) -> Option<usize> {
    v.as_u64()
        .or_else(|| {
            v.as_f64()
                .filter(|x| x.fract() == 0.0 && *x >= 0.0)
                .map(|x| x as u64)
        })
        .map(|x| x as usize)
}

impl Kind {
    fn accepts(self, v: &Value) -> bool {
        match self {
            Self::Num => v.is_number(),
            Self::Int => as_int(v).is_some(),
            Self::List => match v {
                Value::Array(a) => !a.is_empty() && a.iter().all(Value::is_number),
                other => other.is_number(),
            },
            Self::Text => v.is_string(),
        }
    }

    fn describe(self) -> &'static str {
        match self {
            Self::Num => "a number",
            Self::Int => "a non-negative integer",
            Self::List => "a number or a non-empty list of numbers",
            Self::Text => "a string",
        }
    }
}

const DENSITY_KEYS: [(&str, Kind); 6] = [
    ("density", Kind::Text),
    ("h", Kind::Num),
    ("sigma2", Kind::Num),
    ("R", Kind::Num),
    ("p", Kind::Num),
    ("input", Kind::Text),
];

fn keys(cmd: Command) -> Vec<(&'static str, Kind)> {
    use Kind::*;
    let mut k = match cmd {
        Command::Entropy => vec![("r", List)],
        Command::Clt => vec![("r", List), ("k_max", Int), ("slack", Num)],
        Command::Counterexample => vec![
            ("r", Num),
            ("p", Num),
            ("n", Int),
            ("R", List),
            ("h", Num),
            ("slack", Num),
        ],
        Command::Constants => vec![
            ("s", Num),
            ("r", Num),
            ("d", Int),
            ("n", Int),
            ("samples", Int),
            ("grid_pts", Int),
        ],
        Command::VerifyEpi => vec![
            ("s", Num),
            ("r", Num),
            ("d", Int),
            ("n", Int),
            ("pairs", Int),
            ("h", Num),
        ],
        Command::Coverzhang => vec![("r", List)],
        Command::Certify => vec![("s", Num), ("tol", Num)],
    };
    if matches!(cmd, Command::Entropy | Command::Clt | Command::Certify) {
        k.extend(DENSITY_KEYS);
    }
    k
}

/// Lenient typed access; [`validate`] has already checked the types.
struct Params<'a>(&'a BTreeMap<String, Value>);

impl Params<'_> {
    fn num(&self, k: &str, default: f64) -> f64 {
        self.opt(k).unwrap_or(default)
    }

    fn opt(&self, k: &str) -> Option<f64> {
        self.0.get(k).and_then(Value::as_f64)
    }

    fn int(&self, k: &str, default: usize) -> usize {
        self.0.get(k).and_then(as_int).unwrap_or(default)
    }

    fn list(&self, k: &str, default: &[f64]) -> Vec<f64> {
        match self.0.get(k) {
            Some(Value::Array(a)) => a.iter().filter_map(Value::as_f64).collect(),
            Some(v) => v.as_f64().into_iter().collect(),
            None => default.to_vec(),
        }
    }

    fn text(&self, k: &str, default: &str) -> String {
        self.0
            .get(k)
            .and_then(Value::as_str)
            .unwrap_or(default)
            .to_string()
    }
}

fn default_density(cmd: Command) -> &'static str {
    match cmd {
        Command::Clt => "uniform",
        _ => "gaussian",
    }
}

fn check_finite_order(r: f64, v: &mut Vec<String>) {
    if r == 1.0 {
        v.push("r ≠ 1".into());
    } else if !(r > 0.0 && r.is_finite()) {
        v.push(format!("r = {r}: r must be positive"));
    }
}

/// Checks the s, r, d range of the s-concave inequalities.
fn check_s_r_d(s: f64, r: f64, d: usize, v: &mut Vec<String>) {
    if d == 0 {
        v.push("d must be positive".into());
        return;
    }
    let d = d as f64;
    if !(s > -1.0 / d) {
        v.push(format!("s = {s}: s > −1/d required"));
    }
    if s > 0.0 {
        v.push(format!("s = {s}: s ≤ 0 required"));
    }
    check_finite_order(r, v);
    if r != 1.0 && r > 0.0 {
        if !(r > -s * d) {
            v.push(format!("r = {r}: r must exceed −sd = {}", -s * d));
        }
        if r >= 1.0 {
            v.push(format!("r = {r}: r < 1 required"));
        }
    }
}

fn check_density(cfg: &RunConfig, v: &mut Vec<String>) {
    let p = Params(&cfg.params);
    let kind = p.text("density", default_density(cfg.command));
    let h = p.num("h", 1e-3);
    if !(h > 0.0 && h.is_finite()) {
        v.push(format!("h = {h}: grid step must be positive"));
    }
    match kind.as_str() {
        "uniform" | "two-block" => {}
        "gaussian" => {
            if !(p.num("sigma2", 1.0) > 0.0) {
                v.push("sigma2 must be positive".into());
            }
        }
        "pareto" => {
            let pp = p.num("p", 3.5);
            if !(pp > 3.0) {
                v.push(format!("p = {pp}: p > 3 required"));
            }
            if !(p.num("R", 100.0) > 1.0) {
                v.push("R must exceed 1".into());
            }
        }
        "file" => {
            if !cfg.params.contains_key("input") {
                v.push("density 'file' needs an input path".into());
            }
        }
        other => v.push(format!(
            "density '{other}' unknown: use uniform, gaussian, two-block, pareto or file"
        )),
    }
}

/// Every violated precondition of `cfg`, as a readable message.
pub fn validate(cfg: &RunConfig) -> Vec<String> {
    let mut v = Vec::new();
    let allowed = keys(cfg.command);
    for (k, val) in &cfg.params {
        match allowed.iter().find(|(name, _)| name == k) {
            None => v.push(format!("unknown parameter '{k}' for {}", cfg.command)),
            Some((_, kind)) if !kind.accepts(val) => {
                v.push(format!("parameter '{k}' must be {}", kind.describe()))
            }
            _ => {}
        }
    }
    if !v.is_empty() {
        return v;
    }
    let p = Params(&cfg.params);
    match cfg.command {
        Command::Entropy => {
            for r in p.list("r", &[0.5, 1.0, 2.0]) {
                if !(r >= 0.0) {
                    v.push(format!("r = {r}: r must be non-negative"));
                }
            }
            check_density(cfg, &mut v);
        }
        Command::Clt => {
            for r in p.list("r", &[0.5, 1.0]) {
                if !(r > 0.0) {
                    v.push(format!("r = {r}: r must be positive"));
                }
            }
            if p.int("k_max", 6) > crate::convolve::MAX_DOUBLINGS {
                v.push(format!(
                    "k_max ≤ {} required",
                    crate::convolve::MAX_DOUBLINGS
                ));
            }
            check_density(cfg, &mut v);
        }
        Command::Counterexample => {
            let r = p.num("r", 0.25);
            check_finite_order(r, &mut v);
            if r >= 1.0 / 3.0 {
                v.push(format!("r = {r}: r ≥ 1/3 unsupported"));
            }
            let pp = p.num("p", 3.5);
            if !(pp > 3.0 && pp <= 1.0 / r) {
                v.push(format!("p = {pp}: p must lie in (3, 1/r]"));
            }
            let n = p.int("n", 64);
            if !n.is_power_of_two() || n > 1 << crate::convolve::MAX_DOUBLINGS {
                v.push(format!("n = {n}: n must be a power of two up to 256"));
            }
            if p.list("R", &[10.0])
                .iter()
                .any(|&x| !(x > 1.0 && x.is_finite()))
            {
                v.push("every R must exceed 1".into());
            }
            if let Some(h) = p.opt("h") {
                if !(h > 0.0) {
                    v.push(format!("h = {h}: grid step must be positive"));
                }
            }
        }
        Command::Constants => {
            check_s_r_d(p.num("s", -0.1), p.num("r", 0.5), p.int("d", 1), &mut v);
            if p.int("n", 2) < 2 {
                v.push("n ≥ 2 required".into());
            }
            let samples = p.int("samples", 0);
            if samples > 0 && samples < 1000 {
                v.push(format!("samples = {samples}: use 0 or at least 1000"));
            }
            if (1..3).contains(&p.int("grid_pts", 0)) {
                v.push("grid_pts must be 0 or at least 3".into());
            }
        }
        Command::VerifyEpi => {
            let d = p.int("d", 1);
            check_s_r_d(p.num("s", -0.1), p.num("r", 0.5), d, &mut v);
            if d != 1 {
                v.push("d = 1 required for grid densities".into());
            }
            if !(2..=4).contains(&p.int("n", 2)) {
                v.push("n must lie in 2..=4".into());
            }
            if p.int("pairs", 20) == 0 {
                v.push("pairs must be positive".into());
            }
            if !(p.num("h", 0.01) > 0.0) {
                v.push("h must be positive".into());
            }
        }
        Command::Coverzhang => {
            for r in p.list("r", &[0.7, 2.0]) {
                if !(r > 0.0) {
                    v.push(format!("r = {r}: r must be positive"));
                }
            }
        }
        Command::Certify => {
            if !p.num("s", 0.0).is_finite() {
                v.push("s must be finite".into());
            }
            if !(p.num("tol", CERT_TOL) >= 0.0) {
                v.push("tol must be non-negative".into());
            }
            check_density(cfg, &mut v);
        }
    }
    v
}

/// Results of one command: a CSV table, JSON reports, and the contract verdict.
#[derive(Debug, Clone, PartialEq)]
pub struct Outcome {
    pub columns: Vec<&'static str>,
    pub rows: Vec<Vec<String>>,
    pub reports: Vec<Value>,
    pub pass: bool,
}

impl Outcome {
    fn new(columns: &[&'static str]) -> Self {
        Self {
            columns: columns.to_vec(),
            rows: Vec::new(),
            reports: Vec::new(),
            pass: true,
        }
    }

    fn row(&mut self, cells: impl IntoIterator<Item = String>) {
        self.rows.push(cells.into_iter().collect());
    }
}

fn build_density(cfg: &RunConfig) -> Result<GridDensity> {
    let p = Params(&cfg.params);
    let h = p.num("h", 1e-3);
    match p.text("density", default_density(cfg.command)).as_str() {
        "uniform" => make_uniform(-3f64.sqrt(), 3f64.sqrt(), h),
        "gaussian" => make_gaussian(p.num("sigma2", 1.0), h, 12.0),
        "two-block" => make_two_block_with_step(h),
        "pareto" => {
            let radius = p.num("R", 100.0);
            let step = p.opt("h").unwrap_or_else(|| pareto_grid_step(radius));
            Ok(make_pareto_grid(radius, p.num("p", 3.5), step)?.1)
        }
        _ => GridDensity::read_csv(File::open(p.text("input", ""))?),
    }
}

fn s(x: f64) -> String {
    x.to_string()
}

fn to_json<T: Serialize>(x: &T) -> Result<Value> {
    Ok(serde_json::to_value(x)?)
}

/// Runs a validated configuration.
pub fn execute(cfg: &RunConfig) -> Result<Outcome> {
    let p = Params(&cfg.params);
    match cfg.command {
        Command::Entropy => {
            let f = build_density(cfg)?;
            let mut out = Outcome::new(&["order", "h_r", "N_r"]);
            for r in p.list("r", &[0.5, 1.0, 2.0]) {
                let h = renyi_entropy(&f, RenyiOrder::new(r)?)?;
                out.row([s(r), s(h), s(entropy_power(h, 1))]);
            }
            Ok(out)
        }
        Command::Clt => {
            let f = build_density(cfg)?.centered();
            let orders = p
                .list("r", &[0.5, 1.0])
                .into_iter()
                .map(RenyiOrder::new)
                .collect::<Result<Vec<_>>>()?;
            let trace = clt_iterate(&f, p.int("k_max", 6), &orders)?;
            let slack = p.num("slack", 1e-3);
            let mut out = Outcome::new(&["n", "order", "h_r", "reference", "gap", "variance"]);
            for e in &trace.entries {
                for (j, o) in orders.iter().enumerate() {
                    let gap = (e.entropies[j] - trace.reference[j]).abs();
                    out.row([
                        e.n.to_string(),
                        o.to_string(),
                        s(e.entropies[j]),
                        s(trace.reference[j]),
                        s(gap),
                        s(e.variance),
                    ]);
                }
            }
            for j in 0..orders.len() {
                let gaps = trace.gaps(j);
                // the n = 1 entry is the base density itself
                out.pass &= gaps[1..].windows(2).all(|w| w[1] <= w[0] + slack);
            }
            Ok(out)
        }
        Command::Counterexample => {
            let radii = p.list("R", &[10.0]);
            let table = counterexample_experiment(
                p.num("r", 0.25),
                p.num("p", 3.5),
                &radii,
                p.int("n", 64),
                p.opt("h"),
            )?;
            let mut out = Outcome::new(&["R", "sigma2_R", "N_r_X1", "N_r_Zn", "cr_bound", "h"]);
            for row in &table.rows {
                out.row(
                    [
                        row.radius,
                        row.sigma2_r,
                        row.n_r_x1,
                        row.n_r_zn,
                        row.cr_bound,
                        row.h,
                    ]
                    .map(s),
                );
            }
            out.pass = table.is_decreasing(p.num("slack", 1e-3));
            out.reports.push(json!({
                "d_star": table.d_star,
                "sigma2_inf": table.sigma2_inf,
                "zn_bound": table.zn_bound,
                "decreasing": out.pass,
            }));
            Ok(out)
        }
        Command::Constants => {
            let (sv, r, d, n) = (
                p.num("s", -0.1),
                p.num("r", 0.5),
                p.int("d", 1),
                p.int("n", 2),
            );
            let bundle = ConstantBundle::compute(sv, r, d, n)?;
            let mut out = Outcome::new(&["s", "r", "d", "n", "c", "log_c", "big_c", "r0", "alpha"]);
            out.row([
                s(sv),
                s(r),
                d.to_string(),
                n.to_string(),
                s(bundle.c),
                s(bundle.log_c),
                s(bundle.big_c),
                s(bundle.r0),
                bundle.alpha.map(s).unwrap_or_default(),
            ]);
            out.reports.push(to_json(&bundle)?);
            let samples = p.int("samples", 0);
            if samples > 0 {
                let rep = verify_simplex_min(sv, r, d, n, samples, cfg.seed)?;
                out.pass &= rep.holds();
                out.reports.push(to_json(&rep)?);
            }
            let grid_pts = p.int("grid_pts", 0);
            if grid_pts > 0 {
                let diag = ratio_diagnostics(sv, r, d, grid_pts)?;
                out.pass &= diag.contracts_hold.unwrap_or(true);
                out.reports.push(to_json(&diag)?);
            }
            Ok(out)
        }
        Command::VerifyEpi => {
            let (sv, r, n) = (p.num("s", -0.1), p.num("r", 0.5), p.int("n", 2));
            let h = p.num("h", 0.01);
            let order = RenyiOrder::finite(r)?;
            let c = epi_constant(sv, r, 1, n)?;
            let alpha = if n == 2 && sv < 0.0 && r > exponent_threshold(sv, 1)? {
                Some(epi_exponent(sv, r, 1)?)
            } else {
                None
            };
            let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
            let mut out = Outcome::new(&[
                "trial", "ratio", "c", "epi_pass", "alpha", "mod_lhs", "mod_rhs", "mod_pass",
            ]);
            for trial in 0..p.int("pairs", 20) {
                let fs = (0..n)
                    .map(|_| random_s_concave(sv, h, &mut rng))
                    .collect::<Result<Vec<_>>>()?;
                for f in &fs {
                    if !certify_s_concave(f, sv, CERT_TOL)?.is_certified() {
                        return Err(Error::NotCertified(format!("trial {trial} density")));
                    }
                }
                let rep = epi_check(&fs, order, c)?;
                out.pass &= rep.pass;
                let mut cells = vec![trial.to_string(), s(rep.ratio), s(c), rep.pass.to_string()];
                match alpha {
                    Some(a) => {
                        let (lhs, rhs) = modified_epi_check(&fs[0], &fs[1], order, a)?;
                        let ok = lhs >= rhs * (1.0 - crate::epi::EPI_REL_TOL);
                        out.pass &= ok;
                        cells.extend([s(a), s(lhs), s(rhs), ok.to_string()]);
                    }
                    None => cells.extend(["", "", "", ""].map(String::from)),
                }
                out.row(cells);
            }
            Ok(out)
        }
        Command::Coverzhang => {
            let (ln2, ln43) = (2f64.ln(), (4.0f64 / 3.0).ln());
            let mut out = Outcome::new(&["r", "h_sum", "h_diag", "expected_sum", "expected_diag"]);
            for r in p.list("r", &[0.7, 2.0]) {
                let (h_sum, h_diag) = canonical_example(r)?;
                out.pass &= (h_sum - ln2).abs() < 1e-4 && (h_diag - ln43).abs() < 1e-4;
                out.row([s(r), s(h_sum), s(h_diag), s(ln2), s(ln43)]);
            }
            let (t, _) = canonical_transfer()?;
            out.reports.push(to_json(&t.summary())?);
            Ok(out)
        }
        Command::Certify => {
            let f = build_density(cfg)?;
            let sv = p.num("s", 0.0);
            let rep = certify_s_concave(&f, sv, p.num("tol", CERT_TOL))?;
            let mut out = Outcome::new(&[
                "s",
                "verdict",
                "worst_margin",
                "x0",
                "lambda_cells",
                "delta",
                "gain",
            ]);
            let mut cells = vec![
                s(sv),
                format!("{:?}", rep.verdict).to_lowercase(),
                s(rep.worst_margin),
            ];
            out.pass = rep.is_certified();
            out.reports.push(to_json(&rep)?);
            let r = sv + 1.0;
            let set = if r > 0.0 && r != 1.0 {
                find_shift_set(&f, r)?
            } else {
                None
            };
            match set {
                Some(set) => {
                    let dmax = delta_max(&f, &set, r);
                    let (t, mix) = build_transfer(&f, set.x0, &set.mask, dmax / 4.0)?;
                    let gain = entropy_gain(&f, &mix.fhat, RenyiOrder::new(r)?)?;
                    cells.extend([s(set.x0), set.cells().to_string(), s(t.delta), s(gain)]);
                    out.reports.push(json!({
                        "transfer": t.summary(),
                        "delta_max": dmax,
                        "margin_total": set.margin_total,
                        "entropy_gain": gain,
                    }));
                }
                None => cells.extend(["", "", "", ""].map(String::from)),
            }
            out.row(cells);
            Ok(out)
        }
    }
}

fn header(cfg: &RunConfig) -> Value {
    json!({ "config": cfg, "version": VERSION })
}

/// CSV text: a `# {header}` line, the column names, then the rows.
pub fn render_csv(cfg: &RunConfig, out: &Outcome) -> Result<String> {
    let mut buf = format!("# {}\n", header(cfg)).into_bytes();
    {
        let mut wtr = csv::Writer::from_writer(&mut buf);
        wtr.write_record(&out.columns)?;
        for row in &out.rows {
            wtr.write_record(row)?;
        }
        wtr.flush()?;
    }
    Ok(String::from_utf8(buf).expect("csv output is UTF-8"))
}

/// JSON-lines text: the header object, then one line per report.
pub fn render_jsonl(cfg: &RunConfig, out: &Outcome) -> String {
    let mut text = format!("{}\n", header(cfg));
    for rep in &out.reports {
        text.push_str(&format!("{rep}\n"));
    }
    text
}

fn emit(cfg: &RunConfig, out: &Outcome) -> Result<()> {
    let csv_text = render_csv(cfg, out)?;
    let jsonl = render_jsonl(cfg, out);
    match &cfg.output {
        Some(path) => {
            std::fs::write(path, csv_text)?;
            if !out.reports.is_empty() {
                std::fs::write(path.with_extension("jsonl"), jsonl)?;
            }
        }
        None => {
            let mut stdout = io::stdout().lock();
            stdout.write_all(csv_text.as_bytes())?;
            if !out.reports.is_empty() {
                stdout.write_all(jsonl.as_bytes())?;
            }
        }
    }
    Ok(())
}

/// Validates, executes and writes outputs; returns the process exit code.
pub fn run(cfg: &RunConfig) -> i32 {
    let problems = validate(cfg);
    if !problems.is_empty() {
        for msg in problems {
            eprintln!("error: {msg}");
        }
        return 2;
    }
    match execute(cfg).and_then(|out| emit(cfg, &out).map(|_| out.pass)) {
        Ok(true) => 0,
        Ok(false) => {
            eprintln!("contract violated; see output");
            1
        }
        Err(e) => {
            eprintln!("error: {e}");
            2
        }
    }
}

#[derive(Parser, Debug)]
#[command(
    name = "renyi-epi",
    version,
    about = "Rényi entropy and entropy power inequality experiments"
)]
struct Cli {
    #[command(subcommand)]
    command: Sub,
}

#[derive(Subcommand, Debug)]
enum Sub {
    /// Rényi entropies of one density. CSV columns: order,h_r,N_r
    Entropy(Flags),
    /// Entropies along CLT doublings. CSV columns: n,order,h_r,reference,gap,variance
    Clt(Flags),
    /// Heavy-tailed EPI experiment. CSV columns: R,sigma2_R,N_r_X1,N_r_Zn,cr_bound,h
    Counterexample(Flags),
    /// Closed-form constants. CSV columns: s,r,d,n,c,log_c,big_c,r0,alpha
    Constants(Flags),
    /// EPI checks on random s-concave densities.
    /// CSV columns: trial,ratio,c,epi_pass,alpha,mod_lhs,mod_rhs,mod_pass
    VerifyEpi(Flags),
    /// Two-block transfer example. CSV columns: r,h_sum,h_diag,expected_sum,expected_diag
    Coverzhang(Flags),
    /// s-concavity certificate and transfer search.
    /// CSV columns: s,verdict,worst_margin,x0,lambda_cells,delta,gain
    Certify(Flags),
}

#[derive(Args, Debug)]
struct Flags {
    #[arg(long, allow_negative_numbers = true)]
    s: Option<f64>,
    /// One order or a comma-separated list
    #[arg(long, value_delimiter = ',', allow_negative_numbers = true)]
    r: Vec<f64>,
    #[arg(long)]
    d: Option<usize>,
    #[arg(long)]
    n: Option<usize>,
    #[arg(long)]
    p: Option<f64>,
    /// Truncation radius or comma-separated radii
    #[arg(long = "R", value_delimiter = ',')]
    radii: Vec<f64>,
    /// Grid step
    #[arg(long)]
    h: Option<f64>,
    #[arg(long)]
    k_max: Option<usize>,
    #[arg(long)]
    pairs: Option<usize>,
    #[arg(long)]
    samples: Option<usize>,
    #[arg(long)]
    grid_pts: Option<usize>,
    #[arg(long)]
    sigma2: Option<f64>,
    /// uniform, gaussian, two-block, pareto or file
    #[arg(long)]
    density: Option<String>,
    /// CSV with columns x,value for --density file
    #[arg(long)]
    input: Option<String>,
    #[arg(long)]
    tol: Option<f64>,
    #[arg(long)]
    slack: Option<f64>,
    #[arg(long)]
    output: Option<PathBuf>,
    #[arg(long)]
    seed: Option<u64>,
    /// JSON file with command, params, seed, output
    #[arg(long)]
    config: Option<PathBuf>,
}

impl Flags {
    fn params(&self) -> BTreeMap<String, Value> {
        let mut m = BTreeMap::new();
        let mut put = |k: &str, v: Option<Value>| {
            if let Some(v) = v {
                m.insert(k.to_string(), v);
            }
        };
        let list = |v: &[f64]| match v {
            [] => None,
            [x] => Some(json!(x)),
            xs => Some(json!(xs)),
        };
        put("s", self.s.map(Value::from));
        put("r", list(&self.r));
        put("d", self.d.map(Value::from));
        put("n", self.n.map(Value::from));
        put("p", self.p.map(Value::from));
        put("R", list(&self.radii));
        put("h", self.h.map(Value::from));
        put("k_max", self.k_max.map(Value::from));
        put("pairs", self.pairs.map(Value::from));
        put("samples", self.samples.map(Value::from));
        put("grid_pts", self.grid_pts.map(Value::from));
        put("sigma2", self.sigma2.map(Value::from));
        put("density", self.density.clone().map(Value::from));
        put("input", self.input.clone().map(Value::from));
        put("tol", self.tol.map(Value::from));
        put("slack", self.slack.map(Value::from));
        m
    }
}

/// Builds a [`RunConfig`] from the file (if any) and the flags.
fn assemble(command: Command, flags: &Flags) -> std::result::Result<RunConfig, String> {
    let file = match &flags.config {
        Some(path) => {
            load_config(path).map_err(|e| format!("config file {}: {e}", path.display()))?
        }
        None => FileConfig::default(),
    };
    if let Some(c) = file.command {
        if c != command {
            return Err(format!("config file is for '{c}', not '{command}'"));
        }
    }
    let mut params = file.params;
    params.extend(flags.params());
    Ok(RunConfig {
        command,
        params,
        seed: flags.seed.or(file.seed).unwrap_or(0),
        output: flags.output.clone().or(file.output),
    })
}

/// Entry point shared by the binary and the tests.
pub fn main_with_args<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return e.exit_code();
        }
    };
    let (command, flags) = match &cli.command {
        Sub::Entropy(f) => (Command::Entropy, f),
        Sub::Clt(f) => (Command::Clt, f),
        Sub::Counterexample(f) => (Command::Counterexample, f),
        Sub::Constants(f) => (Command::Constants, f),
        Sub::VerifyEpi(f) => (Command::VerifyEpi, f),
        Sub::Coverzhang(f) => (Command::Coverzhang, f),
        Sub::Certify(f) => (Command::Certify, f),
    };
    match assemble(command, flags) {
        Ok(cfg) => run(&cfg),
        Err(msg) => {
            eprintln!("error: {msg}");
            2
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn validation_messages() {
        let cfg = RunConfig::new(Command::Constants)
            .with("s", -2.0)
            .with("d", 1);
        assert!(validate(&cfg)
            .iter()
            .any(|m| m.contains("s > −1/d required")));
        let cfg = RunConfig::new(Command::Constants).with("r", 1.0);
        assert!(validate(&cfg).iter().any(|m| m.contains("r ≠ 1")));
        let cfg = RunConfig::new(Command::Constants)
            .with("s", -0.4)
            .with("r", 0.2);
        assert!(validate(&cfg)
            .iter()
            .any(|m| m.contains("r must exceed −sd")));
        let cfg = RunConfig::new(Command::Counterexample).with("r", 0.4);
        assert!(validate(&cfg)
            .iter()
            .any(|m| m.contains("r ≥ 1/3 unsupported")));
        let cfg = RunConfig::new(Command::Constants)
            .with("s", -0.1)
            .with("r", 0.5)
            .with("d", 1)
            .with("n", 2);
        assert!(validate(&cfg).is_empty());
        let cfg = RunConfig::new(Command::Coverzhang).with("bogus", 1);
        assert_eq!(validate(&cfg).len(), 1);
        let cfg = RunConfig::new(Command::Constants).with("d", 1.5);
        assert!(validate(&cfg)[0].contains("non-negative integer"));
    }

    #[test]
    fn flags_become_params() {
        let cli = Cli::try_parse_from([
            "renyi-epi",
            "constants",
            "--s",
            "-0.1",
            "--r",
            "0.5",
            "--R",
            "10,100",
        ])
        .unwrap();
        let Sub::Constants(flags) = cli.command else {
            panic!()
        };
        let p = flags.params();
        assert_eq!(p["s"], json!(-0.1));
        assert_eq!(p["r"], json!(0.5));
        assert_eq!(p["R"], json!([10.0, 100.0]));
    }

    #[test]
    fn csv_has_header_line() {
        let cfg = RunConfig::new(Command::Coverzhang).with("r", 2.0);
        let out = execute(&cfg).unwrap();
        assert!(out.pass);
        let text = render_csv(&cfg, &out).unwrap();
        let first = text.lines().next().unwrap();
        let head: Value = serde_json::from_str(first.trim_start_matches("# ")).unwrap();
        assert_eq!(head["version"], VERSION);
        assert_eq!(head["config"]["command"], "coverzhang");
        assert_eq!(
            text.lines().nth(1).unwrap(),
            "r,h_sum,h_diag,expected_sum,expected_diag"
        );
    }
}
