//! `uomkit`: verify, build, classify and evaluate formal orthogonal matrices.
//!
//! Matrix arguments are catalog names, files (text or JSON), `-` for stdin,
//! or inline text such as `"ab, aB, Ab"`. Exit codes: 0 success, 1 a
//! verification failed, 2 bad input, 3 budget exhausted.

use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::io::Read as _;
use std::path::Path;
use std::process::ExitCode;

use anyhow::{anyhow, bail, Context, Result};
use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::Serialize;
use serde_json::{json, Value};
use uomkit::budget::Budget;
use uomkit::catalog::{catalog_get, catalog_list, catalog_names, check_entry, self_test, CatalogItem};
use uomkit::constructions::{
    compose, compose_disjoint, descend_classes, double, double_renamed, genshift, klein_four, lift_extension,
    maximality_status, perm_family, theta_reference, CosetSide, FamilyKind, Perm,
};
use uomkit::numeric::{pyramid_upb, qudit_pptes_report, secondary_pptes_report, ProjectorReport, Tolerances, Verdict};
use uomkit::{
    are_equivalent, canonical_form, decomposition_probe, enumerate_orthogonal_rows, enumerate_uom_classes,
    find_extension_row, is_uom, max_mutually_orthogonal, parse_matrix, stats, uom_diagnostics, FormalMatrix, Var,
};

#[derive(Parser)]
#[command(name = "uomkit", version, about = "Formal orthogonal matrices and unextendible product bases")]
struct Cli {
    #[command(flatten)]
    global: Global,
    #[command(subcommand)]
    command: Command,
}

#[derive(Args)]
struct Global {
    /// Print the report as JSON.
    #[arg(long, global = true)]
    json: bool,
    /// Seed for generic evaluations.
    #[arg(long, global = true, default_value_t = 0)]
    seed: u64,
    /// Time limit in seconds for searches.
    #[arg(long, global = true)]
    budget: Option<f64>,
    /// Numeric tolerance: `key=value` sets one threshold, a bare number sets all.
    #[arg(long, global = true, value_name = "KEY=VALUE")]
    tol: Vec<String>,
}

#[derive(Subcommand)]
enum Command {
    /// Orthogonality, UOM verdict, statistics, diagnostics and decomposition.
    Verify { matrix: String },
    /// An extension row, or every orthogonal row with `--all`.
    Extend {
        matrix: String,
        #[arg(long)]
        all: bool,
    },
    /// Decide equivalence and print a witness.
    Equiv { first: String, second: String },
    /// Canonical representative of the equivalence class.
    Canon { matrix: String },
    /// Count UOM classes of size m x n.
    Classes { m: usize, n: usize },
    #[command(subcommand)]
    Construct(Construct),
    #[command(subcommand)]
    Order(Order),
    /// Projector onto the complement of a UOM minus some rows.
    Pptes {
        /// A UOM, or `pyramid`.
        input: String,
        /// Rows to drop, 1-based.
        #[arg(long, value_delimiter = ',')]
        drop: Vec<usize>,
        /// Drop every single row in turn and collect the entangled (rank, s) pairs.
        #[arg(long, conflicts_with = "drop")]
        sweep: bool,
    },
    #[command(subcommand)]
    Catalog(CatalogCmd),
    /// Minimum UOM size and the sizes not ruled out for n qubits.
    Theta { n: u32 },
}

#[derive(Subcommand)]
enum Construct {
    /// The (n+1) x n UOM for odd n.
    Genshift { n: usize },
    /// Row k of A repeated next to every row of block k.
    Compose {
        a: String,
        blocks: Vec<String>,
        /// Rename block variables apart before composing.
        #[arg(long)]
        disjoint: bool,
    },
    /// [X1 Y1; X2 Y2] from two matrices and a permutation family.
    Double {
        x1: String,
        /// Defaults to X1 with every variable renamed.
        x2: Option<String>,
        /// `rotations`, `cyclic:(1432)`, `klein`, `explicit:id;(12)(34);..`
        /// or `coset:(123):klein[:right]` (group `klein` or `cyclic:(1234)`).
        #[arg(long, default_value = "rotations")]
        family: String,
    },
    /// Extend an orthogonal matrix through a split at column s.
    Lift {
        matrix: String,
        #[arg(long)]
        split: usize,
        #[arg(long)]
        y1: String,
        /// Explicit blocks Z_i, one per row of Y1.
        #[arg(long)]
        z: Vec<String>,
    },
}

#[derive(Subcommand)]
enum Order {
    /// Maximal, minimal or isolated in the merge order, and the level.
    Status { matrix: String },
    /// UOM classes reachable by merging, level by level.
    Descend { matrices: Vec<String> },
}

#[derive(Subcommand)]
enum CatalogCmd {
    List,
    Get {
        name: String,
        #[arg(long, value_enum, default_value_t = Format::Text)]
        format: Format,
    },
    /// Check every claim of every entry.
    SelfTest,
}

#[derive(Clone, Copy, ValueEnum)]
enum Format {
    Text,
    Extended,
    Json,
}

/// A finished command: its report, the text rendering and the exit code.
struct Outcome {
    report: Value,
    text: String,
    code: u8,
}

impl Outcome {
    fn ok(report: impl Serialize, text: String) -> Result<Self> {
        Ok(Outcome { report: serde_json::to_value(report)?, text, code: 0 })
    }

    fn status(mut self, passed: bool) -> Self {
        if !passed && self.code == 0 {
            self.code = 1;
        }
        self
    }

    fn complete(mut self, complete: bool) -> Self {
        if !complete {
            self.code = 3;
        }
        self
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(&cli) {
        Ok(out) => {
            if cli.global.json {
                println!("{}", serde_json::to_string_pretty(&out.report).expect("json report"));
            } else {
                print!("{}", out.text);
            }
            ExitCode::from(out.code)
        }
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(2)
        }
    }
}

fn budget(g: &Global) -> Budget {
    g.budget.map_or_else(Budget::unlimited, Budget::with_seconds)
}

fn tolerances(g: &Global) -> Result<Tolerances> {
    let mut tol = Tolerances::default();
    for item in &g.tol {
        match item.split_once('=') {
            Some((key, value)) => {
                let v: f64 = value.parse().with_context(|| format!("tolerance {item:?}"))?;
                tol.set(key, v).map_err(|e| anyhow!(e))?;
            }
            None => {
                let v: f64 = item.parse().with_context(|| format!("tolerance {item:?}"))?;
                tol = Tolerances {
                    genericity: v,
                    orthogonality: v,
                    rank: v,
                    ppt: v,
                    nnls: v,
                    span: v,
                    range: v,
                };
            }
        }
    }
    Ok(tol)
}

fn read_text(arg: &str) -> Result<Option<String>> {
    if arg == "-" {
        let mut s = String::new();
        std::io::stdin().read_to_string(&mut s)?;
        return Ok(Some(s));
    }
    if Path::new(arg).is_file() {
        return Ok(Some(std::fs::read_to_string(arg).with_context(|| format!("reading {arg}"))?));
    }
    Ok(None)
}

fn parse_text(text: &str) -> Result<FormalMatrix> {
    let t = text.trim_start();
    if t.starts_with('{') || t.starts_with('[') {
        let v: Value = serde_json::from_str(t)?;
        Ok(FormalMatrix::from_json(&v)?)
    } else {
        Ok(parse_matrix(text)?)
    }
}

/// Catalog name, file, stdin or inline text.
fn load(arg: &str) -> Result<FormalMatrix> {
    if let Ok(entry) = catalog_get(arg) {
        return entry.matrix().cloned().ok_or_else(|| anyhow!("catalog entry {arg} is not a matrix"));
    }
    match read_text(arg)? {
        Some(text) => parse_text(&text).with_context(|| format!("parsing {arg}")),
        None => parse_matrix(arg).with_context(|| format!("{arg:?} is not a catalog name, a file or a matrix")),
    }
}

fn indent(x: &FormalMatrix) -> String {
    x.to_text().lines().map(|l| format!("  {l}\n")).collect()
}

fn row_text(x: &FormalMatrix, row: &[Var]) -> String {
    // Rendered alongside the matrix so that names agree with its notation.
    let with = x.with_row(row).expect("row fits the matrix");
    with.to_text().lines().last().unwrap_or_default().to_owned()
}

fn run(cli: &Cli) -> Result<Outcome> {
    let g = &cli.global;
    match &cli.command {
        Command::Verify { matrix } => verify(&load(matrix)?),
        Command::Extend { matrix, all } => extend(&load(matrix)?, *all),
        Command::Equiv { first, second } => {
            let (x, y) = (load(first)?, load(second)?);
            let w = are_equivalent(&x, &y);
            let text = match &w {
                Some(w) => format!("equivalent: true\nrow map: {:?}\ncolumn map: {:?}\n", w.row_map, w.col_map),
                None => "equivalent: false\n".to_owned(),
            };
            let passed = w.is_some();
            Outcome::ok(json!({ "equivalent": passed, "witness": w }), text).map(|o| o.status(passed))
        }
        Command::Canon { matrix } => {
            let c = canonical_form(&load(matrix)?);
            let m = c.matrix();
            Outcome::ok(json!({ "code": c.code, "matrix": m.to_text() }), indent(&m))
        }
        Command::Classes { m, n } => classes(*m, *n, &budget(g)),
        Command::Construct(c) => construct(c),
        Command::Order(o) => order(o, &budget(g)),
        Command::Pptes { input, drop, sweep } => pptes(input, drop, *sweep, g.seed, &tolerances(g)?),
        Command::Catalog(c) => catalog(c),
        Command::Theta { n } => {
            if !(1..=127).contains(n) {
                bail!("n must lie in 1..=127");
            }
            let t = theta_reference(*n);
            let ranges: Vec<String> =
                t.theta_prime.iter().map(|&(a, b)| if a == b { a.to_string() } else { format!("{a}..{b}") }).collect();
            let text = format!("n = {}\nminimum size: {}\nsizes not ruled out: {}\n", t.n, t.theta, ranges.join(", "));
            Outcome::ok(&t, text)
        }
    }
}

fn verify(x: &FormalMatrix) -> Result<Outcome> {
    let orth = x.ensure_orthogonal();
    let mut text = format!("size: {}x{}\n", x.nrows(), x.ncols());
    let st = stats(x);
    let mut report = json!({
        "m": x.nrows(),
        "n": x.ncols(),
        "orthogonal": orth.is_ok(),
        "mu_max": st.mu_max,
        "nu_per_column": st.nu_per_column,
        "nu_total": st.nu_total,
        "balanced": st.balanced,
    });
    if let Err(e) = &orth {
        writeln!(text, "orthogonal: false ({e})")?;
        report["orthogonality_error"] = json!(e.to_string());
        report["uom"] = json!(false);
        return Ok(Outcome { report, text, code: 1 });
    }
    let uom = is_uom(x);
    let diag = uom_diagnostics(x)?;
    let probe = decomposition_probe(x, x.ncols().saturating_sub(1))?;
    writeln!(text, "orthogonal: true\nuom: {uom}")?;
    writeln!(text, "mu_max: {}\nnu: {} {:?}\nbalanced: {}", st.mu_max, st.nu_total, st.nu_per_column, st.balanced)?;
    writeln!(text, "diagnostics: {}", if diag.all_pass() { "all pass" } else { "some fail" })?;
    writeln!(text, "reducible: {}\ndecomposable: {}", probe.reducible, probe.decomposition.is_some())?;
    report["uom"] = json!(uom);
    report["diagnostics"] = serde_json::to_value(&diag)?;
    report["reducible"] = json!(probe.reducible);
    report["decomposition"] = serde_json::to_value(&probe.decomposition)?;
    Ok(Outcome { report, text, code: if uom { 0 } else { 1 } })
}

fn extend(x: &FormalMatrix, all: bool) -> Result<Outcome> {
    if !all {
        let row = find_extension_row(x)?;
        let shown = row.as_ref().map(|r| row_text(x, r));
        let text = match &shown {
            Some(r) => format!("extension row: {r}\n"),
            None => "no extension row: the matrix is a UOM\n".to_owned(),
        };
        return Outcome::ok(json!({ "uom": row.is_none(), "row": shown }), text);
    }
    let set = enumerate_orthogonal_rows(x)?;
    let rows: Vec<String> = set.rows.iter().map(|r| row_text(x, r)).collect();
    let clique = max_mutually_orthogonal(&set.rows);
    let mut text = format!("orthogonal rows: {}\n", rows.len());
    for r in &rows {
        writeln!(text, "  {r}")?;
    }
    if !set.is_finite() {
        writeln!(text, "some rows leave a column free; fresh variables stand in for those entries")?;
    }
    writeln!(text, "largest mutually orthogonal subset: {clique}")?;
    Outcome::ok(
        json!({ "rows": rows, "finite": set.is_finite(), "max_mutually_orthogonal": clique }),
        text,
    )
}

fn classes(m: usize, n: usize, budget: &Budget) -> Result<Outcome> {
    if n == 0 || n > 16 || (m as u128) > 1u128 << n {
        bail!("need 1 <= n <= 16 and m <= 2^n");
    }
    let census = enumerate_uom_classes(m, n, budget);
    let mut text = format!("classes of {m}x{n} UOMs: {}{}\n", census.count(), if census.complete { "" } else { " (incomplete)" });
    for (k, x) in census.classes.iter().enumerate() {
        writeln!(text, "class {}:\n{}", k + 1, indent(x))?;
    }
    let complete = census.complete;
    Outcome::ok(
        json!({ "m": m, "n": n, "count": census.count(), "complete": complete, "classes": census }),
        text,
    )
    .map(|o| o.complete(complete))
}

fn parse_group(text: &str) -> Result<Vec<Perm>> {
    if text == "klein" {
        return Ok(klein_four());
    }
    if let Some(c) = text.strip_prefix("cyclic:") {
        return Ok(Perm::from_cycles(4, c)?.generated_group());
    }
    bail!("unknown group {text:?}")
}

fn family_kind(text: &str, size: usize) -> Result<Option<FamilyKind>> {
    if text == "rotations" {
        return Ok(None);
    }
    if text == "klein" {
        return Ok(Some(FamilyKind::Explicit(klein_four())));
    }
    if let Some(c) = text.strip_prefix("cyclic:") {
        return Ok(Some(FamilyKind::Cyclic(Perm::from_cycles(size, c)?)));
    }
    if let Some(list) = text.strip_prefix("explicit:") {
        let perms = list.split(';').map(|c| Perm::from_cycles(size, c.trim())).collect::<Result<Vec<_>, _>>()?;
        return Ok(Some(FamilyKind::Explicit(perms)));
    }
    if let Some(rest) = text.strip_prefix("coset:") {
        let (rest, side) = match rest.strip_suffix(":right") {
            Some(r) => (r, CosetSide::Right),
            None => (rest.strip_suffix(":left").unwrap_or(rest), CosetSide::Left),
        };
        let (rep, group) = rest.split_once(':').ok_or_else(|| anyhow!("coset needs a representative and a group"))?;
        return Ok(Some(FamilyKind::Coset { rep: Perm::from_cycles(size, rep)?, group: parse_group(group)?, side }));
    }
    bail!("unknown family {text:?}")
}

fn matrix_outcome(x: FormalMatrix) -> Result<Outcome> {
    let uom = is_uom(&x);
    let text = format!("{}uom: {uom}\n", indent(&x));
    Outcome::ok(json!({ "matrix": x.to_text(), "m": x.nrows(), "n": x.ncols(), "uom": uom }), text)
}

fn construct(c: &Construct) -> Result<Outcome> {
    match c {
        Construct::Genshift { n } => matrix_outcome(genshift(*n)?),
        Construct::Compose { a, blocks, disjoint } => {
            let a = load(a)?;
            let blocks = blocks.iter().map(|b| load(b)).collect::<Result<Vec<_>>>()?;
            let x = if *disjoint { compose_disjoint(&a, &blocks)? } else { compose(&a, &blocks)? };
            matrix_outcome(x)
        }
        Construct::Double { x1, x2, family } => {
            let x1 = load(x1)?;
            let fam = match family_kind(family, x1.nrows())? {
                Some(kind) => perm_family(&kind, x1.nrows())?,
                None => uomkit::constructions::PermFamily::rotations(x1.nrows()),
            };
            let z = match x2 {
                Some(x2) => double(&x1, &load(x2)?, &fam)?,
                None => double_renamed(&x1, &fam)?,
            };
            matrix_outcome(z)
        }
        Construct::Lift { matrix, split, y1, z } => {
            let x = load(matrix)?;
            let y1 = load(y1)?;
            let z = z.iter().map(|b| load(b)).collect::<Result<Vec<_>>>()?;
            let choices = if z.is_empty() { None } else { Some(z.as_slice()) };
            matrix_outcome(lift_extension(&x, *split, &y1, choices)?)
        }
    }
}

fn order(o: &Order, budget: &Budget) -> Result<Outcome> {
    match o {
        Order::Status { matrix } => {
            let s = maximality_status(&load(matrix)?)?;
            let text = format!("maximal: {}\nminimal: {}\nisolated: {}\nlevel: {}\n", s.maximal, s.minimal, s.isolated, s.level);
            Outcome::ok(s, text)
        }
        Order::Descend { matrices } => {
            let reps = matrices.iter().map(|m| load(m)).collect::<Result<Vec<_>>>()?;
            let census = descend_classes(&reps, budget)?;
            let mut text = String::new();
            for (level, xs) in census.levels.iter().rev() {
                writeln!(text, "level {level}: {} classes", xs.len())?;
            }
            if !census.complete {
                writeln!(text, "incomplete: budget exhausted")?;
            }
            let complete = census.complete;
            Outcome::ok(census, text).map(|o| o.complete(complete))
        }
    }
}

fn projector_text(label: &str, p: &ProjectorReport) -> String {
    let mut text = format!(
        "{label} drop {:?}: dimension {}, rank {}, s = {}, ppt {}, {:?}\n",
        p.dropped, p.dimension, p.rank, p.s, p.ppt_all, p.verdict
    );
    if !p.wildcard_columns.is_empty() {
        let _ = writeln!(text, "  columns left free by some range vector: {:?}", p.wildcard_columns);
    }
    text
}

fn pptes(input: &str, drop: &[usize], sweep: bool, seed: u64, tol: &Tolerances) -> Result<Outcome> {
    if drop.contains(&0) {
        bail!("--drop is 1-based");
    }
    let dropped: Vec<usize> = drop.iter().map(|i| i - 1).collect();
    if input == "pyramid" {
        let set = pyramid_upb();
        let rows = set.states.len();
        let reports: Vec<ProjectorReport> = if sweep {
            (0..rows).map(|d| qudit_pptes_report(&set, &[d], tol)).collect::<Result<_, _>>()?
        } else {
            vec![qudit_pptes_report(&set, &dropped, tol)?]
        };
        return pptes_outcome("pyramid", reports, sweep);
    }
    let x = load(input)?;
    if !is_uom(&x) {
        bail!("{input} is not a UOM");
    }
    let reports: Vec<ProjectorReport> = if sweep {
        (0..x.nrows()).map(|d| secondary_pptes_report(&x, &[d], seed, tol)).collect::<Result<_, _>>()?
    } else {
        vec![secondary_pptes_report(&x, &dropped, seed, tol)?]
    };
    pptes_outcome(input, reports, sweep)
}

fn pptes_outcome(label: &str, reports: Vec<ProjectorReport>, sweep: bool) -> Result<Outcome> {
    let mut text: String = reports.iter().map(|p| projector_text(label, p)).collect();
    if !sweep {
        let p = reports.into_iter().next().expect("one report");
        return Outcome::ok(p, text);
    }
    let mut pairs: BTreeMap<(usize, usize), Vec<usize>> = BTreeMap::new();
    for p in &reports {
        if p.verdict == Verdict::Entangled {
            pairs.entry((p.rank, p.s)).or_default().extend(&p.dropped);
        }
    }
    writeln!(text, "entangled (rank, s) pairs: {:?}", pairs.keys().collect::<Vec<_>>())?;
    let summary: Vec<Value> =
        pairs.iter().map(|((rank, s), rows)| json!({ "rank": rank, "s": s, "dropped_rows": rows })).collect();
    let brief: Vec<Value> = reports
        .iter()
        .map(|p| json!({ "dropped": p.dropped, "rank": p.rank, "s": p.s, "ppt": p.ppt_all, "verdict": p.verdict }))
        .collect();
    Outcome::ok(json!({ "input": label, "reports": brief, "entangled_pairs": summary }), text)
}

fn catalog(c: &CatalogCmd) -> Result<Outcome> {
    match c {
        CatalogCmd::List => {
            let list = catalog_list();
            let mut text = String::new();
            let mut items = Vec::new();
            for e in &list {
                let size = match &e.item {
                    CatalogItem::Matrix { matrix } => format!("{}x{}", matrix.nrows(), matrix.ncols()),
                    CatalogItem::Qudit { set } => format!("{} states", set.states.len()),
                };
                let flag = if e.source_suspect() { " [suspect]" } else { "" };
                writeln!(text, "{:<22} {:<10} {}{flag}", e.name, size, e.description)?;
                items.push(json!({ "name": e.name, "size": size, "status": e.status, "description": e.description }));
            }
            Outcome::ok(items, text)
        }
        CatalogCmd::Get { name, format } => {
            let e = catalog_get(name)?;
            let all = catalog_list();
            let check = check_entry(&e, &all);
            let body = match (&e.item, format) {
                (CatalogItem::Matrix { matrix }, Format::Text) => indent(matrix),
                (CatalogItem::Matrix { matrix }, Format::Extended) => {
                    matrix.to_extended().lines().map(|l| format!("  {l}\n")).collect()
                }
                (CatalogItem::Matrix { matrix }, Format::Json) => format!("{}\n", matrix.to_json()),
                (CatalogItem::Qudit { set }, _) => format!("{}\n", serde_json::to_string(set)?),
            };
            let mut text = format!("{} ({:?}): {}\n{body}", e.name, e.status, e.description);
            for n in &e.notes {
                writeln!(text, "note: {n}")?;
            }
            for c in &check.checks {
                writeln!(text, "{} {}: expected {}, found {}", if c.passed { "ok " } else { "BAD" }, c.claim, c.expected, c.found)?;
            }
            let passed = check.passed || e.source_suspect();
            Outcome::ok(json!({ "entry": e, "check": check }), text).map(|o| o.status(passed))
        }
        CatalogCmd::SelfTest => {
            let r = self_test();
            let mut text = String::new();
            for e in &r.entries {
                let mark = match (e.passed, e.status) {
                    (true, _) => "ok  ",
                    (false, uomkit::catalog::SourceStatus::Suspect) => "SUSP",
                    (false, _) => "FAIL",
                };
                writeln!(text, "{mark} {}", e.name)?;
                for c in e.checks.iter().filter(|c| !c.passed) {
                    writeln!(text, "       {}: expected {}, found {}", c.claim, c.expected, c.found)?;
                }
            }
            writeln!(text, "{} entries, {}", catalog_names().len(), if r.passed { "all claims hold" } else { "claims fail" })?;
            let passed = r.passed;
            Outcome::ok(r, text).map(|o| o.status(passed))
        }
    }
}
