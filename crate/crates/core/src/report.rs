//! Evaluation tables, CSV output and comparison against the published benchmark
//! tables.
//!
//! The published tables print values truncated (not rounded) to 6 decimals and
//! absolute errors truncated to 7 significant figures, so cells are produced the
//! same way before comparing. Truncation is applied to the value first rounded
//! to 12 significant digits, which strips binary representation noise such as
//! `0.3 = 0.29999999999999998…`.

use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};

use serde_json::json;

use crate::error::{Error, Result};
use crate::fracseries::FracSeries;
use crate::oracle::{residual_sup_norm, unit_grid, QuadSpec};
use crate::pia::{trajectory, PiaConfig, PiaState};
use crate::problem::{builtin, FideProblem};

/// Value truncated toward zero to `decimals` places, e.g. `0.4940755 → "0.494075"`.
pub fn fmt_fixed(x: f64, decimals: usize) -> String {
    let s = format!("{:.*e}", 11, x.abs());
    let (mantissa, exp) = s.split_once('e').expect("exponent form");
    let exp: i32 = exp.parse().expect("integer exponent");
    let digits: String = mantissa.chars().filter(|c| *c != '.').collect();
    // value = 0.d1d2d3… × 10^(exp+1)
    let point = exp + 1;
    let mut int_part = String::new();
    let mut frac_part = String::new();
    if x.abs() == 0.0 {
        int_part.push('0');
    } else if point <= 0 {
        int_part.push('0');
        frac_part.extend(std::iter::repeat_n('0', (-point) as usize));
        frac_part.push_str(&digits);
    } else {
        let p = point as usize;
        if p >= digits.len() {
            int_part.push_str(&digits);
            int_part.extend(std::iter::repeat_n('0', p - digits.len()));
        } else {
            int_part.push_str(&digits[..p]);
            frac_part.push_str(&digits[p..]);
        }
    }
    frac_part.truncate(decimals);
    while frac_part.len() < decimals {
        frac_part.push('0');
    }
    let negative = x < 0.0 && (int_part.chars().chain(frac_part.chars()).any(|c| c != '0'));
    let sign = if negative { "-" } else { "" };
    if decimals == 0 {
        format!("{sign}{int_part}")
    } else {
        format!("{sign}{int_part}.{frac_part}")
    }
}

/// Scientific notation truncated to `sig` significant figures, `1.872712E-4` style.
/// Zero prints as `0.000000`.
pub fn fmt_sci(x: f64, sig: usize) -> String {
    if x == 0.0 {
        return fmt_fixed(0.0, sig.saturating_sub(1));
    }
    let s = format!("{:.*e}", 11, x.abs());
    let (mantissa, exp) = s.split_once('e').expect("exponent form");
    let keep = (sig.max(1) + 1).min(mantissa.len());
    let mut m = mantissa[..keep].to_string();
    if m.ends_with('.') {
        m.pop();
    }
    let sign = if x < 0.0 { "-" } else { "" };
    format!("{sign}{m}E{exp}")
}

/// Grid coordinate label: `0.0`, `0.1`, …, `0.25`.
pub fn fmt_grid(t: f64) -> String {
    let r = (t * 1e12).round() / 1e12;
    if r == r.trunc() {
        format!("{r:.1}")
    } else {
        format!("{r}")
    }
}

/// Layout of an evaluation table.
#[derive(Debug, Clone, PartialEq)]
pub struct TableSpec {
    pub grid: Vec<f64>,
    pub iterate_columns: Vec<usize>,
    pub compare_reference: bool,
}

impl Default for TableSpec {
    fn default() -> Self {
        TableSpec {
            grid: (0..=10).map(|i| i as f64 / 10.0).collect(),
            iterate_columns: vec![1, 2, 3],
            compare_reference: true,
        }
    }
}

impl TableSpec {
    pub fn validate(&self) -> Result<()> {
        if self.grid.iter().any(|t| !(0.0..=1.0).contains(t)) {
            return Err(Error::validation("table grid values must lie in [0, 1]"));
        }
        if self.grid.windows(2).any(|w| w[1] <= w[0]) {
            return Err(Error::validation("table grid must be strictly ascending"));
        }
        if self.iterate_columns.is_empty() && !self.compare_reference {
            return Err(Error::validation("table has no columns"));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ColumnKind {
    Grid,
    Iterate,
    Exact,
    AbsError,
}

/// A formatted table: each cell keeps its raw value and its printed text.
#[derive(Debug, Clone, PartialEq)]
pub struct Table {
    pub headers: Vec<String>,
    pub kinds: Vec<ColumnKind>,
    pub values: Vec<Vec<f64>>,
    pub cells: Vec<Vec<String>>,
}

impl Table {
    pub fn column(&self, header: &str) -> Option<usize> {
        self.headers.iter().position(|h| h == header)
    }

    pub fn to_csv(&self) -> Result<String> {
        let mut w = csv::Writer::from_writer(Vec::new());
        let io = |e: csv::Error| Error::Io(format!("CSV output failed: {e}"));
        w.write_record(&self.headers).map_err(io)?;
        for row in &self.cells {
            w.write_record(row).map_err(io)?;
        }
        let bytes = w
            .into_inner()
            .map_err(|e| Error::Io(format!("CSV output failed: {e}")))?;
        Ok(String::from_utf8(bytes).expect("CSV output is ASCII"))
    }

    /// Space-aligned plain text.
    pub fn to_text(&self) -> String {
        let widths: Vec<usize> = (0..self.headers.len())
            .map(|c| {
                self.cells
                    .iter()
                    .map(|r| r[c].len())
                    .chain(std::iter::once(self.headers[c].len()))
                    .max()
                    .unwrap_or(0)
            })
            .collect();
        let mut out = String::new();
        let line = |cells: &[String], out: &mut String| {
            let parts: Vec<String> = cells
                .iter()
                .zip(&widths)
                .map(|(c, w)| format!("{c:>w$}"))
                .collect();
            out.push_str(parts.join("  ").trim_end());
            out.push('\n');
        };
        line(&self.headers, &mut out);
        for row in &self.cells {
            line(row, &mut out);
        }
        out
    }
}

/// Builds the table from a trajectory `states[n]`. The absolute error column
/// belongs to the last requested iterate.
pub fn build_table(p: &FideProblem, states: &[PiaState], spec: &TableSpec) -> Result<Table> {
    spec.validate()?;
    if let Some(&n) = spec.iterate_columns.iter().find(|&&n| n >= states.len()) {
        return Err(Error::validation(format!(
            "iterate {n} requested but only {} iterations were run",
            states.len().saturating_sub(1)
        )));
    }
    let reference = match (&p.reference, spec.compare_reference) {
        (Some(r), true) => Some(r),
        (None, true) => {
            return Err(Error::validation(format!(
                "problem {:?} has no reference solution to compare with",
                p.name
            )))
        }
        (_, false) => None,
    };
    let single = p.len() == 1;
    let mut headers = vec!["t".to_string()];
    let mut kinds = vec![ColumnKind::Grid];
    for name in &p.unknowns {
        for n in &spec.iterate_columns {
            headers.push(format!("{name}{n}"));
            kinds.push(ColumnKind::Iterate);
        }
        if reference.is_some() {
            let prefix = if single { String::new() } else { format!("{name}_") };
            headers.push(format!("{prefix}exact"));
            kinds.push(ColumnKind::Exact);
            if !spec.iterate_columns.is_empty() {
                headers.push(format!("{prefix}abs_error"));
                kinds.push(ColumnKind::AbsError);
            }
        }
    }

    let mut values = Vec::with_capacity(spec.grid.len());
    let mut cells = Vec::with_capacity(spec.grid.len());
    for &t in &spec.grid {
        let mut vrow = vec![t];
        let mut crow = vec![fmt_grid(t)];
        for j in 0..p.len() {
            let mut last = None;
            for &n in &spec.iterate_columns {
                let v = states[n].iterates[j].eval(t)?;
                vrow.push(v);
                crow.push(fmt_fixed(v, 6));
                last = Some(v);
            }
            if let Some(r) = reference {
                let exact = r[j].eval(t);
                vrow.push(exact);
                crow.push(fmt_fixed(exact, 6));
                if let Some(v) = last {
                    let err = (v - exact).abs();
                    vrow.push(err);
                    crow.push(fmt_sci(err, 7));
                }
            }
        }
        values.push(vrow);
        cells.push(crow);
    }
    Ok(Table {
        headers,
        kinds,
        values,
        cells,
    })
}

/// One printed cell of a published table that is evidently a typesetting error,
/// with the value it must have had.
#[derive(Debug, Clone, PartialEq)]
pub struct Erratum {
    pub row: &'static str,
    pub column: &'static str,
    pub printed: &'static str,
    pub corrected: &'static str,
    pub note: &'static str,
}

/// A published benchmark table, stored verbatim.
#[derive(Debug, Clone)]
pub struct PublishedTable {
    pub name: &'static str,
    pub headers: &'static [&'static str],
    pub rows: &'static [&'static [&'static str]],
    pub errata: &'static [Erratum],
}

impl PublishedTable {
    /// Cell text with errata applied.
    pub fn corrected(&self, row: usize, col: usize) -> &'static str {
        let t = self.rows[row][0];
        let header = self.headers[col];
        self.errata
            .iter()
            .find(|e| e.row == t && e.column == header)
            .map(|e| e.corrected)
            .unwrap_or(self.rows[row][col])
    }
}

/// Example 1, `α = 1`, iterates 2–5 against the exact solution `u = t`.
pub const TABLE1: PublishedTable = PublishedTable {
    name: "table1",
    headers: &["t", "u2", "u3", "u4", "u5", "exact", "abs_error"],
    rows: &[
        &["0.0", "0.000000", "0.000000", "0.000000", "0.000000", "0.000000", "0.000000"],
        &["0.1", "0.099763", "0.099953", "0.099990", "0.099981", "0.100000", "1.872712E-6"],
        &["0.2", "0.199052", "0.199812", "0.199962", "0.199992", "0.200000", "7.490848E-6"],
        &["0.3", "0.297867", "0.299577", "0.299915", "0.299983", "0.300000", "1.685440E-5"],
        &["0.4", "0.396208", "0.399249", "0.399850", "0.399970", "0.400000", "2.996339E-5"],
        &["0.5", "0.494075", "0.498826", "0.499765", "0.499953", "0.500000", "4.681780E-5"],
        &["0.6", "0.591468", "0.598310", "0.599662", "0.599932", "0.600000", "6.741763E-5"],
        &["0.7", "0.688388", "0.697700", "0.699541", "0.699908", "0.700000", "9.176289E-5"],
        &["0.8", "0.784833", "0.796996", "0.799400", "0.799880", "0.800000", "1.198535E-4"],
        &["0.9", "0.880804", "0.896198", "0.899241", "0.899848", "0.900000", "1.516896E-4"],
        &["1.0", "0.976302", "0.995307", "0.999063", "0.999812", "1.000000", "1.872712E-4"],
    ],
    errata: &[Erratum {
        row: "0.1",
        column: "u5",
        printed: "0.099981",
        corrected: "0.099998",
        note: "a digit 9 is missing: the printed absolute error 1.872712E-6 gives u5(0.1) = 0.0999981…",
    }],
};

/// Example 2, `α₁ = α₂ = 1`, third iterates against `sinh t`, `cosh t`.
pub const TABLE2: PublishedTable = PublishedTable {
    name: "table2",
    headers: &["t", "u3", "u_exact", "u_abs_error", "k3", "k_exact", "k_abs_error"],
    rows: &[
        &["0.0", "0.000000", "0.000000", "0.000000", "1.000000", "1000000.", "0.000000"],
        &["0.1", "0.100166", "0.100166", "1.591577E-10", "1.005004", "1.005004", "1.191735E-11"],
        &["0.2", "0.201335", "0.201336", "2.053723E-8", "1.020066", "1.020066", "3.060393E-9"],
        &["0.3", "0.304519", "0.304520", "3.556439E-7", "1.045338", "1.045338", "7.884730E-8"],
        &["0.4", "0.410749", "0.410752", "2.714842E-6", "1.081073", "1.081072", "7.934216E-7"],
        &["0.5", "0.521082", "0.521095", "1.326132E-5", "1.127630", "1.127625", "4.774578E-6"],
        &["0.6", "0.636604", "0.636653", "4.893639E-5", "1.185485", "1.185465", "2.077300E-5"],
        &["0.7", "0.758434", "0.758583", "1.490491E-4", "1.255241", "1.255169", "7.230620E-5"],
        &["0.8", "0.887710", "0.888105", "3.950285E-4", "1.337648", "1.337434", "2.139083E-4"],
        &["0.9", "0.025574", "0.026516", "9.426045E-4", "1.433645", "1.433086", "5.592545E-4"],
        &["1.0", "0.173128", "0.175201", "2.072716E-3", "1.544407", "1.543080", "1.327116E-3"],
    ],
    errata: &[
        Erratum {
            row: "0.0",
            column: "k_exact",
            printed: "1000000.",
            corrected: "1.000000",
            note: "misplaced decimal point; cosh(0) = 1",
        },
        Erratum {
            row: "0.9",
            column: "u3",
            printed: "0.025574",
            corrected: "1.025574",
            note: "leading digit dropped; consistent with the printed error 9.426045E-4",
        },
        Erratum {
            row: "0.9",
            column: "u_exact",
            printed: "0.026516",
            corrected: "1.026516",
            note: "leading digit dropped; sinh(0.9) = 1.026516…",
        },
        Erratum {
            row: "1.0",
            column: "u3",
            printed: "0.173128",
            corrected: "1.173128",
            note: "leading digit dropped; consistent with the printed error 2.072716E-3",
        },
        Erratum {
            row: "1.0",
            column: "u_exact",
            printed: "0.175201",
            corrected: "1.175201",
            note: "leading digit dropped; sinh(1) = 1.175201…",
        },
    ],
};

#[derive(Debug, Clone, PartialEq)]
pub struct CellMismatch {
    pub row: String,
    pub column: String,
    pub published: String,
    pub computed: String,
}

/// Cell-by-cell comparison of a computed table with a published one.
#[derive(Debug, Clone, PartialEq)]
pub struct Comparison {
    pub table: &'static str,
    pub cells: usize,
    pub matches: usize,
    pub mismatches: Vec<CellMismatch>,
    pub errata: Vec<Erratum>,
    /// Per published column, the largest `|published - computed|` using corrected values.
    pub max_deviation: Vec<(String, f64)>,
}

impl Comparison {
    pub fn all_match(&self) -> bool {
        self.mismatches.is_empty()
    }
}

pub fn compare_with_published(table: &Table, published: &PublishedTable) -> Result<Comparison> {
    let mut cmp = Comparison {
        table: published.name,
        cells: 0,
        matches: 0,
        mismatches: Vec::new(),
        errata: published.errata.to_vec(),
        max_deviation: Vec::new(),
    };
    let cols: Vec<usize> = published
        .headers
        .iter()
        .map(|h| {
            table
                .column(h)
                .ok_or_else(|| Error::validation(format!("computed table lacks column {h}")))
        })
        .collect::<Result<_>>()?;
    for (pc, &tc) in cols.iter().enumerate().skip(1) {
        let mut dev = 0.0f64;
        for (r, prow) in published.rows.iter().enumerate() {
            let trow = table
                .cells
                .iter()
                .position(|row| row[0] == prow[0])
                .ok_or_else(|| Error::validation(format!("computed table lacks row t = {}", prow[0])))?;
            let expected = published.corrected(r, pc);
            let got = &table.cells[trow][tc];
            cmp.cells += 1;
            if expected == got {
                cmp.matches += 1;
            } else {
                cmp.mismatches.push(CellMismatch {
                    row: prow[0].to_string(),
                    column: published.headers[pc].to_string(),
                    published: expected.to_string(),
                    computed: got.clone(),
                });
            }
            if let Ok(v) = expected.parse::<f64>() {
                dev = dev.max((v - table.values[trow][tc]).abs());
            }
        }
        cmp.max_deviation.push((published.headers[pc].to_string(), dev));
    }
    Ok(cmp)
}

impl Comparison {
    pub fn summary(&self) -> String {
        let mut s = String::new();
        let _ = writeln!(
            s,
            "{}: {}/{} cells match at printed precision",
            self.table, self.matches, self.cells
        );
        for (col, dev) in &self.max_deviation {
            let _ = writeln!(s, "  max |printed - computed| in {col}: {dev:.3e}");
        }
        for m in &self.mismatches {
            let _ = writeln!(
                s,
                "  MISMATCH t = {} {}: printed {} computed {}",
                m.row, m.column, m.published, m.computed
            );
        }
        for e in &self.errata {
            let _ = writeln!(
                s,
                "  erratum t = {} {}: printed {:?}, compared as {} ({})",
                e.row, e.column, e.printed, e.corrected, e.note
            );
        }
        s
    }
}

/// Evaluates one iterate against the reference on an arbitrary grid: `t, <name><n>, exact`.
pub fn figure_csv(p: &FideProblem, state: &PiaState, unknown: usize, grid: &[f64]) -> Result<String> {
    let reference = p
        .reference
        .as_ref()
        .ok_or_else(|| Error::validation("figure data needs a reference solution"))?;
    let io = |e: csv::Error| Error::Io(format!("CSV output failed: {e}"));
    let mut w = csv::Writer::from_writer(Vec::new());
    w.write_record(["t".to_string(), format!("{}{}", p.unknowns[unknown], state.n), "exact".into()])
        .map_err(io)?;
    for &t in grid {
        let v = state.iterates[unknown].eval(t)?;
        let e = reference[unknown].eval(t);
        w.write_record([fmt_grid(t), format!("{v:.12}"), format!("{e:.12}")])
            .map_err(io)?;
    }
    let bytes = w
        .into_inner()
        .map_err(|e| Error::Io(format!("CSV output failed: {e}")))?;
    Ok(String::from_utf8(bytes).expect("CSV output is ASCII"))
}

/// Files written and comparisons made by [`reproduce`].
#[derive(Debug, Clone)]
pub struct Reproduction {
    pub files: Vec<PathBuf>,
    pub comparisons: Vec<Comparison>,
    pub summary: String,
}

/// Names accepted by [`reproduce`].
pub const REPRODUCIBLE: [&str; 3] = ["example1", "example2", "all"];

/// Recomputes a benchmark, writes its table and figure CSVs into `outdir` and a
/// `summary.txt` describing the agreement with the published table.
pub fn reproduce(name: &str, outdir: &Path) -> Result<Reproduction> {
    let names: Vec<&str> = match name {
        "all" => vec!["example1", "example2"],
        "example1" | "example2" => vec![name],
        other => {
            return Err(Error::validation(format!(
                "unknown benchmark {other:?}; expected one of {}",
                REPRODUCIBLE.join(", ")
            )))
        }
    };
    fs::create_dir_all(outdir).map_err(|e| io_err(outdir, e))?;
    let mut out = Reproduction {
        files: Vec::new(),
        comparisons: Vec::new(),
        summary: String::new(),
    };
    let fig_grid: Vec<f64> = (0..=100).map(|i| i as f64 / 100.0).collect();
    for n in names {
        let (table, published, iters, figures): (_, _, usize, Vec<(usize, &str)>) = match n {
            "example1" => (
                TableSpec {
                    iterate_columns: vec![2, 3, 4, 5],
                    ..Default::default()
                },
                TABLE1,
                5,
                vec![(0, "fig1.csv")],
            ),
            _ => (
                TableSpec {
                    iterate_columns: vec![3],
                    ..Default::default()
                },
                TABLE2,
                3,
                vec![(0, "fig2.csv"), (1, "fig3.csv")],
            ),
        };
        let p = builtin(n)?;
        let cfg = PiaConfig {
            max_iter: iters,
            ..Default::default()
        };
        let states = trajectory(&p, &cfg)?;
        let t = build_table(&p, &states, &table)?;
        let path = outdir.join(format!("{}.csv", published.name));
        write_file(&path, &t.to_csv()?)?;
        out.files.push(path);
        let fig_state = &states[3];
        for (unknown, file) in figures {
            let path = outdir.join(file);
            write_file(&path, &figure_csv(&p, fig_state, unknown, &fig_grid)?)?;
            out.files.push(path);
        }
        let cmp = compare_with_published(&t, &published)?;
        out.summary.push_str(&cmp.summary());
        out.comparisons.push(cmp);
    }
    let path = outdir.join("summary.txt");
    write_file(&path, &out.summary)?;
    out.files.push(path);
    Ok(out)
}

fn io_err(path: &Path, e: std::io::Error) -> Error {
    Error::Io(format!("{}: {e}", path.display()))
}

fn write_file(path: &Path, contents: &str) -> Result<()> {
    fs::write(path, contents).map_err(|e| io_err(path, e))
}

/// `(n, sup-norm)` of the numeric residual for `n = 0..=cfg.max_iter`.
pub fn residual_history(
    p: &FideProblem,
    cfg: &PiaConfig,
    points: &[f64],
    spec: QuadSpec,
) -> Result<Vec<(usize, f64)>> {
    let mut quiet = cfg.clone();
    quiet.residual_points = 0;
    let states = if quiet.max_iter == 0 {
        vec![PiaState::initial(p, &quiet)?]
    } else {
        trajectory(p, &quiet)?
    };
    states
        .iter()
        .map(|s| Ok((s.n, residual_sup_norm(p, &s.iterates, points, spec)?)))
        .collect()
}

/// Default residual evaluation points: 21 equally spaced on `[0, 1]`.
pub fn default_residual_points() -> Vec<f64> {
    unit_grid(21)
}

fn series_json(s: &FracSeries) -> serde_json::Value {
    json!({
        "rendered": s.to_string(),
        "terms": s.terms().iter().map(|t| json!({"coeff": t.coeff, "exp": t.exp.to_string()})).collect::<Vec<_>>(),
    })
}

/// Structured result document written by `solve --out`.
pub fn solve_document(p: &FideProblem, state: &PiaState, cfg: &PiaConfig) -> serde_json::Value {
    json!({
        "problem": p.name,
        "orders": p.orders.iter().map(|o| o.to_string()).collect::<Vec<_>>(),
        "epsilon": cfg.epsilon,
        "iterations": state.n,
        "unknowns": p.unknowns.iter().zip(&state.iterates).map(|(name, s)| {
            let mut v = series_json(s);
            v["name"] = json!(name);
            v
        }).collect::<Vec<_>>(),
        "history": state.history.iter().map(|h| json!({
            "n": h.n,
            "term_counts": h.term_counts,
            "residual_sup_norm": h.residual_sup_norm,
            "correction_constants": h.correction_constants,
        })).collect::<Vec<_>>(),
    })
}
