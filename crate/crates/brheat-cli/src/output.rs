//! Output plumbing shared by the commands: deterministic CSV and text
//! writing, the dual-route failure record, and the optional plotting
//! script.  All files are UTF-8 with bare newlines, floats printed as
//! {:.14e} so a rerun with the same config and seed is byte identical.

use anyhow::{Context, Result};
use std::path::{Path, PathBuf};

/// One dual-route disagreement.
pub struct Failure {
    pub check: String,
    pub got: f64,
    pub want: f64,
    pub tolerance: f64,
}

/// What a command produced: console summary lines plus any failures.
/// An empty failure list is the success criterion for the process
/// exit code.
pub struct RunOutcome {
    pub summary: Vec<String>,
    pub failures: Vec<Failure>,
}

/// Compare two routes and record a failure when they disagree beyond
/// the absolute tolerance.  Written so a NaN on either side fails.
pub fn route_check(
    failures: &mut Vec<Failure>,
    check: &str,
    got: f64,
    want: f64,
    tolerance: f64,
) {
    if !((got - want).abs() <= tolerance) {
        failures.push(Failure { check: check.to_string(), got, want, tolerance });
    }
}

pub fn write_text(path: &Path, content: &str) -> Result<()> {
    std::fs::write(path, content).with_context(|| format!("writing {}", path.display()))
}

pub fn write_failures(path: &Path, failures: &[Failure]) -> Result<()> {
    let mut out = String::from("check,got,want,tolerance\n");
    for f in failures {
        out.push_str(&format!("{},{:.14e},{:.14e},{:.14e}\n", f.check, f.got, f.want, f.tolerance));
    }
    write_text(path, &out)
}

pub fn fmt(x: f64) -> String {
    format!("{x:.14e}")
}

/// A single figure in the generated plotting script.
pub struct PlotSpec {
    pub csv: &'static str,
    pub title: &'static str,
    pub x_label: &'static str,
    pub y_label: &'static str,
    /// Zero-based column used as the abscissa.
    pub x_col: usize,
    /// (column index, legend label) pairs, zero-based.
    pub series: Vec<(usize, String)>,
    pub log_x: bool,
}

/// Emit plot.py next to the CSVs.  Running it is up to the user; this
/// tool never renders images itself.
pub fn write_plot_script(out_dir: &Path, specs: &[PlotSpec]) -> Result<PathBuf> {
    let mut py = String::from(
        "#!/usr/bin/env python3\n\
         # Generated alongside the CSV outputs; edit freely.\n\
         import csv\n\
         import matplotlib\n\
         matplotlib.use(\"Agg\")\n\
         import matplotlib.pyplot as plt\n\n\
         def load(name):\n\
         \twith open(name, newline=\"\") as fh:\n\
         \t\trows = list(csv.reader(fh))\n\
         \treturn rows[0], [[float(v) for v in r] for r in rows[1:]]\n\n",
    );
    for (i, s) in specs.iter().enumerate() {
        py.push_str(&format!("header, rows = load(\"{}\")\n", s.csv));
        py.push_str(&format!("xs = [r[{}] for r in rows]\n", s.x_col));
        py.push_str(&format!("plt.figure({i})\n"));
        for (col, label) in &s.series {
            py.push_str(&format!(
                "plt.plot(xs, [r[{col}] for r in rows], label=\"{label}\")\n"
            ));
        }
        if s.log_x {
            py.push_str("plt.xscale(\"log\")\n");
        }
        py.push_str(&format!(
            "plt.xlabel(\"{}\")\nplt.ylabel(\"{}\")\nplt.title(\"{}\")\nplt.legend()\n",
            s.x_label, s.y_label, s.title
        ));
        let stem = s.csv.trim_end_matches(".csv");
        py.push_str(&format!("plt.savefig(\"{stem}.png\", dpi=150)\n\n"));
    }
    let path = out_dir.join("plot.py");
    write_text(&path, &py)?;
    Ok(path)
}
