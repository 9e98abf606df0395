//! Text renderings of trajectories, windowed correlations and sweep grids:
//! CSV tables and companion gnuplot scripts.
//!
//! Numbers are written as `{:.16e}` (17 significant digits), which round-trips
//! every `f64` exactly. Missing values are written as `NaN`.

use std::fmt::Write;

use crate::analysis::Simulation;
use crate::dynamics::Trajectory;
use crate::error::Result;
use crate::observables::{l1_coherence, Pauli};
use crate::sweep::SweepResult;
use crate::sync::WindowedSeries;

pub fn num(v: f64) -> String {
    if v.is_nan() {
        "NaN".to_string()
    } else {
        format!("{v:.16e}")
    }
}

pub fn opt_num(v: Option<f64>) -> String {
    v.map_or_else(|| "NaN".to_string(), num)
}

/// `t, re<sx_1>, re<sy_1>, re<sz_1>, …, purity, coherence_l1`.
pub fn trajectory_csv(traj: &Trajectory) -> Result<String> {
    let n = traj.n_atoms();
    let mut columns = Vec::with_capacity(3 * n);
    let mut header = String::from("t");
    for atom in 0..n {
        for axis in Pauli::ALL {
            let _ = write!(header, ",re<s{axis}_{}>", atom + 1);
            columns.push(traj.pauli_series(atom, axis)?.values);
        }
    }
    header.push_str(",purity,coherence_l1\n");
    let mut out = header;
    for (k, (t, state)) in traj.times().iter().zip(traj.states()).enumerate() {
        out.push_str(&num(*t));
        for col in &columns {
            out.push(',');
            out.push_str(&num(col[k]));
        }
        let _ = writeln!(out, ",{},{}", num(state.purity()), num(l1_coherence(state)));
    }
    Ok(out)
}

/// `t_center, C_ij, …` with one column per pair; all series must share
/// their window centres.
pub fn pearson_csv(series: &[WindowedSeries]) -> String {
    let mut out = String::from("t_center");
    for w in series {
        let _ = write!(out, ",C_{}{}", w.pair.0 + 1, w.pair.1 + 1);
    }
    out.push('\n');
    let Some(first) = series.first() else {
        return out;
    };
    for (k, c) in first.centers.iter().enumerate() {
        out.push_str(&num(*c));
        for w in series {
            out.push(',');
            out.push_str(&opt_num(w.values.get(k).copied().flatten()));
        }
        out.push('\n');
    }
    out
}

/// `axis1, axis2, value, verdict` in row-major order. One-dimensional sweeps
/// write `NaN` for `axis2`; cells without a verdict write `none`.
pub fn sweep_csv(result: &SweepResult) -> String {
    let mut out = String::from("axis1,axis2,value,verdict\n");
    for (x1, x2, v, kind) in result.cells() {
        let verdict = kind.map_or_else(|| "none".to_string(), |k| k.to_string());
        let _ = writeln!(out, "{},{},{},{verdict}", num(x1), opt_num(x2), opt_num(v));
    }
    out
}

/// Ensemble standard errors next to the cell coordinates.
pub fn std_error_csv(result: &SweepResult) -> Option<String> {
    let errs = result.std_errors.as_ref()?;
    let mut out = String::from("axis1,axis2,std_error\n");
    for ((x1, x2, _, _), e) in result.cells().zip(errs) {
        let _ = writeln!(out, "{},{},{}", num(x1), opt_num(x2), opt_num(*e));
    }
    Some(out)
}

/// One line per analysed pair.
pub fn verdict_summary(sim: &Simulation) -> String {
    let mut out = String::new();
    for (w, v) in sim.windowed.iter().zip(&sim.verdicts) {
        let final_value = v.final_value.map_or_else(|| "undefined".to_string(), |x| format!("{x:.6}"));
        let settled = v.settled_at.map_or_else(|| "-".to_string(), |t| format!("{t:.2}"));
        let _ = writeln!(
            out,
            "C_{}{}: {} (final {final_value}, settled from t = {settled})",
            w.pair.0 + 1,
            w.pair.1 + 1,
            v.kind
        );
    }
    out
}

pub fn trajectory_plot(csv: &str, n_atoms: usize) -> String {
    let mut out = String::new();
    let _ = writeln!(out, "set datafile separator ','");
    let _ = writeln!(out, "set key autotitle columnhead");
    let _ = writeln!(out, "set xlabel 't'");
    let _ = writeln!(out, "set ylabel '<sigma_x>'");
    let plots: Vec<String> = (0..n_atoms)
        .map(|a| format!("'{csv}' using 1:{} with lines", 2 + 3 * a))
        .collect();
    let _ = writeln!(out, "plot {}", plots.join(", \\\n     "));
    out
}

pub fn pearson_plot(csv: &str, pairs: usize) -> String {
    let mut out = String::new();
    let _ = writeln!(out, "set datafile separator ','");
    let _ = writeln!(out, "set datafile missing 'NaN'");
    let _ = writeln!(out, "set key autotitle columnhead");
    let _ = writeln!(out, "set xlabel 't'");
    let _ = writeln!(out, "set ylabel 'Pearson C'");
    let _ = writeln!(out, "set yrange [-1.05:1.05]");
    let plots: Vec<String> = (0..pairs)
        .map(|p| format!("'{csv}' using 1:{} with lines", 2 + p))
        .collect();
    let _ = writeln!(out, "plot {}", plots.join(", \\\n     "));
    out
}

/// Heat map for 2-D sweeps, line plot for 1-D sweeps.
pub fn sweep_plot(csv: &str, result: &SweepResult, value_label: &str) -> String {
    let mut out = String::new();
    let _ = writeln!(out, "set datafile separator ','");
    let _ = writeln!(out, "set datafile missing 'NaN'");
    let _ = writeln!(out, "set xlabel '{}'", result.axis1.path);
    match &result.axis2 {
        Some(ax2) => {
            let _ = writeln!(out, "set ylabel '{}'", ax2.path);
            let _ = writeln!(out, "set cblabel '{value_label}'");
            let _ = writeln!(out, "set view map");
            let _ = writeln!(out, "set dgrid3d {},{}", result.axis1.len(), ax2.len());
            let _ = writeln!(out, "splot '{csv}' every ::1 using 1:2:3 with pm3d notitle");
        }
        None => {
            let _ = writeln!(out, "set ylabel '{value_label}'");
            let _ = writeln!(out, "plot '{csv}' every ::1 using 1:3 with linespoints notitle");
        }
    }
    out
}
