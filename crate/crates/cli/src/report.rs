//! CSV export and human-readable summaries.

use std::fmt::Write as _;
use std::io::Write;

use optomech::measures::{Negativities, PAIRS};
use optomech::model::{SystemParams, C64};
use optomech::pipeline::{PointOutcome, Status};
use optomech::sweep::SweepResult;

fn cell_text(column: &str, value: Option<f64>) -> String {
    match value {
        None => String::new(),
        Some(v) if column == "stable" || column == "physical" => format!("{}", v as u8),
        Some(v) => format!("{v:.14e}"),
    }
}

/// Writes `#`-prefixed provenance lines, a header row and one row per cell.
pub fn write_csv<W: Write>(result: &SweepResult, mut out: W) -> std::io::Result<()> {
    for (key, value) in &result.provenance {
        writeln!(out, "# {key} = {value}")?;
    }
    let mut writer = csv::Writer::from_writer(out);
    let mut header: Vec<&str> = result.spec.axes.iter().map(|a| a.param.name()).collect();
    header.extend(result.columns.iter().copied());
    header.push("status");
    writer.write_record(&header)?;
    for cell in &result.cells {
        let mut row: Vec<String> = cell.coords.iter().map(|c| format!("{c:.14e}")).collect();
        row.extend(
            result
                .columns
                .iter()
                .zip(&cell.values)
                .map(|(col, v)| cell_text(col, *v)),
        );
        row.push(cell.status.to_string());
        writer.write_record(&row)?;
    }
    writer.flush()?;
    Ok(())
}

pub fn sweep_summary(result: &SweepResult) -> String {
    let mut s = String::new();
    let n = result.cells.len();
    let _ = writeln!(s, "{}: {n} cells", result.spec.name);
    let mut counts: Vec<(String, usize)> = Vec::new();
    for cell in &result.cells {
        let key = cell.status.to_string();
        match counts.iter_mut().find(|(k, _)| *k == key) {
            Some((_, c)) => *c += 1,
            None => counts.push((key, 1)),
        }
    }
    let parts: Vec<String> = counts.iter().map(|(k, c)| format!("{k} {c}")).collect();
    let _ = writeln!(s, "  status: {}", parts.join(", "));
    let mut targets = vec![result.spec.plot_column()];
    if result.columns.contains(&"R_min") && !targets.contains(&"R_min") {
        targets.insert(0, "R_min");
    }
    for column in targets {
        match result.argmax(column) {
            Some((k, v)) => {
                let coords: Vec<String> = result
                    .spec
                    .axes
                    .iter()
                    .zip(&result.cells[k].coords)
                    .map(|(a, c)| format!("{} = {c:.6}", a.param))
                    .collect();
                let _ = writeln!(s, "  max {column} = {v:.6e} at {}", coords.join(", "));
            }
            None => {
                let _ = writeln!(s, "  max {column}: no values");
            }
        }
    }
    s
}

fn fmt_c(z: C64) -> String {
    format!("{:.6e}{:+.6e}i", z.re, z.im)
}

pub fn point_report(params: &SystemParams, outcome: &PointOutcome, omega_m_hz: Option<f64>) -> String {
    let mut s = String::new();
    let _ = writeln!(s, "parameters (rates in units of omega_m)");
    for (k, v) in params.describe() {
        let _ = writeln!(s, "  {k} = {v}");
    }
    if let Some(hz) = omega_m_hz {
        let _ = writeln!(s, "  omega_m = {hz} Hz");
    }
    if let Some(mf) = &outcome.mean_fields {
        let _ = writeln!(s, "mean fields");
        let _ = writeln!(s, "  alpha1 = {}", fmt_c(mf.alpha[0]));
        let _ = writeln!(s, "  alpha2 = {}", fmt_c(mf.alpha[1]));
        let _ = writeln!(s, "  beta   = {}", fmt_c(mf.beta));
        let _ = writeln!(s, "  Delta_eff = [{:.6}, {:.6}]", mf.delta_eff[0], mf.delta_eff[1]);
        let g = mf.drift_coupling();
        let _ = writeln!(s, "  G = [{:.6}, {:.6}] (real gauge: {})", g[0], g[1], mf.real_gauge);
        if let Some(ph) = mf.discarded_phases {
            let _ = writeln!(s, "  discarded coupling phases = [{:.6}, {:.6}] rad", ph[0], ph[1]);
        }
        let _ = writeln!(s, "  g_s = {:.6}, f_s = {:.6}", mf.gain, mf.loss);
    }
    if let Some(sys) = &outcome.system {
        let _ = writeln!(s, "stability");
        let _ = writeln!(s, "  stable = {}", sys.is_robustly_stable());
        let _ = write!(s, "  spectral abscissa = {:.6e}", sys.spectral_abscissa);
        if let Some(hz) = omega_m_hz {
            let _ = write!(s, " ({:.6e} s^-1)", sys.spectral_abscissa * hz);
        }
        let _ = writeln!(s);
    }
    if let Some(st) = &outcome.state {
        let _ = writeln!(s, "covariance (vacuum variance 1/2)");
        let diag: Vec<String> = st.v.diagonal().iter().map(|x| format!("{x:.6e}")).collect();
        let _ = writeln!(s, "  diag V = [{}]", diag.join(", "));
        let _ = writeln!(s, "  min eigenvalue = {:.6e}", st.min_eigenvalue());
        let spec: Vec<String> = st.symplectic.iter().map(|x| format!("{x:.9}")).collect();
        let _ = writeln!(s, "  symplectic spectrum = [{}]", spec.join(", "));
        let _ = writeln!(s, "  physical = {}", st.physical);
    }
    if let Some(m) = &outcome.measures {
        let _ = writeln!(s, "entanglement (log. negativity / contangle)");
        for (label, (en, tau)) in Negativities::LABELS
            .iter()
            .zip(m.negativity.as_array().iter().zip(m.contangle.as_array()))
        {
            let _ = writeln!(s, "  {label:<7} E_N = {en:.9e}  tau = {tau:.9e}");
        }
        let _ = writeln!(
            s,
            "  R_min = {:.9e} (raw {:.9e}, focus mode {})",
            m.residual.clamped(),
            m.residual.r_min,
            m.residual.argmin
        );
        match &m.coherence {
            Ok(c) => {
                let _ = writeln!(s, "coherence (nats)");
                for (label, v) in ["a1", "a2", "b"].iter().zip(c.one) {
                    let _ = writeln!(s, "  C_{label:<5} = {v:.9e}");
                }
                for ((i, j), v) in PAIRS.iter().zip(c.two) {
                    let _ = writeln!(s, "  C_{:<5} = {v:.9e}", format!("{}{}", i.label(), j.label()));
                }
                let _ = writeln!(s, "  C_t     = {:.9e}", c.total);
                let _ = writeln!(s, "  clamped eigenvalues = {}", c.clamps);
            }
            Err(e) => {
                let _ = writeln!(s, "coherence unavailable: {e}");
            }
        }
    }
    if let Some(e) = &outcome.error {
        let _ = writeln!(s, "error: {e}");
    }
    let _ = writeln!(s, "status: {}", outcome.status);
    s
}

/// Exit code for a single-point evaluation.
pub fn point_exit_code(status: Status) -> i32 {
    match status {
        Status::Ok | Status::Clamped => 0,
        Status::Unstable => 2,
        Status::Unphysical => 3,
        Status::Error(_) => 1,
    }
}
