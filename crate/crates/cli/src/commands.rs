use std::fmt::Write as _;
use std::path::{Path, PathBuf};

use anyhow::Result;
use monopole_core::bundle::{fmt_f64, polar_grid, POLE_GUARD};
use monopole_core::classical::{
    integrate_flow, make_torus, maslov_index_numeric, Branch, End, EndKind, PhaseState, B_WKB,
};
use monopole_core::exact::{harmonic_section, multiplicity, printed_constant};
use monopole_core::harness::{
    adjudicate_u0, convergence_sweep, run_compare, spectrum_table, ComparisonReport, IndexRule, SweepPattern,
    DEFAULT_GRID,
};
use monopole_core::rational::format_ratio;
use monopole_core::wkb::{QuantumNumbers, WkbForm, WkbSection};
use monopole_core::{Chart, Error};
use serde_json::{json, Value};

use crate::config::Settings;
use crate::output::{out_dir, Format, Sink};
use crate::{Command, Label};

const DEFAULT_SECTION_GRID: usize = 200;
const DEFAULT_FLOW_TIME: f64 = 50.0;
const DEFAULT_FLOW_TOL: f64 = 1e-10;
const DEFAULT_EPS: [f64; 3] = [1e-2, 5e-3, 2.5e-3];

pub fn run(command: Command, config: Option<&Path>, out: Option<PathBuf>, format: Option<String>) -> Result<()> {
    let mut cfg = Settings::load(config)?;
    let dir = match out {
        Some(d) => d,
        None => out_dir(cfg.unrecorded("out")?),
    };
    let format: Format = cfg.parsed("format", format, "csv")?;
    let sink = Sink { dir, format };
    match command {
        Command::Spectrum { n, j_max } => spectrum(&mut cfg, &sink, n, j_max),
        Command::Exact { label, grid, chart } => exact(&mut cfg, &sink, label, grid, chart),
        Command::Wkb {
            label,
            chart,
            grid,
            form,
        } => wkb(&mut cfg, &sink, label, chart, grid, form),
        Command::Compare { label, grid } => compare(&mut cfg, &sink, label, grid),
        Command::Sweep { j, k, n_list, grid } => sweep(&mut cfg, &sink, j, k, n_list, grid),
        Command::Flow {
            e,
            p,
            theta,
            phi,
            branch,
            t,
            tol,
        } => flow(&mut cfg, &sink, e, p, theta, phi, branch, t, tol),
        Command::Maslov { e, p, end, eps } => maslov(&mut cfg, &sink, e, p, end, eps),
    }
}

fn label(cfg: &mut Settings, l: Label) -> Result<QuantumNumbers> {
    let n = cfg.get("N", l.n, None)?;
    let j = cfg.get("j", l.j, None)?;
    let k = cfg.get("k", l.k, None)?;
    Ok(QuantumNumbers::new(n, j, k)?)
}

fn grid_size(cfg: &mut Settings, cli: Option<usize>, default: usize) -> Result<usize> {
    let n = cfg.get("grid", cli, Some(default))?;
    if n < 2 {
        return Err(Error::Domain(format!("grid = {n} needs at least 2 points")).into());
    }
    Ok(n)
}

fn stem(cmd: &str, qn: &QuantumNumbers) -> String {
    format!("{cmd}_N{}_j{}_k{}", qn.n, qn.j, qn.k)
}

fn spectrum(cfg: &mut Settings, sink: &Sink, n: Option<i64>, j_max: Option<i64>) -> Result<()> {
    cfg.restrict(&["N", "j-max"])?;
    let n = cfg.get("N", n, None)?;
    let j_max = cfg.get("j-max", j_max, Some(5))?;
    let rows = spectrum_table(n, j_max)?;
    let csv = || {
        let mut s = String::from("j,E,m,E_hat,m_hat\n");
        for r in &rows {
            writeln!(s, "{},{},{},{},{}", r.j, format_ratio(&r.e), r.m, format_ratio(&r.e_hat), r.m_hat)?;
        }
        Ok(s)
    };
    let meta = json!({ "N": n, "j_max": j_max, "config": cfg.echo() });
    let full = || json!({ "N": n, "j_max": j_max, "rows": rows, "config": cfg.echo() });
    sink.emit(&format!("spectrum_N{n}"), csv, meta, full)
}

fn exact(cfg: &mut Settings, sink: &Sink, l: Label, grid: Option<usize>, chart: Option<String>) -> Result<()> {
    cfg.restrict(&["N", "j", "k", "grid", "chart"])?;
    let qn = label(cfg, l)?;
    let grid = grid_size(cfg, grid, DEFAULT_SECTION_GRID)?;
    let chart: Chart = cfg.parsed("chart", chart, "u1")?;
    let h = harmonic_section(&qn)?;
    let thetas = polar_grid(grid, POLE_GUARD)?;
    let sampled = h.section.sample(&thetas)?;
    let meta = json!({
        "N": qn.n,
        "j": qn.j,
        "k": qn.k,
        "chart": chart,
        "m": qn.fourier_index(chart),
        "E": format_ratio(&h.eigenvalue),
        "multiplicity": multiplicity(qn.n, qn.j)?,
        "scale": h.scale,
        "printed_constant": printed_constant(&qn)?,
        "printed_norm": h.printed_norm,
        "theta_range": [thetas[0], thetas[grid - 1]],
        "config": cfg.echo(),
    });
    let full = || with_samples(meta.clone(), &sampled, chart);
    sink.emit(&format!("{}_{}", stem("exact", &qn), chart.as_str()), || Ok(sampled.to_csv(chart)?), meta.clone(), full)
}

fn with_samples(mut meta: Value, s: &monopole_core::Section, chart: Chart) -> Value {
    let (theta, values) = s.samples().expect("sampled section");
    let m = s.fourier_index(chart);
    let rows: Vec<Value> = theta
        .iter()
        .zip(values)
        .map(|(t, v)| json!({ "theta": t, "re": v.re, "im": v.im, "chart": chart, "m": m, "N": s.degree() }))
        .collect();
    meta["samples"] = Value::Array(rows);
    meta
}

fn end_kind(k: EndKind) -> &'static str {
    match k {
        EndKind::Fold => "fold",
        EndKind::Pole => "pole",
    }
}

fn wkb(
    cfg: &mut Settings,
    sink: &Sink,
    l: Label,
    chart: Option<String>,
    grid: Option<usize>,
    form: Option<String>,
) -> Result<()> {
    cfg.restrict(&["N", "j", "k", "chart", "grid", "form"])?;
    let qn = label(cfg, l)?;
    let chart: Chart = cfg.parsed("chart", chart, "u1")?;
    let grid = grid_size(cfg, grid, DEFAULT_SECTION_GRID)?;
    let form: WkbForm = cfg.parsed("form", form, "auto")?;
    let ws = WkbSection::new(qn)?;
    let section = ws.section(form)?;
    let (lo, hi) = ws.domain_of(form)?;
    // cell midpoints: the domain is open at both ends
    let thetas: Vec<f64> = (0..grid).map(|i| lo + (hi - lo) * (i as f64 + 0.5) / grid as f64).collect();
    let sampled = section.sample(&thetas)?;
    let t = &ws.torus;
    let meta = json!({
        "N": qn.n,
        "j": qn.j,
        "k": qn.k,
        "chart": chart,
        "m": qn.fourier_index(chart),
        "E": t.e,
        "P": t.p,
        "E_hat": format_ratio(&ws.params.e_hat),
        "u0": ws.u0,
        "u0_printed": ws.printed_u0(),
        "theta_min": t.theta_min,
        "theta_max": t.theta_max,
        "end_kinds": [end_kind(t.end_kind_min), end_kind(t.end_kind_max)],
        "degenerate": ws.is_degenerate(),
        "form": ws.resolve(form),
        "domain": [lo, hi],
        "collar": ws.collar,
        "config": cfg.echo(),
    });
    let full = || with_samples(meta.clone(), &sampled, chart);
    let name = format!("{}_{}_{}", stem("wkb", &qn), chart.as_str(), ws.resolve(form).as_str());
    sink.emit(&name, || Ok(sampled.to_csv(chart)?), meta.clone(), full)
}

const REPORT_COLUMNS: &str = "N,j,k,E_exact,E_hat,gap,overlap_defect,rel_residual_wkb,norm_wkb,degenerate,form,quadrature_order,u0_used,u0_paper_ratio,norm_wkb_printed_u0,uniform_gap,decay_ratio";

fn report_row(r: &ComparisonReport) -> String {
    let opt = |v: Option<f64>| v.map(fmt_f64).unwrap_or_default();
    format!(
        "{},{},{},{},{},{},{},{},{},{},{},{},{},{},{},{},{}",
        r.n,
        r.j,
        r.k,
        format_ratio(&r.e_exact),
        format_ratio(&r.e_hat),
        format_ratio(&r.gap),
        fmt_f64(r.overlap_defect),
        fmt_f64(r.rel_residual_wkb),
        fmt_f64(r.norm_wkb),
        r.degenerate,
        r.form.as_str(),
        r.quadrature_order,
        fmt_f64(r.u0_used),
        fmt_f64(r.u0_paper_ratio),
        fmt_f64(r.norm_wkb_printed_u0),
        opt(r.uniform_gap),
        opt(r.decay_ratio),
    )
}

fn compare(cfg: &mut Settings, sink: &Sink, l: Label, grid: Option<usize>) -> Result<()> {
    cfg.restrict(&["N", "j", "k", "grid"])?;
    let qn = label(cfg, l)?;
    let grid = grid_size(cfg, grid, DEFAULT_GRID)?;
    let report = run_compare(qn, grid)?;
    let mut full = serde_json::to_value(&report)?;
    full["config"] = cfg.echo();
    let csv = || Ok(format!("{REPORT_COLUMNS}\n{}\n", report_row(&report)));
    sink.emit(&stem("compare", &qn), csv, full.clone(), || full.clone())
}

fn sweep(
    cfg: &mut Settings,
    sink: &Sink,
    j: Option<String>,
    k: Option<String>,
    n_list: Option<Vec<i64>>,
    grid: Option<usize>,
) -> Result<()> {
    cfg.restrict(&["j", "k", "N-list", "grid"])?;
    let j: String = cfg.get("j", j, Some("1".into()))?;
    let k: String = cfg.get("k", k, Some("N/2".into()))?;
    let pattern = SweepPattern {
        j: IndexRule::parse(&j)?,
        k: IndexRule::parse(&k)?,
    };
    let n_list: Vec<i64> = cfg.get("N-list", n_list, Some(vec![4, 8, 16, 32]))?;
    if n_list.is_empty() {
        return Err(Error::Domain("empty --N-list".into()).into());
    }
    let grid = grid_size(cfg, grid, DEFAULT_GRID)?;
    let table = convergence_sweep(pattern, &n_list, grid);
    let adjudication = adjudicate_u0(&table).ok();
    let meta = json!({
        "pattern": { "j": pattern.j.to_string(), "k": pattern.k.to_string() },
        "grid": grid,
        "N_list": n_list,
        "ratios": table.ratios,
        "u0_adjudication": adjudication,
        "config": cfg.echo(),
    });
    let csv = || {
        let mut s = format!("{REPORT_COLUMNS},skipped\n");
        for row in &table.rows {
            match (&row.report, &row.skipped) {
                (Some(r), _) => writeln!(s, "{},", report_row(r))?,
                (None, reason) => {
                    let reason = reason.as_deref().unwrap_or("").replace(['"', '\n'], " ");
                    writeln!(s, "{}{}\"{reason}\"", row.n, ",".repeat(REPORT_COLUMNS.matches(',').count() + 1))?
                }
            }
        }
        Ok(s)
    };
    let full = || {
        let mut v = meta.clone();
        v["rows"] = serde_json::to_value(&table.rows).expect("rows serialise");
        v
    };
    let name = format!("sweep_j{}_k{}", j.replace('/', "_"), k.replace('/', "_"));
    sink.emit(&name, csv, meta.clone(), full)
}

fn parse_branch(s: &str) -> monopole_core::Result<Branch> {
    match s {
        "plus" => Ok(Branch::Plus),
        "minus" => Ok(Branch::Minus),
        other => Err(Error::Domain(format!("unknown branch {other:?} (expected plus or minus)"))),
    }
}

#[allow(clippy::too_many_arguments)]
fn flow(
    cfg: &mut Settings,
    sink: &Sink,
    e: Option<f64>,
    p: Option<f64>,
    theta: Option<f64>,
    phi: Option<f64>,
    branch: Option<String>,
    t: Option<f64>,
    tol: Option<f64>,
) -> Result<()> {
    cfg.restrict(&["E", "P", "theta", "phi", "branch", "T", "tol"])?;
    let e = cfg.get("E", e, None)?;
    let p = cfg.get("P", p, None)?;
    let torus = make_torus(e, p)?;
    let theta = cfg.get("theta", theta, Some(torus.theta_mid()))?;
    let phi = cfg.get("phi", phi, Some(0.0))?;
    let branch_name: String = cfg.get("branch", branch, Some("plus".into()))?;
    let branch = parse_branch(&branch_name)?;
    let duration = cfg.get("T", t, Some(DEFAULT_FLOW_TIME))?;
    let tol = cfg.get("tol", tol, Some(DEFAULT_FLOW_TOL))?;
    let start = PhaseState::on_torus(&torus, theta, phi, branch)?;
    let traj = integrate_flow(start, B_WKB, duration, tol)?;
    let meta = json!({
        "E": e,
        "P": p,
        "B": B_WKB,
        "start": start,
        "T": duration,
        "tol": tol,
        "steps": traj.samples.len() - 1,
        "max_drift_I1": traj.max_drift_i1,
        "max_drift_I2": traj.max_drift_i2,
        "config": cfg.echo(),
    });
    let csv = || {
        let mut s = String::from("t,theta,phi,ptheta,pphi,I1,I2\n");
        for f in &traj.samples {
            let st = f.state;
            let cols = [f.t, st.theta, st.phi, st.ptheta, st.pphi, f.i1, f.i2].map(fmt_f64);
            writeln!(s, "{}", cols.join(","))?;
        }
        Ok(s)
    };
    let full = || {
        let mut v = meta.clone();
        v["samples"] = serde_json::to_value(&traj.samples).expect("samples serialise");
        v
    };
    sink.emit("flow", csv, meta.clone(), full)
}

fn maslov(
    cfg: &mut Settings,
    sink: &Sink,
    e: Option<f64>,
    p: Option<f64>,
    end: Option<String>,
    eps: Option<Vec<f64>>,
) -> Result<()> {
    cfg.restrict(&["E", "P", "end", "eps"])?;
    let e = cfg.get("E", e, None)?;
    let p = cfg.get("P", p, None)?;
    let end_name: String = cfg.get("end", end, Some("min".into()))?;
    let end = match end_name.as_str() {
        "min" => End::Min,
        "max" => End::Max,
        other => return Err(Error::Domain(format!("unknown end {other:?} (expected min or max)")).into()),
    };
    let eps = cfg.get("eps", eps, Some(DEFAULT_EPS.to_vec()))?;
    let est = maslov_index_numeric(&make_torus(e, p)?, end, &eps)?;
    let body = json!({
        "E": est.e,
        "P": est.p,
        "eps": est.eps,
        "raw_estimates": est.raw_estimates,
        "index": est.index,
    });
    match sink.format {
        Format::Json => sink.emit_json("maslov", &body),
        Format::Csv => {
            let mut sidecar = body.clone();
            sidecar["extrapolated"] = json!(est.extrapolated);
            sidecar["config"] = cfg.echo();
            let csv = || {
                let mut s = String::from("eps,raw_estimate\n");
                for (x, r) in est.eps.iter().zip(&est.raw_estimates) {
                    writeln!(s, "{},{}", fmt_f64(*x), fmt_f64(*r))?;
                }
                Ok(s)
            };
            sink.emit("maslov", csv, sidecar, || body.clone())
        }
    }
}
