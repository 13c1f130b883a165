//! Comparison of quasi-classical and exact eigensections, convergence sweeps and
//! the spectrum table.

use std::f64::consts::PI;

use num_complex::Complex64;
use num_rational::Ratio;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::bundle::{apply_laplacian, inner_product_segments, Section, MAX_FD_STEP, POLE_GUARD};
use crate::error::{domain, Error, Result};
use crate::exact::{eigenvalue, harmonic_section, multiplicity};
use crate::specfun::{gauss_legendre, MAX_GAUSS_ORDER};
use crate::wkb::{quantized_params, QuantumNumbers, WkbForm, WkbSection};

/// Default number of Gauss nodes per segment for comparison integrals.
pub const DEFAULT_GRID: usize = 400;
/// Successive quadrature doublings must agree to this.
pub const QUADRATURE_AGREEMENT: f64 = 1e-9;
/// Distance below `θ_min` at which the evanescent decay is measured.
pub const DECAY_OFFSET: f64 = 0.2;

const GAP_SAMPLES: usize = 2000;

/// Result of comparing `U_{N,j,k}` with `Y_{N,j,k}`.
#[derive(Debug, Clone, Serialize)]
pub struct ComparisonReport {
    #[serde(rename = "N")]
    pub n: i64,
    pub j: i64,
    pub k: i64,
    #[serde(rename = "E_exact", serialize_with = "crate::rational::serialize")]
    pub e_exact: Ratio<i64>,
    #[serde(rename = "E_hat", serialize_with = "crate::rational::serialize")]
    pub e_hat: Ratio<i64>,
    #[serde(serialize_with = "crate::rational::serialize")]
    pub gap: Ratio<i64>,
    /// `1 - |⟨Y|U⟩| / (‖Y‖ ‖U‖)`
    pub overlap_defect: f64,
    /// `‖ΔU - Ê U‖ / (N² ‖U‖)`
    pub rel_residual_wkb: f64,
    pub norm_wkb: f64,
    pub degenerate: bool,
    pub form: WkbForm,
    pub theta_lo: f64,
    pub theta_hi: f64,
    pub quadrature_order: usize,
    pub u0_used: f64,
    /// printed `u₀` divided by the one used
    pub u0_paper_ratio: f64,
    /// `‖U‖` had the printed `u₀` been used
    pub norm_wkb_printed_u0: f64,
    /// fold collars at `θ_min`, `θ_max`
    #[serde(skip_serializing_if = "Option::is_none")]
    pub collar: Option<[f64; 2]>,
    /// sup of `|uniform - oscillatory|` on the collar-trimmed band over the sup of `|uniform|`
    #[serde(skip_serializing_if = "Option::is_none")]
    pub uniform_gap: Option<f64>,
    /// `|U(θ_min - 0.2)|` over the interior sup of `|U|`
    #[serde(skip_serializing_if = "Option::is_none")]
    pub decay_ratio: Option<f64>,
}

/// Quadrature breakpoints: the band ends, plus geometric refinement towards
/// any end of the range that sits next to a pole.
fn breakpoints(lo: f64, hi: f64, interior: &[f64]) -> Vec<f64> {
    let mut pts = vec![lo];
    let near_pole = 10.0 * POLE_GUARD;
    if lo > 0.0 && lo < near_pole {
        let mut t = 2.0 * lo;
        while t < near_pole.min(0.5 * hi) {
            pts.push(t);
            t *= 2.0;
        }
    }
    pts.extend(interior.iter().copied().filter(|&t| t > lo && t < hi));
    let mut tail = Vec::new();
    if PI - hi > 0.0 && PI - hi < near_pole {
        let mut d = 2.0 * (PI - hi);
        while d < near_pole.min(0.5 * (PI - lo)) {
            tail.push(PI - d);
            d *= 2.0;
        }
    }
    pts.extend(tail);
    pts.push(hi);
    pts.retain(|&t| t >= lo && t <= hi);
    pts.sort_by(f64::total_cmp);
    pts.dedup();
    pts
}

struct Overlaps {
    order: usize,
    norm_u: f64,
    norm_y: f64,
    overlap: Complex64,
}

impl Overlaps {
    fn defect(&self) -> f64 {
        (1.0 - self.overlap.norm() / (self.norm_u * self.norm_y)).clamp(0.0, 1.0)
    }
}

fn overlaps(u: &Section, y: &Section, order: usize, bps: &[f64]) -> Result<Overlaps> {
    let rule = gauss_legendre(order)?;
    let uu = inner_product_segments(u, u, &rule, bps)?;
    let yy = inner_product_segments(y, y, &rule, bps)?;
    let yu = inner_product_segments(y, u, &rule, bps)?;
    let vals = [uu.re, yy.re, yu.re, yu.im];
    if vals.iter().any(|v| !v.is_finite()) {
        return Err(Error::Numerical("non-finite overlap integral".into()));
    }
    Ok(Overlaps {
        order,
        norm_u: uu.re.max(0.0).sqrt(),
        norm_y: yy.re.max(0.0).sqrt(),
        overlap: yu,
    })
}

/// Doubles the rule order from `start` until norm and defect agree to 1e-9.
fn converged_overlaps(u: &Section, y: &Section, start: usize, bps: &[f64]) -> Result<Overlaps> {
    let mut prev = overlaps(u, y, start, bps)?;
    let mut order = start;
    while order < MAX_GAUSS_ORDER {
        order = (2 * order).min(MAX_GAUSS_ORDER);
        let next = overlaps(u, y, order, bps)?;
        if (next.norm_u - prev.norm_u).abs() <= QUADRATURE_AGREEMENT
            && (next.defect() - prev.defect()).abs() <= QUADRATURE_AGREEMENT
        {
            return Ok(next);
        }
        prev = next;
    }
    Err(Error::Resolution(format!(
        "overlap integrals still changing by more than {QUADRATURE_AGREEMENT:e} at {MAX_GAUSS_ORDER} nodes"
    )))
}

/// `‖ΔU - Ê U‖ / (N² ‖U‖)` with the Laplacian by finite differences at Gauss nodes
/// in `x = cos θ` on `[lo, hi]`.
fn relative_residual(ws: &WkbSection, u: &Section, order: usize, lo: f64, hi: f64) -> Result<f64> {
    let rule = gauss_legendre(order)?;
    let mut nodes: Vec<(f64, f64)> = rule
        .mapped(hi.cos(), lo.cos())
        .map(|(x, w)| (x.clamp(-1.0, 1.0).acos(), w))
        .collect();
    nodes.sort_by(|a, b| a.0.total_cmp(&b.0));
    let grid: Vec<f64> = nodes.iter().map(|p| p.0).collect();
    let lu = apply_laplacian(&u.bundle(), u, &grid)?;
    let (_, lvals) = lu.samples().expect("laplacian output is sampled");
    let e_hat = ws.e_hat();
    let (mut res, mut nrm) = (0.0, 0.0);
    for ((theta, w), lv) in nodes.iter().zip(lvals) {
        let uv = u.profile_at(*theta)?;
        res += w * (lv - e_hat * uv).norm_sqr();
        nrm += w * uv.norm_sqr();
    }
    if !(res.is_finite() && nrm > 0.0) {
        return Err(Error::Numerical("residual quadrature is not finite".into()));
    }
    let n = ws.qn.n as f64;
    Ok((res / nrm).sqrt() / (n * n))
}

/// Sup-gap between the uniform and oscillatory forms on the collar-trimmed
/// band, normalized by the sup of the uniform form there.
pub fn uniform_oscillatory_gap(ws: &WkbSection) -> Result<f64> {
    ws.domain_of(WkbForm::Airy)?;
    let (lo, hi) = ws.domain_of(WkbForm::Osc)?;
    let (mut gap, mut peak) = (0.0f64, 0.0f64);
    for i in 0..GAP_SAMPLES {
        let theta = lo + (hi - lo) * (i as f64 + 0.5) / GAP_SAMPLES as f64;
        let u = ws.uniform_profile(theta)?;
        let o = ws.oscillatory_profile(theta)?;
        gap = gap.max((u - o).norm());
        peak = peak.max(u.norm());
    }
    Ok(gap / peak)
}

/// `|U(θ_min - 0.2)|` over the sup of `|U|` on the band.
pub fn evanescent_decay(ws: &WkbSection) -> Result<Option<f64>> {
    ws.domain_of(WkbForm::Airy)?;
    let t = &ws.torus;
    let probe = t.theta_min - DECAY_OFFSET;
    if probe <= 0.0 {
        return Ok(None);
    }
    let mut peak = 0.0f64;
    for i in 0..GAP_SAMPLES {
        let theta = t.theta_min + (t.theta_max - t.theta_min) * (i as f64 + 0.5) / GAP_SAMPLES as f64;
        peak = peak.max(ws.uniform_profile(theta)?.norm());
    }
    Ok(Some(ws.uniform_profile(probe)?.norm() / peak))
}

/// Compares `U_{N,j,k}` (uniform form over the sphere, or the oscillatory form on
/// its reduced domain for pole-touching tori) with the normalized `Y_{N,j,k}`.
pub fn run_compare(qn: QuantumNumbers, grid_size: usize) -> Result<ComparisonReport> {
    if grid_size < 2 {
        return domain(format!("grid size {grid_size} too small"));
    }
    let ws = WkbSection::new(qn)?;
    let y = harmonic_section(&qn)?;
    let form = ws.resolve(WkbForm::Auto);
    let u = ws.section(form)?;
    let t = &ws.torus;
    let (lo, hi, interior, res_lo, res_hi) = match form {
        WkbForm::Osc => {
            let (lo, hi) = ws.domain_of(WkbForm::Osc)?;
            // keep the finite-difference stencils inside the domain
            let pad = 2.0 * MAX_FD_STEP;
            (lo, hi, vec![], lo + pad, hi - pad)
        }
        _ => (0.0, PI, vec![t.theta_min, t.theta_max], POLE_GUARD, PI - POLE_GUARD),
    };
    let bps = breakpoints(lo, hi, &interior);
    let ov = converged_overlaps(&u, &y.section, grid_size.min(MAX_GAUSS_ORDER), &bps)?;
    let rel_residual_wkb = relative_residual(&ws, &u, ov.order, res_lo, res_hi)?;
    let params = quantized_params(&qn);
    let e_exact = eigenvalue(qn.n, qn.j)?;
    let u0_paper_ratio = ws.printed_u0() / ws.u0;
    let degenerate = ws.is_degenerate();
    let (collar, uniform_gap, decay_ratio) = if degenerate {
        (None, None, None)
    } else {
        (
            Some(ws.collar),
            uniform_oscillatory_gap(&ws).ok(),
            evanescent_decay(&ws)?,
        )
    };
    Ok(ComparisonReport {
        n: qn.n,
        j: qn.j,
        k: qn.k,
        e_exact,
        e_hat: params.e_hat,
        gap: params.e_hat - e_exact,
        overlap_defect: ov.defect(),
        rel_residual_wkb,
        norm_wkb: ov.norm_u,
        degenerate,
        form,
        theta_lo: lo,
        theta_hi: hi,
        quadrature_order: ov.order,
        u0_used: ws.u0,
        u0_paper_ratio,
        norm_wkb_printed_u0: ov.norm_u * u0_paper_ratio,
        collar,
        uniform_gap,
        decay_ratio,
    })
}

/// How a sweep picks `j` or `k` from `N`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum IndexRule {
    Fixed(i64),
    /// `num · N / den`, which must be an integer
    Scaled { num: i64, den: i64 },
}

impl IndexRule {
    pub fn apply(&self, n: i64) -> Result<i64> {
        match *self {
            IndexRule::Fixed(v) => Ok(v),
            IndexRule::Scaled { num, den } => {
                if den == 0 {
                    return domain("index rule with zero denominator");
                }
                if (num * n) % den != 0 {
                    return domain(format!("{num}·{n}/{den} is not an integer"));
                }
                Ok(num * n / den)
            }
        }
    }

    /// Parses `7`, or `N/2`, `3N/4`, `N`.
    pub fn parse(s: &str) -> Result<Self> {
        let s = s.trim();
        if let Ok(v) = s.parse::<i64>() {
            return Ok(IndexRule::Fixed(v));
        }
        let (head, den) = match s.split_once('/') {
            Some((h, d)) => (
                h.trim(),
                d.trim()
                    .parse::<i64>()
                    .map_err(|_| Error::Domain(format!("bad index rule {s:?}")))?,
            ),
            None => (s, 1),
        };
        let num = match head.strip_suffix('N') {
            Some("") => 1,
            Some(c) => c
                .trim()
                .parse::<i64>()
                .map_err(|_| Error::Domain(format!("bad index rule {s:?}")))?,
            None => return domain(format!("bad index rule {s:?}")),
        };
        if den <= 0 {
            return domain(format!("bad index rule {s:?}"));
        }
        Ok(IndexRule::Scaled { num, den })
    }
}

impl std::fmt::Display for IndexRule {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match *self {
            IndexRule::Fixed(v) => write!(f, "{v}"),
            IndexRule::Scaled { num: 1, den: 1 } => f.write_str("N"),
            IndexRule::Scaled { num: 1, den } => write!(f, "N/{den}"),
            IndexRule::Scaled { num, den: 1 } => write!(f, "{num}N"),
            IndexRule::Scaled { num, den } => write!(f, "{num}N/{den}"),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct SweepPattern {
    pub j: IndexRule,
    pub k: IndexRule,
}

#[derive(Debug, Clone, Serialize)]
pub struct SweepRow {
    #[serde(rename = "N")]
    pub n: i64,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub report: Option<ComparisonReport>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub skipped: Option<String>,
}

/// Ratios of consecutive valid rows (later over earlier).
#[derive(Debug, Clone, Serialize)]
pub struct DoublingRatio {
    pub from_n: i64,
    pub to_n: i64,
    pub overlap_defect: f64,
    pub norm_error: f64,
    pub rel_residual: f64,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub uniform_gap: Option<f64>,
}

#[derive(Debug, Clone, Serialize)]
pub struct SweepTable {
    pub pattern: SweepPattern,
    pub grid: usize,
    pub rows: Vec<SweepRow>,
    pub ratios: Vec<DoublingRatio>,
}

impl SweepTable {
    pub fn reports(&self) -> impl Iterator<Item = &ComparisonReport> {
        self.rows.iter().filter_map(|r| r.report.as_ref())
    }
}

fn sweep_member(pattern: &SweepPattern, n: i64, grid: usize) -> Result<ComparisonReport> {
    let j = pattern.j.apply(n)?;
    let k = pattern.k.apply(n)?;
    run_compare(QuantumNumbers::new(n, j, k)?, grid)
}

/// Runs [`run_compare`] for each `N` in parallel. Members with invalid labels or
/// failing comparisons are kept as skipped rows; rows keep the order of `n_list`.
pub fn convergence_sweep(pattern: SweepPattern, n_list: &[i64], grid: usize) -> SweepTable {
    let rows: Vec<SweepRow> = n_list
        .par_iter()
        .map(|&n| match sweep_member(&pattern, n, grid) {
            Ok(report) => SweepRow {
                n,
                report: Some(report),
                skipped: None,
            },
            Err(e) => SweepRow {
                n,
                report: None,
                skipped: Some(e.to_string()),
            },
        })
        .collect();
    let valid: Vec<&ComparisonReport> = rows.iter().filter_map(|r| r.report.as_ref()).collect();
    let ratios = valid
        .windows(2)
        .map(|w| DoublingRatio {
            from_n: w[0].n,
            to_n: w[1].n,
            overlap_defect: w[1].overlap_defect / w[0].overlap_defect,
            norm_error: (w[1].norm_wkb - 1.0).abs() / (w[0].norm_wkb - 1.0).abs(),
            rel_residual: w[1].rel_residual_wkb / w[0].rel_residual_wkb,
            uniform_gap: w[0].uniform_gap.zip(w[1].uniform_gap).map(|(a, b)| b / a),
        })
        .collect();
    SweepTable {
        pattern,
        grid,
        rows,
        ratios,
    }
}

/// Which exponent of `(E + 1/4)` in `u₀ = (1/2π)(E + 1/4)^{e}` normalizes `U`.
#[derive(Debug, Clone, Serialize)]
pub struct U0Adjudication {
    pub printed_exponent: f64,
    pub quadrature_exponent: f64,
    /// `|‖U‖ - 1|` per row with `u₀ = μ^{-1/2}`
    pub norm_error_quadrature: Vec<f64>,
    /// `|‖U‖ - 1|` per row with the printed `u₀`
    pub norm_error_printed: Vec<f64>,
    pub winner: f64,
    pub winner_final_norm_error: f64,
}

/// Compares the printed and the quadrature-derived `u₀` on a sweep's rows.
pub fn adjudicate_u0(table: &SweepTable) -> Result<U0Adjudication> {
    let reports: Vec<&ComparisonReport> = table.reports().collect();
    let last = reports
        .last()
        .ok_or_else(|| Error::Domain("sweep has no valid rows".into()))?;
    let quad: Vec<f64> = reports.iter().map(|r| (r.norm_wkb - 1.0).abs()).collect();
    let printed: Vec<f64> = reports.iter().map(|r| (r.norm_wkb_printed_u0 - 1.0).abs()).collect();
    // the exponent actually realized by μ^{-1/2}
    let e = last.e_hat / (last.n * last.n);
    let ln_e = (crate::wkb::ratio_to_f64(e) + 0.25).ln();
    let quadrature_exponent = (2.0 * PI * last.u0_used).ln() / ln_e;
    let quad_last = *quad.last().unwrap();
    let printed_last = *printed.last().unwrap();
    let (winner, winner_final_norm_error) = if quad_last <= printed_last {
        (quadrature_exponent, quad_last)
    } else {
        (-0.25, printed_last)
    };
    Ok(U0Adjudication {
        printed_exponent: -0.25,
        quadrature_exponent,
        norm_error_quadrature: quad,
        norm_error_printed: printed,
        winner,
        winner_final_norm_error,
    })
}

/// One level of the spectrum.
#[derive(Debug, Clone, Serialize)]
pub struct SpectrumRow {
    pub j: i64,
    #[serde(rename = "E", serialize_with = "crate::rational::serialize")]
    pub e: Ratio<i64>,
    pub m: i64,
    #[serde(rename = "E_hat", serialize_with = "crate::rational::serialize")]
    pub e_hat: Ratio<i64>,
    pub m_hat: i64,
}

/// Exact levels next to the Bohr–Sommerfeld ones for `j = 0..=j_max`.
pub fn spectrum_table(n: i64, j_max: i64) -> Result<Vec<SpectrumRow>> {
    if j_max < 0 {
        return domain(format!("j_max = {j_max} must be non-negative"));
    }
    (0..=j_max)
        .map(|j| {
            let qp = quantized_params(&QuantumNumbers::new(n, j, 0)?);
            let row = SpectrumRow {
                j,
                e: eigenvalue(n, j)?,
                m: multiplicity(n, j)?,
                e_hat: qp.e_hat,
                m_hat: qp.m_hat,
            };
            if row.m != row.m_hat || row.e_hat - row.e != Ratio::new(1, 4) {
                return Err(Error::Inconsistency(format!(
                    "level (N={n}, j={j}) breaks m = m̂ or Ê - E = 1/4"
                )));
            }
            Ok(row)
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn spectrum_rows() {
        let t = spectrum_table(1, 2).unwrap();
        assert_eq!((t[0].e, t[0].m, t[0].e_hat, t[0].m_hat), (Ratio::new(1, 2), 2, Ratio::new(3, 4), 2));
        let t = spectrum_table(2, 1).unwrap();
        assert_eq!((t[1].e, t[1].m, t[1].e_hat, t[1].m_hat), (Ratio::from_integer(5), 5, Ratio::new(21, 4), 5));
        assert!(spectrum_table(0, 1).is_err());
    }

    #[test]
    fn index_rules() {
        assert_eq!(IndexRule::parse("N/2").unwrap().apply(8).unwrap(), 4);
        assert_eq!(IndexRule::parse("3N/4").unwrap().apply(8).unwrap(), 6);
        assert_eq!(IndexRule::parse("N").unwrap().apply(5).unwrap(), 5);
        assert_eq!(IndexRule::parse("-2").unwrap(), IndexRule::Fixed(-2));
        assert!(IndexRule::parse("N/2").unwrap().apply(7).is_err());
        assert!(IndexRule::parse("M/2").is_err());
        assert_eq!(IndexRule::parse("3N/4").unwrap().to_string(), "3N/4");
    }

    #[test]
    fn breakpoint_layout() {
        let b = breakpoints(0.0, PI, &[0.5, 2.5]);
        assert_eq!(b, vec![0.0, 0.5, 2.5, PI]);
        let b = breakpoints(1e-3, 2.0, &[]);
        assert_eq!(b[0], 1e-3);
        assert!(b.windows(2).all(|w| w[0] < w[1]));
        assert!(b.len() > 3);
    }

    #[test]
    fn compare_reports() {
        let r = run_compare(QuantumNumbers::new(8, 1, 4).unwrap(), DEFAULT_GRID).unwrap();
        assert_eq!(r.gap, Ratio::new(1, 4));
        assert!(!r.degenerate);
        assert!((0.0..=1.0).contains(&r.overlap_defect));
        assert!(r.uniform_gap.is_some() && r.collar.is_some());
        assert!(r.overlap_defect < 1e-3);
        // in the j = N/4 family the defect falls with N
        let r4 = run_compare(QuantumNumbers::new(4, 1, 2).unwrap(), DEFAULT_GRID).unwrap();
        let r8 = run_compare(QuantumNumbers::new(8, 2, 4).unwrap(), DEFAULT_GRID).unwrap();
        assert!(r8.overlap_defect < r4.overlap_defect);
        let t = run_compare(QuantumNumbers::new(1, 0, 0).unwrap(), DEFAULT_GRID).unwrap();
        assert!(t.degenerate && t.collar.is_none());
        assert!(t.overlap_defect < 1.0);
    }

    #[test]
    fn sweep_skips_invalid_members() {
        let pattern = SweepPattern {
            j: IndexRule::Fixed(0),
            k: IndexRule::parse("N/2").unwrap(),
        };
        let table = convergence_sweep(pattern, &[3, 4, 6], 100);
        assert!(table.rows[0].skipped.is_some());
        assert_eq!(table.reports().count(), 2);
        assert_eq!(table.ratios.len(), 1);
        assert_eq!((table.ratios[0].from_n, table.ratios[0].to_n), (4, 6));
    }
}
