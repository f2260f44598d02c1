//! Serialization of solver and simulator outputs: JSON documents with a
//! stable field order, CSV trajectories with fixed formatting, and a
//! four-panel SVG snapshot of one simulated path.
//!
//! Every export here is a pure function of its inputs — identical inputs
//! yield byte-identical output.

use std::fmt::Write as _;

use serde::Serialize;

use crate::analysis::{ClosedLoopReport, CostBreakdown};
use crate::ce::{CESolution, PeriodicSolution};
use crate::engine::{MonteCarloSummary, TrajectoryRecord};
use crate::error::{Error, Result};
use crate::model::DominanceClass;

/// Formats with 12 significant digits, trailing zeros trimmed (the behavior
/// of C's `%.12g`): fixed notation for moderate exponents, scientific
/// otherwise.
pub(crate) fn fmt_sig12(x: f64) -> String {
    if x == 0.0 {
        return "0".to_string();
    }
    if x.is_nan() {
        return "nan".to_string();
    }
    if x.is_infinite() {
        return if x > 0.0 { "inf" } else { "-inf" }.to_string();
    }
    // Let the exponential formatter do the rounding, then read the exponent
    // off the rounded value so boundary cases (999.99… → 1000) stay exact.
    let sci = format!("{x:.11e}");
    let (mantissa, exp_str) = sci.split_once('e').expect("float formats with an exponent");
    let exp: i32 = exp_str.parse().expect("exponent is an integer");
    if -5 < exp && exp < 12 {
        let prec = (11 - exp).max(0) as usize;
        let fixed = format!("{x:.prec$}");
        trim_zeros(&fixed).to_string()
    } else {
        format!("{}e{exp}", trim_zeros(mantissa))
    }
}

fn trim_zeros(s: &str) -> &str {
    if s.contains('.') {
        s.trim_end_matches('0').trim_end_matches('.')
    } else {
        s
    }
}

#[derive(Serialize)]
struct PlanDoc {
    n: usize,
    instants: Vec<f64>,
    instants_display: Vec<String>,
}

impl PlanDoc {
    fn new(instants: &[f64]) -> Self {
        PlanDoc {
            n: instants.len(),
            instants: instants.to_vec(),
            instants_display: instants.iter().map(|t| format!("{t:.2}")).collect(),
        }
    }
}

#[derive(Serialize)]
struct FRow {
    n: usize,
    f: f64,
}

#[derive(Serialize)]
struct SolutionDoc<'a> {
    class: &'static str,
    #[serde(skip_serializing_if = "Option::is_none")]
    reason: Option<&'static str>,
    observe_always: bool,
    objective: f64,
    pursuer: PlanDoc,
    evader: PlanDoc,
    n_upper: usize,
    n_upper_tight: usize,
    first_order_residuals: &'a [f64],
    f_table: Vec<FRow>,
}

fn class_name(class: DominanceClass) -> &'static str {
    match class {
        DominanceClass::PursuerDominant => "pursuer_dominant",
        DominanceClass::Equal => "equal",
        DominanceClass::NotDominant => "not_dominant",
    }
}

/// Pretty JSON for a scheduling solution: plans with both full-precision and
/// two-decimal display instants, the enumeration table, bounds and residuals.
pub fn export_solution_json(sol: &CESolution) -> Result<String> {
    let doc = SolutionDoc {
        class: class_name(sol.class),
        reason: (sol.class == DominanceClass::Equal).then_some("equal maneuverability"),
        observe_always: sol.observe_always,
        objective: sol.objective,
        pursuer: PlanDoc::new(sol.pursuer_plan.instants()),
        evader: PlanDoc::new(sol.evader_plan.instants()),
        n_upper: sol.n_upper,
        n_upper_tight: sol.n_upper_tight,
        first_order_residuals: &sol.first_order_residuals,
        f_table: sol.f_table.iter().map(|&(n, f)| FRow { n, f }).collect(),
    };
    serde_json::to_string_pretty(&doc).map_err(|e| Error::Parse(format!("JSON emit failed: {e}")))
}

#[derive(Serialize)]
struct EigDoc {
    re: f64,
    im: f64,
}

#[derive(Serialize)]
struct PeriodicDoc {
    dt_star: f64,
    avg_cost: f64,
    second_derivative: f64,
    residual: f64,
    #[serde(skip_serializing_if = "Option::is_none")]
    eigenvalues: Option<Vec<EigDoc>>,
    #[serde(skip_serializing_if = "Option::is_none")]
    hurwitz: Option<bool>,
    #[serde(skip_serializing_if = "Option::is_none")]
    sampled_radius: Option<f64>,
}

/// Pretty JSON for the steady-rhythm solution, optionally with the
/// closed-loop spectrum report evaluated at `Δ*`.
pub fn export_periodic_json(
    per: &PeriodicSolution,
    loop_report: Option<&ClosedLoopReport>,
) -> Result<String> {
    let doc = PeriodicDoc {
        dt_star: per.dt_star,
        avg_cost: per.avg_cost,
        second_derivative: per.second_derivative,
        residual: per.residual,
        eigenvalues: loop_report.map(|r| {
            r.eigenvalues
                .iter()
                .map(|l| EigDoc { re: l.re, im: l.im })
                .collect()
        }),
        hurwitz: loop_report.map(|r| r.hurwitz),
        sampled_radius: loop_report.map(|r| r.sampled_radius),
    };
    serde_json::to_string_pretty(&doc).map_err(|e| Error::Parse(format!("JSON emit failed: {e}")))
}

#[derive(Serialize)]
struct BreakdownDoc {
    estimation_term: f64,
    obs_price_term: f64,
    baseline_term: f64,
    total: f64,
}

#[derive(Serialize)]
struct MonteCarloDoc<'a> {
    m: usize,
    mean_cost: f64,
    std_cost: f64,
    ci95_halfwidth: f64,
    mean_terminal_distance: f64,
    #[serde(skip_serializing_if = "Option::is_none")]
    expected: Option<BreakdownDoc>,
    #[serde(skip_serializing_if = "Option::is_none")]
    mean_minus_expected: Option<f64>,
    costs: &'a [f64],
}

/// Pretty JSON for a Monte Carlo batch, optionally comparing the sample mean
/// against the closed-form expectation.
pub fn export_monte_carlo_json(
    summary: &MonteCarloSummary,
    expected: Option<&CostBreakdown>,
) -> Result<String> {
    let doc = MonteCarloDoc {
        m: summary.m,
        mean_cost: summary.mean_cost,
        std_cost: summary.std_cost,
        ci95_halfwidth: summary.ci95_halfwidth,
        mean_terminal_distance: summary.mean_terminal_distance,
        expected: expected.map(|b| BreakdownDoc {
            estimation_term: b.estimation_term,
            obs_price_term: b.obs_price_term,
            baseline_term: b.baseline_term,
            total: b.total,
        }),
        mean_minus_expected: expected.map(|b| summary.mean_cost - b.total),
        costs: &summary.costs,
    };
    serde_json::to_string_pretty(&doc).map_err(|e| Error::Parse(format!("JSON emit failed: {e}")))
}

/// One row of a price-sweep table.
#[derive(Debug, Clone)]
pub struct SweepRow {
    /// Price value this row was solved at.
    pub op: f64,
    /// Optimal snapshot count.
    pub n_star: usize,
    /// Objective at the optimum.
    pub objective: f64,
}

/// CSV table of a price sweep: `Op,Np,F` with LF line endings.
pub fn export_sweep_csv(rows: &[SweepRow]) -> String {
    let mut out = String::from("Op,Np,F\n");
    for r in rows {
        let _ = writeln!(
            out,
            "{},{},{}",
            fmt_sig12(r.op),
            r.n_star,
            fmt_sig12(r.objective)
        );
    }
    out
}

/// CSV of one simulated path. Header:
/// `t,x1..xn,xhat1..xhatn,up1..up{m_p},ue1..ue{m_e},obs,cost_to_date`;
/// values carry 12 significant digits, `obs` is 0/1, line endings are LF.
pub fn export_trajectory_csv(rec: &TrajectoryRecord) -> String {
    let n = rec.states.first().map_or(0, |v| v.len());
    let m_p = rec.controls_p.first().map_or(0, |v| v.len());
    let m_e = rec.controls_e.first().map_or(0, |v| v.len());
    let mut header = String::from("t");
    for i in 1..=n {
        let _ = write!(header, ",x{i}");
    }
    for i in 1..=n {
        let _ = write!(header, ",xhat{i}");
    }
    for i in 1..=m_p {
        let _ = write!(header, ",up{i}");
    }
    for i in 1..=m_e {
        let _ = write!(header, ",ue{i}");
    }
    header.push_str(",obs,cost_to_date\n");

    let mut out = header;
    for i in 0..rec.times.len() {
        let _ = write!(out, "{}", fmt_sig12(rec.times[i]));
        for v in rec.states[i].iter() {
            let _ = write!(out, ",{}", fmt_sig12(*v));
        }
        for v in rec.estimates[i].iter() {
            let _ = write!(out, ",{}", fmt_sig12(*v));
        }
        for v in rec.controls_p[i].iter() {
            let _ = write!(out, ",{}", fmt_sig12(*v));
        }
        for v in rec.controls_e[i].iter() {
            let _ = write!(out, ",{}", fmt_sig12(*v));
        }
        let _ = writeln!(
            out,
            ",{},{}",
            u8::from(rec.obs_flags[i]),
            fmt_sig12(rec.cost_to_date[i])
        );
    }
    out
}

/// Visual options for [`emit_plot_svg`].
#[derive(Debug, Clone, Default)]
pub struct PlotStyle {
    /// Which two state components are the plane coordinates. Defaults to
    /// `(0, 1)` for four-state layouts `(y1, y2, v1, v2)`; any other state
    /// dimension requires an explicit pair.
    pub position_indices: Option<(usize, usize)>,
}

struct Frame {
    x0: f64,
    y0: f64,
    w: f64,
    h: f64,
    xr: (f64, f64),
    yr: (f64, f64),
}

impl Frame {
    fn px(&self, x: f64) -> f64 {
        self.x0 + (x - self.xr.0) / (self.xr.1 - self.xr.0) * self.w
    }
    fn py(&self, y: f64) -> f64 {
        // SVG y grows downward.
        self.y0 + self.h - (y - self.yr.0) / (self.yr.1 - self.yr.0) * self.h
    }
}

fn padded_range(vals: impl Iterator<Item = f64>) -> (f64, f64) {
    let (mut lo, mut hi) = (f64::INFINITY, f64::NEG_INFINITY);
    for v in vals {
        lo = lo.min(v);
        hi = hi.max(v);
    }
    if !lo.is_finite() || !hi.is_finite() {
        return (0.0, 1.0);
    }
    let span = (hi - lo).max(1e-12);
    (lo - 0.05 * span, hi + 0.05 * span)
}

fn polyline(out: &mut String, frame: &Frame, pts: impl Iterator<Item = (f64, f64)>, style: &str) {
    let _ = write!(out, "  <polyline fill=\"none\" {style} points=\"");
    for (x, y) in pts {
        let _ = write!(out, "{:.2},{:.2} ", frame.px(x), frame.py(y));
    }
    out.truncate(out.trim_end_matches(' ').len());
    let _ = writeln!(out, "\"/>");
}

#[allow(clippy::too_many_arguments)]
fn panel_frame(
    out: &mut String,
    col: usize,
    row: usize,
    title: &str,
    xr: (f64, f64),
    yr: (f64, f64),
) -> Frame {
    const MARGIN: f64 = 46.0;
    const PW: f64 = 420.0;
    const PH: f64 = 300.0;
    let x0 = MARGIN + col as f64 * (PW + MARGIN);
    let y0 = MARGIN + row as f64 * (PH + MARGIN);
    let _ = writeln!(
        out,
        "  <rect x=\"{x0:.2}\" y=\"{y0:.2}\" width=\"{PW}\" height=\"{PH}\" \
         fill=\"none\" stroke=\"#333\" stroke-width=\"1\"/>"
    );
    let _ = writeln!(
        out,
        "  <text x=\"{:.2}\" y=\"{:.2}\" font-size=\"14\" text-anchor=\"middle\" \
         font-family=\"sans-serif\">{title}</text>",
        x0 + PW / 2.0,
        y0 - 10.0
    );
    for (v, anchor, tx, ty) in [
        (xr.0, "start", x0, y0 + PH + 16.0),
        (xr.1, "end", x0 + PW, y0 + PH + 16.0),
    ] {
        let _ = writeln!(
            out,
            "  <text x=\"{tx:.2}\" y=\"{ty:.2}\" font-size=\"11\" text-anchor=\"{anchor}\" \
             font-family=\"sans-serif\">{}</text>",
            format_args!("{v:.2}")
        );
    }
    for (v, ty) in [(yr.1, y0 + 12.0), (yr.0, y0 + PH - 2.0)] {
        let _ = writeln!(
            out,
            "  <text x=\"{:.2}\" y=\"{ty:.2}\" font-size=\"11\" text-anchor=\"end\" \
             font-family=\"sans-serif\">{}</text>",
            x0 - 4.0,
            format_args!("{v:.2}")
        );
    }
    Frame {
        x0,
        y0,
        w: PW,
        h: PH,
        xr,
        yr,
    }
}

/// Renders one simulated path as a four-panel SVG:
///
/// 1. the path in the plane (truth solid, estimate dashed, snapshots marked),
/// 2. both position components against time,
/// 3. the estimation error norm against time (drops to zero at snapshots),
/// 4. the plane distance against time.
pub fn emit_plot_svg(rec: &TrajectoryRecord, style: &PlotStyle) -> Result<String> {
    let n = rec.states.first().map_or(0, |v| v.len());
    let (ix, iy) = match style.position_indices {
        Some(pair) => pair,
        None if n == 4 => (0, 1),
        None => {
            return Err(Error::UnsupportedLayout(format!(
                "no default plane layout for a {n}-state game; set position_indices"
            )))
        }
    };
    if ix >= n || iy >= n {
        return Err(Error::UnsupportedLayout(format!(
            "position indices ({ix}, {iy}) out of range for a {n}-state game"
        )));
    }
    let len = rec.times.len();
    let err_norm: Vec<f64> = (0..len)
        .map(|i| (&rec.states[i] - &rec.estimates[i]).norm())
        .collect();
    let dist: Vec<f64> = (0..len)
        .map(|i| (rec.states[i][ix].powi(2) + rec.states[i][iy].powi(2)).sqrt())
        .collect();
    let tr = (rec.times[0], rec.times[len - 1]);

    let mut out = String::new();
    let _ = writeln!(
        out,
        "<svg xmlns=\"http://www.w3.org/2000/svg\" viewBox=\"0 0 978 738\" \
         width=\"978\" height=\"738\">"
    );
    let _ = writeln!(out, "  <rect width=\"978\" height=\"738\" fill=\"white\"/>");

    // Panel 1: plane trajectory.
    let xr = padded_range(
        rec.states
            .iter()
            .map(|s| s[ix])
            .chain(rec.estimates.iter().map(|s| s[ix])),
    );
    let yr = padded_range(
        rec.states
            .iter()
            .map(|s| s[iy])
            .chain(rec.estimates.iter().map(|s| s[iy])),
    );
    let f = panel_frame(&mut out, 0, 0, "relative position (plane)", xr, yr);
    polyline(
        &mut out,
        &f,
        rec.estimates.iter().map(|s| (s[ix], s[iy])),
        "stroke=\"#b65\" stroke-width=\"1\" stroke-dasharray=\"4 3\"",
    );
    polyline(
        &mut out,
        &f,
        rec.states.iter().map(|s| (s[ix], s[iy])),
        "stroke=\"#146\" stroke-width=\"1.5\"",
    );
    for i in 0..len {
        if rec.obs_flags[i] {
            let _ = writeln!(
                out,
                "  <circle cx=\"{:.2}\" cy=\"{:.2}\" r=\"4\" fill=\"#d22\"/>",
                f.px(rec.states[i][ix]),
                f.py(rec.states[i][iy])
            );
        }
    }
    let _ = writeln!(
        out,
        "  <circle cx=\"{:.2}\" cy=\"{:.2}\" r=\"4\" fill=\"#146\"/>",
        f.px(rec.states[0][ix]),
        f.py(rec.states[0][iy])
    );

    // Panel 2: position components against time.
    let yr2 = padded_range(rec.states.iter().flat_map(|s| [s[ix], s[iy]]));
    let f2 = panel_frame(&mut out, 1, 0, "position components", tr, yr2);
    polyline(
        &mut out,
        &f2,
        rec.times.iter().zip(&rec.states).map(|(&t, s)| (t, s[ix])),
        "stroke=\"#146\" stroke-width=\"1.5\"",
    );
    polyline(
        &mut out,
        &f2,
        rec.times.iter().zip(&rec.states).map(|(&t, s)| (t, s[iy])),
        "stroke=\"#2a7\" stroke-width=\"1.5\"",
    );

    // Panel 3: estimation error norm with snapshot markers.
    let yr3 = padded_range(err_norm.iter().copied().chain([0.0]));
    let f3 = panel_frame(&mut out, 0, 1, "estimation error |x - xhat|", tr, yr3);
    polyline(
        &mut out,
        &f3,
        rec.times.iter().copied().zip(err_norm.iter().copied()),
        "stroke=\"#b65\" stroke-width=\"1.5\"",
    );
    for i in 0..len {
        if rec.obs_flags[i] {
            let _ = writeln!(
                out,
                "  <circle cx=\"{:.2}\" cy=\"{:.2}\" r=\"4\" fill=\"#d22\"/>",
                f3.px(rec.times[i]),
                f3.py(err_norm[i])
            );
        }
    }

    // Panel 4: plane distance against time.
    let yr4 = padded_range(dist.iter().copied().chain([0.0]));
    let f4 = panel_frame(&mut out, 1, 1, "relative distance", tr, yr4);
    polyline(
        &mut out,
        &f4,
        rec.times.iter().copied().zip(dist.iter().copied()),
        "stroke=\"#146\" stroke-width=\"1.5\"",
    );

    out.push_str("</svg>\n");
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::ce::ObservationPlan;
    use crate::engine::simulate;
    use crate::lqg::solve_riccati_finite;
    use crate::testutil::{double_integrator_spec, scalar_stationary_spec};

    #[test]
    fn twelve_significant_digits_with_g_semantics() {
        assert_eq!(fmt_sig12(0.0), "0");
        assert_eq!(fmt_sig12(2.06), "2.06");
        assert_eq!(fmt_sig12(-2.06), "-2.06");
        assert_eq!(fmt_sig12(0.001), "0.001");
        assert_eq!(fmt_sig12(1e-7), "1e-7");
        assert_eq!(fmt_sig12(1e15), "1e15");
        assert_eq!(fmt_sig12(1000.0), "1000");
        assert_eq!(fmt_sig12(std::f64::consts::PI), "3.14159265359");
        assert_eq!(fmt_sig12(123.456789), "123.456789");
        assert_eq!(fmt_sig12(f64::INFINITY), "inf");
        // Round-trip stays within one part in 1e11.
        for &x in &[1.0 / 3.0, 6e-5, 97.53, 1.23456789e-9] {
            let back: f64 = fmt_sig12(x).parse().unwrap();
            assert!((back - x).abs() <= 1e-11 * x.abs());
        }
    }

    #[test]
    fn trajectory_csv_has_the_exact_header_and_lf_endings() {
        let spec = double_integrator_spec(900.0);
        let ricc = solve_riccati_finite(&spec, 256).unwrap();
        // 2.03 is off the 0.1 grid, so it must be spliced in as its own row.
        let plan = ObservationPlan::new(vec![2.03], 6.0).unwrap();
        let rec = simulate(&spec, &ricc, &plan, &ObservationPlan::empty(), 3, 60).unwrap();
        let csv = export_trajectory_csv(&rec);
        let mut lines = csv.lines();
        assert_eq!(
            lines.next().unwrap(),
            "t,x1,x2,x3,x4,xhat1,xhat2,xhat3,xhat4,up1,up2,ue1,ue2,obs,cost_to_date"
        );
        assert!(!csv.contains('\r'));
        assert!(csv.ends_with('\n'));
        // 61 uniform nodes plus the inserted instant.
        assert_eq!(csv.lines().count(), 1 + 62);
        let obs_rows = csv
            .lines()
            .skip(1)
            .filter(|l| l.split(',').nth(13) == Some("1"))
            .count();
        assert_eq!(obs_rows, 1);
        // Byte determinism.
        assert_eq!(csv, export_trajectory_csv(&rec));
    }

    #[test]
    fn scalar_csv_header_adapts_to_dimensions() {
        let spec = scalar_stationary_spec(2.0, 10.0, 6.0);
        let ricc = solve_riccati_finite(&spec, 128).unwrap();
        let rec = simulate(
            &spec,
            &ricc,
            &ObservationPlan::empty(),
            &ObservationPlan::empty(),
            1,
            10,
        )
        .unwrap();
        let csv = export_trajectory_csv(&rec);
        assert_eq!(
            csv.lines().next().unwrap(),
            "t,x1,xhat1,up1,ue1,obs,cost_to_date"
        );
    }

    #[test]
    fn solution_json_carries_display_instants_and_reason() {
        use crate::ce::solve_ce_game;
        use crate::lqg::GramianCache;
        let spec = scalar_stationary_spec(2.0, 20.0, 6.0);
        let ricc = solve_riccati_finite(&spec, 512).unwrap();
        let gram = GramianCache::new(&spec, ricc.grid().clone()).unwrap();
        let sol = solve_ce_game(&spec, &gram, &ricc).unwrap();
        let json = export_solution_json(&sol).unwrap();
        let v: serde_json::Value = serde_json::from_str(&json).unwrap();
        assert_eq!(v["class"], "pursuer_dominant");
        assert!(v.get("reason").is_none());
        assert_eq!(v["pursuer"]["n"], 1);
        assert_eq!(v["pursuer"]["instants_display"][0], "3.00");
        assert!(v["f_table"].as_array().unwrap().len() >= 2);

        let mut equal = sol.clone();
        equal.class = DominanceClass::Equal;
        let json2 = export_solution_json(&equal).unwrap();
        let v2: serde_json::Value = serde_json::from_str(&json2).unwrap();
        assert_eq!(v2["reason"], "equal maneuverability");
    }

    #[test]
    fn sweep_csv_formats_infinite_prices() {
        let rows = vec![
            SweepRow {
                op: 10.0,
                n_star: 25,
                objective: 789.25,
            },
            SweepRow {
                op: f64::INFINITY,
                n_star: 0,
                objective: 25000.0,
            },
        ];
        let csv = export_sweep_csv(&rows);
        assert_eq!(csv, "Op,Np,F\n10,25,789.25\ninf,0,25000\n");
    }

    #[test]
    fn svg_renders_four_panels_deterministically() {
        let spec = double_integrator_spec(900.0);
        let ricc = solve_riccati_finite(&spec, 256).unwrap();
        let plan = ObservationPlan::new(vec![2.0, 4.0], 6.0).unwrap();
        let rec = simulate(&spec, &ricc, &plan, &ObservationPlan::empty(), 5, 120).unwrap();
        let svg = emit_plot_svg(&rec, &PlotStyle::default()).unwrap();
        assert!(svg.starts_with("<svg"));
        assert!(svg.ends_with("</svg>\n"));
        assert_eq!(svg.matches("<rect").count(), 1 + 4);
        assert!(svg.matches("<circle").count() >= 5);
        assert_eq!(svg, emit_plot_svg(&rec, &PlotStyle::default()).unwrap());
    }

    #[test]
    fn svg_needs_a_layout_for_unusual_dimensions() {
        let spec = scalar_stationary_spec(2.0, 10.0, 6.0);
        let ricc = solve_riccati_finite(&spec, 128).unwrap();
        let rec = simulate(
            &spec,
            &ricc,
            &ObservationPlan::empty(),
            &ObservationPlan::empty(),
            1,
            10,
        )
        .unwrap();
        assert!(matches!(
            emit_plot_svg(&rec, &PlotStyle::default()),
            Err(Error::UnsupportedLayout(_))
        ));
        let styled = PlotStyle {
            position_indices: Some((0, 0)),
        };
        assert!(emit_plot_svg(&rec, &styled).is_ok());
        let bad = PlotStyle {
            position_indices: Some((0, 5)),
        };
        assert!(emit_plot_svg(&rec, &bad).is_err());
    }
}
