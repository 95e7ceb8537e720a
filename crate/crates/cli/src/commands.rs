use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};

use anyhow::{bail, ensure, Context, Result};
use bcoutage::{
    analytic_outage, containment_check, mc_outage, optimal_alpha, star_frontier, td_frontier,
    td_rate, DirtyPaperChannel64, FadingModel64, Frontier64, FrontierPoint, PowerAllocation64,
    RatePoint64, Scheme, SystemSpec64, TimeSharingPolicy64,
};
use serde::Serialize;
use serde_json::{json, Value};

use crate::config::RunConfig;
use crate::svg::{Plot, Series};

/// Grid per axis of the time-sharing sweep.
pub const TD_GRID: usize = 201;

/// Result of a subcommand: a JSON summary and, if an invariant failed, why.
#[derive(Debug)]
pub struct Outcome {
    pub summary: Value,
    pub violation: Option<String>,
}

impl Outcome {
    fn ok(summary: Value) -> Self {
        Self {
            summary,
            violation: None,
        }
    }
}

fn write_file(out: &Path, name: &str, contents: &str) -> Result<PathBuf> {
    fs::create_dir_all(out).with_context(|| format!("cannot create {}", out.display()))?;
    let path = out.join(name);
    fs::write(&path, contents).with_context(|| format!("cannot write {}", path.display()))?;
    Ok(path)
}

fn display(paths: &[PathBuf]) -> Vec<String> {
    paths.iter().map(|p| p.display().to_string()).collect()
}

/// `user,epsilon,quantile` in configuration order; `t` replaces every epsilon.
pub fn quantile(cfg: &RunConfig, t: Option<f64>) -> Result<String> {
    let mut csv = String::from("user,epsilon,quantile\n");
    for (i, (user, model)) in cfg.users.iter().zip(cfg.models()?).enumerate() {
        let level = t.unwrap_or(user.epsilon);
        let q = model.quantile(level)?;
        let _ = writeln!(csv, "{},{},{}", i + 1, level, q);
    }
    Ok(csv)
}

/// Re-expresses a frontier computed on sorted users in configuration order.
fn to_original(spec: &SystemSpec64, f: Frontier64) -> Frontier64 {
    let scheme = f.scheme();
    let points = f
        .points()
        .iter()
        .map(|p| {
            let params = match scheme {
                Scheme::Star => spec.to_original_order(&p.params),
                Scheme::TimeSharing => {
                    let pairs: Vec<[f64; 2]> = p.params.chunks(2).map(|c| [c[0], c[1]]).collect();
                    spec.to_original_order(&pairs).concat()
                }
            };
            let rate = RatePoint64::new(spec.to_original_order(p.rate.as_slice()))
                .expect("permuted rates stay valid");
            FrontierPoint { params, rate }
        })
        .collect();
    Frontier64::from_points(scheme, f.num_users(), points)
}

fn curve(f: &Frontier64) -> Vec<(f64, f64)> {
    f.points()
        .iter()
        .map(|p| (p.rate.as_slice()[0], p.rate.as_slice()[1]))
        .collect()
}

fn intercepts(f: &Frontier64) -> (f64, f64) {
    let r1 = f.extreme(0).map_or(0.0, |p| p.rate.as_slice()[0]);
    let r2 = f.extreme(1).map_or(0.0, |p| p.rate.as_slice()[1]);
    (r1, r2)
}

fn region_plot(title: &str, series: Vec<Series>) -> String {
    Plot {
        title: title.into(),
        x_label: "R_1 (nats)".into(),
        y_label: "R_2 (nats)".into(),
        series,
    }
    .render()
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum RegionScheme {
    Star,
    TimeSharing,
    Both,
}

pub fn region(cfg: &RunConfig, scheme: RegionScheme, out: &Path) -> Result<Outcome> {
    let spec = cfg.spec()?;
    let k = spec.num_users();
    let mut files = Vec::new();
    let mut series = Vec::new();
    let mut summary = json!({ "users": k });
    let mut violation = None;
    if scheme != RegionScheme::TimeSharing {
        let star = to_original(&spec, star_frontier(&spec, cfg.grid)?);
        files.push(write_file(out, "region_star.csv", &star.to_csv())?);
        let extremes: Vec<Vec<f64>> = (0..k)
            .map(|j| {
                star.extreme(j)
                    .map(|p| p.rate.as_slice().to_vec())
                    .unwrap_or_default()
            })
            .collect();
        summary["star_points"] = json!(star.len());
        summary["star_extremes"] = json!(extremes);
        if k == 2 {
            series.push(Series::solid("superposition", curve(&star)));
        }
    }
    if scheme != RegionScheme::Star {
        ensure!(
            k == 2,
            "time-sharing regions need exactly 2 users (got {k})"
        );
        let td = to_original(&spec, td_frontier(&spec, TD_GRID)?);
        files.push(write_file(out, "region_timesharing.csv", &td.to_csv())?);
        summary["timesharing_points"] = json!(td.len());
        series.push(Series::dashed("time-sharing", td.upper_hull(), "8 4"));
    }
    if scheme == RegionScheme::Both {
        let report = containment_check(&spec, TD_GRID)?;
        summary["containment"] = json!({
            "points_checked": report.points_checked,
            "violations": report.violations,
            "max_gap": report.max_gap,
        });
        if report.violations > 0 {
            violation = Some(format!(
                "{} time-sharing points lie outside the superposition region",
                report.violations
            ));
        }
    }
    if !series.is_empty() {
        files.push(write_file(
            out,
            "region.svg",
            &region_plot("Outage achievable rate region", series),
        )?);
    }
    summary["files"] = json!(display(&files));
    Ok(Outcome { summary, violation })
}

#[derive(Debug, Clone)]
pub struct BdpcArgs {
    pub power: f64,
    pub known: f64,
    pub unknown: f64,
    pub noise: f64,
    pub fading: String,
    pub rate: f64,
    pub points: usize,
}

#[derive(Debug, Serialize)]
pub struct BdpcSummary {
    pub alpha_star: f64,
    pub min_outage: f64,
    /// `None` when the rate is not reachable even with a known gain.
    pub a_star: Option<f64>,
}

pub fn bdpc_sweep(args: &BdpcArgs, out: &Path) -> Result<Outcome> {
    ensure!(args.points >= 2, "points must be at least 2");
    let fading = FadingModel64::parse_with_base(&args.fading, None)
        .with_context(|| format!("invalid fading '{}'", args.fading))?;
    let ch = DirtyPaperChannel64::new(args.power, args.known, args.unknown, args.noise, fading)?;
    let alpha_star = optimal_alpha(args.rate)?.alpha;
    let mut csv = String::from("alpha,outage\n");
    for (a, p) in ch.alpha_sweep(args.rate, args.points) {
        let _ = writeln!(csv, "{a},{p}");
    }
    let summary = BdpcSummary {
        alpha_star,
        min_outage: ch.min_outage_prob(args.rate),
        a_star: ch.a_star(args.rate).ok(),
    };
    let text = serde_json::to_string_pretty(&summary)?;
    let files = [
        write_file(out, "bdpc_sweep.csv", &csv)?,
        write_file(out, "bdpc_summary.json", &text)?,
    ];
    let mut value = serde_json::to_value(&summary)?;
    value["files"] = json!(display(&files));
    Ok(Outcome::ok(value))
}

#[derive(Debug, Serialize)]
pub struct SimUser {
    pub epsilon: f64,
    pub rate: f64,
    pub outage_estimate: f64,
    pub ci_low: f64,
    pub ci_high: f64,
    /// Closed-form outage; `None` outside the region of the allocation.
    pub analytic: Option<f64>,
    pub violations: u64,
}

#[derive(Debug, Serialize)]
pub struct SimReport {
    pub seed: u64,
    pub n: u64,
    pub users: Vec<SimUser>,
}

/// Monte Carlo outage of the decoding cascade; `gamma` and `rates` follow
/// the configuration order.
pub fn simulate(cfg: &RunConfig, gamma: &[f64], rates: &[f64], out: &Path) -> Result<Outcome> {
    let spec = cfg.spec()?;
    let k = spec.num_users();
    ensure!(
        gamma.len() == k,
        "--gamma needs {k} entries (got {})",
        gamma.len()
    );
    ensure!(
        rates.len() == k,
        "--rates needs {k} entries (got {})",
        rates.len()
    );
    let alloc = PowerAllocation64::new(spec.to_sorted_order(gamma))?;
    let sorted_rates = RatePoint64::new(spec.to_sorted_order(rates))?;
    let report = mc_outage(&spec, &alloc, &sorted_rates, cfg.mc_samples, cfg.seed)?;
    let users: Vec<SimUser> = (0..k)
        .map(|s| {
            let u = &report.users[s];
            SimUser {
                epsilon: spec.users()[s].epsilon,
                rate: sorted_rates.as_slice()[s],
                outage_estimate: u.estimate,
                ci_low: u.ci_low,
                ci_high: u.ci_high,
                analytic: analytic_outage(&spec, &alloc, &sorted_rates, s).ok(),
                violations: u.violations,
            }
        })
        .collect();
    let users = reorder_to_original(&spec, users);
    let sim = SimReport {
        seed: report.seed,
        n: report.samples,
        users,
    };
    let text = serde_json::to_string_pretty(&sim)?;
    write_file(out, "simulate.json", &text)?;
    let mut problems = Vec::new();
    for (i, u) in sim.users.iter().enumerate() {
        if u.violations > 0 {
            problems.push(format!(
                "user {}: {} non-suffix decoding indicators",
                i + 1,
                u.violations
            ));
        }
        if u.ci_low > u.epsilon {
            problems.push(format!(
                "user {}: outage interval starts above {}",
                i + 1,
                u.epsilon
            ));
        }
    }
    let violation = (!problems.is_empty()).then(|| problems.join("; "));
    Ok(Outcome {
        summary: serde_json::to_value(&sim)?,
        violation,
    })
}

fn reorder_to_original<V>(spec: &SystemSpec64, sorted: Vec<V>) -> Vec<V> {
    let mut slots: Vec<Option<V>> = (0..sorted.len()).map(|_| None).collect();
    for (s, v) in sorted.into_iter().enumerate() {
        slots[spec.order()[s]] = Some(v);
    }
    slots
        .into_iter()
        .map(|v| v.expect("order is a permutation"))
        .collect()
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum FigureName {
    Fig2,
    Fig4,
    Fig5,
}

const FIG_EPSILON: f64 = 0.01;
const FIG_RHO_DB: f64 = 20.0;
const FIG_MEANS: [f64; 2] = [10.0, 1.0];

fn fig_spec(models: [FadingModel64; 2]) -> Result<SystemSpec64> {
    let rho = 10f64.powf(FIG_RHO_DB / 10.0);
    Ok(SystemSpec64::new(
        rho,
        models.into_iter().map(|m| (m, FIG_EPSILON)).collect(),
    )?)
}

fn single_antenna() -> Result<SystemSpec64> {
    fig_spec(FIG_MEANS.map(|m| FadingModel64::exponential(m).expect("positive mean")))
}

/// Time-sharing with each user at full power during its own airtime.
fn td_equal_power(spec: &SystemSpec64, grid: usize) -> Result<Frontier64> {
    let steps = grid - 1;
    let points = (0..=steps)
        .map(|i| {
            let mu1 = i as f64 / steps as f64;
            let policy = TimeSharingPolicy64::new(vec![mu1, 1.0 - mu1], vec![1.0, 1.0])?;
            let rate = td_rate(spec, &policy);
            Ok(FrontierPoint {
                params: vec![mu1, 1.0, 1.0 - mu1, 1.0],
                rate,
            })
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(Frontier64::from_points(Scheme::TimeSharing, 2, points))
}

fn strictly_decreasing(v: &[f64]) -> bool {
    v.windows(2).all(|w| w[0] > w[1])
}

pub fn figure(name: FigureName, grid: usize, out: &Path) -> Result<Outcome> {
    ensure!(grid >= 2, "grid must be at least 2");
    let mut files = Vec::new();
    let mut series = Vec::new();
    let mut curves = serde_json::Map::new();
    let mut record = |tag: &str,
                      label: &str,
                      f: &Frontier64,
                      plot: Vec<(f64, f64)>,
                      dash: Option<&'static str>,
                      files: &mut Vec<PathBuf>|
     -> Result<(f64, f64)> {
        let stem = match name {
            FigureName::Fig2 => "fig2",
            FigureName::Fig4 => "fig4",
            FigureName::Fig5 => "fig5",
        };
        files.push(write_file(out, &format!("{stem}_{tag}.csv"), &f.to_csv())?);
        series.push(match dash {
            Some(d) => Series::dashed(label, plot, d),
            None => Series::solid(label, plot),
        });
        let ends = intercepts(f);
        curves.insert(
            label.into(),
            json!({ "file": format!("{stem}_{tag}.csv"), "intercepts": [ends.0, ends.1] }),
        );
        Ok(ends)
    };
    let (title, stem, violation, extra) = match name {
        FigureName::Fig2 => {
            let spec = single_antenna()?;
            let star = star_frontier(&spec, grid)?;
            let td = td_frontier(&spec, TD_GRID)?;
            let flat = td_equal_power(&spec, TD_GRID)?;
            record(
                "star",
                "superposition",
                &star,
                curve(&star),
                None,
                &mut files,
            )?;
            record(
                "timesharing",
                "time-sharing",
                &td,
                td.upper_hull(),
                Some("8 4"),
                &mut files,
            )?;
            record(
                "timesharing_equal_power",
                "time-sharing, equal power",
                &flat,
                curve(&flat),
                Some("2 4"),
                &mut files,
            )?;
            let report = containment_check(&spec, TD_GRID)?;
            let violation = (report.violations > 0).then(|| {
                format!(
                    "{} time-sharing points outside the region",
                    report.violations
                )
            });
            let extra = json!({ "containment": {
                "points_checked": report.points_checked,
                "violations": report.violations,
                "max_gap": report.max_gap,
            }});
            ("Superposition vs time-sharing", "fig2", violation, extra)
        }
        FigureName::Fig4 => {
            let base = single_antenna()?;
            let single = star_frontier(&base, grid)?;
            let one = record(
                "single",
                "single antenna",
                &single,
                curve(&single),
                Some("8 3 2 3"),
                &mut files,
            )?;
            let mut ends = Vec::new();
            for zeta in [0.0, 0.5, 0.9] {
                let models = FIG_MEANS.map(|m| FadingModel64::simo_aggregate(&[m, m], zeta));
                let [a, b] = models;
                let spec = fig_spec([a?, b?])?;
                let f = star_frontier(&spec, grid)?;
                ends.push(record(
                    &format!("zeta_{zeta}"),
                    &format!("zeta = {zeta}"),
                    &f,
                    curve(&f),
                    None,
                    &mut files,
                )?);
            }
            let above = ends.iter().all(|e| e.0 > one.0 && e.1 > one.1);
            let r1: Vec<f64> = ends.iter().map(|e| e.0).collect();
            let r2: Vec<f64> = ends.iter().map(|e| e.1).collect();
            let ordered = above && strictly_decreasing(&r1) && strictly_decreasing(&r2);
            let violation =
                (!ordered).then(|| "intercepts are not ordered by correlation".to_string());
            (
                "Two receive antennas, correlated fading",
                "fig4",
                violation,
                json!({ "ordered": ordered }),
            )
        }
        FigureName::Fig5 => {
            let mut ends = Vec::new();
            for m_t in [1u32, 2, 4] {
                let models = FIG_MEANS.map(|m| FadingModel64::miso_aggregate(m_t, m));
                let [a, b] = models;
                let spec = fig_spec([a?, b?])?;
                let f = star_frontier(&spec, grid)?;
                ends.push(record(
                    &format!("mt_{m_t}"),
                    &format!("m_t = {m_t}"),
                    &f,
                    curve(&f),
                    None,
                    &mut files,
                )?);
            }
            let r1: Vec<f64> = ends.iter().rev().map(|e| e.0).collect();
            let r2: Vec<f64> = ends.iter().rev().map(|e| e.1).collect();
            let ordered = strictly_decreasing(&r1) && strictly_decreasing(&r2);
            let violation = (!ordered).then(|| "intercepts do not grow with m_t".to_string());
            (
                "Transmit antennas",
                "fig5",
                violation,
                json!({ "ordered": ordered }),
            )
        }
    };
    files.push(write_file(
        out,
        &format!("{stem}.svg"),
        &region_plot(title, series),
    )?);
    let mut summary = json!({ "figure": stem, "curves": curves, "files": display(&files) });
    if let (Value::Object(s), Value::Object(e)) = (&mut summary, extra) {
        s.extend(e);
    }
    Ok(Outcome { summary, violation })
}

/// Parses a comma-separated list of reals.
pub fn parse_list(text: &str) -> Result<Vec<f64>> {
    let values = text
        .split(',')
        .map(|v| {
            v.trim()
                .parse::<f64>()
                .with_context(|| format!("not a number: '{v}'"))
        })
        .collect::<Result<Vec<_>>>()?;
    if values.is_empty() {
        bail!("empty list");
    }
    Ok(values)
}
