//! Pareto boundaries of the superposition and time-sharing regions,
//! obtained by sweeping allocations on grids, and the containment check
//! between them.

use std::cmp::Ordering;
use std::fmt::{self, Write as _};

use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::regions::{
    star_boundary_last, star_membership, star_rate, td_rate, PowerAllocation, RatePoint,
    SystemSpec, TimeSharingPolicy,
};
use crate::scalar::Scalar;

/// Which rate formula produced a frontier.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Scheme {
    /// Superposition region, parameterized by `gamma`.
    Star,
    /// Time-sharing with power allocation, parameterized by `(mu, eta)` pairs.
    TimeSharing,
}

impl fmt::Display for Scheme {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Scheme::Star => "star",
            Scheme::TimeSharing => "timesharing",
        })
    }
}

/// A swept point: the generating parameters and the resulting rates.
///
/// For [`Scheme::Star`] `params` is `gamma`; for [`Scheme::TimeSharing`] it
/// is `mu_1, eta_1, mu_2, eta_2, ...`.
#[derive(Debug, Clone, PartialEq)]
pub struct FrontierPoint<T> {
    pub params: Vec<T>,
    pub rate: RatePoint<T>,
}

/// Mutually non-dominated rate points, sorted by `R_1` ascending.
#[derive(Debug, Clone, PartialEq)]
pub struct Frontier<T> {
    scheme: Scheme,
    num_users: usize,
    points: Vec<FrontierPoint<T>>,
}

fn cmp_slices<T: Scalar>(a: &[T], b: &[T]) -> Ordering {
    for (x, y) in a.iter().zip(b) {
        match x.partial_cmp(y).unwrap_or(Ordering::Equal) {
            Ordering::Equal => continue,
            other => return other,
        }
    }
    a.len().cmp(&b.len())
}

fn weakly_dominates<T: Scalar>(a: &[T], b: &[T]) -> bool {
    a.iter().zip(b).all(|(x, y)| x >= y)
}

impl<T: Scalar> Frontier<T> {
    /// Prunes dominated and duplicate points and sorts the rest.
    ///
    /// The result depends only on the set of input points, so sweeps may be
    /// split across workers and merged in any order.
    pub fn from_points(
        scheme: Scheme,
        num_users: usize,
        mut points: Vec<FrontierPoint<T>>,
    ) -> Self {
        // Strongest first; among equal rates the smallest parameters win.
        points.sort_by(|a, b| {
            cmp_slices(b.rate.as_slice(), a.rate.as_slice())
                .then_with(|| cmp_slices(&a.params, &b.params))
        });
        let kept = if num_users == 2 {
            let mut best = T::neg_infinity();
            let mut kept = Vec::new();
            for p in points {
                let r2 = p.rate.as_slice()[1];
                if r2 > best {
                    best = r2;
                    kept.push(p);
                }
            }
            kept
        } else {
            // Any dominator has a larger sum, so scanning by decreasing sum
            // only needs to compare against points already kept.
            points.sort_by(|a, b| {
                b.rate
                    .sum()
                    .partial_cmp(&a.rate.sum())
                    .unwrap_or(Ordering::Equal)
                    .then_with(|| cmp_slices(b.rate.as_slice(), a.rate.as_slice()))
                    .then_with(|| cmp_slices(&a.params, &b.params))
            });
            let mut kept: Vec<FrontierPoint<T>> = Vec::new();
            for p in points {
                if !kept
                    .iter()
                    .any(|q| weakly_dominates(q.rate.as_slice(), p.rate.as_slice()))
                {
                    kept.push(p);
                }
            }
            kept
        };
        let mut points = kept;
        points.sort_by(|a, b| cmp_slices(a.rate.as_slice(), b.rate.as_slice()));
        Self {
            scheme,
            num_users,
            points,
        }
    }

    /// Union of several frontiers of the same scheme, re-pruned.
    pub fn merge(parts: impl IntoIterator<Item = Self>) -> Result<Self> {
        let mut parts = parts.into_iter();
        let first = parts
            .next()
            .ok_or_else(|| Error::InvalidParameter("nothing to merge".into()))?;
        let (scheme, k) = (first.scheme, first.num_users);
        let mut all = first.points;
        for p in parts {
            if p.scheme != scheme || p.num_users != k {
                return Err(Error::InvalidParameter(
                    "frontiers differ in scheme or size".into(),
                ));
            }
            all.extend(p.points);
        }
        Ok(Self::from_points(scheme, k, all))
    }

    pub fn scheme(&self) -> Scheme {
        self.scheme
    }

    pub fn num_users(&self) -> usize {
        self.num_users
    }

    pub fn points(&self) -> &[FrontierPoint<T>] {
        &self.points
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    /// Pairwise check that no point dominates another.
    pub fn is_mutually_nondominated(&self) -> bool {
        self.points.iter().enumerate().all(|(i, p)| {
            self.points
                .iter()
                .enumerate()
                .all(|(j, q)| i == j || !q.rate.dominates(&p.rate))
        })
    }

    /// Point with the largest rate for user `k` (ties: first in `R_1` order).
    pub fn extreme(&self, k: usize) -> Option<&FrontierPoint<T>> {
        self.points
            .iter()
            .fold(None, |best: Option<&FrontierPoint<T>>, p| match best {
                Some(b) if b.rate.as_slice()[k] >= p.rate.as_slice()[k] => Some(b),
                _ => Some(p),
            })
    }

    /// Vertices of the upper concave hull of a two-user frontier, `R_1` ascending.
    ///
    /// Both regions are convex, so the hull is the natural boundary estimate
    /// between swept points.
    pub fn upper_hull(&self) -> Vec<(T, T)> {
        assert_eq!(self.num_users, 2, "hull is defined for two users");
        let mut hull: Vec<(T, T)> = Vec::with_capacity(self.points.len());
        for p in &self.points {
            let r = p.rate.as_slice();
            let c = (r[0], r[1]);
            while hull.len() >= 2 {
                let (a, b) = (hull[hull.len() - 2], hull[hull.len() - 1]);
                let cross = (b.0 - a.0) * (c.1 - a.1) - (b.1 - a.1) * (c.0 - a.0);
                if cross >= T::zero() {
                    hull.pop();
                } else {
                    break;
                }
            }
            hull.push(c);
        }
        hull
    }

    /// Boundary `R_2(R_1)` by linear interpolation along [`Frontier::upper_hull`]
    /// (two users). `None` beyond the largest `R_1`.
    pub fn interpolate_r2(&self, r1: T) -> Option<T> {
        interpolate_on(&self.upper_hull(), r1)
    }

    /// Largest vertical distance `|R_2 - other(R_1)|` from this frontier's
    /// points to the piecewise-linear boundary of `other` (two users).
    pub fn max_vertical_gap(&self, other: &Self) -> T {
        assert_eq!(self.num_users, 2, "gap is defined for two users");
        let hull = other.upper_hull();
        self.points
            .iter()
            .filter_map(|p| {
                let r = p.rate.as_slice();
                interpolate_on(&hull, r[0]).map(|y| (r[1] - y).abs())
            })
            .fold(T::zero(), T::max)
    }

    /// CSV with a parameter block followed by `R_1..R_K`, 9 significant
    /// digits, one point per line in `R_1` order.
    ///
    /// Rates are truncated toward zero rather than rounded so that a
    /// re-parsed point never lies outside the region it came from.
    pub fn to_csv(&self) -> String {
        let mut out = String::new();
        let mut header: Vec<String> = match self.scheme {
            Scheme::Star => (1..=self.num_users).map(|k| format!("gamma_{k}")).collect(),
            Scheme::TimeSharing => (1..=self.num_users)
                .flat_map(|k| [format!("mu_{k}"), format!("eta_{k}")])
                .collect(),
        };
        header.extend((1..=self.num_users).map(|k| format!("R_{k}")));
        out.push_str(&header.join(","));
        out.push('\n');
        for p in &self.points {
            let mut fields: Vec<String> = p
                .params
                .iter()
                .map(|v| format_sig(v.to_f64_lossy(), 9, false))
                .collect();
            fields.extend(
                p.rate
                    .as_slice()
                    .iter()
                    .map(|v| format_sig(v.to_f64_lossy(), 9, true)),
            );
            let _ = writeln!(out, "{}", fields.join(","));
        }
        out
    }

    /// Parses CSV written by [`Frontier::to_csv`]. The header decides the scheme.
    pub fn from_csv(text: &str) -> Result<Self> {
        let mut lines = text.lines().filter(|l| !l.trim().is_empty());
        let header = lines
            .next()
            .ok_or_else(|| Error::Parse("empty frontier CSV".into()))?;
        let cols: Vec<&str> = header.split(',').map(str::trim).collect();
        let k = cols.iter().filter(|c| c.starts_with("R_")).count();
        let scheme = match cols.first() {
            Some(c) if c.starts_with("gamma_") => Scheme::Star,
            Some(c) if c.starts_with("mu_") => Scheme::TimeSharing,
            _ => {
                return Err(Error::Parse(format!(
                    "unrecognized frontier header '{header}'"
                )))
            }
        };
        let n_params = cols.len() - k;
        let expected_params = if scheme == Scheme::Star { k } else { 2 * k };
        if k == 0 || n_params != expected_params {
            return Err(Error::Parse(format!(
                "inconsistent frontier header '{header}'"
            )));
        }
        let mut points = Vec::new();
        for line in lines {
            let vals = line
                .split(',')
                .map(|v| {
                    v.trim()
                        .parse::<T>()
                        .map_err(|_| Error::Parse(format!("bad number '{v}' in '{line}'")))
                })
                .collect::<Result<Vec<T>>>()?;
            if vals.len() != cols.len() {
                return Err(Error::Parse(format!("wrong field count in '{line}'")));
            }
            points.push(FrontierPoint {
                params: vals[..n_params].to_vec(),
                rate: RatePoint::new(vals[n_params..].to_vec())?,
            });
        }
        Ok(Self {
            scheme,
            num_users: k,
            points,
        })
    }
}

fn interpolate_on<T: Scalar>(hull: &[(T, T)], r1: T) -> Option<T> {
    let first = *hull.first()?;
    if r1 <= first.0 {
        return Some(first.1);
    }
    let idx = hull.partition_point(|p| p.0 < r1);
    if idx == hull.len() {
        return None;
    }
    let (a, b) = (hull[idx - 1], hull[idx]);
    let w = (r1 - a.0) / (b.0 - a.0);
    Some(a.1 + w * (b.1 - a.1))
}

/// Decimal rendering with `sig` significant digits and no trailing zeros;
/// `truncate` rounds toward zero.
pub fn format_sig(x: f64, sig: usize, truncate: bool) -> String {
    if x == 0.0 || !x.is_finite() {
        return if x.is_finite() {
            "0".into()
        } else {
            format!("{x}")
        };
    }
    let magnitude = x.abs().log10().floor() as i32;
    let decimals = (sig as i32 - 1 - magnitude).max(0) as usize;
    let value = if truncate {
        let scale = 10f64.powi(decimals as i32);
        (x * scale).trunc() / scale
    } else {
        x
    };
    let text = format!("{value:.decimals$}");
    if text.contains('.') {
        text.trim_end_matches('0').trim_end_matches('.').to_string()
    } else {
        text
    }
}

/// Simplex grid with `grid` points per axis, `K <= 3`.
fn simplex_grid<T: Scalar>(k: usize, grid: usize) -> Vec<Vec<T>> {
    let steps = grid - 1;
    let frac = |i: usize| T::from_usize_lossy(i) / T::from_usize_lossy(steps);
    match k {
        1 => vec![vec![T::one()]],
        2 => (0..=steps)
            .map(|i| vec![frac(i), frac(steps - i)])
            .collect(),
        3 => (0..=steps)
            .flat_map(|i| (0..=steps - i).map(move |j| (i, j)))
            .map(|(i, j)| vec![frac(i), frac(j), frac(steps - i - j)])
            .collect(),
        _ => unreachable!("caller restricts K"),
    }
}

/// Sweeps `gamma` over a uniform simplex grid and keeps the Pareto points.
///
/// Exhaustive sweeps are offered for up to three users; larger systems are
/// handled point-wise through [`star_membership`].
pub fn star_frontier<T: Scalar>(spec: &SystemSpec<T>, grid: usize) -> Result<Frontier<T>> {
    let k = spec.num_users();
    if k > 3 {
        return Err(Error::Unsupported(format!(
            "exhaustive frontier sweeps support at most 3 users (got {k}); use star_membership"
        )));
    }
    if grid < 2 {
        return Err(Error::InvalidParameter(
            "grid must have at least 2 points".into(),
        ));
    }
    let points: Vec<FrontierPoint<T>> = simplex_grid::<T>(k, grid)
        .into_par_iter()
        .map(|gamma| {
            let alloc = PowerAllocation::new(gamma).expect("grid points lie on the simplex");
            let rate = star_rate(spec, &alloc);
            FrontierPoint {
                params: alloc.into_inner(),
                rate,
            }
        })
        .collect();
    Ok(Frontier::from_points(Scheme::Star, k, points))
}

/// Geometric grid of `n` points on `[lo, hi]`.
fn geometric_grid<T: Scalar>(lo: T, hi: T, n: usize) -> Vec<T> {
    if n < 2 || hi <= lo {
        return vec![hi];
    }
    let ratio = (hi / lo).ln() / T::from_usize_lossy(n - 1);
    let mut v: Vec<T> = (0..n)
        .map(|i| lo * (ratio * T::from_usize_lossy(i)).exp())
        .collect();
    v[n - 1] = hi;
    v
}

fn td_policies<T: Scalar>(grid: usize) -> Vec<(T, T)> {
    let steps = grid - 1;
    let eta_floor = T::lit(1e-3);
    (0..=steps)
        .flat_map(|i| {
            let mu1 = T::from_usize_lossy(i) / T::from_usize_lossy(steps);
            if i == 0 {
                vec![(mu1, T::zero())]
            } else if i == steps {
                vec![(mu1, T::one())]
            } else {
                let mut etas = geometric_grid(eta_floor, T::one() / mu1, grid);
                etas.push(T::one());
                etas.into_iter().map(|e| (mu1, e)).collect()
            }
        })
        .collect()
}

/// Two-user time-sharing frontier: `mu_1` on a uniform grid, `eta_1` on a
/// geometric grid between 1e-3 and `1/mu_1` plus `eta_1 = 1`; `eta_2` follows
/// from the energy constraint.
pub fn td_frontier<T: Scalar>(spec: &SystemSpec<T>, grid: usize) -> Result<Frontier<T>> {
    let k = spec.num_users();
    if k != 2 {
        return Err(Error::Unsupported(format!(
            "time-sharing sweeps support exactly 2 users (got {k})"
        )));
    }
    if grid < 2 {
        return Err(Error::InvalidParameter(
            "grid must have at least 2 points".into(),
        ));
    }
    let points: Vec<FrontierPoint<T>> = td_policies::<T>(grid)
        .into_par_iter()
        .map(|(mu1, eta1)| {
            let mu2 = T::one() - mu1;
            let (eta1, eta2) = if mu2 == T::zero() {
                (T::one(), T::zero())
            } else {
                (eta1, ((T::one() - mu1 * eta1) / mu2).max(T::zero()))
            };
            let policy = TimeSharingPolicy::new(vec![mu1, mu2], vec![eta1, eta2])
                .expect("grid policies satisfy the constraints");
            let rate = td_rate(spec, &policy);
            FrontierPoint {
                params: vec![mu1, eta1, mu2, eta2],
                rate,
            }
        })
        .collect();
    Ok(Frontier::from_points(Scheme::TimeSharing, k, points))
}

/// Outcome of testing every time-sharing frontier point for membership in
/// the superposition region.
#[derive(Debug, Clone, PartialEq)]
pub struct ContainmentReport<T> {
    pub points_checked: usize,
    pub violations: usize,
    /// Largest `R_2` (equivalently sum-rate) advantage of the superposition
    /// boundary over the time-sharing boundary at the same `R_1`.
    pub max_gap: T,
}

pub fn containment_check<T: Scalar>(
    spec: &SystemSpec<T>,
    grid: usize,
) -> Result<ContainmentReport<T>> {
    let td = td_frontier(spec, grid)?;
    let violations = td
        .points()
        .par_iter()
        .filter(|p| star_membership(spec, &p.rate).is_none())
        .count();
    // Gap to the concave hull of the time-sharing points, sampled at the hull
    // vertices and at interior points of each hull edge.
    let hull = td.upper_hull();
    let mut probes = hull.clone();
    for w in hull.windows(2) {
        for s in 1..4 {
            let f = T::lit(s as f64 / 4.0);
            probes.push((
                w[0].0 + f * (w[1].0 - w[0].0),
                w[0].1 + f * (w[1].1 - w[0].1),
            ));
        }
    }
    let max_gap = probes
        .par_iter()
        .filter_map(|&(r1, r2)| star_boundary_last(spec, &[r1]).map(|top| top - r2))
        .reduce(|| T::zero(), T::max);
    Ok(ContainmentReport {
        points_checked: td.len(),
        violations,
        max_gap,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fading::FadingModel;

    fn spec(means: &[f64]) -> SystemSpec<f64> {
        SystemSpec::new(
            100.0,
            means
                .iter()
                .map(|m| (FadingModel::exponential(*m).unwrap(), 0.01))
                .collect(),
        )
        .unwrap()
    }

    #[test]
    fn single_user_frontier_is_one_point() {
        let s = spec(&[10.0]);
        let f = star_frontier(&s, 11).unwrap();
        assert_eq!(f.len(), 1);
        let r = f.points()[0].rate.as_slice()[0];
        assert!((r - (1.0 + s.gain(0) * 100.0).ln()).abs() < 1e-15);
    }

    #[test]
    fn endpoints_on_case_study() {
        let s = spec(&[10.0, 1.0]);
        let f = star_frontier(&s, 1001).unwrap();
        let right = f.extreme(0).unwrap().rate.as_slice().to_vec();
        let top = f.extreme(1).unwrap().rate.as_slice().to_vec();
        assert!((right[0] - 2.402461).abs() < 1e-6 && right[1] == 0.0);
        assert!(top[0] == 0.0 && (top[1] - 0.695661).abs() < 1e-6);
        assert!(f.is_mutually_nondominated());
    }

    #[test]
    fn equal_gains_make_regions_coincide() {
        let s = spec(&[3.0, 3.0]);
        let star = star_frontier(&s, 1001).unwrap();
        let td = td_frontier(&s, 201).unwrap();
        assert!(star.max_vertical_gap(&td) < 1e-6);
        let report = containment_check(&s, 201).unwrap();
        assert_eq!(report.violations, 0);
        assert!(report.max_gap < 1e-9, "{}", report.max_gap);
    }

    #[test]
    fn time_sharing_endpoint_present() {
        let s = spec(&[10.0, 1.0]);
        let td = td_frontier(&s, 51).unwrap();
        let right = td.extreme(0).unwrap();
        assert!((right.rate.as_slice()[0] - (1.0 + s.gain(0) * 100.0).ln()).abs() < 1e-12);
        assert!(td.is_mutually_nondominated());
    }

    #[test]
    fn sweep_restrictions() {
        assert!(matches!(
            star_frontier(&spec(&[1.0; 4]), 5),
            Err(Error::Unsupported(_))
        ));
        assert!(matches!(
            td_frontier(&spec(&[1.0; 3]), 5),
            Err(Error::Unsupported(_))
        ));
        assert!(star_frontier(&spec(&[1.0, 2.0]), 1).is_err());
    }

    #[test]
    fn three_user_frontier() {
        let s = spec(&[10.0, 3.0, 1.0]);
        let f = star_frontier(&s, 41).unwrap();
        assert!(f.is_mutually_nondominated());
        for p in f.points() {
            assert!(star_membership(&s, &p.rate).is_some());
        }
    }

    #[test]
    fn merge_is_partition_independent() {
        let s = spec(&[10.0, 1.0]);
        let whole = td_frontier(&s, 41).unwrap();
        let pts = whole.points().to_vec();
        let (a, b) = pts.split_at(pts.len() / 3);
        let mut b = b.to_vec();
        b.reverse();
        let merged = Frontier::merge([
            Frontier::from_points(Scheme::TimeSharing, 2, b),
            Frontier::from_points(Scheme::TimeSharing, 2, a.to_vec()),
        ])
        .unwrap();
        assert_eq!(merged, whole);
    }

    #[test]
    fn pruning_drops_dominated_and_duplicates() {
        let pt = |p: f64, r: [f64; 2]| FrontierPoint {
            params: vec![p],
            rate: RatePoint::new(r.to_vec()).unwrap(),
        };
        let f = Frontier::from_points(
            Scheme::Star,
            2,
            vec![
                pt(0.3, [1.0, 1.0]),
                pt(0.1, [1.0, 1.0]),
                pt(0.2, [0.5, 0.5]),
                pt(0.4, [2.0, 0.0]),
            ],
        );
        assert_eq!(f.len(), 2);
        assert_eq!(f.points()[0].params, vec![0.1]);
    }

    #[test]
    fn csv_round_trip_stays_in_region() {
        let s = spec(&[10.0, 1.0]);
        let f = star_frontier(&s, 101).unwrap();
        let csv = f.to_csv();
        assert!(csv.starts_with("gamma_1,gamma_2,R_1,R_2\n"));
        let back: Frontier<f64> = Frontier::from_csv(&csv).unwrap();
        assert_eq!(back.len(), f.len());
        assert!(back.is_mutually_nondominated());
        for p in back.points() {
            assert!(star_membership(&s, &p.rate).is_some());
        }
        let td = td_frontier(&s, 21).unwrap().to_csv();
        assert!(td.starts_with("mu_1,eta_1,mu_2,eta_2,R_1,R_2\n"));
        assert_eq!(
            Frontier::<f64>::from_csv(&td).unwrap().scheme(),
            Scheme::TimeSharing
        );
    }

    #[test]
    fn significant_digit_formatting() {
        assert_eq!(format_sig(2.4024608214839107, 9, false), "2.40246082");
        assert_eq!(format_sig(2.4024608294839107, 9, true), "2.40246082");
        assert_eq!(format_sig(0.000123456789123, 9, false), "0.000123456789");
        assert_eq!(format_sig(0.0, 9, true), "0");
        assert_eq!(format_sig(1.0, 9, false), "1");
        assert_eq!(format_sig(0.0025, 9, false), "0.0025");
        assert_eq!(format_sig(1234567890.5, 9, false), "1234567890");
    }
}
