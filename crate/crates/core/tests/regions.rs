use bcoutage::{
    containment_check, star_frontier, star_membership, star_rate, td_frontier, td_rate,
    FadingModel, PowerAllocation64, RatePoint64, SystemSpec32, SystemSpec64, TimeSharingPolicy64,
};
use proptest::prelude::*;

fn exp(mean: f64) -> FadingModel<f64> {
    FadingModel::exponential(mean).unwrap()
}

fn fig2() -> SystemSpec64 {
    SystemSpec64::new(100.0, vec![(exp(10.0), 0.01), (exp(1.0), 0.01)]).unwrap()
}

fn three_user() -> SystemSpec64 {
    SystemSpec64::new(
        100.0,
        vec![(exp(1.0), 0.05), (exp(30.0), 0.01), (exp(5.0), 0.02)],
    )
    .unwrap()
}

fn alloc(v: &[f64]) -> PowerAllocation64 {
    PowerAllocation64::new(v.to_vec()).unwrap()
}

fn simplex(raw: Vec<f64>) -> Vec<f64> {
    let s: f64 = raw.iter().sum();
    let mut v: Vec<f64> = raw.iter().map(|x| x / s).collect();
    let head: f64 = v[..v.len() - 1].iter().sum();
    *v.last_mut().unwrap() = (1.0 - head).max(0.0);
    v
}

#[test]
fn fig2_values() {
    let s = fig2();
    assert!((s.gain(0) - 0.10050335853501442).abs() < 1e-12);
    assert!((s.gain(1) - 0.010050335853501442).abs() < 1e-12);
    let r = star_rate(&s, &alloc(&[0.5, 0.5]));
    assert!((r.as_slice()[0] - 1.7959453506481873).abs() < 1e-12);
    assert!((r.as_slice()[1] - 0.28851924756231573).abs() < 1e-12);
    let td = td_rate(
        &s,
        &TimeSharingPolicy64::new(vec![0.5, 0.5], vec![1.0, 1.0]).unwrap(),
    );
    assert!((td.as_slice()[0] - 1.2012304107419554).abs() < 1e-12);
    assert!((td.as_slice()[1] - 0.34783040570815976).abs() < 1e-12);
}

#[test]
fn fig2_frontier_endpoints() {
    let f = star_frontier(&fig2(), 1001).unwrap();
    let e1 = f.extreme(0).unwrap().rate.as_slice().to_vec();
    let e2 = f.extreme(1).unwrap().rate.as_slice().to_vec();
    assert!((e1[0] - 2.4024608214839107).abs() < 1e-6 && e1[1].abs() < 1e-6);
    assert!(e2[0].abs() < 1e-6 && (e2[1] - 0.6956608114163195).abs() < 1e-6);
    assert!(f.is_mutually_nondominated());
}

#[test]
fn fig2_contains_time_sharing() {
    let report = containment_check(&fig2(), 201).unwrap();
    assert_eq!(report.violations, 0);
    assert!(report.points_checked > 1000);
    assert!(report.max_gap > 0.0);
}

#[test]
fn near_far_stress_contains_time_sharing() {
    let s = SystemSpec64::new(100.0, vec![(exp(1e4), 0.01), (exp(1.0), 0.01)]).unwrap();
    assert!((s.gain(0) / s.gain(1) - 1e4).abs() < 1e-6);
    assert_eq!(containment_check(&s, 201).unwrap().violations, 0);
}

#[test]
fn frontier_points_are_in_region() {
    for spec in [fig2(), three_user()] {
        let f = star_frontier(&spec, 101).unwrap();
        assert!(f.is_mutually_nondominated());
        for p in f.points() {
            let m = star_membership(&spec, &p.rate).expect("frontier point must be a member");
            assert!(m.total <= 1.0 + 1e-9);
        }
    }
}

#[test]
fn three_user_vertices() {
    let s = three_user();
    for k in 0..3 {
        let r = star_rate(&s, &PowerAllocation64::vertex(3, k));
        let single = (1.0 + s.gain(k) * s.rho()).ln();
        for (j, v) in r.as_slice().iter().enumerate() {
            if j == k {
                assert!((v - single).abs() < 1e-12);
            } else {
                assert_eq!(*v, 0.0);
            }
        }
    }
}

#[test]
fn sorted_order_beats_reversed_order() {
    let sorted = fig2();
    let reversed =
        SystemSpec64::in_given_order(100.0, vec![(exp(1.0), 0.01), (exp(10.0), 0.01)]).unwrap();
    let mut strictly = 0;
    for i in 0..=200 {
        let strong = i as f64 / 200.0;
        let a = star_rate(&sorted, &alloc(&[strong, 1.0 - strong])).sum();
        let b = star_rate(&reversed, &alloc(&[1.0 - strong, strong])).sum();
        assert!(a >= b - 1e-12, "strong share {strong}: {a} < {b}");
        if a > b + 1e-9 {
            strictly += 1;
        }
    }
    assert!(strictly > 190);
}

#[test]
fn single_precision_frontier() {
    let s = SystemSpec32::new(
        100.0,
        vec![
            (FadingModel::exponential(10.0).unwrap(), 0.01),
            (FadingModel::exponential(1.0).unwrap(), 0.01),
        ],
    )
    .unwrap();
    let f = star_frontier(&s, 101).unwrap();
    let e = f.extreme(0).unwrap().rate.as_slice()[0] as f64;
    assert!((e - 2.4024608214839107).abs() < 1e-5);
}

#[test]
fn td_frontier_lies_below_the_star_boundary() {
    let s = fig2();
    let star = star_frontier(&s, 401).unwrap();
    let td = td_frontier(&s, 101).unwrap();
    for p in td.points() {
        let top = star.interpolate_r2(p.rate.as_slice()[0]).unwrap();
        assert!(p.rate.as_slice()[1] <= top + 1e-6);
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(1000))]

    #[test]
    fn membership_inverts_star_rate(raw in prop::collection::vec(0.0f64..1.0, 3)) {
        prop_assume!(raw.iter().sum::<f64>() > 1e-6);
        let gamma = simplex(raw);
        let s = three_user();
        let r = star_rate(&s, &alloc(&gamma));
        let m = star_membership(&s, &r).expect("own rates are members");
        prop_assert!(m.total <= gamma.iter().sum::<f64>() + 1e-9);
        let back = star_rate(&s, &m.allocation());
        for (b, a) in back.as_slice().iter().zip(r.as_slice()) {
            prop_assert!(*b >= a - 1e-9);
        }
    }
}

proptest! {
    #[test]
    fn monotone_in_rho(raw in prop::collection::vec(0.0f64..1.0, 2), lo in 0.1f64..100.0, f in 1.0f64..10.0) {
        prop_assume!(raw.iter().sum::<f64>() > 1e-6);
        let a = alloc(&simplex(raw));
        let s_lo = fig2().with_rho(lo).unwrap();
        let s_hi = fig2().with_rho(lo * f).unwrap();
        let (r_lo, r_hi) = (star_rate(&s_lo, &a), star_rate(&s_hi, &a));
        for (x, y) in r_lo.as_slice().iter().zip(r_hi.as_slice()) {
            prop_assert!(y >= x);
        }
    }

    #[test]
    fn monotone_in_epsilon(g in 0.0f64..1.0, e1 in 0.001f64..0.1, e2 in 0.001f64..0.1, bump in 1.0f64..5.0) {
        let a = alloc(&[g, 1.0 - g]);
        let base = SystemSpec64::in_given_order(100.0, vec![(exp(10.0), e1), (exp(1.0), e2)]).unwrap();
        let more = SystemSpec64::in_given_order(100.0, vec![(exp(10.0), e1), (exp(1.0), e2 * bump)]).unwrap();
        let (r0, r1) = (star_rate(&base, &a), star_rate(&more, &a));
        prop_assert!(r1.as_slice()[1] >= r0.as_slice()[1]);
        prop_assert_eq!(r1.as_slice()[0], r0.as_slice()[0]);
    }

    #[test]
    fn scaled_down_rates_are_members(g in 0.0f64..1.0, f in 0.0f64..1.0) {
        let s = fig2();
        let r = star_rate(&s, &alloc(&[g, 1.0 - g])).scaled(f);
        prop_assert!(star_membership(&s, &r).is_some());
    }

    #[test]
    fn rates_above_single_user_limit_are_rejected(extra in 1e-6f64..1.0) {
        let s = fig2();
        let top = (1.0 + s.gain(0) * s.rho()).ln();
        prop_assert!(star_membership(&s, &RatePoint64::new(vec![top + extra, 0.0]).unwrap()).is_none());
    }
}
