use proptest::prelude::*;
use vitalrates_core::domain::{
    logit_clamped, smooth_over_age, AgeGrid, MortalitySchedule, MortalitySurface, PasfrPattern,
    Period, Sex, TfrTrajectory,
};
use vitalrates_core::fertility::{
    asfr_from_pasfr, estimate_tg, pasfr_blend, pasfr_national_trend, pasfr_toward_global,
    project_pasfr_trajectory, FertilityProjectionConfig, PasfrHistory,
};
use vitalrates_core::kannisto::{extend_to_130, KannistoMode};
use vitalrates_core::lee_carter::{ultimate_bux, RotationSchedule};
use vitalrates_core::life_table::e0_from_mx;

fn simplex(n: usize) -> impl Strategy<Value = Vec<f64>> {
    prop::collection::vec(0.01f64..1.0, n).prop_map(|v| {
        let s: f64 = v.iter().sum();
        v.into_iter().map(|x| x / s).collect()
    })
}

fn pattern() -> impl Strategy<Value = PasfrPattern> {
    simplex(7).prop_map(|v| PasfrPattern::normalized(v.try_into().unwrap()).unwrap())
}

fn adult_schedule() -> impl Strategy<Value = MortalitySchedule> {
    (1e-3f64..0.15, 1e-5f64..1e-4, 0.07f64..0.11).prop_map(|(infant, level, slope)| {
        let grid = AgeGrid::canonical();
        let rates = grid
            .groups()
            .iter()
            .map(|g| match g.start {
                0 => infant,
                1 => infant / 8.0,
                _ => (4e-4 + level * (slope * g.midpoint()).exp()).min(2.0),
            })
            .collect();
        MortalitySchedule::new(grid, rates).unwrap()
    })
}

proptest! {
    #[test]
    fn smoothing_stays_within_range(values in prop::collection::vec(-10.0f64..2.0, 3..30)) {
        let out = smooth_over_age(&values, true).unwrap();
        let lo = values.iter().cloned().fold(f64::INFINITY, f64::min);
        let hi = values.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
        prop_assert_eq!(out[0], values[0]);
        prop_assert!(out.iter().all(|v| *v >= lo - 1e-12 && *v <= hi + 1e-12));
    }

    #[test]
    fn logit_is_monotone(a in 0.0f64..1.0, b in 0.0f64..1.0) {
        let (lo, hi) = if a <= b { (a, b) } else { (b, a) };
        prop_assert!(logit_clamped(lo) <= logit_clamped(hi));
    }

    #[test]
    fn e0_falls_under_uniform_increase(m in adult_schedule(), factor in 1.01f64..3.0) {
        let before = e0_from_mx(&m, Sex::Male).unwrap();
        let rates = m.rates().iter().map(|r| r * factor).collect();
        let after = e0_from_mx(&MortalitySchedule::new(m.grid().clone(), rates).unwrap(), Sex::Male).unwrap();
        prop_assert!(after < before);
    }

    // Greville's A_x reacts to neighbouring rates, so single-group increases are
    // only checked where every rate stays moderate.
    #[test]
    fn e0_falls_when_one_moderate_rate_rises(m in adult_schedule(), idx in 0usize..28, factor in 1.01f64..3.0) {
        let capped: Vec<f64> = m.rates().iter().map(|r| r.min(0.5 / 3.0)).collect();
        let m = MortalitySchedule::new(m.grid().clone(), capped).unwrap();
        let before = e0_from_mx(&m, Sex::Female).unwrap();
        let mut rates = m.rates().to_vec();
        rates[idx] *= factor;
        let after = e0_from_mx(&MortalitySchedule::new(m.grid().clone(), rates).unwrap(), Sex::Female).unwrap();
        prop_assert!(after < before);
    }

    #[test]
    fn coherent_extension_never_crosses(
        f_level in 0.02f64..0.2,
        gaps in prop::collection::vec(0.0f64..0.5, 4),
        slope in 0.05f64..0.15,
        noise in prop::collection::vec(-0.1f64..0.1, 4),
    ) {
        let grid = AgeGrid::abridged(100).unwrap();
        let old = grid.index_of_start(80).unwrap();
        let f: Vec<f64> = grid.groups().iter().enumerate().map(|(i, g)| {
            if i >= old && i < old + 4 {
                (f_level * (slope * (g.midpoint() - 82.5) + noise[i - old]).exp()).min(0.9)
            } else if g.is_open() {
                0.6
            } else {
                0.001 + 1e-5 * (0.09 * g.midpoint()).exp()
            }
        }).collect();
        let m: Vec<f64> = f.iter().enumerate().map(|(i, r)| {
            if i >= old && i < old + 4 { (r * (1.0 + gaps[i - old])).min(0.95) } else { r * 1.2 }
        }).collect();
        let fs = MortalitySurface::new(Sex::Female, vec![Period(2000), Period(2005)],
            vec![MortalitySchedule::new(grid.clone(), f.clone()).unwrap(); 2]).unwrap();
        let ms = MortalitySurface::new(Sex::Male, vec![Period(2000), Period(2005)],
            vec![MortalitySchedule::new(grid.clone(), m).unwrap(); 2]).unwrap();
        let (ef, em) = extend_to_130(&fs, &ms, KannistoMode::Coherent).unwrap();
        let start = AgeGrid::canonical().index_of_start(100).unwrap();
        for x in start..28 {
            prop_assert!(em.schedules()[1].rates()[x] >= ef.schedules()[1].rates()[x]);
        }
    }

    #[test]
    fn rotation_is_a_unit_sum_schedule(b in simplex(28), e0 in 60.0f64..115.0) {
        let r = RotationSchedule::new(b).unwrap();
        prop_assert!((r.rotated_bx(e0).iter().sum::<f64>() - 1.0).abs() <= 1e-9);
        let w = r.weight(e0);
        prop_assert!((0.0..=1.0).contains(&w));
        prop_assert!(r.weight(e0 + 0.5) >= w);
    }

    #[test]
    fn ultimate_schedule_sums_to_one(b in simplex(28)) {
        let u = ultimate_bux(&b).unwrap();
        prop_assert!((u.iter().sum::<f64>() - 1.0).abs() <= 1e-9);
    }

    #[test]
    fn pattern_operations_stay_on_the_simplex(
        a in pattern(), b in pattern(), tau in 0.0f64..1.0, ahead in 1i32..20,
    ) {
        let outputs = [
            pasfr_toward_global(&a, &b, tau),
            pasfr_blend(&a, &b, tau),
            pasfr_national_trend(&a, &b, Period(2005).offset(ahead), Period(2005), Period(1990)).unwrap(),
        ];
        for p in outputs {
            prop_assert!((p.proportions().iter().sum::<f64>() - 1.0).abs() <= 1e-9);
            prop_assert!(p.proportions().iter().all(|v| *v >= 0.0));
        }
        let g = pasfr_toward_global(&a, &b, 1.0);
        for (x, y) in g.proportions().iter().zip(b.proportions()) {
            prop_assert!((x - y).abs() <= 1e-6);
        }
    }

    #[test]
    fn projected_trajectories_are_valid(
        earlier in pattern(), base in pattern(), global in pattern(),
        tfr in prop::collection::vec(1.0f64..3.5, 18),
        p3 in prop::option::of(0i32..20),
        f_u in 1.5f64..2.2,
    ) {
        let periods: Vec<Period> = (0..18).map(|i| Period(2010 + 5 * i)).collect();
        let history = PasfrHistory::from_observations(&[(Period(1990), earlier), (Period(2005), base)], 3).unwrap();
        let cfg = FertilityProjectionConfig::new(global);
        let traj = TfrTrajectory { id: 0, tfr: tfr.clone(), phase3_start: p3.map(|i| Period(2000).offset(i)) };
        let tg = estimate_tg(&periods, &tfr, traj.phase3_start, Period(2005), f_u, &cfg).unwrap();
        prop_assert!(tg.t_g >= Period(2015));
        let out = project_pasfr_trajectory(&history, &periods, &traj, f_u, &cfg).unwrap();
        for (p, f) in out.patterns.iter().zip(&tfr) {
            prop_assert!((p.proportions().iter().sum::<f64>() - 1.0).abs() <= 1e-9);
            let a = asfr_from_pasfr(p, *f);
            prop_assert!((5.0 * a.iter().sum::<f64>() - f).abs() <= 1e-12 * f);
        }
        if let Some(from) = out.frozen_from {
            let i = out.periods.iter().position(|p| *p == from).unwrap_or(0);
            let frozen = out.patterns[i];
            prop_assert!(out.patterns[i..].iter().all(|p| *p == frozen));
        }
    }
}
