#[path = "support/life_table_oracle.rs"]
mod life_table_oracle;

use life_table_oracle::oracle_table;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use vitalrates_core::domain::{AgeGrid, MortalitySchedule, Sex};
use vitalrates_core::life_table::{build_life_table, e0_from_mx};

fn random_schedule(rng: &mut ChaCha8Rng) -> MortalitySchedule {
    let open = 5 * rng.gen_range(17..=26);
    let grid = AgeGrid::abridged(open).unwrap();
    let infant = 10f64.powf(rng.gen_range(-3.0..-0.5));
    let level = 10f64.powf(rng.gen_range(-5.0..-3.5));
    let slope = rng.gen_range(0.07..0.11);
    let rates = grid
        .groups()
        .iter()
        .map(|g| {
            let base = match g.start {
                0 => infant,
                1 => infant * rng.gen_range(0.05..0.3),
                _ => 5e-4 + level * (slope * g.midpoint()).exp(),
            };
            (base * rng.gen_range(0.8..1.25)).min(3.0)
        })
        .collect();
    MortalitySchedule::new(grid, rates).unwrap()
}

fn assert_column(name: &str, got: &[f64], want: &[f64]) {
    for (i, (g, w)) in got.iter().zip(want).enumerate() {
        assert!((g - w).abs() <= 1e-12, "{name}[{i}]: {g} vs {w}");
    }
}

#[test]
fn matches_direct_evaluation_on_random_schedules() {
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    for _ in 0..1000 {
        let m = random_schedule(&mut rng);
        let sex = if rng.gen_bool(0.5) { Sex::Male } else { Sex::Female };
        let t = build_life_table(&m, sex).unwrap();
        let starts: Vec<u32> = m.grid().groups().iter().map(|g| g.start).collect();
        let widths: Vec<Option<u32>> = m.grid().groups().iter().map(|g| g.width).collect();
        let o = oracle_table(&starts, &widths, m.rates(), sex == Sex::Male);
        assert_column("ax", &t.ax, &o.ax);
        assert_column("qx", &t.qx, &o.qx);
        assert_column("lx", &t.lx, &o.lx);
        assert_column("dx", &t.dx, &o.dx);
        assert_column("Lx", &t.person_years, &o.big_l);
        assert_column("Tx", &t.tx, &o.tx);
        assert_column("ex", &t.ex, &o.ex);
        assert_eq!(e0_from_mx(&m, sex).unwrap(), t.e0());
    }
}

#[test]
fn high_infant_mortality_constants() {
    let grid = AgeGrid::abridged(100).unwrap();
    let mut rates = vec![0.02; grid.len()];
    rates[0] = 0.25;
    let m = MortalitySchedule::new(grid, rates).unwrap();
    assert_eq!(build_life_table(&m, Sex::Male).unwrap().ax[0], 0.33);
    assert_eq!(build_life_table(&m, Sex::Female).unwrap().ax[0], 0.35);
}
