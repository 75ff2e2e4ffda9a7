use chemotaxis_waves::field::{solve_field_kernel, solve_field_ode, FieldBc, KernelOptions};
use chemotaxis_waves::{Grid, Profile};
use proptest::prelude::*;

fn bumps() -> impl Strategy<Value = Vec<(f64, f64, f64)>> {
    prop::collection::vec((-1.0f64..1.0, -10.0f64..10.0, 0.5f64..3.0), 1..4)
}

fn profile(grid: Grid, base: f64, bumps: &[(f64, f64, f64)]) -> Profile {
    Profile::from_fn(grid, |x| {
        base + bumps
            .iter()
            .map(|(amp, x0, w)| amp * (-((x - x0) / w).powi(2)).exp())
            .sum::<f64>()
    })
}

#[test]
fn constant_source_gives_equal_constant_field() {
    let grid = Grid::new(-5.0, 5.0, 201).unwrap();
    let u = Profile::constant(grid, 0.7);
    for (tau, c) in [(0.0, 0.0), (0.5, 2.5), (0.9, -3.0)] {
        let v = solve_field_ode(&u, tau, c, FieldBc::neumann()).unwrap();
        assert!(v.values.iter().all(|&x| (x - 0.7).abs() < 1e-12));
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(32))]

    #[test]
    fn ode_solve_is_linear(
        b1 in bumps(), b2 in bumps(),
        alpha in -2.0f64..2.0, beta in -2.0f64..2.0,
        tau in 0.0f64..0.95, c in -4.0f64..4.0,
    ) {
        let grid = Grid::new(-20.0, 20.0, 401).unwrap();
        let u1 = profile(grid, 0.3, &b1);
        let u2 = profile(grid, -0.1, &b2);
        let mix = u1.zip_map(&u2, |x, y| alpha * x + beta * y);
        let bc = FieldBc::neumann();
        let v1 = solve_field_ode(&u1, tau, c, bc).unwrap();
        let v2 = solve_field_ode(&u2, tau, c, bc).unwrap();
        let vm = solve_field_ode(&mix, tau, c, bc).unwrap();
        let expected = v1.zip_map(&v2, |x, y| alpha * x + beta * y);
        prop_assert!(vm.sup_distance(&expected) <= 1e-10 * (1.0 + expected.sup_norm()));
    }

    #[test]
    fn nonnegative_source_gives_nonnegative_field(
        b in bumps(), tau in 0.0f64..0.99, c in -50.0f64..50.0, decay in prop::option::of(0.01f64..2.0),
    ) {
        // Large |tau c| exercises the upwinded rows.
        let grid = Grid::new(-20.0, 20.0, 401).unwrap();
        let u = profile(grid, 0.0, &b).map(f64::abs);
        let bc = FieldBc { left_growth: 0.0, right_decay: decay };
        let v = solve_field_ode(&u, tau, c, bc).unwrap();
        prop_assert!(v.min() >= -1e-14, "min {}", v.min());
        prop_assert!(v.max() <= u.max() * (1.0 + 1e-12) + 1e-14);
    }

    #[test]
    fn kernel_agrees_with_ode(b in bumps(), base in 0.0f64..2.0, tau in 0.0f64..0.9, c in -2.0f64..3.0) {
        let grid = Grid::with_spacing(-30.0, 30.0, 0.1).unwrap();
        let u = profile(grid, base, &b);
        let ode = solve_field_ode(&u, tau, c, FieldBc::neumann()).unwrap();
        let kernel = solve_field_kernel(&u, tau, c, KernelOptions::default()).unwrap();
        let (lo, hi) = (grid.index_below(-15.0), grid.index_below(15.0));
        let err = (lo..hi).map(|i| (ode.values[i] - kernel.values[i]).abs()).fold(0.0, f64::max);
        prop_assert!(err <= 1e-3f64.max(10.0 * grid.dx * grid.dx), "err {}", err);
    }
}
