mod common;

use common::max_abs_diff;
use ihnc::md::*;
use ihnc::thermo::{tabulate_truncated_shifted_lj, LjParams};
use ihnc::{make_grid, Error, RadialGrid, StatePoint, Tabulated};

fn critical_state() -> StatePoint {
    StatePoint::new(0.304, 1.316).unwrap().with_particles(500)
}

/// Largest grid with spacing `dr` that fits in half the box.
fn box_grid(state: &StatePoint, dr: f64, n: usize) -> RadialGrid {
    let half = 0.5 * (state.particles as f64 / state.density).cbrt();
    make_grid(dr, (half / dr).floor() as usize, n).unwrap()
}

fn short_params() -> MdParams {
    MdParams { equilibration_steps: 2000, production_steps: 2000, ..Default::default() }
}

#[test]
fn ideal_gas_rdf_and_pressure() {
    let state = critical_state();
    let grid = box_grid(&state, 0.02, 125);
    let zero = Tabulated::potential(grid, vec![0.0; 125]).unwrap();
    let params = MdParams { equilibration_steps: 1000, production_steps: 20_000, ..Default::default() };
    let res = run_nvt(&zero, &state, &params).unwrap();
    assert_eq!(res.frames, 2000);

    let z: Vec<f64> = res.g.values().iter().zip(&res.g_err).map(|(g, e)| (g - 1.0) / e).collect();
    let beyond3 = z.iter().filter(|x| x.abs() > 3.0).count();
    let worst = z.iter().fold(0.0f64, |a, b| a.max(b.abs()));
    // 3 sigma per bin: a handful of exceedances among ~300 bins is expected by chance
    assert!(beyond3 as f64 <= 0.02 * z.len() as f64, "{beyond3} of {} bins beyond 3 sigma", z.len());
    assert!(worst < 5.0, "max |z| = {worst}");

    let ideal = state.ideal_pressure();
    assert!((res.pressure - ideal).abs() <= 3.0 * res.pressure_err, "{} vs {ideal}", res.pressure);
    assert!((res.temperature - state.temperature).abs() < 0.02 * state.temperature);
}

#[test]
fn same_seed_gives_identical_results() {
    let state = critical_state();
    let grid = box_grid(&state, 0.05, 50);
    let u = tabulate_truncated_shifted_lj(grid, &LjParams::reduced());
    let params = MdParams { equilibration_steps: 200, production_steps: 200, ..Default::default() };
    let a = run_nvt(&u, &state, &params).unwrap();
    let b = run_nvt(&u, &state, &params).unwrap();
    assert_eq!(a, b);
    let c = run_nvt(&u, &state, &MdParams { seed: 2, ..params }).unwrap();
    assert_ne!(a.g.values(), c.g.values());
}

#[test]
fn thermostat_preserves_zero_momentum() {
    let state = critical_state();
    let grid = box_grid(&state, 0.05, 50);
    let u = tabulate_truncated_shifted_lj(grid, &LjParams::reduced());
    let mut sim = Simulation::new(&u, &state, &MdParams::default()).unwrap();
    for _ in 0..5000 {
        sim.step().unwrap();
        let p = sim.total_momentum();
        assert!(p.iter().all(|c| c.abs() <= 1e-10), "{p:?}");
    }
}

#[test]
fn nve_energy_drift() {
    let state = StatePoint::new(0.8, 1.0).unwrap().with_particles(500);
    let grid = box_grid(&state, 0.02, 125);
    let u = tabulate_truncated_shifted_lj(grid, &LjParams::reduced());
    let nvt = MdParams { dt: 0.001, ..Default::default() };
    let mut melt = Simulation::new(&u, &state, &nvt).unwrap();
    for _ in 0..3000 {
        melt.step().unwrap();
    }
    let nve = MdParams { tau_t: f64::INFINITY, ..nvt };
    let mut sim = Simulation::with_positions(&u, &state, &nve, Some(melt.positions())).unwrap();
    let e0 = sim.total_energy();
    for _ in 0..10_000 {
        sim.step().unwrap();
    }
    let drift = ((sim.total_energy() - e0) / e0).abs();
    assert!(drift <= 1e-3, "relative drift {drift}");
    assert!(sim.total_momentum().iter().all(|c| c.abs() <= 1e-10));
}

#[test]
fn lj_fluid_structure_and_pressure_routes() {
    let state = critical_state();
    // fine bins: coarse ones bias the quadrature through the steep core edge
    let grid = box_grid(&state, 0.005, 500);
    let u = tabulate_truncated_shifted_lj(grid, &LjParams::reduced());
    let params = MdParams { equilibration_steps: 10_000, production_steps: 20_000, ..Default::default() };
    let res = run_nvt(&u, &state, &params).unwrap();
    let g = res.g.values();

    let peak = g.iter().cloned().fold(0.0, f64::max);
    assert!(peak > 1.0, "first peak {peak}");
    let tail = &g[g.len() - g.len() / 10..];
    let mean = tail.iter().sum::<f64>() / tail.len() as f64;
    assert!((mean - 1.0).abs() <= 0.02, "tail mean {mean}");

    let quad = virial_pressure_quadrature(&u, &res.g, &state);
    // the quadrature error is not independent of the virial's, so this is conservative
    let sigma = res.pressure_err * std::f64::consts::SQRT_2;
    assert!((quad - res.pressure).abs() <= 3.0 * sigma, "quad {quad} virial {} +- {}", res.pressure, res.pressure_err);
}

#[test]
fn rdf_range_must_fit_in_half_box() {
    let state = critical_state();
    let half = 0.5 * (500.0f64 / 0.304).cbrt();
    let grid = make_grid(0.02, (half / 0.02) as usize + 5, 125).unwrap();
    let u = tabulate_truncated_shifted_lj(grid, &LjParams::reduced());
    assert!(matches!(
        run_nvt(&u, &state, &short_params()),
        Err(Error::RdfRangeExceedsBox { .. })
    ));
}

#[test]
fn invalid_parameters_are_rejected() {
    let state = critical_state();
    let grid = box_grid(&state, 0.05, 50);
    let u = tabulate_truncated_shifted_lj(grid, &LjParams::reduced());
    let bad = [
        MdParams { dt: 0.0, ..short_params() },
        MdParams { production_steps: 5, sample_stride: 10, ..short_params() },
        MdParams { sample_stride: 0, ..short_params() },
    ];
    for p in bad {
        assert!(run_nvt(&u, &state, &p).is_err());
    }
    let lonely = StatePoint::new(0.3, 1.0).unwrap().with_particles(1);
    assert!(run_nvt(&u, &lonely, &short_params()).is_err());
}

#[test]
fn hot_potential_blows_up() {
    let state = critical_state();
    let grid = box_grid(&state, 0.05, 50);
    // strongly attractive well: particles collapse and the kinetic energy diverges
    let u = Tabulated::from_fn(grid, ihnc::TableKind::Potential, |r| -1e4 * (2.5 - r).max(0.0))
        .unwrap();
    let params = MdParams { dt: 0.01, ..short_params() };
    assert!(matches!(run_nvt(&u, &state, &params), Err(Error::BlowUp { .. })));
}

#[test]
fn observer_sees_every_frame() {
    let state = critical_state();
    let grid = box_grid(&state, 0.05, 50);
    let u = tabulate_truncated_shifted_lj(grid, &LjParams::reduced());
    let params = MdParams { equilibration_steps: 100, production_steps: 400, ..Default::default() };
    let mut frames = 0;
    let mut last = Vec::new();
    let mut obs = |pos: &[[f64; 3]]| {
        frames += 1;
        last = pos.to_vec();
    };
    let res = run_nvt_observed(&u, &state, &params, None, Some(&mut obs)).unwrap();
    assert_eq!(frames, 40);
    assert_eq!(res.frames, 40);
    assert_eq!(last, res.final_positions);
}

#[test]
fn quadrature_of_ideal_gas() {
    let state = critical_state();
    let grid = box_grid(&state, 0.02, 125);
    let zero = Tabulated::potential(grid, vec![0.0; 125]).unwrap();
    let g = Tabulated::rdf(grid, vec![1.0; grid.m()]).unwrap();
    assert_eq!(virial_pressure_quadrature(&zero, &g, &state), state.ideal_pressure());
}

#[test]
fn pair_table_matches_lj_force() {
    let grid = make_grid(0.01, 250, 250).unwrap();
    let lj = LjParams::reduced();
    let u = tabulate_truncated_shifted_lj(grid, &lj);
    let table = PairTable::new(&u, WALL_CAP_KT).unwrap();
    let rs: Vec<f64> = (0..50).map(|i| 0.95 + 0.03 * i as f64).collect();
    let got: Vec<f64> = rs.iter().map(|&r| table.eval(r).1).collect();
    let want: Vec<f64> = rs
        .iter()
        .map(|&r| {
            let s6 = r.powi(-6);
            24.0 * (2.0 * s6 * s6 - s6) / r
        })
        .collect();
    assert!(max_abs_diff(&got, &want) < 0.05 * want.iter().fold(1.0f64, |a, b| a.max(b.abs())));
    assert_eq!(table.eval(2.6), (0.0, 0.0));
}
