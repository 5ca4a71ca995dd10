#![allow(dead_code)]

use std::path::PathBuf;

use ihnc::io::read_table;
use ihnc::thermo::{tabulate_truncated_shifted_lj, LjParams};
use ihnc::{make_grid, RadialGrid, StatePoint, TableKind, Tabulated};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

/// Grid of the benchmark: dr = 0.02, 463 RDF points, potentials up to 2.5.
pub fn fixture_grid() -> RadialGrid {
    make_grid(0.02, 463, 125).unwrap()
}

pub fn fixture_state() -> StatePoint {
    StatePoint::new(0.3, 1.5).unwrap()
}

pub fn fixture_potential() -> Tabulated {
    tabulate_truncated_shifted_lj(fixture_grid(), &LjParams::reduced())
}

pub fn golden_path() -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("tests/data/hnc_tslj_rho0.3_T1.5.dat")
}

/// Stored HNC RDF of the fixture potential, on the fixture grid.
pub fn golden_rdf() -> Tabulated {
    read_table(&golden_path(), TableKind::Rdf).unwrap().with_grid(fixture_grid()).unwrap()
}

/// Smooth random RDF-like table `1 + sum of damped bumps`, kept nonnegative.
pub fn random_rdf(rng: &mut ChaCha8Rng, grid: RadialGrid, amplitude: f64) -> Tabulated {
    let bumps: Vec<(f64, f64, f64)> = (0..3)
        .map(|_| {
            (
                rng.gen_range(-amplitude..amplitude),
                rng.gen_range(0.5..3.0),
                rng.gen_range(0.1..0.6),
            )
        })
        .collect();
    Tabulated::from_fn(grid, TableKind::Rdf, |r| {
        let h: f64 = bumps
            .iter()
            .map(|(a, c, w)| a * (-(r - c) * (r - c) / (w * w)).exp())
            .sum();
        (1.0 + h).max(0.0)
    })
    .unwrap()
}

pub fn random_vector(rng: &mut ChaCha8Rng, len: usize) -> Vec<f64> {
    (0..len).map(|_| rng.gen_range(-1.0..1.0)).collect()
}

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

pub fn max_abs_diff(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).fold(0.0f64, |acc, (x, y)| acc.max((x - y).abs()))
}
