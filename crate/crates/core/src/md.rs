//! Canonical-ensemble molecular dynamics for identical particles interacting
//! through a tabulated pair potential.
//!
//! Velocity Verlet with a stochastic velocity-rescaling thermostat, cell
//! lists for the force loop, unit masses and `k_B = 1` unless the state says
//! otherwise.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{ChiSquared, Distribution, StandardNormal};

use crate::error::{Error, Result};
use crate::grid::{RadialGrid, TableKind, Tabulated};
use crate::inversion::{ForwardOperator, ForwardResult};
use crate::spline::CubicSpline;
use crate::state::StatePoint;

/// Kinetic energy per degree of freedom (in units of `kT`) treated as a blow-up.
const BLOWUP_FACTOR: f64 = 1e4;

/// Extra reach of the pair list beyond the cutoff.
const SKIN: f64 = 0.3;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MdParams {
    pub dt: f64,
    pub equilibration_steps: usize,
    pub production_steps: usize,
    pub sample_stride: usize,
    /// Thermostat time constant; `f64::INFINITY` switches the thermostat off.
    pub tau_t: f64,
    pub seed: u64,
    /// Number of blocks for the error estimates.
    pub blocks: usize,
}

impl Default for MdParams {
    fn default() -> Self {
        Self {
            dt: 0.002,
            equilibration_steps: 50_000,
            production_steps: 35_000,
            sample_stride: 10,
            tau_t: 0.2,
            seed: 1,
            blocks: 20,
        }
    }
}

impl MdParams {
    pub fn validate(&self) -> Result<()> {
        if !(self.dt > 0.0 && self.dt.is_finite()) {
            return Err(Error::InvalidArgument(format!("timestep must be > 0, got {}", self.dt)));
        }
        if self.sample_stride == 0 || self.production_steps < self.sample_stride {
            return Err(Error::InvalidArgument(format!(
                "need production steps ({}) >= sampling stride ({}) > 0",
                self.production_steps, self.sample_stride
            )));
        }
        if !(self.tau_t > 0.0) {
            return Err(Error::InvalidArgument(format!(
                "thermostat time constant must be > 0, got {}",
                self.tau_t
            )));
        }
        if self.blocks == 0 {
            return Err(Error::InvalidArgument("need at least one block".into()));
        }
        Ok(())
    }

    pub fn frames(&self) -> usize {
        self.production_steps / self.sample_stride
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct MdResult {
    pub g: Tabulated,
    /// Standard error of each RDF bin from block averages.
    pub g_err: Vec<f64>,
    pub pressure: f64,
    pub pressure_err: f64,
    pub temperature: f64,
    pub potential_energy: f64,
    pub frames: usize,
    /// Final particle positions, handy for continuing a run.
    pub final_positions: Vec<[f64; 3]>,
}

/// Potential values above this many `kT` are never sampled; the table is
/// continued linearly below the first node that exceeds it.
pub const WALL_CAP_KT: f64 = 1e3;

/// Pair potential and force from a cubic spline through the tenfold-refined
/// table; both vanish beyond the cutoff.
///
/// Knots with `u > cap` near the origin are dropped, because the huge values of
/// an extrapolated core wall would otherwise make the spline ring; inside the
/// first kept knot the table continues along its tangent.
#[derive(Debug, Clone)]
pub struct PairTable {
    spline: CubicSpline,
    start: f64,
    wall: (f64, f64),
    cutoff: f64,
}

impl PairTable {
    pub fn new(u: &Tabulated, cap: f64) -> Result<Self> {
        let grid = u.grid();
        let vals = u.values();
        let first = vals.iter().rposition(|v| !(*v <= cap)).map_or(0, |j| j + 1);
        if first + 2 > vals.len() {
            return Err(Error::InvalidArgument(format!(
                "potential exceeds {cap} almost everywhere; cannot tabulate forces"
            )));
        }
        let start = grid.r(first);
        let coarse = CubicSpline::uniform(start, grid.dr(), vals[first..].to_vec());
        let h = grid.dr() / 10.0;
        let count = 10 * (vals.len() - first - 1) + 1;
        let fine: Vec<f64> = (0..count)
            .map(|i| if i % 10 == 0 { vals[first + i / 10] } else { coarse.eval(start + i as f64 * h) })
            .collect();
        let spline = CubicSpline::uniform(start, h, fine);
        let wall = spline.eval_with_derivative(start);
        Ok(Self { spline, start, wall, cutoff: grid.cutoff() })
    }

    pub fn cutoff(&self) -> f64 {
        self.cutoff
    }

    /// `(u(r), -u'(r))`.
    #[inline]
    pub fn eval(&self, r: f64) -> (f64, f64) {
        if r >= self.cutoff {
            return (0.0, 0.0);
        }
        if r < self.start {
            let (v, d) = self.wall;
            return (v + d * (r - self.start), -d);
        }
        let (v, d) = self.spline.eval_with_derivative(r);
        (v, -d)
    }
}

/// Cubic periodic box state: positions, velocities, forces and a private RNG.
pub struct Simulation {
    table: PairTable,
    box_len: f64,
    kt: f64,
    dt: f64,
    tau_t: f64,
    pos: Vec<[f64; 3]>,
    vel: Vec<[f64; 3]>,
    force: Vec<[f64; 3]>,
    potential: f64,
    virial: f64,
    rng: ChaCha8Rng,
    cells: CellGrid,
    skin: f64,
    neighbors: Vec<(u32, u32)>,
    reference: Vec<[f64; 3]>,
    steps: usize,
}

impl Simulation {
    pub fn new(u: &Tabulated, state: &StatePoint, params: &MdParams) -> Result<Self> {
        Self::with_positions(u, state, params, None)
    }

    /// Start from given positions (wrapped into the box) or from a simple-cubic lattice.
    pub fn with_positions(
        u: &Tabulated,
        state: &StatePoint,
        params: &MdParams,
        positions: Option<&[[f64; 3]]>,
    ) -> Result<Self> {
        params.validate()?;
        let n = state.particles;
        if n < 2 {
            return Err(Error::InvalidArgument(format!("need at least 2 particles, got {n}")));
        }
        if !(state.density > 0.0) {
            return Err(Error::InvalidArgument("MD needs a positive density".into()));
        }
        let box_len = (n as f64 / state.density).cbrt();
        let table = PairTable::new(u, WALL_CAP_KT * state.kt())?;
        let mut rng = ChaCha8Rng::seed_from_u64(params.seed);
        let pos = match positions {
            Some(p) if p.len() == n => {
                p.iter().map(|x| x.map(|c| c - box_len * (c / box_len).floor())).collect()
            }
            Some(p) => {
                return Err(Error::InvalidArgument(format!(
                    "{} start positions for {n} particles",
                    p.len()
                )))
            }
            None => cubic_lattice(n, box_len),
        };
        let kt = state.kt();
        let mut vel: Vec<[f64; 3]> = (0..n)
            .map(|_| {
                let mut v = [0.0; 3];
                for c in &mut v {
                    let z: f64 = rng.sample(StandardNormal);
                    *c = z * kt.sqrt();
                }
                v
            })
            .collect();
        remove_drift(&mut vel);
        let k = kinetic(&vel);
        let dof = (3 * n - 3) as f64;
        if k > 0.0 {
            let s = (0.5 * dof * kt / k).sqrt();
            vel.iter_mut().for_each(|v| v.iter_mut().for_each(|c| *c *= s));
        }
        let skin = SKIN.min(0.5 * box_len - table.cutoff()).max(0.0);
        let cells = CellGrid::new(box_len, table.cutoff() + skin);
        let mut sim = Self {
            table,
            box_len,
            kt,
            dt: params.dt,
            tau_t: params.tau_t,
            pos,
            vel,
            force: vec![[0.0; 3]; n],
            potential: 0.0,
            virial: 0.0,
            rng,
            cells,
            skin,
            neighbors: Vec::new(),
            reference: Vec::new(),
            steps: 0,
        };
        sim.compute_forces();
        Ok(sim)
    }

    pub fn len(&self) -> usize {
        self.pos.len()
    }

    pub fn is_empty(&self) -> bool {
        self.pos.is_empty()
    }

    pub fn box_length(&self) -> f64 {
        self.box_len
    }

    pub fn volume(&self) -> f64 {
        self.box_len.powi(3)
    }

    pub fn positions(&self) -> &[[f64; 3]] {
        &self.pos
    }

    pub fn velocities(&self) -> &[[f64; 3]] {
        &self.vel
    }

    pub fn kinetic_energy(&self) -> f64 {
        kinetic(&self.vel)
    }

    pub fn potential_energy(&self) -> f64 {
        self.potential
    }

    pub fn total_energy(&self) -> f64 {
        self.kinetic_energy() + self.potential
    }

    pub fn total_momentum(&self) -> [f64; 3] {
        let mut p = [0.0; 3];
        for v in &self.vel {
            for d in 0..3 {
                p[d] += v[d];
            }
        }
        p
    }

    /// Kinetic temperature `2K / (3N - 3)`.
    pub fn temperature(&self) -> f64 {
        2.0 * self.kinetic_energy() / (3 * self.len() - 3) as f64
    }

    /// Instantaneous virial pressure `(N kT_inst + W/3) / V`, `W = sum r F(r)`.
    pub fn pressure(&self) -> f64 {
        (self.len() as f64 * self.temperature() + self.virial / 3.0) / self.volume()
    }

    /// One velocity-Verlet step followed by the thermostat.
    pub fn step(&mut self) -> Result<()> {
        let (dt, l) = (self.dt, self.box_len);
        for (v, f) in self.vel.iter_mut().zip(&self.force) {
            for d in 0..3 {
                v[d] += 0.5 * dt * f[d];
            }
        }
        for (x, v) in self.pos.iter_mut().zip(&self.vel) {
            for d in 0..3 {
                let mut c = x[d] + dt * v[d];
                if c >= l {
                    c -= l;
                } else if c < 0.0 {
                    c += l;
                }
                if !(0.0..l).contains(&c) {
                    c -= l * (c / l).floor();
                }
                x[d] = c;
            }
        }
        self.compute_forces();
        for (v, f) in self.vel.iter_mut().zip(&self.force) {
            for d in 0..3 {
                v[d] += 0.5 * dt * f[d];
            }
        }
        if self.tau_t.is_finite() {
            self.thermostat();
        }
        self.steps += 1;
        let k = self.kinetic_energy();
        let dof = (3 * self.len() - 3) as f64;
        if !k.is_finite() || k > BLOWUP_FACTOR * 0.5 * dof * self.kt {
            return Err(Error::BlowUp { step: self.steps, kinetic: k });
        }
        Ok(())
    }

    /// Stochastic velocity rescaling towards the canonical kinetic energy.
    fn thermostat(&mut self) {
        let dof = (3 * self.len() - 3) as f64;
        let k = self.kinetic_energy();
        if k <= 0.0 {
            return;
        }
        let target = 0.5 * dof * self.kt;
        let c = (-self.dt / self.tau_t).exp();
        let r1: f64 = self.rng.sample(StandardNormal);
        let rest = if dof > 1.0 {
            ChiSquared::new(dof - 1.0).expect("positive dof").sample(&mut self.rng)
        } else {
            0.0
        };
        let k_new = c * k
            + target / dof * (1.0 - c) * (r1 * r1 + rest)
            + 2.0 * r1 * (c * (1.0 - c) * k * target / dof).sqrt();
        let alpha = (k_new.max(0.0) / k).sqrt();
        self.vel.iter_mut().for_each(|v| v.iter_mut().for_each(|x| *x *= alpha));
    }

    fn needs_rebuild(&self) -> bool {
        if self.reference.len() != self.pos.len() {
            return true;
        }
        let (l, half) = (self.box_len, 0.5 * self.box_len);
        let limit = 0.25 * self.skin * self.skin;
        self.pos.iter().zip(&self.reference).any(|(p, q)| {
            let mut r2 = 0.0;
            for k in 0..3 {
                let x = min_image(p[k] - q[k], l, half);
                r2 += x * x;
            }
            r2 > limit
        })
    }

    /// Rebuild the pair list for radius `cutoff + skin` from the cell grid.
    fn rebuild_neighbors(&mut self) {
        let (l, half) = (self.box_len, 0.5 * self.box_len);
        let reach = self.table.cutoff() + self.skin;
        let reach2 = reach * reach;
        let pos = &self.pos;
        let list = &mut self.neighbors;
        list.clear();
        let mut visit = |i: usize, j: usize| {
            let mut r2 = 0.0;
            for k in 0..3 {
                let x = min_image(pos[i][k] - pos[j][k], l, half);
                r2 += x * x;
            }
            if r2 < reach2 {
                list.push((i.min(j) as u32, i.max(j) as u32));
            }
        };
        let n = pos.len();
        if self.cells.per_side < 3 {
            for i in 0..n {
                for j in i + 1..n {
                    visit(i, j);
                }
            }
        } else {
            self.cells.rebuild(pos);
            let cells = &self.cells;
            let nc = cells.per_side;
            for cz in 0..nc {
                for cy in 0..nc {
                    for cx in 0..nc {
                        let own = cells.members(cells.index(cx, cy, cz));
                        for (a, &i) in own.iter().enumerate() {
                            for &j in &own[a + 1..] {
                                visit(i, j);
                            }
                        }
                        for &(dx, dy, dz) in HALF_SHELL.iter() {
                            let o = cells.index(
                                wrap(cx as isize + dx, nc),
                                wrap(cy as isize + dy, nc),
                                wrap(cz as isize + dz, nc),
                            );
                            for &i in own {
                                for &j in cells.members(o) {
                                    visit(i, j);
                                }
                            }
                        }
                    }
                }
            }
        }
        self.reference = self.pos.clone();
    }

    fn compute_forces(&mut self) {
        if self.needs_rebuild() {
            self.rebuild_neighbors();
        }
        self.force.iter_mut().for_each(|f| *f = [0.0; 3]);
        let mut potential = 0.0;
        let mut virial = 0.0;
        let (l, half) = (self.box_len, 0.5 * self.box_len);
        let rc2 = self.table.cutoff() * self.table.cutoff();
        for &(i, j) in &self.neighbors {
            let (i, j) = (i as usize, j as usize);
            let (pi, pj) = (self.pos[i], self.pos[j]);
            let d = [
                min_image(pi[0] - pj[0], l, half),
                min_image(pi[1] - pj[1], l, half),
                min_image(pi[2] - pj[2], l, half),
            ];
            let r2 = d[0] * d[0] + d[1] * d[1] + d[2] * d[2];
            if r2 >= rc2 {
                continue;
            }
            let r = r2.sqrt();
            let (u, f) = self.table.eval(r);
            potential += u;
            virial += r * f;
            let s = f / r;
            for k in 0..3 {
                self.force[i][k] += s * d[k];
                self.force[j][k] -= s * d[k];
            }
        }
        self.potential = potential;
        self.virial = virial;
    }
}

/// Minimum-image coordinate difference for `|x| < box_len`.
#[inline]
fn min_image(x: f64, l: f64, half: f64) -> f64 {
    if x > half {
        x - l
    } else if x < -half {
        x + l
    } else {
        x
    }
}

const HALF_SHELL: [(isize, isize, isize); 13] = [
    (1, 0, 0),
    (-1, 1, 0),
    (0, 1, 0),
    (1, 1, 0),
    (-1, -1, 1),
    (0, -1, 1),
    (1, -1, 1),
    (-1, 0, 1),
    (0, 0, 1),
    (1, 0, 1),
    (-1, 1, 1),
    (0, 1, 1),
    (1, 1, 1),
];

#[inline]
fn wrap(i: isize, n: usize) -> usize {
    i.rem_euclid(n as isize) as usize
}

#[derive(Debug, Clone)]
struct CellGrid {
    per_side: usize,
    edge: f64,
    start: Vec<usize>,
    order: Vec<usize>,
}

impl CellGrid {
    fn new(box_len: f64, cutoff: f64) -> Self {
        let per_side = ((box_len / cutoff).floor() as usize).max(1);
        Self { per_side, edge: box_len / per_side as f64, start: Vec::new(), order: Vec::new() }
    }

    #[inline]
    fn index(&self, x: usize, y: usize, z: usize) -> usize {
        (z * self.per_side + y) * self.per_side + x
    }

    fn cell_of(&self, p: &[f64; 3]) -> usize {
        let nc = self.per_side;
        let c = |x: f64| ((x / self.edge) as usize).min(nc - 1);
        self.index(c(p[0]), c(p[1]), c(p[2]))
    }

    /// Counting sort of particles by cell; members keep ascending index order.
    fn rebuild(&mut self, pos: &[[f64; 3]]) {
        let total = self.per_side.pow(3);
        let mut counts = vec![0usize; total + 1];
        let ids: Vec<usize> = pos.iter().map(|p| self.cell_of(p)).collect();
        for &c in &ids {
            counts[c + 1] += 1;
        }
        for c in 0..total {
            counts[c + 1] += counts[c];
        }
        self.start = counts.clone();
        self.order = vec![0; pos.len()];
        let mut fill = counts;
        for (i, &c) in ids.iter().enumerate() {
            self.order[fill[c]] = i;
            fill[c] += 1;
        }
    }

    #[inline]
    fn members(&self, c: usize) -> &[usize] {
        &self.order[self.start[c]..self.start[c + 1]]
    }
}

fn cubic_lattice(n: usize, box_len: f64) -> Vec<[f64; 3]> {
    let k = (n as f64).cbrt().ceil() as usize;
    let a = box_len / k as f64;
    (0..n)
        .map(|i| {
            let (x, y, z) = (i % k, (i / k) % k, i / (k * k));
            [(x as f64 + 0.5) * a, (y as f64 + 0.5) * a, (z as f64 + 0.5) * a]
        })
        .collect()
}

fn kinetic(vel: &[[f64; 3]]) -> f64 {
    0.5 * vel.iter().map(|v| v[0] * v[0] + v[1] * v[1] + v[2] * v[2]).sum::<f64>()
}

fn remove_drift(vel: &mut [[f64; 3]]) {
    let n = vel.len() as f64;
    let mut mean = [0.0; 3];
    for v in vel.iter() {
        for d in 0..3 {
            mean[d] += v[d] / n;
        }
    }
    for v in vel.iter_mut() {
        for d in 0..3 {
            v[d] -= mean[d];
        }
    }
}

/// Pair histogram with bins of width `dr` centred on the grid radii.
struct RdfAccumulator {
    grid: RadialGrid,
    counts: Vec<u64>,
}

impl RdfAccumulator {
    fn new(grid: RadialGrid) -> Self {
        Self { grid, counts: vec![0; grid.m()] }
    }

    fn sample(&mut self, pos: &[[f64; 3]], box_len: f64) {
        let dr = self.grid.dr();
        let m = self.grid.m();
        let r_hi = (m as f64 + 0.5) * dr;
        let r_hi2 = r_hi * r_hi;
        let half = 0.5 * box_len;
        for i in 0..pos.len() {
            for j in i + 1..pos.len() {
                let mut r2 = 0.0;
                for k in 0..3 {
                    let x = min_image(pos[i][k] - pos[j][k], box_len, half);
                    r2 += x * x;
                }
                if r2 >= r_hi2 {
                    continue;
                }
                let b = (r2.sqrt() / dr + 0.5) as usize;
                if (1..=m).contains(&b) {
                    self.counts[b - 1] += 1;
                }
            }
        }
    }

    /// Normalize by `N(N-1)/2 * V_shell / V` per frame.
    fn normalized(&self, frames: usize, n: usize, volume: f64) -> Vec<f64> {
        let dr = self.grid.dr();
        let pairs = 0.5 * (n * (n - 1)) as f64;
        (0..self.grid.m())
            .map(|j| {
                let r = self.grid.r(j);
                let (lo, hi) = (r - 0.5 * dr, r + 0.5 * dr);
                let shell = 4.0 / 3.0 * std::f64::consts::PI * (hi.powi(3) - lo.powi(3));
                self.counts[j] as f64 / (frames as f64 * pairs * shell / volume)
            })
            .collect()
    }
}

fn mean_and_error(blocks: &[f64]) -> (f64, f64) {
    let b = blocks.len() as f64;
    let mean = blocks.iter().sum::<f64>() / b;
    if blocks.len() < 2 {
        return (mean, f64::NAN);
    }
    let var = blocks.iter().map(|x| (x - mean) * (x - mean)).sum::<f64>() / (b - 1.0);
    (mean, (var / b).sqrt())
}

/// Canonical MD run; see [`run_nvt_observed`] for access to sampled frames.
pub fn run_nvt(u: &Tabulated, state: &StatePoint, params: &MdParams) -> Result<MdResult> {
    run_nvt_observed(u, state, params, None, None)
}

/// MD run that optionally starts from `start` positions and reports every
/// sampled production frame to `observer`.
pub fn run_nvt_observed(
    u: &Tabulated,
    state: &StatePoint,
    params: &MdParams,
    start: Option<&[[f64; 3]]>,
    mut observer: Option<&mut dyn FnMut(&[[f64; 3]])>,
) -> Result<MdResult> {
    params.validate()?;
    if u.kind() != TableKind::Potential {
        return Err(Error::InvalidArgument("MD needs a potential table".into()));
    }
    let mut sim = Simulation::with_positions(u, state, params, start)?;
    let grid = *u.grid();
    let half = 0.5 * sim.box_length();
    if grid.r_max() > half * (1.0 + 1e-12) {
        return Err(Error::RdfRangeExceedsBox { r_max: grid.r_max(), half_box: half });
    }
    for _ in 0..params.equilibration_steps {
        sim.step()?;
    }

    let frames = params.frames();
    let blocks = params.blocks.min(frames);
    let per_block = frames / blocks;
    let used = per_block * blocks;
    let n = sim.len();
    let volume = sim.volume();
    let mut total = RdfAccumulator::new(grid);
    let mut block_rdf = RdfAccumulator::new(grid);
    let mut block_g: Vec<Vec<f64>> = Vec::with_capacity(blocks);
    let mut block_p = Vec::with_capacity(blocks);
    let (mut p_acc, mut t_acc, mut e_acc) = (0.0, 0.0, 0.0);
    let (mut p_sum, mut t_sum, mut e_sum) = (0.0, 0.0, 0.0);
    let mut in_block = 0;
    let mut sampled = 0;
    for step in 1..=params.production_steps {
        sim.step()?;
        if step % params.sample_stride != 0 || sampled >= used {
            continue;
        }
        sampled += 1;
        let (p, t, e) = (sim.pressure(), sim.temperature(), sim.potential_energy());
        p_acc += p;
        t_acc += t;
        e_acc += e;
        block_rdf.sample(sim.positions(), sim.box_length());
        if let Some(obs) = observer.as_mut() {
            obs(sim.positions());
        }
        in_block += 1;
        if in_block == per_block {
            block_g.push(block_rdf.normalized(per_block, n, volume));
            block_p.push(p_acc / per_block as f64);
            for (a, b) in total.counts.iter_mut().zip(&block_rdf.counts) {
                *a += b;
            }
            block_rdf = RdfAccumulator::new(grid);
            p_sum += p_acc;
            t_sum += t_acc;
            e_sum += e_acc;
            p_acc = 0.0;
            t_acc = 0.0;
            e_acc = 0.0;
            in_block = 0;
        }
    }
    let g_values = total.normalized(used, n, volume);
    let g_err = (0..grid.m())
        .map(|j| mean_and_error(&block_g.iter().map(|b| b[j]).collect::<Vec<_>>()).1)
        .collect();
    let (_, pressure_err) = mean_and_error(&block_p);
    Ok(MdResult {
        g: Tabulated::new(grid, g_values, TableKind::Rdf)?,
        g_err,
        pressure: p_sum / used as f64,
        pressure_err,
        temperature: t_sum / used as f64,
        potential_energy: e_sum / used as f64,
        frames: used,
        final_positions: sim.positions().to_vec(),
    })
}

/// `p = rho/beta - (2/3) pi rho^2 int u'(r) g(r) r^3 dr` with `u'` from
/// differences on each grid interval and the trapezoidal mean of `g`.
pub fn virial_pressure_quadrature(u: &Tabulated, g: &Tabulated, state: &StatePoint) -> f64 {
    let grid = u.grid();
    let rho = state.density;
    let pre = 2.0 / 3.0 * std::f64::consts::PI * rho * rho;
    let (uv, gv) = (u.values(), g.values());
    let mut sum = 0.0;
    for i in 0..u.len().saturating_sub(1) {
        let du = uv[i + 1] - uv[i];
        if du == 0.0 {
            continue;
        }
        let (r0, r1) = (grid.r(i), grid.r(i + 1));
        let gm = 0.5 * (gv[i] + gv[i + 1]);
        sum += du / grid.dr() * gm * (r1.powi(4) - r0.powi(4)) / 4.0;
    }
    state.ideal_pressure() - pre * sum
}

/// MD forward model for the inversion loop. Each call uses a fresh seed
/// derived from the base seed; after the first call the run starts from the
/// previous final configuration with `continuation_equilibration` steps.
pub struct MdForward {
    pub params: MdParams,
    pub continuation_equilibration: usize,
    calls: u64,
    last: Option<Vec<[f64; 3]>>,
    pub results: Vec<MdResult>,
}

impl MdForward {
    pub fn new(params: MdParams, continuation_equilibration: usize) -> Self {
        Self { params, continuation_equilibration, calls: 0, last: None, results: Vec::new() }
    }
}

impl ForwardOperator for MdForward {
    fn evaluate(&mut self, u: &Tabulated, state: &StatePoint) -> Result<ForwardResult> {
        let mut params = self.params;
        params.seed = self.params.seed.wrapping_add(self.calls);
        if self.last.is_some() {
            params.equilibration_steps = self.continuation_equilibration;
        }
        self.calls += 1;
        let res = run_nvt_observed(u, state, &params, self.last.as_deref(), None)?;
        self.last = Some(res.final_positions.clone());
        let out = ForwardResult { g: res.g.clone(), pressure: Some(res.pressure) };
        self.results.push(res);
        Ok(out)
    }
}
