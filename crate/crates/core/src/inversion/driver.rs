use crate::error::{Error, Result};
use crate::grid::Tabulated;
use crate::inversion::config::{Scheme, SchemeConfig};
use crate::inversion::hncgn::GaussNewton;
use crate::inversion::history::{IterationFailure, IterationHistory, IterationRecord};
use crate::inversion::metrics::{data_fit, error_metric, sup_distance};
use crate::inversion::steps::{
    hncn_step_with, ibi_step, ihnc_step_with, lwr_step_with, pmf_initial_guess, pyv_step_with,
    relative_step, TargetLinearization,
};
use crate::md::virial_pressure_quadrature;
use crate::oz::HncSolver;
use crate::state::StatePoint;

/// Output of one forward evaluation `g_k = G(u_k)`.
#[derive(Debug, Clone)]
pub struct ForwardResult {
    pub g: Tabulated,
    /// Pressure measured by the forward model, if it has its own estimate.
    pub pressure: Option<f64>,
}

/// Map from a pair potential to the radial distribution function it generates.
pub trait ForwardOperator {
    fn evaluate(&mut self, u: &Tabulated, state: &StatePoint) -> Result<ForwardResult>;
}

/// HNC forward model; each solve starts from the previous indirect correlation.
pub struct HncForward {
    pub solver: HncSolver,
    warm: Option<Vec<f64>>,
}

impl HncForward {
    pub fn new(solver: HncSolver) -> Self {
        Self { solver, warm: None }
    }
}

impl Default for HncForward {
    fn default() -> Self {
        Self::new(HncSolver::default())
    }
}

impl ForwardOperator for HncForward {
    fn evaluate(&mut self, u: &Tabulated, state: &StatePoint) -> Result<ForwardResult> {
        let sol = match self.warm.as_deref() {
            Some(gamma) => match self.solver.solve_from(u, state, Some(gamma)) {
                Ok(sol) => sol,
                Err(Error::SingularStructureFactor { .. }) | Err(Error::NoConvergence { .. }) => {
                    self.solver.solve(u, state)?
                }
                Err(e) => return Err(e),
            },
            None => self.solver.solve(u, state)?,
        };
        self.warm = Some(sol.gamma);
        Ok(ForwardResult { g: sol.g, pressure: None })
    }
}

enum Updater {
    Plain,
    Linear(TargetLinearization),
    GaussNewton(Box<GaussNewton>),
}

/// Iterate `u_{k+1} = step(u_k, G(u_k), g)` starting from the potential of mean force.
///
/// Setup errors (invalid config, unusable target) are returned directly;
/// errors inside the loop end the history and are recorded as its failure.
pub fn run_inversion(
    g_target: &Tabulated,
    state: &StatePoint,
    cfg: &SchemeConfig,
    forward: &mut dyn ForwardOperator,
    u_ref: Option<&Tabulated>,
) -> Result<IterationHistory> {
    cfg.validate()?;
    let updater = match cfg.scheme {
        Scheme::Ibi | Scheme::Rel => Updater::Plain,
        Scheme::Hncgn => Updater::GaussNewton(Box::new(GaussNewton::new(
            g_target,
            state,
            cfg.weight_exponent,
        )?)),
        _ => Updater::Linear(TargetLinearization::new(g_target, state)?),
    };
    let mut updater = updater;
    let mut u = pmf_initial_guess(g_target, state.beta)?;
    let mut history = IterationHistory::new(cfg.scheme);
    let mut g0_fit = 0.0;

    for k in 0..=cfg.max_iterations {
        let fwd = match forward.evaluate(&u, state) {
            Ok(f) => f,
            Err(error) => {
                history.failure = Some(IterationFailure { k, error });
                break;
            }
        };
        if k == 0 {
            g0_fit = sup_distance(&fwd.g, g_target);
        }
        let fit = data_fit(&fwd.g, g_target, g0_fit);
        let pressure = fwd.pressure.unwrap_or_else(|| virial_pressure_quadrature(&u, &fwd.g, state));
        history.records.push(IterationRecord {
            k,
            potential: u.clone(),
            rdf: fwd.g.clone(),
            data_fit: fit,
            epsilon: u_ref.map(|r| error_metric(&u, r, g_target)),
            pressure,
            constraint_residual: None,
        });
        if k == cfg.max_iterations || fit <= cfg.tolerance {
            break;
        }
        let g_k = &fwd.g;
        let next = match &mut updater {
            Updater::Plain if cfg.scheme == Scheme::Ibi => ibi_step(&u, g_k, g_target, state.beta),
            Updater::Plain => relative_step(&u, g_k, g_target, state.beta),
            Updater::Linear(lin) => match cfg.scheme {
                Scheme::Ihnc => ihnc_step_with(lin, &u, g_k, g_target),
                Scheme::Hncn => hncn_step_with(lin, &u, g_k, g_target),
                Scheme::Lwr => lwr_step_with(lin, &u, g_k, g_target),
                _ => pyv_step_with(lin, &u, g_k, g_target),
            },
            Updater::GaussNewton(gn) => {
                let target = cfg.pressure_target.map(|p| (p, pressure));
                gn.step(&u, g_k, target).map(|out| {
                    if let Some(rec) = history.records.last_mut() {
                        rec.constraint_residual = out.constraint_residual;
                    }
                    out.potential
                })
            }
        };
        match next {
            Ok(v) => u = v,
            Err(error) => {
                history.failure = Some(IterationFailure { k, error });
                break;
            }
        }
    }
    Ok(history)
}
