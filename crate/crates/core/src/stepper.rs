//! Linearized backward Euler time marching.
//!
//! Each step freezes the diffusion coefficient at the previous solution and
//! solves one SPD system
//!
//! ```text
//! (M / tau + K(U^n)) U^{n+1} = (M / tau) U^n + b(g(., t_{n+1}))
//! ```
//!
//! There are no inner iterations; the mass term keeps the system definite even
//! though `K` has the constants in its kernel.

use crate::assembly::Assembler;
use crate::coeff::DiffusionParams;
use crate::error::{Error, Result};
use crate::felib::{interpolate, FeField, FeSpace, QuadratureRule};
use crate::sparsela::{cg_solve, CsrMatrix, SolveReport};

/// Source term `g(x, y, t)` sampled at many fixed points per time level.
///
/// Every `Fn(f64, f64, f64) -> f64` is a `Forcing`; implementors that can
/// reuse work across time levels (see [`crate::mms::ManufacturedForcing`])
/// override [`Forcing::sample`].
pub trait Forcing {
    fn eval(&self, x: f64, y: f64, t: f64) -> f64;

    fn sample(&mut self, points: &[[f64; 2]], t: f64, out: &mut [f64]) {
        for (o, p) in out.iter_mut().zip(points) {
            *o = self.eval(p[0], p[1], t);
        }
    }
}

impl<F: Fn(f64, f64, f64) -> f64> Forcing for F {
    fn eval(&self, x: f64, y: f64, t: f64) -> f64 {
        self(x, y, t)
    }
}

/// Linear solver settings for the per-step system.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SolverSettings {
    pub rel_tol: f64,
    /// Iteration cap is `max_iter_factor * ndof`.
    pub max_iter_factor: usize,
}

impl Default for SolverSettings {
    fn default() -> Self {
        Self {
            rel_tol: 1e-12,
            max_iter_factor: 10,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct StepperConfig {
    pub tau: f64,
    pub t_end: f64,
    pub params: DiffusionParams,
    pub solver: SolverSettings,
    /// Keep every k-th field in the trajectory; `None` keeps only the last.
    pub store_every: Option<usize>,
}

impl StepperConfig {
    /// Checks that `t_end / tau` is a positive integer (up to rounding).
    pub fn new(tau: f64, t_end: f64, params: DiffusionParams) -> Result<Self> {
        if !(tau.is_finite() && tau > 0.0) {
            return Err(Error::InvalidArgument(format!(
                "tau must be positive, got {tau}"
            )));
        }
        if !(t_end.is_finite() && t_end > 0.0) {
            return Err(Error::InvalidArgument(format!(
                "t_end must be positive, got {t_end}"
            )));
        }
        let n = (t_end / tau).round();
        if n < 1.0 || (n * tau - t_end).abs() > 1e-9 * t_end {
            return Err(Error::InvalidArgument(format!(
                "t_end {t_end} is not an integer multiple of tau {tau}"
            )));
        }
        Ok(Self {
            tau,
            t_end,
            params,
            solver: SolverSettings::default(),
            store_every: None,
        })
    }

    pub fn num_steps(&self) -> usize {
        (self.t_end / self.tau).round() as usize
    }

    pub fn with_store_every(mut self, k: usize) -> Self {
        self.store_every = Some(k.max(1));
        self
    }
}

#[derive(Debug, Clone)]
pub struct Trajectory {
    /// `t_0, ..., t_N` with `t_n = n tau`.
    pub times: Vec<f64>,
    /// Stored `(n, U^n)` pairs, always ending with the final step.
    pub fields: Vec<(usize, FeField)>,
    /// One report per step.
    pub reports: Vec<SolveReport>,
}

impl Trajectory {
    pub fn final_field(&self) -> &FeField {
        &self
            .fields
            .last()
            .expect("trajectory keeps its final field")
            .1
    }

    pub fn final_time(&self) -> f64 {
        *self.times.last().expect("nonempty time grid")
    }

    pub fn total_iterations(&self) -> usize {
        self.reports.iter().map(|r| r.iterations).sum()
    }
}

/// `U^0 = Pi_h u0`.
pub fn initial_field<F: Fn(f64, f64) -> f64>(space: &FeSpace, u0: F) -> FeField {
    interpolate(space, u0)
}

/// Reusable per-step machinery for one space, rule, `lambda` and `tau`.
#[derive(Debug, Clone)]
pub struct Stepper {
    asm: Assembler,
    params: DiffusionParams,
    tau: f64,
    solver: SolverSettings,
    mass: CsrMatrix,
    stiffness: CsrMatrix,
    system: CsrMatrix,
    rhs: Vec<f64>,
    load: Vec<f64>,
}

impl Stepper {
    pub fn new(
        space: &FeSpace,
        rule: &QuadratureRule,
        params: DiffusionParams,
        tau: f64,
        solver: SolverSettings,
    ) -> Result<Self> {
        if !(tau.is_finite() && tau > 0.0) {
            return Err(Error::InvalidArgument(format!(
                "tau must be positive, got {tau}"
            )));
        }
        let asm = Assembler::new(space, rule);
        let mass = asm.mass();
        let stiffness = asm.zero_matrix();
        let system = asm.zero_matrix();
        let n = space.ndof();
        Ok(Self {
            asm,
            params,
            tau,
            solver,
            mass,
            stiffness,
            system,
            rhs: vec![0.0; n],
            load: vec![0.0; n],
        })
    }

    pub fn tau(&self) -> f64 {
        self.tau
    }

    pub fn space(&self) -> &FeSpace {
        self.asm.space()
    }

    /// The matrix `M / tau + K(U^n)` of the most recent step.
    pub fn system_matrix(&self) -> &CsrMatrix {
        &self.system
    }

    /// Advances `u_prev` by one step with forcing `g_next` sampled at the new time level.
    pub fn step<G: Fn(f64, f64) -> f64>(
        &mut self,
        u_prev: &FeField,
        g_next: G,
    ) -> Result<(FeField, SolveReport)> {
        self.step_from_guess(u_prev, u_prev.coeffs(), g_next)
    }

    /// Like [`Self::step`] but starts CG from `guess` instead of `u_prev`.
    pub fn step_from_guess<G: Fn(f64, f64) -> f64>(
        &mut self,
        u_prev: &FeField,
        guess: &[f64],
        g_next: G,
    ) -> Result<(FeField, SolveReport)> {
        let samples: Vec<f64> = self
            .asm
            .quad_points()
            .iter()
            .map(|p| g_next(p[0], p[1]))
            .collect();
        self.step_from_samples(u_prev, guess, &samples)
    }

    /// Physical quadrature points at which forcing samples are expected.
    pub fn quad_points(&self) -> &[[f64; 2]] {
        self.asm.quad_points()
    }

    /// One step with the forcing given as values at [`Self::quad_points`].
    pub fn step_from_samples(
        &mut self,
        u_prev: &FeField,
        guess: &[f64],
        samples: &[f64],
    ) -> Result<(FeField, SolveReport)> {
        if samples.len() != self.asm.quad_points().len() {
            return Err(Error::InvalidArgument(format!(
                "expected {} forcing samples, got {}",
                self.asm.quad_points().len(),
                samples.len()
            )));
        }
        if u_prev.space() != self.asm.space() {
            return Err(Error::InvalidArgument(
                "previous field lives on a different space".into(),
            ));
        }
        let inv_tau = 1.0 / self.tau;
        let params = self.params;
        self.asm.stiffness_into(
            Some(u_prev),
            |s2| params.sigma_unchecked(s2),
            &mut self.stiffness,
        );
        for ((a, &m), &k) in self
            .system
            .values_mut()
            .iter_mut()
            .zip(self.mass.values())
            .zip(self.stiffness.values())
        {
            *a = m * inv_tau + k;
        }
        self.asm.load_from_samples(samples, &mut self.load);
        self.mass.matvec_into(u_prev.coeffs(), &mut self.rhs);
        for (r, &b) in self.rhs.iter_mut().zip(&self.load) {
            *r = *r * inv_tau + b;
        }
        let n = self.rhs.len();
        let (x, report) = cg_solve(
            &self.system,
            &self.rhs,
            guess,
            self.solver.rel_tol,
            self.solver.max_iter_factor * n,
        )?;
        if !report.converged {
            return Err(Error::NotConverged(report));
        }
        Ok((FeField::new(self.asm.space().clone(), x)?, report))
    }
}

/// One step of the scheme from `u_prev`; see [`Stepper::step`].
pub fn step<G: Fn(f64, f64) -> f64>(
    space: &FeSpace,
    rule: &QuadratureRule,
    params: &DiffusionParams,
    u_prev: &FeField,
    g_next: G,
    tau: f64,
) -> Result<(FeField, SolveReport)> {
    Stepper::new(space, rule, *params, tau, SolverSettings::default())?.step(u_prev, g_next)
}

/// Marches from `Pi_h u0` to `t_end`, sampling `g(x, y, t_{n+1})` at each step.
pub fn run<U, G>(
    space: &FeSpace,
    rule: &QuadratureRule,
    config: &StepperConfig,
    u0: U,
    mut g: G,
) -> Result<Trajectory>
where
    U: Fn(f64, f64) -> f64,
    G: Forcing,
{
    let mut stepper = Stepper::new(space, rule, config.params, config.tau, config.solver)?;
    let n_steps = config.num_steps();
    let times: Vec<f64> = (0..=n_steps).map(|n| n as f64 * config.tau).collect();
    let mut current = initial_field(space, u0);
    let mut fields = Vec::new();
    if config.store_every.is_some() {
        fields.push((0, current.clone()));
    }
    let mut reports = Vec::with_capacity(n_steps);
    // CG starts from the linear extrapolation 2 U^n - U^{n-1} once two levels exist
    let mut previous: Option<Vec<f64>> = None;
    let mut guess = current.coeffs().to_vec();
    let mut samples = vec![0.0; stepper.quad_points().len()];
    for (n, &t) in times.iter().enumerate().skip(1) {
        if let Some(prev) = &previous {
            for ((gs, &c), &p) in guess.iter_mut().zip(current.coeffs()).zip(prev) {
                *gs = 2.0 * c - p;
            }
        }
        g.sample(stepper.quad_points(), t, &mut samples);
        let (next, report) = stepper
            .step_from_samples(&current, &guess, &samples)
            .map_err(|e| Error::Step {
                step: n,
                source: Box::new(e),
            })?;
        reports.push(report);
        previous = Some(std::mem::replace(&mut current, next).into_coeffs());
        if let Some(k) = config.store_every {
            if n % k == 0 && n != n_steps {
                fields.push((n, current.clone()));
            }
        }
    }
    fields.push((n_steps, current));
    Ok(Trajectory {
        times,
        fields,
        reports,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::assembly::l2_error;
    use crate::felib::{build_space, quadrature_rule};
    use crate::mesh::build_mesh;
    use approx::assert_abs_diff_eq;

    fn space(m: usize, r: usize) -> FeSpace {
        build_space(build_mesh(m).unwrap(), r).unwrap()
    }

    fn params(l: f64) -> DiffusionParams {
        DiffusionParams::new(l).unwrap()
    }

    #[test]
    fn config_validation() {
        let p = params(1.0);
        assert!(StepperConfig::new(0.0, 1.0, p).is_err());
        assert!(StepperConfig::new(0.3, 1.0, p).is_err());
        assert!(StepperConfig::new(2.0, 1.0, p).is_err());
        assert_eq!(StepperConfig::new(0.1, 1.0, p).unwrap().num_steps(), 10);
        assert_eq!(
            StepperConfig::new(1.0 / 64.0, 1.0, p).unwrap().num_steps(),
            64
        );
    }

    #[test]
    fn zero_initial_data() {
        let s = space(3, 2);
        assert!(initial_field(&s, |_, _| 0.0)
            .coeffs()
            .iter()
            .all(|&c| c == 0.0));
    }

    #[test]
    fn constant_preserved_without_forcing() {
        let s = space(4, 2);
        let rule = quadrature_rule(6).unwrap();
        let u = FeField::constant(&s, 0.7);
        let (next, rep) = step(&s, &rule, &params(1.0), &u, |_, _| 0.0, 0.1).unwrap();
        assert!(rep.converged);
        for c in next.coeffs() {
            assert_abs_diff_eq!(*c, 0.7, epsilon = 1e-11);
        }
    }

    #[test]
    fn spatially_constant_forcing() {
        let s = space(4, 2);
        let rule = quadrature_rule(6).unwrap();
        let (next, _) = step(
            &s,
            &rule,
            &params(1.0),
            &FeField::zeros(&s),
            |_, _| 1.0,
            0.5,
        )
        .unwrap();
        for c in next.coeffs() {
            assert_abs_diff_eq!(*c, 0.5, epsilon = 1e-10);
        }
    }

    #[test]
    fn step_is_linear_in_forcing_from_rest() {
        let s = space(4, 3);
        let rule = quadrature_rule(8).unwrap();
        let g = |x: f64, y: f64| (3.0 * x).sin() + y * y;
        let p = params(0.4);
        let z = FeField::zeros(&s);
        let (a, _) = step(&s, &rule, &p, &z, g, 0.05).unwrap();
        let (b, _) = step(&s, &rule, &p, &z, |x, y| 2.0 * g(x, y), 0.05).unwrap();
        for (x, y) in a.coeffs().iter().zip(b.coeffs()) {
            assert_abs_diff_eq!(2.0 * x, *y, epsilon = 1e-10);
        }
    }

    #[test]
    fn run_keeps_steady_constant() {
        let s = space(3, 2);
        let rule = quadrature_rule(6).unwrap();
        let cfg = StepperConfig::new(0.25, 2.0, params(1.0)).unwrap();
        let traj = run(&s, &rule, &cfg, |_, _| 1.0, |_, _, _| 0.0).unwrap();
        assert_eq!(traj.reports.len(), 8);
        assert_eq!(traj.times.len(), 9);
        assert_abs_diff_eq!(traj.final_time(), 2.0);
        assert_eq!(traj.fields.len(), 1);
        let err = l2_error(traj.final_field(), |_, _| 1.0, &quadrature_rule(8).unwrap());
        assert!(err < 1e-10);
    }

    #[test]
    fn storage_policy() {
        let s = space(2, 1);
        let rule = quadrature_rule(4).unwrap();
        let cfg = StepperConfig::new(0.1, 1.0, params(1.0))
            .unwrap()
            .with_store_every(3);
        let traj = run(&s, &rule, &cfg, |x, _| x, |_, _, _| 0.0).unwrap();
        let idx: Vec<usize> = traj.fields.iter().map(|(n, _)| *n).collect();
        assert_eq!(idx, [0, 3, 6, 9, 10]);
    }

    #[test]
    fn foreign_field_rejected() {
        let s1 = space(2, 1);
        let s2 = space(2, 1);
        let rule = quadrature_rule(4).unwrap();
        let mut st = Stepper::new(&s1, &rule, params(1.0), 0.1, SolverSettings::default()).unwrap();
        assert!(st.step(&FeField::zeros(&s2), |_, _| 0.0).is_err());
    }

    #[test]
    fn solver_failure_is_reported_with_step_index() {
        let s = space(6, 2);
        let rule = quadrature_rule(6).unwrap();
        let mut cfg = StepperConfig::new(0.5, 1.0, params(1.0)).unwrap();
        cfg.solver = SolverSettings {
            rel_tol: 1e-14,
            max_iter_factor: 0,
        };
        let err = run(&s, &rule, &cfg, |x, _| x, |_, _, _| 1.0).unwrap_err();
        assert!(matches!(err, Error::Step { step: 1, .. }));
        assert!(err.is_solver_failure());
    }
}
