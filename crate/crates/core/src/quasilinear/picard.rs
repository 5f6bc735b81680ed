//! Picard iteration on the frozen-coefficient operator.

use ndarray::Array2;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::feedback::PowerFeedback;
use crate::grid::{Field, Grid};
use crate::profile::{BoundaryTrace, Profile};
use crate::transport::{solve_linear_transport, Coefficient, TransportOptions};

use super::boundary::BoundaryMap;
use super::ledger::{build_ledger, ConstantsLedger};
use super::system::DiagonalSystem;

/// Where the iteration starts.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum InitialGuess {
    /// `(u0, v0)` held constant in time.
    #[default]
    DataExtension,
    Zero,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PicardOptions {
    pub tol: f64,
    pub max_iter: usize,
    pub initial_guess: InitialGuess,
    pub transport: TransportOptions,
    /// `(C1, C2)` for the ledger and the working box; measured from the data
    /// when absent.
    pub bounds: Option<(f64, f64)>,
    /// Fail when an iterate leaves the working box by more than 1%.
    pub enforce_box: bool,
}

impl Default for PicardOptions {
    fn default() -> Self {
        Self {
            tol: 1e-8,
            max_iter: 50,
            initial_guess: InitialGuess::DataExtension,
            transport: TransportOptions::default(),
            bounds: None,
            enforce_box: true,
        }
    }
}

/// How the left end of the `u` component is closed.
#[derive(Debug, Clone)]
pub enum LeftClosure {
    /// `u(t, 0)` follows the feedback law started at `u0(0)`.
    Feedback,
    /// `u(t, 0) = h(v(t, 0), t)`.
    Map(BoundaryMap),
}

/// Sup norm and discrete Lipschitz constant of one Picard iterate.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct IterateStats {
    pub sup_u: f64,
    pub sup_v: f64,
    pub lip_u: f64,
    pub lip_v: f64,
}

#[derive(Debug, Clone)]
pub struct ClosedLoopSolution {
    pub u: Field,
    pub v: Field,
    /// Number of operator applications performed.
    pub iterations: usize,
    /// `max(‖u_k - u_{k-1}‖∞, ‖v_k - v_{k-1}‖∞)` for each application.
    pub residual_history: Vec<f64>,
    pub ledger: ConstantsLedger,
    pub iterate_stats: Vec<IterateStats>,
    /// Boundary traces actually imposed in the last application.
    pub u_left: Vec<f64>,
    pub v_right: Vec<f64>,
}

/// A closed-loop problem on one edge: system, data, closures and grid.
#[derive(Debug, Clone)]
pub struct ClosedLoopProblem {
    pub system: DiagonalSystem,
    pub u0: Profile,
    pub v0: Profile,
    pub feedback: PowerFeedback,
    pub left: LeftClosure,
    pub grid: Grid,
}

impl ClosedLoopProblem {
    fn bounds(&self, opts: &PicardOptions) -> (f64, f64) {
        opts.bounds.unwrap_or_else(|| {
            (
                self.u0.sup().max(self.v0.sup()),
                self.u0.lipschitz().max(self.v0.lipschitz()),
            )
        })
    }

    pub fn ledger(&self, opts: &PicardOptions) -> Result<ConstantsLedger> {
        let (c1, c2) = self.bounds(opts);
        let h = match &self.left {
            LeftClosure::Feedback => None,
            LeftClosure::Map(h) => Some(h),
        };
        build_ledger(&self.system, c1, c2, self.feedback, self.grid.length(), h)
    }

    fn check_compatibility(&self, opts: &PicardOptions) -> Result<()> {
        if let LeftClosure::Map(h) = &self.left {
            let gap = (h.eval(self.v0.eval(0.0), 0.0) - self.u0.eval(0.0)).abs();
            if gap > opts.transport.compat_tol {
                return Err(Error::CompatibilityViolation {
                    gap,
                    tol: opts.transport.compat_tol,
                });
            }
        }
        Ok(())
    }

    fn initial_iterate(&self, guess: InitialGuess) -> (Field, Field) {
        match guess {
            InitialGuess::DataExtension => (
                self.grid.tabulate(|_, x| self.u0.eval(x)),
                self.grid.tabulate(|_, x| self.v0.eval(x)),
            ),
            InitialGuess::Zero => (self.grid.zeros(), self.grid.zeros()),
        }
    }

    fn frozen(&self, u: &Field, v: &Field) -> Result<(Coefficient, Coefficient)> {
        let (nt, nx) = (self.grid.nt(), self.grid.nx());
        let mut lam = Array2::zeros((nt, nx));
        let mut mu = Array2::zeros((nt, nx));
        let ts = self.grid.t_nodes();
        let xs = self.grid.x_nodes();
        for k in 0..nt {
            for j in 0..nx {
                let (a, b) = (u.at(k, j), v.at(k, j));
                let l = self.system.lambda(a, b);
                let m = self.system.mu(a, b);
                if !(l > 0.0) {
                    return Err(Error::CoefficientSignLoss {
                        t: ts[k],
                        x: xs[j],
                        speed: l,
                    });
                }
                if !(m < 0.0) {
                    return Err(Error::CoefficientSignLoss {
                        t: ts[k],
                        x: xs[j],
                        speed: m,
                    });
                }
                lam[[k, j]] = l;
                mu[[k, j]] = m;
            }
        }
        let lam = Coefficient::tabulated(Field::new(ts.to_vec(), xs.to_vec(), lam)?)?;
        let mu = Coefficient::tabulated(Field::new(ts.to_vec(), xs.to_vec(), mu)?)?;
        Ok((lam, mu))
    }

    /// The left trace of `u` induced by the iterate `v_prev`.
    fn left_trace(&self, v_prev: &Field) -> BoundaryTrace {
        match &self.left {
            LeftClosure::Feedback => self.feedback.trace(self.u0.eval(0.0)).to_boundary_trace(),
            LeftClosure::Map(h) => {
                let ts = self.grid.t_nodes();
                let mut vals: Vec<f64> = ts
                    .iter()
                    .enumerate()
                    .map(|(k, &t)| h.eval(v_prev.at(k, 0), t))
                    .collect();
                // the corner value comes from the data, whatever the guess
                vals[0] = self.u0.eval(0.0);
                BoundaryTrace::samples(ts.to_vec(), vals)
            }
        }
    }

    /// One application of the operator: `(ũ, ṽ) ↦ (u, v)`.
    pub fn apply(&self, u_prev: &Field, v_prev: &Field, opts: &PicardOptions) -> Result<(Field, Field)> {
        let (lam, mu) = self.frozen(u_prev, v_prev)?;
        let u_bnd = self.left_trace(v_prev);
        let l = self.grid.length();
        let v_bnd = self.feedback.trace(self.v0.eval(l)).to_boundary_trace();
        let (u, v) = rayon::join(
            || solve_linear_transport(&lam, &self.u0, &u_bnd, &self.grid, &opts.transport),
            || solve_linear_transport(&mu, &self.v0, &v_bnd, &self.grid, &opts.transport),
        );
        Ok((u?, v?))
    }

    pub fn solve(&self, opts: &PicardOptions) -> Result<ClosedLoopSolution> {
        self.check_compatibility(opts)?;
        let ledger = self.ledger(opts)?;
        let (ru, rv) = (ledger.c1_prime, ledger.c1);
        let (mut u_prev, mut v_prev) = self.initial_iterate(opts.initial_guess);
        let mut residual_history = Vec::new();
        let mut iterate_stats = Vec::new();
        for it in 1..=opts.max_iter {
            let (u, v) = self.apply(&u_prev, &v_prev, opts)?;
            let stats = IterateStats {
                sup_u: u.sup_norm(),
                sup_v: v.sup_norm(),
                lip_u: u.discrete_lipschitz(),
                lip_v: v.discrete_lipschitz(),
            };
            iterate_stats.push(stats);
            if opts.enforce_box && self.system.box_extension().is_none() {
                let slack = |r: f64| r * 1.01 + 1e-12;
                if stats.sup_u > slack(ru) {
                    return Err(Error::WorkingBoxExit {
                        which: "u",
                        value: stats.sup_u,
                        bound: ru,
                    });
                }
                if stats.sup_v > slack(rv) {
                    return Err(Error::WorkingBoxExit {
                        which: "v",
                        value: stats.sup_v,
                        bound: rv,
                    });
                }
            }
            let r = u.sup_distance(&u_prev).max(v.sup_distance(&v_prev));
            residual_history.push(r);
            if r < opts.tol {
                let u_left = u.column(0).to_vec();
                let v_right = v.column(v.nx() - 1).to_vec();
                return Ok(ClosedLoopSolution {
                    u,
                    v,
                    iterations: it,
                    residual_history,
                    ledger,
                    iterate_stats,
                    u_left,
                    v_right,
                });
            }
            u_prev = u;
            v_prev = v;
        }
        Err(Error::NoConvergence {
            max_iter: opts.max_iter,
            last_residual: residual_history.last().copied().unwrap_or(f64::NAN),
        })
    }
}

/// Both ends closed by the feedback law.
pub fn picard_two_control(
    system: &DiagonalSystem,
    u0: &Profile,
    v0: &Profile,
    fb: PowerFeedback,
    grid: &Grid,
    opts: &PicardOptions,
) -> Result<ClosedLoopSolution> {
    ClosedLoopProblem {
        system: system.clone(),
        u0: u0.clone(),
        v0: v0.clone(),
        feedback: fb,
        left: LeftClosure::Feedback,
        grid: grid.clone(),
    }
    .solve(opts)
}

/// Feedback on the right end, `u(t, 0) = h(v(t, 0), t)` on the left.
pub fn picard_one_control(
    system: &DiagonalSystem,
    u0: &Profile,
    v0: &Profile,
    h: &BoundaryMap,
    fb: PowerFeedback,
    grid: &Grid,
    opts: &PicardOptions,
) -> Result<ClosedLoopSolution> {
    ClosedLoopProblem {
        system: system.clone(),
        u0: u0.clone(),
        v0: v0.clone(),
        feedback: fb,
        left: LeftClosure::Map(h.clone()),
        grid: grid.clone(),
    }
    .solve(opts)
}
