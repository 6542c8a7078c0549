//! Inertial belief updating.
//!
//! A decision maker holds a prior over finitely many states and, after
//! learning that the truth lies in an event, adopts the belief on that event
//! closest to the prior under a subjective distance. Different distances give
//! Bayes' rule, distorted Bayes, motivated reasoning, ladders of conditional
//! beliefs for surprising events, and partial reaction to news.
//!
//! Modules, bottom up:
//! - [`belief`]: state spaces, events, beliefs, Bayes' rule.
//! - [`distance`] and [`solver`]: the distance catalog, closed forms and a
//!   generic projected-gradient minimizer over a face of the simplex.
//! - [`model`] and [`family`]: updating rules and the posteriors they produce.
//! - [`cps`]: ladders, thresholded ladders and hypothesis testing.
//! - [`audit`]: revealed-preference checks on observed families, plus
//!   distortion and weight recovery.
//! - [`signal`] and [`persuasion`]: distorted updating on product spaces and
//!   the sender's design problem.
//! - [`io`] and [`cli`]: file formats and the `inertia` command.

pub mod audit;
pub mod belief;
pub mod cli;
pub mod cps;
pub mod distance;
pub mod error;
pub mod family;
pub mod io;
pub mod model;
pub mod persuasion;
pub mod report;
pub mod signal;
pub mod solver;

pub use audit::{fit_distortion, rank_certificate, recover_wiu, run_all};
pub use belief::{bayes_update, event_mass, support, Belief, Event, NumericPolicy, StateSpace};
pub use cps::{cps_posterior, ecps_posterior, ht_from_ecps, ht_posterior, HTModel, Ladder};
pub use distance::{bayesian_function, distance_eval, sigma_eval, DeltaSpec, DistanceSpec, SigmaSpec};
pub use error::{Error, Result};
pub use family::UpdateFamily;
pub use model::{iu_posterior, update_family, wiu_posterior, IUModel, UpdateRule, WIUModel};
pub use persuasion::{grid_oracle, optimize_binary, optimize_rich, PersuasionEnv, PersuasionSolution};
pub use report::{AuditReport, Violation};
pub use signal::{grether_posterior, DistortionFn, SignalModel};
pub use solver::{closed_form_posterior, minimize_over_event, posterior, SolverConfig, StepRule};
