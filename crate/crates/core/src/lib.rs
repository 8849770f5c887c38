//! Non-integer iterates of `exp` and the neurons built on them.
//!
//! Two solutions are provided: a real one from Abel's equation
//! ([`Abel`]) and a complex one from Schröder's equation around the fixed
//! point `c = log c` ([`Schroeder`]). [`Backend`] puts both behind one
//! interface. On top of it sit the addiplication operator `x (+)_n y`,
//! which moves from addition at `n = 0` to multiplication at `n = 1`, and
//! layers whose iterate orders are trainable alongside their weights.
//! [`pattern_shift`] builds and trains networks for circular shifts.

pub mod abel;
pub mod addiplication;
pub mod backend;
pub mod error;
pub mod export;
pub mod grid;
pub mod layers;
pub mod numdiff;
pub mod pattern_shift;
pub mod schroeder;

pub use abel::{Abel, AbelConfig, ExtendedReal, RealIterate};
pub use error::{Error, Result, SampleFlag};
pub use backend::{Backend, BackendSpec, ExpIterate, IterateEval};
pub use addiplication::{addiplicate, addiplicate_nary, addiplicate_nary_with_grads, addiplicate_with_grads, interpolation_curve, AddiplicationGradients, CurvePoint, InterpolationCurve};
pub use schroeder::{branch_log, find_fixed_point, Branch, ComplexIterate, CompositionDomainReport, FixedPoint, Schroeder, SchroederConfig};
pub use grid::{domain_grid, DomainGrid, GridCell, GridQuantity, GridSpec};
pub use layers::{
    grad_check, grad_check_with, parameterized_transfer, sgd_train, AdditiveLayer, AddiplicationLayer, CMatrix, GradCheckEntry, GradCheckReport, Layer, LayerCache,
    LayerGrads, LossTrace, Network, ParamId, ProductLayer, Sample, SplitIterateLayer, TrainConfig, Transfer,
};
pub use pattern_shift::{build_analytic_network, dft, evaluate_analytic, inverse_dft, train_on_shift_task, AnalyticShiftNetwork, ShiftInit, ShiftInstance, ShiftTrainConfig};
