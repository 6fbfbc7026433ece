//! Closed-form minimax weights and the numerical optimisers behind them.

pub mod family;
pub mod golden;
pub mod grid;
pub mod local;
pub mod simplex;

pub use family::{
    closed_form_minimax_weight, DesignFamily, DesignFamilyBound, FamilyCriterion, MinimaxCase,
    ModelKind,
};
pub use golden::{minimize_weight_1d, refine_stationary_point};
pub use grid::grid_oracle;
pub use local::{efficiency, locally_optimal_weight};
pub use simplex::{optimize_weights_fixed_support, SimplexSolution, WeightCriterion};
