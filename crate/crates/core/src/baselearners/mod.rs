//! Linear regression, CART and random forest behind a shared learner type
//! that also wraps the boosted model.

mod cart;
mod forest;
mod learner;
mod linear;

pub use cart::{fit_cart, CartModel, CartParams};
pub use forest::{fit_random_forest, tree_rows, ForestModel, ForestParams};
pub use learner::{FittedLearner, FittedModel, LearnerKind, LearnerParams, LearnerSpec, LEARNER_KIND};
pub use linear::{fit_linear, LinearModel, DEFAULT_RIDGE};
