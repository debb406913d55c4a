//! Power-system measurement model, priors and synthetic test models.

mod grid;
mod matpower;
mod prior;
mod synthetic;

pub use grid::{AcGridModel, Branch, GridJson};
pub use matpower::{import_matpower, MatpowerBranch};
pub use prior::{DiagonalFrequencyPrior, SmoothPrior};
pub use synthetic::{LaplacianModel, LinearFilterModel, SeparableCubicModel};
