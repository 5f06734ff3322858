//! Dilatation structures on metric spaces.
//!
//! A dilatation structure is a metric space together with base-pointed
//! contractions `δ^x_ε` satisfying a small set of coherence axioms. This crate
//! provides concrete instances (affine and chart-perturbed `R^n`, Carnot and
//! other conical groups, contraction groups), the approximate operations they
//! induce, and a sampling engine that measures how fast those operations
//! converge as `ε → 0`.
//!
//! ```
//! use dilatlab::{dilate, AffineStructure, Point, Scale};
//!
//! let s = AffineStructure::new(1);
//! let (x, p) = (Point::<f64>::from_f64(&[0.0]), Point::<f64>::from_f64(&[4.0]));
//! let y = dilate(&s, &x, Scale::continuous(0.5).unwrap(), &p).unwrap();
//! assert_eq!(y.0, vec![2.0]);
//! ```

pub mod analysis;
pub mod ccdist;
pub mod cli;
pub mod conical;
pub mod error;
pub mod euclidean;
mod linalg;
pub mod nilpotent;
pub mod ops;
pub mod registry;
pub mod scalar;
pub mod scale;
pub mod structure;

pub use conical::{
    as_dilatation_structure, beta_limit, from_contraction, inverse_limit, left_dilatation, norm_distance, norm_limit,
    tangent_reconstruction_defect, ConicalStructure, ContractionGroup, NormedGroupWithDilatations,
};
pub use error::{Error, Result};
pub use euclidean::{affine_closed_forms, AffineStructure, ChartPerturbedStructure, ScalarField};
pub use ops::{
    diff_op, dilate, inv_op, lin_defect, linear_map_defect, relative_dist, shifted_structure, sum_diff_swap_defect,
    sum_op, tangent_diff, tangent_dist, tangent_inv, tangent_sum, Estimate, ShiftedStructure,
};
pub use scalar::{Exact, Extended, Real, Scalar};
pub use scale::{Scale, ScaleGrid, ScaleGroup};
pub use structure::{DilatationStructure, Point, Radii};
