//! Rectangles and boxes: interval-tree packing of regions, canonical
//! rectangles, and bi-criteria packing of points into rectangles.

mod canonical;
mod points;
mod tree;
mod turan;

pub use canonical::{skyline_canonical_rects, CanonicalRect, CanonicalRectSet, SkylineRect};
pub use points::{pack_points_into_rects, BicriteriaReport, SPLIT_MASS};
pub(crate) use points::{independent_owners, replicate, sparsify_unit};
pub use tree::{pack_boxes_into_points, pack_rects_into_points, TreePackReport};
pub use turan::turan_weighted_is;
