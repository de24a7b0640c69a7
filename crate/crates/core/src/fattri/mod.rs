//! Fat triangles: measure covers, canonical regions, and bi-criteria packing
//! of points into fat triangles.

mod canonical;
mod cover;
mod pack;

pub use canonical::{shape_families, CanonicalFatRegions, FatCover, FatRegion, DEFAULT_ROTATIONS, DESK_LIMIT, MAX_COVER_PIECES};
pub use cover::{cover_triangle_by_measure, CoverPiece, TriangleCover, MAX_DEPTH};
pub use pack::{pack_points_into_fat_triangles, FatOptions, FAT_BETA, PIECE_MASS};
