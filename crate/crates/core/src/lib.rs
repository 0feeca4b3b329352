//! Two-valued harmonic 1-forms on branched double covers of triangulated
//! surfaces and 3-manifolds.

pub mod complex;
pub mod linalg;
pub mod cover;
pub mod par;
pub mod hodge;
pub mod flatmodel;
pub mod leafspace;
pub mod intrinsic;
pub mod presets;
