//! Reference maps used throughout the tests and the documentation.

use crate::dynamics::{BranchSpec, CookieCutterMap};

/// The middle-third Cantor map, `g_1(x) = x/3`, `g_2(x) = x/3 + 2/3`.
pub fn cantor() -> CookieCutterMap {
    CookieCutterMap::new(&[
        BranchSpec::affine(1.0 / 3.0, 0.0).with_image(0.0, 1.0 / 3.0),
        BranchSpec::affine(1.0 / 3.0, 2.0 / 3.0).with_image(2.0 / 3.0, 1.0),
    ])
    .expect("Cantor map is valid")
}

/// Two Möbius branches with strongly non-constant derivative:
/// `g_1(x) = x / (4x + 5)` onto `[0, 1/9]` and
/// `g_2(x) = (1.15x + 0.85) / (x + 1)` onto `[0.85, 1]`, with
/// `|g_1'| ∈ [5/81, 1/5]` and `|g_2'| ∈ [0.075, 0.3]`.
pub fn moebius() -> CookieCutterMap {
    CookieCutterMap::new(&[
        BranchSpec::moebius(1.0, 0.0, 4.0, 5.0).with_image(0.0, 1.0 / 9.0),
        BranchSpec::moebius(1.15, 0.85, 1.0, 1.0).with_image(0.85, 1.0),
    ])
    .expect("Moebius fixture is valid")
}

/// Two affine contractions of ratio 0.4 onto `[0, 0.4]` and `[0.6, 1]`.
pub fn two_contractions() -> CookieCutterMap {
    CookieCutterMap::new(&[BranchSpec::affine(0.4, 0.0), BranchSpec::affine(0.4, 0.6)])
        .expect("two-contraction map is valid")
}
