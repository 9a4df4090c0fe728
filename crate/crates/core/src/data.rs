//! Bundled example end spaces.

use crate::end_calculus::EndSpace;

pub const FIGURE5: &str = include_str!("../data/figure5.json");
pub const FIGURE4: &str = include_str!("../data/figure4.json");
pub const LADDER: &str = include_str!("../data/ladder.json");
pub const ZETA6: &str = include_str!("../data/zeta6.json");
pub const CANTOR_SPHERE: &str = include_str!("../data/cantor_sphere.json");
pub const GENUS_ONE: &str = include_str!("../data/genus_one.json");

/// Two isolated maximal ends, a non-planar Cantor set, and three orbits accumulating only to x_A.
pub fn figure5() -> EndSpace {
    EndSpace::from_json(FIGURE5).expect("bundled")
}

/// Two Cantor maximal types.
pub fn figure4() -> EndSpace {
    EndSpace::from_json(FIGURE4).expect("bundled")
}

/// Two-ended infinite-genus surface.
pub fn ladder() -> EndSpace {
    EndSpace::from_json(LADDER).expect("bundled")
}

/// Two Cantor and two isolated maximal types.
pub fn zeta6() -> EndSpace {
    EndSpace::from_json(ZETA6).expect("bundled")
}

/// Sphere minus a Cantor set.
pub fn cantor_sphere() -> EndSpace {
    EndSpace::from_json(CANTOR_SPHERE).expect("bundled")
}

/// Genus one with a Cantor set, an isolated end, and an orbit accumulating to both.
pub fn genus_one() -> EndSpace {
    EndSpace::from_json(GENUS_ONE).expect("bundled")
}

/// All bundled spaces with their names.
pub fn all() -> Vec<(&'static str, EndSpace)> {
    vec![
        ("figure5", figure5()),
        ("figure4", figure4()),
        ("ladder", ladder()),
        ("zeta6", zeta6()),
        ("cantor_sphere", cantor_sphere()),
        ("genus_one", genus_one()),
    ]
}
