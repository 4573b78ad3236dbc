//! Reference coefficient vectors for the three shipped design presets.

/// Type-I weights on the even-indexed DPSS basis (ω_s = 2π/M, K=4, M=32).
pub const TYPE_I_WEIGHTS: [f64; 8] = [
    9.179317816790e-1,
    3.802162534407e-1,
    1.077526750194e-1,
    2.456277538185e-2,
    4.639914990515e-3,
    1.306778847145e-3,
    1.577770437750e-3,
    3.721905313771e-4,
];

/// Column polarity that maps the Type-I weights onto the centre-positive
/// DPSS convention used by [`crate::spectral::dpss`]. With it the first two
/// samples of the synthesized pulse vanish, as the boundary set {0, 1}
/// requires; with all-positive signs they do not.
pub const TYPE_I_POLARITY: [f64; 8] = [1.0, 1.0, 1.0, 1.0, 1.0, -1.0, -1.0, -1.0];

/// Type-II weights on the cosine basis (K=4, M=32).
pub const TYPE_II_WEIGHTS: [f64; 5] =
    [5.016511380872e-1, 6.897038048179e-1, 5.039449735142e-1, 1.795258480584e-1, 9.191524770412e-3];

/// Type-III weights on the cosine basis (K=4, M=32).
pub const TYPE_III_WEIGHTS: [f64; 5] =
    [4.993086025524e-1, 6.777473126670e-1, 5.037266848356e-1, 2.213401597940e-1, 4.093046350246e-2];
