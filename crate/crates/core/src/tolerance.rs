/// Numeric thresholds used across the crate.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Tolerances {
    /// Linear-algebra residuals: symmetry, determinant, orthonormality of inputs.
    pub linalg: f64,
    /// Geometric comparisons (distances, zero sets).
    pub geometric: f64,
    /// Flags closer than this (largest principal angle) are equal; opposition
    /// margins at or below it count as non-opposite.
    pub flag: f64,
    /// Minimum regularity margin a segment needs before a shadow flag is read off.
    pub margin_floor: f64,
    /// Orthonormality defect accepted for flag frames.
    pub frame: f64,
    /// Eigenvalue gaps below this are treated as ties when grouping.
    pub eigen_gap: f64,
}

impl Default for Tolerances {
    fn default() -> Self {
        Tolerances {
            linalg: 1e-9,
            geometric: 1e-6,
            flag: 1e-6,
            margin_floor: 1e-6,
            frame: 1e-8,
            eigen_gap: 1e-10,
        }
    }
}
