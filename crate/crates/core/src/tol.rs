//! Numeric tolerances shared by the library and its tests.

/// Maximum |M - M†| for a matrix to count as Hermitian.
pub const HERMITIAN: f64 = 1e-12;
/// Smallest eigenvalue accepted for a density matrix.
pub const PSD_SLACK: f64 = -1e-10;
/// Allowed excess of a density-matrix trace above one.
pub const TRACE_EXCESS: f64 = 1e-12;
/// Imaginary residue tolerated in an expectation value of a Hermitian operator.
pub const IMAG_RESIDUE: f64 = 1e-10;
/// Normalization slack of a probability table.
pub const PROBABILITY_SUM: f64 = 1e-9;
/// Probability mass allowed beyond a Fock-space cutoff.
pub const TAIL: f64 = 1e-10;
/// Margins at or below this value never count as a violation.
pub const VERDICT_MARGIN: f64 = 1e-9;
