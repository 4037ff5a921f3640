//! Small symmetric eigenproblems with deterministic eigenvector choice.

use nalgebra::{Matrix3, SymmetricEigen, Vector3};

/// Relative width of a degenerate top eigenspace.
const DEGENERACY_TOL: f64 = 1e-10;

/// Largest eigenvalue of a real symmetric 3x3 matrix with a unit eigenvector.
///
/// When the top eigenvalue is (numerically) degenerate the returned vector is
/// the lexicographically largest unit vector of the eigenspace. For a simple
/// eigenvalue this reduces to fixing the sign so the first nonzero component
/// is positive.
pub fn top_eigen(m: &Matrix3<f64>) -> (f64, Vector3<f64>) {
    let eig = SymmetricEigen::new(*m);
    let top = eig.eigenvalues.max();
    let scale = eig.eigenvalues.amax().max(1.0);

    // Projector onto the top eigenspace.
    let mut proj = Matrix3::zeros();
    for (i, &val) in eig.eigenvalues.iter().enumerate() {
        if top - val <= DEGENERACY_TOL * scale {
            let v = eig.eigenvectors.column(i);
            proj += v * v.transpose();
        }
    }
    (top, lexicographic_unit(&proj))
}

/// Lexicographically largest unit vector in the range of an orthogonal projector.
fn lexicographic_unit(proj: &Matrix3<f64>) -> Vector3<f64> {
    for axis in 0..3 {
        let p = proj.column(axis).into_owned();
        let n = p.norm();
        if n > 1e-9 {
            return p / n;
        }
    }
    // Unreachable for a nonzero projector.
    Vector3::x()
}

/// Flip `v` so that its first component above `eps` in magnitude is positive.
pub fn canonical_sign(v: Vector3<f64>) -> Vector3<f64> {
    for i in 0..3 {
        if v[i].abs() > 1e-12 {
            return if v[i] < 0.0 { -v } else { v };
        }
    }
    v
}
