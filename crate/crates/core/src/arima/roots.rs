use nalgebra::DMatrix;

/// True when every root of `1 - c_1 z - ... - c_k z^k` has modulus greater
/// than `1 + margin`.
///
/// The roots are the reciprocals of the companion-matrix eigenvalues of
/// `λ^k - c_1 λ^{k-1} - ... - c_k`.
pub fn all_roots_outside_unit_circle(coef: &[f64], margin: f64) -> bool {
    let k = coef.len();
    if k == 0 {
        return true;
    }
    if coef.iter().any(|c| !c.is_finite()) {
        return false;
    }
    let mut m = DMatrix::<f64>::zeros(k, k);
    for (j, c) in coef.iter().enumerate() {
        m[(0, j)] = *c;
    }
    for i in 1..k {
        m[(i, i - 1)] = 1.0;
    }
    let limit = 1.0 / (1.0 + margin);
    m.complex_eigenvalues().iter().all(|l| l.norm() < limit)
}
