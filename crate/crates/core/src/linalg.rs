//! Dense vector helpers on plain slices.

#[inline]
pub fn dot(a: &[f64], b: &[f64]) -> f64 {
    debug_assert_eq!(a.len(), b.len());
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

#[inline]
pub fn norm(a: &[f64]) -> f64 {
    dot(a, a).sqrt()
}

/// `acc += alpha * x`
#[inline]
pub fn axpy(alpha: f64, x: &[f64], acc: &mut [f64]) {
    for (a, v) in acc.iter_mut().zip(x) {
        *a += alpha * v;
    }
}
