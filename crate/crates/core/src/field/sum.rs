const BLOCK: usize = 32;

/// Pairwise (cascade) summation with a fixed split order, so results are
/// reproducible bit for bit regardless of thread count.
pub fn pairwise_sum(xs: &[f64]) -> f64 {
    if xs.len() <= BLOCK {
        let mut s = 0.0;
        for &x in xs {
            s += x;
        }
        return s;
    }
    let mid = xs.len() / 2;
    pairwise_sum(&xs[..mid]) + pairwise_sum(&xs[mid..])
}
