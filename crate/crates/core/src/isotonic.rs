//! Weighted isotonic regression by pool-adjacent-violators.

/// Least-squares nondecreasing fit of `values` under positive `weights`.
///
/// Already monotone input is returned bit-for-bit unchanged.
pub fn isotonic_increasing(values: &[f64], weights: &[f64]) -> Vec<f64> {
    assert_eq!(values.len(), weights.len(), "values and weights differ in length");
    // (mean, weight, length) per block
    let mut blocks: Vec<(f64, f64, usize)> = Vec::with_capacity(values.len());
    for (&v, &w) in values.iter().zip(weights) {
        debug_assert!(w > 0.0, "isotonic weights must be positive");
        let mut block = (v, w, 1);
        while let Some(&(m, bw, len)) = blocks.last() {
            if m <= block.0 {
                break;
            }
            blocks.pop();
            let total = bw + block.1;
            block = ((m * bw + block.0 * block.1) / total, total, len + block.2);
        }
        blocks.push(block);
    }
    let mut out = Vec::with_capacity(values.len());
    for (m, _, len) in blocks {
        out.extend(std::iter::repeat_n(m, len));
    }
    out
}

/// Least-squares nonincreasing fit.
pub fn isotonic_decreasing(values: &[f64], weights: &[f64]) -> Vec<f64> {
    let negated: Vec<f64> = values.iter().map(|v| -v).collect();
    isotonic_increasing(&negated, weights)
        .into_iter()
        .map(|v| -v)
        .collect()
}
