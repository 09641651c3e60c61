//! Plaintext reference definitions of every supported non-linear function,
//! over signed logical values. Protocol outputs are checked against these.

/// Sign indicator: 1 iff `x >= 0`.
pub fn drelu(x: i128) -> i128 {
    i128::from(x >= 0)
}

pub fn relu(x: i128) -> i128 {
    if x >= 0 {
        x
    } else {
        0
    }
}

pub fn abs(x: i128) -> i128 {
    x.abs()
}

/// `alpha1 * x` for non-negative inputs, `alpha0 * x` otherwise.
pub fn dynamic_relu(alpha0: i128, alpha1: i128, x: i128) -> i128 {
    if x >= 0 {
        alpha1 * x
    } else {
        alpha0 * x
    }
}

pub fn equality(x: i128, y: i128) -> i128 {
    i128::from(x == y)
}

/// Comparison verdict: 1 iff `x >= y`.
pub fn cmp(x: i128, y: i128) -> i128 {
    i128::from(x >= y)
}

pub fn max2(x: i128, y: i128) -> i128 {
    x.max(y)
}

pub fn min2(x: i128, y: i128) -> i128 {
    x.min(y)
}

/// `max(x, T(x))` for the public linear map `T(x) = scale*x + offset`.
pub fn funnel_relu(scale: i128, offset: i128, x: i128) -> i128 {
    max2(x, scale * x + offset)
}

/// Piecewise-linear unit over `m + 2` segments: `gammas` are the `m + 1`
/// strictly increasing breakpoints, `alphas`/`betas` the `m + 2` per-segment
/// coefficients ordered from the leftmost segment up.
pub fn plu(gammas: &[i128], alphas: &[i128], betas: &[i128], x: i128) -> i128 {
    assert!(!gammas.is_empty());
    assert_eq!(alphas.len(), gammas.len() + 1);
    assert_eq!(betas.len(), gammas.len() + 1);
    let mut seg = 0;
    while seg < gammas.len() && x >= gammas[seg] {
        seg += 1;
    }
    alphas[seg] * x + betas[seg]
}

/// ReLU6 as a three-segment piecewise unit; `six` is the encoded breakpoint
/// (6, or its fixed-point image).
pub fn relu6(six: i128, x: i128) -> i128 {
    plu(&[0, six], &[0, 1, 0], &[0, 0, six], x)
}

pub fn max_n(xs: &[i128]) -> i128 {
    *xs.iter().max().expect("max of empty input")
}

pub fn min_n(xs: &[i128]) -> i128 {
    *xs.iter().min().expect("min of empty input")
}

/// Descending or ascending sort.
pub fn sort_n(xs: &[i128], descending: bool) -> Vec<i128> {
    let mut v = xs.to_vec();
    v.sort_unstable();
    if descending {
        v.reverse();
    }
    v
}

/// The `ceil(n/2)`-th maximum (upper median for even `n`).
pub fn median_n(xs: &[i128]) -> i128 {
    let sorted = sort_n(xs, true);
    sorted[(xs.len() + 1) / 2 - 1]
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn definitions() {
        assert_eq!(drelu(0), 1);
        assert_eq!(drelu(-1), 0);
        assert_eq!(relu(22), 22);
        assert_eq!(relu(-22), 0);
        assert_eq!(abs(-22), 22);
        assert_eq!(dynamic_relu(1, 1, -5), -5);
        assert_eq!(max2(12, 46), 46);
        assert_eq!(min2(12, 46), 12);
        assert_eq!(funnel_relu(-1, 0, -3), 3);
    }

    #[test]
    fn relu6_cases() {
        assert_eq!(relu6(6, 3), 3);
        assert_eq!(relu6(6, 9), 6);
        assert_eq!(relu6(6, -2), 0);
        assert_eq!(relu6(6, 0), 0);
        assert_eq!(relu6(6, 6), 6);
    }

    #[test]
    fn order_statistics() {
        let xs = [12, 46, 31, 27];
        assert_eq!(max_n(&xs), 46);
        assert_eq!(min_n(&xs), 12);
        assert_eq!(sort_n(&xs, true), vec![46, 31, 27, 12]);
        assert_eq!(sort_n(&xs, false), vec![12, 27, 31, 46]);
        assert_eq!(median_n(&xs), 31);
        assert_eq!(median_n(&[5, 1, 9]), 5);
    }
}
