//! Exact integer and rational helpers.

use rug::{Integer, Rational};

pub fn factorial(n: u32) -> Integer {
    Integer::from(Integer::factorial(n))
}

pub fn binomial(n: u32, k: u32) -> Integer {
    if k > n {
        return Integer::new();
    }
    Integer::from(Integer::binomial_u(n, k))
}

/// Falling factorial n!/(n-k)!, zero when k > n.
pub fn falling(n: u32, k: u32) -> Integer {
    if k > n {
        return Integer::new();
    }
    let mut acc = Integer::from(1);
    for i in (n - k + 1)..=n {
        acc *= i;
    }
    acc
}

pub fn ratio_to_f64(num: &Integer, den: &Integer) -> f64 {
    Rational::from((num.clone(), den.clone())).to_f64()
}

pub fn sign(odd: bool) -> i32 {
    if odd {
        -1
    } else {
        1
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn small_values() {
        assert_eq!(factorial(5), 120);
        assert_eq!(binomial(7, 3), 35);
        assert_eq!(binomial(3, 7), 0);
        assert_eq!(falling(6, 2), 30);
        assert_eq!(falling(2, 3), 0);
        let f = ratio_to_f64(&factorial(30), &factorial(32));
        assert!((f - 1.0 / 992.0).abs() < 1e-18);
    }
}
