use num_bigint::BigUint;
use num_traits::{One, ToPrimitive, Zero};

use crate::entropy::h;
use crate::error::{Error, Result};

/// `V(n, k) = sum_{i<=k} C(n, i)`, exact.
pub fn ball_volume(n: usize, k: usize) -> Result<BigUint> {
    if k > n {
        return Err(Error::InvalidArgument(format!("ball radius {k} exceeds length {n}")));
    }
    let mut c = BigUint::one();
    let mut total = BigUint::one();
    for i in 0..k {
        c = c * (n - i) / (i + 1);
        total += &c;
    }
    Ok(total)
}

/// `V(n, k)` for `n < 64`, as a machine integer.
#[cfg(test)]
pub(crate) fn ball_volume_u64(n: usize, k: usize) -> u64 {
    let mut c: u128 = 1;
    let mut total: u128 = 1;
    for i in 0..k.min(n) {
        c = c * (n - i) as u128 / (i + 1) as u128;
        total += c;
    }
    total as u64
}

/// `log2 x` from the top 64 bits; `-inf` at zero.
pub fn log2_biguint(x: &BigUint) -> f64 {
    if x.is_zero() {
        return f64::NEG_INFINITY;
    }
    let bits = x.bits();
    let shift = bits.saturating_sub(64);
    let top = (x >> shift).to_u64().unwrap_or(u64::MAX);
    (top as f64).log2() + shift as f64
}

/// `H(r) n - 2 log2 n <= log2 V(n, floor(r n)) <= H(r) n`, for `0 < r < 1/2`.
pub fn check_volume_entropy_bounds(n: usize, r: f64) -> bool {
    if n == 0 || !(r > 0.0 && r < 0.5) {
        return false;
    }
    let k = (r * n as f64).floor() as usize;
    let Ok(v) = ball_volume(n, k) else {
        return false;
    };
    let lv = log2_biguint(&v);
    let hn = h(r) * n as f64;
    let slack = 1e-9 * hn.max(1.0);
    lv <= hn + slack && hn - 2.0 * (n as f64).log2() <= lv + slack
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn examples() {
        assert_eq!(ball_volume(4, 1).unwrap(), BigUint::from(5u32));
        assert_eq!(ball_volume(10, 3).unwrap(), BigUint::from(176u32));
        for n in [0, 1, 7, 64, 100] {
            assert_eq!(ball_volume(n, n).unwrap(), BigUint::one() << n);
        }
        assert!(ball_volume(3, 4).is_err());
    }

    #[test]
    fn complement_identity() {
        for n in 1..=120usize {
            let whole = BigUint::one() << n;
            for k in 0..n {
                let lhs = ball_volume(n, k).unwrap() + ball_volume(n, n - k - 1).unwrap();
                assert_eq!(lhs, whole, "n={n} k={k}");
            }
        }
    }

    #[test]
    fn machine_volume_agrees() {
        for n in 0..64 {
            for k in 0..=n {
                assert_eq!(BigUint::from(ball_volume_u64(n, k)), ball_volume(n, k).unwrap());
            }
        }
    }

    #[test]
    fn log2_of_big_values() {
        assert_eq!(log2_biguint(&(BigUint::one() << 300usize)), 300.0);
        let x = BigUint::from(3u32) << 200usize;
        assert!((log2_biguint(&x) - (200.0 + 3f64.log2())).abs() < 1e-12);
    }

    #[test]
    fn entropy_bound_examples() {
        assert!(check_volume_entropy_bounds(100, 0.25));
        assert!(check_volume_entropy_bounds(20, 0.49));
        assert!(!check_volume_entropy_bounds(20, 0.5));
        for n in 4..300 {
            for k in 1..10 {
                assert!(check_volume_entropy_bounds(n, k as f64 / 20.0 - 1e-3), "n={n} k={k}");
            }
        }
    }
}
