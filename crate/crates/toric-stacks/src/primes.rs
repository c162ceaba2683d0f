//! Prime generation utilities shared by the counting and Euler-product code.

/// All primes `<= bound`, by sieve of Eratosthenes.
pub fn primes_up_to(bound: u64) -> Vec<u64> {
    if bound < 2 {
        return Vec::new();
    }
    let n = bound as usize;
    let mut is_prime = vec![true; n + 1];
    is_prime[0] = false;
    is_prime[1] = false;
    let mut p = 2usize;
    while p * p <= n {
        if is_prime[p] {
            let mut m = p * p;
            while m <= n {
                is_prime[m] = false;
                m += p;
            }
        }
        p += 1;
    }
    (2..=bound).filter(|&k| is_prime[k as usize]).collect()
}

/// Prime factorization of |n| by trial division. Intended for the small
/// numerators/denominators appearing in torus points; panics on n = 0.
pub fn factorize(n: &num::BigInt) -> Vec<(u64, u32)> {
    use num::{Signed, Zero};
    assert!(!n.is_zero(), "factorize(0)");
    let mut m = n.abs();
    let one = num::BigInt::from(1u32);
    let mut out = Vec::new();
    let mut p = 2u64;
    while &m > &one {
        let bp = num::BigInt::from(p);
        if &bp * &bp > m {
            // m itself is prime.
            let q: u64 = (&m).try_into().expect("prime factor exceeds u64");
            out.push((q, 1));
            break;
        }
        let mut e = 0u32;
        loop {
            use num::Integer;
            let (quo, rem) = m.div_rem(&bp);
            if rem.is_zero() {
                m = quo;
                e += 1;
            } else {
                break;
            }
        }
        if e > 0 {
            out.push((p, e));
        }
        p += if p == 2 { 1 } else { 2 };
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use num::BigInt;

    #[test]
    fn small_primes() {
        assert_eq!(primes_up_to(1), Vec::<u64>::new());
        assert_eq!(primes_up_to(2), vec![2]);
        assert_eq!(primes_up_to(20), vec![2, 3, 5, 7, 11, 13, 17, 19]);
    }

    #[test]
    fn prime_count_to_1000() {
        assert_eq!(primes_up_to(1000).len(), 168);
    }

    #[test]
    fn factorize_small() {
        assert_eq!(factorize(&BigInt::from(1)), vec![]);
        assert_eq!(factorize(&BigInt::from(-12)), vec![(2, 2), (3, 1)]);
        assert_eq!(factorize(&BigInt::from(97)), vec![(97, 1)]);
        assert_eq!(factorize(&BigInt::from(2 * 3 * 5 * 49)), vec![(2, 1), (3, 1), (5, 1), (7, 2)]);
    }
}
