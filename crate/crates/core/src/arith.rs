//! Prime sieve and arithmetic functions: the von Mangoldt function, its
//! prime-only variant, Euler's totient, prime counting, the primorial-style
//! modulus `W(w)` and the W-tricked weights.
//!
//! Conventions: natural logarithms, and `Λ(0) = Λ(1) = 0`.

use crate::error::{domain_err, precondition_err, LabError, Result};
use crate::znz::ZnSeq;

/// Segment length of the sieve (fits comfortably in L1/L2).
const SEGMENT: usize = 1 << 15;

/// Sieve-backed tables for every `1 <= n <= bound`.
#[derive(Debug, Clone)]
pub struct ArithTables {
    bound: u64,
    primes: Vec<u32>,
    spf: Vec<u32>,
    lambda: Vec<f64>,
    phi: Vec<u32>,
}

/// Builds the tables with a segmented sieve of Eratosthenes that records the
/// smallest prime factor of every `n <= n_max`.
pub fn build_tables(n_max: u64) -> Result<ArithTables> {
    if n_max < 2 {
        return Err(domain_err!("sieve bound must be >= 2, got {n_max}"));
    }
    if n_max >= u32::MAX as u64 {
        return Err(LabError::Resource(format!("sieve bound {n_max} exceeds 32-bit tables")));
    }
    let len = n_max as usize + 1;
    let mut spf = vec![0u32; len];
    spf[1] = 1;

    let root = (n_max as f64).sqrt() as usize + 1;
    let base = simple_sieve(root.min(n_max as usize));

    let mut lo = 2usize;
    while lo < len {
        let hi = (lo + SEGMENT).min(len);
        for &p in &base {
            let p = p as usize;
            if p * p >= hi {
                break;
            }
            let first = (lo.div_ceil(p) * p).max(p * p);
            for j in (first..hi).step_by(p) {
                if spf[j] == 0 {
                    spf[j] = p as u32;
                }
            }
        }
        for (n, slot) in spf[lo..hi].iter_mut().enumerate() {
            if *slot == 0 {
                *slot = (lo + n) as u32;
            }
        }
        lo = hi;
    }

    let mut primes = Vec::new();
    let mut lambda = vec![0.0f64; len];
    let mut phi = vec![0u32; len];
    phi[1] = 1;
    for n in 2..len {
        let p = spf[n] as usize;
        let m = n / p;
        if p == n {
            primes.push(n as u32);
            lambda[n] = (n as f64).ln();
            phi[n] = (n - 1) as u32;
            continue;
        }
        phi[n] = if m.is_multiple_of(p) {
            phi[m] * p as u32
        } else {
            phi[m] * (p as u32 - 1)
        };
        if spf[m] as usize == p && lambda[m] > 0.0 {
            lambda[n] = lambda[m];
        }
    }

    Ok(ArithTables {
        bound: n_max,
        primes,
        spf,
        lambda,
        phi,
    })
}

fn simple_sieve(limit: usize) -> Vec<u32> {
    let mut composite = vec![false; limit + 1];
    let mut out = Vec::new();
    for i in 2..=limit {
        if !composite[i] {
            out.push(i as u32);
            for j in (i * i..=limit).step_by(i) {
                composite[j] = true;
            }
        }
    }
    out
}

impl ArithTables {
    pub fn bound(&self) -> u64 {
        self.bound
    }

    /// All primes `<= bound`, ascending.
    pub fn primes(&self) -> &[u32] {
        &self.primes
    }

    /// Primes strictly below `n`.
    pub fn primes_below(&self, n: u64) -> &[u32] {
        let k = self.primes.partition_point(|&p| (p as u64) < n);
        &self.primes[..k]
    }

    /// `π(x)`, the number of primes `<= x`.
    pub fn prime_pi(&self, x: u64) -> usize {
        self.primes.partition_point(|&p| (p as u64) <= x)
    }

    fn check(&self, n: u64) -> Result<usize> {
        if n > self.bound {
            return Err(domain_err!("n = {n} exceeds sieve bound {}", self.bound));
        }
        Ok(n as usize)
    }

    /// `Λ(n)`; zero at 0 and 1.
    pub fn lambda(&self, n: u64) -> Result<f64> {
        Ok(self.lambda[self.check(n)?])
    }

    /// `Λ` on `0..=bound` as a slice.
    pub fn lambda_values(&self) -> &[f64] {
        &self.lambda
    }

    /// Euler's totient, with `φ(0) = 0`.
    pub fn phi(&self, n: u64) -> Result<u64> {
        Ok(self.phi[self.check(n)?] as u64)
    }

    pub fn is_prime(&self, n: u64) -> Result<bool> {
        let i = self.check(n)?;
        Ok(i >= 2 && self.spf[i] as usize == i)
    }

    /// Smallest prime factor (`spf(1) = 1`).
    pub fn smallest_prime_factor(&self, n: u64) -> Result<u64> {
        let i = self.check(n)?;
        if i == 0 {
            return Err(domain_err!("0 has no smallest prime factor"));
        }
        Ok(self.spf[i] as u64)
    }

    /// Nearest prime to `x` within the table (ties go down).
    pub fn nearest_prime(&self, x: u64) -> Option<u64> {
        let k = self.primes.partition_point(|&p| (p as u64) < x);
        let above = self.primes.get(k).map(|&p| p as u64);
        let below = k.checked_sub(1).map(|i| self.primes[i] as u64);
        match (below, above) {
            (Some(b), Some(a)) => Some(if x - b <= a - x { b } else { a }),
            (b, a) => b.or(a),
        }
    }
}

/// `Λ′(n) = 1_P(n) · log n`.
pub fn lambda_prime(n: u64, tables: &ArithTables) -> Result<f64> {
    if n == 0 {
        return Err(domain_err!("Λ′ is defined for n >= 1"));
    }
    Ok(if tables.is_prime(n)? { (n as f64).ln() } else { 0.0 })
}

/// Result of comparing `Λ` with `Λ′` on `[0, N)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct VmGap {
    /// `(1/N) Σ_{n<N} (Λ(n) − Λ′(n))`
    pub gap: f64,
    /// `(log N / N) · π(⌊√N⌋)`
    pub bound: f64,
}

impl VmGap {
    pub fn holds(&self) -> bool {
        self.gap >= 0.0 && self.gap <= self.bound
    }
}

pub fn vm_gap_check(n: u64, tables: &ArithTables) -> Result<VmGap> {
    if n == 0 {
        return Err(domain_err!("N must be >= 1"));
    }
    if n - 1 > tables.bound {
        return Err(domain_err!("N = {n} exceeds sieve bound {}", tables.bound));
    }
    // Λ − Λ′ is supported on proper prime powers p^m, m >= 2.
    let mut total = 0.0;
    for &p in tables.primes() {
        let p = p as u64;
        match p.checked_mul(p) {
            Some(sq) if sq < n => {}
            _ => break,
        }
        let lp = tables.lambda[p as usize];
        let mut q = p * p;
        while q < n {
            total += lp;
            q = match q.checked_mul(p) {
                Some(v) => v,
                None => break,
            };
        }
    }
    let nf = n as f64;
    let root = isqrt(n);
    Ok(VmGap {
        gap: total / nf,
        bound: nf.ln() / nf * tables.prime_pi(root) as f64,
    })
}

pub(crate) fn isqrt(n: u64) -> u64 {
    let mut r = (n as f64).sqrt() as u64;
    while r * r > n {
        r -= 1;
    }
    while (r + 1) * (r + 1) <= n {
        r += 1;
    }
    r
}

/// Primality by trial division, for values that may lie outside a table.
pub fn is_prime_u64(n: u64) -> bool {
    if n < 2 {
        return false;
    }
    if n.is_multiple_of(2) {
        return n == 2;
    }
    let mut d = 3u64;
    while d.saturating_mul(d) <= n {
        if n.is_multiple_of(d) {
            return false;
        }
        d += 2;
    }
    true
}

/// Primes strictly below `w`.
fn primes_below_small(w: u64) -> impl Iterator<Item = u64> {
    (2..w).filter(|&p| is_prime_u64(p))
}

/// `W(w)`: product of the primes `p < w` (1 when there are none).
pub fn w_of(w: u64) -> Result<u64> {
    if w == 0 {
        return Err(domain_err!("w must be >= 1"));
    }
    primes_below_small(w).try_fold(1u64, |acc, p| {
        acc.checked_mul(p)
            .ok_or_else(|| LabError::Overflow(format!("W({w}) does not fit in 64 bits")))
    })
}

/// `φ(W(w))`, computed from the factorisation rather than a table.
pub fn phi_of_w(w: u64) -> Result<u64> {
    w_of(w)?;
    Ok(primes_below_small(w).map(|p| p - 1).product())
}

/// The W-trick normaliser `φ(W)/W`.
pub fn w_trick_scale(w: u64) -> Result<f64> {
    Ok(phi_of_w(w)? as f64 / w_of(w)? as f64)
}

fn gcd(mut a: u64, mut b: u64) -> u64 {
    while b != 0 {
        (a, b) = (b, a % b);
    }
    a
}

fn tricked_index(big_w: u64, r: u64, n: u64) -> Result<u64> {
    big_w
        .checked_mul(n)
        .and_then(|x| x.checked_add(r))
        .ok_or_else(|| LabError::Overflow(format!("W·n + r overflows for W={big_w}, n={n}, r={r}")))
}

/// `Λ̃_{w,r}(n) = φ(W)/W · Λ(Wn + r)`.
pub fn lambda_tilde(w: u64, r: u64, n: u64, tables: &ArithTables) -> Result<f64> {
    let big_w = w_of(w)?;
    let idx = tricked_index(big_w, r, n)?;
    Ok(w_trick_scale(w)? * tables.lambda(idx)?)
}

/// Mean of `Λ̃_{w,r}` over `0 <= n < len` (no cutoff).
pub fn lambda_tilde_mean(w: u64, r: u64, len: u64, tables: &ArithTables) -> Result<f64> {
    if len == 0 {
        return Err(domain_err!("empty range"));
    }
    let big_w = w_of(w)?;
    let scale = w_trick_scale(w)?;
    tables.check(tricked_index(big_w, r, len - 1)?)?;
    let vals: Vec<f64> = (0..len)
        .map(|n| tables.lambda[(big_w * n + r) as usize])
        .collect();
    Ok(scale * crate::par::pairwise_sum(&vals) / len as f64)
}

/// `n ↦ (Λ̃_{w,N,r}(n) − 1) · 1_{[0, ⌊N/k⌋)}(n)` on `Z/NZ`.
pub fn restrict_to_zn(w: u64, r: u64, modulus: u64, k: u64, tables: &ArithTables) -> Result<ZnSeq> {
    if !is_prime_u64(modulus) {
        return Err(precondition_err!("N = {modulus} is not prime"));
    }
    if k == 0 {
        return Err(domain_err!("cutoff fraction k must be >= 1"));
    }
    let big_w = w_of(w)?;
    if gcd(r, big_w) != 1 {
        return Err(precondition_err!("gcd(r = {r}, W = {big_w}) != 1"));
    }
    let cut = modulus / k;
    let scale = w_trick_scale(w)?;
    if cut > 0 {
        tables.check(tricked_index(big_w, r, cut - 1)?)?;
    }
    let values = (0..modulus)
        .map(|n| {
            if n < cut {
                let lam = tables.lambda[(big_w * n + r) as usize];
                num_complex::Complex64::new(scale * lam - 1.0, 0.0)
            } else {
                num_complex::Complex64::new(0.0, 0.0)
            }
        })
        .collect();
    ZnSeq::new(values)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn trial_division_primes(limit: u64) -> Vec<u32> {
        (2..=limit)
            .filter(|&n| (2..n).take_while(|d| d * d <= n).all(|d| n % d != 0))
            .map(|n| n as u32)
            .collect()
    }

    #[test]
    fn small_table() {
        let t = build_tables(10).unwrap();
        assert_eq!(t.primes(), &[2, 3, 5, 7]);
        let l2 = 2f64.ln();
        assert_eq!(t.lambda(8).unwrap(), l2);
        assert_eq!(t.lambda(9).unwrap(), 3f64.ln());
        assert_eq!(t.lambda(4).unwrap(), l2);
        assert_eq!(t.lambda(6).unwrap(), 0.0);
        assert_eq!(t.lambda(0).unwrap(), 0.0);
        assert_eq!(t.lambda(1).unwrap(), 0.0);
    }

    #[test]
    fn lambda_at_twelve_is_zero() {
        let t = build_tables(20).unwrap();
        assert_eq!(t.lambda(12).unwrap(), 0.0);
        assert_eq!(t.lambda(16).unwrap(), 2f64.ln());
    }

    #[test]
    fn bound_below_two_rejected() {
        assert!(matches!(build_tables(1), Err(LabError::Domain(_))));
        assert!(matches!(build_tables(0), Err(LabError::Domain(_))));
    }

    #[test]
    fn primes_match_trial_division() {
        for limit in [2u64, 3, 97, 1000, 10_000] {
            let t = build_tables(limit).unwrap();
            assert_eq!(t.primes(), trial_division_primes(limit).as_slice(), "limit {limit}");
        }
    }

    #[test]
    fn segment_boundaries() {
        // Spans several sieve segments.
        let limit = 3 * SEGMENT as u64 + 17;
        let t = build_tables(limit).unwrap();
        for n in (SEGMENT as u64 - 50)..(SEGMENT as u64 + 50) {
            assert_eq!(t.is_prime(n).unwrap(), is_prime_u64(n), "n = {n}");
        }
        assert_eq!(t.prime_pi(limit), (2..=limit).filter(|&n| is_prime_u64(n)).count());
    }

    #[test]
    fn lambda_positive_exactly_on_prime_powers() {
        let t = build_tables(5000).unwrap();
        for n in 2..=5000u64 {
            let mut m = n;
            let p = (2..=n).find(|d| n % d == 0).unwrap();
            while m % p == 0 {
                m /= p;
            }
            let expected = if m == 1 { (p as f64).ln() } else { 0.0 };
            let got = t.lambda(n).unwrap();
            assert!((got - expected).abs() <= 1e-12 * expected.max(1.0), "n = {n}");
        }
    }

    #[test]
    fn phi_properties() {
        let t = build_tables(3000).unwrap();
        for &p in t.primes() {
            assert_eq!(t.phi(p as u64).unwrap(), p as u64 - 1);
        }
        for a in 1..55u64 {
            for b in 1..55u64 {
                if gcd(a, b) == 1 {
                    assert_eq!(t.phi(a * b).unwrap(), t.phi(a).unwrap() * t.phi(b).unwrap());
                }
            }
        }
        assert_eq!(t.phi(1).unwrap(), 1);
        assert_eq!(t.phi(36).unwrap(), 12);
    }

    #[test]
    fn out_of_range_lookup() {
        let t = build_tables(10).unwrap();
        assert!(matches!(t.lambda(11), Err(LabError::Domain(_))));
        assert!(lambda_prime(11, &t).is_err());
        assert!(lambda_prime(0, &t).is_err());
    }

    #[test]
    fn lambda_prime_values() {
        let t = build_tables(10).unwrap();
        assert_eq!(lambda_prime(7, &t).unwrap(), 7f64.ln());
        assert_eq!(lambda_prime(8, &t).unwrap(), 0.0);
        assert_eq!(lambda_prime(1, &t).unwrap(), 0.0);
    }

    #[test]
    fn vm_gap_small_cases() {
        let t = build_tables(1000).unwrap();
        assert_eq!(vm_gap_check(2, &t).unwrap().gap, 0.0);
        // direct summation oracle
        let direct: f64 = (0..100u64)
            .map(|n| t.lambda(n).unwrap() - if n >= 1 { lambda_prime(n, &t).unwrap() } else { 0.0 })
            .sum::<f64>()
            / 100.0;
        // 4,8,16,32,64 -> 5 log 2; 9,27,81 -> 3 log 3; 25 -> log 5; 49 -> log 7
        let closed = (5.0 * 2f64.ln() + 3.0 * 3f64.ln() + 5f64.ln() + 7f64.ln()) / 100.0;
        let g = vm_gap_check(100, &t).unwrap();
        assert!((g.gap - direct).abs() < 1e-14);
        assert!((g.gap - closed).abs() < 1e-14);
        assert!(g.holds());
        for n in 1..=1000 {
            assert!(vm_gap_check(n, &t).unwrap().holds(), "N = {n}");
        }
    }

    #[test]
    fn w_values() {
        assert_eq!(w_of(1).unwrap(), 1);
        assert_eq!(w_of(2).unwrap(), 1);
        assert_eq!(w_of(3).unwrap(), 2);
        assert_eq!(w_of(5).unwrap(), 6);
        assert_eq!(w_of(11).unwrap(), 210);
        assert_eq!(w_of(17).unwrap(), 30030);
        assert_eq!(w_of(19).unwrap(), 510510);
        assert!(w_of(53).is_ok());
        assert!(matches!(w_of(54), Err(LabError::Overflow(_))));
        assert_eq!(phi_of_w(5).unwrap(), 2);
        assert_eq!(phi_of_w(2).unwrap(), 1);
    }

    #[test]
    fn lambda_tilde_examples() {
        let t = build_tables(1000).unwrap();
        for n in 0..500 {
            assert_eq!(lambda_tilde(2, 0, n, &t).unwrap(), t.lambda(n).unwrap());
        }
        assert!((lambda_tilde(3, 1, 1, &t).unwrap() - 3f64.ln() / 2.0).abs() < 1e-15);
        assert!((lambda_tilde(5, 1, 2, &t).unwrap() - 13f64.ln() / 3.0).abs() < 1e-15);
        assert!(lambda_tilde(5, 1, 200, &t).is_err());
    }

    #[test]
    fn restrict_examples() {
        let t = build_tables(100).unwrap();
        let s = restrict_to_zn(2, 1, 5, 3, &t).unwrap();
        // w = 2, r = 1: entry 0 is Λ(1) − 1 = −1
        assert_eq!(s.values()[0].re, -1.0);
        assert!(s.values()[1..].iter().all(|z| z.norm() == 0.0));

        let s = restrict_to_zn(2, 0, 5, 3, &t).unwrap();
        assert_eq!(s.values()[0].re, -1.0);

        let s = restrict_to_zn(3, 1, 31, 3, &t).unwrap();
        assert!(s.values()[10..].iter().all(|z| z.norm() == 0.0));

        assert!(matches!(restrict_to_zn(2, 1, 9, 3, &t), Err(LabError::Precondition(_))));
        assert!(matches!(restrict_to_zn(5, 3, 11, 3, &t), Err(LabError::Precondition(_))));
    }

    #[test]
    fn w_tricked_mean_is_near_one() {
        let t = build_tables(6 * 9973 + 1).unwrap();
        let mean = lambda_tilde_mean(5, 1, 9973, &t).unwrap();
        let oracle: f64 = (0..9973u64)
            .map(|n| (2.0 / 6.0) * t.lambda(6 * n + 1).unwrap())
            .sum::<f64>()
            / 9973.0;
        assert!((mean - oracle).abs() < 1e-12);
        assert!((mean - 1.0).abs() < 0.1, "mean = {mean}");
    }

    #[test]
    fn nearest_prime_picks_closest() {
        let t = build_tables(2000).unwrap();
        assert_eq!(t.nearest_prime(1000), Some(997));
        assert_eq!(t.nearest_prime(1008), Some(1009));
        assert_eq!(t.nearest_prime(7), Some(7));
    }
}
