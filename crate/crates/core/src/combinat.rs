//! Three-term progressions with shifted-prime common difference, and windowed
//! density diagnostics for finite integer sets.

use serde::Serialize;

use crate::arith::ArithTables;
use crate::error::{domain_err, LabError, Result};
use crate::par::{find_map_first, Exec};
use crate::report::{ExperimentReport, Row};

/// A finite set of nonnegative integers inside `[0, universe)`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct IntSet {
    universe: u64,
    members: Vec<u64>,
}

impl IntSet {
    pub fn new(universe: u64, mut members: Vec<u64>) -> Result<Self> {
        members.sort_unstable();
        members.dedup();
        if let Some(&top) = members.last() {
            if top >= universe {
                return Err(domain_err!("member {top} outside [0, {universe})"));
            }
        }
        Ok(IntSet { universe, members })
    }

    /// Universe defaults to one past the largest member.
    pub fn from_members(members: Vec<u64>) -> Result<Self> {
        let universe = members.iter().max().map_or(0, |&m| m + 1);
        IntSet::new(universe, members)
    }

    pub fn full(universe: u64) -> Self {
        IntSet { universe, members: (0..universe).collect() }
    }

    /// One integer per line; blank lines and `#` comments are skipped.
    pub fn parse_lines(text: &str, universe: Option<u64>) -> Result<Self> {
        let mut members = Vec::new();
        for (lineno, line) in text.lines().enumerate() {
            let line = line.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let v: u64 = line
                .parse()
                .map_err(|_| LabError::Parse(format!("line {}: not a nonnegative integer: {line:?}", lineno + 1)))?;
            members.push(v);
        }
        match universe {
            Some(n) => IntSet::new(n, members),
            None => IntSet::from_members(members),
        }
    }

    pub fn universe(&self) -> u64 {
        self.universe
    }

    pub fn members(&self) -> &[u64] {
        &self.members
    }

    pub fn len(&self) -> usize {
        self.members.len()
    }

    pub fn is_empty(&self) -> bool {
        self.members.is_empty()
    }

    pub fn density(&self) -> f64 {
        if self.universe == 0 {
            0.0
        } else {
            self.members.len() as f64 / self.universe as f64
        }
    }

    pub fn contains(&self, x: u64) -> bool {
        self.members.binary_search(&x).is_ok()
    }

    fn bitmap(&self) -> Vec<bool> {
        let mut bits = vec![false; self.universe as usize];
        for &m in &self.members {
            bits[m as usize] = true;
        }
        bits
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct ApHit {
    pub a: u64,
    pub p: u64,
    pub d: u64,
}

/// Common difference for prime `p`: `p - 1` when `sign < 0`, `p + 1` otherwise.
pub fn shifted_difference(p: u64, sign: i32) -> u64 {
    if sign < 0 {
        p - 1
    } else {
        p + 1
    }
}

/// Least `(p, a)` in lexicographic order with `a, a+d, a+2d ∈ S` and
/// `d = p ∓ 1 >= 1`. `None` certifies that no such progression exists.
pub fn find_3ap_shifted_prime(set: &IntSet, sign: i32, tables: &ArithTables) -> Result<Option<ApHit>> {
    find_3ap_shifted_prime_with(set, sign, tables, Exec::default())
}

pub fn find_3ap_shifted_prime_with(
    set: &IntSet,
    sign: i32,
    tables: &ArithTables,
    exec: Exec,
) -> Result<Option<ApHit>> {
    if sign != 1 && sign != -1 {
        return Err(domain_err!("sign must be -1 or +1, got {sign}"));
    }
    let (Some(&lo), Some(&hi)) = (set.members.first(), set.members.last()) else {
        return Ok(None);
    };
    let span = hi - lo;
    // d <= span/2 means p <= span/2 + 1 for either sign.
    let p_max = span / 2 + 1;
    if p_max > tables.bound() {
        return Err(domain_err!("set span needs primes up to {p_max}, sieve bound is {}", tables.bound()));
    }
    let primes = tables.primes_below(p_max + 1);
    let bits = set.bitmap();
    let hit = find_map_first(exec, 0..primes.len(), |i| {
        let p = primes[i] as u64;
        let d = shifted_difference(p, sign);
        if d == 0 || 2 * d > span {
            return None;
        }
        set.members
            .iter()
            .take_while(|&&a| a + 2 * d <= hi)
            .find(|&&a| bits[(a + d) as usize] && bits[(a + 2 * d) as usize])
            .map(|&a| ApHit { a, p, d })
    });
    if let Some(h) = hit {
        if !(set.contains(h.a) && set.contains(h.a + h.d) && set.contains(h.a + 2 * h.d)) {
            return Err(LabError::Invariant(format!("unverified progression {h:?}")));
        }
    }
    Ok(hit)
}

/// Rows `(window, start, end, count, density)` over `window_count` equal
/// consecutive windows of `[0, N)`.
pub fn density_scan(set: &IntSet, window_count: u64) -> Result<ExperimentReport> {
    let n = set.universe;
    if window_count < 1 {
        return Err(domain_err!("window_count must be >= 1"));
    }
    if window_count > n {
        return Err(domain_err!("window_count {window_count} exceeds universe {n}"));
    }
    let mut report = ExperimentReport::new("density_scan")
        .param("N", n)
        .param("windows", window_count)
        .param("density", set.density());
    for i in 0..window_count {
        let start = i * n / window_count;
        let end = (i + 1) * n / window_count;
        let count = set.members.partition_point(|&m| m < end) - set.members.partition_point(|&m| m < start);
        report.rows.push(
            Row::new()
                .with("window", i)
                .with("start", start)
                .with("end", end)
                .with("count", count)
                .with("density", count as f64 / (end - start) as f64),
        );
    }
    report.validate()?;
    Ok(report)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::arith::build_tables;

    #[test]
    fn spec_examples() {
        let t = build_tables(1000).unwrap();
        let full = IntSet::full(50);
        assert_eq!(find_3ap_shifted_prime(&full, -1, &t).unwrap(), Some(ApHit { a: 0, p: 2, d: 1 }));
        let evens = IntSet::new(100, (0..100).step_by(2).collect()).unwrap();
        assert_eq!(find_3ap_shifted_prime(&evens, -1, &t).unwrap(), Some(ApHit { a: 0, p: 3, d: 2 }));
        let sparse = IntSet::new(8, vec![0, 1, 5]).unwrap();
        assert_eq!(find_3ap_shifted_prime(&sparse, -1, &t).unwrap(), None);
        let empty = IntSet::new(10, vec![]).unwrap();
        assert_eq!(find_3ap_shifted_prime(&empty, 1, &t).unwrap(), None);
    }

    #[test]
    fn plus_sign_and_zero_difference() {
        let t = build_tables(100).unwrap();
        // p = 2 with sign +1 gives d = 3
        let s = IntSet::new(10, vec![1, 4, 7]).unwrap();
        assert_eq!(find_3ap_shifted_prime(&s, 1, &t).unwrap(), Some(ApHit { a: 1, p: 2, d: 3 }));
        // d = 3 would need p = 4
        assert_eq!(find_3ap_shifted_prime(&s, -1, &t).unwrap(), None);
        assert!(find_3ap_shifted_prime(&s, 0, &t).is_err());
    }

    #[test]
    fn parse_and_density() {
        let s = IntSet::parse_lines("# evens\n4\n0\n\n2\n2\n", Some(6)).unwrap();
        assert_eq!(s.members(), &[0, 2, 4]);
        assert!(IntSet::parse_lines("-3\n", None).is_err());
        assert!(IntSet::parse_lines("7\n", Some(5)).is_err());
        let evens = IntSet::new(1000, (0..1000).step_by(2).collect()).unwrap();
        let rep = density_scan(&evens, 7).unwrap();
        for row in &rep.rows {
            let width = (row.int("end").unwrap() - row.int("start").unwrap()) as f64;
            assert!((row.float("density").unwrap() - 0.5).abs() <= 1.0 / width);
        }
        assert!(density_scan(&IntSet::full(10), 3).unwrap().column("density").iter().all(|&d| d == 1.0));
        assert!(density_scan(&IntSet::new(10, vec![]).unwrap(), 3).unwrap().column("density").iter().all(|&d| d == 0.0));
        assert!(density_scan(&evens, 0).is_err());
    }
}
