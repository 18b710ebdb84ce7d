//! Functions on `Z/NZ`, averages over the group, Gowers uniformity norms and
//! the generalized von Neumann inequality for linear patterns.

use std::fmt;
use std::str::FromStr;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::config::TOL_INEQ;
use crate::error::{domain_err, precondition_err, LabError, Result};
use crate::fft::FftPlan;
use crate::par::{tree_sum, Exec};

/// Largest order the norm engine evaluates.
pub const MAX_ORDER: u32 = 4;
/// Largest modulus accepted by the brute-force strategy.
pub const BRUTEFORCE_MAX_N: usize = 256;
/// Slack on `|φ_i| <= 1` for the bounded factors.
const UNIT_BOUND_SLACK: f64 = 1e-12;

/// A complex-valued function on `Z/NZ`, stored as its `N` values.
#[derive(Debug, Clone, PartialEq)]
pub struct ZnSeq {
    values: Vec<Complex64>,
}

impl ZnSeq {
    pub fn new(values: Vec<Complex64>) -> Result<Self> {
        if values.is_empty() {
            return Err(domain_err!("modulus N must be >= 1"));
        }
        if let Some(i) = values.iter().position(|z| !(z.re.is_finite() && z.im.is_finite())) {
            return Err(domain_err!("non-finite value at index {i}"));
        }
        Ok(ZnSeq { values })
    }

    pub fn from_real(values: &[f64]) -> Result<Self> {
        Self::new(values.iter().map(|&x| Complex64::new(x, 0.0)).collect())
    }

    /// Builds `n ↦ f(n)` for `0 <= n < modulus`.
    pub fn from_fn(modulus: usize, f: impl FnMut(usize) -> Complex64) -> Result<Self> {
        Self::new((0..modulus).map(f).collect())
    }

    /// Indicator of `{n : n in members}` (indices reduced mod `modulus`).
    pub fn indicator(modulus: usize, members: impl IntoIterator<Item = usize>) -> Result<Self> {
        let mut values = vec![Complex64::new(0.0, 0.0); modulus];
        for m in members {
            if modulus > 0 {
                values[m % modulus] = Complex64::new(1.0, 0.0);
            }
        }
        Self::new(values)
    }

    pub fn modulus(&self) -> usize {
        self.values.len()
    }

    pub fn values(&self) -> &[Complex64] {
        &self.values
    }

    /// `f(n)` with `n` reduced mod `N`.
    pub fn at(&self, n: i64) -> Complex64 {
        self.values[n.rem_euclid(self.modulus() as i64) as usize]
    }

    /// `f_h(n) = f(n + h)`.
    pub fn shift(&self, h: i64) -> ZnSeq {
        let n = self.modulus();
        let h = h.rem_euclid(n as i64) as usize;
        let values = (0..n).map(|i| self.values[(i + h) % n]).collect();
        ZnSeq { values }
    }

    pub fn conj(&self) -> ZnSeq {
        ZnSeq {
            values: self.values.iter().map(|z| z.conj()).collect(),
        }
    }

    pub fn scale(&self, c: Complex64) -> ZnSeq {
        ZnSeq {
            values: self.values.iter().map(|z| z * c).collect(),
        }
    }

    pub fn add(&self, other: &ZnSeq) -> Result<ZnSeq> {
        same_modulus(self, other)?;
        Ok(ZnSeq {
            values: self.values.iter().zip(&other.values).map(|(a, b)| a + b).collect(),
        })
    }

    /// Pointwise product.
    pub fn mul(&self, other: &ZnSeq) -> Result<ZnSeq> {
        same_modulus(self, other)?;
        Ok(ZnSeq {
            values: self.values.iter().zip(&other.values).map(|(a, b)| a * b).collect(),
        })
    }

    /// `sup_n |f(n)|`
    pub fn sup_norm(&self) -> f64 {
        self.values.iter().map(|z| z.norm()).fold(0.0, f64::max)
    }

    /// `(E|f|²)^{1/2}`
    pub fn l2_norm(&self) -> f64 {
        let sq: Vec<f64> = self.values.iter().map(|z| z.norm_sqr()).collect();
        (crate::par::pairwise_sum(&sq) / self.modulus() as f64).sqrt()
    }

    /// Parses one value per line as `re,im` (or a bare real). Blank lines and
    /// lines starting with `#` are skipped.
    pub fn parse_lines(text: &str) -> Result<Self> {
        let mut values = Vec::new();
        for (lineno, line) in text.lines().enumerate() {
            let line = line.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let parse = |s: &str| {
                s.trim()
                    .parse::<f64>()
                    .map_err(|_| LabError::Parse(format!("line {}: bad number {s:?}", lineno + 1)))
            };
            let z = match line.split_once(',') {
                Some((re, im)) => Complex64::new(parse(re)?, parse(im)?),
                None => Complex64::new(parse(line)?, 0.0),
            };
            values.push(z);
        }
        Self::new(values)
    }
}

fn same_modulus(a: &ZnSeq, b: &ZnSeq) -> Result<()> {
    if a.modulus() != b.modulus() {
        return Err(domain_err!("modulus mismatch: {} vs {}", a.modulus(), b.modulus()));
    }
    Ok(())
}

/// `E_{n ∈ Z/NZ} f(n)`.
pub fn expectation(f: &ZnSeq) -> Complex64 {
    mean(f.values(), Exec::Sequential)
}

fn mean(values: &[Complex64], exec: Exec) -> Complex64 {
    tree_sum(exec, 0..values.len(), |i| values[i]) / values.len() as f64
}

/// How a Gowers norm is evaluated.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Strategy {
    /// The defining recursion `‖f‖_{U_{d+1}}^{2^{d+1}} = E_h ‖f_h f̄‖_{U_d}^{2^d}`.
    Recursive,
    /// `‖f‖_{U_2}^4 = Σ_ξ |f̂(ξ)|^4` (order 2 only).
    Fourier,
    /// Direct average over all parallelepipeds `(n, h_1, ..., h_d)`.
    Bruteforce,
}

impl fmt::Display for Strategy {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Strategy::Recursive => "recursive",
            Strategy::Fourier => "fourier",
            Strategy::Bruteforce => "bruteforce",
        })
    }
}

impl FromStr for Strategy {
    type Err = LabError;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "recursive" => Ok(Strategy::Recursive),
            "fourier" => Ok(Strategy::Fourier),
            "bruteforce" | "brute-force" => Ok(Strategy::Bruteforce),
            other => Err(LabError::Parse(format!("unknown strategy {other:?}"))),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct NormResult {
    pub d: u32,
    pub value: f64,
    pub strategy: Strategy,
}

/// `‖f‖_{U_d(Z/NZ)}` using the default execution mode.
pub fn gowers_norm(f: &ZnSeq, d: u32, strategy: Strategy) -> Result<NormResult> {
    gowers_norm_with(f, d, strategy, Exec::default())
}

pub fn gowers_norm_with(f: &ZnSeq, d: u32, strategy: Strategy, exec: Exec) -> Result<NormResult> {
    if d == 0 || d > MAX_ORDER {
        return Err(LabError::Unsupported(format!("order d = {d} (supported: 1..={MAX_ORDER})")));
    }
    let n = f.modulus();
    let power = match strategy {
        Strategy::Recursive => {
            let plan = (d >= 3).then(|| FftPlan::new(n));
            recursive_power(f.values(), d, true, exec, plan.as_ref())
        }
        Strategy::Fourier => {
            if d != 2 {
                return Err(LabError::Unsupported(format!(
                    "fourier strategy evaluates U_2 only, got d = {d}"
                )));
            }
            fourier_power2(f.values(), &FftPlan::new(n))
        }
        Strategy::Bruteforce => {
            if n > BRUTEFORCE_MAX_N {
                return Err(LabError::Unsupported(format!(
                    "bruteforce strategy capped at N <= {BRUTEFORCE_MAX_N}, got {n}"
                )));
            }
            bruteforce_power(f.values(), d, exec)
        }
    };
    Ok(NormResult {
        d,
        value: power.max(0.0).powf(1.0 / (1u64 << d) as f64),
        strategy,
    })
}

/// `‖f‖_{U_d}^{2^d}` via the recursion. At the top level order 2 is the
/// literal average `E_h |E_n f(n+h) f̄(n)|²`; nested order-2 evaluations go
/// through the Fourier identity so `U_3` costs `O(N² log N)`.
fn recursive_power(f: &[Complex64], d: u32, top: bool, exec: Exec, plan: Option<&FftPlan>) -> f64 {
    let n = f.len();
    match d {
        1 => mean(f, Exec::Sequential).norm_sqr(),
        2 if top || plan.is_none() => {
            let total = tree_sum(exec, 0..n, |h| {
                let corr = tree_sum(Exec::Sequential, 0..n, |i| f[(i + h) % n] * f[i].conj());
                (corr / n as f64).norm_sqr()
            });
            total / n as f64
        }
        2 => fourier_power2(f, plan.expect("plan present")),
        _ => {
            let total = tree_sum(exec, 0..n, |h| {
                let g: Vec<Complex64> = (0..n).map(|i| f[(i + h) % n] * f[i].conj()).collect();
                recursive_power(&g, d - 1, false, Exec::Sequential, plan)
            });
            total / n as f64
        }
    }
}

fn fourier_power2(f: &[Complex64], plan: &FftPlan) -> f64 {
    let hat = crate::fft::normalized_dft(plan, f);
    let quartic: Vec<f64> = hat.iter().map(|z| z.norm_sqr().powi(2)).collect();
    crate::par::pairwise_sum(&quartic)
}

fn bruteforce_power(f: &[Complex64], d: u32, exec: Exec) -> f64 {
    let n = f.len();
    let d = d as usize;
    let vertices = 1usize << d;
    let parity: Vec<bool> = (0..vertices).map(|w| w.count_ones() % 2 == 1).collect();
    let cells = n.pow(d as u32);
    let total = tree_sum(exec, 0..n, |base| {
        let mut h = vec![0usize; d];
        let mut offset = vec![0usize; vertices];
        let mut acc = Complex64::new(0.0, 0.0);
        for _ in 0..cells {
            for w in 1..vertices {
                let low = w.trailing_zeros() as usize;
                offset[w] = (offset[w & (w - 1)] + h[low]) % n;
            }
            let mut prod = Complex64::new(1.0, 0.0);
            for w in 0..vertices {
                let v = f[(base + offset[w]) % n];
                prod *= if parity[w] { v.conj() } else { v };
            }
            acc += prod;
            for slot in h.iter_mut() {
                *slot += 1;
                if *slot < n {
                    break;
                }
                *slot = 0;
            }
        }
        acc
    });
    total.re / (n as f64).powi(d as i32 + 1)
}

/// Outcome of an inequality check `lhs <= rhs + slack`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct InequalityCheck {
    pub lhs: f64,
    pub rhs: f64,
    pub holds: bool,
}

impl InequalityCheck {
    pub fn new(lhs: f64, rhs: f64, slack: f64) -> Self {
        InequalityCheck {
            lhs,
            rhs,
            holds: lhs <= rhs + slack,
        }
    }
}

/// Checks `|E_{m,n} θ(n) φ_0(m) φ_1(m+n) ⋯ φ_{k−1}(m+(k−1)n)| <= ‖θ‖_{U_k} ‖φ_0‖_{L²}`
/// with the default slack.
pub fn gvn_check(theta: &ZnSeq, phis: &[ZnSeq], k: u32) -> Result<InequalityCheck> {
    gvn_check_with(theta, phis, k, TOL_INEQ, Exec::default())
}

pub fn gvn_check_with(
    theta: &ZnSeq,
    phis: &[ZnSeq],
    k: u32,
    slack: f64,
    exec: Exec,
) -> Result<InequalityCheck> {
    if k == 0 || k > MAX_ORDER {
        return Err(LabError::Unsupported(format!("k = {k} (supported: 1..={MAX_ORDER})")));
    }
    if phis.len() != k as usize {
        return Err(domain_err!("expected {k} functions φ_0..φ_{{k-1}}, got {}", phis.len()));
    }
    for phi in phis {
        same_modulus(theta, phi)?;
    }
    for (i, phi) in phis.iter().enumerate().skip(1) {
        if let Some(n) = phi.values().iter().position(|z| z.norm() > 1.0 + UNIT_BOUND_SLACK) {
            return Err(precondition_err!("|φ_{i}({n})| > 1"));
        }
    }
    let n = theta.modulus();
    let th = theta.values();
    let total = tree_sum(exec, 0..n, |step| {
        if th[step] == Complex64::new(0.0, 0.0) {
            return Complex64::new(0.0, 0.0);
        }
        let inner = tree_sum(Exec::Sequential, 0..n, |m| {
            let mut prod = phis[0].values()[m];
            for (i, phi) in phis.iter().enumerate().skip(1) {
                prod *= phi.values()[(m + i * step) % n];
            }
            prod
        });
        th[step] * inner
    });
    let lhs = (total / (n as f64 * n as f64)).norm();
    let norm = gowers_norm_with(theta, k, Strategy::Recursive, exec)?.value;
    let rhs = norm * phis[0].l2_norm();
    Ok(InequalityCheck::new(lhs, rhs, slack))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::phase::e;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn random_seq(rng: &mut ChaCha8Rng, n: usize) -> ZnSeq {
        ZnSeq::from_fn(n, |_| Complex64::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0)))
            .unwrap()
    }

    fn c(re: f64) -> Complex64 {
        Complex64::new(re, 0.0)
    }

    #[test]
    fn construction_rejects_bad_input() {
        assert!(ZnSeq::new(vec![]).is_err());
        assert!(ZnSeq::new(vec![c(f64::NAN)]).is_err());
        assert!(ZnSeq::new(vec![Complex64::new(0.0, f64::INFINITY)]).is_err());
    }

    #[test]
    fn shift_wraps() {
        let f = ZnSeq::from_real(&[0.0, 1.0, 2.0, 3.0]).unwrap();
        assert_eq!(f.shift(1).values()[3], c(0.0));
        assert_eq!(f.shift(-1).values()[0], c(3.0));
        assert_eq!(f.shift(9), f.shift(1));
        assert_eq!(f.at(-1), c(3.0));
    }

    #[test]
    fn expectation_examples() {
        let f = ZnSeq::from_fn(6, |_| Complex64::new(2.0, -1.0)).unwrap();
        assert!((expectation(&f) - Complex64::new(2.0, -1.0)).norm() < 1e-15);
        let delta = ZnSeq::indicator(8, [0]).unwrap();
        assert_eq!(expectation(&delta), c(0.125));
        for n in [2usize, 3, 17, 64] {
            let ch = ZnSeq::from_fn(n, |i| e(i as f64 / n as f64)).unwrap();
            assert!(expectation(&ch).norm() < 1e-14);
        }
    }

    #[test]
    fn constant_one_has_unit_norm() {
        let one = ZnSeq::from_real(&[1.0; 7]).unwrap();
        for d in 1..=4 {
            for s in [Strategy::Recursive, Strategy::Bruteforce] {
                let v = gowers_norm(&one, d, s).unwrap().value;
                assert!((v - 1.0).abs() < 1e-12, "d={d} {s}");
            }
        }
        assert!((gowers_norm(&one, 2, Strategy::Fourier).unwrap().value - 1.0).abs() < 1e-12);
    }

    #[test]
    fn delta_closed_forms() {
        let delta = ZnSeq::indicator(5, [0]).unwrap();
        for s in [Strategy::Recursive, Strategy::Bruteforce, Strategy::Fourier] {
            let v = gowers_norm(&delta, 2, s).unwrap().value;
            assert!((v - 5f64.powf(-0.75)).abs() < 1e-12, "{s}");
        }
        for s in [Strategy::Recursive, Strategy::Bruteforce] {
            let v = gowers_norm(&delta, 3, s).unwrap().value;
            assert!((v - 5f64.powf(-0.5)).abs() < 1e-12, "{s}");
        }
    }

    #[test]
    fn quadratic_phase_u2_is_gauss_sum_flat() {
        // |f̂(ξ)| = N^{-1/2} for every ξ, so ‖f‖_{U_2} = (N · N^{-2})^{1/4}.
        let n = 17;
        let f = ZnSeq::from_fn(n, |i| e(((i * i) % n) as f64 / n as f64)).unwrap();
        let rec = gowers_norm(&f, 2, Strategy::Recursive).unwrap().value;
        let fou = gowers_norm(&f, 2, Strategy::Fourier).unwrap().value;
        assert!((rec - fou).abs() <= 1e-10 * fou);
        assert!((rec - 17f64.powf(-0.25)).abs() < 1e-12);
        // a quadratic phase is fully structured at order 3
        let u3 = gowers_norm(&f, 3, Strategy::Recursive).unwrap().value;
        assert!((u3 - 1.0).abs() < 1e-12);
    }

    #[test]
    fn unsupported_pairs() {
        let f = ZnSeq::from_real(&[1.0; 300]).unwrap();
        assert!(matches!(gowers_norm(&f, 3, Strategy::Fourier), Err(LabError::Unsupported(_))));
        assert!(matches!(gowers_norm(&f, 2, Strategy::Bruteforce), Err(LabError::Unsupported(_))));
        assert!(matches!(gowers_norm(&f, 0, Strategy::Recursive), Err(LabError::Unsupported(_))));
        assert!(matches!(gowers_norm(&f, 5, Strategy::Recursive), Err(LabError::Unsupported(_))));
    }

    #[test]
    fn strategies_agree_on_random_inputs() {
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        for _ in 0..20 {
            let n = rng.gen_range(2..=24);
            let f = random_seq(&mut rng, n);
            for d in 1..=3 {
                let r = gowers_norm(&f, d, Strategy::Recursive).unwrap().value;
                let b = gowers_norm(&f, d, Strategy::Bruteforce).unwrap().value;
                assert!((r - b).abs() <= 1e-10 * r.max(1.0), "n={n} d={d} {r} vs {b}");
            }
        }
    }

    #[test]
    fn u4_recursive_matches_bruteforce() {
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        let f = random_seq(&mut rng, 9);
        let r = gowers_norm(&f, 4, Strategy::Recursive).unwrap().value;
        let b = gowers_norm(&f, 4, Strategy::Bruteforce).unwrap().value;
        assert!((r - b).abs() <= 1e-10 * r.max(1.0));
    }

    #[test]
    fn sequential_and_parallel_are_bit_identical() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let f = random_seq(&mut rng, 101);
        for d in [2, 3] {
            let a = gowers_norm_with(&f, d, Strategy::Recursive, Exec::Parallel).unwrap();
            let b = gowers_norm_with(&f, d, Strategy::Recursive, Exec::Sequential).unwrap();
            assert_eq!(a.value.to_bits(), b.value.to_bits());
        }
    }

    #[test]
    fn gvn_base_case_and_constants() {
        let theta = ZnSeq::from_real(&[1.0, 2.0, -0.5, 0.0, 3.0]).unwrap();
        let phi0 = ZnSeq::from_fn(5, |_| c(0.7)).unwrap();
        let chk = gvn_check(&theta, &[phi0], 1).unwrap();
        assert!((chk.lhs - chk.rhs).abs() < 1e-14);
        assert!(chk.holds);

        let one = ZnSeq::from_real(&[1.0; 11]).unwrap();
        let chk = gvn_check(&one, &[one.clone(), one.clone(), one.clone()], 3).unwrap();
        assert!((chk.lhs - 1.0).abs() < 1e-14 && (chk.rhs - 1.0).abs() < 1e-12);
        assert!(chk.holds);
    }

    #[test]
    fn gvn_errors() {
        let a = ZnSeq::from_real(&[1.0; 5]).unwrap();
        let b = ZnSeq::from_real(&[1.0; 6]).unwrap();
        assert!(matches!(gvn_check(&a, &[b], 1), Err(LabError::Domain(_))));
        let big = ZnSeq::from_real(&[1.0, 1.5, 1.0, 1.0, 1.0]).unwrap();
        assert!(matches!(
            gvn_check(&a, &[a.clone(), big.clone()], 2),
            Err(LabError::Precondition(_))
        ));
        // φ_0 may be unbounded
        assert!(gvn_check(&a, &[big, a.clone()], 2).is_ok());
        assert!(gvn_check(&a, std::slice::from_ref(&a), 2).is_err());
    }

    #[test]
    fn parse_lines_formats() {
        let f = ZnSeq::parse_lines("# header\n1,0\n0.5,-2\n\n3\n").unwrap();
        assert_eq!(f.modulus(), 3);
        assert_eq!(f.values()[1], Complex64::new(0.5, -2.0));
        assert_eq!(f.values()[2], c(3.0));
        assert!(ZnSeq::parse_lines("1,x").is_err());
        assert!(ZnSeq::parse_lines("").is_err());
    }
}
