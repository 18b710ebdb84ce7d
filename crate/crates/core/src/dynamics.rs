//! Simulated measure-preserving systems.
//!
//! Two families are supported: finite probability spaces with a
//! measure-preserving permutation, and rotations of the circle `[0, 1)`
//! with interval-union sets and trigonometric-polynomial observables.

use std::collections::BTreeMap;
use std::fmt;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::config::TOL_INEQ;
use crate::error::{domain_err, precondition_err, LabError, Result};
use crate::par::{tree_sum, Exec};
use crate::phase::{e, frac_mul, frac_mul_rational};
use crate::znz::{gowers_norm_with, InequalityCheck, Strategy, ZnSeq};

const WEIGHT_TOL: f64 = 1e-12;
const SUP_SLACK: f64 = 1e-12;

/// A finite probability space `{0, ..., M-1}` with a permutation `T`.
#[derive(Debug, Clone, PartialEq)]
pub struct FiniteMps {
    weights: Vec<f64>,
    map: Vec<usize>,
    /// `cycles[c]` lists the orbit of the c-th cycle in the order `x, Tx, T²x, ...`.
    cycles: Vec<Vec<usize>>,
    /// `(cycle, position)` of every point.
    place: Vec<(usize, usize)>,
}

impl FiniteMps {
    pub fn new(weights: Vec<f64>, map: Vec<usize>) -> Result<Self> {
        let m = map.len();
        if m == 0 || weights.len() != m {
            return Err(domain_err!("need M >= 1 weights and map entries of equal length"));
        }
        if weights.iter().any(|&w| !(w.is_finite() && w >= 0.0)) {
            return Err(domain_err!("weights must be finite and nonnegative"));
        }
        let total: f64 = crate::par::pairwise_sum(&weights);
        if (total - 1.0).abs() > WEIGHT_TOL {
            return Err(domain_err!("weights sum to {total}, expected 1"));
        }
        let mut seen = vec![false; m];
        for &y in &map {
            if y >= m || std::mem::replace(&mut seen[y], true) {
                return Err(domain_err!("map is not a permutation of 0..{m}"));
            }
        }
        for x in 0..m {
            if (weights[x] - weights[map[x]]).abs() > WEIGHT_TOL {
                return Err(precondition_err!(
                    "T does not preserve the measure: w({x}) != w(T{x})"
                ));
            }
        }
        let mut place = vec![(usize::MAX, 0); m];
        let mut cycles = Vec::new();
        for start in 0..m {
            if place[start].0 != usize::MAX {
                continue;
            }
            let id = cycles.len();
            let mut orbit = Vec::new();
            let mut x = start;
            loop {
                place[x] = (id, orbit.len());
                orbit.push(x);
                x = map[x];
                if x == start {
                    break;
                }
            }
            cycles.push(orbit);
        }
        Ok(FiniteMps {
            weights,
            map,
            cycles,
            place,
        })
    }

    /// `x ↦ x + 1 mod M` with uniform weights.
    pub fn cyclic(m: usize) -> Result<Self> {
        if m == 0 {
            return Err(domain_err!("M must be >= 1"));
        }
        Self::new(vec![1.0 / m as f64; m], (0..m).map(|x| (x + 1) % m).collect())
    }

    /// Uniform weights with an arbitrary permutation.
    pub fn uniform(map: Vec<usize>) -> Result<Self> {
        let m = map.len().max(1);
        Self::new(vec![1.0 / m as f64; map.len()], map)
    }

    pub fn size(&self) -> usize {
        self.map.len()
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    pub fn map(&self) -> &[usize] {
        &self.map
    }

    /// `T^n x` for any integer `n`.
    pub fn iterate(&self, x: usize, n: i64) -> usize {
        let (c, pos) = self.place[x];
        let orbit = &self.cycles[c];
        let len = orbit.len() as i64;
        orbit[(pos as i64 + n.rem_euclid(len)).rem_euclid(len) as usize]
    }

    pub fn measure(&self, set: &IndexSet) -> Result<f64> {
        self.check_set(set)?;
        Ok(set.members().iter().map(|&x| self.weights[x]).sum())
    }

    /// `T^{-n}A = {x : T^n x ∈ A}`.
    pub fn preimage(&self, set: &IndexSet, n: i64) -> Result<IndexSet> {
        self.check_set(set)?;
        let mask = set.mask(self.size());
        let members = (0..self.size()).filter(|&x| mask[self.iterate(x, n)]).collect();
        Ok(IndexSet { members })
    }

    fn check_set(&self, set: &IndexSet) -> Result<()> {
        match set.members().last() {
            Some(&x) if x >= self.size() => {
                Err(domain_err!("set index {x} outside state space of size {}", self.size()))
            }
            _ => Ok(()),
        }
    }
}

/// A subset of a finite state space (sorted, distinct).
#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct IndexSet {
    members: Vec<usize>,
}

impl IndexSet {
    pub fn new(mut members: Vec<usize>) -> Self {
        members.sort_unstable();
        members.dedup();
        IndexSet { members }
    }

    pub fn members(&self) -> &[usize] {
        &self.members
    }

    fn mask(&self, size: usize) -> Vec<bool> {
        let mut mask = vec![false; size];
        for &x in &self.members {
            mask[x] = true;
        }
        mask
    }
}

/// A finite union of half-open intervals in `[0, 1)`, kept sorted and disjoint.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct IntervalSet {
    intervals: Vec<(f64, f64)>,
}

impl IntervalSet {
    /// Builds the union of `[a, b)` pieces. Empty pieces are dropped and
    /// overlapping or touching pieces merged.
    pub fn new(pieces: impl IntoIterator<Item = (f64, f64)>) -> Result<Self> {
        let mut v: Vec<(f64, f64)> = Vec::new();
        for (a, b) in pieces {
            if !(a.is_finite() && b.is_finite()) || a < 0.0 || b > 1.0 || a > b {
                return Err(domain_err!("[{a}, {b}) is not a subinterval of [0, 1)"));
            }
            if b > a {
                v.push((a, b));
            }
        }
        Ok(Self::normalize(v))
    }

    pub fn full() -> Self {
        IntervalSet {
            intervals: vec![(0.0, 1.0)],
        }
    }

    pub fn empty() -> Self {
        IntervalSet::default()
    }

    fn normalize(mut v: Vec<(f64, f64)>) -> Self {
        v.sort_by(|x, y| x.0.total_cmp(&y.0));
        let mut out: Vec<(f64, f64)> = Vec::with_capacity(v.len());
        for (a, b) in v {
            if b <= a {
                continue;
            }
            match out.last_mut() {
                Some(last) if a <= last.1 => last.1 = last.1.max(b),
                _ => out.push((a, b)),
            }
        }
        IntervalSet { intervals: out }
    }

    pub fn intervals(&self) -> &[(f64, f64)] {
        &self.intervals
    }

    pub fn measure(&self) -> f64 {
        self.intervals.iter().map(|(a, b)| b - a).sum()
    }

    pub fn contains(&self, x: f64) -> bool {
        self.intervals.iter().any(|&(a, b)| a <= x && x < b)
    }

    pub fn intersect(&self, other: &IntervalSet) -> IntervalSet {
        let (a, b) = (&self.intervals, &other.intervals);
        let (mut i, mut j) = (0, 0);
        let mut out = Vec::new();
        while i < a.len() && j < b.len() {
            let lo = a[i].0.max(b[j].0);
            let hi = a[i].1.min(b[j].1);
            if lo < hi {
                out.push((lo, hi));
            }
            if a[i].1 < b[j].1 {
                i += 1;
            } else {
                j += 1;
            }
        }
        IntervalSet { intervals: out }
    }

    pub fn union(&self, other: &IntervalSet) -> IntervalSet {
        Self::normalize(self.intervals.iter().chain(&other.intervals).copied().collect())
    }

    /// `A + beta mod 1`. Each interval splits into at most two pieces.
    pub fn translate(&self, beta: f64) -> IntervalSet {
        let beta = beta - beta.floor();
        let mut v = Vec::with_capacity(self.intervals.len() + 1);
        for &(a, b) in &self.intervals {
            let (mut lo, mut hi) = (a + beta, b + beta);
            if lo >= 1.0 {
                lo -= 1.0;
                hi -= 1.0;
            }
            if hi > 1.0 {
                v.push((lo, 1.0));
                v.push((0.0, (hi - 1.0).min(1.0)));
            } else {
                v.push((lo, hi.min(1.0)));
            }
        }
        Self::normalize(v)
    }
}

/// Rotation number of a circle rotation.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum Alpha {
    /// `p/q` in lowest terms with `0 <= p < q`.
    Rational { p: i64, q: i64 },
    /// A real stored as a double, treated as irrational.
    Irrational(f64),
}

impl Alpha {
    pub fn rational(p: i64, q: i64) -> Result<Self> {
        if q <= 0 {
            return Err(domain_err!("denominator must be positive, got {q}"));
        }
        let p = p.rem_euclid(q);
        let g = gcd(p, q).max(1);
        Ok(Alpha::Rational { p: p / g, q: q / g })
    }

    pub fn irrational(x: f64) -> Result<Self> {
        if !x.is_finite() {
            return Err(domain_err!("alpha must be finite"));
        }
        Ok(Alpha::Irrational(x - x.floor()))
    }

    /// `sqrt(2) − 1`
    pub fn sqrt2_minus_1() -> Self {
        Alpha::Irrational(std::f64::consts::SQRT_2 - 1.0)
    }

    /// `(sqrt(5) − 1)/2`
    pub fn golden() -> Self {
        Alpha::Irrational((5f64.sqrt() - 1.0) / 2.0)
    }

    /// Parses `sqrt2-1`, `golden`, `(sqrt5-1)/2`, `p/q` or a decimal literal.
    pub fn parse(s: &str) -> Result<Self> {
        let s = s.trim();
        match s {
            "sqrt2-1" => return Ok(Self::sqrt2_minus_1()),
            "golden" | "(sqrt5-1)/2" => return Ok(Self::golden()),
            _ => {}
        }
        if let Some((p, q)) = s.split_once('/') {
            let p = p.trim().parse().map_err(|_| LabError::Parse(format!("bad alpha {s:?}")))?;
            let q = q.trim().parse().map_err(|_| LabError::Parse(format!("bad alpha {s:?}")))?;
            return Self::rational(p, q);
        }
        let x: f64 = s.parse().map_err(|_| LabError::Parse(format!("bad alpha {s:?}")))?;
        Self::irrational(x)
    }

    pub fn value(&self) -> f64 {
        match *self {
            Alpha::Rational { p, q } => p as f64 / q as f64,
            Alpha::Irrational(x) => x,
        }
    }

    pub fn is_rational(&self) -> bool {
        matches!(self, Alpha::Rational { .. })
    }

    /// Fractional part of `m · alpha`.
    pub fn frac_times(&self, m: i64) -> f64 {
        match *self {
            Alpha::Rational { p, q } => frac_mul_rational(m, p, q),
            Alpha::Irrational(x) => frac_mul(m, x),
        }
    }
}

impl fmt::Display for Alpha {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Alpha::Rational { p, q } => write!(f, "{p}/{q}"),
            Alpha::Irrational(x) => write!(f, "{x}"),
        }
    }
}

fn gcd(mut a: i64, mut b: i64) -> i64 {
    while b != 0 {
        (a, b) = (b, a % b);
    }
    a.abs()
}

/// `T x = x + alpha mod 1` on `[0, 1)` with Lebesgue measure.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CircleRotation {
    pub alpha: Alpha,
}

impl CircleRotation {
    pub fn new(alpha: Alpha) -> Self {
        CircleRotation { alpha }
    }

    /// `T^{-n}A = A − nα mod 1`.
    pub fn preimage(&self, set: &IntervalSet, n: i64) -> IntervalSet {
        set.translate(self.alpha.frac_times(-n))
    }
}

/// A trigonometric polynomial `Σ_k c_k e(kx)`.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct TrigPoly {
    coeffs: BTreeMap<i64, Complex64>,
}

impl TrigPoly {
    pub fn zero() -> Self {
        TrigPoly::default()
    }

    pub fn constant(c: Complex64) -> Self {
        Self::monomial(0, c)
    }

    /// `c · e(kx)`
    pub fn monomial(k: i64, c: Complex64) -> Self {
        let mut coeffs = BTreeMap::new();
        coeffs.insert(k, c);
        TrigPoly { coeffs }
    }

    pub fn from_terms(terms: impl IntoIterator<Item = (i64, Complex64)>) -> Result<Self> {
        let mut p = TrigPoly::zero();
        for (k, c) in terms {
            if !(c.re.is_finite() && c.im.is_finite()) {
                return Err(domain_err!("non-finite coefficient at frequency {k}"));
            }
            *p.coeffs.entry(k).or_default() += c;
        }
        Ok(p)
    }

    /// Parses `k:re[:im]` terms separated by commas, e.g. `"1:1"` or `"2:1,-1:0.5:0.5"`.
    pub fn parse(s: &str) -> Result<Self> {
        let bad = || LabError::Parse(format!("bad trigonometric polynomial {s:?}"));
        let mut terms = Vec::new();
        for term in s.split(',').map(str::trim).filter(|t| !t.is_empty()) {
            let parts: Vec<&str> = term.split(':').map(str::trim).collect();
            let k: i64 = parts.first().ok_or_else(bad)?.parse().map_err(|_| bad())?;
            let re: f64 = parts.get(1).ok_or_else(bad)?.parse().map_err(|_| bad())?;
            let im: f64 = match parts.get(2) {
                Some(v) => v.parse().map_err(|_| bad())?,
                None => 0.0,
            };
            if parts.len() > 3 {
                return Err(bad());
            }
            terms.push((k, Complex64::new(re, im)));
        }
        if terms.is_empty() {
            return Err(bad());
        }
        Self::from_terms(terms)
    }

    pub fn coeff(&self, k: i64) -> Complex64 {
        self.coeffs.get(&k).copied().unwrap_or_default()
    }

    pub fn terms(&self) -> impl Iterator<Item = (i64, Complex64)> + '_ {
        self.coeffs.iter().map(|(&k, &c)| (k, c))
    }

    pub fn support_len(&self) -> usize {
        self.coeffs.len()
    }

    pub fn eval(&self, x: f64) -> Complex64 {
        self.terms().map(|(k, c)| c * e(k as f64 * x)).sum()
    }

    /// `Σ |c_k|`, an upper bound for the sup norm.
    pub fn sup_bound(&self) -> f64 {
        self.coeffs.values().map(|c| c.norm()).sum()
    }

    /// `(Σ |c_k|²)^{1/2}` (Parseval).
    pub fn l2(&self) -> f64 {
        self.coeffs.values().map(|c| c.norm_sqr()).sum::<f64>().sqrt()
    }

    pub fn sub(&self, other: &TrigPoly) -> TrigPoly {
        let mut out = self.clone();
        for (k, c) in other.terms() {
            *out.coeffs.entry(k).or_default() -= c;
        }
        out
    }

    pub fn add(&self, other: &TrigPoly) -> TrigPoly {
        let mut out = self.clone();
        for (k, c) in other.terms() {
            *out.coeffs.entry(k).or_default() += c;
        }
        out
    }

    pub fn scale(&self, s: Complex64) -> TrigPoly {
        TrigPoly {
            coeffs: self.coeffs.iter().map(|(&k, &c)| (k, c * s)).collect(),
        }
    }

    /// Largest coefficient difference, `max_k |a_k − b_k|`.
    pub fn max_coeff_diff(&self, other: &TrigPoly) -> f64 {
        self.sub(other).coeffs.values().map(|c| c.norm()).fold(0.0, f64::max)
    }

    /// Drops exact-zero coefficients.
    pub fn pruned(mut self) -> TrigPoly {
        self.coeffs.retain(|_, c| *c != Complex64::new(0.0, 0.0));
        self
    }
}

/// A measure-preserving system.
#[derive(Debug, Clone, PartialEq)]
pub enum System {
    Finite(FiniteMps),
    Rotation(CircleRotation),
}

/// A measurable set of a [`System`].
#[derive(Debug, Clone, PartialEq)]
pub enum MeasurableSet {
    Indices(IndexSet),
    Intervals(IntervalSet),
}

/// An observable `f: X → C`.
#[derive(Debug, Clone, PartialEq)]
pub enum Observable {
    Vector(Vec<Complex64>),
    Trig(TrigPoly),
}

fn kind_mismatch(what: &str) -> LabError {
    LabError::Domain(format!("{what} does not match the system kind"))
}

impl System {
    pub fn measure(&self, set: &MeasurableSet) -> Result<f64> {
        match (self, set) {
            (System::Finite(s), MeasurableSet::Indices(a)) => s.measure(a),
            (System::Rotation(_), MeasurableSet::Intervals(a)) => Ok(a.measure()),
            _ => Err(kind_mismatch("set")),
        }
    }

    /// The whole space as a set of this system.
    pub fn full_set(&self) -> MeasurableSet {
        match self {
            System::Finite(s) => MeasurableSet::Indices(IndexSet::new((0..s.size()).collect())),
            System::Rotation(_) => MeasurableSet::Intervals(IntervalSet::full()),
        }
    }
}

/// `μ(A ∩ T^{−gn}A ∩ T^{−2gn}A)` where `g` is the gap multiplier.
pub fn triple_intersection(system: &System, set: &MeasurableSet, n: i64, gap: i64) -> Result<f64> {
    let step = n
        .checked_mul(gap)
        .and_then(|s| s.checked_mul(2).map(|_| s))
        .ok_or_else(|| LabError::Overflow(format!("n·g overflows for n={n}, g={gap}")))?;
    match (system, set) {
        (System::Finite(s), MeasurableSet::Indices(a)) => {
            s.check_set(a)?;
            let mask = a.mask(s.size());
            Ok(a
                .members()
                .iter()
                .filter(|&&x| mask[s.iterate(x, step)] && mask[s.iterate(x, 2 * step)])
                .map(|&x| s.weights[x])
                .sum())
        }
        (System::Rotation(r), MeasurableSet::Intervals(a)) => {
            let b = r.preimage(a, step);
            let c = r.preimage(a, 2 * step);
            Ok(a.intersect(&b).intersect(&c).measure())
        }
        _ => Err(kind_mismatch("set")),
    }
}

/// `f ∘ T^n`.
pub fn transport(f: &Observable, system: &System, n: i64) -> Result<Observable> {
    match (system, f) {
        (System::Finite(s), Observable::Vector(v)) => {
            if v.len() != s.size() {
                return Err(domain_err!("observable length {} != M = {}", v.len(), s.size()));
            }
            Ok(Observable::Vector((0..s.size()).map(|x| v[s.iterate(x, n)]).collect()))
        }
        (System::Rotation(r), Observable::Trig(p)) => {
            let mut out = TrigPoly::zero();
            for (k, c) in p.terms() {
                let kn = k
                    .checked_mul(n)
                    .ok_or_else(|| LabError::Overflow(format!("k·n overflows for k={k}, n={n}")))?;
                out.coeffs.insert(k, c * e(r.alpha.frac_times(kn)));
            }
            Ok(Observable::Trig(out))
        }
        _ => Err(kind_mismatch("observable")),
    }
}

/// `‖f‖_{L²(μ)}`.
pub fn l2_norm(f: &Observable, system: &System) -> Result<f64> {
    match (system, f) {
        (System::Finite(s), Observable::Vector(v)) => {
            if v.len() != s.size() {
                return Err(domain_err!("observable length {} != M = {}", v.len(), s.size()));
            }
            let terms: Vec<f64> = v.iter().zip(&s.weights).map(|(z, w)| w * z.norm_sqr()).collect();
            Ok(crate::par::pairwise_sum(&terms).sqrt())
        }
        (System::Rotation(_), Observable::Trig(p)) => Ok(p.l2()),
        _ => Err(kind_mismatch("observable")),
    }
}

/// Checks
/// `‖(1/L) Σ_{n<L} θ(n) T^n f_1 ⋯ T^{(k−1)n} f_{k−1}‖_{L²} <= (2k)^{3/2} ‖θ‖_{U_k(Z/NZ)}`
/// with `L = ⌊N/k⌋`, on a finite system.
pub fn ergodic_gvn_check(
    system: &FiniteMps,
    theta: &ZnSeq,
    fs: &[Vec<Complex64>],
    k: u32,
    modulus: usize,
) -> Result<InequalityCheck> {
    ergodic_gvn_check_with(system, theta, fs, k, modulus, TOL_INEQ, Exec::default())
}

pub fn ergodic_gvn_check_with(
    system: &FiniteMps,
    theta: &ZnSeq,
    fs: &[Vec<Complex64>],
    k: u32,
    modulus: usize,
    slack: f64,
    exec: Exec,
) -> Result<InequalityCheck> {
    if !(2..=crate::znz::MAX_ORDER).contains(&k) {
        return Err(LabError::Unsupported(format!("k = {k} (supported: 2..=4)")));
    }
    if theta.modulus() != modulus {
        return Err(domain_err!("θ has modulus {} but N = {modulus}", theta.modulus()));
    }
    if modulus <= k as usize {
        return Err(precondition_err!("need N > k, got N = {modulus}, k = {k}"));
    }
    if fs.len() != k as usize - 1 {
        return Err(domain_err!("expected {} observables, got {}", k - 1, fs.len()));
    }
    let len = modulus / k as usize;
    if let Some(n) = (len..modulus).find(|&n| theta.values()[n] != Complex64::new(0.0, 0.0)) {
        return Err(precondition_err!(
            "θ must vanish on [⌊N/k⌋, N) = [{len}, {modulus}); θ({n}) != 0"
        ));
    }
    for (i, f) in fs.iter().enumerate() {
        if f.len() != system.size() {
            return Err(domain_err!("f_{} has length {} != M = {}", i + 1, f.len(), system.size()));
        }
        if let Some(x) = f.iter().position(|z| z.norm() > 1.0 + SUP_SLACK) {
            return Err(precondition_err!("‖f_{}‖_∞ > 1 (at x = {x})", i + 1));
        }
    }
    let th = theta.values();
    let sq = tree_sum(exec, 0..system.size(), |x| {
        let avg = tree_sum(Exec::Sequential, 0..len, |n| {
            let mut prod = th[n];
            for (i, f) in fs.iter().enumerate() {
                prod *= f[system.iterate(x, ((i + 1) * n) as i64)];
            }
            prod
        }) / len as f64;
        system.weights[x] * avg.norm_sqr()
    });
    let lhs = sq.sqrt();
    let norm = gowers_norm_with(theta, k, Strategy::Recursive, exec)?.value;
    let rhs = (2.0 * k as f64).powf(1.5) * norm;
    Ok(InequalityCheck::new(lhs, rhs, slack))
}

/// On-disk description of a system.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase")]
pub enum SystemFile {
    Cyclic {
        #[serde(rename = "M")]
        m: usize,
    },
    Permutation {
        map: Vec<usize>,
        #[serde(default)]
        weights: Option<Vec<f64>>,
    },
    Rotation {
        alpha: AlphaSpec,
    },
}

/// `alpha` may be a number (irrational literal), `{"p":..,"q":..}` or a named constant.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum AlphaSpec {
    Number(f64),
    Fraction { p: i64, q: i64 },
    Named(String),
}

impl SystemFile {
    pub fn build(&self) -> Result<System> {
        Ok(match self {
            SystemFile::Cyclic { m } => System::Finite(FiniteMps::cyclic(*m)?),
            SystemFile::Permutation { map, weights } => System::Finite(match weights {
                Some(w) => FiniteMps::new(w.clone(), map.clone())?,
                None => FiniteMps::uniform(map.clone())?,
            }),
            SystemFile::Rotation { alpha } => System::Rotation(CircleRotation::new(match alpha {
                AlphaSpec::Number(x) => Alpha::irrational(*x)?,
                AlphaSpec::Fraction { p, q } => Alpha::rational(*p, *q)?,
                AlphaSpec::Named(s) => Alpha::parse(s)?,
            })),
        })
    }
}

/// On-disk set: `[[a,b],...]` half-open ranges (integer ranges for finite
/// systems) or a bare list of state indices.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum SetFile {
    Ranges(Vec<[f64; 2]>),
    Indices(Vec<usize>),
}

impl SetFile {
    pub fn build(&self, system: &System) -> Result<MeasurableSet> {
        match (system, self) {
            (System::Rotation(_), SetFile::Ranges(r)) => Ok(MeasurableSet::Intervals(
                IntervalSet::new(r.iter().map(|[a, b]| (*a, *b)))?,
            )),
            (System::Finite(s), SetFile::Indices(ix)) => {
                let set = IndexSet::new(ix.clone());
                s.check_set(&set)?;
                Ok(MeasurableSet::Indices(set))
            }
            (System::Finite(s), SetFile::Ranges(r)) => {
                let mut members = Vec::new();
                for [a, b] in r {
                    if a.fract() != 0.0 || b.fract() != 0.0 || *a < 0.0 || a > b {
                        return Err(domain_err!("[{a}, {b}) is not an integer range"));
                    }
                    members.extend(*a as usize..*b as usize);
                }
                let set = IndexSet::new(members);
                s.check_set(&set)?;
                Ok(MeasurableSet::Indices(set))
            }
            (System::Rotation(_), SetFile::Indices(_)) => Err(kind_mismatch("index set")),
        }
    }
}
