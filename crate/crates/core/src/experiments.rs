//! Numerical harnesses: Gowers-norm tables for the W-tricked von Mangoldt
//! function, recurrence averages along shifted primes, the comparison of
//! prime averages with von Mangoldt weighted averages, and convergence
//! profiles of double averages along primes on circle rotations.
//!
//! Averages along primes are normalised by the number of primes actually
//! summed, `#{p < N}`.

use std::collections::BTreeMap;

use num_complex::Complex64;

use crate::arith::{is_prime_u64, restrict_to_zn, w_of, w_trick_scale, ArithTables};
use crate::dynamics::{triple_intersection, CircleRotation, MeasurableSet, System, TrigPoly};
use crate::error::{domain_err, precondition_err, LabError, Result};
use crate::par::{map_collect, pairwise_sum, tree_sum, Exec};
use crate::phase::e;
use crate::report::{ExperimentReport, NoSink, Recorder, Row, RowSink};
use crate::znz::{gowers_norm, Strategy};

/// Cap on `|supp f1| · |supp f2|` for double averages.
pub const MAX_PRODUCT_TERMS: usize = 10_000;
/// Initial-segment fraction used by the W-tricked averages.
pub const CUTOFF: u64 = 3;
/// Largest `w` accepted by the W-trick experiments (`W(17) = 30030`).
pub const MAX_W: u64 = 17;

fn check_w(w: u64) -> Result<u64> {
    if w > MAX_W {
        return Err(domain_err!("w = {w} exceeds the experiment cap {MAX_W}"));
    }
    w_of(w)
}

/// Log-spaced points `10^3, 10^3.5, ...` not exceeding `n`, ending at `n`.
pub fn log_ladder(n: u64) -> Vec<u64> {
    let mut out: Vec<u64> = (0..)
        .map(|i| 10f64.powf(3.0 + 0.5 * i as f64).round() as u64)
        .take_while(|&x| x < n)
        .collect();
    out.push(n);
    out
}

/// [`log_ladder`] with every point moved to the nearest prime `<= n`.
pub fn prime_ladder(n: u64, tables: &ArithTables) -> Result<Vec<u64>> {
    let below = tables.primes_below(n.saturating_add(1));
    let top = *below
        .last()
        .ok_or_else(|| domain_err!("no prime <= {n} in tables"))? as u64;
    let mut out: Vec<u64> = Vec::new();
    for x in log_ladder(n) {
        let p = tables.nearest_prime(x).map_or(top, |p| p.min(top));
        let p = if p > x && x == n { top } else { p };
        if out.last() != Some(&p) && out.last().is_none_or(|&l| l < p) {
            out.push(p);
        }
    }
    Ok(out)
}

/// `count` log-spaced integers from `lo` to `hi` inclusive.
pub fn log_spaced(lo: u64, hi: u64, count: usize) -> Result<Vec<u64>> {
    if lo == 0 || hi < lo || count < 2 {
        return Err(domain_err!("bad ladder {lo}:{hi}:{count}"));
    }
    let (a, b) = ((lo as f64).ln(), (hi as f64).ln());
    let mut out: Vec<u64> = (0..count)
        .map(|i| (a + (b - a) * i as f64 / (count - 1) as f64).exp().round() as u64)
        .collect();
    out[0] = lo;
    out[count - 1] = hi;
    out.dedup();
    Ok(out)
}

// ---------------------------------------------------------------------------
// Green–Tao uniformity table

#[derive(Debug, Clone)]
pub struct GtParams {
    pub w_list: Vec<u64>,
    pub n_list: Vec<u64>,
    pub r: u64,
    pub d: u32,
}

/// Sieve bound needed by [`gt_uniformity_table`] (cells that overflow are skipped).
pub fn gt_required_bound(params: &GtParams) -> u64 {
    let mut bound = 2;
    for &w in &params.w_list {
        let Ok(big_w) = check_w(w) else { continue };
        for &n in &params.n_list {
            let cut = n / CUTOFF;
            if let Some(x) = big_w.checked_mul(cut).and_then(|x| x.checked_add(params.r)) {
                bound = bound.max(x);
            }
        }
    }
    bound
}

/// Rows `(w, W, N, d, norm, status)` with
/// `norm = ‖(Λ̃_{w,N,r} − 1) · 1_{[0,⌊N/3⌋)}‖_{U_d(Z/NZ)}`.
pub fn gt_uniformity_table(params: &GtParams, tables: &ArithTables) -> Result<ExperimentReport> {
    gt_uniformity_table_streaming(params, tables, &mut NoSink)
}

pub fn gt_uniformity_table_streaming(
    params: &GtParams,
    tables: &ArithTables,
    sink: &mut dyn RowSink,
) -> Result<ExperimentReport> {
    if !(2..=3).contains(&params.d) {
        return Err(LabError::Unsupported(format!("d = {} (table supports 2 or 3)", params.d)));
    }
    if params.w_list.is_empty() || params.n_list.is_empty() {
        return Err(domain_err!("empty w or N list"));
    }
    let report = ExperimentReport::new("gt_uniformity_table")
        .param("w", join(&params.w_list))
        .param("N", join(&params.n_list))
        .param("r", params.r)
        .param("d", params.d)
        .param("cutoff", CUTOFF);
    let mut rec = Recorder::new(report, sink);
    for &w in &params.w_list {
        for &n in &params.n_list {
            let big_w = check_w(w).ok();
            let base = Row::new()
                .with("w", w)
                .with("W", big_w)
                .with("N", n)
                .with("d", params.d);
            let cell = check_w(w)
                .and_then(|_| restrict_to_zn(w, params.r, n, CUTOFF, tables))
                .and_then(|f| gowers_norm(&f, params.d, Strategy::Recursive));
            let row = match cell {
                Ok(norm) => base.with("norm", norm.value).with("status", "ok"),
                Err(err) => base.with("norm", None::<f64>).with("status", format!("error: {err}")),
            };
            rec.push(row)?;
        }
    }
    rec.finish()
}

fn join(v: &[u64]) -> String {
    v.iter().map(u64::to_string).collect::<Vec<_>>().join(" ")
}

// ---------------------------------------------------------------------------
// Recurrence along shifted primes

/// Rows `(N, primes, avg)` with
/// `avg = (1/#{p<N'}) Σ_{p<N'} μ(A ∩ T^{−(p+shift)}A ∩ T^{−2(p+shift)}A)`
/// along a log-spaced ladder `N' <= N`.
pub fn prime_shift_recurrence(
    system: &System,
    set: &MeasurableSet,
    shift: i64,
    n: u64,
    tables: &ArithTables,
) -> Result<ExperimentReport> {
    if n < 3 {
        return Err(domain_err!("need N >= 3 for a nonempty prime range, got {n}"));
    }
    if n - 1 > tables.bound() {
        return Err(domain_err!("N = {n} exceeds sieve bound {}", tables.bound()));
    }
    let primes = tables.primes_below(n);
    let measures: Vec<f64> = map_collect(Exec::default(), 0..primes.len(), |i| {
        triple_intersection(system, set, primes[i] as i64 + shift, 1)
    })
    .into_iter()
    .collect::<Result<_>>()?;
    let mut report = ExperimentReport::new("prime_shift_recurrence")
        .param("shift", shift)
        .param("N", n)
        .param("measure_A", system.measure(set)?);
    for point in log_ladder(n) {
        let count = tables.primes_below(point).len();
        if count == 0 {
            continue;
        }
        let avg = pairwise_sum(&measures[..count]) / count as f64;
        report
            .rows
            .push(Row::new().with("N", point).with("primes", count).with("avg", avg));
    }
    report.validate()?;
    Ok(report)
}

/// Rows `(N, W, weighted, unweighted, diff, min_unweighted)` over a prime
/// ladder `N' <= N`, where with `L = ⌊N'/3⌋`
/// `weighted = (1/L) Σ_{n<L} Λ̃_{w,N',1}(n) μ(A ∩ T^{−Wn}A ∩ T^{−2Wn}A)` and
/// `unweighted` drops the `Λ̃` factor. `min_unweighted` is the running
/// minimum of `unweighted` along the ladder.
pub fn w_tricked_recurrence(
    system: &System,
    set: &MeasurableSet,
    w: u64,
    n: u64,
    tables: &ArithTables,
) -> Result<ExperimentReport> {
    w_tricked_recurrence_streaming(system, set, w, n, tables, &mut NoSink)
}

pub fn w_tricked_recurrence_streaming(
    system: &System,
    set: &MeasurableSet,
    w: u64,
    n: u64,
    tables: &ArithTables,
    sink: &mut dyn RowSink,
) -> Result<ExperimentReport> {
    let big_w = check_w(w)?;
    let scale = w_trick_scale(w)?;
    let ladder = prime_ladder(n, tables)?;
    let max_len = *ladder.last().expect("ladder nonempty") / CUTOFF;
    if max_len == 0 {
        return Err(domain_err!("N = {n} too small for the initial segment"));
    }
    let top = big_w
        .checked_mul(max_len - 1)
        .and_then(|x| x.checked_add(1))
        .ok_or_else(|| LabError::Overflow("W·n + 1 overflows".into()))?;
    if top > tables.bound() {
        return Err(domain_err!("W·⌊N/3⌋ = {top} exceeds sieve bound {}", tables.bound()));
    }
    let gap = i64::try_from(big_w).map_err(|_| LabError::Overflow("W too large".into()))?;
    let measures: Vec<f64> = map_collect(Exec::default(), 0..max_len as usize, |i| {
        triple_intersection(system, set, i as i64, gap)
    })
    .into_iter()
    .collect::<Result<_>>()?;
    let lambda = tables.lambda_values();
    let weighted_terms: Vec<f64> = measures
        .iter()
        .enumerate()
        .map(|(i, m)| scale * lambda[(big_w * i as u64 + 1) as usize] * m)
        .collect();

    let report = ExperimentReport::new("w_tricked_recurrence")
        .param("w", w)
        .param("W", big_w)
        .param("N", n)
        .param("r", 1u64)
        .param("measure_A", system.measure(set)?);
    let mut rec = Recorder::new(report, sink);
    let mut running_min = f64::INFINITY;
    for point in ladder {
        if !is_prime_u64(point) {
            return Err(precondition_err!("ladder point {point} is composite"));
        }
        let len = (point / CUTOFF) as usize;
        if len == 0 {
            continue;
        }
        let weighted = pairwise_sum(&weighted_terms[..len]) / len as f64;
        let unweighted = pairwise_sum(&measures[..len]) / len as f64;
        running_min = running_min.min(unweighted);
        rec.push(
            Row::new()
                .with("N", point)
                .with("W", big_w)
                .with("weighted", weighted)
                .with("unweighted", unweighted)
                .with("diff", weighted - unweighted)
                .with("min_unweighted", running_min),
        )?;
    }
    rec.finish()
}

// ---------------------------------------------------------------------------
// Prime averages versus von Mangoldt weighted averages

/// Rows `(N, prime_avg_re, prime_avg_im, lambda_avg_re, lambda_avg_im, diff)`
/// along a log-spaced ladder, comparing `(1/#{p<N'}) Σ_{p<N'} a_p` with
/// `(1/N') Σ_{n<N'} Λ(n) a_n`. Requires `|a_n| <= 1`.
pub fn prime_vs_weighted<F>(a: F, n: u64, tables: &ArithTables) -> Result<ExperimentReport>
where
    F: Fn(u64) -> Complex64 + Sync + Send,
{
    if n < 3 {
        return Err(domain_err!("need N >= 3, got {n}"));
    }
    if n - 1 > tables.bound() {
        return Err(domain_err!("N = {n} exceeds sieve bound {}", tables.bound()));
    }
    let values = map_collect(Exec::default(), 0..n as usize, |i| a(i as u64));
    if let Some(i) = values
        .iter()
        .position(|z| z.norm().is_nan() || z.norm() > 1.0 + 1e-12)
    {
        return Err(precondition_err!("|a_n| > 1 at n = {i} (|a_n| = {})", values[i].norm()));
    }
    let lambda = tables.lambda_values();
    let weighted: Vec<Complex64> = values.iter().enumerate().map(|(i, z)| z * lambda[i]).collect();
    let primes = tables.primes_below(n);
    let at_primes: Vec<Complex64> = primes.iter().map(|&p| values[p as usize]).collect();

    let mut report = ExperimentReport::new("prime_vs_weighted").param("N", n);
    for point in log_ladder(n) {
        let count = tables.primes_below(point).len();
        if count == 0 {
            continue;
        }
        let prime_avg = pairwise_sum(&at_primes[..count]) / count as f64;
        let lambda_avg = pairwise_sum(&weighted[..point as usize]) / point as f64;
        report.rows.push(
            Row::new()
                .with("N", point)
                .with("prime_avg_re", prime_avg.re)
                .with("prime_avg_im", prime_avg.im)
                .with("lambda_avg_re", lambda_avg.re)
                .with("lambda_avg_im", lambda_avg.im)
                .with("diff", (prime_avg - lambda_avg).norm()),
        );
    }
    report.validate()?;
    Ok(report)
}

// ---------------------------------------------------------------------------
// Exponential sums and double averages on circle rotations

/// `S(j, N) = (1/#{p<N}) Σ_{p<N} e(jpα)`.
pub fn prime_exp_sum(alpha: &crate::dynamics::Alpha, j: i64, n: u64, tables: &ArithTables) -> Result<Complex64> {
    prime_exp_sum_with(alpha, j, n, tables, Exec::default())
}

pub fn prime_exp_sum_with(
    alpha: &crate::dynamics::Alpha,
    j: i64,
    n: u64,
    tables: &ArithTables,
    exec: Exec,
) -> Result<Complex64> {
    if n == 0 || n - 1 > tables.bound() {
        return Err(domain_err!("N = {n} outside sieve range (bound {})", tables.bound()));
    }
    let primes = tables.primes_below(n);
    if primes.is_empty() {
        return Err(domain_err!("no primes below N = {n}"));
    }
    if j == 0 {
        return Ok(Complex64::new(1.0, 0.0));
    }
    let sum = tree_sum(exec, 0..primes.len(), |i| e(alpha.frac_times(j * primes[i] as i64)));
    Ok(sum / primes.len() as f64)
}

/// `C(j, N) = (1/N) Σ_{n<N} e(jnα)`, by direct summation.
pub fn cesaro_exp_sum(alpha: &crate::dynamics::Alpha, j: i64, n: u64) -> Result<Complex64> {
    if n == 0 {
        return Err(domain_err!("N must be >= 1"));
    }
    if j == 0 {
        return Ok(Complex64::new(1.0, 0.0));
    }
    let sum = tree_sum(Exec::default(), 0..n as usize, |i| e(alpha.frac_times(j * i as i64)));
    Ok(sum / n as f64)
}

/// Averages of `T^s f_1 · T^{2s} f_2` over a weighted index set are the
/// trigonometric polynomial with coefficient `Σ_{k+l=m} c_k d_l F(k + 2l)` at
/// frequency `m`, where `F(j)` is the weighted average of `e(jsα)`.
fn double_average_from<F>(f1: &TrigPoly, f2: &TrigPoly, mut response: F) -> Result<TrigPoly>
where
    F: FnMut(i64) -> Result<Complex64>,
{
    let terms = f1.support_len() * f2.support_len();
    if terms > MAX_PRODUCT_TERMS {
        return Err(LabError::Resource(format!(
            "{terms} coefficient products exceed the cap of {MAX_PRODUCT_TERMS}"
        )));
    }
    let mut cache: BTreeMap<i64, Complex64> = BTreeMap::new();
    let mut out = Vec::with_capacity(terms);
    for (k, ck) in f1.terms() {
        for (l, dl) in f2.terms() {
            let j = k
                .checked_add(2 * l)
                .ok_or_else(|| LabError::Overflow("frequency overflow".into()))?;
            let s = match cache.get(&j) {
                Some(&s) => s,
                None => {
                    let s = response(j)?;
                    cache.insert(j, s);
                    s
                }
            };
            out.push((k + l, ck * dl * s));
        }
    }
    TrigPoly::from_terms(out)
}

/// `(1/#{p<N}) Σ_{p<N} T^p f_1 · T^{2p} f_2` as a trigonometric polynomial.
pub fn double_average_prime(
    system: &CircleRotation,
    f1: &TrigPoly,
    f2: &TrigPoly,
    n: u64,
    tables: &ArithTables,
) -> Result<TrigPoly> {
    double_average_from(f1, f2, |j| prime_exp_sum(&system.alpha, j, n, tables))
}

/// `(1/N) Σ_{n<N} T^n f_1 · T^{2n} f_2`.
pub fn cesaro_double_average(
    system: &CircleRotation,
    f1: &TrigPoly,
    f2: &TrigPoly,
    n: u64,
) -> Result<TrigPoly> {
    double_average_from(f1, f2, |j| cesaro_exp_sum(&system.alpha, j, n))
}

/// `(1/N) Σ_{n<N} Λ(n) T^n f_1 · T^{2n} f_2`.
pub fn lambda_double_average(
    system: &CircleRotation,
    f1: &TrigPoly,
    f2: &TrigPoly,
    n: u64,
    tables: &ArithTables,
) -> Result<TrigPoly> {
    if n == 0 || n - 1 > tables.bound() {
        return Err(domain_err!("N = {n} outside sieve range"));
    }
    let lambda = tables.lambda_values();
    double_average_from(f1, f2, |j| {
        let s = tree_sum(Exec::default(), 0..n as usize, |i| {
            e(system.alpha.frac_times(j * i as i64)) * lambda[i]
        });
        Ok(s / n as f64)
    })
}

/// Rows `(N, N_next, dist, avg_l2)` where `dist` is the `L²` distance between
/// prime double averages at consecutive ladder points.
pub fn cauchy_profile(
    system: &CircleRotation,
    f1: &TrigPoly,
    f2: &TrigPoly,
    ladder: &[u64],
    tables: &ArithTables,
) -> Result<ExperimentReport> {
    if ladder.len() < 2 {
        return Err(domain_err!("ladder needs at least 2 points"));
    }
    if ladder.windows(2).any(|w| w[0] >= w[1]) {
        return Err(domain_err!("ladder must be strictly ascending"));
    }
    let averages = ladder
        .iter()
        .map(|&n| double_average_prime(system, f1, f2, n, tables))
        .collect::<Result<Vec<_>>>()?;
    let mut report = ExperimentReport::new("cauchy_profile")
        .param("alpha", system.alpha.to_string())
        .param("ladder", join(ladder));
    for i in 0..ladder.len() - 1 {
        report.rows.push(
            Row::new()
                .with("N", ladder[i])
                .with("N_next", ladder[i + 1])
                .with("dist", averages[i + 1].sub(&averages[i]).l2())
                .with("avg_l2", averages[i].l2()),
        );
    }
    report.validate()?;
    Ok(report)
}

/// Rows `(N, prime_avg_dist)` with the `L²` distance between the prime double
/// average and the Cesàro double average, along a log-spaced ladder.
pub fn totally_ergodic_compare(
    system: &CircleRotation,
    f1: &TrigPoly,
    f2: &TrigPoly,
    n: u64,
    tables: &ArithTables,
) -> Result<ExperimentReport> {
    if system.alpha.is_rational() {
        return Err(precondition_err!(
            "rotation by {} is not totally ergodic (rational alpha)",
            system.alpha
        ));
    }
    let mut report = ExperimentReport::new("totally_ergodic_compare")
        .param("alpha", system.alpha.to_string())
        .param("N", n);
    for point in log_ladder(n) {
        let p = double_average_prime(system, f1, f2, point, tables)?;
        let c = cesaro_double_average(system, f1, f2, point)?;
        report
            .rows
            .push(Row::new().with("N", point).with("prime_avg_dist", p.sub(&c).l2()));
    }
    report.validate()?;
    Ok(report)
}

/// Rows `(w, W, N, dist)` comparing the von Mangoldt weighted double average
/// of length `⌊WN/3⌋` with the mean over reduced residues `r mod W` of the
/// plain averages `(1/⌊N/3⌋) Σ_{n<⌊N/3⌋} a(Wn + r)`.
pub fn w_decomposition(
    system: &CircleRotation,
    f1: &TrigPoly,
    f2: &TrigPoly,
    w_list: &[u64],
    n_list: &[u64],
    tables: &ArithTables,
) -> Result<ExperimentReport> {
    let mut report = ExperimentReport::new("w_decomposition")
        .param("alpha", system.alpha.to_string())
        .param("w", join(w_list))
        .param("N", join(n_list));
    for &w in w_list {
        let big_w = check_w(w)?;
        let residues: Vec<u64> = (0..big_w).filter(|&r| gcd(r, big_w) == 1).collect();
        for &n in n_list {
            let len = n / CUTOFF;
            let long = big_w * n / CUTOFF;
            if len == 0 {
                return Err(domain_err!("N = {n} too small"));
            }
            let weighted = lambda_double_average(system, f1, f2, long, tables)?;
            let split = double_average_from(f1, f2, |j| {
                let per_residue: Vec<Complex64> = residues
                    .iter()
                    .map(|&r| {
                        tree_sum(Exec::default(), 0..len as usize, |i| {
                            e(system.alpha.frac_times(j * (big_w * i as u64 + r) as i64))
                        }) / len as f64
                    })
                    .collect();
                Ok(pairwise_sum(&per_residue) / residues.len() as f64)
            })?;
            report.rows.push(
                Row::new()
                    .with("w", w)
                    .with("W", big_w)
                    .with("N", n)
                    .with("dist", weighted.sub(&split).l2()),
            );
        }
    }
    report.validate()?;
    Ok(report)
}

fn gcd(mut a: u64, mut b: u64) -> u64 {
    while b != 0 {
        (a, b) = (b, a % b);
    }
    a
}
