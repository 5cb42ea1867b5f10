use std::fmt;

use num_traits::{One, Zero};
use rand::seq::SliceRandom;
use rand::Rng;

use crate::error::{Error, Result};

use super::{in_u, in_v, in_w, rational, s_minor, t_apply, Family, Rational, Sampler, SortedAvgOp};

/// Outcome of checking one claim on a batch of instances. Probes explore
/// hypotheses the claims exclude; their failures are findings, not errors.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ClaimReport {
    pub name: String,
    pub asserted: bool,
    pub samples: usize,
    pub failures: usize,
    pub counterexample: Option<String>,
}

impl ClaimReport {
    fn new(name: impl Into<String>) -> ClaimReport {
        ClaimReport {
            name: name.into(),
            asserted: true,
            samples: 0,
            failures: 0,
            counterexample: None,
        }
    }

    fn probe(name: impl Into<String>) -> ClaimReport {
        ClaimReport {
            asserted: false,
            ..ClaimReport::new(name)
        }
    }

    fn record(&mut self, ok: bool, instance: impl FnOnce() -> String) {
        self.samples += 1;
        if !ok {
            self.failures += 1;
            if self.counterexample.is_none() {
                self.counterexample = Some(instance());
            }
        }
    }

    /// True for probes, and for claims without failures.
    pub fn holds(&self) -> bool {
        !self.asserted || self.failures == 0
    }
}

impl fmt::Display for ClaimReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let kind = if self.asserted { "claim" } else { "probe" };
        write!(
            f,
            "{kind} {} samples={} failures={} counterexample={}",
            self.name,
            self.samples,
            self.failures,
            self.counterexample.as_deref().unwrap_or("none")
        )
    }
}

fn show(xs: &[Rational]) -> String {
    let parts: Vec<String> = xs.iter().map(ToString::to_string).collect();
    format!("({})", parts.join(","))
}

fn show_rows(rows: &[Vec<Rational>]) -> String {
    let parts: Vec<String> = rows.iter().map(|r| show(r)).collect();
    format!("[{}]", parts.join(" "))
}

/// Applies `op` to each column of `rows`.
fn image(op: SortedAvgOp, rows: &[Vec<Rational>]) -> Vec<Rational> {
    let width = rows.first().map_or(0, Vec::len);
    (0..width)
        .map(|c| {
            let column: Vec<Rational> = rows.iter().map(|r| r[c].clone()).collect();
            t_apply(op, &column).expect("one row per argument")
        })
        .collect()
}

/// `t(x,..,y at i,..,x) = x` for every position `i`.
pub fn check_nu(op: SortedAvgOp, samples: usize, seed: u64) -> ClaimReport {
    let mut s = Sampler::new(seed);
    let mut report = ClaimReport::new(format!("nu_{}", op.name()));
    for _ in 0..samples {
        let (x, y) = (s.rational(), s.rational());
        let ok = (0..op.n).all(|i| {
            let mut args = vec![x.clone(); op.n];
            args[i] = y.clone();
            t_apply(op, &args).expect("arity") == x
        });
        report.record(ok, || show(&[x.clone(), y.clone()]));
    }
    report
}

/// Invariance under random permutations, and idempotence.
pub fn check_symmetric(op: SortedAvgOp, samples: usize, seed: u64) -> ClaimReport {
    let mut s = Sampler::new(seed);
    let mut report = ClaimReport::new(format!("symmetric_{}", op.name()));
    for _ in 0..samples {
        let xs = s.rationals(op.n);
        let mut ys = xs.clone();
        ys.shuffle(s.rng());
        let c = s.rational();
        let ok = t_apply(op, &xs).expect("arity") == t_apply(op, &ys).expect("arity")
            && t_apply(op, &vec![c.clone(); op.n]).expect("arity") == c;
        report.record(ok, || show(&xs));
    }
    report
}

fn strict_count(x: &[Rational], y: &[Rational]) -> usize {
    x.iter().zip(y).filter(|(a, b)| a < b).count()
}

/// Sorting both of `x <= y` keeps the order and does not lose strict
/// coordinates. Pairs violating `x <= y` are outside the lemma.
fn sorting_lemma_holds(x: &[Rational], y: &[Rational]) -> bool {
    let (mut xs, mut ys) = (x.to_vec(), y.to_vec());
    xs.sort();
    ys.sort();
    xs.iter().zip(&ys).all(|(a, b)| a <= b) && strict_count(&xs, &ys) >= strict_count(x, y)
}

/// Every pair `x <= y` over `{0..bound-1}^k` for `k <= 4`, then `samples`
/// random rational pairs.
pub fn check_sorted_merge_lemma(bound: usize, samples: usize, seed: u64) -> ClaimReport {
    let mut report = ClaimReport::new(format!("sorted_merge_lemma_b{bound}"));
    for k in 1..=4 {
        for x in crate::algebra::all_tuples(bound, k) {
            for y in crate::algebra::all_tuples(bound, k) {
                if x.iter().zip(&y).any(|(a, b)| a > b) {
                    continue;
                }
                let q = |v: &[u16]| -> Vec<Rational> {
                    v.iter().map(|&a| rational(a as i64, 1)).collect()
                };
                let (x, y) = (q(&x), q(&y));
                report.record(sorting_lemma_holds(&x, &y), || {
                    format!("{} {}", show(&x), show(&y))
                });
            }
        }
    }
    let mut s = Sampler::new(seed);
    for _ in 0..samples {
        let k = s.rng().gen_range(1..=8);
        let x = s.rationals(k);
        let y: Vec<Rational> = x.iter().map(|a| a + s.nonnegative(0.5)).collect();
        report.record(sorting_lemma_holds(&x, &y), || {
            format!("{} {}", show(&x), show(&y))
        });
    }
    report
}

/// `x <= y` gives `t^A(x) <= t^A(y)`, strictly when at least three
/// coordinates are strict.
pub fn check_monotone(n: usize, samples: usize, seed: u64) -> Result<ClaimReport> {
    let op = SortedAvgOp::new(Family::A, n)?;
    let mut s = Sampler::new(seed);
    let mut report = ClaimReport::new(format!("monotone_{}", op.name()));
    for _ in 0..samples {
        let p_zero = [0.3, 0.6, 0.9][s.rng().gen_range(0..3)];
        let x = s.rationals(n);
        let y: Vec<Rational> = x.iter().map(|a| a + s.nonnegative(p_zero)).collect();
        let (tx, ty) = (t_apply(op, &x)?, t_apply(op, &y)?);
        let ok = tx <= ty && (strict_count(&x, &y) < 3 || tx < ty);
        report.record(ok, || format!("{} {}", show(&x), show(&y)));
    }
    Ok(report)
}

/// `U` is closed under `t^A_n` applied coordinatewise.
pub fn check_u_claim(n: usize, samples: usize, seed: u64) -> Result<ClaimReport> {
    let op = SortedAvgOp::new(Family::A, n)?;
    let mut s = Sampler::new(seed);
    let mut report = ClaimReport::new(format!("u_closed_n{n}"));
    for _ in 0..samples {
        let rows: Vec<Vec<Rational>> = (0..n)
            .map(|_| {
                let a = s.rational();
                vec![a.clone(), Rational::one() - a]
            })
            .collect();
        let out = image(op, &rows);
        report.record(in_u(&out[0], &out[1]), || show_rows(&rows));
    }
    Ok(report)
}

fn v_rows(s: &mut Sampler, m: usize, n: usize) -> Vec<Vec<Rational>> {
    let p_zero = [0.5, 0.8, 1.0][s.rng().gen_range(0..3)];
    (0..n).map(|_| s.v_member(m, p_zero)).collect()
}

/// `V_m` is closed under `t^B_n` when `2m < n`.
pub fn check_v_claim(m: usize, n: usize, samples: usize, seed: u64) -> Result<ClaimReport> {
    let op = SortedAvgOp::new(Family::B, n)?;
    if m == 0 || 2 * m >= n {
        return Err(Error::InvalidParameter(format!(
            "the V claim needs 1 <= m and 2m < n, got m = {m}, n = {n}"
        )));
    }
    let mut s = Sampler::new(seed);
    let mut report = ClaimReport::new(format!("v_closed_m{m}_n{n}"));
    for _ in 0..samples {
        let rows = v_rows(&mut s, m, n);
        report.record(in_v(&image(op, &rows)), || show_rows(&rows));
    }
    Ok(report)
}

/// Looks for matrices with rows in `V_m` whose `t^B_n` image leaves `V_m`,
/// for any `m` and `n`. Starts with the matrix whose nonzero positions each
/// repeat at most twice.
pub fn probe_v_boundary(m: usize, n: usize, samples: usize, seed: u64) -> Result<ClaimReport> {
    let op = SortedAvgOp::new(Family::B, n)?;
    if m == 0 {
        return Err(Error::InvalidParameter("m must be at least 1".into()));
    }
    let mut report = ClaimReport::probe(format!("v_boundary_m{m}_n{n}"));
    let paired: Vec<Vec<Rational>> = (0..n)
        .map(|j| {
            let mut row = vec![Rational::zero(); m];
            row[(j / 2) % m] = Rational::one();
            row
        })
        .collect();
    report.record(in_v(&image(op, &paired)), || show_rows(&paired));
    let mut s = Sampler::new(seed);
    for _ in 0..samples {
        let rows = v_rows(&mut s, m, n);
        report.record(in_v(&image(op, &rows)), || show_rows(&rows));
    }
    Ok(report)
}

/// `W_m` is closed under `t^A_n` on the first two coordinates together with
/// `t^B_n` on the last `m`.
pub fn check_w_claim(m: usize, n: usize, samples: usize, seed: u64) -> Result<ClaimReport> {
    let a = SortedAvgOp::new(Family::A, n)?;
    let b = SortedAvgOp::new(Family::B, n)?;
    if m == 0 {
        return Err(Error::InvalidParameter("m must be at least 1".into()));
    }
    let mut s = Sampler::new(seed);
    let mut report = ClaimReport::new(format!("w_closed_m{m}_n{n}"));
    for _ in 0..samples {
        // Vary how many rows lie in the strict part so both cases occur.
        let p_strict = [0.1, 0.3, 0.6, 0.9][s.rng().gen_range(0..4)];
        let rows: Vec<Vec<Rational>> = (0..n)
            .map(|_| {
                let (a1, a2, bs) = s.w_member(m, p_strict);
                let mut row = vec![a1, a2];
                row.extend(bs);
                row
            })
            .collect();
        let firsts: Vec<Vec<Rational>> = rows.iter().map(|r| r[..2].to_vec()).collect();
        let lasts: Vec<Vec<Rational>> = rows.iter().map(|r| r[2..].to_vec()).collect();
        let head = image(a, &firsts);
        let tail = image(b, &lasts);
        report.record(in_w(&head[0], &head[1], &tail), || show_rows(&rows));
    }
    Ok(report)
}

/// Each link of the deduction for one tuple: membership in `U` forces
/// `a1 + a2 = 1`, then membership in `W_m` forces `b = 0`, and `b = 0` is
/// not in `V_m`. Returns whether every link holds and the tuple is not in
/// all three sets.
fn deduction_holds(a1: &Rational, a2: &Rational, b: &[Rational]) -> bool {
    let u = in_u(a1, a2);
    let sum_is_one = a1 + a2 == Rational::one();
    let w = in_w(a1, a2, b);
    let b_zero = b.iter().all(Zero::is_zero);
    let v = in_v(b);
    let links = (!u || sum_is_one) && (!(sum_is_one && w) || b_zero) && (!b_zero || !v);
    links && !(u && v && w)
}

/// No tuple `(a1, a2, b)` has `(a1, a2)` in `U`, `b` in `V_m` and the whole
/// in `W_m`. Checks the deduction on a representative of every case of the
/// sign of `a1 + a2 - 1` and the shape of `b`.
pub fn decide_no_combined_tuple(m: usize) -> Result<bool> {
    if m == 0 {
        return Err(Error::InvalidParameter("m must be at least 1".into()));
    }
    let zero = vec![Rational::zero(); m];
    let unit = |x: i64| {
        let mut b = zero.clone();
        b[m - 1] = rational(x, 1);
        b
    };
    let shapes = [zero.clone(), unit(1), unit(-1), vec![Rational::one(); m]];
    for delta in [rational(-1, 2), Rational::zero(), rational(1, 2)] {
        let a1 = rational(1, 3);
        let a2 = Rational::one() - &a1 + delta;
        for b in &shapes {
            if !deduction_holds(&a1, &a2, b) {
                return Ok(false);
            }
        }
    }
    Ok(true)
}

/// The deduction on random tuples, half of them with `(a1, a2)` in `U` and
/// half with `b` in `V_m`.
pub fn sample_combined_tuples(m: usize, samples: usize, seed: u64) -> Result<ClaimReport> {
    if m == 0 {
        return Err(Error::InvalidParameter("m must be at least 1".into()));
    }
    let mut s = Sampler::new(seed);
    let mut report = ClaimReport::new(format!("no_combined_tuple_m{m}"));
    for _ in 0..samples {
        let a1 = s.rational();
        let a2 = if s.rng().gen_bool(0.5) {
            Rational::one() - &a1
        } else {
            s.rational()
        };
        let b = match s.rng().gen_range(0..3) {
            0 => vec![Rational::zero(); m],
            1 => s.v_member(m, 0.5),
            _ => s.rationals(m),
        };
        report.record(deduction_holds(&a1, &a2, &b), || {
            let mut all = vec![a1.clone(), a2.clone()];
            all.extend(b.iter().cloned());
            show(&all)
        });
    }
    Ok(report)
}

/// The four displayed minors of `s` that equal minors of `t`, and the
/// idempotence of `s`.
fn minors_hold(
    s: &dyn Fn(&[Rational; 4]) -> Rational,
    t: &dyn Fn(&[Rational]) -> Rational,
    x: &Rational,
    y: &Rational,
    z: &Rational,
) -> bool {
    let c = |v: &Rational| v.clone();
    s(&[c(x), c(y), c(z), c(z)]) == t(&[c(x), c(y), c(z), c(z), c(z), c(z)])
        && s(&[c(x), c(x), c(y), c(z)]) == t(&[c(x), c(x), c(y), c(z), c(z), c(z)])
        && s(&[c(z), c(z), c(y), c(x)]) == t(&[c(x), c(x), c(x), c(y), c(z), c(z)])
        && s(&[c(z), c(y), c(x), c(x)]) == t(&[c(x), c(x), c(x), c(x), c(y), c(z)])
        && s(&[c(x), c(x), c(x), c(x)]) == *x
}

/// The displayed minor equalities for `t^A_6`, for `t^B_6`, and for the
/// product operation on pairs.
pub fn check_displayed_jonsson_minors(samples: usize, seed: u64) -> Vec<ClaimReport> {
    let mut reports = Vec::new();
    for family in [Family::A, Family::B] {
        let op = SortedAvgOp { family, n: 6 };
        let s = |xs: &[Rational; 4]| s_minor(family, xs);
        let t = |xs: &[Rational]| t_apply(op, xs).expect("arity 6");
        let mut sampler = Sampler::new(seed);
        let mut report = ClaimReport::new(format!("jonsson_minors_{}", family.name()));
        for _ in 0..samples {
            let (x, y, z) = (sampler.rational(), sampler.rational(), sampler.rational());
            report.record(minors_hold(&s, &t, &x, &y, &z), || {
                show(&[x.clone(), y.clone(), z.clone()])
            });
        }
        reports.push(report);
    }

    // Pairs are encoded as two rationals; the product operations act on
    // each component with its own family.
    let mut sampler = Sampler::new(seed ^ 0x5eed);
    let mut report = ClaimReport::new("jonsson_minors_AxB");
    for _ in 0..samples {
        let pts: Vec<(Rational, Rational)> = (0..3)
            .map(|_| (sampler.rational(), sampler.rational()))
            .collect();
        let ok = [Family::A, Family::B]
            .into_iter()
            .enumerate()
            .all(|(c, family)| {
                let pick =
                    |p: &(Rational, Rational)| if c == 0 { p.0.clone() } else { p.1.clone() };
                let op = SortedAvgOp { family, n: 6 };
                minors_hold(
                    &|xs| s_minor(family, xs),
                    &|xs| t_apply(op, xs).expect("arity 6"),
                    &pick(&pts[0]),
                    &pick(&pts[1]),
                    &pick(&pts[2]),
                )
            });
        report.record(ok, || {
            let flat: Vec<Rational> = pts
                .iter()
                .flat_map(|(a, b)| [a.clone(), b.clone()])
                .collect();
            show(&flat)
        });
    }
    reports.push(report);
    reports
}

/// `V_m` is closed under `s^B` for every `m`, including `2m >= 6`.
pub fn check_v_closure_for_s(samples: usize, seed: u64) -> ClaimReport {
    let mut s = Sampler::new(seed);
    let mut report = ClaimReport::new("v_closed_under_sB");
    for _ in 0..samples {
        let m = s.rng().gen_range(1..=6);
        let rows = v_rows(&mut s, m, 4);
        let out: Vec<Rational> = (0..m)
            .map(|c| {
                let args = [0, 1, 2, 3].map(|r| rows[r][c].clone());
                s_minor(Family::B, &args)
            })
            .collect();
        report.record(in_v(&out), || show_rows(&rows));
    }
    report
}

/// Sample sizes and seed for the whole suite.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct SuiteConfig {
    pub seed: u64,
    /// Instances per claim.
    pub samples: usize,
    /// Instances for the sorting lemma and monotonicity.
    pub dense_samples: usize,
    /// Entries range over `0..lemma_bound` in the exhaustive lemma check.
    pub lemma_bound: usize,
}

impl SuiteConfig {
    pub fn new(seed: u64) -> SuiteConfig {
        SuiteConfig {
            seed,
            samples: 1_000,
            dense_samples: 10_000,
            lemma_bound: 3,
        }
    }
}

/// Every claim, in a fixed order. Each claim draws from its own seed
/// derived from the suite seed.
pub fn run_suite(config: &SuiteConfig) -> Result<Vec<ClaimReport>> {
    let (n, dense) = (config.samples, config.dense_samples);
    let mut index = 0u64;
    let mut seed = || {
        index += 1;
        config
            .seed
            .wrapping_mul(0x9e37_79b9_7f4a_7c15)
            .wrapping_add(index)
    };
    let mut out = Vec::new();
    for (family, arity) in [
        (Family::A, 5),
        (Family::B, 5),
        (Family::A, 6),
        (Family::B, 6),
    ] {
        out.push(check_nu(SortedAvgOp::new(family, arity)?, n, seed()));
    }
    for (family, arity) in [
        (Family::A, 5),
        (Family::B, 5),
        (Family::A, 6),
        (Family::B, 6),
    ] {
        out.push(check_symmetric(SortedAvgOp::new(family, arity)?, n, seed()));
    }
    out.push(check_sorted_merge_lemma(config.lemma_bound, dense, seed()));
    for arity in [5, 6] {
        out.push(check_monotone(arity, dense, seed())?);
    }
    for arity in [5, 6] {
        out.push(check_u_claim(arity, n, seed())?);
    }
    for (m, arity) in [(1, 5), (2, 5), (2, 6)] {
        out.push(check_v_claim(m, arity, n, seed())?);
    }
    for (m, arity) in [(1, 5), (2, 5), (3, 6)] {
        out.push(check_w_claim(m, arity, n, seed())?);
    }
    for m in 1..=3 {
        let mut report = ClaimReport::new(format!("no_combined_tuple_cases_m{m}"));
        report.record(decide_no_combined_tuple(m)?, || format!("m={m}"));
        out.push(report);
        out.push(sample_combined_tuples(m, dense, seed())?);
    }
    out.extend(check_displayed_jonsson_minors(n, seed()));
    out.push(check_v_closure_for_s(n, seed()));
    for (m, arity) in [(3, 5), (3, 6), (4, 6)] {
        out.push(probe_v_boundary(m, arity, n, seed())?);
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn rs(xs: &[i64]) -> Vec<Rational> {
        xs.iter().map(|&x| rational(x, 1)).collect()
    }

    #[test]
    fn lemma_examples() {
        assert!(sorting_lemma_holds(&rs(&[0, 0]), &rs(&[1, 0])));
        assert!(sorting_lemma_holds(&rs(&[3, 1, 2]), &rs(&[3, 1, 2])));
        assert_eq!(strict_count(&rs(&[0, 0]), &rs(&[0, 1])), 1);
    }

    #[test]
    fn three_strict_coordinates_give_strict_growth() {
        let a5 = SortedAvgOp::new(Family::A, 5).unwrap();
        let x = rs(&[0, 0, 0, 0, 0]);
        let y = rs(&[1, 1, 1, 0, 0]);
        assert_eq!(t_apply(a5, &x).unwrap(), rational(0, 1));
        assert_eq!(t_apply(a5, &y).unwrap(), rational(2, 3));
        let one_strict = rs(&[1, 0, 0, 0, 0]);
        assert_eq!(t_apply(a5, &one_strict).unwrap(), rational(0, 1));
    }

    #[test]
    fn the_v_claim_checks_its_hypothesis() {
        assert!(check_v_claim(3, 6, 1, 0).is_err());
        assert!(check_v_claim(2, 5, 50, 0).unwrap().holds());
    }

    #[test]
    fn paired_rows_leave_v_beyond_the_hypothesis() {
        let report = probe_v_boundary(3, 6, 0, 0).unwrap();
        assert_eq!((report.samples, report.failures), (1, 1));
        assert!(report.holds());
    }

    #[test]
    fn the_combined_tuple_never_exists() {
        for m in 1..=3 {
            assert!(decide_no_combined_tuple(m).unwrap());
        }
        assert!(decide_no_combined_tuple(0).is_err());
    }

    #[test]
    fn report_lines_are_stable() {
        let mut r = ClaimReport::new("x");
        r.record(true, String::new);
        r.record(false, || "(1,2)".into());
        r.record(false, || "(3,4)".into());
        assert_eq!(
            r.to_string(),
            "claim x samples=3 failures=2 counterexample=(1,2)"
        );
        assert!(!r.holds());
    }

    #[test]
    fn small_suite_holds() {
        let config = SuiteConfig {
            seed: 11,
            samples: 30,
            dense_samples: 30,
            lemma_bound: 2,
        };
        for report in run_suite(&config).unwrap() {
            assert!(report.holds(), "{report}");
        }
    }
}
