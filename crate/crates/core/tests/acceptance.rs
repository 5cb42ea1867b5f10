mod common;

use std::time::{Duration, Instant};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use sdterms::algebras;
use sdterms::counterexamples::{run_suite, SuiteConfig};
use sdterms::maltsev::{
    build_condition, construct_grid_from_bracket, solve_condition, validate_bracket,
    verify_solution, BracketShape, SchemaName, SolveBudget, SolveOutcome,
};
use sdterms::semiring::{
    cert_context, compose_certificates, derive_decrease_certificate, extract_sums, grid_equations,
    grow_certificate, replay, verify_certificate, Polynomial,
};
use sdterms::{generate_closure, Budget};

type Outcome = Result<String, String>;

fn ensure(cond: bool, msg: impl FnOnce() -> String) -> Result<(), String> {
    if cond {
        Ok(())
    } else {
        Err(msg())
    }
}

fn within(start: Instant, limit: Duration, what: &str) -> Result<(), String> {
    let took = start.elapsed();
    ensure(took < limit, || {
        format!("{what} took {took:?}, limit {limit:?}")
    })
}

fn solve(
    algebra: &sdterms::FiniteAlgebra,
    name: SchemaName,
    params: &[usize],
) -> Result<SolveOutcome, String> {
    let schema = build_condition(name, params).map_err(|e| e.to_string())?;
    solve_condition(algebra, &schema, SolveBudget::default()).map_err(|e| e.to_string())
}

fn module_failure() -> Outcome {
    let z2 = algebras::z2_affine();
    for m1 in 1..=3 {
        for m2 in 1..=3 {
            let start = Instant::now();
            let out = solve(&z2, SchemaName::M1PlusM2, &[m1, m2])?;
            ensure(out.is_unsat(), || format!("({m1}+{m2}) gave {out:?}"))?;
            within(start, Duration::from_secs(60), &format!("({m1}+{m2})"))?;
        }
    }
    Ok("all (m1+m2) with m1, m2 <= 3 unsat on Z2".into())
}

fn semilattice_positive() -> Outcome {
    let start = Instant::now();
    let a = algebras::meet_semilattice();
    let cases: [(SchemaName, &[usize]); 6] = [
        (SchemaName::M1PlusM2, &[3, 3]),
        (SchemaName::Wnu, &[3]),
        (SchemaName::Wnu, &[4]),
        (SchemaName::GluedWnu, &[]),
        (SchemaName::Siggers, &[]),
        (SchemaName::WeakestIdempotent, &[]),
    ];
    for (name, params) in cases {
        let schema = build_condition(name, params).map_err(|e| e.to_string())?;
        let out =
            solve_condition(&a, &schema, SolveBudget::default()).map_err(|e| e.to_string())?;
        let w = out
            .witness()
            .ok_or_else(|| format!("{} gave {out:?}", schema.name))?;
        let ok = verify_solution(&a, &schema, w).map_err(|e| e.to_string())?;
        ensure(ok, || {
            format!("witness for {} fails verification", schema.name)
        })?;
    }
    within(start, Duration::from_secs(10), "semilattice schemas")?;
    Ok(format!(
        "6 schemas sat and verified in {:?}",
        start.elapsed()
    ))
}

fn projection_unsat() -> Outcome {
    let start = Instant::now();
    let out = solve(&algebras::left_projection(), SchemaName::M1PlusM2, &[2, 2])?;
    ensure(out.is_unsat(), || format!("gave {out:?}"))?;
    within(start, Duration::from_secs(1), "projection (2+2)")?;
    Ok(format!("(2+2) unsat in {:?}", start.elapsed()))
}

fn semiring_example() -> Outcome {
    let err = |e: sdterms::Error| e.to_string();
    let eqs = grid_equations(2, 1).map_err(err)?;
    let c12 = derive_decrease_certificate(2, 1).map_err(err)?;
    ensure(
        c12.left == Polynomial::one() && c12.right == Polynomial::constant(2),
        || "endpoints of the (2,1) certificate are not 1 and 2".into(),
    )?;
    ensure(verify_certificate(&c12, &eqs).map_err(err)?, || {
        "1 ~ 2 does not verify".into()
    })?;
    let c23 = grow_certificate(2, 1).map_err(err)?;
    ensure(
        c23.left == Polynomial::constant(2) && c23.right == Polynomial::constant(3),
        || "endpoints of the grow certificate are not 2 and 3".into(),
    )?;
    ensure(verify_certificate(&c23, &eqs).map_err(err)?, || {
        "2 ~ 3 does not verify".into()
    })?;
    let c13 = compose_certificates(&c12, &c23, &eqs).map_err(err)?;
    ensure(
        c13.left == Polynomial::one() && c13.right == Polynomial::constant(3),
        || "composed endpoints are not 1 and 3".into(),
    )?;
    ensure(verify_certificate(&c13, &eqs).map_err(err)?, || {
        "1 ~ 3 does not verify".into()
    })?;
    let mut slowest = Duration::ZERO;
    for n in 2..=4 {
        for m in 1..=2 {
            let start = Instant::now();
            let cert = derive_decrease_certificate(n, m).map_err(err)?;
            let eqs = grid_equations(n, m).map_err(err)?;
            ensure(verify_certificate(&cert, &eqs).map_err(err)?, || {
                format!("derivation ({n},{m}) does not verify")
            })?;
            ensure(
                cert.left == Polynomial::constant(n - 1) && cert.right == Polynomial::constant(n),
                || format!("derivation ({n},{m}) has wrong endpoints"),
            )?;
            within(
                start,
                Duration::from_secs(60),
                &format!("derivation ({n},{m})"),
            )?;
            slowest = slowest.max(start.elapsed());
        }
    }
    Ok(format!(
        "1~2, 2~3, 1~3 verified; derivations n<=4, m<=2 verified, slowest {slowest:?}"
    ))
}

fn diamond_and_context() -> Outcome {
    let sets = common::equation_sets();
    let mut rng = ChaCha8Rng::seed_from_u64(0x5eed);
    for i in 0..1000 {
        let eqs = &sets[i % sets.len()];
        let r = common::random_polynomial(&mut rng, 3, 3);
        let p_step = common::random_parallel_step(&mut rng, &r, eqs);
        let q_step = common::random_parallel_step(&mut rng, &r, eqs);
        let cert = common::diamond_certificate(&r, &p_step, &q_step, eqs);
        ensure(verify_certificate(&cert, eqs).unwrap_or(false), || {
            format!("diamond instance {i} fails")
        })?;
    }
    for i in 0..1000 {
        let eqs = &sets[i % sets.len()];
        let r = common::random_polynomial(&mut rng, 2, 2);
        let c1 = common::random_rooted_certificate(&mut rng, &r, eqs).flip();
        let c2 = common::random_rooted_certificate(&mut rng, &r, eqs);
        let c = compose_certificates(&c1, &c2, eqs).map_err(|e| format!("compose {i}: {e}"))?;
        ensure(
            c.left == c1.left
                && c.right == c2.right
                && verify_certificate(&c, eqs).unwrap_or(false),
            || format!("compose instance {i} fails"),
        )?;
    }
    for i in 0..1000 {
        let eqs = &sets[i % sets.len()];
        let r = common::random_polynomial(&mut rng, 2, 2);
        let cert = common::random_rooted_certificate(&mut rng, &r, eqs);
        let l = common::random_polynomial(&mut rng, 2, 2);
        let rt = common::random_polynomial(&mut rng, 2, 2);
        let a = if rng.gen_bool(0.5) {
            Polynomial::zero()
        } else {
            common::random_polynomial(&mut rng, 2, 2)
        };
        let c = cert_context(&cert, &l, &rt, &a, eqs).map_err(|e| format!("context {i}: {e}"))?;
        let ends = (
            l.mul(&cert.left).mul(&rt).add(&a),
            l.mul(&cert.right).mul(&rt).add(&a),
        );
        ensure(
            (c.left.clone(), c.right.clone()) == ends
                && verify_certificate(&c, eqs).unwrap_or(false),
            || format!("context instance {i} fails"),
        )?;
    }
    Ok("1000 instances each of diamond, compose, context verified".into())
}

fn closure_oracle() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(6);
    let mut instances = 0;
    for (name, algebra) in algebras::corpus() {
        let size = algebra.size();
        if size > 3 {
            continue;
        }
        for n in 1..=4 {
            for _ in 0..6 {
                let k = rng.gen_range(1..=3);
                let gens: Vec<Vec<sdterms::Element>> = (0..k)
                    .map(|_| {
                        (0..n)
                            .map(|_| rng.gen_range(0..size) as sdterms::Element)
                            .collect()
                    })
                    .collect();
                let state = generate_closure(&algebra, n, &gens, Budget::default())
                    .map_err(|e| e.to_string())?;
                let oracle = common::closure_oracle(&algebra, &gens);
                let got: std::collections::HashSet<Vec<sdterms::Element>> =
                    state.tuples().map(<[_]>::to_vec).collect();
                ensure(got == oracle && got.len() == state.len(), || {
                    format!("{name}: closure of {gens:?} differs from the oracle")
                })?;
                for t in state.tuples() {
                    let term = state.reconstruct_term(t).map_err(|e| e.to_string())?;
                    let value = algebra
                        .eval_term_on_tuples(&term, &gens)
                        .map_err(|e| e.to_string())?;
                    ensure(value == t, || {
                        format!("{name}: term for {t:?} gives {value:?}")
                    })?;
                }
                instances += 1;
            }
        }
    }
    Ok(format!(
        "{instances} closures match the oracle, all terms re-evaluate"
    ))
}

fn counterexample_suite() -> Outcome {
    let start = Instant::now();
    let reports = run_suite(&SuiteConfig::new(20_261_015)).map_err(|e| e.to_string())?;
    within(start, Duration::from_secs(60), "counterexample suite")?;
    for r in reports.iter().filter(|r| r.asserted) {
        ensure(r.failures == 0, || format!("{r}"))?;
    }
    let at_least = |prefix: &str, count: usize, samples: usize| -> Result<(), String> {
        let found: Vec<_> = reports
            .iter()
            .filter(|r| r.asserted && r.name.starts_with(prefix))
            .collect();
        ensure(found.len() >= count, || format!("missing {prefix} reports"))?;
        for r in found {
            ensure(r.samples >= samples, || format!("{r} has too few samples"))?;
        }
        Ok(())
    };
    at_least("nu_t", 4, 1000)?;
    // 1554 ordered pairs on {0,1,2}^k for k <= 4, then random pairs.
    at_least("sorted_merge_lemma", 1, 10_000 + 1554)?;
    at_least("monotone_t", 2, 10_000)?;
    at_least("u_closed", 2, 1000)?;
    at_least("v_closed_m", 3, 1000)?;
    at_least("w_closed", 3, 1000)?;
    at_least("no_combined_tuple_cases_m", 3, 1)?;
    at_least("jonsson_minors_", 3, 1000)?;
    Ok(format!(
        "{} asserted claims hold in {:?}",
        reports.iter().filter(|r| r.asserted).count(),
        start.elapsed()
    ))
}

fn bracket_to_grid() -> Outcome {
    let a = algebras::lattice2();
    let grid = build_condition(SchemaName::Grid, &[2, 3]).map_err(|e| e.to_string())?;
    let mut shapes = 0;
    for phi in common::tuples(5, 4) {
        let phi: Vec<usize> = phi.iter().map(|&x| x as usize).collect();
        if validate_bracket(&phi).is_err() {
            continue;
        }
        let out = solve(&a, SchemaName::Bracket, &phi)?;
        let w = out
            .witness()
            .ok_or_else(|| format!("bracket {phi:?} gave {out:?}"))?;
        let shape = BracketShape::new(phi.clone()).map_err(|e| e.to_string())?;
        let g = construct_grid_from_bracket(&a, w, &shape).map_err(|e| e.to_string())?;
        ensure(
            verify_solution(&a, &grid, &g).map_err(|e| e.to_string())?,
            || format!("grid terms from {phi:?} fail verification"),
        )?;
        shapes += 1;
    }
    ensure(shapes > 0, || "no valid bracket shape for n = 2".into())?;
    Ok(format!(
        "{shapes} bracket shapes give verified 2x3x3 grid terms"
    ))
}

fn end_to_end_decrease() -> Outcome {
    let err = |e: sdterms::Error| e.to_string();
    let eqs = grid_equations(2, 1).map_err(err)?;
    let cert = derive_decrease_certificate(2, 1).map_err(err)?;
    let sums = extract_sums(&cert, &eqs).map_err(err)?;
    for (parts, steps) in [(&sums.x, &sums.x_steps), (&sums.y, &sums.y_steps)] {
        for (p, s) in parts.iter().zip(steps) {
            let got = replay(&Polynomial::one(), s, &eqs).map_err(err)?;
            ensure(got == *p, || "a part does not replay from 1".into())?;
        }
        let total = parts.iter().fold(Polynomial::zero(), |acc, p| acc.add(p));
        ensure(total == cert.common, || {
            "parts do not add up to the common expansion".into()
        })?;
    }
    ensure(sums.x.len() == 1 && sums.y.len() == 2, || {
        "expected one x part and two y parts".into()
    })?;
    Ok(format!(
        "1 x part and 2 y parts replay from 1 and sum to {} summands",
        cert.common.len()
    ))
}

fn main() {
    let criteria: [(&str, fn() -> Outcome); 9] = [
        ("module failure of (m1+m2)-terms", module_failure),
        ("semilattice positive schemas", semilattice_positive),
        ("projection algebra (2+2) unsat", projection_unsat),
        ("semiring worked example", semiring_example),
        ("diamond, compose and context laws", diamond_and_context),
        ("closure oracle equivalence", closure_oracle),
        ("counterexample suite", counterexample_suite),
        ("bracket to grid construction", bracket_to_grid),
        ("end-to-end decrease at (2,1)", end_to_end_decrease),
    ];
    let mut failed = Vec::new();
    for (i, (name, run)) in criteria.iter().enumerate() {
        let start = Instant::now();
        match run() {
            Ok(detail) => println!("PASS {} {name}: {detail} ({:?})", i + 1, start.elapsed()),
            Err(why) => {
                println!("FAIL {} {name}: {why}", i + 1);
                failed.push(i + 1);
            }
        }
    }
    if !failed.is_empty() {
        eprintln!("failed criteria: {failed:?}");
        std::process::exit(1);
    }
}
