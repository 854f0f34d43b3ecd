//! Acceptance criteria, one line each, all in exact arithmetic.
//!
//! Runs as a plain binary (`harness = false`) so the report is always printed.

use std::collections::BTreeSet;
use std::process::ExitCode;
use std::time::{Duration, Instant};

use ctxlab::fraction::ncf;
use ctxlab::gen::{self, case_rng};
use ctxlab::json::{model_to_json, to_canonical_string};
use ctxlab::model::is_isomorphic;
use ctxlab::props::{check_normal_form, random_term, run_suite, PROP1_LAWS};
use ctxlab::protocols::mp_model;
use ctxlab::rational::ratio;
use ctxlab::simulate::{check_simulation, find_simulation, refute_by_fraction, Simulation};
use ctxlab::terms::{eval_closed, noncontextual_to_term, Env, TypingContext};
use ctxlab::{Assignment, EmpiricalModel, Error, Measurement, Outcome, Prob, Scenario};
use num_traits::{One, Zero};

const SEED: u64 = 20_240_601;

struct Verdict {
    pass: bool,
    detail: String,
}

fn verdict(pass: bool, detail: impl Into<String>) -> Verdict {
    Verdict { pass, detail: detail.into() }
}

#[derive(Default)]
struct Corpus {
    models: Vec<EmpiricalModel>,
    simulations: Vec<Simulation>,
}

fn timed(n: u8, limit: Duration, f: impl FnOnce() -> Result<Verdict, Error>) -> Verdict {
    eprintln!("running criterion {n}");
    let start = Instant::now();
    let v = f().unwrap_or_else(|e| verdict(false, format!("error: {e}")));
    let took = start.elapsed();
    if took > limit {
        return verdict(false, format!("{} (took {took:?}, limit {limit:?})", v.detail));
    }
    verdict(v.pass, format!("{} in {took:.2?}", v.detail))
}

fn bit(s: &str) -> Outcome {
    Outcome::label(s)
}

/// The PR table as described: correlated outcomes with probability 1/2 on
/// three contexts, anti-correlated on `{x2,y2}`.
fn pr_cell(x: &str, y: &str, a: &str, b: &str) -> Prob {
    let anti = x == "x2" && y == "y2";
    if (a == b) != anti {
        ratio(1, 2)
    } else {
        Prob::zero()
    }
}

fn criterion_1(corpus: &mut Corpus) -> Result<Verdict, Error> {
    let pr = gen::pr();
    for x in ["x1", "x2"] {
        for y in ["y1", "y2"] {
            let facet = [Measurement::base(x), Measurement::base(y)].into_iter().collect();
            let d = pr.marginal(&facet)?;
            for a in ["0", "1"] {
                for b in ["0", "1"] {
                    let s = Assignment::empty().with(Measurement::base(x), bit(a)).with(Measurement::base(y), bit(b));
                    if d.get(&s) != pr_cell(x, y, a, b) {
                        return Ok(verdict(false, format!("table cell {x}{y}={a}{b} differs")));
                    }
                }
            }
        }
    }
    let lp = ncf(&pr)?;
    // Brute force: a global assignment supports a noncontextual component
    // only if it avoids every zero cell.
    let mut hits = 0;
    for bits in 0..16u32 {
        let g: Assignment = ["x1", "x2", "y1", "y2"]
            .iter()
            .enumerate()
            .map(|(i, m)| (Measurement::base(m), bit(if bits >> i & 1 == 1 { "1" } else { "0" })))
            .collect();
        let zero_cell = [("x1", "y1"), ("x1", "y2"), ("x2", "y1"), ("x2", "y2")].iter().any(|(x, y)| {
            let a = g.get(&Measurement::base(x)).unwrap().to_string();
            let b = g.get(&Measurement::base(y)).unwrap().to_string();
            pr_cell(x, y, &a, &b).is_zero()
        });
        hits += zero_cell as usize;
    }
    corpus.models.push(pr);
    let cf = Prob::one() - &lp.optimum;
    Ok(verdict(
        lp.optimum.is_zero() && cf.is_one() && hits == 16,
        format!("NCF = {}, CF = {}, {hits}/16 global assignments hit a zero cell", lp.optimum, cf),
    ))
}

fn suite(name: &str, cases: u64, corpus: &mut Corpus) -> Result<(bool, usize, String), Error> {
    let r = run_suite(name, SEED, cases, None)?;
    let first = r.failures.first().map_or(String::new(), |f| format!("; first failure (case {}): {}", f.case, f.detail));
    corpus.models.extend(r.corpus);
    corpus.simulations.extend(r.simulations);
    Ok((r.failures.is_empty(), r.checks, first))
}

fn criterion_2(corpus: &mut Corpus) -> Result<Verdict, Error> {
    let cases = 100;
    let (ok, checks, first) = suite("prop1-monotonicity", cases, corpus)?;
    let want = PROP1_LAWS * cases as usize;
    Ok(verdict(ok && checks == want, format!("{checks} law checks ({want} expected) over {cases} models{first}")))
}

fn criterion_3(corpus: &mut Corpus) -> Result<Verdict, Error> {
    let cases = 20;
    let (ok, checks, first) = suite("eq-soundness", cases, corpus)?;
    Ok(verdict(ok && checks == 28 * cases as usize, format!("{checks} instantiations over 28 rules{first}")))
}

fn criterion_4(corpus: &mut Corpus) -> Result<Verdict, Error> {
    let mut bad = Vec::new();
    let n = 100;
    for case in 0..n {
        let mut rng = case_rng(SEED ^ 4, case);
        let d = gen::random_model(&mut rng, 4);
        let ctx = TypingContext::new().with("v", d.scenario().clone())?;
        let t = random_term(&mut rng, &ctx, Some("v"), 12)?;
        if t.size() > 12 {
            bad.push(format!("{t}: size {}", t.size()));
            continue;
        }
        let env: Env = [("v".to_string(), d.clone())].into_iter().collect();
        if let Some(problem) = check_normal_form(&ctx, &env, &t)? {
            bad.push(problem);
        }
        corpus.models.push(ctxlab::terms::eval(&t, &env)?);
        corpus.models.push(d);
    }
    Ok(verdict(bad.is_empty(), format!("{n} terms normalized, {} problems{}", bad.len(), bad.first().map_or(String::new(), |b| format!(": {b}")))))
}

fn criterion_5(corpus: &mut Corpus) -> Result<Verdict, Error> {
    let n = 100;
    let mut bad = Vec::new();
    let empty = TypingContext::new();
    for case in 0..n {
        let mut rng = case_rng(SEED ^ 5, case);
        let t = random_term(&mut rng, &empty, None, 12)?;
        let e = eval_closed(&t)?;
        if !ncf(&e)?.optimum.is_one() {
            bad.push(format!("closed term {t} is contextual"));
        }
        corpus.models.push(e);
        let s = gen::random_scenario(&mut rng, 4);
        let e = gen::random_noncontextual(&mut rng, &s);
        let back = eval_closed(&noncontextual_to_term(&e)?)?;
        if is_isomorphic(&e, &back).is_none() {
            bad.push("noncontextual model does not round-trip".to_string());
        }
        corpus.models.push(e);
    }
    Ok(verdict(bad.is_empty(), format!("{n} closed terms and {n} noncontextual models, {} problems", bad.len())))
}

fn criterion_6(corpus: &mut Corpus) -> Result<Verdict, Error> {
    let cases = 10;
    let (ok, checks, first) = suite("comonad-laws", cases, corpus)?;
    let grid = ctxlab::props::small_scenarios().len() * 2;
    Ok(verdict(
        ok && checks == grid * cases as usize,
        format!("{checks} law checks: {} scenarios × depths 1,2 × {cases} pairs{first}", grid / 2),
    ))
}

fn criterion_7(corpus: &Corpus) -> Result<Verdict, Error> {
    let mut seen = BTreeSet::new();
    let mut checked = [0usize; 2];
    let mut bad = Vec::new();
    for e in &corpus.models {
        if !seen.insert(to_canonical_string(&model_to_json(e))) {
            continue;
        }
        let depths: &[usize] = if e.scenario().measurements().len() <= 4 { &[1, 2] } else { &[1] };
        for &k in depths {
            let report = mp_model(e, k)?.validate_model();
            checked[k - 1] += 1;
            if !report.is_valid() {
                bad.push(format!("depth {k}: {}", report.into_result().unwrap_err()));
            }
        }
    }
    Ok(verdict(
        bad.is_empty(),
        format!("{} distinct models: {} at depth 1, {} at depth 2, {} invalid", seen.len(), checked[0], checked[1], bad.len()),
    ))
}

fn criterion_8(corpus: &mut Corpus) -> Result<Verdict, Error> {
    let cases = 50;
    let (ok, checks, first) = suite("thm2-roundtrip", cases, corpus)?;
    Ok(verdict(ok && checks == 4 * cases as usize, format!("{cases} (term, model) pairs, {checks} checks{first}")))
}

fn criterion_9(corpus: &mut Corpus) -> Result<Verdict, Error> {
    let pr = gen::pr();
    let mut refuted = 0;
    let n = 50;
    for case in 0..n {
        let mut rng = case_rng(SEED ^ 9, case);
        let s = if case % 2 == 0 { Scenario::pr() } else { gen::random_scenario(&mut rng, 4) };
        let d = gen::random_noncontextual(&mut rng, &s);
        refuted += refute_by_fraction(&d, &pr)? as usize;
    }
    let flipped = ctxlab::terms::eval(&ctxlab::terms::parse("v/[x1:{0>1,1>0}]")?, &[("v".to_string(), pr.clone())].into_iter().collect())?;
    for (d, e) in [(EmpiricalModel::singleton_model(), EmpiricalModel::singleton_model()), (pr.clone(), flipped)] {
        if let Some(sim) = find_simulation(&d, &e, 1, 2)?.found() {
            corpus.simulations.push(sim.clone());
        }
    }
    let mut monotone = 0;
    let mut unverified = 0;
    for sim in &corpus.simulations {
        if !check_simulation(sim)?.is_verified() {
            unverified += 1;
            continue;
        }
        monotone += (ncf(&sim.source)?.optimum <= ncf(&sim.target)?.optimum) as usize;
    }
    let total = corpus.simulations.len();
    Ok(verdict(
        refuted == n as usize && monotone == total && unverified == 0,
        format!("{refuted}/{n} noncontextual sources refuted against PR; NCF monotone on {monotone}/{total} verified simulations"),
    ))
}

fn criterion_10(corpus: &mut Corpus) -> Result<Verdict, Error> {
    let cases = 20;
    let before = corpus.simulations.len();
    let (ok, checks, first) = suite("nocloning-easy", cases, corpus)?;
    let built = corpus.simulations.len() - before;
    Ok(verdict(ok && built == cases as usize, format!("{built} verified simulations e ⇝ e⊗e ({checks} checks){first}")))
}

fn main() -> ExitCode {
    let mut corpus = Corpus::default();
    let min = |m: u64| Duration::from_secs(60 * m);
    let mut results = vec![
        (1, "PR contextual fraction", timed(1, Duration::from_secs(1), || criterion_1(&mut corpus))),
        (2, "monotonicity laws", timed(2, min(5), || criterion_2(&mut corpus))),
        (3, "equation soundness", timed(3, min(10), || criterion_3(&mut corpus))),
        (4, "normal form", timed(4, min(5), || criterion_4(&mut corpus))),
        (5, "closed terms and noncontextual models", timed(5, min(2), || criterion_5(&mut corpus))),
        (6, "comonad laws", timed(6, min(10), || criterion_6(&mut corpus))),
    ];
    results.push((7, "protocol models are no-signalling", timed(7, Duration::MAX, || criterion_7(&corpus))));
    results.push((8, "terms compile to simulations", timed(8, min(10), || criterion_8(&mut corpus))));
    results.push((10, "cloning noncontextual models", timed(10, Duration::MAX, || criterion_10(&mut corpus))));
    results.push((9, "refutation and monotonicity", timed(9, Duration::MAX, || criterion_9(&mut corpus))));
    results.sort_by_key(|r| r.0);
    let mut all = true;
    for (n, name, v) in &results {
        all &= v.pass;
        println!("criterion {n:>2} {}: {name}: {}", if v.pass { "PASS" } else { "FAIL" }, v.detail);
    }
    if all {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
