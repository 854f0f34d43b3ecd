//! Seeded randomized suites over the algebraic laws of every module.
//!
//! Each case draws from its own generator, [`case_rng`]`(seed, case)`, so a
//! failing case can be replayed alone.

use std::collections::BTreeMap;

use rand::seq::SliceRandom;
use rand::Rng;
use serde_json::{json, Value};

use crate::error::{Error, Result};
use crate::fraction::{cf, ncf};
use crate::gen::{
    case_rng, random_global, random_model, random_model_on, random_noncontextual, random_open_prob, random_scenario,
    MAX_DENOMINATOR,
};
use crate::json::model_to_json;
use crate::model::ops::{choice, coarse_grain, conditional, mix, pullback, tensor};
use crate::model::{is_isomorphic, DeterministicMorphism, EmpiricalModel, OutcomeFamily, OutcomeMap, VertexMap};
use crate::protocols::{check_laws, enumerate_protocols, protocols_compatible, MeasurementProtocol};
use crate::rational::{format as format_prob, Prob};
use crate::scenario::{Face, Measurement, Outcome, Scenario};
use crate::simulate::{check_simulation, cloning_simulation, extract_term, term_to_simulation, Simulation};
use crate::terms::{deterministic_term, eval, is_normal_form, normalize, parse, rule, typecheck, Env, Term, TypingContext};

/// Laws checked per case of `prop1-monotonicity`.
pub const PROP1_LAWS: usize = 6;

pub const SUITES: [&str; 5] = ["prop1-monotonicity", "eq-soundness", "comonad-laws", "thm2-roundtrip", "nocloning-easy"];

/// One counterexample: the case that produced it and the data to inspect.
#[derive(Clone, Debug)]
pub struct Failure {
    pub case: u64,
    pub detail: String,
    pub witness: Value,
}

#[derive(Clone, Debug)]
pub struct SuiteReport {
    pub suite: String,
    pub seed: u64,
    pub cases: u64,
    pub checks: usize,
    pub failures: Vec<Failure>,
    /// Every model the suite built, for downstream checks.
    pub corpus: Vec<EmpiricalModel>,
    /// Every simulation the suite verified.
    pub simulations: Vec<Simulation>,
}

impl SuiteReport {
    fn new(suite: &str, seed: u64, cases: u64) -> Self {
        SuiteReport {
            suite: suite.to_string(),
            seed,
            cases,
            checks: 0,
            failures: Vec::new(),
            corpus: Vec::new(),
            simulations: Vec::new(),
        }
    }

    pub fn passed(&self) -> bool {
        self.failures.is_empty()
    }

    fn check(&mut self, case: u64, ok: bool, detail: impl FnOnce() -> (String, Value)) {
        self.checks += 1;
        if !ok {
            let (detail, witness) = detail();
            self.failures.push(Failure { case, detail, witness });
        }
    }

    fn fail(&mut self, case: u64, e: &Error) {
        self.checks += 1;
        self.failures.push(Failure { case, detail: e.to_string(), witness: Value::Null });
    }

    pub fn to_json(&self) -> Value {
        let failures: Vec<Value> = self
            .failures
            .iter()
            .map(|f| json!({ "case": f.case, "detail": f.detail, "witness": f.witness }))
            .collect();
        json!({
            "suite": self.suite,
            "seed": self.seed,
            "cases": self.cases,
            "checks": self.checks,
            "passed": self.passed(),
            "failures": failures,
        })
    }
}

/// Runs `suite` on cases `0..cases`, or only on `only` when given.
pub fn run_suite(suite: &str, seed: u64, cases: u64, only: Option<u64>) -> Result<SuiteReport> {
    let case_fn: fn(&mut SuiteReport, u64, &mut rand_chacha::ChaCha8Rng) -> Result<()> = match suite {
        "prop1-monotonicity" => prop1_case,
        "eq-soundness" => eq_case,
        "comonad-laws" => comonad_case,
        "thm2-roundtrip" => roundtrip_case,
        "nocloning-easy" => nocloning_case,
        _ => return Err(Error::invalid(format!("unknown suite `{suite}`; known: {}", SUITES.join(", ")))),
    };
    let mut report = SuiteReport::new(suite, seed, cases);
    let range: Vec<u64> = match only {
        Some(c) => vec![c],
        None => (0..cases).collect(),
    };
    for case in range {
        let mut rng = case_rng(seed, case);
        if let Err(e) = case_fn(&mut report, case, &mut rng) {
            if matches!(e, Error::GuardExceeded { .. }) {
                return Err(e);
            }
            report.fail(case, &e);
        }
    }
    Ok(report)
}

fn models_json(ms: &[&EmpiricalModel]) -> Value {
    Value::Array(ms.iter().map(|m| model_to_json(m)).collect())
}

fn bit_labels() -> [Outcome; 2] {
    [Outcome::label("0"), Outcome::label("1")]
}

/// Fresh measurements `p0, …` sent to random measurements of `s`.
pub fn random_vertex_map(rng: &mut impl Rng, s: &Scenario) -> VertexMap {
    let xs: Vec<&Measurement> = s.measurements().iter().collect();
    let k = rng.gen_range(1..=xs.len().clamp(1, 3));
    (0..k)
        .map(|i| (Measurement::base(&format!("p{i}")), (*xs.choose(rng).expect("nonempty")).clone()))
        .collect()
}

/// Random maps into `{0,1}` on a nonempty random subset of measurements.
pub fn random_family(rng: &mut impl Rng, s: &Scenario) -> OutcomeFamily {
    let mut family = OutcomeFamily::new();
    let xs: Vec<&Measurement> = s.measurements().iter().collect();
    for (i, x) in xs.iter().enumerate() {
        if i + 1 < xs.len() && !rng.gen_bool(0.5) {
            continue;
        }
        let map: BTreeMap<Outcome, Outcome> = s
            .outcomes(x)
            .expect("measurement")
            .iter()
            .map(|o| (o.clone(), bit_labels().choose(rng).expect("two").clone()))
            .collect();
        family.insert((*x).clone(), OutcomeMap::from_map(map));
    }
    family
}

/// A random conditional `x?y` on `s` between measurements with at most
/// two outcomes, if there is one.
pub fn random_conditional(rng: &mut impl Rng, s: &Scenario) -> Option<(Measurement, BTreeMap<Outcome, Measurement>)> {
    let small = |m: &Measurement| s.outcomes(m).is_ok_and(|o| o.len() <= 2);
    let mut xs: Vec<&Measurement> = s.measurements().iter().filter(|m| small(m)).collect();
    xs.shuffle(rng);
    for x in xs {
        let nbrs: Vec<&Measurement> = s
            .facets()
            .iter()
            .filter(|c| c.contains(x))
            .flat_map(|c| c.iter())
            .filter(|y| *y != x && small(y))
            .collect();
        if nbrs.is_empty() {
            continue;
        }
        let branches = s
            .outcomes(x)
            .expect("measurement")
            .iter()
            .map(|o| (o.clone(), (*nbrs.choose(rng).expect("nonempty")).clone()))
            .collect();
        return Some((x.clone(), branches));
    }
    None
}

fn prop1_case(r: &mut SuiteReport, case: u64, rng: &mut rand_chacha::ChaCha8Rng) -> Result<()> {
    let e = random_model(rng, 4);
    let e2 = random_model_on(rng, e.scenario());
    let other = random_model(rng, 4);
    let (c1, c2) = (cf(&e)?, cf(&e2)?);
    let witness = || models_json(&[&e, &e2, &other]);

    let f = random_vertex_map(rng, e.scenario());
    let pulled = pullback(&e, &f, None)?;
    let cp = cf(&pulled)?;
    r.check(case, cp <= c1, || (format!("CF(f*e) = {} > CF(e) = {}", format_prob(&cp), format_prob(&c1)), witness()));

    let h = random_family(rng, e.scenario());
    let coarse = coarse_grain(&e, &h)?;
    let cc = cf(&coarse)?;
    r.check(case, cc <= c1, || (format!("CF(e/h) = {} > CF(e) = {}", format_prob(&cc), format_prob(&c1)), witness()));

    let lambda = random_open_prob(rng, MAX_DENOMINATOR);
    let mixed = mix(&e, &lambda, &e2)?;
    let cm = cf(&mixed)?;
    let bound = &lambda * &c1 + (Prob::from_integer(1.into()) - &lambda) * &c2;
    r.check(case, cm <= bound, || (format!("CF(e +_{} e') = {} exceeds the convex bound", format_prob(&lambda), format_prob(&cm)), witness()));

    let chosen = choice(&e, &other)?;
    let (cch, co) = (cf(&chosen)?, cf(&other)?);
    let max = if c1 > co { c1.clone() } else { co.clone() };
    r.check(case, cch == max, || (format!("CF(e&e') = {} is not the max {}", format_prob(&cch), format_prob(&max)), witness()));

    let tens = tensor(&e, &other)?;
    let (nt, n1, n2) = (ncf(&tens)?.optimum, ncf(&e)?.optimum, ncf(&other)?.optimum);
    r.check(case, nt == &n1 * &n2, || (format!("NCF(e⊗e') = {} differs from {}·{}", format_prob(&nt), format_prob(&n1), format_prob(&n2)), witness()));

    let base = match random_conditional(rng, e.scenario()) {
        Some(xy) => Some((e.clone(), xy)),
        None => {
            let on_pr = random_model_on(rng, &Scenario::pr());
            random_conditional(rng, on_pr.scenario()).map(|xy| (on_pr, xy))
        }
    };
    let (b, (x, y)) = base.expect("PR's scenario has conditionals");
    let (cb, (ce, _)) = (cf(&b)?, conditional(&b, &x, &y)?);
    let cx = cf(&ce)?;
    r.check(case, cx == cb, || (format!("CF(e[{x}?y]) = {} differs from CF(e) = {}", format_prob(&cx), format_prob(&cb)), models_json(&[&b])));
    r.corpus.extend([b, ce]);
    r.corpus.extend([e.clone(), e2.clone(), other.clone(), pulled, coarse, mixed, chosen, tens]);
    Ok(())
}

/// Left-hand sides per rule over `a, c` on PR's scenario and `b` on the
/// singleton; `{l}` and `{m}` become random weights in `(0,1)`, `{h}` a
/// random map `{0,1} → {0,1}` and `{p}` a random permutation of `{0,1}`.
pub const RULE_TEMPLATES: [&[&str]; 28] = [
    &["a & c", "a & b", "b & a"],
    &["a & (c & b)", "(a & b) & (c & b)"],
    &["a & z", "z & a"],
    &["a (x) c", "a (x) b", "b (x) a"],
    &["a (x) (c (x) b)", "b (x) (a (x) c)"],
    &["z (x) a", "a (x) z"],
    &["a +_1 c", "a +_1 a/[x1:{p}]"],
    &["a +_{l} a", "b +_{l} b"],
    &["a +_{l} c"],
    &["(a +_{l} c) +_{m} a", "(a +_{l} c) +_{m} (c +_{l} a)"],
    &["pull[p:q,r:s] pull[q:x1,s:y1] a", "pull[p:q] pull[q:x2] a"],
    &["(a/[x1:{p}])/[x1:{h}]", "(a/[x1:{p},y2:{h}])/[x1:{h}]"],
    &["pull[p:x1] (a/[x1:{h}])", "pull[p:x1,q:y1] (a/[y1:{h}])"],
    &["pull[p:x1,q:y1] (a +_{l} c)", "pull[p:x2] (a +_{l} c)"],
    &["(a +_{l} c)/[x1:{h}]", "(a +_{l} c)/[x1:{h},y1:{h}]"],
    &["(a +_{l} c) & (c +_{l} a)", "(a +_{l} c) & (b +_{l} b)"],
    &["(a +_{l} c) (x) b", "(a +_{l} c) (x) a"],
    &["(a +_{l} c)[x1?(0:y1,1:y2)]", "(a +_{l} c)[y2?(0:x2,1:x1)]"],
    &["a/[x1:{h}] & c/[y1:{h}]", "a/[x1:{h}] & b/[]"],
    &["a/[x1:{h}] (x) c/[y2:{h}]", "a/[y1:{h}] (x) b/[]"],
    &["pull[p:x1] a & pull[q:y1] c", "pull[p:x1,r:y1] a & pull[q:*] b"],
    &["pull[p:x1,r:y1] a (x) pull[q:x2] c", "pull[p:x2] a (x) pull[q:*] b"],
    &["a[x1?(0:y1,1:y2)][x2?(0:y1,1:y2)]", "a[y1?(0:x1,1:x2)][y2?(0:x2,1:x1)]"],
    &["(pull[p:x1,q:y1,r:y2] a)[p?(0:q,1:r)]", "(pull[p:y1,q:x1,r:x2] a)[p?(0:r,1:q)]"],
    &["(a/[x1:{p}])[x1?(0:y1,1:y2)]", "(a/[y1:{h}])[x1?(0:y1,1:y2)]"],
    &["a[x1?(0:y1,1:y2)] & c", "a[y1?(0:x2,1:x1)] & b"],
    &["a[x1?(0:y1,1:y2)] (x) c", "a[y1?(0:x2,1:x1)] (x) b"],
    &["a & c", "a & b"],
];

fn instantiate(template: &str, rng: &mut impl Rng) -> String {
    let mut out = template.to_string();
    for key in ["{l}", "{m}"] {
        out = out.replace(key, &format_prob(&random_open_prob(rng, MAX_DENOMINATOR)));
    }
    while let Some(i) = out.find("{h}") {
        let [a, b] = [0, 1].map(|_| ["0", "1"][rng.gen_range(0..2)]);
        out.replace_range(i..i + 3, &format!("{{0>{a},1>{b}}}"));
    }
    while let Some(i) = out.find("{p}") {
        let flip = if rng.gen_bool(0.5) { "{0>1,1>0}" } else { "{0>0,1>1}" };
        out.replace_range(i..i + 3, flip);
    }
    out
}

fn eq_case(r: &mut SuiteReport, case: u64, rng: &mut rand_chacha::ChaCha8Rng) -> Result<()> {
    let pr = Scenario::pr();
    for (i, templates) in RULE_TEMPLATES.iter().enumerate() {
        let n = i as u8 + 1;
        let env: Env = [
            ("a".to_string(), random_model_on(rng, &pr)),
            ("b".to_string(), EmpiricalModel::singleton_model()),
            ("c".to_string(), random_model_on(rng, &pr)),
        ]
        .into_iter()
        .collect();
        let ctx = TypingContext::from_env(&env);
        let src = instantiate(templates.choose(rng).expect("templates"), rng);
        let lhs = parse(&src)?;
        let witness = || json!({ "rule": n, "lhs": src, "a": model_to_json(&env["a"]), "c": model_to_json(&env["c"]) });
        let Some(rhs) = rule(n).apply(&ctx, &lhs) else {
            r.check(case, false, || (format!("rule {n} does not apply to `{src}`"), witness()));
            continue;
        };
        let (l, rv) = (eval(&lhs, &env)?, eval(&rhs, &env)?);
        let iso = is_isomorphic(&l, &rv).is_some();
        r.check(case, iso, || (format!("rule {n}: `{src}` and `{rhs}` evaluate to non-isomorphic models"), witness()));
        r.corpus.extend([l, rv]);
    }
    Ok(())
}

/// Every simplicial complex on at most three binary measurements, up to isomorphism.
pub fn small_scenarios() -> Vec<Scenario> {
    let f = |fs: &[&[&str]]| -> Scenario {
        let names: std::collections::BTreeSet<&str> = fs.iter().flat_map(|c| c.iter().copied()).collect();
        let binary: std::collections::BTreeSet<Outcome> = bit_labels().into_iter().collect();
        Scenario::new(
            names.iter().map(|n| (Measurement::base(n), binary.clone())).collect(),
            fs.iter().map(|c| c.iter().map(|n| Measurement::base(n)).collect::<Face>()),
        )
        .expect("small scenario")
    };
    vec![
        Scenario::zero(),
        f(&[&["a"]]),
        f(&[&["a"], &["b"]]),
        f(&[&["a", "b"]]),
        f(&[&["a"], &["b"], &["c"]]),
        f(&[&["a", "b"], &["c"]]),
        f(&[&["a", "b"], &["b", "c"]]),
        f(&[&["a", "b"], &["b", "c"], &["a", "c"]]),
        f(&[&["a", "b", "c"]]),
    ]
}

/// A random `MP(X) → X` with protocols of depth at most `depth`: measurements
/// are assigned in order, each to a random protocol that stays compatible
/// with its facet neighbours, and a random outcome map.
pub fn random_endomorphism(rng: &mut impl Rng, s: &Scenario, depth: usize) -> Result<DeterministicMorphism> {
    let protocols = enumerate_protocols(s, depth)?;
    let mut pi: BTreeMap<Measurement, Measurement> = BTreeMap::new();
    let mut h = BTreeMap::new();
    for (x, ox) in s.outcome_map() {
        let mut order: Vec<&MeasurementProtocol> = protocols.iter().collect();
        order.shuffle(rng);
        let mut picked = None;
        for q in order {
            let mut ok = true;
            for c in s.facets().iter().filter(|c| c.contains(x)) {
                let mut qs: Vec<&MeasurementProtocol> =
                    c.iter().filter_map(|y| pi.get(y)).map(|m| m.as_protocol().expect("protocol")).collect();
                qs.push(q);
                if !protocols_compatible(s, &qs)? {
                    ok = false;
                    break;
                }
            }
            if ok {
                picked = Some(q);
                break;
            }
        }
        let q = picked.ok_or_else(|| Error::domain("no compatible protocol"))?;
        let targets: Vec<&Outcome> = ox.iter().collect();
        let map = q
            .outcome_set()
            .into_iter()
            .map(|run| (run, (*targets.choose(rng).expect("outcomes")).clone()))
            .collect();
        pi.insert(x.clone(), Measurement::protocol(q.clone()));
        h.insert(x.clone(), OutcomeMap::new(map, ox.clone())?);
    }
    DeterministicMorphism::new(pi, h)
}

fn comonad_case(r: &mut SuiteReport, case: u64, rng: &mut rand_chacha::ChaCha8Rng) -> Result<()> {
    for s in small_scenarios() {
        for depth in 1..=2 {
            let m = random_endomorphism(rng, &s, depth)?;
            let n = random_endomorphism(rng, &s, depth)?;
            let report = check_laws(&s, depth, &m, &n)?;
            r.check(case, report.all_hold(), || {
                (
                    format!("depth {depth}: {}", report.detail.join("; ")),
                    json!({ "scenario": crate::json::scenario_to_json(&s), "m": format!("{:?}", m.pi), "n": format!("{:?}", n.pi) }),
                )
            });
        }
    }
    Ok(())
}

/// A random well-typed term of at most `max_size` nodes. `var` is used at
/// most once, with the scenario bound in `ctx`.
pub fn random_term(rng: &mut impl Rng, ctx: &TypingContext, var: Option<&str>, max_size: usize) -> Result<Term> {
    let mut var = var.map(str::to_string);
    let (t, _) = term_rec(rng, ctx, &mut var, max_size.max(1))?;
    Ok(t)
}

const MAX_TERM_MEASUREMENTS: usize = 8;

fn term_rec(rng: &mut impl Rng, ctx: &TypingContext, var: &mut Option<String>, budget: usize) -> Result<(Term, Scenario)> {
    let typed = |t: Term| -> Result<(Term, Scenario)> {
        let s = typecheck(ctx, &t)?;
        Ok((t, s))
    };
    if budget <= 1 || rng.gen_bool(0.2) {
        if var.is_some() && rng.gen_bool(0.7) {
            let v = var.take().expect("checked");
            return typed(Term::var(&v));
        }
        return typed(if rng.gen_bool(0.7) { Term::One } else { Term::Zero });
    }
    match rng.gen_range(0..6) {
        0 => {
            let (b, s) = term_rec(rng, ctx, var, budget - 1)?;
            if s.measurements().is_empty() {
                return Ok((b, s));
            }
            let f = random_vertex_map(rng, &s);
            typed(Term::pullback(f, None, b))
        }
        1 => {
            let (b, s) = term_rec(rng, ctx, var, budget - 1)?;
            if s.measurements().is_empty() {
                return Ok((b, s));
            }
            let h = random_family(rng, &s);
            typed(Term::coarse(b, h))
        }
        2 if budget > 4 => {
            let (b, s) = term_rec(rng, ctx, var, budget - 4)?;
            let g = random_global(rng, &s);
            let other = deterministic_term(&s, &g)?;
            let lambda = random_open_prob(rng, MAX_DENOMINATOR);
            if rng.gen_bool(0.5) {
                typed(Term::mix(b, lambda, other))
            } else {
                typed(Term::mix(other, lambda, b))
            }
        }
        3 | 4 if budget > 2 => {
            let left = rng.gen_range(1..budget - 1);
            let (a, sa) = term_rec(rng, ctx, var, left)?;
            let (b, sb) = term_rec(rng, ctx, var, budget - 1 - left)?;
            if sa.measurements().len() + sb.measurements().len() > MAX_TERM_MEASUREMENTS {
                return Ok((a, sa));
            }
            let t = if rng.gen_bool(0.5) { Term::tensor(a, b) } else { Term::choice(a, b) };
            typed(t)
        }
        _ => {
            let (b, s) = term_rec(rng, ctx, var, budget - 1)?;
            match random_conditional(rng, &s) {
                Some((x, y)) if s.measurements().len() < MAX_TERM_MEASUREMENTS => {
                    let t = Term::cond(b.clone(), x, y);
                    match typecheck(ctx, &t) {
                        Ok(s2) => Ok((t, s2)),
                        Err(_) => Ok((b, s)),
                    }
                }
                _ => Ok((b, s)),
            }
        }
    }
}

fn roundtrip_case(r: &mut SuiteReport, case: u64, rng: &mut rand_chacha::ChaCha8Rng) -> Result<()> {
    let d = random_model(rng, 4);
    let ctx = TypingContext::new().with("v", d.scenario().clone())?;
    let t = random_term(rng, &ctx, Some("v"), 10)?;
    let env: Env = [("v".to_string(), d.clone())].into_iter().collect();
    let witness = || json!({ "term": t.to_string(), "model": model_to_json(&d) });
    let sim = term_to_simulation(&t, "v", &d)?;
    let report = check_simulation(&sim)?;
    r.check(case, report.is_verified(), || (format!("`{t}`: {report}"), witness()));
    let value = eval(&t, &env)?;
    let iso = is_isomorphic(&sim.target, &value).is_some();
    r.check(case, iso, || (format!("`{t}`: target is not isomorphic to the value"), witness()));
    let back = eval(&extract_term(&sim)?, &env)?;
    r.check(case, back == sim.target, || (format!("`{t}`: extracted term evaluates differently"), witness()));
    let (nd, nt) = (ncf(&d)?.optimum, ncf(&sim.target)?.optimum);
    r.check(case, nd <= nt, || (format!("`{t}`: NCF(d) = {} > NCF(e) = {}", format_prob(&nd), format_prob(&nt)), witness()));
    r.corpus.extend([d.clone(), value]);
    if report.is_verified() {
        r.simulations.push(sim);
    }
    Ok(())
}

fn nocloning_case(r: &mut SuiteReport, case: u64, rng: &mut rand_chacha::ChaCha8Rng) -> Result<()> {
    let s = random_scenario(rng, 3);
    let e = random_noncontextual(rng, &s);
    let sim = cloning_simulation(&e)?;
    let report = check_simulation(&sim)?;
    r.check(case, report.is_verified(), || (format!("e ⇝ e⊗e: {report}"), models_json(&[&e])));
    r.corpus.push(e);
    if report.is_verified() {
        r.simulations.push(sim);
    }
    Ok(())
}

/// Checks that `normalize` terminates with a normal form that evaluates to
/// an isomorphic model; returns a description of the first problem.
pub fn check_normal_form(ctx: &TypingContext, env: &Env, t: &Term) -> Result<Option<String>> {
    let n = normalize(ctx, t)?;
    if !is_normal_form(&n) {
        return Ok(Some(format!("`{n}` is not in normal form")));
    }
    let (a, b) = (eval(t, env)?, eval(&n, env)?);
    if is_isomorphic(&a, &b).is_none() {
        return Ok(Some(format!("`{t}` and its normal form `{n}` differ")));
    }
    Ok(None)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn every_suite_passes_a_few_cases() {
        for suite in SUITES {
            let cases = if suite == "comonad-laws" { 1 } else { 3 };
            let report = run_suite(suite, 11, cases, None).unwrap();
            assert!(report.passed(), "{}", report.to_json());
            assert!(report.checks > 0);
        }
    }

    #[test]
    fn unknown_suites_are_rejected() {
        assert!(run_suite("nope", 0, 1, None).is_err());
    }

    #[test]
    fn replaying_a_case_matches_the_batch() {
        let all = run_suite("thm2-roundtrip", 5, 3, None).unwrap();
        let one = run_suite("thm2-roundtrip", 5, 3, Some(2)).unwrap();
        assert_eq!(one.corpus.last(), all.corpus.last());
    }

    #[test]
    fn random_terms_are_well_typed_and_small() {
        let d = crate::gen::pr();
        let ctx = TypingContext::new().with("v", d.scenario().clone()).unwrap();
        for case in 0..40 {
            let mut rng = case_rng(3, case);
            let t = random_term(&mut rng, &ctx, Some("v"), 12).unwrap();
            assert!(t.size() <= 12, "{t}");
            typecheck(&ctx, &t).unwrap();
        }
    }

    #[test]
    fn templates_cover_every_rule() {
        let mut rng = case_rng(0, 0);
        for templates in RULE_TEMPLATES {
            for t in templates {
                parse(&instantiate(t, &mut rng)).unwrap();
            }
        }
    }

    #[test]
    fn random_endomorphisms_are_typed() {
        let mut rng = case_rng(1, 0);
        for s in small_scenarios() {
            let m = random_endomorphism(&mut rng, &s, 2).unwrap();
            assert!(crate::protocols::is_endomorphism(&s, &m).unwrap());
        }
    }
}
