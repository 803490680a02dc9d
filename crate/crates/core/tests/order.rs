mod common;

use std::collections::BTreeMap;

use common::*;
use num_bigint::BigInt;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use termwpo::order::{choose_shapes, ConcreteOrder, Encoder, OrderParams, PRESET_NAMES};
use termwpo::smt::{Assignment, CheckResult, Expr, SolverConfig, SolverSession, Value};
use termwpo::trs::{parse_trs, Symbol, Term};

fn encoder(preset: &str, sig: &[Symbol]) -> Encoder {
    let p = OrderParams::preset(preset).unwrap();
    Encoder::new(&p, sig.iter().cloned(), &BTreeMap::new()).unwrap()
}

fn all_hold(enc: &Encoder, env: &Assignment) -> bool {
    enc.constraints().iter().all(|c| c.eval_bool(env).unwrap())
}

#[test]
fn path_order_instance_agrees_with_reference_lpo() {
    let sig = signature();
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    let mut positive = 0;
    for _ in 0..300 {
        let rank = random_rank(&mut rng, &sig);
        let (s, t) = random_pair(&mut rng, &sig);
        let mut enc = encoder("LPO-mono", &sig);
        let pins = pin_path_order(&enc, &rank);
        let env = assignment(&enc, &overrides(&pins));
        assert!(all_hold(&enc, &env));
        let expected = lpo(&s, &t, &rank);
        positive += usize::from(expected);
        let got = enc.gt(&s, &t).unwrap().eval_bool(&env).unwrap();
        assert_eq!(got, expected, "{s} > {t}");
        let concrete = ConcreteOrder::decode(&enc, &env).unwrap();
        assert_eq!(concrete.gt(&s, &t).unwrap(), expected, "{s} > {t}");
    }
    assert!(positive > 30 && positive < 270, "{positive}");
}

#[test]
fn weight_instance_agrees_with_reference_kbo() {
    let sig = signature();
    let mut rng = ChaCha8Rng::seed_from_u64(12);
    let mut positive = 0;
    for _ in 0..300 {
        let kp = random_kbo(&mut rng, &sig);
        let (s, t) = random_pair(&mut rng, &sig);
        let mut enc = encoder("KBO", &sig);
        let mut pins = pin_path_order(&enc, &kp.rank);
        pins.push((enc.variable_weight().unwrap().clone(), Value::Int(kp.w0.into())));
        for (f, tf) in enc.templates() {
            pins.push((tf.w[0].clone(), Value::Int(kp.weight[f].into())));
        }
        let env = assignment(&enc, &overrides(&pins));
        assert!(all_hold(&enc, &env));
        let expected = kbo(&s, &t, &kp);
        positive += usize::from(expected);
        let got = enc.gt(&s, &t).unwrap().eval_bool(&env).unwrap();
        assert_eq!(got, expected, "{s} > {t}");
        let concrete = ConcreteOrder::decode(&enc, &env).unwrap();
        assert_eq!(concrete.gt(&s, &t).unwrap(), expected, "{s} > {t}");
    }
    assert!(positive > 30 && positive < 270, "{positive}");
}

fn poly_value(t: &Term, ord: &ConcreteOrder, env: &BTreeMap<String, i64>) -> BigInt {
    match t {
        Term::Var(x) => env[x.name()].into(),
        Term::App(f, args) => {
            let s = &ord.symbols[f];
            let mut v = s.w[0].clone();
            for (c, a) in s.c.iter().zip(args) {
                v += &c[0][0] * poly_value(a, ord, env);
            }
            v
        }
    }
}

/// Linear `P > Q` over the naturals holds iff it holds at the origin and
/// far out along every axis.
fn linear_gt(s: &Term, t: &Term, ord: &ConcreteOrder) -> bool {
    let mut points = vec![BTreeMap::from([("x".to_string(), 0), ("y".to_string(), 0)])];
    for x in ["x", "y"] {
        let mut p = points[0].clone();
        p.insert(x.to_string(), 10_000);
        points.push(p);
    }
    points.iter().all(|p| poly_value(s, ord, p) > poly_value(t, ord, p))
}

#[test]
fn polynomial_instance_agrees_with_evaluation() {
    let sig = signature();
    let mut rng = ChaCha8Rng::seed_from_u64(13);
    let mut positive = 0;
    for _ in 0..300 {
        let (s, t) = random_pair(&mut rng, &sig);
        let mut enc = encoder("POLO-linear", &sig);
        let env: Assignment = enc
            .vars()
            .iter()
            .map(|(n, sort)| {
                let v = match sort {
                    termwpo::smt::Sort::Int => Value::Int(rng.gen_range(0..=4).into()),
                    termwpo::smt::Sort::Bool => Value::Bool(rng.gen_bool(0.4)),
                };
                (n.clone(), v)
            })
            .collect();
        assert!(all_hold(&enc, &env));
        let ord = ConcreteOrder::decode(&enc, &env).unwrap();
        let expected = linear_gt(&s, &t, &ord);
        positive += usize::from(expected);
        let got = enc.gt(&s, &t).unwrap().eval_bool(&env).unwrap();
        assert_eq!(got, expected, "{s} > {t}\n{ord}");
        assert_eq!(ord.gt(&s, &t).unwrap(), expected);
    }
    assert!(positive > 30 && positive < 270, "{positive}");
}

fn solve(enc: &Encoder, goals: &[Expr]) -> Option<Assignment> {
    let mut session = SolverSession::start(SolverConfig::default()).unwrap();
    for c in enc.constraints().iter().chain(goals) {
        session.assert(c).unwrap();
    }
    match session.check_sat().unwrap() {
        CheckResult::Sat => Some(session.model(enc.vars()).unwrap()),
        CheckResult::Unsat => None,
        CheckResult::Unknown => panic!("solver gave up"),
    }
}

#[test]
fn solver_models_decode_to_agreeing_orders() {
    if !solver_available() {
        eprintln!("z3 not found, skipping");
        return;
    }
    let sig = signature();
    let mut rng = ChaCha8Rng::seed_from_u64(14);
    for preset in PRESET_NAMES {
        for _ in 0..4 {
            let (s, t) = random_pair(&mut rng, &sig);
            let mut enc = encoder(preset, &sig);
            let gt = enc.gt(&s, &t).unwrap();
            let ge = enc.ge(&t, &s).unwrap();
            for (goal, want) in [(gt.clone(), true), (Expr::not(gt), false)] {
                if let Some(model) = solve(&enc, &[goal, ge.clone()]) {
                    let ord = ConcreteOrder::decode(&enc, &model).unwrap();
                    assert_eq!(ord.gt(&s, &t).unwrap(), want, "{preset}: {s} > {t}\n{ord}");
                    assert!(ord.ge(&t, &s).unwrap(), "{preset}: {t} >= {s}\n{ord}");
                }
            }
        }
    }
}

#[test]
fn orients_ackermann_pairs() {
    if !solver_available() {
        return;
    }
    let r = parse_trs(
        "(VAR x y)(RULES ack(0,y) -> s(y) ack(s(x),0) -> ack(x,s(0)) \
         ack(s(x),s(y)) -> ack(x,ack(s(x),y)))",
    )
    .unwrap();
    let p = termwpo::dp::dependency_pairs(&r);
    let sig: Vec<Symbol> = r
        .signature()
        .into_iter()
        .chain(p.iter().flat_map(|q| q.lhs.symbols()))
        .collect();
    for preset in ["LPO-AF"] {
        let mut enc = encoder(preset, &sig);
        let mut goals = Vec::new();
        for rule in r.rules.iter().chain(&p) {
            goals.push(enc.ge(&rule.lhs, &rule.rhs).unwrap());
        }
        for q in &p {
            goals.push(enc.gt(&q.lhs, &q.rhs).unwrap());
        }
        let model = solve(&enc, &goals).unwrap_or_else(|| panic!("{preset} fails"));
        let ord = ConcreteOrder::decode(&enc, &model).unwrap();
        for q in &p {
            assert!(ord.gt(&q.lhs, &q.rhs).unwrap());
        }
        for rule in &r.rules {
            assert!(ord.ge(&rule.lhs, &rule.rhs).unwrap());
        }
    }
    // no polynomial interpretation handles it
    let mut enc = encoder("POLO-linear", &sig);
    let mut goals = Vec::new();
    for rule in &r.rules {
        goals.push(enc.ge(&rule.lhs, &rule.rhs).unwrap());
    }
    for q in &p {
        goals.push(enc.gt(&q.lhs, &q.rhs).unwrap());
    }
    assert!(solve(&enc, &goals).is_none());
}

#[test]
fn mixed_template_handles_duplication() {
    if !solver_available() {
        return;
    }
    // f#(s(x)) -> f#(d(x)) needs d(x) interpreted below s(x) while
    // d(x) -> g(x,x) duplicates.
    let r = parse_trs("(VAR x)(RULES d(x) -> g(x,x) g(x,x) -> x f(s(x)) -> f(d(x)))").unwrap();
    let p = termwpo::dp::dependency_pairs(&r);
    let shapes = choose_shapes(r.rules.iter().chain(&p));
    let sig: Vec<Symbol> = r
        .signature()
        .into_iter()
        .chain(p.iter().flat_map(|q| q.lhs.symbols().into_iter().chain(q.rhs.symbols())))
        .collect();
    let params = OrderParams::preset("MaxPOLO").unwrap();
    let mut enc = Encoder::new(&params, sig.iter().cloned(), &shapes).unwrap();
    let pair = p.iter().find(|q| q.rhs.root().unwrap().name() == "f#").unwrap();
    let mut goals = vec![enc.gt(&pair.lhs, &pair.rhs).unwrap()];
    for rule in &r.rules {
        goals.push(enc.ge(&rule.lhs, &rule.rhs).unwrap());
    }
    let model = solve(&enc, &goals).expect("max-polynomial orients it");
    let ord = ConcreteOrder::decode(&enc, &model).unwrap();
    assert!(ord.gt(&pair.lhs, &pair.rhs).unwrap());
}
