mod common;

use common::{random_process, KINDS};
use koalg::choice::{Choice, ChoiceKind};
use koalg::process::{cascade, feedback, map_input, map_states, product, product_all, sum, Process, Transition};
use koalg::space::Space;
use koalg::value::Value;
use koalg::Error;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

fn pairs(p: &Process) -> Vec<(Value, Value)> {
    let ss = p.states().elements().unwrap();
    let is = p.inputs().elements().unwrap();
    ss.iter().flat_map(|s| is.iter().map(move |i| (s.clone(), i.clone()))).collect()
}

/// Echoes its input as output, forever.
fn echo(inputs: Space, kind: ChoiceKind) -> Process {
    Process::new(Space::atoms("{*}", &["*"]), inputs.clone(), inputs, Space::empty(), kind, move |_, i| {
        Ok(Choice::point(kind, Transition::cont(Value::atom("*"), i.clone())))
    })
    .unwrap()
}

#[test]
fn sum_dispatches_on_the_state_tag() {
    let mut rng = ChaCha8Rng::seed_from_u64(61);
    for kind in KINDS {
        for _ in 0..20 {
            let (a, _) = random_process(&mut rng, kind);
            let (mut b, _) = random_process(&mut rng, kind);
            while !b.inputs().same_as(a.inputs()) {
                b = random_process(&mut rng, kind).0;
            }
            let s = sum(&a, &b).unwrap();
            for (tag, p) in [("L", &a), ("R", &b)] {
                for (st, i) in pairs(p) {
                    let got = s.step(&Value::tagged(tag, st.clone()), &i).unwrap();
                    let want = p.step(&st, &i).unwrap().map(|t| match t {
                        Transition::Result(r) => Transition::Result(Value::tagged(tag, r.clone())),
                        Transition::Continue { state, output } => {
                            Transition::cont(Value::tagged(tag, state.clone()), Value::tagged(tag, output.clone()))
                        }
                    });
                    assert!(got.approx_eq(&want, 1e-12));
                }
            }
        }
    }
}

#[test]
fn product_of_distributions_is_independent() {
    let mut rng = ChaCha8Rng::seed_from_u64(62);
    for _ in 0..30 {
        let (a, _) = random_process(&mut rng, ChoiceKind::Prob);
        let (b, _) = random_process(&mut rng, ChoiceKind::Prob);
        let p = product(&a, &b).unwrap();
        for (s0, i0) in pairs(&a) {
            for (s1, i1) in pairs(&b) {
                let joint = p.step(&Value::pair(s0.clone(), s1.clone()), &Value::pair(i0.clone(), i1.clone())).unwrap();
                assert!((joint.total_mass() - 1.0).abs() <= 1e-9);
                let (ca, cb) = (a.step(&s0, &i0).unwrap(), b.step(&s1, &i1).unwrap());
                for (x, px) in ca.weighted() {
                    for (y, py) in cb.weighted() {
                        if let (
                            Transition::Continue { state: t0, output: o0 },
                            Transition::Continue { state: t1, output: o1 },
                        ) = (x, y)
                        {
                            let key = Transition::cont(
                                Value::pair(t0.clone(), t1.clone()),
                                Value::pair(o0.clone(), o1.clone()),
                            );
                            assert!((joint.probability(&key) - px * py).abs() <= 1e-12);
                        }
                    }
                }
            }
        }
    }
}

#[test]
fn product_all_agrees_with_binary_product_on_continuations() {
    let mut rng = ChaCha8Rng::seed_from_u64(63);
    for kind in KINDS {
        for _ in 0..10 {
            let (a, _) = random_process(&mut rng, kind);
            let (b, _) = random_process(&mut rng, kind);
            let flat = product_all(&[a.clone(), b.clone()]).unwrap();
            let nested = product(&a, &b).unwrap();
            for (s0, i0) in pairs(&a) {
                for (s1, i1) in pairs(&b) {
                    let f = flat
                        .step(&Value::Tuple(vec![s0.clone(), s1.clone()]), &Value::Tuple(vec![i0.clone(), i1.clone()]))
                        .unwrap();
                    let n = nested.step(&Value::pair(s0.clone(), s1.clone()), &Value::pair(i0.clone(), i1.clone())).unwrap();
                    // Value::pair is a 2-tuple, so the continuing parts coincide
                    let ends = |t: &Transition| matches!(t, Transition::Result(_));
                    let fm: f64 = f.weighted().iter().filter(|(t, _)| ends(t)).map(|(_, p)| p).sum();
                    let nm: f64 = n.weighted().iter().filter(|(t, _)| ends(t)).map(|(_, p)| p).sum();
                    if kind == ChoiceKind::Prob {
                        assert!((fm - nm).abs() <= 1e-12);
                    }
                    for (t, p) in n.weighted() {
                        if !ends(t) {
                            assert!(f.contains(t));
                            if kind == ChoiceKind::Prob {
                                assert!((f.probability(t) - p).abs() <= 1e-12);
                            }
                        }
                    }
                }
            }
        }
    }
}

#[test]
fn cascading_into_an_echo_changes_nothing_observable() {
    let mut rng = ChaCha8Rng::seed_from_u64(64);
    for kind in KINDS {
        for _ in 0..20 {
            let (a, _) = random_process(&mut rng, kind);
            let c = cascade(&a, &echo(a.outputs().clone(), ChoiceKind::Det)).unwrap();
            for (s, i) in pairs(&a) {
                let got = c.step(&Value::pair(s.clone(), Value::atom("*")), &i).unwrap();
                let want = a.step(&s, &i).unwrap().map(|t| match t {
                    Transition::Result(r) => Transition::Result(Value::tagged("L", r.clone())),
                    Transition::Continue { state, output } => {
                        Transition::cont(Value::pair(state.clone(), Value::atom("*")), output.clone())
                    }
                });
                assert!(got.approx_eq(&want, 1e-12));
            }
        }
    }
}

#[test]
fn feedback_accumulates() {
    // output the running total of inputs; the total is read back from the last output
    let counts = Space::predicate("N", |v| v.as_int().is_some_and(|n| n >= 0));
    let inputs = Space::product(vec![Space::finite("{0,1,2}", (0..3).map(Value::int)), counts.clone()]);
    let adder = Process::unchecked(Space::atoms("{*}", &["*"]), inputs, counts, Space::empty(), ChoiceKind::Det, |_, i| {
        let [x, total] = i.as_tuple().unwrap() else { unreachable!() };
        Ok(Choice::det(Transition::cont(Value::atom("*"), Value::int(x.as_int().unwrap() + total.as_int().unwrap()))))
    });
    let looped = feedback(&adder).unwrap();
    let mut state = Value::pair(Value::atom("*"), Value::int(0));
    let mut last = 0;
    for x in [2, 1, 0, 2, 2] {
        let t = looped.step(&state, &Value::int(x)).unwrap().into_det().unwrap();
        let Transition::Continue { state: s, output } = t else { panic!() };
        last += x;
        assert_eq!(output, Value::int(last));
        state = s;
    }
}

#[test]
fn renaming_states_and_inputs_is_transparent() {
    let mut rng = ChaCha8Rng::seed_from_u64(65);
    for kind in KINDS {
        let (a, _) = random_process(&mut rng, kind);
        let boxed = map_states(
            &a,
            Space::any("boxed"),
            |s| Ok(s.as_tagged().unwrap().1.clone()),
            |s| Value::tagged("box", s.clone()),
        );
        let shifted = map_input(Space::any("shifted"), |i| Value::int(i.as_int().unwrap() - 10), &a);
        for (s, i) in pairs(&a) {
            let direct = a.step(&s, &i).unwrap();
            let via = boxed.step(&Value::tagged("box", s.clone()), &i).unwrap();
            assert_eq!(direct.len(), via.len());
            let again = shifted.step(&s, &Value::int(i.as_int().unwrap() + 10)).unwrap();
            assert!(again.approx_eq(&direct, 0.0));
        }
    }
}

#[test]
fn mixing_functors_is_refused() {
    let mut rng = ChaCha8Rng::seed_from_u64(66);
    let (a, _) = random_process(&mut rng, ChoiceKind::NDet);
    let (b, _) = random_process(&mut rng, ChoiceKind::Prob);
    assert!(matches!(product(&a, &b), Err(Error::MixedChoice(..))));
    assert!(matches!(sum(&a, &b), Err(Error::KindMismatch(..))));
}

#[test]
fn construction_validates_steps() {
    let bad = Process::new(
        Space::atoms("{*}", &["*"]),
        Space::unit(),
        Space::atoms("{a}", &["a"]),
        Space::empty(),
        ChoiceKind::Det,
        |_, _| Ok(Choice::det(Transition::cont(Value::atom("*"), Value::atom("z")))),
    );
    assert!(matches!(bad, Err(Error::Validation(m)) if m.contains("output z")));
    let unnormalised = Process::new(
        Space::atoms("{*}", &["*"]),
        Space::unit(),
        Space::atoms("{a}", &["a"]),
        Space::empty(),
        ChoiceKind::Prob,
        |_, _| Ok(Choice::prob_unchecked([(Transition::cont(Value::atom("*"), Value::atom("a")), 0.5)])),
    );
    assert!(unnormalised.is_err());
}
