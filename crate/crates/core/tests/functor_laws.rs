mod common;

use std::collections::BTreeMap;

use common::{random_choice, random_choice_from, KINDS};
use koalg::choice::{distribute, flatten, pair, Choice, ChoiceKind, Sum};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

const ROUNDS: usize = 400;
const TOL: f64 = 1e-12;

fn f(x: &i64) -> i64 {
    x * x - 3
}

fn g(x: &i64) -> i64 {
    x.rem_euclid(4)
}

fn same<T: Ord + Clone>(a: &Choice<T>, b: &Choice<T>) -> bool {
    a.kind() == b.kind() && a.approx_eq(b, TOL)
}

/// Pushforward of a distribution, computed by hand.
fn pushforward(c: &Choice<i64>, h: impl Fn(&i64) -> i64) -> BTreeMap<i64, f64> {
    let mut out = BTreeMap::new();
    for (x, p) in c.weighted() {
        *out.entry(h(x)).or_insert(0.0) += p;
    }
    out
}

#[test]
fn map_identity_and_composition() {
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    let mut checked = 0;
    for _ in 0..ROUNDS {
        for kind in KINDS {
            let c = random_choice(&mut rng, kind);
            assert!(same(&c.map(|x| *x), &c));
            assert!(same(&c.map(|x| g(&f(x))), &c.map(f).map(g)));
            if kind == ChoiceKind::Prob {
                let by_hand = pushforward(&c, |x| g(&f(x)));
                let mapped = c.map(|x| g(&f(x)));
                for (y, p) in &by_hand {
                    assert!((mapped.probability(y) - p).abs() <= TOL);
                }
                assert!((mapped.total_mass() - 1.0).abs() <= 1e-9);
            }
            checked += 1;
        }
    }
    assert!(checked >= 1000);
}

#[test]
fn flatten_naturality() {
    let mut rng = ChaCha8Rng::seed_from_u64(12);
    let mut checked = 0;
    for _ in 0..ROUNDS {
        for kind in KINDS {
            let inner_kind = if kind == ChoiceKind::Det {
                KINDS[rng.random_range(0..3)]
            } else if rng.random_bool(0.5) {
                ChoiceKind::Det
            } else {
                kind
            };
            let pool: Vec<Choice<i64>> = (0..4).map(|_| random_choice(&mut rng, inner_kind)).collect();
            let outer = random_choice_from(&mut rng, kind, &pool);
            let lhs = flatten(outer.map(|c| c.map(f))).unwrap();
            let rhs = flatten(outer.clone()).unwrap().map(f);
            assert!(lhs.approx_eq(&rhs, TOL), "{outer:?}");
            checked += 1;
        }
    }
    assert!(checked >= 1000);
}

#[test]
fn prob_flatten_matches_total_probability() {
    let mut rng = ChaCha8Rng::seed_from_u64(13);
    for _ in 0..ROUNDS {
        let pool: Vec<Choice<i64>> = (0..4).map(|_| random_choice(&mut rng, ChoiceKind::Prob)).collect();
        let outer = random_choice_from(&mut rng, ChoiceKind::Prob, &pool);
        let mut by_hand: BTreeMap<i64, f64> = BTreeMap::new();
        for (inner, p) in outer.weighted() {
            for (x, q) in inner.weighted() {
                *by_hand.entry(*x).or_insert(0.0) += p * q;
            }
        }
        let flat = flatten(outer).unwrap();
        assert_eq!(flat.len(), by_hand.len());
        for (x, p) in by_hand {
            assert!((flat.probability(&x) - p).abs() <= TOL);
        }
    }
}

#[test]
fn distribute_naturality() {
    let mut rng = ChaCha8Rng::seed_from_u64(14);
    let mut checked = 0;
    for _ in 0..ROUNDS {
        for kind in KINDS {
            let x: Sum<i64, (i64, Choice<i64>)> = if rng.random_bool(0.3) {
                Sum::Left(rng.random_range(-3..3))
            } else {
                Sum::Right((rng.random_range(-3..3), random_choice(&mut rng, kind)))
            };
            // (g + g × C f) then distribute  ==  distribute then C(g + g × f)
            let moved = match &x {
                Sum::Left(a) => Sum::Left(g(a)),
                Sum::Right((b, c)) => Sum::Right((g(b), c.map(f))),
            };
            let lhs = distribute(kind, moved);
            let rhs = distribute(kind, x).map(|s| match s {
                Sum::Left(a) => Sum::Left(g(a)),
                Sum::Right((b, y)) => Sum::Right((g(b), f(y))),
            });
            assert!(lhs.approx_eq(&rhs, TOL));
            checked += 1;
        }
    }
    assert!(checked >= 1000);
}

#[test]
fn pair_naturality() {
    let mut rng = ChaCha8Rng::seed_from_u64(15);
    let mut checked = 0;
    for _ in 0..ROUNDS {
        for kind in KINDS {
            let other = if rng.random_bool(0.5) { ChoiceKind::Det } else { kind };
            let a = random_choice(&mut rng, kind);
            let b = random_choice(&mut rng, other);
            let lhs = pair(&a.map(f), &b.map(g)).unwrap();
            let rhs = pair(&a, &b).unwrap().map(|(x, y)| (f(x), g(y)));
            assert!(lhs.approx_eq(&rhs, TOL));
            if kind == ChoiceKind::Prob && other == ChoiceKind::Prob {
                for (x, p) in a.weighted() {
                    for (y, q) in b.weighted() {
                        let joint = pair(&a, &b).unwrap().probability(&(*x, *y));
                        assert!((joint - p * q).abs() <= TOL);
                    }
                }
            }
            checked += 1;
        }
    }
    assert!(checked >= 1000);
}

#[test]
fn mixing_ndet_with_prob_is_refused() {
    let mut rng = ChaCha8Rng::seed_from_u64(16);
    let a = random_choice(&mut rng, ChoiceKind::NDet);
    let b = random_choice(&mut rng, ChoiceKind::Prob);
    assert!(pair(&a, &b).is_err());
    assert!(flatten(Choice::ndet([b.clone()]).unwrap()).is_err());
}
