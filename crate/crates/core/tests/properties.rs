use std::sync::Arc;

use arclosure::frames::{X, Y};
use arclosure::invert::{decide_abelian, fourier_symbol, Evidence, Status};
use arclosure::limits::{freeze, GroupTag, LimitOperator};
use arclosure::numverify::gaussian_ratio;
use arclosure::opalgebra::{commutator, DiffOp, Frame, VectorField, Word};
use arclosure::symexpr::poly::rat;
use arclosure::symexpr::{parse, Expr, Rational};
use proptest::prelude::*;

fn rational() -> impl Strategy<Value = Rational> {
    (-6i64..=6, 1i64..=4).prop_map(|(n, d)| rat(n, d))
}

/// Polynomial in `x, y` of degree at most two.
fn poly() -> impl Strategy<Value = Expr> {
    prop::collection::vec(rational(), 6).prop_map(|c| {
        let mono = ["1", "x", "y", "x^2", "x*y", "y^2"];
        c.iter()
            .zip(mono)
            .map(|(k, m)| Expr::constant(k.clone()) * parse(m).unwrap())
            .sum()
    })
}

fn atom() -> impl Strategy<Value = String> {
    prop_oneof![
        rational().prop_map(|a| format!("exp(({a})*x)")),
        rational().prop_map(|a| format!("1/(1 + ({a})^2*x^2)")),
        (1u32..6).prop_map(|k| format!("x^({k}/2)")),
        (1u32..4).prop_map(|k| format!("(x + {k})^3")),
        rational().prop_map(|a| format!("({a})*x*y")),
    ]
}

fn expr_text() -> impl Strategy<Value = String> {
    (atom(), prop::collection::vec((atom(), prop::bool::ANY), 0..3)).prop_map(|(first, rest)| {
        rest.into_iter().fold(first, |acc, (a, add)| {
            if add {
                format!("({acc}) + {a}")
            } else {
                format!("({acc})*({a})")
            }
        })
    })
}

fn field() -> impl Strategy<Value = VectorField> {
    (poly(), poly()).prop_map(|(a, b)| VectorField::new(&[X, Y], vec![a, b]))
}

fn frame() -> Arc<Frame> {
    Arc::new(Frame::coordinates(&[X, Y]))
}

fn op() -> impl Strategy<Value = DiffOp> {
    prop::collection::vec(poly(), 4).prop_map(|c| {
        let words: [&[u8]; 4] = [&[], &[0], &[1], &[0, 1]];
        DiffOp::from_terms(&frame(), words.iter().zip(c).map(|(w, c)| (Word(w.to_vec()), c)))
    })
}

/// `Z^2 + b Z + c`.
fn quadratic() -> impl Strategy<Value = LimitOperator> {
    (rational(), rational()).prop_map(|(b, c)| {
        LimitOperator::abelian(
            1,
            [
                (vec![2], Expr::one()),
                (vec![1], Expr::constant(b)),
                (vec![0], Expr::constant(c)),
            ],
        )
    })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn derivative_matches_difference_quotient(text in expr_text(), x in 0.2f64..1.5, y in -1.0f64..1.0) {
        let f = parse(&text).unwrap();
        let d = f.diff(X);
        let cf = f.compile(&[X, Y]).unwrap();
        let cd = d.compile(&[X, Y]).unwrap();
        let h = 1e-5;
        let fd = (cf.eval(&[x + h, y]) - cf.eval(&[x - h, y])) / (2.0 * h);
        let exact = cd.eval(&[x, y]);
        prop_assert!((fd - exact).abs() <= 1e-6 * exact.abs().max(1.0), "{text}: {exact} vs {fd}");
    }

    #[test]
    fn print_parse_round_trip(text in expr_text()) {
        let f = parse(&text).unwrap();
        prop_assert_eq!(parse(&f.to_string()).unwrap(), f);
    }

    #[test]
    fn binomial_expansion(p in poly(), q in poly()) {
        let lhs = (&p + &q).powi(2).unwrap();
        let rhs = &p * &p + Expr::int(2) * &p * &q + &q * &q;
        prop_assert!((lhs - rhs).is_zero());
    }

    #[test]
    fn composition_is_associative(a in op(), b in op(), c in op()) {
        let left = a.compose(&b).unwrap().compose(&c).unwrap();
        let right = a.compose(&b.compose(&c).unwrap()).unwrap();
        prop_assert_eq!(left, right);
    }

    #[test]
    fn jacobi_identity(u in field(), v in field(), w in field()) {
        let j = commutator(&u, &commutator(&v, &w))
            .add(&commutator(&v, &commutator(&w, &u)))
            .add(&commutator(&w, &commutator(&u, &v)));
        prop_assert!(j.is_zero());
    }

    #[test]
    fn freezing_is_linear(a in op(), b in op(), qx in rational(), qy in rational()) {
        let q = [qx, qy];
        let tag = GroupTag::Abelian(2);
        let sum = freeze(&a.add(&b).unwrap(), &q, tag, None).unwrap();
        let parts = freeze(&a, &q, tag, None).unwrap().add(&freeze(&b, &q, tag, None).unwrap()).unwrap();
        prop_assert_eq!(sum.terms, parts.terms);
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(50))]

    #[test]
    fn gaussians_never_undercut_the_symbol_bound(op in quadratic(), xi0 in -4.0f64..4.0, width in 1.0f64..200.0) {
        let sym = fourier_symbol(&op).unwrap();
        let v = decide_abelian(&sym);
        let ratio = gaussian_ratio(&sym, xi0, width);
        if let Evidence::SymbolInfimum { constant, .. } = v.evidence {
            prop_assert!(ratio >= constant - 1e-4, "{op}: {ratio} < {constant}");
        } else {
            prop_assert!(ratio >= 0.0);
        }
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(20))]

    #[test]
    fn exact_infimum_matches_grid(op in quadratic()) {
        let sym = fourier_symbol(&op).unwrap();
        let grid = (0..=120_000)
            .map(|k| sym.modulus_at(&[-6.0 + k as f64 * 1e-4]).powi(2))
            .fold(f64::INFINITY, f64::min);
        let v = decide_abelian(&sym);
        match v.evidence {
            Evidence::SymbolInfimum { infimum, .. } => {
                prop_assert_eq!(v.status, Status::LeftInvertible);
                prop_assert!((grid - infimum).abs() < 1e-6, "{op}: grid {grid} vs {infimum}");
            }
            Evidence::Witness { .. } => {
                prop_assert_eq!(v.status, Status::NotLeftInvertible);
                prop_assert!(grid < 1e-6, "{op}: grid {grid}");
            }
            e => prop_assert!(false, "{op}: {e:?}"),
        }
    }
}

#[test]
fn repeated_denominators_collect_into_powers() {
    let a = parse("1/((1 + x^2)*(1 + x^2))").unwrap();
    let b = parse("1/(1 + 2*x^2 + x^4)").unwrap();
    assert_eq!(a, b);
    assert_eq!(parse(&a.to_string()).unwrap(), a);
}
