use arcalg::arc_algebra::{
    dimension, enumerate_basis, multiply_basis, AlgebraElement, ArcDiagram, SurgeryOrder,
};
use arcalg::combinatorics::Weight;
use arcalg::scalar::q;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn w(s: &str) -> Weight {
    Weight::parse(s).unwrap()
}

fn basis_el(d: ArcDiagram) -> AlgebraElement {
    AlgebraElement::basis(d)
}

fn check_triple(a: &ArcDiagram, b: &ArcDiagram, c: &ArcDiagram) {
    let (a, b, c) = (basis_el(*a), basis_el(*b), basis_el(*c));
    let left = a.mul(&b).mul(&c);
    let right = a.mul(&b.mul(&c));
    assert_eq!(left, right, "associativity fails for {a:?}, {b:?}, {c:?}");
}

#[test]
fn associativity_exhaustive_small() {
    for (m, n) in [(1, 1), (1, 2), (2, 2)] {
        let basis = enumerate_basis(m, n).unwrap();
        for a in &basis {
            for b in basis.iter().filter(|b| b.cup == a.cap) {
                for c in basis.iter().filter(|c| c.cup == b.cap) {
                    check_triple(a, b, c);
                }
            }
        }
    }
}

#[test]
fn grading_and_order_independence() {
    for (m, n) in [(1, 2), (2, 2), (2, 3)] {
        let basis = enumerate_basis(m, n).unwrap();
        for a in &basis {
            for b in basis.iter().filter(|b| b.cup == a.cap) {
                let p = multiply_basis(a, b, SurgeryOrder::LeftFirst);
                let r = multiply_basis(a, b, SurgeryOrder::RightFirst);
                assert_eq!(p, r, "surgery order matters for {a} * {b}");
                for d in p.terms.keys() {
                    assert!(d.is_valid(), "{a} * {b} produced invalid {d}");
                    assert_eq!(d.degree(), a.degree() + b.degree());
                }
                let lhs = p.involution();
                let rhs = basis_el(b.involution()).mul(&basis_el(a.involution()));
                assert_eq!(lhs, rhs, "(ab)* != b*a* for {a}, {b}");
            }
        }
    }
}

#[test]
fn random_triples_larger_types() {
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    for (m, n) in [(3, 2), (3, 3)] {
        let basis = enumerate_basis(m, n).unwrap();
        let mut done = 0;
        while done < 100 {
            let a = basis[rng.gen_range(0..basis.len())];
            let bs: Vec<_> = basis.iter().filter(|b| b.cup == a.cap).collect();
            let b = *bs[rng.gen_range(0..bs.len())];
            let cs: Vec<_> = basis.iter().filter(|c| c.cup == b.cap).collect();
            let c = *cs[rng.gen_range(0..cs.len())];
            check_triple(&a, &b, &c);
            done += 1;
        }
    }
}

#[test]
fn dimension_symmetry() {
    for (m, n) in [(1, 3), (2, 3), (2, 4), (3, 4)] {
        assert_eq!(dimension(m, n).unwrap(), dimension(n, m).unwrap());
    }
}

/// The two products drawn for type (3,3); the lower pair uses diagrams whose
/// upper (resp. lower) half-lines are oriented `v ... ^`, so they are built
/// unchecked and serve only as surgery inputs.
#[test]
fn pictured_products_in_k33() {
    let a = ArcDiagram::new_unchecked(w("v^^v^v"), w("^v^v^v"), w("^v^v^v"));
    let b = ArcDiagram::new_unchecked(w("^v^v^v"), w("^v^^vv"), w("^vvv^^"));
    assert!(a.is_valid() && b.is_valid());
    assert_eq!((a.degree(), b.degree()), (1, 3));
    let ab = multiply_basis(&a, &b, SurgeryOrder::LeftFirst);
    let expected = ArcDiagram::new_unchecked(w("v^^v^v"), w("^v^^vv"), w("^vvv^^"));
    assert_eq!(ab, basis_el(expected));

    let c = ArcDiagram::new_unchecked(w("v^v^v^"), w("v^v^v^"), w("^v^v^v"));
    let d = ArcDiagram::new_unchecked(w("^v^v^v"), w("v^v^v^"), w("v^v^v^"));
    assert!(!c.is_valid() && !d.is_valid());
    let cd = multiply_basis(&c, &d, SurgeryOrder::LeftFirst);
    let mut expected = AlgebraElement::zero();
    for mid in ["v^^v^v", "^vv^^v", "^v^vv^"] {
        expected.add_term(ArcDiagram::new_unchecked(w("v^v^v^"), w(mid), w("v^v^v^")), q(1));
    }
    assert_eq!(cd, expected);
}
