use arcalg::presentation::{build_quiver, relations_k, verify_rho};

#[test]
fn rho_is_an_isomorphism_in_low_degrees() {
    for (m, n) in [(1, 1), (1, 2), (1, 3), (1, 4), (2, 2), (3, 2), (2, 3), (3, 3)] {
        let r = verify_rho(m, n).unwrap();
        assert!(r.passed(), "({m},{n}): {:?}", r.mismatches);
        assert_eq!(r.blocks_checked, build_quiver(m, n, false).unwrap().num_vertices().pow(2));
    }
}

#[test]
fn relation_counts_are_symmetric() {
    for (m, n) in [(1, 3), (2, 3)] {
        let a = relations_k(m, n).unwrap().1.total_dim();
        let b = relations_k(n, m).unwrap().1.total_dim();
        assert_eq!(a, b);
    }
}
