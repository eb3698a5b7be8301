//! Property suites for the algebraic invariants.

use proptest::prelude::*;

use arboreal_core::perm::Perm;
use arboreal_core::portrait::{LevelPermTuple, Portrait};
use arboreal_core::tree::{PathPrefix, SphericalIndex};

fn arb_perm(degree: usize) -> impl Strategy<Value = Perm> {
    Just(degree)
        .prop_flat_map(|d| proptest::collection::vec(0..d, d))
        .prop_map(|draws| {
            // Fisher-Yates driven by the drawn values
            let n = draws.len();
            let mut images: Vec<usize> = (0..n).collect();
            for i in (1..n).rev() {
                images.swap(i, draws[i] % (i + 1));
            }
            Perm::from_images(images).unwrap()
        })
}

fn arb_index() -> impl Strategy<Value = SphericalIndex> {
    proptest::collection::vec(2usize..4, 1..5)
        .prop_map(|entries| SphericalIndex::new(entries).unwrap())
}

fn arb_path(index: SphericalIndex) -> impl Strategy<Value = (SphericalIndex, PathPrefix)> {
    let choices: Vec<std::ops::Range<usize>> = index.entries().iter().map(|&m| 0..m).collect();
    choices.prop_map(move |digits| (index.clone(), PathPrefix::new(&index, digits).unwrap()))
}

fn arb_portrait(index: SphericalIndex) -> impl Strategy<Value = Portrait> {
    let depth = index.depth();
    let per_level: Vec<_> = (0..depth)
        .map(|level| {
            let count = index.level_size(level).unwrap();
            proptest::collection::vec(arb_perm(index.arity(level)), count)
        })
        .collect();
    per_level.prop_map(move |rows| {
        let mut p = Portrait::identity(&index);
        for (level, row) in rows.into_iter().enumerate() {
            for (rank, perm) in row.into_iter().enumerate() {
                let v = index.vertex_from_rank(level, rank);
                p.set_decoration(&v, perm).unwrap();
            }
        }
        p
    })
}

proptest! {
    #[test]
    fn perm_inverse_cancels(g in arb_perm(7), h in arb_perm(7)) {
        // compose(g, compose(h, inverse(h))) = g
        prop_assert_eq!(g.compose(&h.compose(&h.inverse())), g.clone());
    }

    #[test]
    fn perm_power_of_order_is_identity(g in arb_perm(8)) {
        let order = g.order();
        prop_assert!(g.power_big(&order).is_identity());
    }

    #[test]
    fn perm_order_divides_lcm_structure(g in arb_perm(9), k in 1i64..20) {
        // g^k computed cycle-wise equals iterated composition
        let mut iterated = Perm::identity(9);
        for _ in 0..k {
            iterated = g.compose(&iterated);
        }
        prop_assert_eq!(g.power(k), iterated);
    }

    #[test]
    fn metric_is_an_ultrametric(
        (index, trio) in arb_index().prop_flat_map(|idx| {
            let p = arb_path(idx.clone()).prop_map(|(_, p)| p);
            let q = arb_path(idx.clone()).prop_map(|(_, p)| p);
            let r = arb_path(idx.clone()).prop_map(|(_, p)| p);
            (Just(idx), (p, q, r))
        })
    ) {
        let (p, q, r) = trio;
        let d_pq = index.metric(&p, &q).unwrap();
        let d_qp = index.metric(&q, &p).unwrap();
        let d_qr = index.metric(&q, &r).unwrap();
        let d_pr = index.metric(&p, &r).unwrap();
        prop_assert_eq!(&d_pq, &d_qp);
        prop_assert!(d_pr <= d_pq.clone().max(d_qr));
        prop_assert_eq!(d_pq == num_traits::Zero::zero(), p == q);
    }

    #[test]
    fn level_restriction_is_a_homomorphism(
        (index, a, b) in arb_index().prop_flat_map(|idx| {
            let a = arb_portrait(idx.clone());
            let b = arb_portrait(idx.clone());
            (Just(idx), a, b)
        })
    ) {
        let c = a.compose(&b).unwrap();
        for n in 0..=index.depth() {
            let lhs = c.level_restriction(n).unwrap();
            let rhs = a.level_restriction(n).unwrap().compose(&b.level_restriction(n).unwrap());
            prop_assert_eq!(lhs, rhs);
        }
    }

    #[test]
    fn apply_preserves_edges(
        (index, a) in arb_index().prop_flat_map(|idx| {
            let a = arb_portrait(idx.clone());
            (Just(idx), a)
        })
    ) {
        for level in 1..=index.depth() {
            for rank in 0..index.level_size(level).unwrap() {
                let v = index.vertex_from_rank(level, rank);
                let image = a.apply(&v);
                prop_assert_eq!(image.level(), v.level());
                prop_assert_eq!(
                    a.apply(&index.parent(&v).unwrap()),
                    index.parent(&image).unwrap()
                );
            }
        }
    }

    #[test]
    fn wreath_reassembly_matches_restriction(
        (index, a) in arb_index().prop_flat_map(|idx| {
            let a = arb_portrait(idx.clone());
            (Just(idx), a)
        })
    ) {
        use arboreal_core::portrait::wreath_act;
        for i in 0..index.depth() {
            let (head, tail) = a.wreath_decompose(i).unwrap();
            let restriction = a.level_restriction(i + 1).unwrap();
            let arity = index.arity(i);
            for x in 0..index.level_size(i).unwrap() {
                for y in 0..arity {
                    let (px, py) = wreath_act(&head, &tail, (x, y));
                    prop_assert_eq!(restriction.apply(x * arity + y), px * arity + py);
                }
            }
        }
    }

    #[test]
    fn residuals_partition_levels(
        (index, x) in arb_index().prop_flat_map(arb_path)
    ) {
        for i in 0..=index.depth() {
            let mut seen = vec![false; index.level_size(i).unwrap()];
            for n in 0..=i {
                for v in index.residual_vertices(&x, n, i).unwrap() {
                    let r = index.vertex_rank(&v);
                    prop_assert!(!seen[r], "residual sets overlap");
                    seen[r] = true;
                }
            }
            prop_assert!(seen.iter().all(|&s| s), "residual sets miss a vertex");
        }
    }

    #[test]
    fn stabilizer_witness_separates(
        (degree, draws, x) in (5usize..10).prop_flat_map(|d| {
            (Just(d), proptest::collection::vec(0..d, d + 1), 0..d)
        })
    ) {
        use arboreal_core::perm::{noncommuting_stabilizer_witness, Parity};
        // random even permutation fixing x: shuffle the other points,
        // then repair parity with a transposition away from x
        let others: Vec<usize> = (0..degree).filter(|&p| p != x).collect();
        let mut arrangement = others.clone();
        for i in (1..arrangement.len()).rev() {
            arrangement.swap(i, draws[i] % (i + 1));
        }
        let mut images = vec![0usize; degree];
        images[x] = x;
        for (&from, &to) in others.iter().zip(&arrangement) {
            images[from] = to;
        }
        let mut g = Perm::from_images(images).unwrap();
        if g.parity() == Parity::Odd {
            let t = Perm::transposition(degree, others[0], others[1]).unwrap();
            g = g.compose(&t);
        }
        prop_assume!(!g.is_identity());
        let tau = noncommuting_stabilizer_witness(&g, x).unwrap();
        prop_assert_eq!(tau.apply(x), x);
        prop_assert!(g.compose(&tau) != tau.compose(&g));
    }

    #[test]
    fn from_level_perms_is_coordinatewise(
        (index, tuple) in arb_index().prop_flat_map(|idx| {
            let perms: Vec<_> = idx.entries().iter().map(|&m| arb_perm(m)).collect();
            (Just(idx), perms)
        })
    ) {
        let tuple = LevelPermTuple::new(index.clone(), tuple).unwrap();
        let a = Portrait::from_level_perms(&tuple);
        for rank in 0..index.level_size(index.depth()).unwrap() {
            let v = index.vertex_from_rank(index.depth(), rank);
            let image = a.apply(&v);
            for (k, (&d, &e)) in v.digits().iter().zip(image.digits()).enumerate() {
                prop_assert_eq!(tuple.perms()[k].apply(d), e);
            }
        }
    }
}

mod chain_invariants {
    use super::*;
    use arboreal_core::classify::{centralizer_z_upper, stabilizer_k_chain};
    use arboreal_core::constructions::{
        build_theorem1, build_wreath, ProductConfig, ProductLevel, WreathConfig,
    };
    use arboreal_core::group::PermGroup;

    #[test]
    fn k_chain_is_increasing_under_embedding() {
        let cfg = WreathConfig::constant(&PermGroup::cyclic(2), 4).unwrap();
        let sys = build_wreath(&cfg).unwrap();
        let x = PathPrefix::zeros(sys.index());
        let ks = stabilizer_k_chain(&sys, &x, 3).unwrap();
        for n in 0..3 {
            assert!(ks[n].order() <= ks[n + 1].order());
            for g in ks[n].generators() {
                assert!(
                    ks[n + 1].contains(g).unwrap(),
                    "K_{n} not inside K_{}",
                    n + 1
                );
            }
        }
    }

    #[test]
    fn z_bound_sits_inside_k() {
        let cfg = WreathConfig::constant(&PermGroup::cyclic(2), 4).unwrap();
        let sys = build_wreath(&cfg).unwrap();
        let x = PathPrefix::zeros(sys.index());
        let ks = stabilizer_k_chain(&sys, &x, 2).unwrap();
        for n in 0..=2 {
            let z = centralizer_z_upper(&sys, &x, n, 1 << 20).unwrap();
            assert!(z.order() <= ks[n].order());
            for g in z.generators() {
                assert!(ks[n].contains(g).unwrap());
            }
        }
    }

    #[test]
    fn noncommuting_partner_exists_above_bottom_layer() {
        // at truncation, K elements confined to the deepest layer can
        // commute with everything; every element visible on V_{d-1} must
        // have a non-commuting partner in the vertex stabilizer
        use arboreal_core::portrait::induced_level_perm;
        let cfg = WreathConfig::constant(&PermGroup::cyclic(2), 4).unwrap();
        let sys = build_wreath(&cfg).unwrap();
        let x = PathPrefix::zeros(sys.index());
        let chain = sys.vertex_stabilizer_chain(&x).unwrap();
        let ks = stabilizer_k_chain(&sys, &x, 1).unwrap();
        let stab_elements = PermGroup::new(16, chain.generators(1).to_vec())
            .unwrap()
            .enumerate(1 << 20)
            .unwrap();
        for g in ks[1].enumerate(1 << 20).unwrap() {
            if induced_level_perm(sys.index(), &g, 3)
                .unwrap()
                .is_identity()
            {
                continue;
            }
            assert!(
                stab_elements.iter().any(|h| !g.commutes_with(h)),
                "no partner for a K element visible above the bottom layer"
            );
        }
    }

    #[test]
    fn product_family_k_elements_all_have_partners() {
        // the product family has trivial centralizer bound outright
        let cfg = ProductConfig::new(vec![ProductLevel { p1: 3, p2: 5, o: 5 }]);
        let sys = build_theorem1(&cfg).unwrap();
        let x = PathPrefix::zeros(sys.index());
        let ks = stabilizer_k_chain(&sys, &x, 1).unwrap();
        let chain = sys.vertex_stabilizer_chain(&x).unwrap();
        let stab_elements = PermGroup::new(5, chain.generators(1).to_vec())
            .unwrap()
            .enumerate(1 << 20)
            .unwrap();
        for g in ks[1].enumerate(1 << 20).unwrap() {
            if g.is_identity() {
                continue;
            }
            assert!(stab_elements.iter().any(|h| !g.commutes_with(h)));
        }
    }
}

mod nonabelian_wreath {
    use super::*;
    use arboreal_core::classify::{centralizer_z_upper, stabilizer_k};
    use arboreal_core::constructions::{build_wreath, expected_k_order, WreathConfig};
    use arboreal_core::group::PermGroup;
    use num_bigint::BigUint;
    use std::collections::HashSet;

    fn closure(degree: usize, gens: &[Perm]) -> Vec<Perm> {
        let mut seen = HashSet::new();
        let mut out = vec![Perm::identity(degree)];
        seen.insert(out[0].clone());
        let mut i = 0;
        while i < out.len() {
            let e = out[i].clone();
            i += 1;
            for g in gens {
                let next = g.compose(&e);
                if seen.insert(next.clone()) {
                    out.push(next);
                }
            }
        }
        out
    }

    /// Differential checks on the Sym(3) wreath at depth 2, where level
    /// groups are non-abelian and point stabilizers are nontrivial:
    /// everything the chain machinery reports must agree with plain
    /// enumeration over the 1296 elements.
    #[test]
    fn sym3_wreath_depth2_against_enumeration() {
        let cfg = WreathConfig::constant(&PermGroup::symmetric(3), 2).unwrap();
        let sys = build_wreath(&cfg).unwrap();
        let x = PathPrefix::zeros(sys.index());
        let all = closure(9, sys.level_group(2).unwrap().generators());
        assert_eq!(all.len(), 1296);

        // K_1: fixes the three leaves under the first level-1 vertex
        let brute_k1: Vec<&Perm> = all
            .iter()
            .filter(|e| (0..3).all(|r| e.apply(r) == r))
            .collect();
        let k1 = stabilizer_k(&sys, &x, 1).unwrap();
        assert_eq!(BigUint::from(brute_k1.len()), *k1.order());
        // formula: |Stab_{S3}(0)| * |S3|^2 = 2 * 36
        assert_eq!(
            expected_k_order(&cfg, &x, 1, 2).unwrap(),
            BigUint::from(72u32)
        );
        assert_eq!(k1.order(), &BigUint::from(72u32));
        for e in &brute_k1 {
            assert!(k1.contains(e).unwrap());
        }

        // centralizer bound: brute filter against the assembled route
        let u1: Vec<&Perm> = all
            .iter()
            .filter(|e| (0..3).all(|r| e.apply(r) < 3))
            .collect();
        let brute_z: Vec<&&Perm> = brute_k1
            .iter()
            .filter(|z| u1.iter().all(|h| z.commutes_with(h)))
            .collect();
        let z = centralizer_z_upper(&sys, &x, 1, 1 << 20).unwrap();
        assert_eq!(BigUint::from(brute_z.len()), *z.order());
        for e in brute_z {
            assert!(z.contains(e).unwrap());
        }

        // normal core at level 1: everything preserving each leaf block
        let brute_core: Vec<&Perm> = all
            .iter()
            .filter(|e| {
                (0..3).all(|v| (3 * v..3 * v + 3).all(|r| (3 * v..3 * v + 3).contains(&e.apply(r))))
            })
            .collect();
        let core = sys.normal_core(1).unwrap();
        assert_eq!(BigUint::from(brute_core.len()), *core.order());

        // discriminant: the full path stabilizer
        let brute_disc = all
            .iter()
            .filter(|e| e.apply(0) == 0 && (0..3).all(|r| e.apply(r) < 3))
            .count();
        let disc = sys.discriminant_truncation(&x).unwrap();
        assert_eq!(BigUint::from(brute_disc), *disc.order());
    }
}
