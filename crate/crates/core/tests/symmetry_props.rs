mod common;

use common::{coeff, cubic, henon};
use hsmaps_core::symmetry::{
    compute_n, conjugate, enumerate_elements, inverse_element, solve_constraints,
    verify_membership, ConstraintSet, ParametricAffineMap, Relation, SolutionFamily, Status,
};
use hsmaps_core::{Budget, GaussianRational, PolyMap, Polynomial};
use proptest::prelude::*;

const NP: usize = 4;

fn names() -> Vec<String> {
    ["a", "b", "c", "d"].iter().map(|s| s.to_string()).collect()
}

/// `p_i - c_i * m_i(p_{i+1}, ..)` for the first three parameters, each
/// scaled by a nonzero constant, and optionally `d^n - 1`.
fn triangular() -> impl Strategy<Value = ConstraintSet> {
    let row = |i: usize| {
        (
            coeff(),
            proptest::collection::vec(0u32..=2, NP - i - 1),
            coeff().prop_filter("nonzero", |c| !c.is_zero()),
        )
    };
    (row(0), row(1), row(2), 0u32..=4).prop_map(|(r0, r1, r2, n)| {
        let mut cs = ConstraintSet::new(NP);
        for (i, (c, exps, scale)) in [r0, r1, r2].into_iter().enumerate() {
            let mut full = vec![0; i + 1];
            full.extend(exps);
            let m = Polynomial::from_terms(NP, (), [(full, c)]);
            let e = &Polynomial::x(NP, i) - &m;
            cs.add_equation(e.scale(&scale));
        }
        if n >= 1 {
            let dn = Polynomial::from_terms(NP, (), [(vec![0, 0, 0, n], GaussianRational::one())]);
            cs.add_equation(&dn - &Polynomial::one(NP, ()));
        }
        cs
    })
}

/// Arbitrary small systems: two or three equations of degree at most 2.
fn arbitrary() -> impl Strategy<Value = ConstraintSet> {
    proptest::collection::vec(common::poly(NP, 2), 1..=3).prop_map(|eqs| {
        let mut cs = ConstraintSet::new(NP);
        for e in eqs {
            cs.add_equation(e);
        }
        cs
    })
}

fn assert_triangular(fam: &SolutionFamily) -> Result<(), TestCaseError> {
    let free = fam.free_params();
    for (_, v) in fam.assignments() {
        for var in v.variables() {
            prop_assert!(free.contains(&var), "assignment uses assigned parameter {var}");
        }
    }
    Ok(())
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(128))]

    #[test]
    fn triangular_systems_are_solved_soundly(cs in triangular()) {
        let fam = solve_constraints(&cs, SolutionFamily::new(names()));
        prop_assert_eq!(fam.status, Status::Solved);
        for e in cs.equations() {
            prop_assert!(fam.normalize(e).is_zero(), "{:?}", fam.summary());
        }
        assert_triangular(&fam)?;
    }

    #[test]
    fn solver_is_sound_on_arbitrary_systems(cs in arbitrary()) {
        let fam = solve_constraints(&cs, SolutionFamily::new(names()));
        assert_triangular(&fam)?;
        match fam.status {
            Status::Solved => {
                for e in cs.equations() {
                    prop_assert!(fam.normalize(e).is_zero(), "{:?}", fam.summary());
                }
                prop_assert!(fam.residual.is_empty());
            }
            Status::Unsolved => prop_assert!(!fam.residual.is_empty()),
            Status::Inconsistent => {}
        }
    }
}

fn cubic_family() -> (PolyMap, PolyMap, hsmaps_core::symmetry::NComputation) {
    let f = cubic();
    let inv = f.claimed_inverse().unwrap().clone();
    let n = compute_n(&f, &inv, 5, &Budget::default()).unwrap();
    (f, inv, n)
}

#[test]
fn enumerated_members_have_unit_determinant() {
    let (_, _, n) = cubic_family();
    let els = enumerate_elements(&n.ansatz, &n.family).unwrap();
    assert_eq!(els.len(), 7);
    let rels = &n.family.relations;
    for b in &els {
        let det = Relation::reduce_all(&b.det(), rels);
        assert_eq!(det, Polynomial::one(n.ansatz.nparams(), ()));
    }
    let distinct: std::collections::BTreeSet<String> = els.iter().map(|b| b.render()).collect();
    assert_eq!(distinct.len(), 7);
}

#[test]
fn products_and_inverses_remain_members() {
    let (f, inv, n) = cubic_family();
    let b = Budget::default();
    let rels = &n.family.relations;
    let els = enumerate_elements(&n.ansatz, &n.family).unwrap();
    for x in &els {
        let xi = inverse_element(x, 7, rels).unwrap();
        assert!(x.compose(&xi, rels).unwrap().is_identity());
        assert!(verify_membership(&f, &inv, &xi, rels, 3, &b).unwrap());
        for y in &els {
            let p = x.compose(y, rels).unwrap();
            assert!(verify_membership(&f, &inv, &p, rels, 3, &b).unwrap());
            assert!(els.contains(&p), "{} not enumerated", p.render());
        }
    }
}

#[test]
fn conjugation_by_f_permutes_the_members() {
    let (f, inv, n) = cubic_family();
    let rels = &n.family.relations;
    let els = enumerate_elements(&n.ansatz, &n.family).unwrap();
    let mut images = Vec::new();
    for x in &els {
        let m = conjugate(&f, &inv, x, &Budget::default()).unwrap();
        let m = PolyMap::new(
            m.components()
                .iter()
                .map(|c| c.map_coeffs(*c.coeff_ctx(), |p| Relation::reduce_all(p, rels)))
                .collect(),
        )
        .unwrap();
        let image = ParametricAffineMap::from_map(x.params.clone(), &m)
            .expect("conjugate stays affine")
            .reduce(rels);
        let j = els.iter().position(|y| *y == image).expect("image is a member");
        images.push(j);
    }
    // member j goes to member 2j mod 7
    assert_eq!(images, [0, 2, 4, 6, 1, 3, 5]);
}

#[test]
fn henon_family_is_only_the_identity() {
    let f = henon();
    let inv = f.claimed_inverse().unwrap().clone();
    let n = compute_n(&f, &inv, 5, &Budget::default()).unwrap();
    assert!(n.stabilized);
    assert_eq!(n.family.element_count(), Some(1));
    assert!(n.member().is_identity());
}
