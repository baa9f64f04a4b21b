use std::f64::consts::PI;

use num_bigint::BigUint;
use num_complex::Complex64;
use rayon::prelude::*;
use serde_json::json;
use thiserror::Error;

use crate::automorphism::{MapError, PolyMap};
use crate::green::{green_plus, FloatAffine, FloatMap, GreenError, GreenOptions};
use crate::poly::{Budget, ParamPoly, Polynomial, PolyError};

use super::affine::{
    affinity_constraints, conjugate, generic_affine, indeterminacy_mask, shape_constraints,
    AffineMask, ParametricAffineMap,
};
use super::solve::{solve_constraints, ConstraintSet, Relation, SolutionFamily, Status};
use super::SymmetryError;

/// Result of the refinement loop.
#[derive(Debug, Clone)]
pub struct NComputation {
    /// The ansatz; substituting the family's values gives the members.
    pub ansatz: ParametricAffineMap,
    pub mask: Option<AffineMask>,
    pub family: SolutionFamily,
    pub rounds: usize,
    /// A full round added no constraint.
    pub stabilized: bool,
}

impl NComputation {
    /// The ansatz with the family's assignments applied.
    pub fn member(&self) -> ParametricAffineMap {
        self.ansatz
            .substitute_params(&self.family.values)
            .reduce(&self.family.relations)
    }

    pub fn to_json(&self) -> serde_json::Value {
        let mut v = self.family.to_json();
        let obj = v.as_object_mut().expect("object");
        obj.insert("member".into(), json!(self.member().render()));
        obj.insert("rounds".into(), json!(self.rounds));
        obj.insert("stabilized".into(), json!(self.stabilized));
        obj.insert("masked".into(), json!(self.mask.is_some()));
        v
    }
}

fn reduce_map(m: &PolyMap<Polynomial>, relations: &[Relation]) -> PolyMap<Polynomial> {
    let comps = m
        .components()
        .iter()
        .map(|c| {
            let np = *c.coeff_ctx();
            c.map_coeffs(np, |p| Relation::reduce_all(p, relations))
        })
        .collect();
    PolyMap::new(comps).expect("square")
}

/// Refines a parametric affine ansatz until conjugation by `F` adds no new
/// condition, or `max_rounds` is reached.
///
/// Round `r` conjugates the previous round's affine map, requires the result
/// to be affine (and to keep the masked shape when the indeterminacy sets
/// are coordinate subspaces), and solves. The recorded determinant keeps
/// the members invertible.
pub fn compute_n(
    f: &PolyMap,
    f_inv: &PolyMap,
    max_rounds: usize,
    budget: &Budget,
) -> Result<NComputation, SymmetryError> {
    let mask = indeterminacy_mask(f, f_inv)?.filter(|m| !m.is_trivial());
    let ansatz = generic_affine(f.dim(), mask.as_ref(), None);
    let mut family = SolutionFamily::new(ansatz.params.clone());
    let mut start = ConstraintSet::new(ansatz.nparams());
    start.add_disequality(ansatz.det());
    family = solve_constraints(&start, family);

    let mut current = ansatz.clone();
    let mut rounds = 0;
    let mut stabilized = false;
    while rounds < max_rounds && family.status == Status::Solved {
        rounds += 1;
        family.trace.push(format!("round {rounds}"));
        let beta = current
            .substitute_params(&family.values)
            .reduce(&family.relations);
        let m = reduce_map(&conjugate(f, f_inv, &beta, budget)?, &family.relations);
        let mut cs = affinity_constraints(&m, false);
        if let Some(mask) = &mask {
            cs.extend(&shape_constraints(&m, mask));
        }
        let fresh = cs
            .equations()
            .any(|e| !family.normalize(e).is_zero());
        family = solve_constraints(&cs, family);
        if !fresh {
            stabilized = true;
            break;
        }
        if family.status != Status::Solved {
            break;
        }
        let m = reduce_map(&m, &family.relations);
        let m = PolyMap::new(
            m.components()
                .iter()
                .map(|c| {
                    let np = *c.coeff_ctx();
                    c.map_coeffs(np, |p| family.normalize(p))
                })
                .collect(),
        )?;
        current = ParametricAffineMap::from_map(ansatz.params.clone(), &m)
            .ok_or(SymmetryError::NotAffine)?;
    }
    let summary = family.summary();
    family.trace.push("final".into());
    family.trace.extend(summary);
    Ok(NComputation {
        ansatz,
        mask,
        family,
        rounds,
        stabilized,
    })
}

/// Whether `f^j ∘ β ∘ f^{-j}` is affine for `1 ≤ j ≤ rounds`, computed by
/// successive conjugation with coefficients reduced modulo `relations`.
pub fn verify_membership(
    f: &PolyMap,
    f_inv: &PolyMap,
    beta: &ParametricAffineMap,
    relations: &[Relation],
    rounds: usize,
    budget: &Budget,
) -> Result<bool, SymmetryError> {
    let mut cur = beta.reduce(relations);
    for _ in 0..rounds {
        let m = reduce_map(&conjugate(f, f_inv, &cur, budget)?, relations);
        match ParametricAffineMap::from_map(cur.params.clone(), &m) {
            Some(next) => cur = next,
            None => return Ok(false),
        }
    }
    Ok(true)
}

/// Symbolic members of a finite family: each relation variable `a` with
/// `a^n = 1` stands for a primitive `n`-th root, and member `j` replaces it
/// by `a^j`. Requires every free parameter to carry such a relation.
pub fn enumerate_elements(
    ansatz: &ParametricAffineMap,
    family: &SolutionFamily,
) -> Result<Vec<ParametricAffineMap>, SymmetryError> {
    let rels = enumerable_relations(family)?;
    let member = ansatz
        .substitute_params(&family.values)
        .reduce(&family.relations);
    let np = family.nparams();
    let mut out = Vec::new();
    for idx in index_tuples(&rels) {
        let mut sub: Vec<Polynomial> = (0..np).map(|i| Polynomial::x(np, i)).collect();
        for (r, &j) in rels.iter().zip(&idx) {
            let mut e = vec![0; np];
            e[r.var] = j;
            sub[r.var] = Polynomial::from_terms(np, (), [(e, crate::GaussianRational::one())]);
        }
        out.push(member.substitute_params(&sub).reduce(&family.relations));
    }
    Ok(out)
}

fn enumerable_relations(family: &SolutionFamily) -> Result<Vec<Relation>, SymmetryError> {
    if family.status != Status::Solved {
        return Err(SymmetryError::NotEnumerable(format!(
            "status is {}",
            family.status.as_str()
        )));
    }
    family
        .free_params()
        .into_iter()
        .map(|p| match family.relation_for(p) {
            Some(r) if r.c.is_one() => Ok(r.clone()),
            Some(r) => Err(SymmetryError::NotEnumerable(r.render(&family.params))),
            None => Err(SymmetryError::NotEnumerable(format!(
                "{} is free",
                family.params[p]
            ))),
        })
        .collect()
}

fn index_tuples(rels: &[Relation]) -> Vec<Vec<u32>> {
    rels.iter().fold(vec![vec![]], |acc, r| {
        acc.into_iter()
            .flat_map(|t| {
                (0..r.n).map(move |j| {
                    let mut t = t.clone();
                    t.push(j);
                    t
                })
            })
            .collect()
    })
}

/// Complex-double members, with `a = exp(2πi/n)` for each relation
/// `a^n = 1`, in the order of [`enumerate_elements`].
pub fn enumerate_numeric(
    ansatz: &ParametricAffineMap,
    family: &SolutionFamily,
) -> Result<Vec<FloatAffine>, SymmetryError> {
    let rels = enumerable_relations(family)?;
    let member = ansatz
        .substitute_params(&family.values)
        .reduce(&family.relations);
    let np = family.nparams();
    let mut out = Vec::new();
    for idx in index_tuples(&rels) {
        let mut point = vec![Complex64::new(0.0, 0.0); np];
        for (r, &j) in rels.iter().zip(&idx) {
            point[r.var] = Complex64::from_polar(1.0, 2.0 * PI * j as f64 / r.n as f64);
        }
        let ev = |p: &Polynomial| p.eval_float(&point).expect("arity");
        out.push(FloatAffine {
            linear: member
                .linear
                .iter()
                .map(|row| row.iter().map(ev).collect())
                .collect(),
            translation: member.translation.iter().map(ev).collect(),
        });
    }
    Ok(out)
}

/// `β^{order-1}`, the inverse of a member of a group of the given order.
pub fn inverse_element(
    beta: &ParametricAffineMap,
    order: u64,
    relations: &[Relation],
) -> Result<ParametricAffineMap, SymmetryError> {
    let k = beta.k();
    let mut acc = ParametricAffineMap::identity(beta.params.clone(), k);
    let mut base = beta.reduce(relations);
    let mut e = order.saturating_sub(1);
    while e > 0 {
        if e & 1 == 1 {
            acc = acc.compose(&base, relations)?;
        }
        base = base.compose(&base, relations)?;
        e >>= 1;
    }
    Ok(acc)
}

/// `β ∘ F ∘ β^{-1}` with parametric coefficients reduced modulo `relations`.
pub fn affine_conjugate(
    beta: &ParametricAffineMap,
    beta_inv: &ParametricAffineMap,
    f: &PolyMap,
    relations: &[Relation],
    budget: &Budget,
) -> Result<PolyMap<Polynomial>, SymmetryError> {
    let np = beta.nparams();
    let lifted = PolyMap::new(
        f.components()
            .iter()
            .map(|p| p.lift(np))
            .collect::<Vec<ParamPoly>>(),
    )?;
    let inner = lifted.compose(&beta_inv.to_map(), budget)?;
    Ok(reduce_map(&beta.to_map().compose(&inner, budget)?, relations))
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum SearchError {
    #[error("budget exceeded ({reason}); untested pairs: {untested:?}")]
    BudgetExceeded {
        reason: String,
        untested: Vec<(u32, u32)>,
    },
    #[error(transparent)]
    Map(MapError),
}

/// Lexicographically first `(n, m)` with `F^n = G^m`, `1 ≤ n, m ≤ n_max`,
/// among the pairs with `d_F^n = d_G^m`.
pub fn shared_iterate_search(
    f: &PolyMap,
    g: &PolyMap,
    n_max: u32,
    budget: &Budget,
) -> Result<Option<(u32, u32)>, SearchError> {
    if f.dim() != g.dim() {
        return Err(SearchError::Map(MapError::DimensionMismatch {
            left: f.dim(),
            right: g.dim(),
        }));
    }
    let (df, dg) = (f.degree().max(0) as u32, g.degree().max(0) as u32);
    let candidates: Vec<(u32, u32)> = (1..=n_max)
        .flat_map(|n| (1..=n_max).map(move |m| (n, m)))
        .filter(|&(n, m)| BigUint::from(df).pow(n) == BigUint::from(dg).pow(m))
        .collect();
    let mut f_iter: Vec<PolyMap> = Vec::new();
    let mut g_iter: Vec<PolyMap> = Vec::new();
    let grow = |v: &mut Vec<PolyMap>, base: &PolyMap, upto: u32| -> Result<(), MapError> {
        while v.len() < upto as usize {
            let next = match v.last() {
                None => base.forget_inverse(),
                Some(prev) => base.compose(prev, budget)?,
            };
            v.push(next);
        }
        Ok(())
    };
    for (i, &(n, m)) in candidates.iter().enumerate() {
        let step = grow(&mut f_iter, f, n).and_then(|_| grow(&mut g_iter, g, m));
        match step {
            Ok(()) => {}
            Err(MapError::Poly(PolyError::BudgetExceeded(reason))) => {
                return Err(SearchError::BudgetExceeded {
                    reason,
                    untested: candidates[i..].to_vec(),
                })
            }
            Err(e) => return Err(SearchError::Map(e)),
        }
        if f_iter[n as usize - 1].components() == g_iter[m as usize - 1].components() {
            return Ok(Some((n, m)));
        }
    }
    Ok(None)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GreenPreservation {
    /// Largest `|G(βz) − G(z)|` minus the two error bounds.
    pub max_residual: f64,
    pub samples_used: usize,
    /// Samples where neither orbit escaped within the budget.
    pub undecided: usize,
    pub pass: bool,
}

/// Numeric check that `G^+ ∘ β = G^+` on the samples.
pub fn check_preserves_green(
    beta: &FloatAffine,
    f: &FloatMap,
    d: u32,
    samples: &[Vec<Complex64>],
    tol: f64,
    opts: &GreenOptions,
) -> Result<GreenPreservation, GreenError> {
    let rows = samples
        .par_iter()
        .map(|z| {
            let g = green_plus(f, d, z, opts)?;
            let gb = green_plus(f, d, &beta.apply(z), opts)?;
            if !g.escaped && !gb.escaped {
                return Ok(None);
            }
            Ok(Some(
                (g.value - gb.value).abs() - g.error_bound - gb.error_bound,
            ))
        })
        .collect::<Result<Vec<Option<f64>>, GreenError>>()?;
    let undecided = rows.iter().filter(|r| r.is_none()).count();
    let max_residual = rows.iter().flatten().fold(0.0f64, |a, &b| a.max(b));
    Ok(GreenPreservation {
        max_residual,
        samples_used: rows.len() - undecided,
        undecided,
        pass: max_residual <= tol,
    })
}
