use crate::automorphism::{indeterminacy_forms, MapError, PolyMap};
use crate::poly::{Budget, Monomial, ParamPoly, Poly, Polynomial};
use crate::scalar::{GaussianRational, Ring};

use super::solve::{ConstraintSet, Relation};
use super::SymmetryError;

/// Linear-part entries forced to zero: `zero[i][j]` fixes the coefficient
/// of `x_j` in component `i`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct AffineMask {
    pub zero: Vec<Vec<bool>>,
}

impl AffineMask {
    pub fn none(k: usize) -> Self {
        Self {
            zero: vec![vec![false; k]; k],
        }
    }

    pub fn k(&self) -> usize {
        self.zero.len()
    }

    /// Forces the linear part to preserve the coordinate subspace spanned
    /// by `e_j` for `j` not in `vanishing`.
    pub fn preserve_subspace(&mut self, vanishing: &[usize]) {
        let k = self.k();
        for j in (0..k).filter(|j| !vanishing.contains(j)) {
            for &i in vanishing {
                self.zero[i][j] = true;
            }
        }
    }

    pub fn is_trivial(&self) -> bool {
        self.zero.iter().flatten().all(|z| !z)
    }
}

/// Mask fixing both indeterminacy sets, when each is a single coordinate
/// subspace recognizable from its top forms.
pub fn indeterminacy_mask(f: &PolyMap, f_inv: &PolyMap) -> Result<Option<AffineMask>, MapError> {
    let plus = indeterminacy_forms(f)?.coordinate_zero_set();
    let minus = indeterminacy_forms(f_inv)?.coordinate_zero_set();
    Ok(match (plus, minus) {
        (Some(p), Some(m)) => {
            let mut mask = AffineMask::none(f.dim());
            mask.preserve_subspace(&p);
            mask.preserve_subspace(&m);
            Some(mask)
        }
        _ => None,
    })
}

/// Affine map `x ↦ L x + t` whose entries are polynomials in named
/// parameters.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ParametricAffineMap {
    pub params: Vec<String>,
    pub linear: Vec<Vec<Polynomial>>,
    pub translation: Vec<Polynomial>,
}

fn default_var_names(k: usize) -> Vec<String> {
    if k <= 4 {
        ["x", "y", "z", "w"][..k].iter().map(|s| s.to_string()).collect()
    } else {
        (1..=k).map(|i| format!("x{i}")).collect()
    }
}

fn linear_param_names(n: usize) -> Vec<String> {
    // skip `i`, which reads as the imaginary unit
    let letters: Vec<char> = ('a'..='z').filter(|&c| c != 'i').collect();
    if n <= letters.len() {
        letters[..n].iter().map(|c| c.to_string()).collect()
    } else {
        (1..=n).map(|i| format!("l{i}")).collect()
    }
}

/// Fresh parameters for every linear entry not fixed by the mask, named
/// `a, b, c, ...` in row-major order, and a translation `x0, y0, ...`.
pub fn generic_affine(
    k: usize,
    mask: Option<&AffineMask>,
    var_names: Option<&[String]>,
) -> ParametricAffineMap {
    let free: Vec<(usize, usize)> = (0..k)
        .flat_map(|i| (0..k).map(move |j| (i, j)))
        .filter(|&(i, j)| mask.is_none_or(|m| !m.zero[i][j]))
        .collect();
    let vars = var_names.map_or_else(|| default_var_names(k), |v| v.to_vec());
    let mut params = linear_param_names(free.len());
    params.extend(vars.iter().map(|v| format!("{v}0")));
    let np = params.len();
    let mut linear = vec![vec![Polynomial::zero(np, ()); k]; k];
    for (idx, &(i, j)) in free.iter().enumerate() {
        linear[i][j] = Polynomial::x(np, idx);
    }
    let translation = (0..k).map(|i| Polynomial::x(np, free.len() + i)).collect();
    ParametricAffineMap {
        params,
        linear,
        translation,
    }
}

impl ParametricAffineMap {
    pub fn k(&self) -> usize {
        self.translation.len()
    }

    pub fn nparams(&self) -> usize {
        self.params.len()
    }

    /// A constant affine map in the given parameter space.
    pub fn constant(
        params: Vec<String>,
        linear: Vec<Vec<GaussianRational>>,
        translation: Vec<GaussianRational>,
    ) -> Self {
        let np = params.len();
        Self {
            linear: linear
                .into_iter()
                .map(|row| row.into_iter().map(|c| Polynomial::constant(np, c)).collect())
                .collect(),
            translation: translation
                .into_iter()
                .map(|c| Polynomial::constant(np, c))
                .collect(),
            params,
        }
    }

    pub fn identity(params: Vec<String>, k: usize) -> Self {
        let lin = (0..k)
            .map(|i| {
                (0..k)
                    .map(|j| GaussianRational::from_int((i == j) as i64))
                    .collect()
            })
            .collect();
        Self::constant(params, lin, vec![GaussianRational::zero(); k])
    }

    /// `diag(entries)` with zero translation.
    pub fn diagonal(params: Vec<String>, entries: Vec<Polynomial>) -> Self {
        let k = entries.len();
        let np = params.len();
        let mut linear = vec![vec![Polynomial::zero(np, ()); k]; k];
        for (i, e) in entries.into_iter().enumerate() {
            linear[i][i] = e;
        }
        Self {
            params,
            linear,
            translation: vec![Polynomial::zero(np, ()); k],
        }
    }

    /// The map as a polynomial map with parametric coefficients.
    pub fn to_map(&self) -> PolyMap<Polynomial> {
        let k = self.k();
        let np = self.nparams();
        let comps = (0..k)
            .map(|i| {
                let mut terms: Vec<(Vec<u32>, Polynomial)> = (0..k)
                    .map(|j| (Monomial::var(k, j).exponents().to_vec(), self.linear[i][j].clone()))
                    .collect();
                terms.push((vec![0; k], self.translation[i].clone()));
                Poly::from_terms(k, np, terms)
            })
            .collect();
        PolyMap::new(comps).expect("square by construction")
    }

    /// Reads an affine parametric map back; `None` if some component has a
    /// term of degree two or more.
    pub fn from_map(params: Vec<String>, m: &PolyMap<Polynomial>) -> Option<Self> {
        let k = m.dim();
        let np = params.len();
        if m.components().iter().any(|c| c.degree() > 1) {
            return None;
        }
        let coeff = |p: &ParamPoly, mono: &Monomial| {
            p.coeff(mono).cloned().unwrap_or_else(|| Polynomial::zero(np, ()))
        };
        let linear = m
            .components()
            .iter()
            .map(|c| (0..k).map(|j| coeff(c, &Monomial::var(k, j))).collect())
            .collect();
        let translation = m
            .components()
            .iter()
            .map(|c| coeff(c, &Monomial::one(k)))
            .collect();
        Some(Self {
            params,
            linear,
            translation,
        })
    }

    /// Applies `f` to every entry.
    pub fn map_entries(&self, mut f: impl FnMut(&Polynomial) -> Polynomial) -> Self {
        Self {
            params: self.params.clone(),
            linear: self
                .linear
                .iter()
                .map(|row| row.iter().map(&mut f).collect())
                .collect(),
            translation: self.translation.iter().map(&mut f).collect(),
        }
    }

    /// Substitutes `params[i] -> values[i]` in every entry.
    pub fn substitute_params(&self, values: &[Polynomial]) -> Self {
        let b = Budget::unlimited();
        self.map_entries(|p| p.substitute(values, &b).expect("parameter arity"))
    }

    pub fn reduce(&self, relations: &[Relation]) -> Self {
        self.map_entries(|p| Relation::reduce_all(p, relations))
    }

    pub fn det(&self) -> Polynomial {
        det(&self.linear, self.nparams())
    }

    pub fn is_identity(&self) -> bool {
        let k = self.k();
        (0..k).all(|i| {
            self.translation[i].is_zero()
                && (0..k).all(|j| {
                    let e = &self.linear[i][j];
                    if i == j {
                        Ring::is_one(e)
                    } else {
                        e.is_zero()
                    }
                })
        })
    }

    pub fn is_diagonal(&self) -> bool {
        let k = self.k();
        (0..k).all(|i| (0..k).all(|j| i == j || self.linear[i][j].is_zero()))
    }

    /// `self ∘ other`, reduced modulo `relations`.
    pub fn compose(&self, other: &Self, relations: &[Relation]) -> Result<Self, SymmetryError> {
        if self.params != other.params || self.k() != other.k() {
            return Err(SymmetryError::ParamMismatch);
        }
        let k = self.k();
        let np = self.nparams();
        let mut linear = vec![vec![Polynomial::zero(np, ()); k]; k];
        let mut translation = self.translation.clone();
        for i in 0..k {
            for j in 0..k {
                let mut acc = Polynomial::zero(np, ());
                for l in 0..k {
                    acc = &acc + &(&self.linear[i][l] * &other.linear[l][j]);
                }
                linear[i][j] = acc;
            }
            for l in 0..k {
                translation[i] = &translation[i] + &(&self.linear[i][l] * &other.translation[l]);
            }
        }
        Ok(Self {
            params: self.params.clone(),
            linear,
            translation,
        }
        .reduce(relations))
    }

    /// `diag(a, a^2, a^4)` when diagonal without translation, otherwise
    /// `[[row], ...] + (t)`.
    pub fn render(&self) -> String {
        let r = |p: &Polynomial| p.render(&self.params, &[]);
        if self.is_diagonal() && self.translation.iter().all(Poly::is_zero) {
            let d: Vec<String> = (0..self.k()).map(|i| r(&self.linear[i][i])).collect();
            return format!("diag({})", d.join(", "));
        }
        let rows: Vec<String> = self
            .linear
            .iter()
            .map(|row| format!("[{}]", row.iter().map(r).collect::<Vec<_>>().join(", ")))
            .collect();
        let t: Vec<String> = self.translation.iter().map(r).collect();
        format!("[{}] + ({})", rows.join(", "), t.join(", "))
    }
}

fn det(m: &[Vec<Polynomial>], np: usize) -> Polynomial {
    let k = m.len();
    match k {
        0 => Polynomial::one(np, ()),
        1 => m[0][0].clone(),
        _ => {
            let mut acc = Polynomial::zero(np, ());
            for j in 0..k {
                if m[0][j].is_zero() {
                    continue;
                }
                let minor: Vec<Vec<Polynomial>> = m[1..]
                    .iter()
                    .map(|row| {
                        row.iter()
                            .enumerate()
                            .filter(|(c, _)| *c != j)
                            .map(|(_, v)| v.clone())
                            .collect()
                    })
                    .collect();
                let term = &m[0][j] * &det(&minor, np);
                acc = if j % 2 == 0 { &acc + &term } else { &acc - &term };
            }
            acc
        }
    }
}

/// `F ∘ β ∘ F^{-1}` with coefficients polynomial in β's parameters.
pub fn conjugate(
    f: &PolyMap,
    f_inv: &PolyMap,
    beta: &ParametricAffineMap,
    budget: &Budget,
) -> Result<PolyMap<Polynomial>, SymmetryError> {
    if f.dim() != beta.k() || f_inv.dim() != beta.k() {
        return Err(MapError::DimensionMismatch {
            left: f.dim(),
            right: beta.k(),
        }
        .into());
    }
    let np = beta.nparams();
    let lift = |m: &PolyMap| {
        PolyMap::new(m.components().iter().map(|p| p.lift(np)).collect()).expect("square")
    };
    let inner = beta.to_map().compose(&lift(f_inv), budget)?;
    Ok(lift(f).compose(&inner, budget)?)
}

/// One equation per coefficient of a monomial of total degree at least two.
/// With `require_automorphism`, the determinant of the linear part is
/// recorded as a disequality.
pub fn affinity_constraints(m: &PolyMap<Polynomial>, require_automorphism: bool) -> ConstraintSet {
    let np = m
        .components()
        .first()
        .map_or(0, |c| *c.coeff_ctx());
    let mut set = ConstraintSet::new(np);
    for comp in m.components() {
        for (mono, c) in comp.terms() {
            if mono.degree() >= 2 {
                set.add_equation(c.clone());
            }
        }
    }
    if require_automorphism {
        let params: Vec<String> = (0..np).map(|i| format!("p{i}")).collect();
        let lin = ParametricAffineMap::from_map(params, &linear_part(m));
        if let Some(l) = lin {
            set.add_disequality(l.det());
        }
    }
    set
}

fn linear_part(m: &PolyMap<Polynomial>) -> PolyMap<Polynomial> {
    PolyMap::new(
        m.components()
            .iter()
            .map(|c| c.filter_terms(|mono| mono.degree() <= 1))
            .collect(),
    )
    .expect("square")
}

/// Equations saying `m` has the masked shape: each masked linear entry of
/// `m` vanishes.
pub fn shape_constraints(m: &PolyMap<Polynomial>, mask: &AffineMask) -> ConstraintSet {
    let k = m.dim();
    let np = m.components().first().map_or(0, |c| *c.coeff_ctx());
    let mut set = ConstraintSet::new(np);
    for (i, comp) in m.components().iter().enumerate() {
        for j in 0..k {
            if mask.zero[i][j] {
                if let Some(c) = comp.coeff(&Monomial::var(k, j)) {
                    set.add_equation(c.clone());
                }
            }
        }
    }
    set
}
