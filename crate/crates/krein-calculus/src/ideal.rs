//! Zero-dimensional ideal machinery over ℚ + iℚ.
//!
//! Everything in this module is exact: reduced Gröbner bases (graded-lex,
//! x > y) with cofactor tracking back to the original generators, quotient
//! algebras with multiplication matrices, variety solving with exact
//! verification of every candidate point, local primary components Q(a) by
//! stabilization of powers of the maximal ideal at a, radicals P(a), local
//! algebras 𝒜(a) = ℂ\[x,y\]/(P(a)·Q(a)) and ℬ(a) = ℂ\[x,y\]/Q(a) with coset
//! arithmetic, Chinese-remainder interpolation, and the constrained
//! cofactor lift p = Σ u_j p_j with u_j vanishing on a prescribed set of
//! variety points.
//!
//! Floats enter exactly once: eigenvalues of the multiplication matrices
//! propose variety points, which are snapped to Gaussian rationals and then
//! verified exactly. A failed verification aborts rather than letting
//! floating point contaminate the exact layer.

use crate::error::{Error, Result};
use crate::linalg::CMatrix;
use crate::poly::{Exp, Poly2, VarPair};
use crate::rng::SplitMix64;
use crate::scalar::{snap_rational, GaussianRational};
use num_complex::Complex64;
use std::sync::Arc;

// ---------------------------------------------------------------------------
// Exact dense matrices over the Gaussian rationals
// ---------------------------------------------------------------------------

/// Dense exact matrix used for multiplication matrices, coset systems and
/// the CRT interpolation system.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct QMatrix {
    rows: usize,
    cols: usize,
    data: Vec<GaussianRational>,
}

impl QMatrix {
    pub fn zeros(rows: usize, cols: usize) -> Self {
        Self { rows, cols, data: vec![GaussianRational::zero(); rows * cols] }
    }

    pub fn identity(n: usize) -> Self {
        let mut m = Self::zeros(n, n);
        for k in 0..n {
            m.set(k, k, GaussianRational::one());
        }
        m
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn get(&self, i: usize, j: usize) -> &GaussianRational {
        &self.data[i * self.cols + j]
    }

    pub fn set(&mut self, i: usize, j: usize, v: GaussianRational) {
        self.data[i * self.cols + j] = v;
    }

    pub fn matmul(&self, rhs: &Self) -> Self {
        assert_eq!(self.cols, rhs.rows);
        let mut out = Self::zeros(self.rows, rhs.cols);
        for i in 0..self.rows {
            for k in 0..self.cols {
                let a = self.get(i, k);
                if a.is_zero() {
                    continue;
                }
                for j in 0..rhs.cols {
                    let add = a * rhs.get(k, j);
                    let cur = out.get(i, j) + &add;
                    out.set(i, j, cur);
                }
            }
        }
        out
    }

    pub fn matvec(&self, v: &[GaussianRational]) -> Vec<GaussianRational> {
        assert_eq!(self.cols, v.len());
        (0..self.rows)
            .map(|i| {
                let mut acc = GaussianRational::zero();
                for (j, vj) in v.iter().enumerate() {
                    if !vj.is_zero() {
                        acc = &acc + &(self.get(i, j) * vj);
                    }
                }
                acc
            })
            .collect()
    }

    /// Exact Gaussian elimination; `None` when the matrix is singular.
    pub fn solve(&self, rhs: &Self) -> Option<Self> {
        assert_eq!(self.rows, self.cols, "solve needs a square matrix");
        assert_eq!(self.rows, rhs.rows);
        let n = self.rows;
        let mut a = self.clone();
        let mut b = rhs.clone();
        for col in 0..n {
            let pivot_row = (col..n).find(|&r| !a.get(r, col).is_zero())?;
            if pivot_row != col {
                for j in 0..n {
                    let tmp = a.get(col, j).clone();
                    a.set(col, j, a.get(pivot_row, j).clone());
                    a.set(pivot_row, j, tmp);
                }
                for j in 0..b.cols {
                    let tmp = b.get(col, j).clone();
                    b.set(col, j, b.get(pivot_row, j).clone());
                    b.set(pivot_row, j, tmp);
                }
            }
            let inv = a.get(col, col).inv().expect("nonzero pivot");
            for j in 0..n {
                let v = a.get(col, j) * &inv;
                a.set(col, j, v);
            }
            for j in 0..b.cols {
                let v = b.get(col, j) * &inv;
                b.set(col, j, v);
            }
            for r in 0..n {
                if r == col || a.get(r, col).is_zero() {
                    continue;
                }
                let f = a.get(r, col).clone();
                for j in 0..n {
                    let v = a.get(r, j) - &(&f * a.get(col, j));
                    a.set(r, j, v);
                }
                for j in 0..b.cols {
                    let v = b.get(r, j) - &(&f * b.get(col, j));
                    b.set(r, j, v);
                }
            }
        }
        Some(b)
    }

    pub fn inverse(&self) -> Option<Self> {
        self.solve(&Self::identity(self.rows))
    }

    pub fn to_cmatrix(&self) -> CMatrix {
        CMatrix::from_fn(self.rows, self.cols, |i, j| self.get(i, j).to_complex())
    }
}

// ---------------------------------------------------------------------------
// Division and Buchberger with cofactor tracking
// ---------------------------------------------------------------------------

/// Multivariate division: returns (quotients, remainder) with
/// `p = Σ quotients[k]·basis[k] + remainder` and no remainder term divisible
/// by any basis leading term. Deterministic: the leading reducible term is
/// always cancelled against the first matching basis element.
fn divide(p: &Poly2, basis: &[Poly2]) -> (Vec<Poly2>, Poly2) {
    let vars = p.vars();
    let mut quotients = vec![Poly2::zero(vars); basis.len()];
    let mut remainder = Poly2::zero(vars);
    let mut work = p.clone();
    while let Some(lt) = work.leading_exp() {
        let lc = work.leading_coeff().expect("nonzero leading coefficient");
        let mut reduced = false;
        for (k, g) in basis.iter().enumerate() {
            let Some(glt) = g.leading_exp() else { continue };
            if let Some(shift) = lt.checked_sub(&glt) {
                let glc = g.leading_coeff().expect("nonzero leading coefficient");
                let factor = &lc / &glc;
                work = work.sub(&g.mul_term(shift, &factor));
                quotients[k] = quotients[k].add(&Poly2::monomial(shift.i, shift.j, factor, vars));
                reduced = true;
                break;
            }
        }
        if !reduced {
            let mono = Poly2::monomial(lt.i, lt.j, lc, vars);
            remainder = remainder.add(&mono);
            work = work.sub(&mono);
        }
    }
    (quotients, remainder)
}

#[derive(Debug, Clone)]
struct Tracked {
    poly: Poly2,
    /// Expression of `poly` as an exact combination of the input generators.
    cof: Vec<Poly2>,
}

impl Tracked {
    fn scale(&self, c: &GaussianRational) -> Self {
        Self {
            poly: self.poly.scale(c),
            cof: self.cof.iter().map(|q| q.scale(c)).collect(),
        }
    }

    fn sub_mul(&self, shift: Exp, factor: &GaussianRational, other: &Tracked) -> Self {
        Self {
            poly: self.poly.sub(&other.poly.mul_term(shift, factor)),
            cof: self
                .cof
                .iter()
                .zip(&other.cof)
                .map(|(a, b)| a.sub(&b.mul_term(shift, factor)))
                .collect(),
        }
    }
}

/// Full reduction of a tracked element against a tracked basis.
fn reduce_tracked(mut elem: Tracked, basis: &[Tracked]) -> Tracked {
    let vars = elem.poly.vars();
    let mut remainder = Poly2::zero(vars);
    while let Some(lt) = elem.poly.leading_exp() {
        let lc = elem.poly.leading_coeff().expect("nonzero");
        let mut reduced = false;
        for g in basis {
            let Some(glt) = g.poly.leading_exp() else { continue };
            if let Some(shift) = lt.checked_sub(&glt) {
                let glc = g.poly.leading_coeff().expect("nonzero");
                let factor = &lc / &glc;
                elem = elem.sub_mul(shift, &factor, g);
                reduced = true;
                break;
            }
        }
        if !reduced {
            let mono = Poly2::monomial(lt.i, lt.j, lc, vars);
            remainder = remainder.add(&mono);
            elem.poly = elem.poly.sub(&mono);
        }
    }
    Tracked { poly: remainder, cof: elem.cof }
}

/// Ideal data: user generators, the reduced Gröbner basis (graded-lex,
/// first variable > second), and for every basis element its exact
/// expression as a combination of the generators.
#[derive(Debug, Clone)]
pub struct IdealData {
    generators: Vec<Poly2>,
    groebner: Vec<Poly2>,
    cofactors: Vec<Vec<Poly2>>,
}

impl PartialEq for IdealData {
    /// Ideals compare by their reduced Gröbner bases, which are canonical.
    fn eq(&self, other: &Self) -> bool {
        self.groebner == other.groebner
    }
}
impl Eq for IdealData {}

/// Reduced Gröbner basis with cofactor tracking (Buchberger).
pub fn groebner(gens: &[Poly2]) -> IdealData {
    buchberger(gens, true)
}

/// Reduced Gröbner basis without the cofactor bookkeeping; used for
/// intermediate ideals (local components, products, interpolation moduli)
/// where only normal forms matter. The result has an empty cofactor table.
pub fn groebner_untracked(gens: &[Poly2]) -> IdealData {
    buchberger(gens, false)
}

fn buchberger(gens: &[Poly2], tracked: bool) -> IdealData {
    assert!(!gens.is_empty(), "groebner needs at least one generator");
    let vars = gens[0].vars();
    assert!(gens.iter().all(|g| g.vars() == vars), "mixed variable tags");
    let m = gens.len();
    let unit_cof = |k: usize| -> Vec<Poly2> {
        if !tracked {
            return Vec::new();
        }
        (0..m)
            .map(|j| if j == k { Poly2::one(vars) } else { Poly2::zero(vars) })
            .collect()
    };

    let mut basis: Vec<Tracked> = Vec::new();
    for (k, g) in gens.iter().enumerate() {
        if !g.is_zero() {
            basis.push(Tracked { poly: g.clone(), cof: unit_cof(k) });
        }
    }
    if basis.is_empty() {
        return IdealData { generators: gens.to_vec(), groebner: Vec::new(), cofactors: Vec::new() };
    }

    let pair_lcm = |basis: &[Tracked], i: usize, j: usize| -> Exp {
        basis[i]
            .poly
            .leading_exp()
            .expect("nonzero")
            .lcm(&basis[j].poly.leading_exp().expect("nonzero"))
    };
    let mut pairs: Vec<(usize, usize)> = Vec::new();
    for i in 0..basis.len() {
        for j in i + 1..basis.len() {
            pairs.push((i, j));
        }
    }
    while !pairs.is_empty() {
        // normal selection strategy: treat the pair with the smallest lcm
        // first; together with the chain criterion below this keeps the
        // number of reductions and the coefficient growth in check
        let best = pairs
            .iter()
            .enumerate()
            .min_by(|(_, &(i1, j1)), (_, &(i2, j2))| {
                pair_lcm(&basis, i1, j1).cmp(&pair_lcm(&basis, i2, j2))
            })
            .map(|(idx, _)| idx)
            .expect("nonempty");
        let (i, j) = pairs.swap_remove(best);
        let (lti, ltj) = (
            basis[i].poly.leading_exp().expect("nonzero"),
            basis[j].poly.leading_exp().expect("nonzero"),
        );
        let lcm = lti.lcm(&ltj);
        // product criterion: coprime leading terms reduce to 0
        if lcm.i == lti.i + ltj.i && lcm.j == lti.j + ltj.j {
            continue;
        }
        // chain criterion: a third element dividing the lcm whose pairs with
        // i and j were both already treated makes this pair redundant
        let key = |a: usize, b: usize| if a < b { (a, b) } else { (b, a) };
        let redundant = (0..basis.len()).any(|k| {
            k != i
                && k != j
                && basis[k].poly.leading_exp().expect("nonzero").divides(&lcm)
                && !pairs.contains(&key(i, k))
                && !pairs.contains(&key(j, k))
        });
        if redundant {
            continue;
        }
        let (lci, lcj) = (
            basis[i].poly.leading_coeff().expect("nonzero"),
            basis[j].poly.leading_coeff().expect("nonzero"),
        );
        let si = lcm.checked_sub(&lti).expect("lcm divisible");
        let sj = lcm.checked_sub(&ltj).expect("lcm divisible");
        let inv_i = lci.inv().expect("nonzero leading coefficient");
        let inv_j = lcj.inv().expect("nonzero leading coefficient");
        let left = basis[i].scale(&inv_i);
        let right = basis[j].scale(&inv_j);
        let one = GaussianRational::one();
        let spoly = Tracked {
            poly: left.poly.mul_term(si, &one).sub(&right.poly.mul_term(sj, &one)),
            cof: left
                .cof
                .iter()
                .zip(&right.cof)
                .map(|(a, b)| a.mul_term(si, &one).sub(&b.mul_term(sj, &one)))
                .collect(),
        };
        let red = reduce_tracked(spoly, &basis);
        if !red.poly.is_zero() {
            let lc = red.poly.leading_coeff().expect("nonzero");
            let red = red.scale(&lc.inv().expect("nonzero"));
            let new_idx = basis.len();
            for k in 0..new_idx {
                pairs.push((k, new_idx));
            }
            basis.push(red);
        }
    }

    // Minimalize: drop elements whose leading term is divisible by another's.
    let mut keep: Vec<bool> = vec![true; basis.len()];
    for i in 0..basis.len() {
        if !keep[i] {
            continue;
        }
        let lti = basis[i].poly.leading_exp().unwrap();
        for j in 0..basis.len() {
            if i == j || !keep[j] {
                continue;
            }
            let ltj = basis[j].poly.leading_exp().unwrap();
            if ltj.divides(&lti) && (ltj != lti || j < i) {
                keep[i] = false;
                break;
            }
        }
    }
    let mut minimal: Vec<Tracked> = basis
        .into_iter()
        .zip(keep)
        .filter_map(|(t, k)| if k { Some(t) } else { None })
        .collect();

    // Inter-reduce tails and normalize to monic form, repeating until the
    // basis is stable; the fixed point is the unique reduced basis.
    loop {
        let snapshot = minimal.clone();
        let mut changed = false;
        for (idx, elem) in minimal.iter_mut().enumerate() {
            let others: Vec<Tracked> = snapshot
                .iter()
                .enumerate()
                .filter_map(|(k, t)| if k != idx { Some(t.clone()) } else { None })
                .collect();
            let red = reduce_tracked(elem.clone(), &others);
            let lc = red.poly.leading_coeff().expect("minimal basis has nonzero elements");
            let red = red.scale(&lc.inv().expect("nonzero"));
            if red.poly != elem.poly {
                changed = true;
            }
            *elem = red;
        }
        if !changed {
            break;
        }
    }

    minimal.sort_by_key(|t| t.poly.leading_exp().unwrap());
    let groebner: Vec<Poly2> = minimal.iter().map(|t| t.poly.clone()).collect();
    let cofactors: Vec<Vec<Poly2>> = minimal.into_iter().map(|t| t.cof).collect();
    IdealData { generators: gens.to_vec(), groebner, cofactors }
}

impl IdealData {
    pub fn generators(&self) -> &[Poly2] {
        &self.generators
    }

    pub fn groebner_basis(&self) -> &[Poly2] {
        &self.groebner
    }

    pub fn cofactors(&self) -> &[Vec<Poly2>] {
        &self.cofactors
    }

    pub fn vars(&self) -> VarPair {
        self.generators.first().map_or(VarPair::Xy, |g| g.vars())
    }

    /// True for the ideal with empty Gröbner basis (all generators zero).
    pub fn is_zero_ideal(&self) -> bool {
        self.groebner.is_empty()
    }

    pub fn is_unit_ideal(&self) -> bool {
        self.groebner.len() == 1 && self.groebner[0].leading_exp() == Some(Exp::new(0, 0))
    }

    /// Normal form (unique remainder) modulo the reduced basis.
    pub fn normal_form(&self, p: &Poly2) -> Poly2 {
        divide(p, &self.groebner).1
    }

    pub fn contains(&self, p: &Poly2) -> bool {
        self.normal_form(p).is_zero()
    }

    /// Division against the Gröbner basis, recombined into cofactors over
    /// the original generators: returns (u, r) with p = Σ u_j·gen_j + r.
    /// Requires a tracked basis (see `groebner`).
    pub fn generator_cofactors(&self, p: &Poly2) -> (Vec<Poly2>, Poly2) {
        assert!(
            self.cofactors.len() == self.groebner.len(),
            "generator_cofactors needs a cofactor-tracked basis"
        );
        let vars = self.vars();
        let (q, r) = divide(p, &self.groebner);
        let m = self.generators.len();
        let mut u = vec![Poly2::zero(vars); m];
        for (k, qk) in q.iter().enumerate() {
            if qk.is_zero() {
                continue;
            }
            for (j, slot) in u.iter_mut().enumerate() {
                if !self.cofactors[k][j].is_zero() {
                    *slot = slot.add(&qk.mul(&self.cofactors[k][j]));
                }
            }
        }
        (u, r)
    }

    /// Leading terms contain a pure power of each variable; equivalent to
    /// dim ℂ\[vars\]/I < ∞.
    pub fn is_zero_dimensional(&self) -> bool {
        let pure_x = self.groebner.iter().any(|g| g.leading_exp().is_some_and(|e| e.j == 0));
        let pure_y = self.groebner.iter().any(|g| g.leading_exp().is_some_and(|e| e.i == 0));
        pure_x && pure_y
    }

    /// Exact common-zero test of all generators.
    pub fn vanishes_at(&self, x: &GaussianRational, y: &GaussianRational) -> bool {
        self.generators.iter().all(|g| g.eval_exact(x, y).is_zero())
    }

    /// Image of the ideal under coefficient conjugation.
    pub fn sharp(&self) -> IdealData {
        let gens: Vec<Poly2> = self.generators.iter().map(|g| g.sharp()).collect();
        groebner_untracked(&gens)
    }
}

/// The ideal generated by all pairwise products of the two Gröbner bases.
pub fn product_ideal(p: &IdealData, q: &IdealData) -> IdealData {
    let mut gens = Vec::new();
    for a in &p.groebner {
        for b in &q.groebner {
            gens.push(a.mul(b));
        }
    }
    if gens.is_empty() {
        // product with the zero ideal
        gens.push(Poly2::zero(p.vars()));
    }
    groebner_untracked(&gens)
}

// ---------------------------------------------------------------------------
// Quotient algebras and cosets
// ---------------------------------------------------------------------------

/// ℂ\[x,y\]/I for a zero-dimensional ideal: standard-monomial basis and exact
/// multiplication matrices.
#[derive(Debug, Clone)]
pub struct QuotientAlgebra {
    ideal: IdealData,
    basis: Vec<Exp>,
    mult_x: QMatrix,
    mult_y: QMatrix,
}

impl PartialEq for QuotientAlgebra {
    fn eq(&self, other: &Self) -> bool {
        self.ideal == other.ideal
    }
}
impl Eq for QuotientAlgebra {}

/// Builds the quotient algebra; errors when the ideal is not
/// zero-dimensional.
pub fn quotient_algebra(ideal: &IdealData) -> Result<QuotientAlgebra> {
    if !ideal.is_zero_dimensional() {
        return Err(Error::NotZeroDimensional);
    }
    let leading: Vec<Exp> = ideal.groebner.iter().filter_map(|g| g.leading_exp()).collect();
    let bound_x = leading.iter().filter(|e| e.j == 0).map(|e| e.i).min().unwrap_or(0);
    let bound_y = leading.iter().filter(|e| e.i == 0).map(|e| e.j).min().unwrap_or(0);
    let mut basis: Vec<Exp> = Vec::new();
    for i in 0..bound_x {
        for j in 0..bound_y {
            let e = Exp::new(i, j);
            if !leading.iter().any(|lt| lt.divides(&e)) {
                basis.push(e);
            }
        }
    }
    basis.sort();
    let dim = basis.len();
    let vars = ideal.vars();
    let coords_of_nf = |p: &Poly2| -> Vec<GaussianRational> {
        let mut v = vec![GaussianRational::zero(); dim];
        for (e, c) in p.terms() {
            let k = basis
                .iter()
                .position(|b| b == e)
                .expect("normal form supported on standard monomials");
            v[k] = c.clone();
        }
        v
    };
    let mut mult_x = QMatrix::zeros(dim, dim);
    let mut mult_y = QMatrix::zeros(dim, dim);
    for (k, e) in basis.iter().enumerate() {
        let xm = ideal.normal_form(&Poly2::monomial(e.i + 1, e.j, GaussianRational::one(), vars));
        let ym = ideal.normal_form(&Poly2::monomial(e.i, e.j + 1, GaussianRational::one(), vars));
        for (idx, val) in coords_of_nf(&xm).into_iter().enumerate() {
            mult_x.set(idx, k, val);
        }
        for (idx, val) in coords_of_nf(&ym).into_iter().enumerate() {
            mult_y.set(idx, k, val);
        }
    }
    debug_assert_eq!(mult_x.matmul(&mult_y), mult_y.matmul(&mult_x));
    Ok(QuotientAlgebra { ideal: ideal.clone(), basis, mult_x, mult_y })
}

impl QuotientAlgebra {
    pub fn ideal(&self) -> &IdealData {
        &self.ideal
    }

    pub fn dim(&self) -> usize {
        self.basis.len()
    }

    /// Standard monomials (ascending graded-lex).
    pub fn basis(&self) -> &[Exp] {
        &self.basis
    }

    pub fn mult_x(&self) -> &QMatrix {
        &self.mult_x
    }

    pub fn mult_y(&self) -> &QMatrix {
        &self.mult_y
    }

    pub fn coords_of(&self, p: &Poly2) -> Vec<GaussianRational> {
        let nf = self.ideal.normal_form(p);
        let mut v = vec![GaussianRational::zero(); self.dim()];
        for (e, c) in nf.terms() {
            let k = self
                .basis
                .iter()
                .position(|b| b == e)
                .expect("normal form supported on standard monomials");
            v[k] = c.clone();
        }
        v
    }

    pub fn poly_of_coords(&self, coords: &[GaussianRational]) -> Poly2 {
        let vars = self.ideal.vars();
        let mut p = Poly2::zero(vars);
        for (k, c) in coords.iter().enumerate() {
            if !c.is_zero() {
                let e = self.basis[k];
                p = p.add(&Poly2::monomial(e.i, e.j, c.clone(), vars));
            }
        }
        p
    }

    /// Matrix of multiplication by (the class of) p in the standard basis.
    pub fn mult_by(&self, p: &Poly2) -> QMatrix {
        let nf = self.ideal.normal_form(p);
        let dim = self.dim();
        let mut acc = QMatrix::zeros(dim, dim);
        let di = nf.deg_x() as usize;
        let dj = nf.deg_y() as usize;
        let mut pow_x = vec![QMatrix::identity(dim)];
        for k in 1..=di {
            let next = pow_x[k - 1].matmul(&self.mult_x);
            pow_x.push(next);
        }
        let mut pow_y = vec![QMatrix::identity(dim)];
        for k in 1..=dj {
            let next = pow_y[k - 1].matmul(&self.mult_y);
            pow_y.push(next);
        }
        for (e, c) in nf.terms() {
            let term = pow_x[e.i as usize].matmul(&pow_y[e.j as usize]);
            for i in 0..dim {
                for j in 0..dim {
                    let v = acc.get(i, j) + &(c * term.get(i, j));
                    acc.set(i, j, v);
                }
            }
        }
        acc
    }

    pub fn unit_coset(self: &Arc<Self>) -> Coset {
        Coset::from_poly(&Poly2::one(self.ideal.vars()), self)
    }

    pub fn zero_coset(self: &Arc<Self>) -> Coset {
        Coset { algebra: Arc::clone(self), coords: vec![GaussianRational::zero(); self.dim()] }
    }
}

/// A residue class in a quotient algebra, stored as exact coordinates of
/// its normal form over the standard monomials.
#[derive(Debug, Clone)]
pub struct Coset {
    algebra: Arc<QuotientAlgebra>,
    coords: Vec<GaussianRational>,
}

impl PartialEq for Coset {
    fn eq(&self, other: &Self) -> bool {
        self.algebra.as_ref() == other.algebra.as_ref() && self.coords == other.coords
    }
}
impl Eq for Coset {}

impl Coset {
    pub fn from_poly(p: &Poly2, algebra: &Arc<QuotientAlgebra>) -> Self {
        Self { algebra: Arc::clone(algebra), coords: algebra.coords_of(p) }
    }

    pub fn from_coords(coords: Vec<GaussianRational>, algebra: &Arc<QuotientAlgebra>) -> Self {
        assert_eq!(coords.len(), algebra.dim());
        Self { algebra: Arc::clone(algebra), coords }
    }

    pub fn algebra(&self) -> &Arc<QuotientAlgebra> {
        &self.algebra
    }

    pub fn coords(&self) -> &[GaussianRational] {
        &self.coords
    }

    pub fn is_zero(&self) -> bool {
        self.coords.iter().all(|c| c.is_zero())
    }

    /// Canonical representative (the normal form).
    pub fn representative(&self) -> Poly2 {
        self.algebra.poly_of_coords(&self.coords)
    }

    fn check_same_algebra(&self, rhs: &Self) -> Result<()> {
        if self.algebra.as_ref() != rhs.algebra.as_ref() {
            return Err(Error::AlgebraMismatch);
        }
        Ok(())
    }

    pub fn add(&self, rhs: &Self) -> Result<Self> {
        self.check_same_algebra(rhs)?;
        let coords = self.coords.iter().zip(&rhs.coords).map(|(a, b)| a + b).collect();
        Ok(Self { algebra: Arc::clone(&self.algebra), coords })
    }

    pub fn sub(&self, rhs: &Self) -> Result<Self> {
        self.check_same_algebra(rhs)?;
        let coords = self.coords.iter().zip(&rhs.coords).map(|(a, b)| a - b).collect();
        Ok(Self { algebra: Arc::clone(&self.algebra), coords })
    }

    pub fn scale(&self, c: &GaussianRational) -> Self {
        Self {
            algebra: Arc::clone(&self.algebra),
            coords: self.coords.iter().map(|a| a * c).collect(),
        }
    }

    /// Product via the multiplication matrices.
    pub fn mul(&self, rhs: &Self) -> Result<Self> {
        self.check_same_algebra(rhs)?;
        let m = self.algebra.mult_by(&self.representative());
        Ok(Self { algebra: Arc::clone(&self.algebra), coords: m.matvec(&rhs.coords) })
    }

    /// Value of the representative at a point (exact).
    pub fn value_at(&self, x: &GaussianRational, y: &GaussianRational) -> GaussianRational {
        self.representative().eval_exact(x, y)
    }

    /// Inverse coset: solves the exact dim×dim system (self · u = 1).
    pub fn invert(&self) -> Result<Self> {
        let m = self.algebra.mult_by(&self.representative());
        let unit = self.algebra.coords_of(&Poly2::one(self.algebra.ideal.vars()));
        let mut rhs = QMatrix::zeros(self.algebra.dim(), 1);
        for (i, v) in unit.into_iter().enumerate() {
            rhs.set(i, 0, v);
        }
        let sol = m.solve(&rhs).ok_or(Error::NotInvertible)?;
        let coords = (0..self.algebra.dim()).map(|i| sol.get(i, 0).clone()).collect();
        Ok(Self { algebra: Arc::clone(&self.algebra), coords })
    }

    /// Coefficient-conjugate coset, mapped into the algebra at the
    /// conjugated point. For a #-invariant modulus (real point) the target
    /// is the source algebra and the map is coordinate conjugation.
    pub fn sharp_into(&self, target: &Arc<QuotientAlgebra>) -> Coset {
        Coset::from_poly(&self.representative().sharp(), target)
    }

    /// Pass from 𝒜(w) = ℂ\[x,y\]/(P·Q) to ℬ(w) = ℂ\[x,y\]/Q by reducing the
    /// representative modulo the larger ideal.
    pub fn project_into(&self, target: &Arc<QuotientAlgebra>) -> Result<Coset> {
        // well-defined only when the source modulus is contained in the
        // target modulus
        for g in &self.algebra.ideal.groebner {
            if !target.ideal.contains(g) {
                return Err(Error::AlgebraMismatch);
            }
        }
        Ok(Coset::from_poly(&self.representative(), target))
    }
}

// ---------------------------------------------------------------------------
// Variety points with local data
// ---------------------------------------------------------------------------

/// A point of the variety with its local primary component Q(a), radical
/// P(a), nilpotency depths and local algebras.
#[derive(Debug, Clone)]
pub struct VarietyPoint {
    pub x: GaussianRational,
    pub y: GaussianRational,
    pub is_real: bool,
    pub local_q: IdealData,
    pub local_p: IdealData,
    pub local_pq: IdealData,
    pub d_x: u32,
    pub d_y: u32,
    /// 𝒜(a) = ℂ\[x,y\]/(P(a)·Q(a))
    pub algebra_a: Arc<QuotientAlgebra>,
    /// ℬ(a) = ℂ\[x,y\]/Q(a)
    pub algebra_b: Arc<QuotientAlgebra>,
}

impl VarietyPoint {
    /// The complex number a_x + i·a_y (for real points: the spectral
    /// position of the point inside ℂ).
    pub fn as_complex(&self) -> Complex64 {
        self.x.to_complex() + Complex64::new(0.0, 1.0) * self.y.to_complex()
    }

    /// Float images of the two coordinates.
    pub fn coords_complex(&self) -> (Complex64, Complex64) {
        (self.x.to_complex(), self.y.to_complex())
    }

    pub fn same_coords(&self, x: &GaussianRational, y: &GaussianRational) -> bool {
        &self.x == x && &self.y == y
    }
}

/// Q(a) by stabilization: the least k with I + M_a^k = I + M_a^{k+1}, where
/// M_a = ⟨x - a_x, y - a_y⟩; equality is decided by comparing reduced
/// Gröbner bases, which are canonical.
pub fn local_component(
    ideal: &IdealData,
    quotient_dim: usize,
    x: &GaussianRational,
    y: &GaussianRational,
) -> Result<IdealData> {
    if !ideal.vanishes_at(x, y) {
        return Err(Error::NotInVariety);
    }
    let vars = ideal.vars();
    let lin_x = Poly2::var_first(vars).sub(&Poly2::constant(x.clone(), vars));
    let lin_y = Poly2::var_second(vars).sub(&Poly2::constant(y.clone(), vars));
    let augmented = |k: u32| -> IdealData {
        let mut gens = ideal.generators.to_vec();
        for s in 0..=k {
            gens.push(lin_x.pow(s).mul(&lin_y.pow(k - s)));
        }
        groebner_untracked(&gens)
    };
    let mut prev = augmented(1);
    for k in 2..=(quotient_dim as u32 + 1) {
        let next = augmented(k);
        if next == prev {
            return Ok(prev);
        }
        prev = next;
    }
    Ok(prev)
}

/// Nilpotency depth: least m with (v - a)^m in the local component.
fn depth(local_q: &IdealData, linear: &Poly2, bound: u32) -> u32 {
    for m in 1..=bound {
        if local_q.contains(&linear.pow(m)) {
            return m;
        }
    }
    bound + 1
}

fn build_point(
    ideal: &IdealData,
    quotient_dim: usize,
    x: GaussianRational,
    y: GaussianRational,
) -> Result<VarietyPoint> {
    let vars = ideal.vars();
    let local_q = local_component(ideal, quotient_dim, &x, &y)?;
    let lin_x = Poly2::var_first(vars).sub(&Poly2::constant(x.clone(), vars));
    let lin_y = Poly2::var_second(vars).sub(&Poly2::constant(y.clone(), vars));
    let local_p = groebner_untracked(&[lin_x.clone(), lin_y.clone()]);
    let local_pq = product_ideal(&local_p, &local_q);
    let bound = quotient_dim as u32 + 1;
    let d_x = depth(&local_q, &lin_x, bound);
    let d_y = depth(&local_q, &lin_y, bound);
    let algebra_b = Arc::new(quotient_algebra(&local_q)?);
    let algebra_a = Arc::new(quotient_algebra(&local_pq)?);
    let is_real = x.is_real() && y.is_real();
    Ok(VarietyPoint {
        x,
        y,
        is_real,
        local_q,
        local_p,
        local_pq,
        d_x,
        d_y,
        algebra_a,
        algebra_b,
    })
}

/// Candidate coordinate pairs by joint triangularization of a random
/// combination t·M_x + (1-t)·M_y (complex Schur), reading paired diagonals.
fn joint_candidates(mx: &CMatrix, my: &CMatrix, t: Complex64) -> Result<Vec<(Complex64, Complex64)>> {
    let m = mx.scale(t).add(&my.scale(Complex64::new(1.0, 0.0) - t));
    let (q, _) = m.schur()?;
    let qc = q.conj_transpose();
    let dx = qc.matmul(mx).matmul(&q);
    let dy = qc.matmul(my).matmul(&q);
    let n = dx.rows();
    Ok((0..n).map(|k| (dx[(k, k)], dy[(k, k)])).collect())
}

/// Variety of a zero-dimensional ideal: float eigenvalue candidates snapped
/// to Gaussian rationals, each verified exactly, each equipped with local
/// data, and the whole set gated by the dimension count
/// Σ dim ℬ(a) = dim ℂ\[x,y\]/I.
pub fn variety(ideal: &IdealData, algebra: &QuotientAlgebra, snap_tol: f64) -> Result<Vec<VarietyPoint>> {
    let dim = algebra.dim();
    if dim == 0 {
        return Ok(Vec::new());
    }
    let mx = algebra.mult_x().to_cmatrix();
    let my = algebra.mult_y().to_cmatrix();

    let mut rng = SplitMix64::new(0x5eed_0f1d_ea17);
    let mut first_failure: Option<(f64, f64)> = None;

    let try_candidates = |cands: Vec<(Complex64, Complex64)>,
                              first_failure: &mut Option<(f64, f64)>|
     -> Result<Option<Vec<VarietyPoint>>> {
        let mut exact: Vec<(GaussianRational, GaussianRational)> = Vec::new();
        for (cx, cy) in cands {
            let snapped = (
                snap_rational(cx.re, snap_tol),
                snap_rational(cx.im, snap_tol),
                snap_rational(cy.re, snap_tol),
                snap_rational(cy.im, snap_tol),
            );
            let (Some(xr), Some(xi), Some(yr), Some(yi)) = snapped else {
                if first_failure.is_none() {
                    *first_failure = Some((cx.re, cy.re));
                }
                continue;
            };
            let gx = GaussianRational::new(xr, xi);
            let gy = GaussianRational::new(yr, yi);
            if !ideal.vanishes_at(&gx, &gy) {
                if first_failure.is_none() {
                    *first_failure = Some((cx.re, cy.re));
                }
                continue;
            }
            if !exact.iter().any(|(a, b)| a == &gx && b == &gy) {
                exact.push((gx, gy));
            }
        }
        // deterministic order
        exact.sort_by(|a, b| {
            let key = |g: &(GaussianRational, GaussianRational)| {
                (g.0.re.clone(), g.0.im.clone(), g.1.re.clone(), g.1.im.clone())
            };
            key(a).cmp(&key(b))
        });
        let mut points = Vec::with_capacity(exact.len());
        for (gx, gy) in exact {
            points.push(build_point(ideal, dim, gx, gy)?);
        }
        let local_sum: usize = points.iter().map(|p| p.algebra_b.dim()).sum();
        if local_sum == dim {
            Ok(Some(points))
        } else {
            Ok(None)
        }
    };

    // joint triangularization with a few deterministic draws of t
    for _ in 0..4 {
        let t = Complex64::new(0.25 + 0.5 * rng.next_f64(), 0.25 + 0.5 * rng.next_f64());
        let cands = joint_candidates(&mx, &my, t)?;
        if let Some(points) = try_candidates(cands, &mut first_failure)? {
            return Ok(points);
        }
    }
    // fallback: pair every eigenvalue of M_x with every eigenvalue of M_y;
    // the exact vanishing test discards false pairs.
    let ex = mx.eigenvalues()?;
    let ey = my.eigenvalues()?;
    let mut cross = Vec::with_capacity(ex.len() * ey.len());
    for &a in &ex {
        for &b in &ey {
            cross.push((a, b));
        }
    }
    if let Some(points) = try_candidates(cross, &mut first_failure)? {
        return Ok(points);
    }
    match first_failure {
        Some((x, y)) => Err(Error::NonRationalVarietyPoint { x, y }),
        None => Err(Error::MultiplicityMismatch { local: 0, total: dim }),
    }
}

// ---------------------------------------------------------------------------
// CRT interpolation and constrained membership lifting
// ---------------------------------------------------------------------------

/// Precomputed Chinese-remainder solver for a fixed family of pairwise
/// comaximal moduli (local component ideals at distinct points): finds the
/// unique normal-form polynomial with prescribed residues.
#[derive(Debug, Clone)]
pub struct CrtSolver {
    moduli: Vec<Arc<QuotientAlgebra>>,
    joint: Arc<QuotientAlgebra>,
    /// Exact inverse of the evaluation matrix (joint basis → stacked local
    /// coordinates).
    inverse: QMatrix,
}

impl CrtSolver {
    /// Builds the joint ideal by folding products of the moduli. Fine for a
    /// handful of small moduli; when a cheaper presentation of the joint
    /// ideal is known, use `with_joint`.
    pub fn new(moduli: Vec<Arc<QuotientAlgebra>>) -> Result<Self> {
        assert!(!moduli.is_empty(), "CRT needs at least one modulus");
        let mut joint_ideal = moduli[0].ideal().clone();
        for m in moduli.iter().skip(1) {
            joint_ideal = product_ideal(&joint_ideal, m.ideal());
        }
        let joint = Arc::new(quotient_algebra(&joint_ideal)?);
        Self::with_joint(moduli, joint)
    }

    /// Uses a precomputed quotient algebra of the joint ideal
    /// (= the intersection of the moduli; the dimension count is verified,
    /// and a singular evaluation system is rejected).
    pub fn with_joint(moduli: Vec<Arc<QuotientAlgebra>>, joint: Arc<QuotientAlgebra>) -> Result<Self> {
        assert!(!moduli.is_empty(), "CRT needs at least one modulus");
        let total: usize = moduli.iter().map(|m| m.dim()).sum();
        if total != joint.dim() {
            return Err(Error::MultiplicityMismatch { local: total, total: joint.dim() });
        }
        let vars = joint.ideal().vars();
        let mut eval = QMatrix::zeros(total, total);
        for (col, e) in joint.basis().iter().enumerate() {
            let mono = Poly2::monomial(e.i, e.j, GaussianRational::one(), vars);
            let mut row0 = 0;
            for m in &moduli {
                for (r, v) in m.coords_of(&mono).into_iter().enumerate() {
                    eval.set(row0 + r, col, v);
                }
                row0 += m.dim();
            }
        }
        let inverse = eval.inverse().ok_or(Error::BadInterpolationTargets(
            "evaluation system is singular; moduli are not comaximal".into(),
        ))?;
        Ok(Self { moduli, joint, inverse })
    }

    pub fn moduli(&self) -> &[Arc<QuotientAlgebra>] {
        &self.moduli
    }

    pub fn joint_algebra(&self) -> &Arc<QuotientAlgebra> {
        &self.joint
    }

    /// Interpolate from one target coset per modulus (in order).
    pub fn interpolate(&self, targets: &[Coset]) -> Result<Poly2> {
        if targets.len() != self.moduli.len() {
            return Err(Error::BadInterpolationTargets(format!(
                "expected {} targets, got {}",
                self.moduli.len(),
                targets.len()
            )));
        }
        let total = self.joint.dim();
        let mut rhs = vec![GaussianRational::zero(); total];
        let mut row0 = 0;
        for (t, m) in targets.iter().zip(&self.moduli) {
            if t.algebra().as_ref() != m.as_ref() {
                return Err(Error::BadInterpolationTargets("target lives in the wrong algebra".into()));
            }
            for (r, v) in t.coords().iter().enumerate() {
                rhs[row0 + r] = v.clone();
            }
            row0 += m.dim();
        }
        let alpha = self.inverse.matvec(&rhs);
        Ok(self.joint.poly_of_coords(&alpha))
    }
}

/// One-shot CRT interpolation (see `CrtSolver` for the cached form).
pub fn crt_interpolate(targets: &[Coset]) -> Result<Poly2> {
    let moduli: Vec<Arc<QuotientAlgebra>> = targets.iter().map(|t| Arc::clone(t.algebra())).collect();
    let solver = CrtSolver::new(moduli)?;
    solver.interpolate(targets)
}

/// Precomputed data for the constrained cofactor lift: the ideal
/// J = I · Π_{a∈W} P(a) presented by the products p_j·g_t with cofactor
/// tracking, so members can be rewritten as Σ u_j p_j with u_j vanishing
/// on W.
#[derive(Debug, Clone)]
pub struct LiftSystem {
    ideal: IdealData,
    vanishing: IdealData,
    j_ideal: IdealData,
    num_gens: usize,
    num_vanishing: usize,
}

impl LiftSystem {
    pub fn new(ideal: &IdealData, window: &[&VarietyPoint]) -> Self {
        let vars = ideal.vars();
        let mut vanishing = groebner_untracked(&[Poly2::one(vars)]);
        for pt in window {
            vanishing = product_ideal(&vanishing, &pt.local_p);
        }
        let mut prods = Vec::new();
        for p in ideal.generators() {
            for g in vanishing.groebner_basis() {
                prods.push(p.mul(g));
            }
        }
        if prods.is_empty() {
            prods.push(Poly2::zero(vars));
        }
        let j_ideal = groebner(&prods);
        Self {
            ideal: ideal.clone(),
            num_gens: ideal.generators().len(),
            num_vanishing: vanishing.groebner_basis().len(),
            vanishing,
            j_ideal,
        }
    }

    pub fn constrained_ideal(&self) -> &IdealData {
        &self.j_ideal
    }

    pub fn vanishing_ideal(&self) -> &IdealData {
        &self.vanishing
    }

    /// Membership test for J.
    pub fn contains(&self, p: &Poly2) -> bool {
        self.j_ideal.contains(p)
    }

    /// The lift: exact cofactors u with p = Σ u_j p_j and every u_j in the
    /// vanishing ideal of W. Errors with `MembershipFailed` when p ∉ J.
    pub fn lift(&self, p: &Poly2) -> Result<Vec<Poly2>> {
        let vars = self.ideal.vars();
        let (q, r) = divide(p, self.j_ideal.groebner_basis());
        if !r.is_zero() {
            return Err(Error::MembershipFailed);
        }
        let mut u = vec![Poly2::zero(vars); self.num_gens];
        let vgens = self.vanishing.groebner_basis();
        for (k, qk) in q.iter().enumerate() {
            if qk.is_zero() {
                continue;
            }
            // J's generator list is the flattened (j, t) product grid.
            for (j, slot) in u.iter_mut().enumerate() {
                for (t, vg) in vgens.iter().enumerate() {
                    let cof = &self.j_ideal.cofactors()[k][j * self.num_vanishing + t];
                    if !cof.is_zero() {
                        *slot = slot.add(&qk.mul(cof).mul(vg));
                    }
                }
            }
        }
        // exact verification of the recombination
        let mut acc = Poly2::zero(vars);
        for (uj, pj) in u.iter().zip(self.ideal.generators()) {
            acc = acc.add(&uj.mul(pj));
        }
        if !acc.sub(p).is_zero() {
            return Err(Error::MembershipFailed);
        }
        Ok(u)
    }
}

/// Cofactors of p over the generators of `ideal` with the additional
/// constraint that every cofactor vanishes on the window W of variety
/// points. See `LiftSystem` for the cached form.
pub fn lift_membership(p: &Poly2, ideal: &IdealData, window: &[&VarietyPoint]) -> Result<Vec<Poly2>> {
    LiftSystem::new(ideal, window).lift(p)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn p(s: &str) -> Poly2 {
        Poly2::parse(s).unwrap()
    }

    fn gb_strings(ideal: &IdealData) -> Vec<String> {
        ideal.groebner_basis().iter().map(|g| g.to_string()).collect()
    }

    #[test]
    fn groebner_of_corpus_ideals() {
        // already a reduced basis: the S-polynomial reduces to zero
        let i1 = groebner(&[p("x^2"), p("y^2 - y")]);
        assert_eq!(gb_strings(&i1), vec!["y^2 - y", "x^2"]);
        // linear generators
        let i2 = groebner(&[p("x"), p("y - 1")]);
        assert_eq!(gb_strings(&i2), vec!["y - 1", "x"]);
        // unit ideal
        let i3 = groebner(&[p("1")]);
        assert_eq!(gb_strings(&i3), vec!["1"]);
        assert!(i3.is_unit_ideal());
    }

    #[test]
    fn groebner_cofactors_are_exact() {
        let gens = [p("x^2 + y"), p("x*y - 1"), p("y^3 - 2")];
        let ideal = groebner(&gens);
        for (k, g) in ideal.groebner_basis().iter().enumerate() {
            let mut acc = Poly2::zero(VarPair::Xy);
            for (j, gen) in gens.iter().enumerate() {
                acc = acc.add(&ideal.cofactors()[k][j].mul(gen));
            }
            assert_eq!(&acc, g, "basis element {k} is not its recorded combination");
        }
    }

    #[test]
    fn reduced_basis_is_permutation_invariant() {
        let a = [p("x^2 + y"), p("x*y - 1"), p("y^3 - 2")];
        let b = [p("y^3 - 2"), p("x^2 + y"), p("x*y - 1")];
        let c = [p("x*y - 1"), p("y^3 - 2"), p("x^2 + y")];
        let ga = gb_strings(&groebner(&a));
        assert_eq!(ga, gb_strings(&groebner(&b)));
        assert_eq!(ga, gb_strings(&groebner(&c)));
    }

    #[test]
    fn zero_dimensionality_criterion() {
        let i1 = groebner(&[p("x^2"), p("y^2 - y")]);
        assert!(i1.is_zero_dimensional());
        let alg = quotient_algebra(&i1).unwrap();
        assert_eq!(alg.dim(), 4);
        let basis: Vec<(u32, u32)> = alg.basis().iter().map(|e| (e.i, e.j)).collect();
        assert_eq!(basis, vec![(0, 0), (0, 1), (1, 0), (1, 1)]);

        let i2 = groebner(&[p("y")]);
        assert!(!i2.is_zero_dimensional());
        assert!(matches!(quotient_algebra(&i2), Err(Error::NotZeroDimensional)));

        let i3 = groebner(&[p("1")]);
        assert!(i3.is_zero_dimensional());
        assert_eq!(quotient_algebra(&i3).unwrap().dim(), 0);
    }

    #[test]
    fn mult_matrices_commute() {
        let ideal = groebner(&[p("x^2 - y"), p("y^2 - 1")]);
        let alg = quotient_algebra(&ideal).unwrap();
        assert_eq!(alg.mult_x().matmul(alg.mult_y()), alg.mult_y().matmul(alg.mult_x()));
    }

    #[test]
    fn variety_of_corpus_ideals() {
        let snap = 1e-6;
        let i1 = groebner(&[p("x^2"), p("y^2 - y")]);
        let a1 = quotient_algebra(&i1).unwrap();
        let v1 = variety(&i1, &a1, snap).unwrap();
        let coords: Vec<(String, String)> =
            v1.iter().map(|pt| (pt.x.to_string(), pt.y.to_string())).collect();
        assert_eq!(coords, vec![("0".into(), "0".into()), ("0".into(), "1".into())]);
        assert!(v1.iter().all(|pt| pt.is_real));

        let i2 = groebner(&[p("x"), p("y - 1")]);
        let a2 = quotient_algebra(&i2).unwrap();
        let v2 = variety(&i2, &a2, snap).unwrap();
        assert_eq!(v2.len(), 1);
        assert!(v2[0].same_coords(&GaussianRational::zero(), &GaussianRational::one()));

        // product-form ideal: variety is the coordinate grid
        let i3 = groebner(&[p("x^2 - x"), p("y")]);
        let a3 = quotient_algebra(&i3).unwrap();
        let v3 = variety(&i3, &a3, snap).unwrap();
        let coords: Vec<(String, String)> =
            v3.iter().map(|pt| (pt.x.to_string(), pt.y.to_string())).collect();
        assert_eq!(coords, vec![("0".into(), "0".into()), ("1".into(), "0".into())]);
    }

    #[test]
    fn variety_with_nonreal_points() {
        // x^2 + 1 = 0 forces x = ±i
        let ideal = groebner(&[p("x^2 + 1"), p("y")]);
        let alg = quotient_algebra(&ideal).unwrap();
        let v = variety(&ideal, &alg, 1e-6).unwrap();
        assert_eq!(v.len(), 2);
        assert!(v.iter().all(|pt| !pt.is_real));
        let xs: Vec<String> = v.iter().map(|pt| pt.x.to_string()).collect();
        assert!(xs.contains(&"i".to_string()) && xs.contains(&"-i".to_string()));
    }

    #[test]
    fn local_components_match_hand_computation() {
        let dim4 = 4;
        let i1 = groebner(&[p("x^2"), p("y^2 - y")]);
        // at (0,1): stabilizes to <x^2, y-1>
        let q01 =
            local_component(&i1, dim4, &GaussianRational::zero(), &GaussianRational::one()).unwrap();
        assert_eq!(gb_strings(&q01), vec!["y - 1", "x^2"]);
        // at (0,0): <x^2, y>
        let q00 =
            local_component(&i1, dim4, &GaussianRational::zero(), &GaussianRational::zero()).unwrap();
        assert_eq!(gb_strings(&q00), vec!["y", "x^2"]);
        // a maximal ideal is its own primary component
        let i2 = groebner(&[p("x"), p("y - 1")]);
        let q = local_component(&i2, 1, &GaussianRational::zero(), &GaussianRational::one()).unwrap();
        assert_eq!(q, i2);
        // not in the variety
        assert!(matches!(
            local_component(&i1, dim4, &GaussianRational::one(), &GaussianRational::zero()),
            Err(Error::NotInVariety)
        ));
    }

    #[test]
    fn local_dimension_count() {
        let ideal = groebner(&[p("x^2"), p("y^2 - y")]);
        let alg = quotient_algebra(&ideal).unwrap();
        let v = variety(&ideal, &alg, 1e-6).unwrap();
        let sum: usize = v.iter().map(|pt| pt.algebra_b.dim()).sum();
        assert_eq!(sum, alg.dim());
        // depths at (0,0): d_x = 2 (x^2 in Q, x not), d_y = 1
        let p00 = &v[0];
        assert_eq!((p00.d_x, p00.d_y), (2, 1));
        assert_eq!(p00.algebra_b.dim(), 2);
        assert_eq!(p00.algebra_a.dim(), 4);
    }

    #[test]
    fn product_ideal_examples() {
        // <x,y>^2
        let m = groebner(&[p("x"), p("y")]);
        let sq = product_ideal(&m, &m);
        assert_eq!(gb_strings(&sq), vec!["y^2", "x*y", "x^2"]);
        // <x, y-1> * <x^2, y-1> = <x^3, x(y-1), (y-1)^2>
        let a = groebner(&[p("x"), p("y - 1")]);
        let b = groebner(&[p("x^2"), p("y - 1")]);
        let prod = product_ideal(&a, &b);
        assert!(prod.contains(&p("x^3")));
        assert!(prod.contains(&p("x*y - x")));
        assert!(prod.contains(&p("y^2 - 2*y + 1")));
        assert!(!prod.contains(&p("x^2")));
        assert!(!prod.contains(&p("y - 1")));
    }

    #[test]
    fn product_form_local_structure() {
        // generators split by variable: the local component at the single
        // point is spanned by the pure powers
        let ideal = groebner(&[p("x^2 - 2*x + 1"), p("y^3")]); // (x-1)^2, y^3
        let alg = quotient_algebra(&ideal).unwrap();
        assert_eq!(alg.dim(), 6);
        let v = variety(&ideal, &alg, 1e-6).unwrap();
        assert_eq!(v.len(), 1);
        let pt = &v[0];
        assert_eq!((pt.d_x, pt.d_y), (2, 3));
        assert_eq!(gb_strings(&pt.local_q), vec!["x^2 - 2*x + 1", "y^3"]);
        // the product modulus contains the expected shifted powers
        assert!(pt.local_pq.contains(&p("x^3 - 3*x^2 + 3*x - 1")));
        assert!(pt.local_pq.contains(&p("(x^2 - 2*x + 1)*y")));
        assert!(pt.local_pq.contains(&p("(x - 1)*y^3")));
        assert!(pt.local_pq.contains(&p("y^4")));
        assert_eq!(pt.algebra_a.dim(), pt.algebra_b.dim() + 2);
    }

    #[test]
    fn coset_arithmetic_and_inversion() {
        // in C[x,y]/<x^2, y>: (1+x)^{-1} = 1-x
        let ideal = groebner(&[p("x^2"), p("y")]);
        let alg = Arc::new(quotient_algebra(&ideal).unwrap());
        let c = Coset::from_poly(&p("1 + x"), &alg);
        let inv = c.invert().unwrap();
        assert_eq!(inv.representative(), p("1 - x"));
        let unit = c.mul(&inv).unwrap();
        assert_eq!(unit.representative(), p("1"));
        // x is a zero divisor there
        let zx = Coset::from_poly(&p("x"), &alg);
        assert!(matches!(zx.invert(), Err(Error::NotInvertible)));
        assert!(zx.value_at(&GaussianRational::zero(), &GaussianRational::zero()).is_zero());
    }

    #[test]
    fn coset_projection_into_smaller_algebra() {
        // A = C/(P·Q) -> B = C/Q for P = Q = <x, y-1>
        let q = groebner(&[p("x"), p("y - 1")]);
        let pq = product_ideal(&q, &q);
        let alg_a = Arc::new(quotient_algebra(&pq).unwrap());
        let alg_b = Arc::new(quotient_algebra(&q).unwrap());
        let c = Coset::from_poly(&p("x"), &alg_a);
        assert!(!c.is_zero());
        let projected = c.project_into(&alg_b).unwrap();
        assert!(projected.is_zero());
        // projection the wrong way is rejected
        let d = Coset::from_poly(&p("1"), &alg_b);
        assert!(d.project_into(&alg_a).is_err());
    }

    #[test]
    fn coset_sharp_maps_between_conjugate_algebras() {
        // nonreal conjugate pair of <(x^2+1)^2, y> with depth-two local
        // algebras, so representatives keep a linear term
        let ideal = groebner(&[p("x^4 + 2*x^2 + 1"), p("y")]);
        let alg = quotient_algebra(&ideal).unwrap();
        assert_eq!(alg.dim(), 4);
        let v = variety(&ideal, &alg, 1e-6).unwrap();
        assert_eq!(v.len(), 2);
        let (a, b) = (&v[0], &v[1]);
        assert_eq!(a.x.conj(), b.x);
        assert_eq!(a.algebra_b.dim(), 2);
        // Q(a)# = Q(a#)
        assert_eq!(a.local_q.sharp(), b.local_q);
        let c = Coset::from_poly(&p("i*x + 2"), &a.algebra_b);
        let cs = c.sharp_into(&b.algebra_b);
        assert_eq!(cs.representative(), p("-i*x + 2"));
        // involution back
        assert_eq!(cs.sharp_into(&a.algebra_b), c);
        // in the depth-one quotient the class collapses to the conjugated
        // point value
        let shallow = groebner(&[p("x^2 + 1"), p("y")]);
        let salg = quotient_algebra(&shallow).unwrap();
        let sv = variety(&shallow, &salg, 1e-6).unwrap();
        let c = Coset::from_poly(&p("i*x + 2"), &sv[0].algebra_b);
        // value at (-i, 0) is 3; conjugation fixes it
        let cs = c.sharp_into(&sv[1].algebra_b);
        assert_eq!(cs.representative(), p("3"));
    }

    #[test]
    fn sharp_invariance_for_real_ideals() {
        let ideal = groebner(&[p("x^2"), p("y^2 - y")]);
        let alg = quotient_algebra(&ideal).unwrap();
        let v = variety(&ideal, &alg, 1e-6).unwrap();
        for pt in &v {
            // real generators: Q(a)# = Q(a#) = Q(a) for real a
            assert_eq!(pt.local_q.sharp(), pt.local_q);
        }
    }

    #[test]
    fn crt_interpolation_examples() {
        let ideal = groebner(&[p("x^2"), p("y^2 - y")]);
        let alg = quotient_algebra(&ideal).unwrap();
        let v = variety(&ideal, &alg, 1e-6).unwrap();
        // target 0 mod <x^2, y> at (0,0) and 1 mod <x^2, y-1> at (0,1):
        // y satisfies both
        let b0 = &v[0].algebra_b;
        let b1 = &v[1].algebra_b;
        let targets = vec![b0.zero_coset(), b1.unit_coset()];
        let solver = CrtSolver::new(vec![Arc::clone(b0), Arc::clone(b1)]).unwrap();
        let interp = solver.interpolate(&targets).unwrap();
        assert_eq!(interp, p("y"));
        // all-zero targets give the zero polynomial
        let z = solver.interpolate(&[b0.zero_coset(), b1.zero_coset()]).unwrap();
        assert!(z.is_zero());
        // single point: the representative itself
        let single = groebner(&[p("x"), p("y - 1")]);
        let alg_s = Arc::new(quotient_algebra(&single).unwrap());
        let target = Coset::from_poly(&p("i + x"), &alg_s);
        let got = crt_interpolate(std::slice::from_ref(&target)).unwrap();
        assert_eq!(Coset::from_poly(&got, &alg_s), target);
    }

    #[test]
    fn crt_reproduces_targets_after_rereduction() {
        let ideal = groebner(&[p("x^2"), p("y^2 - y")]);
        let alg = quotient_algebra(&ideal).unwrap();
        let v = variety(&ideal, &alg, 1e-6).unwrap();
        // exact targets in the A-algebras
        let t0 = Coset::from_poly(&p("3 + 2*x + i*y"), &v[0].algebra_a);
        let t1 = Coset::from_poly(&p("1/2*x - 5*y + 1"), &v[1].algebra_a);
        let interp = crt_interpolate(&[t0.clone(), t1.clone()]).unwrap();
        assert_eq!(Coset::from_poly(&interp, &v[0].algebra_a), t0);
        assert_eq!(Coset::from_poly(&interp, &v[1].algebra_a), t1);
    }

    #[test]
    fn lift_membership_examples() {
        let gens = [p("x^2"), p("y^2 - y")];
        let ideal = groebner(&gens);
        let alg = quotient_algebra(&ideal).unwrap();
        let v = variety(&ideal, &alg, 1e-6).unwrap();

        // a generator lifts to a unit vector with empty window
        let u = lift_membership(&p("x^2"), &ideal, &[]).unwrap();
        assert_eq!(u[0], p("1"));
        assert!(u[1].is_zero());

        // p = (y^2-y)^2 with both points in the window: u = (0, y^2-y)
        let w: Vec<&VarietyPoint> = v.iter().collect();
        let sq = p("y^2 - y").mul(&p("y^2 - y"));
        let u = lift_membership(&sq, &ideal, &w).unwrap();
        assert!(u[0].is_zero());
        assert_eq!(u[1], p("y^2 - y"));
        for pt in &v {
            assert!(u[1].eval_exact(&pt.x, &pt.y).is_zero());
        }

        // p = x^3 with window {(0,0)}: u = (x, 0)
        let w0: Vec<&VarietyPoint> = v.iter().filter(|pt| pt.y.is_zero()).collect();
        assert_eq!(w0.len(), 1);
        let u = lift_membership(&p("x^3"), &ideal, &w0).unwrap();
        assert_eq!(u[0], p("x"));
        assert!(u[1].is_zero());
        assert!(u[0].eval_exact(&GaussianRational::zero(), &GaussianRational::zero()).is_zero());

        // non-member
        assert!(matches!(lift_membership(&p("x"), &ideal, &[]), Err(Error::MembershipFailed)));
        // member of I that fails the vanishing constraint is also rejected:
        // x^2 is in I but not in I·P((0,0))
        assert!(matches!(lift_membership(&p("x^2"), &ideal, &w0), Err(Error::MembershipFailed)));
    }

    #[test]
    fn lift_recombination_is_exact_on_random_members() {
        let gens = [p("x^2"), p("y^2 - y")];
        let ideal = groebner(&gens);
        let alg = quotient_algebra(&ideal).unwrap();
        let v = variety(&ideal, &alg, 1e-6).unwrap();
        let w: Vec<&VarietyPoint> = v.iter().collect();
        let sys = LiftSystem::new(&ideal, &w);
        let mut rng = SplitMix64::new(99);
        for _ in 0..10 {
            // random member of J = I · P(0,0) · P(0,1)
            let mut member = Poly2::zero(VarPair::Xy);
            for g in sys.constrained_ideal().groebner_basis() {
                let c = GaussianRational::from_int(rng.next_small_int(4));
                let e = Exp::new(rng.next_range(2) as u32, rng.next_range(2) as u32);
                member = member.add(&g.mul(&Poly2::monomial(e.i, e.j, c, VarPair::Xy)));
            }
            if member.is_zero() {
                continue;
            }
            let u = sys.lift(&member).unwrap();
            let mut acc = Poly2::zero(VarPair::Xy);
            for (uj, pj) in u.iter().zip(gens.iter()) {
                acc = acc.add(&uj.mul(pj));
            }
            assert_eq!(acc, member);
            for pt in &v {
                for uj in &u {
                    assert!(uj.eval_exact(&pt.x, &pt.y).is_zero());
                }
            }
        }
    }

    #[test]
    fn exact_solver_on_random_systems() {
        let mut rng = SplitMix64::new(5);
        for n in [1usize, 2, 4] {
            let mut a = QMatrix::identity(n);
            for i in 0..n {
                for j in 0..n {
                    let v = a.get(i, j)
                        + &GaussianRational::from_parts(rng.next_small_int(3), 1, rng.next_small_int(3), 2);
                    a.set(i, j, v);
                }
            }
            let mut b = QMatrix::zeros(n, 1);
            for i in 0..n {
                b.set(i, 0, GaussianRational::from_int(rng.next_small_int(5)));
            }
            if let Some(x) = a.solve(&b) {
                let back = a.matmul(&x);
                for i in 0..n {
                    assert_eq!(back.get(i, 0), b.get(i, 0));
                }
            }
        }
    }
}
