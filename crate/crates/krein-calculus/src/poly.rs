//! Exact bivariate polynomials over the Gaussian rationals.
//!
//! `Poly2` carries a variable tag: most of the crate works in the pair
//! (x, y); the change-of-variable isomorphism Φ and the coefficient
//! reversal ϖ live in the pair (z, w) = (x + iy, x - iy). Terms are kept
//! in a map ordered by graded-lex exponent order (x > y), so iteration is
//! deterministic and the leading term is the maximal key.

use crate::error::{Error, Result};
use crate::linalg::CMatrix;
use crate::scalar::GaussianRational;
use num_complex::Complex64;
use num_traits::Zero;
use std::collections::BTreeMap;
use std::fmt;

/// Which variable pair a polynomial lives in.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum VarPair {
    /// Cartesian variables (x, y).
    Xy,
    /// Transformed variables (z, w) = (x + iy, x - iy).
    Zw,
}

impl VarPair {
    pub fn names(self) -> (&'static str, &'static str) {
        match self {
            VarPair::Xy => ("x", "y"),
            VarPair::Zw => ("z", "w"),
        }
    }
    fn label(self) -> &'static str {
        match self {
            VarPair::Xy => "x,y",
            VarPair::Zw => "z,w",
        }
    }
}

/// Exponent pair with graded-lex order (total degree first, then the power
/// of the first variable).
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct Exp {
    pub i: u32,
    pub j: u32,
}

impl Exp {
    pub fn new(i: u32, j: u32) -> Self {
        Self { i, j }
    }
    pub fn total(&self) -> u32 {
        self.i + self.j
    }
    pub fn divides(&self, other: &Exp) -> bool {
        self.i <= other.i && self.j <= other.j
    }
    pub fn checked_sub(&self, other: &Exp) -> Option<Exp> {
        if other.divides(self) {
            Some(Exp::new(self.i - other.i, self.j - other.j))
        } else {
            None
        }
    }
    pub fn lcm(&self, other: &Exp) -> Exp {
        Exp::new(self.i.max(other.i), self.j.max(other.j))
    }
}

impl Ord for Exp {
    fn cmp(&self, other: &Self) -> std::cmp::Ordering {
        (self.total(), self.i).cmp(&(other.total(), other.i))
    }
}

impl PartialOrd for Exp {
    fn partial_cmp(&self, other: &Self) -> Option<std::cmp::Ordering> {
        Some(self.cmp(other))
    }
}

/// Max of the degrees in the two variables, the reversal degree used by ϖ.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct MaxDegree(pub u32);

/// Exact bivariate polynomial. Zero coefficients are never stored; the zero
/// polynomial has an empty term map.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Poly2 {
    terms: BTreeMap<Exp, GaussianRational>,
    vars: VarPair,
}

impl Poly2 {
    pub fn zero(vars: VarPair) -> Self {
        Self { terms: BTreeMap::new(), vars }
    }

    pub fn constant(c: GaussianRational, vars: VarPair) -> Self {
        let mut p = Self::zero(vars);
        p.add_term(Exp::new(0, 0), c);
        p
    }

    pub fn one(vars: VarPair) -> Self {
        Self::constant(GaussianRational::one(), vars)
    }

    pub fn monomial(i: u32, j: u32, c: GaussianRational, vars: VarPair) -> Self {
        let mut p = Self::zero(vars);
        p.add_term(Exp::new(i, j), c);
        p
    }

    /// The first variable of the pair (x, or z).
    pub fn var_first(vars: VarPair) -> Self {
        Self::monomial(1, 0, GaussianRational::one(), vars)
    }

    /// The second variable of the pair (y, or w).
    pub fn var_second(vars: VarPair) -> Self {
        Self::monomial(0, 1, GaussianRational::one(), vars)
    }

    pub fn x() -> Self {
        Self::var_first(VarPair::Xy)
    }

    pub fn y() -> Self {
        Self::var_second(VarPair::Xy)
    }

    pub fn vars(&self) -> VarPair {
        self.vars
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn terms(&self) -> impl Iterator<Item = (&Exp, &GaussianRational)> {
        self.terms.iter()
    }

    pub fn num_terms(&self) -> usize {
        self.terms.len()
    }

    pub fn coeff(&self, i: u32, j: u32) -> GaussianRational {
        self.terms
            .get(&Exp::new(i, j))
            .cloned()
            .unwrap_or_else(GaussianRational::zero)
    }

    fn add_term(&mut self, e: Exp, c: GaussianRational) {
        if c.is_zero() {
            return;
        }
        use std::collections::btree_map::Entry;
        match self.terms.entry(e) {
            Entry::Vacant(v) => {
                v.insert(c);
            }
            Entry::Occupied(mut o) => {
                let s = o.get() + &c;
                if s.is_zero() {
                    o.remove();
                } else {
                    o.insert(s);
                }
            }
        }
    }

    /// Leading exponent in graded-lex order; `None` for the zero polynomial.
    pub fn leading_exp(&self) -> Option<Exp> {
        self.terms.keys().next_back().copied()
    }

    pub fn leading_coeff(&self) -> Option<GaussianRational> {
        self.terms.values().next_back().cloned()
    }

    pub fn deg_x(&self) -> u32 {
        self.terms.keys().map(|e| e.i).max().unwrap_or(0)
    }

    pub fn deg_y(&self) -> u32 {
        self.terms.keys().map(|e| e.j).max().unwrap_or(0)
    }

    pub fn total_degree(&self) -> u32 {
        self.terms.keys().map(|e| e.total()).max().unwrap_or(0)
    }

    /// d(q): the maximum of the two partial degrees.
    pub fn max_degree(&self) -> MaxDegree {
        MaxDegree(self.deg_x().max(self.deg_y()))
    }

    pub fn scale(&self, c: &GaussianRational) -> Self {
        if c.is_zero() {
            return Self::zero(self.vars);
        }
        let mut out = Self::zero(self.vars);
        for (e, v) in &self.terms {
            out.terms.insert(*e, v * c);
        }
        out
    }

    /// Multiply by a single term c·u^i v^j.
    pub fn mul_term(&self, e: Exp, c: &GaussianRational) -> Self {
        if c.is_zero() {
            return Self::zero(self.vars);
        }
        let mut out = Self::zero(self.vars);
        for (t, v) in &self.terms {
            out.terms.insert(Exp::new(t.i + e.i, t.j + e.j), v * c);
        }
        out
    }

    pub fn add(&self, rhs: &Self) -> Self {
        assert_eq!(self.vars, rhs.vars, "variable tag mismatch");
        let mut out = self.clone();
        for (e, c) in &rhs.terms {
            out.add_term(*e, c.clone());
        }
        out
    }

    pub fn sub(&self, rhs: &Self) -> Self {
        assert_eq!(self.vars, rhs.vars, "variable tag mismatch");
        let mut out = self.clone();
        for (e, c) in &rhs.terms {
            out.add_term(*e, -c);
        }
        out
    }

    pub fn neg(&self) -> Self {
        self.scale(&(-&GaussianRational::one()))
    }

    pub fn mul(&self, rhs: &Self) -> Self {
        assert_eq!(self.vars, rhs.vars, "variable tag mismatch");
        let mut out = Self::zero(self.vars);
        for (ea, ca) in &self.terms {
            for (eb, cb) in &rhs.terms {
                out.add_term(Exp::new(ea.i + eb.i, ea.j + eb.j), ca * cb);
            }
        }
        out
    }

    pub fn pow(&self, n: u32) -> Self {
        let mut acc = Self::one(self.vars);
        for _ in 0..n {
            acc = acc.mul(self);
        }
        acc
    }

    /// Divide by the leading coefficient; identity on the zero polynomial.
    pub fn monic(&self) -> Self {
        match self.leading_coeff() {
            Some(lc) => self.scale(&lc.inv().expect("nonzero leading coefficient")),
            None => self.clone(),
        }
    }

    /// Coefficient-wise conjugation: p#(x,y) = conj(p(conj x, conj y)).
    pub fn sharp(&self) -> Self {
        let mut out = Self::zero(self.vars);
        for (e, c) in &self.terms {
            out.terms.insert(*e, c.conj());
        }
        out
    }

    /// Real coefficients, equivalently p# = p.
    pub fn is_real(&self) -> bool {
        self.terms.values().all(|c| c.is_real())
    }

    /// Evaluate at a point with complex coordinates (Horner in both
    /// variables; exact coefficients converted to floats once).
    pub fn eval(&self, first: Complex64, second: Complex64) -> Complex64 {
        if self.terms.is_empty() {
            return Complex64::zero();
        }
        // Rows indexed by the first variable's power, Horner along each row,
        // then Horner across rows.
        let di = self.deg_x() as usize;
        let dj = self.deg_y() as usize;
        let mut rows = vec![vec![Complex64::zero(); dj + 1]; di + 1];
        for (e, c) in &self.terms {
            rows[e.i as usize][e.j as usize] = c.to_complex();
        }
        let mut acc = Complex64::zero();
        for row in rows.iter().rev() {
            let mut racc = Complex64::zero();
            for c in row.iter().rev() {
                racc = racc * second + c;
            }
            acc = acc * first + racc;
        }
        acc
    }

    /// p(z) for z in ℂ: evaluate at (Re z, Im z).
    pub fn eval_at_complex(&self, z: Complex64) -> Complex64 {
        self.eval(Complex64::new(z.re, 0.0), Complex64::new(z.im, 0.0))
    }

    /// Exact evaluation at a point with Gaussian-rational coordinates.
    pub fn eval_exact(&self, first: &GaussianRational, second: &GaussianRational) -> GaussianRational {
        let mut acc = GaussianRational::zero();
        // Exact power tables; degrees are small throughout the crate.
        let di = self.deg_x();
        let dj = self.deg_y();
        let mut pow1 = Vec::with_capacity(di as usize + 1);
        let mut pow2 = Vec::with_capacity(dj as usize + 1);
        pow1.push(GaussianRational::one());
        for k in 1..=di {
            let prev = &pow1[(k - 1) as usize];
            pow1.push(prev * first);
        }
        pow2.push(GaussianRational::one());
        for k in 1..=dj {
            let prev = &pow2[(k - 1) as usize];
            pow2.push(prev * second);
        }
        for (e, c) in &self.terms {
            acc = &acc + &(&(c * &pow1[e.i as usize]) * &pow2[e.j as usize]);
        }
        acc
    }

    /// Substitute polynomials for the two variables. The images must share a
    /// variable tag, which the result inherits.
    pub fn substitute(&self, first_image: &Poly2, second_image: &Poly2) -> Poly2 {
        assert_eq!(first_image.vars, second_image.vars, "variable tag mismatch");
        let target = first_image.vars;
        let di = self.deg_x();
        let dj = self.deg_y();
        let mut pow1: Vec<Poly2> = Vec::with_capacity(di as usize + 1);
        let mut pow2: Vec<Poly2> = Vec::with_capacity(dj as usize + 1);
        pow1.push(Poly2::one(target));
        for k in 1..=di {
            let prev = pow1[(k - 1) as usize].clone();
            pow1.push(prev.mul(first_image));
        }
        pow2.push(Poly2::one(target));
        for k in 1..=dj {
            let prev = pow2[(k - 1) as usize].clone();
            pow2.push(prev.mul(second_image));
        }
        let mut acc = Poly2::zero(target);
        for (e, c) in &self.terms {
            let t = pow1[e.i as usize].mul(&pow2[e.j as usize]).scale(c);
            acc = acc.add(&t);
        }
        acc
    }

    /// Φ: p(x,y) ↦ p((z+w)/2, (z-w)/(2i)), an isomorphism ℂ\[x,y\] → ℂ\[z,w\].
    pub fn phi_transform(&self) -> Result<Poly2> {
        if self.vars != VarPair::Xy {
            return Err(Error::WrongVariables { expected: VarPair::Xy.label(), found: self.vars.label() });
        }
        let half = GaussianRational::from_ratio(1, 2);
        // 1/(2i) = -i/2
        let half_over_i = GaussianRational::from_parts(0, 1, -1, 2);
        let z = Poly2::var_first(VarPair::Zw);
        let w = Poly2::var_second(VarPair::Zw);
        let x_image = z.add(&w).scale(&half);
        let y_image = z.sub(&w).scale(&half_over_i);
        Ok(self.substitute(&x_image, &y_image))
    }

    /// Φ⁻¹: q(z,w) ↦ q(x+iy, x-iy).
    pub fn phi_inverse(&self) -> Result<Poly2> {
        if self.vars != VarPair::Zw {
            return Err(Error::WrongVariables { expected: VarPair::Zw.label(), found: self.vars.label() });
        }
        let i = GaussianRational::i();
        let x = Poly2::x();
        let y = Poly2::y();
        let z_image = x.add(&y.scale(&i));
        let w_image = x.sub(&y.scale(&i));
        Ok(self.substitute(&z_image, &w_image))
    }

    /// ϖ: coefficient reversal (zw)^d q(1/z, 1/w) with d = d(q).
    pub fn varpi(&self) -> Result<Poly2> {
        if self.is_zero() {
            return Err(Error::ZeroPolynomial);
        }
        let d = self.max_degree().0;
        let mut out = Poly2::zero(self.vars);
        for (e, c) in &self.terms {
            out.add_term(Exp::new(d - e.i, d - e.j), c.clone());
        }
        Ok(out)
    }

    /// Upper bound Σ |c_ij|·a^i·b^j on the norm of a matrix substitution
    /// with ‖A‖ ≤ a, ‖B‖ ≤ b; the reference scale for deciding when a
    /// substituted form has vanished up to roundoff.
    pub fn norm_bound(&self, a: f64, b: f64) -> f64 {
        use num_traits::ToPrimitive;
        self.terms
            .iter()
            .map(|(e, c)| {
                let mag = c.norm_sqr().to_f64().unwrap_or(f64::INFINITY).sqrt();
                mag * a.powi(e.i as i32) * b.powi(e.j as i32)
            })
            .sum()
    }

    /// Σ c_ij A^i B^j with cached powers. The matrices must commute up to
    /// `comm_tol` relative to their norms; for a (z,w)-tagged polynomial the
    /// caller passes the pair (N, N⁺).
    pub fn mat_subst(&self, a: &CMatrix, b: &CMatrix, comm_tol: f64) -> Result<CMatrix> {
        if !a.is_square() || !b.is_square() || a.rows() != b.rows() {
            return Err(Error::DimensionMismatch(format!(
                "mat_subst needs equal square matrices, got {}x{} and {}x{}",
                a.rows(), a.cols(), b.rows(), b.cols()
            )));
        }
        let n = a.rows();
        let scale = a.fro_norm() * b.fro_norm();
        let comm = a.matmul(b).sub(&b.matmul(a)).fro_norm();
        // matrices that vanished up to roundoff commute for every purpose
        // of a polynomial substitution; the floor keeps their dust from
        // tripping the relative test
        let floor = comm_tol * (a.fro_norm() + b.fro_norm() + 1.0);
        if scale > 0.0 && comm > comm_tol * scale && comm > floor {
            return Err(Error::NonCommuting { residual: comm / scale, tol: comm_tol });
        }
        let di = self.deg_x() as usize;
        let dj = self.deg_y() as usize;
        let mut pow_a = Vec::with_capacity(di + 1);
        let mut pow_b = Vec::with_capacity(dj + 1);
        pow_a.push(CMatrix::identity(n));
        for k in 1..=di {
            let next = pow_a[k - 1].matmul(a);
            pow_a.push(next);
        }
        pow_b.push(CMatrix::identity(n));
        for k in 1..=dj {
            let next = pow_b[k - 1].matmul(b);
            pow_b.push(next);
        }
        let mut acc = CMatrix::zeros(n, n);
        for (e, c) in &self.terms {
            let term = pow_a[e.i as usize].matmul(&pow_b[e.j as usize]).scale(c.to_complex());
            acc = acc.add(&term);
        }
        Ok(acc)
    }

    /// Parse from the textual sum-of-terms format, inferring the variable
    /// pair from the names that occur (constants parse as (x, y)).
    pub fn parse(input: &str) -> Result<Poly2> {
        parse_poly(input, None)
    }

    /// Parse, requiring the given variable pair.
    pub fn parse_in(input: &str, vars: VarPair) -> Result<Poly2> {
        parse_poly(input, Some(vars))
    }
}

impl fmt::Display for Poly2 {
    /// Sum-of-terms form, leading term first; round-trips through `parse`.
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.terms.is_empty() {
            return write!(f, "0");
        }
        let (v1, v2) = self.vars.names();
        let mut first = true;
        for (e, c) in self.terms.iter().rev() {
            let zero = num_rational::BigRational::zero();
            let negative = (c.im.is_zero() && c.re < zero) || (c.re.is_zero() && c.im < zero);
            let mag = if negative { -c } else { c.clone() };
            if first {
                if negative {
                    write!(f, "-")?;
                }
                first = false;
            } else if negative {
                write!(f, " - ")?;
            } else {
                write!(f, " + ")?;
            }
            let coeff_str = mag.to_string();
            let is_one = coeff_str == "1";
            let needs_paren = !mag.is_real() && !mag.re.is_zero();
            let mut factors: Vec<String> = Vec::new();
            if e.i > 0 {
                factors.push(if e.i == 1 { v1.to_string() } else { format!("{v1}^{}", e.i) });
            }
            if e.j > 0 {
                factors.push(if e.j == 1 { v2.to_string() } else { format!("{v2}^{}", e.j) });
            }
            if factors.is_empty() {
                if needs_paren {
                    write!(f, "({coeff_str})")?;
                } else {
                    write!(f, "{coeff_str}")?;
                }
            } else if is_one {
                write!(f, "{}", factors.join("*"))?;
            } else if needs_paren {
                write!(f, "({coeff_str})*{}", factors.join("*"))?;
            } else {
                write!(f, "{coeff_str}*{}", factors.join("*"))?;
            }
        }
        Ok(())
    }
}

// ---------------------------------------------------------------------------
// Parsing
// ---------------------------------------------------------------------------

#[derive(Debug, Clone, PartialEq)]
enum Tok {
    Num(num_rational::BigRational),
    Imag,
    Var(char),
    Caret,
    Star,
    Plus,
    Minus,
    LParen,
    RParen,
}

fn tokenize(input: &str) -> Result<Vec<Tok>> {
    let mut toks = Vec::new();
    let chars: Vec<char> = input.chars().collect();
    let mut k = 0;
    while k < chars.len() {
        let c = chars[k];
        match c {
            ' ' | '\t' | '\n' | '\r' => k += 1,
            '+' => {
                toks.push(Tok::Plus);
                k += 1;
            }
            '-' => {
                toks.push(Tok::Minus);
                k += 1;
            }
            '*' => {
                toks.push(Tok::Star);
                k += 1;
            }
            '^' => {
                toks.push(Tok::Caret);
                k += 1;
            }
            '(' => {
                toks.push(Tok::LParen);
                k += 1;
            }
            ')' => {
                toks.push(Tok::RParen);
                k += 1;
            }
            'i' => {
                toks.push(Tok::Imag);
                k += 1;
            }
            'x' | 'y' | 'z' | 'w' => {
                toks.push(Tok::Var(c));
                k += 1;
            }
            '0'..='9' => {
                let start = k;
                while k < chars.len() && chars[k].is_ascii_digit() {
                    k += 1;
                }
                let num: num_bigint::BigInt = input[start..k]
                    .parse()
                    .map_err(|_| Error::Parse(format!("bad integer near '{}'", &input[start..k])))?;
                // Optional /denominator
                if k < chars.len() && chars[k] == '/' {
                    k += 1;
                    let dstart = k;
                    while k < chars.len() && chars[k].is_ascii_digit() {
                        k += 1;
                    }
                    if dstart == k {
                        return Err(Error::Parse("missing denominator after '/'".into()));
                    }
                    let den: num_bigint::BigInt = input[dstart..k]
                        .parse()
                        .map_err(|_| Error::Parse("bad denominator".into()))?;
                    if den.is_zero() {
                        return Err(Error::Parse("zero denominator".into()));
                    }
                    toks.push(Tok::Num(num_rational::BigRational::new(num, den)));
                } else {
                    toks.push(Tok::Num(num_rational::BigRational::from_integer(num)));
                }
            }
            other => return Err(Error::Parse(format!("unexpected character '{other}'"))),
        }
    }
    Ok(toks)
}

struct Parser {
    toks: Vec<Tok>,
    pos: usize,
}

impl Parser {
    fn peek(&self) -> Option<&Tok> {
        self.toks.get(self.pos)
    }
    fn next(&mut self) -> Option<Tok> {
        let t = self.toks.get(self.pos).cloned();
        if t.is_some() {
            self.pos += 1;
        }
        t
    }

    // expr := term (('+'|'-') term)*
    fn expr(&mut self) -> Result<RawPoly> {
        let mut acc = self.term()?;
        while let Some(t) = self.peek() {
            match t {
                Tok::Plus => {
                    self.pos += 1;
                    let rhs = self.term()?;
                    acc = acc.add(&rhs);
                }
                Tok::Minus => {
                    self.pos += 1;
                    let rhs = self.term()?;
                    acc = acc.add(&rhs.negate());
                }
                Tok::RParen => break,
                other => return Err(Error::Parse(format!("expected '+' or '-', got {other:?}"))),
            }
        }
        Ok(acc)
    }

    // term := ('-'|'+')* factor ('*'? factor)*
    fn term(&mut self) -> Result<RawPoly> {
        let mut sign = GaussianRational::one();
        while let Some(t) = self.peek() {
            match t {
                Tok::Minus => {
                    sign = -&sign;
                    self.pos += 1;
                }
                Tok::Plus => {
                    self.pos += 1;
                }
                _ => break,
            }
        }
        let mut acc = RawPoly::constant(sign);
        let mut saw_factor = false;
        loop {
            match self.peek() {
                Some(Tok::Star) => {
                    self.pos += 1;
                    let f = self.factor()?;
                    acc = acc.mul(&f);
                }
                Some(Tok::Num(_)) | Some(Tok::Imag) | Some(Tok::Var(_)) | Some(Tok::LParen) => {
                    let f = self.factor()?;
                    acc = acc.mul(&f);
                }
                _ => break,
            }
            saw_factor = true;
        }
        if !saw_factor {
            return Err(Error::Parse("empty term".into()));
        }
        Ok(acc)
    }

    fn factor(&mut self) -> Result<RawPoly> {
        let base = match self.next() {
            Some(Tok::Num(r)) => RawPoly::constant(GaussianRational::new(r, num_rational::BigRational::zero())),
            Some(Tok::Imag) => RawPoly::constant(GaussianRational::i()),
            Some(Tok::Var(v)) => RawPoly::var(v),
            Some(Tok::LParen) => {
                let inner = self.expr()?;
                match self.next() {
                    Some(Tok::RParen) => inner,
                    _ => return Err(Error::Parse("unbalanced parentheses".into())),
                }
            }
            other => return Err(Error::Parse(format!("expected a factor, got {other:?}"))),
        };
        if let Some(Tok::Caret) = self.peek() {
            self.pos += 1;
            match self.next() {
                Some(Tok::Num(r)) if r.is_integer() && !r.numer().sign().eq(&num_bigint::Sign::Minus) => {
                    use num_traits::ToPrimitive;
                    let e = r.to_integer().to_u32().ok_or_else(|| Error::Parse("exponent too large".into()))?;
                    return Ok(base.pow(e));
                }
                _ => return Err(Error::Parse("expected a nonnegative integer exponent after '^'".into())),
            }
        }
        Ok(base)
    }
}

/// Intermediate parse result over generic variable names; the pair tag is
/// inferred (or checked) afterwards.
#[derive(Debug, Clone)]
struct RawPoly {
    // key: (first-var exponent, second-var exponent, which pair seen)
    terms: BTreeMap<(char, char, u32, u32), GaussianRational>,
}

impl RawPoly {
    fn constant(c: GaussianRational) -> Self {
        let mut terms = BTreeMap::new();
        if !c.is_zero() {
            terms.insert(('_', '_', 0, 0), c);
        }
        Self { terms }
    }

    fn var(v: char) -> Self {
        let mut terms = BTreeMap::new();
        let key = match v {
            'x' => ('x', 'y', 1, 0),
            'y' => ('x', 'y', 0, 1),
            'z' => ('z', 'w', 1, 0),
            'w' => ('z', 'w', 0, 1),
            _ => unreachable!(),
        };
        terms.insert(key, GaussianRational::one());
        Self { terms }
    }

    fn negate(&self) -> Self {
        let mut out = BTreeMap::new();
        for (k, c) in &self.terms {
            out.insert(*k, -c);
        }
        Self { terms: out }
    }

    fn add(&self, rhs: &Self) -> Self {
        let mut out = self.terms.clone();
        for (k, c) in &rhs.terms {
            let cur = out.remove(k).unwrap_or_else(GaussianRational::zero);
            let s = &cur + c;
            if !s.is_zero() {
                out.insert(*k, s);
            }
        }
        Self { terms: out }
    }

    fn mul(&self, rhs: &Self) -> Self {
        let mut out: BTreeMap<(char, char, u32, u32), GaussianRational> = BTreeMap::new();
        for ((p1, q1, i1, j1), c1) in &self.terms {
            for ((p2, _q2, i2, j2), c2) in &rhs.terms {
                let pair = match (*p1, *p2) {
                    ('_', '_') => ('_', '_'),
                    ('_', other) => (other, if other == 'x' { 'y' } else { 'w' }),
                    (other, '_') => (other, if other == 'x' { 'y' } else { 'w' }),
                    (a, b) if a == b => (a, *q1),
                    _ => ('!', '!'), // mixed pairs, rejected later
                };
                let key = (pair.0, pair.1, i1 + i2, j1 + j2);
                let prod = c1 * c2;
                let cur = out.remove(&key).unwrap_or_else(GaussianRational::zero);
                let s = &cur + &prod;
                if !s.is_zero() {
                    out.insert(key, s);
                }
            }
        }
        Self { terms: out }
    }

    fn pow(&self, e: u32) -> Self {
        let mut acc = RawPoly::constant(GaussianRational::one());
        for _ in 0..e {
            acc = acc.mul(self);
        }
        acc
    }
}

fn parse_poly(input: &str, want: Option<VarPair>) -> Result<Poly2> {
    let toks = tokenize(input)?;
    if toks.is_empty() {
        return Err(Error::Parse("empty input".into()));
    }
    let mut p = Parser { toks, pos: 0 };
    let raw = p.expr()?;
    if p.pos != p.toks.len() {
        return Err(Error::Parse("trailing tokens".into()));
    }
    // Determine the variable pair.
    let mut seen: Option<VarPair> = None;
    for k in raw.terms.keys() {
        let pair = match k.0 {
            'x' => Some(VarPair::Xy),
            'z' => Some(VarPair::Zw),
            '_' => None,
            _ => return Err(Error::Parse("mixed variable pairs in one polynomial".into())),
        };
        if let Some(pr) = pair {
            match seen {
                None => seen = Some(pr),
                Some(s) if s == pr => {}
                Some(_) => return Err(Error::Parse("mixed variable pairs in one polynomial".into())),
            }
        }
    }
    let vars = match (want, seen) {
        (Some(wv), Some(sv)) if wv != sv => {
            return Err(Error::WrongVariables { expected: wv.label(), found: sv.label() })
        }
        (Some(wv), _) => wv,
        (None, Some(sv)) => sv,
        (None, None) => VarPair::Xy,
    };
    let mut out = Poly2::zero(vars);
    for ((_, _, i, j), c) in raw.terms {
        out.add_term(Exp::new(i, j), c);
    }
    Ok(out)
}
