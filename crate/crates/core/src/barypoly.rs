//! Polynomials in the four barycentric coordinates of a tetrahedron.
//!
//! Representations are not reduced modulo `sum(lambda) = 1`, so two
//! different coefficient maps can describe the same function. Compare with
//! [`BaryPoly::lattice_diff`], never with `==` on the term maps.

use std::collections::BTreeMap;
use std::fmt;
use std::ops::{Add, AddAssign, Mul, Neg, Sub};

use num_bigint::BigInt;

use crate::error::{Error, Result};
use crate::geometry::{edge_id, face_vertices, SimplexGeometry};
use crate::scalar::{factorial, Scalar};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Default)]
pub struct MultiIndex4(pub [u32; 4]);

impl MultiIndex4 {
    pub const ZERO: MultiIndex4 = MultiIndex4([0; 4]);

    pub fn degree(&self) -> u32 {
        self.0.iter().sum()
    }

    pub fn unit(i: usize) -> Self {
        let mut e = [0; 4];
        e[i] = 1;
        MultiIndex4(e)
    }

    pub fn plus(&self, other: &Self) -> Self {
        MultiIndex4(std::array::from_fn(|i| self.0[i] + other.0[i]))
    }

    /// Exponent vector with entries placed at the given local vertices.
    pub fn on_vertices(vertices: &[usize], exps: &[u32]) -> Self {
        let mut e = [0; 4];
        for (&v, &x) in vertices.iter().zip(exps) {
            e[v] += x;
        }
        MultiIndex4(e)
    }
}

/// All exponent vectors of total degree `d` on `n` variables, in
/// descending lexicographic order (`(d,0,..)` first).
pub fn compositions(d: u32, n: usize) -> Vec<Vec<u32>> {
    if n == 1 {
        return vec![vec![d]];
    }
    let mut out = Vec::new();
    for first in (0..=d).rev() {
        for mut rest in compositions(d - first, n - 1) {
            rest.insert(0, first);
            out.push(rest);
        }
    }
    out
}

/// Monomials of total degree exactly `d` in the four coordinates.
pub fn monomials_of_degree(d: u32) -> Vec<MultiIndex4> {
    compositions(d, 4)
        .into_iter()
        .map(|c| MultiIndex4([c[0], c[1], c[2], c[3]]))
        .collect()
}

/// Number of polynomials of degree `<= d` in `dim` variables, `C(d+dim, dim)`.
pub fn dim_p(d: i64, dim: usize) -> usize {
    if d < 0 {
        return 0;
    }
    let d = d as usize;
    (1..=dim).fold(1, |acc, k| acc * (d + k) / k)
}

/// A sub-simplex of the tetrahedron, given by local vertex ids.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub enum Entity {
    Edge([usize; 2]),
    Face([usize; 3]),
    Cell,
}

impl Entity {
    /// Face opposite local vertex `m`.
    pub fn face(m: usize) -> Self {
        Entity::Face(face_vertices(m))
    }

    pub fn dim(&self) -> usize {
        match self {
            Entity::Edge(_) => 1,
            Entity::Face(_) => 2,
            Entity::Cell => 3,
        }
    }

    pub fn vertices(&self) -> Vec<usize> {
        match self {
            Entity::Edge(v) => v.to_vec(),
            Entity::Face(v) => v.to_vec(),
            Entity::Cell => vec![0, 1, 2, 3],
        }
    }

    pub fn contains(&self, v: usize) -> bool {
        match self {
            Entity::Edge(e) => e.contains(&v),
            Entity::Face(f) => f.contains(&v),
            Entity::Cell => true,
        }
    }

    /// True when the monomial does not vanish identically on the entity.
    pub fn supports(&self, mi: &MultiIndex4) -> bool {
        (0..4).all(|i| mi.0[i] == 0 || self.contains(i))
    }

    /// Measure of the entity on the given geometry.
    pub fn measure<S: Scalar>(&self, g: &SimplexGeometry<S>) -> Result<S> {
        match self {
            Entity::Edge([a, b]) => g.edge_length(edge_id(*a, *b)),
            Entity::Face(f) => {
                let m = (0..4).find(|v| !f.contains(v)).expect("face misses a vertex");
                g.face_area(m)
            }
            Entity::Cell => Ok(g.volume().clone()),
        }
    }
}

impl fmt::Display for Entity {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Entity::Edge(v) => write!(f, "edge {v:?}"),
            Entity::Face(v) => write!(f, "face {v:?}"),
            Entity::Cell => write!(f, "cell"),
        }
    }
}

const FLOAT_FACTORIALS: usize = 64;

fn float_factorial(n: u32) -> f64 {
    thread_local! {
        static TABLE: Vec<f64> = {
            let mut t = vec![1.0f64; FLOAT_FACTORIALS];
            for k in 1..FLOAT_FACTORIALS {
                t[k] = t[k - 1] * k as f64;
            }
            t
        };
    }
    TABLE.with(|t| t[n as usize])
}

/// `dim! * prod(a_i!) / (|a| + dim)!`, the mean of `lambda^a` over a
/// `dim`-simplex (ignoring which coordinates are involved).
fn factorial_ratio<S: Scalar>(mi: &MultiIndex4, dim: usize) -> S {
    let total = mi.degree() + dim as u32;
    if S::EXACT || total as usize >= FLOAT_FACTORIALS {
        let mut num = factorial(dim as u32);
        for &a in &mi.0 {
            num *= factorial(a);
        }
        let den: BigInt = factorial(total);
        S::from_bigint_ratio(&num, &den)
    } else {
        let mut r = float_factorial(dim as u32) / float_factorial(total);
        for &a in &mi.0 {
            r *= float_factorial(a);
        }
        S::from_f64(r)
    }
}

/// Mean value of `lambda^mi` over `entity`; geometry free.
pub fn normalized_moment<S: Scalar>(mi: &MultiIndex4, entity: &Entity) -> Result<S> {
    if !entity.supports(mi) {
        return Err(Error::VanishingCoordinate {
            exponents: mi.0,
            entity: entity.to_string(),
        });
    }
    Ok(factorial_ratio(mi, entity.dim()))
}

/// `int_entity lambda^mi` on the physical geometry.
pub fn exact_moment<S: Scalar>(
    mi: &MultiIndex4,
    entity: &Entity,
    g: &SimplexGeometry<S>,
) -> Result<S> {
    let mean: S = normalized_moment(mi, entity)?;
    Ok(mean * entity.measure(g)?)
}

#[derive(Clone, Debug, PartialEq)]
pub struct BaryPoly<S> {
    terms: BTreeMap<MultiIndex4, S>,
}

impl<S: Scalar> Default for BaryPoly<S> {
    fn default() -> Self {
        Self::zero()
    }
}

impl<S: Scalar> BaryPoly<S> {
    pub fn zero() -> Self {
        Self {
            terms: BTreeMap::new(),
        }
    }

    pub fn constant(c: S) -> Self {
        Self::monomial(MultiIndex4::ZERO, c)
    }

    pub fn one() -> Self {
        Self::constant(S::one())
    }

    pub fn lambda(i: usize) -> Self {
        Self::monomial(MultiIndex4::unit(i), S::one())
    }

    pub fn monomial(mi: MultiIndex4, c: S) -> Self {
        let mut p = Self::zero();
        p.add_term(mi, c);
        p
    }

    pub fn from_terms(terms: impl IntoIterator<Item = (MultiIndex4, S)>) -> Self {
        let mut p = Self::zero();
        for (mi, c) in terms {
            p.add_term(mi, c);
        }
        p
    }

    /// Face bubble `b_{F_m}`: product of the three coordinates of face `m`.
    pub fn face_bubble(m: usize) -> Self {
        let mut e = [1; 4];
        e[m] = 0;
        Self::monomial(MultiIndex4(e), S::one())
    }

    pub fn add_term(&mut self, mi: MultiIndex4, c: S) {
        if c.is_zero() {
            return;
        }
        match self.terms.get_mut(&mi) {
            Some(v) => {
                *v = v.clone() + c;
                if v.is_zero() {
                    self.terms.remove(&mi);
                }
            }
            None => {
                self.terms.insert(mi, c);
            }
        }
    }

    pub fn terms(&self) -> impl Iterator<Item = (&MultiIndex4, &S)> {
        self.terms.iter()
    }

    pub fn coeff(&self, mi: &MultiIndex4) -> S {
        self.terms.get(mi).cloned().unwrap_or_else(S::zero)
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn num_terms(&self) -> usize {
        self.terms.len()
    }

    /// Maximum total degree of a stored term (0 for the zero polynomial).
    pub fn degree(&self) -> u32 {
        self.terms.keys().map(|m| m.degree()).max().unwrap_or(0)
    }

    pub fn scale(&self, c: &S) -> Self {
        if c.is_zero() {
            return Self::zero();
        }
        Self {
            terms: self
                .terms
                .iter()
                .map(|(m, v)| (*m, v.clone() * c.clone()))
                .collect(),
        }
    }

    pub fn pow(&self, k: u32) -> Self {
        (0..k).fold(Self::one(), |acc, _| &acc * self)
    }

    pub fn map_field<T: Scalar>(&self, f: impl Fn(&S) -> T) -> BaryPoly<T> {
        BaryPoly::from_terms(self.terms.iter().map(|(m, c)| (*m, f(c))))
    }

    pub fn to_f64(&self) -> BaryPoly<f64> {
        self.map_field(|c| c.to_f64())
    }

    /// Value at barycentric weights that must sum to one.
    pub fn eval(&self, w: &[S; 4]) -> Result<S> {
        let sum = w[0].clone() + w[1].clone() + w[2].clone() + w[3].clone();
        let dev = sum - S::one();
        let bad = if S::EXACT {
            !dev.is_zero()
        } else {
            dev.to_f64().abs() > 1e-14
        };
        if bad {
            return Err(Error::MalformedWeights(dev.to_f64() + 1.0));
        }
        Ok(self.eval_unchecked(w))
    }

    /// Value at arbitrary weights, no normalization check.
    pub fn eval_unchecked(&self, w: &[S; 4]) -> S {
        let mut acc = S::zero();
        for (mi, c) in &self.terms {
            let mut t = c.clone();
            for i in 0..4 {
                for _ in 0..mi.0[i] {
                    t = t * w[i].clone();
                }
            }
            acc = acc + t;
        }
        acc
    }

    /// Formal partial derivative with respect to `lambda_i`.
    pub fn partial(&self, i: usize) -> Self {
        let mut out = Self::zero();
        for (mi, c) in &self.terms {
            let e = mi.0[i];
            if e == 0 {
                continue;
            }
            let mut d = *mi;
            d.0[i] -= 1;
            out.add_term(d, c.clone() * S::from_i64(e as i64));
        }
        out
    }

    /// Cartesian gradient `sum_i (grad lambda_i)_k dp/dlambda_i`.
    pub fn gradient_cartesian(&self, g: &SimplexGeometry<S>) -> [Self; 3] {
        let partials: Vec<Self> = (0..4).map(|i| self.partial(i)).collect();
        std::array::from_fn(|k| {
            let mut acc = Self::zero();
            for (i, p) in partials.iter().enumerate() {
                acc += p.scale(&g.grad_lambda(i)[k]);
            }
            acc
        })
    }

    /// Cartesian Hessian, symmetric.
    pub fn hessian_cartesian(&self, g: &SimplexGeometry<S>) -> [[Self; 3]; 3] {
        let grad = self.gradient_cartesian(g);
        let rows: Vec<[Self; 3]> = grad.iter().map(|d| d.gradient_cartesian(g)).collect();
        std::array::from_fn(|k| std::array::from_fn(|l| rows[k][l].clone()))
    }

    /// Mean value over a sub-simplex. Terms that vanish there contribute 0.
    pub fn mean(&self, entity: &Entity) -> S {
        let mut acc = S::zero();
        for (mi, c) in &self.terms {
            if entity.supports(mi) {
                acc = acc + c.clone() * factorial_ratio::<S>(mi, entity.dim());
            }
        }
        acc
    }

    /// Integral over a sub-simplex of the given geometry.
    pub fn integral(&self, entity: &Entity, g: &SimplexGeometry<S>) -> Result<S> {
        Ok(self.mean(entity) * entity.measure(g)?)
    }

    /// Max `|p - q|` over the principal lattice of order `max(deg, 1)`,
    /// which is unisolvent for the degree, so zero means equal functions.
    pub fn lattice_diff(&self, other: &Self) -> S {
        let diff = self - other;
        let d = diff.degree().max(1);
        let mut worst = S::zero();
        for a in monomials_of_degree(d) {
            let w: [S; 4] = std::array::from_fn(|i| S::from_ratio(a.0[i] as i64, d as i64));
            let v = diff.eval_unchecked(&w).abs();
            if v > worst {
                worst = v;
            }
        }
        worst
    }
}

impl<S: Scalar> AddAssign<&BaryPoly<S>> for BaryPoly<S> {
    fn add_assign(&mut self, rhs: &BaryPoly<S>) {
        for (m, c) in &rhs.terms {
            self.add_term(*m, c.clone());
        }
    }
}

impl<S: Scalar> AddAssign for BaryPoly<S> {
    fn add_assign(&mut self, rhs: BaryPoly<S>) {
        for (m, c) in rhs.terms {
            self.add_term(m, c);
        }
    }
}

impl<S: Scalar> Add for &BaryPoly<S> {
    type Output = BaryPoly<S>;
    fn add(self, rhs: &BaryPoly<S>) -> BaryPoly<S> {
        let mut out = self.clone();
        out += rhs;
        out
    }
}

impl<S: Scalar> Add for BaryPoly<S> {
    type Output = BaryPoly<S>;
    fn add(mut self, rhs: BaryPoly<S>) -> BaryPoly<S> {
        self += rhs;
        self
    }
}

impl<S: Scalar> Neg for &BaryPoly<S> {
    type Output = BaryPoly<S>;
    fn neg(self) -> BaryPoly<S> {
        BaryPoly {
            terms: self.terms.iter().map(|(m, c)| (*m, -c.clone())).collect(),
        }
    }
}

impl<S: Scalar> Neg for BaryPoly<S> {
    type Output = BaryPoly<S>;
    fn neg(self) -> BaryPoly<S> {
        -&self
    }
}

impl<S: Scalar> Sub for &BaryPoly<S> {
    type Output = BaryPoly<S>;
    fn sub(self, rhs: &BaryPoly<S>) -> BaryPoly<S> {
        let mut out = self.clone();
        for (m, c) in &rhs.terms {
            out.add_term(*m, -c.clone());
        }
        out
    }
}

impl<S: Scalar> Sub for BaryPoly<S> {
    type Output = BaryPoly<S>;
    fn sub(self, rhs: BaryPoly<S>) -> BaryPoly<S> {
        &self - &rhs
    }
}

impl<S: Scalar> Mul for &BaryPoly<S> {
    type Output = BaryPoly<S>;
    fn mul(self, rhs: &BaryPoly<S>) -> BaryPoly<S> {
        let mut out = BaryPoly::zero();
        for (ma, ca) in &self.terms {
            for (mb, cb) in &rhs.terms {
                out.add_term(ma.plus(mb), ca.clone() * cb.clone());
            }
        }
        out
    }
}

impl<S: Scalar> Mul for BaryPoly<S> {
    type Output = BaryPoly<S>;
    fn mul(self, rhs: BaryPoly<S>) -> BaryPoly<S> {
        &self * &rhs
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::scalar::Rational;

    type Q = BaryPoly<Rational>;

    fn q(n: i64, d: i64) -> Rational {
        Rational::from_ratio(n, d)
    }

    #[test]
    fn products() {
        let l1 = Q::lambda(0);
        assert_eq!(&l1 * &l1, Q::monomial(MultiIndex4([2, 0, 0, 0]), q(1, 1)));
        let b = &(&Q::lambda(0) * &Q::lambda(1)) * &Q::lambda(2);
        assert_eq!(b.coeff(&MultiIndex4([1, 1, 1, 0])), q(1, 1));
        assert_eq!(b, Q::face_bubble(3));

        let s = (0..4).fold(Q::zero(), |acc, i| acc + Q::lambda(i));
        let s2 = &s * &s;
        for i in 0..4 {
            for j in (i + 1)..4 {
                let mi = MultiIndex4::unit(i).plus(&MultiIndex4::unit(j));
                assert_eq!(s2.coeff(&mi), q(2, 1));
            }
        }
    }

    #[test]
    fn evaluation() {
        let c = [q(1, 4), q(1, 4), q(1, 4), q(1, 4)];
        assert_eq!(Q::lambda(0).eval(&c).unwrap(), q(1, 4));
        assert_eq!(Q::face_bubble(3).pow(2).eval(&c).unwrap(), q(1, 4096));
        assert!(Q::lambda(0)
            .eval(&[q(1, 2), q(1, 2), q(1, 2), q(0, 1)])
            .is_err());

        // 1/4 (35 l^4 - 60 l^3 + 30 l^2 - 4 l) at l = 1
        let l = Q::lambda(2);
        let p = (l.pow(4).scale(&q(35, 1)) - l.pow(3).scale(&q(60, 1))
            + l.pow(2).scale(&q(30, 1))
            - l.scale(&q(4, 1)))
        .scale(&q(1, 4));
        let vertex = [q(0, 1), q(0, 1), q(1, 1), q(0, 1)];
        assert_eq!(p.eval(&vertex).unwrap(), q(1, 4));
    }

    #[test]
    fn moments() {
        let edge = Entity::Edge([0, 1]);
        let m: Rational = normalized_moment(&MultiIndex4([2, 0, 0, 0]), &edge).unwrap();
        assert_eq!(m, q(1, 3));

        let g = SimplexGeometry::<Rational>::reference();
        let v = exact_moment(&MultiIndex4([1, 1, 1, 1]), &Entity::Cell, &g).unwrap();
        assert_eq!(v, q(1, 5040));

        let f: Rational = normalized_moment(&MultiIndex4([1, 1, 1, 0]), &Entity::face(3)).unwrap();
        assert_eq!(f, q(1, 60));

        let err = normalized_moment::<Rational>(&MultiIndex4([0, 0, 1, 0]), &edge);
        assert!(matches!(err, Err(Error::VanishingCoordinate { .. })));
    }

    #[test]
    fn float_and_exact_moments_agree() {
        for d in 0..=14 {
            for mi in monomials_of_degree(d) {
                let a: Rational = normalized_moment(&mi, &Entity::Cell).unwrap();
                let b: f64 = normalized_moment(&mi, &Entity::Cell).unwrap();
                assert!((a.to_f64() - b).abs() <= 1e-15 * b);
            }
        }
    }

    #[test]
    fn sum_of_coordinates_is_one() {
        let s = (0..4).fold(BaryPoly::<f64>::zero(), |acc, i| acc + BaryPoly::lambda(i));
        let w = [0.1, 0.2, 0.3, 0.4];
        assert!((s.eval(&w).unwrap() - 1.0).abs() < 1e-15);
        assert_eq!(s.lattice_diff(&BaryPoly::one()), 0.0);
    }

    #[test]
    fn exact_round_trip() {
        let p = Q::lambda(0).pow(3) + Q::lambda(1).scale(&q(-2, 7));
        let r = Q::face_bubble(0).scale(&q(5, 3));
        assert_eq!(&(&p + &r) - &r, p);
    }

    #[test]
    fn gradient_of_coordinate_is_constant() {
        let g = SimplexGeometry::<f64>::from_f64([
            [0.0, 0.1, 0.0],
            [1.2, 0.0, 0.1],
            [0.3, 0.9, 0.0],
            [0.1, 0.2, 1.1],
        ])
        .unwrap();
        for i in 0..4 {
            let grad = BaryPoly::<f64>::lambda(i).gradient_cartesian(&g);
            for k in 0..3 {
                assert_eq!(grad[k].degree(), 0);
                assert!((grad[k].coeff(&MultiIndex4::ZERO) - g.grad_lambda(i)[k]).abs() < 1e-15);
            }
        }
        let c = BaryPoly::<f64>::constant(3.0).gradient_cartesian(&g);
        assert!(c.iter().all(|p| p.is_zero()));
    }

    #[test]
    fn hessian_matches_finite_differences() {
        let g = SimplexGeometry::<f64>::from_f64([
            [0.0, 0.1, 0.0],
            [1.2, 0.0, 0.1],
            [0.3, 0.9, 0.0],
            [0.1, 0.2, 1.1],
        ])
        .unwrap();
        let l = BaryPoly::<f64>::lambda;
        let p = l(0).pow(2) * l(1) + l(2).pow(3).scale(&0.5) + l(3) * l(0) * l(2) * l(2);
        let h = p.hessian_cartesian(&g);
        let value = |x: [f64; 3]| p.eval_unchecked(&g.barycentric(&x));
        let step = 1e-3;
        for w in [[0.1, 0.2, 0.3, 0.4], [0.25, 0.25, 0.25, 0.25], [0.4, 0.3, 0.2, 0.1]] {
            let x = g.point(&w);
            for a in 0..3 {
                for b in 0..3 {
                    let shifted = |da: f64, db: f64| {
                        let mut y = x;
                        y[a] += da;
                        y[b] += db;
                        value(y)
                    };
                    let fd = (shifted(step, step) - shifted(step, -step) - shifted(-step, step)
                        + shifted(-step, -step))
                        / (4.0 * step * step);
                    let exact = h[a][b].eval_unchecked(&w);
                    assert!((fd - exact).abs() < 1e-5 * (1.0 + exact.abs()), "{fd} vs {exact}");
                }
            }
        }
    }

    #[test]
    fn composition_counts() {
        assert_eq!(monomials_of_degree(3).len(), 20);
        assert_eq!(dim_p(3, 3), 20);
        assert_eq!(dim_p(-1, 3), 0);
        assert_eq!(compositions(2, 2), vec![vec![2, 0], vec![1, 1], vec![0, 2]]);
    }
}
