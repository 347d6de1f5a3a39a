//! The three one-parameter families of nearly-perfect cuboids, the `(ξ, ζ)`
//! and `(α, β)` maps they come from, and the general builder that turns any
//! admissible `(ξ, ζ)` pair into a cuboid.
//!
//! Each family is stored as a table of homogeneous integer polynomials in
//! `(p, q)`, obtained from the rational formulas in `t = p/q` by multiplying
//! every entry by `q^D` (`D = 8` for I and III, `D = 12` for II). The same
//! table drives exact `BigInt` evaluation and the modular sieve.

use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::{One, Signed, Zero};

use crate::candidate::{CuboidCandidate, Origin, ParamId, Source};
use crate::error::{Error, Result};
use crate::exact_arith::{gcd_all, is_rational_square, rational_sqrt, reduce, Ratio};

/// Homogeneous polynomial `Σ coeffs[i] · p^(d-i) · q^i` with `d = coeffs.len() - 1`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct HomPoly {
    /// Human-readable form in `t`, used in degenerate-input messages.
    pub name: &'static str,
    pub coeffs: &'static [i64],
}

impl HomPoly {
    pub fn degree(&self) -> usize {
        self.coeffs.len() - 1
    }

    /// Exact value, given precomputed powers `p^0..` and `q^0..`.
    fn eval_with(&self, p_pow: &[BigInt], q_pow: &[BigInt]) -> BigInt {
        let d = self.degree();
        self.coeffs
            .iter()
            .enumerate()
            .filter(|(_, c)| **c != 0)
            .map(|(i, c)| BigInt::from(*c) * &p_pow[d - i] * &q_pow[i])
            .sum()
    }

    /// Value modulo `m` by Horner's rule in `p`, carrying powers of `q`.
    /// `m` must be below 2^31.
    pub fn eval_mod(&self, p: u64, q: u64, m: u64) -> u64 {
        let mut acc = 0u64;
        let mut q_pow = 1u64;
        for c in self.coeffs {
            let c = c.rem_euclid(m as i64) as u64;
            acc = (acc * p + c * q_pow) % m;
            q_pow = q_pow * q % m;
        }
        acc
    }
}

/// `scale · Π factors · q^pad`, one entry of a parametrization table.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Quantity {
    pub scale: i64,
    pub factors: &'static [HomPoly],
}

impl Quantity {
    pub fn degree(&self) -> usize {
        self.factors.iter().map(HomPoly::degree).sum()
    }
}

pub const QUANTITY_NAMES: [&str; 6] = ["a", "b", "c", "d_ac", "d_bc", "d_s"];

/// One parametrization table: entries for `a, b, c, d_ac, d_bc, d_s`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct ParamTable {
    pub id: ParamId,
    /// Homogenization degree `D`.
    pub degree: usize,
    pub quantities: [Quantity; 6],
}

const T: HomPoly = HomPoly { name: "t", coeffs: &[1, 0] };
const T2_PLUS_3: HomPoly = HomPoly { name: "t²+3", coeffs: &[1, 0, 3] };
const T2_MINUS_3: HomPoly = HomPoly { name: "t²−3", coeffs: &[1, 0, -3] };
const T4_MINUS_9: HomPoly = HomPoly { name: "t⁴−9", coeffs: &[1, 0, 0, 0, -9] };
const T4_MINUS_1: HomPoly = HomPoly { name: "t⁴−1", coeffs: &[1, 0, 0, 0, -1] };
const T4_MINUS_81: HomPoly = HomPoly { name: "t⁴−81", coeffs: &[1, 0, 0, 0, -81] };
const T4_M10_9: HomPoly = HomPoly { name: "t⁴−10t²+9", coeffs: &[1, 0, -10, 0, 9] };
const T4_P2_9: HomPoly = HomPoly { name: "t⁴+2t²+9", coeffs: &[1, 0, 2, 0, 9] };
const T4_M2_9: HomPoly = HomPoly { name: "t⁴−2t²+9", coeffs: &[1, 0, -2, 0, 9] };
const T4_P10_9: HomPoly = HomPoly { name: "t⁴+10t²+9", coeffs: &[1, 0, 10, 0, 9] };
const T8_P46_81: HomPoly = HomPoly {
    name: "t⁸+46t⁴+81",
    coeffs: &[1, 0, 0, 0, 46, 0, 0, 0, 81],
};
const T8_M82_81: HomPoly = HomPoly {
    name: "t⁸−82t⁴+81",
    coeffs: &[1, 0, 0, 0, -82, 0, 0, 0, 81],
};

pub const TABLE_I: ParamTable = ParamTable {
    id: ParamId::I,
    degree: 8,
    quantities: [
        Quantity { scale: 16, factors: &[T, T, T4_MINUS_9] },
        Quantity { scale: 1, factors: &[T4_M10_9, T4_P2_9] },
        Quantity { scale: 4, factors: &[T, T2_PLUS_3, T4_M10_9] },
        Quantity { scale: 4, factors: &[T, T2_PLUS_3, T4_M2_9] },
        Quantity { scale: 1, factors: &[T4_MINUS_1, T4_MINUS_81] },
        Quantity { scale: 1, factors: &[T8_P46_81] },
    ],
};

pub const TABLE_II: ParamTable = ParamTable {
    id: ParamId::II,
    degree: 12,
    quantities: [
        Quantity { scale: 16, factors: &[T, T, T4_MINUS_9, T4_M2_9] },
        Quantity { scale: 1, factors: &[T4_M10_9, T8_P46_81] },
        Quantity { scale: 4, factors: &[T, T2_MINUS_3, T4_M10_9, T4_P2_9] },
        Quantity { scale: 4, factors: &[T, T2_MINUS_3, T8_P46_81] },
        Quantity { scale: 1, factors: &[T4_M2_9, T8_M82_81] },
        Quantity { scale: 1, factors: &[T4_M2_9, T8_P46_81] },
    ],
};

pub const TABLE_III: ParamTable = ParamTable {
    id: ParamId::III,
    degree: 8,
    quantities: [
        Quantity { scale: 1, factors: &[T4_MINUS_1, T4_MINUS_81] },
        Quantity { scale: 4, factors: &[T, T2_MINUS_3, T4_P2_9] },
        Quantity { scale: 16, factors: &[T, T, T4_MINUS_9] },
        Quantity { scale: 1, factors: &[T8_P46_81] },
        Quantity { scale: 4, factors: &[T, T2_MINUS_3, T4_P10_9] },
        Quantity { scale: 1, factors: &[T4_M2_9, T4_P10_9] },
    ],
};

pub const TABLES: [ParamTable; 3] = [TABLE_I, TABLE_II, TABLE_III];

pub fn table(id: ParamId) -> &'static ParamTable {
    match id {
        ParamId::I => &TABLES[0],
        ParamId::II => &TABLES[1],
        ParamId::III => &TABLES[2],
    }
}

fn powers(base: &BigInt, max: usize) -> Vec<BigInt> {
    let mut out = Vec::with_capacity(max + 1);
    out.push(BigInt::one());
    for i in 0..max {
        let next = &out[i] * base;
        out.push(next);
    }
    out
}

impl ParamTable {
    /// The first factor (in `a, b, c, d_ac, d_bc, d_s` order) that vanishes at `(p, q)`.
    pub fn vanishing_factor(&self, p: &BigInt, q: &BigInt) -> Option<&'static str> {
        let max = self.max_factor_degree();
        let (pp, qp) = (powers(p, max), powers(q, max));
        self.quantities
            .iter()
            .flat_map(|qty| qty.factors.iter())
            .find(|f| f.eval_with(&pp, &qp).is_zero())
            .map(|f| f.name)
    }

    fn max_factor_degree(&self) -> usize {
        self.quantities
            .iter()
            .flat_map(|qty| qty.factors.iter())
            .map(HomPoly::degree)
            .max()
            .unwrap_or(0)
    }

    /// Signed homogenized values `q^D · X(p/q)` for the six entries, before
    /// absolute values or gcd reduction.
    pub fn raw_values(&self, p: &BigInt, q: &BigInt) -> [BigInt; 6] {
        let max = self.degree;
        let (pp, qp) = (powers(p, max), powers(q, max));
        self.quantities.map(|qty| {
            let product = qty
                .factors
                .iter()
                .fold(BigInt::from(qty.scale), |acc, f| acc * f.eval_with(&pp, &qp));
            product * &qp[self.degree - qty.degree()]
        })
    }

    /// `a² + b²` of the raw homogenized values; its squareness is invariant
    /// under the primitive reduction.
    pub fn raw_dab_sq(&self, p: &BigInt, q: &BigInt) -> BigInt {
        let [a, b, ..] = self.raw_values(p, q);
        &a * &a + &b * &b
    }

    /// `(a² + b²) mod m` straight from the factor polynomials.
    pub fn dab_sq_mod(&self, p: u64, q: u64, m: u64) -> u64 {
        let p = p % m;
        let q = q % m;
        let value = |qty: &Quantity| -> u64 {
            let mut acc = qty.scale.rem_euclid(m as i64) as u64;
            for f in qty.factors {
                acc = acc * f.eval_mod(p, q, m) % m;
            }
            for _ in 0..self.degree - qty.degree() {
                acc = acc * q % m;
            }
            acc
        };
        let a = value(&self.quantities[0]);
        let b = value(&self.quantities[1]);
        (a * a + b * b) % m
    }

    /// Evaluates the table at `t = p/q` and returns the primitive candidate.
    ///
    /// Unlike [`generate`], `t` need not be nontrivial: an excluded value is
    /// reported as [`Error::Degenerate`] naming the factor that vanishes.
    pub fn generate_pq(&self, p: &BigInt, q: &BigInt) -> Result<CuboidCandidate> {
        if q.is_zero() {
            return Err(Error::Domain("t has zero denominator".into()));
        }
        let t = Ratio::new(p.clone(), q.clone());
        let (p, q) = (t.numer(), t.denom());
        if let Some(factor) = self.vanishing_factor(p, q) {
            return Err(Error::Degenerate {
                factor: factor.to_string(),
            });
        }
        let raw = self.raw_values(p, q).map(|v| v.abs());
        let g = gcd_all(&raw);
        let primitive = raw.map(|v| v / &g);
        Ok(CuboidCandidate::from_quantities(
            primitive,
            g,
            Source::Param(self.id),
            Origin::T {
                p: p.clone(),
                q: q.clone(),
            },
        ))
    }
}

/// Nontrivial rational parameter `t = p/q`: reduced, `q ≥ 1`, and
/// `t ∉ {0, ±1, ±3}`.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct RationalParam {
    p: BigInt,
    q: BigInt,
}

impl RationalParam {
    pub fn new(p: impl Into<BigInt>, q: impl Into<BigInt>) -> Result<Self> {
        let t = reduce(p.into(), q.into())?;
        Self::from_ratio(&t)
    }

    pub fn from_ratio(t: &Ratio) -> Result<Self> {
        let (p, q) = (t.numer(), t.denom());
        let three_q = q * 3;
        if p.is_zero() || p.abs() == *q || p.abs() == three_q {
            return Err(Error::Domain(format!("trivial parameter t = {t}")));
        }
        Ok(RationalParam {
            p: p.clone(),
            q: q.clone(),
        })
    }

    pub fn p(&self) -> &BigInt {
        &self.p
    }

    pub fn q(&self) -> &BigInt {
        &self.q
    }

    pub fn to_ratio(&self) -> Ratio {
        Ratio::new_raw(self.p.clone(), self.q.clone())
    }

    /// `−t`
    pub fn negated(&self) -> Self {
        RationalParam {
            p: -&self.p,
            q: self.q.clone(),
        }
    }

    /// `3/t`, which maps every family onto the same cuboids.
    pub fn three_over(&self) -> Self {
        Self::from_ratio(&(Ratio::from_integer(3.into()) / self.to_ratio()))
            .expect("3/t is nontrivial whenever t is")
    }
}

/// Evaluates parametrization `id` at a nontrivial `t`.
pub fn generate(id: ParamId, t: &RationalParam) -> Result<CuboidCandidate> {
    table(id).generate_pq(&t.p, &t.q)
}

fn is_trivial(r: &Ratio) -> bool {
    r.is_zero() || r.abs().is_one()
}

/// A pair `(ξ, ζ)` of distinct rationals outside `{0, ±1}`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct XiZeta {
    xi: Ratio,
    zeta: Ratio,
}

impl XiZeta {
    pub fn new(xi: Ratio, zeta: Ratio) -> Result<Self> {
        if is_trivial(&xi) {
            return Err(Error::Precondition(format!("ξ = {xi} is trivial")));
        }
        if is_trivial(&zeta) {
            return Err(Error::Precondition(format!("ζ = {zeta} is trivial")));
        }
        if xi == zeta {
            return Err(Error::Precondition(format!("ξ = ζ = {xi}")));
        }
        Ok(XiZeta { xi, zeta })
    }

    pub fn xi(&self) -> &Ratio {
        &self.xi
    }

    pub fn zeta(&self) -> &Ratio {
        &self.zeta
    }

    /// `(1 − ξ²)(1 − ζ²)`
    fn product_term(&self) -> Ratio {
        let one = Ratio::one();
        (&one - &self.xi * &self.xi) * (&one - &self.zeta * &self.zeta)
    }
}

/// `α` and `β` with `αβ = ξ` and `α/β = ζ`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct AlphaBeta {
    pub alpha: Ratio,
    pub beta: Ratio,
}

fn square(r: &Ratio) -> Ratio {
    r * r
}

/// `ξ = (t²+3)/(4t)`, `ζ = ξ · ((t²−3)/(2t))²`.
pub fn xi_zeta_from_t(t: &RationalParam) -> XiZeta {
    let t = t.to_ratio();
    let t2 = square(&t);
    let three = Ratio::from_integer(3.into());
    let xi = (&t2 + &three) / (&t * BigInt::from(4));
    let zeta = &xi * square(&((&t2 - &three) / (&t * BigInt::from(2))));
    XiZeta::new(xi, zeta).expect("nontrivial t gives distinct nontrivial ξ, ζ")
}

/// `α = (t⁴−9)/(8t²)`, `β = 2t/(t²−3)`.
pub fn alpha_beta_from_t(t: &RationalParam) -> AlphaBeta {
    let t = t.to_ratio();
    let t2 = square(&t);
    let alpha = (square(&t2) - BigInt::from(9)) / (&t2 * BigInt::from(8));
    let beta = (&t * BigInt::from(2)) / (t2 - BigInt::from(3));
    AlphaBeta { alpha, beta }
}

/// Squareness of `ξζ`, `(1−ξ²)(1−ζ²)` and `(1−ξ²)(1−ζ²) + 4ξζ`. All three
/// true would give a perfect cuboid.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Theorem1Check {
    pub c4: bool,
    pub c5: bool,
    pub c6: bool,
}

impl Theorem1Check {
    pub fn all(&self) -> bool {
        self.c4 && self.c5 && self.c6
    }
}

pub fn check_theorem1(xz: &XiZeta) -> Theorem1Check {
    let prod = &xz.xi * &xz.zeta;
    let term = xz.product_term();
    Theorem1Check {
        c4: is_rational_square(&prod),
        c5: is_rational_square(&term),
        c6: is_rational_square(&(&term + prod * BigInt::from(4))),
    }
}

/// Builds the cuboid determined by an admissible `(ξ, ζ)`.
///
/// With `a = 1`: `α = √(ξζ)`, `β = √(ξ/ζ)`, then
/// `d_s = (1+α²)/(2α)`, `d_bc = (1−α²)/(2α)`, `d_ac = (1+β²)/(2β)`,
/// `c = (1−β²)/(2β)` and `b = √((1−ξ²)(1−ζ²)/(4ξζ))`. Denominators are
/// cleared and the result reduced to primitive form.
pub fn build_npc_from_xi_zeta(xz: &XiZeta) -> Result<CuboidCandidate> {
    let prod = &xz.xi * &xz.zeta;
    let term = xz.product_term();
    let alpha = rational_sqrt(&prod)
        .ok_or_else(|| Error::Precondition(format!("ξζ = {prod} is not a rational square")))?;
    let beta = rational_sqrt(&(&xz.xi / &xz.zeta))
        .ok_or_else(|| Error::Precondition(format!("ξ/ζ = {} is not a rational square", &xz.xi / &xz.zeta)))?;
    if !is_rational_square(&term) {
        return Err(Error::Precondition(format!(
            "(1−ξ²)(1−ζ²) = {term} is not a rational square"
        )));
    }
    let b = rational_sqrt(&(&term / (&prod * BigInt::from(4)))).ok_or_else(|| {
        Error::Integrity("(1−ξ²)(1−ζ²)/(4ξζ) is not a square although both parts are".into())
    })?;

    let one = Ratio::one();
    let two = BigInt::from(2);
    let a2 = square(&alpha);
    let b2 = square(&beta);
    let ratios = [
        (one.clone(), "a"),
        (b, "b"),
        ((&one - &b2) / (&beta * &two), "c"),
        ((&one + &b2) / (&beta * &two), "d_ac"),
        ((&one - &a2) / (&alpha * &two), "d_bc"),
        ((&one + &a2) / (&alpha * &two), "d_s"),
    ];
    if let Some((_, name)) = ratios.iter().find(|(r, _)| r.is_zero()) {
        return Err(Error::Degenerate {
            factor: (*name).to_string(),
        });
    }
    let lcm = ratios
        .iter()
        .fold(BigInt::one(), |acc, (r, _)| acc.lcm(r.denom()));
    let scaled = ratios.map(|(r, _)| (r * &lcm).to_integer().abs());
    let g = gcd_all(&scaled);
    let primitive = scaled.map(|v| v / &g);
    Ok(CuboidCandidate::from_quantities(
        primitive,
        g,
        Source::Theorem2,
        Origin::XiZeta {
            xi: xz.xi.clone(),
            zeta: xz.zeta.clone(),
        },
    ))
}

/// Both sides of `(1−T²)(1−(4T³−3T)²) = [(1−T²)(1−4T²)]²`, compared exactly.
pub fn verify_identity7(t: &Ratio) -> bool {
    let one = Ratio::one();
    let t2 = square(t);
    let cheb = t * (&t2 * BigInt::from(4) - BigInt::from(3));
    let lhs = (&one - &t2) * (&one - square(&cheb));
    let rhs = square(&((&one - &t2) * (&one - t2 * BigInt::from(4))));
    lhs == rhs
}

/// Whether `4T² − 3` is a rational square for `T = (t²+3)/(4t)`.
pub fn check_condition8(t: &Ratio) -> Result<bool> {
    if t.is_zero() {
        return Err(Error::Domain("t = 0".into()));
    }
    let big_t = (square(t) + BigInt::from(3)) / (t * BigInt::from(4));
    Ok(is_rational_square(&(square(&big_t) * BigInt::from(4) - BigInt::from(3))))
}
