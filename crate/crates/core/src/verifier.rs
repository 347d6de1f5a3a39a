//! Independent re-verification of candidates. Everything is recomputed from
//! the six stored quantities; nothing a generator derived is trusted.

use num_bigint::BigInt;
use num_traits::{One, Signed};

use crate::candidate::{CuboidCandidate, DabStatus};
use crate::error::{Error, Result};
use crate::exact_arith::{gcd_all, square_root};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Classification {
    Degenerate,
    /// Only the `(a, b)` face diagonal is irrational.
    Npc,
    /// All seven quantities are integers: a perfect cuboid.
    PcHit,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct VerificationReport {
    pub identity_ac_ok: bool,
    pub identity_bc_ok: bool,
    pub identity_s_ok: bool,
    pub dab_status: DabStatus,
    pub primitive: bool,
    /// The stored `dab_sq` and `dab_status` agree with the recomputed ones.
    pub stored_fields_ok: bool,
    pub classification: Classification,
    pub reason: Option<String>,
}

impl VerificationReport {
    pub fn is_success(&self) -> bool {
        self.classification != Classification::Degenerate && self.stored_fields_ok
    }
}

fn sq(v: &BigInt) -> BigInt {
    v * v
}

pub fn verify(c: &CuboidCandidate) -> VerificationReport {
    let (a2, b2, c2) = (sq(&c.a), sq(&c.b), sq(&c.c));
    let identity_ac_ok = &a2 + &c2 == sq(&c.d_ac);
    let identity_bc_ok = &b2 + &c2 == sq(&c.d_bc);
    let identity_s_ok = &a2 + &b2 + &c2 == sq(&c.d_s);
    let dab_sq = &a2 + &b2;
    let dab_status = DabStatus::of(&dab_sq);
    let stored_fields_ok = c.dab_sq == dab_sq && c.dab_status == dab_status;
    let primitive = gcd_all(c.quantities()).is_one();

    let mut reason = None;
    let names = ["a", "b", "c", "d_ac", "d_bc", "d_s"];
    if let Some((name, _)) = names
        .iter()
        .zip(c.quantities())
        .find(|(_, v)| !v.is_positive())
    {
        reason = Some(format!("{name} is not positive"));
    } else if !identity_ac_ok {
        reason = Some("a² + c² ≠ d_ac²".into());
    } else if !identity_bc_ok {
        reason = Some("b² + c² ≠ d_bc²".into());
    } else if !identity_s_ok {
        reason = Some("a² + b² + c² ≠ d_s²".into());
    }
    let classification = match (&reason, &dab_status) {
        (Some(_), _) => Classification::Degenerate,
        (None, DabStatus::Square(_)) => Classification::PcHit,
        (None, DabStatus::NonSquare) => Classification::Npc,
    };
    if reason.is_none() && !stored_fields_ok {
        reason = Some("stored a² + b² fields disagree with the sides".into());
    }
    VerificationReport {
        identity_ac_ok,
        identity_bc_ok,
        identity_s_ok,
        dab_status,
        primitive,
        stored_fields_ok,
        classification,
        reason,
    }
}

/// Canonical form, re-derived from the three sides alone.
///
/// Sides are reduced by their gcd. For a nearly-perfect cuboid the pair with
/// the irrational face diagonal becomes `(a, b)` with `a > b`, and `c` is the
/// remaining side. For a perfect cuboid all three sides are sorted descending.
/// Diagonals are recomputed; origin and source are kept.
pub fn canonicalize(c: &CuboidCandidate) -> Result<CuboidCandidate> {
    let sides = [&c.a, &c.b, &c.c].map(|v| v.abs());
    if sides.iter().any(|v| !v.is_positive()) {
        return Err(Error::Precondition("side of length zero".into()));
    }
    let g = gcd_all(&sides);
    let mut sides = sides.map(|v| v / &g);
    sides.sort_unstable_by(|x, y| y.cmp(x));

    let space = square_root(&sides.iter().map(sq).sum())
        .ok_or_else(|| Error::Precondition("space diagonal is irrational".into()))?;
    // face pairs: (0,1), (0,2), (1,2)
    let pairs = [(0, 1), (0, 2), (1, 2)];
    let irrational: Vec<_> = pairs
        .iter()
        .filter(|(i, j)| square_root(&(sq(&sides[*i]) + sq(&sides[*j]))).is_none())
        .collect();
    let [a, b, cc] = match irrational.as_slice() {
        [] => sides,
        [(i, j)] => {
            let k = 3 - i - j;
            [sides[*i].clone(), sides[*j].clone(), sides[k].clone()]
        }
        _ => {
            return Err(Error::Precondition(format!(
                "{} irrational face diagonals",
                irrational.len()
            )))
        }
    };
    let root = |x: &BigInt, y: &BigInt| {
        square_root(&(sq(x) + sq(y))).expect("face diagonal checked rational")
    };
    let d_ac = root(&a, &cc);
    let d_bc = root(&b, &cc);
    Ok(CuboidCandidate::from_quantities(
        [a, b, cc, d_ac, d_bc, space],
        &c.primitive_gcd * g,
        c.source,
        c.origin.clone(),
    ))
}

/// The six canonical quantities, for comparing candidates from different
/// constructions.
pub fn canonical_key(c: &CuboidCandidate) -> Result<[BigInt; 6]> {
    canonicalize(c).map(|k| k.quantities_owned())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::candidate::{Origin, ParamId, Source};
    use crate::params::{generate, RationalParam};

    fn cand(v: [i64; 6]) -> CuboidCandidate {
        CuboidCandidate::from_quantities(
            v.map(BigInt::from),
            BigInt::one(),
            Source::External,
            Origin::Unknown,
        )
    }

    #[test]
    fn generated_candidate_is_npc() {
        let c = generate(ParamId::I, &RationalParam::new(2, 1).unwrap()).unwrap();
        let r = verify(&c);
        assert!(r.identity_ac_ok && r.identity_bc_ok && r.identity_s_ok);
        assert_eq!(r.dab_status, DabStatus::NonSquare);
        assert_eq!(r.classification, Classification::Npc);
        assert!(r.primitive && r.stored_fields_ok && r.is_success());
    }

    #[test]
    fn broken_identity_reported() {
        let r = verify(&cand([3, 4, 12, 15, 12, 13]));
        assert!(!r.identity_ac_ok);
        assert_eq!(r.classification, Classification::Degenerate);
        assert!(r.reason.is_some());
    }

    #[test]
    fn euler_brick_with_irrational_space_diagonal_is_degenerate() {
        assert_eq!(44 * 44 + 117 * 117, 125 * 125);
        assert_eq!(117 * 117 + 240 * 240, 267 * 267);
        assert_eq!(44 * 44 + 240 * 240, 244 * 244);
        let r = verify(&cand([44, 240, 117, 125, 267, 270]));
        assert!(r.identity_ac_ok && r.identity_bc_ok && !r.identity_s_ok);
        assert_eq!(r.dab_status, DabStatus::Square(BigInt::from(244)));
        assert_eq!(r.classification, Classification::Degenerate);
        assert!(canonicalize(&cand([44, 240, 117, 125, 267, 270])).is_err());
    }

    #[test]
    fn tampered_stored_field_is_flagged() {
        let mut c = cand([448, 495, 840, 952, 975, 1073]);
        c.dab_sq += 1;
        let r = verify(&c);
        assert_eq!(r.classification, Classification::Npc);
        assert!(!r.stored_fields_ok && !r.is_success());
    }

    #[test]
    fn verify_is_pure() {
        let c = cand([448, 495, 840, 952, 975, 1073]);
        assert_eq!(verify(&c), verify(&c));
    }

    #[test]
    fn canonical_form_puts_irrational_pair_first() {
        let relabeled = cand([840, 448, 495, 975, 0, 0]);
        let k = canonicalize(&relabeled).unwrap();
        assert_eq!(k.quantities_owned(), [495, 448, 840, 975, 952, 1073].map(BigInt::from));
        assert_eq!(verify(&k).classification, Classification::Npc);
    }

    #[test]
    fn canonical_form_removes_scale_and_is_idempotent() {
        let base = generate(ParamId::I, &RationalParam::new(2, 1).unwrap()).unwrap();
        let scaled = cand([448, 495, 840, 952, 975, 1073].map(|v| v * 7));
        let k1 = canonicalize(&scaled).unwrap();
        assert_eq!(k1.quantities(), canonicalize(&base).unwrap().quantities());
        assert_eq!(k1.primitive_gcd, BigInt::from(7));
        let k2 = canonicalize(&k1).unwrap();
        assert_eq!(k1.quantities(), k2.quantities());
    }

    #[test]
    fn canonicalize_rejects_zero_side() {
        assert!(canonicalize(&cand([0, 4, 3, 3, 5, 5])).is_err());
    }
}
