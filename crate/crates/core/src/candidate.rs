use std::fmt;
use std::str::FromStr;

use num_bigint::BigInt;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::exact_arith::{square_root, Ratio};

/// One of the three one-parameter families.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum ParamId {
    I,
    II,
    III,
}

impl ParamId {
    pub const ALL: [ParamId; 3] = [ParamId::I, ParamId::II, ParamId::III];

    pub fn as_str(self) -> &'static str {
        match self {
            ParamId::I => "I",
            ParamId::II => "II",
            ParamId::III => "III",
        }
    }
}

impl fmt::Display for ParamId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for ParamId {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "I" | "1" => Ok(ParamId::I),
            "II" | "2" => Ok(ParamId::II),
            "III" | "3" => Ok(ParamId::III),
            _ => Err(Error::Parse(format!("unknown parametrization {s:?}"))),
        }
    }
}

/// Squareness of `a² + b²`, the one face diagonal that is not forced rational.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum DabStatus {
    NonSquare,
    Square(BigInt),
}

impl DabStatus {
    pub fn of(dab_sq: &BigInt) -> Self {
        match square_root(dab_sq) {
            Some(root) => DabStatus::Square(root),
            None => DabStatus::NonSquare,
        }
    }

    pub fn root(&self) -> Option<&BigInt> {
        match self {
            DabStatus::Square(root) => Some(root),
            DabStatus::NonSquare => None,
        }
    }
}

/// Which construction produced a candidate.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Source {
    Param(ParamId),
    Theorem2,
    /// Read back from a file; no construction is trusted.
    External,
}

impl fmt::Display for Source {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Source::Param(id) => id.fmt(f),
            Source::Theorem2 => f.write_str("theorem2"),
            Source::External => f.write_str("external"),
        }
    }
}

/// Parameter values a candidate was generated from.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Origin {
    T { p: BigInt, q: BigInt },
    XiZeta { xi: Ratio, zeta: Ratio },
    Unknown,
}

/// Three sides, the two face diagonals forced rational, and the space diagonal.
///
/// `(a, b)` is the pair whose face diagonal is not guaranteed rational;
/// `dab_sq = a² + b²` and `dab_status` records whether it is a square.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CuboidCandidate {
    pub a: BigInt,
    pub b: BigInt,
    pub c: BigInt,
    pub d_ac: BigInt,
    pub d_bc: BigInt,
    pub d_s: BigInt,
    pub dab_sq: BigInt,
    pub dab_status: DabStatus,
    /// Factor divided out of the raw values to reach the primitive form.
    pub primitive_gcd: BigInt,
    pub source: Source,
    pub origin: Origin,
}

impl CuboidCandidate {
    /// Builds a candidate from `[a, b, c, d_ac, d_bc, d_s]`, deriving `dab_sq`
    /// and its squareness.
    pub fn from_quantities(
        q: [BigInt; 6],
        primitive_gcd: BigInt,
        source: Source,
        origin: Origin,
    ) -> Self {
        let [a, b, c, d_ac, d_bc, d_s] = q;
        let dab_sq = &a * &a + &b * &b;
        let dab_status = DabStatus::of(&dab_sq);
        CuboidCandidate {
            a,
            b,
            c,
            d_ac,
            d_bc,
            d_s,
            dab_sq,
            dab_status,
            primitive_gcd,
            source,
            origin,
        }
    }

    /// `[a, b, c, d_ac, d_bc, d_s]`
    pub fn quantities(&self) -> [&BigInt; 6] {
        [&self.a, &self.b, &self.c, &self.d_ac, &self.d_bc, &self.d_s]
    }

    pub fn quantities_owned(&self) -> [BigInt; 6] {
        self.quantities().map(Clone::clone)
    }

    pub fn to_record(&self) -> CandidateRecord {
        let (p, q) = match &self.origin {
            Origin::T { p, q } => (Some(p.to_string()), Some(q.to_string())),
            _ => (None, None),
        };
        CandidateRecord {
            param: self.source.to_string(),
            p,
            q,
            a: self.a.to_string(),
            b: self.b.to_string(),
            c: self.c.to_string(),
            d_ac: self.d_ac.to_string(),
            d_bc: self.d_bc.to_string(),
            d_s: self.d_s.to_string(),
            dab_sq: self.dab_sq.to_string(),
            dab_root: self.dab_status.root().map(ToString::to_string),
            primitive_gcd: self.primitive_gcd.to_string(),
        }
    }
}

/// Flat serialized form shared by the JSONL and CSV outputs. Every integer is
/// a decimal string.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct CandidateRecord {
    pub param: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub p: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub q: Option<String>,
    pub a: String,
    pub b: String,
    pub c: String,
    pub d_ac: String,
    pub d_bc: String,
    pub d_s: String,
    pub dab_sq: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub dab_root: Option<String>,
    pub primitive_gcd: String,
}

fn parse_int(field: &str, value: &str) -> Result<BigInt> {
    value
        .trim()
        .parse()
        .map_err(|_| Error::Parse(format!("field {field}: not an integer: {value:?}")))
}

/// A record as read back from disk: the six quantities plus the stored values
/// a verifier must not trust.
#[derive(Debug, Clone)]
pub struct StoredCandidate {
    pub candidate: CuboidCandidate,
    pub stored_dab_sq: BigInt,
    pub stored_dab_root: Option<BigInt>,
}

impl CandidateRecord {
    /// Parses the record. Derived fields are recomputed from the six
    /// quantities; the stored ones are returned alongside for comparison.
    pub fn parse(&self) -> Result<StoredCandidate> {
        let source = match self.param.as_str() {
            "theorem2" => Source::Theorem2,
            other => other
                .parse::<ParamId>()
                .map(Source::Param)
                .unwrap_or(Source::External),
        };
        let origin = match (&self.p, &self.q) {
            (Some(p), Some(q)) => Origin::T {
                p: parse_int("p", p)?,
                q: parse_int("q", q)?,
            },
            _ => Origin::Unknown,
        };
        let quantities = [
            parse_int("a", &self.a)?,
            parse_int("b", &self.b)?,
            parse_int("c", &self.c)?,
            parse_int("d_ac", &self.d_ac)?,
            parse_int("d_bc", &self.d_bc)?,
            parse_int("d_s", &self.d_s)?,
        ];
        let candidate = CuboidCandidate::from_quantities(
            quantities,
            parse_int("primitive_gcd", &self.primitive_gcd)?,
            source,
            origin,
        );
        Ok(StoredCandidate {
            candidate,
            stored_dab_sq: parse_int("dab_sq", &self.dab_sq)?,
            stored_dab_root: self
                .dab_root
                .as_deref()
                .map(|r| parse_int("dab_root", r))
                .transpose()?,
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn param_id_round_trips_through_str() {
        for id in ParamId::ALL {
            assert_eq!(id.as_str().parse::<ParamId>().unwrap(), id);
        }
        assert!("IV".parse::<ParamId>().is_err());
    }

    #[test]
    fn record_omits_root_for_non_square() {
        let c = CuboidCandidate::from_quantities(
            [448, 495, 840, 952, 975, 1073].map(BigInt::from),
            BigInt::from(1),
            Source::Param(ParamId::I),
            Origin::T {
                p: 2.into(),
                q: 1.into(),
            },
        );
        assert_eq!(c.dab_sq, BigInt::from(445_729));
        assert_eq!(c.dab_status, DabStatus::NonSquare);
        let json = serde_json::to_string(&c.to_record()).unwrap();
        assert!(!json.contains("dab_root"));
        assert!(json.contains(r#""a":"448""#));
        let back: CandidateRecord = serde_json::from_str(&json).unwrap();
        assert_eq!(back.parse().unwrap().candidate, c);
    }

    #[test]
    fn record_parse_rejects_garbage() {
        let mut rec = CuboidCandidate::from_quantities(
            [3, 4, 12, 15, 12, 13].map(BigInt::from),
            BigInt::from(1),
            Source::External,
            Origin::Unknown,
        )
        .to_record();
        rec.c = "12x".into();
        assert!(matches!(rec.parse(), Err(Error::Parse(_))));
    }
}
