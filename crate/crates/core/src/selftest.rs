//! Fixed-seed property checks over the parametrization tables, shipped in the
//! binary so an installed build can check itself.

use std::fmt::Write as _;

use num_bigint::BigInt;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::candidate::ParamId;
use crate::exact_arith::{reduce, Ratio};
use crate::params::{
    alpha_beta_from_t, build_npc_from_xi_zeta, check_condition8, check_theorem1,
    verify_identity7, xi_zeta_from_t, ParamTable, RationalParam, TABLES,
};
use crate::search::SieveConfig;
use crate::verifier::canonical_key;

const SEED: u64 = 0x6375_626f_6964;

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PropertyResult {
    pub name: &'static str,
    pub cases: usize,
    /// First counterexample, if any.
    pub failure: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SelftestReport {
    pub results: Vec<PropertyResult>,
}

impl SelftestReport {
    pub fn passed(&self) -> bool {
        self.results.iter().all(|r| r.failure.is_none())
    }

    pub fn render(&self) -> String {
        let mut out = String::new();
        for r in &self.results {
            match &r.failure {
                None => writeln!(out, "ok   {} ({} cases)", r.name, r.cases),
                Some(f) => writeln!(out, "FAIL {} ({} cases): {f}", r.name, r.cases),
            }
            .expect("write to string");
        }
        let failed = self.results.iter().filter(|r| r.failure.is_some()).count();
        writeln!(out, "{} properties, {failed} failed", self.results.len()).expect("write to string");
        out
    }
}

pub fn random_ratio(rng: &mut impl Rng) -> Ratio {
    let bound: i64 = if rng.gen_bool(0.5) { 1_000 } else { 1_000_000_000_000 };
    let num = rng.gen_range(-bound..=bound);
    let den = rng.gen_range(1..=bound);
    reduce(num.into(), den.into()).expect("nonzero denominator")
}

pub fn random_nontrivial_t(rng: &mut impl Rng) -> RationalParam {
    loop {
        if let Ok(t) = RationalParam::from_ratio(&random_ratio(rng)) {
            return t;
        }
    }
}

fn check<T>(
    name: &'static str,
    cases: usize,
    rng: &mut ChaCha8Rng,
    mut gen: impl FnMut(&mut ChaCha8Rng) -> T,
    mut prop: impl FnMut(&T) -> Result<(), String>,
) -> PropertyResult {
    let failure = (0..cases).find_map(|_| prop(&gen(rng)).err());
    PropertyResult {
        name,
        cases,
        failure,
    }
}

/// Homogenized `t⁴ − 2t² + 9`, written out independently of the tables.
fn quartic_factor(p: &BigInt, q: &BigInt) -> BigInt {
    let (p2, q2) = (p * p, q * q);
    &p2 * &p2 - 2 * &p2 * &q2 + 9 * &q2 * &q2
}

/// Runs every property against the built-in tables.
pub fn run() -> SelftestReport {
    run_with(&TABLES)
}

/// Runs every property against `tables` (ordered I, II, III).
pub fn run_with(tables: &[ParamTable; 3]) -> SelftestReport {
    let mut rng = ChaCha8Rng::seed_from_u64(SEED);
    let rng = &mut rng;
    let gen_t = |r: &mut ChaCha8Rng| random_nontrivial_t(r);
    let key = |id: usize, t: &RationalParam| -> Result<[BigInt; 6], String> {
        let c = tables[id]
            .generate_pq(t.p(), t.q())
            .map_err(|e| format!("{} at t = {}: {e}", ParamId::ALL[id], t.to_ratio()))?;
        canonical_key(&c).map_err(|e| format!("{} at t = {}: {e}", ParamId::ALL[id], t.to_ratio()))
    };

    let mut results = Vec::new();
    results.push(check("identity7", 1000, rng, random_ratio, |t| {
        verify_identity7(t)
            .then_some(())
            .ok_or_else(|| format!("T = {t}"))
    }));
    results.push(check(
        "condition8",
        1000,
        rng,
        |r| loop {
            let t = random_ratio(r);
            if t != Ratio::default() {
                return t;
            }
        },
        |t| match check_condition8(t) {
            Ok(true) => Ok(()),
            _ => Err(format!("t = {t}")),
        },
    ));
    results.push(check("alpha_beta_consistency", 500, rng, gen_t, |t| {
        let xz = xi_zeta_from_t(t);
        let ab = alpha_beta_from_t(t);
        let c = check_theorem1(&xz);
        if &ab.alpha * &ab.beta != *xz.xi() || &ab.alpha / &ab.beta != *xz.zeta() || !(c.c4 && c.c5) {
            return Err(format!("t = {}", t.to_ratio()));
        }
        Ok(())
    }));
    results.push(check("cross_parametrization", 500, rng, gen_t, |t| {
        let (p, q) = (t.p(), t.q());
        let one = tables[0].raw_values(p, q);
        let two = tables[1].raw_values(p, q);
        let three = tables[2].raw_values(p, q);
        let f = quartic_factor(p, q);
        let relations = [
            ("III.a = I.d_bc", three[0] == one[4]),
            ("III.c = I.a", three[2] == one[0]),
            ("III.d_ac = I.d_s", three[3] == one[5]),
            ("II.a = I.a·(t⁴−2t²+9)", two[0] == &one[0] * &f),
            ("II.d_bc = I.d_bc·(t⁴−2t²+9)", two[4] == &one[4] * &f),
            ("II.d_s = I.d_s·(t⁴−2t²+9)", two[5] == &one[5] * &f),
        ];
        match relations.iter().find(|(_, ok)| !ok) {
            Some((name, _)) => Err(format!("{name} fails at t = {}", t.to_ratio())),
            None => Ok(()),
        }
    }));
    results.push(check("pythagorean_identities", 200, rng, gen_t, |t| {
        for tab in tables {
            let c = tab
                .generate_pq(t.p(), t.q())
                .map_err(|e| format!("{} at t = {}: {e}", tab.id, t.to_ratio()))?;
            let ok = &c.a * &c.a + &c.c * &c.c == &c.d_ac * &c.d_ac
                && &c.b * &c.b + &c.c * &c.c == &c.d_bc * &c.d_bc
                && &c.a * &c.a + &c.b * &c.b + &c.c * &c.c == &c.d_s * &c.d_s;
            if !ok {
                return Err(format!("{} at t = {}", tab.id, t.to_ratio()));
            }
        }
        Ok(())
    }));
    results.push(check("symmetry_3_over_t", 200, rng, gen_t, |t| {
        for id in 0..3 {
            let base = key(id, t)?;
            if key(id, &t.three_over())? != base || key(id, &t.negated())? != base {
                return Err(format!("{} at t = {}", ParamId::ALL[id], t.to_ratio()));
            }
        }
        Ok(())
    }));
    results.push(check("theorem2_consistency", 200, rng, gen_t, |t| {
        let built = build_npc_from_xi_zeta(&xi_zeta_from_t(t))
            .map_err(|e| format!("t = {}: {e}", t.to_ratio()))?;
        let built = canonical_key(&built).map_err(|e| format!("t = {}: {e}", t.to_ratio()))?;
        (built == key(0, t)?)
            .then_some(())
            .ok_or_else(|| format!("t = {}", t.to_ratio()))
    }));
    let sieve = SieveConfig::default();
    results.push(check(
        "sieve_soundness",
        100_000,
        rng,
        |r| {
            let k = BigInt::from(r.gen::<u128>()) * BigInt::from(r.gen::<u64>());
            &k * &k
        },
        |s| {
            (!sieve.rejects_value(s))
                .then_some(())
                .ok_or_else(|| format!("square {s} rejected"))
        },
    ));
    SelftestReport { results }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::params::{HomPoly, Quantity, TABLE_II};

    #[test]
    fn builtin_tables_pass() {
        let report = run();
        assert!(report.passed(), "{}", report.render());
    }

    #[test]
    fn output_is_deterministic() {
        assert_eq!(run().render(), run().render());
    }

    #[test]
    fn sabotaged_table_ii_is_caught() {
        // t⁸+46t⁴+81 with 47 in place of 46, used in II.b, II.d_ac and II.d_s
        const BAD: HomPoly = HomPoly {
            name: "t⁸+47t⁴+81",
            coeffs: &[1, 0, 0, 0, 47, 0, 0, 0, 81],
        };
        const QUARTIC: HomPoly = HomPoly {
            name: "t⁴−2t²+9",
            coeffs: &[1, 0, -2, 0, 9],
        };
        let mut tables = TABLES;
        assert_eq!(TABLE_II.quantities[5].factors[0], QUARTIC);
        tables[1].quantities[5] = Quantity {
            scale: 1,
            factors: &[QUARTIC, BAD],
        };
        let report = run_with(&tables);
        assert!(!report.passed());
        let failed: Vec<_> = report
            .results
            .iter()
            .filter(|r| r.failure.is_some())
            .map(|r| r.name)
            .collect();
        assert!(failed.contains(&"cross_parametrization"), "{failed:?}");
        assert!(report.render().contains("FAIL cross_parametrization"));
    }
}
