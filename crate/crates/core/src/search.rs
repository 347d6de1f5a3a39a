//! Height-ordered search over rational `t = p/q` for a parameter at which the
//! free face diagonal `√(a² + b²)` of one of the families becomes rational.
//!
//! Pairs are enumerated by height `p + q` inside the fundamental domain
//! `t > √3`; the maps `t ↦ −t` and `t ↦ 3/t` send every other nontrivial
//! parameter onto the same cuboid. Each (pair, family) is first screened by a
//! quadratic-residue sieve on `S = a² + b²` computed modulo small integers
//! straight from the homogeneous polynomials, and only survivors are tested
//! with exact big-integer arithmetic.
//!
//! Progress is persisted as a JSON checkpoint after every
//! `checkpoint_every` completed heights. A height is either fully recorded or
//! fully redone, so resuming never skips or double-counts a pair.

use std::fs;
use std::io::Write;
use std::path::Path;
use std::time::Instant;

use num_bigint::BigInt;
use num_integer::Integer;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::candidate::{CandidateRecord, CuboidCandidate, ParamId};
use crate::error::{Error, Result};
use crate::exact_arith::{is_perfect_square, square_root};
use crate::params::table;
use crate::verifier::{verify, Classification};

pub const CHECKPOINT_VERSION: u64 = 1;
/// `a² + b²` factors into two conjugate polynomials for every family, which
/// makes it a residue modulo 64, 63, 65 and 11 far more often than a random
/// integer; the primes 17..=53 bring rejection of non-squares to about 99%.
pub const DEFAULT_MODULI: [u64; 14] = [64, 63, 65, 11, 17, 19, 23, 29, 31, 37, 41, 43, 47, 53];
/// Keeps every intermediate of the modular evaluation inside `u64`.
pub const MAX_MODULUS: u64 = 1 << 20;

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SearchWindow {
    pub min_height: u64,
    pub max_height: u64,
    /// Sorted, without duplicates.
    pub param_ids: Vec<ParamId>,
}

impl SearchWindow {
    pub fn new(min_height: u64, max_height: u64, mut param_ids: Vec<ParamId>) -> Result<Self> {
        if min_height < 3 {
            return Err(Error::Domain(format!(
                "minimum height is 3, got {min_height}"
            )));
        }
        if max_height < min_height {
            return Err(Error::Domain(format!(
                "max height {max_height} is below min height {min_height}"
            )));
        }
        param_ids.sort_unstable();
        param_ids.dedup();
        if param_ids.is_empty() {
            return Err(Error::Domain("no parametrization selected".into()));
        }
        Ok(SearchWindow {
            min_height,
            max_height,
            param_ids,
        })
    }
}

/// Whether `(p, q)` is a reduced nontrivial pair in the fundamental domain.
pub fn in_fundamental_domain(p: u64, q: u64) -> bool {
    q >= 1 && p * p > 3 * q * q && p != 3 * q && p.gcd(&q) == 1
}

/// Pairs of height `h`, ascending in `p`.
pub fn pairs_at_height(h: u64) -> impl Iterator<Item = (u64, u64)> {
    (1..h)
        .map(move |p| (p, h - p))
        .filter(|&(p, q)| in_fundamental_domain(p, q))
}

/// All pairs of the window, ordered by height and then by `p`.
pub fn enumerate_params(w: &SearchWindow) -> impl Iterator<Item = (u64, u64)> {
    (w.min_height..=w.max_height).flat_map(pairs_at_height)
}

/// Moduli and their quadratic-residue tables.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SieveConfig {
    moduli: Vec<u64>,
    /// `residue_tables[i][x]` is true iff `x` is a square modulo `moduli[i]`.
    residue_tables: Vec<Vec<bool>>,
}

impl SieveConfig {
    pub fn new(moduli: &[u64]) -> Result<Self> {
        if let Some(m) = moduli.iter().find(|&&m| !(2..=MAX_MODULUS).contains(&m)) {
            return Err(Error::Domain(format!(
                "sieve modulus {m} outside 2..={MAX_MODULUS}"
            )));
        }
        let residue_tables = moduli
            .iter()
            .map(|&m| {
                let mut table = vec![false; m as usize];
                for y in 0..m {
                    table[(y * y % m) as usize] = true;
                }
                table
            })
            .collect();
        Ok(SieveConfig {
            moduli: moduli.to_vec(),
            residue_tables,
        })
    }

    pub fn moduli(&self) -> &[u64] {
        &self.moduli
    }

    pub fn residue_table(&self, i: usize) -> &[bool] {
        &self.residue_tables[i]
    }

    /// Rejects when `residue(m)`, the value reduced modulo `m`, is a non-residue
    /// for some configured modulus.
    pub fn rejects_with(&self, mut residue: impl FnMut(u64) -> u64) -> bool {
        self.moduli
            .iter()
            .zip(&self.residue_tables)
            .any(|(&m, table)| !table[residue(m) as usize])
    }

    /// Applies the sieve to an arbitrary integer.
    pub fn rejects_value(&self, s: &BigInt) -> bool {
        self.rejects_with(|m| {
            u64::try_from(s.mod_floor(&BigInt::from(m))).expect("residue below modulus")
        })
    }
}

impl Default for SieveConfig {
    fn default() -> Self {
        SieveConfig::new(&DEFAULT_MODULI).expect("default moduli are valid")
    }
}

/// True only if `a² + b²` of family `id` at `(p, q)` is provably not a square.
pub fn sieve_reject(id: ParamId, p: u64, q: u64, cfg: &SieveConfig) -> bool {
    let tab = table(id);
    cfg.rejects_with(|m| tab.dab_sq_mod(p, q, m))
}

/// A parameter at which all seven quantities are integers.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(into = "HitJson", try_from = "HitJson")]
pub struct HitRecord {
    pub param_id: ParamId,
    pub p: BigInt,
    pub q: BigInt,
    pub candidate: CuboidCandidate,
    pub dab_root: BigInt,
}

#[derive(Serialize, Deserialize)]
struct HitJson {
    param_id: ParamId,
    p: String,
    q: String,
    candidate: CandidateRecord,
    dab_root: String,
}

impl From<HitRecord> for HitJson {
    fn from(h: HitRecord) -> Self {
        HitJson {
            param_id: h.param_id,
            p: h.p.to_string(),
            q: h.q.to_string(),
            candidate: h.candidate.to_record(),
            dab_root: h.dab_root.to_string(),
        }
    }
}

impl TryFrom<HitJson> for HitRecord {
    type Error = Error;

    fn try_from(h: HitJson) -> Result<Self> {
        let parse = |s: &str| {
            s.parse::<BigInt>()
                .map_err(|_| Error::Checkpoint(format!("bad integer {s:?} in hit record")))
        };
        let hit = HitRecord {
            param_id: h.param_id,
            p: parse(&h.p)?,
            q: parse(&h.q)?,
            candidate: h.candidate.parse()?.candidate,
            dab_root: parse(&h.dab_root)?,
        };
        if verify(&hit.candidate).classification != Classification::PcHit {
            return Err(Error::Checkpoint(format!(
                "stored hit at t = {}/{} does not re-verify",
                hit.p, hit.q
            )));
        }
        Ok(hit)
    }
}

/// Exact test of one (family, pair). Returns a hit only for a verified
/// perfect cuboid.
pub fn exact_test(id: ParamId, p: u64, q: u64) -> Result<Option<HitRecord>> {
    let (p, q) = (BigInt::from(p), BigInt::from(q));
    let tab = table(id);
    let s = tab.raw_dab_sq(&p, &q);
    if !is_perfect_square(&s) {
        return Ok(None);
    }
    let candidate = tab.generate_pq(&p, &q)?;
    let report = verify(&candidate);
    if report.classification != Classification::PcHit {
        return Err(Error::Integrity(format!(
            "a² + b² is square for {id} at t = {p}/{q} but verification gave {:?}",
            report.classification
        )));
    }
    let dab_root = square_root(&candidate.dab_sq)
        .ok_or_else(|| Error::Integrity("primitive a² + b² lost squareness".into()))?;
    Ok(Some(HitRecord {
        param_id: id,
        p,
        q,
        candidate,
        dab_root,
    }))
}

mod decimal {
    use serde::{de::Error, Deserialize, Deserializer, Serializer};

    pub fn serialize<S: Serializer>(v: &u64, s: S) -> Result<S::Ok, S::Error> {
        s.serialize_str(&v.to_string())
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<u64, D::Error> {
        let s = String::deserialize(d)?;
        s.parse().map_err(|_| D::Error::custom(format!("not a decimal integer: {s:?}")))
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
struct WindowJson {
    #[serde(with = "decimal")]
    min_height: u64,
    #[serde(with = "decimal")]
    max_height: u64,
    param_ids: Vec<ParamId>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(into = "CheckpointJson", try_from = "CheckpointJson")]
pub struct Checkpoint {
    pub version: u64,
    pub window: SearchWindow,
    /// First height not yet fully processed.
    pub next_height: u64,
    /// Always 0: checkpoints are only taken at height boundaries.
    pub pairs_done_in_height: u64,
    /// (pair, family) combinations examined.
    pub tested: u64,
    pub sieve_rejected: u64,
    pub exact_tested: u64,
    pub hits: Vec<HitRecord>,
    pub wall_time_s: f64,
}

#[derive(Serialize, Deserialize)]
struct CheckpointJson {
    version: u64,
    window: WindowJson,
    #[serde(with = "decimal")]
    next_height: u64,
    #[serde(with = "decimal")]
    pairs_done_in_height: u64,
    #[serde(with = "decimal")]
    tested: u64,
    #[serde(with = "decimal")]
    sieve_rejected: u64,
    #[serde(with = "decimal")]
    exact_tested: u64,
    hits: Vec<HitRecord>,
    wall_time_s: f64,
}

impl From<Checkpoint> for CheckpointJson {
    fn from(c: Checkpoint) -> Self {
        CheckpointJson {
            version: c.version,
            window: WindowJson {
                min_height: c.window.min_height,
                max_height: c.window.max_height,
                param_ids: c.window.param_ids,
            },
            next_height: c.next_height,
            pairs_done_in_height: c.pairs_done_in_height,
            tested: c.tested,
            sieve_rejected: c.sieve_rejected,
            exact_tested: c.exact_tested,
            hits: c.hits,
            wall_time_s: c.wall_time_s,
        }
    }
}

impl TryFrom<CheckpointJson> for Checkpoint {
    type Error = Error;

    fn try_from(c: CheckpointJson) -> Result<Self> {
        if c.version != CHECKPOINT_VERSION {
            return Err(Error::Checkpoint(format!(
                "unsupported checkpoint version {}",
                c.version
            )));
        }
        let window = SearchWindow::new(c.window.min_height, c.window.max_height, c.window.param_ids)
            .map_err(|e| Error::Checkpoint(e.to_string()))?;
        if c.next_height < window.min_height || c.next_height > window.max_height + 1 {
            return Err(Error::Checkpoint(format!(
                "next_height {} outside window",
                c.next_height
            )));
        }
        if c.sieve_rejected + c.exact_tested != c.tested {
            return Err(Error::Checkpoint(
                "counters inconsistent: sieve_rejected + exact_tested ≠ tested".into(),
            ));
        }
        Ok(Checkpoint {
            version: c.version,
            window,
            next_height: c.next_height,
            pairs_done_in_height: c.pairs_done_in_height,
            tested: c.tested,
            sieve_rejected: c.sieve_rejected,
            exact_tested: c.exact_tested,
            hits: c.hits,
            wall_time_s: c.wall_time_s,
        })
    }
}

impl Checkpoint {
    pub fn fresh(window: SearchWindow) -> Self {
        Checkpoint {
            version: CHECKPOINT_VERSION,
            next_height: window.min_height,
            window,
            pairs_done_in_height: 0,
            tested: 0,
            sieve_rejected: 0,
            exact_tested: 0,
            hits: Vec::new(),
            wall_time_s: 0.0,
        }
    }

    pub fn is_complete(&self) -> bool {
        self.next_height > self.window.max_height
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = fs::read_to_string(path)?;
        serde_json::from_str(&text)
            .map_err(|e| Error::Checkpoint(format!("{}: {e}", path.display())))
    }

    /// Writes through a sibling temporary file and renames it into place.
    pub fn save(&self, path: &Path) -> Result<()> {
        let mut tmp = path.as_os_str().to_owned();
        tmp.push(".tmp");
        let tmp = Path::new(&tmp);
        {
            let mut f = fs::File::create(tmp)?;
            serde_json::to_writer_pretty(&mut f, self)?;
            f.write_all(b"\n")?;
            f.sync_all()?;
        }
        fs::rename(tmp, path)?;
        Ok(())
    }

    /// Counters and hits as text, without timings. Identical for identical
    /// work regardless of worker count or interruptions.
    pub fn summary(&self) -> String {
        let mut out = format!(
            "window: {}..={} params: {}\nnext_height: {}\ntested: {}\nsieve_rejected: {}\nexact_tested: {}\nhits: {}\n",
            self.window.min_height,
            self.window.max_height,
            self.window
                .param_ids
                .iter()
                .map(|id| id.as_str())
                .collect::<Vec<_>>()
                .join(","),
            self.next_height,
            self.tested,
            self.sieve_rejected,
            self.exact_tested,
            self.hits.len(),
        );
        for h in &self.hits {
            out.push_str(&format!(
                "hit {} t={}/{} {}\n",
                h.param_id,
                h.p,
                h.q,
                serde_json::to_string(&h.candidate.to_record()).expect("record serializes")
            ));
        }
        out
    }
}

#[derive(Debug, Clone, Default)]
pub struct SearchOptions {
    pub stop_on_hit: bool,
    /// Exactly test sieve-rejected pairs too, failing if any was a square.
    pub audit: bool,
    /// Stop once this height has been completed and checkpointed, as if the
    /// process had been interrupted there.
    pub stop_after_height: Option<u64>,
}

struct Outcome {
    rejected: bool,
    hit: Option<HitRecord>,
}

fn process(id: ParamId, p: u64, q: u64, cfg: &SieveConfig, audit: bool) -> Result<Outcome> {
    let rejected = sieve_reject(id, p, q, cfg);
    if rejected {
        if audit && is_perfect_square(&table(id).raw_dab_sq(&p.into(), &q.into())) {
            return Err(Error::Integrity(format!(
                "sieve rejected a square for {id} at t = {p}/{q}"
            )));
        }
        return Ok(Outcome { rejected, hit: None });
    }
    Ok(Outcome {
        rejected,
        hit: exact_test(id, p, q)?,
    })
}

/// Resumes from `checkpoint_path` when it exists, otherwise starts fresh.
///
/// A stored checkpoint must have the same minimum height and parameter set;
/// its maximum height may be lower than the requested one, which extends the
/// search.
pub fn run_search(
    window: &SearchWindow,
    cfg: &SieveConfig,
    workers: usize,
    checkpoint_path: Option<&Path>,
    checkpoint_every: u64,
    opts: &SearchOptions,
) -> Result<Checkpoint> {
    if workers == 0 {
        return Err(Error::Domain("workers must be at least 1".into()));
    }
    if checkpoint_every == 0 {
        return Err(Error::Domain("checkpoint_every must be at least 1".into()));
    }
    let mut ck = match checkpoint_path {
        Some(path) if path.exists() => {
            let ck = Checkpoint::load(path)?;
            if ck.window.min_height != window.min_height
                || ck.window.param_ids != window.param_ids
                || ck.window.max_height > window.max_height
            {
                return Err(Error::Checkpoint(format!(
                    "{} belongs to a different search window",
                    path.display()
                )));
            }
            Checkpoint {
                window: window.clone(),
                ..ck
            }
        }
        _ => Checkpoint::fresh(window.clone()),
    };

    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(workers)
        .build()
        .map_err(|e| Error::Domain(format!("thread pool: {e}")))?;

    let mut clock = Instant::now();
    while !ck.is_complete() {
        let start = ck.next_height;
        let end = start
            .saturating_add(checkpoint_every - 1)
            .min(window.max_height);
        let tasks: Vec<(ParamId, u64, u64)> = (start..=end)
            .flat_map(pairs_at_height)
            .flat_map(|(p, q)| window.param_ids.iter().map(move |&id| (id, p, q)))
            .collect();
        let outcomes: Vec<Outcome> = pool.install(|| {
            tasks
                .par_iter()
                .map(|&(id, p, q)| process(id, p, q, cfg, opts.audit))
                .collect::<Result<_>>()
        })?;

        for o in outcomes {
            ck.tested += 1;
            if o.rejected {
                ck.sieve_rejected += 1;
            } else {
                ck.exact_tested += 1;
            }
            ck.hits.extend(o.hit);
        }
        ck.next_height = end + 1;
        let now = Instant::now();
        ck.wall_time_s += (now - clock).as_secs_f64();
        clock = now;
        if let Some(path) = checkpoint_path {
            ck.save(path)?;
        }
        let interrupted = opts.stop_after_height.is_some_and(|h| end >= h);
        if interrupted || (opts.stop_on_hit && !ck.hits.is_empty()) {
            break;
        }
    }
    Ok(ck)
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::collections::BTreeSet;

    fn window(min: u64, max: u64) -> SearchWindow {
        SearchWindow::new(min, max, ParamId::ALL.to_vec()).unwrap()
    }

    #[test]
    fn window_validation() {
        assert!(SearchWindow::new(2, 10, vec![ParamId::I]).is_err());
        assert!(SearchWindow::new(5, 4, vec![ParamId::I]).is_err());
        assert!(SearchWindow::new(3, 4, vec![]).is_err());
        let w = SearchWindow::new(3, 3, vec![ParamId::III, ParamId::I, ParamId::I]).unwrap();
        assert_eq!(w.param_ids, vec![ParamId::I, ParamId::III]);
    }

    #[test]
    fn enumeration_small_window() {
        let pairs: Vec<_> = enumerate_params(&window(3, 5)).collect();
        assert_eq!(pairs, vec![(2, 1), (4, 1)]);
        let all: BTreeSet<_> = enumerate_params(&window(3, 60)).collect();
        assert!(!all.contains(&(3, 1)));
        assert!(!all.contains(&(6, 2)));
    }

    #[test]
    fn enumeration_matches_brute_force() {
        for h in [3u64, 10, 37, 60] {
            let mut expected = Vec::new();
            for p in 1..=h {
                for q in 1..=h {
                    let t = crate::params::RationalParam::new(p, q);
                    let reduced = p.gcd(&q) == 1;
                    // t > √3 ⇔ p² > 3q²
                    if reduced && p + q <= h && p * p > 3 * q * q && t.is_ok() {
                        expected.push((p + q, p, q));
                    }
                }
            }
            expected.sort();
            let got: Vec<_> = enumerate_params(&window(3, h))
                .map(|(p, q)| (p + q, p, q))
                .collect();
            assert_eq!(got, expected, "H = {h}");
        }
    }

    #[test]
    fn residue_tables_by_brute_force() {
        let cfg = SieveConfig::default();
        for (i, &m) in cfg.moduli().iter().enumerate() {
            let squares: BTreeSet<u64> = (0..m).map(|y| y * y % m).collect();
            for x in 0..m {
                assert_eq!(cfg.residue_table(i)[x as usize], squares.contains(&x));
            }
        }
        let counts: Vec<usize> = (0..4)
            .map(|i| cfg.residue_table(i).iter().filter(|b| **b).count())
            .collect();
        assert_eq!(counts, vec![12, 16, 21, 6]);
    }

    #[test]
    fn invalid_moduli_rejected() {
        assert!(SieveConfig::new(&[1]).is_err());
        assert!(SieveConfig::new(&[0, 64]).is_err());
        assert!(SieveConfig::new(&[MAX_MODULUS + 1]).is_err());
    }

    #[test]
    fn two_mod_four_is_rejected() {
        let cfg = SieveConfig::new(&[4]).unwrap();
        for v in [2i64, 6, 10, 1_000_002] {
            assert!(cfg.rejects_value(&v.into()));
        }
        assert!(SieveConfig::default().rejects_value(&BigInt::from(2)));
    }

    #[test]
    fn sieve_never_rejects_squares() {
        let cfg = SieveConfig::new(&[64, 63, 65, 11, 4, 9, 97, 1009]).unwrap();
        for k in 0..20_000i64 {
            assert!(!cfg.rejects_value(&BigInt::from(k * k)), "k = {k}");
        }
    }

    #[test]
    fn sieve_on_t_equals_2() {
        // 445729 = 64·6964 + 33; squares mod 64 from y = 0..63
        assert_eq!(445_729 % 64, 33);
        let squares_64: BTreeSet<u64> = (0..64u64).map(|y| y * y % 64).collect();
        let expected_64 = !squares_64.contains(&33);
        // 17² = 289 = 4·64 + 33
        assert!(!expected_64);
        let only_64 = SieveConfig::new(&[64]).unwrap();
        assert_eq!(sieve_reject(ParamId::I, 2, 1, &only_64), expected_64);
        assert_eq!(
            sieve_reject(ParamId::I, 2, 1, &SieveConfig::default()),
            SieveConfig::default().rejects_value(&BigInt::from(445_729))
        );
    }

    #[test]
    fn exact_test_at_t_equals_2() {
        assert_eq!(7616i64 * 7616 + 16095 * 16095, 317_052_481);
        assert!(!is_perfect_square(&BigInt::from(317_052_481)));
        for id in ParamId::ALL {
            assert!(exact_test(id, 2, 1).unwrap().is_none());
        }
    }

    #[test]
    fn checkpoint_json_uses_decimal_strings() {
        let ck = Checkpoint::fresh(window(3, 10));
        let json = serde_json::to_value(&ck).unwrap();
        assert_eq!(json["version"], 1);
        assert_eq!(json["next_height"], "3");
        assert_eq!(json["window"]["max_height"], "10");
        assert_eq!(json["window"]["param_ids"][1], "II");
        let back: Checkpoint = serde_json::from_value(json).unwrap();
        assert_eq!(back, ck);
    }

    #[test]
    fn corrupted_checkpoint_rejected() {
        let mut json = serde_json::to_value(Checkpoint::fresh(window(3, 10))).unwrap();
        json["tested"] = "5".into();
        assert!(serde_json::from_value::<Checkpoint>(json.clone()).is_err());
        json["tested"] = "0".into();
        json["version"] = 2.into();
        assert!(serde_json::from_value::<Checkpoint>(json).is_err());
    }

    #[test]
    fn run_counts_are_consistent() {
        let w = window(3, 30);
        let ck = run_search(&w, &SieveConfig::default(), 2, None, 1, &SearchOptions {
            audit: true,
            ..Default::default()
        })
        .unwrap();
        let pairs = enumerate_params(&w).count() as u64;
        assert_eq!(ck.tested, 3 * pairs);
        assert_eq!(ck.tested, ck.sieve_rejected + ck.exact_tested);
        assert_eq!(ck.next_height, 31);
        assert!(ck.hits.is_empty());
    }

    #[test]
    fn zero_workers_rejected() {
        let w = window(3, 5);
        assert!(run_search(&w, &SieveConfig::default(), 0, None, 1, &Default::default()).is_err());
    }
}
