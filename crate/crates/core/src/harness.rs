//! Command drivers, the verification suite and report emission.

use std::collections::HashMap;
use std::path::{Path, PathBuf};
use std::sync::{Arc, Mutex};
use std::time::{SystemTime, UNIX_EPOCH};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::amice::{build_mu_eta_gauss, build_mu_eta_signed, default_truncation, psi_op, MahlerCache, Measure, MeasureJson};
use crate::arith::{is_prime, lcm};
use crate::classical::{
    bernoulli, ensure_bernoulli_cache, gen_bernoulli, load_bernoulli_cache, l0_gauss_sum_formula, l_value_neg, l_value_neg_routes, CacheStatus,
};
use crate::dirichlet::{character_context_modulus, primitive_chars, DirichletChar};
use crate::error::{Error, Result};
use crate::gamma::GammaTable;
use crate::kubota_leopoldt::{
    calibrate_fg, fg_gamma_oracle, interpolation_table, lp_derivative, lp_series_route, FgCalibration, LInvariantReport,
    LpEngine, LpValue, Route,
};
use crate::modular::{
    brute_force_zeros, classify_trivial_zeros, fm_linvariant, j_invariant, tate_parameter, twist_reduce, EtaLocal,
    NewformLocalData, NewformLocalDataJson,
};
use crate::padic::{make_context, Jet, PadicContext, PadicElem};

pub const REPORT_VERSION: u32 = 1;
const MEASURE_CACHE_VERSION: u32 = 1;
const GRID_GUARD: u64 = 100;

/// Newform fixtures shipped with the crate.
pub const NEWFORM_FIXTURES: &str = include_str!("../data/newform_fixtures.json");

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Routes {
    Measure,
    Series,
    Both,
}

impl Routes {
    pub fn measure(self) -> bool {
        self != Routes::Series
    }

    pub fn series(self) -> bool {
        self != Routes::Measure
    }
}

impl std::str::FromStr for Routes {
    type Err = Error;

    fn from_str(s: &str) -> Result<Routes> {
        match s {
            "measure" => Ok(Routes::Measure),
            "series" => Ok(Routes::Series),
            "both" => Ok(Routes::Both),
            _ => Err(Error::Config(format!("--routes must be measure, series or both, not {s:?}"))),
        }
    }
}

/// One evaluated L-value.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct ReportRow {
    pub p: u64,
    #[serde(rename = "N")]
    pub n: u64,
    pub char_id: String,
    pub m: i64,
    pub s: String,
    pub value_digits: String,
    pub deriv_digits: String,
    pub route: String,
    pub certified_prec: i64,
    pub checks_passed: bool,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub l_invariant: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub note: Option<String>,
}

/// One tested identity.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct CheckRow {
    pub suite: String,
    pub name: String,
    pub location: String,
    pub certified_prec: Option<i64>,
    pub passed: bool,
    pub detail: String,
}

impl CheckRow {
    fn new(suite: &str, name: &str, location: String, cert: Option<i64>, passed: bool, detail: String) -> CheckRow {
        CheckRow { suite: suite.into(), name: name.into(), location, certified_prec: cert, passed, detail }
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Summary {
    pub checks: usize,
    pub checks_failed: usize,
    pub rows: usize,
    pub rows_failed: usize,
    pub passed: bool,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct VerificationReport {
    pub version: u32,
    pub suite: String,
    pub config: serde_json::Value,
    pub rows: Vec<ReportRow>,
    pub checks: Vec<CheckRow>,
    pub summary: Summary,
    /// Wall-clock stamp; excluded from the determinism contract.
    pub timestamp: u64,
}

impl VerificationReport {
    pub fn new(suite: &str, config: serde_json::Value, rows: Vec<ReportRow>, checks: Vec<CheckRow>) -> VerificationReport {
        let checks_failed = checks.iter().filter(|c| !c.passed).count();
        let rows_failed = rows.iter().filter(|r| !r.checks_passed).count();
        let summary = Summary {
            checks: checks.len(),
            checks_failed,
            rows: rows.len(),
            rows_failed,
            passed: checks_failed == 0 && rows_failed == 0,
        };
        let timestamp = SystemTime::now().duration_since(UNIX_EPOCH).map(|d| d.as_secs()).unwrap_or(0);
        VerificationReport { version: REPORT_VERSION, suite: suite.into(), config, rows, checks, summary, timestamp }
    }

    pub fn passed(&self) -> bool {
        self.summary.passed
    }

    /// Canonical JSON: sorted keys, two-space indentation, trailing newline.
    pub fn to_json(&self) -> String {
        let v = serde_json::to_value(self).expect("report serializes");
        let mut s = serde_json::to_string_pretty(&v).expect("value serializes");
        s.push('\n');
        s
    }

    /// Canonical JSON with the timestamp zeroed, for determinism checks.
    pub fn to_json_without_timestamp(&self) -> String {
        VerificationReport { timestamp: 0, ..self.clone() }.to_json()
    }

    /// Rows as CSV, or the checks when there are no rows.
    pub fn to_csv(&self) -> Result<String> {
        let mut w = csv::Writer::from_writer(Vec::new());
        let csv_err = |e: csv::Error| Error::Config(format!("csv: {e}"));
        if self.rows.is_empty() {
            for c in &self.checks {
                w.serialize(c).map_err(csv_err)?;
            }
            if self.checks.is_empty() {
                w.write_record(["suite", "name", "location", "certified_prec", "passed", "detail"]).map_err(csv_err)?;
            }
        } else {
            w.write_record([
                "p", "N", "char_id", "m", "s", "value_digits", "deriv_digits", "route", "certified_prec",
                "checks_passed", "l_invariant", "note",
            ])
            .map_err(csv_err)?;
            for r in &self.rows {
                w.write_record([
                    r.p.to_string(),
                    r.n.to_string(),
                    r.char_id.clone(),
                    r.m.to_string(),
                    r.s.clone(),
                    r.value_digits.clone(),
                    r.deriv_digits.clone(),
                    r.route.clone(),
                    r.certified_prec.to_string(),
                    r.checks_passed.to_string(),
                    r.l_invariant.clone().unwrap_or_default(),
                    r.note.clone().unwrap_or_default(),
                ])
                .map_err(csv_err)?;
            }
        }
        let bytes = w.into_inner().map_err(|e| Error::Config(format!("csv: {e}")))?;
        Ok(String::from_utf8(bytes).expect("csv output is utf-8"))
    }

    /// Writes JSON, or CSV when the extension is `.csv`, atomically.
    pub fn write(&self, path: &Path) -> Result<()> {
        let body = match path.extension().and_then(|e| e.to_str()) {
            Some("csv") => self.to_csv()?,
            _ => self.to_json(),
        };
        atomic_write(path, body.as_bytes())
    }
}

fn atomic_write(path: &Path, bytes: &[u8]) -> Result<()> {
    if let Some(dir) = path.parent() {
        if !dir.as_os_str().is_empty() {
            std::fs::create_dir_all(dir)?;
        }
    }
    let mut tmp = path.as_os_str().to_owned();
    tmp.push(".tmp");
    std::fs::write(&tmp, bytes)?;
    std::fs::rename(&tmp, path)?;
    Ok(())
}

fn sha256_hex(bytes: &[u8]) -> String {
    Sha256::digest(bytes).iter().map(|b| format!("{b:02x}")).collect()
}

/// Exit status for an error escaping a command: 2 for bad configuration,
/// 1 otherwise.
pub fn exit_code_for(err: &Error) -> i32 {
    match err {
        Error::Config(_)
        | Error::BadPrime(_)
        | Error::PDividesN { .. }
        | Error::BadModulus
        | Error::PrecisionTooSmall(_)
        | Error::PrecisionTooLarge { .. }
        | Error::InvalidData(_)
        | Error::NotPrimitive { .. }
        | Error::TrivialCharacter
        | Error::Json(_)
        | Error::Io(_) => 2,
        _ => 1,
    }
}

#[derive(Serialize, Deserialize)]
struct MeasureFile {
    version: u32,
    key: String,
    checksum: String,
    measure: MeasureJson,
}

/// Shared state for one run: thread pool, caches and fault injection.
pub struct Env {
    pool: rayon::ThreadPool,
    cache_dir: Option<PathBuf>,
    flip_sign: bool,
    mahler: Arc<MahlerCache>,
    measures: Mutex<HashMap<String, Arc<Measure>>>,
}

impl Env {
    /// `jobs = 0` uses all cores.
    pub fn new(jobs: usize, cache_dir: Option<PathBuf>) -> Result<Env> {
        let pool = rayon::ThreadPoolBuilder::new()
            .num_threads(jobs)
            .build()
            .map_err(|e| Error::Config(format!("thread pool: {e}")))?;
        Ok(Env { pool, cache_dir, flip_sign: false, mahler: Arc::new(MahlerCache::new()), measures: Mutex::default() })
    }

    /// Negates every measure this environment builds (mutation testing).
    pub fn with_sign_flip(mut self) -> Env {
        self.flip_sign = true;
        self
    }

    pub fn cache_dir(&self) -> Option<&Path> {
        self.cache_dir.as_deref()
    }

    fn install<T: Send>(&self, f: impl FnOnce() -> T + Send) -> T {
        self.pool.install(f)
    }

    fn measure_key(eta: &DirichletChar, ctx: &PadicContext, k: usize, flip: bool) -> String {
        format!("{}|p{}|n{}|M{}|K{}|flip{}", eta.label(), ctx.p(), ctx.n(), ctx.precision(), k, flip)
    }

    /// `μ_η` at truncation `k`; `keep` retains it in memory for reuse.
    pub fn measure(&self, eta: &DirichletChar, ctx: &PadicContext, k: usize, keep: bool) -> Result<Arc<Measure>> {
        let key = Env::measure_key(eta, ctx, k, self.flip_sign);
        if let Some(m) = self.measures.lock().unwrap().get(&key) {
            return Ok(m.clone());
        }
        let m = Arc::new(match self.load_measure(&key, ctx) {
            Some(m) => m,
            None => {
                let m = build_mu_eta_signed(eta, ctx, k, self.flip_sign)?;
                self.store_measure(&key, &m)?;
                m
            }
        });
        if keep {
            self.measures.lock().unwrap().insert(key, m.clone());
        }
        Ok(m)
    }

    fn measure_path(&self, key: &str) -> Option<PathBuf> {
        let dir = self.cache_dir.as_ref()?;
        Some(dir.join("measures").join(format!("{}.json", &sha256_hex(key.as_bytes())[..24])))
    }

    // a damaged or mismatched file is treated as absent and rewritten
    fn load_measure(&self, key: &str, ctx: &PadicContext) -> Option<Measure> {
        let path = self.measure_path(key)?;
        let bytes = std::fs::read(path).ok()?;
        let file: MeasureFile = serde_json::from_slice(&bytes).ok()?;
        if file.version != MEASURE_CACHE_VERSION || file.key != key {
            return None;
        }
        let body = serde_json::to_vec(&file.measure).ok()?;
        if sha256_hex(&body) != file.checksum {
            return None;
        }
        Measure::from_json(ctx, &file.measure).ok()
    }

    fn store_measure(&self, key: &str, m: &Measure) -> Result<()> {
        let Some(path) = self.measure_path(key) else { return Ok(()) };
        let measure = m.to_json();
        let checksum = sha256_hex(&serde_json::to_vec(&measure)?);
        let file = MeasureFile { version: MEASURE_CACHE_VERSION, key: key.into(), checksum, measure };
        atomic_write(&path, &serde_json::to_vec(&file)?)
    }

    pub fn engine(&self, eta: &DirichletChar, ctx: &PadicContext, k: usize, keep: bool) -> Result<LpEngine> {
        let m = self.measure(eta, ctx, k, keep)?;
        Ok(LpEngine::with_measure(eta, (*m).clone(), self.mahler.clone()))
    }

    /// Loads or rebuilds the Bernoulli cache, when a cache directory is set.
    pub fn bernoulli_cache(&self, n: usize) -> Result<Option<CacheStatus>> {
        match &self.cache_dir {
            None => Ok(None),
            Some(dir) => ensure_bernoulli_cache(&dir.join("bernoulli.json"), n).map(Some),
        }
    }
}

/// Context holding `ζ_N`, the character values and `μ_{p-1}`.
pub fn context_for(n: u64, p: u64, m: u32) -> Result<PadicContext> {
    make_context(p, character_context_modulus(n, p), m)
}

/// Smallest context for `L_p(ηω^m, s)`: the values of `η` and `μ_{p-1}`.
/// The residue degree is often far below that of [`context_for`].
pub fn lp_context(eta: &DirichletChar, p: u64, m: u32) -> Result<PadicContext> {
    if !eta.realizable_at(p) {
        return Err(Error::Config(format!("{} takes values of order divisible by {p}", eta.label())));
    }
    make_context(p, lcm(p - 1, eta.order()), m)
}

/// Parses `a` or `a/b`.
pub fn parse_rational(s: &str) -> Result<(i64, i64)> {
    let bad = || Error::Config(format!("cannot parse {s:?} as an integer or a/b"));
    let (a, b) = match s.split_once('/') {
        Some((a, b)) => (a.trim().parse().map_err(|_| bad())?, b.trim().parse().map_err(|_| bad())?),
        None => (s.trim().parse().map_err(|_| bad())?, 1),
    };
    if b == 0 {
        return Err(bad());
    }
    Ok((a, b))
}

fn check_prime(p: u64) -> Result<()> {
    if p < 3 || !is_prime(p) {
        return Err(Error::Config(format!("--p {p}: need an odd prime")));
    }
    Ok(())
}

fn check_prec(m: u32) -> Result<()> {
    if m < 2 {
        return Err(Error::Config(format!("--prec {m}: need at least 2")));
    }
    Ok(())
}

fn odd_primes_upto(n: u64) -> Vec<u64> {
    (3..=n).filter(|&q| is_prime(q)).collect()
}

fn realizable_primitive(n: u64, p: u64) -> Vec<DirichletChar> {
    if n.is_multiple_of(p) {
        return vec![];
    }
    primitive_chars(n).into_iter().filter(|e| !e.is_trivial() && e.realizable_at(p)).collect()
}

fn fmt_row(
    eta: &DirichletChar,
    p: u64,
    m: i64,
    s: &str,
    v: &LpValue,
    passed: bool,
) -> ReportRow {
    ReportRow {
        p,
        n: eta.modulus(),
        char_id: eta.label(),
        m,
        s: s.into(),
        value_digits: v.value.value.to_string(),
        deriv_digits: v.value.deriv.to_string(),
        route: v.route.to_string(),
        certified_prec: v.certified_prec,
        checks_passed: passed,
        l_invariant: None,
        note: None,
    }
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct LpConfig {
    pub p: u64,
    pub char_label: String,
    pub m: i64,
    pub s: Vec<String>,
    pub prec: u32,
    pub trunc: Option<usize>,
    pub routes: Routes,
}

/// Evaluates `L_p(ηω^m, s)` with its derivative at each requested `s`.
pub fn cmd_lp(cfg: &LpConfig, env: &Env) -> Result<VerificationReport> {
    check_prime(cfg.p)?;
    check_prec(cfg.prec)?;
    let eta = DirichletChar::parse(&cfg.char_label).map_err(|e| Error::Config(format!("--char: {e}")))?;
    if eta.is_trivial() {
        return Err(Error::Config("--char: the trivial character has no μ_η".into()));
    }
    if eta.modulus() % cfg.p == 0 {
        return Err(Error::PDividesN { p: cfg.p, n: eta.modulus() });
    }
    if !eta.realizable_at(cfg.p) {
        return Err(Error::Config(format!("{} takes values of order divisible by {}", eta.label(), cfg.p)));
    }
    let ctx = context_for(eta.modulus(), cfg.p, cfg.prec)?;
    let k = cfg.trunc.unwrap_or_else(|| default_truncation(cfg.p, cfg.prec));
    let engine = if cfg.routes.measure() { Some(env.engine(&eta, &ctx, k, false)?) } else { None };
    let mut rows = Vec::new();
    let mut checks = Vec::new();
    let ctxmsg = |e: Error, s: &str| Error::Domain(format!("{} at p = {}, s = {s}: {e}", eta.label(), cfg.p));
    for s_str in &cfg.s {
        let (a, b) = parse_rational(s_str)?;
        let s = Jet::variable(PadicElem::from_ratio(&ctx, a, b));
        let mv = match &engine {
            Some(e) => Some(e.measure_route(cfg.m, &s).map_err(|e| ctxmsg(e, s_str))?),
            None => None,
        };
        let sv = if cfg.routes.series() {
            Some(lp_series_route(&eta, cfg.m, &s, &ctx).map_err(|e| ctxmsg(e, s_str))?)
        } else {
            None
        };
        let agree = match (&mv, &sv) {
            (Some(x), Some(y)) => {
                let need = x.certified_prec.min(y.certified_prec) - 2;
                let got = x.agreement(y);
                checks.push(CheckRow::new(
                    "lp",
                    "route agreement",
                    format!("{} p={} m={} s={s_str}", eta.label(), cfg.p, cfg.m),
                    Some(got),
                    got >= need,
                    format!("{got} digits, need {need}"),
                ));
                got >= need
            }
            _ => true,
        };
        for v in mv.iter().chain(sv.iter()) {
            rows.push(fmt_row(&eta, cfg.p, cfg.m, s_str, v, agree));
        }
    }
    Ok(VerificationReport::new("lp", serde_json::to_value(cfg)?, rows, checks))
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct ScanConfig {
    pub n_max: u64,
    pub p_max: u64,
    pub prec: u32,
    pub trunc: Option<usize>,
    pub routes: Routes,
    pub fg: bool,
}

/// A trivial-zero pair: `η` odd, primitive, `η(p) = 1`.
pub fn trivial_zero_pairs(n_max: u64, p_max: u64) -> Vec<(DirichletChar, u64)> {
    let mut out = Vec::new();
    for n in 3..=n_max {
        for p in odd_primes_upto(p_max) {
            for eta in realizable_primitive(n, p) {
                if eta.is_odd() && eta.exponent_at(p as i64) == Some(0) {
                    out.push((eta, p));
                }
            }
        }
    }
    out
}

/// Runs [`lp_derivative`] with the requested extras for one pair.
pub fn l_invariant_for(
    env: &Env,
    eta: &DirichletChar,
    p: u64,
    m: u32,
    k: Option<usize>,
    with_series: bool,
    cal: Option<&FgCalibration>,
) -> Result<LInvariantReport> {
    let ctx = lp_context(eta, p, m)?;
    let k = k.unwrap_or_else(|| default_truncation(p, m));
    let engine = env.engine(eta, &ctx, k, false)?;
    let mut r = lp_derivative(&engine, with_series)?;
    if let Some(cal) = cal {
        let gamma = GammaTable::new(&ctx);
        r.fg_prediction = Some(fg_gamma_oracle(eta, &ctx, &gamma, cal)?);
    }
    Ok(r)
}

/// Calibrates the `Γ_p` formula on the quadratic character mod 3 at `p = 7`.
pub fn fg_calibration(env: &Env, m: u32) -> Result<FgCalibration> {
    let eta = DirichletChar::parse("quad3")?;
    let r = l_invariant_for(env, &eta, 7, m, None, false, None)?;
    let ctx = lp_context(&eta, 7, m)?;
    calibrate_fg(&eta, &ctx, &GammaTable::new(&ctx), &r.lp_deriv, m as i64 - 6)
}

/// Derivatives at every trivial zero in the given ranges.
pub fn cmd_scan(cfg: &ScanConfig, env: &Env) -> Result<VerificationReport> {
    check_prec(cfg.prec)?;
    if cfg.n_max > GRID_GUARD || cfg.p_max > GRID_GUARD {
        return Err(Error::Config(format!("scan ranges are capped at {GRID_GUARD}")));
    }
    let cal = if cfg.fg { fg_calibration(env, cfg.prec).ok() } else { None };
    let pairs = trivial_zero_pairs(cfg.n_max, cfg.p_max);
    let m = cfg.prec;
    let tol = m as i64 - 6;
    let rows: Vec<ReportRow> = env.install(|| {
        pairs
            .par_iter()
            .map(|(eta, p)| {
                let base = ReportRow {
                    p: *p,
                    n: eta.modulus(),
                    char_id: eta.label(),
                    m: 1,
                    s: "0".into(),
                    value_digits: String::new(),
                    deriv_digits: String::new(),
                    route: Route::Measure.to_string(),
                    certified_prec: 0,
                    checks_passed: false,
                    l_invariant: None,
                    note: None,
                };
                match l_invariant_for(env, eta, *p, m, cfg.trunc, cfg.routes.series(), cal.as_ref()) {
                    Err(e) => ReportRow { note: Some(e.to_string()), ..base },
                    Ok(r) => {
                        let mut notes = vec!["value zero".to_string()];
                        let mut ok = r.lp_value.is_zero();
                        if let Some(a) = r.route_agreement {
                            ok &= a >= tol;
                            notes.push(format!("routes agree to {a}"));
                        }
                        if let Some(pred) = &r.fg_prediction {
                            let a = pred.agreement(&r.lp_deriv);
                            ok &= a >= tol;
                            notes.push(format!("Γ_p formula agrees to {a}"));
                        }
                        ReportRow {
                            value_digits: r.lp_value.to_string(),
                            deriv_digits: r.lp_deriv.to_string(),
                            certified_prec: r.certified_prec,
                            checks_passed: ok,
                            l_invariant: Some(r.l_measured.to_string()),
                            note: Some(notes.join("; ")),
                            ..base
                        }
                    }
                }
            })
            .collect()
    });
    let mut checks = Vec::new();
    if cfg.fg {
        checks.push(CheckRow::new(
            "scan",
            "Γ_p calibration",
            "quad3 p=7".into(),
            None,
            cal.is_some(),
            match &cal {
                Some(c) => format!("A = {}/{}, B = {}/{}", c.a.0, c.a.1, c.b.0, c.b.1),
                None => "no unique calibration".into(),
            },
        ));
    }
    Ok(VerificationReport::new("scan", serde_json::to_value(cfg)?, rows, checks))
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct ClassifyConfig {
    pub data: Option<PathBuf>,
    pub char_label: Option<String>,
    pub prec: u32,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct NewformFixture {
    #[serde(flatten)]
    pub data: NewformLocalDataJson,
    #[serde(default)]
    pub expected: Option<Vec<(u32, u32)>>,
}

pub fn load_fixtures(text: &str) -> Result<Vec<NewformFixture>> {
    let v: serde_json::Value = serde_json::from_str(text)?;
    Ok(match v {
        serde_json::Value::Array(_) => serde_json::from_value(v)?,
        _ => vec![serde_json::from_value(v)?],
    })
}

/// Context for local data at `p` that also holds values of small twisting
/// characters.
fn fixture_context(d: &NewformLocalDataJson, m: u32) -> Result<PadicContext> {
    let mut n = lcm(d.p - 1, 12);
    while n.is_multiple_of(d.p) {
        n /= d.p;
    }
    for v in [&d.a_p, &d.eps_p] {
        if let crate::modular::LocalValue::Zeta { zeta } = v {
            n = lcm(n, zeta.0);
        }
    }
    make_context(d.p, n, m)
}

fn classify_rows(fx: &NewformFixture, eta: Option<&DirichletChar>, m: u32) -> Result<Vec<CheckRow>> {
    let ctx = fixture_context(&fx.data, m)?;
    let d = NewformLocalData::from_json_in(&ctx, &fx.data)?;
    let label = d.label.clone().unwrap_or_else(|| format!("level {} weight {}", d.level, d.weight));
    let el = match eta {
        Some(e) => EtaLocal::from_char(e, &ctx)?,
        None => EtaLocal::trivial(&ctx),
    };
    let found = classify_trivial_zeros(&d, &el)?;
    let brute = brute_force_zeros(&d, &el)?;
    let keys: Vec<_> = found.iter().map(|f| f.key()).collect();
    let jm: Vec<(u32, u32)> = found.iter().map(|f| (f.j, f.m)).collect();
    let desc = if found.is_empty() {
        "no trivial zero".to_string()
    } else {
        found
            .iter()
            .map(|f| format!("{} j={} m={} α={} [{}]", f.case, f.j, f.m, f.alpha, f.condition))
            .collect::<Vec<_>>()
            .join("; ")
    };
    let loc = format!("{label} p={} η={}", d.p, eta.map(|e| e.label()).unwrap_or_else(|| "1".into()));
    let mut rows = vec![CheckRow::new("classify", "classifier = brute force", loc.clone(), None, keys == brute, desc)];
    if let (None, Some(exp)) = (eta, &fx.expected) {
        rows.push(CheckRow::new(
            "classify",
            "expected findings",
            loc,
            None,
            &jm == exp,
            format!("got {jm:?}, expected {exp:?}"),
        ));
    }
    Ok(rows)
}

/// Trivial-zero classification of local data, cross-checked by brute force.
pub fn cmd_classify(cfg: &ClassifyConfig) -> Result<VerificationReport> {
    check_prec(cfg.prec)?;
    let text = match &cfg.data {
        Some(path) => std::fs::read_to_string(path)?,
        None => NEWFORM_FIXTURES.to_string(),
    };
    let fixtures = load_fixtures(&text)?;
    let eta = match &cfg.char_label {
        Some(l) => Some(DirichletChar::parse(l).map_err(|e| Error::Config(format!("--char: {e}")))?),
        None => None,
    };
    let mut checks = Vec::new();
    for fx in &fixtures {
        checks.extend(classify_rows(fx, eta.as_ref(), cfg.prec)?);
    }
    Ok(VerificationReport::new("classify", serde_json::to_value(cfg)?, vec![], checks))
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct TateConfig {
    pub p: u64,
    pub j: Option<String>,
    pub prec: u32,
    pub samples: usize,
    pub seed: u64,
}

fn tate_check(p: u64, j0: &PadicElem, m: u32) -> CheckRow {
    let loc = format!("p={p} j={j0}");
    match tate_parameter(j0).and_then(|q| Ok((j_invariant(&q)?, fm_linvariant(&q)?, q))) {
        Err(e) => CheckRow::new("tate", "j(q(j)) = j", loc, None, false, e.to_string()),
        Ok((back, l, q)) => {
            let rel = back.agreement(j0) - j0.val();
            let need = m as i64 - 2;
            CheckRow::new(
                "tate",
                "j(q(j)) = j",
                loc,
                Some(q.prec()),
                rel >= need,
                format!("q = {q}, ℒ_FM = {l}, relative agreement {rel}, need {need}"),
            )
        }
    }
}

/// Random Tate-range `j` values `u p^{-v}`, `v ∈ 1..=4`.
pub fn random_tate_inputs(ctx: &PadicContext, count: usize, seed: u64) -> Vec<PadicElem> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed ^ ctx.p());
    let p = ctx.p() as i64;
    (0..count)
        .map(|_| {
            let v = rng.random_range(1..=4i64);
            let mut a = rng.random_range(1..1_000_000_000i64);
            if a % p == 0 {
                a += 1;
            }
            let b = rng.random_range(1..1000i64) * p + 1;
            PadicElem::from_ratio(ctx, a, b).shift(-v)
        })
        .collect()
}

/// Tate parameter and `ℒ_FM` for a given `j`, or round trips on random inputs.
pub fn cmd_tate(cfg: &TateConfig) -> Result<VerificationReport> {
    check_prime(cfg.p)?;
    check_prec(cfg.prec)?;
    let ctx = make_context(cfg.p, 1, cfg.prec)?;
    let mut checks = Vec::new();
    match &cfg.j {
        Some(js) => {
            let (a, b) = parse_rational(js)?;
            let j0 = PadicElem::from_ratio(&ctx, a, b);
            if j0.is_zero() || j0.val() >= 0 {
                return Err(Error::Config(format!("--j {js}: need v_p(j) < 0")));
            }
            checks.push(tate_check(cfg.p, &j0, cfg.prec));
        }
        None => {
            for j0 in random_tate_inputs(&ctx, cfg.samples, cfg.seed) {
                checks.push(tate_check(cfg.p, &j0, cfg.prec));
            }
            let l = fm_linvariant(&PadicElem::from_i64(&ctx, cfg.p as i64))?;
            checks.push(CheckRow::new("tate", "ℒ_FM(p) = 0", format!("p={}", cfg.p), None, l.is_zero(), l.to_string()));
        }
    }
    Ok(VerificationReport::new("tate", serde_json::to_value(cfg)?, vec![], checks))
}

/// Grid and precision settings of the acceptance suite.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct SuiteConfig {
    pub prec: u32,
    pub trunc: Option<usize>,
    /// Conductor bound and primes of the interpolation-style grid.
    pub grid_n: u64,
    pub grid_primes: Vec<u64>,
    /// Bounds of the trivial-zero scan.
    pub scan_n: u64,
    pub scan_p: u64,
    pub criteria: Vec<u8>,
    pub seed: u64,
}

impl Default for SuiteConfig {
    fn default() -> SuiteConfig {
        SuiteConfig {
            prec: 20,
            trunc: None,
            grid_n: 12,
            grid_primes: vec![5, 7, 11, 13],
            scan_n: 40,
            scan_p: 50,
            criteria: (1..=10).collect(),
            seed: 20240601,
        }
    }
}

impl SuiteConfig {
    fn validate(&self) -> Result<()> {
        check_prec(self.prec)?;
        for &p in &self.grid_primes {
            check_prime(p)?;
        }
        if self.grid_n > GRID_GUARD || self.scan_n > GRID_GUARD || self.scan_p > GRID_GUARD {
            return Err(Error::Config(format!("grid bounds are capped at {GRID_GUARD}")));
        }
        if let Some(c) = self.criteria.iter().find(|&&c| !(1..=10).contains(&c)) {
            return Err(Error::Config(format!("criterion {c} does not exist (1..=10)")));
        }
        Ok(())
    }

    fn k(&self, p: u64) -> usize {
        self.trunc.unwrap_or_else(|| default_truncation(p, self.prec))
    }

    /// `(η, p)` with `η` primitive, nontrivial, `N ≤ grid_n`.
    pub fn grid(&self) -> Vec<(DirichletChar, u64)> {
        let mut out = Vec::new();
        for &p in &self.grid_primes {
            for n in 3..=self.grid_n {
                for eta in realizable_primitive(n, p) {
                    out.push((eta, p));
                }
            }
        }
        out
    }
}

pub const CRITERIA: [&str; 10] = [
    "interpolation",
    "cross-route",
    "trivial zeros",
    "special values",
    "measure integrity",
    "ℒ-invariant stability",
    "Γ_p oracle",
    "modular classifier",
    "Tate ℒ_FM",
    "numerical hygiene",
];

/// Outcome of one acceptance criterion.
#[derive(Clone, Debug)]
pub struct CriterionOutcome {
    pub id: u8,
    pub title: &'static str,
    pub checks: Vec<CheckRow>,
}

impl CriterionOutcome {
    pub fn passed(&self) -> bool {
        !self.checks.is_empty() && self.checks.iter().all(|c| c.passed)
    }

    /// `criterion 3 (trivial zeros): PASS, 14/14 checks`.
    pub fn line(&self) -> String {
        let ok = self.checks.iter().filter(|c| c.passed).count();
        let mut s = format!(
            "criterion {} ({}): {}, {ok}/{} checks",
            self.id,
            self.title,
            if self.passed() { "PASS" } else { "FAIL" },
            self.checks.len()
        );
        if let Some(bad) = self.checks.iter().find(|c| !c.passed) {
            s.push_str(&format!("; first failure {} at {}: {}", bad.name, bad.location, bad.detail));
        }
        s
    }
}

fn err_row(suite: &str, name: &str, loc: String, e: Error) -> CheckRow {
    CheckRow::new(suite, name, loc, None, false, e.to_string())
}

fn loc(eta: &DirichletChar, p: u64) -> String {
    format!("{} p={p}", eta.label())
}

fn par_checks<T: Sync>(env: &Env, items: &[T], f: impl Fn(&T) -> Vec<CheckRow> + Sync) -> Vec<CheckRow> {
    env.install(|| items.par_iter().map(&f).collect::<Vec<_>>()).into_iter().flatten().collect()
}

fn crit_interpolation(cfg: &SuiteConfig, env: &Env) -> Vec<CheckRow> {
    let m = cfg.prec;
    let need = m as i64 - 2;
    let jmax = 12usize;
    par_checks(env, &cfg.grid(), |(eta, p)| {
        let run = || -> Result<CheckRow> {
            let ctx = context_for(eta.modulus(), *p, m)?;
            let engine = env.engine(eta, &ctx, cfg.k(*p), true)?;
            let table = interpolation_table(eta, jmax, &ctx)?;
            let (mut worst, mut at) = (i64::MAX, String::new());
            for (mi, row) in table.iter().enumerate() {
                for (ji, want) in row.iter().enumerate() {
                    let j = ji as i64 + 1;
                    let v = engine.measure_route(mi as i64, &Jet::from_i64(&ctx, 1 - j))?;
                    let got = v.value.value.agreement(want).min(v.certified_prec);
                    if got < worst {
                        worst = got;
                        at = format!("m={mi} j={j}");
                    }
                }
            }
            Ok(CheckRow::new(
                "interpolation",
                "L_p(ηω^m, 1−j) = Euler·(−B_j/j)",
                loc(eta, *p),
                Some(worst),
                worst >= need,
                format!("worst {worst} digits at {at}, need {need}"),
            ))
        };
        vec![run().unwrap_or_else(|e| err_row("interpolation", "evaluation", loc(eta, *p), e))]
    })
}

/// The fifteen cross-route points: `(m, s)` with twelve integer `s` and
/// three non-integer `s`.
pub fn cross_route_points(p: u64) -> Vec<(i64, (i64, i64))> {
    let pm = p as i64 - 1;
    let ints = (-6..=6).filter(|&s| s != 1).map(|s| (s, 1));
    let fracs = [(1, 2), (3, 4), (-7, 8)];
    ints.chain(fracs).enumerate().map(|(i, s)| (i as i64 % pm, s)).collect()
}

fn crit_cross_route(cfg: &SuiteConfig, env: &Env) -> Vec<CheckRow> {
    let m = cfg.prec;
    let need = m as i64 - 4;
    par_checks(env, &cfg.grid(), |(eta, p)| {
        let run = || -> Result<CheckRow> {
            let ctx = context_for(eta.modulus(), *p, m)?;
            let engine = env.engine(eta, &ctx, cfg.k(*p), true)?;
            let (mut worst, mut at) = (i64::MAX, String::new());
            let pts = cross_route_points(*p);
            for (mi, (a, b)) in &pts {
                let s = Jet::constant(PadicElem::from_ratio(&ctx, *a, *b));
                let x = engine.measure_route(*mi, &s)?;
                let y = lp_series_route(eta, *mi, &s, &ctx)?;
                let got = x.agreement(&y);
                if got < worst {
                    worst = got;
                    at = format!("m={mi} s={a}/{b}");
                }
            }
            Ok(CheckRow::new(
                "cross-route",
                "measure route = series route",
                loc(eta, *p),
                Some(worst),
                worst >= need,
                format!("{} points, worst {worst} digits at {at}, need {need}", pts.len()),
            ))
        };
        vec![run().unwrap_or_else(|e| err_row("cross-route", "evaluation", loc(eta, *p), e))]
    })
}

fn crit_trivial_zeros(cfg: &SuiteConfig, env: &Env) -> Vec<CheckRow> {
    let m = cfg.prec;
    let need = m as i64 - 2;
    let mut tasks = Vec::new();
    for n in 3..=cfg.scan_n {
        for p in odd_primes_upto(cfg.scan_p) {
            for eta in realizable_primitive(n, p) {
                if eta.is_odd() {
                    tasks.push((eta, p));
                }
            }
        }
    }
    let per_pair: Vec<(u64, std::result::Result<(bool, bool, i64), String>)> = env.install(|| {
        tasks
            .par_iter()
            .map(|(eta, p)| {
                let run = || -> Result<(bool, bool, i64)> {
                    let ctx = lp_context(eta, *p, m)?;
                    let engine = env.engine(eta, &ctx, cfg.k(*p), false)?;
                    let v = engine.measure_route(1, &Jet::constant(PadicElem::zero(&ctx)))?;
                    let trivial = eta.exponent_at(*p as i64) == Some(0);
                    let ok = if trivial { v.value.value.is_zero() && v.certified_prec >= need } else { !v.value.value.is_zero() };
                    Ok((trivial, ok, v.certified_prec))
                };
                (*p, run().map_err(|e| format!("{}: {e}", loc(eta, *p))))
            })
            .collect()
    });
    let mut out = Vec::new();
    for p in odd_primes_upto(cfg.scan_p) {
        let mine: Vec<_> = per_pair.iter().filter(|(q, _)| *q == p).map(|(_, r)| r).collect();
        if mine.is_empty() {
            continue;
        }
        let zeros = mine.iter().filter(|r| matches!(r, Ok((true, _, _)))).count();
        let bad: Vec<String> = mine
            .iter()
            .enumerate()
            .filter_map(|(i, r)| match r {
                Ok((_, true, _)) => None,
                Ok((t, false, c)) => Some(format!("#{i} trivial={t} cert={c}")),
                Err(e) => Some(e.clone()),
            })
            .collect();
        let cert = mine.iter().filter_map(|r| r.as_ref().ok().map(|x| x.2)).min();
        out.push(CheckRow::new(
            "trivial zeros",
            "L_p(ηω, 0) = 0 iff η(p) = 1",
            format!("p={p}, N ≤ {}", cfg.scan_n),
            cert,
            bad.is_empty(),
            format!("{} odd characters, {zeros} trivial zeros; failures: {}", mine.len(), bad.join(", ")),
        ));
    }
    out
}

fn crit_special_values(cfg: &SuiteConfig, env: &Env) -> Vec<CheckRow> {
    let m = cfg.prec;
    let need = m as i64 - 2;
    par_checks(env, &cfg.grid(), |(eta, p)| {
        let run = || -> Result<Vec<CheckRow>> {
            let ctx = context_for(eta.modulus(), *p, m)?;
            let mut worst = i64::MAX;
            for j in 0..=8 {
                let (a, b) = l_value_neg_routes(eta, j, &ctx)?;
                worst = worst.min(a.agreement(&b));
            }
            let mut rows = vec![CheckRow::new(
                "special values",
                "partial-fraction route = Bernoulli route, j ≤ 8",
                loc(eta, *p),
                Some(worst),
                worst >= need,
                format!("worst {worst} digits, need {need}"),
            )];
            if eta.is_odd() {
                let g = l0_gauss_sum_formula(eta, &ctx)?;
                let b = -gen_bernoulli(eta, 1, &ctx)?;
                let a = g.agreement(&b);
                rows.push(CheckRow::new(
                    "special values",
                    "Gauss-sum formula = −B_{1,η}",
                    loc(eta, *p),
                    Some(a),
                    a >= need,
                    format!("{a} digits, need {need}"),
                ));
            }
            Ok(rows)
        };
        run().unwrap_or_else(|e| vec![err_row("special values", "evaluation", loc(eta, *p), e)])
    })
}

fn crit_measure(cfg: &SuiteConfig, env: &Env) -> Vec<CheckRow> {
    let m = cfg.prec;
    par_checks(env, &cfg.grid(), |(eta, p)| {
        let run = || -> Result<Vec<CheckRow>> {
            let ctx = context_for(eta.modulus(), *p, m)?;
            let k = cfg.k(*p);
            // extra terms certify every ψ coefficient through ⌊K/p⌋
            let ext = k + (*p as usize - 1) * (m as usize + 1);
            let mu = env.measure(eta, &ctx, ext, false)?;
            let psi = psi_op(&mu.amice);
            let upto = k / *p as usize;
            let bad_psi = psi.coeffs.iter().take(upto + 1).position(|c| !c.is_zero() || c.prec() < m as i64);
            let mut rows = vec![CheckRow::new(
                "measure integrity",
                "ψ(𝒜) = 0",
                loc(eta, *p),
                psi.coeffs.iter().take(upto + 1).map(|c| c.prec()).min(),
                bad_psi.is_none(),
                match bad_psi {
                    None => format!("coefficients 0..={upto} vanish"),
                    Some(l) => format!("coefficient {l} is {}", psi.coeffs[l]),
                },
            )];
            let gauss = build_mu_eta_gauss(eta, &ctx, k)?;
            let plain = env.measure(eta, &ctx, k, true)?;
            let same = gauss.amice.coeffs.iter().zip(&plain.amice.coeffs).all(|(a, b)| a == b);
            rows.push(CheckRow::new(
                "measure integrity",
                "Gauss-sum transform = character-value transform",
                loc(eta, *p),
                None,
                same,
                if same { format!("{} coefficients equal", k + 1) } else { "transforms differ".into() },
            ));
            let ep = eta.eval(*p as i64, &ctx)?;
            let one = PadicElem::one(&ctx);
            let mut bad = Vec::new();
            for j in 0..=6usize {
                let want = &(&one - &ep.shift(j as i64)) * &l_value_neg(eta, j, &ctx)?;
                let got = mu.moment(j)?;
                if got.agreement(&want) < want.prec().min(got.prec()) {
                    bad.push(j);
                }
            }
            rows.push(CheckRow::new(
                "measure integrity",
                "∫x^j dμ_η = (1−η(p)p^j)L(η,−j), j ≤ 6",
                loc(eta, *p),
                None,
                bad.is_empty(),
                if bad.is_empty() { "all moments match".into() } else { format!("mismatch at j = {bad:?}") },
            ));
            Ok(rows)
        };
        run().unwrap_or_else(|e| vec![err_row("measure integrity", "evaluation", loc(eta, *p), e)])
    })
}

/// Validation pairs for the stability and `Γ_p` criteria: trivial-zero
/// pairs other than the calibration pair, one per conjugate pair of
/// characters, ordered by conductor then prime.
pub fn validation_pairs(cfg: &SuiteConfig, count: usize) -> Vec<(DirichletChar, u64)> {
    let mut seen = Vec::new();
    let mut out = Vec::new();
    for (eta, p) in trivial_zero_pairs(cfg.scan_n, cfg.scan_p) {
        if eta.label() == DirichletChar::parse("quad3").unwrap().label() && p == 7 {
            continue;
        }
        // a conjugate character gives conjugate values, not a new test
        if seen.contains(&eta.label()) {
            continue;
        }
        seen.push(eta.label());
        seen.push(eta.conj().label());
        out.push((eta, p));
        if out.len() == count {
            break;
        }
    }
    out
}

fn crit_stability(cfg: &SuiteConfig, env: &Env) -> Vec<CheckRow> {
    let m = cfg.prec;
    let need = m as i64 - 6;
    par_checks(env, &validation_pairs(cfg, 10), |(eta, p)| {
        let run = || -> Result<CheckRow> {
            let k = cfg.k(*p);
            let base = l_invariant_for(env, eta, *p, m, Some(k), true, None)?;
            let finer = l_invariant_for(env, eta, *p, m + 5, None, false, None)?;
            let longer = l_invariant_for(env, eta, *p, m, Some(2 * k), false, None)?;
            let series_l = -(base.series_deriv.clone().unwrap().checked_div(&base.l_value)?);
            let a1 = base.l_measured.agreement(&finer.l_measured.transfer(base.l_measured.ctx())?);
            let a2 = base.l_measured.agreement(&longer.l_measured);
            let a3 = base.l_measured.agreement(&series_l);
            let worst = a1.min(a2).min(a3);
            Ok(CheckRow::new(
                "ℒ stability",
                "ℒ invariant under M+5, 2K and route swap",
                loc(eta, *p),
                Some(base.certified_prec),
                worst >= need,
                format!("ℒ = {}; agreement M+5: {a1}, 2K: {a2}, series: {a3}; need {need}", base.l_measured),
            ))
        };
        vec![run().unwrap_or_else(|e| err_row("ℒ stability", "evaluation", loc(eta, *p), e))]
    })
}

fn crit_fg(cfg: &SuiteConfig, env: &Env) -> Vec<CheckRow> {
    let m = cfg.prec;
    let need = m as i64 - 6;
    let cal = match fg_calibration(env, m) {
        Ok(c) => c,
        Err(e) => return vec![err_row("Γ_p oracle", "calibration", "quad3 p=7".into(), e)],
    };
    let pairs = validation_pairs(cfg, 10);
    let results: Vec<Result<(i64, i64, i64)>> = env.install(|| {
        pairs
            .par_iter()
            .map(|(eta, p)| {
                let r = l_invariant_for(env, eta, *p, m, Some(cfg.k(*p)), false, None)?;
                let ctx = lp_context(eta, *p, m)?;
                let gamma = GammaTable::new(&ctx);
                let agree = |c: &FgCalibration| -> Result<i64> {
                    Ok(fg_gamma_oracle(eta, &ctx, &gamma, c)?.agreement(&r.lp_deriv))
                };
                Ok((agree(&cal)?, agree(&cal.perturbed(1))?, agree(&cal.perturbed(-1))?))
            })
            .collect()
    });
    let mut rows = vec![CheckRow::new(
        "Γ_p oracle",
        "calibration",
        "quad3 p=7".into(),
        None,
        true,
        format!("A = {}/{}, B = {}/{}", cal.a.0, cal.a.1, cal.b.0, cal.b.1),
    )];
    let mut matched = 0;
    let mut broken_plus = 0;
    let mut broken_minus = 0;
    for ((eta, p), r) in pairs.iter().zip(&results) {
        match r {
            Ok((a, bp, bm)) => {
                matched += (*a >= need) as usize;
                broken_plus += (*bp < need) as usize;
                broken_minus += (*bm < need) as usize;
                rows.push(CheckRow::new(
                    "Γ_p oracle",
                    "prediction = L'_p(ηω, 0)",
                    loc(eta, *p),
                    Some(*a),
                    *a >= need,
                    format!("{a} digits, need {need}; perturbed B±1: {bp}, {bm}"),
                ));
            }
            Err(e) => rows.push(CheckRow::new("Γ_p oracle", "evaluation", loc(eta, *p), None, false, e.to_string())),
        }
    }
    rows.push(CheckRow::new(
        "Γ_p oracle",
        "≥ 10 validations",
        format!("{} pairs", pairs.len()),
        None,
        matched >= 10,
        format!("{matched} matched"),
    ));
    let n = pairs.len();
    rows.push(CheckRow::new(
        "Γ_p oracle",
        "negative control: B ± 1 breaks ≥ 9 of 10",
        format!("{n} pairs"),
        None,
        broken_plus * 10 >= 9 * n && broken_minus * 10 >= 9 * n && n > 0,
        format!("B+1 broke {broken_plus}, B−1 broke {broken_minus}"),
    ));
    rows
}

fn twist_chars(p: u64) -> Vec<DirichletChar> {
    ["quad3", "quad4", "quad7", "5.1", "5.3", "7.2"]
        .iter()
        .filter_map(|l| DirichletChar::parse(l).ok())
        .filter(|e| e.modulus() % p != 0 && e.realizable_at(p) && !e.is_trivial())
        .collect()
}

fn crit_modular(cfg: &SuiteConfig) -> Vec<CheckRow> {
    let m = cfg.prec;
    let fixtures = match load_fixtures(NEWFORM_FIXTURES) {
        Ok(f) => f,
        Err(e) => return vec![err_row("modular", "fixtures", "built-in".into(), e)],
    };
    let mut rows = vec![CheckRow::new(
        "modular",
        "fixture coverage",
        "built-in".into(),
        None,
        fixtures.len() >= 12,
        format!("{} rows", fixtures.len()),
    )];
    for fx in &fixtures {
        let name = fx.data.label.clone().unwrap_or_default();
        let run = || -> Result<Vec<CheckRow>> {
            let mut out = classify_rows(fx, None, m)?;
            let ctx = fixture_context(&fx.data, m)?;
            let d = NewformLocalData::from_json_in(&ctx, &fx.data)?;
            // all η(p) in μ_{p−1}: classifier against brute force
            let z = ctx.root_of_unity(ctx.p() - 1)?;
            let mut mism = Vec::new();
            for e in 0..ctx.p() - 1 {
                let el = EtaLocal { eta_p: z.pow(e as i64) };
                let keys: Vec<_> = classify_trivial_zeros(&d, &el)?.iter().map(|f| f.key()).collect();
                if keys != brute_force_zeros(&d, &el)? {
                    mism.push(e);
                }
            }
            out.push(CheckRow::new(
                "modular",
                "classifier = brute force over η(p) ∈ μ_{p−1}",
                name.clone(),
                None,
                mism.is_empty(),
                if mism.is_empty() { "agree".into() } else { format!("disagree at ζ^{mism:?}") },
            ));
            if d.case() == crate::modular::ZeroCase::Semistable {
                for eta in twist_chars(d.p) {
                    let tw = twist_reduce(&d, &eta)?;
                    let el = EtaLocal::from_char(&eta, &ctx)?;
                    let direct: Vec<_> = classify_trivial_zeros(&d, &el)?
                        .iter()
                        .map(|f| (f.j, f.m, (&f.alpha * &el.eta_p).to_string()))
                        .collect();
                    let reduced: Vec<_> = classify_trivial_zeros(&tw, &EtaLocal::trivial(&ctx))?
                        .iter()
                        .map(|f| (f.j, f.m, f.alpha.to_string()))
                        .collect();
                    out.push(CheckRow::new(
                        "modular",
                        "twist reduction commutes with classification",
                        format!("{name} ⊗ {}", eta.label()),
                        None,
                        direct == reduced,
                        format!("{} finding(s)", direct.len()),
                    ));
                }
            }
            Ok(out)
        };
        rows.extend(run().unwrap_or_else(|e| vec![err_row("modular", "evaluation", name.clone(), e)]));
    }
    rows
}

fn crit_tate(cfg: &SuiteConfig) -> Vec<CheckRow> {
    let mut rows = Vec::new();
    for p in [5u64, 7, 11] {
        let tc = TateConfig { p, j: None, prec: cfg.prec, samples: 10, seed: cfg.seed };
        match cmd_tate(&tc) {
            Ok(r) => rows.extend(r.checks),
            Err(e) => rows.push(err_row("tate", "evaluation", format!("p={p}"), e)),
        }
    }
    rows
}

/// One random evaluation point for the finite-difference check.
#[derive(Clone, Debug)]
pub struct HygienePoint {
    pub eta: DirichletChar,
    pub p: u64,
    pub m: i64,
    pub s: (i64, i64),
}

pub fn hygiene_points(cfg: &SuiteConfig, count: usize) -> Vec<HygienePoint> {
    let grid = cfg.grid();
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    (0..count)
        .map(|_| {
            let (eta, p) = grid[rng.random_range(0..grid.len())].clone();
            let m = rng.random_range(0..p as i64 - 1);
            let b = 2 * rng.random_range(0..6i64) + 1;
            let b = if b % p as i64 == 0 { b + 2 } else { b };
            let a = rng.random_range(-50..50i64);
            HygienePoint { eta, p, m, s: (a, b) }
        })
        .collect()
}

/// Order to which a symmetric difference with step `h = p^3` should match
/// the jet derivative: the tracked precisions, capped by the `O(h^2)` term.
pub fn fd_expected_order(fd: &PadicElem, jet: &PadicElem, h_val: i64) -> i64 {
    fd.prec().min(jet.prec()).min(2 * h_val)
}

fn crit_hygiene(cfg: &SuiteConfig, env: &Env) -> Vec<CheckRow> {
    let m = cfg.prec;
    let pts = hygiene_points(cfg, 20);
    par_checks(env, &pts, |pt| {
        let l = format!("{} p={} m={} s={}/{}", pt.eta.label(), pt.p, pt.m, pt.s.0, pt.s.1);
        let run = || -> Result<CheckRow> {
            let ctx = context_for(pt.eta.modulus(), pt.p, m)?;
            let engine = env.engine(&pt.eta, &ctx, cfg.k(pt.p), true)?;
            let s0 = PadicElem::from_ratio(&ctx, pt.s.0, pt.s.1);
            let h = PadicElem::from_i64(&ctx, (pt.p as i64).pow(3));
            let jet = engine.measure_route(pt.m, &Jet::variable(s0.clone()))?;
            let up = engine.measure_route(pt.m, &Jet::constant(&s0 + &h))?;
            let dn = engine.measure_route(pt.m, &Jet::constant(&s0 - &h))?;
            let fd = (&up.value.value - &dn.value.value).checked_div(&h.mul_int(2))?;
            let want = fd_expected_order(&fd, &jet.value.deriv, 3);
            let got = fd.agreement(&jet.value.deriv);
            Ok(CheckRow::new(
                "hygiene",
                "jet derivative = symmetric difference",
                l.clone(),
                Some(want),
                got >= want,
                format!("{got} digits, tracker predicts {want}"),
            ))
        };
        vec![run().unwrap_or_else(|e| err_row("hygiene", "evaluation", l.clone(), e))]
    })
}

/// Runs one acceptance criterion.
pub fn run_criterion(id: u8, cfg: &SuiteConfig, env: &Env) -> Result<CriterionOutcome> {
    cfg.validate()?;
    let checks = match id {
        1 => crit_interpolation(cfg, env),
        2 => crit_cross_route(cfg, env),
        3 => crit_trivial_zeros(cfg, env),
        4 => crit_special_values(cfg, env),
        5 => crit_measure(cfg, env),
        6 => crit_stability(cfg, env),
        7 => crit_fg(cfg, env),
        8 => crit_modular(cfg),
        9 => crit_tate(cfg),
        10 => crit_hygiene(cfg, env),
        _ => return Err(Error::Config(format!("criterion {id} does not exist (1..=10)"))),
    };
    Ok(CriterionOutcome { id, title: CRITERIA[id as usize - 1], checks })
}

/// Runs the selected criteria plus the cache self-check.
pub fn cmd_verify(cfg: &SuiteConfig, env: &Env) -> Result<(VerificationReport, Vec<CriterionOutcome>)> {
    cfg.validate()?;
    let mut checks = Vec::new();
    if let Some(status) = env.bernoulli_cache(64)? {
        let path = env.cache_dir().expect("cache dir is set").join("bernoulli.json");
        let intact = match load_bernoulli_cache(&path) {
            Ok(v) => (0..=64).all(|n| v.get(&n) == Some(&bernoulli(n))),
            Err(_) => false,
        };
        checks.push(CheckRow::new(
            "cache",
            "Bernoulli cache",
            "bernoulli.json".into(),
            None,
            intact,
            format!("{status:?}"),
        ));
    }
    let mut outcomes = Vec::new();
    for &id in &cfg.criteria {
        let o = run_criterion(id, cfg, env)?;
        checks.extend(o.checks.iter().cloned());
        outcomes.push(o);
    }
    let report = VerificationReport::new("verify", serde_json::to_value(cfg)?, vec![], checks);
    Ok((report, outcomes))
}
