//! Sampling-based verification and falsification of certificates.
//!
//! All pair evaluations may run in parallel; results are always reduced in
//! sample-index order, so every report is a deterministic function of the
//! configuration and seed.

use rayon::prelude::*;
use serde::Serialize;

use crate::certificates::{pair_distances, BanachCertificate, Certificate, SimulationFunction, Verdict, WeaklyTypeTriple};
use crate::error::{Error, Result};
use crate::library::Instance;
use crate::metric::{MetricSpace, Point, SelfMap};
use crate::picard::{picard_iterate, PicardTrace, StoppingRule};
use crate::sampling::{check_band, sample_pair_in_annulus, Sampler};

/// Pairs evaluated per parallel batch before checking for an early stop.
const BATCH: u64 = 4096;

/// Added to the sampled Lipschitz ratio before testing it as a Banach constant.
pub const LAMBDA_MARGIN: f64 = 1e-6;

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct VerificationConfig {
    pub n_pairs: u64,
    pub seed: u64,
    /// Slack η on every certificate inequality.
    pub slack: f64,
    pub epsilon_grid: Vec<f64>,
    /// Depth of the δ ladder in modulus estimation.
    pub shrink_levels: u32,
    /// The ladder starts at width `width_factor · ε`.
    pub width_factor: f64,
}

impl Default for VerificationConfig {
    fn default() -> Self {
        VerificationConfig {
            n_pairs: 100_000,
            seed: 0,
            slack: 0.0,
            epsilon_grid: vec![0.25, 0.5, 1.0, 2.0],
            shrink_levels: 8,
            width_factor: 4.0,
        }
    }
}

impl VerificationConfig {
    pub fn validate(&self) -> Result<()> {
        if self.n_pairs == 0 {
            return Err(Error::Usage("n_pairs must be positive".into()));
        }
        if !(self.slack >= 0.0 && self.slack.is_finite()) {
            return Err(Error::Usage(format!("slack must be non-negative, got {}", self.slack)));
        }
        if self.epsilon_grid.iter().any(|e| !(*e > 0.0 && e.is_finite()))
            || self.epsilon_grid.windows(2).any(|w| w[0] >= w[1])
        {
            return Err(Error::Usage(
                "epsilon_grid must be strictly ascending positive values".into(),
            ));
        }
        if self.shrink_levels == 0 {
            return Err(Error::Usage("shrink_levels must be at least 1".into()));
        }
        if !(self.width_factor > 0.0 && self.width_factor.is_finite()) {
            return Err(Error::Usage("width_factor must be positive".into()));
        }
        Ok(())
    }

    fn sampler(&self) -> Sampler {
        Sampler::uniform(self.seed)
    }
}

/// One sampled pair and the numbers that decided its verdict.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct WitnessPair {
    pub p: Point,
    pub q: Point,
    pub distance: f64,
    pub mapped_distance: f64,
    pub margin: f64,
    /// Epsilon of the band the pair was drawn from, for Meir-Keeler checks.
    pub epsilon: Option<f64>,
}

/// Replayable evidence that a certificate inequality fails.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CounterexampleWitness {
    pub kind: String,
    pub certificate: String,
    pub pairs: Vec<WitnessPair>,
    pub epsilon_0: Option<f64>,
}

impl CounterexampleWitness {
    /// Re-evaluate every pair; true iff each one is still a violation.
    pub fn replay(&self, cert: &Certificate, map: &SelfMap, slack: f64) -> Result<bool> {
        for w in &self.pairs {
            let (d, dt) = pair_distances(map, &w.p, &w.q)?;
            if !cert.check_distances(d, dt, slack, w.epsilon)?.is_violated() {
                return Ok(false);
            }
        }
        Ok(!self.pairs.is_empty())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(tag = "status", rename_all = "snake_case")]
pub enum VerificationOutcome {
    NoViolationFound {
        pairs_checked: u64,
        /// Largest margin seen; a value near zero means a near-violation.
        worst_margin: Option<f64>,
        /// Grid epsilons that were skipped because their band is infeasible.
        skipped_epsilons: Vec<f64>,
    },
    Violation(CounterexampleWitness),
}

impl VerificationOutcome {
    pub fn is_violation(&self) -> bool {
        matches!(self, VerificationOutcome::Violation(_))
    }

    pub fn witness(&self) -> Option<&CounterexampleWitness> {
        match self {
            VerificationOutcome::Violation(w) => Some(w),
            _ => None,
        }
    }
}

struct Scan {
    checked: u64,
    worst: Option<f64>,
    violation: Option<WitnessPair>,
}

/// p, q, d(p, q), d(Tp, Tq) and the verdict for one sampled pair.
type CheckedPair = (Point, Point, f64, f64, Verdict);

// Evaluate `cert` on `count` pairs produced by `pair_at`, stopping at the
// first violation in index order.
fn scan_pairs<F>(
    cert: &Certificate,
    map: &SelfMap,
    slack: f64,
    epsilon: Option<f64>,
    count: u64,
    pair_at: F,
) -> Result<Scan>
where
    F: Fn(u64) -> (Point, Point) + Sync,
{
    let mut scan = Scan {
        checked: 0,
        worst: None,
        violation: None,
    };
    let mut start = 0;
    while start < count {
        let end = (start + BATCH).min(count);
        let results: Vec<Result<CheckedPair>> = (start..end)
            .into_par_iter()
            .map(|i| {
                let (p, q) = pair_at(i);
                let (d, dt) = pair_distances(map, &p, &q)?;
                let v = cert.check_distances(d, dt, slack, epsilon)?;
                Ok((p, q, d, dt, v))
            })
            .collect();
        let results = results.into_iter().collect::<Result<Vec<_>>>()?;
        for (p, q, d, dt, v) in results {
            scan.checked += 1;
            if let Some(m) = v.margin() {
                scan.worst = Some(scan.worst.map_or(m, |w: f64| w.max(m)));
            }
            if let Verdict::Violated { margin } = v {
                scan.violation = Some(WitnessPair {
                    p,
                    q,
                    distance: d,
                    mapped_distance: dt,
                    margin,
                    epsilon,
                });
                return Ok(scan);
            }
        }
        start = end;
    }
    Ok(scan)
}

/// Points drawn for the self-map check that precedes every scan.
pub const SELF_MAP_CHECK_POINTS: u64 = 4096;

/// Apply `map` to seeded sample points and to the corners of the sampling
/// box; the first point mapped outside the domain is returned as an error.
pub fn self_map_precheck(map: &SelfMap, seed: u64) -> Result<()> {
    let space = map.space();
    let sampler = Sampler::uniform(seed).fork("self-map", &[]);
    let bounds = space.sampling_box();
    let dim = bounds.len();
    let corners = if dim <= 10 { 1u64 << dim } else { 0 };
    let corner = |mask: u64| {
        let coords = bounds
            .iter()
            .enumerate()
            .map(|(i, iv)| if mask >> i & 1 == 1 { iv.upper } else { iv.lower })
            .collect();
        Point::new(coords).expect("sampling box is finite")
    };
    let results: Vec<Result<Point>> = (0..corners + SELF_MAP_CHECK_POINTS)
        .into_par_iter()
        .map(|i| {
            let p = if i < corners { corner(i) } else { sampler.point(space, i - corners) };
            map.apply(&p)
        })
        .collect();
    results.into_iter().try_for_each(|r| r.map(drop))
}

fn eps_key(eps: f64) -> u64 {
    eps.to_bits()
}

/// Evaluate a certificate's pointwise inequality on sampled pairs.
///
/// Banach, Z and weakly-type certificates are checked on `n_pairs` uniform
/// pairs. Meir-Keeler moduli are checked on annulus samples
/// `ε ≤ d < ε + δ(ε)` for each grid ε, splitting `n_pairs` evenly; grid
/// values whose band is infeasible are skipped and listed.
pub fn verify_certificate(cert: &Certificate, map: &SelfMap, cfg: &VerificationConfig) -> Result<VerificationOutcome> {
    cfg.validate()?;
    self_map_precheck(map, cfg.seed)?;
    let space = map.space();
    let witness = |pair: WitnessPair| CounterexampleWitness {
        kind: cert.kind().to_string(),
        certificate: cert.label(),
        epsilon_0: pair.epsilon,
        pairs: vec![pair],
    };
    match cert {
        Certificate::MeirKeeler(modulus) => {
            let per_eps = (cfg.n_pairs / cfg.epsilon_grid.len().max(1) as u64).max(1);
            let mut checked = 0;
            let mut worst: Option<f64> = None;
            let mut skipped = Vec::new();
            for &eps in &cfg.epsilon_grid {
                let delta = modulus.delta(eps)?;
                let sampler = cfg.sampler().fork("verify-mk", &[eps_key(eps)]);
                let sample = match sample_pair_in_annulus(space, &sampler, None, eps, delta, per_eps as usize) {
                    Ok(s) => s,
                    Err(Error::InfeasibleBand { .. }) => {
                        skipped.push(eps);
                        continue;
                    }
                    Err(e) => return Err(e),
                };
                let pairs = &sample.pairs;
                let scan = scan_pairs(cert, map, cfg.slack, Some(eps), pairs.len() as u64, |i| {
                    pairs[i as usize].clone()
                })?;
                checked += scan.checked;
                if let Some(m) = scan.worst {
                    worst = Some(worst.map_or(m, |w| w.max(m)));
                }
                if let Some(pair) = scan.violation {
                    return Ok(VerificationOutcome::Violation(witness(pair)));
                }
            }
            Ok(VerificationOutcome::NoViolationFound {
                pairs_checked: checked,
                worst_margin: worst,
                skipped_epsilons: skipped,
            })
        }
        _ => {
            let sampler = cfg.sampler().fork("verify", &[]);
            let scan = scan_pairs(cert, map, cfg.slack, None, cfg.n_pairs, |i| sampler.pair(space, i))?;
            Ok(match scan.violation {
                Some(pair) => VerificationOutcome::Violation(witness(pair)),
                None => VerificationOutcome::NoViolationFound {
                    pairs_checked: scan.checked,
                    worst_margin: scan.worst,
                    skipped_epsilons: Vec::new(),
                },
            })
        }
    }
}

/// One rung of the δ ladder.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct LadderLevel {
    pub delta: f64,
    pub sampled: u64,
    pub examined: u64,
    pub bad_pair: Option<WitnessPair>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(tag = "verdict", rename_all = "snake_case")]
pub enum ModulusVerdict {
    Positive,
    /// Every level that produced samples contained a bad pair.
    Failed(CounterexampleWitness),
    /// No level produced any in-band sample.
    Inconclusive,
}

/// Empirical Meir-Keeler δ for one ε.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ModulusEstimate {
    pub epsilon: f64,
    /// Zero unless the verdict is positive.
    pub delta_hat: f64,
    pub pairs_examined: u64,
    pub levels: Vec<LadderLevel>,
    pub verdict: ModulusVerdict,
}

impl ModulusEstimate {
    pub fn is_positive(&self) -> bool {
        matches!(self.verdict, ModulusVerdict::Positive)
    }
}

/// Search for δ > 0 with `ε ≤ d(p,q) < ε + δ ⇒ d(Tp,Tq) < ε` on samples.
///
/// Walks the ladder δ = w, w/2, …, w/2^(levels−1) with w = `width_factor·ε`.
/// A level whose full sample has no bad pair ends the search with
/// `delta_hat = δ`. A bad pair (d(Tp,Tq) ≥ ε, up to slack) sends the search
/// one level down; if every level has one, the bad pairs form the witness
/// sequence.
pub fn estimate_mk_modulus(map: &SelfMap, epsilon: f64, cfg: &VerificationConfig) -> Result<ModulusEstimate> {
    cfg.validate()?;
    self_map_precheck(map, cfg.seed)?;
    let space = map.space();
    let width = cfg.width_factor * epsilon;
    check_band(space, epsilon, width)?;
    let per_level = (cfg.n_pairs / u64::from(cfg.shrink_levels)).max(1);
    let probe = Certificate::MeirKeeler(
        crate::certificates::MeirKeelerModulus::parse(&format!("{width}")).expect("constant modulus"),
    );

    let mut levels = Vec::with_capacity(cfg.shrink_levels as usize);
    let mut examined = 0;
    for k in 0..cfg.shrink_levels {
        let delta = width / 2f64.powi(k as i32);
        let sampler = cfg.sampler().fork("mk-estimate", &[eps_key(epsilon), u64::from(k)]);
        let sample = sample_pair_in_annulus(space, &sampler, None, epsilon, delta, per_level as usize)?;
        let pairs = &sample.pairs;
        // pairs are inside [ε, ε + δ) ⊂ [ε, ε + w), so the constant-w modulus
        // never reports them vacuous
        let scan = scan_pairs(&probe, map, cfg.slack, Some(epsilon), pairs.len() as u64, |i| {
            pairs[i as usize].clone()
        })?;
        examined += scan.checked;
        let bad = scan.violation.is_some();
        levels.push(LadderLevel {
            delta,
            sampled: pairs.len() as u64,
            examined: scan.checked,
            bad_pair: scan.violation,
        });
        if !bad && !pairs.is_empty() {
            return Ok(ModulusEstimate {
                epsilon,
                delta_hat: delta,
                pairs_examined: examined,
                levels,
                verdict: ModulusVerdict::Positive,
            });
        }
    }
    let bad_pairs: Vec<WitnessPair> = levels.iter().filter_map(|l| l.bad_pair.clone()).collect();
    let verdict = if bad_pairs.is_empty() {
        ModulusVerdict::Inconclusive
    } else {
        ModulusVerdict::Failed(CounterexampleWitness {
            kind: "meir_keeler".into(),
            certificate: format!("no delta on the ladder from {width}"),
            pairs: bad_pairs,
            epsilon_0: Some(epsilon),
        })
    };
    Ok(ModulusEstimate {
        epsilon,
        delta_hat: 0.0,
        pairs_examined: examined,
        levels,
        verdict,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(tag = "status", rename_all = "snake_case")]
pub enum RowStatus {
    Positive,
    Failed,
    Inconclusive,
    /// ε exceeds what the sampled region can realise.
    Infeasible,
    /// The instance's certificate was not verified; the theorems say nothing.
    Skipped { reason: String },
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct DemoRow {
    pub instance: String,
    pub certificate: String,
    pub epsilon: Option<f64>,
    pub status: RowStatus,
    pub delta_hat: Option<f64>,
    pub pairs_examined: u64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct DemoTable {
    pub rows: Vec<DemoRow>,
}

impl DemoTable {
    /// True iff every feasible row of every verified instance is positive.
    pub fn all_verified_positive(&self) -> bool {
        self.rows.iter().all(|r| {
            matches!(
                r.status,
                RowStatus::Positive | RowStatus::Infeasible | RowStatus::Skipped { .. }
            )
        })
    }
}

/// For each instance whose certificate verifies, estimate the Meir-Keeler
/// modulus at every grid ε. Unverified instances get one skipped row.
pub fn containment_demo(instances: &[Instance], cfg: &VerificationConfig) -> Result<DemoTable> {
    cfg.validate()?;
    let mut rows = Vec::new();
    for inst in instances {
        let skipped = |reason: String| DemoRow {
            instance: inst.name.clone(),
            certificate: inst.certificate.label(),
            epsilon: None,
            status: RowStatus::Skipped { reason },
            delta_hat: None,
            pairs_examined: 0,
        };
        match verify_certificate(&inst.certificate, &inst.map, cfg) {
            Ok(VerificationOutcome::NoViolationFound { .. }) => {}
            Ok(VerificationOutcome::Violation(w)) => {
                let p = &w.pairs[0];
                rows.push(skipped(format!(
                    "certificate not verified: violated at ({}, {}) with margin {}",
                    p.p, p.q, p.margin
                )));
                continue;
            }
            Err(e) => {
                rows.push(skipped(format!("certificate check failed: {e}")));
                continue;
            }
        }
        for &eps in &cfg.epsilon_grid {
            let row = match estimate_mk_modulus(&inst.map, eps, cfg) {
                Ok(est) => DemoRow {
                    instance: inst.name.clone(),
                    certificate: inst.certificate.label(),
                    epsilon: Some(eps),
                    status: match est.verdict {
                        ModulusVerdict::Positive => RowStatus::Positive,
                        ModulusVerdict::Failed(_) => RowStatus::Failed,
                        ModulusVerdict::Inconclusive => RowStatus::Inconclusive,
                    },
                    delta_hat: est.is_positive().then_some(est.delta_hat),
                    pairs_examined: est.pairs_examined,
                },
                Err(Error::InfeasibleBand { .. }) => DemoRow {
                    instance: inst.name.clone(),
                    certificate: inst.certificate.label(),
                    epsilon: Some(eps),
                    status: RowStatus::Infeasible,
                    delta_hat: None,
                    pairs_examined: 0,
                },
                Err(e) => DemoRow {
                    epsilon: Some(eps),
                    ..skipped(format!("estimation failed: {e}"))
                },
            };
            rows.push(row);
        }
    }
    Ok(DemoTable { rows })
}

/// Largest sampled ratio d(Tp,Tq)/d(p,q) over pairs with d(p,q) > 0.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct LipschitzEstimate {
    pub lambda_hat: f64,
    pub pairs_used: u64,
}

pub fn estimate_lipschitz(map: &SelfMap, cfg: &VerificationConfig) -> Result<LipschitzEstimate> {
    cfg.validate()?;
    let space = map.space();
    let sampler = cfg.sampler().fork("lambda", &[]);
    let ratios: Vec<Result<Option<f64>>> = (0..cfg.n_pairs)
        .into_par_iter()
        .map(|i| {
            let (p, q) = sampler.pair(space, i);
            let (d, dt) = pair_distances(map, &p, &q)?;
            Ok((d > 0.0).then(|| dt / d))
        })
        .collect();
    let mut est = LipschitzEstimate {
        lambda_hat: 0.0,
        pairs_used: 0,
    };
    for r in ratios {
        if let Some(ratio) = r? {
            est.pairs_used += 1;
            est.lambda_hat = est.lambda_hat.max(ratio);
        }
    }
    Ok(est)
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CertificateResult {
    pub name: String,
    pub certificate: String,
    pub outcome: VerificationOutcome,
}

impl CertificateResult {
    pub fn verified(&self) -> bool {
        !self.outcome.is_violation()
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(tag = "status", rename_all = "snake_case")]
pub enum ModulusRow {
    Estimated(ModulusEstimate),
    Infeasible { epsilon: f64 },
}

/// Which classes the sampled evidence is consistent with.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct ClassVerdicts {
    pub banach: bool,
    pub z_contraction: bool,
    pub weakly_type: bool,
    pub meir_keeler: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ClassificationReport {
    pub map: String,
    pub map_exprs: Vec<String>,
    pub space: MetricSpace,
    pub seed: u64,
    pub n_pairs: u64,
    pub lipschitz: LipschitzEstimate,
    /// `None` when λ̂ ≥ 1 and no Banach constant was tried.
    pub banach: Option<CertificateResult>,
    pub zeta: Vec<CertificateResult>,
    pub weakly_type: Vec<CertificateResult>,
    pub modulus: Vec<ModulusRow>,
    pub classes: ClassVerdicts,
    pub scope: String,
}

/// Sample-based classification of a map against every certificate kind.
pub fn classify(
    map: &SelfMap,
    zeta_library: &[SimulationFunction],
    triple_library: &[(String, WeaklyTypeTriple)],
    cfg: &VerificationConfig,
) -> Result<ClassificationReport> {
    cfg.validate()?;
    let lipschitz = estimate_lipschitz(map, cfg)?;
    let banach = if lipschitz.lambda_hat < 1.0 {
        let mut lambda = (lipschitz.lambda_hat + LAMBDA_MARGIN).min(1.0 - cfg.slack);
        if lambda >= 1.0 {
            lambda = 1.0 - f64::EPSILON / 2.0;
        }
        let cert = Certificate::Banach(BanachCertificate::new(lambda)?);
        Some(CertificateResult {
            name: "banach".into(),
            certificate: cert.label(),
            outcome: verify_certificate(&cert, map, cfg)?,
        })
    } else {
        None
    };
    let zeta = zeta_library
        .iter()
        .map(|z| {
            let cert = Certificate::Zeta(z.clone());
            Ok(CertificateResult {
                name: z.name().to_owned(),
                certificate: cert.label(),
                outcome: verify_certificate(&cert, map, cfg)?,
            })
        })
        .collect::<Result<Vec<_>>>()?;
    let weakly_type = triple_library
        .iter()
        .map(|(name, w)| {
            let cert = Certificate::WeaklyType(w.clone());
            Ok(CertificateResult {
                name: name.clone(),
                certificate: cert.label(),
                outcome: verify_certificate(&cert, map, cfg)?,
            })
        })
        .collect::<Result<Vec<_>>>()?;
    let modulus = cfg
        .epsilon_grid
        .iter()
        .map(|&eps| match estimate_mk_modulus(map, eps, cfg) {
            Ok(est) => Ok(ModulusRow::Estimated(est)),
            Err(Error::InfeasibleBand { .. }) => Ok(ModulusRow::Infeasible { epsilon: eps }),
            Err(e) => Err(e),
        })
        .collect::<Result<Vec<_>>>()?;

    let estimated: Vec<&ModulusEstimate> = modulus
        .iter()
        .filter_map(|r| match r {
            ModulusRow::Estimated(e) => Some(e),
            ModulusRow::Infeasible { .. } => None,
        })
        .collect();
    let classes = ClassVerdicts {
        banach: banach.as_ref().is_some_and(CertificateResult::verified),
        z_contraction: zeta.iter().any(CertificateResult::verified),
        weakly_type: weakly_type.iter().any(CertificateResult::verified),
        meir_keeler: !estimated.is_empty() && estimated.iter().all(|e| e.is_positive()),
    };
    let space = map.space();
    Ok(ClassificationReport {
        map: map.name().to_owned(),
        map_exprs: map.exprs().iter().map(ToString::to_string).collect(),
        space: space.clone(),
        seed: cfg.seed,
        n_pairs: cfg.n_pairs,
        lipschitz,
        banach,
        zeta,
        weakly_type,
        modulus,
        classes,
        scope: format!(
            "verdicts cover {} sampled pairs from the sampling box of `{}` only",
            cfg.n_pairs,
            space.name()
        ),
    })
}

#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(tag = "status", rename_all = "snake_case")]
pub enum Uniqueness {
    Agree { fixed_point: Point, max_spread: f64 },
    Disagree { reason: String, witness_starts: Vec<Point> },
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct UniquenessReport {
    pub starts: Vec<Point>,
    pub limits: Vec<Option<Point>>,
    pub agreement_tol: f64,
    pub outcome: Uniqueness,
}

/// Picard from `n_starts` seeded uniform starts; see [`picard_uniqueness_from`].
pub fn picard_uniqueness_probe(map: &SelfMap, n_starts: usize, seed: u64, stop: &StoppingRule) -> Result<UniquenessReport> {
    let sampler = Sampler::uniform(seed).fork("picard-starts", &[]);
    let starts: Vec<Point> = (0..n_starts as u64).map(|i| sampler.point(map.space(), i)).collect();
    picard_uniqueness_from(map, &starts, stop)
}

/// Run Picard from every start. The limits agree iff every run converged
/// and all pairwise distances are within 10 × `stop.tol`.
pub fn picard_uniqueness_from(map: &SelfMap, starts: &[Point], stop: &StoppingRule) -> Result<UniquenessReport> {
    if starts.len() < 2 {
        return Err(Error::Usage("uniqueness probe needs at least two starts".into()));
    }
    let traces: Vec<PicardTrace> = starts
        .par_iter()
        .map(|x0| picard_iterate(map, x0, stop))
        .collect::<Result<_>>()?;
    let limits: Vec<Option<Point>> = traces.iter().map(|t| t.fixed_point().cloned()).collect();
    let agreement_tol = 10.0 * stop.tol;

    let stuck: Vec<Point> = starts
        .iter()
        .zip(&limits)
        .filter(|(_, l)| l.is_none())
        .map(|(s, _)| s.clone())
        .collect();
    let outcome = if !stuck.is_empty() {
        Uniqueness::Disagree {
            reason: "Picard did not converge from every start".into(),
            witness_starts: stuck,
        }
    } else {
        let us: Vec<&Point> = limits.iter().flatten().collect();
        let space = map.space();
        let mut spread = 0.0;
        let mut pair = (0, 0);
        for i in 0..us.len() {
            for j in i + 1..us.len() {
                let d = space.distance(us[i], us[j])?;
                if d > spread {
                    spread = d;
                    pair = (i, j);
                }
            }
        }
        if spread <= agreement_tol {
            Uniqueness::Agree {
                fixed_point: us[0].clone(),
                max_spread: spread,
            }
        } else {
            Uniqueness::Disagree {
                reason: format!("limits differ by {spread}"),
                witness_starts: vec![starts[pair.0].clone(), starts[pair.1].clone()],
            }
        }
    };
    Ok(UniquenessReport {
        starts: starts.to_vec(),
        limits,
        agreement_tol,
        outcome,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::certificates::{MeirKeelerModulus, SimulationFunction};
    use crate::library;
    use std::sync::Arc;

    fn map(lo: f64, hi: f64, src: &str) -> SelfMap {
        SelfMap::parse(src, Arc::new(MetricSpace::interval(lo, hi).unwrap()), &[src]).unwrap()
    }

    fn small_cfg() -> VerificationConfig {
        VerificationConfig {
            n_pairs: 4000,
            ..Default::default()
        }
    }

    #[test]
    fn exact_lambda_map_has_zero_worst_margin() {
        let cert = Certificate::Banach(BanachCertificate::new(0.5).unwrap());
        let out = verify_certificate(&cert, &map(0.0, 10.0, "x1/2"), &small_cfg()).unwrap();
        assert_eq!(
            out,
            VerificationOutcome::NoViolationFound {
                pairs_checked: 4000,
                worst_margin: Some(0.0),
                skipped_epsilons: vec![],
            }
        );
    }

    #[test]
    fn z_violation_is_found_and_replays() {
        let cert = Certificate::Zeta(SimulationFunction::parse("half", "s/2 - t").unwrap());
        let m = map(0.0, 10.0, "0.9*x1");
        let out = verify_certificate(&cert, &m, &small_cfg()).unwrap();
        let w = out.witness().expect("0.9x violates s/2 - t");
        assert_eq!(w.pairs.len(), 1);
        let pair = &w.pairs[0];
        assert!(pair.distance > 0.0);
        assert!((pair.margin - 0.4 * pair.distance).abs() < 1e-12);
        assert!(w.replay(&cert, &m, 0.0).unwrap());
    }

    #[test]
    fn mk_violation_for_identity() {
        let cert = Certificate::MeirKeeler(MeirKeelerModulus::parse("eps").unwrap());
        let m = map(0.0, 2.0, "x1");
        let cfg = VerificationConfig {
            epsilon_grid: vec![1.0],
            ..small_cfg()
        };
        let w = verify_certificate(&cert, &m, &cfg).unwrap().witness().cloned().unwrap();
        let pair = &w.pairs[0];
        assert_eq!(pair.mapped_distance, pair.distance);
        assert!(pair.distance >= 1.0);
        assert_eq!(w.epsilon_0, Some(1.0));
        assert!(w.replay(&cert, &m, 0.0).unwrap());
    }

    #[test]
    fn mk_verify_skips_infeasible_epsilon() {
        let cert = Certificate::MeirKeeler(MeirKeelerModulus::parse("eps").unwrap());
        let cfg = VerificationConfig {
            epsilon_grid: vec![0.5, 5.0],
            ..small_cfg()
        };
        match verify_certificate(&cert, &map(0.0, 2.0, "x1/2"), &cfg).unwrap() {
            VerificationOutcome::NoViolationFound { skipped_epsilons, .. } => {
                assert_eq!(skipped_epsilons, vec![5.0])
            }
            v => panic!("{v:?}"),
        }
    }

    #[test]
    fn self_map_violation_propagates() {
        let cert = Certificate::Banach(BanachCertificate::new(0.5).unwrap());
        let r = verify_certificate(&cert, &map(0.0, 1.0, "x1 + 0.5"), &small_cfg());
        assert!(matches!(r, Err(Error::SelfMapViolation { .. })), "{r:?}");
    }

    #[test]
    fn half_map_modulus_with_unit_width() {
        let cfg = VerificationConfig {
            width_factor: 1.0,
            ..small_cfg()
        };
        let est = estimate_mk_modulus(&map(0.0, 10.0, "x1/2"), 1.0, &cfg).unwrap();
        assert!(est.is_positive());
        assert_eq!(est.delta_hat, 1.0);
        assert_eq!(est.levels.len(), 1);
    }

    #[test]
    fn constant_map_positive_at_first_level() {
        let est = estimate_mk_modulus(&map(0.0, 2.0, "0"), 1.0, &small_cfg()).unwrap();
        assert!(est.is_positive());
        assert_eq!(est.delta_hat, 4.0);
    }

    #[test]
    fn identity_fails_at_every_level() {
        let cfg = small_cfg();
        let est = estimate_mk_modulus(&map(0.0, 2.0, "x1"), 1.0, &cfg).unwrap();
        let ModulusVerdict::Failed(w) = &est.verdict else {
            panic!("{:?}", est.verdict)
        };
        assert_eq!(w.pairs.len(), cfg.shrink_levels as usize);
        for (k, pair) in w.pairs.iter().enumerate() {
            let delta = 4.0 / 2f64.powi(k as i32);
            assert!(1.0 <= pair.distance && pair.distance < 1.0 + delta);
            assert!(pair.mapped_distance >= 1.0);
        }
    }

    #[test]
    fn infeasible_modulus_estimate() {
        assert!(matches!(
            estimate_mk_modulus(&map(0.0, 1.0, "x1/2"), 2.0, &small_cfg()),
            Err(Error::InfeasibleBand { .. })
        ));
    }

    #[test]
    fn classify_linear_and_identity() {
        let cfg = small_cfg();
        let half = classify(&map(0.0, 10.0, "x1/2"), &library::zeta_library(), &library::triple_library(), &cfg).unwrap();
        assert_eq!(half.lipschitz.lambda_hat, 0.5);
        assert!(half.classes.banach && half.classes.meir_keeler && half.classes.z_contraction);

        let id = classify(&map(0.0, 10.0, "x1"), &library::zeta_library(), &library::triple_library(), &cfg).unwrap();
        assert_eq!(id.lipschitz.lambda_hat, 1.0);
        assert!(id.banach.is_none());
        assert_eq!(
            id.classes,
            ClassVerdicts {
                banach: false,
                z_contraction: false,
                weakly_type: false,
                meir_keeler: false
            }
        );
    }

    #[test]
    fn uniqueness_examples() {
        let stop = StoppingRule::new(1e-9, 10_000, 1e6).unwrap();
        let half = map(-5.0, 5.0, "x1/2");
        let r = picard_uniqueness_probe(&half, 8, 0, &stop).unwrap();
        match r.outcome {
            Uniqueness::Agree { fixed_point, .. } => assert!(fixed_point.coords()[0].abs() < 1e-8),
            o => panic!("{o:?}"),
        }
        let sq = map(0.0, 1.0, "x1^2");
        let r = picard_uniqueness_from(&sq, &[Point::from(0.2), Point::from(1.0)], &stop).unwrap();
        assert!(matches!(r.outcome, Uniqueness::Disagree { .. }));
        assert_eq!(r.limits[1], Some(Point::from(1.0)));
        assert!(r.limits[0].as_ref().unwrap().coords()[0] < 1e-9);
        assert!(picard_uniqueness_from(&sq, &[Point::from(0.2)], &stop).is_err());
    }
}
