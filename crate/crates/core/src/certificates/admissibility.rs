//! Finite probes of certificate admissibility.
//!
//! The conditions on simulation functions and weakly-type triples quantify
//! over all of (0, ∞) or over all convergent sequences, so no finite check
//! decides them. These probes can only refute; a passing report reads
//! "consistent with admissibility".

use serde::Serialize;

use super::{SimulationFunction, Strictness, WeaklyTypeTriple};
use crate::error::{Error, Result};

pub const CAVEAT: &str =
    "finite probe: consistent with admissibility on the probed points, not a proof";

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Admissibility {
    Consistent,
    Refuted,
}

impl Admissibility {
    fn from_pass(pass: bool) -> Self {
        if pass {
            Admissibility::Consistent
        } else {
            Admissibility::Refuted
        }
    }
}

/// Tally of one inequality over a set of probe points.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct GridCheck {
    pub points: u64,
    pub violations: u64,
    /// Worst value of the checked quantity (see the owning report for its meaning).
    pub worst: f64,
    pub first_witness: Option<Vec<f64>>,
}

impl GridCheck {
    fn new(worst: f64) -> Self {
        GridCheck {
            points: 0,
            violations: 0,
            worst,
            first_witness: None,
        }
    }

    fn record(&mut self, ok: bool, witness: &[f64]) {
        self.points += 1;
        if !ok {
            self.violations += 1;
            if self.first_witness.is_none() {
                self.first_witness = Some(witness.to_vec());
            }
        }
    }

    pub fn pass(&self) -> bool {
        self.violations == 0
    }
}

/// How the terms of a probe sequence approach the limit `L`, for n ≥ 1.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, serde::Deserialize)]
#[serde(tag = "rule", rename_all = "snake_case")]
pub enum SequenceRule {
    /// L
    Constant,
    /// L + c/n
    Above { c: f64 },
    /// L − c/n
    Below { c: f64 },
    /// L + c/n²
    AboveSquare { c: f64 },
    /// L − c/n²
    BelowSquare { c: f64 },
    /// L + (−1)ⁿ c/n
    Alternating { c: f64 },
}

impl SequenceRule {
    pub fn term(self, limit: f64, n: u64) -> f64 {
        let n = n as f64;
        match self {
            SequenceRule::Constant => limit,
            SequenceRule::Above { c } => limit + c / n,
            SequenceRule::Below { c } => limit - c / n,
            SequenceRule::AboveSquare { c } => limit + c / (n * n),
            SequenceRule::BelowSquare { c } => limit - c / (n * n),
            SequenceRule::Alternating { c } => {
                if (n as u64).is_multiple_of(2) {
                    limit + c / n
                } else {
                    limit - c / n
                }
            }
        }
    }

    fn coefficient(self) -> f64 {
        match self {
            SequenceRule::Constant => 0.0,
            SequenceRule::Above { c }
            | SequenceRule::Below { c }
            | SequenceRule::AboveSquare { c }
            | SequenceRule::BelowSquare { c }
            | SequenceRule::Alternating { c } => c,
        }
    }

    // Whether the n = 1 term sits below the limit by the full coefficient.
    fn dips_below(self) -> bool {
        matches!(
            self,
            SequenceRule::Below { .. } | SequenceRule::BelowSquare { .. } | SequenceRule::Alternating { .. }
        )
    }
}

/// A pair of positive sequences t_n, s_n with a common limit L > 0.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, serde::Deserialize)]
pub struct SequenceProbe {
    pub limit: f64,
    pub t_rule: SequenceRule,
    pub s_rule: SequenceRule,
}

impl SequenceProbe {
    /// Validates that every generated term is strictly positive.
    pub fn new(limit: f64, t_rule: SequenceRule, s_rule: SequenceRule) -> Result<Self> {
        if !(limit > 0.0 && limit.is_finite()) {
            return Err(Error::Usage(format!("probe limit must be positive, got {limit}")));
        }
        for rule in [t_rule, s_rule] {
            let c = rule.coefficient();
            if !(c >= 0.0 && c.is_finite()) {
                return Err(Error::Usage(format!("probe coefficient must be non-negative, got {c}")));
            }
            if rule.dips_below() && c >= limit {
                return Err(Error::Usage(format!(
                    "rule {rule:?} with limit {limit} produces non-positive terms"
                )));
            }
        }
        Ok(SequenceProbe {
            limit,
            t_rule,
            s_rule,
        })
    }

    pub fn terms(&self, n: u64) -> (f64, f64) {
        (self.t_rule.term(self.limit, n), self.s_rule.term(self.limit, n))
    }

    /// Constant, 1/n and 1/n² approaches from either side, and alternation,
    /// with coefficient L/2.
    pub fn standard_family(limit: f64) -> Result<Vec<SequenceProbe>> {
        use SequenceRule::*;
        let c = limit / 2.0;
        [
            (Constant, Constant),
            (Above { c }, Above { c }),
            (Below { c }, Below { c }),
            (Above { c }, Below { c }),
            (Below { c }, Above { c }),
            (AboveSquare { c }, Constant),
            (Constant, BelowSquare { c }),
            (Alternating { c }, Alternating { c }),
            (Alternating { c }, Constant),
        ]
        .into_iter()
        .map(|(t, s)| SequenceProbe::new(limit, t, s))
        .collect()
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ProbeOutcome {
    pub probe: SequenceProbe,
    pub tail_start: u64,
    pub tail_end: u64,
    /// max ζ(t_n, s_n) over the tail.
    pub tail_max: f64,
    pub verdict: Admissibility,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ZetaAdmissibilityReport {
    pub name: String,
    pub zeta: String,
    /// ζ(0, 0), which must be exactly 0.
    pub zero_value: f64,
    pub zero_pass: bool,
    /// ζ(t, s) < s − t on the grid; `worst` is max of ζ(t, s) − (s − t).
    pub below_diagonal: GridCheck,
    pub sequences: Vec<ProbeOutcome>,
    pub verdict: Admissibility,
    pub caveat: &'static str,
}

/// Probe the three simulation-function conditions.
///
/// (i) exactly; (ii) on every grid pair (t, s); (iii) for each probe, the
/// maximum of ζ(t_n, s_n) over n ∈ [horizon/2, horizon] must be negative.
pub fn zeta_admissibility_probe(
    zf: &SimulationFunction,
    grid: &[f64],
    probes: &[SequenceProbe],
    horizon: u64,
) -> Result<ZetaAdmissibilityReport> {
    if grid.is_empty() {
        return Err(Error::Usage("admissibility grid is empty".into()));
    }
    if let Some(g) = grid.iter().find(|g| !(**g > 0.0 && g.is_finite())) {
        return Err(Error::Usage(format!("grid values must be positive, got {g}")));
    }
    if horizon < 8 {
        return Err(Error::Usage(format!("horizon must be at least 8, got {horizon}")));
    }

    let zero_value = zf.value(0.0, 0.0)?;
    let zero_pass = zero_value == 0.0;

    let mut below = GridCheck::new(f64::NEG_INFINITY);
    for &t in grid {
        for &s in grid {
            let z = zf.value(t, s)?;
            let bound = s - t;
            below.worst = below.worst.max(z - bound);
            below.record(z < bound, &[t, s]);
        }
    }

    let tail_start = horizon / 2;
    let mut sequences = Vec::with_capacity(probes.len());
    for probe in probes {
        let mut tail_max = f64::NEG_INFINITY;
        for n in tail_start..=horizon {
            let (t, s) = probe.terms(n);
            tail_max = tail_max.max(zf.value(t, s)?);
        }
        sequences.push(ProbeOutcome {
            probe: *probe,
            tail_start,
            tail_end: horizon,
            tail_max,
            verdict: Admissibility::from_pass(tail_max < 0.0),
        });
    }

    let pass = zero_pass
        && below.pass()
        && sequences.iter().all(|o| o.verdict == Admissibility::Consistent);
    Ok(ZetaAdmissibilityReport {
        name: zf.name().to_owned(),
        zeta: zf.expr().to_string(),
        zero_value,
        zero_pass,
        below_diagonal: below,
        sequences,
        verdict: Admissibility::from_pass(pass),
        caveat: CAVEAT,
    })
}

/// Spot probe of the regularity hypotheses on α and β. Reported, never part
/// of the verdict: continuity and lower semicontinuity are limit statements.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RegularityProbe {
    pub steps: Vec<f64>,
    /// max over the grid of |α(t + h) − α(t)|, per step h.
    pub alpha_oscillation: Vec<f64>,
    /// max over the grid of β(t) − min(β(t ± h)), per step h.
    pub beta_lsc_defect: Vec<f64>,
    pub alpha_looks_continuous: bool,
    pub beta_looks_lsc: bool,
    pub caveat: &'static str,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct WeaklyTypeReport {
    pub strictness: Strictness,
    /// ψ(t) − α(t) + β(t) > 0; `worst` is the smallest gap.
    pub gap: GridCheck,
    /// ψ(tᵢ) ≤ ψ(tᵢ₊₁) on consecutive grid points; `worst` is the largest drop.
    pub monotone: GridCheck,
    /// ψ(0), α(0), β(0); only checked under `Strict`.
    pub zero_values: Option<[f64; 3]>,
    pub zero_pass: Option<bool>,
    /// ψ(t) > 0 on the grid; only under `Strict`. `worst` is the smallest ψ.
    pub psi_positive: Option<GridCheck>,
    pub regularity: RegularityProbe,
    pub verdict: Admissibility,
    pub caveat: &'static str,
}

const REGULARITY_STEPS: [f64; 4] = [1e-2, 1e-4, 1e-6, 1e-8];

/// Check the weakly-type hypotheses on a sorted positive grid.
pub fn wt_admissibility_check(triple: &WeaklyTypeTriple, grid: &[f64]) -> Result<WeaklyTypeReport> {
    if grid.is_empty() {
        return Err(Error::Usage("admissibility grid is empty".into()));
    }
    if grid.iter().any(|g| !(*g > 0.0 && g.is_finite())) || grid.windows(2).any(|w| w[0] > w[1]) {
        return Err(Error::Usage("grid must be positive and sorted ascending".into()));
    }
    let ok = |r: Result<f64>| r.ok();

    let mut gap = GridCheck::new(f64::INFINITY);
    let mut monotone = GridCheck::new(f64::NEG_INFINITY);
    let psi_values: Vec<Option<f64>> = grid.iter().map(|&t| ok(triple.psi(t))).collect();
    for (&t, psi) in grid.iter().zip(&psi_values) {
        let g = match (psi, ok(triple.alpha(t)), ok(triple.beta(t))) {
            (Some(p), Some(a), Some(b)) => p - a + b,
            _ => f64::NAN,
        };
        gap.worst = gap.worst.min(g);
        gap.record(g > 0.0, &[t]);
    }
    for (w, v) in grid.windows(2).zip(psi_values.windows(2)) {
        let drop = match (v[0], v[1]) {
            (Some(a), Some(b)) => a - b,
            _ => f64::NAN,
        };
        monotone.worst = monotone.worst.max(drop);
        monotone.record(drop <= 0.0, w);
    }

    let (zero_values, zero_pass, psi_positive) = match triple.strictness {
        Strictness::Relaxed => (None, None, None),
        Strictness::Strict => {
            let zeros = [
                ok(triple.psi(0.0)).unwrap_or(f64::NAN),
                ok(triple.alpha(0.0)).unwrap_or(f64::NAN),
                ok(triple.beta(0.0)).unwrap_or(f64::NAN),
            ];
            let mut pos = GridCheck::new(f64::INFINITY);
            for (&t, psi) in grid.iter().zip(&psi_values) {
                let v = psi.unwrap_or(f64::NAN);
                pos.worst = pos.worst.min(v);
                pos.record(v > 0.0, &[t]);
            }
            (Some(zeros), Some(zeros.iter().all(|z| *z == 0.0)), Some(pos))
        }
    };

    let regularity = regularity_probe(triple, grid);
    let pass = gap.pass()
        && monotone.pass()
        && zero_pass.unwrap_or(true)
        && psi_positive.as_ref().is_none_or(GridCheck::pass);
    Ok(WeaklyTypeReport {
        strictness: triple.strictness,
        gap,
        monotone,
        zero_values,
        zero_pass,
        psi_positive,
        regularity,
        verdict: Admissibility::from_pass(pass),
        caveat: CAVEAT,
    })
}

fn regularity_probe(triple: &WeaklyTypeTriple, grid: &[f64]) -> RegularityProbe {
    let val = |f: &dyn Fn(f64) -> Result<f64>, t: f64| f(t).unwrap_or(f64::NAN);
    let alpha = |t| triple.alpha(t);
    let beta = |t| triple.beta(t);
    let mut alpha_oscillation = Vec::with_capacity(REGULARITY_STEPS.len());
    let mut beta_lsc_defect = Vec::with_capacity(REGULARITY_STEPS.len());
    let mut scale = 1.0_f64;
    for &h in &REGULARITY_STEPS {
        let mut osc = 0.0_f64;
        let mut defect = f64::NEG_INFINITY;
        for &t in grid {
            let a = val(&alpha, t);
            scale = scale.max(a.abs());
            osc = osc.max((val(&alpha, t + h) - a).abs());
            let b = val(&beta, t);
            let mut nearby = val(&beta, t + h);
            if t - h >= 0.0 {
                nearby = nearby.min(val(&beta, t - h));
            }
            defect = defect.max(b - nearby);
        }
        alpha_oscillation.push(osc);
        beta_lsc_defect.push(defect);
    }
    let tol = 1e-6 * scale;
    RegularityProbe {
        steps: REGULARITY_STEPS.to_vec(),
        alpha_looks_continuous: alpha_oscillation.last().is_some_and(|o| *o <= tol),
        beta_looks_lsc: beta_lsc_defect.last().is_some_and(|d| *d <= tol),
        alpha_oscillation,
        beta_lsc_defect,
        caveat: "declared hypothesis; spot-checked at shrinking steps, not machine-verifiable",
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn log_grid() -> Vec<f64> {
        (0..25).map(|i| 10f64.powf(-3.0 + 0.25 * i as f64)).collect()
    }

    #[test]
    fn half_zeta_passes_with_closed_form_tail() {
        let zf = SimulationFunction::parse("half", "0.5*s - t").unwrap();
        let probe = SequenceProbe::new(
            1.0,
            SequenceRule::Above { c: 1.0 },
            SequenceRule::Above { c: 1.0 },
        )
        .unwrap();
        let r = zeta_admissibility_probe(&zf, &log_grid(), &[probe], 128).unwrap();
        assert_eq!(r.verdict, Admissibility::Consistent);
        assert!(r.zero_pass);
        let o = &r.sequences[0];
        assert_eq!((o.tail_start, o.tail_end), (64, 128));
        // ζ(t_n, s_n) = −0.5(1 + 1/n), largest at n = 128
        assert_eq!(o.tail_max, -0.5 * (1.0 + 1.0 / 128.0));
    }

    #[test]
    fn diagonal_zeta_is_refuted_by_condition_three() {
        let zf = SimulationFunction::parse("boundary", "s - t").unwrap();
        let probe = SequenceProbe::new(
            1.0,
            SequenceRule::Above { c: 1.0 },
            SequenceRule::Above { c: 1.0 },
        )
        .unwrap();
        let r = zeta_admissibility_probe(&zf, &log_grid(), &[probe], 128).unwrap();
        assert_eq!(r.sequences[0].tail_max, 0.0);
        assert_eq!(r.sequences[0].verdict, Admissibility::Refuted);
        assert_eq!(r.verdict, Admissibility::Refuted);
        // condition (ii) fails too: ζ = s − t is not strictly below
        assert_eq!(r.below_diagonal.violations, r.below_diagonal.points);
    }

    #[test]
    fn zeta_nonzero_at_origin() {
        let zf = SimulationFunction::parse("shifted", "0.5*s - t - 1").unwrap();
        let r = zeta_admissibility_probe(&zf, &[1.0], &[], 8).unwrap();
        assert!(!r.zero_pass);
        assert_eq!(r.zero_value, -1.0);
        assert_eq!(r.verdict, Admissibility::Refuted);
    }

    #[test]
    fn probe_preconditions() {
        let zf = SimulationFunction::parse("half", "0.5*s - t").unwrap();
        assert!(zeta_admissibility_probe(&zf, &[], &[], 128).is_err());
        assert!(zeta_admissibility_probe(&zf, &[1.0], &[], 7).is_err());
        assert!(SequenceProbe::new(1.0, SequenceRule::Below { c: 1.0 }, SequenceRule::Constant).is_err());
        assert!(SequenceProbe::new(0.0, SequenceRule::Constant, SequenceRule::Constant).is_err());
    }

    #[test]
    fn standard_family_terms_are_positive_and_converge() {
        for limit in [0.01, 1.0, 50.0] {
            for probe in SequenceProbe::standard_family(limit).unwrap() {
                for n in 1..2000 {
                    let (t, s) = probe.terms(n);
                    assert!(t > 0.0 && s > 0.0);
                }
                let (t, s) = probe.terms(1_000_000);
                assert!((t - limit).abs() <= limit * 1e-6 && (s - limit).abs() <= limit * 1e-6);
            }
        }
    }

    #[test]
    fn weakly_type_gap_examples() {
        let grid = log_grid();
        let w = WeaklyTypeTriple::parse("t", "t/2", "0", Strictness::Strict).unwrap();
        let r = wt_admissibility_check(&w, &grid).unwrap();
        assert_eq!(r.verdict, Admissibility::Consistent);
        assert_eq!(r.gap.worst, grid[0] / 2.0);
        assert!(r.regularity.alpha_looks_continuous && r.regularity.beta_looks_lsc);

        let w = WeaklyTypeTriple::parse("t", "t", "0", Strictness::Relaxed).unwrap();
        let r = wt_admissibility_check(&w, &grid).unwrap();
        assert_eq!(r.gap.violations, grid.len() as u64);
        assert_eq!(r.verdict, Admissibility::Refuted);
    }

    #[test]
    fn strict_requires_zero_at_origin() {
        let grid = log_grid();
        let w = WeaklyTypeTriple::parse("t + 1", "t + 1", "t/2", Strictness::Strict).unwrap();
        let r = wt_admissibility_check(&w, &grid).unwrap();
        assert_eq!(r.zero_values.unwrap()[0], 1.0);
        assert_eq!(r.zero_pass, Some(false));
        assert_eq!(r.verdict, Admissibility::Refuted);
        // the same triple is fine under the relaxed hypotheses
        let w = WeaklyTypeTriple { strictness: Strictness::Relaxed, ..w };
        assert_eq!(wt_admissibility_check(&w, &grid).unwrap().verdict, Admissibility::Consistent);
    }

    #[test]
    fn decreasing_psi_is_flagged() {
        let w = WeaklyTypeTriple::parse("1/(1+t)", "0", "1", Strictness::Relaxed).unwrap();
        let r = wt_admissibility_check(&w, &[0.5, 1.0, 2.0]).unwrap();
        assert_eq!(r.monotone.violations, 2);
        assert_eq!(r.monotone.first_witness.as_deref(), Some(&[0.5, 1.0][..]));
    }

    #[test]
    fn discontinuous_alpha_is_noticed_by_regularity_probe() {
        // jump of height 1 at t = 1 via a steep logistic
        let w = WeaklyTypeTriple::parse("t", "1/(1 + exp(-1e11*(t - 1)))", "0", Strictness::Relaxed).unwrap();
        let r = wt_admissibility_check(&w, &[1.0 - 1e-9, 1.0, 2.0]).unwrap();
        assert!(!r.regularity.alpha_looks_continuous);
    }
}
