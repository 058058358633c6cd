//! The four contraction certificates and their pointwise inequalities.
//!
//! Every check reduces to a function of two numbers: the distance
//! `d = d(p, q)` and the mapped distance `dT = d(Tp, Tq)`. Each verdict
//! carries a *margin*: how far the inequality's left side exceeds its right
//! side, so a positive margin is a violation (for Z-contractions the margin
//! is `-ζ(dT, d)`). The slack `η` is compared against that margin and
//! defaults to zero.

mod admissibility;

pub use admissibility::{
    wt_admissibility_check, zeta_admissibility_probe, Admissibility, GridCheck, ProbeOutcome,
    SequenceProbe, SequenceRule, WeaklyTypeReport, ZetaAdmissibilityReport,
};

use serde::Serialize;

use crate::error::{Error, Result};
use crate::expr::{BinaryOp, EvalError, Expr, Node};
use crate::metric::{Point, SelfMap};

/// Outcome of a pointwise certificate check.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
#[serde(tag = "verdict", rename_all = "snake_case")]
pub enum Verdict {
    Holds { margin: f64 },
    /// The pair lies outside the Meir-Keeler band; the implication holds trivially.
    Vacuous,
    Violated { margin: f64 },
}

impl Verdict {
    pub fn is_violated(&self) -> bool {
        matches!(self, Verdict::Violated { .. })
    }

    pub fn margin(&self) -> Option<f64> {
        match self {
            Verdict::Holds { margin } | Verdict::Violated { margin } => Some(*margin),
            Verdict::Vacuous => None,
        }
    }

    // margin ≤ slack holds
    fn non_strict(margin: f64, slack: f64) -> Verdict {
        if margin <= slack {
            Verdict::Holds { margin }
        } else {
            Verdict::Violated { margin }
        }
    }
}

fn cert_eval(r: std::result::Result<f64, EvalError>) -> Result<f64> {
    r.map_err(Error::CertificateEval)
}

/// d(p, q) and d(Tp, Tq), after checking both points are in the domain.
pub fn pair_distances(map: &SelfMap, p: &Point, q: &Point) -> Result<(f64, f64)> {
    let tp = map.apply(p)?;
    let tq = map.apply(q)?;
    let space = map.space();
    Ok((space.distance(p, q)?, space.distance(&tp, &tq)?))
}

/// `d(Tx, Ty) ≤ λ·d(x, y)` with a fixed `λ ∈ [0, 1)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct BanachCertificate {
    lambda: f64,
}

impl BanachCertificate {
    pub fn new(lambda: f64) -> Result<Self> {
        if !(0.0..1.0).contains(&lambda) {
            return Err(Error::Usage(format!("Banach lambda must lie in [0, 1), got {lambda}")));
        }
        Ok(BanachCertificate { lambda })
    }

    pub fn lambda(&self) -> f64 {
        self.lambda
    }

    /// margin = dT − λ·d
    pub fn check_distances(&self, d: f64, dt: f64, slack: f64) -> Verdict {
        Verdict::non_strict(dt - self.lambda * d, slack)
    }
}

pub fn banach_holds(cert: &BanachCertificate, map: &SelfMap, p: &Point, q: &Point, slack: f64) -> Result<Verdict> {
    let (d, dt) = pair_distances(map, p, q)?;
    Ok(cert.check_distances(d, dt, slack))
}

/// A simulation function ζ(t, s), written in the variables `t` and `s`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SimulationFunction {
    name: String,
    zeta: Expr,
}

impl SimulationFunction {
    pub const SIGNATURE: [&'static str; 2] = ["t", "s"];

    pub fn new(name: impl Into<String>, zeta: Expr) -> Result<Self> {
        if zeta.signature() != Self::SIGNATURE {
            return Err(Error::Usage(format!(
                "simulation function `{zeta}` must be written in (t, s)"
            )));
        }
        Ok(SimulationFunction {
            name: name.into(),
            zeta,
        })
    }

    pub fn parse(name: impl Into<String>, source: &str) -> Result<Self> {
        Self::new(name, Expr::parse(source, &Self::SIGNATURE)?)
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn expr(&self) -> &Expr {
        &self.zeta
    }

    pub fn value(&self, t: f64, s: f64) -> Result<f64> {
        cert_eval(self.zeta.eval(&[t, s]))
    }

    /// margin = −ζ(dT, d), with a zero ζ giving +0
    pub fn check_distances(&self, d: f64, dt: f64, slack: f64) -> Result<Verdict> {
        Ok(Verdict::non_strict(0.0 - self.value(dt, d)?, slack))
    }
}

pub fn z_contraction_holds(zf: &SimulationFunction, map: &SelfMap, p: &Point, q: &Point, slack: f64) -> Result<Verdict> {
    let (d, dt) = pair_distances(map, p, q)?;
    zf.check_distances(d, dt, slack)
}

/// The δ of a Meir-Keeler modulus as a function of ε.
#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum DeltaFn {
    /// Expression in the variable `eps`.
    Expr(Expr),
    /// Tabulated `(ε, δ)` pairs; only tabulated ε values can be queried.
    Table(Vec<(f64, f64)>),
}

/// ε ↦ δ(ε) witnessing `ε ≤ d(x, y) < ε + δ ⇒ d(Tx, Ty) < ε`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct MeirKeelerModulus {
    delta: DeltaFn,
}

impl MeirKeelerModulus {
    pub const SIGNATURE: [&'static str; 1] = ["eps"];

    pub fn from_expr(delta: Expr) -> Result<Self> {
        if delta.signature() != Self::SIGNATURE {
            return Err(Error::Usage(format!("modulus `{delta}` must be written in eps")));
        }
        Ok(MeirKeelerModulus {
            delta: DeltaFn::Expr(delta),
        })
    }

    pub fn parse(source: &str) -> Result<Self> {
        Self::from_expr(Expr::parse(source, &Self::SIGNATURE)?)
    }

    pub fn tabulated(mut table: Vec<(f64, f64)>) -> Result<Self> {
        if table.is_empty() {
            return Err(Error::Usage("tabulated modulus needs at least one entry".into()));
        }
        for &(eps, delta) in &table {
            if !(eps > 0.0 && eps.is_finite()) {
                return Err(Error::Usage(format!("tabulated epsilon {eps} must be positive")));
            }
            if !(delta > 0.0 && delta.is_finite()) {
                return Err(Error::InvalidModulus { epsilon: eps, delta });
            }
        }
        table.sort_by(|a, b| a.0.total_cmp(&b.0));
        Ok(MeirKeelerModulus {
            delta: DeltaFn::Table(table),
        })
    }

    pub fn delta_fn(&self) -> &DeltaFn {
        &self.delta
    }

    /// δ(ε); fails unless the value is positive and finite.
    pub fn delta(&self, epsilon: f64) -> Result<f64> {
        if !(epsilon > 0.0 && epsilon.is_finite()) {
            return Err(Error::Usage(format!("epsilon must be positive, got {epsilon}")));
        }
        let delta = match &self.delta {
            DeltaFn::Expr(e) => e.eval(&[epsilon]).unwrap_or(f64::NAN),
            DeltaFn::Table(t) => t
                .iter()
                .find(|(e, _)| *e == epsilon)
                .map(|(_, d)| *d)
                .ok_or_else(|| Error::Usage(format!("epsilon {epsilon} is not tabulated")))?,
        };
        if !(delta > 0.0 && delta.is_finite()) {
            return Err(Error::InvalidModulus { epsilon, delta });
        }
        Ok(delta)
    }

    /// Vacuous outside `[ε, ε + δ(ε))`; otherwise margin = dT − ε, and the
    /// strict inequality holds iff margin < slack.
    pub fn check_distances(&self, epsilon: f64, d: f64, dt: f64, slack: f64) -> Result<Verdict> {
        let delta = self.delta(epsilon)?;
        if !(epsilon <= d && d < epsilon + delta) {
            return Ok(Verdict::Vacuous);
        }
        let margin = dt - epsilon;
        Ok(if margin < slack {
            Verdict::Holds { margin }
        } else {
            Verdict::Violated { margin }
        })
    }
}

pub fn mk_condition_holds(
    modulus: &MeirKeelerModulus,
    map: &SelfMap,
    epsilon: f64,
    p: &Point,
    q: &Point,
    slack: f64,
) -> Result<Verdict> {
    // validate the modulus before touching the map
    modulus.delta(epsilon)?;
    let (d, dt) = pair_distances(map, p, q)?;
    modulus.check_distances(epsilon, d, dt, slack)
}

/// Which hypotheses a weakly-type triple is meant to satisfy.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, serde::Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Strictness {
    /// Additionally ψ(0) = α(0) = β(0) = 0 and ψ(t) > 0 for t > 0.
    Strict,
    /// ψ non-decreasing and ψ − α + β > 0 on (0, ∞) only.
    Relaxed,
}

/// `ψ(d(Tx, Ty)) ≤ α(d(x, y)) − β(d(x, y))`, each function written in `t`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct WeaklyTypeTriple {
    pub psi: Expr,
    pub alpha: Expr,
    pub beta: Expr,
    pub strictness: Strictness,
}

impl WeaklyTypeTriple {
    pub const SIGNATURE: [&'static str; 1] = ["t"];

    pub fn new(psi: Expr, alpha: Expr, beta: Expr, strictness: Strictness) -> Result<Self> {
        for e in [&psi, &alpha, &beta] {
            if e.signature() != Self::SIGNATURE {
                return Err(Error::Usage(format!("`{e}` must be written in t")));
            }
        }
        Ok(WeaklyTypeTriple {
            psi,
            alpha,
            beta,
            strictness,
        })
    }

    pub fn parse(psi: &str, alpha: &str, beta: &str, strictness: Strictness) -> Result<Self> {
        let p = |s| Expr::parse(s, &Self::SIGNATURE);
        Self::new(p(psi)?, p(alpha)?, p(beta)?, strictness)
    }

    pub fn psi(&self, t: f64) -> Result<f64> {
        cert_eval(self.psi.eval(&[t]))
    }

    pub fn alpha(&self, t: f64) -> Result<f64> {
        cert_eval(self.alpha.eval(&[t]))
    }

    pub fn beta(&self, t: f64) -> Result<f64> {
        cert_eval(self.beta.eval(&[t]))
    }

    /// margin = ψ(dT) − (α(d) − β(d))
    pub fn check_distances(&self, d: f64, dt: f64, slack: f64) -> Result<Verdict> {
        let rhs = self.alpha(d)? - self.beta(d)?;
        Ok(Verdict::non_strict(self.psi(dt)? - rhs, slack))
    }
}

pub fn weakly_type_holds(triple: &WeaklyTypeTriple, map: &SelfMap, p: &Point, q: &Point, slack: f64) -> Result<Verdict> {
    let (d, dt) = pair_distances(map, p, q)?;
    triple.check_distances(d, dt, slack)
}

/// Any of the four certificate kinds.
#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Certificate {
    Banach(BanachCertificate),
    Zeta(SimulationFunction),
    MeirKeeler(MeirKeelerModulus),
    WeaklyType(WeaklyTypeTriple),
}

impl Certificate {
    pub fn kind(&self) -> &'static str {
        match self {
            Certificate::Banach(_) => "banach",
            Certificate::Zeta(_) => "zeta",
            Certificate::MeirKeeler(_) => "meir_keeler",
            Certificate::WeaklyType(_) => "weakly_type",
        }
    }

    /// Short human-readable description.
    pub fn label(&self) -> String {
        match self {
            Certificate::Banach(c) => format!("banach(lambda={})", c.lambda),
            Certificate::Zeta(z) => format!("zeta {}: {}", z.name, z.zeta),
            Certificate::MeirKeeler(m) => match &m.delta {
                DeltaFn::Expr(e) => format!("meir_keeler(delta={e})"),
                DeltaFn::Table(t) => format!("meir_keeler(table of {})", t.len()),
            },
            Certificate::WeaklyType(w) => format!(
                "weakly_type(psi={}, alpha={}, beta={}, {:?})",
                w.psi, w.alpha, w.beta, w.strictness
            ),
        }
    }

    /// Pointwise check from precomputed distances. `epsilon` is required
    /// for Meir-Keeler moduli and ignored otherwise.
    pub fn check_distances(&self, d: f64, dt: f64, slack: f64, epsilon: Option<f64>) -> Result<Verdict> {
        match self {
            Certificate::Banach(c) => Ok(c.check_distances(d, dt, slack)),
            Certificate::Zeta(z) => z.check_distances(d, dt, slack),
            Certificate::WeaklyType(w) => w.check_distances(d, dt, slack),
            Certificate::MeirKeeler(m) => {
                let eps = epsilon
                    .ok_or_else(|| Error::Usage("Meir-Keeler check needs an epsilon".into()))?;
                m.check_distances(eps, d, dt, slack)
            }
        }
    }
}

/// ζ(t, s) = λ·s − t, the simulation function of a Banach certificate.
pub fn banach_as_z(cert: &BanachCertificate) -> SimulationFunction {
    let node = Node::binary(
        BinaryOp::Sub,
        Node::binary(BinaryOp::Mul, Node::constant(cert.lambda), Node::var(1)),
        Node::var(0),
    );
    let expr = Expr::from_node(node, &SimulationFunction::SIGNATURE).expect("static signature");
    SimulationFunction {
        name: format!("banach_{}", cert.lambda),
        zeta: expr,
    }
}

/// Meir-Keeler modulus implied by a Banach certificate.
///
/// For λ > 0 this is δ(ε) = ε·k with k just below (1 − λ)/λ: the shortfall
/// of 16 ulps (relative to ε/λ) absorbs rounding in `ε + δ` and `λ·d`, so
/// `d < ε + δ` really does force `λ·d < ε` in floating point. For λ = 0 the
/// modulus is the constant `cap`, normally the sampled diameter.
pub fn banach_mk_modulus(cert: &BanachCertificate, cap: f64) -> Result<MeirKeelerModulus> {
    let lambda = cert.lambda;
    let node = if lambda == 0.0 {
        if !(cap > 0.0 && cap.is_finite()) {
            return Err(Error::Usage(format!("modulus cap must be positive, got {cap}")));
        }
        Node::constant(cap)
    } else {
        let mut k = (1.0 - lambda) / lambda - 16.0 * f64::EPSILON / lambda;
        if k <= 0.0 {
            k = (1.0 - lambda) / (2.0 * lambda);
        }
        Node::binary(BinaryOp::Mul, Node::var(0), Node::constant(k))
    };
    MeirKeelerModulus::from_expr(
        Expr::from_node(node, &MeirKeelerModulus::SIGNATURE).expect("static signature"),
    )
}
