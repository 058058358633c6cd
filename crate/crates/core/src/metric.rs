//! Boxed subsets of ℝⁿ with one of four metrics, and self-maps on them.
//!
//! Every space carries a compact sampling box. For bounded domains this is
//! the domain itself; unbounded domains must declare one, and every
//! sampling-based claim is scoped to that box.

use std::fmt;
use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::expr::Expr;

/// A point of ℝⁿ with finite coordinates.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(transparent)]
pub struct Point(Vec<f64>);

impl Point {
    /// Build a point, rejecting non-finite coordinates.
    pub fn new(coords: Vec<f64>) -> Result<Point> {
        if coords.iter().any(|c| !c.is_finite()) {
            return Err(Error::Domain {
                point: Point(coords),
                reason: "non-finite coordinate".into(),
            });
        }
        Ok(Point(coords))
    }

    // Caller guarantees finiteness.
    pub(crate) fn from_vec_unchecked(coords: Vec<f64>) -> Point {
        Point(coords)
    }

    pub fn coords(&self) -> &[f64] {
        &self.0
    }

    pub fn dim(&self) -> usize {
        self.0.len()
    }

    pub fn into_inner(self) -> Vec<f64> {
        self.0
    }
}

impl From<f64> for Point {
    fn from(x: f64) -> Point {
        Point(vec![x])
    }
}

impl fmt::Display for Point {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str("(")?;
        for (i, c) in self.0.iter().enumerate() {
            if i > 0 {
                f.write_str(", ")?;
            }
            write!(f, "{c}")?;
        }
        f.write_str(")")
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum MetricKind {
    Euclidean,
    Chebyshev,
    Manhattan,
    /// d(p, q) = 0 if p = q, else 1.
    Discrete,
}

impl MetricKind {
    /// Distance between two equal-length coordinate slices.
    pub fn eval(self, p: &[f64], q: &[f64]) -> f64 {
        let diffs = p.iter().zip(q).map(|(a, b)| (a - b).abs());
        match self {
            MetricKind::Euclidean => diffs.map(|d| d * d).sum::<f64>().sqrt(),
            MetricKind::Chebyshev => diffs.fold(0.0, f64::max),
            MetricKind::Manhattan => diffs.sum(),
            MetricKind::Discrete => {
                if p == q {
                    0.0
                } else {
                    1.0
                }
            }
        }
    }
}

/// A closed coordinate interval; either end may be infinite.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Interval {
    pub lower: f64,
    pub upper: f64,
}

impl Interval {
    pub fn new(lower: f64, upper: f64) -> Interval {
        Interval { lower, upper }
    }

    pub fn unbounded() -> Interval {
        Interval::new(f64::NEG_INFINITY, f64::INFINITY)
    }

    pub fn is_bounded(&self) -> bool {
        self.lower.is_finite() && self.upper.is_finite()
    }

    pub fn contains(&self, x: f64) -> bool {
        self.lower <= x && x <= self.upper
    }

    pub fn width(&self) -> f64 {
        self.upper - self.lower
    }
}

/// A box-constrained subset of ℝⁿ with a metric.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct MetricSpace {
    name: String,
    domain: Vec<Interval>,
    sampling_box: Vec<Interval>,
    metric: MetricKind,
}

impl MetricSpace {
    /// A space whose domain is its own sampling box. All bounds must be finite.
    pub fn boxed(name: impl Into<String>, bounds: Vec<Interval>, metric: MetricKind) -> Result<Self> {
        Self::new(name, bounds.clone(), Some(bounds), metric)
    }

    /// One-dimensional `[lower, upper]` with the Euclidean metric.
    pub fn interval(lower: f64, upper: f64) -> Result<Self> {
        Self::boxed(
            format!("[{lower}, {upper}]"),
            vec![Interval::new(lower, upper)],
            MetricKind::Euclidean,
        )
    }

    /// General constructor. `sampling_box` may be omitted only when every
    /// domain coordinate is bounded; it must lie inside the domain.
    pub fn new(
        name: impl Into<String>,
        domain: Vec<Interval>,
        sampling_box: Option<Vec<Interval>>,
        metric: MetricKind,
    ) -> Result<Self> {
        if domain.is_empty() {
            return Err(Error::Usage("space dimension must be positive".into()));
        }
        for (i, iv) in domain.iter().enumerate() {
            if iv.lower.is_nan() || iv.upper.is_nan() || iv.lower >= iv.upper {
                return Err(Error::Usage(format!(
                    "coordinate {i}: lower bound {} must be below upper bound {}",
                    iv.lower, iv.upper
                )));
            }
        }
        let sampling_box = match sampling_box {
            Some(b) => b,
            None if domain.iter().all(Interval::is_bounded) => domain.clone(),
            None => {
                return Err(Error::Usage(
                    "unbounded domain requires an explicit sampling box".into(),
                ))
            }
        };
        if sampling_box.len() != domain.len() {
            return Err(Error::Usage(format!(
                "sampling box has {} coordinates, domain has {}",
                sampling_box.len(),
                domain.len()
            )));
        }
        for (i, (b, d)) in sampling_box.iter().zip(&domain).enumerate() {
            if !b.is_bounded() || b.lower >= b.upper {
                return Err(Error::Usage(format!(
                    "coordinate {i}: sampling box must be finite with lower < upper"
                )));
            }
            if b.lower < d.lower || b.upper > d.upper {
                return Err(Error::Usage(format!(
                    "coordinate {i}: sampling box [{}, {}] leaves the domain",
                    b.lower, b.upper
                )));
            }
        }
        Ok(MetricSpace {
            name: name.into(),
            domain,
            sampling_box,
            metric,
        })
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn dimension(&self) -> usize {
        self.domain.len()
    }

    pub fn domain(&self) -> &[Interval] {
        &self.domain
    }

    pub fn sampling_box(&self) -> &[Interval] {
        &self.sampling_box
    }

    pub fn metric(&self) -> MetricKind {
        self.metric
    }

    pub fn contains(&self, p: &Point) -> bool {
        p.dim() == self.dimension()
            && p.coords().iter().zip(&self.domain).all(|(x, iv)| iv.contains(*x))
    }

    pub fn in_sampling_box(&self, p: &Point) -> bool {
        p.dim() == self.dimension()
            && p
                .coords()
                .iter()
                .zip(&self.sampling_box)
                .all(|(x, iv)| iv.contains(*x))
    }

    /// Largest distance attained between two points of the sampling box.
    pub fn sampled_diameter(&self) -> f64 {
        let widths = self.sampling_box.iter().map(Interval::width);
        match self.metric {
            MetricKind::Euclidean => widths.map(|w| w * w).sum::<f64>().sqrt(),
            MetricKind::Chebyshev => widths.fold(0.0, f64::max),
            MetricKind::Manhattan => widths.sum(),
            MetricKind::Discrete => 1.0,
        }
    }

    /// Fails on dimension mismatch, non-finite coordinates, or points
    /// outside the domain.
    pub fn check_point(&self, p: &Point) -> Result<()> {
        if p.dim() != self.dimension() {
            return Err(Error::Usage(format!(
                "point {p} has dimension {}, space `{}` has {}",
                p.dim(),
                self.name,
                self.dimension()
            )));
        }
        if p.coords().iter().any(|c| !c.is_finite()) {
            return Err(Error::Domain {
                point: p.clone(),
                reason: "non-finite coordinate".into(),
            });
        }
        if !self.contains(p) {
            return Err(Error::Domain {
                point: p.clone(),
                reason: format!("outside the domain of `{}`", self.name),
            });
        }
        Ok(())
    }

    /// d(p, q) under the space's metric.
    pub fn distance(&self, p: &Point, q: &Point) -> Result<f64> {
        for x in [p, q] {
            if x.dim() != self.dimension() {
                return Err(Error::Usage(format!(
                    "point {x} has dimension {}, expected {}",
                    x.dim(),
                    self.dimension()
                )));
            }
            if x.coords().iter().any(|c| !c.is_finite()) {
                return Err(Error::Domain {
                    point: x.clone(),
                    reason: "non-finite coordinate".into(),
                });
            }
        }
        Ok(self.metric.eval(p.coords(), q.coords()))
    }
}

/// A map from a space into itself, one expression per output coordinate.
///
/// The map is only checked pointwise: [`SelfMap::apply`] fails whenever an
/// image leaves the domain. Results are never clamped.
#[derive(Debug, Clone)]
pub struct SelfMap {
    name: String,
    coords: Arc<[Expr]>,
    space: Arc<MetricSpace>,
}

impl SelfMap {
    /// Variable names for a space of dimension `dim`: `x1 … xd`.
    pub fn signature(dim: usize) -> Vec<String> {
        (1..=dim).map(|i| format!("x{i}")).collect()
    }

    pub fn from_exprs(name: impl Into<String>, space: Arc<MetricSpace>, coords: Vec<Expr>) -> Result<Self> {
        let sig = Self::signature(space.dimension());
        if coords.len() != space.dimension() {
            return Err(Error::Usage(format!(
                "map has {} coordinates, space has dimension {}",
                coords.len(),
                space.dimension()
            )));
        }
        if let Some(bad) = coords.iter().find(|e| e.signature() != sig.as_slice()) {
            return Err(Error::Usage(format!(
                "coordinate expression `{bad}` must use the signature ({})",
                sig.join(", ")
            )));
        }
        Ok(SelfMap {
            name: name.into(),
            coords: coords.into(),
            space,
        })
    }

    /// Parse one source string per output coordinate.
    pub fn parse<S: AsRef<str>>(name: impl Into<String>, space: Arc<MetricSpace>, sources: &[S]) -> Result<Self> {
        let sig = Self::signature(space.dimension());
        let coords = sources
            .iter()
            .map(|s| Expr::parse(s.as_ref(), &sig))
            .collect::<std::result::Result<Vec<_>, _>>()?;
        Self::from_exprs(name, space, coords)
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn space(&self) -> &MetricSpace {
        &self.space
    }

    pub fn space_arc(&self) -> &Arc<MetricSpace> {
        &self.space
    }

    pub fn exprs(&self) -> &[Expr] {
        &self.coords
    }

    /// T(p). Fails if `p` is not in the domain or T(p) is not.
    pub fn apply(&self, p: &Point) -> Result<Point> {
        self.space.check_point(p)?;
        let mut out = Vec::with_capacity(self.coords.len());
        for e in self.coords.iter() {
            match e.eval(p.coords()) {
                Ok(v) => out.push(v),
                Err(_) => {
                    // carry what could be computed; NaN marks the failed coordinate
                    out.push(f64::NAN);
                }
            }
        }
        let image = Point::from_vec_unchecked(out);
        if image.coords().iter().any(|c| !c.is_finite()) || !self.space.contains(&image) {
            return Err(Error::SelfMapViolation {
                input: p.clone(),
                output: image,
            });
        }
        Ok(image)
    }
}

/// Anything that measures distance between points; lets the axiom checker
/// run against metrics that are not builtin.
pub trait Metric {
    fn dist(&self, p: &Point, q: &Point) -> f64;

    /// Extra ulps allowed on the triangle inequality's right-hand side.
    fn triangle_slack_ulps(&self) -> u32 {
        4
    }
}

impl Metric for MetricSpace {
    fn dist(&self, p: &Point, q: &Point) -> f64 {
        self.metric.eval(p.coords(), q.coords())
    }
}

impl<F: Fn(&Point, &Point) -> f64> Metric for F {
    fn dist(&self, p: &Point, q: &Point) -> f64 {
        self(p, q)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Axiom {
    NonNegativity,
    Identity,
    Symmetry,
    Triangle,
}

impl Axiom {
    pub const ALL: [Axiom; 4] = [
        Axiom::NonNegativity,
        Axiom::Identity,
        Axiom::Symmetry,
        Axiom::Triangle,
    ];
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct AxiomViolation {
    pub axiom: Axiom,
    pub violations: u64,
    /// First offending triple (p, q, r) in sample order.
    pub witness: Option<[Point; 3]>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct AxiomReport {
    pub triples_checked: u64,
    pub axioms: Vec<AxiomViolation>,
}

impl AxiomReport {
    pub fn total_violations(&self) -> u64 {
        self.axioms.iter().map(|a| a.violations).sum()
    }

    pub fn violations(&self, axiom: Axiom) -> &AxiomViolation {
        self.axioms
            .iter()
            .find(|a| a.axiom == axiom)
            .expect("report covers every axiom")
    }
}

fn ulp(x: f64) -> f64 {
    let x = x.abs();
    if x == 0.0 {
        f64::from_bits(1)
    } else {
        f64::from_bits(x.to_bits() + 1) - x
    }
}

/// Evaluate the four metric axioms on each triple.
///
/// Identity is d(p,p) = 0 together with d(p,q) = 0 ⇒ p = q; the triangle
/// inequality is checked for every rotation of the triple.
pub fn check_axioms_on<M, I>(metric: &M, triples: I) -> AxiomReport
where
    M: Metric + ?Sized,
    I: IntoIterator<Item = [Point; 3]>,
{
    let mut counts = [0u64; 4];
    let mut witnesses: [Option<[Point; 3]>; 4] = Default::default();
    let mut n = 0u64;
    let slack = f64::from(metric.triangle_slack_ulps());
    for triple in triples {
        n += 1;
        let [p, q, r] = &triple;
        let pairs = [(p, q), (q, r), (p, r)];
        let mut failed = [false; 4];
        for &(a, b) in &pairs {
            let ab = metric.dist(a, b);
            let ba = metric.dist(b, a);
            if !(ab >= 0.0) {
                failed[0] = true;
            }
            if metric.dist(a, a) != 0.0 || (ab == 0.0 && a != b) || (ab != 0.0 && a == b) {
                failed[1] = true;
            }
            if ab != ba {
                failed[2] = true;
            }
        }
        let (pq, qr, pr) = (metric.dist(p, q), metric.dist(q, r), metric.dist(p, r));
        for (lhs, a, b) in [(pr, pq, qr), (pq, pr, qr), (qr, pq, pr)] {
            let rhs = a + b;
            if !(lhs <= rhs + slack * ulp(rhs)) {
                failed[3] = true;
            }
        }
        for (i, f) in failed.iter().enumerate() {
            if *f {
                counts[i] += 1;
                if witnesses[i].is_none() {
                    witnesses[i] = Some(triple.clone());
                }
            }
        }
    }
    AxiomReport {
        triples_checked: n,
        axioms: Axiom::ALL
            .iter()
            .zip(counts)
            .zip(witnesses)
            .map(|((&axiom, violations), witness)| AxiomViolation {
                axiom,
                violations,
                witness,
            })
            .collect(),
    }
}
