//! Finite-dimensional normed spaces, operators between them, the operator
//! modulus of convexity and separated basic sequences.

mod modulus;
mod operator;
mod witness;

pub use modulus::{
    modulus_of_convexity, AnalyticL2Delta, ConstantDelta, DeltaProvider, ModulusEstimate,
    NumericalDelta,
};
pub use operator::{NormedOperator, OperatorNormEstimate};
pub use witness::{
    basis_constant, convex_separation, BasisConstantEstimate, ConvexSeparation,
    SeparatedBasisWitness,
};

use std::fmt;
use std::str::FromStr;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{argument, Error, Result};

/// Restart and step counts for the multi-start local searches.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct SearchBudget {
    pub restarts: usize,
    pub steps: usize,
}

impl Default for SearchBudget {
    fn default() -> Self {
        Self {
            restarts: 64,
            steps: 500,
        }
    }
}

/// Independent generator for restart `stream` of a seeded search.
pub fn restart_rng(seed: u64, stream: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(stream);
    rng
}

/// One summand of a max-of-blocks norm.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct NormBlock {
    pub dim: usize,
    #[serde(with = "exponent")]
    pub p: f64,
}

/// The norm carried by a [`NormedSpace`]. Exponents lie in `[1, ∞]`, with
/// `f64::INFINITY` standing for the max norm.
#[derive(Debug, Clone, PartialEq)]
pub enum NormKind {
    Lp { p: f64 },
    /// `(Σ w_i |x_i|^p)^{1/p}`, or `max w_i |x_i|` for `p = ∞`.
    WeightedLp { p: f64, weights: Vec<f64> },
    /// Maximum over consecutive coordinate blocks of their ℓ_p norms.
    Blocks { blocks: Vec<NormBlock> },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "SpaceRepr", into = "SpaceRepr")]
pub struct NormedSpace {
    dim: usize,
    kind: NormKind,
}

#[derive(Serialize, Deserialize)]
struct SpaceRepr {
    kind: String,
    dim: usize,
    #[serde(default, skip_serializing_if = "Option::is_none", with = "opt_exponent")]
    p: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    weights: Option<Vec<f64>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    blocks: Option<Vec<NormBlock>>,
}

impl TryFrom<SpaceRepr> for NormedSpace {
    type Error = Error;

    fn try_from(r: SpaceRepr) -> Result<Self> {
        let missing = |field: &str| argument(format!("space kind {:?} needs {field:?}", r.kind));
        let kind = match r.kind.as_str() {
            "l1" => NormKind::Lp { p: 1.0 },
            "l2" => NormKind::Lp { p: 2.0 },
            "linf" => NormKind::Lp { p: f64::INFINITY },
            "lp" => NormKind::Lp {
                p: r.p.ok_or_else(|| missing("p"))?,
            },
            "weighted" => NormKind::WeightedLp {
                p: r.p.ok_or_else(|| missing("p"))?,
                weights: r.weights.clone().ok_or_else(|| missing("weights"))?,
            },
            "blocks" => NormKind::Blocks {
                blocks: r.blocks.clone().ok_or_else(|| missing("blocks"))?,
            },
            other => return Err(argument(format!("unknown space kind {other:?}"))),
        };
        NormedSpace::new(r.dim, kind)
    }
}

impl From<NormedSpace> for SpaceRepr {
    fn from(s: NormedSpace) -> Self {
        let mut repr = SpaceRepr {
            kind: String::new(),
            dim: s.dim,
            p: None,
            weights: None,
            blocks: None,
        };
        match s.kind {
            NormKind::Lp { p } if p == 1.0 => repr.kind = "l1".into(),
            NormKind::Lp { p } if p == 2.0 => repr.kind = "l2".into(),
            NormKind::Lp { p } if p.is_infinite() => repr.kind = "linf".into(),
            NormKind::Lp { p } => {
                repr.kind = "lp".into();
                repr.p = Some(p);
            }
            NormKind::WeightedLp { p, weights } => {
                repr.kind = "weighted".into();
                repr.p = Some(p);
                repr.weights = Some(weights);
            }
            NormKind::Blocks { blocks } => {
                repr.kind = "blocks".into();
                repr.blocks = Some(blocks);
            }
        }
        repr
    }
}

fn check_exponent(p: f64) -> Result<()> {
    if p.is_nan() || p < 1.0 {
        Err(argument(format!("norm exponent {p} is not in [1, ∞]")))
    } else {
        Ok(())
    }
}

impl NormedSpace {
    pub fn new(dim: usize, kind: NormKind) -> Result<Self> {
        if dim == 0 {
            return Err(argument("normed spaces need dimension ≥ 1"));
        }
        match &kind {
            NormKind::Lp { p } => check_exponent(*p)?,
            NormKind::WeightedLp { p, weights } => {
                check_exponent(*p)?;
                if weights.len() != dim {
                    return Err(argument(format!(
                        "{} weights for dimension {dim}",
                        weights.len()
                    )));
                }
                if weights.iter().any(|&w| !(w > 0.0 && w.is_finite())) {
                    return Err(argument("weights must be positive and finite"));
                }
            }
            NormKind::Blocks { blocks } => {
                if blocks.is_empty() || blocks.iter().any(|b| b.dim == 0) {
                    return Err(argument("blocks must be nonempty"));
                }
                for b in blocks {
                    check_exponent(b.p)?;
                }
                let total: usize = blocks.iter().map(|b| b.dim).sum();
                if total != dim {
                    return Err(argument(format!(
                        "block dimensions sum to {total}, not {dim}"
                    )));
                }
            }
        }
        Ok(Self { dim, kind })
    }

    pub fn lp(dim: usize, p: f64) -> Result<Self> {
        Self::new(dim, NormKind::Lp { p })
    }

    pub fn l1(dim: usize) -> Self {
        Self::lp(dim, 1.0).expect("positive dimension")
    }

    pub fn l2(dim: usize) -> Self {
        Self::lp(dim, 2.0).expect("positive dimension")
    }

    pub fn linf(dim: usize) -> Self {
        Self::lp(dim, f64::INFINITY).expect("positive dimension")
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn kind(&self) -> &NormKind {
        &self.kind
    }

    /// The exponent when this is an unweighted ℓ_p space.
    pub fn lp_exponent(&self) -> Option<f64> {
        match self.kind {
            NormKind::Lp { p } => Some(p),
            _ => None,
        }
    }

    pub fn with_dim(&self, dim: usize) -> Result<Self> {
        match &self.kind {
            NormKind::Lp { p } => Self::lp(dim, *p),
            _ => Err(argument("only ℓ_p spaces can be resized")),
        }
    }

    fn check_dim(&self, v: &[f64]) -> Result<()> {
        if v.len() != self.dim {
            Err(argument(format!(
                "vector of length {} in a space of dimension {}",
                v.len(),
                self.dim
            )))
        } else {
            Ok(())
        }
    }

    pub fn norm(&self, v: &[f64]) -> Result<f64> {
        self.check_dim(v)?;
        Ok(self.eval(v))
    }

    /// Norm without the dimension check.
    pub fn eval(&self, v: &[f64]) -> f64 {
        match &self.kind {
            NormKind::Lp { p } => lp_norm(v.iter().copied(), *p),
            NormKind::WeightedLp { p, weights } => {
                if p.is_infinite() {
                    v.iter()
                        .zip(weights)
                        .map(|(x, w)| w * x.abs())
                        .fold(0.0, f64::max)
                } else {
                    let scaled = v.iter().zip(weights).map(|(x, w)| x * w.powf(1.0 / p));
                    lp_norm(scaled, *p)
                }
            }
            NormKind::Blocks { blocks } => {
                let mut start = 0;
                let mut best: f64 = 0.0;
                for b in blocks {
                    best = best.max(lp_norm(v[start..start + b.dim].iter().copied(), b.p));
                    start += b.dim;
                }
                best
            }
        }
    }

    pub fn distance(&self, a: &[f64], b: &[f64]) -> f64 {
        let diff: Vec<f64> = a.iter().zip(b).map(|(x, y)| x - y).collect();
        self.eval(&diff)
    }

    /// Norm of the dual functional `x ↦ Σ y_i x_i`.
    pub fn dual_norm(&self, y: &[f64]) -> f64 {
        match &self.kind {
            NormKind::Lp { p } => lp_norm(y.iter().copied(), conjugate(*p)),
            NormKind::WeightedLp { p, weights } => {
                if p.is_infinite() {
                    y.iter().zip(weights).map(|(x, w)| x.abs() / w).sum()
                } else {
                    let scaled = y.iter().zip(weights).map(|(x, w)| x * w.powf(-1.0 / p));
                    lp_norm(scaled, conjugate(*p))
                }
            }
            NormKind::Blocks { blocks } => {
                let mut start = 0;
                let mut total = 0.0;
                for b in blocks {
                    total += lp_norm(y[start..start + b.dim].iter().copied(), conjugate(b.p));
                    start += b.dim;
                }
                total
            }
        }
    }

    /// A norming functional `g` at `v`: `⟨g, v⟩ = ‖v‖` and `‖g‖_* ≤ 1`.
    /// Zero at `v = 0`.
    pub fn subgradient(&self, v: &[f64]) -> Vec<f64> {
        let norm = self.eval(v);
        let mut g = vec![0.0; v.len()];
        if norm == 0.0 {
            return g;
        }
        match &self.kind {
            NormKind::Lp { p } => lp_subgradient(v, *p, norm, &mut g),
            NormKind::WeightedLp { p, weights } => {
                if p.is_infinite() {
                    let (i, _) = v
                        .iter()
                        .zip(weights)
                        .map(|(x, w)| w * x.abs())
                        .enumerate()
                        .fold((0, f64::MIN), |acc, (i, x)| if x > acc.1 { (i, x) } else { acc });
                    g[i] = weights[i] * v[i].signum();
                } else {
                    for ((gi, &x), &w) in g.iter_mut().zip(v).zip(weights) {
                        *gi = w * x.signum() * (x.abs() / norm).powf(p - 1.0);
                    }
                }
            }
            NormKind::Blocks { blocks } => {
                let mut start = 0;
                let mut best = (0usize, 0usize, f64::MIN);
                for (k, b) in blocks.iter().enumerate() {
                    let n = lp_norm(v[start..start + b.dim].iter().copied(), b.p);
                    if n > best.2 {
                        best = (k, start, n);
                    }
                    start += b.dim;
                }
                let (k, start, n) = best;
                let b = &blocks[k];
                lp_subgradient(&v[start..start + b.dim], b.p, n, &mut g[start..start + b.dim]);
            }
        }
        g
    }
}

fn lp_subgradient(v: &[f64], p: f64, norm: f64, g: &mut [f64]) {
    if norm == 0.0 {
        return;
    }
    if p.is_infinite() {
        let i = v
            .iter()
            .enumerate()
            .fold((0, f64::MIN), |acc, (i, x)| if x.abs() > acc.1 { (i, x.abs()) } else { acc })
            .0;
        g[i] = v[i].signum();
    } else if p == 1.0 {
        for (gi, &x) in g.iter_mut().zip(v) {
            *gi = if x == 0.0 { 0.0 } else { x.signum() };
        }
    } else {
        for (gi, &x) in g.iter_mut().zip(v) {
            *gi = x.signum() * (x.abs() / norm).powf(p - 1.0);
        }
    }
}

/// The conjugate exponent `q` with `1/p + 1/q = 1`.
pub fn conjugate(p: f64) -> f64 {
    if p == 1.0 {
        f64::INFINITY
    } else if p.is_infinite() {
        1.0
    } else {
        p / (p - 1.0)
    }
}

pub fn lp_norm(v: impl Iterator<Item = f64> + Clone, p: f64) -> f64 {
    if p == 1.0 {
        v.map(f64::abs).sum()
    } else if p == 2.0 {
        v.map(|x| x * x).sum::<f64>().sqrt()
    } else if p.is_infinite() {
        v.map(f64::abs).fold(0.0, f64::max)
    } else {
        let scale = v.clone().map(f64::abs).fold(0.0, f64::max);
        if scale == 0.0 {
            return 0.0;
        }
        scale * v.map(|x| (x.abs() / scale).powf(p)).sum::<f64>().powf(1.0 / p)
    }
}

/// Parses `l1`, `l2`, `linf` or `lp:<p>` into an ℓ_p exponent.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LpExponent(pub f64);

impl FromStr for LpExponent {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let p = match s {
            "l1" => 1.0,
            "l2" => 2.0,
            "linf" => f64::INFINITY,
            other => {
                let tail = other
                    .strip_prefix("lp:")
                    .ok_or_else(|| argument(format!("unknown space {other:?} (use l1, l2, linf or lp:<p>)")))?;
                tail.parse::<f64>()
                    .map_err(|_| argument(format!("bad exponent in {other:?}")))?
            }
        };
        check_exponent(p)?;
        Ok(LpExponent(p))
    }
}

impl fmt::Display for NormedSpace {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match &self.kind {
            NormKind::Lp { p } if p.is_infinite() => write!(f, "ℓ_∞^{}", self.dim),
            NormKind::Lp { p } => write!(f, "ℓ_{p}^{}", self.dim),
            NormKind::WeightedLp { p, .. } => write!(f, "weighted ℓ_{p}^{}", self.dim),
            NormKind::Blocks { blocks } => write!(f, "max of {} blocks, dim {}", blocks.len(), self.dim),
        }
    }
}

mod exponent {
    use serde::{Deserialize, Deserializer, Serializer};

    #[derive(Deserialize)]
    #[serde(untagged)]
    enum Repr {
        Num(f64),
        Name(String),
    }

    pub fn serialize<S: Serializer>(p: &f64, s: S) -> Result<S::Ok, S::Error> {
        if p.is_infinite() {
            s.serialize_str("inf")
        } else {
            s.serialize_f64(*p)
        }
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<f64, D::Error> {
        match Repr::deserialize(d)? {
            Repr::Num(p) => Ok(p),
            Repr::Name(s) if s == "inf" => Ok(f64::INFINITY),
            Repr::Name(s) => Err(serde::de::Error::custom(format!("bad exponent {s:?}"))),
        }
    }
}

mod opt_exponent {
    use serde::{Deserialize, Deserializer, Serializer};

    pub fn serialize<S: Serializer>(p: &Option<f64>, s: S) -> Result<S::Ok, S::Error> {
        match p {
            Some(p) => super::exponent::serialize(p, s),
            None => s.serialize_none(),
        }
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<Option<f64>, D::Error> {
        #[derive(Deserialize)]
        struct Wrap(#[serde(with = "super::exponent")] f64);
        Ok(Option::<Wrap>::deserialize(d)?.map(|w| w.0))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn norm_examples() {
        assert_eq!(NormedSpace::l1(3).norm(&[1.0, -2.0, 3.0]).unwrap(), 6.0);
        assert_eq!(NormedSpace::l2(2).norm(&[3.0, 4.0]).unwrap(), 5.0);
        assert_eq!(NormedSpace::linf(2).norm(&[1.0, -2.0]).unwrap(), 2.0);
        assert!(NormedSpace::l2(2).norm(&[1.0]).is_err());
    }

    #[test]
    fn weighted_and_block_norms() {
        let w = NormedSpace::new(2, NormKind::WeightedLp { p: 1.0, weights: vec![2.0, 3.0] }).unwrap();
        assert_eq!(w.eval(&[1.0, -1.0]), 5.0);
        let b = NormedSpace::new(
            3,
            NormKind::Blocks {
                blocks: vec![NormBlock { dim: 2, p: 2.0 }, NormBlock { dim: 1, p: 1.0 }],
            },
        )
        .unwrap();
        assert_eq!(b.eval(&[3.0, 4.0, 2.0]), 5.0);
        assert_eq!(b.eval(&[0.0, 0.0, -7.0]), 7.0);
        assert!(NormedSpace::new(2, NormKind::WeightedLp { p: 2.0, weights: vec![1.0, 0.0] }).is_err());
    }

    #[test]
    fn json_forms() {
        let s: NormedSpace = serde_json::from_str(r#"{"kind":"l2","dim":3}"#).unwrap();
        assert_eq!(s, NormedSpace::l2(3));
        let s: NormedSpace = serde_json::from_str(r#"{"kind":"weighted","p":"inf","weights":[1,2],"dim":2}"#).unwrap();
        assert_eq!(s.eval(&[1.0, 1.0]), 2.0);
        let back = serde_json::to_string(&NormedSpace::lp(2, 3.0).unwrap()).unwrap();
        assert_eq!(back, r#"{"kind":"lp","dim":2,"p":3.0}"#);
        assert!(serde_json::from_str::<NormedSpace>(r#"{"kind":"l7","dim":3}"#).is_err());
    }

    fn spaces() -> Vec<NormedSpace> {
        vec![
            NormedSpace::l1(3),
            NormedSpace::l2(3),
            NormedSpace::linf(3),
            NormedSpace::lp(3, 3.5).unwrap(),
            NormedSpace::new(3, NormKind::WeightedLp { p: 1.5, weights: vec![0.5, 2.0, 1.0] }).unwrap(),
            NormedSpace::new(
                3,
                NormKind::Blocks {
                    blocks: vec![NormBlock { dim: 1, p: 1.0 }, NormBlock { dim: 2, p: 2.0 }],
                },
            )
            .unwrap(),
        ]
    }

    proptest! {
        #[test]
        fn norm_axioms(x in prop::collection::vec(-5.0f64..5.0, 3),
                       y in prop::collection::vec(-5.0f64..5.0, 3),
                       a in -4.0f64..4.0) {
            for s in spaces() {
                let nx = s.eval(&x);
                let ny = s.eval(&y);
                let sum: Vec<f64> = x.iter().zip(&y).map(|(a, b)| a + b).collect();
                prop_assert!(s.eval(&sum) <= nx + ny + 1e-12);
                let scaled: Vec<f64> = x.iter().map(|v| a * v).collect();
                prop_assert!((s.eval(&scaled) - a.abs() * nx).abs() <= 1e-12 * (1.0 + nx));
                prop_assert_eq!(s.eval(&[0.0; 3]), 0.0);
                // norming functional
                let g = s.subgradient(&x);
                let pairing: f64 = g.iter().zip(&x).map(|(a, b)| a * b).sum();
                prop_assert!((pairing - nx).abs() <= 1e-9 * (1.0 + nx));
                prop_assert!(s.dual_norm(&g) <= 1.0 + 1e-9 || nx == 0.0);
                // Hölder
                prop_assert!(y.iter().zip(&x).map(|(a, b)| a * b).sum::<f64>().abs() <= nx * s.dual_norm(&y) + 1e-9);
            }
        }
    }
}
