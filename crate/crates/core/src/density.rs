//! Prefix counts, upper/lower asymptotic density, and d-limit verdicts.
//!
//! Sets of positive integers come in three shapes. Finite and eventually
//! periodic sets have an exact density; sampled sets only know their members
//! up to a horizon and refuse to answer beyond it. Estimates at a horizon take
//! the max/min of `|I ∩ {1..n}| / n` over checkpoints `n` that lie past the
//! stabilization threshold `horizon / 16`.

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::rational::Rational;

/// Fallback tolerance for "density zero" at a finite horizon.
pub fn default_zero_density_tolerance() -> Rational {
    Rational::new(1, 100)
}

/// Checkpoints at or beyond `horizon / STABILIZATION_DIVISOR` enter the
/// horizon estimates.
pub const STABILIZATION_DIVISOR: u64 = 16;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum DensityError {
    #[error("query at n = {requested} exceeds sampled horizon {horizon}")]
    HorizonExceeded { requested: u64, horizon: u64 },
    #[error("checkpoint list is empty")]
    EmptyCheckpoints,
    #[error("checkpoints must be positive")]
    ZeroCheckpoint,
    #[error("invalid index set: {0}")]
    InvalidIndexSet(String),
    #[error("invalid sequence: {0}")]
    InvalidSequence(String),
    #[error("sequence is evaluable only up to n = {available}, requested {requested}")]
    NotEvaluable { requested: u64, available: u64 },
    #[error("radius must be positive")]
    NonPositiveRadius,
}

/// A subset of the positive integers.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(try_from = "IndexSetRepr", into = "IndexSetRepr")]
pub enum IndexSet {
    /// Strictly increasing, all entries >= 1.
    Finite(Vec<u64>),
    /// `n >= threshold` is a member iff `n % period` is in `residues`;
    /// below the threshold exactly the listed exceptions are members.
    EventuallyPeriodic {
        threshold: u64,
        period: u64,
        residues: Vec<u64>,
        exceptions: Vec<u64>,
    },
    /// Membership known exactly on `1..=horizon`, undefined beyond.
    Sampled { horizon: u64, members: Vec<u64> },
}

#[derive(Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase", deny_unknown_fields)]
enum IndexSetRepr {
    Finite {
        elements: Vec<u64>,
    },
    Periodic {
        #[serde(default)]
        threshold: u64,
        period: u64,
        residues: Vec<u64>,
        #[serde(default)]
        exceptions: Vec<u64>,
    },
    Sampled {
        horizon: u64,
        members: Vec<u64>,
    },
}

impl TryFrom<IndexSetRepr> for IndexSet {
    type Error = DensityError;

    fn try_from(repr: IndexSetRepr) -> Result<Self, Self::Error> {
        match repr {
            IndexSetRepr::Finite { elements } => IndexSet::finite(elements),
            IndexSetRepr::Periodic {
                threshold,
                period,
                residues,
                exceptions,
            } => IndexSet::eventually_periodic(threshold, period, residues, exceptions),
            IndexSetRepr::Sampled { horizon, members } => IndexSet::sampled(horizon, members),
        }
    }
}

impl From<IndexSet> for IndexSetRepr {
    fn from(set: IndexSet) -> Self {
        match set {
            IndexSet::Finite(elements) => IndexSetRepr::Finite { elements },
            IndexSet::EventuallyPeriodic {
                threshold,
                period,
                residues,
                exceptions,
            } => IndexSetRepr::Periodic {
                threshold,
                period,
                residues,
                exceptions,
            },
            IndexSet::Sampled { horizon, members } => IndexSetRepr::Sampled { horizon, members },
        }
    }
}

fn check_increasing(list: &[u64], what: &str) -> Result<(), DensityError> {
    if list.first() == Some(&0) {
        return Err(DensityError::InvalidIndexSet(format!("{what} must be >= 1")));
    }
    if list.windows(2).any(|w| w[0] >= w[1]) {
        return Err(DensityError::InvalidIndexSet(format!(
            "{what} must be strictly increasing"
        )));
    }
    Ok(())
}

/// Number of `m` in `0..=x` with `m ≡ residue (mod period)`.
fn residue_count_upto(x: u64, residue: u64, period: u64) -> u64 {
    if x < residue {
        0
    } else {
        (x - residue) / period + 1
    }
}

impl IndexSet {
    pub fn finite(elements: Vec<u64>) -> Result<Self, DensityError> {
        check_increasing(&elements, "finite elements")?;
        Ok(IndexSet::Finite(elements))
    }

    pub fn eventually_periodic(
        threshold: u64,
        period: u64,
        mut residues: Vec<u64>,
        exceptions: Vec<u64>,
    ) -> Result<Self, DensityError> {
        if period == 0 {
            return Err(DensityError::InvalidIndexSet("period must be >= 1".into()));
        }
        if residues.iter().any(|&r| r >= period) {
            return Err(DensityError::InvalidIndexSet(format!(
                "residues must lie in 0..{period}"
            )));
        }
        residues.sort_unstable();
        residues.dedup();
        check_increasing(&exceptions, "exceptions")?;
        if exceptions.last().is_some_and(|&e| e >= threshold) {
            return Err(DensityError::InvalidIndexSet(
                "exceptions must lie below the threshold".into(),
            ));
        }
        Ok(IndexSet::EventuallyPeriodic {
            threshold,
            period,
            residues,
            exceptions,
        })
    }

    /// `{n : n % period == residue}` for all `n >= 1`.
    pub fn arithmetic(period: u64, residues: Vec<u64>) -> Result<Self, DensityError> {
        IndexSet::eventually_periodic(0, period, residues, Vec::new())
    }

    /// All positive integers.
    pub fn naturals() -> Self {
        IndexSet::EventuallyPeriodic {
            threshold: 0,
            period: 1,
            residues: vec![0],
            exceptions: Vec::new(),
        }
    }

    pub fn sampled(horizon: u64, members: Vec<u64>) -> Result<Self, DensityError> {
        if horizon == 0 {
            return Err(DensityError::InvalidIndexSet("horizon must be >= 1".into()));
        }
        check_increasing(&members, "sampled members")?;
        if members.last().is_some_and(|&m| m > horizon) {
            return Err(DensityError::InvalidIndexSet(
                "sampled members must not exceed the horizon".into(),
            ));
        }
        Ok(IndexSet::Sampled { horizon, members })
    }

    /// Samples `pred` on `1..=horizon`.
    pub fn sample_from(horizon: u64, pred: impl Fn(u64) -> bool) -> Result<Self, DensityError> {
        IndexSet::sampled(horizon, (1..=horizon).filter(|&n| pred(n)).collect())
    }

    /// Horizon for sampled sets; `None` when membership is defined everywhere.
    pub fn horizon(&self) -> Option<u64> {
        match self {
            IndexSet::Sampled { horizon, .. } => Some(*horizon),
            _ => None,
        }
    }

    fn check_horizon(&self, n: u64) -> Result<(), DensityError> {
        match self.horizon() {
            Some(h) if n > h => Err(DensityError::HorizonExceeded {
                requested: n,
                horizon: h,
            }),
            _ => Ok(()),
        }
    }

    pub fn contains(&self, n: u64) -> Result<bool, DensityError> {
        self.check_horizon(n)?;
        Ok(match self {
            IndexSet::Finite(els) => els.binary_search(&n).is_ok(),
            IndexSet::Sampled { members, .. } => members.binary_search(&n).is_ok(),
            IndexSet::EventuallyPeriodic {
                threshold,
                period,
                residues,
                exceptions,
            } => {
                if n >= *threshold {
                    residues.binary_search(&(n % period)).is_ok()
                } else {
                    exceptions.binary_search(&n).is_ok()
                }
            }
        })
    }

    /// `|I ∩ {1..n}|`.
    pub fn prefix_count(&self, n: u64) -> Result<u64, DensityError> {
        self.check_horizon(n)?;
        Ok(match self {
            IndexSet::Finite(els) => els.partition_point(|&e| e <= n) as u64,
            IndexSet::Sampled { members, .. } => members.partition_point(|&e| e <= n) as u64,
            IndexSet::EventuallyPeriodic {
                threshold,
                period,
                residues,
                exceptions,
            } => {
                let below = exceptions.partition_point(|&e| e <= n) as u64;
                let lo = (*threshold).max(1);
                if n < lo {
                    below
                } else {
                    below
                        + residues
                            .iter()
                            .map(|&r| {
                                residue_count_upto(n, r, *period)
                                    - residue_count_upto(lo - 1, r, *period)
                            })
                            .sum::<u64>()
                }
            }
        })
    }

    /// Members of `I ∩ {1..n}`, ascending.
    pub fn members_upto(&self, n: u64) -> Result<Vec<u64>, DensityError> {
        self.check_horizon(n)?;
        Ok(match self {
            IndexSet::Finite(els) => els.iter().copied().take_while(|&e| e <= n).collect(),
            IndexSet::Sampled { members, .. } => {
                members.iter().copied().take_while(|&e| e <= n).collect()
            }
            IndexSet::EventuallyPeriodic { .. } => (1..=n)
                .filter(|&k| self.contains(k).unwrap_or(false))
                .collect(),
        })
    }

    /// Exact upper (and lower) density where the representation determines it.
    pub fn exact_density(&self) -> Option<Rational> {
        match self {
            IndexSet::Finite(_) => Some(Rational::zero()),
            IndexSet::EventuallyPeriodic {
                period, residues, ..
            } => Some(Rational::ratio(residues.len() as u64, *period)),
            IndexSet::Sampled { .. } => None,
        }
    }

    /// Complement in the positive integers (within the horizon for sampled sets).
    pub fn complement(&self) -> IndexSet {
        match self {
            IndexSet::Finite(els) => {
                let threshold = els.last().map_or(0, |&m| m + 1);
                IndexSet::EventuallyPeriodic {
                    threshold,
                    period: 1,
                    residues: vec![0],
                    exceptions: (1..threshold)
                        .filter(|k| els.binary_search(k).is_err())
                        .collect(),
                }
            }
            IndexSet::EventuallyPeriodic {
                threshold,
                period,
                residues,
                exceptions,
            } => IndexSet::EventuallyPeriodic {
                threshold: *threshold,
                period: *period,
                residues: (0..*period)
                    .filter(|r| residues.binary_search(r).is_err())
                    .collect(),
                exceptions: (1..*threshold)
                    .filter(|k| exceptions.binary_search(k).is_err())
                    .collect(),
            },
            IndexSet::Sampled { horizon, members } => IndexSet::Sampled {
                horizon: *horizon,
                members: (1..=*horizon)
                    .filter(|k| members.binary_search(k).is_err())
                    .collect(),
            },
        }
    }
}

/// Powers of two up to `horizon`, followed by `horizon` itself.
pub fn default_checkpoints(horizon: u64) -> Vec<u64> {
    let mut out: Vec<u64> = std::iter::successors(Some(1u64), |&p| p.checked_mul(2))
        .take_while(|&p| p <= horizon)
        .collect();
    if out.last() != Some(&horizon) && horizon > 0 {
        out.push(horizon);
    }
    out
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct DensityEstimate {
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub exact: Option<Rational>,
    pub lower_at_horizon: Rational,
    pub upper_at_horizon: Rational,
    pub horizon: u64,
    pub checkpoints: Vec<u64>,
}

impl DensityEstimate {
    /// Exact density when known, else the upper horizon estimate.
    pub fn decisive_value(&self) -> &Rational {
        self.exact.as_ref().unwrap_or(&self.upper_at_horizon)
    }
}

/// Density estimate of `set` at the given prefix lengths. The horizon is the
/// largest checkpoint.
pub fn upper_density(set: &IndexSet, checkpoints: &[u64]) -> Result<DensityEstimate, DensityError> {
    let horizon = *checkpoints.iter().max().ok_or(DensityError::EmptyCheckpoints)?;
    if checkpoints.contains(&0) {
        return Err(DensityError::ZeroCheckpoint);
    }
    set.check_horizon(horizon)?;

    let mut upper: Option<Rational> = None;
    let mut lower: Option<Rational> = None;
    for &n in checkpoints
        .iter()
        .filter(|&&n| n * STABILIZATION_DIVISOR >= horizon)
    {
        let ratio = Rational::ratio(set.prefix_count(n)?, n);
        upper = Some(match upper {
            Some(u) => u.max(ratio.clone()),
            None => ratio.clone(),
        });
        lower = Some(match lower {
            Some(l) => l.min(ratio),
            None => ratio,
        });
    }
    // The horizon itself always passes the filter.
    Ok(DensityEstimate {
        exact: set.exact_density(),
        lower_at_horizon: lower.expect("horizon checkpoint"),
        upper_at_horizon: upper.expect("horizon checkpoint"),
        horizon,
        checkpoints: checkpoints.to_vec(),
    })
}

/// How a sequence behaves past its listed prefix.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase", deny_unknown_fields)]
pub enum TailRule {
    /// `a_n = values[n % values.len()]` for every `n` past the prefix.
    Periodic { values: Vec<Rational> },
    /// `|a_n - center| <= radius` for every `n` past the prefix; values unknown.
    Envelope { center: Rational, radius: Rational },
}

/// Bounded rational sequence `a_1, a_2, ...`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(try_from = "RealSequenceRepr")]
pub struct RealSequence {
    prefix: Vec<Rational>,
    #[serde(skip_serializing_if = "Option::is_none")]
    tail: Option<TailRule>,
    bound: Rational,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct RealSequenceRepr {
    prefix: Vec<Rational>,
    #[serde(default)]
    tail: Option<TailRule>,
    bound: Rational,
}

impl TryFrom<RealSequenceRepr> for RealSequence {
    type Error = DensityError;
    fn try_from(r: RealSequenceRepr) -> Result<Self, Self::Error> {
        RealSequence::new(r.prefix, r.tail, r.bound)
    }
}

impl RealSequence {
    pub fn new(
        prefix: Vec<Rational>,
        tail: Option<TailRule>,
        bound: Rational,
    ) -> Result<Self, DensityError> {
        let bad = |msg: String| Err(DensityError::InvalidSequence(msg));
        if bound.is_negative() {
            return bad("bound must be nonnegative".into());
        }
        if let Some(i) = prefix.iter().position(|v| v.abs() > bound) {
            return bad(format!("|a_{}| exceeds bound {}", i + 1, bound));
        }
        match &tail {
            Some(TailRule::Periodic { values }) => {
                if values.is_empty() {
                    return bad("periodic tail needs at least one value".into());
                }
                if values.iter().any(|v| v.abs() > bound) {
                    return bad("periodic tail value exceeds bound".into());
                }
            }
            Some(TailRule::Envelope { center, radius }) => {
                if radius.is_negative() {
                    return bad("envelope radius must be nonnegative".into());
                }
                if center.abs() + radius > bound {
                    return bad("envelope exceeds bound".into());
                }
            }
            None => {}
        }
        Ok(RealSequence {
            prefix,
            tail,
            bound,
        })
    }

    /// Sequence given by its first `n` values only.
    pub fn from_fn(n: u64, bound: Rational, f: impl Fn(u64) -> Rational) -> Result<Self, DensityError> {
        RealSequence::new((1..=n).map(f).collect(), None, bound)
    }

    pub fn prefix(&self) -> &[Rational] {
        &self.prefix
    }

    pub fn tail(&self) -> Option<&TailRule> {
        self.tail.as_ref()
    }

    pub fn bound(&self) -> &Rational {
        &self.bound
    }

    /// Value of `a_n`, when determined.
    pub fn value(&self, n: u64) -> Option<Rational> {
        if n == 0 {
            return None;
        }
        if let Some(v) = self.prefix.get((n - 1) as usize) {
            return Some(v.clone());
        }
        match &self.tail {
            Some(TailRule::Periodic { values }) => {
                Some(values[(n % values.len() as u64) as usize].clone())
            }
            _ => None,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct DLimVerdict {
    pub holds: bool,
    pub limit: Rational,
    pub radius: Rational,
    pub tolerance: Rational,
    pub exception_set: IndexSet,
    pub density: DensityEstimate,
}

/// Truncation-relative check of `d-lim a_n = limit`: the exception set
/// `{n : |a_n - limit| > radius}` must have density at most `tolerance`
/// (exact density when the tail determines it, else the upper estimate at
/// horizon `n`).
///
/// With a periodic tail, or an envelope tail that decides every tail term, the
/// returned exception set describes all of the positive integers; otherwise it
/// is sampled on `1..=n`.
pub fn d_lim_verdict(
    seq: &RealSequence,
    limit: &Rational,
    radius: &Rational,
    n: u64,
    tolerance: &Rational,
) -> Result<DLimVerdict, DensityError> {
    if !radius.is_positive() {
        return Err(DensityError::NonPositiveRadius);
    }
    if n == 0 {
        return Err(DensityError::ZeroCheckpoint);
    }
    let is_exception = |v: &Rational| (v - limit).abs() > *radius;
    let len = seq.prefix.len() as u64;
    let prefix_exceptions = |upto: u64| -> Vec<u64> {
        seq.prefix
            .iter()
            .take(upto as usize)
            .enumerate()
            .filter(|(_, v)| is_exception(v))
            .map(|(i, _)| i as u64 + 1)
            .collect()
    };
    let not_evaluable = Err(DensityError::NotEvaluable {
        requested: n,
        available: len,
    });

    let exception_set = match &seq.tail {
        Some(TailRule::Periodic { values }) => IndexSet::eventually_periodic(
            len + 1,
            values.len() as u64,
            (0..values.len() as u64)
                .filter(|&i| is_exception(&values[i as usize]))
                .collect(),
            prefix_exceptions(len),
        )?,
        Some(TailRule::Envelope { center, radius: spread }) => {
            let offset = (center - limit).abs();
            if &offset + spread <= *radius {
                IndexSet::finite(prefix_exceptions(len))?
            } else if &offset - spread > *radius {
                IndexSet::eventually_periodic(len + 1, 1, vec![0], prefix_exceptions(len))?
            } else if n <= len {
                IndexSet::sampled(n, prefix_exceptions(n))?
            } else {
                return not_evaluable;
            }
        }
        None if n <= len => IndexSet::sampled(n, prefix_exceptions(n))?,
        None => return not_evaluable,
    };

    let density = upper_density(&exception_set, &default_checkpoints(n))?;
    Ok(DLimVerdict {
        holds: density.decisive_value() <= tolerance,
        limit: limit.clone(),
        radius: radius.clone(),
        tolerance: tolerance.clone(),
        exception_set,
        density,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rational::q;
    use proptest::prelude::*;


    #[test]
    fn prefix_count_examples() {
        let threes = IndexSet::arithmetic(3, vec![0]).unwrap();
        assert_eq!(threes.prefix_count(10).unwrap(), 3);
        assert_eq!(IndexSet::finite(vec![]).unwrap().prefix_count(100).unwrap(), 0);
        assert_eq!(IndexSet::naturals().prefix_count(7).unwrap(), 7);
    }

    #[test]
    fn sampled_refuses_beyond_horizon() {
        let s = IndexSet::sampled(10, vec![2, 4]).unwrap();
        assert_eq!(s.prefix_count(10).unwrap(), 2);
        assert_eq!(
            s.prefix_count(11),
            Err(DensityError::HorizonExceeded {
                requested: 11,
                horizon: 10
            })
        );
        assert!(s.contains(11).is_err());
        assert!(upper_density(&s, &[4, 16]).is_err());
    }

    #[test]
    fn rejects_malformed_sets() {
        assert!(IndexSet::finite(vec![0, 1]).is_err());
        assert!(IndexSet::finite(vec![3, 2]).is_err());
        assert!(IndexSet::finite(vec![2, 2]).is_err());
        assert!(IndexSet::eventually_periodic(0, 0, vec![], vec![]).is_err());
        assert!(IndexSet::eventually_periodic(0, 3, vec![3], vec![]).is_err());
        assert!(IndexSet::eventually_periodic(5, 3, vec![0], vec![5]).is_err());
        assert!(IndexSet::sampled(0, vec![]).is_err());
        assert!(IndexSet::sampled(5, vec![6]).is_err());
    }

    #[test]
    fn json_schema() {
        let s: IndexSet = serde_json::from_str(
            r#"{"kind":"periodic","threshold":4,"period":2,"residues":[0],"exceptions":[1,3]}"#,
        )
        .unwrap();
        assert_eq!(s.members_upto(8).unwrap(), vec![1, 3, 4, 6, 8]);
        let round: IndexSet = serde_json::from_str(&serde_json::to_string(&s).unwrap()).unwrap();
        assert_eq!(round, s);
        assert!(serde_json::from_str::<IndexSet>(r#"{"kind":"finite","elements":[2,1]}"#).is_err());
        assert!(serde_json::from_str::<IndexSet>(r#"{"kind":"bogus"}"#).is_err());
    }

    #[test]
    fn evens_have_exact_half() {
        let evens = IndexSet::arithmetic(2, vec![0]).unwrap();
        let est = upper_density(&evens, &default_checkpoints(1000)).unwrap();
        assert_eq!(est.exact, Some(q(1, 2)));
    }

    #[test]
    fn squares_sampled_density_is_small() {
        let h = 1_000_000;
        let squares = IndexSet::sample_from(h, |n| n.isqrt().pow(2) == n).unwrap();
        let cps: Vec<u64> = (0..=6).map(|k| 10u64.pow(k)).collect();
        for &c in &cps {
            assert_eq!(squares.prefix_count(c).unwrap(), c.isqrt());
        }
        let est = upper_density(&squares, &cps).unwrap();
        assert_eq!(est.exact, None);
        // Checkpoints 10^5 and 10^6 are past the stabilization threshold.
        assert_eq!(est.upper_at_horizon, q(316, 100_000));
        assert!(est.upper_at_horizon <= q(1, 100));
    }

    #[test]
    fn block_set_oscillates_between_thirds() {
        let h = 4u64.pow(8);
        let in_block = |n: u64| (0..8).any(|k| 4u64.pow(k) <= n && n < 2 * 4u64.pow(k));
        let blocks = IndexSet::sample_from(h, in_block).unwrap();
        // Closed form at n = 2·4^m: (4^{m+1} - 1) / 3.
        for m in 0..8 {
            let n = 2 * 4u64.pow(m);
            assert_eq!(blocks.prefix_count(n).unwrap(), (4u64.pow(m + 1) - 1) / 3);
        }
        let est = upper_density(&blocks, &default_checkpoints(h)).unwrap();
        assert!((est.upper_at_horizon.clone() - q(2, 3)).abs() <= q(1, 100));
        assert!((est.lower_at_horizon.clone() - q(1, 3)).abs() <= q(1, 100));
    }

    #[test]
    fn complement_density() {
        let s = IndexSet::eventually_periodic(7, 5, vec![1, 4], vec![2, 3]).unwrap();
        let c = s.complement();
        assert_eq!(c.exact_density(), Some(q(3, 5)));
        for n in 1..60 {
            assert_ne!(s.contains(n).unwrap(), c.contains(n).unwrap());
        }
        let f = IndexSet::finite(vec![2, 5]).unwrap().complement();
        assert_eq!(f.members_upto(7).unwrap(), vec![1, 3, 4, 6, 7]);
    }

    #[test]
    fn dlim_reciprocal_with_envelope_is_finite() {
        let seq = RealSequence::new(
            (1..=1000).map(|n| q(1, n)).collect(),
            Some(TailRule::Envelope {
                center: Rational::zero(),
                radius: q(1, 1000),
            }),
            Rational::one(),
        )
        .unwrap();
        let v = d_lim_verdict(&seq, &Rational::zero(), &q(1, 10), 1000, &q(1, 100)).unwrap();
        assert!(v.holds);
        assert_eq!(v.exception_set, IndexSet::Finite((1..=9).collect()));
        assert_eq!(v.density.exact, Some(Rational::zero()));
    }

    #[test]
    fn dlim_reciprocal_without_tail_uses_horizon() {
        let seq = RealSequence::from_fn(1000, Rational::one(), |n| q(1, n as i64)).unwrap();
        let v = d_lim_verdict(&seq, &Rational::zero(), &q(1, 10), 1000, &q(1, 100)).unwrap();
        assert_eq!(v.exception_set.members_upto(1000).unwrap(), (1..=9).collect::<Vec<_>>());
        assert_eq!(v.density.upper_at_horizon, q(9, 64));
        assert!(!v.holds);
        assert!(matches!(
            d_lim_verdict(&seq, &Rational::zero(), &q(1, 10), 1001, &q(1, 100)),
            Err(DensityError::NotEvaluable { .. })
        ));
    }

    #[test]
    fn dlim_evens_rejects_zero() {
        let seq = RealSequence::new(
            vec![],
            Some(TailRule::Periodic {
                values: vec![Rational::one(), Rational::zero()],
            }),
            Rational::one(),
        )
        .unwrap();
        let v = d_lim_verdict(&seq, &Rational::zero(), &q(1, 2), 1000, &q(1, 100)).unwrap();
        assert!(!v.holds);
        assert_eq!(v.density.exact, Some(q(1, 2)));
        assert_eq!(v.exception_set.members_upto(10).unwrap(), vec![2, 4, 6, 8, 10]);
    }

    #[test]
    fn dlim_rejects_bad_radius_and_bounds() {
        let seq = RealSequence::from_fn(3, Rational::one(), |_| Rational::zero()).unwrap();
        assert_eq!(
            d_lim_verdict(&seq, &Rational::zero(), &Rational::zero(), 3, &q(1, 100)),
            Err(DensityError::NonPositiveRadius)
        );
        assert!(RealSequence::new(vec![q(3, 2)], None, Rational::one()).is_err());
        assert!(RealSequence::new(
            vec![],
            Some(TailRule::Periodic { values: vec![] }),
            Rational::one()
        )
        .is_err());
    }

    fn periodic_strategy() -> impl Strategy<Value = IndexSet> {
        (1u64..=12, 0u64..=20).prop_flat_map(|(p, t)| {
            (
                Just(p),
                Just(t),
                proptest::collection::vec(0..p, 0..=p as usize),
                proptest::collection::vec(1..=t.max(1), 0..=t as usize),
            )
                .prop_map(|(p, t, r, e)| {
                    let r: std::collections::BTreeSet<u64> = r.into_iter().collect();
                    let e: std::collections::BTreeSet<u64> = e.into_iter().filter(|&x| x < t).collect();
                    IndexSet::eventually_periodic(
                        t,
                        p,
                        r.into_iter().collect(),
                        e.into_iter().collect(),
                    )
                    .unwrap()
                })
        })
    }

    proptest! {
        #[test]
        fn prefix_count_matches_enumeration(s in periodic_strategy(), n in 0u64..200) {
            let brute = (1..=n).filter(|&k| s.contains(k).unwrap()).count() as u64;
            prop_assert_eq!(s.prefix_count(n).unwrap(), brute);
        }

        #[test]
        fn prefix_count_monotone_and_subadditive(
            a in periodic_strategy(),
            b in periodic_strategy(),
            n in 1u64..200,
        ) {
            prop_assert!(a.prefix_count(n - 1).unwrap() <= a.prefix_count(n).unwrap());
            let ma = a.members_upto(n).unwrap();
            let mb = b.members_upto(n).unwrap();
            let mut union: Vec<u64> = ma.iter().chain(mb.iter()).copied().collect();
            union.sort_unstable();
            union.dedup();
            let u = IndexSet::finite(union).unwrap();
            let (cu, ca, cb) = (u.prefix_count(n).unwrap(), a.prefix_count(n).unwrap(), b.prefix_count(n).unwrap());
            prop_assert!(cu <= ca + cb);
            let disjoint = ma.iter().all(|x| mb.binary_search(x).is_err());
            prop_assert_eq!(cu == ca + cb, disjoint);
        }

        #[test]
        fn periodic_error_bound(s in periodic_strategy(), n in 1u64..500) {
            if let IndexSet::EventuallyPeriodic { threshold, period, .. } = &s {
                if n >= *threshold {
                    let d = s.exact_density().unwrap();
                    let gap = (Rational::ratio(s.prefix_count(n).unwrap(), n) - d).abs();
                    prop_assert!(gap <= Rational::ratio(threshold + period, n));
                }
            }
        }

        #[test]
        fn complement_exact_density(s in periodic_strategy()) {
            let c = s.complement();
            prop_assert_eq!(c.exact_density().unwrap(), Rational::one() - s.exact_density().unwrap());
        }

        #[test]
        fn dlim_limits_are_unique(
            values in proptest::collection::vec(-4i64..=4, 1..8),
            l1 in -4i64..=4,
            l2 in -4i64..=4,
        ) {
            // r < |L - L'| / 2 means no term can be within r of both limits.
            prop_assume!(l1 != l2);
            let r = Rational::new((l1 - l2).abs(), 2) - q(1, 4);
            let seq = RealSequence::new(
                vec![],
                Some(TailRule::Periodic { values: values.iter().map(|&v| q(v, 1)).collect() }),
                q(4, 1),
            ).unwrap();
            let zero = Rational::zero();
            let a = d_lim_verdict(&seq, &q(l1, 1), &r, 64, &zero).unwrap();
            let b = d_lim_verdict(&seq, &q(l2, 1), &r, 64, &zero).unwrap();
            prop_assert!(!(a.holds && b.holds));
        }
    }
}
