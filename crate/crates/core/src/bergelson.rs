//! Common-point selection for an indexed family of large sets.
//!
//! Given sets `A_n` with `μ(A_n) >= a` for `n` in a prefix `I_0 ∧ N`, the
//! averaging function `F(x) = |{k ∈ I_0∧N : x ∈ A_k}| / |I_0∧N|` integrates
//! to the mean of `μ(A_k)`, so some point has `F(x) >= a / μ(X)`. That point
//! lies in every set of `I = {n : x ∈ A_n}`, which therefore has a nonempty
//! common intersection and at least `(a / μ(X))·|I_0∧N|` members.
//!
//! [`fip_oracle`] recomputes the best subfamily by exhaustive search over all
//! subfamilies and is kept independent of the selector on purpose: tests
//! compare the two.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::density::{DensityError, IndexSet};
use crate::measure::{FiniteMeasureSpace, MSet, MeasureError};
use crate::rational::Rational;

/// Largest `|I_0 ∧ N|` accepted by the exhaustive oracle.
pub const ORACLE_MAX_FAMILY: usize = 20;
/// Largest ground set accepted by the exhaustive oracle.
pub const ORACLE_MAX_POINTS: usize = 128;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum SelectionError {
    #[error(transparent)]
    Density(#[from] DensityError),
    #[error(transparent)]
    Measure(#[from] MeasureError),
    #[error("index {0} of I_0 has no set")]
    MissingSet(u64),
    #[error("set given for index {0}, which is not in I_0 up to the horizon")]
    UnexpectedSet(u64),
    #[error("set {index} has measure {measure}, below the declared bound {bound}")]
    BelowLowerBound {
        index: u64,
        measure: Rational,
        bound: Rational,
    },
    #[error("declared lower bound must be nonnegative")]
    NegativeLowerBound,
    #[error("prefix length {requested} exceeds the family horizon {horizon}")]
    BeyondFamilyHorizon { requested: u64, horizon: u64 },
    #[error("I_0 has no members up to the requested prefix")]
    EmptyIndexPrefix,
    #[error("no point of positive weight")]
    NoPositivePoint,
    #[error("ground set is empty")]
    EmptyGroundSet,
    #[error("prefix density {ratio} of I_0 does not exceed b = {b}")]
    PrefixDensityTooLow { ratio: Rational, b: Rational },
    #[error("b must be positive")]
    NonPositiveB,
    #[error("selection was computed at horizon {selection}, certificate requested at {eta}")]
    HorizonMismatch { selection: u64, eta: u64 },
    #[error("oracle limited to {ORACLE_MAX_FAMILY} sets over {ORACLE_MAX_POINTS} points, got {family} sets over {points}")]
    TooLargeForOracle { family: usize, points: usize },
}

/// `{A_n : n ∈ I_0 ∧ horizon}` over a finite measure space, each of measure
/// at least `lower_bound`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SetFamily {
    space: FiniteMeasureSpace,
    index_set: IndexSet,
    horizon: u64,
    sets: BTreeMap<u64, MSet>,
    lower_bound: Rational,
}

impl SetFamily {
    pub fn new(
        space: FiniteMeasureSpace,
        index_set: IndexSet,
        horizon: u64,
        sets: BTreeMap<u64, MSet>,
        lower_bound: Rational,
    ) -> Result<Self, SelectionError> {
        if lower_bound.is_negative() {
            return Err(SelectionError::NegativeLowerBound);
        }
        let indices = index_set.members_upto(horizon)?;
        for &n in &indices {
            let set = sets.get(&n).ok_or(SelectionError::MissingSet(n))?;
            if set.universe() != space.len() {
                return Err(MeasureError::SizeMismatch {
                    expected: space.len(),
                    got: set.universe(),
                }
                .into());
            }
            let measure = space.measure(set);
            if measure < lower_bound {
                return Err(SelectionError::BelowLowerBound {
                    index: n,
                    measure,
                    bound: lower_bound,
                });
            }
        }
        if let Some(&extra) = sets.keys().find(|n| indices.binary_search(n).is_err()) {
            return Err(SelectionError::UnexpectedSet(extra));
        }
        Ok(SetFamily {
            space,
            index_set,
            horizon,
            sets,
            lower_bound,
        })
    }

    /// Builds the family from point names per index.
    pub fn from_members(
        space: FiniteMeasureSpace,
        index_set: IndexSet,
        horizon: u64,
        members: &BTreeMap<u64, Vec<String>>,
        lower_bound: Rational,
    ) -> Result<Self, SelectionError> {
        let sets = members
            .iter()
            .map(|(&n, pts)| Ok((n, space.set_of(pts)?)))
            .collect::<Result<_, MeasureError>>()?;
        SetFamily::new(space, index_set, horizon, sets, lower_bound)
    }

    pub fn space(&self) -> &FiniteMeasureSpace {
        &self.space
    }

    pub fn index_set(&self) -> &IndexSet {
        &self.index_set
    }

    pub fn horizon(&self) -> u64 {
        self.horizon
    }

    pub fn lower_bound(&self) -> &Rational {
        &self.lower_bound
    }

    pub fn sets(&self) -> &BTreeMap<u64, MSet> {
        &self.sets
    }

    pub fn set(&self, n: u64) -> Option<&MSet> {
        self.sets.get(&n)
    }

    /// `a / μ(X)`: the share of the prefix the selector is guaranteed to keep.
    pub fn normalized_bound(&self) -> Rational {
        if self.space.total_mass().is_zero() {
            Rational::zero()
        } else {
            &self.lower_bound / self.space.total_mass()
        }
    }

    /// Indices of `I_0 ∧ n`, ascending.
    pub fn prefix(&self, n: u64) -> Result<Vec<u64>, SelectionError> {
        if n > self.horizon {
            return Err(SelectionError::BeyondFamilyHorizon {
                requested: n,
                horizon: self.horizon,
            });
        }
        Ok(self.index_set.members_upto(n)?)
    }

    fn nonempty_prefix(&self, n: u64) -> Result<Vec<u64>, SelectionError> {
        let p = self.prefix(n)?;
        if p.is_empty() {
            return Err(SelectionError::EmptyIndexPrefix);
        }
        Ok(p)
    }

    /// Member lists by index, for serialization.
    pub fn member_names(&self) -> BTreeMap<u64, Vec<String>> {
        self.sets
            .iter()
            .map(|(&n, s)| (n, self.space.names_of(s)))
            .collect()
    }
}

/// `F(x)` for every point, in ground-set order.
pub fn averaging_profile(fam: &SetFamily, n: u64) -> Result<Vec<Rational>, SelectionError> {
    let prefix = fam.nonempty_prefix(n)?;
    let mut hits = vec![0u64; fam.space.len()];
    for k in &prefix {
        for x in fam.sets[k].iter() {
            hits[x] += 1;
        }
    }
    let m = prefix.len() as u64;
    Ok(hits.into_iter().map(|h| Rational::ratio(h, m)).collect())
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct AveragingIdentity {
    /// `Σ_x μ({x}) F(x)`.
    pub lhs: Rational,
    /// `(1/|I_0∧N|) Σ_k μ(A_k)`.
    pub rhs: Rational,
    pub lower_bound: Rational,
    pub equal: bool,
    pub at_least_bound: bool,
    pub holds: bool,
}

pub fn averaging_identity_check(fam: &SetFamily, n: u64) -> Result<AveragingIdentity, SelectionError> {
    let profile = averaging_profile(fam, n)?;
    let prefix = fam.nonempty_prefix(n)?;
    let lhs = fam.space.integrate(&profile);
    let rhs = prefix
        .iter()
        .map(|k| fam.space.measure(&fam.sets[k]))
        .sum::<Rational>()
        / Rational::from(prefix.len() as u64);
    let equal = lhs == rhs;
    let at_least_bound = lhs >= fam.lower_bound;
    Ok(AveragingIdentity {
        holds: equal && at_least_bound,
        lhs,
        rhs,
        lower_bound: fam.lower_bound.clone(),
        equal,
        at_least_bound,
    })
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct CardinalityBound {
    pub lower_bound: Rational,
    pub total_mass: Rational,
    /// `lower_bound / total_mass`; equals `lower_bound` on probability spaces.
    pub normalized_bound: Rational,
    pub prefix_size: u64,
    pub selected_size: u64,
    /// `normalized_bound · prefix_size`.
    pub required: Rational,
    pub verified: bool,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct SelectionResult {
    pub witness: String,
    pub horizon: u64,
    pub restrict_positive: bool,
    pub selected: IndexSet,
    pub f_value: Rational,
    pub cardinality_bound: CardinalityBound,
}

impl SelectionResult {
    pub fn selected_indices(&self) -> Vec<u64> {
        match &self.selected {
            IndexSet::Finite(v) => v.clone(),
            other => other.members_upto(self.horizon).unwrap_or_default(),
        }
    }
}

/// Picks the point maximizing `F` (smallest point on ties) and returns the
/// indices of the sets containing it. With `restrict_positive`, only points of
/// positive weight compete, so every subfamily of the selection meets in a set
/// of positive measure.
pub fn select_common_point(
    fam: &SetFamily,
    n: u64,
    restrict_positive: bool,
) -> Result<SelectionResult, SelectionError> {
    let profile = averaging_profile(fam, n)?;
    let prefix = fam.nonempty_prefix(n)?;
    let candidates: Vec<usize> = if restrict_positive {
        fam.space.support().iter().collect()
    } else {
        (0..fam.space.len()).collect()
    };
    let mut best: Option<usize> = None;
    for &x in &candidates {
        if best.is_none_or(|b| profile[x] > profile[b]) {
            best = Some(x);
        }
    }
    let witness = match best {
        Some(x) => x,
        None if restrict_positive => return Err(SelectionError::NoPositivePoint),
        None => return Err(SelectionError::EmptyGroundSet),
    };

    let selected: Vec<u64> = prefix
        .iter()
        .copied()
        .filter(|k| fam.sets[k].contains(witness))
        .collect();
    let normalized = fam.normalized_bound();
    let m = prefix.len() as u64;
    let required = normalized.times(m);
    let selected_size = selected.len() as u64;
    Ok(SelectionResult {
        witness: fam.space.points()[witness].clone(),
        horizon: n,
        restrict_positive,
        selected: IndexSet::finite(selected)?,
        f_value: profile[witness].clone(),
        cardinality_bound: CardinalityBound {
            lower_bound: fam.lower_bound.clone(),
            total_mass: fam.space.total_mass().clone(),
            normalized_bound: normalized,
            prefix_size: m,
            selected_size,
            verified: Rational::from(selected_size) >= required,
            required,
        },
    })
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum SelectionMismatch {
    #[error("witness `{0}` is not a point of the space")]
    UnknownWitness(String),
    #[error("selected indices differ from the sets containing the witness")]
    SelectedSetWrong,
    #[error("recorded F value {recorded} differs from recomputed {actual}")]
    FValueWrong { recorded: Rational, actual: Rational },
    #[error("cardinality bound does not hold")]
    BoundFails,
    #[error("witness has zero weight under positive restriction")]
    WitnessNotPositive,
    #[error("recorded bookkeeping differs from the family")]
    BookkeepingWrong,
    #[error(transparent)]
    Selection(#[from] SelectionError),
}

/// Re-checks a selection against the family without rerunning the argmax.
pub fn verify_selection(fam: &SetFamily, sel: &SelectionResult) -> Result<(), SelectionMismatch> {
    let x = fam
        .space
        .index_of(&sel.witness)
        .map_err(|_| SelectionMismatch::UnknownWitness(sel.witness.clone()))?;
    let prefix = fam.nonempty_prefix(sel.horizon)?;
    let expected: Vec<u64> = prefix
        .iter()
        .copied()
        .filter(|k| fam.sets[k].contains(x))
        .collect();
    let recorded = sel.selected_indices();
    if recorded != expected {
        return Err(SelectionMismatch::SelectedSetWrong);
    }
    let actual = Rational::ratio(expected.len() as u64, prefix.len() as u64);
    if actual != sel.f_value {
        return Err(SelectionMismatch::FValueWrong {
            recorded: sel.f_value.clone(),
            actual,
        });
    }
    let cb = &sel.cardinality_bound;
    if cb.prefix_size != prefix.len() as u64
        || cb.selected_size != expected.len() as u64
        || cb.lower_bound != fam.lower_bound
        || cb.normalized_bound != fam.normalized_bound()
        || cb.required != fam.normalized_bound().times(cb.prefix_size)
    {
        return Err(SelectionMismatch::BookkeepingWrong);
    }
    if Rational::from(cb.selected_size) < cb.required || !cb.verified {
        return Err(SelectionMismatch::BoundFails);
    }
    if sel.restrict_positive && !fam.space.weight(x).is_positive() {
        return Err(SelectionMismatch::WitnessNotPositive);
    }
    Ok(())
}

/// Prefix lengths among `candidates` where `|I_0 ∧ η| / η > b`.
pub fn admitted_checkpoints(
    index_set: &IndexSet,
    b: &Rational,
    candidates: &[u64],
) -> Result<Vec<u64>, SelectionError> {
    let mut out = Vec::new();
    for &eta in candidates.iter().filter(|&&e| e > 0) {
        if Rational::ratio(index_set.prefix_count(eta)?, eta) > *b {
            out.push(eta);
        }
    }
    Ok(out)
}

/// Exact density of `I_0` minus `1/10`, when `I_0` has an exact density.
pub fn default_b(index_set: &IndexSet) -> Option<Rational> {
    index_set
        .exact_density()
        .map(|d| d - Rational::new(1, 10))
        .filter(Rational::is_positive)
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct DensityRatioCertificate {
    pub eta: u64,
    pub b: Rational,
    pub normalized_bound: Rational,
    /// `|I_0 ∧ η|`.
    pub base_count: u64,
    /// `|I ∧ η|`.
    pub selected_count: u64,
    /// `|I ∧ η| / η`.
    pub selected_ratio: Rational,
    /// `|I ∧ η| / |I_0 ∧ η|`.
    pub selected_share: Rational,
    /// `|I_0 ∧ η| / η`.
    pub base_ratio: Rational,
    pub f_value: Rational,
    /// `F_η(x) · |I_0 ∧ η| / η`.
    pub product: Rational,
    /// `normalized_bound · b`.
    pub ab: Rational,
    pub factorization_exact: bool,
    pub share_equals_f: bool,
    pub base_ratio_exceeds_b: bool,
    pub f_at_least_bound: bool,
    pub ratio_at_least_product: bool,
    pub product_exceeds_ab: bool,
    pub holds: bool,
}

/// Certifies `|I∧η|/η = (|I∧η|/|I_0∧η|)(|I_0∧η|/η) >= F_η(x)·|I_0∧η|/η > a·b`
/// for a selection computed at horizon `η`.
pub fn density_ratio_certificate(
    fam: &SetFamily,
    sel: &SelectionResult,
    eta: u64,
    b: &Rational,
) -> Result<DensityRatioCertificate, SelectionError> {
    if !b.is_positive() {
        return Err(SelectionError::NonPositiveB);
    }
    if sel.horizon != eta {
        return Err(SelectionError::HorizonMismatch {
            selection: sel.horizon,
            eta,
        });
    }
    let base = fam.nonempty_prefix(eta)?;
    let base_count = base.len() as u64;
    let base_ratio = Rational::ratio(base_count, eta);
    if base_ratio <= *b {
        return Err(SelectionError::PrefixDensityTooLow {
            ratio: base_ratio,
            b: b.clone(),
        });
    }
    let selected_count = sel.selected.prefix_count(eta)?;
    let selected_ratio = Rational::ratio(selected_count, eta);
    let selected_share = Rational::ratio(selected_count, base_count);
    let product = &sel.f_value * &base_ratio;
    let normalized_bound = fam.normalized_bound();
    let ab = &normalized_bound * b;

    let factorization_exact = selected_ratio == &selected_share * &base_ratio;
    let share_equals_f = selected_share == sel.f_value;
    let f_at_least_bound = sel.f_value >= normalized_bound;
    let ratio_at_least_product = selected_ratio >= product;
    // With a zero bound the strict step degenerates to `>=`.
    let product_exceeds_ab = product > ab || (normalized_bound.is_zero() && product >= ab);
    Ok(DensityRatioCertificate {
        holds: factorization_exact
            && share_equals_f
            && f_at_least_bound
            && ratio_at_least_product
            && product_exceeds_ab,
        eta,
        b: b.clone(),
        normalized_bound,
        base_count,
        selected_count,
        selected_ratio,
        selected_share,
        base_ratio_exceeds_b: true,
        base_ratio,
        f_value: sel.f_value.clone(),
        product,
        ab,
        factorization_exact,
        share_equals_f,
        f_at_least_bound,
        ratio_at_least_product,
        product_exceeds_ab,
    })
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct OracleResult {
    pub max_size: u64,
    pub best_subset: Vec<u64>,
    pub positive: bool,
    pub subsets_examined: u64,
}

/// Largest subfamily of `{A_k : k ∈ I_0∧N}` with nonempty common
/// intersection (with `positive`, an intersection of positive measure),
/// found by enumerating every subfamily. Ties go to the subfamily whose
/// bitmask over the ascending prefix is smallest.
pub fn fip_oracle(fam: &SetFamily, n: u64, positive: bool) -> Result<OracleResult, SelectionError> {
    let prefix = fam.prefix(n)?;
    let m = prefix.len();
    let points = fam.space.len();
    if m > ORACLE_MAX_FAMILY || points > ORACLE_MAX_POINTS {
        return Err(SelectionError::TooLargeForOracle { family: m, points });
    }
    let to_mask = |s: &MSet| s.iter().fold(0u128, |acc, i| acc | 1u128 << i);
    let sets: Vec<u128> = prefix.iter().map(|k| to_mask(&fam.sets[k])).collect();
    let everything = to_mask(&MSet::full(points));
    let target = if positive {
        to_mask(&fam.space.support())
    } else {
        everything
    };

    // meet[mask] = intersection of the sets whose bits are in mask.
    let mut meet = vec![everything; 1 << m];
    let mut best_mask = 0usize;
    let mut best_size = 0u32;
    for mask in 1usize..1 << m {
        let low = mask.trailing_zeros() as usize;
        meet[mask] = meet[mask & (mask - 1)] & sets[low];
        let size = mask.count_ones();
        if size > best_size && meet[mask] & target != 0 {
            best_size = size;
            best_mask = mask;
        }
    }
    Ok(OracleResult {
        max_size: best_size as u64,
        best_subset: (0..m)
            .filter(|i| best_mask >> i & 1 == 1)
            .map(|i| prefix[i])
            .collect(),
        positive,
        subsets_examined: 1u64 << m,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rational::q;
    use proptest::prelude::*;

    fn family(space: FiniteMeasureSpace, i0: IndexSet, n: u64, sets: &[&[usize]], a: Rational) -> SetFamily {
        let idx = i0.members_upto(n).unwrap();
        let len = space.len();
        let map = idx
            .iter()
            .zip(sets)
            .map(|(&k, s)| (k, MSet::from_indices(len, s.iter().copied())))
            .collect();
        SetFamily::new(space, i0, n, map, a).unwrap()
    }

    fn two_point() -> SetFamily {
        family(
            FiniteMeasureSpace::uniform(2),
            IndexSet::naturals(),
            3,
            &[&[0], &[0], &[1]],
            q(1, 2),
        )
    }

    fn cyclic() -> SetFamily {
        family(
            FiniteMeasureSpace::uniform(4),
            IndexSet::naturals(),
            4,
            &[&[0, 1], &[1, 2], &[2, 3], &[3, 0]],
            q(1, 2),
        )
    }

    #[test]
    fn profile_examples() {
        assert_eq!(averaging_profile(&two_point(), 3).unwrap(), vec![q(2, 3), q(1, 3)]);
        let full = family(
            FiniteMeasureSpace::uniform(3),
            IndexSet::naturals(),
            2,
            &[&[0, 1, 2], &[0, 1, 2]],
            Rational::one(),
        );
        assert_eq!(averaging_profile(&full, 2).unwrap(), vec![Rational::one(); 3]);
        let empty = family(
            FiniteMeasureSpace::uniform(2),
            IndexSet::naturals(),
            2,
            &[&[], &[]],
            Rational::zero(),
        );
        assert_eq!(averaging_profile(&empty, 2).unwrap(), vec![Rational::zero(); 2]);
    }

    #[test]
    fn empty_prefix_is_an_error() {
        let f = family(
            FiniteMeasureSpace::uniform(2),
            IndexSet::finite(vec![5]).unwrap(),
            6,
            &[&[0]],
            q(1, 2),
        );
        assert_eq!(averaging_profile(&f, 4), Err(SelectionError::EmptyIndexPrefix));
        assert_eq!(select_common_point(&f, 4, false).unwrap_err(), SelectionError::EmptyIndexPrefix);
    }

    #[test]
    fn construction_checks() {
        let sp = FiniteMeasureSpace::uniform(2);
        let one = |s: &[usize]| MSet::from_indices(2, s.iter().copied());
        let i0 = IndexSet::naturals();
        let missing: BTreeMap<u64, MSet> = [(1, one(&[0]))].into();
        assert_eq!(
            SetFamily::new(sp.clone(), i0.clone(), 2, missing, q(1, 2)).unwrap_err(),
            SelectionError::MissingSet(2)
        );
        let small: BTreeMap<u64, MSet> = [(1, one(&[]))].into();
        assert!(matches!(
            SetFamily::new(sp.clone(), i0.clone(), 1, small, q(1, 2)),
            Err(SelectionError::BelowLowerBound { index: 1, .. })
        ));
        let extra: BTreeMap<u64, MSet> = [(1, one(&[0])), (2, one(&[0]))].into();
        assert_eq!(
            SetFamily::new(sp, i0, 1, extra, q(1, 2)).unwrap_err(),
            SelectionError::UnexpectedSet(2)
        );
    }

    #[test]
    fn identity_examples() {
        let id = averaging_identity_check(&two_point(), 3).unwrap();
        assert_eq!((id.lhs.clone(), id.rhs.clone()), (q(1, 2), q(1, 2)));
        assert!(id.holds);
        let single = family(
            FiniteMeasureSpace::uniform(4),
            IndexSet::naturals(),
            1,
            &[&[2]],
            q(1, 4),
        );
        let id = averaging_identity_check(&single, 1).unwrap();
        assert_eq!((id.lhs, id.rhs), (q(1, 4), q(1, 4)));
    }

    #[test]
    fn selector_examples() {
        let sel = select_common_point(&two_point(), 3, false).unwrap();
        assert_eq!(sel.witness, "x1");
        assert_eq!(sel.selected_indices(), vec![1, 2]);
        assert!(sel.cardinality_bound.verified);
        assert_eq!(sel.cardinality_bound.required, q(3, 2));

        let sel = select_common_point(&cyclic(), 4, false).unwrap();
        assert_eq!(averaging_profile(&cyclic(), 4).unwrap(), vec![q(1, 2); 4]);
        assert_eq!(sel.witness, "x1");
        assert_eq!(sel.selected_indices(), vec![1, 4]);
        assert_eq!(sel.cardinality_bound.required, q(2, 1));
        verify_selection(&cyclic(), &sel).unwrap();

        let same = family(
            FiniteMeasureSpace::uniform(4),
            IndexSet::naturals(),
            5,
            &[&[1, 2][..]; 5],
            q(1, 2),
        );
        assert_eq!(
            select_common_point(&same, 5, false).unwrap().selected_indices(),
            vec![1, 2, 3, 4, 5]
        );
    }

    #[test]
    fn positive_restriction_skips_null_points() {
        let sp = FiniteMeasureSpace::new(
            vec!["z".into(), "p".into(), "q".into()],
            vec![Rational::zero(), q(1, 2), q(1, 2)],
        )
        .unwrap();
        // z lies in every set but carries no mass.
        let f = family(sp, IndexSet::naturals(), 3, &[&[0, 1], &[0, 2], &[0, 1]], q(1, 2));
        assert_eq!(select_common_point(&f, 3, false).unwrap().witness, "z");
        let pos = select_common_point(&f, 3, true).unwrap();
        assert_eq!(pos.witness, "p");
        assert_eq!(pos.selected_indices(), vec![1, 3]);
        assert_eq!(fip_oracle(&f, 3, true).unwrap().max_size, 2);
        assert_eq!(fip_oracle(&f, 3, false).unwrap().max_size, 3);

        let null = FiniteMeasureSpace::new(vec!["z".into()], vec![Rational::zero()]).unwrap();
        let f = family(null, IndexSet::naturals(), 1, &[&[0]], Rational::zero());
        assert_eq!(select_common_point(&f, 1, true).unwrap_err(), SelectionError::NoPositivePoint);
    }

    #[test]
    fn ratio_certificate_examples() {
        let f = two_point();
        let sel = select_common_point(&f, 3, false).unwrap();
        let c = density_ratio_certificate(&f, &sel, 3, &q(9, 10)).unwrap();
        assert_eq!(c.selected_ratio, q(2, 3));
        assert_eq!(c.product, q(2, 3));
        assert!(c.holds);

        let evens = IndexSet::arithmetic(2, vec![0]).unwrap();
        let f = family(
            FiniteMeasureSpace::uniform(2),
            evens,
            8,
            &[&[0, 1][..]; 4],
            Rational::one(),
        );
        let sel = select_common_point(&f, 8, false).unwrap();
        let c = density_ratio_certificate(&f, &sel, 8, &q(1, 4)).unwrap();
        assert_eq!(c.selected_ratio, q(1, 2));
        assert_eq!(c.ab, q(1, 4));
        assert!(c.holds);
        assert!(matches!(
            density_ratio_certificate(&f, &sel, 8, &q(1, 2)),
            Err(SelectionError::PrefixDensityTooLow { .. })
        ));
        assert!(matches!(
            density_ratio_certificate(&f, &sel, 6, &q(1, 4)),
            Err(SelectionError::HorizonMismatch { .. })
        ));

        let f = cyclic();
        let sel = select_common_point(&f, 4, false).unwrap();
        let c = density_ratio_certificate(&f, &sel, 4, &q(3, 4)).unwrap();
        assert_eq!(c.selected_ratio, q(1, 2));
        assert_eq!(c.product, q(1, 2));
        assert_eq!(c.ab, q(3, 8));
        assert!(c.holds);
    }

    #[test]
    fn oracle_examples() {
        let o = fip_oracle(&two_point(), 3, false).unwrap();
        assert_eq!((o.max_size, o.best_subset), (2, vec![1, 2]));
        assert_eq!(o.subsets_examined, 8);
        assert_eq!(fip_oracle(&cyclic(), 4, false).unwrap().max_size, 2);
        let big = family(
            FiniteMeasureSpace::uniform(2),
            IndexSet::naturals(),
            21,
            &[&[0][..]; 21],
            q(1, 2),
        );
        assert!(matches!(
            fip_oracle(&big, 21, false),
            Err(SelectionError::TooLargeForOracle { family: 21, .. })
        ));
        assert_eq!(fip_oracle(&big, 20, false).unwrap().max_size, 20);
    }

    #[test]
    fn default_b_and_admission() {
        let evens = IndexSet::arithmetic(2, vec![0]).unwrap();
        assert_eq!(default_b(&evens), Some(q(2, 5)));
        assert_eq!(default_b(&IndexSet::finite(vec![1]).unwrap()), None);
        // |evens ∧ η|/η is 0 at η = 1 and 1/3 at η = 3.
        assert_eq!(
            admitted_checkpoints(&evens, &q(2, 5), &[1, 2, 3, 4]).unwrap(),
            vec![2, 4]
        );
    }

    fn random_family() -> impl Strategy<Value = SetFamily> {
        (1usize..=7, 1usize..=10).prop_flat_map(|(pts, m)| {
            (
                proptest::collection::vec(0i64..=5, pts),
                proptest::collection::vec(0u32..(1 << pts), m),
            )
                .prop_map(move |(w, sets)| {
                    let weights: Vec<Rational> = if w.iter().all(|&x| x == 0) {
                        vec![Rational::ratio(1, pts as u64); pts]
                    } else {
                        let t: i64 = w.iter().sum();
                        w.iter().map(|&x| q(x, t)).collect()
                    };
                    let space = FiniteMeasureSpace::uniform(pts).reweighted(weights).unwrap();
                    let sets: BTreeMap<u64, MSet> = sets
                        .iter()
                        .enumerate()
                        .map(|(i, &b)| {
                            (i as u64 + 1, MSet::from_indices(pts, (0..pts).filter(|j| b >> j & 1 == 1)))
                        })
                        .collect();
                    let a = sets.values().map(|s| space.measure(s)).min().unwrap();
                    SetFamily::new(space, IndexSet::naturals(), m as u64, sets, a).unwrap()
                })
        })
    }

    proptest! {
        #[test]
        fn averaging_identity_is_exact(f in random_family()) {
            let id = averaging_identity_check(&f, f.horizon()).unwrap();
            prop_assert!(id.holds);
        }

        #[test]
        fn selector_meets_guarantee_and_matches_oracle(f in random_family(), positive in any::<bool>()) {
            let n = f.horizon();
            let sel = match select_common_point(&f, n, positive) {
                Ok(s) => s,
                Err(SelectionError::NoPositivePoint) => return Ok(()),
                Err(e) => return Err(TestCaseError::fail(e.to_string())),
            };
            prop_assert!(sel.cardinality_bound.verified);
            verify_selection(&f, &sel).unwrap();
            let x = f.space().index_of(&sel.witness).unwrap();
            for k in sel.selected_indices() {
                prop_assert!(f.set(k).unwrap().contains(x));
            }
            let oracle = fip_oracle(&f, n, positive).unwrap();
            prop_assert_eq!(sel.cardinality_bound.selected_size, oracle.max_size);
        }

        #[test]
        fn positive_selection_has_positive_intersections(f in random_family()) {
            let n = f.horizon();
            let Ok(sel) = select_common_point(&f, n, true) else { return Ok(()) };
            let idx = sel.selected_indices();
            for mask in 1u32..1 << idx.len() {
                let meet = (0..idx.len())
                    .filter(|i| mask >> i & 1 == 1)
                    .fold(MSet::full(f.space().len()), |acc, i| acc.intersection(f.set(idx[i]).unwrap()));
                prop_assert!(f.space().measure(&meet).is_positive());
            }
        }

        #[test]
        fn argmax_is_scale_invariant(f in random_family(), c in 1i64..=7, d in 1i64..=7) {
            let scale = q(c, d);
            let space = f.space().reweighted(f.space().weights().iter().map(|w| w * &scale).collect()).unwrap();
            let g = SetFamily::new(space, f.index_set().clone(), f.horizon(), f.sets().clone(), f.lower_bound() * &scale).unwrap();
            let (n, ng) = (f.horizon(), g.horizon());
            let id_f = averaging_identity_check(&f, n).unwrap();
            let id_g = averaging_identity_check(&g, ng).unwrap();
            prop_assert_eq!(id_g.lhs, id_f.lhs * &scale);
            for positive in [false, true] {
                match (select_common_point(&f, n, positive), select_common_point(&g, ng, positive)) {
                    (Ok(a), Ok(b)) => {
                        prop_assert_eq!(a.witness, b.witness);
                        prop_assert_eq!(a.selected, b.selected);
                    }
                    (Err(a), Err(b)) => prop_assert_eq!(a, b),
                    _ => prop_assert!(false, "scaling changed feasibility"),
                }
            }
        }
    }
}
