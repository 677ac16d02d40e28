//! Both directions of the density-limit representation at a finite truncation.
//!
//! *Backward* (functional ⇒ points): from a positive functional `T` with
//! `|T(f_n)| > r` on `I ∧ N`, build level sets `A_n = {x : |f_n(x)| > δ}`,
//! each of `T`-measure above `(r - s)/M`, pick a common point with the
//! selector, and read off a witness sequence on which `|f_n|` stays above `δ`.
//!
//! *Forward* (points ⇒ functional): from points `x_1..x_K` with
//! `|f_n(x_k)| > r` across the tail window, evaluation at `x_K` is a positive
//! functional with `|T(f_n)| > r` on `I ∧ N`.
//!
//! "liminf at truncation" is the minimum over the tail window
//! `k ∈ [⌈K/2⌉, K]`.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::bergelson::{select_common_point, verify_selection, SelectionError, SelectionMismatch, SelectionResult, SetFamily};
use crate::density::{d_lim_verdict, DLimVerdict, DensityError, IndexSet, RealSequence};
use crate::measure::{FiniteMeasureSpace, Functional, MSet, MeasureError};
use crate::rational::Rational;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum WitnessError {
    #[error(transparent)]
    Selection(#[from] SelectionError),
    #[error(transparent)]
    Density(#[from] DensityError),
    #[error(transparent)]
    Measure(#[from] MeasureError),
    #[error("invalid bounded family: {0}")]
    InvalidFamily(String),
    #[error("functional has T(1) = 0")]
    ZeroFunctional,
    #[error("invalid parameters: {0}")]
    BadParameters(String),
    #[error("|T(f_{index})| = {value} does not exceed r = {r}")]
    HypothesisViolation {
        index: u64,
        value: Rational,
        r: Rational,
    },
    #[error("|f_{index}(x_{k})| = {value} does not exceed r = {r}")]
    TailViolation {
        index: u64,
        k: usize,
        value: Rational,
        r: Rational,
    },
    #[error("prefix length {requested} exceeds the family horizon {horizon}")]
    BeyondHorizon { requested: u64, horizon: u64 },
    #[error("point list is empty")]
    EmptyPoints,
    #[error("no functionals given")]
    NoFunctionals,
    #[error("internal invariant broken: {0}")]
    InvariantBroken(String),
}

/// Functions `f_1..f_N` on a finite ground set, all bounded by `M > 0`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct BoundedFamily {
    space: FiniteMeasureSpace,
    values: Vec<Vec<Rational>>,
    bound: Rational,
}

impl BoundedFamily {
    /// `values[n - 1][x]` is `f_n(x)`.
    pub fn new(
        space: FiniteMeasureSpace,
        values: Vec<Vec<Rational>>,
        bound: Rational,
    ) -> Result<Self, WitnessError> {
        if !bound.is_positive() {
            return Err(WitnessError::InvalidFamily("bound M must be positive".into()));
        }
        for (i, row) in values.iter().enumerate() {
            if row.len() != space.len() {
                return Err(WitnessError::InvalidFamily(format!(
                    "f_{} has {} values for {} points",
                    i + 1,
                    row.len(),
                    space.len()
                )));
            }
            if let Some(x) = row.iter().position(|v| v.abs() > bound) {
                return Err(WitnessError::InvalidFamily(format!(
                    "|f_{}({})| exceeds bound {}",
                    i + 1,
                    space.points()[x],
                    bound
                )));
            }
        }
        Ok(BoundedFamily {
            space,
            values,
            bound,
        })
    }

    pub fn from_fn(
        space: FiniteMeasureSpace,
        n: u64,
        bound: Rational,
        f: impl Fn(u64, usize) -> Rational,
    ) -> Result<Self, WitnessError> {
        let values = (1..=n)
            .map(|k| (0..space.len()).map(|x| f(k, x)).collect())
            .collect();
        BoundedFamily::new(space, values, bound)
    }

    pub fn space(&self) -> &FiniteMeasureSpace {
        &self.space
    }

    pub fn bound(&self) -> &Rational {
        &self.bound
    }

    pub fn horizon(&self) -> u64 {
        self.values.len() as u64
    }

    /// `f_n` pointwise, `1 <= n <= horizon`.
    pub fn function(&self, n: u64) -> &[Rational] {
        &self.values[(n - 1) as usize]
    }

    pub fn value(&self, n: u64, x: usize) -> &Rational {
        &self.values[(n - 1) as usize][x]
    }

    fn check_horizon(&self, n: u64) -> Result<(), WitnessError> {
        if n > self.horizon() {
            return Err(WitnessError::BeyondHorizon {
                requested: n,
                horizon: self.horizon(),
            });
        }
        Ok(())
    }

    /// `{n: {point: value}}`, for serialization.
    pub fn to_named(&self) -> BTreeMap<u64, BTreeMap<String, Rational>> {
        self.values
            .iter()
            .enumerate()
            .map(|(i, row)| {
                (
                    i as u64 + 1,
                    self.space.points().iter().cloned().zip(row.iter().cloned()).collect(),
                )
            })
            .collect()
    }

    /// Inverse of [`BoundedFamily::to_named`]; indices must be exactly `1..=N`.
    pub fn from_named(
        space: FiniteMeasureSpace,
        named: &BTreeMap<u64, BTreeMap<String, Rational>>,
        bound: Rational,
    ) -> Result<Self, WitnessError> {
        let mut values = Vec::with_capacity(named.len());
        for (i, (&n, row)) in named.iter().enumerate() {
            if n != i as u64 + 1 {
                return Err(WitnessError::InvalidFamily(format!(
                    "function indices must be 1..=N without gaps, found {n}"
                )));
            }
            let mut vals = Vec::with_capacity(space.len());
            for p in space.points() {
                vals.push(row.get(p).cloned().ok_or_else(|| {
                    WitnessError::InvalidFamily(format!("f_{n} has no value at `{p}`"))
                })?);
            }
            if let Some(extra) = row.keys().find(|k| space.index_of(k).is_err()) {
                return Err(MeasureError::UnknownPoint(extra.clone()).into());
            }
            values.push(vals);
        }
        BoundedFamily::new(space, values, bound)
    }
}

/// Half-tail window `[⌈K/2⌉, K]`, 1-based.
pub fn tail_window(k: usize) -> (usize, usize) {
    (k.div_ceil(2).max(1), k)
}

/// Explicit `s` and `δ`; missing values take the defaults `s = r/2`,
/// `δ = s / (2 T(1))`.
#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct WitnessParams {
    pub s: Option<Rational>,
    pub delta: Option<Rational>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct MeasureChain {
    pub index: u64,
    /// `|T(f_n)|`.
    pub functional_value: Rational,
    /// `T(χ_{A_n})`.
    pub level_measure: Rational,
    /// `M·T(χ_{A_n}) + s`.
    pub chain_upper: Rational,
    /// `(r - s)/M`.
    pub measure_bound: Rational,
    pub exceeds_r: bool,
    pub chain_holds: bool,
    pub measure_exceeds_bound: bool,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct DeltaBound {
    /// `T(δ) = δ·T(1)`.
    pub functional_of_delta: Rational,
    pub s: Rational,
    pub below_s: bool,
}

#[derive(Debug, Clone)]
pub struct LevelSets {
    pub family: SetFamily,
    pub r: Rational,
    pub s: Rational,
    pub delta: Rational,
    pub total: Rational,
    pub delta_bound: DeltaBound,
    pub chains: Vec<MeasureChain>,
}

fn resolve_params(
    r: &Rational,
    total: &Rational,
    params: &WitnessParams,
) -> Result<(Rational, Rational), WitnessError> {
    if !r.is_positive() {
        return Err(WitnessError::BadParameters("r must be positive".into()));
    }
    let s = params.s.clone().unwrap_or_else(|| r / Rational::from_integer(2));
    if !(s.is_positive() && s < *r) {
        return Err(WitnessError::BadParameters(format!("need 0 < s < r, got s = {s}")));
    }
    let ceiling = &s / total;
    let delta = params
        .delta
        .clone()
        .unwrap_or_else(|| &ceiling / Rational::from_integer(2));
    if !(delta.is_positive() && delta < ceiling) {
        return Err(WitnessError::BadParameters(format!(
            "need 0 < δ < s/T(1) = {ceiling}, got δ = {delta}"
        )));
    }
    Ok((s, delta))
}

/// `A_n = {x : |f_n(x)| > δ}` for `n ∈ I ∧ N`, as a family over the measure
/// `E ↦ T(χ_E)` with declared lower bound `(r - s)/M`.
pub fn build_level_sets(
    fam: &BoundedFamily,
    t: &Functional,
    index_set: &IndexSet,
    n: u64,
    r: &Rational,
    params: &WitnessParams,
) -> Result<LevelSets, WitnessError> {
    fam.check_horizon(n)?;
    let space = t.as_space(&fam.space)?;
    let total = t.total();
    if !total.is_positive() {
        return Err(WitnessError::ZeroFunctional);
    }
    let (s, delta) = resolve_params(r, &total, params)?;
    let functional_of_delta = &delta * &total;
    let delta_bound = DeltaBound {
        below_s: functional_of_delta < s,
        functional_of_delta,
        s: s.clone(),
    };
    let m = fam.bound();
    let measure_bound = (r - &s) / m;

    let mut sets = BTreeMap::new();
    let mut chains = Vec::new();
    for k in index_set.members_upto(n)? {
        let f = fam.function(k);
        let value = t.apply(f).abs();
        if value <= *r {
            return Err(WitnessError::HypothesisViolation {
                index: k,
                value,
                r: r.clone(),
            });
        }
        let level = MSet::from_indices(fam.space.len(), (0..f.len()).filter(|&x| f[x].abs() > delta));
        let level_measure = t.apply_indicator(&level);
        let chain_upper = m * &level_measure + &s;
        let chain = MeasureChain {
            index: k,
            exceeds_r: value > *r,
            chain_holds: value <= chain_upper,
            measure_exceeds_bound: level_measure > measure_bound,
            functional_value: value,
            level_measure,
            chain_upper,
            measure_bound: measure_bound.clone(),
        };
        if !(chain.chain_holds && chain.measure_exceeds_bound) {
            return Err(WitnessError::InvariantBroken(format!(
                "measure chain fails at n = {k}"
            )));
        }
        chains.push(chain);
        sets.insert(k, level);
    }
    let family = SetFamily::new(space, index_set.clone(), n, sets, measure_bound)?;
    Ok(LevelSets {
        family,
        r: r.clone(),
        s,
        delta,
        total,
        delta_bound,
        chains,
    })
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct LevelSetRecord {
    pub members: Vec<String>,
    pub measure: Rational,
}

/// Raw density quantities behind the selected index set. Two candidate
/// lower bounds for `|J∧N|/N` are recorded; only the selector bound is
/// guaranteed.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct DensityBookkeeping {
    /// `|I∧N| / N`.
    pub base_ratio: Rational,
    /// `|J∧N| / N`.
    pub selected_ratio: Rational,
    /// `((r - s)/M) / T(1)`.
    pub normalized_measure_bound: Rational,
    /// `normalized_measure_bound · base_ratio`.
    pub selector_bound: Rational,
    pub meets_selector_bound: bool,
    /// `base_ratio² · r / M`.
    pub squared_ratio_bound: Rational,
    pub meets_squared_ratio_bound: bool,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct BackwardCertificate {
    pub horizon: u64,
    pub r: Rational,
    pub s: Rational,
    pub delta: Rational,
    pub functional_total: Rational,
    pub bound: Rational,
    pub measure_bound: Rational,
    pub delta_bound: DeltaBound,
    pub chains: Vec<MeasureChain>,
    pub level_sets: BTreeMap<u64, LevelSetRecord>,
    pub selection: SelectionResult,
    pub j: IndexSet,
    /// `x_1..x_K`; `x_k` lies in the first `k` selected level sets.
    pub points: Vec<String>,
    pub points_nested: bool,
    pub tail_window: (usize, usize),
    pub tail_min: BTreeMap<u64, Rational>,
    pub tail_above_delta: bool,
    pub density: DensityBookkeeping,
    pub holds: bool,
}

/// Functional ⇒ witness points.
pub fn backward_pipeline(
    fam: &BoundedFamily,
    t: &Functional,
    index_set: &IndexSet,
    n: u64,
    r: &Rational,
    params: &WitnessParams,
) -> Result<BackwardCertificate, WitnessError> {
    let levels = build_level_sets(fam, t, index_set, n, r, params)?;
    let selection = select_common_point(&levels.family, n, true)?;
    let j_indices = selection.selected_indices();
    let witness = fam.space.index_of(&selection.witness)?;

    let k = j_indices.len();
    let points = vec![selection.witness.clone(); k];
    let points_nested = (1..=k).all(|upto| {
        j_indices[..upto]
            .iter()
            .all(|idx| levels.family.set(*idx).is_some_and(|a| a.contains(witness)))
    });
    let window = tail_window(k);
    let point_idx = vec![witness; k];
    let tail_min = tail_minima(fam, &j_indices, &point_idx, window);
    let tail_above_delta = tail_min.values().all(|v| *v >= levels.delta);

    let base_count = index_set.prefix_count(n)?;
    let base_ratio = Rational::ratio(base_count, n);
    let selected_ratio = Rational::ratio(k as u64, n);
    let normalized = levels.family.normalized_bound();
    let selector_bound = &normalized * &base_ratio;
    let squared_ratio_bound = &base_ratio * &base_ratio * r / fam.bound();
    let density = DensityBookkeeping {
        meets_selector_bound: selected_ratio >= selector_bound,
        meets_squared_ratio_bound: selected_ratio >= squared_ratio_bound,
        base_ratio,
        selected_ratio,
        normalized_measure_bound: normalized,
        selector_bound,
        squared_ratio_bound,
    };

    let level_sets = levels
        .family
        .sets()
        .iter()
        .map(|(&idx, set)| {
            (
                idx,
                LevelSetRecord {
                    members: fam.space.names_of(set),
                    measure: t.apply_indicator(set),
                },
            )
        })
        .collect();

    let holds = levels.delta_bound.below_s
        && levels
            .chains
            .iter()
            .all(|c| c.exceeds_r && c.chain_holds && c.measure_exceeds_bound)
        && selection.cardinality_bound.verified
        && points_nested
        && tail_above_delta
        && density.meets_selector_bound;

    Ok(BackwardCertificate {
        horizon: n,
        r: levels.r.clone(),
        s: levels.s.clone(),
        delta: levels.delta.clone(),
        functional_total: levels.total.clone(),
        bound: fam.bound().clone(),
        measure_bound: levels.family.lower_bound().clone(),
        delta_bound: levels.delta_bound.clone(),
        chains: levels.chains.clone(),
        level_sets,
        j: IndexSet::finite(j_indices)?,
        selection,
        points,
        points_nested,
        tail_window: window,
        tail_min,
        tail_above_delta,
        density,
        holds,
    })
}

fn tail_minima(
    fam: &BoundedFamily,
    indices: &[u64],
    points: &[usize],
    (start, end): (usize, usize),
) -> BTreeMap<u64, Rational> {
    indices
        .iter()
        .filter_map(|&idx| {
            (start..=end)
                .map(|k| fam.value(idx, points[k - 1]).abs())
                .min()
                .map(|m| (idx, m))
        })
        .collect()
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ForwardCertificate {
    pub k: usize,
    pub horizon: u64,
    pub witness: String,
    pub functional: Functional,
    pub r: Rational,
    pub tail_window: (usize, usize),
    pub tail_min: BTreeMap<u64, Rational>,
    /// `|T(f_n)|` for every `n ∈ I ∧ N`.
    pub values: BTreeMap<u64, Rational>,
    pub checked: Vec<u64>,
    pub holds: bool,
}

/// Witness points ⇒ functional: evaluation at the last point.
pub fn forward_functional<S: AsRef<str>>(
    fam: &BoundedFamily,
    points: &[S],
    index_set: &IndexSet,
    n: u64,
    r: &Rational,
) -> Result<ForwardCertificate, WitnessError> {
    fam.check_horizon(n)?;
    if !r.is_positive() {
        return Err(WitnessError::BadParameters("r must be positive".into()));
    }
    if points.is_empty() {
        return Err(WitnessError::EmptyPoints);
    }
    let idx: Vec<usize> = points
        .iter()
        .map(|p| fam.space.index_of(p.as_ref()))
        .collect::<Result<_, _>>()?;
    let k = idx.len();
    let window = tail_window(k);
    let indices = index_set.members_upto(n)?;
    for &i in &indices {
        for kk in window.0..=window.1 {
            let value = fam.value(i, idx[kk - 1]).abs();
            if value <= *r {
                return Err(WitnessError::TailViolation {
                    index: i,
                    k: kk,
                    value,
                    r: r.clone(),
                });
            }
        }
    }
    let tail_min = tail_minima(fam, &indices, &idx, window);
    let t = Functional::point_mass(fam.space.len(), idx[k - 1]);
    let values: BTreeMap<u64, Rational> = indices
        .iter()
        .map(|&i| (i, t.apply(fam.function(i)).abs()))
        .collect();
    let holds = values.values().all(|v| v > r);
    Ok(ForwardCertificate {
        k,
        horizon: n,
        witness: points[k - 1].as_ref().to_string(),
        functional: t,
        r: r.clone(),
        tail_window: window,
        tail_min,
        values,
        checked: indices,
        holds,
    })
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct DConvVerdict {
    pub functional: usize,
    pub verdict: DLimVerdict,
}

/// For each functional, the d-limit verdict of `n ↦ T(f_n)` against 0.
pub fn weak_d_convergence_check(
    fam: &BoundedFamily,
    functionals: &[Functional],
    r: &Rational,
    n: u64,
    tolerance: &Rational,
) -> Result<Vec<DConvVerdict>, WitnessError> {
    fam.check_horizon(n)?;
    if functionals.is_empty() {
        return Err(WitnessError::NoFunctionals);
    }
    functionals
        .iter()
        .enumerate()
        .map(|(i, t)| {
            if t.len() != fam.space.len() {
                return Err(MeasureError::SizeMismatch {
                    expected: fam.space.len(),
                    got: t.len(),
                }
                .into());
            }
            let seq = RealSequence::new(
                (1..=n).map(|k| t.apply(fam.function(k))).collect(),
                None,
                fam.bound() * t.total(),
            )?;
            Ok(DConvVerdict {
                functional: i,
                verdict: d_lim_verdict(&seq, &Rational::zero(), r, n, tolerance)?,
            })
        })
        .collect()
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum CertificateMismatch {
    #[error("{0}")]
    Field(String),
    #[error(transparent)]
    Selection(#[from] SelectionMismatch),
    #[error(transparent)]
    Witness(#[from] WitnessError),
}

fn ensure(cond: bool, what: &str) -> Result<(), CertificateMismatch> {
    if cond {
        Ok(())
    } else {
        Err(CertificateMismatch::Field(what.to_string()))
    }
}

/// Re-checks a backward certificate against its inputs using the recorded
/// `s` and `δ`.
pub fn verify_backward(
    fam: &BoundedFamily,
    t: &Functional,
    index_set: &IndexSet,
    cert: &BackwardCertificate,
) -> Result<(), CertificateMismatch> {
    let params = WitnessParams {
        s: Some(cert.s.clone()),
        delta: Some(cert.delta.clone()),
    };
    let levels = build_level_sets(fam, t, index_set, cert.horizon, &cert.r, &params)?;
    ensure(levels.total == cert.functional_total, "T(1) differs")?;
    ensure(&cert.delta * &cert.functional_total < cert.s, "T(δ) < s fails")?;
    ensure(*levels.family.lower_bound() == cert.measure_bound, "measure bound differs")?;
    for (idx, set) in levels.family.sets() {
        let rec = cert
            .level_sets
            .get(idx)
            .ok_or_else(|| CertificateMismatch::Field(format!("level set {idx} missing")))?;
        ensure(rec.members == fam.space.names_of(set), "level set members differ")?;
        ensure(rec.measure == t.apply_indicator(set), "level set measure differs")?;
        ensure(rec.measure > cert.measure_bound, "level set measure not above (r-s)/M")?;
    }
    ensure(cert.level_sets.len() == levels.family.sets().len(), "extra level sets")?;
    verify_selection(&levels.family, &cert.selection)?;
    ensure(cert.selection.restrict_positive, "selection not restricted to positive points")?;
    let j = cert.selection.selected_indices();
    ensure(cert.j.members_upto(cert.horizon).ok() == Some(j.clone()), "J differs from selection")?;
    ensure(!cert.points.is_empty() || j.is_empty(), "no witness points")?;
    let idx: Vec<usize> = cert
        .points
        .iter()
        .map(|p| fam.space.index_of(p))
        .collect::<Result<_, _>>()
        .map_err(WitnessError::from)?;
    for (k, &x) in idx.iter().enumerate() {
        for n in j.iter().take(k + 1) {
            ensure(levels.family.set(*n).is_some_and(|a| a.contains(x)), "witness point outside level set")?;
        }
    }
    ensure(cert.tail_window == tail_window(idx.len()), "tail window differs")?;
    let mins = tail_minima(fam, &j, &idx, cert.tail_window);
    ensure(mins == cert.tail_min, "tail minima differ")?;
    ensure(mins.values().all(|v| *v >= cert.delta), "tail minimum below δ")?;
    // The checks above are independent of the pipeline; the recorded flags
    // must also agree with a fresh run.
    let fresh = backward_pipeline(fam, t, index_set, cert.horizon, &cert.r, &params)?;
    ensure(fresh == *cert, "certificate differs from recomputation")?;
    ensure(cert.holds, "certificate does not hold")?;
    Ok(())
}

/// Re-evaluates a forward certificate's functional on every checked index.
pub fn verify_forward(
    fam: &BoundedFamily,
    index_set: &IndexSet,
    cert: &ForwardCertificate,
) -> Result<(), CertificateMismatch> {
    let x = fam.space.index_of(&cert.witness).map_err(WitnessError::from)?;
    ensure(cert.functional == Functional::point_mass(fam.space.len(), x), "functional is not evaluation at the witness")?;
    let expected = index_set.members_upto(cert.horizon).map_err(WitnessError::from)?;
    ensure(cert.checked == expected, "checked indices differ from I ∧ N")?;
    for n in &cert.checked {
        let v = cert.functional.apply(fam.function(*n)).abs();
        ensure(cert.values.get(n) == Some(&v), "recorded |T(f_n)| differs")?;
        ensure(v > cert.r, "|T(f_n)| does not exceed r")?;
    }
    ensure(cert.holds, "certificate does not hold")?;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rational::q;
    use proptest::prelude::*;

    /// X = {x1, x2}; f_n(x1) = 1 on even n, 0 on odd n; f_n(x2) = 0.
    fn even_family(n: u64) -> BoundedFamily {
        BoundedFamily::from_fn(FiniteMeasureSpace::uniform(2), n, Rational::one(), |k, x| {
            if x == 0 && k % 2 == 0 {
                Rational::one()
            } else {
                Rational::zero()
            }
        })
        .unwrap()
    }

    fn evens() -> IndexSet {
        IndexSet::arithmetic(2, vec![0]).unwrap()
    }

    #[test]
    fn level_sets_two_point_instance() {
        let fam = even_family(10);
        let t = Functional::point_mass(2, 0);
        let params = WitnessParams {
            s: Some(q(1, 4)),
            delta: None,
        };
        let ls = build_level_sets(&fam, &t, &evens(), 10, &q(1, 2), &params).unwrap();
        assert_eq!(ls.delta, q(1, 8));
        assert_eq!(ls.family.lower_bound(), &q(1, 4));
        for a in ls.family.sets().values() {
            assert!(a.contains(0));
            assert_eq!(t.apply_indicator(a), Rational::one());
        }
        assert_eq!(ls.chains.len(), 5);
    }

    #[test]
    fn constant_family_fills_ground_set() {
        let m = q(3, 2);
        let fam = BoundedFamily::from_fn(FiniteMeasureSpace::uniform(3), 6, m.clone(), |_, _| m.clone()).unwrap();
        let t = Functional::new(vec![q(1, 3); 3]).unwrap();
        let i = IndexSet::naturals();
        let ls = build_level_sets(&fam, &t, &i, 6, &Rational::one(), &WitnessParams::default()).unwrap();
        for a in ls.family.sets().values() {
            assert_eq!(a.len(), 3);
        }
        let cert = backward_pipeline(&fam, &t, &i, 6, &Rational::one(), &WitnessParams::default()).unwrap();
        assert_eq!(cert.j, IndexSet::Finite((1..=6).collect()));
        assert!(cert.holds);
    }

    #[test]
    fn hypothesis_violation_detected() {
        let fam = BoundedFamily::from_fn(FiniteMeasureSpace::uniform(2), 4, Rational::one(), |_, x| {
            if x == 0 { Rational::one() } else { -Rational::one() }
        })
        .unwrap();
        let t = Functional::new(vec![q(1, 2), q(1, 2)]).unwrap();
        let err = backward_pipeline(&fam, &t, &IndexSet::naturals(), 4, &q(1, 2), &WitnessParams::default())
            .unwrap_err();
        assert_eq!(
            err,
            WitnessError::HypothesisViolation {
                index: 1,
                value: Rational::zero(),
                r: q(1, 2)
            }
        );
    }

    #[test]
    fn parameter_checks() {
        let fam = even_family(4);
        let t = Functional::point_mass(2, 0);
        let bad_s = WitnessParams { s: Some(q(1, 2)), delta: None };
        assert!(matches!(
            build_level_sets(&fam, &t, &evens(), 4, &q(1, 2), &bad_s),
            Err(WitnessError::BadParameters(_))
        ));
        let bad_delta = WitnessParams { s: Some(q(1, 4)), delta: Some(q(1, 4)) };
        assert!(matches!(
            build_level_sets(&fam, &t, &evens(), 4, &q(1, 2), &bad_delta),
            Err(WitnessError::BadParameters(_))
        ));
        let zero = Functional::new(vec![Rational::zero(); 2]).unwrap();
        assert_eq!(
            build_level_sets(&fam, &zero, &evens(), 4, &q(1, 2), &WitnessParams::default()).unwrap_err(),
            WitnessError::ZeroFunctional
        );
        assert!(matches!(
            build_level_sets(&fam, &t, &evens(), 5, &q(1, 2), &WitnessParams::default()),
            Err(WitnessError::BeyondHorizon { .. })
        ));
    }

    #[test]
    fn backward_two_point_instance() {
        let fam = even_family(10);
        let t = Functional::point_mass(2, 0);
        let cert = backward_pipeline(&fam, &t, &evens(), 10, &q(1, 2), &WitnessParams::default()).unwrap();
        assert!(cert.holds);
        assert_eq!(cert.j, IndexSet::Finite(vec![2, 4, 6, 8, 10]));
        assert_eq!(cert.points, vec!["x1"; 5]);
        assert!(cert.tail_min.values().all(|v| *v == Rational::one()));
        assert_eq!(cert.tail_window, (3, 5));
        verify_backward(&fam, &t, &evens(), &cert).unwrap();

        let fwd = forward_functional(&fam, &cert.points, &cert.j, 10, &(&cert.delta / Rational::from_integer(2))).unwrap();
        assert!(fwd.holds);
        assert_eq!(fwd.checked, vec![2, 4, 6, 8, 10]);
        verify_forward(&fam, &cert.j, &fwd).unwrap();
    }

    #[test]
    fn tampered_certificate_fails_verification() {
        let fam = even_family(6);
        let t = Functional::point_mass(2, 0);
        let mut cert = backward_pipeline(&fam, &t, &evens(), 6, &q(1, 2), &WitnessParams::default()).unwrap();
        cert.points[0] = "x2".into();
        assert!(verify_backward(&fam, &t, &evens(), &cert).is_err());
        let mut fwd = forward_functional(&fam, &["x1"], &evens(), 6, &q(1, 2)).unwrap();
        fwd.values.insert(2, q(9, 10));
        assert!(verify_forward(&fam, &evens(), &fwd).is_err());
    }

    #[test]
    fn forward_examples() {
        let fam = even_family(8);
        let c = forward_functional(&fam, &["x1", "x1", "x1"], &evens(), 8, &q(1, 2)).unwrap();
        assert_eq!(c.checked, vec![2, 4, 6, 8]);
        assert_eq!(c.functional, Functional::point_mass(2, 0));
        let err = forward_functional(&fam, &["x1", "x2"], &evens(), 8, &q(1, 2)).unwrap_err();
        assert!(matches!(err, WitnessError::TailViolation { index: 2, k: 2, .. }));
        assert_eq!(
            forward_functional::<&str>(&fam, &[], &evens(), 8, &q(1, 2)).unwrap_err(),
            WitnessError::EmptyPoints
        );
    }

    #[test]
    fn dconv_examples() {
        let m = Rational::one();
        let decaying = BoundedFamily::from_fn(FiniteMeasureSpace::uniform(2), 16384, m.clone(), |k, _| {
            Rational::ratio(1, k)
        })
        .unwrap();
        let ts = vec![
            Functional::point_mass(2, 0),
            Functional::new(vec![q(1, 3), q(2, 3)]).unwrap(),
        ];
        for v in weak_d_convergence_check(&decaying, &ts, &q(1, 10), 16384, &q(1, 100)).unwrap() {
            assert!(v.verdict.holds);
        }
        let fam = even_family(4096);
        let v = weak_d_convergence_check(&fam, &ts[..1], &q(1, 2), 4096, &q(1, 100)).unwrap();
        assert!(!v[0].verdict.holds);
        assert_eq!(v[0].verdict.density.upper_at_horizon, q(1, 2));
        assert_eq!(
            weak_d_convergence_check(&fam, &[], &q(1, 2), 8, &q(1, 100)).unwrap_err(),
            WitnessError::NoFunctionals
        );
    }

    #[test]
    fn family_validation() {
        let sp = FiniteMeasureSpace::uniform(2);
        assert!(BoundedFamily::new(sp.clone(), vec![vec![q(2, 1), Rational::zero()]], Rational::one()).is_err());
        assert!(BoundedFamily::new(sp.clone(), vec![vec![Rational::zero()]], Rational::one()).is_err());
        assert!(BoundedFamily::new(sp.clone(), vec![], Rational::zero()).is_err());
        let named: BTreeMap<u64, BTreeMap<String, Rational>> =
            [(2, [("x1".to_string(), Rational::zero()), ("x2".to_string(), Rational::zero())].into())].into();
        assert!(BoundedFamily::from_named(sp, &named, Rational::one()).is_err());
    }

    proptest! {
        #[test]
        fn delta_bound_soundness(
            w in proptest::collection::vec(0i64..=6, 1..6),
            g in proptest::collection::vec(-100i64..=100, 6),
            r in 1i64..=10,
        ) {
            prop_assume!(w.iter().any(|&x| x > 0));
            let t = Functional::new(w.iter().map(|&x| q(x, 4)).collect()).unwrap();
            let total = t.total();
            let r = q(r, 10);
            let (s, delta) = resolve_params(&r, &total, &WitnessParams::default()).unwrap();
            // g scaled into [-δ, δ].
            let gq: Vec<Rational> = g.iter().take(w.len()).map(|&v| &delta * q(v, 100)).collect();
            let tg = t.apply(&gq);
            prop_assert!(-(&delta * &total) <= tg && tg <= &delta * &total);
            prop_assert!(&delta * &total < s);
        }

        #[test]
        fn measure_bound_monotone_in_s(r in 2i64..=20, m in 1i64..=5, a in 1i64..=9, b in 1i64..=9) {
            let r = q(r, 10);
            let (lo, hi) = (a.min(b), a.max(b));
            let s1 = &r * q(lo, 10);
            let s2 = &r * q(hi, 10);
            let m = q(m, 1);
            prop_assert!((&r - &s2) / &m <= (&r - &s1) / &m);
        }
    }
}
