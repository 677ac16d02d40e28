//! Instance bundles: named spaces, index sets, families, functionals, bounded
//! function families and sequences in one JSON document, plus the seeded
//! instance generator.
//!
//! Parse errors carry the JSON pointer of the offending value.

use std::collections::BTreeMap;
use std::path::Path;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::bergelson::SetFamily;
use crate::density::{IndexSet, RealSequence, TailRule};
use crate::measure::{FiniteMeasureSpace, Functional, MSet};
pub use crate::measure::SpaceRepr;
use crate::rational::Rational;
use crate::witness::BoundedFamily;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum InstanceError {
    #[error("cannot read {path}: {message}")]
    Io { path: String, message: String },
    #[error("parse error at `{pointer}`: {message}")]
    Parse { pointer: String, message: String },
    #[error("validation error at `{pointer}`: {message}")]
    Validation { pointer: String, message: String },
}

impl InstanceError {
    pub fn pointer(&self) -> Option<&str> {
        match self {
            InstanceError::Io { .. } => None,
            InstanceError::Parse { pointer, .. } | InstanceError::Validation { pointer, .. } => {
                Some(pointer)
            }
        }
    }
}

fn escape(token: &str) -> String {
    token.replace('~', "~0").replace('/', "~1")
}

/// JSON pointer from path tokens.
pub fn pointer<S: AsRef<str>>(tokens: &[S]) -> String {
    tokens.iter().map(|t| format!("/{}", escape(t.as_ref()))).collect()
}

fn path_to_pointer(path: &serde_path_to_error::Path) -> String {
    use serde_path_to_error::Segment;
    path.iter()
        .filter_map(|seg| match seg {
            Segment::Seq { index } => Some(format!("/{index}")),
            Segment::Map { key } => Some(format!("/{}", escape(key))),
            Segment::Enum { variant } => Some(format!("/{}", escape(variant))),
            Segment::Unknown => None,
        })
        .collect()
}

/// Deserializes `T` from JSON text, reporting failures with a JSON pointer.
pub fn from_json_str<T: for<'de> Deserialize<'de>>(text: &str) -> Result<T, InstanceError> {
    let mut de = serde_json::Deserializer::from_str(text);
    let value = serde_path_to_error::deserialize(&mut de).map_err(|e| InstanceError::Parse {
        pointer: path_to_pointer(e.path()),
        message: e.inner().to_string(),
    })?;
    de.end().map_err(|e| InstanceError::Parse {
        pointer: String::new(),
        message: e.to_string(),
    })?;
    Ok(value)
}

pub fn read_json<T: for<'de> Deserialize<'de>>(path: &Path) -> Result<T, InstanceError> {
    let text = std::fs::read_to_string(path).map_err(|e| InstanceError::Io {
        path: path.display().to_string(),
        message: e.to_string(),
    })?;
    from_json_str(&text)
}

/// Index set given inline or by name.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum IndexSetRef {
    Name(String),
    Inline(IndexSet),
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FamilyRepr {
    pub space: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub index_set: Option<IndexSetRef>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub horizon: Option<u64>,
    pub lower_bound: Rational,
    pub sets: BTreeMap<u64, Vec<String>>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FunctionalRepr {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub space: Option<String>,
    /// Points left out carry weight zero.
    pub weights: BTreeMap<String, Rational>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct BoundedFamilyRepr {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub space: Option<String>,
    pub bound: Rational,
    pub functions: BTreeMap<u64, BTreeMap<String, Rational>>,
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct BundleRepr {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    seed: Option<u64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    profile: Option<GenerateProfile>,
    #[serde(default)]
    spaces: BTreeMap<String, SpaceRepr>,
    #[serde(default)]
    index_sets: BTreeMap<String, IndexSet>,
    #[serde(default)]
    families: BTreeMap<String, FamilyRepr>,
    #[serde(default)]
    functionals: BTreeMap<String, FunctionalRepr>,
    #[serde(default)]
    bounded_families: BTreeMap<String, BoundedFamilyRepr>,
    #[serde(default)]
    sequences: BTreeMap<String, RealSequence>,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct NamedFamily {
    pub space: String,
    pub index_set: Option<IndexSetRef>,
    pub family: SetFamily,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct NamedFunctional {
    pub space: String,
    pub functional: Functional,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct NamedBoundedFamily {
    pub space: String,
    pub family: BoundedFamily,
}

/// Validated collection of named objects; every cross reference resolves.
#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct InstanceBundle {
    pub seed: Option<u64>,
    pub profile: Option<GenerateProfile>,
    pub spaces: BTreeMap<String, FiniteMeasureSpace>,
    pub index_sets: BTreeMap<String, IndexSet>,
    pub families: BTreeMap<String, NamedFamily>,
    pub functionals: BTreeMap<String, NamedFunctional>,
    pub bounded_families: BTreeMap<String, NamedBoundedFamily>,
    pub sequences: BTreeMap<String, RealSequence>,
}

fn invalid(tokens: &[&str], message: impl ToString) -> InstanceError {
    InstanceError::Validation {
        pointer: pointer(tokens),
        message: message.to_string(),
    }
}

/// Builds a space, pointing at the first negative weight if any.
pub fn space_from_repr(repr: SpaceRepr, at: &[&str]) -> Result<FiniteMeasureSpace, InstanceError> {
    if let Some((p, w)) = repr.weights.iter().find(|(_, w)| w.is_negative()) {
        let mut tokens = at.to_vec();
        tokens.extend(["weights", p.as_str()]);
        return Err(invalid(&tokens, format!("negative weight {w}")));
    }
    FiniteMeasureSpace::from_repr(repr).map_err(|e| invalid(at, e))
}

/// Aligns named weights with the points of `space`.
pub fn functional_from_repr(
    repr: &FunctionalRepr,
    space: &FiniteMeasureSpace,
    at: &[&str],
) -> Result<Functional, InstanceError> {
    let mut weights = vec![Rational::zero(); space.len()];
    for (p, w) in &repr.weights {
        let mut tokens = at.to_vec();
        tokens.extend(["weights", p.as_str()]);
        let i = space.index_of(p).map_err(|e| invalid(&tokens, e))?;
        if w.is_negative() {
            return Err(invalid(&tokens, format!("negative weight {w}")));
        }
        weights[i] = w.clone();
    }
    Functional::new(weights).map_err(|e| invalid(at, e))
}

pub fn bounded_family_from_repr(
    repr: &BoundedFamilyRepr,
    space: &FiniteMeasureSpace,
    at: &[&str],
) -> Result<BoundedFamily, InstanceError> {
    BoundedFamily::from_named(space.clone(), &repr.functions, repr.bound.clone())
        .map_err(|e| invalid(at, e))
}

/// Family from per-index member lists. Without an index set, `I_0` is the set
/// of listed indices, sampled up to the horizon (default: largest index).
pub fn family_from_members(
    space: &FiniteMeasureSpace,
    index_set: Option<IndexSet>,
    horizon: Option<u64>,
    sets: &BTreeMap<u64, Vec<String>>,
    lower_bound: Rational,
    at: &[&str],
) -> Result<SetFamily, InstanceError> {
    for (n, pts) in sets {
        for p in pts {
            if space.index_of(p).is_err() {
                let mut tokens = at.to_vec();
                let n = n.to_string();
                tokens.extend(["sets", n.as_str()]);
                return Err(invalid(&tokens, format!("unknown point `{p}`")));
            }
        }
    }
    let (index_set, horizon) = match (index_set, horizon) {
        (Some(i), Some(h)) => (i, h),
        (Some(i), None) => match i.horizon() {
            Some(h) => (i, h),
            None => return Err(invalid(at, "horizon is required with a non-sampled index set")),
        },
        (None, h) => {
            let h = h.or_else(|| sets.keys().max().copied()).unwrap_or(1).max(1);
            let i = IndexSet::sampled(h, sets.keys().copied().collect()).map_err(|e| invalid(at, e))?;
            (i, h)
        }
    };
    SetFamily::from_members(space.clone(), index_set, horizon, sets, lower_bound)
        .map_err(|e| invalid(at, e))
}

impl InstanceBundle {
    pub fn from_json(text: &str) -> Result<Self, InstanceError> {
        let repr: BundleRepr = from_json_str(text)?;
        InstanceBundle::from_repr(repr)
    }

    fn from_repr(repr: BundleRepr) -> Result<Self, InstanceError> {
        let mut bundle = InstanceBundle {
            seed: repr.seed,
            profile: repr.profile,
            index_sets: repr.index_sets,
            sequences: repr.sequences,
            ..Default::default()
        };
        for (name, s) in repr.spaces {
            let space = space_from_repr(s, &["spaces", &name])?;
            bundle.spaces.insert(name, space);
        }
        let space_ref = |bundle: &InstanceBundle, at: &[&str], name: &str| {
            bundle.spaces.get(name).cloned().ok_or_else(|| {
                let mut tokens = at.to_vec();
                tokens.push("space");
                invalid(&tokens, format!("unknown space `{name}`"))
            })
        };
        let sole_space = |bundle: &InstanceBundle, at: &[&str], name: &Option<String>| match name {
            Some(n) => Ok((n.clone(), space_ref(bundle, at, n)?)),
            None if bundle.spaces.len() == 1 => {
                let (n, s) = bundle.spaces.iter().next().expect("one space");
                Ok((n.clone(), s.clone()))
            }
            None => Err(invalid(at, "space name required when the bundle has several spaces")),
        };

        for (name, f) in repr.families {
            let at = ["families", name.as_str()];
            let space = space_ref(&bundle, &at, &f.space)?;
            let index_set = match &f.index_set {
                None => None,
                Some(IndexSetRef::Inline(i)) => Some(i.clone()),
                Some(IndexSetRef::Name(n)) => Some(bundle.index_sets.get(n).cloned().ok_or_else(
                    || invalid(&["families", &name, "index_set"], format!("unknown index set `{n}`")),
                )?),
            };
            let family = family_from_members(&space, index_set, f.horizon, &f.sets, f.lower_bound, &at)?;
            bundle.families.insert(
                name.clone(),
                NamedFamily {
                    space: f.space,
                    index_set: f.index_set,
                    family,
                },
            );
        }
        for (name, t) in repr.functionals {
            let at = ["functionals", name.as_str()];
            let (space_name, space) = sole_space(&bundle, &at, &t.space)?;
            let functional = functional_from_repr(&t, &space, &at)?;
            bundle.functionals.insert(
                name.clone(),
                NamedFunctional {
                    space: space_name,
                    functional,
                },
            );
        }
        for (name, b) in repr.bounded_families {
            let at = ["bounded_families", name.as_str()];
            let (space_name, space) = sole_space(&bundle, &at, &b.space)?;
            let family = bounded_family_from_repr(&b, &space, &at)?;
            bundle.bounded_families.insert(
                name.clone(),
                NamedBoundedFamily {
                    space: space_name,
                    family,
                },
            );
        }
        Ok(bundle)
    }

    fn to_repr(&self) -> BundleRepr {
        BundleRepr {
            seed: self.seed,
            profile: self.profile.clone(),
            spaces: self.spaces.iter().map(|(k, s)| (k.clone(), s.to_repr())).collect(),
            index_sets: self.index_sets.clone(),
            families: self
                .families
                .iter()
                .map(|(k, f)| {
                    (
                        k.clone(),
                        FamilyRepr {
                            space: f.space.clone(),
                            index_set: f.index_set.clone(),
                            horizon: Some(f.family.horizon()),
                            lower_bound: f.family.lower_bound().clone(),
                            sets: f.family.member_names(),
                        },
                    )
                })
                .collect(),
            functionals: self
                .functionals
                .iter()
                .map(|(k, t)| {
                    let space = &self.spaces[&t.space];
                    (
                        k.clone(),
                        FunctionalRepr {
                            space: Some(t.space.clone()),
                            weights: space
                                .points()
                                .iter()
                                .cloned()
                                .zip(t.functional.weights().iter().cloned())
                                .collect(),
                        },
                    )
                })
                .collect(),
            bounded_families: self
                .bounded_families
                .iter()
                .map(|(k, b)| {
                    (
                        k.clone(),
                        BoundedFamilyRepr {
                            space: Some(b.space.clone()),
                            bound: b.family.bound().clone(),
                            functions: b.family.to_named(),
                        },
                    )
                })
                .collect(),
            sequences: self.sequences.clone(),
        }
    }

    pub fn to_json_value(&self) -> serde_json::Value {
        serde_json::to_value(self.to_repr()).expect("bundle serializes")
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string(&self.to_repr()).expect("bundle serializes")
    }
}

/// Reads and validates a bundle file.
pub fn parse_instance(path: &Path) -> Result<InstanceBundle, InstanceError> {
    let text = std::fs::read_to_string(path).map_err(|e| InstanceError::Io {
        path: path.display().to_string(),
        message: e.to_string(),
    })?;
    InstanceBundle::from_json(&text)
}

pub const MAX_GENERATED_POINTS: usize = 12;
pub const MAX_GENERATED_FAMILY: usize = 20;
const SET_ATTEMPTS: u32 = 64;
const FUNCTION_ATTEMPTS: u32 = 64;

/// Shape of generated instances.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GenerateProfile {
    /// Upper bound on the ground set size.
    pub points: usize,
    /// Upper bound on `|I_0 ∧ N|`.
    pub family_size: usize,
    /// Required lower bound on every `μ(A_n)`.
    pub a: Rational,
    /// `I_0` is drawn with exact density above `b`.
    pub b: Rational,
    /// Points forced to weight zero.
    #[serde(default)]
    pub zero_weight_points: usize,
    /// Hypothesis level for the generated functional and bounded family.
    pub r: Rational,
    /// Uniform bound of the generated functions.
    pub bound: Rational,
}

impl Default for GenerateProfile {
    fn default() -> Self {
        GenerateProfile {
            points: 8,
            family_size: 16,
            a: Rational::new(1, 3),
            b: Rational::new(1, 5),
            zero_weight_points: 1,
            r: Rational::new(1, 4),
            bound: Rational::one(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum GenerateError {
    #[error("profile out of bounds: {0}")]
    ProfileOutOfBounds(String),
    #[error("profile infeasible: {0}")]
    ProfileInfeasible(String),
}

/// Deterministic instance from a seed: space `X`, index set `I0`, family `F`
/// with `μ(A_n) >= a`, functional `T`, and bounded family `f` with
/// `|T(f_n)| > r` on `I0 ∧ N`.
pub fn generate_instance(seed: u64, profile: &GenerateProfile) -> Result<InstanceBundle, GenerateError> {
    let oob = |m: &str| Err(GenerateError::ProfileOutOfBounds(m.to_string()));
    if profile.points == 0 || profile.points > MAX_GENERATED_POINTS {
        return oob("points must be in 1..=12");
    }
    if profile.family_size == 0 || profile.family_size > MAX_GENERATED_FAMILY {
        return oob("family_size must be in 1..=20");
    }
    if profile.zero_weight_points >= profile.points {
        return oob("at least one point must carry weight");
    }
    if profile.a.is_negative() || profile.b.is_negative() || !profile.r.is_positive() || !profile.bound.is_positive() {
        return oob("a, b must be nonnegative; r, bound positive");
    }
    if profile.a > 1 {
        return Err(GenerateError::ProfileInfeasible("a exceeds the total mass 1".into()));
    }
    if profile.b >= 1 {
        return Err(GenerateError::ProfileInfeasible("no index set has density above b >= 1".into()));
    }

    let mut rng = ChaCha8Rng::seed_from_u64(seed);

    // Space: integer weights normalized to total mass 1.
    let n_points = rng.gen_range(profile.zero_weight_points + 1..=profile.points);
    let mut raw: Vec<i64> = (0..n_points).map(|_| rng.gen_range(1..=6)).collect();
    let mut zeroed = 0;
    while zeroed < profile.zero_weight_points {
        let i = rng.gen_range(0..n_points);
        if raw[i] != 0 {
            raw[i] = 0;
            zeroed += 1;
        }
    }
    let total: i64 = raw.iter().sum();
    let space = FiniteMeasureSpace::new(
        (1..=n_points).map(|i| format!("x{i}")).collect(),
        raw.iter().map(|&w| Rational::new(w, total)).collect(),
    )
    .expect("generated weights are valid");

    // I_0: eventually periodic with exact density above b.
    let index_set = {
        let mut chosen = None;
        for _ in 0..100 {
            let period = rng.gen_range(1..=4u64);
            let residues: Vec<u64> = (0..period).filter(|_| rng.gen::<bool>()).collect();
            if Rational::ratio(residues.len() as u64, period) <= profile.b {
                continue;
            }
            let threshold = rng.gen_range(0..=3u64);
            let exceptions = (1..threshold).filter(|_| rng.gen::<bool>()).collect();
            chosen = Some(
                IndexSet::eventually_periodic(threshold, period, residues, exceptions)
                    .expect("generated index set is valid"),
            );
            break;
        }
        chosen.unwrap_or_else(IndexSet::naturals)
    };
    let target = rng.gen_range(1..=profile.family_size) as u64;
    let mut horizon = 1;
    while index_set.prefix_count(horizon).expect("unbounded") < target {
        horizon += 1;
    }
    let indices = index_set.members_upto(horizon).expect("unbounded");

    // Sets by rejection; inclusion probability rises to 1 on the last attempt.
    let mut sets = BTreeMap::new();
    for &k in &indices {
        let mut found = None;
        for attempt in 1..=SET_ATTEMPTS {
            let set = MSet::from_indices(
                n_points,
                (0..n_points).filter(|_| rng.gen_range(0..SET_ATTEMPTS) < attempt.max(SET_ATTEMPTS / 2)),
            );
            if space.measure(&set) >= profile.a {
                found = Some(set);
                break;
            }
        }
        let set = found.ok_or_else(|| {
            GenerateError::ProfileInfeasible(format!("no set of measure >= {} found", profile.a))
        })?;
        sets.insert(k, set);
    }
    let family = SetFamily::new(space.clone(), index_set.clone(), horizon, sets, profile.a.clone())
        .map_err(|e| GenerateError::ProfileInfeasible(e.to_string()))?;

    // Functional with T(1) in {1/2, 1, 3/2, 2}.
    let mut t_raw: Vec<i64> = (0..n_points).map(|_| rng.gen_range(0..=4)).collect();
    if t_raw.iter().all(|&w| w == 0) {
        t_raw[rng.gen_range(0..n_points)] = 1;
    }
    let t_total = Rational::new(rng.gen_range(1..=4), 2);
    let t_sum: i64 = t_raw.iter().sum();
    let functional = Functional::new(
        t_raw
            .iter()
            .map(|&w| Rational::new(w, t_sum) * &t_total)
            .collect(),
    )
    .expect("nonnegative weights");
    if profile.r >= &profile.bound * &t_total {
        return Err(GenerateError::ProfileInfeasible(format!(
            "r = {} is not below M·T(1) = {}",
            profile.r,
            &profile.bound * &t_total
        )));
    }

    // f_n with values in M·{-1, -3/4, ..., 1}; |T(f_n)| > r on I_0 by rejection.
    let mut functions = Vec::with_capacity(horizon as usize);
    for k in 1..=horizon {
        let required = indices.binary_search(&k).is_ok();
        let mut row = None;
        for attempt in 1..=FUNCTION_ATTEMPTS {
            let sign = if rng.gen::<bool>() { 1 } else { -1 };
            let candidate: Vec<Rational> = (0..n_points)
                .map(|_| {
                    // Later attempts lean towards a constant-sign function.
                    let j = if rng.gen_range(0..FUNCTION_ATTEMPTS) < attempt {
                        sign * 4
                    } else {
                        rng.gen_range(-4..=4)
                    };
                    &profile.bound * Rational::new(j, 4)
                })
                .collect();
            if !required || functional.apply(&candidate).abs() > profile.r {
                row = Some(candidate);
                break;
            }
        }
        let row = row.unwrap_or_else(|| vec![profile.bound.clone(); n_points]);
        functions.push(row);
    }
    let bounded = BoundedFamily::new(space.clone(), functions, profile.bound.clone())
        .expect("generated values respect the bound");

    let sequence = {
        let len = rng.gen_range(0..=8);
        let period = rng.gen_range(1..=4);
        let value = |rng: &mut ChaCha8Rng| Rational::new(rng.gen_range(-4..=4), 4);
        let prefix = (0..len).map(|_| value(&mut rng)).collect();
        let values = (0..period).map(|_| value(&mut rng)).collect();
        RealSequence::new(prefix, Some(TailRule::Periodic { values }), Rational::one())
            .expect("generated sequence is bounded")
    };

    Ok(InstanceBundle {
        seed: Some(seed),
        profile: Some(profile.clone()),
        spaces: [("X".to_string(), space)].into(),
        index_sets: [("I0".to_string(), index_set)].into(),
        families: [(
            "F".to_string(),
            NamedFamily {
                space: "X".into(),
                index_set: Some(IndexSetRef::Name("I0".into())),
                family,
            },
        )]
        .into(),
        functionals: [(
            "T".to_string(),
            NamedFunctional {
                space: "X".into(),
                functional,
            },
        )]
        .into(),
        bounded_families: [(
            "f".to_string(),
            NamedBoundedFamily {
                space: "X".into(),
                family: bounded,
            },
        )]
        .into(),
        sequences: [("a".to_string(), sequence)].into(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rational::q;

    const MINIMAL: &str = r#"{"spaces":{"X":{"points":["x1","x2"],"weights":{"x1":"1/2","x2":"1/2"}}}}"#;

    #[test]
    fn minimal_space_bundle() {
        let b = InstanceBundle::from_json(MINIMAL).unwrap();
        assert_eq!(b.spaces.len(), 1);
        assert!(b.spaces["X"].is_probability());
    }

    #[test]
    fn negative_weight_is_validation_error() {
        let text = r#"{"spaces":{"X":{"points":["x1"],"weights":{"x1":"−1/2"}}}}"#;
        let err = InstanceBundle::from_json(text).unwrap_err();
        assert!(matches!(err, InstanceError::Validation { .. }), "{err}");
        assert_eq!(err.pointer(), Some("/spaces/X/weights/x1"));
    }

    #[test]
    fn unknown_space_reference() {
        let text = r#"{"spaces":{},"families":{"F":{"space":"Y","lower_bound":"0","sets":{}}}}"#;
        let err = InstanceBundle::from_json(text).unwrap_err();
        assert!(matches!(err, InstanceError::Validation { .. }));
        assert_eq!(err.pointer(), Some("/families/F/space"));
    }

    #[test]
    fn parse_errors_point_at_the_value() {
        let text = r#"{"spaces":{"X":{"points":["x1"],"weights":{"x1":"1/0"}}}}"#;
        let err = InstanceBundle::from_json(text).unwrap_err();
        assert!(matches!(err, InstanceError::Parse { .. }));
        assert_eq!(err.pointer(), Some("/spaces/X/weights/x1"));
        let err = InstanceBundle::from_json(r#"{"index_sets":{"I":{"kind":"finite","elements":[3,1]}}}"#).unwrap_err();
        assert_eq!(err.pointer(), Some("/index_sets/I"));
        assert!(InstanceBundle::from_json("{").is_err());
        assert!(InstanceBundle::from_json(r#"{"bogus":1}"#).is_err());
    }

    #[test]
    fn family_and_functional_references() {
        let text = r#"{
            "spaces":{"X":{"points":["x1","x2"],"weights":{"x1":"1/2","x2":"1/2"}}},
            "index_sets":{"I0":{"kind":"periodic","period":1,"residues":[0]}},
            "families":{"F":{"space":"X","index_set":"I0","horizon":3,"lower_bound":"1/2",
                             "sets":{"1":["x1"],"2":["x1"],"3":["x2"]}}},
            "functionals":{"T":{"weights":{"x1":"1"}}}
        }"#;
        let b = InstanceBundle::from_json(text).unwrap();
        assert_eq!(b.families["F"].family.horizon(), 3);
        assert_eq!(b.functionals["T"].functional.weights(), &[Rational::one(), Rational::zero()]);
        let again = InstanceBundle::from_json(&b.to_json()).unwrap();
        assert_eq!(again, b);

        let bad = text.replace(r#""3":["x2"]"#, r#""3":["x9"]"#);
        let err = InstanceBundle::from_json(&bad).unwrap_err();
        assert_eq!(err.pointer(), Some("/families/F/sets/3"));
        let bad = text.replace(r#""index_set":"I0""#, r#""index_set":"J""#);
        assert_eq!(InstanceBundle::from_json(&bad).unwrap_err().pointer(), Some("/families/F/index_set"));
    }

    #[test]
    fn generation_is_deterministic() {
        let p = GenerateProfile::default();
        let a = generate_instance(1, &p).unwrap().to_json();
        let b = generate_instance(1, &p).unwrap().to_json();
        assert_eq!(a, b);
        assert_ne!(a, generate_instance(2, &p).unwrap().to_json());
    }

    #[test]
    fn generated_bundles_roundtrip_and_satisfy_bounds() {
        let p = GenerateProfile::default();
        for seed in 0..50 {
            let b = generate_instance(seed, &p).unwrap();
            let f = &b.families["F"].family;
            for s in f.sets().values() {
                assert!(f.space().measure(s) >= p.a);
            }
            let parsed = InstanceBundle::from_json(&b.to_json()).unwrap();
            assert_eq!(parsed, b);
        }
    }

    #[test]
    fn full_bound_forces_full_sets() {
        let p = GenerateProfile {
            a: Rational::one(),
            zero_weight_points: 0,
            ..GenerateProfile::default()
        };
        for seed in 0..10 {
            let b = generate_instance(seed, &p).unwrap();
            let f = &b.families["F"].family;
            for s in f.sets().values() {
                assert_eq!(*s, f.space().support());
            }
        }
    }

    #[test]
    fn seeds_do_not_collide() {
        let p = GenerateProfile::default();
        let mut seen = std::collections::BTreeSet::new();
        for seed in 0..100 {
            assert!(seen.insert(generate_instance(seed, &p).unwrap().to_json()));
        }
    }

    #[test]
    fn infeasible_profiles() {
        let p = GenerateProfile {
            a: q(3, 2),
            ..GenerateProfile::default()
        };
        assert!(matches!(generate_instance(1, &p), Err(GenerateError::ProfileInfeasible(_))));
        let p = GenerateProfile {
            points: 13,
            ..GenerateProfile::default()
        };
        assert!(matches!(generate_instance(1, &p), Err(GenerateError::ProfileOutOfBounds(_))));
    }
}
