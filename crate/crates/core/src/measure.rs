//! Finite measure spaces with exact weights, positive functionals as weight
//! vectors, and inner/outer measure relative to a finite set algebra.

use std::collections::{BTreeMap, HashMap};
use std::fmt;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::rational::Rational;

/// Algebras are generated by at most this many sets.
pub const MAX_GENERATORS: usize = 16;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum MeasureError {
    #[error("duplicate point `{0}`")]
    DuplicatePoint(String),
    #[error("unknown point `{0}`")]
    UnknownPoint(String),
    #[error("missing weight for point `{0}`")]
    MissingWeight(String),
    #[error("negative weight {weight} at point `{point}`")]
    NegativeWeight { point: String, weight: Rational },
    #[error("ground set has {expected} points, got {got}")]
    SizeMismatch { expected: usize, got: usize },
    #[error("{0} generators exceed the limit of {MAX_GENERATORS}")]
    TooManyGenerators(usize),
}

/// Subset of a ground set `{0, .., universe - 1}`, stored as a bit vector.
#[derive(Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct MSet {
    universe: usize,
    words: Vec<u64>,
}

impl MSet {
    pub fn empty(universe: usize) -> Self {
        MSet {
            universe,
            words: vec![0; universe.div_ceil(64)],
        }
    }

    pub fn full(universe: usize) -> Self {
        let mut s = MSet::empty(universe);
        for i in 0..universe {
            s.insert(i);
        }
        s
    }

    pub fn from_indices(universe: usize, indices: impl IntoIterator<Item = usize>) -> Self {
        let mut s = MSet::empty(universe);
        for i in indices {
            s.insert(i);
        }
        s
    }

    pub fn universe(&self) -> usize {
        self.universe
    }

    pub fn insert(&mut self, i: usize) {
        assert!(i < self.universe, "point {i} outside universe {}", self.universe);
        self.words[i / 64] |= 1 << (i % 64);
    }

    pub fn remove(&mut self, i: usize) {
        if i < self.universe {
            self.words[i / 64] &= !(1 << (i % 64));
        }
    }

    pub fn contains(&self, i: usize) -> bool {
        i < self.universe && self.words[i / 64] >> (i % 64) & 1 == 1
    }

    pub fn len(&self) -> usize {
        self.words.iter().map(|w| w.count_ones() as usize).sum()
    }

    pub fn is_empty(&self) -> bool {
        self.words.iter().all(|&w| w == 0)
    }

    pub fn iter(&self) -> impl Iterator<Item = usize> + '_ {
        (0..self.universe).filter(move |&i| self.contains(i))
    }

    fn zip_with(&self, other: &MSet, f: impl Fn(u64, u64) -> u64) -> MSet {
        assert_eq!(self.universe, other.universe, "universe mismatch");
        MSet {
            universe: self.universe,
            words: self
                .words
                .iter()
                .zip(&other.words)
                .map(|(&a, &b)| f(a, b))
                .collect(),
        }
    }

    pub fn union(&self, other: &MSet) -> MSet {
        self.zip_with(other, |a, b| a | b)
    }

    pub fn intersection(&self, other: &MSet) -> MSet {
        self.zip_with(other, |a, b| a & b)
    }

    pub fn difference(&self, other: &MSet) -> MSet {
        self.zip_with(other, |a, b| a & !b)
    }

    pub fn complement(&self) -> MSet {
        MSet::full(self.universe).difference(self)
    }

    pub fn is_subset(&self, other: &MSet) -> bool {
        self.words.iter().zip(&other.words).all(|(&a, &b)| a & !b == 0)
    }

    pub fn is_disjoint(&self, other: &MSet) -> bool {
        self.words.iter().zip(&other.words).all(|(&a, &b)| a & b == 0)
    }
}

impl fmt::Debug for MSet {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_set().entries(self.iter()).finish()
    }
}

/// Weighted finite ground set. Weights are nonnegative; zero weights are allowed.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct FiniteMeasureSpace {
    points: Vec<String>,
    weights: Vec<Rational>,
    total_mass: Rational,
    lookup: HashMap<String, usize>,
}

impl FiniteMeasureSpace {
    pub fn new(points: Vec<String>, weights: Vec<Rational>) -> Result<Self, MeasureError> {
        if points.len() != weights.len() {
            return Err(MeasureError::SizeMismatch {
                expected: points.len(),
                got: weights.len(),
            });
        }
        let mut lookup = HashMap::with_capacity(points.len());
        for (i, p) in points.iter().enumerate() {
            if lookup.insert(p.clone(), i).is_some() {
                return Err(MeasureError::DuplicatePoint(p.clone()));
            }
        }
        if let Some(i) = weights.iter().position(Rational::is_negative) {
            return Err(MeasureError::NegativeWeight {
                point: points[i].clone(),
                weight: weights[i].clone(),
            });
        }
        let total_mass = weights.iter().sum();
        Ok(FiniteMeasureSpace {
            points,
            weights,
            total_mass,
            lookup,
        })
    }

    /// Points named `x1..xn`, each with weight `1/n`.
    pub fn uniform(n: usize) -> Self {
        let w = Rational::ratio(1, n as u64);
        FiniteMeasureSpace::new(
            (1..=n).map(|i| format!("x{i}")).collect(),
            vec![w; n],
        )
        .expect("uniform space is valid")
    }

    /// Same points, new weights.
    pub fn reweighted(&self, weights: Vec<Rational>) -> Result<Self, MeasureError> {
        FiniteMeasureSpace::new(self.points.clone(), weights)
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    pub fn points(&self) -> &[String] {
        &self.points
    }

    pub fn weights(&self) -> &[Rational] {
        &self.weights
    }

    pub fn weight(&self, i: usize) -> &Rational {
        &self.weights[i]
    }

    pub fn total_mass(&self) -> &Rational {
        &self.total_mass
    }

    pub fn is_probability(&self) -> bool {
        self.total_mass == 1
    }

    pub fn index_of(&self, point: &str) -> Result<usize, MeasureError> {
        self.lookup
            .get(point)
            .copied()
            .ok_or_else(|| MeasureError::UnknownPoint(point.to_string()))
    }

    pub fn set_of<S: AsRef<str>>(&self, points: &[S]) -> Result<MSet, MeasureError> {
        let mut s = MSet::empty(self.len());
        for p in points {
            s.insert(self.index_of(p.as_ref())?);
        }
        Ok(s)
    }

    pub fn names_of(&self, set: &MSet) -> Vec<String> {
        set.iter().map(|i| self.points[i].clone()).collect()
    }

    /// Points with strictly positive weight.
    pub fn support(&self) -> MSet {
        MSet::from_indices(
            self.len(),
            (0..self.len()).filter(|&i| self.weights[i].is_positive()),
        )
    }

    /// `μ(A)`.
    pub fn measure(&self, set: &MSet) -> Rational {
        debug_assert_eq!(set.universe(), self.len());
        set.iter().map(|i| &self.weights[i]).sum()
    }

    /// `∫ g dμ` for `g` given pointwise.
    pub fn integrate(&self, g: &[Rational]) -> Rational {
        self.weights.iter().zip(g).map(|(w, v)| w * v).sum()
    }
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
/// Serialized form of a measure space, before validation.
pub struct SpaceRepr {
    pub points: Vec<String>,
    pub weights: BTreeMap<String, Rational>,
}

impl FiniteMeasureSpace {
    pub(crate) fn from_repr(repr: SpaceRepr) -> Result<Self, MeasureError> {
        let mut weights = Vec::with_capacity(repr.points.len());
        for p in &repr.points {
            weights.push(
                repr.weights
                    .get(p)
                    .cloned()
                    .ok_or_else(|| MeasureError::MissingWeight(p.clone()))?,
            );
        }
        if let Some(extra) = repr.weights.keys().find(|k| !repr.points.contains(k)) {
            return Err(MeasureError::UnknownPoint(extra.clone()));
        }
        FiniteMeasureSpace::new(repr.points, weights)
    }

    pub(crate) fn to_repr(&self) -> SpaceRepr {
        SpaceRepr {
            points: self.points.clone(),
            weights: self
                .points
                .iter()
                .cloned()
                .zip(self.weights.iter().cloned())
                .collect(),
        }
    }
}

impl Serialize for FiniteMeasureSpace {
    fn serialize<S: serde::Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        self.to_repr().serialize(s)
    }
}

impl<'de> Deserialize<'de> for FiniteMeasureSpace {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        FiniteMeasureSpace::from_repr(SpaceRepr::deserialize(d)?).map_err(serde::de::Error::custom)
    }
}

/// Positive linear functional on functions over a finite ground set: a
/// nonnegative weight vector, `T(g) = Σ w_x g(x)`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Functional {
    weights: Vec<Rational>,
}

impl Functional {
    pub fn new(weights: Vec<Rational>) -> Result<Self, MeasureError> {
        if let Some(i) = weights.iter().position(Rational::is_negative) {
            return Err(MeasureError::NegativeWeight {
                point: format!("#{i}"),
                weight: weights[i].clone(),
            });
        }
        Ok(Functional { weights })
    }

    /// Evaluation at point `i`.
    pub fn point_mass(universe: usize, i: usize) -> Self {
        let mut weights = vec![Rational::zero(); universe];
        weights[i] = Rational::one();
        Functional { weights }
    }

    pub fn weights(&self) -> &[Rational] {
        &self.weights
    }

    pub fn len(&self) -> usize {
        self.weights.len()
    }

    pub fn is_empty(&self) -> bool {
        self.weights.is_empty()
    }

    /// `T(1)`.
    pub fn total(&self) -> Rational {
        self.weights.iter().sum()
    }

    /// `T(g)`.
    pub fn apply(&self, g: &[Rational]) -> Rational {
        assert_eq!(g.len(), self.weights.len(), "function/functional size mismatch");
        self.weights.iter().zip(g).map(|(w, v)| w * v).sum()
    }

    /// `T(χ_E)`.
    pub fn apply_indicator(&self, set: &MSet) -> Rational {
        set.iter().map(|i| &self.weights[i]).sum()
    }

    /// The measure `E ↦ T(χ_E)` on the points of `space`.
    pub fn as_space(&self, space: &FiniteMeasureSpace) -> Result<FiniteMeasureSpace, MeasureError> {
        space.reweighted(self.weights.clone())
    }
}

/// Algebra generated by a list of subsets, represented by its atoms.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct FiniteAlgebra {
    generators: Vec<MSet>,
    atoms: Vec<MSet>,
}

impl FiniteAlgebra {
    /// Atoms are the classes of points sharing a membership pattern across all
    /// generators, ordered by their smallest point.
    pub fn generated_by(universe: usize, generators: Vec<MSet>) -> Result<Self, MeasureError> {
        if generators.len() > MAX_GENERATORS {
            return Err(MeasureError::TooManyGenerators(generators.len()));
        }
        if let Some(g) = generators.iter().find(|g| g.universe() != universe) {
            return Err(MeasureError::SizeMismatch {
                expected: universe,
                got: g.universe(),
            });
        }
        let mut classes: Vec<(u32, MSet)> = Vec::new();
        for x in 0..universe {
            let signature = generators
                .iter()
                .enumerate()
                .filter(|(_, g)| g.contains(x))
                .fold(0u32, |acc, (j, _)| acc | 1 << j);
            match classes.iter_mut().find(|(sig, _)| *sig == signature) {
                Some((_, atom)) => atom.insert(x),
                None => classes.push((signature, MSet::from_indices(universe, [x]))),
            }
        }
        Ok(FiniteAlgebra {
            generators,
            atoms: classes.into_iter().map(|(_, a)| a).collect(),
        })
    }

    pub fn generators(&self) -> &[MSet] {
        &self.generators
    }

    pub fn atoms(&self) -> &[MSet] {
        &self.atoms
    }

    /// Membership: `set` is a union of atoms.
    pub fn contains(&self, set: &MSet) -> bool {
        self.atoms
            .iter()
            .all(|a| a.is_subset(set) || a.is_disjoint(set))
    }

    /// Union of the atoms selected by the bits of `mask`.
    pub fn member(&self, mask: u64) -> MSet {
        let universe = self.atoms.first().map_or(0, MSet::universe);
        self.atoms
            .iter()
            .enumerate()
            .filter(|(i, _)| mask >> i & 1 == 1)
            .fold(MSet::empty(universe), |acc, (_, a)| acc.union(a))
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct InnerOuter {
    pub inner: Rational,
    pub outer: Rational,
}

/// Inner measure (atoms inside `set`) and outer measure (atoms meeting `set`).
pub fn inner_outer(space: &FiniteMeasureSpace, alg: &FiniteAlgebra, set: &MSet) -> InnerOuter {
    let mut inner = Rational::zero();
    let mut outer = Rational::zero();
    for atom in alg.atoms() {
        if atom.is_disjoint(set) {
            continue;
        }
        let m = space.measure(atom);
        if atom.is_subset(set) {
            inner = inner + &m;
        }
        outer = outer + m;
    }
    InnerOuter { inner, outer }
}
