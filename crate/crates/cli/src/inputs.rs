//! Resolves command inputs from standalone files, an instance bundle, or a
//! generated instance.

use std::collections::BTreeMap;
use std::path::{Path, PathBuf};

use dlim_core::instance::{
    bounded_family_from_repr, family_from_members, functional_from_repr, read_json, space_from_repr,
    BoundedFamilyRepr, FunctionalRepr,
};
use dlim_core::{
    generate_instance, parse_instance, BoundedFamily, FiniteMeasureSpace, Functional, GenerateProfile,
    IndexSet, InstanceBundle, InstanceError, Rational, SetFamily,
};

use crate::CliError;

pub struct Sources {
    bundle: Option<InstanceBundle>,
}

fn validation(pointer: &str, message: impl ToString) -> CliError {
    CliError::Instance(InstanceError::Validation {
        pointer: pointer.to_string(),
        message: message.to_string(),
    })
}

fn pick<'a, T>(map: &'a BTreeMap<String, T>, name: Option<&str>, what: &str) -> Result<(&'a String, &'a T), CliError> {
    match name {
        Some(n) => map
            .get_key_value(n)
            .ok_or_else(|| validation(&format!("/{what}"), format!("no entry named `{n}`"))),
        None if map.len() == 1 => Ok(map.iter().next().expect("one entry")),
        None => Err(validation(
            &format!("/{what}"),
            format!("expected exactly one entry, found {}; pass a name", map.len()),
        )),
    }
}

impl Sources {
    pub fn load(instance: Option<&Path>, seed: Option<u64>) -> Result<Self, CliError> {
        let bundle = match (instance, seed) {
            (Some(path), _) => Some(parse_instance(path)?),
            (None, Some(seed)) => Some(
                generate_instance(seed, &GenerateProfile::default())
                    .map_err(|e| validation("", e))?,
            ),
            (None, None) => None,
        };
        Ok(Sources { bundle })
    }

    fn bundle(&self, what: &str) -> Result<&InstanceBundle, CliError> {
        self.bundle
            .as_ref()
            .ok_or_else(|| validation("", format!("no {what} given: pass a file, --instance or --seed")))
    }

    pub fn space(&self, file: Option<&PathBuf>) -> Result<FiniteMeasureSpace, CliError> {
        match file {
            Some(path) => Ok(space_from_repr(read_json(path)?, &[])?),
            None => {
                let (_, s) = pick(&self.bundle("space")?.spaces, None, "spaces")?;
                Ok(s.clone())
            }
        }
    }

    pub fn index_set(&self, file: Option<&PathBuf>) -> Result<Option<IndexSet>, CliError> {
        match file {
            Some(path) => Ok(Some(read_json(path)?)),
            None => Ok(self
                .bundle
                .as_ref()
                .and_then(|b| (b.index_sets.len() == 1).then(|| b.index_sets.values().next().cloned()))
                .flatten()),
        }
    }

    /// Family from a member-list file over `--space`, or the bundle family.
    pub fn set_family(
        &self,
        space_file: Option<&PathBuf>,
        family_file: Option<&PathBuf>,
        index_file: Option<&PathBuf>,
        name: Option<&str>,
        lower_bound: Option<&Rational>,
        horizon: Option<u64>,
    ) -> Result<SetFamily, CliError> {
        if let Some(path) = family_file {
            let space = self.space(space_file)?;
            let members: BTreeMap<u64, Vec<String>> = read_json(path)?;
            let bound = lower_bound
                .cloned()
                .ok_or_else(|| validation("", "--a is required with --family"))?;
            let index_set = match index_file {
                Some(p) => Some(read_json(p)?),
                None => None,
            };
            return Ok(family_from_members(&space, index_set, horizon, &members, bound, &[])?);
        }
        let (_, named) = pick(&self.bundle("family")?.families, name, "families")?;
        let fam = named.family.clone();
        match lower_bound {
            Some(a) if a != fam.lower_bound() => Ok(SetFamily::new(
                fam.space().clone(),
                fam.index_set().clone(),
                fam.horizon(),
                fam.sets().clone(),
                a.clone(),
            )?),
            _ => Ok(fam),
        }
    }

    pub fn bounded_family(
        &self,
        space_file: Option<&PathBuf>,
        file: Option<&PathBuf>,
    ) -> Result<BoundedFamily, CliError> {
        match file {
            Some(path) => {
                let space = self.space(space_file)?;
                let repr: BoundedFamilyRepr = read_json(path)?;
                Ok(bounded_family_from_repr(&repr, &space, &[])?)
            }
            None => {
                let (_, b) = pick(&self.bundle("bounded family")?.bounded_families, None, "bounded_families")?;
                Ok(b.family.clone())
            }
        }
    }

    pub fn functional(&self, space: &FiniteMeasureSpace, file: Option<&PathBuf>) -> Result<Functional, CliError> {
        match file {
            Some(path) => {
                let repr: FunctionalRepr = read_json(path)?;
                Ok(functional_from_repr(&repr, space, &[])?)
            }
            None => {
                let (_, t) = pick(&self.bundle("functional")?.functionals, None, "functionals")?;
                Ok(t.functional.clone())
            }
        }
    }

    pub fn functionals(&self, space: &FiniteMeasureSpace, file: Option<&PathBuf>) -> Result<Vec<Functional>, CliError> {
        match file {
            Some(path) => {
                let reprs: Vec<FunctionalRepr> = read_json(path)?;
                reprs
                    .iter()
                    .enumerate()
                    .map(|(i, r)| Ok(functional_from_repr(r, space, &[&i.to_string()])?))
                    .collect()
            }
            None => Ok(self
                .bundle("functionals")?
                .functionals
                .values()
                .map(|t| t.functional.clone())
                .collect()),
        }
    }

    pub fn sequence(&self, file: Option<&PathBuf>, name: Option<&str>) -> Result<dlim_core::RealSequence, CliError> {
        match file {
            Some(path) => Ok(read_json(path)?),
            None => Ok(pick(&self.bundle("sequence")?.sequences, name, "sequences")?.1.clone()),
        }
    }
}
