//! Observed conditional beliefs: the data every audit consumes.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::belief::{check_len, Belief, Event, StateSpace};
use crate::error::{Error, Result};

/// A prior together with posteriors on some collection of events.
#[derive(Debug, Clone, PartialEq)]
pub struct UpdateFamily {
    space: StateSpace,
    prior: Belief,
    posteriors: BTreeMap<Event, Belief>,
}

impl UpdateFamily {
    pub fn new(space: StateSpace, prior: Belief) -> Result<Self> {
        check_len(space.len(), prior.len())?;
        Ok(Self {
            space,
            prior,
            posteriors: BTreeMap::new(),
        })
    }

    pub fn with_posteriors(
        space: StateSpace,
        prior: Belief,
        posteriors: impl IntoIterator<Item = (Event, Belief)>,
    ) -> Result<Self> {
        let mut fam = Self::new(space, prior)?;
        for (e, b) in posteriors {
            fam.insert(e, b)?;
        }
        Ok(fam)
    }

    pub fn insert(&mut self, e: Event, b: Belief) -> Result<()> {
        check_len(self.space.len(), b.len())?;
        if e.iter().any(|i| i >= self.space.len()) {
            return Err(Error::InvalidEvent(format!(
                "{e} exceeds {} states",
                self.space.len()
            )));
        }
        self.posteriors.insert(e, b);
        Ok(())
    }

    pub fn space(&self) -> &StateSpace {
        &self.space
    }

    pub fn prior(&self) -> &Belief {
        &self.prior
    }

    pub fn n(&self) -> usize {
        self.space.len()
    }

    pub fn get(&self, e: Event) -> Option<&Belief> {
        self.posteriors.get(&e)
    }

    pub fn len(&self) -> usize {
        self.posteriors.len()
    }

    pub fn is_empty(&self) -> bool {
        self.posteriors.is_empty()
    }

    /// Events in canonical (mask) order.
    pub fn events(&self) -> impl Iterator<Item = Event> + '_ {
        self.posteriors.keys().copied()
    }

    pub fn iter(&self) -> impl Iterator<Item = (Event, &Belief)> {
        self.posteriors.iter().map(|(e, b)| (*e, b))
    }

    /// Human-readable event name such as `{s1,s2}`.
    pub fn name(&self, e: Event) -> String {
        self.space.format_event(e)
    }

    /// True when every nonempty event has a posterior.
    pub fn is_complete(&self) -> bool {
        self.n() < 32 && self.posteriors.len() == (1usize << self.n()) - 1
    }

    pub fn to_file(&self) -> FamilyFile {
        FamilyFile {
            states: self.space.labels().to_vec(),
            prior: self.prior.clone(),
            posteriors: self
                .iter()
                .map(|(e, b)| FamilyEntry {
                    event: self.space.event_labels(e),
                    belief: b.clone(),
                })
                .collect(),
        }
    }

    pub fn from_file(file: FamilyFile) -> Result<Self> {
        let space = StateSpace::new(file.states)?;
        let mut fam = Self::new(space, file.prior)?;
        for entry in file.posteriors {
            let e = fam.space.event(&entry.event)?;
            fam.insert(e, entry.belief)?;
        }
        Ok(fam)
    }
}

/// JSON layout of a family.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FamilyFile {
    pub states: Vec<String>,
    pub prior: Belief,
    pub posteriors: Vec<FamilyEntry>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FamilyEntry {
    pub event: Vec<String>,
    pub belief: Belief,
}
