//! Conflict bookkeeping.
//!
//! A color stands for one spend of a contested output. Colors of the same
//! conflict set are mutually exclusive. The [`ColorRegistry`] is the run-wide
//! truth; each node keeps its own [`OpinionState`] covering only the sets it
//! has seen locally.

use thiserror::Error;

use crate::engine::SimTime;
use crate::ids::{BlockId, ColorId, ConflictSetId};

#[derive(Clone, Debug, PartialEq, Eq, Error)]
pub enum LedgerError {
    #[error("unknown color {0}")]
    UnknownColor(ColorId),
    #[error("unknown conflict set {0}")]
    UnknownSet(ConflictSetId),
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct Color {
    pub id: ColorId,
    pub conflict_set: ConflictSetId,
    /// Block that introduced the color into the Tangle.
    pub carrier: BlockId,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ConflictSet {
    pub id: ConflictSetId,
    pub members: Vec<ColorId>,
    pub created_at: SimTime,
}

#[derive(Clone, Debug, Default)]
pub struct ColorRegistry {
    colors: Vec<Option<Color>>,
    sets: Vec<Option<ConflictSet>>,
}

impl ColorRegistry {
    pub fn new() -> Self {
        Self::default()
    }

    /// Registers `color` as a member of `set`. Returns `false` if the color
    /// was already known, in which case nothing changes.
    pub fn register_color(
        &mut self,
        color: ColorId,
        set: ConflictSetId,
        carrier: BlockId,
        now: SimTime,
    ) -> bool {
        if self.color(color).is_some() {
            return false;
        }
        if self.colors.len() <= color.index() {
            self.colors.resize(color.index() + 1, None);
        }
        self.colors[color.index()] = Some(Color {
            id: color,
            conflict_set: set,
            carrier,
        });
        if self.sets.len() <= set.index() {
            self.sets.resize(set.index() + 1, None);
        }
        let entry = self.sets[set.index()].get_or_insert_with(|| ConflictSet {
            id: set,
            members: Vec::new(),
            created_at: now,
        });
        entry.members.push(color);
        true
    }

    pub fn color(&self, color: ColorId) -> Option<&Color> {
        self.colors.get(color.index()).and_then(Option::as_ref)
    }

    pub fn set_of(&self, color: ColorId) -> Option<ConflictSetId> {
        self.color(color).map(|c| c.conflict_set)
    }

    pub fn conflict_set(&self, set: ConflictSetId) -> Option<&ConflictSet> {
        self.sets.get(set.index()).and_then(Option::as_ref)
    }

    pub fn sets(&self) -> impl Iterator<Item = &ConflictSet> {
        self.sets.iter().flatten()
    }

    pub fn color_count(&self) -> usize {
        self.colors.iter().flatten().count()
    }

    pub fn next_color_id(&self) -> ColorId {
        ColorId::from_index(self.colors.len())
    }

    pub fn next_set_id(&self) -> ConflictSetId {
        ConflictSetId::from_index(self.sets.len())
    }

    /// Members of `color`'s conflict set other than `color` itself.
    pub fn conflicts_of(&self, color: ColorId) -> Result<Vec<ColorId>, LedgerError> {
        let set = self.set_of(color).ok_or(LedgerError::UnknownColor(color))?;
        let set = self.conflict_set(set).ok_or(LedgerError::UnknownSet(set))?;
        Ok(set
            .members
            .iter()
            .copied()
            .filter(|&c| c != color)
            .collect())
    }
}

/// One node's view of a conflict set.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SetOpinion {
    /// Members in the order this node saw them.
    pub known: Vec<ColorId>,
    pub preferred: Option<ColorId>,
    pub confirmed: Option<ColorId>,
}

#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct OpinionState {
    sets: Vec<Option<SetOpinion>>,
}

impl OpinionState {
    pub fn new() -> Self {
        Self::default()
    }

    /// Records that this node has seen `color` of `set`. The first color seen
    /// becomes the initial preference. Returns `true` if the color was new.
    pub fn learn(&mut self, set: ConflictSetId, color: ColorId) -> bool {
        if self.sets.len() <= set.index() {
            self.sets.resize(set.index() + 1, None);
        }
        let entry = self.sets[set.index()].get_or_insert_with(|| SetOpinion {
            known: Vec::new(),
            preferred: None,
            confirmed: None,
        });
        if entry.known.contains(&color) {
            return false;
        }
        entry.known.push(color);
        if entry.preferred.is_none() {
            entry.preferred = Some(color);
        }
        true
    }

    pub fn get(&self, set: ConflictSetId) -> Option<&SetOpinion> {
        self.sets.get(set.index()).and_then(Option::as_ref)
    }

    pub fn knows(&self, set: ConflictSetId) -> bool {
        self.get(set).is_some()
    }

    pub fn known_sets(&self) -> impl Iterator<Item = ConflictSetId> + '_ {
        self.sets
            .iter()
            .enumerate()
            .filter(|(_, s)| s.is_some())
            .map(|(i, _)| ConflictSetId::from_index(i))
    }

    pub fn preferred(&self, set: ConflictSetId) -> Option<ColorId> {
        self.get(set).and_then(|s| s.preferred)
    }

    pub fn confirmed(&self, set: ConflictSetId) -> Option<ColorId> {
        self.get(set).and_then(|s| s.confirmed)
    }

    pub fn members(&self, set: ConflictSetId) -> &[ColorId] {
        self.get(set).map_or(&[], |s| s.known.as_slice())
    }

    /// Changes the preference. Ignored once the set is confirmed; returns
    /// whether the preference actually changed.
    pub fn set_preferred(&mut self, set: ConflictSetId, color: ColorId) -> bool {
        let Some(entry) = self.sets.get_mut(set.index()).and_then(Option::as_mut) else {
            return false;
        };
        if entry.confirmed.is_some() || entry.preferred == Some(color) {
            return false;
        }
        entry.preferred = Some(color);
        true
    }

    /// Marks `color` confirmed and pins the preference to it. The first
    /// confirmation is permanent; later calls return `false`.
    pub fn confirm(&mut self, set: ConflictSetId, color: ColorId) -> bool {
        let Some(entry) = self.sets.get_mut(set.index()).and_then(Option::as_mut) else {
            return false;
        };
        if entry.confirmed.is_some() {
            return false;
        }
        entry.confirmed = Some(color);
        entry.preferred = Some(color);
        true
    }

    /// Whether a block whose past cone holds `branch` may be referenced
    /// under these opinions: every color on it must be the preferred member
    /// of its set. Sets without a preference admit no color at all.
    pub fn admits(&self, branch: &[ColorId], registry: &ColorRegistry) -> bool {
        branch.iter().all(|&color| {
            registry
                .set_of(color)
                .is_some_and(|set| self.preferred(set) == Some(color))
        })
    }

    /// Copy of these opinions with no preference on `set`, so only blocks
    /// outside that conflict are admitted.
    pub fn without_preference(&self, set: ConflictSetId) -> OpinionState {
        let mut view = self.clone();
        if let Some(Some(entry)) = view.sets.get_mut(set.index()) {
            entry.preferred = None;
        }
        view
    }
}
