//! Session-scoped provenance registry.
//!
//! Maps partition fingerprints to their role, originating split and
//! assessment state. Every guard in the crate asks the [`Session`] about a
//! frame's content, never about the frame's tag, so provenance survives
//! content-preserving rebuilds and is lost on any content change.

use alloc::collections::BTreeMap;
use alloc::string::String;
use alloc::vec::Vec;
use core::fmt;

use serde::{Deserialize, Serialize};

use crate::error::{Error, GuardError, Result};
use crate::frame::{DataFrame, FrameFingerprint, PartitionTag};

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Role {
    Train,
    Valid,
    Test,
    Dev,
}

impl Role {
    pub fn tag(self) -> PartitionTag {
        match self {
            Role::Train => PartitionTag::Train,
            Role::Valid => PartitionTag::Valid,
            Role::Test => PartitionTag::Test,
            Role::Dev => PartitionTag::Dev,
        }
    }
}

impl fmt::Display for Role {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        self.tag().fmt(f)
    }
}

/// Opaque identifier of one split call, derived from the input content and
/// the split parameters.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(transparent)]
pub struct SplitId(String);

impl SplitId {
    pub(crate) fn new(hex: String) -> SplitId {
        SplitId(hex)
    }

    pub fn as_str(&self) -> &str {
        &self.0
    }
}

impl fmt::Display for SplitId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.0)
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ProvenanceRecord {
    pub role: Role,
    pub split_id: SplitId,
    /// Meaningful for test partitions: set once by a successful assess.
    pub assessed: bool,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum GuardMode {
    #[default]
    On,
    Off,
}

/// Point-in-time copy of a registry, keyed by fingerprint summary hex.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct RegistrySnapshot {
    pub guards: GuardMode,
    pub entries: BTreeMap<String, ProvenanceRecord>,
}

#[derive(Default)]
struct State {
    entries: BTreeMap<FrameFingerprint, ProvenanceRecord>,
    guards: GuardMode,
    #[cfg(feature = "test-hooks")]
    holdout_check_disabled: bool,
}

/// Outcome of a successful assess check-and-set.
pub(crate) struct HoldoutTicket {
    pub holdout: FrameFingerprint,
    pub bypassed: bool,
}

/// A provenance registry plus the guards-on/off switch.
///
/// All mutation goes through an internal lock; the assess check-and-set is
/// performed under a single critical section.
pub struct Session {
    state: spin::Mutex<State>,
}

static GLOBAL: Session = Session::new();

impl Default for Session {
    fn default() -> Self {
        Session::new()
    }
}

impl fmt::Debug for Session {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let state = self.state.lock();
        f.debug_struct("Session").field("entries", &state.entries.len()).field("guards", &state.guards).finish()
    }
}

impl Session {
    /// Empty registry with guards on.
    pub const fn new() -> Session {
        Session {
            state: spin::Mutex::new(State {
                entries: BTreeMap::new(),
                guards: GuardMode::On,
                #[cfg(feature = "test-hooks")]
                holdout_check_disabled: false,
            }),
        }
    }

    /// Process-wide default session.
    pub fn global() -> &'static Session {
        &GLOBAL
    }

    /// Records `fp` under `role`; replaces any earlier record for the same
    /// content and resets its assessed flag.
    pub fn register(&self, fp: FrameFingerprint, role: Role, split_id: SplitId) {
        self.state.lock().entries.insert(fp, ProvenanceRecord { role, split_id, assessed: false });
    }

    pub(crate) fn register_batch(&self, batch: Vec<(FrameFingerprint, Role)>, split_id: &SplitId) {
        let mut state = self.state.lock();
        for (fp, role) in batch {
            state.entries.insert(fp, ProvenanceRecord { role, split_id: split_id.clone(), assessed: false });
        }
    }

    /// Provenance of `df` by content: an exact fingerprint match, or else a
    /// unique registered partition of which `df` is a column subset with the
    /// same row count.
    pub fn lookup(&self, df: &DataFrame) -> Result<Option<ProvenanceRecord>> {
        self.lookup_fingerprint(&df.fingerprint())
    }

    pub fn lookup_fingerprint(&self, fp: &FrameFingerprint) -> Result<Option<ProvenanceRecord>> {
        let state = self.state.lock();
        Ok(resolve(&state, fp)?.map(|(_, rec)| rec.clone()))
    }

    /// Marks a registered test partition as assessed. Idempotent.
    pub fn mark_assessed(&self, fp: &FrameFingerprint) -> Result<()> {
        let mut state = self.state.lock();
        match state.entries.get_mut(fp) {
            Some(rec) if rec.role == Role::Test => {
                rec.assessed = true;
                Ok(())
            }
            Some(rec) => Err(Error::Registry(alloc::format!("cannot mark a {} partition as assessed", rec.role))),
            None => Err(Error::Registry("fingerprint is not registered".into())),
        }
    }

    pub fn is_assessed(&self, fp: &FrameFingerprint) -> bool {
        self.state.lock().entries.get(fp).is_some_and(|r| r.assessed)
    }

    pub fn set_guards(&self, mode: GuardMode) {
        self.state.lock().guards = mode;
    }

    pub fn guards(&self) -> GuardMode {
        self.state.lock().guards
    }

    pub fn guards_on(&self) -> bool {
        self.guards() == GuardMode::On
    }

    /// Empties the registry and turns guards back on.
    pub fn reset_session(&self) {
        let mut state = self.state.lock();
        *state = State::default();
    }

    /// True while any partition registered under `split_id` is present.
    pub fn split_is_live(&self, split_id: &SplitId) -> bool {
        self.state.lock().entries.values().any(|r| &r.split_id == split_id)
    }

    pub fn len(&self) -> usize {
        self.state.lock().entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn snapshot(&self) -> RegistrySnapshot {
        let state = self.state.lock();
        RegistrySnapshot {
            guards: state.guards,
            entries: state.entries.iter().map(|(fp, rec)| (fp.summary().to_hex(), rec.clone())).collect(),
        }
    }

    /// Disables the holdout-spent check so tests can prove the conformance
    /// suite detects a broken assess guard.
    #[cfg(feature = "test-hooks")]
    pub fn disable_holdout_check_for_testing(&self) {
        self.state.lock().holdout_check_disabled = true;
    }

    /// Assess guard and, when `mark` is set, its effect, as one critical
    /// section.
    pub(crate) fn check_holdout(
        &self,
        fp: &FrameFingerprint,
        model_split: Option<&SplitId>,
        model_assess_count: u32,
        mark: bool,
    ) -> Result<HoldoutTicket> {
        let mut state = self.state.lock();
        let resolved = resolve(&state, fp);
        if state.guards == GuardMode::Off {
            if let Ok(Some((key, rec))) = resolved {
                if rec.role == Role::Test {
                    let key = key.clone();
                    if let Some(r) = state.entries.get_mut(&key).filter(|_| mark) {
                        r.assessed = true;
                    }
                    return Ok(HoldoutTicket { holdout: key, bypassed: true });
                }
            }
            return Ok(HoldoutTicket { holdout: fp.clone(), bypassed: true });
        }
        if model_assess_count > 0 {
            return Err(GuardError::AlreadyAssessedModel.into());
        }
        let (key, rec) = match resolved? {
            Some((key, rec)) => (key.clone(), rec.clone()),
            None => return Err(Error::unregistered("assess")),
        };
        if rec.role != Role::Test {
            return Err(GuardError::NotTestPartition { role: rec.role }.into());
        }
        match model_split {
            Some(ms) if ms == &rec.split_id => {}
            other => {
                return Err(GuardError::LineageMismatch {
                    model_split: other.map_or_else(|| String::from("<none>"), |s| s.as_str().into()),
                    test_split: rec.split_id.as_str().into(),
                }
                .into())
            }
        }
        #[cfg(feature = "test-hooks")]
        let check_holdout = !state.holdout_check_disabled;
        #[cfg(not(feature = "test-hooks"))]
        let check_holdout = true;
        if check_holdout && rec.assessed {
            return Err(GuardError::HoldoutSpent { holdout: key.summary().to_hex() }.into());
        }
        if let Some(r) = state.entries.get_mut(&key).filter(|_| mark) {
            r.assessed = true;
        }
        Ok(HoldoutTicket { holdout: key, bypassed: false })
    }
}

fn resolve<'a>(
    state: &'a State,
    fp: &FrameFingerprint,
) -> Result<Option<(&'a FrameFingerprint, &'a ProvenanceRecord)>> {
    if let Some((key, rec)) = state.entries.get_key_value(fp) {
        return Ok(Some((key, rec)));
    }
    let mut found: Option<(&FrameFingerprint, &ProvenanceRecord)> = None;
    let mut distinct = 0usize;
    for (key, rec) in &state.entries {
        if !fp.is_column_subset_of(key) {
            continue;
        }
        match found {
            None => {
                found = Some((key, rec));
                distinct = 1;
            }
            Some((_, prev)) if prev.role == rec.role && prev.split_id == rec.split_id => {}
            Some(_) => distinct += 1,
        }
    }
    if distinct > 1 {
        return Err(Error::AmbiguousProvenance(distinct));
    }
    Ok(found)
}
