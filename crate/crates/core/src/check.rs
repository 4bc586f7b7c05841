//! Named verification steps.
//!
//! Constructions in this crate return certificates whose `verify` routines
//! replay every claimed property and report the outcome as a flat list of
//! [`NamedCheck`]s, one per property, so callers (and the command-line
//! harness) can show exactly which guarantee held and which did not.

/// One named verification step with its outcome.
#[derive(Clone, Debug)]
pub struct NamedCheck {
    /// Stable identifier of the check.
    pub name: String,
    /// Whether it held.
    pub passed: bool,
    /// Human-readable diagnostic (also filled on success).
    pub detail: String,
}

impl NamedCheck {
    pub(crate) fn new(name: &str, passed: bool, detail: impl Into<String>) -> Self {
        NamedCheck { name: name.into(), passed, detail: detail.into() }
    }
}

/// True when every check in the list passed.
pub fn all_passed(checks: &[NamedCheck]) -> bool {
    checks.iter().all(|c| c.passed)
}
