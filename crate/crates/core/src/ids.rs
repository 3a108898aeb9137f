//! String identifier newtypes for the entity collections.

use std::borrow::Borrow;
use std::fmt;

use serde::{Deserialize, Serialize};

macro_rules! string_id {
    ($(#[$meta:meta])* $name:ident) => {
        $(#[$meta])*
        #[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
        #[serde(transparent)]
        pub struct $name(String);

        impl $name {
            pub fn new(id: impl Into<String>) -> Self {
                $name(id.into())
            }

            pub fn as_str(&self) -> &str {
                &self.0
            }
        }

        impl fmt::Display for $name {
            fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
                f.write_str(&self.0)
            }
        }

        impl From<&str> for $name {
            fn from(s: &str) -> Self {
                $name(s.to_string())
            }
        }

        impl From<String> for $name {
            fn from(s: String) -> Self {
                $name(s)
            }
        }

        impl Borrow<str> for $name {
            fn borrow(&self) -> &str {
                &self.0
            }
        }
    };
}

string_id!(
    /// Identifies a [`SpaceTimeEvent`](crate::model::SpaceTimeEvent).
    EventId
);
string_id!(
    /// Identifies a moving object (person, vehicle, ...).
    ObjectId
);
string_id!(RegionId);
string_id!(ActivityId);
string_id!(ProcessId);
string_id!(DeviceId);
string_id!(ObservationId);

impl EventId {
    /// Deterministic id for the event synthesized from a raw position fix.
    pub fn for_fix(object: &ObjectId, t: i64) -> Self {
        EventId(format!("{object}#{t}"))
    }
}
