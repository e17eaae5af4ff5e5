//! Identifier newtypes and the two target relations.

use std::fmt;
use std::str::FromStr;
use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::error::Error;

macro_rules! string_id {
    ($(#[$meta:meta])* $name:ident) => {
        $(#[$meta])*
        #[derive(Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
        #[serde(transparent)]
        pub struct $name(Arc<str>);

        impl $name {
            pub fn new(id: &str) -> Self {
                debug_assert!(!id.is_empty(), concat!(stringify!($name), " must be non-empty"));
                $name(Arc::from(id))
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

        impl fmt::Debug for $name {
            fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
                write!(f, "{}({:?})", stringify!($name), &*self.0)
            }
        }

        impl From<&str> for $name {
            fn from(s: &str) -> Self {
                $name::new(s)
            }
        }

        impl std::borrow::Borrow<str> for $name {
            fn borrow(&self) -> &str {
                &self.0
            }
        }
    };
}

string_id!(
    /// A person (subject of every scored triple).
    PersonId
);
string_id!(
    /// A profession or nationality.
    TypeId
);
string_id!(
    /// Any node of the knowledge graph.
    EntityId
);
string_id!(RelationId);

impl From<&PersonId> for EntityId {
    fn from(p: &PersonId) -> Self {
        EntityId(p.0.clone())
    }
}

impl From<&TypeId> for EntityId {
    fn from(t: &TypeId) -> Self {
        EntityId(t.0.clone())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum TargetRelation {
    Profession,
    Nationality,
}

impl TargetRelation {
    pub const ALL: [TargetRelation; 2] = [TargetRelation::Profession, TargetRelation::Nationality];

    pub fn name(self) -> &'static str {
        match self {
            TargetRelation::Profession => "profession",
            TargetRelation::Nationality => "nationality",
        }
    }
}

impl fmt::Display for TargetRelation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for TargetRelation {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "profession" => Ok(TargetRelation::Profession),
            "nationality" => Ok(TargetRelation::Nationality),
            other => Err(Error::invalid(format!(
                "unknown relation `{other}` (expected profession or nationality)"
            ))),
        }
    }
}
