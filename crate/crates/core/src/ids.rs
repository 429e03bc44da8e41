//! Run-scoped identifiers.

use std::fmt;

use serde::{Deserialize, Serialize};

macro_rules! id_type {
    ($(#[$meta:meta])* $name:ident, $prefix:literal) => {
        $(#[$meta])*
        #[derive(
            Clone, Copy, Debug, Default, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize,
        )]
        #[serde(transparent)]
        pub struct $name(pub u32);

        impl $name {
            #[inline]
            pub fn index(self) -> usize {
                self.0 as usize
            }

            #[inline]
            pub fn from_index(index: usize) -> Self {
                Self(u32::try_from(index).expect("identifier overflow"))
            }
        }

        impl fmt::Display for $name {
            fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
                write!(f, concat!($prefix, "{}"), self.0)
            }
        }
    };
}

id_type!(
    /// Index of a simulated node; honest nodes come first, the adversary (if any) is last.
    NodeId,
    "n"
);
id_type!(
    /// Issuance-ordered block identifier. Genesis is `BlockId(0)`.
    BlockId,
    "b"
);
id_type!(
    /// One spend inside a conflict set.
    ColorId,
    "c"
);
id_type!(
    /// A set of mutually exclusive colors.
    ConflictSetId,
    "s"
);

impl BlockId {
    pub const GENESIS: BlockId = BlockId(0);
}
