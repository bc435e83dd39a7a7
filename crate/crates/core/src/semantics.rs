//! Rule variants.
//!
//! [`Semantics::standard`] is the logic as defined. The [`Mutation`]s are
//! deliberately broken variants used to check that the axiom catalog can
//! tell a wrong rule set from the right one.

use std::fmt;
use std::str::FromStr;

use serde::Serialize;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize)]
pub enum Mutation {
    /// Type II leaves the entering agent in the mediator's process.
    DropMediatorUpdateOnEnter,
    /// Type IV leaves the merged agent in the mediator's process.
    KeepMergedInMediator,
    /// Type I keeps both executors' capability sums after firing.
    SkipSumConsumptionOnCommunicate,
    /// `≤⁺` loses reflexivity, in both indistinguishability and participation.
    IrreflexiveSubtree,
    /// History indistinguishability compares states only.
    IgnoreActionsInHistories,
}

impl Mutation {
    pub const ALL: [Mutation; 5] = [
        Mutation::DropMediatorUpdateOnEnter,
        Mutation::KeepMergedInMediator,
        Mutation::SkipSumConsumptionOnCommunicate,
        Mutation::IrreflexiveSubtree,
        Mutation::IgnoreActionsInHistories,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Mutation::DropMediatorUpdateOnEnter => "drop-enter-mediator-update",
            Mutation::KeepMergedInMediator => "keep-merged-in-mediator",
            Mutation::SkipSumConsumptionOnCommunicate => "skip-communication-sum-consumption",
            Mutation::IrreflexiveSubtree => "irreflexive-subtree",
            Mutation::IgnoreActionsInHistories => "ignore-history-actions",
        }
    }
}

impl fmt::Display for Mutation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Mutation {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        Mutation::ALL
            .into_iter()
            .find(|m| m.name() == s)
            .ok_or_else(|| format!("unknown mutation `{s}`"))
    }
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Hash)]
pub struct Semantics {
    pub mutation: Option<Mutation>,
}

impl Semantics {
    pub fn standard() -> Self {
        Semantics { mutation: None }
    }

    pub fn mutated(m: Mutation) -> Self {
        Semantics { mutation: Some(m) }
    }

    pub fn is(&self, m: Mutation) -> bool {
        self.mutation == Some(m)
    }

    /// Whether `≤⁺` includes the agent itself.
    pub fn reflexive_subtree(&self) -> bool {
        !self.is(Mutation::IrreflexiveSubtree)
    }
}
