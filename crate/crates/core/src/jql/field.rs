use std::fmt;

use serde::{Deserialize, Deserializer, Serialize, Serializer};

/// The closed set of issue fields the system understands.
///
/// These are the same 21 fields an [`Issue`](crate::issue::Issue) retains after
/// static reduction, so any field a query can mention is also a field the
/// store can answer. Variants are declared in alphabetical order of their
/// lowercase names; `Ord` is relied on for deterministic serialization.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Field {
    Assignee,
    Components,
    Created,
    Creator,
    Description,
    DueDate,
    FixVersions,
    Id,
    IssueType,
    Key,
    Labels,
    Priority,
    Project,
    Reporter,
    Resolution,
    ResolutionDate,
    Status,
    Summary,
    TimeEstimate,
    TimeSpent,
    Updated,
}

/// What kind of values a field holds. Decides which operators are legal.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Domain {
    Enum,
    User,
    Text,
    Date,
    Number,
}

impl Field {
    pub const ALL: [Field; 21] = [
        Field::Assignee,
        Field::Components,
        Field::Created,
        Field::Creator,
        Field::Description,
        Field::DueDate,
        Field::FixVersions,
        Field::Id,
        Field::IssueType,
        Field::Key,
        Field::Labels,
        Field::Priority,
        Field::Project,
        Field::Reporter,
        Field::Resolution,
        Field::ResolutionDate,
        Field::Status,
        Field::Summary,
        Field::TimeEstimate,
        Field::TimeSpent,
        Field::Updated,
    ];

    /// Canonical spelling, as Jira prints it.
    pub fn name(self) -> &'static str {
        match self {
            Field::Assignee => "assignee",
            Field::Components => "components",
            Field::Created => "created",
            Field::Creator => "creator",
            Field::Description => "description",
            Field::DueDate => "duedate",
            Field::FixVersions => "fixVersions",
            Field::Id => "id",
            Field::IssueType => "issuetype",
            Field::Key => "key",
            Field::Labels => "labels",
            Field::Priority => "priority",
            Field::Project => "project",
            Field::Reporter => "reporter",
            Field::Resolution => "resolution",
            Field::ResolutionDate => "resolutiondate",
            Field::Status => "status",
            Field::Summary => "summary",
            Field::TimeEstimate => "timeestimate",
            Field::TimeSpent => "timespent",
            Field::Updated => "updated",
        }
    }

    /// Case-insensitive lookup of a field name.
    pub fn from_name(name: &str) -> Option<Field> {
        Field::ALL
            .iter()
            .copied()
            .find(|f| f.name().eq_ignore_ascii_case(name))
    }

    pub fn domain(self) -> Domain {
        match self {
            Field::Status
            | Field::Project
            | Field::Priority
            | Field::IssueType
            | Field::Resolution
            | Field::Key
            | Field::Labels
            | Field::Components
            | Field::FixVersions => Domain::Enum,
            Field::Assignee | Field::Reporter | Field::Creator => Domain::User,
            Field::Summary | Field::Description => Domain::Text,
            Field::Created | Field::Updated | Field::ResolutionDate | Field::DueDate => {
                Domain::Date
            }
            Field::Id | Field::TimeEstimate | Field::TimeSpent => Domain::Number,
        }
    }

    /// Multi-valued fields match when any element matches.
    pub fn is_multi(self) -> bool {
        matches!(self, Field::Labels | Field::Components | Field::FixVersions)
    }
}

impl fmt::Display for Field {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl Serialize for Field {
    fn serialize<S: Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
        serializer.serialize_str(self.name())
    }
}

impl<'de> Deserialize<'de> for Field {
    fn deserialize<D: Deserializer<'de>>(deserializer: D) -> Result<Self, D::Error> {
        let name = String::deserialize(deserializer)?;
        Field::from_name(&name)
            .ok_or_else(|| serde::de::Error::custom(format!("unknown field `{name}`")))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn vocabulary_has_21_distinct_names() {
        let mut names: Vec<_> = Field::ALL.iter().map(|f| f.name().to_lowercase()).collect();
        let sorted = {
            let mut s = names.clone();
            s.sort();
            s
        };
        assert_eq!(names, sorted, "ALL must stay in alphabetical order");
        names.dedup();
        assert_eq!(names.len(), 21);
    }

    #[test]
    fn lookup_ignores_case() {
        assert_eq!(Field::from_name("FIXVERSIONS"), Some(Field::FixVersions));
        assert_eq!(Field::from_name("Status"), Some(Field::Status));
        assert_eq!(Field::from_name("sprint"), None);
    }

    #[test]
    fn ord_matches_all() {
        let mut sorted = Field::ALL;
        sorted.sort();
        assert_eq!(sorted, Field::ALL);
    }
}
