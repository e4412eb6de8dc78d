//! Issue snapshots, the Jira REST v2 JSON mapping, and field reduction.
//!
//! An [`Issue`] keeps exactly the 21 fields of [`Field::ALL`]; everything else
//! in a Jira payload is dropped on the way in. Optional values are either
//! present or absent, never empty: `""`, `null` and `[]` all read as absent.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;

use chrono::{DateTime, NaiveDate, Utc};
use serde::ser::SerializeMap;
use serde::{Deserialize, Serialize, Serializer};
use serde_json::{json, Map, Value as Json};
use thiserror::Error;

use crate::jql::Field;
use crate::vocab::RESOLVED_STATUSES;

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Issue {
    pub key: String,
    pub id: String,
    pub summary: String,
    #[serde(default)]
    pub description: Option<String>,
    pub status: String,
    #[serde(default)]
    pub assignee: Option<String>,
    pub reporter: String,
    pub creator: String,
    #[serde(default)]
    pub priority: Option<String>,
    pub issuetype: String,
    pub project: String,
    #[serde(with = "jira_time")]
    pub created: DateTime<Utc>,
    #[serde(with = "jira_time")]
    pub updated: DateTime<Utc>,
    #[serde(default, with = "jira_time::option")]
    pub resolutiondate: Option<DateTime<Utc>>,
    #[serde(default)]
    pub duedate: Option<NaiveDate>,
    #[serde(default)]
    pub resolution: Option<String>,
    #[serde(default)]
    pub labels: Vec<String>,
    #[serde(default)]
    pub components: Vec<String>,
    #[serde(default, rename = "fixVersions")]
    pub fix_versions: Vec<String>,
    #[serde(default)]
    pub timeestimate: Option<i64>,
    #[serde(default)]
    pub timespent: Option<i64>,
}

/// Borrowed view of one field's value.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum FieldRef<'a> {
    Text(&'a str),
    Timestamp(DateTime<Utc>),
    Date(NaiveDate),
    Number(i64),
    List(&'a [String]),
}

/// Owned field value, as kept in a [`ReducedIssue`].
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum FieldValue {
    Text(String),
    Timestamp(DateTime<Utc>),
    Date(NaiveDate),
    Number(i64),
    List(Vec<String>),
}

impl FieldRef<'_> {
    pub fn to_owned_value(self) -> FieldValue {
        match self {
            FieldRef::Text(s) => FieldValue::Text(s.to_string()),
            FieldRef::Timestamp(t) => FieldValue::Timestamp(t),
            FieldRef::Date(d) => FieldValue::Date(d),
            FieldRef::Number(n) => FieldValue::Number(n),
            FieldRef::List(l) => FieldValue::List(l.to_vec()),
        }
    }
}

impl FieldValue {
    pub fn as_ref(&self) -> FieldRef<'_> {
        match self {
            FieldValue::Text(s) => FieldRef::Text(s),
            FieldValue::Timestamp(t) => FieldRef::Timestamp(*t),
            FieldValue::Date(d) => FieldRef::Date(*d),
            FieldValue::Number(n) => FieldRef::Number(*n),
            FieldValue::List(l) => FieldRef::List(l),
        }
    }

    pub fn to_json(&self) -> Json {
        match self {
            FieldValue::Text(s) => Json::String(s.clone()),
            FieldValue::Timestamp(t) => Json::String(jira_time::format(t)),
            FieldValue::Date(d) => Json::String(d.format("%Y-%m-%d").to_string()),
            FieldValue::Number(n) => json!(n),
            FieldValue::List(l) => json!(l),
        }
    }
}

impl Serialize for FieldValue {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        self.to_json().serialize(s)
    }
}

/// Anything that can answer "what is field X" for an issue.
pub trait FieldView {
    fn key(&self) -> &str;
    fn field(&self, field: Field) -> Option<FieldRef<'_>>;
}

fn opt_text(s: &Option<String>) -> Option<FieldRef<'_>> {
    s.as_deref().map(FieldRef::Text)
}

fn list(l: &[String]) -> Option<FieldRef<'_>> {
    (!l.is_empty()).then_some(FieldRef::List(l))
}

impl FieldView for Issue {
    fn key(&self) -> &str {
        &self.key
    }

    fn field(&self, field: Field) -> Option<FieldRef<'_>> {
        match field {
            Field::Key => Some(FieldRef::Text(&self.key)),
            Field::Id => Some(match self.id.parse::<i64>() {
                Ok(n) => FieldRef::Number(n),
                Err(_) => FieldRef::Text(&self.id),
            }),
            Field::Summary => Some(FieldRef::Text(&self.summary)),
            Field::Description => opt_text(&self.description),
            Field::Status => Some(FieldRef::Text(&self.status)),
            Field::Assignee => opt_text(&self.assignee),
            Field::Reporter => Some(FieldRef::Text(&self.reporter)),
            Field::Creator => Some(FieldRef::Text(&self.creator)),
            Field::Priority => opt_text(&self.priority),
            Field::IssueType => Some(FieldRef::Text(&self.issuetype)),
            Field::Project => Some(FieldRef::Text(&self.project)),
            Field::Created => Some(FieldRef::Timestamp(self.created)),
            Field::Updated => Some(FieldRef::Timestamp(self.updated)),
            Field::ResolutionDate => self.resolutiondate.map(FieldRef::Timestamp),
            Field::DueDate => self.duedate.map(FieldRef::Date),
            Field::Resolution => opt_text(&self.resolution),
            Field::Labels => list(&self.labels),
            Field::Components => list(&self.components),
            Field::FixVersions => list(&self.fix_versions),
            Field::TimeEstimate => self.timeestimate.map(FieldRef::Number),
            Field::TimeSpent => self.timespent.map(FieldRef::Number),
        }
    }
}

/// Split `GPT4-7` into `("GPT4", 7)`.
pub fn split_key(key: &str) -> Option<(&str, u64)> {
    let (project, num) = key.rsplit_once('-')?;
    let n: u64 = num.parse().ok()?;
    let valid_project = !project.is_empty()
        && project.chars().next().is_some_and(|c| c.is_ascii_alphabetic())
        && project.chars().all(|c| c.is_ascii_alphanumeric() || c == '_');
    (valid_project && n > 0 && !num.starts_with('+')).then_some((project, n))
}

impl Issue {
    /// Every broken per-issue invariant, as readable messages.
    pub fn violations(&self) -> Vec<String> {
        let mut out = Vec::new();
        match split_key(&self.key) {
            None => out.push(format!("{}: key is not of the form PROJECT-N", self.key)),
            Some((prefix, _)) if prefix != self.project => out.push(format!(
                "{}: project `{}` does not match key prefix",
                self.key, self.project
            )),
            _ => {}
        }
        if self.created > self.updated {
            out.push(format!("{}: created is after updated", self.key));
        }
        if self.resolutiondate.is_some() && !RESOLVED_STATUSES.contains(&self.status.as_str()) {
            out.push(format!(
                "{}: resolutiondate set while status is `{}`",
                self.key, self.status
            ));
        }
        let empty_strings = [
            ("description", self.description.as_deref()),
            ("assignee", self.assignee.as_deref()),
            ("priority", self.priority.as_deref()),
            ("resolution", self.resolution.as_deref()),
        ];
        for (name, v) in empty_strings {
            if v == Some("") {
                out.push(format!("{}: {name} is an empty string, use absent", self.key));
            }
        }
        out
    }
}

#[derive(Debug, Error, PartialEq)]
pub enum SchemaError {
    #[error("issue JSON is missing `{0}`")]
    Missing(String),
    #[error("issue field `{field}` has an unexpected shape: {detail}")]
    Shape { field: String, detail: String },
}

fn named(v: &Json, inner: &[&str]) -> Option<String> {
    match v {
        Json::String(s) => Some(s.clone()),
        Json::Object(o) => inner
            .iter()
            .find_map(|k| o.get(*k).and_then(Json::as_str))
            .map(str::to_string),
        _ => None,
    }
    .filter(|s| !s.is_empty())
}

fn names(v: Option<&Json>, field: &str) -> Result<Vec<String>, SchemaError> {
    match v {
        None | Some(Json::Null) => Ok(Vec::new()),
        Some(Json::Array(items)) => items
            .iter()
            .map(|item| {
                named(item, &["name"]).ok_or_else(|| SchemaError::Shape {
                    field: field.to_string(),
                    detail: format!("element {item} has no name"),
                })
            })
            .collect(),
        Some(other) => Err(SchemaError::Shape {
            field: field.to_string(),
            detail: format!("expected array, got {other}"),
        }),
    }
}

/// Map one entry of a Jira REST v2 `issues` array onto an [`Issue`].
///
/// Nested objects are flattened to their display names; users read `name`
/// and fall back to `displayName`.
pub fn from_jira_json(raw: &Json) -> Result<Issue, SchemaError> {
    let obj = raw
        .as_object()
        .ok_or_else(|| SchemaError::Missing("issue object".into()))?;
    let key = obj
        .get("key")
        .and_then(Json::as_str)
        .ok_or_else(|| SchemaError::Missing("key".into()))?
        .to_string();
    let id = match obj.get("id") {
        Some(Json::String(s)) => s.clone(),
        Some(Json::Number(n)) => n.to_string(),
        _ => return Err(SchemaError::Missing("id".into())),
    };
    let fields = obj
        .get("fields")
        .and_then(Json::as_object)
        .ok_or_else(|| SchemaError::Missing("fields".into()))?;

    let get = |name: &str| fields.get(name).filter(|v| !v.is_null());
    let required = |name: &str, inner: &[&str]| -> Result<String, SchemaError> {
        get(name)
            .and_then(|v| named(v, inner))
            .ok_or_else(|| SchemaError::Missing(format!("fields.{name}")))
    };
    let optional = |name: &str, inner: &[&str]| get(name).and_then(|v| named(v, inner));
    let user = ["name", "displayName"];
    let time = |name: &str| -> Result<Option<DateTime<Utc>>, SchemaError> {
        match get(name) {
            None => Ok(None),
            Some(Json::String(s)) => jira_time::parse(s).map(Some).map_err(|e| SchemaError::Shape {
                field: name.to_string(),
                detail: e,
            }),
            Some(other) => Err(SchemaError::Shape {
                field: name.to_string(),
                detail: format!("expected timestamp string, got {other}"),
            }),
        }
    };
    let number = |name: &str| -> Result<Option<i64>, SchemaError> {
        match get(name) {
            None => Ok(None),
            Some(v) => v.as_i64().map(Some).ok_or_else(|| SchemaError::Shape {
                field: name.to_string(),
                detail: format!("expected integer, got {v}"),
            }),
        }
    };
    let labels = match get("labels") {
        None => Vec::new(),
        Some(Json::Array(items)) => items
            .iter()
            .filter_map(|l| l.as_str().map(str::to_string))
            .collect(),
        Some(other) => {
            return Err(SchemaError::Shape {
                field: "labels".into(),
                detail: format!("expected array, got {other}"),
            })
        }
    };
    let duedate = match get("duedate") {
        None => None,
        Some(Json::String(s)) => Some(
            NaiveDate::parse_from_str(s.get(..10).unwrap_or(s), "%Y-%m-%d").map_err(|e| {
                SchemaError::Shape {
                    field: "duedate".into(),
                    detail: e.to_string(),
                }
            })?,
        ),
        Some(other) => {
            return Err(SchemaError::Shape {
                field: "duedate".into(),
                detail: format!("expected date string, got {other}"),
            })
        }
    };

    Ok(Issue {
        key,
        id,
        summary: get("summary")
            .and_then(Json::as_str)
            .ok_or_else(|| SchemaError::Missing("fields.summary".into()))?
            .to_string(),
        description: optional("description", &[]),
        status: required("status", &["name"])?,
        assignee: optional("assignee", &user),
        reporter: required("reporter", &user)?,
        creator: required("creator", &user)?,
        priority: optional("priority", &["name"]),
        issuetype: required("issuetype", &["name"])?,
        project: required("project", &["key"])?,
        created: time("created")?.ok_or_else(|| SchemaError::Missing("fields.created".into()))?,
        updated: time("updated")?.ok_or_else(|| SchemaError::Missing("fields.updated".into()))?,
        resolutiondate: time("resolutiondate")?,
        duedate,
        resolution: optional("resolution", &["name"]),
        labels,
        components: names(get("components"), "components")?,
        fix_versions: names(get("fixVersions"), "fixVersions")?,
        timeestimate: number("timeestimate")?,
        timespent: number("timespent")?,
    })
}

/// Render an [`Issue`] the way Jira REST v2 returns it in a search response.
pub fn to_jira_json(issue: &Issue) -> Json {
    let user = |u: &str| json!({ "name": u, "displayName": u });
    let opt_named = |v: &Option<String>| match v {
        Some(n) => json!({ "name": n }),
        None => Json::Null,
    };
    let mut fields = Map::new();
    fields.insert("summary".into(), json!(issue.summary));
    fields.insert("description".into(), json!(issue.description));
    fields.insert("status".into(), json!({ "name": issue.status }));
    fields.insert(
        "assignee".into(),
        issue.assignee.as_deref().map(user).unwrap_or(Json::Null),
    );
    fields.insert("reporter".into(), user(&issue.reporter));
    fields.insert("creator".into(), user(&issue.creator));
    fields.insert("priority".into(), opt_named(&issue.priority));
    fields.insert("issuetype".into(), json!({ "name": issue.issuetype }));
    fields.insert("project".into(), json!({ "key": issue.project }));
    fields.insert("created".into(), json!(jira_time::format(&issue.created)));
    fields.insert("updated".into(), json!(jira_time::format(&issue.updated)));
    fields.insert(
        "resolutiondate".into(),
        json!(issue.resolutiondate.as_ref().map(jira_time::format)),
    );
    fields.insert(
        "duedate".into(),
        json!(issue.duedate.map(|d| d.format("%Y-%m-%d").to_string())),
    );
    fields.insert("resolution".into(), opt_named(&issue.resolution));
    fields.insert("labels".into(), json!(issue.labels));
    let named_list =
        |l: &[String]| Json::Array(l.iter().map(|n| json!({ "name": n })).collect());
    fields.insert("components".into(), named_list(&issue.components));
    fields.insert("fixVersions".into(), named_list(&issue.fix_versions));
    fields.insert("timeestimate".into(), json!(issue.timeestimate));
    fields.insert("timespent".into(), json!(issue.timespent));
    json!({ "key": issue.key, "id": issue.id, "fields": fields })
}

/// An issue projected onto a subset of fields. The key is always kept.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ReducedIssue {
    pub key: String,
    pub selected: BTreeMap<Field, FieldValue>,
}

impl FieldView for ReducedIssue {
    fn key(&self) -> &str {
        &self.key
    }

    fn field(&self, field: Field) -> Option<FieldRef<'_>> {
        if field == Field::Key {
            return Some(FieldRef::Text(&self.key));
        }
        self.selected.get(&field).map(FieldValue::as_ref)
    }
}

/// Key first, then selected fields in alphabetical order.
impl Serialize for ReducedIssue {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        let mut map = s.serialize_map(Some(self.selected.len() + 1))?;
        map.serialize_entry("key", &self.key)?;
        for (field, value) in &self.selected {
            map.serialize_entry(field.name(), value)?;
        }
        map.end()
    }
}

/// A requested field name that is not one of the 21 retained fields.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct UnknownFieldWarning(pub String);

impl fmt::Display for UnknownFieldWarning {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "ignoring unknown field `{}`", self.0)
    }
}

/// Project onto a typed field set. Absent values stay absent.
pub fn reduce_fields<V: FieldView>(issue: &V, keep: &BTreeSet<Field>) -> ReducedIssue {
    let selected = keep
        .iter()
        .filter(|f| **f != Field::Key)
        .filter_map(|f| issue.field(*f).map(|v| (*f, v.to_owned_value())))
        .collect();
    ReducedIssue {
        key: issue.key().to_string(),
        selected,
    }
}

/// Project onto field names. Names outside the vocabulary are dropped with a
/// warning rather than failing.
pub fn reduce<'a, V: FieldView>(
    issue: &V,
    keep: impl IntoIterator<Item = &'a str>,
) -> (ReducedIssue, Vec<UnknownFieldWarning>) {
    let mut fields = BTreeSet::new();
    let mut warnings = Vec::new();
    for name in keep {
        match Field::from_name(name.trim()) {
            Some(f) => {
                fields.insert(f);
            }
            None => {
                tracing::warn!(field = name, "unknown field in reduction request");
                warnings.push(UnknownFieldWarning(name.to_string()));
            }
        }
    }
    (reduce_fields(issue, &fields), warnings)
}

/// Compact JSON array of reduced issues.
pub fn serialize_reduced(issues: &[ReducedIssue]) -> String {
    serde_json::to_string(issues).expect("reduced issues always serialize")
}

/// Jira's timestamp format: `2023-10-02T09:30:00.000+0000`.
pub mod jira_time {
    use chrono::{DateTime, FixedOffset, Utc};
    use serde::{Deserialize, Deserializer, Serializer};

    pub fn format(t: &DateTime<Utc>) -> String {
        t.format("%Y-%m-%dT%H:%M:%S%.3f%z").to_string()
    }

    pub fn parse(s: &str) -> Result<DateTime<Utc>, String> {
        DateTime::<FixedOffset>::parse_from_str(s, "%Y-%m-%dT%H:%M:%S%.f%z")
            .or_else(|_| DateTime::parse_from_rfc3339(s))
            .map(|t| t.with_timezone(&Utc))
            .map_err(|e| format!("bad timestamp `{s}`: {e}"))
    }

    pub fn serialize<S: Serializer>(t: &DateTime<Utc>, s: S) -> Result<S::Ok, S::Error> {
        s.serialize_str(&format(t))
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<DateTime<Utc>, D::Error> {
        let s = String::deserialize(d)?;
        parse(&s).map_err(serde::de::Error::custom)
    }

    pub mod option {
        use super::*;

        pub fn serialize<S: Serializer>(t: &Option<DateTime<Utc>>, s: S) -> Result<S::Ok, S::Error> {
            match t {
                Some(t) => s.serialize_str(&format(t)),
                None => s.serialize_none(),
            }
        }

        pub fn deserialize<'de, D: Deserializer<'de>>(
            d: D,
        ) -> Result<Option<DateTime<Utc>>, D::Error> {
            match Option::<String>::deserialize(d)? {
                Some(s) => parse(&s).map(Some).map_err(serde::de::Error::custom),
                None => Ok(None),
            }
        }
    }
}
