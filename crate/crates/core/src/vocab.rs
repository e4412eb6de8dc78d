//! Status and priority names used by the bundled project and by the
//! failure modes the scripted backend reproduces.

/// The seven workflow states of the test project.
pub const STATUSES: [&str; 7] = [
    "Abierto",
    "En Progreso",
    "Resuelto",
    "Validado",
    "Entregado",
    "Cerrado",
    "Reabierto",
];

/// States in which an issue carries a resolution date.
pub const RESOLVED_STATUSES: [&str; 4] = ["Resuelto", "Cerrado", "Entregado", "Validado"];

/// Spanish status name and the English name a model tends to emit instead.
///
/// Covers the mapping taught by the second Phase-1 prompt block plus the
/// project states it leaves out.
pub const STATUS_TRANSLATIONS: [(&str, &str); 8] = [
    ("Abierto", "Open"),
    ("En Progreso", "In Progress"),
    ("Resuelto", "Resolved"),
    ("Aprobada", "Approved"),
    ("Entregado", "Delivered"),
    ("Reabierto", "Reopened"),
    ("Cerrado", "Closed"),
    ("Validado", "Validated"),
];

/// Other English spellings of the same states.
pub const ENGLISH_STATUS_ALIASES: [&str; 5] = ["Solved", "Handed", "Reopen", "Done", "To Do"];

/// Jira's default priority scheme, highest first.
pub const PRIORITIES: [&str; 5] = ["Highest", "High", "Medium", "Low", "Lowest"];

/// Literal Spanish renderings of the priority names.
pub const PRIORITY_TRANSLATIONS: [(&str, &str); 5] = [
    ("Highest", "Máxima"),
    ("High", "Alta"),
    ("Medium", "Media"),
    ("Low", "Baja"),
    ("Lowest", "Mínima"),
];

pub fn english_status_for(spanish: &str) -> Option<&'static str> {
    STATUS_TRANSLATIONS
        .iter()
        .find(|(es, _)| es.to_lowercase() == spanish.to_lowercase())
        .map(|(_, en)| *en)
}

pub fn is_english_status(name: &str) -> bool {
    let lower = name.to_lowercase();
    STATUS_TRANSLATIONS
        .iter()
        .map(|(_, en)| *en)
        .chain(ENGLISH_STATUS_ALIASES)
        .any(|en| en.to_lowercase() == lower)
}

pub fn spanish_priority_for(english: &str) -> Option<&'static str> {
    PRIORITY_TRANSLATIONS
        .iter()
        .find(|(en, _)| en.eq_ignore_ascii_case(english))
        .map(|(_, es)| *es)
}

/// Position in [`PRIORITIES`]; lower is more urgent.
pub fn priority_rank(name: &str) -> Option<usize> {
    PRIORITIES.iter().position(|p| p.eq_ignore_ascii_case(name))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn translations() {
        assert_eq!(english_status_for("en progreso"), Some("In Progress"));
        assert!(is_english_status("in progress"));
        assert!(!is_english_status("En Progreso"));
        assert_eq!(spanish_priority_for("Highest"), Some("Máxima"));
        assert_eq!(priority_rank("low"), Some(3));
    }
}
