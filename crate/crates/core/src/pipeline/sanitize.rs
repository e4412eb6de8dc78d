//! Strip the decoration models put around a JQL answer.

const LABELS: [&str; 6] = ["jql query:", "jql:", "query:", "consulta jql:", "consulta:", "answer:"];

fn strip_fences(text: &str) -> &str {
    let t = text.trim();
    let Some(rest) = t.strip_prefix("```") else {
        return t;
    };
    // drop an info string such as ```jql
    let body = match rest.find('\n') {
        Some(i) if !rest[..i].trim().contains(' ') => &rest[i + 1..],
        _ => rest,
    };
    body.trim_end().strip_suffix("```").unwrap_or(body).trim()
}

fn strip_label(text: &str) -> &str {
    let lower = text.to_lowercase();
    for label in LABELS {
        if lower.starts_with(label) {
            return text[label.len()..].trim_start();
        }
    }
    text
}

fn unwrap_quotes(text: &str) -> &str {
    for (open, close) in [('"', '"'), ('\'', '\''), ('“', '”'), ('‘', '’')] {
        if let Some(inner) = text.strip_prefix(open).and_then(|t| t.strip_suffix(close)) {
            // only when the quotes enclose the whole answer, not a value
            let balanced = if open == close {
                !inner.contains(open)
            } else {
                let mut depth = 0i32;
                inner.chars().all(|c| {
                    if c == open {
                        depth += 1;
                    } else if c == close {
                        depth -= 1;
                    }
                    depth >= 0
                }) && depth == 0
            };
            if balanced && !inner.trim().is_empty() {
                return inner.trim();
            }
        }
    }
    text
}

/// Normalize a raw Phase-1 completion into something the parser can try.
pub fn sanitize_completion(raw: &str) -> String {
    let mut text = strip_fences(raw).to_string();
    text = text.replace('`', "");
    text = strip_label(text.trim()).to_string();
    text = unwrap_quotes(text.trim()).to_string();
    text = text
        .replace(['“', '”', '„'], "\"")
        .replace(['‘', '’'], "'");
    let mut text = text.trim().to_string();
    while text.ends_with(['.', ';']) {
        text.pop();
        text = text.trim_end().to_string();
    }
    // collapse internal newlines to spaces
    text.split_whitespace().collect::<Vec<_>>().join(" ")
}
