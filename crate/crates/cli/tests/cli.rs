use std::process::Command;

fn jiragpt() -> Command {
    let mut cmd = Command::new(env!("CARGO_BIN_EXE_jiragpt"));
    cmd.env_remove("JIRAGPT_LLM_API_KEY");
    cmd
}

#[test]
fn query_prints_one_line_per_issue() {
    let out = jiragpt()
        .args(["query", "Muestra las incidencias abiertas", "--backend", "scripted:golden", "--embedded"])
        .output()
        .unwrap();
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let stdout = String::from_utf8(out.stdout).unwrap();
    assert_eq!(stdout.lines().count(), 14);
    assert!(stdout.lines().all(|l| l.contains("Abierto") && l.contains("/browse/GPT4-")));
}

#[test]
fn complex_query_as_json() {
    let out = jiragpt()
        .args([
            "query",
            "¿Cuántas tareas creadas este mes están en progreso?",
            "--complex",
            "--json",
            "--backend",
            "scripted:golden",
            "--embedded",
        ])
        .output()
        .unwrap();
    assert!(out.status.success());
    let body: serde_json::Value = serde_json::from_slice(&out.stdout).unwrap();
    assert_eq!(body["result"]["issues"][0]["key"], "GPT4-15");
    assert!(body["result"]["answer_text"].as_str().unwrap().contains('1'));
    assert_eq!(body["usage"]["phases"].as_array().unwrap().len(), 3);
}

#[test]
fn live_backend_needs_a_key() {
    let out = jiragpt()
        .args(["query", "Muestra las incidencias abiertas", "--embedded"])
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).contains("JIRAGPT_LLM_API_KEY"));
}

#[test]
fn example_config_loads() {
    let path = concat!(env!("CARGO_MANIFEST_DIR"), "/../../config/jiragpt.example.toml");
    let out = jiragpt()
        .args(["query", "Muestra las incidencias abiertas", "--config", path, "--backend", "scripted:golden", "--embedded"])
        .output()
        .unwrap();
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
}

#[test]
fn ablation_writes_csv_and_summary() {
    let dir = tempfile::tempdir().unwrap();
    let out = jiragpt()
        .args(["eval", "ablation", "--backend", "scripted:golden", "--timestamp", "2023-10-16T10:00:00Z", "--decimal-comma"])
        .arg("--out")
        .arg(dir.path())
        .output()
        .unwrap();
    assert!(out.status.success());
    assert!(String::from_utf8_lossy(&out.stdout).contains("100,00%"));
    let mut names: Vec<String> = std::fs::read_dir(dir.path())
        .unwrap()
        .map(|e| e.unwrap().file_name().into_string().unwrap())
        .collect();
    names.sort();
    assert_eq!(
        names,
        [
            "ablation_scripted-golden_B1+B1-2+B1-3+full_t0.0_20231016T100000Z.csv",
            "ablation_scripted-golden_B1+B1-2+B1-3+full_t0.0_20231016T100000Z.txt"
        ]
    );
    let csv = std::fs::read_to_string(dir.path().join(&names[0])).unwrap();
    assert_eq!(csv.lines().count(), 1 + 4 * 70);
}

#[test]
fn unknown_backend_is_rejected() {
    let out = jiragpt().args(["eval", "ablation", "--backend", "scripted:nope"]).output().unwrap();
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).contains("golden, table1, tempnoise"));
}
