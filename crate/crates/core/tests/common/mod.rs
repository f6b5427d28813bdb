use std::path::Path;
use std::process::{Command, Output};

pub fn cli() -> Command {
    Command::new(env!("CARGO_BIN_EXE_gec-templates"))
}

pub fn run(args: &[&str]) -> Output {
    cli().args(args).output().expect("spawn gec-templates")
}

pub fn run_ok(args: &[&str]) -> Output {
    let out = run(args);
    assert!(
        out.status.success(),
        "command {args:?} failed: {}",
        String::from_utf8_lossy(&out.stderr)
    );
    out
}

pub fn write(path: &Path, content: &str) {
    std::fs::write(path, content).unwrap();
}

pub fn read(path: &Path) -> String {
    std::fs::read_to_string(path).unwrap()
}

/// JSONL line for a template with an optional stored action.
pub fn template_line(id: &str, left: &str, right: &str, action: Option<&str>) -> String {
    let action = match action {
        Some(a) => format!("\"{a}\""),
        None => "null".to_string(),
    };
    format!(
        "{{\"id\":\"{id}\",\"left\":\"{left}\",\"right\":\"{right}\",\"gap_min\":0,\"gap_max\":20,\"action\":{action},\"dppl_left\":null,\"dppl_right\":null,\"support\":null,\"source\":\"test\"}}"
    )
}
