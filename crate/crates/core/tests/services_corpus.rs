mod common;

use std::path::{Path, PathBuf};

use fragmentc_core::services::demo::{COMPOSE_ACTION, TRACE_ACTION};
use fragmentc_core::services::{ActionError, ActionResult, FsWorkspace, MemoryWorkspace};
use fragmentc_core::{Severity, Span};

use common::{corpus, msc_service, read};

#[test]
fn service_resolves_extensions() {
    let svc = msc_service();
    assert_eq!(svc.workflow_names(), vec!["symtab", "check"]);
    assert!(svc.format_available());
    assert_eq!(svc.actions().len(), 2);
    assert!(svc.warnings().iter().all(|w| w.severity != Severity::Error));
}

#[test]
fn check_reports_unknown_peer() {
    let svc = msc_service();
    let text = read("docs/mail.msc").replace("out response to sender", "out response to ghost");
    let path = Path::new("mail.msc");
    let features = svc.features(&text, path, &MemoryWorkspace::default());
    let errs: Vec<_> = features.diagnostics.iter().filter(|d| d.severity == Severity::Error).collect();
    assert_eq!(errs.len(), 1, "{errs:?}");
    assert_eq!(errs[0].message, "unknown instance ghost");
    assert_eq!((errs[0].line, errs[0].column), (13, 21));
    assert_eq!(errs[0].source, "check");
}

#[test]
fn symtab_reports_duplicates() {
    let svc = msc_service();
    let text = "msc m {\n  instance a { }\n  instance a { }\n}\n";
    let outcome = svc.parse(text, Path::new("d.msc"));
    let reports = svc.diagnostics(&outcome, Path::new("d.msc"), &MemoryWorkspace::default());
    assert_eq!(reports.len(), 1);
    assert_eq!(reports[0].message, "duplicate instance a");
    assert_eq!(reports[0].line, 3);
}

#[test]
fn trace_on_mail() {
    let svc = msc_service();
    let path = corpus().join("docs/mail.msc");
    let res = svc.run_editor_action(TRACE_ACTION, &read("docs/mail.msc"), &path, Span::new(1, 1, 1, 1)).unwrap();
    let ActionResult::NewFiles { files } = res else { panic!("{res:?}") };
    let trace = &files[&path.with_extension("trace")];
    assert_eq!(
        trace,
        "// trace of msc mail\nsender.out message\nreceiver.in message\nreceiver.out response\nsender.in response\n"
    );
}

#[test]
fn trace_reports_deadlock() {
    let svc = msc_service();
    let text = "msc d { instance a { in x from b; out y to b; } instance b { in y from a; out x to a; } }";
    let res = svc.run_editor_action(TRACE_ACTION, text, Path::new("d.msc"), Span::new(1, 1, 1, 1)).unwrap();
    let ActionResult::Reports { reports } = res else { panic!("{res:?}") };
    assert_eq!(reports[0].severity, Severity::Warning);
}

#[test]
fn compose_matches_oracle() {
    let svc = msc_service();
    let files: Vec<(PathBuf, String)> =
        ["docs/mail.msc", "docs/followup.msc"].iter().map(|f| (corpus().join(f), "corpus".to_string())).collect();
    let res = svc.run_navigator_action(COMPOSE_ACTION, &files, &FsWorkspace).unwrap();
    let ActionResult::NewFiles { files: out } = res else { panic!("{res:?}") };
    let text = &out[&corpus().join("docs/composed.msc")];
    assert_eq!(text.as_bytes(), read("docs/expected/composed.msc").as_bytes());
}

#[test]
fn compose_needs_two_files() {
    let svc = msc_service();
    let files = vec![(corpus().join("docs/mail.msc"), "corpus".to_string())];
    let err = svc.run_navigator_action(COMPOSE_ACTION, &files, &FsWorkspace).unwrap_err();
    assert!(matches!(err, ActionError::InvalidArguments { ref message, .. } if message.contains("at least 2")));
}

#[test]
fn compose_surfaces_parse_errors() {
    let svc = msc_service();
    let mut ws = MemoryWorkspace::default();
    ws.documents.insert("a.msc".into(), "msc a { }".into());
    ws.documents.insert("b.msc".into(), "msc b { instance }".into());
    let files = vec![("a.msc".into(), String::new()), ("b.msc".into(), String::new())];
    let res = svc.run_navigator_action(COMPOSE_ACTION, &files, &ws).unwrap();
    let ActionResult::Reports { reports } = res else { panic!("{res:?}") };
    assert!(reports.iter().any(|r| r.severity == Severity::Error && r.file.ends_with("b.msc")));
}

#[test]
fn unknown_action() {
    let svc = msc_service();
    let err = svc.run_editor_action("nope", "", Path::new("x.msc"), Span::new(1, 1, 1, 1)).unwrap_err();
    assert!(matches!(err, ActionError::Unknown(ref id) if id == "nope"));
}

#[test]
fn formatting_mail_is_stable() {
    let svc = msc_service();
    let path = Path::new("mail.msc");
    let once = svc.format(&read("docs/mail.msc"), path).unwrap();
    assert!(once.starts_with("msc mail {\n  instance sender {\n    out message to receiver;\n"), "{once}");
    assert_eq!(svc.format(&once, path).unwrap(), once);
}

#[test]
fn features_json_shape() {
    let svc = msc_service();
    let json = svc.features(&read("docs/mail.msc"), Path::new("mail.msc"), &MemoryWorkspace::default()).to_json();
    let folds = json["folds"].as_array().unwrap();
    assert_eq!(folds[0]["span"], serde_json::json!([1, 1, 19, 2]));
    assert_eq!(json["outline"][0]["label"], "MSC mail");
}
