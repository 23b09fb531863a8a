//! `shredkit validate`: grammar diagnostics for token files.

use std::path::PathBuf;

use shredkit::tokens::{parse_stream, validate, Severity};

use crate::CmdError;

pub fn run(paths: &[PathBuf]) -> Result<(), CmdError> {
    let mut errors = 0usize;
    let mut unreadable = 0usize;

    for path in paths {
        let text = match std::fs::read_to_string(path) {
            Ok(text) => text,
            Err(e) => {
                eprintln!("{}: unreadable: {e}", path.display());
                unreadable += 1;
                continue;
            }
        };
        let parsed = parse_stream(&text);
        for warning in &parsed.warnings {
            eprintln!(
                "{}:{}: warning: {}",
                path.display(),
                warning.word_index,
                warning.message
            );
        }
        for violation in validate(&parsed.stream) {
            match violation.severity {
                Severity::Error => {
                    eprintln!(
                        "{}:{}: {}",
                        path.display(),
                        violation.token_index,
                        violation.message
                    );
                    errors += 1;
                }
                Severity::Warning => {
                    eprintln!(
                        "{}:{}: warning: {}",
                        path.display(),
                        violation.token_index,
                        violation.message
                    );
                }
            }
        }
    }

    if unreadable > 0 {
        return Err(CmdError::Io(format!("{unreadable} unreadable file(s)")));
    }
    if errors > 0 {
        return Err(CmdError::Domain(format!("{errors} violation(s)")));
    }
    Ok(())
}
