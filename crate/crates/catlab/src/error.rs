use std::fmt;

/// Position of a declaration inside a scenario file, 1-based.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord)]
pub struct Location {
    pub line: usize,
    pub column: usize,
}

impl Location {
    pub fn of_offset(text: &str, offset: usize) -> Self {
        let offset = offset.min(text.len());
        let before = &text[..offset];
        let line = before.matches('\n').count() + 1;
        let column = before.rsplit('\n').next().map_or(0, |l| l.chars().count()) + 1;
        Location { line, column }
    }
}

impl fmt::Display for Location {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}:{}", self.line, self.column)
    }
}

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error("{origin}:{at}: ParseError: {message}")]
    Parse { origin: String, at: Location, message: String },

    /// A declaration parsed but breaks a model invariant.
    #[error("{origin}:{at}: ValidationError: {source}")]
    Validation {
        origin: String,
        at: Location,
        #[source]
        source: catlab_core::Error,
    },

    #[error("cannot read {path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },

    #[error("{0}")]
    Usage(String),

    #[error(transparent)]
    Core(#[from] catlab_core::Error),

    #[error("cannot write report: {0}")]
    Output(String),
}

impl CliError {
    /// Name of the violated invariant for validation failures, e.g. `NotOrthogonal`.
    pub fn invariant(&self) -> Option<String> {
        match self {
            CliError::Validation { source, .. } | CliError::Core(source) => {
                source.to_string().split(':').next().map(str::to_owned)
            }
            _ => None,
        }
    }
}

pub type CliResult<T> = Result<T, CliError>;

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn offsets_map_to_line_and_column() {
        let text = "a = 1\nbb = 2\n\nφ = 3";
        assert_eq!(Location::of_offset(text, 0), Location { line: 1, column: 1 });
        assert_eq!(Location::of_offset(text, 6), Location { line: 2, column: 1 });
        assert_eq!(Location::of_offset(text, 9), Location { line: 2, column: 4 });
        let phi = text.find('=').unwrap();
        assert_eq!(Location::of_offset(text, phi), Location { line: 1, column: 3 });
        let last = text.rfind('=').unwrap();
        assert_eq!(Location::of_offset(text, last), Location { line: 4, column: 3 });
    }
}
