use bratteli_core::compactness::CompactnessError;
use bratteli_core::families::FamilyError;
use bratteli_core::graph::{GraphError, ValidationReport};
use bratteli_core::kernel::KernelError;
use bratteli_core::measure::MeasureError;
use bratteli_core::metric::MetricError;
use bratteli_core::transport::TransportError;
use serde_json::json;

pub const EXIT_INTERNAL: i32 = 1;
pub const EXIT_VALIDATION: i32 = 2;
pub const EXIT_INCOHERENT: i32 = 3;
pub const EXIT_RESOURCE: i32 = 4;

/// A failure reported as one JSON object on stderr.
#[derive(Debug)]
pub struct CliError {
    pub code: i32,
    pub kind: &'static str,
    pub message: String,
    pub details: serde_json::Value,
}

impl CliError {
    pub fn new(code: i32, kind: &'static str, message: impl Into<String>) -> Self {
        Self { code, kind, message: message.into(), details: serde_json::Value::Null }
    }

    pub fn config(message: impl Into<String>) -> Self {
        Self::new(EXIT_VALIDATION, "config", message)
    }

    pub fn validation(report: &ValidationReport) -> Self {
        Self {
            code: EXIT_VALIDATION,
            kind: "validation",
            message: format!("graph rejected with {} violation(s)", report.violations.len()),
            details: serde_json::to_value(report).unwrap_or_default(),
        }
    }

    pub fn to_json(&self) -> String {
        json!({
            "error": self.kind,
            "message": self.message,
            "exit_code": self.code,
            "details": self.details,
        })
        .to_string()
    }
}

impl From<std::io::Error> for CliError {
    fn from(e: std::io::Error) -> Self {
        Self::new(EXIT_INTERNAL, "io", e.to_string())
    }
}

impl From<GraphError> for CliError {
    fn from(e: GraphError) -> Self {
        match e {
            GraphError::MultiplicityOverflow { .. } => Self::new(EXIT_RESOURCE, "resource", e.to_string()),
            _ => Self::new(EXIT_VALIDATION, "graph", e.to_string()),
        }
    }
}

impl From<FamilyError> for CliError {
    fn from(e: FamilyError) -> Self {
        match e {
            FamilyError::LevelTooLarge { .. } => Self::new(EXIT_RESOURCE, "resource", e.to_string()),
            FamilyError::Graph(g) => g.into(),
            FamilyError::InvalidParameter(_) => Self::new(EXIT_VALIDATION, "family", e.to_string()),
        }
    }
}

impl From<KernelError> for CliError {
    fn from(e: KernelError) -> Self {
        Self::new(EXIT_VALIDATION, "kernel", e.to_string())
    }
}

impl From<TransportError> for CliError {
    fn from(e: TransportError) -> Self {
        match e {
            TransportError::TooLarge { .. } | TransportError::NoConvergence => {
                Self::new(EXIT_RESOURCE, "resource", e.to_string())
            }
            _ => Self::new(EXIT_VALIDATION, "transport", e.to_string()),
        }
    }
}

impl From<MetricError> for CliError {
    fn from(e: MetricError) -> Self {
        match e {
            MetricError::Transport(t) => t.into(),
            _ => Self::new(EXIT_VALIDATION, "metric", e.to_string()),
        }
    }
}

impl From<CompactnessError> for CliError {
    fn from(e: CompactnessError) -> Self {
        match e {
            CompactnessError::Metric(m) => m.into(),
            CompactnessError::TooLargeForExhaustive(_) => Self::new(EXIT_RESOURCE, "resource", e.to_string()),
            _ => Self::new(EXIT_VALIDATION, "compactness", e.to_string()),
        }
    }
}

impl From<MeasureError> for CliError {
    fn from(e: MeasureError) -> Self {
        let level = match &e {
            MeasureError::Incoherent { level, .. }
            | MeasureError::Centrality { level, .. }
            | MeasureError::ForwardRow { level, .. } => Some(*level),
            _ => None,
        };
        match e {
            MeasureError::Metric(m) => m.into(),
            MeasureError::Transport(t) => t.into(),
            MeasureError::Kernel(k) => k.into(),
            MeasureError::Incoherent { .. }
            | MeasureError::Centrality { .. }
            | MeasureError::ForwardRow { .. }
            | MeasureError::Parse(_)
            | MeasureError::MismatchedRanges(_) => Self {
                code: EXIT_INCOHERENT,
                kind: "incoherent-measure",
                message: e.to_string(),
                details: json!({ "level": level }),
            },
            _ => Self::new(EXIT_VALIDATION, "measure", e.to_string()),
        }
    }
}
