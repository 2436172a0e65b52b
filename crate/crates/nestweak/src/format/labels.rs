//! Span-label export: tab-separated records preceded by `#` header lines
//! carrying the provenance block. Loss weight is 1 for Positive/Negative
//! and 0 for Neutral, derivable from the label column alone.

use std::fs;
use std::path::Path;

use nestweak_core::neutralization::{render_span_labels, SpanLabel};

use crate::error::ToolError;
use crate::provenance::Provenance;

pub fn write_span_labels(
    path: &Path,
    labels: &[SpanLabel],
    provenance: Option<&Provenance>,
) -> Result<(), ToolError> {
    let mut out = String::new();
    if let Some(p) = provenance {
        out.push_str(&format!(
            "# provenance: {}\n",
            serde_json::to_string(p).expect("provenance serializes")
        ));
    }
    out.push_str("# doc_id\tstart\tend\tlabel\ttype\tneutral_reason\n");
    out.push_str(&render_span_labels(labels));
    fs::write(path, out).map_err(|e| ToolError::io(path, e))
}
