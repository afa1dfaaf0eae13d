//! Line-prefixed JSON dump of a graph for debugging and interchange.

use super::{AigError, AigGraph, Result};

pub const JSON_HEADER: &str = "ipcamo-aig-json v1";

pub fn to_json(g: &AigGraph) -> String {
    let body = serde_json::to_string_pretty(g).expect("graph serializes");
    format!("{JSON_HEADER}\n{body}\n")
}

pub fn from_json(text: &str) -> Result<AigGraph> {
    let (head, body) = text.split_once('\n').unwrap_or((text, ""));
    if head.trim_end() != JSON_HEADER {
        return Err(AigError::Json(format!("expected header `{JSON_HEADER}`, found `{}`", head.trim_end())));
    }
    let g: AigGraph = serde_json::from_str(body).map_err(|e| AigError::Json(e.to_string()))?;
    g.check_structure()?;
    Ok(g)
}
