//! JSON system files: `{"maps": [{"breakpoints": [...], "slopes": [...], "offset": t}, ...]}`.
//!
//! Numbers may be JSON numbers or strings such as `"2/5"`.

use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::ifs::{validate, Cplifs, RawMap};
use crate::{Error, Result};

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SystemFile {
    pub maps: Vec<RawMap>,
}

pub fn parse_raw(text: &str) -> Result<Vec<RawMap>> {
    let file: SystemFile = serde_json::from_str(text).map_err(|e| Error::Config(e.to_string()))?;
    Ok(file.maps)
}

pub fn parse_system(text: &str) -> Result<Cplifs> {
    validate(&parse_raw(text)?)
}

pub fn load_system(path: &Path) -> Result<Cplifs> {
    let text = std::fs::read_to_string(path).map_err(|e| Error::Config(format!("{}: {e}", path.display())))?;
    parse_system(&text)
}

pub fn to_json(f: &Cplifs) -> String {
    serde_json::to_string_pretty(&SystemFile { maps: f.raw() }).expect("system serializes")
}
