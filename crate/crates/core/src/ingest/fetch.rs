//! The one place that touches the network. Everything else runs offline
//! from snapshots.

use std::path::Path;

use crate::error::Error;
use crate::Result;

/// Downloads `url` to `dest`. Used by the ingest command's explicit
/// `--fetch` flag; no other code path performs network I/O.
pub fn fetch_url(url: &str, dest: &Path) -> Result<()> {
    let mut response = ureq::get(url).call().map_err(|e| Error::Fetch {
        url: url.to_string(),
        message: e.to_string(),
    })?;
    let body = response
        .body_mut()
        .read_to_vec()
        .map_err(|e| Error::Fetch {
            url: url.to_string(),
            message: e.to_string(),
        })?;
    if let Some(parent) = dest.parent() {
        std::fs::create_dir_all(parent)?;
    }
    std::fs::write(dest, body)?;
    Ok(())
}
