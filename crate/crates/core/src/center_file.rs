//! JSON centre definition files.
//!
//! ```json
//! {
//!   "sites": ["-1", "A", "1", "B"],
//!   "onsite": { "-1": [0.0, 0.0], "A": [0.0, -0.5], "1": [0.0, 0.0], "B": [0.0, 0.5] },
//!   "hoppings": [["-1", "A", [-1.0, 0.0]], ["A", "1", [-1.0, 0.0]]],
//!   "attach_left": "-1",
//!   "attach_right": "1"
//! }
//! ```
//!
//! Complex numbers are `[re, im]`. A hopping `[from, to, amp]` is the amplitude
//! for moving from `from` to `to`; the reverse direction is its conjugate.
//! Sites missing from `onsite` get a zero potential. Writing emits every site
//! in `sites` order, so write -> read -> write is byte-identical.

use std::fs;
use std::path::Path;

use indexmap::IndexMap;
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::lattice::{Hopping, ScatteringCenter};

#[derive(Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct CenterFile {
    sites: Vec<String>,
    #[serde(default)]
    onsite: IndexMap<String, [f64; 2]>,
    hoppings: Vec<(String, String, [f64; 2])>,
    attach_left: String,
    attach_right: String,
}

impl From<&ScatteringCenter> for CenterFile {
    fn from(c: &ScatteringCenter) -> Self {
        Self {
            sites: c.sites.clone(),
            onsite: c
                .sites
                .iter()
                .zip(&c.onsite)
                .map(|(s, v)| (s.clone(), [v.re, v.im]))
                .collect(),
            hoppings: c
                .hoppings
                .iter()
                .map(|h| (h.from.clone(), h.to.clone(), [h.amplitude.re, h.amplitude.im]))
                .collect(),
            attach_left: c.attach_left.clone(),
            attach_right: c.attach_right.clone(),
        }
    }
}

impl TryFrom<CenterFile> for ScatteringCenter {
    type Error = Error;

    fn try_from(f: CenterFile) -> Result<Self> {
        for key in f.onsite.keys() {
            if !f.sites.contains(key) {
                return Err(Error::Invalid(format!("onsite entry for unknown site `{key}`")));
            }
        }
        let onsite = f
            .sites
            .iter()
            .map(|s| {
                f.onsite
                    .get(s)
                    .map(|[re, im]| Complex64::new(*re, *im))
                    .unwrap_or_default()
            })
            .collect();
        let hoppings = f
            .hoppings
            .into_iter()
            .map(|(from, to, [re, im])| Hopping::new(from, to, Complex64::new(re, im)))
            .collect();
        Ok(ScatteringCenter {
            sites: f.sites,
            onsite,
            hoppings,
            attach_left: f.attach_left,
            attach_right: f.attach_right,
        })
    }
}

/// Parse a centre definition. The result is not validated; use
/// [`crate::lattice::validate_center`] for diagnostics.
pub fn center_from_json(text: &str) -> Result<ScatteringCenter> {
    let f: CenterFile = serde_json::from_str(text)?;
    f.try_into()
}

pub fn center_to_json(c: &ScatteringCenter) -> Result<String> {
    Ok(serde_json::to_string_pretty(&CenterFile::from(c))?)
}

pub fn read_center(path: impl AsRef<Path>) -> Result<ScatteringCenter> {
    center_from_json(&fs::read_to_string(path)?)
}

pub fn write_center(path: impl AsRef<Path>, c: &ScatteringCenter) -> Result<()> {
    let mut text = center_to_json(c)?;
    text.push('\n');
    fs::write(path, text)?;
    Ok(())
}
