//! Plain-text mixture definitions, one component per line:
//!
//! ```text
//! # two clusters
//! weight=0.5 variance=0.05 label=A mean=2,0
//! weight=0.5 variance=0.05 label=B mean=-2,0
//! ```
//!
//! `label` is optional; `#` starts a comment.

use std::collections::BTreeMap;
use std::fs;
use std::path::Path;

use pdls_core::flowfield::Component;
use pdls_core::{GaussianMixture, Label};

use crate::error::{CliError, Result};

pub fn parse(text: &str) -> std::result::Result<GaussianMixture, String> {
    let mut components = Vec::new();
    for (n, raw) in text.lines().enumerate() {
        let line = raw.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        let bad = |reason: String| format!("line {}: {reason}", n + 1);
        let mut fields = BTreeMap::new();
        for token in line.split_whitespace() {
            let (k, v) = token
                .split_once('=')
                .ok_or_else(|| bad(format!("expected key=value, got `{token}`")))?;
            if fields.insert(k, v).is_some() {
                return Err(bad(format!("duplicate key `{k}`")));
            }
        }
        if let Some(k) = fields.keys().find(|k| !["weight", "variance", "label", "mean"].contains(k)) {
            return Err(bad(format!("unknown key `{k}`")));
        }
        let number = |key: &str| -> std::result::Result<f64, String> {
            let v = fields.get(key).ok_or_else(|| bad(format!("missing `{key}`")))?;
            v.parse().map_err(|_| bad(format!("`{key}` is not a number: `{v}`")))
        };
        let weight = number("weight")?;
        let variance = number("variance")?;
        let mean = fields
            .get("mean")
            .ok_or_else(|| bad("missing `mean`".into()))?
            .split(',')
            .map(|v| v.parse::<f64>().map_err(|_| bad(format!("bad mean entry `{v}`"))))
            .collect::<std::result::Result<Vec<_>, _>>()?;
        let label = fields.get("label").map(|l| Label::new(*l));
        components.push(Component::new(weight, mean, variance, label));
    }
    GaussianMixture::new(components).map_err(|e| e.to_string())
}

pub fn format(mixture: &GaussianMixture) -> String {
    let mut out = String::new();
    for c in mixture.components() {
        let mean: Vec<String> = c.mean.iter().map(f64::to_string).collect();
        out.push_str(&format!("weight={} variance={}", c.weight, c.variance));
        if let Some(l) = &c.label {
            out.push_str(&format!(" label={l}"));
        }
        out.push_str(&format!(" mean={}\n", mean.join(",")));
    }
    out
}

pub fn load(path: &Path) -> Result<GaussianMixture> {
    let text = fs::read_to_string(path).map_err(|e| CliError::io(path, e))?;
    parse(&text).map_err(|e| CliError::Config(format!("{}: {e}", path.display())))
}

#[cfg(test)]
mod tests {
    use super::*;
    use pdls_core::datasets::toy2d;

    #[test]
    fn round_trip() {
        let m = toy2d();
        assert_eq!(parse(&format(&m)).unwrap(), m);
    }

    #[test]
    fn comments_and_optional_labels() {
        let m = parse("# header\n\nweight=1 variance=0 mean=1,2,3 # trailing\n").unwrap();
        assert_eq!(m.dim(), 3);
        assert_eq!(m.components()[0].label, None);
    }

    #[test]
    fn errors_name_the_line() {
        let e = parse("weight=1 variance=0 mean=1\nweight=1 mean=2\n").unwrap_err();
        assert!(e.starts_with("line 2: missing `variance`"), "{e}");
        assert!(parse("weight=1 variance=0 mean=1 colour=red").unwrap_err().contains("unknown key"));
        assert!(parse("weight=1 variance=0 mean=1,x").unwrap_err().contains("bad mean entry"));
    }
}
