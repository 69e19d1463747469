//! Versioned JSON documents for profiles.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

use super::grid::{Dim, RadialGrid};
use super::profile::{GeneralProfile, MetricProfile, RadialMetric};

pub const PROFILE_VERSION: u32 = 1;

/// `{version, n, nodes[], a[] | p[], q[], meta}`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ProfileDocument {
    pub version: u32,
    pub n: usize,
    pub nodes: Vec<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub a: Option<Vec<f64>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub p: Option<Vec<f64>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub q: Option<Vec<f64>>,
    #[serde(default)]
    pub meta: String,
}

/// Either kind of profile read back from a document.
#[derive(Clone, Debug, PartialEq)]
pub enum AnyProfile {
    Normal(MetricProfile),
    General(GeneralProfile),
}

impl From<&MetricProfile> for ProfileDocument {
    fn from(m: &MetricProfile) -> Self {
        ProfileDocument {
            version: PROFILE_VERSION,
            n: m.dim().get(),
            nodes: m.grid().nodes().to_vec(),
            a: Some(m.a()),
            p: None,
            q: None,
            meta: m.meta.clone(),
        }
    }
}

impl ProfileDocument {
    pub fn from_general(g: &GeneralProfile, meta: &str) -> Self {
        ProfileDocument {
            version: PROFILE_VERSION,
            n: g.dim().get(),
            nodes: g.grid().nodes().to_vec(),
            a: None,
            p: Some(g.p()),
            q: Some(g.q()),
            meta: meta.to_string(),
        }
    }

    pub fn to_json(&self) -> String {
        crate::jsonfmt::to_string(self)
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let doc: ProfileDocument = serde_json::from_str(text)?;
        if doc.version != PROFILE_VERSION {
            return Err(Error::Config(format!("unsupported profile version {}", doc.version)));
        }
        Ok(doc)
    }

    pub fn into_profile(self) -> Result<AnyProfile> {
        let dim = Dim::new(self.n)?;
        let grid = RadialGrid::from_nodes(&self.nodes, 0)?;
        match (self.a, self.p, self.q) {
            (Some(a), None, None) => Ok(AnyProfile::Normal(MetricProfile::from_a(dim, grid, &a, self.meta)?)),
            (None, Some(p), Some(q)) => Ok(AnyProfile::General(GeneralProfile::from_pq(dim, grid, &p, &q)?)),
            _ => Err(Error::Config("profile needs either a[] or both p[] and q[]".into())),
        }
    }
}
