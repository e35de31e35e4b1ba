use std::collections::BTreeMap;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::polycore::{
    enumerate_indices, legendre_to_monomial_univariate, LegendreFrame, MultiIndex,
};

/// Shape of the index set of known moments.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum MomentSupport {
    /// `d_y <= 1`: moments of `lambda` and of `f lambda`.
    GraphLinear,
    /// `|d_x| = 0` or `d_y = 0`: moments of the two marginals.
    Marginal,
}

impl MomentSupport {
    pub fn contains(&self, d: &MultiIndex) -> bool {
        match self {
            MomentSupport::GraphLinear => d.last() <= 1,
            MomentSupport::Marginal => d.head_degree() == 0 || d.last() == 0,
        }
    }
}

/// Known moments on `D` up to total degree `degree_cap`, in normalized
/// coordinates. Optionally carries the same data as Legendre moments on the
/// graph box, which downstream code prefers since they are computed without
/// the ill-conditioned monomial-to-Legendre change of basis.
#[derive(Clone, Debug)]
pub struct KnownMoments {
    n: usize,
    gamma: f64,
    support: MomentSupport,
    degree_cap: usize,
    monomial: BTreeMap<MultiIndex, f64>,
    legendre: Option<BTreeMap<MultiIndex, f64>>,
    provenance: Option<serde_json::Value>,
}

impl KnownMoments {
    pub fn new(
        n: usize,
        gamma: f64,
        support: MomentSupport,
        degree_cap: usize,
        monomial: BTreeMap<MultiIndex, f64>,
    ) -> Result<Self> {
        let k = KnownMoments {
            n,
            gamma,
            support,
            degree_cap,
            monomial,
            legendre: None,
            provenance: None,
        };
        k.validate_map(&k.monomial, "moments")?;
        let mass = k.monomial[&MultiIndex::zero(n + 1)];
        if (mass - 1.0).abs() > 1e-12 {
            return Err(Error::data(format!("zero moment is {mass}, expected 1")));
        }
        Ok(k)
    }

    pub fn with_legendre(mut self, legendre: BTreeMap<MultiIndex, f64>) -> Result<Self> {
        self.validate_map(&legendre, "legendre_moments")?;
        self.legendre = Some(legendre);
        Ok(self)
    }

    pub fn with_provenance(mut self, provenance: serde_json::Value) -> Self {
        self.provenance = Some(provenance);
        self
    }

    fn validate_map(&self, map: &BTreeMap<MultiIndex, f64>, what: &str) -> Result<()> {
        if self.n == 0 || !(self.gamma > 0.0) {
            return Err(Error::data("need n >= 1 and gamma > 0"));
        }
        for (d, v) in map {
            if d.arity() != self.n + 1 {
                return Err(Error::data(format!("{what}: index {d:?} has wrong arity")));
            }
            if !self.support.contains(d) || d.degree() > self.degree_cap {
                return Err(Error::data(format!(
                    "{what}: index {d:?} outside the declared set"
                )));
            }
            if !v.is_finite() {
                return Err(Error::data(format!("{what}: non-finite value at {d:?}")));
            }
        }
        for d in self.indices() {
            if !map.contains_key(&d) {
                return Err(Error::data(format!("{what}: missing index {d:?}")));
            }
        }
        Ok(())
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn gamma(&self) -> f64 {
        self.gamma
    }

    pub fn support(&self) -> MomentSupport {
        self.support
    }

    pub fn degree_cap(&self) -> usize {
        self.degree_cap
    }

    pub fn provenance(&self) -> Option<&serde_json::Value> {
        self.provenance.as_ref()
    }

    pub fn monomial(&self) -> &BTreeMap<MultiIndex, f64> {
        &self.monomial
    }

    pub fn value(&self, d: &MultiIndex) -> Option<f64> {
        self.monomial.get(d).copied()
    }

    pub fn has_legendre(&self) -> bool {
        self.legendre.is_some()
    }

    /// All indices of `D` with `|d| <= degree_cap`, graded order.
    pub fn indices(&self) -> Vec<MultiIndex> {
        enumerate_indices(self.n + 1, self.degree_cap)
            .iter()
            .filter(|d| self.support.contains(d))
            .cloned()
            .collect()
    }

    pub fn frame(&self) -> Result<LegendreFrame> {
        LegendreFrame::graph_box(self.n, self.gamma)
    }

    /// Legendre moments on the graph box; stored ones if present, otherwise
    /// converted from monomials (accurate only at moderate degree).
    pub fn legendre_moments(&self) -> Result<BTreeMap<MultiIndex, f64>> {
        if let Some(l) = &self.legendre {
            return Ok(l.clone());
        }
        let frame = self.frame()?;
        let tables: Vec<Vec<Vec<f64>>> = frame
            .intervals()
            .iter()
            .map(|iv| {
                (0..=self.degree_cap)
                    .map(|k| legendre_to_monomial_univariate(k, *iv))
                    .collect()
            })
            .collect();
        let mut out = BTreeMap::new();
        for j in self.indices() {
            let factors: Vec<Vec<f64>> = j
                .exponents()
                .iter()
                .enumerate()
                .map(|(v, &e)| tables[v][e as usize].clone())
                .collect();
            let mut acc = 0.0;
            crate::polycore::series::for_each_tensor(&factors, |idx, w| {
                acc += w * self.monomial[&MultiIndex::new(idx)];
            });
            out.insert(j, acc);
        }
        Ok(out)
    }

    pub fn to_json(&self) -> Result<String> {
        let file = KnownMomentsJson {
            n: self.n,
            gamma: self.gamma,
            support: self.support,
            degree_cap: self.degree_cap,
            moments: to_entries(&self.monomial),
            legendre_moments: self.legendre.as_ref().map(to_entries),
            provenance: self.provenance.clone(),
        };
        Ok(serde_json::to_string_pretty(&file)?)
    }

    pub fn from_json(s: &str) -> Result<Self> {
        let f: KnownMomentsJson = serde_json::from_str(s)?;
        let mut k = KnownMoments::new(
            f.n,
            f.gamma,
            f.support,
            f.degree_cap,
            from_entries(f.moments)?,
        )?;
        if let Some(l) = f.legendre_moments {
            k = k.with_legendre(from_entries(l)?)?;
        }
        k.provenance = f.provenance;
        Ok(k)
    }

    pub fn save(&self, path: &Path) -> Result<()> {
        std::fs::write(path, self.to_json()?)?;
        Ok(())
    }

    pub fn load(path: &Path) -> Result<Self> {
        KnownMoments::from_json(&std::fs::read_to_string(path)?)
    }
}

#[derive(Serialize, Deserialize)]
struct MomentEntry {
    exp: Vec<u32>,
    value: f64,
}

#[derive(Serialize, Deserialize)]
struct KnownMomentsJson {
    n: usize,
    gamma: f64,
    #[serde(rename = "D")]
    support: MomentSupport,
    degree_cap: usize,
    moments: Vec<MomentEntry>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    legendre_moments: Option<Vec<MomentEntry>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    provenance: Option<serde_json::Value>,
}

fn to_entries(map: &BTreeMap<MultiIndex, f64>) -> Vec<MomentEntry> {
    let mut v: Vec<(&MultiIndex, f64)> = map.iter().map(|(m, &x)| (m, x)).collect();
    v.sort_by(|a, b| a.0.degree().cmp(&b.0.degree()).then_with(|| b.0.cmp(a.0)));
    v.into_iter()
        .map(|(m, value)| MomentEntry {
            exp: m.exponents().to_vec(),
            value,
        })
        .collect()
}

fn from_entries(v: Vec<MomentEntry>) -> Result<BTreeMap<MultiIndex, f64>> {
    let mut out = BTreeMap::new();
    for e in v {
        if out.insert(MultiIndex::new(e.exp), e.value).is_some() {
            return Err(Error::data("duplicate moment index"));
        }
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn identity_graph(cap: usize) -> KnownMoments {
        // f(x) = x on [0,1]: mu_(d,0) = 1/(d+1), mu_(d,1) = 1/(d+2).
        let mut m = BTreeMap::new();
        for d in 0..=cap as u32 {
            m.insert(MultiIndex::new(vec![d, 0]), 1.0 / (d as f64 + 1.0));
            if (d as usize) < cap {
                m.insert(MultiIndex::new(vec![d, 1]), 1.0 / (d as f64 + 2.0));
            }
        }
        KnownMoments::new(1, 1.0, MomentSupport::GraphLinear, cap, m).unwrap()
    }

    #[test]
    fn support_membership() {
        assert!(MomentSupport::GraphLinear.contains(&MultiIndex::new(vec![5, 1])));
        assert!(!MomentSupport::GraphLinear.contains(&MultiIndex::new(vec![0, 2])));
        assert!(MomentSupport::Marginal.contains(&MultiIndex::new(vec![0, 2])));
        assert!(!MomentSupport::Marginal.contains(&MultiIndex::new(vec![1, 1])));
    }

    #[test]
    fn json_round_trip() {
        let k = identity_graph(4).with_provenance(serde_json::json!({"source": "test"}));
        let s = k.to_json().unwrap();
        assert!(s.contains("\"graph-linear\""));
        let back = KnownMoments::from_json(&s).unwrap();
        assert_eq!(back.monomial(), k.monomial());
        assert_eq!(back.provenance(), k.provenance());
    }

    #[test]
    fn rejects_outside_and_missing() {
        let mut m = identity_graph(2).monomial().clone();
        m.insert(MultiIndex::new(vec![0, 2]), 0.3);
        assert!(KnownMoments::new(1, 1.0, MomentSupport::GraphLinear, 2, m.clone()).is_err());
        m.remove(&MultiIndex::new(vec![0, 2]));
        m.remove(&MultiIndex::new(vec![1, 1]));
        assert!(KnownMoments::new(1, 1.0, MomentSupport::GraphLinear, 2, m).is_err());
    }

    #[test]
    fn legendre_conversion_low_degree() {
        let k = identity_graph(3);
        let l = k.legendre_moments().unwrap();
        // L(p_(0,1)) = sqrt(3) E[2 f - 1] = 0 for f(x) = x uniform.
        assert!(l[&MultiIndex::new(vec![0, 1])].abs() < 1e-14);
        // L(p_(1,1)) = 3 E[(2x-1)^2] = 1.
        assert!((l[&MultiIndex::new(vec![1, 1])] - 1.0).abs() < 1e-13);
    }
}
