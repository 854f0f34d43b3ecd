use std::collections::BTreeMap;
use std::fmt;

use super::ops::{OutcomeMap, VertexMap};
use super::{EmpiricalModel, ModelLike};
use crate::error::{Error, Result};
use crate::scenario::names::face_to_string;
use crate::scenario::{Assignment, Face, Measurement, Scenario, ScenarioLike};

/// A deterministic morphism `⟨π,h⟩: Y → X`.
///
/// `pi` sends each measurement of the target `X` to a measurement of the
/// source `Y`; `h[x]` translates outcomes of `pi[x]` into outcomes of `x`.
#[derive(Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct DeterministicMorphism {
    pub pi: VertexMap,
    pub h: BTreeMap<Measurement, OutcomeMap>,
}

impl DeterministicMorphism {
    pub fn new(pi: VertexMap, h: BTreeMap<Measurement, OutcomeMap>) -> Result<Self> {
        if pi.keys().ne(h.keys()) {
            return Err(Error::domain("vertex map and outcome maps cover different measurements"));
        }
        Ok(DeterministicMorphism { pi, h })
    }

    pub fn identity(s: &Scenario) -> Self {
        DeterministicMorphism {
            pi: s.measurements().iter().map(|x| (x.clone(), x.clone())).collect(),
            h: s
                .outcome_map()
                .iter()
                .map(|(x, os)| (x.clone(), OutcomeMap::identity(os)))
                .collect(),
        }
    }

    /// Checks that `π` is simplicial from `target`'s complex into `source`
    /// and that every `h_x` is a total map `P_{π(x)} → O_x`.
    pub fn check_typed(&self, source: &impl ScenarioLike, target: &Scenario) -> Result<()> {
        if self.pi.keys().ne(target.measurements().iter()) {
            return Err(Error::domain("morphism does not cover exactly the target measurements"));
        }
        for (x, y) in &self.pi {
            let py = source.outcome_set(y)?;
            let hx = &self.h[x];
            hx.check_total(x, &py)?;
            let ox = target.outcomes(x)?;
            if let Some(o) = hx.entries().values().find(|o| !ox.contains(*o)) {
                return Err(Error::domain(format!("outcome map for `{x}` produces non-outcome `{o}`")));
            }
        }
        for c in target.facets() {
            let image = self.image(c);
            if !source.is_face(&image)? {
                return Err(Error::domain(format!(
                    "image {} of facet {} is not a face of the source",
                    face_to_string(&image),
                    face_to_string(c)
                )));
            }
        }
        Ok(())
    }

    pub fn image(&self, sigma: &Face) -> Face {
        sigma.iter().filter_map(|x| self.pi.get(x).cloned()).collect()
    }

    /// `h_σ` applied to an assignment on `π(σ)`.
    pub fn translate(&self, sigma: &Face, t: &Assignment) -> Assignment {
        sigma
            .iter()
            .map(|x| {
                let p = t.get(&self.pi[x]).expect("image assignment covers π(σ)");
                (x.clone(), self.h[x].apply(p).expect("total outcome map").clone())
            })
            .collect()
    }

    /// `⟨π,h⟩_* d` on the scenario `target`.
    pub fn pushforward(&self, d: &impl ModelLike, target: &Scenario) -> Result<EmpiricalModel> {
        self.check_typed(d, target)?;
        EmpiricalModel::from_facets(target.clone(), |c| {
            let dist = d.marginal_on(&self.image(c))?;
            Ok(dist.map(c.clone(), |t| self.translate(c, t)))
        })
    }

    /// `self ∘ inner`, i.e. `⟨ρ∘π, h_x ∘ j_{π(x)}⟩` for `inner = ⟨ρ,j⟩`.
    pub fn compose(&self, inner: &DeterministicMorphism) -> Result<DeterministicMorphism> {
        let mut pi = BTreeMap::new();
        let mut h = BTreeMap::new();
        for (x, y) in &self.pi {
            let z = inner
                .pi
                .get(y)
                .ok_or_else(|| Error::domain(format!("inner morphism does not cover `{y}`")))?;
            pi.insert(x.clone(), z.clone());
            h.insert(x.clone(), inner.h[y].then(&self.h[x])?);
        }
        Ok(DeterministicMorphism { pi, h })
    }

    /// `⟨π ⊔ π', h ⊔ h'⟩`.
    pub fn tensor(&self, other: &DeterministicMorphism) -> DeterministicMorphism {
        let mut pi = BTreeMap::new();
        let mut h = BTreeMap::new();
        for (x, y) in &self.pi {
            pi.insert(x.clone().left(), y.clone().left());
            h.insert(x.clone().left(), self.h[x].clone());
        }
        for (x, y) in &other.pi {
            pi.insert(x.clone().right(), y.clone().right());
            h.insert(x.clone().right(), other.h[x].clone());
        }
        DeterministicMorphism { pi, h }
    }
}

impl fmt::Debug for DeterministicMorphism {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let mut m = f.debug_map();
        for (x, y) in &self.pi {
            let table: Vec<String> = self.h[x].entries().iter().map(|(a, b)| format!("{a}>{b}")).collect();
            m.entry(&x.to_string(), &format!("{y} / {}", table.join(",")));
        }
        m.finish()
    }
}
