use std::collections::{BTreeMap, BTreeSet};

use super::Measurement;
use crate::error::{Error, Result};

/// A set of measurements; used both for faces and facets.
pub type Face = BTreeSet<Measurement>;

/// An abstract simplicial complex stored by its facets.
///
/// Construction drops non-maximal facets, so `facets` is always an
/// antichain. A complex with no vertices has the single facet `∅`.
#[derive(Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Debug)]
pub struct SimplicialComplex {
    vertices: BTreeSet<Measurement>,
    facets: BTreeSet<Face>,
}

impl SimplicialComplex {
    /// Builds the complex generated by `generators` on `vertices`.
    ///
    /// Vertices not covered by any generator become singleton facets.
    pub fn new(vertices: BTreeSet<Measurement>, generators: impl IntoIterator<Item = Face>) -> Result<Self> {
        let mut gens: Vec<Face> = generators.into_iter().collect();
        for g in &gens {
            if let Some(v) = g.iter().find(|v| !vertices.contains(*v)) {
                return Err(Error::UnknownMeasurement(v.to_string()));
            }
        }
        for v in &vertices {
            if !gens.iter().any(|g| g.contains(v)) {
                gens.push(std::iter::once(v.clone()).collect());
            }
        }
        Ok(SimplicialComplex {
            facets: maximal(gens),
            vertices,
        })
    }

    /// The complex whose vertex set is the union of the generators.
    pub fn from_facets(generators: impl IntoIterator<Item = Face>) -> Self {
        let gens: Vec<Face> = generators.into_iter().collect();
        let vertices = gens.iter().flatten().cloned().collect();
        SimplicialComplex::new(vertices, gens).expect("vertices cover generators")
    }

    /// The full simplex on `vertices`.
    pub fn simplex(vertices: impl IntoIterator<Item = Measurement>) -> Self {
        let vs: Face = vertices.into_iter().collect();
        SimplicialComplex::from_facets([vs])
    }

    /// `Δ0 = {∅}`.
    pub fn empty() -> Self {
        SimplicialComplex::from_facets([Face::new()])
    }

    pub fn vertices(&self) -> &BTreeSet<Measurement> {
        &self.vertices
    }

    pub fn facets(&self) -> &BTreeSet<Face> {
        &self.facets
    }

    pub fn contains_vertex(&self, v: &Measurement) -> bool {
        self.vertices.contains(v)
    }

    fn check_vertices(&self, sigma: &Face) -> Result<()> {
        match sigma.iter().find(|v| !self.vertices.contains(*v)) {
            Some(v) => Err(Error::UnknownMeasurement(v.to_string())),
            None => Ok(()),
        }
    }

    /// Whether `sigma` is contained in some facet.
    pub fn is_face(&self, sigma: &Face) -> Result<bool> {
        self.check_vertices(sigma)?;
        Ok(self.contains_face(sigma))
    }

    /// Like [`is_face`](Self::is_face) but treats unknown vertices as "not a face".
    pub fn contains_face(&self, sigma: &Face) -> bool {
        self.facets.iter().any(|f| sigma.is_subset(f))
    }

    /// A facet containing `sigma`, if any.
    pub fn covering_facet(&self, sigma: &Face) -> Option<&Face> {
        self.facets.iter().find(|f| sigma.is_subset(f))
    }

    /// All faces, by downward closure of the facets.
    pub fn faces(&self) -> BTreeSet<Face> {
        let mut out = BTreeSet::new();
        for f in &self.facets {
            let items: Vec<&Measurement> = f.iter().collect();
            for mask in 0u64..(1u64 << items.len()) {
                out.insert(
                    items
                        .iter()
                        .enumerate()
                        .filter(|(i, _)| mask >> i & 1 == 1)
                        .map(|(_, v)| (*v).clone())
                        .collect(),
                );
            }
        }
        out
    }

    /// `lk_σ Σ = {τ ∈ Σ : σ ∩ τ = ∅, σ ∪ τ ∈ Σ}`.
    pub fn link(&self, sigma: &Face) -> Result<SimplicialComplex> {
        if !self.is_face(sigma)? {
            return Err(Error::domain(format!("{} is not a face", show_face(sigma))));
        }
        let gens: Vec<Face> = self
            .facets
            .iter()
            .filter(|f| sigma.is_subset(f))
            .map(|f| f.difference(sigma).cloned().collect())
            .collect();
        Ok(SimplicialComplex::from_facets(gens))
    }

    /// The simplicial join, with the left complex tagged `L.` and the right `R.`.
    pub fn join(&self, other: &SimplicialComplex) -> SimplicialComplex {
        let mut gens = Vec::new();
        for a in &self.facets {
            for b in &other.facets {
                let mut f: Face = a.iter().map(|v| v.clone().left()).collect();
                f.extend(b.iter().map(|v| v.clone().right()));
                gens.push(f);
            }
        }
        SimplicialComplex::new(self.tagged_vertices(other), gens).expect("tagged vertices")
    }

    /// The coproduct: faces are `L.σ` or `R.σ'`, never mixed.
    pub fn coproduct(&self, other: &SimplicialComplex) -> SimplicialComplex {
        let gens = self
            .facets
            .iter()
            .map(|a| a.iter().map(|v| v.clone().left()).collect())
            .chain(
                other
                    .facets
                    .iter()
                    .map(|b| b.iter().map(|v| v.clone().right()).collect()),
            );
        SimplicialComplex::new(self.tagged_vertices(other), gens).expect("tagged vertices")
    }

    fn tagged_vertices(&self, other: &SimplicialComplex) -> BTreeSet<Measurement> {
        self.vertices
            .iter()
            .map(|v| v.clone().left())
            .chain(other.vertices.iter().map(|v| v.clone().right()))
            .collect()
    }

    /// Image of the complex under a vertex renaming (must be injective).
    pub fn rename(&self, f: &BTreeMap<Measurement, Measurement>) -> SimplicialComplex {
        let get = |v: &Measurement| f.get(v).cloned().unwrap_or_else(|| v.clone());
        SimplicialComplex::new(
            self.vertices.iter().map(get).collect(),
            self.facets.iter().map(|fc| fc.iter().map(get).collect()),
        )
        .expect("renamed vertices")
    }

    /// The maximal complex on `domain` for which `map` is simplicial into `self`:
    /// faces are the sets whose image is a face.
    pub fn preimage(&self, domain: &BTreeSet<Measurement>, map: &BTreeMap<Measurement, Measurement>) -> SimplicialComplex {
        let gens: Vec<Face> = self
            .facets
            .iter()
            .map(|c| {
                domain
                    .iter()
                    .filter(|x| map.get(*x).is_some_and(|y| c.contains(y)))
                    .cloned()
                    .collect()
            })
            .collect();
        SimplicialComplex::new(domain.clone(), gens).expect("preimage vertices")
    }

    /// Whether `map` sends every face of `self` to a face of `target`.
    pub fn is_simplicial_into(&self, target: &SimplicialComplex, map: &BTreeMap<Measurement, Measurement>) -> bool {
        self.facets.iter().all(|f| {
            let image: Option<Face> = f.iter().map(|v| map.get(v).cloned()).collect();
            image.is_some_and(|img| target.contains_face(&img))
        })
    }
}

pub(crate) fn maximal(gens: Vec<Face>) -> BTreeSet<Face> {
    let mut sorted = gens;
    sorted.sort_by_key(|f| std::cmp::Reverse(f.len()));
    let mut kept: Vec<Face> = Vec::new();
    for g in sorted {
        if !kept.iter().any(|k| g.is_subset(k)) {
            kept.push(g);
        }
    }
    if kept.is_empty() {
        kept.push(Face::new());
    }
    kept.into_iter().collect()
}

pub(crate) fn show_face(f: &Face) -> String {
    super::names::face_to_string(f)
}
