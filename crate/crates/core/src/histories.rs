//! History spaces, events as bit masks over histories, Boolean subalgebras
//! represented by their atoms, and the region association map Δ.

use std::collections::HashMap;

use thiserror::Error;

use crate::bits;
use crate::site::Region;

/// Maximum number of histories in a space.
pub const MAX_HISTORIES: usize = 64;

/// An event: a set of histories, bit `i` standing for history `i`.
pub type Event = u64;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum HistoryError {
    #[error("history space must not be empty")]
    Empty,
    #[error("duplicate history `{0}`")]
    Duplicate(String),
    #[error("unknown history `{0}`")]
    Unknown(String),
    #[error("history space has {0} histories, at most {MAX_HISTORIES} are supported")]
    TooMany(usize),
}

/// Finite, ordered set of named histories.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct HistorySpace {
    names: Vec<String>,
    index: HashMap<String, usize>,
}

impl HistorySpace {
    pub fn new<S: Into<String>>(names: impl IntoIterator<Item = S>) -> Result<Self, HistoryError> {
        let names: Vec<String> = names.into_iter().map(Into::into).collect();
        if names.is_empty() {
            return Err(HistoryError::Empty);
        }
        if names.len() > MAX_HISTORIES {
            return Err(HistoryError::TooMany(names.len()));
        }
        let mut index = HashMap::with_capacity(names.len());
        for (i, n) in names.iter().enumerate() {
            if index.insert(n.clone(), i).is_some() {
                return Err(HistoryError::Duplicate(n.clone()));
            }
        }
        Ok(HistorySpace { names, index })
    }

    /// Space with histories named `h0`, `h1`, ...
    pub fn numbered(n: usize) -> Result<Self, HistoryError> {
        Self::new((0..n).map(|i| format!("h{i}")))
    }

    pub fn len(&self) -> usize {
        self.names.len()
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn names(&self) -> &[String] {
        &self.names
    }

    pub fn name(&self, h: usize) -> &str {
        &self.names[h]
    }

    pub fn history(&self, name: &str) -> Option<usize> {
        self.index.get(name).copied()
    }

    /// Ω as an event.
    pub fn all(&self) -> Event {
        bits::low_mask(self.len())
    }

    pub fn complement(&self, e: Event) -> Event {
        !e & self.all()
    }

    pub fn event<S: AsRef<str>>(&self, names: impl IntoIterator<Item = S>) -> Result<Event, HistoryError> {
        let mut e = 0;
        for n in names {
            let h = self.history(n.as_ref()).ok_or_else(|| HistoryError::Unknown(n.as_ref().to_string()))?;
            e |= 1 << h;
        }
        Ok(e)
    }

    pub fn event_names(&self, e: Event) -> Vec<String> {
        bits::ones(e & self.all()).map(|h| self.names[h].clone()).collect()
    }
}

/// A Boolean subalgebra of pow(Ω), stored as its atoms. Atoms are sorted by
/// lowest member and partition the universe they were generated over.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct Subalgebra {
    universe: Event,
    atoms: Vec<Event>,
}

impl Subalgebra {
    /// The smallest subalgebra containing every generator: histories are
    /// grouped by their membership signature across the generators.
    pub fn generate(universe: Event, generators: &[Event]) -> Self {
        let mut atoms = vec![universe];
        for &g in generators {
            let mut next = Vec::with_capacity(atoms.len() * 2);
            for a in atoms {
                let inside = a & g;
                let outside = a & !g;
                if inside != 0 {
                    next.push(inside);
                }
                if outside != 0 {
                    next.push(outside);
                }
            }
            atoms = next;
        }
        Self::from_atoms(universe, atoms)
    }

    fn from_atoms(universe: Event, mut atoms: Vec<Event>) -> Self {
        atoms.retain(|&a| a != 0);
        atoms.sort_by_key(|a| a.trailing_zeros());
        Subalgebra { universe, atoms }
    }

    /// The subalgebra with the single atom Ω.
    pub fn trivial(universe: Event) -> Self {
        Self::generate(universe, &[])
    }

    /// Every subset of the universe.
    pub fn discrete(universe: Event) -> Self {
        Self::from_atoms(universe, bits::ones(universe).map(|h| 1u64 << h).collect())
    }

    pub fn universe(&self) -> Event {
        self.universe
    }

    pub fn atoms(&self) -> &[Event] {
        &self.atoms
    }

    pub fn atom_count(&self) -> usize {
        self.atoms.len()
    }

    /// Full specifications: the atoms, each as an event.
    pub fn full_specifications(&self) -> Vec<Event> {
        self.atoms.clone()
    }

    /// `e` is a union of atoms.
    pub fn contains(&self, e: Event) -> bool {
        e & !self.universe == 0 && self.atoms.iter().all(|&a| a & e == 0 || a & !e == 0)
    }

    pub fn atom_of(&self, history: usize) -> Option<Event> {
        self.atoms.iter().copied().find(|a| a >> history & 1 == 1)
    }

    /// Index of the atom containing `history`.
    pub fn atom_index(&self, history: usize) -> Option<usize> {
        self.atoms.iter().position(|a| a >> history & 1 == 1)
    }

    /// Every atom of `self` lies inside one atom of `coarser`.
    pub fn refines(&self, coarser: &Subalgebra) -> bool {
        self.universe == coarser.universe && coarser.atoms.iter().all(|&c| self.contains(c))
    }

    /// The join: smallest subalgebra containing both.
    pub fn join(&self, other: &Subalgebra) -> Subalgebra {
        Subalgebra::generate(self.universe, &[self.atoms.as_slice(), other.atoms.as_slice()].concat())
    }

    /// Union of the atoms selected by the bits of `selection`.
    pub fn union_of(&self, selection: u64) -> Event {
        bits::ones(selection).fold(0, |acc, i| acc | self.atoms[i])
    }

    /// Every event of the subalgebra. Only sensible for a few dozen atoms;
    /// callers bound the atom count first.
    pub fn events(&self) -> impl Iterator<Item = Event> + '_ {
        assert!(self.atoms.len() < 64, "subalgebra too large to enumerate");
        bits::subsets(bits::low_mask(self.atoms.len())).map(move |sel| self.union_of(sel))
    }
}

/// An event generator declared at a region.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Association {
    pub region: Region,
    pub event: Event,
}

/// Δ: region-event declarations, inherited upward by region inclusion.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct AssociationMap {
    entries: Vec<Association>,
}

impl AssociationMap {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn push(&mut self, region: Region, event: Event) {
        self.entries.push(Association { region, event });
    }

    pub fn entries(&self) -> &[Association] {
        &self.entries
    }

    /// Generators of every entry whose region lies inside `region`.
    pub fn generators_within(&self, region: &Region) -> Vec<Event> {
        self.entries.iter().filter(|a| a.region.is_subset(region)).map(|a| a.event).collect()
    }

    /// Σ|_R.
    pub fn subalgebra_of(&self, universe: Event, region: &Region) -> Subalgebra {
        Subalgebra::generate(universe, &self.generators_within(region))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::site::CausalSite;

    #[test]
    fn generate_examples() {
        let omega = 0b1111;
        let a = Subalgebra::generate(omega, &[0b0011]);
        assert_eq!(a.atoms(), &[0b0011, 0b1100]);
        assert_eq!(Subalgebra::generate(omega, &[]).atoms(), &[omega]);
        let b = Subalgebra::generate(omega, &[0b0011, 0b0101]);
        assert_eq!(b.atoms(), &[0b0001, 0b0010, 0b0100, 0b1000]);
    }

    #[test]
    fn contains_examples() {
        let a = Subalgebra::generate(0b1111, &[0b0011]);
        assert!(a.contains(0));
        assert!(a.contains(0b1111));
        assert!(!a.contains(0b0101));
        assert!(a.contains(0b0011));
    }

    #[test]
    fn full_specifications_are_atoms() {
        assert_eq!(Subalgebra::trivial(0b111).full_specifications(), vec![0b111]);
        assert_eq!(Subalgebra::discrete(0b1111).full_specifications().len(), 4);
    }

    #[test]
    fn generate_is_idempotent_on_own_atoms() {
        let omega = 0b11_1111;
        for gens in [vec![0b10_1010, 0b00_0111], vec![0b1], vec![]] {
            let a = Subalgebra::generate(omega, &gens);
            let b = Subalgebra::generate(omega, &[gens.clone(), a.atoms().to_vec()].concat());
            assert_eq!(a, b);
        }
    }

    #[test]
    fn events_enumerates_unions() {
        let a = Subalgebra::generate(0b1111, &[0b0011, 0b0101]);
        let all: Vec<Event> = a.events().collect();
        assert_eq!(all.len(), 16);
        assert!(all.iter().all(|&e| a.contains(e)));
    }

    #[test]
    fn subalgebra_of_is_monotone() {
        let site = CausalSite::new(["p", "q", "r"], [("p", "q")]).unwrap();
        let mut delta = AssociationMap::new();
        delta.push(site.region(["p"]).unwrap(), 0b0011);
        delta.push(site.region(["q"]).unwrap(), 0b0101);
        delta.push(site.region(["q", "r"]).unwrap(), 0b1001);
        let omega = 0b1111;
        let empty = delta.subalgebra_of(omega, &site.empty_region());
        assert_eq!(empty.atoms(), &[omega]);
        for small in site.all_regions() {
            for big in site.all_regions().filter(|b| small.is_subset(b)) {
                let s = delta.subalgebra_of(omega, &small);
                let b = delta.subalgebra_of(omega, &big);
                assert!(b.refines(&s));
            }
        }
    }

    #[test]
    fn restriction_depends_only_on_atom() {
        let omega = 0b1111_1111;
        let alg = Subalgebra::generate(omega, &[0b1111_0000, 0b1100_1100]);
        for e in alg.events() {
            for h in 0..8 {
                let atom = alg.atom_of(h).unwrap();
                let value = e >> h & 1 == 1;
                assert!(bits::ones(atom).all(|g| (e >> g & 1 == 1) == value));
            }
        }
    }

    #[test]
    fn space_rejects_bad_input() {
        assert_eq!(HistorySpace::new(Vec::<String>::new()), Err(HistoryError::Empty));
        assert_eq!(HistorySpace::new(["a", "a"]), Err(HistoryError::Duplicate("a".into())));
        let s = HistorySpace::new(["a", "b", "c"]).unwrap();
        assert_eq!(s.event(["a", "c"]).unwrap(), 0b101);
        assert_eq!(s.complement(0b101), 0b010);
        assert_eq!(s.event(["z"]), Err(HistoryError::Unknown("z".into())));
    }
}
