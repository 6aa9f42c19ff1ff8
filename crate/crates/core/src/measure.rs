//! Finite probability algebras.
//!
//! A [`Partition`] is a finite probability space given by its atoms. An
//! [`Event`] is a set of atom indices kept sorted, so equal events are
//! structurally equal. A finite Boolean subalgebra is stored as its atoms
//! ([`EventAlgebra`]).

use std::collections::{BTreeMap, HashSet};
use std::fmt;

use num_traits::{One, Zero};
use thiserror::Error;

use crate::rational::{format_fraction, int, Rational};

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum MeasureError {
    #[error("partition has no atoms")]
    Empty,
    #[error("atom `{name}` has non-positive weight {weight}")]
    NonPositiveWeight { name: String, weight: String },
    #[error("weights sum to {0}")]
    WeightSum(String),
    #[error("duplicate atom name `{0}`")]
    DuplicateAtom(String),
    #[error("atom index {index} out of range for {len} atoms")]
    AtomOutOfRange { index: usize, len: usize },
    #[error("events live on partitions of different sizes ({0} vs {1})")]
    PartitionMismatch(usize, usize),
    #[error("refinement needs at least two pieces, got {0}")]
    BadSplit(usize),
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Partition {
    names: Vec<String>,
    weights: Vec<Rational>,
}

impl Partition {
    pub fn new(atoms: Vec<(String, Rational)>) -> Result<Self, MeasureError> {
        if atoms.is_empty() {
            return Err(MeasureError::Empty);
        }
        let mut seen = HashSet::new();
        let mut total = Rational::zero();
        for (name, w) in &atoms {
            if !seen.insert(name.as_str()) {
                return Err(MeasureError::DuplicateAtom(name.clone()));
            }
            if *w <= Rational::zero() {
                return Err(MeasureError::NonPositiveWeight {
                    name: name.clone(),
                    weight: format_fraction(w),
                });
            }
            total += w;
        }
        if !total.is_one() {
            return Err(MeasureError::WeightSum(format_fraction(&total)));
        }
        let (names, weights) = atoms.into_iter().unzip();
        Ok(Partition { names, weights })
    }

    /// `n` atoms `w1..wn` of weight `1/n`.
    pub fn uniform(n: usize) -> Self {
        let w = Rational::new(1.into(), (n as i64).into());
        Partition::new((1..=n).map(|i| (format!("w{i}"), w.clone())).collect())
            .expect("uniform weights sum to one")
    }

    pub fn len(&self) -> usize {
        self.names.len()
    }

    pub fn is_empty(&self) -> bool {
        self.names.is_empty()
    }

    pub fn names(&self) -> &[String] {
        &self.names
    }

    pub fn weights(&self) -> &[Rational] {
        &self.weights
    }

    pub fn index_of(&self, name: &str) -> Option<usize> {
        self.names.iter().position(|n| n == name)
    }

    pub fn top(&self) -> Event {
        Event::top(self.len())
    }

    pub fn bottom(&self) -> Event {
        Event::bottom(self.len())
    }

    /// Probability of `e`.
    pub fn mu(&self, e: &Event) -> Rational {
        debug_assert_eq!(e.universe, self.len());
        e.members.iter().map(|&i| &self.weights[i]).sum()
    }

    /// Event distance `mu(e1 symmetric-difference e2)`.
    pub fn d_b(&self, e1: &Event, e2: &Event) -> Result<Rational, MeasureError> {
        self.check(e1)?;
        Ok(self.mu(&e1.symmetric_difference(e2)?))
    }

    fn check(&self, e: &Event) -> Result<(), MeasureError> {
        if e.universe != self.len() {
            return Err(MeasureError::PartitionMismatch(e.universe, self.len()));
        }
        Ok(())
    }

    /// Replaces `atom` by `k` equal pieces.
    pub fn refine(&self, atom: usize, k: usize) -> Result<(Partition, Refinement), MeasureError> {
        if k < 2 {
            return Err(MeasureError::BadSplit(k));
        }
        if atom >= self.len() {
            return Err(MeasureError::AtomOutOfRange {
                index: atom,
                len: self.len(),
            });
        }
        let mut taken: HashSet<String> = self.names.iter().cloned().collect();
        let mut atoms = Vec::with_capacity(self.len() + k - 1);
        let mut old_to_new = Vec::with_capacity(self.len());
        for (i, (name, w)) in self.names.iter().zip(&self.weights).enumerate() {
            if i == atom {
                let piece = w / int(k as i64);
                let mut ids = Vec::with_capacity(k);
                for j in 1..=k {
                    let mut sub = format!("{name}.{j}");
                    while taken.contains(&sub) {
                        sub.push('\'');
                    }
                    taken.insert(sub.clone());
                    ids.push(atoms.len());
                    atoms.push((sub, piece.clone()));
                }
                old_to_new.push(ids);
            } else {
                old_to_new.push(vec![atoms.len()]);
                atoms.push((name.clone(), w.clone()));
            }
        }
        let new_len = atoms.len();
        let refined = Partition::new(atoms).expect("refinement preserves total weight");
        Ok((refined, Refinement { old_to_new, new_len }))
    }
}

/// Index mapping produced by [`Partition::refine`].
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Refinement {
    old_to_new: Vec<Vec<usize>>,
    new_len: usize,
}

impl Refinement {
    pub fn new_indices(&self, old: usize) -> &[usize] {
        &self.old_to_new[old]
    }

    pub fn transport_event(&self, e: &Event) -> Event {
        Event::from_indices(
            self.new_len,
            e.members.iter().flat_map(|&i| self.old_to_new[i].iter().copied()),
        )
    }

    /// Copies per-atom data onto the refined atoms.
    pub fn transport_values<T: Clone>(&self, values: &[T]) -> Vec<T> {
        let mut out = Vec::with_capacity(self.new_len);
        for (i, ids) in self.old_to_new.iter().enumerate() {
            for _ in ids {
                out.push(values[i].clone());
            }
        }
        out
    }
}

/// A set of atoms of a partition with `universe` atoms.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Event {
    universe: usize,
    members: Vec<usize>,
}

impl Event {
    pub fn new(universe: usize, members: impl IntoIterator<Item = usize>) -> Result<Self, MeasureError> {
        let e = Event::from_indices(universe, members);
        if let Some(&bad) = e.members.last().filter(|&&i| i >= universe) {
            return Err(MeasureError::AtomOutOfRange {
                index: bad,
                len: universe,
            });
        }
        Ok(e)
    }

    pub(crate) fn from_indices(universe: usize, members: impl IntoIterator<Item = usize>) -> Self {
        let mut members: Vec<usize> = members.into_iter().collect();
        members.sort_unstable();
        members.dedup();
        Event { universe, members }
    }

    pub fn from_predicate(universe: usize, pred: impl Fn(usize) -> bool) -> Self {
        Event {
            universe,
            members: (0..universe).filter(|&i| pred(i)).collect(),
        }
    }

    pub fn top(universe: usize) -> Self {
        Event {
            universe,
            members: (0..universe).collect(),
        }
    }

    pub fn bottom(universe: usize) -> Self {
        Event {
            universe,
            members: Vec::new(),
        }
    }

    pub fn universe(&self) -> usize {
        self.universe
    }

    pub fn members(&self) -> &[usize] {
        &self.members
    }

    pub fn contains(&self, atom: usize) -> bool {
        self.members.binary_search(&atom).is_ok()
    }

    pub fn is_top(&self) -> bool {
        self.members.len() == self.universe
    }

    pub fn is_bottom(&self) -> bool {
        self.members.is_empty()
    }

    pub fn is_subset(&self, other: &Event) -> bool {
        self.members.iter().all(|&i| other.contains(i))
    }

    pub fn is_disjoint(&self, other: &Event) -> bool {
        self.members.iter().all(|&i| !other.contains(i))
    }

    fn same_universe(&self, other: &Event) -> Result<(), MeasureError> {
        if self.universe != other.universe {
            return Err(MeasureError::PartitionMismatch(self.universe, other.universe));
        }
        Ok(())
    }

    pub fn meet(&self, other: &Event) -> Result<Event, MeasureError> {
        self.same_universe(other)?;
        Ok(Event::from_predicate(self.universe, |i| self.contains(i) && other.contains(i)))
    }

    pub fn join(&self, other: &Event) -> Result<Event, MeasureError> {
        self.same_universe(other)?;
        Ok(Event::from_predicate(self.universe, |i| self.contains(i) || other.contains(i)))
    }

    pub fn complement(&self) -> Event {
        Event::from_predicate(self.universe, |i| !self.contains(i))
    }

    pub fn symmetric_difference(&self, other: &Event) -> Result<Event, MeasureError> {
        self.same_universe(other)?;
        Ok(Event::from_predicate(self.universe, |i| self.contains(i) != other.contains(i)))
    }

    /// `{w1,w3}` style rendering with the partition's atom names.
    pub fn display<'a>(&'a self, p: &'a Partition) -> EventDisplay<'a> {
        EventDisplay { event: self, partition: p }
    }
}

pub struct EventDisplay<'a> {
    event: &'a Event,
    partition: &'a Partition,
}

impl fmt::Display for EventDisplay<'_> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str("{")?;
        for (k, &i) in self.event.members.iter().enumerate() {
            if k > 0 {
                f.write_str(",")?;
            }
            f.write_str(&self.partition.names[i])?;
        }
        f.write_str("}")
    }
}

/// A finite Boolean algebra of events, stored as its atoms.
///
/// Atoms are nonempty, pairwise disjoint, cover the partition, and are kept
/// sorted so that equal algebras compare equal.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct EventAlgebra {
    universe: usize,
    atoms: Vec<Event>,
}

impl EventAlgebra {
    /// `{top, bottom}`.
    pub fn trivial(universe: usize) -> Self {
        EventAlgebra::generated(universe, &[]).expect("no generators to mismatch")
    }

    /// The subalgebra generated by `gens`: its atoms are the nonempty
    /// intersections of each generator or its complement.
    pub fn generated(universe: usize, gens: &[Event]) -> Result<Self, MeasureError> {
        for g in gens {
            if g.universe != universe {
                return Err(MeasureError::PartitionMismatch(g.universe, universe));
            }
        }
        let mut classes: BTreeMap<Vec<bool>, Vec<usize>> = BTreeMap::new();
        for i in 0..universe {
            let sign: Vec<bool> = gens.iter().map(|g| g.contains(i)).collect();
            classes.entry(sign).or_default().push(i);
        }
        let mut atoms: Vec<Event> = classes
            .into_values()
            .map(|members| Event { universe, members })
            .collect();
        atoms.sort_by(|a, b| a.members.cmp(&b.members));
        Ok(EventAlgebra { universe, atoms })
    }

    pub fn universe(&self) -> usize {
        self.universe
    }

    pub fn atoms(&self) -> &[Event] {
        &self.atoms
    }

    /// Number of events in the algebra, `2^atoms`.
    pub fn size(&self) -> u128 {
        1u128 << self.atoms.len().min(127)
    }

    /// Whether `e` is a union of atoms.
    pub fn contains(&self, e: &Event) -> bool {
        e.universe == self.universe
            && self
                .atoms
                .iter()
                .all(|a| a.is_subset(e) || a.is_disjoint(e))
    }

    pub fn is_subalgebra_of(&self, other: &EventAlgebra) -> bool {
        self.atoms.iter().all(|a| other.contains(a))
    }

    /// Every event of the algebra, by atom-subset bitmask. Only sensible for
    /// a handful of atoms.
    pub fn events(&self) -> Vec<Event> {
        let k = self.atoms.len();
        assert!(k < 20, "too many atoms to enumerate");
        (0u32..1 << k)
            .map(|mask| {
                Event::from_indices(
                    self.universe,
                    (0..k)
                        .filter(|j| mask & (1 << j) != 0)
                        .flat_map(|j| self.atoms[j].members.iter().copied()),
                )
            })
            .collect()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rational::frac;
    use proptest::prelude::*;

    fn ev(n: usize, m: &[usize]) -> Event {
        Event::new(n, m.iter().copied()).unwrap()
    }

    #[test]
    fn mu_examples() {
        let p = Partition::uniform(2);
        assert_eq!(p.mu(&p.bottom()), int(0));
        assert_eq!(p.mu(&p.top()), int(1));
        assert_eq!(p.mu(&ev(2, &[0])), frac(1, 2));
    }

    #[test]
    fn d_b_examples() {
        let p = Partition::uniform(2);
        let e = ev(2, &[0]);
        assert_eq!(p.d_b(&e, &e).unwrap(), int(0));
        assert_eq!(p.d_b(&p.top(), &p.bottom()).unwrap(), int(1));
        assert_eq!(p.d_b(&ev(2, &[0]), &ev(2, &[1])).unwrap(), int(1));
        assert_eq!(
            p.d_b(&ev(2, &[0]), &ev(3, &[1])),
            Err(MeasureError::PartitionMismatch(2, 3))
        );
    }

    #[test]
    fn boolean_ops() {
        let (w1, w2) = (ev(2, &[0]), ev(2, &[1]));
        assert_eq!(w1.meet(&w2).unwrap(), Event::bottom(2));
        assert_eq!(w1.complement(), w2);
        assert_eq!(w1.join(&w1.complement()).unwrap(), Event::top(2));
        assert!(w1.meet(&ev(3, &[0])).is_err());
    }

    #[test]
    fn partition_validation() {
        let err = Partition::new(vec![("w1".into(), frac(1, 2)), ("w2".into(), frac(1, 3))]).unwrap_err();
        assert_eq!(err.to_string(), "weights sum to 5/6");
        assert!(matches!(
            Partition::new(vec![("w1".into(), int(1)), ("w1".into(), int(0))]),
            Err(MeasureError::DuplicateAtom(_))
        ));
        assert!(matches!(
            Partition::new(vec![("w1".into(), frac(3, 2)), ("w2".into(), frac(-1, 2))]),
            Err(MeasureError::NonPositiveWeight { .. })
        ));
        assert_eq!(Partition::new(vec![]), Err(MeasureError::Empty));
        assert!(Event::new(2, [2]).is_err());
    }

    #[test]
    fn generated_algebra_examples() {
        assert_eq!(EventAlgebra::generated(2, &[]).unwrap().atoms(), &[Event::top(2)]);
        assert_eq!(
            EventAlgebra::generated(2, &[ev(2, &[0])]).unwrap().atoms(),
            &[ev(2, &[0]), ev(2, &[1])]
        );
        assert_eq!(
            EventAlgebra::generated(3, &[ev(3, &[0, 1]), ev(3, &[1, 2])]).unwrap().atoms(),
            &[ev(3, &[0]), ev(3, &[1]), ev(3, &[2])]
        );
    }

    #[test]
    fn algebra_membership() {
        let trivial = EventAlgebra::trivial(3);
        assert!(trivial.contains(&Event::top(3)));
        let alg = EventAlgebra::generated(3, &[ev(3, &[0])]).unwrap();
        assert_eq!(alg.atoms(), &[ev(3, &[0]), ev(3, &[1, 2])]);
        assert!(!alg.contains(&ev(3, &[1])));
        let fine = EventAlgebra::generated(2, &[ev(2, &[0])]).unwrap();
        assert!(fine.contains(&ev(2, &[0, 1])));
        assert!(trivial.is_subalgebra_of(&alg));
        assert!(!alg.is_subalgebra_of(&trivial));
        assert_eq!(alg.events().len(), 4);
    }

    #[test]
    fn refine_examples() {
        let p = Partition::uniform(2);
        let (q, map) = p.refine(0, 2).unwrap();
        assert_eq!(q.weights(), &[frac(1, 4), frac(1, 4), frac(1, 2)]);
        assert_eq!(q.names(), &["w1.1", "w1.2", "w2"]);
        let e = ev(2, &[0]);
        assert_eq!(q.mu(&map.transport_event(&e)), frac(1, 2));
        assert_eq!(map.transport_values(&["x", "y"]), vec!["x", "x", "y"]);
        assert_eq!(p.refine(0, 1), Err(MeasureError::BadSplit(1)));
        assert!(p.refine(5, 2).is_err());
    }

    fn arb_partition() -> impl Strategy<Value = Partition> {
        prop::collection::vec(1i64..6, 1..6).prop_map(|raw| {
            let total: i64 = raw.iter().sum();
            Partition::new(
                raw.iter()
                    .enumerate()
                    .map(|(i, &w)| (format!("w{i}"), frac(w, total)))
                    .collect(),
            )
            .unwrap()
        })
    }

    fn arb_events(k: usize) -> impl Strategy<Value = (Partition, Vec<Event>)> {
        arb_partition().prop_flat_map(move |p| {
            let n = p.len();
            let events = prop::collection::vec(
                prop::collection::vec(any::<bool>(), n).prop_map(move |bits| {
                    Event::from_predicate(n, |i| bits[i])
                }),
                k,
            );
            (Just(p), events)
        })
    }

    proptest! {
        #[test]
        fn d_b_is_a_metric((p, es) in arb_events(3)) {
            let (a, b, c) = (&es[0], &es[1], &es[2]);
            let d = |x: &Event, y: &Event| p.d_b(x, y).unwrap();
            prop_assert_eq!(d(a, b) == int(0), a == b);
            prop_assert_eq!(d(a, b), d(b, a));
            prop_assert!(d(a, c) <= d(a, b) + d(b, c));
        }

        #[test]
        fn mu_is_additive((p, es) in arb_events(2)) {
            let (a, b) = (&es[0], &es[1]);
            prop_assert_eq!(
                p.mu(&a.join(b).unwrap()) + p.mu(&a.meet(b).unwrap()),
                p.mu(a) + p.mu(b)
            );
        }

        #[test]
        fn generated_atoms_partition_top((_, es) in arb_events(3)) {
            let n = es[0].universe();
            let alg = EventAlgebra::generated(n, &es).unwrap();
            let mut covered = Event::bottom(n);
            for (i, a) in alg.atoms().iter().enumerate() {
                prop_assert!(!a.is_bottom());
                for b in &alg.atoms()[i + 1..] {
                    prop_assert!(a.is_disjoint(b));
                }
                covered = covered.join(a).unwrap();
            }
            prop_assert!(covered.is_top());
            for g in &es {
                prop_assert!(alg.contains(g));
            }
        }

        #[test]
        fn refine_preserves_distances((p, es) in arb_events(2), atom in 0usize..6, k in 2usize..4) {
            let atom = atom % p.len();
            let (q, map) = p.refine(atom, k).unwrap();
            let (a, b) = (map.transport_event(&es[0]), map.transport_event(&es[1]));
            prop_assert_eq!(q.mu(&a), p.mu(&es[0]));
            prop_assert_eq!(q.d_b(&a, &b).unwrap(), p.d_b(&es[0], &es[1]).unwrap());
        }
    }
}
