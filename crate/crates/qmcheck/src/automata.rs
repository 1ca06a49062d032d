//! Buechi automata over measurement letters: temporal formula translation,
//! lasso-shaped languages for approximated trajectories, products, and
//! emptiness with counterexample extraction.
//!
//! Transitions carry symbolic guards (conjunctions of positive and negative
//! proposition literals) instead of exploded letter alphabets, so automata
//! stay small even when many propositions are declared. Formula translation
//! follows the on-the-fly tableau construction; generalized acceptance is
//! folded into a single Buechi set with a counter product.

use std::collections::{BTreeSet, HashMap, VecDeque};
use std::fmt;

use crate::mltl::{Formula, Letter};
use crate::neighborhood::SymbolSet;

/// A conjunction of proposition literals; denotes the letters containing
/// every positive name and none of the negative ones. Constructors keep
/// the two sides disjoint, so every cube is satisfiable.
#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct Cube {
    pos: BTreeSet<String>,
    neg: BTreeSet<String>,
}

impl Cube {
    /// The unconstrained cube accepting every letter.
    pub fn always() -> Self {
        Cube::default()
    }

    /// Pins every proposition of the universe: exactly one letter accepted.
    pub fn pin(letter: &Letter, universe: &BTreeSet<String>) -> Self {
        let mut pos = BTreeSet::new();
        let mut neg = BTreeSet::new();
        for name in universe {
            if letter.contains(name) {
                pos.insert(name.clone());
            } else {
                neg.insert(name.clone());
            }
        }
        Cube { pos, neg }
    }

    /// Requires the base propositions, forbids everything outside the
    /// ambiguous allowance, leaves ambiguous ones free.
    pub fn from_symbols(set: &SymbolSet, universe: &BTreeSet<String>) -> Self {
        let mut pos = BTreeSet::new();
        let mut neg = BTreeSet::new();
        for name in universe {
            if set.base().contains(name) {
                pos.insert(name.clone());
            } else if !set.ambiguous().contains(name) {
                neg.insert(name.clone());
            }
        }
        Cube { pos, neg }
    }

    /// Conjunction, or None when the literals contradict.
    pub fn and(&self, other: &Cube) -> Option<Cube> {
        let mut pos = self.pos.clone();
        pos.extend(other.pos.iter().cloned());
        let mut neg = self.neg.clone();
        neg.extend(other.neg.iter().cloned());
        if pos.intersection(&neg).next().is_some() {
            return None;
        }
        Some(Cube { pos, neg })
    }

    pub fn accepts(&self, letter: &Letter) -> bool {
        self.pos.iter().all(|n| letter.contains(n))
            && !self.neg.iter().any(|n| letter.contains(n))
    }

    /// Some letter satisfying the cube (the positive names alone).
    pub fn sample_letter(&self) -> Letter {
        Letter::from_names(self.pos.iter().cloned())
    }
}

impl fmt::Display for Cube {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.pos.is_empty() && self.neg.is_empty() {
            return write!(f, "t");
        }
        let mut first = true;
        for n in &self.pos {
            if !first {
                write!(f, " & ")?;
            }
            first = false;
            write!(f, "{n}")?;
        }
        for n in &self.neg {
            if !first {
                write!(f, " & ")?;
            }
            first = false;
            write!(f, "!{n}")?;
        }
        Ok(())
    }
}

/// An ultimately periodic word, for counterexample reporting.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct LassoWord {
    pub stem: Vec<Letter>,
    pub cycle: Vec<Letter>,
}

impl fmt::Display for LassoWord {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for l in &self.stem {
            write!(f, "{l} ")?;
        }
        write!(f, "(")?;
        let mut first = true;
        for l in &self.cycle {
            if !first {
                write!(f, " ")?;
            }
            first = false;
            write!(f, "{l}")?;
        }
        write!(f, ")^w")
    }
}

/// The symbolic language of an approximated trajectory: a concrete prefix
/// of letters followed by a repeated cycle of letter sets.
#[derive(Debug, Clone)]
pub struct LassoLanguage {
    prefix: Vec<Letter>,
    cycle: Vec<SymbolSet>,
}

impl LassoLanguage {
    /// Panics when the cycle is empty; the repetition needs at least one
    /// symbol set.
    pub fn new(prefix: Vec<Letter>, cycle: Vec<SymbolSet>) -> Self {
        assert!(!cycle.is_empty(), "lasso cycle must be nonempty");
        LassoLanguage { prefix, cycle }
    }

    pub fn prefix(&self) -> &[Letter] {
        &self.prefix
    }

    pub fn cycle(&self) -> &[SymbolSet] {
        &self.cycle
    }
}

/// A nondeterministic Buechi automaton with symbolic transition guards.
#[derive(Debug, Clone)]
pub struct Nba {
    universe: BTreeSet<String>,
    initial: Vec<usize>,
    edges: Vec<Vec<(Cube, usize)>>,
    accepting: Vec<bool>,
}

impl Nba {
    pub fn n_states(&self) -> usize {
        self.edges.len()
    }

    pub fn initial(&self) -> &[usize] {
        &self.initial
    }

    pub fn edges(&self, state: usize) -> &[(Cube, usize)] {
        &self.edges[state]
    }

    pub fn is_accepting(&self, state: usize) -> bool {
        self.accepting[state]
    }

    pub fn ap_names(&self) -> &BTreeSet<String> {
        &self.universe
    }

    /// Drops states unreachable from the initial set and renumbers.
    fn restrict_reachable(self) -> Nba {
        let n = self.edges.len();
        let mut seen = vec![false; n];
        let mut queue: VecDeque<usize> = VecDeque::new();
        for &q in &self.initial {
            if !seen[q] {
                seen[q] = true;
                queue.push_back(q);
            }
        }
        while let Some(q) = queue.pop_front() {
            for (_, r) in &self.edges[q] {
                if !seen[*r] {
                    seen[*r] = true;
                    queue.push_back(*r);
                }
            }
        }
        if seen.iter().all(|&s| s) {
            return self;
        }
        let mut renum = vec![usize::MAX; n];
        let mut kept = 0usize;
        for q in 0..n {
            if seen[q] {
                renum[q] = kept;
                kept += 1;
            }
        }
        let mut edges = vec![Vec::new(); kept];
        let mut accepting = vec![false; kept];
        for q in 0..n {
            if !seen[q] {
                continue;
            }
            accepting[renum[q]] = self.accepting[q];
            edges[renum[q]] = self.edges[q]
                .iter()
                .map(|(g, r)| (g.clone(), renum[*r]))
                .collect();
        }
        let initial = self.initial.iter().map(|&q| renum[q]).collect();
        Nba { universe: self.universe, initial, edges, accepting }
    }

    /// Whether the automaton accepts stem followed by cycle repeated
    /// forever. Used for cross-checking constructions against concrete
    /// words; cycle must be nonempty.
    pub fn accepts_ultimately_periodic(&self, stem: &[Letter], cycle: &[Letter]) -> bool {
        assert!(!cycle.is_empty(), "periodic part must be nonempty");
        let mut cur: BTreeSet<usize> = self.initial.iter().copied().collect();
        for letter in stem {
            let mut next = BTreeSet::new();
            for &q in &cur {
                for (g, r) in &self.edges[q] {
                    if g.accepts(letter) {
                        next.insert(*r);
                    }
                }
            }
            cur = next;
            if cur.is_empty() {
                return false;
            }
        }
        // Product with the cycle positions: node (q, i) means the automaton
        // is at q about to read cycle[i].
        let len = cycle.len();
        let node = |q: usize, i: usize| q * len + i;
        let n_nodes = self.edges.len() * len;
        let mut reach = vec![false; n_nodes];
        let mut queue = VecDeque::new();
        for &q in &cur {
            if !reach[node(q, 0)] {
                reach[node(q, 0)] = true;
                queue.push_back((q, 0));
            }
        }
        let mut order = Vec::new();
        while let Some((q, i)) = queue.pop_front() {
            order.push((q, i));
            for (g, r) in &self.edges[q] {
                if g.accepts(&cycle[i]) {
                    let j = (i + 1) % len;
                    if !reach[node(*r, j)] {
                        reach[node(*r, j)] = true;
                        queue.push_back((*r, j));
                    }
                }
            }
        }
        // Accepted iff some reachable accepting node lies on a cycle.
        for &(q, i) in &order {
            if !self.accepting[q] {
                continue;
            }
            let mut seen = vec![false; n_nodes];
            let mut bfs = VecDeque::new();
            for (g, r) in &self.edges[q] {
                if g.accepts(&cycle[i]) {
                    let j = (i + 1) % len;
                    if !seen[node(*r, j)] {
                        seen[node(*r, j)] = true;
                        bfs.push_back((*r, j));
                    }
                }
            }
            while let Some((p, k)) = bfs.pop_front() {
                if (p, k) == (q, i) {
                    return true;
                }
                for (g, r) in &self.edges[p] {
                    if g.accepts(&cycle[k]) {
                        let j = (k + 1) % len;
                        if !seen[node(*r, j)] {
                            seen[node(*r, j)] = true;
                            bfs.push_back((*r, j));
                        }
                    }
                }
            }
        }
        false
    }

    /// Serializes the automaton in the HOA interchange format.
    pub fn to_hoa(&self, name: &str) -> String {
        let aps: Vec<&String> = self.universe.iter().collect();
        let idx: HashMap<&str, usize> =
            aps.iter().enumerate().map(|(i, n)| (n.as_str(), i)).collect();
        let mut out = String::new();
        out.push_str("HOA: v1\n");
        out.push_str(&format!("name: \"{name}\"\n"));
        out.push_str(&format!("States: {}\n", self.n_states()));
        for &q in &self.initial {
            out.push_str(&format!("Start: {q}\n"));
        }
        out.push_str(&format!("AP: {}", aps.len()));
        for ap in &aps {
            out.push_str(&format!(" \"{ap}\""));
        }
        out.push('\n');
        out.push_str("acc-name: Buchi\n");
        out.push_str("Acceptance: 1 Inf(0)\n");
        out.push_str("properties: trans-labels explicit-labels state-acc\n");
        out.push_str("--BODY--\n");
        for q in 0..self.n_states() {
            if self.accepting[q] {
                out.push_str(&format!("State: {q} {{0}}\n"));
            } else {
                out.push_str(&format!("State: {q}\n"));
            }
            for (g, r) in &self.edges[q] {
                let mut lits: Vec<String> = Vec::new();
                for ap in &aps {
                    if g.pos.contains(*ap) {
                        lits.push(format!("{}", idx[ap.as_str()]));
                    } else if g.neg.contains(*ap) {
                        lits.push(format!("!{}", idx[ap.as_str()]));
                    }
                }
                let expr = if lits.is_empty() { "t".to_string() } else { lits.join(" & ") };
                out.push_str(&format!("[{expr}] {r}\n"));
            }
        }
        out.push_str("--END--\n");
        out
    }
}

/// Generalized Buechi automaton used internally by the translation and the
/// product; folded to a plain Buechi automaton before exposure.
struct Gnba {
    universe: BTreeSet<String>,
    initial: Vec<usize>,
    edges: Vec<Vec<(Cube, usize)>>,
    accept_sets: Vec<Vec<bool>>,
}

impl Gnba {
    fn degeneralize(self) -> Nba {
        let n = self.edges.len();
        let k = self.accept_sets.len();
        if k == 0 {
            return Nba {
                universe: self.universe,
                initial: self.initial,
                edges: self.edges,
                accepting: vec![true; n],
            }
            .restrict_reachable();
        }
        if k == 1 {
            let accepting = self.accept_sets.into_iter().next().unwrap();
            return Nba {
                universe: self.universe,
                initial: self.initial,
                edges: self.edges,
                accepting,
            }
            .restrict_reachable();
        }
        // Counter product: track which accept set is currently owed; the
        // counter advances when the source state pays the current set.
        let enc = |q: usize, i: usize| q * k + i;
        let mut edges = vec![Vec::new(); n * k];
        let mut accepting = vec![false; n * k];
        for q in 0..n {
            for i in 0..k {
                let j = if self.accept_sets[i][q] { (i + 1) % k } else { i };
                for (g, r) in &self.edges[q] {
                    edges[enc(q, i)].push((g.clone(), enc(*r, j)));
                }
            }
            accepting[enc(q, 0)] = self.accept_sets[0][q];
        }
        let initial = self.initial.iter().map(|&q| enc(q, 0)).collect();
        Nba { universe: self.universe, initial, edges, accepting }.restrict_reachable()
    }
}

// ---------------------------------------------------------------------------
// Formula translation: negation normal form, then tableau expansion.

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
enum Nnf {
    True,
    False,
    Lit { name: String, positive: bool },
    And(usize, usize),
    Or(usize, usize),
    Next(usize),
    Until(usize, usize),
    Release(usize, usize),
}

#[derive(Default)]
struct Arena {
    nodes: Vec<Nnf>,
    index: HashMap<Nnf, usize>,
}

impl Arena {
    fn intern(&mut self, n: Nnf) -> usize {
        if let Some(&i) = self.index.get(&n) {
            return i;
        }
        let i = self.nodes.len();
        self.nodes.push(n.clone());
        self.index.insert(n, i);
        i
    }
}

fn to_nnf(f: &Formula, positive: bool, arena: &mut Arena) -> usize {
    match f {
        Formula::True => arena.intern(if positive { Nnf::True } else { Nnf::False }),
        Formula::Ap(name) => arena.intern(Nnf::Lit { name: name.clone(), positive }),
        Formula::Not(g) => to_nnf(g, !positive, arena),
        Formula::Or(a, b) => {
            let l = to_nnf(a, positive, arena);
            let r = to_nnf(b, positive, arena);
            arena.intern(if positive { Nnf::Or(l, r) } else { Nnf::And(l, r) })
        }
        Formula::And(a, b) => {
            let l = to_nnf(a, positive, arena);
            let r = to_nnf(b, positive, arena);
            arena.intern(if positive { Nnf::And(l, r) } else { Nnf::Or(l, r) })
        }
        Formula::Implies(a, b) => {
            let l = to_nnf(a, !positive, arena);
            let r = to_nnf(b, positive, arena);
            arena.intern(if positive { Nnf::Or(l, r) } else { Nnf::And(l, r) })
        }
        Formula::Next(g) => {
            let inner = to_nnf(g, positive, arena);
            arena.intern(Nnf::Next(inner))
        }
        Formula::Until(a, b) => {
            let l = to_nnf(a, positive, arena);
            let r = to_nnf(b, positive, arena);
            arena.intern(if positive { Nnf::Until(l, r) } else { Nnf::Release(l, r) })
        }
        Formula::Eventually(g) => {
            if positive {
                let t = arena.intern(Nnf::True);
                let inner = to_nnf(g, true, arena);
                arena.intern(Nnf::Until(t, inner))
            } else {
                let f0 = arena.intern(Nnf::False);
                let inner = to_nnf(g, false, arena);
                arena.intern(Nnf::Release(f0, inner))
            }
        }
        Formula::Always(g) => {
            if positive {
                let f0 = arena.intern(Nnf::False);
                let inner = to_nnf(g, true, arena);
                arena.intern(Nnf::Release(f0, inner))
            } else {
                let t = arena.intern(Nnf::True);
                let inner = to_nnf(g, false, arena);
                arena.intern(Nnf::Until(t, inner))
            }
        }
    }
}

const INIT: usize = usize::MAX;

#[derive(Clone)]
struct Tableau {
    incoming: BTreeSet<usize>,
    new: BTreeSet<usize>,
    old: BTreeSet<usize>,
    next: BTreeSet<usize>,
}

fn lit_conflicts(arena: &Arena, old: &BTreeSet<usize>, f: usize) -> bool {
    let Nnf::Lit { name, positive } = &arena.nodes[f] else {
        return false;
    };
    old.iter().any(|&g| {
        matches!(&arena.nodes[g],
            Nnf::Lit { name: n, positive: p } if n == name && p != positive)
    })
}

fn expand(mut cur: Tableau, arena: &Arena, states: &mut Vec<Tableau>) {
    let Some(f) = cur.new.pop_first() else {
        if let Some(i) =
            states.iter().position(|s| s.old == cur.old && s.next == cur.next)
        {
            let incoming = cur.incoming;
            states[i].incoming.extend(incoming);
            return;
        }
        let id = states.len();
        let successor_new = cur.next.clone();
        states.push(cur);
        let succ = Tableau {
            incoming: BTreeSet::from([id]),
            new: successor_new,
            old: BTreeSet::new(),
            next: BTreeSet::new(),
        };
        expand(succ, arena, states);
        return;
    };
    match arena.nodes[f].clone() {
        Nnf::False => {}
        Nnf::True => expand(cur, arena, states),
        Nnf::Lit { .. } => {
            if lit_conflicts(arena, &cur.old, f) {
                return;
            }
            cur.old.insert(f);
            expand(cur, arena, states);
        }
        Nnf::And(l, r) => {
            cur.old.insert(f);
            for g in [l, r] {
                if !cur.old.contains(&g) {
                    cur.new.insert(g);
                }
            }
            expand(cur, arena, states);
        }
        Nnf::Or(l, r) => {
            cur.old.insert(f);
            let mut left = cur.clone();
            if !left.old.contains(&l) {
                left.new.insert(l);
            }
            expand(left, arena, states);
            if !cur.old.contains(&r) {
                cur.new.insert(r);
            }
            expand(cur, arena, states);
        }
        Nnf::Next(g) => {
            cur.old.insert(f);
            cur.next.insert(g);
            expand(cur, arena, states);
        }
        Nnf::Until(l, r) => {
            cur.old.insert(f);
            let mut wait = cur.clone();
            if !wait.old.contains(&l) {
                wait.new.insert(l);
            }
            wait.next.insert(f);
            expand(wait, arena, states);
            if !cur.old.contains(&r) {
                cur.new.insert(r);
            }
            expand(cur, arena, states);
        }
        Nnf::Release(l, r) => {
            cur.old.insert(f);
            let mut hold = cur.clone();
            if !hold.old.contains(&r) {
                hold.new.insert(r);
            }
            hold.next.insert(f);
            expand(hold, arena, states);
            for g in [l, r] {
                if !cur.old.contains(&g) {
                    cur.new.insert(g);
                }
            }
            expand(cur, arena, states);
        }
    }
}

fn collect_untils(arena: &Arena, root: usize) -> Vec<(usize, usize)> {
    let mut seen = vec![false; arena.nodes.len()];
    let mut stack = vec![root];
    let mut out = Vec::new();
    while let Some(f) = stack.pop() {
        if seen[f] {
            continue;
        }
        seen[f] = true;
        match &arena.nodes[f] {
            Nnf::True | Nnf::False | Nnf::Lit { .. } => {}
            Nnf::Next(g) => stack.push(*g),
            Nnf::And(l, r) | Nnf::Or(l, r) | Nnf::Release(l, r) => {
                stack.push(*l);
                stack.push(*r);
            }
            Nnf::Until(l, r) => {
                out.push((f, *r));
                stack.push(*l);
                stack.push(*r);
            }
        }
    }
    out.sort_unstable();
    out
}

/// Translates a temporal formula into an equivalent Buechi automaton over
/// letters drawn from the given proposition universe.
pub fn ltl_to_nba(phi: &Formula, universe: &BTreeSet<String>) -> Nba {
    debug_assert!(phi.ap_names().is_subset(universe));
    let mut arena = Arena::default();
    let root = to_nnf(phi, true, &mut arena);
    let mut states: Vec<Tableau> = Vec::new();
    let start = Tableau {
        incoming: BTreeSet::from([INIT]),
        new: BTreeSet::from([root]),
        old: BTreeSet::new(),
        next: BTreeSet::new(),
    };
    expand(start, &arena, &mut states);

    let n = states.len();
    let guards: Vec<Cube> = states
        .iter()
        .map(|s| {
            let mut pos = BTreeSet::new();
            let mut neg = BTreeSet::new();
            for &f in &s.old {
                if let Nnf::Lit { name, positive } = &arena.nodes[f] {
                    if *positive {
                        pos.insert(name.clone());
                    } else {
                        neg.insert(name.clone());
                    }
                }
            }
            Cube { pos, neg }
        })
        .collect();

    let mut initial = Vec::new();
    let mut edges = vec![Vec::new(); n];
    for (r, state) in states.iter().enumerate() {
        for &q in &state.incoming {
            if q == INIT {
                initial.push(r);
            } else {
                edges[q].push((guards[q].clone(), r));
            }
        }
    }

    let accept_sets: Vec<Vec<bool>> = collect_untils(&arena, root)
        .into_iter()
        .map(|(u, rhs)| {
            // True is discarded during expansion and never lands in `old`,
            // so an until with a trivial right side is discharged everywhere.
            if matches!(arena.nodes[rhs], Nnf::True) {
                return vec![true; states.len()];
            }
            states
                .iter()
                .map(|s| !s.old.contains(&u) || s.old.contains(&rhs))
                .collect()
        })
        .collect();

    Gnba { universe: universe.clone(), initial, edges, accept_sets }.degeneralize()
}

/// Builds the automaton accepting exactly prefix followed by the cycle's
/// symbol sets repeated forever: one state between consecutive letters,
/// accepting at the state joining stem and loop.
pub fn lasso_to_nba(lang: &LassoLanguage, universe: &BTreeSet<String>) -> Nba {
    let k = lang.prefix().len();
    let p = lang.cycle().len();
    let n = k + p;
    let mut edges = vec![Vec::new(); n];
    for (i, letter) in lang.prefix().iter().enumerate() {
        edges[i].push((Cube::pin(letter, universe), i + 1));
    }
    for (j, symbols) in lang.cycle().iter().enumerate() {
        let target = k + (j + 1) % p;
        edges[k + j].push((Cube::from_symbols(symbols, universe), target));
    }
    let mut accepting = vec![false; n];
    accepting[k] = true;
    Nba { universe: universe.clone(), initial: vec![0], edges, accepting }
}

// ---------------------------------------------------------------------------
// Emptiness: strongly connected components with an internal edge and an
// accepting state witness a nonempty language.

fn tarjan_sccs(nba: &Nba) -> Vec<Vec<usize>> {
    let n = nba.n_states();
    const UNSEEN: usize = usize::MAX;
    let mut index = vec![UNSEEN; n];
    let mut low = vec![0usize; n];
    let mut on_stack = vec![false; n];
    let mut stack: Vec<usize> = Vec::new();
    let mut next_index = 0usize;
    let mut sccs: Vec<Vec<usize>> = Vec::new();
    let mut frames: Vec<(usize, usize)> = Vec::new();

    for &root in &nba.initial {
        if index[root] != UNSEEN {
            continue;
        }
        index[root] = next_index;
        low[root] = next_index;
        next_index += 1;
        stack.push(root);
        on_stack[root] = true;
        frames.push((root, 0));
        while let Some(&mut (v, ref mut ei)) = frames.last_mut() {
            if *ei < nba.edges[v].len() {
                let w = nba.edges[v][*ei].1;
                *ei += 1;
                if index[w] == UNSEEN {
                    index[w] = next_index;
                    low[w] = next_index;
                    next_index += 1;
                    stack.push(w);
                    on_stack[w] = true;
                    frames.push((w, 0));
                } else if on_stack[w] {
                    low[v] = low[v].min(index[w]);
                }
            } else {
                frames.pop();
                if low[v] == index[v] {
                    let mut scc = Vec::new();
                    loop {
                        let w = stack.pop().expect("tarjan stack underflow");
                        on_stack[w] = false;
                        scc.push(w);
                        if w == v {
                            break;
                        }
                    }
                    sccs.push(scc);
                }
                if let Some(&mut (parent, _)) = frames.last_mut() {
                    low[parent] = low[parent].min(low[v]);
                }
            }
        }
    }
    sccs
}

fn bfs_edge_path(
    nba: &Nba,
    starts: &[usize],
    target: usize,
    restrict: Option<&[bool]>,
) -> Option<Vec<(usize, usize)>> {
    let n = nba.n_states();
    let inside = |q: usize| restrict.map_or(true, |mask| mask[q]);
    let mut prev: Vec<Option<(usize, usize)>> = vec![None; n];
    let mut seen = vec![false; n];
    let mut queue = VecDeque::new();
    for &s in starts {
        if inside(s) && !seen[s] {
            seen[s] = true;
            queue.push_back(s);
        }
    }
    while let Some(q) = queue.pop_front() {
        if q == target {
            let mut path = Vec::new();
            let mut cur = q;
            while let Some((p, ei)) = prev[cur] {
                path.push((p, ei));
                cur = p;
            }
            path.reverse();
            return Some(path);
        }
        for (ei, (_, r)) in nba.edges[q].iter().enumerate() {
            if inside(*r) && !seen[*r] {
                seen[*r] = true;
                prev[*r] = Some((q, ei));
                queue.push_back(*r);
            }
        }
    }
    None
}

/// Finds an accepted ultimately periodic word, or None when the language
/// is empty.
pub fn nonempty_witness(nba: &Nba) -> Option<LassoWord> {
    for scc in tarjan_sccs(nba) {
        let single_self_loop =
            scc.len() == 1 && nba.edges[scc[0]].iter().any(|(_, r)| *r == scc[0]);
        if scc.len() < 2 && !single_self_loop {
            continue;
        }
        let Some(&anchor) = scc.iter().find(|&&q| nba.accepting[q]) else {
            continue;
        };
        let mut mask = vec![false; nba.n_states()];
        for &q in &scc {
            mask[q] = true;
        }
        let stem_edges = bfs_edge_path(nba, &nba.initial, anchor, None)
            .expect("accepting component must be reachable");
        // First step out of the anchor inside the component, then back.
        let mut cycle_edges: Option<Vec<(usize, usize)>> = None;
        for (ei, (_, r)) in nba.edges[anchor].iter().enumerate() {
            if !mask[*r] {
                continue;
            }
            if let Some(back) = bfs_edge_path(nba, &[*r], anchor, Some(&mask)) {
                let mut edges = vec![(anchor, ei)];
                edges.extend(back);
                cycle_edges = Some(edges);
                break;
            }
        }
        let cycle_edges = cycle_edges.expect("component must close a cycle");
        let letters = |path: &[(usize, usize)]| {
            path.iter().map(|&(q, ei)| nba.edges[q][ei].0.sample_letter()).collect()
        };
        return Some(LassoWord { stem: letters(&stem_edges), cycle: letters(&cycle_edges) });
    }
    None
}

/// Decides whether the languages of two automata intersect; when they do,
/// also returns a word accepted by both.
pub fn product_empty(a: &Nba, b: &Nba) -> (bool, Option<LassoWord>) {
    debug_assert_eq!(a.universe, b.universe, "automata must share one universe");
    let mut index: HashMap<(usize, usize), usize> = HashMap::new();
    let mut pairs: Vec<(usize, usize)> = Vec::new();
    let mut worklist: VecDeque<usize> = VecDeque::new();
    let mut intern = |pa: usize, pb: usize,
                      pairs: &mut Vec<(usize, usize)>,
                      worklist: &mut VecDeque<usize>| {
        *index.entry((pa, pb)).or_insert_with(|| {
            let id = pairs.len();
            pairs.push((pa, pb));
            worklist.push_back(id);
            id
        })
    };
    let mut initial = Vec::new();
    for &ia in &a.initial {
        for &ib in &b.initial {
            initial.push(intern(ia, ib, &mut pairs, &mut worklist));
        }
    }
    let mut edges: Vec<Vec<(Cube, usize)>> = Vec::new();
    while let Some(id) = worklist.pop_front() {
        let (pa, pb) = pairs[id];
        let mut out = Vec::new();
        for (ga, ra) in &a.edges[pa] {
            for (gb, rb) in &b.edges[pb] {
                if let Some(g) = ga.and(gb) {
                    let rid = intern(*ra, *rb, &mut pairs, &mut worklist);
                    out.push((g, rid));
                }
            }
        }
        if edges.len() <= id {
            edges.resize_with(id + 1, Vec::new);
        }
        edges[id] = out;
    }
    edges.resize_with(pairs.len(), Vec::new);
    let accept_a: Vec<bool> = pairs.iter().map(|&(pa, _)| a.accepting[pa]).collect();
    let accept_b: Vec<bool> = pairs.iter().map(|&(_, pb)| b.accepting[pb]).collect();
    let product = Gnba {
        universe: a.universe.clone(),
        initial,
        edges,
        accept_sets: vec![accept_a, accept_b],
    }
    .degeneralize();
    match nonempty_witness(&product) {
        None => (true, None),
        Some(w) => (false, Some(w)),
    }
}

/// Whether every word of the automaton satisfies the formula, decided by
/// intersecting with the negation.
pub fn check_inclusion_via_negation(a_g: &Nba, phi: &Formula) -> bool {
    let negated = ltl_to_nba(&Formula::not(phi.clone()), &a_g.universe);
    product_empty(a_g, &negated).0
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::neighborhood::SymbolSet;

    fn universe(names: &[&str]) -> BTreeSet<String> {
        names.iter().map(|s| s.to_string()).collect()
    }

    fn letter(names: &[&str]) -> Letter {
        Letter::from_names(names.iter().copied())
    }

    fn symbols(base: &[&str], ambiguous: &[&str]) -> SymbolSet {
        SymbolSet::new(
            Letter::from_names(base.iter().copied()),
            ambiguous.iter().map(|s| s.to_string()).collect(),
        )
    }

    #[test]
    fn true_formula_gives_universal_single_state() {
        let u = universe(&["a"]);
        let nba = ltl_to_nba(&Formula::True, &u);
        assert_eq!(nba.n_states(), 1);
        assert!(nba.is_accepting(0));
        assert!(nba.accepts_ultimately_periodic(&[], &[letter(&[])]));
        assert!(nba.accepts_ultimately_periodic(&[], &[letter(&["a"])]));
        assert!(nba.accepts_ultimately_periodic(&[letter(&["a"])], &[letter(&[]), letter(&["a"])]));
    }

    #[test]
    fn globally_a_accepts_exactly_constant_a() {
        let u = universe(&["a"]);
        let nba = ltl_to_nba(&Formula::always(Formula::ap("a")), &u);
        assert!(nba.accepts_ultimately_periodic(&[], &[letter(&["a"])]));
        assert!(!nba.accepts_ultimately_periodic(&[], &[letter(&["a"]), letter(&[])]));
        assert!(!nba.accepts_ultimately_periodic(&[letter(&[])], &[letter(&["a"])]));
    }

    #[test]
    fn eventually_globally_distinguishes_tail_behaviour() {
        let u = universe(&["a"]);
        let nba = ltl_to_nba(&Formula::eventually(Formula::always(Formula::ap("a"))), &u);
        let empty3 = vec![letter(&[]); 3];
        assert!(nba.accepts_ultimately_periodic(&empty3, &[letter(&["a"])]));
        assert!(!nba.accepts_ultimately_periodic(&[], &[letter(&["a"]), letter(&[])]));
    }

    #[test]
    fn until_automaton_matches_handmade_words() {
        let u = universe(&["a", "b"]);
        let nba = ltl_to_nba(&Formula::until(Formula::ap("a"), Formula::ap("b")), &u);
        assert!(nba.accepts_ultimately_periodic(&[letter(&["b"])], &[letter(&[])]));
        assert!(nba.accepts_ultimately_periodic(
            &[letter(&["a"]), letter(&["a"]), letter(&["b"])],
            &[letter(&[])],
        ));
        assert!(!nba.accepts_ultimately_periodic(&[], &[letter(&["a"])]));
        assert!(!nba.accepts_ultimately_periodic(&[letter(&[])], &[letter(&["b"])]));
    }

    #[test]
    fn lasso_with_full_symbol_set_is_universal() {
        let u = universe(&["a", "b"]);
        let lang = LassoLanguage::new(vec![], vec![symbols(&[], &["a", "b"])]);
        let nba = lasso_to_nba(&lang, &u);
        for cyc in [vec![letter(&[])], vec![letter(&["a", "b"]), letter(&["b"])]] {
            assert!(nba.accepts_ultimately_periodic(&[letter(&["a"])], &cyc));
        }
    }

    #[test]
    fn lasso_single_word_language() {
        let u = universe(&["a"]);
        let lang = LassoLanguage::new(vec![letter(&["a"])], vec![symbols(&[], &[])]);
        let nba = lasso_to_nba(&lang, &u);
        assert!(nba.accepts_ultimately_periodic(&[letter(&["a"])], &[letter(&[])]));
        assert!(!nba.accepts_ultimately_periodic(&[letter(&[])], &[letter(&[])]));
        assert!(!nba.accepts_ultimately_periodic(
            &[letter(&["a"]), letter(&["a"])],
            &[letter(&[])],
        ));
    }

    #[test]
    fn product_with_empty_language_is_empty() {
        let u = universe(&["a"]);
        let universal = ltl_to_nba(&Formula::True, &u);
        let empty = ltl_to_nba(&Formula::not(Formula::True), &u);
        assert_eq!(empty.n_states(), 0);
        let (is_empty, witness) = product_empty(&universal, &empty);
        assert!(is_empty);
        assert!(witness.is_none());
    }

    #[test]
    fn lasso_violating_safety_has_empty_intersection() {
        let u = universe(&["a"]);
        let lang = LassoLanguage::new(vec![letter(&["a"])], vec![symbols(&[], &[])]);
        let a_g = lasso_to_nba(&lang, &u);
        let a_phi = ltl_to_nba(&Formula::always(Formula::ap("a")), &u);
        let (is_empty, _) = product_empty(&a_g, &a_phi);
        assert!(is_empty);
    }

    #[test]
    fn product_witness_is_accepted_by_both_factors() {
        let u = universe(&["a"]);
        let lang = LassoLanguage::new(vec![letter(&["a"])], vec![symbols(&[], &["a"])]);
        let a_g = lasso_to_nba(&lang, &u);
        let a_phi = ltl_to_nba(&Formula::eventually(Formula::ap("a")), &u);
        let (is_empty, witness) = product_empty(&a_g, &a_phi);
        assert!(!is_empty);
        let w = witness.expect("nonempty product must give a witness");
        assert!(!w.cycle.is_empty());
        assert!(a_g.accepts_ultimately_periodic(&w.stem, &w.cycle));
        assert!(a_phi.accepts_ultimately_periodic(&w.stem, &w.cycle));
    }

    #[test]
    fn inclusion_via_negation_on_single_word() {
        let u = universe(&["a"]);
        let constant_a = LassoLanguage::new(vec![], vec![symbols(&["a"], &[])]);
        let a_g = lasso_to_nba(&constant_a, &u);
        assert!(check_inclusion_via_negation(&a_g, &Formula::always(Formula::ap("a"))));
        assert!(check_inclusion_via_negation(&a_g, &Formula::True));
        assert!(!check_inclusion_via_negation(
            &a_g,
            &Formula::always(Formula::not(Formula::ap("a"))),
        ));
    }

    #[test]
    fn verdict_sides_never_both_fire_on_nonempty_lasso() {
        let u = universe(&["a"]);
        let lang = LassoLanguage::new(vec![letter(&[])], vec![symbols(&["a"], &[])]);
        let a_g = lasso_to_nba(&lang, &u);
        for phi in [
            Formula::eventually(Formula::ap("a")),
            Formula::always(Formula::ap("a")),
            Formula::until(Formula::not(Formula::ap("a")), Formula::ap("a")),
        ] {
            let a_phi = ltl_to_nba(&phi, &u);
            let violates = product_empty(&a_g, &a_phi).0;
            let satisfies = check_inclusion_via_negation(&a_g, &phi);
            assert!(
                !(violates && satisfies),
                "both verdict sides fired for {phi}",
            );
        }
    }

    #[test]
    fn double_negation_preserves_the_language() {
        let u = universe(&["a", "b"]);
        for phi in [
            Formula::until(Formula::ap("a"), Formula::ap("b")),
            Formula::eventually(Formula::always(Formula::ap("a"))),
        ] {
            let doubled = Formula::not(Formula::not(phi.clone()));
            let a_phi = ltl_to_nba(&phi, &u);
            let a_doubled = ltl_to_nba(&doubled, &u);
            assert!(check_inclusion_via_negation(&a_phi, &doubled));
            assert!(check_inclusion_via_negation(&a_doubled, &phi));
        }
    }

    #[test]
    fn eventually_equals_true_until() {
        let u = universe(&["a"]);
        let f_a = Formula::eventually(Formula::ap("a"));
        let tu_a = Formula::until(Formula::True, Formula::ap("a"));
        let a1 = ltl_to_nba(&f_a, &u);
        let a2 = ltl_to_nba(&tu_a, &u);
        assert!(check_inclusion_via_negation(&a1, &tu_a));
        assert!(check_inclusion_via_negation(&a2, &f_a));
    }

    #[test]
    fn hoa_export_lists_states_and_guards() {
        let u = universe(&["a", "b"]);
        let nba = ltl_to_nba(&Formula::always(Formula::ap("a")), &u);
        let hoa = nba.to_hoa("safety");
        assert!(hoa.starts_with("HOA: v1"));
        assert!(hoa.contains(&format!("States: {}", nba.n_states())));
        assert!(hoa.contains("AP: 2 \"a\" \"b\""));
        assert!(hoa.contains("Acceptance: 1 Inf(0)"));
        assert!(hoa.contains("--BODY--") && hoa.contains("--END--"));
        assert!(hoa.contains("[0] "));
    }

    #[test]
    fn cube_conjunction_detects_contradictions() {
        let u = universe(&["a", "b"]);
        let pinned_a = Cube::pin(&letter(&["a"]), &u);
        let pinned_b = Cube::pin(&letter(&["b"]), &u);
        assert!(pinned_a.and(&pinned_b).is_none());
        assert!(pinned_a.and(&Cube::always()).is_some());
        assert!(pinned_a.accepts(&letter(&["a"])));
        assert!(!pinned_a.accepts(&letter(&["a", "b"])));
        assert!(!pinned_a.accepts(&letter(&[])));
    }
}
