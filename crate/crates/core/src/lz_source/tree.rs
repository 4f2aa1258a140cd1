use smallvec::SmallVec;

/// Sentinel for an absent child in the flat child table.
const NO_CHILD: u32 = u32::MAX;

/// Alphabets up to this size use a flat `|A|`-wide child table per node.
const FLAT_ARITY_MAX: usize = 4;

pub const ROOT: u32 = 0;

#[derive(Clone, Debug)]
enum Children {
    Flat { arity: usize, slots: Vec<u32> },
    Sorted(Vec<SmallVec<[(u8, u32); 4]>>),
}

impl Children {
    fn new(arity: usize) -> Self {
        if arity <= FLAT_ARITY_MAX {
            Children::Flat {
                arity,
                slots: vec![NO_CHILD; arity],
            }
        } else {
            Children::Sorted(vec![SmallVec::new()])
        }
    }

    #[inline]
    fn get(&self, node: u32, symbol: u8) -> Option<u32> {
        match self {
            Children::Flat { arity, slots } => {
                let c = slots[node as usize * arity + symbol as usize];
                (c != NO_CHILD).then_some(c)
            }
            Children::Sorted(lists) => {
                let list = &lists[node as usize];
                list.binary_search_by_key(&symbol, |e| e.0)
                    .ok()
                    .map(|i| list[i].1)
            }
        }
    }

    #[inline]
    fn insert(&mut self, node: u32, symbol: u8, child: u32) {
        match self {
            Children::Flat { arity, slots } => {
                slots[node as usize * *arity + symbol as usize] = child;
                slots.extend(std::iter::repeat_n(NO_CHILD, *arity));
            }
            Children::Sorted(lists) => {
                let list = &mut lists[node as usize];
                let at = list.partition_point(|e| e.0 < symbol);
                list.insert(at, (symbol, child));
                lists.push(SmallVec::new());
            }
        }
    }
}

/// Result of feeding one symbol to the tree.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct Step {
    /// Node at which the symbol was emitted.
    pub node: u32,
    /// The symbol created a new leaf; the cursor is back at the root.
    pub completed_phrase: bool,
}

/// Growable LZ78 prefix tree with an arena of integer node ids.
///
/// Node 0 is the root. Every other node is created as the leaf that ends a
/// phrase, so after `T` completed phrases the tree has `T + 1` nodes.
#[derive(Clone, Debug)]
pub struct Lz78Tree {
    alphabet: usize,
    children: Children,
    /// m_z: symbols emitted while at each node.
    visits: Vec<u32>,
    cursor: u32,
    phrases: u64,
}

impl Lz78Tree {
    pub fn new(alphabet: usize) -> Self {
        Self {
            alphabet,
            children: Children::new(alphabet),
            visits: vec![0],
            cursor: ROOT,
            phrases: 0,
        }
    }

    pub fn alphabet_size(&self) -> usize {
        self.alphabet
    }

    /// |Z|: number of nodes including the root.
    pub fn node_count(&self) -> usize {
        self.visits.len()
    }

    pub fn cursor(&self) -> u32 {
        self.cursor
    }

    /// Completed phrases (root visits that ended in a new leaf).
    pub fn completed_phrases(&self) -> u64 {
        self.phrases
    }

    /// m_z for `node`.
    pub fn visits(&self, node: u32) -> u32 {
        self.visits[node as usize]
    }

    pub fn child(&self, node: u32, symbol: u8) -> Option<u32> {
        self.children.get(node, symbol)
    }

    /// Emits `symbol` at the cursor and traverses (or grows) the tree.
    #[inline]
    pub fn advance(&mut self, symbol: u8) -> Step {
        debug_assert!((symbol as usize) < self.alphabet);
        let node = self.cursor;
        self.visits[node as usize] += 1;
        match self.children.get(node, symbol) {
            Some(child) => {
                self.cursor = child;
                Step {
                    node,
                    completed_phrase: false,
                }
            }
            None => {
                let child = self.visits.len() as u32;
                self.children.insert(node, symbol, child);
                self.visits.push(0);
                self.cursor = ROOT;
                self.phrases += 1;
                Step {
                    node,
                    completed_phrase: true,
                }
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn example_parse() {
        // 0|00|01|010
        let mut t = Lz78Tree::new(2);
        let done: Vec<bool> = [0u8, 0, 0, 0, 1, 0, 1, 0]
            .iter()
            .map(|&s| t.advance(s).completed_phrase)
            .collect();
        assert_eq!(done, [true, false, true, false, true, false, false, true]);
        assert_eq!(t.node_count(), 5);
        assert_eq!(t.completed_phrases(), 4);
        assert_eq!(t.cursor(), ROOT);
        // root emitted 4 symbols, node "0" 3, node "01" 1
        assert_eq!(t.visits(ROOT), 4);
        let n0 = t.child(ROOT, 0).unwrap();
        assert_eq!(t.visits(n0), 3);
        assert_eq!(t.visits(t.child(n0, 1).unwrap()), 1);
    }

    #[test]
    fn sorted_children_for_large_alphabets() {
        let mut t = Lz78Tree::new(200);
        for s in [150u8, 3, 77, 3, 150, 3, 3] {
            t.advance(s);
        }
        // 150 | 3 | 77 | 3 150 | 3 3
        assert_eq!(t.completed_phrases(), 5);
        let n3 = t.child(ROOT, 3).unwrap();
        assert!(t.child(n3, 150).is_some() && t.child(n3, 3).is_some());
        assert!(t.child(n3, 77).is_none());
    }
}
