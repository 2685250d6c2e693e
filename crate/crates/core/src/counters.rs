//! Operation counters shared by every stage of the pipeline.

/// Counts of the basic operations performed so far.  Enumerators keep one
/// of these each; builders report theirs separately and callers add them.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct Counters {
    pub pq_push: u64,
    pub pq_pop: u64,
    /// Comparisons made inside priority queues, choice sorting and result
    /// sorting.
    pub comparisons: u64,
    /// Entries currently held in priority structures.
    pub candidates_live: u64,
    /// Largest value `candidates_live` has reached.
    pub candidates_peak: u64,
    /// Pops from per-state choice heaps made after their initial fill.
    pub choice_pops: u64,
    pub states_built: u64,
    pub edges_built: u64,
    /// Tuples written while materializing intermediate relations.
    pub tuples_materialized: u64,
    /// Hash lookups and scans while joining.
    pub probes: u64,
    pub results: u64,
}

impl Counters {
    /// Pushes, pops and comparisons together.
    pub fn pq_work(&self) -> u64 {
        self.pq_push + self.pq_pop + self.comparisons
    }

    /// Every counted unit of work.
    pub fn total_ops(&self) -> u64 {
        self.pq_work() + self.states_built + self.edges_built + self.tuples_materialized + self.probes
    }

    pub fn set_live(&mut self, live: u64) {
        self.candidates_live = live;
        if live > self.candidates_peak {
            self.candidates_peak = live;
        }
    }

    /// Adds `other` into `self`.  Live counts add, peaks add as an upper
    /// bound.
    pub fn absorb(&mut self, other: &Counters) {
        self.pq_push += other.pq_push;
        self.pq_pop += other.pq_pop;
        self.comparisons += other.comparisons;
        self.candidates_live += other.candidates_live;
        self.candidates_peak += other.candidates_peak;
        self.choice_pops += other.choice_pops;
        self.states_built += other.states_built;
        self.edges_built += other.edges_built;
        self.tuples_materialized += other.tuples_materialized;
        self.probes += other.probes;
        self.results += other.results;
    }
}
