//! Array binary heap with an external comparator and comparison counting.

use alloc::vec::Vec;

/// Min-heap ordered by a `less` closure supplied on every call, which lets
/// the ordering depend on a dioid or on arrays the heap does not own.
#[derive(Debug, Clone)]
pub(crate) struct Heap<T> {
    data: Vec<T>,
}

impl<T> Default for Heap<T> {
    fn default() -> Self {
        Self { data: Vec::new() }
    }
}

impl<T> Heap<T> {
    pub fn new() -> Self {
        Self::default()
    }

    /// Builds a heap from arbitrary items in linear time.
    pub fn from_vec<F: FnMut(&T, &T) -> bool>(data: Vec<T>, less: &mut F, cmps: &mut u64) -> Self {
        let mut h = Self { data };
        heapify(&mut h.data, less, cmps);
        h
    }

    pub fn len(&self) -> usize {
        self.data.len()
    }

    pub fn peek(&self) -> Option<&T> {
        self.data.first()
    }

    pub fn iter(&self) -> core::slice::Iter<'_, T> {
        self.data.iter()
    }

    pub fn push<F: FnMut(&T, &T) -> bool>(&mut self, item: T, less: &mut F, cmps: &mut u64) {
        self.data.push(item);
        let last = self.data.len() - 1;
        sift_up(&mut self.data, last, less, cmps);
    }

    pub fn pop<F: FnMut(&T, &T) -> bool>(&mut self, less: &mut F, cmps: &mut u64) -> Option<T> {
        let n = self.data.len();
        if n == 0 {
            return None;
        }
        self.data.swap(0, n - 1);
        let top = self.data.pop();
        if !self.data.is_empty() {
            sift_down(&mut self.data, 0, less, cmps);
        }
        top
    }

    /// Inserts a batch.  Large batches are appended and the whole array is
    /// re-heapified; small ones are pushed one by one.
    pub fn extend_bulk<F: FnMut(&T, &T) -> bool>(&mut self, items: Vec<T>, less: &mut F, cmps: &mut u64) {
        if items.len() > 1 && items.len() >= self.data.len() {
            self.data.extend(items);
            heapify(&mut self.data, less, cmps);
        } else {
            for it in items {
                self.push(it, less, cmps);
            }
        }
    }
}

pub(crate) fn heapify<T, F: FnMut(&T, &T) -> bool>(data: &mut [T], less: &mut F, cmps: &mut u64) {
    let n = data.len();
    for i in (0..n / 2).rev() {
        sift_down(data, i, less, cmps);
    }
}

fn sift_up<T, F: FnMut(&T, &T) -> bool>(data: &mut [T], mut i: usize, less: &mut F, cmps: &mut u64) {
    while i > 0 {
        let p = (i - 1) / 2;
        *cmps += 1;
        if less(&data[i], &data[p]) {
            data.swap(i, p);
            i = p;
        } else {
            break;
        }
    }
}

fn sift_down<T, F: FnMut(&T, &T) -> bool>(data: &mut [T], mut i: usize, less: &mut F, cmps: &mut u64) {
    let n = data.len();
    loop {
        let l = 2 * i + 1;
        if l >= n {
            break;
        }
        let mut m = l;
        let r = l + 1;
        if r < n {
            *cmps += 1;
            if less(&data[r], &data[l]) {
                m = r;
            }
        }
        *cmps += 1;
        if less(&data[m], &data[i]) {
            data.swap(m, i);
            i = m;
        } else {
            break;
        }
    }
}
