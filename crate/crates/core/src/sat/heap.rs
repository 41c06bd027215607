//! Indexed binary max-heap over variable indices, ordered by an external
//! activity array. Ties go to the lower index so branching is reproducible.

#[derive(Debug, Clone, Default)]
pub(crate) struct VarHeap {
    heap: Vec<u32>,
    pos: Vec<i32>,
}

#[inline]
fn above(act: &[f64], a: u32, b: u32) -> bool {
    let (x, y) = (act[a as usize], act[b as usize]);
    x > y || (x == y && a < b)
}

impl VarHeap {
    pub fn grow(&mut self, n: usize) {
        if self.pos.len() < n + 1 {
            self.pos.resize(n + 1, -1);
        }
    }

    pub fn contains(&self, v: u32) -> bool {
        self.pos.get(v as usize).is_some_and(|&p| p >= 0)
    }

    pub fn insert(&mut self, v: u32, act: &[f64]) {
        self.grow(v as usize);
        if self.contains(v) {
            return;
        }
        self.pos[v as usize] = self.heap.len() as i32;
        self.heap.push(v);
        self.up(self.heap.len() - 1, act);
    }

    /// Restores order after `v`'s activity increased.
    pub fn bumped(&mut self, v: u32, act: &[f64]) {
        if self.contains(v) {
            self.up(self.pos[v as usize] as usize, act);
        }
    }

    pub fn pop(&mut self, act: &[f64]) -> Option<u32> {
        let top = *self.heap.first()?;
        let last = self.heap.pop().unwrap();
        self.pos[top as usize] = -1;
        if !self.heap.is_empty() {
            self.heap[0] = last;
            self.pos[last as usize] = 0;
            self.down(0, act);
        }
        Some(top)
    }

    fn up(&mut self, mut i: usize, act: &[f64]) {
        let v = self.heap[i];
        while i > 0 {
            let parent = (i - 1) / 2;
            let pv = self.heap[parent];
            if !above(act, v, pv) {
                break;
            }
            self.heap[i] = pv;
            self.pos[pv as usize] = i as i32;
            i = parent;
        }
        self.heap[i] = v;
        self.pos[v as usize] = i as i32;
    }

    fn down(&mut self, mut i: usize, act: &[f64]) {
        let v = self.heap[i];
        let n = self.heap.len();
        loop {
            let l = 2 * i + 1;
            if l >= n {
                break;
            }
            let r = l + 1;
            let child = if r < n && above(act, self.heap[r], self.heap[l]) { r } else { l };
            let cv = self.heap[child];
            if !above(act, cv, v) {
                break;
            }
            self.heap[i] = cv;
            self.pos[cv as usize] = i as i32;
            i = child;
        }
        self.heap[i] = v;
        self.pos[v as usize] = i as i32;
    }
}

#[cfg(test)]
mod tests {
    use proptest::prelude::*;

    use super::*;

    proptest! {
        #[test]
        fn pops_in_activity_order(acts in prop::collection::vec(0u32..20, 1..40), bumps in prop::collection::vec((0usize..40, 1u32..10), 0..20)) {
            let n = acts.len();
            let mut act: Vec<f64> = std::iter::once(0.0).chain(acts.iter().map(|&a| a as f64)).collect();
            let mut h = VarHeap::default();
            for v in 1..=n as u32 {
                h.insert(v, &act);
            }
            for (i, b) in bumps {
                let v = (i % n) as u32 + 1;
                act[v as usize] += b as f64;
                h.bumped(v, &act);
            }
            let mut out = Vec::new();
            while let Some(v) = h.pop(&act) {
                out.push(v);
            }
            let mut want: Vec<u32> = (1..=n as u32).collect();
            want.sort_by(|&a, &b| act[b as usize].partial_cmp(&act[a as usize]).unwrap().then(a.cmp(&b)));
            prop_assert_eq!(out, want);
        }
    }
}
