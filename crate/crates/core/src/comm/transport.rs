//! In-process SPMD transport.
//!
//! `Universe::run` starts one thread per logical rank, each executing the
//! same closure with its own [`Comm`]. Collectives are synchronized
//! exchanges over per-pair FIFO mailboxes. A rank that waits at a collective
//! longer than the watchdog timeout panics, and a panicking rank releases
//! its peers, so a mismatched collective sequence fails instead of hanging.

use std::any::Any;
use std::collections::VecDeque;
use std::sync::atomic::{AtomicBool, AtomicU64, Ordering};
use std::sync::{Arc, Condvar, Mutex, MutexGuard};
use std::time::{Duration, Instant};

struct Envelope {
    op: &'static str,
    seq: u64,
    payload: Box<dyn Any + Send>,
}

struct BarrierState {
    arrived: usize,
    generation: u64,
}

struct Shared {
    n_ranks: usize,
    mailboxes: Vec<Mutex<VecDeque<Envelope>>>,
    barrier: Mutex<BarrierState>,
    wake: Condvar,
    poisoned: AtomicBool,
    first_panic: Mutex<Option<usize>>,
    timeout: Duration,
}

fn lock<T>(m: &Mutex<T>) -> MutexGuard<'_, T> {
    m.lock().unwrap_or_else(|e| e.into_inner())
}

impl Shared {
    fn mailbox(&self, from: usize, to: usize) -> &Mutex<VecDeque<Envelope>> {
        &self.mailboxes[from * self.n_ranks + to]
    }

    fn barrier(&self, rank: usize) {
        let mut st = lock(&self.barrier);
        let generation = st.generation;
        st.arrived += 1;
        if st.arrived == self.n_ranks {
            st.arrived = 0;
            st.generation += 1;
            self.wake.notify_all();
            return;
        }
        let deadline = Instant::now() + self.timeout;
        while st.generation == generation {
            if self.poisoned.load(Ordering::SeqCst) {
                drop(st);
                panic!("rank {rank}: a peer rank panicked during a collective");
            }
            let now = Instant::now();
            if now >= deadline {
                self.poisoned.store(true, Ordering::SeqCst);
                self.wake.notify_all();
                drop(st);
                panic!(
                    "rank {rank}: collective watchdog expired after {:?} (not all ranks entered the collective)",
                    self.timeout
                );
            }
            let wait = (deadline - now).min(Duration::from_millis(50));
            st = self.wake.wait_timeout(st, wait).unwrap_or_else(|e| e.into_inner()).0;
        }
    }
}

/// One line of the communication trace.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TraceEntry {
    pub label: String,
    pub send_counts: Vec<usize>,
}

impl TraceEntry {
    pub fn values_sent(&self) -> usize {
        self.send_counts.iter().sum()
    }

    pub fn bytes_sent(&self) -> usize {
        8 * self.values_sent()
    }
}

/// Handle of one logical rank.
#[derive(Clone)]
pub struct Comm {
    rank: usize,
    shared: Arc<Shared>,
    seq: Arc<AtomicU64>,
    trace: Arc<Mutex<Vec<TraceEntry>>>,
}

impl std::fmt::Debug for Comm {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("Comm")
            .field("rank", &self.rank)
            .field("size", &self.shared.n_ranks)
            .finish()
    }
}

impl Comm {
    pub fn rank(&self) -> usize {
        self.rank
    }

    pub fn size(&self) -> usize {
        self.shared.n_ranks
    }

    pub fn barrier(&self) {
        self.shared.barrier(self.rank);
    }

    /// Personalized exchange: `sends[r]` goes to rank `r`; returns what every
    /// rank sent to this one, indexed by source rank.
    pub fn all_to_all<T: Send + 'static>(&self, op: &'static str, sends: Vec<Vec<T>>) -> Vec<Vec<T>> {
        let n = self.size();
        assert_eq!(sends.len(), n, "all_to_all needs one message per rank");
        let seq = self.seq.fetch_add(1, Ordering::SeqCst);
        for (to, payload) in sends.into_iter().enumerate() {
            lock(self.shared.mailbox(self.rank, to)).push_back(Envelope {
                op,
                seq,
                payload: Box::new(payload),
            });
        }
        self.barrier();
        (0..n)
            .map(|from| {
                let env = lock(self.shared.mailbox(from, self.rank))
                    .pop_front()
                    .expect("mailbox empty after barrier");
                if env.op != op || env.seq != seq {
                    panic!(
                        "rank {}: collective mismatch, expected {op}#{seq}, rank {from} sent {}#{}",
                        self.rank, env.op, env.seq
                    );
                }
                *env.payload
                    .downcast::<Vec<T>>()
                    .unwrap_or_else(|_| panic!("rank {}: payload type mismatch in {op}", self.rank))
            })
            .collect()
    }

    /// `MPI_Alltoallv` on `f64` buffers with explicit counts and displacements.
    pub fn all_to_all_v(
        &self,
        send_buf: &[f64],
        send_counts: &[usize],
        send_displ: &[usize],
        recv_buf: &mut [f64],
        recv_counts: &[usize],
        recv_displ: &[usize],
    ) {
        let sends = (0..self.size())
            .map(|r| send_buf[send_displ[r]..send_displ[r] + send_counts[r]].to_vec())
            .collect();
        let received = self.all_to_all("alltoallv", sends);
        for (r, msg) in received.into_iter().enumerate() {
            assert_eq!(
                msg.len(),
                recv_counts[r],
                "rank {}: expected {} values from rank {r}, got {}",
                self.rank,
                recv_counts[r],
                msg.len()
            );
            recv_buf[recv_displ[r]..recv_displ[r] + msg.len()].copy_from_slice(&msg);
        }
    }

    /// Collects one item per rank on `root` (in rank order).
    pub fn gather<T: Send + 'static>(&self, root: usize, item: T) -> Option<Vec<T>> {
        let mut sends: Vec<Vec<T>> = (0..self.size()).map(|_| Vec::new()).collect();
        sends[root].push(item);
        let got = self.all_to_all("gather", sends);
        (self.rank == root).then(|| got.into_iter().flatten().collect())
    }

    /// `root` passes `Some(value)`, everybody receives a copy.
    pub fn broadcast<T: Clone + Send + 'static>(&self, root: usize, item: Option<T>) -> T {
        let sends = if self.rank == root {
            let v = item.expect("broadcast root must provide a value");
            (0..self.size()).map(|_| vec![v.clone()]).collect()
        } else {
            (0..self.size()).map(|_| Vec::new()).collect()
        };
        let mut got = self.all_to_all("broadcast", sends);
        got[root].pop().expect("broadcast value")
    }

    pub fn all_gather<T: Clone + Send + 'static>(&self, item: T) -> Vec<T> {
        let sends = (0..self.size()).map(|_| vec![item.clone()]).collect();
        self.all_to_all("allgather", sends)
            .into_iter()
            .map(|mut v| v.pop().expect("allgather value"))
            .collect()
    }

    /// Global sum: partial sums are gathered on rank 0, added in rank order
    /// and broadcast, so every rank receives the same bits.
    pub fn allreduce_sum(&self, local: f64) -> f64 {
        let total = self.gather(0, local).map(|parts| parts.iter().fold(0.0, |a, b| a + b));
        self.broadcast(0, total)
    }

    pub fn allreduce_max(&self, local: f64) -> f64 {
        let total = self.gather(0, local).map(|parts| parts.iter().fold(f64::NEG_INFINITY, |a, &b| a.max(b)));
        self.broadcast(0, total)
    }

    pub fn record(&self, entry: TraceEntry) {
        log::trace!("rank {} {} send_counts={:?}", self.rank, entry.label, entry.send_counts);
        lock(&self.trace).push(entry);
    }

    pub fn trace(&self) -> Vec<TraceEntry> {
        lock(&self.trace).clone()
    }

    pub fn clear_trace(&self) {
        lock(&self.trace).clear();
    }
}

struct PanicGuard<'a> {
    shared: &'a Shared,
    rank: usize,
}

impl Drop for PanicGuard<'_> {
    fn drop(&mut self) {
        if std::thread::panicking() {
            let mut first = lock(&self.shared.first_panic);
            if first.is_none() {
                *first = Some(self.rank);
            }
            drop(first);
            self.shared.poisoned.store(true, Ordering::SeqCst);
            let _st = lock(&self.shared.barrier);
            self.shared.wake.notify_all();
        }
    }
}

/// A set of logical ranks sharing one transport.
#[derive(Debug, Clone, Copy)]
pub struct Universe {
    n_ranks: usize,
    timeout: Duration,
}

impl Universe {
    pub fn new(n_ranks: usize) -> Universe {
        assert!(n_ranks >= 1, "need at least one rank");
        Universe {
            n_ranks,
            timeout: Duration::from_secs(300),
        }
    }

    /// Watchdog timeout for a single collective.
    pub fn with_timeout(mut self, timeout: Duration) -> Universe {
        self.timeout = timeout;
        self
    }

    pub fn n_ranks(&self) -> usize {
        self.n_ranks
    }

    /// Runs `body` on every rank concurrently and returns the per-rank
    /// results in rank order. A panic on any rank is re-raised here.
    pub fn run<T, F>(&self, body: F) -> Vec<T>
    where
        F: Fn(Comm) -> T + Sync,
        T: Send,
    {
        let n = self.n_ranks;
        let shared = Arc::new(Shared {
            n_ranks: n,
            mailboxes: (0..n * n).map(|_| Mutex::new(VecDeque::new())).collect(),
            barrier: Mutex::new(BarrierState {
                arrived: 0,
                generation: 0,
            }),
            wake: Condvar::new(),
            poisoned: AtomicBool::new(false),
            first_panic: Mutex::new(None),
            timeout: self.timeout,
        });
        let body = &body;
        let results: Vec<std::thread::Result<T>> = std::thread::scope(|scope| {
            let handles: Vec<_> = (0..n)
                .map(|rank| {
                    let shared = Arc::clone(&shared);
                    std::thread::Builder::new()
                        .name(format!("rank-{rank}"))
                        .stack_size(32 << 20)
                        .spawn_scoped(scope, move || {
                            let _guard = PanicGuard { shared: &shared, rank };
                            let comm = Comm {
                                rank,
                                shared: Arc::clone(&shared),
                                seq: Arc::new(AtomicU64::new(0)),
                                trace: Arc::new(Mutex::new(Vec::new())),
                            };
                            body(comm)
                        })
                        .expect("spawn rank thread")
                })
                .collect();
            handles.into_iter().map(|h| h.join()).collect()
        });
        let first = *lock(&shared.first_panic);
        let mut out = Vec::with_capacity(n);
        let mut errors: Vec<(usize, Box<dyn Any + Send>)> = Vec::new();
        for (rank, r) in results.into_iter().enumerate() {
            match r {
                Ok(v) => out.push(v),
                Err(e) => errors.push((rank, e)),
            }
        }
        if !errors.is_empty() {
            let idx = first
                .and_then(|f| errors.iter().position(|(r, _)| *r == f))
                .unwrap_or(0);
            std::panic::resume_unwind(errors.swap_remove(idx).1);
        }
        out
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn all_to_all_routes_by_rank() {
        let out = Universe::new(3).run(|c| {
            let sends = (0..3).map(|to| vec![c.rank() * 10 + to]).collect();
            c.all_to_all("t", sends)
        });
        for (me, got) in out.iter().enumerate() {
            let expect: Vec<Vec<usize>> = (0..3).map(|from| vec![from * 10 + me]).collect();
            assert_eq!(got, &expect);
        }
    }

    #[test]
    fn fifo_per_pair() {
        let out = Universe::new(2).run(|c| {
            let a = c.all_to_all("a", vec![vec![1u8], vec![2u8]]);
            let b = c.all_to_all("b", vec![vec![3u8], vec![4u8]]);
            (a, b)
        });
        assert_eq!(out[1].0, vec![vec![2], vec![2]]);
        assert_eq!(out[1].1, vec![vec![4], vec![4]]);
    }

    #[test]
    fn reductions_identical_on_all_ranks() {
        let out = Universe::new(4).run(|c| c.allreduce_sum(0.1 * (c.rank() as f64 + 1.0)));
        assert!(out.iter().all(|v| v.to_bits() == out[0].to_bits()));
        assert!((out[0] - 1.0).abs() < 1e-15);
        let g = Universe::new(3).run(|c| c.all_gather(c.rank()));
        assert!(g.iter().all(|v| v == &vec![0, 1, 2]));
    }

    #[test]
    fn alltoallv_layout() {
        let out = Universe::new(2).run(|c| {
            let me = c.rank() as f64;
            let send = [me, me + 0.5, me + 0.25];
            // rank 0 sends 1 value to itself, 2 to rank 1; rank 1 sends 2 to 0, 1 to itself
            let (sc, sd) = if c.rank() == 0 { ([1, 2], [0, 1]) } else { ([2, 1], [0, 2]) };
            let (rc, rd) = if c.rank() == 0 { ([1, 2], [0, 1]) } else { ([2, 1], [0, 2]) };
            let mut recv = [0.0; 3];
            c.all_to_all_v(&send, &sc, &sd, &mut recv, &rc, &rd);
            recv
        });
        assert_eq!(out[0], [0.0, 1.0, 1.5]);
        assert_eq!(out[1], [0.5, 0.25, 1.25]);
    }

    #[test]
    #[should_panic(expected = "watchdog")]
    fn watchdog_reports_missing_collective() {
        Universe::new(2).with_timeout(Duration::from_millis(200)).run(|c| {
            if c.rank() == 0 {
                c.barrier();
            }
        });
    }

    #[test]
    #[should_panic(expected = "boom")]
    fn panic_propagates_original_message() {
        Universe::new(3).run(|c| {
            if c.rank() == 1 {
                panic!("boom");
            }
            c.barrier();
        });
    }
}
