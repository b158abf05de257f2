//! Range sharding over worker threads with canonical output order.

use std::sync::atomic::{AtomicUsize, Ordering};
use std::sync::Mutex;

/// Worker count: available parallelism, capped by `PPG_THREADS` when set.
pub fn thread_count() -> usize {
    let avail = std::thread::available_parallelism().map(|n| n.get()).unwrap_or(1);
    match std::env::var("PPG_THREADS").ok().and_then(|v| v.trim().parse::<usize>().ok()) {
        Some(cap) if cap >= 1 => avail.min(cap),
        _ => avail,
    }
}

/// Splits `[lo, hi]` into chunks of `chunk` integers, runs `f` on each chunk
/// across `threads` workers and concatenates the results in range order.
pub fn sharded<T, F>(lo: u64, hi: u64, chunk: u64, threads: usize, f: F) -> Vec<T>
where
    T: Send,
    F: Fn(u64, u64) -> Vec<T> + Sync,
{
    if hi < lo {
        return Vec::new();
    }
    let chunk = chunk.max(1);
    let mut ranges = Vec::new();
    let mut start = lo;
    loop {
        let end = start.saturating_add(chunk - 1).min(hi);
        ranges.push((start, end));
        if end == hi {
            break;
        }
        start = end + 1;
    }
    let slots: Vec<Mutex<Option<Vec<T>>>> = ranges.iter().map(|_| Mutex::new(None)).collect();
    let next = AtomicUsize::new(0);
    let workers = threads.clamp(1, ranges.len());
    std::thread::scope(|s| {
        for _ in 0..workers {
            s.spawn(|| loop {
                let i = next.fetch_add(1, Ordering::Relaxed);
                let Some(&(a, b)) = ranges.get(i) else { break };
                let out = f(a, b);
                *slots[i].lock().expect("slot lock") = Some(out);
            });
        }
    });
    slots
        .into_iter()
        .flat_map(|m| m.into_inner().expect("slot lock").expect("every chunk ran"))
        .collect()
}
