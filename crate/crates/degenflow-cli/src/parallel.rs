//! Scoped fan-out for independent scenario sub-jobs, capped by the
//! `DEGENFLOW_THREADS` environment variable (defaults to the available
//! parallelism). Results come back in submission order, so scheduling
//! never affects output bytes.

use std::thread;

pub fn thread_cap() -> usize {
    std::env::var("DEGENFLOW_THREADS")
        .ok()
        .and_then(|v| v.parse::<usize>().ok())
        .filter(|&n| n >= 1)
        .unwrap_or_else(|| {
            thread::available_parallelism()
                .map(|n| n.get())
                .unwrap_or(1)
        })
}

pub fn run_jobs<T, F>(jobs: Vec<F>) -> Vec<T>
where
    T: Send,
    F: FnOnce() -> T + Send,
{
    let cap = thread_cap().max(1);
    let mut results: Vec<Option<T>> = Vec::new();
    for _ in 0..jobs.len() {
        results.push(None);
    }
    let mut remaining: Vec<(usize, F)> = jobs.into_iter().enumerate().collect();
    while !remaining.is_empty() {
        let batch: Vec<(usize, F)> = remaining.drain(..remaining.len().min(cap)).collect();
        let mut outcomes: Vec<(usize, T)> = Vec::with_capacity(batch.len());
        thread::scope(|scope| {
            let handles: Vec<_> = batch
                .into_iter()
                .map(|(idx, job)| scope.spawn(move || (idx, job())))
                .collect();
            for handle in handles {
                outcomes.push(handle.join().expect("scenario job panicked"));
            }
        });
        for (idx, value) in outcomes {
            results[idx] = Some(value);
        }
    }
    results.into_iter().map(|r| r.unwrap()).collect()
}
