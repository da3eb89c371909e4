use std::sync::atomic::{AtomicUsize, Ordering};
use std::sync::Mutex;

use crate::client::{Gateway, Transcription};
use crate::GatewayError;

/// Pages of one sample to transcribe.
#[derive(Debug, Clone)]
pub struct TranscriptionJob {
    pub sample_id: String,
    pub images: Vec<Vec<u8>>,
}

/// Transcribes every job `repeats` times using at most `parallelism`
/// concurrent requests. Results come back ordered by `(sample_id, run_index)`
/// whatever the completion order.
pub fn run_repeats(
    gateway: &Gateway,
    jobs: &[TranscriptionJob],
    repeats: u32,
    parallelism: usize,
) -> Vec<(String, u32, Result<Transcription, GatewayError>)> {
    let tasks: Vec<(usize, u32)> = (0..jobs.len())
        .flat_map(|j| (0..repeats).map(move |r| (j, r)))
        .collect();
    let results: Mutex<Vec<Option<Result<Transcription, GatewayError>>>> =
        Mutex::new((0..tasks.len()).map(|_| None).collect());
    let next = AtomicUsize::new(0);
    let workers = parallelism.clamp(1, tasks.len().max(1));
    std::thread::scope(|scope| {
        for _ in 0..workers {
            scope.spawn(|| loop {
                let i = next.fetch_add(1, Ordering::SeqCst);
                let Some(&(j, run)) = tasks.get(i) else { break };
                let job = &jobs[j];
                let out = gateway.transcribe_images(&job.sample_id, run, &job.images);
                results.lock().unwrap()[i] = Some(out);
            });
        }
    });
    let mut out: Vec<_> = tasks
        .into_iter()
        .zip(results.into_inner().unwrap())
        .map(|((j, run), r)| (jobs[j].sample_id.clone(), run, r.expect("every task ran")))
        .collect();
    out.sort_by(|a, b| (&a.0, a.1).cmp(&(&b.0, b.1)));
    out
}
