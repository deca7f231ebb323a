/// True iff the last `window` entries never fall below `factor` times the
/// first of them, i.e. no sufficient decrease over the window.
pub fn detect_stagnation(history: &[f64], window: usize, factor: f64) -> bool {
    if window < 2 || history.len() < window {
        return false;
    }
    let tail = &history[history.len() - window..];
    let min = tail.iter().copied().fold(f64::INFINITY, f64::min);
    min > factor * tail[0]
}
