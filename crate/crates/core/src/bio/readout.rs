/// All-or-none pulse train: `amplitude` at every sample where the trace
/// crosses `threshold` upward (previous sample below, current at or above),
/// zero elsewhere.
pub fn all_or_none_readout(trace: &[f64], threshold: f64, amplitude: f64) -> Vec<f64> {
    let mut out = vec![0.0; trace.len()];
    for k in 1..trace.len() {
        if trace[k - 1] < threshold && trace[k] >= threshold {
            out[k] = amplitude;
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn no_crossing_no_pulse() {
        let out = all_or_none_readout(&[-70.0, -60.0, -65.0, -1.0], 0.0, 1.0);
        assert!(out.iter().all(|&v| v == 0.0));
    }

    #[test]
    fn two_upward_crossings_two_pulses() {
        let trace = [-70.0, 10.0, 30.0, -5.0, -80.0, 5.0, -2.0];
        let out = all_or_none_readout(&trace, 0.0, 2.5);
        assert_eq!(out, vec![0.0, 2.5, 0.0, 0.0, 0.0, 2.5, 0.0]);
    }

    #[test]
    fn output_is_two_valued() {
        let trace: Vec<f64> = (0..500).map(|k| (k as f64 * 0.37).sin() * 3.0).collect();
        let out = all_or_none_readout(&trace, 0.5, 7.0);
        assert!(out.iter().all(|&v| v == 0.0 || v == 7.0));
    }
}
