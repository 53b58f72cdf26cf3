//! Machine-readable run output: one [`RunRecord`] per trial plus a
//! [`Summary`] per experiment, as JSON lines or CSV.

use std::io::Write;

use poplab_core::{Graph, ProtocolParams};
use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct RunRecord {
    pub protocol: String,
    pub n: usize,
    pub m: usize,
    pub d: usize,
    pub seed: u64,
    pub tmax: u32,
    pub pmax: u32,
    pub emax: u32,
    pub steps_to_safe: Option<u64>,
    pub closure_ok: Option<bool>,
}

impl RunRecord {
    pub fn passed(&self) -> bool {
        self.closure_ok == Some(true)
    }
}

/// `m·n³·d·log₂n + n²·tmax`, the convergence-time shape that step counts
/// are divided by for ratio reporting.
pub fn reference_steps(graph: &Graph, params: &ProtocolParams) -> f64 {
    let (n, m, d) = (
        graph.node_count() as f64,
        graph.edge_count() as f64,
        graph.diameter() as f64,
    );
    m * n.powi(3) * d * n.log2() + n * n * f64::from(params.tmax)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Summary {
    /// Always `"summary"`; tells summary lines apart from trial records.
    pub record: String,
    pub protocol: String,
    pub graph: String,
    pub n: usize,
    pub m: usize,
    pub d: usize,
    pub trials: usize,
    pub converged: usize,
    pub closure_failures: usize,
    pub mean_steps: Option<f64>,
    pub median_steps: Option<f64>,
    pub reference: f64,
    /// `mean_steps / reference`.
    pub ratio: Option<f64>,
}

impl Summary {
    pub fn new(
        protocol: &str,
        graph_label: &str,
        graph: &Graph,
        params: &ProtocolParams,
        records: &[RunRecord],
    ) -> Self {
        let mut steps: Vec<u64> = records.iter().filter_map(|r| r.steps_to_safe).collect();
        steps.sort_unstable();
        let mean = (!steps.is_empty())
            .then(|| steps.iter().map(|&s| s as f64).sum::<f64>() / steps.len() as f64);
        let median = (!steps.is_empty()).then(|| {
            let mid = steps.len() / 2;
            if steps.len() % 2 == 1 {
                steps[mid] as f64
            } else {
                (steps[mid - 1] + steps[mid]) as f64 / 2.0
            }
        });
        let reference = reference_steps(graph, params);
        Summary {
            record: "summary".into(),
            protocol: protocol.into(),
            graph: graph_label.into(),
            n: graph.node_count(),
            m: graph.edge_count(),
            d: graph.diameter(),
            trials: records.len(),
            converged: steps.len(),
            closure_failures: records.iter().filter(|r| !r.passed()).count(),
            mean_steps: mean,
            median_steps: median,
            reference,
            ratio: mean.map(|x| x / reference),
        }
    }
}

pub fn write_json_line<W: Write, T: Serialize>(out: &mut W, value: &T) -> std::io::Result<()> {
    serde_json::to_writer(&mut *out, value)?;
    out.write_all(b"\n")
}

pub fn write_csv<W: Write>(out: W, records: &[RunRecord]) -> csv::Result<()> {
    let mut writer = csv::Writer::from_writer(out);
    for r in records {
        writer.serialize(r)?;
    }
    writer.flush()?;
    Ok(())
}

pub fn read_csv<R: std::io::Read>(input: R) -> csv::Result<Vec<RunRecord>> {
    csv::Reader::from_reader(input).deserialize().collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use poplab_core::GraphKind;

    fn record(seed: u64, steps: Option<u64>) -> RunRecord {
        RunRecord {
            protocol: "prank".into(),
            n: 4,
            m: 6,
            d: 1,
            seed,
            tmax: 128,
            pmax: 0,
            emax: 64,
            steps_to_safe: steps,
            closure_ok: steps.map(|_| true),
        }
    }

    #[test]
    fn csv_round_trip_keeps_missing_values() {
        let records = vec![record(1, Some(10)), record(2, None)];
        let mut buf = Vec::new();
        write_csv(&mut buf, &records).unwrap();
        let text = String::from_utf8(buf).unwrap();
        assert!(text.starts_with("protocol,n,m,d,seed,tmax,pmax,emax,steps_to_safe,closure_ok\n"));
        assert_eq!(read_csv(text.as_bytes()).unwrap(), records);
    }

    #[test]
    fn summary_statistics() {
        let g = Graph::generate(GraphKind::Complete, 4, None, 0).unwrap();
        let params = ProtocolParams::for_graph(&g, false);
        let records = [
            record(1, Some(10)),
            record(2, Some(30)),
            record(3, None),
            record(4, Some(20)),
            record(5, Some(40)),
        ];
        let s = Summary::new("prank", "complete:4", &g, &params, &records);
        assert_eq!((s.trials, s.converged, s.closure_failures), (5, 4, 1));
        assert_eq!((s.mean_steps, s.median_steps), (Some(25.0), Some(25.0)));
        // 6·64·1·2 + 16·128
        assert_eq!(s.reference, 768.0 + 2048.0);
        assert_eq!(s.ratio, Some(25.0 / 2816.0));
    }
}
