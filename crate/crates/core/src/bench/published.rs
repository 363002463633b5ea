//! Published results for three satellite scenes (urban and seaside
//! Worldview, Quickbird), kept as a fixture for the report formatters.
//!
//! These numbers cannot be recomputed here because the imagery is not
//! available; they are never used as metric ground truth.

use std::collections::BTreeMap;

use super::report::{best_per_metric, BenchmarkReport, MethodRow};
use crate::fusion::FusionMethod;
use crate::metrics::{AggregateMetrics, MetricReport};

const METHODS: [FusionMethod; 5] =
    [FusionMethod::Brovey, FusionMethod::Ihs, FusionMethod::AdaptiveIhs, FusionMethod::Pca, FusionMethod::DwtAtrous];

/// `[dataset][metric][method]`, metrics ordered CC, ERGAS, Quality, RASE, RMSE, SCC.
const VALUES: [(&str, [[f64; 5]; 6]); 3] = [
    (
        "Image-1:Worldview urban area image",
        [
            [0.8909, 0.8922, 0.8941, 0.8917, 0.9306],
            [4.1140, 7.1312, 7.0991, 8.3854, 6.0464],
            [0.8904, 0.8922, 0.8940, 0.7789, 0.9282],
            [28.5199, 28.5126, 28.4608, 33.5569, 24.1675],
            [26.4290, 26.4381, 26.3901, 31.1155, 22.4092],
            [0.9907, 0.9986, 0.9815, 0.9862, 0.9095],
        ],
    ),
    (
        "Image-2:Worldview seaside image",
        [
            [0.8286, 0.8288, 0.8759, 0.8283, 0.9393],
            [8.1074, 7.6741, 6.4912, 8.0171, 4.6738],
            [0.8277, 0.8288, 0.8758, 0.7213, 0.9387],
            [31.0202, 30.6398, 26.0137, 32.0135, 18.6590],
            [27.2404, 26.9064, 22.8440, 28.1128, 16.3854],
            [0.9963, 0.9988, 0.9170, 0.9877, 0.7236],
        ],
    ),
    (
        "Image-3:Qickbird image",
        [
            [0.7335, 0.7605, 0.8908, 0.8039, 0.9522],
            [5.0523, 5.1351, 3.4613, 5.0980, 2.3865],
            [0.7237, 0.7600, 0.8902, 0.7317, 0.9512],
            [22.6808, 20.3282, 13.6959, 19.5795, 9.4678],
            [13.9451, 12.4986, 8.4208, 12.0383, 5.8212],
            [0.9435, 0.9761, 0.7287, 0.8942, 0.6996],
        ],
    ),
];

/// The three published tables as aggregate-only benchmark reports.
pub fn published_results() -> Vec<BenchmarkReport> {
    VALUES
        .iter()
        .map(|(dataset, v)| {
            let rows: Vec<MethodRow> = METHODS
                .iter()
                .enumerate()
                .map(|(j, &method)| MethodRow {
                    name: method.id().to_string(),
                    method,
                    metrics: Some(MetricReport {
                        per_band: Vec::new(),
                        aggregate: AggregateMetrics {
                            cc: v[0][j],
                            ergas: v[1][j],
                            quality: v[2][j],
                            rase: v[3][j],
                            rmse: v[4][j],
                            scc: Some(v[5][j]),
                        },
                        ratio_h_over_l: 0.25,
                    }),
                    consistency: None,
                    synthesis: None,
                    diagnostics: None,
                    error: None,
                })
                .collect();
            BenchmarkReport {
                dataset: dataset.to_string(),
                ratio_h_over_l: 0.25,
                best_per_metric: best_per_metric(&rows),
                rows,
                runtimes: BTreeMap::new(),
            }
        })
        .collect()
}
