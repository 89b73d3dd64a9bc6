#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include <json.hpp>

#include "egir/executor.hpp"
#include "egir/graph.hpp"
#include "egir/tensor.hpp"
#include "egir/time_util.hpp"

namespace egir {

/// One station's power history on the shared 15-minute grid. Timestamps
/// are implicit: sample i sits at start_epoch_s + i * kStepSeconds, so
/// strict monotone spacing holds by construction; ingestion validates
/// raw files before building one of these.
struct StationSeries {
    std::string station_id;
    double capacity_kw = 0.0;
    int64_t start_epoch_s = 0;
    std::vector<double> power_kw;
    std::vector<size_t> imputed; // indices forward-filled at ingestion

    int64_t timestamp(size_t i) const { return start_epoch_s + static_cast<int64_t>(i) * kStepSeconds; }
};

/// Windowed sample: X row i column j holds station i's power at t-j;
/// y holds the powers at t+h. `anchor` is the index t in the source grid.
struct Sample {
    Tensor x; // [n x k] float64, raw kW
    Tensor y; // [1 x n] float64, raw kW
    int64_t anchor = 0;
};

struct ForecastDataset {
    int64_t n_stations = 0;
    int64_t window_k = 0;
    int64_t horizon_h = 0;
    int64_t start_epoch_s = 0;
    std::vector<std::string> station_ids;
    std::vector<double> capacities_kw;
    std::vector<Sample> samples;

    int64_t size() const { return static_cast<int64_t>(samples.size()); }
};

/// Slides the forecasting window over aligned station series. Yields
/// max(0, T - (k-1) - h) samples; too-short input is an empty dataset,
/// misaligned grids are an error naming the first mismatch.
ForecastDataset window(const std::vector<StationSeries>& series, int64_t k, int64_t h);

struct SplitDatasets {
    ForecastDataset train, val, test;
};

/// Chronological split by sample order (no shuffling; forecasting data
/// leaks under random splits). Fractions must be positive and sum <= 1;
/// the test split takes the remainder.
SplitDatasets chronological_split(const ForecastDataset& dataset, double train_frac = 0.70,
                                  double val_frac = 0.15);

struct MetricResult {
    double accuracy_pct = 0.0; // (1 - rms((y - yhat)/Cap)) * 100, as printed
    double error_pct = 0.0;    // 100 - accuracy_pct
};

/// Capacity-normalized accuracy metric and its complement. N must be >= 1.
MetricResult metric_eq7(std::span<const double> y, std::span<const double> yhat, double cap_kw);

struct GenConfig {
    int64_t n_stations = 3;
    int64_t days = 150;
    std::vector<double> capacities_kw = {5.0, 8.0, 10.0};
    uint64_t seed = 42;
    /// Spatially correlated weather (one shared sky) vs fully independent
    /// per-station weather. On by default; the off position exists so
    /// tests can measure the correlation it induces.
    bool shared_weather = true;
    int64_t start_epoch_s = 1704067200; // 2024-01-01T00:00:00Z
};

/// Synthetic PV fleet: clear-sky diurnal bell x seasonal trend x AR(1)
/// weather factor, plus clipped sample noise. Night is exactly zero.
/// Deterministic per seed.
std::vector<StationSeries> generate_synthetic(const GenConfig& config);
std::vector<StationSeries> generate_synthetic(int64_t n_stations, int64_t days,
                                              const std::vector<double>& capacities_kw,
                                              uint64_t seed);

enum class GapPolicy { Reject, ForwardFill };

/// CSV with header "timestamp,<id>,...,<id>" plus a sidecar
/// "<path>.meta.json" carrying {station_id: {"capacity_kw": ...}}.
std::vector<StationSeries> ingest_csv(const std::string& path,
                                      GapPolicy policy = GapPolicy::Reject);
void write_csv(const std::vector<StationSeries>& series, const std::string& path);

struct StationEval {
    std::string station_id;
    double capacity_kw = 0.0;
    MetricResult metric;
};

struct EvalReport {
    std::vector<StationEval> stations;
    int64_t n_samples = 0;
    double inference_seconds = 0.0;
    double samples_per_sec = 0.0;
    uint64_t peak_rss_bytes = 0;
    ExecMode mode = ExecMode::Batched;
};

/// Runs the serialized model over every sample of `dataset`, denormalizes
/// predictions with the model's metadata stats, and scores each station.
/// Timing covers execute() calls only (the Tables' pure-inference
/// convention); feeds are prepared outside the clock.
EvalReport evaluate(const ModelGraph& model, const OperatorRegistry& registry,
                    const ForecastDataset& dataset, ExecMode mode, int64_t batch_chunk = 256);

nlohmann::json eval_report_json(const EvalReport& report);
std::string eval_report_table(const EvalReport& report);

} // namespace egir
