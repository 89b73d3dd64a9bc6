#include "egir/pipeline.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>

#include "egir/models.hpp"
#include "egir/rng.hpp"
#include "egir/sysinfo.hpp"

namespace egir {

ForecastDataset window(const std::vector<StationSeries>& series, int64_t k, int64_t h) {
    if (series.empty()) throw DataError("window: no station series");
    if (k < 1 || h < 1) throw DataError("window: k and h must be >= 1");

    const StationSeries& ref = series.front();
    for (size_t i = 1; i < series.size(); ++i) {
        const StationSeries& s = series[i];
        if (s.start_epoch_s != ref.start_epoch_s) {
            throw DataError("window: station '" + s.station_id + "' grid starts at " +
                            iso8601_format(s.start_epoch_s) + " but '" + ref.station_id +
                            "' starts at " + iso8601_format(ref.start_epoch_s));
        }
        if (s.power_kw.size() != ref.power_kw.size()) {
            throw DataError("window: station '" + s.station_id + "' has " +
                            std::to_string(s.power_kw.size()) + " samples but '" + ref.station_id +
                            "' has " + std::to_string(ref.power_kw.size()));
        }
    }

    const int64_t n = static_cast<int64_t>(series.size());
    const int64_t t_len = static_cast<int64_t>(ref.power_kw.size());

    ForecastDataset ds;
    ds.n_stations = n;
    ds.window_k = k;
    ds.horizon_h = h;
    ds.start_epoch_s = ref.start_epoch_s;
    for (const StationSeries& s : series) {
        ds.station_ids.push_back(s.station_id);
        ds.capacities_kw.push_back(s.capacity_kw);
    }

    const int64_t count = t_len - (k - 1) - h;
    if (count <= 0) return ds; // too short: empty dataset, not an error
    ds.samples.reserve(static_cast<size_t>(count));

    for (int64_t t = k - 1; t + h < t_len; ++t) {
        std::vector<double> x(static_cast<size_t>(n * k));
        std::vector<double> y(static_cast<size_t>(n));
        for (int64_t i = 0; i < n; ++i) {
            const auto& p = series[static_cast<size_t>(i)].power_kw;
            for (int64_t j = 0; j < k; ++j) {
                x[static_cast<size_t>(i * k + j)] = p[static_cast<size_t>(t - j)];
            }
            y[static_cast<size_t>(i)] = p[static_cast<size_t>(t + h)];
        }
        Sample sample;
        sample.x = Tensor::from_f64({n, k}, std::move(x));
        sample.y = Tensor::from_f64({1, n}, std::move(y));
        sample.anchor = t;
        ds.samples.push_back(std::move(sample));
    }
    return ds;
}

SplitDatasets chronological_split(const ForecastDataset& dataset, double train_frac,
                                  double val_frac) {
    if (train_frac <= 0.0 || val_frac < 0.0 || train_frac + val_frac > 1.0) {
        throw DataError("split fractions must satisfy 0 < train, 0 <= val, train+val <= 1");
    }
    auto clone_meta = [&]() {
        ForecastDataset d;
        d.n_stations = dataset.n_stations;
        d.window_k = dataset.window_k;
        d.horizon_h = dataset.horizon_h;
        d.start_epoch_s = dataset.start_epoch_s;
        d.station_ids = dataset.station_ids;
        d.capacities_kw = dataset.capacities_kw;
        return d;
    };
    SplitDatasets out{clone_meta(), clone_meta(), clone_meta()};
    const int64_t total = dataset.size();
    const int64_t n_train = static_cast<int64_t>(std::floor(static_cast<double>(total) * train_frac));
    const int64_t n_val = static_cast<int64_t>(std::floor(static_cast<double>(total) * val_frac));
    for (int64_t i = 0; i < total; ++i) {
        const Sample& s = dataset.samples[static_cast<size_t>(i)];
        if (i < n_train) {
            out.train.samples.push_back(s);
        } else if (i < n_train + n_val) {
            out.val.samples.push_back(s);
        } else {
            out.test.samples.push_back(s);
        }
    }
    return out;
}

MetricResult metric_eq7(std::span<const double> y, std::span<const double> yhat, double cap_kw) {
    if (y.size() != yhat.size()) {
        throw DataError("metric: y and yhat lengths differ (" + std::to_string(y.size()) + " vs " +
                        std::to_string(yhat.size()) + ")");
    }
    if (y.empty()) throw DataError("metric undefined for zero test samples");
    if (!(cap_kw > 0.0)) throw DataError("metric requires capacity > 0");

    double acc = 0.0;
    for (size_t i = 0; i < y.size(); ++i) {
        double r = (y[i] - yhat[i]) / cap_kw;
        acc += r * r;
    }
    double rms = std::sqrt(acc / static_cast<double>(y.size()));
    MetricResult m;
    m.accuracy_pct = (1.0 - rms) * 100.0;
    m.error_pct = 100.0 - m.accuracy_pct;
    return m;
}

// --- synthetic generator ---------------------------------------------------

namespace {

// Weather latent -> multiplicative sky factor in [0.15, 1].
double sky_factor(double w) {
    double s = 1.0 / (1.0 + std::exp(-(1.6 + 1.3 * w)));
    return 0.15 + 0.85 * s;
}

// Clear-sky elevation proxy for hour-of-day given a seasonal day length.
double diurnal_bell(double hour, double day_length) {
    double sunrise = 12.0 - day_length / 2.0;
    if (hour <= sunrise || hour >= sunrise + day_length) return 0.0;
    double e = std::sin(M_PI * (hour - sunrise) / day_length);
    return std::pow(e, 1.15);
}

} // namespace

std::vector<StationSeries> generate_synthetic(const GenConfig& config) {
    if (config.days < 2) throw DataError("generator needs at least 2 days");
    if (config.n_stations < 1) throw DataError("generator needs at least 1 station");
    if (static_cast<int64_t>(config.capacities_kw.size()) != config.n_stations) {
        throw DataError("generator: " + std::to_string(config.capacities_kw.size()) +
                        " capacities for " + std::to_string(config.n_stations) + " stations");
    }
    for (double c : config.capacities_kw) {
        if (!(c > 0.0)) throw DataError("generator: capacities must be > 0");
    }

    const int64_t n = config.n_stations;
    const int64_t steps = config.days * 96;
    std::mt19937_64 rng(config.seed);

    std::vector<StationSeries> out(static_cast<size_t>(n));
    for (int64_t i = 0; i < n; ++i) {
        StationSeries& s = out[static_cast<size_t>(i)];
        s.station_id = "station_" + std::to_string(i + 1);
        s.capacity_kw = config.capacities_kw[static_cast<size_t>(i)];
        s.start_epoch_s = config.start_epoch_s;
        s.power_kw.resize(static_cast<size_t>(steps), 0.0);
    }

    // AR(1) latents: one shared sky plus a small per-station component
    // when shared_weather is on; fully independent skies otherwise.
    const double rho = 0.997;
    const double innovation = 0.8 * std::sqrt(1.0 - rho * rho);
    double shared = 0.0;
    std::vector<double> station_latent(static_cast<size_t>(n), 0.0);

    for (int64_t t = 0; t < steps; ++t) {
        shared = rho * shared + innovation * normal_unit(rng);
        for (int64_t i = 0; i < n; ++i) {
            station_latent[static_cast<size_t>(i)] =
                rho * station_latent[static_cast<size_t>(i)] + innovation * normal_unit(rng);
        }

        const int64_t day = t / 96;
        const double hour = static_cast<double>(t % 96) / 4.0;
        const double phase = 2.0 * M_PI * (static_cast<double>(day) - 80.0) / 365.25;
        const double day_length = 12.0 + 2.5 * std::sin(phase);
        const double seasonal = 1.0 + 0.22 * std::sin(phase);
        const double bell = diurnal_bell(hour, day_length);

        for (int64_t i = 0; i < n; ++i) {
            double noise = 1.0 + 0.02 * normal_unit(rng);
            if (bell <= 0.0) continue; // night: exactly zero
            double latent = config.shared_weather
                                ? shared + 0.30 * station_latent[static_cast<size_t>(i)]
                                : station_latent[static_cast<size_t>(i)];
            double cap = config.capacities_kw[static_cast<size_t>(i)];
            double p = cap * seasonal * bell * sky_factor(latent) * noise;
            out[static_cast<size_t>(i)].power_kw[static_cast<size_t>(t)] =
                std::clamp(p, 0.0, cap);
        }
    }
    return out;
}

std::vector<StationSeries> generate_synthetic(int64_t n_stations, int64_t days,
                                              const std::vector<double>& capacities_kw,
                                              uint64_t seed) {
    GenConfig c;
    c.n_stations = n_stations;
    c.days = days;
    c.capacities_kw = capacities_kw;
    c.seed = seed;
    return generate_synthetic(c);
}

// --- CSV ingestion ---------------------------------------------------------

namespace {

std::vector<std::string> split_csv_line(const std::string& line) {
    std::vector<std::string> fields;
    std::string cur;
    for (char c : line) {
        if (c == ',') {
            fields.push_back(cur);
            cur.clear();
        } else if (c != '\r') {
            cur.push_back(c);
        }
    }
    fields.push_back(cur);
    return fields;
}

std::map<std::string, double> read_capacity_sidecar(const std::string& csv_path) {
    const std::string meta_path = csv_path + ".meta.json";
    std::ifstream f(meta_path);
    if (!f) throw DataError("missing dataset metadata '" + meta_path + "'");
    nlohmann::json j;
    try {
        f >> j;
        std::map<std::string, double> caps;
        for (const auto& [id, entry] : j.items()) {
            caps[id] = entry.at("capacity_kw").get<double>();
        }
        return caps;
    } catch (const nlohmann::json::exception& e) {
        throw DataError("malformed dataset metadata '" + meta_path + "': " + e.what());
    }
}

} // namespace

std::vector<StationSeries> ingest_csv(const std::string& path, GapPolicy policy) {
    std::ifstream f(path);
    if (!f) throw DataError("cannot open dataset '" + path + "'");

    std::string line;
    if (!std::getline(f, line)) throw DataError("dataset '" + path + "' is empty");
    std::vector<std::string> header = split_csv_line(line);
    if (header.size() < 2 || header[0] != "timestamp") {
        throw DataError("dataset header must be 'timestamp,<station>,...', got '" + line + "'");
    }
    const size_t n = header.size() - 1;

    std::map<std::string, double> caps = read_capacity_sidecar(path);
    std::vector<StationSeries> series(n);
    for (size_t i = 0; i < n; ++i) {
        const std::string& id = header[i + 1];
        auto it = caps.find(id);
        if (it == caps.end()) {
            throw DataError("metadata lacks capacity for station '" + id + "'");
        }
        series[i].station_id = id;
        series[i].capacity_kw = it->second;
        if (!(series[i].capacity_kw > 0.0)) {
            throw DataError("station '" + id + "' capacity must be > 0");
        }
    }

    int64_t prev_ts = 0;
    bool first = true;
    size_t row = 1;
    while (std::getline(f, line)) {
        ++row;
        if (line.empty()) continue;
        std::vector<std::string> fields = split_csv_line(line);
        if (fields.size() != n + 1) {
            throw DataError("row " + std::to_string(row) + " has " + std::to_string(fields.size()) +
                            " fields, expected " + std::to_string(n + 1));
        }
        int64_t ts = iso8601_parse(fields[0]);
        if (first) {
            for (auto& s : series) s.start_epoch_s = ts;
        } else {
            int64_t delta = ts - prev_ts;
            if (delta <= 0) {
                throw DataError("row " + std::to_string(row) +
                                ": timestamps not strictly increasing at " + fields[0]);
            }
            if (delta % kStepSeconds != 0) {
                throw DataError("row " + std::to_string(row) + ": timestamp " + fields[0] +
                                " is off the 15-minute grid");
            }
            if (delta > kStepSeconds) {
                int64_t missing = delta / kStepSeconds - 1;
                if (policy == GapPolicy::Reject) {
                    throw DataError("row " + std::to_string(row) + ": gap of " +
                                    std::to_string(missing) + " step(s) before " + fields[0] +
                                    " (use forward-fill to impute)");
                }
                for (int64_t g = 0; g < missing; ++g) {
                    for (auto& s : series) {
                        s.imputed.push_back(s.power_kw.size());
                        s.power_kw.push_back(s.power_kw.back());
                    }
                }
            }
        }

        for (size_t i = 0; i < n; ++i) {
            double v;
            try {
                size_t pos = 0;
                v = std::stod(fields[i + 1], &pos);
                if (pos != fields[i + 1].size()) throw std::invalid_argument(fields[i + 1]);
            } catch (const std::exception&) {
                throw DataError("row " + std::to_string(row) + ": unparseable power '" +
                                fields[i + 1] + "' for station '" + series[i].station_id + "'");
            }
            if (v < 0.0) {
                throw DataError("row " + std::to_string(row) + ": negative power for station '" +
                                series[i].station_id + "' at " + fields[0]);
            }
            if (v > series[i].capacity_kw * 1.05) {
                throw DataError("station '" + series[i].station_id + "' power " + std::to_string(v) +
                                " kW exceeds capacity " + std::to_string(series[i].capacity_kw) +
                                " kW (5% tolerance) at " + fields[0]);
            }
            series[i].power_kw.push_back(v);
        }
        prev_ts = ts;
        first = false;
    }
    if (first) throw DataError("dataset '" + path + "' has no data rows");
    return series;
}

void write_csv(const std::vector<StationSeries>& series, const std::string& path) {
    if (series.empty()) throw DataError("write_csv: no series");
    const size_t len = series.front().power_kw.size();
    for (const auto& s : series) {
        if (s.power_kw.size() != len || s.start_epoch_s != series.front().start_epoch_s) {
            throw DataError("write_csv: series are not aligned");
        }
    }

    std::ofstream f(path, std::ios::trunc);
    if (!f) throw DataError("cannot open '" + path + "' for writing");
    f << "timestamp";
    for (const auto& s : series) f << ',' << s.station_id;
    f << '\n';
    char buf[40];
    for (size_t t = 0; t < len; ++t) {
        f << iso8601_format(series.front().timestamp(t));
        for (const auto& s : series) {
            std::snprintf(buf, sizeof buf, "%.6f", s.power_kw[t]);
            f << ',' << buf;
        }
        f << '\n';
    }
    if (!f) throw DataError("short write to '" + path + "'");

    nlohmann::json meta;
    for (const auto& s : series) {
        meta[s.station_id]["capacity_kw"] = s.capacity_kw;
    }
    std::ofstream mf(path + ".meta.json", std::ios::trunc);
    if (!mf) throw DataError("cannot open '" + path + ".meta.json' for writing");
    mf << meta.dump(2) << '\n';
}

// --- evaluation --------------------------------------------------------------

EvalReport evaluate(const ModelGraph& model, const OperatorRegistry& registry,
                    const ForecastDataset& dataset, ExecMode mode, int64_t batch_chunk) {
    if (dataset.size() == 0) throw DataError("evaluate: empty dataset");
    if (batch_chunk < 1) throw DataError("evaluate: batch_chunk must be >= 1");

    auto meta_int = [&](const std::string& key) {
        auto it = model.metadata.find(key);
        if (it == model.metadata.end()) throw DataError("model metadata lacks '" + key + "'");
        return static_cast<int64_t>(std::stoll(it->second));
    };
    const int64_t n = meta_int("n_stations");
    const int64_t k = meta_int("k");
    if (n != dataset.n_stations) {
        throw DataError("model expects " + std::to_string(n) + " stations, dataset has " +
                        std::to_string(dataset.n_stations));
    }
    if (k != dataset.window_k) {
        throw DataError("model expects window k=" + std::to_string(k) + ", dataset built with k=" +
                        std::to_string(dataset.window_k));
    }
    NormStats norm = norm_from_metadata(model.metadata, n);
    std::vector<double> caps = capacities_from_metadata(model.metadata, n);
    if (caps.empty()) caps = dataset.capacities_kw;

    const int64_t total = dataset.size();
    std::vector<std::vector<double>> truth(static_cast<size_t>(n)), pred(static_cast<size_t>(n));

    PeakRssSampler rss;
    double seconds = 0.0;

    for (int64_t begin = 0; begin < total; begin += batch_chunk) {
        const int64_t b = std::min<int64_t>(batch_chunk, total - begin);
        std::vector<float> xbatch(static_cast<size_t>(b * n * k));
        for (int64_t s = 0; s < b; ++s) {
            auto x = dataset.samples[static_cast<size_t>(begin + s)].x.f64();
            for (int64_t i = 0; i < n; ++i) {
                const double mean = norm.mean[static_cast<size_t>(i)];
                const double scale = norm.scale[static_cast<size_t>(i)];
                for (int64_t j = 0; j < k; ++j) {
                    xbatch[static_cast<size_t>(s * n * k + i * k + j)] =
                        static_cast<float>((x[static_cast<size_t>(i * k + j)] - mean) / scale);
                }
            }
        }
        std::map<std::string, Tensor> feeds;
        feeds.emplace(model.inputs.front().name,
                      Tensor::from_f32({b, n, k}, std::move(xbatch)));

        auto t0 = std::chrono::steady_clock::now();
        std::map<std::string, Tensor> outs = execute(model, registry, feeds, mode);
        auto t1 = std::chrono::steady_clock::now();
        seconds += std::chrono::duration<double>(t1 - t0).count();

        const Tensor& yhat = outs.at(model.outputs.front());
        auto data = yhat.f32();
        for (int64_t s = 0; s < b; ++s) {
            auto y = dataset.samples[static_cast<size_t>(begin + s)].y.f64();
            for (int64_t i = 0; i < n; ++i) {
                double norm_pred = static_cast<double>(data[static_cast<size_t>(s * n + i)]);
                double kw = norm_pred * norm.scale[static_cast<size_t>(i)] +
                            norm.mean[static_cast<size_t>(i)];
                pred[static_cast<size_t>(i)].push_back(kw);
                truth[static_cast<size_t>(i)].push_back(y[static_cast<size_t>(i)]);
            }
        }
    }

    EvalReport report;
    report.mode = mode;
    report.n_samples = total;
    report.inference_seconds = seconds;
    report.samples_per_sec = seconds > 0.0 ? static_cast<double>(total) / seconds : 0.0;
    for (int64_t i = 0; i < n; ++i) {
        StationEval se;
        se.station_id = dataset.station_ids[static_cast<size_t>(i)];
        se.capacity_kw = caps[static_cast<size_t>(i)];
        se.metric = metric_eq7(truth[static_cast<size_t>(i)], pred[static_cast<size_t>(i)],
                               caps[static_cast<size_t>(i)]);
        report.stations.push_back(std::move(se));
    }
    report.peak_rss_bytes = rss.peak();
    return report;
}

nlohmann::json eval_report_json(const EvalReport& report) {
    nlohmann::json j;
    j["n_samples"] = report.n_samples;
    j["inference_seconds"] = report.inference_seconds;
    j["samples_per_sec"] = report.samples_per_sec;
    j["peak_rss_bytes"] = report.peak_rss_bytes;
    j["mode"] = exec_mode_name(report.mode);
    j["stations"] = nlohmann::json::array();
    for (const StationEval& s : report.stations) {
        nlohmann::json e;
        e["station_id"] = s.station_id;
        e["capacity_kw"] = s.capacity_kw;
        e["accuracy_pct"] = s.metric.accuracy_pct;
        e["error_pct"] = s.metric.error_pct;
        j["stations"].push_back(std::move(e));
    }
    return j;
}

std::string eval_report_table(const EvalReport& report) {
    // Mirrors the benchmark tables; the MAPE column prints error_pct
    // (accuracy's complement), accuracy is in the JSON report.
    std::ostringstream os;
    char buf[64];
    os << "PV ID        Data Length  Time (sec)   MAPE\n";
    for (size_t i = 0; i < report.stations.size(); ++i) {
        const StationEval& s = report.stations[i];
        std::snprintf(buf, sizeof buf, "%-12s %-12lld %-12.3f %.2f%%\n", s.station_id.c_str(),
                      static_cast<long long>(report.n_samples), report.inference_seconds,
                      s.metric.error_pct);
        os << buf;
    }
    std::snprintf(buf, sizeof buf, "(%.0f samples/sec, %s mode, peak rss %.1f MB)\n",
                  report.samples_per_sec, exec_mode_name(report.mode),
                  static_cast<double>(report.peak_rss_bytes) / (1024.0 * 1024.0));
    os << buf;
    return os.str();
}

} // namespace egir
