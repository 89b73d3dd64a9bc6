#include "egir/models.hpp"

#include <cstdio>
#include <fstream>

#include <json.hpp>

namespace egir {

namespace {

std::string fmt_double(double v) {
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

double parse_double(const std::string& s, const std::string& key) {
    try {
        size_t pos = 0;
        double v = std::stod(s, &pos);
        if (pos != s.size()) throw std::invalid_argument(s);
        return v;
    } catch (const std::exception&) {
        throw Error("metadata key '" + key + "' is not a number: '" + s + "'");
    }
}

} // namespace

const char* arch_name(ArchKind kind) {
    return kind == ArchKind::Gcn2 ? "gcn2" : "sage2";
}

ArchKind arch_from_name(const std::string& name) {
    if (name == "gcn2") return ArchKind::Gcn2;
    if (name == "sage2") return ArchKind::Sage2;
    throw Error("unknown architecture '" + name + "' (expected gcn2|sage2)");
}

ArchSpec ArchSpec::make(ArchKind kind, int64_t n, int64_t k, int64_t h, int64_t d,
                        GraphTopology topology) {
    if (n < 1 || k < 1 || h < 1 || d < 1) {
        throw Error("architecture dimensions must all be >= 1");
    }
    if (topology.n_nodes != n) {
        throw Error("topology has " + std::to_string(topology.n_nodes) + " nodes, expected " +
                    std::to_string(n));
    }
    ArchSpec s;
    s.kind = kind;
    s.n_stations = n;
    s.input_window = k;
    s.horizon = h;
    s.hidden_dim = d;
    s.topology = std::move(topology);
    return s;
}

void check_params(const ArchSpec& spec, const ModelParams& params) {
    const int64_t n = spec.n_stations, k = spec.input_window, d = spec.hidden_dim;
    const int64_t in1 = spec.kind == ArchKind::Gcn2 ? k : 2 * k;
    const int64_t in2 = spec.kind == ArchKind::Gcn2 ? d : 2 * d;
    auto expect = [&](const Tensor& t, int64_t r, int64_t c, const char* name) {
        if (t.rank() != 2 || t.rows() != r || t.cols() != c) {
            throw ShapeError(std::string("parameter ") + name + " has shape " + t.shape_str() +
                             ", expected [" + std::to_string(r) + "x" + std::to_string(c) + "]");
        }
    };
    expect(params.w1, in1, d, "w1");
    expect(params.w2, in2, d, "w2");
    expect(params.wm, n * d, n, "wm");
    expect(params.bm, 1, n, "bm");
}

const std::vector<std::pair<std::string, Tensor ModelParams::*>>& param_fields() {
    static const std::vector<std::pair<std::string, Tensor ModelParams::*>> fields = {
        {"w1", &ModelParams::w1},
        {"w2", &ModelParams::w2},
        {"wm", &ModelParams::wm},
        {"bm", &ModelParams::bm},
    };
    return fields;
}

namespace {

void put_common_metadata(ModelGraph& g, const ArchSpec& spec) {
    g.metadata["arch"] = arch_name(spec.kind);
    g.metadata["n_stations"] = std::to_string(spec.n_stations);
    g.metadata["k"] = std::to_string(spec.input_window);
    g.metadata["h"] = std::to_string(spec.horizon);
    g.metadata["hidden_dim"] = std::to_string(spec.hidden_dim);
    g.metadata["hidden_activation"] = "relu";
}

ModelGraph head_and_output(ModelGraph g, const ArchSpec& spec, const ModelParams& params,
                           const std::string& last_hidden) {
    g.initializers.emplace("wm", params.wm.to(Dtype::F32));
    g.initializers.emplace("bm", params.bm.to(Dtype::F32));
    g.nodes.push_back({"Flatten", {last_hidden}, {"embedding"}, {{"axis", int64_t{0}}}});
    g.nodes.push_back({"MatMul", {"embedding", "wm"}, {"mlp"}, {}});
    g.nodes.push_back({"AddBias", {"mlp", "bm"}, {"y"}, {}});
    g.outputs = {"y"};
    put_common_metadata(g, spec);
    return g;
}

} // namespace

ModelGraph build_gcn2(const ArchSpec& spec, const ModelParams& params) {
    if (spec.kind != ArchKind::Gcn2) throw Error("build_gcn2 called with non-GCN2 spec");
    check_params(spec, params);

    ModelGraph g;
    g.inputs.push_back({"x", {spec.n_stations, spec.input_window}, true, Dtype::F32});
    // A_hat is constant per deployment; baked as an initializer so the
    // runtime kernel is two matmuls and an activation.
    g.initializers.emplace("a_hat", spec.topology.a_hat.to(Dtype::F32));
    g.initializers.emplace("w1", params.w1.to(Dtype::F32));
    g.initializers.emplace("w2", params.w2.to(Dtype::F32));
    g.nodes.push_back({kGcnOpType, {"x", "a_hat", "w1"}, {"gcn1"}, {{"activation", std::string("relu")}}});
    g.nodes.push_back({kGcnOpType, {"gcn1", "a_hat", "w2"}, {"gcn2"}, {{"activation", std::string("relu")}}});
    g = head_and_output(std::move(g), spec, params, "gcn2");
    require_valid(g, "build_gcn2");
    return g;
}

ModelGraph build_sage2(const ArchSpec& spec, const ModelParams& params) {
    if (spec.kind != ArchKind::Sage2) throw Error("build_sage2 called with non-SAGE2 spec");
    check_params(spec, params);
    for (int64_t v = 0; v < spec.topology.neighbors.n_nodes(); ++v) {
        if (spec.topology.neighbors.lists[static_cast<size_t>(v)].empty()) {
            throw AggregationError("node " + std::to_string(v) +
                                   " is isolated; mean aggregation is undefined");
        }
    }

    AttrMap sage_attrs = {
        {"activation", std::string("relu")},
        {"neighbor_offsets", spec.topology.neighbors.csr_offsets()},
        {"neighbor_indices", spec.topology.neighbors.csr_indices()},
    };

    ModelGraph g;
    g.inputs.push_back({"x", {spec.n_stations, spec.input_window}, true, Dtype::F32});
    g.initializers.emplace("w1", params.w1.to(Dtype::F32));
    g.initializers.emplace("w2", params.w2.to(Dtype::F32));
    g.nodes.push_back({kSageOpType, {"x", "w1"}, {"sage1"}, sage_attrs});
    g.nodes.push_back({kSageOpType, {"sage1", "w2"}, {"sage2"}, sage_attrs});
    g = head_and_output(std::move(g), spec, params, "sage2");
    require_valid(g, "build_sage2");
    return g;
}

ModelGraph to_model_graph(const TrainedModel& model) {
    ModelGraph g = model.spec.kind == ArchKind::Gcn2 ? build_gcn2(model.spec, model.params)
                                                     : build_sage2(model.spec, model.params);
    const int64_t n = model.spec.n_stations;
    if (static_cast<int64_t>(model.norm.mean.size()) == n) {
        for (int64_t i = 0; i < n; ++i) {
            g.metadata["norm_mean_" + std::to_string(i)] = fmt_double(model.norm.mean[static_cast<size_t>(i)]);
            g.metadata["norm_scale_" + std::to_string(i)] = fmt_double(model.norm.scale[static_cast<size_t>(i)]);
        }
    }
    if (static_cast<int64_t>(model.capacities_kw.size()) == n) {
        for (int64_t i = 0; i < n; ++i) {
            g.metadata["capacity_" + std::to_string(i)] = fmt_double(model.capacities_kw[static_cast<size_t>(i)]);
        }
    }
    for (const auto& [key, value] : model.provenance) {
        g.metadata[key] = value;
    }
    return g;
}

NormStats norm_from_metadata(const std::map<std::string, std::string>& metadata, int64_t n) {
    NormStats s;
    for (int64_t i = 0; i < n; ++i) {
        auto mi = metadata.find("norm_mean_" + std::to_string(i));
        auto si = metadata.find("norm_scale_" + std::to_string(i));
        if (mi == metadata.end() || si == metadata.end()) {
            throw DataError("model metadata lacks normalization stats for station " + std::to_string(i));
        }
        s.mean.push_back(parse_double(mi->second, mi->first));
        s.scale.push_back(parse_double(si->second, si->first));
        if (s.scale.back() <= 0.0) {
            throw DataError("norm_scale_" + std::to_string(i) + " must be > 0");
        }
    }
    return s;
}

std::vector<double> capacities_from_metadata(const std::map<std::string, std::string>& metadata,
                                             int64_t n) {
    std::vector<double> caps;
    for (int64_t i = 0; i < n; ++i) {
        auto it = metadata.find("capacity_" + std::to_string(i));
        if (it == metadata.end()) return {};
        caps.push_back(parse_double(it->second, it->first));
    }
    return caps;
}

namespace {

nlohmann::json tensor_to_json(const Tensor& t) {
    nlohmann::json j;
    j["dims"] = t.shape();
    std::vector<double> data(t.f64().begin(), t.f64().end());
    j["data"] = std::move(data);
    return j;
}

Tensor tensor_from_json(const nlohmann::json& j) {
    return Tensor::from_f64(j.at("dims").get<std::vector<int64_t>>(),
                            j.at("data").get<std::vector<double>>());
}

} // namespace

void save_checkpoint(const TrainedModel& model, const std::string& path) {
    check_params(model.spec, model.params);
    nlohmann::json j;
    j["format"] = "egir-checkpoint";
    j["version"] = 1;
    j["arch"] = arch_name(model.spec.kind);
    j["n_stations"] = model.spec.n_stations;
    j["k"] = model.spec.input_window;
    j["h"] = model.spec.horizon;
    j["hidden_dim"] = model.spec.hidden_dim;

    const Tensor& a = model.spec.topology.adjacency;
    std::vector<std::vector<double>> adj(static_cast<size_t>(a.rows()));
    for (int64_t i = 0; i < a.rows(); ++i)
        for (int64_t c = 0; c < a.cols(); ++c) adj[static_cast<size_t>(i)].push_back(a.at(i, c));
    j["adjacency"] = adj;

    for (const auto& [name, field] : param_fields()) {
        j["params"][name] = tensor_to_json(model.params.*field);
    }
    j["norm"]["mean"] = model.norm.mean;
    j["norm"]["scale"] = model.norm.scale;
    j["capacities_kw"] = model.capacities_kw;
    j["provenance"] = model.provenance;

    std::ofstream f(path, std::ios::trunc);
    if (!f) throw FormatError(FormatError::Code::Io, "cannot open '" + path + "' for writing");
    f << j.dump(2) << '\n';
    if (!f) throw FormatError(FormatError::Code::Io, "short write to '" + path + "'");
}

TrainedModel load_checkpoint(const std::string& path) {
    std::ifstream f(path);
    if (!f) throw FormatError(FormatError::Code::Io, "cannot open '" + path + "'");
    nlohmann::json j;
    try {
        f >> j;
        if (j.at("format") != "egir-checkpoint" || j.at("version") != 1) {
            throw FormatError(FormatError::Code::BadManifest, "'" + path + "' is not an egir checkpoint");
        }

        Tensor adjacency = Tensor::from_rows(j.at("adjacency").get<std::vector<std::vector<double>>>());
        TrainedModel model;
        model.spec = ArchSpec::make(arch_from_name(j.at("arch").get<std::string>()),
                                    j.at("n_stations").get<int64_t>(), j.at("k").get<int64_t>(),
                                    j.at("h").get<int64_t>(), j.at("hidden_dim").get<int64_t>(),
                                    GraphTopology::from_adjacency(adjacency));
        for (const auto& [name, field] : param_fields()) {
            model.params.*field = tensor_from_json(j.at("params").at(name));
        }
        model.norm.mean = j.at("norm").at("mean").get<std::vector<double>>();
        model.norm.scale = j.at("norm").at("scale").get<std::vector<double>>();
        model.capacities_kw = j.at("capacities_kw").get<std::vector<double>>();
        model.provenance = j.at("provenance").get<std::map<std::string, std::string>>();
        check_params(model.spec, model.params);
        return model;
    } catch (const nlohmann::json::exception& e) {
        throw FormatError(FormatError::Code::BadManifest,
                          "malformed checkpoint '" + path + "': " + e.what());
    }
}

} // namespace egir
