#include "egir/executor.hpp"

#include <algorithm>
#include <set>
#include <sstream>
#include <unordered_map>

namespace egir {

const char* exec_mode_name(ExecMode mode) {
    return mode == ExecMode::Batched ? "batched" : "serialized";
}

std::vector<std::string> missing_operators(const ModelGraph& model,
                                           const OperatorRegistry& registry) {
    std::set<std::string> missing;
    for (const GraphNode& node : model.nodes) {
        if (!registry.contains(node.op_type)) missing.insert(node.op_type);
    }
    return {missing.begin(), missing.end()};
}

namespace {

struct Value {
    Tensor tensor;
    bool batched = false;
};

// Slice b of a tensor whose leading dimension is the batch axis.
Tensor slice_batch(const Tensor& t, int64_t b) {
    const auto& dims = t.shape();
    std::vector<int64_t> sample_dims(dims.begin() + 1, dims.end());
    int64_t stride = shape_numel(sample_dims);
    if (t.dtype() == Dtype::F32) {
        auto src = t.f32();
        std::vector<float> data(src.begin() + b * stride, src.begin() + (b + 1) * stride);
        return Tensor::from_f32(std::move(sample_dims), std::move(data));
    }
    auto src = t.f64();
    std::vector<double> data(src.begin() + b * stride, src.begin() + (b + 1) * stride);
    return Tensor::from_f64(std::move(sample_dims), std::move(data));
}

// Stack per-sample tensors along a new leading batch axis.
Tensor stack_batch(const std::vector<Tensor>& slices) {
    const Tensor& first = slices.front();
    std::vector<int64_t> dims;
    dims.push_back(static_cast<int64_t>(slices.size()));
    dims.insert(dims.end(), first.shape().begin(), first.shape().end());
    if (first.dtype() == Dtype::F32) {
        std::vector<float> data;
        data.reserve(static_cast<size_t>(shape_numel(dims)));
        for (const Tensor& s : slices) {
            auto src = s.f32();
            data.insert(data.end(), src.begin(), src.end());
        }
        return Tensor::from_f32(std::move(dims), std::move(data));
    }
    std::vector<double> data;
    data.reserve(static_cast<size_t>(shape_numel(dims)));
    for (const Tensor& s : slices) {
        auto src = s.f64();
        data.insert(data.end(), src.begin(), src.end());
    }
    return Tensor::from_f64(std::move(dims), std::move(data));
}

std::string node_label(const ModelGraph& model, size_t i) {
    const GraphNode& n = model.nodes[i];
    std::string label = "node#" + std::to_string(i) + " (" + n.op_type;
    if (!n.outputs.empty()) label += " -> " + n.outputs[0];
    label += ")";
    return label;
}

// Static resolve step: every op_type known, arity within contract.
void resolve_kernels(const ModelGraph& model, const OperatorRegistry& registry) {
    std::vector<std::string> missing = missing_operators(model, registry);
    if (!missing.empty()) {
        std::ostringstream os;
        os << "cannot execute: unknown operator";
        if (missing.size() > 1) os << 's';
        for (const std::string& m : missing) os << " '" << m << "'";
        os << " (register the kernel before running)";
        throw UnknownOperatorError(missing, os.str());
    }
    for (size_t i = 0; i < model.nodes.size(); ++i) {
        const GraphNode& node = model.nodes[i];
        const OpKernel& k = *registry.find(node.op_type);
        int n_in = static_cast<int>(node.inputs.size());
        if (n_in < k.min_inputs || n_in > k.max_inputs) {
            throw ShapeError(node_label(model, i) + " has " + std::to_string(n_in) +
                             " inputs; kernel expects " + std::to_string(k.min_inputs) +
                             ".." + std::to_string(k.max_inputs));
        }
        if (static_cast<int>(node.outputs.size()) != k.num_outputs) {
            throw ShapeError(node_label(model, i) + " declares " +
                             std::to_string(node.outputs.size()) + " outputs; kernel produces " +
                             std::to_string(k.num_outputs));
        }
    }
}

// Feed validation + dtype conversion. Returns batch size if any batched
// input was fed (0 otherwise).
int64_t prepare_feeds(const ModelGraph& model,
                      const std::map<std::string, Tensor>& feeds,
                      std::unordered_map<std::string, Value>& env) {
    for (const auto& [name, tensor] : feeds) {
        bool declared = std::any_of(model.inputs.begin(), model.inputs.end(),
                                    [&](const ValueInfo& in) { return in.name == name; });
        if (!declared) throw Error("fed value '" + name + "' is not a graph input");
        (void)tensor;
    }

    int64_t batch = 0;
    for (const ValueInfo& in : model.inputs) {
        auto it = feeds.find(in.name);
        if (it == feeds.end()) throw Error("missing feed for graph input '" + in.name + "'");
        Tensor fed = it->second.dtype() == in.dtype ? it->second : it->second.to(in.dtype);

        const auto& dims = fed.shape();
        bool ok;
        if (in.batched) {
            ok = dims.size() == in.dims.size() + 1 && dims[0] >= 1 &&
                 std::equal(dims.begin() + 1, dims.end(), in.dims.begin(), in.dims.end());
            if (ok) {
                if (batch != 0 && batch != dims[0]) {
                    throw ShapeError("inconsistent batch sizes across inputs: " +
                                     std::to_string(batch) + " vs " + std::to_string(dims[0]));
                }
                batch = dims[0];
            }
        } else {
            ok = dims == in.dims;
        }
        if (!ok) {
            throw ShapeError("feed '" + in.name + "' has shape " + fed.shape_str() +
                             "; declared " + shape_str(in.dims) +
                             (in.batched ? " with leading batch dim" : ""));
        }
        env.emplace(in.name, Value{std::move(fed), in.batched});
    }
    return batch;
}

const Value& lookup(const std::unordered_map<std::string, Value>& env,
                    const std::string& name, const std::string& node) {
    auto it = env.find(name);
    if (it == env.end()) {
        throw Error(node + " consumes value '" + name + "' which has not been produced");
    }
    return it->second;
}

template <typename Fn>
auto with_node_context(const std::string& label, Fn&& fn) {
    try {
        return fn();
    } catch (const ShapeError& e) {
        throw ShapeError(label + ": " + e.what());
    } catch (const NumericError& e) {
        throw NumericError(label + ": " + e.what());
    } catch (const AggregationError& e) {
        throw AggregationError(label + ": " + e.what());
    }
}

// One full pass over the node list. Values flagged batched are mapped
// through the kernel slice by slice; weights and other unbatched values
// are passed whole to every slice.
void run_nodes(const ModelGraph& model, const OperatorRegistry& registry,
               std::unordered_map<std::string, Value>& env) {
    for (size_t i = 0; i < model.nodes.size(); ++i) {
        const GraphNode& node = model.nodes[i];
        const OpKernel& kernel = *registry.find(node.op_type);
        std::string label = node_label(model, i);

        std::vector<const Value*> ins;
        ins.reserve(node.inputs.size());
        int64_t batch = 0;
        for (const std::string& name : node.inputs) {
            const Value& v = lookup(env, name, label);
            if (v.batched) batch = v.tensor.shape()[0];
            ins.push_back(&v);
        }

        std::vector<Tensor> outs;
        if (batch == 0) {
            std::vector<Tensor> args;
            args.reserve(ins.size());
            for (const Value* v : ins) args.push_back(v->tensor);
            outs = with_node_context(label, [&] { return kernel.evaluate(args, node.attrs); });
            for (size_t o = 0; o < node.outputs.size(); ++o) {
                env[node.outputs[o]] = Value{std::move(outs[o]), false};
            }
        } else {
            std::vector<std::vector<Tensor>> per_output(node.outputs.size());
            for (int64_t b = 0; b < batch; ++b) {
                std::vector<Tensor> args;
                args.reserve(ins.size());
                for (const Value* v : ins) {
                    args.push_back(v->batched ? slice_batch(v->tensor, b) : v->tensor);
                }
                std::vector<Tensor> slice_outs =
                    with_node_context(label, [&] { return kernel.evaluate(args, node.attrs); });
                for (size_t o = 0; o < slice_outs.size(); ++o) {
                    per_output[o].push_back(std::move(slice_outs[o]));
                }
            }
            for (size_t o = 0; o < node.outputs.size(); ++o) {
                env[node.outputs[o]] = Value{stack_batch(per_output[o]), true};
            }
        }
    }
}

std::map<std::string, Tensor> collect_outputs(const ModelGraph& model,
                                              const std::unordered_map<std::string, Value>& env) {
    std::map<std::string, Tensor> out;
    for (const std::string& name : model.outputs) {
        out.emplace(name, lookup(env, name, "graph output").tensor);
    }
    return out;
}

// Static batched-ness propagation: a value is batched iff it is a batched
// graph input or any input of its producing node is batched. Mirrors what
// run_nodes computes dynamically; Serialized mode needs it up front so
// outputs that never touch the batch are not stacked B times.
std::set<std::string> propagate_batched(const ModelGraph& model) {
    std::set<std::string> batched;
    for (const ValueInfo& in : model.inputs) {
        if (in.batched) batched.insert(in.name);
    }
    for (const GraphNode& node : model.nodes) {
        bool any = std::any_of(node.inputs.begin(), node.inputs.end(),
                               [&](const std::string& n) { return batched.count(n) > 0; });
        if (any) batched.insert(node.outputs.begin(), node.outputs.end());
    }
    return batched;
}

} // namespace

std::map<std::string, Tensor> execute(const ModelGraph& model,
                                      const OperatorRegistry& registry,
                                      const std::map<std::string, Tensor>& feeds,
                                      ExecMode mode) {
    resolve_kernels(model, registry);

    std::unordered_map<std::string, Value> env;
    int64_t batch = prepare_feeds(model, feeds, env);
    for (const auto& [name, tensor] : model.initializers) {
        env.emplace(name, Value{tensor, false});
    }

    if (mode == ExecMode::Batched || batch == 0) {
        run_nodes(model, registry, env);
        return collect_outputs(model, env);
    }

    // Serialized: the per-sample loop. Run the whole graph once per
    // sample, then concatenate each batch-dependent output along the
    // batch dim in input batch order. Outputs that never touch a batched
    // input are identical across samples and stay unbatched.
    std::set<std::string> batched_values = propagate_batched(model);
    std::map<std::string, std::vector<Tensor>> gathered;
    for (int64_t b = 0; b < batch; ++b) {
        std::unordered_map<std::string, Value> sample_env;
        for (const auto& [name, value] : env) {
            if (value.batched) {
                sample_env.emplace(name, Value{slice_batch(value.tensor, b), false});
            } else {
                sample_env.emplace(name, value);
            }
        }
        run_nodes(model, registry, sample_env);
        for (const std::string& name : model.outputs) {
            if (batched_values.count(name) || b == 0) {
                gathered[name].push_back(lookup(sample_env, name, "graph output").tensor);
            }
        }
    }

    std::map<std::string, Tensor> out;
    for (const std::string& name : model.outputs) {
        auto& slices = gathered[name];
        if (batched_values.count(name)) {
            out.emplace(name, stack_batch(slices));
        } else {
            out.emplace(name, std::move(slices.front()));
        }
    }
    return out;
}

} // namespace egir
