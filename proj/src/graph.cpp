#include "egir/graph.hpp"

#include <sstream>
#include <unordered_map>
#include <unordered_set>

namespace egir {

namespace {

const Attribute* find_attr(const AttrMap& attrs, const std::string& key) {
    auto it = attrs.find(key);
    return it == attrs.end() ? nullptr : &it->second;
}

[[noreturn]] void attr_fail(const std::string& key, const char* expected) {
    throw Error("attribute '" + key + "' missing or not " + expected);
}

} // namespace

int64_t attr_int(const AttrMap& attrs, const std::string& key) {
    const Attribute* a = find_attr(attrs, key);
    if (!a || !std::holds_alternative<int64_t>(*a)) attr_fail(key, "an int");
    return std::get<int64_t>(*a);
}

int64_t attr_int_or(const AttrMap& attrs, const std::string& key, int64_t fallback) {
    const Attribute* a = find_attr(attrs, key);
    if (!a) return fallback;
    if (!std::holds_alternative<int64_t>(*a)) attr_fail(key, "an int");
    return std::get<int64_t>(*a);
}

double attr_float(const AttrMap& attrs, const std::string& key) {
    const Attribute* a = find_attr(attrs, key);
    if (!a || !std::holds_alternative<double>(*a)) attr_fail(key, "a float");
    return std::get<double>(*a);
}

const std::vector<int64_t>& attr_ints(const AttrMap& attrs, const std::string& key) {
    const Attribute* a = find_attr(attrs, key);
    if (!a || !std::holds_alternative<std::vector<int64_t>>(*a)) attr_fail(key, "an int list");
    return std::get<std::vector<int64_t>>(*a);
}

const std::string& attr_string(const AttrMap& attrs, const std::string& key) {
    const Attribute* a = find_attr(attrs, key);
    if (!a || !std::holds_alternative<std::string>(*a)) attr_fail(key, "a string");
    return std::get<std::string>(*a);
}

std::string attr_string_or(const AttrMap& attrs, const std::string& key, std::string fallback) {
    const Attribute* a = find_attr(attrs, key);
    if (!a) return fallback;
    if (!std::holds_alternative<std::string>(*a)) attr_fail(key, "a string");
    return std::get<std::string>(*a);
}

const char* violation_kind_name(ViolationKind kind) {
    switch (kind) {
        case ViolationKind::BadVersion: return "BadVersion";
        case ViolationKind::EmptyName: return "EmptyName";
        case ViolationKind::DuplicateValueName: return "DuplicateValueName";
        case ViolationKind::EmptyOpType: return "EmptyOpType";
        case ViolationKind::UndefinedInput: return "UndefinedInput";
        case ViolationKind::NotTopologicallyOrdered: return "NotTopologicallyOrdered";
        case ViolationKind::UnproducedOutput: return "UnproducedOutput";
        case ViolationKind::NonF32Initializer: return "NonF32Initializer";
        case ViolationKind::BadShape: return "BadShape";
    }
    return "?";
}

std::vector<Violation> validate(const ModelGraph& model) {
    std::vector<Violation> out;
    auto flag = [&](ViolationKind kind, std::string where, std::string msg) {
        out.push_back({kind, std::move(where), std::move(msg)});
    };

    if (model.version != 1) {
        flag(ViolationKind::BadVersion, "version",
             "unsupported model version " + std::to_string(model.version));
    }

    // Value names defined before any node runs, plus the node index that
    // later defines each node output (for use-before-def diagnostics).
    std::unordered_set<std::string> predefined;
    std::unordered_map<std::string, size_t> produced_by;

    for (const ValueInfo& in : model.inputs) {
        if (in.name.empty()) {
            flag(ViolationKind::EmptyName, "<input>", "graph input with empty name");
            continue;
        }
        for (int64_t d : in.dims) {
            if (d < 0) {
                flag(ViolationKind::BadShape, in.name,
                     "input '" + in.name + "' has negative dimension");
                break;
            }
        }
        if (!predefined.insert(in.name).second) {
            flag(ViolationKind::DuplicateValueName, in.name,
                 "duplicate graph input '" + in.name + "'");
        }
    }
    for (const auto& [name, tensor] : model.initializers) {
        if (name.empty()) {
            flag(ViolationKind::EmptyName, "<initializer>", "initializer with empty name");
            continue;
        }
        if (!predefined.insert(name).second) {
            flag(ViolationKind::DuplicateValueName, name,
                 "initializer '" + name + "' collides with another value");
        }
        if (tensor.dtype() != Dtype::F32) {
            flag(ViolationKind::NonF32Initializer, name,
                 "initializer '" + name + "' is " + dtype_name(tensor.dtype()) +
                 "; serialized models carry float32 only");
        }
    }

    for (size_t i = 0; i < model.nodes.size(); ++i) {
        const GraphNode& node = model.nodes[i];
        std::string where = "node#" + std::to_string(i) +
                            (node.outputs.empty() ? "" : " -> " + node.outputs[0]);
        if (node.op_type.empty()) {
            flag(ViolationKind::EmptyOpType, where, "node has empty op_type");
        }
        for (const std::string& name : node.outputs) {
            if (name.empty()) {
                flag(ViolationKind::EmptyName, where, "node output with empty name");
                continue;
            }
            if (predefined.count(name) || produced_by.count(name)) {
                flag(ViolationKind::DuplicateValueName, name,
                     "output name '" + name + "' is defined more than once");
            } else {
                produced_by[name] = i;
            }
        }
    }

    // Inputs must resolve to an input, an initializer, or an EARLIER
    // node's output. A later producer means the node list is not a
    // topological order (cycles surface here too).
    for (size_t i = 0; i < model.nodes.size(); ++i) {
        const GraphNode& node = model.nodes[i];
        std::string where = "node#" + std::to_string(i) +
                            (node.outputs.empty() ? "" : " -> " + node.outputs[0]);
        for (const std::string& name : node.inputs) {
            if (predefined.count(name)) continue;
            auto it = produced_by.find(name);
            if (it == produced_by.end()) {
                flag(ViolationKind::UndefinedInput, where,
                     "node#" + std::to_string(i) + " consumes undefined value '" + name + "'");
            } else if (it->second >= i) {
                flag(ViolationKind::NotTopologicallyOrdered, where,
                     "node#" + std::to_string(i) + " consumes '" + name +
                     "' produced by node#" + std::to_string(it->second));
            }
        }
    }

    std::unordered_set<std::string> seen_outputs;
    for (const std::string& name : model.outputs) {
        if (name.empty()) {
            flag(ViolationKind::EmptyName, "<output>", "graph output with empty name");
            continue;
        }
        if (!seen_outputs.insert(name).second) {
            flag(ViolationKind::DuplicateValueName, name,
                 "graph output '" + name + "' listed twice");
            continue;
        }
        if (!predefined.count(name) && !produced_by.count(name)) {
            flag(ViolationKind::UnproducedOutput, name,
                 "graph output '" + name + "' is produced by nothing");
        }
    }
    if (model.outputs.empty()) {
        flag(ViolationKind::UnproducedOutput, "<outputs>", "graph declares no outputs");
    }

    return out;
}

void require_valid(const ModelGraph& model, const std::string& context) {
    std::vector<Violation> v = validate(model);
    if (v.empty()) return;
    std::ostringstream os;
    os << context << ": model graph invalid (" << v.size() << " violation";
    if (v.size() > 1) os << 's';
    os << "):";
    for (const Violation& x : v) {
        os << "\n  [" << violation_kind_name(x.kind) << "] " << x.message;
    }
    throw Error(os.str());
}

} // namespace egir
