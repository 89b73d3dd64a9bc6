#pragma once

#include <cstdint>
#include <map>
#include <string>
#include <variant>
#include <vector>

#include "egir/tensor.hpp"

namespace egir {

/// Node attribute value. The set is deliberately closed: int, float,
/// int-list, string.
using Attribute = std::variant<int64_t, double, std::vector<int64_t>, std::string>;
using AttrMap = std::map<std::string, Attribute>;

int64_t attr_int(const AttrMap& attrs, const std::string& key);
int64_t attr_int_or(const AttrMap& attrs, const std::string& key, int64_t fallback);
double attr_float(const AttrMap& attrs, const std::string& key);
const std::vector<int64_t>& attr_ints(const AttrMap& attrs, const std::string& key);
const std::string& attr_string(const AttrMap& attrs, const std::string& key);
std::string attr_string_or(const AttrMap& attrs, const std::string& key, std::string fallback);

/// One operator invocation in the computation graph.
struct GraphNode {
    std::string op_type;
    std::vector<std::string> inputs;
    std::vector<std::string> outputs;
    AttrMap attrs;
};

/// Declared graph input. `dims` is the per-sample shape; when `batched`
/// is set the executor accepts a fed tensor with one extra leading batch
/// dimension B >= 1 and maps over it.
struct ValueInfo {
    std::string name;
    std::vector<int64_t> dims;
    bool batched = false;
    Dtype dtype = Dtype::F32;
};

/// Serializable computation-graph model: a DAG of operator nodes over
/// named tensors. The node list is required to be in topological order.
struct ModelGraph {
    uint32_t version = 1;
    std::vector<ValueInfo> inputs;
    std::vector<std::string> outputs;
    std::map<std::string, Tensor> initializers; // serialized as float32
    std::vector<GraphNode> nodes;
    std::map<std::string, std::string> metadata;
};

enum class ViolationKind {
    BadVersion,
    EmptyName,
    DuplicateValueName,
    EmptyOpType,
    UndefinedInput,
    NotTopologicallyOrdered,
    UnproducedOutput,
    NonF32Initializer,
    BadShape,
};

const char* violation_kind_name(ViolationKind kind);

struct Violation {
    ViolationKind kind;
    std::string where;   // offending node/value
    std::string message;
};

/// Structural validation. Empty result iff every ModelGraph invariant
/// holds; violations are data, not exceptions.
std::vector<Violation> validate(const ModelGraph& model);

/// Throws Error with the full violation list when validate() is nonempty.
void require_valid(const ModelGraph& model, const std::string& context);

} // namespace egir
