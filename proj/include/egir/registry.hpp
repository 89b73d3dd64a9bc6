#pragma once

#include <functional>
#include <map>
#include <span>
#include <string>
#include <vector>

#include "egir/graph.hpp"
#include "egir/tensor.hpp"

namespace egir {

/// Executable implementation of one operator type. `evaluate` is a pure
/// function over per-sample input tensors; the executor owns all batch
/// handling, so kernels never see a batch dimension.
struct OpKernel {
    std::string op_type;
    int min_inputs = 1;
    int max_inputs = 1;
    int num_outputs = 1;
    std::function<std::vector<Tensor>(std::span<const Tensor>, const AttrMap&)> evaluate;
};

/// Resolves op_type strings to kernels. Duplicate registration is
/// rejected; lookup of an absent type is a defined error, never a crash.
/// Freeze before sharing across concurrent inference sessions.
class OperatorRegistry {
public:
    /// Registry pre-populated with the built-in operator set:
    /// MatMul, Add, AddBias, Relu, Concat, Reshape, RowMean, Flatten.
    static OperatorRegistry with_builtins();

    /// Empty registry (used to reproduce missing-operator failures).
    OperatorRegistry() = default;

    void register_op(OpKernel kernel);

    const OpKernel* find(const std::string& op_type) const;
    bool contains(const std::string& op_type) const { return find(op_type) != nullptr; }
    /// Like find() but throws UnknownOperatorError when absent.
    const OpKernel& get(const std::string& op_type) const;

    void freeze() { frozen_ = true; }
    bool frozen() const { return frozen_; }

    std::vector<std::string> op_types() const;

private:
    std::map<std::string, OpKernel> kernels_;
    bool frozen_ = false;
};

} // namespace egir
