#include "egir/registry.hpp"

#include <numeric>

namespace egir {

void OperatorRegistry::register_op(OpKernel kernel) {
    if (frozen_) {
        throw RegistryError("registry is frozen; cannot register '" + kernel.op_type + "'");
    }
    if (kernel.op_type.empty()) {
        throw RegistryError("cannot register kernel with empty op_type");
    }
    if (!kernel.evaluate) {
        throw RegistryError("kernel '" + kernel.op_type + "' has no evaluate function");
    }
    auto [it, inserted] = kernels_.emplace(kernel.op_type, std::move(kernel));
    if (!inserted) {
        throw RegistryError("operator '" + it->first + "' is already registered");
    }
}

const OpKernel* OperatorRegistry::find(const std::string& op_type) const {
    auto it = kernels_.find(op_type);
    return it == kernels_.end() ? nullptr : &it->second;
}

const OpKernel& OperatorRegistry::get(const std::string& op_type) const {
    const OpKernel* k = find(op_type);
    if (!k) {
        throw UnknownOperatorError({op_type}, "unknown operator '" + op_type + "'");
    }
    return *k;
}

std::vector<std::string> OperatorRegistry::op_types() const {
    std::vector<std::string> names;
    names.reserve(kernels_.size());
    for (const auto& [name, kernel] : kernels_) names.push_back(name);
    return names;
}

namespace {

std::vector<Tensor> one(Tensor t) {
    std::vector<Tensor> v;
    v.push_back(std::move(t));
    return v;
}

// Concat along `axis` of rank-2 inputs; negative axis counts from the end.
Tensor concat2(const Tensor& a, const Tensor& b, int64_t axis) {
    if (axis < 0) axis += 2;
    if (axis == 1) return concat_cols(a, b);
    if (axis == 0) {
        // Row concat via transpose keeps one code path.
        return transpose(concat_cols(transpose(a), transpose(b)));
    }
    throw ShapeError("Concat axis out of range for rank-2 inputs");
}

Tensor flatten(const Tensor& t, int64_t axis) {
    if (axis < 0 || axis > t.rank()) {
        throw ShapeError("Flatten axis " + std::to_string(axis) + " out of range for " + t.shape_str());
    }
    int64_t outer = 1, inner = 1;
    const auto& dims = t.shape();
    for (int64_t i = 0; i < axis; ++i) outer *= dims[static_cast<size_t>(i)];
    for (int64_t i = axis; i < t.rank(); ++i) inner *= dims[static_cast<size_t>(i)];
    return reshape(t, {outer, inner});
}

} // namespace

OperatorRegistry OperatorRegistry::with_builtins() {
    OperatorRegistry reg;

    reg.register_op({"MatMul", 2, 2, 1, [](std::span<const Tensor> in, const AttrMap&) {
                         return one(matmul(in[0], in[1]));
                     }});
    reg.register_op({"Add", 2, 2, 1, [](std::span<const Tensor> in, const AttrMap&) {
                         return one(add(in[0], in[1]));
                     }});
    reg.register_op({"AddBias", 2, 2, 1, [](std::span<const Tensor> in, const AttrMap&) {
                         return one(add_bias(in[0], in[1]));
                     }});
    reg.register_op({"Relu", 1, 1, 1, [](std::span<const Tensor> in, const AttrMap&) {
                         return one(relu(in[0]));
                     }});
    reg.register_op({"Concat", 2, 2, 1, [](std::span<const Tensor> in, const AttrMap& attrs) {
                         return one(concat2(in[0], in[1], attr_int_or(attrs, "axis", -1)));
                     }});
    reg.register_op({"Reshape", 1, 1, 1, [](std::span<const Tensor> in, const AttrMap& attrs) {
                         return one(reshape(in[0], attr_ints(attrs, "shape")));
                     }});
    reg.register_op({"RowMean", 1, 1, 1, [](std::span<const Tensor> in, const AttrMap&) {
                         return one(row_mean(in[0]));
                     }});
    reg.register_op({"Flatten", 1, 1, 1, [](std::span<const Tensor> in, const AttrMap& attrs) {
                         return one(flatten(in[0], attr_int_or(attrs, "axis", 0)));
                     }});

    return reg;
}

} // namespace egir
