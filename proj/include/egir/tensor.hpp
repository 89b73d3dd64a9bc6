#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <variant>
#include <vector>

#include "egir/errors.hpp"

namespace egir {

enum class Dtype { F32, F64 };

const char* dtype_name(Dtype dt);

/// Dense row-major tensor. Element type is a runtime tag: float64 for
/// training math, float32 for serialized inference models.
///
/// Invariants: product(shape) == element count; every element finite.
/// Tensors are immutable once built; copies share nothing, so values can
/// be handed across threads freely.
class Tensor {
public:
    Tensor() : shape_{0}, data_(std::vector<double>{}) {}

    static Tensor zeros(std::vector<int64_t> shape, Dtype dtype = Dtype::F64);
    static Tensor from_f64(std::vector<int64_t> shape, std::vector<double> data);
    static Tensor from_f32(std::vector<int64_t> shape, std::vector<float> data);
    /// 2-D convenience: shape [rows.size(), rows[0].size()], float64.
    static Tensor from_rows(const std::vector<std::vector<double>>& rows);

    const std::vector<int64_t>& shape() const { return shape_; }
    int64_t rank() const { return static_cast<int64_t>(shape_.size()); }
    int64_t numel() const;
    Dtype dtype() const;

    /// Rank-2 accessors; throw ShapeError on other ranks.
    int64_t rows() const;
    int64_t cols() const;

    std::span<const double> f64() const;
    std::span<const float> f32() const;
    std::span<double> f64_mut();
    std::span<float> f32_mut();

    /// Element read at a flat row-major index, widened to double.
    double at_flat(int64_t i) const;
    /// Rank-2 element read.
    double at(int64_t r, int64_t c) const;

    /// Cast (float64 <-> float32). Identity cast returns a copy.
    Tensor to(Dtype dtype) const;

    bool same_shape(const Tensor& other) const { return shape_ == other.shape_; }

    std::string shape_str() const;

private:
    Tensor(std::vector<int64_t> shape, std::variant<std::vector<float>, std::vector<double>> data)
        : shape_(std::move(shape)), data_(std::move(data)) {}

    std::vector<int64_t> shape_;
    std::variant<std::vector<float>, std::vector<double>> data_;
};

std::string shape_str(const std::vector<int64_t>& shape);
int64_t shape_numel(const std::vector<int64_t>& shape);

/// Bitwise equality of shape, dtype and every element. Used by tests and
/// the round-trip checks; distinct from approximate comparison.
bool bits_equal(const Tensor& a, const Tensor& b);

/// Largest absolute elementwise difference; shapes must match.
double max_abs_diff(const Tensor& a, const Tensor& b);

/// Throws NumericError naming `context` if any element is NaN/Inf.
void ensure_finite(const Tensor& t, const std::string& context);

// --- primitive operations -------------------------------------------------
// All pure; inputs must share dtype where binary. matmul on float32 data
// accumulates dot products in float64 before the final downcast.

Tensor matmul(const Tensor& a, const Tensor& b);
Tensor add(const Tensor& a, const Tensor& b);
/// bias is a [1 x n] row vector added to every row of a [m x n]. The one
/// sanctioned broadcast; add() itself requires identical shapes.
Tensor add_bias(const Tensor& a, const Tensor& bias);
Tensor relu(const Tensor& a);
Tensor concat_cols(const Tensor& a, const Tensor& b);
Tensor reshape(const Tensor& a, std::vector<int64_t> new_shape);
Tensor row_mean(const Tensor& a);
/// Columns [begin, end) of a rank-2 tensor.
Tensor slice_cols(const Tensor& a, int64_t begin, int64_t end);
Tensor transpose(const Tensor& a);
Tensor hadamard(const Tensor& a, const Tensor& b);
Tensor scale(const Tensor& a, double s);
Tensor sub(const Tensor& a, const Tensor& b);

} // namespace egir
