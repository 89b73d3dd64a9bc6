#include "egir/tensor.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <sstream>
#include <type_traits>

namespace egir {

const char* dtype_name(Dtype dt) {
    return dt == Dtype::F32 ? "float32" : "float64";
}

std::string shape_str(const std::vector<int64_t>& shape) {
    std::ostringstream os;
    os << '[';
    for (size_t i = 0; i < shape.size(); ++i) {
        if (i) os << 'x';
        os << shape[i];
    }
    os << ']';
    return os.str();
}

int64_t shape_numel(const std::vector<int64_t>& shape) {
    int64_t n = 1;
    for (int64_t d : shape) {
        if (d < 0) throw ShapeError("negative dimension in shape " + shape_str(shape));
        n *= d;
    }
    return n;
}

namespace {

template <typename T>
void check_finite(const std::vector<T>& data, const std::string& context) {
    for (T v : data) {
        if (!std::isfinite(v)) {
            throw NumericError("non-finite value produced by " + context);
        }
    }
}

} // namespace

Tensor Tensor::zeros(std::vector<int64_t> shape, Dtype dtype) {
    int64_t n = shape_numel(shape);
    if (dtype == Dtype::F32) {
        return Tensor(std::move(shape), std::vector<float>(static_cast<size_t>(n), 0.0f));
    }
    return Tensor(std::move(shape), std::vector<double>(static_cast<size_t>(n), 0.0));
}

Tensor Tensor::from_f64(std::vector<int64_t> shape, std::vector<double> data) {
    if (shape_numel(shape) != static_cast<int64_t>(data.size())) {
        throw ShapeError("data length " + std::to_string(data.size()) +
                         " does not match shape " + shape_str(shape));
    }
    check_finite(data, "tensor construction");
    return Tensor(std::move(shape), std::move(data));
}

Tensor Tensor::from_f32(std::vector<int64_t> shape, std::vector<float> data) {
    if (shape_numel(shape) != static_cast<int64_t>(data.size())) {
        throw ShapeError("data length " + std::to_string(data.size()) +
                         " does not match shape " + shape_str(shape));
    }
    check_finite(data, "tensor construction");
    return Tensor(std::move(shape), std::move(data));
}

Tensor Tensor::from_rows(const std::vector<std::vector<double>>& rows) {
    int64_t m = static_cast<int64_t>(rows.size());
    int64_t n = m > 0 ? static_cast<int64_t>(rows[0].size()) : 0;
    std::vector<double> flat;
    flat.reserve(static_cast<size_t>(m * n));
    for (const auto& r : rows) {
        if (static_cast<int64_t>(r.size()) != n) {
            throw ShapeError("ragged rows in tensor literal");
        }
        flat.insert(flat.end(), r.begin(), r.end());
    }
    return from_f64({m, n}, std::move(flat));
}

int64_t Tensor::numel() const {
    return std::holds_alternative<std::vector<float>>(data_)
               ? static_cast<int64_t>(std::get<std::vector<float>>(data_).size())
               : static_cast<int64_t>(std::get<std::vector<double>>(data_).size());
}

Dtype Tensor::dtype() const {
    return std::holds_alternative<std::vector<float>>(data_) ? Dtype::F32 : Dtype::F64;
}

int64_t Tensor::rows() const {
    if (rank() != 2) throw ShapeError("rows() on tensor of shape " + shape_str());
    return shape_[0];
}

int64_t Tensor::cols() const {
    if (rank() != 2) throw ShapeError("cols() on tensor of shape " + shape_str());
    return shape_[1];
}

std::span<const double> Tensor::f64() const {
    if (dtype() != Dtype::F64) throw ShapeError("tensor is not float64");
    return std::get<std::vector<double>>(data_);
}

std::span<const float> Tensor::f32() const {
    if (dtype() != Dtype::F32) throw ShapeError("tensor is not float32");
    return std::get<std::vector<float>>(data_);
}

std::span<double> Tensor::f64_mut() {
    if (dtype() != Dtype::F64) throw ShapeError("tensor is not float64");
    return std::get<std::vector<double>>(data_);
}

std::span<float> Tensor::f32_mut() {
    if (dtype() != Dtype::F32) throw ShapeError("tensor is not float32");
    return std::get<std::vector<float>>(data_);
}

double Tensor::at_flat(int64_t i) const {
    if (i < 0 || i >= numel()) {
        throw ShapeError("flat index " + std::to_string(i) + " out of range for " + shape_str());
    }
    return dtype() == Dtype::F32 ? static_cast<double>(f32()[static_cast<size_t>(i)])
                                 : f64()[static_cast<size_t>(i)];
}

double Tensor::at(int64_t r, int64_t c) const {
    if (rank() != 2) throw ShapeError("at(r,c) on tensor of shape " + shape_str());
    if (r < 0 || r >= shape_[0] || c < 0 || c >= shape_[1]) {
        throw ShapeError("index (" + std::to_string(r) + "," + std::to_string(c) +
                         ") out of range for " + shape_str());
    }
    return at_flat(r * shape_[1] + c);
}

Tensor Tensor::to(Dtype target) const {
    if (target == dtype()) return *this;
    if (target == Dtype::F32) {
        auto src = f64();
        std::vector<float> out(src.begin(), src.end());
        return Tensor(shape_, std::move(out));
    }
    auto src = f32();
    std::vector<double> out(src.begin(), src.end());
    return Tensor(shape_, std::move(out));
}

std::string Tensor::shape_str() const {
    return egir::shape_str(shape_);
}

bool bits_equal(const Tensor& a, const Tensor& b) {
    if (a.shape() != b.shape() || a.dtype() != b.dtype()) return false;
    if (a.dtype() == Dtype::F32) {
        auto x = a.f32(), y = b.f32();
        for (size_t i = 0; i < x.size(); ++i) {
            if (std::bit_cast<uint32_t>(x[i]) != std::bit_cast<uint32_t>(y[i])) return false;
        }
    } else {
        auto x = a.f64(), y = b.f64();
        for (size_t i = 0; i < x.size(); ++i) {
            if (std::bit_cast<uint64_t>(x[i]) != std::bit_cast<uint64_t>(y[i])) return false;
        }
    }
    return true;
}

double max_abs_diff(const Tensor& a, const Tensor& b) {
    if (a.shape() != b.shape()) {
        throw ShapeError("max_abs_diff shapes differ: " + a.shape_str() + " vs " + b.shape_str());
    }
    double m = 0.0;
    for (int64_t i = 0; i < a.numel(); ++i) {
        m = std::max(m, std::fabs(a.at_flat(i) - b.at_flat(i)));
    }
    return m;
}

void ensure_finite(const Tensor& t, const std::string& context) {
    if (t.dtype() == Dtype::F32) {
        for (float v : t.f32()) {
            if (!std::isfinite(v)) throw NumericError("non-finite value produced by " + context);
        }
    } else {
        for (double v : t.f64()) {
            if (!std::isfinite(v)) throw NumericError("non-finite value produced by " + context);
        }
    }
}

namespace {

void require_rank2(const Tensor& t, const char* op) {
    if (t.rank() != 2) {
        throw ShapeError(std::string(op) + " requires a rank-2 tensor, got " + t.shape_str());
    }
}

void require_same_dtype(const Tensor& a, const Tensor& b, const char* op) {
    if (a.dtype() != b.dtype()) {
        throw ShapeError(std::string(op) + " dtype mismatch: " + dtype_name(a.dtype()) +
                         " vs " + dtype_name(b.dtype()));
    }
}

// Row-major m x p times p x q. float32 inputs accumulate in double so the
// inference path stays within a few ulps of the training math.
template <typename T>
std::vector<T> mm(std::span<const T> a, std::span<const T> b, int64_t m, int64_t p, int64_t q) {
    std::vector<T> out(static_cast<size_t>(m * q), T(0));
    for (int64_t i = 0; i < m; ++i) {
        for (int64_t j = 0; j < q; ++j) {
            double acc = 0.0;
            const T* arow = a.data() + i * p;
            for (int64_t k = 0; k < p; ++k) {
                acc += static_cast<double>(arow[k]) * static_cast<double>(b[static_cast<size_t>(k * q + j)]);
            }
            out[static_cast<size_t>(i * q + j)] = static_cast<T>(acc);
        }
    }
    return out;
}

template <typename T, typename F>
Tensor elementwise(const Tensor& a, const Tensor& b, F f) {
    if constexpr (std::is_same_v<T, float>) {
        auto x = a.f32(), y = b.f32();
        std::vector<float> out(x.size());
        for (size_t i = 0; i < x.size(); ++i) out[i] = f(x[i], y[i]);
        return Tensor::from_f32(a.shape(), std::move(out));
    } else {
        auto x = a.f64(), y = b.f64();
        std::vector<double> out(x.size());
        for (size_t i = 0; i < x.size(); ++i) out[i] = f(x[i], y[i]);
        return Tensor::from_f64(a.shape(), std::move(out));
    }
}

template <typename F>
Tensor binary_op(const Tensor& a, const Tensor& b, const char* op, F f) {
    require_same_dtype(a, b, op);
    if (a.shape() != b.shape()) {
        throw ShapeError(std::string(op) + " shape mismatch: " + a.shape_str() + " vs " + b.shape_str());
    }
    Tensor r = a.dtype() == Dtype::F32 ? elementwise<float>(a, b, f) : elementwise<double>(a, b, f);
    ensure_finite(r, op);
    return r;
}

} // namespace

Tensor matmul(const Tensor& a, const Tensor& b) {
    require_rank2(a, "matmul");
    require_rank2(b, "matmul");
    require_same_dtype(a, b, "matmul");
    if (a.cols() != b.rows()) {
        throw ShapeError("matmul inner dimensions differ: " + a.shape_str() + " x " + b.shape_str());
    }
    const int64_t m = a.rows(), p = a.cols(), q = b.cols();
    Tensor r;
    if (a.dtype() == Dtype::F32) {
        r = Tensor::from_f32({m, q}, mm<float>(a.f32(), b.f32(), m, p, q));
    } else {
        r = Tensor::from_f64({m, q}, mm<double>(a.f64(), b.f64(), m, p, q));
    }
    ensure_finite(r, "matmul");
    return r;
}

Tensor add(const Tensor& a, const Tensor& b) {
    return binary_op(a, b, "add", [](auto x, auto y) { return x + y; });
}

Tensor add_bias(const Tensor& a, const Tensor& bias) {
    require_rank2(a, "add_bias");
    require_rank2(bias, "add_bias");
    require_same_dtype(a, bias, "add_bias");
    if (bias.rows() != 1 || bias.cols() != a.cols()) {
        throw ShapeError("add_bias expects bias [1x" + std::to_string(a.cols()) +
                         "] for input " + a.shape_str() + ", got " + bias.shape_str());
    }
    const int64_t m = a.rows(), n = a.cols();
    Tensor r = Tensor::zeros(a.shape(), a.dtype());
    if (a.dtype() == Dtype::F32) {
        auto x = a.f32();
        auto v = bias.f32();
        auto out = r.f32_mut();
        for (int64_t i = 0; i < m; ++i)
            for (int64_t j = 0; j < n; ++j)
                out[static_cast<size_t>(i * n + j)] = x[static_cast<size_t>(i * n + j)] + v[static_cast<size_t>(j)];
    } else {
        auto x = a.f64();
        auto v = bias.f64();
        auto out = r.f64_mut();
        for (int64_t i = 0; i < m; ++i)
            for (int64_t j = 0; j < n; ++j)
                out[static_cast<size_t>(i * n + j)] = x[static_cast<size_t>(i * n + j)] + v[static_cast<size_t>(j)];
    }
    ensure_finite(r, "add_bias");
    return r;
}

Tensor relu(const Tensor& a) {
    Tensor r = Tensor::zeros(a.shape(), a.dtype());
    if (a.dtype() == Dtype::F32) {
        auto x = a.f32();
        auto out = r.f32_mut();
        for (size_t i = 0; i < x.size(); ++i) out[i] = x[i] > 0.0f ? x[i] : 0.0f;
    } else {
        auto x = a.f64();
        auto out = r.f64_mut();
        for (size_t i = 0; i < x.size(); ++i) out[i] = x[i] > 0.0 ? x[i] : 0.0;
    }
    return r;
}

Tensor concat_cols(const Tensor& a, const Tensor& b) {
    require_rank2(a, "concat_cols");
    require_rank2(b, "concat_cols");
    require_same_dtype(a, b, "concat_cols");
    if (a.rows() != b.rows()) {
        throw ShapeError("concat_cols row mismatch: " + a.shape_str() + " vs " + b.shape_str());
    }
    const int64_t m = a.rows(), p = a.cols(), q = b.cols();
    Tensor r = Tensor::zeros({m, p + q}, a.dtype());
    auto copy = [&](auto xa, auto xb, auto out) {
        for (int64_t i = 0; i < m; ++i) {
            for (int64_t j = 0; j < p; ++j)
                out[static_cast<size_t>(i * (p + q) + j)] = xa[static_cast<size_t>(i * p + j)];
            for (int64_t j = 0; j < q; ++j)
                out[static_cast<size_t>(i * (p + q) + p + j)] = xb[static_cast<size_t>(i * q + j)];
        }
    };
    if (a.dtype() == Dtype::F32) {
        copy(a.f32(), b.f32(), r.f32_mut());
    } else {
        copy(a.f64(), b.f64(), r.f64_mut());
    }
    return r;
}

Tensor reshape(const Tensor& a, std::vector<int64_t> new_shape) {
    if (shape_numel(new_shape) != a.numel()) {
        throw ShapeError("reshape element count mismatch: " + a.shape_str() + " -> " +
                         shape_str(new_shape));
    }
    if (a.dtype() == Dtype::F32) {
        auto x = a.f32();
        return Tensor::from_f32(std::move(new_shape), std::vector<float>(x.begin(), x.end()));
    }
    auto x = a.f64();
    return Tensor::from_f64(std::move(new_shape), std::vector<double>(x.begin(), x.end()));
}

Tensor row_mean(const Tensor& a) {
    require_rank2(a, "row_mean");
    const int64_t m = a.rows(), n = a.cols();
    if (m == 0) {
        throw AggregationError("row_mean over zero rows (shape " + a.shape_str() + ")");
    }
    Tensor r = Tensor::zeros({1, n}, a.dtype());
    // Fixed summation order: rows ascending, double accumulator.
    auto reduce = [&](auto x, auto out) {
        for (int64_t j = 0; j < n; ++j) {
            double acc = 0.0;
            for (int64_t i = 0; i < m; ++i) acc += static_cast<double>(x[static_cast<size_t>(i * n + j)]);
            using V = std::remove_reference_t<decltype(out[0])>;
            out[static_cast<size_t>(j)] = static_cast<V>(acc / static_cast<double>(m));
        }
    };
    if (a.dtype() == Dtype::F32) {
        reduce(a.f32(), r.f32_mut());
    } else {
        reduce(a.f64(), r.f64_mut());
    }
    ensure_finite(r, "row_mean");
    return r;
}

Tensor slice_cols(const Tensor& a, int64_t begin, int64_t end) {
    require_rank2(a, "slice_cols");
    if (begin < 0 || end < begin || end > a.cols()) {
        throw ShapeError("slice_cols [" + std::to_string(begin) + "," + std::to_string(end) +
                         ") out of range for " + a.shape_str());
    }
    const int64_t m = a.rows(), n = a.cols(), w = end - begin;
    Tensor r = Tensor::zeros({m, w}, a.dtype());
    auto copy = [&](auto x, auto out) {
        for (int64_t i = 0; i < m; ++i)
            for (int64_t j = 0; j < w; ++j)
                out[static_cast<size_t>(i * w + j)] = x[static_cast<size_t>(i * n + begin + j)];
    };
    if (a.dtype() == Dtype::F32) {
        copy(a.f32(), r.f32_mut());
    } else {
        copy(a.f64(), r.f64_mut());
    }
    return r;
}

Tensor transpose(const Tensor& a) {
    require_rank2(a, "transpose");
    const int64_t m = a.rows(), n = a.cols();
    Tensor r = Tensor::zeros({n, m}, a.dtype());
    auto copy = [&](auto x, auto out) {
        for (int64_t i = 0; i < m; ++i)
            for (int64_t j = 0; j < n; ++j)
                out[static_cast<size_t>(j * m + i)] = x[static_cast<size_t>(i * n + j)];
    };
    if (a.dtype() == Dtype::F32) {
        copy(a.f32(), r.f32_mut());
    } else {
        copy(a.f64(), r.f64_mut());
    }
    return r;
}

Tensor hadamard(const Tensor& a, const Tensor& b) {
    return binary_op(a, b, "hadamard", [](auto x, auto y) { return x * y; });
}

Tensor scale(const Tensor& a, double s) {
    Tensor r = Tensor::zeros(a.shape(), a.dtype());
    if (a.dtype() == Dtype::F32) {
        auto x = a.f32();
        auto out = r.f32_mut();
        for (size_t i = 0; i < x.size(); ++i) out[i] = static_cast<float>(x[i] * s);
    } else {
        auto x = a.f64();
        auto out = r.f64_mut();
        for (size_t i = 0; i < x.size(); ++i) out[i] = x[i] * s;
    }
    ensure_finite(r, "scale");
    return r;
}

Tensor sub(const Tensor& a, const Tensor& b) {
    return binary_op(a, b, "sub", [](auto x, auto y) { return x - y; });
}

} // namespace egir
