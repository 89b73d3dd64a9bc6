#pragma once

#include <stdexcept>
#include <string>
#include <vector>

namespace egir {

/// Base class for every error this library throws.
class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Tensor shape / dimension mismatch. Messages name both shapes.
class ShapeError : public Error {
public:
    using Error::Error;
};

/// A numeric operation produced NaN or Inf.
class NumericError : public Error {
public:
    using Error::Error;
};

/// Invalid graph topology handed to adjacency preprocessing
/// (non-square, asymmetric, nonzero diagonal, non-binary).
class TopologyError : public Error {
public:
    using Error::Error;
};

/// Aggregation over an empty set (row_mean on zero rows, node with
/// no neighbors).
class AggregationError : public Error {
public:
    using Error::Error;
};

/// Model file format problems. `code()` identifies the failure class so
/// callers and tests can tell them apart.
class FormatError : public Error {
public:
    enum class Code {
        BadMagic,
        UnsupportedVersion,
        TruncatedManifest,
        BadManifest,
        TruncatedTensorRegion,
        OffsetInconsistency,
        Io,
    };

    FormatError(Code code, const std::string& msg) : Error(msg), code_(code) {}
    Code code() const { return code_; }

private:
    Code code_;
};

/// Operator registry misuse: duplicate registration or mutation after
/// the registry has been frozen for execution.
class RegistryError : public Error {
public:
    using Error::Error;
};

/// A graph references operator types absent from the registry. Carries
/// the full sorted list of missing types.
class UnknownOperatorError : public Error {
public:
    UnknownOperatorError(std::vector<std::string> op_types, const std::string& msg)
        : Error(msg), op_types_(std::move(op_types)) {}
    const std::vector<std::string>& op_types() const { return op_types_; }

private:
    std::vector<std::string> op_types_;
};

/// Dataset / CSV ingestion problems: bad timestamps, misaligned grids,
/// out-of-range power values, missing metadata.
class DataError : public Error {
public:
    using Error::Error;
};

/// API contract violation, e.g. backward() called with a stale cache.
class ContractError : public Error {
public:
    using Error::Error;
};

/// Training diverged or aborted; message includes the last finite epoch.
class TrainingError : public Error {
public:
    using Error::Error;
};

} // namespace egir
