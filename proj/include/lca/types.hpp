#pragma once

#include <Eigen/Dense>

#include <algorithm>
#include <cstddef>
#include <stdexcept>
#include <string>
#include <vector>

namespace lca {

using Vector = Eigen::VectorXd;
using Matrix = Eigen::MatrixXd;
using Index = Eigen::Index;

/// Sorted, duplicate-free list of node indices (0-based).
using IndexSet = std::vector<Index>;

/// Base class of every error thrown by the library.
class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

class InvalidArgument : public Error {
public:
    using Error::Error;
};

class ZeroColumn : public Error {
public:
    explicit ZeroColumn(Index column)
        : Error("column " + std::to_string(column) + " has (near) zero norm"), column_(column) {}
    Index column() const noexcept { return column_; }

private:
    Index column_;
};

class InvalidSparsity : public Error {
public:
    using Error::Error;
};

class InversionFailure : public Error {
public:
    using Error::Error;
};

class NonFiniteState : public Error {
public:
    explicit NonFiniteState(double t)
        : Error("non-finite LCA state at t=" + std::to_string(t) + " (try a smaller dt)"), t_(t) {}
    double time() const noexcept { return t_; }

private:
    double t_;
};

class UnsupportedCost : public Error {
public:
    using Error::Error;
};

class EmptySupport : public Error {
public:
    EmptySupport() : Error("support set is empty") {}
};

class DegenerateStart : public Error {
public:
    DegenerateStart() : Error("initial state coincides with the reference fixed point") {}
};

class StepTooLarge : public Error {
public:
    using Error::Error;
};

namespace detail {

inline void require(bool ok, const std::string& what) {
    if (!ok) throw InvalidArgument(what);
}

inline double sign(double x) { return (x > 0.0) - (x < 0.0); }

inline bool is_sorted_unique(const IndexSet& s) {
    return std::adjacent_find(s.begin(), s.end(), [](Index a, Index b) { return a >= b; }) == s.end();
}

inline IndexSet set_union(const IndexSet& a, const IndexSet& b) {
    IndexSet out;
    out.reserve(a.size() + b.size());
    std::set_union(a.begin(), a.end(), b.begin(), b.end(), std::back_inserter(out));
    return out;
}

inline IndexSet set_difference(const IndexSet& a, const IndexSet& b) {
    IndexSet out;
    std::set_difference(a.begin(), a.end(), b.begin(), b.end(), std::back_inserter(out));
    return out;
}

inline IndexSet complement(const IndexSet& s, Index n) {
    IndexSet out;
    out.reserve(static_cast<std::size_t>(n) - s.size());
    auto it = s.begin();
    for (Index i = 0; i < n; ++i) {
        if (it != s.end() && *it == i) {
            ++it;
        } else {
            out.push_back(i);
        }
    }
    return out;
}

/// Rows of `v` indexed by `idx`.
inline Vector gather(const Vector& v, const IndexSet& idx) {
    Vector out(static_cast<Index>(idx.size()));
    for (std::size_t k = 0; k < idx.size(); ++k) out[static_cast<Index>(k)] = v[idx[k]];
    return out;
}

/// Columns of `m` indexed by `idx`.
inline Matrix gather_columns(const Matrix& m, const IndexSet& idx) {
    Matrix out(m.rows(), static_cast<Index>(idx.size()));
    for (std::size_t k = 0; k < idx.size(); ++k) out.col(static_cast<Index>(k)) = m.col(idx[k]);
    return out;
}

inline IndexSet nonzeros(const Vector& v) {
    IndexSet out;
    for (Index i = 0; i < v.size(); ++i)
        if (v[i] != 0.0) out.push_back(i);
    return out;
}

inline bool all_finite(const Vector& v) { return v.allFinite(); }

}  // namespace detail
}  // namespace lca
