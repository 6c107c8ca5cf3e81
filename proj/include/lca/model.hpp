#pragma once

#include "lca/random.hpp"
#include "lca/types.hpp"

#include <cmath>
#include <cstdint>
#include <numbers>
#include <numeric>
#include <string>
#include <utility>

namespace lca {

/// How a dictionary was built; lets problem files name a constructor
/// instead of inlining the matrix.
enum class DictionaryKind { Dense, CanonicalSinusoid };

/// M x N matrix whose columns (atoms) all have unit Euclidean norm.
class Dictionary {
public:
    static constexpr double unit_norm_tol = 1e-9;

    /// Throws InvalidArgument unless every column is unit-norm within 1e-9.
    explicit Dictionary(Matrix columns, DictionaryKind kind = DictionaryKind::Dense)
        : phi_(std::move(columns)), kind_(kind) {
        detail::require(phi_.rows() >= 1 && phi_.cols() >= 1, "dictionary must be at least 1x1");
        for (Index j = 0; j < phi_.cols(); ++j) {
            if (std::abs(phi_.col(j).norm() - 1.0) > unit_norm_tol)
                throw InvalidArgument("dictionary column " + std::to_string(j) + " is not unit-norm");
        }
    }

    const Matrix& matrix() const noexcept { return phi_; }
    Index m() const noexcept { return phi_.rows(); }
    Index n() const noexcept { return phi_.cols(); }
    DictionaryKind kind() const noexcept { return kind_; }

    /// Largest deviation of a column norm from 1.
    double max_norm_deviation() const {
        double worst = 0.0;
        for (Index j = 0; j < phi_.cols(); ++j) worst = std::max(worst, std::abs(phi_.col(j).norm() - 1.0));
        return worst;
    }

private:
    Matrix phi_;
    DictionaryKind kind_;
};

class Problem {
public:
    Problem(Dictionary dictionary, Vector y, double lambda)
        : dictionary_(std::move(dictionary)), y_(std::move(y)), lambda_(lambda) {
        detail::require(lambda_ > 0.0 && std::isfinite(lambda_), "lambda must be positive");
        detail::require(y_.size() == dictionary_.m(), "length of y must equal the dictionary row count");
        detail::require(y_.allFinite(), "y must be finite");
    }

    const Dictionary& dictionary() const noexcept { return dictionary_; }
    const Matrix& phi() const noexcept { return dictionary_.matrix(); }
    const Vector& y() const noexcept { return y_; }
    double lambda() const noexcept { return lambda_; }
    Index m() const noexcept { return dictionary_.m(); }
    Index n() const noexcept { return dictionary_.n(); }

private:
    Dictionary dictionary_;
    Vector y_;
    double lambda_;
};

struct GroundTruth {
    Vector a0;
    IndexSet support;
    double noise_std = 0.0;
};

struct Instance {
    Problem problem;
    GroundTruth truth;
};

inline Dictionary normalize_columns(const Matrix& matrix) {
    Matrix out = matrix;
    for (Index j = 0; j < out.cols(); ++j) {
        const double norm = out.col(j).norm();
        if (!(norm >= 1e-12)) throw ZeroColumn(j);
        out.col(j) /= norm;
    }
    return Dictionary(std::move(out));
}

/// Orthonormal DCT-II basis of R^m; column k is the k-th cosine atom.
inline Matrix dct_basis(Index m) {
    Matrix c(m, m);
    const double md = static_cast<double>(m);
    for (Index k = 0; k < m; ++k) {
        const double scale = k == 0 ? std::sqrt(1.0 / md) : std::sqrt(2.0 / md);
        for (Index j = 0; j < m; ++j)
            c(j, k) = scale * std::cos(std::numbers::pi * (2.0 * static_cast<double>(j) + 1.0) *
                                       static_cast<double>(k) / (2.0 * md));
    }
    return c;
}

/// [I | C]: the canonical basis followed by the DCT-II basis, m x 2m.
inline Dictionary build_canonical_sinusoid_dictionary(Index m) {
    detail::require(m >= 2, "canonical/sinusoid dictionary needs m >= 2");
    Matrix phi(m, 2 * m);
    phi.leftCols(m).setIdentity();
    phi.rightCols(m) = dct_basis(m);
    for (Index j = m; j < 2 * m; ++j) phi.col(j).normalize();
    return Dictionary(std::move(phi), DictionaryKind::CanonicalSinusoid);
}

/// Random sparse instance y = Phi a0 + noise.
///
/// Draw order from the seeded stream: support positions (partial
/// Fisher-Yates), then the s amplitudes, then the m noise samples.
inline Instance generate_instance(std::uint64_t seed, const Dictionary& dictionary, Index s, double noise_std,
                                  double lambda) {
    const Index n = dictionary.n();
    const Index m = dictionary.m();
    if (s < 1 || s > n) throw InvalidSparsity("sparsity " + std::to_string(s) + " not in [1, " + std::to_string(n) + "]");
    detail::require(noise_std >= 0.0, "noise_std must be nonnegative");

    Rng rng(seed);
    std::vector<Index> perm(static_cast<std::size_t>(n));
    std::iota(perm.begin(), perm.end(), Index{0});
    for (Index i = 0; i < s; ++i) {
        const auto j = i + static_cast<Index>(rng.index(static_cast<std::uint64_t>(n - i)));
        std::swap(perm[static_cast<std::size_t>(i)], perm[static_cast<std::size_t>(j)]);
    }
    IndexSet support(perm.begin(), perm.begin() + s);
    std::sort(support.begin(), support.end());

    Vector amplitudes(s);
    for (Index i = 0; i < s; ++i) amplitudes[i] = rng.normal();
    // A zero draw would shrink the support; it has probability zero but
    // guard it so the support invariant is exact.
    for (Index i = 0; i < s; ++i)
        if (amplitudes[i] == 0.0) amplitudes[i] = 1.0;
    amplitudes.normalize();

    Vector a0 = Vector::Zero(n);
    for (Index i = 0; i < s; ++i) a0[support[static_cast<std::size_t>(i)]] = amplitudes[i];

    Vector y = dictionary.matrix() * a0;
    if (noise_std > 0.0)
        for (Index i = 0; i < m; ++i) y[i] += noise_std * rng.normal();

    return Instance{Problem(dictionary, std::move(y), lambda), GroundTruth{std::move(a0), std::move(support), noise_std}};
}

/// Same, on the canonical/sinusoid dictionary; requires n == 2m.
inline Instance generate_instance(std::uint64_t seed, Index m, Index n, Index s, double noise_std, double lambda) {
    detail::require(n == 2 * m, "the canonical/sinusoid dictionary has n = 2m; pass a Dictionary for other shapes");
    if (s > n) throw InvalidSparsity("sparsity " + std::to_string(s) + " exceeds n=" + std::to_string(n));
    return generate_instance(seed, build_canonical_sinusoid_dictionary(m), s, noise_std, lambda);
}

/// Driving inputs Phi^T y.
inline Vector driving_input(const Problem& problem) { return problem.phi().transpose() * problem.y(); }

/// Interconnection matrix G = Phi^T Phi - I.
inline Matrix interconnection(const Problem& problem) {
    Matrix g = problem.phi().transpose() * problem.phi();
    g.diagonal().array() -= 1.0;
    return g;
}

}  // namespace lca
