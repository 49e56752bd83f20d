#pragma once

#include <cmath>
#include <cstddef>
#include <ostream>
#include <span>
#include <string>
#include <vector>

#include "mlgc/core_model.hpp"

namespace mlgc {

/// Dense row-major square matrix of doubles.
class SquareMatrix {
public:
    SquareMatrix() = default;
    explicit SquareMatrix(std::size_t n, double fill = 0.0) : n_(n), data_(n * n, fill) {}

    static SquareMatrix identity(std::size_t n) {
        SquareMatrix m(n);
        for (std::size_t i = 0; i < n; ++i) m(i, i) = 1.0;
        return m;
    }

    std::size_t size() const noexcept { return n_; }

    double& operator()(std::size_t i, std::size_t j) noexcept { return data_[i * n_ + j]; }
    double operator()(std::size_t i, std::size_t j) const noexcept { return data_[i * n_ + j]; }

    std::span<const double> row(std::size_t i) const noexcept { return {data_.data() + i * n_, n_}; }
    std::span<double> row(std::size_t i) noexcept { return {data_.data() + i * n_, n_}; }

    double frobenius_norm() const noexcept {
        double s = 0.0;
        for (double v : data_) s += v * v;
        return std::sqrt(s);
    }

    bool is_symmetric() const noexcept {
        for (std::size_t i = 0; i < n_; ++i)
            for (std::size_t j = i + 1; j < n_; ++j)
                if ((*this)(i, j) != (*this)(j, i)) return false;
        return true;
    }

    bool all_finite() const noexcept {
        for (double v : data_)
            if (!std::isfinite(v)) return false;
        return true;
    }

    friend bool operator==(const SquareMatrix&, const SquareMatrix&) = default;

private:
    std::size_t n_ = 0;
    std::vector<double> data_;
};

inline SquareMatrix multiply(const SquareMatrix& a, const SquareMatrix& b) {
    const std::size_t n = a.size();
    if (b.size() != n) throw Error(ErrorKind::Dimension, "multiply: size mismatch");
    SquareMatrix c(n);
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t k = 0; k < n; ++k) {
            const double aik = a(i, k);
            if (aik == 0.0) continue;
            for (std::size_t j = 0; j < n; ++j) c(i, j) += aik * b(k, j);
        }
    return c;
}

inline SquareMatrix transpose(const SquareMatrix& a) {
    SquareMatrix t(a.size());
    for (std::size_t i = 0; i < a.size(); ++i)
        for (std::size_t j = 0; j < a.size(); ++j) t(j, i) = a(i, j);
    return t;
}

/// Strongly typed wrapper so S, W and L cannot be swapped by accident.
template <class Tag>
class TaggedMatrix {
public:
    TaggedMatrix() = default;
    explicit TaggedMatrix(SquareMatrix m) : m_(std::move(m)) {}

    std::size_t size() const noexcept { return m_.size(); }
    double operator()(std::size_t i, std::size_t j) const noexcept { return m_(i, j); }
    const SquareMatrix& matrix() const noexcept { return m_; }

    friend bool operator==(const TaggedMatrix&, const TaggedMatrix&) = default;

private:
    SquareMatrix m_;
};

struct SimilarityTag {};
struct WeightTag {};
struct LaplacianTag {};

/// Symmetric, unit diagonal, entries in [0,1].
using SimilarityMatrix = TaggedMatrix<SimilarityTag>;
/// Symmetric, zero diagonal, entries in [0,1].
using WeightMatrix = TaggedMatrix<WeightTag>;
/// L = D - W; symmetric, zero row sums, PSD.
using Laplacian = TaggedMatrix<LaplacianTag>;

/// Assignment of n vertices to k non-empty groups labelled 0..k-1.
struct Partition {
    int k = 1;
    std::vector<int> assign;

    std::size_t size() const noexcept { return assign.size(); }

    std::vector<std::size_t> group_sizes() const {
        std::vector<std::size_t> sizes(static_cast<std::size_t>(k), 0);
        for (int g : assign) ++sizes[static_cast<std::size_t>(g)];
        return sizes;
    }

    std::vector<std::vector<std::size_t>> groups() const {
        std::vector<std::vector<std::size_t>> out(static_cast<std::size_t>(k));
        for (std::size_t i = 0; i < assign.size(); ++i)
            out[static_cast<std::size_t>(assign[i])].push_back(i);
        return out;
    }

    /// Throws Invariant if a label is out of range or a group is empty.
    void validate() const {
        if (k < 1) throw Error(ErrorKind::Invariant, "partition: k must be >= 1");
        std::vector<bool> seen(static_cast<std::size_t>(k), false);
        for (int g : assign) {
            if (g < 0 || g >= k) throw Error(ErrorKind::Invariant, "partition: group id out of range");
            seen[static_cast<std::size_t>(g)] = true;
        }
        for (int g = 0; g < k; ++g)
            if (!seen[static_cast<std::size_t>(g)])
                throw Error(ErrorKind::Invariant, "partition: group " + std::to_string(g) + " is empty");
    }

    /// Relabels groups in order of first appearance.
    Partition canonical() const {
        std::vector<int> map(static_cast<std::size_t>(k), -1);
        int next = 0;
        Partition out{k, assign};
        for (int& g : out.assign) {
            int& m = map[static_cast<std::size_t>(g)];
            if (m < 0) m = next++;
            g = m;
        }
        return out;
    }

    friend bool operator==(const Partition&, const Partition&) = default;
};

/// One row per line, space separated, full precision.
inline void write_matrix_text(std::ostream& os, const SquareMatrix& m) {
    const auto old = os.precision(17);
    for (std::size_t i = 0; i < m.size(); ++i) {
        for (std::size_t j = 0; j < m.size(); ++j) {
            if (j) os << ' ';
            os << m(i, j);
        }
        os << '\n';
    }
    os.precision(old);
}

}  // namespace mlgc
