#pragma once

// Kernel evaluation, Gram matrices and double centering.
//
// Points are stored one sample per row (n x p). Gaussian and Laplace kernels
// use the single-parameter forms exp(-gamma |x-y|^2) and exp(-gamma |x-y|_1);
// a bandwidth sigma converts as gamma = 1 / (2 sigma^2). The linear kernel is
// unbounded and exists for hand-checkable tests only.

#include <algorithm>
#include <cmath>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "gsir/errors.hpp"
#include "gsir/operator_algebra.hpp"

namespace gsir {

enum class KernelFamily { gaussian, laplace, linear };

inline std::string to_string(KernelFamily f) {
    switch (f) {
        case KernelFamily::gaussian: return "gaussian";
        case KernelFamily::laplace: return "laplace";
        case KernelFamily::linear: return "linear";
    }
    return "unknown";
}

inline KernelFamily kernel_family_from_string(const std::string& name) {
    if (name == "gaussian") return KernelFamily::gaussian;
    if (name == "laplace") return KernelFamily::laplace;
    if (name == "linear") return KernelFamily::linear;
    throw InputError("unknown kernel family '" + name + "'");
}

struct KernelSpec {
    KernelFamily family = KernelFamily::gaussian;
    double gamma = 1.0;  // ignored by the linear kernel

    static KernelSpec gaussian(double gamma) { return {KernelFamily::gaussian, gamma}; }
    static KernelSpec laplace(double gamma) { return {KernelFamily::laplace, gamma}; }
    static KernelSpec linear() { return {KernelFamily::linear, 1.0}; }

    /// k(x, x) = 1 for every x.
    bool bounded() const { return family != KernelFamily::linear; }

    void validate() const {
        if (family != KernelFamily::linear && !(gamma > 0.0 && std::isfinite(gamma)))
            throw InputError(to_string(family) + " kernel needs gamma > 0, got " + std::to_string(gamma));
    }

    friend bool operator==(const KernelSpec&, const KernelSpec&) = default;
};

template <typename DerivedA, typename DerivedB>
double eval_kernel(const KernelSpec& spec, const Eigen::MatrixBase<DerivedA>& x,
                   const Eigen::MatrixBase<DerivedB>& y) {
    if (x.size() != y.size())
        throw InputError("kernel arguments differ in dimension: " + std::to_string(x.size()) + " vs " +
                         std::to_string(y.size()));
    switch (spec.family) {
        case KernelFamily::gaussian: {
            double sq = 0.0;
            for (Index k = 0; k < x.size(); ++k) {
                const double diff = x(k) - y(k);
                sq += diff * diff;
            }
            return std::exp(-spec.gamma * sq);
        }
        case KernelFamily::laplace: {
            double l1 = 0.0;
            for (Index k = 0; k < x.size(); ++k) l1 += std::abs(x(k) - y(k));
            return std::exp(-spec.gamma * l1);
        }
        case KernelFamily::linear: {
            double dot = 0.0;
            for (Index k = 0; k < x.size(); ++k) dot += x(k) * y(k);
            return dot;
        }
    }
    return 0.0;
}

/// (K)_{ij} = k(a_i, b_j) for rows a_i of `a` and b_j of `b`.
inline MatrixXd cross_gram(const KernelSpec& spec, const MatrixXd& a, const MatrixXd& b) {
    spec.validate();
    if (a.cols() != b.cols())
        throw InputError("point sets differ in dimension: " + std::to_string(a.cols()) + " vs " +
                         std::to_string(b.cols()));
    MatrixXd k(a.rows(), b.rows());
    for (Index j = 0; j < b.rows(); ++j)
        for (Index i = 0; i < a.rows(); ++i) k(i, j) = eval_kernel(spec, a.row(i), b.row(j));
    return k;
}

/// Raw Gram matrix, evaluated on the upper triangle and mirrored.
inline MatrixXd gram(const KernelSpec& spec, const MatrixXd& points) {
    spec.validate();
    const Index n = points.rows();
    MatrixXd k(n, n);
    for (Index j = 0; j < n; ++j) {
        for (Index i = 0; i <= j; ++i) {
            const double v = eval_kernel(spec, points.row(i), points.row(j));
            k(i, j) = v;
            k(j, i) = v;
        }
    }
    return k;
}

/// Q K Q with Q = I - (1/n) 1 1^T, symmetrized.
inline MatrixXd double_center(const MatrixXd& k) {
    const VectorXd col_mean = k.colwise().mean().transpose();
    const VectorXd row_mean = k.rowwise().mean();
    const double grand = k.mean();
    MatrixXd g = k;
    g.colwise() -= row_mean;
    g.rowwise() -= col_mean.transpose();
    g.array() += grand;
    return symmetrize(g);
}

struct GramBundle {
    Index n = 0;
    MatrixXd K;  // raw Gram
    MatrixXd G;  // centered Gram Q K Q
};

inline GramBundle centered_gram(const KernelSpec& spec, const MatrixXd& points) {
    if (points.rows() < 2) throw InputError("centered_gram needs at least 2 points");
    GramBundle b;
    b.n = points.rows();
    b.K = gram(spec, points);
    b.G = double_center(b.K);
    return b;
}

/// gamma = 1 / (2 m^2) with m the median pairwise Euclidean distance.
inline double median_bandwidth(const MatrixXd& points) {
    const Index n = points.rows();
    if (n < 2) throw InputError("median_bandwidth needs at least 2 points");
    std::vector<double> dist;
    dist.reserve(static_cast<std::size_t>(n * (n - 1) / 2));
    for (Index i = 0; i < n; ++i)
        for (Index j = i + 1; j < n; ++j) dist.push_back((points.row(i) - points.row(j)).norm());
    const std::size_t mid = dist.size() / 2;
    std::nth_element(dist.begin(), dist.begin() + static_cast<std::ptrdiff_t>(mid), dist.end());
    double median = dist[mid];
    if (dist.size() % 2 == 0) {
        const double lower = *std::max_element(dist.begin(), dist.begin() + static_cast<std::ptrdiff_t>(mid));
        median = 0.5 * (median + lower);
    }
    if (!(median > 0.0)) throw InputError("median_bandwidth: median pairwise distance is zero (degenerate points)");
    return 1.0 / (2.0 * median * median);
}

}  // namespace gsir
