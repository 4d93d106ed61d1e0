#pragma once

// Synthetic regression models with known generating functions.
//
//   M1_ratio      Y = sin(X1) + sigma e                      f = sin(x1)
//   M2_additive   Y = exp(X1) + sign(X2) X2^2 + sigma e      f = (exp(x1), sign(x2) x2^2)
//   M3_symmetric  Y = X1^2 - 1 + sigma e                     f = x1^2 - 1
//
// X has iid standard normal coordinates truncated to [-3, 3] and e is
// standard normal. Only the listed coordinates of X enter Y.

#include <cstdint>
#include <string>

#include <Eigen/Dense>

#include "gsir/errors.hpp"
#include "gsir/random.hpp"

namespace gsir::datagen {

using Eigen::Index;
using Eigen::MatrixXd;

enum class ModelId { M1_ratio, M2_additive, M3_symmetric };

inline std::string to_string(ModelId id) {
    switch (id) {
        case ModelId::M1_ratio: return "M1_ratio";
        case ModelId::M2_additive: return "M2_additive";
        case ModelId::M3_symmetric: return "M3_symmetric";
    }
    return "unknown";
}

inline ModelId model_id_from_string(const std::string& s) {
    if (s == "M1_ratio") return ModelId::M1_ratio;
    if (s == "M2_additive") return ModelId::M2_additive;
    if (s == "M3_symmetric") return ModelId::M3_symmetric;
    throw InputError("unknown synthetic model id '" + s + "'");
}

inline constexpr double kTruncation = 3.0;

struct SyntheticModel {
    ModelId id = ModelId::M3_symmetric;
    Index p = 5;
    double sigma_noise = 0.2;

    int d_true() const { return id == ModelId::M2_additive ? 2 : 1; }

    void validate() const {
        if (p < d_true())
            throw InputError(to_string(id) + " needs p >= " + std::to_string(d_true()) + ", got p=" +
                             std::to_string(p));
        if (!(sigma_noise >= 0.0)) throw InputError("sigma_noise must be >= 0");
    }
};

struct Dataset {
    MatrixXd X;       // n x p
    MatrixXd Y;       // n x 1
    MatrixXd F_true;  // n x d_true
};

/// Generating function values at the rows of `x`.
inline MatrixXd true_predictors(const SyntheticModel& model, const MatrixXd& x) {
    model.validate();
    if (x.cols() != model.p) throw InputError("true_predictors: point dimension does not match model p");
    MatrixXd f(x.rows(), model.d_true());
    for (Index i = 0; i < x.rows(); ++i) {
        const double x1 = x(i, 0);
        switch (model.id) {
            case ModelId::M1_ratio: f(i, 0) = std::sin(x1); break;
            case ModelId::M2_additive: {
                const double x2 = x(i, 1);
                f(i, 0) = std::exp(x1);
                f(i, 1) = (x2 > 0.0 ? 1.0 : (x2 < 0.0 ? -1.0 : 0.0)) * x2 * x2;
                break;
            }
            case ModelId::M3_symmetric: f(i, 0) = x1 * x1 - 1.0; break;
        }
    }
    return f;
}

inline Dataset generate(const SyntheticModel& model, Index n, std::uint64_t seed) {
    model.validate();
    if (n < 1) throw InputError("generate: n must be >= 1");
    Rng rng(seed);
    Dataset data;
    data.X.resize(n, model.p);
    for (Index i = 0; i < n; ++i) {
        for (Index k = 0; k < model.p; ++k) {
            double z = rng.normal();
            while (z < -kTruncation || z > kTruncation) z = rng.normal();
            data.X(i, k) = z;
        }
    }
    data.F_true = true_predictors(model, data.X);
    data.Y.resize(n, 1);
    for (Index i = 0; i < n; ++i) data.Y(i, 0) = data.F_true.row(i).sum() + model.sigma_noise * rng.normal();
    return data;
}

}  // namespace gsir::datagen
