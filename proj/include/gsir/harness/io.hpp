#pragma once

// CSV and model-document I/O. Floating-point values are written with 17
// significant digits so that every double round-trips exactly.

#include <cstdio>
#include <fstream>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include <json.hpp>

#include "gsir/datagen.hpp"
#include "gsir/errors.hpp"
#include "gsir/gsir.hpp"
#include "gsir/harness/config.hpp"

namespace gsir::harness {

inline std::string format_double(double v) {
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

/// Parsed CSV with a header row and numeric cells.
struct CsvTable {
    std::vector<std::string> header;
    MatrixXd values;

    Index column(const std::string& name) const {
        for (std::size_t i = 0; i < header.size(); ++i)
            if (header[i] == name) return static_cast<Index>(i);
        return -1;
    }

    /// Columns named prefix1, prefix2, ... in order, e.g. x_1, x_2.
    MatrixXd numbered_columns(const std::string& prefix) const {
        std::vector<Index> idx;
        for (int k = 1;; ++k) {
            const Index c = column(prefix + std::to_string(k));
            if (c < 0) break;
            idx.push_back(c);
        }
        MatrixXd out(values.rows(), static_cast<Index>(idx.size()));
        for (std::size_t k = 0; k < idx.size(); ++k) out.col(static_cast<Index>(k)) = values.col(idx[k]);
        return out;
    }
};

inline std::vector<std::string> split_csv_line(const std::string& line) {
    std::vector<std::string> cells;
    std::stringstream ss(line);
    std::string cell;
    while (std::getline(ss, cell, ',')) cells.push_back(cell);
    if (!line.empty() && line.back() == ',') cells.emplace_back();
    return cells;
}

inline CsvTable parse_csv(std::istream& in, const std::string& name = "csv") {
    CsvTable t;
    std::string line;
    if (!std::getline(in, line)) throw InputError(name + ": empty file");
    if (!line.empty() && line.back() == '\r') line.pop_back();
    t.header = split_csv_line(line);
    std::vector<std::vector<double>> rows;
    while (std::getline(in, line)) {
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (line.empty()) continue;
        const auto cells = split_csv_line(line);
        if (cells.size() != t.header.size())
            throw InputError(name + ": row " + std::to_string(rows.size() + 2) + " has " +
                             std::to_string(cells.size()) + " cells, header has " + std::to_string(t.header.size()));
        std::vector<double> row;
        for (const auto& c : cells) {
            try {
                std::size_t pos = 0;
                row.push_back(std::stod(c, &pos));
                if (pos != c.size()) throw std::invalid_argument(c);
            } catch (const std::exception&) {
                throw InputError(name + ": non-numeric cell '" + c + "'");
            }
        }
        rows.push_back(std::move(row));
    }
    t.values.resize(static_cast<Index>(rows.size()), static_cast<Index>(t.header.size()));
    for (std::size_t i = 0; i < rows.size(); ++i)
        for (std::size_t k = 0; k < rows[i].size(); ++k)
            t.values(static_cast<Index>(i), static_cast<Index>(k)) = rows[i][k];
    return t;
}

inline CsvTable read_csv_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError("cannot open '" + path + "'");
    return parse_csv(in, path);
}

inline void write_text_file(const std::string& path, const std::string& content) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw ConfigError("cannot write '" + path + "'");
    out << content;
    if (!out) throw ConfigError("failed writing '" + path + "'");
}

/// Columns x_1..x_p, y, f_1..f_d.
inline std::string dataset_csv(const datagen::Dataset& data) {
    std::ostringstream out;
    const Index p = data.X.cols(), d = data.F_true.cols();
    for (Index k = 0; k < p; ++k) out << "x_" << k + 1 << ',';
    out << 'y';
    for (Index k = 0; k < d; ++k) out << ",f_" << k + 1;
    out << '\n';
    for (Index i = 0; i < data.X.rows(); ++i) {
        for (Index k = 0; k < p; ++k) out << format_double(data.X(i, k)) << ',';
        out << format_double(data.Y(i, 0));
        for (Index k = 0; k < d; ++k) out << ',' << format_double(data.F_true(i, k));
        out << '\n';
    }
    return out.str();
}

/// Columns phi_1..phi_d, one row per evaluation point.
inline std::string predictions_csv(const MatrixXd& values) {
    std::ostringstream out;
    for (Index k = 0; k < values.cols(); ++k) out << (k ? "," : "") << "phi_" << k + 1;
    out << '\n';
    for (Index i = 0; i < values.rows(); ++i) {
        for (Index k = 0; k < values.cols(); ++k) out << (k ? "," : "") << format_double(values(i, k));
        out << '\n';
    }
    return out.str();
}

inline constexpr int kModelVersion = 1;

namespace detail {

inline void write_matrix(std::ostream& out, const MatrixXd& m) {
    out << '[';
    for (Index i = 0; i < m.rows(); ++i) {
        out << (i ? "," : "") << '[';
        for (Index k = 0; k < m.cols(); ++k) out << (k ? "," : "") << format_double(m(i, k));
        out << ']';
    }
    out << ']';
}

inline void write_kernel(std::ostream& out, const KernelSpec& k) {
    out << "{\"family\":\"" << to_string(k.family) << "\",\"gamma\":" << format_double(k.gamma) << '}';
}

inline MatrixXd read_matrix(const nlohmann::json& j, const std::string& field) {
    if (!j.is_array()) throw InputError("model field '" + field + "' must be an array of rows");
    const Index rows = static_cast<Index>(j.size());
    const Index cols = rows > 0 ? static_cast<Index>(j[0].size()) : 0;
    MatrixXd m(rows, cols);
    for (Index i = 0; i < rows; ++i) {
        const auto& r = j[static_cast<std::size_t>(i)];
        if (!r.is_array() || static_cast<Index>(r.size()) != cols)
            throw InputError("model field '" + field + "' has ragged rows");
        for (Index k = 0; k < cols; ++k) m(i, k) = r[static_cast<std::size_t>(k)].get<double>();
    }
    return m;
}

inline KernelSpec read_kernel(const nlohmann::json& j) {
    KernelSpec k;
    k.family = kernel_family_from_string(j.at("family").get<std::string>());
    k.gamma = j.at("gamma").get<double>();
    k.validate();
    return k;
}

}  // namespace detail

/// {version, variant, kernel_x, kernel_y, epsilon, d, train_points,
///  coefficients, eigenvalues}; coefficients are stored row-per-training-point.
inline std::string model_to_json(const GsirFit& fit) {
    std::ostringstream out;
    out << "{\n  \"version\": " << kModelVersion << ",\n  \"variant\": \"" << to_string(fit.variant) << "\",\n";
    out << "  \"kernel_x\": ";
    detail::write_kernel(out, fit.kernel_x);
    out << ",\n  \"kernel_y\": ";
    detail::write_kernel(out, fit.kernel_y);
    out << ",\n  \"epsilon\": " << format_double(fit.epsilon) << ",\n  \"d\": " << fit.d << ",\n";
    out << "  \"train_points\": ";
    detail::write_matrix(out, fit.train_points);
    out << ",\n  \"coefficients\": ";
    detail::write_matrix(out, fit.coefficients);
    out << ",\n  \"eigenvalues\": [";
    for (Index k = 0; k < fit.eigenvalues.size(); ++k) out << (k ? "," : "") << format_double(fit.eigenvalues(k));
    out << "]\n}\n";
    return out.str();
}

inline GsirFit model_from_json(const nlohmann::json& j) {
    try {
        static const std::set<std::string> fields{"version",      "variant",      "kernel_x",   "kernel_y",   "epsilon",
                                                  "d",            "train_points", "coefficients", "eigenvalues"};
        for (const auto& item : j.items())
            if (!fields.contains(item.key())) throw InputError("unknown model field '" + item.key() + "'");
        if (j.at("version").get<int>() != kModelVersion) throw InputError("unsupported model version");
        GsirFit fit;
        fit.variant = gsir_variant_from_string(j.at("variant").get<std::string>());
        fit.kernel_x = detail::read_kernel(j.at("kernel_x"));
        fit.kernel_y = detail::read_kernel(j.at("kernel_y"));
        fit.epsilon = j.at("epsilon").get<double>();
        fit.d = j.at("d").get<int>();
        fit.train_points = detail::read_matrix(j.at("train_points"), "train_points");
        fit.coefficients = detail::read_matrix(j.at("coefficients"), "coefficients");
        const auto ev = j.at("eigenvalues").get<std::vector<double>>();
        fit.eigenvalues = Eigen::Map<const VectorXd>(ev.data(), static_cast<Index>(ev.size()));
        if (fit.coefficients.rows() != fit.train_points.rows() || fit.coefficients.cols() != fit.d ||
            fit.eigenvalues.size() != fit.d)
            throw InputError("model arrays are inconsistent with d and the training sample size");
        return fit;
    } catch (const nlohmann::json::exception& e) {
        throw InputError(std::string("malformed model document: ") + e.what());
    }
}

}  // namespace gsir::harness
