#include "hsa/datasets.hpp"

#include <cctype>
#include <charconv>
#include <cmath>
#include <fstream>
#include <limits>
#include <random>
#include <sstream>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

namespace hsa {

namespace {

std::string_view trim(std::string_view s) {
    while (!s.empty() && (s.front() == ' ' || s.front() == '\t')) s.remove_prefix(1);
    while (!s.empty() && (s.back() == ' ' || s.back() == '\t')) s.remove_suffix(1);
    return s;
}

double parse_cell(std::string_view cell, std::size_t line_number) {
    const std::string_view trimmed = trim(cell);
    double value = 0.0;
    const char* begin = trimmed.data();
    const char* end = trimmed.data() + trimmed.size();
    const auto [ptr, ec] = std::from_chars(begin, end, value);
    if (ec != std::errc{} || ptr != end || trimmed.empty()) {
        throw std::runtime_error("line " + std::to_string(line_number) + ": non-numeric value '" +
                                 std::string(cell) + "'");
    }
    if (!std::isfinite(value)) {
        throw std::runtime_error("line " + std::to_string(line_number) + ": non-finite value '" +
                                 std::string(cell) + "'");
    }
    return value;
}

std::vector<std::string_view> split_fields(std::string_view line) {
    std::vector<std::string_view> fields;
    std::size_t start = 0;
    for (;;) {
        const std::size_t comma = line.find(',', start);
        if (comma == std::string_view::npos) {
            fields.push_back(line.substr(start));
            return fields;
        }
        fields.push_back(line.substr(start, comma - start));
        start = comma + 1;
    }
}

}  // namespace

void ShiftSpec::validate() const {
    if (d < 1) throw std::invalid_argument("ShiftSpec: d must be at least 1");
    if (n_per_domain < 2) throw std::invalid_argument("ShiftSpec: n_per_domain must be at least 2");
    if (informative_dims < 0 || informative_dims > d) {
        throw std::invalid_argument("ShiftSpec: informative_dims must lie in [0, d]");
    }
    if (!std::isfinite(shift_magnitude) || !std::isfinite(rotation_angle) ||
        !std::isfinite(class_separation)) {
        throw std::invalid_argument("ShiftSpec: parameters must be finite");
    }
}

SampleSet load_csv(const std::string& path, bool has_labels, DomainTag tag, bool skip_header) {
    std::ifstream in(path, std::ios::binary);
    if (!in) {
        throw std::runtime_error("cannot open file: " + path);
    }
    std::stringstream buffer;
    buffer << in.rdbuf();
    const std::string content = buffer.str();

    std::vector<std::string_view> lines;
    {
        std::string_view rest = content;
        while (!rest.empty()) {
            const std::size_t newline = rest.find('\n');
            std::string_view line =
                newline == std::string_view::npos ? rest : rest.substr(0, newline);
            if (!line.empty() && line.back() == '\r') line.remove_suffix(1);
            lines.push_back(line);
            if (newline == std::string_view::npos) break;
            rest = rest.substr(newline + 1);
        }
        while (!lines.empty() && lines.back().empty()) lines.pop_back();
    }
    if (lines.empty()) {
        throw std::runtime_error("empty file: " + path);
    }

    std::vector<std::vector<double>> rows;
    std::vector<int> labels;
    std::size_t n_fields = 0;
    const std::size_t first_data_line = skip_header ? 1 : 0;
    for (std::size_t li = first_data_line; li < lines.size(); ++li) {
        const std::size_t line_number = li + 1;
        if (lines[li].empty()) {
            throw std::runtime_error("line " + std::to_string(line_number) + ": empty line");
        }
        const auto fields = split_fields(lines[li]);
        if (rows.empty()) {
            n_fields = fields.size();
            if (has_labels && n_fields < 2) {
                throw std::runtime_error("line " + std::to_string(line_number) +
                                         ": no feature columns before the label column");
            }
        } else if (fields.size() != n_fields) {
            throw std::runtime_error("line " + std::to_string(line_number) + ": expected " +
                                     std::to_string(n_fields) + " fields, got " +
                                     std::to_string(fields.size()));
        }

        const std::size_t n_features = has_labels ? n_fields - 1 : n_fields;
        std::vector<double> row(n_features);
        for (std::size_t c = 0; c < n_features; ++c) {
            row[c] = parse_cell(fields[c], line_number);
        }
        if (has_labels) {
            const double raw = parse_cell(fields[n_fields - 1], line_number);
            if (raw != std::floor(raw) || std::abs(raw) > std::numeric_limits<int>::max()) {
                throw std::runtime_error("line " + std::to_string(line_number) + ": label '" +
                                         std::string(fields[n_fields - 1]) +
                                         "' is not an integer");
            }
            labels.push_back(static_cast<int>(raw));
        }
        rows.push_back(std::move(row));
    }
    if (rows.empty()) {
        throw std::runtime_error("no data rows in file: " + path);
    }

    Eigen::MatrixXd data(static_cast<Eigen::Index>(rows.size()),
                         static_cast<Eigen::Index>(rows.front().size()));
    for (std::size_t i = 0; i < rows.size(); ++i) {
        for (std::size_t j = 0; j < rows[i].size(); ++j) {
            data(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) = rows[i][j];
        }
    }
    if (!has_labels) {
        return SampleSet(std::move(data), tag);
    }
    Eigen::VectorXi label_vector(static_cast<Eigen::Index>(labels.size()));
    for (std::size_t i = 0; i < labels.size(); ++i) {
        label_vector(static_cast<Eigen::Index>(i)) = labels[i];
    }
    return SampleSet(std::move(data), std::move(label_vector), tag);
}

std::pair<SampleSet, SampleSet> make_shift_pair(const ShiftSpec& spec) {
    spec.validate();
    std::mt19937_64 engine(spec.seed);
    std::normal_distribution<double> normal(0.0, 1.0);

    const Eigen::Index n = spec.n_per_domain;
    const Eigen::Index d = spec.d;
    const Eigen::Index informative = spec.informative_dims;
    const Eigen::Index nuisance = d - informative;

    auto draw_domain = [&](bool is_target, DomainTag tag) {
        Eigen::MatrixXd data(n, d);
        Eigen::VectorXi labels(n);
        for (Eigen::Index i = 0; i < n; ++i) {
            const int label = static_cast<int>(i % 2);
            labels(i) = label;
            const double class_mean = (label == 1 ? 0.5 : -0.5) * spec.class_separation;
            for (Eigen::Index j = 0; j < d; ++j) {
                data(i, j) = normal(engine) + (j < informative ? class_mean : 0.0);
            }
        }
        if (is_target && nuisance >= 1) {
            if (nuisance >= 2 && spec.rotation_angle != 0.0) {
                // Rotate the zero-mean nuisance draws in the first nuisance
                // plane; the domain shift below is applied afterwards.
                const double c = std::cos(spec.rotation_angle);
                const double s = std::sin(spec.rotation_angle);
                for (Eigen::Index i = 0; i < n; ++i) {
                    const double u = data(i, informative);
                    const double v = data(i, informative + 1);
                    data(i, informative) = c * u - s * v;
                    data(i, informative + 1) = s * u + c * v;
                }
            }
            data.rightCols(nuisance).array() += spec.shift_magnitude;
        }
        return SampleSet(std::move(data), std::move(labels), tag);
    };

    SampleSet source = draw_domain(false, DomainTag::source);
    SampleSet target = draw_domain(true, DomainTag::target);
    return {std::move(source), std::move(target)};
}

StandardizeResult standardize(const SampleSet& source, const SampleSet& target) {
    if (source.dim() != target.dim()) {
        throw std::invalid_argument("standardize: source and target dimensions differ");
    }
    const Eigen::Index d = source.dim();
    const Eigen::Index n = source.size() + target.size();

    Eigen::MatrixXd pooled(n, d);
    pooled.topRows(source.size()) = source.data;
    pooled.bottomRows(target.size()) = target.data;

    Eigen::VectorXd mean(d);
    Eigen::VectorXd scale(d);
    for (Eigen::Index j = 0; j < d; ++j) {
        mean(j) = pooled.col(j).mean();
        const double var =
            (pooled.col(j).array() - mean(j)).square().sum() / static_cast<double>(n - 1);
        scale(j) = std::sqrt(var);
        if (scale(j) == 0.0) {
            throw std::runtime_error("standardize: zero-variance dimension " + std::to_string(j));
        }
    }

    auto transform = [&](const SampleSet& s) {
        Eigen::MatrixXd data = s.data;
        data.rowwise() -= mean.transpose();
        for (Eigen::Index j = 0; j < d; ++j) data.col(j) /= scale(j);
        if (s.labels) return SampleSet(std::move(data), *s.labels, s.domain_tag);
        return SampleSet(std::move(data), s.domain_tag);
    };

    return StandardizeResult{transform(source), transform(target), std::move(mean),
                             std::move(scale)};
}

double knn_transfer_accuracy(const SampleSet& source, const SampleSet& target,
                             const ProjectionMatrix& w) {
    if (!source.labels || !target.labels) {
        throw std::invalid_argument("knn_transfer_accuracy requires labeled source and target");
    }
    if (source.dim() != target.dim() || source.dim() != w.dim()) {
        throw std::invalid_argument("knn_transfer_accuracy: inconsistent dimensions");
    }
    const Eigen::MatrixXd projected_source = source.data * w.w;
    const Eigen::MatrixXd projected_target = target.data * w.w;

    Eigen::Index correct = 0;
    for (Eigen::Index i = 0; i < target.size(); ++i) {
        double best_distance = std::numeric_limits<double>::infinity();
        Eigen::Index best_index = 0;
        for (Eigen::Index j = 0; j < source.size(); ++j) {
            const double distance =
                (projected_source.row(j) - projected_target.row(i)).squaredNorm();
            if (distance < best_distance) {  // strict: ties keep the smaller row
                best_distance = distance;
                best_index = j;
            }
        }
        if ((*source.labels)(best_index) == (*target.labels)(i)) ++correct;
    }
    return static_cast<double>(correct) / static_cast<double>(target.size());
}

}  // namespace hsa
